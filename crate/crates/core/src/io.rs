//! Edge-list text format.
//!
//! ```text
//! # comment
//! n 4
//! 0 1
//! 1 2
//! ---
//! n 2
//! 0 1
//! ```
//!
//! Each graph starts with `n <count>` followed by one `i j` pair per line
//! (0-based, `i < j`). A graph-set file separates graphs with `---`; a
//! graph-set directory holds such files and is read in file-name order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub fn format_graph(g: &Graph) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", g.n()).unwrap();
    for (i, j) in g.edges() {
        writeln!(s, "{i} {j}").unwrap();
    }
    s
}

pub fn format_graph_set(graphs: &[Graph]) -> String {
    graphs.iter().map(format_graph).collect::<Vec<_>>().join("---\n")
}

/// Parses a graph-set document; `path` is only used in error messages.
pub fn parse_graph_set(text: &str, path: &Path) -> Result<Vec<Graph>> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut graphs = Vec::new();
    let mut current: Option<(Graph, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "---" {
            match current.take() {
                Some((g, _)) => graphs.push(g),
                None => return Err(err(line_no, "separator before any graph".into())),
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b) = (parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(err(line_no, format!("expected two fields, got `{line}`")));
        }
        match (a, b) {
            (Some("n"), Some(count)) => {
                if current.is_some() {
                    return Err(err(line_no, "missing `---` before next graph".into()));
                }
                let n: usize = count.parse().map_err(|_| err(line_no, format!("bad node count `{count}`")))?;
                let g = Graph::empty(n).map_err(|e| err(line_no, e.to_string()))?;
                current = Some((g, line_no));
            }
            (Some(i), Some(j)) => {
                let (g, _) = current.as_mut().ok_or_else(|| err(line_no, "edge before `n <count>` header".into()))?;
                let i: usize = i.parse().map_err(|_| err(line_no, format!("bad node id `{i}`")))?;
                let j: usize = j.parse().map_err(|_| err(line_no, format!("bad node id `{j}`")))?;
                if i >= j {
                    return Err(err(line_no, format!("edge `{i} {j}` must satisfy i < j")));
                }
                if !g.add_edge(i, j).map_err(|e| err(line_no, e.to_string()))? {
                    return Err(err(line_no, format!("duplicate edge `{i} {j}`")));
                }
            }
            _ => return Err(err(line_no, format!("cannot parse `{line}`"))),
        }
    }
    if let Some((g, _)) = current {
        graphs.push(g);
    }
    Ok(graphs)
}

/// Reads a graph-set file or a directory of them.
pub fn read_graphs(path: &Path) -> Result<Vec<Graph>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(read_graph_file(&f)?);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument(format!("no graphs found in {}", path.display())));
        }
        Ok(out)
    } else {
        read_graph_file(path)
    }
}

fn read_graph_file(path: &Path) -> Result<Vec<Graph>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph_set(&text, path)
}

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_graphs(path: &Path, graphs: &[Graph]) -> Result<()> {
    write_atomic(path, format_graph_set(graphs).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = "# comment\nn 4\n0 1\n1 2 # trailing\n---\nn 2\n0 1\n";
        let gs = parse_graph_set(text, Path::new("x")).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(gs[1].n(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "n 3\n0 1\n2 1\n";
        match parse_graph_set(text, Path::new("g.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_graph_set("0 1\n", Path::new("g")).is_err());
        assert!(parse_graph_set("n 2\n0 5\n", Path::new("g")).is_err());
        assert!(parse_graph_set("n 2\n0 1\n0 1\n", Path::new("g")).is_err());
        assert!(parse_graph_set("n 2\nn 3\n", Path::new("g")).is_err());
    }

    #[test]
    fn format_then_parse() {
        let gs = vec![
            Graph::from_edges(3, &[(0, 2), (1, 2)]).unwrap(),
            Graph::empty(1).unwrap(),
            Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap(),
        ];
        let text = format_graph_set(&gs);
        assert_eq!(parse_graph_set(&text, Path::new("x")).unwrap(), gs);
    }

    #[test]
    fn reads_directories_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        write_graphs(&dir.path().join("b.txt"), &[Graph::empty(2).unwrap()]).unwrap();
        write_graphs(&dir.path().join("a.txt"), &[Graph::empty(1).unwrap()]).unwrap();
        let gs = read_graphs(dir.path()).unwrap();
        assert_eq!(gs.iter().map(Graph::n).collect::<Vec<_>>(), vec![1, 2]);
    }
}
