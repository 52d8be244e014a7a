//! Binary checkpoint format.
//!
//! All integers are little-endian `u32`, all floats little-endian `f64`:
//!
//! ```text
//! magic        8 bytes  "GRNNCKPT"
//! version      u32      1
//! variant      u32      0 = full, 1 = simple
//! m_width, embed_dim, graph_layers, graph_hidden,
//! edge_layers, edge_hidden, edge_mlp_hidden, max_nodes   8 x u32
//! count        u32      number of parameter arrays
//! count times:
//!   name_len   u32
//!   name       name_len bytes of UTF-8
//!   rows, cols u32, u32
//!   values     rows * cols f64, row-major
//! ```
//!
//! Arrays may appear in any order; loading matches them by name against the
//! architecture described by the header.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{GraphRnn, ModelConfig, Variant};

pub const MAGIC: &[u8; 8] = b"GRNNCKPT";
pub const VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Checkpoint(format!("value {v} exceeds u32")))?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

pub fn to_bytes(model: &GraphRnn) -> Result<Vec<u8>> {
    let c = model.config();
    let mut buf = Vec::with_capacity(64 + model.num_params() * 8);
    buf.extend_from_slice(MAGIC);
    put_u32(&mut buf, VERSION as usize)?;
    put_u32(&mut buf, if c.variant == Variant::Full { 0 } else { 1 })?;
    for v in [
        c.m_width,
        c.embed_dim,
        c.graph_layers,
        c.graph_hidden,
        c.edge_layers,
        c.edge_hidden,
        c.edge_mlp_hidden,
        c.max_nodes,
    ] {
        put_u32(&mut buf, v)?;
    }
    let ps = model.params();
    put_u32(&mut buf, ps.entries().len())?;
    for e in ps.entries() {
        put_u32(&mut buf, e.name.len())?;
        buf.extend_from_slice(e.name.as_bytes());
        put_u32(&mut buf, e.tensor.rows)?;
        put_u32(&mut buf, e.tensor.cols)?;
        for v in e.tensor.of(ps.data()) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<GraphRnn> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a GraphRNN checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let variant = match r.u32()? {
        0 => Variant::Full,
        1 => Variant::Simple,
        v => return Err(Error::Checkpoint(format!("unknown variant tag {v}"))),
    };
    let mut dims = [0usize; 8];
    for d in &mut dims {
        *d = r.u32()?;
    }
    let [m_width, embed_dim, graph_layers, graph_hidden, edge_layers, edge_hidden, edge_mlp_hidden, max_nodes] = dims;
    let config = ModelConfig {
        variant,
        m_width,
        embed_dim,
        graph_layers,
        graph_hidden,
        edge_layers,
        edge_hidden,
        edge_mlp_hidden,
        max_nodes,
    };
    let mut model = GraphRnn::zeroed(config).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    let count = r.u32()?;
    if count != model.params().entries().len() {
        return Err(Error::Checkpoint(format!(
            "{count} parameter arrays, architecture expects {}",
            model.params().entries().len()
        )));
    }
    let mut seen = vec![false; count];
    for _ in 0..count {
        let len = r.u32()?;
        let name = std::str::from_utf8(r.take(len)?).map_err(|_| Error::Checkpoint("parameter name is not UTF-8".into()))?;
        let idx = model
            .params()
            .entries()
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("unexpected parameter `{name}`")))?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::Checkpoint(format!("duplicate parameter `{name}`")));
        }
        let t = model.params().entries()[idx].tensor;
        let (rows, cols) = (r.u32()?, r.u32()?);
        if (rows, cols) != (t.rows, t.cols) {
            return Err(Error::Checkpoint(format!("`{name}` is {rows}x{cols}, expected {}x{}", t.rows, t.cols)));
        }
        let dst = t.of_mut(model.params_mut().data_mut());
        for v in dst.iter_mut() {
            *v = r.f64()?;
        }
    }
    if r.pos != buf.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    Ok(model)
}

pub fn save(path: &Path, model: &GraphRnn) -> Result<()> {
    write_atomic(path, &to_bytes(model)?)
}

pub fn load(path: &Path) -> Result<GraphRnn> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(variant: Variant) -> GraphRnn {
        let cfg = ModelConfig {
            variant,
            m_width: 3,
            embed_dim: 2,
            graph_layers: 2,
            graph_hidden: 3,
            edge_layers: 2,
            edge_hidden: 2,
            edge_mlp_hidden: 2,
            max_nodes: 9,
        };
        GraphRnn::new(cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        for v in [Variant::Full, Variant::Simple] {
            let m = model(v);
            let back = from_bytes(&to_bytes(&m).unwrap()).unwrap();
            assert_eq!(back.config(), m.config());
            assert_eq!(back.params().data(), m.params().data());
        }
    }

    #[test]
    fn header_layout() {
        let b = to_bytes(&model(Variant::Simple)).unwrap();
        assert_eq!(&b[..8], b"GRNNCKPT");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 3);
    }

    #[test]
    fn rejects_corruption() {
        let b = to_bytes(&model(Variant::Full)).unwrap();
        assert!(from_bytes(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(from_bytes(&extra).is_err());
        let mut magic = b.clone();
        magic[0] = b'X';
        assert!(from_bytes(&magic).is_err());
        let mut variant = b;
        variant[12] = 7;
        assert!(from_bytes(&variant).is_err());
    }
}
