//! Binary state snapshots.
//!
//! Layout, all little-endian: the 8 magic bytes `GPEROT01`, then `n`, `p`,
//! `m` as `u64`, the domain bounds `ax, bx, ay, by` as `f64`, then `n·p`
//! complex values as interleaved `(re, im)` pairs, component after
//! component. Values cover all `n = (2m+1)²` nodes, boundary included.

use std::path::Path;

use rotbec::{Discretization, PFrame, Rect, C64};

use crate::{io_err, CliError, Result};

pub const MAGIC: &[u8; 8] = b"GPEROT01";
const HEADER_LEN: usize = 8 + 3 * 8 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub m: usize,
    pub domain: Rect,
    pub p: usize,
    /// Nodal values, column-major by component.
    pub values: Vec<C64>,
}

fn nodes(m: usize) -> usize {
    (2 * m + 1) * (2 * m + 1)
}

impl StateFile {
    pub fn n(&self) -> usize {
        nodes(self.m)
    }

    pub fn from_frame(disc: &Discretization, phi: &PFrame) -> Self {
        let values = phi.columns().flat_map(|c| disc.to_full_nodes(c)).collect();
        StateFile { m: disc.elements_per_dir(), domain: disc.domain(), p: phi.p(), values }
    }

    /// Interior values as a frame on `disc`; the mesh must match.
    pub fn to_frame(&self, disc: &Discretization, p: usize) -> Result<PFrame> {
        if self.m != disc.elements_per_dir() || self.domain != disc.domain() || self.p != p {
            return Err(CliError::State(format!(
                "state has m = {}, p = {}, domain {:?}; configuration has m = {}, p = {p}, domain {:?}",
                self.m,
                self.p,
                self.domain,
                disc.elements_per_dir(),
                disc.domain()
            )));
        }
        let cols = self
            .values
            .chunks(self.n())
            .map(|c| disc.from_full_nodes(c))
            .collect::<rotbec::Result<Vec<_>>>()?;
        Ok(PFrame::from_columns(cols))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.values.len());
        out.extend_from_slice(MAGIC);
        for v in [self.n(), self.p, self.m] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        let d = self.domain;
        for v in [d.ax, d.bx, d.ay, d.by] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for z in &self.values {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| CliError::State(msg);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap() };
        let as_usize = |k: usize| {
            usize::try_from(u64::from_le_bytes(word(k))).map_err(|_| bad("header field overflows".into()))
        };
        let (n, p, m) = (as_usize(0)?, as_usize(1)?, as_usize(2)?);
        let [ax, bx, ay, by] = [3, 4, 5, 6].map(|k| f64::from_le_bytes(word(k)));
        let expect_n = m.checked_mul(2).and_then(|k| k.checked_add(1)).and_then(|k| k.checked_mul(k));
        if expect_n != Some(n) {
            return Err(bad(format!("n = {n} is inconsistent with m = {m}")));
        }
        let body =
            n.checked_mul(p).and_then(|k| k.checked_mul(16)).ok_or_else(|| bad("size overflows".into()))?;
        if bytes.len() != HEADER_LEN + body {
            return Err(bad(format!(
                "expected {} bytes for n = {n}, p = {p}, found {}",
                HEADER_LEN + body,
                bytes.len()
            )));
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(StateFile { m, domain: Rect { ax, bx, ay, by }, p, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(io_err(path))?)
    }
}
