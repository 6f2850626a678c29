//! Per-claim layerwise latent stacks and their binary file format.
//!
//! ```text
//! "LTNT" | version u32 = 1 | record count u32 | L u32 | h u32
//! per record: id length u32 | id UTF-8 | L*h f32, layer-major
//! ```
//! All integers and floats little-endian.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::ComplexityError;

const MAGIC: &[u8; 4] = b"LTNT";
const VERSION: u32 = 1;

/// L x h matrix of last-token representations for one claim; row `l` is
/// the representation at layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentStack {
    claim_id: String,
    layers: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl LatentStack {
    pub fn new(
        claim_id: impl Into<String>,
        layers: usize,
        hidden: usize,
        data: Vec<f64>,
    ) -> Result<Self, ComplexityError> {
        let claim_id = claim_id.into();
        if layers == 0 || hidden == 0 {
            return Err(ComplexityError::InvalidStack(format!(
                "{claim_id}: L and h must be positive (got {layers}x{hidden})"
            )));
        }
        if data.len() != layers * hidden {
            return Err(ComplexityError::InvalidStack(format!(
                "{claim_id}: expected {} values, got {}",
                layers * hidden,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(ComplexityError::InvalidStack(format!("{claim_id}: non-finite value")));
        }
        Ok(LatentStack {
            claim_id,
            layers,
            hidden,
            data,
        })
    }

    /// Builds a stack from one row per layer.
    pub fn from_rows(claim_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self, ComplexityError> {
        let hidden = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != hidden) {
            return Err(ComplexityError::InvalidStack("ragged layer rows".into()));
        }
        LatentStack::new(claim_id, rows.len(), hidden, rows.concat())
    }

    pub fn claim_id(&self) -> &str {
        &self.claim_id
    }
    pub fn layers(&self) -> usize {
        self.layers
    }
    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn layer(&self, l: usize) -> &[f64] {
        &self.data[l * self.hidden..(l + 1) * self.hidden]
    }

    /// Multiplies layer `l` by `factor`.
    pub fn scale_layer(&mut self, l: usize, factor: f64) {
        let h = self.hidden;
        for x in &mut self.data[l * h..(l + 1) * h] {
            *x *= factor;
        }
    }
}

fn get_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_latents(w: &mut impl Write, stacks: &[LatentStack]) -> Result<(), ComplexityError> {
    let (layers, hidden) = stacks.first().map_or((0, 0), |s| (s.layers, s.hidden));
    if let Some(bad) = stacks.iter().find(|s| (s.layers, s.hidden) != (layers, hidden)) {
        return Err(ComplexityError::ShapeMismatch {
            expected: (layers, hidden),
            got: (bad.layers, bad.hidden),
        });
    }
    w.write_all(MAGIC)?;
    for v in [VERSION, stacks.len() as u32, layers as u32, hidden as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for s in stacks {
        w.write_all(&(s.claim_id.len() as u32).to_le_bytes())?;
        w.write_all(s.claim_id.as_bytes())?;
        for &x in &s.data {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_latents(r: &mut impl Read) -> Result<Vec<LatentStack>, ComplexityError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ComplexityError::Corrupt("not an LTNT file (bad magic)".into()));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(ComplexityError::Corrupt(format!("unsupported LTNT version {version}")));
    }
    let count = get_u32(r)? as usize;
    let layers = get_u32(r)? as usize;
    let hidden = get_u32(r)? as usize;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; layers * hidden * 4];
    for _ in 0..count {
        let len = get_u32(r)? as usize;
        let mut id = vec![0u8; len];
        r.read_exact(&mut id)?;
        let id = String::from_utf8(id).map_err(|e| ComplexityError::Corrupt(e.to_string()))?;
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        out.push(LatentStack::new(id, layers, hidden, data)?);
    }
    Ok(out)
}

pub fn save_latents(path: impl AsRef<Path>, stacks: &[LatentStack]) -> Result<(), ComplexityError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_latents(&mut w, stacks)
}

pub fn load_latents(path: impl AsRef<Path>) -> Result<Vec<LatentStack>, ComplexityError> {
    let mut r = BufReader::new(File::open(path)?);
    read_latents(&mut r)
}
