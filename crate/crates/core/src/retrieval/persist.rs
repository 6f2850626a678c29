//! Single-file binary index format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "BMIX" | version u32 = 1 | k1 f64 | b f64
//! doc_count u32 | doc_count x { doc_id str | has_title u8 | [title str] | text str | length u32 }
//! avg_doc_len f64
//! term_count u32 | term_count x { term str | n u32 | n x { ordinal u32 | tf u32 } }
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{Bm25Index, Bm25Params, EvidenceDoc, Posting};

const MAGIC: &[u8; 4] = b"BMIX";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a BMIX index (bad magic)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn get_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_str(r: &mut impl Read) -> Result<String, PersistError> {
    let len = get_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| PersistError::Corrupt(e.to_string()))
}

pub fn write_index(w: &mut impl Write, index: &Bm25Index) -> io::Result<()> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    put_f64(w, index.params.k1)?;
    put_f64(w, index.params.b)?;
    put_u32(w, index.docs.len() as u32)?;
    for (doc, &len) in index.docs.iter().zip(&index.doc_lengths) {
        put_str(w, &doc.doc_id)?;
        match &doc.title {
            Some(t) => {
                w.write_all(&[1])?;
                put_str(w, t)?;
            }
            None => w.write_all(&[0])?,
        }
        put_str(w, &doc.text)?;
        put_u32(w, len)?;
    }
    put_f64(w, index.avg_doc_len)?;
    put_u32(w, index.postings.len() as u32)?;
    for (term, list) in &index.postings {
        put_str(w, term)?;
        put_u32(w, list.len() as u32)?;
        for p in list {
            put_u32(w, p.doc)?;
            put_u32(w, p.tf)?;
        }
    }
    w.flush()
}

pub fn read_index(r: &mut impl Read) -> Result<Bm25Index, PersistError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(PersistError::BadMagic);
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let params = Bm25Params {
        k1: get_f64(r)?,
        b: get_f64(r)?,
    };
    let doc_count = get_u32(r)?;
    if doc_count == 0 {
        return Err(PersistError::Corrupt("zero documents".into()));
    }
    let mut docs = Vec::with_capacity(doc_count as usize);
    let mut doc_lengths = Vec::with_capacity(doc_count as usize);
    for _ in 0..doc_count {
        let doc_id = get_str(r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let title = match flag[0] {
            0 => None,
            1 => Some(get_str(r)?),
            other => return Err(PersistError::Corrupt(format!("title flag {other}"))),
        };
        let text = get_str(r)?;
        doc_lengths.push(get_u32(r)?);
        docs.push(EvidenceDoc { doc_id, title, text });
    }
    let avg_doc_len = get_f64(r)?;
    let mean = doc_lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / f64::from(doc_count);
    if (avg_doc_len.is_nan() || avg_doc_len <= 0.0) || (avg_doc_len - mean).abs() > 1e-9 * mean {
        return Err(PersistError::Corrupt(format!(
            "stored average length {avg_doc_len} disagrees with document table ({mean})"
        )));
    }
    let term_count = get_u32(r)?;
    let mut postings = BTreeMap::new();
    for _ in 0..term_count {
        let term = get_str(r)?;
        let n = get_u32(r)?;
        let mut list = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let doc = get_u32(r)?;
            let tf = get_u32(r)?;
            if doc >= doc_count {
                return Err(PersistError::Corrupt(format!(
                    "posting for {term:?} points at ordinal {doc} >= {doc_count}"
                )));
            }
            list.push(Posting { doc, tf });
        }
        postings.insert(term, list);
    }
    Ok(Bm25Index {
        docs,
        postings,
        doc_lengths,
        avg_doc_len,
        params,
    })
}

pub fn save_index(path: impl AsRef<Path>, index: &Bm25Index) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index(&mut w, index)
}

pub fn load_index(path: impl AsRef<Path>) -> Result<Bm25Index, PersistError> {
    let mut r = BufReader::new(File::open(path)?);
    read_index(&mut r)
}
