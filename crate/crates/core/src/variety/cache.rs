//! On-disk point tables: `<key>.bin` holds a small header and the point codes
//! as little-endian `u64`; `<key>.json` holds readable metadata.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::polyring::PolyCollection;
use crate::space::PointSpace;

use super::VarietyTable;

const MAGIC: &[u8; 8] = b"HRVTBL01";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMeta {
    pub key: String,
    pub field: String,
    pub nvars: usize,
    pub polys: String,
    pub count: u64,
    pub body_sha256: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the field, the ambient dimension and the canonical polynomial text.
pub fn cache_key(spec: &PolyCollection) -> String {
    let text = format!("{}|{}|{}", spec.field().spec(), spec.nvars(), spec.render());
    hex(&Sha256::digest(text.as_bytes()))
}

fn paths(dir: &Path, key: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{key}.bin")), dir.join(format!("{key}.json")))
}

pub fn save_cached(table: &VarietyTable, dir: &Path) -> Result<CacheMeta> {
    fs::create_dir_all(dir)?;
    let key = cache_key(table.spec());
    let (bin, json) = paths(dir, &key);
    let spec = table.field().spec();
    let mut body = Vec::with_capacity(table.len() * 8);
    for &c in table.codes() {
        body.extend_from_slice(&c.to_le_bytes());
    }
    let mut f = fs::File::create(&bin)?;
    f.write_all(MAGIC)?;
    f.write_all(&spec.p.to_le_bytes())?;
    f.write_all(&spec.l.to_le_bytes())?;
    f.write_all(&(table.nvars() as u32).to_le_bytes())?;
    f.write_all(&(table.len() as u64).to_le_bytes())?;
    f.write_all(&body)?;
    let meta = CacheMeta {
        key,
        field: spec.to_string(),
        nvars: table.nvars(),
        polys: table.spec().render(),
        count: table.len() as u64,
        body_sha256: hex(&Sha256::digest(&body)),
    };
    fs::write(json, serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(meta)
}

/// The cached table for `spec`, if present and consistent.
pub fn load_cached(spec: &PolyCollection, dir: &Path) -> Result<Option<VarietyTable>> {
    let key = cache_key(spec);
    let (bin, json) = paths(dir, &key);
    if !bin.exists() || !json.exists() {
        return Ok(None);
    }
    let meta: CacheMeta =
        serde_json::from_str(&fs::read_to_string(json)?).map_err(|e| Error::Io(e.to_string()))?;
    let mut raw = Vec::new();
    fs::File::open(bin)?.read_to_end(&mut raw)?;
    let bad = || Error::Io(format!("corrupt cache entry {key}"));
    if raw.len() < 28 || &raw[..8] != MAGIC {
        return Err(bad());
    }
    let u32_at = |i: usize| u32::from_le_bytes(raw[i..i + 4].try_into().unwrap());
    let (p, l, n) = (u32_at(8), u32_at(12), u32_at(16) as usize);
    let count = u64::from_le_bytes(raw[20..28].try_into().unwrap());
    let fs_ = spec.field().spec();
    if p != fs_.p || l != fs_.l || n != spec.nvars() || count != meta.count {
        return Err(bad());
    }
    let body = &raw[28..];
    if body.len() as u64 != count * 8 || hex(&Sha256::digest(body)) != meta.body_sha256 {
        return Err(bad());
    }
    let points: Vec<u64> = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    let space = PointSpace::new(spec.field().q(), n)?;
    Ok(Some(VarietyTable::from_points(spec.clone(), space, points)))
}
