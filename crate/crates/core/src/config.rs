//! Session configuration: a `key = value` file, overridable from the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::variety::hex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub field: FieldSpec,
    pub d: u32,
    pub a: u32,
    /// Order of the root-of-unity subgroup; the least admissible divisor of
    /// `q − 1` when unset.
    pub m: Option<u32>,
    pub max_enum: u128,
    pub max_gowers: u128,
    pub samples: u64,
    pub seed: u64,
    /// 0 means one worker per core.
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            field: FieldSpec::new(7, 1),
            d: 2,
            a: 2,
            m: None,
            max_enum: 1 << 32,
            max_gowers: 1 << 30,
            samples: 20_000,
            seed: 0,
            workers: 0,
            cache_dir: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Invalid(format!("bad value for {key}: {v:?}")))
}

impl SessionConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "field" => self.field = v.parse()?,
            "d" => self.d = parse(key, v)?,
            "a" => self.a = parse(key, v)?,
            "m" => self.m = if v.is_empty() || v == "auto" { None } else { Some(parse(key, v)?) },
            "max_enum" => self.max_enum = parse(key, v)?,
            "max_gowers" => self.max_gowers = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "cache_dir" => self.cache_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            other => return Err(Error::Invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Lines `key = value`; blank lines and `#` comments are skipped.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = SessionConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Invalid(format!("config line {}: expected key = value", i + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn field(&self) -> Result<Arc<Field>> {
        Ok(Arc::new(Field::from_spec(self.field)?))
    }

    /// The subgroup order in use: explicit, or the least divisor of `q − 1` above `2a`.
    pub fn m(&self) -> Option<u32> {
        let q1 = self.field.order().saturating_sub(1) as u32;
        self.m.or_else(|| (2 * self.a + 1..=q1).find(|m| q1 % m == 0))
    }

    /// `|k| > ad`, a subgroup of order `m > 2a` in `k*`, and characteristic `> d`.
    pub fn check_admissible(&self) -> Result<()> {
        let q = self.field.order();
        let ad = self.a as u64 * self.d as u64;
        let fail = |why: String| {
            Err(Error::NotAdmissible(format!(
                "{why}; a field is admissible when |k| > ad, k contains a root of unity of order m > 2a, and char k > d"
            )))
        };
        if q <= ad {
            return fail(format!("|k| = {q} ≤ ad = {ad}"));
        }
        if self.field.p <= self.d {
            return fail(format!("char k = {} ≤ d = {}", self.field.p, self.d));
        }
        match self.m() {
            None => fail(format!("q − 1 = {} has no divisor m > 2a = {}", q - 1, 2 * self.a)),
            Some(m) if m <= 2 * self.a => fail(format!("m = {m} ≤ 2a = {}", 2 * self.a)),
            Some(m) if (q - 1) % m as u64 != 0 => fail(format!("m = {m} does not divide q − 1 = {}", q - 1)),
            Some(_) => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_check() {
        let c = SessionConfig::parse_str("# session\nfield = 7\nd=2\na = 2\nseed = 5 # trailing\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.m(), Some(6));
        c.check_admissible().unwrap();
        let bad = SessionConfig::parse_str("field = 5\na = 2").unwrap();
        assert!(matches!(bad.check_admissible(), Err(Error::NotAdmissible(_))));
        let small_char = SessionConfig::parse_str("field = 3^2\nd = 3\na = 1").unwrap();
        assert!(matches!(small_char.check_admissible(), Err(Error::NotAdmissible(_))));
        let non_div = SessionConfig::parse_str("field = 11\na = 2\nm = 7").unwrap();
        assert!(matches!(non_div.check_admissible(), Err(Error::NotAdmissible(_))));
        assert!(SessionConfig::parse_str("colour = blue").is_err());
        assert_ne!(c.hash(), SessionConfig::default().hash());
    }
}
