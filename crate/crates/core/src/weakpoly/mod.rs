//! Functions on enumerated varieties: degree tests on flats, the spaces of
//! weakly polynomial functions and of restrictions, torus decompositions and
//! extension to global polynomials.

mod extend;
pub mod interp;
mod spaces;
mod theta;

pub use extend::{
    extend_by_solver, extend_inductive, extend_on_xn, verify_no_extension, Engine, ExtensionResult, ExtensionStatus,
    XnContext,
};
pub use spaces::{
    degree_on_flat, is_weakly_polynomial, kr_dimension, poly_restriction_space, quotient_dim,
    restriction_injectivity, spaces, weakpoly_space, Spaces, TestMode, WeakTest,
};
pub use theta::{delta_kernel_dim, theta_decompose, Character};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::polyring::Poly;
use crate::variety::{cache_key, VarietyTable};

/// Values of a function on `X`, indexed by point ordinal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnOnX {
    pub values: Vec<Elem>,
}

impl FnOnX {
    pub fn new(table: &VarietyTable, values: Vec<Elem>) -> Result<Self> {
        if values.len() != table.len() {
            return Err(Error::DimensionMismatch { expected: table.len(), got: values.len() });
        }
        Ok(FnOnX { values })
    }

    pub fn zero(table: &VarietyTable) -> Self {
        FnOnX { values: vec![Elem::ZERO; table.len()] }
    }

    pub fn from_fn(table: &VarietyTable, f: impl Fn(&[Elem]) -> Elem) -> Self {
        FnOnX { values: table.points().map(|v| f(&v)).collect() }
    }

    pub fn restriction_of(table: &VarietyTable, p: &Poly) -> Self {
        let c = p.compile();
        Self::from_fn(table, |v| c.eval(v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Values on a sub-table whose points all lie in `table`.
    pub fn restrict(&self, table: &VarietyTable, sub: &VarietyTable) -> FnOnX {
        let values = sub
            .codes()
            .iter()
            .map(|&c| self.values[table.ordinal_of_code(c).expect("sub-table inside table")])
            .collect();
        FnOnX { values }
    }

    /// True iff `p` agrees with this function at every point.
    pub fn matches(&self, table: &VarietyTable, p: &Poly) -> bool {
        let c = p.compile();
        table.points().zip(&self.values).all(|(v, &y)| c.eval(&v) == y)
    }

    /// CSV rows `c1,…,cn,value` with elements written as their integer index.
    pub fn write_csv(&self, table: &VarietyTable, path: &Path) -> Result<()> {
        let mut out = String::new();
        let header: Vec<String> = (1..=table.nvars()).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        for (v, y) in table.points().zip(&self.values) {
            for c in &v {
                out.push_str(&c.0.to_string());
                out.push(',');
            }
            out.push_str(&y.0.to_string());
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read_csv(table: &VarietyTable, path: &Path) -> Result<FnOnX> {
        let text = fs::read_to_string(path)?;
        Self::parse_csv(table, &text)
    }

    /// Every point of `X` must appear exactly once.
    pub fn parse_csv(table: &VarietyTable, text: &str) -> Result<FnOnX> {
        let n = table.nvars();
        let q = table.field().q();
        let mut values: Vec<Option<Elem>> = vec![None; table.len()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
                continue;
            }
            let bad = |msg: &str| Error::Invalid(format!("line {}: {msg}", lineno + 1));
            let nums: Vec<u32> = line
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("expected integers"))?;
            if nums.len() != n + 1 {
                return Err(bad(&format!("expected {} fields", n + 1)));
            }
            if nums.iter().any(|&x| x >= q) {
                return Err(bad("element index out of range"));
            }
            let v: Vec<Elem> = nums[..n].iter().map(|&x| Elem(x)).collect();
            let i = table.ordinal(&v).ok_or_else(|| bad("point is not on the variety"))?;
            if values[i].replace(Elem(nums[n])).is_some() {
                return Err(bad("duplicate point"));
            }
        }
        let missing = values.iter().filter(|v| v.is_none()).count();
        if missing > 0 {
            return Err(Error::Invalid(format!("{missing} points of the variety have no value")));
        }
        Ok(FnOnX { values: values.into_iter().map(Option::unwrap).collect() })
    }

    /// Binary form: magic, table cache key, count, then `u32` values.
    pub fn write_binary(&self, table: &VarietyTable, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(b"HRFNX001")?;
        let key = cache_key(table.spec());
        f.write_all(key.as_bytes())?;
        f.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            f.write_all(&v.0.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(table: &VarietyTable, path: &Path) -> Result<FnOnX> {
        let raw = fs::read(path)?;
        let key = cache_key(table.spec());
        let head = 8 + key.len() + 8;
        let bad = || Error::Io(format!("{} is not a function file for this variety", path.display()));
        if raw.len() < head || &raw[..8] != b"HRFNX001" || &raw[8..8 + key.len()] != key.as_bytes() {
            return Err(bad());
        }
        let count = u64::from_le_bytes(raw[head - 8..head].try_into().unwrap()) as usize;
        if count != table.len() || raw.len() != head + 4 * count {
            return Err(bad());
        }
        let values = raw[head..].chunks_exact(4).map(|c| Elem(u32::from_le_bytes(c.try_into().unwrap()))).collect();
        Ok(FnOnX { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::polyring::{parse_poly, PolyCollection};
    use std::sync::Arc;

    #[test]
    fn csv_and_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let k = Arc::new(Field::prime(5).unwrap());
        let x = VarietyTable::enumerate(&PolyCollection::single(parse_poly("x1*x2", &k, None).unwrap()), 1 << 20)
            .unwrap();
        let f = FnOnX::restriction_of(&x, &parse_poly("x1 + 2*x2^2", &k, Some(2)).unwrap());
        let csv = dir.path().join("f.csv");
        f.write_csv(&x, &csv).unwrap();
        assert_eq!(FnOnX::read_csv(&x, &csv).unwrap(), f);
        let bin = dir.path().join("f.bin");
        f.write_binary(&x, &bin).unwrap();
        assert_eq!(FnOnX::read_binary(&x, &bin).unwrap(), f);
        assert!(FnOnX::parse_csv(&x, "1,1,0\n").is_err());
    }
}
