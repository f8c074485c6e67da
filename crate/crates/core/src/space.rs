//! Points of `k^n` packed into integers.
//!
//! A point `(v_1, …, v_n)` has code `Σ v_i q^{n-i}` (first coordinate most
//! significant), so code order is lexicographic order on coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::{CompiledPoly, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSpace {
    q: u64,
    n: usize,
    size: u64,
}

/// Default ceiling on the number of ambient points anything will enumerate.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 31;

impl PointSpace {
    pub fn new(q: u32, n: usize) -> Result<Self> {
        let size = (q as u128).checked_pow(n as u32).filter(|&s| s < u64::MAX as u128);
        let size = size.ok_or(Error::BudgetExceeded {
            what: "point space size",
            needed: u128::MAX,
            limit: u64::MAX as u128,
        })? as u64;
        Ok(PointSpace { q: q as u64, n, size })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn check_budget(&self, what: &'static str, limit: u128) -> Result<()> {
        if self.size as u128 > limit {
            return Err(Error::BudgetExceeded { what, needed: self.size as u128, limit });
        }
        Ok(())
    }

    #[inline]
    pub fn encode(&self, v: &[Elem]) -> u64 {
        v.iter().fold(0u64, |acc, x| acc * self.q + x.0 as u64)
    }

    #[inline]
    pub fn decode_into(&self, mut code: u64, out: &mut [Elem]) {
        for slot in out.iter_mut().rev() {
            *slot = Elem((code % self.q) as u32);
            code /= self.q;
        }
    }

    pub fn decode(&self, code: u64) -> Vec<Elem> {
        let mut v = vec![Elem::ZERO; self.n];
        self.decode_into(code, &mut v);
        v
    }

    /// Coordinatewise sum of two codes.
    #[inline]
    pub fn add(&self, field: &Field, mut a: u64, mut b: u64) -> u64 {
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            let s = field.add(Elem((a % self.q) as u32), Elem((b % self.q) as u32));
            out += s.0 as u64 * place;
            a /= self.q;
            b /= self.q;
            place *= self.q;
        }
        out
    }

    #[inline]
    pub fn neg(&self, field: &Field, mut a: u64) -> u64 {
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            out += field.neg(Elem((a % self.q) as u32)).0 as u64 * place;
            a /= self.q;
            place *= self.q;
        }
        out
    }

    /// Visit every point in code order.
    pub fn for_each(&self, mut f: impl FnMut(u64, &[Elem])) {
        let mut v = vec![Elem::ZERO; self.n];
        for code in 0..self.size {
            f(code, &v);
            for slot in v.iter_mut().rev() {
                slot.0 += 1;
                if slot.0 as u64 == self.q {
                    slot.0 = 0;
                } else {
                    break;
                }
            }
        }
    }

    /// Visit the codes in `range` (in order) with decoded coordinates.
    pub fn for_each_in(&self, range: std::ops::Range<u64>, mut f: impl FnMut(u64, &[Elem])) {
        if range.is_empty() {
            return;
        }
        let mut v = self.decode(range.start);
        for code in range {
            f(code, &v);
            for slot in v.iter_mut().rev() {
                slot.0 += 1;
                if slot.0 as u64 == self.q {
                    slot.0 = 0;
                } else {
                    break;
                }
            }
        }
    }
}

/// Values of a polynomial at every point of its ambient space.
pub fn value_table(p: &Poly, limit: u128) -> Result<(PointSpace, Vec<Elem>)> {
    let space = PointSpace::new(p.field().q(), p.nvars())?;
    space.check_budget("value table", limit)?;
    let c: CompiledPoly = p.compile();
    let mut out = Vec::with_capacity(space.size() as usize);
    space.for_each(|_, v| out.push(c.eval(v)));
    Ok((space, out))
}

/// Dense table of code sums for small spaces.
pub struct AddTable {
    size: usize,
    table: Vec<u32>,
}

impl AddTable {
    pub const MAX_POINTS: u64 = 4096;

    pub fn new(field: &Field, space: &PointSpace) -> Option<Self> {
        if space.size() > Self::MAX_POINTS {
            return None;
        }
        let size = space.size() as usize;
        let mut table = vec![0u32; size * size];
        for a in 0..size {
            for b in a..size {
                let s = space.add(field, a as u64, b as u64) as u32;
                table[a * size + b] = s;
                table[b * size + a] = s;
            }
        }
        Some(AddTable { size, table })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.size + b as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_lexicographic() {
        let s = PointSpace::new(5, 3).unwrap();
        let mut prev: Option<Vec<Elem>> = None;
        s.for_each(|code, v| {
            assert_eq!(s.encode(v), code);
            assert_eq!(s.decode(code), v);
            if let Some(p) = &prev {
                assert!(p.as_slice() < v);
            }
            prev = Some(v.to_vec());
        });
    }

    #[test]
    fn code_addition() {
        let f = Field::new(3, 2).unwrap();
        let s = PointSpace::new(9, 2).unwrap();
        let t = AddTable::new(&f, &s).unwrap();
        for a in 0..81u64 {
            for b in 0..81u64 {
                let (va, vb) = (s.decode(a), s.decode(b));
                let sum: Vec<Elem> = va.iter().zip(&vb).map(|(&x, &y)| f.add(x, y)).collect();
                assert_eq!(s.add(&f, a, b), s.encode(&sum));
                assert_eq!(t.add(a as u32, b as u32) as u64, s.encode(&sum));
            }
            assert_eq!(s.add(&f, a, s.neg(&f, a)), 0);
        }
    }
}
