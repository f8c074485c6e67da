//! Exact exponential sums in `Z[ζ_p]`.
//!
//! A sum `Σ e_q(y)` only depends on how many terms have each trace value, so
//! it is stored as a histogram over `F_p`. Squared magnitudes land in the real
//! subfield and are kept as symmetric coefficient vectors.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloSum {
    counts: Vec<u64>,
    total: u64,
}

impl CycloSum {
    pub fn new(p: u32) -> Self {
        CycloSum { counts: vec![0; p as usize], total: 0 }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        CycloSum { counts, total }
    }

    pub fn p(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Add one term `ζ^r` for a residue `r` in `0..p`.
    #[inline]
    pub fn push_residue(&mut self, r: u32) {
        self.counts[r as usize] += 1;
        self.total += 1;
    }

    #[inline]
    pub fn push_residue_n(&mut self, r: u32, n: u64) {
        self.counts[r as usize] += n;
        self.total += n;
    }

    /// Add `e_q(y)`.
    #[inline]
    pub fn push(&mut self, field: &Field, y: Elem) {
        self.push_residue(field.trace(y));
    }

    pub fn merge(&mut self, other: &CycloSum) {
        assert_eq!(self.counts.len(), other.counts.len(), "merging sums over different primes");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn merged(mut self, other: &CycloSum) -> CycloSum {
        self.merge(other);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] == w[1])
    }

    /// The value as an integer when it is rational.
    pub fn as_integer(&self) -> Option<i128> {
        let rest = &self.counts[1..];
        if rest.windows(2).all(|w| w[0] == w[1]) {
            let c1 = rest.first().copied().unwrap_or(0);
            Some(self.counts[0] as i128 - c1 as i128)
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let p = self.counts.len() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            let t = 2.0 * PI * i as f64 / p;
            re += c as f64 * t.cos();
            im += c as f64 * t.sin();
        }
        (re, im)
    }

    /// `|Σ|²` exactly, as an element of the real subfield.
    pub fn abs2(&self) -> RealCyclo {
        let p = self.counts.len();
        let c: Vec<i128> = self.counts.iter().map(|&x| x as i128).collect();
        let coeffs = (0..p)
            .map(|k| (0..p).map(|i| c[i] * c[(i + k) % p]).sum())
            .collect();
        RealCyclo { coeffs }
    }
}

/// `Σ c_k ζ_p^k` with symmetric coefficients `c_k = c_{p-k}`.
///
/// Representations are not unique: adding a constant to every coefficient
/// leaves the value unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealCyclo {
    coeffs: Vec<i128>,
}

impl RealCyclo {
    pub fn integer(p: u32, v: i128) -> Self {
        let mut coeffs = vec![0; p as usize];
        coeffs[0] = v;
        RealCyclo { coeffs }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn p(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.windows(2).all(|w| w[0] == w[1])
    }

    pub fn as_integer(&self) -> Option<i128> {
        let rest = &self.coeffs[1..];
        if rest.windows(2).all(|w| w[0] == w[1]) {
            Some(self.coeffs[0] - rest.first().copied().unwrap_or(0))
        } else {
            None
        }
    }

    pub fn add(&self, other: &RealCyclo) -> RealCyclo {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        RealCyclo { coeffs }
    }

    pub fn sub(&self, other: &RealCyclo) -> RealCyclo {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        RealCyclo { coeffs }
    }

    pub fn scale(&self, k: i128) -> RealCyclo {
        RealCyclo { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Real part as a float.
    pub fn to_f64(&self) -> f64 {
        let p = self.coeffs.len();
        // 1 + ζ + … + ζ^{p-1} = 0, so shifting every coefficient by -c_0
        // removes the constant term and keeps the float sum small.
        let base = self.coeffs[0];
        let mut acc = 0.0f64;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let t = 2.0 * PI * k as f64 / p as f64;
            acc += (c - base) as f64 * t.cos();
        }
        acc
    }

    fn float_error(&self) -> f64 {
        let base = self.coeffs[0];
        let mag: f64 = self.coeffs.iter().map(|&c| ((c - base) as f64).abs()).sum();
        mag * 1e-13 + 1e-300
    }

    /// Exact sign of the (real) value.
    ///
    /// Exact arithmetic for `p ≤ 5`; above that a float evaluation is accepted
    /// only when it clears its error bound, otherwise `Undecidable`.
    pub fn signum(&self) -> Result<Ordering> {
        if self.is_zero() {
            return Ok(Ordering::Equal);
        }
        let c = &self.coeffs;
        match c.len() {
            1 => Ok(c[0].cmp(&0)),
            2 => Ok((c[0] - c[1]).cmp(&0)),
            3 => Ok((2 * c[0] - c[1] - c[2]).cmp(&0)),
            5 => {
                // 4·Re = 4c0 - s1 - s2 + (s1 - s2)√5 with s_k = c_k + c_{5-k}.
                let s1 = c[1] + c[4];
                let s2 = c[2] + c[3];
                let a = 4 * c[0] - s1 - s2;
                let b = s1 - s2;
                Ok(sign_a_plus_b_sqrt(a, b, 5))
            }
            _ => {
                let v = self.to_f64();
                if v.abs() > self.float_error() {
                    Ok(v.partial_cmp(&0.0).unwrap())
                } else {
                    Err(Error::Undecidable)
                }
            }
        }
    }

    /// Exact comparison `self/da` against `other/db` for positive denominators.
    pub fn cmp_scaled(&self, da: i128, other: &RealCyclo, db: i128) -> Result<Ordering> {
        self.scale(db).sub(&other.scale(da)).signum()
    }
}

fn sign_a_plus_b_sqrt(a: i128, b: i128, r: i128) -> Ordering {
    match (a.cmp(&0), b.cmp(&0)) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (sa, sb) if sa == sb => sa,
        (sa, _) => {
            // Opposite signs: the larger of a² and r·b² wins.
            match (a * a).cmp(&(r * b * b)) {
                Ordering::Greater => sa,
                Ordering::Less => sa.reverse(),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// `|Σ|²/q^{2n}` when the squared magnitude is rational.
pub fn rational_abs2(abs2: &RealCyclo, denom: u128) -> Option<Ratio<i128>> {
    abs2.as_integer().map(|v| Ratio::new(v, denom as i128))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs2_examples() {
        let s = CycloSum::from_counts(vec![2, 1, 0]);
        assert_eq!(s.abs2().as_integer(), Some(3));
        let e = CycloSum::from_counts(vec![5, 0, 0, 0, 0]);
        assert_eq!(e.abs2().as_integer(), Some(25));
        let u = CycloSum::from_counts(vec![4, 4, 4, 4, 4, 4, 4]);
        assert!(u.is_zero());
        assert!(u.abs2().is_zero());
    }

    #[test]
    fn full_character_sums() {
        for (p, l) in [(3, 2), (5, 1), (7, 1), (2, 3), (5, 2)] {
            let f = Field::new(p, l).unwrap();
            let q = f.q() as i128;
            for c in f.elements() {
                let mut s = CycloSum::new(p);
                for x in f.elements() {
                    s.push(&f, f.mul(c, x));
                }
                let a = s.abs2();
                if c.is_zero() {
                    assert_eq!(a.as_integer(), Some(q * q));
                } else {
                    assert!(a.is_zero());
                }
            }
        }
    }

    #[test]
    fn abs2_matches_float() {
        for counts in [vec![3, 1, 4, 1, 5], vec![9, 2, 6, 5, 3, 5, 8], vec![1, 0, 2]] {
            let s = CycloSum::from_counts(counts);
            let (re, im) = s.to_complex();
            let exact = s.abs2().to_f64();
            assert!((exact - (re * re + im * im)).abs() < 1e-9);
        }
    }

    #[test]
    fn merge_is_associative() {
        let a = CycloSum::from_counts(vec![1, 2, 3]);
        let b = CycloSum::from_counts(vec![0, 5, 1]);
        let c = CycloSum::from_counts(vec![7, 0, 2]);
        let left = a.clone().merged(&b).merged(&c);
        let right = a.merged(&b.merged(&c));
        assert_eq!(left, right);
        assert_eq!(left.total(), 21);
    }

    #[test]
    fn exact_sign_p5_against_float() {
        let sums = [
            vec![3u64, 1, 4, 1, 5],
            vec![2, 2, 2, 2, 3],
            vec![0, 1, 0, 0, 0],
            vec![10, 0, 3, 3, 0],
        ];
        for x in &sums {
            for y in &sums {
                let a = CycloSum::from_counts(x.clone()).abs2();
                let b = CycloSum::from_counts(y.clone()).abs2();
                let d = a.sub(&b);
                let f = d.to_f64();
                let s = d.signum().unwrap();
                if f.abs() > 1e-9 {
                    assert_eq!(s, f.partial_cmp(&0.0).unwrap());
                } else {
                    assert_eq!(s, Ordering::Equal);
                }
            }
        }
    }

    #[test]
    fn sign_above_five_uses_certified_float() {
        let a = CycloSum::from_counts(vec![3, 1, 0, 0, 0, 0, 0]).abs2();
        assert_eq!(a.signum().unwrap(), Ordering::Greater);
    }
}
