//! Bias, Gowers norms and analytic rank.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cyclo::{CycloSum, RealCyclo};
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::Poly;
use crate::space::{value_table, AddTable, PointSpace};

/// `|E_v e_q(P(v))|² = abs2 / denom` with `denom = q^{2n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bias {
    pub sum: CycloSum,
    pub abs2: RealCyclo,
    pub denom: u128,
}

impl Bias {
    pub fn value(&self) -> f64 {
        (self.abs2.to_f64().max(0.0) / self.denom as f64).sqrt()
    }

    /// The squared bias as a rational, when it is one.
    pub fn squared(&self) -> Option<Ratio<i128>> {
        self.abs2.as_integer().map(|v| Ratio::new(v, self.denom as i128))
    }
}

pub fn bias(p: &Poly, limit: u128) -> Result<Bias> {
    let field = p.field().clone();
    let (space, table) = value_table(p, limit)?;
    let mut hist = vec![0u64; field.q() as usize];
    for v in &table {
        hist[v.index()] += 1;
    }
    let mut sum = CycloSum::new(field.p());
    for (y, &c) in hist.iter().enumerate() {
        if c > 0 {
            sum.push_residue_n(field.trace(Elem(y as u32)), c);
        }
    }
    let abs2 = sum.abs2();
    Ok(Bias { sum, abs2, denom: (space.size() as u128).pow(2) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GowersMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

/// `‖e_q(P)‖_{U_d}^{2^d} = numerator / denominator`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPow {
    pub numerator: RealCyclo,
    pub denominator: u128,
}

impl ExactPow {
    pub fn to_f64(&self) -> f64 {
        self.numerator.to_f64() / self.denominator as f64
    }

    pub fn rational(&self) -> Option<Ratio<i128>> {
        self.numerator.as_integer().map(|v| Ratio::new(v, self.denominator as i128))
    }

    pub fn is_one(&self) -> bool {
        self.numerator.sub(&RealCyclo::integer(self.numerator.p(), self.denominator as i128)).is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GowersResult {
    pub d: u32,
    pub mode: GowersMode,
    pub value_pow: f64,
    pub exact: Option<ExactPow>,
    pub stderr: Option<f64>,
}

impl GowersResult {
    pub fn norm(&self) -> f64 {
        self.value_pow.max(0.0).powf(1.0 / (1u64 << self.d) as f64)
    }
}

struct Tables {
    field: std::sync::Arc<Field>,
    space: PointSpace,
    values: Vec<Elem>,
    add: Option<AddTable>,
}

impl Tables {
    fn new(p: &Poly, limit: u128) -> Result<Self> {
        let (space, values) = value_table(p, limit)?;
        let field = p.field().clone();
        let add = AddTable::new(&field, &space);
        Ok(Tables { field, space, values, add })
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add {
            Some(t) => t.add(a, b),
            None => self.space.add(&self.field, a as u64, b as u64) as u32,
        }
    }

    /// `Σ_ω (-1)^{|ω|} P(x + ω·h)` given the subset sums of the `h_i`.
    #[inline]
    fn alternating(&self, x: u32, sums: &[u32]) -> Elem {
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        for (omega, &s) in sums.iter().enumerate() {
            let v = self.values[self.add(x, s) as usize];
            acc = if omega.count_ones() % 2 == 0 { f.add(acc, v) } else { f.sub(acc, v) };
        }
        acc
    }

    #[inline]
    fn alternating_at_zero(&self, sums: &[u32]) -> Elem {
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        for (omega, &s) in sums.iter().enumerate() {
            let v = self.values[s as usize];
            acc = if omega.count_ones() % 2 == 0 { f.add(acc, v) } else { f.sub(acc, v) };
        }
        acc
    }
}

/// Walk all `levels`-tuples of points, maintaining the `2^levels` subset sums.
fn for_each_tuple(t: &Tables, levels: usize, visit: &mut impl FnMut(&[u32])) {
    fn rec(t: &Tables, left: usize, sums: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if left == 0 {
            visit(sums);
            return;
        }
        let len = sums.len();
        sums.resize(2 * len, 0);
        for h in 0..t.space.size() as u32 {
            for i in 0..len {
                sums[len + i] = t.add(sums[i], h);
            }
            rec(t, left - 1, sums, visit);
        }
        sums.truncate(len);
    }
    let mut sums = vec![0u32];
    rec(t, levels, &mut sums, visit);
}

fn tuple_cost(space: &PointSpace, levels: u32) -> u128 {
    (space.size() as u128).saturating_pow(levels)
}

pub fn gowers_norm(p: &Poly, d: u32, mode: GowersMode, limit: u128) -> Result<GowersResult> {
    if d == 0 {
        return Err(Error::Invalid("Gowers norm order must be at least 1".into()));
    }
    match mode {
        GowersMode::Exact => {
            let exact = if p.degree() <= d { gowers_exact_low(p, d, limit)? } else { gowers_exact_nested(p, d, limit)? };
            Ok(GowersResult { d, mode, value_pow: exact.to_f64(), exact: Some(exact), stderr: None })
        }
        GowersMode::Sampled { samples, seed } => gowers_sampled(p, d, samples, seed, limit),
    }
}

/// `E_{h_1..h_d} e_q((h_1,…,h_d)_P)`; valid when `deg P ≤ d`, where the form
/// does not depend on the base point.
pub fn gowers_exact_low(p: &Poly, d: u32, limit: u128) -> Result<ExactPow> {
    let t = Tables::new(p, limit)?;
    let cost = tuple_cost(&t.space, d);
    if cost > limit {
        return Err(Error::BudgetExceeded { what: "exact Gowers norm", needed: cost, limit });
    }
    let field = t.field.clone();
    let mut sum = CycloSum::new(field.p());
    for_each_tuple(&t, d as usize, &mut |sums| {
        sum.push(&field, t.alternating_at_zero(sums));
    });
    Ok(ExactPow { numerator: rational_value(&sum), denominator: cost })
}

/// `E_{h_1..h_{d-1}} |E_x e_q(Δ_{h_1..h_{d-1}} P(x))|²`, valid for any degree.
pub fn gowers_exact_nested(p: &Poly, d: u32, limit: u128) -> Result<ExactPow> {
    let t = Tables::new(p, limit)?;
    let n = t.space.size() as u128;
    let cost = tuple_cost(&t.space, d);
    if cost > limit {
        return Err(Error::BudgetExceeded { what: "exact Gowers norm", needed: cost, limit });
    }
    let field = t.field.clone();
    let mut total = RealCyclo::integer(field.p(), 0);
    for_each_tuple(&t, d as usize - 1, &mut |sums| {
        let mut s = CycloSum::new(field.p());
        for x in 0..t.space.size() as u32 {
            s.push(&field, t.alternating(x, sums));
        }
        total = total.add(&s.abs2());
    });
    Ok(ExactPow { numerator: total, denominator: tuple_cost(&t.space, d - 1) * n * n })
}

/// Monte Carlo estimate of `E_{x,h} e_q(Δ_h P(x))`, stratified by the first
/// coordinate of `h_1`.
pub fn gowers_sampled(p: &Poly, d: u32, samples: u64, seed: u64, limit: u128) -> Result<GowersResult> {
    let t = Tables::new(p, limit)?;
    let field = t.field.clone();
    let q = field.q() as u64;
    let size = t.space.size();
    let per_first = size / q.max(1);
    let strata = if p.nvars() == 0 { 1 } else { q };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0f64; strata as usize];
    let mut sum_sq = vec![0f64; strata as usize];
    let mut count = vec![0u64; strata as usize];
    let pf = field.p() as f64;
    let mut sums = vec![0u32; 1 << d];
    for s in 0..samples {
        let stratum = s % strata;
        let x = rng.gen_range(0..size) as u32;
        for i in 0..d as usize {
            let h = if i == 0 && strata > 1 {
                stratum * per_first + rng.gen_range(0..per_first)
            } else {
                rng.gen_range(0..size)
            } as u32;
            let len = 1 << i;
            for j in 0..len {
                sums[len + j] = t.add(sums[j], h);
            }
        }
        let v = t.alternating(x, &sums);
        let c = (2.0 * std::f64::consts::PI * field.trace(v) as f64 / pf).cos();
        sum[stratum as usize] += c;
        sum_sq[stratum as usize] += c * c;
        count[stratum as usize] += 1;
    }
    let mut est = 0.0;
    let mut var = 0.0;
    let used = count.iter().filter(|&&c| c > 0).count() as f64;
    for k in 0..strata as usize {
        let n = count[k] as f64;
        if n == 0.0 {
            continue;
        }
        let mean = sum[k] / n;
        est += mean;
        if n > 1.0 {
            let s2 = (sum_sq[k] - n * mean * mean).max(0.0) / (n - 1.0);
            var += s2 / n;
        }
    }
    Ok(GowersResult {
        d,
        mode: GowersMode::Sampled { samples, seed },
        value_pow: est / used,
        exact: None,
        stderr: Some(var.sqrt() / used),
    })
}

pub fn analytic_rank(g: &GowersResult, q: u32) -> f64 {
    if g.value_pow <= 0.0 {
        return f64::INFINITY;
    }
    -g.value_pow.log(q as f64) / (1u64 << g.d) as f64
}

/// `Σ_{h ∈ V^d} e_q((h_1,…,h_d)_P + R(h))` for `R` on `V^d` (variables of
/// `h_i` are `i·n .. (i+1)·n`). Requires `deg P ≤ d`.
pub fn derivative_form_sum(p: &Poly, d: u32, r: Option<&Poly>, limit: u128) -> Result<CycloSum> {
    let t = Tables::new(p, limit)?;
    let n = p.nvars();
    if let Some(r) = r {
        if r.nvars() != n * d as usize {
            return Err(Error::DimensionMismatch { expected: n * d as usize, got: r.nvars() });
        }
    }
    let cost = tuple_cost(&t.space, d);
    if cost > limit {
        return Err(Error::BudgetExceeded { what: "derivative form sum", needed: cost, limit });
    }
    let field = t.field.clone();
    let rc = r.map(|r| r.compile());
    let mut sum = CycloSum::new(field.p());
    let mut point = vec![Elem::ZERO; n * d as usize];
    let mut hs = vec![0u32; d as usize];
    // The tuple walk fixes h_1 outermost, matching the variable layout.
    fn rec(
        t: &Tables,
        level: usize,
        d: usize,
        sums: &mut Vec<u32>,
        hs: &mut Vec<u32>,
        visit: &mut impl FnMut(&[u32], &[u32]),
    ) {
        if level == d {
            visit(sums, hs);
            return;
        }
        let len = sums.len();
        sums.resize(2 * len, 0);
        for h in 0..t.space.size() as u32 {
            hs[level] = h;
            for i in 0..len {
                sums[len + i] = t.add(sums[i], h);
            }
            rec(t, level + 1, d, sums, hs, visit);
        }
        sums.truncate(len);
    }
    let mut sums = vec![0u32];
    rec(&t, 0, d as usize, &mut sums, &mut hs, &mut |sums, hs| {
        let mut v = t.alternating_at_zero(sums);
        if let Some(rc) = &rc {
            for (i, &h) in hs.iter().enumerate() {
                t.space.decode_into(h as u64, &mut point[i * n..(i + 1) * n]);
            }
            v = field.add(v, rc.eval(&point));
        }
        sum.push(&field, v);
    });
    Ok(sum)
}

/// A derivative-form sum for `deg P ≤ d` counts the `h` with vanishing
/// linear form in `h_d`, so it is a rational integer.
fn rational_value(sum: &CycloSum) -> RealCyclo {
    let v = sum.as_integer().expect("derivative-form sums of degree <= d polynomials are rational");
    RealCyclo::integer(sum.p(), v)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::polyring::parse_poly;

    const BIG: u128 = 1 << 40;

    #[test]
    fn bias_examples() {
        let f = Arc::new(Field::prime(7).unwrap());
        let zero = Poly::zero(&f, 2);
        assert_eq!(bias(&zero, BIG).unwrap().squared(), Some(Ratio::from_integer(1)));
        let lin = parse_poly("3*x1 + x2", &f, None).unwrap();
        assert_eq!(bias(&lin, BIG).unwrap().squared(), Some(Ratio::from_integer(0)));
        let xy = parse_poly("x1*x2", &f, None).unwrap();
        assert_eq!(bias(&xy, BIG).unwrap().squared(), Some(Ratio::new(1, 49)));
    }

    #[test]
    fn gowers_examples() {
        let f = Arc::new(Field::prime(3).unwrap());
        let xy = parse_poly("x1*x2", &f, None).unwrap();
        let g = gowers_norm(&xy, 2, GowersMode::Exact, BIG).unwrap();
        assert_eq!(g.exact.as_ref().unwrap().rational(), Some(Ratio::new(1, 9)));
        assert!((analytic_rank(&g, 3) - 0.5).abs() < 1e-12);
        let lin = parse_poly("x1 + 2*x2 + 1", &f, None).unwrap();
        let g = gowers_norm(&lin, 2, GowersMode::Exact, BIG).unwrap();
        assert!(g.exact.unwrap().is_one());
        let two = parse_poly("x1*x2 + x3*x4", &f, None).unwrap();
        let g = gowers_norm(&two, 2, GowersMode::Exact, BIG).unwrap();
        assert!((analytic_rank(&g, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nested_agrees_with_low_degree_path() {
        let f = Arc::new(Field::prime(5).unwrap());
        for s in ["x1*x2", "x1^2 + 3*x2*x1 + x2", "2*x1^2*x2 + x1^3", "x1 + 4"] {
            let p = parse_poly(s, &f, Some(2)).unwrap();
            for d in [p.degree().max(1), p.degree() + 1] {
                let a = gowers_exact_low(&p, d, BIG).unwrap();
                let b = gowers_exact_nested(&p, d, BIG).unwrap();
                assert_eq!(a.rational(), b.rational(), "{s} d={d}");
            }
        }
    }

    #[test]
    fn sampled_is_close() {
        let f = Arc::new(Field::prime(3).unwrap());
        let xy = parse_poly("x1*x2", &f, None).unwrap();
        let g = gowers_norm(&xy, 2, GowersMode::Sampled { samples: 100_000, seed: 7 }, BIG).unwrap();
        let err = g.stderr.unwrap();
        assert!((g.value_pow - 1.0 / 9.0).abs() <= 3.0 * err, "{} ± {}", g.value_pow, err);
    }

    #[test]
    fn derivative_sum_matches_gowers() {
        let f = Arc::new(Field::prime(5).unwrap());
        let p = parse_poly("x1*x2 + 2*x2^2", &f, None).unwrap();
        let s = derivative_form_sum(&p, 2, None, BIG).unwrap();
        let g = gowers_exact_low(&p, 2, BIG).unwrap();
        assert_eq!(Some(Ratio::new(s.as_integer().unwrap(), 625)), g.rational());
    }
}
