//! Schmidt rank by exhaustive search over products of lower-degree factors.
//!
//! All products `Q·R` with `Q` monic are materialised once as encoded
//! coefficient vectors; rank `r` is then tested by subtracting `r - 1`
//! products and probing the table.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::{monomials_up_to, Monomial, Poly, PolyCollection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchmidtRank {
    Exact(u32),
    /// Not found up to the cutoff; the rank is larger.
    Above(u32),
    /// Nonzero polynomials of degree ≤ 1 are not sums of lower-degree products.
    Infinite,
}

impl SchmidtRank {
    pub fn value(&self) -> Option<u32> {
        match self {
            SchmidtRank::Exact(r) => Some(*r),
            _ => None,
        }
    }

    /// A lower bound valid in every case.
    pub fn lower_bound(&self) -> u32 {
        match self {
            SchmidtRank::Exact(r) => *r,
            SchmidtRank::Above(c) => c + 1,
            SchmidtRank::Infinite => u32::MAX,
        }
    }

    pub fn render(&self) -> String {
        match self {
            SchmidtRank::Exact(r) => r.to_string(),
            SchmidtRank::Above(c) => format!(">{c}"),
            SchmidtRank::Infinite => "inf".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchmidtResult {
    pub rank: SchmidtRank,
    /// False when the search space was restricted to `deg Q + deg R ≤ d` for
    /// an inhomogeneous polynomial of degree ≥ 3, so the value is an upper bound.
    pub minimal: bool,
    pub witness: Vec<(Poly, Poly)>,
}

struct Encoder {
    q: u64,
    monos: Vec<Monomial>,
    index: std::collections::HashMap<Monomial, usize>,
}

impl Encoder {
    fn new(q: u32, monos: Vec<Monomial>) -> Result<Self> {
        let fits = (q as u128).checked_pow(monos.len() as u32).is_some_and(|v| v <= u64::MAX as u128);
        if !fits {
            return Err(Error::BudgetExceeded {
                what: "Schmidt coefficient encoding",
                needed: monos.len() as u128,
                limit: (64.0 / (q as f64).log2()).floor() as u128,
            });
        }
        let index = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(Encoder { q: q as u64, monos, index })
    }

    fn encode(&self, v: &[Elem]) -> u64 {
        v.iter().fold(0u64, |acc, x| acc * self.q + x.0 as u64)
    }

    fn decode(&self, mut code: u64, out: &mut [Elem]) {
        for slot in out.iter_mut().rev() {
            *slot = Elem((code % self.q) as u32);
            code /= self.q;
        }
    }
}

/// Enumerate coefficient vectors over `len` slots; `monic` keeps only nonzero
/// vectors whose last (graded-lex largest) nonzero entry is 1.
fn vectors(q: u32, len: usize, monic: bool) -> impl Iterator<Item = Vec<Elem>> {
    let total = (q as u64).pow(len as u32);
    (0..total).filter_map(move |mut code| {
        let mut v = vec![Elem::ZERO; len];
        for slot in v.iter_mut() {
            *slot = Elem((code % q as u64) as u32);
            code /= q as u64;
        }
        if monic {
            match v.iter().rev().find(|c| !c.is_zero()) {
                Some(&c) if c == Elem::ONE => Some(v),
                _ => None,
            }
        } else {
            Some(v)
        }
    })
}

struct ProductTable {
    enc: Encoder,
    /// Sorted by product code; (product, Q code, R code, factor pair index).
    entries: Vec<(u64, u64, u64, u8)>,
    pairs: Vec<(Vec<Monomial>, Vec<Monomial>)>,
}

impl ProductTable {
    fn build(field: &Field, nvars: usize, d: u32, homogeneous: bool, budget: u128) -> Result<Self> {
        let q = field.q();
        let target = monomials_up_to(nvars, d, homogeneous);
        let enc = Encoder::new(q, target)?;
        let mut pairs = Vec::new();
        for e1 in (if homogeneous { 1 } else { 0 })..=d / 2 {
            let e2 = if homogeneous { d - e1 } else { (d - e1).min(d - 1) };
            let qm = monomials_up_to(nvars, e1, homogeneous);
            let rm = monomials_up_to(nvars, e2, homogeneous);
            pairs.push((qm, rm));
        }
        let cost: u128 = pairs
            .iter()
            .map(|(a, b)| (q as u128).saturating_pow(a.len() as u32).saturating_mul((q as u128).saturating_pow(b.len() as u32)))
            .fold(0u128, |acc, x| acc.saturating_add(x));
        if cost > budget {
            return Err(Error::BudgetExceeded { what: "Schmidt product table", needed: cost, limit: budget });
        }
        let mut entries = Vec::new();
        for (pi, (qm, rm)) in pairs.iter().enumerate() {
            let mul_idx: Vec<Vec<usize>> =
                qm.iter().map(|a| rm.iter().map(|b| enc.index[&a.mul(b)]).collect()).collect();
            let rs: Vec<Vec<Elem>> = vectors(q, rm.len(), false).filter(|v| v.iter().any(|c| !c.is_zero())).collect();
            let mut acc = vec![Elem::ZERO; enc.monos.len()];
            for qv in vectors(q, qm.len(), true) {
                let qcode = enc.encode(&qv);
                for rv in &rs {
                    acc.iter_mut().for_each(|a| *a = Elem::ZERO);
                    for (i, &a) in qv.iter().enumerate() {
                        if a.is_zero() {
                            continue;
                        }
                        for (j, &b) in rv.iter().enumerate() {
                            if !b.is_zero() {
                                let k = mul_idx[i][j];
                                acc[k] = field.add(acc[k], field.mul(a, b));
                            }
                        }
                    }
                    entries.push((enc.encode(&acc), qcode, enc.encode(rv), pi as u8));
                }
            }
        }
        entries.sort_unstable();
        entries.dedup_by_key(|e| e.0);
        Ok(ProductTable { enc, entries, pairs })
    }

    fn find(&self, code: u64) -> Option<usize> {
        self.entries.binary_search_by_key(&code, |e| e.0).ok()
    }

    fn factors(&self, field: &Arc<Field>, nvars: usize, i: usize) -> (Poly, Poly) {
        let (_, qc, rc, pi) = self.entries[i];
        let (qm, rm) = &self.pairs[pi as usize];
        let unpack = |code: u64, monos: &[Monomial]| {
            let mut v = vec![Elem::ZERO; monos.len()];
            let mut c = code;
            for slot in v.iter_mut().rev() {
                *slot = Elem((c % self.enc.q) as u32);
                c /= self.enc.q;
            }
            Poly::from_coeffs(field, nvars, monos, &v)
        };
        (unpack(qc, qm), unpack(rc, rm))
    }
}

/// Schmidt rank of `p` with factors of degree below `deg p`.
pub fn schmidt_rank(p: &Poly, cutoff: u32, budget: u128) -> Result<SchmidtResult> {
    schmidt_rank_in_degree(p, p.degree(), cutoff, budget)
}

/// Schmidt rank where factors must have degree below `d` (`d ≥ deg p`).
pub fn schmidt_rank_in_degree(p: &Poly, d: u32, cutoff: u32, budget: u128) -> Result<SchmidtResult> {
    let field = p.field().clone();
    if p.is_zero() {
        return Ok(SchmidtResult { rank: SchmidtRank::Exact(0), minimal: true, witness: vec![] });
    }
    if d <= 1 {
        return Ok(SchmidtResult { rank: SchmidtRank::Infinite, minimal: true, witness: vec![] });
    }
    if p.degree() < d {
        let one = Poly::constant(&field, p.nvars(), Elem::ONE);
        return Ok(SchmidtResult { rank: SchmidtRank::Exact(1), minimal: true, witness: vec![(one, p.clone())] });
    }
    let homogeneous = p.is_homogeneous();
    let minimal = homogeneous || d == 2;
    let table = ProductTable::build(&field, p.nvars(), d, homogeneous, budget)?;
    let m = table.enc.monos.len();
    let target = p.coeff_vector(&table.enc.monos).expect("target monomials cover p");
    let target_code = table.enc.encode(&target);

    // Depth-first over nondecreasing product indices.
    let n = table.entries.len();
    let mut work: u128 = 0;
    for r in 1..=cutoff {
        let steps = (n as u128).saturating_pow(r - 1);
        work = work.saturating_add(steps);
        if work > budget {
            return Err(Error::BudgetExceeded { what: "Schmidt search", needed: work, limit: budget });
        }
        let mut chosen = Vec::with_capacity(r as usize);
        let mut residual = target.clone();
        if let Some(last) = search(&field, &table, r - 1, 0, &mut residual, &mut chosen, m) {
            chosen.push(last);
            let witness = chosen.iter().map(|&i| table.factors(&field, p.nvars(), i)).collect();
            return Ok(SchmidtResult { rank: SchmidtRank::Exact(r), minimal, witness });
        }
        debug_assert_eq!(table.enc.encode(&residual), target_code);
    }
    Ok(SchmidtResult { rank: SchmidtRank::Above(cutoff), minimal, witness: vec![] })
}

fn search(
    field: &Field,
    table: &ProductTable,
    left: u32,
    start: usize,
    residual: &mut Vec<Elem>,
    chosen: &mut Vec<usize>,
    m: usize,
) -> Option<usize> {
    if left == 0 {
        return table.find(table.enc.encode(residual));
    }
    let mut prod = vec![Elem::ZERO; m];
    for i in start..table.entries.len() {
        table.enc.decode(table.entries[i].0, &mut prod);
        for (a, &b) in residual.iter_mut().zip(&prod) {
            *a = field.sub(*a, b);
        }
        chosen.push(i);
        if let Some(found) = search(field, table, left - 1, i, residual, chosen, m) {
            return Some(found);
        }
        chosen.pop();
        for (a, &b) in residual.iter_mut().zip(&prod) {
            *a = field.add(*a, b);
        }
    }
    None
}

/// Minimum Schmidt rank over nontrivial combinations inside each degree
/// block; the collection's rank is the minimum over blocks.
pub fn collection_rank(c: &PolyCollection, cutoff: u32, budget: u128) -> Result<SchmidtRank> {
    let field = c.field().clone();
    let q = field.q();
    let mut degrees = c.degrees();
    degrees.sort();
    degrees.dedup();
    let mut best: Option<SchmidtRank> = None;
    for d in degrees {
        let block: Vec<&Poly> = c.polys().iter().filter(|p| p.degree() == d).collect();
        let k = block.len();
        // Projective combinations: first nonzero coefficient is 1.
        for a in vectors(q, k, true) {
            let mut comb = Poly::zero(&field, c.nvars());
            for (p, &ai) in block.iter().zip(&a) {
                if !ai.is_zero() {
                    comb = comb.add(&p.scale(ai));
                }
            }
            let r = schmidt_rank_in_degree(&comb, d, cutoff, budget)?.rank;
            best = Some(match best {
                None => r,
                Some(b) => min_rank(b, r),
            });
        }
    }
    Ok(best.expect("collections are nonempty"))
}

fn min_rank(a: SchmidtRank, b: SchmidtRank) -> SchmidtRank {
    if a.lower_bound() <= b.lower_bound() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    const BUDGET: u128 = 1 << 32;

    fn f(p: u32) -> Arc<Field> {
        Arc::new(Field::prime(p).unwrap())
    }

    fn check_witness(p: &Poly, res: &SchmidtResult) {
        let sum = res.witness.iter().fold(Poly::zero(p.field(), p.nvars()), |acc, (a, b)| acc.add(&a.mul(b)));
        assert_eq!(&sum, p);
        for (a, b) in &res.witness {
            assert!(a.degree() < p.degree() && b.degree() < p.degree());
        }
    }

    #[test]
    fn rank_one_products() {
        let k = f(7);
        for s in ["x1*x2", "(x1 + 2*x2)*(3*x1 + x3)", "x1^2"] {
            let p = parse_poly(s, &k, Some(3)).unwrap();
            let r = schmidt_rank(&p, 3, BUDGET).unwrap();
            assert_eq!(r.rank, SchmidtRank::Exact(1), "{s}");
            check_witness(&p, &r);
        }
    }

    #[test]
    fn hyperbolic_pair_has_rank_two() {
        let k = f(7);
        let p = parse_poly("x1*x2 + x3*x4", &k, None).unwrap();
        let r = schmidt_rank(&p, 3, BUDGET).unwrap();
        assert_eq!(r.rank, SchmidtRank::Exact(2));
        assert!(r.minimal);
        check_witness(&p, &r);
    }

    #[test]
    fn inhomogeneous_quadrics() {
        let k = f(3);
        let p = parse_poly("x1*x2 + x3", &k, None).unwrap();
        let r = schmidt_rank(&p, 3, BUDGET).unwrap();
        assert_eq!(r.rank, SchmidtRank::Exact(2));
        check_witness(&p, &r);
        let p = parse_poly("x1*x2 + x1 + x2 + 1", &k, None).unwrap();
        assert_eq!(schmidt_rank(&p, 3, BUDGET).unwrap().rank, SchmidtRank::Exact(1));
    }

    #[test]
    fn low_degree_conventions() {
        let k = f(5);
        assert_eq!(schmidt_rank(&Poly::zero(&k, 2), 2, BUDGET).unwrap().rank, SchmidtRank::Exact(0));
        let lin = parse_poly("x1 + 1", &k, None).unwrap();
        assert_eq!(schmidt_rank(&lin, 2, BUDGET).unwrap().rank, SchmidtRank::Infinite);
        assert_eq!(schmidt_rank_in_degree(&lin, 2, 2, BUDGET).unwrap().rank, SchmidtRank::Exact(1));
    }

    #[test]
    fn collections() {
        let k = f(7);
        let a = parse_poly("x1*x2", &k, Some(4)).unwrap();
        let b = parse_poly("x1*x2 + x3*x4", &k, Some(4)).unwrap();
        let c = parse_poly("x3*x4", &k, Some(4)).unwrap();
        let col = PolyCollection::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(collection_rank(&col, 3, BUDGET).unwrap(), SchmidtRank::Exact(1));
        let col = PolyCollection::new(vec![a.clone(), c]).unwrap();
        assert_eq!(collection_rank(&col, 3, BUDGET).unwrap(), SchmidtRank::Exact(1));
        let single = PolyCollection::single(b.clone());
        assert_eq!(collection_rank(&single, 3, BUDGET).unwrap(), SchmidtRank::Exact(2));
    }

    #[test]
    fn cubic_rank_over_f5() {
        let k = f(5);
        let p = parse_poly("x1*x2*x3", &k, None).unwrap();
        assert_eq!(schmidt_rank(&p, 2, BUDGET).unwrap().rank, SchmidtRank::Exact(1));
        let p = parse_poly("x1^3 + x2^3", &k, None).unwrap();
        // x^3 + y^3 = (x + y)(x^2 - xy + y^2)
        assert_eq!(schmidt_rank(&p, 2, BUDGET).unwrap().rank, SchmidtRank::Exact(1));
    }
}
