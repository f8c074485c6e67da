//! The model hypersurface `X_n = {Σ_i Π_j x_i^j = 0}` in `(k^d)^n`, the maps
//! `κ`, `ν`, and the torus and permutation actions on it.
//!
//! Coordinate `x_i^j` (blocks and positions counted from zero) is variable
//! `i·d + j`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field, SubgroupDelta};
use crate::polyring::{Monomial, Poly, PolyCollection};

use super::VarietyTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XnSpec {
    pub n: usize,
    pub d: usize,
}

impl XnSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Invalid("X_n needs n ≥ 1 and d ≥ 1".into()));
        }
        Ok(XnSpec { n, d })
    }

    pub fn nvars(&self) -> usize {
        self.n * self.d
    }

    pub fn var(&self, i: usize, j: usize) -> usize {
        i * self.d + j
    }

    /// `P_n = Σ_i μ(w_i)` with `μ` the product of a block's coordinates.
    pub fn poly(&self, field: &Arc<Field>) -> Poly {
        let mut p = Poly::zero(field, self.nvars());
        for i in 0..self.n {
            let mut e = vec![0u16; self.nvars()];
            for j in 0..self.d {
                e[self.var(i, j)] = 1;
            }
            p = p.add(&Poly::monomial(field, Elem::ONE, Monomial::from_exponents(e)));
        }
        p
    }

    /// `μ(w_i)` as a polynomial on `V_n`.
    pub fn mu_poly(&self, field: &Arc<Field>, i: usize) -> Poly {
        let mut e = vec![0u16; self.nvars()];
        for j in 0..self.d {
            e[self.var(i, j)] = 1;
        }
        Poly::monomial(field, Elem::ONE, Monomial::from_exponents(e))
    }
}

pub struct Xn {
    pub spec: XnSpec,
    pub poly: Poly,
    pub table: VarietyTable,
}

pub fn build_xn(field: &Arc<Field>, n: usize, d: usize, limit: u128) -> Result<Xn> {
    let spec = XnSpec::new(n, d)?;
    let poly = spec.poly(field);
    let table = VarietyTable::enumerate(&PolyCollection::single(poly.clone()), limit)?;
    Ok(Xn { spec, poly, table })
}

/// `κ(c) = ((c_1, 1, …, 1), …, (c_n, 1, …, 1))` for `c ∈ L = {Σ c_i = 0}`.
pub fn kappa(field: &Field, spec: &XnSpec, c: &[Elem]) -> Result<Vec<Elem>> {
    if c.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: c.len() });
    }
    if !c.iter().fold(Elem::ZERO, |a, &x| field.add(a, x)).is_zero() {
        return Err(Error::NotInL);
    }
    let mut v = vec![Elem::ONE; spec.nvars()];
    for (i, &ci) in c.iter().enumerate() {
        v[spec.var(i, 0)] = ci;
    }
    Ok(v)
}

/// `ν(v) = (μ(w_1), …, μ(w_n))`.
pub fn nu(field: &Field, spec: &XnSpec, v: &[Elem]) -> Vec<Elem> {
    v.chunks(spec.d).map(|w| w.iter().fold(Elem::ONE, |a, &x| field.mul(a, x))).collect()
}

/// An element of `T = (T_1)^n`, each block in `Δ^d` with product 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusElement {
    blocks: Vec<Vec<Elem>>,
}

impl TorusElement {
    pub fn new(field: &Field, delta: &SubgroupDelta, blocks: Vec<Vec<Elem>>) -> Result<Self> {
        for b in &blocks {
            if !b.iter().all(|&u| delta.contains(field, u)) {
                return Err(Error::Invalid("torus coordinate outside Δ".into()));
            }
            if b.iter().fold(Elem::ONE, |a, &u| field.mul(a, u)) != Elem::ONE {
                return Err(Error::Invalid("torus block product is not 1".into()));
            }
        }
        Ok(TorusElement { blocks })
    }

    pub fn identity(spec: &XnSpec) -> Self {
        TorusElement { blocks: vec![vec![Elem::ONE; spec.d]; spec.n] }
    }

    /// From logarithms `e[i][j-1]` of coordinates `j = 1..d-1` (base `g_Δ`);
    /// coordinate 0 is the inverse of their product.
    pub fn from_logs(field: &Field, delta: &SubgroupDelta, logs: &[Vec<u32>]) -> Self {
        let g = delta.generator();
        let m = delta.order() as u64;
        let blocks = logs
            .iter()
            .map(|e| {
                let s: u64 = e.iter().map(|&x| x as u64).sum::<u64>() % m;
                let mut b = vec![field.pow(g, (m - s) % m)];
                b.extend(e.iter().map(|&x| field.pow(g, x as u64)));
                b
            })
            .collect();
        TorusElement { blocks }
    }

    /// Every element of `T`, ordered by logarithm tuples.
    pub fn all(field: &Field, delta: &SubgroupDelta, spec: &XnSpec) -> Vec<TorusElement> {
        let m = delta.order();
        let k = spec.n * (spec.d - 1);
        let total = (m as usize).pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let mut flat = vec![0u32; k];
                for slot in flat.iter_mut().rev() {
                    *slot = (idx % m as usize) as u32;
                    idx /= m as usize;
                }
                let logs: Vec<Vec<u32>> = flat.chunks(spec.d - 1).map(|c| c.to_vec()).collect();
                let logs = if spec.d == 1 { vec![vec![]; spec.n] } else { logs };
                TorusElement::from_logs(field, delta, &logs)
            })
            .collect()
    }

    pub fn blocks(&self) -> &[Vec<Elem>] {
        &self.blocks
    }

    pub fn act(&self, field: &Field, v: &[Elem]) -> Vec<Elem> {
        v.iter().zip(self.blocks.iter().flatten()).map(|(&x, &u)| field.mul(x, u)).collect()
    }

    pub fn compose(&self, field: &Field, other: &TorusElement) -> TorusElement {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| field.mul(x, y)).collect())
            .collect();
        TorusElement { blocks }
    }

    pub fn inverse(&self, field: &Field) -> TorusElement {
        let blocks =
            self.blocks.iter().map(|b| b.iter().map(|&u| field.inv(u).expect("units")).collect()).collect();
        TorusElement { blocks }
    }
}

/// `t` with `x = t · κ(ν(x))`, defined when coordinates `1..d` of every block
/// of `x` lie in `Δ`.
pub fn torus_factor(field: &Field, delta: &SubgroupDelta, spec: &XnSpec, x: &[Elem]) -> Option<TorusElement> {
    let mut blocks = Vec::with_capacity(spec.n);
    for w in x.chunks(spec.d) {
        if !w[1..].iter().all(|&a| delta.contains(field, a)) {
            return None;
        }
        let rest = w[1..].iter().fold(Elem::ONE, |a, &u| field.mul(a, u));
        let mut b = vec![field.inv(rest).expect("Δ ⊂ k*")];
        b.extend_from_slice(&w[1..]);
        blocks.push(b);
    }
    Some(TorusElement { blocks })
}

/// An element of `Γ = (S_d)^n`; `(γv)_{i,j} = v_{i, perm_i(j)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaElement {
    perms: Vec<Vec<usize>>,
}

impl GammaElement {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        for p in &perms {
            let mut seen = vec![false; p.len()];
            for &j in p {
                if j >= p.len() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::Invalid(format!("{p:?} is not a permutation")));
                }
            }
        }
        Ok(GammaElement { perms })
    }

    pub fn identity(spec: &XnSpec) -> Self {
        GammaElement { perms: vec![(0..spec.d).collect(); spec.n] }
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn act(&self, v: &[Elem]) -> Vec<Elem> {
        let d = self.perms.first().map_or(0, |p| p.len());
        let mut out = Vec::with_capacity(v.len());
        for (w, p) in v.chunks(d).zip(&self.perms) {
            out.extend(p.iter().map(|&j| w[j]));
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GammaElement) -> GammaElement {
        let perms =
            self.perms.iter().zip(&other.perms).map(|(s, o)| s.iter().map(|&j| o[j]).collect()).collect();
        GammaElement { perms }
    }

    pub fn inverse(&self) -> GammaElement {
        let perms = self
            .perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (j, &pj) in p.iter().enumerate() {
                    inv[pj] = j;
                }
                inv
            })
            .collect();
        GammaElement { perms }
    }

    pub fn all(spec: &XnSpec) -> Vec<GammaElement> {
        let ps = permutations(spec.d);
        let mut out = vec![Vec::new()];
        for _ in 0..spec.n {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Vec<usize>>| {
                    ps.iter().map(move |p| {
                        let mut q = prefix.clone();
                        q.push(p.clone());
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(|perms| GammaElement { perms }).collect()
    }
}

/// Permutations of `0..d` in lexicographic order.
pub(crate) fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..d).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..d).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..d).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Arc<Field>, SubgroupDelta, Xn) {
        let k = Arc::new(Field::prime(7).unwrap());
        let delta = SubgroupDelta::find(&k, 6).unwrap();
        let xn = build_xn(&k, 2, 2, 1 << 20).unwrap();
        (k, delta, xn)
    }

    #[test]
    fn sizes() {
        let k = Arc::new(Field::prime(7).unwrap());
        assert_eq!(build_xn(&k, 1, 2, 1 << 20).unwrap().table.len(), 13);
        assert_eq!(build_xn(&k, 2, 2, 1 << 20).unwrap().table.len(), 385);
        assert_eq!(XnSpec::new(2, 3).unwrap().poly(&k).render(), "x1*x2*x3 + x4*x5*x6");
    }

    #[test]
    fn kappa_nu_round_trip() {
        let (k, _, xn) = setup();
        let spec = XnSpec::new(3, 2).unwrap();
        assert_eq!(kappa(&k, &spec, &[Elem(0); 3]).unwrap(), vec![Elem(0), Elem(1), Elem(0), Elem(1), Elem(0), Elem(1)]);
        assert_eq!(kappa(&k, &spec, &[Elem(1), Elem(0), Elem(0)]), Err(Error::NotInL));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p3 = spec.poly(&k);
        for _ in 0..100 {
            let a = Elem(rng.gen_range(0..7));
            let b = Elem(rng.gen_range(0..7));
            let c = vec![a, b, k.neg(k.add(a, b))];
            let v = kappa(&k, &spec, &c).unwrap();
            assert_eq!(nu(&k, &spec, &v), c);
            assert!(p3.eval(&v).unwrap().is_zero());
        }
        for v in xn.table.points() {
            let s = nu(&k, &xn.spec, &v).iter().fold(Elem::ZERO, |a, &x| k.add(a, x));
            assert!(s.is_zero());
        }
    }

    #[test]
    fn actions_preserve_xn_and_compose() {
        let (k, delta, xn) = setup();
        let ts = TorusElement::all(&k, &delta, &xn.spec);
        assert_eq!(ts.len(), 36);
        let gs = GammaElement::all(&xn.spec);
        assert_eq!(gs.len(), 4);
        for v in xn.table.points() {
            for t in &ts {
                let tv = t.act(&k, &v);
                assert!(xn.table.contains(&tv));
                assert_eq!(nu(&k, &xn.spec, &tv), nu(&k, &xn.spec, &v));
            }
            for g in &gs {
                assert!(xn.table.contains(&g.act(&v)));
            }
        }
        let v: Vec<Elem> = (1..=4).map(Elem).collect();
        for a in &gs {
            for b in &gs {
                assert_eq!(a.compose(b).act(&v), a.act(&b.act(&v)));
            }
            assert_eq!(a.compose(&a.inverse()), GammaElement::identity(&xn.spec));
        }
        for a in ts.iter().step_by(5) {
            for b in ts.iter().step_by(7) {
                assert_eq!(a.compose(&k, b).act(&k, &v), a.act(&k, &b.act(&k, &v)));
            }
        }
        assert_eq!(TorusElement::identity(&xn.spec).act(&k, &v), v);
    }

    #[test]
    fn torus_factor_on_x0() {
        let (k, delta, xn) = setup();
        let mut seen = 0;
        for x in xn.table.points() {
            if let Some(t) = torus_factor(&k, &delta, &xn.spec, &x) {
                let back = t.act(&k, &kappa(&k, &xn.spec, &nu(&k, &xn.spec, &x)).unwrap());
                assert_eq!(back, x);
                // Uniqueness: t is forced coordinatewise by the nonzero coordinates.
                let ts = TorusElement::all(&k, &delta, &xn.spec);
                let hits = ts
                    .iter()
                    .filter(|s| s.act(&k, &kappa(&k, &xn.spec, &nu(&k, &xn.spec, &x)).unwrap()) == x)
                    .count();
                assert_eq!(hits, 1);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn permutations_enumerated() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }
}
