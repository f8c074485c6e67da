//! Sparse multivariate polynomials over `F_q`.

mod affine;
mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use affine::{AffineFlat, AffineMap};
pub use parse::parse_poly;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

/// Exponent vector. Ordered graded-lex: total degree first, then the larger
/// exponent of the earlier variable wins.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<u16>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, field: &Field, v: &[Elem]) -> Elem {
        let mut acc = Elem::ONE;
        for (&e, &x) in self.0.iter().zip(v) {
            if e > 0 {
                acc = field.mul(acc, field.pow(x, e as u64));
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree `≤ d` (or exactly `d`), ascending graded-lex.
pub fn monomials_up_to(nvars: usize, d: u32, exact: bool) -> Vec<Monomial> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u16>, exact: bool, out: &mut Vec<Monomial>) {
        if i + 1 == cur.len() {
            let lo = if exact { left } else { 0 };
            for e in lo..=left {
                cur[i] = e as u16;
                out.push(Monomial(cur.clone()));
            }
            cur[i] = 0;
            return;
        }
        for e in 0..=left {
            cur[i] = e as u16;
            rec(i + 1, left - e, cur, exact, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if !exact || d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(0, d, &mut vec![0; nvars], exact, &mut out);
    out.sort();
    out
}

#[derive(Clone)]
pub struct Poly {
    field: Arc<Field>,
    nvars: usize,
    bound: u32,
    terms: BTreeMap<Monomial, Elem>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms && *self.field == *other.field
    }
}

impl Eq for Poly {}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self.render())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Poly {
    pub fn zero(field: &Arc<Field>, nvars: usize) -> Poly {
        Poly { field: field.clone(), nvars, bound: 0, terms: BTreeMap::new() }
    }

    pub fn constant(field: &Arc<Field>, nvars: usize, c: Elem) -> Poly {
        let mut p = Poly::zero(field, nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn var(field: &Arc<Field>, nvars: usize, i: usize) -> Poly {
        let mut p = Poly::zero(field, nvars);
        p.terms.insert(Monomial::var(nvars, i), Elem::ONE);
        p.bound = 1;
        p
    }

    pub fn monomial(field: &Arc<Field>, c: Elem, m: Monomial) -> Poly {
        let mut p = Poly::zero(field, m.nvars());
        p.add_term(m, c);
        p.bound = p.degree();
        p
    }

    pub fn from_terms(
        field: &Arc<Field>,
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, Elem)>,
    ) -> Result<Poly> {
        let mut p = Poly::zero(field, nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: m.nvars() });
            }
            p.add_term(m, c);
        }
        p.bound = p.degree();
        Ok(p)
    }

    /// Sum of `c_i x^{m_i}` for a dense coefficient vector against a monomial list.
    pub fn from_coeffs(field: &Arc<Field>, nvars: usize, monos: &[Monomial], coeffs: &[Elem]) -> Poly {
        let mut p = Poly::zero(field, nvars);
        for (m, &c) in monos.iter().zip(coeffs) {
            p.add_term(m.clone(), c);
        }
        p.bound = p.degree();
        p
    }

    /// Declare a degree bound; fails if the polynomial already exceeds it.
    pub fn with_bound(mut self, d: u32) -> Result<Poly> {
        let deg = self.degree();
        if deg > d {
            return Err(Error::DegreeExceeded { degree: deg, bound: d });
        }
        self.bound = d;
        Ok(self)
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Elem {
        self.terms.get(m).copied().unwrap_or(Elem::ZERO)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.degree())
    }

    pub fn leading_term(&self) -> Option<(&Monomial, Elem)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn constant_term(&self) -> Elem {
        self.coeff(&Monomial::one(self.nvars))
    }

    fn add_term(&mut self, m: Monomial, c: Elem) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(*e.get(), c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_same(&self, other: &Poly) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different spaces");
        assert!(*self.field == *other.field, "polynomials over different fields");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_same(other);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out.bound = self.bound.max(other.bound);
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.field.neg(*c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Elem) -> Poly {
        if c.is_zero() {
            return Poly { bound: self.bound, ..Poly::zero(&self.field, self.nvars) };
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = self.field.mul(*v, c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_same(other);
        let f = &self.field;
        let mut out = Poly::zero(f, self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), f.mul(ca, cb));
            }
        }
        out.bound = self.bound + other.bound;
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(&self.field, self.nvars, Elem::ONE);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, v: &[Elem]) -> Result<Elem> {
        if v.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: v.len() });
        }
        Ok(self.eval_unchecked(v))
    }

    pub fn eval_unchecked(&self, v: &[Elem]) -> Elem {
        let f = &self.field;
        let mut acc = Elem::ZERO;
        for (m, &c) in &self.terms {
            acc = f.add(acc, f.mul(c, m.eval(f, v)));
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| {
                    let factors = m
                        .0
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i as u32, e as u32))
                        .collect();
                    (c, factors)
                })
                .collect(),
        }
    }

    /// Substitute `x_i ↦ images[i]`; all images share one variable space.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: images.len() });
        }
        let f = &self.field;
        let target = images.first().map_or(0, |p| p.nvars);
        let mut out = Poly::zero(f, target);
        // Powers of each image are reused across terms.
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::constant(f, target, Elem::ONE), p.clone()])
            .collect();
        for (m, &c) in &self.terms {
            let mut t = Poly::constant(f, target, c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
        }
        let image_deg = images.iter().map(|p| p.degree()).max().unwrap_or(0).max(1);
        out.bound = (self.bound * image_deg).max(out.degree());
        Ok(out)
    }

    /// `φ*(P) = P ∘ φ`.
    pub fn compose_affine(&self, phi: &AffineMap) -> Result<Poly> {
        if phi.target_dim() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: phi.target_dim() });
        }
        let images = phi.coordinate_polys(&self.field);
        let mut out = self.substitute(&images)?;
        out.bound = self.bound;
        Ok(out)
    }

    pub fn restrict_to_flat(&self, flat: &AffineFlat) -> Result<Poly> {
        self.compose_affine(&flat.parametrization())
    }

    /// Image of the coefficients under a field embedding.
    pub fn map_field(&self, big: &Arc<Field>, embed: impl Fn(Elem) -> Elem) -> Poly {
        let mut out = Poly::zero(big, self.nvars);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), embed(c));
        }
        out.bound = self.bound;
        out
    }

    /// Rename variables into a larger space: variable `i` becomes `map[i]`.
    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(&self.field, nvars);
        for (m, &c) in &self.terms {
            let mut e = vec![0u16; nvars];
            for (i, &x) in m.0.iter().enumerate() {
                e[map[i]] += x;
            }
            out.add_term(Monomial(e), c);
        }
        out.bound = self.bound;
        out
    }

    pub fn partial(&self, i: usize) -> Poly {
        let f = &self.field;
        let mut out = Poly::zero(f, self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut mm = m.clone();
            mm.0[i] -= 1;
            out.add_term(mm, f.mul(c, f.from_i64(e as i64)));
        }
        out.bound = self.bound.saturating_sub(1);
        out
    }

    /// Nonzero homogeneous parts, ascending degree.
    pub fn homogeneous_components(&self) -> Vec<(u32, Poly)> {
        let mut out: Vec<(u32, Poly)> = Vec::new();
        for (m, &c) in &self.terms {
            let d = m.degree();
            if out.last().map(|(dd, _)| *dd) != Some(d) {
                out.push((d, Poly::zero(&self.field, self.nvars)));
            }
            out.last_mut().unwrap().1.terms.insert(m.clone(), c);
        }
        for (d, p) in &mut out {
            p.bound = *d;
        }
        out
    }

    pub fn homogeneous_part(&self, d: u32) -> Poly {
        let mut out = Poly::zero(&self.field, self.nvars);
        for (m, &c) in &self.terms {
            if m.degree() == d {
                out.terms.insert(m.clone(), c);
            }
        }
        out.bound = d;
        out
    }

    /// `Σ_ω (-1)^{|ω|} P(x + ω·h)`.
    pub fn derivative_form(&self, hs: &[Vec<Elem>], x: &[Elem]) -> Result<Elem> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        for h in hs {
            if h.len() != self.nvars {
                return Err(Error::DimensionMismatch { expected: self.nvars, got: h.len() });
            }
        }
        let f = &self.field;
        let d = hs.len();
        let mut acc = Elem::ZERO;
        let mut pt = vec![Elem::ZERO; self.nvars];
        for omega in 0u32..(1 << d) {
            pt.copy_from_slice(x);
            for (i, h) in hs.iter().enumerate() {
                if omega >> i & 1 == 1 {
                    for (a, &b) in pt.iter_mut().zip(h) {
                        *a = f.add(*a, b);
                    }
                }
            }
            let v = self.eval_unchecked(&pt);
            acc = if omega.count_ones() % 2 == 0 { f.add(acc, v) } else { f.sub(acc, v) };
        }
        Ok(acc)
    }

    /// Dense coefficient vector against a monomial list; `None` if some term
    /// falls outside the list.
    pub fn coeff_vector(&self, monos: &[Monomial]) -> Option<Vec<Elem>> {
        let mut out = vec![Elem::ZERO; monos.len()];
        let mut found = 0;
        for (i, m) in monos.iter().enumerate() {
            if let Some(&c) = self.terms.get(m) {
                out[i] = c;
                found += 1;
            }
        }
        (found == self.terms.len()).then_some(out)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let f = &self.field;
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, &c) in self.terms.iter().rev() {
            let coef = render_elem(f, c);
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            let s = if mono.is_empty() {
                coef
            } else if c == Elem::ONE {
                mono.join("*")
            } else {
                format!("{}*{}", coef, mono.join("*"))
            };
            parts.push(s);
        }
        parts.join(" + ")
    }
}

pub fn render_elem(field: &Field, c: Elem) -> String {
    if c.0 < field.p() {
        c.0.to_string()
    } else {
        let cs: Vec<String> = field.coeffs(c).iter().map(|d| d.to_string()).collect();
        format!("[{}]", cs.join(","))
    }
}

/// Flattened polynomial for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    field: Arc<Field>,
    nvars: usize,
    terms: Vec<(Elem, Vec<(u32, u32)>)>,
}

impl CompiledPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[inline]
    pub fn eval(&self, v: &[Elem]) -> Elem {
        let f = &*self.field;
        let mut acc = Elem::ZERO;
        'terms: for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                let x = v[i as usize];
                if x.is_zero() {
                    continue 'terms;
                }
                t = f.mul(t, if e == 1 { x } else { f.pow(x, e as u64) });
            }
            acc = f.add(acc, t);
        }
        acc
    }
}

/// A list of polynomials on a common space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCollection {
    polys: Vec<Poly>,
}

impl PolyCollection {
    pub fn new(polys: Vec<Poly>) -> Result<Self> {
        let first = polys.first().ok_or_else(|| Error::Invalid("empty polynomial collection".into()))?;
        let n = first.nvars();
        for p in &polys {
            if p.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.nvars() });
            }
            if *p.field() != *first.field() {
                return Err(Error::Invalid("collection mixes fields".into()));
            }
        }
        Ok(PolyCollection { polys })
    }

    pub fn single(p: Poly) -> Self {
        PolyCollection { polys: vec![p] }
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.polys[0].nvars()
    }

    pub fn field(&self) -> &Arc<Field> {
        self.polys[0].field()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(|p| p.degree()).collect()
    }

    /// Canonical text used for cache keys.
    pub fn render(&self) -> String {
        self.polys.iter().map(|p| p.render()).collect::<Vec<_>>().join("; ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> Arc<Field> {
        Arc::new(Field::prime(7).unwrap())
    }

    fn e(v: &[u32]) -> Vec<Elem> {
        v.iter().map(|&x| Elem(x)).collect()
    }

    #[test]
    fn eval_examples() {
        let f = f7();
        let p = parse_poly("x1*x2", &f, None).unwrap();
        assert_eq!(p.eval(&e(&[2, 3])).unwrap(), Elem(6));
        assert_eq!(Poly::zero(&f, 2).eval(&e(&[4, 5])).unwrap(), Elem(0));
        let q = parse_poly("x1*x2+x3*x4", &f, None).unwrap();
        assert_eq!(q.eval(&e(&[1, 2, 3, 4])).unwrap(), Elem(0));
        assert!(q.eval(&e(&[1, 2])).is_err());
        assert_eq!(q.compile().eval(&e(&[1, 2, 3, 4])), Elem(0));
    }

    #[test]
    fn homogeneous_split() {
        let f = f7();
        let p = parse_poly("x1*x2 + x1 + 5", &f, None).unwrap();
        let parts = p.homogeneous_components();
        let degs: Vec<u32> = parts.iter().map(|(d, _)| *d).collect();
        assert_eq!(degs, vec![0, 1, 2]);
        assert_eq!(parts[0].1.render(), "5");
        assert_eq!(parts[1].1.render(), "x1");
        assert_eq!(parts[2].1.render(), "x1*x2");
        assert!(Poly::zero(&f, 3).homogeneous_components().is_empty());
        let sum = parts.iter().fold(Poly::zero(&f, 2), |acc, (_, q)| acc.add(q));
        assert_eq!(sum, p);
    }

    #[test]
    fn diagonal_substitution() {
        let f = f7();
        let p = parse_poly("x1*x2", &f, None).unwrap();
        let phi = AffineMap::new(vec![vec![Elem(1)], vec![Elem(1)]], vec![Elem(0), Elem(0)]).unwrap();
        assert_eq!(p.compose_affine(&phi).unwrap().render(), "x1^2");
        let id = AffineMap::identity(2);
        assert_eq!(p.compose_affine(&id).unwrap(), p);
    }

    #[test]
    fn constant_map_onto_zero_point() {
        let f = f7();
        let p = parse_poly("x1*x2 + x3*x4", &f, None).unwrap();
        let v0 = e(&[1, 2, 3, 4]);
        let phi = AffineMap::new(vec![vec![]; 4], v0).unwrap();
        assert!(p.compose_affine(&phi).unwrap().is_zero());
    }

    #[test]
    fn restriction_examples() {
        let f = f7();
        let p = parse_poly("x1*x2", &f, None).unwrap();
        let line = AffineFlat::new(&f, e(&[0, 1]), vec![e(&[1, 1])]).unwrap();
        assert_eq!(p.restrict_to_flat(&line).unwrap().render(), "x1^2 + x1");
        let x1 = parse_poly("x1", &f, Some(3)).unwrap();
        let slice = AffineFlat::new(&f, e(&[3, 0, 0]), vec![e(&[0, 1, 0]), e(&[0, 0, 1])]).unwrap();
        assert_eq!(x1.restrict_to_flat(&slice).unwrap().render(), "3");
    }

    #[test]
    fn derivative_form_examples() {
        let f = f7();
        let p = parse_poly("x1*x2", &f, None).unwrap();
        let hs = vec![e(&[1, 0]), e(&[0, 1])];
        for x in [e(&[0, 0]), e(&[3, 5]), e(&[6, 1])] {
            assert_eq!(p.derivative_form(&hs, &x).unwrap(), Elem(1));
        }
        let lin = parse_poly("3*x1 + x2 + 2", &f, None).unwrap();
        assert_eq!(lin.derivative_form(&hs, &e(&[2, 2])).unwrap(), Elem(0));
        let zero_h = vec![e(&[0, 0]), e(&[4, 1])];
        assert_eq!(p.derivative_form(&zero_h, &e(&[5, 5])).unwrap(), Elem(0));
    }

    #[test]
    fn monomial_listing() {
        assert_eq!(monomials_up_to(4, 2, false).len(), 15);
        assert_eq!(monomials_up_to(3, 3, true).len(), 10);
        let m = monomials_up_to(2, 2, false);
        assert_eq!(m[0], Monomial::one(2));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn partials() {
        let f = f7();
        let p = parse_poly("x1^3*x2 + 2*x2^2", &f, None).unwrap();
        assert_eq!(p.partial(0).render(), "3*x1^2*x2");
        assert_eq!(p.partial(1).render(), "x1^3 + 4*x2");
    }
}
