use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::linalg;

use super::{Monomial, Poly};

/// `w ↦ A w + b` from `k^source` to `k^target`; `matrix` has one row per
/// target coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    matrix: Vec<Vec<Elem>>,
    translation: Vec<Elem>,
    source: usize,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<Elem>>, translation: Vec<Elem>) -> Result<Self> {
        if matrix.len() != translation.len() {
            return Err(Error::DimensionMismatch { expected: matrix.len(), got: translation.len() });
        }
        let source = matrix.first().map_or(0, |r| r.len());
        if let Some(r) = matrix.iter().find(|r| r.len() != source) {
            return Err(Error::DimensionMismatch { expected: source, got: r.len() });
        }
        Ok(AffineMap { matrix, translation, source })
    }

    /// Same as [`AffineMap::new`] but with an explicit source dimension, for
    /// maps whose matrix has no rows.
    pub fn with_source(matrix: Vec<Vec<Elem>>, translation: Vec<Elem>, source: usize) -> Result<Self> {
        let mut m = AffineMap::new(matrix, translation)?;
        if m.matrix.is_empty() {
            m.source = source;
        } else if m.source != source {
            return Err(Error::DimensionMismatch { expected: source, got: m.source });
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect())
            .collect();
        AffineMap { matrix, translation: vec![Elem::ZERO; n], source: n }
    }

    pub fn source_dim(&self) -> usize {
        self.source
    }

    pub fn target_dim(&self) -> usize {
        self.translation.len()
    }

    pub fn matrix(&self) -> &[Vec<Elem>] {
        &self.matrix
    }

    pub fn translation(&self) -> &[Elem] {
        &self.translation
    }

    pub fn apply(&self, field: &Field, w: &[Elem]) -> Result<Vec<Elem>> {
        if w.len() != self.source {
            return Err(Error::DimensionMismatch { expected: self.source, got: w.len() });
        }
        Ok(self
            .matrix
            .iter()
            .zip(&self.translation)
            .map(|(row, &b)| row.iter().zip(w).fold(b, |acc, (&a, &x)| field.add(acc, field.mul(a, x))))
            .collect())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, field: &Field, inner: &AffineMap) -> Result<AffineMap> {
        if inner.target_dim() != self.source {
            return Err(Error::DimensionMismatch { expected: self.source, got: inner.target_dim() });
        }
        let matrix = self
            .matrix
            .iter()
            .map(|row| {
                (0..inner.source)
                    .map(|j| {
                        row.iter()
                            .zip(&inner.matrix)
                            .fold(Elem::ZERO, |acc, (&a, r)| field.add(acc, field.mul(a, r[j])))
                    })
                    .collect()
            })
            .collect();
        let translation = self.apply(field, &inner.translation)?;
        AffineMap::with_source(matrix, translation, inner.source)
    }

    /// The target coordinates as degree-one polynomials in the source variables.
    pub fn coordinate_polys(&self, field: &Arc<Field>) -> Vec<Poly> {
        self.matrix
            .iter()
            .zip(&self.translation)
            .map(|(row, &b)| {
                let mut terms: Vec<(Monomial, Elem)> =
                    row.iter().enumerate().map(|(j, &a)| (Monomial::var(self.source, j), a)).collect();
                terms.push((Monomial::one(self.source), b));
                Poly::from_terms(field, self.source, terms).expect("dimensions agree")
            })
            .collect()
    }
}

/// `base + span(directions)` with independent directions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineFlat {
    base: Vec<Elem>,
    directions: Vec<Vec<Elem>>,
}

impl AffineFlat {
    pub fn new(field: &Field, base: Vec<Elem>, directions: Vec<Vec<Elem>>) -> Result<Self> {
        let n = base.len();
        if let Some(d) = directions.iter().find(|d| d.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: d.len() });
        }
        if linalg::rank(field, &directions) != directions.len() {
            return Err(Error::DependentDirections);
        }
        Ok(AffineFlat { base, directions })
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn base(&self) -> &[Elem] {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<Elem>] {
        &self.directions
    }

    pub fn parametrization(&self) -> AffineMap {
        let n = self.base.len();
        let matrix = (0..n).map(|i| self.directions.iter().map(|d| d[i]).collect()).collect();
        AffineMap::with_source(matrix, self.base.clone(), self.directions.len()).expect("consistent flat")
    }

    /// Point with parameters `t`.
    pub fn point(&self, field: &Field, t: &[Elem]) -> Vec<Elem> {
        let mut v = self.base.clone();
        for (d, &ti) in self.directions.iter().zip(t) {
            if ti.is_zero() {
                continue;
            }
            for (a, &b) in v.iter_mut().zip(d) {
                *a = field.add(*a, field.mul(ti, b));
            }
        }
        v
    }

    /// All `q^dim` points; parameter tuples run with the first parameter most
    /// significant.
    pub fn points(&self, field: &Field) -> Vec<Vec<Elem>> {
        let q = field.q();
        let k = self.dim();
        let count = (q as usize).pow(k as u32);
        let mut t = vec![Elem::ZERO; k];
        (0..count)
            .map(|mut idx| {
                for slot in t.iter_mut().rev() {
                    *slot = Elem((idx % q as usize) as u32);
                    idx /= q as usize;
                }
                self.point(field, &t)
            })
            .collect()
    }

    /// Reduced row echelon directions and the base point with zeros at the
    /// pivot coordinates, which is the lexicographically least point.
    pub fn canonical(&self, field: &Field) -> AffineFlat {
        let (rows, pivots) = linalg::rref(field, self.directions.clone());
        let mut base = self.base.clone();
        for (row, &c) in rows.iter().zip(&pivots) {
            let t = base[c];
            if !t.is_zero() {
                for (a, &b) in base.iter_mut().zip(row) {
                    *a = field.sub(*a, field.mul(t, b));
                }
            }
        }
        AffineFlat { base, directions: rows }
    }

    pub fn contains(&self, field: &Field, v: &[Elem]) -> bool {
        let diff: Vec<Elem> = v.iter().zip(&self.base).map(|(&a, &b)| field.sub(a, b)).collect();
        let mut rows = self.directions.clone();
        rows.push(diff);
        linalg::rank(field, &rows) == self.directions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Vec<Elem> {
        v.iter().map(|&x| Elem(x)).collect()
    }

    #[test]
    fn dependent_directions_rejected() {
        let f = Field::prime(5).unwrap();
        let err = AffineFlat::new(&f, e(&[0, 0]), vec![e(&[1, 2]), e(&[2, 4])]).unwrap_err();
        assert_eq!(err, Error::DependentDirections);
    }

    #[test]
    fn canonical_is_lex_min() {
        let f = Field::prime(5).unwrap();
        let flat = AffineFlat::new(&f, e(&[3, 4, 1]), vec![e(&[2, 1, 0])]).unwrap();
        let c = flat.canonical(&f);
        let mut pts = flat.points(&f);
        pts.sort();
        assert_eq!(c.base(), pts[0].as_slice());
        assert_eq!(c.directions()[0], e(&[1, 3, 0]));
        assert!(flat.contains(&f, c.base()));
    }

    #[test]
    fn compose_matches_apply() {
        let f = Field::prime(7).unwrap();
        let a = AffineMap::new(vec![e(&[1, 2]), e(&[3, 0]), e(&[5, 6])], e(&[1, 1, 1])).unwrap();
        let b = AffineMap::new(vec![e(&[4]), e(&[2])], e(&[0, 3])).unwrap();
        let ab = a.compose(&f, &b).unwrap();
        for t in 0..7 {
            let w = e(&[t]);
            let direct = a.apply(&f, &b.apply(&f, &w).unwrap()).unwrap();
            assert_eq!(ab.apply(&f, &w).unwrap(), direct);
        }
    }
}
