//! Enumerated varieties `X(k) ⊂ k^n`, slices by an affine function, flats
//! inside them, and the model hypersurfaces `X_n`.

mod cache;
mod flats;
mod xn;

pub use cache::{cache_key, hex, load_cached, save_cached, CacheMeta};
pub use flats::{flat_extension_deficiency, flats_in_bucket, Deficiency, FlatCatalog};
pub use xn::{build_xn, kappa, nu, torus_factor, GammaElement, TorusElement, Xn, XnSpec};

use std::sync::Arc;

use rayon::prelude::*;

use crate::cyclo::CycloSum;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::{CompiledPoly, Poly, PolyCollection};
use crate::space::PointSpace;

/// Bitmaps are kept for ambient spaces up to this many points.
const BITMAP_LIMIT: u64 = 1 << 28;

#[derive(Clone, Debug)]
pub struct Slice {
    ell: Poly,
    /// Point ordinals per value of `ell`, indexed by element index.
    buckets: Vec<Vec<u32>>,
}

impl Slice {
    pub fn ell(&self) -> &Poly {
        &self.ell
    }
}

#[derive(Clone, Debug)]
pub struct VarietyTable {
    spec: PolyCollection,
    space: PointSpace,
    points: Vec<u64>,
    bitmap: Option<Vec<u64>>,
    slice: Option<Slice>,
}

impl VarietyTable {
    /// All common zeros of the collection.
    pub fn enumerate(spec: &PolyCollection, limit: u128) -> Result<VarietyTable> {
        let space = PointSpace::new(spec.field().q(), spec.nvars())?;
        space.check_budget("variety enumeration", limit)?;
        let compiled: Vec<CompiledPoly> = spec.polys().iter().map(|p| p.compile()).collect();
        let chunk = 1u64 << 15;
        let chunks = space.size().div_ceil(chunk);
        let parts: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut out = Vec::new();
                let range = c * chunk..((c + 1) * chunk).min(space.size());
                space.for_each_in(range, |code, v| {
                    if compiled.iter().all(|p| p.eval(v).is_zero()) {
                        out.push(code);
                    }
                });
                out
            })
            .collect();
        let points: Vec<u64> = parts.into_iter().flatten().collect();
        Ok(Self::from_points(spec.clone(), space, points))
    }

    /// Build from sorted, distinct codes (the cache path).
    pub(crate) fn from_points(spec: PolyCollection, space: PointSpace, points: Vec<u64>) -> VarietyTable {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let bitmap = (space.size() <= BITMAP_LIMIT).then(|| {
            let mut bits = vec![0u64; space.size().div_ceil(64) as usize];
            for &c in &points {
                bits[(c / 64) as usize] |= 1 << (c % 64);
            }
            bits
        });
        VarietyTable { spec, space, points, bitmap, slice: None }
    }

    pub fn spec(&self) -> &PolyCollection {
        &self.spec
    }

    pub fn field(&self) -> &Arc<Field> {
        self.spec.field()
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn nvars(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn codes(&self) -> &[u64] {
        &self.points
    }

    pub fn code(&self, i: usize) -> u64 {
        self.points[i]
    }

    pub fn point(&self, i: usize) -> Vec<Elem> {
        self.space.decode(self.points[i])
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        self.points.iter().map(|&c| self.space.decode(c))
    }

    #[inline]
    pub fn contains_code(&self, code: u64) -> bool {
        match &self.bitmap {
            Some(bits) => bits[(code / 64) as usize] >> (code % 64) & 1 == 1,
            None => self.points.binary_search(&code).is_ok(),
        }
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        v.len() == self.nvars() && self.contains_code(self.space.encode(v))
    }

    pub fn ordinal_of_code(&self, code: u64) -> Option<usize> {
        self.points.binary_search(&code).ok()
    }

    pub fn ordinal(&self, v: &[Elem]) -> Option<usize> {
        if v.len() != self.nvars() {
            return None;
        }
        self.ordinal_of_code(self.space.encode(v))
    }

    /// Attach the buckets `X_b = X ∩ {ell = b}` for an affine `ell`.
    pub fn with_slice(mut self, ell: &Poly) -> Result<VarietyTable> {
        if ell.degree() > 1 {
            return Err(Error::DegreeExceeded { degree: ell.degree(), bound: 1 });
        }
        if ell.nvars() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: ell.nvars() });
        }
        let c = ell.compile();
        let mut buckets = vec![Vec::new(); self.field().order()];
        let mut v = vec![Elem::ZERO; self.nvars()];
        for (i, &code) in self.points.iter().enumerate() {
            self.space.decode_into(code, &mut v);
            buckets[c.eval(&v).index()].push(i as u32);
        }
        self.slice = Some(Slice { ell: ell.clone(), buckets });
        Ok(self)
    }

    pub fn slice(&self) -> Option<&Slice> {
        self.slice.as_ref()
    }

    /// Ordinals in `X_b`; the whole table when no slice is attached.
    pub fn bucket(&self, b: Elem) -> Vec<u32> {
        match &self.slice {
            Some(s) => s.buckets[b.index()].clone(),
            None => (0..self.points.len() as u32).collect(),
        }
    }

    pub fn bucket_sizes(&self) -> Option<Vec<usize>> {
        self.slice.as_ref().map(|s| s.buckets.iter().map(|b| b.len()).collect())
    }

    /// Sub-table of points satisfying extra equations, in the same ambient space.
    pub fn restrict(&self, extra: &[Poly]) -> VarietyTable {
        let compiled: Vec<CompiledPoly> = extra.iter().map(|p| p.compile()).collect();
        let mut v = vec![Elem::ZERO; self.nvars()];
        let points = self
            .points
            .iter()
            .copied()
            .filter(|&c| {
                self.space.decode_into(c, &mut v);
                compiled.iter().all(|p| p.eval(&v).is_zero())
            })
            .collect();
        let mut polys = self.spec.polys().to_vec();
        polys.extend(extra.iter().cloned());
        let spec = PolyCollection::new(polys).expect("same ambient");
        Self::from_points(spec, self.space, points)
    }
}

/// `|X| = q^{-c} Σ_{t ∈ k^c} Σ_{x ∈ V} e_q(Σ_s t_s P_s(x))`, with the double sum
/// accumulated exactly.
pub fn character_sum_count(spec: &PolyCollection, limit: u128) -> Result<i128> {
    let field = spec.field().clone();
    let space = PointSpace::new(field.q(), spec.nvars())?;
    space.check_budget("character sum", limit)?;
    let values = PointSpace::new(field.q(), spec.len())?;
    let compiled: Vec<CompiledPoly> = spec.polys().iter().map(|p| p.compile()).collect();
    let chunk = 1u64 << 15;
    let hist = (0..space.size().div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u64; values.size() as usize];
            let mut y = vec![Elem::ZERO; compiled.len()];
            space.for_each_in(c * chunk..((c + 1) * chunk).min(space.size()), |_, v| {
                for (o, p) in y.iter_mut().zip(&compiled) {
                    *o = p.eval(v);
                }
                h[values.encode(&y) as usize] += 1;
            });
            h
        })
        .reduce(
            || vec![0u64; values.size() as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut sum = CycloSum::new(field.p());
    for t in 0..values.size() {
        let tv = values.decode(t);
        for (code, &n) in hist.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let y = values.decode(code as u64);
            let s = tv.iter().zip(&y).fold(Elem::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)));
            sum.push_residue_n(field.trace(s), n);
        }
    }
    let total = sum.as_integer().ok_or(Error::Undecidable)?;
    Ok(total / values.size() as i128)
}
