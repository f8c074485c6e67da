//! Lower bound on Schmidt rank from the codimension of the singular locus,
//! with dimensions read off point counts over `k` and its quadratic extension.

use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Elem;
#[cfg(test)]
use crate::field::Field;
use crate::polyring::Poly;
use crate::space::PointSpace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCounts {
    /// `[|X(k)|, |X(k_2)|]`
    pub x: [u64; 2],
    /// `[|X_sing(k)|, |X_sing(k_2)|]`
    pub sing: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularBound {
    pub counts: PointCounts,
    pub dim_x: u32,
    pub dim_sing: u32,
    /// Codimension of the singular locus in the ambient space.
    pub codim: u32,
    pub bound: Ratio<i64>,
    /// Set when a log-count slope was more than 0.2 from its rounded value.
    pub slope_flag: bool,
    pub slopes: [f64; 2],
}

impl SingularBound {
    pub fn value(&self) -> f64 {
        *self.bound.numer() as f64 / *self.bound.denom() as f64
    }
}

fn count(p: &Poly, limit: u128) -> Result<(u64, u64)> {
    let space = PointSpace::new(p.field().q(), p.nvars())?;
    space.check_budget("singular locus enumeration", limit)?;
    let cp = p.compile();
    let partials: Vec<_> = (0..p.nvars()).map(|i| p.partial(i).compile()).collect();
    let chunk = 1u64 << 14;
    let chunks = space.size().div_ceil(chunk);
    let (nx, ns) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let range = c * chunk..((c + 1) * chunk).min(space.size());
            let (mut nx, mut ns) = (0u64, 0u64);
            space.for_each_in(range, |_, v| {
                if cp.eval(v).is_zero() {
                    nx += 1;
                    if partials.iter().all(|d| d.eval(v).is_zero()) {
                        ns += 1;
                    }
                }
            });
            (nx, ns)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((nx, ns))
}

/// `log_q N(k_2) − log_q N(k)`, which tends to the dimension.
fn slope(q: u32, n1: u64, n2: u64) -> f64 {
    let lq = (q as f64).ln();
    (n2 as f64).ln() / lq - (n1 as f64).ln() / lq
}

/// Counts over `k` and `k_2`; needs `q^{2n}` within `limit`.
pub fn singular_rank_bound(p: &Poly, limit: u128) -> Result<SingularBound> {
    if !p.is_homogeneous() || p.is_zero() {
        return Err(Error::Invalid("singular bound needs a nonzero homogeneous polynomial".into()));
    }
    let field = p.field();
    let d = p.degree();
    if field.p() <= d {
        return Err(Error::NotAdmissible(format!("characteristic {} ≤ degree {d}", field.p())));
    }
    let big = Arc::new(field.extension(2)?);
    let emb = field.embedding_into(&big)?;
    let p2 = p.map_field(&big, |c: Elem| emb.apply(c));
    let (x1, s1) = count(p, limit)?;
    let (x2, s2) = count(&p2, limit)?;
    if s1 == 0 && s2 == 0 {
        return Err(Error::DegenerateCount);
    }
    let q = field.q();
    let sx = slope(q, x1, x2);
    let ss = slope(q, s1.max(1), s2.max(1));
    let dim_x = sx.round().max(0.0) as u32;
    let dim_sing = ss.round().max(0.0) as u32;
    let flag = (sx - sx.round()).abs() > 0.2 || (ss - ss.round()).abs() > 0.2;
    let codim = p.nvars() as u32 - dim_sing;
    Ok(SingularBound {
        counts: PointCounts { x: [x1, x2], sing: [s1, s2] },
        dim_x,
        dim_sing,
        codim,
        bound: Ratio::new(codim as i64, 2 * d as i64),
        slope_flag: flag,
        slopes: [sx, ss],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    const LIMIT: u128 = 1 << 26;

    #[test]
    fn monomial_cubic() {
        let k = Arc::new(Field::prime(7).unwrap());
        let p = parse_poly("x1*x2*x3", &k, None).unwrap();
        let b = singular_rank_bound(&p, LIMIT).unwrap();
        assert_eq!(b.counts.sing, [19, 145]);
        assert_eq!(b.dim_sing, 1);
        assert_eq!(b.codim, 2);
        assert_eq!(b.bound, Ratio::new(1, 3));
    }

    #[test]
    fn hyperbolic_quadric() {
        let k = Arc::new(Field::prime(7).unwrap());
        let p = parse_poly("x1*x2 + x3*x4", &k, None).unwrap();
        let b = singular_rank_bound(&p, LIMIT).unwrap();
        assert_eq!(b.counts.sing, [1, 1]);
        assert_eq!(b.dim_x, 3);
        assert_eq!(b.bound, Ratio::new(1, 1));
    }

    #[test]
    fn inhomogeneous_rejected() {
        let k = Arc::new(Field::prime(7).unwrap());
        let p = parse_poly("x1*x2 + 1", &k, None).unwrap();
        assert!(matches!(singular_rank_bound(&p, LIMIT), Err(Error::Invalid(_))));
    }
}
