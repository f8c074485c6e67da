//! Lines and planes inside a bucket `X_b`, and how often they extend to a
//! flat one dimension higher that reaches `X_0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::AffineFlat;
use crate::space::PointSpace;

use super::VarietyTable;

#[derive(Clone, Debug)]
pub struct FlatCatalog {
    pub dim: usize,
    pub bucket: Option<Elem>,
    /// Canonical flats in ascending (base, directions) order.
    pub flats: Vec<AffineFlat>,
}

impl FlatCatalog {
    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }
}

struct Direction {
    vec: Vec<Elem>,
    pivot: usize,
    /// Codes of `t·u` for `t = 1..q-1` (element order).
    multiples: Vec<u64>,
}

fn linear_part(table: &VarietyTable) -> Option<Vec<Elem>> {
    let s = table.slice()?;
    let n = table.nvars();
    Some(
        (0..n)
            .map(|i| {
                let mut e = vec![0u16; n];
                e[i] = 1;
                s.ell().coeff(&crate::polyring::Monomial::from_exponents(e))
            })
            .collect(),
    )
}

/// Normalized directions (first nonzero entry 1) killed by the slice's linear part.
fn directions(field: &Field, space: &PointSpace, lin: Option<&[Elem]>) -> Vec<Direction> {
    let q = field.q();
    let mut out = Vec::new();
    space.for_each(|_, v| {
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return;
        };
        if v[pivot] != Elem::ONE {
            return;
        }
        if let Some(l) = lin {
            if !crate::linalg::dot(field, l, v).is_zero() {
                return;
            }
        }
        let multiples = (1..q)
            .map(|t| {
                let w: Vec<Elem> = v.iter().map(|&x| field.mul(Elem(t), x)).collect();
                space.encode(&w)
            })
            .collect();
        out.push(Direction { vec: v.to_vec(), pivot, multiples });
    });
    out
}

/// All `dim`-flats (`dim` ∈ {1, 2}) inside `X_b`, or inside `X` when
/// `bucket` is `None`.
pub fn flats_in_bucket(table: &VarietyTable, bucket: Option<Elem>, dim: usize, limit: u128) -> Result<FlatCatalog> {
    if !(1..=2).contains(&dim) {
        return Err(Error::Invalid(format!("flat catalogs exist for dim 1 and 2, not {dim}")));
    }
    let field = table.field().clone();
    let space = *table.space();
    let members: Vec<u32> = match bucket {
        Some(b) => {
            if table.slice().is_none() {
                return Err(Error::Invalid("bucket requested without a slice".into()));
            }
            table.bucket(b)
        }
        None => (0..table.len() as u32).collect(),
    };
    let lin = if bucket.is_some() { linear_part(table) } else { None };
    let ndirs = (space.size() as u128) / (field.q() as u128 - 1);
    let cost = members.len() as u128 * ndirs * field.q() as u128;
    if cost > limit {
        return Err(Error::BudgetExceeded { what: "flat scan", needed: cost, limit });
    }
    let dirs = directions(&field, &space, lin.as_deref());
    let on_line = |x: u64, d: &Direction| d.multiples.iter().all(|&m| table.contains_code(space.add(&field, x, m)));

    let found: Vec<Vec<AffineFlat>> = members
        .par_iter()
        .map(|&i| {
            let xc = table.code(i as usize);
            let x = space.decode(xc);
            let mut out = Vec::new();
            if dim == 1 {
                for d in &dirs {
                    if x[d.pivot].is_zero() && on_line(xc, d) {
                        out.push(AffineFlat::new(&field, x.clone(), vec![d.vec.clone()]).expect("nonzero"));
                    }
                }
                return out;
            }
            let through: Vec<&Direction> = dirs.iter().filter(|d| on_line(xc, d)).collect();
            for u1 in &through {
                if !x[u1.pivot].is_zero() {
                    continue;
                }
                for u2 in &through {
                    if u2.pivot <= u1.pivot || !u1.vec[u2.pivot].is_zero() || !x[u2.pivot].is_zero() {
                        continue;
                    }
                    let full = u1.multiples.iter().all(|&m1| {
                        let y = space.add(&field, xc, m1);
                        u2.multiples.iter().all(|&m2| table.contains_code(space.add(&field, y, m2)))
                    });
                    if full {
                        out.push(
                            AffineFlat::new(&field, x.clone(), vec![u1.vec.clone(), u2.vec.clone()])
                                .expect("independent"),
                        );
                    }
                }
            }
            out
        })
        .collect();
    let mut flats: Vec<AffineFlat> = found.into_iter().flatten().collect();
    flats.sort_by(|a, b| (a.base(), a.directions()).cmp(&(b.base(), b.directions())));
    Ok(FlatCatalog { dim, bucket, flats })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Deficiency {
    pub dim: usize,
    pub total: usize,
    pub deficient: usize,
    pub fraction: f64,
    /// Bases and directions of the first few flats with no extension.
    pub examples: Vec<(Vec<u32>, Vec<Vec<u32>>)>,
}

/// Fraction of catalogued flats in `X_b` (`b ≠ 0`) that lie in no flat of one
/// more dimension inside `X` meeting `X_0`.
pub fn flat_extension_deficiency(table: &VarietyTable, catalog: &FlatCatalog, limit: u128) -> Result<Deficiency> {
    let b = catalog.bucket.ok_or_else(|| Error::Invalid("deficiency needs a bucketed catalog".into()))?;
    if b.is_zero() {
        return Err(Error::Invalid("deficiency is measured on a bucket b ≠ 0".into()));
    }
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let field = table.field().clone();
    let space = *table.space();
    let zero_bucket: Vec<u64> = table.bucket(Elem::ZERO).iter().map(|&i| table.code(i as usize)).collect();
    let q = field.q() as u128;
    let cost = catalog.len() as u128 * zero_bucket.len() as u128 * q.pow(catalog.dim as u32 + 1);
    if cost > limit.saturating_mul(64) {
        return Err(Error::BudgetExceeded { what: "deficiency scan", needed: cost, limit });
    }
    let flags: Vec<bool> = catalog
        .flats
        .par_iter()
        .map(|flat| {
            let pts: Vec<u64> = flat.points(&field).iter().map(|p| space.encode(p)).collect();
            let base = pts[0];
            let neg_base = space.neg(&field, base);
            !zero_bucket.iter().any(|&y| {
                let z = space.add(&field, y, neg_base);
                (1..field.q()).all(|t| {
                    let tz = space.encode(&space.decode(z).iter().map(|&c| field.mul(Elem(t), c)).collect::<Vec<_>>());
                    pts.iter().all(|&p| table.contains_code(space.add(&field, p, tz)))
                })
            })
        })
        .collect();
    let deficient = flags.iter().filter(|&&f| f).count();
    let examples = catalog
        .flats
        .iter()
        .zip(&flags)
        .filter(|(_, &f)| f)
        .take(8)
        .map(|(fl, _)| {
            (
                fl.base().iter().map(|e| e.0).collect(),
                fl.directions().iter().map(|d| d.iter().map(|e| e.0).collect()).collect(),
            )
        })
        .collect();
    Ok(Deficiency {
        dim: catalog.dim,
        total: catalog.len(),
        deficient,
        fraction: deficient as f64 / catalog.len() as f64,
        examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::polyring::{parse_poly, Poly, PolyCollection};
    use std::collections::{BTreeSet, HashSet};
    use std::sync::Arc;

    fn table(k: &Arc<Field>, n: usize, p: &str, ell: &str) -> VarietyTable {
        let p = if p == "0" { Poly::zero(k, n) } else { parse_poly(p, k, Some(n)).unwrap() };
        VarietyTable::enumerate(&PolyCollection::single(p), 1 << 24)
            .unwrap()
            .with_slice(&parse_poly(ell, k, Some(n)).unwrap())
            .unwrap()
    }

    /// Lines as point sets, from all ordered pairs of distinct points.
    fn line_oracle(t: &VarietyTable, b: Elem) -> usize {
        let k = t.field();
        let pts: Vec<Vec<Elem>> = t.bucket(b).iter().map(|&i| t.point(i as usize)).collect();
        let mut lines = HashSet::new();
        for x in &pts {
            for y in &pts {
                if x == y {
                    continue;
                }
                let set: BTreeSet<Vec<Elem>> = k
                    .elements()
                    .map(|s| x.iter().zip(y).map(|(&a, &c)| k.add(a, k.mul(s, k.sub(c, a)))).collect())
                    .collect();
                if set.iter().all(|p| t.contains(p)) {
                    lines.insert(set);
                }
            }
        }
        lines.len()
    }

    #[test]
    fn lines_in_a_plane() {
        let k = Arc::new(Field::prime(7).unwrap());
        let t = table(&k, 3, "0", "x1");
        let cat = flats_in_bucket(&t, Some(Elem(3)), 1, 1 << 30).unwrap();
        assert_eq!(cat.len(), line_oracle(&t, Elem(3)));
        assert_eq!(cat.len(), 56);
        for f in &cat.flats {
            assert_eq!(&f.canonical(&k), f);
            assert!(f.points(&k).iter().all(|p| t.contains(p) && p[0] == Elem(3)));
        }
        let planes = flats_in_bucket(&t, Some(Elem(3)), 2, 1 << 30).unwrap();
        assert_eq!(planes.len(), 1);
        let d = flat_extension_deficiency(&t, &cat, 1 << 30).unwrap();
        assert_eq!(d.deficient, 0);
    }

    #[test]
    fn three_lines_example() {
        let k = Arc::new(Field::prime(5).unwrap());
        let t = table(&k, 2, "x1*x2*(x1 - x2)", "x1");
        let cat = flats_in_bucket(&t, Some(Elem(1)), 1, 1 << 30).unwrap();
        // X_1 = {(1, 0), (1, 1)}; the line through them leaves X.
        assert_eq!(t.bucket(Elem(1)).len(), 2);
        assert_eq!(cat.len(), line_oracle(&t, Elem(1)));
        assert!(cat.is_empty());
        assert_eq!(flat_extension_deficiency(&t, &cat, 1 << 30).unwrap_err(), Error::EmptyCatalog);
        let all = flats_in_bucket(&t, None, 1, 1 << 30).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn quadric_cone_lines_match_oracle() {
        let k = Arc::new(Field::prime(5).unwrap());
        let t = table(&k, 4, "x1*x2 + x3*x4", "x1");
        let cat = flats_in_bucket(&t, Some(Elem(1)), 1, 1 << 30).unwrap();
        assert_eq!(cat.len(), line_oracle(&t, Elem(1)));
        assert!(!cat.is_empty());
        let planes = flats_in_bucket(&t, None, 2, 1 << 30).unwrap();
        for p in &planes.flats {
            assert!(p.points(&k).iter().all(|v| t.contains(v)));
            assert_eq!(&p.canonical(&k), p);
        }
        let uniq: HashSet<_> = planes.flats.iter().map(|f| (f.base().to_vec(), f.directions().to_vec())).collect();
        assert_eq!(uniq.len(), planes.len());
    }
}
