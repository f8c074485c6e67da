//! Interpolation on full grids `k^e` with per-variable degree below `q`.

use std::sync::Arc;

use crate::field::{Elem, Field};
use crate::linalg;
use crate::polyring::{Monomial, Poly};

/// `V⁻¹` for the `q × q` Vandermonde matrix `V[t][e] = t^e` (element order).
pub fn vandermonde_inverse(field: &Field) -> Vec<Vec<Elem>> {
    let q = field.q() as usize;
    let rows: Vec<Vec<Elem>> = (0..q)
        .map(|t| {
            let mut row: Vec<Elem> = (0..q).map(|e| field.pow(Elem(t as u32), e as u64)).collect();
            row.extend((0..q).map(|j| if j == t { Elem::ONE } else { Elem::ZERO }));
            row
        })
        .collect();
    let (red, _) = linalg::rref(field, rows);
    red.into_iter().map(|r| r[q..].to_vec()).collect()
}

/// Dense coefficients `c[e_1..e_k]` (first exponent most significant) of the
/// reduced polynomial taking `values` on `k^k` in code order.
pub fn interpolate_coeffs(field: &Field, vinv: &[Vec<Elem>], nvars: usize, values: &[Elem]) -> Vec<Elem> {
    let q = field.q() as usize;
    assert_eq!(values.len(), q.pow(nvars as u32));
    let mut cur = values.to_vec();
    let mut buf = vec![Elem::ZERO; q];
    // Axis `ax` has stride q^(nvars-1-ax).
    for ax in 0..nvars {
        let stride = q.pow((nvars - 1 - ax) as u32);
        let block = stride * q;
        for start in (0..cur.len()).step_by(block) {
            for off in 0..stride {
                for (e, slot) in buf.iter_mut().enumerate() {
                    *slot = (0..q).fold(Elem::ZERO, |acc, t| {
                        let v = cur[start + off + t * stride];
                        if v.is_zero() {
                            acc
                        } else {
                            field.add(acc, field.mul(vinv[e][t], v))
                        }
                    });
                }
                for (e, &c) in buf.iter().enumerate() {
                    cur[start + off + e * stride] = c;
                }
            }
        }
    }
    cur
}

/// Total degree of the interpolant, `None` for the zero function.
pub fn interpolated_degree(field: &Field, vinv: &[Vec<Elem>], nvars: usize, values: &[Elem]) -> Option<u32> {
    let q = field.q() as usize;
    let c = interpolate_coeffs(field, vinv, nvars, values);
    c.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(mut idx, _)| {
            let mut deg = 0;
            for _ in 0..nvars {
                deg += (idx % q) as u32;
                idx /= q;
            }
            deg
        })
        .max()
}

pub fn interpolate(field: &Arc<Field>, nvars: usize, values: &[Elem]) -> Poly {
    let vinv = vandermonde_inverse(field);
    let q = field.q() as usize;
    let c = interpolate_coeffs(field, &vinv, nvars, values);
    let terms = c.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(mut idx, &x)| {
        let mut e = vec![0u16; nvars];
        for slot in e.iter_mut().rev() {
            *slot = (idx % q) as u16;
            idx /= q;
        }
        (Monomial::from_exponents(e), x)
    });
    Poly::from_terms(field, nvars, terms).expect("consistent arity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;
    use crate::space::value_table;

    #[test]
    fn recovers_polynomials() {
        for (p, l) in [(5, 1), (3, 2)] {
            let k = Arc::new(Field::new(p, l).unwrap());
            let f = parse_poly("x1^2*x2 + 3*x2^2 + x1 + 1", &k, None).unwrap();
            let (_, vals) = value_table(&f, 1 << 20).unwrap();
            assert_eq!(interpolate(&k, 2, &vals), f);
            let vinv = vandermonde_inverse(&k);
            assert_eq!(interpolated_degree(&k, &vinv, 2, &vals), Some(3));
        }
    }

    #[test]
    fn point_indicator_has_full_degree() {
        let k = Arc::new(Field::prime(7).unwrap());
        let vinv = vandermonde_inverse(&k);
        let mut v = vec![Elem::ZERO; 7];
        v[3] = Elem::ONE;
        assert_eq!(interpolated_degree(&k, &vinv, 1, &v), Some(6));
        assert_eq!(interpolated_degree(&k, &vinv, 1, &[Elem(2); 7]), Some(0));
        assert_eq!(interpolated_degree(&k, &vinv, 1, &[Elem::ZERO; 7]), None);
    }
}
