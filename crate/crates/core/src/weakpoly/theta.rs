//! Characters of the torus `T` and the isotypic decomposition of functions on `X_n`.

use serde::{Deserialize, Serialize};

use crate::field::{Elem, Field, SubgroupDelta};
use crate::linalg;
use crate::polyring::{monomials_up_to, Monomial};
use crate::variety::{GammaElement, TorusElement, VarietyTable, XnSpec};

use super::FnOnX;

/// A character `θ(t) = Π_i Π_j (t_i^j)^{e_i[j]}` of `T`, normalized so that
/// `e_i[0] = 0`; exponents live in `Z/m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character {
    pub m: u32,
    pub exps: Vec<Vec<u32>>,
}

impl Character {
    pub fn trivial(spec: &XnSpec, m: u32) -> Self {
        Character { m, exps: vec![vec![0; spec.d]; spec.n] }
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().flatten().all(|&e| e == 0)
    }

    fn rep(&self, x: i64) -> i32 {
        let m = self.m as i64;
        let r = x.rem_euclid(m);
        // (−m/2, m/2]
        (if 2 * r > m { r - m } else { r }) as i32
    }

    /// `α_{j,j'}(χ_i)`: the exponent of `u ↦ χ_i(u at j, u⁻¹ at j')`.
    pub fn alpha(&self, i: usize, j: usize, j2: usize) -> i32 {
        self.rep(self.exps[i][j] as i64 - self.exps[i][j2] as i64)
    }

    /// All `|α_{j,j'}(χ_i)| ≤ a`.
    pub fn is_admissible(&self, a: u32) -> bool {
        let d = self.exps.first().map_or(0, |e| e.len());
        (0..self.exps.len())
            .all(|i| (0..d).all(|j| (0..d).all(|j2| self.alpha(i, j, j2).unsigned_abs() <= a)))
    }

    /// `α_{j,0}(χ_i) ≥ 0` for every block and position, so the exponents can
    /// be used as monomial degrees.
    pub fn is_positive(&self) -> bool {
        let d = self.exps.first().map_or(0, |e| e.len());
        (0..self.exps.len()).all(|i| (1..d).all(|j| self.alpha(i, j, 0) >= 0))
    }

    /// Nonnegative monomial exponents for a positive character.
    pub fn degrees(&self) -> Vec<Vec<u32>> {
        let d = self.exps.first().map_or(0, |e| e.len());
        (0..self.exps.len()).map(|i| (0..d).map(|j| self.alpha(i, j, 0).max(0) as u32).collect()).collect()
    }

    pub fn eval(&self, field: &Field, delta: &SubgroupDelta, t: &TorusElement) -> Elem {
        let mut acc = 0u64;
        for (es, us) in self.exps.iter().zip(t.blocks()) {
            for (&e, &u) in es.iter().zip(us) {
                acc += e as u64 * delta.log(field, u).expect("torus lies in Δ") as u64;
            }
        }
        field.pow(delta.generator(), acc % self.m as u64)
    }

    /// The character `t ↦ θ(γ t γ⁻¹)` of `f ∘ γ` when `f` transforms by `θ`.
    pub fn conjugate(&self, gamma: &GammaElement) -> Character {
        let m = self.m;
        let exps = self
            .exps
            .iter()
            .zip(gamma.perms())
            .map(|(e, perm)| {
                let mut inv = vec![0; perm.len()];
                for (j, &pj) in perm.iter().enumerate() {
                    inv[pj] = j;
                }
                let shifted: Vec<u32> = (0..e.len()).map(|k| e[inv[k]]).collect();
                let base = shifted[0];
                shifted.iter().map(|&x| (x + m - base) % m).collect()
            })
            .collect();
        Character { m, exps }
    }

    pub fn render(&self) -> String {
        let blocks: Vec<String> = self
            .exps
            .iter()
            .map(|e| e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        format!("[{}]", blocks.join("|"))
    }
}

/// `f = Σ_θ f^θ` with `f^θ(x) = |T|⁻¹ Σ_t θ(t)⁻¹ f(t x)`; only nonzero
/// components are returned, ordered by exponent tuple.
pub fn theta_decompose(
    field: &Field,
    delta: &SubgroupDelta,
    spec: &XnSpec,
    table: &VarietyTable,
    f: &FnOnX,
) -> Vec<(Character, FnOnX)> {
    let m = delta.order() as usize;
    let k = spec.n * (spec.d - 1);
    let size = m.pow(k as u32);
    let torus = TorusElement::all(field, delta, spec);
    let g = delta.generator();
    let omega: Vec<Elem> = {
        let ginv = field.inv(g).expect("unit");
        (0..m).map(|e| field.pow(ginv, e as u64)).collect()
    };
    let scale = field.inv(field.from_i64(size as i64)).expect("|T| is prime to p");
    let mut comps = vec![vec![Elem::ZERO; table.len()]; size];
    let mut buf = vec![Elem::ZERO; size];
    let mut tmp = vec![Elem::ZERO; m];
    for (i, x) in table.points().enumerate() {
        for (s, t) in torus.iter().enumerate() {
            let o = table.ordinal(&t.act(field, &x)).expect("X is T-stable");
            buf[s] = f.values[o];
        }
        // Separable DFT over (Z/m)^k, axis 0 most significant.
        for ax in 0..k {
            let stride = m.pow((k - 1 - ax) as u32);
            let block = stride * m;
            for start in (0..size).step_by(block) {
                for off in 0..stride {
                    for (e, slot) in tmp.iter_mut().enumerate() {
                        *slot = (0..m).fold(Elem::ZERO, |acc, s| {
                            let v = buf[start + off + s * stride];
                            if v.is_zero() {
                                acc
                            } else {
                                field.add(acc, field.mul(omega[(e * s) % m], v))
                            }
                        });
                    }
                    for (e, &c) in tmp.iter().enumerate() {
                        buf[start + off + e * stride] = c;
                    }
                }
            }
        }
        for (e, &v) in buf.iter().enumerate() {
            comps[e][i] = field.mul(scale, v);
        }
    }
    comps
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.iter().any(|v| !v.is_zero()))
        .map(|(mut idx, values)| {
            let mut flat = vec![0u32; k];
            for slot in flat.iter_mut().rev() {
                *slot = (idx % m) as u32;
                idx /= m;
            }
            let exps = flat
                .chunks(spec.d - 1)
                .map(|c| std::iter::once(0).chain(c.iter().copied()).collect())
                .collect::<Vec<Vec<u32>>>();
            let exps = if spec.d == 1 { vec![vec![0]; spec.n] } else { exps };
            (Character { m: m as u32, exps }, FnOnX { values })
        })
        .collect()
}

/// Dimension of the space of polynomials of degree ≤ `deg` on `k^nvars`
/// vanishing on `Δ^nvars`.
pub fn delta_kernel_dim(field: &Field, delta: &SubgroupDelta, nvars: usize, deg: u32) -> usize {
    let monos: Vec<Monomial> = monomials_up_to(nvars, deg, false)
        .into_iter()
        .filter(|mo| mo.exponents().iter().all(|&e| (e as u32) < field.q()))
        .collect();
    let pts = delta.elements();
    let total = pts.len().pow(nvars as u32);
    let rows: Vec<Vec<Elem>> = (0..total)
        .map(|mut idx| {
            let mut v = vec![Elem::ZERO; nvars];
            for slot in v.iter_mut().rev() {
                *slot = pts[idx % pts.len()];
                idx /= pts.len();
            }
            monos.iter().map(|mo| mo.eval(field, &v)).collect()
        })
        .collect();
    monos.len() - linalg::rank(field, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::variety::build_xn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn random_function_resums() {
        let k = Arc::new(Field::prime(7).unwrap());
        let delta = SubgroupDelta::find(&k, 6).unwrap();
        let xn = build_xn(&k, 2, 2, 1 << 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = FnOnX { values: (0..xn.table.len()).map(|_| Elem(rng.gen_range(0..7))).collect() };
        let comps = theta_decompose(&k, &delta, &xn.spec, &xn.table, &f);
        let mut sum = vec![Elem::ZERO; f.len()];
        let torus = TorusElement::all(&k, &delta, &xn.spec);
        for (theta, c) in &comps {
            for (s, &v) in sum.iter_mut().zip(&c.values) {
                *s = k.add(*s, v);
            }
            // Equivariance on a sample of points and torus elements.
            for (i, x) in xn.table.points().enumerate().step_by(37) {
                for t in torus.iter().step_by(5) {
                    let o = xn.table.ordinal(&t.act(&k, &x)).unwrap();
                    assert_eq!(c.values[o], k.mul(theta.eval(&k, &delta, t), c.values[i]));
                }
            }
            // Idempotence: projecting a component returns it alone.
            let again = theta_decompose(&k, &delta, &xn.spec, &xn.table, c);
            assert_eq!(again.len(), 1);
            assert_eq!(&again[0].0, theta);
        }
        assert_eq!(sum, f.values);
    }

    #[test]
    fn invariant_function_is_trivial_component() {
        let k = Arc::new(Field::prime(7).unwrap());
        let delta = SubgroupDelta::find(&k, 6).unwrap();
        let xn = build_xn(&k, 2, 2, 1 << 20).unwrap();
        // Functions of ν are T-invariant.
        let f = FnOnX::from_fn(&xn.table, |v| k.mul(v[0], v[1]));
        let comps = theta_decompose(&k, &delta, &xn.spec, &xn.table, &f);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].0.is_trivial());
    }

    #[test]
    fn alpha_conventions() {
        let c = Character { m: 6, exps: vec![vec![0, 3], vec![0, 5]] };
        assert_eq!(c.alpha(0, 1, 0), 3);
        assert_eq!(c.alpha(0, 0, 1), 3);
        assert_eq!(c.alpha(1, 1, 0), -1);
        assert!(!c.is_admissible(2));
        let g = GammaElement::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let c2 = c.conjugate(&g);
        assert_eq!(c2.exps, vec![vec![0, 3], vec![0, 1]]);
        assert!(c2.is_positive());
    }

    #[test]
    fn low_degree_polys_do_not_vanish_on_delta_grid() {
        let k = Field::prime(7).unwrap();
        let delta = SubgroupDelta::find(&k, 6).unwrap();
        for n in 1..=3 {
            assert_eq!(delta_kernel_dim(&k, &delta, n, 4), 0);
        }
        // x^3 - 1 vanishes on the cube roots of unity.
        let d3 = SubgroupDelta::find(&k, 3).unwrap();
        assert_eq!(delta_kernel_dim(&k, &d3, 1, 3), 1);
    }
}
