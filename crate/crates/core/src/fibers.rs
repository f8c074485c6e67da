//! The pullback map `κ_P: w ↦ P ∘ w` from affine maps `k^m → k^n` to
//! polynomials on `k^m`: coefficient maps, fibers, surjectivity and counts
//! over extension fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cyclo::CycloSum;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::polyring::{monomials_up_to, AffineMap, CompiledPoly, Monomial, Poly, PolyCollection};
use crate::space::PointSpace;

/// `c^s_λ(w)` for every `s` and `λ ∈ Λ_s`. The entry `(i, j)` of `w` is
/// variable `i(m+1) + j`; `j = m` is the translation.
#[derive(Clone, Debug)]
pub struct CoefficientMap {
    pub m: usize,
    pub n: usize,
    /// `Λ_s` in descending graded-lex order.
    pub lambdas: Vec<Vec<Monomial>>,
    pub coeffs: Vec<Vec<Poly>>,
}

impl CoefficientMap {
    pub fn field(&self) -> &Arc<Field> {
        self.coeffs[0][0].field()
    }

    pub fn wvars(&self) -> usize {
        self.n * (self.m + 1)
    }

    /// `Σ_s |Λ_s|`.
    pub fn width(&self) -> usize {
        self.lambdas.iter().map(|l| l.len()).sum()
    }

    /// `n(m+1) − Σ_s |Λ_s|`.
    pub fn expected_dim(&self) -> i64 {
        self.wvars() as i64 - self.width() as i64
    }

    pub fn flat_coeffs(&self) -> Vec<&Poly> {
        self.coeffs.iter().flatten().collect()
    }

    pub fn compiled(&self) -> Vec<CompiledPoly> {
        self.coeffs.iter().flatten().map(|c| c.compile()).collect()
    }

    /// Coefficients of a target tuple against `Λ`, in the same order.
    pub fn target_vector(&self, target: &[Poly]) -> Result<Vec<Elem>> {
        if target.len() != self.lambdas.len() {
            return Err(Error::DimensionMismatch { expected: self.lambdas.len(), got: target.len() });
        }
        let mut out = Vec::with_capacity(self.width());
        for (q, lam) in target.iter().zip(&self.lambdas) {
            if q.nvars() != self.m {
                return Err(Error::DimensionMismatch { expected: self.m, got: q.nvars() });
            }
            let d = lam.first().map_or(0, |l| l.degree());
            out.extend(q.coeff_vector(lam).ok_or(Error::DegreeExceeded { degree: q.degree(), bound: d })?);
        }
        Ok(out)
    }

    /// The target tuple with the given coefficient vector.
    pub fn target_polys(&self, vec: &[Elem]) -> Vec<Poly> {
        let field = self.field();
        let mut at = 0;
        self.lambdas
            .iter()
            .map(|lam| {
                let p = Poly::from_coeffs(field, self.m, lam, &vec[at..at + lam.len()]);
                at += lam.len();
                p
            })
            .collect()
    }

    pub fn affine_map(&self, w: &[Elem]) -> AffineMap {
        let m = self.m;
        let matrix = (0..self.n).map(|i| w[i * (m + 1)..i * (m + 1) + m].to_vec()).collect();
        let translation = (0..self.n).map(|i| w[i * (m + 1) + m]).collect();
        AffineMap::with_source(matrix, translation, m).expect("shapes agree")
    }

    pub fn map_field(&self, big: &Arc<Field>, embed: impl Fn(Elem) -> Elem + Copy) -> CoefficientMap {
        CoefficientMap {
            m: self.m,
            n: self.n,
            lambdas: self.lambdas.clone(),
            coeffs: self.coeffs.iter().map(|cs| cs.iter().map(|c| c.map_field(big, embed)).collect()).collect(),
        }
    }
}

pub fn coefficient_map(coll: &PolyCollection, m: usize, limit: u128) -> Result<CoefficientMap> {
    let field = coll.field().clone();
    let n = coll.nvars();
    let nw = n * (m + 1);
    let total = nw + m;
    let mut lambdas = Vec::new();
    let mut coeffs = Vec::new();
    for p in coll.polys() {
        let d = p.degree();
        // Terms of P(w(x)) are bounded by terms(P) · C(n(m+1)+d, d).
        let mut est: u128 = p.num_terms() as u128;
        for i in 0..d as u128 {
            est = est * (nw as u128 + m as u128 + 1 + i) / (i + 1);
        }
        if est > limit {
            return Err(Error::BudgetExceeded { what: "symbolic coefficient map", needed: est, limit });
        }
        let images: Vec<Poly> = (0..n)
            .map(|i| {
                let mut y = Poly::var(&field, total, i * (m + 1) + m);
                for j in 0..m {
                    y = y.add(&Poly::var(&field, total, i * (m + 1) + j).mul(&Poly::var(&field, total, nw + j)));
                }
                y
            })
            .collect();
        let expanded = p.substitute(&images)?;
        let mut lam = monomials_up_to(m, d, false);
        lam.reverse();
        let mut cs: Vec<Vec<(Monomial, Elem)>> = vec![Vec::new(); lam.len()];
        for (mono, &c) in expanded.terms() {
            let e = mono.exponents();
            let xpart = Monomial::from_exponents(e[nw..].to_vec());
            let slot = lam.iter().position(|l| *l == xpart).expect("degree ≤ d");
            cs[slot].push((Monomial::from_exponents(e[..nw].to_vec()), c));
        }
        coeffs.push(cs.into_iter().map(|t| Poly::from_terms(&field, nw, t).expect("arity")).collect());
        lambdas.push(lam);
    }
    Ok(CoefficientMap { m, n, lambdas, coeffs })
}

#[derive(Clone, Debug)]
pub enum Strategy {
    Exhaustive { max_witnesses: usize },
    Random { draws: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct FiberReport {
    pub target: Vec<Poly>,
    pub mode: &'static str,
    pub seed: Option<u64>,
    pub count_k: Option<u128>,
    pub count_k2: Option<u128>,
    pub slope: Option<f64>,
    pub expected_dim: i64,
    pub witnesses: Vec<AffineMap>,
    pub truncated: bool,
    /// Random mode: draws, hits, empirical rate and `q^{-|Λ|}`.
    pub sampling: Option<(u64, u64, f64, f64)>,
}

impl FiberReport {
    pub fn to_json(&self) -> Value {
        let field = self.target.first().map(|p| p.field().clone());
        let maps: Vec<Value> = self
            .witnesses
            .iter()
            .map(|w| {
                let f = field.as_ref().unwrap();
                let row = |r: &[Elem]| r.iter().map(|&e| crate::polyring::render_elem(f, e)).collect::<Vec<_>>();
                json!({
                    "matrix": w.matrix().iter().map(|r| row(r)).collect::<Vec<_>>(),
                    "translation": row(w.translation()),
                })
            })
            .collect();
        let mut v = json!({
            "target": self.target.iter().map(|p| p.render()).collect::<Vec<_>>(),
            "count_k": self.count_k.map(|c| c.to_string()),
            "count_k2": self.count_k2.map(|c| c.to_string()),
            "slope": self.slope,
            "expected_dim": self.expected_dim,
            "witnesses": maps,
            "truncated": self.truncated,
            "mode": self.mode,
            "seed": self.seed,
        });
        if let Some((draws, hits, rate, heuristic)) = self.sampling {
            v["sampling"] = json!({"draws": draws, "hits": hits, "rate": rate, "heuristic": heuristic});
        }
        v
    }
}

fn eval_all(cs: &[CompiledPoly], w: &[Elem], out: &mut [Elem]) {
    for (o, c) in out.iter_mut().zip(cs) {
        *o = c.eval(w);
    }
}

/// Solutions of `w*(P̄) = Q̄` by enumeration of `k^{n(m+1)}` or by i.i.d. sampling.
pub fn solve_fiber(cmap: &CoefficientMap, target: &[Poly], strategy: &Strategy, limit: u128) -> Result<FiberReport> {
    let field = cmap.field().clone();
    let b = cmap.target_vector(target)?;
    let nw = cmap.wvars();
    let space = PointSpace::new(field.q(), nw)?;
    let cs = cmap.compiled();
    let mut report = FiberReport {
        target: target.to_vec(),
        mode: "exhaustive",
        seed: None,
        count_k: None,
        count_k2: None,
        slope: None,
        expected_dim: cmap.expected_dim(),
        witnesses: Vec::new(),
        truncated: false,
        sampling: None,
    };
    match *strategy {
        Strategy::Exhaustive { max_witnesses } => {
            space.check_budget("fiber enumeration", limit)?;
            let size = space.size();
            let chunk = 1u64 << 14;
            let parts: Vec<(u128, Vec<u64>)> = (0..size.div_ceil(chunk))
                .into_par_iter()
                .map(|c| {
                    let mut count = 0u128;
                    let mut wit = Vec::new();
                    let mut vals = vec![Elem::ZERO; cs.len()];
                    space.for_each_in(c * chunk..((c + 1) * chunk).min(size), |code, w| {
                        eval_all(&cs, w, &mut vals);
                        if vals == b {
                            count += 1;
                            if wit.len() < max_witnesses {
                                wit.push(code);
                            }
                        }
                    });
                    (count, wit)
                })
                .collect();
            let count: u128 = parts.iter().map(|p| p.0).sum();
            let wit: Vec<u64> = parts.into_iter().flat_map(|p| p.1).take(max_witnesses).collect();
            report.truncated = count > wit.len() as u128;
            report.witnesses = wit.into_iter().map(|c| cmap.affine_map(&space.decode(c))).collect();
            report.count_k = Some(count);
        }
        Strategy::Random { draws, seed } => {
            if draws as u128 > limit {
                return Err(Error::BudgetExceeded { what: "fiber sampling", needed: draws as u128, limit });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = vec![Elem::ZERO; nw];
            let mut vals = vec![Elem::ZERO; cs.len()];
            let mut hits = 0;
            for _ in 0..draws {
                for x in w.iter_mut() {
                    *x = Elem(rng.gen_range(0..field.q()));
                }
                eval_all(&cs, &w, &mut vals);
                if vals == b {
                    hits += 1;
                    if report.witnesses.len() < 16 {
                        report.witnesses.push(cmap.affine_map(&w));
                    }
                }
            }
            report.mode = "random";
            report.seed = Some(seed);
            report.truncated = hits > report.witnesses.len() as u64;
            let rate = hits as f64 / draws.max(1) as f64;
            let heuristic = (field.q() as f64).powi(-(cmap.width() as i32));
            report.sampling = Some((draws, hits, rate, heuristic));
        }
    }
    Ok(report)
}

/// Number of `w` with `c(w) = t` for every `t ∈ k^{|Λ|}`, indexed by the
/// base-`q` code of `t` (first coefficient most significant).
#[derive(Clone, Debug)]
pub struct ImageHistogram {
    pub space: PointSpace,
    pub counts: Vec<u128>,
}

impl ImageHistogram {
    pub fn count(&self, t: &[Elem]) -> u128 {
        self.counts[self.space.encode(t) as usize]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }
}

/// Split the variables of `P̄` into classes joined by shared monomials.
fn components(coll: &PolyCollection) -> Vec<Vec<usize>> {
    let n = coll.nvars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut used = vec![false; n];
    for p in coll.polys() {
        for (mono, _) in p.terms() {
            let vs: Vec<usize> = mono.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect();
            for &v in &vs {
                used[v] = true;
            }
            for w in vs.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for v in 0..n {
        if !used[v] {
            continue;
        }
        let r = find(&mut parent, v);
        if root_of[r] == usize::MAX {
            root_of[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[root_of[r]].push(v);
    }
    classes
}

fn direct_histogram(cmap: &CoefficientMap, out: &PointSpace, limit: u128) -> Result<Vec<u128>> {
    let field = cmap.field();
    let space = PointSpace::new(field.q(), cmap.wvars())?;
    space.check_budget("fiber histogram", limit)?;
    let cs = cmap.compiled();
    let size = space.size();
    let chunk = 1u64 << 14;
    let buckets = out.size() as usize;
    Ok((0..size.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u128; buckets];
            let mut vals = vec![Elem::ZERO; cs.len()];
            space.for_each_in(c * chunk..((c + 1) * chunk).min(size), |_, w| {
                eval_all(&cs, w, &mut vals);
                h[out.encode(&vals) as usize] += 1;
            });
            h
        })
        .reduce(
            || vec![0u128; buckets],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        ))
}

fn convolve(field: &Field, space: &PointSpace, a: &[u128], b: &[u128]) -> Vec<u128> {
    let nz_b: Vec<(u64, u128)> = b.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u64, c)).collect();
    (0..a.len())
        .into_par_iter()
        .filter(|&i| a[i] > 0)
        .fold(
            || vec![0u128; a.len()],
            |mut acc, i| {
                for &(j, c) in &nz_b {
                    acc[space.add(field, i as u64, j) as usize] += a[i] * c;
                }
                acc
            },
        )
        .reduce(
            || vec![0u128; a.len()],
            |mut x, y| {
                for (s, t) in x.iter_mut().zip(y) {
                    *s += t;
                }
                x
            },
        )
}

/// The full image histogram of `w ↦ c(w)`. Variable-disjoint pieces of `P̄`
/// are enumerated separately and their histograms convolved.
pub fn image_histogram(coll: &PolyCollection, m: usize, limit: u128) -> Result<ImageHistogram> {
    let field = coll.field().clone();
    let full = coefficient_map(coll, m, limit)?;
    let out = PointSpace::new(field.q(), full.width())?;
    out.check_budget("image histogram", limit)?;
    let classes = components(coll);
    let free = coll.nvars() - classes.iter().map(|c| c.len()).sum::<usize>();
    let mut hist: Option<Vec<u128>> = None;
    for class in &classes {
        let map: Vec<Option<usize>> = {
            let mut v = vec![None; coll.nvars()];
            for (k, &i) in class.iter().enumerate() {
                v[i] = Some(k);
            }
            v
        };
        let polys: Vec<Poly> = coll
            .polys()
            .iter()
            .map(|p| {
                let terms = p.terms().filter(|(mono, _)| {
                    mono.exponents().iter().enumerate().any(|(i, &e)| e > 0 && map[i].is_some())
                });
                let terms: Vec<(Monomial, Elem)> = terms
                    .map(|(mono, &c)| {
                        let mut e = vec![0u16; class.len()];
                        for (i, &x) in mono.exponents().iter().enumerate() {
                            if x > 0 {
                                e[map[i].unwrap()] = x;
                            }
                        }
                        (Monomial::from_exponents(e), c)
                    })
                    .collect();
                Poly::from_terms(&field, class.len(), terms).expect("arity")
            })
            .collect();
        let sub = CoefficientMap {
            m,
            n: class.len(),
            lambdas: full.lambdas.clone(),
            coeffs: {
                let c = PolyCollection::new(polys.clone())?;
                let mut cm = coefficient_map(&c, m, limit)?;
                // Sub-polynomials can have lower degree; re-index onto the full Λ.
                for (s, lam) in full.lambdas.iter().enumerate() {
                    let old = std::mem::take(&mut cm.coeffs[s]);
                    let old_l = &cm.lambdas[s];
                    cm.coeffs[s] = lam
                        .iter()
                        .map(|l| match old_l.iter().position(|x| x == l) {
                            Some(k) => old[k].clone(),
                            None => Poly::zero(&field, class.len() * (m + 1)),
                        })
                        .collect();
                }
                cm.coeffs
            },
        };
        let h = direct_histogram(&sub, &out, limit)?;
        hist = Some(match hist {
            None => h,
            Some(prev) => convolve(&field, &out, &prev, &h),
        });
    }
    let mut counts = hist.unwrap_or_else(|| {
        let mut h = vec![0u128; out.size() as usize];
        h[0] = 1;
        h
    });
    let factor = (field.q() as u128).pow((free * (m + 1)) as u32);
    for c in counts.iter_mut() {
        *c *= factor;
    }
    // Constant terms of P̄ shift every image.
    let shift: Vec<Elem> = coll
        .polys()
        .iter()
        .zip(&full.lambdas)
        .flat_map(|(p, lam)| lam.iter().map(move |l| if l.degree() == 0 { p.constant_term() } else { Elem::ZERO }))
        .collect();
    if shift.iter().any(|s| !s.is_zero()) {
        let sc = out.encode(&shift);
        let mut shifted = vec![0u128; counts.len()];
        for (i, &c) in counts.iter().enumerate() {
            shifted[out.add(&field, i as u64, sc) as usize] = c;
        }
        counts = shifted;
    }
    Ok(ImageHistogram { space: out, counts })
}

/// Targets with empty fiber, in lexicographic order of coefficient vectors
/// (highest monomial first).
pub fn surjectivity_scan(coll: &PolyCollection, m: usize, limit: u128) -> Result<Vec<Vec<Poly>>> {
    let hist = image_histogram(coll, m, limit)?;
    let cmap = coefficient_map(coll, m, limit)?;
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(code, _)| cmap.target_polys(&hist.space.decode(code as u64)))
        .collect())
}

#[derive(Clone, Debug)]
pub struct FiberDimension {
    pub counts: Vec<u128>,
    pub log_counts: Vec<f64>,
    pub slope: f64,
    pub expected: i64,
    pub flagged: bool,
}

/// Fiber sizes over `k_1, …, k_{l_max}` and the slope of `log_q` count per level.
pub fn fiber_dimension(coll: &PolyCollection, target: &[Poly], m: usize, l_max: u32, limit: u128) -> Result<FiberDimension> {
    let field = coll.field().clone();
    let q = field.q() as f64;
    let mut counts = Vec::new();
    let mut expected = 0;
    for l in 1..=l_max {
        let big = Arc::new(field.extension(l)?);
        let emb = field.embedding_into(&big)?;
        let e = |x: Elem| emb.apply(x);
        let up = PolyCollection::new(coll.polys().iter().map(|p| p.map_field(&big, e)).collect())?;
        let tgt: Vec<Poly> = target.iter().map(|p| p.map_field(&big, e)).collect();
        let cmap = coefficient_map(&up, m, limit)?;
        expected = cmap.expected_dim();
        let hist = image_histogram(&up, m, limit)?;
        let c = hist.count(&cmap.target_vector(&tgt)?);
        if c == 0 {
            return Err(Error::EmptyFiber { level: l });
        }
        counts.push(c);
    }
    let log_counts: Vec<f64> = counts.iter().map(|&c| (c as f64).ln() / q.ln()).collect();
    let slope = match log_counts.len() {
        0 => 0.0,
        1 => log_counts[0],
        k => log_counts[k - 1] - log_counts[k - 2],
    };
    Ok(FiberDimension { counts, log_counts, slope, expected, flagged: (slope - expected as f64).abs() > 0.2 })
}

/// `q^{|Λ|} · #fiber` as `Σ_α Σ_w e_q(Σ_λ α_λ (c_λ(w) − b_λ))`, summed exactly.
pub fn counting_identity(cmap: &CoefficientMap, target: &[Poly], limit: u128) -> Result<i128> {
    let field = cmap.field().clone();
    let b = cmap.target_vector(target)?;
    let ws = PointSpace::new(field.q(), cmap.wvars())?;
    let al = PointSpace::new(field.q(), cmap.width())?;
    let work = ws.size() as u128 * al.size() as u128;
    if work > limit {
        return Err(Error::BudgetExceeded { what: "counting identity", needed: work, limit });
    }
    let cs = cmap.compiled();
    let mut diffs = Vec::with_capacity(ws.size() as usize);
    let mut vals = vec![Elem::ZERO; cs.len()];
    ws.for_each(|_, w| {
        eval_all(&cs, w, &mut vals);
        diffs.push(vals.iter().zip(&b).map(|(&c, &t)| field.sub(c, t)).collect::<Vec<_>>());
    });
    let total = (0..al.size())
        .into_par_iter()
        .map(|code| {
            let alpha = al.decode(code);
            let mut s = CycloSum::new(field.p());
            for d in &diffs {
                let y = alpha.iter().zip(d).fold(Elem::ZERO, |acc, (&a, &x)| field.add(acc, field.mul(a, x)));
                s.push(&field, y);
            }
            s
        })
        .reduce(|| CycloSum::new(field.p()), |a, b| a.merged(&b));
    total.as_integer().ok_or(Error::Undecidable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    const LIMIT: u128 = 1 << 32;

    fn coll(s: &str, k: &Arc<Field>, n: usize) -> PolyCollection {
        PolyCollection::single(parse_poly(s, k, Some(n)).unwrap())
    }

    #[test]
    fn hand_expansion_of_x1x2() {
        let k = Arc::new(Field::prime(7).unwrap());
        let c = coefficient_map(&coll("x1*x2", &k, 2), 1, LIMIT).unwrap();
        // w = (αx+β, γx+δ) with α, β, γ, δ = w1..w4.
        let r: Vec<String> = c.coeffs[0].iter().map(|p| p.render()).collect();
        assert_eq!(r, vec!["x1*x3", "x1*x4 + x2*x3", "x2*x4"]);
        let lin = coefficient_map(&coll("x1", &k, 1), 1, LIMIT).unwrap();
        assert_eq!(lin.coeffs[0].iter().map(|p| p.render()).collect::<Vec<_>>(), vec!["x1", "x2"]);
    }

    #[test]
    fn identity_on_random_maps() {
        let k = Arc::new(Field::prime(5).unwrap());
        let p = parse_poly("x1*x2*x3 + 2*x3^2 + x1 + 4", &k, None).unwrap();
        let c = coefficient_map(&PolyCollection::single(p.clone()), 2, LIMIT).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w: Vec<Elem> = (0..c.wvars()).map(|_| Elem(rng.gen_range(0..5))).collect();
            let x: Vec<Elem> = (0..2).map(|_| Elem(rng.gen_range(0..5))).collect();
            let phi = c.affine_map(&w);
            let direct = p.eval(&phi.apply(&k, &x).unwrap()).unwrap();
            let via = c.coeffs[0].iter().zip(&c.lambdas[0]).fold(Elem::ZERO, |acc, (cl, l)| {
                k.add(acc, k.mul(cl.eval(&w).unwrap(), l.eval(&k, &x)))
            });
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn histogram_matches_direct_enumeration() {
        let k = Arc::new(Field::prime(3).unwrap());
        for s in ["x1*x2 + x3*x4 + 1", "x1*x2 + x3", "x2^2 + 2*x1"] {
            let c = coll(s, &k, 4);
            let h = image_histogram(&c, 1, LIMIT).unwrap();
            let cmap = coefficient_map(&c, 1, LIMIT).unwrap();
            let direct = direct_histogram(&cmap, &h.space, LIMIT).unwrap();
            assert_eq!(h.counts, direct, "{s}");
            assert_eq!(h.total(), 3u128.pow(8));
        }
    }

    #[test]
    fn planted_solution_is_found() {
        let k = Arc::new(Field::prime(5).unwrap());
        let c = coll("x1*x2 + 3*x2^2", &k, 2);
        let cmap = coefficient_map(&c, 1, LIMIT).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w: Vec<Elem> = (0..cmap.wvars()).map(|_| Elem(rng.gen_range(0..5))).collect();
            let phi = cmap.affine_map(&w);
            let target = vec![c.polys()[0].compose_affine(&phi).unwrap()];
            let r = solve_fiber(&cmap, &target, &Strategy::Exhaustive { max_witnesses: usize::MAX }, LIMIT).unwrap();
            assert!(r.witnesses.contains(&phi));
            assert!(r.witnesses.iter().all(|w| c.polys()[0].compose_affine(w).unwrap() == target[0]));
            assert_eq!(r.count_k.unwrap() as usize, r.witnesses.len());
            assert_eq!(counting_identity(&cmap, &target, LIMIT).unwrap(), 125 * r.count_k.unwrap() as i128);
        }
    }

    #[test]
    fn linear_fiber_and_scan() {
        let k = Arc::new(Field::prime(7).unwrap());
        let c = coll("x1", &k, 3);
        assert!(surjectivity_scan(&c, 1, LIMIT).unwrap().is_empty());
        let zero = vec![Poly::zero(&k, 1)];
        let fd = fiber_dimension(&c, &zero, 1, 2, LIMIT).unwrap();
        assert_eq!(fd.counts, vec![7u128.pow(4), 49u128.pow(4)]);
        assert_eq!(fd.expected, 4);
        assert!(!fd.flagged);
        let rank1 = surjectivity_scan(&coll("x1*x2", &k, 2), 1, LIMIT).unwrap();
        // x^2 - 3 is irreducible over F_7.
        assert!(rank1.iter().any(|t| t[0].render() == "x1^2 + 4"));
    }
}
