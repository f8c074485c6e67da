//! The property battery behind the `suite` command, run on `X_2` for the
//! session's field, degree and `a`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SessionConfig;
use crate::error::{Error, Result};
use crate::fibers::{coefficient_map, solve_fiber, Strategy};
use crate::field::{Elem, SubgroupDelta};
use crate::polyring::{Poly, PolyCollection};
use crate::variety::{build_xn, kappa, GammaElement, TorusElement, Xn};
use crate::weakpoly::{
    delta_kernel_dim, extend_by_solver, extend_inductive, extend_on_xn, interp, spaces, theta_decompose, Character,
    FnOnX, XnContext,
};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub secs: f64,
}

struct Env {
    xn: Xn,
    delta: SubgroupDelta,
    a: u32,
    limit: u128,
    seed: u64,
}

type Check = fn(&Env) -> Result<(bool, String)>;

fn group_laws(env: &Env) -> Result<(bool, String)> {
    let field = env.xn.table.field();
    let spec = env.xn.spec;
    let torus = TorusElement::all(field, &env.delta, &spec);
    let gammas = GammaElement::all(&spec);
    let t_id = TorusElement::identity(&spec);
    let g_id = GammaElement::identity(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed);
    let mut checked = 0;
    for _ in 0..200 {
        let x = env.xn.table.point(rng.gen_range(0..env.xn.table.len()));
        let t = &torus[rng.gen_range(0..torus.len())];
        let s = &torus[rng.gen_range(0..torus.len())];
        let g = &gammas[rng.gen_range(0..gammas.len())];
        let h = &gammas[rng.gen_range(0..gammas.len())];
        let tx = t.act(field, &x);
        let gx = g.act(&x);
        let ok = env.xn.table.contains(&tx)
            && env.xn.table.contains(&gx)
            && t.compose(field, s).act(field, &x) == t.act(field, &s.act(field, &x))
            && g.compose(h).act(&x) == g.act(&h.act(&x))
            && t.inverse(field).act(field, &tx) == x
            && g.inverse().act(&gx) == x
            && t_id.act(field, &x) == x
            && g_id.act(&x) == x;
        // γ t γ⁻¹ is the torus element with coordinates permuted by γ.
        let conj = TorusElement::new(field, &env.delta, t.blocks().iter().zip(g.perms()).map(|(b, p)| p.iter().map(|&j| b[j]).collect()).collect())?;
        let ok = ok && g.act(&t.act(field, &g.inverse().act(&x))) == conj.act(field, &x);
        if !ok {
            return Ok((false, format!("law fails at {:?}", x.iter().map(|e| e.0).collect::<Vec<_>>())));
        }
        checked += 1;
    }
    Ok((true, format!("{checked} random (x, t, s, γ, η) tuples, |T| = {}, |Γ| = {}", torus.len(), gammas.len())))
}

fn theta_resum(env: &Env) -> Result<(bool, String)> {
    let field = env.xn.table.field();
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ 0x7e7a);
    let f = FnOnX { values: (0..env.xn.table.len()).map(|_| Elem(rng.gen_range(0..field.q()))).collect() };
    let comps = theta_decompose(field, &env.delta, &env.xn.spec, &env.xn.table, &f);
    let mut sum = vec![Elem::ZERO; f.len()];
    for (theta, c) in &comps {
        for (s, &v) in sum.iter_mut().zip(&c.values) {
            *s = field.add(*s, v);
        }
        let again = theta_decompose(field, &env.delta, &env.xn.spec, &env.xn.table, c);
        if again.len() != 1 || &again[0].0 != theta {
            return Ok((false, format!("projection onto {} is not idempotent", theta.render())));
        }
    }
    Ok((sum == f.values, format!("{} nonzero components of a random function", comps.len())))
}

fn delta_kernel(env: &Env) -> Result<(bool, String)> {
    let field = env.xn.table.field();
    let deg = env.a * env.xn.spec.d as u32;
    let dims: Vec<usize> = (1..=3).map(|n| delta_kernel_dim(field, &env.delta, n, deg)).collect();
    Ok((dims.iter().all(|&k| k == 0), format!("kernel dims for N = 1..3, deg ≤ {deg}: {dims:?}")))
}

fn positive_chamber(env: &Env) -> Result<(bool, String)> {
    let spec = env.xn.spec;
    let m = env.delta.order();
    let k = spec.n * (spec.d - 1);
    let gammas = GammaElement::all(&spec);
    let (mut admissible, mut moved) = (0, 0);
    for mut idx in 0..(m as usize).pow(k as u32) {
        let mut flat = vec![0u32; k];
        for slot in flat.iter_mut().rev() {
            *slot = (idx % m as usize) as u32;
            idx /= m as usize;
        }
        let exps = flat.chunks(spec.d - 1).map(|c| std::iter::once(0).chain(c.iter().copied()).collect()).collect();
        let theta = Character { m, exps };
        if !theta.is_admissible(env.a) {
            continue;
        }
        admissible += 1;
        if gammas.iter().any(|g| theta.conjugate(g).is_positive()) {
            moved += 1;
        }
    }
    Ok((admissible == moved, format!("{moved}/{admissible} admissible characters reach the positive chamber")))
}

fn weak_basis(env: &Env) -> Result<(Vec<FnOnX>, usize, usize)> {
    let sp = spaces(&env.xn.table, env.a, env.limit)?;
    Ok((sp.weak_basis.into_iter().map(|values| FnOnX { values }).collect(), sp.weak_dim, sp.restriction_dim))
}

fn spaces_equal(env: &Env) -> Result<(bool, String)> {
    let (_, w, r) = weak_basis(env)?;
    Ok((w == r, format!("dim P_a^w = {w}, dim P_a = {r}")))
}

fn h_gamma_degree(env: &Env) -> Result<(bool, String)> {
    let field = env.xn.table.field();
    let spec = env.xn.spec;
    let (basis, _, _) = weak_basis(env)?;
    let vinv = interp::vandermonde_inverse(field);
    let n = spec.n;
    let q = field.q() as usize;
    let mut worst = 0;
    for f in &basis {
        for g in GammaElement::all(&spec) {
            let mut vals = Vec::with_capacity(q.pow(n as u32 - 1));
            let mut c = vec![Elem::ZERO; n];
            for mut idx in 0..q.pow(n as u32 - 1) {
                for slot in c[..n - 1].iter_mut().rev() {
                    *slot = Elem((idx % q) as u32);
                    idx /= q;
                }
                c[n - 1] = field.neg(c[..n - 1].iter().fold(Elem::ZERO, |s, &x| field.add(s, x)));
                let v = g.act(&kappa(field, &spec, &c)?);
                vals.push(f.values[env.xn.table.ordinal(&v).expect("γκ(L) ⊂ X")]);
            }
            worst = worst.max(interp::interpolated_degree(field, &vinv, n - 1, &vals).unwrap_or(0));
        }
    }
    Ok((worst <= env.a, format!("max deg h_γ over {} basis functions and all γ: {worst}", basis.len())))
}

fn engines_agree(env: &Env) -> Result<(bool, String)> {
    let table = &env.xn.table;
    let field = table.field();
    let spec = env.xn.spec;
    let (basis, _, _) = weak_basis(env)?;
    let ctx = XnContext::new(spec, table, env.delta.order(), env.a)?;
    let flag: Vec<Poly> = (0..spec.n).map(|i| Poly::var(field, spec.nvars(), spec.var(i, 0))).collect();
    let w0 = table.restrict(&flag);
    let mut agree = 0;
    for f in &basis {
        let by_solver = extend_by_solver(table, f, env.a, env.limit)?;
        let Some(ps) = by_solver.poly() else {
            return Ok((false, "solver found no extension of a weak basis function".into()));
        };
        let pc = extend_on_xn(&ctx, f, env.a, env.limit)?;
        let base = extend_by_solver(&w0, &f.restrict(table, &w0), env.a, env.limit)?;
        let base = base.poly().ok_or_else(|| Error::Invalid("base has no extension".into()))?.clone();
        let pi = extend_inductive(table, f, env.a, &flag, &base, env.limit)?;
        let ok = [Some(ps), pc.poly(), pi.poly()].iter().all(|p| p.is_some_and(|p| f.matches(table, p)));
        if !ok {
            return Ok((false, format!("engines disagree on basis function {agree}")));
        }
        agree += 1;
    }
    Ok((true, format!("solver, constructive and inductive agree on all {agree} basis functions")))
}

fn planted_fibers(env: &Env) -> Result<(bool, String)> {
    let field = env.xn.table.field();
    let coll = PolyCollection::single(env.xn.poly.clone());
    let cmap = coefficient_map(&coll, 1, env.limit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed ^ 0xf1be);
    for trial in 0..3 {
        let w: Vec<Elem> = (0..cmap.wvars()).map(|_| Elem(rng.gen_range(0..field.q()))).collect();
        let phi = cmap.affine_map(&w);
        let target = vec![env.xn.poly.compose_affine(&phi)?];
        let r = solve_fiber(&cmap, &target, &Strategy::Exhaustive { max_witnesses: usize::MAX }, env.limit)?;
        if !r.witnesses.contains(&phi) || r.witnesses.iter().any(|s| env.xn.poly.compose_affine(s).ok().as_ref() != Some(&target[0])) {
            return Ok((false, format!("trial {trial}: planted map missing or bad witness")));
        }
    }
    Ok((true, "3 planted maps recovered by exhaustive search".into()))
}

const CHECKS: &[(&str, Check)] = &[
    ("group action laws", group_laws),
    ("theta re-summation", theta_resum),
    ("delta-grid kernel", delta_kernel),
    ("positive chamber", positive_chamber),
    ("weak = restriction dims", spaces_equal),
    ("h_gamma degree", h_gamma_degree),
    ("engine agreement", engines_agree),
    ("planted fibers", planted_fibers),
];

/// Runs every check; an error inside a check is reported as a failing line.
pub fn run_suite(cfg: &SessionConfig) -> Result<Vec<SuiteLine>> {
    cfg.check_admissible()?;
    let field = cfg.field()?;
    let m = cfg.m().expect("checked above");
    let env = Env {
        xn: build_xn(&field, 2, cfg.d as usize, cfg.max_enum)?,
        delta: SubgroupDelta::find(&field, m)?,
        a: cfg.a,
        limit: cfg.max_enum,
        seed: cfg.seed,
    };
    Ok(CHECKS
        .iter()
        .map(|(name, check)| {
            let t = Instant::now();
            let (pass, detail) = match check(&env) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            SuiteLine { name: name.to_string(), pass, detail, secs: t.elapsed().as_secs_f64() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let lines = run_suite(&SessionConfig::default()).unwrap();
        for l in &lines {
            assert!(l.pass, "{}: {}", l.name, l.detail);
        }
        assert_eq!(lines.len(), CHECKS.len());
    }
}
