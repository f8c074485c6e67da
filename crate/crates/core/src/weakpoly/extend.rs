//! Extending functions on `X` to global polynomials of degree ≤ a: a direct
//! linear solve, the torus-equivariant construction on `X_n`, and the
//! slice-by-slice walk along a flag.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Elem, Field, SubgroupDelta};
use crate::linalg::{self, Solve};
use crate::polyring::{monomials_up_to, Monomial, Poly};
use crate::variety::{kappa, GammaElement, VarietyTable, XnSpec};

use super::interp::interpolate;
use super::spaces::{is_weakly_polynomial, TestMode};
use super::theta::theta_decompose;
use super::FnOnX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Solver,
    Constructive,
    Inductive,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Solver => "solver",
            Engine::Constructive => "constructive",
            Engine::Inductive => "inductive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionStatus {
    Extended(Poly),
    /// `y` over the points of `X` with `Σ y_x F(x) = 0` for every monomial
    /// of degree ≤ a and `Σ y_x f(x) ≠ 0`.
    NoExtension(Vec<Elem>),
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub engine: Engine,
    pub a: u32,
    pub status: ExtensionStatus,
    pub transcript: Value,
}

impl ExtensionResult {
    pub fn poly(&self) -> Option<&Poly> {
        match &self.status {
            ExtensionStatus::Extended(p) => Some(p),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let (status, poly, cert) = match &self.status {
            ExtensionStatus::Extended(p) => ("extended", Some(p.render()), None),
            ExtensionStatus::NoExtension(y) => ("no_extension", None, Some(y.iter().map(|e| e.0).collect::<Vec<_>>())),
            ExtensionStatus::Inconclusive(r) => ("inconclusive", Some(r.clone()), None),
        };
        json!({
            "engine": self.engine.name(),
            "a": self.a,
            "status": status,
            "poly": poly,
            "certificate": cert,
            "transcript": self.transcript,
        })
    }
}

fn low_monomials(field: &Field, nvars: usize, a: u32) -> Vec<Monomial> {
    monomials_up_to(nvars, a, false)
        .into_iter()
        .filter(|m| m.exponents().iter().all(|&e| (e as u32) < field.q()))
        .collect()
}

/// Solve `F|_X = values` over monomials of degree ≤ a.
fn solve_on(table: &VarietyTable, values: &[Elem], a: u32, limit: u128) -> Result<std::result::Result<Poly, Vec<Elem>>> {
    let field = table.field();
    let monos = low_monomials(field, table.nvars(), a);
    let cost = table.len() as u128 * monos.len() as u128 * monos.len() as u128;
    if cost > limit {
        return Err(Error::BudgetExceeded { what: "extension linear system", needed: cost, limit });
    }
    let rows: Vec<Vec<Elem>> = table.points().map(|v| monos.iter().map(|m| m.eval(field, &v)).collect()).collect();
    Ok(match linalg::solve(field, &rows, monos.len(), values) {
        Solve::Solution(x) => Ok(Poly::from_coeffs(field, table.nvars(), &monos, &x)),
        Solve::Inconsistent(y) => {
            debug_assert!(linalg::verify_certificate(field, &rows, monos.len(), values, &y));
            Err(y)
        }
    })
}

/// Check a no-extension certificate against `f` directly.
pub fn verify_no_extension(table: &VarietyTable, f: &FnOnX, a: u32, y: &[Elem]) -> bool {
    let field = table.field();
    let monos = low_monomials(field, table.nvars(), a);
    let rows: Vec<Vec<Elem>> = table.points().map(|v| monos.iter().map(|m| m.eval(field, &v)).collect()).collect();
    linalg::verify_certificate(field, &rows, monos.len(), &f.values, y)
}

pub fn extend_by_solver(table: &VarietyTable, f: &FnOnX, a: u32, limit: u128) -> Result<ExtensionResult> {
    let status = match solve_on(table, &f.values, a, limit)? {
        Ok(p) => ExtensionStatus::Extended(p),
        Err(y) => ExtensionStatus::NoExtension(y),
    };
    Ok(ExtensionResult { engine: Engine::Solver, a, status, transcript: json!({"points": table.len()}) })
}

/// An `X_n` table with the subgroup `Δ` used for its torus.
pub struct XnContext<'a> {
    pub spec: XnSpec,
    pub table: &'a VarietyTable,
    pub delta: SubgroupDelta,
}

impl<'a> XnContext<'a> {
    /// Checks `q > ad`, `m | q − 1`, `m > 2a` and `char > d`.
    pub fn new(spec: XnSpec, table: &'a VarietyTable, m: u32, a: u32) -> Result<Self> {
        let field = table.field();
        let (q, d) = (field.q() as u64, spec.d as u64);
        if q <= a as u64 * d {
            return Err(Error::NotAdmissible(format!("|k| = {q} ≤ a·d = {}", a as u64 * d)));
        }
        if m <= 2 * a {
            return Err(Error::NotAdmissible(format!("m = {m} ≤ 2a = {}", 2 * a)));
        }
        if field.p() as u64 <= d {
            return Err(Error::NotAdmissible(format!("char {} ≤ d = {d}", field.p())));
        }
        let delta = SubgroupDelta::find(field, m)?;
        Ok(XnContext { spec, table, delta })
    }
}

pub fn extend_on_xn(ctx: &XnContext, f: &FnOnX, a: u32, limit: u128) -> Result<ExtensionResult> {
    let table = ctx.table;
    let field: Arc<Field> = table.field().clone();
    let spec = ctx.spec;
    let (n, d) = (spec.n, spec.d);
    let weak = is_weakly_polynomial(table, f, a, TestMode::Lines, limit)?;
    if let Some((flat, deg)) = weak.violation {
        return Err(Error::NotWeaklyPolynomial {
            a,
            detail: format!("degree {deg} on the line through {:?}", flat.base().iter().map(|e| e.0).collect::<Vec<_>>()),
        });
    }
    let comps = theta_decompose(&field, &ctx.delta, &spec, table, f);
    let gammas = GammaElement::all(&spec);
    let mut total = Poly::zero(&field, spec.nvars());
    let mut steps = Vec::new();
    for (theta, g) in &comps {
        if !theta.is_admissible(a) {
            return Err(Error::NonAdmissibleComponentNonzero(theta.render()));
        }
        let gamma = gammas
            .iter()
            .find(|gm| theta.conjugate(gm).is_positive())
            .ok_or_else(|| Error::NoPositiveChamber(theta.render()))?;
        let theta_pos = theta.conjugate(gamma);
        // g_γ = g ∘ γ
        let g_gamma: Vec<Elem> =
            table.points().map(|x| g.values[table.ordinal(&gamma.act(&x)).expect("X is Γ-stable")]).collect();
        // h on L, through the coordinates c_1..c_{n-1}.
        let grid = (field.q() as usize).pow(n as u32 - 1);
        let mut hv = Vec::with_capacity(grid);
        let mut c = vec![Elem::ZERO; n];
        for mut idx in 0..grid {
            for slot in c[..n - 1].iter_mut().rev() {
                *slot = Elem((idx % field.q() as usize) as u32);
                idx /= field.q() as usize;
            }
            c[n - 1] = field.neg(c[..n - 1].iter().fold(Elem::ZERO, |s, &x| field.add(s, x)));
            let v = kappa(&field, &spec, &c)?;
            hv.push(g_gamma[table.ordinal(&v).expect("κ(L) ⊂ X")]);
        }
        let h = interpolate(&field, n - 1, &hv);
        if h.degree() > a {
            return Err(Error::NotWeaklyPolynomial { a, detail: format!("h has degree {} on L", h.degree()) });
        }
        // P = Π (x_i^j)^{deg_i[j]} · H(μ(w_1), …, μ(w_{n-1}))
        let mus: Vec<Poly> = (0..n - 1).map(|i| spec.mu_poly(&field, i)).collect();
        let fh = h.substitute(&mus)?;
        let mut e = vec![0u16; spec.nvars()];
        for (i, degs) in theta_pos.degrees().iter().enumerate() {
            for (j, &dj) in degs.iter().enumerate() {
                e[spec.var(i, j)] = dj as u16;
            }
        }
        let p = Poly::monomial(&field, Elem::ONE, Monomial::from_exponents(e)).mul(&fh);
        if p.degree() > a * d as u32 {
            return Err(Error::DegreeExceeded { degree: p.degree(), bound: a * d as u32 });
        }
        if !(FnOnX { values: g_gamma }).matches(table, &p) {
            return Err(Error::VanishingCheckFailed(format!("P differs from f^θ on X for θ = {}", theta.render())));
        }
        // Undo γ: P_θ(x) = P(γ⁻¹ x).
        let inv = gamma.inverse();
        let map: Vec<usize> = (0..spec.nvars()).map(|v| spec.var(v / d, inv.perms()[v / d][v % d])).collect();
        let p_theta = p.relabel(spec.nvars(), &map);
        debug_assert!(g.matches(table, &p_theta));
        steps.push(json!({
            "theta": theta.render(),
            "gamma": gamma.perms(),
            "theta_plus": theta_pos.render(),
            "h": h.render(),
            "P": p.render(),
        }));
        total = total.add(&p_theta);
    }
    if !f.matches(table, &total) {
        return Err(Error::VanishingCheckFailed("sum of components differs from f".into()));
    }
    // X_n is a cone and ad < q − 1, so each homogeneous part above a must vanish on X.
    let mut reduced = Poly::zero(&field, spec.nvars());
    let mut stripped = Vec::new();
    for (deg, part) in total.homogeneous_components() {
        if deg <= a {
            reduced = reduced.add(&part);
        } else if FnOnX::restriction_of(table, &part).is_zero() {
            stripped.push(deg);
        } else {
            return Err(Error::VanishingCheckFailed(format!("degree-{deg} part does not vanish on X")));
        }
    }
    if !f.matches(table, &reduced) {
        return Err(Error::VanishingCheckFailed("reduced polynomial differs from f".into()));
    }
    let reduced = reduced.with_bound(a)?;
    Ok(ExtensionResult {
        engine: Engine::Constructive,
        a,
        status: ExtensionStatus::Extended(reduced),
        transcript: json!({
            "components": steps,
            "before_reduction": total.render(),
            "stripped_degrees": stripped,
        }),
    })
}

/// Walk the flag `W_0 ⊂ … ⊂ W_s = V`, `W_i = {E_{i+1} = … = E_s = 0}` for
/// `flag = [E_1, …, E_s]`, starting from `base` which must match `f` on `X ∩ W_0`.
pub fn extend_inductive(
    table: &VarietyTable,
    f: &FnOnX,
    a: u32,
    flag: &[Poly],
    base: &Poly,
    limit: u128,
) -> Result<ExtensionResult> {
    let field = table.field().clone();
    let w0 = table.restrict(flag);
    if !f.restrict(table, &w0).matches(&w0, base) {
        return Err(Error::BaseMismatch);
    }
    let mut current = base.clone();
    let mut levels = Vec::new();
    for i in 0..flag.len() {
        let ell = &flag[i];
        let level = table.restrict(&flag[i + 1..]);
        let f_level = f.restrict(table, &level);
        let cl = ell.compile();
        let ell_vals: Vec<Elem> = level.points().map(|v| cl.eval(&v)).collect();
        let residual = |p: &Poly| -> Vec<Elem> {
            let cp = p.compile();
            level.points().zip(&f_level.values).map(|(v, &y)| field.sub(y, cp.eval(&v))).collect()
        };
        let mut s_set = vec![Elem::ZERO];
        let mut slices = Vec::new();
        for b in field.elements().filter(|b| !b.is_zero()) {
            if !ell_vals.contains(&b) {
                continue;
            }
            let r = residual(&current);
            let on_b: Vec<usize> = (0..level.len()).filter(|&o| ell_vals[o] == b).collect();
            if on_b.iter().all(|&o| r[o].is_zero()) {
                s_set.push(b);
                slices.push(json!({"b": b.0, "deg": null}));
                continue;
            }
            if s_set.len() as u32 > a {
                return Err(Error::TooManySlices { used: s_set.len(), a });
            }
            let slice_eq = ell.sub(&Poly::constant(&field, ell.nvars(), b));
            let xb = level.restrict(&[slice_eq]);
            let rb: Vec<Elem> = on_b.iter().map(|&o| r[o]).collect();
            let deg = a - s_set.len() as u32;
            let q1 = match solve_on(&xb, &rb, deg, limit) {
                Ok(Ok(p)) => p,
                Ok(Err(_)) => {
                    return Err(Error::ResidualNotLowerDegree(format!(
                        "level {i}, slice {}: residual has no extension of degree ≤ {deg}",
                        b.0
                    )))
                }
                Err(e) if e.is_budget() => return Err(Error::SliceBudgetExceeded(e.to_string())),
                Err(e) => return Err(e),
            };
            let mut num = Poly::constant(&field, ell.nvars(), Elem::ONE);
            let mut den = Elem::ONE;
            for &s in &s_set {
                num = num.mul(&ell.sub(&Poly::constant(&field, ell.nvars(), s)));
                den = field.mul(den, field.sub(b, s));
            }
            let q = q1.mul(&num).scale(field.inv(den).expect("distinct slice values"));
            current = current.add(&q);
            s_set.push(b);
            let r = residual(&current);
            if (0..level.len()).any(|o| s_set.contains(&ell_vals[o]) && !r[o].is_zero()) {
                return Err(Error::VanishingCheckFailed(format!("level {i}: residual survives on X_S")));
            }
            slices.push(json!({"b": b.0, "deg": q1.degree()}));
        }
        levels.push(json!({"level": i, "points": level.len(), "slices": slices}));
    }
    if !f.matches(table, &current) {
        return Err(Error::VanishingCheckFailed("flag walk ended away from f".into()));
    }
    let status = if current.degree() <= a {
        ExtensionStatus::Extended(current.with_bound(a)?)
    } else {
        ExtensionStatus::Inconclusive(format!("degree {} exceeds {a}", current.degree()))
    };
    Ok(ExtensionResult { engine: Engine::Inductive, a, status, transcript: json!({ "levels": levels }) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{parse_poly, PolyCollection};
    use crate::variety::build_xn;

    const LIMIT: u128 = 1 << 34;

    #[test]
    fn example_has_no_linear_extension() {
        for p in [5, 7, 11] {
            let k = Arc::new(Field::prime(p).unwrap());
            let x = VarietyTable::enumerate(&PolyCollection::single(parse_poly("x1*x2*(x1 - x2)", &k, None).unwrap()), LIMIT)
                .unwrap();
            let f = FnOnX::from_fn(&x, |v| if v[0] == v[1] { v[0] } else { Elem::ZERO });
            let r = extend_by_solver(&x, &f, 1, LIMIT).unwrap();
            match &r.status {
                ExtensionStatus::NoExtension(y) => assert!(verify_no_extension(&x, &f, 1, y)),
                other => panic!("{other:?}"),
            }
            let z = extend_by_solver(&x, &FnOnX::zero(&x), 1, LIMIT).unwrap();
            assert_eq!(z.poly().unwrap(), &Poly::zero(&k, 2));
        }
    }

    #[test]
    fn constructive_on_x2() {
        let k = Arc::new(Field::prime(7).unwrap());
        let xn = build_xn(&k, 2, 2, LIMIT).unwrap();
        let ctx = XnContext::new(xn.spec, &xn.table, 6, 2).unwrap();
        for s in ["x1*x3 + 2*x2", "x1^2 + x2*x4 + 3", "x1 + x2 + x3 + x4", "x2^2 + x1*x2"] {
            let g = parse_poly(s, &k, Some(4)).unwrap();
            let f = FnOnX::restriction_of(&xn.table, &g);
            let r = extend_on_xn(&ctx, &f, 2, LIMIT).unwrap();
            let p = r.poly().unwrap();
            assert!(p.degree() <= 2);
            assert!(f.matches(&xn.table, p), "{s}");
        }
        // ν-pullback: T-invariant, one trivial component.
        let f = FnOnX::from_fn(&xn.table, |v| k.mul(v[0], v[1]));
        let r = extend_on_xn(&ctx, &f, 2, LIMIT).unwrap();
        assert_eq!(r.transcript["components"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn admissibility_checked() {
        let k = Arc::new(Field::prime(7).unwrap());
        let xn = build_xn(&k, 2, 2, LIMIT).unwrap();
        assert!(matches!(XnContext::new(xn.spec, &xn.table, 6, 3), Err(Error::NotAdmissible(_))));
        assert!(matches!(XnContext::new(xn.spec, &xn.table, 3, 2), Err(Error::NotAdmissible(_))));
        assert!(matches!(XnContext::new(xn.spec, &xn.table, 5, 2), Err(Error::NotAdmissible(_)) | Err(Error::NonDivisor { .. })));
    }

    #[test]
    fn inductive_on_full_space() {
        let k = Arc::new(Field::prime(7).unwrap());
        let v = VarietyTable::enumerate(&PolyCollection::single(Poly::zero(&k, 2)), LIMIT).unwrap();
        let g = parse_poly("x1^2 + 3*x1*x2 + x2 + 5", &k, None).unwrap();
        let f = FnOnX::restriction_of(&v, &g);
        let flag = vec![parse_poly("x1", &k, Some(2)).unwrap(), parse_poly("x2", &k, Some(2)).unwrap()];
        let base = Poly::constant(&k, 2, Elem(5));
        let r = extend_inductive(&v, &f, 2, &flag, &base, LIMIT).unwrap();
        assert_eq!(r.poly().unwrap(), &g);
        let zero_on_x0 = FnOnX::restriction_of(&v, &parse_poly("x1*x2", &k, None).unwrap());
        let flag1 = vec![parse_poly("x1", &k, Some(2)).unwrap()];
        let r = extend_inductive(&v, &zero_on_x0, 2, &flag1, &Poly::zero(&k, 2), LIMIT);
        // W_1 = V here; the base must match f on {x1 = 0}, where f = 0.
        assert!(r.is_ok());
        let bad = extend_inductive(&v, &f, 2, &flag, &Poly::zero(&k, 2), LIMIT);
        assert_eq!(bad.unwrap_err(), Error::BaseMismatch);
    }
}
