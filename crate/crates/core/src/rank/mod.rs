//! Bias, Gowers norms, analytic rank, Schmidt rank and the singular-locus bound.

mod analytic;
mod schmidt;
mod singular;

pub use analytic::{
    analytic_rank, bias, derivative_form_sum, gowers_exact_low, gowers_exact_nested, gowers_norm, gowers_sampled,
    Bias, ExactPow, GowersMode, GowersResult,
};
pub use schmidt::{collection_rank, schmidt_rank, schmidt_rank_in_degree, SchmidtRank, SchmidtResult};
pub use singular::{singular_rank_bound, PointCounts, SingularBound};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::polyring::Poly;

#[derive(Clone, Debug)]
pub struct RankOptions {
    pub mode: GowersMode,
    pub schmidt_cutoff: u32,
    /// Work limit shared by every exhaustive computation.
    pub budget: u128,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { mode: GowersMode::Exact, schmidt_cutoff: 3, budget: 1 << 28 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankReport {
    pub poly: String,
    pub field: String,
    pub degree: u32,
    pub bias: Option<f64>,
    pub gowers: Option<GowersResult>,
    pub arank: Option<f64>,
    pub schmidt: Option<SchmidtRank>,
    pub schmidt_minimal: Option<bool>,
    pub singular: Option<SingularBound>,
    /// Why a field is missing, keyed by field name.
    pub notes: Vec<(String, String)>,
}

impl RankReport {
    pub fn compute(p: &Poly, opts: &RankOptions) -> Result<RankReport> {
        let d = p.degree();
        let q = p.field().q();
        let mut notes = Vec::new();
        let mut note = |k: &str, e: &crate::Error| notes.push((k.to_string(), e.to_string()));
        let bias_v = match bias(p, opts.budget) {
            Ok(b) => Some(b.value()),
            Err(e) if e.is_budget() => {
                note("bias", &e);
                None
            }
            Err(e) => return Err(e),
        };
        let gowers = if d == 0 {
            None
        } else {
            match gowers_norm(p, d, opts.mode.clone(), opts.budget) {
                Ok(g) => Some(g),
                Err(e) if e.is_budget() => {
                    note("gowers", &e);
                    None
                }
                Err(e) => return Err(e),
            }
        };
        let arank = gowers.as_ref().map(|g| analytic_rank(g, q));
        let (schmidt, minimal) = match schmidt_rank(p, opts.schmidt_cutoff, opts.budget) {
            Ok(r) => (Some(r.rank), Some(r.minimal)),
            Err(e) if e.is_budget() => {
                note("schmidt", &e);
                (None, None)
            }
            Err(e) => return Err(e),
        };
        let singular = if p.is_homogeneous() && d >= 2 && p.field().p() > d {
            match singular_rank_bound(p, opts.budget) {
                Ok(s) => Some(s),
                Err(e) => {
                    note("singular_bound", &e);
                    None
                }
            }
        } else {
            notes.push(("singular_bound".into(), "needs homogeneous P with char > deg ≥ 2".into()));
            None
        };
        Ok(RankReport {
            poly: p.render(),
            field: p.field().spec().to_string(),
            degree: d,
            bias: bias_v,
            gowers,
            arank,
            schmidt,
            schmidt_minimal: minimal,
            singular,
            notes,
        })
    }

    /// The flat JSON shape `{schmidt, arank, singular_bound, counts, mode, seed}` plus details.
    pub fn to_json(&self) -> Value {
        let schmidt = match self.schmidt {
            Some(SchmidtRank::Exact(r)) => json!(r),
            Some(other) => json!(other.render()),
            None => Value::Null,
        };
        let (mode, seed) = match self.gowers.as_ref().map(|g| &g.mode) {
            Some(GowersMode::Sampled { seed, .. }) => ("sampled", json!(seed)),
            Some(GowersMode::Exact) => ("exact", Value::Null),
            None => ("none", Value::Null),
        };
        let counts = self.singular.as_ref().map(|s| json!(s.counts)).unwrap_or(Value::Null);
        json!({
            "poly": self.poly,
            "field": self.field,
            "degree": self.degree,
            "schmidt": schmidt,
            "schmidt_minimal": self.schmidt_minimal,
            "arank": self.arank,
            "bias": self.bias,
            "gowers_pow": self.gowers.as_ref().map(|g| g.value_pow),
            "gowers_stderr": self.gowers.as_ref().and_then(|g| g.stderr),
            "singular_bound": self.singular.as_ref().map(|s| s.value()),
            "counts": counts,
            "mode": mode,
            "seed": seed,
            "notes": self.notes.iter().map(|(k, v)| json!({"field": k, "reason": v})).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::polyring::parse_poly;
    use std::sync::Arc;

    #[test]
    fn report_json_shape() {
        let k = Arc::new(Field::prime(5).unwrap());
        let p = parse_poly("x1*x2 + x3*x4", &k, None).unwrap();
        let r = RankReport::compute(&p, &RankOptions::default()).unwrap();
        let j = r.to_json();
        assert_eq!(j["schmidt"], json!(2));
        assert!((j["arank"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(j["singular_bound"], json!(1.0));
        assert_eq!(j["mode"], json!("exact"));
    }
}
