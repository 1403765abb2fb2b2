//! The full battery of checks on one level or a sequence of levels.

use serde::{Deserialize, Serialize};

use super::compact::{
    default_delta, default_delta_prime, exp_fat_check, frozen_collapse_report, lip_check, rigidity_report, CompactSubset,
    LipSampling,
};
use super::dual::DualGraph;
use super::geometry::{angle_condition_check, perfectness_check, properness_check};
use super::moves::face_weight_check;
use super::origami::{fold_consistency_check, origami_metric_checks};
use super::report::{CheckReport, VerifyReport};
use crate::lattice::{GraphKind, TEmbeddingLevel};
use crate::limits::Region;
use crate::scalar::Scalar;
use crate::Error;

/// Parameters of [`run_suite`]. `delta` and `delta_prime` default to
/// `log n / n` and `1 / log n`; `exp_fat_bound` defaults to `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub r: f64,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub exp_fat_bound: Option<f64>,
    pub c_cap: f64,
    pub eps: f64,
    pub tol: f64,
    pub fold_tol: f64,
    pub lip_pairs: usize,
    pub lip_balls: usize,
    pub metric_samples: usize,
    pub frozen_margin: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            r: 0.8,
            delta: None,
            delta_prime: None,
            exp_fat_bound: None,
            c_cap: 10.0,
            eps: 0.05,
            tol: 1e-9,
            fold_tol: 1e-10,
            lip_pairs: 1_000_000,
            lip_balls: 50,
            metric_samples: 100_000,
            frozen_margin: 0.05,
            seed: 0,
        }
    }
}

impl VerifyConfig {
    pub fn delta(&self, n: i64) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(n))
    }

    pub fn delta_prime(&self, n: i64) -> f64 {
        self.delta_prime.unwrap_or_else(|| default_delta_prime(n))
    }

    pub fn lip_sampling(&self) -> LipSampling {
        LipSampling { pairs: self.lip_pairs, balls: self.lip_balls, seed: self.seed }
    }
}

/// Checks on the liquid compact set. They are theorems for the Aztec
/// diamond only; on tower graphs they are reported as exploratory, and their
/// errors become failed exploratory entries.
fn compact_checks<S: Scalar>(
    g: &DualGraph,
    level: &TEmbeddingLevel<S>,
    cfg: &VerifyConfig,
    out: &mut VerifyReport,
) -> Result<(), Error> {
    let k = CompactSubset::new(cfg.r)?;
    let n = level.n;
    let delta = cfg.delta(n);
    let runs: [(&str, Box<dyn Fn() -> Result<CheckReport, Error> + '_>); 3] = [
        ("rigidity", Box::new(|| rigidity_report(g, level, &k, cfg.c_cap, cfg.eps))),
        ("lip", Box::new(|| lip_check(level, &k, delta, cfg.lip_sampling()))),
        (
            "exp_fat",
            Box::new(|| exp_fat_check(g, level, &k, delta, cfg.delta_prime(n), cfg.exp_fat_bound.unwrap_or(delta))),
        ),
    ];
    for (name, run) in runs {
        match (level.kind, run()) {
            (GraphKind::Aztec, r) => out.push(r?),
            (GraphKind::Tower, Ok(r)) => out.push(r.exploratory()),
            (GraphKind::Tower, Err(e)) => out.push(CheckReport::new(name).gate(false).note(e.to_string()).exploratory()),
        }
    }
    Ok(())
}

/// Angle condition, properness, perfectness, origami fold and metric, face
/// weights, rigidity, Lip and Exp-Fat on one level.
pub fn run_suite<S: Scalar>(level: &TEmbeddingLevel<S>, cfg: &VerifyConfig) -> Result<VerifyReport, Error> {
    let g = DualGraph::new(level.kind, level.n)?;
    let mut out = VerifyReport::new(level.kind, level.n);
    // a degenerate edge fails the angle check rather than aborting the suite
    match angle_condition_check(&g, level, cfg.tol) {
        Ok(r) => out.push(r),
        Err(Error::Degenerate(m)) => out.push(CheckReport::new("angle_condition").gate(false).note(m)),
        Err(e) => return Err(e),
    }
    out.push(properness_check(&g, level)?);
    out.push(perfectness_check(&g, level, cfg.tol)?);
    match fold_consistency_check(&g, level, cfg.fold_tol) {
        Ok(r) => out.push(r),
        Err(Error::Degenerate(m)) => out.push(CheckReport::new("origami_fold").gate(false).note(m)),
        Err(e) => return Err(e),
    }
    out.push(origami_metric_checks(&g, level, cfg.tol, cfg.metric_samples, cfg.seed)?);
    match face_weight_check(&g, level, cfg.tol) {
        Ok(r) => out.push(r),
        Err(Error::Degenerate(m)) => out.push(CheckReport::new("face_weights").gate(false).note(m)),
        Err(e) => return Err(e),
    }
    if level.n >= 2 {
        compact_checks(&g, level, cfg, &mut out)?;
    }
    Ok(out)
}

/// Reports for a sequence of sizes, with frozen-region collapse across them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub runs: Vec<VerifyReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequence: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckReport> {
        self.runs.iter().flat_map(|r| r.failed()).chain(self.sequence.iter().filter(|c| !c.pass && !c.exploratory))
    }
}

/// [`run_suite`] on every level; with two or more Aztec levels, also the
/// collapse of the four frozen regions.
pub fn run_sequence<S: Scalar>(levels: &[TEmbeddingLevel<S>], cfg: &VerifyConfig) -> Result<SuiteReport, Error> {
    let runs = levels.iter().map(|l| run_suite(l, cfg)).collect::<Result<Vec<_>, _>>()?;
    let mut sequence = Vec::new();
    if levels.len() >= 2 {
        let refs: Vec<&TEmbeddingLevel<S>> = levels.iter().collect();
        for region in [Region::EastFrozen, Region::NorthFrozen, Region::WestFrozen, Region::SouthFrozen] {
            let r = match levels[0].kind {
                GraphKind::Aztec => frozen_collapse_report(&refs, region, cfg.frozen_margin)?.1,
                GraphKind::Tower => match frozen_collapse_report(&refs, region, cfg.frozen_margin) {
                    Ok((_, r)) => r.exploratory(),
                    Err(e) => CheckReport::new(&format!("frozen_collapse_{region:?}")).gate(false).note(e.to_string()).exploratory(),
                },
            };
            sequence.push(r);
        }
    }
    let pass = runs.iter().all(|r| r.pass) && sequence.iter().all(|c| c.pass || c.exploratory);
    Ok(SuiteReport { pass, runs, sequence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::aztec_embedding;
    use crate::tower::tower_embedding;

    fn quick() -> VerifyConfig {
        VerifyConfig { lip_pairs: 50_000, lip_balls: 10, metric_samples: 5_000, ..VerifyConfig::default() }
    }

    #[test]
    fn aztec_suite_at_small_sizes() {
        // rho = exp(-n / log^2 n) exceeds every inradius at small n, so only Exp-Fat fails
        for n in [10, 20] {
            let r = run_suite(&aztec_embedding::<f64>(n).unwrap(), &quick()).unwrap();
            assert_eq!(r.checks.len(), 9);
            let failed: Vec<&str> = r.failed().map(|c| c.name.as_str()).collect();
            assert_eq!(failed, ["exp_fat"], "n={n}");
        }
        let cfg = VerifyConfig { delta_prime: Some(5.0), ..quick() };
        let r = run_suite(&aztec_embedding::<f64>(20).unwrap(), &cfg).unwrap();
        assert!(r.pass, "{:?}", r.failed().map(|c| c.summary()).collect::<Vec<_>>());
    }

    #[test]
    fn suite_is_reproducible() {
        let lv = aztec_embedding::<f64>(12).unwrap();
        assert_eq!(run_suite(&lv, &quick()).unwrap(), run_suite(&lv, &quick()).unwrap());
    }

    #[test]
    fn perturbation_names_the_failed_check() {
        let mut lv = aztec_embedding::<f64>(8).unwrap();
        let i = lv.index_of(2, 1).unwrap();
        lv.vertices[i].t.im += 0.01;
        let r = run_suite(&lv, &quick()).unwrap();
        assert!(!r.pass);
        assert!(r.failed().any(|c| c.name == "angle_condition"));
    }

    #[test]
    fn oversized_delta_is_an_error() {
        let cfg = VerifyConfig { delta: Some(5.0), ..quick() };
        assert!(matches!(run_suite(&aztec_embedding::<f64>(10).unwrap(), &cfg), Err(Error::NoAdmissiblePairs)));
    }

    #[test]
    fn tower_compact_checks_are_exploratory() {
        let r = run_suite(&tower_embedding::<f64>(8).unwrap(), &quick()).unwrap();
        for name in ["rigidity", "lip", "exp_fat"] {
            assert!(r.checks.iter().any(|c| c.name == name && c.exploratory));
        }
        assert!(r.pass, "{:?}", r.failed().map(|c| c.summary()).collect::<Vec<_>>());
    }

    #[test]
    fn sequence_adds_frozen_collapse() {
        let levels = [aztec_embedding::<f64>(16).unwrap(), aztec_embedding::<f64>(32).unwrap()];
        let s = run_sequence(&levels, &quick()).unwrap();
        assert_eq!(s.runs.len(), 2);
        assert_eq!(s.sequence.len(), 4);
        assert!(s.sequence.iter().all(|c| c.pass));
    }
}
