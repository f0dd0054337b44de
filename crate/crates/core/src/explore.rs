//! Seeded campaigns: generate instances, optionally break one condition, run
//! the matching route and compare with the oracle.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{agreement, run_route, RouteId, RouteOptions};
use crate::generator::{generate_instance, perturb_to_violate, GenConfig};
use crate::hypotheses::{check_hypothesis, HypothesisId, Instance};
use crate::oracle::drazin;
use crate::scalar::{Backend, ExactComplex, FloatComplex, Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreConfig {
    pub id: HypothesisId,
    pub route: RouteId,
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    /// 1-based condition to break in every trial.
    pub violate: Option<usize>,
    pub backend: Backend,
}

impl ExploreConfig {
    pub fn new(id: HypothesisId, trials: usize, dim: usize, seed: u64) -> Self {
        Self {
            id,
            route: id.route(),
            trials,
            dim,
            seed,
            violate: None,
            backend: Backend::Exact,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("--dim must be at least 1".into()));
        }
        if self.route != self.id.route() {
            return Err(Error::InvalidArgument(format!(
                "route {} does not belong to {}",
                self.route, self.id
            )));
        }
        if let Some(k) = self.violate {
            let count = self.id.condition_count();
            if k == 0 || k > count {
                return Err(Error::InvalidArgument(format!(
                    "{} has conditions 1..={count}, got --violate {k}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Match,
    Mismatch,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub hypothesis: HypothesisId,
    pub route: RouteId,
    pub recipe: String,
    pub violated_condition: Option<usize>,
    pub hypothesis_satisfied: bool,
    pub hypothesis_residual: f64,
    pub outcome: Outcome,
    /// `max |route - oracle|`; absent when the trial errored.
    pub discrepancy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub matched: usize,
    pub mismatched: usize,
    pub errors: usize,
    pub max_discrepancy: f64,
    pub max_hypothesis_residual: f64,
}

/// Wall-clock data, kept apart so that report bodies can be compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: ExploreConfig,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
    pub timing: Timing,
}

impl RunReport {
    /// The report without its timing field, as canonical JSON.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report is serializable");
        v.as_object_mut()
            .expect("report is an object")
            .remove("timing");
        serde_json::to_string_pretty(&v).expect("report is serializable")
    }

    /// True when every trial on an unmodified instance matched the oracle.
    pub fn all_clean_trials_match(&self) -> bool {
        self.config.violate.is_some() || self.summary.matched == self.summary.trials
    }
}

/// Runs the campaign on `threads` worker threads (`None`: rayon's default).
/// The report does not depend on the thread count.
pub fn explore(
    cfg: &ExploreConfig,
    command: Vec<String>,
    threads: Option<usize>,
) -> Result<RunReport> {
    cfg.validate()?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let trials: Vec<TrialRecord> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t))
            .collect()
    });
    let summary = summarize(&trials);
    Ok(RunReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        config: cfg.clone(),
        trials,
        summary,
        timing: Timing {
            started_unix_ms: started,
            elapsed_ms: clock.elapsed().as_millis(),
        },
    })
}

fn summarize(trials: &[TrialRecord]) -> Summary {
    let count = |o: Outcome| trials.iter().filter(|t| t.outcome == o).count();
    Summary {
        trials: trials.len(),
        matched: count(Outcome::Match),
        mismatched: count(Outcome::Mismatch),
        errors: count(Outcome::Error),
        max_discrepancy: trials
            .iter()
            .filter_map(|t| t.discrepancy)
            .fold(0.0, f64::max),
        max_hypothesis_residual: trials
            .iter()
            .map(|t| t.hypothesis_residual)
            .fold(0.0, f64::max),
    }
}

fn run_trial(cfg: &ExploreConfig, trial: usize) -> TrialRecord {
    let seed = cfg.seed ^ trial as u64;
    let mut rec = TrialRecord {
        trial,
        seed,
        hypothesis: cfg.id,
        route: cfg.route,
        recipe: String::new(),
        violated_condition: cfg.violate,
        hypothesis_satisfied: false,
        hypothesis_residual: 0.0,
        outcome: Outcome::Error,
        discrepancy: None,
        error: None,
    };
    if let Err(e) = fill_trial(cfg, seed, &mut rec) {
        rec.outcome = Outcome::Error;
        rec.error = Some(e.to_string());
    }
    rec
}

fn fill_trial(cfg: &ExploreConfig, seed: u64, rec: &mut TrialRecord) -> Result<()> {
    let tol = Tolerance::default();
    let g = generate_instance(&GenConfig::new(cfg.id, cfg.dim, seed))?;
    rec.recipe = g.recipe.to_string();
    let inst = match cfg.violate {
        Some(k) => perturb_to_violate(&g.instance, cfg.id, k, seed)?,
        None => g.instance,
    };
    let report = check_hypothesis(cfg.id, &inst, &tol)?;
    rec.hypothesis_satisfied = report.satisfied;
    rec.hypothesis_residual = report.max_residual();
    let opts = RouteOptions {
        force: cfg.violate.is_some(),
        tol,
    };
    let (d, ok) = match cfg.backend {
        Backend::Exact => route_vs_oracle::<ExactComplex>(cfg.route, &inst, &opts)?,
        Backend::Float => route_vs_oracle::<FloatComplex>(cfg.route, &inst, &opts)?,
    };
    rec.discrepancy = Some(d);
    rec.outcome = if ok {
        Outcome::Match
    } else {
        Outcome::Mismatch
    };
    Ok(())
}

/// Runs the route in backend `S` and compares with the exact oracle.
pub fn route_vs_oracle<S: Scalar>(
    route: RouteId,
    inst: &Instance<ExactComplex>,
    opts: &RouteOptions,
) -> Result<(f64, bool)> {
    let converted = inst.map(|m| m.to_backend::<S>());
    let out = run_route(route, &converted, opts)?;
    let exact_target = crate::formulas::route_target(route, inst)?;
    let oracle = drazin(&exact_target, &opts.tol)?.inverse.to_backend::<S>();
    Ok(agreement(&out.inverse, &oracle, &opts.tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_campaign() {
        let cfg = ExploreConfig::new(HypothesisId::H22, 0, 2, 0);
        let r = explore(&cfg, vec![], Some(1)).unwrap();
        assert!(r.trials.is_empty());
        assert_eq!(r.summary.trials, 0);
        assert!(r.all_clean_trials_match());
    }

    #[test]
    fn small_campaign_matches_and_is_deterministic() {
        let cfg = ExploreConfig::new(HypothesisId::H27, 10, 2, 1);
        let a = explore(&cfg, vec![], Some(1)).unwrap();
        let b = explore(&cfg, vec![], Some(3)).unwrap();
        assert_eq!(a.summary.matched, 10);
        assert_eq!(a.body_json(), b.body_json());
        assert!(!a.body_json().contains("elapsed_ms"));
    }

    #[test]
    fn bad_violate_index() {
        let mut cfg = ExploreConfig::new(HypothesisId::H27, 1, 2, 1);
        cfg.violate = Some(3);
        assert!(explore(&cfg, vec![], None).is_err());
    }
}
