//! Monte-Carlo accuracy studies: MSE and bias per parameter, RMS of the KS
//! distance, sample-size series and one-parameter sweeps.
//!
//! Replication `l` draws its sample from ChaCha stream `l` of `base_seed`, so
//! every method sees the same samples and results do not depend on execution
//! order. Replications run in parallel when requested but are always
//! aggregated serially in index order, which keeps the output bit-identical.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{sample_stable_stream, DistEvalConfig, StableDist};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, Method};
use crate::params::{ParamField, StableParams};
use crate::quantile::MIN_SAMPLE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub field: ParamField,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub truth: StableParams,
    /// Overrides one field of `truth` per grid point in [`run_parameter_sweep`].
    pub sweep: Option<Sweep>,
    pub methods: Vec<Method>,
    /// Sample size per replication.
    pub n: usize,
    /// Number of replications.
    pub replications: usize,
    pub base_seed: u64,
    pub parallel: bool,
    /// Evaluation settings for the KS distance.
    pub ks_eval: DistEvalConfig,
}

impl StudyConfig {
    pub fn new(truth: StableParams, methods: Vec<Method>, n: usize, replications: usize, base_seed: u64) -> Self {
        StudyConfig {
            truth,
            sweep: None,
            methods,
            n,
            replications,
            base_seed,
            parallel: true,
            ks_eval: DistEvalConfig::fast(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        if self.replications < 1 {
            return Err(Error::InvalidStudy("at least one replication is required".into()));
        }
        if self.n < MIN_SAMPLE {
            return Err(Error::InvalidStudy(format!("sample size {} below {MIN_SAMPLE}", self.n)));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InvalidStudy("empty sweep grid".into()));
            }
            for &v in &s.values {
                let mut p = self.truth;
                s.field.set(&mut p, v);
                p.validate()
                    .map_err(|e| Error::InvalidStudy(format!("sweep value {} = {v}: {e}", s.field)))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub parameter: ParamField,
    pub mse: f64,
    pub abs_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    /// Not run because the method is undefined at the true parameters.
    pub skipped: bool,
    pub successes: usize,
    pub failures: usize,
    pub stats: Vec<ParamStats>,
    pub ks_rms: Option<f64>,
}

impl MethodResult {
    pub fn stat(&self, field: ParamField) -> Option<&ParamStats> {
        self.stats.iter().find(|s| s.parameter == field)
    }

    pub fn mse(&self, field: ParamField) -> Option<f64> {
        self.stat(field).map(|s| s.mse)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub truth: StableParams,
    pub n: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<MethodResult>,
}

impl StudyResult {
    pub fn method(&self, label: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == label)
    }
}

/// One estimator's outcome on one replication.
type Outcome = Option<(StableParams, Option<f64>)>;

fn replicate(
    cfg: &StudyConfig,
    truth: &StableParams,
    n: usize,
    estimators: &[&dyn Estimator],
    active: &[bool],
    with_ks: bool,
    l: usize,
) -> Result<Vec<Outcome>> {
    let x = sample_stable_stream(truth, n, cfg.base_seed, l as u64)?;
    Ok(estimators
        .iter()
        .zip(active)
        .map(|(est, &on)| {
            if !on {
                return None;
            }
            let fit = est.fit(&x).ok()?;
            let ks = if with_ks {
                Some(StableDist::new(&fit.params, cfg.ks_eval).ok()?.ks_distance(&x))
            } else {
                None
            };
            Some((fit.params, ks))
        })
        .collect())
}

fn run_study(
    cfg: &StudyConfig,
    truth: &StableParams,
    n: usize,
    estimators: &[&dyn Estimator],
    with_ks: bool,
) -> Result<StudyResult> {
    let truth = truth.to_one_param();
    let active: Vec<bool> = estimators.iter().map(|e| e.supports(&truth)).collect();
    let rep = |l: usize| replicate(cfg, &truth, n, estimators, &active, with_ks, l);
    let outcomes: Vec<Vec<Outcome>> = if cfg.parallel {
        (0..cfg.replications).into_par_iter().map(rep).collect::<Result<_>>()?
    } else {
        (0..cfg.replications).map(rep).collect::<Result<_>>()?
    };

    let mut methods = Vec::with_capacity(estimators.len());
    for (m, est) in estimators.iter().enumerate() {
        let label = est.label();
        if !active[m] {
            methods.push(MethodResult { method: label, skipped: true, successes: 0, failures: 0, stats: Vec::new(), ks_rms: None });
            continue;
        }
        let fits: Vec<&(StableParams, Option<f64>)> = outcomes.iter().filter_map(|o| o[m].as_ref()).collect();
        if fits.is_empty() {
            return Err(Error::AllReplicationsFailed { method: label });
        }
        let count = fits.len() as f64;
        let stats = ParamField::ALL
            .iter()
            .map(|&field| {
                let t = field.get(&truth);
                let (mut sum, mut sum_sq) = (0.0, 0.0);
                for (p, _) in &fits {
                    let e = t - field.get(p);
                    sum += e;
                    sum_sq += e * e;
                }
                let mse = sum_sq / count;
                let abs_bias = (sum / count).abs();
                assert!(
                    abs_bias * abs_bias <= mse * (1.0 + 1e-12) + 1e-15,
                    "bias-variance bound violated for {label}/{field}"
                );
                ParamStats { parameter: field, mse, abs_bias }
            })
            .collect();
        let ks_rms = if with_ks {
            let ks: Vec<f64> = fits.iter().filter_map(|(_, k)| *k).collect();
            Some((ks.iter().map(|d| d * d).sum::<f64>() / ks.len().max(1) as f64).sqrt())
        } else {
            None
        };
        methods.push(MethodResult {
            method: label,
            skipped: false,
            successes: fits.len(),
            failures: cfg.replications - fits.len(),
            stats,
            ks_rms,
        });
    }
    Ok(StudyResult { truth, n, replications: cfg.replications, base_seed: cfg.base_seed, methods })
}

fn method_refs(methods: &[Method]) -> Vec<&dyn Estimator> {
    methods.iter().map(|m| m as &dyn Estimator).collect()
}

/// MSE and absolute bias per method and parameter.
pub fn run_mse_study(cfg: &StudyConfig) -> Result<StudyResult> {
    run_mse_study_with(cfg, &method_refs(&cfg.methods))
}

/// [`run_mse_study`] with arbitrary estimators in place of `cfg.methods`.
pub fn run_mse_study_with(cfg: &StudyConfig, estimators: &[&dyn Estimator]) -> Result<StudyResult> {
    cfg.validate()?;
    run_study(cfg, &cfg.truth, cfg.n, estimators, false)
}

/// Adds the RMS of the KS distance between each sample and its fitted law.
pub fn run_ks_study(cfg: &StudyConfig) -> Result<StudyResult> {
    run_ks_study_with(cfg, &method_refs(&cfg.methods))
}

pub fn run_ks_study_with(cfg: &StudyConfig, estimators: &[&dyn Estimator]) -> Result<StudyResult> {
    cfg.validate()?;
    run_study(cfg, &cfg.truth, cfg.n, estimators, true)
}

/// One MSE study per sample size.
pub fn run_sample_size_study(cfg: &StudyConfig, sizes: &[usize]) -> Result<Vec<StudyResult>> {
    cfg.validate()?;
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidStudy("sizes must be non-empty and strictly ascending".into()));
    }
    if sizes[0] < MIN_SAMPLE {
        return Err(Error::InvalidStudy(format!("sample size {} below {MIN_SAMPLE}", sizes[0])));
    }
    let est = method_refs(&cfg.methods);
    sizes.iter().map(|&n| run_study(cfg, &cfg.truth, n, &est, false)).collect()
}

/// One study per value of `cfg.sweep`; `with_ks` adds the KS statistic.
pub fn run_parameter_sweep(cfg: &StudyConfig, with_ks: bool) -> Result<Vec<StudyResult>> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidStudy("parameter sweep needs a sweep grid".into()))?;
    let est = method_refs(&cfg.methods);
    sweep
        .values
        .iter()
        .map(|&v| {
            let mut truth = cfg.truth;
            sweep.field.set(&mut truth, v);
            run_study(cfg, &truth, cfg.n, &est, with_ks)
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub const STUDY_CSV_HEADER: &str = "method,parameter,statistic,value,N,L,seed,alpha,beta,gamma,delta";

/// Long-format CSV: one row per (study, method, parameter, statistic).
pub fn study_csv(results: &[StudyResult]) -> String {
    let mut s = String::from(STUDY_CSV_HEADER);
    s.push('\n');
    for r in results {
        let t = &r.truth;
        let tail = format!("{},{},{},{},{},{},{}", r.n, r.replications, r.base_seed, t.alpha, t.beta, t.gamma, t.delta);
        for m in &r.methods {
            if m.skipped {
                let _ = writeln!(s, "{},all,skipped,1,{tail}", m.method);
                continue;
            }
            for st in &m.stats {
                let _ = writeln!(s, "{},{},mse,{},{tail}", m.method, st.parameter, st.mse);
                let _ = writeln!(s, "{},{},abs_bias,{},{tail}", m.method, st.parameter, st.abs_bias);
            }
            if let Some(ks) = m.ks_rms {
                let _ = writeln!(s, "{},all,ks_rms,{ks},{tail}", m.method);
            }
            let _ = writeln!(s, "{},all,failures,{},{tail}", m.method, m.failures);
        }
    }
    s
}

pub fn study_json(results: &[StudyResult]) -> String {
    serde_json::to_string_pretty(results).expect("study results serialize")
}

/// Fixed-width table of MSE ×10⁴ with absolute bias ×10⁴ in parentheses.
pub fn format_table(result: &StudyResult) -> String {
    let t = &result.truth;
    let mut s = format!(
        "S({}, {}, {}, {})  N = {}  L = {}  (values x 1e-4, |bias| in parentheses)\n",
        t.alpha, t.beta, t.gamma, t.delta, result.n, result.replications
    );
    let _ = write!(s, "{:<10}", "method");
    for f in ParamField::ALL {
        let _ = write!(s, "{:>22}", f.name());
    }
    let any_ks = result.methods.iter().any(|m| m.ks_rms.is_some());
    if any_ks {
        let _ = write!(s, "{:>10}", "ks_rms");
    }
    s.push('\n');
    for m in &result.methods {
        let _ = write!(s, "{:<10}", m.method);
        if m.skipped {
            s.push_str("  skipped (outside the method's validity range)\n");
            continue;
        }
        for f in ParamField::ALL {
            let cell = m
                .stat(f)
                .map(|st| format!("{:.3} ({:.3})", st.mse * 1e4, st.abs_bias * 1e4))
                .unwrap_or_default();
            let _ = write!(s, "{cell:>22}");
        }
        if let Some(ks) = m.ks_rms {
            let _ = write!(s, "{ks:>10.5}");
        }
        if m.failures > 0 {
            let _ = write!(s, "  [{} failed]", m.failures);
        }
        s.push('\n');
    }
    s
}
