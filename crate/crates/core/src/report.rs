//! Fit reports for real data series: return transform, prescaling, fitting,
//! goodness of fit, and JSON/CSV serialization.

use serde::{Deserialize, Serialize};

use crate::data::ReturnSpec;
use crate::dist::{DistEvalConfig, StableDist};
use crate::error::{Error, Result};
use crate::estimators::{EstimationReport, Method};
use crate::params::{ParamField, ParamForm, StableParams};
use crate::quantile::{fit_quantile, QuantileLookup, MIN_SAMPLE};
use crate::sample::Sample;

pub const FIT_SCHEMA_VERSION: u32 = 1;

pub const FIT_CSV_HEADER: &str = "method,alpha,beta,gamma,delta,ks,k0,k1,eta,n,clamped,warnings";

/// One fitted law in the units of the original series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub schema_version: u32,
    pub method: Method,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// KS distance between the series and the fitted law.
    pub ks: f64,
    pub k0: Option<f64>,
    pub k1: Option<f64>,
    pub eta: Option<f64>,
    pub n: usize,
    pub clamped: Vec<ParamField>,
    pub warnings: Vec<String>,
}

impl FitRecord {
    pub fn params(&self) -> StableParams {
        StableParams { alpha: self.alpha, beta: self.beta, gamma: self.gamma, delta: self.delta, form: ParamForm::OneParam }
    }
}

/// Fits `x` with `method`, using `table` for the quantile method.
pub fn fit_with_table(x: &Sample, method: Method, table: &QuantileLookup) -> Result<EstimationReport> {
    match method {
        Method::Quantile => fit_quantile(x, table),
        m => m.fit(x),
    }
}

/// Turns a fit on prescaled data into a record in original units: γ, δ are
/// divided by `prescale` and the frequencies multiplied by it. The KS
/// distance is scale-free and is computed on the prescaled data.
pub fn fit_record(report: &EstimationReport, scaled: &Sample, prescale: f64, ks_eval: DistEvalConfig) -> Result<FitRecord> {
    let p = report.params;
    let ks = StableDist::new(&p, ks_eval)?.ks_distance(scaled);
    Ok(FitRecord {
        schema_version: FIT_SCHEMA_VERSION,
        method: report.method,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma / prescale,
        delta: p.delta / prescale,
        ks,
        k0: report.points.map(|t| t.k0 * prescale),
        k1: report.points.map(|t| t.k1 * prescale),
        eta: report.eta,
        n: report.n,
        clamped: report.clamp.clamped.clone(),
        warnings: report.warnings.clone(),
    })
}

/// Applies `spec` to a raw series and checks the result is fit for estimation.
pub fn prepare_series(series: &[f64], spec: &ReturnSpec) -> Result<Sample> {
    let v = spec.apply(series)?;
    if v.len() < MIN_SAMPLE {
        return Err(Error::InsufficientSample { n: v.len(), required: MIN_SAMPLE });
    }
    Sample::new(v)
}

/// Fits every method in `methods` to the transformed series. Results keep
/// the order of `methods`; a failing method does not stop the others.
pub fn fit_series(
    series: &[f64],
    spec: &ReturnSpec,
    methods: &[Method],
    table: &QuantileLookup,
    ks_eval: DistEvalConfig,
) -> Result<Vec<(Method, Result<FitRecord>)>> {
    let x = prepare_series(series, spec)?;
    Ok(methods
        .iter()
        .map(|&m| {
            let rec = fit_with_table(&x, m, table).and_then(|r| fit_record(&r, &x, spec.prescale, ks_eval));
            (m, rec)
        })
        .collect())
}

pub fn fit_json(records: &[FitRecord]) -> String {
    serde_json::to_string_pretty(records).expect("fit records serialize")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with [`FIT_CSV_HEADER`]; list fields are joined with `;`.
pub fn fit_csv(records: &[FitRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIT_CSV_HEADER.split(',')).expect("write to memory");
    for r in records {
        let clamped: Vec<&str> = r.clamped.iter().map(|f| f.name()).collect();
        w.write_record([
            r.method.name().to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.gamma.to_string(),
            r.delta.to_string(),
            r.ks.to_string(),
            opt(r.k0),
            opt(r.k1),
            opt(r.eta),
            r.n.to_string(),
            clamped.join(";"),
            r.warnings.join("; "),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}
