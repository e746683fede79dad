//! McCulloch's quantile estimator.
//!
//! Five sample quantiles give the shape statistics
//!
//! ```text
//! φ1 = (x.95 − x.05)/(x.75 − x.25)          tail weight, decreasing in α
//! φ2 = (x.95 + x.05 − 2 x.5)/(x.95 − x.05)  skewness, increasing in β
//! φ3 = (x.75 − x.25)/γ
//! φ4 = (δ − x.5)/γ + β tan(πα/2)            (δ in the one-parameterization)
//! ```
//!
//! `φ4` is the negated median of the standardized zero-parameterization law,
//! which stays bounded through α = 1. The lookup tables are tabulated from the
//! quantile function in [`crate::dist`] rather than transcribed.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DistEvalConfig, StableDist};
use crate::error::{Error, Result};
use crate::estimators::{EstimationReport, Method};
use crate::numerics::find_root;
use crate::params::{clamp_to_domain, convert_parameterization, ParamForm, RawEstimate, StableParams};
use crate::sample::Sample;

/// Lowest α the method is defined for.
pub const MIN_ALPHA: f64 = 0.6;
pub const QUANTILE_PROBS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
pub const MIN_SAMPLE: usize = 20;
/// |α̂ − 1| below which the location estimate is flagged as unreliable.
pub const UNIT_ALPHA_CAUTION: f64 = 0.05;

const CACHE_MAGIC: &str = "# stablefit quantile lookup";
const CACHE_VERSION: u32 = 1;
const CACHE_HEADER: &str = "alpha,beta,phi1,phi2,phi3,phi4,valid";

/// The five sample quantiles at [`QUANTILE_PROBS`].
pub fn sample_quantiles(x: &Sample) -> Result<[f64; 5]> {
    if x.len() < MIN_SAMPLE {
        return Err(Error::InsufficientSample { n: x.len(), required: MIN_SAMPLE });
    }
    Ok(QUANTILE_PROBS.map(|p| x.quantile(p)))
}

/// Shape statistics (φ1, φ2) of a quantile vector.
pub fn shape_statistics(q: &[f64; 5]) -> Option<(f64, f64)> {
    let outer = q[4] - q[0];
    let inner = q[3] - q[1];
    if !(inner > 0.0 && outer > 0.0) {
        return None;
    }
    Some((outer / inner, (q[4] + q[0] - 2.0 * q[2]) / outer))
}

/// Evenly spaced tabulation grid over (α, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookupGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
}

impl Default for LookupGrid {
    fn default() -> Self {
        LookupGrid {
            alpha_min: MIN_ALPHA,
            alpha_max: 2.0,
            alpha_step: 0.1,
            beta_min: -1.0,
            beta_max: 1.0,
            beta_step: 0.25,
        }
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParams(format!("bad lookup axis {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n < 1 || n > 10_000 {
        return Err(Error::InvalidParams(format!("lookup axis {lo}:{hi}:{step} has {} nodes", n + 1)));
    }
    // round to the step's decimal grid so 0.6 + 3·0.1 prints as 0.9
    let mut v: Vec<f64> = (0..=n).map(|i| round12(lo + i as f64 * step)).collect();
    if (hi - v[n]).abs() > 1e-9 {
        v.push(hi);
    }
    Ok(v)
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

impl LookupGrid {
    pub fn alphas(&self) -> Result<Vec<f64>> {
        if !(self.alpha_min > 0.0 && self.alpha_max <= 2.0) {
            return Err(Error::InvalidParams("lookup alpha range must lie in (0, 2]".into()));
        }
        axis(self.alpha_min, self.alpha_max, self.alpha_step)
    }

    pub fn betas(&self) -> Result<Vec<f64>> {
        if !(self.beta_min >= -1.0 && self.beta_max <= 1.0) {
            return Err(Error::InvalidParams("lookup beta range must lie in [-1, 1]".into()));
        }
        axis(self.beta_min, self.beta_max, self.beta_step)
    }
}

/// φ1–φ4 tabulated on an (α, β) grid, row-major in α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileLookup {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    phi: [Vec<f64>; 4],
    /// False where the node's quantiles failed to converge; such nodes hold
    /// values interpolated along α from their valid neighbours.
    valid: Vec<bool>,
}

/// The four statistics of the standardized law at one node.
pub fn node_statistics(alpha: f64, beta: f64, cfg: &DistEvalConfig) -> Result<[f64; 4]> {
    let p = StableParams::new(alpha, beta, 1.0, 0.0)?;
    let d = StableDist::new(&p, *cfg)?;
    let mut q = [0.0; 5];
    for (slot, &prob) in q.iter_mut().zip(QUANTILE_PROBS.iter()) {
        *slot = d.quantile(prob)?;
    }
    let (phi1, phi2) = shape_statistics(&q).ok_or_else(|| Error::Quantile("degenerate theoretical quantiles".into()))?;
    let skew = if alpha == 1.0 { 0.0 } else { beta * (FRAC_PI_2 * alpha).tan() };
    Ok([phi1, phi2, q[3] - q[1], -q[2] + skew])
}

/// Tabulates the lookup functions from numerically computed stable quantiles.
pub fn build_lookup(grid: &LookupGrid, cfg: &DistEvalConfig) -> Result<QuantileLookup> {
    let alphas = grid.alphas()?;
    let betas = grid.betas()?;
    let nodes: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    let stats: Vec<Option<[f64; 4]>> = nodes
        .par_iter()
        .map(|&(a, b)| node_statistics(a, b, cfg).ok().filter(|s| s.iter().all(|v| v.is_finite())))
        .collect();
    let mut phi: [Vec<f64>; 4] = Default::default();
    let mut valid = Vec::with_capacity(stats.len());
    for s in &stats {
        valid.push(s.is_some());
        for (j, col) in phi.iter_mut().enumerate() {
            col.push(s.map_or(f64::NAN, |s| s[j]));
        }
    }
    let mut table = QuantileLookup { alphas, betas, phi, valid };
    table.fill_invalid()?;
    Ok(table)
}

impl QuantileLookup {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    fn idx(&self, ia: usize, ib: usize) -> usize {
        ia * self.betas.len() + ib
    }

    /// Stored value of φ_{which+1} at a grid node.
    pub fn node(&self, which: usize, ia: usize, ib: usize) -> f64 {
        self.phi[which][self.idx(ia, ib)]
    }

    pub fn node_valid(&self, ia: usize, ib: usize) -> bool {
        self.valid[self.idx(ia, ib)]
    }

    pub fn invalid_nodes(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    fn fill_invalid(&mut self) -> Result<()> {
        let na = self.alphas.len();
        for ib in 0..self.betas.len() {
            let good: Vec<usize> = (0..na).filter(|&ia| self.valid[self.idx(ia, ib)]).collect();
            if good.is_empty() {
                return Err(Error::Quantile(format!("no valid lookup node at beta = {}", self.betas[ib])));
            }
            for ia in 0..na {
                if self.valid[self.idx(ia, ib)] {
                    continue;
                }
                let below = good.iter().rev().find(|&&g| g < ia).copied();
                let above = good.iter().find(|&&g| g > ia).copied();
                for j in 0..4 {
                    let v = match (below, above) {
                        (Some(l), Some(u)) => {
                            let t = (self.alphas[ia] - self.alphas[l]) / (self.alphas[u] - self.alphas[l]);
                            self.phi[j][self.idx(l, ib)] * (1.0 - t) + self.phi[j][self.idx(u, ib)] * t
                        }
                        (Some(l), None) => self.phi[j][self.idx(l, ib)],
                        (None, Some(u)) => self.phi[j][self.idx(u, ib)],
                        (None, None) => unreachable!(),
                    };
                    let k = self.idx(ia, ib);
                    self.phi[j][k] = v;
                }
            }
        }
        Ok(())
    }

    fn locate(axis: &[f64], v: f64) -> (usize, f64) {
        let n = axis.len();
        if v <= axis[0] {
            return (0, 0.0);
        }
        if v >= axis[n - 1] {
            return (n - 2, 1.0);
        }
        let i = axis.partition_point(|&a| a <= v) - 1;
        let i = i.min(n - 2);
        (i, (v - axis[i]) / (axis[i + 1] - axis[i]))
    }

    /// Bilinear interpolation of φ_{which+1}, clamped to the grid.
    pub fn interpolate(&self, which: usize, alpha: f64, beta: f64) -> f64 {
        let (ia, ta) = Self::locate(&self.alphas, alpha);
        let (ib, tb) = Self::locate(&self.betas, beta);
        let f = |i, j| self.phi[which][self.idx(i, j)];
        let lo = f(ia, ib) * (1.0 - tb) + f(ia, ib + 1) * tb;
        let hi = f(ia + 1, ib) * (1.0 - tb) + f(ia + 1, ib + 1) * tb;
        lo * (1.0 - ta) + hi * ta
    }

    fn alpha_range(&self) -> (f64, f64) {
        (self.alphas[0], self.alphas[self.alphas.len() - 1])
    }

    /// α solving `Φ1(α, β) = phi1` at fixed β, clamped to the table.
    fn alpha_for(&self, phi1: f64, beta: f64) -> f64 {
        let (a_lo, a_hi) = self.alpha_range();
        let h = |a: f64| self.interpolate(0, a, beta) - phi1;
        let (h_lo, h_hi) = (h(a_lo), h(a_hi));
        if h_lo <= 0.0 && h_hi <= 0.0 {
            return if h_lo >= h_hi { a_lo } else { a_hi };
        }
        if h_lo >= 0.0 && h_hi >= 0.0 {
            return if h_lo <= h_hi { a_lo } else { a_hi };
        }
        find_root(h, a_lo, a_hi, 1e-12).map(|r| r.root).unwrap_or(a_lo)
    }

    /// Inverts (φ̂1, φ̂2) to (α̂, β̂) by nested one-dimensional solves on the
    /// interpolated surfaces.
    pub fn invert(&self, phi1: f64, phi2: f64) -> Inversion {
        let (a_lo, a_hi) = self.alpha_range();
        let gauss_phi1 = (0..self.betas.len())
            .map(|ib| self.node(0, self.alphas.len() - 1, ib))
            .fold(f64::INFINITY, f64::min);
        if a_hi >= 2.0 && phi1 <= gauss_phi1 {
            return Inversion { alpha: 2.0, beta: 0.0, beta_identified: false, alpha_floor_hit: false, beta_edge_hit: false };
        }
        let (b_lo, b_hi) = (self.betas[0], self.betas[self.betas.len() - 1]);
        let h = |b: f64| self.interpolate(1, self.alpha_for(phi1, b), b) - phi2;
        let (h_lo, h_hi) = (h(b_lo), h(b_hi));
        let (beta, edge) = if h_lo.signum() == h_hi.signum() && h_lo != 0.0 && h_hi != 0.0 {
            (if h_lo.abs() <= h_hi.abs() { b_lo } else { b_hi }, true)
        } else {
            (find_root(h, b_lo, b_hi, 1e-12).map(|r| r.root).unwrap_or(0.0), false)
        };
        let alpha = self.alpha_for(phi1, beta);
        Inversion {
            alpha,
            beta,
            beta_identified: true,
            alpha_floor_hit: alpha <= a_lo && self.interpolate(0, a_lo, beta) < phi1,
            beta_edge_hit: edge,
        }
    }

    /// Serializes to the versioned cache format.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CACHE_MAGIC} v{CACHE_VERSION}\n{CACHE_HEADER}\n");
        for (ia, a) in self.alphas.iter().enumerate() {
            for (ib, b) in self.betas.iter().enumerate() {
                let k = self.idx(ia, ib);
                let _ = writeln!(
                    s,
                    "{a},{b},{},{},{},{},{}",
                    self.phi[0][k], self.phi[1][k], self.phi[2][k], self.phi[3][k], self.valid[k] as u8
                );
            }
        }
        s
    }

    /// Parses the cache format written by [`QuantileLookup::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.splitn(2, '\n');
        let first = lines.next().unwrap_or("").trim_end_matches('\r');
        let version = first
            .strip_prefix(CACHE_MAGIC)
            .and_then(|rest| rest.trim().strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::Parse("not a quantile lookup cache (bad first line)".into()))?;
        if version != CACHE_VERSION {
            return Err(Error::Parse(format!("unsupported lookup cache version {version}")));
        }
        let body = lines.next().unwrap_or("");
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>().join(",") != CACHE_HEADER {
            return Err(Error::Parse(format!("unexpected lookup cache header '{}'", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut rows: Vec<[f64; 6]> = Vec::new();
        let mut valid = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 7 {
                return Err(Error::Parse(format!("row {}: expected 7 fields, found {}", line + 1, rec.len())));
            }
            let mut r = [0.0; 6];
            for (j, slot) in r.iter_mut().enumerate() {
                *slot = rec[j]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: field {} is not a number", line + 1, j + 1)))?;
            }
            valid.push(match rec[6].trim() {
                "1" => true,
                "0" => false,
                other => return Err(Error::Parse(format!("row {}: bad valid flag '{other}'", line + 1))),
            });
            rows.push(r);
        }
        if rows.is_empty() {
            return Err(Error::Parse("lookup cache has no rows".into()));
        }
        let mut betas: Vec<f64> = Vec::new();
        for r in &rows {
            if r[0] != rows[0][0] {
                break;
            }
            betas.push(r[1]);
        }
        let nb = betas.len();
        if rows.len() % nb != 0 {
            return Err(Error::Parse("lookup cache is not a full grid".into()));
        }
        let alphas: Vec<f64> = rows.iter().step_by(nb).map(|r| r[0]).collect();
        for (k, r) in rows.iter().enumerate() {
            if r[0] != alphas[k / nb] || r[1] != betas[k % nb] {
                return Err(Error::Parse(format!("row {}: grid order broken", k + 1)));
            }
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if alphas.len() < 2 || nb < 2 || !increasing(&alphas) || !increasing(&betas) {
            return Err(Error::Parse("lookup grid axes must have at least two increasing nodes".into()));
        }
        if alphas[0] <= 0.0 || alphas[alphas.len() - 1] > 2.0 || betas[0] < -1.0 || betas[nb - 1] > 1.0 {
            return Err(Error::Parse("lookup grid outside the parameter space".into()));
        }
        if rows.iter().any(|r| r[2..].iter().any(|v| !v.is_finite())) {
            return Err(Error::Parse("lookup cache holds non-finite values".into()));
        }
        let mut phi: [Vec<f64>; 4] = Default::default();
        for r in &rows {
            for j in 0..4 {
                phi[j].push(r[2 + j]);
            }
        }
        Ok(QuantileLookup { alphas, betas, phi, valid })
    }

    pub fn write_cache(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_csv(&text)
    }

    /// Reads `path` if it holds a valid cache, otherwise builds the default
    /// table and writes it there.
    pub fn load_or_build(path: &Path, cfg: &DistEvalConfig) -> Result<Self> {
        if path.exists() {
            return Self::read_cache(path);
        }
        let table = build_lookup(&LookupGrid::default(), cfg)?;
        table
            .write_cache(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub alpha: f64,
    pub beta: f64,
    pub beta_identified: bool,
    /// φ̂1 lies beyond the lowest tabulated α.
    pub alpha_floor_hit: bool,
    /// φ̂2 lies outside the tabulated β range.
    pub beta_edge_hit: bool,
}

/// The table for the default grid, built once per process.
pub fn default_lookup() -> &'static QuantileLookup {
    static TABLE: OnceLock<QuantileLookup> = OnceLock::new();
    TABLE.get_or_init(|| {
        build_lookup(&LookupGrid::default(), &DistEvalConfig::default()).expect("default quantile lookup builds")
    })
}

/// Fits all four parameters from five sample quantiles.
pub fn fit_quantile(x: &Sample, table: &QuantileLookup) -> Result<EstimationReport> {
    let q = sample_quantiles(x)?;
    let (phi1, phi2) =
        shape_statistics(&q).ok_or_else(|| Error::Quantile("sample quantiles are tied; no spread to fit".into()))?;
    let inv = table.invert(phi1, phi2);
    let (alpha, beta) = (inv.alpha, inv.beta);
    let phi3 = table.interpolate(2, alpha, beta);
    let phi4 = table.interpolate(3, alpha, beta);
    let gamma = (q[3] - q[1]) / phi3;
    let delta0 = q[2] + gamma * phi4;
    let zero = StableParams::with_form(alpha, beta, gamma.max(f64::MIN_POSITIVE), delta0, ParamForm::ZeroParam)?;
    let delta = convert_parameterization(&zero, ParamForm::OneParam).delta;
    let clamp = clamp_to_domain(RawEstimate { alpha, beta, gamma, delta })?;
    let mut report = EstimationReport::new(Method::Quantile, clamp, x.len());
    if !inv.beta_identified {
        report
            .warnings
            .push(format!("tail statistic {phi1:.4} at or below the Gaussian value: alpha = 2, beta not identified (reported as 0)"));
    }
    if inv.alpha_floor_hit {
        report.warnings.push(format!(
            "tail statistic {phi1:.4} beyond the table: alpha below {MIN_ALPHA}, outside the method's validity"
        ));
    }
    if inv.beta_edge_hit {
        report.warnings.push(format!("skewness statistic {phi2:.4} outside the table; beta set to the border"));
    }
    if (alpha - 1.0).abs() < UNIT_ALPHA_CAUTION {
        report.warnings.push(format!("alpha estimate {alpha:.4} near 1: location estimate is unreliable"));
    }
    Ok(report)
}
