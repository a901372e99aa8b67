//! Exponential-decay fits of tail estimates, parameter scans and Monte Carlo domination
//! probes.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::EdgeConfig;
use crate::couplings::{critical_x_conjectured, epsilon_of};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::mcmc::{batch_means, estimate_tail, SamplerConfig, Statistic, TailEstimate};

/// Fewest surviving samples for a k to enter a fit.
pub const MIN_SURVIVORS: u64 = 50;
/// Fewest usable k values for a fit.
pub const MIN_FIT_POINTS: usize = 4;
/// k values this close to k_max are dropped (one hexagon perimeter).
pub const TRUNCATION_MARGIN: usize = 6;
/// z-score beyond which a probe reports a violation.
pub const PROBE_SIGMAS: f64 = 3.0;

/// Least-squares fit of ln P(stat ≥ k) ≈ ln C − c k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    /// 95% interval for the rate.
    pub ci: (f64, f64),
    /// First and last k used.
    pub k_range: (usize, usize),
    pub points: usize,
    /// Weighted residual variance.
    pub residual: f64,
    /// The interval lies strictly above zero.
    pub decays: bool,
}

/// Fits the usable part of a tail: 1 ≤ k ≤ k_max − 6 with at least 50 survivors.
///
/// Weights are inverse variances of ln P from the standard errors; with any zero standard
/// error the fit is unweighted. The covariance is scaled by the residual variance, floored
/// at one for weighted fits so that overdispersed errors never shrink the interval.
pub fn fit_decay(tail: &TailEstimate) -> Result<DecayFit> {
    let last = tail.k_max().saturating_sub(TRUNCATION_MARGIN);
    let ks: Vec<usize> = (1..=last)
        .filter(|&k| tail.survivors[k] >= MIN_SURVIVORS && tail.estimates[k] > 0.0)
        .collect();
    if ks.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable k values (need {MIN_FIT_POINTS} with at least {MIN_SURVIVORS} survivors and k <= k_max - {TRUNCATION_MARGIN})",
            ks.len()
        )));
    }
    let weighted = ks.iter().all(|&k| tail.stderr[k] > 0.0);
    let pts: Vec<(f64, f64, f64)> = ks
        .iter()
        .map(|&k| {
            let p = tail.estimates[k];
            let w = if weighted { (p / tail.stderr[k]).powi(2) } else { 1.0 };
            (k as f64, p.ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let kbar = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ybar = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - kbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - kbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * kbar;
    let dof = (pts.len() - 2) as f64;
    let residual = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / dof;
    let scale = if weighted { residual.max(1.0) } else { residual };
    let se = (scale / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    // Tiny negative slopes from rounding of a flat tail read as zero.
    let rate = if slope.abs() < 1e-15 { 0.0 } else { -slope };
    let ci = (rate - t * se, rate + t * se);
    Ok(DecayFit {
        rate,
        prefactor: intercept.exp(),
        ci,
        k_range: (ks[0], ks[ks.len() - 1]),
        points: ks.len(),
        residual,
        decays: ci.0 > 0.0,
    })
}

/// One scanned parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub n: f64,
    pub x: f64,
    pub fit: Option<DecayFit>,
    /// Why no fit is available.
    pub error: Option<String>,
    pub faces: usize,
    /// Conjectured critical point (n ≤ 2 only).
    pub x_c: Option<f64>,
    pub inv_sqrt3: f64,
    /// 1/√3 + ε(n).
    pub threshold: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanResult {
    pub radius: u32,
    pub points: Vec<ScanPoint>,
}

fn point_seed(seed: u64, i: u64) -> u64 {
    // splitmix64 step, so neighbouring points get unrelated streams.
    let mut z = seed.wrapping_add((i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// R-tail fit at each grid point on hex_ball(radius).
pub fn scan(grid: &[(f64, f64)], radius: u32, k_max: usize, cfg: &SamplerConfig) -> Result<ScanResult> {
    for &(n, x) in grid {
        if !(n > 1.0) {
            return Err(Error::OutOfRange { name: "n", value: n, expected: "n > 1" });
        }
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfRange { name: "x", value: x, expected: "0 < x < 1" });
        }
    }
    cfg.validate()?;
    let domain = Domain::hex_ball(radius);
    let k_max = k_max.min(domain.num_edges());
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(n, x))| {
            let point_cfg = SamplerConfig { seed: point_seed(cfg.seed, i as u64), ..*cfg };
            let fit = estimate_tail(&domain, n, x, Statistic::MaxLoop, k_max, &point_cfg).and_then(|t| fit_decay(&t));
            let inv_sqrt3 = 1.0 / 3f64.sqrt();
            Ok(ScanPoint {
                n,
                x,
                error: fit.as_ref().err().map(ToString::to_string),
                fit: fit.ok(),
                faces: domain.num_faces(),
                x_c: critical_x_conjectured(n).ok(),
                inv_sqrt3,
                threshold: inv_sqrt3 + epsilon_of(n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { radius, points })
}

/// Monotone statistics compared by [`domination_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "edge", rename_all = "snake_case")]
pub enum ProbeStatistic {
    OpenEdges,
    ClusterSize,
    MaxLoop,
    EdgeOpen(usize),
}

impl ProbeStatistic {
    pub fn evaluate(self, domain: &Domain, cfg: &EdgeConfig) -> Result<f64> {
        Ok(match self {
            ProbeStatistic::OpenEdges => cfg.count_open() as f64,
            ProbeStatistic::ClusterSize => Statistic::ClusterSize.evaluate(domain, cfg)? as f64,
            ProbeStatistic::MaxLoop => Statistic::MaxLoop.evaluate(domain, cfg)? as f64,
            ProbeStatistic::EdgeOpen(e) => {
                if e >= domain.num_edges() {
                    return Err(Error::InvalidArgument(format!("edge {e} is not in the domain")));
                }
                f64::from(u8::from(cfg.get(e)))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeComparison {
    pub statistic: ProbeStatistic,
    pub mean_lower: f64,
    pub se_lower: f64,
    pub mean_upper: f64,
    pub se_upper: f64,
    /// (mean_lower − mean_upper) / combined standard error; positive values contradict the
    /// expected ordering.
    pub z: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub comparisons: Vec<ProbeComparison>,
    pub violations: usize,
    pub samples_lower: usize,
    pub samples_upper: usize,
}

fn collect_stats(
    domain: &Domain,
    samples: impl IntoIterator<Item = EdgeConfig>,
    stats: &[ProbeStatistic],
) -> Result<Vec<Vec<f64>>> {
    let mut columns = vec![Vec::new(); stats.len()];
    for cfg in samples {
        if cfg.domain_id() != domain.id() {
            return Err(Error::DomainMismatch);
        }
        for (col, s) in columns.iter_mut().zip(stats) {
            col.push(s.evaluate(domain, &cfg)?);
        }
    }
    Ok(columns)
}

/// Two-sample z-tests of E_lower[f] ≤ E_upper[f] for each statistic, with batch-means
/// standard errors on each stream.
pub fn domination_probe(
    domain: &Domain,
    lower: impl IntoIterator<Item = EdgeConfig>,
    upper: impl IntoIterator<Item = EdgeConfig>,
    stats: &[ProbeStatistic],
) -> Result<ProbeReport> {
    let lo = collect_stats(domain, lower, stats)?;
    let hi = collect_stats(domain, upper, stats)?;
    let samples_lower = lo.first().map_or(0, Vec::len);
    let samples_upper = hi.first().map_or(0, Vec::len);
    if stats.is_empty() || samples_lower == 0 || samples_upper == 0 {
        return Err(Error::InsufficientData("probe needs statistics and samples on both sides".into()));
    }
    let comparisons: Vec<ProbeComparison> = stats
        .iter()
        .zip(lo.into_iter().zip(hi))
        .map(|(&statistic, (a, b))| {
            let (mean_lower, se_lower) = batch_means(&[a]);
            let (mean_upper, se_upper) = batch_means(&[b]);
            let diff = mean_lower - mean_upper;
            let se = se_lower.hypot(se_upper);
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            ProbeComparison { statistic, mean_lower, se_lower, mean_upper, se_upper, z, violation: z > PROBE_SIGMAS }
        })
        .collect();
    let violations = comparisons.iter().filter(|c| c.violation).count();
    Ok(ProbeReport { comparisons, violations, samples_lower, samples_upper })
}
