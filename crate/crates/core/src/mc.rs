//! Monte Carlo ensembles of random OPUC combinations `P_n = sum eta_k phi_k`.
//!
//! Trial `t` draws its coefficients from a generator keyed by
//! `seed ^ splitmix64(t)`, so counts never depend on how trials are scheduled.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpoly::ComplexPoly;
use crate::error::{Error, Result};
use crate::opuc::{regularity_report, OpucBasis};
use crate::zerocount::{self, Region};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// One trial in `AUDIT_STRIDE` is recounted by the argument principle.
pub const AUDIT_STRIDE: usize = 100;

/// Excluded trials may not exceed `trials / EXCLUSION_DIVISOR`.
pub const EXCLUSION_DIVISOR: usize = 1000;

const BOOTSTRAP_SALT: u64 = 0xB007_5EED_0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffModel {
    /// Independent real and imaginary parts of variance 1/2.
    ComplexGaussian,
    /// Uniform on the disk of radius `sqrt(2)`.
    UniformDisk,
    /// Uniform on `{(+-1 +- i) / sqrt(2)}`.
    Quaternary,
}

impl CoeffModel {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            CoeffModel::ComplexGaussian => {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                Complex64::new(a * h, b * h)
            }
            CoeffModel::UniformDisk => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                Complex64::from_polar((2.0 * u).sqrt(), TAU * v)
            }
            CoeffModel::Quaternary => {
                let bits: u8 = rng.random();
                let re = if bits & 1 == 0 { h } else { -h };
                let im = if bits & 2 == 0 { h } else { -h };
                Complex64::new(re, im)
            }
        }
    }
}

impl fmt::Display for CoeffModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffModel::ComplexGaussian => "gaussian",
            CoeffModel::UniformDisk => "uniform_disk",
            CoeffModel::Quaternary => "quaternary",
        })
    }
}

impl FromStr for CoeffModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "complex_gaussian" => Ok(CoeffModel::ComplexGaussian),
            "uniform_disk" | "uniform" => Ok(CoeffModel::UniformDisk),
            "quaternary" => Ok(CoeffModel::Quaternary),
            other => Err(Error::Parse(format!(
                "unknown coefficient model '{other}' (gaussian, uniform_disk, quaternary)"
            ))),
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ splitmix64(trial)
}

/// `eta_0 .. eta_n` for one trial.
pub fn draw_coefficients(model: CoeffModel, n: usize, trial_seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    (0..=n).map(|_| model.draw(&mut rng)).collect()
}

/// `sum_k eta_k phi_k` in monomial coefficients.
pub fn combine(basis: &OpucBasis, etas: &[Complex64]) -> ComplexPoly {
    let n = basis.degree();
    assert_eq!(etas.len(), n + 1, "need one coefficient per basis element");
    let mut acc = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, &eta) in etas.iter().enumerate() {
        for (a, &c) in acc.iter_mut().zip(basis.phi(k).coeffs()) {
            *a += eta * c;
        }
    }
    ComplexPoly::new(acc)
}

pub fn sample_poly(basis: &OpucBasis, model: CoeffModel, trial_seed: u64) -> ComplexPoly {
    combine(basis, &draw_coefficients(model, basis.degree(), trial_seed))
}

/// Argument-principle recount of the audited trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checked: usize,
    pub agreed: usize,
    pub boundary_flagged: usize,
    pub disagreed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_mean: f64,
    /// Bootstrap standard error of `variance`.
    pub se_var: f64,
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub region: Region,
    /// Trial indices whose root computation failed.
    pub excluded: Vec<usize>,
    pub audit: AuditReport,
}

/// `(mean, unbiased variance)`.
pub fn mean_and_variance(counts: &[usize]) -> (f64, f64) {
    let m = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / m;
    if counts.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
    (mean, ss / (m - 1.0))
}

/// Standard deviation of the unbiased variance over bootstrap resamples.
pub fn bootstrap_se_var(counts: &[usize], resamples: usize, seed: u64) -> f64 {
    let m = counts.len();
    if m < 2 || resamples < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BOOTSTRAP_SALT);
    let mut draw = vec![0usize; m];
    let vars: Vec<f64> = (0..resamples)
        .map(|_| {
            for d in draw.iter_mut() {
                *d = counts[rng.random_range(0..m)];
            }
            mean_and_variance(&draw).1
        })
        .collect();
    mean_and_variance_f64(&vars).1.sqrt()
}

fn mean_and_variance_f64(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / (m - 1.0))
}

enum TrialOutcome {
    Counted { counts: Vec<usize>, audit: Vec<AuditMark> },
    Excluded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AuditMark {
    Skipped,
    Agreed,
    Flagged,
    Disagreed,
}

fn run_trial(basis: &OpucBasis, model: CoeffModel, regions: &[Region], seed: u64, t: usize) -> Result<TrialOutcome> {
    let p = sample_poly(basis, model, trial_seed(seed, t as u64));
    let zs = match zerocount::roots(&p) {
        Ok(zs) => zs,
        Err(Error::NoConvergence(_)) | Err(Error::DegenerateLeadingCoefficient(_)) => {
            return Ok(TrialOutcome::Excluded)
        }
        Err(e) => return Err(e),
    };
    let counts: Vec<usize> = regions.iter().map(|r| zerocount::count_in_region(&zs, r)).collect();
    let audit = regions
        .iter()
        .zip(&counts)
        .map(|(r, &c)| {
            if !t.is_multiple_of(AUDIT_STRIDE) {
                return AuditMark::Skipped;
            }
            match zerocount::count_by_argument_principle(&p, r) {
                Ok(k) if k == c => AuditMark::Agreed,
                Ok(_) => AuditMark::Disagreed,
                Err(_) => AuditMark::Flagged,
            }
        })
        .collect();
    Ok(TrialOutcome::Counted { counts, audit })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!("trials must be at least 2, got {trials}")));
    }
    Ok(())
}

/// One ensemble counted in several regions; roots are computed once per trial.
///
/// Runs on the current rayon pool. Results are merged in trial order.
pub fn run_ensemble_regions(
    basis: &OpucBasis,
    model: CoeffModel,
    regions: &[Region],
    trials: usize,
    seed: u64,
) -> Result<Vec<EnsembleStats>> {
    check_trials(trials)?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(basis, model, regions, seed, t))
        .collect();
    let mut excluded = Vec::new();
    let mut per_region: Vec<Vec<usize>> = vec![Vec::with_capacity(trials); regions.len()];
    let mut audits = vec![AuditReport::default(); regions.len()];
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            TrialOutcome::Excluded => excluded.push(t),
            TrialOutcome::Counted { counts, audit } => {
                for (i, (c, mark)) in counts.into_iter().zip(audit).enumerate() {
                    per_region[i].push(c);
                    let a = &mut audits[i];
                    match mark {
                        AuditMark::Skipped => continue,
                        AuditMark::Agreed => a.agreed += 1,
                        AuditMark::Flagged => a.boundary_flagged += 1,
                        AuditMark::Disagreed => a.disagreed += 1,
                    }
                    a.checked += 1;
                }
            }
        }
    }
    let budget = trials / EXCLUSION_DIVISOR;
    if excluded.len() > budget {
        return Err(Error::TooManyExclusions {
            excluded: excluded.len(),
            trials,
            budget,
        });
    }
    Ok(regions
        .iter()
        .zip(per_region)
        .zip(audits)
        .map(|((region, counts), audit)| {
            let (mean, variance) = mean_and_variance(&counts);
            EnsembleStats {
                se_mean: (variance / counts.len() as f64).sqrt(),
                se_var: bootstrap_se_var(&counts, BOOTSTRAP_RESAMPLES, seed),
                mean,
                variance,
                counts,
                seed,
                n: basis.degree(),
                trials,
                region: *region,
                excluded: excluded.clone(),
                audit,
            }
        })
        .collect())
}

pub fn run_ensemble(basis: &OpucBasis, model: CoeffModel, region: &Region, trials: usize, seed: u64) -> Result<EnsembleStats> {
    Ok(run_ensemble_regions(basis, model, std::slice::from_ref(region), trials, seed)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `E |N_n / n - (beta - alpha) / 2 pi|`.
    pub mean_abs_dev: f64,
    pub var_over_n2: f64,
    pub envelope_sqrtlogn: f64,
    pub envelope_eps14: f64,
    pub mean: f64,
    pub variance: f64,
    pub excluded: usize,
}

/// `sqrt(log n / n)`.
pub fn envelope_sqrtlogn(n: usize) -> f64 {
    let n = n as f64;
    (n.ln() / n).sqrt()
}

/// Sector-count concentration across degrees, with the reference envelopes.
///
/// `basis` must hold the largest degree in `ns`; smaller degrees use its truncations.
pub fn convergence_study(
    basis: &OpucBasis,
    model: CoeffModel,
    region: &Region,
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if !matches!(region, Region::Sector { .. }) {
        return Err(Error::InvalidRegion("convergence study needs a sector".into()));
    }
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] < 2 {
        return Err(Error::InvalidArgument(format!("ns must be strictly increasing and >= 2, got {ns:?}")));
    }
    let top = *ns.last().unwrap();
    if top > basis.degree() {
        return Err(Error::InsufficientCoefficients {
            needed: top,
            got: basis.degree(),
        });
    }
    let report = regularity_report(basis.alphas(), top)?;
    let target = region.angular_fraction();
    ns.iter()
        .map(|&n| {
            let b = basis.truncated(n);
            let stats = run_ensemble(&b, model, region, trials, seed)?;
            let nf = n as f64;
            let dev = stats
                .counts
                .iter()
                .map(|&c| (c as f64 / nf - target).abs())
                .sum::<f64>()
                / stats.counts.len() as f64;
            let sl = envelope_sqrtlogn(n);
            let eps = report.epsilons[n - 1].max(0.0);
            Ok(ConvergenceRow {
                n,
                mean_abs_dev: dev,
                var_over_n2: stats.variance / (nf * nf),
                envelope_sqrtlogn: sl,
                envelope_eps14: sl.max(eps.powf(0.25)),
                mean: stats.mean,
                variance: stats.variance,
                excluded: stats.excluded.len(),
            })
        })
        .collect()
}
