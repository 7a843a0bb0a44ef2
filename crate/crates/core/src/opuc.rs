//! Orthonormal polynomials on the unit circle.
//!
//! Bases are generated from Verblunsky coefficients through the Szegő recursion
//!
//! ```text
//! phi_{j+1}(z) = (z phi_j(z) - conj(alpha_j) phi_j^*(z)) / sqrt(1 - |alpha_j|^2)
//! ```
//!
//! or from an absolutely continuous weight, whose trigonometric moments are
//! inverted back to Verblunsky coefficients by a Levinson-type recursion on the
//! monic polynomials.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cpoly::ComplexPoly;
use crate::error::{Error, Result};

/// Smallest Levinson pivot (relative to `c_0`) accepted as positive.
pub const LEVINSON_PIVOT_FLOOR: f64 = 1e-13;

/// Moments must change by less than this under node doubling.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

const MAX_MOMENT_NODES: usize = 1 << 24;

/// Radius of the circle on which the Nevai-class proxy is probed.
pub const NEVAI_PROBE_RADIUS: f64 = 0.5;
const NEVAI_PROBE_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerblunskySeq(Vec<Complex64>);

impl VerblunskySeq {
    /// Checks `|alpha_j| < 1` for every entry.
    pub fn new(alphas: Vec<Complex64>) -> Result<Self> {
        for (index, a) in alphas.iter().enumerate() {
            let modulus = a.norm();
            if !(modulus < 1.0) {
                return Err(Error::InvalidVerblunsky { index, modulus });
            }
        }
        Ok(Self(alphas))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|a| a.im == 0.0)
    }

    /// Parses the text format: one `re im` pair per line, `#` starts a comment line.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut alphas = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64> {
                let tok = parts.next().ok_or_else(|| {
                    Error::Parse(format!("line {}: missing {what} part", lineno + 1))
                })?;
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{tok}'", lineno + 1)))
            };
            let re = next("real")?;
            let im = next("imaginary")?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: expected 're im'", lineno + 1)));
            }
            alphas.push(Complex64::new(re, im));
        }
        Self::new(alphas)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# re im\n");
        for a in &self.0 {
            out.push_str(&format!("{:e} {:e}\n", a.re, a.im));
        }
        out
    }
}

/// Leading coefficient `kappa_k = prod_{j<k} (1 - |alpha_j|^2)^{-1/2}`.
pub fn kappa_product(alphas: &VerblunskySeq, k: usize) -> Result<f64> {
    if alphas.len() < k {
        return Err(Error::InsufficientCoefficients {
            needed: k,
            got: alphas.len(),
        });
    }
    let mut kappa = 1.0;
    for (index, a) in alphas.as_slice()[..k].iter().enumerate() {
        let modulus = a.norm();
        if !(modulus < 1.0) {
            return Err(Error::InvalidVerblunsky { index, modulus });
        }
        kappa /= (1.0 - a.norm_sqr()).sqrt();
    }
    Ok(kappa)
}

/// Values of `phi_k`, `phi_k^*` and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub phi: Complex64,
    pub star: Complex64,
    pub dphi: Complex64,
    pub dstar: Complex64,
}

/// `phi_0..phi_n` together with reversals, derivatives and leading coefficients.
#[derive(Debug, Clone)]
pub struct OpucBasis {
    phis: Vec<ComplexPoly>,
    phistars: Vec<ComplexPoly>,
    dphis: Vec<ComplexPoly>,
    dphistars: Vec<ComplexPoly>,
    kappas: Vec<f64>,
    alphas: VerblunskySeq,
}

impl OpucBasis {
    /// Runs the Szegő recursion through degree `n` using `alphas[0..n]`.
    pub fn szego_build(alphas: &VerblunskySeq, n: usize) -> Result<Self> {
        if alphas.len() < n {
            return Err(Error::InsufficientCoefficients {
                needed: n,
                got: alphas.len(),
            });
        }
        let used = VerblunskySeq::new(alphas.as_slice()[..n].to_vec())?;
        let mut phis = Vec::with_capacity(n + 1);
        let mut phistars = Vec::with_capacity(n + 1);
        let mut kappas = Vec::with_capacity(n + 1);
        phis.push(ComplexPoly::one());
        phistars.push(ComplexPoly::one());
        kappas.push(1.0);
        for (j, &alpha) in used.as_slice().iter().enumerate() {
            let rho = (1.0 - alpha.norm_sqr()).sqrt();
            let inv = Complex64::new(1.0 / rho, 0.0);
            let zphi = phis[j].shift_up();
            let star = phistars[j].padded(j + 1);
            let next = ComplexPoly::linear_combination(inv, &zphi, -alpha.conj() * inv, &star);
            phistars.push(next.star());
            phis.push(next);
            kappas.push(kappas[j] / rho);
        }
        let dphis = phis.iter().map(ComplexPoly::derivative).collect();
        let dphistars = phistars.iter().map(ComplexPoly::derivative).collect();
        Ok(Self {
            phis,
            phistars,
            dphis,
            dphistars,
            kappas,
            alphas: used,
        })
    }

    /// `phi_k = z^k`.
    pub fn free(n: usize) -> Self {
        Self::szego_build(&VerblunskySeq::zeros(n), n).expect("zero coefficients are valid")
    }

    pub fn degree(&self) -> usize {
        self.phis.len() - 1
    }

    pub fn phi(&self, k: usize) -> &ComplexPoly {
        &self.phis[k]
    }

    pub fn phi_star(&self, k: usize) -> &ComplexPoly {
        &self.phistars[k]
    }

    pub fn phi_deriv(&self, k: usize) -> &ComplexPoly {
        &self.dphis[k]
    }

    pub fn phi_star_deriv(&self, k: usize) -> &ComplexPoly {
        &self.dphistars[k]
    }

    pub fn phis(&self) -> &[ComplexPoly] {
        &self.phis
    }

    pub fn kappa(&self, k: usize) -> f64 {
        self.kappas[k]
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn alphas(&self) -> &VerblunskySeq {
        &self.alphas
    }

    /// `phi_k`, `phi_k^*` and their derivatives at `z` for `k = 0..=upto`,
    /// evaluated by running the recursion at the point rather than from the
    /// monomial coefficients, which grow much faster than the values.
    pub fn values_at(&self, z: Complex64, upto: usize) -> Vec<PointValues> {
        assert!(upto <= self.degree());
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(upto + 1);
        let mut v = PointValues {
            phi: one,
            star: one,
            dphi: zero,
            dstar: zero,
        };
        out.push(v);
        for &alpha in &self.alphas.as_slice()[..upto] {
            let inv = 1.0 / (1.0 - alpha.norm_sqr()).sqrt();
            let zphi = z * v.phi;
            let dzphi = v.phi + z * v.dphi;
            v = PointValues {
                phi: (zphi - alpha.conj() * v.star) * inv,
                star: (v.star - alpha * zphi) * inv,
                dphi: (dzphi - alpha.conj() * v.dstar) * inv,
                dstar: (v.dstar - alpha * dzphi) * inv,
            };
            out.push(v);
        }
        out
    }

    /// Same family truncated at degree `n <= self.degree()`.
    pub fn truncated(&self, n: usize) -> Self {
        assert!(n <= self.degree());
        let alphas = VerblunskySeq(self.alphas.as_slice()[..n].to_vec());
        Self {
            phis: self.phis[..=n].to_vec(),
            phistars: self.phistars[..=n].to_vec(),
            dphis: self.dphis[..=n].to_vec(),
            dphistars: self.dphistars[..=n].to_vec(),
            kappas: self.kappas[..=n].to_vec(),
            alphas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// `eps_k = log(kappa_k) / k` for `k = 1..n`.
    pub epsilons: Vec<f64>,
    /// `max |phi_k / phi_k^*|` on the probe circle, `k = 1..n`.
    pub nevai_proxy: Vec<f64>,
}

pub fn regularity_report(alphas: &VerblunskySeq, n: usize) -> Result<RegularityReport> {
    let basis = OpucBasis::szego_build(alphas, n)?;
    let probes: Vec<Complex64> = (0..NEVAI_PROBE_POINTS)
        .map(|j| Complex64::from_polar(NEVAI_PROBE_RADIUS, TAU * j as f64 / NEVAI_PROBE_POINTS as f64))
        .collect();
    let mut epsilons = Vec::with_capacity(n);
    let mut nevai_proxy = Vec::with_capacity(n);
    for k in 1..=n {
        epsilons.push(kappa_product(alphas, k)?.ln() / k as f64);
        let worst = probes
            .iter()
            .map(|&z| (basis.phi(k).eval(z) / basis.phi_star(k).eval(z)).norm())
            .fold(0.0, f64::max);
        nevai_proxy.push(worst);
    }
    Ok(RegularityReport {
        epsilons,
        nevai_proxy,
    })
}

/// Absolutely continuous weights `w(theta) d theta` on `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Lebesgue,
    /// `(1 + cos theta) / (2 pi)`.
    CosineBump,
    /// `level * prod_j |theta - theta_j|^{exponent_j}`.
    GeneralizedJacobi {
        angles: Vec<f64>,
        exponents: Vec<f64>,
        level: f64,
    },
}

impl WeightSpec {
    pub fn jacobi(angle: f64, exponent: f64) -> Result<Self> {
        let w = WeightSpec::GeneralizedJacobi {
            angles: vec![angle],
            exponents: vec![exponent],
            level: 1.0,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if let WeightSpec::GeneralizedJacobi {
            angles,
            exponents,
            level,
        } = self
        {
            if angles.is_empty() || angles.len() != exponents.len() {
                return Err(Error::InvalidWeight(
                    "angles and exponents must be non-empty and of equal length".into(),
                ));
            }
            if !(*level > 0.0) || !level.is_finite() {
                return Err(Error::InvalidWeight(format!("level {level} must be positive")));
            }
            for (i, (&a, &e)) in angles.iter().zip(exponents).enumerate() {
                if !(0.0..TAU).contains(&a) {
                    return Err(Error::InvalidWeight(format!("angle {a} outside [0, 2pi)")));
                }
                if !(e > 0.0) || !e.is_finite() {
                    return Err(Error::InvalidWeight(format!("exponent {e} must be positive")));
                }
                if angles[..i].contains(&a) {
                    return Err(Error::InvalidWeight(format!("angle {a} repeated")));
                }
            }
        }
        Ok(())
    }

    /// Density at `theta` (unnormalised for the Jacobi family).
    pub fn density(&self, theta: f64) -> f64 {
        match self {
            WeightSpec::Lebesgue => 1.0 / TAU,
            WeightSpec::CosineBump => (1.0 + theta.cos()) / TAU,
            WeightSpec::GeneralizedJacobi {
                angles,
                exponents,
                level,
            } => angles
                .iter()
                .zip(exponents)
                .fold(*level, |acc, (&a, &e)| acc * (theta - a).abs().powf(e)),
        }
    }
}

/// Trapezoid moments on `n` nodes (period endpoint averaged); all `c_k` at once by FFT.
fn trapezoid_moments(w: &WeightSpec, count: usize, n: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let h = TAU / n as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let v = if j == 0 {
                0.5 * (w.density(0.0) + w.density(TAU))
            } else {
                w.density(h * j as f64)
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let c0 = buf[0].re;
    buf.truncate(count + 1);
    buf.iter().map(|&x| x / c0).collect()
}

/// Moments `c_k = int e^{-ik theta} w(theta) d theta`, normalised so `c_0 = 1`.
///
/// The trapezoid node count starts at `nodes` (raised to a power of two with
/// enough headroom for `count`) and doubles until every moment moves by less
/// than [`MOMENT_TOLERANCE`].
pub fn moments_from_weight(w: &WeightSpec, count: usize, nodes: usize) -> Result<Vec<Complex64>> {
    w.validate()?;
    let mut n = nodes.max(4 * (count + 1)).max(16).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut prev = trapezoid_moments(w, count, n, &mut planner);
    if !prev[0].re.is_finite() || prev.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidWeight("weight does not integrate to a finite value".into()));
    }
    loop {
        n *= 2;
        if n > MAX_MOMENT_NODES {
            return Err(Error::QuadratureNotConverged(format!(
                "moments still moving after {} nodes",
                n / 2
            )));
        }
        let next = trapezoid_moments(w, count, n, &mut planner);
        let change = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prev = next;
        if change < MOMENT_TOLERANCE {
            return Ok(prev);
        }
    }
}

/// Inverts moments `c_0..c_m` into `alpha_0..alpha_{m-1}`.
///
/// Runs the monic recursion `Phi_{n+1} = z Phi_n - conj(alpha_n) Phi_n^*` with
/// `alpha_n = -conj(Phi_{n+1}(0))` obtained from the orthogonality of
/// `Phi_{n+1}` to the constants; the pivot `||Phi_n||^2` must stay positive.
pub fn levinson_verblunsky(moments: &[Complex64]) -> Result<VerblunskySeq> {
    let Some(&c0) = moments.first() else {
        return Ok(VerblunskySeq(Vec::new()));
    };
    let scale = c0.re;
    if !(scale > LEVINSON_PIVOT_FLOOR) {
        return Err(Error::NotPositiveDefinite { order: 0, pivot: scale });
    }
    let c: Vec<Complex64> = moments.iter().map(|&m| m / scale).collect();
    let m = c.len() - 1;
    let mut phi = vec![Complex64::new(1.0, 0.0)];
    let mut phistar = vec![Complex64::new(1.0, 0.0)];
    let mut pivot = 1.0;
    let mut alphas = Vec::with_capacity(m);
    for n in 0..m {
        let num: Complex64 = phi.iter().enumerate().map(|(j, b)| b.conj() * c[j + 1]).sum();
        let alpha = num / pivot;
        let next_pivot = pivot * (1.0 - alpha.norm_sqr());
        if !(alpha.norm() < 1.0) || !(next_pivot > LEVINSON_PIVOT_FLOOR) {
            return Err(Error::NotPositiveDefinite {
                order: n + 1,
                pivot: next_pivot,
            });
        }
        let mut next_phi = vec![Complex64::new(0.0, 0.0); n + 2];
        let mut next_star = vec![Complex64::new(0.0, 0.0); n + 2];
        for j in 0..=n {
            next_phi[j + 1] += phi[j];
            next_phi[j] -= alpha.conj() * phistar[j];
            next_star[j] += phistar[j];
            next_star[j + 1] -= alpha * phi[j];
        }
        phi = next_phi;
        phistar = next_star;
        pivot = next_pivot;
        alphas.push(alpha);
    }
    Ok(VerblunskySeq(alphas))
}

/// Named Verblunsky families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VerblunskySource {
    /// `alpha_j = 0`: the monomials.
    Zero,
    /// `alpha_j = a`.
    Constant { a: f64 },
    /// `alpha_j = c / (j + 2)^p`.
    Decay { c: f64, p: f64 },
    /// Coefficients read from a text file.
    File { path: String },
    /// Coefficients inverted from the moments of a weight.
    Weight { weight: WeightSpec },
}

impl VerblunskySource {
    /// The first `n` coefficients of the family.
    pub fn generate(&self, n: usize) -> Result<VerblunskySeq> {
        match self {
            VerblunskySource::Zero => Ok(VerblunskySeq::zeros(n)),
            VerblunskySource::Constant { a } => VerblunskySeq::new(vec![Complex64::new(*a, 0.0); n]),
            VerblunskySource::Decay { c, p } => VerblunskySeq::new(
                (0..n)
                    .map(|j| Complex64::new(c / (j as f64 + 2.0).powf(*p), 0.0))
                    .collect(),
            ),
            VerblunskySource::File { path } => {
                let seq = VerblunskySeq::read_file(Path::new(path))?;
                if seq.len() < n {
                    return Err(Error::InsufficientCoefficients {
                        needed: n,
                        got: seq.len(),
                    });
                }
                Ok(VerblunskySeq(seq.0[..n].to_vec()))
            }
            VerblunskySource::Weight { weight } => {
                let moments = moments_from_weight(weight, n, 1024)?;
                levinson_verblunsky(&moments)
            }
        }
    }

    pub fn basis(&self, n: usize) -> Result<OpucBasis> {
        OpucBasis::szego_build(&self.generate(n)?, n)
    }
}

impl FromStr for VerblunskySource {
    type Err = Error;

    /// `zero | constant:<a> | decay:<c>:<p> | file:<path> | weight:lebesgue |
    /// weight:cosine | weight:jacobi:<theta>:<alpha>`
    fn from_str(s: &str) -> Result<Self> {
        let num = |field: &str, tok: Option<&str>| -> Result<f64> {
            let tok = tok.ok_or_else(|| Error::Parse(format!("alphas: missing field `{field}`")))?;
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("alphas: field `{field}` is not a number: '{tok}'")))
        };
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::Parse("alphas: field `path` is empty".into()));
            }
            return Ok(VerblunskySource::File { path: path.to_string() });
        }
        let parts: Vec<&str> = s.split(':').collect();
        let arity = |want: usize| -> Result<()> {
            if parts.len() != want {
                Err(Error::Parse(format!("alphas: '{s}' has {} fields, expected {want}", parts.len())))
            } else {
                Ok(())
            }
        };
        let source = match parts[0] {
            "zero" => {
                arity(1)?;
                VerblunskySource::Zero
            }
            "constant" => {
                arity(2)?;
                VerblunskySource::Constant { a: num("a", parts.get(1).copied())? }
            }
            "decay" => {
                arity(3)?;
                VerblunskySource::Decay {
                    c: num("c", parts.get(1).copied())?,
                    p: num("p", parts.get(2).copied())?,
                }
            }
            "weight" => match parts.get(1).copied() {
                Some("lebesgue") => {
                    arity(2)?;
                    VerblunskySource::Weight { weight: WeightSpec::Lebesgue }
                }
                Some("cosine") => {
                    arity(2)?;
                    VerblunskySource::Weight { weight: WeightSpec::CosineBump }
                }
                Some("jacobi") => {
                    arity(4)?;
                    let theta = parse_angle(parts[2]).ok_or_else(|| {
                        Error::Parse(format!("alphas: field `theta` is not a number: '{}'", parts[2]))
                    })?;
                    let exponent = num("alpha", parts.get(3).copied())?;
                    VerblunskySource::Weight {
                        weight: WeightSpec::jacobi(theta, exponent)
                            .map_err(|e| Error::Parse(format!("alphas: {e}")))?,
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "alphas: unknown weight `{}`",
                        other.unwrap_or("")
                    )))
                }
            },
            other => return Err(Error::Parse(format!("alphas: unknown family `{other}`"))),
        };
        Ok(source)
    }
}

impl fmt::Display for VerblunskySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerblunskySource::Zero => write!(f, "zero"),
            VerblunskySource::Constant { a } => write!(f, "constant:{a}"),
            VerblunskySource::Decay { c, p } => write!(f, "decay:{c}:{p}"),
            VerblunskySource::File { path } => write!(f, "file:{path}"),
            VerblunskySource::Weight { weight } => match weight {
                WeightSpec::Lebesgue => write!(f, "weight:lebesgue"),
                WeightSpec::CosineBump => write!(f, "weight:cosine"),
                WeightSpec::GeneralizedJacobi { angles, exponents, .. } => {
                    write!(f, "weight:jacobi:{}:{}", angles[0], exponents[0])
                }
            },
        }
    }
}

/// Accepts plain decimals and the shorthands `pi`, `2pi`, `pi/2`, `3pi/2`, ...
pub fn parse_angle(tok: &str) -> Option<f64> {
    let tok = tok.trim();
    if let Ok(v) = tok.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (head, den) = match tok.split_once('/') {
        Some((h, d)) => (h, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (tok, 1.0),
    };
    let mult = head.strip_suffix("pi").or_else(|| head.strip_suffix("π"))?;
    let mult = if mult.is_empty() {
        1.0
    } else if mult == "-" {
        -1.0
    } else {
        mult.trim_end_matches('*').parse::<f64>().ok()?
    };
    Some(mult * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_case_is_monomials() {
        let b = OpucBasis::szego_build(&VerblunskySeq::zeros(3), 3).unwrap();
        for k in 0..=3 {
            assert_eq!(b.phi(k), &ComplexPoly::monomial(k));
            assert_eq!(b.kappa(k), 1.0);
        }
    }

    #[test]
    fn single_step_by_hand() {
        let a = VerblunskySeq::new(vec![c(0.5)]).unwrap();
        let b = OpucBasis::szego_build(&a, 1).unwrap();
        let s3 = 3f64.sqrt();
        let expect = [-1.0 / s3, 2.0 / s3];
        for (got, want) in b.phi(1).coeffs().iter().zip(expect) {
            assert_relative_eq!(got.re, want, epsilon = 1e-15);
            assert_eq!(got.im, 0.0);
        }
        assert_relative_eq!(b.kappa(1), 2.0 / s3, epsilon = 1e-15);
    }

    #[test]
    fn constant_half_kappa() {
        let a = VerblunskySource::Constant { a: 0.5 }.generate(10).unwrap();
        let b = OpucBasis::szego_build(&a, 10).unwrap();
        let oracle = (4.0f64 / 3.0).powi(5);
        assert_relative_eq!(b.kappa(10), oracle, max_relative = 1e-14);
        assert_relative_eq!(kappa_product(&a, 2).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(b.phi(10).leading().re, oracle, max_relative = 1e-12);
    }

    #[test]
    fn kappa_product_examples() {
        let zero = VerblunskySeq::zeros(5);
        for k in 0..=5 {
            assert_eq!(kappa_product(&zero, k).unwrap(), 1.0);
        }
        let a = VerblunskySeq::new(vec![c(0.9)]).unwrap();
        assert_relative_eq!(kappa_product(&a, 1).unwrap(), 1.0 / 0.19f64.sqrt(), max_relative = 1e-15);
        assert!(matches!(
            kappa_product(&zero, 6),
            Err(Error::InsufficientCoefficients { needed: 6, got: 5 })
        ));
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(matches!(
            VerblunskySeq::new(vec![c(0.2), c(1.0)]),
            Err(Error::InvalidVerblunsky { index: 1, .. })
        ));
        assert!(matches!(
            OpucBasis::szego_build(&VerblunskySeq::zeros(2), 3),
            Err(Error::InsufficientCoefficients { .. })
        ));
        assert!(VerblunskySource::Constant { a: 1.2 }.generate(3).is_err());
    }

    #[test]
    fn kappas_nondecreasing_and_star_consistent() {
        let a = VerblunskySeq::new(
            (0..30)
                .map(|j| Complex64::from_polar(0.8 / (1.0 + j as f64 * 0.1), j as f64))
                .collect(),
        )
        .unwrap();
        let b = OpucBasis::szego_build(&a, 30).unwrap();
        assert_eq!(b.kappa(0), 1.0);
        for k in 1..=30 {
            assert!(b.kappa(k) >= b.kappa(k - 1));
            assert_eq!(b.phi(k).degree(), k);
            assert_eq!(b.phi_star(k), &b.phi(k).star());
            let lead = b.phi(k).leading();
            assert!((lead.re - b.kappa(k)).abs() <= 1e-12 * b.kappa(k) && lead.im.abs() <= 1e-12 * b.kappa(k));
        }
    }

    #[test]
    fn real_alphas_give_real_coefficients() {
        let b = VerblunskySource::Decay { c: 1.0, p: 1.0 }.basis(25).unwrap();
        for k in 0..=25 {
            assert!(b.phi(k).coeffs().iter().all(|x| x.im == 0.0), "phi_{k}");
        }
    }

    #[test]
    fn regularity_examples() {
        let zero = regularity_report(&VerblunskySeq::zeros(8), 8).unwrap();
        assert!(zero.epsilons.iter().all(|&e| e == 0.0));
        let half = VerblunskySource::Constant { a: 0.5 }.generate(12).unwrap();
        let rep = regularity_report(&half, 12).unwrap();
        let oracle = 0.5 * (4.0f64 / 3.0).ln();
        for e in rep.epsilons {
            assert_relative_eq!(e, oracle, max_relative = 1e-12);
        }
        let decay = VerblunskySource::Decay { c: 1.0, p: 1.0 }.generate(60).unwrap();
        let rep = regularity_report(&decay, 60).unwrap();
        assert!(rep.epsilons.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.epsilons.iter().all(|&e| e >= 0.0));
        assert!(rep.nevai_proxy[59] < rep.nevai_proxy[4]);
        assert!(rep.nevai_proxy[59] < 0.1);
    }

    #[test]
    fn moments_of_simple_weights() {
        let leb = moments_from_weight(&WeightSpec::Lebesgue, 6, 64).unwrap();
        assert_relative_eq!(leb[0].re, 1.0, epsilon = 1e-15);
        for m in &leb[1..] {
            assert!(m.norm() < 1e-15);
        }
        let cos = moments_from_weight(&WeightSpec::CosineBump, 4, 64).unwrap();
        assert!((cos[0] - c(1.0)).norm() < 1e-14);
        assert!((cos[1] - c(0.5)).norm() < 1e-14);
        assert!(cos[2].norm() < 1e-14);
    }

    #[test]
    fn jacobi_moments_stable_under_doubling() {
        let w = WeightSpec::jacobi(PI, 1.0).unwrap();
        let m = moments_from_weight(&w, 20, 256).unwrap();
        let mut planner = FftPlanner::new();
        let fine = trapezoid_moments(&w, 20, 1 << 22, &mut planner);
        for (a, b) in m.iter().zip(&fine) {
            assert!((a - b).norm() < 5e-10);
        }
        // int |t - pi| e^{-ikt} dt = 2 (1 - (-1)^k) / k^2 and int |t - pi| dt = pi^2
        for k in 1..=20usize {
            let exact = if k % 2 == 1 { 4.0 / (k as f64).powi(2) / (PI * PI) } else { 0.0 };
            assert!((m[k].re - exact).abs() < 1e-9, "k={k} got={} want={exact}", m[k].re);
            assert!(m[k].im.abs() < 1e-9);
        }
    }

    #[test]
    fn levinson_lebesgue_round_trip() {
        let leb = moments_from_weight(&WeightSpec::Lebesgue, 30, 64).unwrap();
        let a = levinson_verblunsky(&leb).unwrap();
        assert_eq!(a.len(), 30);
        assert!(a.as_slice().iter().all(|x| x.norm() < 1e-14));
        let exact: Vec<Complex64> = (0..=10).map(|k| c(if k == 0 { 1.0 } else { 0.0 })).collect();
        assert!(levinson_verblunsky(&exact).unwrap().as_slice().iter().all(|x| *x == c(0.0)));
    }

    /// Monic orthogonal polynomials by Gram-Schmidt in coefficient space, with
    /// the inner product given by the Toeplitz moment matrix.
    fn gram_schmidt_alphas(moments: &[Complex64], size: usize) -> Vec<Complex64> {
        let mom = |d: i64| -> Complex64 {
            if d >= 0 {
                moments[d as usize]
            } else {
                moments[(-d) as usize].conj()
            }
        };
        // <z^j, z^k> = int e^{i(j-k)t} dmu = c_{k-j}
        let inner = |p: &[Complex64], q: &[Complex64]| -> Complex64 {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, a) in p.iter().enumerate() {
                for (k, b) in q.iter().enumerate() {
                    s += a * b.conj() * mom(k as i64 - j as i64);
                }
            }
            s
        };
        let mut monic: Vec<Vec<Complex64>> = Vec::new();
        for n in 0..size {
            let mut p = vec![c(0.0); size];
            p[n] = c(1.0);
            for q in &monic {
                let coef = inner(&p, q) / inner(q, q);
                for (x, y) in p.iter_mut().zip(q) {
                    *x -= coef * y;
                }
            }
            monic.push(p);
        }
        (1..size).map(|n| -monic[n][0].conj()).collect()
    }

    #[test]
    fn levinson_matches_gram_schmidt_cosine() {
        let mom = moments_from_weight(&WeightSpec::CosineBump, 8, 64).unwrap();
        let oracle = gram_schmidt_alphas(&mom, 8);
        let got = levinson_verblunsky(&mom[..8]).unwrap();
        assert_eq!(got.len(), 7);
        for (a, b) in got.as_slice().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        assert_relative_eq!(got.as_slice()[0].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn levinson_matches_gram_schmidt_complex_moments() {
        // moments of (1 + Re(e^{-i t} (0.3 + 0.4i))) / 2pi, a positive weight
        let mut mom = vec![c(0.0); 8];
        mom[0] = c(1.0);
        mom[1] = Complex64::new(0.15, 0.2);
        let oracle = gram_schmidt_alphas(&mom, 8);
        let got = levinson_verblunsky(&mom).unwrap();
        for (a, b) in got.as_slice().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn levinson_rejects_indefinite_moments() {
        let bad = vec![c(1.0), c(0.9), c(-0.9)];
        assert!(matches!(levinson_verblunsky(&bad), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(
            levinson_verblunsky(&[c(1.0), c(1.5)]),
            Err(Error::NotPositiveDefinite { order: 1, .. })
        ));
    }

    #[test]
    fn source_grammar() {
        assert_eq!("zero".parse::<VerblunskySource>().unwrap(), VerblunskySource::Zero);
        assert_eq!(
            "decay:1:0.25".parse::<VerblunskySource>().unwrap(),
            VerblunskySource::Decay { c: 1.0, p: 0.25 }
        );
        assert_eq!(
            "constant:0.5".parse::<VerblunskySource>().unwrap(),
            VerblunskySource::Constant { a: 0.5 }
        );
        match "weight:jacobi:pi:1".parse::<VerblunskySource>().unwrap() {
            VerblunskySource::Weight {
                weight: WeightSpec::GeneralizedJacobi { angles, exponents, .. },
            } => {
                assert_relative_eq!(angles[0], PI);
                assert_eq!(exponents[0], 1.0);
            }
            other => panic!("{other:?}"),
        }
        for bad in ["", "decay:1", "decay:x:1", "constant", "weight:foo", "weight:jacobi:pi:-1", "file:"] {
            assert!(bad.parse::<VerblunskySource>().is_err(), "{bad}");
        }
        let round: VerblunskySource = VerblunskySource::Decay { c: 1.0, p: 1.0 }.to_string().parse().unwrap();
        assert_eq!(round, VerblunskySource::Decay { c: 1.0, p: 1.0 });
    }

    #[test]
    fn verblunsky_text_format() {
        let text = "# header\n0.5 0\n\n0.1 -0.2\n# trailing\n";
        let a = VerblunskySeq::parse_text(text).unwrap();
        assert_eq!(a.as_slice(), &[c(0.5), Complex64::new(0.1, -0.2)]);
        assert_eq!(VerblunskySeq::parse_text(&a.to_text()).unwrap(), a);
        assert!(VerblunskySeq::parse_text("0.5").is_err());
        assert!(VerblunskySeq::parse_text("0.5 0 1").is_err());
        assert!(VerblunskySeq::parse_text("1.5 0").is_err());
    }

    #[test]
    fn angle_shorthands() {
        assert_relative_eq!(parse_angle("pi").unwrap(), PI);
        assert_relative_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_relative_eq!(parse_angle("2pi").unwrap(), TAU);
        assert_relative_eq!(parse_angle("1.5").unwrap(), 1.5);
        assert!(parse_angle("bogus").is_none());
    }

    #[test]
    fn pointwise_values_match_coefficients() {
        let basis = VerblunskySource::Decay { c: 0.7, p: 0.5 }.basis(12).unwrap();
        let z = Complex64::new(0.3, -0.6);
        for (k, v) in basis.values_at(z, 12).iter().enumerate() {
            let (p, dp) = basis.phi(k).eval_with_derivative(z);
            let (s, ds) = basis.phi_star(k).eval_with_derivative(z);
            for (a, b) in [(v.phi, p), (v.dphi, dp), (v.star, s), (v.dstar, ds)] {
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "k={k}: {a} vs {b}");
            }
        }
    }
}
