//! Zeros of sampled polynomials and zero counts in annuli and sectors.
//!
//! The count of record comes from the roots: eigenvalues of the balanced
//! companion matrix, each polished by Newton's method. The argument principle
//! provides an independent count along the region boundary.

use std::cell::Cell;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpoly::ComplexPoly;
use crate::error::{Error, Result};
use crate::opuc::parse_angle;
use crate::quad::GaussLegendre;

/// Leading coefficients at or below this modulus are degenerate.
pub const LEADING_FLOOR: f64 = 1e-300;

/// Polished residuals must be at most this fraction of the largest coefficient.
pub const RESIDUAL_TOL: f64 = 1e-8;

const NEWTON_STEPS: usize = 5;

/// Cap on quadrature panels per contour; running out signals a zero on the contour.
const PANEL_BUDGET: usize = 200_000;

/// Argument-principle integrals farther than this from an integer are rejected.
pub const INTEGER_SLACK: f64 = 0.1;

/// A region of the plane.
///
/// A `Sector` is `r < |z| < 1/r` with `alpha <= arg z < beta`: the annular
/// sector straddling the unit circle. (The radial condition is often printed as
/// `1/r < |z| < r` with `0 < r < 1`, which describes the empty set; it is read
/// here as the annulus around the circle.)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `s < |z| < t`; for `s = 0` the origin is included, i.e. `|z| < t`.
    Annulus { s: f64, t: f64 },
    Sector { r: f64, alpha: f64, beta: f64 },
}

impl Region {
    pub fn annulus(s: f64, t: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidRegion(format!("field `s`: {s} must be finite and >= 0")));
        }
        if !(t > s) {
            return Err(Error::InvalidRegion(format!("field `t`: {t} must exceed s = {s}")));
        }
        Ok(Region::Annulus { s, t })
    }

    pub fn sector(r: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidRegion(format!("field `r`: {r} must lie in (0, 1)")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidRegion(format!("field `alpha`: {alpha} must be >= 0")));
        }
        if !(beta > alpha && beta <= TAU) {
            return Err(Error::InvalidRegion(format!(
                "field `beta`: {beta} must satisfy alpha < beta <= 2pi"
            )));
        }
        Ok(Region::Sector { r, alpha, beta })
    }

    /// True for annuli that avoid the unit circle.
    pub fn is_circle_free(&self) -> bool {
        match *self {
            Region::Annulus { s, t } => t < 1.0 || s > 1.0,
            Region::Sector { .. } => false,
        }
    }

    /// Fraction of the full turn covered by the angular range.
    pub fn angular_fraction(&self) -> f64 {
        match *self {
            Region::Annulus { .. } => 1.0,
            Region::Sector { alpha, beta, .. } => (beta - alpha) / TAU,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        match *self {
            Region::Annulus { s, t } => m < t && (s == 0.0 || s < m),
            Region::Sector { r, alpha, beta } => {
                if !(r < m && m < 1.0 / r) {
                    return false;
                }
                let arg = principal_arg(z);
                alpha <= arg && arg < beta
            }
        }
    }
}

/// Argument in `[0, 2 pi)`.
pub fn principal_arg(z: Complex64) -> f64 {
    let mut a = z.im.atan2(z.re);
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU {
        a = 0.0;
    }
    a
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Annulus { s, t } => write!(f, "annulus:{s}:{t}"),
            Region::Sector { r, alpha, beta } => write!(f, "sector:{r}:{alpha}:{beta}"),
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    /// `annulus:<s>:<t>` or `sector:<r>:<alpha>:<beta>`; angles accept `pi` shorthands.
    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let field = |name: &str, idx: usize, angle: bool| -> Result<f64> {
            let tok = parts
                .get(idx)
                .copied()
                .ok_or_else(|| Error::InvalidRegion(format!("field `{name}` missing in '{text}'")))?;
            let v = if angle {
                parse_angle(tok)
            } else {
                tok.trim().parse::<f64>().ok().filter(|v| !v.is_nan())
            };
            v.ok_or_else(|| Error::InvalidRegion(format!("field `{name}`: '{tok}' is not a number")))
        };
        let arity = |want: usize| -> Result<()> {
            if parts.len() == want {
                Ok(())
            } else {
                Err(Error::InvalidRegion(format!(
                    "'{text}' has {} fields, expected {want}",
                    parts.len()
                )))
            }
        };
        match parts[0] {
            "annulus" => {
                arity(3)?;
                Region::annulus(field("s", 1, false)?, field("t", 2, false)?)
            }
            "sector" => {
                arity(4)?;
                Region::sector(field("r", 1, false)?, field("alpha", 2, true)?, field("beta", 3, true)?)
            }
            other => Err(Error::InvalidRegion(format!("field `kind`: unknown region '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub roots: Vec<Complex64>,
    /// Backward-error scores: `|P(z)|` for `|z| <= 1`, `|z^{-n} P(z)|` beyond.
    pub residuals: Vec<f64>,
}

/// `|P(z)| / max(1, |z|)^n`, evaluated through the reversed polynomial outside the disk.
fn scaled_residual(p: &ComplexPoly, rev: &ComplexPoly, z: Complex64) -> f64 {
    if z.norm() <= 1.0 {
        p.eval(z).norm()
    } else {
        rev.eval(z.inv()).norm()
    }
}

fn newton_polish(p: &ComplexPoly, rev: &ComplexPoly, z0: Complex64) -> (Complex64, f64) {
    let mut z = z0;
    let mut res = scaled_residual(p, rev, z);
    for _ in 0..NEWTON_STEPS {
        if res == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
        let cand = if z.norm() <= 1.0 {
            let (v, d) = p.eval_with_derivative(z);
            if d.norm() == 0.0 {
                break;
            }
            z - v / d
        } else {
            let u = z.inv();
            let (v, d) = rev.eval_with_derivative(u);
            if d.norm() == 0.0 {
                break;
            }
            (u - v / d).inv()
        };
        let cres = scaled_residual(p, rev, cand);
        if cres < res {
            z = cand;
            res = cres;
        } else {
            break;
        }
    }
    (z, res)
}

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Parlett-Reinsch diagonal balancing with radix 2 (row-major storage).
fn balance(h: &mut [Complex64], n: usize) {
    const RADIX: f64 = 2.0;
    const RADIX2: f64 = RADIX * RADIX;
    for _ in 0..200 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(h[j * n + i]);
                    r += cabs1(h[i * n + j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX2;
                g /= RADIX2;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX2;
                g *= RADIX2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    h[i * n + j] *= inv;
                    h[j * n + i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Complex Givens rotation `[c s; -conj(s) c]` sending `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    if b == zero {
        return (1.0, zero, a);
    }
    let an = a.norm();
    let bn = b.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn, Complex64::new(bn, 0.0));
    }
    let norm = an.hypot(bn);
    let phase = a / an;
    (an / norm, phase * b.conj() / norm, phase * norm)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts; only the active window is updated.
fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let itmax = 30 * n.max(10);
    let mut eig = vec![zero; n];
    let at = |i: usize, j: usize| i * n + j;
    let mut ihi = n;
    while ihi > 0 {
        let hi = ihi - 1;
        let mut its = 0usize;
        loop {
            let mut l = hi;
            while l > 0 {
                let sub = cabs1(h[at(l, l - 1)]);
                if sub <= smlnum {
                    break;
                }
                let mut tst = cabs1(h[at(l - 1, l - 1)]) + cabs1(h[at(l, l)]);
                if tst == 0.0 {
                    if l >= 2 {
                        tst += h[at(l - 1, l - 2)].re.abs();
                    }
                    if l < hi {
                        tst += h[at(l + 1, l)].re.abs();
                    }
                }
                if sub <= ulp * tst {
                    break;
                }
                l -= 1;
            }
            if l > 0 {
                h[at(l, l - 1)] = zero;
            }
            if l == hi {
                eig[hi] = h[at(hi, hi)];
                break;
            }
            its += 1;
            if its > itmax {
                return Err(Error::NoConvergence(format!(
                    "QR iteration stalled with {} eigenvalues left",
                    hi + 1
                )));
            }
            let shift = if its.is_multiple_of(10) {
                let k = if its.is_multiple_of(20) { hi } else { l + 1 };
                Complex64::new(0.75 * h[at(k, k - 1)].re.abs(), 0.0) + h[at(k, k)]
            } else {
                let mut t = h[at(hi, hi)];
                let u = h[at(hi - 1, hi)].sqrt() * h[at(hi, hi - 1)].sqrt();
                let mut s = cabs1(u);
                if s != 0.0 {
                    let x = (h[at(hi - 1, hi - 1)] - t).scale(0.5);
                    let sx = cabs1(x);
                    s = s.max(sx);
                    let xs = x / s;
                    let us = u / s;
                    let mut y = (xs * xs + us * us).sqrt().scale(s);
                    if sx > 0.0 {
                        let xn = x / sx;
                        if xn.re * y.re + xn.im * y.im < 0.0 {
                            y = -y;
                        }
                    }
                    t -= u * (u / (x + y));
                }
                t
            };
            let mut x = h[at(l, l)] - shift;
            let mut y = h[at(l + 1, l)];
            for k in l..hi {
                if k > l {
                    x = h[at(k, k - 1)];
                    y = h[at(k + 1, k - 1)];
                }
                let (c, s, r) = givens(x, y);
                if k > l {
                    h[at(k, k - 1)] = r;
                    h[at(k + 1, k - 1)] = zero;
                }
                for j in k..=hi {
                    let a = h[at(k, j)];
                    let b = h[at(k + 1, j)];
                    h[at(k, j)] = a * c + s * b;
                    h[at(k + 1, j)] = b * c - s.conj() * a;
                }
                let top = (k + 2).min(hi);
                for i in l..=top {
                    let a = h[at(i, k)];
                    let b = h[at(i, k + 1)];
                    h[at(i, k)] = a * c + b * s.conj();
                    h[at(i, k + 1)] = b * c - a * s;
                }
            }
        }
        ihi = hi;
    }
    Ok(eig)
}

/// Raw companion-matrix eigenvalues (balanced, unpolished).
pub fn companion_eigenvalues(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let lead = p.leading();
    if !(lead.norm() > LEADING_FLOOR) {
        return Err(Error::DegenerateLeadingCoefficient(lead.norm()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let c = p.coeffs();
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        h[j] = -c[n - 1 - j] / lead;
    }
    for i in 1..n {
        h[i * n + i - 1] = Complex64::new(1.0, 0.0);
    }
    balance(&mut h, n);
    hessenberg_eigenvalues(&mut h, n)
}

/// All roots of `p` with Newton polishing and backward-error residuals.
pub fn roots(p: &ComplexPoly) -> Result<ZeroSet> {
    let raw = companion_eigenvalues(p)?;
    let rev = p.reversed();
    let tol = RESIDUAL_TOL * p.max_coeff_norm();
    let mut roots = Vec::with_capacity(raw.len());
    let mut residuals = Vec::with_capacity(raw.len());
    for z0 in raw {
        let (z, res) = newton_polish(p, &rev, z0);
        if !(res <= tol) {
            return Err(Error::NoConvergence(format!(
                "root {z} has residual {res:e} above {tol:e}"
            )));
        }
        roots.push(z);
        residuals.push(res);
    }
    Ok(ZeroSet { roots, residuals })
}

pub fn count_in_region(zs: &ZeroSet, region: &Region) -> usize {
    zs.roots.iter().filter(|&&z| region.contains(z)).count()
}

/// `z P'(z) / P(z)`, through the reversed polynomial when `|z| > 1`.
fn log_derivative_times_z(p: &ComplexPoly, rev: &ComplexPoly, z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        let (v, d) = p.eval_with_derivative(z);
        z * d / v
    } else {
        let u = z.inv();
        let (v, d) = rev.eval_with_derivative(u);
        Complex64::new(p.degree() as f64, 0.0) - u * d / v
    }
}

/// Adaptive composite Gauss-Legendre for complex integrands.
///
/// A panel is accepted once the split changes it by less than `abs_tol` per
/// unit length or by `rel_tol` of the integral of `|f|`; the second test is the
/// floor set by rounding in `P'/P` close to a zero.
struct Adaptive<'a> {
    gl: &'a GaussLegendre,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
    budget: Cell<usize>,
}

impl Adaptive<'_> {
    fn panel<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> (Complex64, f64) {
        self.budget.set(self.budget.get().saturating_sub(1));
        self.gl.mapped(a, b).fold((Complex64::new(0.0, 0.0), 0.0), |(s, m), (x, w)| {
            let v = f(x);
            (s + v * w, m + v.norm() * w)
        })
    }

    fn integrate<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64, whole: Complex64, depth: usize) -> Complex64 {
        let mid = 0.5 * (a + b);
        let (left, ml) = self.panel(f, a, mid);
        let (right, mr) = self.panel(f, mid, b);
        let split = left + right;
        let delta = (split - whole).norm();
        if !delta.is_finite() {
            return split;
        }
        let tol = (self.abs_tol * (b - a)).max(self.rel_tol * (ml + mr));
        if delta <= tol || depth >= self.max_depth || self.budget.get() == 0 {
            return split;
        }
        self.integrate(f, a, mid, left, depth + 1) + self.integrate(f, mid, b, right, depth + 1)
    }

    fn run<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64, panels: usize) -> Complex64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                let hi = lo + h;
                let (whole, _) = self.panel(&f, lo, hi);
                self.integrate(&f, lo, hi, whole, 0)
            })
            .sum()
    }
}

/// Zero count from `(1 / 2 pi i) \oint P'/P dz` along the region boundary.
pub fn count_by_argument_principle(p: &ComplexPoly, region: &Region) -> Result<usize> {
    let lead = p.leading();
    if !(lead.norm() > LEADING_FLOOR) {
        return Err(Error::DegenerateLeadingCoefficient(lead.norm()));
    }
    let rev = p.reversed();
    let n = p.degree();
    let gl = GaussLegendre::new(12);
    let quad = Adaptive {
        gl: &gl,
        abs_tol: 1e-10,
        rel_tol: 1e-8,
        max_depth: 30,
        budget: Cell::new(PANEL_BUDGET),
    };
    let panels = (n / 2).max(8);
    // (1/2pi) int z P'/P d theta along a counter-clockwise arc
    let arc = |rho: f64, a: f64, b: f64| -> Complex64 {
        let pieces = ((panels as f64) * (b - a) / TAU).ceil().max(2.0) as usize;
        quad.run(|th| log_derivative_times_z(p, &rev, Complex64::from_polar(rho, th)), a, b, pieces) / TAU
    };
    // (1/2pi i) int P'/P dz along z = rho e^{i phi}, rho from r0 to r1
    let ray = |phi: f64, r0: f64, r1: f64| -> Complex64 {
        let dir = Complex64::from_polar(1.0, phi);
        let (lo, hi, sign) = if r0 < r1 { (r0, r1, 1.0) } else { (r1, r0, -1.0) };
        let val = quad.run(
            |rho| {
                let z = dir * rho;
                log_derivative_times_z(p, &rev, z) / rho
            },
            lo,
            hi,
            panels,
        );
        // P'/P dz = (z P'/P) d rho / rho
        val * sign / Complex64::new(0.0, TAU)
    };
    let total = match *region {
        Region::Annulus { s, t } => {
            if !t.is_finite() {
                return Err(Error::InvalidRegion("argument principle needs a finite outer radius".into()));
            }
            let outer = arc(t, 0.0, TAU);
            if s > 0.0 {
                outer - arc(s, 0.0, TAU)
            } else {
                outer
            }
        }
        Region::Sector { r, alpha, beta } => {
            let big = 1.0 / r;
            arc(big, alpha, beta) + ray(beta, big, r) - arc(r, alpha, beta) + ray(alpha, r, big)
        }
    };
    let value = if quad.budget.get() == 0 { f64::NAN } else { total.re };
    let nearest = value.round();
    let distance = (value - nearest).abs();
    if !value.is_finite() || distance > INTEGER_SLACK || nearest < 0.0 {
        return Err(Error::BoundaryProximity { value, distance });
    }
    Ok(nearest as usize)
}

/// Roots sorted by argument, for display.
pub fn sorted_by_arg(zs: &ZeroSet) -> Vec<Complex64> {
    let mut v = zs.roots.clone();
    v.sort_by(|a, b| principal_arg(*a).total_cmp(&principal_arg(*b)));
    v
}
