//! Limiting variance of the zero count in an annulus avoiding the unit circle.
//!
//! With `rho1 = 1 / (pi (1 - |z|^2)^2)` and the limiting pair term
//! `1 / |1 - z conj(w)|^4`,
//!
//! `Var = int_A rho1 dA - (1/pi^2) int_A int_A |1 - z conj(w)|^{-4} dA(z) dA(w)`.
//!
//! Three routes compute it: the closed form, the diagonal series left after the
//! angular integrals, and a polar tensor quadrature of the two integrals.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::zerocount::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarMethod {
    Closed,
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub value: f64,
    pub method: VarMethod,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Interior,
    Exterior,
}

fn side_of(s: f64, t: f64) -> Result<Side> {
    if !(s >= 0.0 && s.is_finite() && t.is_finite() && t >= s) {
        return Err(Error::InvalidRegion(format!("annulus needs 0 <= s <= t < inf, got s = {s}, t = {t}")));
    }
    if t < 1.0 {
        Ok(Side::Interior)
    } else if s > 1.0 {
        Ok(Side::Exterior)
    } else {
        Err(Error::RegionTouchesCircle { s, t })
    }
}

fn result(value: f64, method: VarMethod, s: f64, t: f64) -> VarianceResult {
    VarianceResult {
        value,
        method,
        region: Region::Annulus { s, t },
    }
}

pub fn var_limit_closed(s: f64, t: f64) -> Result<VarianceResult> {
    let side = side_of(s, t)?;
    let (s2, t2) = (s * s, t * t);
    let (s4, t4) = (s2 * s2, t2 * t2);
    let inner = match side {
        Side::Interior => 1.0 - s2 * (t4 * (2.0 + s2) - 2.0),
        Side::Exterior => 1.0 - t2 * (s4 * (2.0 + t2) - 2.0),
    };
    let value = (t2 - s2) * inner / ((1.0 - t4) * (1.0 - s4) * (1.0 - s2 * t2));
    Ok(result(value, VarMethod::Closed, s, t))
}

/// `int_A rho1 dA = 1/(1 - t^2) - 1/(1 - s^2)`.
fn single_term(s: f64, t: f64) -> f64 {
    let (s2, t2) = (s * s, t * t);
    (t2 - s2) / ((1.0 - t2) * (1.0 - s2))
}

/// `(k + 1) int_s^t 2 r^e dr` with `e = 2k + 1` inside the disk and `e = -2k - 3` outside,
/// the radial weight of the `k`-th harmonic of `(1 - z conj(w))^{-2}`.
fn radial_moment(side: Side, k: usize, s: f64, t: f64) -> f64 {
    let m = 2 * k as i32 + 2;
    match side {
        Side::Interior => t.powi(m) - s.powi(m),
        Side::Exterior => s.powi(-m) - t.powi(-m),
    }
}

pub fn var_limit_series(s: f64, t: f64, tol: f64) -> Result<VarianceResult> {
    let side = side_of(s, t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // every squared moment is below q^(k+1), so the tail after k terms is below q^(k+1) / (1 - q)
    let q = match side {
        Side::Interior => t.powi(4),
        Side::Exterior => s.powi(-4),
    };
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let a = radial_moment(side, k, s, t);
        sum += a * a;
        k += 1;
        if q.powi(k as i32 + 1) / (1.0 - q) < tol || q == 0.0 {
            break;
        }
    }
    Ok(result(single_term(s, t) - sum, VarMethod::Series, s, t))
}

/// `(1 / 2 pi) int_0^{2pi} |1 - x e^{i psi}|^{-4} d psi` by the trapezoid rule, nodes
/// doubled until two successive sums agree to rounding.
fn angular_mean(x: f64) -> Result<f64> {
    let f = |psi: f64| {
        let d = 1.0 - 2.0 * x * psi.cos() + x * x;
        1.0 / (d * d)
    };
    let mut m = 16usize;
    let mut prev = (0..m).map(|j| f(TAU * j as f64 / m as f64)).sum::<f64>() / m as f64;
    while m < 1 << 20 {
        // the doubled rule reuses the previous nodes
        let odd: f64 = (0..m).map(|j| f(TAU * (j as f64 + 0.5) / m as f64)).sum();
        m *= 2;
        let next = 0.5 * prev + odd / m as f64;
        if (next - prev).abs() <= 16.0 * f64::EPSILON * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(format!("angular sum at x = {x}")))
}

fn tensor_level(s: f64, t: f64, panels: usize, gl: &GaussLegendre) -> Result<f64> {
    let rule = gl.composite(s, t, panels);
    let single: f64 = rule.iter().map(|&(r, w)| w * 2.0 * r / (1.0 - r * r).powi(2)).sum();
    // dA(z) dA(w) = r rho dr drho d theta d phi; the angular pair collapses to 4 pi^2 times
    // the mean over the angle difference
    let mut double = 0.0;
    for (i, &(r, wr)) in rule.iter().enumerate() {
        for &(rho, wp) in &rule[i..] {
            let weight = if rho == r { 1.0 } else { 2.0 };
            double += weight * wr * wp * r * rho * angular_mean(r * rho)?;
        }
    }
    Ok(single - 4.0 * double)
}

/// Polar quadrature, radial panels doubled until successive levels differ by less than `target`.
pub fn var_limit_quadrature(s: f64, t: f64, target: f64) -> Result<VarianceResult> {
    side_of(s, t)?;
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target must be positive, got {target}")));
    }
    if s == t {
        return Ok(result(0.0, VarMethod::Quadrature, s, t));
    }
    let gl = GaussLegendre::new(16);
    let mut prev = tensor_level(s, t, 1, &gl)?;
    let mut panels = 1;
    while panels < 256 {
        panels *= 2;
        let next = tensor_level(s, t, panels, &gl)?;
        if (next - prev).abs() < target {
            return Ok(result(next, VarMethod::Quadrature, s, t));
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(format!(
        "variance quadrature on A({s}, {t}) did not settle at {panels} panels"
    )))
}
