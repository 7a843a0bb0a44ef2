//! First and second correlation functions of `P_n = sum eta_k phi_k` with
//! i.i.d. standard complex Gaussian `eta_k` (`E|eta|^2 = 1`), and their
//! large-`n` limits.
//!
//! The finite-`n` formulas are Gaussian identities; other coefficient laws are
//! only reachable through Monte Carlo.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_cd, kernel_direct, KernelEval};
use crate::opuc::OpucBasis;
use crate::quad::{trapezoid_angles, GaussLegendre};
use crate::zerocount::Region;

/// Pairs closer than this are treated as coincident and get density exactly 0.
pub const PAIR_GUARD: f64 = 1e-9;

/// Below this `|1 - z conj(w)|` the kernels are summed directly.
pub const DIRECT_BAND: f64 = 0.1;

/// Points within this distance of `|z| = 1` are refused by the limit forms.
pub const CIRCLE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Finite(usize),
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityValue {
    pub value: f64,
    pub order: Order,
}

fn kernel_at(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<KernelEval> {
    let gap = (Complex64::new(1.0, 0.0) - z * w.conj()).norm();
    if gap <= DIRECT_BAND || order + 1 > basis.degree() {
        kernel_direct(basis, order, z, w)
    } else {
        kernel_cd(basis, order, z, w)
    }
}

/// `rho_n^(1)(z) = (K11 K - |K01|^2) / (pi K^2)` on the diagonal.
pub fn rho1_n(basis: &OpucBasis, order: usize, z: Complex64) -> Result<IntensityValue> {
    if order == 0 {
        return Err(Error::InvalidArgument("intensity needs order >= 1".into()));
    }
    let e = kernel_direct(basis, order, z, z)?;
    let k = e.k.re;
    let value = (e.k11.re * k - e.k01.norm_sqr()) / (PI * k * k);
    Ok(IntensityValue {
        value,
        order: Order::Finite(order),
    })
}

/// The kernel values the two-point density consumes.
#[derive(Debug, Clone, Copy)]
struct PairKernels {
    zz: KernelEval,
    ww: KernelEval,
    zw: KernelEval,
    wz: KernelEval,
}

impl PairKernels {
    fn new(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<Self> {
        Ok(Self {
            zz: kernel_at(basis, order, z, z)?,
            ww: kernel_at(basis, order, w, w)?,
            zw: kernel_at(basis, order, z, w)?,
            wz: kernel_at(basis, order, w, z)?,
        })
    }

    /// `K(z,z) K(w,w) - |K(z,w)|^2`.
    fn det(&self) -> f64 {
        self.zz.k.re * self.ww.k.re - self.zw.k.norm_sqr()
    }

    /// Swaps the roles of `z` and `w`.
    fn swapped(&self) -> Self {
        Self {
            zz: self.ww,
            ww: self.zz,
            zw: self.wz,
            wz: self.zw,
        }
    }

    fn f(&self, det: f64) -> f64 {
        let kzz = self.zz.k.re;
        let kww = self.ww.k.re;
        let a = self.zz.k01;
        let b = self.wz.k01;
        let num = self.zz.k11.re * det + 2.0 * (self.zw.k * a.conj() * b).re
            - kww * a.norm_sqr()
            - kzz * b.norm_sqr();
        num / det.powf(1.5)
    }

    fn g(&self, det: f64) -> Complex64 {
        let kzz = self.zz.k;
        let kww = self.ww.k;
        let kzw = self.zw.k;
        let a = self.zz.k01;
        let b = self.wz.k01;
        let num = self.zw.k11 * det + kzw * a.conj() * self.ww.k01 + (kzw * b).conj() * self.zw.k01
            - kww * a.conj() * self.zw.k01
            - kzz * b.conj() * self.ww.k01;
        num / det.powf(1.5)
    }
}

/// Both evaluation routes of the two-point density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho2Routes {
    /// `(f(z,w) f(w,z) + g(z,w) g(w,z)) / pi^2`.
    pub expanded: f64,
    /// `Perm(C - B^* A^{-1} B) / (pi^2 det A)` over the 2x2 blocks.
    pub permanent: f64,
}

fn permanent_route(p: &PairKernels) -> f64 {
    // A_ij = K(z_i, z_j), B_ij = K01(z_i, z_j), C_ij = K11(z_i, z_j)
    let a = [[p.zz.k, p.zw.k], [p.wz.k, p.ww.k]];
    let b = [[p.zz.k01, p.zw.k01], [p.wz.k01, p.ww.k01]];
    let cm = [[p.zz.k11, p.zw.k11], [p.wz.k11, p.ww.k11]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    s += b[k][i].conj() * inv[k][l] * b[l][j];
                }
            }
            m[i][j] = cm[i][j] - s;
        }
    }
    let perm = m[0][0] * m[1][1] + m[0][1] * m[1][0];
    perm.re / (PI * PI * det.re)
}

/// Two-point density by both routes; exact zeros inside [`PAIR_GUARD`].
pub fn rho2_n_routes(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<Rho2Routes> {
    if order == 0 {
        return Err(Error::InvalidArgument("intensity needs order >= 1".into()));
    }
    if (z - w).norm() < PAIR_GUARD {
        return Ok(Rho2Routes {
            expanded: 0.0,
            permanent: 0.0,
        });
    }
    let p = PairKernels::new(basis, order, z, w)?;
    let det = p.det();
    let q = p.swapped();
    let expanded = (p.f(det) * q.f(det) + (p.g(det) * q.g(det)).re) / (PI * PI);
    Ok(Rho2Routes {
        expanded,
        permanent: permanent_route(&p),
    })
}

pub fn rho2_n(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<IntensityValue> {
    Ok(IntensityValue {
        value: rho2_n_routes(basis, order, z, w)?.expanded,
        order: Order::Finite(order),
    })
}

fn check_off_circle(z: Complex64) -> Result<()> {
    let modulus = z.norm();
    if (modulus - 1.0).abs() < CIRCLE_GUARD {
        return Err(Error::OnUnitCircle { modulus });
    }
    Ok(())
}

/// `1 / (pi (1 - |z|^2)^2)`.
pub fn rho1_limit(z: Complex64) -> Result<IntensityValue> {
    check_off_circle(z)?;
    let d = 1.0 - z.norm_sqr();
    Ok(IntensityValue {
        value: 1.0 / (PI * d * d),
        order: Order::Limit,
    })
}

/// `(1/pi^2) [1 / ((1-|z|^2)^2 (1-|w|^2)^2) - 1 / |1 - z conj(w)|^4]`, for points on
/// the same side of the unit circle.
pub fn rho2_limit(z: Complex64, w: Complex64) -> Result<IntensityValue> {
    check_off_circle(z)?;
    check_off_circle(w)?;
    if (z.norm() < 1.0) != (w.norm() < 1.0) {
        return Err(Error::MixedSides);
    }
    if z == w {
        return Ok(IntensityValue {
            value: 0.0,
            order: Order::Limit,
        });
    }
    let a = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
    let b = (Complex64::new(1.0, 0.0) - z * w.conj()).norm_sqr();
    Ok(IntensityValue {
        value: (1.0 / (a * a) - 1.0 / (b * b)) / (PI * PI),
        order: Order::Limit,
    })
}

/// `int_region rho_n^(1) dA` by polar quadrature (Gauss-Legendre radially,
/// trapezoid or Gauss-Legendre angularly), refined until the relative change is
/// below `rel_tol`.
pub fn expected_count(basis: &OpucBasis, order: usize, region: &Region, rel_tol: f64) -> Result<f64> {
    let (r_lo, r_hi, angles) = match *region {
        Region::Annulus { s, t } => (s, t, None),
        Region::Sector { r, alpha, beta } => (r, 1.0 / r, Some((alpha, beta))),
    };
    if !r_hi.is_finite() {
        return Err(Error::InvalidArgument("expected_count needs a bounded region".into()));
    }
    let gl = GaussLegendre::new(16);
    let mut panels = 4;
    let mut angular = 32;
    let mut prev: Option<f64> = None;
    for _ in 0..8 {
        let radial = gl.composite(r_lo, r_hi, panels);
        let thetas: Vec<(f64, f64)> = match angles {
            None => trapezoid_angles(angular).collect(),
            Some((a, b)) => gl.composite(a, b, angular / 16),
        };
        let mut total = 0.0;
        for &(r, wr) in &radial {
            for &(th, wt) in &thetas {
                total += wr * wt * r * rho1_n(basis, order, Complex64::from_polar(r, th))?.value;
            }
        }
        if let Some(p) = prev {
            if (total - p).abs() <= rel_tol * total.abs().max(1e-300) {
                return Ok(total);
            }
        }
        prev = Some(total);
        panels *= 2;
        angular *= 2;
    }
    Err(Error::QuadratureNotConverged("expected-count quadrature".into()))
}
