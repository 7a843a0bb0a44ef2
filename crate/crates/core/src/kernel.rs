//! Reproducing kernel `K_n(z, w) = sum_j phi_j(z) conj(phi_j(w))` and its
//! derivative kernels, by direct summation and by the Christoffel-Darboux
//! closed forms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opuc::{OpucBasis, PointValues as Edge};

/// Width of the band `|1 - z conj(w)| <= CD_BAND` where the closed form is refused.
pub const CD_BAND: f64 = 1e-8;

/// Kernel values at a tagged point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    /// `K_n(z, w)`.
    pub k: Complex64,
    /// `K_n^{(0,1)}(z, w) = sum phi_j(z) conj(phi_j'(w))`.
    pub k01: Complex64,
    /// `K_n^{(1,1)}(z, w) = sum phi_j'(z) conj(phi_j'(w))`.
    pub k11: Complex64,
    /// `S_n(z, w)`, present when the basis holds degree `n + 1`.
    pub s: Option<Complex64>,
    /// `R_n(z, w)`, present when the basis holds degree `n + 1`.
    pub r: Option<Complex64>,
    pub z: Complex64,
    pub w: Complex64,
    pub order: usize,
}

/// `S_n(z, w) = conj((phi*)'(w)) phi*(z) - conj(phi'(w)) phi(z)` at degree `n + 1`.
fn s_term(ez: &Edge, ew: &Edge) -> Complex64 {
    ew.dstar.conj() * ez.star - ew.dphi.conj() * ez.phi
}

/// `R_n(z, w) = conj((phi*)'(w)) (phi*)'(z) - conj(phi'(w)) phi'(z)` at degree `n + 1`.
fn r_term(ez: &Edge, ew: &Edge) -> Complex64 {
    ew.dstar.conj() * ez.dstar - ew.dphi.conj() * ez.dphi
}

fn check_order(basis: &OpucBasis, order: usize, need: usize) -> Result<()> {
    if need > basis.degree() {
        return Err(Error::InvalidArgument(format!(
            "kernel of order {order} needs basis degree {need}, basis has {}",
            basis.degree()
        )));
    }
    Ok(())
}

/// Direct sums over `j = 0..=order`.
pub fn kernel_direct(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<KernelEval> {
    check_order(basis, order, order)?;
    let zero = Complex64::new(0.0, 0.0);
    let (mut k, mut k01, mut k11) = (zero, zero, zero);
    let upto = (order + 1).min(basis.degree());
    let vz = basis.values_at(z, upto);
    let vw = basis.values_at(w, upto);
    for (a, b) in vz.iter().zip(&vw).take(order + 1) {
        k += a.phi * b.phi.conj();
        k01 += a.phi * b.dphi.conj();
        k11 += a.dphi * b.dphi.conj();
    }
    let (s, r) = if order < basis.degree() {
        (Some(s_term(&vz[order + 1], &vw[order + 1])), Some(r_term(&vz[order + 1], &vw[order + 1])))
    } else {
        (None, None)
    };
    Ok(KernelEval {
        k,
        k01,
        k11,
        s,
        r,
        z,
        w,
        order,
    })
}

/// Christoffel-Darboux closed forms built from `phi_{order+1}` and `phi_{order+1}^*`.
pub fn kernel_cd(basis: &OpucBasis, order: usize, z: Complex64, w: Complex64) -> Result<KernelEval> {
    check_order(basis, order, order + 1)?;
    let one = Complex64::new(1.0, 0.0);
    let q = one - z * w.conj();
    let gap = q.norm();
    if !(gap > CD_BAND) {
        return Err(Error::NearDiagonalSingularity { gap });
    }
    let ez = basis.values_at(z, order + 1)[order + 1];
    let ew = basis.values_at(w, order + 1)[order + 1];
    let k = (ew.star.conj() * ez.star - ew.phi.conj() * ez.phi) / q;
    let s_zw = s_term(&ez, &ew);
    let s_wz = s_term(&ew, &ez);
    let r = r_term(&ez, &ew);
    let k01 = (s_zw + z * k) / q;
    let k11 = (r * q + z * s_wz.conj() + w.conj() * s_zw + (one + z * w.conj()) * k) / (q * q);
    Ok(KernelEval {
        k,
        k01,
        k11,
        s: Some(s_zw),
        r: Some(r),
        z,
        w,
        order,
    })
}
