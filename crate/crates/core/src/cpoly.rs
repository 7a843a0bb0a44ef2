//! Dense complex polynomials with an explicit nominal degree.
//!
//! A [`ComplexPoly`] keeps every coefficient up to its nominal degree, including
//! trailing zeros, so that the reversal `p*(z) = z^n conj(p(1/conj z))` is taken
//! with respect to the intended degree rather than the numerical one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    /// Builds a polynomial from `c_0..c_n`; the nominal degree is `coeffs.len() - 1`.
    ///
    /// An empty slice is read as the zero polynomial of degree 0.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            return Self::zero(0);
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); degree + 1],
        }
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// `z^k` with nominal degree `k`.
    pub fn monomial(k: usize) -> Self {
        let mut p = Self::zero(k);
        p.coeffs[k] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `p'` with nominal degree `max(n - 1, 0)`.
    pub fn derivative(&self) -> ComplexPoly {
        if self.degree() == 0 {
            return Self::zero(0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self { coeffs }
    }

    /// Reversed polynomial: coefficient `k` is `conj(c_{n-k})`.
    pub fn star(&self) -> ComplexPoly {
        Self {
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// Coefficients reversed without conjugation, i.e. `z^n p(1/z)`.
    pub fn reversed(&self) -> ComplexPoly {
        Self {
            coeffs: self.coeffs.iter().rev().copied().collect(),
        }
    }

    pub fn scaled(&self, a: Complex64) -> ComplexPoly {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * a).collect(),
        }
    }

    /// `a p + b q`, padded to the larger nominal degree.
    pub fn linear_combination(a: Complex64, p: &ComplexPoly, b: Complex64, q: &ComplexPoly) -> Self {
        let n = p.degree().max(q.degree());
        let mut out = Self::zero(n);
        for (k, c) in p.coeffs.iter().enumerate() {
            out.coeffs[k] += a * c;
        }
        for (k, c) in q.coeffs.iter().enumerate() {
            out.coeffs[k] += b * c;
        }
        out
    }

    /// `z p(z)`; nominal degree grows by one.
    pub fn shift_up(&self) -> ComplexPoly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// `p * s` with the nominal degree padded (or truncated) to `degree`.
    pub(crate) fn padded(&self, degree: usize) -> ComplexPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = ComplexPoly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.eval(c(1.0, 0.0)), c(6.0, 0.0));
        let q = ComplexPoly::new(vec![c(0.3, -0.7), c(2.0, 1.0), c(5.0, 5.0)]);
        assert_eq!(q.eval(c(0.0, 0.0)), c(0.3, -0.7));
        assert_eq!(ComplexPoly::monomial(3).eval(c(2.0, 0.0)), c(8.0, 0.0));
    }

    #[test]
    fn derivative_examples() {
        let p = ComplexPoly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(), ComplexPoly::from_real(&[2.0, 6.0]));
        assert_eq!(ComplexPoly::from_real(&[5.0]).derivative(), ComplexPoly::from_real(&[0.0]));
        assert_eq!(ComplexPoly::monomial(2).derivative(), ComplexPoly::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn eval_with_derivative_matches_derivative_poly() {
        let p = ComplexPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0), c(0.1, 0.9)]);
        let z = c(0.7, -1.3);
        let (v, dv) = p.eval_with_derivative(z);
        assert!((v - p.eval(z)).norm() < 1e-14);
        assert!((dv - p.derivative().eval(z)).norm() < 1e-13);
    }

    #[test]
    fn star_examples() {
        let p = ComplexPoly::monomial(2);
        assert_eq!(p.star(), ComplexPoly::from_real(&[1.0, 0.0, 0.0]));
        let q = ComplexPoly::new(vec![c(1.0, 1.0), c(2.0, 0.0)]);
        assert_eq!(q.star(), ComplexPoly::new(vec![c(2.0, 0.0), c(1.0, -1.0)]));
    }

    #[test]
    fn star_keeps_nominal_degree_with_zero_leading() {
        let p = ComplexPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.star(), ComplexPoly::monomial(2));
    }

    fn arb_poly() -> impl Strategy<Value = ComplexPoly> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..12)
            .prop_map(|v| ComplexPoly::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn star_is_involution(p in arb_poly()) {
            prop_assert_eq!(p.star().star(), p);
        }

        #[test]
        fn star_matches_reflection(p in arb_poly(), r in 0.2f64..3.0, th in 0.0f64..std::f64::consts::TAU) {
            let z = Complex64::from_polar(r, th);
            let n = p.degree() as i32;
            let lhs = p.star().eval(z);
            let rhs = z.powi(n) * p.eval(Complex64::new(1.0, 0.0) / z.conj()).conj();
            let scale = p.coeffs().iter().map(|c| c.norm()).sum::<f64>() * r.max(1.0).powi(n);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(lhs.norm()));
        }

        #[test]
        fn derivative_is_linear(p in arb_poly(), q in arb_poly(), a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0)) {
            let a = c(a.0, a.1);
            let b = c(b.0, b.1);
            let lhs = ComplexPoly::linear_combination(a, &p, b, &q).derivative();
            let rhs = ComplexPoly::linear_combination(a, &p.derivative(), b, &q.derivative());
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn star_relative_error_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = ComplexPoly::new((0..9).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
        let ps = p.star();
        for _ in 0..100 {
            let z = Complex64::from_polar(rng.random_range(0.2..3.0), rng.random_range(0.0..std::f64::consts::TAU));
            let rhs = z.powi(8) * p.eval(Complex64::new(1.0, 0.0) / z.conj()).conj();
            let lhs = ps.eval(z);
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm(), "{lhs} vs {rhs}");
        }
    }
}
