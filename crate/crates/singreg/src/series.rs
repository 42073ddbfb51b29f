//! Short-distance expansion of the zero-energy scattering solution.
//!
//! Writing the potential core as `v = s(x)²/xⁿ` with `s` slowly varying, the
//! scattering equation `φ'' = (v/Λ²)·φ` is solved at locally fixed `s` by a
//! power prefactor times a cylinder function whose small-x form collapses to
//!
//! ```text
//! φ(x) ≈ C · x^{n/4} · Σ_p a_p x^{(n/2-1)p} · exp(e(x)),
//! e(x) = -2·x·sgn(v)·√|v(x)| / ((n-2)·Λ)
//! ```
//!
//! with coefficients `a_p` built from the order `μ = -1/(n-2)` by a Gamma
//! recurrence. The exponent keeps the exact x-dependent `√|v|` (the two
//! equivalent forms via `s(x)` and via `√|v|` are an identity), while
//! derivatives of the expansion treat `s` as locally constant, exactly as in
//! its derivation; the neglected `s'` term is bounded by the potential's
//! slow-variation ratio. For a pure power law `s` is a constant and the
//! expansion (and its log-derivative) is exact at every order.

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

/// Order of the cylinder-function solution, `μ = -1/(n-2)`.
pub fn mu_of(n: f64) -> Result<f64> {
    if !n.is_finite() || n <= 2.0 {
        return Err(Error::domain(format!("μ = -1/(n-2) needs n > 2, got {n}")));
    }
    Ok(-1.0 / (n - 2.0))
}

/// Series coefficients `a_0..a_k`.
///
/// The closed form is a ratio of Gamma functions,
/// `a_p = Γ(μ+p+1/2) / (p!·Γ(μ-p+1/2)) · [(n-2)Λ/(4·s0)]^p`, but `Γ(μ-p+1/2)`
/// walks into poles for some (n, p). The ratio is therefore built by the
/// recurrence product `∏_{j=0..p-1} (μ+1/2+j)(μ-1/2-j) / p!`, which is exact,
/// pole-free, and makes the n = 4 degeneracy (every `a_{p≥1}` carries the
/// factor `μ+1/2 = 0`) an exact zero instead of 0/0.
pub fn series_coefficients(n: f64, lambda: f64, s0: f64, k: usize) -> Result<Vec<f64>> {
    let mu = mu_of(n)?;
    if !(lambda > 0.0) || !(s0 > 0.0) {
        return Err(Error::domain(format!(
            "series needs Λ > 0 and s0 > 0, got Λ={lambda}, s0={s0}"
        )));
    }
    let beta = (n - 2.0) * lambda / (4.0 * s0);
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(1.0);
    let mut a = 1.0;
    for p in 1..=k {
        let j = (p - 1) as f64;
        a *= (mu + 0.5 + j) * (mu - 0.5 - j) * beta / p as f64;
        if !a.is_finite() {
            return Err(Error::domain(format!(
                "series coefficient a_{p} overflowed; order {k} is out of range"
            )));
        }
        coeffs.push(a);
    }
    Ok(coeffs)
}

/// The essential-singularity exponent `e(x) = -2·s(x)·x^{1-n/2} / ((n-2)·Λ)`,
/// identical to `-2·x·sgn(v)·√|v(x)| / ((n-2)·Λ)`.
pub fn exponent_term(pspec: &PotentialSpec, lambda: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("exponent term needs x > 0, got {x}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::domain(format!(
            "exponent term needs Λ > 0, got {lambda}"
        )));
    }
    let n = pspec.n();
    let s = pspec.s_of_x(x)?;
    Ok(-2.0 * s * x.powf(1.0 - 0.5 * n) / ((n - 2.0) * lambda))
}

/// The truncated short-distance expansion of the scattering solution.
#[derive(Debug, Clone)]
pub struct ShortRangeExpansion {
    n: f64,
    lambda: f64,
    mu: f64,
    s0: f64,
    coeffs: Vec<f64>,
}

impl ShortRangeExpansion {
    /// Build the order-k expansion for a potential; `s(0)` comes from the
    /// potential's closed form or Richardson extrapolation.
    pub fn new(pspec: &PotentialSpec, lambda: f64, k: usize) -> Result<Self> {
        let s0 = pspec.s_at_zero()?;
        Self::from_parts(pspec.n(), lambda, s0, k)
    }

    /// Build from raw numbers when no potential object is at hand.
    pub fn from_parts(n: f64, lambda: f64, s0: f64, k: usize) -> Result<Self> {
        let coeffs = series_coefficients(n, lambda, s0, k)?;
        Ok(ShortRangeExpansion {
            n,
            lambda,
            mu: mu_of(n)?,
            s0,
            coeffs,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Truncation order k.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_0..a_k`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// The series factor `S(x) = Σ_p a_p x^{(n/2-1)p}` (Horner in x^{n/2-1}).
    pub fn series_factor(&self, x: f64) -> f64 {
        let y = x.powf(0.5 * self.n - 1.0);
        let mut acc = 0.0;
        for &a in self.coeffs.iter().rev() {
            acc = acc * y + a;
        }
        acc
    }

    /// `dS/dx`.
    pub fn series_factor_derivative(&self, x: f64) -> f64 {
        let e = 0.5 * self.n - 1.0;
        let y = x.powf(e);
        let mut acc = 0.0;
        for (p, &a) in self.coeffs.iter().enumerate().skip(1).rev() {
            // d/dx [a y^p] = a·p·e·y^p / x
            acc += a * p as f64 * y.powi(p as i32);
        }
        acc * e / x
    }

    /// Evaluate `C·x^{n/4}·S(x)·exp(e(x))`.
    ///
    /// When the exponent is below the double-precision underflow threshold
    /// the value is an exact 0; the analytic limit at the core is 0 anyway.
    pub fn eval(&self, pspec: &PotentialSpec, c: f64, x: f64) -> Result<f64> {
        let e = exponent_term(pspec, self.lambda, x)?;
        if e < -745.0 {
            return Ok(0.0);
        }
        Ok(c * x.powf(0.25 * self.n) * self.series_factor(x) * e.exp())
    }

    /// Log-derivative `φ'/φ` of the expansion:
    ///
    /// ```text
    /// n/(4x) + S'(x)/S(x) + sgn(v)·√|v(x)|/Λ
    /// ```
    ///
    /// The last term differentiates the exponent at locally fixed `s` — the
    /// regime in which the expansion solves the equation; for power-law
    /// potentials this is exact. Normalization-free, so it is the quantity
    /// compared against ODE oracles.
    pub fn log_derivative(&self, pspec: &PotentialSpec, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "log-derivative needs x > 0, got {x}"
            )));
        }
        let s = pspec.s_of_x(x)?;
        let sfac = self.series_factor(x);
        if sfac == 0.0 {
            return Err(Error::domain(format!(
                "truncated series factor vanishes at x = {x}; outside the short-range regime"
            )));
        }
        Ok(0.25 * self.n / x
            + self.series_factor_derivative(x) / sfac
            + s * x.powf(-0.5 * self.n) / self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mu_values() {
        assert_eq!(mu_of(12.0).unwrap(), -0.1);
        assert_eq!(mu_of(4.0).unwrap(), -0.5);
        assert_eq!(mu_of(3.0).unwrap(), -1.0);
        assert!(mu_of(2.0).is_err());
        assert!(mu_of(f64::INFINITY).is_err());
    }

    #[test]
    fn leading_coefficients_lj() {
        for &lambda in &[0.430, 0.494, 1.0] {
            let a = series_coefficients(12.0, lambda, 2.0, 2).unwrap();
            assert_eq!(a[0], 1.0);
            assert_relative_eq!(a[1], -0.3 * lambda, max_relative = 1e-14);
            assert_relative_eq!(a[2], 0.42 * lambda * lambda, max_relative = 1e-14);
        }
    }

    #[test]
    fn n4_series_truncates_exactly() {
        let a = series_coefficients(4.0, 0.7, 1.0, 6).unwrap();
        assert_eq!(a[0], 1.0);
        for &ap in &a[1..] {
            assert_eq!(ap, 0.0);
        }
    }

    #[test]
    fn coefficient_overflow_is_reported() {
        // coefficients grow factorially; a huge order must fail loudly
        assert!(series_coefficients(12.0, 1.0, 2.0, 400).is_err());
    }

    #[test]
    fn exponent_term_power4_closed_form() {
        let p = PotentialSpec::power_law(4.0).unwrap();
        for &(lambda, x) in &[(0.5, 0.3), (1.0, 0.1), (0.25, 2.0)] {
            let e = exponent_term(&p, lambda, x).unwrap();
            assert_relative_eq!(e, -1.0 / (lambda * x), max_relative = 1e-13);
        }
    }

    #[test]
    fn exponent_term_lj() {
        let lj = PotentialSpec::lennard_jones();
        assert_eq!(exponent_term(&lj, 0.43, 1.0).unwrap(), 0.0);
        // deep core: e ≈ -4/(10·Λ·x⁵)
        let e = exponent_term(&lj, 0.43, 0.01).unwrap();
        assert_relative_eq!(e, -4.0 / (10.0 * 0.43 * 1e-10), max_relative = 1e-9);
        assert!(exponent_term(&lj, 0.43, 0.0).is_err());
        assert!(exponent_term(&lj, 0.0, 1.0).is_err());
    }

    #[test]
    fn eval_power4_closed_form() {
        let p = PotentialSpec::power_law(4.0).unwrap();
        let exp = ShortRangeExpansion::from_parts(4.0, 0.5, 1.0, 0).unwrap();
        for &x in &[0.2, 0.5, 1.0, 3.0] {
            let phi = exp.eval(&p, 1.0, x).unwrap();
            assert_relative_eq!(phi, x * (-1.0 / (0.5 * x)).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn eval_underflows_to_exact_zero() {
        let lj = PotentialSpec::lennard_jones();
        let exp = ShortRangeExpansion::new(&lj, 0.43, 1).unwrap();
        assert_eq!(exp.eval(&lj, 1.0, 0.05).unwrap(), 0.0);
        assert_eq!(exp.eval(&lj, 1.0, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn log_derivative_power4_exact() {
        let p = PotentialSpec::power_law(4.0).unwrap();
        let exp = ShortRangeExpansion::from_parts(4.0, 0.7, 1.0, 3).unwrap();
        for &x in &[0.1, 0.4, 1.0, 2.0] {
            let u = exp.log_derivative(&p, x).unwrap();
            assert_relative_eq!(u, 1.0 / x + 1.0 / (0.7 * x * x), max_relative = 1e-13);
        }
    }

    #[test]
    fn log_derivative_matches_numeric_derivative_of_eval() {
        // central difference of ln φ for the pure power law, where the
        // expansion is exact
        let p = PotentialSpec::power_law(6.0).unwrap();
        let exp = ShortRangeExpansion::from_parts(6.0, 0.9, 1.0, 4).unwrap();
        let x = 0.6;
        let h = 1e-6;
        let lo = exp.eval(&p, 1.0, x - h).unwrap().ln();
        let hi = exp.eval(&p, 1.0, x + h).unwrap().ln();
        let numeric = (hi - lo) / (2.0 * h);
        assert_relative_eq!(
            exp.log_derivative(&p, x).unwrap(),
            numeric,
            max_relative = 1e-7
        );
    }

    proptest! {
        // ratio identity holds to rounding under the product construction
        #[test]
        fn coefficient_ratio_identity(
            n in 4.5f64..20.0,
            lambda in 0.1f64..2.0,
            s0 in 0.5f64..4.0,
        ) {
            let k = 6;
            let a = series_coefficients(n, lambda, s0, k).unwrap();
            let mu = mu_of(n).unwrap();
            let beta = (n - 2.0) * lambda / (4.0 * s0);
            for p in 0..k {
                let expect = a[p] * (mu + p as f64 + 0.5) * (mu - p as f64 - 0.5)
                    * beta / (p + 1) as f64;
                prop_assert!(
                    (a[p + 1] - expect).abs() <= 1e-14 * expect.abs(),
                    "a_{} = {}, ratio form {}", p + 1, a[p + 1], expect
                );
            }
        }

        // the two exponent forms (via s(x), via √|v|) are the same identity
        #[test]
        fn exponent_forms_agree(x in 0.05f64..8.0, lambda in 0.2f64..1.5) {
            let lj = PotentialSpec::lennard_jones();
            let e1 = exponent_term(&lj, lambda, x).unwrap();
            let v = lj.evaluate(x).unwrap();
            let e2 = -2.0 * x * v.signum() * v.abs().sqrt() / (10.0 * lambda);
            prop_assert!((e1 - e2).abs() <= 1e-12 * e1.abs().max(1e-12));
        }

        // positive amplitude keeps the truncated solution positive at small x
        #[test]
        fn eval_positive_small_x(x in 0.21f64..0.5, lambda in 0.3f64..1.0) {
            let lj = PotentialSpec::lennard_jones();
            let exp = ShortRangeExpansion::new(&lj, lambda, 1).unwrap();
            let phi = exp.eval(&lj, 1.0, x).unwrap();
            prop_assert!(phi >= 0.0);
        }
    }
}
