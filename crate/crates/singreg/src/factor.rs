//! Self-similar factor approximants.
//!
//! A truncated series `f/f₀ = 1 + a₁x + a₂x² + …` is extrapolated to all
//! x ≥ 0 by the product form
//!
//! ```text
//! f*(x) = f₀(x) · ∏_{j=1..N} (1 + A_j·x)^{n_j}
//! ```
//!
//! The 2N parameters are fixed by *training conditions* (the Taylor
//! re-expansion of the product must reproduce the known coefficients) and
//! optionally by *boundary conditions* prescribing the large-x behavior
//! `f ≃ C·x^ν`: the factor exponents must then sum to `ν` minus the
//! prefactor power, and the product of `A_j^{n_j}` fixes the amplitude.
//!
//! Training is a classical exponential-moment problem in disguise: taking the
//! logarithmic derivative of the product turns the conditions into power sums
//! `S_m = Σ_j n_j·A_j^m`, so a Hankel/Prony solve yields the exact `A_j` for
//! consistent input. That solution seeds a damped Newton polish of the full
//! nonlinear system (with seeded multistart fallback), which also absorbs the
//! boundary constraints that are not pure power sums.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Training residual accepted as converged.
const RESIDUAL_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 200;
const MULTISTART_COUNT: usize = 16;

/// Power prefactor `f₀(x) = amplitude · x^power`.
///
/// Exponential prefactors that tend to 1 at large x (the short-range
/// essential singularity) multiply the approximant from outside and never
/// enter training or boundary accounting, so they are not stored here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prefactor {
    pub amplitude: f64,
    pub power: f64,
}

impl Prefactor {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * x.powf(self.power)
    }
}

/// Series to be extrapolated: coefficients of `f/f₀` with `a_0 = 1`, plus the
/// prefactor descriptor. A `None` amplitude is a free parameter to be fixed
/// by boundary data.
#[derive(Debug, Clone)]
pub struct SeriesInput {
    pub coeffs: Vec<f64>,
    pub prefactor_power: f64,
    pub prefactor_amplitude: Option<f64>,
}

/// Prescribed large-x behavior `f(x) ≃ amplitude · x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub amplitude: f64,
    pub exponent: f64,
}

/// A trained factor approximant `f₀(x)·∏(1+A_j x)^{n_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorApproximant {
    prefactor: Prefactor,
    factors: Vec<(f64, f64)>,
    boundary: Option<BoundaryData>,
}

impl FactorApproximant {
    pub fn new(prefactor: Prefactor, factors: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, n) in &factors {
            if !a.is_finite() || !n.is_finite() {
                return Err(Error::domain(format!(
                    "factor parameters must be finite, got ({a}, {n})"
                )));
            }
        }
        if !prefactor.amplitude.is_finite() || !prefactor.power.is_finite() {
            return Err(Error::domain("prefactor must be finite"));
        }
        Ok(FactorApproximant {
            prefactor,
            factors,
            boundary: None,
        })
    }

    pub fn prefactor(&self) -> Prefactor {
        self.prefactor
    }

    /// The `(A_j, n_j)` pairs.
    pub fn factors(&self) -> &[(f64, f64)] {
        &self.factors
    }

    /// Boundary data the approximant was trained against, if any.
    pub fn boundary(&self) -> Option<BoundaryData> {
        self.boundary
    }

    /// Attach the boundary data an externally constructed approximant is
    /// known to satisfy.
    pub fn with_boundary(mut self, b: BoundaryData) -> Self {
        self.boundary = Some(b);
        self
    }

    /// Evaluate `f₀(x)·∏(1+A_j x)^{n_j}` for x ≥ 0.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!(
                "approximant domain is x ≥ 0, got {x}"
            )));
        }
        let mut f = self.prefactor.eval(x);
        for &(a, n) in &self.factors {
            let base = 1.0 + a * x;
            if base <= 0.0 {
                return Err(Error::domain(format!(
                    "factor (1 + {a}·x) is non-positive at x = {x}; branch cut crossed"
                )));
            }
            f *= base.powf(n);
        }
        Ok(f)
    }

    /// Asymptotic behavior `f(x) → amplitude·x^exponent` as x → ∞:
    /// amplitude = f₀-amplitude·∏A_j^{n_j}, exponent = f₀-power + Σn_j.
    ///
    /// Meaningful for factors with A_j > 0 (elsewhere the product has no real
    /// power asymptote).
    pub fn large_x_behavior(&self) -> (f64, f64) {
        let mut amp = self.prefactor.amplitude;
        let mut expo = self.prefactor.power;
        for &(a, n) in &self.factors {
            amp *= a.powf(n);
            expo += n;
        }
        (amp, expo)
    }

    /// Taylor coefficients of `∏(1+A_j x)^{n_j}` about 0, orders 0..=k.
    pub fn taylor(&self, k: usize) -> Vec<f64> {
        taylor_of_factors(&self.factors, k)
    }

    /// Serialize as a plain-text record; 17-significant-digit decimals make
    /// the round trip bit-exact.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "prefactor {:.16e} {:.16e}\n",
            self.prefactor.amplitude, self.prefactor.power
        ));
        for &(a, n) in &self.factors {
            out.push_str(&format!("factor {a:.16e} {n:.16e}\n"));
        }
        if let Some(b) = self.boundary {
            out.push_str(&format!(
                "boundary {:.16e} {:.16e}\n",
                b.amplitude, b.exponent
            ));
        }
        out
    }

    /// Parse a record produced by [`FactorApproximant::to_record`].
    pub fn from_record(text: &str) -> Result<Self> {
        let mut prefactor: Option<Prefactor> = None;
        let mut factors = Vec::new();
        let mut boundary = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or("");
            let nums: Vec<f64> = it
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::config(format!("record line {}: bad number in `{line}`", idx + 1))
                })?;
            match (tag, nums.len()) {
                ("prefactor", 2) => {
                    prefactor = Some(Prefactor {
                        amplitude: nums[0],
                        power: nums[1],
                    })
                }
                ("factor", 2) => factors.push((nums[0], nums[1])),
                ("boundary", 2) => {
                    boundary = Some(BoundaryData {
                        amplitude: nums[0],
                        exponent: nums[1],
                    })
                }
                _ => {
                    return Err(Error::config(format!(
                        "record line {}: expected `prefactor|factor|boundary a b`, got `{line}`",
                        idx + 1
                    )))
                }
            }
        }
        let prefactor = prefactor.ok_or_else(|| Error::config("record has no prefactor line"))?;
        let mut fa = FactorApproximant::new(prefactor, factors)?;
        fa.boundary = boundary;
        Ok(fa)
    }
}

/// The approximant constants of the single-factor scattering solution:
/// `α = n/(n-2)`, `μ = -1/(n-2)` and
/// `A = (n-2)·Λ·Γ(μ+3/2)·(1/2-μ) / (2·s0·Γ(μ+1/2)·α)`.
///
/// The Gamma ratio is reduced by the recurrence `Γ(μ+3/2) = (μ+1/2)·Γ(μ+1/2)`
/// to `A = (n-2)·Λ·(1/4-μ²)/(2·s0·α)`; both evaluations are carried out and
/// must agree to 1e-12. At n = 4 the factor `1/4-μ²` vanishes identically and
/// the single-factor construction collapses, which is reported as a
/// degeneracy rather than returning A = 0. For 2 < n < 4 the returned A is
/// negative; downstream users that need `(1+A·y)` positive on y ≥ 0 must
/// reject it themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormConstants {
    pub a: f64,
    pub alpha: f64,
    pub mu: f64,
}

pub fn closed_form_constants(n: f64, lambda: f64, s0: f64) -> Result<ClosedFormConstants> {
    let mu = crate::series::mu_of(n)?;
    if !(lambda > 0.0) || !(s0 > 0.0) {
        return Err(Error::domain(format!(
            "constants need Λ > 0 and s0 > 0, got Λ={lambda}, s0={s0}"
        )));
    }
    if n == 4.0 {
        return Err(Error::degenerate(
            "n = 4 makes 1/4 - μ² = 0: the single-factor construction collapses (A = 0); \
             use the exact power-law oracle instead",
        ));
    }
    let alpha = n / (n - 2.0);
    // recurrence-reduced Gamma ratio vs. the directly simplified product
    let a_gamma = (n - 2.0) * lambda * (mu + 0.5) * (0.5 - mu) / (2.0 * s0 * alpha);
    let a = (n - 2.0) * lambda * (0.25 - mu * mu) / (2.0 * s0 * alpha);
    if (a_gamma - a).abs() > 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::convergence(format!(
            "constant A evaluations disagree: {a_gamma} vs {a}"
        )));
    }
    Ok(ClosedFormConstants { a, alpha, mu })
}

/// Taylor coefficients of `∏(1+A_j x)^{n_j}` about 0, orders 0..=k.
///
/// Built through the log series `ln∏ = Σ_j n_j ln(1+A_j x)` and
/// exponentiated by the convolution recurrence `m·p_m = Σ_{i=1..m} i·l_i·p_{m-i}`.
pub fn taylor_of_factors(factors: &[(f64, f64)], k: usize) -> Vec<f64> {
    let mut l = vec![0.0; k + 1];
    for m in 1..=k {
        let mut s = 0.0;
        for &(a, n) in factors {
            s += n * a.powi(m as i32);
        }
        // l_m = (-1)^{m+1} S_m / m
        l[m] = if m % 2 == 1 { s } else { -s } / m as f64;
    }
    let mut p = vec![0.0; k + 1];
    p[0] = 1.0;
    for m in 1..=k {
        let mut acc = 0.0;
        for i in 1..=m {
            acc += i as f64 * l[i] * p[m - i];
        }
        p[m] = acc / m as f64;
    }
    p
}

/// Power sums `S_1..S_count` of the factor parameters, recovered from Taylor
/// coefficients via the log-series recurrence
/// `m·l_m = m·a_m - Σ_{i=1..m-1} i·l_i·a_{m-i}`, `S_m = (-1)^{m+1}·m·l_m`.
fn log_moments(coeffs: &[f64], count: usize) -> Result<Vec<f64>> {
    if coeffs.len() < count + 1 {
        return Err(Error::domain(format!(
            "need {count} series coefficients beyond a_0, got {}",
            coeffs.len() - 1
        )));
    }
    let mut l = vec![0.0; count + 1];
    let mut s = vec![0.0; count + 1];
    for m in 1..=count {
        let mut acc = m as f64 * coeffs[m];
        for i in 1..m {
            acc -= i as f64 * l[i] * coeffs[m - i];
        }
        l[m] = acc / m as f64;
        s[m] = if m % 2 == 1 { 1.0 } else { -1.0 } * m as f64 * l[m];
    }
    Ok(s[1..].to_vec())
}

/// Train a factor approximant on series coefficients, optionally constrained
/// by large-x boundary data. `n_factors` is N; `seed` drives the multistart
/// point generation and makes the whole call deterministic.
///
/// Conditions required: 2N, taken from the leading Taylor coefficients plus
/// (when boundary data is present) the exponent-sum and amplitude
/// constraints. With a fixed prefactor amplitude both boundary equations
/// constrain the factors; with a free amplitude the amplitude equation is
/// solved afterwards for the prefactor instead.
pub fn train(
    series: &SeriesInput,
    boundary: Option<&BoundaryData>,
    n_factors: usize,
    seed: u64,
) -> Result<FactorApproximant> {
    if series.coeffs.is_empty() || series.coeffs[0] != 1.0 {
        return Err(Error::domain(
            "series input must start with a_0 = 1 (series of f/f₀)",
        ));
    }
    if !series.prefactor_power.is_finite() {
        return Err(Error::domain("prefactor power must be finite"));
    }
    let k_avail = series.coeffs.len() - 1;
    let n = n_factors;

    let boundary = boundary.copied();
    if series.prefactor_amplitude.is_none() && boundary.is_none() {
        return Err(Error::domain(
            "a free prefactor amplitude requires boundary data to fix it",
        ));
    }

    // All-zero series: the approximant is the prefactor alone (or the
    // construction is degenerate if a boundary demands growth it cannot
    // produce).
    if series.coeffs[1..].iter().all(|&a| a == 0.0) {
        return train_trivial(series, boundary);
    }

    if boundary.is_some() && n == 1 && k_avail >= 1 && series.coeffs[1] == 0.0 {
        return Err(Error::degenerate(
            "a_1 = 0 with a single boundary-constrained factor: the leading factor constant \
             vanishes and the construction collapses",
        ));
    }
    if n == 0 {
        return Err(Error::domain(
            "a nonzero series cannot be matched by zero factors",
        ));
    }

    let sys = TrainSystem::assemble(series, boundary, n)?;
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(MULTISTART_COUNT);
    if let Some(p) = sys.prony_start() {
        starts.push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sys.moment_scale();
    while starts.len() < MULTISTART_COUNT {
        let mut theta = Vec::with_capacity(2 * n);
        for _ in 0..n {
            theta.push(scale * 10f64.powf(rng.gen_range(-1.0..1.0)));
        }
        for _ in 0..n {
            theta.push(rng.gen_range(-4.0..4.0));
        }
        starts.push(theta);
    }

    for theta0 in &starts {
        if let Some(theta) = newton_polish(&sys, theta0) {
            if let Some(fa) = sys.finish(series, boundary, &theta)? {
                return Ok(fa);
            }
        }
    }
    Err(Error::convergence(format!(
        "no real factor solution found for N = {n} after {MULTISTART_COUNT} starts \
         (residual tolerance {RESIDUAL_TOL:.0e}); the truncated series may not admit \
         a real product representation"
    )))
}

fn train_trivial(
    series: &SeriesInput,
    boundary: Option<BoundaryData>,
) -> Result<FactorApproximant> {
    let p0 = series.prefactor_power;
    match boundary {
        None => {
            // amplitude fixed or the earlier guard would have errored
            let amp = series.prefactor_amplitude.unwrap();
            let mut fa = FactorApproximant::new(
                Prefactor {
                    amplitude: amp,
                    power: p0,
                },
                vec![],
            )?;
            fa.boundary = None;
            Ok(fa)
        }
        Some(b) => {
            if (b.exponent - p0).abs() > 1e-12 {
                return Err(Error::degenerate(format!(
                    "an identically-1 series cannot bend x^{p0} into x^{}; \
                     the boundary exponent is unreachable without factors",
                    b.exponent
                )));
            }
            let amp = match series.prefactor_amplitude {
                Some(a) => {
                    if (a - b.amplitude).abs() > 1e-12 * b.amplitude.abs().max(1.0) {
                        return Err(Error::domain(format!(
                            "boundary amplitude {} contradicts the fixed prefactor amplitude {a}",
                            b.amplitude
                        )));
                    }
                    a
                }
                None => b.amplitude,
            };
            let mut fa = FactorApproximant::new(
                Prefactor {
                    amplitude: amp,
                    power: p0,
                },
                vec![],
            )?;
            fa.boundary = Some(b);
            Ok(fa)
        }
    }
}

/// The nonlinear training system over θ = (A_1..A_N, n_1..n_N).
struct TrainSystem {
    n: usize,
    /// Taylor coefficients to match, orders 1..=k_used.
    targets: Vec<f64>,
    /// Σn_j target (boundary exponent minus prefactor power), when bound.
    exponent_sum: Option<f64>,
    /// Σn_j·ln A_j target, when the amplitude equation constrains the factors.
    log_amplitude: Option<f64>,
    /// Moment sequence seeding Prony (length 2N when available).
    moments: Option<Vec<f64>>,
    /// True when moments start at S_0 (boundary case) rather than S_1.
    moments_from_zero: bool,
}

impl TrainSystem {
    fn assemble(
        series: &SeriesInput,
        boundary: Option<BoundaryData>,
        n: usize,
    ) -> Result<TrainSystem> {
        let k_avail = series.coeffs.len() - 1;
        match boundary {
            None => {
                let k_used = 2 * n;
                if k_avail < k_used {
                    return Err(Error::domain(format!(
                        "training N = {n} factors without boundary data needs {k_used} series \
                         coefficients, got {k_avail}"
                    )));
                }
                if k_avail > k_used {
                    log::debug!(
                        "{} extra series coefficients beyond order {k_used} are unused",
                        k_avail - k_used
                    );
                }
                let moments = log_moments(&series.coeffs, k_used)?;
                Ok(TrainSystem {
                    n,
                    targets: series.coeffs[1..=k_used].to_vec(),
                    exponent_sum: None,
                    log_amplitude: None,
                    moments: Some(moments),
                    moments_from_zero: false,
                })
            }
            Some(b) => {
                let s0_target = b.exponent - series.prefactor_power;
                match series.prefactor_amplitude {
                    // Free amplitude: the amplitude equation fixes f₀ after
                    // the fact, so the factor conditions are the exponent sum
                    // plus 2N-1 Taylor matches — a pure moment problem.
                    None => {
                        let k_used = 2 * n - 1;
                        if k_avail < k_used {
                            return Err(Error::domain(format!(
                                "training N = {n} boundary-constrained factors with a free \
                                 amplitude needs {k_used} series coefficients, got {k_avail}"
                            )));
                        }
                        let mut moments = vec![s0_target];
                        moments.extend(log_moments(&series.coeffs, k_used)?);
                        Ok(TrainSystem {
                            n,
                            targets: series.coeffs[1..=k_used].to_vec(),
                            exponent_sum: Some(s0_target),
                            log_amplitude: None,
                            moments: Some(moments),
                            moments_from_zero: true,
                        })
                    }
                    // Fixed amplitude: both boundary equations constrain the
                    // factors; the amplitude equation is a log-moment, so
                    // Prony seeds from one fewer moment and Newton does the
                    // rest.
                    Some(amp) => {
                        let k_used = 2 * n - 2;
                        if k_avail < k_used {
                            return Err(Error::domain(format!(
                                "training N = {n} boundary-constrained factors needs {k_used} \
                                 series coefficients, got {k_avail}"
                            )));
                        }
                        let ratio = b.amplitude / amp;
                        if !(ratio > 0.0) {
                            return Err(Error::domain(format!(
                                "boundary amplitude {} and prefactor amplitude {amp} need the \
                                 same sign for a real factor product",
                                b.amplitude
                            )));
                        }
                        let mut moments = vec![s0_target];
                        moments.extend(log_moments(&series.coeffs, k_used)?);
                        // Pad with a geometric guess so Prony still has 2N
                        // numbers to chew on; Newton corrects it.
                        while moments.len() < 2 * n {
                            let m = moments.len();
                            let guess = if m >= 2 && moments[m - 2] != 0.0 {
                                moments[m - 1] * moments[m - 1] / moments[m - 2]
                            } else {
                                moments[m - 1]
                            };
                            moments.push(guess);
                        }
                        Ok(TrainSystem {
                            n,
                            targets: series.coeffs[1..=k_used].to_vec(),
                            exponent_sum: Some(s0_target),
                            log_amplitude: Some(ratio.ln()),
                            moments: Some(moments),
                            moments_from_zero: true,
                        })
                    }
                }
            }
        }
    }

    /// Characteristic factor-constant magnitude from the moment sequence.
    fn moment_scale(&self) -> f64 {
        if let Some(m) = &self.moments {
            for w in m.windows(2) {
                if w[0].abs() > 1e-300 {
                    let r = (w[1] / w[0]).abs();
                    if r.is_finite() && r > 1e-6 {
                        return r;
                    }
                }
            }
        }
        1.0
    }

    /// Exact solve for consistent input: Prony recurrence on the moment
    /// sequence gives the A_j as polynomial roots, then a Vandermonde solve
    /// gives the n_j.
    fn prony_start(&self) -> Option<Vec<f64>> {
        let m = self.moments.as_ref()?;
        let n = self.n;
        debug_assert_eq!(m.len(), 2 * n);
        // Hankel system: m_{i+N} = Σ_j c_j·m_{i+j}
        let mut h = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                h[i][j] = m[i + j];
            }
            rhs[i] = m[i + n];
        }
        let c = solve_linear(h, rhs)?;
        let mut poly = vec![0.0; n + 1];
        poly[n] = 1.0;
        for (j, &cj) in c.iter().enumerate() {
            poly[j] = -cj;
        }
        let roots = real_roots(&poly)?;
        if roots.len() != n {
            return None;
        }
        // Vandermonde: Σ_j n_j·A_j^{m0+i} = moment_i
        let m0 = if self.moments_from_zero { 0 } else { 1 };
        let mut v = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for i in 0..n {
            for (j, &a) in roots.iter().enumerate() {
                v[i][j] = a.powi((m0 + i) as i32);
            }
            b[i] = m[i];
        }
        let weights = solve_linear(v, b)?;
        let mut theta = roots;
        theta.extend(weights);
        Some(theta)
    }

    /// Residual vector at θ; length always 2N.
    fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.n;
        let factors: Vec<(f64, f64)> = (0..n).map(|j| (theta[j], theta[n + j])).collect();
        let mut r = Vec::with_capacity(2 * n);
        if let Some(target) = self.exponent_sum {
            let sum: f64 = factors.iter().map(|&(_, nj)| nj).sum();
            r.push(sum - target);
        }
        if let Some(target) = self.log_amplitude {
            let mut acc = 0.0;
            for &(a, nj) in &factors {
                if a <= 0.0 {
                    acc = f64::NAN; // outside the real-amplitude branch
                    break;
                }
                acc += nj * a.ln();
            }
            r.push(acc - target);
        }
        let taylor = taylor_of_factors(&factors, self.targets.len());
        for (i, &t) in self.targets.iter().enumerate() {
            r.push(taylor[i + 1] - t);
        }
        r
    }

    /// Build the result from converged parameters; `None` sends the caller to
    /// the next start (non-finite or complex-adjacent garbage).
    fn finish(
        &self,
        series: &SeriesInput,
        boundary: Option<BoundaryData>,
        theta: &[f64],
    ) -> Result<Option<FactorApproximant>> {
        let n = self.n;
        let mut factors: Vec<(f64, f64)> = (0..n).map(|j| (theta[j], theta[n + j])).collect();
        if factors
            .iter()
            .any(|&(a, nj)| !a.is_finite() || !nj.is_finite())
        {
            return Ok(None);
        }
        // canonical order for determinism and comparisons
        factors.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let amplitude = match series.prefactor_amplitude {
            Some(a) => a,
            None => {
                // amplitude equation: amp·∏A_j^{n_j} = C
                let b = boundary.unwrap();
                let mut prod = 1.0;
                for &(a, nj) in &factors {
                    if a <= 0.0 {
                        return Ok(None);
                    }
                    prod *= a.powf(nj);
                }
                if !prod.is_finite() || prod == 0.0 {
                    return Ok(None);
                }
                b.amplitude / prod
            }
        };
        let mut fa = FactorApproximant::new(
            Prefactor {
                amplitude,
                power: series.prefactor_power,
            },
            factors,
        )?;
        fa.boundary = boundary;
        Ok(Some(fa))
    }
}

/// Damped Newton with a numeric Jacobian and backtracking line search.
fn newton_polish(sys: &TrainSystem, theta0: &[f64]) -> Option<Vec<f64>> {
    let dim = theta0.len();
    let mut theta = theta0.to_vec();
    let mut r = sys.residual(&theta);
    let mut rn = inf_norm(&r);
    if !rn.is_finite() {
        return None;
    }
    for _ in 0..NEWTON_MAX_ITER {
        if rn < RESIDUAL_TOL {
            return Some(theta);
        }
        // central-difference Jacobian
        let mut jac = vec![vec![0.0; dim]; dim];
        for j in 0..dim {
            let h = 1e-7 * (1.0 + theta[j].abs());
            let mut tp = theta.clone();
            tp[j] += h;
            let mut tm = theta.clone();
            tm[j] -= h;
            let rp = sys.residual(&tp);
            let rm = sys.residual(&tm);
            for i in 0..dim {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_linear(jac, neg_r)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..14 {
            let trial: Vec<f64> = theta
                .iter()
                .zip(&delta)
                .map(|(t, d)| t + lambda * d)
                .collect();
            let rt = sys.residual(&trial);
            let rtn = inf_norm(&rt);
            if rtn.is_finite() && rtn < rn {
                theta = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None; // stuck; try the next start
        }
    }
    if rn < RESIDUAL_TOL {
        Some(theta)
    } else {
        None
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Gaussian elimination with partial pivoting; `None` on singular systems.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Real roots of a monic real polynomial (coefficients low-to-high,
/// `poly[deg] = 1`), via Durand-Kerner in complex arithmetic. Returns `None`
/// when any root keeps a non-negligible imaginary part: complex factor pairs
/// are rejected in this artifact because the downstream correlation function
/// must be real and positive.
fn real_roots(poly: &[f64]) -> Option<Vec<f64>> {
    let deg = poly.len() - 1;
    if deg == 0 {
        return Some(vec![]);
    }
    if deg == 1 {
        return Some(vec![-poly[0]]);
    }
    // scale-aware starting circle
    let radius = 1.0 + poly[..deg].iter().map(|c| c.abs()).fold(0.0f64, f64::max);
    let mut z: Vec<(f64, f64)> = (0..deg)
        .map(|j| {
            let ang = 2.0 * std::f64::consts::PI * j as f64 / deg as f64 + 0.4;
            (
                radius.powf(1.0 / deg as f64) * ang.cos(),
                radius.powf(1.0 / deg as f64) * ang.sin(),
            )
        })
        .collect();
    let eval = |x: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for &c in poly.iter().rev() {
            acc = c_add(c_mul(acc, x), (c, 0.0));
        }
        acc
    };
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut denom = (1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom = c_mul(denom, c_sub(z[i], z[j]));
                }
            }
            let step = c_div(eval(z[i]), denom)?;
            z[i] = c_sub(z[i], step);
            moved = moved.max(c_abs(step));
        }
        if moved < 1e-13 * radius.max(1.0) {
            break;
        }
    }
    let mut roots = Vec::with_capacity(deg);
    for &(re, im) in &z {
        if im.abs() > 1e-7 * (1.0 + re.abs()) {
            return None;
        }
        roots.push(re);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(roots)
}

fn c_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}

fn c_sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn c_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn c_div(a: (f64, f64), b: (f64, f64)) -> Option<(f64, f64)> {
    let d = b.0 * b.0 + b.1 * b.1;
    if d < 1e-300 {
        return None;
    }
    Some(((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d))
}

fn c_abs(a: (f64, f64)) -> f64 {
    a.0.hypot(a.1)
}
