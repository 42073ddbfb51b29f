//! Dimensionless singular pair potentials and their core decomposition.
//!
//! Everything downstream works with a dimensionless potential `v(x)` that
//! diverges as `x^-n` at the origin with `n > 2`. The two analytic kinds are
//! the Lennard-Jones potential `v = 4(x⁻¹² − x⁻⁶)` and the pure power law
//! `v = x⁻ⁿ`; tabulated data is supported through shape-preserving cubic
//! interpolation on a log-x grid.
//!
//! The core split `s(x) = sgn(v)·√(xⁿ·|v(x)|)` isolates the slowly varying
//! part of the core: `v = s²/xⁿ` exactly, and the whole short-range analysis
//! rests on `s` varying much slower than `x⁻ⁿ` itself
//! ([`PotentialSpec::slow_variation_check`] quantifies this).

use crate::error::{Error, Result};

/// Physical interaction parameters in any consistent unit system with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Length scale of the interaction.
    pub sigma: f64,
    /// Energy scale of the interaction.
    pub epsilon: f64,
    /// Particle mass.
    pub mass: f64,
}

impl PhysicalParams {
    /// Reduce to the dimensionless coupling `Λ = 1/(σ·√(m·ε))`.
    ///
    /// Λ measures how quantum the substance is: lighter particles and weaker
    /// binding give larger Λ.
    pub fn reduce(&self) -> Result<f64> {
        if !(self.sigma > 0.0 && self.epsilon > 0.0 && self.mass > 0.0) {
            return Err(Error::domain(format!(
                "physical parameters must be positive: sigma={}, epsilon={}, mass={}",
                self.sigma, self.epsilon, self.mass
            )));
        }
        Ok(1.0 / (self.sigma * (self.mass * self.epsilon).sqrt()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    LennardJones,
    PurePowerLaw,
    Tabulated,
}

/// A dimensionless pair potential with declared singularity exponent `n`.
///
/// Invariant: `v(x)·xⁿ` has a finite, strictly positive limit as `x → 0⁺`
/// (repulsive core). Constructors enforce `n > 2`; `n ≤ 3` is allowed but
/// logged as a warning since the three-dimensional construction assumes the
/// singularity beats the volume element.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    kind: PotentialKind,
    n: f64,
    table: Option<LogGridPchip>,
    /// Closed-form s(0) when known; tabulated kinds without one fall back to
    /// Richardson extrapolation.
    s0: Option<f64>,
}

impl PotentialSpec {
    /// The Lennard-Jones potential `v(x) = 4(x⁻¹² − x⁻⁶)`, n = 12.
    pub fn lennard_jones() -> Self {
        PotentialSpec {
            kind: PotentialKind::LennardJones,
            n: 12.0,
            table: None,
            s0: Some(2.0),
        }
    }

    /// The pure power law `v(x) = x⁻ⁿ`.
    pub fn power_law(n: f64) -> Result<Self> {
        check_exponent(n)?;
        Ok(PotentialSpec {
            kind: PotentialKind::PurePowerLaw,
            n,
            table: None,
            s0: Some(1.0),
        })
    }

    /// A tabulated potential from `(x, v)` samples, interpolated by a
    /// shape-preserving cubic in `ln x`. The singularity exponent `n` cannot
    /// be inferred from data and must be supplied by the caller.
    pub fn tabulated(points: &[(f64, f64)], n: f64) -> Result<Self> {
        check_exponent(n)?;
        let table = LogGridPchip::new(points)?;
        Ok(PotentialSpec {
            kind: PotentialKind::Tabulated,
            n,
            table: Some(table),
            s0: None,
        })
    }

    /// Like [`PotentialSpec::tabulated`] but registering a known closed-form
    /// limit `s(0)`, skipping Richardson extrapolation.
    pub fn tabulated_with_s0(points: &[(f64, f64)], n: f64, s0: f64) -> Result<Self> {
        if !(s0 > 0.0) {
            return Err(Error::domain(format!(
                "s(0) must be strictly positive (repulsive core), got {s0}"
            )));
        }
        let mut p = Self::tabulated(points, n)?;
        p.s0 = Some(s0);
        Ok(p)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// Singularity exponent `n`.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Evaluate `v(x)` for `x > 0`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("v(x) needs x > 0, got {x}")));
        }
        match self.kind {
            PotentialKind::LennardJones => {
                let x6 = x.powi(6);
                Ok(4.0 * (1.0 / (x6 * x6) - 1.0 / x6))
            }
            PotentialKind::PurePowerLaw => Ok(x.powf(-self.n)),
            PotentialKind::Tabulated => self.table.as_ref().unwrap().eval(x.ln()),
        }
    }

    /// Evaluate `dv/dx` for `x > 0`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("v'(x) needs x > 0, got {x}")));
        }
        match self.kind {
            PotentialKind::LennardJones => {
                let x6 = x.powi(6);
                let x7 = x6 * x;
                Ok(-48.0 / (x6 * x7) + 24.0 / x7)
            }
            PotentialKind::PurePowerLaw => Ok(-self.n * x.powf(-self.n - 1.0)),
            // dv/dx = (dv/dt)/x on the t = ln x grid.
            PotentialKind::Tabulated => Ok(self.table.as_ref().unwrap().deriv(x.ln())? / x),
        }
    }

    /// The core split `s(x) = sgn(v(x))·√(xⁿ·|v(x)|)`, with `s(0)` the limit.
    ///
    /// By construction `s²/xⁿ = |v|` and `sgn s = sgn v`.
    /// Closed forms are used where the product `xⁿ·v` simplifies exactly:
    /// Lennard-Jones gives `s² = 4(1−x⁶)`, the power law gives `s ≡ 1`.
    pub fn s_of_x(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return self.s_at_zero();
        }
        if !(x > 0.0) {
            return Err(Error::domain(format!("s(x) needs x ≥ 0, got {x}")));
        }
        match self.kind {
            PotentialKind::LennardJones => {
                let c = 1.0 - x.powi(6);
                Ok(2.0 * c.signum() * c.abs().sqrt())
            }
            PotentialKind::PurePowerLaw => Ok(1.0),
            PotentialKind::Tabulated => {
                let v = self.evaluate(x)?;
                Ok(v.signum() * (x.powf(self.n) * v.abs()).sqrt())
            }
        }
    }

    /// The limit `s(0)`.
    ///
    /// Known in closed form for the analytic kinds; for tabulated data it is
    /// Richardson-extrapolated from s(x) at x ∈ {1e-2, 5e-3, 2.5e-3}, which
    /// requires the table to cover those abscissas.
    pub fn s_at_zero(&self) -> Result<f64> {
        if let Some(s0) = self.s0 {
            return Ok(s0);
        }
        let f0 = self.s_of_x(1e-2)?;
        let f1 = self.s_of_x(5e-3)?;
        let f2 = self.s_of_x(2.5e-3)?;
        let s0 = richardson_limit(f0, f1, f2);
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::domain(format!(
                "extrapolated s(0) = {s0}; the core must be strictly repulsive"
            )));
        }
        Ok(s0)
    }

    /// How slowly does the core split vary? Reports the ratio
    /// `|d(s²)/dx| / |d(x⁻ⁿ)/dx|` over a small-x grid; the short-range
    /// expansion treats `s` as locally constant, which is justified exactly
    /// when this ratio is small.
    ///
    /// The grid must lie in (0, 1): beyond the core the comparison against
    /// `x⁻ⁿ` is meaningless. Diagnostic only; the caller decides what ratio
    /// is acceptable.
    pub fn slow_variation_check(&self, grid: &[f64]) -> Result<SlowVariationReport> {
        if grid.is_empty() {
            return Err(Error::domain("slow-variation check needs a non-empty grid"));
        }
        let mut ratios = Vec::with_capacity(grid.len());
        let mut max = f64::NEG_INFINITY;
        let mut argmax = grid[0];
        for &x in grid {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::domain(format!(
                    "slow-variation grid must lie in (0, 1), got {x}"
                )));
            }
            // d(s²)/dx = n x^{n-1} v + xⁿ v', so the ratio against
            // d(x⁻ⁿ)/dx = -n x^{-n-1} is x^{2n}·|n v + x v'|/n.
            let ratio = match self.kind {
                // 24 x⁵ / (12 x⁻¹³) exactly.
                PotentialKind::LennardJones => 2.0 * x.powi(18),
                PotentialKind::PurePowerLaw => 0.0,
                PotentialKind::Tabulated => {
                    let v = self.evaluate(x)?;
                    let vp = self.derivative(x)?;
                    x.powf(2.0 * self.n) * (self.n * v + x * vp).abs() / self.n
                }
            };
            ratios.push(ratio);
            if ratio > max {
                max = ratio;
                argmax = x;
            }
        }
        Ok(SlowVariationReport {
            ratios,
            max,
            argmax,
        })
    }
}

/// Report of [`PotentialSpec::slow_variation_check`].
#[derive(Debug, Clone)]
pub struct SlowVariationReport {
    /// Ratio at each grid point, parallel to the input grid.
    pub ratios: Vec<f64>,
    /// Largest ratio seen.
    pub max: f64,
    /// Grid point where the largest ratio occurred.
    pub argmax: f64,
}

fn check_exponent(n: f64) -> Result<()> {
    if !n.is_finite() || n <= 2.0 {
        return Err(Error::domain(format!(
            "singularity exponent must satisfy n > 2, got {n}"
        )));
    }
    if n <= 3.0 {
        log::warn!(
            "n = {n} does not beat the 3D volume element (n > 3 expected); \
             the bare potential is already integrable there"
        );
    }
    Ok(())
}

/// Richardson limit of f(h), f(h/2), f(h/4) with the convergence order
/// estimated from the data. Falls back to the finest value when the
/// differences are at roundoff level or the order estimate is unusable.
fn richardson_limit(f0: f64, f1: f64, f2: f64) -> f64 {
    let d0 = f0 - f1;
    let d1 = f1 - f2;
    let scale = f0.abs().max(f1.abs()).max(f2.abs());
    if d1.abs() <= 64.0 * f64::EPSILON * scale || d0 / d1 <= 1.0 {
        return f2;
    }
    let rate = d0 / d1; // = 2^p for f(h) = L + c·h^p
    f2 + d1 / (rate - 1.0)
}

/// Parse `x,v` table lines (one pair per line, `#` comments and blank lines
/// skipped). Returned points are validated by the tabulated constructor.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let (xs, vs) = (it.next(), it.next());
        let bad = || {
            Error::config(format!(
                "table line {}: expected `x,v`, got `{line}`",
                idx + 1
            ))
        };
        if it.next().is_some() {
            return Err(bad());
        }
        match (xs, vs) {
            (Some(a), Some(b)) => {
                let x: f64 = a.trim().parse().map_err(|_| bad())?;
                let v: f64 = b.trim().parse().map_err(|_| bad())?;
                pts.push((x, v));
            }
            _ => return Err(bad()),
        }
    }
    Ok(pts)
}

/// Shape-preserving (Fritsch-Carlson) cubic interpolant on a strictly
/// increasing knot grid; used with t = ln x so that geometric sampling of the
/// potential becomes uniform-ish sampling here.
#[derive(Debug, Clone)]
struct LogGridPchip {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // knot slopes dy/dt
}

impl LogGridPchip {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::domain(format!(
                "tabulated potential needs at least 4 points, got {}",
                points.len()
            )));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut t = Vec::with_capacity(pts.len());
        let mut y = Vec::with_capacity(pts.len());
        for &(x, v) in &pts {
            if !(x > 0.0) || !x.is_finite() || !v.is_finite() {
                return Err(Error::domain(format!(
                    "table entries must have finite v and x > 0, got ({x}, {v})"
                )));
            }
            t.push(x.ln());
            y.push(v);
        }
        for w in t.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::domain("table abscissas must be strictly increasing"));
            }
        }
        let m = fritsch_carlson_slopes(&t, &y);
        Ok(LogGridPchip { t, y, m })
    }

    fn locate(&self, tq: f64) -> Result<usize> {
        let nt = self.t.len();
        if tq < self.t[0] || tq > self.t[nt - 1] {
            return Err(Error::domain(format!(
                "x = {} is outside the tabulated range [{}, {}]",
                tq.exp(),
                self.t[0].exp(),
                self.t[nt - 1].exp()
            )));
        }
        // partition_point: first knot strictly greater than tq, step back one.
        let i = self.t.partition_point(|&tk| tk <= tq).min(nt - 1) - 1;
        Ok(i)
    }

    fn eval(&self, tq: f64) -> Result<f64> {
        let i = self.locate(tq)?;
        let h = self.t[i + 1] - self.t[i];
        let u = (tq - self.t[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(u);
        Ok(h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1])
    }

    fn deriv(&self, tq: f64) -> Result<f64> {
        let i = self.locate(tq)?;
        let h = self.t[i + 1] - self.t[i];
        let u = (tq - self.t[i]) / h;
        let (d00, d10, d01, d11) = hermite_basis_deriv(u);
        Ok((d00 * self.y[i] + d01 * self.y[i + 1]) / h + d10 * self.m[i] + d11 * self.m[i + 1])
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}

fn hermite_basis_deriv(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    (
        6.0 * u2 - 6.0 * u,
        3.0 * u2 - 4.0 * u + 1.0,
        -6.0 * u2 + 6.0 * u,
        3.0 * u2 - 2.0 * u,
    )
}

/// Fritsch-Carlson monotone slopes: harmonic-mean interior slopes zeroed at
/// local extrema, one-sided endpoint slopes clamped to preserve shape.
fn fritsch_carlson_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
