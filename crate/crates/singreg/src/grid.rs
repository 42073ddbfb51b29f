//! Evaluation grids with exact endpoints.

use crate::error::{Error, Result};

/// `n` evenly spaced points on `[a, b]`, endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    check_range(a, b, n)?;
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    xs[n - 1] = b; // endpoint exact regardless of rounding in the sweep
    Ok(xs)
}

/// `n` log-spaced points on `[a, b]` with `a > 0`, endpoints exact.
pub fn logspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if a <= 0.0 {
        return Err(Error::domain(format!(
            "log grid needs a positive lower endpoint, got {a}"
        )));
    }
    check_range(a, b, n)?;
    if n == 1 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.ln(), b.ln());
    let step = (lb - la) / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|i| (la + step * i as f64).exp()).collect();
    xs[0] = a;
    xs[n - 1] = b;
    Ok(xs)
}

fn check_range(a: f64, b: f64, n: usize) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("grid endpoints must be finite".to_string()));
    }
    if n == 0 {
        return Err(Error::domain("grid needs at least one point".to_string()));
    }
    if n > 1 && a >= b {
        return Err(Error::domain(format!("grid needs a < b, got a={a}, b={b}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_exact() {
        let xs = linspace(0.1, 0.3, 7).unwrap();
        assert_eq!(xs.len(), 7);
        assert_eq!(xs[0], 0.1);
        assert_eq!(xs[6], 0.3);
        for w in xs.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn logspace_endpoints_exact_and_geometric() {
        let xs = logspace(0.5, 8.0, 5).unwrap();
        assert_eq!(xs[0], 0.5);
        assert_eq!(xs[4], 8.0);
        for w in xs.windows(2) {
            assert!((w[1] / w[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(linspace(1.0, 1.0, 3).is_err());
        assert!(linspace(f64::NAN, 1.0, 3).is_err());
        assert!(logspace(0.0, 1.0, 3).is_err());
        assert!(logspace(-1.0, 1.0, 3).is_err());
        assert!(linspace(0.0, 1.0, 0).is_err());
    }
}
