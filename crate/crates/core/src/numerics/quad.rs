//! Composite trapezoid quadrature on uniform grids, and central differences.

use std::ops::{Mul, Sub};

use crate::error::{Error, Result};

/// Trapezoid weights for `n` uniformly spaced nodes.
pub fn trapezoid_weights(n: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; n];
    if let Some(first) = w.first_mut() {
        *first = 0.5 * dt;
    }
    if let Some(last) = w.last_mut() {
        *last = 0.5 * dt;
    }
    w
}

pub fn integrate(samples: &[f64], dt: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!("trapezoid rule needs at least 2 samples, got {}", samples.len())));
    }
    let n = samples.len();
    let inner: f64 = samples[1..n - 1].iter().sum();
    Ok(dt * (inner + 0.5 * (samples[0] + samples[n - 1])))
}

/// Tensor-product trapezoid rule over a square `N×N` grid of samples.
pub fn integrate2d(samples: &[Vec<f64>], dt: f64) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("2-D grid needs at least 2×2 samples, got {n} rows")));
    }
    if let Some(bad) = samples.iter().position(|row| row.len() != n) {
        return Err(Error::InvalidInput(format!(
            "2-D grid is not square: row {bad} has {} entries, expected {n}",
            samples[bad].len()
        )));
    }
    let rows: Vec<f64> = samples.iter().map(|row| integrate(row, dt)).collect::<Result<_>>()?;
    integrate(&rows, dt)
}

/// `(f(x0 + h) − f(x0 − h)) / 2h`.
pub fn central_diff<V, E, F>(mut f: F, x0: f64, h: f64) -> std::result::Result<V, E>
where
    F: FnMut(f64) -> std::result::Result<V, E>,
    V: Sub<Output = V> + Mul<f64, Output = V>,
{
    let plus = f(x0 + h)?;
    let minus = f(x0 - h)?;
    Ok((plus - minus) * (0.5 / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;
    use std::f64::consts::PI;

    fn samples(n: usize, t_max: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let dt = t_max / (n - 1) as f64;
        ((0..n).map(|k| f(k as f64 * dt)).collect(), dt)
    }

    #[test]
    fn constant_and_linear_are_exact() {
        let (s, dt) = samples(17, 2.0, |_| 1.0);
        assert_eq!(integrate(&s, dt).unwrap(), 2.0);
        for n in [2, 3, 10, 101] {
            let (s, dt) = samples(n, 1.0, |t| t);
            assert!((integrate(&s, dt).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_over_half_period() {
        let (s, dt) = samples(1001, PI, f64::sin);
        assert!((integrate(&s, dt).unwrap() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_short_input() {
        assert!(integrate(&[1.0], 0.1).is_err());
        assert!(integrate2d(&[vec![1.0, 2.0], vec![1.0]], 0.1).is_err());
        assert!(integrate2d(&[vec![1.0]], 0.1).is_err());
    }

    #[test]
    fn two_dimensional_rules() {
        let n = 11;
        let dt = 1.0 / (n - 1) as f64;
        let ones = vec![vec![1.0; n]; n];
        assert!((integrate2d(&ones, dt).unwrap() - 1.0).abs() < 1e-14);
        let prod: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i as f64 * dt) * (j as f64 * dt)).collect()).collect();
        assert!((integrate2d(&prod, dt).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cosine_difference_kernel() {
        // ∬cos(t1 − t2) over [0, π]² = |∫ e^{it} dt|² = 4
        let n = 400;
        let dt = PI / (n - 1) as f64;
        let grid: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| ((i as f64 - j as f64) * dt).cos()).collect()).collect();
        assert!((integrate2d(&grid, dt).unwrap() - 4.0).abs() < 1e-4);
    }

    #[test]
    fn central_differences() {
        let d: f64 = central_diff(|x| Ok::<_, Infallible>(x * x), 3.0, 1e-5).unwrap();
        assert!((d - 6.0).abs() < 1e-8);
        let d: f64 = central_diff(|x: f64| Ok::<_, Infallible>(x.sin()), 0.0, 1e-5).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let e: std::result::Result<f64, &str> = central_diff(|_| Err("boom"), 0.0, 1e-3);
        assert!(e.is_err());
    }
}
