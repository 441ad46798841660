//! Fixed-step quadrature on uniform grids.

use serde::{Deserialize, Serialize};

/// Integration rule applied along the quadrature axis of a tomogram row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Composite trapezoid rule. Spectrally accurate for smooth rows that
    /// vanish at the grid ends.
    #[default]
    Trapezoid,
    /// Composite Simpson rule; falls back to a trailing trapezoid panel when
    /// the number of intervals is odd.
    Simpson,
}

impl Quadrature {
    /// Integrates samples `f` taken at uniform spacing `dx`.
    pub fn integrate(self, f: &[f64], dx: f64) -> f64 {
        match self {
            Quadrature::Trapezoid => trapezoid(f, dx),
            Quadrature::Simpson => simpson(f, dx),
        }
    }

    /// Integrates `f(x_i) * g(x_i)` without materializing the product.
    pub fn integrate_weighted<F>(self, f: &[f64], dx: f64, weight: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        let n = f.len();
        if n < 2 {
            return 0.0;
        }
        let w = self.weights(n);
        let sum: f64 = f
            .iter()
            .zip(w.iter())
            .enumerate()
            .map(|(i, (v, wi))| v * wi * weight(i))
            .sum();
        sum * dx
    }

    /// Per-node weights (in units of the spacing) for `n` nodes.
    pub fn weights(self, n: usize) -> Vec<f64> {
        let mut w = vec![1.0; n];
        if n < 2 {
            return vec![0.0; n];
        }
        match self {
            Quadrature::Trapezoid => {
                w[0] = 0.5;
                w[n - 1] = 0.5;
            }
            Quadrature::Simpson => {
                let intervals = n - 1;
                let even = intervals - intervals % 2;
                for wi in w.iter_mut() {
                    *wi = 0.0;
                }
                if even >= 2 {
                    for (i, wi) in w.iter_mut().enumerate().take(even + 1) {
                        *wi = if i == 0 || i == even {
                            1.0 / 3.0
                        } else if i % 2 == 1 {
                            4.0 / 3.0
                        } else {
                            2.0 / 3.0
                        };
                    }
                }
                if even < intervals {
                    w[n - 2] += 0.5;
                    w[n - 1] += 0.5;
                }
            }
        }
        w
    }
}

pub fn trapezoid(f: &[f64], dx: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = f[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (f[0] + f[n - 1]))
        }
    }
}

pub fn simpson(f: &[f64], dx: f64) -> f64 {
    Quadrature::Simpson.integrate_weighted(f, dx, |_| 1.0)
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}
