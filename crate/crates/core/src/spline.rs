//! Cubic B-spline interpolation on uniform 2-D grids.

/// Converts samples into B-spline coefficients in place (mirror boundaries).
fn prefilter(c: &mut [f64]) {
    let n = c.len();
    if n < 2 {
        return;
    }
    let z = 3.0f64.sqrt() - 2.0;
    let gain = (1.0 - z) * (1.0 - 1.0 / z);
    for v in c.iter_mut() {
        *v *= gain;
    }
    // exact causal initialization for mirror boundaries
    let zn = z.powi(n as i32 - 1);
    let mut sum = c[0] + zn * c[n - 1];
    let mut zk = z;
    let mut z2n = zn * zn / z;
    for v in c.iter().take(n - 1).skip(1) {
        sum += (zk + z2n) * v;
        zk *= z;
        z2n /= z;
    }
    sum /= 1.0 - zn * zn;
    c[0] = sum;
    for k in 1..n {
        c[k] += z * c[k - 1];
    }
    c[n - 1] = (z / (z * z - 1.0)) * (c[n - 1] + z * c[n - 2]);
    for k in (0..n - 1).rev() {
        c[k] = z * (c[k + 1] - c[k]);
    }
}

fn weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    let s = 1.0 - t;
    [
        s * s * s / 6.0,
        (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
        (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0,
        t3 / 6.0,
    ]
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i;
    }
    if i >= n {
        i = 2 * (n - 1) - i;
    }
    i.clamp(0, n - 1) as usize
}

/// Interpolant of `values[i][j]` sampled at (x0 + i dx, y0 + j dy).
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline2d {
    nx: usize,
    ny: usize,
    x0: f64,
    dx: f64,
    y0: f64,
    dy: f64,
    coeffs: Vec<f64>,
}

impl CubicSpline2d {
    pub fn new(xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> Self {
        let nx = xs.len();
        let ny = ys.len();
        let mut coeffs: Vec<f64> = values.iter().flat_map(|row| row.iter().copied()).collect();
        for row in coeffs.chunks_mut(ny) {
            prefilter(row);
        }
        let mut column = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                column[i] = coeffs[i * ny + j];
            }
            prefilter(&mut column);
            for i in 0..nx {
                coeffs[i * ny + j] = column[i];
            }
        }
        CubicSpline2d {
            nx,
            ny,
            x0: xs[0],
            dx: (xs[nx - 1] - xs[0]) / (nx - 1) as f64,
            y0: ys[0],
            dy: (ys[ny - 1] - ys[0]) / (ny - 1) as f64,
            coeffs,
        }
    }

    /// Value at (x, y); zero outside the sampled rectangle.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let u = (x - self.x0) / self.dx;
        let v = (y - self.y0) / self.dy;
        let umax = (self.nx - 1) as f64;
        let vmax = (self.ny - 1) as f64;
        if !(u >= 0.0 && u <= umax && v >= 0.0 && v <= vmax) {
            return 0.0;
        }
        let i = (u.floor() as isize).min(self.nx as isize - 2);
        let j = (v.floor() as isize).min(self.ny as isize - 2);
        let wu = weights(u - i as f64);
        let wv = weights(v - j as f64);
        let mut acc = 0.0;
        for (a, wa) in wu.iter().enumerate() {
            let ii = mirror(i - 1 + a as isize, self.nx);
            let row = &self.coeffs[ii * self.ny..(ii + 1) * self.ny];
            let mut inner = 0.0;
            for (b, wb) in wv.iter().enumerate() {
                inner += wb * row[mirror(j - 1 + b as isize, self.ny)];
            }
            acc += wa * inner;
        }
        acc
    }
}
