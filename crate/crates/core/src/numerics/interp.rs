//! Piecewise cubic Hermite interpolation.

/// Cubic Hermite interpolant through `(x_i, y_i)` with slopes `d_i`.
#[derive(Debug, Clone)]
pub struct Hermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Hermite {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && xs.len() == ds.len());
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        Hermite { xs, ys, ds }
    }

    /// Monotone (Fritsch–Carlson) slopes: no overshoot between data points.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
            return Hermite { xs, ys, ds };
        }
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Hermite { xs, ys, ds }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("non-empty"))
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and derivative at `x`; clamps to the end segments outside the domain.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (value, deriv)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
