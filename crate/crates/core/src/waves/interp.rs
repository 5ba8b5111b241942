//! Monotone piecewise-cubic Hermite interpolation.
//!
//! Slopes are either supplied (e.g. exact ODE right-hand sides) or estimated
//! with the Fritsch–Butland harmonic mean. In both cases the Fritsch–Carlson
//! limiter is applied so the interpolant is monotone on every interval where
//! the data are.

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant. `x` must be strictly increasing and at least
    /// two points long.
    pub fn new(x: Vec<f64>, y: Vec<f64>, slopes: Option<Vec<f64>>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len());
        debug_assert!(x.windows(2).all(|w| w[1] > w[0]));
        let n = x.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut m = match slopes {
            Some(s) => {
                assert_eq!(s.len(), n);
                s
            }
            None => butland_slopes(&x, &secant),
        };
        limit_slopes(&secant, &mut m);
        Self { x, y, m }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first(&self) -> (f64, f64) {
        (self.x[0], self.y[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.x.len() - 1;
        (self.x[n], self.y[n])
    }

    /// Value and first derivative. Outside the node range the end interval's
    /// cubic is extrapolated; callers are expected to handle tails themselves.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i] * h, self.m[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let deriv = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
        (value, deriv)
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }
}

fn butland_slopes(x: &[f64], secant: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (secant[i - 1], secant[i]);
        if a * b > 0.0 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    m
}

fn limit_slopes(secant: &[f64], m: &mut [f64]) {
    for (i, &d) in secant.iter().enumerate() {
        if d == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d;
        let b = m[i + 1] / d;
        if a < 0.0 {
            m[i] = 0.0;
        }
        if b < 0.0 {
            m[i + 1] = 0.0;
        }
        let r = a.max(0.0).hypot(b.max(0.0));
        if r > 3.0 {
            let k = 3.0 / r;
            m[i] = k * a.max(0.0) * d;
            m[i + 1] = k * b.max(0.0) * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let f = |x: f64| x * x * x + x;
        let df = |x: f64| 3.0 * x * x + 1.0;
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.3).collect();
        let y = x.iter().map(|&t| f(t)).collect();
        let m = x.iter().map(|&t| df(t)).collect();
        let c = MonotoneCubic::new(x, y, Some(m));
        for k in 0..100 {
            let t = k as f64 * 0.03;
            let (v, d) = c.eval(t);
            assert!((v - f(t)).abs() < 1e-12);
            assert!((d - df(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn monotone_on_step_like_data() {
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let y = vec![0.0, 0.0, 0.0, 0.01, 0.02, 0.9, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let c = MonotoneCubic::new(x, y, None);
        let mut prev = c.eval(0.0).0;
        for k in 1..1100 {
            let (v, d) = c.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            assert!(d >= -1e-15);
            prev = v;
        }
    }
}
