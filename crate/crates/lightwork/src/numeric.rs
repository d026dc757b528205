//! Small numeric toolbox: bracketed root finding, Gauss-Legendre rules, and
//! compensated summation. Nothing here knows about physics.

use crate::error::{Error, Result};

/// Bisection on a bracketing interval.
///
/// Requires `f(lo)` and `f(mid)` to have opposite signs (an exact zero at
/// either endpoint is returned immediately). Runs until the interval is at
/// floating-point resolution or `|f(mid)| <= ftol`, capped at 200 iterations;
/// the cap is unreachable for halving, so the result is always the best
/// representable midpoint of a sign change.
pub fn bisect_with(
    context: &'static str,
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
) -> Result<f64> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::NotBracketed { context, lo, hi });
    }
    let lo_positive = flo > 0.0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fm = f(mid);
        if fm == 0.0 || fm.abs() <= ftol {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == lo || next == hi {
            return Ok(next);
        }
        mid = next;
    }
    Ok(mid)
}

/// Bisection to floating-point resolution.
pub fn bisect(
    context: &'static str,
    f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    bisect_with(context, f, lo, hi, 0.0)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes are symmetric and
/// accurate to machine precision for the orders used here (n <= 512).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and its derivative at x via the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier compensated accumulator. Keeps long Monte Carlo sums accurate
/// without changing their evaluation order.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Binary entropy in nats, safe at the endpoints.
pub fn binary_entropy(q: f64) -> f64 {
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&q));
    let q = q.clamp(0.0, 1.0);
    let mut h = 0.0;
    if q > 0.0 {
        h -= q * q.ln();
    }
    if q < 1.0 {
        h -= (1.0 - q) * (1.0 - q).ln();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_simple_root() {
        let r = bisect("x^2 - 2", |x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn bisect_rejects_unbracketed() {
        let e = bisect("x^2 + 1", |x| x * x + 1.0, -1.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::NotBracketed { .. }));
    }

    #[test]
    fn bisect_accepts_endpoint_root() {
        let r = bisect("x", |x| x, 0.0, 1.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn gauss_legendre_five_point_matches_reference() {
        let (x, w) = gauss_legendre(5);
        // Abramowitz & Stegun 25.4.29 values.
        assert_relative_eq!(x[4], 0.906179845938664, max_relative = 1e-14);
        assert_relative_eq!(x[3], 0.538469310105683, max_relative = 1e-14);
        assert_eq!(x[2], 0.0);
        assert_relative_eq!(w[4], 0.236926885056189, max_relative = 1e-13);
        assert_relative_eq!(w[3], 0.478628670499366, max_relative = 1e-13);
        assert_relative_eq!(w[2], 0.568888888888889, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point rule is exact through degree 2n-1.
        for n in [2usize, 3, 8, 17, 64] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            // integral of x^deg over [-1,1] is 0 (odd), x^(deg-1) is 2/deg.
            let odd: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(deg as i32)).sum();
            let even: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(deg as i32 - 1))
                .sum();
            assert!(odd.abs() < 1e-13, "odd moment at n={n}: {odd}");
            assert_relative_eq!(even, 2.0 / deg as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_handles_gaussian_tail() {
        // integral of exp(-x^2/2)/sqrt(2pi) over [-8, 8] is 1 to ~1e-15.
        let (x, w) = gauss_legendre(96);
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| 8.0 * wi * normal_pdf(8.0 * xi))
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::new();
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn binary_entropy_endpoints_and_peak() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_relative_eq!(binary_entropy(0.5), 2f64.ln(), max_relative = 1e-15);
    }
}
