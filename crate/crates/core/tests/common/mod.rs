#![allow(dead_code)] // each test binary uses its own subset

//! Shared test oracles, independent of the library's quadrature path.
//!
//! The library integrates with adaptive Gauss-Kronrod; everything here
//! uses composite Simpson with interval doubling, so an agreement between
//! the two is a genuine cross-check.

/// Composite Simpson on [a, b] with n panels (n even).
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2) && n >= 2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson with panel doubling until two refinements agree to `rel_tol`.
pub fn simpson_converged<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut n = 512;
    let mut prev = simpson(f, a, b, n);
    loop {
        n *= 2;
        let next = simpson(f, a, b, n);
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) || n >= (1 << 22) {
            return next;
        }
        prev = next;
    }
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against the exact
/// CDF tabulated on `grid` (monotone, covering the sample range); the CDF
/// is interpolated linearly between grid points.
pub fn ks_statistic(samples: &mut [f64], grid: &[f64], cdf: &[f64]) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let fx = interp(grid, cdf, x);
        d = d.max((((i + 1) as f64) / n - fx).abs());
        d = d.max((fx - i as f64 / n).abs());
    }
    d
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let mut lo = 0;
    let mut hi = xs.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + f * (ys[hi] - ys[lo])
}

/// Asymptotic 1% critical value of the two-sided KS test.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
