//! sinc, the sine integral, and cancellation-free variants of
//! 1 - sinc(x) and 1 - Si(x)/x used by the attenuation kernels.

use std::f64::consts::FRAC_PI_2;

/// sin(x)/x with a series branch below 1e-4 to avoid 0/0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// 1 - sinc(x), computed without cancellation for small |x|.
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1.0 {
        // sum_{k>=1} (-1)^(k+1) x^(2k) / (2k+1)!
        let x2 = x * x;
        let mut term = x2 / 6.0;
        let mut sum = term;
        let mut k = 1_u32;
        while term.abs() > f64::EPSILON * sum.abs() && k < 30 {
            k += 1;
            term *= -x2 / ((2.0 * k as f64) * (2.0 * k as f64 + 1.0));
            sum += term;
        }
        sum
    } else {
        1.0 - x.sin() / x
    }
}

/// Si(x) = ∫₀ˣ sinc(u) du. Power series for |x| ≤ 4, the Lentz continued
/// fraction of E₁(ix) beyond; odd in x.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 4.0 {
        si_series(x)
    } else {
        // Si(x) = π/2 + Im E₁(ix), with E₁ evaluated by the standard
        // continued fraction b₀=z+1, aᵢ=-i², bᵢ+=2 (modified Lentz).
        FRAC_PI_2 + e1_imag_axis(x).1
    }
}

/// Si(x)/x, finite at x = 0.
pub fn si_over_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 18.0 * (1.0 - 3.0 * x2 / 100.0)
    } else {
        sine_integral(x) / x
    }
}

/// 1 - Si(x)/x, computed without cancellation for small |x|.
pub fn one_minus_si_over_x(x: f64) -> f64 {
    if x.abs() < 1.0 {
        // sum_{k>=1} (-1)^(k+1) x^(2k) / ((2k+1)(2k+1)!)
        let x2 = x * x;
        let mut factorial_part = x2 / 6.0;
        let mut sum = factorial_part / 3.0;
        let mut k = 1_u32;
        loop {
            k += 1;
            factorial_part *= -x2 / ((2.0 * k as f64) * (2.0 * k as f64 + 1.0));
            let term = factorial_part / (2.0 * k as f64 + 1.0);
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() || k >= 30 {
                return sum;
            }
        }
    } else {
        1.0 - sine_integral(x) / x
    }
}

fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0_u32;
    while term.abs() > f64::EPSILON * sum.abs() && k < 40 {
        k += 1;
        let two_k = 2.0 * k as f64;
        term *= -x2 * (two_k - 1.0) / ((two_k + 1.0) * (two_k + 1.0) * two_k);
        sum += term;
    }
    sum
}

/// (Re, Im) of E₁(i x) for x > 0 via modified Lentz.
fn e1_imag_axis(x: f64) -> (f64, f64) {
    const FPMIN: f64 = 1e-300;
    // Complex arithmetic on (re, im) pairs; z = i x.
    let add = |a: (f64, f64), b: (f64, f64)| (a.0 + b.0, a.1 + b.1);
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let inv = |a: (f64, f64)| {
        let d = a.0 * a.0 + a.1 * a.1;
        (a.0 / d, -a.1 / d)
    };

    let mut b = (1.0, x); // z + 1
    let mut c = (1.0 / FPMIN, 0.0);
    let mut d = inv(b);
    let mut h = d;
    for i in 1..=400_u32 {
        let a = -((i * i) as f64);
        b = add(b, (2.0, 0.0));
        d = inv(add(mul((a, 0.0), d), b));
        c = add(b, mul((a, 0.0), inv(c)));
        if c.0 == 0.0 && c.1 == 0.0 {
            c = (FPMIN, 0.0);
        }
        let del = mul(c, d);
        h = mul(h, del);
        if (del.0 - 1.0).abs() + del.1.abs() < 1e-16 {
            break;
        }
    }
    // e^{-ix} = (cos x, -sin x)
    mul(h, (x.cos(), -x.sin()))
}
