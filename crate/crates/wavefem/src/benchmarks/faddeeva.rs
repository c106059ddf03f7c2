//! The Faddeeva function `w(z) = e^{−z²} erfc(−iz)` and the error functions
//! built on it.
//!
//! `w` follows the Poppe–Wijers scheme: a power series near the origin, the
//! Laplace continued fraction far out, and a Taylor expansion whose
//! derivatives come from the continued fraction in between. Other quadrants
//! follow from `w(−z) = 2e^{−z²} − w(z)` and `w(−z̄) = conj(w(z))`.

use num_complex::Complex64;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Faddeeva function `w(z) = e^{−z²} erfc(−iz)`.
pub fn w(z: Complex64) -> Complex64 {
    let (xi, yi) = (z.re, z.im);
    let xabs = xi.abs();
    let yabs = yi.abs();
    let x = xabs / 6.3;
    let y = yabs / 4.4;
    let qrho = x * x + y * y;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let near_origin = qrho < 0.085264;
    let (mut u, mut v);
    let (mut u2, mut v2) = (0.0, 0.0);
    if near_origin {
        let qrho = (1.0 - 0.85 * y) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as i64;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let xaux = (xsum * xquad - ysum * yquad) / i as f64;
            ysum = (xsum * yquad + ysum * xquad) / i as f64;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = 1.0 - TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs);
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        u2 = daux * yquad.cos();
        v2 = -daux * yquad.sin();
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        let (h, kapn, nu) = if qrho > 1.0 {
            let q = qrho.sqrt();
            (0.0, 0i64, (3.0 + 1442.0 / (26.0 * q + 77.0)) as i64)
        } else {
            let q = (1.0 - y) * (1.0 - qrho).sqrt();
            (
                1.88 * q,
                (7.0 + 34.0 * q).round() as i64,
                (16.0 + 26.0 * q).round() as i64,
            )
        };
        let taylor = h > 0.0;
        let h2 = 2.0 * h;
        let mut qlambda = if taylor { h2.powi(kapn as i32) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if taylor && n <= kapn {
                let tx = qlambda + sx;
                sx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                qlambda /= h2;
            }
        }
        if taylor {
            u = TWO_OVER_SQRT_PI * sx;
            v = TWO_OVER_SQRT_PI * sy;
        } else {
            u = TWO_OVER_SQRT_PI * rx;
            v = TWO_OVER_SQRT_PI * ry;
        }
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
    }

    if yi < 0.0 {
        if near_origin {
            u2 *= 2.0;
            v2 *= 2.0;
        } else {
            let w1 = 2.0 * (-xquad).exp();
            u2 = w1 * yquad.cos();
            v2 = -w1 * yquad.sin();
        }
        u = u2 - u;
        v = v2 - v;
        if xi > 0.0 {
            v = -v;
        }
    } else if xi < 0.0 {
        v = -v;
    }
    Complex64::new(u, v)
}

fn erf_maclaurin(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..40 {
        term = -term * z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * TWO_OVER_SQRT_PI
}

/// Complex error function.
pub fn erf(z: Complex64) -> Complex64 {
    if z.norm_sqr() <= 1.0 {
        return erf_maclaurin(z);
    }
    if z.re < 0.0 {
        return -erf(-z);
    }
    // erfc(z) = e^{−z²} w(iz), with iz in the closed upper half-plane.
    Complex64::new(1.0, 0.0) - (-z * z).exp() * w(Complex64::new(-z.im, z.re))
}

/// Complex complementary error function.
pub fn erfc(z: Complex64) -> Complex64 {
    if z.re >= 0.0 && z.norm_sqr() > 1.0 {
        (-z * z).exp() * w(Complex64::new(-z.im, z.re))
    } else {
        Complex64::new(1.0, 0.0) - erf(z)
    }
}

/// Real error function.
pub fn erf_real(x: f64) -> f64 {
    erf(Complex64::new(x, 0.0)).re
}

/// Scaled complementary error function `e^{x²} erfc(x)` for real `x`.
pub fn erfcx(x: f64) -> f64 {
    w(Complex64::new(0.0, x)).re
}
