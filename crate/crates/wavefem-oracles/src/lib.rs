//! Reference computations that share no code with `wavefem`.
//!
//! Everything here is deliberately slow and simple: arbitrary-precision
//! series for the error function and dense linear algebra for eigenvalue
//! and linear-solve checks.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point arithmetic used by [`erf_series`].
const FRAC_BITS: u32 = 480;

fn to_fixed(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    let shift = exp2 + FRAC_BITS as i64;
    let mut v = BigInt::from(mantissa);
    if shift >= 0 {
        v <<= shift as usize;
    } else {
        v >>= (-shift) as usize;
    }
    if negative {
        -v
    } else {
        v
    }
}

fn from_fixed(v: &BigInt) -> f64 {
    // Keep 80 significant bits before the lossy conversion.
    let bits = v.bits() as i64;
    let drop = (bits - 80).max(0);
    let top = v >> drop as usize;
    top.to_f64().unwrap() * 2f64.powi((drop - FRAC_BITS as i64) as i32)
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRAC_BITS as usize
}

fn arctan_inv(x: u32) -> BigInt {
    // arctan(1/x) = sum (-1)^n / ((2n+1) x^(2n+1))
    let one = BigInt::from(1) << (FRAC_BITS as usize + 16);
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = &one / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut n = 0u32;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * n + 1);
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        n += 1;
    }
    sum >> 16usize
}

fn pi_fixed() -> BigInt {
    BigInt::from(16) * arctan_inv(5) - BigInt::from(4) * arctan_inv(239)
}

/// erf(re + i·im) from its Maclaurin series in 480-bit fixed point,
/// `2/√π · Σ (−1)ⁿ z^{2n+1} / (n!(2n+1))`.
///
/// Accurate to well below 1e-30 absolute for |z| ≤ 10.
pub fn erf_series(re: f64, im: f64) -> (f64, f64) {
    let zr = to_fixed(re);
    let zi = to_fixed(im);
    let z2r = mul(&zr, &zr) - mul(&zi, &zi);
    let z2i = BigInt::from(2) * mul(&zr, &zi);
    let modulus_sq = re * re + im * im;

    let (mut tr, mut ti) = (zr.clone(), zi.clone());
    let (mut sr, mut si) = (zr, zi);
    let tiny = BigInt::from(1) << (FRAC_BITS as usize - 360);
    let mut n: u64 = 0;
    loop {
        n += 1;
        let nr = (mul(&tr, &z2r) - mul(&ti, &z2i)) / BigInt::from(n);
        let ni = (mul(&tr, &z2i) + mul(&ti, &z2r)) / BigInt::from(n);
        tr = nr;
        ti = ni;
        let denom = BigInt::from(2 * n + 1);
        if n % 2 == 1 {
            sr -= &tr / &denom;
            si -= &ti / &denom;
        } else {
            sr += &tr / &denom;
            si += &ti / &denom;
        }
        if (n as f64) > modulus_sq + 2.0 && tr.abs() < tiny && ti.abs() < tiny {
            break;
        }
    }

    // 2/√π: √(π·2^{2P}) = √π·2^P.
    let sqrt_pi = (pi_fixed() << FRAC_BITS as usize).sqrt();
    let two = BigInt::from(2) << FRAC_BITS as usize;
    let factor = (two << FRAC_BITS as usize) / sqrt_pi;
    (from_fixed(&mul(&sr, &factor)), from_fixed(&mul(&si, &factor)))
}

/// Real erf through [`erf_series`].
pub fn erf_series_real(x: f64) -> f64 {
    erf_series(x, 0.0).0
}

/// Eigenvalues (ascending) and M-orthonormal eigenvectors of `K v = λ M v`
/// for dense symmetric `k` and symmetric positive definite `m`.
pub fn generalized_eigen(k: &[Vec<f64>], m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = k.len();
    let kd = DMatrix::from_fn(n, n, |i, j| k[i][j]);
    let md = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let chol = md.cholesky().expect("mass matrix must be SPD");
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    let c = &linv * kd * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let y = eig.eigenvectors.column(i).into_owned();
            let v = linv.transpose() * y;
            v.iter().copied().collect()
        })
        .collect();
    (values, vectors)
}

/// Smallest eigenvalue of a dense symmetric matrix.
pub fn min_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let ad = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    ad.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Solves a dense system by LU with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let ad = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let bd = DVector::from_column_slice(b);
    let x = ad.lu().solve(&bd).expect("dense system is singular");
    x.iter().copied().collect()
}
