//! Manufactured solutions on Ω = (−L, L) driven by a Gaussian-derivative
//! pulse centred at `t0`.
//!
//! * standing: `f = −2T e^{−T²} sin(a(x−L))` with `T = t − t0`, `a = mπ/(2L)`;
//!   the solution is `Re ψ(T) sin(a(x−L))` with
//!   `ψ(T) = e^{−a²/4+iaT} ∫_{−∞}^{T+ia/2} e^{−z²} dz`.
//! * propagating: `f = −2T e^{−T²} e^{−x²}`; the free-space solution is made
//!   to vanish at ±L by an alternating mirror series.

pub mod faddeeva;

use num_complex::Complex64;

use faddeeva::{erfcx, w};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    Standing,
    Propagating,
    /// Zero forcing and zero solution; exercises the pipelines on trivial data.
    Quiescent,
}

/// Exact solution value and first derivatives at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolutionSample {
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
}

/// A space-time solution that can be sampled pointwise.
pub trait ExactSolution {
    fn sample(&self, t: f64, x: f64) -> SolutionSample;
}

impl<F: Fn(f64, f64) -> SolutionSample> ExactSolution for F {
    fn sample(&self, t: f64, x: f64) -> SolutionSample {
        self(t, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkCase {
    kind: BenchmarkKind,
    half_width: f64,
    t0: f64,
    mode: u32,
    mirror_terms: usize,
}

impl BenchmarkCase {
    pub fn standing() -> Self {
        Self::new(BenchmarkKind::Standing)
    }

    pub fn propagating() -> Self {
        Self::new(BenchmarkKind::Propagating)
    }

    pub fn quiescent() -> Self {
        Self::new(BenchmarkKind::Quiescent)
    }

    pub fn new(kind: BenchmarkKind) -> Self {
        Self {
            kind,
            half_width: 10.0,
            t0: 4.0,
            mode: 5,
            mirror_terms: 50,
        }
    }

    pub fn with_mirror_terms(mut self, terms: usize) -> Self {
        self.mirror_terms = terms;
        self
    }

    pub fn kind(&self) -> BenchmarkKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn mirror_terms(&self) -> usize {
        self.mirror_terms
    }

    /// Standing-wave wavenumber `a = mπ/(2L)`.
    pub fn wavenumber(&self) -> f64 {
        self.mode as f64 * std::f64::consts::PI / (2.0 * self.half_width)
    }

    /// Time factor `−2T e^{−T²}` of the separable forcing.
    pub fn pulse(&self, t: f64) -> f64 {
        self.pulse_derivative(t, 0)
    }

    /// `order`-th time derivative (0 to 3) of the pulse.
    pub fn pulse_derivative(&self, t: f64, order: usize) -> f64 {
        if self.kind == BenchmarkKind::Quiescent {
            return 0.0;
        }
        let s = t - self.t0;
        let g = (-s * s).exp();
        let s2 = s * s;
        match order {
            0 => -2.0 * s * g,
            1 => (4.0 * s2 - 2.0) * g,
            2 => (12.0 * s - 8.0 * s * s2) * g,
            3 => (12.0 - 48.0 * s2 + 16.0 * s2 * s2) * g,
            _ => panic!("pulse derivatives are tabulated up to order 3"),
        }
    }

    /// Space factor of the separable forcing.
    pub fn profile(&self, x: f64) -> f64 {
        match self.kind {
            BenchmarkKind::Standing => (self.wavenumber() * (x - self.half_width)).sin(),
            BenchmarkKind::Propagating => (-x * x).exp(),
            BenchmarkKind::Quiescent => 0.0,
        }
    }

    pub fn forcing(&self, t: f64, x: f64) -> f64 {
        self.pulse(t) * self.profile(x)
    }

    pub fn solution(&self, t: f64, x: f64) -> SolutionSample {
        match self.kind {
            BenchmarkKind::Standing => standing_solution(self, t, x),
            BenchmarkKind::Propagating => propagating_solution(self, t, x),
            BenchmarkKind::Quiescent => SolutionSample::default(),
        }
    }

    /// For solutions of the form `c(t)·s(x)`: `(c, ċ)` at `t`.
    pub fn separable_time_factor(&self, t: f64) -> Option<(f64, f64)> {
        match self.kind {
            BenchmarkKind::Standing => {
                let (psi, dpsi) = self.psi(t - self.t0);
                Some((psi.re, dpsi.re))
            }
            BenchmarkKind::Quiescent => Some((0.0, 0.0)),
            BenchmarkKind::Propagating => None,
        }
    }

    /// For separable solutions: `(s, s′)` at `x`.
    pub fn separable_space_factor(&self, x: f64) -> Option<(f64, f64)> {
        match self.kind {
            BenchmarkKind::Standing => {
                let a = self.wavenumber();
                let arg = a * (x - self.half_width);
                Some((arg.sin(), a * arg.cos()))
            }
            BenchmarkKind::Quiescent => Some((0.0, 0.0)),
            BenchmarkKind::Propagating => None,
        }
    }

    /// `ψ(T)` and `ψ̇(T) = iaψ(T) + e^{−T²}`.
    pub fn psi(&self, s: f64) -> (Complex64, Complex64) {
        let a = self.wavenumber();
        let g = (-s * s).exp();
        let psi = if s < 0.0 {
            // e^{−a²/4+iaT}·(√π/2)·e^{−ζ²}w(−iζ), ζ = T + ia/2, simplified.
            0.5 * SQRT_PI * g * w(Complex64::new(0.5 * a, -s))
        } else {
            let osc = Complex64::new(0.0, a * s).exp() * (-0.25 * a * a).exp();
            0.5 * SQRT_PI * (2.0 * osc - g * w(Complex64::new(-0.5 * a, s)))
        };
        (psi, Complex64::new(0.0, a) * psi + g)
    }
}

impl ExactSolution for BenchmarkCase {
    fn sample(&self, t: f64, x: f64) -> SolutionSample {
        self.solution(t, x)
    }
}

/// Standing-wave solution `u = Re ψ(t−t0)·sin(a(x−L))` and its derivatives.
pub fn standing_solution(case: &BenchmarkCase, t: f64, x: f64) -> SolutionSample {
    let (psi, dpsi) = case.psi(t - case.t0);
    let a = case.wavenumber();
    let arg = a * (x - case.half_width);
    let (sin, cos) = arg.sin_cos();
    SolutionSample {
        u: psi.re * sin,
        u_t: dpsi.re * sin,
        u_x: a * psi.re * cos,
    }
}

pub fn standing_forcing(case: &BenchmarkCase, t: f64, x: f64) -> f64 {
    let s = t - case.t0;
    -2.0 * s * (-s * s).exp() * (case.wavenumber() * (x - case.half_width)).sin()
}

/// `G(s) e^{−r²/2}` with `G(s) = √(π/2)(1 + erf(s/√2))`, combined in the
/// exponent so that no intermediate overflows.
fn gauss_product(s: f64, r: f64) -> f64 {
    if s >= 0.0 {
        let tail = (-0.5 * (s * s + r * r)).exp() * erfcx(s * std::f64::consts::FRAC_1_SQRT_2);
        SQRT_HALF_PI * (2.0 * (-0.5 * r * r).exp() - tail)
    } else {
        SQRT_HALF_PI * (-0.5 * (s * s + r * r)).exp() * erfcx(-s * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Free-space solution `u_∞(T, y)` with `u_T` and `u_y`, where `T = t − t0`.
///
/// With `s± = T ± y`, `P± = G(s±) e^{−s∓²/2}` and `E = e^{−(y²+T²)}`:
/// `u = (P₊+P₋)/4`, `u_T = (2E − s₋P₊ − s₊P₋)/4`, `u_y = (s₋P₊ − s₊P₋)/4`.
pub fn free_space_solution(s: f64, y: f64) -> SolutionSample {
    let sp = s + y;
    let sm = s - y;
    let pp = gauss_product(sp, sm);
    let pm = gauss_product(sm, sp);
    let e = (-(y * y + s * s)).exp();
    SolutionSample {
        u: 0.25 * (pp + pm),
        u_t: 0.25 * (2.0 * e - sm * pp - sp * pm),
        u_x: 0.25 * (sm * pp - sp * pm),
    }
}

/// Propagating-wave solution on (−L, L) by the mirror series
/// `u_∞(x) + Σₙ (−1)ⁿ [u_∞(2nL + (−1)ⁿx) + u_∞(−2nL + (−1)ⁿx)]`.
pub fn propagating_solution(case: &BenchmarkCase, t: f64, x: f64) -> SolutionSample {
    let s = t - case.t0;
    let l = case.half_width;
    // Images with ||y| − |T|| > 12 have |T ± y| > 12 and contribute below
    // e^{−72} relative to the solution scale.
    let reach = 12.0;
    let mut total = SolutionSample::default();
    let mut add = |y: f64, sign: f64, dsign: f64| {
        if (y.abs() - s.abs()).abs() > reach {
            return;
        }
        let v = free_space_solution(s, y);
        total.u += sign * v.u;
        total.u_t += sign * v.u_t;
        total.u_x += sign * dsign * v.u_x;
    };
    add(x, 1.0, 1.0);
    let lo = (((s.abs() - reach - l) / (2.0 * l)).floor().max(1.0)) as usize;
    let hi = (((s.abs() + reach + l) / (2.0 * l)).ceil() as usize).min(case.mirror_terms);
    for n in lo..=hi {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let shift = 2.0 * n as f64 * l;
        // d/dx of u_∞(c + (−1)ⁿx) carries another (−1)ⁿ.
        add(shift + sign * x, sign, sign);
        add(-shift + sign * x, sign, sign);
    }
    total
}

pub fn propagating_forcing(case: &BenchmarkCase, t: f64, x: f64) -> f64 {
    let s = t - case.t0;
    -2.0 * s * (-s * s).exp() * (-x * x).exp()
}
