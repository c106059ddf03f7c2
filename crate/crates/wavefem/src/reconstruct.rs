//! Piecewise-polynomial time reconstructions of a sequence of FE states.
//!
//! Every reconstruction stores, on each interval `Jₙ = [tⁿ, t^{n+1})`, Taylor
//! coefficients `c₀, c₁, …` so that `p(t) = Σⱼ cⱼ (t − tⁿ)ʲ / j!`.
//!
//! * `R(V)` is quadratic: `c = (Vⁿ, (V^{n+1} − V^{n−1})/(2τ), D²Vⁿ)`. It is
//!   continuous.
//! * `L(V)` is quartic with `c = (αⁿ, βⁿ, γⁿ, ϑⁿ, εⁿ)` from the five states
//!   `V^{n−2}..V^{n+2}`. It is twice continuously differentiable and
//!   `L(V)″ = R(D²V)` when `V⁰ = 0`.
//! * The gap `δ = R(V) − L(V)` is quartic; its derivative drives the time
//!   part of the error estimator.
//!
//! States with negative index are zero.

use crate::error::{Error, Result};
use crate::fem1d::{FemOperators, LagrangeSpace, QuadratureRule};
use crate::timestepping::{difference_sequences, StateSequence, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReconstructionKind {
    /// `R`: continuous piecewise quadratic.
    Quadratic,
    /// `L`: C² piecewise quartic.
    Quartic,
    /// `R − L`; evaluated with the left polynomial at interior nodes.
    Gap,
}

impl ReconstructionKind {
    pub fn degree(self) -> usize {
        match self {
            Self::Quadratic => 2,
            Self::Quartic | Self::Gap => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeReconstruction {
    kind: ReconstructionKind,
    tau: f64,
    dim: usize,
    n_intervals: usize,
    /// Interval-major, then coefficient, then component.
    data: Vec<f64>,
}

/// Taylor coefficients of `R(V)` on `Jₙ`.
pub fn quadratic_coefficients(seq: &StateSequence, tau: f64, n: usize) -> Result<[Vec<f64>; 3]> {
    let n = n as isize;
    check_stencil(seq, n, n + 1)?;
    let (p, c, m) = (seq.state(n + 1), seq.state(n), seq.state(n - 1));
    let d = seq.dim();
    Ok([
        c.to_vec(),
        (0..d).map(|i| (p[i] - m[i]) / (2.0 * tau)).collect(),
        (0..d).map(|i| (p[i] - 2.0 * c[i] + m[i]) / (tau * tau)).collect(),
    ])
}

/// Taylor coefficients `(αⁿ, βⁿ, γⁿ, ϑⁿ, εⁿ)` of `L(V)` on `Jₙ`.
pub fn quartic_coefficients(seq: &StateSequence, tau: f64, n: usize) -> Result<[Vec<f64>; 5]> {
    let n = n as isize;
    check_stencil(seq, n, n + 2)?;
    let v: [&[f64]; 5] = [
        seq.state(n - 2),
        seq.state(n - 1),
        seq.state(n),
        seq.state(n + 1),
        seq.state(n + 2),
    ];
    let comb = |w: [f64; 5], scale: f64| -> Vec<f64> {
        (0..seq.dim())
            .map(|i| (0..5).map(|j| w[j] * v[j][i]).sum::<f64>() * scale)
            .collect()
    };
    let (t2, t3, t4) = (tau * tau, tau * tau * tau, tau * tau * tau * tau);
    Ok([
        comb([-1.0, 5.0, 17.0, 3.0, 0.0], 1.0 / 24.0),
        comb([1.0, -9.0, 3.0, 5.0, 0.0], 1.0 / (12.0 * tau)),
        comb([0.0, 1.0, -2.0, 1.0, 0.0], 1.0 / t2),
        comb([-1.0, 2.0, 0.0, -2.0, 1.0], 1.0 / (2.0 * t3)),
        comb([1.0, -4.0, 6.0, -4.0, 1.0], 1.0 / t4),
    ])
}

fn check_stencil(seq: &StateSequence, n: isize, needed: isize) -> Result<()> {
    let last = seq.len() as isize - 1;
    if needed > last {
        return Err(Error::StencilOutOfRange {
            interval: n as usize,
            needed: needed as usize,
            last: last.max(0) as usize,
        });
    }
    Ok(())
}

/// `R(V)` on every interval whose stencil is stored (`J₀..J_{len−2}`).
pub fn reconstruct_r(seq: &StateSequence, grid: &TimeGrid) -> Result<TimeReconstruction> {
    if seq.len() < 2 {
        return Err(Error::StencilOutOfRange {
            interval: 0,
            needed: 1,
            last: seq.len().saturating_sub(1),
        });
    }
    let count = seq.len() - 1;
    let mut out = TimeReconstruction::zeros(ReconstructionKind::Quadratic, grid.tau(), seq.dim(), count);
    for n in 0..count {
        let c = quadratic_coefficients(seq, grid.tau(), n)?;
        out.set_interval(n, &c);
    }
    Ok(out)
}

/// `L(V)` on every interval whose stencil is stored (`J₀..J_{len−3}`).
pub fn reconstruct_l(seq: &StateSequence, grid: &TimeGrid) -> Result<TimeReconstruction> {
    if seq.len() < 3 {
        return Err(Error::StencilOutOfRange {
            interval: 0,
            needed: 2,
            last: seq.len().saturating_sub(1),
        });
    }
    let count = seq.len() - 2;
    let mut out = TimeReconstruction::zeros(ReconstructionKind::Quartic, grid.tau(), seq.dim(), count);
    for n in 0..count {
        let c = quartic_coefficients(seq, grid.tau(), n)?;
        out.set_interval(n, &c);
    }
    Ok(out)
}

/// The gap `δ = R(V) − L(V)` on the intervals where both exist.
pub fn delta(seq: &StateSequence, grid: &TimeGrid) -> Result<TimeReconstruction> {
    let r = reconstruct_r(seq, grid)?;
    let l = reconstruct_l(seq, grid)?;
    let count = l.n_intervals();
    let mut out = TimeReconstruction::zeros(ReconstructionKind::Gap, grid.tau(), seq.dim(), count);
    for n in 0..count {
        for j in 0..5 {
            let lj = l.coefficient(n, j);
            let v: Vec<f64> = if j < 3 {
                r.coefficient(n, j).iter().zip(lj).map(|(a, b)| a - b).collect()
            } else {
                lj.iter().map(|b| -b).collect()
            };
            out.coefficient_mut(n, j).copy_from_slice(&v);
        }
    }
    Ok(out)
}

impl TimeReconstruction {
    fn zeros(kind: ReconstructionKind, tau: f64, dim: usize, n_intervals: usize) -> Self {
        Self {
            kind,
            tau,
            dim,
            n_intervals,
            data: vec![0.0; n_intervals * (kind.degree() + 1) * dim],
        }
    }

    /// Builds a reconstruction from explicit Taylor coefficients:
    /// `intervals[n][j]` is `cⱼ` on `Jₙ`.
    pub fn from_intervals(kind: ReconstructionKind, tau: f64, intervals: &[Vec<Vec<f64>>]) -> Result<Self> {
        let dim = intervals.first().and_then(|c| c.first()).map_or(0, Vec::len);
        let mut out = Self::zeros(kind, tau, dim, intervals.len());
        for (n, coeffs) in intervals.iter().enumerate() {
            if coeffs.len() != kind.degree() + 1 {
                return Err(Error::DimensionMismatch {
                    expected: kind.degree() + 1,
                    got: coeffs.len(),
                });
            }
            if let Some(bad) = coeffs.iter().find(|c| c.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: bad.len(),
                });
            }
            out.set_interval(n, coeffs);
        }
        Ok(out)
    }

    fn set_interval(&mut self, n: usize, coeffs: &[Vec<f64>]) {
        for (j, c) in coeffs.iter().enumerate() {
            self.coefficient_mut(n, j).copy_from_slice(c);
        }
    }

    pub fn kind(&self) -> ReconstructionKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.kind.degree()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Right end of the last reconstructed interval.
    pub fn end(&self) -> f64 {
        self.n_intervals as f64 * self.tau
    }

    /// Taylor coefficient `cⱼ` on `Jₙ`.
    pub fn coefficient(&self, n: usize, j: usize) -> &[f64] {
        let start = (n * (self.degree() + 1) + j) * self.dim;
        &self.data[start..start + self.dim]
    }

    fn coefficient_mut(&mut self, n: usize, j: usize) -> &mut [f64] {
        let start = (n * (self.degree() + 1) + j) * self.dim;
        &mut self.data[start..start + self.dim]
    }

    /// Interval index and local offset `t − tⁿ` for time `t`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let end = self.end();
        if !(t >= 0.0 && t <= end * (1.0 + 1e-12)) || self.n_intervals == 0 {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let x = t / self.tau;
        // Times within rounding of a node count as that node.
        let nearest = x.round();
        let at_node = (x - nearest).abs() <= 1e-9 * nearest.max(1.0);
        let n = match (at_node, self.kind) {
            (true, ReconstructionKind::Gap) if nearest >= 1.0 => nearest as usize - 1,
            (true, _) => nearest as usize,
            (false, _) => x.floor() as usize,
        };
        let n = n.min(self.n_intervals - 1);
        Ok((n, t - n as f64 * self.tau))
    }

    /// `d`-th time derivative on `Jₙ` at offset `s`, written into `out`.
    pub fn evaluate_local_into(&self, n: usize, s: f64, deriv: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut factor = 1.0;
        for j in deriv..=self.degree() {
            let c = self.coefficient(n, j);
            for (o, &ci) in out.iter_mut().zip(c) {
                *o += factor * ci;
            }
            let p = (j - deriv + 1) as f64;
            factor *= s / p;
        }
    }

    /// `d`-th time derivative at `t`.
    pub fn evaluate(&self, t: f64, deriv: usize) -> Result<Vec<f64>> {
        let (n, s) = self.locate(t)?;
        let mut out = vec![0.0; self.dim];
        self.evaluate_local_into(n, s, deriv, &mut out);
        Ok(out)
    }

    /// Relative jumps of the value and of the derivatives the reconstruction
    /// is meant to keep continuous, at every interior node `t¹..t^{last}`.
    ///
    /// Each jump is divided by the size of the Taylor terms summed on either
    /// side, i.e. the scale at which rounding acts.
    pub fn continuity_jumps(&self) -> Vec<Vec<f64>> {
        let orders = match self.kind {
            ReconstructionKind::Quadratic => 1,
            ReconstructionKind::Quartic => 3,
            ReconstructionKind::Gap => 1,
        };
        let mut left = vec![0.0; self.dim];
        let mut right = vec![0.0; self.dim];
        (1..self.n_intervals)
            .map(|n| {
                (0..orders)
                    .map(|d| {
                        self.evaluate_local_into(n - 1, self.tau, d, &mut left);
                        self.evaluate_local_into(n, 0.0, d, &mut right);
                        let jump = left
                            .iter()
                            .zip(&right)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        let scale = self.term_scale(n - 1, self.tau, d).max(self.term_scale(n, 0.0, d));
                        if jump == 0.0 {
                            0.0
                        } else {
                            jump / scale
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn term_scale(&self, n: usize, s: f64, deriv: usize) -> f64 {
        let mut factor: f64 = 1.0;
        let mut total = 0.0;
        for j in deriv..=self.degree() {
            let c = self.coefficient(n, j);
            total += factor.abs() * c.iter().map(|v| v * v).sum::<f64>().sqrt();
            factor *= s / (j - deriv + 1) as f64;
        }
        total
    }
}

/// Five-point Gauss nodes on `[0, 1]`, used by the structural checks.
fn check_points() -> Vec<f64> {
    QuadratureRule::gauss_legendre(5).points().to_vec()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max ‖L(V)″(t) − R(D²V)(t)‖₂ / (1 + ‖R(D²V)(t)‖₂)` over five Gauss times
/// per interval. Requires `V⁰ = 0`.
pub fn verify_commuting(seq: &StateSequence, grid: &TimeGrid) -> Result<f64> {
    let tau = grid.tau();
    let l = reconstruct_l(seq, grid)?;
    let accel = difference_sequences(seq, tau).accel;
    let ra = reconstruct_r(&accel, grid)?;
    let count = l.n_intervals().min(ra.n_intervals());
    let mut a = vec![0.0; seq.dim()];
    let mut b = vec![0.0; seq.dim()];
    let mut worst: f64 = 0.0;
    for n in 0..count {
        for &xi in &check_points() {
            l.evaluate_local_into(n, xi * tau, 2, &mut a);
            ra.evaluate_local_into(n, xi * tau, 0, &mut b);
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            worst = worst.max(norm2(&diff) / (1.0 + norm2(&b)));
        }
    }
    Ok(worst)
}

/// Quadratic time reconstruction `f_τ` of a space-time source from its
/// samples `Fⁿ = f(tⁿ, ·)`.
///
/// `F⁰` is taken as zero, matching the start `U⁰ = U¹ = 0` of the driven
/// scheme (which never sees `f(0)`); negative indices are zero too. With this
/// convention the reconstructed equation holds exactly on `J₀`.
#[derive(Clone)]
pub struct SourceReconstruction<F> {
    f: F,
    tau: f64,
}

impl<F: Fn(f64, f64) -> f64> SourceReconstruction<F> {
    pub fn new(f: F, grid: &TimeGrid) -> Self {
        Self { f, tau: grid.tau() }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The underlying source `f(t, x)`.
    pub fn source(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    /// Sample `Fᵐ(x)` with the zero convention for `m ≤ 0`.
    pub fn sample(&self, m: isize, x: f64) -> f64 {
        if m <= 0 {
            0.0
        } else {
            (self.f)(m as f64 * self.tau, x)
        }
    }

    /// `(n, [w₋, w₀, w₊])` with `f_τ(t) = w₋F^{n−1} + w₀Fⁿ + w₊F^{n+1}`.
    pub fn weights(&self, t: f64) -> Result<(usize, [f64; 3])> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::TimeOutOfRange { t, end: f64::INFINITY });
        }
        let n = (t / self.tau).floor() as usize;
        Ok((n, quadratic_weights((t - n as f64 * self.tau) / self.tau)))
    }

    /// `f_τ(t, x)`.
    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        let (n, w) = self.weights(t)?;
        let n = n as isize;
        Ok(w[0] * self.sample(n - 1, x) + w[1] * self.sample(n, x) + w[2] * self.sample(n + 1, x))
    }

    /// Load vector `((f_τ(t), φᵢ))ᵢ` by per-cell Gauss quadrature.
    pub fn load_vector(&self, space: &LagrangeSpace, points_per_cell: usize, t: f64) -> Result<Vec<f64>> {
        let (n, w) = self.weights(t)?;
        let n = n as isize;
        Ok(space.load_vector(points_per_cell, |x| {
            w[0] * self.sample(n - 1, x) + w[1] * self.sample(n, x) + w[2] * self.sample(n + 1, x)
        }))
    }
}

/// Lagrange weights of the nodes `−1, 0, 1` at `σ = (t − tⁿ)/τ`.
pub fn quadratic_weights(sigma: f64) -> [f64; 3] {
    let s2 = sigma * sigma;
    [0.5 * (s2 - sigma), 1.0 - s2, 0.5 * (s2 + sigma)]
}

/// `max ‖M L(U)″(t) + K R(U)(t) − F_τ(t)‖₂ / (1 + ‖F_τ(t)‖₂)` over five Gauss
/// times per interval, for a solution `U` of the driven scheme.
pub fn verify_reconstructed_equation<F: Fn(f64, f64) -> f64>(
    ops: &FemOperators,
    seq: &StateSequence,
    grid: &TimeGrid,
    f_tau: &SourceReconstruction<F>,
) -> Result<f64> {
    let tau = grid.tau();
    let space = ops.space();
    let ppc = space.degree() + 6;
    let u = reconstruct_r(seq, grid)?;
    let w = reconstruct_l(seq, grid)?;
    let count = w.n_intervals();
    // Loads of the samples, reused across intervals.
    let loads: Vec<Vec<f64>> = (0..=count + 1)
        .map(|m| {
            if m == 0 {
                vec![0.0; space.n_dofs()]
            } else {
                space.load_vector(ppc, |x| f_tau.sample(m as isize, x))
            }
        })
        .collect();
    let dim = seq.dim();
    let (mut wdd, mut uv) = (vec![0.0; dim], vec![0.0; dim]);
    let mut worst: f64 = 0.0;
    for n in 0..count {
        for &xi in &check_points() {
            w.evaluate_local_into(n, xi * tau, 2, &mut wdd);
            u.evaluate_local_into(n, xi * tau, 0, &mut uv);
            let (mw, ku) = (ops.mass().matvec(&wdd), ops.stiffness().matvec(&uv));
            let q = quadratic_weights(xi);
            let load: Vec<f64> = (0..dim)
                .map(|i| {
                    let prev = if n == 0 { 0.0 } else { loads[n - 1][i] };
                    q[0] * prev + q[1] * loads[n][i] + q[2] * loads[n + 1][i]
                })
                .collect();
            let r: Vec<f64> = (0..dim).map(|i| mw[i] + ku[i] - load[i]).collect();
            worst = worst.max(norm2(&r) / (1.0 + norm2(&load)));
        }
    }
    Ok(worst)
}
