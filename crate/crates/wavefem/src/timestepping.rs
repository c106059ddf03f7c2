//! Explicit leapfrog integration of `M Ü + K U = F`, discrete energies,
//! the empirical CFL search and damped-stability diagnostics.

use crate::error::{Error, Result};
use crate::fem1d::{count_eigenvalues_below, FemOperators, LagrangeSpace};

/// Uniform time grid `tⁿ = n·τ`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tau: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidGrid(format!("time step {tau} must be positive")));
        }
        Ok(Self { tau, n_steps })
    }

    /// Smallest grid with step `tau` reaching at least `t_star`.
    pub fn covering(tau: f64, t_star: f64) -> Result<Self> {
        if !(t_star > 0.0 && t_star.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon {t_star} must be positive")));
        }
        let n = (t_star / tau * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(tau, n)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn t_star(&self) -> f64 {
        self.t(self.n_steps)
    }

    /// `θ = ρτ`, rejected unless `0 < θ ≤ 1`.
    pub fn damping_ratio(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidDamping(rho));
        }
        let theta = rho * self.tau;
        if theta > 1.0 {
            return Err(Error::DampingTooLarge(theta));
        }
        Ok(theta)
    }
}

/// A sequence of coefficient vectors `V⁰, V¹, …` extended by zero for
/// negative indices.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    dim: usize,
    states: Vec<Vec<f64>>,
    zero: Vec<f64>,
}

impl StateSequence {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            states: Vec::new(),
            zero: vec![0.0; dim],
        }
    }

    pub fn from_states(dim: usize, states: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = states.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self {
            dim,
            states,
            zero: vec![0.0; dim],
        })
    }

    /// Scalar sequence (dimension 1).
    pub fn from_scalars(values: &[f64]) -> Self {
        Self::from_states(1, values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    pub fn push(&mut self, state: Vec<f64>) -> Result<()> {
        if state.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: state.len(),
            });
        }
        self.states.push(state);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored states.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `Vⁿ`; negative `n` gives the zero vector. Panics past the last state.
    pub fn state(&self, n: isize) -> &[f64] {
        if n < 0 {
            &self.zero
        } else {
            &self.states[n as usize]
        }
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }
}

/// Streaming leapfrog integrator holding `X^{n−1}` and `Xⁿ`.
#[derive(Debug, Clone)]
pub struct Leapfrog<'a> {
    ops: &'a FemOperators,
    tau: f64,
    index: usize,
    prev: Vec<f64>,
    curr: Vec<f64>,
    work: Vec<f64>,
}

impl<'a> Leapfrog<'a> {
    /// Starts from `X^{−1} = X⁰ = 0`; the current index is 0.
    pub fn new(ops: &'a FemOperators, tau: f64) -> Self {
        let n = ops.n_dofs();
        Self {
            ops,
            tau,
            index: 0,
            prev: vec![0.0; n],
            curr: vec![0.0; n],
            work: vec![0.0; n],
        }
    }

    /// Starts from given `U⁰` and `U¹`; the current index is 1.
    pub fn with_initial(ops: &'a FemOperators, tau: f64, u0: &[f64], u1: &[f64]) -> Result<Self> {
        ops.space().check_len(u0)?;
        ops.space().check_len(u1)?;
        Ok(Self {
            ops,
            tau,
            index: 1,
            prev: u0.to_vec(),
            curr: u1.to_vec(),
            work: vec![0.0; u0.len()],
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn current(&self) -> &[f64] {
        &self.curr
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    /// Advances with load `Gⁿ` at the current index `n` and returns `X^{n+1}`.
    pub fn step(&mut self, load: &[f64]) -> Result<&[f64]> {
        let tau2 = self.tau * self.tau;
        self.ops.stiffness().matvec_into(&self.curr, &mut self.work);
        for (w, g) in self.work.iter_mut().zip(load) {
            *w = tau2 * (g - *w);
        }
        self.ops.mass_factor().solve_in_place(&mut self.work);
        let mut finite = true;
        for ((p, &c), &d) in self.prev.iter_mut().zip(&self.curr).zip(&self.work) {
            let next = 2.0 * c - *p + d;
            finite &= next.is_finite();
            *p = next;
        }
        std::mem::swap(&mut self.prev, &mut self.curr);
        self.index += 1;
        if !finite {
            return Err(Error::BlowUp { step: self.index });
        }
        Ok(&self.curr)
    }
}

/// Driven scheme with `U⁰ = U¹ = 0`: `source(n, Fⁿ)` fills the load for
/// `n = 1..N−1`. Returns `U⁰..=U^N`.
pub fn run_leapfrog(
    ops: &FemOperators,
    grid: &TimeGrid,
    mut source: impl FnMut(usize, &mut [f64]),
) -> Result<StateSequence> {
    let n = ops.n_dofs();
    let mut seq = StateSequence::new(n);
    seq.push(vec![0.0; n])?;
    if grid.n_steps() == 0 {
        return Ok(seq);
    }
    seq.push(vec![0.0; n])?;
    let mut stepper = Leapfrog::with_initial(ops, grid.tau(), &seq.states[0], &seq.states[1])?;
    let mut load = vec![0.0; n];
    for step in 1..grid.n_steps() {
        load.iter_mut().for_each(|v| *v = 0.0);
        source(step, &mut load);
        let next = stepper.step(&load)?.to_vec();
        seq.push(next)?;
    }
    Ok(seq)
}

/// Generic scheme with `X^{−1} = X⁰ = 0` and loads `Gⁿ` for `n = 0..N−1`.
/// Returns `X⁰..=X^N`.
pub fn run_leapfrog_generic(
    ops: &FemOperators,
    grid: &TimeGrid,
    mut source: impl FnMut(usize, &mut [f64]),
) -> Result<StateSequence> {
    let n = ops.n_dofs();
    let mut seq = StateSequence::new(n);
    seq.push(vec![0.0; n])?;
    let mut stepper = Leapfrog::new(ops, grid.tau());
    let mut load = vec![0.0; n];
    for step in 0..grid.n_steps() {
        load.iter_mut().for_each(|v| *v = 0.0);
        source(step, &mut load);
        let next = stepper.step(&load)?.to_vec();
        seq.push(next)?;
    }
    Ok(seq)
}

/// Undriven scheme from given `U⁰`, `U¹`. Returns `U⁰..=U^N`.
pub fn run_leapfrog_free(ops: &FemOperators, grid: &TimeGrid, u0: &[f64], u1: &[f64]) -> Result<StateSequence> {
    let n = ops.n_dofs();
    let mut seq = StateSequence::new(n);
    seq.push(u0.to_vec())?;
    seq.push(u1.to_vec())?;
    let mut stepper = Leapfrog::with_initial(ops, grid.tau(), u0, u1)?;
    let zero = vec![0.0; n];
    for _ in 1..grid.n_steps() {
        let next = stepper.step(&zero)?.to_vec();
        seq.push(next)?;
    }
    Ok(seq)
}

/// `m_hτ(v, w) = vᵀMw − (τ²/4) vᵀKw`, the form whose coercivity is
/// equivalent to leapfrog stability.
pub fn mht_form(ops: &FemOperators, tau: f64, v: &[f64], w: &[f64]) -> f64 {
    ops.mass().bilinear(v, w) - 0.25 * tau * tau * ops.stiffness().bilinear(v, w)
}

/// Largest eigenvalue of `M⁻¹K` by bisection on the inertia of `K − λM`.
pub fn lambda_max(ops: &FemOperators) -> f64 {
    let n = ops.n_dofs();
    let (k, m) = (ops.stiffness(), ops.mass());
    let h = ops.space().h();
    let mut lo = 0.0;
    let mut hi = 1.0 / (h * h);
    while count_eigenvalues_below(k, m, hi) < n {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if count_eigenvalues_below(k, m, mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `μ₀ = 1 − τ²λ_max/4`, the coercivity constant of [`mht_form`] relative to
/// the L² inner product.
pub fn verify_cfl(ops: &FemOperators, tau: f64) -> Result<f64> {
    let mu0 = 1.0 - 0.25 * tau * tau * lambda_max(ops);
    // Values at rounding level count as zero: the boundary step is unstable.
    if mu0 > 1e-12 {
        Ok(mu0)
    } else {
        Err(Error::CflViolated { mu0 })
    }
}

/// Whether leapfrog with `τ = r·h` stays bounded over `probe_steps` under a
/// fixed broadband load.
fn probe_is_stable(ops: &FemOperators, tau: f64, probe_steps: usize) -> bool {
    let n = ops.n_dofs();
    // Golden-angle phases: no eigenmode of M⁻¹K is orthogonal to this load.
    let load: Vec<f64> = (0..n).map(|i| (1.0 + 2.399_963_229_728_653 * i as f64).sin()).collect();
    let mut stepper = Leapfrog::new(ops, tau);
    let mut prev = vec![0.0; n];
    let mut vel = vec![0.0; n];
    let mut mid = vec![0.0; n];
    let mut early: f64 = 0.0;
    for step in 0..probe_steps {
        let g = if step == 0 { vec![0.0; n] } else { load.clone() };
        let Ok(next) = stepper.step(&g) else { return false };
        for i in 0..n {
            vel[i] = (next[i] - prev[i]) / tau;
            mid[i] = 0.5 * (next[i] + prev[i]);
        }
        prev.copy_from_slice(next);
        let energy = ops.mass().bilinear(&vel, &vel) + ops.stiffness().bilinear(&mid, &mid);
        if !energy.is_finite() {
            return false;
        }
        if step < 10 {
            early = early.max(energy);
        } else if energy > 1e6 * early {
            return false;
        }
    }
    true
}

/// Empirical CFL constant `α` such that `τ = r·h` is stable for `r ≤ α`,
/// found by bisection to a resolution of 1e-3.
pub fn find_cfl_alpha(space: &LagrangeSpace, probe_steps: usize) -> Result<f64> {
    let ops = FemOperators::new(*space)?;
    let h = space.h();
    let (mut lo, mut hi) = (0.02, 1.0);
    if !probe_is_stable(&ops, lo * h, probe_steps) {
        return Err(Error::InvalidArgument("leapfrog is unstable even at r = 0.02".into()));
    }
    while probe_is_stable(&ops, hi * h, probe_steps) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if probe_is_stable(&ops, mid * h, probe_steps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `E^{n+½} = m_hτ(U̇^{n+½}, U̇^{n+½}) + ‖∇U^{n+½}‖²` for `n = 0..len−2`.
pub fn discrete_energy_trace(ops: &FemOperators, seq: &StateSequence, tau: f64) -> Vec<f64> {
    let n = seq.dim();
    let mut vel = vec![0.0; n];
    let mut mid = vec![0.0; n];
    (0..seq.len().saturating_sub(1))
        .map(|j| {
            let (a, b) = (seq.state(j as isize), seq.state(j as isize + 1));
            for i in 0..n {
                vel[i] = (b[i] - a[i]) / tau;
                mid[i] = 0.5 * (a[i] + b[i]);
            }
            mht_form(ops, tau, &vel, &vel) + ops.stiffness().bilinear(&mid, &mid)
        })
        .collect()
}

/// `C_X(θ) = (169/12)(13 − 6θ)⁻¹ θ (1 − e^{−θ})⁻¹`.
pub fn stability_constant(theta: f64) -> f64 {
    // θ/(1 − e^{−θ}) via expm1 keeps the θ → 0 limit accurate.
    let ratio = if theta == 0.0 { 1.0 } else { theta / -(-theta).exp_m1() };
    169.0 / 12.0 / (13.0 - 6.0 * theta) * ratio
}

/// `C_A(θ) = (2/3) C_X(θ)(1 + e^{2θ})`, for second differences of the load.
pub fn accel_stability_constant(theta: f64) -> f64 {
    2.0 / 3.0 * stability_constant(theta) * (1.0 + (2.0 * theta).exp())
}

/// `C_B(θ) = (11/20) C_X(θ)(2 + e^{2θ})`, for third differences of the load.
pub fn third_stability_constant(theta: f64) -> f64 {
    11.0 / 20.0 * stability_constant(theta) * (2.0 + (2.0 * theta).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedStability {
    pub lhs: f64,
    pub rhs: f64,
    pub mu0: f64,
    pub satisfied: bool,
}

/// Checks `Σ τ E^{n+½} e^{−2ρtⁿ} ≤ C_X(ρτ) μ₀⁻¹ ρ⁻² Σ τ ‖Gⁿ‖² e^{−2ρtⁿ}` for a
/// solution of the generic scheme with `X⁰ = X⁻¹ = 0`.
///
/// `load_norms_sq[n] = ‖Gⁿ‖²` for `n = 0..N−1`; `seq` holds `X⁰..=X^N`.
pub fn check_damped_stability(
    ops: &FemOperators,
    seq: &StateSequence,
    grid: &TimeGrid,
    rho: f64,
    load_norms_sq: &[f64],
) -> Result<DampedStability> {
    let theta = grid.damping_ratio(rho)?;
    let mu0 = verify_cfl(ops, grid.tau())?;
    let tau = grid.tau();
    let energies = discrete_energy_trace(ops, seq, tau);
    let lhs: f64 = energies
        .iter()
        .enumerate()
        .map(|(n, e)| tau * e * (-2.0 * rho * grid.t(n)).exp())
        .sum();
    let sum: f64 = load_norms_sq
        .iter()
        .enumerate()
        .map(|(n, g)| tau * g * (-2.0 * rho * grid.t(n)).exp())
        .sum();
    let rhs = stability_constant(theta) / mu0 / (rho * rho) * sum;
    Ok(DampedStability {
        lhs,
        rhs,
        mu0,
        satisfied: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// Discrete accelerations and third differences with their half-step means
/// and rates.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSequences {
    /// `Aⁿ = (U^{n+1} − 2Uⁿ + U^{n−1})/τ²`, `n = 0..N−1`.
    pub accel: StateSequence,
    /// `Bⁿ = (U^{n+1} − 3Uⁿ + 3U^{n−1} − U^{n−2})/τ³`, `n = 0..N−1`.
    pub third: StateSequence,
    /// `A^{n+½} = (A^{n+1} + Aⁿ)/2`, `n = 0..N−2`.
    pub accel_mid: Vec<Vec<f64>>,
    /// `Ȧ^{n+½} = (A^{n+1} − Aⁿ)/τ`.
    pub accel_rate: Vec<Vec<f64>>,
    pub third_mid: Vec<Vec<f64>>,
    pub third_rate: Vec<Vec<f64>>,
}

pub fn difference_sequences(seq: &StateSequence, tau: f64) -> DifferenceSequences {
    let dim = seq.dim();
    let last = seq.len() as isize - 1;
    let mut accel = StateSequence::new(dim);
    let mut third = StateSequence::new(dim);
    for n in 0..last {
        let (p, c, m, mm) = (seq.state(n + 1), seq.state(n), seq.state(n - 1), seq.state(n - 2));
        let a = (0..dim).map(|i| (p[i] - 2.0 * c[i] + m[i]) / (tau * tau)).collect();
        let b = (0..dim)
            .map(|i| (p[i] - 3.0 * c[i] + 3.0 * m[i] - mm[i]) / (tau * tau * tau))
            .collect();
        accel.push(a).unwrap();
        third.push(b).unwrap();
    }
    let halves = |s: &StateSequence| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (0..s.len().saturating_sub(1))
            .map(|n| {
                let (a, b) = (s.state(n as isize), s.state(n as isize + 1));
                (
                    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
                    a.iter().zip(b).map(|(x, y)| (y - x) / tau).collect(),
                )
            })
            .unzip()
    };
    let (accel_mid, accel_rate) = halves(&accel);
    let (third_mid, third_rate) = halves(&third);
    DifferenceSequences {
        accel,
        third,
        accel_mid,
        accel_rate,
        third_mid,
        third_rate,
    }
}
