//! Exponentially damped time integrals `∫₀^{T⋆} q(t) e^{−2ρt} dt` and the
//! error measures built on them.
//!
//! Integrals use a Gauss rule on every time slab `[tⁿ, t^{n+1}]`. The
//! integrands met here are polynomials of degree at most eight per slab times
//! a smooth weight, so ten points per slab are far beyond the accuracy needed
//! while `ρτ ≤ 1`.

use crate::benchmarks::ExactSolution;
use crate::error::{Error, Result};
use crate::fem1d::{CompositeQuadrature, FemOperators, QuadratureRule};
use crate::reconstruct::TimeReconstruction;
use crate::timestepping::{StateSequence, TimeGrid};

/// Gauss points per time slab for every damped integral.
pub const TIME_GAUSS_POINTS: usize = 10;

/// Largest admissible `e^{−ρT⋆}`: below it the truncated tail is negligible.
pub const TAIL_TOLERANCE: f64 = 5e-6;

/// Weighted time quadrature on a uniform grid, truncated at `T⋆`.
#[derive(Debug, Clone)]
pub struct DampedAccumulator {
    rho: f64,
    tau: f64,
    n_slabs: usize,
    rule: QuadratureRule,
}

impl DampedAccumulator {
    pub fn new(grid: &TimeGrid, rho: f64) -> Result<Self> {
        Self::with_order(grid, rho, TIME_GAUSS_POINTS)
    }

    pub fn with_order(grid: &TimeGrid, rho: f64, points: usize) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidDamping(rho));
        }
        Ok(Self {
            rho,
            tau: grid.tau(),
            n_slabs: grid.n_steps(),
            rule: QuadratureRule::gauss_legendre(points),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_slabs(&self) -> usize {
        self.n_slabs
    }

    pub fn t_star(&self) -> f64 {
        self.n_slabs as f64 * self.tau
    }

    /// Reference rule on `[0, 1]`.
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `e^{−2ρt}`.
    pub fn weight(&self, t: f64) -> f64 {
        (-2.0 * self.rho * t).exp()
    }

    /// `e^{−ρT⋆}`, the relative size of the neglected tail of a norm.
    pub fn tail_factor(&self) -> f64 {
        (-self.rho * self.t_star()).exp()
    }

    /// Whether `e^{−ρT⋆} ≤ 5·10⁻⁶`.
    pub fn horizon_is_adequate(&self) -> bool {
        self.tail_factor() <= TAIL_TOLERANCE
    }

    /// Quadrature nodes of slab `n` as `(θ, t, w)`: `θ = t − tⁿ` and `w`
    /// combines the Gauss weight, `τ` and `e^{−2ρt}`.
    pub fn slab_nodes(&self, n: usize) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let t0 = n as f64 * self.tau;
        self.rule.points().iter().zip(self.rule.weights()).map(move |(&p, &w)| {
            let theta = p * self.tau;
            let t = t0 + theta;
            (theta, t, w * self.tau * self.weight(t))
        })
    }

    /// `∫₀^{T⋆} q(t) e^{−2ρt} dt`.
    pub fn integrate(&self, mut q: impl FnMut(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for n in 0..self.n_slabs {
            for (_, t, w) in self.slab_nodes(n) {
                total += w * q(t);
            }
        }
        total
    }

    /// `τ Σ_{tⁿ ≤ T⋆} aₙ e^{−2ρtⁿ}`.
    pub fn node_sum(&self, mut a: impl FnMut(usize) -> f64) -> f64 {
        (0..=self.n_slabs)
            .map(|n| self.tau * a(n) * self.weight(n as f64 * self.tau))
            .sum()
    }
}

/// `∫₀^{T⋆} q(t) e^{−2ρt} dt` with the default per-slab rule.
pub fn damped_time_integral(q: impl FnMut(f64) -> f64, grid: &TimeGrid, rho: f64) -> Result<f64> {
    Ok(DampedAccumulator::new(grid, rho)?.integrate(q))
}

/// `Eρ(φ) = (∫ (‖φ̇‖² + ‖∂ₓφ‖²) e^{−2ρt} dt)^{1/2}` for a reconstructed FE
/// trajectory, with the spatial norms taken from the mass and stiffness
/// matrices.
pub fn damped_energy_norm(ops: &FemOperators, recon: &TimeReconstruction, grid: &TimeGrid, rho: f64) -> Result<f64> {
    let acc = DampedAccumulator::new(grid, rho)?;
    check_reach(recon, grid)?;
    let mut v = vec![0.0; recon.dim()];
    let mut d = vec![0.0; recon.dim()];
    let mut total = 0.0;
    for n in 0..acc.n_slabs() {
        for (theta, _, w) in acc.slab_nodes(n) {
            recon.evaluate_local_into(n, theta, 0, &mut v);
            recon.evaluate_local_into(n, theta, 1, &mut d);
            total += w * (ops.mass().bilinear(&d, &d) + ops.stiffness().bilinear(&v, &v));
        }
    }
    Ok(total.sqrt())
}

fn check_reach(recon: &TimeReconstruction, grid: &TimeGrid) -> Result<()> {
    if recon.n_intervals() < grid.n_steps() {
        return Err(Error::TimeOutOfRange {
            t: grid.t_star(),
            end: recon.end(),
        });
    }
    Ok(())
}

/// The nine damped error quantities. `*_nodes` are the discrete sums over
/// time nodes; `*_u` and `*_w` are time integrals for `u_hτ = R(U)` and
/// `w_hτ = L(U)`. `e` measures L² values, `ex` gradients, `et` velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorMeasures {
    pub e_nodes: f64,
    pub e_u: f64,
    pub e_w: f64,
    pub ex_nodes: f64,
    pub ex_u: f64,
    pub ex_w: f64,
    pub et_nodes: f64,
    pub et_u: f64,
    pub et_w: f64,
}

impl ErrorMeasures {
    /// Damped energy error `Eρ(u − w_hτ) = (e_t(w)² + e_x(w)²)^{1/2}`.
    pub fn energy_error(&self) -> f64 {
        self.et_w.hypot(self.ex_w)
    }
}

/// Evaluates all nine error quantities against an exact solution by direct
/// space-time quadrature (`k + 6` Gauss points per cell).
///
/// The nodal velocity error uses `(U^{n+1} − U^{n−1})/τ`, twice the centered
/// difference quotient, as in the reference definition. `seq` must hold
/// `U⁰..=U^{N+1}` and the reconstructions must cover `[0, T⋆]`.
pub fn error_measures(
    ops: &FemOperators,
    seq: &StateSequence,
    recon_u: &TimeReconstruction,
    recon_w: &TimeReconstruction,
    exact: &impl ExactSolution,
    grid: &TimeGrid,
    rho: f64,
) -> Result<ErrorMeasures> {
    let acc = DampedAccumulator::new(grid, rho)?;
    check_reach(recon_u, grid)?;
    check_reach(recon_w, grid)?;
    let n_steps = grid.n_steps();
    if seq.len() < n_steps + 2 {
        return Err(Error::StencilOutOfRange {
            interval: n_steps,
            needed: n_steps + 1,
            last: seq.len().saturating_sub(1),
        });
    }
    let space = ops.space();
    let quad = CompositeQuadrature::new(space, space.degree() + 6);
    let np = quad.len();
    let tau = grid.tau();
    let (mut u, mut ut, mut ux) = (vec![0.0; np], vec![0.0; np], vec![0.0; np]);
    let sq_diff = |a: &[f64], b: &[f64]| -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        quad.dot(&d, &d)
    };
    let (mut v, mut dv) = (vec![0.0; np], vec![0.0; np]);
    let mut coeffs = vec![0.0; ops.n_dofs()];
    let mut out = ErrorMeasures::default();

    for n in 0..=n_steps {
        let t = grid.t(n);
        sample_exact(exact, &quad, t, [&mut u, &mut ut, &mut ux]);
        let wgt = tau * acc.weight(t);
        let cur = seq.state(n as isize);
        quad.values_into(cur, &mut v);
        quad.derivatives_into(cur, &mut dv);
        out.e_nodes += wgt * sq_diff(&u, &v);
        out.ex_nodes += wgt * sq_diff(&ux, &dv);
        let (p, m) = (seq.state(n as isize + 1), seq.state(n as isize - 1));
        for i in 0..coeffs.len() {
            coeffs[i] = (p[i] - m[i]) / tau;
        }
        quad.values_into(&coeffs, &mut v);
        out.et_nodes += wgt * sq_diff(&ut, &v);
    }

    let (mut sums_u, mut sums_w) = ([0.0; 3], [0.0; 3]);
    for n in 0..n_steps {
        for (theta, t, w) in acc.slab_nodes(n) {
            sample_exact(exact, &quad, t, [&mut u, &mut ut, &mut ux]);
            for (recon, sums) in [(recon_u, &mut sums_u), (recon_w, &mut sums_w)] {
                recon.evaluate_local_into(n, theta, 0, &mut coeffs);
                quad.values_into(&coeffs, &mut v);
                quad.derivatives_into(&coeffs, &mut dv);
                sums[0] += w * sq_diff(&u, &v);
                sums[1] += w * sq_diff(&ux, &dv);
                recon.evaluate_local_into(n, theta, 1, &mut coeffs);
                quad.values_into(&coeffs, &mut v);
                sums[2] += w * sq_diff(&ut, &v);
            }
        }
    }
    [out.e_u, out.ex_u, out.et_u] = sums_u;
    [out.e_w, out.ex_w, out.et_w] = sums_w;

    for f in [
        &mut out.e_nodes,
        &mut out.e_u,
        &mut out.e_w,
        &mut out.ex_nodes,
        &mut out.ex_u,
        &mut out.ex_w,
        &mut out.et_nodes,
        &mut out.et_u,
        &mut out.et_w,
    ] {
        *f = f.sqrt();
    }
    Ok(out)
}

/// Exact `u`, `u_t`, `u_x` at the quadrature points at time `t`.
fn sample_exact(exact: &impl ExactSolution, quad: &CompositeQuadrature, t: f64, out: [&mut [f64]; 3]) {
    let [u, ut, ux] = out;
    for (i, &x) in quad.positions().iter().enumerate() {
        let s = exact.sample(t, x);
        u[i] = s.u;
        ut[i] = s.u_t;
        ux[i] = s.u_x;
    }
}
