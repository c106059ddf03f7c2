//! Computable a posteriori estimator of the damped energy error.
//!
//! With `σ(t)` the zero-mean antiderivative of `f_τ(t) − ẅ_hτ(t)` in space,
//! the residual satisfies `‖R(t)‖_{V′} ≤ ‖∂ₓw_hτ(t) + σ(t)‖`. The parts are
//!
//! * `R² = ∫ ‖∂ₓw_hτ + σ‖² e^{−2ρt} dt` (space discretization),
//! * `M² = ρ⁻² ∫ ‖∂ₓ(u̇_hτ − ẇ_hτ)‖² e^{−2ρt} dt` (time discretization),
//! * `η_f² = ∫ ‖f − f_τ‖² e^{−2ρt} dt` (data oscillation, reported apart),
//!
//! and the estimate is `Λ² = R² + 20 M²`.

use crate::damped_norms::DampedAccumulator;
use crate::error::{Error, Result};
use crate::fem1d::{CompositeQuadrature, FemOperators, LagrangeSpace, QuadratureRule};
use crate::reconstruct::{quadratic_weights, SourceReconstruction, TimeReconstruction};
use crate::timestepping::TimeGrid;

/// Weight of the time part in `Λ² = R² + TIME_WEIGHT·M²`.
pub const TIME_WEIGHT: f64 = 20.0;

/// Zero-mean spatial antiderivative of `g − v_h` for a source `g` and an FE
/// function `v_h`, anchored at the left end of the domain.
pub struct SigmaFlux<G> {
    space: LagrangeSpace,
    rule: QuadratureRule,
    source: G,
    coeffs: Vec<f64>,
    /// Uncentered antiderivative at the cell left ends.
    offsets: Vec<f64>,
    mean: f64,
}

impl<G: Fn(f64) -> f64> SigmaFlux<G> {
    /// Accumulates `∫_{−L}^{x} (g − v_h)` cell by cell with `k + 6` Gauss
    /// points and removes the mean.
    pub fn new(space: &LagrangeSpace, source: G, coeffs: &[f64]) -> Result<Self> {
        space.check_len(coeffs)?;
        let rule = QuadratureRule::gauss_legendre(space.degree() + 6);
        let mut flux = Self {
            space: *space,
            rule,
            source,
            coeffs: coeffs.to_vec(),
            offsets: Vec::with_capacity(space.mesh().n_cells() + 1),
            mean: 0.0,
        };
        let mut acc = 0.0;
        for cell in 0..space.mesh().n_cells() {
            flux.offsets.push(acc);
            acc += flux.partial(cell, 1.0);
        }
        flux.offsets.push(acc);
        let h = space.h();
        let mut total = 0.0;
        for cell in 0..space.mesh().n_cells() {
            for (&p, &w) in flux.rule.points().iter().zip(flux.rule.weights()) {
                total += w * h * (flux.offsets[cell] + flux.partial(cell, p));
            }
        }
        flux.mean = total / space.mesh().length();
        Ok(flux)
    }

    /// `∫` of `g − v_h` from the left end of `cell` to reference point `xi`.
    fn partial(&self, cell: usize, xi: f64) -> f64 {
        let h = self.space.h();
        let x0 = self.space.mesh().cell_left(cell);
        let k = self.space.degree();
        let local: Vec<f64> = (0..=k).map(|l| self.space.local_coeff(&self.coeffs, cell, l)).collect();
        let mut s = 0.0;
        for (&p, &w) in self.rule.points().iter().zip(self.rule.weights()) {
            let eta = p * xi;
            let phi = self.space.shape_values(eta);
            let vh: f64 = (0..=k).map(|l| local[l] * phi[l]).sum();
            s += w * ((self.source)(x0 + eta * h) - vh);
        }
        s * xi * h
    }

    /// `σ(x)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        let (cell, xi) = self.space.mesh().locate(x)?;
        Ok(self.offsets[cell] + self.partial(cell, xi) - self.mean)
    }

    /// `σ` at every point of a composite rule on the same mesh.
    pub fn values_into(&self, quad: &CompositeQuadrature, out: &mut [f64]) {
        let q = quad.points_per_cell();
        for cell in 0..self.space.mesh().n_cells() {
            for (j, &xi) in quad.reference_points().iter().enumerate() {
                out[cell * q + j] = self.offsets[cell] + self.partial(cell, xi) - self.mean;
            }
        }
    }
}

/// `σ_hτ(t)`: the flux of `f_τ(t) − ẅ_hτ(t)`.
pub fn sigma_flux<'a, F: Fn(f64, f64) -> f64>(
    space: &LagrangeSpace,
    f_tau: &'a SourceReconstruction<F>,
    recon_w: &TimeReconstruction,
    t: f64,
) -> Result<SigmaFlux<impl Fn(f64) -> f64 + 'a>> {
    let (n, theta) = recon_w.locate(t)?;
    sigma_on_slab(space, f_tau, recon_w, n, theta)
}

/// Residual part `R = (∫ ‖∂ₓw_hτ + σ_hτ‖² e^{−2ρt} dt)^{1/2}`.
pub fn estimator_r<F: Fn(f64, f64) -> f64>(
    ops: &FemOperators,
    grid: &TimeGrid,
    recon_w: &TimeReconstruction,
    f_tau: &SourceReconstruction<F>,
    rho: f64,
) -> Result<f64> {
    let acc = DampedAccumulator::new(grid, rho)?;
    reaches(recon_w, grid)?;
    let space = ops.space();
    let quad = CompositeQuadrature::new(space, space.degree() + 6);
    let (mut dw, mut sig) = (vec![0.0; quad.len()], vec![0.0; quad.len()]);
    let mut w = vec![0.0; ops.n_dofs()];
    let mut total = 0.0;
    for n in 0..acc.n_slabs() {
        for (theta, _, weight) in acc.slab_nodes(n) {
            recon_w.evaluate_local_into(n, theta, 0, &mut w);
            quad.derivatives_into(&w, &mut dw);
            sigma_on_slab(space, f_tau, recon_w, n, theta)?.values_into(&quad, &mut sig);
            for (a, b) in dw.iter_mut().zip(&sig) {
                *a += b;
            }
            total += weight * quad.dot(&dw, &dw);
        }
    }
    Ok(total.sqrt())
}

/// `σ` on slab `n` at offset `θ = t − tⁿ`.
fn sigma_on_slab<'a, F: Fn(f64, f64) -> f64>(
    space: &LagrangeSpace,
    f_tau: &'a SourceReconstruction<F>,
    recon_w: &TimeReconstruction,
    n: usize,
    theta: f64,
) -> Result<SigmaFlux<impl Fn(f64) -> f64 + 'a>> {
    let mut wdd = vec![0.0; recon_w.dim()];
    recon_w.evaluate_local_into(n, theta, 2, &mut wdd);
    let w = quadratic_weights(theta / recon_w.tau());
    let n = n as isize;
    SigmaFlux::new(
        space,
        move |x| w[0] * f_tau.sample(n - 1, x) + w[1] * f_tau.sample(n, x) + w[2] * f_tau.sample(n + 1, x),
        &wdd,
    )
}

/// Time part `M = ρ⁻¹ (∫ ‖∂ₓδ̇‖² e^{−2ρt} dt)^{1/2}` for the gap `δ = R(U) − L(U)`.
pub fn estimator_m(ops: &FemOperators, grid: &TimeGrid, gap: &TimeReconstruction, rho: f64) -> Result<f64> {
    let acc = DampedAccumulator::new(grid, rho)?;
    reaches(gap, grid)?;
    let mut v = vec![0.0; gap.dim()];
    let mut total = 0.0;
    for n in 0..acc.n_slabs() {
        for (theta, _, weight) in acc.slab_nodes(n) {
            gap.evaluate_local_into(n, theta, 1, &mut v);
            total += weight * ops.stiffness().bilinear(&v, &v);
        }
    }
    Ok(total.sqrt() / rho)
}

/// Data oscillation `η_f = (∫ ‖f − f_τ‖² e^{−2ρt} dt)^{1/2}` by space-time
/// Gauss quadrature.
pub fn data_oscillation<F: Fn(f64, f64) -> f64>(
    space: &LagrangeSpace,
    grid: &TimeGrid,
    f_tau: &SourceReconstruction<F>,
    rho: f64,
) -> Result<f64> {
    let acc = DampedAccumulator::new(grid, rho)?;
    let quad = CompositeQuadrature::new(space, space.degree() + 6);
    let mut diff = vec![0.0; quad.len()];
    let mut total = 0.0;
    for n in 0..acc.n_slabs() {
        for (theta, t, weight) in acc.slab_nodes(n) {
            let wts = quadratic_weights(theta / grid.tau());
            let m = n as isize;
            for (d, &x) in diff.iter_mut().zip(quad.positions()) {
                let ft =
                    wts[0] * f_tau.sample(m - 1, x) + wts[1] * f_tau.sample(m, x) + wts[2] * f_tau.sample(m + 1, x);
                *d = f_tau.source(t, x) - ft;
            }
            total += weight * quad.dot(&diff, &diff);
        }
    }
    Ok(total.sqrt())
}

fn reaches(recon: &TimeReconstruction, grid: &TimeGrid) -> Result<()> {
    if recon.n_intervals() < grid.n_steps() {
        return Err(Error::TimeOutOfRange {
            t: grid.t_star(),
            end: recon.end(),
        });
    }
    Ok(())
}

/// Estimator parts, total and effectivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorBreakdown {
    pub r: f64,
    pub m: f64,
    pub eta_f: f64,
    /// `Λ = (R² + 20 M²)^{1/2}`.
    pub lambda: f64,
    /// True damped energy error, when known.
    pub e_rho: Option<f64>,
    /// `Λ / Eρ`; `+∞` if `Eρ = 0 < Λ`, and `0` if both vanish.
    pub effectivity: Option<f64>,
}

/// `Λ² = R² + 20 M²` as stored in [`EstimatorBreakdown::lambda`].
pub fn combine(r: f64, m: f64) -> f64 {
    (r * r + TIME_WEIGHT * m * m).sqrt()
}

pub fn total_estimator(r: f64, m: f64, eta_f: f64, e_rho: Option<f64>) -> Result<EstimatorBreakdown> {
    for (name, v) in [("R", r), ("M", m), ("eta_f", eta_f), ("E_rho", e_rho.unwrap_or(0.0))] {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} = {v} must be nonnegative")));
        }
    }
    let lambda = combine(r, m);
    let effectivity = e_rho.map(|e| effectivity(lambda, e));
    Ok(EstimatorBreakdown {
        r,
        m,
        eta_f,
        lambda,
        e_rho,
        effectivity,
    })
}

/// `Λ / Eρ` with the conventions of [`EstimatorBreakdown::effectivity`].
pub fn effectivity(lambda: f64, e_rho: f64) -> f64 {
    if e_rho > 0.0 {
        lambda / e_rho
    } else if lambda > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Bound on the approximation factor of the dual problem at Laplace
/// frequency `s`: `min{|s|/ρ, C_app C_ℓ h^θ ℓ^{1−θ} |s| (1 + |s|/ρ)}`.
pub fn gamma_bound(s_modulus: f64, rho: f64, h: f64, theta: f64, c_app: f64, c_ell: f64, ell: f64) -> Result<f64> {
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(Error::InvalidExponent(theta));
    }
    for (name, v) in [
        ("|s|", s_modulus),
        ("rho", rho),
        ("h", h),
        ("C_app", c_app),
        ("C_ell", c_ell),
        ("ell", ell),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} = {v} must be positive")));
        }
    }
    let first = s_modulus / rho;
    let second = c_app * c_ell * h.powf(theta) * ell.powf(1.0 - theta) * s_modulus * (1.0 + s_modulus / rho);
    Ok(first.min(second))
}
