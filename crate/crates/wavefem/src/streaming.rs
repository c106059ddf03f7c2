//! Single-pass evaluation of the damped error measures and estimator parts
//! while leapfrog states are produced, without storing the trajectory.
//!
//! On slab `Jₙ` both reconstructions, their time derivatives and the gap are
//! combinations of
//!
//! ```text
//! e0 = Uⁿ,                       e1 = (U^{n+1} − U^{n−1}) / 2τ,
//! e2 = Δ²U^{n+1} / τ²,           e3 = Δ³U^{n+1} / τ³,       e4 = Δ⁴U^{n+2} / τ⁴
//! ```
//!
//! (backward differences) with polynomial weights in `θ = t − tⁿ`. Gram
//! matrices of these vectors are formed once per slab, after which every time
//! quadrature node costs a handful of 5×5 quadratic forms. Differences are
//! taken on the vectors before any inner product so that small quantities
//! such as `∂ₓδ̇` keep their relative accuracy.
//!
//! For a separable source `f = φ(t)g(x)` the flux is
//! `σ(t) = (Rφ)(t)·S g − S ẅ_hτ(t)` with `S` the zero-mean antiderivative.
//! Integration by parts gives `(∂ₓa, S b) = −(a, b)` for discrete `a`, `b`,
//! so only the Gram of `S` applied to the higher differences needs explicit
//! quadrature.

use std::collections::VecDeque;

use crate::benchmarks::ExactSolution;
use crate::damped_norms::{DampedAccumulator, ErrorMeasures};
use crate::error::{Error, Result};
use crate::estimator::SigmaFlux;
use crate::fem1d::{CompositeQuadrature, FemOperators};
use crate::reconstruct::quadratic_weights;
use crate::timestepping::TimeGrid;

/// Source of the form `φ(t)·g(x)`.
#[derive(Clone, Copy)]
pub struct SeparableSource<'a> {
    pub pulse: &'a dyn Fn(f64) -> f64,
    pub profile: &'a dyn Fn(f64) -> f64,
}

/// Exact solution used for the error measures.
#[derive(Clone, Copy)]
pub enum ExactField<'a> {
    /// `u = c(t)s(x)` given by `t ↦ (c, ċ)` and `x ↦ (s, s′)`.
    Separable {
        time: &'a dyn Fn(f64) -> (f64, f64),
        space: &'a dyn Fn(f64) -> (f64, f64),
    },
    /// Sampled pointwise at every quadrature node.
    Pointwise(&'a dyn ExactSolution),
}

/// Everything a run reports, before square roots are combined into `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamingSummary {
    pub errors: Option<ErrorMeasures>,
    pub r: f64,
    pub m: f64,
    pub eta_f: f64,
}

const SLOTS: usize = 4;
const BS: usize = 0;
const BSX: usize = 1;
const DX: usize = 2;
const SX: usize = 3;

struct StateData {
    u: Vec<f64>,
    mu: Vec<f64>,
    ku: Vec<f64>,
    /// Centered antiderivative at the points of the low-order rule.
    su: Vec<f64>,
    scalars: [f64; SLOTS],
}

enum ExactData<'a> {
    None,
    Separable {
        time: &'a dyn Fn(f64) -> (f64, f64),
        s_sq: f64,
        sx_sq: f64,
    },
    Pointwise {
        field: &'a dyn ExactSolution,
        u: Vec<f64>,
        ut: Vec<f64>,
        ux: Vec<f64>,
        proj: [Vec<f64>; 3],
    },
}

/// Per-slab Gram matrices and projections in the `e` basis.
#[derive(Default)]
struct SlabForms {
    mass: [[f64; 5]; 5],
    stiff: [[f64; 5]; 5],
    /// `(S eᵢ, S eⱼ)` for `i, j ∈ {2, 3, 4}`.
    anti: [[f64; 3]; 3],
    scalars: [[f64; 5]; SLOTS],
    /// `φ` at `t^{n−1}, tⁿ, t^{n+1}`.
    pulse: [f64; 3],
}

/// Accumulates all damped integrals of a run from its states `U⁰, U¹, …`.
pub struct StreamingEvaluator<'a> {
    ops: &'a FemOperators,
    acc: DampedAccumulator,
    quad: CompositeQuadrature,
    low: CompositeQuadrature,
    source: SeparableSource<'a>,
    exact: ExactData<'a>,
    proj: Vec<Vec<f64>>,
    x_sq: f64,
    g_sq: f64,
    window: VecDeque<StateData>,
    spare: Option<StateData>,
    e_u: [Vec<f64>; 5],
    e_mu: [Vec<f64>; 5],
    e_ku: [Vec<f64>; 5],
    e_su: [Vec<f64>; 3],
    forms: SlabForms,
    pushed: usize,
    sums: [f64; 9],
    r_sq: f64,
    m_sq: f64,
    eta_sq: f64,
}

impl<'a> StreamingEvaluator<'a> {
    pub fn new(
        ops: &'a FemOperators,
        grid: &TimeGrid,
        rho: f64,
        source: SeparableSource<'a>,
        exact: Option<ExactField<'a>>,
    ) -> Result<Self> {
        if grid.n_steps() == 0 {
            return Err(Error::InvalidGrid("at least one time step is required".into()));
        }
        let acc = DampedAccumulator::new(grid, rho)?;
        let space = ops.space();
        let k = space.degree();
        let n = ops.n_dofs();
        let quad = CompositeQuadrature::new(space, k + 6);
        let low = CompositeQuadrature::new(space, k + 2);
        let np = quad.len();

        let mut samples = vec![0.0; np];
        let mut proj = vec![vec![0.0; n]; SLOTS];
        let exact = match exact {
            None => ExactData::None,
            Some(ExactField::Separable { time, space: s }) => {
                let mut ds = vec![0.0; np];
                for (i, &x) in quad.positions().iter().enumerate() {
                    (samples[i], ds[i]) = s(x);
                }
                quad.project_values_into(&samples, &mut proj[BS]);
                quad.project_derivatives_into(&ds, &mut proj[BSX]);
                ExactData::Separable {
                    time,
                    s_sq: quad.dot(&samples, &samples),
                    sx_sq: quad.dot(&ds, &ds),
                }
            }
            Some(ExactField::Pointwise(field)) => ExactData::Pointwise {
                field,
                u: vec![0.0; np],
                ut: vec![0.0; np],
                ux: vec![0.0; np],
                proj: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            },
        };

        // S g at the quadrature points and its pairings with the basis.
        let profile = source.profile;
        let flux = SigmaFlux::new(space, profile, &vec![0.0; n])?;
        let mut xt = vec![0.0; np];
        flux.values_into(&quad, &mut xt);
        quad.project_derivatives_into(&xt, &mut proj[DX]);
        let mut unit = vec![0.0; n];
        for i in 0..n {
            unit[i] = 1.0;
            quad.centered_antiderivative_into(&unit, &mut samples);
            proj[SX][i] = quad.dot(&samples, &xt);
            unit[i] = 0.0;
        }
        let x_sq = quad.dot(&xt, &xt);
        for (v, &x) in samples.iter_mut().zip(quad.positions()) {
            *v = profile(x);
        }
        let g_sq = quad.dot(&samples, &samples);

        let mut window = VecDeque::with_capacity(6);
        for _ in 0..2 {
            window.push_back(StateData {
                u: vec![0.0; n],
                mu: vec![0.0; n],
                ku: vec![0.0; n],
                su: vec![0.0; low.len()],
                scalars: [0.0; SLOTS],
            });
        }
        let vecs = || std::array::from_fn(|_| vec![0.0; n]);
        Ok(Self {
            ops,
            acc,
            e_su: std::array::from_fn(|_| vec![0.0; low.len()]),
            quad,
            low,
            source,
            exact,
            proj,
            x_sq,
            g_sq,
            window,
            spare: None,
            e_u: vecs(),
            e_mu: vecs(),
            e_ku: vecs(),
            forms: SlabForms::default(),
            pushed: 0,
            sums: [0.0; 9],
            r_sq: 0.0,
            m_sq: 0.0,
            eta_sq: 0.0,
        })
    }

    /// Number of states `U⁰..=U^{N+2}` the evaluator consumes.
    pub fn states_needed(&self) -> usize {
        self.acc.n_slabs() + 3
    }

    /// Whether every state has been supplied.
    pub fn is_complete(&self) -> bool {
        self.pushed >= self.states_needed()
    }

    /// Supplies the next state `U^m`; extra states beyond `U^{N+2}` are ignored.
    pub fn push(&mut self, state: &[f64]) -> Result<()> {
        self.ops.space().check_len(state)?;
        if self.is_complete() {
            return Ok(());
        }
        let n = self.ops.n_dofs();
        let mut data = self.spare.take().unwrap_or_else(|| StateData {
            u: vec![0.0; n],
            mu: vec![0.0; n],
            ku: vec![0.0; n],
            su: vec![0.0; self.low.len()],
            scalars: [0.0; SLOTS],
        });
        data.u.copy_from_slice(state);
        self.ops.mass().matvec_into(state, &mut data.mu);
        self.ops.stiffness().matvec_into(state, &mut data.ku);
        self.low.centered_antiderivative_into(state, &mut data.su);
        for (s, p) in data.scalars.iter_mut().zip(&self.proj) {
            *s = dot(p, state);
        }
        self.window.push_back(data);
        if self.window.len() > 5 {
            self.spare = self.window.pop_front();
        }
        self.pushed += 1;
        if self.window.len() == 5 {
            let slab = self.pushed - 3;
            self.process_slab(slab);
        }
        Ok(())
    }

    /// Square roots of the accumulated integrals.
    pub fn finish(self) -> Result<StreamingSummary> {
        if !self.is_complete() {
            return Err(Error::StencilOutOfRange {
                interval: self.acc.n_slabs(),
                needed: self.states_needed() - 1,
                last: self.pushed.saturating_sub(1),
            });
        }
        let root = |v: f64| v.max(0.0).sqrt();
        let s = self.sums.map(root);
        let errors = match self.exact {
            ExactData::None => None,
            _ => Some(ErrorMeasures {
                e_nodes: s[0],
                e_u: s[1],
                e_w: s[2],
                ex_nodes: s[3],
                ex_u: s[4],
                ex_w: s[5],
                et_nodes: s[6],
                et_u: s[7],
                et_w: s[8],
            }),
        };
        Ok(StreamingSummary {
            errors,
            r: root(self.r_sq),
            m: root(self.m_sq) / self.acc.rho(),
            eta_f: root(self.eta_sq),
        })
    }

    fn process_slab(&mut self, n: usize) {
        self.build_forms(n);
        self.node_sum(n);
        if n >= self.acc.n_slabs() {
            return;
        }
        let tau = self.acc.tau();
        let nodes: Vec<(f64, f64, f64)> = self.acc.slab_nodes(n).collect();
        for (theta, t, weight) in nodes {
            let th2 = theta * theta;
            let th3 = th2 * theta;
            let t2 = tau * tau;
            let pu = [1.0, theta, 0.5 * th2, 0.0, 0.0];
            let put = [0.0, 1.0, theta, 0.0, 0.0];
            let pw = [
                1.0,
                theta,
                t2 / 12.0 + 0.5 * th2,
                t2 * tau / 24.0 - t2 * theta / 12.0 + th3 / 6.0,
                tau * th3 / 12.0 + th2 * th2 / 24.0,
            ];
            let pwt = [0.0, 1.0, theta, -t2 / 12.0 + 0.5 * th2, 0.25 * tau * th2 + th3 / 6.0];
            let pwtt = [0.0, 0.0, 1.0, theta, 0.5 * tau * theta + 0.5 * th2];
            let pd = [0.0, 0.0, 0.0, t2 / 12.0 - 0.5 * th2, -0.25 * tau * th2 - th3 / 6.0];

            let f = &self.forms;
            let w = quadratic_weights(theta / tau);
            let rphi = w[0] * f.pulse[0] + w[1] * f.pulse[1] + w[2] * f.pulse[2];

            let tail = [pwtt[2], pwtt[3], pwtt[4]];
            let mut anti = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    anti += tail[i] * tail[j] * f.anti[i][j];
                }
            }
            let r_sq = form(&pw, &f.stiff, &pw)
                + rphi * rphi * self.x_sq
                + anti
                + 2.0 * rphi * lin(&pw, &f.scalars[DX])
                + 2.0 * form(&pw, &f.mass, &pwtt)
                - 2.0 * rphi * lin(&pwtt, &f.scalars[SX]);
            self.r_sq += weight * r_sq;
            self.m_sq += weight * form(&pd, &f.stiff, &pd);
            let osc = (self.source.pulse)(t) - rphi;
            self.eta_sq += weight * osc * osc * self.g_sq;

            if let Some(c) = self.exact_pairings(t) {
                let f = &self.forms;
                let sums = &mut self.sums;
                sums[1] += weight * c.error(&pu, &f.mass, 0);
                sums[2] += weight * c.error(&pw, &f.mass, 0);
                sums[4] += weight * c.error(&pu, &f.stiff, 2);
                sums[5] += weight * c.error(&pw, &f.stiff, 2);
                sums[7] += weight * c.error(&put, &f.mass, 1);
                sums[8] += weight * c.error(&pwt, &f.mass, 1);
            }
        }
    }

    fn node_sum(&mut self, n: usize) {
        let t = n as f64 * self.acc.tau();
        let weight = self.acc.tau() * self.acc.weight(t);
        if let Some(c) = self.exact_pairings(t) {
            let f = &self.forms;
            self.sums[0] += weight * c.error(&[1.0, 0.0, 0.0, 0.0, 0.0], &f.mass, 0);
            self.sums[3] += weight * c.error(&[1.0, 0.0, 0.0, 0.0, 0.0], &f.stiff, 2);
            self.sums[6] += weight * c.error(&[0.0, 2.0, 0.0, 0.0, 0.0], &f.mass, 1);
        }
    }

    /// Squared norms of `u, u_t, u_x` at `t` and their pairings with the
    /// `e` basis (values for `u`, `u_t`; gradients for `u_x`).
    fn exact_pairings(&mut self, t: f64) -> Option<ExactPairings> {
        match &mut self.exact {
            ExactData::None => None,
            ExactData::Separable { time, s_sq, sx_sq } => {
                let (c, dc) = time(t);
                let bs = self.forms.scalars[BS];
                let bsx = self.forms.scalars[BSX];
                Some(ExactPairings {
                    norms: [c * c * *s_sq, dc * dc * *s_sq, c * c * *sx_sq],
                    cross: [bs.map(|v| c * v), bs.map(|v| dc * v), bsx.map(|v| c * v)],
                })
            }
            ExactData::Pointwise { field, u, ut, ux, proj } => {
                for (i, &x) in self.quad.positions().iter().enumerate() {
                    let s = field.sample(t, x);
                    u[i] = s.u;
                    ut[i] = s.u_t;
                    ux[i] = s.u_x;
                }
                self.quad.project_values_into(u, &mut proj[0]);
                self.quad.project_values_into(ut, &mut proj[1]);
                self.quad.project_derivatives_into(ux, &mut proj[2]);
                let mut cross = [[0.0; 5]; 3];
                for (c, p) in cross.iter_mut().zip(proj.iter()) {
                    for (j, e) in self.e_u.iter().enumerate() {
                        c[j] = dot(p, e);
                    }
                }
                Some(ExactPairings {
                    norms: [self.quad.dot(u, u), self.quad.dot(ut, ut), self.quad.dot(ux, ux)],
                    cross,
                })
            }
        }
    }

    fn build_forms(&mut self, n: usize) {
        let tau = self.acc.tau();
        let w: Vec<&StateData> = self.window.iter().collect();
        let scale = [1.0, 0.5 / tau, 1.0 / (tau * tau), 1.0 / tau.powi(3), 1.0 / tau.powi(4)];
        let combine = |pick: &dyn Fn(&StateData) -> &[f64], out: &mut [Vec<f64>; 5]| {
            let [a, b, c, d, e] = [pick(w[0]), pick(w[1]), pick(w[2]), pick(w[3]), pick(w[4])];
            for i in 0..c.len() {
                out[0][i] = c[i];
                out[1][i] = (d[i] - b[i]) * scale[1];
                out[2][i] = (d[i] - 2.0 * c[i] + b[i]) * scale[2];
                out[3][i] = (d[i] - 3.0 * c[i] + 3.0 * b[i] - a[i]) * scale[3];
                out[4][i] = (e[i] - 4.0 * d[i] + 6.0 * c[i] - 4.0 * b[i] + a[i]) * scale[4];
            }
        };
        combine(&|s| &s.u, &mut self.e_u);
        combine(&|s| &s.mu, &mut self.e_mu);
        combine(&|s| &s.ku, &mut self.e_ku);
        let [a, b, c, d, e] = [&w[0].su, &w[1].su, &w[2].su, &w[3].su, &w[4].su];
        for i in 0..c.len() {
            self.e_su[0][i] = (d[i] - 2.0 * c[i] + b[i]) * scale[2];
            self.e_su[1][i] = (d[i] - 3.0 * c[i] + 3.0 * b[i] - a[i]) * scale[3];
            self.e_su[2][i] = (e[i] - 4.0 * d[i] + 6.0 * c[i] - 4.0 * b[i] + a[i]) * scale[4];
        }
        let f = &mut self.forms;
        for i in 0..5 {
            for j in i..5 {
                f.mass[i][j] = dot(&self.e_u[i], &self.e_mu[j]);
                f.mass[j][i] = f.mass[i][j];
                f.stiff[i][j] = dot(&self.e_u[i], &self.e_ku[j]);
                f.stiff[j][i] = f.stiff[i][j];
            }
        }
        for i in 0..3 {
            for j in i..3 {
                f.anti[i][j] = self.low.dot(&self.e_su[i], &self.e_su[j]);
                f.anti[j][i] = f.anti[i][j];
            }
        }
        for (slot, out) in f.scalars.iter_mut().enumerate() {
            let [a, b, c, d, e] = [0, 1, 2, 3, 4].map(|j| w[j].scalars[slot]);
            *out = [
                c,
                (d - b) * scale[1],
                (d - 2.0 * c + b) * scale[2],
                (d - 3.0 * c + 3.0 * b - a) * scale[3],
                (e - 4.0 * d + 6.0 * c - 4.0 * b + a) * scale[4],
            ];
        }
        let pulse = self.source.pulse;
        f.pulse = [-1isize, 0, 1].map(|j| {
            let m = n as isize + j;
            if m <= 0 {
                0.0
            } else {
                pulse(m as f64 * tau)
            }
        });
    }
}

struct ExactPairings {
    /// `‖u‖², ‖u_t‖², ‖u_x‖²`.
    norms: [f64; 3],
    /// `(u, eⱼ)`, `(u_t, eⱼ)`, `(u_x, ∂ₓeⱼ)`.
    cross: [[f64; 5]; 3],
}

impl ExactPairings {
    /// `‖v − Σ pⱼ eⱼ‖²` for the exact component `which`.
    fn error(&self, p: &[f64; 5], gram: &[[f64; 5]; 5], which: usize) -> f64 {
        self.norms[which] - 2.0 * lin(p, &self.cross[which]) + form(p, gram, p)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lin(p: &[f64], v: &[f64; 5]) -> f64 {
    p.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn form(p: &[f64; 5], g: &[[f64; 5]; 5], q: &[f64; 5]) -> f64 {
    let mut s = 0.0;
    for i in 0..5 {
        if p[i] == 0.0 {
            continue;
        }
        for j in 0..5 {
            s += p[i] * g[i][j] * q[j];
        }
    }
    s
}
