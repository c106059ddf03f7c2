//! Uniform meshes, continuous Lagrange spaces with homogeneous Dirichlet
//! conditions, quadrature, banded assembly and SPD solves.

use crate::error::{Error, Result};

/// Uniform partition of `[left, right]` into `n_cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh1D {
    left: f64,
    right: f64,
    n_cells: usize,
}

impl UniformMesh1D {
    pub fn new(left: f64, right: f64, n_cells: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || right <= left {
            return Err(Error::InvalidMesh(format!(
                "need finite left < right, got [{left}, {right}]"
            )));
        }
        if n_cells == 0 {
            return Err(Error::InvalidMesh("at least one cell is required".into()));
        }
        Ok(Self { left, right, n_cells })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn h(&self) -> f64 {
        (self.right - self.left) / self.n_cells as f64
    }

    pub fn cell_left(&self, cell: usize) -> f64 {
        self.left + cell as f64 * self.h()
    }

    /// Cell index and reference coordinate of `x`. Interface points belong
    /// to the cell on their left.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let slack = 1e-12 * self.length();
        if !(x >= self.left - slack && x <= self.right + slack) {
            return Err(Error::OutsideDomain {
                x,
                left: self.left,
                right: self.right,
            });
        }
        let s = ((x - self.left) / self.h()).clamp(0.0, self.n_cells as f64);
        let cell = (s.ceil() as isize - 1).clamp(0, self.n_cells as isize - 1) as usize;
        Ok((cell, (s - cell as f64).clamp(0.0, 1.0)))
    }
}

/// Gauss–Legendre rule on the reference interval `[0, 1]`; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// `q`-point Gauss–Legendre rule, exact for polynomials of degree 2q − 1.
    pub fn gauss_legendre(q: usize) -> Self {
        assert!(q > 0, "a quadrature rule needs at least one point");
        let mut points = Vec::with_capacity(q);
        let mut weights = Vec::with_capacity(q);
        for i in 0..q {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(q, x);
            if d.is_finite() {
                dp = d;
            }
            points.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { points, weights }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// ∫ₐᵇ f.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(a + p * len))
            .sum::<f64>()
            * len
    }
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for n in 2..=q {
        let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Largest supported number of local basis functions (degree 3).
pub const MAX_LOCAL: usize = 4;

/// Continuous piecewise Lagrange space of degree 1, 2 or 3 with equispaced
/// nodes and the two boundary degrees of freedom removed.
///
/// Global node `g = cell·k + l` sits at `left + g·h/k`; interior dof `g − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeSpace {
    mesh: UniformMesh1D,
    degree: usize,
}

impl LagrangeSpace {
    pub fn new(mesh: UniformMesh1D, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        if degree * mesh.n_cells() < 2 {
            return Err(Error::InvalidMesh(
                "the space has no interior degrees of freedom".into(),
            ));
        }
        Ok(Self { mesh, degree })
    }

    pub fn mesh(&self) -> &UniformMesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.degree * self.mesh.n_cells() - 1
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    /// Coordinate of interior dof `i`.
    pub fn dof_coordinate(&self, i: usize) -> f64 {
        self.mesh.left() + (i + 1) as f64 * self.h() / self.degree as f64
    }

    pub fn dof_coordinates(&self) -> Vec<f64> {
        (0..self.n_dofs()).map(|i| self.dof_coordinate(i)).collect()
    }

    /// Interior dof of local node `local` in `cell`, `None` on the boundary.
    #[inline]
    pub fn cell_dof(&self, cell: usize, local: usize) -> Option<usize> {
        let g = cell * self.degree + local;
        if g == 0 || g == self.degree * self.mesh.n_cells() {
            None
        } else {
            Some(g - 1)
        }
    }

    /// Coefficient of local node `local` in `cell`; boundary nodes read as 0.
    #[inline]
    pub fn local_coeff(&self, coeffs: &[f64], cell: usize, local: usize) -> f64 {
        self.cell_dof(cell, local).map_or(0.0, |i| coeffs[i])
    }

    /// Reference basis values at `xi ∈ [0, 1]`.
    pub fn shape_values(&self, xi: f64) -> [f64; MAX_LOCAL] {
        let k = self.degree;
        let mut out = [0.0; MAX_LOCAL];
        for (l, o) in out.iter_mut().enumerate().take(k + 1) {
            let mut v = 1.0;
            for m in 0..=k {
                if m != l {
                    v *= (xi - m as f64 / k as f64) / ((l as f64 - m as f64) / k as f64);
                }
            }
            *o = v;
        }
        out
    }

    /// Reference basis derivatives d/dξ at `xi`.
    pub fn shape_derivatives(&self, xi: f64) -> [f64; MAX_LOCAL] {
        let k = self.degree;
        let mut out = [0.0; MAX_LOCAL];
        for (l, o) in out.iter_mut().enumerate().take(k + 1) {
            let denom: f64 = (0..=k)
                .filter(|&m| m != l)
                .map(|m| (l as f64 - m as f64) / k as f64)
                .product();
            let mut sum = 0.0;
            for skip in 0..=k {
                if skip == l {
                    continue;
                }
                let mut p = 1.0;
                for m in 0..=k {
                    if m != l && m != skip {
                        p *= xi - m as f64 / k as f64;
                    }
                }
                sum += p;
            }
            *o = sum / denom;
        }
        out
    }

    /// ∫₀^ξ of each reference basis function.
    pub fn shape_antiderivatives(&self, xi: f64) -> [f64; MAX_LOCAL] {
        let rule = QuadratureRule::gauss_legendre(self.degree + 1);
        let mut out = [0.0; MAX_LOCAL];
        for (&p, &w) in rule.points().iter().zip(rule.weights()) {
            let v = self.shape_values(p * xi);
            for l in 0..=self.degree {
                out[l] += w * xi * v[l];
            }
        }
        out
    }

    /// Value (`deriv = 0`) or x-derivative (`deriv = 1`) of the FE function
    /// at `x`. Interfaces use the left cell.
    pub fn evaluate(&self, coeffs: &[f64], x: f64, deriv: usize) -> Result<f64> {
        self.check_len(coeffs)?;
        let (cell, xi) = self.mesh.locate(x)?;
        let shape = match deriv {
            0 => self.shape_values(xi),
            1 => self.shape_derivatives(xi),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "derivative order {deriv} is not supported"
                )))
            }
        };
        let scale = if deriv == 1 { 1.0 / self.h() } else { 1.0 };
        Ok((0..=self.degree)
            .map(|l| self.local_coeff(coeffs, cell, l) * shape[l])
            .sum::<f64>()
            * scale)
    }

    /// Nodal interpolant of `f` at the interior dofs.
    pub fn interpolate(&self, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
        (0..self.n_dofs()).map(|i| f(self.dof_coordinate(i))).collect()
    }

    /// Load vector `(f, φᵢ)` by `points_per_cell`-point Gauss quadrature.
    pub fn load_vector(&self, points_per_cell: usize, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
        let rule = QuadratureRule::gauss_legendre(points_per_cell);
        let shapes: Vec<_> = rule.points().iter().map(|&p| self.shape_values(p)).collect();
        let h = self.h();
        let mut out = vec![0.0; self.n_dofs()];
        for cell in 0..self.mesh.n_cells() {
            let x0 = self.mesh.cell_left(cell);
            for (q, (&p, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
                let fw = f(x0 + p * h) * w * h;
                for l in 0..=self.degree {
                    if let Some(i) = self.cell_dof(cell, l) {
                        out[i] += fw * shapes[q][l];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dofs(),
                got: coeffs.len(),
            });
        }
        Ok(())
    }
}

/// Symmetric banded matrix storing the diagonal and `half_band` subdiagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricOperator {
    dim: usize,
    half_band: usize,
    // Row-major: entry (i, i − d) at i·(half_band + 1) + d.
    band: Vec<f64>,
}

impl BandedSymmetricOperator {
    pub fn zeros(dim: usize, half_band: usize) -> Self {
        Self {
            dim,
            half_band,
            band: vec![0.0; dim * (half_band + 1)],
        }
    }

    pub fn identity_scaled(dim: usize, scale: f64) -> Self {
        let mut a = Self::zeros(dim, 0);
        for i in 0..dim {
            a.band[i] = scale;
        }
        a
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_band
    }

    /// Entries per row, counting both triangles.
    pub fn bandwidth(&self) -> usize {
        2 * self.half_band + 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.half_band {
            0.0
        } else {
            self.band[i * (self.half_band + 1) + d]
        }
    }

    /// Adds `v` to entries (i, j) and (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.half_band, "entry ({i}, {j}) outside the band");
        self.band[i * (self.half_band + 1) + d] += v;
    }

    /// `out = A x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        let b = self.half_band;
        let w = b + 1;
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..self.dim {
            let row = &self.band[i * w..(i + 1) * w];
            let mut acc = row[0] * x[i];
            let xi = x[i];
            for d in 1..=b.min(i) {
                let a = row[d];
                acc += a * x[i - d];
                out[i - d] += a * xi;
            }
            out[i] += acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(x, &mut out);
        out
    }

    /// `vᵀ A w`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.matvec(w).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let b = self.half_band;
        let w = b + 1;
        let mut l = vec![0.0; self.band.len()];
        for i in 0..self.dim {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let mut s = self.band[i * w + (i - j)];
                for k in j0.max(j.saturating_sub(b))..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotSpd { row: i, pivot: s });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandedCholesky {
            dim: self.dim,
            half_band: b,
            l,
        })
    }
}

/// Cached banded Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    dim: usize,
    half_band: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let b = self.half_band;
        let w = b + 1;
        for i in 0..self.dim {
            let row = &self.l[i * w..(i + 1) * w];
            let mut s = x[i];
            for d in 1..=b.min(i) {
                s -= row[d] * x[i - d];
            }
            x[i] = s / row[0];
        }
        for i in (0..self.dim).rev() {
            let xi = x[i] / self.l[i * w];
            x[i] = xi;
            let row = &self.l[i * w..(i + 1) * w];
            for d in 1..=b.min(i) {
                x[i - d] -= row[d] * xi;
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Number of eigenvalues of the pencil `(K, M)` strictly below `lambda`, from
/// the inertia of `K − λM` (Sylvester's law) via banded LDLᵀ.
pub fn count_eigenvalues_below(k: &BandedSymmetricOperator, m: &BandedSymmetricOperator, lambda: f64) -> usize {
    let n = k.dim;
    let b = k.half_band.max(m.half_band);
    let w = b + 1;
    let mut l = vec![0.0; n * w];
    let mut d = vec![0.0; n];
    let mut negatives = 0;
    for i in 0..n {
        let j0 = i.saturating_sub(b);
        for j in j0..i {
            let mut s = k.get(i, j) - lambda * m.get(i, j);
            for q in j0.max(j.saturating_sub(b))..j {
                s -= l[i * w + (i - q)] * d[q] * l[j * w + (j - q)];
            }
            l[i * w + (i - j)] = s / d[j];
        }
        let mut s = k.get(i, i) - lambda * m.get(i, i);
        for q in j0..i {
            let lq = l[i * w + (i - q)];
            s -= lq * lq * d[q];
        }
        if s == 0.0 {
            s = -f64::EPSILON * (k.get(i, i).abs() + lambda.abs() * m.get(i, i).abs());
        }
        if s < 0.0 {
            negatives += 1;
        }
        d[i] = s;
    }
    negatives
}

fn element_matrices(space: &LagrangeSpace) -> ([[f64; MAX_LOCAL]; MAX_LOCAL], [[f64; MAX_LOCAL]; MAX_LOCAL]) {
    let k = space.degree();
    let h = space.h();
    let rule = QuadratureRule::gauss_legendre(k + 1);
    let mut me = [[0.0; MAX_LOCAL]; MAX_LOCAL];
    let mut ke = [[0.0; MAX_LOCAL]; MAX_LOCAL];
    for (&p, &w) in rule.points().iter().zip(rule.weights()) {
        let v = space.shape_values(p);
        let d = space.shape_derivatives(p);
        for a in 0..=k {
            for b in 0..=k {
                me[a][b] += w * h * v[a] * v[b];
                ke[a][b] += w / h * d[a] * d[b];
            }
        }
    }
    (me, ke)
}

fn assemble(space: &LagrangeSpace, local: &[[f64; MAX_LOCAL]; MAX_LOCAL]) -> BandedSymmetricOperator {
    let k = space.degree();
    let mut a = BandedSymmetricOperator::zeros(space.n_dofs(), k);
    for cell in 0..space.mesh().n_cells() {
        for p in 0..=k {
            let Some(i) = space.cell_dof(cell, p) else { continue };
            for q in 0..=p {
                let Some(j) = space.cell_dof(cell, q) else { continue };
                a.add(i, j, local[p][q]);
            }
        }
    }
    a
}

/// Mass matrix `M[i, j] = ∫ φᵢ φⱼ`.
pub fn assemble_mass(space: &LagrangeSpace) -> BandedSymmetricOperator {
    assemble(space, &element_matrices(space).0)
}

/// Stiffness matrix `K[i, j] = ∫ φᵢ′ φⱼ′`.
pub fn assemble_stiffness(space: &LagrangeSpace) -> BandedSymmetricOperator {
    assemble(space, &element_matrices(space).1)
}

/// Solves `A x = b` by banded Cholesky.
pub fn solve_spd(a: &BandedSymmetricOperator, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            got: b.len(),
        });
    }
    Ok(a.cholesky()?.solve(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialNorm {
    L2,
    H1Semi,
}

/// `‖v_h‖` or `‖∂ₓv_h‖` by a Gauss rule exact for degree 2k.
pub fn spatial_norm(space: &LagrangeSpace, coeffs: &[f64], which: SpatialNorm) -> Result<f64> {
    space.check_len(coeffs)?;
    let k = space.degree();
    let h = space.h();
    let rule = QuadratureRule::gauss_legendre(k + 1);
    let tables: Vec<_> = rule
        .points()
        .iter()
        .map(|&p| match which {
            SpatialNorm::L2 => space.shape_values(p),
            SpatialNorm::H1Semi => space.shape_derivatives(p),
        })
        .collect();
    let scale = match which {
        SpatialNorm::L2 => h,
        SpatialNorm::H1Semi => 1.0 / h,
    };
    let mut sum = 0.0;
    for cell in 0..space.mesh().n_cells() {
        let local: Vec<f64> = (0..=k).map(|l| space.local_coeff(coeffs, cell, l)).collect();
        for (q, &w) in rule.weights().iter().enumerate() {
            let v: f64 = (0..=k).map(|l| local[l] * tables[q][l]).sum();
            sum += w * v * v;
        }
    }
    Ok((sum * scale).sqrt())
}

/// A space together with its mass and stiffness matrices and the cached
/// mass factorization.
#[derive(Debug, Clone)]
pub struct FemOperators {
    space: LagrangeSpace,
    mass: BandedSymmetricOperator,
    stiffness: BandedSymmetricOperator,
    mass_factor: BandedCholesky,
}

impl FemOperators {
    pub fn new(space: LagrangeSpace) -> Result<Self> {
        let mass = assemble_mass(&space);
        let stiffness = assemble_stiffness(&space);
        let mass_factor = mass.cholesky()?;
        Ok(Self {
            space,
            mass,
            stiffness,
            mass_factor,
        })
    }

    pub fn space(&self) -> &LagrangeSpace {
        &self.space
    }

    pub fn mass(&self) -> &BandedSymmetricOperator {
        &self.mass
    }

    pub fn stiffness(&self) -> &BandedSymmetricOperator {
        &self.stiffness
    }

    pub fn mass_factor(&self) -> &BandedCholesky {
        &self.mass_factor
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }
}

/// Composite Gauss rule over the whole mesh with basis tables, used for
/// integrals whose integrands mix FE functions and analytic data.
#[derive(Debug, Clone)]
pub struct CompositeQuadrature {
    space: LagrangeSpace,
    per_cell: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
    ref_points: Vec<f64>,
    values: Vec<[f64; MAX_LOCAL]>,
    derivatives: Vec<[f64; MAX_LOCAL]>,
    antiderivatives: Vec<[f64; MAX_LOCAL]>,
    cell_integrals: [f64; MAX_LOCAL],
}

impl CompositeQuadrature {
    pub fn new(space: &LagrangeSpace, points_per_cell: usize) -> Self {
        let rule = QuadratureRule::gauss_legendre(points_per_cell);
        let h = space.h();
        let mut positions = Vec::with_capacity(points_per_cell * space.mesh().n_cells());
        let mut weights = Vec::with_capacity(positions.capacity());
        for cell in 0..space.mesh().n_cells() {
            let x0 = space.mesh().cell_left(cell);
            for (&p, &w) in rule.points().iter().zip(rule.weights()) {
                positions.push(x0 + p * h);
                weights.push(w * h);
            }
        }
        let derivatives = rule
            .points()
            .iter()
            .map(|&p| {
                let mut d = space.shape_derivatives(p);
                d.iter_mut().for_each(|v| *v /= h);
                d
            })
            .collect();
        Self {
            space: *space,
            per_cell: points_per_cell,
            positions,
            weights,
            ref_points: rule.points().to_vec(),
            values: rule.points().iter().map(|&p| space.shape_values(p)).collect(),
            derivatives,
            antiderivatives: rule.points().iter().map(|&p| space.shape_antiderivatives(p)).collect(),
            cell_integrals: space.shape_antiderivatives(1.0),
        }
    }

    pub fn space(&self) -> &LagrangeSpace {
        &self.space
    }

    pub fn points_per_cell(&self) -> usize {
        self.per_cell
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reference_points(&self) -> &[f64] {
        &self.ref_points
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// ∫ g over the domain from samples at the quadrature points.
    pub fn integrate_samples(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }

    /// Weighted inner product of two sample vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((x, y), w) in a.iter().zip(b).zip(&self.weights) {
            acc += x * y * w;
        }
        acc
    }

    /// FE values at the quadrature points.
    pub fn values_into(&self, coeffs: &[f64], out: &mut [f64]) {
        self.tabulate(coeffs, &self.values, out);
    }

    /// FE x-derivatives at the quadrature points.
    pub fn derivatives_into(&self, coeffs: &[f64], out: &mut [f64]) {
        self.tabulate(coeffs, &self.derivatives, out);
    }

    /// Zero-mean antiderivative `x ↦ ∫_left^x v − mean` at the quadrature
    /// points, exact for FE functions.
    pub fn centered_antiderivative_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let k = self.space.degree();
        let h = self.space.h();
        let q = self.per_cell;
        let mut base = 0.0;
        let mut local = [0.0; MAX_LOCAL];
        for cell in 0..self.space.mesh().n_cells() {
            for (l, c) in local.iter_mut().enumerate().take(k + 1) {
                *c = self.space.local_coeff(coeffs, cell, l);
            }
            for j in 0..q {
                let a = &self.antiderivatives[j];
                let mut s = 0.0;
                for l in 0..=k {
                    s += local[l] * a[l];
                }
                out[cell * q + j] = base + h * s;
            }
            let mut s = 0.0;
            for l in 0..=k {
                s += local[l] * self.cell_integrals[l];
            }
            base += h * s;
        }
        let mean = self.integrate_samples(out) / self.space.mesh().length();
        out.iter_mut().for_each(|v| *v -= mean);
    }

    /// `(g, φᵢ)` for every basis function from samples of `g`.
    pub fn project_values_into(&self, samples: &[f64], out: &mut [f64]) {
        self.project(samples, &self.values, out);
    }

    /// `(g, φᵢ′)` for every basis function from samples of `g`.
    pub fn project_derivatives_into(&self, samples: &[f64], out: &mut [f64]) {
        self.project(samples, &self.derivatives, out);
    }

    fn project(&self, samples: &[f64], table: &[[f64; MAX_LOCAL]], out: &mut [f64]) {
        let k = self.space.degree();
        let q = self.per_cell;
        out.iter_mut().for_each(|v| *v = 0.0);
        for cell in 0..self.space.mesh().n_cells() {
            let mut local = [0.0; MAX_LOCAL];
            let range = cell * q..(cell + 1) * q;
            for ((s, w), t) in samples[range.clone()].iter().zip(&self.weights[range]).zip(table) {
                for l in 0..=k {
                    local[l] += s * w * t[l];
                }
            }
            for (l, v) in local.iter().enumerate().take(k + 1) {
                if let Some(i) = self.space.cell_dof(cell, l) {
                    out[i] += v;
                }
            }
        }
    }

    fn tabulate(&self, coeffs: &[f64], table: &[[f64; MAX_LOCAL]], out: &mut [f64]) {
        let k = self.space.degree();
        let q = self.per_cell;
        let n_cells = self.space.mesh().n_cells();
        let mut local = [0.0; MAX_LOCAL];
        for cell in 0..n_cells {
            for (l, c) in local.iter_mut().enumerate().take(k + 1) {
                *c = self.space.local_coeff(coeffs, cell, l);
            }
            let chunk = &mut out[cell * q..(cell + 1) * q];
            for (o, t) in chunk.iter_mut().zip(table) {
                let mut s = 0.0;
                for l in 0..=k {
                    s += local[l] * t[l];
                }
                *o = s;
            }
        }
    }
}
