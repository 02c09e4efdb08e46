//! Chebyshev–Gauss–Lobatto collocation in ρ, Fourier in θ, and dense solves.
//!
//! Radial nodes ascend from ρ_Γ (index 0) to ρ = 1 (index N). One row per
//! angular mode is replaced by a Dirichlet condition: at ρ = 1 for incoming
//! solves, at ρ_Γ for outgoing ones. Every other row, including the
//! degenerate one at ρ = 1, collocates the equation.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::nic::NicCoefficients;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

const REFINEMENT_STEPS: usize = 3;

/// A conservative bound for callers of [`solve_with_limit`]. Barrier-dominated
/// incoming modes legitimately exceed it, so [`solve`] applies no bound.
pub const CONDITION_LIMIT: f64 = 1e15;
/// Default cap on the memory a coupled solve may allocate.
pub const DEFAULT_MEMORY_CAP: usize = 4 << 30;
/// Largest barrier transfer |H_m(kr_Γ)| a mode may have and still take part
/// in a θ-coupled solve.
pub const BARRIER_GAIN_LIMIT: f64 = 1e11;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub d1: Mat<f64>,
    pub d2: Mat<f64>,
    weights: Vec<f64>,
}

pub fn build_radial_grid(rho_min: f64, n: usize) -> Result<RadialGrid> {
    if n < 4 {
        return Err(Error::config(format!("radial degree must be at least 4, got {n}")));
    }
    if !(0.0..1.0).contains(&rho_min) {
        return Err(Error::config(format!("inner radius ρ = {rho_min} must lie in [0, 1)")));
    }
    let nf = n as f64;
    // x_j = −cos(πj/N), ascending, in the symmetric sine form.
    let x: Vec<f64> = (0..=n).map(|j| (PI * (2.0 * j as f64 - nf) / (2.0 * nf)).sin()).collect();
    let diff = |i: usize, j: usize| 2.0 * (PI * (i + j) as f64 / (2.0 * nf)).sin() * (PI * (i as f64 - j as f64) / (2.0 * nf)).sin();
    let w: Vec<f64> = (0..=n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let scale = 2.0 / (1.0 - rho_min);
    let mut d1 = Mat::<f64>::zeros(n + 1, n + 1);
    let mut d2 = Mat::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut diag = 0.0;
        for j in 0..=n {
            if i != j {
                let v = w[j] / w[i] / diff(i, j);
                d1[(i, j)] = v;
                diag -= v;
            }
        }
        d1[(i, i)] = diag;
    }
    for i in 0..=n {
        let mut diag = 0.0;
        for j in 0..=n {
            if i != j {
                let v = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / diff(i, j));
                d2[(i, j)] = v;
                diag -= v;
            }
        }
        d2[(i, i)] = diag;
    }
    for i in 0..=n {
        for j in 0..=n {
            d1[(i, j)] *= scale;
            d2[(i, j)] *= scale * scale;
        }
    }
    let mut nodes: Vec<f64> = x.iter().map(|&xi| rho_min + (1.0 - rho_min) * 0.5 * (xi + 1.0)).collect();
    nodes[0] = rho_min;
    nodes[n] = 1.0;
    Ok(RadialGrid { rho_min, rho_max: 1.0, n, nodes, d1, d2, weights: w })
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Barycentric interpolation of nodal values at ρ.
    pub fn interpolate(&self, values: &[Complex64], rho: f64) -> Complex64 {
        let mut num = ZERO;
        let mut den = 0.0;
        for (j, (&xj, &v)) in self.nodes.iter().zip(values).enumerate() {
            let dx = rho - xj;
            if dx == 0.0 {
                return v;
            }
            let c = self.weights[j] / dx;
            num += v * c;
            den += c;
        }
        num / den
    }

    /// Derivative of the interpolant at the nodes, in barycentric form over
    /// the stored nodes. Agrees with `d1` to rounding and reproduces sampled
    /// linear functions without the cancellation of a row sum.
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let w = &self.weights;
        (0..=self.n)
            .map(|i| {
                (0..=self.n)
                    .filter(|&j| j != i)
                    .map(|j| (values[j] - values[i]) * (w[j] / w[i] / (self.nodes[i] - self.nodes[j])))
                    .sum()
            })
            .collect()
    }
}

/// Equispaced angles on [0, 2π) with modes m ∈ [−N_θ/2, N_θ/2).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    n_theta: usize,
    thetas: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n_theta: usize) -> Result<Self> {
        if n_theta < 2 || n_theta % 2 != 0 {
            return Err(Error::config(format!("angular node count must be even and at least 2, got {n_theta}")));
        }
        let thetas = (0..n_theta).map(|j| 2.0 * PI * j as f64 / n_theta as f64).collect();
        Ok(AngularGrid { n_theta, thetas })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Mode numbers in storage order.
    pub fn modes(&self) -> Vec<i32> {
        let h = (self.n_theta / 2) as i32;
        (-h..h).collect()
    }

    pub fn position(&self, m: i32) -> Option<usize> {
        let h = (self.n_theta / 2) as i32;
        (-h..h).contains(&m).then(|| (m + h) as usize)
    }

    fn fft_index(&self, pos: usize) -> usize {
        (pos + self.n_theta / 2) % self.n_theta
    }

    /// û_m = (1/N) Σ u_j e^{−imθ_j}, in storage order.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_theta;
        let mut buf = values.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        (0..n).map(|p| buf[self.fft_index(p)] / n as f64).collect()
    }

    /// u_j = Σ û_m e^{imθ_j}.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_theta;
        let mut buf = vec![ZERO; n];
        for (p, &c) in coeffs.iter().enumerate() {
            buf[self.fft_index(p)] = c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }

    pub fn second_derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut c = self.forward(values);
        for (ci, m) in c.iter_mut().zip(self.modes()) {
            *ci *= -((m * m) as f64);
        }
        self.inverse(&c)
    }

    /// Trapezoidal L²(0, 2π) norm of grid values.
    pub fn l2_norm(&self, values: &[Complex64]) -> f64 {
        (2.0 * PI / self.n_theta as f64 * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// Row replaced by the Dirichlet condition for a given solve direction.
pub fn boundary_row(direction: Direction, grid: &RadialGrid) -> usize {
    match direction {
        Direction::Incoming => grid.n,
        Direction::Outgoing => 0,
    }
}

/// Coefficients sampled on the radial nodes.
struct Sampled {
    g: Vec<f64>,
    first: Vec<Complex64>,
    ang: Vec<f64>,
}

fn sample(coeffs: &NicCoefficients, grid: &RadialGrid) -> Sampled {
    let g = grid.nodes.iter().map(|&r| coeffs.c2(r)).collect();
    let first = grid.nodes.iter().map(|&r| coeffs.c1(r) + coeffs.c2_prime(r)).collect();
    let ang = grid.nodes.iter().map(|&r| coeffs.c_ang(r)).collect();
    Sampled { g, first, ang }
}

#[derive(Debug, Clone)]
pub struct ModalSystem {
    pub matrix: Mat<Complex64>,
    pub rhs: Vec<Complex64>,
    pub bc_row_index: usize,
    pub mode: i32,
}

pub fn assemble_modal_system(coeffs: &NicCoefficients, m: i32, grid: &RadialGrid, boundary_value: Complex64) -> Result<ModalSystem> {
    if !coeffs.is_radial() {
        return Err(Error::config("modal systems need θ-independent coefficients"));
    }
    let s = sample(coeffs, grid);
    let c0: Vec<Complex64> = grid.nodes.iter().map(|&r| coeffs.c0(r, 0.0)).collect();
    let n = grid.len();
    let m2 = (m as f64) * (m as f64);
    let bc = boundary_row(coeffs.direction(), grid);
    let mut matrix = Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i != bc {
                matrix[(i, j)] = s.first[i] * grid.d1[(i, j)] + s.g[i] * grid.d2[(i, j)];
            }
        }
    }
    for i in 0..n {
        if i != bc {
            matrix[(i, i)] += c0[i] - m2 * s.ang[i];
        }
    }
    matrix[(bc, bc)] = Complex64::new(1.0, 0.0);
    let mut rhs = vec![ZERO; n];
    rhs[bc] = boundary_value;
    Ok(ModalSystem { matrix, rhs, bc_row_index: bc, mode: m })
}

/// The coupled system over the active modes, mode-major: unknown
/// `a·(N+1) + i` is active mode `active[a]` at radial node i.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub matrix: Mat<Complex64>,
    pub rhs: Vec<Complex64>,
    pub boundary_rows: Vec<usize>,
    /// Positions in the angular mode list that carry unknowns.
    pub active: Vec<usize>,
    pub n_radial: usize,
    pub n_theta: usize,
}

/// Bytes a coupled solve of this size allocates: the matrix and its factor.
pub fn coupled_memory_estimate(n_radial: usize, n_modes: usize) -> usize {
    let n = n_radial * n_modes;
    2 * n * n * std::mem::size_of::<Complex64>()
}

/// Largest |m| whose radial transfer across the centrifugal barrier,
/// |H_m(kr)|, stays within [`BARRIER_GAIN_LIMIT`]. Beyond it a mode's far
/// field is below rounding while its interior values are not, and through
/// the θ-coupling that rounding would leak into every other mode.
pub fn barrier_mode_cap(kr: f64) -> i32 {
    let mut m = 0;
    while m < i32::MAX - 1 {
        match crate::specfun::hankel1_scaled(m + 1, kr) {
            Ok(h) if h.norm() <= BARRIER_GAIN_LIMIT => m += 1,
            _ => break,
        }
    }
    m
}

pub fn assemble_2d_system(
    coeffs: &NicCoefficients,
    grid: &RadialGrid,
    angular: &AngularGrid,
    boundary_modal: &[Complex64],
    memory_cap: usize,
) -> Result<CoupledSystem> {
    let nr = grid.len();
    let nt = angular.n_theta();
    if boundary_modal.len() != nt {
        return Err(Error::config(format!("expected {nt} boundary coefficients, got {}", boundary_modal.len())));
    }
    let modes = angular.modes();
    let cap = barrier_mode_cap(coeffs.k * coeffs.comp.r_of_rho(grid.rho_min));
    let active: Vec<usize> = (0..nt).filter(|&p| modes[p].abs() <= cap).collect();
    let na = active.len();
    let need = coupled_memory_estimate(nr, na);
    if need > memory_cap {
        return Err(Error::Resource(format!(
            "coupled system of {} unknowns needs about {} MiB, cap is {} MiB",
            nr * na,
            need >> 20,
            memory_cap >> 20
        )));
    }
    let s = sample(coeffs, grid);
    // Fourier coefficients of c0(ρ_i, ·), aliased onto the grid.
    let fft = FftPlanner::new().plan_fft_forward(nt);
    let c0_hat: Vec<Vec<Complex64>> = grid
        .nodes
        .iter()
        .map(|&r| {
            let mut buf: Vec<Complex64> = angular.thetas().iter().map(|&t| coeffs.c0(r, t)).collect();
            fft.process(&mut buf);
            buf.iter().map(|v| v / nt as f64).collect()
        })
        .collect();
    let bc = boundary_row(coeffs.direction(), grid);
    let dim = nr * na;
    let mut matrix = Mat::<Complex64>::zeros(dim, dim);
    let mut rhs = vec![ZERO; dim];
    let mut boundary_rows = Vec::with_capacity(na);
    for (a, &p) in active.iter().enumerate() {
        let m = modes[p];
        let base = a * nr;
        let m2 = (m as f64) * (m as f64);
        for j in 0..nr {
            for i in 0..nr {
                if i != bc {
                    matrix[(base + i, base + j)] = s.first[i] * grid.d1[(i, j)] + s.g[i] * grid.d2[(i, j)];
                }
            }
        }
        for i in 0..nr {
            if i != bc {
                matrix[(base + i, base + i)] -= m2 * s.ang[i];
            }
        }
        for (b, &q) in active.iter().enumerate() {
            let shift = (m - modes[q]).rem_euclid(nt as i32) as usize;
            for i in 0..nr {
                if i != bc {
                    matrix[(base + i, b * nr + i)] += c0_hat[i][shift];
                }
            }
        }
        matrix[(base + bc, base + bc)] = Complex64::new(1.0, 0.0);
        rhs[base + bc] = boundary_modal[p];
        boundary_rows.push(base + bc);
    }
    Ok(CoupledSystem { matrix, rhs, boundary_rows, active, n_radial: nr, n_theta: nt })
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: Vec<Complex64>,
    /// 1-norm condition estimate.
    pub condition: f64,
    /// ‖Ax − b‖/‖b‖.
    pub residual: f64,
}

fn column(v: &[Complex64]) -> Mat<Complex64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn norm1(a: &Mat<Complex64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn matvec(a: &Mat<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

/// Dense LU solve with partial pivoting, a Hager–Higham estimate of
/// κ₁(A) and the relative residual. Fails on exact singularity only.
pub fn solve(matrix: &Mat<Complex64>, rhs: &[Complex64]) -> Result<LinearSolution> {
    solve_with_limit(matrix, rhs, f64::INFINITY)
}

/// As [`solve`], also failing when the condition estimate exceeds `limit`.
pub fn solve_with_limit(matrix: &Mat<Complex64>, rhs: &[Complex64], limit: f64) -> Result<LinearSolution> {
    let n = matrix.nrows();
    if matrix.ncols() != n || rhs.len() != n {
        return Err(Error::config("linear system must be square with a matching right-hand side"));
    }
    let lu = matrix.partial_piv_lu();
    let u = lu.U();
    let mut pivot_min = f64::INFINITY;
    let mut pivot_max: f64 = 0.0;
    for i in 0..n {
        let v = u[(i, i)].norm();
        pivot_min = pivot_min.min(v);
        pivot_max = pivot_max.max(v);
    }
    if !(pivot_min > 0.0) || !pivot_max.is_finite() {
        return Err(Error::Solve { reason: "matrix is singular (zero pivot)".into(), condition: f64::INFINITY });
    }
    let anorm = norm1(matrix);
    let inv_norm = {
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est: f64 = 0.0;
        for _ in 0..5 {
            let y = lu.solve(column(&x));
            let ynorm: f64 = (0..n).map(|i| y[(i, 0)].norm()).sum();
            est = est.max(ynorm);
            let xi: Vec<Complex64> = (0..n)
                .map(|i| {
                    let v = y[(i, 0)];
                    if v.norm() == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        v / v.norm()
                    }
                })
                .collect();
            let z = lu.solve_adjoint(column(&xi));
            let (jmax, zmax) = (0..n).map(|i| (i, z[(i, 0)].norm())).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[i]).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![ZERO; n];
            x[jmax] = Complex64::new(1.0, 0.0);
        }
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let y = lu.solve(column(&alt));
        let alt_est = 2.0 * (0..n).map(|i| y[(i, 0)].norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    };
    let condition = anorm * inv_norm;
    let sol = lu.solve(column(rhs));
    let mut x: Vec<Complex64> = (0..n).map(|i| sol[(i, 0)]).collect();
    // Fixed-precision refinement: restores componentwise accuracy when rows
    // differ in scale by many orders of magnitude.
    let bnorm = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut rnorm = f64::INFINITY;
    for _ in 0..REFINEMENT_STEPS {
        let ax = matvec(matrix, &x);
        let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let next = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(next < rnorm) || next == 0.0 {
            break;
        }
        rnorm = next;
        let dx = lu.solve(column(&r));
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dx[(i, 0)];
        }
    }
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Solve { reason: "solution is not finite".into(), condition });
    }
    if condition > limit {
        return Err(Error::Solve { reason: "matrix is numerically singular".into(), condition });
    }
    let ax = matvec(matrix, &x);
    let rnorm = ax.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
    log::debug!("dense solve n = {n}: condition ≈ {condition:.3e}, residual {residual:.3e}");
    Ok(LinearSolution { x, condition, residual })
}

/// Field on the annulus in modal form: `modal[p][i]` is the coefficient of
/// mode position p at radial node i.
#[derive(Debug, Clone)]
pub struct ModalField {
    pub modal: Vec<Vec<Complex64>>,
    pub condition: f64,
    pub residual: f64,
}

/// Solves the compactified equation with the given modal Dirichlet data,
/// mode by mode when the coefficients are θ-independent and as one
/// coupled system otherwise.
pub fn solve_field(
    coeffs: &NicCoefficients,
    grid: &RadialGrid,
    angular: &AngularGrid,
    boundary_modal: &[Complex64],
    memory_cap: usize,
) -> Result<ModalField> {
    let nr = grid.len();
    if coeffs.is_radial() {
        let mut modal = vec![vec![ZERO; nr]; angular.n_theta()];
        let mut condition: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for (p, m) in angular.modes().into_iter().enumerate() {
            if boundary_modal[p] == ZERO {
                continue;
            }
            let sys = assemble_modal_system(coeffs, m, grid, boundary_modal[p])?;
            let sol = solve(&sys.matrix, &sys.rhs)?;
            condition = condition.max(sol.condition);
            residual = residual.max(sol.residual);
            modal[p] = sol.x;
        }
        return Ok(ModalField { modal, condition, residual });
    }
    let sys = assemble_2d_system(coeffs, grid, angular, boundary_modal, memory_cap)?;
    let sol = solve(&sys.matrix, &sys.rhs)?;
    let mut modal = vec![vec![ZERO; nr]; angular.n_theta()];
    for (&p, chunk) in sys.active.iter().zip(sol.x.chunks(nr)) {
        modal[p] = chunk.to_vec();
    }
    Ok(ModalField { modal, condition: sol.condition, residual: sol.residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{characteristic_height, hyperboloid_height, Compactification};
    use crate::media::{anisotropic_medium, constant_medium, quadratic_medium};
    use crate::nic::assemble_general;

    #[test]
    fn polynomial_exactness() {
        let g = build_radial_grid(0.5, 8).unwrap();
        assert_eq!(g.nodes[0], 0.5);
        assert_eq!(g.nodes[8], 1.0);
        for i in 0..=8 {
            let d: f64 = (0..=8).map(|j| g.d1[(i, j)] * g.nodes[j].powi(3)).sum();
            assert!((d - 3.0 * g.nodes[i].powi(2)).abs() < 1e-12);
            let dd: f64 = (0..=8).map(|j| g.d2[(i, j)] * g.nodes[j].powi(3)).sum();
            assert!((dd - 6.0 * g.nodes[i]).abs() < 1e-11);
            let one: f64 = (0..=8).map(|j| g.d1[(i, j)] * g.nodes[j]).sum();
            assert!((one - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_is_square_of_first() {
        for n in [4, 16, 32, 64] {
            let g = build_radial_grid(2f64.sqrt() - 1.0, n).unwrap();
            let sq = &g.d1 * &g.d1;
            let scale = (0..=n).flat_map(|i| (0..=n).map(move |j| (i, j))).map(|(i, j)| g.d2[(i, j)].abs()).fold(0.0, f64::max);
            for i in 0..=n {
                for j in 0..=n {
                    assert!((sq[(i, j)] - g.d2[(i, j)]).abs() <= 1e-10 * scale.max(1.0), "n={n}");
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(matches!(build_radial_grid(0.5, 3), Err(Error::Config(_))));
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let g = build_radial_grid(0.5, 10).unwrap();
        let v: Vec<Complex64> = g.nodes.iter().map(|&r| Complex64::new(r.powi(7), -r)).collect();
        for rho in [0.51, 0.77, 0.999] {
            assert!((g.interpolate(&v, rho) - Complex64::new(rho.powi(7), -rho)).norm() < 1e-13);
        }
    }

    #[test]
    fn fourier_round_trip() {
        let a = AngularGrid::new(12).unwrap();
        let v: Vec<Complex64> = (0..12).map(|j| Complex64::new((j as f64).sin(), 0.3 * j as f64)).collect();
        let back = a.inverse(&a.forward(&v));
        for (x, y) in v.iter().zip(&back) {
            assert!((x - y).norm() < 1e-13);
        }
        let mode: Vec<Complex64> = a.thetas().iter().map(|&t| Complex64::from_polar(1.0, -3.0 * t)).collect();
        let c = a.forward(&mode);
        assert!((c[a.position(-3).unwrap()] - 1.0).norm() < 1e-14);
        assert_eq!(a.modes().first(), Some(&-6));
        assert!(a.position(6).is_none());
        assert!(AngularGrid::new(7).is_err());
    }

    #[test]
    fn parseval() {
        let a = AngularGrid::new(32).unwrap();
        let v: Vec<Complex64> = a.thetas().iter().map(|&t| Complex64::new((2.0 * t.cos()).exp(), t.sin())).collect();
        let c = a.forward(&v);
        let lhs = a.l2_norm(&v).powi(2);
        let rhs = 2.0 * PI * c.iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn identity_and_singular_systems() {
        let n = 6;
        let id = Mat::<Complex64>::from_fn(n, n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { ZERO });
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let s = solve(&id, &b).unwrap();
        assert_eq!(s.x, b);
        assert!((s.condition - 1.0).abs() < 1e-14);
        let zero = Mat::<Complex64>::zeros(n, n);
        assert!(matches!(solve(&zero, &b), Err(Error::Solve { .. })));
        let mut hollow = Mat::<Complex64>::from_fn(n, n, |i, j| Complex64::new(1.0 / (1 + i + j) as f64, (i * j) as f64));
        for i in 0..n {
            hollow[(i, 3)] = ZERO;
        }
        assert!(matches!(solve(&hollow, &b), Err(Error::Solve { .. })));
        let graded = Mat::<Complex64>::from_fn(n, n, |i, j| if i == j { Complex64::new(10f64.powi(-4 * i as i32), 0.0) } else { ZERO });
        assert!(solve(&graded, &b).is_ok());
        let err = solve_with_limit(&graded, &b, CONDITION_LIMIT).unwrap_err();
        assert!(matches!(err, Error::Solve { condition, .. } if condition > 1e19));
    }

    #[test]
    fn random_well_conditioned_system() {
        // Deterministic pseudo-random entries, diagonally weighted.
        let n = 50;
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Mat::<Complex64>::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                a[(i, j)] = Complex64::new(next(), next());
            }
            a[(j, j)] += Complex64::new(8.0, 0.0);
        }
        let b: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let s = solve(&a, &b).unwrap();
        assert!(s.residual <= 1e-11);
        assert!(s.condition > 1.0 && s.condition < 1e3);
    }

    #[test]
    fn condition_estimate_matches_exact_for_diagonal() {
        let n = 10;
        let a = Mat::<Complex64>::from_fn(n, n, |i, j| if i == j { Complex64::new(10f64.powi(i as i32 - 3), 0.0) } else { ZERO });
        let s = solve(&a, &vec![Complex64::new(1.0, 0.0); n]).unwrap();
        assert!((s.condition / 1e9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_row_accounting() {
        let m = constant_medium();
        let g = build_radial_grid(0.5, 12).unwrap();
        for dir in [Direction::Incoming, Direction::Outgoing] {
            let c = assemble_general(Compactification::Standard, characteristic_height(&m, dir).unwrap(), m, 2.0, 2).unwrap();
            let sys = assemble_modal_system(&c, 3, &g, Complex64::new(1.0, 0.0)).unwrap();
            let unit_rows: Vec<usize> = (0..g.len())
                .filter(|&i| (0..g.len()).all(|j| sys.matrix[(i, j)] == if i == j { Complex64::new(1.0, 0.0) } else { ZERO }))
                .collect();
            assert_eq!(unit_rows, vec![sys.bc_row_index]);
            assert_eq!(sys.bc_row_index, if dir == Direction::Incoming { 12 } else { 0 });
        }
        let an = anisotropic_medium(1.0, 0.8, 1.0).unwrap();
        let comp = Compactification::Hyperbolic;
        let g = build_radial_grid(comp.rho_obstacle(), 8).unwrap();
        let ang = AngularGrid::new(6).unwrap();
        let c = assemble_general(comp, hyperboloid_height(Direction::Incoming), an, 2.0, 2).unwrap();
        let sys = assemble_2d_system(&c, &g, &ang, &[ZERO; 6], DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(sys.boundary_rows.len(), 6);
        assert!(sys.boundary_rows.iter().all(|&r| r % 9 == 8));
    }

    #[test]
    fn memory_guard_rejects_before_allocating() {
        let an = anisotropic_medium(1.0, 0.8, 1.0).unwrap();
        let comp = Compactification::Hyperbolic;
        let g = build_radial_grid(comp.rho_obstacle(), 128).unwrap();
        let ang = AngularGrid::new(256).unwrap();
        let c = assemble_general(comp, hyperboloid_height(Direction::Incoming), an, 300.0, 2).unwrap();
        let err = assemble_2d_system(&c, &g, &ang, &vec![ZERO; 256], DEFAULT_MEMORY_CAP).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn barrier_cap_tracks_wavenumber() {
        assert_eq!(barrier_mode_cap(2.0), 15);
        let caps: Vec<i32> = [0.5, 2.0, 8.0, 20.0, 60.0].iter().map(|&k| barrier_mode_cap(k)).collect();
        assert!(caps.windows(2).all(|w| w[0] < w[1]), "{caps:?}");
        assert!(caps[4] > 60);
    }

    #[test]
    fn coupled_system_drops_modes_beyond_the_barrier() {
        let an = anisotropic_medium(1.0, 0.8, 1.0).unwrap();
        let comp = Compactification::Hyperbolic;
        let g = build_radial_grid(comp.rho_obstacle(), 8).unwrap();
        let ang = AngularGrid::new(48).unwrap();
        let c = assemble_general(comp, hyperboloid_height(Direction::Incoming), an, 2.0, 2).unwrap();
        let sys = assemble_2d_system(&c, &g, &ang, &[ZERO; 48], DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(sys.active.len(), 31);
        assert!(sys.active.iter().all(|&p| ang.modes()[p].abs() <= 15));
        assert_eq!(sys.matrix.nrows(), 31 * 9);
        let data: Vec<Complex64> = ang.modes().iter().map(|&m| Complex64::new(0.9f64.powi(m.abs()), 0.0)).collect();
        let field = solve_field(&c, &g, &ang, &data, DEFAULT_MEMORY_CAP).unwrap();
        for (p, &m) in ang.modes().iter().enumerate() {
            if m.abs() > 15 {
                assert!(field.modal[p].iter().all(|v| *v == ZERO));
            } else {
                assert!((field.modal[p][8] - data[p]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn coupled_path_matches_modal_path_for_radial_coefficients() {
        let comp = Compactification::Hyperbolic;
        let g = build_radial_grid(comp.rho_obstacle(), 16).unwrap();
        let ang = AngularGrid::new(8).unwrap();
        let q = quadratic_medium(1.0).unwrap();
        let c = assemble_general(comp, hyperboloid_height(Direction::Outgoing), q, 2.0, 2).unwrap();
        let data: Vec<Complex64> = (0..8).map(|p| Complex64::new(1.0 / (1.0 + p as f64), 0.5)).collect();
        let modal = solve_field(&c, &g, &ang, &data, DEFAULT_MEMORY_CAP).unwrap();
        let sys = assemble_2d_system(&c, &g, &ang, &data, DEFAULT_MEMORY_CAP).unwrap();
        let full = solve(&sys.matrix, &sys.rhs).unwrap();
        for p in 0..8 {
            for i in 0..g.len() {
                assert!((modal.modal[p][i] - full.x[p * g.len() + i]).norm() < 1e-12);
            }
        }
    }
}
