//! Coefficients of the compactified Helmholtz operator
//!
//!   ∂ρ(G ∂ρu) + 2ikH ∂ρu + (1/(G r²)) Δ_θ u + c0 u = 0,
//!   c0 = k²(n² − H²)/G + ik ∂ρH + (d−1)(3−d)/(4 G r²).

use crate::error::{Error, Result};
use crate::geometry::{validate_theorem_hypotheses, Compactification, Direction, HeightFunction};
use crate::media::Medium;
use crate::spectral::AngularGrid;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NicCoefficients {
    pub comp: Compactification,
    pub height: HeightFunction,
    pub medium: Medium,
    pub k: f64,
    pub d: u32,
}

/// Builds the coefficient fields after checking the regularity hypotheses.
pub fn assemble_general(comp: Compactification, height: HeightFunction, medium: Medium, k: f64, d: u32) -> Result<NicCoefficients> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::config(format!("wavenumber must be positive, got {k}")));
    }
    if d == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    let report = validate_theorem_hypotheses(comp, &height, &medium);
    if !report.passed() {
        return Err(Error::config(report.failures.join("; ")));
    }
    Ok(NicCoefficients { comp, height, medium, k, d })
}

impl NicCoefficients {
    pub fn direction(&self) -> Direction {
        self.height.direction
    }

    pub fn is_radial(&self) -> bool {
        self.medium.is_radial()
    }

    /// G, the coefficient inside ∂ρ(G∂ρ·).
    pub fn c2(&self, rho: f64) -> f64 {
        self.comp.g(rho)
    }

    pub fn c2_prime(&self, rho: f64) -> f64 {
        self.comp.g_prime(rho)
    }

    /// 2ikH.
    pub fn c1(&self, rho: f64) -> Complex64 {
        Complex64::new(0.0, 2.0 * self.k * self.height.boost(self.comp, rho))
    }

    /// 1/(G r²), multiplying the angular Laplacian.
    pub fn c_ang(&self, rho: f64) -> f64 {
        self.comp.inv_g_r2(rho)
    }

    fn curvature(&self) -> f64 {
        let d = self.d as f64;
        (d - 1.0) * (3.0 - d) / 4.0
    }

    pub fn c0(&self, rho: f64, theta: f64) -> Complex64 {
        let k = self.k;
        let deficit = self.height.deficit_over_g(self.comp, &self.medium, rho, theta);
        let re = k * k * deficit + self.curvature() * self.comp.inv_g_r2(rho);
        Complex64::new(re, k * self.height.dboost_drho(self.comp, rho))
    }
}

/// Residual of the degenerate equation at ρ = 1,
/// c1 ∂ρu + c_ang ∂θ²u + c0 u, on the angular grid.
pub fn compatibility_residual(
    coeffs: &NicCoefficients,
    boundary_values: &[Complex64],
    boundary_normal_derivatives: &[Complex64],
    grid: &AngularGrid,
) -> Vec<Complex64> {
    let uthth = grid.second_derivative(boundary_values);
    let c1 = coeffs.c1(1.0);
    let cang = coeffs.c_ang(1.0);
    grid.thetas()
        .iter()
        .enumerate()
        .map(|(j, &theta)| c1 * boundary_normal_derivatives[j] + cang * uthth[j] + coeffs.c0(1.0, theta) * boundary_values[j])
        .collect()
}
