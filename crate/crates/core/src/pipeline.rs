//! Two-step scattering: incoming solve from data at ρ = 1, obstacle trace,
//! sound-soft coupling, outgoing solve, far-field read-off.

use crate::error::{Error, Result};
use crate::geometry::{characteristic_height, hyperboloid_height, Compactification, Direction, HeightFunction};
use crate::media::Medium;
use crate::nic::{assemble_general, compatibility_residual, NicCoefficients};
use crate::reference::beam_profile;
use crate::spectral::{build_radial_grid, solve_field, AngularGrid, RadialGrid, DEFAULT_MEMORY_CAP};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Characteristic: standard compactification with h = ±N(r).
/// Hyperbolic: Poincaré-disk compactification with h = ±√(1+r²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Characteristic,
    Hyperbolic,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Characteristic => "characteristic",
            Route::Hyperbolic => "hyperbolic",
        }
    }

    pub fn compactification(self) -> Compactification {
        match self {
            Route::Characteristic => Compactification::Standard,
            Route::Hyperbolic => Compactification::Hyperbolic,
        }
    }

    pub fn height(self, medium: &Medium, direction: Direction) -> Result<HeightFunction> {
        match self {
            Route::Characteristic => characteristic_height(medium, direction),
            Route::Hyperbolic => Ok(hyperboloid_height(direction)),
        }
    }

    /// Builds the operator, rejecting media that violate the rate condition.
    pub fn coefficients(self, medium: &Medium, k: f64, direction: Direction) -> Result<NicCoefficients> {
        assemble_general(self.compactification(), self.height(medium, direction)?, *medium, k, 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_rho: usize,
    pub n_theta: usize,
}

impl Resolution {
    pub fn new(n_rho: usize, n_theta: usize) -> Self {
        Resolution { n_rho, n_theta }
    }

    /// The smallest even angular grid holding ±m with margin.
    pub fn single_mode(n_rho: usize, m: i32) -> Self {
        Resolution { n_rho, n_theta: 2 * m.unsigned_abs() as usize + 6 }
    }
}

/// Incoming radiation data u∞⁻(θ).
#[derive(Debug, Clone, PartialEq)]
pub enum IncidentData {
    SingleMode(i32),
    /// Values on the equispaced angular grid.
    AngularProfile(Vec<Complex64>),
    ModalCoefficients(Vec<(i32, Complex64)>),
}

impl IncidentData {
    /// Modal coefficients in grid storage order.
    pub fn modal(&self, grid: &AngularGrid) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; grid.n_theta()];
        match self {
            IncidentData::SingleMode(m) => {
                let p = grid.position(*m).ok_or_else(|| {
                    Error::config(format!("mode {m} is not resolved by {} angular nodes", grid.n_theta()))
                })?;
                out[p] = Complex64::new(1.0, 0.0);
            }
            IncidentData::AngularProfile(values) => {
                if values.len() != grid.n_theta() {
                    return Err(Error::config(format!(
                        "angular profile has {} values for {} nodes",
                        values.len(),
                        grid.n_theta()
                    )));
                }
                out = grid.forward(values);
            }
            IncidentData::ModalCoefficients(list) => {
                for &(m, c) in list {
                    match grid.position(m) {
                        Some(p) => out[p] += c,
                        None if c == ZERO => {}
                        None => {
                            return Err(Error::config(format!(
                                "mode {m} is not resolved by {} angular nodes",
                                grid.n_theta()
                            )))
                        }
                    }
                }
            }
        }
        if out.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::config("incident data must be finite"));
        }
        // Coefficients below working precision carry only rounding noise, which
        // the centrifugal barrier would amplify by many orders in the trace.
        let floor = f64::EPSILON * out.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in out.iter_mut() {
            if c.norm() < floor {
                *c = ZERO;
            }
        }
        Ok(out)
    }
}

/// Rescaled field u(ρ, θ) on the annulus, kept in modal form.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub direction: Direction,
    pub route: Route,
    pub k: f64,
    pub medium: Medium,
    pub radial: RadialGrid,
    pub angular: AngularGrid,
    /// `modal[p][i]`: coefficient of mode position p at radial node i.
    pub modal: Vec<Vec<Complex64>>,
    pub condition: f64,
    pub residual: f64,
    /// Largest pointwise residual of the degenerate equation at ρ = 1.
    pub compatibility: f64,
}

impl FieldSolution {
    /// Grid values: `values()[i][j]` = u(ρ_i, θ_j).
    pub fn values(&self) -> Vec<Vec<Complex64>> {
        (0..self.radial.len())
            .map(|i| {
                let coeffs: Vec<Complex64> = self.modal.iter().map(|col| col[i]).collect();
                self.angular.inverse(&coeffs)
            })
            .collect()
    }

    /// Radial profile of mode m.
    pub fn mode(&self, m: i32) -> Option<&[Complex64]> {
        self.angular.position(m).map(|p| self.modal[p].as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarField {
    pub k: f64,
    pub direction: Direction,
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub modes: Vec<i32>,
    pub coefficients: Vec<Complex64>,
    /// Largest condition estimate over the solves behind this field.
    pub condition: f64,
}

impl FarField {
    pub fn coefficient(&self, m: i32) -> Option<Complex64> {
        self.modes.iter().position(|&j| j == m).map(|p| self.coefficients[p])
    }

    /// Trigonometric interpolant on `n_theta` equispaced angles. The
    /// Nyquist mode is split evenly between ±m so the result stays real
    /// for real data.
    pub fn resample(&self, n_theta: usize) -> Vec<Complex64> {
        let nyquist = (self.modes.len() / 2) as i32;
        (0..n_theta)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                self.modes
                    .iter()
                    .zip(&self.coefficients)
                    .map(|(&m, &c)| {
                        let mt = m as f64 * theta;
                        if m.abs() == nyquist {
                            c * mt.cos()
                        } else {
                            c * Complex64::from_polar(1.0, mt)
                        }
                    })
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringMapEntry {
    pub m: i32,
    pub s: Complex64,
    pub medium: Medium,
    pub k: f64,
    pub resolution: Resolution,
    pub condition: f64,
}

fn with_context(stage: &str, err: Error) -> Error {
    match err {
        Error::Solve { reason, condition } => Error::Solve { reason: format!("{stage}: {reason}"), condition },
        other => other,
    }
}

fn solve_direction(
    route: Route,
    medium: &Medium,
    k: f64,
    direction: Direction,
    boundary_modal: Vec<Complex64>,
    radial: RadialGrid,
    angular: AngularGrid,
) -> Result<FieldSolution> {
    let coeffs = route.coefficients(medium, k, direction)?;
    let stage = match direction {
        Direction::Incoming => "incident solve",
        Direction::Outgoing => "scattered solve",
    };
    let field = solve_field(&coeffs, &radial, &angular, &boundary_modal, DEFAULT_MEMORY_CAP).map_err(|e| with_context(stage, e))?;
    let n = radial.n;
    let at_one: Vec<Complex64> = field.modal.iter().map(|col| col[n]).collect();
    let slope: Vec<Complex64> = field.modal.iter().map(|col| (0..=n).map(|j| col[j] * radial.d1[(n, j)]).sum()).collect();
    let res = compatibility_residual(&coeffs, &angular.inverse(&at_one), &angular.inverse(&slope), &angular);
    let compatibility = res.iter().map(|r| r.norm()).fold(0.0, f64::max);
    log::debug!(
        "{stage}: route {}, k = {k}, condition {:.3e}, residual {:.3e}, compatibility {:.3e}",
        route.name(),
        field.condition,
        field.residual,
        compatibility
    );
    Ok(FieldSolution {
        direction,
        route,
        k,
        medium: *medium,
        radial,
        angular,
        modal: field.modal,
        condition: field.condition,
        residual: field.residual,
        compatibility,
    })
}

fn grids(route: Route, res: Resolution) -> Result<(RadialGrid, AngularGrid)> {
    let radial = build_radial_grid(route.compactification().rho_obstacle(), res.n_rho)?;
    Ok((radial, AngularGrid::new(res.n_theta)?))
}

/// Incoming solve with u⁻(1, θ) = u∞⁻(θ).
pub fn solve_incident(route: Route, medium: &Medium, k: f64, data: &IncidentData, res: Resolution) -> Result<FieldSolution> {
    let (radial, angular) = grids(route, res)?;
    let boundary = data.modal(&angular)?;
    solve_direction(route, medium, k, Direction::Incoming, boundary, radial, angular)
}

/// Angular values of the field on the obstacle, ρ = ρ_Γ.
pub fn obstacle_trace(sol: &FieldSolution) -> Vec<Complex64> {
    let coeffs: Vec<Complex64> = sol.modal.iter().map(|col| col[0]).collect();
    sol.angular.inverse(&coeffs)
}

/// u⁺|_Γ = factor · u⁻|_Γ for a sound-soft unit disk.
pub fn coupling_factor(route: Route, medium: &Medium, k: f64) -> Result<Complex64> {
    let h1 = match route {
        Route::Characteristic => medium.eikonal(1.0).ok_or_else(|| {
            Error::config(format!("{} medium has no eikonal primitive for the characteristic route", medium.tail_class().name()))
        })?,
        Route::Hyperbolic => SQRT_2,
    };
    Ok(-Complex64::from_polar(1.0, -2.0 * k * h1))
}

pub fn scattered_boundary_data(trace: &[Complex64], route: Route, medium: &Medium, k: f64) -> Result<Vec<Complex64>> {
    let factor = coupling_factor(route, medium, k)?;
    Ok(trace.iter().map(|u| factor * u).collect())
}

/// Outgoing solve with Dirichlet data at ρ_Γ.
pub fn solve_scattered(route: Route, medium: &Medium, k: f64, boundary_data: &[Complex64], res: Resolution) -> Result<FieldSolution> {
    let (radial, angular) = grids(route, res)?;
    if boundary_data.len() != angular.n_theta() {
        return Err(Error::config(format!(
            "boundary data has {} values for {} nodes",
            boundary_data.len(),
            angular.n_theta()
        )));
    }
    let boundary = angular.forward(boundary_data);
    solve_direction(route, medium, k, Direction::Outgoing, boundary, radial, angular)
}

/// Same as [`solve_scattered`] with modal boundary data, skipping the
/// round trip through grid values.
pub fn solve_scattered_modal(route: Route, medium: &Medium, k: f64, boundary_modal: Vec<Complex64>, res: Resolution) -> Result<FieldSolution> {
    let (radial, angular) = grids(route, res)?;
    if boundary_modal.len() != angular.n_theta() {
        return Err(Error::config("modal boundary data does not match the angular grid"));
    }
    solve_direction(route, medium, k, Direction::Outgoing, boundary_modal, radial, angular)
}

/// u(1, θ) and its Fourier coefficients.
pub fn far_field(sol: &FieldSolution) -> FarField {
    let n = sol.radial.n;
    let coefficients: Vec<Complex64> = sol.modal.iter().map(|col| col[n]).collect();
    FarField {
        k: sol.k,
        direction: sol.direction,
        thetas: sol.angular.thetas().to_vec(),
        values: sol.angular.inverse(&coefficients),
        modes: sol.angular.modes(),
        coefficients,
        condition: sol.condition,
    }
}

/// Incoming solve, trace, coupling and outgoing solve.
#[derive(Debug, Clone)]
pub struct TwoStep {
    pub incident: FieldSolution,
    pub scattered: FieldSolution,
}

impl TwoStep {
    pub fn far_field(&self) -> FarField {
        let mut far = far_field(&self.scattered);
        far.condition = far.condition.max(self.incident.condition);
        far
    }
}

pub fn two_step(route: Route, medium: &Medium, k: f64, data: &IncidentData, res: Resolution) -> Result<TwoStep> {
    let incident = solve_incident(route, medium, k, data, res)?;
    let factor = coupling_factor(route, medium, k)?;
    // Coupling is pointwise in θ with a constant factor, so it acts on modes directly.
    let boundary: Vec<Complex64> = incident.modal.iter().map(|col| factor * col[0]).collect();
    let scattered = solve_scattered_modal(route, medium, k, boundary, res)?;
    Ok(TwoStep { incident, scattered })
}

/// S_m^num for each mode, one independent two-step run per mode. A zero
/// `n_theta` picks `Resolution::single_mode` for every m.
pub fn scattering_map(route: Route, medium: &Medium, k: f64, modes: &[i32], res: Resolution) -> Result<Vec<ScatteringMapEntry>> {
    modes
        .par_iter()
        .map(|&m| {
            let r = if res.n_theta == 0 { Resolution::single_mode(res.n_rho, m) } else { res };
            let run = two_step(route, medium, k, &IncidentData::SingleMode(m), r)?;
            let far = run.far_field();
            Ok(ScatteringMapEntry {
                m,
                s: far.coefficient(m).expect("mode is on the grid"),
                medium: *medium,
                k,
                resolution: r,
                condition: far.condition,
            })
        })
        .collect()
}

/// Von Mises beam parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub beta: f64,
    pub theta0: f64,
}

/// Whether Nθ/2 < 2√β ln(10³), past which the beam's modal tail is cut off.
pub fn beam_under_resolved(beta: f64, n_theta: usize) -> bool {
    (n_theta as f64) / 2.0 < 2.0 * beta.sqrt() * 1e3f64.ln()
}

pub fn beam_data(beam: Beam, grid: &AngularGrid) -> Result<IncidentData> {
    let values = grid
        .thetas()
        .iter()
        .map(|&t| beam_profile(beam.beta, beam.theta0, t).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IncidentData::AngularProfile(values))
}

pub fn scatter_beam(route: Route, medium: &Medium, k: f64, beam: Beam, res: Resolution) -> Result<FarField> {
    if !(beam.beta > 0.0) {
        return Err(Error::config(format!("beam concentration must be positive, got {}", beam.beta)));
    }
    if beam_under_resolved(beam.beta, res.n_theta) {
        log::warn!(
            "beam β = {} is under-resolved by Nθ = {}: need Nθ/2 ≥ {:.1}",
            beam.beta,
            res.n_theta,
            2.0 * beam.beta.sqrt() * 1e3f64.ln()
        );
    }
    let data = beam_data(beam, &AngularGrid::new(res.n_theta)?)?;
    Ok(two_step(route, medium, k, &data, res)?.far_field())
}

/// ‖u_num − u‖/‖u‖ in the discrete ℓ² norm.
pub fn rel_error_l2(numerical: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if numerical.len() != reference.len() {
        return Err(Error::config(format!("sample counts differ: {} vs {}", numerical.len(), reference.len())));
    }
    let den: f64 = reference.iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
    if !(den > 0.0) {
        return Err(Error::UndefinedMetric("reference field has zero norm".into()));
    }
    let num: f64 = numerical.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{constant_medium, linear_medium, quadratic_medium};
    use crate::reference::{modal_fields, s_constant};
    use std::f64::consts::PI;

    #[test]
    fn incident_trace_matches_closed_form() {
        let medium = constant_medium();
        let sol = solve_incident(Route::Characteristic, &medium, 2.0, &IncidentData::SingleMode(0), Resolution::new(64, 6)).unwrap();
        let want = modal_fields(&medium, 0, 2.0).unwrap().incident_rescaled(1.0).unwrap();
        let trace = obstacle_trace(&sol);
        for u in &trace {
            assert!((u - want).norm() < 1e-9);
        }
        let far = far_field(&sol);
        for (t, u) in far.thetas.iter().zip(&far.values) {
            let _ = t;
            assert!((u - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let medium = quadratic_medium(0.5).unwrap();
        let run = two_step(Route::Characteristic, &medium, 3.0, &IncidentData::ModalCoefficients(vec![]), Resolution::new(16, 8)).unwrap();
        assert!(run.far_field().values.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn scattered_solve_with_analytic_datum() {
        let medium = constant_medium();
        let f = modal_fields(&medium, 0, 2.0).unwrap();
        let datum = f.scattered_rescaled(1.0).unwrap();
        let sol = solve_scattered(Route::Characteristic, &medium, 2.0, &[datum; 6], Resolution::new(64, 6)).unwrap();
        let far = far_field(&sol);
        assert!((far.coefficient(0).unwrap() - s_constant(0, 2.0).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn coupling_factors() {
        let c = constant_medium();
        assert!((coupling_factor(Route::Characteristic, &c, PI).unwrap() + 1.0).norm() < 1e-14);
        let q = quadratic_medium(1.0).unwrap();
        let n1 = SQRT_2 - (1.0 + SQRT_2).ln();
        let want = -Complex64::from_polar(1.0, -2.0 * 3.0 * n1);
        assert!((coupling_factor(Route::Characteristic, &q, 3.0).unwrap() - want).norm() < 1e-14);
        let hyp = -Complex64::from_polar(1.0, -2.0 * SQRT_2 * 3.0);
        for m in [c, q, linear_medium(0.5).unwrap()] {
            assert_eq!(coupling_factor(Route::Hyperbolic, &m, 3.0).unwrap(), hyp);
        }
    }

    #[test]
    fn long_range_rejected_on_hyperbolic_route() {
        let err = solve_incident(Route::Hyperbolic, &linear_medium(0.5).unwrap(), 2.0, &IncidentData::SingleMode(0), Resolution::new(16, 6))
            .unwrap_err();
        assert!(matches!(err, Error::Config(ref s) if s.contains("rate condition")), "{err}");
    }

    #[test]
    fn metric() {
        let u = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)];
        let twice: Vec<Complex64> = u.iter().map(|v| 2.0 * v).collect();
        assert_eq!(rel_error_l2(&u, &u).unwrap(), 0.0);
        assert!((rel_error_l2(&twice, &u).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(rel_error_l2(&u, &[ZERO; 2]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn beam_data_has_unit_flux() {
        let g = AngularGrid::new(64).unwrap();
        let IncidentData::AngularProfile(v) = beam_data(Beam { beta: 4.0, theta0: 1.0 }, &g).unwrap() else { unreachable!() };
        assert!((g.l2_norm(&v) - 1.0).abs() < 1e-12);
        assert!(beam_under_resolved(64.0, 64));
        assert!(!beam_under_resolved(4.0, 64));
    }
}
