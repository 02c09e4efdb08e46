//! Closed-form scattering maps and modal fields for radial media, von Mises
//! beam spectra, and an ODE oracle that checks them independently.

use crate::error::{Error, Result};
use crate::media::{Medium, TailClass};
use crate::ode::{integrate, OdeOptions};
use crate::specfun::{
    bessel_i_scaled, coulomb_h, coulomb_phase, hankel, hankel1_scaled, hankel_complex_order, CoulombParams, CoulombSign, Kind,
};
use crate::spectral::AngularGrid;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn parity(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("wavenumber must be positive, got {k}")))
    }
}

/// S_m(k) = i(−1)^m H⁽²⁾_m(k)/H⁽¹⁾_m(k), evaluated as a pure phase.
pub fn s_constant(m: i32, k: f64) -> Result<Complex64> {
    check_k(k)?;
    let h = hankel(m.abs(), Kind::First, k)?;
    Ok(I * parity(m) * Complex64::from_polar(1.0, -2.0 * h.arg()))
}

/// ν = √(m² − κ²k²) on the principal branch.
pub fn modified_order(m: i32, k: f64, kappa: f64) -> Complex64 {
    let nu2 = (m as f64) * (m as f64) - kappa * kappa * k * k;
    Complex64::new(nu2, 0.0).sqrt()
}

/// S_m(k; κ) = i e^{−iπν} H⁽²⁾_ν(k)/H⁽¹⁾_ν(k) with ν = √(m² − κ²k²).
pub fn s_quadratic(m: i32, k: f64, kappa: f64) -> Result<Complex64> {
    check_k(k)?;
    if !(kappa >= 0.0) {
        return Err(Error::domain(format!("strength κ must be non-negative, got {kappa}")));
    }
    if kappa == 0.0 {
        return s_constant(m, k);
    }
    let nu = modified_order(m, k, kappa);
    let phase = (-I * PI * nu).exp();
    if nu.im == 0.0 {
        let h = hankel_complex_order(nu, Kind::First, k)?;
        return Ok(I * phase * Complex64::from_polar(1.0, -2.0 * h.arg()));
    }
    let h1 = hankel_complex_order(nu, Kind::First, k)?;
    let h2 = hankel_complex_order(nu, Kind::Second, k)?;
    Ok(I * phase * h2 / h1)
}

/// S_m(k; κ) = −i(−1)^m H⁻_λ(η,k)/H⁺_λ(η,k) e^{ikκ ln 2k + 2iσ_λ(η)},
/// λ = |m| − ½, η = −kκ/2.
pub fn s_longrange(m: i32, k: f64, kappa: f64) -> Result<Complex64> {
    check_k(k)?;
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("long-range strength must be positive, got {kappa}")));
    }
    let lambda = m.abs() as f64 - 0.5;
    let eta = -0.5 * k * kappa;
    let hp = coulomb_h(CoulombParams::new(lambda, eta, k)?, CoulombSign::Plus)?;
    let sigma = coulomb_phase(lambda, eta)?;
    let phase = k * kappa * (2.0 * k).ln() + 2.0 * sigma - 2.0 * hp.arg();
    Ok(-I * parity(m) * Complex64::from_polar(1.0, phase))
}

/// Dispatches on the tail class of a radial medium.
pub fn s_for_medium(medium: &Medium, m: i32, k: f64) -> Result<Complex64> {
    match medium.tail_class() {
        TailClass::Constant => s_constant(m, k),
        TailClass::ShortRange => s_quadratic(m, k, medium.kappa()),
        TailClass::LongRange => s_longrange(m, k, medium.kappa()),
        TailClass::Anisotropic => Err(Error::Unsupported("no closed-form scattering map for anisotropic media".into())),
    }
}

/// Incident and sound-soft scattered modal fields for a unit disk, with
/// incident amplitude one at infinity.
#[derive(Debug, Clone, Copy)]
pub struct ModalFields {
    medium: Medium,
    m: i32,
    k: f64,
    amplitude: Complex64,
    ratio: Complex64,
    s: Complex64,
}

pub fn modal_fields(medium: &Medium, m: i32, k: f64) -> Result<ModalFields> {
    check_k(k)?;
    let s = s_for_medium(medium, m, k)?;
    let (amplitude, ratio) = match medium.tail_class() {
        TailClass::Constant => {
            let a = (PI * k / 2.0).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_2 * (m.abs() as f64 + 0.5));
            let h1 = hankel(m.abs(), Kind::First, k)?;
            (a, h1.conj() / h1)
        }
        TailClass::ShortRange => {
            let nu = modified_order(m, k, medium.kappa());
            let a = (PI * k / 2.0).sqrt() * (-I * FRAC_PI_2 * (nu + 0.5)).exp();
            let h1 = hankel_complex_order(nu, Kind::First, k)?;
            let h2 = hankel_complex_order(nu, Kind::Second, k)?;
            (a, h2 / h1)
        }
        TailClass::LongRange => {
            let lambda = m.abs() as f64 - 0.5;
            let eta = -0.5 * k * medium.kappa();
            let sigma = coulomb_phase(lambda, eta)?;
            let a = k.sqrt() * Complex64::from_polar(1.0, -(eta * (2.0 * k).ln() + FRAC_PI_2 * lambda - sigma));
            let hp = coulomb_h(CoulombParams::new(lambda, eta, k)?, CoulombSign::Plus)?;
            (a, hp.conj() / hp)
        }
        TailClass::Anisotropic => unreachable!("rejected by s_for_medium"),
    };
    Ok(ModalFields { medium: *medium, m, k, amplitude, ratio, s })
}

impl ModalFields {
    pub fn scattering_coefficient(&self) -> Complex64 {
        self.s
    }

    /// A_m (A_λ for long-range media).
    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    fn order(&self) -> Complex64 {
        modified_order(self.m, self.k, self.medium.kappa())
    }

    fn check_r(r: f64) -> Result<()> {
        if r >= 1.0 && r.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("modal fields are defined for 1 ≤ r < ∞, got {r}")))
        }
    }

    /// Outgoing and incoming basis functions at kr, each carrying the factor
    /// e^{∓ikN(r)}: returns (e^{−ikN}X⁺(kr), e^{+ikN}X⁻(kr)).
    fn stripped_basis(&self, r: f64) -> Result<(Complex64, Complex64)> {
        let z = self.k * r;
        match self.medium.tail_class() {
            TailClass::Constant => {
                let h = hankel1_scaled(self.m.abs(), z)?;
                Ok((h, h.conj()))
            }
            TailClass::ShortRange => {
                let nu = self.order();
                let n = self.medium.eikonal(r).unwrap_or(r);
                let out = hankel_complex_order(nu, Kind::First, z)? * Complex64::from_polar(1.0, -self.k * n);
                let inc = hankel_complex_order(nu, Kind::Second, z)? * Complex64::from_polar(1.0, self.k * n);
                Ok((out, inc))
            }
            TailClass::LongRange => {
                let lambda = self.m.abs() as f64 - 0.5;
                let eta = -0.5 * self.k * self.medium.kappa();
                let hp = coulomb_h(CoulombParams::new(lambda, eta, z)?, CoulombSign::Plus)? / z.sqrt();
                let n = self.medium.eikonal(r).unwrap_or(r);
                let out = hp * Complex64::from_polar(1.0, -self.k * n);
                Ok((out, out.conj()))
            }
            TailClass::Anisotropic => unreachable!(),
        }
    }

    /// U⁻_m(r).
    pub fn incident(&self, r: f64) -> Result<Complex64> {
        Self::check_r(r)?;
        let (_, inc) = self.stripped_basis(r)?;
        let n = self.medium.eikonal(r).unwrap_or(r);
        Ok(self.amplitude * inc * Complex64::from_polar(1.0, -self.k * n))
    }

    /// U⁺_m(r).
    pub fn scattered(&self, r: f64) -> Result<Complex64> {
        Self::check_r(r)?;
        let (out, _) = self.stripped_basis(r)?;
        let n = self.medium.eikonal(r).unwrap_or(r);
        Ok(-self.amplitude * self.ratio * out * Complex64::from_polar(1.0, self.k * n))
    }

    /// u⁻ = √r e^{ikN(r)} U⁻_m(r); equals 1 at r = ∞.
    pub fn incident_rescaled(&self, r: f64) -> Result<Complex64> {
        if r == f64::INFINITY {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Self::check_r(r)?;
        let (_, inc) = self.stripped_basis(r)?;
        Ok(self.amplitude * inc * r.sqrt())
    }

    /// u⁺ = √r e^{−ikN(r)} U⁺_m(r); equals S_m at r = ∞.
    pub fn scattered_rescaled(&self, r: f64) -> Result<Complex64> {
        if r == f64::INFINITY {
            return Ok(self.s);
        }
        Self::check_r(r)?;
        let (out, _) = self.stripped_basis(r)?;
        Ok(-self.amplitude * self.ratio * out * r.sqrt())
    }
}

/// Modal spectrum of the unit-flux von Mises beam.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamSpectrum {
    pub beta: f64,
    pub theta0: f64,
    /// (m, û⁻_m) for |m| ≤ M.
    pub coefficients: Vec<(i32, Complex64)>,
}

/// û⁻_m = I_m(β) e^{−imθ₀}/√(2π I₀(2β)).
pub fn beam_coefficient(beta: f64, theta0: f64, m: i32) -> Result<Complex64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beam concentration must be positive, got {beta}")));
    }
    let norm = (2.0 * PI * bessel_i_scaled(0, 2.0 * beta)?).sqrt();
    let im = bessel_i_scaled(m.unsigned_abs(), beta)?;
    Ok(Complex64::from_polar(im / norm, -(m as f64) * theta0))
}

pub fn beam_spectrum(beta: f64, theta0: f64, max_mode: u32) -> Result<BeamSpectrum> {
    if max_mode < 1 {
        return Err(Error::domain("beam truncation must be at least 1"));
    }
    let m = max_mode as i32;
    let coefficients = (-m..=m).map(|j| beam_coefficient(beta, theta0, j).map(|c| (j, c))).collect::<Result<_>>()?;
    Ok(BeamSpectrum { beta, theta0, coefficients })
}

/// Beam profile u∞⁻(θ) = exp(β(cos(θ−θ₀) − 1))/√(2π Ĩ₀(2β)), Ĩ the scaled Bessel I.
pub fn beam_profile(beta: f64, theta0: f64, theta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beam concentration must be positive, got {beta}")));
    }
    let norm = (2.0 * PI * bessel_i_scaled(0, 2.0 * beta)?).sqrt();
    Ok((beta * ((theta - theta0).cos() - 1.0)).exp() / norm)
}

/// Exact scattered far field of a beam, synthesised on the modes of `grid`:
/// returns (θ_j values, modal coefficients in storage order).
pub fn beam_far_field(
    beta: f64,
    theta0: f64,
    k: f64,
    medium: &Medium,
    grid: &AngularGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let coeffs = grid
        .modes()
        .into_iter()
        .map(|m| Ok(s_for_medium(medium, m, k)? * beam_coefficient(beta, theta0, m)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid.inverse(&coeffs), coeffs))
}

/// Result of [`ode_oracle`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub s: Complex64,
    /// |S(R_far) − S(R_far/2)|.
    pub error_estimate: f64,
    /// (r, U_m(r)) for the total field at r = 1, 2, 4, … < R_far.
    pub samples: Vec<(f64, Complex64)>,
}

/// Coefficients of w″ + (k² + a/r + b/r²) w = 0 for U = r^{−1/2} w.
fn oracle_potential(medium: &Medium, m: i32, k: f64) -> Result<(f64, f64)> {
    let centrifugal = 0.25 - (m as f64) * (m as f64);
    let kappa = medium.kappa();
    match medium.tail_class() {
        TailClass::Constant => Ok((0.0, centrifugal)),
        TailClass::ShortRange => Ok((0.0, centrifugal + kappa * kappa * k * k)),
        TailClass::LongRange => Ok((k * k * kappa, centrifugal)),
        TailClass::Anisotropic => Err(Error::Unsupported("the ODE oracle covers radial media with 1/r or 1/r² tails".into())),
    }
}

/// Outgoing solution w = e^{i(kr + α ln r)} f(r); returns (f, f′) at r from
/// the asymptotic series, truncated at its smallest term.
fn asymptotic_seed(k: f64, alpha: f64, b: f64, r: f64) -> Result<(Complex64, Complex64)> {
    let p = Complex64::new(b - alpha * alpha, -alpha);
    let mut c = Complex64::new(1.0, 0.0);
    let mut f = c;
    let mut fp = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for j in 0..200 {
        let jf = j as f64;
        c = c * (Complex64::new(jf * (jf + 1.0), -2.0 * alpha * jf) + p) / (2.0 * I * k * (jf + 1.0));
        let term = c * r.powi(-(j + 1));
        let size = term.norm();
        if size > last {
            break;
        }
        f += term;
        fp -= (jf + 1.0) * term / r;
        last = size;
        if size < 1e-18 * f.norm() {
            return Ok((f, fp));
        }
    }
    if last > 1e-13 {
        return Err(Error::precision(format!("asymptotic seed at r = {r}"), last));
    }
    Ok((f, fp))
}

/// S and samples of the total field for one outer radius.
fn oracle_run(medium: &Medium, m: i32, k: f64, r_far: f64, tolerance: f64) -> Result<(Complex64, Vec<(f64, Complex64)>)> {
    let (a, b) = oracle_potential(medium, m, k)?;
    let alpha = a / (2.0 * k);
    let (f, fp) = asymptotic_seed(k, alpha, b, r_far)?;
    let v0 = fp / f;
    let p = Complex64::new(b - alpha * alpha, -alpha);
    // v = f′/f and I = ∫_R^r v; both stay smooth where w oscillates.
    let rhs = |r: f64, y: &[f64; 4]| {
        let v = Complex64::new(y[0], y[1]);
        let dv = -v * v - 2.0 * I * (k + alpha / r) * v - p / (r * r);
        [dv.re, dv.im, v.re, v.im]
    };
    let opts = OdeOptions { rtol: tolerance.min(1e-10) * 1e-2, atol: 1e-16, max_steps: 20_000_000 };
    let ln_f_far = f.ln();
    let mut marks = vec![r_far];
    let mut r = r_far;
    while r > 2.0 {
        r = 2f64.powf((r.log2() - 1.0).ceil()).max(1.0);
        if r >= marks[marks.len() - 1] {
            r /= 2.0;
        }
        marks.push(r.max(1.0));
    }
    if marks[marks.len() - 1] != 1.0 {
        marks.push(1.0);
    }
    let mut y = [v0.re, v0.im, 0.0, 0.0];
    let mut logs = Vec::with_capacity(marks.len());
    for w in marks.windows(2) {
        y = integrate(rhs, w[0], y, w[1], opts)?;
        let ln_w = I * (k * w[1] + alpha * w[1].ln()) + ln_f_far + Complex64::new(y[2], y[3]);
        logs.push((w[1], ln_w));
    }
    let (_, ln_w1) = logs[logs.len() - 1];
    let s = -Complex64::from_polar(1.0, -2.0 * ln_w1.im);
    let samples = logs
        .iter()
        .rev()
        .map(|&(r, ln_w)| {
            let w = ln_w.exp();
            (r, (w.conj() + s * w) / r.sqrt())
        })
        .collect();
    Ok((s, samples))
}

/// Independent estimate of S_m by integrating the physical radial equation
/// inward from `r_far`, seeded with the outgoing asymptotic series. The
/// incoming solution is its conjugate and U(1) = 0 fixes the combination.
pub fn ode_oracle(medium: &Medium, m: i32, k: f64, r_far: f64, tolerance: f64) -> Result<OracleResult> {
    check_k(k)?;
    if !(r_far >= 4.0) || !r_far.is_finite() {
        return Err(Error::domain(format!("outer radius must be at least 4, got {r_far}")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::domain("oracle tolerance must be positive"));
    }
    let (s, samples) = oracle_run(medium, m, k, r_far, tolerance)?;
    let (s_half, _) = oracle_run(medium, m, k, r_far / 2.0, tolerance)?;
    let error_estimate = (s - s_half).norm();
    if error_estimate > tolerance {
        return Err(Error::precision(format!("oracle S_{m}(k = {k}) under R_far refinement"), error_estimate));
    }
    Ok(OracleResult { s, error_estimate, samples })
}
