use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Arguments of the Coulomb radial equation w″ + (1 − 2η/z − λ(λ+1)/z²) w = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoulombParams {
    pub lambda: f64,
    pub eta: f64,
    pub z: f64,
}

impl CoulombParams {
    pub fn new(lambda: f64, eta: f64, z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::domain(format!("Coulomb argument must be positive, got {z}")));
        }
        if !(lambda >= -0.5) || !eta.is_finite() {
            return Err(Error::domain(format!("Coulomb parameters out of range: λ = {lambda}, η = {eta}")));
        }
        Ok(CoulombParams { lambda, eta, z })
    }

    /// Outer turning point of the radial equation.
    pub fn turning_point(&self) -> f64 {
        let l2 = self.lambda * (self.lambda + 1.0);
        self.eta + (self.eta * self.eta + l2.max(0.0)).sqrt()
    }

    fn potential(&self, z: f64) -> f64 {
        2.0 * self.eta / z + self.lambda * (self.lambda + 1.0) / (z * z) - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoulombSign {
    Plus,
    Minus,
}

/// Regular and irregular Coulomb functions with their z-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombWave {
    pub f: f64,
    pub fp: f64,
    pub g: f64,
    pub gp: f64,
}

impl CoulombWave {
    pub fn h(&self, sign: CoulombSign) -> Complex64 {
        match sign {
            CoulombSign::Plus => Complex64::new(self.g, self.f),
            CoulombSign::Minus => Complex64::new(self.g, -self.f),
        }
    }

    pub fn h_prime(&self, sign: CoulombSign) -> Complex64 {
        match sign {
            CoulombSign::Plus => Complex64::new(self.gp, self.fp),
            CoulombSign::Minus => Complex64::new(self.gp, -self.fp),
        }
    }
}

const TINY: f64 = 1e-300;
const CF1_LIMIT: usize = 4_000_000;
const CF2_LIMIT: usize = 100_000;

/// Steed's first continued fraction for F′/F, with the sign of F.
fn cf1(p: &CoulombParams, z: f64) -> Result<(f64, f64)> {
    let eta = p.eta;
    let s = |l: f64| l / z + eta / l;
    let mut f = s(p.lambda + 1.0);
    if f == 0.0 {
        f = TINY;
    }
    let (mut c, mut d) = (f, 0.0);
    let mut sign = 1.0;
    for j in 1..CF1_LIMIT {
        let l = p.lambda + j as f64;
        let a = -(1.0 + eta * eta / (l * l));
        let b = s(l) + s(l + 1.0);
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if d < 0.0 {
            sign = -sign;
        }
        if (delta - 1.0).abs() < 2.0 * f64::EPSILON && j as f64 > z {
            return Ok((f, sign));
        }
    }
    Err(Error::precision(format!("Coulomb CF1 did not converge at z = {z}"), f64::INFINITY))
}

/// Steed's second continued fraction for H⁺′/H⁺ = p + iq.
fn cf2(params: &CoulombParams, z: f64) -> Result<Complex64> {
    let eta = params.eta;
    let a = Complex64::new(1.0 + params.lambda, eta);
    let b = Complex64::new(-params.lambda, eta);
    let coeff = |n: usize| ((a + (n - 1) as f64) * (b + (n - 1) as f64), Complex64::new(2.0 * (z - eta), 2.0 * n as f64));
    // Lentz on the tail b₁ + a₂/(b₂ + …); b₁ never vanishes. The guard is
    // kept well above the underflow of |x|² in complex division.
    let tiny = Complex64::new(1e-150, 0.0);
    let (a1, b1) = coeff(1);
    let mut f = b1;
    let (mut c, mut d) = (f, Complex64::new(0.0, 0.0));
    for n in 2..CF2_LIMIT {
        let (an, bn) = coeff(n);
        d = bn + an * d;
        if d.norm() < 1e-150 {
            d = tiny;
        }
        d = d.inv();
        c = bn + an / c;
        if c.norm() < 1e-150 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 4.0 * f64::EPSILON {
            return Ok(Complex64::new(0.0, 1.0 - eta / z) + Complex64::i() / z * (a1 / f));
        }
    }
    Err(Error::precision(format!("Coulomb CF2 did not converge at z = {z}"), f64::INFINITY))
}

fn steed(params: &CoulombParams, z: f64) -> Result<CoulombWave> {
    let (fratio, sign) = cf1(params, z)?;
    let pq = cf2(params, z)?;
    let (p, q) = (pq.re, pq.im);
    let gamma = (fratio - p) / q;
    let f = sign / (q * (1.0 + gamma * gamma)).sqrt();
    let g = gamma * f;
    Ok(CoulombWave { f, fp: fratio * f, g, gp: p * g - q * f })
}

/// Coulomb functions F_λ(η,z), G_λ(η,z) and derivatives.
///
/// Beyond the turning point both continued fractions are used directly; inside
/// it G is carried inward from the turning point by integration (G grows inward)
/// and F follows from CF1 and the Wronskian F′G − FG′ = 1.
pub fn coulomb_fg(params: CoulombParams) -> Result<CoulombWave> {
    let z = params.z;
    let outer = params.turning_point() + 2.0;
    if z >= outer {
        return steed(&params, z);
    }
    let start = steed(&params, outer)?;
    let opts = OdeOptions { rtol: 1e-13, atol: 0.0, ..OdeOptions::default() };
    let [g, gp] = integrate(|t, y: &[f64; 2]| [y[1], params.potential(t) * y[0]], outer, [start.g, start.gp], z, opts)?;
    if !(g.is_finite() && gp.is_finite()) {
        return Err(Error::range(format!("irregular Coulomb function overflows at z = {z}")));
    }
    let (fratio, _) = cf1(&params, z)?;
    let f = 1.0 / (fratio * g - gp);
    Ok(CoulombWave { f, fp: fratio * f, g, gp })
}

/// Coulomb–Hankel function H^{(±)}_λ(η, z) = G ± iF.
pub fn coulomb_h(params: CoulombParams, sign: CoulombSign) -> Result<Complex64> {
    Ok(coulomb_fg(params)?.h(sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::dd::Dd;
    use crate::specfun::gamma::{coulomb_phase, log_gamma_complex};

    /// F_λ(η,z) from its ascending series z^{λ+1} C_λ Σ A_k z^k with
    /// A_{k} = (2η A_{k−1} − A_{k−2}) / (k (k + 2λ + 1)), in double-double.
    fn f_series(lambda: f64, eta: f64, z: f64) -> (f64, f64) {
        let lg = log_gamma_complex(Complex64::new(lambda + 1.0, eta)).unwrap().re;
        let lg2 = log_gamma_complex(Complex64::new(2.0 * lambda + 2.0, 0.0)).unwrap().re;
        let c = (lambda * 2f64.ln() - std::f64::consts::PI * eta / 2.0 + lg - lg2).exp();
        let (mut a2, mut a1) = (Dd::ZERO, Dd::ONE);
        let mut sum = Dd::ONE;
        let mut dsum = Dd::new(lambda + 1.0);
        // Terms t_k = A_k z^k, so nothing overflows.
        for k in 1..400 {
            let kk = k as f64;
            let t = (a1.mul_f64(2.0 * eta * z) - a2.mul_f64(z * z)) / Dd::new(kk * (kk + 2.0 * lambda + 1.0));
            sum = sum + t;
            dsum = dsum + t.mul_f64(kk + lambda + 1.0);
            a2 = a1;
            a1 = t;
        }
        let pre = c * z.powf(lambda + 1.0);
        (pre * sum.to_f64(), pre * dsum.to_f64() / z)
    }

    #[test]
    fn wronskian_and_series_f() {
        for (l, eta, z) in [(0.5, -1.0, 3.0), (3.5, -18.0, 5.0), (7.5, -1.0, 2.0), (-0.5, 0.5, 1.5), (2.5, 2.0, 6.0)] {
            let w = coulomb_fg(CoulombParams::new(l, eta, z).unwrap()).unwrap();
            let wr = w.fp * w.g - w.f * w.gp;
            assert!((wr - 1.0).abs() < 1e-10, "({l},{eta},{z}) W = {wr}");
            let (fs, fps) = f_series(l, eta, z);
            assert!((w.f - fs).abs() < 1e-9 * fs.abs().max(1e-300), "F({l},{eta},{z}) {} vs {fs}", w.f);
            assert!((w.fp - fps).abs() < 1e-9 * fps.abs().max(w.f.abs()));
        }
    }

    #[test]
    fn frozen_values() {
        // (λ, η, z, F, G) reference digits.
        let cases: [(f64, f64, f64, f64, f64); 3] = [
            (3.5, -18.0, 40.0, 0.850_168_623_040_046_5, -0.067_791_941_538_881_32),
            (0.5, -0.05, 40.0, 0.984_854_306_018_754_2, -0.170_434_988_468_883_97),
            (7.5, -1.0, 2.0, 1.399_510_799_159_496_7e-4, 955.757_424_937_496_6),
        ];
        for (l, eta, z, f, g) in cases {
            let w = coulomb_fg(CoulombParams::new(l, eta, z).unwrap()).unwrap();
            assert!((w.f - f).abs() <= 1e-10 * f.abs().max(g.abs()), "F({l},{eta},{z}) {} vs {f}", w.f);
            assert!((w.g - g).abs() <= 1e-10 * g.abs().max(f.abs()), "G({l},{eta},{z}) {} vs {g}", w.g);
        }
    }

    #[test]
    fn radial_equation_residual() {
        for (l, eta) in [(0.5, -1.0), (3.5, -18.0), (1.5, -0.2)] {
            let p = CoulombParams::new(l, eta, 1.0).unwrap();
            for z in [4.0, 11.0, 37.0] {
                let h = 1e-3;
                let val = |x: f64| coulomb_h(CoulombParams { z: x, ..p }, CoulombSign::Plus).unwrap();
                let w = val(z);
                let d2 = (val(z + 2.0 * h) * -1.0 + val(z + h) * 16.0 - w * 30.0 + val(z - h) * 16.0 - val(z - 2.0 * h)) / (12.0 * h * h);
                let res = d2 - p.potential(z) * w;
                assert!(res.norm() <= 1e-8 * w.norm().max(1.0), "({l},{eta},{z}) residual {}", res.norm());
            }
        }
    }

    /// Asymptotic series e^{iθ} Σ (a)_k (b)_k / (k! (2iz)^k), a = iη − λ, b = iη + λ + 1.
    fn h_plus_asymptotic(l: f64, eta: f64, z: f64) -> Complex64 {
        let sigma = coulomb_phase(l, eta).unwrap();
        let theta = z - eta * (2.0 * z).ln() - std::f64::consts::FRAC_PI_2 * l + sigma;
        let a = Complex64::new(-l, eta);
        let b = Complex64::new(l + 1.0, eta);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 0..60 {
            let next = term * (a + k as f64) * (b + k as f64) / (Complex64::new(0.0, 2.0 * z) * (k + 1) as f64);
            if next.norm() > term.norm() {
                break;
            }
            sum += next;
            term = next;
        }
        Complex64::from_polar(1.0, theta) * sum
    }

    #[test]
    fn large_argument_asymptotics() {
        for (l, eta) in [(0.5, -1.0), (3.5, -18.0), (0.5, 0.5), (7.5, -2.0)] {
            let z = 50.0 * (1.0 + f64::abs(eta));
            let h = coulomb_h(CoulombParams::new(l, eta, z).unwrap(), CoulombSign::Plus).unwrap();
            let want = h_plus_asymptotic(l, eta, z);
            assert!((h - want).norm() <= 1e-8 * want.norm(), "({l},{eta},{z}) {h} vs {want}");
            let far = coulomb_h(CoulombParams::new(l, eta, 1e3 * z).unwrap(), CoulombSign::Minus).unwrap();
            assert!((far.norm() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(CoulombParams::new(0.5, 1.0, 0.0).is_err());
        assert!(CoulombParams::new(-1.0, 1.0, 1.0).is_err());
    }
}
