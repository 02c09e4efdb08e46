//! Refractive-index models n² = 1 + b.
//!
//! Media are evaluated in s = 1/r so that the boundary ρ = 1 is s = 0 and
//! b/s², the quantity the compactified operator needs, stays finite
//! for every short-range model.

use crate::error::{Error, Result};
use crate::geometry::{richardson, Compactification};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailClass {
    Constant,
    ShortRange,
    LongRange,
    Anisotropic,
}

impl TailClass {
    pub fn name(self) -> &'static str {
        match self {
            TailClass::Constant => "constant",
            TailClass::ShortRange => "short-range",
            TailClass::LongRange => "long-range",
            TailClass::Anisotropic => "anisotropic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Medium {
    tail_class: TailClass,
    kappa: f64,
    offset_d: f64,
    core_r0: f64,
    /// Integration constant of the long-range eikonal.
    #[serde(skip)]
    eikonal_offset: f64,
}

pub fn constant_medium() -> Medium {
    Medium { tail_class: TailClass::Constant, kappa: 0.0, offset_d: 0.0, core_r0: 0.0, eikonal_offset: 0.0 }
}

/// n² = 1 + κ²/r².
pub fn quadratic_medium(kappa: f64) -> Result<Medium> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("quadratic medium needs finite κ ≥ 0, got {kappa}")));
    }
    Ok(Medium { tail_class: TailClass::ShortRange, kappa, offset_d: 0.0, core_r0: 0.0, eikonal_offset: 0.0 })
}

/// n² = 1 + κ/r. κ = 0 gives the constant medium.
pub fn linear_medium(kappa: f64) -> Result<Medium> {
    if kappa == 0.0 {
        return Ok(constant_medium());
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("linear medium needs finite κ > 0, got {kappa}")));
    }
    Ok(Medium {
        tail_class: TailClass::LongRange,
        kappa,
        offset_d: 0.0,
        core_r0: 0.0,
        eikonal_offset: linear_eikonal_constant(kappa),
    })
}

/// n² = 1 + κ²/(r² + d² + 2dr cosθ + r₀²).
pub fn anisotropic_medium(kappa: f64, offset_d: f64, core_r0: f64) -> Result<Medium> {
    for (name, v) in [("κ", kappa), ("d", offset_d), ("r₀", core_r0)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("anisotropic medium needs finite {name} ≥ 0, got {v}")));
        }
    }
    // On r ≥ 1 the denominator is at least (r − d)² + r₀².
    if core_r0 == 0.0 && offset_d >= 1.0 {
        return Err(Error::domain(format!(
            "anisotropic medium with r₀ = 0 and d = {offset_d} ≥ 1 is singular on the annulus"
        )));
    }
    Ok(Medium { tail_class: TailClass::Anisotropic, kappa, offset_d, core_r0, eikonal_offset: 0.0 })
}

/// Φ(r; κ) = r + (κ/2) ln r.
pub fn long_range_phase(r: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return r;
    }
    r + 0.5 * kappa * r.ln()
}

/// √(r(r+κ)) − κ ln(√(r+κ) − √r) − Φ(r; κ), rearranged to avoid cancellation.
fn linear_eikonal_excess(r: f64, kappa: f64) -> f64 {
    let q = (1.0 + kappa / r).sqrt() + 1.0;
    kappa / q - kappa * kappa.ln() + kappa * q.ln()
}

/// The constant C(κ) making N(r) − Φ(r; κ) → 0, by Richardson extrapolation
/// of the excess at r = κ·2^j.
pub fn linear_eikonal_constant(kappa: f64) -> f64 {
    let seq: Vec<f64> = (4..=20).map(|j| linear_eikonal_excess(kappa * 2f64.powi(j), kappa)).collect();
    richardson(&seq)
}

/// ½(κ + ln(2/κ)), the constant as it appears in print. Kept for comparison only.
pub fn printed_linear_eikonal_constant(kappa: f64) -> f64 {
    0.5 * (kappa + (2.0 / kappa).ln())
}

impl Medium {
    pub fn tail_class(&self) -> TailClass {
        self.tail_class
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn offset_d(&self) -> f64 {
        self.offset_d
    }

    pub fn core_r0(&self) -> f64 {
        self.core_r0
    }

    pub fn is_radial(&self) -> bool {
        self.tail_class != TailClass::Anisotropic || self.offset_d == 0.0 || self.kappa == 0.0
    }

    pub fn has_eikonal(&self) -> bool {
        self.tail_class != TailClass::Anisotropic
    }

    fn aniso_denominator(&self, s: f64, theta: f64) -> f64 {
        let d = self.offset_d;
        1.0 + (d * d + self.core_r0 * self.core_r0) * s * s + 2.0 * d * s * theta.cos()
    }

    /// b/s² = (n² − 1)r². Infinite at s = 0 for the long-range class.
    pub fn b_over_s2(&self, s: f64, theta: f64) -> f64 {
        match self.tail_class {
            TailClass::Constant => 0.0,
            TailClass::ShortRange => self.kappa * self.kappa,
            TailClass::LongRange => self.kappa / s,
            TailClass::Anisotropic => self.kappa * self.kappa / self.aniso_denominator(s, theta),
        }
    }

    /// n² as a function of s = 1/r.
    pub fn n_squared_s(&self, s: f64, theta: f64) -> f64 {
        match self.tail_class {
            TailClass::Constant => 1.0,
            TailClass::ShortRange => 1.0 + self.kappa * self.kappa * s * s,
            TailClass::LongRange => 1.0 + self.kappa * s,
            TailClass::Anisotropic => 1.0 + self.kappa * self.kappa * s * s / self.aniso_denominator(s, theta),
        }
    }

    pub fn dn2_ds(&self, s: f64, theta: f64) -> f64 {
        match self.tail_class {
            TailClass::Constant => 0.0,
            TailClass::ShortRange => 2.0 * self.kappa * self.kappa * s,
            TailClass::LongRange => self.kappa,
            TailClass::Anisotropic => {
                let den = self.aniso_denominator(s, theta);
                2.0 * self.kappa * self.kappa * s * (1.0 + self.offset_d * s * theta.cos()) / (den * den)
            }
        }
    }

    pub fn n_squared(&self, r: f64, theta: f64) -> f64 {
        self.n_squared_s(1.0 / r, theta)
    }

    pub fn n_squared_at(&self, comp: Compactification, rho: f64, theta: f64) -> f64 {
        self.n_squared_s(comp.s(rho), theta)
    }

    /// Eikonal primitive N with N′ = n, normalised so that N ~ Φ(r; κ) at infinity.
    pub fn eikonal(&self, r: f64) -> Option<f64> {
        let k = self.kappa;
        match self.tail_class {
            TailClass::Constant => Some(r),
            TailClass::ShortRange => Some((r * r + k * k).sqrt() - k * (k / r).asinh()),
            TailClass::LongRange => Some(long_range_phase(r, k) + linear_eikonal_excess(r, k) - self.eikonal_offset),
            TailClass::Anisotropic => None,
        }
    }

    /// The far-field phase the medium imposes, Φ(r; κ) for long-range media and r otherwise.
    pub fn asymptotic_phase(&self, r: f64) -> f64 {
        match self.tail_class {
            TailClass::LongRange => long_range_phase(r, self.kappa),
            _ => r,
        }
    }

    pub fn eikonal_offset(&self) -> f64 {
        self.eikonal_offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn log_grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| a * (b / a).powf(i as f64 / (n - 1) as f64))
    }

    fn check_primitive(m: &Medium) {
        for r in log_grid(1.0, 100.0, 60) {
            let h = 1e-3 * r;
            let n = |x: f64| m.eikonal(x).unwrap();
            let fd = (8.0 * (n(r + h) - n(r - h)) - (n(r + 2.0 * h) - n(r - 2.0 * h))) / (12.0 * h);
            assert!((fd - m.n_squared(r, 0.0).sqrt()).abs() < 1e-10, "{m:?} at {r}");
        }
    }

    #[test]
    fn constant_basics() {
        let m = constant_medium();
        assert_eq!(m.n_squared(3.0, 1.0), 1.0);
        assert_eq!(m.eikonal(2.0).unwrap() - m.eikonal(1.0).unwrap(), 1.0);
        assert_eq!(m.tail_class(), TailClass::Constant);
    }

    #[test]
    fn quadratic_basics() {
        let m = quadratic_medium(1.0).unwrap();
        assert!((m.n_squared(1.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((m.eikonal(1.0).unwrap() - (2f64.sqrt() - (1.0 + 2f64.sqrt()).ln())).abs() < 1e-15);
        assert!((m.eikonal(1.0).unwrap() - 0.532_839_9).abs() < 1e-7);
        check_primitive(&m);
        check_primitive(&quadratic_medium(0.99).unwrap());
        assert!(quadratic_medium(-1.0).is_err());
    }

    #[test]
    fn linear_eikonal() {
        let m = linear_medium(0.5).unwrap();
        check_primitive(&m);
        check_primitive(&linear_medium(0.9).unwrap());
        for j in 2..=6 {
            let r = 10f64.powi(j);
            let gap = m.eikonal(r).unwrap() - long_range_phase(r, 0.5);
            assert!(gap.abs() < 0.5 / r, "r = {r}: {gap}");
        }
        let tiny = linear_medium(1e-12).unwrap();
        for r in [1.0, 3.0, 10.0] {
            assert!((tiny.eikonal(r).unwrap() - r).abs() < 1e-9);
        }
        assert_eq!(linear_medium(0.0).unwrap(), constant_medium());
        assert!(linear_medium(-0.5).is_err());
    }

    #[test]
    fn linear_constant_against_print() {
        // Closed form of the limit: κ/2 + κ ln(2/κ).
        for kappa in [0.1, 0.5, 0.9, 2.0] {
            let c = linear_eikonal_constant(kappa);
            let closed = 0.5 * kappa + kappa * (2.0 / kappa).ln();
            assert!((c - closed).abs() < 1e-12, "{kappa}: {c} vs {closed}");
            let printed = printed_linear_eikonal_constant(kappa);
            if (printed - c).abs() > 1e-12 {
                println!("C({kappa}): limit {c:.15}, printed form {printed:.15}, mismatch {:.3e}", printed - c);
            }
        }
    }

    #[test]
    fn phase() {
        for kappa in [0.0, 0.3, 7.0] {
            assert_eq!(long_range_phase(1.0, kappa), 1.0);
        }
        assert!((long_range_phase(E, 2.0) - (E + 1.0)).abs() < 1e-15);
        assert_eq!(long_range_phase(4.2, 0.0), 4.2);
    }

    #[test]
    fn anisotropic_basics() {
        let m = anisotropic_medium(1.0, 1.0, 1.0).unwrap();
        assert!((m.n_squared(1.0, PI) - 2.0).abs() < 1e-15);
        for r in [1.0, 2.5, 40.0] {
            for t in [0.3, 1.7, 3.0] {
                assert_eq!(m.n_squared(r, t), m.n_squared(r, -t));
            }
        }
        let collapsed = anisotropic_medium(0.7, 0.0, 0.0).unwrap();
        let q = quadratic_medium(0.7).unwrap();
        for r in [1.0, 3.0, 9.0] {
            assert!((collapsed.n_squared(r, 0.4) - q.n_squared(r, 0.0)).abs() < 1e-15);
        }
        assert!(collapsed.is_radial());
        assert!(!m.is_radial());
        assert!(m.eikonal(2.0).is_none());
        assert!(anisotropic_medium(1.0, 1.5, 0.0).is_err());
        assert!(anisotropic_medium(1.0, 0.8, 0.0).is_ok());
    }

    #[test]
    fn anisotropic_derivative() {
        let m = anisotropic_medium(1.0, 1.6, 1.0).unwrap();
        for s in [0.0, 0.2, 0.9] {
            for t in [0.0, 2.0] {
                let h = 1e-6;
                let fd = (m.n_squared_s(s + h, t) - m.n_squared_s(s - h, t)) / (2.0 * h);
                assert!((fd - m.dn2_ds(s, t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tails_decay_at_expected_rates() {
        let comp = Compactification::Standard;
        let media = [
            quadratic_medium(0.99).unwrap(),
            linear_medium(0.9).unwrap(),
            anisotropic_medium(1.0, 1.6, 1.0).unwrap(),
        ];
        for m in media {
            for j in 4..20 {
                let rho = 1.0 - 2f64.powi(-j);
                let dev = (0..32)
                    .map(|i| (m.n_squared_at(comp, rho, PI * i as f64 / 16.0) - 1.0).abs())
                    .fold(0.0, f64::max);
                let bound = match m.tail_class() {
                    TailClass::LongRange => 2.0 * (1.0 - rho),
                    _ => 2.0 * comp.g(rho),
                };
                assert!(dev <= bound, "{m:?} {rho}");
            }
        }
    }
}
