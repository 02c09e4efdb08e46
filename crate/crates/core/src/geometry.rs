//! Radial compactifications, height functions and the numerical check of
//! the hypotheses that make the compactified equation regular at ρ = 1.
//!
//! Everything near the boundary is written in terms of s = 1/r, which is
//! smooth in ρ and vanishes at ρ = 1, so that no difference of nearly equal
//! quantities is formed.

use crate::error::{Error, Result};
use crate::media::Medium;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compactification {
    /// r = ρ/(1−ρ).
    Standard,
    /// r = 2ρ/(1−ρ²), the Poincaré–Beltrami disk.
    Hyperbolic,
}

pub fn standard_compactification() -> Compactification {
    Compactification::Standard
}

pub fn hyperbolic_compactification() -> Compactification {
    Compactification::Hyperbolic
}

impl Compactification {
    pub fn r_of_rho(self, rho: f64) -> f64 {
        match self {
            Self::Standard => rho / (1.0 - rho),
            Self::Hyperbolic => 2.0 * rho / ((1.0 - rho) * (1.0 + rho)),
        }
    }

    pub fn dr_drho(self, rho: f64) -> f64 {
        match self {
            Self::Standard => 1.0 / ((1.0 - rho) * (1.0 - rho)),
            Self::Hyperbolic => {
                let w = (1.0 - rho) * (1.0 + rho);
                2.0 * (1.0 + rho * rho) / (w * w)
            }
        }
    }

    /// G = 1/r′.
    pub fn g(self, rho: f64) -> f64 {
        match self {
            Self::Standard => (1.0 - rho) * (1.0 - rho),
            Self::Hyperbolic => {
                let w = (1.0 - rho) * (1.0 + rho);
                w * w / (2.0 * (1.0 + rho * rho))
            }
        }
    }

    pub fn g_prime(self, rho: f64) -> f64 {
        match self {
            Self::Standard => -2.0 * (1.0 - rho),
            Self::Hyperbolic => {
                let p = 1.0 + rho * rho;
                -rho * (1.0 - rho) * (1.0 + rho) * (3.0 + rho * rho) / (p * p)
            }
        }
    }

    /// s = 1/r, zero on the boundary.
    pub fn s(self, rho: f64) -> f64 {
        match self {
            Self::Standard => (1.0 - rho) / rho,
            Self::Hyperbolic => (1.0 - rho) * (1.0 + rho) / (2.0 * rho),
        }
    }

    /// 1/(G r²), the angular coefficient. Equals −ds/dρ.
    pub fn inv_g_r2(self, rho: f64) -> f64 {
        match self {
            Self::Standard => 1.0 / (rho * rho),
            Self::Hyperbolic => (1.0 + rho * rho) / (2.0 * rho * rho),
        }
    }

    /// r²G in closed form, so that the limit is sampled without overflow.
    pub fn r2_g(self, rho: f64) -> f64 {
        match self {
            Self::Standard => rho * rho,
            Self::Hyperbolic => 2.0 * rho * rho / (1.0 + rho * rho),
        }
    }

    pub fn eta_limit(self) -> f64 {
        1.0
    }

    pub fn rho_of_r(self, r: f64) -> f64 {
        if r.is_infinite() {
            return 1.0;
        }
        match self {
            Self::Standard => r / (1.0 + r),
            Self::Hyperbolic => r / (1.0 + (1.0 + r * r).sqrt()),
        }
    }

    /// Image of the obstacle radius r = 1.
    pub fn rho_obstacle(self) -> f64 {
        match self {
            Self::Standard => 0.5,
            Self::Hyperbolic => std::f64::consts::SQRT_2 - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Incoming,
    Outgoing,
}

impl Direction {
    /// −1 for incoming, +1 for outgoing.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Incoming => -1.0,
            Direction::Outgoing => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Incoming => Direction::Outgoing,
            Direction::Outgoing => Direction::Incoming,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HeightProfile {
    /// h = ±N(r) for the given medium.
    Characteristic(Medium),
    /// h = ±√(1+r²).
    Hyperboloid,
    /// H ≡ ±c. Only useful as a counterexample.
    ConstantBoost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightFunction {
    pub direction: Direction,
    pub profile: HeightProfile,
}

pub fn characteristic_height(medium: &Medium, direction: Direction) -> Result<HeightFunction> {
    if !medium.has_eikonal() {
        return Err(Error::Unsupported(format!(
            "{} medium has no eikonal primitive; characteristic heights need a radial n(r) with known N(r)",
            medium.tail_class().name()
        )));
    }
    Ok(HeightFunction { direction, profile: HeightProfile::Characteristic(*medium) })
}

pub fn hyperboloid_height(direction: Direction) -> HeightFunction {
    HeightFunction { direction, profile: HeightProfile::Hyperboloid }
}

pub fn constant_boost_height(boost: f64, direction: Direction) -> HeightFunction {
    HeightFunction { direction, profile: HeightProfile::ConstantBoost(boost) }
}

impl HeightFunction {
    /// H as a function of s = 1/r.
    pub fn boost_s(&self, s: f64) -> f64 {
        let sign = self.direction.sign();
        match self.profile {
            HeightProfile::Characteristic(m) => sign * m.n_squared_s(s, 0.0).sqrt(),
            HeightProfile::Hyperboloid => sign / (1.0 + s * s).sqrt(),
            HeightProfile::ConstantBoost(c) => sign * c,
        }
    }

    pub fn boost(&self, comp: Compactification, rho: f64) -> f64 {
        self.boost_s(comp.s(rho))
    }

    pub fn dboost_ds(&self, s: f64) -> f64 {
        let sign = self.direction.sign();
        match self.profile {
            HeightProfile::Characteristic(m) => {
                let n = m.n_squared_s(s, 0.0).sqrt();
                sign * m.dn2_ds(s, 0.0) / (2.0 * n)
            }
            HeightProfile::Hyperboloid => {
                let q = 1.0 + s * s;
                -sign * s / (q * q.sqrt())
            }
            HeightProfile::ConstantBoost(_) => 0.0,
        }
    }

    pub fn dboost_drho(&self, comp: Compactification, rho: f64) -> f64 {
        -self.dboost_ds(comp.s(rho)) * comp.inv_g_r2(rho)
    }

    /// The height h(r) where it is known in closed form.
    pub fn h_at(&self, r: f64) -> Option<f64> {
        let sign = self.direction.sign();
        match self.profile {
            HeightProfile::Characteristic(m) => m.eikonal(r).map(|n| sign * n),
            HeightProfile::Hyperboloid => Some(sign * (1.0 + r * r).sqrt()),
            HeightProfile::ConstantBoost(c) => Some(sign * c * r),
        }
    }

    /// (n² − H²)/G with the cancellation worked out by hand.
    pub fn deficit_over_g(&self, comp: Compactification, medium: &Medium, rho: f64, theta: f64) -> f64 {
        if let HeightProfile::Characteristic(m) = self.profile {
            if m == *medium {
                return 0.0;
            }
        }
        let s = comp.s(rho);
        let height_part = match self.profile {
            HeightProfile::Characteristic(m) => -m.b_over_s2(s, theta),
            HeightProfile::Hyperboloid => 1.0 / (1.0 + s * s),
            HeightProfile::ConstantBoost(c) => (1.0 - c) * (1.0 + c) / (s * s),
        };
        (medium.b_over_s2(s, theta) + height_part) * comp.inv_g_r2(rho)
    }
}

/// Outcome of [`validate_theorem_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Extrapolated lim r²G.
    pub eta_estimate: f64,
    pub eta_ok: bool,
    /// Extrapolated lim (n²−H²)/G, maximised over θ in absolute value.
    pub deficit_limit: f64,
    pub deficit_bounded: bool,
    /// Extrapolated lim H.
    pub boost_limit: f64,
    /// H² ≤ n² on the sample and H → ±1 with the direction's sign.
    pub boost_ok: bool,
    pub failures: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const LIMIT_TOL: f64 = 1e-6;
const J_FIRST: i32 = 4;
const J_LAST: i32 = 20;

/// Richardson extrapolation of a sequence sampled at h_j = 2^{−j},
/// assuming an expansion in integer powers of h.
pub fn richardson(values: &[f64]) -> f64 {
    let levels = values.len().min(4);
    let mut row: Vec<f64> = values[values.len() - levels..].to_vec();
    for k in 1..levels {
        let f = (1u64 << k) as f64;
        for i in (k..levels).rev() {
            row[i] = row[i] + (row[i] - row[i - 1]) / (f - 1.0);
        }
    }
    row[levels - 1]
}

fn boundary_samples() -> Vec<f64> {
    (J_FIRST..=J_LAST).map(|j| 1.0 - 2f64.powi(-j)).collect()
}

/// Samples ρ → 1 and checks that r²G has a positive limit, that
/// (n² − H²)/G stays bounded and that the boost is admissible.
pub fn validate_theorem_hypotheses(comp: Compactification, height: &HeightFunction, medium: &Medium) -> HypothesisReport {
    let rhos = boundary_samples();
    let mut failures = Vec::new();

    let eta_seq: Vec<f64> = rhos.iter().map(|&rho| comp.r2_g(rho)).collect();
    let eta_estimate = richardson(&eta_seq);
    let eta_ok = eta_estimate.is_finite() && eta_estimate > 0.0 && (eta_estimate - comp.eta_limit()).abs() <= LIMIT_TOL;
    if !eta_ok {
        failures.push(format!(
            "compactification condition fails: r²G → {eta_estimate}, expected {}",
            comp.eta_limit()
        ));
    }

    let thetas: Vec<f64> = if medium.is_radial() {
        vec![0.0]
    } else {
        (0..16).map(|j| std::f64::consts::PI * j as f64 / 8.0).collect()
    };
    let mut deficit_limit: f64 = 0.0;
    let mut deficit_bounded = true;
    for &theta in &thetas {
        let seq: Vec<f64> = rhos.iter().map(|&rho| height.deficit_over_g(comp, medium, rho, theta)).collect();
        let mid = seq[(seq.len() - 1) / 2].abs();
        let last = seq[seq.len() - 1];
        if seq.iter().any(|v| !v.is_finite()) || last.abs() > 10.0 * (1.0 + mid) {
            deficit_bounded = false;
            deficit_limit = f64::INFINITY;
            break;
        }
        let lim = richardson(&seq);
        if lim.abs() > deficit_limit.abs() {
            deficit_limit = lim;
        }
    }
    if !deficit_bounded {
        failures.push(format!(
            "rate condition n² − H² = O(G) fails: (n² − H²)/G grows without bound as ρ → 1 ({} medium, {:?} height)",
            medium.tail_class().name(),
            height.profile_name()
        ));
    }

    let boost_seq: Vec<f64> = rhos.iter().map(|&rho| height.boost(comp, rho)).collect();
    let boost_limit = richardson(&boost_seq);
    let mut boost_ok = (boost_limit - height.direction.sign()).abs() <= LIMIT_TOL;
    if !boost_ok {
        failures.push(format!(
            "boost must tend to {} at the boundary, got {boost_limit}",
            height.direction.sign()
        ));
    }
    let dense = (1..400).map(|i| i as f64 / 400.0).chain(rhos.iter().copied());
    for rho in dense {
        let h = height.boost(comp, rho);
        let s = comp.s(rho);
        let n2 = thetas.iter().map(|&t| medium.n_squared_s(s, t)).fold(f64::INFINITY, f64::min);
        if h * h > n2.max(1.0) * (1.0 + 1e-12) {
            boost_ok = false;
            failures.push(format!("boost |H| = {} exceeds max(1, n) at ρ = {rho}", h.abs()));
            break;
        }
    }

    HypothesisReport { eta_estimate, eta_ok, deficit_limit, deficit_bounded, boost_limit, boost_ok, failures }
}

impl HeightFunction {
    pub fn profile_name(&self) -> &'static str {
        match self.profile {
            HeightProfile::Characteristic(_) => "characteristic",
            HeightProfile::Hyperboloid => "hyperboloid",
            HeightProfile::ConstantBoost(_) => "constant-boost",
        }
    }
}
