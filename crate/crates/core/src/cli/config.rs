//! Flat `key = value` run configuration with command-line overrides.

use crate::error::{Error, Result};
use crate::geometry::{hyperboloid_height, validate_theorem_hypotheses, Direction};
use crate::media::{anisotropic_medium, constant_medium, linear_medium, quadratic_medium, Medium};
use crate::pipeline::{Resolution, Route};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MAX_N_RHO: usize = 128;
pub const MAX_N_THETA: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ModalConvergence,
    BeamCompare,
    AnisotropicSelfconv,
    BarrierScan,
    ScatteringMap,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::ModalConvergence,
        Experiment::BeamCompare,
        Experiment::AnisotropicSelfconv,
        Experiment::BarrierScan,
        Experiment::ScatteringMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ModalConvergence => "modal-convergence",
            Experiment::BeamCompare => "beam-compare",
            Experiment::AnisotropicSelfconv => "anisotropic-selfconv",
            Experiment::BarrierScan => "barrier-scan",
            Experiment::ScatteringMap => "scattering-map",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment '{s}', expected one of: {}", names(&Experiment::ALL))))
    }
}

fn names(all: &[Experiment]) -> String {
    all.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediumKind {
    Constant,
    Quadratic,
    Linear,
    Anisotropic,
}

impl FromStr for MediumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(MediumKind::Constant),
            "quadratic" | "short-range" => Ok(MediumKind::Quadratic),
            "linear" | "long-range" => Ok(MediumKind::Linear),
            "anisotropic" => Ok(MediumKind::Anisotropic),
            _ => Err(Error::config(format!(
                "unknown medium '{s}', expected constant, quadratic, linear or anisotropic"
            ))),
        }
    }
}

fn parse_route(s: &str) -> Result<Route> {
    match s {
        "characteristic" => Ok(Route::Characteristic),
        "hyperbolic" => Ok(Route::Hyperbolic),
        _ => Err(Error::config(format!("unknown route '{s}', expected characteristic or hyperbolic"))),
    }
}

/// Keys a config file may set. Flags map onto the same names.
pub const KEYS: [&str; 20] = [
    "experiment",
    "medium",
    "route",
    "kappa",
    "d",
    "r0",
    "k",
    "m",
    "beta",
    "theta0",
    "nrho",
    "ntheta",
    "ref_nrho",
    "ref_ntheta",
    "k_min",
    "k_max",
    "k_points",
    "tolerance",
    "tolerance_radial",
    "out",
];

/// Raw key/value pairs, in key order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RawConfig(pub BTreeMap<String, String>);

impl RawConfig {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped. Unknown and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {lineno}: expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::config(format!("line {lineno}: unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(Error::config(format!("line {lineno}: key '{key}' has no value")));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::config(format!("line {lineno}: key '{key}' set twice")));
            }
        }
        Ok(RawConfig(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RawConfig::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key));
        self.0.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::config(format!("key '{key}': cannot parse '{s}'")))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    let items: Vec<T> = s.split(',').map(|v| parse_one(key, v)).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(format!("key '{key}' is empty")));
    }
    Ok(items)
}

/// Angles accept a plain number or `pi`, `a*pi`, `pi/b`, `a*pi/b`.
fn parse_angle(key: &str, s: &str) -> Result<f64> {
    let t = s.trim().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), parse_one::<f64>(key, b)?),
        None => (t.clone(), 1.0),
    };
    let factor = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(a) => parse_one::<f64>(key, a.strip_suffix('*').unwrap_or(a))?,
        None => return Err(Error::config(format!("key '{key}': cannot parse angle '{s}'"))),
    };
    Ok(factor * PI / den)
}

/// A fully resolved run description. Echoed verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub medium: MediumKind,
    pub route: Route,
    pub kappa: Vec<f64>,
    pub d: Vec<f64>,
    pub r0: f64,
    pub k: Vec<f64>,
    pub m: Vec<i32>,
    pub beta: Vec<f64>,
    pub theta0: f64,
    /// Sweep resolutions in config order.
    pub resolutions: Vec<Resolution>,
    pub reference: Resolution,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub tolerance: f64,
    /// Self-convergence floor for the d = 0 member of an anisotropic sweep.
    pub tolerance_radial: f64,
    pub out: PathBuf,
}

struct Defaults {
    medium: MediumKind,
    route: Route,
    kappa: &'static [f64],
    d: &'static [f64],
    k: &'static [f64],
    m: &'static [i32],
    beta: &'static [f64],
    theta0: f64,
    nrho: &'static [usize],
    tolerance: f64,
}

fn defaults(e: Experiment) -> Defaults {
    let base = Defaults {
        medium: MediumKind::Constant,
        route: Route::Characteristic,
        kappa: &[0.0],
        d: &[0.0],
        k: &[12.0],
        m: &[0, 4, 8],
        beta: &[4.0],
        theta0: PI,
        nrho: &[64],
        tolerance: 1e-7,
    };
    match e {
        Experiment::ModalConvergence => Defaults { nrho: &[8, 16, 24, 32, 48, 64], tolerance: 1e-8, ..base },
        Experiment::BeamCompare => Defaults { k: &[2.0], beta: &[1.0, 2.0, 4.0], nrho: &[16], tolerance: 1e-3, ..base },
        Experiment::AnisotropicSelfconv => Defaults {
            medium: MediumKind::Anisotropic,
            route: Route::Hyperbolic,
            kappa: &[1.0],
            d: &[0.0, 0.8, 1.6],
            k: &[2.0],
            theta0: 0.75 * PI,
            nrho: &[8, 16, 24, 32, 40, 48, 56],
            tolerance: 1e-9,
            ..base
        },
        Experiment::BarrierScan => Defaults { m: &[0, 4, 8, 16], nrho: &[16, 64], ..base },
        Experiment::ScatteringMap => base,
    }
}

impl ExperimentConfig {
    /// Resolves defaults, parses every value and checks the run is well posed
    /// before anything is solved.
    pub fn resolve(experiment: Experiment, raw: &RawConfig) -> Result<Self> {
        if let Some(e) = raw.get("experiment") {
            let named: Experiment = e.parse()?;
            if named != experiment {
                return Err(Error::config(format!("config is for experiment '{named}' but '{experiment}' was requested")));
            }
        }
        let def = defaults(experiment);
        let medium = raw.get("medium").map(str::parse).transpose()?.unwrap_or(def.medium);
        let route = raw.get("route").map(parse_route).transpose()?.unwrap_or(def.route);
        let list_f = |key: &str, dflt: &[f64]| -> Result<Vec<f64>> {
            raw.get(key).map(|s| parse_list(key, s)).transpose().map(|v| v.unwrap_or_else(|| dflt.to_vec()))
        };
        let mut kappa = list_f("kappa", def.kappa)?;
        if medium == MediumKind::Constant {
            kappa = vec![0.0];
        } else if raw.get("kappa").is_none() && def.kappa == [0.0] {
            return Err(Error::config(format!("medium '{}' needs kappa", medium_name(medium))));
        }
        let d = if medium == MediumKind::Anisotropic { list_f("d", def.d)? } else { vec![0.0] };
        let r0 = raw.get("r0").map(|s| parse_one("r0", s)).transpose()?.unwrap_or(1.0);
        let k = list_f("k", def.k)?;
        let m = raw.get("m").map(|s| parse_list("m", s)).transpose()?.unwrap_or_else(|| def.m.to_vec());
        let beta = list_f("beta", def.beta)?;
        let theta0 = raw.get("theta0").map(|s| parse_angle("theta0", s)).transpose()?.unwrap_or(def.theta0);
        let nrho: Vec<usize> = raw.get("nrho").map(|s| parse_list("nrho", s)).transpose()?.unwrap_or_else(|| def.nrho.to_vec());
        let ntheta: Option<Vec<usize>> = raw.get("ntheta").map(|s| parse_list("ntheta", s)).transpose()?;
        let resolutions = pair_resolutions(experiment, &nrho, ntheta.as_deref())?;
        let reference = Resolution::new(
            raw.get("ref_nrho").map(|s| parse_one("ref_nrho", s)).transpose()?.unwrap_or(64),
            raw.get("ref_ntheta").map(|s| parse_one("ref_ntheta", s)).transpose()?.unwrap_or(128),
        );
        let cfg = ExperimentConfig {
            experiment,
            medium,
            route,
            kappa,
            d,
            r0,
            k,
            m,
            beta,
            theta0,
            resolutions,
            reference,
            k_min: raw.get("k_min").map(|s| parse_one("k_min", s)).transpose()?.unwrap_or(1e-3),
            k_max: raw.get("k_max").map(|s| parse_one("k_max", s)).transpose()?.unwrap_or(1e3),
            k_points: raw.get("k_points").map(|s| parse_one("k_points", s)).transpose()?.unwrap_or(61),
            tolerance: raw.get("tolerance").map(|s| parse_one("tolerance", s)).transpose()?.unwrap_or(def.tolerance),
            tolerance_radial: raw.get("tolerance_radial").map(|s| parse_one("tolerance_radial", s)).transpose()?.unwrap_or(1e-10),
            out: PathBuf::from(raw.get("out").unwrap_or("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn media(&self) -> Result<Vec<Medium>> {
        match self.medium {
            MediumKind::Constant => Ok(vec![constant_medium()]),
            MediumKind::Quadratic => self.kappa.iter().map(|&k| quadratic_medium(k)).collect(),
            MediumKind::Linear => self.kappa.iter().map(|&k| linear_medium(k)).collect(),
            MediumKind::Anisotropic => self
                .kappa
                .iter()
                .flat_map(|&kappa| self.d.iter().map(move |&d| (kappa, d)))
                .map(|(kappa, d)| anisotropic_medium(kappa, d, self.r0))
                .collect(),
        }
    }

    /// The log-spaced wavenumbers of a barrier scan.
    pub fn k_grid(&self) -> Vec<f64> {
        let (a, b) = (self.k_min.log10(), self.k_max.log10());
        let n = self.k_points;
        (0..n).map(|i| 10f64.powf(if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })).collect()
    }

    fn validate(&self) -> Result<()> {
        let e = self.experiment;
        for &k in &self.k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::config(format!("wavenumber must be positive, got {k}")));
            }
        }
        for &b in &self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config(format!("beam concentration must be positive, got {b}")));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance_radial > 0.0) {
            return Err(Error::config("tolerances must be positive"));
        }
        for r in self.resolutions.iter().chain(std::iter::once(&self.reference)) {
            check_resolution(*r)?;
        }
        if let Some(&m) = self.m.iter().find(|m| 2 * m.unsigned_abs() as usize + 6 > MAX_N_THETA) {
            return Err(Error::config(format!("mode {m} needs more than {MAX_N_THETA} angular nodes")));
        }
        if e == Experiment::BarrierScan {
            if !(self.k_min > 0.0 && self.k_max >= self.k_min && self.k_max.is_finite()) || self.k_points == 0 {
                return Err(Error::config("barrier scan needs 0 < k_min ≤ k_max and k_points ≥ 1"));
            }
            if self.medium != MediumKind::Constant || self.route != Route::Characteristic {
                return Err(Error::config("barrier scan runs on the constant medium and the characteristic route only"));
            }
        }
        let radial_only = matches!(e, Experiment::ModalConvergence | Experiment::BeamCompare | Experiment::ScatteringMap);
        if radial_only && self.medium == MediumKind::Anisotropic {
            return Err(Error::config(format!("{e} needs a radial medium; anisotropic media have no closed-form reference")));
        }
        if e == Experiment::AnisotropicSelfconv {
            if self.route != Route::Hyperbolic {
                return Err(Error::config("anisotropic-selfconv runs on the hyperbolic route"));
            }
            if self.medium != MediumKind::Anisotropic {
                return Err(Error::config("anisotropic-selfconv needs medium = anisotropic"));
            }
        }
        if self.medium == MediumKind::Anisotropic && self.route == Route::Characteristic {
            return Err(Error::config("anisotropic media have no eikonal primitive; use route = hyperbolic"));
        }
        let media = self.media().map_err(|e| Error::Config(e.to_string()))?;
        if self.route == Route::Hyperbolic {
            for medium in &media {
                for dir in [Direction::Incoming, Direction::Outgoing] {
                    let report = validate_theorem_hypotheses(self.route.compactification(), &hyperboloid_height(dir), medium);
                    if !report.passed() {
                        return Err(Error::config(format!(
                            "{} medium on the hyperbolic route: {}",
                            medium.tail_class().name(),
                            report.failures.join("; ")
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn medium_name(m: MediumKind) -> &'static str {
    match m {
        MediumKind::Constant => "constant",
        MediumKind::Quadratic => "quadratic",
        MediumKind::Linear => "linear",
        MediumKind::Anisotropic => "anisotropic",
    }
}

fn check_resolution(r: Resolution) -> Result<()> {
    if !(4..=MAX_N_RHO).contains(&r.n_rho) {
        return Err(Error::config(format!("nrho must lie in [4, {MAX_N_RHO}], got {}", r.n_rho)));
    }
    if r.n_theta != 0 && (r.n_theta % 2 != 0 || r.n_theta > MAX_N_THETA) {
        return Err(Error::config(format!("ntheta must be even and at most {MAX_N_THETA}, got {}", r.n_theta)));
    }
    Ok(())
}

/// Single-mode experiments leave `n_theta = 0` so each mode gets 2|m| + 6.
/// Beam runs pair the two lists entry by entry, broadcasting a single
/// value; the self-convergence sweep defaults to Nθ = 2N_ρ.
fn pair_resolutions(e: Experiment, nrho: &[usize], ntheta: Option<&[usize]>) -> Result<Vec<Resolution>> {
    let single = matches!(e, Experiment::ModalConvergence | Experiment::BarrierScan | Experiment::ScatteringMap);
    let ntheta: Vec<usize> = match (single, ntheta) {
        (true, None) => vec![0; nrho.len()],
        (true, Some(_)) => return Err(Error::config(format!("{e} sizes the angular grid per mode; drop ntheta"))),
        (false, None) if e == Experiment::AnisotropicSelfconv => nrho.iter().map(|n| 2 * n).collect(),
        (false, None) => vec![64; nrho.len()],
        (false, Some(t)) if t.len() == nrho.len() => t.to_vec(),
        (false, Some(t)) if t.len() == 1 => vec![t[0]; nrho.len()],
        (false, Some(t)) if nrho.len() == 1 => return Ok(t.iter().map(|&nt| Resolution::new(nrho[0], nt)).collect()),
        (false, Some(t)) => {
            return Err(Error::config(format!("nrho has {} entries but ntheta has {}", nrho.len(), t.len())));
        }
    };
    if !single && ntheta.contains(&0) {
        return Err(Error::config("ntheta must be positive"));
    }
    Ok(nrho.iter().zip(ntheta).map(|(&n, t)| Resolution::new(n, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        RawConfig::parse(text).unwrap()
    }

    #[test]
    fn parses_comments_and_lists() {
        let r = raw("# run\nk = 2, 8\n\nm=0,4 # modes\nmedium = short-range\nkappa = 0.5\n");
        let c = ExperimentConfig::resolve(Experiment::ScatteringMap, &r).unwrap();
        assert_eq!(c.k, vec![2.0, 8.0]);
        assert_eq!(c.m, vec![0, 4]);
        assert_eq!(c.medium, MediumKind::Quadratic);
        assert_eq!(c.resolutions, vec![Resolution::new(64, 0)]);
    }

    #[test]
    fn rejects_malformed_files() {
        for bad in ["k 2", "colour = red", "k = 1\nk = 2", "k ="] {
            assert!(matches!(RawConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
        let r = raw("k = two");
        assert!(ExperimentConfig::resolve(Experiment::ScatteringMap, &r).is_err());
    }

    #[test]
    fn long_range_on_hyperbolic_route_cites_rate_condition() {
        let r = raw("medium = linear\nkappa = 0.5\nroute = hyperbolic");
        let err = ExperimentConfig::resolve(Experiment::ScatteringMap, &r).unwrap_err();
        assert!(matches!(err, Error::Config(ref s) if s.contains("rate condition")), "{err}");
    }

    #[test]
    fn experiment_preconditions() {
        let aniso = raw("medium = anisotropic\nkappa = 1\nroute = hyperbolic");
        assert!(ExperimentConfig::resolve(Experiment::ModalConvergence, &aniso).is_err());
        assert!(ExperimentConfig::resolve(Experiment::AnisotropicSelfconv, &raw("route = characteristic")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::BarrierScan, &raw("medium = quadratic\nkappa = 1")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::ScatteringMap, &raw("medium = quadratic")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::BeamCompare, &raw("experiment = barrier-scan")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::BeamCompare, &raw("nrho = 200")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::BeamCompare, &raw("ntheta = 63")).is_err());
    }

    #[test]
    fn selfconv_defaults() {
        let c = ExperimentConfig::resolve(Experiment::AnisotropicSelfconv, &RawConfig::default()).unwrap();
        assert_eq!(c.d, vec![0.0, 0.8, 1.6]);
        assert_eq!(c.reference, Resolution::new(64, 128));
        assert_eq!(c.resolutions[2], Resolution::new(24, 48));
        assert!((c.theta0 - 0.75 * PI).abs() < 1e-15);
        assert_eq!(c.media().unwrap().len(), 3);
    }

    #[test]
    fn angles_and_grids() {
        assert_eq!(parse_angle("t", "pi").unwrap(), PI);
        assert!((parse_angle("t", "3*pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((parse_angle("t", "pi/2").unwrap() - 0.5 * PI).abs() < 1e-15);
        assert_eq!(parse_angle("t", "0.5").unwrap(), 0.5);
        assert!(parse_angle("t", "tau").is_err());
        let c = ExperimentConfig::resolve(Experiment::BarrierScan, &raw("k_points = 7")).unwrap();
        let g = c.k_grid();
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[6] - 1e3).abs() < 1e-9 && (g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beam_resolution_pairing() {
        let c = ExperimentConfig::resolve(Experiment::BeamCompare, &raw("nrho = 16, 64\nntheta = 64, 256")).unwrap();
        assert_eq!(c.resolutions, vec![Resolution::new(16, 64), Resolution::new(64, 256)]);
        let c = ExperimentConfig::resolve(Experiment::BeamCompare, &raw("nrho = 16\nntheta = 64, 128")).unwrap();
        assert_eq!(c.resolutions.len(), 2);
        assert!(ExperimentConfig::resolve(Experiment::BeamCompare, &raw("nrho = 16, 24, 32\nntheta = 64, 128")).is_err());
        assert!(ExperimentConfig::resolve(Experiment::ModalConvergence, &raw("ntheta = 64")).is_err());
    }
}
