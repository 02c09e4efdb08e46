use super::bessel::{hankel, hankel_asymptotic_scaled};
use super::dd::{CDd, Dd};
use super::gamma::log_gamma_complex;
use super::Kind;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest supported |ν|.
pub const MAX_COMPLEX_ORDER: f64 = 200.0;
/// Achieved relative accuracy below which a value is returned.
const TARGET: f64 = 1e-10;
/// Above this argument the ascending series loses too many digits.
const LARGE_Z: f64 = 40.0;
/// |sin πν| below which the connection formula is replaced by interpolation.
const NEAR_INTEGER: f64 = 1e-2;
const CIRCLE_RADIUS: f64 = 0.25;
const CIRCLE_NODES: usize = 24;

/// J_ν(z) from the ascending series summed in double-double, with an
/// estimate of the relative error.
fn bessel_j_series(nu: Complex64, z: f64) -> Result<(Complex64, f64)> {
    let lg = log_gamma_complex(nu + 1.0)?;
    let exponent = nu * (0.5 * z).ln() - lg;
    let w = Dd::new(z) * Dd::new(z);
    let w = -(w.mul_f64(0.25));
    let nu_dd = CDd::from_c64(nu);
    let mut term = CDd::ONE;
    let mut sum = CDd::ONE;
    let mut largest: f64 = 1.0;
    let mut j = 1usize;
    loop {
        let jd = Dd::new(j as f64);
        let den = CDd::new(nu_dd.re.mul_f64(j as f64) + jd * jd, nu_dd.im.mul_f64(j as f64));
        term = term.scale(w) / den;
        sum = sum + term;
        let size = term.norm();
        largest = largest.max(size);
        if size <= 1e-33 * sum.norm() && j as f64 > 0.5 * z {
            break;
        }
        j += 1;
        if j > 5000 {
            return Err(Error::precision(format!("J_{nu}({z}) series did not converge"), f64::INFINITY));
        }
    }
    let scale = exponent.exp();
    if !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::range(format!("J_{nu}({z}) overflows")));
    }
    let s = sum.to_c64();
    let series_err = largest * 1e-31 * j as f64 / s.norm();
    let prefactor_err = 4.0 * f64::EPSILON * (1.0 + exponent.norm());
    Ok((scale * s, series_err + prefactor_err))
}

fn connection(nu: Complex64, kind: Kind, z: f64) -> Result<(Complex64, f64)> {
    let (jp, ep) = bessel_j_series(nu, z)?;
    let (jm, em) = bessel_j_series(-nu, z)?;
    let ipnu = Complex64::i() * PI * nu;
    let sin = (PI * nu).sin();
    let (a, b) = match kind {
        Kind::First => (jm, -(-ipnu).exp() * jp),
        Kind::Second => (-jm, ipnu.exp() * jp),
    };
    let num = a + b;
    let h = num / (Complex64::i() * sin);
    if !(h.re.is_finite() && h.im.is_finite()) {
        return Err(Error::range(format!("H_{nu}({z}) overflows")));
    }
    let err = (a.norm() * em + b.norm() * ep) / num.norm() + 4.0 * f64::EPSILON;
    Ok((h, err))
}

/// Cauchy-circle interpolation in ν around the nearest integer.
fn near_integer(nu: Complex64, kind: Kind, z: f64) -> Result<(Complex64, f64)> {
    let n = nu.re.round();
    let eps = nu - n;
    let m = CIRCLE_NODES;
    let mut values = Vec::with_capacity(m);
    let mut err: f64 = 0.0;
    for j in 0..m {
        let node = Complex64::from_polar(CIRCLE_RADIUS, 2.0 * PI * j as f64 / m as f64);
        let (v, e) = connection(node + n, kind, z)?;
        err = err.max(e * v.norm());
        values.push(v);
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for p in 0..m {
        let mut c = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            c += v * Complex64::from_polar(1.0, -2.0 * PI * (j * p) as f64 / m as f64);
        }
        c /= m as f64;
        total += c * (eps / CIRCLE_RADIUS).powu(p as u32);
        scale = scale.max(values[p].norm());
    }
    Ok((total, err / total.norm() + 1e-15 * scale / total.norm()))
}

/// Asymptotic values at the fractional order, then forward recurrence in ν.
fn recurrence_from_asymptotic(nu: Complex64, kind: Kind, z: f64) -> Option<Complex64> {
    let steps = nu.re.floor().max(0.0);
    let nu0 = nu - steps;
    let (h0, e0) = hankel_asymptotic_scaled(nu0, kind, z);
    let (h1, e1) = hankel_asymptotic_scaled(nu0 + 1.0, kind, z);
    if e0.max(e1) > 1e-13 {
        return None;
    }
    let (mut prev, mut cur) = (h0, h1);
    let mut order = nu0 + 1.0;
    for _ in 1..steps as usize {
        let next = cur * (2.0 * order / z) - prev;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    let scaled = if steps == 0.0 { h0 } else { cur };
    let rot = match kind {
        Kind::First => Complex64::new(0.0, z).exp(),
        Kind::Second => Complex64::new(0.0, -z).exp(),
    };
    let h = scaled * rot;
    (h.re.is_finite() && h.im.is_finite()).then_some(h)
}

/// Hankel function H^{(1)}_ν(z) or H^{(2)}_ν(z) of complex order and positive real argument.
pub fn hankel_complex_order(nu: Complex64, kind: Kind, z: f64) -> Result<Complex64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Hankel argument must be positive, got {z}")));
    }
    if !(nu.norm() <= MAX_COMPLEX_ORDER) {
        return Err(Error::domain(format!("order {nu} beyond supported |ν| ≤ {MAX_COMPLEX_ORDER}")));
    }
    if nu.im == 0.0 && nu.re == nu.re.round() {
        return hankel(nu.re as i32, kind, z);
    }
    if nu.re < 0.0 {
        let reflect = match kind {
            Kind::First => (Complex64::i() * PI * (-nu)).exp(),
            Kind::Second => (-Complex64::i() * PI * (-nu)).exp(),
        };
        return Ok(reflect * hankel_complex_order(-nu, kind, z)?);
    }
    if z >= LARGE_Z {
        if let Some(h) = recurrence_from_asymptotic(nu, kind, z) {
            return Ok(h);
        }
    }
    let (h, err) = if (PI * nu).sin().norm() < NEAR_INTEGER {
        near_integer(nu, kind, z)?
    } else {
        connection(nu, kind, z)?
    };
    if err > TARGET {
        return Err(Error::precision(format!("H_{nu}({z})"), err));
    }
    Ok(h)
}

/// Bessel function J_ν(z) of complex order from the ascending series.
pub fn bessel_j_complex_order(nu: Complex64, z: f64) -> Result<Complex64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be positive, got {z}")));
    }
    let (j, err) = bessel_j_series(nu, z)?;
    if err > TARGET {
        return Err(Error::precision(format!("J_{nu}({z})"), err));
    }
    Ok(j)
}
