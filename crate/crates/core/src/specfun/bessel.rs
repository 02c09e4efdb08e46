use super::Kind;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Above this argument the Hankel asymptotic expansion seeds orders 0 and 1.
const ASYMPTOTIC_SWITCH: f64 = 25.0;
/// Largest supported integer order.
pub const MAX_INTEGER_ORDER: u32 = 512;
const RESCALE: f64 = 1e250;

fn check_argument(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be positive and finite, got {z}")));
    }
    Ok(())
}

/// Hankel asymptotic series for H^{(1)}_ν(z)·e^{−iz} (or H^{(2)}_ν(z)·e^{iz}).
/// Returns the value and an estimate of its relative truncation error.
pub(crate) fn hankel_asymptotic_scaled(nu: Complex64, kind: Kind, z: f64) -> (Complex64, f64) {
    let mu = 4.0 * nu * nu;
    let unit = match kind {
        Kind::First => Complex64::i(),
        Kind::Second => -Complex64::i(),
    };
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    let mut err = 0.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) * unit / (8.0 * k as f64 * z);
        let size = next.norm();
        if size > last {
            err = last / sum.norm();
            break;
        }
        sum += next;
        term = next;
        last = size;
        if size <= 1e-17 * sum.norm() {
            err = size / sum.norm();
            break;
        }
    }
    let phase = match kind {
        Kind::First => (-Complex64::i() * (nu * FRAC_PI_2 + FRAC_PI_4)).exp(),
        Kind::Second => (Complex64::i() * (nu * FRAC_PI_2 + FRAC_PI_4)).exp(),
    };
    ((2.0 / (PI * z)).sqrt() * phase * sum, err.max(f64::EPSILON))
}

/// J_n(z) for n = 0..=n_max by Miller's backward recurrence, normalized by
/// J_0 + 2 Σ J_{2k} = 1. Accurate for any n at moderate z.
pub(crate) fn bessel_j_sequence(n_max: usize, z: f64) -> Vec<f64> {
    let reach = n_max.max(z.ceil() as usize);
    let mut start = reach + 20 + (40.0 * (reach as f64 + 1.0)).sqrt() as usize;
    start += start % 2;
    let mut v = vec![0.0; start + 2];
    v[start] = 1.0;
    for n in (1..=start).rev() {
        v[n - 1] = (2.0 * n as f64 / z) * v[n] - v[n + 1];
        if v[n - 1].abs() > RESCALE {
            for x in v[n - 1..].iter_mut() {
                *x /= RESCALE;
            }
        }
    }
    let norm = v[0] + 2.0 * v.iter().skip(2).step_by(2).sum::<f64>();
    v.truncate(n_max + 1);
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

fn integer_jy_small(n_max: usize, z: f64) -> Result<Vec<Complex64>> {
    let top = n_max.max(2);
    let j = bessel_j_sequence(top + 40 + (z as usize) * 2, z);
    let lg = (0.5 * z).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..j.len() / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        if 2 * k + 1 < j.len() {
            s1 -= sign * (2 * k + 1) as f64 / (k * (k + 1)) as f64 * j[2 * k + 1];
        }
    }
    let y0 = (2.0 / PI) * (lg * j[0] - 2.0 * s0);
    let y1 = (2.0 / PI) * (lg * j[1] - j[0] / z - j[1] + s1);
    let mut y = Vec::with_capacity(n_max + 1);
    y.push(y0);
    y.push(y1);
    for n in 1..n_max {
        let next = (2.0 * n as f64 / z) * y[n] - y[n - 1];
        if !next.is_finite() {
            return Err(Error::range(format!("Y_{} ({z}) overflows", n + 1)));
        }
        y.push(next);
    }
    Ok((0..=n_max).map(|n| Complex64::new(j[n], y[n])).collect())
}

/// H^{(1)}_n(z)·e^{−iz} for n = 0..=n_max.
pub fn hankel1_scaled_sequence(n_max: usize, z: f64) -> Result<Vec<Complex64>> {
    check_argument(z)?;
    if n_max > MAX_INTEGER_ORDER as usize {
        return Err(Error::domain(format!("order {n_max} beyond supported range {MAX_INTEGER_ORDER}")));
    }
    let seq = if z >= ASYMPTOTIC_SWITCH {
        let (h0, _) = hankel_asymptotic_scaled(Complex64::new(0.0, 0.0), Kind::First, z);
        let (h1, _) = hankel_asymptotic_scaled(Complex64::new(1.0, 0.0), Kind::First, z);
        let mut seq = vec![h0, h1];
        for n in 1..n_max {
            let next = (2.0 * n as f64 / z) * seq[n] - seq[n - 1];
            if !(next.re.is_finite() && next.im.is_finite()) {
                return Err(Error::range(format!("H_{} ({z}) overflows", n + 1)));
            }
            seq.push(next);
        }
        seq.truncate(n_max + 1);
        seq
    } else {
        let rot = Complex64::new(0.0, -z).exp();
        integer_jy_small(n_max, z)?.into_iter().map(|h| h * rot).collect()
    };
    Ok(seq)
}

fn parity(m: i32) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// H^{(1)}_n(z) for n = 0..=n_max, unscaled. Above the order z/2 the real
/// part is replaced by Miller's J, which the rotated recurrence would swamp
/// with rounding from the much larger Y.
fn hankel1_sequence(n_max: usize, z: f64) -> Result<Vec<Complex64>> {
    if z < ASYMPTOTIC_SWITCH {
        check_argument(z)?;
        return integer_jy_small(n_max, z);
    }
    let rot = Complex64::new(0.0, z).exp();
    let mut seq: Vec<Complex64> = hankel1_scaled_sequence(n_max, z)?.into_iter().map(|h| h * rot).collect();
    if n_max as f64 > 0.5 * z {
        let j = bessel_j_sequence(n_max, z);
        for (n, h) in seq.iter_mut().enumerate().skip((0.5 * z) as usize) {
            h.re = j[n];
        }
    }
    Ok(seq)
}

/// Hankel function of integer order, H^{(1)}_m(z) or H^{(2)}_m(z), for z > 0.
pub fn hankel(order: i32, kind: Kind, z: f64) -> Result<Complex64> {
    let m = order.unsigned_abs() as usize;
    if m > MAX_INTEGER_ORDER as usize {
        return Err(Error::domain(format!("order {m} beyond supported range {MAX_INTEGER_ORDER}")));
    }
    let h1 = hankel1_sequence(m, z)?[m];
    let h1 = if order < 0 { parity(order) * h1 } else { h1 };
    Ok(match kind {
        Kind::First => h1,
        Kind::Second => h1.conj(),
    })
}

/// H^{(1)}_m(z)·e^{−iz}, free of the oscillating phase for large z.
pub fn hankel1_scaled(order: i32, z: f64) -> Result<Complex64> {
    let m = order.unsigned_abs() as usize;
    let h = hankel1_scaled_sequence(m, z)?[m];
    Ok(if order < 0 { parity(order) * h } else { h })
}

/// Derivative d/dz of the Hankel function via H′_m = H_{m−1} − (m/z) H_m.
pub fn hankel_derivative(order: i32, kind: Kind, z: f64) -> Result<Complex64> {
    let m = order.unsigned_abs() as usize;
    if m >= MAX_INTEGER_ORDER as usize {
        return Err(Error::domain(format!("order {m} beyond supported range {MAX_INTEGER_ORDER}")));
    }
    let seq = hankel1_sequence(m + 1, z)?;
    let d = seq[m] * (m as f64 / z) - seq[m + 1];
    let d = if order < 0 { parity(order) * d } else { d };
    Ok(match kind {
        Kind::First => d,
        Kind::Second => d.conj(),
    })
}

/// e^{−x} I_m(x) by backward recurrence normalized with e^{x} = I_0 + 2 Σ I_k.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_i argument must be non-negative, got {x}")));
    }
    let m = order as usize;
    if x == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let reach = m.max(x.ceil() as usize);
    let start = reach + 30 + (80.0 * (reach as f64 + 10.0)).sqrt() as usize;
    let mut v = vec![0.0; start + 2];
    v[start] = 1.0;
    for n in (1..=start).rev() {
        v[n - 1] = (2.0 * n as f64 / x) * v[n] + v[n + 1];
        if v[n - 1] > RESCALE {
            for w in v[n - 1..].iter_mut() {
                *w /= RESCALE;
            }
        }
    }
    let norm = v[0] + 2.0 * v[1..].iter().sum::<f64>();
    Ok(v[m] / norm)
}

/// Modified Bessel function I_m(x).
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    let value = scaled * x.exp();
    if !value.is_finite() {
        return Err(Error::range(format!("I_{order}({x}) overflows")));
    }
    Ok(value)
}
