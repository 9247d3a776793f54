//! Bessel functions of the first kind for real order, and the gamma function.

use std::f64::consts::PI;

use super::dd::Dd;
use crate::error::{invalid_arg, Result};

pub const MAX_ORDER: f64 = 40.0;
pub const MAX_ARG: f64 = 200.0;

/// Arguments up to this value use the power series.
const SERIES_LIMIT: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x`; exact factorials at positive integers up to 171.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() {
        if x <= 0.0 {
            return f64::NAN;
        }
        if x <= 171.0 {
            return (1..x as u32).fold(1.0, |acc, k| acc * k as f64);
        }
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64));
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
}

fn check(nu: f64, x: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&nu) {
        return Err(invalid_arg(format!("Bessel order {nu} outside [0, {MAX_ORDER}]")));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(invalid_arg(format!("Bessel argument {x} outside [0, {MAX_ARG}]")));
    }
    Ok(())
}

/// J_ν(x) for `0 ≤ ν ≤ 40`, `0 ≤ x ≤ 200`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(j_unchecked(nu, x))
}

/// J′_ν(x) = −J_{ν+1}(x) + (ν/x) J_ν(x), with the series limits at `x = 0`.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(j_prime_unchecked(nu, x))
}

pub(crate) fn j_prime_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 || nu > 1.0 {
            0.0
        } else if nu == 1.0 {
            0.5
        } else {
            f64::INFINITY
        };
    }
    -j_unchecked(nu + 1.0, x) + (nu / x) * j_unchecked(nu, x)
}

pub(crate) fn j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        j_series(nu, x)
    } else {
        j_miller(nu, x)
    }
}

/// (x/2)^ν / Γ(ν+1) · Σ_m (−x²/4)^m / (m! (ν+1)_m), summed in double-double.
fn j_series(nu: f64, x: f64) -> f64 {
    let q = -(Dd::prod(x, x) * Dd::from_f64(0.25));
    let nu_dd = Dd::from_f64(nu);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for m in 0..500 {
        let m1 = Dd::from_f64((m + 1) as f64);
        term = term * q / (m1 * (m1 + nu_dd));
        sum = sum + term;
        if term.abs().hi < 1e-20 * sum.abs().hi {
            break;
        }
    }
    (0.5 * x).powf(nu) / gamma(nu + 1.0) * sum.to_f64()
}

/// Backward recurrence from far above the order, normalised by
/// (x/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(x) with μ = frac(ν).
fn j_miller(nu: f64, x: f64) -> f64 {
    const HUGE: f64 = 1e250;
    let order = nu.floor() as usize;
    let mu = nu - order as f64;
    let top = order + x.ceil() as usize + 150;
    // Weight of J_{μ+j} in the normalisation sum, nonzero for even j.
    let mut g = if mu == 0.0 { 0.0 } else { gamma(mu) };
    let mut weights = vec![0.0; top / 2 + 2];
    for (k, w) in weights.iter_mut().enumerate() {
        *w = if mu == 0.0 {
            if k == 0 { 1.0 } else { 2.0 }
        } else {
            let wk = (mu + 2.0 * k as f64) * g;
            g *= (mu + k as f64) / (k + 1) as f64;
            wk
        };
    }
    let mut above = 0.0;
    let mut current = 1e-300;
    let mut target = 0.0;
    let mut norm = 0.0;
    for j in (0..=top).rev() {
        if j == order {
            target = current;
        }
        if j % 2 == 0 {
            norm += weights[j / 2] * current;
        }
        if j == 0 {
            break;
        }
        let below = 2.0 * (mu + j as f64) / x * current - above;
        above = current;
        current = below;
        if current.abs() > HUGE {
            above /= HUGE;
            current /= HUGE;
            target /= HUGE;
            norm /= HUGE;
        }
    }
    target * (0.5 * x).powf(mu) / norm
}
