//! Bessel functions of the first kind for the real orders the kernels need.
//!
//! Ascending series below [`SERIES_LIMIT`], Hankel's large-argument expansion
//! above it. For half-integer orders the asymptotic series terminates and is
//! exact, so those orders reproduce the closed trigonometric forms.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Argument at which evaluation switches from the ascending series to the
/// large-argument expansion.
pub const SERIES_LIMIT: f64 = 12.0;

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

/// Gamma function for positive arguments (Lanczos, g = 7).
pub fn gamma(x: f64) -> f64 {
    // exact products for the integer and half-integer arguments the series uses
    if x > 0.0 && x <= 30.0 && (2.0 * x).fract() == 0.0 {
        let (mut g, mut t) = if x.fract() == 0.0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        while t < x {
            g *= t;
            t += 1.0;
        }
        return g;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

fn check(order: f64, z: f64) -> Result<()> {
    if !(order >= -0.5) {
        return Err(Error::Domain(format!("Bessel order {order} below -1/2")));
    }
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("negative Bessel argument {z}")));
    }
    Ok(())
}

/// Sum of the ascending series for `J_ν(z) / (z/2)^ν`.
fn series_reduced(order: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0 / gamma(order + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= -q / (k * (k + order));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel expansion `J_ν(z) = √(2/(πz)) (P cos ω − Q sin ω)`, summed until the
/// terms stop decreasing.
fn asymptotic(order: f64, z: f64) -> f64 {
    let mu = 4.0 * order * order;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..80 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        }
        if a == 0.0 {
            break;
        }
        if k > 2 && a.abs() > prev {
            break;
        }
        prev = a.abs();
        let signed = if (k / 2) % 2 == 0 { a } else { -a };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
    }
    let w = z - (0.5 * order + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * w.cos() - q * w.sin())
}

/// `J_order(z)` for `order ≥ −1/2`, `z ≥ 0`.
pub fn bessel_j(order: f64, z: f64) -> Result<f64> {
    check(order, z)?;
    if z == 0.0 {
        return Ok(match order {
            o if o == 0.0 => 1.0,
            o if o < 0.0 => f64::INFINITY,
            _ => 0.0,
        });
    }
    if z <= SERIES_LIMIT {
        Ok((0.5 * z).powf(order) * series_reduced(order, z))
    } else {
        Ok(asymptotic(order, z))
    }
}

/// `J_order(z) / z^order`, continuous at `z = 0` where it equals
/// `1 / (2^order Γ(order + 1))`.
///
/// Order −1/2 is accepted as well: it gives `√(2/π) cos z`, the kernel of the
/// one-dimensional (cosine) reduction.
pub fn normalized_bessel(order: f64, z: f64) -> Result<f64> {
    check(order, z)?;
    if z <= SERIES_LIMIT {
        Ok(series_reduced(order, z) / 2f64.powf(order))
    } else {
        Ok(asymptotic(order, z) / z.powf(order))
    }
}
