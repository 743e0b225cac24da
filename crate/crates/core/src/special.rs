//! Digamma and unit-ball volume.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// B_{2n} / (2n) for n = 1..=7
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Ψ(z) = Γ′(z)/Γ(z) for z > 0.
///
/// Shifts z upward with Ψ(z) = Ψ(z+1) − 1/z until z ≥ 10, then sums the
/// asymptotic series ln z − 1/(2z) − Σ B₂ₙ/(2n z²ⁿ).
pub fn digamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "digamma requires a finite positive argument, got {z}"
        )));
    }
    let mut z = z;
    let mut shift = 0.0;
    while z < 10.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    Ok(shift + z.ln() - 0.5 / z - series)
}

/// ln Γ(d/2 + 1), exact recursion over integer and half-integer arguments.
fn ln_gamma_half_dim_plus_one(d: usize) -> f64 {
    // Γ(m + 1) = m!, Γ(m + 1/2) = √π · Π_{i=1}^{m} (i − 1/2)
    if d % 2 == 0 {
        (1..=d / 2).map(|i| (i as f64).ln()).sum()
    } else {
        let m = (d + 1) / 2;
        0.5 * std::f64::consts::PI.ln() + (1..=m).map(|i| (i as f64 - 0.5).ln()).sum::<f64>()
    }
}

/// ln c̄_d, the log volume of the unit ball in ℝᵈ. Finite for any `d`,
/// including dimensions where c̄_d itself underflows.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    0.5 * d as f64 * std::f64::consts::PI.ln() - ln_gamma_half_dim_plus_one(d)
}

/// c̄_d = π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    ln_unit_ball_volume(d).exp()
}
