//! Infinite-volume results for the contact potential: the phase shift, the
//! closed-form ΔC and the phase-shift integral that reproduces it.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::faddeeva::erfcx;
use super::quadrature::{integrate, Integral};
use crate::error::{Error, Result};

/// Requested absolute accuracy of [`icf_from_phase_shift`].
pub const ICF_ABS_TOL: f64 = 1e-8;
// Internal target; the K15−G7 estimate is pessimistic so this is cheap.
const QUAD_TARGET: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDomain {
    /// Argument is a real time t.
    Real,
    /// Argument is a Euclidean time τ (t = −iτ).
    Imaginary,
}

fn check_contact(mass: f64, coupling: f64) -> Result<()> {
    if !(mass.is_finite() && coupling.is_finite()) {
        return Err(Error::NonFinite("mass or coupling"));
    }
    if mass <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    Ok(())
}

/// δ(E) = cot⁻¹(−√(2mE)/(mV₀)) on the branch (0, π).
///
/// The free case V₀ = 0 returns 0.
pub fn phase_shift(energy: f64, mass: f64, coupling: f64) -> Result<f64> {
    check_contact(mass, coupling)?;
    if !energy.is_finite() || energy <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "phase shift needs a positive finite energy, got {energy}"
        )));
    }
    if coupling == 0.0 {
        return Ok(0.0);
    }
    Ok(phase_shift_k((2.0 * mass * energy).sqrt(), mass, coupling))
}

// Same as above in terms of the momentum k = √(2mE), k ≥ 0.
fn phase_shift_k(k: f64, mass: f64, coupling: f64) -> f64 {
    FRAC_PI_2 - (-k / (mass * coupling)).atan()
}

/// ΔC = ½ erfc(mV₀√(it/2m)) e^{(mV₀)² it/2m} − ½ = ½ erfcx(u) − ½.
///
/// In the imaginary domain `t` is τ and u = mV₀√(τ/2m) is real. The real
/// domain takes the principal square root of it/2m; that continuation is
/// less well tested than the Euclidean one.
pub fn analytic_delta_c(mass: f64, coupling: f64, t: f64, domain: TimeDomain) -> Result<Complex64> {
    check_contact(mass, coupling)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let arg = match domain {
        TimeDomain::Imaginary => Complex64::new(t / (2.0 * mass), 0.0),
        TimeDomain::Real => Complex64::new(0.0, t / (2.0 * mass)),
    };
    let u = mass * coupling * arg.sqrt();
    Ok(0.5 * erfcx(u) - 0.5)
}

/// (τ/π)∫₀^∞ δ(ε) e^{−ετ} dε for an arbitrary phase shift δ.
///
/// The substitution ε = k²/2m, k = s/(1−s) maps the range to s ∈ [0, 1).
pub fn forward_integral(
    delta: impl Fn(f64) -> f64,
    mass: f64,
    tau: f64,
    abs_tol: f64,
) -> Result<Integral> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "τ must be positive, got {tau}"
        )));
    }
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    let scale = tau / PI;
    let integrand = |s: f64| {
        let one_minus = 1.0 - s;
        let k = s / one_minus;
        if !k.is_finite() || k > 1e150 {
            return 0.0;
        }
        let weight = (-k * k * tau / (2.0 * mass)).exp();
        if weight == 0.0 {
            return 0.0;
        }
        let eps = k * k / (2.0 * mass);
        delta(eps) * weight * (k / mass) / (one_minus * one_minus)
    };
    let raw = integrate(integrand, 0.0, 1.0, abs_tol / scale, QUAD_MAX_INTERVALS)?;
    Ok(Integral {
        value: scale * raw.value,
        error: scale * raw.error,
        intervals: raw.intervals,
    })
}

/// ΔC(τ) from the contact phase shift.
///
/// The forward integral alone is incomplete: the threshold value δ(0⁺)
/// and, for attraction, the bound state at E_B = −mV₀²/2 contribute
///   ΔC = (τ/π)∫δ e^{−ετ}dε − δ(0⁺)/π − ½ + e^{−E_Bτ}.
/// On the (0, π) branch δ(0⁺) = π/2, so the constant is −1.
pub fn icf_from_phase_shift(mass: f64, coupling: f64, tau: f64) -> Result<f64> {
    check_contact(mass, coupling)?;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "τ must be positive, got {tau}"
        )));
    }
    if coupling == 0.0 {
        return Ok(0.0);
    }
    let forward = forward_integral(
        |eps| phase_shift_k((2.0 * mass * eps).sqrt(), mass, coupling),
        mass,
        tau,
        QUAD_TARGET,
    )?;
    if forward.error > ICF_ABS_TOL {
        return Err(Error::Quadrature {
            achieved: forward.error,
            requested: ICF_ABS_TOL,
        });
    }
    let bound = if coupling < 0.0 {
        (mass * coupling * coupling * tau / 2.0).exp()
    } else {
        0.0
    };
    Ok(forward.value - 1.0 + bound)
}
