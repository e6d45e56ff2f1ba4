//! The Faddeeva function w(z) = e^{−z²} erfc(−iz) and the complex
//! complementary error functions derived from it.
//!
//! Three regimes: a Taylor series near the origin, the Laplace continued
//! fraction far out in the upper half-plane, and Weideman's rational
//! expansion in between. The lower half-plane follows from
//! w(z) = 2e^{−z²} − w(−z).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 2.0;
const FRACTION_RADIUS: f64 = 7.0;
const FRACTION_MIN_IM: f64 = 1.0;
const WEIDEMAN_N: usize = 40;

fn frac_1_sqrt_pi() -> f64 {
    1.0 / PI.sqrt()
}

/// w(z) for any finite complex z.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - faddeeva_upper(-z);
    }
    faddeeva_upper(z)
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        series(z)
    } else if r >= FRACTION_RADIUS || z.im >= FRACTION_MIN_IM {
        continued_fraction(z)
    } else {
        weideman(z)
    }
}

// w(z) = Σ (iz)^n / Γ(n/2 + 1). Even and odd terms obey separate two-step
// recurrences, which avoids evaluating Γ directly.
fn series(z: Complex64) -> Complex64 {
    let iz = Complex64::i() * z;
    let iz2 = iz * iz;
    let mut even = Complex64::new(1.0, 0.0);
    let mut odd = iz * (2.0 * frac_1_sqrt_pi());
    let mut sum = even + odd;
    let mut n = 0.0_f64;
    loop {
        even *= iz2 / (n / 2.0 + 1.0);
        odd *= iz2 / ((n + 1.0) / 2.0 + 1.0);
        let step = even + odd;
        sum += step;
        n += 2.0;
        if step.norm() <= 1e-17 * sum.norm() || n > 400.0 {
            return sum;
        }
    }
}

// w(z) = (i/√π) / (z − ½/(z − 1/(z − (3/2)/(z − …)))), by modified Lentz.
fn continued_fraction(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = if z.norm() < TINY { tiny } else { z };
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..20_000 {
        let a = -(k as f64) / 2.0;
        d = z + a * d;
        if d.norm() < TINY {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    Complex64::i() * frac_1_sqrt_pi() / f
}

fn weideman_coefficients() -> &'static (f64, Vec<f64>) {
    static COEFFS: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let theta = k as f64 * PI / m as f64;
                let t = l * (theta / 2.0).tan();
                (theta, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let a = (1..=n)
            .map(|j| {
                samples
                    .iter()
                    .map(|&(theta, f)| f * (j as f64 * theta).cos())
                    .sum::<f64>()
                    / (2 * m) as f64
            })
            .collect();
        (l, a)
    })
}

fn weideman(z: Complex64) -> Complex64 {
    let (l, a) = weideman_coefficients();
    let iz = Complex64::i() * z;
    let denom = *l - iz;
    let zz = (*l + iz) / denom;
    let p = a
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * zz + c);
    2.0 * p / (denom * denom) + frac_1_sqrt_pi() / denom
}

/// Scaled complementary error function e^{z²} erfc(z) = w(iz).
pub fn erfcx(z: Complex64) -> Complex64 {
    faddeeva(Complex64::i() * z)
}

/// Complementary error function of a complex argument.
pub fn erfc(z: Complex64) -> Complex64 {
    (-z * z).exp() * erfcx(z)
}
