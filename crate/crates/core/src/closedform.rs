//! Closed-form and quadrature-backed limits of the allocation problem.
//!
//! Three regimes admit compact answers and serve as cross-checks for the
//! discrete allocator:
//!
//! - a single mode: the rate is just the kernel at eta * N;
//! - the flat broadband limit: rate proportional to sqrt(eta * power);
//! - the far-field aperture channel, where transmissivity grows
//!   quadratically up to a carrier frequency and everything reduces to one
//!   dimensionless parameter y0 once power is measured against the
//!   geometry's reference power.

use crate::kernels::{g, thermal_occupation, DetectionKind};
use crate::numerics::{find_root, integrate, Bracket, NumericsError, Tolerance};

const LN2: f64 = std::f64::consts::LN_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Single-mode capacity in bits per use: g(eta * n_photons).
pub fn narrowband_capacity(eta: f64, n_photons: f64) -> f64 {
    assert!(eta > 0.0 && eta <= 1.0, "transmissivity must be in (0, 1], got {eta}");
    assert!(n_photons >= 0.0, "photon number must be non-negative, got {n_photons}");
    g(eta * n_photons)
}

/// Flat broadband capacity in bits per use for total energy `energy` spread
/// over a ladder with spacing `delta_omega` (natural units, hbar = 1):
/// sqrt(eta) * sqrt(2 pi^2 E / (3 delta)) / ln 2.
///
/// Written so that quartering eta exactly halves the result and quadrupling
/// the energy exactly doubles it (power-of-two scalings commute with sqrt in
/// IEEE arithmetic).
pub fn flat_broadband_capacity(eta: f64, energy: f64, delta_omega: f64) -> f64 {
    assert!(eta > 0.0 && eta <= 1.0, "transmissivity must be in (0, 1], got {eta}");
    assert!(energy >= 0.0, "energy must be non-negative, got {energy}");
    assert!(delta_omega > 0.0, "mode spacing must be positive, got {delta_omega}");
    const COEF: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;
    eta.sqrt() * (COEF * (energy / delta_omega)).sqrt() / LN2
}

/// Flat broadband rate in bits per second at average power `power_w` watts:
/// sqrt(eta) * sqrt(pi P / (3 hbar)) / ln 2.
pub fn flat_broadband_rate_si(eta: f64, power_w: f64) -> f64 {
    assert!(eta > 0.0 && eta <= 1.0, "transmissivity must be in (0, 1], got {eta}");
    assert!(power_w >= 0.0, "power must be non-negative, got {power_w}");
    eta.sqrt() * (std::f64::consts::PI * power_w / (3.0 * crate::channel::HBAR)).sqrt() / LN2
}

/// Solution of a far-field optimization at one operating point.
///
/// Everything is dimensionless: rates are normalized as 2 pi C / (omega_c T)
/// and recover absolute units through the carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldSolution {
    pub detection: DetectionKind,
    /// Operating power over the geometry's reference power.
    pub power_ratio: f64,
    /// Dimensionless multiplier parameter; for the coherent receivers,
    /// carrier frequency over the lowest used frequency.
    pub y0: f64,
    /// Rate normalized to 2 pi / (omega_c T) bits.
    pub rate_norm: f64,
    /// Low-frequency cutoff as a fraction of the carrier (water-filling
    /// only; the joint measurement uses every frequency).
    pub omega_cut_ratio: Option<f64>,
}

impl FarFieldSolution {
    /// Absolute rate for a channel with the given carrier, bits per second.
    pub fn rate_bits_per_sec(&self, omega_c_rad_s: f64) -> f64 {
        self.rate_norm * omega_c_rad_s / TWO_PI
    }

    /// Absolute low-frequency cutoff, rad/s.
    pub fn omega_cut_rad_s(&self, omega_c_rad_s: f64) -> Option<f64> {
        self.omega_cut_ratio.map(|r| r * omega_c_rad_s)
    }
}

/// Occupation of the scaled far-field mode at position x divided by x:
/// (1/x) / (e^(1/x) - 1) — the power-constraint integrand.
fn power_integrand(x: f64) -> f64 {
    let inv = 1.0 / x;
    if inv > 700.0 {
        return 0.0;
    }
    thermal_occupation(inv) / x
}

/// g of the occupation at position x — the rate integrand.
fn rate_integrand(x: f64) -> f64 {
    let inv = 1.0 / x;
    if inv > 700.0 {
        return 0.0;
    }
    g(thermal_occupation(inv))
}

/// y - 1 - ln y, the water-filling power kernel, stable near y = 1.
fn waterfill_power_kernel(y: f64) -> f64 {
    let z = y - 1.0;
    if z.abs() < 1e-3 {
        // z - ln(1+z) = z^2/2 - z^3/3 + z^4/4 - ...
        return z * z * (0.5 - z / 3.0 + z * z / 4.0 - z * z * z / 5.0);
    }
    z - z.ln_1p()
}

/// 1/y - 1 + ln y, the water-filling rate kernel, stable near y = 1.
fn waterfill_rate_kernel(y: f64) -> f64 {
    let z = y - 1.0;
    if z.abs() < 1e-3 {
        // z^2/2 - 2z^3/3 + 3z^4/4 - ...
        return z * z * (0.5 - 2.0 * z / 3.0 + 3.0 * z * z / 4.0 - 4.0 * z * z * z / 5.0);
    }
    z.ln_1p() - z / (1.0 + z)
}

/// Power ratio a given y0 corresponds to (the inverse of the constraint
/// solve). Handy for round-trip tests and spectrum normalization.
pub fn power_ratio_of_y0(
    detection: DetectionKind,
    y0: f64,
    tol: Tolerance,
) -> Result<f64, NumericsError> {
    assert!(y0 >= 0.0, "y0 must be non-negative, got {y0}");
    if y0 == 0.0 {
        return Ok(0.0);
    }
    match detection.xi() {
        None => integrate(power_integrand, 0.0, y0, (0.1 * tol.rel).max(1e-14)),
        Some(xi) => Ok(xi * xi * waterfill_power_kernel(y0)),
    }
}

/// Solve a far-field operating point: given P / P0, find y0 and the
/// normalized rate for the requested detection.
///
/// The joint-measurement branch solves an integral constraint by bracketed
/// root finding with adaptive quadrature inside; the coherent branches
/// invert y - 1 - ln y on y > 1 (the monotone branch that water-filling
/// admits). `power_ratio = 0` returns the silent solution.
pub fn farfield_capacity(
    detection: DetectionKind,
    power_ratio: f64,
    tol: Tolerance,
) -> Result<FarFieldSolution, NumericsError> {
    assert!(
        power_ratio >= 0.0 && power_ratio.is_finite(),
        "power ratio must be finite and non-negative, got {power_ratio}"
    );
    if power_ratio == 0.0 {
        return Ok(FarFieldSolution {
            detection,
            power_ratio,
            y0: match detection.xi() {
                None => 0.0,
                Some(_) => 1.0,
            },
            rate_norm: 0.0,
            omega_cut_ratio: detection.xi().map(|_| 1.0),
        });
    }
    let quad_tol = (0.1 * tol.rel).max(1e-14);
    match detection.xi() {
        None => {
            // Phi(y0) = p with Phi increasing; p - Phi is decreasing, and
            // Phi(y) ~ y - O(log y) at large y, so p + 1 brackets from above
            // quickly.
            let constraint =
                |y: f64| -> Result<f64, NumericsError> { integrate(power_integrand, 0.0, y, quad_tol) };
            let mut hi = power_ratio + 1.0;
            let mut lo = hi;
            while constraint(hi)? < power_ratio {
                lo = hi;
                hi *= 2.0;
            }
            while constraint(lo)? > power_ratio {
                hi = lo;
                lo *= 0.5;
            }
            let mut failure = None;
            let y0 = find_root(
                |y| match constraint(y) {
                    Ok(v) => v - power_ratio,
                    Err(e) => {
                        failure = Some(e);
                        f64::NAN
                    }
                },
                Bracket::new(lo, hi),
                tol,
            );
            let y0 = match (y0, failure) {
                (_, Some(e)) => return Err(e),
                (Err(e), None) => return Err(e),
                (Ok(v), None) => v,
            };
            let rate_norm = integrate(rate_integrand, 0.0, y0, quad_tol)? / y0;
            Ok(FarFieldSolution {
                detection,
                power_ratio,
                y0,
                rate_norm,
                omega_cut_ratio: None,
            })
        }
        Some(xi) => {
            let target = power_ratio / (xi * xi);
            // h(y) = y - 1 - ln y is 0 at y = 1 and increasing beyond, so
            // [1, seed doubled until h >= target] brackets the unique root.
            let seed = 1.0 + (2.0 * target).sqrt() + target;
            let mut hi = seed;
            while waterfill_power_kernel(hi) < target {
                hi *= 2.0;
            }
            let y0 = find_root(
                |y| target - waterfill_power_kernel(y),
                Bracket::new(1.0, hi),
                tol,
            )?;
            let rate_norm = xi * waterfill_rate_kernel(y0) / LN2;
            Ok(FarFieldSolution {
                detection,
                power_ratio,
                y0,
                rate_norm,
                omega_cut_ratio: Some(1.0 / y0),
            })
        }
    }
}

/// Sampled power spectrum S = omega N(omega) of a far-field solution,
/// normalized by omega_c / D(omega_c), at frequencies u = omega / omega_c on
/// a uniform grid (i/n for i = 1..=n).
///
/// The joint measurement fills every frequency with a thermal occupation
/// rising toward the carrier; the coherent receivers are dark below their
/// cutoff 1/y0 and climb linearly in the water level above it.
pub fn spectrum(solution: &FarFieldSolution, n_points: usize) -> Vec<(f64, f64)> {
    assert!(n_points > 0, "need at least one spectrum point");
    let y0 = solution.y0;
    (1..=n_points)
        .map(|i| {
            let u = i as f64 / n_points as f64;
            let s = match solution.detection.xi() {
                None => {
                    if y0 == 0.0 {
                        0.0
                    } else {
                        let exponent = 1.0 / (y0 * u);
                        if exponent > 700.0 {
                            0.0
                        } else {
                            thermal_occupation(exponent) / u
                        }
                    }
                }
                Some(xi) => xi * xi * (y0 - 1.0 / u).max(0.0),
            };
            (u, s)
        })
        .collect()
}
