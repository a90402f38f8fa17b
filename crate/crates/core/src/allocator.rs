//! Constrained photon-number allocation over discrete mode sets.
//!
//! The optimization pattern is the same for every detection strategy: the
//! per-mode optimum is an explicit function of a Lagrange multiplier beta,
//! and beta is pinned down by spending the whole energy budget. Since the
//! energy spent is strictly decreasing in beta, a bracketed scalar root find
//! settles it.
//!
//! [`oracle_grid_search`] deliberately knows nothing about multipliers: it
//! brute-forces the energy simplex and polishes with pairwise line searches.
//! It exists so the analytic solution has something dumb and trustworthy to
//! be compared against.

use crate::channel::ModeGrid;
use crate::kernels::{thermal_occupation, DetectionKind};
use crate::numerics::{expand_bracket, find_root, NumericsError, Tolerance};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AllocError {
    #[error("energy budget must be finite and non-negative, got {energy}")]
    InfeasibleBudget { energy: f64 },
    #[error("flat ladder would need about {modes:e} modes at this budget/spacing; widen delta_omega or lower the budget")]
    LadderTooLong { modes: f64 },
    #[error("multiplier search failed: {0}")]
    Solver(#[from] NumericsError),
}

/// Result of an energy-constrained allocation.
#[derive(Debug, Clone)]
pub struct Allocation {
    pub detection: DetectionKind,
    /// Lagrange multiplier enforcing the budget; infinite when the budget is
    /// zero (nothing transmitted).
    pub beta: f64,
    /// Mean photon number per mode, in grid order. For the unbounded flat
    /// ladder this holds the active prefix; every later mode is zero.
    pub photon_numbers: Vec<f64>,
    /// Energy the allocation actually uses, in the units of the budget.
    pub achieved_energy: f64,
    /// Total rate in bits per channel use.
    pub rate_bits: f64,
    /// Modes carrying a strictly positive photon number.
    pub active_modes: usize,
}

/// Optimal photon number of one mode at multiplier `beta`.
///
/// Joint detection fills each mode to a rescaled thermal occupation
/// n(beta omega / eta) / eta; the coherent receivers water-fill with floor
/// xi^2 / eta, which shuts a mode off once beta omega exceeds eta / xi^2.
fn mode_photons(detection: DetectionKind, omega: f64, eta: f64, beta: f64) -> f64 {
    match detection.xi() {
        None => {
            let y = beta * omega / eta;
            if y > 700.0 {
                0.0
            } else {
                thermal_occupation(y) / eta
            }
        }
        Some(xi) => (1.0 / (beta * omega) - xi * xi / eta).max(0.0),
    }
}

fn zero_allocation(detection: DetectionKind, n_modes: usize) -> Allocation {
    Allocation {
        detection,
        beta: f64::INFINITY,
        photon_numbers: vec![0.0; n_modes],
        achieved_energy: 0.0,
        rate_bits: 0.0,
        active_modes: 0,
    }
}

fn finish_allocation(
    detection: DetectionKind,
    beta: f64,
    omegas_etas: impl Iterator<Item = (f64, f64)>,
) -> Allocation {
    let mut photon_numbers = Vec::new();
    let mut achieved_energy = 0.0;
    let mut rate_bits = 0.0;
    let mut active_modes = 0;
    for (omega, eta) in omegas_etas {
        let n = mode_photons(detection, omega, eta, beta);
        achieved_energy += omega * n;
        rate_bits += detection.mode_rate(eta * n);
        if n > 0.0 {
            active_modes += 1;
        }
        photon_numbers.push(n);
    }
    Allocation { detection, beta, photon_numbers, achieved_energy, rate_bits, active_modes }
}

/// Solve the energy-constrained allocation on an explicit mode grid.
///
/// `energy` is in the same units as the mode frequencies (each photon in
/// mode k costs omega_k), so pass natural units — joules divided by hbar,
/// see [`ResourceBudget::natural_energy`](crate::channel::ResourceBudget::natural_energy) —
/// or keep everything in a dimensionless frequency scale. A zero budget
/// yields the silent allocation; a negative one is rejected.
pub fn solve_beta(
    detection: DetectionKind,
    modes: &ModeGrid,
    energy: f64,
    tol: Tolerance,
) -> Result<Allocation, AllocError> {
    if !energy.is_finite() || energy < 0.0 {
        return Err(AllocError::InfeasibleBudget { energy });
    }
    if energy == 0.0 {
        return Ok(zero_allocation(detection, modes.len()));
    }
    let spend = |beta: f64| {
        let used: f64 = modes
            .modes()
            .iter()
            .map(|m| m.omega * mode_photons(detection, m.omega, m.eta, beta))
            .sum();
        used / energy - 1.0
    };
    let bracket = expand_bracket(spend, 1.0 / energy, 600)?;
    let beta = find_root(spend, bracket, tol)?;
    Ok(finish_allocation(
        detection,
        beta,
        modes.modes().iter().map(|m| (m.omega, m.eta)),
    ))
}

/// Brute-force reference maximizer over the energy simplex.
///
/// Stage one scans every way of splitting the budget into `grid` equal
/// chunks across the modes (combinatorial — intended for a handful of
/// modes), stage two runs `sweeps` rounds of golden-section energy transfers
/// between every mode pair. The objective is concave, so pairwise exchanges
/// cannot stall away from the global optimum. Returns photon numbers and the
/// rate in bits.
pub fn oracle_grid_search(
    detection: DetectionKind,
    modes: &ModeGrid,
    energy: f64,
    grid: usize,
    sweeps: usize,
) -> (Vec<f64>, f64) {
    assert!(energy >= 0.0 && energy.is_finite(), "budget must be finite and non-negative");
    assert!(grid >= 1, "need at least one grid chunk");
    let n = modes.len();
    let rate_of = |shares: &[f64]| -> f64 {
        modes
            .modes()
            .iter()
            .zip(shares)
            .map(|(m, &e)| detection.mode_rate(m.eta * e / m.omega))
            .sum()
    };
    if energy == 0.0 {
        return (vec![0.0; n], 0.0);
    }

    // Stage 1: exhaustive scan of chunk counts c_1 + ... + c_n = grid.
    let chunk = energy / grid as f64;
    let mut best_shares = vec![0.0; n];
    best_shares[n - 1] = energy;
    let mut best_rate = rate_of(&best_shares);
    let mut counts = vec![0usize; n];
    visit_compositions(&mut counts, 0, grid, &mut |counts: &[usize]| {
        let shares: Vec<f64> = counts.iter().map(|&c| c as f64 * chunk).collect();
        let r = rate_of(&shares);
        if r > best_rate {
            best_rate = r;
            best_shares = shares;
        }
    });

    // Stage 2: golden-section polish on pairwise energy transfers.
    const GOLDEN_STEP: f64 = 0.381_966_011_250_105_1; // 2 - golden ratio
    let mut shares = best_shares;
    for _ in 0..sweeps {
        for i in 0..n {
            for j in (i + 1)..n {
                let eval = |t: f64, shares: &[f64]| {
                    let mi = &modes.modes()[i];
                    let mj = &modes.modes()[j];
                    detection.mode_rate(mi.eta * (shares[i] + t) / mi.omega)
                        + detection.mode_rate(mj.eta * (shares[j] - t) / mj.omega)
                };
                // Transfer t of energy from j to i, staying on the simplex.
                let (mut lo, mut hi) = (-shares[i], shares[j]);
                let mut a = lo + GOLDEN_STEP * (hi - lo);
                let mut b = hi - GOLDEN_STEP * (hi - lo);
                let mut fa = eval(a, &shares);
                let mut fb = eval(b, &shares);
                for _ in 0..120 {
                    if fa > fb {
                        hi = b;
                        b = a;
                        fb = fa;
                        a = lo + GOLDEN_STEP * (hi - lo);
                        fa = eval(a, &shares);
                    } else {
                        lo = a;
                        a = b;
                        fa = fb;
                        b = hi - GOLDEN_STEP * (hi - lo);
                        fb = eval(b, &shares);
                    }
                }
                let t = 0.5 * (lo + hi);
                shares[i] = (shares[i] + t).max(0.0);
                shares[j] = (shares[j] - t).max(0.0);
            }
        }
    }
    let polished = rate_of(&shares);
    let rate = polished.max(best_rate);
    let ns = modes
        .modes()
        .iter()
        .zip(&shares)
        .map(|(m, &e)| e / m.omega)
        .collect();
    (ns, rate)
}

/// Recursively enumerate non-negative integer vectors summing to `remaining`
/// from position `pos` onward, invoking `visit` on each complete one.
fn visit_compositions<F: FnMut(&[usize])>(
    counts: &mut Vec<usize>,
    pos: usize,
    remaining: usize,
    visit: &mut F,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        visit_compositions(counts, pos + 1, remaining - c, visit);
    }
}

/// Largest ladder length the broadband solver will sum over before assuming
/// the parameters are a mistake.
const MAX_LADDER_MODES: f64 = 5e7;

/// Allocation on the unbounded flat ladder omega_k = k * delta_omega, all
/// modes at transmissivity `eta`.
///
/// The active length is decided adaptively: joint detection keeps modes
/// until their occupation exponent passes 45 (truncated tail below 1e-17 of
/// the total), water-filling has a sharp analytic cutoff. Budget and spacing
/// share units with hbar = 1.
pub fn solve_flat_broadband(
    detection: DetectionKind,
    eta: f64,
    delta_omega: f64,
    energy: f64,
    tol: Tolerance,
) -> Result<Allocation, AllocError> {
    assert!(eta > 0.0 && eta <= 1.0, "transmissivity must be in (0, 1], got {eta}");
    assert!(
        delta_omega > 0.0 && delta_omega.is_finite(),
        "mode spacing must be positive, got {delta_omega}"
    );
    if !energy.is_finite() || energy < 0.0 {
        return Err(AllocError::InfeasibleBudget { energy });
    }
    if energy == 0.0 {
        return Ok(zero_allocation(detection, 0));
    }

    // Continuum estimates of the solution multiplier make good seeds: the
    // bracket expansion then only needs a few steps in either direction.
    let e_norm = energy / delta_omega;
    let beta_seed = match detection.xi() {
        None => eta * std::f64::consts::PI / (delta_omega * (6.0 * eta * e_norm).sqrt()),
        Some(xi) => (eta / (2.0 * xi * xi * delta_omega * energy)).sqrt(),
    };

    let active_len = |beta: f64| -> f64 {
        match detection.xi() {
            // Occupation exponent beta k delta / eta reaches 45 here.
            None => (45.0 * eta / (beta * delta_omega)).ceil().max(1.0),
            // Water level runs dry at k = eta / (xi^2 beta delta).
            Some(xi) => (eta / (xi * xi * beta * delta_omega)).floor(),
        }
    };
    // Reject parameter combinations whose ladders would not terminate in
    // reasonable time. The bracket expansion at most halves beta a few times
    // below the seed, so checking the seed scale (with headroom) suffices.
    if active_len(beta_seed / 16.0) > MAX_LADDER_MODES {
        return Err(AllocError::LadderTooLong { modes: active_len(beta_seed) });
    }

    let used = |beta: f64| -> f64 {
        let kmax = active_len(beta).min(MAX_LADDER_MODES) as usize;
        (1..=kmax)
            .map(|k| {
                let omega = k as f64 * delta_omega;
                omega * mode_photons(detection, omega, eta, beta)
            })
            .sum()
    };

    let spend = |beta: f64| used(beta) / energy - 1.0;
    let bracket = expand_bracket(spend, beta_seed, 600)?;
    let beta = find_root(spend, bracket, tol)?;

    let kmax = active_len(beta).min(MAX_LADDER_MODES) as usize;
    Ok(finish_allocation(
        detection,
        beta,
        (1..=kmax).map(|k| (k as f64 * delta_omega, eta)),
    ))
}
