//! Channel descriptions: which modes exist, how lossy each one is, and what
//! resource budget the sender gets.
//!
//! Frequencies are angular (rad/s) when a model is built from SI data, but
//! the allocator only ever sees the pair (photon cost, transmissivity), so
//! normalized grids — frequencies in units of some reference, budgets in
//! units of hbar times that reference — work identically. The [`HBAR`]
//! conversion happens exactly once, in [`ResourceBudget::natural_energy`].

use thiserror::Error;

/// Reduced Planck constant, J s (2019 SI exact h over 2 pi).
pub const HBAR: f64 = 6.626_070_15e-34 / (2.0 * std::f64::consts::PI);

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("mode {index}: transmissivity must lie in (0, 1], got {value}")]
    EtaOutOfRange { index: usize, value: f64 },
    #[error("mode {index}: frequency must be positive and finite, got {value}")]
    BadFrequency { index: usize, value: f64 },
    #[error("mode grid is empty")]
    EmptyGrid,
    #[error("geometry is not in the far field: transmissivity at the carrier is {fresnel} (needs < 1)")]
    NotFarField { fresnel: f64 },
    #[error("profile needs {name} to be discretized")]
    MissingParameter { name: &'static str },
}

/// One bosonic mode: angular frequency and power transmissivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub omega: f64,
    pub eta: f64,
}

impl ModeSpec {
    pub fn new(omega: f64, eta: f64) -> Self {
        ModeSpec { omega, eta }
    }
}

/// A validated, finite collection of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    modes: Vec<ModeSpec>,
}

impl ModeGrid {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self, ChannelError> {
        if modes.is_empty() {
            return Err(ChannelError::EmptyGrid);
        }
        for (index, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(ChannelError::BadFrequency { index, value: m.omega });
            }
            if !(m.eta > 0.0 && m.eta <= 1.0) {
                return Err(ChannelError::EtaOutOfRange { index, value: m.eta });
            }
        }
        Ok(ModeGrid { modes })
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Transmitter/receiver apertures facing each other over a free-space path.
///
/// The best spatial mode at angular frequency omega couples the apertures
/// with power transfer D(omega) = A_t A_r (omega / 2 pi c L)^2; the model is
/// meaningful while D stays well below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldGeometry {
    area_t_m2: f64,
    area_r_m2: f64,
    path_len_m: f64,
    omega_c_rad_s: f64,
}

impl FarFieldGeometry {
    pub fn new(
        area_t_m2: f64,
        area_r_m2: f64,
        path_len_m: f64,
        omega_c_rad_s: f64,
    ) -> Result<Self, ChannelError> {
        for (name, value) in [
            ("area_t_m2", area_t_m2),
            ("area_r_m2", area_r_m2),
            ("path_len_m", path_len_m),
            ("omega_c_rad_s", omega_c_rad_s),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ChannelError::NonPositiveParameter { name, value });
            }
        }
        let g = FarFieldGeometry { area_t_m2, area_r_m2, path_len_m, omega_c_rad_s };
        let d = g.fresnel_raw(omega_c_rad_s);
        if d >= 1.0 {
            return Err(ChannelError::NotFarField { fresnel: d });
        }
        Ok(g)
    }

    fn fresnel_raw(&self, omega: f64) -> f64 {
        let x = omega / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * self.path_len_m);
        self.area_t_m2 * self.area_r_m2 * x * x
    }

    /// Power transfer of the best spatial mode at `omega`, clamped to 1.
    pub fn fresnel(&self, omega: f64) -> f64 {
        self.fresnel_raw(omega).min(1.0)
    }

    /// Transfer at the carrier (the largest over the band in use).
    pub fn fresnel_carrier(&self) -> f64 {
        self.fresnel(self.omega_c_rad_s)
    }

    pub fn omega_c_rad_s(&self) -> f64 {
        self.omega_c_rad_s
    }

    /// True when the carrier transfer is small enough (<= 0.1) that the
    /// single-spatial-mode picture is solid, not merely not-yet-broken.
    pub fn is_deep_far_field(&self) -> bool {
        self.fresnel_carrier() <= 0.1
    }

    /// Reference power 2 pi hbar c^2 L^2 / (A_t A_r) that makes far-field
    /// power budgets dimensionless; identical to
    /// hbar omega_c^2 / (2 pi D(omega_c)).
    pub fn reference_power(&self) -> f64 {
        let c = SPEED_OF_LIGHT;
        let p0 = 2.0 * std::f64::consts::PI * HBAR * c * c * self.path_len_m * self.path_len_m
            / (self.area_t_m2 * self.area_r_m2);
        debug_assert!(
            {
                let alt = HBAR * self.omega_c_rad_s * self.omega_c_rad_s
                    / (2.0 * std::f64::consts::PI * self.fresnel_carrier());
                (p0 - alt).abs() <= 1e-12 * p0
            },
            "reference power identities disagree"
        );
        p0
    }
}

/// Loss as a function of frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Same transmissivity for every mode.
    Flat { eta: f64 },
    /// Quadratic far-field transfer from aperture geometry.
    FarField(FarFieldGeometry),
    /// Explicit per-mode table.
    Tabulated(ModeGrid),
}

/// A channel model: a loss profile plus (for the continuous profiles) how to
/// slice it into discrete modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub profile: Profile,
    /// Mode spacing, rad/s. Flat profiles place modes at k * delta_omega.
    pub delta_omega: Option<f64>,
    /// Number of modes to generate; a flat model without it is treated as an
    /// unbounded ladder by the broadband solver.
    pub n_modes: Option<usize>,
}

impl ChannelModel {
    pub fn flat(eta: f64, delta_omega: f64) -> Result<Self, ChannelError> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(ChannelError::EtaOutOfRange { index: 0, value: eta });
        }
        if !(delta_omega > 0.0) || !delta_omega.is_finite() {
            return Err(ChannelError::NonPositiveParameter {
                name: "delta_omega",
                value: delta_omega,
            });
        }
        Ok(ChannelModel { profile: Profile::Flat { eta }, delta_omega: Some(delta_omega), n_modes: None })
    }

    pub fn far_field(geometry: FarFieldGeometry, n_modes: usize) -> Self {
        ChannelModel {
            profile: Profile::FarField(geometry),
            delta_omega: None,
            n_modes: Some(n_modes),
        }
    }

    pub fn tabulated(grid: ModeGrid) -> Self {
        ChannelModel { profile: Profile::Tabulated(grid), delta_omega: None, n_modes: None }
    }

    pub fn with_n_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = Some(n_modes);
        self
    }

    /// Lay the profile out as an explicit mode grid.
    ///
    /// Flat: modes at k * delta_omega for k = 1..=n_modes. Far field: n_modes
    /// evenly spaced frequencies ending at the carrier, each with its Fresnel
    /// transfer. Tabulated profiles return their table as-is.
    pub fn discretize(&self) -> Result<ModeGrid, ChannelError> {
        match &self.profile {
            Profile::Flat { eta } => {
                let delta = self
                    .delta_omega
                    .ok_or(ChannelError::MissingParameter { name: "delta_omega" })?;
                let n = self.n_modes.ok_or(ChannelError::MissingParameter { name: "n_modes" })?;
                if n == 0 {
                    return Err(ChannelError::EmptyGrid);
                }
                ModeGrid::new(
                    (1..=n).map(|k| ModeSpec::new(k as f64 * delta, *eta)).collect(),
                )
            }
            Profile::FarField(geom) => {
                let n = self.n_modes.ok_or(ChannelError::MissingParameter { name: "n_modes" })?;
                if n == 0 {
                    return Err(ChannelError::EmptyGrid);
                }
                let omega_c = geom.omega_c_rad_s();
                ModeGrid::new(
                    (1..=n)
                        .map(|k| {
                            let omega = omega_c * k as f64 / n as f64;
                            ModeSpec::new(omega, geom.fresnel(omega))
                        })
                        .collect(),
                )
            }
            Profile::Tabulated(grid) => Ok(grid.clone()),
        }
    }
}

/// Sender-side resource constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResourceBudget {
    /// Mean energy per channel use, joules.
    EnergyPerUse { energy_j: f64 },
    /// Mean power sustained over a transmission window, watts and seconds.
    PowerAndTime { power_w: f64, time_s: f64 },
}

impl ResourceBudget {
    /// Total mean energy in joules.
    pub fn total_energy_j(&self) -> f64 {
        match *self {
            ResourceBudget::EnergyPerUse { energy_j } => energy_j,
            ResourceBudget::PowerAndTime { power_w, time_s } => power_w * time_s,
        }
    }

    /// Energy in natural units (divided by hbar), ready for an allocator
    /// whose photon costs are angular frequencies in rad/s.
    pub fn natural_energy(&self) -> f64 {
        self.total_energy_j() / HBAR
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_modes() {
        assert_eq!(ModeGrid::new(vec![]).unwrap_err(), ChannelError::EmptyGrid);
        let err = ModeGrid::new(vec![ModeSpec::new(1.0, 1.5)]).unwrap_err();
        assert_eq!(err, ChannelError::EtaOutOfRange { index: 0, value: 1.5 });
        let err = ModeGrid::new(vec![ModeSpec::new(1.0, 0.5), ModeSpec::new(-2.0, 0.5)])
            .unwrap_err();
        assert_eq!(err, ChannelError::BadFrequency { index: 1, value: -2.0 });
        assert_eq!(ModeGrid::new(vec![ModeSpec::new(1.0, 0.0)]).unwrap_err(),
            ChannelError::EtaOutOfRange { index: 0, value: 0.0 });
    }

    #[test]
    fn fresnel_matches_reference_value() {
        // 10 cm^2 apertures, 100 km path, 600 THz carrier; 60-digit reference.
        let g = FarFieldGeometry::new(0.01, 0.01, 1e5, 2.0 * std::f64::consts::PI * 600e12)
            .unwrap();
        let d = g.fresnel_carrier();
        assert!(
            (d - 0.04005540201793026355826724).abs() < 1e-15,
            "fresnel = {d}"
        );
        assert!(g.is_deep_far_field());
    }

    #[test]
    fn fresnel_clamps_and_scales_quadratically() {
        let g = FarFieldGeometry::new(0.01, 0.01, 1e5, 2.0 * std::f64::consts::PI * 600e12)
            .unwrap();
        let d1 = g.fresnel(1e15);
        let d2 = g.fresnel(2e15);
        assert!((d2 / d1 - 4.0).abs() < 1e-12, "quadratic scaling broken: {}", d2 / d1);
        assert_eq!(g.fresnel(1e20), 1.0, "clamp at unity transfer");
    }

    #[test]
    fn geometry_rejects_near_field_carrier() {
        // Big apertures, short path: transfer above 1 at the carrier.
        let err = FarFieldGeometry::new(1.0, 1.0, 10.0, 2.0 * std::f64::consts::PI * 600e12)
            .unwrap_err();
        assert!(matches!(err, ChannelError::NotFarField { .. }), "got {err:?}");
    }

    #[test]
    fn reference_power_both_forms_agree() {
        let g = FarFieldGeometry::new(0.02, 0.005, 5e4, 2.0 * std::f64::consts::PI * 200e12)
            .unwrap();
        let p0 = g.reference_power();
        let alt = HBAR * g.omega_c_rad_s() * g.omega_c_rad_s()
            / (2.0 * std::f64::consts::PI * g.fresnel_carrier());
        assert!((p0 - alt).abs() < 1e-12 * p0, "p0 = {p0}, alt = {alt}");
    }

    #[test]
    fn flat_discretization_is_a_ladder() {
        let model = ChannelModel::flat(0.7, 0.5).unwrap().with_n_modes(4);
        let grid = model.discretize().unwrap();
        let omegas: Vec<f64> = grid.modes().iter().map(|m| m.omega).collect();
        assert_eq!(omegas, vec![0.5, 1.0, 1.5, 2.0]);
        assert!(grid.modes().iter().all(|m| m.eta == 0.7));
    }

    #[test]
    fn flat_without_mode_count_asks_for_it() {
        let model = ChannelModel::flat(0.7, 0.5).unwrap();
        assert_eq!(
            model.discretize().unwrap_err(),
            ChannelError::MissingParameter { name: "n_modes" }
        );
    }

    #[test]
    fn farfield_discretization_ends_at_carrier() {
        let geom = FarFieldGeometry::new(0.01, 0.01, 1e5, 2.0 * std::f64::consts::PI * 600e12)
            .unwrap();
        let model = ChannelModel::far_field(geom, 100);
        let grid = model.discretize().unwrap();
        assert_eq!(grid.len(), 100);
        let last = grid.modes().last().unwrap();
        assert_eq!(last.omega, geom.omega_c_rad_s());
        assert!((last.eta - geom.fresnel_carrier()).abs() < 1e-18);
        // Quadratic profile: first mode transfer = carrier transfer / 100^2.
        let first = grid.modes()[0];
        assert!((first.eta * 1e4 - last.eta).abs() < 1e-12 * last.eta);
    }

    #[test]
    fn budget_conversions() {
        let e = ResourceBudget::EnergyPerUse { energy_j: 2e-19 };
        assert_eq!(e.total_energy_j(), 2e-19);
        let p = ResourceBudget::PowerAndTime { power_w: 1e-9, time_s: 1e-6 };
        assert_eq!(p.total_energy_j(), 1e-15);
        assert!((p.natural_energy() - 1e-15 / HBAR).abs() < 1.0);
    }
}
