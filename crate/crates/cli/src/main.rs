//! Command-line front end for the capacity solvers.
//!
//! Three subcommands:
//!
//! - `capacity` — rates at one operating point, as a `key = value` report;
//! - `sweep` — rates across a span of operating powers, as CSV;
//! - `spectrum` — the optimal photon-number spectrum at one operating
//!   point, as CSV.
//!
//! Channels come from a TOML file (`--config`); without one the tool works
//! on the normalized far-field channel, where powers are fractions of the
//! geometry reference power and rates are dimensionless. Exit codes: 0 on
//! success, 1 for usage or configuration problems, 2 when a solver fails to
//! converge. `BOSONIC_CAPACITY_TOL` overrides the relative solve tolerance.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bosonic_core::{
    farfield_capacity, solve_beta, solve_flat_broadband, spectrum, AllocError, Allocation,
    ChannelModel, DetectionKind, FarFieldSolution, NumericsError, ResourceBudget, Tolerance,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ChannelSpec;
use output::{fnv1a_hex, gnuplot_script, write_out, Table};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "bosonic-capacity",
    version,
    about = "Classical capacity of lossy bosonic channels under a power constraint"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable rates at one operating point
    Capacity(CapacityArgs),
    /// Rates across a span of operating powers, as CSV
    Sweep(SweepArgs),
    /// Optimal photon-number spectrum at one operating point, as CSV
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct IoArgs {
    /// TOML channel description (omit for the normalized far-field channel)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report absolute SI rates instead of normalized ones
    #[arg(long)]
    si: bool,
}

#[derive(Args)]
struct BudgetArgs {
    /// Signal power as a fraction of the geometry reference power
    #[arg(long, value_name = "F", conflicts_with_all = ["power_watts", "energy_j"])]
    power_ratio: Option<f64>,

    /// Average signal power in watts (pair with --time-s)
    #[arg(long, value_name = "F", requires = "time_s", conflicts_with = "energy_j")]
    power_watts: Option<f64>,

    /// Transmission window in seconds (pair with --power-watts)
    #[arg(long, value_name = "F", requires = "power_watts")]
    time_s: Option<f64>,

    /// Mean signal energy per channel use in joules
    #[arg(long, value_name = "F")]
    energy_j: Option<f64>,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Detection strategy
    #[arg(long, value_enum, default_value = "all")]
    detection: DetectionArg,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Detection strategy
    #[arg(long, value_enum, default_value = "all")]
    detection: DetectionArg,
    /// Lower end of the power-ratio span
    #[arg(long, value_name = "F", default_value_t = 0.01)]
    from: f64,
    /// Upper end of the power-ratio span
    #[arg(long, value_name = "F", default_value_t = 1000.0)]
    to: f64,
    /// Number of operating points
    #[arg(long, value_name = "N", default_value_t = 60)]
    points: usize,
    /// Space the points logarithmically instead of linearly
    #[arg(long)]
    log: bool,
    /// Also write a gnuplot script that renders --out
    #[arg(long, value_name = "PATH", requires = "out")]
    plot_script: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Detection strategy (one at a time)
    #[arg(long, value_enum, default_value = "holevo")]
    detection: SingleDetectionArg,
    /// Number of frequency samples between zero and the carrier
    #[arg(long, value_name = "N", default_value_t = 200)]
    n_points: usize,
    /// Also write a gnuplot script that renders --out
    #[arg(long, value_name = "PATH", requires = "out")]
    plot_script: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DetectionArg {
    Holevo,
    Het,
    Hom,
    All,
}

impl DetectionArg {
    fn kinds(self) -> Vec<DetectionKind> {
        match self {
            DetectionArg::Holevo => vec![DetectionKind::Holevo],
            DetectionArg::Het => vec![DetectionKind::Heterodyne],
            DetectionArg::Hom => vec![DetectionKind::Homodyne],
            DetectionArg::All => DetectionKind::ALL.to_vec(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            DetectionArg::Holevo => "holevo",
            DetectionArg::Het => "het",
            DetectionArg::Hom => "hom",
            DetectionArg::All => "all",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum SingleDetectionArg {
    Holevo,
    Het,
    Hom,
}

impl SingleDetectionArg {
    fn kind(self) -> DetectionKind {
        match self {
            SingleDetectionArg::Holevo => DetectionKind::Holevo,
            SingleDetectionArg::Het => DetectionKind::Heterodyne,
            SingleDetectionArg::Hom => DetectionKind::Homodyne,
        }
    }
}

// ---------------------------------------------------------------------------
// errors and entry point
// ---------------------------------------------------------------------------

enum CliError {
    /// Bad flags, bad config, bad units — the user can fix the invocation.
    Config(String),
    /// The numerics gave up; the invocation itself was fine.
    Solver(String),
}

fn cfg(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<AllocError> for CliError {
    fn from(e: AllocError) -> Self {
        match e {
            // A bad budget is an input problem, not a solver breakdown.
            AllocError::InfeasibleBudget { .. } => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Capacity(args) => cmd_capacity(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Spectrum(args) => cmd_spectrum(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------------
// shared resolution steps
// ---------------------------------------------------------------------------

fn tolerance_from_env() -> Result<Tolerance, CliError> {
    const VAR: &str = "BOSONIC_CAPACITY_TOL";
    match std::env::var(VAR) {
        Err(std::env::VarError::NotPresent) => Ok(Tolerance::default()),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(cfg(format!("{VAR} is not valid UTF-8")))
        }
        Ok(text) => {
            let value: f64 = text
                .trim()
                .parse()
                .map_err(|_| cfg(format!("{VAR} must be a number, got {text:?}")))?;
            if !(1e-15..=1e-2).contains(&value) {
                return Err(cfg(format!(
                    "{VAR} must lie in [1e-15, 1e-2], got {value}"
                )));
            }
            Ok(Tolerance::with_rel(value))
        }
    }
}

/// Load the channel description, plus a fingerprint of the file it came from.
fn load_channel(io: &IoArgs) -> Result<(ChannelSpec, String), CliError> {
    match &io.config {
        None => Ok((ChannelSpec::NormalizedFarField, "none".to_string())),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cfg(format!("cannot read config {}: {e}", path.display())))?;
            let spec = config::parse_config(&text).map_err(CliError::Config)?;
            Ok((spec, fnv1a_hex(text.as_bytes())))
        }
    }
}

/// One of the three mutually exclusive budget forms.
enum Budget {
    PowerRatio(f64),
    Watts { power_w: f64, time_s: f64 },
    EnergyJ(f64),
}

impl BudgetArgs {
    fn resolve(&self) -> Result<Budget, CliError> {
        let budget = match (self.power_ratio, self.power_watts, self.time_s, self.energy_j) {
            (Some(p), None, None, None) => Budget::PowerRatio(p),
            (None, Some(power_w), Some(time_s), None) => Budget::Watts { power_w, time_s },
            (None, None, None, Some(e)) => Budget::EnergyJ(e),
            (None, None, None, None) => {
                return Err(cfg(
                    "an operating point is required: one of --power-ratio, \
                     --power-watts with --time-s, or --energy-j",
                ))
            }
            // clap's conflict rules make the remaining combinations unreachable
            _ => unreachable!("conflicting budget flags got past argument parsing"),
        };
        let check = |name: &str, value: f64, strictly_positive: bool| -> Result<(), CliError> {
            let ok = value.is_finite() && if strictly_positive { value > 0.0 } else { value >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(cfg(format!("{name} must be finite and {}, got {value}",
                    if strictly_positive { "positive" } else { "non-negative" })))
            }
        };
        match &budget {
            Budget::PowerRatio(p) => check("--power-ratio", *p, false)?,
            Budget::Watts { power_w, time_s } => {
                check("--power-watts", *power_w, false)?;
                check("--time-s", *time_s, true)?;
            }
            Budget::EnergyJ(e) => check("--energy-j", *e, false)?,
        }
        Ok(budget)
    }
}

/// Reduce a budget to a power ratio for one of the far-field profiles.
fn far_field_power_ratio(spec: &ChannelSpec, budget: &Budget) -> Result<f64, CliError> {
    match (budget, spec) {
        (Budget::PowerRatio(p), _) => Ok(*p),
        (Budget::Watts { power_w, .. }, ChannelSpec::FarField { geometry }) => {
            Ok(power_w / geometry.reference_power())
        }
        (Budget::Watts { .. }, _) => Err(cfg(
            "--power-watts needs a geometry to set the reference power; \
             pass --config with a farfield profile or use --power-ratio",
        )),
        (Budget::EnergyJ(_), _) => Err(cfg(
            "farfield profiles are power-constrained: use --power-ratio, \
             or --power-watts with --time-s",
        )),
    }
}

/// Reduce a budget to joules per channel use for a discrete-mode profile.
/// For flat profiles a supplied window must agree with the mode spacing,
/// since both fix the duration of one use.
fn per_use_energy_j(budget: &Budget, delta_omega: Option<f64>) -> Result<f64, CliError> {
    match budget {
        Budget::EnergyJ(e) => Ok(*e),
        Budget::Watts { power_w, time_s } => {
            if let Some(delta_omega) = delta_omega {
                let window = TWO_PI / delta_omega;
                if ((time_s - window) / window).abs() > 1e-6 {
                    return Err(cfg(format!(
                        "config delta_omega implies a channel use of {window:.6e} s \
                         but --time-s gives {time_s:.6e} s; drop one or make them agree"
                    )));
                }
            }
            Ok(power_w * time_s)
        }
        Budget::PowerRatio(_) => Err(cfg(
            "--power-ratio needs a farfield profile (this channel has no reference power); \
             use --energy-j or --power-watts with --time-s",
        )),
    }
}

// ---------------------------------------------------------------------------
// capacity
// ---------------------------------------------------------------------------

/// `key = value` report accumulator for the capacity command.
struct Report(String);

impl Report {
    fn new() -> Self {
        Report(String::new())
    }
    fn text(&mut self, key: &str, value: impl std::fmt::Display) {
        self.0.push_str(&format!("{key} = {value}\n"));
    }
    fn num(&mut self, key: &str, value: f64) {
        self.0.push_str(&format!("{key} = {value:.17e}\n"));
    }
}

fn cmd_capacity(args: CapacityArgs) -> Result<(), CliError> {
    let tol = tolerance_from_env()?;
    let (spec, config_hash) = load_channel(&args.io)?;
    let budget = args.budget.resolve()?;

    let mut report = Report::new();
    report.text("tool", concat!("bosonic-capacity ", env!("CARGO_PKG_VERSION")));
    report.text("command", "capacity");
    report.text("profile", spec.profile_name());
    report.text("config_hash", &config_hash);
    report.text("detection", args.detection.label());
    report.num("tol_rel", tol.rel);

    match &spec {
        ChannelSpec::NormalizedFarField | ChannelSpec::FarField { .. } => {
            let p = far_field_power_ratio(&spec, &budget)?;
            report.num("power_ratio", p);
            let geometry = match &spec {
                ChannelSpec::FarField { geometry } => Some(geometry),
                _ => None,
            };
            if args.io.si && geometry.is_none() {
                return Err(cfg(
                    "--si needs a geometry config; without one rates are dimensionless",
                ));
            }
            if let Some(g) = geometry {
                report.num("omega_c_rad_s", g.omega_c_rad_s());
                report.num("reference_power_w", g.reference_power());
            }
            for det in args.detection.kinds() {
                let sol = farfield_capacity(det, p, tol)?;
                report_far_field(&mut report, &sol, geometry, &budget, args.io.si);
            }
        }
        ChannelSpec::Flat { eta, delta_omega, n_modes } => {
            let energy_j = per_use_energy_j(&budget, Some(*delta_omega))?;
            let energy = ResourceBudget::EnergyPerUse { energy_j }.natural_energy();
            report.num("energy_j", energy_j);
            for det in args.detection.kinds() {
                let alloc = match n_modes {
                    Some(n) => {
                        let grid = ChannelModel::flat(*eta, *delta_omega)
                            .map_err(|e| cfg(e.to_string()))?
                            .with_n_modes(*n)
                            .discretize()
                            .map_err(|e| cfg(e.to_string()))?;
                        solve_beta(det, &grid, energy, tol)?
                    }
                    None => solve_flat_broadband(det, *eta, *delta_omega, energy, tol)?,
                };
                report_allocation(&mut report, &alloc, args.io.si.then_some(TWO_PI / delta_omega));
            }
        }
        ChannelSpec::Tabulated { grid } => {
            let energy_j = per_use_energy_j(&budget, None)?;
            let energy = ResourceBudget::EnergyPerUse { energy_j }.natural_energy();
            report.num("energy_j", energy_j);
            let window = match (&budget, args.io.si) {
                (_, false) => None,
                (Budget::Watts { time_s, .. }, true) => Some(*time_s),
                (_, true) => {
                    return Err(cfg(
                        "--si for tabulated profiles needs --power-watts with --time-s \
                         to fix the duration of a channel use",
                    ))
                }
            };
            for det in args.detection.kinds() {
                let alloc = solve_beta(det, grid, energy, tol)?;
                report_allocation(&mut report, &alloc, window);
            }
        }
    }

    write_out(args.io.out.as_deref(), &report.0)
        .map_err(CliError::Config)
}

fn report_far_field(
    report: &mut Report,
    sol: &FarFieldSolution,
    geometry: Option<&bosonic_core::FarFieldGeometry>,
    budget: &Budget,
    si: bool,
) {
    let name = sol.detection.name();
    if si {
        let omega_c = geometry.expect("--si checked against geometry").omega_c_rad_s();
        let rate = sol.rate_bits_per_sec(omega_c);
        report.num(&format!("{name}_bits_per_sec"), rate);
        if let Budget::Watts { time_s, .. } = budget {
            report.num(&format!("{name}_total_bits"), rate * time_s);
        }
    } else {
        report.num(&format!("{name}_rate_norm"), sol.rate_norm);
    }
    report.num(&format!("{name}_y0"), sol.y0);
    if let Some(ratio) = sol.omega_cut_ratio {
        report.num(&format!("{name}_omega_cut_over_omega_c"), ratio);
    }
}

fn report_allocation(report: &mut Report, alloc: &Allocation, window_s: Option<f64>) {
    let name = alloc.detection.name();
    report.num(&format!("{name}_bits_per_use"), alloc.rate_bits);
    if let Some(window) = window_s {
        report.num(&format!("{name}_bits_per_sec"), alloc.rate_bits / window);
    }
    report.num(&format!("{name}_beta"), alloc.beta);
    report.text(&format!("{name}_active_modes"), alloc.active_modes);
    let total: f64 = alloc.photon_numbers.iter().sum();
    report.num(&format!("{name}_total_photons"), total);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let tol = tolerance_from_env()?;
    let (spec, config_hash) = load_channel(&args.io)?;

    let geometry = match &spec {
        ChannelSpec::NormalizedFarField => None,
        ChannelSpec::FarField { geometry } => Some(geometry),
        other => {
            return Err(cfg(format!(
                "sweep runs on farfield profiles; the config declares \"{}\"",
                other.profile_name()
            )))
        }
    };
    if !(args.from.is_finite() && args.to.is_finite() && args.from >= 0.0) {
        return Err(cfg(format!(
            "the sweep span must be finite and non-negative, got {}..{}",
            args.from, args.to
        )));
    }
    if args.from >= args.to {
        return Err(cfg(format!(
            "--from must be below --to, got {}..{}",
            args.from, args.to
        )));
    }
    if args.points < 2 {
        return Err(cfg(format!("--points must be at least 2, got {}", args.points)));
    }
    if args.log && args.from <= 0.0 {
        return Err(cfg("--log needs --from > 0"));
    }
    let scale = match (args.io.si, geometry) {
        (false, _) => 1.0,
        (true, Some(g)) => g.omega_c_rad_s() / TWO_PI,
        (true, None) => {
            return Err(cfg(
                "--si needs a geometry config; without one rates are dimensionless",
            ))
        }
    };

    let detections = args.detection.kinds();
    let mut columns = vec!["power_ratio".to_string()];
    columns.extend(detections.iter().map(|d| format!("{}_bits_per_sec", d.name())));
    let mut table = Table::new(columns);
    table.meta("tool", concat!("bosonic-capacity ", env!("CARGO_PKG_VERSION")));
    table.meta("command", "sweep");
    table.meta("profile", spec.profile_name());
    table.meta("config_hash", &config_hash);
    table.meta("detection", args.detection.label());
    table.meta("tol_rel", format!("{:.17e}", tol.rel));
    match geometry {
        Some(g) => {
            table.meta("omega_c_rad_s", format!("{:.17e}", g.omega_c_rad_s()));
            table.meta("reference_power_w", format!("{:.17e}", g.reference_power()));
            if !args.io.si {
                table.meta("rates", "dimensionless (multiply by omega_c / 2 pi for bits per second)");
            }
        }
        None => {
            table.meta(
                "normalization",
                "omega_c = 2 pi rad/s, so bits per second equal the dimensionless rate",
            );
        }
    }
    table.meta(
        "span",
        format!(
            "{:e}..{:e}, {} points, {}",
            args.from,
            args.to,
            args.points,
            if args.log { "log" } else { "linear" }
        ),
    );

    for i in 0..args.points {
        let t = i as f64 / (args.points - 1) as f64;
        let p = if i == args.points - 1 {
            args.to
        } else if args.log {
            args.from * (args.to / args.from).powf(t)
        } else {
            args.from + (args.to - args.from) * t
        };
        let mut row = vec![p];
        for &det in &detections {
            row.push(farfield_capacity(det, p, tol)?.rate_norm * scale);
        }
        table.push_row(row);
    }

    let rendered = table.render();
    write_out(args.io.out.as_deref(), &rendered).map_err(CliError::Config)?;
    write_plot(args.plot_script.as_deref(), args.io.out.as_deref(), &table, "P / P0", {
        if args.io.si { "bits per second" } else { "normalized rate" }
    }, args.log)
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let tol = tolerance_from_env()?;
    let (spec, config_hash) = load_channel(&args.io)?;
    let budget = args.budget.resolve()?;

    match &spec {
        ChannelSpec::NormalizedFarField | ChannelSpec::FarField { .. } => {}
        other => {
            return Err(cfg(format!(
                "spectrum runs on farfield profiles; the config declares \"{}\"",
                other.profile_name()
            )))
        }
    }
    if args.io.si {
        return Err(cfg(
            "spectrum output is always normalized (occupation scaled by the carrier \
             transmissivity, frequency by the carrier); drop --si",
        ));
    }
    if args.n_points == 0 {
        return Err(cfg("--n-points must be at least 1"));
    }

    let p = far_field_power_ratio(&spec, &budget)?;
    let det = args.detection.kind();
    let sol = farfield_capacity(det, p, tol)?;

    let mut table = Table::new(["omega_over_omega_c", "S_normalized"]);
    table.meta("tool", concat!("bosonic-capacity ", env!("CARGO_PKG_VERSION")));
    table.meta("command", "spectrum");
    table.meta("profile", spec.profile_name());
    table.meta("config_hash", &config_hash);
    table.meta("detection", det.name());
    table.meta("tol_rel", format!("{:.17e}", tol.rel));
    table.meta("power_ratio", format!("{:.17e}", p));
    table.meta("y0", format!("{:.17e}", sol.y0));
    if let Some(ratio) = sol.omega_cut_ratio {
        table.meta("omega_cut_over_omega_c", format!("{ratio:.17e}"));
    }
    for (u, s) in spectrum(&sol, args.n_points) {
        table.push_row(vec![u, s]);
    }

    let rendered = table.render();
    write_out(args.io.out.as_deref(), &rendered).map_err(CliError::Config)?;
    write_plot(
        args.plot_script.as_deref(),
        args.io.out.as_deref(),
        &table,
        "omega / omega_c",
        "normalized spectrum",
        false,
    )
}

fn write_plot(
    script: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
    table: &Table,
    xlabel: &str,
    ylabel: &str,
    logx: bool,
) -> Result<(), CliError> {
    let Some(script_path) = script else { return Ok(()) };
    let out = out.expect("--plot-script requires --out");
    let script_text = gnuplot_script(out, table.column_names(), xlabel, ylabel, logx);
    write_out(Some(script_path), &script_text).map_err(CliError::Config)
}
