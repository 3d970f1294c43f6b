//! `wgqed` — run waveguide-QED two-emitter correlation scenarios, fit the
//! results, and evaluate the device formulas, all reproducibly from the
//! command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wgqed_cli::commands::analytic::{cmd_analytic, AnalyticArgs, FormArg};
use wgqed_cli::commands::device;
use wgqed_cli::commands::fit::{cmd_fit, ExponentArg, FitArgs, FitModel};
use wgqed_cli::commands::simulate::{cmd_simulate, StreamFormat};
use wgqed_cli::{default_out_dir, CliError};
use wgqed_core::device::ThermalModel;
use wgqed_core::estimation::{CwFreeMask, CwG2Model};

#[derive(Parser)]
#[command(
    name = "wgqed",
    about = "Two-emitter waveguide-QED photon-correlation toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario: photon stream, detection, coincidence histogram.
    Simulate(SimulateArgs),
    /// Fit a histogram, spectrum or decay curve.
    Fit(FitCli),
    /// Sample the closed-form correlation curves.
    Analytic(AnalyticCli),
    /// Waveguide/device formula evaluations.
    #[command(subcommand)]
    Device(DeviceCommand),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $WGQED_OUT_DIR or ./out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    stream_format: StreamFormat,
    /// Re-run the pipeline and verify the artifacts hash identically.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct FitCli {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: FitModel,
    /// Histogram metadata sidecar (default: `<input>.meta.json`).
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Pulse repetition period for pulsed-g2 fits (ns).
    #[arg(long, default_value_t = 25.0)]
    rep_period_ns: f64,
    /// Number of peaks for Lorentzian fits.
    #[arg(long, default_value_t = 1)]
    n_peaks: usize,
    /// Interference-exponent convention for CW fits.
    #[arg(long, value_enum, default_value = "derived")]
    exponent: ExponentArg,
    /// Detector dark rates subtracted before pulsed fitting (1/ns).
    #[arg(long, default_value_t = 0.0)]
    dark_rate_a_per_ns: f64,
    #[arg(long, default_value_t = 0.0)]
    dark_rate_b_per_ns: f64,
    /// CW-fit initial values.
    #[arg(long, default_value_t = 1.0)]
    gamma_per_ns: f64,
    #[arg(long, default_value_t = 3.5)]
    beta_per_ns: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_uev: f64,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    /// Jitter FWHM of the delay axis (two detectors in quadrature).
    #[arg(long, default_value_t = 0.2828)]
    jitter_fwhm_ns: f64,
    #[arg(long, default_value_t = 1.0)]
    norm: f64,
    /// Comma-separated free parameters for CW fits
    /// (gamma, beta, delta, rho, jitter, norm).
    #[arg(long, default_value = "gamma,rho")]
    free: String,
    /// Fit-result JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Data/model overlay CSV output path.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticCli {
    #[arg(long, default_value_t = 1.0 / 1.2)]
    gamma_per_ns: f64,
    #[arg(long)]
    beta_per_ns: Option<f64>,
    #[arg(long)]
    t2_ns: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta_uev: f64,
    #[arg(long, value_enum, default_value = "derived")]
    form: FormArg,
    #[arg(long, default_value_t = 6.0)]
    tau_max_ns: f64,
    #[arg(long, default_value_t = 0.002)]
    dtau_ns: f64,
    #[arg(long, default_value_t = 0.0)]
    jitter_fwhm_ns: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Print the max pointwise difference between the two exponent forms.
    #[arg(long)]
    compare_forms: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DeviceCommand {
    /// Group index from the Fabry-Perot fringe spacing.
    GroupIndex {
        #[arg(long)]
        lambda_nm: f64,
        #[arg(long)]
        length_um: f64,
        #[arg(long)]
        dlambda_nm: f64,
    },
    /// Purcell factor from Q, normalized mode volume and field ratio.
    Purcell {
        #[arg(long, default_value_t = 1345.0)]
        lambda_nm: f64,
        #[arg(long, default_value_t = 3.17)]
        refractive_index: f64,
        #[arg(long)]
        q: f64,
        /// Mode volume in (λ/n)³ units.
        #[arg(long)]
        v_mode: f64,
        #[arg(long, default_value_t = 1.0)]
        field_ratio: f64,
    },
    /// Heater power that shifts the emission by a target energy.
    Match {
        #[arg(long)]
        delta_uev: f64,
    },
    /// Sweep heater power and export the wavelength crossing map.
    ThermalSweep {
        #[arg(long, default_value_t = 1314.5)]
        lambda_a_nm: f64,
        #[arg(long, default_value_t = 1314.3)]
        lambda_b_nm: f64,
        #[arg(long, default_value_t = 400.0)]
        p_max_uw: f64,
        #[arg(long, default_value_t = 5.0)]
        p_step_uw: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Product of a comma-separated efficiency chain.
    Efficiency {
        #[arg(long)]
        stages: String,
    },
}

fn parse_free_mask(spec: &str) -> Result<CwFreeMask, CliError> {
    let mut mask = CwFreeMask::all_fixed();
    for token in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match token {
            "gamma" => mask.gamma = true,
            "beta" => mask.beta = true,
            "delta" => mask.delta = true,
            "rho" => mask.rho = true,
            "jitter" => mask.jitter = true,
            "norm" => mask.norm = true,
            other => {
                return Err(CliError::Input(format!(
                    "unknown free parameter `{other}` (expected gamma, beta, delta, rho, jitter, norm)"
                )))
            }
        }
    }
    Ok(mask)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let out_dir = args.out_dir.unwrap_or_else(default_out_dir);
            let summary =
                cmd_simulate(&args.config, &out_dir, args.stream_format, args.check)?;
            println!(
                "singles rates: {:.6e} /ns (A), {:.6e} /ns (B)",
                summary.singles_rate_a_per_ns, summary.singles_rate_b_per_ns
            );
            println!("total coincidences: {}", summary.histogram_total);
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Fit(args) => {
            let init = CwG2Model {
                gamma: args.gamma_per_ns,
                beta: args.beta_per_ns,
                delta: wgqed_core::units::energy_to_angular(args.delta_uev),
                rho: args.rho,
                jitter_fwhm_ns: args.jitter_fwhm_ns,
                norm: args.norm,
            };
            let free = parse_free_mask(&args.free)?;
            let fit_args = FitArgs {
                input: args.input,
                model: args.model,
                meta: args.meta,
                rep_period_ns: args.rep_period_ns,
                n_peaks: args.n_peaks,
                exponent: args.exponent,
                dark_rate_a_per_ns: args.dark_rate_a_per_ns,
                dark_rate_b_per_ns: args.dark_rate_b_per_ns,
                init,
                free,
                out: args.out,
                overlay: args.overlay,
            };
            let (_result, json) = cmd_fit(&fit_args)?;
            println!("{json}");
            Ok(())
        }
        Command::Analytic(args) => {
            let analytic_args = AnalyticArgs {
                gamma_per_ns: args.gamma_per_ns,
                beta_per_ns: args.beta_per_ns,
                t2_ns: args.t2_ns,
                delta_uev: args.delta_uev,
                form: args.form,
                tau_max_ns: args.tau_max_ns,
                dtau_ns: args.dtau_ns,
                jitter_fwhm_ns: args.jitter_fwhm_ns,
                rho: args.rho,
                compare_forms: args.compare_forms,
            };
            let report = cmd_analytic(&analytic_args, args.out.as_deref())?;
            println!("{report}");
            Ok(())
        }
        Command::Device(cmd) => {
            let model = ThermalModel::default();
            let report = match cmd {
                DeviceCommand::GroupIndex { lambda_nm, length_um, dlambda_nm } => {
                    device::cmd_group_index(lambda_nm, length_um, dlambda_nm)?
                }
                DeviceCommand::Purcell { lambda_nm, refractive_index, q, v_mode, field_ratio } => {
                    device::cmd_purcell(lambda_nm, refractive_index, q, v_mode, field_ratio)?
                }
                DeviceCommand::Match { delta_uev } => device::cmd_match(delta_uev, &model)?,
                DeviceCommand::ThermalSweep {
                    lambda_a_nm,
                    lambda_b_nm,
                    p_max_uw,
                    p_step_uw,
                    out,
                } => device::cmd_thermal_sweep(
                    lambda_a_nm,
                    lambda_b_nm,
                    p_max_uw,
                    p_step_uw,
                    &model,
                    out.as_deref(),
                )?,
                DeviceCommand::Efficiency { stages } => {
                    let values: Result<Vec<f64>, _> =
                        stages.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    let values = values
                        .map_err(|e| CliError::Input(format!("bad efficiency list: {e}")))?;
                    device::cmd_efficiency(&values)?
                }
            };
            println!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
