use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use defbec_core::config::{load_config, OutputFormat, RunConfig};
use defbec_core::deformed::CondensateParams;
use defbec_core::dispersion::{propagate_pulse, ChiProfile, Envelope, FnChi, PulseRun};
use defbec_core::emit::emit;
use defbec_core::lambda::ThirdOrderSource;
use defbec_core::presets::{sodium_atoms, sodium_density, sodium_g1, SODIUM_PHOTONS};
use defbec_core::susceptibility::SusceptibilityModel;
use defbec_core::sweep::run_sweep;
use defbec_core::units::hz_to_angular;
use defbec_core::validate::{self, WangDoublet};
use num_complex::Complex64;

#[derive(Parser)]
#[command(name = "defbec", version, about = "Susceptibility and group-index sweeps for a deformed BEC under EIT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate susceptibilities and group index over a (kappa, N, detuning) grid.
    Sweep(SweepArgs),
    /// Propagate a Gaussian pulse through a slab.
    Pulse(PulseArgs),
    /// Run the oracle and acceptance checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with the same keys as the flags; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Collision rates (s^-1), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    kappa: Option<Vec<f64>>,
    /// Atom numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    natoms: Option<Vec<f64>>,
    /// Set 1/N to exactly zero.
    #[arg(long)]
    eta_zero: bool,
    /// Detuning window in Hz as `lo:hi`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    delta_range: Option<[f64; 2]>,
    #[arg(long)]
    points: Option<usize>,
    /// Mean probe photon number.
    #[arg(long, conflicts_with = "intensity")]
    photons: Option<f64>,
    /// Probe intensity (W/cm^2), converted to a photon number.
    #[arg(long)]
    intensity: Option<f64>,
    #[arg(long)]
    n_e: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats, comma separated: csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Use the printed closed-form susceptibilities.
    #[arg(long)]
    printed_path: bool,
    /// Drop the constant -V offset of chi1.
    #[arg(long)]
    subtract_offset: bool,
    #[arg(long, value_enum)]
    third_order: Option<ThirdOrderArg>,
    /// Stamp SVG files with the generation time.
    #[arg(long)]
    svg_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThirdOrderArg {
    ClosedForm,
    MasterEquation,
}

#[derive(Clone, Copy, ValueEnum)]
enum Medium {
    Bec,
    Wang,
    Vacuum,
}

#[derive(Args)]
struct PulseArgs {
    /// Slab length (m).
    #[arg(long, default_value_t = 1e-4)]
    slab_length: f64,
    /// Intensity FWHM of the input pulse (s).
    #[arg(long, default_value_t = 1e-6)]
    fwhm: f64,
    #[arg(long, value_enum, default_value_t = Medium::Bec)]
    medium: Medium,
    /// Carrier detuning (Hz) for the BEC medium.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    detuning: f64,
    #[arg(long, default_value_t = 0.005)]
    kappa: f64,
    #[arg(long, default_value_t = 1e14)]
    natoms: f64,
    #[arg(long)]
    eta_zero: bool,
    #[arg(long, default_value_t = SODIUM_PHOTONS)]
    photons: f64,
    /// Samples per FWHM.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// FFT length.
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Write `t,in_intensity,out_intensity` to this CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Print the results as JSON.
    #[arg(long)]
    json: bool,
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok([p(lo)?, p(hi)?])
}

fn sweep_config(a: &SweepArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => RunConfig { eta_zero: false, ..RunConfig::default() },
    };
    if let Some(v) = &a.preset {
        cfg.preset = v.clone();
    }
    if let Some(v) = &a.kappa {
        cfg.kappa = v.clone();
    }
    if let Some(v) = &a.natoms {
        cfg.natoms = v.clone();
    }
    cfg.eta_zero |= a.eta_zero;
    if let Some(v) = a.delta_range {
        cfg.delta_range = Some(v);
    }
    if let Some(v) = a.points {
        cfg.points = v;
    }
    if let Some(v) = a.photons {
        cfg.photons = Some(v);
        cfg.probe_intensity = None;
    }
    if let Some(v) = a.intensity {
        cfg.probe_intensity = Some(v);
        cfg.photons = None;
    }
    if let Some(v) = a.n_e {
        cfg.n_e = v;
    }
    if let Some(v) = &a.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &a.format {
        cfg.format = v.iter().map(|s| OutputFormat::from_str(s)).collect::<defbec_core::Result<_>>()?;
    }
    cfg.printed_path |= a.printed_path;
    cfg.subtract_offset |= a.subtract_offset;
    cfg.svg_timestamp |= a.svg_timestamp;
    match a.third_order {
        Some(ThirdOrderArg::ClosedForm) => cfg.third_order = ThirdOrderSource::ClosedForm,
        Some(ThirdOrderArg::MasterEquation) => cfg.third_order = ThirdOrderSource::MasterEquation,
        None => {}
    }
    Ok(cfg)
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let raw = sweep_config(a)?;
    let cfg = raw.resolve()?;
    log::info!(
        "{} families x {} detunings, n = {}, n_e = {}",
        cfg.condensates.len(),
        cfg.delta_grid.len(),
        cfg.photons,
        cfg.n_e
    );
    let out = run_sweep(&cfg)?;
    let written = emit(&out, &cfg)?;
    for f in &out.families {
        let crossings = if f.n_group_zero_crossings_hz.is_empty() {
            "none".to_string()
        } else {
            f.n_group_zero_crossings_hz.iter().map(|d| format!("{d:.6e}")).collect::<Vec<_>>().join(", ")
        };
        println!(
            "kappa = {}, N = {}{}: n_g zero crossings (Hz): {crossings}; both signs: {}; sub/super/luminal = {}/{}/{}; flagged = {}",
            f.kappa,
            f.n_atoms,
            if f.eta == 0.0 { " (eta = 0)" } else { "" },
            if f.n_group_both_signs { "yes" } else { "no" },
            f.subluminal,
            f.superluminal,
            f.luminal,
            f.flagged_points
        );
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run_pulse(profile: &dyn ChiProfile, carrier: f64, a: &PulseArgs) -> Result<PulseRun> {
    let dt = a.fwhm / a.resolution as f64;
    let env = Envelope::gaussian(a.fwhm, dt, a.samples);
    Ok(propagate_pulse(profile, carrier, &env, a.slab_length)?)
}

fn pulse(a: &PulseArgs) -> Result<()> {
    if a.resolution < 2 || a.samples < 8 {
        bail!("need --resolution >= 2 and --samples >= 8");
    }
    if !(a.fwhm > 0.0) {
        bail!("--fwhm must be positive");
    }
    // the profile band covers twice the FFT band
    let half = 2.0 * std::f64::consts::PI * a.resolution as f64 / a.fwhm;
    let run = match a.medium {
        Medium::Vacuum => {
            let carrier = sodium_atoms().omega_opt;
            run_pulse(&FnChi { f: |_| Complex64::new(0.0, 0.0), lo: carrier - half, hi: carrier + half }, carrier, a)?
        }
        Medium::Wang => {
            let w = WangDoublet::standard();
            run_pulse(&FnChi { f: |x| w.chi(x), lo: w.omega0 - half, hi: w.omega0 + half }, w.omega0, a)?
        }
        Medium::Bec => {
            if !(a.natoms >= 1.0 && a.natoms.fract() == 0.0) {
                bail!("--natoms must be a positive integer");
            }
            let mut cond = CondensateParams::new(a.natoms as u64, a.kappa, sodium_density())?;
            if a.eta_zero {
                cond = cond.with_eta_zero();
            }
            let atoms = sodium_atoms();
            let model = SusceptibilityModel::new(atoms, cond, sodium_g1(), a.photons, 1)?;
            let carrier = atoms.omega_opt - hz_to_angular(a.detuning);
            let chi = |w: f64| {
                model
                    .point(atoms.omega_opt - w)
                    .map(|p| p.chi_total)
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            };
            run_pulse(&FnChi { f: chi, lo: carrier - half, hi: carrier + half }, carrier, a)?
        }
    };
    let gain = run.output.energy() / run.input.energy();
    println!("carrier           {:.9e} rad/s", run.carrier);
    println!("slab length       {:e} m", run.slab_length);
    println!("n_g at carrier    {:.9}", run.n_group_carrier);
    println!("vacuum time L/c   {:.6e} s", run.vacuum_time);
    println!("predicted excess  {:.6e} s", run.predicted_delay);
    println!("measured excess   {:.6e} s", run.excess_delay());
    println!("grid step         {:.3e} s", run.input.dt);
    println!("energy gain       {gain:.6}");
    println!("v_g / c           {:.9}", 1.0 / run.n_group_carrier);
    if let Some(path) = &a.out {
        let mut s = String::from("t,in_intensity,out_intensity\n");
        let t0 = run.input.window() / 2.0;
        for (k, (i, o)) in run.input.samples.iter().zip(&run.output.samples).enumerate() {
            s.push_str(&format!("{:e},{:e},{:e}\n", k as f64 * run.input.dt - t0, i.norm_sqr(), o.norm_sqr()));
        }
        std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_validate(a: &ValidateArgs) -> Result<bool> {
    let checks = validate::run_all()?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&checks)?);
    } else {
        for c in &checks {
            println!("{}", c.line());
        }
    }
    let failed = checks.iter().filter(|c| c.passed == Some(false)).count();
    eprintln!("{} checks, {failed} failed", checks.len());
    Ok(failed == 0)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DEFBEC_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("DEFBEC_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("DEFBEC_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Pulse(a) => pulse(a).map(|_| true),
        Command::Validate(a) => run_validate(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
