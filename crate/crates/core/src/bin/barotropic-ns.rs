use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use barotropic_ns::app::run_mode;
use barotropic_ns::config::{parse_config, Mode, Overrides, Preset, OUT_ENV};
use barotropic_ns::Error;

/// Stationary solutions, admissibility checks and stability diagnostics for
/// 1D barotropic Navier-Stokes with density-dependent viscosity.
#[derive(Parser)]
#[command(name = "barotropic-ns", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the stationary connection and write its profile.
    Steady(RunArgs),
    /// Integrate the time-dependent system and record diagnostics.
    Evolve(RunArgs),
    /// Tabulate membership of the admissible (v*, alpha) region.
    SigmaMap(RunArgs),
    /// Check the jump relations and entropy inequality for a discontinuity.
    HyperbolicCheck(RunArgs),
    /// Render the figure selected by the preset or `[figures] kind`.
    Figures(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set: fig1, fig2, fig3 or fig4.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Output directory (default: $BAROTROPIC_NS_OUT/<mode>[-<preset>] or out/...).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grid intervals.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Seed for random perturbations.
    #[arg(long)]
    seed: Option<u64>,
    /// Hyperbolic CFL number.
    #[arg(long = "cfl-h")]
    cfl_h: Option<f64>,
    /// Parabolic CFL number.
    #[arg(long = "cfl-p")]
    cfl_p: Option<f64>,
    /// Steps between logged states.
    #[arg(long)]
    stride: Option<usize>,
    /// Initial data: steady, tanh(a,b), perturbed-steady(amplitude) or state:PATH.
    #[arg(long)]
    initial: Option<String>,
    /// Left density of a jump for hyperbolic-check.
    #[arg(long = "rho-minus", allow_hyphen_values = true)]
    rho_minus: Option<f64>,
    /// Left velocity of the jump.
    #[arg(long = "w-minus", allow_hyphen_values = true)]
    w_minus: Option<f64>,
    /// Right density of the jump.
    #[arg(long = "rho-plus", allow_hyphen_values = true)]
    rho_plus: Option<f64>,
    /// Right velocity; with --c omitted both are solved from the jump relations.
    #[arg(long = "w-plus", allow_hyphen_values = true)]
    w_plus: Option<f64>,
    /// Jump speed.
    #[arg(long = "c", allow_hyphen_values = true)]
    c: Option<f64>,
    /// Print the machine-readable summary record instead of text.
    #[arg(long)]
    json: bool,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            preset: self.preset,
            out: self.out.clone(),
            n: self.n,
            t_final: self.t_final,
            seed: self.seed,
            cfl_hyperbolic: self.cfl_h,
            cfl_parabolic: self.cfl_p,
            stride: self.stride,
            initial: self.initial.clone(),
            rho_minus: self.rho_minus,
            w_minus: self.w_minus,
            rho_plus: self.rho_plus,
            w_plus: self.w_plus,
            c: self.c,
        }
    }
}

fn run(mode: Mode, args: &RunArgs) -> anyhow::Result<()> {
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let cfg = parse_config(mode, &args.overrides(), env_out.as_deref())?;
    let outcome =
        run_mode(&cfg).with_context(|| format!("{mode} failed; partial artifacts in {}", cfg.out.display()))?;
    let mut text = String::new();
    if args.json {
        text.push_str(&serde_json::to_string_pretty(&outcome.record)?);
        text.push('\n');
    } else {
        for line in &outcome.lines {
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(&format!(
            "wrote {} files to {} (manifest.json)\n",
            outcome.manifest.files.len(),
            cfg.out.display()
        ));
    }
    // A closed pipe (e.g. `| head`) is not a failure of the run.
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Steady(a) => (Mode::Steady, a),
        Command::Evolve(a) => (Mode::Evolve, a),
        Command::SigmaMap(a) => (Mode::SigmaMap, a),
        Command::HyperbolicCheck(a) => (Mode::HyperbolicCheck, a),
        Command::Figures(a) => (Mode::Figures, a),
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<Error>()
                .is_some_and(|e| matches!(e, Error::Configuration(_) | Error::Usage(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
