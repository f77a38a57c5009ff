//! `fiberlink` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fiberlink::continuous::{self, OnOffSolution};
use fiberlink::link::propagate;
use fiberlink::optimize::{self, EnergyModel, OptimizationResult};
use fiberlink::quantum_limit::{self, BaudScan, NoiseModel};
use fiberlink::se;
use fiberlink::sweep::{self, Field, Format, Problem, SweepSpec};
use fiberlink::units;
use fiberlink::{Error, GainProfile, LinkConfig, ReceiverKind};

#[derive(Parser)]
#[command(
    name = "fiberlink",
    version,
    about = "Amplified fiber link rates, gain optimization and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral efficiencies of one link and gain profile.
    Se(SeArgs),
    /// Solve one gain-selection problem.
    Optimize(OptimizeArgs),
    /// Run an (L, K, n) grid from a spec file and/or flags.
    Sweep(SweepArgs),
    /// Continuous amplification and the on-off problem.
    Continuous(ContinuousArgs),
    /// Rates against baud rate at fixed optical power, with the crossover.
    Baudscan(BaudscanArgs),
    /// Hadamard-code receiver rates.
    Hadamard(HadamardArgs),
}

#[derive(Args)]
struct LinkArgs {
    /// Fiber attenuation in 1/km.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Total length in km.
    #[arg(long = "length", short = 'L')]
    length: f64,
    /// Number of segments K.
    #[arg(long = "segments", short = 'K')]
    segments: usize,
    /// Photons per pulse at the sender. Alternatively give --power and --baud.
    #[arg(long, short = 'n', conflicts_with_all = ["power", "baud"])]
    photons: Option<f64>,
    /// Launch power in W.
    #[arg(long, requires = "baud")]
    power: Option<f64>,
    /// Pulses per second.
    #[arg(long, requires = "power")]
    baud: Option<f64>,
    /// Carrier wavelength in m.
    #[arg(long, default_value_t = units::DEFAULT_WAVELENGTH)]
    wavelength: f64,
}

impl LinkArgs {
    fn config(&self) -> Result<LinkConfig, Failure> {
        let photons = match (self.photons, self.power, self.baud) {
            (Some(n), _, _) => n,
            (None, Some(p), Some(b)) => units::photons_per_pulse(p, self.wavelength, b)?,
            _ => return Err(Failure::input("give --photons or both --power and --baud")),
        };
        Ok(LinkConfig::new(
            self.alpha,
            self.length,
            self.segments,
            photons,
        )?)
    }
}

#[derive(Args)]
struct SeArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Gains G_1..G_K; defaults to full amplification.
    #[arg(long, value_delimiter = ',')]
    gains: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizeProblem {
    Egs,
    Regs,
    Segs,
    HomodyneEgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Receiver {
    Heterodyne,
    Holevo,
    Homodyne,
}

#[derive(Args)]
struct OptimizeArgs {
    problem: OptimizeProblem,
    #[command(flatten)]
    link: LinkArgs,
    /// Rate target in bits; defaults to the fully amplified heterodyne rate.
    #[arg(long)]
    target: Option<f64>,
    /// Receiver maximized by `segs`.
    #[arg(long, value_enum, default_value_t = Receiver::Holevo)]
    receiver: Receiver,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML spec; flags override its values.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Lengths in km, comma separated.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
    /// Segment counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    segments: Option<Vec<usize>>,
    /// Photon numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    photons: Option<Vec<f64>>,
    /// Subset of segs, egs, regs, homodyne-egs.
    #[arg(long, value_delimiter = ',')]
    problems: Option<Vec<String>>,
    /// Output file; stdout when absent.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Instead of the length grid, locate AE = LEVEL per (K, n) and evaluate
    /// there.
    #[arg(long, value_name = "LEVEL")]
    ae_trace: Option<f64>,
    /// Upper end of the length search for --ae-trace, km.
    #[arg(long, default_value_t = 5000.0)]
    max_length: f64,
    /// Iso-line `FIELD=LEVEL` over the grid (fields: ae, se-shannon-op,
    /// savings-egs, savings-regs), written to --iso-output.
    #[arg(long, requires = "iso_output")]
    iso: Option<String>,
    #[arg(long)]
    iso_output: Option<PathBuf>,
}

#[derive(Args)]
struct ContinuousArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Lengths in km, comma separated.
    #[arg(long, short = 'L', value_delimiter = ',', required = true)]
    length: Vec<f64>,
    /// Photon number of the heterodyne baseline.
    #[arg(long, default_value_t = 1e7)]
    n0: f64,
}

#[derive(Args)]
struct OpticalArgs {
    /// Launch power in W.
    #[arg(long, default_value_t = 1e-3)]
    power: f64,
    /// Carrier wavelength in m.
    #[arg(long, default_value_t = units::DEFAULT_WAVELENGTH)]
    wavelength: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Length in km.
    #[arg(long, short = 'L', default_value_t = 185.0)]
    length: f64,
}

impl OpticalArgs {
    fn flux_and_tau(&self) -> Result<(f64, f64), Failure> {
        if !(self.alpha >= 0.0) || !(self.length >= 0.0) {
            return Err(Failure::input("alpha and length must be >= 0"));
        }
        let flux = units::photon_flux(self.power, self.wavelength)?;
        Ok((flux, (-self.alpha * self.length).exp()))
    }
}

#[derive(Args)]
struct BaudscanArgs {
    #[command(flatten)]
    optical: OpticalArgs,
    /// Thermal noise photons per pulse.
    #[arg(long, conflicts_with = "nu_flux")]
    nu: Option<f64>,
    /// Thermal noise photons per second.
    #[arg(long)]
    nu_flux: Option<f64>,
    #[arg(long, default_value_t = 1e9)]
    b_min: f64,
    #[arg(long, default_value_t = 1e16)]
    b_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HadamardArgs {
    #[command(flatten)]
    optical: OpticalArgs,
    #[arg(long, default_value_t = 1.8e13)]
    baud: f64,
    /// Code orders, comma separated powers of two.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    orders: Vec<u32>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Io { .. }) { 2 } else { 1 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Se(a) => cmd_se(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Continuous(a) => cmd_continuous(a),
        Command::Baudscan(a) => cmd_baudscan(a),
        Command::Hadamard(a) => cmd_hadamard(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn write_or_print(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| Failure::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

#[derive(Serialize)]
struct SeReport {
    eta: f64,
    g_max: f64,
    gains: Vec<f64>,
    tau: f64,
    nu: f64,
    se_shannon: f64,
    se_holevo: f64,
    se_homodyne: f64,
    se_shannon_op: f64,
    se_shannon_noamp: f64,
    se_holevo_noamp: f64,
    ae: f64,
}

fn cmd_se(a: SeArgs) -> Result<(), Failure> {
    let cfg = a.link.config()?;
    let profile = match a.gains {
        Some(g) => GainProfile::new(g)?,
        None => GainProfile::fully_amplified(&cfg),
    };
    profile.validate(&cfg)?;
    let c = propagate(&cfg, &profile)?;
    let bare = propagate(&cfg, &GainProfile::unamplified(cfg.segments))?;
    let n = cfg.photons;
    print_json(&SeReport {
        eta: cfg.eta(),
        g_max: cfg.max_gain(),
        gains: profile.gains().to_vec(),
        tau: c.tau,
        nu: c.nu,
        se_shannon: se::shannon_se(&c, n),
        se_holevo: se::holevo_se(&c, n),
        se_homodyne: se::homodyne_se(&c, n),
        se_shannon_op: optimize::shannon_optimal_se(&cfg),
        se_shannon_noamp: se::shannon_se(&bare, n),
        se_holevo_noamp: se::holevo_se(&bare, n),
        ae: sweep::amplification_enhancement(&cfg),
    })
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), Failure> {
    let cfg = a.link.config()?;
    let r: OptimizationResult = match a.problem {
        OptimizeProblem::Egs => {
            optimize::solve_egs(&cfg, a.target, EnergyModel::Exact, ReceiverKind::Holevo)?
        }
        OptimizeProblem::Regs => {
            optimize::solve_egs(&cfg, a.target, EnergyModel::Relaxed, ReceiverKind::Holevo)?
        }
        OptimizeProblem::HomodyneEgs => {
            optimize::solve_egs(&cfg, a.target, EnergyModel::Exact, ReceiverKind::Homodyne)?
        }
        OptimizeProblem::Segs => match a.receiver {
            Receiver::Heterodyne => optimize::segs_shannon(&cfg)?,
            Receiver::Holevo => optimize::segs_holevo(&cfg)?,
            Receiver::Homodyne => optimize::segs_for(&cfg, ReceiverKind::Homodyne)?,
        },
    };
    print_json(&r)
}

fn load_spec(a: &SweepArgs) -> Result<SweepSpec, Failure> {
    let mut spec = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            toml::from_str::<SweepSpec>(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        }
        None => SweepSpec {
            alpha: 0.05,
            lengths: Vec::new(),
            segments: Vec::new(),
            n_values: Vec::new(),
            problems: vec![Problem::Egs, Problem::Regs],
            output_path: None,
            format: Format::Csv,
        },
    };
    if let Some(v) = a.alpha {
        spec.alpha = v;
    }
    if let Some(v) = &a.lengths {
        spec.lengths = v.clone();
    }
    if let Some(v) = &a.segments {
        spec.segments = v.clone();
    }
    if let Some(v) = &a.photons {
        spec.n_values = v.clone();
    }
    if let Some(v) = &a.problems {
        spec.problems = v
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.parse())
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = &a.output {
        spec.output_path = Some(v.clone());
    }
    if let Some(v) = a.format {
        spec.format = v.into();
    }
    spec.problems.sort();
    spec.problems.dedup();
    if a.ae_trace.is_some() && spec.lengths.is_empty() {
        // The trace searches lengths itself.
        spec.lengths = vec![a.max_length];
    }
    spec.validate()?;
    Ok(spec)
}

fn parse_iso(s: &str) -> Result<(Field, f64), Failure> {
    let (field, level) = s
        .split_once('=')
        .ok_or_else(|| Failure::input(format!("--iso expects FIELD=LEVEL, got `{s}`")))?;
    let field = match field {
        "ae" => Field::Ae,
        "se-shannon-op" => Field::SeShannonOp,
        "savings-egs" => Field::SavingsEgs,
        "savings-regs" => Field::SavingsRegs,
        other => return Err(Failure::input(format!("unknown iso field `{other}`"))),
    };
    let level = level
        .parse()
        .map_err(|_| Failure::input(format!("bad iso level `{level}`")))?;
    Ok((field, level))
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let spec = load_spec(&a)?;
    let iso = a.iso.as_deref().map(parse_iso).transpose()?;
    let cells = match a.ae_trace {
        Some(level) => {
            let mut cells = Vec::new();
            for &k in &spec.segments {
                let pts = sweep::ae_trace(
                    spec.alpha,
                    k,
                    &spec.n_values,
                    level,
                    a.max_length,
                    &spec.problems,
                )?;
                cells.extend(pts.into_iter().map(|p| p.cell));
            }
            cells
        }
        None => sweep::run_sweep(&spec)?,
    };
    let body = match spec.format {
        Format::Csv => sweep::to_csv(&spec, &cells)?,
        Format::Json => sweep::to_json(&cells)?,
    };
    write_or_print(spec.output_path.as_deref(), &body)?;
    if let (Some((field, level)), Some(path)) = (iso, a.iso_output.as_deref()) {
        let line = sweep::iso_line(&cells, field, level);
        fs::write(path, sweep::iso_line_csv(&line)).map_err(|e| Failure::io(path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ContinuousRow {
    #[serde(rename = "L_km")]
    length: f64,
    se_shannon_inf: f64,
    #[serde(flatten)]
    onoff: OnOffSolution,
    savings_pct: f64,
}

fn cmd_continuous(a: ContinuousArgs) -> Result<(), Failure> {
    let rows = a
        .length
        .iter()
        .map(|&length| {
            let onoff = continuous::solve_onoff(a.alpha, length, a.n0)?;
            Ok(ContinuousRow {
                length,
                se_shannon_inf: continuous::shannon_se_continuous(a.alpha, length, a.n0),
                savings_pct: 100.0 * onoff.savings_fraction(),
                onoff,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    print_json(&rows)
}

#[derive(Serialize)]
struct BaudscanReport {
    #[serde(flatten)]
    scan: BaudScan,
    ossr_bound: Option<f64>,
    crossover_baud: Option<f64>,
}

fn cmd_baudscan(a: BaudscanArgs) -> Result<(), Failure> {
    let (flux, tau) = a.optical.flux_and_tau()?;
    if !(a.b_min > 0.0) || !(a.b_max >= a.b_min) || a.points == 0 {
        return Err(Failure::input("need 0 < b-min <= b-max and points >= 1"));
    }
    let noise = match a.nu_flux {
        Some(f) => NoiseModel::PerSecond(f),
        None => NoiseModel::PerPulse(a.nu.unwrap_or(0.0)),
    };
    let scan = BaudScan::compute(
        flux,
        tau,
        noise,
        quantum_limit::log_grid(a.b_min, a.b_max, a.points),
    )?;
    let (ossr_bound, crossover_baud) = match noise {
        NoiseModel::PerPulse(nu) => (
            Some(quantum_limit::ossr_bound(flux, tau, nu)),
            quantum_limit::quantum_limit_crossover(flux, tau, nu)?,
        ),
        NoiseModel::PerSecond(_) => (None, None),
    };
    let body = match a.format {
        FormatArg::Json => {
            let report = BaudscanReport {
                scan,
                ossr_bound,
                crossover_baud,
            };
            serde_json::to_string_pretty(&report).map_err(|e| Failure::input(e.to_string()))? + "\n"
        }
        FormatArg::Csv => {
            let mut s = String::from("baud,rate_ossr,rate_ojdr\n");
            for j in 0..scan.baud_points.len() {
                s += &format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    scan.baud_points[j], scan.rates_ossr[j], scan.rates_ojdr[j]
                );
            }
            if let Some(b) = crossover_baud {
                eprintln!("crossover_baud={b:.16e}");
            }
            s
        }
    };
    write_or_print(a.output.as_deref(), &body)
}

#[derive(Serialize)]
struct HadamardRow {
    order: u32,
    rate: f64,
}

fn cmd_hadamard(a: HadamardArgs) -> Result<(), Failure> {
    let (flux, tau) = a.optical.flux_and_tau()?;
    if !(a.baud > 0.0) {
        return Err(Failure::input("baud must be > 0"));
    }
    let rows = a
        .orders
        .iter()
        .map(|&k| {
            Ok(HadamardRow {
                order: k,
                rate: quantum_limit::rate_hadamard(flux, tau, a.baud, k)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    print_json(&rows)
}
