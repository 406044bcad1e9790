//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad flags or input, 3 physics errors such as a
//! drive on resonance or a vanishing coupling.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use srslab::angular::BeamGeometry;
use srslab::atomdata::{HyperfineState, SpeciesData};
use srslab::error::{Error, Result};
use srslab::expsim::{campaign_with_rate, simulate_survival, SequenceConfig};
use srslab::fitting::{
    extract_srs_rate, fit_exponential, fit_polarization_e2, fit_polarization_raman, read_rabi_measurements,
    FitResult, RamanConstraint, SurvivalCurve,
};
use srslab::gates::{
    best_qubit_search, detuning_sweep, reference_resonance, DrivePair, MsBeams, OperatingPoint, Table2Config,
};
use srslab::lightshift::field_from_stark;
use srslab::plot::{svg_log_plot, Series};
use srslab::scattering::{scattering_report, FinalSelector, LaserDrive, Model, OzeriPhoton, ScatterConfig};
use srslab::units::Frequency;
use srslab::constants::THZ_TO_RAD_S;

#[derive(Parser)]
#[command(name = "srslab", version, about = "Spontaneous Raman scattering rates and gate errors for trapped-ion qubits")]
struct Cli {
    #[command(flatten)]
    species: SpeciesArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpeciesArgs {
    /// Built-in species name, a species file, or a name looked up as
    /// `$SRSLAB_DATA/<name>.species`.
    #[arg(long, global = true, default_value = "ba137")]
    species: String,
    /// Comma-separated intermediate levels (default: all levels of parity
    /// opposite to the ground level).
    #[arg(long, global = true, value_delimiter = ',')]
    intermediates: Option<Vec<String>>,
    /// Minimum allowed |detuning| from any intermediate resonance.
    #[arg(long, global = true, default_value = "1GHz")]
    resonance_floor: Frequency,
}

#[derive(Subcommand)]
enum Command {
    /// Per-final-state scattering rates from one initial state.
    Rate(RateArgs),
    /// Single-qubit π-pulse error against detuning for both models.
    Sweep(SweepArgs),
    /// Two-qubit gate errors at the three operating points.
    Table2(Table2Args),
    /// Qubit pair with the smallest scattering error in a manifold.
    BestQubit(BestQubitArgs),
    /// Fit measured data.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Simulate one survival curve.
    Simulate(SimulateArgs),
    /// Simulate exposed and unexposed survival curves for a drive.
    Campaign(CampaignArgs),
}

#[derive(Args)]
struct DriveArgs {
    /// Laser wavelength or frequency, e.g. `617nm`.
    #[arg(long, conflicts_with = "detuning", required_unless_present = "detuning")]
    lambda: Option<Frequency>,
    /// Laser detuning from the lowest resonance of the initial level, e.g. `-2.5THz`.
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<Frequency>,
    /// Field amplitude in V/m.
    #[arg(long, conflicts_with = "stark_shift", required_unless_present = "stark_shift")]
    field: Option<f64>,
    /// Measured differential light shift that sets the field, e.g. `2pi*20kHz`.
    #[arg(long, allow_hyphen_values = true)]
    stark_shift: Option<Frequency>,
    /// First state of the light-shift calibration pair.
    #[arg(long, default_value = "5D5/2:1,1")]
    stark_d: HyperfineState,
    /// Second state of the light-shift calibration pair.
    #[arg(long, default_value = "6S1/2:1,-1")]
    stark_s: HyperfineState,
    /// Angle of k̂ to the quantization axis (rad).
    #[arg(long, default_value_t = FRAC_PI_2, allow_hyphen_values = true)]
    phi: f64,
    /// Polarization angle in the plane normal to k̂ (rad).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Moore,
    Ozeri,
    Both,
}

#[derive(Args)]
struct RateArgs {
    /// Initial state, `LEVEL:F,m`.
    #[arg(long)]
    state: HyperfineState,
    #[command(flatten)]
    drive: DriveArgs,
    #[arg(long, value_enum, default_value = "moore")]
    model: ModelChoice,
    /// `leakage`, `all`, or `+`-joined level labels; `LEVEL-non-Rayleigh`
    /// drops the initial state.
    #[arg(long, default_value = "leakage")]
    finals: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "5D5/2:1,0")]
    q0: HyperfineState,
    #[arg(long, default_value = "5D5/2:3,0")]
    q1: HyperfineState,
    /// Comma-separated detunings; overrides the range flags.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<Frequency>>,
    #[arg(long, default_value = "-60THz", allow_hyphen_values = true)]
    from: Frequency,
    #[arg(long, default_value = "-2.5THz", allow_hyphen_values = true)]
    to: Frequency,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Common polarization angle of both beams (rad).
    #[arg(long, default_value_t = 0.105, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BeamChoice {
    Perpendicular,
    CounterPropagating,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long, default_value = "2pi*2MHz")]
    trap_frequency: Frequency,
    #[arg(long, value_enum, default_value = "perpendicular")]
    beams: BeamChoice,
    /// π-time of |1,0⟩↔|3,0⟩ at the first operating point (s).
    #[arg(long, default_value_t = 5e-6)]
    pi_time: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BestQubitArgs {
    /// Operating point by nominal wavelength in nm: 617, 674 or 461.
    #[arg(long, default_value_t = 617)]
    point: u32,
    #[arg(long, default_value = "5D5/2")]
    manifold: String,
}

#[derive(Subcommand)]
enum FitCommand {
    /// Exponential fit of a survival curve, with optional subtraction.
    Lifetime {
        /// Curve measured with the scattering light on.
        #[arg(long)]
        on: PathBuf,
        /// Curve measured without it.
        #[arg(long)]
        off: Option<PathBuf>,
    },
    /// Quadrupole polarization from Δm-labelled Rabi frequencies.
    E2 {
        #[arg(long)]
        data: PathBuf,
        /// Fixed k̂ angle (rad); fitted when absent.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<f64>,
    },
    /// Raman beam polarizations from state-pair Rabi frequencies.
    Raman {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, conflicts_with = "detuning", required_unless_present = "detuning")]
        lambda: Option<Frequency>,
        /// Detuning from the lowest resonance of the 5D5/2 level.
        #[arg(long, allow_hyphen_values = true)]
        detuning: Option<Frequency>,
        #[arg(long, value_enum, default_value = "perpendicular")]
        constraint: ConstraintChoice,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintChoice {
    Perpendicular,
    EqualAngle,
    Free,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long, default_value_t = 0.1)]
    bin: f64,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SequenceArgs {
    fn config(&self, rate: f64) -> SequenceConfig {
        SequenceConfig::new(rate)
            .with_bin(self.bin)
            .with_max_bins(self.bins)
            .with_trials(self.trials)
            .with_seed(self.seed)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Total decay rate (1/s).
    #[arg(long)]
    rate: f64,
    #[command(flatten)]
    sequence: SequenceArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, default_value = "5D5/2:1,0")]
    state: HyperfineState,
    #[command(flatten)]
    drive: DriveArgs,
    /// Natural decay rate of the initial level (1/s).
    #[arg(long)]
    natural_rate: f64,
    #[command(flatten)]
    sequence: SequenceArgs,
    #[arg(long)]
    on: PathBuf,
    #[arg(long)]
    off: PathBuf,
}

fn load_species(name: &str) -> Result<SpeciesData> {
    let path = Path::new(name);
    if path.is_file() {
        return SpeciesData::load(path);
    }
    if let Some(dir) = std::env::var_os("SRSLAB_DATA") {
        let candidate = Path::new(&dir).join(format!("{name}.species"));
        if candidate.is_file() {
            return SpeciesData::load(candidate);
        }
    }
    SpeciesData::builtin(name)
}

fn scatter_config(species: &SpeciesData, args: &SpeciesArgs) -> Result<ScatterConfig> {
    let mut cfg = ScatterConfig::for_species(species).with_floor(args.resonance_floor.angular()?);
    if let Some(list) = &args.intermediates {
        for label in list {
            species.level(label)?;
        }
        cfg = cfg.with_intermediates(list);
    }
    Ok(cfg)
}

fn laser_omega(
    species: &SpeciesData,
    level: &str,
    lambda: Option<Frequency>,
    detuning: Option<Frequency>,
    cfg: &ScatterConfig,
) -> Result<f64> {
    match (lambda, detuning) {
        (Some(l), None) => l.omega(),
        (None, Some(d)) => Ok(reference_resonance(species, level, cfg)? + d.angular()?),
        _ => Err(Error::InvalidArgument("give exactly one of --lambda and --detuning".into())),
    }
}

fn build_drive(species: &SpeciesData, level: &str, args: &DriveArgs, cfg: &ScatterConfig) -> Result<LaserDrive> {
    let omega = laser_omega(species, level, args.lambda, args.detuning, cfg)?;
    let geometry = BeamGeometry::new(args.phi, args.gamma);
    let field = match (args.field, args.stark_shift) {
        (Some(f), None) => f,
        (None, Some(shift)) => {
            let unit = LaserDrive::from_geometry(omega, 1.0, geometry)?;
            field_from_stark(species, &args.stark_d, &args.stark_s, &unit, shift.angular()?, cfg)?
        }
        _ => return Err(Error::InvalidArgument("give exactly one of --field and --stark-shift".into())),
    };
    LaserDrive::from_geometry(omega, field, geometry)
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_rate(species: &SpeciesData, cfg: &ScatterConfig, args: &RateArgs) -> Result<()> {
    species.validate_state(&args.state)?;
    let drive = build_drive(species, &args.state.level, &args.drive, cfg)?;
    let finals = FinalSelector::parse(&args.finals)?;
    let models: Vec<Model> = match args.model {
        ModelChoice::Moore => vec![Model::Moore],
        ModelChoice::Ozeri => vec![Model::Ozeri(OzeriPhoton::default())],
        ModelChoice::Both => vec![Model::Moore, Model::Ozeri(OzeriPhoton::default())],
    };
    let reports = models
        .iter()
        .map(|&m| scattering_report(species, &args.state, &drive, &finals, cfg, m))
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_output(&args.output)?;
    writeln!(out, "final_level,F,m,rate_lambda_v_per_s,rate_ladder_per_s,model")?;
    for report in &reports {
        for row in &report.rows {
            writeln!(
                out,
                "{},{},{},{:e},{:e},{}",
                row.final_state.level,
                row.final_state.f,
                row.final_state.m,
                row.rates.lambda_v,
                row.rates.ladder,
                report.model.name()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_sweep(species: &SpeciesData, cfg: &ScatterConfig, args: &SweepArgs) -> Result<()> {
    species.validate_state(&args.q0)?;
    species.validate_state(&args.q1)?;
    let grid: Vec<f64> = match &args.grid {
        Some(list) => list.iter().map(|f| f.angular()).collect::<Result<_>>()?,
        None => {
            let (a, b) = (args.from.angular()?, args.to.angular()?);
            if args.steps < 2 {
                return Err(Error::InvalidArgument("--steps must be at least 2".into()));
            }
            (0..args.steps)
                .map(|k| a + (b - a) * k as f64 / (args.steps - 1) as f64)
                .collect()
        }
    };
    let reference = reference_resonance(species, &args.q0.level, cfg)?;
    // the error is field independent; any amplitude will do
    let pair = DrivePair::perpendicular(reference + grid[0], 1.0, args.gamma)?;
    let rows = detuning_sweep(species, &args.q0, &args.q1, &pair, reference, &grid, cfg)?;
    let mut out = open_output(&args.output)?;
    writeln!(out, "detuning_THz,error_moore,error_ozeri")?;
    for r in &rows {
        writeln!(out, "{},{:e},{:e}", r.detuning / THZ_TO_RAD_S, r.error_moore, r.error_ozeri)?;
    }
    out.flush()?;
    if let Some(path) = &args.plot {
        let series = |label: &str, f: fn(&srslab::gates::SweepRow) -> f64| Series {
            label: label.to_string(),
            points: rows.iter().map(|r| (r.detuning / THZ_TO_RAD_S, f(r))).collect(),
        };
        let svg = svg_log_plot(
            &format!("π-pulse scattering error, {} / {}", args.q0, args.q1),
            "detuning (THz)",
            "error",
            &[series("Moore", |r| r.error_moore), series("Ozeri", |r| r.error_ozeri)],
        );
        std::fs::write(path, svg)?;
    }
    Ok(())
}

fn cmd_table2(species: &SpeciesData, cfg: &ScatterConfig, args: &Table2Args) -> Result<()> {
    let mut table = Table2Config::ba137_default();
    table.trap_frequency = args.trap_frequency.angular()?;
    table.beams = match args.beams {
        BeamChoice::Perpendicular => MsBeams::Perpendicular,
        BeamChoice::CounterPropagating => MsBeams::CounterPropagating,
    };
    table.reference_pi_time = args.pi_time;
    let rows = srslab::gates::table2(species, &table, cfg)?;
    let mut out = open_output(&args.output)?;
    writeln!(out, "wavelength_nm,predicted,best_qubit")?;
    for r in &rows {
        writeln!(out, "{},{:e},{:e}", r.wavelength_nm, r.two_qubit, r.best_two_qubit)?;
    }
    out.flush()?;
    Ok(())
}

fn operating_point(nm: u32) -> Result<OperatingPoint> {
    OperatingPoint::all()
        .into_iter()
        .find(|p| p.wavelength_nm == nm as f64)
        .ok_or_else(|| Error::InvalidArgument(format!("no operating point at {nm} nm (use 617, 674 or 461)")))
}

fn cmd_best_qubit(species: &SpeciesData, cfg: &ScatterConfig, args: &BestQubitArgs) -> Result<()> {
    let point = operating_point(args.point)?;
    let reference = reference_resonance(species, &args.manifold, cfg)?;
    let best = best_qubit_search(species, &point.drive_pair(reference, 1.0)?, &args.manifold, cfg)?;
    println!("{} {} {:e}", best.q0, best.q1, best.error);
    Ok(())
}

fn print_fit(out: &mut dyn Write, fit: &FitResult) -> Result<()> {
    for p in &fit.params {
        writeln!(out, "{},{:e},{:e}", p.name, p.value, p.std_error)?;
    }
    Ok(())
}

fn cmd_fit(species: &SpeciesData, cfg: &ScatterConfig, cmd: &FitCommand) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        FitCommand::Lifetime { on, off } => {
            let fit_on = fit_exponential(&SurvivalCurve::read_csv(on)?)?;
            writeln!(out, "parameter,value,std_error")?;
            match off {
                None => print_fit(&mut out, &fit_on)?,
                Some(off) => {
                    let fit_off = fit_exponential(&SurvivalCurve::read_csv(off)?)?;
                    let srs = extract_srs_rate(&fit_on, &fit_off)?;
                    let (a, b) = (fit_on.param("rate")?, fit_off.param("rate")?);
                    writeln!(out, "rate_on,{:e},{:e}", a.value, a.std_error)?;
                    writeln!(out, "rate_off,{:e},{:e}", b.value, b.std_error)?;
                    writeln!(out, "srs_rate,{:e},{:e}", srs.rate, srs.std_error)?;
                    if srs.nonphysical {
                        eprintln!("warning: scattering rate is negative beyond its standard error");
                    }
                }
            }
        }
        FitCommand::E2 { data, phi } => {
            let measured = read_rabi_measurements(File::open(data)?)?;
            let fit = fit_polarization_e2(&measured, *phi)?;
            writeln!(out, "parameter,value,std_error")?;
            print_fit(&mut out, &fit)?;
        }
        FitCommand::Raman {
            data,
            lambda,
            detuning,
            constraint,
        } => {
            let measured = read_rabi_measurements(File::open(data)?)?;
            let omega = laser_omega(species, "5D5/2", *lambda, *detuning, cfg)?;
            let constraint = match constraint {
                ConstraintChoice::Perpendicular => RamanConstraint::PerpendicularEqualAngle,
                ConstraintChoice::EqualAngle => RamanConstraint::EqualAngle,
                ConstraintChoice::Free => RamanConstraint::Free,
            };
            let fit = fit_polarization_raman(species, &measured, omega, constraint, cfg)?;
            writeln!(out, "parameter,value,std_error")?;
            print_fit(&mut out, &fit)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let curve = simulate_survival(&args.sequence.config(args.rate))?;
    curve.to_writer(open_output(&args.output)?)
}

fn cmd_campaign(species: &SpeciesData, cfg: &ScatterConfig, args: &CampaignArgs) -> Result<()> {
    species.validate_state(&args.state)?;
    let drive = build_drive(species, &args.state.level, &args.drive, cfg)?;
    let report = scattering_report(species, &args.state, &drive, &FinalSelector::Leakage, cfg, Model::Moore)?;
    let campaign = campaign_with_rate(report.total_rate(), args.natural_rate, &args.sequence.config(0.0))?;
    campaign.on.write_csv(&args.on)?;
    campaign.off.write_csv(&args.off)?;
    println!("srs_rate_per_s,{:e}", campaign.srs_rate);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Simulate(args) = &cli.command {
        return cmd_simulate(args);
    }
    let species = load_species(&cli.species.species)?;
    let cfg = scatter_config(&species, &cli.species)?;
    match &cli.command {
        Command::Rate(a) => cmd_rate(&species, &cfg, a),
        Command::Sweep(a) => cmd_sweep(&species, &cfg, a),
        Command::Table2(a) => cmd_table2(&species, &cfg, a),
        Command::BestQubit(a) => cmd_best_qubit(&species, &cfg, a),
        Command::Fit(c) => cmd_fit(&species, &cfg, c),
        Command::Campaign(a) => cmd_campaign(&species, &cfg, a),
        Command::Simulate(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_physics() { 3 } else { 2 })
        }
    }
}
