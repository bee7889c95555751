//! `eitat`: probe-absorption spectra, resonance decomposition and EIT/AT
//! classification for three-level atoms, from the command line.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eitat::analysis::{classify, dip_report, evolution_suite, ratio_scan, DipReport, RatioPoint};
use eitat::lineshape::{poles, spectrum_table, Prefactor};
use eitat::model::{raw_threshold, threshold_factor};
use eitat::oracle::{compare_to_closed_form, DEFAULT_PROBE_EPS};

use config::{CommonArgs, FactorList, FieldArgs, FileConfig, Format, MetricArg, RangeSpec, RunConfig, Switch};
use output::{csv_line, emit, num, report, to_json, SCHEMA_VERSION, SPECTRUM_COLUMNS};

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Degenerate(String),
    Verification(String),
    Other(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Degenerate(_) => EXIT_DEGENERATE,
            Failure::Verification(_) => EXIT_VERIFY,
            Failure::Other(_) => EXIT_OTHER,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Degenerate(m) | Failure::Verification(m) => f.write_str(m),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<eitat::Error> for Failure {
    fn from(e: eitat::Error) -> Self {
        use eitat::Error::*;
        match e {
            DegeneratePole { .. } => Failure::Degenerate(format!(
                "{e}; nudge the field off the threshold, e.g. --threshold-factor 1.001 or 0.999"
            )),
            DegenerateThreshold { .. } => Failure::Degenerate(e.to_string()),
            ForbiddenChannel { .. } | InvalidRate { .. } | InvalidGrid(_) | InvalidArgument(_) => {
                Failure::Usage(e.to_string())
            }
            GridTooNarrow | NearSingularDenominator { .. } | SingularSystem { .. } => {
                Failure::Other(anyhow::Error::new(e))
            }
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

#[derive(Parser)]
#[command(name = "eitat", version, about = "Three-level probe absorption: spectra, resonances, EIT vs AT")]
struct Cli {
    /// TOML file with default values; keys are the long flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay rates, coherence damping and threshold of a scheme.
    Params(ParamsCmd),
    /// Resonances and total coherence over a probe-detuning grid.
    Spectrum(SpectrumCmd),
    /// The pole pair Z_I, Z_II.
    Poles(PolesCmd),
    /// Ratio of resonance maxima versus threshold factor.
    RatioScan(RatioScanCmd),
    /// Regime, category and phenomenon at one operating point.
    Classify(ClassifyCmd),
    /// Spectra at a descending list of threshold factors.
    Evolution(EvolutionCmd),
    /// Compare the closed form against the steady-state Bloch equations.
    Verify(VerifyCmd),
}

#[derive(Args)]
struct ParamsCmd {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    field: FieldArgs,
    /// Probe-detuning grid MIN:MAX:N (default: ±5·max(Ωc, γ23), 2001 points).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<RangeSpec>,
    /// Include the saturation prefactor.
    #[arg(long, value_enum)]
    prefactor: Option<Switch>,
}

#[derive(Args)]
struct PolesCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct RatioScanCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Threshold-factor range MIN:MAX:N.
    #[arg(long)]
    factors: Option<RangeSpec>,
    /// Space the factors logarithmically.
    #[arg(long)]
    log: bool,
    /// Resonance size measure.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    field: FieldArgs,
    /// Grid for the dip analysis MIN:MAX:N (odd N).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<RangeSpec>,
}

#[derive(Args)]
struct EvolutionCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Descending threshold factors, comma separated.
    #[arg(long)]
    factors: Option<FactorList>,
    #[arg(long, value_enum)]
    prefactor: Option<Switch>,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<RangeSpec>,
    /// Probe strength relative to max(threshold, γ23).
    #[arg(long)]
    probe_eps: Option<f64>,
    /// Largest accepted relative RMS residual.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Params(c) => cmd_params(RunConfig::resolve(&c.common, &file)?),
        Command::Spectrum(c) => {
            let cfg = RunConfig::resolve(&c.common, &file)?
                .with_field(&c.field, &file)?
                .with_grid(c.grid)
                .with_prefactor(c.prefactor);
            cmd_spectrum(&cfg)
        }
        Command::Poles(c) => cmd_poles(&RunConfig::resolve(&c.common, &file)?.with_field(&c.field, &file)?),
        Command::RatioScan(c) => {
            let cfg = RunConfig::resolve(&c.common, &file)?.with_metric(c.metric);
            let range = match (c.factors, &file.factors) {
                (Some(r), _) => r,
                (None, Some(s)) => s.parse().map_err(Failure::Usage)?,
                (None, None) => RangeSpec {
                    min: 0.05,
                    max: 10.0,
                    count: 100,
                },
            };
            cmd_ratio_scan(&cfg, range, c.log || file.log.unwrap_or(false))
        }
        Command::Classify(c) => {
            let cfg = RunConfig::resolve(&c.common, &file)?
                .with_field(&c.field, &file)?
                .with_grid(c.grid);
            cmd_classify(&cfg)
        }
        Command::Evolution(c) => {
            let cfg = RunConfig::resolve(&c.common, &file)?.with_prefactor(c.prefactor);
            let factors = match (c.factors, &file.factors) {
                (Some(f), _) => f.0,
                (None, Some(s)) => s.parse::<FactorList>().map_err(Failure::Usage)?.0,
                (None, None) => eitat::analysis::DEFAULT_EVOLUTION_FACTORS.to_vec(),
            };
            cmd_evolution(&cfg, &factors)
        }
        Command::Verify(c) => {
            let cfg = RunConfig::resolve(&c.common, &file)?
                .with_field(&c.field, &file)?
                .with_grid(c.grid);
            let probe_eps = c.probe_eps.or(file.probe_eps).unwrap_or(DEFAULT_PROBE_EPS);
            let tol = c.tol.or(file.tol).unwrap_or(1e-6);
            cmd_verify(&cfg, probe_eps, tol)
        }
    }
}

fn factor_of(cfg: &RunConfig, omega_c: f64) -> Option<f64> {
    threshold_factor(omega_c, raw_threshold(cfg.scheme.system, &cfg.scheme.gammas)).ok()
}

#[derive(Serialize)]
struct ParamsJson {
    schema_version: u32,
    system: String,
    probe_transition: String,
    coupling_transition: String,
    decay: Vec<(String, f64)>,
    gamma12: f64,
    gamma13: f64,
    gamma23: f64,
    threshold: f64,
}

fn cmd_params(cfg: RunConfig) -> Result<(), Failure> {
    let s = cfg.scheme;
    let threshold = raw_threshold(s.system, &s.gammas);
    let decay: Vec<(String, f64)> = s.decay.channels().map(|((i, j), w)| (format!("W{i}{j}"), w)).collect();
    let text = match cfg.format {
        Format::Csv => {
            let mut pairs = vec![
                ("system", s.system.to_string()),
                ("probe_transition", s.system.probe_transition().to_string()),
                ("coupling_transition", s.system.coupling_transition().to_string()),
            ];
            let decay_lines: Vec<(&str, String)> = decay.iter().map(|(k, w)| (k.as_str(), num(*w))).collect();
            pairs.extend(decay_lines);
            pairs.extend([
                ("gamma12", num(s.gammas.gamma12)),
                ("gamma13", num(s.gammas.gamma13)),
                ("gamma23", num(s.gammas.gamma23)),
                ("threshold", num(threshold)),
            ]);
            report(&pairs)
        }
        Format::Json => to_json(&ParamsJson {
            schema_version: SCHEMA_VERSION,
            system: s.system.to_string(),
            probe_transition: s.system.probe_transition().to_string(),
            coupling_transition: s.system.coupling_transition().to_string(),
            decay,
            gamma12: s.gammas.gamma12,
            gamma13: s.gammas.gamma13,
            gamma23: s.gammas.gamma23,
            threshold,
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumJson {
    schema_version: u32,
    system: String,
    omega_c: f64,
    threshold_factor: Option<f64>,
    prefactor: Prefactor,
    columns: [&'static str; 8],
    rows: Vec<output::SpectrumRowJson>,
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), Failure> {
    let omega_c = cfg.omega_c()?;
    let grid = cfg.detuning_grid(omega_c)?;
    let table = spectrum_table(&cfg.scheme, omega_c, &grid, cfg.prefactor)?;
    let text = match cfg.format {
        Format::Csv => output::spectrum_csv(&table),
        Format::Json => to_json(&SpectrumJson {
            schema_version: SCHEMA_VERSION,
            system: cfg.scheme.system.to_string(),
            omega_c,
            threshold_factor: factor_of(cfg, omega_c),
            prefactor: cfg.prefactor,
            columns: SPECTRUM_COLUMNS,
            rows: output::spectrum_rows_json(&table),
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct PolesJson {
    schema_version: u32,
    system: String,
    omega_c: f64,
    re_z1: f64,
    im_z1: f64,
    re_z2: f64,
    im_z2: f64,
}

fn cmd_poles(cfg: &RunConfig) -> Result<(), Failure> {
    let omega_c = cfg.omega_c()?;
    let p = poles(cfg.scheme.system, &cfg.scheme.gammas, omega_c);
    let text = match cfg.format {
        Format::Csv => {
            let mut out = String::from("omega_c,re_z1,im_z1,re_z2,im_z2\n");
            csv_line(&mut out, &[omega_c, p.z1.re, p.z1.im, p.z2.re, p.z2.im]);
            out
        }
        Format::Json => to_json(&PolesJson {
            schema_version: SCHEMA_VERSION,
            system: cfg.scheme.system.to_string(),
            omega_c,
            re_z1: p.z1.re,
            im_z1: p.z1.im,
            re_z2: p.z2.re,
            im_z2: p.z2.im,
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

fn factor_values(range: RangeSpec, log: bool) -> Result<Vec<f64>, Failure> {
    let RangeSpec { min, max, count } = range;
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(Failure::Usage(format!(
            "factor range needs 0 < MIN <= MAX, got {min}:{max}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = |k: usize| k as f64 / (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            if log {
                10f64.powf(min.log10() + (max.log10() - min.log10()) * step(k))
            } else {
                min + (max - min) * step(k)
            }
        })
        .collect())
}

#[derive(Serialize)]
struct RatioJson {
    schema_version: u32,
    system: String,
    metric: eitat::analysis::Metric,
    points: Vec<RatioPoint>,
    skipped: Vec<f64>,
}

fn cmd_ratio_scan(cfg: &RunConfig, range: RangeSpec, log: bool) -> Result<(), Failure> {
    let factors = factor_values(range, log)?;
    let scan = ratio_scan(&cfg.scheme, &factors, cfg.metric)?;
    for f in &scan.skipped {
        eprintln!("note: skipped threshold factor {} (degenerate pole pair)", num(*f));
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut out = String::from("factor,ratio,dominance\n");
            for p in &scan.points {
                csv_line(&mut out, &[p.threshold_factor, p.ratio, p.dominance]);
            }
            out
        }
        Format::Json => to_json(&RatioJson {
            schema_version: SCHEMA_VERSION,
            system: cfg.scheme.system.to_string(),
            metric: cfg.metric,
            points: scan.points,
            skipped: scan.skipped,
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyJson {
    schema_version: u32,
    #[serde(flatten)]
    report: eitat::analysis::RegimeReport,
    dip: Option<DipReport>,
    dip_note: Option<String>,
}

fn cmd_classify(cfg: &RunConfig) -> Result<(), Failure> {
    let omega_c = cfg.omega_c()?;
    let r = classify(&cfg.scheme, omega_c)?;
    let grid = cfg.dip_grid(omega_c)?;
    let (dip, dip_note) = match spectrum_table(&cfg.scheme, omega_c, &grid, Prefactor::Off) {
        Ok(table) => match dip_report(&table) {
            Ok(d) => (Some(d), None),
            Err(e @ eitat::Error::GridTooNarrow) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        Err(e @ eitat::Error::DegeneratePole { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let text = match cfg.format {
        Format::Csv => {
            let mut pairs = vec![
                ("system", r.system.to_string()),
                ("omega_c", num(r.omega_c)),
                ("threshold", num(r.threshold)),
                ("threshold_factor", num(r.threshold_factor)),
                ("regime", r.regime.to_string()),
                ("category", r.category.to_string()),
                ("phenomenon", r.phenomenon.to_string()),
            ];
            match (&dip, &dip_note) {
                (Some(d), _) => pairs.extend([
                    ("dip", d.has_dip.to_string()),
                    ("dip_depth", num(d.depth)),
                    (
                        "absorption_peaks",
                        d.peak_positions.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" "),
                    ),
                ]),
                (None, note) => pairs.push(("dip", format!("n/a ({})", note.as_deref().unwrap_or("")))),
            }
            report(&pairs)
        }
        Format::Json => to_json(&ClassifyJson {
            schema_version: SCHEMA_VERSION,
            report: r,
            dip,
            dip_note,
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct EvolutionFrameJson {
    factor: f64,
    omega_c: f64,
    note: Option<String>,
    rows: Vec<output::SpectrumRowJson>,
}

#[derive(Serialize)]
struct EvolutionJson {
    schema_version: u32,
    system: String,
    prefactor: Prefactor,
    columns: [&'static str; 8],
    frames: Vec<EvolutionFrameJson>,
}

fn cmd_evolution(cfg: &RunConfig, factors: &[f64]) -> Result<(), Failure> {
    let frames = evolution_suite(&cfg.scheme, factors, cfg.prefactor)?;
    for frame in &frames {
        if let Some(note) = &frame.note {
            eprintln!("note: factor {}: {note}", num(frame.factor));
        }
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut out = format!("factor,{}\n", SPECTRUM_COLUMNS.join(","));
            for frame in &frames {
                if let Some(table) = &frame.table {
                    for row in &table.rows {
                        let mut fields = vec![frame.factor];
                        fields.extend(output::spectrum_fields(row));
                        csv_line(&mut out, &fields);
                    }
                }
            }
            out
        }
        Format::Json => to_json(&EvolutionJson {
            schema_version: SCHEMA_VERSION,
            system: cfg.scheme.system.to_string(),
            prefactor: cfg.prefactor,
            columns: SPECTRUM_COLUMNS,
            frames: frames
                .iter()
                .map(|f| EvolutionFrameJson {
                    factor: f.factor,
                    omega_c: f.omega_c,
                    note: f.note.clone(),
                    rows: f.table.as_ref().map(output::spectrum_rows_json).unwrap_or_default(),
                })
                .collect(),
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyJson {
    schema_version: u32,
    system: String,
    omega_c: f64,
    probe_eps: f64,
    tol: f64,
    re_scale: f64,
    im_scale: f64,
    residual: f64,
    per_point: f64,
    pass: bool,
}

fn cmd_verify(cfg: &RunConfig, probe_eps: f64, tol: f64) -> Result<(), Failure> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Usage(format!("--tol must be finite and >= 0, got {tol}")));
    }
    let omega_c = cfg.omega_c()?;
    let grid = cfg.detuning_grid(omega_c)?;
    let v = compare_to_closed_form(&cfg.scheme, omega_c, &grid, probe_eps)?;
    let pass = v.passes(tol);
    let text = match cfg.format {
        Format::Csv => report(&[
            ("system", cfg.scheme.system.to_string()),
            ("omega_c", num(omega_c)),
            ("probe_eps", num(probe_eps)),
            ("scale", format!("{} {}", num(v.scale.re), num(v.scale.im))),
            ("residual", num(v.residual)),
            ("per_point", num(v.per_point)),
            ("tol", num(tol)),
            ("verdict", if pass { "PASS" } else { "FAIL" }.to_string()),
        ]),
        Format::Json => to_json(&VerifyJson {
            schema_version: SCHEMA_VERSION,
            system: cfg.scheme.system.to_string(),
            omega_c,
            probe_eps,
            tol,
            re_scale: v.scale.re,
            im_scale: v.scale.im,
            residual: v.residual,
            per_point: v.per_point,
            pass,
        })?,
    };
    emit(&text, cfg.output.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "residual {} is not below tolerance {}",
            num(v.residual),
            num(tol)
        )))
    }
}
