//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::analysis::{
    loss_sweep, propagate, scaling_table, t_grid, verify_document, verify_scheme, write_scaling_csv,
    DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::modespace::{reachable_oam_closure, Mode, ModeBasis, PureState, DEFAULT_CLOSURE_CAP};
use crate::netlist::NetlistDocument;
use crate::synthesis::{build_scheme, count_closed_form, count_structural, CountReport, SchemeConfig, Variant};

/// Exit code for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit code for a verification failure.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT: i32 = 2;

/// Amplitudes below this are dropped from `apply` output.
pub const PRUNE: f64 = 1e-13;

#[derive(Debug, Parser)]
#[command(name = "twistfft", version, about = "Synthesize and simulate OAM Fourier-transform interferometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the netlist of a scheme.
    Synth(SynthArgs),
    /// Compare a netlist with the DFT oracle and print a JSON report.
    Verify(VerifyArgs),
    /// Closed-form element counts as CSV.
    Count(CountArgs),
    /// Fidelity against beam-splitter transmission as CSV or JSON.
    Losses(LossArgs),
    /// Propagate a state file through a netlist.
    Apply(ApplyArgs),
    /// Beam-splitter counts next to the reference baselines as CSV.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub dim: u64,
    #[arg(long, default_value = "basic")]
    pub variant: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Free-form stamp recorded in the document.
    #[arg(long)]
    pub stamp: Option<String>,
    /// Use contract elements instead of primitive sorter wiring.
    #[arg(long)]
    pub behavioral_sorters: bool,
    /// Merge adjacent permutation stages.
    #[arg(long)]
    pub peephole: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with_all = ["dim", "variant"])]
    pub netlist: Option<PathBuf>,
    #[arg(long, required_unless_present = "netlist")]
    pub dim: Option<u64>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    pub closure_cap: usize,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "basic")]
    pub variants: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Count the compiled netlist instead of evaluating closed forms.
    #[arg(long)]
    pub structural: bool,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub dim: u64,
    #[arg(long, default_value_t = 0.9)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.9)]
    pub hologram_t: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub state_in: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub state_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
    pub closure_cap: usize,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "basic,pol_enhanced,path_enhanced,pol_path_enhanced")]
    pub variants: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub m_min: u32,
    #[arg(long, default_value_t = 12)]
    pub m_max: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_variants(tags: &[String]) -> Result<Vec<Variant>> {
    tags.iter().map(|t| t.parse()).collect()
}

fn synth(a: &SynthArgs) -> Result<i32> {
    let mut cfg = SchemeConfig::new(a.dim, a.variant.parse()?)?;
    cfg.behavioral_sorters = a.behavioral_sorters;
    cfg.peephole = a.peephole;
    let doc = build_scheme(&cfg)?.document(a.stamp.clone());
    emit(a.out.as_deref(), doc.to_json()?.as_bytes())?;
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    let report = match (&a.netlist, a.dim) {
        (Some(p), _) => verify_document(&NetlistDocument::from_json(&read(p)?)?, a.tolerance, a.closure_cap)?,
        (None, Some(d)) => {
            let variant: Variant = a.variant.as_deref().unwrap_or("basic").parse()?;
            let scheme = build_scheme(&SchemeConfig::new(d, variant)?)?;
            verify_scheme(&scheme, a.tolerance, a.closure_cap)?
        }
        (None, None) => return Err(Error::Invalid("either --netlist or --dim is required".into())),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(None, text.as_bytes())?;
    Ok(if report.passed { EXIT_OK } else { EXIT_FAIL })
}

fn count(a: &CountArgs) -> Result<i32> {
    let mut reports = Vec::new();
    for v in parse_variants(&a.variants)? {
        for &d in &a.dims {
            let cfg = SchemeConfig::new(d, v)?;
            reports.push(if a.structural {
                count_structural(&build_scheme(&cfg)?.netlist, &cfg)
            } else {
                count_closed_form(&cfg)
            });
        }
    }
    let mut buf = Vec::new();
    CountReport::write_csv(&reports, &mut buf)?;
    emit(a.csv.as_deref(), &buf)?;
    Ok(EXIT_OK)
}

fn losses(a: &LossArgs) -> Result<i32> {
    if a.steps == 0 || !(a.t_min > 0.0 && a.t_min <= a.t_max && a.t_max <= 1.0) {
        return Err(Error::Invalid(format!(
            "need 0 < t-min <= t-max <= 1 and steps >= 1; got {}..{} in {} steps",
            a.t_min, a.t_max, a.steps
        )));
    }
    let curve = loss_sweep(a.dim, &t_grid(a.t_min, a.t_max, a.steps), a.hologram_t)?;
    let buf = if a.json {
        let mut s = serde_json::to_string_pretty(&curve)?;
        s.push('\n');
        s.into_bytes()
    } else {
        let mut b = Vec::new();
        curve.write_csv(&mut b)?;
        b
    };
    emit(a.csv.as_deref(), &buf)?;
    for t in &curve.monotonic_violations {
        eprintln!("fidelity decreased at T = {t}");
    }
    Ok(EXIT_OK)
}

/// Propagates `state` through the netlist of `doc`. Every populated mode
/// must sit on a declared input path with matching polarization.
pub fn apply_document(doc: &NetlistDocument, state: &PureState, closure_cap: usize) -> Result<PureState> {
    if !state.is_normalized(1e-9) {
        return Err(Error::Invalid(format!(
            "state norm is {}, expected 1",
            state.norm_sqr().sqrt()
        )));
    }
    let netlist = doc.netlist()?;
    let declared = doc.inputs();
    let populated: Vec<(Mode, Complex64)> = state
        .basis
        .modes()
        .iter()
        .zip(&state.amplitudes)
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(m, a)| (*m, *a))
        .collect();
    for (m, _) in &populated {
        if !declared.iter().any(|d| d.path == m.path && d.pol == m.pol) {
            return Err(Error::Invalid(format!(
                "input mode {m} lies outside the closure of the declared inputs"
            )));
        }
    }
    let modes: Vec<Mode> = populated.iter().map(|(m, _)| *m).collect();
    reachable_oam_closure(&netlist, &modes, closure_cap)?;
    let mut out: BTreeMap<Mode, Complex64> = BTreeMap::new();
    for (m, a) in &populated {
        for (o, b) in propagate(&netlist, *m, None) {
            *out.entry(o).or_default() += a * b;
        }
    }
    out.retain(|_, a| a.norm() >= PRUNE);
    let basis = Arc::new(ModeBasis::new(out.keys().copied())?);
    PureState::new(basis, out.into_values().collect())
}

fn apply(a: &ApplyArgs) -> Result<i32> {
    let doc = NetlistDocument::from_json(&read(&a.netlist)?)?;
    let state = PureState::from_json(&read(&a.state_in)?)?;
    let out = apply_document(&doc, &state, a.closure_cap)?;
    emit(a.state_out.as_deref(), out.to_json()?.as_bytes())?;
    Ok(EXIT_OK)
}

fn scaling(a: &ScalingArgs) -> Result<i32> {
    let rows = scaling_table(&parse_variants(&a.variants)?, a.m_min..=a.m_max)?;
    let mut buf = Vec::new();
    write_scaling_csv(&rows, &mut buf)?;
    emit(a.csv.as_deref(), &buf)?;
    Ok(EXIT_OK)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TWISTFFT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Invalid(format!("TWISTFFT_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command and returns its exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Verify(a) => verify(a),
        Command::Count(a) => count(a),
        Command::Losses(a) => losses(a),
        Command::Apply(a) => apply(a),
        Command::Scaling(a) => scaling(a),
    }
}

/// Parses `args`, runs the command and maps errors to exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
