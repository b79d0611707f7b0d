//! Command-line front end.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classes::{build_class_basis, occupation_histogram};
use crate::error::{invalid, Error, Result};
use crate::fock::{FockBasis, Statistics};
use crate::hamiltonians::{solve, ModelKind, ModelParams, Sector, SolveOptions};
use crate::plot::{render_svg, PlotOptions};
use crate::rdm::{signatures, Provenance};
use crate::sweep::{classify_phase, phase_counts, read_csv, run_sweep, write_csv, SweepSpec};
use crate::wavefunction::Wavefunction;

pub const WORKERS_ENV: &str = "FECSCAN_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "fecscan",
    version,
    about = "Ground states and condensation signatures of pairing/exciton model Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one parameter point and report energy, λ_D, λ_G and phase.
    Solve(SolveArgs),
    /// Run a parameter sweep described by a JSON file and write CSV.
    Sweep(SweepArgs),
    /// List the symmetry classes of the FEC ground-state support.
    Classes(ClassesArgs),
    /// Class-occupation probabilities of a ground state, as CSV.
    Histogram(HistogramArgs),
    /// Scatter λ_G against λ_D from a sweep CSV, as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatisticsArg {
    Hardcore,
    Fermion,
}

impl From<StatisticsArg> for Statistics {
    fn from(s: StatisticsArg) -> Self {
        match s {
            StatisticsArg::Hardcore => Statistics::HardCore,
            StatisticsArg::Fermion => Statistics::Fermion,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SectorArg {
    Even,
    Full,
    Support,
}

impl From<SectorArg> for Sector {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::Even => Sector::Even,
            SectorArg::Full => Sector::Full,
            SectorArg::Support => Sector::Support,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, default_value = "fec", value_parser = parse_model)]
    pub model: ModelKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub lam: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub gam: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub g: f64,
    #[arg(long, value_enum, default_value = "even")]
    pub sector: SectorArg,
    #[arg(long, value_enum, default_value = "hardcore")]
    pub statistics: StatisticsArg,
}

impl PointArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.model, self.n, self.eps, self.lam, self.gam, self.g)
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            sector: self.sector.into(),
            statistics: self.statistics.into(),
            ..SolveOptions::default()
        }
    }
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep specification.
    pub spec: PathBuf,
    /// CSV destination; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides the spec and the environment.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep CSV.
    pub csv: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Omit the convex hull outline.
    #[arg(long)]
    pub no_hull: bool,
    #[arg(long)]
    pub title: Option<String>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| invalid(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Classes(a) => cmd_classes(&a),
        Command::Histogram(a) => cmd_histogram(&a),
        Command::Plot(a) => cmd_plot(&a),
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    model: ModelKind,
    n: usize,
    epsilon: f64,
    lambda: f64,
    gamma: f64,
    g: f64,
    dimension: usize,
    energy: f64,
    gap_to_next: Option<f64>,
    degenerate: bool,
    lambda_d: f64,
    lambda_g: f64,
    lambda_d_display: String,
    lambda_g_display: String,
    phase: String,
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let params = a.point.params()?;
    let sol = solve(&params, &a.point.options())?;
    let sig = signatures(&sol.state, Provenance::from_params(&params))?;
    let report = SolveReport {
        model: params.model,
        n: params.n_particles,
        epsilon: params.epsilon,
        lambda: params.lambda,
        gamma: params.gamma,
        g: params.g,
        dimension: sol.state.basis().len(),
        energy: sol.energy(),
        gap_to_next: sol.ground.gap_to_next.is_finite().then_some(sol.ground.gap_to_next),
        degenerate: sol.ground.degenerate,
        lambda_d: sig.lambda_d,
        lambda_g: sig.lambda_g,
        lambda_d_display: format!("{:.2}", sig.lambda_d),
        lambda_g_display: format!("{:.2}", sig.lambda_g),
        phase: classify_phase(sig.lambda_d, sig.lambda_g).to_string(),
    };
    let mut out = output(a.out.as_deref())?;
    match a.format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        ReportFormat::Text => {
            writeln!(
                out,
                "model={} n={} eps={} lam={} gam={} g={}",
                report.model, report.n, report.epsilon, report.lambda, report.gamma, report.g
            )?;
            writeln!(out, "dimension={}", report.dimension)?;
            writeln!(out, "energy={}", report.energy)?;
            match report.gap_to_next {
                Some(gap) => writeln!(out, "gap_to_next={gap}")?,
                None => writeln!(out, "gap_to_next=none")?,
            }
            writeln!(out, "degenerate={}", report.degenerate)?;
            writeln!(out, "lambda_d={} ({})", report.lambda_d_display, report.lambda_d)?;
            writeln!(out, "lambda_g={} ({})", report.lambda_g_display, report.lambda_g)?;
            writeln!(out, "phase={}", report.phase)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn worker_override() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .map(Some)
            .ok_or_else(|| invalid(format!("{WORKERS_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::from_reader(open_input(&a.spec)?)?;
    if let Some(w) = worker_override()? {
        spec.workers = w;
    }
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(invalid("--workers must be at least 1"));
        }
        spec.workers = w;
    }
    let rows = run_sweep(&spec)?;
    let mut out = output(a.out.as_deref())?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    for r in rows.iter().filter(|r| r.failed()) {
        let p = &r.params;
        eprintln!(
            "failed at eps={} lam={} gam={} g={}: {}",
            p.epsilon,
            p.lambda,
            p.gamma,
            p.g,
            r.failure.as_deref().unwrap_or("")
        );
    }
    let counts: Vec<String> = phase_counts(&rows).iter().map(|(p, c)| format!("{p}={c}")).collect();
    eprintln!(
        "rows={} {} failed={}",
        rows.len(),
        counts.join(" "),
        rows.iter().filter(|r| r.failed()).count()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ClassEntry {
    index: usize,
    label: String,
    x: usize,
    y: usize,
    lipkin_ok: bool,
    zeta: usize,
    tau: usize,
    degeneracy: usize,
    members: Vec<Vec<usize>>,
}

fn cmd_classes(a: &ClassesArgs) -> Result<()> {
    let cb = build_class_basis(a.n)?;
    let entries: Vec<ClassEntry> = cb
        .classes()
        .iter()
        .enumerate()
        .map(|(i, c)| ClassEntry {
            index: i,
            label: c.label.to_string(),
            x: c.label.x,
            y: c.label.y,
            lipkin_ok: c.label.lipkin_ok,
            zeta: c.label.zeta,
            tau: c.label.tau,
            degeneracy: c.degeneracy(),
            members: c.members.iter().map(|m| m.labels()).collect(),
        })
        .collect();
    let mut out = output(a.out.as_deref())?;
    match a.format {
        TableFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &entries)?;
            writeln!(out)?;
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["index", "x", "y", "lipkin_ok", "zeta", "tau", "degeneracy", "members"])?;
            for e in &entries {
                let members: Vec<String> = e
                    .members
                    .iter()
                    .map(|m| m.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                w.write_record([
                    e.index.to_string(),
                    e.x.to_string(),
                    e.y.to_string(),
                    e.lipkin_ok.to_string(),
                    e.zeta.to_string(),
                    e.tau.to_string(),
                    e.degeneracy.to_string(),
                    members.join(";"),
                ])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    eprintln!("classes={} configurations={}", cb.len(), cb.n_support());
    Ok(())
}

fn cmd_histogram(a: &HistogramArgs) -> Result<()> {
    let params = a.point.params()?;
    let cb = build_class_basis(params.n_particles)?;
    let sol = solve(&params, &a.point.options())?;
    // Spread the state over the full space so weight outside the support
    // shows up in the residual.
    let full = Arc::new(FockBasis::enumerate(params.n_particles, params.n_orbitals())?);
    let amps = full.configs().iter().map(|&c| sol.state.amplitude_of(c)).collect();
    let state = Wavefunction::new(full, amps, sol.state.statistics())?;
    let hist = occupation_histogram(&state, &cb)?;
    let mut out = output(a.out.as_deref())?;
    hist.write_csv(&mut out)?;
    out.flush()?;
    eprintln!("residual={:e}", hist.residual);
    Ok(())
}

fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let rows = read_csv(open_input(&a.csv)?)?;
    let svg = render_svg(
        &rows,
        &PlotOptions {
            hull: !a.no_hull,
            title: a.title.clone(),
            ..PlotOptions::default()
        },
    );
    let mut out = output(a.out.as_deref())?;
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(())
}
