//! Parameter-grid sweeps, phase classification and the FEC superposition.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::hamiltonians::{sector_basis, solve_in, ModelKind, ModelParams, SolveOptions};
use crate::rdm::{signatures, Provenance};
use crate::wavefunction::Wavefunction;

/// Column names of the sweep CSV, in order.
pub const CSV_HEADER: [&str; 12] = [
    "model",
    "n",
    "epsilon",
    "lambda",
    "gamma",
    "g",
    "energy",
    "lambda_d",
    "lambda_g",
    "phase",
    "degenerate",
    "failed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "FEC")]
    Fec,
    #[serde(rename = "BCS")]
    Bcs,
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "NONE")]
    None,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Fec, Phase::Bcs, Phase::Ec, Phase::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Fec => "FEC",
            Phase::Bcs => "BCS",
            Phase::Ec => "EC",
            Phase::None => "NONE",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Schema(format!("unknown phase `{s}`")))
    }
}

/// Strictly above one counts as condensed.
pub fn classify_phase(lambda_d: f64, lambda_g: f64) -> Phase {
    match (lambda_d > 1.0, lambda_g > 1.0) {
        (true, true) => Phase::Fec,
        (true, false) => Phase::Bcs,
        (false, true) => Phase::Ec,
        (false, false) => Phase::None,
    }
}

/// `k / denom` for each `k`, so that grid values print as short decimals.
fn steps(range: std::ops::RangeInclusive<i32>, denom: f64) -> Vec<f64> {
    range.map(|k| k as f64 / denom).collect()
}

/// A sweep request as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default)]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default)]
    pub g: Option<Vec<f64>>,
    /// Use `γ = λ` at every point; the `gamma` grid is then ignored.
    #[serde(default)]
    pub tie_lambda_gamma: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl SweepSpec {
    /// Default grids: `ε ∈ {0, 0.5, 1}`, `λ, γ ∈ {0, −0.1, …, −1}`,
    /// `G ∈ {0, 0.1, …, 1}`, with the couplings a model lacks pinned at zero.
    pub fn default_for(model: ModelKind, n: usize) -> Self {
        let mut spec = SweepSpec {
            model,
            n,
            epsilon: Some(vec![0.0, 0.5, 1.0]),
            lambda: Some(steps(0..=10, -10.0)),
            gamma: Some(steps(0..=10, -10.0)),
            g: Some(steps(0..=10, 10.0)),
            tie_lambda_gamma: false,
            workers: 1,
        };
        spec.pin_absent_couplings();
        spec
    }

    /// The coarser grid of quarter steps used to scan the Plastino model:
    /// `ε ∈ {0, 0.5, 1}`, `λ, γ ∈ {0, −0.25, …, −1}`, `G ∈ {0, 0.25, …, 1}`.
    pub fn quarter_grid(model: ModelKind, n: usize) -> Self {
        let mut spec = SweepSpec {
            model,
            n,
            epsilon: Some(vec![0.0, 0.5, 1.0]),
            lambda: Some(steps(0..=4, -4.0)),
            gamma: Some(steps(0..=4, -4.0)),
            g: Some(steps(0..=4, 4.0)),
            tie_lambda_gamma: false,
            workers: 1,
        };
        spec.pin_absent_couplings();
        spec
    }

    fn pin_absent_couplings(&mut self) {
        match self.model {
            ModelKind::Pf => {
                self.lambda = Some(vec![0.0]);
                self.gamma = Some(vec![0.0]);
            }
            ModelKind::Lipkin => self.g = Some(vec![0.0]),
            _ => {}
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.points()?;
        Ok(spec)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_reader(reader)?;
        spec.points()?;
        Ok(spec)
    }

    /// Missing grids fall back to the model defaults.
    fn grids(&self) -> [Vec<f64>; 4] {
        let d = SweepSpec::default_for(self.model, self.n);
        let pick = |own: &Option<Vec<f64>>, fallback: Option<Vec<f64>>| {
            own.clone().unwrap_or_else(|| fallback.unwrap_or_default())
        };
        [
            pick(&self.epsilon, d.epsilon),
            pick(&self.lambda, d.lambda),
            pick(&self.gamma, d.gamma),
            pick(&self.g, d.g),
        ]
    }

    /// Grid points in lexicographic `(ε, λ, γ, G)` order, validated.
    pub fn points(&self) -> Result<Vec<ModelParams>> {
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if self.n > 10 {
            return Err(invalid(format!("sweeps are limited to N ≤ 10, got {}", self.n)));
        }
        let [eps, lam, gam, g] = self.grids();
        for (name, grid) in [("epsilon", &eps), ("lambda", &lam), ("gamma", &gam), ("g", &g)] {
            if grid.is_empty() && !(name == "gamma" && self.tie_lambda_gamma) {
                return Err(invalid(format!("grid `{name}` is empty")));
            }
        }
        let mut points = Vec::new();
        for &e in &eps {
            for &l in &lam {
                let gammas: &[f64] = if self.tie_lambda_gamma {
                    std::slice::from_ref(&l)
                } else {
                    &gam
                };
                for &c in gammas {
                    for &gg in &g {
                        points.push(ModelParams::new(self.model, self.n, e, l, c, gg)?);
                    }
                }
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: ModelParams,
    pub energy: f64,
    pub lambda_d: f64,
    pub lambda_g: f64,
    pub phase: Phase,
    pub degenerate: bool,
    /// Set when the point could not be solved; the numeric fields are NaN.
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

fn evaluate(params: &ModelParams, basis: &Arc<FockBasis>, opts: &SolveOptions) -> SweepRow {
    let outcome = solve_in(params, Arc::clone(basis), opts).and_then(|sol| {
        let sig = signatures(&sol.state, Provenance::from_params(params))?;
        Ok((sol.energy(), sol.ground.degenerate, sig.lambda_d, sig.lambda_g))
    });
    match outcome {
        Ok((energy, degenerate, lambda_d, lambda_g)) => SweepRow {
            params: *params,
            energy,
            lambda_d,
            lambda_g,
            phase: classify_phase(lambda_d, lambda_g),
            degenerate,
            failure: None,
        },
        Err(e) => SweepRow {
            params: *params,
            energy: f64::NAN,
            lambda_d: f64::NAN,
            lambda_g: f64::NAN,
            phase: Phase::None,
            degenerate: false,
            failure: Some(e.to_string()),
        },
    }
}

/// Solves every grid point on a pool of `spec.workers` threads. Rows come
/// back in grid order whatever the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with(spec, &SolveOptions::default())
}

pub fn run_sweep_with(spec: &SweepSpec, opts: &SolveOptions) -> Result<Vec<SweepRow>> {
    let points = spec.points()?;
    let basis = Arc::new(sector_basis(spec.model, spec.n, opts.sector)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start {} workers: {e}", spec.workers)))?;
    Ok(pool.install(|| points.par_iter().map(|p| evaluate(p, &basis, opts)).collect()))
}

fn number(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let p = &r.params;
        w.write_record([
            p.model.name().to_string(),
            p.n_particles.to_string(),
            p.epsilon.to_string(),
            p.lambda.to_string(),
            p.gamma.to_string(),
            p.g.to_string(),
            number(r.energy),
            number(r.lambda_d),
            number(r.lambda_g),
            r.phase.to_string(),
            r.degenerate.to_string(),
            r.failed().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV in the sweep schema. Failure diagnostics are not stored in
/// the file, so failed rows come back with a generic message.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Schema(format!(
            "expected columns {}, found {}",
            CSV_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let at = |msg: String| Error::Schema(format!("row {}: {msg}", line + 1));
        let float = |i: usize| -> Result<f64> {
            let s = &record[i];
            if s.is_empty() {
                return Ok(f64::NAN);
            }
            s.parse::<f64>()
                .map_err(|_| at(format!("`{s}` in column {} is not a number", CSV_HEADER[i])))
        };
        let boolean = |i: usize| -> Result<bool> {
            record[i].parse::<bool>().map_err(|_| {
                at(format!(
                    "`{}` in column {} is not true/false",
                    &record[i], CSV_HEADER[i]
                ))
            })
        };
        let model: ModelKind = record[0].parse().map_err(|e: Error| at(e.to_string()))?;
        let n: usize = record[1]
            .parse()
            .map_err(|_| at(format!("`{}` is not a particle number", &record[1])))?;
        let params =
            ModelParams::new(model, n, float(2)?, float(3)?, float(4)?, float(5)?).map_err(|e| at(e.to_string()))?;
        let failed = boolean(11)?;
        rows.push(SweepRow {
            params,
            energy: float(6)?,
            lambda_d: float(7)?,
            lambda_g: float(8)?,
            phase: record[9].parse().map_err(|e: Error| at(e.to_string()))?,
            degenerate: boolean(10)?,
            failure: failed.then(|| "failed during the sweep".to_string()),
        });
    }
    Ok(rows)
}

/// Row count per phase, failed rows excluded, in [`Phase::ALL`] order.
pub fn phase_counts(rows: &[SweepRow]) -> [(Phase, usize); 4] {
    Phase::ALL.map(|p| (p, rows.iter().filter(|r| !r.failed() && r.phase == p).count()))
}

/// Sign choice in the superposition of a pair-condensed and an
/// exciton-condensed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SuperpositionBranch {
    /// `(ψ_D − sgn(Δ) ψ_G) / √(2 − |Δ|)`.
    #[default]
    Destructive,
    /// `(ψ_D + sgn(Δ) ψ_G) / √(2 + |Δ|)`.
    Constructive,
}

#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: Wavefunction,
    /// `2⟨ψ_D|ψ_G⟩`.
    pub delta: f64,
    pub norm: f64,
}

/// `(ψ_D − sgn(Δ) ψ_G) / √(2 − |Δ|)` with `Δ = 2⟨ψ_D|ψ_G⟩` and `sgn(0) = +1`.
pub fn fec_superposition(psi_d: &Wavefunction, psi_g: &Wavefunction) -> Result<Superposition> {
    superpose(psi_d, psi_g, SuperpositionBranch::Destructive)
}

pub fn superpose(psi_d: &Wavefunction, psi_g: &Wavefunction, branch: SuperpositionBranch) -> Result<Superposition> {
    for (name, psi) in [("psi_d", psi_d), ("psi_g", psi_g)] {
        if (psi.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("{name} is not normalized (norm {})", psi.norm())));
        }
    }
    let delta = 2.0 * psi_d.overlap(psi_g)?;
    if (2.0 - delta.abs()).abs() <= 1e-9 {
        return Err(Error::DegenerateOverlap { delta });
    }
    let sgn = if delta < 0.0 { -1.0 } else { 1.0 };
    let (s, denom) = match branch {
        SuperpositionBranch::Destructive => (-sgn, 2.0 - delta.abs()),
        SuperpositionBranch::Constructive => (sgn, 2.0 + delta.abs()),
    };
    let scale = 1.0 / denom.sqrt();
    let amplitudes: Vec<f64> = psi_d
        .amplitudes()
        .iter()
        .zip(psi_g.amplitudes())
        .map(|(d, g)| (d + s * g) * scale)
        .collect();
    let state = Wavefunction::new(Arc::clone(psi_d.shared_basis()), amplitudes, psi_d.statistics())?;
    let norm = state.norm();
    Ok(Superposition { state, delta, norm })
}
