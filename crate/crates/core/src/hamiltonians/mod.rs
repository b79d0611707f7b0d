//! Second-quantized term lists for the four models and their ground states.
//!
//! All models live on `r = 2N` orbitals split into a lower level
//! (orbitals `0..N`) and an upper level (`N..2N`). A Lipkin site `p` is the
//! orbital pair `(p, p + N)`; a BCS pair `j` is the adjacent pair
//! `(2j, 2j + 1)` (0-based).

pub mod solver;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{build_operator_matrix, Configuration, FockBasis, OperatorTerm, SparseHamiltonian, Statistics};
use crate::wavefunction::Wavefunction;

pub use solver::{ground_state, symmetric_eigen, GroundState, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Lipkin scaffold plus pairing between adjacent orbitals.
    Fec,
    /// Pairing-force limit (`λ = γ = 0`).
    #[serde(alias = "pairingforce", alias = "pairing-force", alias = "bcs")]
    Pf,
    /// Lipkin limit (`G = 0`).
    Lipkin,
    /// Lipkin plus pairing between stacked orbitals `p`, `p + N`.
    Plastino,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fec => "fec",
            ModelKind::Pf => "pf",
            ModelKind::Lipkin => "lipkin",
            ModelKind::Plastino => "plastino",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fec" => Ok(ModelKind::Fec),
            "pf" | "pairingforce" | "pairing-force" | "bcs" => Ok(ModelKind::Pf),
            "lipkin" => Ok(ModelKind::Lipkin),
            "plastino" => Ok(ModelKind::Plastino),
            other => Err(invalid(format!("unknown model `{other}`"))),
        }
    }
}

/// Model kind, particle number and the four couplings `(ε, λ, γ, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: ModelKind,
    pub n_particles: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn new(model: ModelKind, n_particles: usize, epsilon: f64, lambda: f64, gamma: f64, g: f64) -> Result<Self> {
        if n_particles < 2 || !n_particles.is_multiple_of(2) {
            return Err(invalid(format!(
                "particle number must be even and at least 2, got {n_particles}"
            )));
        }
        if 2 * n_particles > 64 {
            return Err(invalid("at most 32 particles fit the configuration width"));
        }
        if ![epsilon, lambda, gamma, g].iter().all(|v| v.is_finite()) {
            return Err(invalid("couplings must be finite"));
        }
        match model {
            ModelKind::Pf if lambda != 0.0 || gamma != 0.0 => {
                return Err(invalid("the pairing-force model has λ = γ = 0"));
            }
            ModelKind::Lipkin if g != 0.0 => {
                return Err(invalid("the Lipkin model has G = 0"));
            }
            _ => {}
        }
        Ok(ModelParams {
            model,
            n_particles,
            epsilon,
            lambda,
            gamma,
            g,
        })
    }

    pub fn fec(n_particles: usize, epsilon: f64, lambda: f64, gamma: f64, g: f64) -> Result<Self> {
        Self::new(ModelKind::Fec, n_particles, epsilon, lambda, gamma, g)
    }

    pub fn pairing_force(n_particles: usize, epsilon: f64, g: f64) -> Result<Self> {
        Self::new(ModelKind::Pf, n_particles, epsilon, 0.0, 0.0, g)
    }

    pub fn lipkin(n_particles: usize, epsilon: f64, lambda: f64, gamma: f64) -> Result<Self> {
        Self::new(ModelKind::Lipkin, n_particles, epsilon, lambda, gamma, 0.0)
    }

    pub fn plastino(n_particles: usize, epsilon: f64, lambda: f64, gamma: f64, g: f64) -> Result<Self> {
        Self::new(ModelKind::Plastino, n_particles, epsilon, lambda, gamma, g)
    }

    pub fn n_orbitals(&self) -> usize {
        2 * self.n_particles
    }
}

/// The Hamiltonian as a list of operator strings.
///
/// Coupling groups with a zero coefficient are omitted entirely, so the FEC
/// list at `λ = γ = 0` equals the pairing-force list and at `G = 0` equals the
/// Lipkin list.
pub fn model_terms(params: &ModelParams) -> Vec<OperatorTerm> {
    let n = params.n_particles;
    let mut terms = Vec::new();

    if params.epsilon != 0.0 {
        for i in 0..n {
            terms.push(OperatorTerm::one_body(-params.epsilon / 2.0, i, i));
        }
        for i in 0..n {
            terms.push(OperatorTerm::one_body(params.epsilon / 2.0, i + n, i + n));
        }
    }

    if params.model != ModelKind::Pf {
        if params.lambda != 0.0 {
            let c = params.lambda / 2.0;
            for p in 0..n {
                for q in 0..n {
                    // double de-excitation a+_p a+_q a_{q+N} a_{p+N}
                    terms.push(OperatorTerm::two_body(c, p, q, q + n, p + n));
                }
            }
            for p in 0..n {
                for q in 0..n {
                    terms.push(OperatorTerm::two_body(c, p + n, q + n, q, p));
                }
            }
        }
        if params.gamma != 0.0 {
            let c = params.gamma / 2.0;
            for p in 0..n {
                for q in 0..n {
                    // p scattered up while q is scattered down
                    terms.push(OperatorTerm::two_body(c, p + n, q, q + n, p));
                }
            }
            for p in 0..n {
                for q in 0..n {
                    terms.push(OperatorTerm::two_body(c, p, q + n, q, p + n));
                }
            }
        }
    }

    if params.g != 0.0 {
        match params.model {
            ModelKind::Fec | ModelKind::Pf => {
                for j in 0..n {
                    for k in 0..n {
                        terms.push(OperatorTerm::two_body(-params.g, 2 * j, 2 * j + 1, 2 * k + 1, 2 * k));
                    }
                }
            }
            ModelKind::Plastino => {
                for p in 0..n {
                    for q in 0..n {
                        terms.push(OperatorTerm::two_body(-params.g, p + n, p, q, q + n));
                    }
                }
            }
            ModelKind::Lipkin => unreachable!("validated at construction"),
        }
    }

    terms
}

/// Number of particles in the upper level.
pub fn excitation_count(config: Configuration, n_particles: usize) -> usize {
    (config.bits() >> n_particles).count_ones() as usize
}

/// Every configuration reachable from `seed` by repeated application of
/// `terms`, in ascending bitmask order.
pub fn reachable_configurations(seed: Configuration, terms: &[OperatorTerm]) -> Vec<Configuration> {
    let mut seen = BTreeSet::from([seed]);
    let mut stack = vec![seed];
    while let Some(c) = stack.pop() {
        for t in terms {
            if let Some((_, next)) = t.apply(c, Statistics::HardCore) {
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Which block of the `N`-particle space a ground state is sought in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// All `binomial(2N, N)` configurations.
    Full,
    /// Configurations with an even number of upper-level particles, the
    /// parity block of the reference determinant `|1..N⟩`.
    #[default]
    Even,
    /// Configurations connected to the reference by the model's terms at
    /// generic couplings.
    Support,
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Sector::Full),
            "even" => Ok(Sector::Even),
            "support" => Ok(Sector::Support),
            other => Err(invalid(format!("unknown sector `{other}`"))),
        }
    }
}

/// Basis of `sector` for `model` at `n_particles`.
pub fn sector_basis(model: ModelKind, n_particles: usize, sector: Sector) -> Result<FockBasis> {
    let r = 2 * n_particles;
    match sector {
        Sector::Full => FockBasis::enumerate(n_particles, r),
        Sector::Even => FockBasis::filtered(n_particles, r, |c| excitation_count(c, n_particles).is_multiple_of(2)),
        Sector::Support => {
            let generic = match model {
                ModelKind::Pf => ModelParams::pairing_force(n_particles, 1.0, 1.0)?,
                ModelKind::Lipkin => ModelParams::lipkin(n_particles, 1.0, 1.0, 1.0)?,
                _ => ModelParams::new(model, n_particles, 1.0, 1.0, 1.0, 1.0)?,
            };
            let configs = reachable_configurations(Configuration::reference(n_particles), &model_terms(&generic));
            FockBasis::from_configs(n_particles, r, configs)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub sector: Sector,
    pub statistics: Statistics,
    pub solver: SolverOptions,
}

/// Ground state of one model point.
#[derive(Debug, Clone)]
pub struct Solution {
    pub params: ModelParams,
    pub hamiltonian: SparseHamiltonian,
    pub ground: GroundState,
    pub state: Wavefunction,
}

impl Solution {
    pub fn energy(&self) -> f64 {
        self.ground.energy
    }
}

pub fn model_matrix(params: &ModelParams, basis: &FockBasis, statistics: Statistics) -> Result<SparseHamiltonian> {
    build_operator_matrix(&model_terms(params), basis, statistics)
}

pub fn solve(params: &ModelParams, opts: &SolveOptions) -> Result<Solution> {
    let basis = Arc::new(sector_basis(params.model, params.n_particles, opts.sector)?);
    solve_in(params, basis, opts)
}

/// Like [`solve`] but on a caller-supplied basis, which lets sweeps reuse it.
pub fn solve_in(params: &ModelParams, basis: Arc<FockBasis>, opts: &SolveOptions) -> Result<Solution> {
    if basis.n_particles() != params.n_particles || basis.n_orbitals() != params.n_orbitals() {
        return Err(invalid("basis does not match the model size"));
    }
    let hamiltonian = model_matrix(params, &basis, opts.statistics)?;
    let ground = ground_state(&hamiltonian, &opts.solver)?;
    let state = Wavefunction::new(basis, ground.amplitudes.clone(), opts.statistics)?;
    Ok(Solution {
        params: *params,
        hamiltonian,
        ground,
        state,
    })
}
