//! Reduced density matrices and the condensation signatures `λ_D`, `λ_G`.
//!
//! Two-body matrices are accumulated as sums of outer products over
//! intermediate configurations, so both the geminal matrix and the
//! particle-hole matrix come out symmetric positive semidefinite by
//! construction. Intermediates are processed in fixed-size chunks whose
//! partial sums are added in chunk order, which makes every result
//! bit-for-bit independent of the rayon thread count.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::{Configuration, FockBasis, Ladder};
use crate::hamiltonians::{symmetric_eigen, ModelKind, ModelParams};
use crate::wavefunction::Wavefunction;

const CHUNK: usize = 8192;

/// Which orbital pairs form the pair subblock of the 2-RDM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairGeometry {
    /// `(2j, 2j+1)`: the pairs coupled by the FEC and Pairing-Force terms.
    #[default]
    Adjacent,
    /// `(p, p+N)`: the stacked pairs coupled by the Plastino pairing term.
    Stacked,
}

impl PairGeometry {
    pub fn for_model(model: ModelKind) -> Self {
        match model {
            ModelKind::Plastino => PairGeometry::Stacked,
            _ => PairGeometry::Adjacent,
        }
    }

    /// The `r/2` orbital pairs, each with its lower orbital first.
    pub fn pairs(self, n_orbitals: usize) -> Vec<(usize, usize)> {
        let half = n_orbitals / 2;
        match self {
            PairGeometry::Adjacent => (0..half).map(|j| (2 * j, 2 * j + 1)).collect(),
            PairGeometry::Stacked => (0..half).map(|p| (p, p + half)).collect(),
        }
    }
}

/// `λ_D` reached by a maximally paired state of `n` fermions in `r` orbitals.
pub fn pair_ceiling(n: usize, r: usize) -> f64 {
    n as f64 / 2.0 * (1.0 - (n as f64 - 2.0) / r as f64)
}

/// `λ_G` reached by a maximal exciton condensate of `n` fermions.
pub fn exciton_ceiling(n: usize) -> f64 {
    n as f64 / 2.0
}

#[derive(Debug, Clone)]
pub struct OneRdm {
    /// `(i, k) = ⟨a†_i a_k⟩`.
    pub matrix: DMatrix<f64>,
}

impl OneRdm {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        symmetric_eigen(&self.matrix).eigenvalues
    }
}

#[derive(Debug, Clone)]
pub struct GeminalMatrix {
    /// Row/column order: `(i, j)` with `i < j`, lexicographic.
    pub pairs: Vec<(usize, usize)>,
    /// `((i, j), (k, l)) = ⟨a†_i a†_j a_l a_k⟩`.
    pub matrix: DMatrix<f64>,
}

impl GeminalMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        symmetric_eigen(&self.matrix).eigenvalues
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        max_of(&self.eigenvalues())
    }
}

#[derive(Debug, Clone)]
pub struct PairSubblock {
    pub geometry: PairGeometry,
    pub pairs: Vec<(usize, usize)>,
    pub matrix: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ModifiedG {
    /// Row index of `(i, j)` is `i * r + j`;
    /// `((i, j), (k, l)) = ⟨a†_i a_j a†_l a_k⟩ − ⟨a†_i a_j⟩⟨a†_l a_k⟩`.
    pub matrix: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Where a set of signatures came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub params: Option<ModelParams>,
    pub geometry: PairGeometry,
}

impl Provenance {
    pub fn from_params(params: &ModelParams) -> Self {
        Provenance {
            params: Some(*params),
            geometry: PairGeometry::for_model(params.model),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CondensateSignatures {
    pub lambda_d: f64,
    pub lambda_g: f64,
    pub subblock: PairSubblock,
    pub modified_g: ModifiedG,
    pub provenance: Provenance,
}

fn max_of(v: &DVector<f64>) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sums `Σ_x w_x w_xᵀ` over the intermediates `xs`, where `sparse(x)` lists
/// the nonzero `(index, value)` entries of `w_x`.
fn gram_sum<F>(dim: usize, xs: &[Configuration], sparse: F) -> DMatrix<f64>
where
    F: Fn(Configuration, &mut Vec<(usize, f64)>) + Sync,
{
    let partials: Vec<Vec<f64>> = xs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; dim * dim];
            let mut entries = Vec::new();
            for &x in chunk {
                entries.clear();
                sparse(x, &mut entries);
                for &(a, va) in &entries {
                    let col = &mut acc[a * dim..(a + 1) * dim];
                    for &(b, vb) in &entries {
                        col[b] += va * vb;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim * dim];
    for p in partials {
        total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
    }
    DMatrix::from_vec(dim, dim, total)
}

pub fn one_rdm(state: &Wavefunction) -> OneRdm {
    let r = state.n_orbitals();
    let stats = state.statistics();
    let configs = state.basis().configs();
    let amps = state.amplitudes();
    let partials: Vec<Vec<f64>> = configs
        .par_chunks(CHUNK)
        .zip(amps.par_chunks(CHUNK))
        .map(|(cs, ps)| {
            let mut acc = vec![0.0; r * r];
            for (&b, &psi_b) in cs.iter().zip(ps) {
                if psi_b == 0.0 {
                    continue;
                }
                for k in b.orbitals() {
                    for i in 0..r {
                        if let Some((s, a)) = b.hop(i, k, stats) {
                            acc[k * r + i] += state.amplitude_of(a) * psi_b * s as f64;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; r * r];
    for p in partials {
        total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
    }
    OneRdm {
        matrix: DMatrix::from_vec(r, r, total),
    }
}

/// `⟨e| a_l a_k |ψ⟩` for the pair `(k, l)`, with `b = e + k + l`.
#[inline]
fn pair_removal(state: &Wavefunction, e: Configuration, k: usize, l: usize) -> f64 {
    if e.is_occupied(k) || e.is_occupied(l) || k == l {
        return 0.0;
    }
    let b = Configuration::from_bits(e.bits() | 1u64 << k | 1u64 << l);
    let psi_b = state.amplitude_of(b);
    if psi_b == 0.0 {
        return 0.0;
    }
    let stats = state.statistics();
    let (s1, mid) = b.apply_ladder(Ladder::annihilate(k), stats).expect("k occupied in b");
    let (s2, _) = mid.apply_ladder(Ladder::annihilate(l), stats).expect("l occupied in b");
    psi_b * (s1 * s2) as f64
}

fn pair_gram(state: &Wavefunction, pairs: &[(usize, usize)]) -> Result<DMatrix<f64>> {
    let n = state.n_particles();
    let r = state.n_orbitals();
    if n < 2 {
        return Ok(DMatrix::zeros(pairs.len(), pairs.len()));
    }
    let intermediates = FockBasis::enumerate(n - 2, r)?;
    Ok(gram_sum(pairs.len(), intermediates.configs(), |e, out| {
        for (idx, &(k, l)) in pairs.iter().enumerate() {
            let v = pair_removal(state, e, k, l);
            if v != 0.0 {
                out.push((idx, v));
            }
        }
    }))
}

/// The pair subblock `⟨a†_p a†_q a_q' a_p'⟩` over the given geometry, and
/// its largest eigenvalue `λ_D`.
pub fn pair_subblock_signature(state: &Wavefunction, geometry: PairGeometry) -> Result<(PairSubblock, f64)> {
    let r = state.n_orbitals();
    if !r.is_multiple_of(2) {
        return Err(invalid(format!("pair subblock needs an even orbital count, got {r}")));
    }
    let pairs = geometry.pairs(r);
    let matrix = pair_gram(state, &pairs)?;
    let eig = symmetric_eigen(&matrix);
    let lambda_d = max_of(&eig.eigenvalues);
    Ok((
        PairSubblock {
            geometry,
            pairs,
            matrix,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        },
        lambda_d,
    ))
}

pub fn full_two_rdm(state: &Wavefunction) -> Result<GeminalMatrix> {
    let r = state.n_orbitals();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    let matrix = pair_gram(state, &pairs)?;
    Ok(GeminalMatrix { pairs, matrix })
}

/// The modified particle-hole matrix and its largest eigenvalue `λ_G`.
pub fn modified_g_signature(state: &Wavefunction) -> Result<(ModifiedG, f64)> {
    let n = state.n_particles();
    let r = state.n_orbitals();
    let stats = state.statistics();
    let intermediates = FockBasis::enumerate(n, r)?;
    // For intermediate c, entry (q*r + p) holds ⟨c| a†_p a_q |ψ⟩.
    let mut matrix = gram_sum(r * r, intermediates.configs(), |c, out| {
        for p in c.orbitals() {
            for q in 0..r {
                if let Some((s, b)) = c.hop(q, p, stats) {
                    let psi_b = state.amplitude_of(b);
                    if psi_b != 0.0 {
                        out.push((q * r + p, psi_b * s as f64));
                    }
                }
            }
        }
    });
    let d1 = one_rdm(state).matrix;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                for l in 0..r {
                    matrix[(i * r + j, k * r + l)] -= d1[(i, j)] * d1[(l, k)];
                }
            }
        }
    }
    let eig = symmetric_eigen(&matrix);
    let lambda_g = max_of(&eig.eigenvalues);
    Ok((
        ModifiedG {
            matrix,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        },
        lambda_g,
    ))
}

pub fn signatures(state: &Wavefunction, provenance: Provenance) -> Result<CondensateSignatures> {
    let (subblock, lambda_d) = pair_subblock_signature(state, provenance.geometry)?;
    let (modified_g, lambda_g) = modified_g_signature(state)?;
    Ok(CondensateSignatures {
        lambda_d,
        lambda_g,
        subblock,
        modified_g,
        provenance,
    })
}
