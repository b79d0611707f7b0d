//! Occupation-number basis and second-quantized operator strings.
//!
//! Orbitals are 0-based internally: orbital `i` of the usual 1-based labels
//! (as in kets such as `|1,2,5,6⟩`) is bit `i - 1` of a [`Configuration`].
//! Bases are kept in ascending bitmask order.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Largest full configuration space a [`FockBasis`] will index, `binomial(24, 12)`.
pub const MAX_SPACE_DIM: u64 = 2_704_156;

/// Tolerance used when verifying that an assembled operator is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Exchange statistics used when ladder operators act on a configuration.
///
/// `Fermion` attaches the parity `(-1)^(occupied orbitals below k)` to every
/// ladder operator acting on orbital `k`, i.e. a configuration
/// `|i1 < i2 < ... < iN⟩` is the ordered product of creators on the vacuum.
/// `HardCore` applies the same occupation rules with no sign at all (each
/// orbital behaves as a qubit). The model matrices quoted for this system
/// are the hard-core ones, so that is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Statistics {
    #[default]
    HardCore,
    Fermion,
}

/// An occupation bitmask over at most 64 orbitals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(u64);

impl Configuration {
    pub const fn from_bits(bits: u64) -> Self {
        Configuration(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Builds a configuration from 0-based orbital indices.
    pub fn from_orbitals<I: IntoIterator<Item = usize>>(orbitals: I) -> Self {
        Configuration(orbitals.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    /// Builds a configuration from 1-based orbital labels, e.g. `[1, 2, 5, 6]`.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self::from_orbitals(labels.iter().map(|&l| {
            assert!(l >= 1, "orbital labels are 1-based");
            l - 1
        }))
    }

    /// The lowest-`n` configuration `|1, 2, ..., n⟩`.
    pub fn reference(n: usize) -> Self {
        if n == 64 {
            Configuration(u64::MAX)
        } else {
            Configuration((1u64 << n) - 1)
        }
    }

    pub fn is_occupied(self, orbital: usize) -> bool {
        self.0 >> orbital & 1 == 1
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Number of occupied orbitals with index strictly below `orbital`.
    pub fn count_below(self, orbital: usize) -> u32 {
        (self.0 & ((1u64 << orbital) - 1)).count_ones()
    }

    /// 0-based occupied orbitals in ascending order.
    pub fn orbitals(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// 1-based occupied orbital labels.
    pub fn labels(self) -> Vec<usize> {
        self.orbitals().map(|i| i + 1).collect()
    }

    /// Applies a single ladder operator.
    #[inline]
    pub fn apply_ladder(self, op: Ladder, stats: Statistics) -> Option<(i8, Configuration)> {
        let bit = 1u64 << op.orbital;
        let occupied = self.0 & bit != 0;
        if occupied == op.dagger {
            return None;
        }
        let sign = match stats {
            Statistics::HardCore => 1,
            Statistics::Fermion => {
                if (self.0 & (bit - 1)).count_ones().is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
        };
        Some((sign, Configuration(self.0 ^ bit)))
    }

    /// Moves one particle from `from` to `to` (`a†_to a_from`); `from == to`
    /// is the number operator.
    #[inline]
    pub fn hop(self, to: usize, from: usize, stats: Statistics) -> Option<(i8, Configuration)> {
        let (s1, c) = self.apply_ladder(Ladder::annihilate(from), stats)?;
        let (s2, c) = c.apply_ladder(Ladder::create(to), stats)?;
        Some((s1 * s2, c))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(|l| l.to_string()).collect();
        write!(f, "|{}⟩", labels.join(","))
    }
}

/// A creation (`dagger`) or annihilation operator on one orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub orbital: usize,
    pub dagger: bool,
}

impl Ladder {
    pub const fn create(orbital: usize) -> Self {
        Ladder { orbital, dagger: true }
    }

    pub const fn annihilate(orbital: usize) -> Self {
        Ladder { orbital, dagger: false }
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a+{}", self.orbital + 1)
        } else {
            write!(f, "a{}", self.orbital + 1)
        }
    }
}

/// A coefficient times an ordered product of ladder operators.
///
/// Factors are written left to right as in the usual notation and act on a
/// ket right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    coefficient: f64,
    factors: Vec<Ladder>,
}

impl OperatorTerm {
    /// Rejects strings that do not conserve particle number.
    pub fn new(coefficient: f64, factors: Vec<Ladder>) -> Result<Self> {
        let creators = factors.iter().filter(|l| l.dagger).count();
        if 2 * creators != factors.len() {
            return Err(invalid(format!(
                "operator string has {creators} creators and {} annihilators",
                factors.len() - creators
            )));
        }
        if factors.iter().any(|l| l.orbital >= 64) {
            return Err(invalid("orbital index exceeds the 64-bit configuration width"));
        }
        Ok(OperatorTerm { coefficient, factors })
    }

    /// `c a†_i a_k`
    pub fn one_body(coefficient: f64, i: usize, k: usize) -> Self {
        OperatorTerm {
            coefficient,
            factors: vec![Ladder::create(i), Ladder::annihilate(k)],
        }
    }

    /// `c a†_i a†_j a_k a_l`, factors exactly in the written order.
    pub fn two_body(coefficient: f64, i: usize, j: usize, k: usize, l: usize) -> Self {
        OperatorTerm {
            coefficient,
            factors: vec![
                Ladder::create(i),
                Ladder::create(j),
                Ladder::annihilate(k),
                Ladder::annihilate(l),
            ],
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[Ladder] {
        &self.factors
    }

    pub fn max_orbital(&self) -> Option<usize> {
        self.factors.iter().map(|l| l.orbital).max()
    }

    /// The Hermitian conjugate string: reversed order, daggers swapped.
    pub fn adjoint(&self) -> Self {
        OperatorTerm {
            coefficient: self.coefficient,
            factors: self
                .factors
                .iter()
                .rev()
                .map(|l| Ladder {
                    orbital: l.orbital,
                    dagger: !l.dagger,
                })
                .collect(),
        }
    }

    /// Applies the factor string (right to left), returning the accumulated
    /// sign and resulting configuration, or `None` for an algebraic zero.
    #[inline]
    pub fn apply(&self, config: Configuration, stats: Statistics) -> Option<(i8, Configuration)> {
        let mut sign = 1i8;
        let mut current = config;
        for &op in self.factors.iter().rev() {
            let (s, next) = current.apply_ladder(op, stats)?;
            sign *= s;
            current = next;
        }
        Some((sign, current))
    }
}

impl fmt::Display for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for l in &self.factors {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

/// Pascal table up to 64 choose 64, saturating.
fn binomial_table() -> Vec<[u64; 65]> {
    let mut t = vec![[0u64; 65]; 65];
    for n in 0..=64 {
        t[n][0] = 1;
        for k in 1..=n {
            t[n][k] = t[n - 1][k - 1].saturating_add(t[n - 1][k]);
        }
    }
    t
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n > 64 {
        return 0;
    }
    binomial_table()[n][k]
}

/// An ordered set of `N`-particle configurations over `r` orbitals.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_particles: usize,
    n_orbitals: usize,
    configs: Vec<Configuration>,
    /// Position of each configuration by its colex rank in the full space.
    lookup: Vec<u32>,
    /// `binom[t][k]` for t < r, k <= N.
    binom: Vec<Vec<u32>>,
}

const ABSENT: u32 = u32::MAX;

impl FockBasis {
    /// Every configuration of `n_particles` over `n_orbitals`, in ascending
    /// bitmask order.
    pub fn enumerate(n_particles: usize, n_orbitals: usize) -> Result<Self> {
        Self::check_counts(n_particles, n_orbitals)?;
        let configs = all_configurations(n_particles, n_orbitals);
        Self::assemble(n_particles, n_orbitals, configs)
    }

    /// The configurations of the full space that satisfy `keep`.
    pub fn filtered<F>(n_particles: usize, n_orbitals: usize, keep: F) -> Result<Self>
    where
        F: Fn(Configuration) -> bool,
    {
        Self::check_counts(n_particles, n_orbitals)?;
        let configs = all_configurations(n_particles, n_orbitals)
            .into_iter()
            .filter(|&c| keep(c))
            .collect();
        Self::assemble(n_particles, n_orbitals, configs)
    }

    /// A basis over an explicit configuration set (sorted and deduplicated).
    pub fn from_configs(n_particles: usize, n_orbitals: usize, mut configs: Vec<Configuration>) -> Result<Self> {
        Self::check_counts(n_particles, n_orbitals)?;
        let width_mask = if n_orbitals == 64 {
            u64::MAX
        } else {
            (1u64 << n_orbitals) - 1
        };
        for c in &configs {
            if c.count() != n_particles || c.bits() & !width_mask != 0 {
                return Err(invalid(format!(
                    "configuration {c} is not an {n_particles}-particle state over {n_orbitals} orbitals"
                )));
            }
        }
        configs.sort_unstable();
        configs.dedup();
        Self::assemble(n_particles, n_orbitals, configs)
    }

    fn check_counts(n_particles: usize, n_orbitals: usize) -> Result<()> {
        if n_orbitals > 64 || n_particles > n_orbitals {
            return Err(invalid(format!(
                "cannot place {n_particles} particles in {n_orbitals} orbitals"
            )));
        }
        let dim = binomial(n_orbitals, n_particles);
        if dim > MAX_SPACE_DIM {
            return Err(invalid(format!(
                "configuration space binomial({n_orbitals}, {n_particles}) = {dim} exceeds {MAX_SPACE_DIM}"
            )));
        }
        Ok(())
    }

    fn assemble(n_particles: usize, n_orbitals: usize, configs: Vec<Configuration>) -> Result<Self> {
        let table = binomial_table();
        let binom: Vec<Vec<u32>> = (0..n_orbitals.max(1))
            .map(|t| (0..=n_particles + 1).map(|k| table[t][k] as u32).collect())
            .collect();
        let full = binomial(n_orbitals, n_particles) as usize;
        let mut lookup = vec![ABSENT; full];
        let mut basis = FockBasis {
            n_particles,
            n_orbitals,
            configs: Vec::new(),
            lookup: Vec::new(),
            binom,
        };
        for (pos, &c) in configs.iter().enumerate() {
            lookup[basis.colex_rank(c)] = pos as u32;
        }
        basis.configs = configs;
        basis.lookup = lookup;
        Ok(basis)
    }

    /// Rank of `c` among all `N`-subsets in ascending bitmask order.
    #[inline]
    fn colex_rank(&self, c: Configuration) -> usize {
        let mut rank = 0usize;
        for (k, orbital) in c.orbitals().enumerate() {
            rank += self.binom[orbital][k + 1] as usize;
        }
        rank
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn get(&self, index: usize) -> Configuration {
        self.configs[index]
    }

    /// Position of `c` in this basis, if present.
    #[inline]
    pub fn index_of(&self, c: Configuration) -> Option<usize> {
        if c.count() != self.n_particles || (self.n_orbitals < 64 && c.bits() >> self.n_orbitals != 0) {
            return None;
        }
        match self.lookup[self.colex_rank(c)] {
            ABSENT => None,
            pos => Some(pos as usize),
        }
    }
}

fn all_configurations(n: usize, r: usize) -> Vec<Configuration> {
    let dim = binomial(r, n) as usize;
    let mut out = Vec::with_capacity(dim);
    if n == 0 {
        out.push(Configuration(0));
        return out;
    }
    // Gosper's hack walks N-subsets in ascending numeric order.
    let mut c: u64 = (1u64 << n) - 1;
    for _ in 0..dim {
        out.push(Configuration(c));
        let lowest = c & c.wrapping_neg();
        let ripple = c.wrapping_add(lowest);
        if ripple == 0 {
            break;
        }
        c = (((ripple ^ c) >> 2) / lowest) | ripple;
    }
    out
}

/// Real symmetric matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[a]..self.row_ptr[a + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let span = self.row_ptr[a]..self.row_ptr[a + 1];
        let cols = &self.cols[span.clone()];
        match cols.binary_search(&(b as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = H x`; rows are independent so the result does not depend on
    /// the thread count.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(a, out)| {
            let span = self.row_ptr[a]..self.row_ptr[a + 1];
            let mut acc = 0.0;
            for (c, v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * x[*c as usize];
            }
            *out = acc;
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for a in 0..self.dim {
            for (b, v) in self.row(a) {
                m[(a, b)] = v;
            }
        }
        m
    }

    /// Restriction to the given (sorted) basis positions.
    pub fn submatrix(&self, positions: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(positions.len(), positions.len());
        for (i, &a) in positions.iter().enumerate() {
            for (j, &b) in positions.iter().enumerate() {
                m[(i, j)] = self.get(a, b);
            }
        }
        m
    }

    fn check_symmetric(&self) -> Result<()> {
        for a in 0..self.dim {
            for (b, v) in self.row(a) {
                if b < a {
                    continue;
                }
                let delta = (v - self.get(b, a)).abs();
                if delta > SYMMETRY_TOL {
                    return Err(Error::Asymmetric { row: a, col: b, delta });
                }
            }
        }
        Ok(())
    }
}

/// Assembles `H[a][b] = Σ coefficient × sign` over every term mapping
/// configuration `b` to configuration `a`.
///
/// Fails if a term references an orbital outside the basis, maps a basis
/// configuration outside the basis, or if the result is not symmetric.
pub fn build_operator_matrix(
    terms: &[OperatorTerm],
    basis: &FockBasis,
    stats: Statistics,
) -> Result<SparseHamiltonian> {
    let r = basis.n_orbitals();
    if let Some(bad) = terms.iter().find(|t| t.max_orbital().is_some_and(|m| m >= r)) {
        return Err(invalid(format!("term `{bad}` acts outside {r} orbitals")));
    }

    let columns: Vec<Result<Vec<(u32, f64)>>> = basis
        .configs()
        .par_iter()
        .map(|&ket| {
            let mut entries: Vec<(u32, f64)> = Vec::new();
            for term in terms {
                if let Some((sign, bra)) = term.apply(ket, stats) {
                    let a = basis.index_of(bra).ok_or(Error::SectorLeak {
                        from: ket.bits(),
                        to: bra.bits(),
                    })?;
                    entries.push((a as u32, term.coefficient() * sign as f64));
                }
            }
            // Stable sort keeps term order within a row, so sums are reproducible.
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
            for (a, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == a => last.1 += v,
                    _ => merged.push((a, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            Ok(merged)
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(basis.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    // Column b of a symmetric matrix is row b; symmetry is verified below.
    for column in columns {
        for (a, v) in column? {
            cols.push(a);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    let h = SparseHamiltonian {
        dim: basis.len(),
        row_ptr,
        cols,
        vals,
    };
    h.check_symmetric()?;
    Ok(h)
}
