//! Degenerate classes of the FEC ground-state support.
//!
//! The support is every configuration reachable from `|1..N⟩` under the FEC
//! terms. Classes are orbits of the site-permutation group (permutations of
//! the `N/2` pair-columns `{2j-1, 2j, 2j-1+N, 2j+N}` together with the
//! simultaneous in-pair swap `2j-1 ↔ 2j`, `2j-1+N ↔ 2j+N`), and each is
//! labelled by the quantum numbers `(x, y, bool, ζ, τ)`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::fock::{Configuration, FockBasis, Statistics};
use crate::hamiltonians::{model_terms, reachable_configurations, solver::dense_lowest, ModelKind, ModelParams};
use crate::wavefunction::{fix_global_sign, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    /// Particles in the upper level.
    pub x: usize,
    /// Adjacent BCS pairs `(2j-1, 2j)` that are doubly occupied, over all `N` pairs.
    pub y: usize,
    /// No Lipkin site `(p, p+N)` is doubly occupied or empty.
    pub lipkin_ok: bool,
    /// Pair-columns with all four orbitals occupied.
    pub zeta: usize,
    /// Diagonal occupations `(2j-1, 2j+N)` or `(2j-1+N, 2j)` within a pair-column.
    pub tau: usize,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{},{},{},{},{}⟩",
            self.x,
            self.y,
            if self.lipkin_ok { "T" } else { "F" },
            self.zeta,
            self.tau
        )
    }
}

pub fn classify_configuration(config: Configuration, n: usize) -> Result<ClassLabel> {
    if n == 0 || !n.is_multiple_of(2) || 2 * n > 64 {
        return Err(invalid(format!("class labels need an even particle number, got {n}")));
    }
    if config.count() != n || (config.bits() >> (2 * n)) != 0 {
        return Err(invalid(format!(
            "{config} is not an {n}-particle configuration over {} orbitals",
            2 * n
        )));
    }
    let occ = |i: usize| config.is_occupied(i);
    let x = (config.bits() >> n).count_ones() as usize;
    let y = (0..n).filter(|&j| occ(2 * j) && occ(2 * j + 1)).count();
    let lipkin_ok = (0..n).all(|p| occ(p) != occ(p + n));
    let columns = n / 2;
    let zeta = (0..columns)
        .filter(|&j| occ(2 * j) && occ(2 * j + 1) && occ(2 * j + n) && occ(2 * j + 1 + n))
        .count();
    let tau = (0..columns)
        .map(|j| usize::from(occ(2 * j) && occ(2 * j + 1 + n)) + usize::from(occ(2 * j + n) && occ(2 * j + 1)))
        .sum();
    Ok(ClassLabel {
        x,
        y,
        lipkin_ok,
        zeta,
        tau,
    })
}

/// Generators of the site-permutation group acting on configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteMove {
    /// Exchange pair-columns `j` and `j + 1`.
    SwapColumns(usize),
    /// Swap the two orbitals of each pair in column `j`.
    SwapWithinColumn(usize),
}

impl SiteMove {
    pub fn generators(n: usize) -> Vec<SiteMove> {
        let columns = n / 2;
        let mut g: Vec<SiteMove> = (0..columns.saturating_sub(1)).map(SiteMove::SwapColumns).collect();
        if columns > 0 {
            g.push(SiteMove::SwapWithinColumn(0));
        }
        g
    }

    fn orbital_image(self, orbital: usize, n: usize) -> usize {
        let (level, local) = (orbital / n, orbital % n);
        let (column, slot) = (local / 2, local % 2);
        let (column, slot) = match self {
            SiteMove::SwapColumns(j) if column == j => (j + 1, slot),
            SiteMove::SwapColumns(j) if column == j + 1 => (j, slot),
            SiteMove::SwapWithinColumn(j) if column == j => (j, 1 - slot),
            _ => (column, slot),
        };
        level * n + 2 * column + slot
    }

    pub fn apply(self, config: Configuration, n: usize) -> Configuration {
        Configuration::from_orbitals(config.orbitals().map(|o| self.orbital_image(o, n)))
    }
}

#[derive(Debug, Clone)]
pub struct Class {
    pub label: ClassLabel,
    /// Ascending bitmask order.
    pub members: Vec<Configuration>,
}

impl Class {
    pub fn degeneracy(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct ClassBasis {
    n_particles: usize,
    classes: Vec<Class>,
    class_of: HashMap<Configuration, usize>,
}

impl ClassBasis {
    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn n_support(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, c: Configuration) -> Option<usize> {
        self.class_of.get(&c).copied()
    }

    pub fn position(&self, label: &ClassLabel) -> Option<usize> {
        self.classes.iter().position(|c| &c.label == label)
    }

    /// The support set as a Fock basis.
    pub fn support_basis(&self) -> Result<FockBasis> {
        let configs = self.classes.iter().flat_map(|c| c.members.iter().copied()).collect();
        FockBasis::from_configs(self.n_particles, 2 * self.n_particles, configs)
    }

    /// Expands class amplitudes into configuration amplitudes, each member
    /// carrying `v_c / √deg(c)`.
    pub fn expand(
        &self,
        class_amplitudes: &[f64],
        basis: Arc<FockBasis>,
        statistics: Statistics,
    ) -> Result<Wavefunction> {
        if class_amplitudes.len() != self.classes.len() {
            return Err(invalid("one amplitude per class expected"));
        }
        let mut amplitudes = vec![0.0; basis.len()];
        for (class, &v) in self.classes.iter().zip(class_amplitudes) {
            let weight = v / (class.degeneracy() as f64).sqrt();
            for &m in &class.members {
                let pos = basis
                    .index_of(m)
                    .ok_or_else(|| invalid(format!("{m} is missing from the target basis")))?;
                amplitudes[pos] = weight;
            }
        }
        Wavefunction::new(basis, amplitudes, statistics)
    }
}

/// Support set, orbits and labels for `n` particles in `2n` orbitals.
pub fn build_class_basis(n: usize) -> Result<ClassBasis> {
    if !n.is_multiple_of(2) || !(4..=12).contains(&n) {
        return Err(invalid(format!("class bases are built for even 4 ≤ N ≤ 12, got {n}")));
    }
    let generic = ModelParams::fec(n, 1.0, 1.0, 1.0, 1.0)?;
    let support = reachable_configurations(Configuration::reference(n), &model_terms(&generic));
    let position: HashMap<Configuration, usize> = support.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut parent: Vec<usize> = (0..support.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, &c) in support.iter().enumerate() {
        for g in SiteMove::generators(n) {
            let image = g.apply(c, n);
            let j = *position
                .get(&image)
                .ok_or_else(|| invalid(format!("symmetry image {image} of {c} left the support")))?;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    // Roots are the smallest index of each orbit, so classes come out
    // ordered by their lowest member.
    let mut orbit_index: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Class> = Vec::new();
    for (i, &c) in support.iter().enumerate() {
        let root = find(&mut parent, i);
        let label = classify_configuration(c, n)?;
        let k = *orbit_index.entry(root).or_insert_with(|| {
            classes.push(Class {
                label,
                members: Vec::new(),
            });
            classes.len() - 1
        });
        if classes[k].label != label {
            return Err(Error::LabelCollision {
                label: format!("{} vs {label}", classes[k].label),
                first: format!("orbit of {}", classes[k].members[0]),
                second: format!("member {c}"),
            });
        }
        classes[k].members.push(c);
    }

    let mut seen: HashMap<ClassLabel, usize> = HashMap::new();
    for (k, class) in classes.iter().enumerate() {
        if let Some(&prev) = seen.get(&class.label) {
            return Err(Error::LabelCollision {
                label: class.label.to_string(),
                first: format!("orbit of {}", classes[prev].members[0]),
                second: format!("orbit of {}", class.members[0]),
            });
        }
        seen.insert(class.label, k);
    }

    let class_of = classes
        .iter()
        .enumerate()
        .flat_map(|(k, class)| class.members.iter().map(move |&m| (m, k)))
        .collect();
    Ok(ClassBasis {
        n_particles: n,
        classes,
        class_of,
    })
}

/// `K × K` Hamiltonian over the symmetric class states:
/// entry `(i, j) = Σ_{b1 ∈ i, b2 ∈ j} ⟨b1|H|b2⟩ / √(deg_i deg_j)`.
pub fn reduced_hamiltonian(params: &ModelParams, cb: &ClassBasis, statistics: Statistics) -> Result<DMatrix<f64>> {
    if params.model != ModelKind::Fec {
        return Err(invalid("the class reduction is defined for the FEC model"));
    }
    if params.n_particles != cb.n_particles() {
        return Err(invalid(format!(
            "class basis is for N = {}, parameters for N = {}",
            cb.n_particles(),
            params.n_particles
        )));
    }
    let terms = model_terms(params);
    let k = cb.len();
    let mut h = DMatrix::zeros(k, k);
    for (j, class) in cb.classes().iter().enumerate() {
        for &ket in &class.members {
            for term in &terms {
                if let Some((sign, bra)) = term.apply(ket, statistics) {
                    let i = cb.class_of(bra).ok_or(Error::SectorLeak {
                        from: ket.bits(),
                        to: bra.bits(),
                    })?;
                    h[(i, j)] += term.coefficient() * sign as f64;
                }
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] /= ((cb.classes[i].degeneracy() * cb.classes[j].degeneracy()) as f64).sqrt();
        }
    }
    Ok(h)
}

/// Lowest eigenpair of the reduced Hamiltonian.
#[derive(Debug, Clone)]
pub struct ReducedGround {
    pub energy: f64,
    pub class_amplitudes: Vec<f64>,
    /// The same state over the support basis.
    pub state: Wavefunction,
}

pub fn reduced_ground_state(params: &ModelParams, cb: &ClassBasis, statistics: Statistics) -> Result<ReducedGround> {
    let h = reduced_hamiltonian(params, cb, statistics)?;
    let (energy, mut v, _) = dense_lowest(&h);
    fix_global_sign(&mut v);
    let basis = Arc::new(cb.support_basis()?);
    let state = cb.expand(&v, basis, statistics)?;
    Ok(ReducedGround {
        energy,
        class_amplitudes: v,
        state,
    })
}

/// Rayleigh quotient of class amplitudes, used by tests and diagnostics.
pub fn reduced_energy(h: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    (v.transpose() * h * &v)[(0, 0)] / v.norm_squared()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub label: ClassLabel,
    pub degeneracy: usize,
    pub probability: f64,
}

/// Class occupation probabilities plus the weight found outside the support.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub rows: Vec<HistogramRow>,
    pub residual: f64,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum::<f64>() + self.residual
    }

    pub fn probability(&self, label: &ClassLabel) -> Option<f64> {
        self.rows.iter().find(|r| &r.label == label).map(|r| r.probability)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "lipkin_ok", "zeta", "tau", "degeneracy", "probability"])?;
        for r in &self.rows {
            w.write_record([
                r.label.x.to_string(),
                r.label.y.to_string(),
                r.label.lipkin_ok.to_string(),
                r.label.zeta.to_string(),
                r.label.tau.to_string(),
                r.degeneracy.to_string(),
                r.probability.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn occupation_histogram(state: &Wavefunction, cb: &ClassBasis) -> Result<Histogram> {
    if state.n_particles() != cb.n_particles() || state.n_orbitals() != 2 * cb.n_particles() {
        return Err(invalid("state and class basis describe different systems"));
    }
    let rows: Vec<HistogramRow> = cb
        .classes()
        .iter()
        .map(|class| HistogramRow {
            label: class.label,
            degeneracy: class.degeneracy(),
            probability: class.members.iter().map(|&m| state.amplitude_of(m).powi(2)).sum(),
        })
        .collect();
    let total: f64 = state.amplitudes().iter().map(|a| a * a).sum();
    let inside: f64 = rows.iter().map(|r| r.probability).sum();
    Ok(Histogram {
        rows,
        residual: total - inside,
    })
}
