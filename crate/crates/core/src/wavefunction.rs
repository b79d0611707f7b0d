use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::fock::{Configuration, FockBasis, Statistics};

/// Real amplitudes over a [`FockBasis`], together with the operator algebra
/// that expectation values should be taken in.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    basis: Arc<FockBasis>,
    amplitudes: Vec<f64>,
    statistics: Statistics,
}

impl Wavefunction {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<f64>, statistics: Statistics) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(invalid(format!(
                "{} amplitudes for a basis of {} configurations",
                amplitudes.len(),
                basis.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(invalid("non-finite amplitude"));
        }
        Ok(Wavefunction {
            basis,
            amplitudes,
            statistics,
        })
    }

    /// A single configuration with unit amplitude.
    pub fn determinant(basis: Arc<FockBasis>, config: Configuration, statistics: Statistics) -> Result<Self> {
        let pos = basis
            .index_of(config)
            .ok_or_else(|| invalid(format!("{config} is not in the basis")))?;
        let mut amplitudes = vec![0.0; basis.len()];
        amplitudes[pos] = 1.0;
        Self::new(basis, amplitudes, statistics)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn shared_basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn n_particles(&self) -> usize {
        self.basis.n_particles()
    }

    pub fn n_orbitals(&self) -> usize {
        self.basis.n_orbitals()
    }

    /// Amplitude of `c`, zero when `c` lies outside the basis.
    #[inline]
    pub fn amplitude_of(&self, c: Configuration) -> f64 {
        self.basis.index_of(c).map_or(0.0, |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`; both states must live on the same configuration list.
    pub fn overlap(&self, other: &Wavefunction) -> Result<f64> {
        self.check_same_basis(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum())
    }

    pub(crate) fn check_same_basis(&self, other: &Wavefunction) -> Result<()> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && self.basis.configs() != other.basis.configs() {
            return Err(invalid("states are defined over different bases"));
        }
        if self.statistics != other.statistics {
            return Err(invalid("states use different operator statistics"));
        }
        Ok(())
    }

    /// Same state with every amplitude negated.
    pub fn negated(&self) -> Self {
        Wavefunction {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|a| -a).collect(),
            statistics: self.statistics,
        }
    }

    /// Iterates `(configuration, amplitude)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Configuration, f64)> + '_ {
        self.basis
            .configs()
            .iter()
            .copied()
            .zip(self.amplitudes.iter().copied())
    }
}

/// Flips the global sign so that the largest-magnitude amplitude is positive.
/// Near-ties (within 1e-9 relative) resolve to the lowest index.
pub fn fix_global_sign(amplitudes: &mut [f64]) {
    let max = amplitudes.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if max == 0.0 {
        return;
    }
    let lead = amplitudes
        .iter()
        .position(|a| a.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if amplitudes[lead] < 0.0 {
        amplitudes.iter_mut().for_each(|a| *a = -*a);
    }
}
