//! Lowest eigenpair of a real symmetric [`SparseHamiltonian`].
//!
//! Small matrices are diagonalized densely. Larger ones use Lanczos with full
//! reorthogonalization and explicit restarts from the current Ritz vector; a
//! second Lanczos run deflated against the ground vector supplies the next
//! eigenvalue, so exact degeneracies are detected as well.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::fock::SparseHamiltonian;
use crate::wavefunction::fix_global_sign;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest dimension handled by the dense solver.
    pub dense_limit: usize,
    /// Relative residual `‖Hv − Ev‖ / max(1, |E|)` accepted by Lanczos.
    pub tolerance: f64,
    /// Krylov subspace size before a restart.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Ground states with `gap_to_next` below this are flagged degenerate.
    pub degeneracy_tol: f64,
    /// Seed of the Lanczos start vectors.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_limit: 5000,
            tolerance: 1e-9,
            krylov_dim: 120,
            max_restarts: 40,
            degeneracy_tol: 1e-9,
            seed: 0x5eed_0f3c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Normalized, with the largest-magnitude amplitude positive.
    pub amplitudes: Vec<f64>,
    /// `E1 − E0`, infinite for a one-dimensional problem.
    pub gap_to_next: f64,
    pub degenerate: bool,
    /// `‖H v − E v‖` of the returned vector.
    pub residual: f64,
}

pub fn ground_state(h: &SparseHamiltonian, opts: &SolverOptions) -> Result<GroundState> {
    let dim = h.dim();
    if dim == 0 {
        return Err(invalid("cannot solve an empty Hamiltonian"));
    }
    let (energy, mut amplitudes, next) = if dim <= opts.dense_limit {
        dense_lowest(&h.to_dense())
    } else {
        let (e0, v0) = lanczos_lowest(h, None, opts.seed, opts)?;
        let next = if dim > 1 {
            Some(lanczos_lowest(h, Some(&v0), opts.seed.wrapping_add(1), opts)?.0)
        } else {
            None
        };
        (e0, v0, next)
    };
    fix_global_sign(&mut amplitudes);
    let residual = residual_norm(h, energy, &amplitudes);
    let gap_to_next = next.map_or(f64::INFINITY, |e1| e1 - energy);
    Ok(GroundState {
        energy,
        amplitudes,
        gap_to_next,
        degenerate: gap_to_next < opts.degeneracy_tol,
        residual,
    })
}

/// Lowest eigenvalue, its eigenvector, and the second eigenvalue.
pub fn dense_lowest(m: &DMatrix<f64>) -> (f64, Vec<f64>, Option<f64>) {
    let eig = symmetric_eigen(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let lowest = order[0];
    let v: Vec<f64> = eig.eigenvectors.column(lowest).iter().copied().collect();
    let next = order.get(1).map(|&i| eig.eigenvalues[i]);
    (eig.eigenvalues[lowest], v, next)
}

/// `SymmetricEigen` can return NaNs on some matrices with a vanishing
/// diagonal (pure Lipkin at ε = 0). A diagonal shift leaves the eigenvectors
/// unchanged and avoids it.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let finite = |e: &SymmetricEigen<f64, nalgebra::Dyn>| {
        e.eigenvalues.iter().chain(e.eigenvectors.iter()).all(|x| x.is_finite())
    };
    let eig = SymmetricEigen::new(m.clone());
    if finite(&eig) {
        return eig;
    }
    let scale = m.abs().max().max(1.0);
    for factor in [1.0, -1.0, 0.37, 2.9] {
        let shift = factor * scale;
        let n = m.nrows();
        let mut e = SymmetricEigen::new(m + DMatrix::identity(n, n) * shift);
        if finite(&e) {
            e.eigenvalues.iter_mut().for_each(|v| *v -= shift);
            return e;
        }
    }
    eig
}

/// Largest eigenvalue of a dense symmetric matrix.
pub fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigen(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn residual_norm(h: &SparseHamiltonian, energy: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    h.matvec(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - energy * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn lanczos_lowest(
    h: &SparseHamiltonian,
    deflate: Option<&[f64]>,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(f64, Vec<f64>)> {
    let dim = h.dim();
    let project = |v: &mut [f64]| {
        if let Some(d) = deflate {
            let c = dot(d, v);
            axpy(-c, d, v);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project(&mut start);
    normalize(&mut start);

    let effective_dim = dim - usize::from(deflate.is_some());
    let m_max = opts.krylov_dim.min(effective_dim).max(1);
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![0.0; dim];

        let mut ritz: Option<(f64, Vec<f64>)> = None;
        for j in 0..m_max {
            iterations += 1;
            h.matvec(&basis[j], &mut w);
            project(&mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
                project(&mut w);
            }
            let b = dot(&w, &w).sqrt();

            let at_end = j + 1 == m_max;
            let breakdown = b <= 1e-12 * a.abs().max(1.0);
            if (j + 1) % 10 == 0 || at_end || breakdown {
                let (theta, s) = tridiagonal_lowest(&alpha, &beta);
                let estimate = b * s[s.len() - 1].abs();
                if estimate <= opts.tolerance * theta.abs().max(1.0) || at_end || breakdown {
                    ritz = Some((theta, s));
                    break;
                }
            }
            beta.push(b);
            let next: Vec<f64> = w.iter().map(|x| x / b).collect();
            basis.push(next);
        }

        let (theta, s) = ritz.expect("loop always yields a Ritz pair");
        let mut x = vec![0.0; dim];
        for (coef, q) in s.iter().zip(&basis) {
            axpy(*coef, q, &mut x);
        }
        project(&mut x);
        normalize(&mut x);

        h.matvec(&x, &mut w);
        let energy = dot(&x, &w);
        let residual = w
            .iter()
            .zip(&x)
            .map(|(hx, x)| (hx - energy * x).powi(2))
            .sum::<f64>()
            .sqrt();
        // Deflated residuals include the component along the removed vector.
        let residual = match deflate {
            Some(d) => {
                let c = dot(d, &w);
                (residual * residual - c * c).max(0.0).sqrt()
            }
            None => residual,
        };
        last_residual = residual;
        if residual <= opts.tolerance * theta.abs().max(1.0) || effective_dim <= m_max && basis.len() >= effective_dim {
            return Ok((energy, x));
        }
        start = x;
    }

    Err(Error::NotConverged {
        iterations,
        residual: last_residual,
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix (alpha, beta).
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (theta, s, _) = dense_lowest(&t);
    (theta, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_operator_matrix, FockBasis, OperatorTerm, Statistics};

    fn chain(n_sites: usize) -> SparseHamiltonian {
        // Two hard-core particles hopping on an open chain with a linear potential.
        let basis = FockBasis::enumerate(2, n_sites).unwrap();
        let mut terms = Vec::new();
        for i in 0..n_sites {
            terms.push(OperatorTerm::one_body(0.01 * i as f64, i, i));
            if i + 1 < n_sites {
                terms.push(OperatorTerm::one_body(-1.0, i, i + 1));
                terms.push(OperatorTerm::one_body(-1.0, i + 1, i));
            }
        }
        build_operator_matrix(&terms, &basis, Statistics::HardCore).unwrap()
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = chain(30);
        let dense = ground_state(&h, &SolverOptions::default()).unwrap();
        let lanczos = ground_state(
            &h,
            &SolverOptions {
                dense_limit: 10,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        assert!((dense.energy - lanczos.energy).abs() < 1e-10);
        assert!((dense.gap_to_next - lanczos.gap_to_next).abs() < 1e-8);
        let overlap: f64 = dense
            .amplitudes
            .iter()
            .zip(&lanczos.amplitudes)
            .map(|(a, b)| a * b)
            .sum();
        assert!((overlap - 1.0).abs() < 1e-9, "overlap {overlap}");
    }

    #[test]
    fn degenerate_pair_is_flagged() {
        // Two decoupled identical chains.
        let basis = FockBasis::enumerate(1, 40).unwrap();
        let mut terms = Vec::new();
        for offset in [0, 20] {
            for i in 0..19 {
                terms.push(OperatorTerm::one_body(-1.0, offset + i, offset + i + 1));
                terms.push(OperatorTerm::one_body(-1.0, offset + i + 1, offset + i));
            }
        }
        let h = build_operator_matrix(&terms, &basis, Statistics::HardCore).unwrap();
        for dense_limit in [1000, 5] {
            let gs = ground_state(
                &h,
                &SolverOptions {
                    dense_limit,
                    ..SolverOptions::default()
                },
            )
            .unwrap();
            assert!(gs.degenerate, "dense_limit {dense_limit}: gap {}", gs.gap_to_next);
        }
    }

    #[test]
    fn one_dimensional_problem() {
        let basis = FockBasis::enumerate(2, 2).unwrap();
        let h = build_operator_matrix(&[OperatorTerm::one_body(3.0, 0, 0)], &basis, Statistics::HardCore).unwrap();
        let gs = ground_state(&h, &SolverOptions::default()).unwrap();
        assert_eq!(gs.energy, 3.0);
        assert_eq!(gs.amplitudes, vec![1.0]);
        assert!(gs.gap_to_next.is_infinite());
        assert!(!gs.degenerate);
    }

    #[test]
    fn starved_lanczos_reports_residual() {
        let h = chain(28);
        let err = ground_state(
            &h,
            &SolverOptions {
                dense_limit: 1,
                krylov_dim: 3,
                max_restarts: 0,
                ..SolverOptions::default()
            },
        )
        .unwrap_err();
        match err {
            Error::NotConverged { residual, .. } => assert!(residual > 0.0),
            other => panic!("unexpected {other}"),
        }
    }
}
