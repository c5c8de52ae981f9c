//! Dense ground truth for small determinant spaces.
//!
//! Everything here is `f64` and O(D^2) memory / O(D^3) time; the default
//! dimension cap keeps it at desk scale.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::determinant::{Determinant, DeterminantSpace, Ladder};
use crate::error::{Error, Result};
use crate::hamiltonian::{ClassifiedHamiltonian, IntegralSet, OffDiagonalTerm};
use crate::qpe::StepOperator;
use crate::trotter::{OffsetPolicy, StateVector, TrotterConfig, TrotterEngine};

pub const DEFAULT_DIMENSION_CAP: usize = 4096;

const RESIDUAL_TOL: f64 = 1e-9;

/// A complex matrix over a determinant space in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub space: DeterminantSpace,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|(A† A - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.matrix;
        let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
        (m.adjoint() * m - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &StateVector<f64>) -> StateVector<f64> {
        let v = DVector::from_column_slice(&state.amps);
        StateVector { space: state.space, amps: (&self.matrix * v).as_slice().to_vec() }
    }
}

fn check_cap(space: &DeterminantSpace, cap: usize) -> Result<usize> {
    let dim = space.len();
    if dim > cap {
        return Err(Error::OracleCap { dim, cap });
    }
    Ok(dim)
}

fn basis(space: &DeterminantSpace) -> Vec<Determinant> {
    space.determinants().collect()
}

/// Adds `coeff · O` to `m`, where `O` is the ladder string `ops` (rightmost first).
fn add_operator(
    m: &mut DMatrix<Complex64>,
    space: &DeterminantSpace,
    dets: &[Determinant],
    ops: &[Ladder],
    coeff: f64,
) {
    for (j, det) in dets.iter().enumerate() {
        if let Some((out, sign)) = det.apply(space.n, ops) {
            // operators that leave the space (never for conserving strings) are dropped
            if let Ok(idx) = space.index_of(out) {
                m[(idx.flat as usize, j)] += Complex64::new(coeff * sign as f64, 0.0);
            }
        }
    }
}

/// `h (X + X†)` for a single off-diagonal term.
pub fn dense_term_matrix(term: &OffDiagonalTerm<f64>, space: &DeterminantSpace) -> Result<DenseOperator> {
    let dim = check_cap(space, DEFAULT_DIMENSION_CAP)?;
    let dets = basis(space);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    add_operator(&mut m, space, &dets, &term.forward_ops(), term.coefficient());
    add_operator(&mut m, space, &dets, &term.adjoint_ops(), term.coefficient());
    Ok(DenseOperator { space: *space, matrix: m })
}

/// `offset · I + Σ terms`, each term applied literally through ladder strings.
pub fn build_dense_hamiltonian(
    ham: &ClassifiedHamiltonian<f64>,
    space: &DeterminantSpace,
    cap: usize,
) -> Result<DenseOperator> {
    let dim = check_cap(space, cap)?;
    if (space.n, space.k_alpha, space.k_beta) != (ham.n_orbitals, ham.n_alpha, ham.n_beta) {
        return Err(Error::DimensionMismatch("space does not match Hamiltonian".into()));
    }
    let dets = basis(space);
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(ham.offset, 0.0);
    use Ladder::{Annihilate, Create};
    for t in &ham.pp {
        add_operator(&mut m, space, &dets, &[Annihilate(t.p), Create(t.p)], t.h);
    }
    for t in &ham.pqqp {
        add_operator(&mut m, space, &dets, &[Annihilate(t.p), Annihilate(t.q), Create(t.q), Create(t.p)], t.h);
    }
    for term in ham.off_diagonal() {
        add_operator(&mut m, space, &dets, &term.forward_ops(), term.coefficient());
        add_operator(&mut m, space, &dets, &term.adjoint_ops(), term.coefficient());
    }
    Ok(DenseOperator { space: *space, matrix: m })
}

/// The spin-orbital Hamiltonian assembled straight from spatial integrals,
/// without classification:
/// `E_core + Σ h(p,q) a†_{pσ} a_{qσ} + ½ Σ (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}`.
pub fn build_dense_from_integrals(ints: &IntegralSet<f64>, cap: usize) -> Result<DenseOperator> {
    let space = ints.space()?;
    let dim = check_cap(&space, cap)?;
    let dets = basis(&space);
    let n = ints.n_orbitals;
    let nu = n as usize;
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(ints.core_energy, 0.0);
    use Ladder::{Annihilate, Create};
    for sigma in 0..2 {
        for p in 0..nu {
            for q in 0..nu {
                let h = ints.one_body(p, q);
                if h != 0.0 {
                    let (ps, qs) = (sigma * n + p as u32, sigma * n + q as u32);
                    add_operator(&mut m, &space, &dets, &[Annihilate(qs), Create(ps)], h);
                }
            }
        }
    }
    for p in 0..nu {
        for q in 0..nu {
            for r in 0..nu {
                for s in 0..nu {
                    let v = ints.two_body(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let ops = [
                                Annihilate(sigma * n + q as u32),
                                Annihilate(tau * n + s as u32),
                                Create(tau * n + r as u32),
                                Create(sigma * n + p as u32),
                            ];
                            add_operator(&mut m, &space, &dets, &ops, 0.5 * v);
                        }
                    }
                }
            }
        }
    }
    Ok(DenseOperator { space, matrix: m })
}

/// Spectral decomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn ground_state(&self, space: DeterminantSpace) -> StateVector<f64> {
        StateVector { space, amps: self.vectors.column(0).iter().copied().collect() }
    }
}

pub fn exact_eigensolve(op: &DenseOperator) -> Result<Eigensystem> {
    let herm = op.hermiticity_error();
    if herm > 1e-10 {
        return Err(Error::Numerical(format!("matrix is not Hermitian (error {herm:e})")));
    }
    let eig = nalgebra::SymmetricEigen::new(op.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(op.dim(), op.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for (c, &lambda) in values.iter().enumerate() {
        let v = vectors.column(c);
        let residual = (&op.matrix * v - v * Complex64::new(lambda, 0.0)).norm();
        if residual > RESIDUAL_TOL * scale {
            return Err(Error::Numerical(format!("eigenpair {c} residual {residual:e}")));
        }
    }
    Ok(Eigensystem { values, vectors })
}

/// `exp(-i H t)` through the spectral decomposition of `H`.
pub fn exact_propagator(op: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let eig = exact_eigensolve(op)?;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&e| Complex64::new(0.0, -e * t).exp()),
    ));
    let u = &eig.vectors * phases * eig.vectors.adjoint();
    Ok(DenseOperator { space: op.space, matrix: u })
}

/// Matrix of a linear map given as an in-place action on amplitudes.
pub fn lift_to_matrix<F>(space: &DeterminantSpace, cap: usize, mut action: F) -> Result<DenseOperator>
where
    F: FnMut(&mut [Complex64]),
{
    let dim = check_cap(space, cap)?;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        action(&mut col);
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    Ok(DenseOperator { space: *space, matrix: m })
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().iter().fold(0.0, |a, &s| a.max(s))
}

/// `‖W^r - exp(-iHt)‖₂` where `W` is one Trotter step with the offset applied
/// as a phase.
pub fn trotter_error(ham: &ClassifiedHamiltonian<f64>, cfg: &TrotterConfig, cap: usize) -> Result<f64> {
    let space = ham.space()?;
    let dense = build_dense_hamiltonian(ham, &space, cap)?;
    let exact = exact_propagator(&dense, cfg.t)?;
    let engine = TrotterEngine::new(ham, TrotterConfig { offset: OffsetPolicy::Applied, ..*cfg })?;
    let trotter = lift_to_matrix(&space, cap, |amps| {
        for _ in 0..cfg.r {
            StepOperator::<f64>::apply(&engine, amps);
        }
    })?;
    Ok(operator_norm(&(trotter.matrix - exact.matrix)))
}

/// A dense unitary used as the QPE step, e.g. an exact propagator.
#[derive(Debug, Clone)]
pub struct DenseStep(pub DenseOperator);

impl StepOperator<f64> for DenseStep {
    fn space(&self) -> DeterminantSpace {
        self.0.space
    }

    fn apply(&self, amps: &mut [Complex64]) {
        let v = DVector::from_column_slice(amps);
        amps.copy_from_slice((&self.0.matrix * v).as_slice());
    }
}
