use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::operator::{ladder_coefficient, CollectiveOperator};
use super::state::{mz_of_index, CollectiveState};

/// Cached spectral decomposition for rotations about the y axis.
///
/// J_x is real symmetric tridiagonal in the Dicke basis, so J_x = V Λ Vᵀ with
/// real V. With R = e^{−iπ/2·J_z} we have J_y = R J_x R†, hence
/// e^{−iθJ_y} = R V e^{−iθΛ} Vᵀ R†. Build once per N; each application is
/// O(N²).
#[derive(Debug, Clone)]
pub struct YRotation {
    n_spins: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    /// diagonal of R = e^{−iπ/2·J_z}
    frame: Vec<C64>,
}

impl YRotation {
    pub fn new(n_spins: usize) -> Self {
        let dim = n_spins + 1;
        let mut jx = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..n_spins {
            let c = 0.5 * ladder_coefficient(n_spins, i);
            jx[(i + 1, i)] = c;
            jx[(i, i + 1)] = c;
        }
        let eig = SymmetricEigen::new(jx);
        let frame = (0..dim)
            .map(|i| C64::from_polar(1.0, -0.5 * std::f64::consts::PI * mz_of_index(n_spins, i)))
            .collect();
        Self {
            n_spins,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            frame,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Applies R V f(Λ) Vᵀ R† to `v`.
    fn apply_spectral(&self, v: &[C64], f: impl Fn(f64) -> C64) -> Vec<C64> {
        let dim = self.n_spins + 1;
        assert_eq!(v.len(), dim, "dimension mismatch");
        let w: Vec<C64> = v.iter().zip(&self.frame).map(|(a, r)| a * r.conj()).collect();
        let vecs = &self.eigenvectors;
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let col = vecs.column(k);
            let dot: C64 = col.iter().zip(&w).map(|(x, y)| y * *x).sum();
            *c = dot * f(self.eigenvalues[k]);
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (k, c) in coeffs.iter().enumerate() {
            let col = vecs.column(k);
            for (o, x) in out.iter_mut().zip(col.iter()) {
                *o += c * *x;
            }
        }
        out.iter_mut().zip(&self.frame).for_each(|(o, r)| *o *= r);
        out
    }

    /// e^{−iθJ_y}|ψ⟩.
    pub fn rotate(&self, state: &CollectiveState, theta: f64) -> CollectiveState {
        assert_eq!(state.n_spins(), self.n_spins, "spin number mismatch");
        let out = self.apply_spectral(state.amplitudes(), |l| C64::from_polar(1.0, -theta * l));
        CollectiveState::from_raw(self.n_spins, out)
    }

    /// (e^{−iθJ_y} + e^{iθJ_y})/2 applied to a raw vector (not renormalized).
    pub fn average_raw(&self, v: &[C64], theta: f64) -> Vec<C64> {
        self.apply_spectral(v, |l| C64::new((theta * l).cos(), 0.0))
    }

    /// Dense matrix of f(J_y) for f(λ) given on the spectrum.
    fn dense(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let dim = self.n_spins + 1;
        let vecs = self.eigenvectors.map(|x| C64::new(x, 0.0));
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, self.eigenvalues.iter().map(|&l| f(l))));
        let r = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.frame));
        &r * &vecs * diag * vecs.transpose() * r.adjoint()
    }

    /// e^{−iθJ_y} as an explicit matrix.
    pub fn matrix(&self, theta: f64) -> CollectiveOperator {
        CollectiveOperator::Dense {
            n_spins: self.n_spins,
            matrix: self.dense(|l| C64::from_polar(1.0, -theta * l)),
        }
    }

    /// (e^{−iθJ_y} + e^{iθJ_y})/2 as an explicit matrix.
    pub fn average_matrix(&self, theta: f64) -> CollectiveOperator {
        CollectiveOperator::Dense {
            n_spins: self.n_spins,
            matrix: self.dense(|l| C64::new((theta * l).cos(), 0.0)),
        }
    }
}
