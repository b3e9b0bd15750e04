use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::state::{check_even, mz_of_index};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Operator on the (N+1)-dimensional symmetric subspace, in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub enum CollectiveOperator {
    /// Functions of J_z.
    Diagonal { n_spins: usize, diag: Vec<C64> },
    /// Nearest-neighbour couplings (J_x, J_y, J_±). `lower[i]` is entry
    /// (i+1, i), `upper[i]` is entry (i, i+1).
    Tridiagonal {
        n_spins: usize,
        lower: Vec<C64>,
        diag: Vec<C64>,
        upper: Vec<C64>,
    },
    Dense { n_spins: usize, matrix: DMatrix<C64> },
}

/// The five collective operators for a fixed N.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub jx: CollectiveOperator,
    pub jy: CollectiveOperator,
    pub jz: CollectiveOperator,
    pub jplus: CollectiveOperator,
    pub jminus: CollectiveOperator,
}

/// √(J(J+1) − m(m+1)), the J_+ matrix element ⟨m+1|J_+|m⟩.
pub fn ladder_coefficient(n_spins: usize, index: usize) -> f64 {
    let j = n_spins as f64 / 2.0;
    let m = mz_of_index(n_spins, index);
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// J_x, J_y, J_z, J_+, J_− for even N ≥ 2.
pub fn build_collective_operators(n_spins: usize) -> Result<CollectiveOperators> {
    check_even(n_spins)?;
    Ok(build_any_parity(n_spins))
}

pub(crate) fn build_any_parity(n_spins: usize) -> CollectiveOperators {
    let dim = n_spins + 1;
    let ladder: Vec<f64> = (0..n_spins).map(|i| ladder_coefficient(n_spins, i)).collect();
    let zeros = vec![ZERO; dim];
    let zeros_off = vec![ZERO; n_spins];
    let re = |v: f64| C64::new(v, 0.0);

    let jz = CollectiveOperator::Diagonal {
        n_spins,
        diag: (0..dim).map(|i| re(mz_of_index(n_spins, i))).collect(),
    };
    let jplus = CollectiveOperator::Tridiagonal {
        n_spins,
        lower: ladder.iter().map(|&c| re(c)).collect(),
        diag: zeros.clone(),
        upper: zeros_off.clone(),
    };
    let jminus = CollectiveOperator::Tridiagonal {
        n_spins,
        lower: zeros_off,
        diag: zeros.clone(),
        upper: ladder.iter().map(|&c| re(c)).collect(),
    };
    // J_x = (J_+ + J_−)/2, J_y = (J_+ − J_−)/(2i).
    let jx = CollectiveOperator::Tridiagonal {
        n_spins,
        lower: ladder.iter().map(|&c| re(0.5 * c)).collect(),
        diag: zeros.clone(),
        upper: ladder.iter().map(|&c| re(0.5 * c)).collect(),
    };
    let jy = CollectiveOperator::Tridiagonal {
        n_spins,
        lower: ladder.iter().map(|&c| C64::new(0.0, -0.5 * c)).collect(),
        diag: zeros,
        upper: ladder.iter().map(|&c| C64::new(0.0, 0.5 * c)).collect(),
    };
    CollectiveOperators {
        jx,
        jy,
        jz,
        jplus,
        jminus,
    }
}

impl CollectiveOperator {
    pub fn identity(n_spins: usize) -> Self {
        Self::Diagonal {
            n_spins,
            diag: vec![C64::new(1.0, 0.0); n_spins + 1],
        }
    }

    pub fn n_spins(&self) -> usize {
        match self {
            Self::Diagonal { n_spins, .. } | Self::Tridiagonal { n_spins, .. } | Self::Dense { n_spins, .. } => *n_spins,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_spins() + 1
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.dim());
        match self {
            Self::Diagonal { diag, .. } => diag.iter().zip(v).map(|(d, x)| d * x).collect(),
            Self::Tridiagonal {
                lower, diag, upper, ..
            } => {
                let n = v.len();
                let mut out: Vec<C64> = diag.iter().zip(v).map(|(d, x)| d * x).collect();
                for i in 0..n - 1 {
                    out[i + 1] += lower[i] * v[i];
                    out[i] += upper[i] * v[i + 1];
                }
                out
            }
            Self::Dense { matrix, .. } => {
                let x = nalgebra::DVector::from_column_slice(v);
                (matrix * x).as_slice().to_vec()
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        match self {
            Self::Diagonal { diag, .. } => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)),
            Self::Tridiagonal {
                lower, diag, upper, ..
            } => {
                let mut m = DMatrix::from_element(dim, dim, ZERO);
                for i in 0..dim {
                    m[(i, i)] = diag[i];
                }
                for i in 0..dim - 1 {
                    m[(i + 1, i)] = lower[i];
                    m[(i, i + 1)] = upper[i];
                }
                m
            }
            Self::Dense { matrix, .. } => matrix.clone(),
        }
    }

    pub fn into_dense(self) -> Self {
        let n_spins = self.n_spins();
        Self::Dense {
            n_spins,
            matrix: self.to_dense(),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Self::Diagonal { n_spins, diag } => Self::Diagonal {
                n_spins: *n_spins,
                diag: diag.iter().map(|d| d.conj()).collect(),
            },
            Self::Tridiagonal {
                n_spins,
                lower,
                diag,
                upper,
            } => Self::Tridiagonal {
                n_spins: *n_spins,
                lower: upper.iter().map(|d| d.conj()).collect(),
                diag: diag.iter().map(|d| d.conj()).collect(),
                upper: lower.iter().map(|d| d.conj()).collect(),
            },
            Self::Dense { n_spins, matrix } => Self::Dense {
                n_spins: *n_spins,
                matrix: matrix.adjoint(),
            },
        }
    }

    /// Operator product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_dim(rhs)?;
        let n_spins = self.n_spins();
        if let (Self::Diagonal { diag: a, .. }, Self::Diagonal { diag: b, .. }) = (self, rhs) {
            return Ok(Self::Diagonal {
                n_spins,
                diag: a.iter().zip(b).map(|(x, y)| x * y).collect(),
            });
        }
        Ok(Self::Dense {
            n_spins,
            matrix: self.to_dense() * rhs.to_dense(),
        })
    }

    /// `a·self + b·rhs`.
    pub fn linear_combination(&self, a: C64, rhs: &Self, b: C64) -> Result<Self> {
        self.check_same_dim(rhs)?;
        let n_spins = self.n_spins();
        if let (Self::Diagonal { diag: x, .. }, Self::Diagonal { diag: y, .. }) = (self, rhs) {
            return Ok(Self::Diagonal {
                n_spins,
                diag: x.iter().zip(y).map(|(p, q)| a * p + b * q).collect(),
            });
        }
        Ok(Self::Dense {
            n_spins,
            matrix: self.to_dense() * a + rhs.to_dense() * b,
        })
    }

    /// [self, rhs].
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        let ab = self.matmul(rhs)?;
        let ba = rhs.matmul(self)?;
        ab.linear_combination(C64::new(1.0, 0.0), &ba, C64::new(-1.0, 0.0))
    }

    /// Largest entry magnitude of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        self.check_same_dim(rhs)?;
        let d = self.to_dense() - rhs.to_dense();
        Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Largest entry magnitude of `self − self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.to_dense();
        let d = &m - m.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self†·self − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.to_dense();
        let d = m.adjoint() * &m - DMatrix::identity(self.dim(), self.dim());
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.dim(),
            });
        }
        Ok(())
    }
}
