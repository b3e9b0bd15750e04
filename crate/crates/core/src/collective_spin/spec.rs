use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use super::operator::{build_any_parity, CollectiveOperator};

/// Generator appearing as a factor in an [`OperatorSpec`] monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// `coeff · F₁ F₂ … F_k`, factors written left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub factors: Vec<SpinAxis>,
}

/// A polynomial in the collective spin operators, evaluated lazily for any N.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorSpec {
    terms: Vec<Monomial>,
}

impl OperatorSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::monomial(C64::new(1.0, 0.0), vec![])
    }

    pub fn axis(axis: SpinAxis) -> Self {
        Self::monomial(C64::new(1.0, 0.0), vec![axis])
    }

    pub fn jx() -> Self {
        Self::axis(SpinAxis::X)
    }

    pub fn jy() -> Self {
        Self::axis(SpinAxis::Y)
    }

    pub fn jz() -> Self {
        Self::axis(SpinAxis::Z)
    }

    pub fn monomial(coeff: C64, factors: Vec<SpinAxis>) -> Self {
        Self {
            terms: vec![Monomial { coeff, factors }],
        }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn scale(mut self, c: C64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coeff *= c);
        self
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| &acc * self)
    }

    /// [self, rhs].
    pub fn commutator(&self, rhs: &Self) -> Self {
        &(self * rhs) - &(rhs * self)
    }

    /// Hermitian adjoint (J_x, J_y, J_z self-adjoint, J_± swapped).
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial {
                coeff: t.coeff.conj(),
                factors: t
                    .factors
                    .iter()
                    .rev()
                    .map(|f| match f {
                        SpinAxis::Plus => SpinAxis::Minus,
                        SpinAxis::Minus => SpinAxis::Plus,
                        other => *other,
                    })
                    .collect(),
            })
            .collect();
        Self { terms }
    }

    /// Applies the polynomial to an amplitude vector of N spins.
    pub fn apply(&self, n_spins: usize, v: &[C64]) -> Vec<C64> {
        let ops = build_any_parity(n_spins);
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for t in &self.terms {
            let mut w = v.to_vec();
            for f in t.factors.iter().rev() {
                w = select(&ops, *f).apply(&w);
            }
            for (o, x) in out.iter_mut().zip(&w) {
                *o += t.coeff * x;
            }
        }
        out
    }

    /// Explicit (N+1)×(N+1) matrix, built from operator products.
    pub fn to_matrix(&self, n_spins: usize) -> CollectiveOperator {
        let ops = build_any_parity(n_spins);
        let dim = n_spins + 1;
        let mut acc = nalgebra::DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for t in &self.terms {
            let mut m = nalgebra::DMatrix::<C64>::identity(dim, dim);
            for f in &t.factors {
                m *= select(&ops, *f).to_dense();
            }
            acc += m * t.coeff;
        }
        CollectiveOperator::Dense { n_spins, matrix: acc }
    }
}

fn select(ops: &super::operator::CollectiveOperators, axis: SpinAxis) -> &CollectiveOperator {
    match axis {
        SpinAxis::X => &ops.jx,
        SpinAxis::Y => &ops.jy,
        SpinAxis::Z => &ops.jz,
        SpinAxis::Plus => &ops.jplus,
        SpinAxis::Minus => &ops.jminus,
    }
}

impl Mul for &OperatorSpec {
    type Output = OperatorSpec;

    fn mul(self, rhs: &OperatorSpec) -> OperatorSpec {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut factors = a.factors.clone();
                factors.extend_from_slice(&b.factors);
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        OperatorSpec { terms }
    }
}

impl Mul for OperatorSpec {
    type Output = OperatorSpec;

    fn mul(self, rhs: OperatorSpec) -> OperatorSpec {
        &self * &rhs
    }
}

impl Add for &OperatorSpec {
    type Output = OperatorSpec;

    fn add(self, rhs: &OperatorSpec) -> OperatorSpec {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        OperatorSpec { terms }
    }
}

impl Add for OperatorSpec {
    type Output = OperatorSpec;

    fn add(self, rhs: OperatorSpec) -> OperatorSpec {
        &self + &rhs
    }
}

impl Neg for OperatorSpec {
    type Output = OperatorSpec;

    fn neg(self) -> OperatorSpec {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for &OperatorSpec {
    type Output = OperatorSpec;

    fn sub(self, rhs: &OperatorSpec) -> OperatorSpec {
        self + &(-rhs.clone())
    }
}

impl Sub for OperatorSpec {
    type Output = OperatorSpec;

    fn sub(self, rhs: OperatorSpec) -> OperatorSpec {
        &self - &rhs
    }
}
