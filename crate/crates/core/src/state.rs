//! Validated quantum states: pure state vectors and density matrices.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{eigh, CMat, LinalgError};
use crate::scalar::{c, Real, C};

/// Hermiticity tolerance for a freshly constructed density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for a freshly constructed density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue.
pub const PSD_TOL: f64 = 1e-10;
/// Norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("state vector is zero")]
    Zero,
    #[error("density matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("density matrix has negative eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket<R: Real> {
    amps: Vec<C<R>>,
}

impl<R: Real> Ket<R> {
    pub fn new(amps: Vec<C<R>>) -> Result<Self, StateError> {
        let norm = norm(&amps);
        if (norm - R::one()).abs() > R::loosen(NORM_TOL) {
            return Err(StateError::NotNormalized {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C<R>>) -> Result<Self, StateError> {
        let norm = norm(&amps);
        if norm <= R::min_positive_value() {
            return Err(StateError::Zero);
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C::zero(); dim];
        amps[index] = C::one();
        Self { amps }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self, StateError> {
        Self::new(amps.iter().map(|&a| c(R::lit(a), R::zero())).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<R>] {
        &self.amps
    }

    /// Expresses the state in another basis given the change-of-basis unitary.
    pub fn transformed(&self, u: &CMat<R>) -> Self {
        Self {
            amps: u.apply(&self.amps),
        }
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn outer(&self) -> Density<R> {
        let n = self.amps.len();
        Density {
            mat: CMat::from_fn(n, |i, j| self.amps[i] * self.amps[j].conj()),
        }
    }
}

fn norm<R: Real>(amps: &[C<R>]) -> R {
    amps.iter().map(|a| a.norm_sqr()).sum::<R>().sqrt()
}

/// `|v⟩⟨v|`
pub fn outer<R: Real>(v: &Ket<R>) -> Density<R> {
    v.outer()
}

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// [`Density::new`] enforces the invariants. States produced by numerical
/// integration are wrapped with [`Density::new_unchecked`] and their drift is
/// monitored by the caller instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<R: Real> {
    mat: CMat<R>,
}

impl<R: Real> Density<R> {
    pub fn new(mat: CMat<R>) -> Result<Self, StateError> {
        let dev = mat.hermiticity_error();
        if dev > R::loosen(HERMITIAN_TOL) {
            return Err(StateError::NotHermitian {
                deviation: dev.to_f64_lossy(),
            });
        }
        let tr = mat.trace();
        if (tr - C::one()).norm() > R::loosen(TRACE_TOL) {
            return Err(StateError::BadTrace {
                trace: tr.re.to_f64_lossy(),
            });
        }
        let min = eigh(&mat)?.values[0];
        if min < -R::loosen(PSD_TOL) {
            return Err(StateError::NotPositive {
                min_eigenvalue: min.to_f64_lossy(),
            });
        }
        Ok(Self { mat })
    }

    pub fn new_unchecked(mat: CMat<R>) -> Self {
        Self { mat }
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim).scale_re(R::one() / R::from_usize(dim).unwrap()),
        }
    }

    pub fn mat(&self) -> &CMat<R> {
        &self.mat
    }

    pub fn into_mat(self) -> CMat<R> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn trace_error(&self) -> R {
        (self.mat.trace() - C::one()).norm()
    }

    pub fn hermiticity_error(&self) -> R {
        self.mat.hermiticity_error()
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> R {
        self.mat.matmul(&self.mat).trace().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<R>, StateError> {
        Ok(eigh(&self.mat)?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<R, StateError> {
        Ok(self.eigenvalues()?[0])
    }

    /// `u ρ u†`: the same state in the basis reached by `u`.
    pub fn transformed(&self, u: &CMat<R>) -> Self {
        Self {
            mat: self.mat.conjugate_by(u),
        }
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Self, w: R) -> Result<Self, StateError> {
        if self.dim() != other.dim() {
            return Err(StateError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let mut m = self.mat.scale_re(w);
        m.axpy(c(R::one() - w, R::zero()), &other.mat);
        Ok(Self { mat: m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outer_examples() {
        let zero = Ket::<f64>::basis(2, 0);
        let p = outer(&zero);
        assert_eq!(p.mat(), &CMat::real_diag(&[1.0, 0.0]));

        let h = 0.5f64.sqrt();
        let plus = Ket::<f64>::from_real(&[h, h]).unwrap();
        let p = outer(&plus);
        let expected = CMat::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(p.mat().distance(&expected) < 1e-15);

        let e1 = Ket::<f64>::basis(4, 1).outer();
        assert_eq!(e1.mat()[(1, 1)], C::one());
        assert!((e1.mat().hs_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ket_requires_unit_norm() {
        assert!(matches!(
            Ket::<f64>::from_real(&[1.0, 1.0]),
            Err(StateError::NotNormalized { .. })
        ));
        let k = Ket::<f64>::normalized(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((k.amplitudes()[1] - c(0.0, 0.8)).norm() < 1e-15);
        assert_eq!(Ket::<f64>::normalized(vec![C::zero(); 2]), Err(StateError::Zero));
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            Density::new(CMat::<f64>::real_diag(&[0.5, 0.4])),
            Err(StateError::BadTrace { .. })
        ));
        assert!(matches!(
            Density::new(CMat::<f64>::real_diag(&[1.5, -0.5])),
            Err(StateError::NotPositive { .. })
        ));
        let skew = CMat::<f64>::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c(0.5, 0.0),
            (0, 1) => c(0.1, 0.0),
            _ => c(0.2, 0.0),
        });
        assert!(matches!(Density::new(skew), Err(StateError::NotHermitian { .. })));
        let ok = Density::new(CMat::<f64>::real_diag(&[0.25, 0.75])).unwrap();
        assert!((ok.purity() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn density_eigenvalues_sum_to_one() {
        let h = 0.5f64.sqrt();
        let a = Ket::<f64>::from_real(&[h, 0.0, 0.0, h]).unwrap().outer();
        let b = Ket::<f64>::basis(4, 2).outer();
        let rho = a.mix(&b, 0.3).unwrap();
        let s: f64 = rho.eigenvalues().unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
