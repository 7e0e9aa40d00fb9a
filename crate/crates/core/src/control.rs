//! Feedback laws: the Lyapunov tracking controller, the open-loop geometric
//! switch, and the diagnostics that go with them.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics;
use crate::linalg::{commutator, CMat, LinalgError};
use crate::model::HamiltonianPair;
use crate::scalar::{c, Real};
use crate::state::Density;

/// Largest imaginary part tolerated in the feedback trace before the inputs are
/// declared inconsistent.
pub const FIELD_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("gain kappa must be positive, got {0}")]
    NonPositiveGain(f64),
    #[error("switch time t0 must be non-negative, got {0}")]
    NegativeSwitchTime(f64),
    #[error("feedback trace has imaginary part {imag:.3e}; H1 or the states are not Hermitian")]
    ComplexField { imag: f64 },
    #[error("control law is not a Lyapunov law")]
    NotLyapunov,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<R: Real>(self) -> R {
        match self {
            Sign::Plus => R::one(),
            Sign::Minus => -R::one(),
        }
    }
}

/// How the control amplitude `f(t)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ControlLaw<R: Real> {
    /// `f = sign · κ · Tr(ρ_d [−iH₁, ρ])`
    Lyapunov { kappa: R, sign: Sign },
    /// `f = 1` on `[0, t0)` and `0` afterwards.
    Geometric { t0: R },
    /// Free drift.
    None,
}

impl<R: Real> ControlLaw<R> {
    pub fn lyapunov(kappa: R, sign: Sign) -> Result<Self, ControlError> {
        if !(kappa > R::zero()) || !kappa.is_finite() {
            return Err(ControlError::NonPositiveGain(kappa.to_f64_lossy()));
        }
        Ok(ControlLaw::Lyapunov { kappa, sign })
    }

    pub fn geometric(t0: R) -> Result<Self, ControlError> {
        if !(t0 >= R::zero()) {
            return Err(ControlError::NegativeSwitchTime(t0.to_f64_lossy()));
        }
        Ok(ControlLaw::Geometric { t0 })
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        match *self {
            ControlLaw::Lyapunov { kappa, sign } => Self::lyapunov(kappa, sign).map(|_| ()),
            ControlLaw::Geometric { t0 } => Self::geometric(t0).map(|_| ()),
            ControlLaw::None => Ok(()),
        }
    }

    pub fn is_lyapunov(&self) -> bool {
        matches!(self, ControlLaw::Lyapunov { .. })
    }

    /// Control amplitude at time `t` for the current pair of states.
    pub fn field(&self, t: R, rho: &CMat<R>, rho_d: &CMat<R>, h1: &CMat<R>) -> Result<R, ControlError> {
        match *self {
            ControlLaw::Lyapunov { kappa, sign } => {
                Ok(sign.value::<R>() * kappa * feedback_trace(rho, rho_d, h1)?)
            }
            ControlLaw::Geometric { t0 } => Ok(geometric_field(t, t0)),
            ControlLaw::None => Ok(R::zero()),
        }
    }
}

impl<R: Real> fmt::Display for ControlLaw<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlLaw::Lyapunov { kappa, sign } => write!(
                f,
                "lyapunov(kappa={kappa}, sign={})",
                if *sign == Sign::Plus { "+" } else { "-" }
            ),
            ControlLaw::Geometric { t0 } => write!(f, "geometric(t0={t0})"),
            ControlLaw::None => f.write_str("none"),
        }
    }
}

/// `½ Tr[(ρ − ρ_d)²]`
pub fn lyapunov_value<R: Real>(rho: &Density<R>, rho_d: &Density<R>) -> R {
    lyapunov_value_raw(rho.mat(), rho_d.mat())
}

pub(crate) fn lyapunov_value_raw<R: Real>(rho: &CMat<R>, rho_d: &CMat<R>) -> R {
    (rho - rho_d).hs_norm_sqr() * R::lit(0.5)
}

/// `Tr(ρ_d [−iH₁, ρ])`, checked to be real.
pub(crate) fn feedback_trace<R: Real>(rho: &CMat<R>, rho_d: &CMat<R>, h1: &CMat<R>) -> Result<R, ControlError> {
    let comm = commutator(h1, rho)?.scale(c(R::zero(), -R::one()));
    let n = rho.dim();
    // Tr(A·B) without forming the product.
    let mut tr = num_complex::Complex::<R>::zero();
    for i in 0..n {
        for k in 0..n {
            tr += rho_d[(i, k)] * comm[(k, i)];
        }
    }
    let scale = R::one().max(h1.hs_norm());
    if tr.im.abs() > R::loosen(FIELD_IMAG_TOL) * scale {
        return Err(ControlError::ComplexField {
            imag: tr.im.to_f64_lossy(),
        });
    }
    Ok(tr.re)
}

/// Lyapunov feedback amplitude `sign · κ · Tr(ρ_d [−iH₁, ρ])`.
pub fn control_field<R: Real>(
    rho: &Density<R>,
    rho_d: &Density<R>,
    h1: &CMat<R>,
    kappa: R,
    sign: Sign,
) -> Result<R, ControlError> {
    if !(kappa > R::zero()) {
        return Err(ControlError::NonPositiveGain(kappa.to_f64_lossy()));
    }
    Ok(sign.value::<R>() * kappa * feedback_trace(rho.mat(), rho_d.mat(), h1)?)
}

/// `κ · ‖i[ρ, ρ_d]‖ · ‖H₁‖`, an upper bound on `|f|`.
pub fn f_bound<R: Real>(rho: &Density<R>, rho_d: &Density<R>, h1: &CMat<R>, kappa: R) -> R {
    f_bound_raw(rho.mat(), rho_d.mat(), h1, kappa)
}

pub(crate) fn f_bound_raw<R: Real>(rho: &CMat<R>, rho_d: &CMat<R>, h1: &CMat<R>, kappa: R) -> R {
    let comm = &rho.matmul(rho_d) - &rho_d.matmul(rho);
    kappa * comm.hs_norm() * h1.hs_norm()
}

/// Switch multiplier of the geometric scheme: on for `t < t0`, off from `t0`.
pub fn geometric_field<R: Real>(t: R, t0: R) -> R {
    if t < t0 {
        R::one()
    } else {
        R::zero()
    }
}

/// Analytic and finite-difference rates of change of the Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdotCheck<R: Real> {
    /// `−f · Tr(ρ_d [−iH₁, ρ])`, which is `−κ T²` for `f = κT`.
    pub analytic: R,
    /// Central difference of `V` along the closed-loop flow.
    pub numeric: R,
    pub field: R,
}

impl<R: Real> VdotCheck<R> {
    /// `|analytic − numeric| ≤ max(abs_tol, rel_tol·|analytic|)`
    pub fn agrees(&self, abs_tol: R, rel_tol: R) -> bool {
        (self.analytic - self.numeric).abs() <= abs_tol.max(rel_tol * self.analytic.abs())
    }
}

/// Compares the closed-form descent rate with a central finite difference
/// taken along the closed-loop trajectory through `(ρ, ρ_d)`.
pub fn vdot_identity_check<R: Real>(
    rho: &Density<R>,
    rho_d: &Density<R>,
    h: &HamiltonianPair<R>,
    law: &ControlLaw<R>,
) -> Result<VdotCheck<R>, ControlError> {
    if !law.is_lyapunov() {
        return Err(ControlError::NotLyapunov);
    }
    let trace = feedback_trace(rho.mat(), rho_d.mat(), &h.h1)?;
    let field = law.field(R::zero(), rho.mat(), rho_d.mat(), &h.h1)?;
    let analytic = -field * trace;

    let delta = R::lit(1e-4).max(R::epsilon().cbrt());
    let v_at = |dt: R| -> Result<R, ControlError> {
        let (r, d) = dynamics::rk4_closed_loop(h, law, rho.mat(), rho_d.mat(), dt, 4)?;
        Ok(lyapunov_value_raw(&r, &d))
    };
    let numeric = (v_at(delta)? - v_at(-delta)?) / (R::lit(2.0) * delta);
    Ok(VdotCheck {
        analytic,
        numeric,
        field,
    })
}
