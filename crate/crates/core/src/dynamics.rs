//! Closed-loop Liouville dynamics for the controlled state and its target.
//!
//! The controlled state obeys `ρ̇ = −i[H₀ + f·H₁, ρ]` and the target drifts
//! freely, `ρ̇_d = −i[H₀, ρ_d]`. With a feedback law, `f` is a function of the
//! pair, so the two equations are integrated together as one autonomous system
//! and `f` is re-evaluated at every Runge–Kutta stage.
//!
//! The integrator is a Dormand–Prince 5(4) pair with step-size control. The
//! density-matrix invariants are monitored at every output sample, never
//! enforced.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{f_bound_raw, lyapunov_value_raw, ControlError, ControlLaw};
use crate::linalg::{unitary_propagator, CMat, LinalgError};
use crate::metrics;
use crate::model::{subspace_populations, HamiltonianPair, ModelParams, Paradigm};
use crate::scalar::{c, Real, C};
use crate::state::Density;

/// Per-sample trace tolerance.
pub const TRACE_DRIFT_TOL: f64 = 1e-9;
/// Per-sample Hermiticity tolerance.
pub const HERMITIAN_DRIFT_TOL: f64 = 1e-9;
/// Per-sample purity drift tolerance.
pub const PURITY_DRIFT_TOL: f64 = 1e-6;
/// Smallest eigenvalue admitted along a trajectory.
pub const EIGEN_DRIFT_TOL: f64 = 1e-8;
/// A run aborts once an invariant drifts past this multiple of its tolerance.
pub const ABORT_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    BadConfig(String),
    #[error("dimension mismatch between Hamiltonians ({ham}) and states ({state})")]
    DimensionMismatch { ham: usize, state: usize },
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("invariant `{what}` violated at t = {t}: {value:.3e} exceeds {limit:.3e}")]
    InvariantViolation {
        what: &'static str,
        t: f64,
        value: f64,
        limit: f64,
    },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Step-size and sampling parameters. Times are in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<R: Real> {
    /// Initial step.
    pub dt: R,
    pub t_max: R,
    pub rel_tol: R,
    pub abs_tol: R,
    /// Spacing of output samples.
    pub sample_every: R,
    /// Stop once `V` falls below this value.
    pub v_stop: Option<R>,
    pub max_steps: usize,
}

impl<R: Real> Default for IntegratorConfig<R> {
    fn default() -> Self {
        Self {
            dt: R::lit(0.01),
            t_max: R::lit(300.0),
            rel_tol: R::lit(1e-11),
            abs_tol: R::lit(1e-13),
            sample_every: R::lit(0.1),
            v_stop: None,
            max_steps: 10_000_000,
        }
    }
}

impl<R: Real> IntegratorConfig<R> {
    pub fn with_horizon(t_max: R) -> Self {
        Self {
            t_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let pos = |x: R| x > R::zero() && x.is_finite();
        let checks = [
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("sample_every", self.sample_every),
        ];
        for (name, v) in checks {
            if !pos(v) {
                return Err(IntegrateError::BadConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(IntegrateError::BadConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Controlled state and target at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState<R: Real> {
    pub t: R,
    pub rho: Density<R>,
    pub rho_d: Density<R>,
    pub f: R,
}

/// One output row of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<R: Real> {
    pub t: R,
    pub rho: Density<R>,
    pub rho_d: Density<R>,
    pub f: R,
    /// Lyapunov function `½‖ρ − ρ_d‖²`.
    pub v: R,
    pub concurrence: R,
    /// `Tr(ρ ρ_d)`
    pub fidelity: R,
    /// Population of `span{|++⟩, |−−⟩}`.
    pub p_s: R,
    pub purity: R,
    /// `κ‖i[ρ,ρ_d]‖‖H₁‖` for Lyapunov laws, zero otherwise.
    pub f_bound: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta<R: Real> {
    pub params: Option<ModelParams<R>>,
    pub paradigm: Option<Paradigm>,
    pub law: ControlLaw<R>,
    pub config: IntegratorConfig<R>,
    pub basis: crate::model::Basis,
    pub reduced: bool,
    /// Lyapunov run whose field vanished identically although `ρ ≠ ρ_d`.
    pub stalled: bool,
    /// Largest `‖f·H₁‖ / ‖H₀‖` seen at the samples.
    pub max_control_ratio: R,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub seed: Option<u64>,
}

/// Time-ordered samples plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<R: Real> {
    pub samples: Vec<Sample<R>>,
    pub meta: TrajectoryMeta<R>,
}

impl<R: Real> Trajectory<R> {
    pub fn times(&self) -> Vec<R> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<R> {
        self.samples.iter().map(|s| s.v).collect()
    }

    pub fn concurrences(&self) -> Vec<R> {
        self.samples.iter().map(|s| s.concurrence).collect()
    }

    pub fn last(&self) -> &Sample<R> {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn first(&self) -> &Sample<R> {
        &self.samples[0]
    }

    /// Sample closest in time to `t`.
    pub fn at(&self, t: R) -> &Sample<R> {
        self.samples
            .iter()
            .min_by(|a, b| {
                (a.t - t)
                    .abs()
                    .partial_cmp(&(b.t - t).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("trajectory has at least one sample")
    }

    pub fn with_model(mut self, params: ModelParams<R>, paradigm: Paradigm) -> Self {
        self.meta.params = Some(params);
        self.meta.paradigm = Some(paradigm);
        self
    }
}

/// Right-hand side `(−i[H₀+fH₁, ρ], −i[H₀, ρ_d])`.
pub fn rhs<R: Real>(
    h: &HamiltonianPair<R>,
    f: R,
    rho: &Density<R>,
    rho_d: &Density<R>,
) -> Result<(CMat<R>, CMat<R>), IntegrateError> {
    check_dims(h, rho.dim())?;
    check_dims(h, rho_d.dim())?;
    Ok(rhs_raw(h, f, rho.mat(), rho_d.mat()))
}

fn check_dims<R: Real>(h: &HamiltonianPair<R>, dim: usize) -> Result<(), IntegrateError> {
    if h.h0.dim() != dim || h.h1.dim() != dim {
        return Err(IntegrateError::DimensionMismatch {
            ham: h.h0.dim(),
            state: dim,
        });
    }
    Ok(())
}

/// `−i[H, ρ]`
fn liouvillian<R: Real>(ham: &CMat<R>, rho: &CMat<R>) -> CMat<R> {
    let comm = &ham.matmul(rho) - &rho.matmul(ham);
    comm.scale(c(R::zero(), -R::one()))
}

fn rhs_raw<R: Real>(h: &HamiltonianPair<R>, f: R, rho: &CMat<R>, rho_d: &CMat<R>) -> (CMat<R>, CMat<R>) {
    (liouvillian(&h.total(f), rho), liouvillian(&h.h0, rho_d))
}

#[derive(Clone)]
struct Pair<R: Real> {
    rho: CMat<R>,
    rho_d: CMat<R>,
}

impl<R: Real> Pair<R> {
    fn plus(&self, terms: &[(R, &Pair<R>)]) -> Pair<R> {
        let mut out = self.clone();
        for (w, k) in terms {
            if w.is_zero() {
                continue;
            }
            let w = c(*w, R::zero());
            out.rho.axpy(w, &k.rho);
            out.rho_d.axpy(w, &k.rho_d);
        }
        out
    }
}

struct ClosedLoop<'a, R: Real> {
    h: &'a HamiltonianPair<R>,
    law: &'a ControlLaw<R>,
}

impl<R: Real> ClosedLoop<'_, R> {
    /// Derivative at a stage; `t_switch` is the time used for the geometric switch.
    fn eval(&self, t_switch: R, y: &Pair<R>) -> Result<(Pair<R>, R), ControlError> {
        let f = self.law.field(t_switch, &y.rho, &y.rho_d, &self.h.h1)?;
        let (rho, rho_d) = rhs_raw(self.h, f, &y.rho, &y.rho_d);
        Ok((Pair { rho, rho_d }, f))
    }
}

/// Classic RK4 on the closed loop with `substeps` equal steps spanning `dt`
/// (which may be negative). Used by finite-difference checks.
pub(crate) fn rk4_closed_loop<R: Real>(
    h: &HamiltonianPair<R>,
    law: &ControlLaw<R>,
    rho: &CMat<R>,
    rho_d: &CMat<R>,
    dt: R,
    substeps: usize,
) -> Result<(CMat<R>, CMat<R>), ControlError> {
    let sys = ClosedLoop { h, law };
    let mut y = Pair {
        rho: rho.clone(),
        rho_d: rho_d.clone(),
    };
    let step = dt / R::from_usize(substeps).unwrap();
    let half = step * R::lit(0.5);
    for _ in 0..substeps {
        let (k1, _) = sys.eval(R::zero(), &y)?;
        let (k2, _) = sys.eval(R::zero(), &y.plus(&[(half, &k1)]))?;
        let (k3, _) = sys.eval(R::zero(), &y.plus(&[(half, &k2)]))?;
        let (k4, _) = sys.eval(R::zero(), &y.plus(&[(step, &k3)]))?;
        let sixth = step / R::lit(6.0);
        let third = step / R::lit(3.0);
        y = y.plus(&[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)]);
    }
    Ok((y.rho, y.rho_d))
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights equal the last row of A (FSAL); these are fifth minus fourth.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn error_norm<R: Real>(y: &Pair<R>, y_new: &Pair<R>, err: &Pair<R>, rel: R, abs: R) -> R {
    let mut acc = R::zero();
    let mut n = 0usize;
    for (a, b, e) in [(&y.rho, &y_new.rho, &err.rho), (&y.rho_d, &y_new.rho_d, &err.rho_d)] {
        for ((ya, yb), ye) in a.as_slice().iter().zip(b.as_slice()).zip(e.as_slice()) {
            let sc = abs + rel * ya.norm().max(yb.norm());
            acc += (ye.norm() / sc).powi(2);
            n += 1;
        }
    }
    (acc / R::from_usize(n).unwrap()).sqrt()
}

struct Monitor<R: Real> {
    purity0: R,
}

impl<R: Real> Monitor<R> {
    fn check(&self, t: R, rho: &Density<R>) -> Result<(), IntegrateError> {
        let limit = |tol: f64| R::loosen(tol) * R::lit(ABORT_FACTOR);
        let violated = |what: &'static str, value: R, tol: f64| IntegrateError::InvariantViolation {
            what,
            t: t.to_f64_lossy(),
            value: value.to_f64_lossy(),
            limit: limit(tol).to_f64_lossy(),
        };
        let tr = rho.trace_error();
        if !(tr <= limit(TRACE_DRIFT_TOL)) {
            return Err(violated("trace", tr, TRACE_DRIFT_TOL));
        }
        let herm = rho.hermiticity_error();
        if !(herm <= limit(HERMITIAN_DRIFT_TOL)) {
            return Err(violated("hermiticity", herm, HERMITIAN_DRIFT_TOL));
        }
        let pur = (rho.purity() - self.purity0).abs();
        if !(pur <= limit(PURITY_DRIFT_TOL)) {
            return Err(violated("purity", pur, PURITY_DRIFT_TOL));
        }
        Ok(())
    }
}

fn make_sample<R: Real>(
    h: &HamiltonianPair<R>,
    law: &ControlLaw<R>,
    t: R,
    rho: CMat<R>,
    rho_d: CMat<R>,
    f: R,
) -> Sample<R> {
    let rho = Density::new_unchecked(rho);
    let rho_d = Density::new_unchecked(rho_d);
    let v = lyapunov_value_raw(rho.mat(), rho_d.mat());
    let full = if h.reduced {
        crate::model::embed_state(&rho, h.basis)
    } else {
        rho.clone()
    };
    let concurrence = if full.dim() == 4 {
        metrics::concurrence_in(&full, h.basis).unwrap_or_else(|_| R::nan())
    } else {
        R::nan()
    };
    let p_s = if h.reduced {
        rho.mat().trace().re
    } else if rho.dim() == 4 {
        subspace_populations(&rho, h.basis).0
    } else {
        R::nan()
    };
    let fidelity = {
        let n = rho.dim();
        let mut acc = C::<R>::zero();
        for i in 0..n {
            for k in 0..n {
                acc += rho.mat()[(i, k)] * rho_d.mat()[(k, i)];
            }
        }
        acc.re
    };
    let f_bound = match *law {
        ControlLaw::Lyapunov { kappa, .. } => f_bound_raw(rho.mat(), rho_d.mat(), &h.h1, kappa),
        _ => R::zero(),
    };
    Sample {
        t,
        purity: rho.purity(),
        rho,
        rho_d,
        f,
        v,
        concurrence,
        fidelity,
        p_s,
        f_bound,
    }
}

/// Integrates the closed loop from `(ρ₀, ρ_d₀)` over `[0, t_max]`.
///
/// Geometric laws stop at the switch-off time when it falls inside the horizon.
/// Samples are taken on the grid `k · sample_every` plus the final time.
pub fn integrate<R: Real>(
    h: &HamiltonianPair<R>,
    law: &ControlLaw<R>,
    rho0: &Density<R>,
    rho_d0: &Density<R>,
    cfg: &IntegratorConfig<R>,
) -> Result<Trajectory<R>, IntegrateError> {
    cfg.validate()?;
    law.validate()?;
    check_dims(h, rho0.dim())?;
    check_dims(h, rho_d0.dim())?;

    let t_end = match *law {
        ControlLaw::Geometric { t0 } => t0.min(cfg.t_max),
        _ => cfg.t_max,
    };
    let geometric_t0 = match *law {
        ControlLaw::Geometric { t0 } => Some(t0),
        _ => None,
    };
    let sys = ClosedLoop { h, law };
    let monitor = Monitor {
        purity0: rho0.purity(),
    };
    let h0_norm = h.h0.hs_norm();
    let h1_norm = h.h1.hs_norm();

    let mut y = Pair {
        rho: rho0.mat().clone(),
        rho_d: rho_d0.mat().clone(),
    };
    let mut t = R::zero();
    // The geometric field is piecewise constant per step, decided at the step start.
    let switch_time = |t_start: R| if geometric_t0.is_some() { t_start } else { R::zero() };
    let (mut k1, mut f_now) = sys.eval(switch_time(t), &y)?;

    let mut samples = Vec::new();
    let mut max_abs_f = f_now.abs();
    let mut max_ratio = R::zero();
    let mut record = |t: R, y: &Pair<R>, f: R, samples: &mut Vec<Sample<R>>| -> Result<(), IntegrateError> {
        let s = make_sample(h, law, t, y.rho.clone(), y.rho_d.clone(), f);
        monitor.check(t, &s.rho)?;
        if h0_norm > R::zero() {
            max_ratio = max_ratio.max((f * h1_norm).abs() / h0_norm);
        }
        samples.push(s);
        Ok(())
    };
    record(t, &y, f_now, &mut samples)?;

    let mut next_index = 1usize;
    let sample_time = |k: usize| (R::from_usize(k).unwrap() * cfg.sample_every).min(t_end);
    let mut h_step = cfg.dt.min(t_end.max(R::min_positive_value()));
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let rel = cfg.rel_tol;
    let abs = cfg.abs_tol;
    let eps16 = R::epsilon() * R::lit(16.0);
    let mut stopped_early = false;

    while t < t_end && !stopped_early {
        let target = sample_time(next_index);
        let to_target = target - t;
        let clamped = h_step >= to_target;
        let step = if clamped { to_target } else { h_step };
        if step <= eps16 * t.abs().max(R::one()) && !clamped {
            return Err(IntegrateError::StepUnderflow {
                t: t.to_f64_lossy(),
                h: step.to_f64_lossy(),
            });
        }
        if accepted + rejected >= cfg.max_steps {
            return Err(IntegrateError::TooManySteps(cfg.max_steps));
        }

        let ts = switch_time(t);
        let mut ks: Vec<Pair<R>> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for stage in 1..7 {
            let terms: Vec<(R, &Pair<R>)> = (0..stage)
                .map(|j| (R::lit(DP_A[stage][j]) * step, &ks[j]))
                .collect();
            let ys = y.plus(&terms);
            let (k, _) = sys.eval(ts, &ys)?;
            ks.push(k);
        }
        let terms: Vec<(R, &Pair<R>)> = (0..6).map(|j| (R::lit(DP_A[6][j]) * step, &ks[j])).collect();
        let y_new = y.plus(&terms);
        let zero = Pair {
            rho: CMat::zeros(y.rho.dim()),
            rho_d: CMat::zeros(y.rho.dim()),
        };
        let err_terms: Vec<(R, &Pair<R>)> = (0..7).map(|j| (R::lit(DP_E[j]) * step, &ks[j])).collect();
        let err = zero.plus(&err_terms);
        let en = error_norm(&y, &y_new, &err, rel, abs);

        if en <= R::one() {
            accepted += 1;
            t = if clamped { target } else { t + step };
            y = y_new;
            let (k_next, f_next) = sys.eval(switch_time(t), &y)?;
            k1 = k_next;
            f_now = f_next;
            max_abs_f = max_abs_f.max(f_now.abs());
            let grow = if en.is_zero() {
                R::lit(5.0)
            } else {
                (R::lit(0.9) * en.powf(R::lit(-0.2))).min(R::lit(5.0)).max(R::lit(0.2))
            };
            // Do not let a short clamped step shrink the working step size.
            h_step = if clamped { h_step.max(step * grow) } else { step * grow };
            if clamped {
                // Geometric runs end on the switch: record the left limit.
                let f_rec = if geometric_t0.is_some() && t >= t_end {
                    R::one()
                } else {
                    f_now
                };
                record(t, &y, f_rec, &mut samples)?;
                next_index += 1;
                if let Some(vs) = cfg.v_stop {
                    if samples.last().map(|s| s.v < vs).unwrap_or(false) {
                        stopped_early = true;
                    }
                }
            }
        } else {
            rejected += 1;
            let shrink = (R::lit(0.9) * en.powf(R::lit(-0.2))).max(R::lit(0.1));
            h_step = step * shrink;
            if h_step <= eps16 * t.abs().max(R::one()) {
                return Err(IntegrateError::StepUnderflow {
                    t: t.to_f64_lossy(),
                    h: h_step.to_f64_lossy(),
                });
            }
        }
    }

    let v0 = samples[0].v;
    let stalled = law.is_lyapunov() && max_abs_f <= R::loosen(1e-12) && v0 > R::loosen(1e-12);
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            params: None,
            paradigm: None,
            law: *law,
            config: *cfg,
            basis: h.basis,
            reduced: h.reduced,
            stalled,
            max_control_ratio: max_ratio,
            steps_accepted: accepted,
            steps_rejected: rejected,
            seed: None,
        },
    })
}

/// Exact evolution under a constant Hamiltonian: `U ρ₀ U†` with `U = exp(−i·h_tot·t)`.
pub fn geometric_evolve<R: Real>(h_tot: &CMat<R>, rho0: &Density<R>, t: R) -> Result<Density<R>, IntegrateError> {
    if h_tot.dim() != rho0.dim() {
        return Err(IntegrateError::DimensionMismatch {
            ham: h_tot.dim(),
            state: rho0.dim(),
        });
    }
    let u = unitary_propagator(h_tot, t)?;
    Ok(Density::new_unchecked(rho0.mat().conjugate_by(&u)))
}

/// Largest unit-dynamics invariant drifts over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport<R: Real> {
    pub max_trace_error: R,
    pub max_hermiticity_error: R,
    pub max_purity_drift: R,
    pub min_eigenvalue: R,
    pub max_subspace_drift: R,
}

impl<R: Real> InvariantReport<R> {
    pub fn within_tolerances(&self) -> bool {
        self.max_trace_error <= R::loosen(TRACE_DRIFT_TOL)
            && self.max_hermiticity_error <= R::loosen(HERMITIAN_DRIFT_TOL)
            && self.max_purity_drift <= R::loosen(PURITY_DRIFT_TOL)
            && self.min_eigenvalue >= -R::loosen(EIGEN_DRIFT_TOL)
    }
}

pub fn invariant_report<R: Real>(traj: &Trajectory<R>) -> Result<InvariantReport<R>, IntegrateError> {
    let p0 = traj.first().purity;
    let ps0 = traj.first().p_s;
    let mut rep = InvariantReport {
        max_trace_error: R::zero(),
        max_hermiticity_error: R::zero(),
        max_purity_drift: R::zero(),
        min_eigenvalue: R::infinity(),
        max_subspace_drift: R::zero(),
    };
    for s in &traj.samples {
        rep.max_trace_error = rep.max_trace_error.max(s.rho.trace_error());
        rep.max_hermiticity_error = rep.max_hermiticity_error.max(s.rho.hermiticity_error());
        rep.max_purity_drift = rep.max_purity_drift.max((s.purity - p0).abs());
        // Hermitian part, so the eigensolver sees a valid input.
        let herm = (s.rho.mat() + &s.rho.mat().dagger()).scale_re(R::lit(0.5));
        let min = crate::linalg::eigh(&herm)?.values[0];
        rep.min_eigenvalue = rep.min_eigenvalue.min(min);
        if !ps0.is_nan() {
            rep.max_subspace_drift = rep.max_subspace_drift.max((s.p_s - ps0).abs());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Sign;
    use crate::linalg::{pauli, Pauli};
    use crate::model::{bell_state, hamiltonians, subspace_reduce, Basis, BellState, NamedState};
    use crate::state::Ket;

    fn params() -> ModelParams<f64> {
        ModelParams::symmetric(1.0, 0.1).unwrap()
    }

    fn half_plus(p: Pauli) -> Density<f64> {
        Density::new((&CMat::identity(2) + &pauli::<f64>(p)).scale_re(0.5)).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::XProduct);
        let rho = NamedState::X(0).ket::<f64>(Basis::XProduct).outer();
        let (a, b) = rhs(&h, 0.0, &rho, &rho).unwrap();
        assert_eq!(a, b);

        // Eigenstate of H0 + f H1 with f = 0: Bell states are stationary.
        let phi = bell_state::<f64>(BellState::PhiPlus, Basis::XProduct).outer();
        let (a, _) = rhs(&h, 0.0, &phi, &phi).unwrap();
        assert!(a.hs_norm() < 1e-15);

        let red = subspace_reduce(&hamiltonians(&params(), Paradigm::LocalControl, Basis::Bell)).unwrap();
        let (a, _) = rhs(&red, 0.0, &half_plus(Pauli::X), &half_plus(Pauli::Z)).unwrap();
        // −i[2σz, (I+σx)/2] = −i·i·2σy = 2σy
        let expected = pauli::<f64>(Pauli::Y).scale_re(2.0);
        assert!(a.distance(&expected) < 1e-14);
        // direct 2×2 arithmetic
        let (h0, rho) = (red.h0.clone(), half_plus(Pauli::X).into_mat());
        let direct = (&h0.matmul(&rho) - &rho.matmul(&h0)).scale(c(0.0, -1.0));
        assert!(a.distance(&direct) < 1e-15);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian_consistent() {
        let h = hamiltonians(&params(), Paradigm::InteractionControl, Basis::ZProduct);
        let rho = NamedState::X(0).ket::<f64>(Basis::ZProduct).outer();
        let rd = bell_state::<f64>(BellState::PhiPlus, Basis::ZProduct).outer();
        let (a, b) = rhs(&h, 0.37, &rho, &rd).unwrap();
        assert!(a.trace().norm() < 1e-15 && b.trace().norm() < 1e-15);
        assert!(a.hermiticity_error() < 1e-15 && b.hermiticity_error() < 1e-15);
    }

    #[test]
    fn rhs_rejects_dimension_mismatch() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::XProduct);
        let rho = half_plus(Pauli::X);
        assert!(matches!(rhs(&h, 0.0, &rho, &rho), Err(IntegrateError::DimensionMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = IntegratorConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.sample_every = 0.0;
        assert!(matches!(cfg.validate(), Err(IntegrateError::BadConfig(_))));
    }

    #[test]
    fn free_evolution_of_eigenstate_is_constant() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::Bell);
        let phi = bell_state::<f64>(BellState::PhiPlus, Basis::Bell).outer();
        let traj = integrate(&h, &ControlLaw::None, &phi, &phi, &IntegratorConfig::with_horizon(20.0)).unwrap();
        for s in &traj.samples {
            assert!(s.rho.mat().distance(phi.mat()) < 1e-12);
            assert!(s.v < 1e-24);
        }
    }

    #[test]
    fn free_evolution_matches_exponential() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::ZProduct);
        let rho0 = NamedState::X(0).ket::<f64>(Basis::ZProduct).outer();
        let cfg = IntegratorConfig {
            t_max: 50.0,
            sample_every: 1.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&h, &ControlLaw::None, &rho0, &rho0, &cfg).unwrap();
        let exact = geometric_evolve(&h.h0, &rho0, 50.0).unwrap();
        let err = traj.last().rho.mat().distance(exact.mat());
        assert!(err < 1e-8, "{err}");
        assert_eq!(traj.last().t, 50.0);
    }

    #[test]
    fn sample_grid_is_strictly_increasing() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::XProduct);
        let rho0 = NamedState::X(0).ket::<f64>(Basis::XProduct).outer();
        let cfg = IntegratorConfig {
            t_max: 1.05,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&h, &ControlLaw::None, &rho0, &rho0, &cfg).unwrap();
        let ts = traj.times();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(ts.len(), 12);
        assert_eq!(*ts.last().unwrap(), 1.05);
    }

    #[test]
    fn geometric_evolve_examples() {
        let rho0 = NamedState::Z(0).ket::<f64>(Basis::ZProduct).outer();
        let htot = crate::model::h_total(&params());
        assert!(geometric_evolve(&htot, &rho0, 0.0).unwrap().mat().distance(rho0.mat()) < 1e-15);
        let d = CMat::real_diag(&[0.3, -1.0, 2.0, 0.5]);
        let diag_rho = Density::new(CMat::real_diag(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!(geometric_evolve(&d, &diag_rho, 17.0).unwrap().mat().distance(diag_rho.mat()) < 1e-14);
    }

    #[test]
    fn geometric_law_stops_at_switch_time() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::ZProduct);
        let rho0 = NamedState::Z(0).ket::<f64>(Basis::ZProduct).outer();
        let law = ControlLaw::geometric(3.25).unwrap();
        let traj = integrate(&h, &law, &rho0, &rho0, &IntegratorConfig::with_horizon(10.0)).unwrap();
        assert_eq!(traj.last().t, 3.25);
        let exact = geometric_evolve(&h.total(1.0), &rho0, 3.25).unwrap();
        assert!(traj.last().rho.mat().distance(exact.mat()) < 1e-9);

        let never = ControlLaw::geometric(0.0).unwrap();
        let traj = integrate(&h, &never, &rho0, &rho0, &IntegratorConfig::with_horizon(10.0)).unwrap();
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn excluded_state_stalls() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::Bell);
        let rho0 = bell_state::<f64>(BellState::PhiMinus, Basis::Bell).outer();
        let rd = bell_state::<f64>(BellState::PhiPlus, Basis::Bell).outer();
        let law = ControlLaw::lyapunov(1.0, Sign::Plus).unwrap();
        let traj = integrate(&h, &law, &rho0, &rd, &IntegratorConfig::with_horizon(20.0)).unwrap();
        assert!(traj.meta.stalled);
        assert!((traj.last().v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_run_is_monotone_and_conserves_invariants() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::XProduct);
        let rho0 = NamedState::X(0).ket::<f64>(Basis::XProduct).outer();
        let rd = bell_state::<f64>(BellState::PhiPlus, Basis::XProduct).outer();
        let law = ControlLaw::lyapunov(2.0, Sign::Plus).unwrap();
        let traj = integrate(&h, &law, &rho0, &rd, &IntegratorConfig::with_horizon(150.0)).unwrap();
        assert!(!traj.meta.stalled);
        let vs = traj.values();
        assert!(vs.windows(2).all(|w| w[1] <= w[0] + 1e-8));
        assert!(*vs.last().unwrap() < 1e-6);
        let inv = invariant_report(&traj).unwrap();
        assert!(inv.within_tolerances(), "{inv:?}");
        assert!(inv.max_subspace_drift < 1e-8);
        for s in &traj.samples {
            assert!(s.f.abs() <= s.f_bound + 1e-15);
        }
    }

    #[test]
    fn early_stop_on_small_v() {
        let h = hamiltonians(&params(), Paradigm::LocalControl, Basis::XProduct);
        let rho0 = NamedState::X(0).ket::<f64>(Basis::XProduct).outer();
        let rd = bell_state::<f64>(BellState::PhiPlus, Basis::XProduct).outer();
        let law = ControlLaw::lyapunov(2.0, Sign::Plus).unwrap();
        let cfg = IntegratorConfig {
            v_stop: Some(1e-3),
            ..IntegratorConfig::with_horizon(300.0)
        };
        let traj = integrate(&h, &law, &rho0, &rd, &cfg).unwrap();
        assert!(traj.last().v < 1e-3);
        assert!(traj.last().t < 300.0);
    }

    #[test]
    fn single_precision_run_descends() {
        let p = ModelParams::<f32>::symmetric(1.0, 0.1).unwrap();
        let h = subspace_reduce(&hamiltonians(&p, Paradigm::LocalControl, Basis::Bell)).unwrap();
        let s = std::f32::consts::FRAC_1_SQRT_2;
        let rho0 = Ket::<f32>::from_real(&[s as f64, s as f64]).unwrap().outer();
        let rd = Ket::<f32>::basis(2, 0).outer();
        let law = ControlLaw::lyapunov(2.0f32, Sign::Plus).unwrap();
        let cfg = IntegratorConfig {
            rel_tol: 1e-5,
            abs_tol: 1e-7,
            ..IntegratorConfig::with_horizon(60.0f32)
        };
        let traj = integrate(&h, &law, &rho0, &rd, &cfg).unwrap();
        assert!(traj.last().v < 0.05, "{}", traj.last().v);
        assert!(traj.last().concurrence > 0.8);
    }
}
