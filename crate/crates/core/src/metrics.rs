//! Entanglement and convergence diagnostics.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::linalg::{eigh, kron, pauli, CMat, LinalgError, Pauli};
use crate::model::Basis;
use crate::scalar::{c, Real, C};
use crate::state::Density;

/// Values of `V` at or below this are treated as numerical noise in fits.
pub const V_FLOOR: f64 = 1e-12;
/// Minimum number of samples a fit window must contain.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Default concurrence threshold for peak detection.
pub const DEFAULT_THRESHOLD: f64 = 0.99;
/// Default width of the window around the concurrence maximum.
pub const DEFAULT_FLUCTUATION_WINDOW: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("fit window [{t_lo}, {t_hi}] holds {got} usable samples, need at least {MIN_FIT_SAMPLES}")]
    TooFewSamples { t_lo: f64, t_hi: f64, got: usize },
    #[error("target state is not pure (purity {purity})")]
    TargetNotPure { purity: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Wootters concurrence of a two-qubit state given in the computational basis.
///
/// The `λᵢ` are the singular values of `√ρ (Y⊗Y) √ρ*`. They are read off the
/// Hermitian dilation `[[0, A], [A†, 0]]`, whose spectrum is `±λᵢ`; this avoids
/// square roots of near-zero eigenvalues, which would cost half the digits.
pub fn concurrence<R: Real>(rho: &Density<R>) -> Result<R, MetricsError> {
    if rho.dim() != 4 {
        return Err(MetricsError::WrongDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    let herm = (rho.mat() + &rho.mat().dagger()).scale_re(R::lit(0.5));
    let sqrt_rho = eigh(&herm)?.map(|l| c(l.max(R::zero()).sqrt(), R::zero()));
    let y = pauli::<R>(Pauli::Y);
    let yy = kron(&y, &y);
    let a = sqrt_rho.matmul(&yy).matmul(&sqrt_rho.conj());
    let dilation = CMat::from_fn(8, |i, j| match (i < 4, j < 4) {
        (true, false) => a[(i, j - 4)],
        (false, true) => a[(j, i - 4)].conj(),
        _ => C::zero(),
    });
    let values = eigh(&dilation)?.values;
    // Ascending, so the four largest are the singular values in increasing order.
    let l = &values[4..];
    let cval = l[3] - l[2] - l[1] - l[0];
    Ok(cval.max(R::zero()).min(R::one()))
}

/// Concurrence of a state whose coordinates are in `basis`.
pub fn concurrence_in<R: Real>(rho: &Density<R>, basis: Basis) -> Result<R, MetricsError> {
    if basis == Basis::ZProduct {
        concurrence(rho)
    } else {
        if rho.dim() != 4 {
            return Err(MetricsError::WrongDimension {
                expected: 4,
                got: rho.dim(),
            });
        }
        concurrence(&rho.transformed(&basis.change_to(Basis::ZProduct)))
    }
}

/// `Tr(ρ · target)` for a pure target.
pub fn fidelity_to<R: Real>(rho: &Density<R>, target: &Density<R>) -> Result<R, MetricsError> {
    if rho.dim() != target.dim() {
        return Err(MetricsError::WrongDimension {
            expected: target.dim(),
            got: rho.dim(),
        });
    }
    let purity = target.purity();
    if (purity - R::one()).abs() > R::loosen(1e-9) {
        return Err(MetricsError::TargetNotPure {
            purity: purity.to_f64_lossy(),
        });
    }
    Ok(rho.mat().matmul(target.mat()).trace().re)
}

/// Distance to the equator family `½(e₁e₁† + e₄e₄† + e^{−iα}e₁e₄† + e^{iα}e₄e₁†)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LasalleDistance<R: Real> {
    pub dist: R,
    /// Phase of the nearest member; `None` when `ρ₄₁ = 0` leaves it undetermined.
    pub alpha: Option<R>,
}

/// Member of the equator family with phase `alpha`, in X-product coordinates.
pub fn equator_state<R: Real>(alpha: R) -> CMat<R> {
    let half = R::lit(0.5);
    let mut m = CMat::zeros(4);
    m[(0, 0)] = c(half, R::zero());
    m[(3, 3)] = c(half, R::zero());
    m[(0, 3)] = c(alpha.cos() * half, -alpha.sin() * half);
    m[(3, 0)] = c(alpha.cos() * half, alpha.sin() * half);
    m
}

/// Hilbert–Schmidt distance from `ρ` (X-product coordinates) to the nearest
/// equator state.
pub fn lasalle_distance<R: Real>(rho: &Density<R>) -> Result<LasalleDistance<R>, MetricsError> {
    if rho.dim() != 4 {
        return Err(MetricsError::WrongDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    let z = rho.mat()[(3, 0)];
    if z.is_zero() {
        let n = 720;
        let dist = (0..n)
            .map(|k| {
                let a = R::TAU() * R::from_usize(k).unwrap() / R::from_usize(n).unwrap();
                rho.mat().distance(&equator_state(a))
            })
            .fold(R::infinity(), R::min);
        return Ok(LasalleDistance { dist, alpha: None });
    }
    let alpha = z.arg();
    Ok(LasalleDistance {
        dist: rho.mat().distance(&equator_state(alpha)),
        alpha: Some(alpha),
    })
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit<R: Real> {
    pub slope: R,
    pub intercept: R,
    /// Coefficient of determination; 1 for a perfect (including constant) fit.
    pub r2: R,
    pub n: usize,
}

pub fn line_fit<R: Real>(xs: &[R], ys: &[R]) -> LineFit<R> {
    let n = xs.len().min(ys.len());
    let nr = R::from_usize(n).unwrap();
    let mx = xs[..n].iter().copied().sum::<R>() / nr;
    let my = ys[..n].iter().copied().sum::<R>() / nr;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    let mut syy = R::zero();
    for (x, y) in xs.iter().zip(ys) {
        sxx += (*x - mx) * (*x - mx);
        sxy += (*x - mx) * (*y - my);
        syy += (*y - my) * (*y - my);
    }
    let slope = if sxx > R::zero() { sxy / sxx } else { R::zero() };
    let intercept = my - slope * mx;
    let ss_res: R = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = *y - (intercept + slope * *x);
            r * r
        })
        .sum();
    let scale = R::epsilon() * nr * (my.abs() + R::one());
    let r2 = if syy > scale * scale * nr {
        R::one() - ss_res / syy
    } else {
        R::one()
    };
    LineFit {
        slope,
        intercept,
        r2,
        n,
    }
}

/// Fit of `y ≈ y₀ e^{−rate·t}` on samples with `t ∈ [t_lo, t_hi]` and `y > floor`.
pub fn exponential_fit<R: Real>(
    ts: &[R],
    ys: &[R],
    window: (R, R),
    floor: R,
) -> Result<LineFit<R>, MetricsError> {
    let (xs, ls): (Vec<R>, Vec<R>) = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t >= window.0 && **t <= window.1 && **y > floor)
        .map(|(t, y)| (*t, y.ln()))
        .unzip();
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(MetricsError::TooFewSamples {
            t_lo: window.0.to_f64_lossy(),
            t_hi: window.1.to_f64_lossy(),
            got: xs.len(),
        });
    }
    Ok(line_fit(&xs, &ls))
}

/// Window between the first time `y` falls below `upper·y₀` and the first later
/// time it falls below `lower·y₀` (or the end of the data).
pub fn decay_window<R: Real>(ts: &[R], ys: &[R], upper: R, lower: R) -> Option<(R, R)> {
    let y0 = *ys.first()?;
    let start = ys.iter().position(|&y| y <= upper * y0)?;
    let end = ys[start..]
        .iter()
        .position(|&y| y <= lower * y0)
        .map(|k| start + k)
        .unwrap_or(ys.len() - 1);
    Some((ts[start], ts[end]))
}

/// Relative bounds of the mid-decay window: from `10⁻¹·y₀` down to `10⁻⁶·y₀`.
pub const MID_DECAY: (f64, f64) = (1e-1, 1e-6);

/// [`decay_window`] with the [`MID_DECAY`] bounds.
pub fn mid_decay_window<R: Real>(ts: &[R], ys: &[R]) -> Option<(R, R)> {
    decay_window(ts, ys, R::lit(MID_DECAY.0), R::lit(MID_DECAY.1))
}

/// `1 − C` along a trajectory.
pub fn concurrence_deficit<R: Real>(traj: &Trajectory<R>) -> Vec<R> {
    traj.samples.iter().map(|s| R::one() - s.concurrence).collect()
}

/// Exponential-decay summary of the Lyapunov function along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport<R: Real> {
    /// `λ` in `V ≈ V₀ e^{−λt}`.
    pub rate: R,
    /// `R²` of the fit to `ln V`.
    pub fit_quality: R,
    pub v_final: R,
    pub stalled: bool,
    pub samples_used: usize,
}

pub fn convergence_report<R: Real>(
    traj: &Trajectory<R>,
    fit_window: (R, R),
) -> Result<ConvergenceReport<R>, MetricsError> {
    if traj.samples.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    let fit = exponential_fit(&traj.times(), &traj.values(), fit_window, R::loosen(V_FLOOR))?;
    Ok(ConvergenceReport {
        rate: -fit.slope,
        fit_quality: fit.r2,
        v_final: traj.last().v,
        stalled: traj.meta.stalled,
        samples_used: fit.n,
    })
}

/// Timing and ripple of the concurrence curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport<R: Real> {
    /// First time the concurrence reaches the threshold (linear interpolation).
    pub t_first: Option<R>,
    pub c_max: R,
    pub t_at_max: R,
    /// Spread of the local extrema within the window centred on the maximum.
    pub fluctuation_amplitude: R,
}

pub fn peak_report<R: Real>(traj: &Trajectory<R>, threshold: R) -> Result<PeakReport<R>, MetricsError> {
    peak_report_with_window(traj, threshold, R::lit(DEFAULT_FLUCTUATION_WINDOW))
}

pub fn peak_report_with_window<R: Real>(
    traj: &Trajectory<R>,
    threshold: R,
    window: R,
) -> Result<PeakReport<R>, MetricsError> {
    if traj.samples.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    let ts = traj.times();
    let cs = traj.concurrences();
    Ok(peak_of(&ts, &cs, threshold, window))
}

/// Peak analysis on raw `(t, C)` series.
pub fn peak_of<R: Real>(ts: &[R], cs: &[R], threshold: R, window: R) -> PeakReport<R> {
    let mut t_first = None;
    for k in 0..cs.len() {
        if cs[k] >= threshold {
            t_first = Some(if k == 0 {
                ts[0]
            } else {
                let (c0, c1) = (cs[k - 1], cs[k]);
                ts[k - 1] + (ts[k] - ts[k - 1]) * (threshold - c0) / (c1 - c0)
            });
            break;
        }
    }
    let (imax, c_max) = cs
        .iter()
        .copied()
        .enumerate()
        .fold((0, R::neg_infinity()), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let t_at_max = ts[imax];
    let half = window * R::lit(0.5);
    let inside: Vec<usize> = (0..cs.len())
        .filter(|&k| (ts[k] - t_at_max).abs() <= half)
        .collect();
    let mut extrema: Vec<R> = inside
        .iter()
        .copied()
        .filter(|&k| k > 0 && k + 1 < cs.len())
        .filter(|&k| (cs[k] - cs[k - 1]) * (cs[k + 1] - cs[k]) <= R::zero())
        .map(|k| cs[k])
        .collect();
    extrema.push(c_max);
    let (lo, hi) = if extrema.len() >= 2 {
        min_max(&extrema)
    } else {
        // No interior turning points: a monotone stretch.
        min_max(&inside.iter().map(|&k| cs[k]).collect::<Vec<_>>())
    };
    PeakReport {
        t_first,
        c_max,
        t_at_max,
        fluctuation_amplitude: hi - lo,
    }
}

fn min_max<R: Real>(v: &[R]) -> (R, R) {
    v.iter()
        .fold((R::infinity(), R::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Largest single-step increase in a series (0 when nonincreasing).
pub fn max_rise<R: Real>(values: &[R]) -> R {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(R::zero(), R::max)
}

/// Largest single-step decrease in a series (0 when nondecreasing).
pub fn max_drop<R: Real>(values: &[R]) -> R {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(R::zero(), R::max)
}
