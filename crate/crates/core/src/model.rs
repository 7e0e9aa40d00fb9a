//! Two-atom Hamiltonians, the three working bases, and the invariant
//! two-dimensional subspace spanned by `|++⟩` and `|−−⟩`.
//!
//! Basis orderings:
//!
//! * `ZProduct`: `|00⟩, |01⟩, |10⟩, |11⟩`
//! * `XProduct`: `|++⟩, |+−⟩, |−+⟩, |−−⟩` with `|±⟩ = (|0⟩ ± |1⟩)/√2`
//! * `Bell`: `Ψ⁺, Φ⁺, Φ⁻, Ψ⁻`, where the Bell states are built from the
//!   X-product states: `Φ± = (|++⟩ ± |−−⟩)/√2`, `Ψ± = (|+−⟩ ± |−+⟩)/√2`.
//!
//! With these orderings the coupling `2J Z⊗Z` is anti-diagonal in the
//! X-product basis and `2J·diag(1, 1, −1, −1)` in the Bell basis.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{kron, pauli, CMat, Pauli};
use crate::scalar::{c, Real, C};
use crate::state::{Density, Ket};

/// Off-block norm above which a subspace is not considered invariant.
pub const INVARIANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("coupling strength J must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("eta must be non-negative and finite, got {0}")]
    BadEta(f64),
    #[error("asymmetry k must be finite, got {0}")]
    BadAsymmetry(f64),
    #[error("subspace is not invariant: off-block norm {off_block:.3e}")]
    NotInvariant { off_block: f64 },
    #[error("asymmetric local coupling (k = {k}) is only supported in the full four-level dynamics")]
    AsymmetricCoupling { k: f64 },
    #[error("pair is already reduced to the subspace")]
    AlreadyReduced,
    #[error("unknown {what} `{name}`")]
    UnknownName { what: &'static str, name: String },
}

/// Physical constants: coupling `J`, local field ratio `η` (`B = ηJ`), and the
/// asymmetry `k` between the two local couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<R: Real> {
    pub j: R,
    pub eta: R,
    pub k: R,
}

impl<R: Real> ModelParams<R> {
    pub fn new(j: R, eta: R, k: R) -> Result<Self, ModelError> {
        if !(j > R::zero()) || !j.is_finite() {
            return Err(ModelError::NonPositiveCoupling(j.to_f64_lossy()));
        }
        if !(eta >= R::zero()) || !eta.is_finite() {
            return Err(ModelError::BadEta(eta.to_f64_lossy()));
        }
        if !k.is_finite() {
            return Err(ModelError::BadAsymmetry(k.to_f64_lossy()));
        }
        if eta >= R::one() {
            log::warn!("eta = {eta} is not small; the effective coupling model assumes eta << 1");
        }
        Ok(Self { j, eta, k })
    }

    /// Symmetric coupling (`k = 1`).
    pub fn symmetric(j: R, eta: R) -> Result<Self, ModelError> {
        Self::new(j, eta, R::one())
    }

    /// Local field strength `B = ηJ`.
    pub fn b(&self) -> R {
        self.eta * self.j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    ZProduct,
    XProduct,
    Bell,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::ZProduct, Basis::XProduct, Basis::Bell];

    /// Unitary taking ZProduct coordinates to coordinates in `self`.
    pub fn transform<R: Real>(self) -> CMat<R> {
        match self {
            Basis::ZProduct => CMat::identity(4),
            Basis::XProduct => x_columns::<R>().dagger(),
            Basis::Bell => x_columns::<R>().matmul(&bell_columns_x()).dagger(),
        }
    }

    /// Unitary taking coordinates in `self` to coordinates in `to`.
    pub fn change_to<R: Real>(self, to: Basis) -> CMat<R> {
        to.transform::<R>().matmul(&self.transform::<R>().dagger())
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::ZProduct => "Z",
            Basis::XProduct => "X",
            Basis::Bell => "Bell",
        })
    }
}

impl FromStr for Basis {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "z" | "zproduct" | "computational" => Ok(Basis::ZProduct),
            "x" | "xproduct" => Ok(Basis::XProduct),
            "bell" => Ok(Basis::Bell),
            _ => Err(ModelError::UnknownName {
                what: "basis",
                name: s.to_string(),
            }),
        }
    }
}

/// Columns `|++⟩, |+−⟩, |−+⟩, |−−⟩` in ZProduct coordinates.
fn x_columns<R: Real>() -> CMat<R> {
    let h = CMat::<R>::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
        .scale_re(R::FRAC_1_SQRT_2());
    kron(&h, &h)
}

/// Columns `Ψ⁺, Φ⁺, Φ⁻, Ψ⁻` in XProduct coordinates.
fn bell_columns_x<R: Real>() -> CMat<R> {
    let s = R::FRAC_1_SQRT_2();
    CMat::from_real_rows(&[
        &[0.0, 1.0, 1.0, 0.0],
        &[1.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, -1.0],
        &[0.0, 1.0, -1.0, 0.0],
    ])
    .scale_re(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PsiPlus,
    PhiPlus,
    PhiMinus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PsiPlus,
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiMinus,
    ];

    /// Position in the Bell basis ordering.
    pub fn index(self) -> usize {
        match self {
            BellState::PsiPlus => 0,
            BellState::PhiPlus => 1,
            BellState::PhiMinus => 2,
            BellState::PsiMinus => 3,
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellState::PsiPlus => "PsiPlus",
            BellState::PhiPlus => "PhiPlus",
            BellState::PhiMinus => "PhiMinus",
            BellState::PsiMinus => "PsiMinus",
        })
    }
}

/// The named Bell state, expressed in `basis`.
pub fn bell_state<R: Real>(which: BellState, basis: Basis) -> Ket<R> {
    Ket::basis(4, which.index()).transformed(&Basis::Bell.change_to(basis))
}

/// Product and Bell states that can be referred to by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    /// Computational product state `|ab⟩`, bits packed as `2a + b`.
    Z(u8),
    /// X-product state; bit 1 means `|−⟩` (so 0 is `|++⟩`, 3 is `|−−⟩`).
    X(u8),
    Bell(BellState),
}

impl NamedState {
    pub fn ket<R: Real>(self, basis: Basis) -> Ket<R> {
        match self {
            NamedState::Z(i) => Ket::basis(4, i as usize).transformed(&Basis::ZProduct.change_to(basis)),
            NamedState::X(i) => Ket::basis(4, i as usize).transformed(&Basis::XProduct.change_to(basis)),
            NamedState::Bell(b) => bell_state(b, basis),
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedState::Z(i) => write!(f, "|{}{}>", (i >> 1) & 1, i & 1),
            NamedState::X(i) => {
                let s = |b: u8| if b == 0 { '+' } else { '-' };
                write!(f, "|{}{}>", s((i >> 1) & 1), s(i & 1))
            }
            NamedState::Bell(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for NamedState {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let unknown = || ModelError::UnknownName {
            what: "state",
            name: t.to_string(),
        };
        if let Some(inner) = t.strip_prefix('|').and_then(|r| r.strip_suffix('>')) {
            let chars: Vec<char> = inner.chars().collect();
            if chars.len() != 2 {
                return Err(unknown());
            }
            let bits = |ch: char| match ch {
                '0' => Some((0u8, 'z')),
                '1' => Some((1u8, 'z')),
                '+' => Some((0u8, 'x')),
                '-' => Some((1u8, 'x')),
                _ => None,
            };
            let (a, ka) = bits(chars[0]).ok_or_else(unknown)?;
            let (b, kb) = bits(chars[1]).ok_or_else(unknown)?;
            return match (ka, kb) {
                ('z', 'z') => Ok(NamedState::Z(2 * a + b)),
                ('x', 'x') => Ok(NamedState::X(2 * a + b)),
                _ => Err(unknown()),
            };
        }
        let bell = match t.to_ascii_lowercase().as_str() {
            "psiplus" | "psi+" => BellState::PsiPlus,
            "phiplus" | "phi+" => BellState::PhiPlus,
            "phiminus" | "phi-" => BellState::PhiMinus,
            "psiminus" | "psi-" => BellState::PsiMinus,
            _ => return Err(unknown()),
        };
        Ok(NamedState::Bell(bell))
    }
}

/// Which Hamiltonian term carries the feedback field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Paradigm {
    /// Drift `2J Z⊗Z`, control on the local fields.
    LocalControl,
    /// Drift on the local fields, control on `2J Z⊗Z`.
    InteractionControl,
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Paradigm::LocalControl => "local",
            Paradigm::InteractionControl => "interaction",
        })
    }
}

impl FromStr for Paradigm {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" | "localcontrol" => Ok(Paradigm::LocalControl),
            "interaction" | "interactioncontrol" => Ok(Paradigm::InteractionControl),
            _ => Err(ModelError::UnknownName {
                what: "paradigm",
                name: s.to_string(),
            }),
        }
    }
}

/// Drift and control Hamiltonians in a declared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPair<R: Real> {
    pub h0: CMat<R>,
    pub h1: CMat<R>,
    pub basis: Basis,
    /// True once restricted to the `{|++⟩, |−−⟩}` subspace.
    pub reduced: bool,
    /// Local-coupling asymmetry the pair was built with.
    pub asymmetry: R,
}

impl<R: Real> HamiltonianPair<R> {
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `H₀ + f·H₁`
    pub fn total(&self, f: R) -> CMat<R> {
        let mut h = self.h0.clone();
        h.axpy(c(f, R::zero()), &self.h1);
        h
    }

    /// Re-expresses a full (unreduced) pair in another basis.
    pub fn in_basis(&self, basis: Basis) -> Result<Self, ModelError> {
        if self.reduced {
            return Err(ModelError::AlreadyReduced);
        }
        let u = self.basis.change_to::<R>(basis);
        Ok(Self {
            h0: self.h0.conjugate_by(&u),
            h1: self.h1.conjugate_by(&u),
            basis,
            reduced: false,
            asymmetry: self.asymmetry,
        })
    }
}

/// `ηJ·(X⊗I + k·I⊗X)` in the ZProduct basis.
pub fn h_local<R: Real>(p: &ModelParams<R>) -> CMat<R> {
    let x = pauli::<R>(Pauli::X);
    let id = pauli::<R>(Pauli::I);
    let mut h = kron(&x, &id);
    h.axpy(c(p.k, R::zero()), &kron(&id, &x));
    h.scale_re(p.eta * p.j)
}

/// `2J·Z⊗Z` in the ZProduct basis.
pub fn h_eff<R: Real>(p: &ModelParams<R>) -> CMat<R> {
    let z = pauli::<R>(Pauli::Z);
    kron(&z, &z).scale_re(R::lit(2.0) * p.j)
}

/// `H_local + H_eff`, the constant Hamiltonian of the geometric scheme.
pub fn h_total<R: Real>(p: &ModelParams<R>) -> CMat<R> {
    &h_local(p) + &h_eff(p)
}

pub fn hamiltonians<R: Real>(p: &ModelParams<R>, paradigm: Paradigm, basis: Basis) -> HamiltonianPair<R> {
    let (h0, h1, asymmetry) = match paradigm {
        Paradigm::LocalControl => (h_eff(p), h_local(p), p.k),
        Paradigm::InteractionControl => {
            let sym = ModelParams { k: R::one(), ..*p };
            (h_local(&sym), h_eff(p), R::one())
        }
    };
    let u = Basis::ZProduct.change_to::<R>(basis);
    HamiltonianPair {
        h0: h0.conjugate_by(&u),
        h1: h1.conjugate_by(&u),
        basis,
        reduced: false,
        asymmetry,
    }
}

/// Orthonormal vectors spanning `S = span{|++⟩, |−−⟩}` in `basis`, in the order
/// used for the reduced coordinates.
///
/// In the Bell basis these are `Φ⁺, Φ⁻`; otherwise `|++⟩, |−−⟩`.
pub fn subspace_vectors<R: Real>(basis: Basis) -> [Vec<C<R>>; 2] {
    match basis {
        Basis::Bell => [
            Ket::<R>::basis(4, BellState::PhiPlus.index()).amplitudes().to_vec(),
            Ket::<R>::basis(4, BellState::PhiMinus.index()).amplitudes().to_vec(),
        ],
        other => [
            NamedState::X(0).ket::<R>(other).amplitudes().to_vec(),
            NamedState::X(3).ket::<R>(other).amplitudes().to_vec(),
        ],
    }
}

fn off_block_norm<R: Real>(h: &CMat<R>, cols: &[Vec<C<R>>; 2]) -> R {
    // ‖(I − VV†) H V‖
    let mut acc = R::zero();
    for v in cols {
        let hv = h.apply(v);
        let mut resid = hv.clone();
        for w in cols {
            let ov = crate::linalg::inner(w, &hv);
            for (r, wi) in resid.iter_mut().zip(w) {
                *r -= *wi * ov;
            }
        }
        acc += resid.iter().map(|z| z.norm_sqr()).sum::<R>();
    }
    acc.sqrt()
}

/// Restricts a pair to the invariant subspace `span{|++⟩, |−−⟩}`.
///
/// Rejects pairs built with asymmetric local coupling, and pairs whose drift or
/// control leaks out of the subspace.
pub fn subspace_reduce<R: Real>(h: &HamiltonianPair<R>) -> Result<HamiltonianPair<R>, ModelError> {
    if h.reduced {
        return Err(ModelError::AlreadyReduced);
    }
    if (h.asymmetry - R::one()).abs() > R::epsilon() {
        return Err(ModelError::AsymmetricCoupling {
            k: h.asymmetry.to_f64_lossy(),
        });
    }
    let cols = subspace_vectors::<R>(h.basis);
    let leak = off_block_norm(&h.h0, &cols).max(off_block_norm(&h.h1, &cols));
    if leak > R::loosen(INVARIANCE_TOL) {
        return Err(ModelError::NotInvariant {
            off_block: leak.to_f64_lossy(),
        });
    }
    Ok(HamiltonianPair {
        h0: h.h0.compress(&cols),
        h1: h.h1.compress(&cols),
        basis: h.basis,
        reduced: true,
        asymmetry: h.asymmetry,
    })
}

/// Largest off-block norm of either Hamiltonian with respect to the subspace.
pub fn subspace_leakage<R: Real>(h: &HamiltonianPair<R>) -> R {
    let cols = subspace_vectors::<R>(h.basis);
    off_block_norm(&h.h0, &cols).max(off_block_norm(&h.h1, &cols))
}

/// 4×2 isometry with the subspace vectors as columns, applied as `V ρ V†`.
pub fn embed_subspace<R: Real>(rho2: &CMat<R>, basis: Basis) -> CMat<R> {
    let cols = subspace_vectors::<R>(basis);
    CMat::from_fn(4, |i, j| {
        let mut acc = C::zero();
        for a in 0..2 {
            for b in 0..2 {
                acc += cols[a][i] * rho2[(a, b)] * cols[b][j].conj();
            }
        }
        acc
    })
}

/// `V† ρ V`
pub fn restrict_subspace<R: Real>(rho4: &CMat<R>, basis: Basis) -> CMat<R> {
    rho4.compress(&subspace_vectors::<R>(basis))
}

/// Populations of `S = span{|++⟩, |−−⟩}` and of its complement.
pub fn subspace_populations<R: Real>(rho: &Density<R>, basis: Basis) -> (R, R) {
    let p_s = restrict_subspace(rho.mat(), basis).trace().re;
    let p_perp = rho.mat().trace().re - p_s;
    (p_s, p_perp)
}

/// Lifts a reduced-subspace state back into the four-level space.
pub fn embed_state<R: Real>(rho2: &Density<R>, basis: Basis) -> Density<R> {
    Density::new_unchecked(embed_subspace(rho2.mat(), basis))
}
