//! Dense complex matrices and the handful of decompositions the simulator needs.
//!
//! Everything here targets the tiny Hilbert spaces of one or two qubits, so
//! matrices are stored densely in row-major order with no attempt at blocking
//! or sparsity.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{c, cr, Real, C};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("expected {expected} entries for a square matrix, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat<R: Real> {
    dim: usize,
    data: Vec<C<R>>,
}

impl<R: Real> fmt::Debug for CMat<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<R: Real> CMat<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<R>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; the length must be a perfect square.
    pub fn from_vec(data: Vec<C<R>>) -> Result<Self, LinalgError> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if dim * dim != data.len() {
            return Err(LinalgError::BadShape {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Real-valued rows, convenient for writing down textbook matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| cr(rows[i][j]))
    }

    pub fn diag(entries: &[C<R>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn real_diag(entries: &[R]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = c(*x, R::zero());
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C<R>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C<R>] {
        &mut self.data
    }

    pub fn trace(&self) -> C<R> {
        (0..self.dim).map(|i| self[(i, i)]).fold(C::zero(), |a, b| a + b)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// Element-wise complex conjugate (basis dependent).
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C<R>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: R) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C<R>, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `u · self · u†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.dagger())
    }

    pub fn apply(&self, v: &[C<R>]) -> Vec<C<R>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self[(i, j)] * v[j])
                    .fold(C::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Squared Hilbert–Schmidt norm, `Tr(a†a)`.
    pub fn hs_norm_sqr(&self) -> R {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hilbert–Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> R {
        self.hs_norm_sqr().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> R {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<R>())
            .fold(R::zero(), R::max)
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().map(|z| z.norm()).fold(R::zero(), R::max)
    }

    /// `‖a − a†‖` in the Hilbert–Schmidt norm.
    pub fn hermiticity_error(&self) -> R {
        let n = self.dim;
        let mut acc = R::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: R) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn distance(&self, other: &Self) -> R {
        (self - other).hs_norm()
    }

    /// `‖u†u − I‖`
    pub fn unitarity_error(&self) -> R {
        self.dagger()
            .matmul(self)
            .distance(&Self::identity(self.dim))
    }

    /// Sub-matrix `v† · self · v` where the columns of `v` are given as vectors.
    pub fn compress(&self, columns: &[Vec<C<R>>]) -> Self {
        let m = columns.len();
        let images: Vec<Vec<C<R>>> = columns.iter().map(|v| self.apply(v)).collect();
        Self::from_fn(m, |i, j| inner(&columns[i], &images[j]))
    }
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner<R: Real>(a: &[C<R>], b: &[C<R>]) -> C<R> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .fold(C::zero(), |s, t| s + t)
}

impl<R: Real> Index<(usize, usize)> for CMat<R> {
    type Output = C<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for CMat<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<R> {
        &mut self.data[i * self.dim + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<'a, R: Real> $tr<&'a CMat<R>> for &'a CMat<R> {
            type Output = CMat<R>;
            fn $f(self, rhs: &'a CMat<R>) -> CMat<R> {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                CMat {
                    dim: self.dim,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a $op *b).collect(),
                }
            }
        }
        impl<R: Real> $tr<CMat<R>> for CMat<R> {
            type Output = CMat<R>;
            fn $f(self, rhs: CMat<R>) -> CMat<R> {
                (&self).$f(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl<'a, R: Real> Mul<&'a CMat<R>> for &'a CMat<R> {
    type Output = CMat<R>;
    fn mul(self, rhs: &'a CMat<R>) -> CMat<R> {
        self.matmul(rhs)
    }
}

impl<R: Real> Mul<CMat<R>> for CMat<R> {
    type Output = CMat<R>;
    fn mul(self, rhs: CMat<R>) -> CMat<R> {
        self.matmul(&rhs)
    }
}

impl<R: Real> Neg for CMat<R> {
    type Output = CMat<R>;
    fn neg(mut self) -> CMat<R> {
        self.data.iter_mut().for_each(|z| *z = -*z);
        self
    }
}

impl<R: Real> AddAssign<&CMat<R>> for CMat<R> {
    fn add_assign(&mut self, rhs: &CMat<R>) {
        self.axpy(C::one(), rhs);
    }
}

impl<R: Real> SubAssign<&CMat<R>> for CMat<R> {
    fn sub_assign(&mut self, rhs: &CMat<R>) {
        self.axpy(-C::<R>::one(), rhs);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Pauli matrix in the computational (`Z`) basis.
pub fn pauli<R: Real>(which: Pauli) -> CMat<R> {
    let o = C::zero();
    let l = C::one();
    let i = c(R::zero(), R::one());
    let entries = match which {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
    };
    CMat {
        dim: 2,
        data: entries.to_vec(),
    }
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] · b`.
pub fn kron<R: Real>(a: &CMat<R>, b: &CMat<R>) -> CMat<R> {
    let (n, m) = (a.dim, b.dim);
    CMat::from_fn(n * m, |r, s| a[(r / m, s / m)] * b[(r % m, s % m)])
}

/// `ab − ba`
pub fn commutator<R: Real>(a: &CMat<R>, b: &CMat<R>) -> Result<CMat<R>, LinalgError> {
    if a.dim != b.dim {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(&a.matmul(b) - &b.matmul(a))
}

/// Solves `a · x = b` by LU with partial pivoting.
pub fn solve<R: Real>(a: &CMat<R>, b: &CMat<R>) -> Result<CMat<R>, LinalgError> {
    if a.dim != b.dim {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let n = a.dim;
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(R::min_positive_value());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| {
                lu[(p, col)]
                    .norm()
                    .partial_cmp(&lu[(q, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if lu[(pivot, col)].norm() <= scale * R::epsilon() {
            return Err(LinalgError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                lu.data.swap(pivot * n + j, col * n + j);
                x.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = lu[(col, col)];
        for row in col + 1..n {
            let factor = lu[(row, col)] / p;
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let v = lu[(col, j)];
                lu[(row, j)] -= factor * v;
            }
            for j in 0..n {
                let v = x[(col, j)];
                x[(row, j)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = lu[(col, col)];
        for j in 0..n {
            let mut acc = x[(col, j)];
            for k in col + 1..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / p;
        }
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm<R: Real>(a: &CMat<R>) -> CMat<R> {
    let n = a.dim;
    let norm = a.norm_1();
    let s = if norm.to_f64_lossy() > THETA13 {
        (norm.to_f64_lossy() / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale_re(R::lit(2f64.powi(-s)));
    let b = |k: usize| cr::<R>(PADE13[k]);
    let id = CMat::<R>::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = a6.scale(b(13));
    inner_u.axpy(b(11), &a4);
    inner_u.axpy(b(9), &a2);
    let mut u = a6.matmul(&inner_u);
    u.axpy(b(7), &a6);
    u.axpy(b(5), &a4);
    u.axpy(b(3), &a2);
    u.axpy(b(1), &id);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale(b(12));
    inner_v.axpy(b(10), &a4);
    inner_v.axpy(b(8), &a2);
    let mut v = a6.matmul(&inner_v);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), &id);

    let mut r = solve(&(&v - &u), &(&v + &u)).expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh<R: Real> {
    /// Ascending.
    pub values: Vec<R>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat<R>,
}

impl<R: Real> Eigh<R> {
    pub fn vector(&self, k: usize) -> Vec<C<R>> {
        (0..self.vectors.dim).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `U · diag(g(λ)) · U†`
    pub fn map(&self, g: impl Fn(R) -> C<R>) -> CMat<R> {
        let d: Vec<C<R>> = self.values.iter().map(|&l| g(l)).collect();
        CMat::diag(&d).conjugate_by(&self.vectors)
    }

    pub fn reconstruct(&self) -> CMat<R> {
        self.map(|l| c(l, R::zero()))
    }
}

/// Hermitian eigensolver using cyclic complex Jacobi rotations.
pub fn eigh<R: Real>(a: &CMat<R>) -> Result<Eigh<R>, LinalgError> {
    let n = a.dim;
    let scale = a.hs_norm().max(R::one());
    let dev = a.hermiticity_error();
    if dev > R::loosen(1e-10) * scale {
        return Err(LinalgError::NotHermitian {
            deviation: dev.to_f64_lossy(),
        });
    }
    // Symmetrize so roundoff in the input does not leak into the rotations.
    let mut m = CMat::from_fn(n, |i, j| (a[(i, j)] + a[(j, i)].conj()).scale(R::lit(0.5)));
    let mut v = CMat::<R>::identity(n);
    let tiny = R::epsilon() * R::epsilon() * scale * scale;

    for _sweep in 0..64 {
        let off: R = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = m[(p, q)];
                let r = z.norm();
                if r <= R::min_positive_value() {
                    continue;
                }
                let phase = z / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (R::lit(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + R::one()).sqrt());
                let cs = R::one() / (t * t + R::one()).sqrt();
                let sn = t * cs;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = c(cs, R::zero());
                let g_pq = c(sn, R::zero());
                let g_qp = phase.conj() * (-sn);
                let g_qq = phase.conj() * cs;
                // m ← m · G
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * g_pp + miq * g_qp;
                    m[(i, q)] = mip * g_pq + miq * g_qq;
                }
                // m ← G† · m
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = g_pp.conj() * mpj + g_qp.conj() * mqj;
                    m[(q, j)] = g_pq.conj() * mpj + g_qq.conj() * mqj;
                }
                m[(p, q)] = C::zero();
                m[(q, p)] = C::zero();
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * g_pp + viq * g_qp;
                    v[(i, q)] = vip * g_pq + viq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = CMat::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(Eigh { values, vectors })
}

/// `exp(−i·h·t)` for Hermitian `h`, through its eigendecomposition.
pub fn unitary_propagator<R: Real>(h: &CMat<R>, t: R) -> Result<CMat<R>, LinalgError> {
    let e = eigh(h)?;
    Ok(e.map(|l| {
        let phase = -l * t;
        c(phase.cos(), phase.sin())
    }))
}
