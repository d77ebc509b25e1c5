//! Integral quadratic lattices and exact arithmetic on them.
//!
//! A lattice is a symmetric non-degenerate integer Gram matrix together with
//! a positive rational Fujiki constant `c` and the half-dimension `n`, so the
//! degree-`2n` form `v -> c * q(v,v)^n` is available alongside the bilinear
//! form itself. Inertia signatures are computed by exact rational congruence
//! diagonalization; no floating point enters any integrality decision.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::enumerate;
use crate::mat::{
    integer_kernel, primitive_int_row, ratio_to_f64, rationalize_f64, row_hnf, IMatrix,
};

/// Denominator cap when probing float vectors for hidden rational directions.
pub const RATIONALIZE_MAX_DEN: u64 = 10_000;

/// Relative tolerance for accepting a rational reconstruction of a float.
pub const RATIONALIZE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    DimensionMismatch { expected: usize, got: usize },
    NotSquare,
    NotSymmetric,
    Degenerate,
    NonPositiveFujikiConstant,
    InvalidHalfDim,
    RankTooSmall { rank: usize },
    WrongSignature { pos: usize, neg: usize, zero: usize },
    IsotropicReflection,
    NonIntegralReflection,
    NotFujikiForm(&'static str),
    SignatureConstraint,
    NonPositivePlane,
    HeightBoundTooSmall,
    NonFiniteCoordinate,
}

impl core::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::NotSquare => write!(f, "gram matrix must be square"),
            Self::NotSymmetric => write!(f, "gram matrix is not symmetric"),
            Self::Degenerate => write!(f, "gram matrix is degenerate (zero determinant)"),
            Self::NonPositiveFujikiConstant => write!(f, "fujiki constant must be positive"),
            Self::InvalidHalfDim => write!(f, "half_dim must be at least 1"),
            Self::RankTooSmall { rank } => {
                write!(f, "rank must be at least 4 for a period lattice, got {rank}")
            }
            Self::WrongSignature { pos, neg, zero } => write!(
                f,
                "signature must be (3, rank-3); got {pos} positive, {neg} negative, {zero} zero"
            ),
            Self::IsotropicReflection => {
                write!(f, "reflection vector is isotropic: q(delta, delta) = 0")
            }
            Self::NonIntegralReflection => write!(
                f,
                "reflection is not integral: q(delta, delta) does not divide 2*q(v, delta) on the basis"
            ),
            Self::NotFujikiForm(why) => write!(f, "input is not of the form c*q(v,v)^n: {why}"),
            Self::SignatureConstraint => write!(
                f,
                "recovered form fails the (3, rank-3) signature constraint for both signs"
            ),
            Self::NonPositivePlane => write!(f, "(a, b) does not span a positive 2-plane"),
            Self::HeightBoundTooSmall => write!(f, "height bound must be at least 1"),
            Self::NonFiniteCoordinate => write!(f, "vector has a non-finite coordinate"),
        }
    }
}

/// Integer vector in lattice coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector {
    coords: Vec<BigInt>,
}

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        Self { coords }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn basis_vector(rank: usize, index: usize) -> Self {
        let mut coords = vec![BigInt::zero(); rank];
        coords[index] = BigInt::one();
        Self::new(coords)
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(crate::mat::big_to_f64).collect()
    }
}

/// Real-coefficient vector in lattice coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    coords: Vec<f64>,
}

impl RealVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, LatticeError> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(LatticeError::NonFiniteCoordinate);
        }
        Ok(Self { coords })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self, LatticeError> {
        Self::new(coords.to_vec())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Integer matrix preserving the Gram matrix, with optional word provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryElement {
    matrix: IMatrix,
    word: Option<Vec<usize>>,
}

impl IsometryElement {
    pub fn new(matrix: IMatrix, word: Option<Vec<usize>>) -> Self {
        Self { matrix, word }
    }

    pub fn identity(rank: usize) -> Self {
        Self::new(IMatrix::identity(rank), Some(Vec::new()))
    }

    pub fn matrix(&self) -> &IMatrix {
        &self.matrix
    }

    pub fn word(&self) -> Option<&[usize]> {
        self.word.as_deref()
    }

    /// `self * other` (apply `other` first when acting on column vectors).
    pub fn compose(&self, other: &Self) -> Self {
        let word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => {
                let mut w = a.clone();
                w.extend_from_slice(b);
                Some(w)
            }
            _ => None,
        };
        Self::new(self.matrix.mul(&other.matrix), word)
    }

    pub fn apply_int(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.matrix.apply(v)
    }
}

/// Basis of a sublattice, stored as independent integer vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SublatticeBasis {
    vectors: Vec<LatticeVector>,
    rank_value: usize,
}

impl SublatticeBasis {
    pub fn from_vectors(vectors: Vec<LatticeVector>) -> Self {
        let rank_value = vectors.len();
        Self { vectors, rank_value }
    }

    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    pub fn rank_value(&self) -> usize {
        self.rank_value
    }
}

/// Integral quadratic lattice: Gram matrix, Fujiki constant, half-dimension.
#[derive(Debug, Clone)]
pub struct QuadraticLattice {
    rank: usize,
    gram: IMatrix,
    gram_real: Vec<Vec<f64>>,
    fujiki_constant: BigRational,
    half_dim: u32,
    signature: (usize, usize, usize),
}

impl QuadraticLattice {
    /// Validates symmetry, non-degeneracy, `c > 0` and `n >= 1`.
    ///
    /// The stricter period-lattice constraints (rank at least 4, signature
    /// `(3, rank-3)`) are checked separately by [`require_period_grade`],
    /// so that small forms remain usable for reflection and form arithmetic.
    ///
    /// [`require_period_grade`]: Self::require_period_grade
    pub fn new(
        gram: IMatrix,
        fujiki_constant: BigRational,
        half_dim: u32,
    ) -> Result<Self, LatticeError> {
        if !gram.is_square() {
            return Err(LatticeError::NotSquare);
        }
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        if !fujiki_constant.is_positive() {
            return Err(LatticeError::NonPositiveFujikiConstant);
        }
        if half_dim == 0 {
            return Err(LatticeError::InvalidHalfDim);
        }
        let signature = signature_of(&gram)?;
        if signature.2 != 0 {
            return Err(LatticeError::Degenerate);
        }
        let gram_real = gram.to_f64_rows();
        Ok(Self {
            rank: gram.n_rows(),
            gram,
            gram_real,
            fujiki_constant,
            half_dim,
            signature,
        })
    }

    /// Shorthand with `c = 1`, `n = 1` for form-level work in tests and docs.
    pub fn from_gram(gram: IMatrix) -> Result<Self, LatticeError> {
        Self::new(gram, BigRational::one(), 1)
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self, LatticeError> {
        Self::from_gram(IMatrix::diagonal(entries))
    }

    /// Period-lattice constraints: rank at least 4 and signature `(3, rank-3)`.
    pub fn require_period_grade(&self) -> Result<(), LatticeError> {
        if self.rank < 4 {
            return Err(LatticeError::RankTooSmall { rank: self.rank });
        }
        let (pos, neg, zero) = self.signature;
        if pos != 3 || neg != self.rank - 3 {
            return Err(LatticeError::WrongSignature { pos, neg, zero });
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &IMatrix {
        &self.gram
    }

    pub fn gram_real(&self) -> &[Vec<f64>] {
        &self.gram_real
    }

    pub fn fujiki_constant(&self) -> &BigRational {
        &self.fujiki_constant
    }

    pub fn half_dim(&self) -> u32 {
        self.half_dim
    }

    /// Inertia signature `(positive, negative, zero)` of the Gram matrix.
    pub fn signature(&self) -> (usize, usize, usize) {
        self.signature
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.determinant()
    }

    fn check_len(&self, len: usize) -> Result<(), LatticeError> {
        if len != self.rank {
            return Err(LatticeError::DimensionMismatch {
                expected: self.rank,
                got: len,
            });
        }
        Ok(())
    }

    /// `u^T * gram * v`, exact.
    pub fn evaluate_int(&self, u: &LatticeVector, v: &LatticeVector) -> Result<BigInt, LatticeError> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let gv = self.gram.apply(v.coords());
        let mut acc = BigInt::zero();
        for (a, b) in u.coords().iter().zip(gv.iter()) {
            acc += a * b;
        }
        Ok(acc)
    }

    pub fn evaluate_rational(
        &self,
        u: &[BigRational],
        v: &[BigRational],
    ) -> Result<BigRational, LatticeError> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let mut acc = BigRational::zero();
        for (r, ur) in u.iter().enumerate() {
            let mut row_acc = BigRational::zero();
            for (c, vc) in v.iter().enumerate() {
                row_acc += BigRational::from_integer(self.gram.get(r, c).clone()) * vc;
            }
            acc += ur * row_acc;
        }
        Ok(acc)
    }

    pub fn evaluate_real(&self, u: &[f64], v: &[f64]) -> Result<f64, LatticeError> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        Ok(self.pair_real(u, v))
    }

    /// Unchecked real pairing for hot paths; lengths must match the rank.
    pub(crate) fn pair_real(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (r, ur) in u.iter().enumerate() {
            let row = &self.gram_real[r];
            let mut row_acc = 0.0;
            for (c, vc) in v.iter().enumerate() {
                row_acc += row[c] * vc;
            }
            acc += ur * row_acc;
        }
        acc
    }

    /// Rows `gram * v_k` used as linear constraints `<x, row> = q(x, v_k)`.
    pub(crate) fn pairing_rows_real(&self, vectors: &[&[f64]]) -> Vec<Vec<f64>> {
        vectors
            .iter()
            .map(|v| {
                (0..self.rank)
                    .map(|r| {
                        let row = &self.gram_real[r];
                        v.iter().zip(row.iter()).map(|(a, b)| a * b).sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// The degree-`2n` form `c * q(v,v)^n`, exact.
    pub fn fujiki_form(&self, v: &LatticeVector) -> Result<BigRational, LatticeError> {
        let q = self.evaluate_int(v, v)?;
        Ok(&self.fujiki_constant * BigRational::from_integer(int_pow(&q, self.half_dim)))
    }

    /// True iff `g^T * gram * g = gram` exactly.
    pub fn is_isometry(&self, g: &IMatrix) -> Result<bool, LatticeError> {
        if !g.is_square() {
            return Err(LatticeError::NotSquare);
        }
        self.check_len(g.n_rows())?;
        Ok(g.transpose().mul(&self.gram).mul(g) == self.gram)
    }

    /// Reflection `v -> v - (2 q(v,delta) / q(delta,delta)) delta` as an exact
    /// integer matrix, when it is integral.
    pub fn reflection(&self, delta: &LatticeVector) -> Result<IsometryElement, LatticeError> {
        self.check_len(delta.len())?;
        let norm = self.evaluate_int(delta, delta)?;
        if norm.is_zero() {
            return Err(LatticeError::IsotropicReflection);
        }
        let gd = self.gram.apply(delta.coords());
        let mut coeffs = Vec::with_capacity(self.rank);
        for pairing in &gd {
            let twice: BigInt = pairing * 2;
            let (q, r) = twice.div_rem(&norm);
            if !r.is_zero() {
                return Err(LatticeError::NonIntegralReflection);
            }
            coeffs.push(q);
        }
        let matrix = IMatrix::from_fn(self.rank, self.rank, |i, j| {
            let mut entry = -(&coeffs[j] * &delta.coords()[i]);
            if i == j {
                entry += BigInt::one();
            }
            entry
        });
        Ok(IsometryElement::new(matrix, None))
    }

    /// The Neron-Severi sublattice of the plane spanned by `(a, b)`:
    /// integer vectors orthogonal to both under `q`.
    ///
    /// When both inputs hide small rational directions (reconstructed with
    /// denominators up to [`RATIONALIZE_MAX_DEN`] at relative accuracy
    /// [`RATIONALIZE_TOL`]) the kernel is computed exactly over the rationals
    /// and `height_bound`/`eps` are ignored. Otherwise the result is the
    /// bounded-height enumeration: a basis of the span of all lattice vectors
    /// with coordinates in `[-height_bound, height_bound]` that pair below
    /// `eps` with the q-normalized inputs, honest only at that height.
    pub fn ns_sublattice(
        &self,
        a: &RealVector,
        b: &RealVector,
        height_bound: i64,
        eps: f64,
    ) -> Result<SublatticeBasis, LatticeError> {
        self.check_len(a.coords().len())?;
        self.check_len(b.coords().len())?;
        if height_bound < 1 {
            return Err(LatticeError::HeightBoundTooSmall);
        }
        if let (Some(ra), Some(rb)) = (
            rationalize_vector(a.coords()),
            rationalize_vector(b.coords()),
        ) {
            return self.ns_sublattice_exact(&ra, &rb);
        }
        let qaa = self.pair_real(a.coords(), a.coords());
        let qbb = self.pair_real(b.coords(), b.coords());
        let qab = self.pair_real(a.coords(), b.coords());
        let scale = eucl_norm_sq(a.coords()) * eucl_norm_sq(b.coords());
        if qaa <= 0.0 || qaa * qbb - qab * qab <= eps * scale {
            return Err(LatticeError::NonPositivePlane);
        }
        let a_unit: Vec<f64> = a.coords().iter().map(|x| x / qaa.sqrt()).collect();
        let b_unit: Vec<f64> = b.coords().iter().map(|x| x / qbb.sqrt()).collect();
        let rows = self.pairing_rows_real(&[&a_unit, &b_unit]);
        let sols = enumerate::bounded_solutions(&rows, height_bound, eps);
        let int_rows: Vec<Vec<BigInt>> = sols
            .iter()
            .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let basis = row_hnf(int_rows);
        Ok(SublatticeBasis::from_vectors(
            basis.into_iter().map(LatticeVector::new).collect(),
        ))
    }

    /// Exact Neron-Severi kernel for rational plane coordinates.
    pub fn ns_sublattice_exact(
        &self,
        a: &[BigRational],
        b: &[BigRational],
    ) -> Result<SublatticeBasis, LatticeError> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let qaa = self.evaluate_rational(a, a)?;
        let qbb = self.evaluate_rational(b, b)?;
        let qab = self.evaluate_rational(a, b)?;
        if !qaa.is_positive() || !(&qaa * &qbb - &qab * &qab).is_positive() {
            return Err(LatticeError::NonPositivePlane);
        }
        let row_a = self.rational_pairing_row(a);
        let row_b = self.rational_pairing_row(b);
        let rows = vec![primitive_int_row(&row_a), primitive_int_row(&row_b)];
        let kernel = integer_kernel(&rows, self.rank);
        Ok(SublatticeBasis::from_vectors(
            kernel.into_iter().map(LatticeVector::new).collect(),
        ))
    }

    fn rational_pairing_row(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.rank)
            .map(|r| {
                let mut acc = BigRational::zero();
                for (c, vc) in v.iter().enumerate() {
                    acc += BigRational::from_integer(self.gram.get(r, c).clone()) * vc;
                }
                acc
            })
            .collect()
    }
}

pub(crate) fn eucl_norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Reconstruct a float vector as a rational direction: scale by the largest
/// coordinate, then demand every entry be a small-denominator rational.
pub fn rationalize_vector(v: &[f64]) -> Option<Vec<BigRational>> {
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if vmax == 0.0 || !vmax.is_finite() {
        return None;
    }
    v.iter()
        .map(|x| rationalize_f64(x / vmax, RATIONALIZE_MAX_DEN, RATIONALIZE_TOL))
        .collect()
}

/// Inertia signature of a symmetric integer matrix by exact congruence
/// diagonalization over the rationals.
pub fn signature_of(gram: &IMatrix) -> Result<(usize, usize, usize), LatticeError> {
    if !gram.is_square() {
        return Err(LatticeError::NotSquare);
    }
    if !gram.is_symmetric() {
        return Err(LatticeError::NotSymmetric);
    }
    let n = gram.n_rows();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| BigRational::from_integer(gram.get(r, c).clone()))
                .collect()
        })
        .collect();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for i in 0..n {
        if m[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(i, j);
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| !m[i][j].is_zero()) {
                // All remaining diagonal entries vanish; merge row/col j into i
                // so the new diagonal entry is 2*m[i][j] != 0.
                for c in 0..n {
                    let s = &m[i][c] + &m[j][c];
                    m[i][c] = s;
                }
                for row in m.iter_mut() {
                    let s = &row[i] + &row[j];
                    row[i] = s;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let pivot = m[i][i].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // Row-eliminate below the pivot against a snapshot; the mirrored
        // column operations then reduce to clearing row i by symmetry.
        let pivot_row = m[i].clone();
        for j in (i + 1)..n {
            if m[j][i].is_zero() {
                continue;
            }
            let factor = &m[j][i] / &pivot;
            for c in i..n {
                let s = &m[j][c] - &factor * &pivot_row[c];
                m[j][c] = s;
            }
        }
        for c in (i + 1)..n {
            m[i][c] = BigRational::zero();
        }
    }
    Ok((pos, neg, zero))
}

fn int_pow(base: &BigInt, exp: u32) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Recover the primitive integral form `q` and the constant `c > 0` from the
/// degree-`2n` evaluator `F(v) = c * q(v,v)^n`.
///
/// The mixed `[t s]` coefficients of `F(v0 + t e_i + s e_j)` are extracted by
/// exact interpolation; subtracting the rank-one correction built from first
/// derivatives leaves a matrix proportional to `q`. The scale is fixed by
/// primitivity (gcd of Gram entries), the sign by `c > 0` for odd `n` and by
/// the `(3, rank-3)` signature otherwise. If both signs satisfy the signature
/// constraint (possible only at rank 6), the representative whose first
/// nonzero entry is positive is returned.
pub fn recover_bbf<F>(f: F, rank: usize, n: u32) -> Result<(IMatrix, BigRational), LatticeError>
where
    F: Fn(&[BigInt]) -> BigRational,
{
    if rank == 0 {
        return Err(LatticeError::NotSquare);
    }
    if n == 0 {
        return Err(LatticeError::InvalidHalfDim);
    }
    let probes = probe_vectors(rank);
    let (v0, f0) = probes
        .iter()
        .map(|v| (v, f(v)))
        .find(|(_, fv)| !fv.is_zero())
        .map(|(v, fv)| (v.clone(), fv))
        .ok_or(LatticeError::NotFujikiForm("form vanishes on all probe points"))?;

    let deg = 2 * n as usize;
    let correction = BigRational::new(BigInt::from(n as i64 - 1), BigInt::from(n as i64));

    // Univariate slices through v0 give first derivatives and diagonal curvature.
    let mut d1 = Vec::with_capacity(rank);
    let mut diag = Vec::with_capacity(rank);
    for i in 0..rank {
        let coeffs = line_coefficients(&f, &v0, &unit(rank, i), deg);
        d1.push(coeffs[1].clone());
        diag.push(BigRational::from_integer(BigInt::from(2)) * &coeffs[2]);
    }

    let mut g_raw = vec![vec![BigRational::zero(); rank]; rank];
    for i in 0..rank {
        g_raw[i][i] = &diag[i] - &correction * &d1[i] * &d1[i] / &f0;
        for j in (i + 1)..rank {
            let a11 = mixed_coefficient(&f, &v0, &unit(rank, i), &unit(rank, j), deg);
            let entry = &a11 - &correction * &d1[i] * &d1[j] / &f0;
            g_raw[i][j] = entry.clone();
            g_raw[j][i] = entry;
        }
    }

    // Clear denominators and divide by the content to reach a primitive
    // integral representative of the ray through q.
    let mut lcm = BigInt::one();
    for row in &g_raw {
        for x in row {
            lcm = lcm.lcm(x.denom());
        }
    }
    let scaled = IMatrix::from_fn(rank, rank, |r, c| {
        g_raw[r][c].numer() * (&lcm / g_raw[r][c].denom())
    });
    let content = scaled.content();
    if content.is_zero() {
        return Err(LatticeError::NotFujikiForm("polarization vanishes identically"));
    }
    let base = scaled.div_exact(&content);

    let mut accepted: Vec<(IMatrix, BigRational)> = Vec::new();
    for candidate in [base.clone(), base.neg()] {
        let qv0 = quad_value(&candidate, &v0);
        if qv0.is_zero() {
            continue;
        }
        let c = &f0 / BigRational::from_integer(int_pow(&qv0, n));
        if !c.is_positive() {
            continue;
        }
        let (pos, neg, zero) = signature_of(&candidate)?;
        if pos == 3 && zero == 0 && neg == rank.saturating_sub(3) && rank >= 4 {
            accepted.push((candidate, c));
        }
    }
    let (q, c) = match accepted.len() {
        0 => return Err(LatticeError::SignatureConstraint),
        1 => accepted.pop().expect("len checked"),
        _ => accepted
            .into_iter()
            .find(|(m, _)| m.is_lex_positive())
            .ok_or(LatticeError::SignatureConstraint)?,
    };

    // Residual check: the fit must reproduce the evaluator exactly.
    for v in &probes {
        let expected = &c * BigRational::from_integer(int_pow(&quad_value(&q, v), n));
        if f(v) != expected {
            return Err(LatticeError::NotFujikiForm("nonzero residual after fit"));
        }
    }
    Ok((q, c))
}

/// Primitive representative of a form-constant pair: divides the Gram matrix
/// by its content, folds the matching power into the constant, and fixes the
/// sign the same way [`recover_bbf`] does (positive constant for odd `n`, the
/// `(3, rank-3)` signature otherwise, lex-positive entries on a tie).
pub fn normalize_form(
    gram: &IMatrix,
    c: &BigRational,
    n: u32,
) -> Result<(IMatrix, BigRational), LatticeError> {
    if !gram.is_square() {
        return Err(LatticeError::NotSquare);
    }
    if n == 0 {
        return Err(LatticeError::InvalidHalfDim);
    }
    let content = gram.content();
    if content.is_zero() {
        return Err(LatticeError::Degenerate);
    }
    let base = gram.div_exact(&content);
    let scale = BigRational::from_integer(int_pow(&content, n));
    let rank = gram.n_rows();
    let mut accepted: Vec<(IMatrix, BigRational)> = Vec::new();
    for (candidate, flip) in [(base.clone(), false), (base.neg(), true)] {
        // F = c * (content * base)^n = (c * content^n * (-1)^(n * flip)) * candidate^n.
        let mut c_adj = c * &scale;
        if flip && n % 2 == 1 {
            c_adj = -c_adj;
        }
        if !c_adj.is_positive() {
            continue;
        }
        let (pos, neg, zero) = signature_of(&candidate)?;
        if pos == 3 && zero == 0 && rank >= 4 && neg == rank - 3 {
            accepted.push((candidate, c_adj));
        }
    }
    match accepted.len() {
        0 => Err(LatticeError::SignatureConstraint),
        1 => Ok(accepted.pop().expect("len checked")),
        _ => accepted
            .into_iter()
            .find(|(m, _)| m.is_lex_positive())
            .ok_or(LatticeError::SignatureConstraint),
    }
}

fn quad_value(m: &IMatrix, v: &[BigInt]) -> BigInt {
    let mv = m.apply(v);
    let mut acc = BigInt::zero();
    for (a, b) in v.iter().zip(mv.iter()) {
        acc += a * b;
    }
    acc
}

fn unit(rank: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); rank];
    v[i] = BigInt::one();
    v
}

/// Deterministic probe set: basis vectors, pair sums/differences, and a few
/// denser points so a residual check can reject non-Fujiki inputs.
fn probe_vectors(rank: usize) -> Vec<Vec<BigInt>> {
    let mut probes = Vec::new();
    for i in 0..rank {
        probes.push(unit(rank, i));
    }
    for i in 0..rank {
        for j in (i + 1)..rank {
            let mut plus = unit(rank, i);
            plus[j] = BigInt::one();
            probes.push(plus);
            let mut minus = unit(rank, i);
            minus[j] = -BigInt::one();
            probes.push(minus);
        }
    }
    probes.push((0..rank).map(|k| BigInt::from(1 + (k as i64 % 3))).collect());
    probes.push((0..rank).map(|k| BigInt::from(if k % 2 == 0 { 2 } else { -1 })).collect());
    probes.push((0..rank).map(|k| BigInt::from(k as i64 + 1)).collect());
    probes
}

/// Exact coefficients of `t -> f(v0 + t u)` from values at `t = 0..=deg`.
fn line_coefficients<F>(f: &F, v0: &[BigInt], u: &[BigInt], deg: usize) -> Vec<BigRational>
where
    F: Fn(&[BigInt]) -> BigRational,
{
    let values: Vec<BigRational> = (0..=deg as i64)
        .map(|t| {
            let point: Vec<BigInt> = v0
                .iter()
                .zip(u.iter())
                .map(|(a, b)| a + b * BigInt::from(t))
                .collect();
            f(&point)
        })
        .collect();
    interpolate_coefficients(&values)
}

/// Exact `[t s]` coefficient of `(t, s) -> f(v0 + t u + s w)`.
fn mixed_coefficient<F>(
    f: &F,
    v0: &[BigInt],
    u: &[BigInt],
    w: &[BigInt],
    deg: usize,
) -> BigRational
where
    F: Fn(&[BigInt]) -> BigRational,
{
    // [t^1] at fixed s is a polynomial of degree <= deg-1 in s.
    let phi: Vec<BigRational> = (0..deg as i64)
        .map(|s| {
            let shifted: Vec<BigInt> = v0
                .iter()
                .zip(w.iter())
                .map(|(a, b)| a + b * BigInt::from(s))
                .collect();
            line_coefficients(f, &shifted, u, deg)[1].clone()
        })
        .collect();
    interpolate_coefficients(&phi)[1].clone()
}

/// Monomial coefficients of the polynomial interpolating `values` at nodes
/// `0, 1, ..., len-1`, via Newton divided differences. Exact.
fn interpolate_coefficients(values: &[BigRational]) -> Vec<BigRational> {
    let d = values.len() - 1;
    let mut dd = values.to_vec();
    for level in 1..=d {
        for i in (level..=d).rev() {
            let gap = BigRational::from_integer(BigInt::from(level as i64));
            dd[i] = (&dd[i] - &dd[i - 1]) / gap;
        }
    }
    let mut coeffs = vec![BigRational::zero(); d + 1];
    let mut basis = vec![BigRational::one()];
    for (k, dk) in dd.iter().enumerate() {
        for (idx, b) in basis.iter().enumerate() {
            coeffs[idx] += dk * b;
        }
        if k < d {
            let node = BigRational::from_integer(BigInt::from(k as i64));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (idx, b) in basis.iter().enumerate() {
                next[idx + 1] += b;
                next[idx] -= b * &node;
            }
            basis = next;
        }
    }
    coeffs
}

/// Exact rational formatted as `p/q` (or `p` when integral); used in errors
/// and by the IO layer.
pub fn ratio_to_string(x: &BigRational) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if x.denom().is_one() {
        let _ = write!(s, "{}", x.numer());
    } else {
        let _ = write!(s, "{}/{}", x.numer(), x.denom());
    }
    s
}

pub fn ratio_as_f64(x: &BigRational) -> f64 {
    ratio_to_f64(x)
}
