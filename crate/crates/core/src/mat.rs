//! Dense arbitrary-precision integer matrices and exact helpers.
//!
//! Everything lattice-level runs on `BigInt`/`BigRational`: isometry and
//! kernel checks are only meaningful when they are exact.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut entry: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(entry(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(entries: &[i64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                BigInt::from(entries[r])
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { BigInt::one() } else { BigInt::zero() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if self.get(r, c) != self.get(c, r) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += self.get(r, k) * other.get(k, c);
            }
            acc
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "vector length must match columns");
        (0..self.rows)
            .map(|r| {
                let mut acc = BigInt::zero();
                for (k, x) in v.iter().enumerate() {
                    acc += self.get(r, k) * x;
                }
                acc
            })
            .collect()
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| -self.get(r, c))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant requires a square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.rows_vec();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n.saturating_sub(1) {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        let det = m[n - 1][n - 1].clone();
        if sign < 0 {
            -det
        } else {
            det
        }
    }

    /// Gcd of the absolute values of all entries; zero for the zero matrix.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for e in &self.data {
            g = g.gcd(e);
        }
        g
    }

    pub fn div_exact(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) / d)
    }

    /// Entries as `f64` (lossy beyond 2^53; callers that need exactness stay integral).
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(big_to_f64).collect())
            .collect()
    }

    /// First nonzero entry in row-major order is positive.
    pub fn is_lex_positive(&self) -> bool {
        self.data
            .iter()
            .find(|e| !e.is_zero())
            .map_or(false, |e| e.is_positive())
    }
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact `f64` to rational conversion through the bit pattern.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(BigRational::zero());
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & 0xf_ffff_ffff_ffff;
    // Subnormals have an implicit leading 0 and exponent -1074.
    let (mantissa, exp) = if exponent == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1 << 52), exponent - 1075)
    };
    let mut numer = BigInt::from(mantissa) * BigInt::from(sign);
    let mut denom = BigInt::one();
    if exp >= 0 {
        numer <<= exp as usize;
    } else {
        denom <<= (-exp) as usize;
    }
    Some(BigRational::new(numer, denom))
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back on a scaled integer division; good to ~1e-18 relative.
        let scale = BigInt::from(1u64 << 60);
        let q = (x.numer() * &scale) / x.denom();
        big_to_f64(&q) / big_to_f64(&scale)
    })
}

/// Best rational approximation `p/q` of `x` with `q <= max_den`, accepted only
/// when it matches to within `tol` relative error. Continued-fraction walk.
pub fn rationalize_f64(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let scale = if x.abs() > 1.0 { x.abs() } else { 1.0 };
    if x.abs() < tol {
        return Some(BigRational::zero());
    }
    let (mut p0, mut q0) = (1i64, 0i64);
    let (mut p1, mut q1) = (0i64, 1i64);
    let mut val = x;
    for _ in 0..64 {
        let a = Float::floor(val);
        if a.abs() > 9.0e17 {
            break;
        }
        let a_int = a as i64;
        let p2 = match a_int.checked_mul(p0).and_then(|t| t.checked_add(p1)) {
            Some(v) => v,
            None => break,
        };
        let q2 = match a_int.checked_mul(q0).and_then(|t| t.checked_add(q1)) {
            Some(v) => v,
            None => break,
        };
        if q2.unsigned_abs() > max_den {
            break;
        }
        p1 = p0;
        q1 = q0;
        p0 = p2;
        q0 = q2;
        let approx = p0 as f64 / q0 as f64;
        if (approx - x).abs() <= tol * scale {
            return Some(BigRational::new(BigInt::from(p0), BigInt::from(q0)));
        }
        let rem = val - a;
        if rem.abs() < 1e-18 {
            break;
        }
        val = 1.0 / rem;
    }
    None
}

/// Scale a rational row to coprime integers (clears denominators, divides content).
pub fn primitive_int_row(row: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in row {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// Returns the nonzero rows: pivots positive, entries above each pivot reduced
/// into `[0, pivot)`. The row lattice is preserved, so every input row is an
/// integer combination of the output.
pub fn row_hnf(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return rows;
    }
    let n_cols = rows[0].len();
    let mut frontier = 0usize;
    for col in 0..n_cols {
        if frontier == rows.len() {
            break;
        }
        // Euclidean reduction among rows >= frontier in this column.
        loop {
            let mut pivot: Option<usize> = None;
            for r in frontier..rows.len() {
                if !rows[r][col].is_zero()
                    && pivot.map_or(true, |p| rows[r][col].abs() < rows[p][col].abs())
                {
                    pivot = Some(r);
                }
            }
            let p = match pivot {
                Some(p) => p,
                None => break,
            };
            rows.swap(frontier, p);
            let mut any_left = false;
            for r in (frontier + 1)..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = div_round(&rows[r][col], &rows[frontier][col]);
                if !q.is_zero() {
                    for c in 0..n_cols {
                        let s = &rows[r][c] - &q * &rows[frontier][c];
                        rows[r][c] = s;
                    }
                }
                if !rows[r][col].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                if rows[frontier][col].is_negative() {
                    for c in 0..n_cols {
                        rows[frontier][c] = -rows[frontier][c].clone();
                    }
                }
                // Canonical form: reduce the rows above into [0, pivot).
                for r in 0..frontier {
                    let q = rows[r][col].div_floor(&rows[frontier][col]);
                    if !q.is_zero() {
                        for c in 0..n_cols {
                            let s = &rows[r][c] - &q * &rows[frontier][c];
                            rows[r][c] = s;
                        }
                    }
                }
                frontier += 1;
                break;
            }
        }
    }
    rows.truncate(frontier);
    rows
}

/// Nearest-integer quotient, used to shrink remainders fast in HNF loops.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let double_r: BigInt = &r * 2;
    if double_r.abs() > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Basis of the integer kernel `{v : A v = 0}` of a small integer matrix given
/// by rows. The kernel of an integer matrix is saturated, so this is a basis
/// of the full sublattice, in HNF for determinism.
pub fn integer_kernel(a_rows: &[Vec<BigInt>], n_cols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = a_rows.to_vec();
    let mut u = IMatrix::identity(n_cols);
    let mut frontier = 0usize;
    for r in 0..m.len() {
        if frontier == n_cols {
            break;
        }
        loop {
            let mut pivot: Option<usize> = None;
            for c in frontier..n_cols {
                if !m[r][c].is_zero() && pivot.map_or(true, |p| m[r][c].abs() < m[r][p].abs()) {
                    pivot = Some(c);
                }
            }
            let p = match pivot {
                Some(p) => p,
                None => break,
            };
            swap_cols(&mut m, &mut u, frontier, p);
            let mut any_left = false;
            for c in (frontier + 1)..n_cols {
                if m[r][c].is_zero() {
                    continue;
                }
                let q = div_round(&m[r][c], &m[r][frontier]);
                if !q.is_zero() {
                    sub_col(&mut m, &mut u, c, frontier, &q);
                }
                if !m[r][c].is_zero() {
                    any_left = true;
                }
            }
            if !any_left {
                frontier += 1;
                break;
            }
        }
    }
    let kernel: Vec<Vec<BigInt>> = (frontier..n_cols)
        .map(|c| (0..n_cols).map(|r| u.get(r, c).clone()).collect())
        .collect();
    row_hnf(kernel)
}

fn swap_cols(m: &mut [Vec<BigInt>], u: &mut IMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in m.iter_mut() {
        row.swap(a, b);
    }
    for r in 0..u.n_rows() {
        let x = u.get(r, a).clone();
        let y = u.get(r, b).clone();
        u.set(r, a, y);
        u.set(r, b, x);
    }
}

/// col_dst -= q * col_src
fn sub_col(m: &mut [Vec<BigInt>], u: &mut IMatrix, dst: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let s = &row[dst] - q * &row[src];
        row[dst] = s;
    }
    for r in 0..u.n_rows() {
        let s = u.get(r, dst) - q * u.get(r, src);
        u.set(r, dst, s);
    }
}
