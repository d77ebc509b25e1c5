//! The period space and its Grassmannian model.
//!
//! A period point is a line `l` in the complexified lattice with
//! `q(l,l) = 0` and `q(l, conj l) > 0`, stored as the real pair
//! `(Re l, Im l)`. Such a line is the same thing as a positive oriented
//! 2-plane: the span of `Re l, Im l` is positive because
//! `q(Re l, Re l) = 2 q(l, conj l) > 0`, and conversely the isotropic lines
//! inside the complexification of a positive plane come in a conjugate pair
//! distinguished by orientation. Hyperkahler 3-planes, their twistor spheres
//! of 2-planes, and the two-component positive cone sit on top of this.
//!
//! Plane distances use principal angles in a fixed auxiliary Euclidean inner
//! product on coordinates; the indefinite form induces no metric on the
//! chart, so the choice is a convention and coverage numbers depend on it.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::lattice::{eucl_norm_sq, LatticeError, QuadraticLattice};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaneError {
    Lattice(LatticeError),
    DegenerateSpan,
    NonPositivePivot,
    NonPositiveExtension,
    NonUnitParameter,
    RankMismatch,
    ReferenceNotPositive,
    NotOrthogonalToPlane,
    InvariantViolated(&'static str),
    DimensionTooSmall { b2: u32 },
}

impl From<LatticeError> for PlaneError {
    fn from(e: LatticeError) -> Self {
        Self::Lattice(e)
    }
}

impl core::fmt::Display for PlaneError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Lattice(e) => write!(f, "{e}"),
            Self::DegenerateSpan => write!(f, "spanning vectors are linearly dependent within tolerance"),
            Self::NonPositivePivot => {
                write!(f, "Gram-Schmidt pivot below tolerance: plane is not positive")
            }
            Self::NonPositiveExtension => write!(
                f,
                "component orthogonal to the plane has non-positive q-norm; cannot extend to a positive 3-plane"
            ),
            Self::NonUnitParameter => write!(f, "twistor parameter must be a unit vector"),
            Self::RankMismatch => write!(f, "planes live in different ambient ranks"),
            Self::ReferenceNotPositive => write!(f, "reference vector must have positive q-norm"),
            Self::NotOrthogonalToPlane => write!(f, "input vector is not orthogonal to the plane"),
            Self::InvariantViolated(what) => write!(f, "period point invariant violated: {what}"),
            Self::DimensionTooSmall { b2 } => {
                write!(f, "second Betti number must be at least 4, got {b2}")
            }
        }
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

fn scaled_sub(v: &[f64], coeff: f64, w: &[f64]) -> Vec<f64> {
    v.iter().zip(w.iter()).map(|(a, b)| a - coeff * b).collect()
}

/// Positive oriented 2-plane with a q-orthonormal ordered basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPlane {
    basis: [Vec<f64>; 2],
}

impl TwoPlane {
    /// Orthonormalizes `(x, y)` under `q`; the ordering fixes the orientation.
    pub fn new(
        lat: &QuadraticLattice,
        x: &[f64],
        y: &[f64],
        eps: f64,
    ) -> Result<Self, PlaneError> {
        lat.evaluate_real(x, y)?;
        let nx = eucl_norm_sq(x);
        let ny = eucl_norm_sq(y);
        if nx == 0.0 || ny == 0.0 {
            return Err(PlaneError::DegenerateSpan);
        }
        let residual = scaled_sub(y, dot(x, y) / nx, x);
        if eucl_norm_sq(&residual) <= eps * eps * ny {
            return Err(PlaneError::DegenerateSpan);
        }
        let qxx = lat.pair_real(x, x);
        if qxx <= eps * nx {
            return Err(PlaneError::NonPositivePivot);
        }
        let inv = qxx.sqrt().recip();
        let bx: Vec<f64> = x.iter().map(|a| a * inv).collect();
        let proj = lat.pair_real(y, &bx);
        let yres = scaled_sub(y, proj, &bx);
        let qyy = lat.pair_real(&yres, &yres);
        if qyy <= eps * eucl_norm_sq(&yres) {
            return Err(PlaneError::NonPositivePivot);
        }
        let inv_y = qyy.sqrt().recip();
        let by: Vec<f64> = yres.iter().map(|a| a * inv_y).collect();
        Ok(Self { basis: [bx, by] })
    }

    /// Basis already q-orthonormal by construction (twistor points, actions
    /// of exact isometries on orthonormal bases).
    pub(crate) fn from_orthonormal(basis: [Vec<f64>; 2]) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> [&[f64]; 2] {
        [&self.basis[0], &self.basis[1]]
    }

    pub fn ambient_rank(&self) -> usize {
        self.basis[0].len()
    }

    /// Euclidean-orthonormal basis of the same unoriented plane; the chart
    /// data that principal-angle distances are computed from.
    pub fn euclid_basis(&self) -> [Vec<f64>; 2] {
        let x = &self.basis[0];
        let y = &self.basis[1];
        let inv = eucl_norm_sq(x).sqrt().recip();
        let e1: Vec<f64> = x.iter().map(|a| a * inv).collect();
        let res = scaled_sub(y, dot(y, &e1), &e1);
        let inv2 = eucl_norm_sq(&res).sqrt().recip();
        let e2: Vec<f64> = res.iter().map(|a| a * inv2).collect();
        [e1, e2]
    }

    /// Principal-angle distance to another plane in the auxiliary Euclidean
    /// metric; zero iff the unoriented planes agree.
    pub fn distance_to(&self, other: &Self) -> Result<f64, PlaneError> {
        if self.ambient_rank() != other.ambient_rank() {
            return Err(PlaneError::RankMismatch);
        }
        let (theta1, theta2) = principal_angles(&self.euclid_basis(), &other.euclid_basis());
        Ok((theta1 * theta1 + theta2 * theta2).sqrt())
    }

    /// Euclidean residual of `v` after projecting onto the plane, relative.
    pub fn contains_vector(&self, v: &[f64], eps: f64) -> bool {
        let [e1, e2] = self.euclid_basis();
        let mut res = scaled_sub(v, dot(v, &e1), &e1);
        res = scaled_sub(&res, dot(&res, &e2), &e2);
        eucl_norm_sq(&res) <= eps * eucl_norm_sq(v).max(f64::MIN_POSITIVE)
    }

    /// Sign of the determinant expressing `other`'s basis in this plane's
    /// basis; positive means equal orientation (meaningful when the
    /// unoriented planes coincide).
    pub fn orientation_against(&self, other: &Self) -> f64 {
        let [e1, e2] = self.euclid_basis();
        let m00 = dot(&e1, &other.basis[0]);
        let m01 = dot(&e1, &other.basis[1]);
        let m10 = dot(&e2, &other.basis[0]);
        let m11 = dot(&e2, &other.basis[1]);
        m00 * m11 - m01 * m10
    }
}

/// Principal angles between planes given by Euclidean-orthonormal bases,
/// ascending. Cosines come from the 2x2 cross-Gram matrix, sines from the
/// residual after projection, so near-equal planes do not lose precision to
/// `acos` conditioning.
pub(crate) fn principal_angles(u: &[Vec<f64>; 2], v: &[Vec<f64>; 2]) -> (f64, f64) {
    let m = [
        [dot(&u[0], &v[0]), dot(&u[0], &v[1])],
        [dot(&u[1], &v[0]), dot(&u[1], &v[1])],
    ];
    let (lc1, lc2) = sym2x2_eigenvalues(
        m[0][0] * m[0][0] + m[1][0] * m[1][0],
        m[0][0] * m[0][1] + m[1][0] * m[1][1],
        m[0][1] * m[0][1] + m[1][1] * m[1][1],
    );
    let cos_desc = [clamp01(lc1.max(0.0).sqrt()), clamp01(lc2.max(0.0).sqrt())];

    // Residual columns b_j = v_j - U (U^T v_j).
    let mut b = [Vec::new(), Vec::new()];
    for j in 0..2 {
        let mut col = v[j].clone();
        col = scaled_sub(&col, m[0][j], &u[0]);
        col = scaled_sub(&col, m[1][j], &u[1]);
        b[j] = col;
    }
    let (ls1, ls2) = sym2x2_eigenvalues(
        eucl_norm_sq(&b[0]),
        dot(&b[0], &b[1]),
        eucl_norm_sq(&b[1]),
    );
    let sin_asc = [clamp01(ls2.max(0.0).sqrt()), clamp01(ls1.max(0.0).sqrt())];

    let theta1 = sin_asc[0].atan2(cos_desc[0]);
    let theta2 = sin_asc[1].atan2(cos_desc[1]);
    (theta1, theta2)
}

fn clamp01(x: f64) -> f64 {
    x.min(1.0).max(0.0)
}

/// Eigenvalues (descending) of the symmetric matrix [[p, q], [q, r]].
pub(crate) fn sym2x2_eigenvalues(p: f64, q: f64, r: f64) -> (f64, f64) {
    let mean = 0.5 * (p + r);
    let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    (mean + disc, mean - disc)
}

/// Period point: the line `re + i im` up to complex scalar, stored with
/// `q(re, re) = 1` after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPoint {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PeriodPoint {
    pub fn new(
        lat: &QuadraticLattice,
        re: &[f64],
        im: &[f64],
        eps: f64,
    ) -> Result<Self, PlaneError> {
        let qrr = lat.evaluate_real(re, re)?;
        let qii = lat.evaluate_real(im, im)?;
        let qri = lat.evaluate_real(re, im)?;
        if qrr <= eps * eucl_norm_sq(re) {
            return Err(PlaneError::InvariantViolated("q(re, re) must be positive"));
        }
        if (qii - qrr).abs() > eps.sqrt() * qrr {
            return Err(PlaneError::InvariantViolated("q(re, re) = q(im, im)"));
        }
        if qri.abs() > eps.sqrt() * qrr {
            return Err(PlaneError::InvariantViolated("q(re, im) = 0"));
        }
        let inv = qrr.sqrt().recip();
        Ok(Self {
            re: re.iter().map(|a| a * inv).collect(),
            im: im.iter().map(|a| a * inv).collect(),
        })
    }

    pub(crate) fn from_normalized(re: Vec<f64>, im: Vec<f64>) -> Self {
        Self { re, im }
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    /// Sine of the Hermitian angle between the two lines in `C^rank`,
    /// computed from the projection residual so that nearly equal lines do
    /// not lose precision; zero iff the lines agree up to a complex scalar.
    pub fn projective_distance(&self, other: &Self) -> f64 {
        let rr = dot(&self.re, &other.re);
        let ii = dot(&self.im, &other.im);
        let ri = dot(&self.re, &other.im);
        let ir = dot(&self.im, &other.re);
        // h = <v, u> / |u|^2 over C with u = self, v = other.
        let norm_u = eucl_norm_sq(&self.re) + eucl_norm_sq(&self.im);
        let norm_v = eucl_norm_sq(&other.re) + eucl_norm_sq(&other.im);
        let h_re = (rr + ii) / norm_u;
        let h_im = (ri - ir) / norm_u;
        // w = v - h u; sin(theta) = |w| / |v|.
        let mut w_norm = 0.0;
        for k in 0..self.re.len() {
            let wr = other.re[k] - (h_re * self.re[k] - h_im * self.im[k]);
            let wi = other.im[k] - (h_re * self.im[k] + h_im * self.re[k]);
            w_norm += wr * wr + wi * wi;
        }
        clamp01((w_norm / norm_v).sqrt())
    }

    /// `q(l, l)` as a complex number `(re, im)`; small for a valid point.
    pub fn isotropy_defect(&self, lat: &QuadraticLattice) -> (f64, f64) {
        let qrr = lat.pair_real(&self.re, &self.re);
        let qii = lat.pair_real(&self.im, &self.im);
        let qri = lat.pair_real(&self.re, &self.im);
        (qrr - qii, 2.0 * qri)
    }

    /// `q(l, conj l) = (q(re,re) + q(im,im)) / ...`, positive for a valid point.
    pub fn pairing_with_conjugate(&self, lat: &QuadraticLattice) -> f64 {
        lat.pair_real(&self.re, &self.re) + lat.pair_real(&self.im, &self.im)
    }
}

/// The oriented plane spanned by `(Re l, Im l)`.
pub fn line_to_plane(
    lat: &QuadraticLattice,
    p: &PeriodPoint,
    eps: f64,
) -> Result<TwoPlane, PlaneError> {
    TwoPlane::new(lat, p.re(), p.im(), eps)
}

/// The period line `x + i y` picked by the orientation; the reversed
/// orientation yields the conjugate line.
pub fn plane_to_line(plane: &TwoPlane) -> PeriodPoint {
    let [x, y] = plane.basis();
    PeriodPoint::from_normalized(x.to_vec(), y.to_vec())
}

/// Positive oriented 3-plane with a q-orthonormal ordered basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreePlane {
    basis: [Vec<f64>; 3],
}

impl ThreePlane {
    pub fn basis(&self) -> [&[f64]; 3] {
        [&self.basis[0], &self.basis[1], &self.basis[2]]
    }

    pub fn ambient_rank(&self) -> usize {
        self.basis[0].len()
    }

    /// Euclidean-orthonormal basis of the same subspace.
    pub(crate) fn euclid_basis(&self) -> [Vec<f64>; 3] {
        let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (i, v) in self.basis.iter().enumerate() {
            let mut res = v.clone();
            for prev in out.iter().take(i) {
                res = scaled_sub(&res, dot(&res, prev), prev);
            }
            let inv = eucl_norm_sq(&res).sqrt().recip();
            out[i] = res.iter().map(|a| a * inv).collect();
        }
        out
    }

    pub fn contains_vector(&self, v: &[f64], eps: f64) -> bool {
        let basis = self.euclid_basis();
        let mut res = v.to_vec();
        for e in &basis {
            res = scaled_sub(&res, dot(&res, e), e);
        }
        eucl_norm_sq(&res) <= eps * eucl_norm_sq(v).max(f64::MIN_POSITIVE)
    }

    pub fn contains_plane(&self, plane: &TwoPlane, eps: f64) -> bool {
        plane
            .basis()
            .iter()
            .all(|v| self.contains_vector(v, eps))
    }

    /// Coordinates of an ambient vector in the q-orthonormal basis of `W`.
    pub fn coordinates_of(&self, lat: &QuadraticLattice, v: &[f64]) -> [f64; 3] {
        [
            lat.pair_real(v, &self.basis[0]),
            lat.pair_real(v, &self.basis[1]),
            lat.pair_real(v, &self.basis[2]),
        ]
    }

    /// The oriented 2-plane in `W` orthogonal to `u = a w1 + b w2 + c w3`,
    /// with the orientation induced from `W`: the returned basis `(p, q)`
    /// satisfies `det(p, q, u) = +1` in `W` coordinates. This parametrizes
    /// the twistor sphere of `W` by the unit sphere.
    pub fn twistor_point(&self, u: &[f64; 3], eps: f64) -> Result<TwoPlane, PlaneError> {
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if (norm - 1.0).abs() > eps.sqrt() {
            return Err(PlaneError::NonUnitParameter);
        }
        let un = [u[0] / norm, u[1] / norm, u[2] / norm];
        // Cross with the least-aligned coordinate axis, then complete the
        // right-handed frame (c1, c2, un).
        let k = (0..3)
            .min_by(|&a, &b| un[a].abs().partial_cmp(&un[b].abs()).expect("finite"))
            .expect("nonempty");
        let mut axis = [0.0f64; 3];
        axis[k] = 1.0;
        let raw = cross3(&un, &axis);
        let inv = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt().recip();
        let c1 = [raw[0] * inv, raw[1] * inv, raw[2] * inv];
        let c2 = cross3(&un, &c1);
        let p1 = self.combine(&c1);
        let p2 = self.combine(&c2);
        Ok(TwoPlane::from_orthonormal([p1, p2]))
    }

    fn combine(&self, coeffs: &[f64; 3]) -> Vec<f64> {
        let rank = self.ambient_rank();
        let mut out = vec![0.0f64; rank];
        for (c, w) in coeffs.iter().zip(self.basis.iter()) {
            for (o, wi) in out.iter_mut().zip(w.iter()) {
                *o += c * wi;
            }
        }
        out
    }
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Extends a positive 2-plane by the q-orthogonal component of `omega`,
/// which must have positive q-norm.
pub fn extend_to_three_plane(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    omega: &[f64],
    eps: f64,
) -> Result<ThreePlane, PlaneError> {
    lat.evaluate_real(omega, omega)?;
    let [x, y] = plane.basis();
    let mut w = scaled_sub(omega, lat.pair_real(omega, x), x);
    w = scaled_sub(&w, lat.pair_real(&w, y), y);
    let wn = eucl_norm_sq(&w);
    if wn <= eps * eucl_norm_sq(omega) {
        return Err(PlaneError::NonPositiveExtension);
    }
    let qww = lat.pair_real(&w, &w);
    if qww <= eps * wn {
        return Err(PlaneError::NonPositiveExtension);
    }
    let inv = qww.sqrt().recip();
    let w3: Vec<f64> = w.iter().map(|a| a * inv).collect();
    Ok(ThreePlane {
        basis: [x.to_vec(), y.to_vec(), w3],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeComponentLabel {
    Plus,
    Minus,
    Outside,
    Null,
}

impl ConeComponentLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::Outside => "outside",
            Self::Null => "null",
        }
    }
}

/// Places `nu` relative to the two components of the positive cone in the
/// signature-(1, rank-3) space orthogonal to the plane. Labels are invariant
/// under positive rescaling of `nu` because the test normalizes first.
pub fn positive_cone_component(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    nu: &[f64],
    reference: &[f64],
    eps: f64,
) -> Result<ConeComponentLabel, PlaneError> {
    lat.evaluate_real(nu, reference)?;
    let nu_norm = eucl_norm_sq(nu).sqrt();
    let ref_norm = eucl_norm_sq(reference).sqrt();
    if nu_norm == 0.0 || ref_norm == 0.0 {
        return Err(PlaneError::InvariantViolated("zero vector"));
    }
    let nu_unit: Vec<f64> = nu.iter().map(|a| a / nu_norm).collect();
    let ref_unit: Vec<f64> = reference.iter().map(|a| a / ref_norm).collect();
    if lat.pair_real(&ref_unit, &ref_unit) <= eps {
        return Err(PlaneError::ReferenceNotPositive);
    }
    let [x, y] = plane.basis();
    for v in [&nu_unit, &ref_unit] {
        if lat.pair_real(v, x).abs() > eps.sqrt() || lat.pair_real(v, y).abs() > eps.sqrt() {
            return Err(PlaneError::NotOrthogonalToPlane);
        }
    }
    let t = lat.pair_real(&nu_unit, &nu_unit);
    if t.abs() <= eps {
        return Ok(ConeComponentLabel::Null);
    }
    if t < 0.0 {
        return Ok(ConeComponentLabel::Outside);
    }
    Ok(if lat.pair_real(&nu_unit, &ref_unit) > 0.0 {
        ConeComponentLabel::Plus
    } else {
        ConeComponentLabel::Minus
    })
}

/// Dimension bookkeeping for a given second Betti number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionReport {
    /// Real dimension of the period space `SO(3,k)/(SO(2) x SO(1,k))`.
    pub perspace_dim: u64,
    /// Dimension of the Kahler cone.
    pub kahler_cone_dim: u64,
    /// Dimension of the space of hyperkahler metrics up to isotopy.
    pub teich_h_dim: u64,
}

pub fn dimension_report(b2: u32) -> Result<DimensionReport, PlaneError> {
    if b2 < 4 {
        return Err(PlaneError::DimensionTooSmall { b2 });
    }
    let b = b2 as u64;
    Ok(DimensionReport {
        perspace_dim: 2 * (b - 2),
        kahler_cone_dim: b - 2,
        teich_h_dim: b * (b - 1) * (b - 2) / 6,
    })
}

/// Geodesic midpoint of two planes in the auxiliary chart metric, built from
/// principal vectors; may fail if the midpoint is not a positive plane.
pub fn plane_midpoint(
    lat: &QuadraticLattice,
    p1: &TwoPlane,
    p2: &TwoPlane,
    eps: f64,
) -> Result<TwoPlane, PlaneError> {
    if p1.ambient_rank() != p2.ambient_rank() {
        return Err(PlaneError::RankMismatch);
    }
    let u = p1.euclid_basis();
    let v = p2.euclid_basis();
    let m = [
        [dot(&u[0], &v[0]), dot(&u[0], &v[1])],
        [dot(&u[1], &v[0]), dot(&u[1], &v[1])],
    ];
    // Right singular vectors of M from the eigenvectors of M^T M.
    let p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let q = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let r = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let angle = 0.5 * (2.0 * q).atan2(p - r);
    let (c, s) = (angle.cos(), angle.sin());
    let v_cols = [[c, s], [-s, c]];
    let mut mid = Vec::with_capacity(2);
    for col in &v_cols {
        // Principal vector in plane 2 and its partner in plane 1.
        let qvec: Vec<f64> = (0..p1.ambient_rank())
            .map(|i| col[0] * v[0][i] + col[1] * v[1][i])
            .collect();
        let mut pvec: Vec<f64> = (0..p1.ambient_rank())
            .map(|i| {
                (m[0][0] * col[0] + m[0][1] * col[1]) * u[0][i]
                    + (m[1][0] * col[0] + m[1][1] * col[1]) * u[1][i]
            })
            .collect();
        let plen = eucl_norm_sq(&pvec).sqrt();
        if plen < 1e-12 {
            // Planes orthogonal along this principal direction: no canonical
            // partner; treat the target direction itself as the midpoint leg.
            mid.push(qvec);
            continue;
        }
        for x in pvec.iter_mut() {
            *x /= plen;
        }
        let cos_t = clamp01(dot(&pvec, &qvec));
        let rvec = scaled_sub(&qvec, cos_t, &pvec);
        let rlen = eucl_norm_sq(&rvec).sqrt();
        if rlen < 1e-12 {
            mid.push(pvec);
            continue;
        }
        let theta = rlen.atan2(cos_t);
        let half = 0.5 * theta;
        let leg: Vec<f64> = pvec
            .iter()
            .zip(rvec.iter())
            .map(|(a, b)| half.cos() * a + half.sin() * b / rlen)
            .collect();
        mid.push(leg);
    }
    TwoPlane::new(lat, &mid[0], &mid[1], eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_EPS;

    fn lat5() -> QuadraticLattice {
        QuadraticLattice::diagonal(&[1, 1, 1, -1, -1]).unwrap()
    }

    fn lat4() -> QuadraticLattice {
        QuadraticLattice::diagonal(&[1, 1, 1, -1]).unwrap()
    }

    fn e(rank: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; rank];
        v[i] = 1.0;
        v
    }

    #[test]
    fn line_to_plane_coordinate_line() {
        let lat = lat4();
        let p = PeriodPoint::new(&lat, &e(4, 0), &e(4, 1), DEFAULT_EPS).unwrap();
        let plane = line_to_plane(&lat, &p, DEFAULT_EPS).unwrap();
        assert_eq!(plane.basis()[0], &e(4, 0)[..]);
        assert_eq!(plane.basis()[1], &e(4, 1)[..]);
    }

    #[test]
    fn complex_rescaling_preserves_oriented_plane() {
        let lat = lat4();
        // l = e1 + i e2 scaled by 2i: re -> -2 e2, im -> 2 e1.
        let re: Vec<f64> = e(4, 1).iter().map(|x| -2.0 * x).collect();
        let im: Vec<f64> = e(4, 0).iter().map(|x| 2.0 * x).collect();
        let p = PeriodPoint::new(&lat, &re, &im, DEFAULT_EPS).unwrap();
        let scaled = line_to_plane(&lat, &p, DEFAULT_EPS).unwrap();
        let base = TwoPlane::new(&lat, &e(4, 0), &e(4, 1), DEFAULT_EPS).unwrap();
        assert!(base.distance_to(&scaled).unwrap() < 1e-12);
        assert!(base.orientation_against(&scaled) > 0.0);
    }

    #[test]
    fn plane_to_line_round_trip_and_conjugate() {
        let lat = lat5();
        let plane = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let l = plane_to_line(&plane);
        let back = line_to_plane(&lat, &l, DEFAULT_EPS).unwrap();
        assert!(plane.distance_to(&back).unwrap() < 1e-12);

        let reversed = TwoPlane::new(&lat, &e(5, 1), &e(5, 0), DEFAULT_EPS).unwrap();
        let conj = plane_to_line(&reversed);
        // Conjugate line: same plane, opposite orientation, distinct line.
        assert!(l.projective_distance(&conj) > 0.9);
    }

    #[test]
    fn period_point_rejects_non_isotropic_pairs() {
        let lat = lat4();
        // q(re,re) = 1, q(im,im) = 2: not a period point.
        let im: Vec<f64> = vec![0.0, 1.0, 1.0, 0.0];
        assert!(matches!(
            PeriodPoint::new(&lat, &e(4, 0), &im, DEFAULT_EPS),
            Err(PlaneError::InvariantViolated(_))
        ));
    }

    #[test]
    fn extend_to_three_plane_examples() {
        let lat = lat5();
        let plane = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let w = extend_to_three_plane(&lat, &plane, &e(5, 2), DEFAULT_EPS).unwrap();
        assert_eq!(w.basis()[2], &e(5, 2)[..]);

        // Isotropic extension direction is rejected.
        let iso: Vec<f64> = vec![0.0, 0.0, 1.0, 1.0, 0.0];
        assert!(matches!(
            extend_to_three_plane(&lat, &plane, &iso, DEFAULT_EPS),
            Err(PlaneError::NonPositiveExtension)
        ));

        // q(2 e3 + e4) = 3: normalized third leg.
        let omega: Vec<f64> = vec![0.0, 0.0, 2.0, 1.0, 0.0];
        let w3 = extend_to_three_plane(&lat, &plane, &omega, DEFAULT_EPS).unwrap();
        let leg = w3.basis()[2];
        let s3 = 3.0f64.sqrt();
        assert!((leg[2] - 2.0 / s3).abs() < 1e-12);
        assert!((leg[3] - 1.0 / s3).abs() < 1e-12);
        let gram = lat.pair_real(leg, leg);
        assert!((gram - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twistor_point_axes_and_antipode() {
        let lat = lat5();
        let plane = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let w = extend_to_three_plane(&lat, &plane, &e(5, 2), DEFAULT_EPS).unwrap();

        let p_i = w.twistor_point(&[1.0, 0.0, 0.0], DEFAULT_EPS).unwrap();
        let expect_23 = TwoPlane::new(&lat, &e(5, 1), &e(5, 2), DEFAULT_EPS).unwrap();
        assert!(p_i.distance_to(&expect_23).unwrap() < 1e-12);
        assert!(expect_23.orientation_against(&p_i) > 0.0);

        let p_j = w.twistor_point(&[0.0, 1.0, 0.0], DEFAULT_EPS).unwrap();
        let expect_31 = TwoPlane::new(&lat, &e(5, 2), &e(5, 0), DEFAULT_EPS).unwrap();
        assert!(p_j.distance_to(&expect_31).unwrap() < 1e-12);
        assert!(expect_31.orientation_against(&p_j) > 0.0);

        let p_anti = w.twistor_point(&[-1.0, 0.0, 0.0], DEFAULT_EPS).unwrap();
        assert!(p_anti.distance_to(&p_i).unwrap() < 1e-12);
        assert!(p_i.orientation_against(&p_anti) < 0.0);

        // Poles recover the original plane.
        let pole = w.twistor_point(&[0.0, 0.0, 1.0], DEFAULT_EPS).unwrap();
        assert!(pole.distance_to(&plane).unwrap() < 1e-12);
        assert!(plane.orientation_against(&pole) > 0.0);
    }

    #[test]
    fn twistor_point_rejects_non_unit_parameter() {
        let lat = lat5();
        let plane = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let w = extend_to_three_plane(&lat, &plane, &e(5, 2), DEFAULT_EPS).unwrap();
        assert!(matches!(
            w.twistor_point(&[0.5, 0.0, 0.0], DEFAULT_EPS),
            Err(PlaneError::NonUnitParameter)
        ));
    }

    #[test]
    fn cone_component_labels() {
        let lat = lat5();
        let plane = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let e3 = e(5, 2);
        let minus_e3: Vec<f64> = e3.iter().map(|x| -x).collect();
        let e4 = e(5, 3);
        assert_eq!(
            positive_cone_component(&lat, &plane, &e3, &e3, DEFAULT_EPS).unwrap(),
            ConeComponentLabel::Plus
        );
        assert_eq!(
            positive_cone_component(&lat, &plane, &minus_e3, &e3, DEFAULT_EPS).unwrap(),
            ConeComponentLabel::Minus
        );
        assert_eq!(
            positive_cone_component(&lat, &plane, &e4, &e3, DEFAULT_EPS).unwrap(),
            ConeComponentLabel::Outside
        );
        // Isotropic direction e3 + e4.
        let null: Vec<f64> = vec![0.0, 0.0, 1.0, 1.0, 0.0];
        assert_eq!(
            positive_cone_component(&lat, &plane, &null, &e3, DEFAULT_EPS).unwrap(),
            ConeComponentLabel::Null
        );
        // Ray invariance.
        let scaled: Vec<f64> = e3.iter().map(|x| 73.5 * x).collect();
        assert_eq!(
            positive_cone_component(&lat, &plane, &scaled, &e3, DEFAULT_EPS).unwrap(),
            ConeComponentLabel::Plus
        );
    }

    #[test]
    fn plane_distance_values() {
        let lat = lat5();
        let p12 = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let p13 = TwoPlane::new(&lat, &e(5, 0), &e(5, 2), DEFAULT_EPS).unwrap();
        assert_eq!(p12.distance_to(&p12).unwrap(), 0.0);
        let d = p12.distance_to(&p13).unwrap();
        assert!((d - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(
            p12.distance_to(&p13).unwrap(),
            p13.distance_to(&p12).unwrap()
        );
    }

    #[test]
    fn dimension_report_values() {
        let d23 = dimension_report(23).unwrap();
        assert_eq!(d23.perspace_dim, 42);
        assert_eq!(d23.kahler_cone_dim, 21);
        assert_eq!(d23.teich_h_dim, 1771);
        let d4 = dimension_report(4).unwrap();
        assert_eq!((d4.perspace_dim, d4.kahler_cone_dim, d4.teich_h_dim), (4, 2, 4));
        let d5 = dimension_report(5).unwrap();
        assert_eq!((d5.perspace_dim, d5.kahler_cone_dim, d5.teich_h_dim), (6, 3, 10));
        assert!(dimension_report(3).is_err());
    }

    #[test]
    fn midpoint_halves_the_distance() {
        let lat = lat5();
        let p1 = TwoPlane::new(&lat, &e(5, 0), &e(5, 1), DEFAULT_EPS).unwrap();
        let tilted: Vec<f64> = vec![0.0, 1.0, 0.35, 0.0, 0.0];
        let p2 = TwoPlane::new(&lat, &e(5, 0), &tilted, DEFAULT_EPS).unwrap();
        let mid = plane_midpoint(&lat, &p1, &p2, DEFAULT_EPS).unwrap();
        let d = p1.distance_to(&p2).unwrap();
        let d1 = p1.distance_to(&mid).unwrap();
        let d2 = mid.distance_to(&p2).unwrap();
        assert!((d1 - d / 2.0).abs() < 1e-9, "d1 = {d1}, d = {d}");
        assert!((d2 - d / 2.0).abs() < 1e-9);
    }
}
