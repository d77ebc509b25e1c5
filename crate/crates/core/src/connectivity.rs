//! Chains of twistor curves connecting nearby period planes inside a ball.
//!
//! A step picks a positive 3-plane `W` through the current plane whose
//! orthogonal complement holds no lattice vector up to a height bound (the
//! liftability surrogate), then moves along the twistor sphere of `W` to the
//! plane closest to the target. The step chooser aims rather than drifts:
//!
//! * finish: if the current plane shares a line with the target, the joint
//!   span is a positive 3-plane whose sphere contains the target exactly;
//! * bridge: otherwise extend by the best positive direction inside
//!   `span(current, target)`, which forces `W` to meet the target in a line
//!   `v`; sliding to the sphere circle of planes through `v` sets up an exact
//!   finish on the next step;
//! * free: otherwise extend by a perturbed positive direction orthogonal to
//!   the current plane and take the sphere minimizer.
//!
//! Accepted steps never increase the distance to the target, so chains
//! terminate either on the target or by exhausting their budget.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::dynamics::{classify_point, VerdictKind};
use crate::enumerate;
use crate::lattice::{eucl_norm_sq, LatticeError, QuadraticLattice};
use crate::period::{
    dot, extend_to_three_plane, plane_midpoint, positive_cone_component, ConeComponentLabel,
    PlaneError, ThreePlane, TwoPlane,
};
use crate::rng::SplitMix64;

/// Sphere grid for the twistor minimizer: azimuth x polar.
const SPHERE_GRID: (usize, usize) = (64, 32);

/// Pattern-search tolerance on the sphere parameter.
const SPHERE_REFINE_TOL: f64 = 1e-10;

/// Default chain termination tolerance. Monotone twistor chains contract by
/// about `1/sqrt(2)` per step at best when the remaining separation has
/// negative q-norm, so this is what a 32-step budget can reliably close from
/// chart-scale distances.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub enum ChainError {
    Lattice(LatticeError),
    Plane(PlaneError),
    /// No generic positive 3-plane found; the blocking lattice vectors of the
    /// last rejected candidate are reported.
    RetriesExhausted { blocking: Vec<Vec<i64>> },
    NoPositiveExtension,
    /// No candidate step strictly reduced the distance to the target.
    NoProgress { best: f64 },
    /// Endpoints violate `distance <= 2 * ball_radius`.
    BallPrecondition { distance: f64, ball_radius: f64 },
    /// A step could not stay inside the ball even when retargeted.
    BallUnsatisfiable { partial: GhkChain },
    /// Step budget exhausted; the partial chain is returned for diagnosis.
    BudgetExhausted { partial: GhkChain },
    InvariantViolated(&'static str),
}

impl From<LatticeError> for ChainError {
    fn from(e: LatticeError) -> Self {
        Self::Lattice(e)
    }
}

impl From<PlaneError> for ChainError {
    fn from(e: PlaneError) -> Self {
        Self::Plane(e)
    }
}

impl core::fmt::Display for ChainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Lattice(e) => write!(f, "{e}"),
            Self::Plane(e) => write!(f, "{e}"),
            Self::RetriesExhausted { blocking } => write!(
                f,
                "retries exhausted without a generic 3-plane ({} blocking vectors)",
                blocking.len()
            ),
            Self::NoPositiveExtension => write!(f, "no positive extension direction found"),
            Self::NoProgress { best } => {
                write!(f, "no twistor step reduced the target distance (best {best})")
            }
            Self::BallPrecondition { distance, ball_radius } => write!(
                f,
                "endpoint distance {distance} exceeds twice the ball radius {ball_radius}"
            ),
            Self::BallUnsatisfiable { .. } => {
                write!(f, "step could not stay inside the ball even when retargeted")
            }
            Self::BudgetExhausted { partial } => write!(
                f,
                "step budget exhausted at distance {}",
                partial.final_distance()
            ),
            Self::InvariantViolated(what) => write!(f, "chain invariant violated: {what}"),
        }
    }
}

/// One twistor move: a generic positive 3-plane containing both endpoints of
/// the move.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub three_plane: ThreePlane,
    pub from_plane: TwoPlane,
    pub to_plane: TwoPlane,
    pub genericity_height: i64,
    /// Set when from and to coincide (zero-length move, kept for the record).
    pub degenerate: bool,
    /// Distance from `to_plane` to the chain target, for diagnostics.
    pub distance_to_target: f64,
}

/// Chain of twistor curves; consecutive steps share their junction plane.
#[derive(Debug, Clone)]
pub struct GhkChain {
    pub steps: Vec<ChainStep>,
    pub endpoints: (TwoPlane, TwoPlane),
    pub ball_center: TwoPlane,
    pub ball_radius: f64,
}

impl GhkChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Distance from the chain's last plane to the second endpoint.
    pub fn final_distance(&self) -> f64 {
        let last = self
            .steps
            .last()
            .map(|s| &s.to_plane)
            .unwrap_or(&self.endpoints.0);
        last.distance_to(&self.endpoints.1).unwrap_or(f64::NAN)
    }

    /// Checks every chain invariant: junction continuity, containment of the
    /// junction planes in their 3-planes, genericity at the recorded height,
    /// ball containment, monotone progress, and ergodicity of the junctions.
    pub fn validate(
        &self,
        lat: &QuadraticLattice,
        height_bound: i64,
        eps: f64,
        tol: f64,
    ) -> Result<(), ChainError> {
        if let Some(first) = self.steps.first() {
            if first.from_plane.distance_to(&self.endpoints.0).unwrap_or(f64::NAN) > tol {
                return Err(ChainError::InvariantViolated("first step must start at endpoint"));
            }
        }
        if let Some(last) = self.steps.last() {
            if last.to_plane.distance_to(&self.endpoints.1).unwrap_or(f64::NAN) > tol {
                return Err(ChainError::InvariantViolated("last step must end at endpoint"));
            }
        }
        let mut prev_dist = f64::INFINITY;
        for (i, step) in self.steps.iter().enumerate() {
            if !step.three_plane.contains_plane(&step.from_plane, eps) {
                return Err(ChainError::InvariantViolated("from_plane not inside 3-plane"));
            }
            if !step.three_plane.contains_plane(&step.to_plane, eps) {
                return Err(ChainError::InvariantViolated("to_plane not inside 3-plane"));
            }
            if !is_generic_three_plane(lat, &step.three_plane, step.genericity_height, eps) {
                return Err(ChainError::InvariantViolated("3-plane not generic at height"));
            }
            if i + 1 < self.steps.len() {
                let junction_gap = step
                    .to_plane
                    .distance_to(&self.steps[i + 1].from_plane)
                    .unwrap_or(f64::NAN);
                if junction_gap > eps {
                    return Err(ChainError::InvariantViolated("junction planes disagree"));
                }
                let verdict = classify_point(lat, &step.to_plane, height_bound, eps)
                    .map_err(|_| ChainError::InvariantViolated("junction classification failed"))?;
                if verdict.kind() != VerdictKind::Ergodic {
                    return Err(ChainError::InvariantViolated("junction plane not ergodic"));
                }
            }
            for plane in [&step.from_plane, &step.to_plane] {
                if plane.distance_to(&self.ball_center).unwrap_or(f64::NAN)
                    > self.ball_radius + eps
                {
                    return Err(ChainError::InvariantViolated("plane leaves the ball"));
                }
            }
            let d = step.distance_to_target;
            if !step.degenerate && d > prev_dist {
                return Err(ChainError::InvariantViolated("distance to target increased"));
            }
            prev_dist = d;
        }
        Ok(())
    }
}

/// True iff no nonzero lattice vector of height at most `height_bound` is
/// q-orthogonal to all three basis vectors within `eps`; "generic at this
/// height" is the certifiable surrogate for having no rational vectors in
/// the orthogonal complement.
pub fn is_generic_three_plane(
    lat: &QuadraticLattice,
    w: &ThreePlane,
    height_bound: i64,
    eps: f64,
) -> bool {
    blocking_vectors(lat, w, height_bound, eps).is_empty()
}

/// The lattice vectors that witness non-genericity, if any.
pub fn blocking_vectors(
    lat: &QuadraticLattice,
    w: &ThreePlane,
    height_bound: i64,
    eps: f64,
) -> Vec<Vec<i64>> {
    let [w1, w2, w3] = w.basis();
    let rows = lat.pairing_rows_real(&[w1, w2, w3]);
    enumerate::bounded_solutions(&rows, height_bound, eps)
}

/// Best twistor plane of `W` for the target: global sphere grid plus pattern
/// refinement, with an exact snap when the target lies on the sphere.
fn sphere_minimize(w: &ThreePlane, target: &TwoPlane, eps: f64) -> (TwoPlane, f64) {
    if w.contains_plane(target, eps) {
        return (target.clone(), 0.0);
    }
    let eval = |u: &[f64; 3]| -> Option<(TwoPlane, f64)> {
        let plane = w.twistor_point(u, 1e-6).ok()?;
        let d = plane.distance_to(target).ok()?;
        Some((plane, d))
    };
    let (n_az, n_pol) = SPHERE_GRID;
    let mut best_angles = (0.0f64, 0.0f64);
    let mut best: Option<(TwoPlane, f64)> = None;
    for i in 0..=n_pol {
        let theta = core::f64::consts::PI * i as f64 / n_pol as f64;
        for j in 0..n_az {
            let phi = 2.0 * core::f64::consts::PI * j as f64 / n_az as f64;
            let u = sphere_point(theta, phi);
            if let Some((plane, d)) = eval(&u) {
                if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
                    best = Some((plane, d));
                    best_angles = (theta, phi);
                }
            }
            if i == 0 || i == n_pol {
                break; // poles need a single azimuth
            }
        }
    }
    let (mut theta, mut phi) = best_angles;
    let mut step = core::f64::consts::PI / n_pol as f64;
    let mut evals = 0usize;
    while step > SPHERE_REFINE_TOL && evals < 4000 {
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let u = sphere_point(theta + dt, phi + dp);
            evals += 1;
            if let Some((plane, d)) = eval(&u) {
                if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
                    best = Some((plane, d));
                    theta += dt;
                    phi += dp;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.expect("sphere grid always evaluates")
}

fn sphere_point(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Best twistor plane through the direction `v_w` (unit, `W` coordinates):
/// minimizes over the circle of planes of `W` containing `v`.
fn circle_minimize(
    w: &ThreePlane,
    v_w: &[f64; 3],
    target: &TwoPlane,
) -> Option<(TwoPlane, f64)> {
    // Planes through v are orthogonal to u with u . v = 0.
    let k = (0..3)
        .min_by(|&a, &b| v_w[a].abs().partial_cmp(&v_w[b].abs()).expect("finite"))
        .expect("nonempty");
    let mut axis = [0.0f64; 3];
    axis[k] = 1.0;
    let raw = [
        v_w[1] * axis[2] - v_w[2] * axis[1],
        v_w[2] * axis[0] - v_w[0] * axis[2],
        v_w[0] * axis[1] - v_w[1] * axis[0],
    ];
    let inv = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt().recip();
    if !inv.is_finite() {
        return None;
    }
    let a = [raw[0] * inv, raw[1] * inv, raw[2] * inv];
    let b = [
        v_w[1] * a[2] - v_w[2] * a[1],
        v_w[2] * a[0] - v_w[0] * a[2],
        v_w[0] * a[1] - v_w[1] * a[0],
    ];
    let eval = |psi: f64| -> Option<(TwoPlane, f64)> {
        let u = [
            psi.cos() * a[0] + psi.sin() * b[0],
            psi.cos() * a[1] + psi.sin() * b[1],
            psi.cos() * a[2] + psi.sin() * b[2],
        ];
        let plane = w.twistor_point(&u, 1e-6).ok()?;
        let d = plane.distance_to(target).ok()?;
        Some((plane, d))
    };
    let n = 256;
    let mut best: Option<(TwoPlane, f64, f64)> = None;
    for j in 0..n {
        let psi = 2.0 * core::f64::consts::PI * j as f64 / n as f64;
        if let Some((plane, d)) = eval(psi) {
            if best.as_ref().map_or(true, |(_, bd, _)| d < *bd) {
                best = Some((plane, d, psi));
            }
        }
    }
    let (_, _, mut psi) = best.as_ref()?.clone();
    let mut step = 2.0 * core::f64::consts::PI / n as f64;
    while step > SPHERE_REFINE_TOL {
        let mut improved = false;
        for dp in [step, -step] {
            if let Some((plane, d)) = eval(psi + dp) {
                if best.as_ref().map_or(true, |(_, bd, _)| d < *bd) {
                    best = Some((plane, d, psi + dp));
                    psi += dp;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.map(|(plane, d, _)| (plane, d))
}

/// Deterministic positive q-direction orthogonal to the plane; coordinate
/// vectors are projected first, random draws only as a fallback.
fn positive_direction(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    rng: &mut SplitMix64,
    eps: f64,
) -> Option<Vec<f64>> {
    let rank = lat.rank();
    let [x, y] = plane.basis();
    let project = |v: &[f64]| -> Vec<f64> {
        let px = lat.pair_real(v, x);
        let py = lat.pair_real(v, y);
        v.iter()
            .enumerate()
            .map(|(i, a)| a - px * x[i] - py * y[i])
            .collect()
    };
    for k in 0..rank {
        let mut e = vec![0.0f64; rank];
        e[k] = 1.0;
        let cand = project(&e);
        let n = eucl_norm_sq(&cand);
        if n > eps && lat.pair_real(&cand, &cand) > eps * n {
            return Some(cand);
        }
    }
    for _ in 0..64 {
        let v: Vec<f64> = (0..rank).map(|_| rng.next_in(-1.0, 1.0)).collect();
        let cand = project(&v);
        let n = eucl_norm_sq(&cand);
        if n > eps && lat.pair_real(&cand, &cand) > eps * n {
            return Some(cand);
        }
    }
    None
}

/// q-orthogonal residuals of the target basis relative to the current plane.
fn target_residuals(lat: &QuadraticLattice, cur: &TwoPlane, target: &TwoPlane) -> [Vec<f64>; 2] {
    let [x, y] = cur.basis();
    let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (slot, v) in out.iter_mut().zip(target.basis().iter()) {
        let px = lat.pair_real(v, x);
        let py = lat.pair_real(v, y);
        *slot = v
            .iter()
            .enumerate()
            .map(|(i, a)| a - px * x[i] - py * y[i])
            .collect();
    }
    out
}

/// Best positive direction inside the residual span: maximizes
/// `q(u,u) / <u,u>` over `u = alpha r1 + beta r2` via the 2x2 generalized
/// eigenproblem. Returns `None` when the span holds no positive direction.
fn best_positive_in_span(
    lat: &QuadraticLattice,
    r1: &[f64],
    r2: &[f64],
    eps: f64,
) -> Option<Vec<f64>> {
    let b11 = eucl_norm_sq(r1);
    let b22 = eucl_norm_sq(r2);
    if b11 <= eps && b22 <= eps {
        return None;
    }
    if b22 <= eps * b11 {
        return positive_ray(lat, r1.to_vec(), eps);
    }
    if b11 <= eps * b22 {
        return positive_ray(lat, r2.to_vec(), eps);
    }
    let a11 = lat.pair_real(r1, r1);
    let a12 = lat.pair_real(r1, r2);
    let a22 = lat.pair_real(r2, r2);
    let b12 = dot(r1, r2);
    // det(A - lambda B) = 0.
    let qa = b11 * b22 - b12 * b12;
    let qb = 2.0 * a12 * b12 - a11 * b22 - a22 * b11;
    let qc = a11 * a22 - a12 * a12;
    if qa.abs() < 1e-300 {
        return positive_ray(lat, if b11 >= b22 { r1.to_vec() } else { r2.to_vec() }, eps);
    }
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let lambda = (-qb + disc) / (2.0 * qa);
    if lambda <= eps {
        return None;
    }
    // Eigenvector of (A - lambda B).
    let m11 = a11 - lambda * b11;
    let m12 = a12 - lambda * b12;
    let m22 = a22 - lambda * b22;
    let (alpha, beta) = if m11.abs().max(m12.abs()) >= m12.abs().max(m22.abs()) {
        (-m12, m11)
    } else {
        (-m22, m12)
    };
    let u: Vec<f64> = r1
        .iter()
        .zip(r2.iter())
        .map(|(p, q)| alpha * p + beta * q)
        .collect();
    positive_ray(lat, u, eps)
}

fn positive_ray(lat: &QuadraticLattice, v: Vec<f64>, eps: f64) -> Option<Vec<f64>> {
    let n = eucl_norm_sq(&v);
    if n > eps && lat.pair_real(&v, &v) > eps * n {
        Some(v)
    } else {
        None
    }
}

/// q-orthonormal basis of the orthogonal complement of a positive plane:
/// one positive direction and `rank - 3` negative ones (the complement has
/// signature `(1, rank-3)`). Greedy-pivoted Gram-Schmidt under `q`.
fn q_complement_basis(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    eps: f64,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let rank = lat.rank();
    let [x, y] = plane.basis();
    let mut pool: Vec<Vec<f64>> = (0..rank)
        .map(|k| {
            let mut e = vec![0.0f64; rank];
            e[k] = 1.0;
            let px = lat.pair_real(&e, x);
            let py = lat.pair_real(&e, y);
            e.iter()
                .enumerate()
                .map(|(i, a)| a - px * x[i] - py * y[i])
                .collect()
        })
        .collect();
    let mut positive: Option<Vec<f64>> = None;
    let mut negatives: Vec<Vec<f64>> = Vec::new();
    for _ in 0..rank.saturating_sub(2) {
        // Pivot on the largest |q|-norm relative to Euclidean size.
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in pool.iter().enumerate() {
            let n = eucl_norm_sq(v);
            if n <= eps {
                continue;
            }
            let score = lat.pair_real(v, v) / n;
            if best.map_or(true, |(_, s)| score.abs() > s.abs()) {
                best = Some((i, score));
            }
        }
        let (idx, score) = best?;
        if score.abs() <= eps {
            return None;
        }
        let v = pool.swap_remove(idx);
        let qv = lat.pair_real(&v, &v);
        let inv = qv.abs().sqrt().recip();
        let unit: Vec<f64> = v.iter().map(|a| a * inv).collect();
        let sign = if qv > 0.0 { 1.0 } else { -1.0 };
        for w in pool.iter_mut() {
            let c = lat.pair_real(w, &unit) * sign;
            for (wi, ui) in w.iter_mut().zip(unit.iter()) {
                *wi -= c * ui;
            }
        }
        if qv > 0.0 {
            if positive.is_some() {
                return None; // signature violation, bail out
            }
            positive = Some(unit);
        } else {
            negatives.push(unit);
        }
    }
    positive.map(|p| (p, negatives))
}

/// Euclidean residuals of the target plane's chart basis relative to the
/// current plane: the small-angle separation the next step should capture.
fn chart_residuals(p_cur: &TwoPlane, p_target: &TwoPlane) -> [Vec<f64>; 2] {
    let e = p_cur.euclid_basis();
    let v = p_target.euclid_basis();
    let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (slot, col) in out.iter_mut().zip(v.iter()) {
        let c0 = dot(col, &e[0]);
        let c1 = dot(col, &e[1]);
        *slot = col
            .iter()
            .enumerate()
            .map(|(i, a)| a - c0 * e[0][i] - c1 * e[1][i])
            .collect();
    }
    out
}

/// Extension directions near the boundary of the positive cone that maximize
/// the chart-metric capture of the separation. A step inside `W = P + <omega>`
/// can only remove the component of the separation along omega's chart
/// direction, so candidates are ranked by that captured energy. Enumerable
/// for complements with up to three negative directions (rank at most 6);
/// higher ranks fall back to the reference direction.
fn cone_boundary_candidates(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    p_target: &TwoPlane,
    eps: f64,
) -> Vec<Vec<f64>> {
    let [t1, t2] = chart_residuals(plane, p_target);
    let e = plane.euclid_basis();
    let chart_score = |omega: &[f64]| -> f64 {
        let c0 = dot(omega, &e[0]);
        let c1 = dot(omega, &e[1]);
        let omega_e: Vec<f64> = omega
            .iter()
            .enumerate()
            .map(|(i, a)| a - c0 * e[0][i] - c1 * e[1][i])
            .collect();
        let n = eucl_norm_sq(&omega_e);
        if n <= 1e-300 {
            return 0.0;
        }
        let o1 = dot(&omega_e, &t1);
        let o2 = dot(&omega_e, &t2);
        (o1 * o1 + o2 * o2) / n
    };
    let Some((f_plus, negatives)) = q_complement_basis(lat, plane, eps) else {
        return Vec::new();
    };
    let k = negatives.len();
    let combos: Vec<Vec<f64>> = match k {
        0 => return alloc::vec![f_plus],
        1 => alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]],
        2 => (0..128)
            .map(|j| {
                let a = 2.0 * core::f64::consts::PI * j as f64 / 128.0;
                alloc::vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let mut v = Vec::with_capacity(512);
            for i in 0..=16 {
                let th = core::f64::consts::PI * i as f64 / 16.0;
                for j in 0..32 {
                    let ph = 2.0 * core::f64::consts::PI * j as f64 / 32.0;
                    v.push(alloc::vec![
                        th.sin() * ph.cos(),
                        th.sin() * ph.sin(),
                        th.cos()
                    ]);
                    if i == 0 || i == 16 {
                        break;
                    }
                }
            }
            v
        }
        _ => return alloc::vec![f_plus],
    };
    // Score boundary points by how much of the separation they can absorb.
    let mut scored: Vec<(f64, Vec<f64>)> = combos
        .into_iter()
        .map(|c| {
            let mut omega = f_plus.clone();
            for (ci, n) in c.iter().zip(negatives.iter()) {
                for (o, ni) in omega.iter_mut().zip(n.iter()) {
                    *o += ci * ni;
                }
            }
            let score = chart_score(&omega);
            (score, omega)
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut out = Vec::new();
    for (_, boundary) in scored.into_iter().take(3) {
        // Back off the null direction into the open cone.
        for eta in [0.9, 0.99] {
            let omega: Vec<f64> = f_plus
                .iter()
                .zip(boundary.iter())
                .map(|(p, b)| p + eta * (b - p))
                .collect();
            out.push(omega);
        }
    }
    out.push(f_plus);
    out
}

/// Splits the chart separation into two rank-one tilts along positive-cone
/// directions inside its column span, and returns `(omega, intermediate)`
/// pairs: extend along `omega`, aim at the intermediate plane. Empty when the
/// span holds fewer than two transverse cone directions.
fn two_hop_candidates(
    lat: &QuadraticLattice,
    p_cur: &TwoPlane,
    p_target: &TwoPlane,
    eps: f64,
) -> Vec<(Vec<f64>, TwoPlane)> {
    // Residuals of the target chart basis, re-expressed over the current
    // frame: the target is the graph of T M^{-1} where M is the cross-Gram,
    // so the tilt attached to e_j is the j-th column of that product.
    let e_base = p_cur.euclid_basis();
    let v_base = p_target.euclid_basis();
    let [raw1, raw2] = chart_residuals(p_cur, p_target);
    let m = [
        [dot(&e_base[0], &v_base[0]), dot(&e_base[0], &v_base[1])],
        [dot(&e_base[1], &v_base[0]), dot(&e_base[1], &v_base[1])],
    ];
    let det_m = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det_m.abs() < 1e-6 {
        return Vec::new();
    }
    let minv = [
        [m[1][1] / det_m, -m[0][1] / det_m],
        [-m[1][0] / det_m, m[0][0] / det_m],
    ];
    let combine = |c0: f64, c1: f64| -> Vec<f64> {
        raw1.iter()
            .zip(raw2.iter())
            .map(|(a, b)| c0 * a + c1 * b)
            .collect()
    };
    let t1 = combine(minv[0][0], minv[1][0]);
    let t2 = combine(minv[0][1], minv[1][1]);
    let n1 = eucl_norm_sq(&t1);
    let n2 = eucl_norm_sq(&t2);
    if n1 + n2 <= 1e-300 {
        return Vec::new();
    }
    // Euclid-orthonormal basis (s1, s2) of the separation column span.
    let (big, small) = if n1 >= n2 { (&t1, &t2) } else { (&t2, &t1) };
    let ib = eucl_norm_sq(big).sqrt().recip();
    let s1: Vec<f64> = big.iter().map(|a| a * ib).collect();
    let mut rem: Vec<f64> = small
        .iter()
        .zip(s1.iter())
        .map(|(a, b)| a - dot(small, &s1) * b)
        .collect();
    let rn = eucl_norm_sq(&rem);
    if rn <= 1e-16 * eucl_norm_sq(small).max(1e-300) {
        return Vec::new(); // rank one: the finish path owns this
    }
    let ir = rn.sqrt().recip();
    for x in rem.iter_mut() {
        *x *= ir;
    }
    let s2 = rem;

    let [px, py] = p_cur.basis();
    // Chart direction -> q-orthogonal extension vector and its cone quality.
    let lift = |v: &[f64]| -> (Vec<f64>, f64) {
        let cx = lat.pair_real(v, px);
        let cy = lat.pair_real(v, py);
        let omega: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(i, a)| a - cx * px[i] - cy * py[i])
            .collect();
        let n = eucl_norm_sq(&omega);
        if n <= 1e-300 {
            return (omega, -1.0);
        }
        let kappa = lat.pair_real(&omega, &omega) / n;
        (omega, kappa)
    };

    let n_grid = 64usize;
    let mut table: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(n_grid); // (psi, kappa, omega)
    for j in 0..n_grid {
        let psi = core::f64::consts::PI * j as f64 / n_grid as f64; // directions mod pi
        let v: Vec<f64> = s1
            .iter()
            .zip(s2.iter())
            .map(|(a, b)| psi.cos() * a + psi.sin() * b)
            .collect();
        let (omega, kappa) = lift(&v);
        table.push((psi, kappa, omega));
    }
    // Among admissible direction pairs, prefer splits with small pieces: the
    // landing error is second order in the first piece and the intermediate
    // distance equals the second piece.
    let margin = 1e-6;
    let admissible: Vec<usize> = (0..table.len())
        .filter(|&i| table[i].1 > margin)
        .collect();
    if admissible.len() < 2 {
        return Vec::new();
    }
    let coords = |t: &[f64]| (dot(t, &s1), dot(t, &s2));
    let (c11, c12) = coords(&t1);
    let (c21, c22) = coords(&t2);
    let mut scored: Vec<(f64, usize, usize, f64, f64)> = Vec::new();
    for &ia in &admissible {
        for &ib in &admissible {
            if ia == ib {
                continue;
            }
            let (psi_a, _, _) = table[ia];
            let (psi_b, _, _) = table[ib];
            let det = (psi_b - psi_a).sin();
            if det.abs() < 0.1 {
                continue;
            }
            // t_j = a_j v(psi_a) + b_j v(psi_b) in (s1, s2) coordinates.
            let a1 = (c11 * psi_b.sin() - c12 * psi_b.cos()) / det;
            let a2 = (c21 * psi_b.sin() - c22 * psi_b.cos()) / det;
            let b1 = (-c11 * psi_a.sin() + c12 * psi_a.cos()) / det;
            let b2 = (-c21 * psi_a.sin() + c22 * psi_a.cos()) / det;
            let first_sq = a1 * a1 + a2 * a2;
            let second_sq = b1 * b1 + b2 * b2;
            // Intermediate must be closer to the target than we are now.
            if second_sq >= 0.9 * (n1 + n2) {
                continue;
            }
            let score = second_sq + 0.25 * first_sq * first_sq;
            scored.push((score, ia, ib, a1, a2));
        }
    }
    scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));

    let mut out = Vec::new();
    for (_, ia, _, a1, a2) in scored.into_iter().take(3) {
        let (psi_a, _, ref omega_a) = table[ia];
        let v_a: Vec<f64> = s1
            .iter()
            .zip(s2.iter())
            .map(|(p2, q2)| psi_a.cos() * p2 + psi_a.sin() * q2)
            .collect();
        // Intermediate plane: current chart basis tilted by the first piece.
        let m1: Vec<f64> = e_base[0].iter().zip(v_a.iter()).map(|(b, v)| b + a1 * v).collect();
        let m2: Vec<f64> = e_base[1].iter().zip(v_a.iter()).map(|(b, v)| b + a2 * v).collect();
        if let Ok(mid) = TwoPlane::new(lat, &m1, &m2, eps) {
            out.push((omega_a.clone(), mid));
        }
    }
    out
}

/// One twistor move toward `p_target`: the candidate 3-planes are the shared
/// span when the planes intersect (exact finish), the bridge through the best
/// positive direction of the joint span, cone-boundary slides aimed at the
/// residual directions, and randomly perturbed positive extensions. The
/// candidate whose sphere minimizer lands closest to the target wins;
/// accepted steps never increase the distance.
#[allow(clippy::too_many_arguments)]
pub fn ghk_step(
    lat: &QuadraticLattice,
    p_cur: &TwoPlane,
    p_target: &TwoPlane,
    height_bound: i64,
    max_retries: usize,
    rng: &mut SplitMix64,
    eps: f64,
) -> Result<ChainStep, ChainError> {
    let d_cur = p_cur.distance_to(p_target)?;
    let reference = positive_direction(lat, p_cur, rng, eps);

    // Degenerate request: target equals current plane.
    if d_cur < eps {
        let w = generic_extension(lat, p_cur, reference.as_deref(), height_bound, max_retries, rng, eps)?;
        return Ok(ChainStep {
            three_plane: w,
            from_plane: p_cur.clone(),
            to_plane: p_cur.clone(),
            genericity_height: height_bound,
            degenerate: true,
            distance_to_target: d_cur,
        });
    }

    let mut best: Option<(ThreePlane, TwoPlane, f64)> = None;
    let mut best_split: Option<(ThreePlane, TwoPlane, f64)> = None;
    let mut last_blocking: Vec<Vec<i64>> = Vec::new();
    let [r1, r2] = target_residuals(lat, p_cur, p_target);

    // Finish: current and target planes share a line, so their joint span is
    // a 3-plane whose twistor sphere contains the target exactly.
    if span_rank_defect(&r1, &r2) {
        let omega = if eucl_norm_sq(&r1) >= eucl_norm_sq(&r2) { &r1 } else { &r2 };
        if let Ok(w) = extend_to_three_plane(lat, p_cur, omega, eps) {
            let blocking = blocking_vectors(lat, &w, height_bound, eps);
            if blocking.is_empty() {
                if w.contains_plane(p_target, eps) {
                    return Ok(ChainStep {
                        three_plane: w,
                        from_plane: p_cur.clone(),
                        to_plane: p_target.clone(),
                        genericity_height: height_bound,
                        degenerate: false,
                        distance_to_target: 0.0,
                    });
                }
            } else {
                last_blocking = blocking;
            }
        }
    }

    let consider = |omega: Vec<f64>,
                        with_circle: bool,
                        aim: Option<&TwoPlane>,
                        best: &mut Option<(ThreePlane, TwoPlane, f64)>,
                        last_blocking: &mut Vec<Vec<i64>>| {
        let oriented = orient_to_plus(lat, p_cur, omega, reference.as_deref(), eps);
        let w = match extend_to_three_plane(lat, p_cur, &oriented, eps) {
            Ok(w) => w,
            Err(_) => return,
        };
        let blocking = blocking_vectors(lat, &w, height_bound, eps);
        if !blocking.is_empty() {
            *last_blocking = blocking;
            return;
        }
        if with_circle {
            if let Some(v_w) = plane_intersection_direction(lat, &w, p_target) {
                if let Some((plane, d)) = circle_minimize(&w, &v_w, p_target) {
                    if d.is_finite() && best.as_ref().map_or(true, |(_, _, bd)| d < *bd) {
                        *best = Some((w.clone(), plane, d));
                    }
                }
            }
        }
        // Minimize toward the aim plane, score the landing against the target.
        let (plane, d) = match aim {
            Some(m) => {
                let (landing, _) = sphere_minimize(&w, m, eps);
                let d = landing.distance_to(p_target).unwrap_or(f64::NAN);
                (landing, d)
            }
            None => sphere_minimize(&w, p_target, eps),
        };
        if d.is_finite() && best.as_ref().map_or(true, |(_, _, bd)| d < *bd) {
            *best = Some((w, plane, d));
        }
    };

    // Bridge: positive direction inside span(current, target) forces the
    // 3-plane to meet the target in a line; the circle of sphere planes
    // through it sets up an exact finish next step when the rest is positive.
    if let Some(omega) = best_positive_in_span(lat, &r1, &r2, eps) {
        consider(omega, true, None, &mut best, &mut last_blocking);
    }

    // Aimed: cone-boundary directions scored against the chart separation,
    // which are the only way to chase separations with negative q-norm.
    for omega in cone_boundary_candidates(lat, p_cur, p_target, eps) {
        consider(omega, false, None, &mut best, &mut last_blocking);
    }

    // Two-hop split: write the separation as two cone-direction rank-one
    // tilts, aim this step at the intermediate plane; the remainder is then
    // a single positive tilt the next step can finish, which is what makes
    // the endgame contract superlinearly. These land farther than the greedy
    // minimizer but set up the finish, so they are preferred when decent.
    for (omega, aim) in two_hop_candidates(lat, p_cur, p_target, eps) {
        consider(omega, false, Some(&aim), &mut best_split, &mut last_blocking);
    }

    // Free: the reference direction itself, then random perturbations.
    if let Some(base) = reference.as_ref() {
        let scale = eucl_norm_sq(base).sqrt();
        for attempt in 0..max_retries.max(1) {
            let omega: Vec<f64> = if attempt == 0 {
                base.clone()
            } else {
                base.iter()
                    .map(|a| a + rng.next_in(-0.2, 0.2) * scale)
                    .collect()
            };
            consider(omega, false, None, &mut best, &mut last_blocking);
            if attempt > 0 && best.as_ref().map_or(false, |(_, _, bd)| *bd < 0.8 * d_cur) {
                break;
            }
        }
    }

    // A split step that makes solid progress beats a greedy minimizer: the
    // remainder it leaves is a single positive tilt, one step from done.
    if let Some((_, _, ds)) = &best_split {
        if *ds < 0.8 * d_cur && best.as_ref().map_or(true, |(_, _, bd)| *ds < 4.0 * bd) {
            best = best_split;
        }
    }
    let (w, to_plane, d) = match best {
        Some(b) => b,
        None => {
            return Err(if last_blocking.is_empty() {
                ChainError::NoPositiveExtension
            } else {
                ChainError::RetriesExhausted { blocking: last_blocking }
            })
        }
    };
    if d >= d_cur {
        return Err(ChainError::NoProgress { best: d });
    }
    Ok(ChainStep {
        three_plane: w,
        from_plane: p_cur.clone(),
        to_plane,
        genericity_height: height_bound,
        degenerate: false,
        distance_to_target: d,
    })
}

/// Generic positive extension of a plane, perturbing until the height test
/// passes.
fn generic_extension(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    reference: Option<&[f64]>,
    height_bound: i64,
    max_retries: usize,
    rng: &mut SplitMix64,
    eps: f64,
) -> Result<ThreePlane, ChainError> {
    let base = reference
        .map(<[f64]>::to_vec)
        .or_else(|| positive_direction(lat, plane, rng, eps))
        .ok_or(ChainError::NoPositiveExtension)?;
    let scale = eucl_norm_sq(&base).sqrt();
    let mut blocking = Vec::new();
    for attempt in 0..max_retries.max(1) {
        let omega: Vec<f64> = if attempt == 0 {
            base.clone()
        } else {
            base.iter()
                .map(|a| a + rng.next_in(-0.1, 0.1) * scale)
                .collect()
        };
        if let Ok(w) = extend_to_three_plane(lat, plane, &omega, eps) {
            blocking = blocking_vectors(lat, &w, height_bound, eps);
            if blocking.is_empty() {
                return Ok(w);
            }
        }
    }
    Err(ChainError::RetriesExhausted { blocking })
}

/// Keep the extension direction in the plus component of the positive cone,
/// so all steps of a session live on one side of the cone. Both signs span
/// the same 3-plane; this only pins the convention.
fn orient_to_plus(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    omega: Vec<f64>,
    reference: Option<&[f64]>,
    eps: f64,
) -> Vec<f64> {
    if let Some(r) = reference {
        if let Ok(ConeComponentLabel::Minus) = positive_cone_component(lat, plane, &omega, r, eps)
        {
            return omega.into_iter().map(|a| -a).collect();
        }
    }
    omega
}

/// Direction of `W` meeting the target plane, in `W` coordinates, when the
/// intersection is (numerically) a line.
fn plane_intersection_direction(
    lat: &QuadraticLattice,
    w: &ThreePlane,
    target: &TwoPlane,
) -> Option<[f64; 3]> {
    // v = alpha x + beta y with v in W: minimize the residual of v after
    // projecting onto W over the unit circle of (alpha, beta).
    let [x, y] = target.basis();
    let wb = w.euclid_basis();
    let mut rx = x.to_vec();
    let mut ry = y.to_vec();
    for e in &wb {
        let cx = dot(&rx, e);
        let cy = dot(&ry, e);
        for ((a, b), ei) in rx.iter_mut().zip(ry.iter_mut()).zip(e.iter()) {
            *a -= cx * ei;
            *b -= cy * ei;
        }
    }
    // Residual Gram; the null-ish eigenvector gives the intersection combo.
    let p = eucl_norm_sq(&rx);
    let q = dot(&rx, &ry);
    let r = eucl_norm_sq(&ry);
    let mean = 0.5 * (p + r);
    let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let lambda_min = mean - disc;
    if lambda_min > 1e-12 {
        return None; // W misses the target plane
    }
    let (alpha, beta) = if (p - lambda_min).abs() >= (r - lambda_min).abs() {
        (-q, p - lambda_min)
    } else {
        (-(r - lambda_min), q)
    };
    let norm = (alpha * alpha + beta * beta).sqrt();
    if norm < 1e-300 {
        return None;
    }
    let v: Vec<f64> = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (alpha * a + beta * b) / norm)
        .collect();
    let coords = w.coordinates_of(lat, &v);
    let clen = (coords[0] * coords[0] + coords[1] * coords[1] + coords[2] * coords[2]).sqrt();
    if clen < 1e-9 {
        return None;
    }
    Some([coords[0] / clen, coords[1] / clen, coords[2] / clen])
}

/// True when the residual span is (numerically) one-dimensional, i.e. the
/// current plane and the target share a line.
fn span_rank_defect(r1: &[f64], r2: &[f64]) -> bool {
    let n1 = eucl_norm_sq(r1);
    let n2 = eucl_norm_sq(r2);
    if n1 == 0.0 || n2 == 0.0 {
        return true;
    }
    let (big, small, nb) = if n1 >= n2 { (r1, r2, n1) } else { (r2, r1, n2) };
    let coeff = dot(small, big) / nb;
    let res: f64 = small
        .iter()
        .zip(big.iter())
        .map(|(s, b)| {
            let d = s - coeff * b;
            d * d
        })
        .sum();
    res <= 1e-18 * eucl_norm_sq(small).max(f64::MIN_POSITIVE)
}

/// Connects two planes by a chain of generic twistor curves inside the ball
/// around their midpoint, stopping when the distance to the second endpoint
/// drops below `tol`. Deterministic in the seed. Steps that would leave the
/// ball are retargeted at the running geodesic midpoint.
///
/// Accepted steps contract the distance by roughly `1/sqrt(2)` per step once
/// the separation points into negative normal directions (the cone-boundary
/// overlap bound), so budgets should allow `log(d/tol) / log(sqrt 2)` steps.
#[allow(clippy::too_many_arguments)]
pub fn connect(
    lat: &QuadraticLattice,
    p1: &TwoPlane,
    p2: &TwoPlane,
    ball_radius: f64,
    max_steps: usize,
    seed: u64,
    height_bound: i64,
    eps: f64,
    tol: f64,
) -> Result<GhkChain, ChainError> {
    let d = p1.distance_to(p2)?;
    if d > 2.0 * ball_radius {
        return Err(ChainError::BallPrecondition {
            distance: d,
            ball_radius,
        });
    }
    let ball_center = plane_midpoint(lat, p1, p2, eps).unwrap_or_else(|_| p1.clone());
    let mut chain = GhkChain {
        steps: Vec::new(),
        endpoints: (p1.clone(), p2.clone()),
        ball_center,
        ball_radius,
    };
    if d < tol {
        return Ok(chain);
    }
    let mut rng = SplitMix64::new(seed);
    let mut cur = p1.clone();
    let mut cur_dist = d;
    for _ in 0..max_steps {
        let mut accepted: Option<ChainStep> = None;
        // First target the endpoint, then the running midpoint if the ball
        // or progress constraints reject the step.
        for toward_midpoint in [false, true] {
            let target = if toward_midpoint {
                match plane_midpoint(lat, &cur, p2, eps) {
                    Ok(m) => m,
                    Err(_) => continue,
                }
            } else {
                p2.clone()
            };
            let step = match ghk_step(lat, &cur, &target, height_bound, 8, &mut rng, eps) {
                Ok(s) => s,
                Err(ChainError::NoProgress { .. }) => continue,
                Err(ChainError::RetriesExhausted { .. }) => continue,
                Err(e) => return Err(e),
            };
            let to_endpoint = step.to_plane.distance_to(p2)?;
            if !to_endpoint.is_finite() || (to_endpoint >= cur_dist && to_endpoint >= tol) {
                continue;
            }
            if step.to_plane.distance_to(&chain.ball_center)? > ball_radius {
                continue;
            }
            accepted = Some(ChainStep {
                distance_to_target: to_endpoint,
                ..step
            });
            break;
        }
        let step = match accepted {
            Some(s) => s,
            None => return Err(ChainError::BallUnsatisfiable { partial: chain }),
        };
        cur = step.to_plane.clone();
        cur_dist = step.distance_to_target;
        chain.steps.push(step);
        if cur_dist < tol {
            return Ok(chain);
        }
    }
    Err(ChainError::BudgetExhausted { partial: chain })
}
