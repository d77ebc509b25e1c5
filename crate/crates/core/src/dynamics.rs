//! Ergodicity classification and orbit-density diagnostics.
//!
//! A period plane is either ergodic or has a closed orbit, and the closed
//! case happens exactly when the plane is rational, equivalently when the
//! Neron-Severi sublattice reaches the maximal rank `b2 - 2`. The classifier
//! implements that dichotomy directly: planes whose basis directions hide
//! small rational vectors go through the exact kernel; everything else is
//! probed by bounded-height enumeration and reported as a detection at that
//! height. Coverage of a reference chart by a random walk is the empirical
//! counterpart: ergodic starts should sweep the chart, closed-orbit starts
//! should not.

use alloc::vec::Vec;

use num_bigint::BigInt;
#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;

use crate::enumerate;
use crate::lattice::{
    rationalize_vector, LatticeError, LatticeVector, QuadraticLattice, SublatticeBasis,
};
use crate::mat::row_hnf;
use crate::monodromy::{apply_rows, GeneratorSet, MonodromyError};
use crate::period::{principal_angles, PlaneError, TwoPlane};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    Lattice(LatticeError),
    Plane(PlaneError),
    Monodromy(MonodromyError),
    EmptyTrajectory,
    EmptyReferences,
    NonPositiveEpsilon,
    BadCheckpointInterval,
    BadSampleRequest,
    /// Rejection sampling failed to find positive planes; raise the bound.
    RejectionRateTooHigh,
    /// A rational plane reported a non-maximal kernel: tolerance pathology.
    InternalInconsistency,
}

impl From<LatticeError> for DynamicsError {
    fn from(e: LatticeError) -> Self {
        Self::Lattice(e)
    }
}

impl From<PlaneError> for DynamicsError {
    fn from(e: PlaneError) -> Self {
        Self::Plane(e)
    }
}

impl From<MonodromyError> for DynamicsError {
    fn from(e: MonodromyError) -> Self {
        Self::Monodromy(e)
    }
}

impl core::fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Lattice(e) => write!(f, "{e}"),
            Self::Plane(e) => write!(f, "{e}"),
            Self::Monodromy(e) => write!(f, "{e}"),
            Self::EmptyTrajectory => write!(f, "trajectory is empty"),
            Self::EmptyReferences => write!(f, "reference point set is empty"),
            Self::NonPositiveEpsilon => write!(f, "epsilon must be positive"),
            Self::BadCheckpointInterval => write!(f, "checkpoint interval must be at least 1"),
            Self::BadSampleRequest => write!(f, "count must be >= 1 and coefficient bound positive"),
            Self::RejectionRateTooHigh => write!(
                f,
                "rejection rate above 99.9%: positive planes too rare at this coefficient bound"
            ),
            Self::InternalInconsistency => write!(
                f,
                "internal inconsistency: rational plane with non-maximal Neron-Severi rank"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Ergodic,
    ClosedOrbit,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ergodic => "ergodic",
            Self::ClosedOrbit => "closed_orbit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Exact,
    Numerical,
}

impl Certainty {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Numerical => "numerical",
        }
    }
}

/// Classifier output. `kind` is `ClosedOrbit` exactly when the detected
/// Neron-Severi rank is maximal (`rank - 2`); the constructor enforces this.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityVerdict {
    kind: VerdictKind,
    ns_basis: SublatticeBasis,
    detection_height: i64,
    certainty: Certainty,
}

impl ErgodicityVerdict {
    fn derive(
        lattice_rank: usize,
        ns_basis: SublatticeBasis,
        detection_height: i64,
        certainty: Certainty,
    ) -> Self {
        let kind = if ns_basis.rank_value() == lattice_rank - 2 {
            VerdictKind::ClosedOrbit
        } else {
            VerdictKind::Ergodic
        };
        Self {
            kind,
            ns_basis,
            detection_height,
            certainty,
        }
    }

    pub fn kind(&self) -> VerdictKind {
        self.kind
    }

    pub fn ns_basis(&self) -> &SublatticeBasis {
        &self.ns_basis
    }

    pub fn ns_rank(&self) -> usize {
        self.ns_basis.rank_value()
    }

    /// Height used by the enumeration, zero on the exact route.
    pub fn detection_height(&self) -> i64 {
        self.detection_height
    }

    pub fn certainty(&self) -> Certainty {
        self.certainty
    }
}

/// The ergodic / closed-orbit dichotomy for one period plane.
pub fn classify_point(
    lat: &QuadraticLattice,
    plane: &TwoPlane,
    height_bound: i64,
    eps: f64,
) -> Result<ErgodicityVerdict, DynamicsError> {
    if height_bound < 1 {
        return Err(DynamicsError::Lattice(LatticeError::HeightBoundTooSmall));
    }
    let [x, y] = plane.basis();
    if let (Some(a), Some(b)) = (rationalize_vector(x), rationalize_vector(y)) {
        if let Ok(ns) = lat.ns_sublattice_exact(&a, &b) {
            if ns.rank_value() != lat.rank() - 2 {
                return Err(DynamicsError::InternalInconsistency);
            }
            return Ok(ErgodicityVerdict::derive(lat.rank(), ns, 0, Certainty::Exact));
        }
    }
    let rows = lat.pairing_rows_real(&[x, y]);
    let sols = enumerate::bounded_solutions(&rows, height_bound, eps);
    let int_rows: Vec<Vec<BigInt>> = sols
        .iter()
        .map(|v| v.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let basis = SublatticeBasis::from_vectors(
        row_hnf(int_rows).into_iter().map(LatticeVector::new).collect(),
    );
    Ok(ErgodicityVerdict::derive(
        lat.rank(),
        basis,
        height_bound,
        Certainty::Numerical,
    ))
}

/// Checkpointed walk output: plane snapshots and the steps they were taken at.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub planes: Vec<TwoPlane>,
    pub steps: Vec<u64>,
}

/// Walker bookkeeping kept alongside the current plane.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub current: TwoPlane,
    pub step_index: u64,
    pub rng_seed: u64,
    pub word_log: Option<Vec<usize>>,
}

/// Chart window for the walk gauge: planes whose basis norm square exceeds
/// this are pulled back by a deterministic product of generators.
const WALK_WINDOW: f64 = CHART_NORM_BOUND;

/// Greedy Euclidean norm descent over the generator set. The gauge element
/// lies in the generated group, so the reduced plane is another point of the
/// same orbit; without it the iterated walk drifts along the boost directions
/// and leaves `f64` range within a few hundred steps.
fn reduce_into_window(matrices: &[Vec<Vec<f64>>], x: &mut Vec<f64>, y: &mut Vec<f64>) {
    let mut score = crate::lattice::eucl_norm_sq(x) + crate::lattice::eucl_norm_sq(y);
    if score <= WALK_WINDOW {
        return;
    }
    for _ in 0..512 {
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        for m in matrices {
            let gx = apply_rows(m, x);
            let gy = apply_rows(m, y);
            let s = crate::lattice::eucl_norm_sq(&gx) + crate::lattice::eucl_norm_sq(&gy);
            if s < score * (1.0 - 1e-9) && best.as_ref().map_or(true, |(bs, _, _)| s < *bs) {
                best = Some((s, gx, gy));
            }
        }
        match best {
            Some((s, gx, gy)) => {
                *x = gx;
                *y = gy;
                score = s;
                if score <= WALK_WINDOW {
                    return;
                }
            }
            None => return,
        }
    }
}

/// Iterates the generator action from `start`, emitting the plane at step 0,
/// at every multiple of `checkpoint_every`, and at the final step. After each
/// step the plane is gauge-reduced into the chart window (see
/// [`reduce_into_window`]), so emitted planes are orbit points with bounded
/// coordinates.
pub fn run_walk(
    lat: &QuadraticLattice,
    gens: &GeneratorSet,
    start: &TwoPlane,
    steps: u64,
    seed: u64,
    checkpoint_every: u64,
    eps: f64,
    log_words: bool,
) -> Result<(Trajectory, WalkState), DynamicsError> {
    if checkpoint_every == 0 {
        return Err(DynamicsError::BadCheckpointInterval);
    }
    let matrices: Vec<Vec<Vec<f64>>> = gens
        .elements()
        .iter()
        .map(|g| g.matrix().to_f64_rows())
        .collect();
    let mut rng = SplitMix64::new(seed);
    let mut planes = Vec::with_capacity((steps / checkpoint_every + 2) as usize);
    let mut step_marks = Vec::with_capacity(planes.capacity());
    planes.push(start.clone());
    step_marks.push(0u64);
    let mut current = start.clone();
    let mut word_log = if log_words { Some(Vec::new()) } else { None };
    for k in 1..=steps {
        let idx = rng.next_below(gens.len() as u64) as usize;
        if let Some(log) = word_log.as_mut() {
            log.push(idx);
        }
        let [x, y] = current.basis();
        let mut gx = apply_rows(&matrices[idx], x);
        let mut gy = apply_rows(&matrices[idx], y);
        reduce_into_window(&matrices, &mut gx, &mut gy);
        current = TwoPlane::new(lat, &gx, &gy, eps)?;
        if k % checkpoint_every == 0 || k == steps {
            planes.push(current.clone());
            step_marks.push(k);
        }
    }
    let state = WalkState {
        current,
        step_index: steps,
        rng_seed: seed,
        word_log,
    };
    Ok((
        Trajectory {
            planes,
            steps: step_marks,
        },
        state,
    ))
}

/// Coverage of a reference chart by a trajectory, with the running fraction
/// recorded at every checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub steps: u64,
    pub epsilon: f64,
    pub reference_count: usize,
    pub covered_fraction: f64,
    pub history: Vec<(u64, f64)>,
}

/// Index of the first trajectory plane within `epsilon` of the reference.
pub fn first_cover_index(
    traj_euclid: &[[Vec<f64>; 2]],
    reference: &TwoPlane,
    epsilon: f64,
) -> Option<usize> {
    let r = reference.euclid_basis();
    traj_euclid.iter().position(|t| {
        let (t1, t2) = principal_angles(t, &r);
        (t1 * t1 + t2 * t2).sqrt() <= epsilon
    })
}

/// Euclidean-orthonormal bases for a batch of planes; the precomputation that
/// makes coverage scoring cheap and embarrassingly parallel.
pub fn euclid_bases(planes: &[TwoPlane]) -> Vec<[Vec<f64>; 2]> {
    planes.iter().map(|p| p.euclid_basis()).collect()
}

pub fn coverage(
    traj: &Trajectory,
    references: &[TwoPlane],
    epsilon: f64,
) -> Result<CoverageReport, DynamicsError> {
    if traj.planes.is_empty() {
        return Err(DynamicsError::EmptyTrajectory);
    }
    if references.is_empty() {
        return Err(DynamicsError::EmptyReferences);
    }
    if !(epsilon > 0.0) {
        return Err(DynamicsError::NonPositiveEpsilon);
    }
    let traj_bases = euclid_bases(&traj.planes);
    let firsts: Vec<Option<usize>> = references
        .iter()
        .map(|r| first_cover_index(&traj_bases, r, epsilon))
        .collect();
    Ok(coverage_from_first_indices(traj, &firsts, epsilon))
}

/// Assembles the report from per-reference first-cover indices (the merge
/// step for parallel scorers; indices must follow the references' order).
pub fn coverage_from_first_indices(
    traj: &Trajectory,
    firsts: &[Option<usize>],
    epsilon: f64,
) -> CoverageReport {
    let n = firsts.len();
    let mut history = Vec::with_capacity(traj.steps.len());
    let mut covered_at = alloc::vec![0usize; traj.planes.len()];
    for f in firsts.iter().flatten() {
        covered_at[*f] += 1;
    }
    let mut running = 0usize;
    for (i, &step) in traj.steps.iter().enumerate() {
        running += covered_at[i];
        history.push((step, running as f64 / n as f64));
    }
    CoverageReport {
        steps: *traj.steps.last().expect("nonempty trajectory"),
        epsilon,
        reference_count: n,
        covered_fraction: running as f64 / n as f64,
        history,
    }
}

/// Norm bound defining the compact chart: sampled reference planes keep
/// `|x|^2 + |y|^2` of the orthonormalized basis below this, the same window
/// the walk gauge reduces into.
pub const CHART_NORM_BOUND: f64 = 16.0;

/// Rejection-samples positive planes with coordinates uniform in
/// `[-coefficient_bound, coefficient_bound]`, keeping those whose
/// orthonormalized basis stays inside the chart window; deterministic in the
/// seed.
pub fn sample_reference_chart(
    lat: &QuadraticLattice,
    count: usize,
    coefficient_bound: f64,
    seed: u64,
    eps: f64,
) -> Result<Vec<TwoPlane>, DynamicsError> {
    if count == 0 || !(coefficient_bound > 0.0) {
        return Err(DynamicsError::BadSampleRequest);
    }
    let rank = lat.rank();
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0u64;
    while out.len() < count {
        attempts += 1;
        if attempts >= 1000 && (out.len() as u64) * 1000 < attempts {
            return Err(DynamicsError::RejectionRateTooHigh);
        }
        let x: Vec<f64> = (0..rank)
            .map(|_| rng.next_in(-coefficient_bound, coefficient_bound))
            .collect();
        let y: Vec<f64> = (0..rank)
            .map(|_| rng.next_in(-coefficient_bound, coefficient_bound))
            .collect();
        if let Ok(plane) = TwoPlane::new(lat, &x, &y, eps) {
            let [bx, by] = plane.basis();
            let norm: f64 = bx.iter().chain(by.iter()).map(|a| a * a).sum();
            if norm <= CHART_NORM_BOUND {
                out.push(plane);
            }
        }
    }
    Ok(out)
}
