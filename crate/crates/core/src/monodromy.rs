//! Reflection generator sets and their action on period planes.
//!
//! The monodromy group is only known abstractly as a finite-index subgroup of
//! the integral orthogonal group, so the artifact works with a constructive
//! surrogate: all integral reflections whose root has coordinates bounded by
//! a height. Reflections are involutions, which makes the generator set
//! inverse-closed for free; group elements stay exact integer matrices no
//! matter how long the word.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{IsometryElement, LatticeError, LatticeVector, QuadraticLattice};
use crate::mat::IMatrix;
use crate::period::{PlaneError, TwoPlane};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum MonodromyError {
    Lattice(LatticeError),
    Plane(PlaneError),
    /// No admissible reflection vector at this height; raise the bound.
    NoGenerators { height_bound: i64 },
}

impl From<LatticeError> for MonodromyError {
    fn from(e: LatticeError) -> Self {
        Self::Lattice(e)
    }
}

impl From<PlaneError> for MonodromyError {
    fn from(e: PlaneError) -> Self {
        Self::Plane(e)
    }
}

impl core::fmt::Display for MonodromyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Lattice(e) => write!(f, "{e}"),
            Self::Plane(e) => write!(f, "{e}"),
            Self::NoGenerators { height_bound } => write!(
                f,
                "no admissible reflection vectors at height {height_bound}; raise the bound"
            ),
        }
    }
}

/// Symmetric set of integral reflections with provenance.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    elements: Vec<IsometryElement>,
    deltas: Vec<LatticeVector>,
    height_bound: i64,
}

impl GeneratorSet {
    pub fn elements(&self) -> &[IsometryElement] {
        &self.elements
    }

    pub fn deltas(&self) -> &[LatticeVector] {
        &self.deltas
    }

    pub fn height_bound(&self) -> i64 {
        self.height_bound
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &IsometryElement {
        &self.elements[i]
    }
}

/// Enumerates root candidates with coordinates in `[-height, height]` (one
/// representative per `{delta, -delta}`), keeps those admitting integral
/// reflections, and deduplicates by the resulting matrix.
pub fn build_generators(
    lat: &QuadraticLattice,
    height_bound: i64,
) -> Result<GeneratorSet, MonodromyError> {
    if height_bound < 1 {
        return Err(MonodromyError::Lattice(LatticeError::HeightBoundTooSmall));
    }
    let rank = lat.rank();
    let mut elements = Vec::new();
    let mut deltas = Vec::new();
    let mut seen: BTreeSet<IMatrix> = BTreeSet::new();

    let mut coords = vec![0i64; rank];
    visit_candidates(&mut coords, 0, true, height_bound, &mut |c: &[i64]| {
        let delta = LatticeVector::from_i64(c);
        if let Ok(r) = lat.reflection(&delta) {
            if seen.insert(r.matrix().clone()) {
                elements.push(r);
                deltas.push(delta);
            }
        }
    });

    if elements.is_empty() {
        return Err(MonodromyError::NoGenerators { height_bound });
    }
    Ok(GeneratorSet {
        elements,
        deltas,
        height_bound,
    })
}

fn visit_candidates(
    coords: &mut Vec<i64>,
    depth: usize,
    zero_prefix: bool,
    height: i64,
    visit: &mut impl FnMut(&[i64]),
) {
    if depth == coords.len() {
        if !zero_prefix {
            visit(coords);
        }
        return;
    }
    let lo = if zero_prefix { 0 } else { -height };
    for val in lo..=height {
        coords[depth] = val;
        visit_candidates(coords, depth + 1, zero_prefix && val == 0, height, visit);
    }
    coords[depth] = 0;
}

/// Applies an isometry to both basis vectors and re-orthonormalizes; the
/// ordered image transports the orientation.
pub fn act(
    lat: &QuadraticLattice,
    g: &IsometryElement,
    plane: &TwoPlane,
    eps: f64,
) -> Result<TwoPlane, MonodromyError> {
    let rows = g.matrix().to_f64_rows();
    let [x, y] = plane.basis();
    let gx = apply_rows(&rows, x);
    let gy = apply_rows(&rows, y);
    Ok(TwoPlane::new(lat, &gx, &gy, eps)?)
}

pub(crate) fn apply_rows(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Uniform word of the given length, composed left to right; deterministic in
/// the seed, with the generator indices recorded.
pub fn random_word(gens: &GeneratorSet, length: usize, seed: u64) -> IsometryElement {
    let rank = gens
        .elements
        .first()
        .map_or(0, |e| e.matrix().n_rows());
    let mut acc = IMatrix::identity(rank);
    let mut word = Vec::with_capacity(length);
    let mut rng = SplitMix64::new(seed);
    for _ in 0..length {
        let idx = rng.next_below(gens.len() as u64) as usize;
        word.push(idx);
        acc = acc.mul(gens.get(idx).matrix());
    }
    IsometryElement::new(acc, Some(word))
}
