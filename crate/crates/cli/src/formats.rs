//! File formats: lattice, period point, plane, and result files.
//!
//! Floats cross file boundaries as decimal strings with 17 significant
//! digits, which round-trip `f64` exactly and keep outputs byte-identical
//! across platforms. Every output embeds the tool version and the full
//! command configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use period_dynamics_core::connectivity::GhkChain;
use period_dynamics_core::dynamics::{CoverageReport, ErgodicityVerdict, VerdictKind};
use period_dynamics_core::lattice::{ratio_to_string, QuadraticLattice};
use period_dynamics_core::mat::IMatrix;
use period_dynamics_core::monodromy::GeneratorSet;
use period_dynamics_core::period::{PeriodPoint, TwoPlane};
use period_dynamics_core::DEFAULT_EPS;

use crate::CliError;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn decimal17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_decimal(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::invalid(format!("not a decimal number: {s:?}")))
}

fn decimal_row(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| decimal17(x)).collect()
}

fn parse_decimal_row(v: &[String]) -> Result<Vec<f64>, CliError> {
    v.iter().map(|s| parse_decimal(s)).collect()
}

/// `p/q` or `p`, exact.
pub fn parse_ratio(s: &str) -> Result<BigRational, CliError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| CliError::invalid(format!("not an integer: {num:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| CliError::invalid(format!("not an integer: {den:?}")))?;
    if d.is_zero() {
        return Err(CliError::invalid("zero denominator in rational"));
    }
    Ok(BigRational::new(n, d))
}

/// Lattice input: `{ "rank": int, "gram": [[int]], "fujiki_constant": "p/q",
/// "half_dim": int }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFile {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    pub fujiki_constant: String,
    pub half_dim: u32,
}

impl LatticeFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("malformed lattice JSON: {e}")))
    }

    /// Builds and validates the lattice, naming the violated invariant on
    /// failure; period-grade constraints (rank >= 4, signature (3, rank-3))
    /// are enforced here since every command works on the period space.
    pub fn into_lattice(self) -> Result<QuadraticLattice, CliError> {
        if self.gram.len() != self.rank || self.gram.iter().any(|r| r.len() != self.rank) {
            return Err(CliError::invalid(format!(
                "gram must be a {0}x{0} matrix matching \"rank\"",
                self.rank
            )));
        }
        let gram = IMatrix::from_rows(
            self.gram
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        );
        let c = parse_ratio(&self.fujiki_constant)?;
        let lat = QuadraticLattice::new(gram, c, self.half_dim)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        lat.require_period_grade()
            .map_err(|e| CliError::invalid(e.to_string()))?;
        Ok(lat)
    }
}

/// Period point file: `{ "re": [decimal...], "im": [decimal...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodPointFile {
    pub re: Vec<String>,
    pub im: Vec<String>,
}

impl PeriodPointFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("malformed period point JSON: {e}")))
    }

    pub fn into_point(self, lat: &QuadraticLattice) -> Result<PeriodPoint, CliError> {
        let re = parse_decimal_row(&self.re)?;
        let im = parse_decimal_row(&self.im)?;
        PeriodPoint::new(lat, &re, &im, DEFAULT_EPS).map_err(|e| CliError::invalid(e.to_string()))
    }

    pub fn from_point(p: &PeriodPoint) -> Self {
        Self {
            re: decimal_row(p.re()),
            im: decimal_row(p.im()),
        }
    }
}

/// Plane file: `{ "basis": [[decimal...], [decimal...]] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneFile {
    pub basis: Vec<Vec<String>>,
}

impl PlaneFile {
    pub fn into_plane(self, lat: &QuadraticLattice) -> Result<TwoPlane, CliError> {
        if self.basis.len() != 2 {
            return Err(CliError::invalid("plane basis must hold exactly 2 vectors"));
        }
        let x = parse_decimal_row(&self.basis[0])?;
        let y = parse_decimal_row(&self.basis[1])?;
        TwoPlane::new(lat, &x, &y, DEFAULT_EPS).map_err(|e| CliError::invalid(e.to_string()))
    }

    pub fn from_plane(p: &TwoPlane) -> Self {
        let [x, y] = p.basis();
        Self {
            basis: vec![decimal_row(x), decimal_row(y)],
        }
    }
}

/// Chain endpoints: `{ "from": plane, "to": plane }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointsFile {
    pub from: PlaneFile,
    pub to: PlaneFile,
}

impl EndpointsFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("malformed endpoints JSON: {e}")))
    }
}

/// Tool and configuration echo embedded in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, config: &[(&str, String)]) -> Self {
        Self {
            tool: "period-dynamics".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config
                .iter()
                .map(|(k, v)| ((*k).to_string(), v.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictFile {
    pub kind: &'static str,
    pub ns_rank: usize,
    pub ns_basis: Vec<Vec<i64>>,
    pub detection_height: i64,
    pub certainty: &'static str,
    pub provenance: Provenance,
}

impl VerdictFile {
    pub fn new(v: &ErgodicityVerdict, provenance: Provenance) -> Result<Self, CliError> {
        use num_traits::ToPrimitive;
        let ns_basis = v
            .ns_basis()
            .vectors()
            .iter()
            .map(|vec| {
                vec.coords()
                    .iter()
                    .map(|c| {
                        c.to_i64().ok_or_else(|| {
                            CliError::internal("Neron-Severi basis entry exceeds i64")
                        })
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            kind: v.kind().as_str(),
            ns_rank: v.ns_rank(),
            ns_basis,
            detection_height: v.detection_height(),
            certainty: v.certainty().as_str(),
            provenance,
        })
    }

    pub fn exit_code(kind: VerdictKind) -> i32 {
        match kind {
            VerdictKind::Ergodic => 0,
            VerdictKind::ClosedOrbit => 3,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoverageFile {
    pub steps: u64,
    pub epsilon: String,
    pub reference_count: usize,
    pub covered_fraction: String,
    pub history: Vec<(u64, String)>,
    pub provenance: Provenance,
}

impl CoverageFile {
    pub fn new(r: &CoverageReport, provenance: Provenance) -> Self {
        Self {
            steps: r.steps,
            epsilon: decimal17(r.epsilon),
            reference_count: r.reference_count,
            covered_fraction: decimal17(r.covered_fraction),
            history: r
                .history
                .iter()
                .map(|(s, f)| (*s, decimal17(*f)))
                .collect(),
            provenance,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ChainStepFile {
    pub three_plane: Vec<Vec<String>>,
    pub from_plane: PlaneFile,
    pub to_plane: PlaneFile,
    pub genericity_height: i64,
    pub degenerate: bool,
    pub distance_to_endpoint: String,
}

#[derive(Debug, Serialize)]
pub struct ChainFile {
    pub steps: Vec<ChainStepFile>,
    pub from: PlaneFile,
    pub to: PlaneFile,
    pub ball_center: PlaneFile,
    pub ball_radius: String,
    pub step_count: usize,
    pub final_distance: String,
    pub provenance: Provenance,
}

impl ChainFile {
    pub fn new(chain: &GhkChain, provenance: Provenance) -> Self {
        Self {
            steps: chain
                .steps
                .iter()
                .map(|s| ChainStepFile {
                    three_plane: s
                        .three_plane
                        .basis()
                        .iter()
                        .map(|v| decimal_row(v))
                        .collect(),
                    from_plane: PlaneFile::from_plane(&s.from_plane),
                    to_plane: PlaneFile::from_plane(&s.to_plane),
                    genericity_height: s.genericity_height,
                    degenerate: s.degenerate,
                    distance_to_endpoint: decimal17(s.distance_to_target),
                })
                .collect(),
            from: PlaneFile::from_plane(&chain.endpoints.0),
            to: PlaneFile::from_plane(&chain.endpoints.1),
            ball_center: PlaneFile::from_plane(&chain.ball_center),
            ball_radius: decimal17(chain.ball_radius),
            step_count: chain.len(),
            final_distance: decimal17(chain.final_distance()),
            provenance,
        }
    }
}

/// Generator set: integer matrices plus the root vector provenance.
#[derive(Debug, Serialize)]
pub struct GeneratorsFile {
    pub height_bound: i64,
    pub count: usize,
    pub deltas: Vec<Vec<String>>,
    pub matrices: Vec<Vec<Vec<String>>>,
    pub provenance: Provenance,
}

impl GeneratorsFile {
    pub fn new(g: &GeneratorSet, provenance: Provenance) -> Self {
        Self {
            height_bound: g.height_bound(),
            count: g.len(),
            deltas: g
                .deltas()
                .iter()
                .map(|d| d.coords().iter().map(|c| c.to_string()).collect())
                .collect(),
            matrices: g
                .elements()
                .iter()
                .map(|e| {
                    e.matrix()
                        .rows_vec()
                        .iter()
                        .map(|row| row.iter().map(|x| x.to_string()).collect())
                        .collect()
                })
                .collect(),
            provenance,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RecoveryFile {
    pub input_gram: Vec<Vec<String>>,
    pub input_fujiki_constant: String,
    pub half_dim: u32,
    pub recovered_gram: Vec<Vec<String>>,
    pub recovered_fujiki_constant: String,
    pub matches_normalized_input: bool,
    pub provenance: Provenance,
}

pub fn gram_strings(m: &IMatrix) -> Vec<Vec<String>> {
    m.rows_vec()
        .iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect())
        .collect()
}

pub fn ratio_string(r: &BigRational) -> String {
    ratio_to_string(r)
}

/// Serializes to pretty JSON with a trailing newline; struct field order and
/// BTreeMap keys keep re-runs byte-identical.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::internal(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
}

/// Trajectory CSV: comment lines with provenance, a header, then one row per
/// checkpoint with the flattened plane basis.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &period_dynamics_core::dynamics::Trajectory,
    provenance: &Provenance,
) -> Result<(), CliError> {
    let rank = traj
        .planes
        .first()
        .map(TwoPlane::ambient_rank)
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!(
        "# {} {} {}\n",
        provenance.tool, provenance.version, provenance.command
    ));
    for (k, v) in &provenance.config {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("step");
    for leg in ["x", "y"] {
        for i in 0..rank {
            out.push_str(&format!(",{leg}{i}"));
        }
    }
    out.push('\n');
    for (plane, step) in traj.planes.iter().zip(traj.steps.iter()) {
        out.push_str(&step.to_string());
        let [x, y] = plane.basis();
        for v in x.iter().chain(y.iter()) {
            out.push(',');
            out.push_str(&decimal17(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal17_round_trips() {
        for &x in &[
            0.1,
            -1.0 / 3.0,
            core::f64::consts::SQRT_2,
            1.0,
            6.62607015e-34,
        ] {
            let s = decimal17(x);
            assert_eq!(parse_decimal(&s).unwrap(), x, "string was {s}");
        }
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_ratio("5").unwrap(), BigRational::from_integer(5.into()));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn lattice_file_diagnostics_name_the_invariant() {
        let bad_sym = LatticeFile {
            rank: 2,
            gram: vec![vec![1, 2], vec![0, 1]],
            fujiki_constant: "1".into(),
            half_dim: 1,
        };
        let err = bad_sym.into_lattice().unwrap_err();
        assert!(err.message().contains("symmetric"), "{}", err.message());

        let bad_rank = LatticeFile {
            rank: 3,
            gram: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]],
            fujiki_constant: "1".into(),
            half_dim: 1,
        };
        let err = bad_rank.into_lattice().unwrap_err();
        assert!(err.message().contains("rank must be at least 4"), "{}", err.message());

        let bad_sig = LatticeFile {
            rank: 4,
            gram: vec![
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
            ],
            fujiki_constant: "1".into(),
            half_dim: 2,
        };
        let err = bad_sig.into_lattice().unwrap_err();
        assert!(err.message().contains("signature"), "{}", err.message());
    }
}
