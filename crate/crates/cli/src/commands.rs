//! Command implementations. Each returns the process exit code:
//! 0 success (or ergodic verdict), 2 invalid input, 3 closed orbit,
//! 4 empty generator set, 5 chain budget exhausted.

use std::fs;
use std::path::Path;

use period_dynamics_core::connectivity::{connect, ChainError, DEFAULT_CHAIN_TOL};
use period_dynamics_core::dynamics::{
    classify_point, coverage_from_first_indices, euclid_bases, first_cover_index, run_walk,
    sample_reference_chart, Trajectory,
};
use period_dynamics_core::lattice::{normalize_form, recover_bbf, LatticeVector};
use period_dynamics_core::monodromy::{build_generators, MonodromyError};
use period_dynamics_core::period::{dimension_report, line_to_plane, TwoPlane};
use period_dynamics_core::DEFAULT_EPS;

use crate::formats::{
    decimal17, gram_strings, ratio_string, write_json, write_trajectory_csv, ChainFile,
    CoverageFile, EndpointsFile, GeneratorsFile, LatticeFile, PeriodPointFile, PlaneFile,
    Provenance, RecoveryFile, VerdictFile,
};
use crate::CliError;

/// Seeds for derived streams so references, start plane, and the walk itself
/// are independent but all reproducible from one seed.
const REF_SEED_SALT: u64 = 0x9E37_79B9_0000_0001;
const START_SEED_SALT: u64 = 0x9E37_79B9_0000_0002;

pub fn lattice_info(lattice_path: &Path) -> Result<i32, CliError> {
    let lat = LatticeFile::load(lattice_path)?.into_lattice()?;
    let (pos, neg, zero) = lat.signature();
    let dims = dimension_report(lat.rank() as u32).map_err(|e| CliError::invalid(e.to_string()))?;
    println!("rank: {}", lat.rank());
    println!("signature: ({pos}, {neg}, {zero})");
    println!("determinant: {}", lat.determinant());
    println!("fujiki_constant: {}", ratio_string(lat.fujiki_constant()));
    println!("half_dim: {}", lat.half_dim());
    println!("perspace_dim: {}", dims.perspace_dim);
    println!("kahler_cone_dim: {}", dims.kahler_cone_dim);
    println!("teich_h_dim: {}", dims.teich_h_dim);
    Ok(0)
}

pub fn classify(
    lattice_path: &Path,
    period_path: &Path,
    height_bound: i64,
    out_dir: &Path,
) -> Result<i32, CliError> {
    let lat = LatticeFile::load(lattice_path)?.into_lattice()?;
    let point = PeriodPointFile::load(period_path)?.into_point(&lat)?;
    let plane =
        line_to_plane(&lat, &point, DEFAULT_EPS).map_err(|e| CliError::invalid(e.to_string()))?;
    let verdict = classify_point(&lat, &plane, height_bound, DEFAULT_EPS)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    ensure_out_dir(out_dir)?;
    let provenance = Provenance::new(
        "classify",
        &[
            ("lattice", lattice_path.display().to_string()),
            ("period", period_path.display().to_string()),
            ("height_bound", height_bound.to_string()),
        ],
    );
    write_json(
        &out_dir.join("verdict.json"),
        &VerdictFile::new(&verdict, provenance)?,
    )?;
    println!(
        "{} (ns rank {}, {})",
        verdict.kind().as_str(),
        verdict.ns_rank(),
        verdict.certainty().as_str()
    );
    Ok(VerdictFile::exit_code(verdict.kind()))
}

#[allow(clippy::too_many_arguments)]
pub fn walk(
    lattice_path: &Path,
    seed: u64,
    steps: u64,
    checkpoint_every: u64,
    height_bound: i64,
    reference_count: usize,
    coefficient_bound: f64,
    epsilon: f64,
    start_path: Option<&Path>,
    out_dir: &Path,
) -> Result<i32, CliError> {
    let lat = LatticeFile::load(lattice_path)?.into_lattice()?;
    let gens = match build_generators(&lat, height_bound) {
        Ok(g) => g,
        Err(MonodromyError::NoGenerators { height_bound }) => {
            return Err(CliError::with_code(
                4,
                format!("no admissible reflection vectors at height {height_bound}; raise --height-bound"),
            ))
        }
        Err(e) => return Err(CliError::invalid(e.to_string())),
    };
    println!("generators: {} at height {}", gens.len(), gens.height_bound());
    let references = sample_reference_chart(
        &lat,
        reference_count,
        coefficient_bound,
        seed ^ REF_SEED_SALT,
        DEFAULT_EPS,
    )
    .map_err(|e| CliError::invalid(e.to_string()))?;
    let start = match start_path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", p.display())))?;
            let file: PlaneFile = serde_json::from_str(&text)
                .map_err(|e| CliError::invalid(format!("malformed plane JSON: {e}")))?;
            file.into_plane(&lat)?
        }
        None => sample_reference_chart(&lat, 1, coefficient_bound, seed ^ START_SEED_SALT, DEFAULT_EPS)
            .map_err(|e| CliError::invalid(e.to_string()))?
            .remove(0),
    };
    let (trajectory, _state) = run_walk(
        &lat,
        &gens,
        &start,
        steps,
        seed,
        checkpoint_every,
        DEFAULT_EPS,
        false,
    )
    .map_err(|e| CliError::invalid(e.to_string()))?;
    if !(epsilon > 0.0) {
        return Err(CliError::invalid("epsilon must be positive"));
    }
    let firsts = parallel_first_cover(&trajectory, &references, epsilon);
    let report = coverage_from_first_indices(&trajectory, &firsts, epsilon);

    ensure_out_dir(out_dir)?;
    let config = [
        ("lattice", lattice_path.display().to_string()),
        ("seed", seed.to_string()),
        ("steps", steps.to_string()),
        ("checkpoint_every", checkpoint_every.to_string()),
        ("height_bound", height_bound.to_string()),
        ("reference_count", reference_count.to_string()),
        ("coefficient_bound", decimal17(coefficient_bound)),
        ("epsilon", decimal17(epsilon)),
        (
            "start",
            start_path.map_or_else(|| "(chart sample)".into(), |p| p.display().to_string()),
        ),
    ];
    write_trajectory_csv(
        &out_dir.join("trajectory.csv"),
        &trajectory,
        &Provenance::new("walk", &config),
    )?;
    write_json(
        &out_dir.join("coverage.json"),
        &CoverageFile::new(&report, Provenance::new("walk", &config)),
    )?;
    write_json(
        &out_dir.join("generators.json"),
        &GeneratorsFile::new(&gens, Provenance::new("walk", &config)),
    )?;
    println!("covered_fraction: {}", decimal17(report.covered_fraction));
    Ok(0)
}

/// Per-reference first-cover search, chunked across worker threads. The env
/// var PERIOD_DYNAMICS_THREADS caps the worker count; results are merged in
/// reference order, so the output does not depend on the thread count.
fn parallel_first_cover(
    trajectory: &Trajectory,
    references: &[TwoPlane],
    epsilon: f64,
) -> Vec<Option<usize>> {
    let threads = std::env::var("PERIOD_DYNAMICS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get().min(8))
                .unwrap_or(1)
        })
        .min(references.len().max(1));
    let traj_bases = euclid_bases(&trajectory.planes);
    if threads <= 1 {
        return references
            .iter()
            .map(|r| first_cover_index(&traj_bases, r, epsilon))
            .collect();
    }
    let chunk = references.len().div_ceil(threads);
    let mut out = Vec::with_capacity(references.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = references
            .chunks(chunk)
            .map(|refs| {
                let bases = &traj_bases;
                scope.spawn(move || {
                    refs.iter()
                        .map(|r| first_cover_index(bases, r, epsilon))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("coverage worker panicked"));
        }
    });
    out
}

#[allow(clippy::too_many_arguments)]
pub fn chain(
    lattice_path: &Path,
    endpoints_path: &Path,
    seed: u64,
    ball_radius: f64,
    max_steps: usize,
    height_bound: i64,
    out_dir: &Path,
) -> Result<i32, CliError> {
    let lat = LatticeFile::load(lattice_path)?.into_lattice()?;
    let endpoints = EndpointsFile::load(endpoints_path)?;
    let p1 = endpoints.from.into_plane(&lat)?;
    let p2 = endpoints.to.into_plane(&lat)?;
    ensure_out_dir(out_dir)?;
    let provenance = Provenance::new(
        "chain",
        &[
            ("lattice", lattice_path.display().to_string()),
            ("endpoints", endpoints_path.display().to_string()),
            ("seed", seed.to_string()),
            ("ball_radius", decimal17(ball_radius)),
            ("max_steps", max_steps.to_string()),
            ("height_bound", height_bound.to_string()),
        ],
    );
    match connect(
        &lat,
        &p1,
        &p2,
        ball_radius,
        max_steps,
        seed,
        height_bound,
        DEFAULT_EPS,
        DEFAULT_CHAIN_TOL,
    ) {
        Ok(chain) => {
            write_json(&out_dir.join("chain.json"), &ChainFile::new(&chain, provenance))?;
            println!("steps: {}, final_distance: {}", chain.len(), decimal17(chain.final_distance()));
            Ok(0)
        }
        Err(ChainError::BudgetExhausted { partial })
        | Err(ChainError::BallUnsatisfiable { partial }) => {
            write_json(&out_dir.join("chain.json"), &ChainFile::new(&partial, provenance))?;
            println!(
                "steps: {}, final_distance: {} (budget exhausted)",
                partial.len(),
                decimal17(partial.final_distance())
            );
            Ok(5)
        }
        Err(e) => Err(CliError::invalid(e.to_string())),
    }
}

pub fn fujiki_recover(lattice_path: &Path, out_dir: &Path) -> Result<i32, CliError> {
    let lat = LatticeFile::load(lattice_path)?.into_lattice()?;
    let n = lat.half_dim();
    let evaluator = |v: &[num_bigint::BigInt]| {
        lat.fujiki_form(&LatticeVector::new(v.to_vec()))
            .expect("rank-matched probe")
    };
    let (q, c) =
        recover_bbf(evaluator, lat.rank(), n).map_err(|e| CliError::invalid(e.to_string()))?;
    let (q_expect, c_expect) = normalize_form(lat.gram(), lat.fujiki_constant(), n)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let matches = q == q_expect && c == c_expect;
    ensure_out_dir(out_dir)?;
    let provenance = Provenance::new(
        "fujiki-recover",
        &[("lattice", lattice_path.display().to_string())],
    );
    write_json(
        &out_dir.join("recovery.json"),
        &RecoveryFile {
            input_gram: gram_strings(lat.gram()),
            input_fujiki_constant: ratio_string(lat.fujiki_constant()),
            half_dim: n,
            recovered_gram: gram_strings(&q),
            recovered_fujiki_constant: ratio_string(&c),
            matches_normalized_input: matches,
            provenance,
        },
    )?;
    println!(
        "recovered c = {}, matches normalized input: {matches}",
        ratio_string(&c)
    );
    if matches {
        Ok(0)
    } else {
        Err(CliError::invalid(
            "recovered form does not match the normalized input",
        ))
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::invalid(format!("cannot create {}: {e}", dir.display())))
}
