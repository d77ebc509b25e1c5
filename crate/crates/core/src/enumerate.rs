//! Bounded-height enumeration of integer vectors satisfying near-orthogonality
//! constraints.
//!
//! Finds every nonzero `v` with coordinates in `[-h, h]` such that
//! `|<v, row_k>| <= eps` for all constraint rows, one representative per
//! `{v, -v}` pair (first nonzero coordinate positive). The walk scans leading
//! coordinates with interval pruning; once the number of free coordinates
//! equals the number of constraints, the remaining square system is solved
//! directly when it is well conditioned, which keeps the cost near
//! `(2h+1)^(rank-k)` instead of the full box.

use alloc::vec;
use alloc::vec::Vec;

/// All canonical-sign solutions of the constraint system over the box.
pub fn bounded_solutions(rows: &[Vec<f64>], height: i64, eps: f64) -> Vec<Vec<i64>> {
    assert!(!rows.is_empty(), "at least one constraint row required");
    let n = rows[0].len();
    assert!(rows.iter().all(|r| r.len() == n), "ragged constraint rows");
    let k = rows.len();
    assert!(k <= 8, "at most 8 constraint rows supported");
    let h = height as f64;

    // rest[r][d] bounds the contribution of coordinates >= d to constraint r.
    let mut rest = vec![vec![0.0f64; n + 1]; k];
    for (r, row) in rows.iter().enumerate() {
        for d in (0..n).rev() {
            rest[r][d] = rest[r][d + 1] + h * row[d].abs();
        }
    }

    let mut out = Vec::new();
    let mut v = vec![0i64; n];
    let mut partial = vec![0.0f64; k];
    descend(rows, &rest, height, eps, 0, true, &mut v, &mut partial, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn descend(
    rows: &[Vec<f64>],
    rest: &[Vec<f64>],
    height: i64,
    eps: f64,
    depth: usize,
    zero_prefix: bool,
    v: &mut [i64],
    partial: &mut [f64],
    out: &mut Vec<Vec<i64>>,
) {
    let n = rows[0].len();
    let k = rows.len();
    let remaining = n - depth;

    if remaining == 0 {
        if !zero_prefix && partial.iter().all(|p| p.abs() <= eps) {
            out.push(v.to_vec());
        }
        return;
    }

    if remaining == k && (2..=3).contains(&k) {
        if let Some(tail) = solve_square(rows, depth, partial, height, eps) {
            for cand in tail {
                emit_candidate(rows, depth, &cand, partial, height, eps, zero_prefix, v, out);
            }
            return;
        }
    }

    let lo = if zero_prefix { 0 } else { -height };
    let saved: Vec<f64> = partial.to_vec();
    for val in lo..=height {
        v[depth] = val;
        let fval = val as f64;
        let mut feasible = true;
        let mut next = [0.0f64; 8];
        for r in 0..k {
            let p = saved[r] + fval * rows[r][depth];
            if p.abs() > eps + rest[r][depth + 1] {
                feasible = false;
                break;
            }
            next[r] = p;
        }
        if !feasible {
            continue;
        }
        partial[..k].copy_from_slice(&next[..k]);
        descend(
            rows,
            rest,
            height,
            eps,
            depth + 1,
            zero_prefix && val == 0,
            v,
            partial,
            out,
        );
    }
    partial.copy_from_slice(&saved);
    v[depth] = 0;
}

/// Candidate tails for the trailing k-by-k system, or `None` when the system
/// is too ill-conditioned for rounding to be trustworthy (caller scans).
fn solve_square(
    rows: &[Vec<f64>],
    depth: usize,
    partial: &[f64],
    height: i64,
    eps: f64,
) -> Option<Vec<Vec<i64>>> {
    let k = rows.len();
    let a: Vec<&[f64]> = rows.iter().map(|r| &r[depth..]).collect();
    let (inv_norm, x) = match k {
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if det == 0.0 {
                return None;
            }
            let inv_norm = (a[1][1].abs() + a[0][1].abs())
                .max(a[1][0].abs() + a[0][0].abs())
                / det.abs();
            let b = [-partial[0], -partial[1]];
            let x0 = (b[0] * a[1][1] - b[1] * a[0][1]) / det;
            let x1 = (a[0][0] * b[1] - a[1][0] * b[0]) / det;
            (inv_norm, vec![x0, x1])
        }
        3 => {
            let m = [
                [a[0][0], a[0][1], a[0][2]],
                [a[1][0], a[1][1], a[1][2]],
                [a[2][0], a[2][1], a[2][2]],
            ];
            let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
                m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
            };
            let det = m[0][0] * cof(1, 1, 2, 2) - m[0][1] * cof(1, 0, 2, 2) + m[0][2] * cof(1, 0, 2, 1);
            if det == 0.0 {
                return None;
            }
            // Adjugate columns give A^{-1} rows up to 1/det.
            let adj = [
                [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
                [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
                [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
            ];
            let inv_norm = adj
                .iter()
                .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0f64, f64::max)
                / det.abs();
            let b = [-partial[0], -partial[1], -partial[2]];
            let x: Vec<f64> = (0..3)
                .map(|i| (adj[i][0] * b[0] + adj[i][1] * b[1] + adj[i][2] * b[2]) / det)
                .collect();
            (inv_norm, x)
        }
        _ => return None,
    };
    // Any true solution lies within inv_norm * eps of x; rounding is safe
    // only when that radius stays below one lattice step.
    if !(inv_norm * eps).is_finite() || inv_norm * eps > 0.45 {
        return None;
    }
    if x.iter().any(|xi| xi.abs() > height as f64 + 1.5) {
        return Some(Vec::new());
    }
    let mut cands = vec![Vec::new()];
    for xi in &x {
        let r = libm_round(*xi);
        let mut next = Vec::new();
        for c in &cands {
            for off in [-1i64, 0, 1] {
                let val = r + off;
                if val.abs() <= height {
                    let mut cc: Vec<i64> = c.clone();
                    cc.push(val);
                    next.push(cc);
                }
            }
        }
        cands = next;
    }
    Some(cands)
}

fn libm_round(x: f64) -> i64 {
    num_traits::Float::round(x) as i64
}

#[allow(clippy::too_many_arguments)]
fn emit_candidate(
    rows: &[Vec<f64>],
    depth: usize,
    tail: &[i64],
    partial: &[f64],
    height: i64,
    eps: f64,
    zero_prefix: bool,
    v: &mut [i64],
    out: &mut Vec<Vec<i64>>,
) {
    let k = rows.len();
    for (r, p) in partial.iter().enumerate().take(k) {
        let mut total = *p;
        for (i, &t) in tail.iter().enumerate() {
            total += t as f64 * rows[r][depth + i];
        }
        if total.abs() > eps {
            return;
        }
    }
    if tail.iter().any(|t| t.abs() > height) {
        return;
    }
    if zero_prefix {
        match tail.iter().find(|&&t| t != 0) {
            None => return, // zero vector
            Some(&first) if first < 0 => return,
            _ => {}
        }
    }
    let mut full = v[..depth].to_vec();
    full.extend_from_slice(tail);
    out.push(full);
}
