//! Branch continuation between neighbouring sweep points.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{cabs, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackingError {
    #[error("branch count changed from {previous} to {next}")]
    LengthMismatch { previous: usize, next: usize },
    #[error("branch {branch} is ambiguous: nearest candidate at {nearest:e}, runner-up at {runner_up:e}")]
    Ambiguous {
        branch: usize,
        nearest: f64,
        runner_up: f64,
    },
}

/// Runner-up must be farther than the chosen match by this factor.
const AMBIGUITY_RATIO: f64 = 1.0 + 1e-3;

/// Assign each branch of `previous` to a point of `next` by greedy nearest
/// distance. Returns `perm` with `next[perm[k]]` continuing `previous[k]`.
///
/// A branch whose best unclaimed candidate is not clearly closer than every
/// other candidate is reported as ambiguous rather than guessed. Distances
/// below `floor` count as coincident and never trigger ambiguity.
pub fn track<T: Real>(
    previous: &[Complex<T>],
    next: &[Complex<T>],
    floor: T,
) -> Result<Vec<usize>, TrackingError> {
    let n = previous.len();
    if next.len() != n {
        return Err(TrackingError::LengthMismatch {
            previous: n,
            next: next.len(),
        });
    }
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(n * n);
    for (i, &p) in previous.iter().enumerate() {
        for (j, &q) in next.iter().enumerate() {
            pairs.push((cabs(p - q), i, j));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite distances")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for &(_, i, j) in &pairs {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
        }
    }

    let ratio = T::from_f64(AMBIGUITY_RATIO);
    for i in 0..n {
        let chosen = cabs(previous[i] - next[perm[i]]);
        let runner_up = (0..n)
            .filter(|&j| j != perm[i])
            .map(|j| cabs(previous[i] - next[j]))
            .fold(None, |m: Option<T>, d| Some(m.map_or(d, |m| m.min(d))));
        if let Some(r) = runner_up {
            if r > floor && r < chosen * ratio {
                return Err(TrackingError::Ambiguous {
                    branch: i,
                    nearest: chosen.to_f64(),
                    runner_up: r.to_f64(),
                });
            }
        }
    }
    Ok(perm)
}
