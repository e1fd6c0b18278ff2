//! Phase rigidity, exceptional-point detection and rigidity scaling.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{fit_power_law, FitError, FitWindow, PowerLawFit};
use crate::linalg::{
    eig_default, eigenvalues, matrix_power, numerical_rank, spectral_order, ComplexDense, LinalgError,
    SortKey,
};
use crate::scalar::{cabs, to_c64, Extended, Precision, Real};
use crate::synthesis::{build_chain_in, ChainSpec, SynthesisError};
use crate::tracking::{track, TrackingError};

type C64 = Complex<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpError {
    #[error("phase rigidity of the zero vector is undefined")]
    ZeroVector,
    #[error("level {level} out of range for N = {n}")]
    LevelOutOfRange { level: usize, n: usize },
    #[error("|gamma| = {gamma} exceeds J = {coupling}: no real mixing angle")]
    OutsideExactPhase { gamma: f64, coupling: f64 },
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("control value {control} must be finite and nonzero")]
    InvalidControl { control: f64 },
    #[error("eigensolver failed at control {control}: {source}")]
    Eigen { control: f64, source: LinalgError },
    #[error("level tracking failed at control {control}: {source}")]
    Tracking { control: f64, source: TrackingError },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

pub type Result<T> = std::result::Result<T, EpError>;

/// `|Σ ψᵢ²| / Σ |ψᵢ|²`.
pub fn phase_rigidity<T: Real>(psi: &[Complex<T>]) -> Result<f64> {
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    for &z in psi {
        num = num + z * z;
        den += z.norm_sqr();
    }
    if den == T::zero() {
        return Err(EpError::ZeroVector);
    }
    Ok((cabs(num) / den).to_f64())
}

/// Rigidity of a two-level eigenstate: `√(1−γ²/J²)` in the exact phase and
/// `√(1−J²/γ²)` in the broken phase.
pub fn rigidity_analytic(coupling: f64, gamma: f64) -> f64 {
    let x = (gamma / coupling).abs();
    if x <= 1.0 {
        (1.0 - x * x).sqrt()
    } else {
        (1.0 - 1.0 / (x * x)).sqrt()
    }
}

/// `u₁^{⊗l} ⊗ u₂^{⊗(N−1−l)}` with `u₁ = (e^{iθ}, 1)/√2`,
/// `u₂ = (−e^{−iθ}, 1)/√2` and `sin θ = γ/J`.
pub fn direct_product_state(level: usize, n: usize, coupling: f64, gamma: f64) -> Result<Vec<C64>> {
    if level >= n {
        return Err(EpError::LevelOutOfRange { level, n });
    }
    if gamma.abs() > coupling {
        return Err(EpError::OutsideExactPhase { gamma, coupling });
    }
    let s = gamma / coupling;
    let c = (1.0 - s * s).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u1 = [Complex::new(c * h, s * h), Complex::new(h, 0.0)];
    let u2 = [Complex::new(-c * h, s * h), Complex::new(h, 0.0)];
    let mut out = vec![Complex::new(1.0, 0.0)];
    for k in 0..n - 1 {
        let u = if k < level { &u1 } else { &u2 };
        out = out
            .iter()
            .flat_map(|&a| u.iter().map(move |&b| a * b))
            .collect();
    }
    Ok(out)
}

/// Parameter approached in a rigidity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlAxis {
    /// `γ = J − control` with the chain's `Δ`.
    Gamma,
    /// `Δ = control` with `γ = J`.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityRecord {
    /// Distance `|γ − J|` or `|Δ|` from the exceptional point.
    pub control: f64,
    /// Level label, `0..N` in ascending real part at the point farthest from the EP.
    pub level_index: usize,
    pub rigidity: f64,
}

struct PointSpectrum {
    values: Vec<C64>,
    rigidity: Vec<f64>,
}

fn point_spectrum<T: Real>(spec: &ChainSpec, axis: ControlAxis, control: f64) -> std::result::Result<PointSpectrum, LinalgError> {
    let j = T::from_f64(spec.coupling);
    let c = T::from_f64(control);
    let (gamma, delta) = match axis {
        ControlAxis::Gamma => (j - c, T::from_f64(spec.delta)),
        ControlAxis::Delta => (j, c),
    };
    let h = build_chain_in::<T>(spec, gamma, delta);
    let s = eig_default(&h)?;
    let rigidity = s
        .eigenvectors
        .iter()
        .map(|v| phase_rigidity(v).expect("unit eigenvector"))
        .collect();
    Ok(PointSpectrum {
        values: s.eigenvalues_c64(),
        rigidity,
    })
}

/// Per-level `|r|` along a sweep toward the exceptional point.
///
/// Grid points are solved in parallel; levels are labelled by ascending real
/// part at the point farthest from the EP and continued inward by nearest
/// distance. Records come back in grid order, levels ascending.
pub fn rigidity_sweep(
    spec: &ChainSpec,
    axis: ControlAxis,
    grid: &[f64],
    precision: Precision,
) -> Result<Vec<RigidityRecord>> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(EpError::EmptyGrid);
    }
    if let Some(&c) = grid.iter().find(|c| !c.is_finite() || **c == 0.0) {
        return Err(EpError::InvalidControl { control: c });
    }
    let solved: Vec<_> = grid
        .par_iter()
        .map(|&c| match precision {
            Precision::Double => point_spectrum::<f64>(spec, axis, c),
            Precision::Extended => point_spectrum::<Extended>(spec, axis, c),
        })
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    for (r, &c) in solved.into_iter().zip(grid) {
        points.push(r.map_err(|source| EpError::Eigen { control: c, source })?);
    }

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].abs().partial_cmp(&grid[a].abs()).expect("finite grid"));
    let n = spec.n;
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); grid.len()];
    let first = order[0];
    // eig already returns (Re, Im) order.
    labels[first] = (0..n).collect();
    let mut prev = first;
    for &k in &order[1..] {
        let prev_by_level: Vec<C64> = {
            let mut v = vec![C64::zero(); n];
            for (idx, &lvl) in labels[prev].iter().enumerate() {
                v[lvl] = points[prev].values[idx];
            }
            v
        };
        let perm = track(&prev_by_level, &points[k].values, 0.0)
            .map_err(|source| EpError::Tracking { control: grid[k], source })?;
        let mut lab = vec![0; n];
        for (lvl, &idx) in perm.iter().enumerate() {
            lab[idx] = lvl;
        }
        labels[k] = lab;
        prev = k;
    }

    let mut out = Vec::with_capacity(grid.len() * n);
    for (k, &c) in grid.iter().enumerate() {
        let mut row: Vec<RigidityRecord> = (0..n)
            .map(|idx| RigidityRecord {
                control: c.abs(),
                level_index: labels[k][idx],
                rigidity: points[k].rigidity[idx].clamp(0.0, 1.0),
            })
            .collect();
        row.sort_by_key(|r| r.level_index);
        out.extend(row);
    }
    Ok(out)
}

/// Rigidities below this are indistinguishable from the EP value and are
/// left out of fits.
pub const RIGIDITY_FLOOR: f64 = 1e-13;

pub const RIGIDITY_FIT: FitWindow = FitWindow {
    min_points: 8,
    min_decades: 2.0,
};

/// Fit `|r| ∝ control^ν` for one level.
pub fn scaling_exponent(records: &[RigidityRecord], level: usize) -> Result<PowerLawFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped = 0;
    for r in records.iter().filter(|r| r.level_index == level) {
        if r.rigidity < RIGIDITY_FLOOR {
            dropped += 1;
            continue;
        }
        x.push(r.control);
        y.push(r.rigidity);
    }
    if dropped > 0 {
        log::warn!("level {level}: {dropped} point(s) with |r| < {RIGIDITY_FLOOR:e} excluded from fit");
    }
    Ok(fit_power_law(&x, &y, RIGIDITY_FIT)?)
}

pub const JORDAN_DEFAULT_TOL: f64 = 1e-8;
/// Relative singular-value cut for the rank of `H − ω₀I`.
const RANK_TOL: f64 = 1e-8;

/// Outcome of testing a matrix for an N-fold exceptional point at `ω₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanReport {
    pub is_epn: bool,
    /// `tr(H)/N`.
    pub coalesced_value: C64,
    /// `N − rank(H − ω₀I)`.
    pub rank_deficiency: usize,
    /// `‖(H−ω₀I)^N‖ / ‖H−ω₀I‖^N` (Frobenius).
    pub nilpotency_residual: f64,
    /// Number of eigenvalue clusters.
    pub cluster_count: usize,
    /// Radius used for clustering.
    pub cluster_radius: f64,
    pub eigenvalues: Vec<C64>,
}

/// Coalescence radius for `dim` eigenvalues of a possibly defective matrix:
/// the cluster tolerance widened to `2·eps^{1/dim}·‖H‖`.
pub fn defect_radius<T: Real>(dim: usize, norm: T, cluster_tol: T) -> T {
    let floor = T::from_f64(2.0) * T::epsilon().nth_root(dim.max(1)) * norm;
    cluster_tol.max(floor)
}

fn clusters(values: &[C64], radius: f64) -> Vec<usize> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if (values[i] - values[j]).norm() <= radius && label[j] > label[i] {
                    label[j] = label[i];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    label
}

pub fn jordan_check(h: &ComplexDense<f64>, omega0: f64, tol: f64) -> Result<JordanReport> {
    let n = h.dim();
    let w0 = Complex::new(omega0, 0.0);
    let a = h.shift(-w0);
    let norm = h.norm();
    let mut values = eigenvalues(h).map_err(|source| EpError::Eigen { control: omega0, source })?;
    let order = spectral_order(&values, 1e-8 * norm, SortKey::RealFirst);
    values = order.iter().map(|&k| values[k]).collect();
    let radius = defect_radius(n, norm, crate::linalg::cluster_tolerance(1e-12, norm));

    let labels = clusters(&values, radius);
    let mut distinct = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let cluster_count = distinct.len();

    let an = a.norm();
    let nilpotency_residual = if an == 0.0 {
        0.0
    } else {
        matrix_power(&a.scale(Complex::new(1.0 / an, 0.0)), n as u32).norm()
    };
    let rank = numerical_rank(&a, RANK_TOL).map_err(|source| EpError::Eigen { control: omega0, source })?;
    let coalesced_value = h.trace() / n as f64;
    let at_w0 = values.iter().all(|z| (z - w0).norm() <= radius);
    let is_epn = cluster_count == 1 && at_w0 && rank + 1 == n && nilpotency_residual <= tol;
    Ok(JordanReport {
        is_epn,
        coalesced_value,
        rank_deficiency: n - rank,
        nilpotency_residual,
        cluster_count,
        cluster_radius: radius,
        eigenvalues: values.iter().map(|&z| to_c64(z)).collect(),
    })
}
