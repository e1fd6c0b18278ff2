//! Coupling perturbations of the chain and Newton–Puiseux splitting fits.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ep::defect_radius;
use crate::fit::{fit_power_law, prefactor_fixed_exponent, FitError, FitWindow, PowerLawFit};
use crate::linalg::{
    characteristic_polynomial, cluster_tolerance, eigenvalues, spectral_order, ComplexDense, LinalgError,
    SortKey,
};
use crate::scalar::{cabs, Extended, Precision, Real};
use crate::synthesis::{build_chain_in, ChainSpec, SynthesisError};
use crate::tracking::{track, TrackingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error("epsilon values must be positive and finite, got {value}")]
    NonPositiveEpsilon { value: f64 },
    #[error("epsilon grid must be strictly ascending (position {index})")]
    Unsorted { index: usize },
    #[error("epsilon grid spans {decades:.2} decades, need at least 3")]
    NarrowGrid { decades: f64 },
    #[error("bond index {bond} outside 1..={max}")]
    BondIndex { bond: usize, max: usize },
    #[error("single-bond perturbation needs a bond index")]
    MissingBond,
    #[error("branch pair ({a}, {b}) invalid for N = {n}")]
    BranchPair { a: usize, b: usize, n: usize },
    #[error("{channel:?} channel of the splitting is identically zero; use the other channel")]
    ZeroChannel { channel: Channel },
    #[error("eigensolver failed at epsilon {epsilon}: {source}")]
    Eigen { epsilon: f64, source: LinalgError },
    #[error("branch tracking failed at epsilon {epsilon}: {source}")]
    Tracking { epsilon: f64, source: TrackingError },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

pub type Result<T> = std::result::Result<T, PerturbationError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `ε` added to every coupling.
    AllBonds,
    /// `ε` added to one coupling.
    SingleBond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub kind: PerturbationKind,
    /// 1-based bond `(m, m+1)`; required for [`PerturbationKind::SingleBond`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_index: Option<usize>,
    pub epsilon_grid: Vec<f64>,
}

/// Smallest span of an ε grid, in decades.
pub const MIN_DECADES: f64 = 3.0;

impl PerturbationPlan {
    pub fn validate(&self, n: usize) -> Result<()> {
        check_bond(self.kind, self.bond_index, n)?;
        for (k, &e) in self.epsilon_grid.iter().enumerate() {
            if !(e > 0.0 && e.is_finite()) {
                return Err(PerturbationError::NonPositiveEpsilon { value: e });
            }
            if k > 0 && e <= self.epsilon_grid[k - 1] {
                return Err(PerturbationError::Unsorted { index: k });
            }
        }
        let decades = match (self.epsilon_grid.first(), self.epsilon_grid.last()) {
            (Some(a), Some(b)) => (b / a).log10(),
            _ => 0.0,
        };
        if decades < MIN_DECADES - 1e-9 {
            return Err(PerturbationError::NarrowGrid { decades });
        }
        Ok(())
    }
}

fn check_bond(kind: PerturbationKind, bond: Option<usize>, n: usize) -> Result<()> {
    if kind == PerturbationKind::SingleBond {
        let b = bond.ok_or(PerturbationError::MissingBond)?;
        if b == 0 || b >= n {
            return Err(PerturbationError::BondIndex { bond: b, max: n - 1 });
        }
    }
    Ok(())
}

/// The chain with `ε` added symmetrically to the selected couplings.
pub fn build_perturbed(
    spec: &ChainSpec,
    kind: PerturbationKind,
    bond_index: Option<usize>,
    epsilon: f64,
) -> Result<ComplexDense<f64>> {
    spec.validate()?;
    check_bond(kind, bond_index, spec.n)?;
    Ok(build_perturbed_in(spec, kind, bond_index, epsilon))
}

/// [`build_perturbed`] in arithmetic `T`, unvalidated.
pub fn build_perturbed_in<T: Real>(
    spec: &ChainSpec,
    kind: PerturbationKind,
    bond_index: Option<usize>,
    epsilon: f64,
) -> ComplexDense<T> {
    let mut h = build_chain_in::<T>(spec, T::from_f64(spec.gamma), T::from_f64(spec.delta));
    let e = Complex::new(T::from_f64(epsilon), T::zero());
    for m in 1..spec.n {
        let hit = match kind {
            PerturbationKind::AllBonds => true,
            PerturbationKind::SingleBond => bond_index == Some(m),
        };
        if hit {
            h[(m - 1, m)] = h[(m - 1, m)] + e;
            h[(m, m - 1)] = h[(m, m - 1)] + e;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingRecord {
    pub epsilon: f64,
    pub branch_pair: (usize, usize),
    /// `|Re(ω_a − ω_b)|` relative to the unperturbed pair.
    pub split_real: f64,
    /// `|Im(ω_a − ω_b)|` relative to the unperturbed pair.
    pub split_imag: f64,
    /// `|ω_a − ω_b|` relative to the unperturbed pair.
    pub split_abs: f64,
}

fn solve_sorted<T: Real>(h: &ComplexDense<T>) -> std::result::Result<Vec<Complex<T>>, LinalgError> {
    let values = eigenvalues(h)?;
    let tie = cluster_tolerance(T::from_f64(1e-12), h.norm());
    Ok(spectral_order(&values, tie, SortKey::ImagFirst)
        .into_iter()
        .map(|k| values[k])
        .collect())
}

fn sweep_in<T: Real>(spec: &ChainSpec, plan: &PerturbationPlan, pair: (usize, usize)) -> Result<Vec<SplittingRecord>> {
    let grid = &plan.epsilon_grid;
    let solved: Vec<_> = grid
        .par_iter()
        .map(|&e| solve_sorted(&build_perturbed_in::<T>(spec, plan.kind, plan.bond_index, e)))
        .collect();
    let mut spectra = Vec::with_capacity(grid.len());
    for (r, &e) in solved.into_iter().zip(grid) {
        spectra.push(r.map_err(|source| PerturbationError::Eigen { epsilon: e, source })?);
    }
    let h0 = build_perturbed_in::<T>(spec, plan.kind, plan.bond_index, 0.0);
    let base = solve_sorted(&h0).map_err(|source| PerturbationError::Eigen { epsilon: 0.0, source })?;

    // Labels come from the (Im, Re) order at the largest ε and are carried
    // toward ε = 0 by nearest distance.
    let n = spec.n;
    let mut branches: Vec<Vec<Complex<T>>> = vec![Vec::new(); grid.len()];
    let last = grid.len() - 1;
    branches[last] = spectra[last].clone();
    for k in (0..last).rev() {
        let perm = track(&branches[k + 1], &spectra[k], T::zero())
            .map_err(|source| PerturbationError::Tracking { epsilon: grid[k], source })?;
        branches[k] = perm.iter().map(|&j| spectra[k][j]).collect();
    }
    let radius = defect_radius(n, h0.norm(), cluster_tolerance(T::from_f64(1e-12), h0.norm()));
    let nearest = |z: Complex<T>| {
        base.iter()
            .copied()
            .min_by(|a, b| cabs(*a - z).to_f64().total_cmp(&cabs(*b - z).to_f64()))
            .expect("non-empty spectrum")
    };
    let (ba, bb) = (nearest(branches[0][pair.0]), nearest(branches[0][pair.1]));
    let offset = if cabs(ba - bb) <= radius {
        Complex::new(T::zero(), T::zero())
    } else {
        ba - bb
    };

    Ok(grid
        .iter()
        .zip(&branches)
        .map(|(&e, b)| {
            let d = b[pair.0] - b[pair.1] - offset;
            SplittingRecord {
                epsilon: e,
                branch_pair: pair,
                split_real: d.re.abs().to_f64(),
                split_imag: d.im.abs().to_f64(),
                split_abs: cabs(d).to_f64(),
            }
        })
        .collect())
}

/// Splitting of a tracked branch pair at every ε of the plan.
///
/// Branches are labelled `0..N` by ascending imaginary part, then real part,
/// at the largest ε. The unperturbed pair difference is subtracted unless the
/// pair is coalesced at ε = 0.
pub fn splitting_sweep(
    spec: &ChainSpec,
    plan: &PerturbationPlan,
    pair: (usize, usize),
    precision: Precision,
) -> Result<Vec<SplittingRecord>> {
    spec.validate()?;
    plan.validate(spec.n)?;
    if pair.0 >= spec.n || pair.1 >= spec.n || pair.0 == pair.1 {
        return Err(PerturbationError::BranchPair {
            a: pair.0,
            b: pair.1,
            n: spec.n,
        });
    }
    match precision {
        Precision::Double => sweep_in::<f64>(spec, plan, pair),
        Precision::Extended => sweep_in::<Extended>(spec, plan, pair),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Real,
    Imag,
    Abs,
}

impl Channel {
    pub fn value(self, r: &SplittingRecord) -> f64 {
        match self {
            Channel::Real => r.split_real,
            Channel::Imag => r.split_imag,
            Channel::Abs => r.split_abs,
        }
    }
}

pub const PUISEUX_FIT: FitWindow = FitWindow {
    min_points: 8,
    min_decades: MIN_DECADES,
};

/// Channel values at or below this fraction of the largest `|ω_a − ω_b|`
/// count as zero.
const ZERO_CHANNEL_RTOL: f64 = 1e-10;

fn channel_samples(records: &[SplittingRecord], channel: Channel) -> Result<(Vec<f64>, Vec<f64>)> {
    let scale = records.iter().map(|r| r.split_abs).fold(0.0, f64::max);
    let floor = ZERO_CHANNEL_RTOL * scale;
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| channel.value(r) > floor)
        .map(|r| (r.epsilon, channel.value(r)))
        .unzip();
    if x.is_empty() {
        return Err(PerturbationError::ZeroChannel { channel });
    }
    if x.len() < records.len() {
        log::warn!(
            "{:?} channel: {} zero point(s) excluded from fit",
            channel,
            records.len() - x.len()
        );
    }
    Ok((x, y))
}

/// Log–log fit of one splitting channel against ε.
pub fn puiseux_fit(records: &[SplittingRecord], channel: Channel) -> Result<PowerLawFit> {
    let (x, y) = channel_samples(records, channel)?;
    Ok(fit_power_law(&x, &y, PUISEUX_FIT)?)
}

/// Puiseux order a fitted slope corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PuiseuxOrder {
    /// Slope within 0.02 of `1/N`.
    First,
    /// Slope within 0.02 of `2/N`: the leading coefficient vanishes.
    Second,
    Other,
}

pub const ORDER_TOL: f64 = 0.02;

pub fn classify_order(slope: f64, n: usize) -> PuiseuxOrder {
    let n = n as f64;
    if (slope - 1.0 / n).abs() <= ORDER_TOL {
        PuiseuxOrder::First
    } else if (slope - 2.0 / n).abs() <= ORDER_TOL {
        PuiseuxOrder::Second
    } else {
        PuiseuxOrder::Other
    }
}

/// `|c|` in `split ≈ |c|·ε^exponent`, from records with `ε` in `[lo, hi]`.
pub fn leading_coefficient(
    records: &[SplittingRecord],
    channel: Channel,
    exponent: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let window: Vec<SplittingRecord> = records
        .iter()
        .filter(|r| r.epsilon >= lo && r.epsilon <= hi)
        .copied()
        .collect();
    let (x, y) = channel_samples(&window, channel)?;
    Ok(prefactor_fixed_exponent(&x, &y, exponent)?)
}

/// Relative tolerance on characteristic-polynomial coefficients.
const SYMMETRY_TOL: f64 = 1e-8;

/// `max_k |c_k − (−1)^{n−k} conj(c_k)| / ‖A‖^{n−k}` for the characteristic
/// polynomial of `A = H − ω₀I`, evaluated in extended precision. Zero exactly
/// when the spectrum of `A` is closed under `λ → −conj(λ)`.
pub fn spectral_symmetry_residual(h: &ComplexDense<f64>, omega0: f64) -> f64 {
    let w0 = <Extended as Real>::from_f64(omega0);
    let a: ComplexDense<Extended> = h.promote::<Extended>().shift(Complex::new(-w0, Extended::ZERO));
    let n = a.dim();
    let norm = a.norm();
    if norm == Extended::from(0.0) {
        return 0.0;
    }
    let c = characteristic_polynomial(&a);
    let mut worst = 0.0f64;
    for (k, &ck) in c.iter().enumerate() {
        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
        let mirrored = ck.conj() * Complex::new(Extended::from(sign), Extended::from(0.0));
        let mut scale = Extended::from(1.0);
        for _ in 0..n - k {
            scale *= norm;
        }
        worst = worst.max((cabs(ck - mirrored) / scale).to_f64());
    }
    worst
}

/// Whether the spectrum of `H − ω₀I` is symmetric under `λ → −conj(λ)`.
pub fn symmetry_audit(h: &ComplexDense<f64>, omega0: f64) -> bool {
    spectral_symmetry_residual(h, omega0) <= SYMMETRY_TOL
}
