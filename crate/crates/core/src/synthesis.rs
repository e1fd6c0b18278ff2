//! Construction of the supersymmetric coupled-resonator chain.
//!
//! The same Hamiltonian is produced four independent ways: by intertwining
//! operator recursion (`Q R` factorizations), in closed form, from spin
//! operators, and from a two-site bosonic model in a fixed-particle Fock
//! sector. Tests cross-check all of them against each other.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eig, ComplexDense, LinalgError};
use crate::scalar::{csqrt, Real};

type C64 = Complex<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("chain size must be at least 2, got {n}")]
    InvalidSize { n: usize },
    #[error("coupling J must be positive and finite, got {value}")]
    InvalidCoupling { value: f64 },
    #[error("parameter `{field}` must be finite")]
    NonFinite { field: &'static str },
    #[error("input is not a SUSY chain: {reason}")]
    Precondition { reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, SynthesisError>;

fn default_delta() -> f64 {
    0.0
}

/// Parameters of the chain `H(m,m+1) = J√(m(N−m))`, `H(m,m) = ω₀ + (Δ+iγ)(N+1−2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Number of sites `N`.
    pub n: usize,
    /// Coupling scale `J`.
    pub coupling: f64,
    /// Gain/loss gradient `γ`.
    pub gamma: f64,
    /// Detuning gradient `Δ`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Resonance frequency `ω₀`.
    #[serde(default)]
    pub omega0: f64,
}

impl ChainSpec {
    pub fn new(n: usize, coupling: f64, gamma: f64) -> Self {
        Self {
            n,
            coupling,
            gamma,
            delta: 0.0,
            omega0: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_size(self.n)?;
        check_coupling(self.coupling)?;
        for (field, v) in [("gamma", self.gamma), ("delta", self.delta), ("omega0", self.omega0)] {
            if !v.is_finite() {
                return Err(SynthesisError::NonFinite { field });
            }
        }
        Ok(())
    }

    /// Complex gradient `Δ + iγ`.
    pub fn gradient(&self) -> C64 {
        Complex::new(self.delta, self.gamma)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(SynthesisError::InvalidSize { n })
    } else {
        Ok(())
    }
}

fn check_coupling(j: f64) -> Result<()> {
    if j > 0.0 && j.is_finite() {
        Ok(())
    } else {
        Err(SynthesisError::InvalidCoupling { value: j })
    }
}

/// Dense real matrix, row-major, arbitrary shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Product with `other`; the result must be square.
    pub fn square_product(&self, other: &RealMatrix) -> ComplexDense<f64> {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        assert_eq!(self.rows, other.cols, "product is not square");
        ComplexDense::from_fn(self.rows, |i, j| {
            let s: f64 = (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum();
            Complex::new(s, 0.0)
        })
    }
}

/// Factorization `h_N = Q R − shift·I` with `R = Qᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntertwinePair {
    /// `N × (N−1)`, lower bidiagonal.
    pub q: RealMatrix,
    /// `(N−1) × N`.
    pub r: RealMatrix,
    pub shift: f64,
}

impl IntertwinePair {
    /// `Q R − shift·I` (dimension `N`).
    pub fn hamiltonian(&self) -> ComplexDense<f64> {
        self.q.square_product(&self.r).shift(Complex::new(-self.shift, 0.0))
    }

    /// Partner `R Q − shift·I` (dimension `N−1`).
    pub fn partner(&self) -> ComplexDense<f64> {
        self.r.square_product(&self.q).shift(Complex::new(-self.shift, 0.0))
    }
}

/// `Q(j,k) = √(J(j−1)) δ_{j−1,k} + √(J(N−j)) δ_{j,k}` (1-based), `R = Qᵀ`.
pub fn intertwine_q(n: usize, coupling: f64) -> Result<IntertwinePair> {
    check_size(n)?;
    check_coupling(coupling)?;
    let mut q = RealMatrix::zeros(n, n - 1);
    for j in 1..=n {
        if j >= 2 {
            q.set(j - 1, j - 2, (coupling * (j - 1) as f64).sqrt());
        }
        if j < n {
            q.set(j - 1, j - 1, (coupling * (n - j) as f64).sqrt());
        }
    }
    let r = q.transpose();
    Ok(IntertwinePair { q, r, shift: 0.0 })
}

/// Hermitian chain `h_N = J·Sx + (N−1)J·I` with spectrum `{0, 2J, …, 2(N−1)J}`.
/// Also defined for `N = 1` (the scalar `0`).
pub fn hermitian_chain(n: usize, coupling: f64) -> ComplexDense<f64> {
    ComplexDense::from_fn(n, |i, j| {
        if i == j {
            Complex::new((n - 1) as f64 * coupling, 0.0)
        } else if j == i + 1 || i == j + 1 {
            let m = i.min(j) + 1;
            Complex::new(coupling * ((m * (n - m)) as f64).sqrt(), 0.0)
        } else {
            Complex::zero()
        }
    })
}

/// Relative tolerance of the spectral precondition checks.
const SPECTRAL_RTOL: f64 = 1e-8;
const STRUCTURAL_TOL: f64 = 1e-10;

/// Confirm `h − offset·I` is the Hermitian chain of its size; returns `offset`.
fn match_chain(h: &ComplexDense<f64>, coupling: f64) -> Result<f64> {
    let n = h.dim();
    let offset = h[(0, 0)].re - (n - 1) as f64 * coupling;
    let canon = hermitian_chain(n, coupling).shift(Complex::new(offset, 0.0));
    let scale = 1.0 + canon.max_abs();
    let diff = h.max_abs_diff(&canon);
    if !(diff <= STRUCTURAL_TOL * scale) {
        return Err(SynthesisError::Precondition {
            reason: format!("entrywise deviation {diff:e} from the size-{n} chain"),
        });
    }
    let spec = eig(h, 1e-12)?;
    let top = 2.0 * (n - 1) as f64 * coupling + offset.abs();
    for (k, lam) in spec.eigenvalues.iter().enumerate() {
        let want = offset + 2.0 * k as f64 * coupling;
        if (lam - want).norm() > SPECTRAL_RTOL * top.max(1.0) {
            return Err(SynthesisError::Precondition {
                reason: format!("eigenvalue {k} is {lam}, expected {want}"),
            });
        }
    }
    Ok(offset)
}

/// Add a level: given `h_{N−1}` with spectrum `{0, …, 2(N−2)J}`, return
/// `h_N = Q_{N−1} R_{N−1}` where `R_{N−1} Q_{N−1} = h_{N−1} + 2J·I`.
pub fn susy_step_up(h_prev: &ComplexDense<f64>, coupling: f64) -> Result<ComplexDense<f64>> {
    check_coupling(coupling)?;
    let offset = match_chain(h_prev, coupling)?;
    if offset.abs() > STRUCTURAL_TOL * (1.0 + coupling * h_prev.dim() as f64) {
        return Err(SynthesisError::Precondition {
            reason: format!("lowest level is {offset}, expected 0"),
        });
    }
    let pair = intertwine_q(h_prev.dim() + 1, coupling)?;
    let lifted = h_prev.shift(Complex::new(2.0 * coupling, 0.0));
    let rq = pair.partner();
    let diff = rq.max_abs_diff(&lifted);
    if !(diff <= STRUCTURAL_TOL * (1.0 + lifted.max_abs())) {
        return Err(SynthesisError::Precondition {
            reason: format!("R·Q differs from h + 2J by {diff:e}"),
        });
    }
    Ok(pair.hamiltonian())
}

/// Remove the lowest level of `h = h_N + c·I`, returning `R Q + c·I`
/// (spectrum `{c + 2J, …, c + 2(N−1)J}`). With `reshift`, `2J` is subtracted
/// so the result starts at `c` again.
pub fn susy_partner_remove(h: &ComplexDense<f64>, coupling: f64, reshift: bool) -> Result<ComplexDense<f64>> {
    check_coupling(coupling)?;
    check_size(h.dim())?;
    let offset = match_chain(h, coupling)?;
    let pair = intertwine_q(h.dim(), coupling)?;
    let shift = if reshift { offset - 2.0 * coupling } else { offset };
    Ok(pair.partner().shift(Complex::new(shift, 0.0)))
}

/// Build `h_N` by stepping up from the scalar `h_1 = 0`.
pub fn synthesize_hermitian(n: usize, coupling: f64) -> Result<ComplexDense<f64>> {
    check_size(n)?;
    check_coupling(coupling)?;
    let mut h = ComplexDense::zeros(1);
    for _ in 1..n {
        h = susy_step_up(&h, coupling)?;
    }
    Ok(h)
}

/// The chain in closed form at its own `γ`, `Δ`.
pub fn build_chain(spec: &ChainSpec) -> Result<ComplexDense<f64>> {
    spec.validate()?;
    Ok(build_chain_in(spec, spec.gamma, spec.delta))
}

/// The chain in arithmetic `T`, with `γ` and `Δ` given in that arithmetic
/// so that offsets such as `J − 10⁻⁹` are represented exactly.
pub fn build_chain_in<T: Real>(spec: &ChainSpec, gamma: T, delta: T) -> ComplexDense<T> {
    let n = spec.n;
    let j = T::from_f64(spec.coupling);
    let w0 = T::from_f64(spec.omega0);
    ComplexDense::from_fn(n, |a, b| {
        if a == b {
            let m = a + 1;
            let f = T::from_f64(n as f64 + 1.0 - 2.0 * m as f64);
            Complex::new(w0 + delta * f, gamma * f)
        } else if b == a + 1 || a == b + 1 {
            let m = a.min(b) + 1;
            Complex::new(j * T::from_usize(m * (n - m)).sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Couplings `J√(m(N−m))`, `m = 1..N−1`.
pub fn chain_couplings(spec: &ChainSpec) -> Vec<f64> {
    (1..spec.n)
        .map(|m| spec.coupling * ((m * (spec.n - m)) as f64).sqrt())
        .collect()
}

/// `ω₀ + n√(J² + (Δ+iγ)²)` for `n = −(N−1), −(N−3), …, N−1`.
pub fn analytic_spectrum(spec: &ChainSpec) -> Vec<C64> {
    let g = spec.gradient();
    let root = csqrt(Complex::new(spec.coupling * spec.coupling, 0.0) + g * g);
    let n = spec.n as i64;
    (0..n)
        .map(|k| {
            let level = (2 * k - (n - 1)) as f64;
            Complex::new(spec.omega0, 0.0) + root * level
        })
        .collect()
}

/// Spin-(N−1)/2 operators with `[S_a, S_b] = 2i ε_abc S_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub sx: ComplexDense<f64>,
    pub sy: ComplexDense<f64>,
    pub sz: ComplexDense<f64>,
}

impl SpinOps {
    /// `ω₀I + J·Sx + (Δ+iγ)·Sz`.
    pub fn hamiltonian(&self, spec: &ChainSpec) -> ComplexDense<f64> {
        let a = self.sx.scale(Complex::new(spec.coupling, 0.0));
        let b = self.sz.scale(spec.gradient());
        (&a + &b).shift(Complex::new(spec.omega0, 0.0))
    }
}

pub fn spin_operators(n: usize) -> Result<SpinOps> {
    check_size(n)?;
    let up = |i: usize, j: usize| {
        if j == i + 1 {
            let m = i + 1;
            ((m * (n - m)) as f64).sqrt()
        } else {
            0.0
        }
    };
    let sx = ComplexDense::from_fn(n, |i, j| Complex::new(up(i, j) + up(j, i), 0.0));
    let sy = ComplexDense::from_fn(n, |i, j| Complex::new(0.0, up(j, i) - up(i, j)));
    let sz = ComplexDense::from_fn(n, |i, j| {
        if i == j {
            Complex::new(n as f64 - 1.0 - 2.0 * i as f64, 0.0)
        } else {
            Complex::zero()
        }
    });
    Ok(SpinOps { sx, sy, sz })
}

/// `J(a₁†a₂ + a₂†a₁) + iγ(a₁†a₁ − a₂†a₂)` on the normalized `(N−1)`-boson
/// states `|l⟩ ∝ (a₁†)^{N−1−l} (a₂†)^l |0⟩`, `l = 0..N−1`.
pub fn fock_two_site(n: usize, coupling: f64, gamma: f64) -> Result<ComplexDense<f64>> {
    check_size(n)?;
    check_coupling(coupling)?;
    let particles = n - 1;
    let mut h = ComplexDense::zeros(n);
    for l in 0..n {
        let (n1, n2) = (particles - l, l);
        h[(l, l)] = Complex::new(0.0, gamma * (n1 as f64 - n2 as f64));
        // a₂† a₁ : (n1, n2) → (n1 − 1, n2 + 1)
        if n1 > 0 {
            let amp = (n1 as f64).sqrt() * ((n2 + 1) as f64).sqrt();
            h[(l + 1, l)] += Complex::new(coupling * amp, 0.0);
        }
        // a₁† a₂ : (n1, n2) → (n1 + 1, n2 − 1)
        if n2 > 0 {
            let amp = (n2 as f64).sqrt() * ((n1 + 1) as f64).sqrt();
            h[(l - 1, l)] += Complex::new(coupling * amp, 0.0);
        }
    }
    Ok(h)
}

/// `max |P·conj(H)·P − H|` with `P` the site-reversal permutation.
pub fn pt_residual<T: Real>(h: &ComplexDense<T>) -> T {
    let n = h.dim();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let d = h[(n - 1 - i, n - 1 - j)].conj() - h[(i, j)];
            worst = worst.max(crate::scalar::cabs(d));
        }
    }
    worst
}
