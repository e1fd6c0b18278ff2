//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex;
use susy_ep::linalg::ComplexDense;
use susy_ep::scalar::{from_c64, to_c64, Extended, Real};

pub type C64 = Complex<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `exp(A)` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm<T: Real>(a: &ComplexDense<T>) -> ComplexDense<T> {
    let n = a.dim();
    let norm = a.norm().to_f64();
    let mut s = 0i32;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let inv = T::one() / T::from_f64(2f64.powi(s));
    let scaled = a.scale(Complex::new(inv, T::zero()));
    let mut term = ComplexDense::identity(n);
    let mut sum = ComplexDense::identity(n);
    for k in 1..=24 {
        term = (&term * &scaled).scale(Complex::new(T::one() / T::from_usize(k), T::zero()));
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−iHt) ψ` through [`expm`], carried out in double-double arithmetic.
pub fn evolve_oracle(h: &ComplexDense<f64>, psi: &[C64], t: f64) -> Vec<C64> {
    let a = h.promote::<Extended>().scale(Complex::new(Extended::from(0.0), Extended::from(-t)));
    let psi: Vec<Complex<Extended>> = psi.iter().map(|&z| from_c64(z)).collect();
    expm(&a).matvec(&psi).into_iter().map(to_c64).collect()
}

/// Largest distance under greedy nearest pairing of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Closed-form chain eigenvalues `ω₀ + n√(J² − γ²)` written out directly.
pub fn chain_levels(n: usize, j: f64, gamma: f64, omega0: f64) -> Vec<C64> {
    let root = c(j * j - gamma * gamma, 0.0).sqrt();
    (0..n)
        .map(|k| c(omega0, 0.0) + root * (2.0 * k as f64 - (n as f64 - 1.0)))
        .collect()
}

/// `|⟨a|b⟩| / (‖a‖‖b‖)`.
pub fn overlap(a: &[C64], b: &[C64]) -> f64 {
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    ip.norm() / (na * nb)
}

pub fn dense(dim: usize, entries: &[(f64, f64)]) -> ComplexDense<f64> {
    ComplexDense::from_fn(dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        c(re, im)
    })
}
