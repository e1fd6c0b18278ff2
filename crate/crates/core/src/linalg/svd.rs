//! Singular values by one-sided complex Jacobi rotations.

use num_complex::Complex;
use num_traits::Zero;

use super::{ComplexDense, Result};
use crate::scalar::{cabs, Real};

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &ComplexDense<T>) -> Result<Vec<T>> {
    m.check_finite()?;
    let n = m.dim();
    // Columns stored contiguously.
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = Complex::zero();
                for i in 0..n {
                    alpha += cols[p][i].norm_sqr();
                    beta += cols[q][i].norm_sqr();
                    gamma = gamma + cols[p][i].conj() * cols[q][i];
                }
                let g = cabs(gamma);
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / Complex::new(g, T::zero());
                let zeta = (beta - alpha) / (T::from_f64(2.0) * g);
                let sign = if zeta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (cc, sc) = (Complex::new(c, T::zero()), Complex::new(s, T::zero()));
                for i in 0..n {
                    let x = cols[p][i];
                    let y = cols[q][i] * phase;
                    cols[p][i] = cc * x - sc * y;
                    cols[q][i] = sc * x + cc * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols
        .iter()
        .map(|col| col.iter().fold(T::zero(), |acc, z| T::hypot(acc, cabs(*z))))
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}

/// Number of singular values exceeding `tol·σ_max`.
pub fn numerical_rank<T: Real>(m: &ComplexDense<T>, tol: T) -> Result<usize> {
    let sv = singular_values(m)?;
    let smax = sv.first().copied().unwrap_or(T::zero());
    if smax == T::zero() {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}
