//! Characteristic polynomials (Faddeev–LeVerrier) and simultaneous polynomial
//! root refinement (Aberth–Ehrlich).

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{ComplexDense, LinalgError, Result};
use crate::scalar::{cabs, Real};

/// Coefficients `c[0..=n]` of `det(λI − A) = Σ c[k] λ^k`, with `c[n] = 1`.
pub fn characteristic_polynomial<T: Real>(a: &ComplexDense<T>) -> Vec<Complex<T>> {
    let n = a.dim();
    let mut c = vec![Complex::zero(); n + 1];
    c[n] = Complex::one();
    let mut m = ComplexDense::<T>::zeros(n);
    for k in 1..=n {
        let mut next = a * &m;
        for i in 0..n {
            next[(i, i)] = next[(i, i)] + c[n + 1 - k];
        }
        m = next;
        let am = a * &m;
        c[n - k] = -am.trace() / Complex::new(T::from_usize(k), T::zero());
    }
    c
}

fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[k] z^k` with multiplicity.
///
/// Multiple roots converge only linearly and are determined no better than
/// their conditioning allows; the iteration stops when corrections stall.
pub fn aberth_roots<T: Real>(coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg].is_zero() {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let p: Vec<Complex<T>> = coeffs[..=deg].iter().map(|&c| c / lead).collect();
    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }

    // Fujiwara bound on root moduli.
    let mut radius = T::zero();
    for (k, &c) in p[..deg].iter().enumerate() {
        let m = cabs(c);
        if m > T::zero() {
            radius = radius.max(m.nth_root(deg - k));
        }
    }
    if radius == T::zero() {
        return Ok(vec![Complex::zero(); deg]);
    }
    let mut z: Vec<Complex<T>> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex::new(T::from_f64(th.cos()), T::from_f64(th.sin())) * Complex::new(radius, T::zero())
        })
        .collect();

    let tol = T::from_f64(4.0) * T::epsilon() * radius;
    let mut stalled = 0;
    let mut last = T::zero();
    for it in 0..2000 {
        let mut max_step = T::zero();
        for k in 0..deg {
            let (pv, dpv) = horner(&p, z[k]);
            if pv.is_zero() {
                continue;
            }
            let mut s: Complex<T> = Complex::zero();
            for j in 0..deg {
                if j != k {
                    let d = z[k] - z[j];
                    if !d.is_zero() {
                        s = s + d.inv();
                    }
                }
            }
            let ratio = if dpv.is_zero() {
                Complex::new(tol, tol)
            } else {
                pv / dpv
            };
            let denom: Complex<T> = Complex::<T>::one() - ratio * s;
            let w = if denom.is_zero() { ratio } else { ratio / denom };
            if w.re.is_finite() && w.im.is_finite() {
                z[k] = z[k] - w;
                max_step = max_step.max(cabs(w));
            }
        }
        if max_step <= tol {
            break;
        }
        if it > 50 && max_step >= last {
            stalled += 1;
            if stalled > 20 {
                break;
            }
        }
        last = max_step;
    }
    Ok(z)
}

/// Eigenvalues as characteristic-polynomial roots of the trace-centred matrix.
pub fn charpoly_eigenvalues<T: Real>(h: &ComplexDense<T>) -> Result<Vec<Complex<T>>> {
    let n = h.dim();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    h.check_finite()?;
    let centre = h.trace() / Complex::new(T::from_usize(n), T::zero());
    let a = h.shift(-centre);
    let roots = aberth_roots(&characteristic_polynomial(&a))?;
    Ok(roots.into_iter().map(|z| z + centre).collect())
}
