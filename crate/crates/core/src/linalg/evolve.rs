//! Time evolution `ψ(t) = exp(−iHt) ψ₀`.

use num_complex::Complex;
use num_traits::Zero;

use super::eig::lu_solve;
use super::{eig_default, matrix_power, singular_values, ComplexDense, LinalgError, Result};

type C64 = Complex<f64>;

/// Largest eigenvector-matrix condition number accepted for the spectral route.
const MAX_CONDITION: f64 = 1e8;
/// Relative nilpotency residual accepted as an exceptional-point certificate.
const NILPOTENT_TOL: f64 = 1e-8;

/// `Some(ω₀)` with `ω₀ = tr(H)/N` when `‖(H−ω₀)^N‖ / ‖H−ω₀‖^N ≤ 1e-8`.
pub fn nilpotent_certificate(h: &ComplexDense<f64>) -> Option<C64> {
    let n = h.dim();
    if n == 0 {
        return None;
    }
    let w0 = h.trace() / n as f64;
    let a = h.shift(-w0);
    let an = a.norm();
    if an == 0.0 {
        return Some(w0);
    }
    let scaled = a.scale(Complex::new(1.0 / an, 0.0));
    let res = matrix_power(&scaled, n as u32).norm();
    (res <= NILPOTENT_TOL).then_some(w0)
}

fn nilpotent_series(h: &ComplexDense<f64>, w0: C64, psi0: &[C64], t: f64) -> Vec<C64> {
    let a = h.shift(-w0);
    let mut term = psi0.to_vec();
    let mut out = psi0.to_vec();
    let mit = Complex::new(0.0, -t);
    for k in 1..h.dim() {
        term = a.matvec(&term);
        let f = mit / k as f64;
        for z in term.iter_mut() {
            *z *= f;
        }
        for (o, z) in out.iter_mut().zip(&term) {
            *o += z;
        }
    }
    let phase = (mit * w0).exp();
    out.into_iter().map(|z| z * phase).collect()
}

/// Evolve `psi0` for time `t` under `H`.
///
/// An exactly nilpotent `H − ω₀` uses the finite series; otherwise the
/// eigenbasis is used when its condition number is at most 1e8. Anything else
/// is refused with [`LinalgError::Defective`].
pub fn evolve(h: &ComplexDense<f64>, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    let n = h.dim();
    if psi0.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: psi0.len(),
        });
    }
    h.check_finite()?;
    if psi0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !t.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    if let Some(w0) = nilpotent_certificate(h) {
        return Ok(nilpotent_series(h, w0, psi0, t));
    }

    let spec = eig_default(h)?;
    let v = spec.eigenvector_matrix();
    let sv = singular_values(&v)?;
    let smin = sv.last().copied().unwrap_or(0.0);
    let cond = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(LinalgError::Defective { condition: cond });
    }
    let coeff = lu_solve(&v, psi0);
    let mut out = vec![C64::zero(); n];
    for (k, lam) in spec.eigenvalues.iter().enumerate() {
        let c = coeff[k] * (Complex::new(0.0, -t) * lam).exp();
        for (i, o) in out.iter_mut().enumerate() {
            *o += v[(i, k)] * c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn zero_time_is_identity() {
        let h = ComplexDense::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8)];
        assert_eq!(evolve(&h, &psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn rabi_flip() {
        let h = ComplexDense::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let out = evolve(&h, &[c(1.0, 0.0), c(0.0, 0.0)], std::f64::consts::FRAC_PI_2).unwrap();
        assert!(out[0].norm() < 1e-12);
        assert!((out[1] - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_dimer_is_linear_in_time() {
        let h = ComplexDense::from_rows(vec![vec![c(0.0, 1.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, -1.0)]]).unwrap();
        assert!(nilpotent_certificate(&h).is_some());
        let t = 3.0;
        let out = evolve(&h, &[c(1.0, 0.0), c(0.0, 0.0)], t).unwrap();
        // exp(−iHt) = I − iHt
        assert!((out[0] - c(1.0 + t, 0.0)).norm() < 1e-12);
        assert!((out[1] - c(0.0, -t)).norm() < 1e-12);
    }

    #[test]
    fn defective_without_certificate_is_refused() {
        // Jordan block plus a distinct eigenvalue: defective but not nilpotent about the mean.
        let h = ComplexDense::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let err = evolve(&h, &[c(1.0, 0.0); 3], 1.0).unwrap_err();
        assert!(matches!(err, LinalgError::Defective { .. }));
    }

    #[test]
    fn length_mismatch() {
        let h = ComplexDense::<f64>::identity(2);
        assert!(matches!(
            evolve(&h, &[c(1.0, 0.0)], 1.0),
            Err(LinalgError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
