//! Non-Hermitian eigensolver: balancing, Householder reduction to upper
//! Hessenberg form, single-shift complex QR with deflation, and eigenvectors
//! by inverse iteration on the original matrix.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::charpoly::charpoly_eigenvalues;
use super::{vec_norm, ComplexDense, LinalgError, Result};
use crate::scalar::{cabs, csqrt, to_c64, Real};

/// Eigenvalues, unit right eigenvectors and per-pair diagnostics.
#[derive(Debug, Clone)]
pub struct Spectrum<T = f64> {
    /// Sorted by real part, then imaginary part (ties within `cluster_tol`).
    pub eigenvalues: Vec<Complex<T>>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Complex<T>>>,
    /// Backward error `‖Hv − λv‖` of each pair.
    pub residuals: Vec<T>,
    /// Eigenvalues within `cluster_tol` of each other (transitively) share a label.
    pub cluster_labels: Vec<usize>,
    pub cluster_tol: T,
    /// Frobenius norm of the input.
    pub norm: T,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn eigenvalues_c64(&self) -> Vec<Complex<f64>> {
        self.eigenvalues.iter().map(|&z| to_c64(z)).collect()
    }

    /// Eigenvectors as the columns of a matrix.
    pub fn eigenvector_matrix(&self) -> ComplexDense<T> {
        ComplexDense::from_fn(self.dim(), |i, j| self.eigenvectors[j][i])
    }
}

/// Default backward-error tolerance for a scalar type.
pub fn default_rtol<T: Real>() -> T {
    T::from_f64(1e4) * T::epsilon()
}

/// Distance under which two eigenvalues are treated as coalesced.
pub fn cluster_tolerance<T: Real>(rtol: T, norm: T) -> T {
    T::from_f64(1e-8).max(T::from_f64(10.0) * rtol) * norm
}

/// [`eig`] with `rtol = 1e4·eps`.
pub fn eig_default<T: Real>(h: &ComplexDense<T>) -> Result<Spectrum<T>> {
    eig(h, default_rtol())
}

pub fn eig<T: Real>(h: &ComplexDense<T>, rtol: T) -> Result<Spectrum<T>> {
    let n = h.dim();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    h.check_finite()?;
    let norm = h.norm();
    let tol = cluster_tolerance(rtol, norm);

    if n == 1 || norm == T::zero() {
        let eigenvalues: Vec<_> = (0..n).map(|i| h[(i, i)]).collect();
        let eigenvectors = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| if i == k { Complex::one() } else { Complex::zero() })
                    .collect()
            })
            .collect();
        return Ok(Spectrum {
            cluster_labels: cluster_labels(&eigenvalues, tol),
            eigenvalues,
            eigenvectors,
            residuals: vec![T::zero(); n],
            cluster_tol: tol,
            norm,
        });
    }

    let raw = eigenvalues(h)?;
    let order = spectral_order(&raw, tol, SortKey::RealFirst);
    let values: Vec<_> = order.iter().map(|&k| raw[k]).collect();

    let bound = rtol * norm;
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (index, &lambda) in values.iter().enumerate() {
        let (mut v, res) = inverse_iteration(h, lambda, norm, bound);
        if !(res <= bound) {
            return Err(LinalgError::ResidualBound {
                index,
                residual: res.to_f64(),
                bound: bound.to_f64(),
            });
        }
        fix_gauge(&mut v);
        eigenvectors.push(v);
        residuals.push(res);
    }

    Ok(Spectrum {
        cluster_labels: cluster_labels(&values, tol),
        eigenvalues: values,
        eigenvectors,
        residuals,
        cluster_tol: tol,
        norm,
    })
}

/// All eigenvalues with multiplicity, unsorted.
///
/// Runs Hessenberg QR; for dimension ≤ 8 a QR convergence failure falls back
/// to characteristic-polynomial roots.
pub fn eigenvalues<T: Real>(h: &ComplexDense<T>) -> Result<Vec<Complex<T>>> {
    h.check_finite()?;
    match qr_eigenvalues(h) {
        Ok(v) => Ok(v),
        Err(e @ LinalgError::NonConvergence { .. }) if h.dim() <= 8 => {
            log::debug!("QR failed ({e}), falling back to characteristic polynomial");
            charpoly_eigenvalues(h).map_err(|_| e)
        }
        Err(e) => Err(e),
    }
}

/// Primary and secondary sort keys for an eigenvalue list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    RealFirst,
    ImagFirst,
}

/// Permutation that sorts `values` by the primary part, treating primary
/// parts within `tie_tol` (chained) as equal and ordering those by the
/// secondary part.
pub fn spectral_order<T: Real>(values: &[Complex<T>], tie_tol: T, key: SortKey) -> Vec<usize> {
    let parts = |z: &Complex<T>| match key {
        SortKey::RealFirst => (z.re, z.im),
        SortKey::ImagFirst => (z.im, z.re),
    };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        parts(&values[a])
            .0
            .partial_cmp(&parts(&values[b]).0)
            .expect("finite eigenvalues")
    });
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len()
            && parts(&values[idx[end]]).0 - parts(&values[idx[end - 1]]).0 <= tie_tol
        {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            parts(&values[a])
                .1
                .partial_cmp(&parts(&values[b]).1)
                .expect("finite eigenvalues")
        });
        start = end;
    }
    idx
}

/// Sort eigenvalues by (Re, Im) with ties resolved within `tie_tol`.
pub fn sort_spectrum<T: Real>(values: Vec<Complex<T>>, tie_tol: T) -> Vec<Complex<T>> {
    spectral_order(&values, tie_tol, SortKey::RealFirst)
        .into_iter()
        .map(|k| values[k])
        .collect()
}

fn cluster_labels<T: Real>(values: &[Complex<T>], tol: T) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if cabs(values[i] - values[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut root_label = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_label[r] == usize::MAX {
            root_label[r] = next;
            next += 1;
        }
        labels[i] = root_label[r];
    }
    labels
}

/// Scale so the largest-modulus component is real and positive; near-ties
/// go to the lowest index.
fn fix_gauge<T: Real>(v: &mut [Complex<T>]) {
    let max = v.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    if max == T::zero() {
        return;
    }
    let cut = max * T::from_f64(1.0 - 1e-8);
    let pivot = v.iter().position(|z| cabs(*z) >= cut).unwrap_or(0);
    let m = cabs(v[pivot]);
    let phase = v[pivot].conj() / Complex::new(m, T::zero());
    for z in v.iter_mut() {
        *z = *z * phase;
    }
    v[pivot] = Complex::new(v[pivot].re, T::zero());
}

fn residual<T: Real>(h: &ComplexDense<T>, lambda: Complex<T>, v: &[Complex<T>]) -> T {
    let hv = h.matvec(v);
    let r: Vec<_> = hv.iter().zip(v).map(|(&a, &b)| a - lambda * b).collect();
    vec_norm(&r)
}

/// Unit vector approximately spanning the null space of `h − λI`.
fn inverse_iteration<T: Real>(
    h: &ComplexDense<T>,
    lambda: Complex<T>,
    norm: T,
    bound: T,
) -> (Vec<Complex<T>>, T) {
    let n = h.dim();
    let lu = Lu::factor(h.shift(-lambda), T::epsilon() * norm);
    // Deterministic start with no special symmetry.
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            Complex::new(T::from_f64(1.0 + 0.3 * t), T::from_f64(0.1 + 0.7 * t * t))
        })
        .collect();
    let mut best: Option<(Vec<Complex<T>>, T)> = None;
    for _ in 0..5 {
        let y = lu.solve(&x);
        let ny = vec_norm(&y);
        if ny == T::zero() || !ny.is_finite() {
            break;
        }
        let inv = Complex::new(T::one() / ny, T::zero());
        x = y.into_iter().map(|z| z * inv).collect();
        let r = residual(h, lambda, &x);
        let better = best.as_ref().is_none_or(|(_, b)| r < *b);
        if better {
            best = Some((x.clone(), r));
        }
        if r <= bound * T::from_f64(1e-3) {
            break;
        }
    }
    best.unwrap_or_else(|| {
        let r = residual(h, lambda, &x);
        (x, r)
    })
}

/// LU factorization with partial pivoting; tiny pivots are lifted to `floor`
/// so exactly singular shifts still yield a usable solve.
struct Lu<T> {
    a: ComplexDense<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    fn factor(mut a: ComplexDense<T>, floor: T) -> Self {
        let n = a.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = if floor > T::zero() {
            floor
        } else {
            T::epsilon()
        };
        for k in 0..n {
            let mut p = k;
            let mut best = cabs(a[(k, k)]);
            for i in k + 1..n {
                let v = cabs(a[(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            if cabs(a[(k, k)]) < floor {
                a[(k, k)] = Complex::new(floor, T::zero());
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * u;
                }
            }
        }
        Self { a, perm }
    }

    fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.a.dim();
        let mut y: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.a[(i, k)];
                y[i] = y[i] - l * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.a[(i, k)];
                y[i] = y[i] - u * y[k];
            }
            y[i] = y[i] / self.a[(i, i)];
        }
        y
    }
}

/// Solve `a x = b` by LU with partial pivoting (pivots lifted to `eps·‖a‖`).
pub(crate) fn lu_solve<T: Real>(a: &ComplexDense<T>, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let floor = T::epsilon() * a.norm();
    Lu::factor(a.clone(), floor).solve(b)
}

/// Diagonal similarity scaling by powers of two (Parlett–Reinsch).
fn balance<T: Real>(a: &mut ComplexDense<T>) {
    let n = a.dim();
    let two = T::from_f64(2.0);
    let four = T::from_f64(4.0);
    let l1 = |z: Complex<T>| z.re.abs() + z.im.abs();
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += l1(a[(j, i)]);
                    r += l1(a[(i, j)]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / two;
            while c < g {
                f *= two;
                c *= four;
            }
            g = r * two;
            while c >= g {
                f /= two;
                c /= four;
            }
            if (c + r) / f < T::from_f64(0.95) * s {
                converged = false;
                let fi = Complex::new(T::one() / f, T::zero());
                let fc = Complex::new(f, T::zero());
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] * fi;
                    a[(j, i)] = a[(j, i)] * fc;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form (similarity transform).
fn hessenberg<T: Real>(a: &mut ComplexDense<T>) {
    let n = a.dim();
    let two = T::from_f64(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail = vec_norm(&x[1..]);
        if tail == T::zero() {
            continue;
        }
        let xnorm = vec_norm(&x);
        let x0 = x[0];
        let ax0 = cabs(x0);
        let phase = if ax0 == T::zero() {
            Complex::one()
        } else {
            x0 / Complex::new(ax0, T::zero())
        };
        let alpha = -phase * Complex::new(xnorm, T::zero());
        let mut v = x;
        v[0] = v[0] - alpha;
        let vn = vec_norm(&v);
        let vn2 = vn * vn;
        let coef = Complex::new(two / vn2, T::zero());

        for j in k..n {
            let mut s: Complex<T> = Complex::zero();
            for (l, vl) in v.iter().enumerate() {
                s = s + vl.conj() * a[(k + 1 + l, j)];
            }
            let s = s * coef;
            for (l, &vl) in v.iter().enumerate() {
                a[(k + 1 + l, j)] = a[(k + 1 + l, j)] - vl * s;
            }
        }
        for i in 0..n {
            let mut s: Complex<T> = Complex::zero();
            for (l, &vl) in v.iter().enumerate() {
                s = s + a[(i, k + 1 + l)] * vl;
            }
            let s = s * coef;
            for (l, vl) in v.iter().enumerate() {
                a[(i, k + 1 + l)] = a[(i, k + 1 + l)] - s * vl.conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = Complex::zero();
        }
    }
}

fn eig2<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let half = Complex::new(T::from_f64(0.5), T::zero());
    let m = (a + d) * half;
    let h = (a - d) * half;
    let disc = csqrt(h * h + b * c);
    (m + disc, m - disc)
}

/// Complex Givens rotation `[c s; -s̄ c]` mapping `(x, y)` to `(r, 0)`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ay = cabs(y);
    if ay == T::zero() {
        return (T::one(), Complex::zero());
    }
    let ax = cabs(x);
    if ax == T::zero() {
        return (T::zero(), y.conj() / Complex::new(ay, T::zero()));
    }
    let r = T::hypot(ax, ay);
    let c = ax / r;
    let s = (x / Complex::new(ax, T::zero())) * y.conj() / Complex::new(r, T::zero());
    (c, s)
}

fn qr_eigenvalues<T: Real>(h: &ComplexDense<T>) -> Result<Vec<Complex<T>>> {
    let n = h.dim();
    let mut a = h.clone();
    balance(&mut a);
    hessenberg(&mut a);
    let eps = T::epsilon();
    let norm = a.norm();
    let mut eigs = vec![Complex::zero(); n];
    let max_iter = 30 * n.max(10);

    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        if hi == 0 {
            eigs[0] = a[(0, 0)];
            break;
        }
        // Locate the top of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let sub = cabs(a[(l, l - 1)]);
            let tst = cabs(a[(l - 1, l - 1)]) + cabs(a[(l, l)]);
            if sub <= eps * tst || sub <= eps * norm {
                a[(l, l - 1)] = Complex::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eigs[hi] = a[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == hi {
            let (e1, e2) = eig2(a[(l, l)], a[(l, hi)], a[(hi, l)], a[(hi, hi)]);
            eigs[l] = e1;
            eigs[hi] = e2;
            if l == 0 {
                break;
            }
            hi = l - 1;
            its = 0;
            continue;
        }
        its += 1;
        if its > max_iter {
            return Err(LinalgError::NonConvergence {
                index: hi,
                iterations: its - 1,
            });
        }

        let mu = if its % 10 == 0 {
            // Exceptional shift to break cycles.
            let s = T::from_f64(0.75) * (a[(hi, hi - 1)].re.abs() + a[(hi, hi - 1)].im.abs());
            a[(hi, hi)] + Complex::new(s, T::zero())
        } else {
            let d = a[(hi, hi)];
            let (e1, e2) = eig2(a[(hi - 1, hi - 1)], a[(hi - 1, hi)], a[(hi, hi - 1)], d);
            if cabs(e1 - d) <= cabs(e2 - d) {
                e1
            } else {
                e2
            }
        };

        for i in l..=hi {
            a[(i, i)] = a[(i, i)] - mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(a[(k, k)], a[(k + 1, k)]);
            let cc = Complex::new(c, T::zero());
            for j in k..=hi {
                let x = a[(k, j)];
                let y = a[(k + 1, j)];
                a[(k, j)] = cc * x + s * y;
                a[(k + 1, j)] = -s.conj() * x + cc * y;
            }
            a[(k + 1, k)] = Complex::zero();
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = l + off;
            let cc = Complex::new(c, T::zero());
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = a[(i, k)];
                let y = a[(i, k + 1)];
                a[(i, k)] = x * cc + y * s.conj();
                a[(i, k + 1)] = -x * s + y * cc;
            }
        }
        for i in l..=hi {
            a[(i, i)] = a[(i, i)] + mu;
        }
    }
    Ok(eigs)
}
