use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Default gate on `max |M - M^dag|` before diagonalizing.
pub const HERMITICITY_TOL: f64 = 1e-10;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V Λ V^dag`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        &scaled * &self.vectors.adjoint()
    }

    /// Largest `‖M v_k − λ_k v_k‖` over all columns.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.vector(k);
                let mv = m.apply(&v);
                mv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * self.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V^dag V − I|`
    pub fn unitarity_deviation(&self) -> f64 {
        let g = &self.vectors.adjoint() * &self.vectors;
        g.max_abs_diff(&ComplexMatrix::identity(self.len()))
    }

    /// Expresses `op` in the eigenbasis, `V^dag op V`.
    pub fn transform(&self, op: &ComplexMatrix) -> ComplexMatrix {
        &(&self.vectors.adjoint() * op) * &self.vectors
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Householder reduction to a Hermitian tridiagonal form, a diagonal phase
/// change to make it real symmetric, then implicit QL with Wilkinson shifts.
/// Each eigenvector is normalized with its largest component real positive;
/// degenerate eigenvalues are ordered by the index of that component.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigensolver input must be square".into(),
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("eigensolver input has non-finite entries".into()));
    }
    let deviation = m.hermiticity_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation, tol });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }

    // Symmetrize so the lower triangle is exactly the conjugate of the upper.
    let mut a: Vec<C64> = m.as_slice().to_vec();
    for i in 0..n {
        a[i * n + i] = C64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }

    let (reflectors, diag, offdiag) = tridiagonalize(&mut a, n);

    // offdiag[k] = T[k+1, k]; choose phases so D^dag T D is real with |offdiag| below the diagonal.
    let mut phase = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let r = offdiag[k].norm();
        e[k] = r;
        phase[k + 1] = if r > 0.0 { phase[k] * (offdiag[k] / r) } else { phase[k] };
    }
    let mut d = diag;

    // Rows of `zt` are eigenvectors of the real tridiagonal matrix.
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, &mut zt, n)?;

    // Back-transform: v = Q D z, with Q the product of reflectors.
    let mut vecs: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| phase[i] * zt[j * n + i]).collect())
        .collect();
    for r in reflectors.iter().rev() {
        for v in vecs.iter_mut() {
            r.apply(v);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let pivots: Vec<usize> = vecs.iter_mut().map(|v| fix_gauge(v)).collect();
    let scale = d.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    // Within clusters of numerically equal values, order by pivot index.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (d[order[end]] - d[order[start]]).abs() <= 1e-10 * scale {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| (pivots[k], k));
        start = end;
    }

    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| vecs[order[j]][i]);
    Ok(EigenDecomposition { values, vectors })
}

/// `H = I − τ v v^dag` acting on components `offset..`.
struct Reflector {
    offset: usize,
    v: Vec<C64>,
    tau: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [C64]) {
        let tail = &mut x[self.offset..];
        let s: C64 = self.v.iter().zip(tail.iter()).map(|(a, b)| a.conj() * b).sum();
        let f = s * self.tau;
        for (t, vi) in tail.iter_mut().zip(&self.v) {
            *t -= f * vi;
        }
    }
}

/// Reduces the Hermitian row-major `a` to tridiagonal form. Returns the
/// reflectors, the real diagonal and the complex subdiagonal `T[k+1, k]`.
fn tridiagonalize(a: &mut [C64], n: usize) -> (Vec<Reflector>, Vec<f64>, Vec<C64>) {
    let mut reflectors = Vec::new();
    let mut sub = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // Column k below the diagonal, read from row k by Hermiticity.
        let x: Vec<C64> = (0..m).map(|i| a[k * n + k + 1 + i].conj()).collect();
        // Rescaled so tiny columns do not underflow in the squared norms.
        let scale = x[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 1 || scale == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let scale = scale.max(x[0].norm());
        let mut v: Vec<C64> = x.iter().map(|z| z / scale).collect();
        let alpha = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ph = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { C64::new(1.0, 0.0) };
        let beta = -ph * alpha;
        v[0] -= beta;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        let beta = beta * scale;
        sub[k] = beta;

        // p = τ A_sub v, w = p − (τ/2)(v^dag p) v, A_sub -= v w^dag + w v^dag
        let off = k + 1;
        let mut p = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(x, y)| x * y).sum::<C64>() * tau;
        }
        let vp: C64 = v.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
        let kfac = vp * (0.5 * tau);
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - kfac * vi).collect();
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        // Row/column k now hold beta at the subdiagonal and zeros beyond.
        a[k * n + off] = beta.conj();
        a[off * n + k] = beta;
        for i in 1..m {
            a[k * n + off + i] = C64::new(0.0, 0.0);
            a[(off + i) * n + k] = C64::new(0.0, 0.0);
        }
        reflectors.push(Reflector { offset: off, v, tau });
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (reflectors, diag, sub)
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix.
/// `e[i]` couples `i` and `i + 1`; rows of `zt` are rotated alongside.
fn tql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    let anorm = (0..n).map(|i| d[i].abs() + e.get(i).map_or(0.0, |x| x.abs())).fold(0.0, f64::max);
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNoConvergence { iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = zt.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..];
                let zi1 = &mut hi[..n];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Normalizes `v` and rotates its phase so the first largest-magnitude
/// component is real positive. Returns that component's index.
fn fix_gauge(v: &mut [C64]) -> usize {
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let ph = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z = *z * ph / nrm;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
    pivot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::matrix::sigma_x;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + &a.adjoint()).scale_real(0.5)
    }

    /// Determinant by cofactor expansion along the first row.
    fn det(m: &[Vec<C64>]) -> C64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let minor: Vec<Vec<C64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[0][j] * det(&minor) * sign;
        }
        acc
    }

    fn char_poly(m: &ComplexMatrix, lambda: f64) -> f64 {
        let n = m.rows();
        let rows: Vec<Vec<C64>> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)] - if i == j { C64::new(lambda, 0.0) } else { C64::new(0.0, 0.0) }).collect())
            .collect();
        det(&rows).re
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = hermitian_eig(&sigma_x(), HERMITICITY_TOL).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_gives_permutation() {
        let m = ComplexMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&m, HERMITICITY_TOL).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let expected = ComplexMatrix::from_real(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e.vectors, expected);
    }

    #[test]
    fn degenerate_identity_is_ordered_by_pivot() {
        let e = hermitian_eig(&ComplexMatrix::identity(4), HERMITICITY_TOL).unwrap();
        assert_eq!(e.vectors, ComplexMatrix::identity(4));
    }

    #[test]
    fn roots_match_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_hermitian(&mut rng, 4);
        let e = hermitian_eig(&m, HERMITICITY_TOL).unwrap();
        // Bracket each root of det(M − λI) by scanning, then bisect.
        let bound = 4.0 * 2.0;
        let steps = 4000;
        let mut roots = Vec::new();
        let mut prev = char_poly(&m, -bound);
        for s in 1..=steps {
            let x = -bound + 2.0 * bound * s as f64 / steps as f64;
            let cur = char_poly(&m, x);
            if prev.signum() != cur.signum() {
                let (mut lo, mut hi) = (x - 2.0 * bound / steps as f64, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if char_poly(&m, mid).signum() == char_poly(&m, lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
        assert_eq!(roots.len(), 4);
        for (r, v) in roots.iter().zip(&e.values) {
            assert!((r - v).abs() < 1e-10, "{r} vs {v}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        match hermitian_eig(&m, HERMITICITY_TOL) {
            Err(Error::NotHermitian { deviation, .. }) => assert!((deviation - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reconstruction_at_dim_512() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_hermitian(&mut rng, 512);
        let e = hermitian_eig(&m, HERMITICITY_TOL).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-9);
        assert!(e.unitarity_deviation() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn gauge_makes_pivot_real_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_hermitian(&mut rng, 6);
        let e = hermitian_eig(&m, HERMITICITY_TOL).unwrap();
        for k in 0..6 {
            let v = e.vector(k);
            let p = v.iter().enumerate().max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap()).unwrap().0;
            assert!(v[p].re > 0.0 && v[p].im == 0.0);
        }
        assert!(e.residual(&m) < 1e-12 * 6.0);
    }

    #[test]
    fn tiny_columns_do_not_underflow() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = random_hermitian(&mut rng, 8);
        for j in 0..8 {
            for i in 4..8 {
                if i != j {
                    m[(i, j)] *= 1e-165;
                    m[(j, i)] = m[(i, j)].conj();
                }
            }
        }
        let e = hermitian_eig(&m, HERMITICITY_TOL).unwrap();
        assert!(e.values.iter().all(|v| v.is_finite()));
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::identity(3);
        m[(1, 1)] = C64::new(f64::NAN, 0.0);
        assert!(hermitian_eig(&m, HERMITICITY_TOL).is_err());
    }
}
