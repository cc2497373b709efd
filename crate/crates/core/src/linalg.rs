//! Point linear algebra (QR, approximate inverse) and the rigorous kernels
//! built on top of it: the interval Krawczyk solver and verified inversion
//! of point matrices.

use crate::error::Error;
use crate::interval::{add_up, div_up, mul_up, IMatrix, IVector, PMatrix};

/// Approximate inverse by Gauss-Jordan elimination with partial pivoting.
/// Returns `None` when a pivot degenerates.
pub fn approx_inverse(a: &PMatrix) -> Option<PMatrix> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut inv = PMatrix::identity(n);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[(r, col)].abs() > m[(piv, col)].abs() {
                piv = r;
            }
        }
        let p = m[(piv, col)];
        if !p.is_finite() || p.abs() < f64::MIN_POSITIVE {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let (a1, a2) = (m[(col, j)], m[(piv, j)]);
                m[(col, j)] = a2;
                m[(piv, j)] = a1;
                let (b1, b2) = (inv[(col, j)], inv[(piv, j)]);
                inv[(col, j)] = b2;
                inv[(piv, j)] = b1;
            }
        }
        let inv_p = 1.0 / p;
        for j in 0..n {
            m[(col, j)] *= inv_p;
            inv[(col, j)] *= inv_p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(r, j)] -= factor * m[(col, j)];
                inv[(r, j)] -= factor * inv[(col, j)];
            }
        }
    }
    if !inv.is_finite() {
        return None;
    }
    Some(inv)
}

/// Householder QR; returns the square orthogonal factor `Q`.
pub fn qr_q(a: &PMatrix) -> PMatrix {
    let n = a.rows();
    let m = a.cols();
    let mut r = a.clone();
    let mut q = PMatrix::identity(n);
    for k in 0..m.min(n.saturating_sub(1)) {
        // Householder vector for column k below the diagonal.
        let mut norm2 = 0.0;
        for i in k..n {
            norm2 += r[(i, k)] * r[(i, k)];
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to R (left) and accumulate into Q.
        for j in 0..m {
            let dot: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..n {
                r[(i, j)] -= s * v[i];
            }
        }
        for j in 0..n {
            let dot: f64 = (k..n).map(|i| v[i] * q[(i, j)]).sum();
            let s = 2.0 * dot / vnorm2;
            for i in k..n {
                q[(i, j)] -= s * v[i];
            }
        }
    }
    // q currently holds the product of reflectors applied to I, i.e. Q^T.
    q.transpose()
}

/// Q factor of the column-permuted matrix `A[:, order]`. Sorting columns by
/// decreasing importance before the factorization is the usual way to keep
/// the leading orthogonal directions aligned with the dominant error terms.
pub fn qr_q_ordered(a: &PMatrix, order: &[usize]) -> PMatrix {
    debug_assert_eq!(order.len(), a.cols());
    let mut permuted = PMatrix::zeros(a.rows(), a.cols());
    for (newj, &j) in order.iter().enumerate() {
        for i in 0..a.rows() {
            permuted[(i, newj)] = a[(i, j)];
        }
    }
    qr_q(&permuted)
}

/// Upper bound for the row-sum norm of an interval matrix.
pub fn norm_inf_upper(m: &IMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        let mut acc = 0.0;
        for j in 0..m.cols() {
            acc = add_up(acc, m[(i, j)].mag());
        }
        worst = worst.max(acc);
    }
    worst
}

/// Verified solve of the linear system `A x = b` by the interval Krawczyk
/// operator, iterated to a fixed point and polished with interval
/// Gauss-Seidel sweeps.
///
/// `x0` must already enclose every solution over `A in [A]`, `b in [b]`;
/// the result contains the same solutions and is a subset of `x0`.
pub fn krawczyk_solve(a: &IMatrix, b: &IVector, x0: &IVector) -> Result<IVector, Error> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n);
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(x0.len(), n);
    let c = approx_inverse(&a.mid()).ok_or(Error::SingularMidpoint)?;
    let ci = c.to_interval();
    let slope = &IMatrix::identity(n) - &(&ci * a);

    let mut x = x0.clone();
    for _ in 0..15 {
        let xhat = x.mid().to_interval();
        let residual = &ci * &(b - &(a * &xhat));
        let k = &(&xhat + &residual) + &(&slope * &(&x - &xhat));
        let next = k.intersect(&x)?;
        let improved = next.diam() < 0.99 * x.diam();
        x = next;
        if !improved {
            break;
        }
    }

    // Gauss-Seidel recovers the entrywise hull where the diagonal permits it
    // (exact for diagonally dominant and for scalar systems).
    for _ in 0..3 {
        let mut improved = false;
        for i in 0..n {
            if a[(i, i)].contains(0.0) {
                continue;
            }
            let mut acc = b[i];
            for j in 0..n {
                if j != i {
                    acc = acc - a[(i, j)] * x[j];
                }
            }
            let gs = acc.checked_div(&a[(i, i)])?.intersect(&x[i])?;
            if gs.diam() < x[i].diam() {
                improved = true;
            }
            x[i] = gs;
        }
        if !improved {
            break;
        }
    }
    Ok(x)
}

/// Rigorous enclosure of the inverse of a point matrix.
///
/// Builds an approximate inverse `C` (the transpose when the matrix is known
/// to be near-orthogonal), bounds `||I - C A||`, and refines the Neumann-series
/// candidate with the fixed-point form `X = C + (I - C A) X`.
pub fn verified_inverse(a: &PMatrix) -> Result<IMatrix, Error> {
    let c = approx_inverse(a).ok_or(Error::SingularMidpoint)?;
    verified_inverse_with_seed(a, &c)
}

/// Verified inverse of a numerically orthogonal matrix, seeded with its
/// transpose so no approximate inversion is needed.
pub fn verified_inverse_orthogonal(q: &PMatrix) -> Result<IMatrix, Error> {
    verified_inverse_with_seed(q, &q.transpose())
}

fn verified_inverse_with_seed(a: &PMatrix, c: &PMatrix) -> Result<IMatrix, Error> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n);
    let e = &IMatrix::identity(n) - &(&c.to_interval() * &a.to_interval());
    let e_norm = norm_inf_upper(&e);
    if !(e_norm < 1.0) {
        return Err(Error::SingularMidpoint);
    }
    // ||A^-1 - C|| <= ||E|| ||C|| / (1 - ||E||), all rounded up.
    let c_norm = c.norm_inf();
    let d = div_up(mul_up(e_norm, c_norm), 1.0 - e_norm);
    if !d.is_finite() {
        return Err(Error::SingularMidpoint);
    }
    let mut x = inflate_entrywise(&c.to_interval(), d);
    // Two contraction passes sharpen the crude norm bound considerably.
    for _ in 0..2 {
        let refined = &c.to_interval() + &(&e * &x);
        x = refined.intersect(&x)?;
    }
    Ok(x)
}

fn inflate_entrywise(m: &IMatrix, d: f64) -> IMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = out[(i, j)].inflate(d);
        }
    }
    out
}

/// Orthogonality defect `||Q^T Q - I||_inf` in point arithmetic.
pub fn orthogonality_defect(q: &PMatrix) -> f64 {
    let n = q.rows();
    let g = q.transpose().matmul(q);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            acc = add_up(acc, (g[(i, j)] - target).abs());
        }
        worst = worst.max(acc);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    #[test]
    fn approx_inverse_roundtrip() {
        let a = PMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let inv = approx_inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - target).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn qr_is_orthogonal_and_reproduces() {
        let a = PMatrix::from_rows(vec![
            vec![1.0, 2.0, 0.5],
            vec![-1.0, 0.3, 2.0],
            vec![0.2, -0.7, 1.1],
        ]);
        let q = qr_q(&a);
        assert!(orthogonality_defect(&q) < 1e-13);
        // R = Q^T A should be upper triangular.
        let r = q.transpose().matmul(&a);
        for i in 1..3 {
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-12, "R not triangular: {:?}", r);
            }
        }
    }

    #[test]
    fn krawczyk_identity_system() {
        let a = IMatrix::identity(2);
        let b = IVector::from_entries(vec![Interval::point(1.0), Interval::point(2.0)]);
        let x0 = IVector::from_entries(vec![Interval::new(-10.0, 10.0), Interval::new(-10.0, 10.0)]);
        let x = krawczyk_solve(&a, &b, &x0).unwrap();
        assert_eq!(x[0], Interval::point(1.0));
        assert_eq!(x[1], Interval::point(2.0));
    }

    #[test]
    fn krawczyk_scalar_cases() {
        // [[2]] x = [1], solution 0.5
        let a = IMatrix::from_rows(vec![vec![Interval::point(2.0)]]);
        let b = IVector::from_entries(vec![Interval::point(1.0)]);
        let x0 = IVector::from_entries(vec![Interval::new(0.0, 1.0)]);
        let x = krawczyk_solve(&a, &b, &x0).unwrap();
        assert!(x[0].contains(0.5) && x[0].diam() < 1e-15);

        // [[0.9,1.1]] x = [1]: hull of solutions is [1/1.1, 1/0.9]
        let a = IMatrix::from_rows(vec![vec![Interval::new(0.9, 1.1)]]);
        let x0 = IVector::from_entries(vec![Interval::new(0.8, 1.3)]);
        let x = krawczyk_solve(&a, &b, &x0).unwrap();
        assert!(x[0].lo() <= 1.0 / 1.1 && x[0].hi() >= 1.0 / 0.9);
        assert!(x[0].lo() >= 0.9090 && x[0].hi() <= 1.1112);
        assert!(x[0].subset_of(&x0[0]));
    }

    #[test]
    fn verified_inverse_contains_truth() {
        let id = PMatrix::identity(3);
        let inv = verified_inverse(&id).unwrap();
        assert!(inv.contains_point(&id));
        assert!(inv.diam() <= 4.0 * f64::EPSILON);

        let mut two = PMatrix::identity(2);
        two[(0, 0)] = 2.0;
        two[(1, 1)] = 2.0;
        let inv = verified_inverse(&two).unwrap();
        assert!(inv[(0, 0)].contains(0.5) && inv[(1, 1)].contains(0.5));

        // rotation: inverse equals transpose; check Id ∈ A * inv(A)
        let t: f64 = 0.3;
        let rot = PMatrix::from_rows(vec![vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]);
        let inv = verified_inverse_orthogonal(&rot).unwrap();
        assert!(inv.contains_point(&rot.transpose()));
        let prod = &rot.to_interval() * &inv;
        assert!(prod.contains_point(&PMatrix::identity(2)));
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = PMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(verified_inverse(&a), Err(Error::SingularMidpoint)));
    }
}
