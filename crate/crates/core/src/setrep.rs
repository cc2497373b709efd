//! Doubleton set representations with QR-factored wrapping control.
//!
//! A state set is carried as `x + C [r] + B [s]`: a point center, a
//! parallelepiped main part whose frame `C` is transported exactly by the
//! (midpoint of the) step transfer matrix, and an orthogonal junk frame `B`
//! that absorbs everything thin: interval-width of the transfer, rounding
//! defects of the point products, and the step remainder. Variational
//! matrices use the same split `V + A [R] + Q [S]`.
//!
//! Propagation never rewrites `[r]`/`[R]`; all new error lands in the
//! `[s]`/`[S]` term expressed in a freshly orthogonalized frame, which is
//! what keeps long products of transfer matrices from wrapping.

use crate::error::Error;
use crate::interval::{IMatrix, IVector, PMatrix, PVector};
use crate::linalg::{qr_q_ordered, verified_inverse_orthogonal};

/// `x + C [r] + B [s]` with `0 in [r]`, `0 in [s]`, `B` numerically
/// orthogonal.
#[derive(Clone, Debug)]
pub struct Doubleton {
    pub x: PVector,
    pub c: PMatrix,
    pub r: IVector,
    pub b: PMatrix,
    pub s: IVector,
}

/// `V + A [R] + Q [S]` with `Q` numerically orthogonal.
#[derive(Clone, Debug)]
pub struct MatrixDoubleton {
    pub v: PMatrix,
    pub a: PMatrix,
    pub r: IMatrix,
    pub q: PMatrix,
    pub s: IMatrix,
}

impl Doubleton {
    /// Wrap a box: center point, identity frames, all width in `[r]`.
    pub fn from_box(bx: &IVector) -> Doubleton {
        let n = bx.len();
        let x = bx.mid();
        let r = bx - &x.to_interval();
        Doubleton {
            x,
            c: PMatrix::identity(n),
            r,
            b: PMatrix::identity(n),
            s: IVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Outward-rounded `x + C [r] + B [s]`.
    pub fn hull(&self) -> IVector {
        let base = self.x.to_interval();
        let main = &self.c.to_interval() * &self.r;
        let junk = &self.b.to_interval() * &self.s;
        &(&base + &main) + &junk
    }

    /// Transport by `shift + tail + [T] (C [r] + B [s])`.
    ///
    /// `shift` is the new point anchor (the transfer was linearized there)
    /// and `tail` collects the step remainder terms. The new center absorbs
    /// `shift + mid(tail)`; everything else funnels through the junk frame.
    pub fn propagate(
        &self,
        t: &IMatrix,
        shift: &PVector,
        tail: &IVector,
    ) -> Result<Doubleton, Error> {
        let n = self.dim();
        debug_assert_eq!(t.rows(), n);
        let t_mid = t.mid();
        let c_next = t_mid.matmul(&self.c);
        // frame for the junk part: orthogonalized transport of B, columns
        // ordered by the width each one currently carries
        let b_prop = t_mid.matmul(&self.b);
        let order = column_order_vec(&b_prop, &self.s);
        let q_next = qr_q_ordered(&b_prop, &order);
        let q_inv = verified_inverse_orthogonal(&q_next)?;

        // new center: shift plus the midpoint of the remainder
        let mut x_next = PVector::zeros(n);
        let tail_mid = tail.mid();
        for i in 0..n {
            x_next[i] = shift[i] + tail_mid[i];
        }

        // defect of the exact main part against the stored point product
        let delta_c = &(t * &self.c.to_interval()) - &c_next.to_interval();
        let mut slack = &(&shift.to_interval() + tail) - &x_next.to_interval();
        slack = &slack + &(&delta_c * &self.r);

        let tb = t * &self.b.to_interval();
        let s_next = &(&(&q_inv * &tb) * &self.s) + &(&q_inv * &slack);

        Ok(Doubleton { x: x_next, c: c_next, r: self.r.clone(), b: q_next, s: s_next })
    }

    /// Fold the main part into the junk frame once the junk term dominates:
    /// the orthogonal `B` becomes the new main frame (keeping the set's
    /// alignment, unlike a collapse to an axis box) and the old main part is
    /// absorbed through the rigorous inverse of `B`.
    pub fn reorganize(&self) -> Result<Doubleton, Error> {
        let n = self.dim();
        let b_inv = verified_inverse_orthogonal(&self.b)?;
        let folded = &(&b_inv * &(&self.c.to_interval() * &self.r)) + &self.s;
        Ok(Doubleton {
            x: self.x.clone(),
            c: self.b.clone(),
            r: folded,
            b: PMatrix::identity(n),
            s: IVector::zeros(n),
        })
    }

    /// True when `||s|| > threshold * ||r||` (max-width norms).
    pub fn needs_reorganization(&self, threshold: f64) -> bool {
        self.s.diam() > threshold * self.r.diam()
    }
}

impl MatrixDoubleton {
    pub fn from_box(bm: &IMatrix) -> MatrixDoubleton {
        let n = bm.rows();
        let v = bm.mid();
        let r = bm - &v.to_interval();
        MatrixDoubleton {
            v,
            a: PMatrix::identity(n),
            r,
            q: PMatrix::identity(n),
            s: IMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> MatrixDoubleton {
        MatrixDoubleton::from_box(&IMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    /// Outward-rounded `V + A [R] + Q [S]`.
    pub fn hull(&self) -> IMatrix {
        let base = self.v.to_interval();
        let main = &self.a.to_interval() * &self.r;
        let junk = &self.q.to_interval() * &self.s;
        &(&base + &main) + &junk
    }

    /// Transport by a one-step variational enclosure: the represented set
    /// becomes `[V_step] * (V + A [R] + Q [S])`.
    pub fn propagate(&self, v_step: &IMatrix) -> Result<MatrixDoubleton, Error> {
        let n = self.dim();
        debug_assert_eq!(v_step.rows(), n);
        let v_hat = v_step.mid();
        let v_next = v_hat.matmul(&self.v);
        let a_next = v_hat.matmul(&self.a);
        let q_prop = v_hat.matmul(&self.q);
        let order = column_order_mat(&q_prop, &self.s);
        let q_next = qr_q_ordered(&q_prop, &order);
        let q_inv = verified_inverse_orthogonal(&q_next)?;

        let v_hat_i = v_hat.to_interval();
        let dev = v_step - &v_hat_i;
        // deviation of the step matrix times the main part, plus the rounding
        // defects of both stored point products
        let main = &self.v.to_interval() + &(&self.a.to_interval() * &self.r);
        let mut delta = &dev * &main;
        delta = &delta + &(&(&v_hat_i * &self.v.to_interval()) - &v_next.to_interval());
        delta = &delta
            + &(&(&(&v_hat_i * &self.a.to_interval()) - &a_next.to_interval()) * &self.r);

        let vq = v_step * &self.q.to_interval();
        let s_next = &(&(&q_inv * &vq) * &self.s) + &(&q_inv * &delta);

        Ok(MatrixDoubleton { v: v_next, a: a_next, r: self.r.clone(), q: q_next, s: s_next })
    }

    /// Frame-preserving fold of the main part into the junk frame.
    pub fn reorganize(&self) -> Result<MatrixDoubleton, Error> {
        let n = self.dim();
        let q_inv = verified_inverse_orthogonal(&self.q)?;
        let folded = &(&q_inv * &(&self.a.to_interval() * &self.r)) + &self.s;
        Ok(MatrixDoubleton {
            v: self.v.clone(),
            a: self.q.clone(),
            r: folded,
            q: PMatrix::identity(n),
            s: IMatrix::zeros(n, n),
        })
    }

    pub fn needs_reorganization(&self, threshold: f64) -> bool {
        self.s.diam() > threshold * self.r.diam()
    }
}

/// Columns sorted by (width carried) * (column length), largest first.
fn column_order_vec(frame: &PMatrix, s: &IVector) -> Vec<usize> {
    let mut keys: Vec<(usize, f64)> = (0..frame.cols())
        .map(|j| {
            let len: f64 = frame.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            (j, s[j].diam() * len)
        })
        .collect();
    keys.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    keys.into_iter().map(|(j, _)| j).collect()
}

fn column_order_mat(frame: &PMatrix, s: &IMatrix) -> Vec<usize> {
    let mut keys: Vec<(usize, f64)> = (0..frame.cols())
        .map(|j| {
            let len: f64 = frame.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            let width = (0..s.rows()).map(|i| s[(i, j)].diam()).fold(0.0, f64::max);
            (j, width * len)
        })
        .collect();
    keys.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    keys.into_iter().map(|(j, _)| j).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::linalg::orthogonality_defect;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn rotation(theta: f64) -> PMatrix {
        PMatrix::from_rows(vec![
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
    }

    #[test]
    fn from_box_splits_center_and_radius() {
        let d = Doubleton::from_box(&IVector::from_points(&[1.0, -2.0]));
        assert_eq!(d.x.as_slice(), &[1.0, -2.0]);
        assert_eq!(d.r.diam(), 0.0);
        assert_eq!(d.s.diam(), 0.0);

        let d = Doubleton::from_box(&IVector::from_entries(vec![iv(0.0, 2.0), iv(-1.0, 1.0)]));
        assert_eq!(d.x.as_slice(), &[1.0, 0.0]);
        assert!(d.r[0].contains(-1.0) && d.r[0].contains(1.0));
        assert!(d.r[1].contains(-1.0) && d.r[1].contains(1.0));
    }

    #[test]
    fn hull_contains_original_box() {
        let bx = IVector::from_entries(vec![iv(0.3, 0.7), iv(-2.0, -1.0), iv(5.0, 5.0)]);
        let d = Doubleton::from_box(&bx);
        assert!(d.hull().contains_vector(&bx));
    }

    #[test]
    fn identity_propagation_is_lossless_up_to_roundoff() {
        let bx = IVector::from_entries(vec![iv(-0.5, 0.5), iv(1.0, 2.0)]);
        let d = Doubleton::from_box(&bx);
        let t = IMatrix::identity(2);
        // an identity step keeps the old anchor as the new shift
        let p = d.propagate(&t, &d.x, &IVector::zeros(2)).unwrap();
        let h = p.hull();
        assert!(h.contains_vector(&bx));
        assert!(h.diam() <= bx.diam() * (1.0 + 1e-14) + 1e-14);
    }

    #[test]
    fn pure_translation_moves_center_only() {
        let d = Doubleton::from_box(&IVector::from_entries(vec![iv(-1.0, 1.0), iv(-1.0, 1.0)]));
        let t = IMatrix::identity(2);
        let shift = PVector(vec![3.0, -4.0]);
        let tail = IVector::zeros(2);
        let p = d.propagate(&t, &shift, &tail).unwrap();
        assert_eq!(p.x.as_slice(), &[3.0, -4.0]);
        assert!(p.s.diam() < 1e-14);
        assert_eq!(p.r.diam(), d.r.diam());
    }

    #[test]
    fn iterated_rotation_stays_tight_where_naive_boxes_blow_up() {
        let bx = IVector::from_entries(vec![iv(-0.1, 0.1), iv(-0.1, 0.1)]);
        let rot = rotation(0.5).to_interval();
        let shift = PVector(vec![0.0, 0.0]);
        let tail = IVector::zeros(2);

        let mut d = Doubleton::from_box(&bx);
        let mut naive = bx.clone();
        for _ in 0..100 {
            d = d.propagate(&rot, &shift, &tail).unwrap();
            naive = &rot * &naive;
        }
        let tight = d.hull().diam();
        let start = bx.diam();
        // a square's bounding box under rotation dilates at most sqrt(2)
        assert!(tight <= start * 1.5, "doubleton grew: {tight} vs {start}");
        assert!(naive.diam() >= start * 10.0, "naive iteration unexpectedly tight");
    }

    #[test]
    fn matrix_identity_propagation_is_lossless() {
        let mbox = IMatrix::from_rows(vec![
            vec![iv(0.9, 1.1), iv(-0.1, 0.1)],
            vec![iv(-0.1, 0.1), iv(0.9, 1.1)],
        ]);
        let md = MatrixDoubleton::from_box(&mbox);
        let p = md.propagate(&IMatrix::identity(2)).unwrap();
        assert!(p.hull().contains_matrix(&mbox));
        assert!(p.hull().diam() <= mbox.diam() * (1.0 + 1e-13) + 1e-13);
        // [R] passes through untouched
        assert!(p.r == md.r);
    }

    #[test]
    fn matrix_propagation_contains_sampled_products() {
        let mbox = IMatrix::from_rows(vec![
            vec![iv(0.95, 1.05), iv(-0.05, 0.05)],
            vec![iv(-0.05, 0.05), iv(0.95, 1.05)],
        ]);
        let step = IMatrix::from_rows(vec![
            vec![iv(0.8, 0.85), iv(0.3, 0.32)],
            vec![iv(-0.6, -0.58), iv(1.1, 1.15)],
        ]);
        let md = MatrixDoubleton::from_box(&mbox);
        let p = md.propagate(&step).unwrap();
        let hull = p.hull();
        // corner samples of both factors
        for &(a, b, c, d) in &[(0.8, 0.3, -0.6, 1.1), (0.85, 0.32, -0.58, 1.15)] {
            for &(e, f, g, h) in &[(0.95, -0.05, 0.05, 1.05), (1.05, 0.05, -0.05, 0.95)] {
                let prod = [
                    [a * e + b * g, a * f + b * h],
                    [c * e + d * g, c * f + d * h],
                ];
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(
                            hull[(i, j)].contains(prod[i][j]),
                            "hull {:?} missing {}",
                            hull[(i, j)],
                            prod[i][j]
                        );
                    }
                }
            }
        }
        // comparable to the naive interval product on a single step (the
        // orthogonal-frame indirection costs at most a small geometric
        // factor here; its payoff is in iteration, tested below)
        let naive = &step * &md.hull();
        assert!(hull.diam() <= naive.diam() * 2.0);
    }

    #[test]
    fn iterated_matrix_rotation_bounded() {
        let rot = rotation(0.5).to_interval();
        let mut md = MatrixDoubleton::from_box(&IMatrix::from_rows(vec![
            vec![iv(0.99, 1.01), iv(-0.01, 0.01)],
            vec![iv(-0.01, 0.01), iv(0.99, 1.01)],
        ]));
        let mut naive = md.hull();
        for _ in 0..100 {
            md = md.propagate(&rot).unwrap();
            naive = &rot * &naive;
        }
        assert!(md.hull().diam() < 0.05);
        assert!(naive.diam() > 10.0 * md.hull().diam());
        assert!(orthogonality_defect(&md.q) < 1e-12);
    }

    #[test]
    fn reorganization_folds_junk_into_main() {
        let mut d = Doubleton::from_box(&IVector::from_entries(vec![iv(-1e-9, 1e-9), iv(-1e-9, 1e-9)]));
        d.s = IVector::from_entries(vec![iv(-1.0, 1.0), iv(-1.0, 1.0)]);
        assert!(d.needs_reorganization(10.0));
        let folded = d.reorganize().unwrap();
        assert!(!folded.needs_reorganization(10.0));
        assert!(folded.hull().contains_vector(&d.hull()));
        // the fold keeps the junk frame as the new main frame
        assert_eq!(folded.c, d.b);
    }

    #[test]
    fn reorganization_preserves_rotated_frames() {
        // a thin set aligned with a rotated frame must stay thin after the fold
        let rot = rotation(0.7);
        let mut d = Doubleton::from_box(&IVector::from_points(&[0.0, 0.0]));
        d.b = rot.clone();
        d.s = IVector::from_entries(vec![iv(-1.0, 1.0), iv(-1e-6, 1e-6)]);
        let folded = d.reorganize().unwrap();
        // hull widths unchanged up to roundoff (frame kept, not boxed)
        let before = d.hull();
        let after = folded.hull();
        for i in 0..2 {
            assert!(after[i].diam() <= before[i].diam() * (1.0 + 1e-12) + 1e-12);
        }
        assert_eq!(folded.c, rot);
    }
}
