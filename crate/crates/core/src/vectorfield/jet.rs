//! Taylor coefficients (normalized time derivatives) of the flow and of the
//! variational flow at a box, computed by forward automatic differentiation
//! on the field's expression DAG.
//!
//! Writing `phi[i]` for the i-th normalized coefficient of the flow at the
//! box `[x]`, the recurrence is `phi[i+1] = (f o phi)[i] / (i+1)`, where the
//! series composition is evaluated coefficient by coefficient on the DAG.
//! The variational coefficients `psi[i]` ride along as n tangent series
//! (one per column, seeded with the identity), so a product node costs two
//! series multiplications per column and the whole computation stays within
//! the usual `(2n+1) c_f (m+1)(m+2)/2` multiplication budget.

use super::{Node, VectorField};
use crate::error::Error;
use crate::interval::{IMatrix, IVector, Interval};

/// Taylor coefficients of the flow (and optionally the variational flow)
/// at a set, up to `order`.
#[derive(Clone, Debug)]
pub struct Jet {
    /// `phi[i]` encloses the i-th normalized coefficient; `phi[0]` is the
    /// input set itself.
    pub phi: Vec<IVector>,
    /// `psi[i]` encloses the i-th normalized coefficient of `D_x phi . Id`;
    /// `psi[0]` is the identity. Present only for variational jets.
    pub psi: Option<Vec<IMatrix>>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.phi.len() - 1
    }

    /// Horner evaluation of `sum_{i<=upto} t^i phi[i]`.
    pub fn eval_phi(&self, t: &Interval, upto: usize) -> IVector {
        debug_assert!(upto < self.phi.len());
        let mut acc = self.phi[upto].clone();
        for i in (0..upto).rev() {
            acc = &self.phi[i] + &acc.scale(t);
        }
        acc
    }

    /// Horner evaluation of `sum_{i<=upto} c_i t^i phi[i]` for caller-chosen
    /// scalar weights (the interpolation sums of the corrector).
    pub fn eval_phi_weighted(&self, t: &Interval, weights: &[Interval]) -> IVector {
        let upto = weights.len() - 1;
        debug_assert!(upto < self.phi.len());
        let mut acc = self.phi[upto].scale(&weights[upto]);
        for i in (0..upto).rev() {
            acc = &self.phi[i].scale(&weights[i]) + &acc.scale(t);
        }
        acc
    }

    /// Horner evaluation of `sum_{i<=upto} t^i psi[i]`.
    pub fn eval_psi(&self, t: &Interval, upto: usize) -> IMatrix {
        let psi = self.psi.as_ref().expect("variational jet required");
        debug_assert!(upto < psi.len());
        let mut acc = psi[upto].clone();
        for i in (0..upto).rev() {
            acc = &psi[i] + &acc.scale(t);
        }
        acc
    }

    /// Horner evaluation of `sum_{i<=upto} c_i t^i psi[i]`.
    pub fn eval_psi_weighted(&self, t: &Interval, weights: &[Interval]) -> IMatrix {
        let psi = self.psi.as_ref().expect("variational jet required");
        let upto = weights.len() - 1;
        debug_assert!(upto < psi.len());
        let mut acc = psi[upto].scale(&weights[upto]);
        for i in (0..upto).rev() {
            acc = &psi[i].scale(&weights[i]) + &acc.scale(t);
        }
        acc
    }
}

/// Flow coefficients only.
pub fn c0_jet(f: &VectorField, x: &IVector, order: usize) -> Result<Jet, Error> {
    compute_jet(f, x, order, false)
}

/// Flow and variational coefficients.
pub fn c1_jet(f: &VectorField, x: &IVector, order: usize) -> Result<Jet, Error> {
    compute_jet(f, x, order, true)
}

fn compute_jet(f: &VectorField, x: &IVector, order: usize, variational: bool) -> Result<Jet, Error> {
    assert!(order >= 1, "jet order must be at least 1");
    let n = f.dim();
    assert_eq!(x.len(), n);
    let nodes = f.nodes();
    let outputs = f.outputs();
    let params = f.param_values();
    let nn = nodes.len();
    let levels = order; // node coefficients live at orders 0..order-1

    let mut phi: Vec<IVector> = Vec::with_capacity(order + 1);
    phi.push(x.clone());
    let mut psi: Vec<IMatrix> = Vec::new();
    if variational {
        psi.reserve(order + 1);
        psi.push(IMatrix::identity(n));
    }

    // Flat coefficient buffers: primal[node * levels + k],
    // tangent[(node * n + col) * levels + k].
    let mut primal = vec![Interval::ZERO; nn * levels];
    let mut tangent = if variational {
        vec![Interval::ZERO; nn * n * levels]
    } else {
        Vec::new()
    };

    macro_rules! pr {
        ($id:expr, $k:expr) => {
            primal[$id * levels + $k]
        };
    }
    macro_rules! tg {
        ($id:expr, $c:expr, $k:expr) => {
            tangent[($id * n + $c) * levels + $k]
        };
    }

    for k in 0..levels {
        for (id, node) in nodes.iter().enumerate() {
            let v = match *node {
                Node::Const(c) => {
                    if k == 0 {
                        c
                    } else {
                        Interval::ZERO
                    }
                }
                Node::Param(p) => {
                    if k == 0 {
                        params[p]
                    } else {
                        Interval::ZERO
                    }
                }
                Node::Var(i) => phi[k][i],
                Node::Add(a, b) => pr!(a, k) + pr!(b, k),
                Node::Sub(a, b) => pr!(a, k) - pr!(b, k),
                Node::Neg(a) => -pr!(a, k),
                Node::Mul(a, b) => {
                    if a == b && k == 0 {
                        // self-product: the zeroth coefficient is a square
                        pr!(a, 0).powi(2)?
                    } else {
                        let mut acc = Interval::ZERO;
                        for l in 0..=k {
                            acc = acc + pr!(a, l) * pr!(b, k - l);
                        }
                        acc
                    }
                }
                Node::Div(a, b) => {
                    if k == 0 {
                        pr!(a, 0).checked_div(&pr!(b, 0))?
                    } else {
                        let mut acc = pr!(a, k);
                        for l in 0..k {
                            acc = acc - pr!(id, l) * pr!(b, k - l);
                        }
                        acc.checked_div(&pr!(b, 0))?
                    }
                }
                Node::Sqrt(a) => {
                    if k == 0 {
                        pr!(a, 0).sqrt()?
                    } else {
                        let mut acc = pr!(a, k);
                        for l in 1..k {
                            acc = acc - pr!(id, l) * pr!(id, k - l);
                        }
                        acc.checked_div(&pr!(id, 0).scale(2.0))?
                    }
                }
            };
            pr!(id, k) = v;

            if variational {
                for c in 0..n {
                    let t = match *node {
                        Node::Const(_) | Node::Param(_) => Interval::ZERO,
                        Node::Var(i) => psi[k][(i, c)],
                        Node::Add(a, b) => tg!(a, c, k) + tg!(b, c, k),
                        Node::Sub(a, b) => tg!(a, c, k) - tg!(b, c, k),
                        Node::Neg(a) => -tg!(a, c, k),
                        Node::Mul(a, b) => {
                            let mut acc = Interval::ZERO;
                            for l in 0..=k {
                                acc = acc + tg!(a, c, l) * pr!(b, k - l) + pr!(a, l) * tg!(b, c, k - l);
                            }
                            acc
                        }
                        Node::Div(a, b) => {
                            // w v = u  =>  w'[k] v[0] = u'[k] - sum w[l] v'[k-l] - sum_{l<k} w'[l] v[k-l]
                            let mut acc = tg!(a, c, k);
                            for l in 0..=k {
                                acc = acc - pr!(id, l) * tg!(b, c, k - l);
                            }
                            for l in 0..k {
                                acc = acc - tg!(id, c, l) * pr!(b, k - l);
                            }
                            acc.checked_div(&pr!(b, 0))?
                        }
                        Node::Sqrt(a) => {
                            // 2 s s' = u'  =>  s'[k] 2 s[0] = u'[k] - 2 sum_{l<k} s'[l] s[k-l]
                            let mut acc = tg!(a, c, k);
                            for l in 0..k {
                                acc = acc - (tg!(id, c, l) * pr!(id, k - l)).scale(2.0);
                            }
                            acc.checked_div(&pr!(id, 0).scale(2.0))?
                        }
                    };
                    tg!(id, c, k) = t;
                }
            }
        }

        // phi[k+1] = f(phi)[k] / (k+1), and the same for the tangents.
        let mut next = IVector::zeros(n);
        for j in 0..n {
            next[j] = pr!(outputs[j], k).div_nat(k as u32 + 1);
        }
        phi.push(next);
        if variational {
            let mut m = IMatrix::zeros(n, n);
            for j in 0..n {
                for c in 0..n {
                    m[(j, c)] = tg!(outputs[j], c, k).div_nat(k as u32 + 1);
                }
            }
            psi.push(m);
        }
    }

    Ok(Jet { phi, psi: if variational { Some(psi) } else { None } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorfield::systems;

    fn close(i: Interval, v: f64, tol: f64) -> bool {
        i.contains(v) && i.diam() <= tol
    }

    #[test]
    fn exponential_series() {
        let f = VectorField::from_text("x' = x").unwrap();
        let jet = c0_jet(&f, &IVector::from_points(&[1.0]), 3).unwrap();
        assert!(close(jet.phi[0][0], 1.0, 0.0));
        assert!(close(jet.phi[1][0], 1.0, 0.0));
        assert!(close(jet.phi[2][0], 0.5, 0.0));
        assert!(close(jet.phi[3][0], 1.0 / 6.0, 1e-16));
    }

    #[test]
    fn geometric_series_for_square_field() {
        // x' = x^2 from 1 solves to 1/(1-t): all coefficients are 1.
        let f = VectorField::from_text("x' = x^2").unwrap();
        let jet = c0_jet(&f, &IVector::from_points(&[1.0]), 3).unwrap();
        for i in 0..=3 {
            assert!(close(jet.phi[i][0], 1.0, 1e-15), "phi[{i}] = {:?}", jet.phi[i][0]);
        }
    }

    #[test]
    fn first_coefficient_is_the_field() {
        let f = systems::by_name("lorenz").unwrap();
        let x = IVector::from_entries(vec![
            Interval::new(1.0, 1.1),
            Interval::new(-0.5, 0.5),
            Interval::new(20.0, 21.0),
        ]);
        let jet = c0_jet(&f, &x, 2).unwrap();
        let fx = f.eval(&x).unwrap();
        for i in 0..3 {
            assert!(jet.phi[1][i].subset_of(&fx[i]) && fx[i].subset_of(&jet.phi[1][i]));
        }
    }

    #[test]
    fn variational_scalar_linear() {
        // x' = 2x: psi coefficients are 2^i / i! = (1, 2, 2).
        let f = VectorField::from_text("params: lam = 2\nx' = lam*x").unwrap();
        let jet = c1_jet(&f, &IVector::from_points(&[1.0]), 2).unwrap();
        let psi = jet.psi.as_ref().unwrap();
        assert!(close(psi[0][(0, 0)], 1.0, 0.0));
        assert!(close(psi[1][(0, 0)], 2.0, 0.0));
        assert!(close(psi[2][(0, 0)], 2.0, 0.0));
    }

    #[test]
    fn variational_identity_seed() {
        let f = systems::by_name("rossler").unwrap();
        let jet = c1_jet(&f, &IVector::from_points(&[0.0, -6.0, 0.03]), 3).unwrap();
        let psi = jet.psi.as_ref().unwrap();
        assert!(psi[0].contains_matrix(&IMatrix::identity(3)));
        assert!(psi[0].diam() == 0.0);
    }

    #[test]
    fn variational_nilpotent_linear_field() {
        // x' = y, y' = 0: A = [[0,1],[0,0]], psi[1] = A, psi[2] = A^2/2 = 0.
        let f = VectorField::from_text("x' = y\ny' = 0*x").unwrap();
        let jet = c1_jet(&f, &IVector::from_points(&[0.3, -0.7]), 2).unwrap();
        let psi = jet.psi.as_ref().unwrap();
        assert!(close(psi[1][(0, 1)], 1.0, 0.0));
        assert!(close(psi[1][(0, 0)], 0.0, 0.0));
        assert!(close(psi[1][(1, 0)], 0.0, 0.0));
        assert!(close(psi[1][(1, 1)], 0.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(psi[2][(i, j)], 0.0, 0.0));
            }
        }
    }

    #[test]
    fn truncated_series_tracks_reference_flow() {
        // Compare sum phi[i] h^i against a fine RK4 reference for Lorenz.
        let f = systems::by_name("lorenz").unwrap();
        let p = [-2.0, 2.5, 21.0];
        let jet = c0_jet(&f, &IVector::from_points(&p), 12).unwrap();
        let h = 0.01;
        let series = jet.eval_phi(&Interval::point(h), 12);

        let mut y = p;
        let steps = 200;
        let dt = h / steps as f64;
        let eval = |y: &[f64; 3]| -> [f64; 3] {
            let v = f.eval(&IVector::from_points(y)).unwrap();
            [v[0].mid(), v[1].mid(), v[2].mid()]
        };
        for _ in 0..steps {
            let k1 = eval(&y);
            let y2 = [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1], y[2] + 0.5 * dt * k1[2]];
            let k2 = eval(&y2);
            let y3 = [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1], y[2] + 0.5 * dt * k2[2]];
            let k3 = eval(&y3);
            let y4 = [y[0] + dt * k3[0], y[1] + dt * k3[1], y[2] + dt * k3[2]];
            let k4 = eval(&y4);
            for i in 0..3 {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        for i in 0..3 {
            assert!(
                series[i].inflate(1e-9).contains(y[i]),
                "component {i}: series {:?} vs reference {}",
                series[i],
                y[i]
            );
        }
    }

    #[test]
    fn jets_are_inclusion_monotone() {
        let f = systems::by_name("rossler").unwrap();
        let inner = IVector::from_entries(vec![
            Interval::new(-0.01, 0.01),
            Interval::new(-6.01, -5.99),
            Interval::new(0.029, 0.031),
        ]);
        let outer = IVector::from_entries(vec![
            Interval::new(-0.02, 0.02),
            Interval::new(-6.02, -5.98),
            Interval::new(0.028, 0.032),
        ]);
        let ji = c1_jet(&f, &inner, 6).unwrap();
        let jo = c1_jet(&f, &outer, 6).unwrap();
        for i in 0..=6 {
            assert!(ji.phi[i].subset_of(&jo.phi[i]), "phi[{i}] not monotone");
            assert!(
                ji.psi.as_ref().unwrap()[i].subset_of(&jo.psi.as_ref().unwrap()[i]),
                "psi[{i}] not monotone"
            );
        }
    }
}
