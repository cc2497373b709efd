//! Polynomial/rational autonomous vector fields as expression DAGs, their
//! evaluation over boxes, and forward-mode derivatives.
//!
//! Fields are built either from the plain-text grammar in [`parse`] or
//! programmatically through [`FieldBuilder`]. Construction hash-conses
//! subexpressions and folds constants, so repeated terms (the distance
//! denominators of the three-body field, say) are evaluated once. Integer
//! powers are lowered to multiplication chains at build time; the evaluators
//! only ever see `+ - * / sqrt`.

pub mod jet;
mod parse;
pub mod systems;

use crate::error::Error;
use crate::interval::{IMatrix, IVector, Interval};
use std::collections::HashMap;

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Interval),
    Param(usize),
    Var(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Neg(NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Sqrt(NodeId),
}

#[derive(Clone, Hash, PartialEq, Eq)]
enum NodeKey {
    Const(u64, u64),
    Param(usize),
    Var(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Neg(NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Sqrt(NodeId),
}

/// Incremental builder for a [`VectorField`] DAG.
#[derive(Default)]
pub struct FieldBuilder {
    nodes: Vec<Node>,
    memo: HashMap<NodeKey, NodeId>,
    params: Vec<(String, Interval)>,
    var_names: Vec<String>,
}

impl FieldBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, key: NodeKey, node: Node) -> NodeId {
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.memo.insert(key, id);
        id
    }

    fn const_of(&self, id: NodeId) -> Option<Interval> {
        match self.nodes[id] {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn constant(&mut self, c: Interval) -> NodeId {
        let key = NodeKey::Const(c.lo().to_bits(), c.hi().to_bits());
        self.intern(key, Node::Const(c))
    }

    /// Register (or look up) a named state variable; its index is the order
    /// of first registration.
    pub fn variable(&mut self, name: &str) -> NodeId {
        let idx = match self.var_names.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                self.var_names.push(name.to_string());
                self.var_names.len() - 1
            }
        };
        self.intern(NodeKey::Var(idx), Node::Var(idx))
    }

    /// Register (or look up) a named parameter with a default value.
    pub fn parameter(&mut self, name: &str, default: Interval) -> NodeId {
        let idx = match self.params.iter().position(|(n, _)| n == name) {
            Some(i) => i,
            None => {
                self.params.push((name.to_string(), default));
                self.params.len() - 1
            }
        };
        self.intern(NodeKey::Param(idx), Node::Param(idx))
    }

    pub fn has_param(&self, name: &str) -> bool {
        self.params.iter().any(|(n, _)| n == name)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if let (Some(x), Some(y)) = (self.const_of(a), self.const_of(b)) {
            return self.constant(x + y);
        }
        let (a, b) = (a.min(b), a.max(b));
        self.intern(NodeKey::Add(a, b), Node::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if let (Some(x), Some(y)) = (self.const_of(a), self.const_of(b)) {
            return self.constant(x - y);
        }
        self.intern(NodeKey::Sub(a, b), Node::Sub(a, b))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        if let Some(x) = self.const_of(a) {
            return self.constant(-x);
        }
        self.intern(NodeKey::Neg(a), Node::Neg(a))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if let (Some(x), Some(y)) = (self.const_of(a), self.const_of(b)) {
            return self.constant(x * y);
        }
        let (a, b) = (a.min(b), a.max(b));
        self.intern(NodeKey::Mul(a, b), Node::Mul(a, b))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, Error> {
        if let (Some(x), Some(y)) = (self.const_of(a), self.const_of(b)) {
            return Ok(self.constant(x.checked_div(&y)?));
        }
        Ok(self.intern(NodeKey::Div(a, b), Node::Div(a, b)))
    }

    pub fn sqrt(&mut self, a: NodeId) -> Result<NodeId, Error> {
        if let Some(x) = self.const_of(a) {
            return Ok(self.constant(x.sqrt()?));
        }
        Ok(self.intern(NodeKey::Sqrt(a), Node::Sqrt(a)))
    }

    /// Integer power, lowered to a multiplication chain (binary
    /// exponentiation). Negative exponents become a reciprocal.
    pub fn powi(&mut self, a: NodeId, k: i32) -> Result<NodeId, Error> {
        if k == 0 {
            return Ok(self.constant(Interval::ONE));
        }
        if k < 0 {
            let p = self.powi(a, -k)?;
            let one = self.constant(Interval::ONE);
            return self.div(one, p);
        }
        let mut k = k as u32;
        let mut base = a;
        let mut acc: Option<NodeId> = None;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base,
                    Some(r) => self.mul(r, base),
                });
            }
            k >>= 1;
            if k == 0 {
                return Ok(acc.expect("k >= 1"));
            }
            base = self.mul(base, base);
        }
    }

    /// Finish the build; `outputs[i]` is the right-hand side of the i-th
    /// state equation.
    pub fn finish(self, outputs: Vec<NodeId>) -> VectorField {
        assert_eq!(outputs.len(), self.var_names.len(), "one equation per state variable");
        VectorField {
            nodes: self.nodes,
            outputs,
            params: self.params,
            var_names: self.var_names,
        }
    }
}

/// An autonomous vector field `f: R^n -> R^n` with named parameters.
#[derive(Clone, Debug)]
pub struct VectorField {
    nodes: Vec<Node>,
    outputs: Vec<NodeId>,
    params: Vec<(String, Interval)>,
    var_names: Vec<String>,
}

impl VectorField {
    /// Parse a field from the plain-text grammar (see [`parse`]).
    pub fn from_text(src: &str) -> Result<VectorField, Error> {
        parse::parse_field(src)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn params(&self) -> &[(String, Interval)] {
        &self.params
    }

    pub fn param_value(&self, name: &str) -> Option<Interval> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn set_param(&mut self, name: &str, value: Interval) -> Result<(), Error> {
        match self.params.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::Config(format!("unknown parameter {name:?}"))),
        }
    }

    pub(crate) fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub(crate) fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub(crate) fn param_values(&self) -> Vec<Interval> {
        self.params.iter().map(|(_, v)| *v).collect()
    }

    /// Enclosure of `{f(x) : x in [x]}`.
    pub fn eval(&self, x: &IVector) -> Result<IVector, Error> {
        assert_eq!(x.len(), self.dim());
        let params = self.param_values();
        let mut vals: Vec<Interval> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Const(c) => c,
                Node::Param(p) => params[p],
                Node::Var(i) => x[i],
                Node::Add(a, b) => vals[a] + vals[b],
                Node::Sub(a, b) => vals[a] - vals[b],
                Node::Neg(a) => -vals[a],
                // a self-product is a square: keep the sign information
                Node::Mul(a, b) if a == b => vals[a].powi(2)?,
                Node::Mul(a, b) => vals[a] * vals[b],
                Node::Div(a, b) => vals[a].checked_div(&vals[b])?,
                Node::Sqrt(a) => vals[a].sqrt()?,
            };
            vals.push(v);
        }
        Ok(IVector::from_entries(self.outputs.iter().map(|&o| vals[o]).collect()))
    }

    /// Plain binary64 evaluation at a point (midpoints of parameters), for
    /// nonvalidated reference computations. Domain violations yield NaN.
    pub fn eval_mid(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        let mut vals: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Const(c) => c.mid(),
                Node::Param(p) => self.params[p].1.mid(),
                Node::Var(i) => x[i],
                Node::Add(a, b) => vals[a] + vals[b],
                Node::Sub(a, b) => vals[a] - vals[b],
                Node::Neg(a) => -vals[a],
                Node::Mul(a, b) => vals[a] * vals[b],
                Node::Div(a, b) => vals[a] / vals[b],
                Node::Sqrt(a) => vals[a].sqrt(),
            };
            vals.push(v);
        }
        self.outputs.iter().map(|&o| vals[o]).collect()
    }

    /// Enclosure of the Jacobian `Df` over the box, by forward-mode tangents
    /// seeded with the identity.
    pub fn jacobian(&self, x: &IVector) -> Result<IMatrix, Error> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let params = self.param_values();
        let mut vals: Vec<Interval> = Vec::with_capacity(self.nodes.len());
        let mut tans: Vec<Vec<Interval>> = Vec::with_capacity(self.nodes.len());
        let zero_tan = vec![Interval::ZERO; n];
        for node in &self.nodes {
            let (v, t) = match *node {
                Node::Const(c) => (c, zero_tan.clone()),
                Node::Param(p) => (params[p], zero_tan.clone()),
                Node::Var(i) => {
                    let mut t = zero_tan.clone();
                    t[i] = Interval::ONE;
                    (x[i], t)
                }
                Node::Add(a, b) => (
                    vals[a] + vals[b],
                    (0..n).map(|c| tans[a][c] + tans[b][c]).collect(),
                ),
                Node::Sub(a, b) => (
                    vals[a] - vals[b],
                    (0..n).map(|c| tans[a][c] - tans[b][c]).collect(),
                ),
                Node::Neg(a) => (-vals[a], (0..n).map(|c| -tans[a][c]).collect()),
                Node::Mul(a, b) if a == b => (
                    vals[a].powi(2)?,
                    (0..n).map(|c| (vals[a] * tans[a][c]).scale(2.0)).collect(),
                ),
                Node::Mul(a, b) => (
                    vals[a] * vals[b],
                    (0..n)
                        .map(|c| tans[a][c] * vals[b] + vals[a] * tans[b][c])
                        .collect(),
                ),
                Node::Div(a, b) => {
                    let w = vals[a].checked_div(&vals[b])?;
                    let t = (0..n)
                        .map(|c| (tans[a][c] - w * tans[b][c]).checked_div(&vals[b]))
                        .collect::<Result<Vec<_>, _>>()?;
                    (w, t)
                }
                Node::Sqrt(a) => {
                    let s = vals[a].sqrt()?;
                    let two_s = s.scale(2.0);
                    let t = (0..n)
                        .map(|c| tans[a][c].checked_div(&two_s))
                        .collect::<Result<Vec<_>, _>>()?;
                    (s, t)
                }
            };
            vals.push(v);
            tans.push(t);
        }
        let mut jac = IMatrix::zeros(n, n);
        for (i, &o) in self.outputs.iter().enumerate() {
            for c in 0..n {
                jac[(i, c)] = tans[o][c];
            }
        }
        Ok(jac)
    }

    /// Enclosure of `trace(Df)` over the box.
    pub fn divergence(&self, x: &IVector) -> Result<Interval, Error> {
        let jac = self.jacobian(x)?;
        let mut acc = Interval::ZERO;
        for i in 0..self.dim() {
            acc = acc + jac[(i, i)];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorfield::systems;

    #[test]
    fn lorenz_equilibrium_and_point() {
        let f = systems::by_name("lorenz").unwrap();
        let zero = IVector::from_points(&[0.0, 0.0, 0.0]);
        let v = f.eval(&zero).unwrap();
        for i in 0..3 {
            assert_eq!(v[i], Interval::point(0.0));
        }

        let one = IVector::from_points(&[1.0, 1.0, 1.0]);
        let v = f.eval(&one).unwrap();
        assert!(v[0].contains(0.0) && v[0].diam() < 1e-15);
        assert!(v[1].contains(26.0) && v[1].diam() < 1e-13);
        assert!(v[2].contains(1.0 - 8.0 / 3.0) && v[2].diam() < 1e-15);
    }

    #[test]
    fn rossler_at_origin() {
        let f = systems::by_name("rossler").unwrap();
        let v = f.eval(&IVector::from_points(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v[0], Interval::point(0.0));
        assert_eq!(v[1], Interval::point(0.0));
        assert!(v[2].contains(0.2) && v[2].diam() < 1e-16);
    }

    #[test]
    fn divergence_of_lorenz_is_constant() {
        let f = systems::by_name("lorenz").unwrap();
        let x = IVector::from_entries(vec![
            Interval::new(-3.0, 5.0),
            Interval::new(-1.0, 8.0),
            Interval::new(10.0, 30.0),
        ]);
        let d = f.divergence(&x).unwrap();
        let truth = -10.0 - 1.0 - 8.0 / 3.0;
        assert!(d.contains(truth));
        assert!(d.diam() < 1e-13);
    }

    #[test]
    fn divergence_of_henon_heiles_is_zero() {
        let f = systems::by_name("henon_heiles").unwrap();
        let x = IVector::from_entries(vec![
            Interval::new(-0.3, 0.3),
            Interval::new(-0.3, 0.3),
            Interval::new(-0.5, 0.5),
            Interval::new(-0.5, 0.5),
        ]);
        let d = f.divergence(&x).unwrap();
        assert_eq!(d, Interval::ZERO);
    }

    #[test]
    fn divergence_of_square_field() {
        let f = VectorField::from_text("x' = x^2").unwrap();
        let d = f
            .divergence(&IVector::from_entries(vec![Interval::new(1.0, 2.0)]))
            .unwrap();
        assert!(d.contains_interval(&Interval::new(2.0, 4.0)));
        assert!(d.diam() < 2.0 + 1e-12);
    }

    #[test]
    fn jacobian_contains_finite_differences() {
        let f = systems::by_name("rossler").unwrap();
        let p = [1.3, -4.2, 0.02];
        let x = IVector::from_points(&p);
        let jac = f.jacobian(&x).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[c] += h;
            pm[c] -= h;
            let fp = f.eval(&IVector::from_points(&pp)).unwrap();
            let fm = f.eval(&IVector::from_points(&pm)).unwrap();
            for i in 0..3 {
                let fd = (fp[i].mid() - fm[i].mid()) / (2.0 * h);
                assert!(
                    jac[(i, c)].inflate(1e-5).contains(fd),
                    "jac[{i}][{c}] = {:?} vs fd {fd}",
                    jac[(i, c)]
                );
            }
        }
    }

    #[test]
    fn param_override() {
        let mut f = systems::by_name("rossler").unwrap();
        f.set_param("b", Interval::point(0.5)).unwrap();
        let v = f.eval(&IVector::from_points(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v[2], Interval::point(0.5));
        assert!(f.set_param("nope", Interval::ONE).is_err());
    }
}
