//! The one-step method: an interval Taylor predictor followed by an
//! implicit two-point (Hermite interpolation) corrector, plus the driving
//! [`Solver`] that owns the doubleton representations and advances a
//! trajectory step by step.
//!
//! The corrector solves the implicit relation
//! `Psi_{q,p}(-h, x_{k+1}, 0) = Psi_{p,q}(h, x_k, 0) + eps` for `x_{k+1}`
//! through a preconditioned (Krawczyk-form) linear evaluation, and its
//! output is intersected with the predictor's, so it can only tighten.
//! The same preconditioned matrices tighten the variational bound at the
//! cost of a few extra matrix products.

pub mod coeffs;

use crate::enclosure::{hoe_enclosure_from_jet, EnclosureConfig, HoeResult, RoughEnclosure};
use crate::error::Error;
use crate::interval::{pow_up_nonneg, IMatrix, IVector, Interval, PVector};
use crate::linalg::verified_inverse;
use crate::setrep::{Doubleton, MatrixDoubleton};
use crate::vectorfield::jet::{c0_jet, c1_jet, Jet};
use crate::vectorfield::VectorField;
use coeffs::{ho_coefficient_interval, ho_weights, predict_step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Predictor only (explicit interval Taylor with mean-value transport).
    Lohner,
    /// Predictor plus implicit corrector.
    HermiteObreshkov,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepMode {
    /// Step with a fixed trial h (still shortened if an enclosure demands it).
    Fixed(f64),
    /// Choose h from the per-step truncation tolerance.
    Tolerance(f64),
}

/// Method order `m` and its corrector split `p + q = m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodOrder {
    pub m: usize,
    pub p: usize,
    pub q: usize,
}

impl MethodOrder {
    /// Default split `p = ceil(m/2)`, `q = floor(m/2)`.
    pub fn new(m: usize) -> MethodOrder {
        assert!(m >= 2, "corrector needs p, q >= 1");
        MethodOrder { m, p: m.div_ceil(2), q: m / 2 }
    }

    pub fn with_split(m: usize, p: usize, q: usize) -> Result<MethodOrder, Error> {
        if p + q != m || p == 0 || q == 0 {
            return Err(Error::Config(format!(
                "invalid corrector split p={p}, q={q} for order m={m}"
            )));
        }
        Ok(MethodOrder { m, p, q })
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub order: MethodOrder,
    pub algorithm: Algorithm,
    pub step: StepMode,
    pub enclosure: EnclosureConfig,
    /// Track the variational matrix across steps.
    pub track_variational: bool,
    pub max_step: f64,
    /// Fold the doubleton junk term into the main part beyond this ratio.
    pub reorg_threshold: f64,
    /// In tolerance mode, additionally cap `h * ||Df||` by this value while
    /// the state set is wide: the truncation criterion alone does not see
    /// how fast a finite-width set is stretched within one step.
    pub growth_cap: f64,
    /// Set-width threshold activating the growth cap.
    pub growth_cap_width: f64,
}

impl SolverConfig {
    pub fn new(order: MethodOrder, algorithm: Algorithm, step: StepMode) -> SolverConfig {
        SolverConfig {
            order,
            algorithm,
            step,
            enclosure: EnclosureConfig::default(),
            track_variational: true,
            max_step: 0.5,
            reorg_threshold: 10.0,
            growth_cap: 0.35,
            growth_cap_width: 1e-3,
        }
    }
}

/// Output of the explicit predictor step.
#[derive(Clone, Debug)]
pub struct PredictorResult {
    /// Enclosure of the flow at time h.
    pub x_next0: IVector,
    /// Taylor remainder `[0,h]^{m+1} phi[m+1]([y~])`.
    pub r0: IVector,
    /// Enclosure of the one-step variational matrix (when tracked).
    pub v0: Option<IMatrix>,
    /// Variational remainder `[0,h]^{m+1} psi[m+1]([y~]) [V~]`.
    pub big_r0: Option<IMatrix>,
    /// The mean-value transfer `[A] = sum h^i psi[i]([x_k])`.
    pub transfer: IMatrix,
    /// Taylor series evaluated at the anchor point (near-point vector).
    pub y0: IVector,
    /// Jet of order m at the anchor point, reused by the corrector.
    pub jet_anchor: Jet,
}

/// Output of the implicit corrector step.
#[derive(Clone, Debug)]
pub struct CorrectorOutput {
    pub x_next: IVector,
    pub v: Option<IMatrix>,
    /// Preconditioned transfer for the state doubleton.
    pub transfer: IMatrix,
    /// New anchor point (midpoint of the predictor output).
    pub shift: PVector,
    /// Remainder term of the evaluation formula.
    pub tail: IVector,
}

/// One accepted step of the solver.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub h: f64,
    /// Time enclosure at the end of the step.
    pub t_end: Interval,
    /// Tight bound for the flow at t + h (corrector output when available).
    pub x_next: IVector,
    /// One-step variational enclosure used for composition (when tracked).
    pub v_step: Option<IMatrix>,
    pub enclosure: RoughEnclosure,
    pub predictor: PredictorResult,
    /// The corrector was skipped (disabled, singular midpoint or an empty
    /// roundoff intersection); predictor output was used instead.
    pub corrector_fallback: bool,
    /// Max width of the corrector remainder `[r]`, for diagnostics.
    pub corrector_r_width: Option<f64>,
    /// Jet at `[x_k]` (order m+1) used by this step.
    pub jet_x: Jet,
    /// Jet at `[y~]` (order m+1).
    pub jet_y: Jet,
    /// Anchor point of the mean-value forms.
    pub anchor: PVector,
}

fn zero_h_pow(h: f64, k: usize) -> Interval {
    Interval::new(0.0, pow_up_nonneg(h, k as u32))
}

/// Explicit predictor: Taylor evaluation in mean-value form over the rough
/// enclosure, producing the flow and variational bounds at time h.
pub fn predictor(
    f: &VectorField,
    x_k: &IVector,
    anchor: &PVector,
    hoe: &HoeResult,
    m: usize,
) -> Result<PredictorResult, Error> {
    let h = hoe.enc.h;
    let hp = Interval::point(h);
    let zh = zero_h_pow(h, m + 1);

    let transfer = hoe.jet_x.eval_psi(&hp, m);
    let jet_anchor = c0_jet(f, &anchor.to_interval(), m)?;
    let y0 = jet_anchor.eval_phi(&hp, m);
    let y_direct = hoe.jet_x.eval_phi(&hp, m);
    let r0 = hoe.jet_y.phi[m + 1].scale(&zh);

    let dx = x_k - &anchor.to_interval();
    let mean_value = &y0 + &(&transfer * &dx);
    let x_next0 = &mean_value.intersect(&y_direct)? + &r0;
    if !x_next0.is_finite() {
        return Err(Error::Overflow { context: "predictor output" });
    }

    let (v0, big_r0) = match (&hoe.enc.vtilde, &hoe.jet_y.psi) {
        (Some(vtilde), Some(psi_y)) => {
            let big_r0 = (&psi_y[m + 1] * vtilde).scale(&zh);
            let v0 = &transfer + &big_r0;
            if !v0.is_finite() {
                return Err(Error::Overflow { context: "predictor variational output" });
            }
            (Some(v0), Some(big_r0))
        }
        _ => (None, None),
    };

    Ok(PredictorResult { x_next0, r0, v0, big_r0, transfer, y0, jet_anchor })
}

/// Implicit corrector. `jet_x` is the variational jet at `[x_k]` already
/// computed for the predictor. Fails with `SingularMidpoint` or
/// `EmptyIntersection` only in degenerate situations; the caller then keeps
/// the (always valid) predictor output.
pub fn corrector(
    f: &VectorField,
    x_k: &IVector,
    anchor: &PVector,
    jet_x: &Jet,
    pred: &PredictorResult,
    order: &MethodOrder,
    h: f64,
) -> Result<CorrectorOutput, Error> {
    let n = f.dim();
    let (p, q) = (order.p as u32, order.q as u32);
    let w_pq = ho_weights(p, q);
    let w_qp = ho_weights(q, p);
    let sign = if order.q % 2 == 0 { 1.0 } else { -1.0 };
    let c_tail = ho_coefficient_interval(q, p, q).scale(sign);

    let x_hat_next = pred.x_next0.mid();
    let jet_next_point = c0_jet(f, &x_hat_next.to_interval(), order.q)?;
    let jet_next_box = c1_jet(f, &pred.x_next0, order.q)?;

    let psi_fwd = pred.jet_anchor.eval_phi_weighted(&Interval::point(h), &w_pq);
    let psi_bwd = jet_next_point.eval_phi_weighted(&Interval::point(-h), &w_qp);
    let delta = &psi_fwd - &psi_bwd;
    let eps = pred.r0.scale(&c_tail);

    let j_minus = jet_next_box.eval_psi_weighted(&Interval::point(-h), &w_qp);
    let j_plus = jet_x.eval_psi_weighted(&Interval::point(h), &w_pq);

    let j_minus_inv = verified_inverse(&j_minus.mid())?;
    let s_mat = &IMatrix::identity(n) - &(&j_minus_inv * &j_minus);

    let dx_next = &pred.x_next0 - &x_hat_next.to_interval();
    let tail = &(&j_minus_inv * &(&delta + &eps)) + &(&s_mat * &dx_next);

    let transfer = &j_minus_inv * &j_plus;
    let dx = x_k - &anchor.to_interval();
    let evaluated = &(&x_hat_next.to_interval() + &(&transfer * &dx)) + &tail;
    let x_next = evaluated.intersect(&pred.x_next0)?;
    if !x_next.is_finite() {
        return Err(Error::Overflow { context: "corrector output" });
    }

    let v = match (&pred.v0, &pred.big_r0) {
        (Some(v0), Some(big_r0)) => {
            let r_mat = &j_minus_inv * &(&j_plus + &big_r0.scale(&c_tail));
            let v = (&r_mat + &(&s_mat * v0)).intersect(v0)?;
            if !v.is_finite() {
                return Err(Error::Overflow { context: "corrector variational output" });
            }
            Some(v)
        }
        _ => None,
    };

    Ok(CorrectorOutput { x_next, v, transfer, shift: x_hat_next, tail })
}

/// A validated trajectory integrator owning doubleton state.
pub struct Solver<'f> {
    pub field: &'f VectorField,
    pub cfg: SolverConfig,
    pub state: Doubleton,
    pub vstate: Option<MatrixDoubleton>,
    pub t: Interval,
    pub steps: usize,
    /// Number of steps where the corrector fell back to the predictor.
    pub fallbacks: usize,
}

impl<'f> Solver<'f> {
    pub fn new(field: &'f VectorField, cfg: SolverConfig, x0: &IVector) -> Solver<'f> {
        Self::from_doubleton(field, cfg, Doubleton::from_box(x0))
    }

    pub fn from_doubleton(field: &'f VectorField, cfg: SolverConfig, state: Doubleton) -> Solver<'f> {
        let n = field.dim();
        assert_eq!(state.dim(), n);
        let vstate = if cfg.track_variational {
            Some(MatrixDoubleton::identity(n))
        } else {
            None
        };
        Solver { field, cfg, state, vstate, t: Interval::ZERO, steps: 0, fallbacks: 0 }
    }

    /// Current enclosure of the trajectory set.
    pub fn x_hull(&self) -> IVector {
        self.state.hull()
    }

    /// Current enclosure of the accumulated variational matrix.
    pub fn v_hull(&self) -> Option<IMatrix> {
        self.vstate.as_ref().map(|v| v.hull())
    }

    /// Perform one accepted step and update all representations.
    pub fn advance(&mut self) -> Result<StepResult, Error> {
        self.advance_inner(None).map_err(|e| e.at_step(self.steps))
    }

    /// Like [`advance`](Self::advance) with an explicit trial step,
    /// overriding the configured step mode.
    pub fn advance_with(&mut self, h_try: f64) -> Result<StepResult, Error> {
        self.advance_inner(Some(h_try)).map_err(|e| e.at_step(self.steps))
    }

    fn advance_inner(&mut self, h_override: Option<f64>) -> Result<StepResult, Error> {
        let f = self.field;
        let m = self.cfg.order.m;
        let x_box = self.x_hull();
        if !x_box.is_finite() {
            return Err(Error::Overflow { context: "state hull" });
        }

        let jet_x = c1_jet(f, &x_box, m + 1)?;
        let h_try = match (h_override, self.cfg.step) {
            (Some(h), _) => h,
            (None, StepMode::Fixed(h)) => h,
            (None, StepMode::Tolerance(tol)) => {
                let norm = jet_x.phi[m + 1].mag();
                let (h_lo, h_ho) = predict_step(
                    norm,
                    tol,
                    m as u32,
                    self.cfg.enclosure.min_step,
                    self.cfg.max_step,
                );
                let mut h = match self.cfg.algorithm {
                    Algorithm::Lohner => h_lo,
                    Algorithm::HermiteObreshkov => h_ho,
                };
                if x_box.diam() > self.cfg.growth_cap_width {
                    // psi[1] is exactly the Jacobian enclosure over the box
                    let jac_norm = jet_x.psi.as_ref().expect("variational jet")[1].mag();
                    if jac_norm > 0.0 {
                        h = h.min((self.cfg.growth_cap / jac_norm).max(self.cfg.enclosure.min_step));
                    }
                }
                h
            }
        };

        let hoe = hoe_enclosure_from_jet(
            f,
            jet_x,
            h_try,
            m,
            self.cfg.track_variational,
            &self.cfg.enclosure,
        )?;
        let h = hoe.enc.h;
        let anchor = self.state.x.clone();
        let pred = predictor(f, &x_box, &anchor, &hoe, m)?;

        let mut fallback = false;
        let mut r_width = None;
        let (x_next, v_step, transfer, shift, tail) = match self.cfg.algorithm {
            Algorithm::HermiteObreshkov => {
                match corrector(f, &x_box, &anchor, &hoe.jet_x, &pred, &self.cfg.order, h) {
                    Ok(c) => {
                        r_width = Some(c.tail.diam());
                        (c.x_next, c.v, c.transfer, c.shift, c.tail)
                    }
                    Err(Error::SingularMidpoint) | Err(Error::EmptyIntersection) => {
                        fallback = true;
                        predictor_paths(&pred)
                    }
                    Err(e) => return Err(e),
                }
            }
            Algorithm::Lohner => predictor_paths(&pred),
        };

        // transport the doubleton representations
        let new_state = self.state.propagate(&transfer, &shift, &tail)?;
        let new_vstate = match (&self.vstate, &v_step) {
            (Some(md), Some(v)) => Some(md.propagate(v)?),
            (Some(_), None) => {
                return Err(Error::Config("variational tracking without v_step".into()))
            }
            _ => None,
        };

        self.state = if new_state.needs_reorganization(self.cfg.reorg_threshold) {
            new_state.reorganize()?
        } else {
            new_state
        };
        self.vstate = match new_vstate {
            Some(md) if md.needs_reorganization(self.cfg.reorg_threshold) => {
                Some(md.reorganize()?)
            }
            other => other,
        };

        let t_end = self.t + Interval::point(h);
        self.t = t_end;
        self.steps += 1;
        if fallback {
            self.fallbacks += 1;
        }

        Ok(StepResult {
            h,
            t_end,
            x_next,
            v_step,
            enclosure: hoe.enc,
            predictor: pred,
            corrector_fallback: fallback,
            corrector_r_width: r_width,
            jet_x: hoe.jet_x,
            jet_y: hoe.jet_y,
            anchor,
        })
    }

    /// Advance until `t >= t_target` (upper bound of the time enclosure),
    /// calling `on_step` after every accepted step.
    pub fn run_until<F: FnMut(&Solver, &StepResult)>(
        &mut self,
        t_target: f64,
        mut on_step: F,
    ) -> Result<(), Error> {
        while self.t.hi() < t_target {
            let step = self.advance()?;
            on_step(self, &step);
        }
        Ok(())
    }
}

/// Doubleton transport data when only the predictor output is available.
fn predictor_paths(pred: &PredictorResult) -> (IVector, Option<IMatrix>, IMatrix, PVector, IVector) {
    let shift = pred.y0.mid();
    let tail = &(&pred.y0 - &shift.to_interval()) + &pred.r0;
    (
        pred.x_next0.clone(),
        pred.v0.clone(),
        pred.transfer.clone(),
        shift,
        tail,
    )
}
