//! Rigorous Poincaré sections: first-return detection along a validated
//! trajectory, interval-Newton refinement of the return time, and the
//! derivative of the return map from variational enclosures.
//!
//! A crossing is only accepted when the flow direction is sign-definite on
//! every rough enclosure touching the section, which certifies that the
//! detected return really is the first one. The section image keeps its
//! doubleton structure: the crossing map is transported in mean-value form
//! with the derivative `(Id - f e_j^T / f_j) Dphi`, so section-to-section
//! iteration does not re-wrap the set in an axis-aligned box.

use crate::error::Error;
use crate::interval::{IMatrix, IVector, Interval};
use crate::setrep::{Doubleton, MatrixDoubleton};
use crate::stepper::{Solver, SolverConfig, StepResult};
use crate::vectorfield::jet::c1_jet;
use crate::vectorfield::VectorField;

/// The affine section `x_j = level`, crossed with `direction * f_j > 0`.
#[derive(Clone, Copy, Debug)]
pub struct Section {
    pub coord: usize,
    pub level: f64,
    /// +1.0 or -1.0
    pub direction: f64,
}

impl Section {
    pub fn new(coord: usize, level: f64, direction: f64) -> Section {
        assert!(direction == 1.0 || direction == -1.0);
        Section { coord, level, direction }
    }

    fn offset(&self, v: &IVector) -> Interval {
        v[self.coord] - Interval::point(self.level)
    }
}

#[derive(Clone, Debug)]
pub struct PoincareConfig {
    /// Give up if no return is found before this flow time.
    pub max_time: f64,
    /// Interval-Newton iterations for the return time.
    pub newton_iters: usize,
    /// Stop refining once width([tau]) < h * this factor.
    pub time_tol_factor: f64,
    /// Retries (with a longer trial step) when a crossing straddles the
    /// step boundary.
    pub isolation_retries: usize,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            max_time: 50.0,
            newton_iters: 3,
            time_tol_factor: 1e-6,
            isolation_retries: 5,
        }
    }
}

/// A step bracketing the first return, together with the state it started
/// from.
pub struct Bracket {
    /// Time at the beginning of the bracketing step.
    pub t_start: Interval,
    /// Doubleton state at the beginning of the bracketing step.
    pub state: Doubleton,
    /// Accumulated variational representation at that moment (when tracked).
    pub vstate: Option<MatrixDoubleton>,
    /// The accepted step whose enclosure contains the crossing.
    pub step: StepResult,
    /// Steps taken from the start of the search, bracketing step included.
    pub steps: usize,
}

/// Rigorous image of one section return.
pub struct CrossingResult {
    /// Enclosure of the return time (absolute, from the search start).
    pub time: Interval,
    /// Image set on the section, in doubleton form (the section coordinate
    /// carries only roundoff width).
    pub image: Doubleton,
    /// Hull of `image` projected onto the section coordinates.
    pub section_image: IVector,
    /// Full-space derivative of the crossing map (row/column of the section
    /// coordinate included), when the variational flow was tracked.
    pub dp_full: Option<IMatrix>,
    /// Derivative restricted to the section coordinates.
    pub dp_section: Option<IMatrix>,
    /// Structured representation of the derivative after the crossing
    /// correction; seeding the next return with it composes map derivatives
    /// without an intermediate hull.
    pub variational: Option<MatrixDoubleton>,
    /// Steps used for this return.
    pub steps: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    Leaving,
    Above,
    Below,
}

/// Advance the solver until a step's rough enclosure brackets the first
/// return to the section, certifying on the way that no earlier
/// right-direction crossing can exist.
///
/// When the start set touches the section (the usual case for chained
/// returns, where the previous image carries roundoff width across the
/// plane), the certified claim is about the members lying exactly on the
/// section: those leave with strictly positive drift and cannot return
/// within the departure step.
pub fn detect_crossing(
    solver: &mut Solver,
    sec: &Section,
    cfg: &PoincareConfig,
) -> Result<Bracket, Error> {
    let t0 = solver.t;
    let start = sec.offset(&solver.x_hull()).scale(sec.direction);
    let mut phase = if start.hi() < 0.0 { Phase::Below } else { Phase::Leaving };
    loop {
        if (solver.t - t0).lo() > cfg.max_time {
            return Err(Error::NoCrossing { t_max: cfg.max_time });
        }
        let before_state = solver.state.clone();
        let before_vstate = solver.vstate.clone();
        let before_t = solver.t;
        let before_steps = solver.steps;
        let before_fallbacks = solver.fallbacks;

        let mut step = solver.advance()?;
        let mut attempts = 0;
        loop {
            let st = sec.offset(&step.enclosure.ytilde);
            if !st.contains(0.0) {
                break; // section untouched during this step
            }
            let fj = solver
                .field
                .eval(&step.enclosure.ytilde)?[sec.coord]
                .scale(sec.direction);
            if fj.hi() < 0.0 {
                break; // transversal wrong-direction passage only
            }

            let retry = |step: &StepResult, h_retry: f64, attempts: &mut usize, solver: &mut Solver|
             -> Result<Option<StepResult>, Error> {
                *attempts += 1;
                if *attempts > cfg.isolation_retries {
                    return Ok(None);
                }
                let _ = step;
                solver.state = before_state.clone();
                solver.vstate = before_vstate.clone();
                solver.t = before_t;
                solver.steps = before_steps;
                solver.fallbacks = before_fallbacks;
                solver.advance_with(h_retry).map(Some)
            };

            if !(fj.lo() > 0.0) {
                // a long step tube can smear across the section where the
                // drift changes sign; a shorter tube usually separates the
                // two, so only persistent ambiguity is a true tangency
                match retry(&step, step.h * 0.35, &mut attempts, solver)? {
                    Some(s) => {
                        step = s;
                        continue;
                    }
                    None => return Err(Error::Tangency),
                }
            }

            // right-direction flow through the section inside this step
            match phase {
                Phase::Below => {
                    let end = sec.offset(&solver.x_hull()).scale(sec.direction);
                    if end.lo() > 0.0 {
                        return Ok(Bracket {
                            t_start: before_t,
                            state: before_state,
                            vstate: before_vstate,
                            step,
                            steps: solver.steps,
                        });
                    }
                    // the crossing straddles the step end: retry with a
                    // longer trial step so it fits into one enclosure
                    match retry(&step, step.h * 1.7, &mut attempts, solver)? {
                        Some(s) => step = s,
                        None => return Err(Error::CrossingNotIsolated),
                    }
                }
                // departing the section with strictly positive drift (the
                // on-section members move strictly up all step long), or
                // approaching from strictly above: no return inside
                Phase::Leaving | Phase::Above => break,
            }
        }

        let end = sec.offset(&solver.x_hull()).scale(sec.direction);
        if end.lo() > 0.0 {
            if phase != Phase::Below {
                phase = Phase::Above;
            } else {
                // crossed without the enclosure flag: cannot happen, the
                // enclosure contains both endpoints
                return Err(Error::Tangency);
            }
        } else if end.hi() < 0.0 {
            phase = Phase::Below;
        }
    }
}

/// Evaluate the flow polynomial of a step at (interval) time offset `t`.
fn flow_at(step: &StepResult, t: &Interval) -> IVector {
    let m = step.jet_x.order() - 1;
    let poly = step.jet_x.eval_phi(t, m);
    let rem = step.jet_y.phi[m + 1].scale(&t.powi(m as i32 + 1).expect("positive power"));
    &poly + &rem
}

/// Same, from the anchor point of the step (a member of the step's set).
fn flow_at_anchor(step: &StepResult, t: &Interval) -> IVector {
    let m = step.jet_x.order() - 1;
    let poly = step.predictor.jet_anchor.eval_phi(t, m);
    let rem = step.jet_y.phi[m + 1].scale(&t.powi(m as i32 + 1).expect("positive power"));
    &poly + &rem
}

/// Variational flow enclosure of a step at (interval) time offset `t`.
/// Needs the step's variational enclosure `[V~]`; computes it on demand when
/// the solver ran without variational tracking.
fn variational_at(f: &VectorField, step: &StepResult, t: &Interval) -> Result<IMatrix, Error> {
    let m = step.jet_x.order() - 1;
    let poly = step.jet_x.eval_psi(t, m);
    let tpow = t.powi(m as i32 + 1).expect("positive power");
    let rem = match (&step.enclosure.vtilde, &step.jet_y.psi) {
        (Some(vtilde), Some(psi_y)) => (&psi_y[m + 1] * vtilde).scale(&tpow),
        _ => {
            // patch: validate a variational enclosure for this single step
            let jet_y = c1_jet(f, &step.enclosure.ytilde, m + 1)?;
            let psi_rem = &jet_y.psi.as_ref().expect("variational jet")[m + 1];
            let h = step.h;
            let zh = Interval::new(0.0, h).powi(m as i32 + 1).expect("positive power");
            let w = step.jet_x.eval_psi(&Interval::new(0.0, h), m);
            let mut big_e = (&psi_rem.scale(&zh) * &w)
                .sym_hull()
                .scale(&Interval::point(2.2));
            let mut vtilde = None;
            for _ in 0..6 {
                let cand = &w + &big_e;
                let rem = (psi_rem * &cand).scale(&zh);
                if rem.subset_of(&big_e) {
                    vtilde = Some(cand);
                    break;
                }
                big_e = big_e.hull(&rem.sym_hull().scale(&Interval::point(2.2)));
            }
            let vtilde = vtilde.ok_or(Error::EnclosureFailure { min_step: h })?;
            (psi_rem * &vtilde).scale(&tpow)
        }
    };
    Ok(&poly + &rem)
}

/// The tangential correction `Id - f(y*) e_j^T / f_j(y*)`, with the section
/// row set to exactly zero (the image's section coordinate is constant).
pub fn crossing_correction(
    f: &VectorField,
    y_section: &IVector,
    sec: &Section,
) -> Result<IMatrix, Error> {
    let n = f.dim();
    let fvec = f.eval(y_section)?;
    let fj = fvec[sec.coord];
    if fj.contains(0.0) {
        return Err(Error::Tangency);
    }
    let mut k = IMatrix::identity(n);
    for i in 0..n {
        if i == sec.coord {
            for l in 0..n {
                k[(i, l)] = Interval::ZERO;
            }
        } else {
            k[(i, sec.coord)] = -(fvec[i].checked_div(&fj)?);
        }
    }
    Ok(k)
}

/// Refine a bracketed crossing into a rigorous section image (and map
/// derivative, when the bracket carries variational data).
pub fn cross(
    f: &VectorField,
    bracket: &Bracket,
    sec: &Section,
    cfg: &PoincareConfig,
    want_derivative: bool,
) -> Result<CrossingResult, Error> {
    let step = &bracket.step;
    let h = step.h;

    // interval Newton for the return-time offset within [0, h]
    let mut tau = Interval::new(0.0, h);
    let slope = f.eval(&step.enclosure.ytilde)?[sec.coord];
    if slope.contains(0.0) {
        return Err(Error::Tangency);
    }
    for _ in 0..cfg.newton_iters {
        let mid = Interval::point(tau.mid());
        let val = sec.offset(&flow_at(step, &mid));
        tau = (mid - val.checked_div(&slope)?).intersect(&tau)?;
        if tau.diam() < h * cfg.time_tol_factor {
            break;
        }
    }

    // the anchor's own crossing pins the image's point part
    let mut tau_pt = tau;
    for _ in 0..cfg.newton_iters + 2 {
        let mid = Interval::point(tau_pt.mid());
        let val = sec.offset(&flow_at_anchor(step, &mid));
        tau_pt = (mid - val.checked_div(&slope)?).intersect(&tau_pt)?;
    }
    let mut anchor_image = flow_at_anchor(step, &tau_pt);
    anchor_image[sec.coord] = anchor_image[sec.coord]
        .intersect(&Interval::point(sec.level))
        .map_err(|_| Error::Tangency)?;

    // enclosure of all crossing points, clipped to the section plane
    let mut y_section = flow_at(step, &tau);
    y_section[sec.coord] = y_section[sec.coord]
        .intersect(&Interval::point(sec.level))
        .map_err(|_| Error::Tangency)?;

    // mean-value transport of the crossing map
    let dphi_local = variational_at(f, step, &tau)?;
    let correction = crossing_correction(f, &y_section, sec)?;
    let dg_local = &correction * &dphi_local;

    let shift = anchor_image.mid();
    let tail = &anchor_image - &shift.to_interval();
    let image = bracket.state.propagate(&dg_local, &shift, &tail)?;
    if !image.hull().is_finite() {
        return Err(Error::Overflow { context: "section image" });
    }

    let (dp_full, dp_section, variational) = if want_derivative {
        let md = bracket
            .vstate
            .as_ref()
            .ok_or_else(|| Error::Config("map derivative requires variational tracking".into()))?;
        let md = md.propagate(&dphi_local)?;
        let md = md.propagate(&correction)?;
        let full = md.hull();
        if !full.is_finite() {
            return Err(Error::Overflow { context: "return-map derivative" });
        }
        let section = full.minor(sec.coord, sec.coord);
        (Some(full), Some(section), Some(md))
    } else {
        (None, None, None)
    };

    let time = bracket.t_start + tau;
    let section_image = image.hull().drop_coord(sec.coord);
    Ok(CrossingResult {
        time,
        image,
        section_image,
        dp_full,
        dp_section,
        variational,
        steps: bracket.steps,
    })
}

/// One full first-return: detection plus refinement, starting from a
/// doubleton on (or near) the section.
pub fn first_return(
    f: &VectorField,
    solver_cfg: SolverConfig,
    start: Doubleton,
    sec: &Section,
    cfg: &PoincareConfig,
) -> Result<CrossingResult, Error> {
    first_return_seeded(f, solver_cfg, start, None, sec, cfg)
}

/// First return with the variational state seeded from a previous crossing,
/// so that consecutive return-map derivatives compose structurally instead
/// of through an intermediate interval product.
pub fn first_return_seeded(
    f: &VectorField,
    solver_cfg: SolverConfig,
    start: Doubleton,
    vseed: Option<MatrixDoubleton>,
    sec: &Section,
    cfg: &PoincareConfig,
) -> Result<CrossingResult, Error> {
    let want_derivative = solver_cfg.track_variational;
    let mut solver = Solver::from_doubleton(f, solver_cfg, start);
    if let Some(md) = vseed {
        assert!(solver.vstate.is_some(), "seeding requires variational tracking");
        solver.vstate = Some(md);
    }
    let bracket = detect_crossing(&mut solver, sec, cfg)?;
    cross(f, &bracket, sec, cfg, want_derivative)
}

/// Two successive first returns; the derivative of the composed map is the
/// interval product of the per-return section derivatives (chain rule, with
/// the second factor evaluated over the enclosure of the first image).
pub struct DoubleReturn {
    pub first: CrossingResult,
    pub second: CrossingResult,
    pub dp2_section: Option<IMatrix>,
}

pub fn double_return(
    f: &VectorField,
    solver_cfg: SolverConfig,
    start: Doubleton,
    sec: &Section,
    cfg: &PoincareConfig,
) -> Result<DoubleReturn, Error> {
    let first = first_return(f, solver_cfg.clone(), start, sec, cfg)?;
    let second = first_return(f, solver_cfg, first.image.clone(), sec, cfg)?;
    let dp2_section = match (&first.dp_section, &second.dp_section) {
        (Some(d1), Some(d2)) => Some(d2 * d1),
        _ => None,
    };
    Ok(DoubleReturn { first, second, dp2_section })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::{Algorithm, MethodOrder, StepMode};
    use crate::vectorfield::systems;
    use std::f64::consts::PI;

    fn cfg(m: usize, tol: f64) -> SolverConfig {
        let mut c = SolverConfig::new(
            MethodOrder::new(m),
            Algorithm::HermiteObreshkov,
            StepMode::Tolerance(tol),
        );
        c.max_step = 0.3;
        c
    }

    #[test]
    fn linear_drift_crossing() {
        // constant field (1, 0): section x = 1 reached at t = 1 from the origin
        let f = VectorField::from_text("x' = 1 + 0*x\ny' = 0*x").unwrap();
        let sec = Section::new(0, 1.0, 1.0);
        let start = Doubleton::from_box(&IVector::from_points(&[0.0, 0.0]));
        let mut c = cfg(4, 1e-10);
        c.track_variational = false;
        let r = first_return(&f, c, start, &sec, &PoincareConfig::default()).unwrap();
        assert!(r.time.contains(1.0), "time {:?}", r.time);
        assert!(r.time.diam() < 1e-9);
        assert!(r.section_image[0].contains(0.0));
        assert!(r.image.hull()[0].contains(1.0));
    }

    #[test]
    fn flow_box_derivative_is_identity() {
        let f = VectorField::from_text("x' = 1 + 0*x\ny' = 0*x").unwrap();
        let sec = Section::new(0, 1.0, 1.0);
        let bx = IVector::from_entries(vec![
            Interval::point(0.0),
            Interval::new(-0.1, 0.1),
        ]);
        let r = first_return(&f, cfg(4, 1e-10), Doubleton::from_box(&bx), &sec, &PoincareConfig::default())
            .unwrap();
        let dp = r.dp_section.as_ref().unwrap();
        assert!(dp[(0, 0)].contains(1.0));
        assert!(dp[(0, 0)].diam() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_return_times() {
        let f = VectorField::from_text("x' = y\ny' = -x").unwrap();
        let sec = Section::new(0, 0.0, 1.0);
        let pc = PoincareConfig::default();

        // from (1, 0): first upward crossing of x = 0 at t = 3 pi / 2
        let r = first_return(
            &f,
            cfg(10, 1e-12),
            Doubleton::from_box(&IVector::from_points(&[1.0, 0.0])),
            &sec,
            &pc,
        )
        .unwrap();
        assert!(r.time.contains(1.5 * PI), "time {:?}", r.time);
        assert!(r.section_image[0].contains(1.0));

        // from (0, 1) on the section: full period 2 pi
        let r = first_return(
            &f,
            cfg(10, 1e-12),
            Doubleton::from_box(&IVector::from_points(&[0.0, 1.0])),
            &sec,
            &pc,
        )
        .unwrap();
        assert!(r.time.contains(2.0 * PI), "time {:?}", r.time);
        assert!(r.section_image[0].contains(1.0));
        // the period map is the identity, so its section derivative is 1
        let dp = r.dp_section.as_ref().unwrap();
        assert!(dp[(0, 0)].contains(1.0), "dp {:?}", dp);
    }

    #[test]
    fn rossler_return_time_plausible() {
        let f = systems::by_name("rossler").unwrap();
        let sec = Section::new(0, 0.0, 1.0);
        let start = Doubleton::from_box(&IVector::from_points(&[0.0, -6.0, 0.03]));
        let mut c = cfg(12, 1e-10);
        c.track_variational = false;
        let r = first_return(&f, c, start, &sec, &PoincareConfig::default()).unwrap();
        assert!(r.time.lo() > 5.0 && r.time.hi() < 7.0, "time {:?}", r.time);
        // the image stays in the attractor region
        assert!(r.section_image[0].lo() > -12.0 && r.section_image[0].hi() < -2.0);
    }

    #[test]
    fn crossing_image_contains_sampled_trajectories() {
        let f = systems::by_name("rossler").unwrap();
        let sec = Section::new(0, 0.0, 1.0);
        let bx = IVector::from_entries(vec![
            Interval::point(0.0),
            Interval::new(-6.02, -5.98),
            Interval::new(0.029, 0.031),
        ]);
        let mut c = cfg(12, 1e-10);
        c.track_variational = false;
        let r = first_return(&f, c, Doubleton::from_box(&bx), &sec, &PoincareConfig::default())
            .unwrap();
        let hull = r.image.hull();

        // nonvalidated reference: RK4 until x crosses 0 upward, then bisect
        let eval = |y: &[f64; 3]| {
            let v = f.eval(&IVector::from_points(y)).unwrap();
            [v[0].mid(), v[1].mid(), v[2].mid()]
        };
        let rk4 = |y: &[f64; 3], dt: f64| {
            let k1 = eval(y);
            let y2 = [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1], y[2] + 0.5 * dt * k1[2]];
            let k2 = eval(&y2);
            let y3 = [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1], y[2] + 0.5 * dt * k2[2]];
            let k3 = eval(&y3);
            let y4 = [y[0] + dt * k3[0], y[1] + dt * k3[1], y[2] + dt * k3[2]];
            let k4 = eval(&y4);
            [
                y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                y[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            ]
        };
        for start in [[0.0, -6.02, 0.029], [0.0, -5.98, 0.031], [0.0, -6.0, 0.03]] {
            let dt = 1e-4;
            let mut y = start;
            let mut t = 0.0;
            // march until past the dip and the upward crossing
            let mut prev;
            loop {
                prev = y;
                y = rk4(&y, dt);
                t += dt;
                if t > 3.0 && prev[0] < 0.0 && y[0] >= 0.0 {
                    break;
                }
                assert!(t < 20.0, "reference never crossed");
            }
            // linear interpolation to the section
            let w = -prev[0] / (y[0] - prev[0]);
            let yc = [
                0.0,
                prev[1] + w * (y[1] - prev[1]),
                prev[2] + w * (y[2] - prev[2]),
            ];
            assert!(
                hull[1].inflate(1e-6).contains(yc[1]) && hull[2].inflate(1e-6).contains(yc[2]),
                "reference image {yc:?} outside hull {hull:?}"
            );
        }
    }

    #[test]
    fn composition_derivative_via_double_return() {
        // harmonic oscillator: P^2 = identity map on the section, DP^2 = 1
        let f = VectorField::from_text("x' = y\ny' = -x").unwrap();
        let sec = Section::new(0, 0.0, 1.0);
        let r = double_return(
            &f,
            cfg(10, 1e-12),
            Doubleton::from_box(&IVector::from_points(&[0.0, 1.0])),
            &sec,
            &PoincareConfig::default(),
        )
        .unwrap();
        let dp2 = r.dp2_section.as_ref().unwrap();
        assert!(dp2[(0, 0)].contains(1.0));
        assert!(r.second.time.contains(4.0 * PI) || r.second.time.contains(2.0 * PI));
    }

    #[test]
    fn no_crossing_reported() {
        // drift parallel to the section never crosses it
        let f = VectorField::from_text("x' = 0*x\ny' = 1 + 0*y").unwrap();
        let sec = Section::new(0, 1.0, 1.0);
        let start = Doubleton::from_box(&IVector::from_points(&[0.0, 0.0]));
        let mut pc = PoincareConfig::default();
        pc.max_time = 3.0;
        let mut c = cfg(4, 1e-8);
        c.track_variational = false;
        let r = first_return(&f, c, start, &sec, &pc);
        assert!(matches!(r, Err(Error::NoCrossing { .. })));
    }
}
