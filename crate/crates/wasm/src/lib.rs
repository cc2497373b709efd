//! Browser bindings: three interactive views onto the validated integrator.
//!
//! * tightness curves: log10 of the variational-enclosure width over time
//!   for the explicit and the predictor-corrector method, on any built-in
//!   system at a chosen order and fixed step;
//! * trapping demo: the return-map images of the y-slabs of the candidate
//!   box, each rigorously enclosed, with per-piece verdicts;
//! * order models: the step-ratio function and per-step cost ratio.
//!
//! Everything returns plain numbers or JSON strings so the page needs no
//! glue beyond `wasm-bindgen`.

use rigode::interval::{IVector, Interval};
use rigode::poincare::{first_return, PoincareConfig};
use rigode::proofs::{rossler, uniform_slabs};
use rigode::setrep::Doubleton;
use rigode::stepper::{coeffs, Algorithm, MethodOrder, Solver, SolverConfig, StepMode};
use rigode::vectorfield::systems;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn solver_config(order: usize, algorithm: Algorithm, step: StepMode) -> SolverConfig {
    let mut cfg = SolverConfig::new(MethodOrder::new(order.max(2)), algorithm, step);
    cfg.max_step = 0.4;
    cfg
}

/// Flat `[t, s_lo, s_ho]` triples of the tightness comparison on a fixed
/// grid; empty on error (bad system name, enclosure failure).
#[wasm_bindgen]
pub fn benchmark_series(system: &str, order: usize, h: f64, t_end: f64) -> Vec<f64> {
    let Some(field) = systems::by_name(system) else {
        return Vec::new();
    };
    let Some(ic) = systems::default_ic(system) else {
        return Vec::new();
    };
    if !(h > 0.0) || !(t_end > 0.0) {
        return Vec::new();
    }
    let mut lo = Solver::new(
        &field,
        solver_config(order, Algorithm::Lohner, StepMode::Fixed(h)),
        &ic,
    );
    let mut ho = Solver::new(
        &field,
        solver_config(order, Algorithm::HermiteObreshkov, StepMode::Fixed(h)),
        &ic,
    );
    let mut out = Vec::new();
    while lo.t.hi() < t_end && out.len() < 30_000 {
        if lo.advance().is_err() || ho.advance().is_err() {
            break;
        }
        out.push(lo.t.mid());
        out.push(lo.v_hull().expect("tracked").diam().log10());
        out.push(ho.v_hull().expect("tracked").diam().log10());
    }
    out
}

#[derive(Serialize)]
struct PieceOut {
    y: [f64; 2],
    image_y: [f64; 2],
    image_z: [f64; 2],
    time: [f64; 2],
    inside: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct TrappingOut {
    b_y: [f64; 2],
    b_z: [f64; 2],
    verified: bool,
    pieces: Vec<PieceOut>,
}

/// Return-map images of `pieces` uniform y-slabs of the trapping candidate,
/// as a JSON object with per-piece verdicts.
#[wasm_bindgen]
pub fn trapping_demo(pieces: usize, order: usize, tol: f64) -> String {
    let field = systems::by_name("rossler").expect("built-in");
    let b = rossler::trapping_box();
    let sec = rossler::section();
    let mut cfg = solver_config(
        order,
        Algorithm::HermiteObreshkov,
        StepMode::Tolerance(if tol > 0.0 { tol } else { 1e-8 }),
    );
    cfg.track_variational = false;
    let pc = PoincareConfig::default();

    let mut out = TrappingOut {
        b_y: [b.y.lo(), b.y.hi()],
        b_z: [b.z.lo(), b.z.hi()],
        verified: true,
        pieces: Vec::new(),
    };
    for slab in uniform_slabs(&b.y, pieces.clamp(1, 400)) {
        let start = Doubleton::from_box(&IVector::from_entries(vec![
            Interval::point(sec.level),
            slab,
            b.z,
        ]));
        match first_return(&field, cfg.clone(), start, &sec, &pc) {
            Ok(r) => {
                let (y, z) = (r.section_image[0], r.section_image[1]);
                let inside = b.strictly_contains(&y, &z);
                out.verified &= inside;
                out.pieces.push(PieceOut {
                    y: [slab.lo(), slab.hi()],
                    image_y: [y.lo(), y.hi()],
                    image_z: [z.lo(), z.hi()],
                    time: [r.time.lo(), r.time.hi()],
                    inside,
                    error: None,
                });
            }
            Err(e) => {
                out.verified = false;
                out.pieces.push(PieceOut {
                    y: [slab.lo(), slab.hi()],
                    image_y: [f64::NAN, f64::NAN],
                    image_z: [f64::NAN, f64::NAN],
                    time: [f64::NAN, f64::NAN],
                    inside: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    serde_json::to_string(&out).expect("serializable")
}

/// Nonvalidated section-crossing scatter (y, z pairs) for the backdrop of
/// the trapping view.
#[wasm_bindgen]
pub fn attractor_scatter(points: usize) -> Vec<f64> {
    let field = systems::by_name("rossler").expect("built-in");
    let eval = |y: &[f64; 3]| {
        let v = field.eval(&IVector::from_points(y)).unwrap();
        [v[0].mid(), v[1].mid(), v[2].mid()]
    };
    let dt = 2e-3;
    let mut state = [0.0, -6.0, 0.03];
    // discard a transient to land on the attractor
    for _ in 0..5_000 {
        state = rk4(&eval, &state, dt);
    }
    let mut out = Vec::new();
    let mut prev = state;
    let mut guard = 0usize;
    while out.len() < 2 * points.min(5_000) && guard < 4_000_000 {
        guard += 1;
        let next = rk4(&eval, &prev, dt);
        if prev[0] < 0.0 && next[0] >= 0.0 {
            let w = -prev[0] / (next[0] - prev[0]);
            out.push(prev[1] + w * (next[1] - prev[1]));
            out.push(prev[2] + w * (next[2] - prev[2]));
        }
        prev = next;
    }
    out
}

fn rk4(f: &impl Fn(&[f64; 3]) -> [f64; 3], y: &[f64; 3], dt: f64) -> [f64; 3] {
    let k1 = f(y);
    let y2 = [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1], y[2] + 0.5 * dt * k1[2]];
    let k2 = f(&y2);
    let y3 = [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1], y[2] + 0.5 * dt * k2[2]];
    let k3 = f(&y3);
    let y4 = [y[0] + dt * k3[0], y[1] + dt * k3[1], y[2] + dt * k3[2]];
    let k4 = f(&y4);
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// `[m, g(m), cost_ratio(n, m, c_f)]` triples for m = 1..=max_order.
#[wasm_bindgen]
pub fn model_table(n: u32, c_f: f64, max_order: u32) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 1..=max_order.min(40) {
        let (_, _, ratio) = coeffs::cost_model(n, m, c_f);
        out.push(m as f64);
        out.push(coeffs::step_ratio_g(m));
        out.push(ratio);
    }
    out
}

/// Names accepted by [`benchmark_series`].
#[wasm_bindgen]
pub fn system_names() -> String {
    systems::SYSTEM_NAMES.join(",")
}
