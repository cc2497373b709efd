//! Cross-module oracle tests for the full stepping pipeline: nonvalidated
//! reference trajectories must stay inside every reported enclosure,
//! finite-difference monodromy samples inside the variational bounds, and
//! conserved quantities inside their propagated enclosures.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rigode::interval::{IVector, Interval};
use rigode::poincare::{first_return, PoincareConfig, Section};
use rigode::setrep::Doubleton;
use rigode::stepper::{Algorithm, MethodOrder, Solver, SolverConfig, StepMode};
use rigode::vectorfield::{systems, VectorField};

/// Fine-step RK4 reference (nonvalidated), also used by the acceptance run.
fn reference_flow(f: &VectorField, start: &[f64], t: f64, substeps_per_unit: usize) -> Vec<f64> {
    let n = start.len();
    let eval = |y: &[f64]| -> Vec<f64> {
        let v = f.eval(&IVector::from_points(y)).unwrap();
        (0..n).map(|i| v[i].mid()).collect()
    };
    let steps = ((t.abs() * substeps_per_unit as f64).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut y = start.to_vec();
    for _ in 0..steps {
        let k1 = eval(&y);
        let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * k1[i]).collect();
        let k2 = eval(&y2);
        let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * dt * k2[i]).collect();
        let k3 = eval(&y3);
        let y4: Vec<f64> = (0..n).map(|i| y[i] + dt * k3[i]).collect();
        let k4 = eval(&y4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

fn solver_cfg(m: usize, alg: Algorithm, mode: StepMode) -> SolverConfig {
    let mut cfg = SolverConfig::new(MethodOrder::new(m), alg, mode);
    cfg.max_step = 0.3;
    cfg
}

#[test]
fn reference_trajectories_stay_inside_enclosures() {
    let mut rng = StdRng::seed_from_u64(0xf10e);
    for (name, spread, steps) in [("lorenz", 0.05, 40), ("rossler", 0.05, 40)] {
        let f = systems::by_name(name).unwrap();
        let base = systems::default_ic(name).unwrap();
        for _ in 0..5 {
            let start: Vec<f64> = (0..f.dim())
                .map(|i| base[i].mid() + rng.random_range(-spread..spread))
                .collect();
            let mut solver = Solver::new(
                &f,
                solver_cfg(12, Algorithm::HermiteObreshkov, StepMode::Tolerance(1e-10)),
                &IVector::from_points(&start),
            );
            let mut t = 0.0;
            for k in 0..steps {
                let step = solver.advance().unwrap();
                t += step.h;
                let reference = reference_flow(&f, &start, t, 4000);
                assert!(
                    solver.x_hull().contains_point(&reference),
                    "{name}: reference left the hull at step {k}"
                );
                assert!(
                    step.x_next.contains_point(&reference),
                    "{name}: reference left the reported bound at step {k}"
                );
            }
        }
    }
}

#[test]
fn finite_difference_monodromy_inside_variational_bounds() {
    let f = systems::by_name("rossler").unwrap();
    let start = [0.0, -6.0, 0.03];
    let mut solver = Solver::new(
        &f,
        solver_cfg(12, Algorithm::HermiteObreshkov, StepMode::Tolerance(1e-10)),
        &IVector::from_points(&start),
    );
    let mut t = 0.0;
    for _ in 0..40 {
        t += solver.advance().unwrap().h;
    }
    let v = solver.v_hull().unwrap();
    let delta = 1e-5;
    for c in 0..3 {
        let mut plus = start;
        let mut minus = start;
        plus[c] += delta;
        minus[c] -= delta;
        let fp = reference_flow(&f, &plus, t, 4000);
        let fm = reference_flow(&f, &minus, t, 4000);
        for r in 0..3 {
            let fd = (fp[r] - fm[r]) / (2.0 * delta);
            assert!(
                v[(r, c)].inflate(1e-4 + 1e-3 * fd.abs()).contains(fd),
                "monodromy[{r}][{c}] = {fd} escaped {:?}",
                v[(r, c)]
            );
        }
    }
}

#[test]
fn lorenz_volume_contraction_enclosed() {
    // det V(t) must contain exp(div * t) with the constant divergence
    let f = systems::by_name("lorenz").unwrap();
    let x0 = systems::default_ic("lorenz").unwrap();
    let mut solver = Solver::new(
        &f,
        solver_cfg(14, Algorithm::HermiteObreshkov, StepMode::Fixed(0.02)),
        &x0,
    );
    solver.run_until(1.0, |_, _| {}).unwrap();
    let det = solver.v_hull().unwrap().det();
    let div = -10.0 - 1.0 - 8.0 / 3.0;
    assert!(det.contains((div * solver.t.mid()).exp()), "det {det:?}");
}

#[test]
fn hamiltonian_energy_enclosed_over_full_return() {
    let f = systems::by_name("henon_heiles").unwrap();
    let ic = systems::default_ic("henon_heiles").unwrap();
    let h0 = systems::henon_heiles_energy(&ic);
    let sec = Section::new(0, 0.0, 1.0);
    let mut cfg = solver_cfg(14, Algorithm::HermiteObreshkov, StepMode::Tolerance(1e-12));
    cfg.track_variational = true;
    let r = first_return(&f, cfg, Doubleton::from_box(&ic), &sec, &PoincareConfig::default())
        .unwrap();
    let h_end = systems::henon_heiles_energy(&r.image.hull());
    assert!(
        h_end.intersect(&h0).is_ok(),
        "energy enclosures drifted apart: {h0:?} vs {h_end:?}"
    );
    assert!(h_end.contains(h0.mid()));
}

#[test]
fn symplectic_volume_enclosed() {
    // divergence-free fields have det V(t) = 1 for all t
    for name in ["henon_heiles", "pcr3bp"] {
        let f = systems::by_name(name).unwrap();
        let x0 = systems::default_ic(name).unwrap();
        let mut solver = Solver::new(
            &f,
            solver_cfg(14, Algorithm::HermiteObreshkov, StepMode::Fixed(0.02)),
            &x0,
        );
        solver.run_until(1.0, |_, _| {}).unwrap();
        let det = solver.v_hull().unwrap().det();
        assert!(det.contains(1.0), "{name}: det {det:?}");
    }
}

#[test]
fn jacobi_constant_enclosed_over_full_return() {
    let f = systems::by_name("pcr3bp").unwrap();
    let mu = f.param_value("mu").unwrap();
    let ic = systems::default_ic("pcr3bp").unwrap();
    let c0 = systems::jacobi_constant(&mu, &ic).unwrap();
    // the reference orbit crosses y = 0 with positive vy at the start
    let sec = Section::new(1, 0.0, 1.0);
    let mut cfg = solver_cfg(14, Algorithm::HermiteObreshkov, StepMode::Tolerance(1e-12));
    cfg.track_variational = false;
    let r = first_return(&f, cfg, Doubleton::from_box(&ic), &sec, &PoincareConfig::default())
        .unwrap();
    let c_end = systems::jacobi_constant(&mu, &r.image.hull()).unwrap();
    assert!(c_end.contains(c0.mid()), "{c0:?} vs {c_end:?}");
    assert!(r.time.lo() > 1.0, "return should take a while: {:?}", r.time);
}

#[test]
fn corrector_always_inside_predictor_along_trajectories() {
    for name in ["lorenz", "henon_heiles"] {
        let f = systems::by_name(name).unwrap();
        let x0 = systems::default_ic(name).unwrap();
        let mut solver = Solver::new(
            &f,
            solver_cfg(10, Algorithm::HermiteObreshkov, StepMode::Fixed(0.02)),
            &x0,
        );
        for _ in 0..50 {
            let step = solver.advance().unwrap();
            assert!(step.x_next.subset_of(&step.predictor.x_next0));
            assert!(step
                .v_step
                .as_ref()
                .unwrap()
                .subset_of(step.predictor.v0.as_ref().unwrap()));
            assert!(!step.corrector_fallback);
        }
    }
}

#[test]
fn variational_width_dominance_on_a_run() {
    // order and step chosen so the truncation term dominates representation
    // roundoff; there the corrector's advantage is structural and strict
    let f = systems::by_name("henon_heiles").unwrap();
    let x0 = systems::default_ic("henon_heiles").unwrap();
    let run = |alg| {
        let mut s = Solver::new(&f, solver_cfg(6, alg, StepMode::Fixed(0.1)), &x0);
        let mut widths = Vec::new();
        for _ in 0..60 {
            s.advance().unwrap();
            widths.push(s.v_hull().unwrap().diam());
        }
        widths
    };
    let lo = run(Algorithm::Lohner);
    let ho = run(Algorithm::HermiteObreshkov);
    for (k, (a, b)) in lo.iter().zip(&ho).enumerate() {
        assert!(b <= a, "implicit wider at step {k}: {b} vs {a}");
    }
    assert!(ho.last().unwrap() * 2.0 < *lo.last().unwrap());
}
