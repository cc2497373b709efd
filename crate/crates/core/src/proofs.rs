//! Certification layer: trapping-region, covering-relation and
//! cone-condition checks for planar return maps, with uniform y-subdivision,
//! optional parallel dispatch, and adaptive bisection of failed pieces.
//!
//! Every check produces a [`Certificate`] whose `verified` flag is true only
//! if each piece's rigorous bound clears its threshold strictly. Certificates
//! carry per-piece bounds so a run can be audited from the report alone.

use crate::error::Error;
use crate::interval::{IMatrix, IVector, Interval};
use crate::poincare::{double_return, first_return, PoincareConfig, Section};
use crate::setrep::Doubleton;
use crate::stepper::SolverConfig;
use crate::vectorfield::VectorField;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Canonical data of the chaotic-attractor certification: the section, the
/// trapping box and the two horseshoe boxes on it, and the subdivision
/// counts the full certification run uses.
pub mod rossler {
    use super::PlanarBox;
    use crate::interval::Interval;
    use crate::poincare::Section;

    /// The plane x = 0 crossed with positive x-velocity.
    pub fn section() -> Section {
        Section::new(0, 0.0, 1.0)
    }

    pub fn z_range() -> Interval {
        Interval::new(0.028, 0.034)
    }

    /// Trapping candidate B = [-10.7, -2.3] x Z.
    pub fn trapping_box() -> PlanarBox {
        PlanarBox::new(Interval::new(-10.7, -2.3), z_range())
    }

    /// Left horseshoe box M = [-8.4, -7.6] x Z.
    pub fn m_box() -> PlanarBox {
        PlanarBox::new(Interval::new(-8.4, -7.6), z_range())
    }

    /// Right horseshoe box N = [-5.7, -4.6] x Z.
    pub fn n_box() -> PlanarBox {
        PlanarBox::new(Interval::new(-5.7, -4.6), z_range())
    }

    pub const TRAPPING_SUBDIV: usize = 160;
    pub const M_SUBDIV: usize = 32;
    pub const N_SUBDIV: usize = 48;
    pub const CONE_LAMBDA: f64 = 1.0;
    pub const CONE_MU: f64 = -1000.0;
    pub const SOLVER_ORDER: usize = 25;
    pub const SOLVER_TOL: f64 = 1e-10;
}

/// A rectangle in the section coordinates (y, z).
#[derive(Clone, Copy, Debug)]
pub struct PlanarBox {
    pub y: Interval,
    pub z: Interval,
}

impl PlanarBox {
    pub fn new(y: Interval, z: Interval) -> PlanarBox {
        PlanarBox { y, z }
    }

    /// Strictly contains (both coordinates, both endpoints).
    pub fn strictly_contains(&self, y: &Interval, z: &Interval) -> bool {
        y.strict_subset_of(&self.y) && z.strict_subset_of(&self.z)
    }
}

/// The quadratic form `Q = diag(lambda, mu)` of the cone condition.
#[derive(Clone, Copy, Debug)]
pub struct ConeMatrix {
    pub lambda: f64,
    pub mu: f64,
}

impl ConeMatrix {
    pub fn new(lambda: f64, mu: f64) -> Result<ConeMatrix, Error> {
        if !(lambda > 0.0 && mu < 0.0) {
            return Err(Error::Config(format!(
                "cone matrix needs lambda > 0 and mu < 0, got ({lambda}, {mu})"
            )));
        }
        Ok(ConeMatrix { lambda, mu })
    }

    fn as_interval(&self) -> IMatrix {
        IMatrix::from_rows(vec![
            vec![Interval::point(self.lambda), Interval::ZERO],
            vec![Interval::ZERO, Interval::point(self.mu)],
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertKind {
    Trapping,
    Covering,
    Cone,
}

/// Outcome of one checked piece (or edge).
#[derive(Clone, Debug)]
pub struct PieceReport {
    pub label: String,
    pub passed: bool,
    pub detail: String,
    pub steps: usize,
    pub depth: usize,
}

/// Aggregated outcome of a certification run.
#[derive(Debug)]
pub struct Certificate {
    pub kind: CertKind,
    pub verified: bool,
    pub summary: String,
    pub pieces: Vec<PieceReport>,
}

impl Certificate {
    fn from_pieces(kind: CertKind, summary: String, pieces: Vec<PieceReport>) -> Certificate {
        let verified = !pieces.is_empty() && pieces.iter().all(|p| p.passed);
        Certificate { kind, verified, summary, pieces }
    }

    /// Plain-text audit report: configuration, verdict, one line per piece.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            CertKind::Trapping => "trapping",
            CertKind::Covering => "covering",
            CertKind::Cone => "cone",
        };
        let _ = writeln!(out, "certificate: {kind}");
        let _ = writeln!(out, "{}", self.summary);
        let _ = writeln!(
            out,
            "result: {}",
            if self.verified { "VERIFIED" } else { "NOT VERIFIED" }
        );
        let ok = self.pieces.iter().filter(|p| p.passed).count();
        let _ = writeln!(out, "pieces: {} ok, {} failed", ok, self.pieces.len() - ok);
        for p in &self.pieces {
            let _ = writeln!(
                out,
                "{} {} steps={} depth={} {}",
                p.label,
                if p.passed { "ok" } else { "FAIL" },
                p.steps,
                p.depth,
                p.detail
            );
        }
        out
    }
}

/// Uniform subdivision of `[lo, hi]` into `n` slabs with shared, exactly
/// representable internal endpoints.
pub fn uniform_slabs(range: &Interval, n: usize) -> Vec<Interval> {
    assert!(n >= 1);
    let (lo, hi) = (range.lo(), range.hi());
    let cut = |i: usize| -> f64 {
        if i == 0 {
            lo
        } else if i == n {
            hi
        } else {
            lo + i as f64 * (hi - lo) / n as f64
        }
    };
    (0..n).map(|i| Interval::new(cut(i), cut(i + 1))).collect()
}

/// Common solver/section context for the planar-map checks.
pub struct ProofContext<'f> {
    pub field: &'f VectorField,
    pub section: Section,
    pub solver: SolverConfig,
    pub poincare: PoincareConfig,
    /// Adaptive bisection depth for failed pieces.
    pub max_depth: usize,
    /// Worker threads for piece dispatch (None: rayon default).
    pub threads: Option<usize>,
}

impl<'f> ProofContext<'f> {
    fn start_box(&self, y: &Interval, z: &Interval) -> Doubleton {
        // the section stores coordinates (level, y, z) in field order
        let sec = self.section;
        let n = self.field.dim();
        assert_eq!(n, 3, "planar proofs expect a three-dimensional field");
        let mut entries = vec![Interval::point(sec.level); n];
        let mut free = (0..n).filter(|&i| i != sec.coord);
        let iy = free.next().unwrap();
        let iz = free.next().unwrap();
        entries[iy] = *y;
        entries[iz] = *z;
        Doubleton::from_box(&IVector::from_entries(entries))
    }

    fn with_pool<T: Send>(&self, job: impl FnOnce() -> Vec<T> + Send) -> Vec<T> {
        match self.threads {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .expect("thread pool")
                .install(job),
            None => job(),
        }
    }
}

/// Dispatch one closure per y-slab (in parallel, aggregation order fixed by
/// the slab order), bisecting failed slabs up to `max_depth`.
pub fn subdivision_driver<F>(
    ctx: &ProofContext,
    y_range: &Interval,
    pieces: usize,
    check: F,
) -> Vec<PieceReport>
where
    F: Fn(&Interval, usize) -> PieceReport + Sync,
{
    let slabs = uniform_slabs(y_range, pieces);
    ctx.with_pool(|| {
        slabs
            .par_iter()
            .enumerate()
            .map(|(i, slab)| {
                let mut report = bisecting_check(&check, slab, 0, ctx.max_depth);
                report.label = format!("piece {i} y=[{:.6}, {:.6}]", slab.lo(), slab.hi());
                report
            })
            .collect()
    })
}

fn bisecting_check<F>(check: &F, slab: &Interval, depth: usize, max_depth: usize) -> PieceReport
where
    F: Fn(&Interval, usize) -> PieceReport + Sync,
{
    let report = check(slab, depth);
    if report.passed || depth >= max_depth {
        return report;
    }
    let mid = slab.mid();
    let left = Interval::new(slab.lo(), mid);
    let right = Interval::new(mid, slab.hi());
    let l = bisecting_check(check, &left, depth + 1, max_depth);
    if !l.passed {
        return l;
    }
    let r = bisecting_check(check, &right, depth + 1, max_depth);
    let passed = r.passed;
    PieceReport {
        label: report.label,
        passed,
        detail: format!("split at depth {}: {} | {}", depth + 1, l.detail, r.detail),
        steps: l.steps + r.steps,
        depth: l.depth.max(r.depth),
    }
}

/// Verify that the return map sends every y-slab of `b` strictly into `b`.
pub fn check_trapping(ctx: &ProofContext, b: &PlanarBox, n_sub: usize) -> Certificate {
    let check = |slab: &Interval, depth: usize| -> PieceReport {
        let start = ctx.start_box(slab, &b.z);
        match first_return(ctx.field, ctx.solver.clone(), start, &ctx.section, &ctx.poincare) {
            Ok(r) => {
                let (y, z) = (r.section_image[0], r.section_image[1]);
                let passed = b.strictly_contains(&y, &z);
                PieceReport {
                    label: String::new(),
                    passed,
                    detail: format!(
                        "image y=[{:.6}, {:.6}] z=[{:.6}, {:.6}] T=[{:.4}, {:.4}]",
                        y.lo(),
                        y.hi(),
                        z.lo(),
                        z.hi(),
                        r.time.lo(),
                        r.time.hi()
                    ),
                    steps: r.steps,
                    depth,
                }
            }
            Err(e) => PieceReport {
                label: String::new(),
                passed: false,
                detail: format!("solver error: {e}"),
                steps: 0,
                depth,
            },
        }
    };
    let pieces = subdivision_driver(ctx, &b.y, n_sub, check);
    let summary = format!(
        "target: y in [{}, {}], z in [{}, {}], {} uniform y-slabs",
        b.y.lo(),
        b.y.hi(),
        b.z.lo(),
        b.z.hi(),
        n_sub
    );
    Certificate::from_pieces(CertKind::Trapping, summary, pieces)
}

/// The four strict inequalities on the second-return image of the exit
/// edges of `m_box` and `n_box`: the left/right edges of M map left of M,
/// right of N, and the N edges map across the same thresholds, which is the
/// covering pattern behind the symbolic dynamics.
pub fn check_covering(
    ctx: &ProofContext,
    m_box: &PlanarBox,
    n_box: &PlanarBox,
    edge_subdiv: usize,
) -> Certificate {
    let l_m = m_box.y.lo();
    let r_n = n_box.y.hi();

    // (edge name, fixed y, "<" means image strictly left of l_M, else
    // strictly right of r_N)
    let edges = [
        ("edge {l_M} x Z", m_box.y.lo(), true),
        ("edge {r_M} x Z", m_box.y.hi(), false),
        ("edge {r_N} x Z", n_box.y.hi(), true),
        ("edge {l_N} x Z", n_box.y.lo(), false),
    ];

    let z_parts = uniform_slabs(&m_box.z, edge_subdiv);
    let jobs: Vec<(usize, usize)> = (0..edges.len())
        .flat_map(|e| (0..z_parts.len()).map(move |zi| (e, zi)))
        .collect();

    let pieces: Vec<PieceReport> = ctx.with_pool(|| {
        jobs.par_iter()
            .map(|&(e, zi)| {
                let (name, y_val, left_of) = edges[e];
                let z = z_parts[zi];
                let start = ctx.start_box(&Interval::point(y_val), &z);
                let label = if edge_subdiv == 1 {
                    name.to_string()
                } else {
                    format!("{name} z-part {zi}")
                };
                match double_return(ctx.field, ctx.solver.clone(), start, &ctx.section, &ctx.poincare)
                {
                    Ok(r) => {
                        let y2 = r.second.section_image[0];
                        let (passed, relation) = if left_of {
                            (y2.hi() < l_m, format!("sup {} < l_M = {}", y2.hi(), l_m))
                        } else {
                            (y2.lo() > r_n, format!("inf {} > r_N = {}", y2.lo(), r_n))
                        };
                        PieceReport {
                            label,
                            passed,
                            detail: format!(
                                "P2 y=[{:.6}, {:.6}] ({relation})",
                                y2.lo(),
                                y2.hi()
                            ),
                            steps: r.first.steps + r.second.steps,
                            depth: 0,
                        }
                    }
                    Err(err) => PieceReport {
                        label,
                        passed: false,
                        detail: format!("solver error: {err}"),
                        steps: 0,
                        depth: 0,
                    },
                }
            })
            .collect()
    });

    let summary = format!(
        "M: y in [{}, {}], N: y in [{}, {}], Z = [{}, {}], edge subdivision {}",
        m_box.y.lo(),
        m_box.y.hi(),
        n_box.y.lo(),
        n_box.y.hi(),
        m_box.z.lo(),
        m_box.z.hi(),
        edge_subdiv
    );
    Certificate::from_pieces(CertKind::Covering, summary, pieces)
}

/// Ladder of solver variants for the cone pieces, each paired with the
/// number of parts the intermediate image is split into for the second leg.
/// Every entry yields a sound enclosure of the same derivative set; which
/// one is tight for a given piece depends chaotically on how representation
/// folds interleave with the orbit, so the per-piece check intersects them
/// until the test clears.
fn cone_config_ladder(base: &SolverConfig) -> Vec<(SolverConfig, usize)> {
    let mut ladder = Vec::new();
    let mut push = |step: Option<crate::stepper::StepMode>, threshold: f64, split: usize| {
        let mut cfg = base.clone();
        if let Some(s) = step {
            cfg.step = s;
        }
        cfg.reorg_threshold = threshold;
        ladder.push((cfg, split));
    };
    use crate::stepper::StepMode::Fixed;
    push(None, 10.0, 1);
    push(Some(Fixed(0.02)), 10.0, 3);
    push(Some(Fixed(0.01)), 30.0, 3);
    push(Some(Fixed(0.02)), 100.0, 3);
    ladder
}

/// Rigorous enclosure of the composed second-return derivative over a slab:
/// the first leg gives `D1` and the image set; the second-leg derivative is
/// evaluated over `split` sub-boxes of the image (their union covers every
/// true image point, and the wrap of each sub-run scales with its width),
/// then the chain rule composes the two factors.
fn dp2_chain(
    ctx: &ProofContext,
    cfg: &SolverConfig,
    slab: &Interval,
    z: &Interval,
    split: usize,
) -> Result<(IMatrix, usize), Error> {
    let sec = ctx.section;
    let start = ctx.start_box(slab, z);
    let first = first_return(ctx.field, cfg.clone(), start, &sec, &ctx.poincare)?;
    let d1 = first.dp_section.as_ref().expect("variational tracking on");
    let mut steps = first.steps;

    let d2 = if split <= 1 {
        let second = first_return(ctx.field, cfg.clone(), first.image.clone(), &sec, &ctx.poincare)?;
        steps += second.steps;
        second.dp_section.expect("variational tracking on")
    } else {
        // true image points sit exactly on the section, so the sub-boxes pin
        // the section coordinate to its level
        let hull = first.image.hull();
        let n = ctx.field.dim();
        let mut free = (0..n).filter(|&i| i != sec.coord);
        let iy = free.next().unwrap();
        let iz = free.next().unwrap();
        let mut union: Option<IMatrix> = None;
        for part in uniform_slabs(&hull[iy], split) {
            let mut entries = vec![Interval::point(sec.level); n];
            entries[iy] = part;
            entries[iz] = hull[iz];
            let sub = Doubleton::from_box(&IVector::from_entries(entries));
            let r = first_return(ctx.field, cfg.clone(), sub, &sec, &ctx.poincare)?;
            steps += r.steps;
            let d = r.dp_section.expect("variational tracking on");
            union = Some(match union {
                Some(u) => u.hull(&d),
                None => d,
            });
        }
        union.expect("split >= 1")
    };

    Ok((&d2 * d1, steps))
}

/// Positive definiteness of `D^T Q D - Q` over every y-slab of the two
/// boxes, with `D` the rigorous second-return derivative, decided by the
/// leading-minor (Sylvester) test on the 2x2 interval matrix.
pub fn check_cone(
    ctx: &ProofContext,
    m_box: &PlanarBox,
    n_box: &PlanarBox,
    q: &ConeMatrix,
    g_m: usize,
    g_n: usize,
) -> Certificate {
    assert!(ctx.solver.track_variational, "cone check needs variational tracking");
    let qi = q.as_interval();
    let ladder = cone_config_ladder(&ctx.solver);

    let run_box = |which: &str, pb: &PlanarBox, parts: usize| -> Vec<PieceReport> {
        let check = |slab: &Interval, depth: usize| -> PieceReport {
            let mut d_enc: Option<IMatrix> = None;
            let mut steps = 0;
            let mut last_err = None;
            let mut used = 0;
            for (cfg, split) in &ladder {
                match dp2_chain(ctx, cfg, slab, &pb.z, *split) {
                    Ok((d, n_steps)) => {
                        steps += n_steps;
                        used += 1;
                        d_enc = Some(match d_enc {
                            // every run encloses the same true set, so the
                            // intersection is still an enclosure of it
                            Some(prev) => match prev.intersect(&d) {
                                Ok(tighter) => tighter,
                                Err(_) => prev,
                            },
                            None => d,
                        });
                        let d = d_enc.as_ref().unwrap();
                        let w = &(&d.transpose() * &(&qi * d)) - &qi;
                        if w[(0, 0)].lo() > 0.0 && w.det().lo() > 0.0 {
                            break;
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            match d_enc {
                Some(d) => {
                    let w = &(&d.transpose() * &(&qi * &d)) - &qi;
                    let minor1 = w[(0, 0)];
                    let det = w.det();
                    let passed = minor1.lo() > 0.0 && det.lo() > 0.0;
                    PieceReport {
                        label: String::new(),
                        passed,
                        detail: format!(
                            "W11 >= {:.3e}, det(W) >= {:.3e} (runs: {used})",
                            minor1.lo(),
                            det.lo()
                        ),
                        steps,
                        depth,
                    }
                }
                None => PieceReport {
                    label: String::new(),
                    passed: false,
                    detail: format!(
                        "solver error: {}",
                        last_err.map_or_else(|| "no run".to_string(), |e| e.to_string())
                    ),
                    steps,
                    depth,
                },
            }
        };
        let mut reports = subdivision_driver(ctx, &pb.y, parts, check);
        for r in &mut reports {
            r.label = format!("{which} {}", r.label);
        }
        reports
    };

    let mut pieces = run_box("M", m_box, g_m);
    pieces.extend(run_box("N", n_box, g_n));

    let summary = format!(
        "Q = diag({}, {}), M split {} / N split {}, M: y in [{}, {}], N: y in [{}, {}]",
        q.lambda,
        q.mu,
        g_m,
        g_n,
        m_box.y.lo(),
        m_box.y.hi(),
        n_box.y.lo(),
        n_box.y.hi()
    );
    Certificate::from_pieces(CertKind::Cone, summary, pieces)
}
