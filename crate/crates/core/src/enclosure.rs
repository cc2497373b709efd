//! Rough enclosures: validated bounds for the flow and the variational flow
//! over a whole step interval `[0, h]`, by the high-order enclosure method.
//!
//! A candidate `[y~] = sum_{i<=m} [0,h]^i phi[i]([x]) + [eps]` is accepted
//! once `[0,h]^{m+1} phi[m+1]([y~])` fits inside the padding `[eps]`; the
//! variational candidate is validated the same way against its own padding.
//! When a test fails the step is shortened and the test re-run against the
//! *same* candidate and the same coefficient at `[y~]` (the candidate built
//! for a longer step encloses the shorter one), so retries cost almost
//! nothing.

use crate::error::Error;
use crate::interval::{pow_up_nonneg, IMatrix, IVector, Interval};
use crate::vectorfield::jet::{c0_jet, c1_jet, Jet};
use crate::vectorfield::VectorField;

/// Tuning for the enclosure search.
#[derive(Clone, Debug)]
pub struct EnclosureConfig {
    /// Inflation factor applied to the initial padding guess.
    pub pad: f64,
    /// Hard lower bound on the step size.
    pub min_step: f64,
    /// Maximum number of step-shortening retries per enclosure.
    pub max_retries: usize,
    /// Safety factor in the one-shot step cut.
    pub shrink_safety: f64,
}

impl Default for EnclosureConfig {
    fn default() -> Self {
        EnclosureConfig { pad: 1.1, min_step: 1e-12, max_retries: 10, shrink_safety: 0.95 }
    }
}

/// An accepted rough enclosure over `[0, h]`.
#[derive(Clone, Debug)]
pub struct RoughEnclosure {
    /// The accepted step.
    pub h: f64,
    /// Enclosure of the flow over `[0, h]`.
    pub ytilde: IVector,
    /// Accepted padding (centered at zero) around the Taylor polynomial.
    pub epsilon: IVector,
    /// Enclosure of the variational flow over `[0, h]`, when requested.
    pub vtilde: Option<IMatrix>,
    /// Accepted variational padding.
    pub big_e: Option<IMatrix>,
}

/// Enclosure plus the jets it computed, which the predictor reuses: the
/// order-(m+1) jet at `[x]` and the order-(m+1) jet at `[y~]`.
pub struct HoeResult {
    pub enc: RoughEnclosure,
    pub jet_x: Jet,
    pub jet_y: Jet,
}

fn zero_h_pow(h: f64, k: usize) -> Interval {
    Interval::new(0.0, pow_up_nonneg(h, k as u32))
}

/// A symmetry of the trajectory can make single components of the remainder
/// coefficient exactly zero; a zero-width padding there can never absorb the
/// (generically nonzero) remainder over the tube, so each component gets at
/// least a small fraction of the largest one.
fn floor_components(eps: IVector) -> IVector {
    let top = eps.mag();
    if top == 0.0 {
        return eps;
    }
    let floor = 1e-3 * top;
    let mut out = eps;
    for i in 0..out.len() {
        if out[i].mag() < floor {
            out[i] = Interval::new(-floor, floor);
        }
    }
    out
}

fn floor_matrix_components(eps: IMatrix) -> IMatrix {
    let top = eps.mag();
    if top == 0.0 {
        return eps;
    }
    let floor = 1e-3 * top;
    let mut out = eps;
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            if out[(i, j)].mag() < floor {
                out[(i, j)] = Interval::new(-floor, floor);
            }
        }
    }
    out
}

/// Joint rough enclosure for the flow and (optionally) the variational flow,
/// with automatic step shortening.
///
/// `variational` controls whether `[V~]` is validated (needed only when the
/// variational matrix is being tracked across steps). The jet at `[x]` is
/// always variational because the predictor's mean-value matrix needs it.
pub fn hoe_enclosure(
    f: &VectorField,
    x: &IVector,
    h_try: f64,
    m: usize,
    variational: bool,
    cfg: &EnclosureConfig,
) -> Result<HoeResult, Error> {
    let jet_x = c1_jet(f, x, m + 1)?;
    hoe_enclosure_from_jet(f, jet_x, h_try, m, variational, cfg)
}

/// Same as [`hoe_enclosure`], reusing a caller-computed order-(m+1)
/// variational jet at `[x]` (the step-size predictor needs it first).
pub fn hoe_enclosure_from_jet(
    f: &VectorField,
    jet_x: Jet,
    h_try: f64,
    m: usize,
    variational: bool,
    cfg: &EnclosureConfig,
) -> Result<HoeResult, Error> {
    assert!(h_try > 0.0 && m >= 1);
    debug_assert!(jet_x.order() >= m + 1);
    debug_assert!(jet_x.psi.is_some());

    let mut h = h_try;

    // Tangents at [y~] are only needed when the variational enclosure is
    // wanted; the flow remainder is what validates the candidate.
    let mk_jet = |yt: &IVector| -> Result<Jet, Error> {
        if variational {
            c1_jet(f, yt, m + 1)
        } else {
            c0_jet(f, yt, m + 1)
        }
    };

    // Outer loop: a candidate whose jet leaves the field's domain (the tube
    // reached a pole) or overflows is useless at any fraction of its step,
    // so rebuild outright at a much shorter one. Inside, a failed test first
    // earns one padding re-base on the coefficient observed at the candidate
    // (the guess from the coefficient at [x] underestimates the swept tube;
    // re-basing keeps the trial step and costs one jet), and only then is
    // the step cut against the fixed candidate.
    let mut accepted: Option<(IVector, IVector, Jet)> = None;
    'rebuild: for _ in 0..8 {
        let poly = jet_x.eval_phi(&Interval::new(0.0, h), m);
        let epsilon0 = floor_components(
            jet_x.phi[m + 1]
                .scale(&zero_h_pow(h, m + 1))
                .sym_hull()
                .scale(&Interval::point(2.0 * cfg.pad)),
        );
        let ytilde0 = &poly + &epsilon0;

        let domain_retry = |h: &mut f64| -> Result<(), Error> {
            *h /= 3.0;
            if *h < cfg.min_step {
                return Err(Error::EnclosureFailure { min_step: cfg.min_step });
            }
            Ok(())
        };

        if !ytilde0.is_finite() {
            domain_retry(&mut h)?;
            continue 'rebuild;
        }
        let jet_y0 = match mk_jet(&ytilde0) {
            Ok(j) => j,
            Err(Error::DivisionByZero) | Err(Error::NegativeRadicand { .. }) => {
                domain_retry(&mut h)?;
                continue 'rebuild;
            }
            Err(e) => return Err(e),
        };
        if !jet_y0.phi[m + 1].is_finite() {
            domain_retry(&mut h)?;
            continue 'rebuild;
        }

        let rem0 = jet_y0.phi[m + 1].scale(&zero_h_pow(h, m + 1));
        if rem0.subset_of(&epsilon0) {
            accepted = Some((epsilon0, ytilde0, jet_y0));
            break 'rebuild;
        }

        // padding re-base round
        let epsilon1 = epsilon0.hull(&rem0.sym_hull().scale(&Interval::point(2.0 * cfg.pad)));
        let ytilde1 = &poly + &epsilon1;
        if ytilde1.is_finite() {
            if let Ok(jet_y1) = mk_jet(&ytilde1) {
                if jet_y1.phi[m + 1].is_finite() {
                    let rem1 = jet_y1.phi[m + 1].scale(&zero_h_pow(h, m + 1));
                    if rem1.subset_of(&epsilon1) {
                        accepted = Some((epsilon1, ytilde1, jet_y1));
                        break 'rebuild;
                    }
                }
            }
        }

        // shorten the step against the first candidate; it and its remainder
        // coefficient stay fixed, only the [0,h]^{m+1} factor changes, so
        // retries are nearly free
        let rem_coeff = &jet_y0.phi[m + 1];
        let mut rem = rem0;
        for _ in 0..cfg.max_retries {
            h = shrink_by_ratio(h, epsilon0.diam(), rem.diam(), m, cfg)?;
            rem = rem_coeff.scale(&zero_h_pow(h, m + 1));
            if rem.subset_of(&epsilon0) {
                accepted = Some((epsilon0, ytilde0, jet_y0));
                break 'rebuild;
            }
        }
        return Err(Error::EnclosureFailure { min_step: cfg.min_step });
    }
    let Some((epsilon, ytilde, jet_y)) = accepted else {
        return Err(Error::EnclosureFailure { min_step: cfg.min_step });
    };

    if !variational {
        return Ok(HoeResult {
            enc: RoughEnclosure { h, ytilde, epsilon, vtilde: None, big_e: None },
            jet_x,
            jet_y,
        });
    }

    // Variational candidate. Padding re-bases are nearly free here (the jet
    // at [y~] is already fixed; only a matrix product is redone), so allow a
    // few before cutting the step against the first candidate. Shrinking h
    // never invalidates the flow test already accepted.
    let w_poly = jet_x.eval_psi(&Interval::new(0.0, h), m);
    let psi_rem_x = &jet_x.psi.as_ref().expect("variational jet")[m + 1];
    let psi_rem_y = &jet_y.psi.as_ref().expect("variational jet")[m + 1];
    let mut big_e = floor_matrix_components(
        (&psi_rem_x.scale(&zero_h_pow(h, m + 1)) * &w_poly)
            .sym_hull()
            .scale(&Interval::point(2.0 * cfg.pad)),
    );

    let mut accepted = None;
    let mut first: Option<(IMatrix, IMatrix, IMatrix)> = None; // (E, vtilde, rem_base)
    for round in 0..4 {
        let vtilde = &w_poly + &big_e;
        if !vtilde.is_finite() {
            break;
        }
        let rem_base = psi_rem_y * &vtilde;
        let rem = rem_base.scale(&zero_h_pow(h, m + 1));
        if first.is_none() {
            first = Some((big_e.clone(), vtilde.clone(), rem_base.clone()));
        }
        if rem.subset_of(&big_e) {
            accepted = Some((big_e.clone(), vtilde));
            break;
        }
        if round < 3 {
            big_e = big_e.hull(&rem.sym_hull().scale(&Interval::point(2.0 * cfg.pad)));
        }
    }
    let (big_e, vtilde) = match accepted {
        Some(t) => t,
        None => {
            let Some((e0, vt0, rem_base0)) = first else {
                return Err(Error::Overflow { context: "variational enclosure candidate" });
            };
            let mut rem = rem_base0.scale(&zero_h_pow(h, m + 1));
            let mut accepted = false;
            for _ in 0..cfg.max_retries {
                h = shrink_by_ratio(h, e0.diam(), rem.diam(), m, cfg)?;
                rem = rem_base0.scale(&zero_h_pow(h, m + 1));
                if rem.subset_of(&e0) {
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(Error::EnclosureFailure { min_step: cfg.min_step });
            }
            (e0, vt0)
        }
    };

    Ok(HoeResult {
        enc: RoughEnclosure { h, ytilde, epsilon, vtilde: Some(vtilde), big_e: Some(big_e) },
        jet_x,
        jet_y,
    })
}

/// One-shot near-optimal step cut `h <- safety * h * (||eps||/||rem||)^{1/(m+1)}`
/// (max-norm over components).
fn shrink_by_ratio(
    h: f64,
    eps_norm: f64,
    rem_norm: f64,
    m: usize,
    cfg: &EnclosureConfig,
) -> Result<f64, Error> {
    let mut next = if !rem_norm.is_finite() {
        0.25 * h
    } else if rem_norm > 0.0 && eps_norm > 0.0 {
        cfg.shrink_safety * h * (eps_norm / rem_norm).powf(1.0 / (m as f64 + 1.0))
    } else {
        0.7 * h
    };
    if !(next < h) {
        // the norm ratio can be misleadingly optimistic for anisotropic sets
        next = 0.7 * h;
    }
    if next < cfg.min_step {
        return Err(Error::EnclosureFailure { min_step: cfg.min_step });
    }
    Ok(next)
}

/// First Order Enclosure test: whether `Id + [0,h] Df([y~]) [V]` maps the
/// candidate `[V]` into itself. Provided as a diagnostic alternative to the
/// high-order variational test; it tends to demand shorter steps.
pub fn first_order_enclosure_test(
    f: &VectorField,
    ytilde: &IVector,
    vtilde_candidate: &IMatrix,
    h: f64,
) -> Result<bool, Error> {
    let n = f.dim();
    let jac = f.jacobian(ytilde)?;
    let prod = (&jac * vtilde_candidate).scale(&Interval::new(0.0, h));
    let lhs = &IMatrix::identity(n) + &prod;
    Ok(lhs.subset_of(vtilde_candidate))
}
