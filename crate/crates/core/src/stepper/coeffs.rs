//! Two-point interpolation coefficients `c_i^{q,p} = C(q,i)/C(p+q,i)`, the
//! interpolation operator built from them, the step-ratio function of the
//! implicit method, and the per-step operation-count model.
//!
//! Coefficients are computed in exact integer arithmetic and rounded outward
//! exactly once at the conversion to an interval; binomials up to order 40
//! stay well inside the 53-bit exact range.

use crate::interval::Interval;
use crate::vectorfield::jet::Jet;
use crate::IVector;

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> u128 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact rational value of `c_i^{q,p}` as a reduced numerator/denominator
/// pair.
pub fn ho_coefficient(q: u32, p: u32, i: u32) -> (u64, u64) {
    assert!(i <= q);
    let num = binomial(q, i);
    let den = binomial(p + q, i);
    let g = gcd(num, den);
    ((num / g) as u64, (den / g) as u64)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Outward-rounded interval enclosure of `c_i^{q,p}`.
pub fn ho_coefficient_interval(q: u32, p: u32, i: u32) -> Interval {
    let (num, den) = ho_coefficient(q, p, i);
    debug_assert!(num < (1 << 53) && den < (1 << 53));
    Interval::point(num as f64)
        .checked_div(&Interval::point(den as f64))
        .expect("positive denominator")
}

/// The weight table `c_0^{q,p} .. c_q^{q,p}`.
pub fn ho_weights(q: u32, p: u32) -> Vec<Interval> {
    (0..=q).map(|i| ho_coefficient_interval(q, p, i)).collect()
}

/// Interpolation sum `sum_{i<=q} c_i^{q,p} h^i u[i]` (h may be negative for
/// the backward operator).
pub fn psi_operator(jet: &Jet, h: f64, q: u32, p: u32) -> IVector {
    let weights = ho_weights(q, p);
    jet.eval_phi_weighted(&Interval::point(h), &weights)
}

/// Theoretical step-ratio `g(m) = C(m, ceil(m/2))^(1/(m+1))` between the
/// implicit and the explicit method at equal tolerance; increases towards 2.
pub fn step_ratio_g(m: u32) -> f64 {
    assert!(m >= 1);
    let b = binomial(m, m.div_ceil(2)) as f64;
    b.powf(1.0 / (m as f64 + 1.0))
}

/// Per-step operation-count model for the explicit (predictor-only) and
/// predictor-corrector methods: `c_f` is the multiplication cost of one
/// field evaluation, `n` the dimension, `m` the order.
pub fn cost_model(n: u32, m: u32, c_f: f64) -> (f64, f64, f64) {
    let (n, m) = (n as f64, m as f64);
    let c_lo = c_f * (2.0 * n + 1.0) * (m + 2.0) * (m + 2.0) + 17.0 * n * n * n;
    let c_ho = c_lo + 0.25 * c_f * (n + 1.0) * (m + 2.0) * (m + 4.0) + 6.0 * n * n * n;
    (c_lo, c_ho, c_ho / c_lo)
}

/// Largest steps meeting a per-step truncation tolerance, for the explicit
/// and the implicit method: `h_LO = (tol/||phi[m+1]||)^{1/(m+1)}` and
/// `h_HO = g(m) h_LO`, clamped to `[h_min, h_max]`.
pub fn predict_step(
    phi_m1_norm: f64,
    tol: f64,
    m: u32,
    h_min: f64,
    h_max: f64,
) -> (f64, f64) {
    let h_lo = if phi_m1_norm > 0.0 {
        (tol / phi_m1_norm).powf(1.0 / (m as f64 + 1.0))
    } else {
        h_max
    };
    let h_lo = h_lo.clamp(h_min, h_max);
    let h_ho = (step_ratio_g(m) * h_lo).clamp(h_min, h_max);
    (h_lo, h_ho)
}
