//! Directed rounding kernels for binary64.
//!
//! Instead of switching the FPU rounding mode (global, thread-hostile, and
//! unavailable on wasm), every kernel computes the round-to-nearest result
//! and recovers the sign of its rounding error through an error-free
//! transformation (two-sum for `+`/`-`, an FMA residual for `*`, `/` and
//! `sqrt`). The result is then nudged one ulp in the required direction only
//! when the error actually points the wrong way, so exact operations stay
//! exact: `add_down(1.0, 2.0) == 3.0`, not the next float below.
//!
//! The FMA residual is only guaranteed to be exactly representable away from
//! the underflow range. Below `EFT_SAFE` the kernels give up on exactness
//! detection and widen unconditionally, which is always sound.

/// Magnitudes below this fall back to unconditional 1-ulp widening.
/// The product/quotient residual theorems need the result well clear of the
/// subnormal range (2^-969); 1e-280 leaves a wide margin.
const EFT_SAFE: f64 = 1e-280;

/// Smallest positive subnormal.
const TINY: f64 = f64::from_bits(1);

/// Error of the rounded sum `s = fl(a + b)` (Knuth two-sum).
/// Exact for all finite inputs as long as `s` itself is finite.
#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    let e = two_sum_err(a, b, s);
    if e < 0.0 || e.is_nan() {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    let e = two_sum_err(a, b, s);
    if e > 0.0 || e.is_nan() {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    if p == 0.0 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        // Nonzero product underflowed to zero; its sign decides the bound.
        return if (a > 0.0) == (b > 0.0) { 0.0 } else { -TINY };
    }
    if p.abs() < EFT_SAFE {
        return p.next_down();
    }
    let e = f64::mul_add(a, b, -p);
    if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return if p > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    if p == 0.0 {
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        return if (a > 0.0) == (b > 0.0) { TINY } else { 0.0 };
    }
    if p.abs() < EFT_SAFE {
        return p.next_up();
    }
    let e = f64::mul_add(a, b, -p);
    if e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Lower bound of `a / b`; the caller guarantees `b != 0`.
#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return if q > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    if a == 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        return if (a > 0.0) == (b > 0.0) { 0.0 } else { -TINY };
    }
    if q.abs() < EFT_SAFE || a.abs() < EFT_SAFE {
        return q.next_down();
    }
    // r = q*b - a; the true quotient is q - r/b.
    let r = f64::mul_add(q, b, -a);
    let err_sign = if b > 0.0 { -r } else { r };
    if err_sign < 0.0 {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return if q > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    if a == 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        return if (a > 0.0) == (b > 0.0) { TINY } else { 0.0 };
    }
    if q.abs() < EFT_SAFE || a.abs() < EFT_SAFE {
        return q.next_up();
    }
    let r = f64::mul_add(q, b, -a);
    let err_sign = if b > 0.0 { -r } else { r };
    if err_sign > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Lower bound of `sqrt(a)` for `a >= 0`.
#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if a < EFT_SAFE {
        return s.next_down().max(0.0);
    }
    let r = f64::mul_add(s, s, -a);
    if r > 0.0 {
        s.next_down()
    } else {
        s
    }
}

/// Upper bound of `sqrt(a)` for `a >= 0`.
#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let s = a.sqrt();
    if a < EFT_SAFE {
        return s.next_up();
    }
    let r = f64::mul_add(s, s, -a);
    if r < 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// `t^k` rounded down, for `t >= 0`, `k >= 1` (binary exponentiation;
/// chained lower bounds stay lower bounds because every factor is >= 0).
pub fn pow_down_nonneg(t: f64, k: u32) -> f64 {
    debug_assert!(t >= 0.0 && k >= 1);
    let mut acc: f64 = 1.0;
    let mut base = t;
    let mut n = k;
    loop {
        if n & 1 == 1 {
            acc = if acc == 1.0 { base } else { mul_down(acc, base) };
        }
        n >>= 1;
        if n == 0 {
            return acc;
        }
        base = mul_down(base, base);
    }
}

/// `t^k` rounded up, for `t >= 0`, `k >= 1`.
pub fn pow_up_nonneg(t: f64, k: u32) -> f64 {
    debug_assert!(t >= 0.0 && k >= 1);
    let mut acc: f64 = 1.0;
    let mut base = t;
    let mut n = k;
    loop {
        if n & 1 == 1 {
            acc = if acc == 1.0 { base } else { mul_up(acc, base) };
        }
        n >>= 1;
        if n == 0 {
            return acc;
        }
        base = mul_up(base, base);
    }
}
