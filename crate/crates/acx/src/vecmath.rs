//! Small dense-vector helpers shared across the crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Largest float strictly below `x` (x finite, not -inf).
pub fn next_down(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let bits = x.to_bits();
    let next = if x > 0.0 {
        bits - 1
    } else if bits == 0 {
        // +0.0 -> smallest negative subnormal
        (1u64 << 63) | 1
    } else {
        bits + 1
    };
    f64::from_bits(next)
}

/// Smallest float strictly above `x` (x finite, not +inf).
pub fn next_up(x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let bits = x.to_bits();
    let next = if x >= 0.0 && bits & (1 << 63) == 0 {
        bits + 1
    } else if x == 0.0 {
        // -0.0 -> smallest positive subnormal
        1
    } else {
        bits - 1
    };
    f64::from_bits(next)
}
