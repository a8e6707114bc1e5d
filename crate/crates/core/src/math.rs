//! Thin wrappers over `libm` so the numeric code reads like `std`.

pub use core::f64::consts::{PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Euclidean remainder into `[0, m)`.
#[inline]
pub fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = x - m * floor(x / m);
    if r >= m {
        0.0
    } else {
        r
    }
}

/// Smooth step: 0 for `d <= a`, 1 for `d >= b`, cosine in between.
#[inline]
pub fn cos_ramp(d: f64, a: f64, b: f64) -> f64 {
    if d <= a {
        0.0
    } else if d >= b {
        1.0
    } else {
        0.5 * (1.0 - cos(PI * (d - a) / (b - a)))
    }
}
