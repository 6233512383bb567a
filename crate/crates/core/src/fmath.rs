//! Float helpers routed through `libm` so `std` and `no_std` builds produce
//! identical bits, plus the angle-wrapping conventions used across the crate.

pub use core::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

// sqrt is correctly rounded by IEEE 754, so the hardware instruction and
// libm agree bit-for-bit; prefer the intrinsic where std exists because it
// vectorizes inside hot loops.
#[cfg(feature = "std")]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle - TWO_PI * floor(angle / TWO_PI);
    // a is now in [0, 2*pi); shift the upper half down.
    if a > PI {
        a -= TWO_PI;
    }
    a
}

/// Wrapped difference `a - b`, in (-pi, pi].
#[inline]
pub fn wrap_angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

#[inline]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}
