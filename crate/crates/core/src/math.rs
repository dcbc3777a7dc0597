//! Thin wrappers over `libm` so the rest of the crate reads like ordinary float code.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Round half away from zero.
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Square root that tolerates round-off below zero down to `-floor`.
#[inline]
pub fn clamped_sqrt(x: f64, floor: f64) -> Option<f64> {
    if x >= 0.0 {
        Some(sqrt(x))
    } else if x >= -floor {
        Some(0.0)
    } else {
        None
    }
}
