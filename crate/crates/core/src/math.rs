//! Thin wrappers over `libm` so the rest of the crate never touches std
//! float intrinsics directly (keeps the crate `no_std`). All logs are base 2:
//! every rate and entropy in this crate is in bits.

pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub(crate) fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `-p * log2(p)` with the 0*log(0) := 0 convention used everywhere here.
pub(crate) fn neg_xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        -p * libm::log2(p)
    } else {
        0.0
    }
}
