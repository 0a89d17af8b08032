//! Quintic smoothstep and its derivatives, used for every cutoff and blend.
//! The quintic `6u^5 - 15u^4 + 10u^3` has vanishing first and second
//! derivatives at both ends, so blends built from it are C^2.

pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (u * (6.0 * u - 15.0) + 10.0)
    }
}

pub fn smoothstep_d1(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        30.0 * u * u * (u - 1.0) * (u - 1.0)
    }
}

pub fn smoothstep_d2(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        60.0 * u * (2.0 * u * u - 3.0 * u + 1.0)
    }
}

/// Smoothstep rising from 0 at `a` to 1 at `b`.
pub fn ramp(x: f64, a: f64, b: f64) -> f64 {
    smoothstep((x - a) / (b - a))
}

pub fn ramp_d1(x: f64, a: f64, b: f64) -> f64 {
    smoothstep_d1((x - a) / (b - a)) / (b - a)
}

pub fn ramp_d2(x: f64, a: f64, b: f64) -> f64 {
    let w = b - a;
    smoothstep_d2((x - a) / w) / (w * w)
}
