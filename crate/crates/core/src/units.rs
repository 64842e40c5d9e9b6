//! Presentation helpers. Everything internal is in nats.

use std::f64::consts::LN_2;

pub fn to_bits(nats: f64) -> f64 {
    nats / LN_2
}

pub fn to_nats(bits: f64) -> f64 {
    bits * LN_2
}

/// Binary entropy in nats; h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    term(x) + term(1.0 - x)
}
