//! Canonical example circuits used across experiments and tests.

use std::f64::consts::PI;

use crate::circuit::Circuit;

/// `U = R_z(pi/4) R_y(pi/2)` on one qubit, both gates noisy.
pub fn intro_u(eps_bar: f64) -> Circuit {
    let mut c = Circuit::new(1).expect("1 qubit");
    c.push("rz", &[PI / 4.0], &[0], true).unwrap();
    c.push("ry", &[PI / 2.0], &[0], true).unwrap();
    c.with_noise(eps_bar)
}

/// `U' = R_z(-3pi/4) R_y(-pi/2)`: same output state on `|0>` as [`intro_u`]
/// up to a global phase, but with a larger Lipschitz bound.
pub fn intro_u_prime(eps_bar: f64) -> Circuit {
    let mut c = Circuit::new(1).expect("1 qubit");
    c.push("rz", &[-3.0 * PI / 4.0], &[0], true).unwrap();
    c.push("ry", &[-PI / 2.0], &[0], true).unwrap();
    c.with_noise(eps_bar)
}

/// Hardware-style realization A of the intro state over `{rz, sx, x}`:
/// apply `sx`, then `rz(pi/4)`, then `x`. Only the `rz` is noise
/// susceptible, so the Lipschitz bound is exactly `pi/8`.
pub fn validation_a(eps_bar: f64) -> Circuit {
    let mut c = Circuit::new(1).expect("1 qubit");
    c.apply("sx", &[], &[0], false).unwrap();
    c.apply("rz", &[PI / 4.0], &[0], true).unwrap();
    c.apply("x", &[], &[0], false).unwrap();
    c.with_noise(eps_bar)
}

/// Hardware-style realization B of the same state: apply `sx`,
/// `rz(-pi/2)`, `sx`, `rz(-3pi/4)`. The two noisy `rz` gates give a
/// Lipschitz bound of `pi/4 + 3pi/8 = 5pi/8`.
pub fn validation_b(eps_bar: f64) -> Circuit {
    let mut c = Circuit::new(1).expect("1 qubit");
    c.apply("sx", &[], &[0], false).unwrap();
    c.apply("rz", &[-PI / 2.0], &[0], true).unwrap();
    c.apply("sx", &[], &[0], false).unwrap();
    c.apply("rz", &[-3.0 * PI / 4.0], &[0], true).unwrap();
    c.with_noise(eps_bar)
}
