use super::apply::{Mat4, MAT4_IDENTITY};
use super::Gate;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

type Mat2 = [Complex64; 4];

const fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const I2: Mat2 = [re(1.0), re(0.0), re(0.0), re(1.0)];
const X2: Mat2 = [re(0.0), re(1.0), re(1.0), re(0.0)];
const Z2: Mat2 = [re(1.0), re(0.0), re(0.0), re(-1.0)];
const H2: Mat2 = [re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)];

fn t2() -> Mat2 {
    [re(1.0), re(0.0), re(0.0), Complex64::from_polar(1.0, FRAC_PI_4)]
}

fn s2() -> Mat2 {
    [re(1.0), re(0.0), re(0.0), Complex64::new(0.0, 1.0)]
}

pub(crate) fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [re(0.0); 16];
    for x in 0..2 {
        for y in 0..2 {
            for xp in 0..2 {
                for yp in 0..2 {
                    out[(2 * x + y) * 4 + 2 * xp + yp] = a[x * 2 + xp] * b[y * 2 + yp];
                }
            }
        }
    }
    out
}

fn from_real(rows: [[f64; 4]; 4]) -> Mat4 {
    let mut out = [re(0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = re(rows[r][c]);
        }
    }
    out
}

/// Library element by name; `None` for unknown names.
pub fn named_gate(name: &str) -> Option<Mat4> {
    let m = match name {
        "I" => MAT4_IDENTITY,
        "CNOT" => from_real([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]]),
        "CNOT_R" => from_real([[1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.], [0., 1., 0., 0.]]),
        "CZ" => from_real([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 1., 0.], [0., 0., 0., -1.]]),
        "SWAP" => from_real([[1., 0., 0., 0.], [0., 0., 1., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.]]),
        "HI" => kron2(&H2, &I2),
        "IH" => kron2(&I2, &H2),
        "TI" => kron2(&t2(), &I2),
        "IT" => kron2(&I2, &t2()),
        "XI" => kron2(&X2, &I2),
        "IX" => kron2(&I2, &X2),
        "XX" => kron2(&X2, &X2),
        "ZI" => kron2(&Z2, &I2),
        "IZ" => kron2(&I2, &Z2),
        "SI" => kron2(&s2(), &I2),
        "IS" => kron2(&I2, &s2()),
        _ => return None,
    };
    Some(m)
}

/// Names of the default exact-enumeration set (identity first).
pub const DEFAULT_SET: [&str; 12] = ["I", "CNOT", "CNOT_R", "CZ", "SWAP", "HI", "IH", "TI", "IT", "XI", "IX", "XX"];

pub fn standard_gates() -> Vec<Gate> {
    DEFAULT_SET.iter().map(|n| Gate::unitary(n, named_gate(n).expect("library name"))).collect()
}
