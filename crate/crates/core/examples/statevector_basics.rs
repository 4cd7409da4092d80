//! Build a Bell pair, rotate it and read Pauli-Z expectations.

use std::f64::consts::FRAC_PI_2;

use aecqtl::{AngleSource, GateOp, StateVector};

fn main() -> aecqtl::Result<()> {
    let mut s = StateVector::zero(2)?;
    s.apply_gate(&GateOp::h(0), &[])?;
    s.apply_gate(&GateOp::cnot(0, 1), &[])?;
    println!("Bell pair amplitudes (index bit 0 = qubit 0):");
    for (i, a) in s.amplitudes().iter().enumerate() {
        println!("  |{i:02b}> {a:.4}");
    }
    println!("<Z0> = {:+.4}, <Z1> = {:+.4}", s.expect_z(0)?, s.expect_z(1)?);

    s.apply_gate(&GateOp::ry(1, AngleSource::Fixed(FRAC_PI_2)), &[FRAC_PI_2])?;
    println!("after RY(pi/2) on qubit 1: <Z1> = {:+.4}", s.expect_z(1)?);

    // amplitude encoding pads to 2^n and normalizes
    let x = [3.0, 0.0, 4.0];
    let enc = StateVector::amplitude_encode(&x, 2)?;
    println!("encode {x:?} -> {:?}", enc.amplitudes().iter().map(|a| a.re).collect::<Vec<_>>());
    println!("norm^2 = {}", enc.norm_sqr());
    Ok(())
}
