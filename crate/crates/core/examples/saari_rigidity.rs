//! Rigidity of trigonometric loops: a rigidly rotating equilateral triangle,
//! where the potential is constant, and a perturbed loop where it is not.
//!
//!   cargo run --release --example saari_rigidity

use std::f64::consts::PI;

use nbody_loops::harmonics::{self, TrigLoop, CONSTANCY_TOL, RIGIDITY_TOL};
use nbody_loops::{Configuration, MassVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = 3f64.sqrt() / 2.0;
    let a = Configuration::new(2, vec![1.0, 0.0, -0.5, s, -0.5, -s])?;
    let b = Configuration::new(2, vec![0.0, 1.0, -s, -0.5, s, -0.5])?;
    let m = MassVector::equal(3)?;

    let rigid = TrigLoop::new(m.clone(), 2.0 * PI, a.clone(), b.clone())?;
    let cert = harmonics::rigidity_certificate(&rigid, CONSTANCY_TOL, 1000)?;
    println!("rotating triangle");
    println!(
        "  U spread {:.2e}, rigid = {}, consistent = {}",
        cert.relative_spread, cert.rigid, cert.consistent
    );

    let mut wobble = b.clone();
    wobble.coords_mut()[0] += 0.2;
    wobble.coords_mut()[2] -= 0.2;
    let moving = TrigLoop::new(m, 2.0 * PI, a, wobble)?;
    let report = harmonics::rigidity_check(&moving, RIGIDITY_TOL)?;
    println!(
        "perturbed loop: rigid = {}, max C = {:.4}",
        report.rigid, report.max_c
    );
    for p in &report.pairs {
        println!(
            "  pair ({}, {})  A = {:.6}  B = {:.6}  θ = {:?}",
            p.j, p.k, p.a, p.b, p.theta
        );
    }
    let u: Vec<f64> = harmonics::sample_mechanics(&moving, 1024)?
        .iter()
        .map(|s| s.potential)
        .collect();
    println!("  U spread {:.4e}", harmonics::relative_spread(&u));
    match harmonics::rigidity_certificate(&moving, CONSTANCY_TOL, 1000) {
        Ok(c) => println!("  certificate: {c:?}"),
        Err(e) => println!("  certificate refused: {e}"),
    }
    Ok(())
}
