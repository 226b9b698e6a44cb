//! Minimizes the action over planar mean-zero loops and checks the minimizer
//! against the lower bound `3 (inf IU² π²/2)^{1/3} T^{1/3}`.
//!
//! Run with:
//!   cargo run --release --example action_minimization

use std::f64::consts::PI;
use std::time::Instant;

use nbody_loops::variational::{self, ActionOptions};
use nbody_loops::MassVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let period = 2.0 * PI;
    for masses in [vec![1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]] {
        let m = MassVector::new(masses.clone())?;
        let start = Instant::now();
        let (lp, report) = variational::minimize_action(&m, period, 4, &ActionOptions::default())?;
        println!("masses {masses:?}  ({:.2?})", start.elapsed());
        println!("  action       {:.10}", report.action);
        println!(
            "  lower bound  {:.10}  (inf IU² = {:.10})",
            report.lower_bound, report.inf_iu2
        );
        println!(
            "  h=1 energy   {:.3e} short of 1",
            1.0 - report.condition_i.first_harmonic_energy_fraction
        );
        println!(
            "  |ω²I − U|/U  {:.3e}",
            report.condition_ii.max_relative_deviation
        );
        println!(
            "  IU² excess   {:.3e}",
            report.condition_iii.max_relative_excess
        );
        println!("  relative equilibrium: {}", report.relative_equilibrium);
        println!(
            "  {} iterations, {} restarts",
            report.iterations, report.restarts
        );

        let q = lp.position(0.0);
        for i in 0..q.len() {
            println!("  q_{i}(0) = ({:+.6}, {:+.6})", q.body(i)[0], q.body(i)[1]);
        }
    }
    Ok(())
}
