//! Builds rotating relative equilibria from central configurations and checks
//! that they solve Newton's equations.
//!
//!   cargo run --release --example relative_equilibrium

use nbody_loops::central_config::{self, MinimizeOptions};
use nbody_loops::harmonics;
use nbody_loops::variational::{self, Frequency};
use nbody_loops::{mechanics, MassVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for masses in [vec![1.0, 1.0, 1.0], vec![3.0, 1.0, 0.5, 2.0]] {
        let m = MassVector::new(masses.clone())?;
        let central = central_config::minimize_iu2(&m, 2, &MinimizeOptions::default())?;
        for frequency in [Frequency::FromLambda, Frequency::Period(1.0)] {
            let lp = variational::build_relative_equilibrium(&central, frequency)?;
            let worst = (0..256)
                .map(|s| {
                    let t = lp.period() * s as f64 / 256.0;
                    mechanics::newton_residual(&m, &lp.position(t), &lp.acceleration(t))
                })
                .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))?;
            let rigid = harmonics::rigidity_check(&lp, harmonics::RIGIDITY_TOL)?.rigid;
            println!("masses {masses:?}  {frequency:?}: T = {:.10}, Newton residual {worst:.2e}, rigid = {rigid}", lp.period());
        }
    }
    Ok(())
}
