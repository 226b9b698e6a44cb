//! Minimizes `I·U²` for a few mass vectors and compares the collinear and
//! planar infima.
//!
//!   cargo run --release --example central_configurations

use nbody_loops::central_config::{self, MinimizeOptions};
use nbody_loops::{mechanics, MassVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = MinimizeOptions::default();
    for masses in [
        vec![1.0, 1.0],
        vec![1.0, 1.0, 1.0],
        vec![1.0, 2.0, 3.0],
        vec![1.0; 4],
    ] {
        let m = MassVector::new(masses.clone())?;
        let cmp = central_config::compare_dimensions(&m, &opts)?;
        println!("masses {masses:?}");
        println!("  inf IU² on a line   {:.12}", cmp.inf_d1());
        println!(
            "  inf IU² in a plane  {:.12}  ({:?})",
            cmp.inf_d2(),
            cmp.ordering
        );
        let r = &cmp.planar;
        println!(
            "  λ = {:.12}  residual {:.2e}  {} starts",
            r.lambda, r.residual, r.starts_used
        );
        let (dmin, j, k) = r.q.min_pair_distance();
        println!(
            "  closest pair ({j}, {k}) at {dmin:.6}, U = {:.12}",
            mechanics::potential(&m, &r.q)?
        );
    }
    Ok(())
}
