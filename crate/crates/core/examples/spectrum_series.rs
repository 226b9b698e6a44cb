//! Fourier coefficients of the potential along a two-body loop, from the
//! hypergeometric pair series and from quadrature, plus the series behaviour
//! at `C = 1`.
//!
//!   cargo run --release --example spectrum_series

use std::f64::consts::PI;

use nbody_loops::harmonics::{self, TrigLoop};
use nbody_loops::{Configuration, MassVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Configuration::new(2, vec![0.5, 0.0, -0.5, 0.0])?;
    let b = Configuration::new(2, vec![0.1, 0.3, -0.1, -0.3])?;
    let lp = TrigLoop::new(MassVector::equal(2)?, 2.0 * PI, a, b)?;
    let pair = harmonics::pair_harmonics(&lp)?[0];
    println!("A = {:.6}  B = {:.6}  C = {:.6}", pair.a, pair.b, pair.c);

    println!(
        "{:>3} {:>22} {:>22} {:>10}",
        "n", "series", "quadrature", "rel err"
    );
    for row in harmonics::spectrum_table(&lp, 8, 1024)? {
        let err = (row.series_value - row.quadrature_value).abs()
            / row.quadrature_value.abs().max(f64::MIN_POSITIVE);
        println!(
            "{:>3} {:>22.15e} {:>22.15e} {:>10.2e}",
            row.n, row.series_value, row.quadrature_value, err
        );
    }

    for n in 1..=3 {
        let (p, q) = harmonics::series_term_ratio_exact(n, 0);
        let g = harmonics::gauss_test(n);
        println!(
            "n = {n}: first ratio {p}/{q}, at C = 1 μ = {}, β = {}, convergent = {}",
            g.mu, g.beta, g.convergent
        );
    }

    let colliding = TrigLoop::new(
        MassVector::equal(2)?,
        2.0 * PI,
        Configuration::new(2, vec![0.5, 0.0, -0.5, 0.0])?,
        Configuration::new(2, vec![0.0, 0.0, 0.0, 0.0])?,
    )?;
    let unit = harmonics::pair_harmonics(&colliding)?[0];
    let sums = harmonics::series_partial_sums(&unit, 1, 100_000);
    for k in [10, 1000, 100_000] {
        println!("C = 1, partial sum after {k:>6} terms: {:.6}", sums[k - 1]);
    }
    match harmonics::fourier_coefficient_series(&unit, 1, harmonics::SERIES_TOL) {
        Ok(c) => println!("C = 1 series: {c:?}"),
        Err(e) => println!("C = 1 series: {e}"),
    }
    Ok(())
}
