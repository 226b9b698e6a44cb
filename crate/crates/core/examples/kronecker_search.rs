//! Simultaneous Diophantine approximation: integers `k` with every `kθ_i`
//! near an integer.
//!
//!   cargo run --release --example kronecker_search

use nbody_loops::kronecker::{self, KroneckerQuery, Window};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());

    let q = KroneckerQuery::new(vec![s2], 0.01, 200, Window::NearZeroOrOne)?;
    let hits: Vec<u64> = kronecker::simultaneous_approx(&q)
        .iter()
        .map(|h| h.k)
        .collect();
    println!("√2, ε = 0.01, k ≤ 200: {hits:?}");
    println!(
        "continued-fraction denominators: {:?}",
        kronecker::convergent_denominators(s2, 200)
    );

    let q = KroneckerQuery::new(vec![s2, s3], 0.01, 10_000, Window::NearZeroOrOne)?;
    if let Some(h) = kronecker::first_hit(&q) {
        println!(
            "(√2, √3), ε = 0.01: first k = {}, deviations {:?}",
            h.k, h.deviations
        );
    }

    // phases in turns; the quarter window is cos(2πkθ_i) > 0
    let q = KroneckerQuery::quarter(vec![0.3, 0.7], 1000)?;
    if let Some(h) = kronecker::first_hit(&q) {
        println!("cos(2πk·0.3) > 0 and cos(2πk·0.7) > 0 first at k = {}", h.k);
    }

    let target = [0.5, 0.25];
    match kronecker::denseness_witness(&[s2, s3], &target, 0.01, 100_000)? {
        Some(k) => println!("{{k(√2, √3)}} within 0.01 of {target:?} at k = {k}"),
        None => println!("no k ≤ 100000 reaches {target:?}"),
    }
    Ok(())
}
