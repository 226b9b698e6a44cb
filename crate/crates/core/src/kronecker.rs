//! Simultaneous approximation: integers `k` for which every `k θ_i` lies close
//! to an integer, and density witnesses for the orbit `({k θ_1}, …, {k θ_n})`
//! in the unit cube.
//!
//! The search is an exhaustive scan of `k = 1..=k_max`, so it needs no
//! hypothesis on the `θ_i`. A continued-fraction shortcut is available for a
//! single `θ`.

use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Fractional parts this close to 1 count as zero deviation.
pub const WRAP_TOL: f64 = 1e-12;
pub const DEFAULT_K_MAX: u64 = 1_000_000;

const CHUNK: u64 = 1 << 15;

/// `{x} = x − [x]` with `[x]` the largest integer not exceeding `x`.
pub fn fractional_part(x: f64) -> f64 {
    let f = x - x.floor();
    // x slightly below an integer can round to exactly 1
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance from `{x}` to the nearest integer, i.e. `min({x}, 1 − {x})`.
pub fn deviation(x: f64) -> f64 {
    let f = fractional_part(x);
    if 1.0 - f <= WRAP_TOL {
        0.0
    } else {
        f.min(1.0 - f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `{kθ} < ε` or `{kθ} > 1 − ε`.
    NearZeroOrOne,
    /// `{kθ} ∈ [0, ¼) ∪ (¾, 1)`, i.e. `cos(2π k θ) > 0`.
    QuarterWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerQuery {
    theta: Vec<f64>,
    epsilon: f64,
    k_max: u64,
    window: Window,
}

impl KroneckerQuery {
    pub fn new(theta: Vec<f64>, epsilon: f64, k_max: u64, window: Window) -> Result<Self> {
        if theta.is_empty() {
            return Err(invalid("at least one theta is required"));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(invalid("theta values must be finite"));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(invalid(format!(
                "epsilon must lie in (0, 1/2), got {epsilon}"
            )));
        }
        if k_max == 0 {
            return Err(invalid("k_max must be at least 1"));
        }
        Ok(Self {
            theta,
            epsilon,
            k_max,
            window,
        })
    }

    /// Quarter-window query: only the phases matter, epsilon is fixed at ¼.
    pub fn quarter(theta: Vec<f64>, k_max: u64) -> Result<Self> {
        Self::new(theta, 0.25, k_max, Window::QuarterWindow)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// Deviations must be strictly below this.
    pub fn threshold(&self) -> f64 {
        match self.window {
            Window::NearZeroOrOne => self.epsilon,
            Window::QuarterWindow => 0.25,
        }
    }

    fn test(&self, k: u64) -> Option<KroneckerHit> {
        let limit = self.threshold();
        let kf = k as f64;
        let mut deviations = Vec::with_capacity(self.theta.len());
        for t in &self.theta {
            let d = deviation(kf * t);
            if d >= limit {
                return None;
            }
            deviations.push(d);
        }
        Some(KroneckerHit { k, deviations })
    }

    /// Recomputes the deviations of `hit` from scratch and checks the window.
    pub fn validates(&self, hit: &KroneckerHit) -> bool {
        self.test(hit.k).is_some_and(|h| h == *hit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerHit {
    pub k: u64,
    /// `min({kθ_i}, 1 − {kθ_i})` per component.
    pub deviations: Vec<f64>,
}

/// Every `k ≤ k_max` satisfying the query, in increasing order. An empty list
/// is a normal outcome for finite `k_max`.
pub fn simultaneous_approx(query: &KroneckerQuery) -> Vec<KroneckerHit> {
    let chunks = query.k_max.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let lo = c * CHUNK + 1;
            let hi = ((c + 1) * CHUNK).min(query.k_max);
            (lo..=hi).filter_map(|k| query.test(k))
        })
        .collect()
}

/// The smallest hit, if any.
pub fn first_hit(query: &KroneckerQuery) -> Option<KroneckerHit> {
    (1..=query.k_max)
        .into_par_iter()
        .find_map_first(|k| query.test(k))
}

fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Smallest `k ≤ k_max` with `max_i |{kθ_i} − target_i| < ε` on the circle.
pub fn denseness_witness(
    theta: &[f64],
    target: &[f64],
    epsilon: f64,
    k_max: u64,
) -> Result<Option<u64>> {
    if theta.is_empty() || theta.len() != target.len() {
        return Err(invalid(
            "theta and target must be non-empty and of equal length",
        ));
    }
    if target.iter().any(|t| !(0.0..1.0).contains(t)) {
        return Err(invalid("target must lie in [0, 1)^n"));
    }
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    Ok((1..=k_max).into_par_iter().find_first(|&k| {
        let kf = k as f64;
        theta
            .iter()
            .zip(target)
            .all(|(t, g)| wrap_distance(fractional_part(kf * t), *g) < epsilon)
    }))
}

/// Denominators of the continued-fraction convergents of `theta` up to
/// `k_max`. For a single `θ` these are the best approximation denominators,
/// so the smallest deviations in any range `1..=k` occur among them.
pub fn convergent_denominators(theta: f64, k_max: u64) -> Vec<u64> {
    let mut out = vec![1];
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut x = theta - theta.floor();
    while x > 1e-15 {
        let inv = 1.0 / x;
        let a = inv.floor();
        if a > k_max as f64 {
            break;
        }
        let next = (a as u64).saturating_mul(q).saturating_add(q_prev);
        if next > k_max {
            break;
        }
        out.push(next);
        q_prev = q;
        q = next;
        x = inv - a;
    }
    out
}

/// Fast path for a single `θ`: the convergent denominators that satisfy the
/// query. Not exhaustive; use [`simultaneous_approx`] for the full list.
pub fn convergent_hits(query: &KroneckerQuery) -> Result<Vec<KroneckerHit>> {
    let [theta] = query.theta() else {
        return Err(invalid(
            "the continued-fraction path takes exactly one theta",
        ));
    };
    Ok(convergent_denominators(*theta, query.k_max)
        .into_iter()
        .filter_map(|k| query.test(k))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn fractional_part_examples() {
        assert_eq!(fractional_part(2.0), 0.0);
        assert_eq!(fractional_part(-1.25), 0.75);
        assert_eq!(fractional_part(0.999), 0.999);
        assert_eq!(fractional_part(-1e-20), 0.0);
    }

    #[test]
    fn rational_half() {
        let q = KroneckerQuery::new(vec![0.5], 0.1, 10, Window::NearZeroOrOne).unwrap();
        let hits = simultaneous_approx(&q);
        assert_eq!(
            hits.iter().map(|h| h.k).collect::<Vec<_>>(),
            vec![2, 4, 6, 8, 10]
        );
        assert!(hits.iter().all(|h| h.deviations == vec![0.0]));
    }

    #[test]
    fn sqrt2_and_golden_ratio() {
        let q = KroneckerQuery::new(vec![2f64.sqrt()], 0.01, 200, Window::NearZeroOrOne).unwrap();
        let hits = simultaneous_approx(&q);
        let h = hits.iter().find(|h| h.k == 169).expect("169 is a hit");
        assert!((h.deviations[0] - 0.00209).abs() < 1e-4);
        // {99√2} ≈ 0.0071 is an intermediate hit
        assert_eq!(
            hits.iter().map(|h| h.k).collect::<Vec<_>>(),
            vec![70, 99, 169]
        );

        let q = KroneckerQuery::new(vec![PHI], 0.01, 100, Window::NearZeroOrOne).unwrap();
        let hits = simultaneous_approx(&q);
        assert!(hits.iter().any(|h| h.k == 55));
        assert!(fractional_part(55.0 * PHI) > 0.99);
    }

    #[test]
    fn convergents_of_sqrt2() {
        assert_eq!(
            convergent_denominators(2f64.sqrt(), 200),
            vec![1, 2, 5, 12, 29, 70, 169]
        );
        let q = KroneckerQuery::new(vec![2f64.sqrt()], 0.01, 200, Window::NearZeroOrOne).unwrap();
        let fast: Vec<u64> = convergent_hits(&q).unwrap().iter().map(|h| h.k).collect();
        assert_eq!(fast, vec![70, 169]);
    }

    #[test]
    fn quarter_window_phases() {
        let q = KroneckerQuery::quarter(vec![0.3, 0.7], 20).unwrap();
        let hits = simultaneous_approx(&q);
        assert_eq!(hits[0].k, 3);
        let ten = hits.iter().find(|h| h.k == 10).unwrap();
        assert!(ten.deviations.iter().all(|d| *d < 1e-12));
    }

    #[test]
    fn query_validation() {
        assert!(KroneckerQuery::new(vec![], 0.1, 10, Window::NearZeroOrOne).is_err());
        assert!(KroneckerQuery::new(vec![1.0], 0.5, 10, Window::NearZeroOrOne).is_err());
        assert!(KroneckerQuery::new(vec![1.0], 0.0, 10, Window::NearZeroOrOne).is_err());
        assert!(KroneckerQuery::new(vec![1.0], 0.1, 0, Window::NearZeroOrOne).is_err());
    }

    #[test]
    fn denseness_examples() {
        let s2 = 2f64.sqrt();
        let k = denseness_witness(&[s2], &[0.5], 0.05, 100)
            .unwrap()
            .unwrap();
        assert!((fractional_part(k as f64 * s2) - 0.5).abs() < 0.05);
        assert_eq!(
            denseness_witness(&[0.25], &[0.1], 0.01, 10_000).unwrap(),
            None
        );
        let k = denseness_witness(&[s2, 3f64.sqrt()], &[0.5, 0.5], 0.05, 1_000_000)
            .unwrap()
            .unwrap();
        // brute-force check that nothing smaller works
        let ok = |k: u64| {
            [s2, 3f64.sqrt()]
                .iter()
                .all(|t| wrap_distance(fractional_part(k as f64 * t), 0.5) < 0.05)
        };
        assert!(ok(k) && (1..k).all(|j| !ok(j)));
    }
}
