//! Harmonic analysis of the potential along trigonometric loops
//! `q_i(t) = a_i cos(2πt/T) + b_i sin(2πt/T)`.
//!
//! Each pair's squared distance is a single second harmonic,
//! `|q_j − q_k|² = A + B cos(4πt/T + θ)`, so the pair's contribution to `U`
//! is `m_j m_k A^{-1/2} (1 + C cos φ)^{-1/2}` with `C = B/A`. Expanding that
//! binomially gives the Fourier coefficients of `U` at the frequencies
//! `4πn/T` as convergent series in `C²`. The module evaluates those series,
//! cross-checks them against a quadrature of sampled `U`, decides rigidity
//! (`B = 0` for every pair), and replays the phase-alignment argument that
//! turns a constant potential into rigidity.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::dd::{self, Dd};
use crate::error::{invalid, Error, Result};
use crate::kronecker::{self, KroneckerHit, KroneckerQuery};
use crate::mechanics::{self, Configuration, MassVector, DEGENERATE_DISTANCE};

/// Pairs with `B ≤ RIGIDITY_TOL · A` count as rigid.
pub const RIGIDITY_TOL: f64 = 1e-10;
/// `std(U)/mean(U)` below this counts as a constant potential.
pub const CONSTANCY_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 4096;
pub const SERIES_TOL: f64 = 1e-16;
pub const SERIES_CAP: usize = 1_000_000;
/// Term cap when `C = 1`, where the terms decay only like `1/l`.
pub const SERIES_CAP_UNIT: usize = 10_000_000;
/// The phase is left undefined when `B ≤ PHASE_TOL · A` (rounding level).
pub const PHASE_TOL: f64 = 1e-14;

const HYPOTHESIS_SAMPLES: usize = 1024;

/// Bodies moving on `q_i(t) = a_i cos(ωt) + b_i sin(ωt)`, `ω = 2π/T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigLoop {
    masses: MassVector,
    period: f64,
    a: Configuration,
    b: Configuration,
}

impl TrigLoop {
    pub fn new(
        masses: MassVector,
        period: f64,
        a: Configuration,
        b: Configuration,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if a.dim() != b.dim() || a.len() != b.len() || a.len() != masses.len() {
            return Err(invalid(
                "cosine and sine coefficients must match each other and the masses",
            ));
        }
        Ok(Self {
            masses,
            period,
            a,
            b,
        })
    }

    pub fn masses(&self) -> &MassVector {
        &self.masses
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &Configuration {
        &self.a
    }

    pub fn b(&self) -> &Configuration {
        &self.b
    }

    fn combine(&self, ca: f64, cb: f64) -> Configuration {
        let coords = self
            .a
            .coords()
            .iter()
            .zip(self.b.coords())
            .map(|(x, y)| ca * x + cb * y)
            .collect();
        Configuration::new(self.dim(), coords).expect("same shape as the coefficients")
    }

    pub fn position(&self, t: f64) -> Configuration {
        let (s, c) = (self.omega() * t).sin_cos();
        self.combine(c, s)
    }

    pub fn velocity(&self, t: f64) -> Configuration {
        let w = self.omega();
        let (s, c) = (w * t).sin_cos();
        self.combine(-w * s, w * c)
    }

    pub fn acceleration(&self, t: f64) -> Configuration {
        let w = self.omega();
        self.position(t).scaled(-w * w)
    }
}

/// Squared-distance harmonic of one pair: `|q_j − q_k|² = A + B cos(4πt/T + θ)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PairHarmonics {
    pub j: usize,
    pub k: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// In `[0, 2π)`; `None` when `B` vanishes to rounding.
    pub theta: Option<f64>,
    pub m_j: f64,
    pub m_k: f64,
}

impl PairHarmonics {
    pub fn theta_defined(&self) -> bool {
        self.theta.is_some()
    }

    /// `A + B cos(4πt/T + θ)`.
    pub fn squared_distance(&self, t: f64, period: f64) -> f64 {
        self.a + self.b * (4.0 * PI * t / period + self.theta.unwrap_or(0.0)).cos()
    }
}

pub fn pair_harmonics(lp: &TrigLoop) -> Result<Vec<PairHarmonics>> {
    let n = lp.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            let da: Vec<f64> =
                lp.a.body(j)
                    .iter()
                    .zip(lp.a.body(k))
                    .map(|(x, y)| x - y)
                    .collect();
            let db: Vec<f64> =
                lp.b.body(j)
                    .iter()
                    .zip(lp.b.body(k))
                    .map(|(x, y)| x - y)
                    .collect();
            let (aa, bb, ab) = (
                mechanics::dot(&da, &da),
                mechanics::dot(&db, &db),
                mechanics::dot(&da, &db),
            );
            let a = 0.5 * (aa + bb);
            if !(a > 0.0) {
                return Err(Error::DegeneratePair { j, k });
            }
            let p = 0.5 * (aa - bb);
            let b = p.hypot(ab);
            let theta = (b > PHASE_TOL * a).then(|| (-ab).atan2(p).rem_euclid(2.0 * PI));
            out.push(PairHarmonics {
                j,
                k,
                a,
                b,
                c: (b / a).min(1.0),
                theta,
                m_j: lp.masses[j],
                m_k: lp.masses[k],
            });
        }
    }
    Ok(out)
}

/// `c_{l+1} / c_l` as an exact fraction:
/// `(4l+2n+1)(4l+2n+3) / (16 (l+1)(l+n+1))`.
pub fn series_term_ratio_exact(n: u32, l: u64) -> (u128, u128) {
    let (n, l) = (n as u128, l as u128);
    (
        (4 * l + 2 * n + 1) * (4 * l + 2 * n + 3),
        16 * (l + 1) * (l + n + 1),
    )
}

/// `c_{l+1}/c_l = (2l+½+n)(2l+3/2+n) / (4(l+1)(l+1+n))`; tends to 1.
pub fn series_term_ratio(n: u32, l: u64) -> f64 {
    let (num, den) = series_term_ratio_exact(n, l);
    num as f64 / den as f64
}

/// `|binom(-1/2, n)| = Π_{i=1}^{n} (i − ½)/i`.
fn half_binomial(n: u32) -> f64 {
    (1..=n).map(|i| (i as f64 - 0.5) / i as f64).product()
}

/// Coefficient of `C^{2l}` relative to the leading term, summed: `Σ c_l C^{2l}`.
fn prefactor(ph: &PairHarmonics, n: u32) -> f64 {
    ph.m_j * ph.m_k / ph.a.sqrt() * half_binomial(n) * (0.5 * ph.c).powi(n as i32)
}

/// Gauss-test data for the bracketed series at `C = 1`:
/// `c_l / c_{l+1} = 1 + μ/l + β_l` with `β_l ~ β/l²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GaussTest {
    pub n: u32,
    pub mu: f64,
    /// `lim l² β_l`.
    pub beta: f64,
    /// Gauss's test: convergent iff `μ > 1`.
    pub convergent: bool,
}

/// Expands `c_l/c_{l+1} = (4l² + 4(n+2)l + 4(n+1)) / (4l² + 4(n+1)l + (n+½)(n+3/2))`.
pub fn gauss_test(n: u32) -> GaussTest {
    let nf = n as f64;
    let (p1, p0) = (4.0 * (nf + 2.0), 4.0 * (nf + 1.0));
    let (q1, q0) = (4.0 * (nf + 1.0), (nf + 0.5) * (nf + 1.5));
    let mu = (p1 - q1) / 4.0;
    // second order: (p0 − q0)/4 − q1 μ / 4
    let beta = (p0 - q0) / 4.0 - q1 * mu / 4.0;
    GaussTest {
        n,
        mu,
        beta,
        convergent: mu > 1.0,
    }
}

/// One pair's Fourier coefficient magnitude at harmonic `n` of `4π/T`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectralCoefficient {
    pub n: u32,
    /// Magnitude of the complex-exponential coefficient (half the cosine
    /// coefficient); non-negative.
    pub value: f64,
    pub terms_used: usize,
    /// Upper bound on the neglected tail, in the same units as `value`.
    pub tail_bound: f64,
}

struct SeriesRun {
    sum: f64,
    terms: usize,
    last: f64,
    converged: bool,
}

fn run_series(n: u32, c2: f64, tol: f64, cap: usize, mut on_partial: impl FnMut(f64)) -> SeriesRun {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut terms = 1;
    on_partial(sum);
    if c2 == 0.0 {
        return SeriesRun {
            sum,
            terms,
            last: 0.0,
            converged: true,
        };
    }
    let mut l = 0u64;
    while terms < cap {
        term *= series_term_ratio(n, l) * c2;
        l += 1;
        sum += term;
        terms += 1;
        on_partial(sum);
        if term < tol * sum {
            return SeriesRun {
                sum,
                terms,
                last: term,
                converged: true,
            };
        }
    }
    SeriesRun {
        sum,
        terms,
        last: term,
        converged: false,
    }
}

fn is_unit(c: f64) -> bool {
    c >= 1.0 - 1e-12
}

/// Tail bound `t ρ/(1 − ρ)` using `c_{l'+1}/c_{l'} ≤ max(1, 1 + (n − 3/2)/(2l+2))`
/// for every `l' ≥ l`.
fn tail_estimate(n: u32, c2: f64, l: usize, last: f64) -> f64 {
    let growth = (1.0 + (n as f64 - 1.5) / (2.0 * l as f64 + 2.0)).max(1.0);
    let rho = c2 * growth;
    if rho < 1.0 {
        last * rho / (1.0 - rho)
    } else {
        f64::INFINITY
    }
}

fn coefficient_any(ph: &PairHarmonics, n: u32, tol: f64) -> Result<SpectralCoefficient> {
    if n >= 1 && ph.c == 0.0 {
        return Ok(SpectralCoefficient {
            n,
            value: 0.0,
            terms_used: 0,
            tail_bound: 0.0,
        });
    }
    let unit = is_unit(ph.c);
    let c2 = if unit { 1.0 } else { ph.c * ph.c };
    let cap = if unit { SERIES_CAP_UNIT } else { SERIES_CAP };
    let run = run_series(n, c2, tol, cap, |_| {});
    let pre = prefactor(ph, n);
    let tail = pre * tail_estimate(n, c2, run.terms - 1, run.last);
    if !run.converged {
        return Err(Error::SlowConvergence {
            n,
            terms: run.terms,
            partial_sum: pre * run.sum,
            tail_bound: tail,
        });
    }
    Ok(SpectralCoefficient {
        n,
        value: pre * run.sum,
        terms_used: run.terms,
        tail_bound: tail,
    })
}

/// `D^{(n)} = m_j m_k A^{-1/2} |binom(-½, n)| (C/2)^n Σ_l c_l C^{2l}`, summed
/// until the current term drops below `tol` times the partial sum.
pub fn fourier_coefficient_series(
    ph: &PairHarmonics,
    n: u32,
    tol: f64,
) -> Result<SpectralCoefficient> {
    if n == 0 {
        return Err(invalid("harmonic index must be at least 1"));
    }
    if !(0.0..=1.0).contains(&ph.c) {
        return Err(invalid(format!("C must lie in [0, 1], got {}", ph.c)));
    }
    coefficient_any(ph, n, tol)
}

/// The first `count` partial sums of [`fourier_coefficient_series`], scaled
/// like `D`.
pub fn series_partial_sums(ph: &PairHarmonics, n: u32, count: usize) -> Vec<f64> {
    let c2 = if is_unit(ph.c) { 1.0 } else { ph.c * ph.c };
    let pre = prefactor(ph, n);
    let mut out = Vec::with_capacity(count);
    run_series(n, c2, 0.0, count, |s| out.push(pre * s));
    out
}

/// Complex Fourier coefficient of `U(q(t))` at frequency `4πn/T` built from
/// the pair series: `Σ_pairs (−1)^n D_jk e^{i n θ_jk}`.
pub fn series_spectrum(lp: &TrigLoop, n: u32, tol: f64) -> Result<Complex64> {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut total = Complex64::new(0.0, 0.0);
    for ph in pair_harmonics(lp)? {
        let d = coefficient_any(&ph, n, tol)?.value;
        let phase = n as f64 * ph.theta.unwrap_or(0.0);
        total += Complex64::from_polar(sign * d, phase);
    }
    Ok(total)
}

/// `U` sampled at `t_s = sT/S` in double-double precision.
struct SampledPotential {
    values: Vec<Dd>,
    roots: Vec<(Dd, Dd)>,
}

impl SampledPotential {
    fn new(lp: &TrigLoop, samples: usize) -> Result<Self> {
        if !samples.is_power_of_two() || samples < 8 {
            return Err(invalid(format!(
                "sample count must be a power of two of at least 8, got {samples}"
            )));
        }
        let roots = dd::unit_roots(samples);
        let (n, dim) = (lp.len(), lp.dim());
        let m = lp.masses.as_slice();
        let total_mass = lp.masses.total();
        let mut values = Vec::with_capacity(samples);
        for (s, &(cs, sn)) in roots.iter().enumerate() {
            let pos: Vec<Dd> =
                lp.a.coords()
                    .iter()
                    .zip(lp.b.coords())
                    .map(|(x, y)| cs.mul_f64(*x) + sn.mul_f64(*y))
                    .collect();
            let inertia: f64 = (0..n)
                .map(|i| m[i] * (0..dim).map(|c| pos[i * dim + c].hi.powi(2)).sum::<f64>())
                .sum();
            let threshold = DEGENERATE_DISTANCE * (inertia / total_mass).sqrt();
            let mut u = Dd::ZERO;
            for j in 0..n {
                for k in j + 1..n {
                    let mut r2 = Dd::ZERO;
                    for c in 0..dim {
                        let d = pos[j * dim + c] - pos[k * dim + c];
                        r2 = r2 + d * d;
                    }
                    let r = r2.hi.sqrt();
                    if !(r > threshold) {
                        let _ = s;
                        return Err(Error::Collision {
                            j,
                            k,
                            distance: r,
                            threshold,
                        });
                    }
                    u = u + Dd::prod(m[j], m[k]) * r2.rsqrt();
                }
            }
            values.push(u);
        }
        Ok(Self { values, roots })
    }

    /// `(1/S) Σ_s U_s e^{−2πi·index·s/S}`.
    fn coefficient(&self, index: usize) -> Complex64 {
        let len = self.values.len();
        let (mut re, mut im) = (Dd::ZERO, Dd::ZERO);
        for (s, u) in self.values.iter().enumerate() {
            let (c, sn) = self.roots[(index * s) % len];
            re = re + *u * c;
            im = im - *u * sn;
        }
        let inv = 1.0 / len as f64;
        Complex64::new(re.to_f64() * inv, im.to_f64() * inv)
    }
}

/// Discrete Fourier coefficients of `U(q(t))` at the DFT indices `indices`
/// (index `i` is frequency `2πi/T`).
pub fn potential_dft(lp: &TrigLoop, indices: &[usize], samples: usize) -> Result<Vec<Complex64>> {
    let sp = SampledPotential::new(lp, samples)?;
    Ok(indices.iter().map(|&i| sp.coefficient(i)).collect())
}

/// Fourier coefficients of `U(q(t))` at `4πn/T`, `n = 0..=n_max`, from
/// uniform sampling over one period.
pub fn potential_spectrum_quadrature(
    lp: &TrigLoop,
    n_max: usize,
    samples: usize,
) -> Result<Vec<Complex64>> {
    if samples < 8 * n_max {
        return Err(invalid(format!(
            "{samples} samples cannot resolve {n_max} harmonics (need at least {})",
            8 * n_max
        )));
    }
    let indices: Vec<usize> = (0..=n_max).map(|n| 2 * n).collect();
    potential_dft(lp, &indices, samples)
}

/// One row of the series-versus-quadrature comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub series_value: f64,
    pub quadrature_value: f64,
}

pub fn spectrum_table(lp: &TrigLoop, n_max: usize, samples: usize) -> Result<Vec<SpectrumRow>> {
    let quad = potential_spectrum_quadrature(lp, n_max, samples)?;
    quad.iter()
        .enumerate()
        .map(|(n, q)| {
            let series = series_spectrum(lp, n as u32, SERIES_TOL)?;
            Ok(SpectrumRow {
                n,
                re: q.re,
                im: q.im,
                series_value: series.norm(),
                quadrature_value: q.norm(),
            })
        })
        .collect()
}

/// Mechanical quantities at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub t: f64,
    pub potential: f64,
    pub inertia: f64,
    pub kinetic: f64,
}

pub fn sample_mechanics(lp: &TrigLoop, samples: usize) -> Result<Vec<LoopSample>> {
    (0..samples)
        .map(|s| {
            let t = lp.period * s as f64 / samples as f64;
            let q = lp.position(t);
            Ok(LoopSample {
                t,
                potential: mechanics::potential(&lp.masses, &q)?,
                inertia: mechanics::moment_of_inertia(&lp.masses, &q),
                kinetic: mechanics::kinetic_energy(&lp.masses, &lp.velocity(t)),
            })
        })
        .collect()
}

/// Population standard deviation over mean.
pub fn relative_spread(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RigidityReport {
    pub rigid: bool,
    pub max_c: f64,
    /// `√A` per pair, the constant mutual distance when the loop is rigid.
    pub distances: Vec<f64>,
    pub pairs: Vec<PairHarmonics>,
}

/// Rigid iff `B ≤ tol · A` for every pair.
pub fn rigidity_check(lp: &TrigLoop, tol: f64) -> Result<RigidityReport> {
    let pairs = pair_harmonics(lp)?;
    let max_c = pairs.iter().map(|p| p.c).fold(0.0, f64::max);
    Ok(RigidityReport {
        rigid: pairs.iter().all(|p| p.b <= tol * p.a),
        max_c,
        distances: pairs.iter().map(|p| p.a.sqrt()).collect(),
        pairs,
    })
}

/// Smallest `n ≤ k_max` with every `n θ_i / 2π` within ¼ of an integer,
/// i.e. `cos(n θ_i) > 0` for all `i`.
pub fn align_phases(thetas: &[f64], k_max: u64) -> Result<KroneckerHit> {
    let turns: Vec<f64> = thetas.iter().map(|t| t / (2.0 * PI)).collect();
    let query = KroneckerQuery::quarter(turns, k_max)?;
    kronecker::first_hit(&query).ok_or(Error::SearchExhausted { k_max })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CertifiedPair {
    pub j: usize,
    pub k: usize,
    pub theta: f64,
    pub d: f64,
    pub cos_n_theta: f64,
}

/// Outcome of replaying the rigidity argument on a loop with constant `U`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RigidityCertificate {
    pub relative_spread: f64,
    /// Aligning harmonic; `None` when no pair has `B > 0` (trivially rigid).
    pub harmonic: Option<u64>,
    pub pairs: Vec<CertifiedPair>,
    /// `Σ D cos(nθ)`, a sum of non-negative terms that must vanish.
    pub weighted_sum: f64,
    /// `|c_n|` of the sampled potential at the aligning harmonic.
    pub quadrature_magnitude: f64,
    /// Every `D` is bounded by `weighted_sum / min cos(nθ)`.
    pub d_bound: f64,
    pub rigid: bool,
    /// The certificate and [`rigidity_check`] agree.
    pub consistent: bool,
}

/// Checks that `U` is constant along the loop, finds a harmonic `n` at which
/// every non-rigid pair's phase satisfies `cos(nθ) > 0`, and bounds every
/// pair coefficient by the (vanishing) Fourier coefficient of `U` there.
pub fn rigidity_certificate(lp: &TrigLoop, tol: f64, k_max: u64) -> Result<RigidityCertificate> {
    let samples = sample_mechanics(lp, HYPOTHESIS_SAMPLES)?;
    let u: Vec<f64> = samples.iter().map(|s| s.potential).collect();
    let spread = relative_spread(&u);
    if !(spread < tol) {
        return Err(Error::HypothesisViolated {
            relative_spread: spread,
            tol,
        });
    }
    let rigidity = rigidity_check(lp, RIGIDITY_TOL)?;
    let active: Vec<&PairHarmonics> = rigidity
        .pairs
        .iter()
        .filter(|p| p.b > RIGIDITY_TOL * p.a && p.theta.is_some())
        .collect();
    if active.is_empty() {
        return Ok(RigidityCertificate {
            relative_spread: spread,
            harmonic: None,
            pairs: Vec::new(),
            weighted_sum: 0.0,
            quadrature_magnitude: 0.0,
            d_bound: 0.0,
            rigid: rigidity.rigid,
            consistent: rigidity.rigid,
        });
    }
    let thetas: Vec<f64> = active.iter().map(|p| p.theta.unwrap_or(0.0)).collect();
    let hit = align_phases(&thetas, k_max)?;
    let n = hit.k;
    let mut pairs = Vec::with_capacity(active.len());
    for p in &active {
        let theta = p.theta.unwrap_or(0.0);
        let d = fourier_coefficient_series(p, n as u32, SERIES_TOL)?.value;
        pairs.push(CertifiedPair {
            j: p.j,
            k: p.k,
            theta,
            d,
            cos_n_theta: (n as f64 * theta).cos(),
        });
    }
    let weighted_sum: f64 = pairs.iter().map(|p| p.d * p.cos_n_theta).sum();
    let min_cos = pairs
        .iter()
        .map(|p| p.cos_n_theta)
        .fold(f64::INFINITY, f64::min);
    let samples = (8 * n as usize).next_power_of_two().max(1024);
    let quadrature_magnitude = potential_dft(lp, &[2 * n as usize], samples)?[0].norm();
    Ok(RigidityCertificate {
        relative_spread: spread,
        harmonic: Some(n),
        pairs,
        weighted_sum,
        quadrature_magnitude,
        d_bound: weighted_sum / min_cos,
        rigid: rigidity.rigid,
        // non-rigid pairs under a constant potential contradict the argument
        consistent: false,
    })
}
