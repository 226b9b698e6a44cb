//! The action functional on planar mean-zero periodic loops, the chain of
//! inequalities that bounds it below by `3(inf IU² · π²/2)^{1/3} T^{1/3}`,
//! direct minimization over truncated Fourier series, and the rotating
//! relative equilibria that attain the bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::central_config::{self, CentralConfigResult, MinimizeOptions};
use crate::error::{invalid, Error, Result};
use crate::harmonics::TrigLoop;
use crate::mechanics::{
    self, moment_of_inertia, potential_and_gradient, Configuration, MassVector, DEGENERATE_DISTANCE,
};
use crate::optim::{self, Objective, Settings, Termination};

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_SAMPLES: usize = 1024;
pub const TOL_GRAD: f64 = 1e-9;
pub const DEFAULT_STARTS: usize = 8;
/// Steps that bring two bodies closer than this multiple of the scale are
/// rejected by the line search.
pub const MIN_SEPARATION: f64 = 0.05;
pub const MAX_RESTARTS: usize = 3;

/// Planar loop `q_i(t) = Σ_{h=1..M} α_{i,h} cos(hωt) + β_{i,h} sin(hωt)`,
/// `ω = 2π/T`. The missing `h = 0` term makes the time average vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoop {
    masses: MassVector,
    period: f64,
    order: usize,
    // index (i * order + h − 1) * 2 + c
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierLoop {
    pub fn new(
        masses: MassVector,
        period: f64,
        order: usize,
        cos: Vec<f64>,
        sin: Vec<f64>,
    ) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if order == 0 {
            return Err(invalid("order must be at least 1"));
        }
        let len = masses.len() * order * 2;
        if cos.len() != len || sin.len() != len {
            return Err(invalid(format!(
                "expected {len} cosine and sine coefficients"
            )));
        }
        if cos.iter().chain(&sin).any(|x| !x.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        Ok(Self {
            masses,
            period,
            order,
            cos,
            sin,
        })
    }

    pub fn zeros(masses: MassVector, period: f64, order: usize) -> Result<Self> {
        let len = masses.len() * order * 2;
        Self::new(masses, period, order, vec![0.0; len], vec![0.0; len])
    }

    /// Fits a loop to `S` uniform samples `q(sT/S)`. Fails when the samples
    /// have a nonzero time average, which no loop of this form can reproduce.
    pub fn from_samples(
        masses: MassVector,
        period: f64,
        order: usize,
        samples: &[Configuration],
    ) -> Result<Self> {
        let s = samples.len();
        if s <= 2 * order {
            return Err(invalid(format!(
                "need more than {} samples for order {order}",
                2 * order
            )));
        }
        if samples
            .iter()
            .any(|q| q.dim() != 2 || q.len() != masses.len())
        {
            return Err(invalid(
                "samples must be planar configurations matching the masses",
            ));
        }
        let n = masses.len();
        let mut mean = vec![0.0; 2 * n];
        for q in samples {
            mean.iter_mut()
                .zip(q.coords())
                .for_each(|(a, x)| *a += x / s as f64);
        }
        let size = samples
            .iter()
            .map(|q| mechanics::scale(&masses, q))
            .fold(0.0, f64::max);
        if mechanics::norm(&mean) > 1e-12 * size.max(f64::MIN_POSITIVE) {
            return Err(invalid(
                "samples have a nonzero time average; no constant term is allowed",
            ));
        }
        let mut lp = Self::zeros(masses, period, order)?;
        for (k, q) in samples.iter().enumerate() {
            for h in 1..=order {
                let angle = 2.0 * PI * ((h * k) % s) as f64 / s as f64;
                let (sn, cs) = angle.sin_cos();
                for i in 0..n {
                    for c in 0..2 {
                        let idx = lp.index(i, h, c);
                        lp.cos[idx] += 2.0 / s as f64 * cs * q.body(i)[c];
                        lp.sin[idx] += 2.0 / s as f64 * sn * q.body(i)[c];
                    }
                }
            }
        }
        Ok(lp)
    }

    fn index(&self, i: usize, h: usize, c: usize) -> usize {
        (i * self.order + h - 1) * 2 + c
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

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// `α_{i,h}`.
    pub fn cos_coefficient(&self, i: usize, h: usize) -> [f64; 2] {
        let k = self.index(i, h, 0);
        [self.cos[k], self.cos[k + 1]]
    }

    /// `β_{i,h}`.
    pub fn sin_coefficient(&self, i: usize, h: usize) -> [f64; 2] {
        let k = self.index(i, h, 0);
        [self.sin[k], self.sin[k + 1]]
    }

    pub fn set_coefficients(&mut self, i: usize, h: usize, alpha: [f64; 2], beta: [f64; 2]) {
        let k = self.index(i, h, 0);
        self.cos[k..k + 2].copy_from_slice(&alpha);
        self.sin[k..k + 2].copy_from_slice(&beta);
    }

    /// All coefficients as one vector: cosines first, then sines.
    pub fn parameters(&self) -> Vec<f64> {
        [self.cos.as_slice(), self.sin.as_slice()].concat()
    }

    pub fn with_parameters(&self, x: &[f64]) -> Result<Self> {
        let half = self.cos.len();
        if x.len() != 2 * half {
            return Err(invalid(format!("expected {} parameters", 2 * half)));
        }
        Self::new(
            self.masses.clone(),
            self.period,
            self.order,
            x[..half].to_vec(),
            x[half..].to_vec(),
        )
    }

    /// `Σ_h (hω)^p (α cos + β sin)` differentiated `p` times.
    fn derivative(&self, t: f64, p: u32) -> Configuration {
        let w = self.omega();
        let mut coords = vec![0.0; 2 * self.len()];
        for h in 1..=self.order {
            let (sn, cs) = (h as f64 * w * t).sin_cos();
            let f = (h as f64 * w).powi(p as i32);
            // d^p/dt^p of (cos, sin) cycles through (−sin, cos), (−cos, −sin), ...
            let (ca, cb) = match p % 4 {
                0 => (cs, sn),
                1 => (-sn, cs),
                2 => (-cs, -sn),
                _ => (sn, -cs),
            };
            for i in 0..self.len() {
                for c in 0..2 {
                    let k = self.index(i, h, c);
                    coords[2 * i + c] += f * (ca * self.cos[k] + cb * self.sin[k]);
                }
            }
        }
        Configuration::new(2, coords).expect("planar")
    }

    pub fn position(&self, t: f64) -> Configuration {
        self.derivative(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Configuration {
        self.derivative(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> Configuration {
        self.derivative(t, 2)
    }

    /// `Σ_i m_i (|α_{i,h}|² + |β_{i,h}|²)` for one harmonic.
    fn harmonic_mass_norm(&self, h: usize) -> f64 {
        (0..self.len())
            .map(|i| {
                let k = self.index(i, h, 0);
                self.masses[i]
                    * (self.cos[k..k + 2]
                        .iter()
                        .chain(&self.sin[k..k + 2])
                        .map(|x| x * x)
                        .sum::<f64>())
            })
            .sum()
    }

    /// `∫ Σ ½ m_i |q̇_i|² dt = (T/2) · ½ Σ_i m_i Σ_h (hω)² (|α|² + |β|²)`.
    pub fn kinetic_integral(&self) -> f64 {
        let w = self.omega();
        (1..=self.order)
            .map(|h| 0.25 * self.period * (h as f64 * w).powi(2) * self.harmonic_mass_norm(h))
            .sum()
    }

    /// `∫ I(q(t)) dt`, from Parseval.
    pub fn inertia_integral(&self) -> f64 {
        (1..=self.order)
            .map(|h| 0.5 * self.period * self.harmonic_mass_norm(h))
            .sum()
    }

    /// Share of the kinetic integral carried by the first harmonic.
    pub fn first_harmonic_energy_fraction(&self) -> f64 {
        let w = self.omega();
        let per: Vec<f64> = (1..=self.order)
            .map(|h| (h as f64 * w).powi(2) * self.harmonic_mass_norm(h))
            .collect();
        let total: f64 = per.iter().sum();
        if total > 0.0 {
            per[0] / total
        } else {
            0.0
        }
    }
}

/// `cos` and `sin` of `hω t_s` for `t_s = sT/S`, `h = 1..=M`.
struct SampleTable {
    samples: usize,
    order: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl SampleTable {
    fn new(samples: usize, order: usize) -> Self {
        let mut cos = Vec::with_capacity(samples * order);
        let mut sin = Vec::with_capacity(samples * order);
        for s in 0..samples {
            for h in 1..=order {
                let angle = 2.0 * PI * ((h * s) % samples) as f64 / samples as f64;
                let (sn, cs) = angle.sin_cos();
                cos.push(cs);
                sin.push(sn);
            }
        }
        Self {
            samples,
            order,
            cos,
            sin,
        }
    }

    fn positions(&self, coeffs: &[f64], n: usize, s: usize, out: &mut [f64]) {
        let half = n * self.order * 2;
        let (ca, sb) = coeffs.split_at(half);
        out.fill(0.0);
        for h in 0..self.order {
            let (cs, sn) = (self.cos[s * self.order + h], self.sin[s * self.order + h]);
            for i in 0..n {
                for c in 0..2 {
                    let k = (i * self.order + h) * 2 + c;
                    out[2 * i + c] += ca[k] * cs + sb[k] * sn;
                }
            }
        }
    }
}

fn check_samples(samples: usize, order: usize) -> Result<()> {
    if !samples.is_power_of_two() || samples < 8 * order {
        return Err(invalid(format!(
            "samples must be a power of two of at least {}, got {samples}",
            8 * order
        )));
    }
    Ok(())
}

enum Close {
    Abort {
        j: usize,
        k: usize,
        distance: f64,
        threshold: f64,
    },
}

/// Action `K + (T/S) Σ_s U(q(t_s))` and optionally its gradient in the
/// parameter layout of [`FourierLoop::parameters`]. Rejects any sample with a
/// pair closer than `separation · sqrt(I/Σm)`.
fn action_eval(
    lp: &FourierLoop,
    table: &SampleTable,
    x: &[f64],
    separation: f64,
    grad: Option<&mut [f64]>,
) -> std::result::Result<f64, Close> {
    let n = lp.len();
    let m = lp.masses.as_slice();
    let total_mass = lp.masses.total();
    let order = lp.order;
    let half = n * order * 2;
    let w = lp.omega();
    let dt = lp.period / table.samples as f64;

    let mut kinetic = 0.0;
    for (i, mi) in m.iter().enumerate() {
        for h in 1..=order {
            let f = 0.25 * lp.period * (h as f64 * w).powi(2) * mi;
            for c in 0..2 {
                let k = (i * order + h - 1) * 2 + c;
                kinetic += f * (x[k] * x[k] + x[half + k] * x[half + k]);
            }
        }
    }

    let mut q = vec![0.0; 2 * n];
    let mut gu = vec![0.0; 2 * n];
    let mut grad = grad;
    if let Some(g) = grad.as_deref_mut() {
        g.fill(0.0);
    }
    let mut u_sum = 0.0;
    for s in 0..table.samples {
        table.positions(x, n, s, &mut q);
        let inertia: f64 = (0..n)
            .map(|i| m[i] * (q[2 * i].powi(2) + q[2 * i + 1].powi(2)))
            .sum();
        let threshold = separation * (inertia / total_mass).sqrt();
        let cfg = Configuration::new(2, q.clone()).expect("planar");
        let (r, j, k) = cfg.min_pair_distance();
        if !(r > threshold) {
            return Err(Close::Abort {
                j,
                k,
                distance: r,
                threshold,
            });
        }
        if let Some(g) = grad.as_deref_mut() {
            gu.fill(0.0);
            u_sum += potential_and_gradient(m, &q, 2, &mut gu);
            for h in 0..order {
                let (cs, sn) = (table.cos[s * order + h], table.sin[s * order + h]);
                for i in 0..n {
                    for c in 0..2 {
                        let k = (i * order + h) * 2 + c;
                        g[k] += dt * gu[2 * i + c] * cs;
                        g[half + k] += dt * gu[2 * i + c] * sn;
                    }
                }
            }
        } else {
            u_sum += mechanics::potential_unchecked(m, &q, 2);
        }
    }
    if let Some(g) = grad {
        for (i, mi) in m.iter().enumerate() {
            for h in 1..=order {
                let f = 0.5 * lp.period * (h as f64 * w).powi(2) * mi;
                for c in 0..2 {
                    let k = (i * order + h - 1) * 2 + c;
                    g[k] += f * x[k];
                    g[half + k] += f * x[half + k];
                }
            }
        }
    }
    Ok(kinetic + dt * u_sum)
}

fn collision(c: Close) -> Error {
    let Close::Abort {
        j,
        k,
        distance,
        threshold,
    } = c;
    Error::Collision {
        j,
        k,
        distance,
        threshold,
    }
}

/// `A(q) = ∫_0^T (K + U) dt`: kinetic part in closed form, potential part by
/// the rectangle rule on `samples` uniform times.
pub fn action_functional(lp: &FourierLoop, samples: usize) -> Result<f64> {
    check_samples(samples, lp.order)?;
    let table = SampleTable::new(samples, lp.order);
    action_eval(lp, &table, &lp.parameters(), DEGENERATE_DISTANCE, None).map_err(collision)
}

/// Action and its gradient with respect to [`FourierLoop::parameters`].
pub fn action_gradient(lp: &FourierLoop, samples: usize) -> Result<(f64, Vec<f64>)> {
    check_samples(samples, lp.order)?;
    let table = SampleTable::new(samples, lp.order);
    let x = lp.parameters();
    let mut g = vec![0.0; x.len()];
    let a = action_eval(lp, &table, &x, DEGENERATE_DISTANCE, Some(&mut g)).map_err(collision)?;
    Ok((a, g))
}

/// `∫ Σ ½ m |q̇|² − ω² ∫ Σ ½ m |q|²`, exactly from the coefficients.
pub fn wirtinger_gap(lp: &FourierLoop) -> f64 {
    let w = lp.omega();
    (2..=lp.order)
        .map(|h| 0.25 * lp.period * ((h as f64 * w).powi(2) - w * w) * lp.harmonic_mass_norm(h))
        .sum()
}

/// `3 (inf_iu2 · π²/2)^{1/3} T^{1/3}`.
pub fn lower_bound(period: f64, inf_iu2: f64) -> f64 {
    3.0 * (inf_iu2 * PI * PI / 2.0).cbrt() * period.cbrt()
}

fn amgm_gap_at(omega: f64, inertia: f64, u: f64) -> f64 {
    0.5 * omega * omega * inertia + u - 3.0 * (omega * omega * inertia * u * u / 8.0).cbrt()
}

/// `½ω²I + ½U + ½U − 3(⅛ω²IU²)^{1/3}` at time `t`.
pub fn amgm_pointwise_gap(lp: &FourierLoop, t: f64) -> Result<f64> {
    let q = lp.position(t);
    let u = mechanics::potential(&lp.masses, &q)?;
    Ok(amgm_gap_at(
        lp.omega(),
        moment_of_inertia(&lp.masses, &q),
        u,
    ))
}

/// Every link of `A ≥ ∫(½ω²I + U) ≥ 3∫(⅛ω²IU²)^{1/3} ≥ lower_bound`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ActionChain {
    pub action: f64,
    /// `∫ (½ω²I + U) dt`.
    pub quadratic: f64,
    /// `3 ∫ (⅛ω²IU²)^{1/3} dt`.
    pub amgm: f64,
    pub lower_bound: f64,
    pub wirtinger_gap: f64,
    pub min_amgm_gap: f64,
    /// Smallest `I·U²` over the samples, with `I` about the origin.
    pub min_iu2: f64,
}

pub fn action_chain(lp: &FourierLoop, samples: usize, inf_iu2: f64) -> Result<ActionChain> {
    check_samples(samples, lp.order)?;
    let w = lp.omega();
    let dt = lp.period / samples as f64;
    let (mut quadratic, mut amgm, mut min_gap, mut min_iu2) =
        (0.0, 0.0, f64::INFINITY, f64::INFINITY);
    for s in 0..samples {
        let q = lp.position(s as f64 * dt);
        let u = mechanics::potential(&lp.masses, &q)?;
        let i_q = moment_of_inertia(&lp.masses, &q);
        quadratic += dt * (0.5 * w * w * i_q + u);
        amgm += dt * 3.0 * (w * w * i_q * u * u / 8.0).cbrt();
        min_gap = min_gap.min(amgm_gap_at(w, i_q, u));
        min_iu2 = min_iu2.min(i_q * u * u);
    }
    Ok(ActionChain {
        action: action_functional(lp, samples)?,
        quadratic,
        amgm,
        lower_bound: lower_bound(lp.period, inf_iu2),
        wirtinger_gap: wirtinger_gap(lp),
        min_amgm_gap: min_gap,
        min_iu2,
    })
}

/// Tolerances for the three equality conditions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ClassifyTolerances {
    pub first_harmonic: f64,
    pub virial: f64,
    pub iu2_excess: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            first_harmonic: 1e-6,
            virial: 1e-6,
            iu2_excess: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionI {
    pub first_harmonic_energy_fraction: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionII {
    /// `max_t |ω²I − U| / U`.
    pub max_relative_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionIII {
    /// `max_t (IU² − inf IU²) / inf IU²`.
    pub max_relative_excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ActionReport {
    pub action: f64,
    pub lower_bound: f64,
    /// `action − lower_bound`.
    pub gap: f64,
    pub inf_iu2: f64,
    pub wirtinger_gap: f64,
    pub condition_i: ConditionI,
    pub condition_ii: ConditionII,
    pub condition_iii: ConditionIII,
    pub relative_equilibrium: bool,
    /// Largest distance of the weighted centroid from the origin over the
    /// samples; the centroid is not constrained during minimization.
    pub centroid_amplitude: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub starts_used: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Evaluates the equality conditions (i)-(iii) of the action lower bound on
/// `samples` uniform times.
pub fn classify_minimizer(
    lp: &FourierLoop,
    central: &CentralConfigResult,
    tols: &ClassifyTolerances,
    samples: usize,
) -> Result<ActionReport> {
    let chain = action_chain(lp, samples, central.value)?;
    let w = lp.omega();
    let (mut virial, mut excess, mut centroid) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for s in 0..samples {
        let q = lp.position(lp.period * s as f64 / samples as f64);
        let u = mechanics::potential(&lp.masses, &q)?;
        let i_q = moment_of_inertia(&lp.masses, &q);
        virial = virial.max((w * w * i_q - u).abs() / u);
        excess = excess.max((i_q * u * u - central.value) / central.value);
        let mut c = [0.0; 2];
        for i in 0..lp.len() {
            c[0] += lp.masses[i] * q.body(i)[0] / lp.masses.total();
            c[1] += lp.masses[i] * q.body(i)[1] / lp.masses.total();
        }
        centroid = centroid.max(mechanics::norm(&c));
    }
    let fraction = lp.first_harmonic_energy_fraction();
    let condition_i = ConditionI {
        first_harmonic_energy_fraction: fraction,
        pass: fraction > 1.0 - tols.first_harmonic,
    };
    let condition_ii = ConditionII {
        max_relative_deviation: virial,
        pass: virial < tols.virial,
    };
    let condition_iii = ConditionIII {
        max_relative_excess: excess,
        pass: excess < tols.iu2_excess,
    };
    Ok(ActionReport {
        action: chain.action,
        lower_bound: chain.lower_bound,
        gap: chain.action - chain.lower_bound,
        inf_iu2: central.value,
        wirtinger_gap: chain.wirtinger_gap,
        relative_equilibrium: condition_i.pass && condition_ii.pass && condition_iii.pass,
        condition_i,
        condition_ii,
        condition_iii,
        centroid_amplitude: centroid,
        iterations: 0,
        grad_norm: f64::NAN,
        starts_used: 0,
        restarts: 0,
        seed: 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub tol_grad: f64,
    pub samples: usize,
    pub seed: u64,
    /// Used as the first start, without perturbation.
    pub initial: Option<FourierLoop>,
    /// Planar `I·U²` minimizer for the bound; computed when absent.
    pub central: Option<CentralConfigResult>,
    pub tolerances: ClassifyTolerances,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            max_iters: 20_000,
            tol_grad: TOL_GRAD,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            initial: None,
            central: None,
            tolerances: ClassifyTolerances::default(),
        }
    }
}

struct ActionObjective<'a> {
    template: &'a FourierLoop,
    table: SampleTable,
}

impl Objective for ActionObjective<'_> {
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        action_eval(self.template, &self.table, x, MIN_SEPARATION, Some(grad)).ok()
    }
}

fn add_noise(lp: &mut FourierLoop, amplitude: f64, rng: &mut ChaCha8Rng) {
    for v in lp.cos.iter_mut().chain(lp.sin.iter_mut()) {
        *v += amplitude * rng.sample::<f64, _>(StandardNormal);
    }
}

/// Rigid rotation of a random centered configuration, sized so that
/// `ω²I = U`, plus noise in every coefficient.
fn random_loop(m: &MassVector, period: f64, order: usize, rng: &mut ChaCha8Rng) -> FourierLoop {
    let w = 2.0 * PI / period;
    loop {
        let coords: Vec<f64> = (0..2 * m.len())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let q =
            mechanics::project_center_of_mass(m, &Configuration::new(2, coords).expect("planar"));
        let Ok(u) = mechanics::potential(m, &q) else {
            continue;
        };
        let i_q = moment_of_inertia(m, &q);
        if q.min_pair_distance().0 < 0.2 * mechanics::scale(m, &q) {
            continue;
        }
        let c = (u / (w * w * i_q)).cbrt();
        let mut lp = FourierLoop::zeros(m.clone(), period, order).expect("valid order");
        for i in 0..m.len() {
            let p = q.body(i);
            lp.set_coefficients(i, 1, [c * p[0], c * p[1]], [-c * p[1], c * p[0]]);
        }
        let amplitude = 0.1 * c * mechanics::scale(m, &q);
        add_noise(&mut lp, amplitude, rng);
        return lp;
    }
}

enum Outcome {
    Converged(FourierLoop, optim::Minimum),
    Stalled(f64),
    Blocked,
}

fn descend(start: &FourierLoop, samples: usize, opts: &ActionOptions) -> Outcome {
    let obj = ActionObjective {
        template: start,
        table: SampleTable::new(samples, start.order),
    };
    let settings = Settings {
        max_iters: opts.max_iters,
        tol_grad: opts.tol_grad,
        ..Settings::default()
    };
    match optim::lbfgs(&obj, start.parameters(), &settings) {
        None => Outcome::Blocked,
        Some(min) => match min.termination {
            Termination::Converged => {
                let lp = start.with_parameters(&min.x).expect("same layout");
                Outcome::Converged(lp, min)
            }
            Termination::MaxIterations => Outcome::Stalled(min.grad_norm),
            Termination::LineSearchFailed => Outcome::Blocked,
        },
    }
}

struct StartResult {
    lp: FourierLoop,
    value: f64,
    iterations: usize,
    grad_norm: f64,
    restarts: usize,
}

fn run_start(
    m: &MassVector,
    period: f64,
    order: usize,
    central: &CentralConfigResult,
    opts: &ActionOptions,
    start: usize,
) -> std::result::Result<StartResult, (usize, Option<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(start as u64);
    let mut current = match (&opts.initial, start) {
        (Some(init), 0) => init.clone(),
        _ => random_loop(m, period, order, &mut rng),
    };
    let mut stalled = None;
    for restart in 0..=MAX_RESTARTS {
        match descend(&current, opts.samples, opts) {
            Outcome::Converged(lp, min) => {
                return Ok(StartResult {
                    lp,
                    value: min.value,
                    iterations: min.iterations,
                    grad_norm: min.grad_norm,
                    restarts: restart,
                })
            }
            Outcome::Stalled(g) => stalled = Some(stalled.map_or(g, |s: f64| s.min(g))),
            Outcome::Blocked => {}
        }
        // restart from a perturbed relative equilibrium
        let re = build_relative_equilibrium(central, Frequency::Period(period))
            .and_then(|t| trig_to_fourier(&t))
            .expect("converged central configuration");
        current = FourierLoop::zeros(m.clone(), period, order).expect("valid order");
        for i in 0..m.len() {
            current.set_coefficients(i, 1, re.cos_coefficient(i, 1), re.sin_coefficient(i, 1));
        }
        let size = re.inertia_integral().sqrt() / (period * m.total()).sqrt();
        add_noise(&mut current, 0.05 * size, &mut rng);
    }
    Err((MAX_RESTARTS, stalled))
}

/// Multi-start L-BFGS over all Fourier coefficients of a planar loop of
/// order `order`, then classification of the best converged loop.
pub fn minimize_action(
    m: &MassVector,
    period: f64,
    order: usize,
    opts: &ActionOptions,
) -> Result<(FourierLoop, ActionReport)> {
    if !(period.is_finite() && period > 0.0) {
        return Err(invalid(format!("period must be positive, got {period}")));
    }
    if order == 0 || opts.starts == 0 {
        return Err(invalid("order and starts must be at least 1"));
    }
    check_samples(opts.samples, order)?;
    if let Some(init) = &opts.initial {
        if init.order != order || init.masses != *m || init.period != period {
            return Err(invalid(
                "initial loop must match the masses, period and order",
            ));
        }
    }
    let central = match &opts.central {
        Some(c) => c.clone(),
        None => central_config::minimize_iu2(
            m,
            2,
            &MinimizeOptions {
                seed: opts.seed,
                ..MinimizeOptions::default()
            },
        )?,
    };
    let results: Vec<_> = (0..opts.starts)
        .into_par_iter()
        .map(|s| run_start(m, period, order, &central, opts, s))
        .collect();

    let mut best: Option<StartResult> = None;
    let (mut restarts, mut stalled) = (0, None::<f64>);
    for r in results {
        match r {
            Ok(res) => {
                restarts += res.restarts;
                if best.as_ref().is_none_or(|b| res.value < b.value) {
                    best = Some(res);
                }
            }
            Err((n, s)) => {
                restarts += n;
                if let Some(g) = s {
                    stalled = Some(stalled.map_or(g, |p| p.min(g)));
                }
            }
        }
    }
    let Some(best) = best else {
        return Err(match stalled {
            Some(grad_norm) => Error::NoConvergence {
                grad_norm,
                residual: f64::NAN,
                iterations: opts.max_iters,
            },
            None => Error::CollisionAbort { restarts },
        });
    };
    let mut report = classify_minimizer(&best.lp, &central, &opts.tolerances, opts.samples)?;
    report.iterations = best.iterations;
    report.grad_norm = best.grad_norm;
    report.starts_used = opts.starts;
    report.restarts = restarts;
    report.seed = opts.seed;
    Ok((best.lp, report))
}

/// How to fix the angular frequency of a relative equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    /// `ω = √λ` with the configuration as given.
    FromLambda,
    /// `ω = 2π/T`; the configuration is rescaled until `U/I = ω²`.
    Period(f64),
}

/// `q_i(t) = a_i cos(ωt) + J a_i sin(ωt)` with `a = q` the central
/// configuration and `J` the quarter turn. Collinear input is embedded in
/// the plane.
pub fn build_relative_equilibrium(
    central: &CentralConfigResult,
    frequency: Frequency,
) -> Result<TrigLoop> {
    if !central.converged {
        return Err(invalid("central configuration did not converge"));
    }
    let q = match central.q.dim() {
        1 => central.q.embed(2)?,
        2 => central.q.clone(),
        d => {
            return Err(invalid(format!(
                "relative equilibria are planar, got d = {d}"
            )))
        }
    };
    let m = &central.masses;
    let lambda = mechanics::potential(m, &q)? / moment_of_inertia(m, &q);
    let (q, period) = match frequency {
        Frequency::FromLambda => (q, 2.0 * PI / lambda.sqrt()),
        Frequency::Period(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!("period must be positive, got {t}")));
            }
            let w = 2.0 * PI / t;
            (q.scaled((lambda / (w * w)).cbrt()), t)
        }
    };
    let b: Vec<f64> = q.coords().chunks(2).flat_map(|p| [-p[1], p[0]]).collect();
    TrigLoop::new(m.clone(), period, q, Configuration::new(2, b)?)
}

/// Embeds a trigonometric loop as the `h = 1` term of an order-1 Fourier loop.
pub fn trig_to_fourier(lp: &TrigLoop) -> Result<FourierLoop> {
    let (a, b) = match lp.dim() {
        1 => (lp.a().embed(2)?, lp.b().embed(2)?),
        2 => (lp.a().clone(), lp.b().clone()),
        d => return Err(invalid(format!("Fourier loops are planar, got d = {d}"))),
    };
    FourierLoop::new(
        lp.masses().clone(),
        lp.period(),
        1,
        a.into_coords(),
        b.into_coords(),
    )
}

/// One row of a sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub positions: Configuration,
    pub potential: f64,
    pub inertia: f64,
    pub kinetic: f64,
}

pub fn sample_trajectory(lp: &FourierLoop, samples: usize) -> Result<Vec<TrajectorySample>> {
    (0..samples)
        .map(|s| {
            let t = lp.period * s as f64 / samples as f64;
            let q = lp.position(t);
            Ok(TrajectorySample {
                t,
                potential: mechanics::potential(&lp.masses, &q)?,
                inertia: moment_of_inertia(&lp.masses, &q),
                kinetic: mechanics::kinetic_energy(&lp.masses, &lp.velocity(t)),
                positions: q,
            })
        })
        .collect()
}
