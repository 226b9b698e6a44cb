//! Minimization of the scale-invariant function `I·U²` over centered,
//! collision-free configurations. Its critical points are exactly the central
//! configurations, and its planar infimum sets the action lower bound used by
//! [`crate::variational`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::mechanics::{
    self, central_config_residual, check_collision_free, moment_of_inertia, potential_and_gradient,
    project_center_of_mass, Configuration, MassVector, DEGENERATE_DISTANCE,
};
use crate::optim::{self, Objective, Settings};

pub const TOL_GRAD: f64 = 1e-10;
pub const TOL_CENTRAL: f64 = 1e-8;
pub const DEFAULT_STARTS: usize = 32;
/// Random starts closer than this multiple of the scale are redrawn.
pub const MIN_START_SEPARATION: f64 = 0.05;

/// `I(q)·U(q)²`.
pub fn objective_iu2(m: &MassVector, q: &Configuration) -> Result<f64> {
    let u = mechanics::potential(m, q)?;
    Ok(moment_of_inertia(m, q) * u * u)
}

/// Exact gradient `U²∇I + 2IU∇U` with respect to every coordinate.
pub fn gradient_iu2(m: &MassVector, q: &Configuration) -> Result<Configuration> {
    check_collision_free(m, q)?;
    let mut g = Configuration::zeros(q.len(), q.dim());
    let u = potential_and_gradient(m.as_slice(), q.coords(), q.dim(), g.coords_mut());
    let i_q = moment_of_inertia(m, q);
    let dim = q.dim();
    for (idx, (gc, x)) in g.coords_mut().iter_mut().zip(q.coords()).enumerate() {
        *gc = 2.0 * i_q * u * *gc + u * u * 2.0 * m[idx / dim] * x;
    }
    Ok(g)
}

/// Removes from `g` the components along the symmetry directions of `I·U²`
/// at `q`: rigid translations, scaling and (for `d = 2`) rotation.
pub fn project_gradient(q: &Configuration, g: &Configuration) -> Configuration {
    let dim = q.dim();
    let n = q.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in 0..dim {
        let mut t = vec![0.0; n * dim];
        for i in 0..n {
            t[i * dim + c] = 1.0;
        }
        basis.push(t);
    }
    basis.push(q.coords().to_vec());
    if dim == 2 {
        basis.push(q.coords().chunks(2).flat_map(|p| [-p[1], p[0]]).collect());
    }
    // Gram-Schmidt, dropping dependent directions
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for mut v in basis {
        for e in &ortho {
            let c = mechanics::dot(&v, e);
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
        }
        let nv = mechanics::norm(&v);
        if nv > 1e-12 {
            v.iter_mut().for_each(|x| *x /= nv);
            ortho.push(v);
        }
    }
    let mut out = g.coords().to_vec();
    for e in &ortho {
        let c = mechanics::dot(&out, e);
        out.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
    }
    Configuration::new(dim, out).expect("same shape as q")
}

/// Centers, rescales to `I = 1` and fixes the rotation: body 1 on the
/// positive x-axis and body 2 in the closed upper half-plane (`d = 2`), or
/// body 1 on the positive side (`d = 1`).
pub fn normalize_gauge(m: &MassVector, q: &Configuration) -> Configuration {
    let mut q = project_center_of_mass(m, q);
    let i_q = moment_of_inertia(m, &q);
    if i_q > 0.0 {
        q = q.scaled(1.0 / i_q.sqrt());
    }
    let tiny = 1e-8 / m.total().sqrt();
    match q.dim() {
        1 => {
            if let Some(i) = (0..q.len()).find(|&i| q.body(i)[0].abs() > tiny) {
                if q.body(i)[0] < 0.0 {
                    q = q.scaled(-1.0);
                }
            }
        }
        2 => {
            if let Some(anchor) = (0..q.len()).find(|&i| mechanics::norm(q.body(i)) > tiny) {
                let p = q.body(anchor);
                let angle = p[1].atan2(p[0]);
                let (s, c) = (-angle).sin_cos();
                for i in 0..q.len() {
                    let b = q.body_mut(i);
                    let (x, y) = (b[0], b[1]);
                    b[0] = c * x - s * y;
                    b[1] = s * x + c * y;
                }
                q.body_mut(anchor)[1] = 0.0;
                let next = (0..q.len())
                    .filter(|&i| i != anchor)
                    .find(|&i| q.body(i)[1].abs() > tiny);
                if next.is_some_and(|i| q.body(i)[1] < 0.0) {
                    for i in 0..q.len() {
                        q.body_mut(i)[1] *= -1.0;
                    }
                }
            }
        }
        _ => {}
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub tol_grad: f64,
    pub tol_central: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            max_iters: 20_000,
            tol_grad: TOL_GRAD,
            tol_central: TOL_CENTRAL,
            seed: 0,
        }
    }
}

/// A minimizer of `I·U²`, normalized to `I = 1` with the rotation gauge fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralConfigResult {
    pub masses: MassVector,
    pub q: Configuration,
    /// `I·U²` at `q`.
    pub value: f64,
    /// `U/I`, equal to `U` under the normalization.
    pub lambda: f64,
    pub residual: f64,
    /// Projected gradient norm of `I·U²` at `q`.
    pub grad_norm: f64,
    pub converged: bool,
    pub starts_used: usize,
    pub seed: u64,
}

impl CentralConfigResult {
    /// Evaluates a given configuration without searching; used for analytic
    /// central configurations.
    pub fn from_configuration(
        m: &MassVector,
        q: &Configuration,
        tol_grad: f64,
        tol_central: f64,
    ) -> Result<Self> {
        let q = normalize_gauge(m, q);
        let value = objective_iu2(m, &q)?;
        let grad_norm = mechanics::norm(project_gradient(&q, &gradient_iu2(m, &q)?).coords());
        let residual = central_config_residual(m, &q)?;
        let lambda = mechanics::potential(m, &q)? / moment_of_inertia(m, &q);
        Ok(Self {
            masses: m.clone(),
            q,
            value,
            lambda,
            residual,
            grad_norm,
            converged: grad_norm < tol_grad && residual < tol_central,
            starts_used: 0,
            seed: 0,
        })
    }
}

struct Iu2<'a> {
    m: &'a MassVector,
    dim: usize,
}

impl Objective for Iu2<'_> {
    // I is taken about the center of mass, which makes the objective
    // translation invariant as well as scale invariant.
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let q = Configuration::new(self.dim, x.to_vec()).ok()?;
        let (r, _, _) = q.min_pair_distance();
        let centered = project_center_of_mass(self.m, &q);
        let i_q = moment_of_inertia(self.m, &centered);
        if !(r > DEGENERATE_DISTANCE * (i_q / self.m.total()).sqrt()) {
            return None;
        }
        grad.fill(0.0);
        let u = potential_and_gradient(self.m.as_slice(), x, self.dim, grad);
        for (idx, (g, y)) in grad.iter_mut().zip(centered.coords()).enumerate() {
            *g = 2.0 * i_q * u * *g + 2.0 * u * u * self.m[idx / self.dim] * y;
        }
        Some(i_q * u * u)
    }
}

fn random_start(m: &MassVector, dim: usize, rng: &mut ChaCha8Rng) -> Configuration {
    loop {
        let coords: Vec<f64> = (0..m.len() * dim)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let q = Configuration::new(dim, coords).expect("finite gaussian sample");
        let q = project_center_of_mass(m, &q);
        let i_q = moment_of_inertia(m, &q);
        if i_q <= 0.0 {
            continue;
        }
        let q = q.scaled(1.0 / i_q.sqrt());
        let scale = (1.0 / m.total()).sqrt();
        if q.min_pair_distance().0 >= MIN_START_SEPARATION * scale {
            return q;
        }
    }
}

fn run_start(
    m: &MassVector,
    dim: usize,
    opts: &MinimizeOptions,
    start: usize,
) -> Option<CentralConfigResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(start as u64);
    let q0 = random_start(m, dim, &mut rng);
    let obj = Iu2 { m, dim };

    // Gauge-fixed steepest descent, then quasi-Newton refinement.
    let descent = Settings {
        max_iters: 300.min(opts.max_iters),
        tol_grad: 1e-4,
        ..Settings::default()
    };
    let gauge = |x: &mut [f64]| {
        let q = Configuration::new(dim, x.to_vec()).expect("shape preserved");
        let q = project_center_of_mass(m, &q);
        let i_q = moment_of_inertia(m, &q);
        let c = 1.0 / i_q.sqrt();
        x.iter_mut()
            .zip(q.coords())
            .for_each(|(xi, yi)| *xi = c * yi);
    };
    let coarse = optim::gradient_descent(&obj, q0.into_coords(), &descent, gauge)?;
    let refine = Settings {
        max_iters: opts.max_iters,
        tol_grad: 0.1 * opts.tol_grad,
        ..Settings::default()
    };
    let fine = optim::lbfgs(&obj, coarse.x, &refine)?;
    let q = Configuration::new(dim, fine.x).ok()?;
    let mut res =
        CentralConfigResult::from_configuration(m, &q, opts.tol_grad, opts.tol_central).ok()?;
    res.seed = opts.seed;
    Some(res)
}

fn better(a: &CentralConfigResult, b: &CentralConfigResult) -> bool {
    a.value < b.value || (a.value == b.value && a.residual < b.residual)
}

/// Multi-start search for the infimum of `I·U²` in dimension `dim ∈ {1, 2}`.
pub fn minimize_iu2(
    m: &MassVector,
    dim: usize,
    opts: &MinimizeOptions,
) -> Result<CentralConfigResult> {
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!(
            "minimization supports d = 1 or 2, got {dim}"
        )));
    }
    if opts.starts == 0 {
        return Err(invalid("at least one start is required"));
    }
    let results: Vec<Option<CentralConfigResult>> = (0..opts.starts)
        .into_par_iter()
        .map(|s| run_start(m, dim, opts, s))
        .collect();

    let mut best: Option<CentralConfigResult> = None;
    let mut closest: Option<CentralConfigResult> = None;
    for r in results.into_iter().flatten() {
        if r.converged && best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r.clone());
        }
        if closest.as_ref().is_none_or(|c| r.grad_norm < c.grad_norm) {
            closest = Some(r);
        }
    }
    match best {
        Some(mut b) => {
            b.starts_used = opts.starts;
            Ok(b)
        }
        None => {
            let (grad_norm, residual) = closest
                .map(|c| (c.grad_norm, c.residual))
                .unwrap_or((f64::INFINITY, f64::INFINITY));
            Err(Error::NoConvergence {
                grad_norm,
                residual,
                iterations: opts.max_iters,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    PlanarBelow,
    Equal,
    PlanarAbove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionComparison {
    pub collinear: CentralConfigResult,
    pub planar: CentralConfigResult,
    pub ordering: Ordering,
}

impl DimensionComparison {
    pub fn inf_d1(&self) -> f64 {
        self.collinear.value
    }

    pub fn inf_d2(&self) -> f64 {
        self.planar.value
    }
}

/// Compares the collinear and planar infima of `I·U²`. Values within a
/// relative `1e-9` are reported as equal (always the case for two bodies).
pub fn compare_dimensions(m: &MassVector, opts: &MinimizeOptions) -> Result<DimensionComparison> {
    let collinear = minimize_iu2(m, 1, opts)?;
    let planar = minimize_iu2(m, 2, opts)?;
    let (d1, d2) = (collinear.value, planar.value);
    let ordering = if (d1 - d2).abs() <= 1e-9 * d1.max(d2) {
        Ordering::Equal
    } else if d2 < d1 {
        Ordering::PlanarBelow
    } else {
        Ordering::PlanarAbove
    };
    Ok(DimensionComparison {
        collinear,
        planar,
        ordering,
    })
}
