//! Masses, configurations and the pointwise mechanical quantities built on
//! them: the Newtonian potential `U`, moment of inertia `I`, kinetic energy,
//! Lagrangian, `λ = U / I`, and residuals of Newton's equations and of the
//! central-configuration equations.
//!
//! `U` is the positive (force function) sign convention: `U = Σ m_i m_j / r_ij`
//! and Newton's equations read `m_i q̈_i = ∂U/∂q_i`.

use crate::error::{invalid, Error, Result};

/// Distances below this multiple of [`scale`] count as collisions.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

/// Default tolerance of the center-of-mass predicate.
pub const TOL_COM: f64 = 1e-10;

/// Positive particle masses, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(invalid(format!(
                "need at least two masses, got {}",
                masses.len()
            )));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(invalid(format!(
                "mass {i} must be positive and finite, got {m}"
            )));
        }
        Ok(Self(masses))
    }

    /// `n` unit masses.
    pub fn equal(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

impl std::ops::Index<usize> for MassVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `N` points in `R^d`, stored body-major in one flat buffer.
///
/// Positions, velocities, accelerations and gradients all use this type.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(invalid(format!(
                "point {p:?} does not have dimension {dim}"
            )));
        }
        Self::new(dim, points.iter().flatten().copied().collect())
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            coords: vec![0.0; n * dim],
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn body_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.coords.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.iter().map(|x| c * x).collect(),
        }
    }

    /// Every body shifted by the same vector.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for p in out.coords.chunks_mut(self.dim) {
            for (x, s) in p.iter_mut().zip(shift) {
                *x += s;
            }
        }
        out
    }

    /// Pads (or keeps) the points into dimension `dim >= self.dim()`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(invalid("cannot embed into a lower dimension"));
        }
        let mut coords = Vec::with_capacity(self.len() * dim);
        for p in self.coords.chunks(self.dim) {
            coords.extend_from_slice(p);
            coords.extend(std::iter::repeat_n(0.0, dim - self.dim));
        }
        Self::new(dim, coords)
    }

    /// `|q_j − q_k|`.
    pub fn distance(&self, j: usize, k: usize) -> f64 {
        dist(self.body(j), self.body(k))
    }

    /// Smallest pairwise distance with the pair realising it.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        let n = self.len();
        let mut best = (f64::INFINITY, 0, 0);
        for j in 0..n {
            for k in j + 1..n {
                let r = dist(self.body(j), self.body(k));
                if r < best.0 {
                    best = (r, j, k);
                }
            }
        }
        best
    }

    /// Membership outside the collision set `Δ_d`.
    pub fn is_collision_free(&self) -> bool {
        self.min_pair_distance().0 > 0.0
    }

    /// `|Σ m_i q_i| ≤ tol · Σ m_i · scale(q)`.
    pub fn is_centered(&self, m: &MassVector, tol: f64) -> bool {
        let c = weighted_sum(m, self);
        norm(&c) <= tol * m.total() * scale(m, self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

fn weighted_sum(m: &MassVector, q: &Configuration) -> Vec<f64> {
    let mut c = vec![0.0; q.dim()];
    for i in 0..q.len() {
        for (cx, x) in c.iter_mut().zip(q.body(i)) {
            *cx += m[i] * x;
        }
    }
    c
}

fn check_sizes(m: &MassVector, q: &Configuration) -> Result<()> {
    if m.len() != q.len() {
        return Err(invalid(format!(
            "{} masses but {} bodies",
            m.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Characteristic length `sqrt(I(q) / Σ m)`.
pub fn scale(m: &MassVector, q: &Configuration) -> f64 {
    (moment_of_inertia(m, q) / m.total()).sqrt()
}

/// Fails with [`Error::Collision`] when some pair is closer than
/// `DEGENERATE_DISTANCE · scale(q)`.
pub fn check_collision_free(m: &MassVector, q: &Configuration) -> Result<()> {
    check_sizes(m, q)?;
    let threshold = DEGENERATE_DISTANCE * scale(m, q);
    let (r, j, k) = q.min_pair_distance();
    if r <= threshold || r <= 0.0 {
        return Err(Error::Collision {
            j,
            k,
            distance: r,
            threshold,
        });
    }
    Ok(())
}

/// `U(q) = Σ_{i<j} m_i m_j / |q_i − q_j|`.
pub fn potential(m: &MassVector, q: &Configuration) -> Result<f64> {
    check_collision_free(m, q)?;
    Ok(potential_unchecked(m.as_slice(), q.coords(), q.dim()))
}

pub(crate) fn potential_unchecked(m: &[f64], x: &[f64], dim: usize) -> f64 {
    let n = m.len();
    let mut u = 0.0;
    for j in 0..n {
        let qj = &x[j * dim..(j + 1) * dim];
        for k in j + 1..n {
            u += m[j] * m[k] / dist(qj, &x[k * dim..(k + 1) * dim]);
        }
    }
    u
}

/// Adds `∇U` into `grad` and returns `U`.
pub(crate) fn potential_and_gradient(m: &[f64], x: &[f64], dim: usize, grad: &mut [f64]) -> f64 {
    let n = m.len();
    let mut u = 0.0;
    let mut diff = [0.0; 3];
    for j in 0..n {
        for k in j + 1..n {
            let mut r2 = 0.0;
            for c in 0..dim {
                diff[c] = x[k * dim + c] - x[j * dim + c];
                r2 += diff[c] * diff[c];
            }
            let r = r2.sqrt();
            let mm = m[j] * m[k];
            u += mm / r;
            let f = mm / (r2 * r);
            for c in 0..dim {
                grad[j * dim + c] += f * diff[c];
                grad[k * dim + c] -= f * diff[c];
            }
        }
    }
    u
}

/// `∇_{q_i} U = Σ_{j≠i} m_i m_j (q_j − q_i) / |q_j − q_i|³`, the force on each body.
pub fn potential_gradient(m: &MassVector, q: &Configuration) -> Result<Configuration> {
    check_collision_free(m, q)?;
    let mut g = Configuration::zeros(q.len(), q.dim());
    potential_and_gradient(m.as_slice(), q.coords(), q.dim(), g.coords_mut());
    Ok(g)
}

/// `I(q) = Σ m_j |q_j|²`.
pub fn moment_of_inertia(m: &MassVector, q: &Configuration) -> f64 {
    (0..q.len().min(m.len()))
        .map(|i| m[i] * dot(q.body(i), q.body(i)))
        .sum()
}

/// `K = Σ ½ m_i |v_i|²`.
pub fn kinetic_energy(m: &MassVector, v: &Configuration) -> f64 {
    0.5 * moment_of_inertia(m, v)
}

/// Total energy `E = K − U`. Nothing downstream constrains it.
pub fn total_energy(m: &MassVector, q: &Configuration, v: &Configuration) -> Result<f64> {
    Ok(kinetic_energy(m, v) - potential(m, q)?)
}

/// `U`, `I`, `K`, `L = K + U` and `λ = U / I` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MechanicalSnapshot {
    pub potential: f64,
    pub inertia: f64,
    pub kinetic: f64,
    pub lagrangian: f64,
    pub lambda: f64,
}

pub fn lagrangian(
    m: &MassVector,
    q: &Configuration,
    v: &Configuration,
) -> Result<MechanicalSnapshot> {
    check_sizes(m, v)?;
    let potential = potential(m, q)?;
    let inertia = moment_of_inertia(m, q);
    let kinetic = kinetic_energy(m, v);
    Ok(MechanicalSnapshot {
        potential,
        inertia,
        kinetic,
        lagrangian: kinetic + potential,
        lambda: potential / inertia,
    })
}

/// `max_i |m_i a_i − ∇_{q_i} U(q)|`; zero iff `accel` solves Newton's equations.
pub fn newton_residual(m: &MassVector, q: &Configuration, accel: &Configuration) -> Result<f64> {
    check_sizes(m, accel)?;
    let g = potential_gradient(m, q)?;
    Ok((0..q.len())
        .map(|i| {
            accel
                .body(i)
                .iter()
                .zip(g.body(i))
                .map(|(a, f)| (m[i] * a - f).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}

/// Normalized residual of the central-configuration equations
/// `Σ_{j≠k} m_j m_k (q_j − q_k)/|q_j − q_k|³ = −λ m_k q_k` with `λ = U/I`.
///
/// Each body's residual is divided by `λ m_k scale(q)`.
pub fn central_config_residual(m: &MassVector, q: &Configuration) -> Result<f64> {
    let g = potential_gradient(m, q)?;
    let u = potential_unchecked(m.as_slice(), q.coords(), q.dim());
    let i_q = moment_of_inertia(m, q);
    let lambda = u / i_q;
    let s = scale(m, q);
    Ok((0..q.len())
        .map(|k| {
            let r = g
                .body(k)
                .iter()
                .zip(q.body(k))
                .map(|(f, x)| (f + lambda * m[k] * x).powi(2))
                .sum::<f64>()
                .sqrt();
            r / (lambda * m[k] * s)
        })
        .fold(0.0, f64::max))
}

/// `q_i − (Σ m_j q_j) / Σ m_j`.
pub fn project_center_of_mass(m: &MassVector, q: &Configuration) -> Configuration {
    let total = m.total();
    let shift: Vec<f64> = weighted_sum(m, q).iter().map(|c| -c / total).collect();
    q.translated(&shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[&[f64]]) -> Configuration {
        let dim = points[0].len();
        Configuration::new(dim, points.iter().flat_map(|p| p.iter().copied()).collect()).unwrap()
    }

    fn equilateral(side: f64) -> Configuration {
        let r = side / 3f64.sqrt();
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        Configuration::from_points(2, &pts).unwrap()
    }

    #[test]
    fn mass_vector_validation() {
        assert!(MassVector::new(vec![1.0]).is_err());
        assert!(MassVector::new(vec![1.0, 0.0]).is_err());
        assert!(MassVector::new(vec![1.0, -2.0]).is_err());
        assert!(MassVector::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(MassVector::new(vec![1.0, 2.0]).unwrap().total(), 3.0);
    }

    #[test]
    fn potential_examples() {
        let m2 = MassVector::equal(2).unwrap();
        assert_eq!(
            potential(&m2, &cfg(&[&[-0.5, 0.0], &[0.5, 0.0]])).unwrap(),
            1.0
        );
        assert_eq!(
            potential(&m2, &cfg(&[&[0.0, 0.0], &[0.0, 2.0]])).unwrap(),
            0.5
        );
        let m3 = MassVector::equal(3).unwrap();
        let u = potential(&m3, &equilateral(1.0)).unwrap();
        assert!((u - 3.0).abs() < 1e-14);
    }

    #[test]
    fn potential_rejects_collisions() {
        let m2 = MassVector::equal(2).unwrap();
        let q = cfg(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(potential(&m2, &q), Err(Error::Collision { .. })));
        // the threshold is relative to the configuration's own scale
        let q = cfg(&[&[0.0, 0.0], &[1e-14, 0.0]]);
        assert!(potential(&m2, &q).is_ok());
        let m3 = MassVector::equal(3).unwrap();
        let q = cfg(&[&[0.0, 0.0], &[1e-14, 0.0], &[1.0, 0.0]]);
        assert!(matches!(
            potential(&m3, &q),
            Err(Error::Collision { j: 0, k: 1, .. })
        ));
    }

    #[test]
    fn inertia_examples() {
        let m2 = MassVector::equal(2).unwrap();
        assert_eq!(
            moment_of_inertia(&m2, &cfg(&[&[-0.5, 0.0], &[0.5, 0.0]])),
            0.5
        );
        let m3 = MassVector::equal(3).unwrap();
        // centroid distance 1/√3, so I = 3 · 1/3
        assert!((moment_of_inertia(&m3, &equilateral(1.0)) - 1.0).abs() < 1e-15);
        assert_eq!(moment_of_inertia(&m3, &Configuration::zeros(3, 2)), 0.0);
    }

    #[test]
    fn kinetic_examples() {
        let m = MassVector::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(kinetic_energy(&m, &cfg(&[&[3.0, 4.0], &[0.0, 0.0]])), 25.0);
        assert_eq!(kinetic_energy(&m, &Configuration::zeros(2, 2)), 0.0);
        let m2 = MassVector::equal(2).unwrap();
        assert_eq!(kinetic_energy(&m2, &cfg(&[&[1.0, 0.0], &[-1.0, 0.0]])), 1.0);
    }

    #[test]
    fn lagrangian_examples() {
        let m2 = MassVector::equal(2).unwrap();
        let q = cfg(&[&[-0.5, 0.0], &[0.5, 0.0]]);
        let s = lagrangian(&m2, &q, &Configuration::zeros(2, 2)).unwrap();
        assert_eq!((s.lagrangian, s.lambda), (1.0, 2.0));

        let m3 = MassVector::equal(3).unwrap();
        let s = lagrangian(&m3, &equilateral(1.0), &Configuration::zeros(3, 2)).unwrap();
        assert!((s.lagrangian - 3.0).abs() < 1e-14);
        assert!((s.lambda - 3.0).abs() < 1e-14);

        let v = cfg(&[&[0.0, 1.0], &[0.0, -1.0]]);
        let s = lagrangian(&m2, &q, &v).unwrap();
        assert_eq!((s.kinetic, s.lagrangian), (1.0, 2.0));
        assert_eq!(s.lagrangian, s.kinetic + s.potential);
        assert_eq!(total_energy(&m2, &q, &v).unwrap(), 0.0);
    }

    #[test]
    fn newton_residual_examples() {
        let m2 = MassVector::equal(2).unwrap();
        let q = cfg(&[&[-0.5, 0.0], &[0.5, 0.0]]);
        let a = cfg(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert_eq!(newton_residual(&m2, &q, &a).unwrap(), 0.0);
        let r = newton_residual(&m2, &q, &Configuration::zeros(2, 2)).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn central_residual_examples() {
        let m3 = MassVector::equal(3).unwrap();
        assert!(central_config_residual(&m3, &equilateral(1.0)).unwrap() < 1e-14);

        let m2 = MassVector::new(vec![1.0, 3.0]).unwrap();
        let q = project_center_of_mass(&m2, &cfg(&[&[0.3, -1.2], &[2.0, 0.7]]));
        assert!(central_config_residual(&m2, &q).unwrap() < 1e-14);

        let iso = project_center_of_mass(&m3, &cfg(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 3.0]]));
        assert!(central_config_residual(&m3, &iso).unwrap() > 0.01);
    }

    #[test]
    fn central_config_gives_newton_solution() {
        let m3 = MassVector::equal(3).unwrap();
        let q = equilateral(1.0);
        let lambda = 3.0;
        let accel = q.scaled(-lambda);
        assert!(newton_residual(&m3, &q, &accel).unwrap() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let m2 = MassVector::equal(2).unwrap();
        let p = project_center_of_mass(&m2, &cfg(&[&[0.0, 0.0], &[2.0, 0.0]]));
        assert_eq!(p.coords(), &[-1.0, 0.0, 1.0, 0.0]);
        let m = MassVector::new(vec![1.0, 3.0]).unwrap();
        let p = project_center_of_mass(&m, &cfg(&[&[0.0, 0.0], &[4.0, 0.0]]));
        assert_eq!(p.coords(), &[-3.0, 0.0, 1.0, 0.0]);
        let centered = cfg(&[&[-1.0, 2.0], &[1.0, -2.0]]);
        assert_eq!(project_center_of_mass(&m2, &centered), centered);
        assert!(p.is_centered(&m, TOL_COM));
        assert!(!cfg(&[&[0.0, 0.0], &[4.0, 0.0]]).is_centered(&m, TOL_COM));
    }

    #[test]
    fn configuration_validation() {
        assert!(Configuration::new(4, vec![0.0; 8]).is_err());
        assert!(Configuration::new(2, vec![0.0; 5]).is_err());
        assert!(Configuration::from_points(2, &[vec![1.0, 2.0], vec![3.0]]).is_err());
        let q = Configuration::new(1, vec![1.0, -1.0]).unwrap();
        assert_eq!(
            q.embed(3).unwrap().coords(),
            &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0]
        );
    }
}
