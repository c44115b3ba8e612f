//! Quadrature on S² and on orbit circles.
//!
//! All weights are normalized to the probability measure σ: a grid integrates
//! `f ≡ 1` to exactly one, and so does every orbit rule.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid_argument, Result};
use crate::numeric::pairwise_dot;
use crate::vec3::{self, Vec3, E1, E3};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine image of the rule on [a, b].
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let nodes = self.nodes.iter().map(|x| mid + half * x).collect();
        let weights = self.weights.iter().map(|w| half * w).collect();
        (nodes, weights)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        pairwise_dot(&values, &self.weights)
    }
}

/// Gauss–Legendre rule by Newton iteration on the three-term recurrence.
pub fn gauss_legendre_rule(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(invalid_argument("Gauss-Legendre rule needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

/// Product quadrature on S²: Gauss rings in t = x₃ times a uniform rule in longitude.
///
/// Nodes are stored ring-major (all longitudes of ring 0, then ring 1, ...).
#[derive(Debug, Clone)]
pub struct SphereGrid {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
    ring_t: Vec<f64>,
    ring_weights: Vec<f64>,
    n_phi: usize,
    exact_t_degree: usize,
}

impl SphereGrid {
    /// Plain product grid with `n_theta` Gauss rings and `n_phi` longitudes.
    pub fn product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi < 2 {
            return Err(invalid_argument(format!(
                "product grid needs n_theta >= 1 and n_phi >= 2, got ({n_theta}, {n_phi})"
            )));
        }
        let rule = gauss_legendre_rule(n_theta)?;
        let ring_weights = rule.weights.iter().map(|w| 0.5 * w).collect();
        Ok(Self::from_rings(rule.nodes, ring_weights, n_phi, 2 * n_theta - 1))
    }

    /// Grid split at the equator: `n_theta` Gauss rings on each hemisphere.
    ///
    /// Exact for polynomials of degree ≤ 2·n_theta − 1 and additionally for
    /// `|x₃|` times such polynomials, which the plain grid only approximates.
    pub fn kink_split(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi < 2 {
            return Err(invalid_argument(format!(
                "kink-split grid needs n_theta >= 1 and n_phi >= 2, got ({n_theta}, {n_phi})"
            )));
        }
        let rule = gauss_legendre_rule(n_theta)?;
        let (lo_t, lo_w) = rule.on_interval(-1.0, 0.0);
        let (hi_t, hi_w) = rule.on_interval(0.0, 1.0);
        let ring_t = lo_t.into_iter().chain(hi_t).collect();
        let ring_weights = lo_w.into_iter().chain(hi_w).map(|w| 0.5 * w).collect();
        Ok(Self::from_rings(ring_t, ring_weights, n_phi, 2 * n_theta - 1))
    }

    /// Smallest plain product grid able to analyze degree `l` exactly.
    pub fn for_degree(l: usize) -> Result<Self> {
        Self::product(l + 1, 2 * l + 2)
    }

    fn from_rings(ring_t: Vec<f64>, ring_weights: Vec<f64>, n_phi: usize, exact_t_degree: usize) -> Self {
        let mut nodes = Vec::with_capacity(ring_t.len() * n_phi);
        let mut weights = Vec::with_capacity(ring_t.len() * n_phi);
        let inv_phi = 1.0 / n_phi as f64;
        for (&t, &w) in ring_t.iter().zip(&ring_weights) {
            let s = (1.0 - t * t).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = TAU * j as f64 * inv_phi;
                nodes.push([s * phi.cos(), s * phi.sin(), t]);
                weights.push(w * inv_phi);
            }
        }
        Self {
            nodes,
            weights,
            ring_t,
            ring_weights,
            n_phi,
            exact_t_degree,
        }
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of latitude rings.
    pub fn n_theta(&self) -> usize {
        self.ring_t.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn ring_t(&self) -> &[f64] {
        &self.ring_t
    }

    /// σ-weight carried by each ring (sums to one).
    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }

    /// Longitude of node `j` on every ring.
    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    /// Highest polynomial degree in t integrated exactly.
    pub fn exact_t_degree(&self) -> usize {
        self.exact_t_degree
    }

    /// Largest band limit `l` for which products of degree-`l` harmonics are integrated exactly.
    pub fn max_analysis_degree(&self) -> usize {
        (self.exact_t_degree / 2).min((self.n_phi - 1) / 2)
    }

    /// σ-integral of nodal samples.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.nodes.len(), "one sample per grid node");
        pairwise_dot(samples, &self.weights)
    }

    pub fn integrate_fn(&self, f: impl Fn(&Vec3) -> f64 + Sync) -> f64 {
        use rayon::prelude::*;
        let samples: Vec<f64> = self.nodes.par_iter().map(&f).collect();
        self.integrate(&samples)
    }
}

/// Quasi-uniform directions on the golden-angle spiral.
///
/// With `hemisphere` set, all directions have x₃ ≥ 0. A single direction is the north pole.
pub fn fibonacci_directions(count: usize, hemisphere: bool) -> Vec<Vec3> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![E3];
    }
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let n = count as f64;
    (0..count)
        .map(|i| {
            let fi = i as f64;
            let z = if hemisphere {
                1.0 - (fi + 0.5) / n
            } else {
                1.0 - (2.0 * fi + 1.0) / n
            };
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = fi * golden_angle;
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}

/// Orthonormal frame (u, e₁′, e₂′) used to parametrize orbit circles about `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitFrame {
    pub axis: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl OrbitFrame {
    pub fn new(u: &Vec3) -> Result<Self> {
        vec3::check_unit(u)?;
        let a = if u[2].abs() < 0.9 { E3 } else { E1 };
        let e1 = vec3::normalize(&vec3::cross(&a, u))?;
        let e2 = vec3::cross(u, &e1);
        Ok(Self { axis: *u, e1, e2 })
    }

    /// Point t·u + √(1−t²)(cos φ e₁′ + sin φ e₂′).
    #[inline]
    pub fn point(&self, t: f64, phi: f64) -> Vec3 {
        let s = (1.0 - t * t).max(0.0).sqrt();
        let (sp, cp) = phi.sin_cos();
        let mut x = [0.0; 3];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = t * self.axis[i] + s * (cp * self.e1[i] + sp * self.e2[i]);
        }
        x
    }

    /// Coefficients (A, B, C) with ⟨x(φ), v⟩ = A + B cos φ + C sin φ on the orbit at height t.
    pub fn linear_form(&self, t: f64, v: &Vec3) -> (f64, f64, f64) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        (
            t * vec3::dot(&self.axis, v),
            s * vec3::dot(&self.e1, v),
            s * vec3::dot(&self.e2, v),
        )
    }
}

/// Rule for the normalized uniform measure on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleRule {
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl CircleRule {
    /// Equispaced rule, exact for trigonometric polynomials of degree < n.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid_argument("circle rule needs at least one node"));
        }
        let w = 1.0 / n as f64;
        Ok(Self {
            angles: (0..n).map(|j| TAU * j as f64 * w).collect(),
            weights: vec![w; n],
            panels: 1,
        })
    }

    /// Composite Gauss rule with one panel between each pair of cyclically
    /// consecutive breakpoints; `points_for(len)` picks the node count of a panel of
    /// length `len`. Empty breakpoints fall back to a uniform rule of `points_for(2π)` nodes.
    pub fn composite(breakpoints: &[f64], points_for: impl Fn(f64) -> usize) -> Result<Self> {
        let breaks = normalize_breakpoints(breakpoints);
        if breaks.is_empty() {
            return Self::uniform(points_for(TAU).max(1));
        }
        let mut angles = Vec::new();
        let mut weights = Vec::new();
        let p = breaks.len();
        for i in 0..p {
            let a = breaks[i];
            let b = if i + 1 < p { breaks[i + 1] } else { breaks[0] + TAU };
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let rule = gauss_legendre_rule(points_for(len).max(1))?;
            let (nodes, ws) = rule.on_interval(a, b);
            for (x, w) in nodes.into_iter().zip(ws) {
                angles.push(x.rem_euclid(TAU));
                weights.push(w / TAU);
            }
        }
        Ok(Self {
            angles,
            weights,
            panels: p,
        })
    }
}

/// Sorted, deduplicated angles in [0, 2π).
fn normalize_breakpoints(breakpoints: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = breakpoints
        .iter()
        .filter(|x| x.is_finite())
        .map(|x| x.rem_euclid(TAU))
        .map(|x| if x >= TAU { 0.0 } else { x })
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    if b.len() > 1 && (b[0] + TAU - b[b.len() - 1]) < 1e-13 {
        b.pop();
    }
    b
}

/// Points and σ-normalized weights on the orbit circle {x : ⟨x, u⟩ = t}.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRule {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl OrbitRule {
    pub fn average(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        let values: Vec<f64> = self.points.iter().map(f).collect();
        pairwise_dot(&values, &self.weights)
    }
}

/// Clamps t into [-1, 1], rejecting values beyond the 1e-12 slack.
pub fn clamp_height(t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 + 1e-12 {
        return Err(invalid_argument(format!("orbit height t = {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Orbit rule about `u` at height `t`, with `points_per_panel` Gauss nodes between
/// consecutive breakpoints (or that many uniform nodes when there are none).
pub fn orbit_rule(u: &Vec3, t: f64, breakpoints: &[f64], points_per_panel: usize) -> Result<OrbitRule> {
    let frame = OrbitFrame::new(u)?;
    let t = clamp_height(t)?;
    if points_per_panel == 0 {
        return Err(invalid_argument("points_per_panel must be positive"));
    }
    orbit_rule_with(&frame, t, breakpoints, |_| points_per_panel)
}

/// As [`orbit_rule`] but with a caller-chosen node count per panel length.
pub fn orbit_rule_with(
    frame: &OrbitFrame,
    t: f64,
    breakpoints: &[f64],
    points_for: impl Fn(f64) -> usize,
) -> Result<OrbitRule> {
    let t = clamp_height(t)?;
    if t.abs() == 1.0 {
        return Ok(OrbitRule {
            points: vec![vec3::scale(&frame.axis, t)],
            weights: vec![1.0],
        });
    }
    let circle = CircleRule::composite(breakpoints, points_for)?;
    let points = circle.angles.iter().map(|&phi| frame.point(t, phi)).collect();
    Ok(OrbitRule {
        points,
        weights: circle.weights,
    })
}

/// Quadrature for ∫₋₁¹ g(t) dt where g is analytic between the given breakpoints
/// and may carry half-integer power singularities at them and at t = ±1.
///
/// Panels live in θ = arccos t; each panel is mapped by θ = a + (b−a)·sin²(πs/2),
/// which turns endpoint singularities of square-root type into analytic integrands,
/// and then integrated with Gauss in s.
#[derive(Debug, Clone, PartialEq)]
pub struct ColatitudeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ColatitudeRule {
    pub fn new(t_breakpoints: &[f64], points_for: impl Fn(f64) -> usize) -> Result<Self> {
        let mut thetas: Vec<f64> = t_breakpoints
            .iter()
            .filter(|t| t.is_finite() && t.abs() < 1.0 - 1e-13)
            .map(|t| t.acos())
            .collect();
        thetas.push(0.0);
        thetas.push(PI);
        thetas.sort_by(f64::total_cmp);
        thetas.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in thetas.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = b - a;
            let rule = gauss_legendre_rule(points_for(len).max(2))?;
            let (ss, ws) = rule.on_interval(0.0, 1.0);
            for (s, w) in ss.into_iter().zip(ws) {
                let half = 0.5 * PI * s;
                let theta = a + len * half.sin().powi(2);
                let dtheta = len * 0.5 * PI * (PI * s).sin();
                nodes.push(theta.cos());
                weights.push(w * dtheta * theta.sin());
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        pairwise_dot(values, &self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gauss_rule_examples() {
        assert!(gauss_legendre_rule(0).is_err());
        let r1 = gauss_legendre_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);

        // moment equations through degree 3 force ±1/√3 with unit weights
        let r2 = gauss_legendre_rule(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r2.nodes[0] + x).abs() < 1e-15 && (r2.nodes[1] - x).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15 && (r2.weights[1] - 1.0).abs() < 1e-15);

        let r16 = gauss_legendre_rule(16).unwrap();
        assert!((r16.integrate(|t| t.powi(10)) - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        for n in [1, 2, 3, 7, 16, 64, 97, 200, 513] {
            let r = gauss_legendre_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn gauss_exactness_against_monomials() {
        let r = gauss_legendre_rule(24).unwrap();
        for p in 0..48 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((r.integrate(|t| t.powi(p)) - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn product_grid_examples() {
        let g = SphereGrid::product(64, 128).unwrap();
        assert!((g.integrate_fn(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((g.integrate_fn(|x| x[2] * x[2]) - 1.0 / 3.0).abs() < 1e-13);
        let split = SphereGrid::kink_split(64, 128).unwrap();
        assert!((split.integrate_fn(|x| x[2].abs()) - 0.5).abs() < 1e-13);
        assert!((split.integrate_fn(|x| x[0] * x[0] * x[2].abs()) - 0.125).abs() < 1e-13);
        // the plain rule is visibly inexact on the kink
        assert!((g.integrate_fn(|x| x[2].abs()) - 0.5).abs() > 1e-6);
    }

    #[test]
    fn grid_nodes_and_weights() {
        for g in [SphereGrid::product(96, 192).unwrap(), SphereGrid::kink_split(33, 20).unwrap()] {
            assert!(g.nodes().iter().all(|x| (vec3::norm(x) - 1.0).abs() < 1e-14));
            assert!(g.weights().iter().all(|&w| w >= 0.0));
            let total: f64 = crate::numeric::pairwise_sum(g.weights());
            assert!((total - 1.0).abs() < 1e-13);
        }
        assert!(SphereGrid::product(0, 4).is_err());
        assert!(SphereGrid::product(4, 1).is_err());
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
        let a = vec3::normalize(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).unwrap();
        let frame = OrbitFrame::new(&a).unwrap();
        let psi: f64 = rng.gen_range(0.0..TAU);
        let (s, c) = psi.sin_cos();
        let b1 = vec3::add(&vec3::scale(&frame.e1, c), &vec3::scale(&frame.e2, s));
        let b2 = vec3::cross(&a, &b1);
        [b1, b2, a]
    }

    #[test]
    fn rotation_invariance_of_grid_integrals() {
        let g = SphereGrid::product(16, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            // random polynomial of degree ≤ 8 in the coordinates
            let terms: Vec<(f64, [i32; 3])> = (0..12)
                .map(|_| {
                    let a = rng.gen_range(0..=3);
                    let b = rng.gen_range(0..=3);
                    let c = rng.gen_range(0..=2);
                    (rng.gen_range(-1.0..1.0), [a, b, c])
                })
                .collect();
            let p = |x: &Vec3| -> f64 {
                terms
                    .iter()
                    .map(|(c, e)| c * x[0].powi(e[0]) * x[1].powi(e[1]) * x[2].powi(e[2]))
                    .sum()
            };
            let base = g.integrate_fn(p);
            for _ in 0..10 {
                let rot = random_rotation(&mut rng);
                let rotated = g.integrate_fn(|x| {
                    let y = [vec3::dot(&rot[0], x), vec3::dot(&rot[1], x), vec3::dot(&rot[2], x)];
                    p(&y)
                });
                assert!((rotated - base).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fibonacci_examples() {
        assert_eq!(fibonacci_directions(1, false), vec![E3]);
        assert_eq!(fibonacci_directions(1, true), vec![E3]);
        let two = fibonacci_directions(2, false);
        let angle = vec3::dot(&two[0], &two[1]).clamp(-1.0, 1.0).acos();
        assert!(angle >= PI / 3.0);
        for hemi in [false, true] {
            let pts = fibonacci_directions(100, hemi);
            assert_eq!(pts.len(), 100);
            let mut min_angle = f64::INFINITY;
            for i in 0..pts.len() {
                assert!((vec3::norm(&pts[i]) - 1.0).abs() < 1e-14);
                if hemi {
                    assert!(pts[i][2] >= 0.0);
                }
                for j in 0..i {
                    let a = vec3::dot(&pts[i], &pts[j]).clamp(-1.0, 1.0).acos();
                    min_angle = min_angle.min(a);
                }
            }
            assert!(min_angle > 10f64.to_radians(), "hemisphere={hemi}: {min_angle}");
        }
    }

    #[test]
    fn orbit_rule_examples() {
        let pole = orbit_rule(&E3, 1.0, &[], 8).unwrap();
        assert_eq!(pole.points, vec![E3]);
        assert_eq!(pole.weights, vec![1.0]);

        let eq = orbit_rule(&E3, 0.0, &[], 16).unwrap();
        assert!((eq.average(|x| x[0] * x[0]) - 0.5).abs() < 1e-12);

        let quarter: Vec<f64> = (0..4).map(|i| i as f64 * PI / 2.0).collect();
        let kinked = orbit_rule(&E3, 0.0, &quarter, 12).unwrap();
        assert!((kinked.average(|x| x[0].abs() + x[1].abs()) - 4.0 / PI).abs() < 1e-10);

        assert!(orbit_rule(&E3, 1.0 + 1e-9, &[], 4).is_err());
        let clamped = orbit_rule(&E3, 1.0 + 1e-13, &[], 4).unwrap();
        assert_eq!(clamped.points.len(), 1);
        assert!(orbit_rule(&[1.0, 1.0, 0.0], 0.0, &[], 4).is_err());
    }

    #[test]
    fn orbit_rule_points_lie_on_the_orbit() {
        let u = vec3::normalize(&[0.3, -0.5, 0.8]).unwrap();
        let rule = orbit_rule(&u, -0.4, &[0.1, 2.0, 5.0], 9).unwrap();
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for p in &rule.points {
            assert!((vec3::dot(p, &u) + 0.4).abs() < 1e-14);
            assert!((vec3::norm(p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn frame_is_orthonormal_everywhere() {
        for u in fibonacci_directions(50, false) {
            let f = OrbitFrame::new(&u).unwrap();
            assert!(vec3::dot(&f.e1, &u).abs() < 1e-15);
            assert!(vec3::dot(&f.e2, &u).abs() < 1e-15);
            assert!(vec3::dot(&f.e1, &f.e2).abs() < 1e-15);
            assert!((vec3::norm(&f.e1) - 1.0).abs() < 1e-15);
            assert!((vec3::norm(&f.e2) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn colatitude_rule_handles_endpoint_roots() {
        let rule = ColatitudeRule::new(&[0.0], |len| (len * 10.0) as usize + 12).unwrap();
        let vals: Vec<f64> = rule.nodes.iter().map(|t| (1.0 - t * t).sqrt() + t.abs()).collect();
        // ∫ √(1−t²) dt = π/2, ∫ |t| dt = 1
        assert!((rule.integrate(&vals) - (PI / 2.0 + 1.0)).abs() < 1e-14);
        let vals: Vec<f64> = rule.nodes.iter().map(|t| (1.0 - t).powf(1.5)).collect();
        assert!((rule.integrate(&vals) - 2f64.powf(2.5) / 2.5).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn orbit_rule_integrates_trig_polynomials(
            seed in 0u64..1000,
            nbreak in 0usize..6,
            t in -0.99f64..0.99,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let breaks: Vec<f64> = (0..nbreak).map(|_| rng.gen_range(0.0..TAU)).collect();
            let coeffs: Vec<(f64, f64)> = (0..=6).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let frame = OrbitFrame::new(&E3).unwrap();
            let circle = CircleRule::composite(&breaks, |_| 32).unwrap();
            let value: f64 = circle.angles.iter().zip(&circle.weights).map(|(&phi, w)| {
                w * coeffs.iter().enumerate().map(|(m, (a, b))| a * (m as f64 * phi).cos() + b * (m as f64 * phi).sin()).sum::<f64>()
            }).sum();
            proptest::prop_assert!((value - coeffs[0].0).abs() < 1e-12);
            let rule = orbit_rule_with(&frame, t, &breaks, |_| 32).unwrap();
            let total: f64 = rule.weights.iter().sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-13);
        }
    }
}
