//! Support functions of centrally symmetric convex bodies.
//!
//! Polytopal models know where their support functions are non-smooth: the
//! great circles {⟨x, v⟩ = 0} of a set of *kink normals* `v`, plus (for the
//! octahedron) the ridge junctions. Orbit quadrature and harmonic analysis use
//! this to split their rules at the kinks.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid_argument, invalid_input, Result};
use crate::harmonics::{self, order_column, sh_eval, HarmonicCoeffs};
use crate::numeric::pairwise_vec_sum;
use crate::spheregrid::{orbit_rule_with, ColatitudeRule, OrbitFrame, SphereGrid};
use crate::vec3::{self, Vec3, E1, E2, E3};
use crate::PARITY_TOL;

#[derive(Debug, Clone, PartialEq)]
pub enum BodyModel {
    Ball { radius: f64 },
    /// The cube [−h, h]³, support h·‖x‖₁.
    Cube { half_width: f64 },
    /// The cross-polytope conv{±s·eᵢ}, support s·‖x‖∞.
    Octahedron { scale: f64 },
    /// {y : yᵀM⁻¹y ≤ 1}, support √(xᵀMx).
    Ellipsoid { matrix: [[f64; 3]; 3] },
    /// Σ wᵢ[−vᵢ, vᵢ] with unit vᵢ, support Σ wᵢ|⟨x, vᵢ⟩|.
    Zonotope { generators: Vec<Vec3>, weights: Vec<f64> },
    BandLimited(HarmonicCoeffs),
}

/// Where a band-limited model came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Analytic,
    Coefficients,
    /// Grid samples, analyzed at construction.
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    model: BodyModel,
    label: String,
    origin: Origin,
}

/// Breakpoint angles of the support integrand on one orbit circle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KinkSet {
    pub angles: Vec<f64>,
}

impl KinkSet {
    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenCheck {
    pub pass: bool,
    pub max_asymmetry: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublinearCheck {
    pub pass: bool,
    pub worst_violation: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid_argument(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl Body {
    pub fn ball(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self::analytic(BodyModel::Ball { radius }, "ball"))
    }

    pub fn cube(half_width: f64) -> Result<Self> {
        positive("half_width", half_width)?;
        Ok(Self::analytic(BodyModel::Cube { half_width }, "cube"))
    }

    pub fn octahedron(scale: f64) -> Result<Self> {
        positive("scale", scale)?;
        Ok(Self::analytic(BodyModel::Octahedron { scale }, "octahedron"))
    }

    /// Ellipsoid with support √(xᵀMx); `M` must be symmetric positive definite.
    pub fn ellipsoid(matrix: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if !matrix[i][j].is_finite() || (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * (1.0 + matrix[i][j].abs()) {
                    return Err(invalid_argument("ellipsoid matrix must be finite and symmetric"));
                }
            }
        }
        // Cholesky succeeds iff M is positive definite
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = matrix[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(invalid_argument("ellipsoid matrix must be positive definite"));
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Ok(Self::analytic(BodyModel::Ellipsoid { matrix }, "ellipsoid"))
    }

    /// Zonotope Σ wᵢ[−gᵢ, gᵢ]. Generators need not be unit: their lengths are
    /// folded into the weights.
    pub fn zonotope(generators: &[Vec3], weights: &[f64]) -> Result<Self> {
        if generators.is_empty() || generators.len() != weights.len() {
            return Err(invalid_argument(format!(
                "zonotope needs matching nonempty generators and weights ({} vs {})",
                generators.len(),
                weights.len()
            )));
        }
        let mut gens = Vec::with_capacity(generators.len());
        let mut ws = Vec::with_capacity(weights.len());
        for (g, &w) in generators.iter().zip(weights) {
            positive("zonotope weight", w)?;
            let n = vec3::norm(g);
            gens.push(vec3::normalize(g)?);
            ws.push(w * n);
        }
        Ok(Self::analytic(
            BodyModel::Zonotope {
                generators: gens,
                weights: ws,
            },
            "zonotope",
        ))
    }

    /// Band-limited support function; it must be strictly positive.
    pub fn bandlimited(coeffs: HarmonicCoeffs) -> Result<Self> {
        let body = Self {
            model: BodyModel::BandLimited(coeffs),
            label: "bandlimited".into(),
            origin: Origin::Coefficients,
        };
        body.check_positive()?;
        Ok(body)
    }

    /// Support values sampled on a grid; analyzed at the grid's largest exact degree.
    pub fn sampled(grid: &SphereGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid_argument(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input(format!(
                "support samples must be finite and strictly positive (minimum {min})"
            )));
        }
        let coeffs = harmonics::analyze(grid, values, grid.max_analysis_degree())?;
        Ok(Self {
            model: BodyModel::BandLimited(coeffs),
            label: "sampled".into(),
            origin: Origin::Sampled,
        })
    }

    fn analytic(model: BodyModel, label: &str) -> Self {
        Self {
            model,
            label: label.into(),
            origin: Origin::Analytic,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn model(&self) -> &BodyModel {
        &self.model
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Band limit of band-limited models.
    pub fn band_limit(&self) -> Option<usize> {
        match &self.model {
            BodyModel::BandLimited(c) => Some(c.l_max()),
            _ => None,
        }
    }

    fn check_positive(&self) -> Result<()> {
        if let BodyModel::BandLimited(c) = &self.model {
            let grid = SphereGrid::for_degree(c.l_max().max(8) * 2)?;
            let values = harmonics::synthesize_grid(c, &grid);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min > 0.0) {
                return Err(invalid_input(format!(
                    "support function must be strictly positive, sampled minimum is {min}"
                )));
            }
        }
        Ok(())
    }

    /// h_K(x) for a unit vector x.
    pub fn support_eval(&self, x: &Vec3) -> Result<f64> {
        vec3::check_unit(x)?;
        Ok(self.support(x))
    }

    /// h_K(x) without the unit-norm check.
    pub fn support(&self, x: &Vec3) -> f64 {
        match &self.model {
            BodyModel::Ball { radius } => *radius,
            BodyModel::Cube { half_width } => half_width * (x[0].abs() + x[1].abs() + x[2].abs()),
            BodyModel::Octahedron { scale } => scale * x[0].abs().max(x[1].abs()).max(x[2].abs()),
            BodyModel::Ellipsoid { matrix } => {
                let mut q = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        q += x[i] * matrix[i][j] * x[j];
                    }
                }
                q.max(0.0).sqrt()
            }
            BodyModel::Zonotope { generators, weights } => generators
                .iter()
                .zip(weights)
                .map(|(v, w)| w * vec3::dot(x, v).abs())
                .sum(),
            BodyModel::BandLimited(c) => harmonics::synthesize(c, &[*x])[0],
        }
    }

    /// Normals of the great circles on which the support function has a kink.
    pub fn kink_normals(&self) -> Vec<Vec3> {
        match &self.model {
            BodyModel::Cube { .. } => vec![E1, E2, E3],
            BodyModel::Octahedron { .. } => {
                let r = FRAC_1_SQRT_2;
                vec![
                    E1,
                    E2,
                    E3,
                    [r, r, 0.0],
                    [r, -r, 0.0],
                    [r, 0.0, r],
                    [r, 0.0, -r],
                    [0.0, r, r],
                    [0.0, r, -r],
                ]
            }
            BodyModel::Zonotope { generators, .. } => generators.clone(),
            _ => Vec::new(),
        }
    }

    /// Points where several kink arcs meet (up to sign).
    pub fn kink_vertices(&self) -> Vec<Vec3> {
        match &self.model {
            BodyModel::Octahedron { .. } => {
                let r = 1.0 / 3f64.sqrt();
                vec![[r, r, r], [r, r, -r], [r, -r, r], [-r, r, r]]
            }
            _ => Vec::new(),
        }
    }

    /// Angles on the orbit circle {⟨x,u⟩ = t} where the support integrand is non-smooth.
    pub fn orbit_kinks(&self, u: &Vec3, t: f64) -> Result<KinkSet> {
        let frame = OrbitFrame::new(u)?;
        let t = crate::spheregrid::clamp_height(t)?;
        Ok(self.orbit_kinks_in(&frame, t))
    }

    pub(crate) fn orbit_kinks_in(&self, frame: &OrbitFrame, t: f64) -> KinkSet {
        let mut angles = Vec::new();
        for v in self.kink_normals() {
            let (a, b, c) = frame.linear_form(t, &v);
            let r = (b * b + c * c).sqrt();
            if r <= 1e-14 || a.abs() >= r {
                continue;
            }
            let psi = c.atan2(b);
            let delta = (-a / r).clamp(-1.0, 1.0).acos();
            for phi in [psi - delta, psi + delta] {
                angles.push(phi.rem_euclid(std::f64::consts::TAU));
            }
        }
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        KinkSet { angles }
    }

    /// Heights t where the spin profile about `u` is non-smooth.
    pub fn profile_breakpoints(&self, u: &Vec3) -> Vec<f64> {
        let mut ts = Vec::new();
        for v in self.kink_normals() {
            let c = vec3::dot(u, &v).clamp(-1.0, 1.0);
            let t = (1.0 - c * c).max(0.0).sqrt();
            ts.push(t);
            ts.push(-t);
        }
        for w in self.kink_vertices() {
            let c = vec3::dot(u, &w);
            ts.push(c);
            ts.push(-c);
        }
        ts.retain(|t| t.abs() < 1.0 - 1e-13);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
        ts
    }

    /// Compares h(x) with h(−x) at every grid node.
    pub fn check_even(&self, grid: &SphereGrid, tol: f64) -> EvenCheck {
        let (asym, max_h) = grid
            .nodes()
            .par_iter()
            .map(|x| {
                let a = self.support(x);
                let b = self.support(&vec3::neg(x));
                ((a - b).abs(), a.abs().max(b.abs()))
            })
            .reduce(|| (0.0, 0.0), |p, q| (p.0.max(q.0), p.1.max(q.1)));
        EvenCheck {
            pass: asym <= tol * max_h,
            max_asymmetry: asym,
        }
    }

    /// Parity requirement enforced by the transforms: analytic models are even by
    /// construction, band-limited ones within [`PARITY_TOL`].
    pub fn require_even(&self) -> Result<()> {
        match &self.model {
            BodyModel::BandLimited(c) => c.check_even(PARITY_TOL),
            _ => Ok(()),
        }
    }

    /// Random test of H(x+y) ≤ H(x) + H(y) for the 1-homogeneous extension H.
    pub fn check_sublinear<R: Rng + ?Sized>(&self, trials: usize, tol: f64, rng: &mut R) -> Result<SublinearCheck> {
        if trials == 0 {
            return Err(invalid_argument("check_sublinear needs at least one trial"));
        }
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let x = random_unit(rng);
            let y = random_unit(rng);
            let z = vec3::add(&x, &y);
            let nz = vec3::norm(&z);
            if nz < 1e-8 {
                continue;
            }
            let hz = nz * self.support(&vec3::scale(&z, 1.0 / nz));
            let violation = hz - self.support(&x) - self.support(&y);
            worst = worst.max(violation);
        }
        Ok(SublinearCheck {
            pass: worst <= tol,
            worst_violation: worst,
        })
    }

    /// Harmonic coefficients of the support function up to degree `l`.
    ///
    /// Closed forms for balls and zonotopes (a segment contributes λ_k·Y_{k,m}(v));
    /// kink-aware quadrature for the octahedron and ellipsoid; exact resizing for
    /// band-limited models.
    pub fn harmonic_coeffs(&self, l: usize) -> Result<HarmonicCoeffs> {
        match &self.model {
            BodyModel::Ball { radius } => {
                let mut c = HarmonicCoeffs::zeros(l);
                c.set(0, 0, *radius);
                Ok(c)
            }
            BodyModel::Cube { half_width } => zonotope_coeffs(&[E1, E2, E3], &[*half_width; 3], l),
            BodyModel::Zonotope { generators, weights } => zonotope_coeffs(generators, weights, l),
            BodyModel::BandLimited(c) => Ok(c.resized(l)),
            BodyModel::Octahedron { .. } | BodyModel::Ellipsoid { .. } => Ok(self.kink_aware_coeffs(l)),
        }
    }

    /// Harmonic analysis by orbit quadrature about e₃, split at every kink in
    /// longitude and colatitude.
    pub fn kink_aware_coeffs(&self, l: usize) -> HarmonicCoeffs {
        let frame = OrbitFrame::new(&E3).expect("e3 is a unit vector");
        let lf = l as f64;
        let t_rule = ColatitudeRule::new(&self.profile_breakpoints(&E3), |len| (0.8 * lf * len).ceil() as usize + 24)
            .expect("positive node counts");
        let count = sh_count_for(l);
        let ring = |i: usize| -> Vec<f64> {
            let t = t_rule.nodes[i];
            let kinks = self.orbit_kinks_in(&frame, t);
            let rule = orbit_rule_with(&frame, t, &kinks.angles, |len| {
                if kinks.is_empty() {
                    2 * l + 32
                } else {
                    (0.5 * lf * len).ceil() as usize + 16
                }
            })
            .expect("height within range");
            // Fourier sums of h along the ring
            let mut fc = vec![0.0; l + 1];
            let mut fs = vec![0.0; l + 1];
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let h = self.support(x) * w;
                let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let (c1, s1) = if s > 0.0 { (x[0] / s, x[1] / s) } else { (1.0, 0.0) };
                let (mut cm, mut sm) = (1.0, 0.0);
                for m in 0..=l {
                    fc[m] += h * cm;
                    fs[m] += h * sm;
                    let nc = cm * c1 - sm * s1;
                    sm = sm * c1 + cm * s1;
                    cm = nc;
                }
            }
            let wt = 0.5 * t_rule.weights[i];
            let mut out = vec![0.0; count];
            let mut column = vec![0.0; l + 1];
            for m in 0..=l {
                let col = &mut column[..l + 1 - m];
                order_column(m, t, col);
                for (r, theta) in col.iter().enumerate() {
                    let k = m + r;
                    out[harmonics::sh_index(k, m as i64)] = wt * theta * fc[m];
                    if m > 0 {
                        out[harmonics::sh_index(k, -(m as i64))] = wt * theta * fs[m];
                    }
                }
            }
            out
        };
        let data = pairwise_vec_sum(t_rule.nodes.len(), count, &ring);
        HarmonicCoeffs::from_vec(l, data).expect("finite quadrature")
    }
}

fn sh_count_for(l: usize) -> usize {
    harmonics::sh_count(l)
}

fn zonotope_coeffs(generators: &[Vec3], weights: &[f64], l: usize) -> Result<HarmonicCoeffs> {
    let table = harmonics::cosine_multipliers(l);
    let mut c = HarmonicCoeffs::zeros(l);
    for (v, w) in generators.iter().zip(weights) {
        let y = sh_eval(l, v)?;
        for k in (0..=l).step_by(2) {
            let lam = table.get(k) * w;
            for (i, ci) in c.degree_mut(k).iter_mut().enumerate() {
                *ci += lam * y[k * k + i];
            }
        }
    }
    Ok(c)
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = vec3::norm(&v);
        if n > 0.1 && n <= 1.0 {
            return vec3::scale(&v, 1.0 / n);
        }
    }
}
