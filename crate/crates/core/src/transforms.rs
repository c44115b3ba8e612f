//! The cosine transform, the spin operator and Poisson smoothing on S².
//!
//! All three are diagonal in the harmonic basis: 𝒞 multiplies degree k by λ_k,
//! P_r by r^k, and the spin S_u collapses each degree onto its zonal component
//! about u. Each operator also has a quadrature route that does not go through
//! the spectral representation.

use rayon::prelude::*;

use crate::bodies::Body;
use crate::error::{invalid_argument, Result, SpinError};
use crate::harmonics::{self, cosine_multipliers, legendre_all, legendre_series, HarmonicCoeffs, MultiplierTable};
use crate::numeric::pairwise_dot;
use crate::spheregrid::{orbit_rule_with, ColatitudeRule, OrbitFrame, SphereGrid};
use crate::vec3::{self, Vec3};
use crate::PARITY_TOL;

/// Default threshold below which a multiplier is treated as zero during inversion.
pub const DEFAULT_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Support function of a spin body.
    Support,
    /// Generating density of a spin body.
    Generating,
    Generic,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Support => "support",
            ProfileKind::Generating => "generating",
            ProfileKind::Generic => "generic",
        }
    }
}

/// Orbit averages computed directly at chosen heights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// Value at t = 1, i.e. the function at the axis itself.
    pub pole: f64,
}

/// Zonal function g(x) = Σ a_k P_k(⟨x, u⟩) about the axis u.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalProfile {
    axis: Vec3,
    legendre: Vec<f64>,
    kind: ProfileKind,
    nodal: Option<NodalSamples>,
}

impl ZonalProfile {
    pub fn new(axis: Vec3, legendre: Vec<f64>, kind: ProfileKind) -> Self {
        Self {
            axis,
            legendre,
            kind,
            nodal: None,
        }
    }

    pub fn with_kind(mut self, kind: ProfileKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_nodal(mut self, nodal: NodalSamples) -> Self {
        self.nodal = Some(nodal);
        self
    }

    pub fn axis(&self) -> &Vec3 {
        &self.axis
    }

    pub fn legendre(&self) -> &[f64] {
        &self.legendre
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn nodal(&self) -> Option<&NodalSamples> {
        self.nodal.as_ref()
    }

    /// Highest stored degree.
    pub fn degree(&self) -> usize {
        self.legendre.len().saturating_sub(1)
    }

    /// Σ a_k P_k(t).
    pub fn eval(&self, t: f64) -> f64 {
        legendre_series(&self.legendre, t)
    }

    /// Coefficients truncated or zero-padded to degree `l`; nodal samples are dropped.
    pub fn resized(&self, l: usize) -> Self {
        let mut a = self.legendre.clone();
        a.resize(l + 1, 0.0);
        Self::new(self.axis, a, self.kind)
    }

    pub fn max_abs(&self) -> f64 {
        self.legendre.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Largest odd-degree coefficient and its degree.
    pub fn worst_odd(&self) -> Option<(usize, f64)> {
        self.legendre
            .iter()
            .enumerate()
            .skip(1)
            .step_by(2)
            .map(|(k, a)| (k, a.abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn check_even(&self, tol: f64) -> Result<()> {
        let scale = self.max_abs();
        if let Some((k, worst)) = self.worst_odd() {
            if worst > tol * scale {
                return Err(SpinError::InvalidInput(format!(
                    "zonal profile is not even: degree {k} carries {worst:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn map_degrees(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        self.legendre.iter().enumerate().map(|(k, a)| a * f(k)).collect()
    }

    /// 𝒞 applied to the zonal function: degree k scaled by λ_k (Funk–Hecke).
    pub fn cosine(&self) -> Result<Self> {
        self.check_even(PARITY_TOL)?;
        let table = cosine_multipliers(self.degree());
        Ok(Self::new(self.axis, self.map_degrees(|k| table.get(k)), self.kind))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let n = self.legendre.len().max(other.legendre.len());
        (0..n)
            .map(|k| {
                let a = self.legendre.get(k).copied().unwrap_or(0.0);
                let b = other.legendre.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Σ a_k P_k(t) at each t; every |t| must be ≤ 1.
pub fn zonal_eval(profile: &ZonalProfile, t_values: &[f64]) -> Result<Vec<f64>> {
    t_values
        .iter()
        .map(|&t| {
            let t = crate::spheregrid::clamp_height(t)?;
            Ok(profile.eval(t))
        })
        .collect()
}

/// Generating coefficients ρ with 𝒞ρ = h, plus the degrees left out of the inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingCoeffs {
    pub coeffs: HarmonicCoeffs,
    pub suppressed: Vec<usize>,
}

/// Direct quadrature Σ_j w_j |⟨x, y_j⟩| f(y_j) at each evaluation point.
pub fn cosine_quadrature(grid: &SphereGrid, f_samples: &[f64], eval_points: &[Vec3]) -> Result<Vec<f64>> {
    if f_samples.len() != grid.len() {
        return Err(invalid_argument(format!(
            "{} samples for a grid of {} nodes",
            f_samples.len(),
            grid.len()
        )));
    }
    let weighted: Vec<f64> = f_samples.iter().zip(grid.weights()).map(|(f, w)| f * w).collect();
    Ok(eval_points
        .par_iter()
        .map(|x| {
            let kernel: Vec<f64> = grid.nodes().iter().map(|y| vec3::dot(x, y).abs()).collect();
            pairwise_dot(&kernel, &weighted)
        })
        .collect())
}

/// 𝒞 on harmonic coefficients: degree k scaled by λ_k.
pub fn cosine_spectral(coeffs: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
    coeffs.check_even(PARITY_TOL)?;
    let table = cosine_multipliers(coeffs.l_max());
    Ok(coeffs.map_degrees(|k| table.get(k)))
}

/// 𝒞⁻¹ on harmonic coefficients: degree k divided by λ_k wherever |λ_k| exceeds the guard.
pub fn inverse_cosine_spectral(coeffs: &HarmonicCoeffs, guard_threshold: f64) -> Result<GeneratingCoeffs> {
    if !(guard_threshold > 0.0) {
        return Err(invalid_argument(format!("guard threshold must be positive, got {guard_threshold}")));
    }
    let table = cosine_multipliers(coeffs.l_max());
    let suppressed = check_invertible(
        &table,
        coeffs.l_max(),
        coeffs.max_abs(),
        guard_threshold,
        |k| coeffs.degree(k).iter().fold(0.0f64, |m, c| m.max(c.abs())),
    )?;
    let out = coeffs.map_degrees(|k| if suppressed.contains(&k) || k % 2 == 1 { 0.0 } else { 1.0 / table.get(k) });
    Ok(GeneratingCoeffs {
        coeffs: out,
        suppressed,
    })
}

/// Shared guard logic: returns suppressed even degrees, or an ill-posed error when
/// a degree that cannot be inverted carries content.
pub(crate) fn check_invertible(
    table: &MultiplierTable,
    l: usize,
    scale: f64,
    guard: f64,
    degree_size: impl Fn(usize) -> f64,
) -> Result<Vec<usize>> {
    let mut suppressed = Vec::new();
    for k in 0..=l {
        let lam = table.get(k);
        let odd = k % 2 == 1;
        if odd || lam.abs() <= guard {
            let size = degree_size(k);
            if size > PARITY_TOL * scale {
                let why = if odd { "odd degree" } else { "degree with vanishing multiplier" };
                return Err(SpinError::IllPosed(format!(
                    "{why} {k} carries {size:.3e}; the cosine transform cannot produce it"
                )));
            }
            if !odd {
                suppressed.push(k);
            }
        }
    }
    Ok(suppressed)
}

/// Options for the orbit route of the spin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOptions {
    /// Degree of the returned Legendre expansion.
    pub degree: usize,
    /// Gauss nodes per panel between consecutive orbit kinks.
    pub panel_points: usize,
}

impl Default for SpinOptions {
    fn default() -> Self {
        Self {
            degree: 64,
            panel_points: 12,
        }
    }
}

/// Spin of a body about `u` by direct orbit averaging.
///
/// The returned profile carries the orbit averages at `t_nodes` (and at the pole)
/// as nodal samples. Its Legendre coefficients are projected with a colatitude
/// rule split at the body's profile breakpoints, so kinked profiles (polytopes)
/// still get coefficients accurate to rounding.
pub fn spin_orbit(body: &Body, u: &Vec3, t_nodes: &[f64], options: &SpinOptions) -> Result<ZonalProfile> {
    body.require_even()?;
    let frame = OrbitFrame::new(u)?;
    if options.panel_points == 0 {
        return Err(invalid_argument("panel_points must be positive"));
    }
    let t_nodes: Vec<f64> = t_nodes
        .iter()
        .map(|&t| crate::spheregrid::clamp_height(t))
        .collect::<Result<_>>()?;

    let band = body.band_limit().unwrap_or(0);
    let smooth_points = (4 * options.panel_points).max(2 * band + 2);
    let average = |t: f64| -> f64 {
        let kinks = body.orbit_kinks_in(&frame, t);
        let rule = orbit_rule_with(&frame, t, &kinks.angles, |_| {
            if kinks.is_empty() {
                smooth_points
            } else {
                options.panel_points
            }
        })
        .expect("height already clamped");
        rule.average(|x| body.support(x))
    };

    let values: Vec<f64> = t_nodes.par_iter().map(|&t| average(t)).collect();
    let pole = average(1.0);

    let l = options.degree;
    let effective = (l + band) as f64;
    let rule = ColatitudeRule::new(&body.profile_breakpoints(u), |len| (0.8 * effective * len).ceil() as usize + 24)?;
    let g: Vec<f64> = rule.nodes.par_iter().map(|&t| average(t)).collect();
    let legendre = project_legendre(&rule.nodes, &rule.weights, &g, l);

    Ok(ZonalProfile::new(*u, legendre, ProfileKind::Support).with_nodal(NodalSamples {
        t: t_nodes,
        values,
        pole,
    }))
}

/// a_k = (2k+1)/2 ∫ g(t) P_k(t) dt for k ≤ l, given a rule for ∫₋₁¹ dt.
pub(crate) fn project_legendre(nodes: &[f64], weights: &[f64], g: &[f64], l: usize) -> Vec<f64> {
    let tables: Vec<Vec<f64>> = nodes.par_iter().map(|&t| legendre_all(l, t)).collect();
    let gw: Vec<f64> = g.iter().zip(weights).map(|(a, b)| a * b).collect();
    (0..=l)
        .into_par_iter()
        .map(|k| {
            let pk: Vec<f64> = tables.iter().map(|p| p[k]).collect();
            0.5 * (2 * k + 1) as f64 * pairwise_dot(&pk, &gw)
        })
        .collect()
}

/// Spin of a band-limited function about `u` via its harmonic coefficients.
pub fn spin_spectral(coeffs: &HarmonicCoeffs, u: &Vec3) -> Result<ZonalProfile> {
    Ok(harmonics::project_zonal(coeffs, u)?.with_kind(ProfileKind::Support))
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid_argument(format!("Poisson radius must lie in (0, 1), got {r}")));
    }
    Ok(())
}

/// Poisson smoothing P_r: degree k scaled by r^k.
pub trait PoissonSmooth: Sized {
    fn poisson_smooth(&self, r: f64) -> Result<Self>;
}

impl PoissonSmooth for HarmonicCoeffs {
    fn poisson_smooth(&self, r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(self.map_degrees(|k| r.powi(k as i32)))
    }
}

impl PoissonSmooth for ZonalProfile {
    fn poisson_smooth(&self, r: f64) -> Result<Self> {
        check_radius(r)?;
        Ok(Self::new(self.axis, self.map_degrees(|k| r.powi(k as i32)), self.kind))
    }
}

/// Poisson kernel (1 − r²)/‖x − ry‖³ as a function of s = ⟨x, y⟩.
pub fn poisson_kernel(r: f64, s: f64) -> f64 {
    (1.0 - r * r) / (1.0 + r * r - 2.0 * r * s).powf(1.5)
}

/// P_r f at each point by direct quadrature of the kernel against grid samples.
pub fn poisson_quadrature(grid: &SphereGrid, samples: &[f64], r: f64, points: &[Vec3]) -> Result<Vec<f64>> {
    check_radius(r)?;
    if samples.len() != grid.len() {
        return Err(invalid_argument(format!(
            "{} samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    let weighted: Vec<f64> = samples.iter().zip(grid.weights()).map(|(f, w)| f * w).collect();
    Ok(points
        .par_iter()
        .map(|x| {
            let kernel: Vec<f64> = grid.nodes().iter().map(|y| poisson_kernel(r, vec3::dot(x, y))).collect();
            pairwise_dot(&kernel, &weighted)
        })
        .collect())
}
