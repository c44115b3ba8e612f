//! Zonoid certification.
//!
//! A body is a zonoid exactly when its generating distribution is a positive
//! measure. Numerically that is tested by smoothing the generating coefficients
//! with the Poisson multipliers r^k and looking for negative values. Two
//! thresholds separate the verdicts, and a negative verdict must survive doubling
//! the band limit.
//!
//! Truncation needs care: even a positive measure has a truncated smoothed
//! density that rings below zero, because the truncated Poisson kernel
//! `Σ_{k≤L} (2k+1) r^k P_k` has negative lobes. If μ ≥ 0 with mass m, the
//! truncated density is bounded below by `m · min K_{r,L}`. That bound (the
//! *allowance*) is added to both thresholds. A non-zonoid verdict is therefore a
//! genuine refutation of positivity, up to coefficient accuracy, and ringing
//! never fakes one.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bodies::{Body, BodyModel};
use crate::error::{invalid_argument, Result};
use crate::harmonics::{self, cosine_multipliers, legendre_series, HarmonicCoeffs};
use crate::numeric::pairwise_dot;
use crate::spheregrid::SphereGrid;
use crate::transforms::{
    check_invertible, inverse_cosine_spectral, spin_orbit, spin_spectral, PoissonSmooth, ProfileKind, SpinOptions,
    ZonalProfile, DEFAULT_GUARD,
};
use crate::vec3::{self, Vec3};
use crate::{MAX_DEGREE, PARITY_TOL};

/// Coefficients below this size count as a zero body.
const ZERO_BODY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ZonoidConsistent,
    NonZonoid,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ZonoidConsistent => "zonoid-consistent",
            Verdict::NonZonoid => "non-zonoid",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyParams {
    /// Band limit of the first level; the stability check uses `2·l_max`.
    pub l_max: usize,
    pub r_ladder: Vec<f64>,
    /// Positive threshold, relative to the largest smoothed density.
    pub eps_pos: f64,
    /// Negative threshold, relative to the largest smoothed density.
    pub eps_neg: f64,
    /// Uniform evaluation points in [−1, 1] for zonal profiles.
    pub t_grid: usize,
    pub guard: f64,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self {
            l_max: 64,
            r_ladder: vec![0.90, 0.95, 0.99],
            eps_pos: 1e-6,
            eps_neg: 1e-3,
            t_grid: 2001,
            guard: DEFAULT_GUARD,
        }
    }
}

impl CertifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.l_max < 2 || self.l_max > MAX_DEGREE {
            return Err(invalid_argument(format!(
                "band limit must lie in 2..={MAX_DEGREE}, got {}",
                self.l_max
            )));
        }
        if self.r_ladder.is_empty() {
            return Err(invalid_argument("r ladder is empty"));
        }
        if let Some(r) = self.r_ladder.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(invalid_argument(format!("Poisson radius must lie in (0, 1), got {r}")));
        }
        if !(self.eps_pos > 0.0 && self.eps_pos < self.eps_neg) {
            return Err(invalid_argument(format!(
                "need 0 < eps_pos < eps_neg, got {} and {}",
                self.eps_pos, self.eps_neg
            )));
        }
        if self.t_grid < 3 {
            return Err(invalid_argument("t grid needs at least 3 points"));
        }
        if !(self.guard > 0.0) {
            return Err(invalid_argument("guard threshold must be positive"));
        }
        Ok(())
    }
}

/// Where a minimum was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    /// Height t = ⟨x, u⟩ of a zonal profile.
    Height(f64),
    Direction(Vec3),
}

/// Minimum of one smoothed density at one band limit.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMinimum {
    pub degree: usize,
    pub min: f64,
    pub at: Location,
    /// Largest |density|; the relative thresholds scale with it.
    pub scale: f64,
    /// Lower bound the truncated density of a positive measure can ring down to.
    pub allowance: f64,
}

impl LevelMinimum {
    /// (min + allowance) / scale: negative when the minimum dips below what
    /// truncation alone can explain.
    pub fn margin(&self) -> f64 {
        if self.scale > 0.0 {
            (self.min + self.allowance) / self.scale
        } else {
            0.0
        }
    }

    fn consistent(&self, eps_pos: f64) -> bool {
        self.min >= -(eps_pos * self.scale + self.allowance)
    }

    fn negative(&self, eps_neg: f64) -> bool {
        self.min <= -(eps_neg * self.scale + self.allowance)
    }
}

/// Minima at L and 2L for one Poisson radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusMinimum {
    pub r: f64,
    pub base: LevelMinimum,
    pub doubled: LevelMinimum,
}

impl RadiusMinimum {
    /// Negative at both levels, with minima within a factor 2 of each other.
    pub fn stable_negative(&self, eps_neg: f64) -> bool {
        let ratio = self.base.min / self.doubled.min;
        self.base.negative(eps_neg) && self.doubled.negative(eps_neg) && (0.5..=2.0).contains(&ratio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub minima: Vec<RadiusMinimum>,
    pub nnls_residual: Option<f64>,
    pub params: CertifyParams,
    pub label: String,
    pub zero_body: bool,
}

impl Certificate {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_nnls_residual(mut self, residual: f64) -> Self {
        self.nnls_residual = Some(residual);
        self
    }

    /// Ladder entry whose first-level minimum sits furthest below its allowance,
    /// relative to scale.
    pub fn worst(&self) -> Option<&RadiusMinimum> {
        self.minima.iter().min_by(|a, b| a.base.margin().total_cmp(&b.base.margin()))
    }

    fn zero(params: &CertifyParams) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            minima: Vec::new(),
            nnls_residual: None,
            params: params.clone(),
            label: String::new(),
            zero_body: true,
        }
    }

    fn from_minima(minima: Vec<RadiusMinimum>, params: &CertifyParams) -> Self {
        let verdict = if minima.iter().any(|m| m.stable_negative(params.eps_neg)) {
            Verdict::NonZonoid
        } else if minima
            .iter()
            .all(|m| m.base.consistent(params.eps_pos) && m.doubled.consistent(params.eps_pos))
        {
            Verdict::ZonoidConsistent
        } else {
            Verdict::Inconclusive
        };
        Self {
            verdict,
            minima,
            nnls_residual: None,
            params: params.clone(),
            label: String::new(),
            zero_body: false,
        }
    }
}

/// Values at `n` uniformly spaced points of [−1, 1].
pub fn uniform_heights(n: usize) -> Vec<f64> {
    let step = 2.0 / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { 1.0 } else { -1.0 + step * i as f64 }).collect()
}

/// `max(0, −min_s Σ_{k even ≤ l} (2k+1) r^k P_k(s))`: how far below zero the even
/// truncated Poisson kernel reaches, per unit of mass.
pub fn kernel_floor(r: f64, l: usize) -> f64 {
    let coeffs: Vec<f64> = (0..=l)
        .map(|k| if k % 2 == 0 { (2 * k + 1) as f64 * r.powi(k as i32) } else { 0.0 })
        .collect();
    // even in s, so [0, 1] suffices; sample, then polish the deepest local minima
    let n = (16 * l).max(2001);
    let h = 1.0 / (n - 1) as f64;
    let f = |s: f64| legendre_series(&coeffs, s);
    let values: Vec<f64> = (0..n).into_par_iter().map(|i| f(i as f64 * h)).collect();
    let mut dips: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || values[i] <= values[i - 1]) && (i == n - 1 || values[i] <= values[i + 1]))
        .collect();
    dips.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let min = dips
        .iter()
        .take(8)
        .map(|&i| golden_min(&f, (i as f64 - 1.0).max(0.0) * h, ((i + 1) as f64 * h).min(1.0)))
        .fold(values.iter().copied().fold(f64::INFINITY, f64::min), f64::min);
    (-min).max(0.0)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Generating profile of a zonal support profile: b_k ↦ b_k / λ_k.
pub fn generating_profile(profile: &ZonalProfile) -> Result<ZonalProfile> {
    generating_profile_with(profile, DEFAULT_GUARD)
}

pub fn generating_profile_with(profile: &ZonalProfile, guard: f64) -> Result<ZonalProfile> {
    if profile.kind() == ProfileKind::Generating {
        return Err(invalid_argument("profile is already a generating profile"));
    }
    if !(guard > 0.0) {
        return Err(invalid_argument(format!("guard threshold must be positive, got {guard}")));
    }
    let l = profile.degree();
    let table = cosine_multipliers(l);
    let a = profile.legendre();
    let suppressed = check_invertible(&table, l, profile.max_abs(), guard, |k| a[k].abs())?;
    let g = profile.map_degrees(|k| {
        if k % 2 == 1 || suppressed.contains(&k) {
            0.0
        } else {
            1.0 / table.get(k)
        }
    });
    Ok(ZonalProfile::new(*profile.axis(), g, ProfileKind::Generating))
}

fn zonal_level(density: &ZonalProfile, r: f64, degree: usize, heights: &[f64]) -> Result<LevelMinimum> {
    let smoothed = density.resized(degree).poisson_smooth(r)?;
    let values: Vec<f64> = heights.par_iter().map(|&t| smoothed.eval(t)).collect();
    let (at, min) = argmin(&values);
    Ok(LevelMinimum {
        degree,
        min,
        at: Location::Height(heights[at]),
        scale: max_abs(&values),
        allowance: density.legendre()[0].max(0.0) * kernel_floor(r, degree),
    })
}

fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Certifies a zonal profile (a spin). Support profiles are inverted first;
/// generating profiles are used as given. Coefficients beyond the stored
/// degree count as zero.
pub fn certify_zonal(profile: &ZonalProfile, params: &CertifyParams) -> Result<Certificate> {
    params.validate()?;
    let density = match profile.kind() {
        ProfileKind::Generating => profile.clone(),
        _ => {
            profile.check_even(PARITY_TOL)?;
            generating_profile_with(profile, params.guard)?
        }
    };
    let l = params.l_max;
    let density = density.resized(2 * l);
    if density.max_abs() < ZERO_BODY_TOL {
        return Ok(Certificate::zero(params));
    }
    let heights = uniform_heights(params.t_grid);
    let minima = params
        .r_ladder
        .iter()
        .map(|&r| {
            Ok(RadiusMinimum {
                r,
                base: zonal_level(&density, r, l, &heights)?,
                doubled: zonal_level(&density, r, 2 * l, &heights)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate::from_minima(minima, params))
}

fn body_level(density: &HarmonicCoeffs, r: f64, degree: usize) -> Result<LevelMinimum> {
    let smoothed = density.resized(degree).poisson_smooth(r)?;
    let grid = SphereGrid::product(2 * degree + 2, 4 * degree + 4)?;
    let values = harmonics::synthesize_grid(&smoothed, &grid);
    let (at, min) = argmin(&values);
    Ok(LevelMinimum {
        degree,
        min,
        at: Location::Direction(grid.nodes()[at]),
        scale: max_abs(&values),
        allowance: density.get(0, 0).max(0.0) * kernel_floor(r, degree),
    })
}

/// Full-sphere certification: invert the body's harmonic coefficients, smooth,
/// and minimize over a product grid at L and 2L.
pub fn certify_body(body: &Body, params: &CertifyParams) -> Result<Certificate> {
    params.validate()?;
    let l = params.l_max;
    let coeffs = body.harmonic_coeffs(2 * l)?;
    coeffs.check_even(PARITY_TOL)?;
    let density = inverse_cosine_spectral(&coeffs, params.guard)?.coeffs;
    if density.max_abs() < ZERO_BODY_TOL {
        return Ok(Certificate::zero(params).with_label(body.label()));
    }
    let minima = params
        .r_ladder
        .iter()
        .map(|&r| {
            Ok(RadiusMinimum {
                r,
                base: body_level(&density, r, l)?,
                doubled: body_level(&density, r, 2 * l)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate::from_minima(minima, params).with_label(body.label()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsFit {
    pub weights: Vec<f64>,
    /// max_j |h(x_j) − Σ_i w_i |⟨x_j, v_i⟩|| / max_j |h(x_j)|.
    pub residual: f64,
    /// Objective ½‖Aw − h‖² after every iteration; nonincreasing.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Nonnegative least-squares fit of `h` by zonotope supports Σ w_i |⟨·, v_i⟩|.
///
/// Accelerated projected gradient with adaptive restart: a step that would raise
/// the objective is rejected and the momentum reset, so the trace is monotone.
/// Stops once an accepted step lowers the objective by less than `tol` relative.
/// Running out of iterations is reported through `converged`, not as an error.
pub fn nnls_zonotope_fit(
    body: &Body,
    candidates: &[Vec3],
    fit_grid: &SphereGrid,
    max_iter: usize,
    tol: f64,
) -> Result<NnlsFit> {
    if candidates.is_empty() {
        return Err(invalid_argument("no candidate directions"));
    }
    if max_iter == 0 || !(tol > 0.0) {
        return Err(invalid_argument("need max_iter > 0 and tol > 0"));
    }
    for v in candidates {
        vec3::check_unit(v)?;
    }
    let points = fit_grid.nodes();
    let target: Vec<f64> = points.par_iter().map(|x| body.support(x)).collect();
    let design: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| candidates.iter().map(|v| vec3::dot(x, v).abs()).collect())
        .collect();
    let columns: Vec<Vec<f64>> = (0..candidates.len())
        .into_par_iter()
        .map(|i| design.iter().map(|row| row[i]).collect())
        .collect();

    let residual_of = |w: &[f64]| -> Vec<f64> {
        design
            .par_iter()
            .zip(&target)
            .map(|(row, h)| pairwise_dot(row, w) - h)
            .collect()
    };
    let objective = |res: &[f64]| 0.5 * pairwise_dot(res, res);
    let gradient = |res: &[f64]| -> Vec<f64> { columns.par_iter().map(|c| pairwise_dot(c, res)).collect() };

    let step = 1.0 / gram_spectral_bound(&columns);

    let n = candidates.len();
    let mut x = vec![0.0; n];
    let mut res = residual_of(&x);
    let mut fx = objective(&res);
    let mut y = x.clone();
    let mut momentum = 1.0f64;
    let mut trace = vec![fx];
    let mut converged = fx == 0.0;
    let mut iterations = 0;

    while !converged && iterations < max_iter {
        iterations += 1;
        let grad = gradient(&residual_of(&y));
        let z: Vec<f64> = y.iter().zip(&grad).map(|(yi, g)| (yi - step * g).max(0.0)).collect();
        let res_z = residual_of(&z);
        let fz = objective(&res_z);
        if fz <= fx {
            let decrease = fx - fz;
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next;
            y = z.iter().zip(&x).map(|(zi, xi)| zi + beta * (zi - xi)).collect();
            converged = decrease <= tol * fx.max(f64::MIN_POSITIVE);
            x = z;
            res = res_z;
            fx = fz;
            momentum = next;
        } else {
            // restart from the last accepted iterate
            y = x.clone();
            momentum = 1.0;
        }
        trace.push(fx);
    }

    let h_max = max_abs(&target);
    Ok(NnlsFit {
        weights: x,
        residual: if h_max > 0.0 { max_abs(&res) / h_max } else { max_abs(&res) },
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Upper bound on the largest eigenvalue of AᵀA for a nonnegative A.
///
/// Power iteration from a positive vector, then the Collatz–Wielandt bound
/// `max_i (Gx)_i / x_i`, which is rigorous for nonnegative matrices.
fn gram_spectral_bound(columns: &[Vec<f64>]) -> f64 {
    let n = columns.len();
    let gram: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| pairwise_dot(&columns[i], &columns[j])).collect())
        .collect();
    let apply = |x: &[f64]| -> Vec<f64> { gram.iter().map(|row| pairwise_dot(row, x)).collect() };
    let mut x = vec![1.0; n];
    for _ in 0..50 {
        let y = apply(&x);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(*v));
        if norm == 0.0 {
            return 1.0;
        }
        // keep strictly positive so the ratio bound stays defined
        x = y.iter().map(|v| (v / norm).max(1e-12)).collect();
    }
    let y = apply(&x);
    y.iter().zip(&x).map(|(a, b)| a / b).fold(0.0, f64::max) * (1.0 + 1e-12)
}

/// Outcome for one scanned direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub u: Vec3,
    pub certificate: Option<Certificate>,
    /// max_k |generating(spin h)_k − spin(generating h)_k| over k ≤ L.
    pub commutation_error: Option<f64>,
    pub error: Option<String>,
}

impl DirectionResult {
    pub fn verdict(&self) -> Option<Verdict> {
        self.certificate.as_ref().map(|c| c.verdict)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub label: String,
    pub directions: Vec<DirectionResult>,
    pub aggregate: Verdict,
    pub elapsed: Duration,
}

impl ScanReport {
    pub fn non_zonoid_directions(&self) -> impl Iterator<Item = &DirectionResult> {
        self.directions.iter().filter(|d| d.verdict() == Some(Verdict::NonZonoid))
    }

    pub fn max_commutation_error(&self) -> Option<f64> {
        self.directions
            .iter()
            .filter_map(|d| d.commutation_error)
            .reduce(f64::max)
    }
}

fn aggregate(results: &[DirectionResult]) -> Verdict {
    if results.iter().all(|d| d.verdict() == Some(Verdict::ZonoidConsistent)) {
        Verdict::ZonoidConsistent
    } else if results.iter().any(|d| d.verdict() == Some(Verdict::NonZonoid)) {
        Verdict::NonZonoid
    } else {
        Verdict::Inconclusive
    }
}

/// Certifies every spin of `body` over `directions`.
///
/// Analytic bodies are spun by orbit averaging, band-limited ones spectrally.
/// Each direction also checks that inverting the spin agrees with spinning the
/// inverse. Failures are recorded per direction and the scan carries on.
/// Results come back in direction order whatever the thread count.
pub fn theorem_scan(body: &Body, directions: &[Vec3], params: &CertifyParams) -> Result<ScanReport> {
    params.validate()?;
    if directions.is_empty() {
        return Err(invalid_argument("no scan directions"));
    }
    let start = Instant::now();
    let l = params.l_max;
    let support = body.harmonic_coeffs(l)?;
    let density = inverse_cosine_spectral(&support, params.guard)?.coeffs;
    let spectral = match body.model() {
        BodyModel::BandLimited(c) => Some(c.resized(2 * l)),
        _ => None,
    };
    let options = SpinOptions {
        degree: 2 * l,
        ..SpinOptions::default()
    };

    let run = |u: &Vec3| -> Result<(Certificate, f64)> {
        vec3::check_unit(u)?;
        let spin = match &spectral {
            Some(c) => spin_spectral(c, u)?,
            None => spin_orbit(body, u, &[], &options)?,
        };
        let certificate = certify_zonal(&spin, params)?.with_label(body.label());
        let lhs = generating_profile_with(&spin.resized(l), params.guard)?;
        let rhs = harmonics::project_zonal(&density, u)?;
        Ok((certificate, lhs.max_diff(&rhs)))
    };

    let results: Vec<DirectionResult> = directions
        .par_iter()
        .map(|u| match run(u) {
            Ok((certificate, err)) => DirectionResult {
                u: *u,
                certificate: Some(certificate),
                commutation_error: Some(err),
                error: None,
            },
            Err(e) => DirectionResult {
                u: *u,
                certificate: None,
                commutation_error: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    Ok(ScanReport {
        label: body.label().to_string(),
        aggregate: aggregate(&results),
        directions: results,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SpinError;
    use crate::spheregrid::fibonacci_directions;
    use crate::transforms::poisson_kernel;
    use crate::vec3::E3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn profile(a: Vec<f64>) -> ZonalProfile {
        ZonalProfile::new(E3, a, ProfileKind::Support)
    }

    fn abs_t(l: usize) -> ZonalProfile {
        // |t| = Σ (2k+1) λ_k P_k
        let table = cosine_multipliers(l);
        profile((0..=l).map(|k| (2 * k + 1) as f64 * table.get(k)).collect())
    }

    #[test]
    fn ball_profile_inverts_to_two() {
        let g = generating_profile(&profile(vec![1.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(g.kind(), ProfileKind::Generating);
        assert!((g.legendre()[0] - 2.0).abs() < 1e-15);
        assert!(g.legendre()[1..].iter().all(|a| *a == 0.0));
    }

    #[test]
    fn generating_profile_rejects_odd_content() {
        let p = profile(vec![1.0, 0.0, 0.0, 0.3]);
        assert!(matches!(generating_profile(&p), Err(SpinError::IllPosed(_))));
        let g = generating_profile(&profile(vec![1.0])).unwrap();
        assert!(generating_profile(&g).is_err());
    }

    #[test]
    fn segment_spin_smooths_to_pole_kernels() {
        // |t| is the spin of the segment [−e₃, e₃] about e₃; its generating
        // coefficients are exactly 2k+1
        let l = 400;
        let g = generating_profile(&abs_t(l)).unwrap();
        for (k, a) in g.legendre().iter().enumerate().take(40) {
            let expect = if k % 2 == 0 { (2 * k + 1) as f64 } else { 0.0 };
            assert!((a - expect).abs() < 1e-9 * expect.max(1.0), "k={k}: {a}");
        }
        let r = 0.9;
        let at_pole = g.poisson_smooth(r).unwrap().eval(1.0);
        let closed = 0.5 * (1.0 - r * r) * ((1.0 - r).powi(-3) + (1.0 + r).powi(-3));
        assert!((closed - 95.013_850_415_512_47).abs() < 1e-9);
        assert!((at_pole - closed).abs() < 1e-6, "{at_pole} vs {closed}");
        assert!((0.5 * (poisson_kernel(r, 1.0) + poisson_kernel(r, -1.0)) - closed).abs() < 1e-12);
    }

    #[test]
    fn cylinder_profile_has_nonnegative_density() {
        let cube = Body::cube(1.0).unwrap();
        let spin = spin_orbit(&cube, &E3, &[], &SpinOptions { degree: 512, panel_points: 12 }).unwrap();
        let g = generating_profile(&spin).unwrap();
        for r in [0.9, 0.95, 0.99] {
            let d = g.poisson_smooth(r).unwrap();
            let min = uniform_heights(2001).iter().map(|&t| d.eval(t)).fold(f64::INFINITY, f64::min);
            // at degree 512 the truncation ripple is below 1e-4 of the peak even at r = 0.99
            let peak = d.eval(1.0);
            assert!(min > -1e-4 * peak, "r={r}: {min}");
        }
    }

    #[test]
    fn certify_ball_profile() {
        let c = certify_zonal(&profile(vec![1.0]), &CertifyParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::ZonoidConsistent);
        assert_eq!(c.minima.len(), 3);
        for m in &c.minima {
            assert!((m.base.min - 2.0).abs() < 1e-12 && (m.doubled.min - 2.0).abs() < 1e-12);
        }
        assert!(!c.zero_body);
    }

    #[test]
    fn certify_cube_spin() {
        let cube = Body::cube(1.0).unwrap();
        let params = CertifyParams::default();
        let spin = spin_orbit(&cube, &E3, &[], &SpinOptions { degree: 128, panel_points: 12 }).unwrap();
        let c = certify_zonal(&spin, &params).unwrap();
        assert_eq!(c.verdict, Verdict::ZonoidConsistent, "{:?}", c.minima);
    }

    #[test]
    fn pure_p2_density_is_non_zonoid() {
        let table = cosine_multipliers(2);
        let c = certify_zonal(&profile(vec![0.0, 0.0, table.get(2)]), &CertifyParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NonZonoid);
        for m in &c.minima {
            assert!((m.base.min + 0.5 * m.r * m.r).abs() < 1e-12);
            assert!(matches!(m.base.at, Location::Height(t) if t.abs() < 1e-12));
            assert_eq!(m.base.allowance, 0.0);
        }
    }

    #[test]
    fn zero_profile_is_inconclusive() {
        let c = certify_zonal(&profile(vec![0.0; 9]), &CertifyParams::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.zero_body && c.minima.is_empty());
    }

    #[test]
    fn params_are_validated() {
        let bad = [
            CertifyParams { l_max: 1, ..Default::default() },
            CertifyParams { l_max: 257, ..Default::default() },
            CertifyParams { r_ladder: vec![], ..Default::default() },
            CertifyParams { r_ladder: vec![1.0], ..Default::default() },
            CertifyParams { eps_pos: 1e-2, ..Default::default() },
            CertifyParams { t_grid: 2, ..Default::default() },
        ];
        for p in bad {
            assert!(certify_zonal(&profile(vec![1.0]), &p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn kernel_floor_examples() {
        // the untruncated even kernel is positive, so the floor vanishes once r^L is negligible
        assert_eq!(kernel_floor(0.5, 64), 0.0);
        assert_eq!(kernel_floor(0.9, 64), 0.0);
        assert_eq!(kernel_floor(0.95, 128), 0.0);
        assert!(kernel_floor(0.95, 32) > 2.9);
        // at r = 0.99 the lobes deepen before they shrink
        let f64_ = kernel_floor(0.99, 64);
        assert!((f64_ - 124.313_622_15).abs() < 1e-6, "{f64_}");
        assert!(kernel_floor(0.99, 256) < 0.2 * f64_);
    }

    #[test]
    fn certify_body_ball() {
        let params = CertifyParams { l_max: 8, ..Default::default() };
        let c = certify_body(&Body::ball(1.0).unwrap().with_label("ball"), &params).unwrap();
        assert_eq!(c.verdict, Verdict::ZonoidConsistent);
        assert_eq!(c.label, "ball");
        for m in &c.minima {
            assert!((m.base.min - 2.0).abs() < 1e-12 && (m.base.scale - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zonotope_density_matches_atom_smoothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gens: Vec<Vec3> = (0..5).map(|_| random_unit(&mut rng)).collect();
        let weights: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..1.5)).collect();
        let z = Body::zonotope(&gens, &weights).unwrap();
        let params = CertifyParams { l_max: 64, ..Default::default() };
        let c = certify_body(&z, &params).unwrap();
        assert_eq!(c.verdict, Verdict::ZonoidConsistent, "{:?}", c.minima);

        let r = 0.9;
        let density = inverse_cosine_spectral(&z.harmonic_coeffs(64).unwrap(), DEFAULT_GUARD)
            .unwrap()
            .coeffs
            .poisson_smooth(r)
            .unwrap();
        let smoothed = harmonics::synthesize(&density, &gens);
        // truncation at L drops Σ_{k>L} r^k g_k, bounded by mass · Σ_{k>L even} (2k+1) r^k
        let mass: f64 = weights.iter().sum();
        let tail: f64 = (66..4000).step_by(2).map(|k| (2 * k + 1) as f64 * r.powi(k as i32)).sum();
        for (x, got) in gens.iter().zip(&smoothed) {
            let expect = atom_smoothing(x, &gens, &weights, r);
            assert!((got - expect).abs() < 0.05 * expect, "{got} vs {expect}");
            assert!((got - expect).abs() <= mass * tail, "{got} vs {expect}");
        }
    }

    fn atom_smoothing(x: &Vec3, gens: &[Vec3], weights: &[f64], r: f64) -> f64 {
        gens.iter()
            .zip(weights)
            .map(|(v, w)| {
                let s = vec3::dot(x, v);
                w * 0.5 * (poisson_kernel(r, s) + poisson_kernel(r, -s))
            })
            .sum()
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = vec3::norm(&v);
            if n > 0.1 && n <= 1.0 {
                return vec3::scale(&v, 1.0 / n);
            }
        }
    }

    #[test]
    fn nnls_recovers_zonotope_weights() {
        let gens = fibonacci_directions(6, true);
        let weights = [0.4, 1.0, 0.7, 1.3, 0.2, 0.9];
        let z = Body::zonotope(&gens, &weights).unwrap();
        let grid = SphereGrid::product(16, 32).unwrap();
        let fit = nnls_zonotope_fit(&z, &gens, &grid, 5000, 1e-10).unwrap();
        assert!(fit.residual <= 1e-8, "{}", fit.residual);
        for (a, b) in fit.weights.iter().zip(weights) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nnls_fits_ball_with_many_directions() {
        let ball = Body::ball(1.0).unwrap();
        let grid = SphereGrid::product(24, 48).unwrap();
        let fit = nnls_zonotope_fit(&ball, &fibonacci_directions(200, true), &grid, 5000, 1e-10).unwrap();
        assert!(fit.residual <= 2e-3, "{}", fit.residual);
        assert!(fit.weights.iter().all(|w| *w >= 0.0));
        assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nnls_rejects_bad_input() {
        let ball = Body::ball(1.0).unwrap();
        let grid = SphereGrid::product(4, 8).unwrap();
        assert!(nnls_zonotope_fit(&ball, &[], &grid, 10, 1e-10).is_err());
        assert!(nnls_zonotope_fit(&ball, &[[2.0, 0.0, 0.0]], &grid, 10, 1e-10).is_err());
        assert!(nnls_zonotope_fit(&ball, &[E3], &grid, 0, 1e-10).is_err());
    }

    #[test]
    fn nnls_reports_non_convergence() {
        let ball = Body::ball(1.0).unwrap();
        let grid = SphereGrid::product(8, 16).unwrap();
        let fit = nnls_zonotope_fit(&ball, &fibonacci_directions(50, true), &grid, 3, 1e-15).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 3);
        assert_eq!(fit.objective_trace.len(), 4);
    }

    #[test]
    fn scan_ball_is_constant() {
        let params = CertifyParams { l_max: 16, ..Default::default() };
        let report = theorem_scan(&Body::ball(2.0).unwrap(), &fibonacci_directions(10, true), &params).unwrap();
        assert_eq!(report.aggregate, Verdict::ZonoidConsistent);
        for d in &report.directions {
            let c = d.certificate.as_ref().unwrap();
            for m in &c.minima {
                assert!((m.base.min - 4.0).abs() < 1e-9);
            }
            assert!(d.commutation_error.unwrap() < 1e-9);
        }
    }

    #[test]
    fn scan_records_bad_directions() {
        let params = CertifyParams { l_max: 8, ..Default::default() };
        let dirs = [E3, [0.0, 0.0, 2.0]];
        let report = theorem_scan(&Body::ball(1.0).unwrap(), &dirs, &params).unwrap();
        assert_eq!(report.directions.len(), 2);
        assert!(report.directions[0].certificate.is_some());
        assert!(report.directions[1].error.is_some());
        assert_eq!(report.aggregate, Verdict::Inconclusive);
        assert!(theorem_scan(&Body::ball(1.0).unwrap(), &[], &params).is_err());
    }

    #[test]
    fn scan_bandlimited_uses_spectral_spin() {
        let mut c = HarmonicCoeffs::zeros(4);
        c.set(0, 0, 1.0);
        c.set(2, 1, 0.05);
        c.set(4, -3, 0.02);
        let body = Body::bandlimited(c).unwrap();
        let params = CertifyParams { l_max: 8, ..Default::default() };
        let report = theorem_scan(&body, &fibonacci_directions(6, true), &params).unwrap();
        for d in &report.directions {
            assert!(d.commutation_error.unwrap() < 1e-12);
        }
    }
}
