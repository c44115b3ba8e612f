//! Real spherical harmonics on S², orthonormal with respect to σ.
//!
//! Convention: `Y_{k,0} = √(2k+1)·P_k(t)`, and for m > 0
//! `Y_{k,m} = Θ_{k,m}(t)·cos(mφ)`, `Y_{k,−m} = Θ_{k,m}(t)·sin(mφ)` with
//! `Θ_{k,m} = √(2(2k+1)(k−m)!/(k+m)!)·P_k^m(t)` (no Condon–Shortley phase).
//! With this choice the addition theorem reads `Σ_m Y_{k,m}(x)Y_{k,m}(y) = (2k+1)P_k(⟨x,y⟩)`.

use rayon::prelude::*;

use crate::error::{invalid_argument, invalid_input, Result};
use crate::numeric::{pairwise_dot, pairwise_sum};
use crate::spheregrid::{gauss_legendre_rule, SphereGrid};
use crate::transforms::{ProfileKind, ZonalProfile};
use crate::vec3::{self, Vec3};

/// Index of `(k, m)` in the flat coefficient layout.
#[inline]
pub fn sh_index(k: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= k);
    ((k * k + k) as i64 + m) as usize
}

/// Number of real harmonics of degree ≤ `l`.
#[inline]
pub fn sh_count(l: usize) -> usize {
    (l + 1) * (l + 1)
}

/// Legendre polynomial P_k(t) by the three-term recurrence.
pub fn legendre_p(k: usize, t: f64) -> f64 {
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = t;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// P_0(t), ..., P_l(t).
pub fn legendre_all(l: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; l + 1];
    legendre_fill(t, &mut out);
    out
}

pub(crate) fn legendre_fill(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for j in 2..out.len() {
        let jf = j as f64;
        out[j] = ((2.0 * jf - 1.0) * t * out[j - 1] - (jf - 1.0) * out[j - 2]) / jf;
    }
}

/// Σ_k a_k P_k(t) by Clenshaw's recurrence.
pub fn legendre_series(a: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (0..a.len()).rev() {
        let kf = k as f64;
        // P_{k+1} = α_k P_k + β_{k+1} P_{k−1}, α_k = (2k+1)t/(k+1), β_k = −k/(k+1)
        let alpha = (2.0 * kf + 1.0) * t / (kf + 1.0);
        let beta = -(kf + 1.0) / (kf + 2.0);
        let b0 = a[k] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Θ_{k,m}(t) for k = m..=l (written to `out[k - m]`).
///
/// Seeded by the sectoral product Θ_{m,m} ∝ s^m and carried upward in k; no
/// factorials are ever formed.
pub(crate) fn order_column(m: usize, t: f64, out: &mut [f64]) {
    let s = (1.0 - t * t).max(0.0).sqrt();
    // normalized sectoral value without the √2 of m > 0
    let mut pmm = 1.0;
    for j in 1..=m {
        let jf = j as f64;
        pmm *= ((2.0 * jf + 1.0) / (2.0 * jf)).sqrt() * s;
    }
    let norm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    let n = out.len();
    if n == 0 {
        return;
    }
    let mf = m as f64;
    let mut prev2 = 0.0;
    let mut prev1 = pmm;
    out[0] = norm * pmm;
    for i in 1..n {
        let k = (m + i) as f64;
        let a = ((4.0 * k * k - 1.0) / (k * k - mf * mf)).sqrt();
        let b = if i == 1 {
            0.0
        } else {
            let km1 = k - 1.0;
            ((km1 * km1 - mf * mf) / (4.0 * km1 * km1 - 1.0)).sqrt()
        };
        let cur = a * (t * prev1 - b * prev2);
        prev2 = prev1;
        prev1 = cur;
        out[i] = norm * cur;
    }
}

/// Values of every Y_{k,m} with k ≤ l at the unit vector `x`, in [`sh_index`] order.
pub fn sh_eval(l: usize, x: &Vec3) -> Result<Vec<f64>> {
    vec3::check_unit(x)?;
    let mut out = vec![0.0; sh_count(l)];
    sh_eval_into(l, x, &mut out);
    Ok(out)
}

fn sh_eval_into(l: usize, x: &Vec3, out: &mut [f64]) {
    let t = x[2].clamp(-1.0, 1.0);
    let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let (c1, s1) = if s > 0.0 { (x[0] / s, x[1] / s) } else { (1.0, 0.0) };
    let mut column = vec![0.0; l + 1];
    let (mut cm, mut sm) = (1.0, 0.0);
    for m in 0..=l {
        let col = &mut column[..l + 1 - m];
        order_column(m, t, col);
        for (i, theta) in col.iter().enumerate() {
            let k = m + i;
            if m == 0 {
                out[sh_index(k, 0)] = *theta;
            } else {
                out[sh_index(k, m as i64)] = theta * cm;
                out[sh_index(k, -(m as i64))] = theta * sm;
            }
        }
        let next_c = cm * c1 - sm * s1;
        sm = sm * c1 + cm * s1;
        cm = next_c;
    }
}

/// Real harmonic coefficients up to degree `l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    l_max: usize,
    data: Vec<f64>,
}

impl HarmonicCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            data: vec![0.0; sh_count(l_max)],
        }
    }

    pub fn from_vec(l_max: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != sh_count(l_max) {
            return Err(invalid_argument(format!(
                "degree {l_max} needs {} coefficients, got {}",
                sh_count(l_max),
                data.len()
            )));
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(invalid_input("harmonic coefficients must be finite"));
        }
        Ok(Self { l_max, data })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, k: usize, m: i64) -> f64 {
        if k > self.l_max {
            return 0.0;
        }
        self.data[sh_index(k, m)]
    }

    pub fn set(&mut self, k: usize, m: i64, value: f64) {
        self.data[sh_index(k, m)] = value;
    }

    /// Coefficients of degree `k` as a slice over m = −k..=k.
    pub fn degree(&self, k: usize) -> &[f64] {
        &self.data[k * k..(k + 1) * (k + 1)]
    }

    pub fn degree_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * k..(k + 1) * (k + 1)]
    }

    /// Copy truncated or zero-padded to `l_max`.
    pub fn resized(&self, l_max: usize) -> Self {
        let mut data = vec![0.0; sh_count(l_max)];
        let n = data.len().min(self.data.len());
        data[..n].copy_from_slice(&self.data[..n]);
        Self { l_max, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Largest odd-degree coefficient magnitude and its degree.
    pub fn worst_odd(&self) -> Option<(usize, f64)> {
        (1..=self.l_max)
            .step_by(2)
            .map(|k| (k, self.degree(k).iter().fold(0.0f64, |m, c| m.max(c.abs()))))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Accepts the coefficients as even when odd content is at most `tol` relative.
    pub fn check_even(&self, tol: f64) -> Result<()> {
        let scale = self.max_abs();
        if let Some((k, worst)) = self.worst_odd() {
            if worst > tol * scale {
                return Err(invalid_input(format!(
                    "input is not even: degree {k} carries {worst:.3e} (relative {:.3e})",
                    worst / scale
                )));
            }
        }
        Ok(())
    }

    /// Copy with every odd-degree coefficient zeroed.
    pub fn even_part(&self) -> Self {
        let mut out = self.clone();
        for k in (1..=self.l_max).step_by(2) {
            out.degree_mut(k).fill(0.0);
        }
        out
    }

    /// Copy with degree `k` multiplied by `f(k)`.
    pub fn map_degrees(&self, f: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for k in 0..=self.l_max {
            let factor = f(k);
            out.degree_mut(k).iter_mut().for_each(|c| *c *= factor);
        }
        out
    }

    /// Σ coeffs², the squared L²(σ) norm of the synthesized function.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|c| c * c).collect();
        pairwise_sum(&sq)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let l = self.l_max.max(other.l_max);
        let a = self.resized(l);
        let b = other.resized(l);
        a.data
            .iter()
            .zip(&b.data)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }
}

/// Projection of grid samples onto harmonics of degree ≤ `l`.
pub fn analyze(grid: &SphereGrid, samples: &[f64], l: usize) -> Result<HarmonicCoeffs> {
    if samples.len() != grid.len() {
        return Err(invalid_argument(format!(
            "{} samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    if l > grid.max_analysis_degree() {
        return Err(invalid_argument(format!(
            "grid ({} x {}) cannot analyze degree {l}; maximum is {}",
            grid.n_theta(),
            grid.n_phi(),
            grid.max_analysis_degree()
        )));
    }
    let n_phi = grid.n_phi();
    let rings = grid.n_theta();
    let (cos_tab, sin_tab) = trig_tables(n_phi);
    let inv_phi = 1.0 / n_phi as f64;

    // one task per order m; each output coefficient has a fixed summation order
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..=l)
        .into_par_iter()
        .map(|m| {
            let len = l + 1 - m;
            let mut contrib_c = vec![vec![0.0; rings]; len];
            let mut contrib_s = vec![vec![0.0; rings]; len];
            let mut column = vec![0.0; len];
            for i in 0..rings {
                let row = &samples[i * n_phi..(i + 1) * n_phi];
                let (mut fc, mut fs) = (vec![0.0; n_phi], vec![0.0; n_phi]);
                for j in 0..n_phi {
                    let idx = (m * j) % n_phi;
                    fc[j] = row[j] * cos_tab[idx];
                    fs[j] = row[j] * sin_tab[idx];
                }
                let wc = pairwise_sum(&fc) * inv_phi * grid.ring_weights()[i];
                let ws = pairwise_sum(&fs) * inv_phi * grid.ring_weights()[i];
                order_column(m, grid.ring_t()[i], &mut column);
                for (r, theta) in column.iter().enumerate() {
                    contrib_c[r][i] = wc * theta;
                    contrib_s[r][i] = ws * theta;
                }
            }
            let c: Vec<f64> = contrib_c.iter().map(|v| pairwise_sum(v)).collect();
            let s: Vec<f64> = contrib_s.iter().map(|v| pairwise_sum(v)).collect();
            (c, s)
        })
        .collect();

    let mut out = HarmonicCoeffs::zeros(l);
    for (m, (c, s)) in columns.into_iter().enumerate() {
        for (r, (vc, vs)) in c.into_iter().zip(s).enumerate() {
            let k = m + r;
            out.set(k, m as i64, vc);
            if m > 0 {
                out.set(k, -(m as i64), vs);
            }
        }
    }
    Ok(out)
}

fn trig_tables(n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|j| {
            let phi = std::f64::consts::TAU * j as f64 / n as f64;
            (phi.cos(), phi.sin())
        })
        .unzip()
}

/// Pointwise Σ coeffs[k,m]·Y_{k,m}(x).
pub fn synthesize(coeffs: &HarmonicCoeffs, points: &[Vec3]) -> Vec<f64> {
    let l = coeffs.l_max();
    points
        .par_iter()
        .map_init(
            || vec![0.0; sh_count(l)],
            |basis, x| {
                let x = vec3::normalize(x).unwrap_or(*x);
                sh_eval_into(l, &x, basis);
                pairwise_dot(basis, coeffs.as_slice())
            },
        )
        .collect()
}

/// Synthesis on every node of a product grid, ring by ring.
pub fn synthesize_grid(coeffs: &HarmonicCoeffs, grid: &SphereGrid) -> Vec<f64> {
    let l = coeffs.l_max();
    let n_phi = grid.n_phi();
    let ring_values: Vec<Vec<f64>> = grid
        .ring_t()
        .par_iter()
        .map(|&t| {
            let mut column = vec![0.0; l + 1];
            let mut sc = vec![0.0; l + 1];
            let mut ss = vec![0.0; l + 1];
            for m in 0..=l {
                let col = &mut column[..l + 1 - m];
                order_column(m, t, col);
                let mut acc_c = 0.0;
                let mut acc_s = 0.0;
                for (r, theta) in col.iter().enumerate() {
                    let k = m + r;
                    acc_c += theta * coeffs.get(k, m as i64);
                    if m > 0 {
                        acc_s += theta * coeffs.get(k, -(m as i64));
                    }
                }
                sc[m] = acc_c;
                ss[m] = acc_s;
            }
            (0..n_phi)
                .map(|j| {
                    let phi = grid.phi(j);
                    // Clenshaw-free direct sum; m ≤ l is small relative to n_phi
                    let mut v = sc[0];
                    let (c1, s1) = (phi.cos(), phi.sin());
                    let (mut cm, mut sm) = (1.0, 0.0);
                    for m in 1..=l {
                        let nc = cm * c1 - sm * s1;
                        sm = sm * c1 + cm * s1;
                        cm = nc;
                        v += sc[m] * cm + ss[m] * sm;
                    }
                    v
                })
                .collect()
        })
        .collect();
    ring_values.concat()
}

/// Eigenvalues of the cosine transform on degree-k harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    lambda: Vec<f64>,
}

impl MultiplierTable {
    pub fn l_max(&self) -> usize {
        self.lambda.len() - 1
    }

    /// λ_k; zero for odd k and for k beyond the table.
    pub fn get(&self, k: usize) -> f64 {
        self.lambda.get(k).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }
}

/// λ_k = ½∫₋₁¹ |t| P_k(t) dt, integrated separately on [−1, 0] and [0, 1].
pub fn cosine_multipliers(l: usize) -> MultiplierTable {
    // t·P_k has degree k+1 on each half
    let n = l / 2 + 2;
    let rule = gauss_legendre_rule(n).expect("n >= 2");
    let (lo_t, lo_w) = rule.on_interval(-1.0, 0.0);
    let (hi_t, hi_w) = rule.on_interval(0.0, 1.0);
    let nodes: Vec<f64> = lo_t.into_iter().chain(hi_t).collect();
    let weights: Vec<f64> = lo_w.into_iter().chain(hi_w).collect();
    let tables: Vec<Vec<f64>> = nodes.iter().map(|&t| legendre_all(l, t)).collect();
    let lambda = (0..=l)
        .map(|k| {
            if k % 2 == 1 {
                return 0.0;
            }
            let vals: Vec<f64> = nodes.iter().zip(&tables).map(|(t, p)| t.abs() * p[k]).collect();
            0.5 * pairwise_dot(&vals, &weights)
        })
        .collect();
    MultiplierTable { lambda }
}

/// Zonal Legendre coefficients a_k = Σ_m c_{k,m} Y_{k,m}(u), i.e. the spin of the
/// synthesized function about `u`.
pub fn project_zonal(coeffs: &HarmonicCoeffs, u: &Vec3) -> Result<ZonalProfile> {
    let l = coeffs.l_max();
    let basis = sh_eval(l, u)?;
    let a = (0..=l)
        .map(|k| {
            let range = k * k..(k + 1) * (k + 1);
            pairwise_dot(&basis[range.clone()], &coeffs.as_slice()[range])
        })
        .collect();
    Ok(ZonalProfile::new(*u, a, ProfileKind::Generic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spheregrid::fibonacci_directions;
    use crate::vec3::E3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = vec3::norm(&v);
            if n > 0.1 && n < 1.0 {
                return vec3::scale(&v, 1.0 / n);
            }
        }
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, l: usize) -> HarmonicCoeffs {
        let data = (0..sh_count(l)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        HarmonicCoeffs::from_vec(l, data).unwrap()
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert!((legendre_p(2, 0.0) + 0.5).abs() < 1e-16);
        assert!((legendre_p(10, 1.0) - 1.0).abs() < 1e-14);
        for t in [-0.9f64, -0.2, 0.4, 0.77] {
            let p4 = (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0;
            assert!((legendre_p(4, t) - p4).abs() < 1e-15);
        }
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let a: Vec<f64> = (0..40).map(|k| 1.0 / (1.0 + k as f64)).collect();
        for t in [-1.0, -0.3, 0.0, 0.61, 1.0] {
            let direct: f64 = legendre_all(39, t).iter().zip(&a).map(|(p, c)| p * c).sum();
            assert!((legendre_series(&a, t) - direct).abs() < 1e-13);
        }
        assert_eq!(legendre_series(&[], 0.5), 0.0);
    }

    #[test]
    fn low_degree_harmonics_match_closed_forms() {
        let x = vec3::normalize(&[0.3, -0.7, 0.2]).unwrap();
        let y = sh_eval(2, &x).unwrap();
        let s3 = 3f64.sqrt();
        assert!((y[sh_index(0, 0)] - 1.0).abs() < 1e-15);
        assert!((y[sh_index(1, 0)] - s3 * x[2]).abs() < 1e-15);
        assert!((y[sh_index(1, 1)] - s3 * x[0]).abs() < 1e-15);
        assert!((y[sh_index(1, -1)] - s3 * x[1]).abs() < 1e-15);
        let p2 = (3.0 * x[2] * x[2] - 1.0) / 2.0;
        assert!((y[sh_index(2, 0)] - 5f64.sqrt() * p2).abs() < 1e-15);
        assert!((y[sh_index(2, 2)] - 15f64.sqrt() / 2.0 * (x[0] * x[0] - x[1] * x[1])).abs() < 1e-14);
        assert!((y[sh_index(2, -2)] - 15f64.sqrt() * x[0] * x[1]).abs() < 1e-14);
        assert!(sh_eval(2, &[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn addition_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let k = if trial == 0 { 4 } else { rng.gen_range(0..=40) };
            let yx = sh_eval(k, &x).unwrap();
            let yy = sh_eval(k, &y).unwrap();
            let lhs: f64 = (k * k..(k + 1) * (k + 1)).map(|i| yx[i] * yy[i]).sum();
            let rhs = (2 * k + 1) as f64 * legendre_p(k, vec3::dot(&x, &y));
            assert!((lhs - rhs).abs() < 1e-10, "k={k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn grid_gram_matrix_is_identity() {
        for l in [8, 32] {
            // the smallest grid exact for products of two degree-l harmonics
            let grid = SphereGrid::for_degree(l).unwrap();
            let n = sh_count(l);
            let basis: Vec<Vec<f64>> = grid.nodes().iter().map(|x| sh_eval(l, x).unwrap()).collect();
            for a in 0..n {
                for b in 0..=a {
                    let g: f64 = basis.iter().zip(grid.weights()).map(|(y, w)| w * y[a] * y[b]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-11, "l={l} ({a},{b}): {g}");
                }
            }
        }
    }

    #[test]
    fn analyze_examples() {
        let grid = SphereGrid::product(24, 48).unwrap();
        let ones = vec![1.0; grid.len()];
        let c = analyze(&grid, &ones, 10).unwrap();
        assert!((c.get(0, 0) - 1.0).abs() < 1e-14);
        assert!(c.as_slice()[1..].iter().all(|v| v.abs() < 1e-14));

        let x3: Vec<f64> = grid.nodes().iter().map(|x| x[2]).collect();
        let c = analyze(&grid, &x3, 10).unwrap();
        assert!((c.get(1, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        for (i, v) in c.as_slice().iter().enumerate() {
            if i != sh_index(1, 0) {
                assert!(v.abs() < 1e-14);
            }
        }
        assert!(analyze(&grid, &ones, 24).is_err());
        assert!(analyze(&grid, &ones[1..], 4).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let pts = fibonacci_directions(30, false);
        assert!(synthesize(&HarmonicCoeffs::zeros(5), &pts).iter().all(|v| *v == 0.0));
        let mut c = HarmonicCoeffs::zeros(2);
        c.set(2, 0, 1.0);
        for (x, v) in pts.iter().zip(synthesize(&c, &pts)) {
            assert!((v - 5f64.sqrt() * legendre_p(2, x[2])).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_coeffs(&mut rng, 16);
        let grid = SphereGrid::product(20, 40).unwrap();
        let samples = synthesize_grid(&c, &grid);
        let direct = synthesize(&c, grid.nodes());
        let sup = samples.iter().zip(&direct).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(sup < 1e-12);
        let back = analyze(&grid, &samples, 16).unwrap();
        assert!(back.max_diff(&c) < 1e-12);
        let sq: Vec<f64> = samples.iter().map(|v| v * v).collect();
        let energy = grid.integrate(&sq);
        assert!((energy - c.energy()).abs() < 1e-8 * energy);

        let pts: Vec<Vec3> = (0..200).map(|_| random_unit(&mut rng)).collect();
        let again = synthesize(&back, &pts);
        let orig = synthesize(&c, &pts);
        let sup = again.iter().zip(&orig).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(sup <= 1e-10);
    }

    #[test]
    fn high_degree_evaluation_stays_finite() {
        let grid = SphereGrid::for_degree(256).unwrap();
        let mut c = HarmonicCoeffs::zeros(256);
        c.set(256, 256, 1.0);
        c.set(256, -3, 1.0);
        let v = synthesize_grid(&c, &grid);
        assert!(v.iter().all(|x| x.is_finite()));
        let back = analyze(&grid, &v, 256).unwrap();
        assert!(back.max_diff(&c) < 1e-9);
    }

    // closed form: ∫₀¹ t P_k dt = (−1)^{k/2+1} (k−2)! / (2^k (k/2−1)! (k/2+1)!) for even k ≥ 2
    fn lambda_closed_form(k: usize) -> f64 {
        if k == 0 {
            return 0.5;
        }
        if k % 2 == 1 {
            return 0.0;
        }
        let h = k / 2;
        // build the ratio incrementally to avoid overflow
        let mut v = 1.0 / 8.0; // k = 2
        for j in (1..h).map(|i| 2 * i) {
            v *= -((j - 1) as f64) / (j + 4) as f64;
        }
        v
    }

    #[test]
    fn multiplier_examples() {
        let table = cosine_multipliers(40);
        assert!((table.get(0) - 0.5).abs() < 1e-15);
        assert!((table.get(2) - 0.125).abs() < 1e-15);
        assert!((table.get(4) + 1.0 / 48.0).abs() < 1e-15);
        assert!((1..=39).step_by(2).all(|k| table.get(k) == 0.0));
        for k in 0..=40 {
            assert!((table.get(k) - lambda_closed_form(k)).abs() < 1e-15, "k={k}");
        }
        for k in (2..=38).step_by(2) {
            assert!(table.get(k) * table.get(k + 2) < 0.0);
            assert!(table.get(k + 2).abs() < table.get(k).abs());
        }
    }

    #[test]
    fn multipliers_match_two_dimensional_quadrature() {
        // x = e₃ puts the kernel kink on the equator of the split grid, so the
        // 2-D rule is exact and the comparison is independent of the 1-D route.
        let grid = SphereGrid::kink_split(40, 80).unwrap();
        let table = cosine_multipliers(32);
        let axes = [vec3::normalize(&[0.2, 0.1, 0.97]).unwrap(), E3];
        for k in (0..=32).step_by(2) {
            let u = axes.iter().find(|u| legendre_p(k, u[2]).abs() > 0.05).unwrap();
            let integral = grid.integrate_fn(|y| y[2].abs() * legendre_p(k, vec3::dot(y, u)));
            let lambda = integral / legendre_p(k, u[2]);
            assert!((lambda - table.get(k)).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn project_zonal_matches_orbit_average() {
        use crate::spheregrid::orbit_rule;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = 6;
        let u = random_unit(&mut rng);
        for k in 0..=l {
            for m in -(k as i64)..=(k as i64) {
                let mut c = HarmonicCoeffs::zeros(l);
                c.set(k, m, 1.0);
                let profile = project_zonal(&c, &u).unwrap();
                let yu = sh_eval(l, &u).unwrap()[sh_index(k, m)];
                for (j, a) in profile.legendre().iter().enumerate() {
                    let expect = if j == k { yu } else { 0.0 };
                    assert!((a - expect).abs() < 1e-13);
                }
                for t in [-0.8, -0.1, 0.5] {
                    let rule = orbit_rule(&u, t, &[], 32).unwrap();
                    let avg = rule.average(|x| sh_eval(l, x).unwrap()[sh_index(k, m)]);
                    assert!((avg - profile.eval(t)).abs() < 1e-12);
                }
            }
        }
        let c = random_coeffs(&mut rng, 9);
        let profile = project_zonal(&c, &u).unwrap();
        assert!((profile.eval(1.0) - synthesize(&c, &[u])[0]).abs() < 1e-12);
    }
}
