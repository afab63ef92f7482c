//! Green's functions, equilibrium measures and interpolation nodes for a
//! finite union of disjoint real intervals `E`.
//!
//! With `q(ζ) = ∏ (ζ - e_k)` over the `2m` endpoints, the complex Green's
//! function is `G(z) = ∫ P(ζ) / √q(ζ) dζ` from `max E`, where the monic
//! numerator `P` of degree `m - 1` makes every gap integral vanish. The
//! equilibrium density on `E` is `|P(x)| / (π √|q(x)|)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::GaussLegendre;
use crate::spectral::AnalyticObservable;
use crate::{Error, Result};

/// Cells per interval in the tabulated equilibrium CDF.
pub const CDF_CELLS: usize = 4096;
/// Points on `E` treated as zeros of the Green's function.
pub const ON_SET_TOL: f64 = 1e-12;

const GRADED_LEVELS: usize = 60;

/// Disjoint closed intervals `[e_0, e_1] ∪ [e_2, e_3] ∪ ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    endpoints: Vec<f64>,
}

impl IntervalSet {
    pub fn new(endpoints: Vec<f64>) -> Result<Self> {
        if endpoints.len() < 2 || !endpoints.len().is_multiple_of(2) {
            return Err(Error::invalid("interval set needs an even, nonzero number of endpoints"));
        }
        if endpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if endpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("endpoints must be strictly increasing"));
        }
        Ok(IntervalSet { endpoints })
    }

    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        IntervalSet::new(intervals.iter().flat_map(|&(a, b)| [a, b]).collect())
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn interval_count(&self) -> usize {
        self.endpoints.len() / 2
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.endpoints[2 * j], self.endpoints[2 * j + 1])
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.endpoints.chunks(2).map(|c| (c[0], c[1]))
    }

    pub fn min(&self) -> f64 {
        self.endpoints[0]
    }

    pub fn max(&self) -> f64 {
        self.endpoints[self.endpoints.len() - 1]
    }

    /// Index of the interval containing `x` (within `tol`).
    pub fn locate(&self, x: f64, tol: f64) -> Option<usize> {
        self.intervals()
            .position(|(a, b)| x >= a - tol && x <= b + tol)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.locate(x, 0.0).is_some()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals().map(|(a, b)| b - a).sum()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, b) in self.intervals() {
            if !first {
                f.write_str("U")?;
            }
            first = false;
            write!(f, "[{a},{b}]")?;
        }
        Ok(())
    }
}

/// Solved numerator of the Green's function integrand for an interval set.
#[derive(Debug, Clone)]
pub struct GreenParams {
    set: IntervalSet,
    /// Coefficients `c_0..c_{m-2}` of `P(ζ) = ζ^{m-1} + Σ c_j ζ^j`.
    numerator_coeffs: Vec<f64>,
    // P(ζ) = scale^{m-1} Q((ζ - center) / scale) with Q monic; evaluating
    // through Q keeps the power basis well conditioned.
    center: f64,
    scale: f64,
    scaled_coeffs: Vec<f64>,
    gl64: GaussLegendre,
    gl16: GaussLegendre,
}

impl GreenParams {
    pub fn interval_set(&self) -> &IntervalSet {
        &self.set
    }

    pub fn numerator_coeffs(&self) -> &[f64] {
        &self.numerator_coeffs
    }

    fn degree(&self) -> usize {
        self.set.interval_count() - 1
    }

    /// `P(x)` for real `x`.
    pub fn numerator(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        let d = self.degree() as i32;
        self.scale.powi(d) * (u.powi(d) + self.scaled_tail(u))
    }

    fn scaled_tail(&self, u: f64) -> f64 {
        self.scaled_coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    fn numerator_complex(&self, z: Complex64) -> Complex64 {
        let u = (z - self.center) / self.scale;
        let tail = self
            .scaled_coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c);
        (u.powi(self.degree() as i32) + tail) * self.scale.powi(self.degree() as i32)
    }

    /// `∏ √|x - e_k|` over all endpoints except the indices in `skip`.
    fn sqrt_abs_q(&self, x: f64, skip: &[usize]) -> f64 {
        self.set
            .endpoints
            .iter()
            .enumerate()
            .filter(|(k, _)| !skip.contains(k))
            .map(|(_, e)| (x - e).abs().sqrt())
            .product()
    }

    /// Complex derivative `G'(z) = P(z) / ∏ √(z - e_k)` (principal roots).
    fn green_derivative(&self, z: Complex64) -> Complex64 {
        let mut denom = Complex64::new(1.0, 0.0);
        for &e in &self.set.endpoints {
            denom *= (z - e).sqrt();
        }
        self.numerator_complex(z) / denom
    }

    /// `∫ f(ζ) / √|q(ζ)| dζ` over `[a, x]` where `a = e_k` and `b = e_{k+1}`
    /// bracket a gap or interval, through `ζ = c - h cos θ`, `θ ∈ [0, θ_x]`.
    fn cosine_integral(&self, k: usize, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = (self.set.endpoints[k], self.set.endpoints[k + 1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let theta_x = ((c - x) / h).clamp(-1.0, 1.0).acos();
        let skip = [k, k + 1];
        self.gl64.integrate_composite(0.0, theta_x, 2, |t| {
            let zeta = c - h * t.cos();
            f(zeta) / self.sqrt_abs_q(zeta, &skip)
        })
    }

    /// Residuals of the gap conditions `∫_gap P / √|q| = 0`.
    pub fn gap_residuals(&self) -> Vec<f64> {
        (0..self.degree())
            .map(|i| self.cosine_integral(2 * i + 1, self.set.endpoints[2 * i + 2], |z| self.numerator(z)))
            .collect()
    }

    /// Root of `P` for a two-interval set.
    pub fn gap_root(&self) -> Option<f64> {
        (self.numerator_coeffs.len() == 1).then(|| -self.numerator_coeffs[0])
    }

    /// `g_E(x)` on the real axis.
    fn green_real(&self, x: f64) -> f64 {
        let e = &self.set.endpoints;
        let last = e.len() - 1;
        if x > self.set.max() {
            let top = e[last];
            let w = x - top;
            // ζ = top + w s², removes the endpoint root
            let v: f64 = self.gl16.integrate_graded(GRADED_LEVELS, |s| {
                let zeta = top + w * s * s;
                2.0 * w.sqrt() * self.numerator(zeta) / self.sqrt_abs_q(zeta, &[last])
            });
            return v.abs();
        }
        if x < self.set.min() {
            let bottom = e[0];
            let w = bottom - x;
            let v: f64 = self.gl16.integrate_graded(GRADED_LEVELS, |s| {
                let zeta = bottom - w * s * s;
                2.0 * w.sqrt() * self.numerator(zeta) / self.sqrt_abs_q(zeta, &[0])
            });
            return v.abs();
        }
        match self.set.locate(x, ON_SET_TOL) {
            Some(_) => 0.0,
            None => {
                let k = e.partition_point(|&t| t < x) - 1;
                self.cosine_integral(k, x, |z| self.numerator(z)).abs()
            }
        }
    }
}

/// Solves the linear gap conditions for the monic numerator.
pub fn solve_gap_params(set: &IntervalSet) -> Result<GreenParams> {
    let m = set.interval_count();
    let center = 0.5 * (set.min() + set.max());
    let scale = 0.5 * (set.max() - set.min());
    let mut params = GreenParams {
        set: set.clone(),
        numerator_coeffs: Vec::new(),
        center,
        scale,
        scaled_coeffs: Vec::new(),
        gl64: GaussLegendre::new(64),
        gl16: GaussLegendre::new(16),
    };
    if m == 1 {
        return Ok(params);
    }
    let d = m - 1;
    // row i: gap i; column j: ∫ u^j / √|q| with u the scaled variable
    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for i in 0..d {
        let k = 2 * i + 1;
        let gap_end = set.endpoints[k + 1];
        for j in 0..d {
            a[(i, j)] = params.cosine_integral(k, gap_end, |z| ((z - center) / scale).powi(j as i32));
        }
        rhs[i] = -params.cosine_integral(k, gap_end, |z| ((z - center) / scale).powi(d as i32));
    }
    let sv = a.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !(cond < 1e12) {
        return Err(Error::IllConditioned(cond));
    }
    let sol = a.lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    params.scaled_coeffs = sol.iter().copied().collect();
    params.numerator_coeffs = expand_scaled(&params.scaled_coeffs, center, scale);
    Ok(params)
}

/// Power-basis coefficients of `scale^d Q((ζ - center)/scale)` below the
/// monic leading term.
fn expand_scaled(tail: &[f64], center: f64, scale: f64) -> Vec<f64> {
    let d = tail.len();
    let mut full = vec![0.0; d + 1];
    // Σ_j d_j scale^{d-j} (ζ - center)^j, with d_d = 1
    for j in 0..=d {
        let dj = if j == d { 1.0 } else { tail[j] };
        let w = dj * scale.powi((d - j) as i32);
        let mut binom = 1.0;
        for i in 0..=j {
            // coefficient of ζ^i in (ζ - c)^j is C(j,i) (-c)^{j-i}
            full[i] += w * binom * (-center).powi((j - i) as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    full.truncate(d);
    full
}

/// Green's function `g_E(z)` with pole at infinity.
///
/// For `z = x + iy` the path runs from `max E` along the real axis to `x`
/// (where `g` is computed as a real integral magnitude) and then vertically
/// to `z`; the lower half-plane follows by reflection.
pub fn green_value(params: &GreenParams, z: Complex64) -> f64 {
    let (x, y) = (z.re, z.im.abs());
    let base = params.green_real(x);
    if y == 0.0 {
        return base;
    }
    // t = y s²: the vertical leg starting on an endpoint has a √t singularity
    let vertical: f64 = params.gl16.integrate_graded(GRADED_LEVELS, |s| {
        let zeta = Complex64::new(x, y * s * s);
        (params.green_derivative(zeta) * Complex64::new(0.0, 2.0 * y * s)).re
    });
    (base + vertical).max(0.0)
}

/// Tabulated cumulative mass of the equilibrium measure.
#[derive(Debug, Clone)]
pub struct EquilibriumCdf {
    params: GreenParams,
    gl8: GaussLegendre,
    /// Per interval: cumulative mass at `θ = k π / CDF_CELLS`, `k = 0..=CDF_CELLS`.
    tables: Vec<Vec<f64>>,
    /// Mass below each interval's left end.
    offsets: Vec<f64>,
    total: f64,
}

impl EquilibriumCdf {
    /// Density in the angle variable `x = c - h cos θ` of interval `j`.
    fn angle_density(&self, j: usize, theta: f64) -> f64 {
        let (a, b) = self.params.set.interval(j);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let x = c - h * theta.cos();
        self.params.numerator(x).abs() / (PI * self.params.sqrt_abs_q(x, &[2 * j, 2 * j + 1]))
    }

    fn partial(&self, j: usize, t0: f64, t1: f64) -> f64 {
        self.gl8.integrate(t0, t1, |t| self.angle_density(j, t))
    }

    /// Equilibrium density at `x` (zero off `E`).
    pub fn density(&self, x: f64) -> f64 {
        match self.params.set.locate(x, 0.0) {
            None => 0.0,
            Some(_) => {
                self.params.numerator(x).abs() / (PI * self.params.sqrt_abs_q(x, &[]))
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn interval_masses(&self) -> Vec<f64> {
        self.tables.iter().map(|t| t[CDF_CELLS]).collect()
    }

    fn theta_of(&self, j: usize, x: f64) -> f64 {
        let (a, b) = self.params.set.interval(j);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        ((c - x) / h).clamp(-1.0, 1.0).acos()
    }

    fn cumulative_at_theta(&self, j: usize, theta: f64) -> f64 {
        let dt = PI / CDF_CELLS as f64;
        let k = ((theta / dt) as usize).min(CDF_CELLS - 1);
        self.offsets[j] + self.tables[j][k] + self.partial(j, k as f64 * dt, theta)
    }

    /// `ω_E((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let set = &self.params.set;
        if x <= set.min() {
            return 0.0;
        }
        if x >= set.max() {
            return self.total;
        }
        match set.locate(x, 0.0) {
            Some(j) => self.cumulative_at_theta(j, self.theta_of(j, x)),
            None => {
                let j = set.intervals().take_while(|&(_, b)| b < x).count();
                self.offsets[j]
            }
        }
    }

    /// Smallest `x ∈ E` with `cdf(x) = level · total`.
    pub fn quantile(&self, level: f64) -> f64 {
        let set = &self.params.set;
        let target = level.clamp(0.0, 1.0) * self.total;
        if level <= 0.0 {
            return set.min();
        }
        if level >= 1.0 {
            return set.max();
        }
        let masses = self.interval_masses();
        let mut j = set.interval_count() - 1;
        for i in 0..set.interval_count() {
            if target <= self.offsets[i] + masses[i] {
                j = i;
                break;
            }
        }
        let local = target - self.offsets[j];
        let table = &self.tables[j];
        let k = table.partition_point(|&v| v < local).clamp(1, CDF_CELLS) - 1;
        let dt = PI / CDF_CELLS as f64;
        let (mut lo, mut hi) = (k as f64 * dt, (k + 1) as f64 * dt);
        let base = table[k];
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if base + self.partial(j, k as f64 * dt, mid) < local {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let (a, b) = set.interval(j);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        (c - h * (0.5 * (lo + hi)).cos()).clamp(a, b)
    }
}

pub fn equilibrium_cdf(params: &GreenParams) -> EquilibriumCdf {
    let mut cdf = EquilibriumCdf {
        params: params.clone(),
        gl8: GaussLegendre::new(8),
        tables: Vec::new(),
        offsets: Vec::new(),
        total: 0.0,
    };
    let dt = PI / CDF_CELLS as f64;
    let mut offset = 0.0;
    for j in 0..params.set.interval_count() {
        let mut table = Vec::with_capacity(CDF_CELLS + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 0..CDF_CELLS {
            acc += cdf.partial(j, k as f64 * dt, (k + 1) as f64 * dt);
            table.push(acc);
        }
        cdf.offsets.push(offset);
        offset += acc;
        cdf.tables.push(table);
    }
    cdf.total = offset;
    cdf
}

/// Fejér points: equilibrium quantiles at levels `j / (n - 1)`. A single
/// point is placed at the median.
pub fn fejer_points(params: &GreenParams, n: usize) -> Result<Vec<f64>> {
    fejer_points_from_cdf(&equilibrium_cdf(params), n)
}

pub fn fejer_points_from_cdf(cdf: &EquilibriumCdf, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => return Err(Error::invalid("Fejér sets need at least one point")),
        1 => return Ok(vec![cdf.quantile(0.5)]),
        _ => {}
    }
    Ok((0..n)
        .map(|j| cdf.quantile(j as f64 / (n - 1) as f64))
        .collect())
}

/// Greedy Leja sequence on a discretisation of `E`, starting at `max E`.
/// `grid_resolution` points are spread over the intervals in proportion to
/// their length (at least two each), clustered toward the endpoints.
pub fn leja_points(params: &GreenParams, n: usize, grid_resolution: usize) -> Result<Vec<f64>> {
    let set = &params.set;
    if n == 0 {
        return Err(Error::invalid("need at least one Leja point"));
    }
    if grid_resolution < n {
        return Err(Error::invalid("grid must hold at least n points"));
    }
    let length = set.total_length();
    let mut grid = Vec::with_capacity(grid_resolution + 2 * set.interval_count());
    for (a, b) in set.intervals() {
        let count = (((b - a) / length) * grid_resolution as f64).round().max(2.0) as usize;
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for i in 0..count {
            let t = PI * i as f64 / (count - 1) as f64;
            grid.push(c - h * t.cos());
        }
    }
    let mut chosen = vec![set.max()];
    let mut logs: Vec<f64> = grid.iter().map(|&x| (x - set.max()).abs().ln()).collect();
    while chosen.len() < n {
        let (best, _) = logs
            .iter()
            .enumerate()
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, &v)| {
                if v > acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
        if best == usize::MAX {
            return Err(Error::invalid("grid exhausted before n Leja points"));
        }
        let x = grid[best];
        chosen.push(x);
        for (l, &g) in logs.iter_mut().zip(&grid) {
            *l += (g - x).abs().ln();
        }
    }
    Ok(chosen)
}

/// Predicted exponential rate `γ* = g_E(anchor)`.
pub fn asymptotic_rate(params: &GreenParams, obs: &AnalyticObservable) -> Result<f64> {
    let anchor = obs
        .singularity_anchor()
        .ok_or_else(|| Error::invalid("observable is entire; no finite rate"))?;
    if anchor.im == 0.0 && params.set.locate(anchor.re, 0.0).is_some() {
        return Err(Error::AnchorInsideSet);
    }
    Ok(green_value(params, anchor))
}

/// Logarithmic capacity probed at the midpoint of the first interval.
pub fn capacity(params: &GreenParams) -> f64 {
    let (a, b) = params.set.interval(0);
    capacity_at(params, 0.5 * (a + b))
}

/// `exp(-U(x0))` with `U` the logarithmic potential of the equilibrium
/// measure, for a probe point `x0 ∈ E`.
pub fn capacity_at(params: &GreenParams, x0: f64) -> f64 {
    let cdf = equilibrium_cdf(params);
    let gl = &params.gl16;
    let mut potential = 0.0;
    for j in 0..params.set.interval_count() {
        let (a, b) = params.set.interval(j);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        if x0 >= a && x0 <= b {
            let t0 = ((c - x0) / h).clamp(-1.0, 1.0).acos();
            // x(t0 + δ) - x0 = 2h sin(t0 + δ/2) sin(δ/2), exact near δ = 0
            let f = |d: f64| {
                let gap = 2.0 * h * (t0 + 0.5 * d).sin() * (0.5 * d).sin();
                -gap.abs().ln() * cdf.angle_density(j, t0 + d)
            };
            let left: f64 = gl.integrate_graded(50, |s| t0 * f(-s * t0));
            let right: f64 = gl.integrate_graded(50, |s| (PI - t0) * f(s * (PI - t0)));
            potential += left + right;
        } else {
            let f = |t: f64| -(x0 - (c - h * t.cos())).abs().ln() * cdf.angle_density(j, t);
            potential += params.gl64.integrate_composite(0.0, PI, 4, f);
        }
    }
    (-potential).exp()
}

/// `Σ log|z - x_j|`, the log-modulus of the node polynomial.
pub fn log_node_polynomial(nodes: &[f64], z: Complex64) -> f64 {
    nodes.iter().map(|&x| (z - x).norm().ln()).sum()
}

/// Parses `"[a,b]U[c,d]"`; whitespace is ignored.
pub fn parse_interval_set(text: &str) -> Result<IntervalSet> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut intervals = Vec::new();
    for part in cleaned.split(['U', 'u']) {
        let inner = part
            .strip_prefix('[')
            .and_then(|p| p.strip_suffix(']'))
            .ok_or_else(|| Error::invalid("interval must look like [a,b]"))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::invalid("interval must look like [a,b]"))?;
        let a: f64 = a.parse().map_err(|_| Error::invalid("bad interval endpoint"))?;
        let b: f64 = b.parse().map_err(|_| Error::invalid("bad interval endpoint"))?;
        intervals.push((a, b));
    }
    IntervalSet::from_intervals(&intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::prelude::rust_2021::*;
    use std::vec;
    use proptest::prelude::*;

    fn set(intervals: &[(f64, f64)]) -> GreenParams {
        solve_gap_params(&IntervalSet::from_intervals(intervals).unwrap()).unwrap()
    }

    fn e1() -> GreenParams {
        set(&[(-1.0, -0.2), (0.2, 1.0)])
    }

    fn e2() -> GreenParams {
        set(&[(-1.0, -0.2), (-0.06, -0.03), (0.2, 1.0)])
    }

    /// Closed form on `[a, b]`: `log|w + √(w-1)√(w+1)|` in the mapped variable.
    fn green_interval(a: f64, b: f64, z: Complex64) -> f64 {
        let w = (z * 2.0 - (a + b)) / (b - a);
        let one = Complex64::new(1.0, 0.0);
        (w + (w - one).sqrt() * (w + one).sqrt()).norm().ln()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_interval_has_no_coefficients() {
        assert!(set(&[(-1.0, 1.0)]).numerator_coeffs().is_empty());
    }

    #[test]
    fn symmetric_gap_root_at_zero() {
        for eps in [0.05, 0.2, 0.5] {
            let p = set(&[(-1.0, -eps), (eps, 1.0)]);
            assert!(p.gap_root().unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_gap_root_solves_condition() {
        let p = set(&[(-1.0, -0.1), (0.3, 1.0)]);
        let z3 = p.gap_root().unwrap();
        assert!(z3 > -0.1 && z3 < 0.3);
        assert!(p.gap_residuals()[0].abs() < 1e-9);
        // independent oracle: midpoint rule in ζ = a + (b - a) sin²φ
        let (a, b) = (-0.1, 0.3);
        let n = 200_000;
        let dphi = 0.5 * PI / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let phi = (i as f64 + 0.5) * dphi;
            let zeta = a + (b - a) * phi.sin().powi(2);
            // dζ / √((ζ-a)(b-ζ)) = 2 dφ
            let other = ((zeta + 1.0) * (1.0 - zeta)).sqrt();
            acc += 2.0 * (zeta - z3) / other * dphi;
        }
        assert!(acc.abs() < 1e-9);
    }

    #[test]
    fn three_interval_residuals() {
        let p = e2();
        assert_eq!(p.numerator_coeffs().len(), 2);
        for r in p.gap_residuals() {
            assert!(r.abs() < 1e-9);
        }
        // P has one root per gap
        assert!(p.numerator(-0.2) * p.numerator(-0.06) < 0.0);
        assert!(p.numerator(-0.03) * p.numerator(0.2) < 0.0);
    }

    #[test]
    fn green_vanishes_on_set() {
        for p in [e1(), e2()] {
            for (a, b) in p.interval_set().intervals().collect::<Vec<_>>() {
                for t in [0.0, 0.3, 0.5, 1.0] {
                    assert!(green_value(&p, c(a + t * (b - a), 0.0)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn green_single_interval_closed_form() {
        let p = set(&[(-1.0, 1.0)]);
        let g = green_value(&p, c(0.0, 1.0));
        assert!((g - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
        for z in [c(2.0, 0.0), c(-3.5, 0.0), c(0.3, 0.01), c(1.0, 0.5), c(-0.7, -2.0), c(5.0, 5.0)] {
            assert!((green_value(&p, z) - green_interval(-1.0, 1.0, z)).abs() < 1e-10, "{z}");
        }
    }

    #[test]
    fn symmetric_pair_reduces_to_interval() {
        // x ∈ E1 iff x² ∈ [0.04, 1], so g_E1(z) = g_[0.04,1](z²) / 2
        let p = e1();
        for z in [c(0.0, 0.0), c(0.0, PI / 100.0), c(0.1, 0.0), c(0.5, 0.3), c(-1.5, 0.2), c(0.0, 3.0)] {
            let expect = 0.5 * green_interval(0.04, 1.0, z * z);
            assert!((green_value(&p, z) - expect).abs() < 1e-9, "{z}");
        }
    }

    #[test]
    fn green_is_path_independent() {
        // alternative path: up from max E, then horizontally
        let p = e2();
        let gl = GaussLegendre::new(32);
        for z in [c(-0.045, 0.02), c(-0.5, 0.1), c(0.1, 0.4)] {
            let top = p.interval_set().max();
            let up: f64 = gl.integrate_graded(60, |s| {
                let zeta = c(top, z.im * s * s);
                (p.green_derivative(zeta) * c(0.0, 2.0 * z.im * s)).re
            });
            let across: f64 = gl.integrate_composite(top, z.re, 200, |x| {
                p.green_derivative(c(x, z.im)).re
            });
            assert!((green_value(&p, z) - (up + across)).abs() < 1e-8, "{z}");
        }
    }

    #[test]
    fn green_grows_like_log() {
        for p in [e1(), e2()] {
            let cap = capacity(&p);
            for z in [c(1e6, 0.0), c(0.0, 1e6), c(-7e5, 7e5)] {
                let d = green_value(&p, z) - z.norm().ln();
                assert!((d + cap.ln()).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn green_is_harmonic_off_set() {
        let p = e2();
        let h = 1e-3;
        for z in [c(0.0, 0.3), c(-0.1, 0.2), c(1.5, 0.0), c(-1.3, -0.4), c(0.6, 0.5)] {
            let g = |w: Complex64| green_value(&p, w);
            let lap = (g(z + h) + g(z - h) + g(z + c(0.0, h)) + g(z - c(0.0, h)) - 4.0 * g(z)) / (h * h);
            assert!(lap.abs() < 1e-4, "{z}: {lap}");
        }
    }

    #[test]
    fn rates_for_fermi_dirac() {
        let interval = set(&[(-1.0, 1.0)]);
        for beta in [10.0, 100.0] {
            let fd = AnalyticObservable::fermi_dirac(beta, 0.0);
            let expect = (PI / beta).asinh();
            assert!((asymptotic_rate(&interval, &fd).unwrap() - expect).abs() < 1e-10);
        }
        let fd = AnalyticObservable::fermi_dirac(100.0, 0.0);
        let g1 = asymptotic_rate(&e1(), &fd).unwrap();
        let g2 = asymptotic_rate(&e2(), &fd).unwrap();
        assert!(g2 < g1);
        // frozen from the squared-variable closed form
        assert!((g1 - 0.5 * green_interval(0.04, 1.0, c(-(PI / 100.0).powi(2), 0.0))).abs() < 1e-9);
        let step = AnalyticObservable::fermi_dirac(f64::INFINITY, 0.0);
        let g0 = asymptotic_rate(&e1(), &step).unwrap();
        assert!(g0 > 0.0);
        assert!(matches!(
            asymptotic_rate(&interval, &step),
            Err(Error::AnchorInsideSet)
        ));
    }

    #[test]
    fn cdf_single_interval_is_arcsine() {
        let cdf = equilibrium_cdf(&set(&[(-1.0, 1.0)]));
        assert!((cdf.cdf(0.0) - 0.5).abs() < 1e-12);
        assert!((cdf.total_mass() - 1.0).abs() < 1e-12);
        for i in 0..=40 {
            let x = -1.0 + i as f64 * 0.05;
            let arcsine = 1.0 - x.clamp(-1.0, 1.0).acos() / PI;
            assert!((cdf.cdf(x) - arcsine).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_two_intervals_matches_dense_oracle() {
        let p = e1();
        let cdf = equilibrium_cdf(&p);
        assert!((cdf.total_mass() - 1.0).abs() < 1e-9);
        for m in cdf.interval_masses() {
            assert!((m - 0.5).abs() < 1e-9);
        }
        // oracle: midpoint rule on x = a + (b - a) sin²φ, 10⁶ cells per interval
        let oracle = |x: f64| {
            let mut total = 0.0;
            for (a, b) in p.interval_set().intervals().collect::<Vec<_>>() {
                if x <= a {
                    break;
                }
                let upper = x.min(b);
                let phi_max = ((upper - a) / (b - a)).sqrt().asin();
                let n = 1_000_000;
                let d = phi_max / n as f64;
                for i in 0..n {
                    let phi = (i as f64 + 0.5) * d;
                    let t = a + (b - a) * phi.sin().powi(2);
                    // density · dx / dφ with the √((t-a)(b-t)) factor cancelled
                    let rest = ((t - (-1.0f64.max(-1.0))).abs() * 0.0 + 1.0) * 2.0;
                    let others: f64 = p
                        .interval_set()
                        .endpoints()
                        .iter()
                        .filter(|&&e| e != a && e != b)
                        .map(|e| (t - e).abs().sqrt())
                        .product();
                    total += p.numerator(t).abs() / (PI * others) * rest * d;
                }
            }
            total
        };
        for i in 0..50 {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / 50.0;
            assert!((cdf.cdf(x) - oracle(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn fejer_on_interval_are_chebyshev_extrema() {
        let p = set(&[(-1.0, 1.0)]);
        for n in [5usize, 17, 33] {
            let pts = fejer_points(&p, n).unwrap();
            for (j, x) in pts.iter().enumerate() {
                let expect = -(PI * j as f64 / (n - 1) as f64).cos();
                assert!((x - expect).abs() < 1e-8);
            }
        }
        let pts = fejer_points(&e2(), 2).unwrap();
        assert_eq!(pts, vec![-1.0, 1.0]);
    }

    #[test]
    fn fejer_symmetric_for_even_counts() {
        let p = e1();
        for n in [4usize, 10, 30, 64] {
            let pts = fejer_points(&p, n).unwrap();
            for j in 0..n {
                assert!((pts[j] + pts[n - 1 - j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn fejer_points_increase_inside_set() {
        let p = e2();
        let pts = fejer_points(&p, 90).unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|&x| p.interval_set().contains(x)));
        assert!(pts.iter().any(|&x| (-0.06..=-0.03).contains(&x)));
    }

    #[test]
    fn leja_examples() {
        let p = set(&[(-1.0, 1.0)]);
        assert_eq!(leja_points(&p, 1, 100).unwrap(), vec![1.0]);
        assert_eq!(leja_points(&p, 2, 100).unwrap(), vec![1.0, -1.0]);
        let pts = leja_points(&p, 30, 4000).unwrap();
        let mut sorted = pts.clone();
        sorted.sort_by(f64::total_cmp);
        let mut sup: f64 = 0.0;
        for (k, x) in sorted.iter().enumerate() {
            let arcsine = 1.0 - x.acos() / PI;
            let lo = k as f64 / 30.0;
            let hi = (k + 1) as f64 / 30.0;
            sup = sup.max((arcsine - lo).abs()).max((arcsine - hi).abs());
        }
        assert!(sup < 0.08, "{sup}");
    }

    #[test]
    fn capacity_values() {
        assert!((capacity(&set(&[(-1.0, 1.0)])) - 0.5).abs() < 1e-10);
        assert!((capacity(&set(&[(0.0, 1.0)])) - 0.25).abs() < 1e-10);
        assert!((capacity(&e1()) - 0.24f64.sqrt()).abs() < 1e-8);
        for p in [e1(), e2()] {
            let (a0, b0) = p.interval_set().interval(0);
            let (a1, b1) = p.interval_set().interval(p.interval_set().interval_count() - 1);
            let first = capacity_at(&p, 0.5 * (a0 + b0));
            let last = capacity_at(&p, 0.5 * (a1 + b1));
            assert!((first - last).abs() < 1e-6);
        }
    }

    #[test]
    fn node_polynomial_asymptotics() {
        let p = e2();
        let cap = capacity(&p);
        let cdf = equilibrium_cdf(&p);
        let probes = [c(0.0, 0.5), c(-0.045, 0.05), c(1.2, 0.0), c(-0.6, 0.2), c(0.0, 0.0)];
        for n in [20usize, 40, 80] {
            let nodes = fejer_points_from_cdf(&cdf, n).unwrap();
            for z in probes {
                let lhs = log_node_polynomial(&nodes, z) / n as f64;
                let rhs = cap.ln() + green_value(&p, z);
                if n == 80 {
                    assert!((lhs - rhs).abs() < 0.05, "{z}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let s = parse_interval_set("[-1,-0.2]U[0.2,1]").unwrap();
        assert_eq!(s.endpoints(), &[-1.0, -0.2, 0.2, 1.0]);
        assert_eq!(parse_interval_set(&s.to_string()).unwrap(), s);
        assert!(parse_interval_set("[1,0]").is_err());
        assert!(parse_interval_set("[0,1]U[0.5,2]").is_err());
        assert!(parse_interval_set("0,1").is_err());
    }

    fn interval_sets() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.05f64..1.0, 0.02f64..0.5), 1..4).prop_map(|parts| {
            let mut x = -1.0;
            let mut out = Vec::new();
            for (len, gap) in parts {
                out.push((x, x + len));
                x += len + gap;
            }
            out
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gap_conditions_hold(iv in interval_sets()) {
            let p = set(&iv);
            for r in p.gap_residuals() {
                prop_assert!(r.abs() < 1e-9);
            }
        }

        #[test]
        fn green_non_negative(iv in interval_sets(), x in -2.0f64..3.0, y in -1.0f64..1.0) {
            let p = set(&iv);
            prop_assert!(green_value(&p, c(x, y)) >= 0.0);
        }

        #[test]
        fn cdf_monotone_with_unit_mass(iv in interval_sets()) {
            let p = set(&iv);
            let cdf = equilibrium_cdf(&p);
            prop_assert!((cdf.total_mass() - 1.0).abs() < 1e-9);
            prop_assert!(cdf.interval_masses().iter().all(|&m| m > 0.0));
            let pts = fejer_points_from_cdf(&cdf, 25).unwrap();
            prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
            for (j, x) in pts.iter().enumerate() {
                prop_assert!((cdf.cdf(*x) - j as f64 / 24.0).abs() < 1e-9);
            }
        }
    }
}
