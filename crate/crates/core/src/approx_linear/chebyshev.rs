//! Chebyshev projection/interpolation and the kernel polynomial method.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{AnalyticObservable, ScalarFunction};
use crate::{Error, Matrix, Result, Vector};

/// Series `Σ c_n T_n(t)` in the variable `t = (2x - a - b) / (b - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    pub interval: (f64, f64),
    pub coefficients: Vec<f64>,
}

impl ChebSeries {
    fn to_unit(&self, x: f64) -> f64 {
        let (a, b) = self.interval;
        (2.0 * x - a - b) / (b - a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coefficients.first().copied().unwrap_or(0.0)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let (a, b) = self.interval;
        let t = (z * 2.0 - (a + b)) / (b - a);
        let zero = Complex64::new(0.0, 0.0);
        let (mut b1, mut b2) = (zero, zero);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = t * b1 * 2.0 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coefficients.first().copied().unwrap_or(0.0)
    }

    /// Series truncated to degree `n`.
    pub fn truncated(&self, n: usize) -> ChebSeries {
        ChebSeries {
            interval: self.interval,
            coefficients: self.coefficients.iter().take(n + 1).copied().collect(),
        }
    }
}

fn check_interval(interval: (f64, f64)) -> Result<()> {
    if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
        return Err(Error::invalid("interval must satisfy a < b"));
    }
    Ok(())
}

/// Projection coefficients `c_n = (2/π) ∫ O(cos θ) cos(nθ) dθ`, `c_0` halved,
/// by Gauss–Chebyshev quadrature with `2(N + 1)` points.
pub fn cheb_project<F: ScalarFunction + ?Sized>(
    f: &F,
    n: usize,
    interval: (f64, f64),
) -> Result<ChebSeries> {
    cheb_project_with(f, n, interval, 2 * (n + 1))
}

/// As [`cheb_project`] with an explicit quadrature size `m > n`.
pub fn cheb_project_with<F: ScalarFunction + ?Sized>(
    f: &F,
    n: usize,
    interval: (f64, f64),
    m: usize,
) -> Result<ChebSeries> {
    check_interval(interval)?;
    if m <= n {
        return Err(Error::invalid("quadrature size must exceed the degree"));
    }
    let (a, b) = interval;
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        let theta = PI * (k as f64 + 0.5) / m as f64;
        values.push(f.value(0.5 * (a + b) + 0.5 * (b - a) * theta.cos())?);
    }
    let mut coefficients = vec![0.0; n + 1];
    for (j, c) in coefficients.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, v) in values.iter().enumerate() {
            let theta = PI * (k as f64 + 0.5) / m as f64;
            acc += v * (j as f64 * theta).cos();
        }
        *c = 2.0 * acc / m as f64;
    }
    coefficients[0] *= 0.5;
    Ok(ChebSeries {
        interval,
        coefficients,
    })
}

/// Interpolant at the extreme points `cos(jπ/N)`, `j = 0..N`.
pub fn cheb_interp<F: ScalarFunction + ?Sized>(
    f: &F,
    n: usize,
    interval: (f64, f64),
) -> Result<ChebSeries> {
    check_interval(interval)?;
    let (a, b) = interval;
    if n == 0 {
        let v = f.value(0.5 * (a + b))?;
        return Ok(ChebSeries {
            interval,
            coefficients: vec![v],
        });
    }
    let values: Vec<f64> = (0..=n)
        .map(|j| f.value(0.5 * (a + b) + 0.5 * (b - a) * (PI * j as f64 / n as f64).cos()))
        .collect::<Result<_>>()?;
    let mut coefficients = vec![0.0; n + 1];
    for (k, c) in coefficients.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, v) in values.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            acc += w * v * (PI * (j * k) as f64 / n as f64).cos();
        }
        *c = 2.0 * acc / n as f64;
    }
    coefficients[0] *= 0.5;
    coefficients[n] *= 0.5;
    Ok(ChebSeries {
        interval,
        coefficients,
    })
}

/// Parameter `ρ` of the Bernstein ellipse for `interval` passing through
/// `z`, i.e. `|t + √(t² - 1)|` with `t` the image of `z` in `[-1, 1]`
/// coordinates.
pub fn bernstein_rho(z: Complex64, interval: (f64, f64)) -> Result<f64> {
    check_interval(interval)?;
    let (a, b) = interval;
    let t = (z * 2.0 - (a + b)) / (b - a);
    let root = (t * t - 1.0).sqrt();
    Ok((t + root).norm().max((t - root).norm()))
}

/// Largest `|O|` over `samples` equispaced points of the ellipse `E_ρ`.
pub fn ellipse_sup(
    obs: &AnalyticObservable,
    rho: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<f64> {
    check_interval(interval)?;
    if !(rho > 1.0) {
        return Err(Error::invalid("ellipse parameter must exceed one"));
    }
    let (a, b) = interval;
    let mut sup = 0.0f64;
    for k in 0..samples.max(4) {
        let w = Complex64::from_polar(rho, 2.0 * PI * k as f64 / samples.max(4) as f64);
        let t = (w + w.inv()) * 0.5;
        let z = t * (0.5 * (b - a)) + 0.5 * (a + b);
        sup = sup.max(obs.eval(z)?.norm());
    }
    Ok(sup)
}

/// `6 ‖O‖_{E_ρ} ρ^{-N} / (ρ - 1)`, the joint error bound for degree-`N`
/// projection and interpolation.
pub fn bernstein_bound(
    obs: &AnalyticObservable,
    n: usize,
    rho: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let sup = ellipse_sup(obs, rho, interval, samples)?;
    Ok(6.0 * sup * rho.powi(-(n as i32)) / (rho - 1.0))
}

/// [`bernstein_bound`] minimised over `grid` values of `ρ` spaced
/// geometrically in `(1, ρ_max)`, `ρ_max` set by the nearest singularity.
/// Returns `(bound, ρ)`.
pub fn optimal_bernstein_bound(
    obs: &AnalyticObservable,
    n: usize,
    interval: (f64, f64),
    grid: usize,
    samples: usize,
) -> Result<(f64, f64)> {
    let rho_max = match obs.singularity_anchor() {
        Some(z) => bernstein_rho(z, interval)?,
        None => 1e3,
    };
    if !(rho_max > 1.0) {
        return Err(Error::AnchorInsideSet);
    }
    let grid = grid.max(2);
    let mut best = (f64::INFINITY, 1.0);
    for i in 1..grid {
        // stays strictly inside the singular ellipse
        let rho = rho_max.powf(i as f64 / grid as f64);
        let bound = match bernstein_bound(obs, n, rho, interval, samples) {
            Ok(v) => v,
            Err(Error::Singularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if bound < best.0 {
            best = (bound, rho);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingKind {
    None,
    Fejer,
    Jackson,
}

/// Damping factors `d_0..d_M` applied to a Chebyshev series of order `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DampingKernel {
    pub kind: DampingKind,
    pub order: usize,
}

impl DampingKernel {
    pub fn new(kind: DampingKind, order: usize) -> Self {
        DampingKernel { kind, order }
    }

    pub fn coefficient(&self, n: usize) -> f64 {
        let m = self.order as f64;
        let nf = n as f64;
        match self.kind {
            DampingKind::None => 1.0,
            DampingKind::Fejer => {
                if self.order == 0 {
                    1.0
                } else {
                    (1.0 - nf / m).max(0.0)
                }
            }
            DampingKind::Jackson => {
                let q = PI / (m + 1.0);
                ((m - nf + 1.0) * (nf * q).cos() + (nf * q).sin() / q.tan()) / (m + 1.0)
            }
        }
    }

    pub fn coefficients(&self) -> Vec<f64> {
        (0..=self.order).map(|n| self.coefficient(n)).collect()
    }
}

/// Padding used when mapping Gershgorin bounds onto `[-1, 1]`.
pub const KPM_PADDING: f64 = 0.01;

/// Gershgorin interval enclosing the spectrum of a symmetric matrix.
pub fn gershgorin_bounds(h: &Matrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..h.nrows() {
        let r: f64 = (0..h.ncols()).filter(|&j| j != i).map(|j| h[(i, j)].abs()).sum();
        lo = lo.min(h[(i, i)] - r);
        hi = hi.max(h[(i, i)] + r);
    }
    (lo, hi)
}

/// Affine map sending `[lo, hi]` into `[-1 + δ, 1 - δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralScaling {
    pub center: f64,
    pub half_width: f64,
}

impl SpectralScaling {
    pub fn from_bounds(lo: f64, hi: f64, padding: f64) -> Self {
        let (lo, hi) = if hi - lo > 0.0 { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        SpectralScaling {
            center: 0.5 * (lo + hi),
            half_width: 0.5 * (hi - lo) / (1.0 - padding),
        }
    }

    /// Energy interval corresponding to `[-1, 1]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Chebyshev moments `[T_n(H̃)]_{ℓℓ}`, `n = 0..=m`, of the scaled matrix.
pub fn kpm_moments(h: &Matrix, l: usize, m: usize, scaling: SpectralScaling) -> Result<Vec<f64>> {
    let n = h.nrows();
    if l >= n {
        return Err(Error::SiteOutOfRange { index: l, len: n });
    }
    let scaled = (h - Matrix::identity(n, n) * scaling.center) / scaling.half_width;
    let (lo, hi) = gershgorin_bounds(&scaled);
    if lo < -1.0 - 1e-12 || hi > 1.0 + 1e-12 {
        return Err(Error::SpectrumOutOfRange);
    }
    let mut out = Vec::with_capacity(m + 1);
    let mut prev = Vector::zeros(n);
    prev[l] = 1.0;
    out.push(1.0);
    if m == 0 {
        return Ok(out);
    }
    let mut cur = &scaled * &prev;
    out.push(cur[l]);
    for _ in 2..=m {
        let next = &scaled * &cur * 2.0 - &prev;
        out.push(next[l]);
        prev = cur;
        cur = next;
    }
    Ok(out)
}

/// `Σ_{n≤M} d_n c_n μ_n` with Gershgorin scaling.
pub fn kpm_estimate<F: ScalarFunction + ?Sized>(
    h: &Matrix,
    l: usize,
    f: &F,
    m: usize,
    kernel: DampingKernel,
) -> Result<f64> {
    let (lo, hi) = gershgorin_bounds(h);
    kpm_estimate_scaled(h, l, f, m, kernel, SpectralScaling::from_bounds(lo, hi, KPM_PADDING))
}

/// As [`kpm_estimate`] with an explicit scaling.
pub fn kpm_estimate_scaled<F: ScalarFunction + ?Sized>(
    h: &Matrix,
    l: usize,
    f: &F,
    m: usize,
    kernel: DampingKernel,
    scaling: SpectralScaling,
) -> Result<f64> {
    let mu = kpm_moments(h, l, m, scaling)?;
    let series = cheb_project(f, m, scaling.interval())?;
    Ok(series
        .coefficients
        .iter()
        .zip(&mu)
        .enumerate()
        .map(|(n, (c, u))| kernel.coefficient(n) * c * u)
        .sum())
}
