//! Exact reference machinery: eigendecomposition, observables, moments,
//! local densities of states and matrix-function derivatives.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{self, Configuration, Hamiltonian, HoppingModel, SiteComponent};
use crate::linalg::sym_eigen_sorted;
use crate::{Error, Matrix, Result};

/// Distance to a pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-10;
/// Eigenvalue/chemical-potential collision tolerance at zero temperature.
pub const OCCUPATION_TOL: f64 = 1e-12;
/// Relative eigenvalue gap below which divided differences use the derivative.
pub const DD_MERGE_TOL: f64 = 1e-8;

/// Real function with a derivative, evaluated on the spectrum.
pub trait ScalarFunction {
    fn value(&self, x: f64) -> Result<f64>;
    fn derivative(&self, x: f64) -> Result<f64>;
}

/// Ascending eigenvalues and matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral norm, `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `|ψ_s[row]|²` for every `s`.
    pub fn local_weights(&self, row: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|s| self.eigenvectors[(row, s)].powi(2))
            .collect()
    }
}

pub fn eig(h: &Hamiltonian) -> Result<EigenDecomposition> {
    eig_matrix(&h.matrix)
}

pub fn eig_matrix(m: &Matrix) -> Result<EigenDecomposition> {
    let (eigenvalues, eigenvectors) = sym_eigen_sorted(m)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Scalar observables. `beta = f64::INFINITY` is the zero-temperature step.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticObservable {
    FermiDirac { beta: f64, mu: f64 },
    GrandPotential { beta: f64, mu: f64 },
    /// `x ↦ 1 / (x - z)`.
    Resolvent { z: Complex64 },
    /// Coefficients in ascending powers.
    Polynomial { coefficients: Vec<f64> },
}

impl AnalyticObservable {
    pub fn fermi_dirac(beta: f64, mu: f64) -> Self {
        AnalyticObservable::FermiDirac { beta, mu }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu }
            | AnalyticObservable::GrandPotential { beta, mu } => {
                if !(*beta > 0.0) || !mu.is_finite() {
                    return Err(Error::invalid("need beta > 0 and finite mu"));
                }
            }
            AnalyticObservable::Resolvent { z } => {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
            AnalyticObservable::Polynomial { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(())
    }

    /// Nearest point of non-analyticity in the closed upper half-plane.
    /// `None` for entire functions.
    pub fn singularity_anchor(&self) -> Option<Complex64> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu }
            | AnalyticObservable::GrandPotential { beta, mu } => {
                if beta.is_infinite() {
                    Some(Complex64::new(*mu, 0.0))
                } else {
                    Some(Complex64::new(*mu, PI / beta))
                }
            }
            AnalyticObservable::Resolvent { z } => Some(Complex64::new(z.re, z.im.abs())),
            AnalyticObservable::Polynomial { .. } => None,
        }
    }

    fn thermal(&self) -> Option<(f64, f64)> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu }
            | AnalyticObservable::GrandPotential { beta, mu } => Some((*beta, *mu)),
            _ => None,
        }
    }

    /// Whether this is a zero-temperature step observable.
    pub fn is_step(&self) -> bool {
        matches!(self.thermal(), Some((b, _)) if b.is_infinite())
    }

    /// Complex evaluation.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu } => {
                if beta.is_infinite() {
                    return Ok(Complex64::new(step(z.re, *mu), 0.0));
                }
                check_fermi_poles(z, *beta, *mu)?;
                Ok(fermi_complex(*beta * (z - mu)))
            }
            AnalyticObservable::GrandPotential { beta, mu } => {
                if beta.is_infinite() {
                    return Ok(if z.re < *mu { (z - mu) * 2.0 } else { Complex64::new(0.0, 0.0) });
                }
                check_fermi_poles(z, *beta, *mu)?;
                // log(1 - F(z)) = -log(1 + e^{-x})
                let x = *beta * (z - mu);
                let l = if x.re < 0.0 {
                    -x + (x.exp() + 1.0).ln()
                } else {
                    ((-x).exp() + 1.0).ln()
                };
                Ok(-l * (2.0 / beta))
            }
            AnalyticObservable::Resolvent { z: w } => {
                let d = z - w;
                if d.norm() < POLE_TOL {
                    return Err(Error::Singularity { re: w.re, im: w.im });
                }
                Ok(d.inv())
            }
            AnalyticObservable::Polynomial { coefficients } => Ok(coefficients
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)),
        }
    }
}

fn step(x: f64, mu: f64) -> f64 {
    if x < mu {
        1.0
    } else if x > mu {
        0.0
    } else {
        0.5
    }
}

fn fermi_real(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn fermi_complex(x: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if x.re > 0.0 {
        let e = (-x).exp();
        e / (one + e)
    } else {
        one / (one + x.exp())
    }
}

/// Poles of the Fermi function sit at `mu + i pi (2k + 1) / beta`.
fn check_fermi_poles(z: Complex64, beta: f64, mu: f64) -> Result<()> {
    let step = PI / beta;
    let k = ((z.im / step - 1.0) / 2.0).round();
    let pole = Complex64::new(mu, step * (2.0 * k + 1.0));
    if (z - pole).norm() < POLE_TOL {
        return Err(Error::Singularity {
            re: pole.re,
            im: pole.im,
        });
    }
    Ok(())
}

/// `log(1 + e^{y})` without overflow.
fn softplus(y: f64) -> f64 {
    y.max(0.0) + (-y.abs()).exp().ln_1p()
}

impl ScalarFunction for AnalyticObservable {
    fn value(&self, x: f64) -> Result<f64> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu } => Ok(if beta.is_infinite() {
                step(x, *mu)
            } else {
                fermi_real(beta * (x - mu))
            }),
            AnalyticObservable::GrandPotential { beta, mu } => Ok(if beta.is_infinite() {
                if x < *mu {
                    2.0 * (x - mu)
                } else {
                    0.0
                }
            } else {
                -2.0 / beta * softplus(-beta * (x - mu))
            }),
            AnalyticObservable::Resolvent { .. } => Err(Error::NotRealValued),
            AnalyticObservable::Polynomial { .. } => Ok(self.eval(Complex64::new(x, 0.0))?.re),
        }
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        match self {
            AnalyticObservable::FermiDirac { beta, mu } => {
                if beta.is_infinite() {
                    if (x - mu).abs() < OCCUPATION_TOL {
                        return Err(Error::DegenerateOccupation(x));
                    }
                    return Ok(0.0);
                }
                let f = fermi_real(beta * (x - mu));
                let g = fermi_real(-beta * (x - mu));
                Ok(-beta * f * g)
            }
            AnalyticObservable::GrandPotential { .. } => {
                let (beta, mu) = self.thermal().unwrap_or((1.0, 0.0));
                AnalyticObservable::FermiDirac { beta, mu }
                    .value(x)
                    .map(|f| 2.0 * f)
            }
            AnalyticObservable::Resolvent { .. } => Err(Error::NotRealValued),
            AnalyticObservable::Polynomial { coefficients } => Ok(coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)),
        }
    }
}

/// Complex evaluation of an observable.
pub fn observable_eval(obs: &AnalyticObservable, z: Complex64) -> Result<Complex64> {
    obs.eval(z)
}

/// `Σ_s f(λ_s) |ψ_s[row]|²` for a generic scalar function.
pub fn local_function<F: ScalarFunction + ?Sized>(
    ed: &EigenDecomposition,
    f: &F,
    row: usize,
) -> Result<f64> {
    check_row(ed, row)?;
    let mut acc = 0.0;
    for s in 0..ed.dim() {
        acc += f.value(ed.eigenvalues[s])? * ed.eigenvectors[(row, s)].powi(2);
    }
    Ok(acc)
}

fn check_row(ed: &EigenDecomposition, row: usize) -> Result<()> {
    if row >= ed.dim() {
        return Err(Error::SiteOutOfRange {
            index: row,
            len: ed.dim(),
        });
    }
    Ok(())
}

/// Refuses zero-temperature observables whose step sits on an eigenvalue.
pub(crate) fn check_occupation(eigenvalues: &[f64], obs: &AnalyticObservable) -> Result<()> {
    if let Some((beta, mu)) = obs.thermal() {
        if beta.is_infinite() {
            let scale = eigenvalues.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            if let Some(&x) = eigenvalues
                .iter()
                .find(|&&x| (x - mu).abs() < OCCUPATION_TOL * scale)
            {
                return Err(Error::DegenerateOccupation(x));
            }
        }
    }
    Ok(())
}

/// Local observable `O_ℓ = Σ_s O(λ_s) |ψ_s[ℓ]|²` (`ℓ` is a matrix row).
pub fn local_observable(ed: &EigenDecomposition, obs: &AnalyticObservable, l: usize) -> Result<f64> {
    check_occupation(&ed.eigenvalues, obs)?;
    local_function(ed, obs, l)
}

/// `[H^k]_{ℓℓ}` for `k = 0..=n_max` by repeated matrix-vector products.
pub fn moments(h: &Matrix, l: usize, n_max: usize) -> Result<Vec<f64>> {
    let n = h.nrows();
    if l >= n {
        return Err(Error::SiteOutOfRange { index: l, len: n });
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    let mut v = crate::Vector::zeros(n);
    v[l] = 1.0;
    for _ in 1..=n_max {
        v = h * &v;
        out.push(v[l]);
    }
    Ok(out)
}

/// Atoms `(λ_s, |ψ_s[ℓ]|²)` of a local density of states.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|(x, w)| w * x.powi(k)).sum()
    }

    pub fn integrate<F: ScalarFunction + ?Sized>(&self, f: &F) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in &self.atoms {
            acc += w * f.value(*x)?;
        }
        Ok(acc)
    }
}

pub fn ldos(ed: &EigenDecomposition, l: usize) -> Result<SpectralMeasure> {
    check_row(ed, l)?;
    let atoms = ed
        .eigenvalues
        .iter()
        .zip(ed.local_weights(l))
        .map(|(&x, w)| (x, w))
        .collect();
    Ok(SpectralMeasure { atoms })
}

/// Band/defect bookkeeping around a chemical potential.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub i_minus: (f64, f64),
    pub i_plus: (f64, f64),
    pub defect_eigenvalues: Vec<f64>,
    pub g: f64,
    pub g_def: f64,
    pub mu: f64,
}

/// Bands `I_±` are the hulls of the reference eigenvalues below/above `mu`,
/// widened by `pad` on both sides (the inner side never crosses `mu`).
/// Eigenvalues of `ed` outside `I_- ∪ I_+` are reported as defect states.
pub fn summarize_spectrum(
    ed_reference: &EigenDecomposition,
    ed: &EigenDecomposition,
    mu: f64,
    pad: f64,
) -> Result<SpectrumSummary> {
    if !(pad >= 0.0) {
        return Err(Error::invalid("pad must be non-negative"));
    }
    let ev = &ed_reference.eigenvalues;
    let scale = ev.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    if ev.iter().any(|x| (x - mu).abs() < OCCUPATION_TOL * scale) {
        return Err(Error::Metallic);
    }
    let below: Vec<f64> = ev.iter().copied().filter(|&x| x < mu).collect();
    let above: Vec<f64> = ev.iter().copied().filter(|&x| x > mu).collect();
    if below.is_empty() || above.is_empty() {
        return Err(Error::Metallic);
    }
    let i_minus = (below[0] - pad, (below[below.len() - 1] + pad).min(mu));
    let i_plus = ((above[0] - pad).max(mu), above[above.len() - 1] + pad);
    let inside = |x: f64, i: (f64, f64)| x >= i.0 && x <= i.1;
    let defect_eigenvalues: Vec<f64> = ed
        .eigenvalues
        .iter()
        .copied()
        .filter(|&x| !inside(x, i_minus) && !inside(x, i_plus))
        .collect();
    let g = i_plus.0 - i_minus.1;
    let lo = defect_eigenvalues
        .iter()
        .copied()
        .filter(|&x| x <= mu)
        .fold(i_minus.1, f64::max);
    let hi = defect_eigenvalues
        .iter()
        .copied()
        .filter(|&x| x >= mu)
        .fold(i_plus.0, f64::min);
    Ok(SpectrumSummary {
        i_minus,
        i_plus,
        defect_eigenvalues,
        g,
        g_def: hi - lo,
        mu,
    })
}

/// Matrix of divided differences `f[λ_s, λ_t]`, with `f'` at the midpoint
/// when the two eigenvalues are closer than `DD_MERGE_TOL ‖H‖`.
pub fn divided_differences<F: ScalarFunction + ?Sized>(
    eigenvalues: &[f64],
    f: &F,
) -> Result<Matrix> {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = DD_MERGE_TOL * if scale > 0.0 { scale } else { 1.0 };
    let values: Vec<f64> = eigenvalues
        .iter()
        .map(|&x| f.value(x))
        .collect::<Result<_>>()?;
    let mut dd = Matrix::zeros(n, n);
    for s in 0..n {
        for t in s..n {
            let (a, b) = (eigenvalues[s], eigenvalues[t]);
            let v = if (a - b).abs() < tol {
                f.derivative(0.5 * (a + b))?
            } else {
                (values[s] - values[t]) / (a - b)
            };
            dd[(s, t)] = v;
            dd[(t, s)] = v;
        }
    }
    Ok(dd)
}

/// Directional derivative `d f(H)_{row,row}` along the symmetric
/// perturbation `dh`, by the Daleckii–Krein formula.
pub fn directional_derivative<F: ScalarFunction + ?Sized>(
    ed: &EigenDecomposition,
    f: &F,
    row: usize,
    dh: &Matrix,
) -> Result<f64> {
    check_row(ed, row)?;
    let dd = divided_differences(&ed.eigenvalues, f)?;
    let psi = &ed.eigenvectors;
    let projected = psi.transpose() * dh * psi;
    let u: Vec<f64> = (0..ed.dim()).map(|s| psi[(row, s)]).collect();
    let mut acc = 0.0;
    for s in 0..ed.dim() {
        if u[s] == 0.0 {
            continue;
        }
        for t in 0..ed.dim() {
            acc += u[s] * u[t] * dd[(s, t)] * projected[(s, t)];
        }
    }
    Ok(acc)
}

/// Response matrix `F_{ℓk} = ∂ f(H)_{ℓℓ} / ∂ v_k` for all pairs of rows.
pub fn potential_response<F: ScalarFunction + ?Sized>(
    ed: &EigenDecomposition,
    f: &F,
) -> Result<Matrix> {
    let n = ed.dim();
    let dd = divided_differences(&ed.eigenvalues, f)?;
    let psi = &ed.eigenvectors;
    // column (ℓ, k) of b holds ψ_s[ℓ] ψ_s[k]
    let b = Matrix::from_fn(n, n * n, |s, c| psi[(c / n, s)] * psi[(c % n, s)]);
    let c = &dd * &b;
    let mut out = Matrix::zeros(n, n);
    for l in 0..n {
        for k in 0..n {
            let col = l * n + k;
            out[(l, k)] = b.column(col).dot(&c.column(col));
        }
    }
    Ok(out)
}

/// `∂ O_ℓ / ∂ u_m` for the full Hamiltonian of `config`.
pub fn observable_derivative<F: ScalarFunction + ?Sized>(
    config: &Configuration,
    model: &HoppingModel,
    obs: &F,
    l: usize,
    m: usize,
    component: SiteComponent,
) -> Result<f64> {
    config.site(l)?;
    let h = lattice::assemble(config, model)?;
    let ed = eig(&h)?;
    let dh = lattice::hamiltonian_derivative(config, model, m, component)?;
    directional_derivative(&ed, obs, l, &dh)
}

/// Zero-temperature guard for [`observable_derivative`] with an analytic
/// observable: the step must not sit on the spectrum.
pub fn observable_derivative_checked(
    config: &Configuration,
    model: &HoppingModel,
    obs: &AnalyticObservable,
    l: usize,
    m: usize,
    component: SiteComponent,
) -> Result<f64> {
    let h = lattice::assemble(config, model)?;
    let ed = eig(&h)?;
    check_occupation(&ed.eigenvalues, obs)?;
    let dh = lattice::hamiltonian_derivative(config, model, m, component)?;
    directional_derivative(&ed, obs, l, &dh)
}

/// Unit vector helper for tests and callers building perturbations.
pub fn unit_perturbation(n: usize, k: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(k, k)] = 1.0;
    m
}
