//! Self-consistent tight binding: density-dependent on-site potentials, the
//! stability operator and Newton / damped fixed-point solvers for the exact
//! and the interpolated density map.
//!
//! The effective on-site energy of site `ℓ` is the configuration's own
//! potential plus `v_ℓ(ρ)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::approx_linear::interp::{Interpolant, InterpolationSet};
use crate::lattice::{self, Configuration, HoppingModel};
use crate::linalg::lu_solve;
use crate::spectral::{self, AnalyticObservable, EigenDecomposition};
use crate::{Error, Matrix, Result, Vector};

/// Smallest admissible singular value of `I - L`.
pub const STABILITY_TOL: f64 = 1e-10;
/// Step halvings tried when a Newton step increases the residual.
pub const NEWTON_HALVINGS: usize = 5;
/// Consecutive residual increases that count as divergence.
pub const DIVERGENCE_STEPS: usize = 5;

/// `v_ℓ = ṽ(ρ_ℓ) + s Σ_{m≠ℓ} (ρ_m - Z_m) e^{-τ r_ℓm} / r_ℓm` with a cubic
/// `ṽ` given by its coefficients `c_0..c_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotentialSpec {
    pub onsite: [f64; 4],
    pub yukawa_strength: f64,
    pub yukawa_tau: f64,
    pub reference_charges: Vec<f64>,
}

impl EffectivePotentialSpec {
    /// No density dependence at all.
    pub fn uncoupled(n: usize) -> Self {
        EffectivePotentialSpec {
            onsite: [0.0; 4],
            yukawa_strength: 0.0,
            yukawa_tau: 1.0,
            reference_charges: alloc::vec![0.0; n],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.onsite.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(self.yukawa_strength >= 0.0) || !self.yukawa_strength.is_finite() {
            return Err(Error::invalid("yukawa strength must be non-negative"));
        }
        if !(self.yukawa_tau > 0.0) || !self.yukawa_tau.is_finite() {
            return Err(Error::invalid("yukawa tau must be positive"));
        }
        if self.reference_charges.len() != n {
            return Err(Error::invalid("one reference charge per site"));
        }
        Ok(())
    }

    pub fn onsite_value(&self, rho: f64) -> f64 {
        let c = &self.onsite;
        c[0] + rho * (c[1] + rho * (c[2] + rho * c[3]))
    }

    pub fn onsite_derivative(&self, rho: f64) -> f64 {
        let c = &self.onsite;
        c[1] + rho * (2.0 * c[2] + rho * 3.0 * c[3])
    }

    fn kernel(&self, r: f64) -> f64 {
        self.yukawa_strength * (-self.yukawa_tau * r).exp() / r
    }
}

fn check_density(config: &Configuration, rho: &[f64]) -> Result<()> {
    if rho.len() != config.len() {
        return Err(Error::invalid("density length differs from site count"));
    }
    if rho.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

pub fn potential_from_density(
    spec: &EffectivePotentialSpec,
    config: &Configuration,
    rho: &[f64],
) -> Result<Vec<f64>> {
    spec.validate(config.len())?;
    check_density(config, rho)?;
    let z = &spec.reference_charges;
    Ok((0..config.len())
        .map(|l| {
            let coupled: f64 = (0..config.len())
                .filter(|&m| m != l)
                .map(|m| (rho[m] - z[m]) * spec.kernel(config.distance(l, m)))
                .sum();
            spec.onsite_value(rho[l]) + coupled
        })
        .collect())
}

/// `∇v`, the Jacobian `∂v_ℓ/∂ρ_k`.
pub fn potential_jacobian(
    spec: &EffectivePotentialSpec,
    config: &Configuration,
    rho: &[f64],
) -> Result<Matrix> {
    spec.validate(config.len())?;
    check_density(config, rho)?;
    let n = config.len();
    Ok(Matrix::from_fn(n, n, |l, k| {
        if l == k {
            spec.onsite_derivative(rho[l])
        } else {
            spec.kernel(config.distance(l, k))
        }
    }))
}

/// Which density map is iterated.
#[derive(Debug, Clone, PartialEq)]
pub enum Approximation {
    Exact,
    /// Interpolate the observable on the given nodes before applying it.
    Interpolated(InterpolationSet),
}

/// Everything that defines a density map `ρ ↦ F(H(u(ρ)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScfProblem {
    pub spec: EffectivePotentialSpec,
    pub config: Configuration,
    pub model: HoppingModel,
    /// Fermi–Dirac occupation.
    pub observable: AnalyticObservable,
    pub approximation: Approximation,
}

impl ScfProblem {
    fn validate(&self) -> Result<()> {
        if !matches!(self.observable, AnalyticObservable::FermiDirac { .. }) {
            return Err(Error::invalid("densities need a Fermi-Dirac observable"));
        }
        self.observable.validate()?;
        self.model.validate()?;
        self.spec.validate(self.config.len())
    }

    fn decompose(&self, rho: &[f64]) -> Result<EigenDecomposition> {
        self.validate()?;
        let v = potential_from_density(&self.spec, &self.config, rho)?;
        let base = self.config.potentials();
        let total: Vec<f64> = base.iter().zip(&v).map(|(a, b)| a + b).collect();
        let h = lattice::assemble(&self.config.with_potentials(&total)?, &self.model)?;
        let ed = spectral::eig(&h)?;
        spectral::check_occupation(&ed.eigenvalues, &self.observable)?;
        Ok(ed)
    }

    fn interpolant(&self) -> Result<Option<Interpolant>> {
        match &self.approximation {
            Approximation::Exact => Ok(None),
            Approximation::Interpolated(set) => Interpolant::new(set, &self.observable).map(Some),
        }
    }
}

/// One application of the density map.
pub fn scf_map(problem: &ScfProblem, rho: &[f64]) -> Result<Vec<f64>> {
    let ed = problem.decompose(rho)?;
    let p = problem.interpolant()?;
    (0..ed.dim())
        .map(|l| match &p {
            None => spectral::local_function(&ed, &problem.observable, l),
            Some(p) => spectral::local_function(&ed, p, l),
        })
        .collect()
}

/// Jacobian of the density map and the conditioning of `I - L`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOperator {
    pub matrix: Matrix,
    /// Smallest singular value of `I - L`.
    pub min_singular_value: f64,
}

/// `L = 𝓕 ∇v` with `𝓕_ℓk = ∂F_ℓ/∂v_k` from spectral divided differences.
pub fn stability(problem: &ScfProblem, rho: &[f64]) -> Result<StabilityOperator> {
    let ed = problem.decompose(rho)?;
    let response = match problem.interpolant()? {
        None => spectral::potential_response(&ed, &problem.observable)?,
        Some(p) => spectral::potential_response(&ed, &p)?,
    };
    let grad_v = potential_jacobian(&problem.spec, &problem.config, rho)?;
    let matrix = response * grad_v;
    let n = matrix.nrows();
    let svd = (Matrix::identity(n, n) - &matrix).svd(false, false);
    let min_singular_value = svd.singular_values.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if !(min_singular_value >= STABILITY_TOL) {
        return Err(Error::IllConditioned(1.0 / min_singular_value));
    }
    Ok(StabilityOperator {
        matrix,
        min_singular_value,
    })
}

/// Converged density with its `‖ρ - Φ(ρ)‖_∞` history, one entry per
/// iterate starting from the initial guess.
#[derive(Debug, Clone, PartialEq)]
pub struct ScfSolution {
    pub rho: Vec<f64>,
    pub history: Vec<f64>,
}

impl ScfSolution {
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }
}

fn residual(rho: &[f64], image: &[f64]) -> (Vec<f64>, f64) {
    let r: Vec<f64> = rho.iter().zip(image).map(|(a, b)| a - b).collect();
    let norm = r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (r, norm)
}

fn check_solver_args(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    Ok(())
}

/// Newton iteration `ρ ← ρ - (I - L(ρ))^{-1} (ρ - Φ(ρ))`; a step that
/// increases the residual is halved up to [`NEWTON_HALVINGS`] times.
pub fn newton_scf(
    problem: &ScfProblem,
    rho0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<ScfSolution> {
    check_solver_args(tol)?;
    let mut rho = rho0.to_vec();
    let (mut r, mut norm) = residual(&rho, &scf_map(problem, &rho)?);
    let mut history = alloc::vec![norm];
    let n = rho.len();
    for _ in 0..max_iter {
        if norm <= tol {
            return Ok(ScfSolution { rho, history });
        }
        let l = stability(problem, &rho)?.matrix;
        let step = lu_solve(&(Matrix::identity(n, n) - l), &Vector::from_column_slice(&r))?;
        let mut scale = 1.0;
        let mut halvings = 0;
        loop {
            let trial: Vec<f64> = rho.iter().zip(step.iter()).map(|(x, d)| x - scale * d).collect();
            let (tr, tn) = residual(&trial, &scf_map(problem, &trial)?);
            if tn <= norm || halvings == NEWTON_HALVINGS {
                rho = trial;
                r = tr;
                norm = tn;
                break;
            }
            scale *= 0.5;
            halvings += 1;
        }
        history.push(norm);
    }
    if norm <= tol {
        return Ok(ScfSolution { rho, history });
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: norm,
    })
}

/// Linear mixing `ρ ← (1 - α) ρ + α Φ(ρ)`.
pub fn damped_fixed_point(
    problem: &ScfProblem,
    rho0: &[f64],
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScfSolution> {
    check_solver_args(tol)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("mixing parameter must lie in (0, 1]"));
    }
    let mut rho = rho0.to_vec();
    let mut history = Vec::new();
    let mut growth = 0;
    for iteration in 0..=max_iter {
        let image = scf_map(problem, &rho)?;
        let (_, norm) = residual(&rho, &image);
        if let Some(&last) = history.last() {
            growth = if norm > last { growth + 1 } else { 0 };
        }
        history.push(norm);
        if norm <= tol {
            return Ok(ScfSolution { rho, history });
        }
        if growth >= DIVERGENCE_STEPS {
            return Err(Error::Diverged {
                iteration,
                residual: norm,
            });
        }
        if iteration == max_iter {
            return Err(Error::MaxIterations {
                iterations: max_iter,
                residual: norm,
            });
        }
        for (x, y) in rho.iter_mut().zip(&image) {
            *x = (1.0 - alpha) * *x + alpha * y;
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Order `p` in `e_{i+1} ≈ C e_i^p`: least-squares slope of `ln e_{i+1}`
/// against `ln e_i` over successive pairs with `e_i < phase_start` and
/// `e_{i+1} > floor`. `None` with fewer than two such pairs.
pub fn convergence_order(history: &[f64], floor: f64, phase_start: f64) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = history
        .windows(2)
        .filter(|w| w[0] < phase_start && w[1] > floor && w[0] > floor)
        .map(|w| (w[0].ln(), w[1].ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    Some(crate::linalg::linear_regression(&x, &y).0)
}

/// Spectral radius of `m` by power iteration from the all-ones vector,
/// measured as the geometric mean growth over the last `iterations / 2`
/// steps (robust to a complex or negative dominant pair).
pub fn spectral_radius(m: &Matrix, iterations: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let iterations = iterations.max(2);
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut log_growth = 0.0;
    let tail = iterations / 2;
    for i in 0..iterations {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if i >= iterations - tail {
            log_growth += norm.ln();
        }
        v = w / norm;
    }
    (log_growth / tail as f64).exp()
}

/// Predicted asymptotic contraction factor of linear mixing with `α`.
pub fn mixing_contraction(l: &Matrix, alpha: f64, iterations: usize) -> f64 {
    let n = l.nrows();
    let m = Matrix::identity(n, n) * (1.0 - alpha) + l * alpha;
    spectral_radius(&m, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_linear::interp::interp_build;
    use crate::lattice::make_chain;
    use crate::potential_theory::{fejer_points, solve_gap_params, IntervalSet};
    use std::prelude::rust_2021::*;
    use std::vec;

    fn model() -> HoppingModel {
        HoppingModel::two_centre(1.0, 1.0)
    }

    fn yukawa(n: usize, strength: f64) -> EffectivePotentialSpec {
        EffectivePotentialSpec {
            onsite: [0.0, strength, 0.0, 0.0],
            yukawa_strength: strength,
            yukawa_tau: 1.0,
            reference_charges: vec![0.5; n],
        }
    }

    fn problem(n: usize, strength: f64, beta: f64, approximation: Approximation) -> ScfProblem {
        ScfProblem {
            spec: yukawa(n, strength),
            config: make_chain(n, 1.0, &[0.5, -0.5]).unwrap(),
            model: model(),
            observable: AnalyticObservable::fermi_dirac(beta, -0.2),
            approximation,
        }
    }

    fn fejer_set(n: usize) -> InterpolationSet {
        let set = IntervalSet::from_intervals(&[(-0.85, -0.55), (0.15, 1.4)]).unwrap();
        let params = solve_gap_params(&set).unwrap();
        interp_build(&fejer_points(&params, n).unwrap()).unwrap()
    }

    fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn potential_examples() {
        let c = make_chain(4, 1.0, &[0.0]).unwrap();
        let spec = EffectivePotentialSpec {
            onsite: [0.0; 4],
            yukawa_strength: 0.7,
            yukawa_tau: 1.3,
            reference_charges: vec![0.2, 0.1, 0.4, 0.0],
        };
        let v = potential_from_density(&spec, &c, &spec.reference_charges.clone()).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));

        let single = make_chain(1, 1.0, &[0.0]).unwrap();
        let s = EffectivePotentialSpec {
            onsite: [0.1, -0.5, 0.25, 2.0],
            yukawa_strength: 1.0,
            yukawa_tau: 1.0,
            reference_charges: vec![0.0],
        };
        let v = potential_from_density(&s, &single, &[0.4]).unwrap();
        assert!((v[0] - (0.1 - 0.2 + 0.04 + 0.128)).abs() < 1e-15);

        let three = make_chain(3, 1.0, &[0.0]).unwrap();
        let s = EffectivePotentialSpec {
            onsite: [0.0; 4],
            yukawa_strength: 0.8,
            yukawa_tau: 0.6,
            reference_charges: vec![0.0; 3],
        };
        let v = potential_from_density(&s, &three, &[1.0, 0.0, 0.0]).unwrap();
        assert!((v[1] - 0.8 * (-0.6f64).exp()).abs() < 1e-15);
        assert!((v[2] - 0.8 * (-1.2f64).exp() / 2.0).abs() < 1e-15);
        assert!(potential_from_density(&s, &three, &[1.0]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences_and_decays() {
        let c = make_chain(8, 1.0, &[0.0]).unwrap();
        let spec = EffectivePotentialSpec {
            onsite: [0.1, -0.3, 0.5, 0.2],
            yukawa_strength: 0.4,
            yukawa_tau: 0.9,
            reference_charges: vec![0.5; 8],
        };
        let rho: Vec<f64> = (0..8).map(|i| 0.3 + 0.05 * i as f64).collect();
        let jac = potential_jacobian(&spec, &c, &rho).unwrap();
        let h = 1e-6;
        for k in 0..8 {
            let (mut up, mut dn) = (rho.clone(), rho.clone());
            up[k] += h;
            dn[k] -= h;
            let vu = potential_from_density(&spec, &c, &up).unwrap();
            let vd = potential_from_density(&spec, &c, &dn).unwrap();
            for l in 0..8 {
                assert!(((vu[l] - vd[l]) / (2.0 * h) - jac[(l, k)]).abs() < 1e-8);
                if l != k {
                    let r = c.distance(l, k);
                    assert!(jac[(l, k)].abs() <= 0.4 * (-0.9 * r).exp() + 1e-15);
                }
            }
        }
    }

    #[test]
    fn uncoupled_map_is_constant() {
        let mut p = problem(6, 0.0, 100.0, Approximation::Exact);
        p.spec = EffectivePotentialSpec::uncoupled(6);
        let a = scf_map(&p, &[0.0; 6]).unwrap();
        let b = scf_map(&p, &[0.9, 0.1, 0.3, 0.2, 0.5, 0.7]).unwrap();
        assert_eq!(a, b);
        let l = stability(&p, &a).unwrap();
        assert!(l.matrix.iter().all(|&x| x == 0.0));
        let newton = newton_scf(&p, &[0.3; 6], 1e-12, 10).unwrap();
        assert_eq!(newton.iterations(), 1);
        let mixed = damped_fixed_point(&p, &[0.3; 6], 1.0, 1e-12, 10).unwrap();
        assert_eq!(mixed.iterations(), 1);
        assert!(inf_dist(&newton.rho, &a) < 1e-15);
    }

    #[test]
    fn symmetric_dimer_stays_symmetric() {
        let p = ScfProblem {
            spec: yukawa(2, 0.3),
            config: make_chain(2, 1.0, &[0.0]).unwrap(),
            model: model(),
            observable: AnalyticObservable::fermi_dirac(10.0, 0.1),
            approximation: Approximation::Exact,
        };
        let out = scf_map(&p, &[0.4, 0.4]).unwrap();
        assert!((out[0] - out[1]).abs() < 1e-14);
    }

    #[test]
    fn interpolated_map_close_to_exact() {
        let exact = problem(12, 0.1, 100.0, Approximation::Exact);
        let approx = problem(12, 0.1, 100.0, Approximation::Interpolated(fejer_set(40)));
        let rho: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 0.1 } else { 0.9 }).collect();
        let a = scf_map(&exact, &rho).unwrap();
        let b = scf_map(&approx, &rho).unwrap();
        assert!(inf_dist(&a, &b) <= 1e-6, "{}", inf_dist(&a, &b));
    }

    #[test]
    fn stability_matches_finite_differences() {
        for approximation in [Approximation::Exact, Approximation::Interpolated(fejer_set(30))] {
            let p = problem(8, 0.3, 20.0, approximation);
            let rho: Vec<f64> = (0..8).map(|i| 0.2 + 0.07 * i as f64).collect();
            let l = stability(&p, &rho).unwrap().matrix;
            let h = 1e-6;
            for k in 0..8 {
                let (mut up, mut dn) = (rho.clone(), rho.clone());
                up[k] += h;
                dn[k] -= h;
                let fu = scf_map(&p, &up).unwrap();
                let fd = scf_map(&p, &dn).unwrap();
                for i in 0..8 {
                    let fdv = (fu[i] - fd[i]) / (2.0 * h);
                    assert!((fdv - l[(i, k)]).abs() <= 1e-5 * (1.0 + l[(i, k)].abs()));
                }
            }
        }
    }

    #[test]
    fn stability_decays_off_diagonal() {
        let p = problem(20, 0.3, 100.0, Approximation::Exact);
        let rho = vec![0.5; 20];
        let l = stability(&p, &rho).unwrap().matrix;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (1..20)
            .map(|k| (p.config.distance(0, k), l[(0, k)].abs().ln()))
            .unzip();
        let (slope, _, r2) = crate::linalg::linear_regression(&xs, &ys);
        assert!(slope < 0.0 && r2 >= 0.9, "slope {slope} r2 {r2}");
    }

    #[test]
    fn newton_converges_quadratically() {
        let p = problem(12, 0.1, 100.0, Approximation::Exact);
        let sol = newton_scf(&p, &[0.5; 12], 1e-13, 30).unwrap();
        let fixed = scf_map(&p, &sol.rho).unwrap();
        assert!(inf_dist(&fixed, &sol.rho) <= 1e-13);
        let h = &sol.history;
        let mut checked = 0;
        for w in h.windows(2) {
            if w[0] < 1e-3 && w[1] > 1e-13 {
                assert!(w[1] <= 10.0 * w[0] * w[0], "{:?}", h);
                checked += 1;
            }
        }
        assert!(checked >= 1, "{:?}", h);
        assert!(convergence_order(h, 1e-13, 1.0).unwrap() >= 1.8);
    }

    #[test]
    fn approximate_fixed_point_approaches_exact() {
        let exact = newton_scf(&problem(12, 0.1, 100.0, Approximation::Exact), &[0.5; 12], 1e-13, 30)
            .unwrap();
        let gap = |n: usize| {
            let p = problem(12, 0.1, 100.0, Approximation::Interpolated(fejer_set(n)));
            let sol = newton_scf(&p, &[0.5; 12], 1e-13, 30).unwrap();
            inf_dist(&sol.rho, &exact.rho)
        };
        let (g20, g40) = (gap(20), gap(40));
        assert!(g40 < g20, "{g20} {g40}");
    }

    #[test]
    fn mixing_rate_matches_spectral_radius() {
        let p = problem(10, 0.5, 20.0, Approximation::Exact);
        let exact = newton_scf(&p, &[0.5; 10], 1e-13, 30).unwrap();
        let alpha = 0.6;
        let l = stability(&p, &exact.rho).unwrap().matrix;
        let predicted = mixing_contraction(&l, alpha, 400);
        let start: Vec<f64> = exact.rho.iter().map(|x| x + 1e-4).collect();
        let sol = damped_fixed_point(&p, &start, alpha, 1e-14, 500).unwrap();
        let h = &sol.history;
        let tail = &h[h.len() / 2..];
        let measured = (tail[tail.len() - 1] / tail[0]).powf(1.0 / (tail.len() - 1) as f64);
        assert!((measured - predicted).abs() < 0.05, "{measured} vs {predicted}");
    }

    #[test]
    fn divergence_is_reported() {
        let p = ScfProblem {
            spec: EffectivePotentialSpec {
                onsite: [0.0, 8.0, 0.0, 0.0],
                yukawa_strength: 0.0,
                yukawa_tau: 1.0,
                reference_charges: vec![0.0; 2],
            },
            config: make_chain(2, 1.0, &[0.0]).unwrap(),
            model: model(),
            observable: AnalyticObservable::fermi_dirac(10.0, 4.0),
            approximation: Approximation::Exact,
        };
        let fixed = newton_scf(&p, &[0.5, 0.5], 1e-13, 50).unwrap().rho;
        let l = stability(&p, &fixed).unwrap().matrix;
        assert!(mixing_contraction(&l, 1.0, 200) > 1.2);
        let start = [fixed[0] + 1e-6, fixed[1] - 1e-6];
        let r = damped_fixed_point(&p, &start, 1.0, 1e-10, 200);
        assert!(matches!(r, Err(Error::Diverged { .. })), "{r:?}");
        assert!(damped_fixed_point(&p, &start, 0.0, 1e-10, 5).is_err());
    }

    #[test]
    fn order_of_model_sequences() {
        let quad: Vec<f64> = (0..5).map(|i| 0.5f64.powi(1 << i)).collect();
        assert!((convergence_order(&quad, 1e-300, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<f64> = (0..8).map(|i| 0.3f64.powi(i)).collect();
        assert!((convergence_order(&lin, 1e-300, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(convergence_order(&[0.1, 0.01], 1e-300, 1.0), None);
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        let m = Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.8]);
        assert!((spectral_radius(&m, 200) - 0.8).abs() < 1e-6);
        let rot = Matrix::from_row_slice(2, 2, &[0.0, -0.9, 0.9, 0.0]);
        assert!((spectral_radius(&rot, 200) - 0.9).abs() < 1e-6);
    }
}
