//! Barycentric Lagrange interpolation on arbitrary real nodes.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{AnalyticObservable, EigenDecomposition, ScalarFunction};
use crate::{Error, Result};

/// Distinct nodes with normalised barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSet {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl InterpolationSet {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights `w_j ∝ 1 / ∏_{k≠j} (x_j - x_k)`, scaled so `max |w_j| = 1`.
    pub fn barycentric_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree of interpolants on this set.
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    fn eval_with<T>(&self, values: &[T], z: Complex64) -> Complex64
    where
        T: Copy + Into<Complex64>,
    {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = z - x;
            if d.re == 0.0 && d.im == 0.0 {
                return f.into();
            }
            let t = d.inv() * w;
            num += t * f.into();
            den += t;
        }
        num / den
    }
}

/// Weights are accumulated as `log|w_j|` with a separate sign so that large
/// node counts on short intervals neither overflow nor underflow.
pub fn interp_build(nodes: &[f64]) -> Result<InterpolationSet> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::invalid("interpolation needs at least one node"));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (hi - lo).max(f64::MIN_POSITIVE);
    let mut logs = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for j in 0..n {
        let mut l = 0.0;
        let mut sign = 1.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = nodes[j] - nodes[k];
            if d.abs() <= tol {
                return Err(Error::DuplicateNodes(j.min(k), j.max(k)));
            }
            l -= d.abs().ln();
            if d < 0.0 {
                sign = -sign;
            }
        }
        logs.push(l);
        signs.push(sign);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = logs
        .iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - top).exp())
        .collect();
    Ok(InterpolationSet {
        nodes: nodes.to_vec(),
        weights,
    })
}

/// `(I_X obs)(z)`.
pub fn interp_eval(set: &InterpolationSet, obs: &AnalyticObservable, z: Complex64) -> Result<Complex64> {
    let values: Vec<Complex64> = set
        .nodes
        .iter()
        .map(|&x| obs.eval(Complex64::new(x, 0.0)))
        .collect::<Result<_>>()?;
    Ok(set.eval_with(&values, z))
}

/// Real interpolating polynomial of a real function on a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    set: InterpolationSet,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn new<F: ScalarFunction + ?Sized>(set: &InterpolationSet, f: &F) -> Result<Self> {
        let values = set
            .nodes
            .iter()
            .map(|&x| f.value(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Interpolant {
            set: set.clone(),
            values,
        })
    }

    pub fn from_values(set: &InterpolationSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != set.len() {
            return Err(Error::invalid("one value per node required"));
        }
        Ok(Interpolant {
            set: set.clone(),
            values,
        })
    }

    pub fn set(&self) -> &InterpolationSet {
        &self.set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &w), &f) in self.set.nodes.iter().zip(&self.set.weights).zip(&self.values) {
            let d = x - xj;
            if d == 0.0 {
                return f;
            }
            let t = w / d;
            num += t * f;
            den += t;
        }
        num / den
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.set.eval_with(&self.values, z)
    }

    /// `p'(x)`, using the node formula `Σ_{j≠i} (w_j/w_i)(f_j - f_i)/(x_i - x_j)`
    /// when `x` is a node.
    pub fn derivative_at(&self, x: f64) -> f64 {
        let nodes = &self.set.nodes;
        let w = &self.set.weights;
        if let Some(i) = nodes.iter().position(|&xi| xi == x) {
            let mut acc = 0.0;
            for j in 0..nodes.len() {
                if j != i {
                    acc += w[j] / w[i] * (self.values[j] - self.values[i]) / (nodes[i] - nodes[j]);
                }
            }
            return acc;
        }
        let p = self.eval(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &f) in nodes.iter().zip(w).zip(&self.values) {
            let d = x - xj;
            num += wj * (p - f) / (d * d);
            den += wj / d;
        }
        num / den
    }
}

impl ScalarFunction for Interpolant {
    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x))
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.derivative_at(x))
    }
}

/// `Σ_s (I_X obs)(λ_s) |ψ_s[ℓ]|²`.
pub fn matrix_interpolant(
    ed: &EigenDecomposition,
    set: &InterpolationSet,
    obs: &AnalyticObservable,
    l: usize,
) -> Result<f64> {
    let p = Interpolant::new(set, obs)?;
    crate::spectral::local_function(ed, &p, l)
}

/// Sup-norm of `f - p` over a sample grid.
pub fn sup_error<F: ScalarFunction + ?Sized>(p: &Interpolant, f: &F, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        worst = worst.max((f.value(x)? - p.eval(x)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble, make_chain, HoppingModel};
    use crate::potential_theory::{fejer_points, solve_gap_params, IntervalSet};
    use crate::spectral::{eig, local_observable};
    use proptest::prelude::*;
    use std::prelude::rust_2021::*;

    fn poly(c: &[f64]) -> AnalyticObservable {
        AnalyticObservable::Polynomial {
            coefficients: c.to_vec(),
        }
    }

    #[test]
    fn quadratic_on_three_nodes() {
        let set = interp_build(&[-1.0, 0.0, 1.0]).unwrap();
        let v = interp_eval(&set, &poly(&[0.0, 0.0, 1.0]), Complex64::new(0.5, 0.0)).unwrap();
        assert!((v.re - 0.25).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(matches!(
            interp_build(&[0.0, 1.0, 1.0]),
            Err(Error::DuplicateNodes(1, 2))
        ));
    }

    #[test]
    fn survives_many_nodes_on_short_interval() {
        let nodes: Vec<f64> = (0..200)
            .map(|j| 1e-3 * (core::f64::consts::PI * j as f64 / 199.0).cos())
            .collect();
        let set = interp_build(&nodes).unwrap();
        assert!(set.barycentric_weights().iter().all(|w| w.is_finite()));
        let f = poly(&[0.3, 2.0, -1.0]);
        let p = Interpolant::new(&set, &f).unwrap();
        let x = 3.3e-4;
        assert!((p.eval(x) - f.value(x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn derivative_formulas() {
        let set = interp_build(&[-1.0, -0.3, 0.2, 0.9, 1.4]).unwrap();
        let f = poly(&[0.1, -0.4, 0.0, 0.7, 0.2]);
        let p = Interpolant::new(&set, &f).unwrap();
        for x in [-1.0, -0.3, 0.5, 1.4, 2.0] {
            assert!((p.derivative_at(x) - f.derivative(x).unwrap()).abs() < 1e-11, "{x}");
        }
    }

    #[test]
    fn fermi_error_drops_with_more_fejer_nodes() {
        let params = solve_gap_params(&IntervalSet::from_intervals(&[(-1.0, -0.2), (0.2, 1.0)]).unwrap())
            .unwrap();
        let fd = AnalyticObservable::fermi_dirac(100.0, 0.0);
        let grid: Vec<f64> = (0..2000)
            .map(|i| -1.0 + 2.0 * i as f64 / 1999.0)
            .filter(|x| x.abs() >= 0.2)
            .collect();
        let err = |n: usize| {
            let set = interp_build(&fejer_points(&params, n).unwrap()).unwrap();
            sup_error(&Interpolant::new(&set, &fd).unwrap(), &fd, &grid).unwrap()
        };
        assert!(err(60) < err(30));
    }

    fn gapped_chain(n: usize) -> EigenDecomposition {
        let c = make_chain(n, 1.0, &[0.5, -0.5]).unwrap();
        eig(&assemble(&c, &HoppingModel::two_centre(1.0, 1.0)).unwrap()).unwrap()
    }

    #[test]
    fn matrix_interpolant_exact_cases() {
        let ed = gapped_chain(10);
        let set = interp_build(&[-1.0, -0.5, 0.1, 0.6, 1.3]).unwrap();
        let f = poly(&[0.2, -1.0, 0.5, 0.3]);
        for l in 0..10 {
            let a = matrix_interpolant(&ed, &set, &f, l).unwrap();
            let b = local_observable(&ed, &f, l).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        // nodes containing the whole spectrum
        let fd = AnalyticObservable::fermi_dirac(50.0, 0.0);
        let set = interp_build(&ed.eigenvalues).unwrap();
        for l in 0..10 {
            let a = matrix_interpolant(&ed, &set, &fd, l).unwrap();
            let b = local_observable(&ed, &fd, l).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn local_error_below_spectral_sup() {
        let ed = gapped_chain(24);
        let lo = ed.eigenvalues[0];
        let hi = ed.eigenvalues[23];
        let below = ed.eigenvalues.iter().copied().filter(|&x| x < 0.0).fold(f64::MIN, f64::max);
        let above = ed.eigenvalues.iter().copied().filter(|&x| x > 0.0).fold(f64::MAX, f64::min);
        let params = solve_gap_params(&IntervalSet::from_intervals(&[(lo, below), (above, hi)]).unwrap())
            .unwrap();
        let fd = AnalyticObservable::fermi_dirac(100.0, 0.0);
        for n in [10usize, 20, 30] {
            let set = interp_build(&fejer_points(&params, n).unwrap()).unwrap();
            let p = Interpolant::new(&set, &fd).unwrap();
            let spectral_sup = sup_error(&p, &fd, &ed.eigenvalues).unwrap();
            for l in 0..24 {
                let err = (local_observable(&ed, &fd, l).unwrap()
                    - matrix_interpolant(&ed, &set, &fd, l).unwrap())
                .abs();
                assert!(err <= spectral_sup + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn reproduces_polynomials(
            coeffs in prop::collection::vec(-2.0f64..2.0, 1..9),
            probes in prop::collection::vec(-1.5f64..1.5, 20),
        ) {
            let n = coeffs.len() + 2;
            let nodes: Vec<f64> = (0..n).map(|j| -(core::f64::consts::PI * j as f64 / (n - 1) as f64).cos()).collect();
            let set = interp_build(&nodes).unwrap();
            let f = poly(&coeffs);
            let p = Interpolant::new(&set, &f).unwrap();
            for x in probes {
                let exact = f.value(x).unwrap();
                prop_assert!((p.eval(x) - exact).abs() <= 1e-10 * exact.abs().max(1.0));
            }
            for (x, v) in set.nodes().iter().zip(p.values()) {
                prop_assert_eq!(p.eval(*x), *v);
            }
        }

        #[test]
        fn spectral_sup_bound(seed in 0u64..1000, n in 4usize..12) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pattern: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.6..0.6)).collect();
            let c = make_chain(9, 1.0, &pattern).unwrap();
            let ed = eig(&assemble(&c, &HoppingModel::two_centre(1.0, 1.0)).unwrap()).unwrap();
            let nodes: Vec<f64> = (0..n).map(|j| -1.5 * (core::f64::consts::PI * j as f64 / (n - 1) as f64).cos()).collect();
            let set = interp_build(&nodes).unwrap();
            let fd = AnalyticObservable::fermi_dirac(8.0, 0.1);
            let p = Interpolant::new(&set, &fd).unwrap();
            let bound = sup_error(&p, &fd, &ed.eigenvalues).unwrap();
            for l in 0..9 {
                let err = (local_observable(&ed, &fd, l).unwrap() - matrix_interpolant(&ed, &set, &fd, l).unwrap()).abs();
                prop_assert!(err <= bound + 1e-12);
            }
        }
    }
}
