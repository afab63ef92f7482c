//! Recursion method: Lanczos tridiagonalisation from a site, Gauss
//! quadrature of the local density of states, the nonlinear scheme Θ and
//! continued-fraction resolvents.
//!
//! A Jacobi matrix with `K + 1` levels reproduces the moments
//! `m_0..m_{2K+1}` of the local density of states.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::sym_eigen_sorted;
use crate::spectral::{AnalyticObservable, ScalarFunction};
use crate::{Error, Matrix, Result, Vector};

/// Relative size of `b_{n+1}` at which the recursion is declared exhausted.
pub const BREAKDOWN_TOL: f64 = 1e-13;
/// Minimum relative node separation of a valid Jacobi matrix.
pub const NODE_GAP_TOL: f64 = 1e-13;
/// Node/step collision tolerance relative to the node span.
pub const THETA_COLLISION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiOrigin {
    Lanczos { site: usize },
    Moments,
}

/// Symmetric tridiagonal matrix with diagonal `a_0..a_K` and positive
/// off-diagonal `b_1..b_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    a: Vec<f64>,
    b: Vec<f64>,
    origin: JacobiOrigin,
    truncated: bool,
}

impl JacobiMatrix {
    pub fn new(a: Vec<f64>, b: Vec<f64>, origin: JacobiOrigin) -> Result<Self> {
        if a.is_empty() || b.len() + 1 != a.len() {
            return Err(Error::invalid("need a_0..a_K and b_1..b_K"));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if b.iter().any(|&x| x <= 0.0) {
            return Err(Error::invalid("off-diagonal coefficients must be positive"));
        }
        Ok(JacobiMatrix {
            a,
            b,
            origin,
            truncated: false,
        })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn origin(&self) -> JacobiOrigin {
        self.origin
    }

    /// Set when the recursion stopped before the requested level.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// `K`, the index of the last level.
    pub fn levels(&self) -> usize {
        self.a.len() - 1
    }

    /// First `k + 1` levels.
    pub fn truncate(&self, k: usize) -> JacobiMatrix {
        let k = k.min(self.levels());
        JacobiMatrix {
            a: self.a[..=k].to_vec(),
            b: self.b[..k].to_vec(),
            origin: self.origin,
            truncated: self.truncated && k == self.levels(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.a.len();
        let mut t = Matrix::zeros(n, n);
        for (i, &a) in self.a.iter().enumerate() {
            t[(i, i)] = a;
        }
        for (i, &b) in self.b.iter().enumerate() {
            t[(i, i + 1)] = b;
            t[(i + 1, i)] = b;
        }
        t
    }
}

/// Lanczos recursion from the unit vector at row `l`, with full
/// reorthogonalisation, for levels `0..=k`.
pub fn lanczos(h: &Matrix, l: usize, k: usize) -> Result<JacobiMatrix> {
    let n = h.nrows();
    if l >= n {
        return Err(Error::SiteOutOfRange { index: l, len: n });
    }
    if k + 1 > n {
        return Err(Error::invalid("more Lanczos levels than matrix rows"));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = h
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut basis: Vec<Vector> = Vec::with_capacity(k + 1);
    let mut q = Vector::zeros(n);
    q[l] = 1.0;
    let (mut a, mut b) = (Vec::<f64>::with_capacity(k + 1), Vec::<f64>::with_capacity(k));
    let mut truncated = false;
    for level in 0..=k {
        let mut w = h * &q;
        let an = q.dot(&w);
        w.axpy(-an, &q, 1.0);
        if let (Some(prev), Some(&bn)) = (basis.last(), b.last()) {
            w.axpy(-bn, prev, 1.0);
        }
        basis.push(q);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w.axpy(-c, v, 1.0);
            }
        }
        a.push(an);
        if level == k {
            break;
        }
        let bn = w.norm();
        if bn < BREAKDOWN_TOL * norm.max(f64::MIN_POSITIVE) {
            truncated = true;
            break;
        }
        b.push(bn);
        q = w / bn;
    }
    let mut j = JacobiMatrix::new(a, b, JacobiOrigin::Lanczos { site: l })?;
    j.truncated = truncated;
    Ok(j)
}

/// Discrete measure with ascending nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x.powi(k))
            .sum()
    }

    pub fn integrate<F: ScalarFunction + ?Sized>(&self, f: &F) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f.value(x)?;
        }
        Ok(acc)
    }

    fn span(&self) -> f64 {
        match (self.nodes.first(), self.nodes.last()) {
            (Some(lo), Some(hi)) if hi > lo => hi - lo,
            (Some(x), _) => x.abs().max(1.0),
            _ => 1.0,
        }
    }
}

/// Golub–Welsch: nodes are the eigenvalues of `J`, weights the squared
/// first components of its normalised eigenvectors.
pub fn gauss_rule(j: &JacobiMatrix) -> Result<QuadratureRule> {
    let (nodes, vectors) = sym_eigen_sorted(&j.to_matrix())?;
    let span = nodes[nodes.len() - 1] - nodes[0];
    if nodes.windows(2).any(|p| p[1] - p[0] <= NODE_GAP_TOL * span) {
        return Err(Error::DegenerateNodes);
    }
    let weights = (0..nodes.len()).map(|s| vectors[(0, s)].powi(2)).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Θ: the observable integrated against the Gauss rule of `J`, i.e.
/// `O(J)_{00}`.
pub fn theta(j: &JacobiMatrix, obs: &AnalyticObservable) -> Result<f64> {
    obs.validate()?;
    let rule = gauss_rule(j)?;
    if let (true, Some(anchor)) = (obs.is_step(), obs.singularity_anchor()) {
        let tol = THETA_COLLISION_TOL * rule.span();
        if let Some(&x) = rule.nodes.iter().find(|&&x| (x - anchor.re).abs() < tol) {
            return Err(Error::DegenerateOccupation(x));
        }
    }
    rule.integrate(obs)
}

/// Θ for an arbitrary scalar function.
pub fn theta_function<F: ScalarFunction + ?Sized>(j: &JacobiMatrix, f: &F) -> Result<f64> {
    gauss_rule(j)?.integrate(f)
}

/// Far-field closure of a truncated continued fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminator {
    Vacuum,
    SquareRoot { a_inf: f64, b_inf: f64 },
}

impl Terminator {
    /// Square-root terminator with `a_∞`, `b_∞` the means of the last three
    /// computed coefficients.
    pub fn square_root_from(j: &JacobiMatrix) -> Result<Terminator> {
        if j.b.is_empty() {
            return Err(Error::invalid("square-root terminator needs at least one b_n"));
        }
        let tail = |v: &[f64]| {
            let s = &v[v.len().saturating_sub(3)..];
            s.iter().sum::<f64>() / s.len() as f64
        };
        Ok(Terminator::SquareRoot {
            a_inf: tail(&j.a),
            b_inf: tail(&j.b),
        })
    }

    /// `t_∞(z)`, on the branch that decays like `b_∞² / z`.
    pub fn tail(&self, z: Complex64) -> Complex64 {
        match *self {
            Terminator::Vacuum => Complex64::new(0.0, 0.0),
            Terminator::SquareRoot { a_inf, b_inf } => {
                let w = z - a_inf;
                let one = Complex64::new(1.0, 0.0);
                let root = w * (one - 4.0 * b_inf * b_inf / (w * w)).sqrt();
                (w - root) * 0.5
            }
        }
    }
}

/// `[(J - z)^{-1}]_{00}` with sign convention `1 / (z - a_0 - ...)`,
/// evaluated bottom-up with the tail `t_∞(z)` below the last level.
pub fn cf_resolvent(j: &JacobiMatrix, z: Complex64, term: Terminator) -> Result<Complex64> {
    if let Terminator::SquareRoot { b_inf, .. } = term {
        if !(b_inf > 0.0) {
            return Err(Error::invalid("b_inf must be positive"));
        }
    }
    let k = j.levels();
    let mut g = z - j.a[k] - term.tail(z);
    for n in (0..k).rev() {
        if g.norm() == 0.0 {
            return Err(Error::ContinuedFractionPole);
        }
        g = z - j.a[n] - j.b[n] * j.b[n] / g;
    }
    let r = g.inv();
    if g.norm() == 0.0 || !r.is_finite() {
        return Err(Error::ContinuedFractionPole);
    }
    Ok(r)
}

/// Recursion coefficients from raw moments `m_0..m_{2K+1}` by
/// orthonormalising monomials against the Hankel moment form. Loses
/// accuracy quickly with `K`; [`lanczos`] is the trusted route.
pub fn jacobi_from_moments(m: &[f64]) -> Result<JacobiMatrix> {
    if m.len() < 2 {
        return Err(Error::invalid("need at least m_0 and m_1"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(m[0] > 0.0) {
        return Err(Error::MomentsNotPositive(0));
    }
    let k = (m.len() - 2) / 2;
    // <p, q> for coefficient vectors in the monomial basis
    let inner = |p: &[f64], q: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            for (j, &qj) in q.iter().enumerate() {
                s += pi * qj * m[i + j];
            }
        }
        s
    };
    let shift = |p: &[f64]| -> Vec<f64> {
        let mut out = alloc::vec![0.0; p.len() + 1];
        out[1..].copy_from_slice(p);
        out
    };
    let mut prev: Vec<f64> = Vec::new();
    let mut cur = alloc::vec![1.0 / m[0].sqrt()];
    let (mut a, mut b) = (Vec::with_capacity(k + 1), Vec::with_capacity(k));
    for level in 0..=k {
        let xp = shift(&cur);
        let an = inner(&xp, &cur);
        a.push(an);
        if level == k {
            break;
        }
        let mut r = xp;
        for (i, c) in cur.iter().enumerate() {
            r[i] -= an * c;
        }
        if let Some(&bn) = b.last() {
            for (i, c) in prev.iter().enumerate() {
                r[i] -= bn * c;
            }
        }
        let b2 = inner(&r, &r);
        if !(b2 > 0.0) {
            return Err(Error::MomentsNotPositive(level + 1));
        }
        let bn = b2.sqrt();
        b.push(bn);
        prev = core::mem::replace(&mut cur, r.iter().map(|x| x / bn).collect());
    }
    JacobiMatrix::new(a, b, JacobiOrigin::Moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble, make_chain, HoppingModel};
    use crate::spectral::{eig_matrix, local_observable, moments};
    use proptest::prelude::*;
    use std::prelude::rust_2021::*;
    use std::vec;

    fn chain(n: usize, pattern: &[f64]) -> Matrix {
        let c = make_chain(n, 1.0, pattern).unwrap();
        assemble(&c, &HoppingModel::two_centre(1.0, 1.0)).unwrap().matrix
    }

    fn op_norm(h: &Matrix) -> f64 {
        eig_matrix(h).unwrap().norm()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lanczos_trivial_cases() {
        let j = lanczos(&Matrix::from_element(1, 1, 0.7), 0, 0).unwrap();
        assert_eq!(j.a(), &[0.7]);
        assert!(j.b().is_empty());
        let j = lanczos(&chain(2, &[0.0]), 0, 1).unwrap();
        assert!(j.a()[0].abs() < 1e-15 && j.a()[1].abs() < 1e-15);
        assert!((j.b()[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert!(lanczos(&chain(3, &[0.0]), 0, 3).is_err());
    }

    #[test]
    fn lanczos_flags_exhausted_recursion() {
        let mut h = Matrix::zeros(4, 4);
        h[(0, 1)] = 0.5;
        h[(1, 0)] = 0.5;
        h[(2, 3)] = 0.3;
        h[(3, 2)] = 0.3;
        let j = lanczos(&h, 0, 3).unwrap();
        assert!(j.truncated());
        assert_eq!(j.levels(), 1);
        assert!(!lanczos(&h, 0, 1).unwrap().truncated());
    }

    #[test]
    fn lanczos_reproduces_moments() {
        let h = chain(12, &[0.5, -0.5]);
        let norm = op_norm(&h);
        for l in [0usize, 5] {
            let t = lanczos(&h, l, 5).unwrap().to_matrix();
            let mh = moments(&h, l, 11).unwrap();
            let mt = moments(&t, 0, 11).unwrap();
            for k in 0..=11 {
                assert!((mh[k] - mt[k]).abs() <= 1e-9 * norm.powi(k as i32).max(1.0));
            }
        }
    }

    #[test]
    fn gauss_trivial_cases() {
        let j = JacobiMatrix::new(vec![0.7], vec![], JacobiOrigin::Moments).unwrap();
        let r = gauss_rule(&j).unwrap();
        assert_eq!((r.nodes[0], r.weights[0]), (0.7, 1.0));
        let e = (-1.0f64).exp();
        let r = gauss_rule(&lanczos(&chain(2, &[0.0]), 0, 1).unwrap()).unwrap();
        assert!((r.nodes[0] + e).abs() < 1e-15 && (r.nodes[1] - e).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-14 && (r.weights[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gauss_exactness_for_random_polynomials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = chain(12, &[0.5, -0.5, 0.2]);
        let rule = gauss_rule(&lanczos(&h, 3, 5).unwrap()).unwrap();
        let m = moments(&h, 3, 11).unwrap();
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let exact: f64 = coeffs.iter().zip(&m).map(|(c, m)| c * m).sum();
            let p = AnalyticObservable::Polynomial { coefficients: coeffs };
            assert!((rule.integrate(&p).unwrap() - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn theta_full_and_polynomial() {
        let h = chain(8, &[0.5, -0.5]);
        let ed = eig_matrix(&h).unwrap();
        let fd = AnalyticObservable::fermi_dirac(20.0, 0.0);
        for l in 0..8 {
            let j = lanczos(&h, l, 7).unwrap();
            let full = theta(&j, &fd).unwrap();
            assert!((full - local_observable(&ed, &fd, l).unwrap()).abs() < 1e-10);
        }
        let p = AnalyticObservable::Polynomial {
            coefficients: vec![0.3, -1.0, 0.5, 2.0, 0.0, -0.7],
        };
        let j = lanczos(&h, 2, 2).unwrap();
        let exact = local_observable(&ed, &p, 2).unwrap();
        assert!((theta(&j, &p).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn theta_refuses_node_on_step() {
        let j = lanczos(&chain(2, &[0.0]), 0, 0).unwrap();
        let step = AnalyticObservable::fermi_dirac(f64::INFINITY, 0.0);
        assert!(matches!(theta(&j, &step), Err(Error::DegenerateOccupation(_))));
    }

    #[test]
    fn continued_fraction_cases() {
        let j = JacobiMatrix::new(vec![0.3], vec![], JacobiOrigin::Moments).unwrap();
        let z = c(0.1, 0.2);
        let g = cf_resolvent(&j, z, Terminator::Vacuum).unwrap();
        assert!((g - (z - 0.3).inv()).norm() < 1e-15);
        assert_eq!(
            cf_resolvent(&j, c(0.3, 0.0), Terminator::Vacuum),
            Err(Error::ContinuedFractionPole)
        );

        let h = chain(10, &[0.5, -0.5]);
        let j = lanczos(&h, 4, 4).unwrap();
        let rule = gauss_rule(&j).unwrap();
        for i in 0..10 {
            let z = c(-1.5 + 0.3 * i as f64, 0.05 + 0.1 * (i % 3) as f64);
            let cf = cf_resolvent(&j, z, Terminator::Vacuum).unwrap();
            let pf: Complex64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w / (z - x))
                .sum();
            assert!((cf - pf).norm() < 1e-10);
        }
    }

    #[test]
    fn square_root_terminator_density() {
        let j = JacobiMatrix::new(vec![0.0; 4], vec![0.5; 3], JacobiOrigin::Moments).unwrap();
        let term = Terminator::square_root_from(&j).unwrap();
        assert_eq!(term, Terminator::SquareRoot { a_inf: 0.0, b_inf: 0.5 });
        let n = 4000;
        let mut mass = 0.0;
        for i in 0..n {
            let th = core::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            let x = th.cos();
            let rho = -cf_resolvent(&j, c(x, 1e-6), term).unwrap().im / core::f64::consts::PI;
            assert!(rho > 0.0);
            mass += rho * th.sin() * core::f64::consts::PI / n as f64;
        }
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
    }

    #[test]
    fn moments_to_jacobi() {
        let j = jacobi_from_moments(&[1.0, 0.7]).unwrap();
        assert_eq!(j.a(), &[0.7]);
        let e2 = (-2.0f64).exp();
        let j = jacobi_from_moments(&[1.0, 0.0, e2, 0.0]).unwrap();
        assert!(j.a()[0].abs() < 1e-15 && j.a()[1].abs() < 1e-15);
        assert!((j.b()[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(
            jacobi_from_moments(&[1.0, 0.0, 0.0, 0.0]),
            Err(Error::MomentsNotPositive(1))
        );

        let h = chain(12, &[0.5, -0.5]);
        for k in 1..=8 {
            let m = moments(&h, 0, 2 * k + 1).unwrap();
            let jm = jacobi_from_moments(&m).unwrap();
            let jl = lanczos(&h, 0, k).unwrap();
            for (x, y) in jm.a().iter().zip(jl.a()).chain(jm.b().iter().zip(jl.b())) {
                assert!((x - y).abs() < 1e-6, "k={k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn gap_holds_at_most_one_node() {
        let h = chain(41, &[0.5, -0.5]);
        let ed = eig_matrix(&h).unwrap();
        let below = ed.eigenvalues.iter().copied().filter(|&x| x < 0.0).fold(f64::MIN, f64::max);
        let above = ed.eigenvalues.iter().copied().filter(|&x| x > 0.0).fold(f64::MAX, f64::min);
        let (lo, hi) = (below + 0.01, above - 0.01);
        assert!(hi - lo > 0.5);
        for l in [0usize, 20, 21] {
            for k in 0..=30 {
                let rule = gauss_rule(&lanczos(&h, l, k).unwrap()).unwrap();
                let inside = rule.nodes.iter().filter(|&&x| x >= lo && x <= hi).count();
                assert!(inside <= 1, "l={l} k={k}: {inside}");
            }
        }
    }

    proptest! {
        #[test]
        fn nodes_interlace(seed in 0u64..1000, n in 6usize..14) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pattern: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let h = chain(n, &pattern);
            let l = rng.gen_range(0..n);
            let full = lanczos(&h, l, n - 1).unwrap();
            for k in 0..full.levels() {
                let lo = gauss_rule(&full.truncate(k)).unwrap().nodes;
                let hi = gauss_rule(&full.truncate(k + 1)).unwrap().nodes;
                // converged nodes agree to rounding, so strictness is checked up to it
                for i in 0..lo.len() {
                    prop_assert!(hi[i] < lo[i] + 1e-12 && lo[i] < hi[i + 1] + 1e-12);
                }
            }
        }

        #[test]
        fn weights_positive_unit_mass(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pattern: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let h = chain(32, &pattern);
            let j = lanczos(&h, rng.gen_range(0..32), 30).unwrap();
            for k in [0usize, 7, 19, 30] {
                let r = gauss_rule(&j.truncate(k)).unwrap();
                prop_assert!(r.weights.iter().all(|&w| w > 0.0));
                prop_assert!((r.total_mass() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn herglotz(re in -3.0f64..3.0, im in 1e-4f64..2.0, seed in 0u64..100) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pattern: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let j = lanczos(&chain(16, &pattern), rng.gen_range(0..16), 6).unwrap();
            let z = c(re, im);
            for term in [Terminator::Vacuum, Terminator::square_root_from(&j).unwrap()] {
                prop_assert!(cf_resolvent(&j, z, term).unwrap().im < 0.0);
            }
        }
    }
}
