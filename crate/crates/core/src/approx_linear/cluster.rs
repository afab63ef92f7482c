//! Body-order decomposition by inclusion–exclusion over clusters, and the
//! vacuum cluster expansion.

use alloc::vec::Vec;

use crate::approx_linear::interp::{InterpolationSet, Interpolant};
use crate::lattice::{self, Configuration, HoppingModel};
use crate::spectral::{self, AnalyticObservable, ScalarFunction};
use crate::{Error, Result};

/// Largest cluster accepted by [`body_order_component`].
pub const MAX_COMPONENT_CLUSTER: usize = 5;
/// Largest configuration accepted by the vacuum expansion.
pub const MAX_VACUUM_SITES: usize = 12;
/// Largest body order accepted by the vacuum expansion.
pub const MAX_VACUUM_ORDER: usize = 5;

fn check_cluster(config: &Configuration, l: usize, cluster: &[usize]) -> Result<()> {
    config.site(l)?;
    for (i, &k) in cluster.iter().enumerate() {
        config.site(k)?;
        if k == l {
            return Err(Error::CentreInCluster(l));
        }
        if cluster[..i].contains(&k) {
            return Err(Error::invalid("cluster lists a site twice"));
        }
    }
    Ok(())
}

/// `f(H|_{ℓ;K})_{ℓℓ}` for the isolated cluster.
fn cluster_value<F: ScalarFunction + ?Sized>(
    config: &Configuration,
    model: &HoppingModel,
    f: &F,
    l: usize,
    cluster: &[usize],
) -> Result<f64> {
    let h = lattice::restrict(config, model, l, cluster)?;
    let ed = spectral::eig(&h)?;
    let row = h.row_of(l).ok_or(Error::SiteOutOfRange {
        index: l,
        len: h.dim(),
    })?;
    spectral::local_function(&ed, f, row)
}

/// Subsets of `items` in a fixed order (by bitmask).
fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u32..1 << items.len()).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &k)| k)
            .collect()
    })
}

/// Inclusion–exclusion `Σ_{K'⊆K} (-1)^{|K|-|K'|} f(H|_{ℓ;K'})_{ℓℓ}`.
pub fn cluster_component<F: ScalarFunction + ?Sized>(
    config: &Configuration,
    model: &HoppingModel,
    f: &F,
    l: usize,
    cluster: &[usize],
) -> Result<f64> {
    check_cluster(config, l, cluster)?;
    let mut acc = 0.0;
    for sub in subsets(cluster) {
        let sign = if (cluster.len() - sub.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * cluster_value(config, model, f, l, &sub)?;
    }
    Ok(acc)
}

/// Body-order component `V_{|K|,N}` of the interpolated observable.
pub fn body_order_component(
    config: &Configuration,
    model: &HoppingModel,
    set: &InterpolationSet,
    obs: &AnalyticObservable,
    l: usize,
    cluster: &[usize],
) -> Result<f64> {
    if cluster.len() > MAX_COMPONENT_CLUSTER {
        return Err(Error::ClusterTooLarge {
            size: cluster.len(),
            max: MAX_COMPONENT_CLUSTER,
        });
    }
    let p = Interpolant::new(set, obs)?;
    cluster_component(config, model, &p, l, cluster)
}

/// Largest cluster size (sites besides the centre) with a nonzero component
/// for a polynomial of the given degree.
pub fn max_cluster_size(model: &HoppingModel, degree: usize) -> usize {
    if degree == 0 {
        return 0;
    }
    if model.has_three_centre() {
        2 * degree - 1
    } else {
        degree - 1
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `Σ_{|K| ≤ max_size} component(K)` over clusters drawn from all sites but
/// `ℓ`. Regrouped by Möbius inversion so each cluster Hamiltonian is
/// diagonalised once: cluster `K'` enters with weight
/// `Σ_{i=0}^{max_size-|K'|} (-1)^i C(M - |K'|, i)`, `M` the number of
/// candidate sites.
pub fn truncated_cluster_sum<F: ScalarFunction + ?Sized>(
    config: &Configuration,
    model: &HoppingModel,
    f: &F,
    l: usize,
    max_size: usize,
) -> Result<f64> {
    config.site(l)?;
    let others: Vec<usize> = (0..config.len()).filter(|&k| k != l).collect();
    let m = others.len();
    let max_size = max_size.min(m);
    let weight = |k: usize| -> f64 {
        (0..=max_size - k)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * binomial(m - k, i))
            .sum()
    };
    let mut acc = 0.0;
    let mut cluster = Vec::new();
    for size in 0..=max_size {
        let w = weight(size);
        if w == 0.0 {
            continue;
        }
        for_each_combination(&others, size, &mut cluster, &mut |c| {
            acc += w * cluster_value(config, model, f, l, c)?;
            Ok(())
        })?;
    }
    Ok(acc)
}

fn for_each_combination(
    items: &[usize],
    size: usize,
    current: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if current.len() == size {
        return visit(current);
    }
    let start = match current.last() {
        Some(&last) => items.iter().position(|&x| x == last).map_or(0, |p| p + 1),
        None => 0,
    };
    let needed = size - current.len();
    if items.len() < start + needed {
        return Ok(());
    }
    for i in start..=items.len() - needed {
        current.push(items[i]);
        for_each_combination(items, size, current, visit)?;
        current.pop();
    }
    Ok(())
}

fn check_vacuum(config: &Configuration, order: usize) -> Result<()> {
    if config.len() > MAX_VACUUM_SITES {
        return Err(Error::ClusterTooLarge {
            size: config.len(),
            max: MAX_VACUUM_SITES,
        });
    }
    if order == 0 || order > MAX_VACUUM_ORDER.max(config.len().min(MAX_VACUUM_ORDER)) {
        if order == 0 {
            return Err(Error::invalid("body order must be at least one"));
        }
        if order > MAX_VACUUM_ORDER && order < config.len() {
            return Err(Error::ClusterTooLarge {
                size: order,
                max: MAX_VACUUM_ORDER,
            });
        }
    }
    Ok(())
}

/// Exact-observable cluster component (no interpolation).
pub fn vacuum_potential(
    config: &Configuration,
    model: &HoppingModel,
    obs: &AnalyticObservable,
    l: usize,
    cluster: &[usize],
) -> Result<f64> {
    check_vacuum(config, cluster.len() + 1)?;
    cluster_component(config, model, obs, l, cluster)
}

/// Vacuum cluster expansion truncated at body order `n` (clusters of at most
/// `n` sites including `ℓ`).
pub fn vacuum_sum(
    config: &Configuration,
    model: &HoppingModel,
    obs: &AnalyticObservable,
    l: usize,
    n: usize,
) -> Result<f64> {
    check_vacuum(config, n)?;
    truncated_cluster_sum(config, model, obs, l, n - 1)
}

/// `j`-th moment of the vacuum measure at body order `n`.
pub fn vacuum_moment(
    config: &Configuration,
    model: &HoppingModel,
    l: usize,
    j: usize,
    n: usize,
) -> Result<f64> {
    check_vacuum(config, n)?;
    let mut coefficients = alloc::vec![0.0; j + 1];
    coefficients[j] = 1.0;
    let monomial = AnalyticObservable::Polynomial { coefficients };
    truncated_cluster_sum(config, model, &monomial, l, n - 1)
}
