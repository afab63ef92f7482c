//! Finite atomic configurations and tight-binding Hamiltonians.
//!
//! Single orbital per site. Hopping is `h(r) = h0 exp(-gamma0 r)` times an
//! optional smooth cutoff, the three-centre term is
//! `t(r1, r2) = t0 exp(-gamma0 (r1 + r2))`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Matrix, Result};

/// Sites closer than this are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteState {
    pub position: Vec<f64>,
    pub onsite_potential: f64,
    pub species: u32,
}

impl SiteState {
    pub fn new(position: Vec<f64>, onsite_potential: f64, species: u32) -> Self {
        SiteState {
            position,
            onsite_potential,
            species,
        }
    }
}

/// Validated, immutable list of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    sites: Vec<SiteState>,
    min_separation: f64,
}

impl Configuration {
    pub fn new(sites: Vec<SiteState>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::invalid("configuration has no sites"));
        }
        let d = sites[0].position.len();
        if !(1..=3).contains(&d) {
            return Err(Error::invalid("positions must have 1, 2 or 3 components"));
        }
        for s in &sites {
            if s.position.len() != d {
                return Err(Error::invalid("all positions must share one dimension"));
            }
            if s.position.iter().any(|x| !x.is_finite()) || !s.onsite_potential.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let mut min_separation = f64::INFINITY;
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                let r = dist(&sites[i].position, &sites[j].position);
                if r < COINCIDENCE_TOL {
                    return Err(Error::CoincidentSites {
                        first: i,
                        second: j,
                        distance: r,
                    });
                }
                min_separation = min_separation.min(r);
            }
        }
        Ok(Configuration {
            sites,
            min_separation,
        })
    }

    /// Builds a configuration from parallel position/potential/species lists.
    pub fn from_parts(
        positions: Vec<Vec<f64>>,
        potentials: Vec<f64>,
        species: Vec<u32>,
    ) -> Result<Self> {
        if positions.len() != potentials.len() || positions.len() != species.len() {
            return Err(Error::invalid("positions, potentials and species differ in length"));
        }
        let sites = positions
            .into_iter()
            .zip(potentials)
            .zip(species)
            .map(|((p, v), z)| SiteState::new(p, v, z))
            .collect();
        Configuration::new(sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SiteState] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> Result<&SiteState> {
        self.sites.get(i).ok_or(Error::SiteOutOfRange {
            index: i,
            len: self.sites.len(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.sites[0].position.len()
    }

    /// Infinite for a single site.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.sites[i].position, &self.sites[j].position)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    pub fn potentials(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.onsite_potential).collect()
    }

    /// Same geometry with replaced on-site potentials.
    pub fn with_potentials(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.len() {
            return Err(Error::invalid("potential list length differs from site count"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut out = self.clone();
        for (s, &x) in out.sites.iter_mut().zip(v) {
            s.onsite_potential = x;
        }
        Ok(out)
    }

    /// Same configuration with one site moved.
    pub fn with_position(&self, i: usize, position: Vec<f64>) -> Result<Self> {
        self.site(i)?;
        let mut sites = self.sites.clone();
        sites[i].position = position;
        Configuration::new(sites)
    }

    fn distance_matrix(&self) -> Matrix {
        let n = self.len();
        Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { self.distance(i, j) })
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Smooth radial factor multiplying the two-centre hopping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    /// 1 below `r_cut - width`, 0 beyond `r_cut`, raised-cosine in between.
    SmoothCutoff { r_cut: f64, width: f64 },
}

impl Modulation {
    fn factor(&self, r: f64) -> (f64, f64) {
        match *self {
            Modulation::SmoothCutoff { r_cut, width } => {
                let r0 = r_cut - width;
                if r <= r0 {
                    (1.0, 0.0)
                } else if r >= r_cut {
                    (0.0, 0.0)
                } else {
                    let s = PI * (r - r0) / width;
                    (0.5 * (1.0 + s.cos()), -0.5 * PI / width * s.sin())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoppingModel {
    pub h0: f64,
    pub gamma0: f64,
    /// Diagonal contribution standing in for `h(0)`.
    pub onsite_shift: f64,
    /// Zero disables the three-centre term.
    pub three_centre_t0: f64,
    pub modulation: Option<Modulation>,
}

impl HoppingModel {
    pub fn two_centre(h0: f64, gamma0: f64) -> Self {
        HoppingModel {
            h0,
            gamma0,
            onsite_shift: 0.0,
            three_centre_t0: 0.0,
            modulation: None,
        }
    }

    pub fn with_three_centre(mut self, t0: f64) -> Self {
        self.three_centre_t0 = t0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::invalid("h0 must be positive"));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::invalid("gamma0 must be positive"));
        }
        if !self.onsite_shift.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(self.three_centre_t0 >= 0.0 && self.three_centre_t0.is_finite()) {
            return Err(Error::invalid("three-centre t0 must be non-negative"));
        }
        if let Some(Modulation::SmoothCutoff { r_cut, width }) = self.modulation {
            if !(width > 0.0 && r_cut >= width) {
                return Err(Error::invalid("cutoff needs 0 < width <= r_cut"));
            }
        }
        Ok(())
    }

    pub fn has_three_centre(&self) -> bool {
        self.three_centre_t0 != 0.0
    }

    /// Two-centre hopping `h(r)`.
    pub fn hop(&self, r: f64) -> f64 {
        let base = self.h0 * (-self.gamma0 * r).exp();
        match &self.modulation {
            None => base,
            Some(m) => base * m.factor(r).0,
        }
    }

    /// `h'(r)`.
    pub fn hop_derivative(&self, r: f64) -> f64 {
        let base = self.h0 * (-self.gamma0 * r).exp();
        match &self.modulation {
            None => -self.gamma0 * base,
            Some(m) => {
                let (f, df) = m.factor(r);
                base * (df - self.gamma0 * f)
            }
        }
    }

    /// Three-centre term `t(r1, r2)`.
    pub fn three_centre(&self, r1: f64, r2: f64) -> f64 {
        self.three_centre_t0 * (-self.gamma0 * (r1 + r2)).exp()
    }

    /// `d t / d r1` (equal to `d t / d r2`).
    fn three_centre_derivative(&self, r1: f64, r2: f64) -> f64 {
        -self.gamma0 * self.three_centre(r1, r2)
    }
}

/// How a Hamiltonian was obtained from its configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Full,
    Restricted { center: usize, subset: Vec<usize> },
    Banded { r_c: f64 },
    Neighborhood { center: usize, r_c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub matrix: Matrix,
    /// Site id of each row, ascending.
    pub site_index: Vec<usize>,
    pub provenance: Provenance,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row holding site `site`, if that site is part of the system.
    pub fn row_of(&self, site: usize) -> Option<usize> {
        self.site_index.binary_search(&site).ok()
    }
}

/// Core assembly over the sites `rows` (ascending). `pair_ok(i, j)` decides
/// whether the two-centre bond between sites `i` and `j` is kept; the
/// three-centre term on entry `(k, m)` sums over third sites `p` in `rows`
/// with `pair_ok(k, p) && pair_ok(m, p)`.
fn assemble_rows(
    config: &Configuration,
    model: &HoppingModel,
    rows: &[usize],
    dmat: &Matrix,
    pair_ok: impl Fn(usize, usize) -> bool,
) -> Matrix {
    let n = rows.len();
    let mut h = Matrix::zeros(n, n);
    let three = model.has_three_centre();
    for a in 0..n {
        let k = rows[a];
        let mut diag = model.onsite_shift + config.sites[k].onsite_potential;
        if three {
            for &p in rows {
                if p != k && pair_ok(k, p) {
                    let r = dmat[(k, p)];
                    diag += model.three_centre(r, r);
                }
            }
        }
        h[(a, a)] = diag;
        for b in a + 1..n {
            let m = rows[b];
            if !pair_ok(k, m) {
                continue;
            }
            let mut v = model.hop(dmat[(k, m)]);
            if three {
                for &p in rows {
                    if p != k && p != m && pair_ok(k, p) && pair_ok(m, p) {
                        v += model.three_centre(dmat[(k, p)], dmat[(m, p)]);
                    }
                }
            }
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}

/// Full Hamiltonian of the configuration.
pub fn assemble(config: &Configuration, model: &HoppingModel) -> Result<Hamiltonian> {
    model.validate()?;
    let rows: Vec<usize> = (0..config.len()).collect();
    let dmat = config.distance_matrix();
    let matrix = assemble_rows(config, model, &rows, &dmat, |_, _| true);
    Ok(Hamiltonian {
        matrix,
        site_index: rows,
        provenance: Provenance::Full,
    })
}

/// Hamiltonian of the isolated cluster `{center} ∪ subset`.
pub fn restrict(
    config: &Configuration,
    model: &HoppingModel,
    center: usize,
    subset: &[usize],
) -> Result<Hamiltonian> {
    model.validate()?;
    config.site(center)?;
    for &k in subset {
        config.site(k)?;
        if k == center {
            return Err(Error::CentreInCluster(center));
        }
    }
    let mut rows: Vec<usize> = subset.to_vec();
    rows.push(center);
    rows.sort_unstable();
    rows.dedup();
    let mut sorted_subset = subset.to_vec();
    sorted_subset.sort_unstable();
    sorted_subset.dedup();
    let dmat = config.distance_matrix();
    let matrix = assemble_rows(config, model, &rows, &dmat, |_, _| true);
    Ok(Hamiltonian {
        matrix,
        site_index: rows,
        provenance: Provenance::Restricted {
            center,
            subset: sorted_subset,
        },
    })
}

/// Banded approximation: bonds longer than `r_c` are dropped, and
/// three-centre terms need both legs within `r_c`.
pub fn banded(config: &Configuration, model: &HoppingModel, r_c: f64) -> Result<Hamiltonian> {
    if !(r_c > 0.0) {
        return Err(Error::invalid("cutoff radius must be positive"));
    }
    model.validate()?;
    let rows: Vec<usize> = (0..config.len()).collect();
    let dmat = config.distance_matrix();
    let matrix = assemble_rows(config, model, &rows, &dmat, |i, j| dmat[(i, j)] <= r_c);
    Ok(Hamiltonian {
        matrix,
        site_index: rows,
        provenance: Provenance::Banded { r_c },
    })
}

/// Cluster of all sites within `r_c` of `center`.
pub fn neighborhood_truncate(
    config: &Configuration,
    model: &HoppingModel,
    center: usize,
    r_c: f64,
) -> Result<Hamiltonian> {
    if !(r_c > 0.0) {
        return Err(Error::invalid("cutoff radius must be positive"));
    }
    config.site(center)?;
    let subset: Vec<usize> = (0..config.len())
        .filter(|&k| k != center && config.distance(center, k) <= r_c)
        .collect();
    let mut h = restrict(config, model, center, &subset)?;
    h.provenance = Provenance::Neighborhood { center, r_c };
    Ok(h)
}

/// Linear chain along x with the on-site pattern tiled over the sites.
pub fn make_chain(n: usize, spacing: f64, onsite_pattern: &[f64]) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::invalid("chain needs at least one site"));
    }
    if !(spacing > 0.0) {
        return Err(Error::invalid("spacing must be positive"));
    }
    let pattern: &[f64] = if onsite_pattern.is_empty() {
        &[0.0]
    } else {
        onsite_pattern
    };
    let sites = (0..n)
        .map(|i| SiteState::new(vec![i as f64 * spacing], pattern[i % pattern.len()], 0))
        .collect();
    Configuration::new(sites)
}

/// Pattern chain with the potential at `defect_site` overridden (species 1).
pub fn make_defect_chain(
    n: usize,
    spacing: f64,
    onsite_pattern: &[f64],
    defect_site: usize,
    defect_potential: f64,
) -> Result<Configuration> {
    if defect_site >= n {
        return Err(Error::SiteOutOfRange {
            index: defect_site,
            len: n,
        });
    }
    let mut sites = make_chain(n, spacing, onsite_pattern)?.sites;
    sites[defect_site].onsite_potential = defect_potential;
    sites[defect_site].species = 1;
    Configuration::new(sites)
}

/// Parameter of a site that a derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteComponent {
    /// Cartesian coordinate `axis` of the position.
    Position(usize),
    /// On-site potential.
    Potential,
}

/// `dH / d u_m` for the full Hamiltonian, assembled from the radial
/// derivatives of the model.
pub fn hamiltonian_derivative(
    config: &Configuration,
    model: &HoppingModel,
    m: usize,
    component: SiteComponent,
) -> Result<Matrix> {
    model.validate()?;
    config.site(m)?;
    let n = config.len();
    let mut dh = Matrix::zeros(n, n);
    let axis = match component {
        SiteComponent::Potential => {
            dh[(m, m)] = 1.0;
            return Ok(dh);
        }
        SiteComponent::Position(axis) => axis,
    };
    if axis >= config.dimension() {
        return Err(Error::invalid("coordinate axis exceeds the dimension"));
    }
    let dmat = config.distance_matrix();
    let x = |i: usize| config.sites[i].position[axis];
    // d r_ab / d x_{m,axis}
    let dr = |a: usize, b: usize| -> f64 {
        if a == b {
            0.0
        } else if a == m {
            (x(m) - x(b)) / dmat[(a, b)]
        } else if b == m {
            (x(m) - x(a)) / dmat[(a, b)]
        } else {
            0.0
        }
    };
    for k in 0..n {
        if k != m {
            let v = model.hop_derivative(dmat[(k, m)]) * dr(k, m);
            dh[(k, m)] = v;
            dh[(m, k)] = v;
        }
    }
    if model.has_three_centre() {
        for a in 0..n {
            for b in a..n {
                let thirds: Vec<usize> = if a == m || b == m {
                    (0..n).collect()
                } else {
                    vec![m]
                };
                let mut acc = 0.0;
                for p in thirds {
                    if p == a || p == b {
                        continue;
                    }
                    let (r1, r2) = (dmat[(a, p)], dmat[(b, p)]);
                    let dt = model.three_centre_derivative(r1, r2);
                    acc += dt * (dr(a, p) + dr(b, p));
                }
                dh[(a, b)] += acc;
                if a != b {
                    dh[(b, a)] += acc;
                }
            }
        }
    }
    Ok(dh)
}
