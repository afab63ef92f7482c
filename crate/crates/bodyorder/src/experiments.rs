//! Experiment drivers behind the CLI subcommands. Each returns a [`Table`];
//! sweep points are evaluated in parallel and collected in sweep order.

use bodyorder_core::approx_linear::chebyshev::{
    bernstein_rho, cheb_project, gershgorin_bounds, kpm_estimate_scaled, ChebSeries,
    DampingKernel, DampingKind, SpectralScaling, KPM_PADDING,
};
use bodyorder_core::approx_linear::cluster::{vacuum_sum, MAX_VACUUM_ORDER, MAX_VACUUM_SITES};
use bodyorder_core::approx_linear::interp::{interp_build, matrix_interpolant, Interpolant};
use bodyorder_core::approx_nonlinear::{cf_resolvent, lanczos, theta, Terminator};
use bodyorder_core::lattice::{
    self, make_chain, make_defect_chain, Configuration, HoppingModel, Modulation,
};
use bodyorder_core::potential_theory::{
    asymptotic_rate, capacity, equilibrium_cdf, fejer_points_from_cdf, green_value, leja_points,
    parse_interval_set, solve_gap_params, GreenParams, IntervalSet,
};
use bodyorder_core::ratefit::{fit_rate, ErrorCurve, WindowPolicy};
use bodyorder_core::scf::{
    convergence_order, damped_fixed_point, newton_scf, Approximation, EffectivePotentialSpec,
    ScfProblem,
};
use bodyorder_core::spectral::{
    eig, local_observable, potential_response, summarize_spectrum,
    AnalyticObservable, EigenDecomposition, ScalarFunction,
};
use bodyorder_core::{Complex64, Error};
use rayon::prelude::*;

use crate::config::{
    ExperimentConfig, KernelKind, ObservableKind, SchemeKind, SolverKind, SystemConfig,
    SystemKind, TerminatorKind,
};
use crate::error::{CliError, CliResult};
use crate::formats::{read_configuration_json, Cell, Table};

/// Default node count for commands that use a fixed interpolation set.
pub const DEFAULT_FIXED_NODES: usize = 40;
/// Real-axis samples of the Green's function in `nodes` output.
pub const GREEN_SAMPLES: usize = 201;

fn config_err(context: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{context}: {e}"))
}

/// System plus its defect-free reference.
pub struct System {
    pub config: Configuration,
    pub reference: Configuration,
    pub center: usize,
}

pub fn build_system(sys: &SystemConfig) -> CliResult<System> {
    let (config, reference) = match sys.kind {
        SystemKind::Chain => {
            let c = make_chain(sys.length.unwrap_or(0), sys.spacing, &sys.pattern)
                .map_err(config_err("system"))?;
            (c.clone(), c)
        }
        SystemKind::DefectChain => {
            let n = sys.length.unwrap_or(0);
            let c = make_defect_chain(
                n,
                sys.spacing,
                &sys.pattern,
                sys.defect_site.unwrap_or(0),
                sys.defect_potential.unwrap_or(0.0),
            )
            .map_err(config_err("system"))?;
            let r = make_chain(n, sys.spacing, &sys.pattern).map_err(config_err("system"))?;
            (c, r)
        }
        SystemKind::File => {
            let path = sys.path.as_deref().unwrap_or_default();
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::Config(format!("system.path `{path}`: {e}")))?;
            let c = read_configuration_json(std::io::BufReader::new(file))?;
            (c.clone(), c)
        }
    };
    let center = sys.center.unwrap_or(config.len() / 2);
    if center >= config.len() {
        return Err(CliError::config(format!(
            "system.center: {center} out of range for {} sites",
            config.len()
        )));
    }
    Ok(System {
        config,
        reference,
        center,
    })
}

pub fn build_model(cfg: &ExperimentConfig) -> CliResult<HoppingModel> {
    let m = &cfg.model;
    let model = HoppingModel {
        h0: m.h0,
        gamma0: m.gamma0,
        onsite_shift: m.onsite_shift,
        three_centre_t0: m.t0,
        modulation: m.cutoff.map(|c| Modulation::SmoothCutoff {
            r_cut: c.r_cut,
            width: c.width,
        }),
    };
    model.validate().map_err(config_err("model"))?;
    Ok(model)
}

pub fn build_observable(cfg: &ExperimentConfig) -> CliResult<AnalyticObservable> {
    let o = &cfg.observable;
    let obs = match o.kind {
        ObservableKind::FermiDirac => AnalyticObservable::FermiDirac { beta: o.beta, mu: o.mu },
        ObservableKind::GrandPotential => AnalyticObservable::GrandPotential { beta: o.beta, mu: o.mu },
    };
    obs.validate().map_err(config_err("observable"))?;
    Ok(obs)
}

/// Everything an experiment needs, built once.
struct Context {
    system: Option<System>,
    model: HoppingModel,
    observable: AnalyticObservable,
}

impl Context {
    fn new(cfg: &ExperimentConfig) -> CliResult<Self> {
        let system = cfg.system.as_ref().map(build_system).transpose()?;
        Ok(Context {
            system,
            model: build_model(cfg)?,
            observable: build_observable(cfg)?,
        })
    }

    fn system(&self, command: &str) -> CliResult<&System> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::config(format!("{command}: a [system] block is required")))
    }

    fn decomposition(&self, sys: &System) -> CliResult<EigenDecomposition> {
        Ok(eig(&lattice::assemble(&sys.config, &self.model)?)?)
    }
}

fn merge(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Interval sets used by node-based schemes: the configured one, or the
/// padded bands of the reference spectrum plus padded defect states. The
/// second entry is the defect-free set when it differs.
struct Domains {
    set: IntervalSet,
    defect_free: Option<IntervalSet>,
}

fn resolve_domains(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<Domains> {
    if let Some(text) = &cfg.scheme.intervals {
        let set = parse_interval_set(text).map_err(config_err("scheme.intervals"))?;
        return Ok(Domains {
            set,
            defect_free: None,
        });
    }
    let sys = ctx.system("scheme.intervals absent")?;
    let ed = ctx.decomposition(sys)?;
    let ed_ref = eig(&lattice::assemble(&sys.reference, &ctx.model)?)?;
    let mu = match ctx.observable {
        AnalyticObservable::FermiDirac { mu, .. } | AnalyticObservable::GrandPotential { mu, .. } => mu,
        _ => 0.0,
    };
    let pad = cfg.scheme.pad;
    let summary = summarize_spectrum(&ed_ref, &ed, mu, pad)?;
    let bands = vec![summary.i_minus, summary.i_plus];
    let half = pad.max(1e-6);
    let mut all = bands.clone();
    all.extend(summary.defect_eigenvalues.iter().map(|&x| (x - half, x + half)));
    let set = IntervalSet::from_intervals(&merge(all))?;
    let defect_free = if summary.defect_eigenvalues.is_empty() {
        None
    } else {
        Some(IntervalSet::from_intervals(&merge(bands))?)
    };
    Ok(Domains { set, defect_free })
}

/// Samples of `E`, spread over the intervals in proportion to their length.
pub fn grid_on(set: &IntervalSet, points: usize) -> Vec<f64> {
    let length = set.total_length();
    let mut grid = Vec::with_capacity(points + 2 * set.interval_count());
    for (a, b) in set.intervals() {
        let count = ((b - a) / length * points as f64).round().max(2.0) as usize;
        grid.extend((0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64));
    }
    grid
}

fn uniform_grid(interval: (f64, f64), points: usize) -> Vec<f64> {
    let (a, b) = interval;
    (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect()
}

fn sup_diff<F: ScalarFunction + ?Sized>(
    approx: impl Fn(f64) -> f64,
    f: &F,
    grid: &[f64],
) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for &x in grid {
        worst = worst.max((approx(x) - f.value(x)?).abs());
    }
    Ok(worst)
}

enum NodeFamily {
    Fejer(Box<bodyorder_core::potential_theory::EquilibriumCdf>),
    Leja(Vec<f64>),
}

impl NodeFamily {
    fn new(kind: SchemeKind, params: &GreenParams, max_points: usize, leja_grid: usize) -> CliResult<Self> {
        match kind {
            SchemeKind::Fejer => Ok(NodeFamily::Fejer(Box::new(equilibrium_cdf(params)))),
            SchemeKind::Leja => Ok(NodeFamily::Leja(leja_points(
                params,
                max_points.max(1),
                leja_grid.max(max_points),
            )?)),
            _ => Err(CliError::config("scheme.kind: expected fejer or leja")),
        }
    }

    fn points(&self, n: usize) -> CliResult<Vec<f64>> {
        match self {
            NodeFamily::Fejer(cdf) => Ok(fejer_points_from_cdf(cdf, n)?),
            NodeFamily::Leja(all) => Ok(all[..n].to_vec()),
        }
    }
}

fn rate_so_far(params: &[f64], errors: &[f64]) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            ErrorCurve::new(params[..=i].to_vec(), errors[..=i].to_vec())
                .ok()
                .and_then(|c| fit_rate(&c, WindowPolicy::All).ok())
                .map_or(f64::NAN, |f| f.rate())
        })
        .collect()
}

fn fit_note(table: &mut Table, prefix: &str, x: &[f64], y: &[f64]) {
    let fit = ErrorCurve::new(x.to_vec(), y.to_vec())
        .ok()
        .and_then(|c| fit_rate(&c, WindowPolicy::All).ok());
    if let Some(f) = fit {
        table.note_float(&format!("{prefix}_rate"), f.rate());
        table.note_float(&format!("{prefix}_r2"), f.r2);
    }
}

/// Convergence sweep in the polynomial degree (or Lanczos level for `bop`,
/// body order for `vacuum`).
pub fn run_converge(cfg: &ExperimentConfig) -> CliResult<Table> {
    let ctx = Context::new(cfg)?;
    match cfg.scheme.kind {
        SchemeKind::Fejer | SchemeKind::Leja => converge_nodes(cfg, &ctx),
        SchemeKind::Chebyshev | SchemeKind::Kpm => converge_chebyshev(cfg, &ctx),
        SchemeKind::Bop => converge_bop(cfg, &ctx),
        SchemeKind::Vacuum => run_vacuum(cfg),
        SchemeKind::Exact => Err(CliError::config("scheme.kind: `exact` has nothing to converge")),
    }
}

struct Exact {
    ed: EigenDecomposition,
    value: f64,
    center: usize,
}

fn exact_reference(ctx: &Context) -> CliResult<Option<Exact>> {
    match &ctx.system {
        None => Ok(None),
        Some(sys) => {
            let ed = ctx.decomposition(sys)?;
            let value = local_observable(&ed, &ctx.observable, sys.center)?;
            Ok(Some(Exact {
                ed,
                value,
                center: sys.center,
            }))
        }
    }
}

fn finish_converge(table: &mut Table, params: &[f64], sup: &[f64], local: &[f64]) {
    let main: Vec<f64> = sup
        .iter()
        .zip(local)
        .map(|(&s, &l)| if s.is_finite() { s } else { l })
        .collect();
    let rates = rate_so_far(params, &main);
    for i in 0..params.len() {
        table.rows.push(vec![
            Cell::Int(params[i] as i64),
            Cell::Float(sup[i]),
            Cell::Float(local[i]),
            Cell::Float(rates[i]),
        ]);
    }
}

fn converge_nodes(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<Table> {
    let degrees = cfg.sweep.integer_points("degree")?;
    let domains = resolve_domains(cfg, ctx)?;
    let params = solve_gap_params(&domains.set)?;
    let obs = &ctx.observable;
    let mut table = Table::new(&["degree", "sup_error", "local_error", "measured_rate"]);
    table.note("scheme", format!("{:?}", cfg.scheme.kind).to_lowercase());
    table.note("intervals", &domains.set);
    if let Ok(g) = asymptotic_rate(&params, obs) {
        table.note_float("predicted_rate", g);
    }
    if let Some(free) = &domains.defect_free {
        table.note("intervals_defect_free", free);
        if let Ok(g) = asymptotic_rate(&solve_gap_params(free)?, obs) {
            table.note_float("predicted_rate_defect_free", g);
        }
    }
    let max_points = degrees.iter().max().copied().unwrap_or(0) + 1;
    let family = NodeFamily::new(cfg.scheme.kind, &params, max_points, cfg.scheme.leja_grid)?;
    let grid = grid_on(&domains.set, cfg.scheme.grid_points);
    let exact = exact_reference(ctx)?;
    let results: Vec<(f64, f64)> = degrees
        .par_iter()
        .map(|&n| -> CliResult<(f64, f64)> {
            let set = interp_build(&family.points(n + 1)?)?;
            let p = Interpolant::new(&set, obs)?;
            let sup = sup_diff(|x| p.eval(x), obs, &grid)?;
            let local = match &exact {
                Some(e) => (matrix_interpolant(&e.ed, &set, obs, e.center)? - e.value).abs(),
                None => f64::NAN,
            };
            Ok((sup, local))
        })
        .collect::<CliResult<_>>()?;
    let (sup, local): (Vec<f64>, Vec<f64>) = results.into_iter().unzip();
    let params: Vec<f64> = degrees.iter().map(|&n| n as f64).collect();
    finish_converge(&mut table, &params, &sup, &local);
    Ok(table)
}

fn damping(kind: KernelKind, order: usize) -> DampingKernel {
    let kind = match kind {
        KernelKind::None => DampingKind::None,
        KernelKind::Fejer => DampingKind::Fejer,
        KernelKind::Jackson => DampingKind::Jackson,
    };
    DampingKernel::new(kind, order)
}

fn converge_chebyshev(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<Table> {
    let degrees = cfg.sweep.integer_points("degree")?;
    let exact = exact_reference(ctx)?;
    let scaling = match (&cfg.scheme.intervals, &ctx.system) {
        (Some(text), _) => {
            let set = parse_interval_set(text).map_err(config_err("scheme.intervals"))?;
            SpectralScaling::from_bounds(set.min(), set.max(), 0.0)
        }
        (None, Some(sys)) => {
            let h = lattice::assemble(&sys.config, &ctx.model)?;
            let (lo, hi) = gershgorin_bounds(&h.matrix);
            SpectralScaling::from_bounds(lo, hi, KPM_PADDING)
        }
        (None, None) => {
            return Err(CliError::config("chebyshev: need scheme.intervals or a [system] block"))
        }
    };
    let interval = scaling.interval();
    let obs = &ctx.observable;
    let kpm = cfg.scheme.kind == SchemeKind::Kpm;
    let mut table = Table::new(&["degree", "sup_error", "local_error", "measured_rate"]);
    table.note("scheme", if kpm { "kpm" } else { "chebyshev" });
    if kpm {
        table.note("kernel", format!("{:?}", cfg.scheme.kernel).to_lowercase());
    }
    table.note("interval", format!("[{},{}]", interval.0, interval.1));
    if let Some(anchor) = obs.singularity_anchor() {
        let rho = bernstein_rho(anchor, interval)?;
        table.note_float("bernstein_rho", rho);
        table.note_float("predicted_rate", rho.ln());
    }
    let grid = uniform_grid(interval, cfg.scheme.grid_points);
    let h = exact
        .as_ref()
        .map(|_| lattice::assemble(&ctx.system.as_ref().expect("exact implies system").config, &ctx.model))
        .transpose()?;
    let results: Vec<(f64, f64)> = degrees
        .par_iter()
        .map(|&n| -> CliResult<(f64, f64)> {
            let mut series: ChebSeries = cheb_project(obs, n, interval)?;
            let kernel = damping(cfg.scheme.kernel, n);
            if kpm {
                for (k, c) in series.coefficients.iter_mut().enumerate() {
                    *c *= kernel.coefficient(k);
                }
            }
            let sup = sup_diff(|x| series.eval(x), obs, &grid)?;
            let local = match (&exact, &h) {
                (Some(e), Some(h)) => {
                    let approx = if kpm {
                        kpm_estimate_scaled(&h.matrix, e.center, obs, n, kernel, scaling)?
                    } else {
                        e.ed.eigenvalues
                            .iter()
                            .zip(e.ed.local_weights(e.center))
                            .map(|(&x, w)| w * series.eval(x))
                            .sum()
                    };
                    (approx - e.value).abs()
                }
                _ => f64::NAN,
            };
            Ok((sup, local))
        })
        .collect::<CliResult<_>>()?;
    let (sup, local): (Vec<f64>, Vec<f64>) = results.into_iter().unzip();
    let params: Vec<f64> = degrees.iter().map(|&n| n as f64).collect();
    finish_converge(&mut table, &params, &sup, &local);
    Ok(table)
}

fn converge_bop(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<Table> {
    let levels = cfg.sweep.integer_points("level")?;
    let sys = ctx.system("bop")?;
    let n = sys.config.len();
    let k_max = levels.iter().max().copied().unwrap_or(0);
    if k_max + 1 > n {
        return Err(CliError::config(format!(
            "sweep: level {k_max} needs at least {} sites, system has {n}",
            k_max + 1
        )));
    }
    let obs = &ctx.observable;
    let h = lattice::assemble(&sys.config, &ctx.model)?;
    let ed = eig(&h)?;
    let exact = local_observable(&ed, obs, sys.center)?;
    let jacobi = lanczos(&h.matrix, sys.center, k_max)?;
    let anchor = obs.singularity_anchor().unwrap_or(Complex64::new(0.0, 0.0));
    let z0 = Complex64::new(anchor.re, anchor.im.max(1e-2));
    let weights = ed.local_weights(sys.center);
    let g_exact: Complex64 = ed
        .eigenvalues
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w / (z0 - x))
        .sum();

    let mut table = Table::new(&["level", "sup_error", "local_error", "measured_rate", "resolvent_error"]);
    table.note("scheme", "bop");
    table.note("terminator", format!("{:?}", cfg.scheme.terminator).to_lowercase());
    table.note("moments_per_level", "level K reproduces moments 0..2K+1");
    let domains = resolve_domains(cfg, ctx)?;
    // rates per Lanczos level are twice the per-degree rates
    if let Ok(g) = asymptotic_rate(&solve_gap_params(&domains.set)?, obs) {
        table.note_float("predicted_rate_defect", 2.0 * g);
    }
    let free = domains.defect_free.as_ref().unwrap_or(&domains.set);
    if let Ok(g) = asymptotic_rate(&solve_gap_params(free)?, obs) {
        table.note_float("predicted_rate_defect_free", 2.0 * g);
    }

    let mut local = Vec::with_capacity(levels.len());
    let mut resolvent = Vec::with_capacity(levels.len());
    for &k in &levels {
        let j = jacobi.truncate(k);
        local.push((theta(&j, obs)? - exact).abs());
        let term = match cfg.scheme.terminator {
            TerminatorKind::Vacuum => Terminator::Vacuum,
            TerminatorKind::SquareRoot if j.b().is_empty() => Terminator::Vacuum,
            TerminatorKind::SquareRoot => Terminator::square_root_from(&j)?,
        };
        resolvent.push((cf_resolvent(&j, z0, term)? - g_exact).norm());
    }
    let params: Vec<f64> = levels.iter().map(|&k| k as f64).collect();
    let rates = rate_so_far(&params, &local);
    for i in 0..levels.len() {
        table.rows.push(vec![
            Cell::Int(levels[i] as i64),
            Cell::Float(f64::NAN),
            Cell::Float(local[i]),
            Cell::Float(rates[i]),
            Cell::Float(resolvent[i]),
        ]);
    }
    Ok(table)
}

/// Observable error of both truncation operators against the full system.
pub fn run_truncation(cfg: &ExperimentConfig) -> CliResult<Table> {
    let radii = cfg.sweep.points()?;
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(CliError::config("sweep: cutoff radii must be positive"));
    }
    let ctx = Context::new(cfg)?;
    let sys = ctx.system("truncate")?;
    let obs = &ctx.observable;
    let exact = local_observable(&ctx.decomposition(sys)?, obs, sys.center)?;
    let rows: Vec<(f64, f64, usize)> = radii
        .par_iter()
        .map(|&r_c| -> CliResult<(f64, f64, usize)> {
            let hb = lattice::banded(&sys.config, &ctx.model, r_c)?;
            let row = hb.row_of(sys.center).expect("banded keeps every site");
            let banded = local_observable(&eig(&hb)?, obs, row)?;
            let hn = lattice::neighborhood_truncate(&sys.config, &ctx.model, sys.center, r_c)?;
            let row = hn.row_of(sys.center).expect("neighbourhood keeps its centre");
            let nbh = local_observable(&eig(&hn)?, obs, row)?;
            Ok(((banded - exact).abs(), (nbh - exact).abs(), hn.dim()))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&["r_c", "banded_error", "neighborhood_error", "neighborhood_sites"]);
    table.note_float("exact_value", exact);
    let banded: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let nbh: Vec<f64> = rows.iter().map(|r| r.1).collect();
    fit_note(&mut table, "banded_decay", &radii, &banded);
    fit_note(&mut table, "neighborhood_decay", &radii, &nbh);
    for (r, row) in radii.iter().zip(rows) {
        table.rows.push(vec![
            Cell::Float(*r),
            Cell::Float(row.0),
            Cell::Float(row.1),
            Cell::Int(row.2 as i64),
        ]);
    }
    Ok(table)
}

enum LocalFunction {
    Exact(AnalyticObservable),
    Interpolated(Interpolant),
}

fn fixed_approximant(cfg: &ExperimentConfig, ctx: &Context) -> CliResult<(LocalFunction, Option<IntervalSet>)> {
    match cfg.scheme.kind {
        SchemeKind::Exact => Ok((LocalFunction::Exact(ctx.observable.clone()), None)),
        SchemeKind::Fejer | SchemeKind::Leja => {
            let n = cfg.scheme.nodes.unwrap_or(DEFAULT_FIXED_NODES);
            if n == 0 {
                return Err(CliError::config("scheme.nodes: must be positive"));
            }
            let domains = resolve_domains(cfg, ctx)?;
            let params = solve_gap_params(&domains.set)?;
            let family = NodeFamily::new(cfg.scheme.kind, &params, n, cfg.scheme.leja_grid)?;
            let set = interp_build(&family.points(n)?)?;
            let p = Interpolant::new(&set, &ctx.observable)?;
            Ok((LocalFunction::Interpolated(p), Some(domains.set)))
        }
        _ => Err(CliError::config("scheme.kind: expected exact, fejer or leja")),
    }
}

/// `|∂ O_ℓ / ∂ v_m|` against the distance `r_ℓm`.
pub fn run_locality(cfg: &ExperimentConfig) -> CliResult<Table> {
    let offsets = cfg.sweep.integer_points("offset")?;
    let ctx = Context::new(cfg)?;
    let sys = ctx.system("locality")?;
    let (f, _) = fixed_approximant(cfg, &ctx)?;
    let ed = ctx.decomposition(sys)?;
    let response = match &f {
        LocalFunction::Exact(obs) => potential_response(&ed, obs)?,
        LocalFunction::Interpolated(p) => potential_response(&ed, p)?,
    };
    let mut table = Table::new(&["offset", "site", "distance", "derivative_abs"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &k in &offsets {
        let m = sys.center + k;
        if m >= sys.config.len() {
            return Err(CliError::config(format!(
                "sweep: offset {k} leaves the system ({} sites, centre {})",
                sys.config.len(),
                sys.center
            )));
        }
        let d = response[(sys.center, m)].abs();
        let r = sys.config.distance(sys.center, m);
        if k > 0 {
            xs.push(r);
            ys.push(d);
        }
        table.rows.push(vec![
            Cell::Int(k as i64),
            Cell::Int(m as i64),
            Cell::Float(r),
            Cell::Float(d),
        ]);
    }
    fit_note(&mut table, "decay", &xs, &ys);
    Ok(table)
}

/// Self-consistent solve; one row per iterate.
pub fn run_scf(cfg: &ExperimentConfig) -> CliResult<Table> {
    let scf = cfg
        .scf
        .as_ref()
        .ok_or_else(|| CliError::config("scf: an [scf] block is required"))?;
    let ctx = Context::new(cfg)?;
    let sys = ctx.system("scf")?;
    if !matches!(ctx.observable, AnalyticObservable::FermiDirac { .. }) {
        return Err(CliError::config("observable.kind: scf needs fermi_dirac"));
    }
    let n = sys.config.len();
    let approximation = match fixed_approximant(cfg, &ctx)? {
        (LocalFunction::Exact(_), _) => Approximation::Exact,
        (LocalFunction::Interpolated(p), _) => Approximation::Interpolated(p.set().clone()),
    };
    let problem = ScfProblem {
        spec: EffectivePotentialSpec {
            onsite: scf.onsite,
            yukawa_strength: scf.yukawa_strength,
            yukawa_tau: scf.yukawa_tau,
            reference_charges: vec![scf.reference_charge; n],
        },
        config: sys.config.clone(),
        model: ctx.model.clone(),
        observable: ctx.observable.clone(),
        approximation,
    };
    let rho0 = vec![scf.initial_density; n];
    let solution = match scf.solver {
        SolverKind::Newton => newton_scf(&problem, &rho0, scf.tol, scf.max_iter)?,
        SolverKind::Mixing => damped_fixed_point(&problem, &rho0, scf.alpha, scf.tol, scf.max_iter)?,
    };
    let mut table = Table::new(&["iteration", "residual_inf"]);
    table.note("solver", format!("{:?}", scf.solver).to_lowercase());
    table.note("iterations", solution.iterations());
    if let Some(p) = convergence_order(&solution.history, 1e-13, 1.0) {
        table.note_float("convergence_order", p);
    }
    table.note_float("density_center", solution.rho[sys.center]);
    for (i, r) in solution.history.iter().enumerate() {
        table.rows.push(vec![Cell::Int(i as i64), Cell::Float(*r)]);
    }
    Ok(table)
}

/// Node sets for each sweep value, followed by real-axis samples of the
/// Green's function.
pub fn run_nodes(cfg: &ExperimentConfig) -> CliResult<Table> {
    let counts = cfg.sweep.integer_points("node count")?;
    if counts.contains(&0) {
        return Err(CliError::config("sweep: node counts must be positive"));
    }
    let ctx = Context::new(cfg)?;
    let domains = resolve_domains(cfg, &ctx)?;
    let params = solve_gap_params(&domains.set)?;
    let max = counts.iter().max().copied().unwrap_or(1);
    let family = NodeFamily::new(cfg.scheme.kind, &params, max, cfg.scheme.leja_grid)?;
    let cdf = equilibrium_cdf(&params);
    let mut table = Table::new(&["kind", "n", "index", "x", "value"]);
    table.note("intervals", &domains.set);
    table.note_float("capacity", capacity(&params));
    if let Ok(g) = asymptotic_rate(&params, &ctx.observable) {
        table.note_float("predicted_rate", g);
    }
    for &n in &counts {
        for (j, x) in family.points(n)?.into_iter().enumerate() {
            table.rows.push(vec![
                Cell::Text("node".into()),
                Cell::Int(n as i64),
                Cell::Int(j as i64),
                Cell::Float(x),
                Cell::Float(cdf.cdf(x)),
            ]);
        }
    }
    let (lo, hi) = (domains.set.min(), domains.set.max());
    let margin = 0.25 * (hi - lo);
    for (i, x) in uniform_grid((lo - margin, hi + margin), GREEN_SAMPLES).into_iter().enumerate() {
        table.rows.push(vec![
            Cell::Text("green".into()),
            Cell::Int(0),
            Cell::Int(i as i64),
            Cell::Float(x),
            Cell::Float(green_value(&params, Complex64::new(x, 0.0))),
        ]);
    }
    Ok(table)
}

/// Vacuum cluster expansion of the local observable by body order.
pub fn run_vacuum(cfg: &ExperimentConfig) -> CliResult<Table> {
    let orders = cfg.sweep.integer_points("body order")?;
    let ctx = Context::new(cfg)?;
    let sys = ctx.system("vacuum")?;
    let n = sys.config.len();
    if n > MAX_VACUUM_SITES {
        return Err(CliError::config(format!(
            "system: vacuum expansion supports at most {MAX_VACUUM_SITES} sites, got {n}"
        )));
    }
    if let Some(&bad) = orders.iter().find(|&&o| o == 0 || o > MAX_VACUUM_ORDER.max(n.min(MAX_VACUUM_ORDER))) {
        return Err(CliError::config(format!(
            "sweep: body orders must lie in 1..={}, got {bad}",
            MAX_VACUUM_ORDER.min(n)
        )));
    }
    let obs = &ctx.observable;
    let exact = local_observable(&ctx.decomposition(sys)?, obs, sys.center)?;
    let values: Vec<f64> = orders
        .par_iter()
        .map(|&o| vacuum_sum(&sys.config, &ctx.model, obs, sys.center, o).map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&["order", "vacuum_value", "exact_value", "abs_error"]);
    for (o, v) in orders.iter().zip(values) {
        table.rows.push(vec![
            Cell::Int(*o as i64),
            Cell::Float(v),
            Cell::Float(exact),
            Cell::Float((v - exact).abs()),
        ]);
    }
    Ok(table)
}

/// Exact local observable of the configured system, used by tests and the
/// acceptance harness.
pub fn exact_local(cfg: &ExperimentConfig) -> CliResult<f64> {
    let ctx = Context::new(cfg)?;
    let sys = ctx.system("exact")?;
    let ed = ctx.decomposition(sys)?;
    Ok(local_observable(&ed, &ctx.observable, sys.center)?)
}

/// Subcommands that produce a table.
pub const COMMANDS: &[&str] = &["converge", "truncate", "locality", "scf", "nodes", "vacuum"];

pub fn run(command: &str, cfg: &ExperimentConfig) -> CliResult<Table> {
    match command {
        "converge" => run_converge(cfg),
        "truncate" => run_truncation(cfg),
        "locality" => run_locality(cfg),
        "scf" => run_scf(cfg),
        "nodes" => run_nodes(cfg),
        "vacuum" => run_vacuum(cfg),
        other => Err(CliError::config(format!("unknown command `{other}`"))),
    }
}
