//! One runner per experiment kind.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{require_family, require_single, ExperimentConfig, ExperimentKind};
use super::result::{Check, Summary, SweepResult, CLASS_NAMES};
use crate::conifold_model::{neck_convergence_check, presets, ConifoldModel, Cutoff, GluedFamily};
use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;
use crate::numerics::fit_line;
use crate::spectral_laplace::{
    invertibility_constant, near_null_threshold, poincare_constant, restricted_invertibility_compact,
    weight_crossing_kernel, CompactOptions, SolverOptions,
};
use crate::weight_calculus::{classify_weight_region, ConifoldKind, DEFAULT_TOL};
use crate::weighted_calc::{
    bump_family, embedding_constant_estimate, gns_constant_estimate, holder_check, member_centre_x, random_bumps,
    rescaling_invariance_check, BetaChoice, FamilyOptions, GridOptions, ModeFunction, RadialGrid, WeightSpec,
};

/// Default `|log t|` values of the asymptotic cutoff sweep.
pub const DEEP_LOG_T: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

/// Samples per cutoff transition when maximising derivatives.
const ETA_SAMPLES: usize = 20_000;

/// Runs one experiment; relative model paths resolve against `base`.
pub fn run(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::EmbeddingUniformity => sobolev_sweep(cfg, base, false),
        ExperimentKind::GnsUniformity => sobolev_sweep(cfg, base, true),
        ExperimentKind::InvertibilityUniformity => invertibility_sweep(cfg, base),
        ExperimentKind::PoincareUniformity => poincare_sweep(cfg, base),
        ExperimentKind::CompactInvertibility => compact_sweep(cfg, base),
        ExperimentKind::NeckConvergence => neck_sweep(cfg, base),
        ExperimentKind::EtaBounds => eta_bounds(cfg),
        ExperimentKind::WeightCrossing => weight_crossing(cfg, base),
        ExperimentKind::RegionAtlas => {
            let a = &cfg.atlas;
            let mut r = region_atlas(a.kind, &Link::parse_spec(&a.link)?, a.m, a.step, a.range)?;
            r.label = cfg.label();
            r.seed = cfg.seed;
            Ok(r)
        }
        ExperimentKind::NormIdentities => norm_identities(cfg),
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions {
        grid: grid_options(cfg),
        max_eigenvalue: cfg.max_eigenvalue,
        seed: cfg.seed,
        ..SolverOptions::default()
    }
}

fn grid_options(cfg: &ExperimentConfig) -> GridOptions {
    GridOptions { per_region: cfg.grid, ..GridOptions::default() }
}

fn family_of(cfg: &ExperimentConfig, base: &Path) -> Result<GluedFamily> {
    let mut f = require_family(cfg.model_source(base)?, cfg.experiment.name())?;
    f.t_list = cfg.t_list.clone();
    Ok(f)
}

/// Evaluates `f` on every member of the family in parallel; rows come back sorted by `t` descending.
fn per_member<F>(family: &GluedFamily, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &ConifoldModel) -> Result<Vec<f64>> + Sync,
{
    let mut rows: Vec<Vec<f64>> = family
        .t_list
        .par_iter()
        .map(|&t| {
            let member = family.member(t).map_err(|e| e.at_t(t))?;
            let mut row = vec![t];
            row.extend(f(t, &member).map_err(|e| e.at_t(t))?);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b[0].total_cmp(&a[0]));
    Ok(rows)
}

/// `max / min` of `values` and the slope of `log value` against `log t`.
fn uniformity(ts: &[f64], values: &[f64]) -> (f64, f64) {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope = if ts.len() > 1 {
        let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let lv: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        fit_line(&lt, &lv).0
    } else {
        0.0
    };
    (max / min, slope)
}

fn result(cfg: &ExperimentConfig, model: Option<String>, columns: &[&str], rows: Vec<Vec<f64>>, summary: Summary) -> SweepResult {
    SweepResult {
        experiment: cfg.experiment,
        label: cfg.label(),
        model,
        seed: cfg.seed,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        summary,
        notes: Vec::new(),
    }
}

/// Standard summary of a swept constant in column `col`.
fn ratio_summary(cfg: &ExperimentConfig, rows: &[Vec<f64>], col: usize, gate_trend: bool, mut extra: Vec<Check>) -> Summary {
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r[col]).collect();
    let (ratio, slope) = uniformity(&ts, &vals);
    let mut checks = vec![Check::at_most("max_min_ratio", ratio, cfg.tolerances.ratio)];
    let trend = Check::at_most("abs_trend_slope", slope.abs(), cfg.tolerances.trend);
    checks.push(if gate_trend { trend } else { trend.info() });
    checks.append(&mut extra);
    Summary::new(Some(ratio), Some(slope), checks)
}

/// Bump family used by the Sobolev sweeps: 16 centres in modes 0 and 2, plus core and neck centres.
pub fn sweep_family(model: &ConifoldModel, grid: &RadialGrid) -> Result<Vec<ModeFunction>> {
    let opts = FamilyOptions { eigenvalues: vec![0.0, 2.0], ..FamilyOptions::default() };
    bump_family(model, 0, grid, &opts)
}

fn sobolev_sweep(cfg: &ExperimentConfig, base: &Path, gns: bool) -> Result<SweepResult> {
    let family = family_of(cfg, base)?;
    let gopts = grid_options(cfg);
    let rows = per_member(&family, |_, member| {
        let grid = RadialGrid::for_component(&member.components()[0], &gopts)?;
        let fam = sweep_family(member, &grid)?;
        let rep = if gns {
            gns_constant_estimate(member, cfg.p, BetaChoice::Model, &fam)?
        } else {
            embedding_constant_estimate(member, cfg.p, BetaChoice::Model, &fam)?
        };
        let x = member_centre_x(&fam[rep.argmax]).unwrap_or(f64::NAN);
        Ok(vec![rep.max_ratio, x, fam.len() as f64])
    })?;
    let summary = ratio_summary(cfg, &rows, 1, !gns, Vec::new());
    Ok(result(cfg, Some(family.l.name.clone()), &["t", "family_max_ratio", "argmax_x", "members"], rows, summary))
}

fn invertibility_sweep(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    let family = family_of(cfg, base)?;
    let opts = solver_options(cfg);
    let rows = per_member(&family, |_, member| {
        let r = invertibility_constant(member, &opts)?;
        let worst = r.modes.iter().min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min)).map_or(f64::NAN, |m| m.e);
        Ok(vec![r.constant, r.sigma_min, worst, r.grid_size as f64])
    })?;
    let summary = ratio_summary(cfg, &rows, 1, false, Vec::new());
    Ok(result(cfg, Some(family.l.name.clone()), &["t", "constant", "sigma_min", "worst_mode_e", "grid_size"], rows, summary))
}

fn poincare_sweep(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    let family = family_of(cfg, base)?;
    let opts = solver_options(cfg);
    let rows = per_member(&family, |_, member| {
        let r = poincare_constant(member, &opts)?;
        Ok(vec![r.constant, r.grid_size as f64])
    })?;
    let summary = ratio_summary(cfg, &rows, 1, false, Vec::new());
    Ok(result(cfg, Some(family.l.name.clone()), &["t", "constant", "grid_size"], rows, summary))
}

fn compact_sweep(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    let family = family_of(cfg, base)?;
    let opts = solver_options(cfg);
    let rows = per_member(&family, |_, member| {
        let r = restricted_invertibility_compact(member, &CompactOptions::default(), &opts)?;
        let comp = &member.components()[0];
        let h = RadialGrid::for_component(comp, &opts.grid)?.h;
        let threshold = near_null_threshold(comp.link(), member.m(), opts.max_eigenvalue, h)?;
        Ok(vec![1.0 / r.constrained, r.constrained, r.unconstrained_mode0, threshold])
    })?;
    let worst_null = rows.iter().map(|r| r[3] / r[4]).fold(0.0, f64::max);
    let null_check = Check { pass: worst_null < 1.0, ..Check::at_most("unconstrained_over_threshold", worst_null, 1.0) };
    let summary = ratio_summary(cfg, &rows, 1, false, vec![null_check]);
    Ok(result(
        cfg,
        Some(family.l.name.clone()),
        &["t", "constant", "constrained_sigma", "unconstrained_mode0", "threshold"],
        rows,
        summary,
    ))
}

fn neck_sweep(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    let family = family_of(cfg, base)?;
    let j_max = cfg.k.min(2);
    let rows = per_member(&family, |_, member| {
        Ok(neck_convergence_check(member, j_max, family.b)?.iter().map(|r| r.sup).collect())
    })?;
    let mut checks = Vec::new();
    for j in 0..=j_max {
        let increases = rows.windows(2).filter(|w| !(w[1][j + 1] < w[0][j + 1])).count();
        checks.push(Check::at_most(&format!("non_decreasing_steps_j{j}"), increases as f64, 0.0));
    }
    let cols: Vec<String> = std::iter::once("t".to_string()).chain((0..=j_max).map(|j| format!("sup_j{j}"))).collect();
    let cols: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    Ok(result(cfg, Some(family.l.name.clone()), &cols, rows, Summary::new(None, None, checks)))
}

fn eta_bounds(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let deep = cfg.log_t_list.clone().unwrap_or_else(|| DEEP_LOG_T.to_vec());
    let (a, b) = (presets::CUT_A, presets::CUT_B);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (sweep, logs) in [(0.0, cfg.t_list.iter().map(|t| -t.ln()).collect::<Vec<_>>()), (1.0, deep)] {
        for l in logs {
            let (m1, m2) = Cutoff::derivative_maxima_at_log(-l, a, b, ETA_SAMPLES);
            rows.push(vec![l, sweep, m1, m2]);
        }
    }
    rows.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
    let exponent = |sweep: f64, col: usize| {
        let sel: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] == sweep).collect();
        let x: Vec<f64> = sel.iter().map(|r| -r[0].ln()).collect();
        let y: Vec<f64> = sel.iter().map(|r| r[col].ln()).collect();
        fit_line(&x, &y).0
    };
    let tol = &cfg.tolerances;
    let dev = |s: f64| (s - 1.0).abs();
    let (s1, s2) = (exponent(0.0, 2), exponent(0.0, 3));
    let (d1, d2) = (exponent(1.0, 2), exponent(1.0, 3));
    let checks = vec![
        Check::at_most("first_exponent_deviation", dev(s1), tol.slope),
        Check::at_most("first_exponent_deviation_asymptotic", dev(d1), tol.slope),
        Check::at_most("second_exponent_deviation_asymptotic", dev(d2), tol.slope_second),
        Check::at_most("second_exponent_deviation", dev(s2), tol.slope_second).info(),
    ];
    let mut r = result(cfg, None, &["abs_log_t", "sweep", "max_r_deta", "max_r2_d2eta"], rows, Summary::new(None, Some(s1), checks));
    r.notes = vec![
        format!("exponents against 1/|log t|: t_list {s1:.4} and {s2:.4}; asymptotic sweep {d1:.4} and {d2:.4}"),
        "sweep 0 is t_list, sweep 1 is the asymptotic |log t| sweep; the second derivative carries a 1/|log t|^2 term that dominates for representable t".into(),
    ];
    Ok(r)
}

fn weight_crossing(cfg: &ExperimentConfig, base: &Path) -> Result<SweepResult> {
    let model = require_single(cfg.model_source(base)?, "weight_crossing")?;
    let gamma = cfg.gamma.unwrap_or(1.0);
    let e = cfg.eigenvalue.unwrap_or(2.0);
    let d = weight_crossing_kernel(&model, gamma, e, &solver_options(cfg))?.decay_report;
    let row = vec![gamma, e, d.beta_low, d.slope, d.slope_bound, d.remainder_max, d.beta_high, d.residual, d.threshold];
    let mut decay = Check::at_most("remainder_slope", d.slope, d.slope_bound);
    decay.pass = d.decay_ok;
    let checks = vec![decay, Check { pass: d.residual_ok, ..Check::at_most("residual", d.residual, d.threshold) }];
    let mut r = result(
        cfg,
        Some(model.name.clone()),
        &["gamma", "e", "beta_low", "slope", "slope_bound", "remainder_max", "beta_high", "residual", "threshold"],
        vec![row],
        Summary::new(None, None, checks),
    );
    if d.negligible {
        r.notes.push("remainder below h^2 r^gamma: the candidate equals r^gamma at grid resolution".into());
    }
    Ok(r)
}

/// Classification of every cell of a weight grid; exceptional cells get class 0.
pub fn region_atlas(kind: ConifoldKind, link: &Link, m: usize, step: f64, range: (f64, f64)) -> Result<SweepResult> {
    if kind == ConifoldKind::Compact {
        return Err(ConifoldError::Config("compact models have no end weights to scan".into()));
    }
    if !(step > 0.0) || !(range.1 > range.0) {
        return Err(ConifoldError::Config("atlas step must be positive and its range non-empty".into()));
    }
    let n = ((range.1 - range.0) / step + 1e-9).floor() as usize + 1;
    let axis: Vec<f64> = (0..n).map(|i| range.0 + step * i as f64).collect();
    let code = |o: Option<bool>| o.map_or(f64::NAN, |b| b as u8 as f64);
    let mut rows = Vec::with_capacity(n * n);
    let mut contradictions = 0usize;
    for &b1 in &axis {
        for &b2 in &axis {
            let row = match classify_weight_region(kind, &[b1, b2], link, m, DEFAULT_TOL) {
                Ok(f) => {
                    if f.surjective == Some(true) && f.kernel_dim.is_some() && f.kernel_dim != f.index {
                        contradictions += 1;
                    }
                    let class = match (f.injective == Some(true), f.surjective == Some(true)) {
                        (true, true) => 4.0,
                        (false, true) => 3.0,
                        (true, false) => 2.0,
                        (false, false) => 1.0,
                    };
                    let opt = |v: Option<i64>| v.map_or(f64::NAN, |v| v as f64);
                    vec![b1, b2, class, code(f.injective), code(f.surjective), opt(f.index), opt(f.kernel_dim)]
                }
                Err(ConifoldError::ExceptionalWeight { .. }) => vec![b1, b2, 0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    let checks = vec![Check::at_most("index_contradictions", contradictions as f64, 0.0)];
    let legend = CLASS_NAMES.iter().enumerate().map(|(i, n)| format!("{i}={n}")).collect::<Vec<_>>().join(", ");
    let weights = match kind {
        ConifoldKind::CSAC => "beta_1 = mu (CS end), beta_2 = lambda (AC end)",
        _ => "beta_1, beta_2 = weights of the two ends",
    };
    Ok(SweepResult {
        experiment: ExperimentKind::RegionAtlas,
        label: "region_atlas".into(),
        model: Some(format!("{kind:?} over {}, m = {m}", link.label())),
        seed: 0,
        columns: ["beta_1", "beta_2", "class", "injective", "surjective", "index", "kernel_dim"].map(String::from).to_vec(),
        rows,
        summary: Summary::new(None, None, checks),
        notes: vec![format!("class codes: {legend}"), weights.into()],
    })
}

/// A rescaling test: norm parameters, modes of the random bump, and the factor `t`.
struct ScaleCase {
    model: ConifoldModel,
    p: f64,
    k: usize,
    beta: BetaChoice,
    modes: &'static [f64],
    t: f64,
}

fn scale_cases() -> Result<Vec<ScaleCase>> {
    let dumbbell = presets::dumbbell(-0.5)?;
    let c = |model, p, k, beta, modes, t| ScaleCase { model, p, k, beta, modes, t };
    use BetaChoice::{Constant, Model};
    Ok(vec![
        c(presets::exact_cone(-0.5, 1.0, 1.0, false)?, 2.0, 2, Constant(-0.5), &[0.0], 0.5),
        c(presets::exact_cone(-0.5, 1.0, 1.0, false)?, 2.0, 1, Constant(-0.5), &[0.0, 2.0], 3.0),
        c(presets::capped_hyperboloid(0.5)?, 2.0, 2, Constant(0.5), &[0.0, 2.0], 0.25),
        c(presets::capped_hyperboloid(-0.5)?, 3.0, 1, Model, &[0.0, 2.0], 2.0),
        c(presets::hyperboloid(1.0, -1.5, 1.0, (false, false))?, 2.0, 1, Constant(-1.5), &[0.0, 6.0], 0.1),
        c(presets::sine_spindle(-0.5, 1.2, false)?, 2.0, 2, Model, &[0.0, 2.0], 0.5),
        c(presets::sine_spindle(1.0, 1.2, false)?, 4.0, 0, Constant(1.0), &[0.0], 5.0),
        c(dumbbell.member(1e-2)?, 2.0, 2, Model, &[0.0, 2.0], 0.5),
        c(dumbbell.member(1e-1)?, 3.0, 1, Model, &[0.0], 0.1),
        c(presets::exact_cone(0.3, 1.0, 1.0, false)?, 1.5, 1, Constant(0.3), &[0.0, 6.0], 7.0),
    ])
}

fn norm_identities(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let gopts = grid_options(cfg);
    let tol = cfg.tolerances.identity;
    let cases = scale_cases()?;
    let mut rows: Vec<Vec<f64>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let grid = RadialGrid::for_component(&c.model.components()[0], &gopts)?;
            let u = random_bumps(&c.model, 0, &grid, c.modes, 1, cfg.seed.wrapping_add(i as u64))?.remove(0);
            let spec = WeightSpec::new(c.p, c.k, c.beta);
            let defect = rescaling_invariance_check(&u, &c.model, &spec, c.t)?;
            let beta = match c.beta {
                BetaChoice::Constant(b) => b,
                BetaChoice::Model => c.model.ends()[0].spec.beta,
            };
            Ok(vec![i as f64, 0.0, c.t, beta, c.p, defect])
        })
        .collect::<Result<_>>()?;

    let holder_models = [
        presets::exact_cone(-0.5, 1.0, 1.0, false)?,
        presets::capped_hyperboloid(-0.5)?,
        presets::dumbbell(-0.5)?.member(1e-2)?,
    ];
    let grids: Vec<RadialGrid> =
        holder_models.iter().map(|m| RadialGrid::for_component(&m.components()[0], &gopts)).collect::<Result<_>>()?;
    let holder: Vec<Vec<f64>> = (0..100usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1)));
            let j = i % holder_models.len();
            let (model, grid) = (&holder_models[j], &grids[j]);
            let p = rng.random_range(1.2..5.0f64);
            let (b1, b2) = (rng.random_range(-2.0..2.0f64), rng.random_range(-2.0..2.0f64));
            let mut pair = random_bumps(model, 0, grid, &[0.0, 2.0, 6.0], 2, rng.random())?;
            let v = pair.pop().expect("two bumps");
            let u = pair.pop().expect("two bumps");
            let h = holder_check(&u, &v, model, p, b1, b2)?;
            Ok(vec![(cases.len() + i) as f64, 1.0, f64::NAN, b1 + b2, p, (h.lhs - h.rhs) / h.rhs])
        })
        .collect::<Result<_>>()?;
    rows.extend(holder);

    let worst_scale = rows.iter().filter(|r| r[1] == 0.0).map(|r| r[5]).fold(0.0, f64::max);
    let violations = rows.iter().filter(|r| r[1] == 1.0 && r[5] > tol).count();
    let worst_excess = rows.iter().filter(|r| r[1] == 1.0).map(|r| r[5]).fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::at_most("max_rescaling_defect", worst_scale, tol),
        Check::at_most("holder_violations", violations as f64, 0.0),
        Check::at_most("max_holder_excess", worst_excess, tol).info(),
    ];
    let mut r = result(cfg, None, &["case", "kind", "t", "beta", "p", "metric"], rows, Summary::new(None, None, checks));
    r.notes = vec![
        "kind 0: relative rescaling defect of a weighted norm; kind 1: (lhs - rhs) / rhs of the weighted Hölder inequality".into(),
    ];
    Ok(r)
}
