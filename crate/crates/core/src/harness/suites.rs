//! The six verification suites.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::decomp::{analysis, analysis_extended, besov_analysis, besov_synthesis, split, synthesis, synthesis_ordered, visit_pieces};
use crate::error::{Error, Result};
use crate::grid::{inverse_fourier, SampledFunction, Spectrum, TorusGrid};
use crate::interp::{
    bernstein_ratios, log_convexity_exponents, log_convexity_ratio, random_element, verify_seq_interpolation,
    CertificateOptions, InterpParams, SeqElement,
};
use crate::lattice::LatticeIndex;
use crate::norms::{gelfand_shilov_seminorms, PieceNorms, Space, WeightKind};
use crate::partitions::{
    build_dyadic_partition, build_resplitting_partition, build_uniform_partition, check_partition, SymbolFamily,
};

use super::catalog::{generate_catalog, CatalogFunction, Envelope, FunctionSpec};
use super::config::{default_centers, ExperimentConfig, GridConfig, InterpCase, Suite};
use super::report::{cell, write_outputs, Meta, Report, Table};

fn admissible<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })
}

/// Grid, both families and the sampled catalog.
pub struct Context {
    pub grid: TorusGrid,
    pub uniform: SymbolFamily,
    pub dyadic: SymbolFamily,
    pub envelope: Envelope,
    pub catalog: Vec<CatalogFunction>,
}

impl Context {
    /// Families on `grid`; the catalog is sampled inside `envelope`, or the
    /// envelope of `grid` itself when `None`.
    pub fn build(config: &ExperimentConfig, grid: GridConfig, envelope: Option<Envelope>, specs: &[FunctionSpec]) -> Result<Self> {
        let g = grid.grid()?;
        let part = &config.partition;
        let uniform = admissible(build_uniform_partition(&g, part.truncation, part.bump_radius))?;
        let dyadic = admissible(build_dyadic_partition(&g, part.top))?;
        let envelope = envelope.unwrap_or(Envelope {
            half_period: g.half_period(),
            safe_radius: uniform.safe_radius().min(dyadic.safe_radius()),
        });
        let catalog = generate_catalog(specs, g, envelope)?;
        Ok(Self {
            grid: g,
            uniform,
            dyadic,
            envelope,
            catalog,
        })
    }

    /// `(2N, P)` and `(2N, 2P)` versions with the same envelope.
    pub fn refinements(&self, config: &ExperimentConfig, specs: &[FunctionSpec]) -> Result<Vec<(String, Context)>> {
        let base = config.grid;
        let fine = GridConfig {
            samples: 2 * base.samples,
            ..base
        };
        let wide = GridConfig {
            samples: 2 * base.samples,
            periods: 2 * base.periods,
            ..base
        };
        Ok(vec![
            ("2N".to_string(), Context::build(config, fine, Some(self.envelope), specs)?),
            ("2N-2P".to_string(), Context::build(config, wide, Some(self.envelope), specs)?),
        ])
    }
}

/// `--workers`, then the config, then `MODSPACE_WORKERS`, then the machine.
pub fn resolve_workers(cli: Option<usize>, config: &ExperimentConfig) -> usize {
    cli.or(config.workers)
        .or_else(|| std::env::var("MODSPACE_WORKERS").ok().and_then(|v| v.parse().ok()))
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Validates the config and runs one suite on a pool of `workers` threads.
pub fn run_suite(config: &ExperimentConfig, suite: Suite, workers: usize) -> Result<Report> {
    config.validate(suite)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let specs = config.function_specs()?;
        let mut report = Report::new(suite, config.grid, config.partition, config.seed);
        match suite {
            Suite::PartitionCheck => partition_check(config, &mut report)?,
            Suite::RetractCheck => retract_check(config, &specs, &mut report)?,
            Suite::Norm => norm_suite(config, &specs, &mut report)?,
            Suite::EmbedSweep => embed_sweep(config, &specs, &mut report)?,
            Suite::InterpVerify => interp_verify(config, &specs, &mut report)?,
            Suite::BernsteinSweep => bernstein_sweep(config, &specs, &mut report)?,
        }
        Ok(report)
    })
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Runs a suite and writes `report.json`, `summary.csv` and `meta.json`.
pub fn execute(config: &ExperimentConfig, suite: Suite, out: &std::path::Path, workers: usize) -> Result<Report> {
    let started = unix_now();
    let clock = Instant::now();
    let report = run_suite(config, suite, workers)?;
    let meta = Meta {
        suite,
        started_unix: started,
        finished_unix: unix_now(),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        workers,
        version: env!("CARGO_PKG_VERSION"),
    };
    write_outputs(out, &report, &meta)?;
    Ok(report)
}

fn empty_catalog(report: &mut Report, catalog: &[CatalogFunction]) -> bool {
    if catalog.is_empty() {
        report.warn("empty catalog selection: no cases were run");
        true
    } else {
        false
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn partition_check(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let g = config.grid.grid()?;
    let part = &config.partition;
    let tol = config.partition_check.tolerance;
    let uniform = admissible(build_uniform_partition(&g, part.truncation, part.bump_radius))?;
    let dyadic = admissible(build_dyadic_partition(&g, part.top))?;
    let mut table = Table::new(&["family", "indices", "safe_radius", "max_partition_deviation", "telescoping_deviation", "violations"]);
    let mut details = Vec::new();
    let mut overall: f64 = 0.0;
    for fam in [&uniform, &dyadic] {
        let r = check_partition(fam);
        let name = fam.kind().name();
        let violations = r.support_violations
            + r.range_violations
            + r.disjointness_violations
            + r.max_overlap.saturating_sub(r.overlap_bound);
        let telescoping = fam.telescoping_deviation();
        report.assert_le(format!("{name}.partition_deviation"), r.max_partition_deviation, tol);
        report.assert_le(format!("{name}.structure_violations"), violations as f64, 0.0);
        if fam.kind() == crate::partitions::FamilyKind::Dyadic {
            report.assert_le("dyadic.telescoping_deviation", telescoping, tol);
        }
        overall = overall.max(r.max_partition_deviation);
        table.push(vec![
            name.into(),
            r.indices.to_string(),
            cell(r.safe_radius),
            cell(r.max_partition_deviation),
            cell(telescoping),
            violations.to_string(),
        ]);
        details.push(json!({ "report": r, "telescoping_deviation": telescoping }));
    }
    report.cases = 2;
    report.details = json!({ "max_partition_deviation": overall, "families": details });
    report.table = table;
    Ok(())
}

#[derive(Serialize)]
struct RetractCase {
    name: String,
    uniform_error: f64,
    dyadic_error: f64,
    order_difference: f64,
    extended_difference: f64,
    pieces: usize,
}

fn retract_case(
    f: &CatalogFunction,
    ctx: &Context,
    resplit: &SymbolFamily,
    permutations: usize,
    seed: u64,
) -> Result<RetractCase> {
    let x = &f.samples;
    let ps = analysis(x, &ctx.uniform)?;
    let back = synthesis(&ps, &ctx.uniform)?;
    let uniform_error = back.relative_l2_error(x)?;

    let bs = besov_analysis(x, &ctx.dyadic)?;
    let bback = besov_synthesis(&bs, &ctx.dyadic)?;
    let dyadic_error = bback.relative_l2_error(x)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order_difference: f64 = 0.0;
    for _ in 0..permutations {
        let mut order = ps.indices();
        order.shuffle(&mut rng);
        let other = synthesis_ordered(&ps, &ctx.uniform, &order)?;
        order_difference = order_difference.max(other.relative_l2_error(&back)?);
        let mut order = bs.indices();
        order.shuffle(&mut rng);
        let other = synthesis_ordered(&bs, &ctx.dyadic, &order)?;
        order_difference = order_difference.max(other.relative_l2_error(&bback)?);
    }

    let canonical = analysis_extended(&ps, &ctx.uniform)?;
    let coarse = analysis_extended(&split(x, resplit)?, &ctx.uniform)?;
    let scale = x.l2_samples();
    let extended_difference = if scale == 0.0 {
        0.0
    } else {
        canonical.max_entry_difference(&coarse)? / scale
    };
    Ok(RetractCase {
        name: f.name().to_string(),
        uniform_error,
        dyadic_error,
        order_difference,
        extended_difference,
        pieces: ps.len(),
    })
}

/// Re-splitting family covering the catalog's spectra.
pub fn resplitting_family(ctx: &Context, radius_factor: f64) -> Result<SymbolFamily> {
    let r = radius_factor * (ctx.grid.dim() as f64).sqrt();
    let truncation = (ctx.envelope.safe_radius + r).ceil() as u32 + 1;
    admissible(build_resplitting_partition(&ctx.grid, truncation, r))
}

fn retract_check(config: &ExperimentConfig, specs: &[FunctionSpec], report: &mut Report) -> Result<()> {
    let params = &config.retract_check;
    let ctx = Context::build(config, config.grid, None, specs)?;
    let resplit = resplitting_family(&ctx, params.resplit_radius)?;
    report.table = Table::new(&["case", "uniform_error", "dyadic_error", "order_difference", "extended_difference"]);
    if empty_catalog(report, &ctx.catalog) {
        return Ok(());
    }
    let cases = ctx
        .catalog
        .par_iter()
        .enumerate()
        .map(|(i, f)| retract_case(f, &ctx, &resplit, params.permutations, config.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    for c in &cases {
        report.table.push(vec![
            c.name.clone(),
            cell(c.uniform_error),
            cell(c.dyadic_error),
            cell(c.order_difference),
            cell(c.extended_difference),
        ]);
    }
    report.cases = cases.len();
    report.assert_le("uniform.reconstruction_error", max_of(cases.iter().map(|c| c.uniform_error)), params.tolerance);
    report.assert_le("dyadic.reconstruction_error", max_of(cases.iter().map(|c| c.dyadic_error)), params.tolerance);
    report.assert_le("synthesis.order_difference", max_of(cases.iter().map(|c| c.order_difference)), params.order_tolerance);
    report.assert_le(
        "extended.resplitting_difference",
        max_of(cases.iter().map(|c| c.extended_difference)),
        params.extended_tolerance,
    );
    report.details = json!({ "cases": cases, "resplit_truncation": resplit.truncation(), "resplit_radius": resplit.bump_radius() });
    Ok(())
}

#[derive(Serialize)]
struct NormRow {
    space: Space,
    #[serde(serialize_with = "crate::norms::serialize_extended")]
    p: f64,
    #[serde(serialize_with = "crate::norms::serialize_extended")]
    q: f64,
    s: f64,
    #[serde(serialize_with = "crate::norms::serialize_extended")]
    value: f64,
}

fn norm_suite(config: &ExperimentConfig, specs: &[FunctionSpec], report: &mut Report) -> Result<()> {
    let params = &config.norm;
    let ctx = Context::build(config, config.grid, None, specs)?;
    report.table = Table::new(&["case", "space", "p", "q", "s", "value"]);
    if empty_catalog(report, &ctx.catalog) {
        return Ok(());
    }
    let ps: Vec<f64> = params.p.iter().map(|e| e.0).collect();
    let mut qs: Vec<f64> = params.q.iter().map(|e| e.0).collect();
    qs.sort_by(f64::total_cmp);
    let mut ss = params.s.clone();
    ss.sort_by(f64::total_cmp);

    let per_function = ctx
        .catalog
        .par_iter()
        .map(|f| {
            let uni = PieceNorms::compute(&f.samples, &ctx.uniform, &ps)?;
            let dya = PieceNorms::compute(&f.samples, &ctx.dyadic, &ps)?;
            let mut rows = Vec::new();
            for space in &params.spaces {
                let table = if *space == Space::B { &dya } else { &uni };
                for p in &ps {
                    for q in &qs {
                        for s in &ss {
                            let value = table.space_norm(*space, *p, *q, *s)?.value();
                            rows.push(NormRow {
                                space: *space,
                                p: *p,
                                q: *q,
                                s: *s,
                                value,
                            });
                        }
                    }
                }
            }
            // M and E weights coincide at s = 0
            let mut collapse: f64 = 0.0;
            for p in &ps {
                for q in &qs {
                    let m = uni.space_norm(Space::M, *p, *q, 0.0)?.value();
                    let e = uni.space_norm(Space::E, *p, *q, 0.0)?.value();
                    collapse = collapse.max((m - e).abs());
                }
            }
            Ok((f.name().to_string(), rows, collapse))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut nonfinite = 0usize;
    let mut monotone_violations = 0usize;
    let mut collapse: f64 = 0.0;
    let mut details = Vec::new();
    for (name, rows, c) in &per_function {
        collapse = collapse.max(*c);
        for r in rows {
            if !r.value.is_finite() {
                nonfinite += 1;
            }
            report.table.push(vec![
                name.clone(),
                format!("{:?}", r.space),
                cell(r.p),
                cell(r.q),
                cell(r.s),
                cell(r.value),
            ]);
        }
        // nondecreasing in s, nonincreasing in q; rows are ordered (space, p, q, s)
        let ns = ss.len();
        let nq = qs.len();
        for block in rows.chunks(nq * ns) {
            for qi in 0..nq {
                for si in 0..ns {
                    let v = block[qi * ns + si].value;
                    if si + 1 < ns && block[qi * ns + si + 1].value < v * (1.0 - 1e-12) {
                        monotone_violations += 1;
                    }
                    if qi + 1 < nq && block[(qi + 1) * ns + si].value > v * (1.0 + 1e-12) {
                        monotone_violations += 1;
                    }
                }
            }
        }
        if name == "gaussian" {
            for r in rows {
                report.anchor(format!("gaussian.{:?}.p{}.q{}.s{}", r.space, cell(r.p), cell(r.q), r.s), r.value);
            }
        }
        details.push(json!({ "case": name, "norms": rows }));
    }
    report.cases = per_function.len();
    report.assert_le("norms.nonfinite", nonfinite as f64, 0.0);
    report.assert_le("norms.monotonicity_violations", monotone_violations as f64, 0.0);
    report.assert_le("norms.m_e_collapse_at_s0", collapse, 0.0);

    let gaussian = ctx.catalog.iter().find(|f| {
        matches!(&f.spec, FunctionSpec::Gaussian { sigma, x0, .. } if *sigma == 1.0 && x0.iter().all(|v| *v == 0.0))
    });
    if let Some(f) = gaussian {
        let d = ctx.grid.dim() as f64;
        let (space_side, freq_side) = gelfand_shilov_seminorms(&f.samples, 1.0)?;
        let exact = 0.5f64.exp() * (2.0 * std::f64::consts::PI).powf(-d / 2.0);
        let h = ctx.grid.spacing();
        report.assert_le("gaussian.seminorm_deficit", (exact - space_side) / exact, h * h);
        report.assert_le("gaussian.seminorm_excess", (space_side - exact).max(0.0) / exact, 1e-14);
        report.anchor("gaussian.seminorm.space", space_side);
        report.anchor("gaussian.seminorm.frequency", freq_side);
    }
    report.details = json!({ "cases": details });
    Ok(())
}

/// Maximum `p`-embedding ratio per pair over catalog, `s` and `q`, plus
/// the count of degenerate pairs not returning exactly 1.
fn p_sweep(ctx: &Context, config: &ExperimentConfig) -> Result<(Vec<f64>, usize)> {
    let params = &config.embed_sweep;
    let mut ps: Vec<f64> = params.p_pairs.iter().flat_map(|(a, b)| [a.0, b.0]).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let per_function = ctx
        .catalog
        .par_iter()
        .map(|f| {
            let table = PieceNorms::compute(&f.samples, &ctx.uniform, &ps)?;
            let mut maxima = vec![0.0f64; params.p_pairs.len()];
            let mut degenerate = 0usize;
            for (i, (a, b)) in params.p_pairs.iter().enumerate() {
                for s in &params.s {
                    for q in &params.q {
                        let r = crate::interp::embedding_ratio_p(&table, a.0, b.0, *s, q.0)?;
                        if a.0 == b.0 && r != 1.0 {
                            degenerate += 1;
                        }
                        maxima[i] = maxima[i].max(r);
                    }
                }
            }
            Ok((maxima, degenerate))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut maxima = vec![0.0f64; params.p_pairs.len()];
    let mut degenerate = 0;
    for (m, d) in per_function {
        for (a, b) in maxima.iter_mut().zip(m) {
            *a = a.max(b);
        }
        degenerate += d;
    }
    Ok((maxima, degenerate))
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn embed_sweep(config: &ExperimentConfig, specs: &[FunctionSpec], report: &mut Report) -> Result<()> {
    let params = &config.embed_sweep;
    let ctx = Context::build(config, config.grid, None, specs)?;
    report.table = Table::new(&["grid", "p0", "p1", "max_ratio"]);
    if empty_catalog(report, &ctx.catalog) {
        return Ok(());
    }
    let (base, degenerate) = p_sweep(&ctx, config)?;
    let mut grids = vec![("base".to_string(), base.clone())];
    let mut total_degenerate = degenerate;
    if params.refine {
        for (label, fine) in ctx.refinements(config, specs)? {
            let (m, d) = p_sweep(&fine, config)?;
            total_degenerate += d;
            let change = max_of(base.iter().zip(&m).map(|(a, b)| relative_change(*a, *b)));
            report.assert_le(format!("p_embedding.stability.{label}"), change, params.stability);
            grids.push((label, m));
        }
    }
    for (label, m) in &grids {
        for ((a, b), v) in params.p_pairs.iter().zip(m) {
            report.table.push(vec![label.clone(), cell(a.0), cell(b.0), cell(*v)]);
        }
    }
    report.assert_le("p_embedding.degenerate_not_one", total_degenerate as f64, 0.0);
    let finite = base.iter().all(|v| v.is_finite());
    report.assert_that("p_embedding.bounded", finite, max_of(base.iter().copied()), f64::INFINITY);
    for ((a, b), v) in params.p_pairs.iter().zip(&base) {
        report.anchor(format!("p_embedding.max.p{}-{}", cell(a.0), cell(b.0)), *v);
    }

    let mut ps: Vec<f64> = params.qs_cases.iter().map(|c| c.p.0).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let qs_max = ctx
        .catalog
        .par_iter()
        .map(|f| {
            let table = PieceNorms::compute(&f.samples, &ctx.uniform, &ps)?;
            params
                .qs_cases
                .iter()
                .map(|c| crate::interp::embedding_ratio_qs(&table, c.s0, c.s1, c.q0.0, c.q1.0, c.p.0))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = max_of(qs_max.iter().flatten().copied());
    report.assert_le("qs_embedding.max_ratio", worst, 1.0 + params.qs_tolerance);
    report.cases = ctx.catalog.len();
    report.details = json!({
        "p_pairs": params.p_pairs,
        "grids": grids.iter().map(|(l, m)| json!({ "grid": l, "max_ratio": m })).collect::<Vec<_>>(),
        "qs_cases": params.qs_cases,
        "qs_max_ratio": worst,
    });
    Ok(())
}

#[derive(Serialize)]
struct CertificateRow {
    case: String,
    #[serde(flatten)]
    certificate: crate::interp::Certificate,
}

fn interp_params(c: &InterpCase, weight: WeightKind) -> Result<InterpParams> {
    admissible(InterpParams::new(c.theta, c.end0.params(weight)?, c.end1.params(weight)?))
}

fn certificate_assertions(report: &mut Report, prefix: &str, rows: &[CertificateRow], upper: f64, lower: f64) {
    let disordered = rows.iter().filter(|r| !r.certificate.ordered()).count();
    report.assert_le(format!("{prefix}.ordering_violations"), disordered as f64, 0.0);
    report.assert_le(format!("{prefix}.upper_gap"), max_of(rows.iter().map(|r| r.certificate.upper_gap())), upper);
    report.assert_le(format!("{prefix}.lower_gap"), max_of(rows.iter().map(|r| r.certificate.lower_gap())), lower);
}

fn interp_verify(config: &ExperimentConfig, specs: &[FunctionSpec], report: &mut Report) -> Result<()> {
    let params = &config.interp_verify;
    let g = config.grid.grid()?;
    report.table = Table::new(&["case", "target", "upper", "lower", "rel_gap"]);

    let mut tasks = Vec::new();
    for (ci, c) in params.cases.iter().enumerate() {
        for w in &params.weights {
            for e in 0..params.elements_per_case {
                tasks.push((ci, *c, *w, e));
            }
        }
    }
    let options = CertificateOptions {
        perturbations: params.perturbations,
        seed: config.seed,
        ..Default::default()
    };
    let rows = tasks
        .par_iter()
        .enumerate()
        .map(|(t, (ci, c, w, e))| {
            let ip = interp_params(c, *w)?;
            let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(t as u64);
            let x = random_element(seed, g.dim(), *w, params.element_indices, params.element_radius, params.element_cells)?;
            let certificate = verify_seq_interpolation(&x, &ip, &options)?;
            let wname = match w {
                WeightKind::Exponential => "exp",
                WeightKind::Polynomial => "poly",
            };
            Ok(CertificateRow {
                case: format!("c{ci}-{wname}-{e}"),
                certificate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        report.warn("no sequence certificates requested");
    } else {
        certificate_assertions(report, "certificate", &rows, params.upper_tolerance, params.lower_tolerance);
    }
    report.anchor("certificate.count", rows.len() as f64);

    let ctx = Context::build(config, config.grid, None, specs)?;
    let mut convexity = Vec::new();
    let mut sequence_rows = Vec::new();
    if !empty_catalog(report, &ctx.catalog) {
        let mut worst: f64 = 0.0;
        let mut identical_not_one = 0usize;
        let mut configs = 0usize;
        for (ci, c) in params.log_convexity.iter().enumerate() {
            let ip = interp_params(c, WeightKind::Exponential)?;
            let ps = log_convexity_exponents(&ip);
            let ratios = ctx
                .catalog
                .par_iter()
                .map(|f| log_convexity_ratio(&PieceNorms::compute(&f.samples, &ctx.uniform, &ps)?, &ip))
                .collect::<Result<Vec<_>>>()?;
            let present: Vec<f64> = ratios.iter().flatten().copied().collect();
            let m = max_of(present.iter().copied());
            if ip.identical_endpoints() {
                identical_not_one += present.iter().filter(|r| **r != 1.0).count();
            } else {
                configs += 1;
                worst = worst.max(m);
            }
            report.anchor(format!("log_convexity.max.config{ci}"), m);
            convexity.push(json!({ "config": c, "identical": ip.identical_endpoints(), "ratios": ratios }));
        }
        report.assert_le("log_convexity.max_ratio", worst, params.log_convexity_bound);
        report.assert_le("log_convexity.identical_not_one", identical_not_one as f64, 0.0);
        report.anchor("log_convexity.configs", configs as f64);

        if params.sequence_side && g.dim() == 1 {
            let seq_options = CertificateOptions {
                t_grid: vec![-1.0, 0.0, 1.0],
                perturbations: 2,
                seed: config.seed,
            };
            let cases: Vec<InterpParams> = params
                .log_convexity
                .iter()
                .map(|c| interp_params(c, WeightKind::Exponential))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|ip| !ip.identical_endpoints() && (ip.end0.q.is_finite() || ip.end1.q.is_finite()))
                .take(2)
                .collect();
            sequence_rows = ctx
                .catalog
                .par_iter()
                .map(|f| {
                    let seq = SeqElement::from_pieces(&analysis(&f.samples, &ctx.uniform)?, WeightKind::Exponential)?;
                    cases
                        .iter()
                        .enumerate()
                        .map(|(ci, ip)| {
                            Ok(CertificateRow {
                                case: format!("{}-config{ci}", f.name()),
                                certificate: verify_seq_interpolation(&seq, ip, &seq_options)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            certificate_assertions(report, "sequence_side", &sequence_rows, params.upper_tolerance, params.lower_tolerance);
        } else if params.sequence_side {
            report.warn("sequence-side certificates are run for d = 1 only");
        }
    }

    for r in rows.iter().chain(&sequence_rows) {
        let c = &r.certificate;
        report.table.push(vec![
            r.case.clone(),
            cell(c.target),
            cell(c.upper),
            cell(c.lower),
            cell((c.upper - c.lower) / c.target),
        ]);
    }
    report.cases = rows.len() + sequence_rows.len();
    report.details = json!({
        "certificates": rows,
        "log_convexity": convexity,
        "sequence_side": sequence_rows,
    });
    Ok(())
}

/// `F^{-1} σ_k` for a family index.
pub fn symbol_piece(family: &SymbolFamily, k: &LatticeIndex) -> Result<SampledFunction> {
    let grid = *family.grid();
    let mut coeffs = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
    for (slot, v) in family.symbol(k)? {
        coeffs[slot] = num_complex::Complex64::new(v, 0.0);
    }
    inverse_fourier(&Spectrum::new(grid, coeffs)?)
}

struct BernsteinGrid {
    /// Max over all pieces per pair.
    maxima: Vec<f64>,
    /// Largest relative spread of symbol-piece ratios across centres.
    invariance: f64,
    pieces: usize,
}

fn bernstein_grid(ctx: &Context, centers: &[LatticeIndex], pairs: &[(f64, f64)], catalog_pieces: bool) -> Result<BernsteinGrid> {
    let symbol_ratios = centers
        .par_iter()
        .map(|k| bernstein_ratios(&symbol_piece(&ctx.uniform, k)?, pairs))
        .collect::<Result<Vec<_>>>()?;
    let mut maxima = vec![0.0f64; pairs.len()];
    let mut invariance: f64 = 0.0;
    for r in &symbol_ratios {
        for i in 0..pairs.len() {
            maxima[i] = maxima[i].max(r[i]);
            invariance = invariance.max(relative_change(r[i], symbol_ratios[0][i]));
        }
    }
    let mut pieces = centers.len();
    if catalog_pieces {
        let per_function = ctx
            .catalog
            .par_iter()
            .map(|f| {
                let peak = f.samples.max_abs();
                let mut local = vec![0.0f64; pairs.len()];
                let mut count = 0usize;
                visit_pieces(&f.samples, &ctx.uniform, |_, piece| {
                    if piece.max_abs() >= 1e-10 * peak {
                        for (l, r) in local.iter_mut().zip(bernstein_ratios(&piece, pairs)?) {
                            *l = l.max(r);
                        }
                        count += 1;
                    }
                    Ok(())
                })?;
                Ok((local, count))
            })
            .collect::<Result<Vec<_>>>()?;
        for (local, count) in per_function {
            for (m, l) in maxima.iter_mut().zip(local) {
                *m = m.max(l);
            }
            pieces += count;
        }
    }
    Ok(BernsteinGrid {
        maxima,
        invariance,
        pieces,
    })
}

fn bernstein_sweep(config: &ExperimentConfig, specs: &[FunctionSpec], report: &mut Report) -> Result<()> {
    let params = &config.bernstein_sweep;
    let ctx = Context::build(config, config.grid, None, specs)?;
    let centers: Vec<LatticeIndex> = if params.centers.is_empty() {
        default_centers(ctx.grid.dim())
    } else {
        params.centers.clone()
    }
    .iter()
    .map(|c| LatticeIndex::new(c))
    .collect();
    let pairs: Vec<(f64, f64)> = params.p_pairs.iter().map(|(a, b)| (a.0, b.0)).collect();
    report.table = Table::new(&["grid", "p1", "p2", "max_ratio"]);
    if params.catalog_pieces && ctx.catalog.is_empty() {
        report.warn("empty catalog selection: only symbol pieces were swept");
    }

    let base = bernstein_grid(&ctx, &centers, &pairs, params.catalog_pieces)?;
    report.assert_le("bernstein.translation_invariance", base.invariance, params.invariance_tolerance);
    let mut grids = vec![("base".to_string(), base.maxima.clone(), base.pieces)];
    if params.refine {
        for (label, fine) in ctx.refinements(config, specs)? {
            let g = bernstein_grid(&fine, &centers, &pairs, params.catalog_pieces)?;
            let change = max_of(base.maxima.iter().zip(&g.maxima).map(|(a, b)| relative_change(*a, *b)));
            report.assert_le(format!("bernstein.stability.{label}"), change, params.stability);
            report.assert_le(format!("bernstein.translation_invariance.{label}"), g.invariance, params.invariance_tolerance);
            grids.push((label, g.maxima, g.pieces));
        }
    }
    let sigma0 = symbol_piece(&ctx.uniform, &LatticeIndex::origin(ctx.grid.dim()))?;
    let same = bernstein_ratios(&sigma0, &[(1.0, 1.0), (2.0, 2.0), (f64::INFINITY, f64::INFINITY)])?;
    report.assert_le("bernstein.equal_exponents_not_one", same.iter().filter(|r| **r != 1.0).count() as f64, 0.0);
    let constant = max_of(base.maxima.iter().copied());
    report.assert_that("bernstein.bounded", constant.is_finite(), constant, f64::INFINITY);
    report.anchor("bernstein.constant", constant);
    for ((a, b), v) in pairs.iter().zip(&base.maxima) {
        report.anchor(format!("bernstein.max.p{}-{}", cell(*a), cell(*b)), *v);
    }
    for (label, m, _) in &grids {
        for ((a, b), v) in pairs.iter().zip(m) {
            report.table.push(vec![label.clone(), cell(*a), cell(*b), cell(*v)]);
        }
    }
    report.cases = base.pieces;
    report.details = json!({
        "centers": centers,
        "p_pairs": params.p_pairs,
        "grids": grids.iter().map(|(l, m, n)| json!({ "grid": l, "max_ratio": m, "pieces": n })).collect::<Vec<_>>(),
    });
    Ok(())
}
