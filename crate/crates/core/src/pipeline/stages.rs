use std::cell::OnceCell;
use std::path::Path;
use std::sync::Arc;

use crate::analysis::{campanato_seminorm, energy_decay_fit, holder_exponent_fit, RegionSpec};
use crate::eigen::flatness_threshold;
use crate::exponents::{alpha_max_cor1, alpha_max_cor2, bundle_from_pq};
use crate::fem::{solve_poisson_with, Solution, SolveOptions, SourceTerm};
use crate::functional::{acf_trace_with, check_monotone, AcfOptions};
use crate::geometry::{estimate_flatness_with, FlatnessOptions, FlatnessReport, PolygonalDomain, SeparationMode};
use crate::mesh::{refine_toward, triangulate, TriMesh};
use crate::oracle::radial_poisson;
use crate::point::Point;
use crate::{Error, Result};

use super::report::{csv, opt, Report};
use super::{Config, Pipeline, RunOutcome};

/// Lazily built inputs shared by the stages of one run.
struct Context<'a> {
    cfg: &'a Config,
    domain: PolygonalDomain,
    flatness: OnceCell<FlatnessReport>,
    solution: OnceCell<Solution>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a Config) -> Result<Self> {
        Ok(Context { cfg, domain: cfg.domain.build(cfg.seed)?, flatness: OnceCell::new(), solution: OnceCell::new() })
    }

    fn source(&self) -> Result<SourceTerm> {
        self.cfg.source.build()
    }

    fn solve_on(&self, mesh: TriMesh) -> Result<Solution> {
        let opts = SolveOptions { rel_tol: self.cfg.solve.rel_tol, max_iterations: self.cfg.solve.max_iterations };
        solve_poisson_with(Arc::new(mesh), &self.source()?, &opts)
    }

    fn solution(&self) -> Result<&Solution> {
        if let Some(s) = self.solution.get() {
            return Ok(s);
        }
        let s = self.solve_on(triangulate(&self.domain, self.cfg.mesh.h)?)?;
        Ok(self.solution.get_or_init(|| s))
    }

    fn flatness(&self) -> Result<&FlatnessReport> {
        if let Some(f) = self.flatness.get() {
            return Ok(f);
        }
        let fc = &self.cfg.flatness;
        let separation = match fc.separation.as_str() {
            "r0" => SeparationMode::AtR0,
            "all" => SeparationMode::AllScales,
            other => return Err(Error::Parse(format!("unknown separation mode {other:?}"))),
        };
        let r0 = self.domain.r0();
        let scales: Vec<f64> = fc.scales.iter().map(|s| s * r0).collect();
        let opts = FlatnessOptions { separation, ..Default::default() };
        let rep = estimate_flatness_with(&self.domain, &scales, fc.centers, fc.angular_resolution, &opts)?;
        Ok(self.flatness.get_or_init(|| rep))
    }
}

pub(super) fn run(cfg: &Config, pipeline: Pipeline, out: &Path) -> Result<RunOutcome> {
    let ctx = Context::new(cfg)?;
    let mut report = Report::new(out, &format!("reiflab {pipeline}"))?;
    if pipeline == Pipeline::All {
        report.heading("Stages");
        for stage in [
            Pipeline::Exponents,
            Pipeline::GenerateDomain,
            Pipeline::CheckFlatness,
            Pipeline::Solve,
            Pipeline::Monotonicity,
            Pipeline::Decay,
            Pipeline::Holder,
        ] {
            let mut sub = Report::new(&out.join(stage.name()), &format!("reiflab {stage}"))?;
            run_stage(&ctx, stage, &mut sub)?;
            finish(&ctx, stage, &mut sub)?;
            report.line(format!("- {stage}: {}", if sub.first_failure().is_none() { "pass" } else { "FAIL" }));
            for c in sub.checks {
                report.check(&format!("{stage}: {}", c.name), c.passed, c.detail);
            }
            report.files.extend(sub.files.iter().map(|f| format!("{stage}/{f}")));
        }
    } else {
        run_stage(&ctx, pipeline, &mut report)?;
    }
    finish(&ctx, pipeline, &mut report)?;
    Ok(RunOutcome { pipeline, checks: report.checks, files: report.files })
}

fn finish(ctx: &Context<'_>, pipeline: Pipeline, report: &mut Report) -> Result<()> {
    let provenance = [
        ("pipeline", pipeline.name().to_string()),
        ("seed", ctx.cfg.seed.to_string()),
        ("reiflab", env!("CARGO_PKG_VERSION").to_string()),
        ("target", format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)),
        ("worker threads", rayon::current_num_threads().to_string()),
    ];
    report.finish(&provenance, &ctx.cfg.to_toml())
}

fn run_stage(ctx: &Context<'_>, stage: Pipeline, report: &mut Report) -> Result<()> {
    match stage {
        Pipeline::GenerateDomain => generate_domain(ctx, report),
        Pipeline::CheckFlatness => check_flatness(ctx, report),
        Pipeline::Solve => solve(ctx, report),
        Pipeline::Monotonicity => monotonicity(ctx, report),
        Pipeline::Decay => decay(ctx, report),
        Pipeline::Holder => holder(ctx, report),
        Pipeline::Exponents => exponents(ctx, report),
        Pipeline::All => unreachable!("expanded by run"),
    }
}

/// `k` outline vertices evenly spaced by index.
fn boundary_centers(outline: &[Point], k: usize) -> Vec<Point> {
    (0..k).map(|i| outline[i * outline.len() / k]).collect()
}

/// `hi, hi/2, ...` down to `lo`, in increasing order.
fn dyadic_down_to(hi: f64, lo: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = hi;
    while r >= lo * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out.reverse();
    out
}

fn dyadic_count(hi: f64, count: usize) -> Vec<f64> {
    (0..count).rev().map(|j| hi / 2f64.powi(j as i32)).collect()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn generate_domain(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let d = &ctx.domain;
    report.write("domain.json", &d.to_json())?;
    report.write("domain.csv", &csv(&["x", "y"], d.vertices().iter().map(|p| vec![p.x.to_string(), p.y.to_string()])))?;
    report.heading("Domain");
    report.line(format!("- vertices: {}", d.len()));
    report.line(format!("- area: {}", d.area()));
    report.line(format!("- perimeter: {}", d.perimeter()));
    report.line(format!("- r0: {}", d.r0()));
    for (k, v) in d.meta() {
        report.line(format!("- meta {k}: {v}"));
    }
    Ok(())
}

fn check_flatness(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let rep = ctx.flatness()?;
    report.write("domain.json", &ctx.domain.to_json())?;
    report.write("flatness.csv", &rep.to_csv())?;
    report.heading("Flatness");
    report.line(format!("- eps_global: {}", rep.eps_global));
    report.line(format!("- samples: {}", rep.samples.len()));
    report.line(format!("- r0: {}", rep.r0_used));
    report.check("separation", rep.all_separated(), "two-sided separation by the best line at r0");
    if let Some(beta) = ctx.cfg.flatness.beta {
        let th = flatness_threshold(2, beta)?;
        report.line(format!("- eps_max(beta = {beta}): {}", th.eps_max));
        report.check(
            "flatness certificate",
            rep.eps_global <= th.eps_max,
            format!("eps_global {} vs eps_max {}", rep.eps_global, th.eps_max),
        );
    }
    Ok(())
}

fn solve(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let sol = ctx.solution()?;
    let u = &sol.field;
    report.write("mesh.off", &u.mesh().to_off())?;
    report.write("solution.csv", &u.to_csv())?;
    report.write("run_log.json", &sol.run_log_json())?;
    let s = &sol.stats;
    report.heading("Solve");
    report.line(format!("- mesh: {} vertices, {} triangles, h = {}", u.mesh().num_points(), u.mesh().num_triangles(), u.mesh().h()));
    report.line(format!("- CG: {} iterations, relative residual {:.3e}", s.iterations, s.relative_residual));
    report.line(format!("- energy: {}", s.energy));
    for w in &s.warnings {
        report.line(format!("- warning: {w}"));
    }
    let probe = Point::new(ctx.cfg.solve.probe_x, ctx.cfg.solve.probe_y);
    match u.eval(probe) {
        Some(v) => report.line(format!("- u({}, {}) = {v}", probe.x, probe.y)),
        None => report.line(format!("- probe ({}, {}) lies outside the mesh", probe.x, probe.y)),
    }
    if ctx.cfg.domain.kind == "disk" && ctx.cfg.source.kind == "constant" {
        let c = ctx.cfg.source.value;
        let exact = radial_poisson(2, ctx.cfg.domain.radius, move |_| c, Some(c));
        if let Some(v) = u.eval(probe) {
            report.line(format!("- radial reference u({}, {}) = {}", probe.x, probe.y, exact.u(probe.norm())));
            report.line(format!("- difference: {:.3e}", (v - exact.u(probe.norm())).abs()));
        }
    }
    report.check(
        "energy identity",
        s.energy_gap <= ctx.cfg.solve.energy_tol,
        format!("|∫|∇u|² - ∫fu| / ∫|∇u|² = {:.3e}", s.energy_gap),
    );
    Ok(())
}

fn monotonicity(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let mc = &ctx.cfg.monotonicity;
    let sol = ctx.solution()?;
    let u = &sol.field;
    let mesh = u.mesh();
    let radii = dyadic_down_to(mc.r_max * mesh.r0(), mc.r_min_h * ctx.cfg.mesh.h);
    if radii.len() < 2 {
        return Err(Error::Resolution(format!(
            "only {} dyadic radius between {}h and {} r0",
            radii.len(),
            mc.r_min_h,
            mc.r_max
        )));
    }
    let opts = AcfOptions { psi_points: mc.psi_points, p0: mc.p0, ..Default::default() };
    let mut rows = Vec::new();
    let mut total = 0;
    for (k, c) in boundary_centers(mesh.outline(), mc.centers).into_iter().enumerate() {
        let trace = acf_trace_with(u, &sol.source, c, mc.beta, &radii, &opts)?;
        let v = check_monotone(&trace, mc.slack)?;
        total += v.len();
        report.write(&format!("trace_{k}.csv"), &trace.to_csv())?;
        let f_max = trace.f_values().into_iter().fold(0.0, f64::max);
        let pairs: Vec<String> = v.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        rows.push(vec![
            k.to_string(),
            c.x.to_string(),
            c.y.to_string(),
            v.len().to_string(),
            quote(&pairs.join(" ")),
            trace.psi_tail.to_string(),
            (trace.psi_tail / f_max).to_string(),
            trace.records.iter().any(|r| r.under_resolved).to_string(),
        ]);
    }
    report.write(
        "monotonicity.csv",
        &csv(&["center", "x", "y", "violations", "pairs", "psi_tail", "tail_over_f", "under_resolved"], rows),
    )?;
    report.heading("Monotonicity");
    report.line(format!("- beta: {}", mc.beta));
    report.line(format!("- radii: {radii:?}"));
    report.line(format!("- violations: {total}"));
    if mc.require_monotone {
        report.check(
            "monotonicity",
            total == 0,
            format!("{total} decreasing steps beyond {} relative slack", mc.slack),
        );
    }
    Ok(())
}

fn decay(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let dc = &ctx.cfg.decay;
    let sol = ctx.solution()?;
    let u = &sol.field;
    let mesh = u.mesh();
    if dc.interior_x.len() != dc.interior_y.len() {
        return Err(Error::Parse("decay.interior_x and decay.interior_y differ in length".into()));
    }
    let mut centers: Vec<(&str, Point)> =
        boundary_centers(mesh.outline(), dc.boundary_centers).into_iter().map(|c| ("boundary", c)).collect();
    if dc.interior_x.is_empty() {
        // Farthest vertex from the boundary, ties to the lowest index.
        let mut best = (0.0, Point::ORIGIN);
        for p in mesh.points() {
            let d = ctx.domain.distance_to_boundary(*p);
            if d > best.0 {
                best = (d, *p);
            }
        }
        centers.push(("interior", best.1));
    } else {
        centers.extend(dc.interior_x.iter().zip(&dc.interior_y).map(|(&x, &y)| ("interior", Point::new(x, y))));
    }
    let radii = dyadic_count(dc.r_max * mesh.r0(), dc.radii);
    let bound = dc.beta;
    let mut data = Vec::new();
    let mut fits = Vec::new();
    let mut worst: Option<f64> = Some(f64::INFINITY);
    for (kind, c) in centers {
        let fit = energy_decay_fit(u, c, &radii)?;
        for (r, e) in fit.radii.iter().zip(&fit.energies) {
            data.push(vec![kind.into(), c.x.to_string(), c.y.to_string(), r.to_string(), e.to_string(), r.ln().to_string(), e.ln().to_string()]);
        }
        worst = match (worst, fit.slope) {
            (Some(w), Some(s)) => Some(w.min(s)),
            _ => None,
        };
        fits.push(vec![
            kind.into(),
            c.x.to_string(),
            c.y.to_string(),
            opt(fit.slope),
            opt(fit.intercept),
            opt(fit.rms),
            fit.under_resolved.to_string(),
        ]);
    }
    report.write("decay.csv", &csv(&["kind", "center_x", "center_y", "r", "energy", "log_r", "log_energy"], data))?;
    report.write(
        "decay_fits.csv",
        &csv(&["kind", "center_x", "center_y", "slope", "intercept", "rms", "under_resolved"], fits),
    )?;
    report.heading("Energy decay");
    report.line(format!("- radii: {radii:?}"));
    report.line(format!("- expected slope N - 2 + beta = {bound}"));
    report.check(
        "energy decay",
        worst.is_some_and(|w| w >= bound - dc.slack),
        match worst {
            Some(w) => format!("smallest slope {w} vs {bound} - {}", dc.slack),
            None => "degenerate fit".into(),
        },
    );
    Ok(())
}

fn holder(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let hc = &ctx.cfg.holder;
    let th = flatness_threshold(2, 2.0 * hc.alpha)?;
    let flat = ctx.flatness()?;
    report.write("threshold.json", &serde_json::to_string_pretty(&th)?)?;
    report.heading("Hölder regularity");
    report.line(format!("- target alpha: {} (beta = {})", hc.alpha, 2.0 * hc.alpha));
    report.line(format!("- eps_max: {}{}", th.eps_max, th.flag().map(|f| format!(" ({f})")).unwrap_or_default()));
    report.line(format!("- eps_global: {}", flat.eps_global));
    if hc.certify {
        report.check(
            "flatness certificate",
            flat.eps_global <= th.eps_max,
            format!("eps_global {} vs eps_max {}", flat.eps_global, th.eps_max),
        );
    }

    let base = triangulate(&ctx.domain, ctx.cfg.mesh.h)?;
    let center = match (hc.center_x, hc.center_y) {
        (Some(x), Some(y)) => Point::new(x, y),
        (None, None) => base.outline()[0],
        _ => return Err(Error::Parse("holder.center_x and holder.center_y must be given together".into())),
    };
    let sol = ctx.solve_on(refine_toward(&base, center, hc.refine_levels)?)?;
    let u = &sol.field;
    let region = RegionSpec { center, radius: hc.region * ctx.domain.r0() };
    let fit = holder_exponent_fit(u, region, hc.pair_budget, ctx.cfg.seed)?;
    report.write(
        "holder_bins.csv",
        &csv(
            &["s_lo", "s_hi", "oscillation", "pairs"],
            fit.bins.iter().map(|b| vec![b.s_lo.to_string(), b.s_hi.to_string(), b.oscillation.to_string(), b.pairs.to_string()]),
        ),
    )?;
    report.line(format!("- centre: ({}, {}), region radius {}", center.x, center.y, region.radius));
    report.line(format!("- refined mesh: {} vertices", u.mesh().num_points()));
    report.line(format!("- alpha_hat: {}", fit.alpha_hat.map(|a| a.to_string()).unwrap_or_else(|| "degenerate".into())));
    report.line(format!("- C_hat: {}", opt(fit.c_hat)));
    if hc.assert_alpha {
        let need = hc.alpha - hc.alpha_slack;
        report.check(
            "holder exponent",
            fit.alpha_hat.is_some_and(|a| a >= need),
            format!("alpha_hat {} vs alpha - slack = {need}", opt(fit.alpha_hat)),
        );
    }
    if let Some(range) = &hc.alpha_range {
        let [lo, hi] = range[..] else {
            return Err(Error::Parse("holder.alpha_range needs two entries".into()));
        };
        report.check(
            "holder exponent range",
            fit.alpha_hat.is_some_and(|a| (lo..=hi).contains(&a)),
            format!("alpha_hat {} vs [{lo}, {hi}]", opt(fit.alpha_hat)),
        );
    }

    let lambda = 2.0 + hc.alpha;
    let centers = boundary_centers(u.mesh().outline(), hc.campanato_centers);
    let radii = dyadic_count(0.5 * ctx.domain.r0(), hc.campanato_radii);
    let camp = campanato_seminorm(u, lambda, &centers, &radii)?;
    report.write(
        "campanato.csv",
        &csv(
            &["center_x", "center_y", "r", "oscillation", "quotient"],
            camp.entries.iter().map(|e| {
                vec![e.center.x.to_string(), e.center.y.to_string(), e.radius.to_string(), e.oscillation.to_string(), e.quotient.to_string()]
            }),
        ),
    )?;
    report.line(format!("- Campanato seminorm (lambda = {lambda}): {}", camp.value));
    report.check("campanato finite", camp.value.is_finite(), format!("seminorm {}", camp.value));
    Ok(())
}

fn exponents(ctx: &Context<'_>, report: &mut Report) -> Result<()> {
    let ec = &ctx.cfg.exponents;
    let mut cor1 = Vec::new();
    let mut cor2 = Vec::new();
    let mut bundles = Vec::new();
    for &n in &ec.n {
        for &q in &ec.q {
            let b = alpha_max_cor1(n, q);
            cor1.push(vec![n.to_string(), q.to_string(), b.alpha_max.to_string(), b.valid.to_string(), quote(b.reason.as_deref().unwrap_or(""))]);
            for &r in &ec.r {
                if let Some(b) = alpha_max_cor2(n, r, q) {
                    cor2.push(vec![
                        n.to_string(),
                        r.to_string(),
                        q.to_string(),
                        b.alpha_max.to_string(),
                        b.valid.to_string(),
                        quote(b.reason.as_deref().unwrap_or("")),
                    ]);
                }
            }
            for &p in &ec.p {
                for &a in &ec.alpha {
                    bundles.push(bundle_from_pq(n, p, q, a));
                }
            }
        }
    }
    let cor1_csv = csv(&["n", "q", "alpha_max", "valid", "reason"], cor1);
    report.write("cor1.csv", &cor1_csv)?;
    report.write("cor2.csv", &csv(&["n", "r", "q", "alpha_max", "valid", "reason"], cor2))?;
    report.write(
        "bundles.csv",
        &csv(
            &["n", "p", "q", "p0", "alpha", "alpha_max", "beta", "sigma_star", "t_star", "eps_max", "unconditional", "valid", "reason"],
            bundles.iter().map(|b| {
                vec![
                    b.n.to_string(),
                    b.p.to_string(),
                    b.q.to_string(),
                    b.p0.to_string(),
                    b.alpha.to_string(),
                    b.alpha_max.to_string(),
                    b.beta.to_string(),
                    b.sigma_star.to_string(),
                    opt(b.t_star),
                    opt(b.eps_max),
                    b.unconditional.to_string(),
                    b.valid.to_string(),
                    quote(b.reason.as_deref().unwrap_or("")),
                ]
            }),
        ),
    )?;
    report.write("bundles.json", &serde_json::to_string_pretty(&bundles)?)?;
    report.heading("Exponents");
    report.line("```text");
    report.line(cor1_csv.trim_end());
    report.line("```");
    Ok(())
}
