//! One function per experiment. Each returns its tables and an optional
//! figure; writing them out is the caller's job.

use crate::config::{parse_complex, Command, Resolved};
use crate::svg::{Bounds, Figure, Layer};
use crate::table::{Cell, ResultTable};
use conebook_core::cone::{check_adapted, ConeField, FieldSpec};
use conebook_core::geometry::{contact_volume, round_volume, PageMeasure, PagePoint, StandardContact};
use conebook_core::invariants::{
    calabi, calabi_growth, integrability_max, integrability_mean, page_uniform_stats, Section, VolumeKind,
};
use conebook_core::reach::{
    corollary_bound, halfspace_reach_mc, prob_formula, prob_mc, reach_radius, reach_radius_tan_full, HalfSpaceState,
    ReachLaw, VelocityModel,
};
use conebook_core::region::{region_mass, Annulus, Disk, EmptySet, FullPage, HalfPlane, IndicatorGrid, PageSet};
use conebook_core::rng::par_map_streams;
use conebook_core::stats::{mean_stderr, variance_stderr, Proportion};
use conebook_core::stochastic::{
    euler_maruyama_cone, euler_maruyama_halfspace, recurrence_experiment, InteriorMode, SdeConfig, Volatility,
};
use conebook_core::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::path::Path;

pub struct Output {
    /// The first table is the primary one.
    pub tables: Vec<ResultTable>,
    pub figure: Option<Figure>,
}

pub fn run(command: Command, r: &Resolved) -> Result<Output> {
    match command {
        Command::Reach => reach(r),
        Command::Prob => prob(r),
        Command::Invariants => invariants(r),
        Command::Calabi => calabi_cmd(r),
        Command::Qstats => qstats(r),
        Command::Sde => sde(r),
        Command::Recur => recur(r),
        Command::CheckAdapted => check(r),
    }
}

pub fn measure(r: &Resolved) -> Result<PageMeasure> {
    PageMeasure::parse(r.str("measure"))
}

fn field_spec(r: &Resolved) -> Result<FieldSpec> {
    Ok(match r.str("field.kind") {
        "hopf" => FieldSpec::Hopf,
        "constant" => FieldSpec::Constant { alpha0: r.f64("field.alpha0")? },
        "collared" => FieldSpec::Collared { alpha0: r.f64("field.alpha0")?, collar_eps: r.f64("field.collar_eps")? },
        "fan" => FieldSpec::Fan,
        "tabulated" => FieldSpec::Tabulated { path: r.str("field.path").to_string() },
        other => return Err(Error::InvalidInput(format!("unknown field.kind '{other}'"))),
    })
}

fn field(r: &Resolved) -> Result<Box<dyn ConeField>> {
    field_spec(r)?.build()
}

fn section(r: &Resolved) -> Result<Section> {
    let s = match r.str("section.kind") {
        "reeb_hopf" => Section::ReebHopf,
        "perturbed_flow" => Section::PerturbedFlow { epsilon: r.f64("section.epsilon")? },
        "trajectory_family" => Section::TrajectoryFamily {
            alpha0: r.f64("field.alpha0")?,
            collar_eps: r.f64("field.collar_eps")?,
            tilt: r.f64("section.tilt")?,
        },
        other => return Err(Error::InvalidInput(format!("unknown section.kind '{other}'"))),
    };
    s.validate()?;
    Ok(s)
}

fn source_disk(r: &Resolved) -> Result<Disk> {
    let a = Disk::new(r.complex("A.center")?, r.f64("A.radius")?);
    if a.center.norm() >= 1.0 {
        return Err(Error::InvalidInput("A.center must lie inside the page".into()));
    }
    Ok(a)
}

fn target_set(r: &Resolved, a: &Disk, t: f64) -> Result<Box<dyn PageSet>> {
    let center = || -> Result<Complex64> {
        match r.str("B.center") {
            "image" => Ok(Complex64::from_polar(1.0, t) * a.center),
            s => parse_complex(s).map_err(|_| Error::InvalidInput(format!("B.center = '{s}' is not a point re,im"))),
        }
    };
    Ok(match r.str("B.kind") {
        "disk" => Box::new(Disk::new(center()?, r.f64("B.radius")?)),
        "annulus" => {
            let (inner, outer) = (r.f64("B.inner")?, r.f64("B.outer")?);
            if !(0.0 <= inner && inner <= outer) {
                return Err(Error::InvalidInput("annulus needs 0 <= B.inner <= B.outer".into()));
            }
            Box::new(Annulus { center: center()?, inner, outer })
        }
        "grid" => Box::new(IndicatorGrid::load(Path::new(r.str("B.path")))?),
        "page" => Box::new(FullPage),
        "empty" => Box::new(EmptySet),
        other => return Err(Error::InvalidInput(format!("unknown B.kind '{other}'"))),
    })
}

fn c_pair(w: Complex64) -> (f64, f64) {
    (w.re, w.im)
}

fn page_outline() -> Layer {
    Layer::Circle { label: "page boundary".into(), color: "gray".into(), center: (0.0, 0.0), radius: 1.0 }
}

fn reach(r: &Resolved) -> Result<Output> {
    let (t, theta, n, seed) = (r.f64("t")?, r.f64("theta")?, r.usize("n")?, r.u64("seed")?);
    let radius = reach_radius(t, theta)?;
    let tan_full = reach_radius_tan_full(t, theta);
    let mc = halfspace_reach_mc(theta, t, n, seed)?;
    let inside = mc.endpoints.iter().filter(|e| e.horizontal_radius() <= radius + 1e-9).count();
    let rel_err = if radius > 0.0 { (mc.max_radius - radius).abs() / radius } else { mc.max_radius };

    let mut table = ResultTable::new(
        "reach",
        &["t", "theta", "half_angle", "radius", "radius_tan_full", "mc_max_radius", "mc_rel_err", "inside_fraction", "n"],
    );
    table.push(vec![
        Cell::Float(t),
        Cell::Angle(theta),
        Cell::Angle(0.5 * theta),
        Cell::Float(radius),
        Cell::Float(tan_full),
        Cell::Float(mc.max_radius),
        Cell::Float(rel_err),
        Cell::Prob(inside as f64 / n as f64),
        Cell::Int(n as i64),
    ]);

    let mut fig = Figure::new(&format!("endpoints at height t = {t}, theta = {theta}"), "x", "y");
    fig.equal_aspect = true;
    fig.layers.push(Layer::Points {
        label: "endpoints".into(),
        color: "steelblue".into(),
        points: mc.endpoints.iter().map(|e| (e.x, e.y)).collect(),
    });
    fig.layers.push(Layer::Circle { label: "t tan(theta/2)".into(), color: "crimson".into(), center: (0.0, 0.0), radius });
    if tan_full.is_finite() {
        fig.layers.push(Layer::Circle {
            label: "t tan(theta)".into(),
            color: "darkorange".into(),
            center: (0.0, 0.0),
            radius: tan_full,
        });
    }
    Ok(Output { tables: vec![table], figure: Some(fig) })
}

fn prob(r: &Resolved) -> Result<Output> {
    let m = measure(r)?;
    let (t, n, seed) = (r.f64("t")?, r.usize("n")?, r.u64("seed")?);
    let a = source_disk(r)?;
    let b = target_set(r, &a, t)?;
    let model = VelocityModel::parse(r.str("velocity_model"))?;
    let needs_field = r.bool("prob.mc")? || r.str("theta") == "field";
    let f = if needs_field { Some(field(r)?) } else { None };
    let theta = match r.str("theta") {
        "field" => integrability_max(f.as_deref().expect("field built"), r.usize("prob.bound_samples")?, seed)?.value,
        _ => r.f64("theta")?,
    };

    let mut table = ResultTable::new("prob", &["quantity", "law", "value", "stderr", "ci_lo", "ci_hi", "n"]);
    let mut fig = Figure::new(&format!("prob: t = {t}, theta = {theta}"), "Re w", "Im w");
    fig.equal_aspect = true;
    fig.layers.push(page_outline());
    fig.layers.push(Layer::Circle { label: "A".into(), color: "black".into(), center: c_pair(a.center), radius: a.radius });
    let b_circles = b.boundary_circles();
    for (i, (c, rad)) in b_circles.iter().enumerate() {
        let label = if i == 0 { "B" } else { "" };
        fig.layers.push(Layer::Circle { label: label.into(), color: "seagreen".into(), center: c_pair(*c), radius: *rad });
    }

    table.push(vec![
        Cell::text("theta"),
        Cell::text("-"),
        Cell::Angle(theta),
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
    ]);
    table.push(vec![
        Cell::text("mass_B"),
        Cell::text("-"),
        Cell::Float(region_mass(b.as_ref(), m, Complex64::new(0.0, 0.0))?),
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
    ]);
    for law in ReachLaw::ALL {
        let pf = prob_formula(&a, b.as_ref(), t, theta, m, law)?;
        let row = |q: &str, v: Cell| vec![Cell::text(q), Cell::text(law.tag()), v, Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing];
        table.push(row("reach_radius", Cell::Float(pf.disk.radius)));
        table.push(row("formula", Cell::Float(pf.value)));
        table.push(row("formula_conditional", pf.conditional.map_or(Cell::Missing, Cell::Prob)));
        fig.layers.push(Layer::Circle {
            label: format!("reach disk ({})", law.tag()),
            color: if law == ReachLaw::AreaScaled { "crimson".into() } else { "darkorange".into() },
            center: c_pair(pf.disk.center.w),
            radius: pf.disk.radius,
        });
    }

    if let (true, Some(f)) = (r.bool("prob.mc")?, f.as_deref()) {
        let mc = prob_mc(f, &a, b.as_ref(), t, n, seed, model, r.f64("prob.step_h")?)?;
        let p = mc.proportion;
        table.push(vec![
            Cell::text("mc"),
            Cell::text(model.name()),
            Cell::Prob(p.estimate),
            Cell::Float(p.stderr),
            Cell::Prob(p.ci_lo),
            Cell::Prob(p.ci_hi),
            Cell::Int(n as i64),
        ]);
        let bound = corollary_bound(f, &a, b.as_ref(), t, m, r.usize("prob.bound_samples")?, seed)?;
        table.push(vec![
            Cell::text("corollary_bound"),
            Cell::text(ReachLaw::AreaScaled.tag()),
            Cell::Float(bound.bound),
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
        ]);
        table.push(vec![
            Cell::text("corollary_i_max"),
            Cell::text("-"),
            Cell::Angle(bound.i_max),
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
        ]);
        fig.layers.insert(
            0,
            Layer::Points { label: "endpoints".into(), color: "steelblue".into(), points: mc.endpoints.iter().map(|w| c_pair(*w)).collect() },
        );
    }
    Ok(Output { tables: vec![table], figure: Some(fig) })
}

fn invariants(r: &Resolved) -> Result<Output> {
    let f = field(r)?;
    let (n, seed) = (r.usize("invariants.samples")?, r.u64("seed")?);
    let volume = VolumeKind::parse(r.str("invariants.volume"))?;
    let mean = integrability_mean(f.as_ref(), n, seed, volume)?;
    let max = integrability_max(f.as_ref(), n, seed)?;
    let page_area = region_mass(&FullPage, PageMeasure::Contact, Complex64::new(0.0, 0.0))?;

    let mut table = ResultTable::new("invariants", &["quantity", "value", "stderr", "n"]);
    let mut push = |q: &str, v: Cell, se: Cell, n: Cell| table.push(vec![Cell::text(q), v, se, n]);
    push(&format!("I_m_{}", volume.name()), Cell::Float(mean.value), Cell::Float(mean.stderr), Cell::Int(n as i64));
    push("I_M", Cell::Angle(max.value), Cell::Missing, Cell::Int(n as i64));
    push("I_M_sample_max", Cell::Angle(max.sample_max), Cell::Missing, Cell::Int(n as i64));
    push("I_M_polish_delta", Cell::Float(max.polish_delta), Cell::Missing, Cell::Missing);
    push("contact_volume", Cell::Float(contact_volume()), Cell::Missing, Cell::Missing);
    push("round_volume", Cell::Float(round_volume()), Cell::Missing, Cell::Missing);
    push("fubini_volume", Cell::Float(TAU * page_area), Cell::Missing, Cell::Missing);
    Ok(Output { tables: vec![table], figure: None })
}

fn calabi_region(r: &Resolved) -> Result<Box<dyn PageSet>> {
    Ok(match r.str("calabi.region") {
        "page" => Box::new(FullPage),
        "half" => Box::new(HalfPlane { normal: Complex64::new(1.0, 0.0), offset: 0.0 }),
        "disk" => Box::new(source_disk(r)?),
        other => return Err(Error::InvalidInput(format!("unknown calabi.region '{other}'"))),
    })
}

fn calabi_cmd(r: &Resolved) -> Result<Output> {
    let m = measure(r)?;
    let s = section(r)?;
    let a = calabi_region(r)?;
    let cap = r.f64("calabi.tau_cap")?;
    let n_max = r.usize("calabi.n_max")?;
    let origin = Complex64::new(0.0, 0.0);

    let mut table = ResultTable::new("calabi", &["quantity", "measure", "value"]);
    table.push(vec![Cell::text("cal"), Cell::text(m.name()), Cell::Float(calabi(&s, a.as_ref(), m, cap)?)]);
    for other in [PageMeasure::Contact, PageMeasure::Normalized] {
        if other != m {
            table.push(vec![Cell::text("cal"), Cell::text(other.name()), Cell::Float(calabi(&s, a.as_ref(), other, cap)?)]);
        }
    }
    table.push(vec![Cell::text("mass_A"), Cell::text(m.name()), Cell::Float(region_mass(a.as_ref(), m, origin)?)]);
    table.push(vec![Cell::text("contact_volume"), Cell::text("-"), Cell::Float(contact_volume())]);

    let rows = calabi_growth(&s, a.as_ref(), m, n_max, cap)?;
    let mut growth = ResultTable::new("growth", &["n", "cal_n", "cal_n_over_n", "mass"]);
    for g in &rows {
        growth.push(vec![Cell::Int(g.n as i64), Cell::Float(g.cal_n), Cell::Float(g.cal_n_over_n), Cell::Float(g.mass)]);
    }
    let mut fig = Figure::new(&format!("Calabi growth: {}", s.name()), "n", "CAL^n / n");
    fig.layers.push(Layer::Polyline {
        label: "CAL^n / n".into(),
        color: "crimson".into(),
        points: rows.iter().map(|g| (g.n as f64, g.cal_n_over_n)).collect(),
    });
    Ok(Output { tables: vec![table, growth], figure: Some(fig) })
}

fn qstats(r: &Resolved) -> Result<Output> {
    let m = measure(r)?;
    let s = page_uniform_stats(m)?;
    let mut table = ResultTable::new("qstats", &["quantity", "value", "note"]);
    table.push(vec![Cell::text("mean_re"), Cell::Float(s.mean.re), Cell::text("page center is 0")]);
    table.push(vec![Cell::text("mean_im"), Cell::Float(s.mean.im), Cell::text("page center is 0")]);
    table.push(vec![Cell::text("page_mass"), Cell::Float(s.page_mass), Cell::text(m.name())]);
    table.push(vec![
        Cell::text("variance"),
        Cell::Float(s.variance),
        Cell::text("second central moment of the uniform disk of this area"),
    ]);
    table.push(vec![
        Cell::text("variance_interval"),
        Cell::Float(s.variance_interval),
        Cell::text("mu(P)^2/12, the variance of a uniform interval of that length"),
    ]);
    table.push(vec![
        Cell::text("discrepancy"),
        Cell::Float(s.variance_interval - s.variance),
        Cell::text("the two readings disagree; both are reported"),
    ]);
    Ok(Output { tables: vec![table], figure: None })
}

fn sde_config(r: &Resolved) -> Result<SdeConfig> {
    let mut cfg = SdeConfig::new(
        Volatility::parse(r.str("sde.sigma"))?,
        r.f64("sde.mu3")?,
        r.f64("sde.step_h")?,
        r.f64("sde.horizon")?,
        r.u64("seed")?,
    );
    cfg.mode = InteriorMode::parse(r.str("sde.mode"))?;
    cfg.drift_enabled = r.bool("sde.drift")?;
    cfg.record_stride = 0;
    cfg.validate()?;
    Ok(cfg)
}

fn sde(r: &Resolved) -> Result<Output> {
    let cfg = sde_config(r)?;
    let s = section(r)?;
    let paths = r.usize("sde.paths")?;
    if paths < 2 {
        return Err(Error::InvalidInput("sde.paths must be at least 2".into()));
    }
    let start = r.complex("sde.start")?;
    let mut table = ResultTable::new("sde", &["quantity", "value", "stderr", "expected", "n"]);
    let mut fig = Figure::new("sde endpoints", "x", "y");
    fig.equal_aspect = true;
    match r.str("sde.model") {
        "halfspace" => {
            let z0 = r.f64("sde.start_z")?;
            let s0 = HalfSpaceState { x: start.re, y: start.im, z: z0 };
            let runs = par_map_streams(cfg.seed, paths, |_, rng| euler_maruyama_halfspace(&cfg, &s, s0, rng));
            let mut ends = Vec::with_capacity(paths);
            let mut crossings = Vec::with_capacity(paths);
            for p in runs {
                let p = p?;
                crossings.push(p.crossings.len() as f64);
                ends.push(p.end);
            }
            let t = cfg.steps() as f64 * cfg.step_h;
            let dx: Vec<f64> = ends.iter().map(|e| e.x - s0.x).collect();
            let dy: Vec<f64> = ends.iter().map(|e| e.y - s0.y).collect();
            let dz: Vec<f64> = ends.iter().map(|e| e.z - s0.z).collect();
            let var_expected = match &cfg.sigma {
                Volatility::Constant(sig) => Cell::Float(sig * sig * t),
                Volatility::Expr { .. } => Cell::Missing,
            };
            let drift_expected = match (s, cfg.drift_enabled) {
                (_, false) => Cell::Float(0.0),
                (Section::ReebHopf, true) => Cell::Float(cfg.mu3 * TAU * t),
                _ => Cell::Missing,
            };
            let n = Cell::Int(paths as i64);
            for (name, xs) in [("var_x", &dx), ("var_y", &dy), ("var_z", &dz)] {
                let (v, se) = variance_stderr(xs);
                table.push(vec![Cell::text(name), Cell::Float(v), Cell::Float(se), var_expected.clone(), n.clone()]);
            }
            for (name, xs, exp) in [("mean_dx", &dx, Cell::Float(0.0)), ("mean_dy", &dy, Cell::Float(0.0)), ("mean_dz", &dz, drift_expected)] {
                let (v, se) = mean_stderr(xs);
                table.push(vec![Cell::text(name), Cell::Float(v), Cell::Float(se), exp, n.clone()]);
            }
            let (c, se) = mean_stderr(&crossings);
            table.push(vec![Cell::text("mean_crossings"), Cell::Float(c), Cell::Float(se), Cell::Missing, n.clone()]);
            fig.layers.push(Layer::Points {
                label: "endpoints (x, y)".into(),
                color: "steelblue".into(),
                points: ends.iter().map(|e| (e.x, e.y)).collect(),
            });
        }
        "cone" => {
            let f = field(r)?;
            let p0 = PagePoint::new(0.0, start)?.to_sphere();
            let runs = par_map_streams(cfg.seed, paths, |_, rng| euler_maruyama_cone(&cfg, f.as_ref(), &s, &p0, rng));
            let mut lifts = Vec::new();
            let mut crossings = Vec::new();
            let mut ends = Vec::new();
            let mut stuck = 0;
            for p in runs {
                match p {
                    Ok(p) => {
                        lifts.push(p.end_lift);
                        crossings.push(p.crossings.len() as f64);
                        ends.push(p.end.z1);
                    }
                    Err(Error::StuckAtBinding { .. }) => stuck += 1,
                    Err(e) => return Err(e),
                }
            }
            let n = Cell::Int(paths as i64);
            let (l, lse) = mean_stderr(&lifts);
            table.push(vec![Cell::text("mean_lift"), Cell::Float(l), Cell::Float(lse), Cell::Missing, n.clone()]);
            let (c, cse) = mean_stderr(&crossings);
            table.push(vec![Cell::text("mean_crossings"), Cell::Float(c), Cell::Float(cse), Cell::Missing, n.clone()]);
            let st = Proportion::new(stuck, paths);
            table.push(vec![Cell::text("stuck_fraction"), Cell::Prob(st.estimate), Cell::Float(st.stderr), Cell::Missing, n]);
            fig.layers.push(page_outline());
            fig.layers.push(Layer::Points {
                label: "endpoint page coordinates".into(),
                color: "steelblue".into(),
                points: ends.iter().map(|w| c_pair(*w)).collect(),
            });
        }
        other => return Err(Error::InvalidInput(format!("unknown sde.model '{other}'"))),
    }
    Ok(Output { tables: vec![table], figure: Some(fig) })
}

fn recur(r: &Resolved) -> Result<Output> {
    let base = sde_config(r)?;
    let f = field(r)?;
    let s = section(r)?;
    let start = r.complex("recurrence.start")?;
    let center = match r.str("recurrence.U.center") {
        "start" => start,
        _ => r.complex("recurrence.U.center")?,
    };
    let u = Disk::new(center, r.f64("recurrence.U.radius")?);
    let n_paths = r.usize("recurrence.n_paths")?;
    let max_returns = r.usize("recurrence.max_returns")?;
    let modes = r
        .str("recurrence.modes")
        .split(',')
        .map(|m| InteriorMode::parse(m.trim()))
        .collect::<Result<Vec<_>>>()?;
    if modes.is_empty() {
        return Err(Error::InvalidInput("recurrence.modes is empty".into()));
    }

    let mut table = ResultTable::new(
        "recur",
        &["mode", "horizon", "hit_fraction", "ci_lo", "ci_hi", "ci_width", "trunc_mean", "median", "n_paths", "stuck"],
    );
    let mut summary = ResultTable::new("summary", &["mode", "final_hit_fraction", "survival_slope", "stuck"]);
    let mut paths = ResultTable::new("paths", &["mode", "path", "first_hit", "censored"]);
    let mut fig = Figure::new("recurrence: hit fraction by return index", "return index n", "hit fraction");
    fig.bounds = Some(Bounds { x0: 0.0, x1: max_returns as f64, y0: 0.0, y1: 1.0 });
    let colors = ["crimson", "steelblue", "seagreen"];
    let mut reports = Vec::new();
    for (i, mode) in modes.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.mode = *mode;
        let rep = recurrence_experiment(&cfg, f.as_ref(), &s, start, &u, n_paths, max_returns)?;
        for h in &rep.horizons {
            let p = h.hit_fraction;
            table.push(vec![
                Cell::text(mode.name()),
                Cell::Int(h.horizon as i64),
                Cell::Prob(p.estimate),
                Cell::Prob(p.ci_lo),
                Cell::Prob(p.ci_hi),
                Cell::Float(p.ci_width()),
                Cell::Float(h.trunc_mean),
                Cell::Float(h.median),
                Cell::Int(n_paths as i64),
                Cell::Int(rep.stuck as i64),
            ]);
        }
        summary.push(vec![
            Cell::text(mode.name()),
            Cell::Prob(rep.curve.last().copied().unwrap_or(0.0)),
            Cell::opt(rep.survival_slope),
            Cell::Int(rep.stuck as i64),
        ]);
        for (k, h) in rep.first_hits.iter().enumerate() {
            paths.push(vec![
                Cell::text(mode.name()),
                Cell::Int(k as i64),
                h.map_or(Cell::Missing, |v| Cell::Int(v as i64)),
                Cell::Bool(h.is_none()),
            ]);
        }
        fig.layers.push(Layer::Polyline {
            label: mode.name().into(),
            color: colors[i % colors.len()].into(),
            points: rep.curve.iter().enumerate().map(|(n, f)| ((n + 1) as f64, *f)).collect(),
        });
        reports.push(rep);
    }
    let mut tables = vec![table, summary, paths];
    if reports.len() >= 2 {
        let mut agree = ResultTable::new("agreement", &["horizon", "diff", "tolerance", "agree"]);
        for (j, h) in reports[0].horizons.iter().enumerate() {
            let (p0, p1) = (h.hit_fraction, reports[1].horizons[j].hit_fraction);
            let diff = (p0.estimate - p1.estimate).abs();
            let tol = 2.0 * p0.ci_width().max(p1.ci_width());
            agree.push(vec![Cell::Int(h.horizon as i64), Cell::Float(diff), Cell::Float(tol), Cell::Bool(diff <= tol)]);
        }
        tables.push(agree);
    }
    Ok(Output { tables, figure: Some(fig) })
}

fn check(r: &Resolved) -> Result<Output> {
    let f = field(r)?;
    let report = check_adapted(f.as_ref(), &StandardContact, r.usize("check.samples")?, r.f64("check.tol")?, r.u64("seed")?)?;
    let mut table = ResultTable::new(
        "check",
        &["flag", "passed", "checked", "violations", "worst_margin", "witness_z1_re", "witness_z1_im", "witness_z2_re", "witness_z2_im"],
    );
    for flag in &report.flags {
        let w = flag.worst_point;
        let part = |g: fn(&conebook_core::geometry::SpherePoint) -> f64| w.as_ref().map_or(Cell::Missing, |p| Cell::Float(g(p)));
        table.push(vec![
            Cell::text(flag.name),
            Cell::Bool(flag.passed),
            Cell::Int(flag.checked as i64),
            Cell::Int(flag.violations as i64),
            Cell::Float(flag.worst_margin),
            part(|p| p.z1.re),
            part(|p| p.z1.im),
            part(|p| p.z2.re),
            part(|p| p.z2.im),
        ]);
    }
    table.push(vec![
        Cell::text("all"),
        Cell::Bool(report.all_passed()),
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
        Cell::Missing,
    ]);
    Ok(Output { tables: vec![table], figure: None })
}
