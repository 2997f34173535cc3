//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed. Exits
//! non-zero if a criterion fails that is not listed in `KNOWN_FAILURES`.

use conebook::commands;
use conebook::config::{Command, Config};
use conebook::table::{Cell, ResultTable};
use conebook_core::cone::{
    angle_between3, check_adapted, ring_around, smoothstep, AdaptednessReport, CollaredConeField, ConeField,
    ConstantConeField, HopfRayField,
};
use conebook_core::geometry::{contact_volume, dtheta_frame, PageMeasure, SpherePoint, StandardContact};
use conebook_core::invariants::{calabi, calabi_growth, integrability_max, integrability_mean, page_uniform_stats, Section, VolumeKind};
use conebook_core::reach::{
    corollary_bound, halfspace_reach_mc, prob_formula, prob_mc, reach_radius, reach_radius_tan_full, HalfSpaceState,
    ReachLaw, VelocityModel,
};
use conebook_core::region::{Disk, FullPage};
use conebook_core::rng::{par_map_streams, stream_rng};
use conebook_core::stats::{mean_stderr, variance_stderr};
use conebook_core::stochastic::{euler_maruyama_halfspace, SdeConfig, Volatility};
use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fs;
use std::path::Path;
use std::process::{Command as Process, ExitCode};
use std::time::Instant;

/// Criteria that fail for reasons recorded in the README's "Known results".
const KNOWN_FAILURES: &[u32] = &[3];

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self { passed, summary: summary.into(), details: Vec::new() }
    }

    fn detail(mut self, lines: Vec<String>) -> Self {
        self.details = lines;
        self
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "reach law against half-space Monte Carlo", criterion_1),
        (2, "reach radius anchors", criterion_2),
        (3, "reach probability bound and formula oracle", criterion_3),
        (4, "integrability measures", criterion_4),
        (5, "Calabi identity", criterion_5),
        (6, "Calabi growth", criterion_6),
        (7, "page statistics", criterion_7),
        (8, "SDE moments", criterion_8),
        (9, "probabilistic recurrence", criterion_9),
        (10, "adaptedness checker", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (k, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let known = !o.passed && KNOWN_FAILURES.contains(&k);
        println!(
            "{tag} criterion {k:>2} ({name}): {}{} [{:.1}s]",
            o.summary,
            if known { " (known failure)" } else { "" },
            start.elapsed().as_secs_f64()
        );
        for d in &o.details {
            println!("      {d}");
        }
        if !o.passed && !known {
            unexpected.push(k);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

fn criterion_1() -> Outcome {
    let thetas = [0.2, 0.5, FRAC_PI_4, FRAC_PI_2, 2.0];
    let ts = [0.5, 1.0, 2.0];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (i, &theta) in thetas.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let radius = t * (theta / 2.0).tan();
            let mc = halfspace_reach_mc(theta, t, 100_000, (10 * i + j) as u64).unwrap();
            let rel = (mc.max_radius - radius).abs() / radius;
            let outside = mc.endpoints.iter().filter(|e| e.horizontal_radius() > radius + 1e-9).count();
            ok &= rel <= 0.02 && outside == 0;
            worst = worst.max(rel);
            lines.push(format!(
                "theta={theta:.4} t={t}: t*tan(theta/2)={radius:.6} mc_max={:.6} rel_err={rel:.2e} outside={outside} t*tan(theta)={}",
                mc.max_radius,
                fmt_radius(reach_radius_tan_full(t, theta))
            ));
        }
    }
    Outcome::new(ok, format!("worst relative error {worst:.2e} (tolerance 2e-2), all endpoints inside +1e-9: {ok}")).detail(lines)
}

fn fmt_radius(r: f64) -> String {
    if r.is_finite() { format!("{r:.6}") } else { "inf".into() }
}

fn criterion_2() -> Outcome {
    let zero_ok = [0.0, 0.5, 1.0, 7.0].iter().all(|&t| reach_radius(t, 0.0).unwrap() == 0.0);
    let mut grid: Vec<f64> = (0..=300).map(|k| PI * k as f64 / 301.0).collect();
    grid.extend((2..=14).map(|e| PI - 10f64.powi(-e)));
    let radii: Vec<f64> = grid.iter().map(|&th| reach_radius(1.0, th).unwrap()).collect();
    let increasing = radii.windows(2).all(|w| w[1] > w[0]);
    let last = *radii.last().unwrap();
    let diverges = last > 1e13;
    let rejects_pi = reach_radius(1.0, PI).is_err();
    let ok = zero_ok && increasing && diverges && rejects_pi;
    Outcome::new(
        ok,
        format!(
            "radius(t,0)=0 exactly: {zero_ok}; strictly increasing on {} grid angles: {increasing}; radius at pi-1e-14 = {last:.3e}; theta=pi rejected: {rejects_pi}",
            grid.len()
        ),
    )
}

/// Area of the intersection of disks, from the arcs of each boundary circle
/// that lie inside all the other disks (Green's theorem).
fn disks_intersection_area(disks: &[(Complex64, f64)]) -> f64 {
    let mut area = 0.0;
    for (i, &(ci, ri)) in disks.iter().enumerate() {
        let mut cuts = Vec::new();
        for (j, &(cj, rj)) in disks.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = (cj - ci).norm();
            if d == 0.0 || d >= ri + rj || d <= (ri - rj).abs() {
                continue;
            }
            let base = (cj - ci).arg();
            let h = ((ri * ri + d * d - rj * rj) / (2.0 * ri * d)).clamp(-1.0, 1.0).acos();
            cuts.push((base - h).rem_euclid(TAU));
            cuts.push((base + h).rem_euclid(TAU));
        }
        cuts.sort_by(f64::total_cmp);
        let arcs: Vec<(f64, f64)> = if cuts.is_empty() {
            vec![(0.0, TAU)]
        } else {
            let mut v: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
            v.push((*cuts.last().unwrap(), cuts[0] + TAU));
            v
        };
        for (a, b) in arcs {
            let mid = ci + Complex64::from_polar(ri, 0.5 * (a + b));
            let inside = disks.iter().enumerate().all(|(j, &(cj, rj))| j == i || (mid - cj).norm() <= rj);
            if inside {
                area += 0.5 * (ri * ri * (b - a) + ri * (ci.re * (b.sin() - a.sin()) - ci.im * (b.cos() - a.cos())));
            }
        }
    }
    area
}

fn criterion_3() -> Outcome {
    let field = ConstantConeField::new(0.2);
    let m = PageMeasure::Normalized;
    let density = 1.0 / PI;
    let mut bound_ok = 0;
    let mut worst_formula: f64 = 0.0;
    let mut lines = Vec::new();
    for i in 0..20u64 {
        let mut rng = stream_rng(2024, i);
        let ac = Complex64::from_polar(0.5 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let a = Disk::new(ac, 0.1 + 0.2 * rng.random::<f64>());
        let t = 0.25 + 1.25 * rng.random::<f64>();
        let off = Complex64::from_polar(0.3 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let b = Disk::new(Complex64::from_polar(1.0, t) * ac + off, 0.1 + 0.3 * rng.random::<f64>());

        let mc = prob_mc(&field, &a, &b, t, 10_000, i, VelocityModel::Cap, 1e-3).unwrap();
        let bound = corollary_bound(&field, &a, &b, t, m, 20_000, i).unwrap();
        let p = mc.proportion;
        let holds = p.estimate <= bound.bound + 2.0 * p.stderr;
        bound_ok += usize::from(holds);

        let mut readings = Vec::new();
        for law in ReachLaw::ALL {
            let pf = prob_formula(&a, &b, t, 0.4, m, law).unwrap();
            let d = pf.disk.disk();
            let oracle = density * disks_intersection_area(&[(Complex64::new(0.0, 0.0), 1.0), (d.center, d.radius), (b.center, b.radius)]);
            worst_formula = worst_formula.max((pf.value - oracle).abs());
            readings.push(format!("{}: formula={:.4e} conditional={}", law.tag(), pf.value, pf.conditional.map_or("-".into(), |c| format!("{c:.4}"))));
        }
        lines.push(format!(
            "scenario {i:>2}: t={t:.3} mc={:.4} (se {:.4}) bound={:.4e} holds={holds}; {}",
            p.estimate,
            p.stderr,
            bound.bound,
            readings.join("; ")
        ));
    }
    let formula_ok = worst_formula <= 1e-6;
    Outcome::new(
        bound_ok == 20 && formula_ok,
        format!(
            "bound holds within 2 SE in {bound_ok}/20 scenarios; prob_formula vs disk-intersection oracle max |diff| = {worst_formula:.2e} (tolerance 1e-6)"
        ),
    )
    .detail(lines)
}

fn criterion_4() -> Outcome {
    let n = 100_000;
    let hopf_mean = integrability_mean(&HopfRayField, n, 1, VolumeKind::Contact).unwrap().value;
    let hopf_max = integrability_max(&HopfRayField, n, 1).unwrap().value;
    let field = ConstantConeField::new(0.2);
    let c_max = integrability_max(&field, n, 2).unwrap().value;
    let c_mean = integrability_mean(&field, n, 2, VolumeKind::Contact).unwrap().value;
    let target = 0.4 * contact_volume();
    let rel = (c_mean - target).abs() / target;
    let ok = hopf_mean == 0.0 && hopf_max == 0.0 && (c_max - 0.4).abs() <= 1e-3 && rel <= 0.005;
    Outcome::new(
        ok,
        format!(
            "Hopf I_m={hopf_mean} I_M={hopf_max}; constant field I_M={c_max:.6} (0.4 +- 1e-3), I_m={c_mean:.6} vs {target:.6} rel {rel:.2e} (5e-3)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let cv = contact_volume();
    let cal = calabi(&Section::ReebHopf, &FullPage, PageMeasure::Contact, 1e6).unwrap();
    // page dα-area by a midpoint rule in polar coordinates (density 2)
    let (nr, nphi) = (400, 64);
    let (dr, dphi) = (1.0 / nr as f64, TAU / nphi as f64);
    let mut page_area = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) * dr;
        for _ in 0..nphi {
            page_area += 2.0 * r * dr * dphi;
        }
    }
    let fubini = TAU * page_area;
    let rel_cal = (cal - cv).abs() / cv;
    let rel_vol = (cv - fubini).abs() / fubini;
    Outcome::new(
        rel_cal <= 1e-3 && rel_vol <= 1e-3,
        format!("CAL(P)={cal:.10} contact_volume={cv:.10} rel {rel_cal:.2e}; Fubini 2pi*area={fubini:.10} rel {rel_vol:.2e} (tolerance 1e-3)"),
    )
}

fn criterion_6() -> Outcome {
    let cv = contact_volume();
    let rows = calabi_growth(&Section::ReebHopf, &FullPage, PageMeasure::Contact, 10, 1e6).unwrap();
    let worst = rows.iter().map(|g| (g.cal_n - g.n as f64 * cv).abs() / (g.n as f64 * cv)).fold(0.0, f64::max);
    let avg: Vec<f64> = rows.iter().map(|g| g.cal_n_over_n).collect();
    let (lo, hi) = avg.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let spread = (hi - lo) / (avg.iter().sum::<f64>() / avg.len() as f64);
    let raw: Vec<String> = rows.iter().map(|g| format!("{:.6}", g.cal_n)).collect();
    let averaged: Vec<String> = avg.iter().map(|v| format!("{v:.6}")).collect();
    Outcome::new(
        rows.len() == 10 && worst <= 2e-3 && spread <= 2e-3,
        format!("max rel |CAL^n - n vol| = {worst:.2e}, spread of CAL^n/n = {spread:.2e} (tolerance 2e-3)"),
    )
    .detail(vec![format!("raw CAL^n: {}", raw.join(", ")), format!("CAL^n/n: {}", averaged.join(", "))])
}

fn criterion_7() -> Outcome {
    let s = page_uniform_stats(PageMeasure::Normalized).unwrap();
    let mean_ok = s.mean.norm() <= 1e-10;
    let interval_ok = s.variance_interval == 1.0 / 12.0;
    let var_ok = (s.variance - 1.0 / (2.0 * PI)).abs() <= 1e-6;
    Outcome::new(
        mean_ok && interval_ok && var_ok,
        format!(
            "|mean|={:.2e}; variance_interval={} (1/12); measured second central moment={:.12} vs 1/(2pi)={:.12}",
            s.mean.norm(),
            s.variance_interval,
            s.variance,
            1.0 / (2.0 * PI)
        ),
    )
    .detail(vec![format!(
        "the interval reading mu(P)^2/12 and the measured moment differ by {:.6}; both are reported by qstats",
        s.variance_interval - s.variance
    )])
}

fn criterion_8() -> Outcome {
    let t = 1.0;
    let cfg = SdeConfig { record_stride: 0, ..SdeConfig::new(Volatility::Constant(1.0), 0.1, 1e-3, t, 0) };
    let s0 = HalfSpaceState { x: 0.0, y: 0.0, z: 10.0 };
    let ends: Vec<HalfSpaceState> =
        par_map_streams(cfg.seed, 10_000, |_, rng| euler_maruyama_halfspace(&cfg, &Section::ReebHopf, s0, rng).unwrap().end);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, xs) in [
        ("x", ends.iter().map(|e| e.x - s0.x).collect::<Vec<_>>()),
        ("y", ends.iter().map(|e| e.y - s0.y).collect()),
        ("z", ends.iter().map(|e| e.z - s0.z).collect()),
    ] {
        let (v, se) = variance_stderr(&xs);
        let z = (v - t).abs() / se;
        ok &= z <= 3.0;
        parts.push(format!("var_{name}={v:.4} ({z:.2} SE)"));
        if name == "z" {
            let (m, mse) = mean_stderr(&xs);
            let target = 0.1 * TAU * t;
            let zm = (m - target).abs() / mse;
            ok &= zm <= 3.0;
            parts.push(format!("E[dZ]={m:.4} vs {target:.4} ({zm:.2} SE)"));
        }
    }
    let still = SdeConfig { record_stride: 0, ..SdeConfig::new(Volatility::Constant(0.0), 0.1, 1e-3, t, 0) };
    let mut rng = stream_rng(0, 0);
    let line = euler_maruyama_halfspace(&still, &Section::ReebHopf, s0, &mut rng).unwrap().end;
    let line_ok = line.x == 0.0 && line.y == 0.0 && (line.z - (10.0 + 0.1 * TAU * t)).abs() <= 1e-12;
    parts.push(format!("sigma=0 end z={:.15} exact line: {line_ok}", line.z));
    Outcome::new(ok && line_ok, parts.join("; "))
}

fn column(t: &ResultTable, name: &str) -> usize {
    t.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name} in {}", t.name))
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Float(v) | Cell::Prob(v) | Cell::Angle(v) => *v,
        Cell::Int(v) => *v as f64,
        other => panic!("not numeric: {other:?}"),
    }
}

fn criterion_9() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/recur.conf");
    let cfg = Config::parse(&fs::read_to_string(path).unwrap()).unwrap();
    let out = commands::run(Command::Recur, &cfg.resolve()).unwrap();
    let recur = &out.tables[0];
    let (mc, hc, fc, wc, tc) =
        (column(recur, "mode"), column(recur, "horizon"), column(recur, "hit_fraction"), column(recur, "ci_width"), column(recur, "trunc_mean"));
    let mut ok = true;
    let mut lines = Vec::new();
    for mode in ["project", "reject"] {
        let rows: Vec<&Vec<Cell>> = recur.rows.iter().filter(|r| r[mc] == Cell::text(mode)).collect();
        let horizons: Vec<f64> = rows.iter().map(|r| num(&r[hc])).collect();
        let hits: Vec<f64> = rows.iter().map(|r| num(&r[fc])).collect();
        let means: Vec<f64> = rows.iter().map(|r| num(&r[tc])).collect();
        let widths: Vec<f64> = rows.iter().map(|r| num(&r[wc])).collect();
        let full = hits.last().copied().unwrap_or(0.0) >= 0.95;
        let inc_hits = hits.windows(2).all(|w| w[1] > w[0]);
        let inc_means = means.windows(2).all(|w| w[1] > w[0]);
        ok &= horizons == [50.0, 100.0, 200.0] && full && inc_hits && inc_means;
        lines.push(format!(
            "{mode}: hit fraction {hits:.3?} (CI widths {widths:.3?}), truncated mean {means:.2?}; >=0.95: {full}, increasing: {inc_hits}/{inc_means}"
        ));
    }
    let agree = out.tables.iter().find(|t| t.name == "agreement").expect("both modes ran");
    let (dc, tolc, ac) = (column(agree, "diff"), column(agree, "tolerance"), column(agree, "agree"));
    for r in &agree.rows {
        ok &= r[ac] == Cell::Bool(true);
        lines.push(format!("horizon {}: |project - reject| = {:.4}, 2 CI widths = {:.4}", num(&r[0]), num(&r[dc]), num(&r[tolc])));
    }
    let summary = out.tables.iter().find(|t| t.name == "summary").unwrap();
    for r in &summary.rows {
        let slope = match &r[2] {
            Cell::Float(v) => format!("{v:.3}"),
            _ => "-".into(),
        };
        lines.push(format!("{}: survival log-log slope {slope}", match &r[0] {
            Cell::Text(m) => m.as_str(),
            _ => "?",
        }));
    }
    Outcome::new(ok, "shipped recur.conf, 1000 paths, horizons 50/100/200, both interior modes").detail(lines)
}

/// Collared field away from the binding, a tilted ring on it.
struct BindingTilt;

impl ConeField for BindingTilt {
    fn name(&self) -> String {
        "binding-tilt".into()
    }
    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        if p.z2.norm() <= 1e-12 {
            out.extend(ring_around(&Vector3::x(), 0.2, 12));
        } else {
            CollaredConeField::new(0.2, 0.3).generator_frame(p, out);
        }
    }
}

fn contact_gradient(p: &SpherePoint) -> Option<Vector3<f64>> {
    let rates = dtheta_frame(p).ok()?;
    let perp = Vector3::new(0.0, rates[1], rates[2]);
    (perp.norm() > 1e-12).then(|| perp.normalize())
}

/// Collared ring plus one direction tilted down the open-book angle.
struct BackwardsTilt;

impl ConeField for BackwardsTilt {
    fn name(&self) -> String {
        "backwards-tilt".into()
    }
    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        let s = smoothstep(p.z2.norm() / 0.3);
        out.extend(ring_around(&Vector3::x(), 0.2 * s, 12));
        if let Some(g) = contact_gradient(p) {
            let beta = 0.6 * s;
            out.push(Vector3::x() * beta.cos() - g * beta.sin());
        }
    }
}

/// A round cone whose axis leans further from the Reeb direction than its
/// half-angle.
struct LeaningAxis;

impl ConeField for LeaningAxis {
    fn name(&self) -> String {
        "leaning-axis".into()
    }
    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        let s = smoothstep(p.z2.norm() / 0.3);
        let axis = match contact_gradient(p) {
            Some(g) => Vector3::x() * (0.2 * s).cos() + g * (0.2 * s).sin(),
            None => Vector3::x(),
        };
        out.extend(ring_around(&axis, 0.1 * s, 12));
    }
}

fn flags(r: &AdaptednessReport) -> Vec<bool> {
    r.flags.iter().map(|f| f.passed).collect()
}

fn witness_violates(field: &dyn ConeField, flag: usize, p: &SpherePoint) -> bool {
    let mut buf = Vec::new();
    field.generator_frame(p, &mut buf);
    match flag {
        0 => buf.iter().any(|d| angle_between3(d, &Vector3::x()) > 1e-9),
        1 => {
            let rates = dtheta_frame(p).unwrap();
            buf.iter().any(|d| rates.dot(d) <= 0.0)
        }
        3 => {
            let cap = field.enclosing_cap(p).unwrap();
            angle_between3(&cap.axis, &Vector3::x()) >= cap.half_angle - 1e-9
        }
        _ => unreachable!(),
    }
}

fn criterion_10() -> Outcome {
    let n = 10_000;
    let good = check_adapted(&CollaredConeField::new(0.2, 0.3), &StandardContact, n, 1e-9, 5).unwrap();
    let mut ok = good.all_passed();
    let mut lines = vec![format!("field (b) collared(0.2, 0.3): flags {:?}", flags(&good))];
    let cases: [(&dyn ConeField, usize); 3] = [(&BindingTilt, 0), (&BackwardsTilt, 1), (&LeaningAxis, 3)];
    for (field, target) in cases {
        let r = check_adapted(field, &StandardContact, n, 1e-9, 6).unwrap();
        let expected: Vec<bool> = (0..4).map(|k| k != target).collect();
        let f = &r.flags[target];
        let witness = f.worst_point.is_some_and(|p| witness_violates(field, target, &p));
        ok &= flags(&r) == expected && witness;
        lines.push(format!(
            "{}: flags {:?}, intended {} failed with {} violations, witness {:?} confirmed: {witness}",
            field.name(),
            flags(&r),
            f.name,
            f.violations,
            f.worst_point.map(|p| (p.z1, p.z2))
        ));
    }
    Outcome::new(ok, format!("{n} samples per flag; field (b) passes all four; three constructed violations fail exactly their flag")).detail(lines)
}

fn criterion_11() -> Outcome {
    let runs: [(&str, &[&str]); 8] = [
        ("reach", &["--set", "n=20000"]),
        ("prob", &["--set", "n=1000", "--set", "prob.bound_samples=5000", "--set", "field.kind=constant"]),
        ("invariants", &["--set", "invariants.samples=20000"]),
        ("calabi", &["--set", "section.kind=perturbed_flow", "--set", "calabi.n_max=2"]),
        ("qstats", &[]),
        ("sde", &["--set", "sde.paths=2000"]),
        (
            "recur",
            &[
                "--set", "recurrence.n_paths=60", "--set", "recurrence.max_returns=20", "--set", "sde.sigma=0.4",
                "--set", "sde.mu3=1", "--set", "sde.step_h=0.01", "--set", "sde.horizon=200", "--set", "field.collar_eps=0.05",
            ],
        ),
        ("check-adapted", &["--set", "check.samples=2000"]),
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (cmd, extra) in runs {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "2", "2"].iter().enumerate() {
            let prefix = dir.path().join(format!("{cmd}-{k}"));
            let status = Process::new(env!("CARGO_BIN_EXE_conebook"))
                .env("CONEBOOK_THREADS", threads)
                .arg(cmd)
                .args(extra)
                .args(["--seed", "7", "--out"])
                .arg(&prefix)
                .status()
                .unwrap();
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| {
                    let n = p.file_name().unwrap().to_string_lossy().into_owned();
                    n.starts_with(&format!("{cmd}-{k}.")) && n.ends_with(".csv")
                })
                .map(|p| {
                    let n = p.file_name().unwrap().to_string_lossy().replacen(&format!("{cmd}-{k}"), "", 1);
                    (n, fs::read(&p).unwrap())
                })
                .collect();
            files.sort();
            ok &= status.success() && !files.is_empty();
            outputs.push(files);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        lines.push(format!("{cmd}: {} CSV file(s), identical across threads 1/2/2: {same}", outputs[0].len()));
    }
    Outcome::new(ok, "every command rerun with seed 7 under CONEBOOK_THREADS=1, 2, 2").detail(lines)
}
