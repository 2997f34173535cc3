//! The drifted diffusion `dV = σ dW + μ τ(Γ) dt`, in the flat half-space model
//! and constrained to a cone field on `S³`, plus recurrence experiments.

use crate::cone::{angle_between3, perpendicular_basis, Cap, ConeField};
use crate::error::{Error, Result};
use crate::geometry::{angle_delta, frame_to_ambient, geodesic_step, theta, PagePoint, SpherePoint};
use crate::invariants::Section;
use crate::reach::HalfSpaceState;
use crate::region::PageSet;
use crate::rng::par_map_streams;
use crate::stats::{ls_slope, median, Proportion};
use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;

/// Volatility as a function of the page radius `r = |z1|` (or `|x + iy|` in
/// the half-space model).
#[derive(Debug, Clone)]
pub enum Volatility {
    Constant(f64),
    Expr { source: String, tree: Node<DefaultNumericTypes> },
}

impl PartialEq for Volatility {
    fn eq(&self, other: &Self) -> bool {
        self.source() == other.source()
    }
}

impl Volatility {
    /// A number gives a constant; anything else is compiled as an expression in `r`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("sde.sigma must be finite and >= 0, got {v}")));
            }
            return Ok(Volatility::Constant(v));
        }
        let tree = evalexpr::build_operator_tree::<DefaultNumericTypes>(s)
            .map_err(|e| Error::InvalidInput(format!("sde.sigma: {e}")))?;
        let vol = Volatility::Expr { source: s.to_string(), tree };
        let mut ctx = HashMapContext::new();
        for k in 0..=16 {
            vol.eval(k as f64 / 16.0, &mut ctx)?;
        }
        Ok(vol)
    }

    pub fn source(&self) -> String {
        match self {
            Volatility::Constant(v) => format!("{v}"),
            Volatility::Expr { source, .. } => source.clone(),
        }
    }

    pub fn eval(&self, r: f64, ctx: &mut HashMapContext) -> Result<f64> {
        match self {
            Volatility::Constant(v) => Ok(*v),
            Volatility::Expr { source, tree } => {
                ctx.set_value("r".into(), Value::Float(r))
                    .map_err(|e| Error::InvalidInput(format!("sde.sigma: {e}")))?;
                let v = tree
                    .eval_number_with_context(ctx)
                    .map_err(|e| Error::InvalidInput(format!("sde.sigma = {source}: {e}")))?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("sde.sigma = {source} gives {v} at r = {r}; volatility must be >= 0")));
                }
                Ok(v)
            }
        }
    }
}

/// How a step outside the cone is brought back inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InteriorMode {
    /// Rotate toward the axis onto the shell at `(1 − 1e-6)` times the half-angle.
    #[default]
    Project,
    /// Redraw the noise until the step is interior.
    Reject,
}

impl InteriorMode {
    pub fn name(self) -> &'static str {
        match self {
            InteriorMode::Project => "project",
            InteriorMode::Reject => "reject",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "project" => Ok(InteriorMode::Project),
            "reject" => Ok(InteriorMode::Reject),
            other => Err(Error::InvalidInput(format!("unknown sde.mode '{other}'"))),
        }
    }
}

pub const INTERIOR_TOL: f64 = 1e-9;
pub const SHELL_FACTOR: f64 = 1.0 - 1e-6;
pub const MAX_REDRAWS: usize = 1000;
pub const STUCK_MODULUS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub sigma: Volatility,
    pub mu3: f64,
    pub step_h: f64,
    pub horizon: f64,
    pub seed: u64,
    pub mode: InteriorMode,
    /// When false the `μ τ dt` term is dropped (pure diffusion check).
    pub drift_enabled: bool,
    /// Keep every `record_stride`-th state; `0` keeps none.
    pub record_stride: usize,
}

impl SdeConfig {
    pub fn new(sigma: Volatility, mu3: f64, step_h: f64, horizon: f64, seed: u64) -> Self {
        Self { sigma, mu3, step_h, horizon, seed, mode: InteriorMode::Project, drift_enabled: true, record_stride: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu3 > 0.0) || !self.mu3.is_finite() {
            return Err(Error::InvalidInput(format!("sde.mu3 must be positive, got {}", self.mu3)));
        }
        if !(self.step_h > 0.0) || !self.step_h.is_finite() {
            return Err(Error::InvalidInput(format!("sde.step_h must be positive, got {}", self.step_h)));
        }
        if !(self.horizon >= self.step_h) || !self.horizon.is_finite() {
            return Err(Error::InvalidInput(format!("sde.horizon {} must be at least sde.step_h", self.horizon)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.step_h - 1e-9).ceil() as usize
    }
}

/// An up-crossing of the angle lift through `2πn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub n: i64,
    pub step: usize,
    pub point: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePath {
    pub states: Vec<HalfSpaceState>,
    pub crossings: Vec<Crossing>,
    pub end: HalfSpaceState,
}

fn normal3<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `τ` at a half-space position, reading `x + iy` as a page point and pulling
/// points outside the page back onto its interior.
fn halfspace_tau(section: &Section, x: f64, y: f64) -> Result<f64> {
    if let Section::ReebHopf = section {
        return Ok(TAU);
    }
    let mut w = Complex64::new(x, y);
    let r = w.norm();
    if r >= 1.0 - 1e-12 {
        w *= (1.0 - 1e-12) / r;
    }
    section.return_time(w)
}

/// Euler–Maruyama in `R³₊`, reflected at `z = 0`. Crossings are recorded where
/// `z` passes upward through a positive multiple of `2π`.
pub fn euler_maruyama_halfspace<R: Rng + ?Sized>(
    cfg: &SdeConfig,
    section: &Section,
    start: HalfSpaceState,
    rng: &mut R,
) -> Result<HalfSpacePath> {
    cfg.validate()?;
    if !(start.z >= 0.0) {
        return Err(Error::InvalidInput(format!("start.z must be >= 0, got {}", start.z)));
    }
    let mut ctx = HashMapContext::new();
    let h = cfg.step_h;
    let sq = h.sqrt();
    let mut s = start;
    let mut states = Vec::new();
    if cfg.record_stride > 0 {
        states.push(s);
    }
    let mut crossings = Vec::new();
    for k in 0..cfg.steps() {
        let sigma = cfg.sigma.eval(s.x.hypot(s.y), &mut ctx)?;
        let tau = if cfg.drift_enabled { halfspace_tau(section, s.x, s.y)? } else { 0.0 };
        let xi = normal3(rng);
        let next_unreflected = HalfSpaceState {
            x: s.x + sigma * sq * xi[0],
            y: s.y + sigma * sq * xi[1],
            z: s.z + sigma * sq * xi[2] + cfg.mu3 * tau * h,
        };
        let lo = (s.z / TAU).floor() as i64;
        let hi = (next_unreflected.z / TAU).floor() as i64;
        for n in (lo + 1).max(1)..=hi {
            let level = TAU * n as f64;
            let f = (level - s.z) / (next_unreflected.z - s.z);
            let point = Complex64::new(s.x + f * (next_unreflected.x - s.x), s.y + f * (next_unreflected.y - s.y));
            crossings.push(Crossing { n, step: k + 1, point });
        }
        s = HalfSpaceState { z: next_unreflected.z.abs(), ..next_unreflected };
        if cfg.record_stride > 0 && (k + 1) % cfg.record_stride == 0 {
            states.push(s);
        }
    }
    Ok(HalfSpacePath { states, crossings, end: s })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePath {
    pub states: Vec<SpherePoint>,
    pub theta_lift: Vec<f64>,
    pub crossings: Vec<Crossing>,
    /// Realized unit step directions with the local cap they had to respect.
    pub directions: Vec<(Vector3<f64>, Cap)>,
    pub end: SpherePoint,
    pub end_lift: f64,
    pub steps_taken: usize,
}

/// Rotates unit `d` toward `cap.axis` in their common plane until it sits at
/// angle `target` from the axis.
fn rotate_toward_axis(d: &Vector3<f64>, cap: &Cap, target: f64) -> Vector3<f64> {
    let a = cap.axis;
    let perp = d - a * a.dot(d);
    let pn = perp.norm();
    let e = if pn > 1e-15 { perp / pn } else { perpendicular_basis(&a).0 };
    let (s, c) = target.sin_cos();
    a * c + e * s
}

fn shell_angle(beta: f64) -> f64 {
    (SHELL_FACTOR * beta).min(beta - 2.0 * INTERIOR_TOL).max(0.0)
}

fn is_inside(d: &Vector3<f64>, cap: &Cap) -> bool {
    angle_between3(d, &cap.axis) < cap.half_angle - INTERIOR_TOL
}

/// Options for a cone-constrained run beyond the shared [`SdeConfig`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ConeRunOptions {
    /// Keep every realized direction (for post hoc interiority checks).
    pub keep_directions: bool,
    /// Stop after the first crossing whose page point satisfies `stop_when`.
    pub max_crossing_index: Option<i64>,
}

/// Cone-constrained Euler–Maruyama on `S³`. Each step draws the increment
/// `σ√h ξ + μ τ h · axis` in frame coordinates, forces its direction into the
/// local cone, and walks the increment's length along the geodesic.
pub fn euler_maruyama_cone<R: Rng + ?Sized>(
    cfg: &SdeConfig,
    field: &dyn ConeField,
    section: &Section,
    start: &SpherePoint,
    rng: &mut R,
) -> Result<SpherePath> {
    run_cone(cfg, field, section, start, rng, ConeRunOptions::default(), |_| false)
}

/// [`euler_maruyama_cone`] with options and an early-stop predicate on
/// crossings.
pub fn run_cone<R: Rng + ?Sized, S: FnMut(&Crossing) -> bool>(
    cfg: &SdeConfig,
    field: &dyn ConeField,
    section: &Section,
    start: &SpherePoint,
    rng: &mut R,
    opts: ConeRunOptions,
    mut stop: S,
) -> Result<SpherePath> {
    cfg.validate()?;
    if start.z2.norm() < STUCK_MODULUS {
        return Err(Error::StuckAtBinding { modulus: start.z2.norm(), steps: 0 });
    }
    let mut ctx = HashMapContext::new();
    let h = cfg.step_h;
    let sq = h.sqrt();
    let mut p = *start;
    let mut angle = theta(&p)?;
    let mut lift = angle;
    let mut path = SpherePath {
        states: Vec::new(),
        theta_lift: Vec::new(),
        crossings: Vec::new(),
        directions: Vec::new(),
        end: p,
        end_lift: lift,
        steps_taken: 0,
    };
    if cfg.record_stride > 0 {
        path.states.push(p);
        path.theta_lift.push(lift);
    }
    'steps: for k in 0..cfg.steps() {
        let cap = field.enclosing_cap(&p)?;
        let sigma = cfg.sigma.eval(p.z1.norm(), &mut ctx)?;
        let drift = if cfg.drift_enabled { cfg.mu3 * section.tau_at(&p)? * h } else { 0.0 };
        let draw = |rng: &mut R| cap.axis * drift + normal3(rng) * (sigma * sq);
        let mut incr = draw(rng);
        let mut len = incr.norm();
        if len == 0.0 {
            path.steps_taken = k + 1;
            continue;
        }
        let mut dir = incr / len;
        if !is_inside(&dir, &cap) {
            let mut accepted = false;
            if cfg.mode == InteriorMode::Reject {
                for _ in 0..MAX_REDRAWS {
                    incr = draw(rng);
                    len = incr.norm();
                    if len > 0.0 && is_inside(&(incr / len), &cap) {
                        dir = incr / len;
                        accepted = true;
                        break;
                    }
                }
            }
            if !accepted {
                dir = rotate_toward_axis(&dir, &cap, shell_angle(cap.half_angle));
            }
        }
        if opts.keep_directions {
            path.directions.push((dir, cap));
        }
        let amb = frame_to_ambient(&p, &dir);
        // split long steps so the angle moves by well under π per piece
        let speed_bound = 1.0 / p.z2.norm();
        let pieces = ((len * speed_bound) / 1.0).ceil().max(1.0) as usize;
        let ds = len / pieces as f64;
        let mut base = p;
        let mut base_amb = amb;
        for _ in 0..pieces {
            let q = geodesic_step(&base, &base_amb, ds);
            if q.z2.norm() < STUCK_MODULUS {
                return Err(Error::StuckAtBinding { modulus: q.z2.norm(), steps: k + 1 });
            }
            let qa = theta(&q)?;
            let q_lift = lift + angle_delta(angle, qa);
            let lo = (lift / TAU).floor() as i64;
            let hi = (q_lift / TAU).floor() as i64;
            for n in (lo + 1)..=hi {
                let point = crossing_point(&base, &base_amb, ds, angle, lift, TAU * n as f64)?;
                let c = Crossing { n, step: k + 1, point };
                path.crossings.push(c);
                if stop(&c) || opts.max_crossing_index.is_some_and(|m| n >= m) {
                    path.end = q;
                    path.end_lift = q_lift;
                    path.steps_taken = k + 1;
                    break 'steps;
                }
            }
            // parallel transport of the direction along the great circle
            base_amb = -base.ambient() * ds.sin() + base_amb * ds.cos();
            base = q;
            angle = qa;
            lift = q_lift;
        }
        p = base;
        path.steps_taken = k + 1;
        if cfg.record_stride > 0 && (k + 1) % cfg.record_stride == 0 {
            path.states.push(p);
            path.theta_lift.push(lift);
        }
    }
    path.end = p;
    path.end_lift = lift;
    Ok(path)
}

/// Page point where the geodesic piece from `p` crosses the lift `level`.
fn crossing_point(
    p: &SpherePoint,
    dir: &nalgebra::Vector4<f64>,
    len: f64,
    angle: f64,
    lift: f64,
    level: f64,
) -> Result<Complex64> {
    let lift_at = |s: f64| -> Result<f64> { Ok(lift + angle_delta(angle, theta(&geodesic_step(p, dir, s))?)) };
    let (mut lo, mut hi) = (0.0, len);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if lift_at(mid)? >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(geodesic_step(p, dir, hi).page_coordinate())
}

/// One horizon of a recurrence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonRow {
    pub horizon: usize,
    pub hit_fraction: Proportion,
    /// `E[min(N, horizon)]` with censored paths counted at the horizon.
    pub trunc_mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub mode: InteriorMode,
    /// First return index landing in `U`, or `None` if censored.
    pub first_hits: Vec<Option<usize>>,
    /// Paths terminated at the binding (counted as censored).
    pub stuck: usize,
    /// Hit fraction after each return index `1..=max_returns`.
    pub curve: Vec<f64>,
    pub horizons: Vec<HorizonRow>,
    /// Least-squares slope of `log P(N > n)` against `log n`.
    pub survival_slope: Option<f64>,
    pub max_returns: usize,
}

/// Paths from page point `p` (on page `0`) until their first return inside `u`,
/// censored after `max_returns` returns or at `cfg.horizon`.
#[allow(clippy::too_many_arguments)]
pub fn recurrence_experiment(
    cfg: &SdeConfig,
    field: &dyn ConeField,
    section: &Section,
    p: Complex64,
    u: &dyn PageSet,
    n_paths: usize,
    max_returns: usize,
) -> Result<RecurrenceReport> {
    cfg.validate()?;
    if n_paths == 0 || max_returns == 0 {
        return Err(Error::InvalidInput("recurrence needs n_paths >= 1 and max_returns >= 1".into()));
    }
    let start = PagePoint::new(0.0, p)?.to_sphere();
    let mut run_cfg = cfg.clone();
    run_cfg.record_stride = 0;
    let results = par_map_streams(cfg.seed, n_paths, |_, rng| -> Result<(Option<usize>, bool)> {
        let mut hit = None;
        let opts = ConeRunOptions { keep_directions: false, max_crossing_index: Some(max_returns as i64) };
        let run = run_cone(&run_cfg, field, section, &start, rng, opts, |c| {
            if c.n >= 1 && c.n as usize <= max_returns && u.contains(c.point) {
                hit = Some(c.n as usize);
                true
            } else {
                false
            }
        });
        match run {
            Ok(_) => Ok((hit, false)),
            Err(Error::StuckAtBinding { .. }) => Ok((hit, true)),
            Err(e) => Err(e),
        }
    });
    let mut first_hits = Vec::with_capacity(n_paths);
    let mut stuck = 0;
    for r in results {
        let (h, s) = r?;
        stuck += usize::from(s && h.is_none());
        first_hits.push(h);
    }
    Ok(summarize(cfg.mode, first_hits, stuck, max_returns))
}

/// Builds the report statistics from first-hit indices.
pub fn summarize(mode: InteriorMode, first_hits: Vec<Option<usize>>, stuck: usize, max_returns: usize) -> RecurrenceReport {
    let n = first_hits.len();
    let mut counts = vec![0usize; max_returns + 1];
    for n_hit in first_hits.iter().flatten() {
        if *n_hit <= max_returns {
            counts[*n_hit] += 1;
        }
    }
    let mut curve = Vec::with_capacity(max_returns);
    let mut acc = 0;
    for c in counts.iter().skip(1) {
        acc += c;
        curve.push(acc as f64 / n.max(1) as f64);
    }
    let mut hz: Vec<usize> = vec![(max_returns / 4).max(1), (max_returns / 2).max(1), max_returns];
    hz.dedup();
    let horizons = hz
        .into_iter()
        .map(|t| {
            let truncated: Vec<f64> = first_hits.iter().map(|h| h.map_or(t, |v| v.min(t)) as f64).collect();
            let hits = first_hits.iter().filter(|h| h.is_some_and(|v| v <= t)).count();
            HorizonRow {
                horizon: t,
                hit_fraction: Proportion::new(hits, n),
                trunc_mean: truncated.iter().sum::<f64>() / n.max(1) as f64,
                median: median(&truncated),
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .filter(|(_, f)| **f < 1.0)
        .map(|(i, f)| (((i + 1) as f64).ln(), (1.0 - f).ln()))
        .collect();
    let survival_slope = (pts.len() >= 2).then(|| ls_slope(&pts));
    RecurrenceReport { mode, first_hits, stuck, curve, horizons, survival_slope, max_returns }
}
