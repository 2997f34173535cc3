//! Reachable regions of cone-constrained curves.
//!
//! Two models are used. In the flat half-space model the vertical coordinate
//! plays the role of open-book time and the cone is constant; in the sphere
//! model trajectories of a [`ConeField`] are integrated on `S³` with the
//! open-book angle as clock.

use crate::cone::{perpendicular_basis, Cap, ConeField};
use crate::error::{Error, Result};
use crate::geometry::{
    angle_delta, dtheta_frame, frame_to_ambient, geodesic_step, hopf_flow, theta, wrap_angle, PageMeasure, PagePoint,
    SpherePoint, TangentVector,
};
use crate::region::{region_mass, Disk, Intersection, PageSet};
use crate::rng::par_map_streams;
use crate::stats::Proportion;
use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HalfSpaceState {
    pub fn horizontal_radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReachRadius {
    Finite(f64),
    Infinite,
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Radius `t·tan(θ/2)` of the time-`t` reachable disk for a constant cone of
/// full opening angle `theta`.
pub fn reach_radius(t: f64, theta: f64) -> Result<f64> {
    check_time(t)?;
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::InvalidInput(format!("angle must be non-negative, got {theta}")));
    }
    if theta >= PI {
        return Err(Error::AngleOutOfRange { theta });
    }
    Ok(t * (0.5 * theta).tan())
}

/// Like [`reach_radius`] but reports `theta ≥ π` as an infinite radius.
pub fn reach_radius_extended(t: f64, theta: f64) -> Result<ReachRadius> {
    match reach_radius(t, theta) {
        Ok(r) => Ok(ReachRadius::Finite(r)),
        Err(Error::AngleOutOfRange { .. }) => Ok(ReachRadius::Infinite),
        Err(e) => Err(e),
    }
}

/// The competing reading `t·tan(θ)`, infinite from `θ = π/2` on.
pub fn reach_radius_tan_full(t: f64, theta: f64) -> f64 {
    if theta >= PI / 2.0 {
        f64::INFINITY
    } else {
        t * theta.tan()
    }
}

/// Empirical reach of the flat model.
#[derive(Debug, Clone)]
pub struct HalfSpaceReach {
    pub theta: f64,
    pub t: f64,
    pub max_radius: f64,
    pub endpoints: Vec<HalfSpaceState>,
}

pub const MAX_SEGMENTS: usize = 4;

/// Simulates `n` piecewise-constant curves from the origin of `R³₊`, each with
/// one to [`MAX_SEGMENTS`] segments whose directions are uniform over the cap of
/// half-angle `theta/2` about the vertical, scaled to unit vertical speed.
pub fn halfspace_reach_mc(theta: f64, t: f64, n: usize, seed: u64) -> Result<HalfSpaceReach> {
    reach_radius(t, theta)?;
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let half = 0.5 * theta;
    let cos_half = half.cos();
    let endpoints = par_map_streams(seed, n, |_, rng| {
        let m = rng.random_range(1..=MAX_SEGMENTS);
        let mut cuts = [0.0f64; MAX_SEGMENTS + 1];
        for c in cuts.iter_mut().take(m).skip(1) {
            *c = rng.random::<f64>() * t;
        }
        cuts[m] = t;
        cuts[1..m].sort_by(f64::total_cmp);
        let (mut x, mut y) = (0.0, 0.0);
        for k in 0..m {
            let dz = cuts[k + 1] - cuts[k];
            let c = 1.0 - rng.random::<f64>() * (1.0 - cos_half);
            let s = (1.0 - c * c).max(0.0).sqrt();
            let psi = TAU * rng.random::<f64>();
            let speed = s / c;
            x += dz * speed * psi.cos();
            y += dz * speed * psi.sin();
        }
        HalfSpaceState { x, y, z: t }
    });
    let max_radius = endpoints.iter().map(HalfSpaceState::horizontal_radius).fold(0.0, f64::max);
    Ok(HalfSpaceReach { theta, t, max_radius, endpoints })
}

/// Which radius law a reach disk was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReachLaw {
    /// `t·tan(θ/2)·μ(A)`.
    AreaScaled,
    /// `t·tan(θ/2) + r`, the Minkowski growth of `A`.
    Minkowski,
}

impl ReachLaw {
    pub fn tag(self) -> &'static str {
        match self {
            ReachLaw::AreaScaled => "area_scaled",
            ReachLaw::Minkowski => "minkowski",
        }
    }

    pub const ALL: [ReachLaw; 2] = [ReachLaw::AreaScaled, ReachLaw::Minkowski];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachDisk {
    pub center: PagePoint,
    pub radius: f64,
    pub t: f64,
    pub theta: f64,
    pub law: ReachLaw,
}

impl ReachDisk {
    pub fn disk(&self) -> Disk {
        Disk::new(self.center.w, self.radius)
    }
}

fn check_source(a: &Disk) -> Result<()> {
    if !(a.radius > 0.0) {
        return Err(Error::EmptyA { radius: a.radius });
    }
    Ok(())
}

/// The reach disk of the source disk `a` on page `0` after time `t`.
pub fn reach_disk(a: &Disk, t: f64, theta: f64, m: PageMeasure, law: ReachLaw) -> Result<ReachDisk> {
    check_source(a)?;
    let base = reach_radius(t, theta)?;
    let radius = match law {
        ReachLaw::AreaScaled => base * region_mass(a, m, a.center)?,
        ReachLaw::Minkowski => base + a.radius,
    };
    let center = PagePoint { phi: t.rem_euclid(TAU), w: Complex64::from_polar(1.0, t) * a.center };
    Ok(ReachDisk { center, radius, t, theta, law })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbFormula {
    pub disk: ReachDisk,
    /// `μ(B ∩ D)`.
    pub value: f64,
    /// `μ(B ∩ D) / μ(D)`, absent when `D` is null.
    pub conditional: Option<f64>,
}

/// `μ(B ∩ D)` for the reach disk `D` of `a`, clipped to the page.
pub fn prob_formula(a: &Disk, b: &dyn PageSet, t: f64, theta: f64, m: PageMeasure, law: ReachLaw) -> Result<ProbFormula> {
    let disk = reach_disk(a, t, theta, m, law)?;
    let d = disk.disk();
    let both = Intersection::new(vec![Box::new(d), Box::new(b)]);
    let value = region_mass(&both, m, d.center)?;
    let dm = region_mass(&d, m, d.center)?;
    let conditional = (dm > 0.0).then(|| (value / dm).min(1.0));
    Ok(ProbFormula { disk, value, conditional })
}

/// How trajectory velocities are drawn from the local cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VelocityModel {
    /// Uniform over the spherical cap of directions.
    #[default]
    Cap,
    /// Uniform over the flat disk spanning the cone at unit height.
    BaseDisk,
}

impl VelocityModel {
    pub fn name(self) -> &'static str {
        match self {
            VelocityModel::Cap => "cap",
            VelocityModel::BaseDisk => "disk",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cap" => Ok(VelocityModel::Cap),
            "disk" | "base_disk" => Ok(VelocityModel::BaseDisk),
            other => Err(Error::InvalidInput(format!("unknown velocity model '{other}'"))),
        }
    }
}

/// Unit direction drawn from `cap` under `model`.
pub fn sample_direction<R: Rng + ?Sized>(cap: &Cap, model: VelocityModel, rng: &mut R) -> Vector3<f64> {
    if cap.half_angle <= 0.0 {
        return cap.axis;
    }
    let (e1, e2) = perpendicular_basis(&cap.axis);
    let psi = TAU * rng.random::<f64>();
    let (sp, cp) = psi.sin_cos();
    match model {
        VelocityModel::Cap => {
            let c = 1.0 - rng.random::<f64>() * (1.0 - cap.half_angle.cos());
            let s = (1.0 - c * c).max(0.0).sqrt();
            cap.axis * c + (e1 * cp + e2 * sp) * s
        }
        VelocityModel::BaseDisk => {
            let rho = cap.half_angle.tan() * rng.random::<f64>().sqrt();
            (cap.axis + (e1 * cp + e2 * sp) * rho).normalize()
        }
    }
}

pub const DEFAULT_THETA_STEP: f64 = 1e-3;

/// One step of `field`'s trajectory that advances the open-book angle by exactly
/// `h`: a geodesic arc along a sampled cone direction, followed by a Reeb-flow
/// correction that absorbs the curvature of the angle.
///
/// Returns the new point, its angle and the velocity used (frame coordinates).
fn cone_step<R: Rng + ?Sized>(
    field: &dyn ConeField,
    p: &SpherePoint,
    angle: f64,
    h: f64,
    model: VelocityModel,
    rng: &mut R,
) -> Result<(SpherePoint, f64, Vector3<f64>)> {
    let degenerate = |reason: &str| Error::FieldDegenerate { modulus: p.z2.norm(), reason: reason.into() };
    let cap = field.enclosing_cap(p)?;
    let u = sample_direction(&cap, model, rng);
    let g = dtheta_frame(p).map_err(|_| degenerate("trajectory reached the binding"))?;
    let rate = g.dot(&u);
    if !(rate > 1e-12) {
        return Err(degenerate("sampled direction does not advance the open-book angle"));
    }
    let q = geodesic_step(p, &frame_to_ambient(p, &u), h / rate);
    let q_angle = theta(&q).map_err(|_| degenerate("trajectory reached the binding"))?;
    let q = hopf_flow(&q, h - angle_delta(angle, q_angle));
    Ok((q, wrap_angle(angle + h), u))
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<SpherePoint>,
    pub theta_lift: Vec<f64>,
    /// Velocity used on each segment, based at its left endpoint.
    pub velocities: Vec<TangentVector>,
    pub step: f64,
}

impl Trajectory {
    pub fn end(&self) -> &SpherePoint {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

fn step_count(t: f64, h: f64) -> Result<(usize, f64)> {
    check_time(t)?;
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("angle step must be positive, got {h}")));
    }
    let n = (t / h - 1e-9).ceil().max(0.0) as usize;
    Ok((n, if n == 0 { 0.0 } else { t / n as f64 }))
}

/// Integrates a trajectory of `field` from `start` until its angle lift has
/// grown by `t`, in uniform angle steps no larger than `h`.
pub fn integrate_trajectory<R: Rng + ?Sized>(
    field: &dyn ConeField,
    start: &SpherePoint,
    t: f64,
    h: f64,
    model: VelocityModel,
    rng: &mut R,
) -> Result<Trajectory> {
    let (n, step) = step_count(t, h)?;
    let mut angle = theta(start).map_err(|_| Error::FieldDegenerate {
        modulus: start.z2.norm(),
        reason: "trajectory starts on the binding".into(),
    })?;
    let lift0 = angle;
    let mut p = *start;
    let mut out = Trajectory {
        samples: Vec::with_capacity(n + 1),
        theta_lift: Vec::with_capacity(n + 1),
        velocities: Vec::with_capacity(n),
        step,
    };
    out.samples.push(p);
    out.theta_lift.push(lift0);
    for k in 0..n {
        let (q, a, u) = cone_step(field, &p, angle, step, model, rng)?;
        out.velocities.push(TangentVector::from_frame(p, &u));
        p = q;
        angle = a;
        out.samples.push(p);
        out.theta_lift.push(lift0 + step * (k + 1) as f64);
    }
    Ok(out)
}

/// Final point of a trajectory without recording the path.
pub fn trajectory_endpoint<R: Rng + ?Sized>(
    field: &dyn ConeField,
    start: &SpherePoint,
    t: f64,
    h: f64,
    model: VelocityModel,
    rng: &mut R,
) -> Result<SpherePoint> {
    let (n, step) = step_count(t, h)?;
    let mut angle = theta(start).map_err(|_| Error::FieldDegenerate {
        modulus: start.z2.norm(),
        reason: "trajectory starts on the binding".into(),
    })?;
    let mut p = *start;
    for _ in 0..n {
        let (q, a, _) = cone_step(field, &p, angle, step, model, rng)?;
        p = q;
        angle = a;
    }
    Ok(p)
}

/// Uniform point of `a ∩ page` under the (normalized) area measure.
pub fn sample_in_disk<R: Rng + ?Sized>(a: &Disk, rng: &mut R) -> Complex64 {
    loop {
        let rho = a.radius * rng.random::<f64>().sqrt();
        let w = a.center + Complex64::from_polar(rho, TAU * rng.random::<f64>());
        if w.norm_sqr() < 1.0 {
            return w;
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbMc {
    pub proportion: Proportion,
    pub starts: Vec<Complex64>,
    pub endpoints: Vec<Complex64>,
}

impl ProbMc {
    /// Fraction of endpoints inside `d`.
    pub fn containment(&self, d: &Disk) -> f64 {
        let inside = self.endpoints.iter().filter(|w| d.contains(**w)).count();
        inside as f64 / self.endpoints.len().max(1) as f64
    }
}

/// Fraction of trajectories of `field` started uniformly in `a` (page `0`) that
/// lie in `b` after time `t`.
#[allow(clippy::too_many_arguments)]
pub fn prob_mc(
    field: &dyn ConeField,
    a: &Disk,
    b: &dyn PageSet,
    t: f64,
    n: usize,
    seed: u64,
    model: VelocityModel,
    h: f64,
) -> Result<ProbMc> {
    check_source(a)?;
    if n < 100 {
        return Err(Error::InvalidInput(format!("prob_mc needs at least 100 paths, got {n}")));
    }
    let a = *a;
    let runs = par_map_streams(seed, n, |_, rng| -> Result<(Complex64, Complex64)> {
        let w = sample_in_disk(&a, rng);
        let start = PagePoint { phi: 0.0, w }.to_sphere();
        let end = trajectory_endpoint(field, &start, t, h, model, rng)?;
        Ok((w, end.page_coordinate()))
    });
    let mut starts = Vec::with_capacity(n);
    let mut endpoints = Vec::with_capacity(n);
    for r in runs {
        let (s, e) = r?;
        starts.push(s);
        endpoints.push(e);
    }
    let hits = endpoints.iter().filter(|w| b.contains(**w)).count();
    Ok(ProbMc { proportion: Proportion::new(hits, n), starts, endpoints })
}

/// Upper bound certificate: [`prob_formula`] with the area-scaled radius law at the
/// field's max measure of integrability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryBound {
    pub bound: f64,
    pub i_max: f64,
    pub disk: ReachDisk,
}

pub fn corollary_bound(
    field: &dyn ConeField,
    a: &Disk,
    b: &dyn PageSet,
    t: f64,
    m: PageMeasure,
    samples: usize,
    seed: u64,
) -> Result<CorollaryBound> {
    let i_max = crate::invariants::integrability_max(field, samples, seed)?.value;
    let f = prob_formula(a, b, t, i_max, m, ReachLaw::AreaScaled)?;
    Ok(CorollaryBound { bound: f.value, i_max, disk: f.disk })
}
