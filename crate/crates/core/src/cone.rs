//! Cones, cone fields on `S³`, the inner-angle function and the adaptedness
//! checker.
//!
//! A field is described by its raw generator directions at each point. Every
//! quantitative use goes through the round envelope of those directions: the
//! smallest spherical cap on the unit sphere of `T_p S³` that contains them.
//! The inner angle of a field is the full opening angle of that envelope,
//! `2 × half_angle`.

use crate::error::{Error, Result};
use crate::geometry::{
    ambient_to_frame, frame_to_ambient, reeb_field, uniform_sphere_point, OneForm, SpherePoint,
    TangentVector, BINDING_EPS,
};
use crate::rng::stream_rng;
use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

/// Angle between two nonzero vectors, accurate near 0 and π.
pub fn angle_between3(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

pub fn angle_between4(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    // |a|²|b|² − (a·b)² is the squared norm of the wedge product
    let ab = a.dot(b);
    let wedge = (a.norm_squared() * b.norm_squared() - ab * ab).max(0.0).sqrt();
    wedge.atan2(ab)
}

/// A round cap on the unit sphere of a 3-dimensional tangent space, in frame
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub axis: Vector3<f64>,
    pub half_angle: f64,
}

impl Cap {
    fn contains(&self, d: &Vector3<f64>) -> bool {
        angle_between3(&self.axis, d) <= self.half_angle + 1e-12
    }
}

const CAP_TOL: f64 = 1e-10;

fn cap_from_two(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<Cap> {
    let mid = a + b;
    let n = mid.norm();
    if n < 1e-14 {
        return Err(Error::NoEnclosingCone { half_angle: FRAC_PI_2 });
    }
    Ok(Cap {
        axis: mid / n,
        half_angle: 0.5 * angle_between3(a, b),
    })
}

fn cap_from_three(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> Result<Cap> {
    let mut n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len < 1e-300 {
        // collinear in R³ means the three points share a great circle arc;
        // the widest pair decides
        let caps = [cap_from_two(a, b), cap_from_two(a, c), cap_from_two(b, c)];
        return caps
            .into_iter()
            .filter_map(|c| c.ok())
            .max_by(|x, y| x.half_angle.total_cmp(&y.half_angle))
            .ok_or(Error::NoEnclosingCone { half_angle: FRAC_PI_2 });
    }
    n /= len;
    if n.dot(a) < 0.0 {
        n = -n;
    }
    let half = angle_between3(&n, a)
        .max(angle_between3(&n, b))
        .max(angle_between3(&n, c));
    Ok(Cap { axis: n, half_angle: half })
}

/// Minimal enclosing spherical cap of a set of directions (randomized
/// incremental construction with a fixed permutation).
pub fn smallest_enclosing_cap(dirs: &[Vector3<f64>]) -> Result<Cap> {
    if dirs.is_empty() {
        return Err(Error::InvalidInput("no directions to enclose".into()));
    }
    let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(dirs.len());
    for d in dirs {
        let n = d.norm();
        if !(n >= 1e-14) || !n.is_finite() {
            return Err(Error::ZeroVector { norm: n });
        }
        pts.push(d / n);
    }
    if pts.len() > 8 {
        deterministic_shuffle(&mut pts);
    }

    let mut cap = Cap { axis: pts[0], half_angle: 0.0 };
    for i in 1..pts.len() {
        if cap.contains(&pts[i]) {
            continue;
        }
        cap = Cap { axis: pts[i], half_angle: 0.0 };
        for j in 0..i {
            if cap.contains(&pts[j]) {
                continue;
            }
            cap = cap_from_two(&pts[i], &pts[j])?;
            for k in 0..j {
                if cap.contains(&pts[k]) {
                    continue;
                }
                cap = cap_from_three(&pts[i], &pts[j], &pts[k])?;
            }
        }
    }

    let worst = pts
        .iter()
        .map(|p| angle_between3(&cap.axis, p))
        .fold(0.0f64, f64::max);
    if worst > cap.half_angle + CAP_TOL || cap.half_angle >= FRAC_PI_2 {
        return Err(Error::NoEnclosingCone {
            half_angle: worst.max(cap.half_angle),
        });
    }
    Ok(cap)
}

fn deterministic_shuffle(pts: &mut [Vector3<f64>]) {
    // splitmix64 stream keyed by the length: the permutation is fixed per size
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ pts.len() as u64;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    for i in (1..pts.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        pts.swap(i, j);
    }
}

/// A solid round cone in `T_p S³`: unit axis plus half-opening angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub axis: TangentVector,
    pub half_angle: f64,
}

impl Cone {
    pub fn new(axis: TangentVector, half_angle: f64) -> Result<Self> {
        if (axis.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("cone axis has norm {}", axis.norm())));
        }
        if !(0.0..FRAC_PI_2).contains(&half_angle) {
            return Err(Error::InvalidInput(format!(
                "cone half-angle {half_angle} outside [0, pi/2)"
            )));
        }
        Ok(Self { axis, half_angle })
    }

    pub fn from_cap(base: SpherePoint, cap: &Cap) -> Self {
        Self {
            axis: TangentVector::from_frame(base, &cap.axis),
            half_angle: cap.half_angle,
        }
    }

    pub fn cap(&self) -> Cap {
        Cap { axis: self.axis.frame_coords(), half_angle: self.half_angle }
    }

    /// Unit directions on the boundary circle of the cone.
    pub fn boundary_directions(&self, count: usize) -> Vec<TangentVector> {
        let base = self.axis.base;
        ring_around(&self.cap().axis, self.half_angle, count)
            .iter()
            .map(|d| TangentVector::from_frame(base, d))
            .collect()
    }
}

/// `smallest_enclosing_cone` over ambient tangent vectors at a common base
/// point.
pub fn smallest_enclosing_cone(dirs: &[TangentVector]) -> Result<Cone> {
    let first = dirs
        .first()
        .ok_or_else(|| Error::InvalidInput("no directions to enclose".into()))?;
    let base = first.base;
    let frame_dirs: Vec<Vector3<f64>> = dirs.iter().map(|d| ambient_to_frame(&base, &d.v)).collect();
    let cap = smallest_enclosing_cap(&frame_dirs)?;
    Ok(Cone::from_cap(base, &cap))
}

/// True iff `v` lies strictly inside `c`, at least `tol` radians from its
/// boundary.
pub fn is_interior(v: &TangentVector, c: &Cone, tol: f64) -> Result<bool> {
    let n = v.norm();
    if n < 1e-14 {
        return Err(Error::ZeroVector { norm: n });
    }
    Ok(angle_between4(&v.v, &c.axis.v) < c.half_angle - tol)
}

/// Orthonormal pair completing `axis` (unit) to a basis of R³.
pub fn perpendicular_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis[0].abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let u = axis.cross(&helper).normalize();
    let v = axis.cross(&u);
    (u, v)
}

/// `count` evenly spaced unit directions at angle `half_angle` from `axis`.
pub fn ring_around(axis: &Vector3<f64>, half_angle: f64, count: usize) -> Vec<Vector3<f64>> {
    let (u, v) = perpendicular_basis(axis);
    let (s, c) = half_angle.sin_cos();
    (0..count)
        .map(|k| {
            let phi = TAU * k as f64 / count as f64;
            axis * c + (u * phi.cos() + v * phi.sin()) * s
        })
        .collect()
}

/// A smooth assignment of raw cones over `S³`.
pub trait ConeField: Send + Sync {
    fn name(&self) -> String;

    /// Generator directions at `p`, in frame coordinates `(R, J, K)`.
    /// Directions need not be unit length.
    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>);

    fn generator(&self, p: &SpherePoint) -> Vec<TangentVector> {
        let mut buf = Vec::new();
        self.generator_frame(p, &mut buf);
        buf.iter().map(|d| TangentVector::from_frame(*p, d)).collect()
    }

    /// Envelope cap of the generator at `p`, in frame coordinates.
    fn enclosing_cap(&self, p: &SpherePoint) -> Result<Cap> {
        let mut buf = Vec::with_capacity(16);
        self.generator_frame(p, &mut buf);
        enclose(p, &buf)
    }

    fn enclosing(&self, p: &SpherePoint) -> Result<Cone> {
        Ok(Cone::from_cap(*p, &self.enclosing_cap(p)?))
    }
}

fn enclose(p: &SpherePoint, dirs: &[Vector3<f64>]) -> Result<Cap> {
    if dirs.is_empty() {
        return Err(Error::FieldDegenerate {
            modulus: p.z2.norm(),
            reason: "cone is trivial".into(),
        });
    }
    smallest_enclosing_cap(dirs)
}

/// Envelope of the raw generator, bypassing any closed form a field provides.
pub fn generator_cap(field: &dyn ConeField, p: &SpherePoint) -> Result<Cap> {
    let mut buf = Vec::with_capacity(16);
    field.generator_frame(p, &mut buf);
    enclose(p, &buf)
}

/// Full opening angle of the smallest round cone containing the field at `p`.
pub fn inner_angle(field: &dyn ConeField, p: &SpherePoint) -> Result<f64> {
    Ok(2.0 * field.enclosing_cap(p)?.half_angle)
}

const REEB_AXIS: Vector3<f64> = Vector3::new(1.0, 0.0, 0.0);

/// The degenerate (flow) case: the Reeb ray at every point.
#[derive(Debug, Clone, Copy, Default)]
pub struct HopfRayField;

impl ConeField for HopfRayField {
    fn name(&self) -> String {
        "hopf".into()
    }

    fn generator_frame(&self, _p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        out.push(REEB_AXIS);
    }

    fn enclosing_cap(&self, _p: &SpherePoint) -> Result<Cap> {
        Ok(Cap { axis: REEB_AXIS, half_angle: 0.0 })
    }
}

pub const DEFAULT_RING: usize = 12;

/// Solid round cone of fixed half-angle about the Reeb axis, everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstantConeField {
    pub half_angle: f64,
    pub ring: usize,
}

impl ConstantConeField {
    pub fn new(half_angle: f64) -> Self {
        Self { half_angle, ring: DEFAULT_RING }
    }
}

impl ConeField for ConstantConeField {
    fn name(&self) -> String {
        format!("constant(alpha0={})", self.half_angle)
    }

    fn generator_frame(&self, _p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        push_ring(out, self.half_angle, self.ring);
    }

    fn enclosing_cap(&self, p: &SpherePoint) -> Result<Cap> {
        ring_cap(self, p, self.half_angle, self.ring)
    }
}

/// Enclosing cap of an evenly spaced ring of at least three directions about
/// the Reeb axis, in closed form.
fn ring_cap(field: &dyn ConeField, p: &SpherePoint, half_angle: f64, ring: usize) -> Result<Cap> {
    if ring < 3 {
        return generator_cap(field, p);
    }
    if half_angle >= FRAC_PI_2 {
        return Err(Error::NoEnclosingCone { half_angle });
    }
    Ok(Cap { axis: REEB_AXIS, half_angle: half_angle.max(0.0) })
}

fn push_ring(out: &mut Vec<Vector3<f64>>, half_angle: f64, ring: usize) {
    if half_angle <= 0.0 {
        out.push(REEB_AXIS);
        return;
    }
    let (s, c) = half_angle.sin_cos();
    for k in 0..ring {
        let phi = TAU * k as f64 / ring as f64;
        out.push(Vector3::new(c, s * phi.cos(), s * phi.sin()));
    }
}

pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Solid cone about the Reeb axis whose half-angle `alpha0 · smoothstep(|z2| / eps)`
/// collapses to the binding-tangent Reeb ray on the binding.
#[derive(Debug, Clone, Copy)]
pub struct CollaredConeField {
    pub alpha0: f64,
    pub collar_eps: f64,
    pub ring: usize,
}

impl CollaredConeField {
    pub fn new(alpha0: f64, collar_eps: f64) -> Self {
        Self { alpha0, collar_eps, ring: DEFAULT_RING }
    }

    pub fn half_angle_at(&self, p: &SpherePoint) -> f64 {
        self.alpha0 * smoothstep(p.z2.norm() / self.collar_eps)
    }
}

impl ConeField for CollaredConeField {
    fn name(&self) -> String {
        format!("collared(alpha0={}, eps={})", self.alpha0, self.collar_eps)
    }

    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        push_ring(out, self.half_angle_at(p), self.ring);
    }

    fn enclosing_cap(&self, p: &SpherePoint) -> Result<Cap> {
        ring_cap(self, p, self.half_angle_at(p), self.ring)
    }
}

/// Planar fan spanning the Reeb direction and the gradient of the open-book
/// angle; the Reeb ray on the binding.
#[derive(Debug, Clone, Copy)]
pub struct FanField {
    pub samples: usize,
}

impl Default for FanField {
    fn default() -> Self {
        Self { samples: 9 }
    }
}

impl FanField {
    /// Unit gradient of `θ` (round metric) in frame coordinates.
    pub fn theta_gradient(p: &SpherePoint) -> Option<Vector3<f64>> {
        let m = p.z2.norm();
        if m <= BINDING_EPS {
            return None;
        }
        let g = Complex64::i() * p.z2 / m;
        Some(ambient_to_frame(p, &Vector4::new(0.0, 0.0, g.re, g.im)))
    }
}

impl ConeField for FanField {
    fn name(&self) -> String {
        "fan".into()
    }

    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        let Some(g) = Self::theta_gradient(p) else {
            out.push(REEB_AXIS);
            return;
        };
        let span = angle_between3(&REEB_AXIS, &g);
        let perp = g - REEB_AXIS * g.dot(&REEB_AXIS);
        let pn = perp.norm();
        if pn < 1e-14 {
            out.push(REEB_AXIS);
            return;
        }
        let perp = perp / pn;
        let n = self.samples.max(2);
        for k in 0..n {
            let a = span * k as f64 / (n - 1) as f64;
            out.push(REEB_AXIS * a.cos() + perp * a.sin());
        }
    }
}

/// Cone field tabulated at scattered base points, interpolated by inverse
/// distance weighting over the nearest entries.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    pub entries: Vec<(SpherePoint, Vector4<f64>, f64)>,
    pub neighbors: usize,
    pub ring: usize,
}

impl TabulatedField {
    pub fn new(entries: Vec<(SpherePoint, Vector4<f64>, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("tabulated field has no rows".into()));
        }
        for (p, axis, half) in &entries {
            let proj = axis - p.ambient() * axis.dot(&p.ambient());
            if proj.norm() < 1e-8 {
                return Err(Error::InvalidInput("tabulated axis is normal to the sphere".into()));
            }
            if !(0.0..FRAC_PI_2).contains(half) {
                return Err(Error::InvalidInput(format!("tabulated half-angle {half} outside [0, pi/2)")));
            }
        }
        Ok(Self { entries, neighbors: 4, ring: DEFAULT_RING })
    }

    /// Parses rows `x1,y1,x2,y2,ax1,ay1,ax2,ay2,half_angle`; a non-numeric first
    /// line is taken as a header and `#` starts a comment.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if entries.is_empty() && lineno == 0 => continue,
                Err(e) => {
                    return Err(Error::InvalidInput(format!("line {}: {e}", lineno + 1)));
                }
            };
            if values.len() != 9 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 9 columns, found {}",
                    lineno + 1,
                    values.len()
                )));
            }
            let p = SpherePoint::from_ambient(&Vector4::new(values[0], values[1], values[2], values[3]))?;
            let axis = Vector4::new(values[4], values[5], values[6], values[7]);
            entries.push((p, axis, values[8]));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_csv(&text)
    }

    /// Interpolated `(axis in frame coordinates, half-angle)` at `p`.
    pub fn interpolate(&self, p: &SpherePoint) -> (Vector3<f64>, f64) {
        let x = p.ambient();
        let mut by_distance: Vec<(f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, (q, _, _))| ((q.ambient() - x).norm(), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = self.neighbors.clamp(1, by_distance.len());
        let mut axis = Vector3::zeros();
        let mut half = 0.0;
        let mut wsum = 0.0;
        for &(d, i) in &by_distance[..k] {
            let (_, a, h) = &self.entries[i];
            let proj = ambient_to_frame(p, a);
            let proj = if proj.norm() > 1e-12 { proj.normalize() } else { REEB_AXIS };
            if d < 1e-12 {
                return (proj, *h);
            }
            let w = 1.0 / d;
            axis += proj * w;
            half += h * w;
            wsum += w;
        }
        let axis = if axis.norm() > 1e-12 { axis.normalize() } else { REEB_AXIS };
        (axis, half / wsum)
    }
}

impl ConeField for TabulatedField {
    fn name(&self) -> String {
        format!("tabulated({} rows)", self.entries.len())
    }

    fn generator_frame(&self, p: &SpherePoint, out: &mut Vec<Vector3<f64>>) {
        let (axis, half) = self.interpolate(p);
        if half <= 0.0 {
            out.push(axis);
        } else {
            out.extend(ring_around(&axis, half, self.ring));
        }
    }
}

/// Field selection as it appears in experiment configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Hopf,
    Constant { alpha0: f64 },
    Collared { alpha0: f64, collar_eps: f64 },
    Fan,
    Tabulated { path: String },
}

impl FieldSpec {
    pub fn build(&self) -> Result<Box<dyn ConeField>> {
        Ok(match self {
            FieldSpec::Hopf => Box::new(HopfRayField),
            FieldSpec::Constant { alpha0 } => {
                check_half_angle(*alpha0)?;
                Box::new(ConstantConeField::new(*alpha0))
            }
            FieldSpec::Collared { alpha0, collar_eps } => {
                check_half_angle(*alpha0)?;
                if !(*collar_eps > 0.0) {
                    return Err(Error::InvalidInput("field.collar_eps must be positive".into()));
                }
                Box::new(CollaredConeField::new(*alpha0, *collar_eps))
            }
            FieldSpec::Fan => Box::new(FanField::default()),
            FieldSpec::Tabulated { path } => Box::new(TabulatedField::load(Path::new(path))?),
        })
    }
}

fn check_half_angle(a: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&a) {
        return Err(Error::InvalidInput(format!("half-angle {a} outside [0, pi/2)")));
    }
    Ok(())
}

/// Outcome of one adaptedness condition over the sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    /// Sample with the smallest margin (most negative when violated).
    pub worst_point: Option<SpherePoint>,
    pub worst_margin: f64,
}

impl FlagResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            checked: 0,
            violations: 0,
            worst_point: None,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, p: &SpherePoint, margin: f64) {
        self.checked += 1;
        if margin <= 0.0 || margin.is_nan() {
            self.violations += 1;
            self.passed = false;
        }
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_point = Some(*p);
        }
    }
}

/// The four adaptedness flags: binding tangency, `dθ` section, `α` section,
/// Reeb interiority.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptednessReport {
    pub flags: [FlagResult; 4],
}

impl AdaptednessReport {
    pub fn all_passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }
}

/// Samples binding points and uniform off-binding points and checks each of
/// the four adaptedness conditions. Violations are reported, never raised.
pub fn check_adapted(
    field: &dyn ConeField,
    alpha: &dyn OneForm,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<AdaptednessReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("check_adapted needs at least one sample".into()));
    }
    let mut binding = FlagResult::new("binding_tangent");
    let mut dtheta_section = FlagResult::new("dtheta_section");
    let mut alpha_section = FlagResult::new("alpha_section");
    let mut reeb_interior = FlagResult::new("reeb_interior");

    let mut rng = stream_rng(seed, 0);
    let mut buf = Vec::new();
    for _ in 0..samples {
        let psi = rng.random::<f64>() * TAU;
        let p = SpherePoint { z1: Complex64::from_polar(1.0, psi), z2: Complex64::new(0.0, 0.0) };
        buf.clear();
        field.generator_frame(&p, &mut buf);
        // TB is spanned by the Reeb direction on the binding
        let margin = buf
            .iter()
            .map(|d| {
                let off = d[1].hypot(d[2]).atan2(d[0].abs());
                tol - off
            })
            .fold(f64::INFINITY, f64::min);
        binding.record(&p, if buf.is_empty() { f64::NAN } else { margin });
    }

    let mut rng = stream_rng(seed, 1);
    let mut taken = 0;
    while taken < samples {
        let p = uniform_sphere_point(&mut rng);
        if p.z2.norm() < 1e-9 {
            continue;
        }
        taken += 1;
        buf.clear();
        field.generator_frame(&p, &mut buf);
        let rates = crate::geometry::dtheta_frame(&p)?;
        let mut min_dtheta = f64::INFINITY;
        let mut min_alpha = f64::INFINITY;
        for d in &buf {
            let u = d / d.norm();
            min_dtheta = min_dtheta.min(rates.dot(&u));
            let amb = frame_to_ambient(&p, &u);
            min_alpha = min_alpha.min(alpha.eval(&p, &amb));
        }
        if buf.is_empty() {
            min_dtheta = f64::NAN;
            min_alpha = f64::NAN;
        }
        dtheta_section.record(&p, min_dtheta);
        alpha_section.record(&p, min_alpha);

        let margin = match field.enclosing(&p) {
            Ok(cone) => {
                let r = reeb_field(&p);
                cone.half_angle - angle_between4(&r.v, &cone.axis.v) - tol
            }
            Err(_) => f64::NAN,
        };
        reeb_interior.record(&p, margin);
    }

    Ok(AdaptednessReport {
        flags: [binding, dtheta_section, alpha_section, reeb_interior],
    })
}
