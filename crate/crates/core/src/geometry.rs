//! The 3-sphere as the trivial open book `OB(D², 1)`.
//!
//! Points are kept in the complex chart `(z1, z2)` with `|z1|² + |z2|² = 1`.
//! The binding is the circle `{z2 = 0}`, the open-book angle is `arg(z2)`, and
//! the page at angle `phi` is the closed unit `z1`-disk embedded by
//! `w ↦ (w, sqrt(1 - |w|²) e^{i phi})`. Ambient real coordinates are ordered
//! `(x1, y1, x2, y2)`.
//!
//! Tangent vectors are handled in two forms: ambient 4-vectors, and coordinates
//! in the orthonormal frame `(R, J, K)` at the base point, where `R = i·z` is the
//! Reeb (Hopf) field and `J = (-z̄2, z̄1)`, `K = i·J` span the contact plane.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// Points with `|z2|` at or below this are treated as lying on the binding.
pub const BINDING_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl SpherePoint {
    /// Builds a point, rescaling `(z1, z2)` onto the unit sphere.
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        let n = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector { norm: n });
        }
        Ok(Self { z1: z1 / n, z2: z2 / n })
    }

    pub fn from_ambient(x: &Vector4<f64>) -> Result<Self> {
        Self::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
    }

    pub fn ambient(&self) -> Vector4<f64> {
        Vector4::new(self.z1.re, self.z1.im, self.z2.re, self.z2.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn renormalized(self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self { z1: self.z1 / n, z2: self.z2 / n }
    }

    pub fn on_binding(&self) -> bool {
        self.z2.norm() <= BINDING_EPS
    }

    /// Page coordinate `w = z1`.
    pub fn page_coordinate(&self) -> Complex64 {
        self.z1
    }

    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let c = self.ambient().dot(&other.ambient()).clamp(-1.0, 1.0);
        c.acos()
    }
}

/// Open-book angle `arg(z2)` in `[0, 2π)`.
pub fn theta(p: &SpherePoint) -> Result<f64> {
    let m = p.z2.norm();
    if m <= BINDING_EPS {
        return Err(Error::BindingPoint { modulus: m });
    }
    Ok(wrap_angle(p.z2.arg()))
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `b - a` reduced to `(-π, π]`.
pub fn angle_delta(a: f64, b: f64) -> f64 {
    let mut d = (b - a).rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PagePoint {
    pub phi: f64,
    pub w: Complex64,
}

impl PagePoint {
    pub fn new(phi: f64, w: Complex64) -> Result<Self> {
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "page coordinate |w| = {} exceeds 1",
                w.norm()
            )));
        }
        Ok(Self { phi: wrap_angle(phi), w })
    }

    pub fn to_sphere(&self) -> SpherePoint {
        let s = (1.0 - self.w.norm_sqr()).max(0.0).sqrt();
        SpherePoint {
            z1: self.w,
            z2: Complex64::from_polar(s, self.phi),
        }
    }

    /// Inverse of the chart embedding; fails on the binding where the page
    /// label is undefined.
    pub fn from_sphere(p: &SpherePoint) -> Result<Self> {
        Ok(Self {
            phi: theta(p)?,
            w: p.z1,
        })
    }

    pub fn on_binding(&self) -> bool {
        self.w.norm() >= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub v: Vector4<f64>,
}

impl TangentVector {
    /// Wraps `v`, rejecting vectors with a normal component above `1e-10`.
    pub fn new(base: SpherePoint, v: Vector4<f64>) -> Result<Self> {
        let normal = v.dot(&base.ambient());
        if normal.abs() > 1e-10 * v.norm().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "vector is not tangent to the sphere (normal component {normal:e})"
            )));
        }
        Ok(Self { base, v })
    }

    /// Orthogonal projection of an arbitrary ambient vector onto `T_p S³`.
    pub fn project(base: SpherePoint, v: Vector4<f64>) -> Self {
        let x = base.ambient();
        Self { base, v: v - x * v.dot(&x) }
    }

    pub fn from_frame(base: SpherePoint, c: &Vector3<f64>) -> Self {
        Self { base, v: frame_to_ambient(&base, c) }
    }

    pub fn frame_coords(&self) -> Vector3<f64> {
        ambient_to_frame(&self.base, &self.v)
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }
}

/// Orthonormal frame `(R, J, K)` of `T_p S³`.
pub fn frame(p: &SpherePoint) -> [Vector4<f64>; 3] {
    let (z1, z2) = (p.z1, p.z2);
    let i = Complex64::i();
    let r = (i * z1, i * z2);
    let j = (-z2.conj(), z1.conj());
    let k = (i * j.0, i * j.1);
    [
        Vector4::new(r.0.re, r.0.im, r.1.re, r.1.im),
        Vector4::new(j.0.re, j.0.im, j.1.re, j.1.im),
        Vector4::new(k.0.re, k.0.im, k.1.re, k.1.im),
    ]
}

pub fn frame_to_ambient(p: &SpherePoint, c: &Vector3<f64>) -> Vector4<f64> {
    let [r, j, k] = frame(p);
    r * c[0] + j * c[1] + k * c[2]
}

pub fn ambient_to_frame(p: &SpherePoint, v: &Vector4<f64>) -> Vector3<f64> {
    let [r, j, k] = frame(p);
    Vector3::new(r.dot(v), j.dot(v), k.dot(v))
}

/// Time-`t` Hopf flow `(e^{it} z1, e^{it} z2)`.
pub fn hopf_flow(p: &SpherePoint, t: f64) -> SpherePoint {
    let e = Complex64::from_polar(1.0, t);
    SpherePoint { z1: e * p.z1, z2: e * p.z2 }
}

/// Reeb field of `α = Σ (x dy − y dx)` on the unit sphere: the generator of
/// [`hopf_flow`].
pub fn reeb_field(p: &SpherePoint) -> TangentVector {
    TangentVector { base: *p, v: frame(p)[0] }
}

/// A 1-form on `S³`, evaluated on ambient tangent vectors.
pub trait OneForm: Sync {
    fn eval(&self, p: &SpherePoint, v: &Vector4<f64>) -> f64;
}

/// The standard contact form `α = x1 dy1 − y1 dx1 + x2 dy2 − y2 dx2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardContact;

impl OneForm for StandardContact {
    fn eval(&self, p: &SpherePoint, v: &Vector4<f64>) -> f64 {
        contact_form(p, v)
    }
}

pub fn contact_form(p: &SpherePoint, v: &Vector4<f64>) -> f64 {
    let x = p.ambient();
    x[0] * v[1] - x[1] * v[0] + x[2] * v[3] - x[3] * v[2]
}

/// `dα(u, v) = 2 (dx1∧dy1 + dx2∧dy2)(u, v)`.
pub fn d_contact_form(u: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
    2.0 * (u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2])
}

/// `dθ(v)` for the open-book angle `θ = arg z2`.
pub fn dtheta(p: &SpherePoint, v: &Vector4<f64>) -> Result<f64> {
    let m2 = p.z2.norm_sqr();
    if m2.sqrt() <= BINDING_EPS {
        return Err(Error::BindingPoint { modulus: m2.sqrt() });
    }
    Ok((p.z2.re * v[3] - p.z2.im * v[2]) / m2)
}

/// `dθ` of the frame vectors `(R, J, K)`: the rate of change of the open-book
/// angle along each frame direction.
pub fn dtheta_frame(p: &SpherePoint) -> Result<Vector3<f64>> {
    let m = p.z2.norm();
    if m <= BINDING_EPS {
        return Err(Error::BindingPoint { modulus: m });
    }
    let q = p.z1.conj() / p.z2;
    Ok(Vector3::new(1.0, q.im, q.re))
}

/// Walks arclength `s` along the great circle leaving `p` in unit direction
/// `dir` (ambient, tangent), renormalizing the result.
pub fn geodesic_step(p: &SpherePoint, dir: &Vector4<f64>, s: f64) -> SpherePoint {
    let x = p.ambient() * s.cos() + dir * s.sin();
    let n = x.norm();
    SpherePoint {
        z1: Complex64::new(x[0] / n, x[1] / n),
        z2: Complex64::new(x[2] / n, x[3] / n),
    }
}

/// Uniformly distributed point on `S³` (normalized 4-dimensional Gaussian).
pub fn uniform_sphere_point<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    loop {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt();
        if n > 1e-8 {
            return SpherePoint {
                z1: Complex64::new(g[0] / n, g[1] / n),
                z2: Complex64::new(g[2] / n, g[3] / n),
            };
        }
    }
}

/// Which measure a page integral is taken against.
///
/// `Contact` is `dα` restricted to the page (twice Euclidean area, total `2π`);
/// `Normalized` is Euclidean area divided by `π` (total `1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PageMeasure {
    Contact,
    #[default]
    Normalized,
}

impl PageMeasure {
    /// Density with respect to Euclidean area in the `w`-disk.
    pub fn density(self) -> f64 {
        match self {
            PageMeasure::Contact => 2.0,
            PageMeasure::Normalized => 1.0 / PI,
        }
    }

    pub fn page_mass(self) -> f64 {
        self.density() * PI
    }

    pub fn name(self) -> &'static str {
        match self {
            PageMeasure::Contact => "contact",
            PageMeasure::Normalized => "normalized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "contact" => Ok(PageMeasure::Contact),
            "normalized" => Ok(PageMeasure::Normalized),
            other => Err(Error::InvalidInput(format!("unknown measure '{other}'"))),
        }
    }
}

/// Node counts for page and volume quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadConfig {
    pub radial: usize,
    pub angular: usize,
    pub volume_lattice: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { radial: 64, angular: 128, volume_lattice: 48 }
    }
}

/// `∫_{P_phi} f dμ` by Gauss–Legendre in the radius times the trapezoid rule in
/// the angle.
pub fn page_measure_integrate<F>(f: F, phi: f64, m: PageMeasure, quad: &QuadConfig) -> Result<f64>
where
    F: Fn(&PagePoint) -> f64,
{
    if quad.radial == 0 || quad.angular == 0 {
        return Err(Error::InvalidInput("quadrature node counts must be positive".into()));
    }
    let radial = GaussLegendre::new(quad.radial);
    let dpsi = TAU / quad.angular as f64;
    let phi = wrap_angle(phi);
    let mut total = 0.0;
    for (r, wr) in radial.on_interval(0.0, 1.0) {
        let mut ring = 0.0;
        for k in 0..quad.angular {
            let psi = dpsi * k as f64;
            let pt = PagePoint { phi, w: Complex64::from_polar(r, psi) };
            let v = f(&pt);
            if !v.is_finite() {
                return Err(Error::QuadratureDivergence {
                    node: format!("r = {r}, psi = {psi}"),
                });
            }
            ring += v;
        }
        total += wr * r * ring * dpsi;
    }
    Ok(m.density() * total)
}

/// `∫_{S³} α ∧ dα`, evaluated as a 3-form on the Hopf-coordinate tangent
/// vectors over a `lattice³` grid.
pub fn contact_volume_with(lattice: usize) -> f64 {
    let lattice = lattice.max(1);
    let eta_rule = GaussLegendre::new(lattice);
    let dxi = TAU / lattice as f64;
    let mut total = 0.0;
    for (eta, w_eta) in eta_rule.on_interval(0.0, PI / 2.0) {
        let (se, ce) = eta.sin_cos();
        for a in 0..lattice {
            let xi1 = dxi * a as f64;
            let (s1, c1) = xi1.sin_cos();
            for b in 0..lattice {
                let xi2 = dxi * b as f64;
                let (s2, c2) = xi2.sin_cos();
                let x = Vector4::new(ce * c1, ce * s1, se * c2, se * s2);
                let p = SpherePoint {
                    z1: Complex64::new(x[0], x[1]),
                    z2: Complex64::new(x[2], x[3]),
                };
                let d_eta = Vector4::new(-se * c1, -se * s1, ce * c2, ce * s2);
                let d_xi1 = Vector4::new(-ce * s1, ce * c1, 0.0, 0.0);
                let d_xi2 = Vector4::new(0.0, 0.0, -se * s2, se * c2);
                let form = contact_three_form(&p, &d_xi1, &d_xi2, &d_eta);
                total += w_eta * dxi * dxi * form;
            }
        }
    }
    total.abs()
}

/// `(α ∧ dα)(u, v, w)`.
pub fn contact_three_form(p: &SpherePoint, u: &Vector4<f64>, v: &Vector4<f64>, w: &Vector4<f64>) -> f64 {
    contact_form(p, u) * d_contact_form(v, w) - contact_form(p, v) * d_contact_form(u, w)
        + contact_form(p, w) * d_contact_form(u, v)
}

/// Contact volume at the default lattice, computed once.
pub fn contact_volume() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| contact_volume_with(QuadConfig::default().volume_lattice))
}

/// Round (Riemannian) volume of the unit 3-sphere, `2π²`.
pub fn round_volume() -> f64 {
    2.0 * PI * PI
}
