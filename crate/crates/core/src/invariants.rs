//! Measures of integrability, sections with their return times, Calabi
//! invariants and page statistics.

use crate::cone::{inner_angle, smoothstep, ConeField};
use crate::error::{Error, Result};
use crate::geometry::{
    angle_delta, contact_volume, frame, frame_to_ambient, geodesic_step, round_volume, theta, uniform_sphere_point,
    PageMeasure, PagePoint, SpherePoint,
};
use crate::region::{integrate_region, region_mass, FullPage, PageSet};
use crate::rng::{par_map_streams, stream_rng};
use crate::stats::mean_stderr;
use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

/// Volume form used by the mean measure of integrability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum VolumeKind {
    #[default]
    Contact,
    Round,
}

impl VolumeKind {
    pub fn total(self) -> f64 {
        match self {
            VolumeKind::Contact => contact_volume(),
            VolumeKind::Round => round_volume(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VolumeKind::Contact => "contact",
            VolumeKind::Round => "round",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "contact" => Ok(VolumeKind::Contact),
            "round" => Ok(VolumeKind::Round),
            other => Err(Error::InvalidInput(format!("unknown volume '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Monte Carlo integral of the inner angle over `S³`.
pub fn integrability_mean(field: &dyn ConeField, n: usize, seed: u64, volume: VolumeKind) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::InvalidInput("integrability_mean needs at least 2 samples".into()));
    }
    let vals: Result<Vec<f64>> = par_map_streams(seed, n, |_, rng| inner_angle(field, &uniform_sphere_point(rng)))
        .into_iter()
        .collect();
    let (mean, se) = mean_stderr(&vals?);
    let vol = volume.total();
    Ok(Estimate { value: mean * vol, stderr: se * vol, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEstimate {
    pub value: f64,
    pub sample_max: f64,
    pub polish_delta: f64,
    pub argmax: SpherePoint,
    pub n: usize,
}

pub const POLISH_STEPS: usize = 20;

/// Largest inner angle over `n` uniform samples, then polished by
/// [`POLISH_STEPS`] rounds of shrinking random search around the best point.
pub fn integrability_max(field: &dyn ConeField, n: usize, seed: u64) -> Result<MaxEstimate> {
    if n == 0 {
        return Err(Error::InvalidInput("integrability_max needs at least 1 sample".into()));
    }
    let samples: Vec<Result<(f64, SpherePoint)>> = par_map_streams(seed, n, |_, rng| {
        let p = uniform_sphere_point(rng);
        Ok((inner_angle(field, &p)?, p))
    });
    let mut best: Option<(f64, SpherePoint)> = None;
    for s in samples {
        let (v, p) = s?;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, p));
        }
    }
    let (sample_max, mut argmax) = best.expect("n >= 1");
    let mut value = sample_max;
    let mut rng = stream_rng(seed, n as u64);
    let mut radius = 0.1;
    for _ in 0..POLISH_STEPS {
        for _ in 0..4 {
            let c = Vector3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            );
            if c.norm() < 1e-9 {
                continue;
            }
            let dir = frame_to_ambient(&argmax, &c.normalize());
            let q = geodesic_step(&argmax, &dir, radius);
            let v = inner_angle(field, &q)?;
            if v > value {
                value = v;
                argmax = q;
            }
        }
        radius *= 0.6;
    }
    Ok(MaxEstimate { value, sample_max, polish_delta: value - sample_max, argmax, n })
}

/// Default bound on return times before a section is declared non-integrable.
pub const DEFAULT_TAU_CAP: f64 = 1e6;

/// Integration step (arclength) for trajectory-family sections.
const FAMILY_STEP: f64 = TAU / 512.0;

/// A section of page-`0` trajectories and its first-return data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Section {
    /// Orbits of the Reeb (Hopf) flow; every return takes `2π`.
    ReebHopf,
    /// Hopf orbits traversed at speed `1 + ε·(Re z1)²`.
    PerturbedFlow { epsilon: f64 },
    /// Integral curves of the unit field tilted from the Reeb axis toward `J`
    /// by `tilt · alpha0 · smoothstep(|z2| / collar_eps) · |z2|²`, parameterized
    /// by arclength.
    TrajectoryFamily { alpha0: f64, collar_eps: f64, tilt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnData {
    /// Page points of returns `1..=n`.
    pub points: Vec<Complex64>,
    /// Cumulative return times `τ_1..=τ_n`.
    pub tau_n: Vec<f64>,
}

impl Section {
    pub fn name(&self) -> String {
        match self {
            Section::ReebHopf => "reeb_hopf".into(),
            Section::PerturbedFlow { epsilon } => format!("perturbed_flow(epsilon={epsilon})"),
            Section::TrajectoryFamily { alpha0, collar_eps, tilt } => {
                format!("trajectory_family(alpha0={alpha0}, eps={collar_eps}, tilt={tilt})")
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Section::ReebHopf => Ok(()),
            Section::PerturbedFlow { epsilon } => {
                if !(epsilon > -1.0) || !epsilon.is_finite() {
                    return Err(Error::InvalidInput(format!("section.epsilon must exceed -1, got {epsilon}")));
                }
                Ok(())
            }
            Section::TrajectoryFamily { alpha0, collar_eps, tilt } => {
                if !(0.0..std::f64::consts::FRAC_PI_2).contains(&alpha0) || !(collar_eps > 0.0) || !(0.0..=1.0).contains(&tilt) {
                    return Err(Error::InvalidInput("trajectory family needs 0 <= alpha0 < pi/2, eps > 0, 0 <= tilt <= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Whether the return map is the identity.
    pub fn returns_in_place(&self) -> bool {
        !matches!(self, Section::TrajectoryFamily { .. })
    }

    /// First return: page point and return time of the trajectory from `w`.
    pub fn first_return(&self, w: Complex64) -> Result<(Complex64, f64)> {
        if w.norm_sqr() >= 1.0 {
            return Err(Error::BindingPoint { modulus: (1.0 - w.norm_sqr()).max(0.0).sqrt() });
        }
        match *self {
            Section::ReebHopf => Ok((w, TAU)),
            Section::PerturbedFlow { epsilon } => Ok((w, perturbed_return_time(epsilon, w))),
            Section::TrajectoryFamily { .. } => self.flow_return(w, 1.0),
        }
    }

    pub fn return_time(&self, w: Complex64) -> Result<f64> {
        Ok(self.first_return(w)?.1)
    }

    pub fn return_map(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.first_return(w)?.0)
    }

    /// The `n` successive returns from `w`.
    pub fn returns(&self, w: Complex64, n: usize) -> Result<ReturnData> {
        let mut points = Vec::with_capacity(n);
        let mut tau_n = Vec::with_capacity(n);
        let mut cur = w;
        let mut total = 0.0;
        for _ in 0..n {
            let (next, tau) = self.first_return(cur)?;
            total += tau;
            points.push(next);
            tau_n.push(total);
            cur = next;
        }
        Ok(ReturnData { points, tau_n })
    }

    /// Return time of the section trajectory through the page point of `p`.
    pub fn tau_at(&self, p: &SpherePoint) -> Result<f64> {
        self.return_time(p.page_coordinate())
    }

    /// Inverse of the `n`-th return map, by integrating backwards.
    pub fn inverse_return_map(&self, w: Complex64, n: usize) -> Result<Complex64> {
        if self.returns_in_place() {
            return Ok(w);
        }
        let mut cur = w;
        for _ in 0..n {
            cur = self.flow_return(cur, -1.0)?.0;
        }
        Ok(cur)
    }

    /// Unit velocity of a trajectory-family section at `p`.
    fn family_velocity(&self, p: &SpherePoint) -> Vector4<f64> {
        let Section::TrajectoryFamily { alpha0, collar_eps, tilt } = *self else {
            return frame(p)[0];
        };
        let m = p.z2.norm();
        let beta = tilt * alpha0 * smoothstep(m / collar_eps) * m * m;
        let (s, c) = beta.sin_cos();
        frame_to_ambient(p, &Vector3::new(c, s, 0.0))
    }

    fn rk4(&self, p: &SpherePoint, h: f64) -> SpherePoint {
        let x = p.ambient();
        let at = |y: Vector4<f64>| {
            let q = SpherePoint { z1: Complex64::new(y[0], y[1]), z2: Complex64::new(y[2], y[3]) }.renormalized();
            self.family_velocity(&q)
        };
        let k1 = at(x);
        let k2 = at(x + k1 * (0.5 * h));
        let k3 = at(x + k2 * (0.5 * h));
        let k4 = at(x + k3 * h);
        let y = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        SpherePoint { z1: Complex64::new(y[0], y[1]), z2: Complex64::new(y[2], y[3]) }.renormalized()
    }

    /// Integrates the section field (forwards for `sign > 0`) until the angle
    /// lift changes by `±2π`.
    fn flow_return(&self, w: Complex64, sign: f64) -> Result<(Complex64, f64)> {
        let start = PagePoint { phi: 0.0, w }.to_sphere();
        let h = sign * FAMILY_STEP;
        let cap = DEFAULT_TAU_CAP.min(1e4);
        let mut p = start;
        let mut angle = theta(&p)?;
        let mut lift = 0.0;
        let mut time = 0.0;
        loop {
            let q = self.rk4(&p, h);
            let qa = theta(&q)?;
            let next_lift = lift + angle_delta(angle, qa);
            if sign * next_lift >= TAU {
                // bisect the final step so the lift lands on ±2π
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let r = self.rk4(&p, h * mid);
                    let l = lift + angle_delta(angle, theta(&r)?);
                    if sign * l >= TAU {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let frac = 0.5 * (lo + hi);
                let end = self.rk4(&p, h * frac);
                return Ok((end.page_coordinate(), time + frac * FAMILY_STEP));
            }
            p = q;
            angle = qa;
            lift = next_lift;
            time += FAMILY_STEP;
            if time > cap {
                return Err(Error::NonIntegrableTau { tau: time, cap, re: w.re, im: w.im });
            }
        }
    }
}

/// `∫₀^{2π} dt / (1 + ε (Re e^{it} w)²)` by the trapezoid rule.
fn perturbed_return_time(epsilon: f64, w: Complex64) -> f64 {
    let k = 256;
    let h = TAU / k as f64;
    (0..k)
        .map(|j| {
            let x = (Complex64::from_polar(1.0, h * j as f64) * w).re;
            1.0 / (1.0 + epsilon * x * x)
        })
        .sum::<f64>()
        * h
}

fn check_tau(tau: f64, cap: f64, w: Complex64) -> Result<f64> {
    if !tau.is_finite() || tau > cap {
        return Err(Error::NonIntegrableTau { tau, cap, re: w.re, im: w.im });
    }
    Ok(tau)
}

const CALABI_RADIAL_NODES: usize = 16;
const CALABI_TOL: f64 = 1e-9;

/// `CAL_Γ(A) = ∫_A τ dμ`.
pub fn calabi(section: &Section, a: &dyn PageSet, m: PageMeasure, tau_cap: f64) -> Result<f64> {
    section.validate()?;
    if matches!(section, Section::ReebHopf) {
        return Ok(TAU * region_mass(a, m, Complex64::new(0.0, 0.0))?);
    }
    integrate_region(
        |w| check_tau(section.return_time(w)?, tau_cap, w),
        a,
        m,
        Complex64::new(0.0, 0.0),
        CALABI_RADIAL_NODES,
        CALABI_TOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRow {
    pub n: usize,
    pub cal_n: f64,
    pub cal_n_over_n: f64,
    /// `μ(A_n)`.
    pub mass: f64,
}

const JACOBIAN_STEP: f64 = 1e-5;

/// `CALⁿ = ∫_{A_n} τ_n dμ` for `n = 1..=n_max`, with `A_n` the image of `A`
/// under the `n`-th return map. The integral is pulled back to `A`.
pub fn calabi_growth(section: &Section, a: &dyn PageSet, m: PageMeasure, n_max: usize, tau_cap: f64) -> Result<Vec<GrowthRow>> {
    section.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidInput("calabi.n_max must be at least 1".into()));
    }
    let origin = Complex64::new(0.0, 0.0);
    if section.returns_in_place() {
        let mass = region_mass(a, m, origin)?;
        let base = calabi(section, a, m, tau_cap)?;
        return Ok((1..=n_max)
            .map(|n| {
                let cal_n = base * n as f64;
                GrowthRow { n, cal_n, cal_n_over_n: cal_n / n as f64, mass }
            })
            .collect());
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let jac = |w: Complex64| -> Result<f64> {
            let d = JACOBIAN_STEP;
            let fx = (section.returns(w + d, n)?.points[n - 1] - section.returns(w - d, n)?.points[n - 1]) / (2.0 * d);
            let fy = (section.returns(w + Complex64::new(0.0, d), n)?.points[n - 1]
                - section.returns(w - Complex64::new(0.0, d), n)?.points[n - 1])
                / (2.0 * d);
            Ok((fx.re * fy.im - fx.im * fy.re).abs())
        };
        let cal_n = integrate_region(
            |w| {
                let image = section.returns(w, n)?.points[n - 1];
                let tau_n = *section.returns(image, n)?.tau_n.last().expect("n >= 1");
                Ok(check_tau(tau_n, tau_cap, image)? * jac(w)?)
            },
            a,
            m,
            origin,
            CALABI_RADIAL_NODES,
            1e-7,
        )?;
        let mass = integrate_region(jac, a, m, origin, CALABI_RADIAL_NODES, 1e-7)?;
        rows.push(GrowthRow { n, cal_n, cal_n_over_n: cal_n / n as f64, mass });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageStats {
    pub mean: Complex64,
    /// `E|x − Ex|²` for the uniform law on a disk of area `μ(P)`.
    pub variance: f64,
    /// `μ(P)² / 12`.
    pub variance_interval: f64,
    pub page_mass: f64,
}

/// Center of mass and spread of the uniform distribution on the page.
pub fn page_uniform_stats(m: PageMeasure) -> Result<PageStats> {
    let origin = Complex64::new(0.0, 0.0);
    let total = region_mass(&FullPage, PageMeasure::Normalized, origin)?;
    let tol = 1e-13;
    let mre = integrate_region(|w| Ok(w.re), &FullPage, PageMeasure::Normalized, origin, 16, tol)? / total;
    let mim = integrate_region(|w| Ok(w.im), &FullPage, PageMeasure::Normalized, origin, 16, tol)? / total;
    let mean = Complex64::new(mre, mim);
    let second = integrate_region(|w| Ok((w - mean).norm_sqr()), &FullPage, PageMeasure::Normalized, origin, 16, tol)? / total;
    // rescale the unit disk to area μ(P)
    let page_mass = m.page_mass();
    let variance = second * page_mass / std::f64::consts::PI;
    Ok(PageStats { mean, variance, variance_interval: page_mass * page_mass / 12.0, page_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{CollaredConeField, ConstantConeField, HopfRayField};
    use crate::region::{Disk, EmptySet, HalfPlane};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flow_has_zero_integrability() {
        let mean = integrability_mean(&HopfRayField, 500, 1, VolumeKind::Contact).unwrap();
        assert_eq!(mean.value, 0.0);
        assert_eq!(integrability_max(&HopfRayField, 500, 1).unwrap().value, 0.0);
    }

    #[test]
    fn constant_field_integrability() {
        let f = ConstantConeField::new(0.2);
        let mean = integrability_mean(&f, 500, 1, VolumeKind::Contact).unwrap();
        assert_abs_diff_eq!(mean.value, 0.4 * contact_volume(), epsilon = 1e-9);
        assert_abs_diff_eq!(integrability_max(&f, 500, 1).unwrap().value, 0.4, epsilon = 1e-9);
    }

    #[test]
    fn collared_field_is_sandwiched() {
        let f = CollaredConeField::new(0.2, 0.3);
        let mean = integrability_mean(&f, 4000, 5, VolumeKind::Contact).unwrap();
        assert!(mean.value > 0.0 && mean.value < 0.4 * contact_volume());
        let max = integrability_max(&f, 4000, 5).unwrap();
        assert_abs_diff_eq!(max.value, 0.4, epsilon = 1e-3);
        assert!(max.polish_delta >= 0.0);
        assert!(mean.value <= max.value * contact_volume());
    }

    #[test]
    fn perturbed_return_time_matches_closed_form() {
        for &(eps, w) in &[(0.5, c(0.3, 0.4)), (2.0, c(-0.7, 0.1)), (0.0, c(0.2, 0.0))] {
            let tau = perturbed_return_time(eps, w);
            assert_abs_diff_eq!(tau, TAU / (1.0f64 + eps * w.norm_sqr()).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn calabi_of_flow_sections() {
        let m = PageMeasure::Contact;
        let cap = DEFAULT_TAU_CAP;
        let full = calabi(&Section::ReebHopf, &FullPage, m, cap).unwrap();
        assert_abs_diff_eq!(full / contact_volume(), 1.0, epsilon = 1e-3);
        assert_eq!(calabi(&Section::ReebHopf, &EmptySet, m, cap).unwrap(), 0.0);
        let half = HalfPlane { normal: c(1.0, 0.0), offset: 0.0 };
        assert_abs_diff_eq!(calabi(&Section::ReebHopf, &half, m, cap).unwrap() / contact_volume(), 0.5, epsilon = 1e-3);
        // ∫ 2π / sqrt(1 + ε r²) · 2 r dr dψ over the unit disk
        let eps = 0.8;
        let oracle = 2.0 * TAU * TAU * ((1.0f64 + eps).sqrt() - 1.0) / eps;
        let got = calabi(&Section::PerturbedFlow { epsilon: eps }, &FullPage, m, cap).unwrap();
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-7);
    }

    #[test]
    fn tau_cap_is_enforced() {
        let err = calabi(&Section::PerturbedFlow { epsilon: 0.5 }, &FullPage, PageMeasure::Contact, 1.0).unwrap_err();
        assert_eq!(err.kind(), "NonIntegrableTau");
    }

    #[test]
    fn growth_of_flow_sections() {
        let rows = calabi_growth(&Section::ReebHopf, &FullPage, PageMeasure::Contact, 10, DEFAULT_TAU_CAP).unwrap();
        for r in &rows {
            assert_abs_diff_eq!(r.cal_n / (r.n as f64 * contact_volume()), 1.0, epsilon = 2e-3);
            assert_abs_diff_eq!(r.mass, TAU, epsilon = 1e-6);
        }
        let one = calabi_growth(&Section::PerturbedFlow { epsilon: 0.3 }, &FullPage, PageMeasure::Contact, 1, DEFAULT_TAU_CAP).unwrap();
        let direct = calabi(&Section::PerturbedFlow { epsilon: 0.3 }, &FullPage, PageMeasure::Contact, DEFAULT_TAU_CAP).unwrap();
        assert_abs_diff_eq!(one[0].cal_n, direct, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_family_returns_are_continuous_and_invertible() {
        let s = Section::TrajectoryFamily { alpha0: 0.2, collar_eps: 0.3, tilt: 0.5 };
        let w = c(0.3, -0.2);
        let (next, tau) = s.first_return(w).unwrap();
        assert!(tau > 0.0);
        assert!((next - w).norm() > 1e-6, "tilted family should move page points");
        assert_abs_diff_eq!((s.inverse_return_map(next, 1).unwrap() - w).norm(), 0.0, epsilon = 1e-8);
        let d = 1e-4;
        let (near, _) = s.first_return(w + d).unwrap();
        assert!((near - next).norm() < 10.0 * d);
        let data = s.returns(w, 3).unwrap();
        assert!(data.tau_n.windows(2).all(|p| p[1] > p[0]));
        assert_abs_diff_eq!(data.tau_n[0], tau, epsilon = 1e-15);
    }

    #[test]
    fn trajectory_family_with_zero_tilt_is_the_hopf_flow() {
        let s = Section::TrajectoryFamily { alpha0: 0.2, collar_eps: 0.3, tilt: 0.0 };
        let (next, tau) = s.first_return(c(0.4, 0.1)).unwrap();
        assert_abs_diff_eq!(tau, TAU, epsilon = 1e-9);
        assert_abs_diff_eq!((next - c(0.4, 0.1)).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn calabi_is_additive() {
        let s = Section::PerturbedFlow { epsilon: 1.5 };
        let m = PageMeasure::Normalized;
        let left = HalfPlane { normal: c(1.0, 0.0), offset: 0.1 };
        let right = HalfPlane { normal: c(-1.0, 0.0), offset: -0.1 };
        let total = calabi(&s, &FullPage, m, DEFAULT_TAU_CAP).unwrap();
        let sum = calabi(&s, &left, m, DEFAULT_TAU_CAP).unwrap() + calabi(&s, &right, m, DEFAULT_TAU_CAP).unwrap();
        assert_abs_diff_eq!(total, sum, epsilon = 1e-7);
        let inner = calabi(&s, &Disk::new(c(0.1, 0.0), 0.3), m, DEFAULT_TAU_CAP).unwrap();
        assert!(inner < total);
    }

    #[test]
    fn page_statistics() {
        let st = page_uniform_stats(PageMeasure::Normalized).unwrap();
        assert!(st.mean.norm() < 1e-10);
        assert_abs_diff_eq!(st.variance, 1.0 / (2.0 * PI), epsilon = 1e-9);
        assert_abs_diff_eq!(st.variance_interval, 1.0 / 12.0, epsilon = 1e-15);
    }
}
