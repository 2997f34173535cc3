//! Measurable subsets of a page and integration over them.
//!
//! Regions live in the `w`-disk of a page. Integrals are taken in polar
//! coordinates about a chosen origin: each ray is cut into chords inside the
//! region (always clipped to the closed unit disk), the radial integral runs
//! over the chords, and the angular integral is adaptive Gauss–Kronrod split at
//! the angles where the region's boundary is tangent to the ray.

use crate::error::{Error, Result};
use crate::geometry::PageMeasure;
use crate::quadrature::{adaptive, GaussLegendre};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::path::Path;

pub type Interval = (f64, f64);

pub trait PageSet: Send + Sync + std::fmt::Debug {
    fn contains(&self, w: Complex64) -> bool;

    /// Parameter intervals `t ≥ 0` with `origin + t·dir` in the set, for a unit
    /// `dir`. Intervals are sorted and disjoint.
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval>;

    /// Ray angles (from `origin`) where the chord structure changes.
    fn angular_hints(&self, _origin: Complex64) -> Vec<f64> {
        Vec::new()
    }

    /// Circles making up the boundary, as `(center, radius)`.
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

impl<T: PageSet + ?Sized> PageSet for &T {
    fn contains(&self, w: Complex64) -> bool {
        (**self).contains(w)
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        (**self).chords(origin, dir)
    }
    fn angular_hints(&self, origin: Complex64) -> Vec<f64> {
        (**self).angular_hints(origin)
    }
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        (**self).boundary_circles()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySet;

impl PageSet for EmptySet {
    fn contains(&self, _w: Complex64) -> bool {
        false
    }
    fn chords(&self, _origin: Complex64, _dir: Complex64) -> Vec<Interval> {
        Vec::new()
    }
    fn describe(&self) -> String {
        "empty".into()
    }
}

/// The whole page (closed unit disk).
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPage;

impl PageSet for FullPage {
    fn contains(&self, w: Complex64) -> bool {
        w.norm_sqr() <= 1.0
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        disk_chord(origin, dir, Complex64::new(0.0, 0.0), 1.0).into_iter().collect()
    }
    fn angular_hints(&self, origin: Complex64) -> Vec<f64> {
        disk_hints(origin, Complex64::new(0.0, 0.0), 1.0)
    }
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        vec![(Complex64::new(0.0, 0.0), 1.0)]
    }
    fn describe(&self) -> String {
        "page".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn euclidean_area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

impl PageSet for Disk {
    fn contains(&self, w: Complex64) -> bool {
        (w - self.center).norm_sqr() <= self.radius * self.radius
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        disk_chord(origin, dir, self.center, self.radius).into_iter().collect()
    }
    fn angular_hints(&self, origin: Complex64) -> Vec<f64> {
        disk_hints(origin, self.center, self.radius)
    }
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        vec![(self.center, self.radius)]
    }
    fn describe(&self) -> String {
        format!("disk(center=({}, {}), r={})", self.center.re, self.center.im, self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub center: Complex64,
    pub inner: f64,
    pub outer: f64,
}

impl PageSet for Annulus {
    fn contains(&self, w: Complex64) -> bool {
        let d2 = (w - self.center).norm_sqr();
        d2 <= self.outer * self.outer && d2 >= self.inner * self.inner
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        let outer: Vec<Interval> = disk_chord(origin, dir, self.center, self.outer).into_iter().collect();
        let inner: Vec<Interval> = disk_chord(origin, dir, self.center, self.inner).into_iter().collect();
        subtract_intervals(&outer, &inner)
    }
    fn angular_hints(&self, origin: Complex64) -> Vec<f64> {
        let mut h = disk_hints(origin, self.center, self.outer);
        h.extend(disk_hints(origin, self.center, self.inner));
        h
    }
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        vec![(self.center, self.inner), (self.center, self.outer)]
    }
    fn describe(&self) -> String {
        format!(
            "annulus(center=({}, {}), inner={}, outer={})",
            self.center.re, self.center.im, self.inner, self.outer
        )
    }
}

/// `{w : Re(conj(normal)·w) ≥ offset}` for a unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Complex64,
    pub offset: f64,
}

impl PageSet for HalfPlane {
    fn contains(&self, w: Complex64) -> bool {
        (self.normal.conj() * w).re >= self.offset
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        let a = (self.normal.conj() * origin).re;
        let b = (self.normal.conj() * dir).re;
        let interval = if b.abs() < 1e-300 {
            (a >= self.offset).then_some((0.0, f64::INFINITY))
        } else {
            let t0 = (self.offset - a) / b;
            if b > 0.0 {
                Some((t0.max(0.0), f64::INFINITY))
            } else if t0 > 0.0 {
                Some((0.0, t0))
            } else {
                None
            }
        };
        interval.into_iter().collect()
    }
    fn angular_hints(&self, _origin: Complex64) -> Vec<f64> {
        let a = self.normal.arg();
        vec![a + PI / 2.0, a - PI / 2.0]
    }
    fn describe(&self) -> String {
        format!("halfplane(normal=({}, {}), offset={})", self.normal.re, self.normal.im, self.offset)
    }
}

/// Indicator raster over `[-1, 1]²`; row 0 is the top (`im = 1`) edge.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub cells: Vec<Vec<bool>>,
}

impl IndicatorGrid {
    pub fn new(cells: Vec<Vec<bool>>) -> Result<Self> {
        let cols = cells.first().map(|r| r.len()).unwrap_or(0);
        if cells.is_empty() || cols == 0 || cells.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("indicator grid must be a non-empty rectangle".into()));
        }
        Ok(Self { cells })
    }

    /// Whitespace- or comma-separated 0/1 rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cells = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<bool>> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| match s {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::InvalidInput(format!("grid line {}: bad cell '{other}'", i + 1))),
                })
                .collect();
            cells.push(row?);
        }
        Self::new(cells)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

impl PageSet for IndicatorGrid {
    fn contains(&self, w: Complex64) -> bool {
        let rows = self.cells.len();
        let cols = self.cells[0].len();
        if w.re < -1.0 || w.re > 1.0 || w.im < -1.0 || w.im > 1.0 {
            return false;
        }
        let c = (((w.re + 1.0) / 2.0) * cols as f64).floor().min(cols as f64 - 1.0) as usize;
        let r = (((1.0 - w.im) / 2.0) * rows as f64).floor().min(rows as f64 - 1.0) as usize;
        self.cells[r][c]
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        let cells = self.cells.len().max(self.cells[0].len());
        sampled_chords(|w| self.contains(w), origin, dir, 3.0, 8 * cells)
    }
    fn describe(&self) -> String {
        format!("grid({}x{})", self.cells.len(), self.cells[0].len())
    }
}

/// Intersection of several regions.
#[derive(Debug, Default)]
pub struct Intersection<'a> {
    pub parts: Vec<Box<dyn PageSet + 'a>>,
}

impl<'a> Intersection<'a> {
    pub fn new(parts: Vec<Box<dyn PageSet + 'a>>) -> Self {
        Self { parts }
    }
}

impl PageSet for Intersection<'_> {
    fn contains(&self, w: Complex64) -> bool {
        self.parts.iter().all(|p| p.contains(w))
    }
    fn chords(&self, origin: Complex64, dir: Complex64) -> Vec<Interval> {
        let mut acc: Vec<Interval> = vec![(0.0, f64::INFINITY)];
        for p in &self.parts {
            acc = intersect_intervals(&acc, &p.chords(origin, dir));
            if acc.is_empty() {
                break;
            }
        }
        acc
    }
    fn angular_hints(&self, origin: Complex64) -> Vec<f64> {
        self.parts.iter().flat_map(|p| p.angular_hints(origin)).collect()
    }
    fn boundary_circles(&self) -> Vec<(Complex64, f64)> {
        self.parts.iter().flat_map(|p| p.boundary_circles()).collect()
    }
    fn describe(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|p| p.describe()).collect();
        format!("intersection[{}]", parts.join(", "))
    }
}

fn disk_chord(origin: Complex64, dir: Complex64, center: Complex64, radius: f64) -> Option<Interval> {
    if radius <= 0.0 {
        return None;
    }
    let oc = origin - center;
    let b = (dir.conj() * oc).re;
    let q = oc.norm_sqr() - radius * radius;
    let disc = b * b - q;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // the smaller-magnitude root comes from the product of roots
    let (lo, hi) = if b > 0.0 {
        let r = -b - s;
        (r, q / r)
    } else {
        let r = -b + s;
        (q / r, r)
    };
    if hi <= 0.0 {
        return None;
    }
    Some((lo.max(0.0), hi))
}

fn disk_hints(origin: Complex64, center: Complex64, radius: f64) -> Vec<f64> {
    let d = (center - origin).norm();
    if radius <= 0.0 || d <= radius {
        return Vec::new();
    }
    let a = (center - origin).arg();
    let spread = (radius / d).asin();
    vec![a - spread, a, a + spread]
}

pub fn intersect_intervals(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn subtract_intervals(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    for &(mut lo, hi) in a {
        for &(blo, bhi) in b {
            if bhi <= lo || blo >= hi {
                continue;
            }
            if blo > lo {
                out.push((lo, blo));
            }
            lo = lo.max(bhi);
        }
        if hi > lo {
            out.push((lo, hi));
        }
    }
    out
}

/// Chords of an arbitrary indicator found by scanning the ray and bisecting
/// each transition.
pub fn sampled_chords<F: Fn(Complex64) -> bool>(
    contains: F,
    origin: Complex64,
    dir: Complex64,
    t_max: f64,
    steps: usize,
) -> Vec<Interval> {
    let steps = steps.max(2);
    let h = t_max / steps as f64;
    let at = |t: f64| contains(origin + dir * t);
    let refine = |mut a: f64, mut b: f64, inside_at_a: bool| {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if at(m) == inside_at_a {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut out = Vec::new();
    let mut inside = at(0.0);
    let mut start = 0.0;
    for k in 1..=steps {
        let t = h * k as f64;
        let now = at(t);
        if now != inside {
            let edge = refine(t - h, t, inside);
            if inside {
                out.push((start, edge));
            } else {
                start = edge;
            }
            inside = now;
        }
    }
    if inside {
        out.push((start, t_max));
    }
    out
}

const REGION_TOL: f64 = 1e-12;

fn angular_breaks(set: &dyn PageSet, origin: Complex64) -> Vec<f64> {
    let mut hints: Vec<f64> = set
        .angular_hints(origin)
        .into_iter()
        .chain(FullPage.angular_hints(origin))
        .map(|a| a.rem_euclid(TAU))
        .collect();
    let mut circles = set.boundary_circles();
    circles.extend(FullPage.boundary_circles());
    for (i, &(c1, r1)) in circles.iter().enumerate() {
        for &(c2, r2) in &circles[i + 1..] {
            for p in circle_intersections(c1, r1, c2, r2) {
                if (p - origin).norm() > 1e-14 {
                    hints.push((p - origin).arg().rem_euclid(TAU));
                }
            }
        }
    }
    hints.push(0.0);
    hints.push(TAU);
    hints.sort_by(f64::total_cmp);
    hints.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    hints
}

fn circle_intersections(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> Vec<Complex64> {
    let d = (c2 - c1).norm();
    if d < 1e-15 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) / d;
    let base = c1 + u * a;
    let n = Complex64::new(-u.im, u.re);
    vec![base + n * h, base - n * h]
}

fn page_chords(set: &dyn PageSet, origin: Complex64, dir: Complex64) -> Vec<Interval> {
    let page: Vec<Interval> = FullPage.chords(origin, dir);
    intersect_intervals(&set.chords(origin, dir), &page)
}

/// `μ(set ∩ page)` with polar integration about `origin`.
pub fn region_mass(set: &dyn PageSet, m: PageMeasure, origin: Complex64) -> Result<f64> {
    let breaks = angular_breaks(set, origin);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive(
            |psi| {
                let dir = Complex64::from_polar(1.0, psi);
                Ok(page_chords(set, origin, dir)
                    .iter()
                    .map(|(lo, hi)| 0.5 * (hi * hi - lo * lo))
                    .sum())
            },
            w[0],
            w[1],
            4,
            REGION_TOL,
        )?;
    }
    Ok(m.density() * total)
}

/// `∫_{set ∩ page} f dμ`, with `radial_nodes` Gauss–Legendre nodes per chord.
pub fn integrate_region<F>(
    f: F,
    set: &dyn PageSet,
    m: PageMeasure,
    origin: Complex64,
    radial_nodes: usize,
    abs_tol: f64,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let rule = GaussLegendre::new(radial_nodes.max(1));
    let breaks = angular_breaks(set, origin);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive(
            |psi| {
                let dir = Complex64::from_polar(1.0, psi);
                let mut acc = 0.0;
                for (lo, hi) in page_chords(set, origin, dir) {
                    for (r, wr) in rule.on_interval(lo, hi) {
                        let pt = origin + dir * r;
                        let v = f(pt)?;
                        if !v.is_finite() {
                            return Err(Error::QuadratureDivergence {
                                node: format!("w = ({}, {})", pt.re, pt.im),
                            });
                        }
                        acc += wr * r * v;
                    }
                }
                Ok(acc)
            },
            w[0],
            w[1],
            4,
            abs_tol,
        )?;
    }
    Ok(m.density() * total)
}

/// Closed-form area of the intersection of two disks (the lens formula).
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interval_algebra() {
        assert_eq!(intersect_intervals(&[(0.0, 2.0), (3.0, 5.0)], &[(1.0, 4.0)]), vec![(1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(subtract_intervals(&[(0.0, 5.0)], &[(1.0, 2.0), (3.0, 4.0)]), vec![(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]);
    }

    #[test]
    fn page_and_disk_masses() {
        let m = PageMeasure::Normalized;
        assert_abs_diff_eq!(region_mass(&FullPage, m, c(0.0, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(region_mass(&FullPage, m, c(0.3, -0.5)).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(region_mass(&EmptySet, m, c(0.0, 0.0)).unwrap(), 0.0);
        let d = Disk::new(c(0.2, 0.1), 0.3);
        assert_abs_diff_eq!(region_mass(&d, PageMeasure::Contact, c(0.0, 0.0)).unwrap(), 2.0 * d.euclidean_area(), epsilon = 1e-10);
        // a tiny disk far from the origin is still found
        let tiny = Disk::new(c(-0.7, 0.4), 1e-3);
        assert_abs_diff_eq!(region_mass(&tiny, PageMeasure::Contact, c(0.0, 0.0)).unwrap(), 2.0 * tiny.euclidean_area(), epsilon = 1e-14);
    }

    #[test]
    fn disk_clipped_by_the_page() {
        // unit page and a disk of radius 0.5 centred on the binding: lens area
        let d = Disk::new(c(1.0, 0.0), 0.5);
        let mass = region_mass(&d, PageMeasure::Contact, c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(mass, 2.0 * lens_area(1.0, 0.5, 1.0), epsilon = 1e-9);
    }

    #[test]
    fn half_page_and_annulus() {
        let half = HalfPlane { normal: c(1.0, 0.0), offset: 0.0 };
        assert_abs_diff_eq!(region_mass(&half, PageMeasure::Normalized, c(0.0, 0.0)).unwrap(), 0.5, epsilon = 1e-10);
        let ann = Annulus { center: c(0.0, 0.0), inner: 0.25, outer: 0.5 };
        let expect = (0.25 - 0.0625) * PI;
        assert_abs_diff_eq!(region_mass(&ann, PageMeasure::Contact, c(0.0, 0.0)).unwrap(), 2.0 * expect, epsilon = 1e-10);
    }

    #[test]
    fn indicator_grid_is_approximately_its_cell_area() {
        // 4x4 raster with the upper-right quadrant set
        let g = IndicatorGrid::parse("0 0 1 1\n0 0 1 1\n0 0 0 0\n0 0 0 0\n").unwrap();
        assert!(g.contains(c(0.5, 0.5)));
        assert!(!g.contains(c(-0.5, 0.5)));
        // quadrant of the unit page
        let mass = region_mass(&g, PageMeasure::Normalized, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(mass, 0.25, epsilon = 1e-6);
        assert!(IndicatorGrid::parse("0 1\n1\n").is_err());
    }

    #[test]
    fn integrate_second_moment() {
        let v = integrate_region(|w| Ok(w.norm_sqr()), &FullPage, PageMeasure::Normalized, c(0.0, 0.0), 16, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn lens_area_matches_quadrature(
            x1 in -0.5f64..0.5, y1 in -0.5f64..0.5, r1 in 0.01f64..0.45,
            x2 in -0.5f64..0.5, y2 in -0.5f64..0.5, r2 in 0.01f64..0.45,
        ) {
            let a = Disk::new(c(x1, y1), r1);
            let b = Disk::new(c(x2, y2), r2);
            prop_assume!((a.center.norm() + r1) < 1.0 && (b.center.norm() + r2) < 1.0);
            let both = Intersection::new(vec![Box::new(a), Box::new(b)]);
            let q = region_mass(&both, PageMeasure::Contact, a.center).unwrap() / 2.0;
            let exact = lens_area(r1, r2, (a.center - b.center).norm());
            prop_assert!((q - exact).abs() < 1e-9, "{} vs {}", q, exact);
        }

        #[test]
        fn mass_is_monotone_in_the_set(r in 0.05f64..0.9, dr in 0.0f64..0.3, x in -0.5f64..0.5) {
            let small = Disk::new(c(x, 0.1), r);
            let big = Disk::new(c(x, 0.1), r + dr);
            let m = PageMeasure::Normalized;
            let origin = c(0.0, 0.0);
            prop_assert!(region_mass(&small, m, origin).unwrap() <= region_mass(&big, m, origin).unwrap() + 1e-12);
        }
    }
}
