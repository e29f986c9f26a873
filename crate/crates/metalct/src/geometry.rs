//! Phantom scenes: background ellipse mixtures plus convex or piecewise-convex metal regions.
//!
//! Smooth boundary pieces are ellipse arcs, so support values, chords and tangency points
//! all have closed forms.

use std::f64::consts::{PI, TAU};

use ndarray::Array2;
use rayon::prelude::*;

use crate::beamhardening::EnergyModel;
use crate::model::{invalid, ImageGrid, ImageSpec, Line, Result, RigidMotion};

pub type Point = [f64; 2];

/// Minimum angle between one-sided tangents at a corner.
pub const ANGLE_TOL: f64 = 1e-3;
const JOIN_TOL: f64 = 1e-9;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

fn theta(phi: f64) -> Point {
    [phi.cos(), phi.sin()]
}

/// Ellipse `c + R(rot)·(a cos t, b sin t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Point,
    pub a: f64,
    pub b: f64,
    pub rot: f64,
}

impl Ellipse {
    pub fn new(center: Point, a: f64, b: f64, rot: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() || !rot.is_finite() {
            return Err(invalid(format!("ellipse semi-axes ({a}, {b})")));
        }
        if !center[0].is_finite() || !center[1].is_finite() {
            return Err(invalid("ellipse center not finite"));
        }
        Ok(Ellipse { center, a, b, rot })
    }

    pub fn circle(center: Point, r: f64) -> Result<Self> {
        Ellipse::new(center, r, r, 0.0)
    }

    fn to_local(&self, v: Point) -> Point {
        let (s, c) = self.rot.sin_cos();
        [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
    }

    fn to_world(&self, v: Point) -> Point {
        let (s, c) = self.rot.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    pub fn point(&self, t: f64) -> Point {
        let w = self.to_world([self.a * t.cos(), self.b * t.sin()]);
        [self.center[0] + w[0], self.center[1] + w[1]]
    }

    /// Unit tangent in the direction of increasing `t` (counterclockwise).
    pub fn tangent(&self, t: f64) -> Point {
        unit(self.to_world([-self.a * t.sin(), self.b * t.cos()]))
    }

    /// Parameter of the boundary point maximizing `x·θ(φ)`.
    pub fn support_param(&self, phi: f64) -> f64 {
        let u = self.to_local(theta(phi));
        (self.b * u[1]).atan2(self.a * u[0])
    }

    fn rho(&self, phi: f64) -> f64 {
        let u = self.to_local(theta(phi));
        (self.a * self.a * u[0] * u[0] + self.b * self.b * u[1] * u[1]).sqrt()
    }

    /// Support function h(φ) = max x·θ.
    pub fn support(&self, phi: f64) -> f64 {
        dot(self.center, theta(phi)) + self.rho(phi)
    }

    /// Length of the chord cut by the line `x·θ(φ) = s`.
    pub fn chord(&self, s: f64, phi: f64) -> f64 {
        let rho = self.rho(phi);
        let d = s - dot(self.center, theta(phi));
        let q = rho * rho - d * d;
        if q <= 0.0 {
            0.0
        } else {
            2.0 * self.a * self.b * q.sqrt() / (rho * rho)
        }
    }

    /// `(u/a)² + (v/b)² − 1` in the ellipse frame; negative inside.
    pub fn implicit(&self, p: Point) -> f64 {
        let q = self.to_local(sub(p, self.center));
        (q[0] / self.a).powi(2) + (q[1] / self.b).powi(2) - 1.0
    }

    pub fn contains(&self, p: Point) -> bool {
        self.implicit(p) <= 0.0
    }

    /// Parameter of a boundary point (inverse of `point`).
    pub fn param_of(&self, p: Point) -> f64 {
        let q = self.to_local(sub(p, self.center));
        (q[1] / self.b).atan2(q[0] / self.a)
    }

    /// Line positions τ (points sθ + τ·dir) where the line meets the ellipse.
    fn line_hits(&self, s: f64, phi: f64) -> Option<(f64, f64)> {
        let th = theta(phi);
        let dir = [-th[1], th[0]];
        let q0 = self.to_local(sub([s * th[0], s * th[1]], self.center));
        let e = self.to_local(dir);
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        let qa = e[0] * e[0] / a2 + e[1] * e[1] / b2;
        let qb = 2.0 * (q0[0] * e[0] / a2 + q0[1] * e[1] / b2);
        let qc = q0[0] * q0[0] / a2 + q0[1] * q0[1] / b2 - 1.0;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        Some(((-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa)))
    }

    pub fn area(&self) -> f64 {
        PI * self.a * self.b
    }

    pub fn transformed(&self, m: &RigidMotion) -> Ellipse {
        Ellipse { center: m.apply(self.center), a: self.a, b: self.b, rot: self.rot + m.angle }
    }
}

/// One boundary piece of a piecewise-convex region, traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    /// Arc of `ellipse` for parameters `t0 ≤ t ≤ t1`, with `0 < t1 − t0 < 2π`.
    Arc { ellipse: Ellipse, t0: f64, t1: f64 },
    Segment { p0: Point, p1: Point },
}

impl Piece {
    pub fn start(&self) -> Point {
        match *self {
            Piece::Arc { ellipse, t0, .. } => ellipse.point(t0),
            Piece::Segment { p0, .. } => p0,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Piece::Arc { ellipse, t1, .. } => ellipse.point(t1),
            Piece::Segment { p1, .. } => p1,
        }
    }

    pub fn start_tangent(&self) -> Point {
        match *self {
            Piece::Arc { ellipse, t0, .. } => ellipse.tangent(t0),
            Piece::Segment { p0, p1 } => unit(sub(p1, p0)),
        }
    }

    pub fn end_tangent(&self) -> Point {
        match *self {
            Piece::Arc { ellipse, t1, .. } => ellipse.tangent(t1),
            Piece::Segment { p0, p1 } => unit(sub(p1, p0)),
        }
    }

    pub fn is_smooth_arc(&self) -> bool {
        matches!(self, Piece::Arc { .. })
    }

    pub fn transformed(&self, m: &RigidMotion) -> Piece {
        match *self {
            Piece::Arc { ellipse, t0, t1 } => Piece::Arc { ellipse: ellipse.transformed(m), t0, t1 },
            Piece::Segment { p0, p1 } => Piece::Segment { p0: m.apply(p0), p1: m.apply(p1) },
        }
    }
}

/// Whether parameter `t` lies in the arc `[t0, t1]` (mod 2π), with slack `tol`.
pub fn arc_contains(t0: f64, t1: f64, t: f64, tol: f64) -> bool {
    let rel = (t - t0).rem_euclid(TAU);
    rel <= (t1 - t0) + tol || rel >= TAU - tol
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ellipse(Ellipse),
    Circle { center: Point, r: f64 },
    /// Counterclockwise vertices in strictly convex position.
    ConvexPolygon(Vec<Point>),
    /// Counterclockwise closed chain of arcs and segments bounding a convex region.
    PiecewiseConvex(Vec<Piece>),
}

/// Points of a region attaining a support value.
#[derive(Clone, Debug, PartialEq)]
pub struct Contact {
    pub points: Vec<Point>,
    /// True when a whole straight edge attains the value (both endpoints returned).
    pub segment: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub s_plus: f64,
    pub s_minus: f64,
    pub plus: Contact,
    pub minus: Contact,
}

/// Corner point with one-sided unit tangents of the incoming and outgoing pieces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub point: Point,
    pub incoming: Point,
    pub outgoing: Point,
}

/// Bounded convex metal inclusion.
#[derive(Clone, Debug, PartialEq)]
pub struct MetalRegion {
    shape: Shape,
}

impl MetalRegion {
    pub fn circle(center: Point, r: f64) -> Result<Self> {
        Ellipse::circle(center, r)?;
        Ok(MetalRegion { shape: Shape::Circle { center, r } })
    }

    pub fn ellipse(center: Point, a: f64, b: f64, rot: f64) -> Result<Self> {
        Ok(MetalRegion { shape: Shape::Ellipse(Ellipse::new(center, a, b, rot)?) })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(invalid("polygon needs at least 3 vertices"));
        }
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            let c = vertices[(i + 2) % m];
            let e1 = sub(b, a);
            let e2 = sub(c, b);
            if norm(e1) == 0.0 || !a[0].is_finite() || !a[1].is_finite() {
                return Err(invalid("polygon has repeated or non-finite vertices"));
            }
            let turn = cross(unit(e1), unit(e2));
            if turn <= ANGLE_TOL.sin() {
                return Err(invalid(format!(
                    "polygon vertices must be counterclockwise and strictly convex (vertex {})",
                    (i + 1) % m
                )));
            }
        }
        let total: f64 = (0..m)
            .map(|i| {
                let e1 = sub(vertices[(i + 1) % m], vertices[i]);
                let e2 = sub(vertices[(i + 2) % m], vertices[(i + 1) % m]);
                cross(e1, e2).atan2(dot(e1, e2))
            })
            .sum();
        if (total - TAU).abs() > 1e-6 {
            return Err(invalid("polygon winds more than once"));
        }
        Ok(MetalRegion { shape: Shape::ConvexPolygon(vertices) })
    }

    pub fn piecewise(pieces: Vec<Piece>) -> Result<Self> {
        let m = pieces.len();
        if m < 2 {
            return Err(invalid("piecewise region needs at least 2 pieces"));
        }
        let scale = pieces.iter().map(|p| norm(p.start())).fold(1.0, f64::max);
        for (i, p) in pieces.iter().enumerate() {
            match *p {
                Piece::Arc { t0, t1, .. } => {
                    if !(t1 > t0 && t1 - t0 < TAU) {
                        return Err(invalid(format!("arc {i} needs t0 < t1 < t0 + 2π")));
                    }
                }
                Piece::Segment { p0, p1 } => {
                    if !(norm(sub(p1, p0)) > 0.0) {
                        return Err(invalid(format!("segment {i} is degenerate")));
                    }
                }
            }
            let next = &pieces[(i + 1) % m];
            if norm(sub(p.end(), next.start())) > JOIN_TOL * scale {
                return Err(invalid(format!("pieces {i} and {} do not join", (i + 1) % m)));
            }
            let (tin, tout) = (p.end_tangent(), next.start_tangent());
            let angle = cross(tin, tout).atan2(dot(tin, tout));
            if angle.abs() <= ANGLE_TOL {
                return Err(invalid(format!("corner after piece {i} is not transversal")));
            }
            if angle < 0.0 {
                return Err(invalid(format!("corner after piece {i} is reflex")));
            }
        }
        let region = MetalRegion { shape: Shape::PiecewiseConvex(pieces) };
        let pts = region.boundary_samples(64);
        let k = pts.len();
        for i in 0..k {
            let c = cross(sub(pts[(i + 1) % k], pts[i]), sub(pts[(i + 2) % k], pts[(i + 1) % k]));
            if c < -1e-12 * scale * scale {
                return Err(invalid("piecewise boundary is not convex"));
            }
        }
        let turning: f64 = (0..k)
            .map(|i| {
                let e1 = sub(pts[(i + 1) % k], pts[i]);
                let e2 = sub(pts[(i + 2) % k], pts[(i + 1) % k]);
                cross(e1, e2).atan2(dot(e1, e2))
            })
            .sum();
        if (turning - TAU).abs() > 1e-3 {
            return Err(invalid("piecewise boundary must close counterclockwise exactly once"));
        }
        Ok(region)
    }

    /// Half-disk: the arc from angle `start` to `start + π` closed by its diameter.
    pub fn half_disk(center: Point, r: f64, start: f64) -> Result<Self> {
        let e = Ellipse::circle(center, r)?;
        let arc = Piece::Arc { ellipse: e, t0: start, t1: start + PI };
        MetalRegion::piecewise(vec![arc, Piece::Segment { p0: arc.end(), p1: arc.start() }])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Boundary pieces; closed smooth shapes yield a single full-turn arc.
    pub fn pieces(&self) -> Vec<Piece> {
        match &self.shape {
            Shape::Ellipse(e) => vec![Piece::Arc { ellipse: *e, t0: 0.0, t1: TAU }],
            Shape::Circle { center, r } => {
                vec![Piece::Arc { ellipse: Ellipse { center: *center, a: *r, b: *r, rot: 0.0 }, t0: 0.0, t1: TAU }]
            }
            Shape::ConvexPolygon(v) => {
                (0..v.len()).map(|i| Piece::Segment { p0: v[i], p1: v[(i + 1) % v.len()] }).collect()
            }
            Shape::PiecewiseConvex(p) => p.clone(),
        }
    }

    fn closed_ellipse(&self) -> Option<Ellipse> {
        match &self.shape {
            Shape::Ellipse(e) => Some(*e),
            Shape::Circle { center, r } => Some(Ellipse { center: *center, a: *r, b: *r, rot: 0.0 }),
            _ => None,
        }
    }

    fn boundary_samples(&self, per_arc: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for p in self.pieces() {
            match p {
                Piece::Arc { ellipse, t0, t1 } => {
                    for k in 0..per_arc {
                        out.push(ellipse.point(t0 + (t1 - t0) * k as f64 / per_arc as f64));
                    }
                }
                Piece::Segment { p0, .. } => out.push(p0),
            }
        }
        out
    }

    /// Largest `x·θ(φ)` over the region with every boundary point attaining it.
    fn support_max(&self, phi: f64) -> (f64, Contact) {
        if let Some(e) = self.closed_ellipse() {
            return (e.support(phi), Contact { points: vec![e.point(e.support_param(phi))], segment: false });
        }
        let th = theta(phi);
        let mut cands: Vec<Point> = Vec::new();
        for p in self.pieces() {
            cands.push(p.start());
            if let Piece::Arc { ellipse, t0, t1 } = p {
                let t = ellipse.support_param(phi);
                if arc_contains(t0, t1, t, 0.0) {
                    cands.push(ellipse.point(t));
                }
            }
        }
        let best = cands.iter().map(|&c| dot(c, th)).fold(f64::NEG_INFINITY, f64::max);
        let scale = 1.0 + cands.iter().map(|&c| norm(c)).fold(0.0, f64::max);
        let mut points: Vec<Point> = Vec::new();
        for c in cands {
            if best - dot(c, th) <= 1e-12 * scale && !points.iter().any(|q| norm(sub(*q, c)) <= 1e-12 * scale) {
                points.push(c);
            }
        }
        let segment = points.len() > 1;
        (best, Contact { points, segment })
    }

    /// Support offsets at normal angle φ with the boundary points attaining them.
    pub fn support_function(&self, phi: f64) -> Support {
        let (s_plus, plus) = self.support_max(phi);
        let (h, minus) = self.support_max(phi + PI);
        Support { s_plus, s_minus: -h, plus, minus }
    }

    /// h(φ) only.
    pub fn support_value(&self, phi: f64) -> f64 {
        if let Some(e) = self.closed_ellipse() {
            return e.support(phi);
        }
        self.support_max(phi).0
    }

    /// Range of line positions τ (points sθ + τ·dir) inside the region, if any.
    fn line_interval(&self, s: f64, phi: f64) -> Option<(f64, f64)> {
        let th = theta(phi);
        let dir = [-th[1], th[0]];
        match &self.shape {
            Shape::Ellipse(_) | Shape::Circle { .. } => self.closed_ellipse().unwrap().line_hits(s, phi),
            Shape::ConvexPolygon(v) => {
                let m = v.len();
                let base = [s * th[0], s * th[1]];
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..m {
                    let e = sub(v[(i + 1) % m], v[i]);
                    // inside: cross(e, x − v_i) ≥ 0
                    let c0 = cross(e, sub(base, v[i]));
                    let c1 = cross(e, dir);
                    if c1.abs() < 1e-15 * norm(e) {
                        if c0 < 0.0 {
                            return None;
                        }
                    } else if c1 > 0.0 {
                        lo = lo.max(-c0 / c1);
                    } else {
                        hi = hi.min(-c0 / c1);
                    }
                }
                (hi >= lo).then_some((lo, hi))
            }
            Shape::PiecewiseConvex(pieces) => {
                let mut taus: Vec<f64> = Vec::new();
                for p in pieces {
                    match *p {
                        Piece::Arc { ellipse, t0, t1 } => {
                            if let Some((a, b)) = ellipse.line_hits(s, phi) {
                                for tau in [a, b] {
                                    let x = [s * th[0] + tau * dir[0], s * th[1] + tau * dir[1]];
                                    if arc_contains(t0, t1, ellipse.param_of(x), 1e-12) {
                                        taus.push(tau);
                                    }
                                }
                            }
                        }
                        Piece::Segment { p0, p1 } => {
                            let e = sub(p1, p0);
                            let den = dot(e, th);
                            let num = s - dot(p0, th);
                            if den.abs() < 1e-15 * norm(e) {
                                if num.abs() < 1e-12 * (1.0 + norm(p0)) {
                                    taus.push(dot(p0, dir));
                                    taus.push(dot(p1, dir));
                                }
                            } else {
                                let u = num / den;
                                if (-1e-12..=1.0 + 1e-12).contains(&u) {
                                    taus.push(dot(p0, dir) + u * dot(e, dir));
                                }
                            }
                        }
                    }
                }
                if taus.is_empty() {
                    return None;
                }
                let lo = taus.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = taus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some((lo, hi))
            }
        }
    }

    /// Length of the intersection of `line` with the region.
    pub fn chord_length(&self, line: &Line) -> f64 {
        self.chord_at(line.s, line.phi)
    }

    /// Chord for the line `x·θ(φ) = s` without canonicalization.
    pub fn chord_at(&self, s: f64, phi: f64) -> f64 {
        if let Some(e) = self.closed_ellipse() {
            return e.chord(s, phi);
        }
        match self.line_interval(s, phi) {
            Some((lo, hi)) => (hi - lo).max(0.0),
            None => 0.0,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        if let Some(e) = self.closed_ellipse() {
            return e.contains(p);
        }
        if let Shape::ConvexPolygon(v) = &self.shape {
            let m = v.len();
            return (0..m).all(|i| cross(sub(v[(i + 1) % m], v[i]), sub(p, v[i])) >= 0.0);
        }
        // horizontal line through p: θ = (0, 1), direction (−1, 0)
        match self.line_interval(p[1], PI / 2.0) {
            Some((lo, hi)) => (lo..=hi).contains(&-p[0]),
            None => false,
        }
    }

    /// Corner points with one-sided tangents; empty for smooth boundaries.
    pub fn corners(&self) -> Vec<Corner> {
        match &self.shape {
            Shape::Ellipse(_) | Shape::Circle { .. } => Vec::new(),
            _ => {
                let pieces = self.pieces();
                let m = pieces.len();
                (0..m)
                    .map(|i| {
                        let prev = &pieces[(i + m - 1) % m];
                        Corner { point: pieces[i].start(), incoming: prev.end_tangent(), outgoing: pieces[i].start_tangent() }
                    })
                    .collect()
            }
        }
    }

    pub fn area(&self) -> f64 {
        if let Some(e) = self.closed_ellipse() {
            return e.area();
        }
        let mut twice = 0.0;
        for p in self.pieces() {
            match p {
                Piece::Segment { p0, p1 } => twice += cross(p0, p1),
                Piece::Arc { ellipse, t0, t1 } => {
                    let (a0, a1) = (ellipse.point(t0), ellipse.point(t1));
                    let c = ellipse.center;
                    twice += c[0] * (a1[1] - a0[1]) - c[1] * (a1[0] - a0[0]) + ellipse.a * ellipse.b * (t1 - t0);
                }
            }
        }
        0.5 * twice
    }

    pub fn transformed(&self, m: &RigidMotion) -> MetalRegion {
        let shape = match &self.shape {
            Shape::Ellipse(e) => Shape::Ellipse(e.transformed(m)),
            Shape::Circle { center, r } => Shape::Circle { center: m.apply(*center), r: *r },
            Shape::ConvexPolygon(v) => Shape::ConvexPolygon(v.iter().map(|&p| m.apply(p)).collect()),
            Shape::PiecewiseConvex(p) => Shape::PiecewiseConvex(p.iter().map(|q| q.transformed(m)).collect()),
        };
        MetalRegion { shape }
    }

    /// Largest distance from the origin to a region point.
    pub fn radius_from_origin(&self) -> f64 {
        (0..1024)
            .map(|k| {
                let phi = TAU * k as f64 / 1024.0;
                self.support_value(phi)
            })
            .fold(0.0, f64::max)
            * (PI / 1024.0).cos().recip()
    }
}

/// Anything with a closed-form Radon transform.
pub trait Body: Sync {
    /// Line integral of the indicator over `x·θ(φ) = s`.
    fn chord(&self, s: f64, phi: f64) -> f64;
    /// Largest distance of the body from the origin.
    fn reach(&self) -> f64;
}

impl Body for Ellipse {
    fn chord(&self, s: f64, phi: f64) -> f64 {
        Ellipse::chord(self, s, phi)
    }
    fn reach(&self) -> f64 {
        norm(self.center) + self.a.max(self.b)
    }
}

impl Body for MetalRegion {
    fn chord(&self, s: f64, phi: f64) -> f64 {
        self.chord_at(s, phi)
    }
    fn reach(&self) -> f64 {
        self.radius_from_origin()
    }
}

/// Signed separation of two convex regions: the distance when disjoint, ≤ 0 when they meet.
pub fn region_separation(a: &MetalRegion, b: &MetalRegion) -> f64 {
    let gap = |phi: f64| -b.support_value(phi + PI) - a.support_value(phi);
    let n = 4096;
    let (mut best_phi, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let phi = TAU * k as f64 / n as f64;
        let g = gap(phi);
        if g > best {
            best = g;
            best_phi = phi;
        }
    }
    // golden-section refinement of the sampled maximum
    let h = TAU / n as f64;
    let (mut lo, mut hi) = (best_phi - h, best_phi + h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - r * (hi - lo);
        let m2 = lo + r * (hi - lo);
        if gap(m1) < gap(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(gap(0.5 * (lo + hi)))
}

/// Background component: `value` times the indicator of `ellipse`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEllipse {
    pub value: f64,
    pub ellipse: Ellipse,
}

impl WeightedEllipse {
    /// From the 6-tuple `(value, a, b, x0, y0, rotation in degrees)`.
    pub fn from_tuple(t: [f64; 6]) -> Result<Self> {
        Ok(WeightedEllipse { value: t[0], ellipse: Ellipse::new([t[3], t[4]], t[1], t[2], t[5].to_radians())? })
    }
}

/// Modified Shepp-Logan head phantom scaled by `scale` (unit scale fits [−1, 1]²).
pub fn shepp_logan(scale: f64) -> Vec<WeightedEllipse> {
    const TABLE: [[f64; 6]; 10] = [
        [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
        [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
        [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
        [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
        [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
        [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
        [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
        [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
        [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
        [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
    ];
    TABLE
        .iter()
        .map(|t| {
            WeightedEllipse::from_tuple([t[0], t[1] * scale, t[2] * scale, t[3] * scale, t[4] * scale, t[5]])
                .expect("table entries are valid")
        })
        .collect()
}

/// Metal inclusion with its attenuation at the reference energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Metal {
    pub region: MetalRegion,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    pub background: Vec<WeightedEllipse>,
    pub metals: Vec<Metal>,
    pub energy: EnergyModel,
}

impl Phantom {
    /// Validates disjointness and that every metal exceeds the background maximum.
    pub fn new(background: Vec<WeightedEllipse>, metals: Vec<Metal>, energy: EnergyModel) -> Result<Self> {
        let p = Phantom { background, metals, energy };
        p.check_clearance(0.0)?;
        let bmax = p.background_max();
        for (i, m) in p.metals.iter().enumerate() {
            if !(m.value > bmax) {
                return Err(invalid(format!(
                    "metal {i} attenuation {} must exceed the background maximum {bmax}",
                    m.value
                )));
            }
        }
        Ok(p)
    }

    pub fn regions(&self) -> Vec<&MetalRegion> {
        self.metals.iter().map(|m| &m.region).collect()
    }

    /// Errors unless every pair of metal regions is separated by more than `clearance`.
    pub fn check_clearance(&self, clearance: f64) -> Result<()> {
        for i in 0..self.metals.len() {
            for j in i + 1..self.metals.len() {
                let d = region_separation(&self.metals[i].region, &self.metals[j].region);
                if !(d > clearance) {
                    return Err(invalid(format!(
                        "metal regions {i} and {j} are {d:.4} apart, need more than {clearance:.4}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn background_at(&self, p: Point) -> f64 {
        self.background.iter().filter(|w| w.ellipse.contains(p)).map(|w| w.value).sum()
    }

    /// Maximum of the background mixture, sampled on a 257² grid plus every ellipse center.
    pub fn background_max(&self) -> f64 {
        if self.background.is_empty() {
            return 0.0;
        }
        let r = self.background.iter().map(|w| w.ellipse.reach()).fold(0.0, f64::max);
        let mut best = self.background.iter().map(|w| self.background_at(w.ellipse.center)).fold(0.0, f64::max);
        let m = 257;
        for i in 0..m {
            for j in 0..m {
                let x = -r + 2.0 * r * i as f64 / (m - 1) as f64;
                let y = -r + 2.0 * r * j as f64 / (m - 1) as f64;
                best = best.max(self.background_at([x, y]));
            }
        }
        best
    }

    pub fn transformed(&self, m: &RigidMotion) -> Phantom {
        Phantom {
            background: self
                .background
                .iter()
                .map(|w| WeightedEllipse { value: w.value, ellipse: w.ellipse.transformed(m) })
                .collect(),
            metals: self.metals.iter().map(|x| Metal { region: x.region.transformed(m), value: x.value }).collect(),
            energy: self.energy,
        }
    }
}

/// Samples `f_E0` (background plus metal values) and `χ_D` at pixel centers.
pub fn rasterize(phantom: &Phantom, spec: ImageSpec) -> (ImageGrid, ImageGrid) {
    let n = spec.n;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let y = spec.coord(r);
            let mut f = vec![0.0; n];
            let mut chi = vec![0.0; n];
            for c in 0..n {
                let p = [spec.coord(c), y];
                let mut v = phantom.background_at(p);
                for m in &phantom.metals {
                    if m.region.contains(p) {
                        v += m.value;
                        chi[c] = 1.0;
                    }
                }
                f[c] = v;
            }
            (f, chi)
        })
        .collect();
    let mut f = Array2::zeros((n, n));
    let mut chi = Array2::zeros((n, n));
    for (r, (fr, cr)) in rows.into_iter().enumerate() {
        for c in 0..n {
            f[[r, c]] = fr[c];
            chi[[r, c]] = cr[c];
        }
    }
    (ImageGrid { spec, values: f }, ImageGrid { spec, values: chi })
}
