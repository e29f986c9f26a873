use std::f64::consts::{PI, TAU};

use crate::geometry::{arc_contains, Corner, MetalRegion, Phantom, Piece, Point};
use crate::model::{
    canonicalize_line, invalid, line_distance, Line, Result, SinoSpec, StreakEntry, StreakLineClass, StreakReport,
};

const GRID: usize = 4096;
const PHI_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// Tangent offsets of a smooth piece, `s = h(φ)`.
    SmoothTangent,
    /// Lines through a corner, `s = n·θ(φ)`.
    CornerSinusoid,
    /// The single line containing a straight piece.
    PointS,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinogramCurve {
    pub kind: CurveKind,
    /// Canonical `(s, φ)` samples.
    pub samples: Vec<(f64, f64)>,
    pub source: String,
}

fn theta(phi: f64) -> Point {
    [phi.cos(), phi.sin()]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn canon(s: f64, phi: f64) -> (f64, f64) {
    let l = canonicalize_line(s, phi).expect("finite line");
    (l.s, l.phi)
}

/// Singular curves of `𝓡χ_D` for one region, sampled at the given angles in `[0, π)`.
pub fn sinogram_curves(region: &MetalRegion, phis: &[f64]) -> Vec<SinogramCurve> {
    let mut out = Vec::new();
    for (i, piece) in region.pieces().iter().enumerate() {
        match *piece {
            Piece::Arc { ellipse, t0, t1 } => {
                let mut samples = Vec::new();
                for &phi in phis {
                    // both orientations of the tangent line at angle φ
                    for (ang, sign) in [(phi, 1.0), (phi + PI, -1.0)] {
                        let t = ellipse.support_param(ang);
                        if arc_contains(t0, t1, t, 0.0) {
                            samples.push(canon(sign * ellipse.support(ang), phi));
                        }
                    }
                }
                out.push(SinogramCurve { kind: CurveKind::SmoothTangent, samples, source: format!("piece {i}") });
            }
            Piece::Segment { p0, p1 } => {
                let l = Line::through(p0, p1).expect("segment has length");
                out.push(SinogramCurve {
                    kind: CurveKind::PointS,
                    samples: vec![(l.s, l.phi)],
                    source: format!("piece {i}"),
                });
            }
        }
    }
    for (i, c) in region.corners().iter().enumerate() {
        let samples = phis.iter().map(|&phi| (dot(c.point, theta(phi)), phi)).collect();
        out.push(SinogramCurve { kind: CurveKind::CornerSinusoid, samples, source: format!("corner {i}") });
    }
    out
}

/// Roots of `g` on `[0, 2π)`: sign changes on a 4096-point grid refined by bisection.
fn roots(g: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = TAU / GRID as f64;
    let vals: Vec<f64> = (0..=GRID).map(|k| g(k as f64 * h)).collect();
    let mut out = Vec::new();
    for k in 0..GRID {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            out.push(k as f64 * h);
            continue;
        }
        if a * b < 0.0 {
            let (mut lo, mut hi, mut glo) = (k as f64 * h, (k + 1) as f64 * h, a);
            while hi - lo > PHI_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

fn push_unique(lines: &mut Vec<Line>, l: Line, tol: f64) {
    if !lines.iter().any(|m| line_distance(m, &l, 1.0) < tol) {
        lines.push(l);
    }
}

/// All common tangent lines of two disjoint convex regions (outer and inner).
pub fn bitangent_lines(a: &MetalRegion, b: &MetalRegion) -> Result<Vec<Line>> {
    if a == b || crate::geometry::region_separation(a, b) <= 0.0 {
        return Err(invalid("bitangent_lines needs disjoint regions"));
    }
    let mut lines = Vec::new();
    let outer = roots(|phi| a.support_value(phi) - b.support_value(phi));
    let inner = roots(|phi| a.support_value(phi) + b.support_value(phi + PI));
    for phi in outer.into_iter().chain(inner) {
        let l = canonicalize_line(a.support_value(phi), phi)?;
        push_unique(&mut lines, l, 1e-8);
    }
    Ok(lines)
}

/// One line per unordered pair of distinct corner points, collinear duplicates merged.
pub fn corner_corner_lines(corners: &[Point]) -> Vec<Line> {
    let mut lines = Vec::new();
    for i in 0..corners.len() {
        for j in i + 1..corners.len() {
            if let Ok(l) = Line::through(corners[i], corners[j]) {
                push_unique(&mut lines, l, 1e-9);
            }
        }
    }
    lines
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerTangentLines {
    pub lines: Vec<Line>,
    /// The corner lies strictly inside the piece's ellipse.
    pub inside: bool,
}

/// Lines through `corner` tangent to the smooth `piece` at a point of the piece.
pub fn corner_tangent_lines(corner: Point, piece: &Piece) -> Result<CornerTangentLines> {
    let Piece::Arc { ellipse, t0, t1 } = *piece else {
        return Err(invalid("corner_tangent_lines needs a smooth arc piece"));
    };
    let f = ellipse.implicit(corner);
    let tol = 1e-9;
    if f < -tol {
        return Ok(CornerTangentLines { lines: Vec::new(), inside: true });
    }
    let mut lines = Vec::new();
    if f <= tol {
        let t = ellipse.param_of(corner);
        if arc_contains(t0, t1, t, 1e-9) {
            lines.push(Line::through_with_direction(corner, ellipse.tangent(t))?);
        }
        return Ok(CornerTangentLines { lines, inside: false });
    }
    for phi in roots(|phi| dot(corner, theta(phi)) - ellipse.support(phi)) {
        if arc_contains(t0, t1, ellipse.support_param(phi), 1e-9) {
            push_unique(&mut lines, canonicalize_line(ellipse.support(phi), phi)?, 1e-8);
        }
    }
    Ok(CornerTangentLines { lines, inside: false })
}

/// Default line dedup tolerance for a sinogram grid (with `s_scale = 1`).
pub fn dedup_tolerance(spec: &SinoSpec) -> f64 {
    1.5 * spec.ds().max(spec.dphi())
}

fn is_corner(p: Point, corners: &[Corner]) -> bool {
    corners.iter().any(|c| (c.point[0] - p[0]).hypot(c.point[1] - p[1]) < 1e-9)
}

fn tangent_to(region: &MetalRegion, l: &Line, tol: f64) -> bool {
    (l.s - region.support_value(l.phi)).abs() < tol || (l.s + region.support_value(l.phi + PI)).abs() < tol
}

/// Every predicted streak line of the phantom, deduplicated within `tol`.
pub fn predict_streaks(phantom: &Phantom, tol: f64) -> Result<StreakReport> {
    let regions = phantom.regions();
    let corners: Vec<Vec<Corner>> = regions.iter().map(|r| r.corners()).collect();
    let mut cands: Vec<(Line, StreakLineClass)> = Vec::new();

    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            for l in bitangent_lines(regions[i], regions[j])? {
                // common support line: classify by what it touches
                let touches_corner = [(i, l), (j, l)].iter().any(|&(k, l)| {
                    let sup = regions[k].support_function(l.phi);
                    let contact = if (l.s - sup.s_plus).abs() <= (l.s - sup.s_minus).abs() { sup.plus } else { sup.minus };
                    contact.segment || contact.points.iter().any(|&p| is_corner(p, &corners[k]))
                });
                if !touches_corner {
                    cands.push((l, StreakLineClass::Bitangent));
                }
            }
        }
    }

    let all_corners: Vec<Point> = corners.iter().flatten().map(|c| c.point).collect();
    for l in corner_corner_lines(&all_corners) {
        cands.push((l, StreakLineClass::CornerCorner));
    }

    for (ci, cs) in corners.iter().enumerate() {
        for c in cs {
            for (ri, region) in regions.iter().enumerate() {
                if ri == ci {
                    continue;
                }
                for piece in region.pieces().iter().filter(|p| p.is_smooth_arc()) {
                    let ct = corner_tangent_lines(c.point, piece)?;
                    for l in ct.lines {
                        cands.push((l, StreakLineClass::CornerTangent));
                    }
                }
            }
        }
    }

    for region in &regions {
        for piece in region.pieces() {
            if let Piece::Segment { p0, p1 } = piece {
                cands.push((Line::through(p0, p1)?, StreakLineClass::SegmentLine));
            }
        }
    }

    for cs in &corners {
        for c in cs {
            for d in [c.incoming, c.outgoing] {
                cands.push((Line::through_with_direction(c.point, d)?, StreakLineClass::CornerLimitTangent));
            }
        }
    }

    let mut entries: Vec<StreakEntry> = Vec::new();
    for (l, class) in cands {
        match entries.iter_mut().find(|e| line_distance(&e.line, &l, 1.0) < tol) {
            Some(e) => {
                if !e.sources.contains(&class) {
                    e.sources.push(class);
                    e.sources.sort();
                    e.class = e.sources[0];
                }
            }
            None => entries.push(StreakEntry::new(l, class)),
        }
    }
    for e in &mut entries {
        let tangent_count = regions.iter().filter(|r| tangent_to(r, &e.line, 1e-7)).count();
        if tangent_count >= 3 {
            e.flag("degenerate");
            e.flag("tangent>=3");
        }
        if e.sources.len() > 1 {
            e.flag("degenerate");
        }
    }
    entries.sort_by(|a, b| a.class.cmp(&b.class).then(a.line.phi.total_cmp(&b.line.phi)).then(a.line.s.total_cmp(&b.line.s)));
    Ok(StreakReport { entries })
}
