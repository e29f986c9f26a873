use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{invalid, Result};

/// Oriented line `{x : x·θ = s}` with θ = (cos φ, sin φ), stored with φ ∈ [0, π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub s: f64,
    pub phi: f64,
}

impl Line {
    /// Canonical line; same as [`canonicalize_line`].
    pub fn new(s: f64, phi: f64) -> Result<Self> {
        canonicalize_line(s, phi)
    }

    pub fn theta(&self) -> [f64; 2] {
        [self.phi.cos(), self.phi.sin()]
    }

    /// Unit vector along the line.
    pub fn direction(&self) -> [f64; 2] {
        [-self.phi.sin(), self.phi.cos()]
    }

    /// Signed distance of `p` from the line.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let th = self.theta();
        p[0] * th[0] + p[1] * th[1] - self.s
    }

    /// Foot of the perpendicular from the origin.
    pub fn foot(&self) -> [f64; 2] {
        let th = self.theta();
        [self.s * th[0], self.s * th[1]]
    }

    /// Line through two distinct points.
    pub fn through(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        if !(len > 0.0) {
            return Err(invalid("line through coincident points"));
        }
        let phi = d[0].atan2(-d[1]);
        let th = [phi.cos(), phi.sin()];
        canonicalize_line(a[0] * th[0] + a[1] * th[1], phi)
    }

    /// Line through `p` with direction `d`.
    pub fn through_with_direction(p: [f64; 2], d: [f64; 2]) -> Result<Self> {
        Line::through(p, [p[0] + d[0], p[1] + d[1]])
    }

    pub fn transformed(&self, m: &RigidMotion) -> Line {
        let phi = self.phi + m.angle;
        let th = [phi.cos(), phi.sin()];
        let s = self.s + th[0] * m.shift[0] + th[1] * m.shift[1];
        canonicalize_line(s, phi).expect("finite motion")
    }
}

/// Returns the equivalent line with φ ∈ [0, π), using (s, φ) ≡ (−s, φ+π).
pub fn canonicalize_line(s: f64, phi: f64) -> Result<Line> {
    if !s.is_finite() || !phi.is_finite() {
        return Err(invalid(format!("non-finite line ({s}, {phi})")));
    }
    let mut p = phi.rem_euclid(2.0 * PI);
    if p >= 2.0 * PI {
        p = 0.0;
    }
    let mut s = s;
    if p >= PI {
        p -= PI;
        s = -s;
        if p >= PI {
            p = 0.0;
        }
    }
    Ok(Line { s, phi: p })
}

/// Distance on the line space: |Δs|/s_scale plus angular difference, minimized over
/// both representatives of the second line.
pub fn line_distance(a: &Line, b: &Line, s_scale: f64) -> f64 {
    assert!(s_scale > 0.0, "s_scale must be positive");
    let dphi = (a.phi - b.phi).abs();
    let direct = (a.s - b.s).abs() / s_scale + dphi;
    let flipped = (a.s + b.s).abs() / s_scale + (PI - dphi);
    direct.min(flipped)
}

/// Proper rigid motion x ↦ R(angle)·x + shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion {
    pub angle: f64,
    pub shift: [f64; 2],
}

impl RigidMotion {
    pub fn new(angle: f64, shift: [f64; 2]) -> Self {
        RigidMotion { angle, shift }
    }

    pub fn rotate(&self, v: [f64; 2]) -> [f64; 2] {
        let (sn, cs) = self.angle.sin_cos();
        [cs * v[0] - sn * v[1], sn * v[0] + cs * v[1]]
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let r = self.rotate(p);
        [r[0] + self.shift[0], r[1] + self.shift[1]]
    }
}
