use std::f64::consts::{FRAC_PI_3, PI};

use metalct::beamhardening::EnergyModel;
use metalct::geometry::{Ellipse, Metal, MetalRegion, Phantom, Piece};
use metalct::model::{line_distance, ImageGrid, ImageSpec, Line, Mask, RigidMotion, SinoSpec, StreakLineClass};
use metalct::streaks::{
    bitangent_lines, brute_force_streak_scan, corner_corner_lines, corner_tangent_lines, estimate_order,
    exclusion_mask, measure_streak, measure_streak_signed, predict_streaks, profile_order, sinogram_curves, CurveKind, OrderParams,
    ScanParams, TubeParams, scan_amplitudes,
};
use proptest::prelude::*;

fn circle(x: f64, y: f64, r: f64) -> MetalRegion {
    MetalRegion::circle([x, y], r).unwrap()
}

fn has_line(lines: &[Line], s: f64, phi: f64, tol: f64) -> bool {
    let want = Line::new(s, phi).unwrap();
    lines.iter().any(|l| line_distance(l, &want, 1.0) < tol)
}

fn phantom(regions: Vec<MetalRegion>) -> Phantom {
    let metals = regions.into_iter().map(|region| Metal { region, value: 4.0 }).collect();
    Phantom::new(vec![], metals, EnergyModel::default()).unwrap()
}

fn residual(region: &MetalRegion, l: &Line) -> f64 {
    (l.s - region.support_value(l.phi)).abs().min((l.s + region.support_value(l.phi + PI)).abs())
}

#[test]
fn sinogram_curve_examples() {
    let phis: Vec<f64> = (0..90).map(|j| j as f64 * PI / 90.0).collect();
    let curves = sinogram_curves(&circle(0.0, 0.0, 1.0), &phis);
    assert_eq!(curves.len(), 1);
    assert_eq!(curves[0].kind, CurveKind::SmoothTangent);
    assert_eq!(curves[0].samples.len(), 180);
    assert!(curves[0].samples.iter().all(|&(s, _)| (s.abs() - 1.0).abs() < 1e-12));

    let curves = sinogram_curves(&circle(2.0, 0.0, 1.0), &phis);
    for &(s, phi) in &curves[0].samples {
        let c = 2.0 * phi.cos();
        assert!((s - (c + 1.0)).abs() < 1e-12 || (s - (c - 1.0)).abs() < 1e-12);
    }

    // a corner at the origin has the sinusoid s = 0
    let tri = MetalRegion::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let curves = sinogram_curves(&tri, &phis);
    let sinusoids: Vec<_> = curves.iter().filter(|c| c.kind == CurveKind::CornerSinusoid).collect();
    assert_eq!(sinusoids.len(), 3);
    assert!(sinusoids.iter().any(|c| c.samples.iter().all(|&(s, _)| s == 0.0)));
    for (c, corner) in sinusoids.iter().zip(tri.corners()) {
        for &(s, phi) in &c.samples {
            assert_eq!(s, corner.point[0] * phi.cos() + corner.point[1] * phi.sin());
        }
    }
    assert_eq!(curves.iter().filter(|c| c.kind == CurveKind::PointS).count(), 3);
}

#[test]
fn bitangents_of_two_unit_circles() {
    let lines = bitangent_lines(&circle(-2.0, 0.0, 1.0), &circle(2.0, 0.0, 1.0)).unwrap();
    assert_eq!(lines.len(), 4);
    for (s, phi) in [(1.0, PI / 2.0), (-1.0, PI / 2.0), (0.0, FRAC_PI_3), (0.0, 2.0 * FRAC_PI_3)] {
        assert!(has_line(&lines, s, phi, 1e-8), "missing ({s}, {phi}) in {lines:?}");
    }
    let a = circle(0.0, 0.0, 1.0);
    assert!(bitangent_lines(&a, &a).is_err());
    assert!(bitangent_lines(&a, &circle(1.5, 0.0, 1.0)).is_err());
}

#[test]
fn corner_corner_examples() {
    let l = corner_corner_lines(&[[0.0, 0.0], [1.0, 1.0]]);
    assert_eq!(l.len(), 1);
    assert!(has_line(&l, 0.0, 3.0 * PI / 4.0, 1e-12));
    let sq = corner_corner_lines(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    assert_eq!(sq.len(), 6);
    assert!(corner_corner_lines(&[[0.3, 0.2]]).is_empty());
    // collinear triple merges, coincident points are skipped
    assert_eq!(corner_corner_lines(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).len(), 1);
    assert!(corner_corner_lines(&[[0.5, 0.5], [0.5, 0.5]]).is_empty());
}

#[test]
fn corner_tangent_examples() {
    let arc = Piece::Arc { ellipse: Ellipse::circle([0.0, 0.0], 1.0).unwrap(), t0: 0.0, t1: 2.0 * PI };
    let out = corner_tangent_lines([0.0, 2.0], &arc).unwrap();
    assert_eq!(out.lines.len(), 2);
    let h = 3f64.sqrt() / 2.0;
    for touch in [[h, 0.5], [-h, 0.5]] {
        // tangent at `touch` has normal along the radius, offset 1
        let phi = touch[1].atan2(touch[0]);
        assert!(has_line(&out.lines, 1.0, phi, 1e-8));
    }
    for l in &out.lines {
        assert!(l.signed_distance([0.0, 2.0]).abs() < 1e-9);
    }
    let on = corner_tangent_lines([1.0, 0.0], &arc).unwrap();
    assert_eq!(on.lines.len(), 1);
    assert!(has_line(&on.lines, 1.0, 0.0, 1e-9));
    let inside = corner_tangent_lines([0.1, 0.2], &arc).unwrap();
    assert!(inside.lines.is_empty() && inside.inside);
    assert!(corner_tangent_lines([0.0, 2.0], &Piece::Segment { p0: [0.0, 0.0], p1: [1.0, 0.0] }).is_err());
    // only tangency points on the arc count
    let upper = Piece::Arc { ellipse: Ellipse::circle([0.0, 0.0], 1.0).unwrap(), t0: 0.0, t1: PI / 2.0 };
    let one = corner_tangent_lines([0.0, 2.0], &upper).unwrap();
    assert_eq!(one.lines.len(), 1);
    assert!(has_line(&one.lines, 1.0, FRAC_PI_3 / 2.0, 1e-8));
}

#[test]
fn predict_examples() {
    let tol = 1e-6;
    assert!(predict_streaks(&phantom(vec![circle(0.0, 0.0, 0.5)]), tol).unwrap().is_empty());
    assert!(predict_streaks(&phantom(vec![MetalRegion::ellipse([0.1, 0.0], 0.5, 0.2, 0.3).unwrap()]), tol)
        .unwrap()
        .is_empty());

    let two = predict_streaks(&phantom(vec![circle(-2.0, 0.0, 1.0), circle(2.0, 0.0, 1.0)]), tol).unwrap();
    assert_eq!(two.len(), 4);
    assert!(two.entries.iter().all(|e| e.class == StreakLineClass::Bitangent && !e.is_degenerate()));

    let sq = MetalRegion::polygon(vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]).unwrap();
    let rep = predict_streaks(&phantom(vec![sq]), tol).unwrap();
    assert_eq!(rep.len(), 6);
    assert!(rep.entries.iter().all(|e| e.has_source(StreakLineClass::CornerCorner)));
    let edges: Vec<_> = rep.entries.iter().filter(|e| e.has_source(StreakLineClass::SegmentLine)).collect();
    assert_eq!(edges.len(), 4);
    assert!(edges.iter().all(|e| e.is_degenerate()));
    assert!(has_line(&rep.lines(), 0.0, PI / 4.0, 1e-9) && has_line(&rep.lines(), 0.0, 3.0 * PI / 4.0, 1e-9));
}

#[test]
fn predict_mixed_scene_classes() {
    // half-disk next to a disk: corner tangents, limit tangents and the segment line all appear
    let hd = MetalRegion::half_disk([-0.4, 0.0], 0.3, 0.0).unwrap();
    let d = circle(0.45, 0.1, 0.2);
    let rep = predict_streaks(&phantom(vec![hd.clone(), d.clone()]), 1e-6).unwrap();
    for class in [
        StreakLineClass::CornerCorner,
        StreakLineClass::CornerTangent,
        StreakLineClass::SegmentLine,
        StreakLineClass::CornerLimitTangent,
    ] {
        assert!(rep.entries.iter().any(|e| e.has_source(class)), "no {class:?}");
    }
    // every corner-tangent line passes through a half-disk corner and touches the disk
    for e in rep.entries.iter().filter(|e| e.class == StreakLineClass::CornerTangent) {
        assert!(residual(&d, &e.line) < 1e-8);
        assert!(hd.corners().iter().any(|c| e.line.signed_distance(c.point).abs() < 1e-9));
    }
    // common support lines through smooth arcs only are bitangents
    for e in rep.entries.iter().filter(|e| e.class == StreakLineClass::Bitangent) {
        assert!(residual(&hd, &e.line) < 1e-8 && residual(&d, &e.line) < 1e-8);
    }
}

#[test]
fn triple_tangent_lines_are_flagged() {
    // three equal disks on one row share both outer tangents
    let rep = predict_streaks(&phantom(vec![circle(-0.6, 0.0, 0.2), circle(0.0, 0.0, 0.2), circle(0.6, 0.0, 0.2)]), 1e-6)
        .unwrap();
    let shared: Vec<_> = rep.entries.iter().filter(|e| e.flags.iter().any(|f| f == "tangent>=3")).collect();
    assert_eq!(shared.len(), 2);
    assert!(shared.iter().all(|e| e.is_degenerate() && (e.line.s.abs() - 0.2).abs() < 1e-8));
}

fn convex_pair() -> impl Strategy<Value = (MetalRegion, MetalRegion)> {
    let ell = |x: f64| {
        (0.1f64..0.4, 0.1f64..0.4, 0.0f64..PI, -0.2f64..0.2)
            .prop_map(move |(a, b, r, y)| MetalRegion::ellipse([x, y], a, b, r).unwrap())
    };
    (ell(-0.5), ell(0.5), 0.0f64..PI).prop_map(|(a, b, rot)| {
        let m = RigidMotion::new(rot, [0.0, 0.0]);
        (a.transformed(&m), b.transformed(&m))
    })
}

fn motion() -> impl Strategy<Value = RigidMotion> {
    (-PI..PI, -0.3f64..0.3, -0.3f64..0.3).prop_map(|(a, x, y)| RigidMotion::new(a, [x, y]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn two_disjoint_convex_regions_have_four_bitangents((a, b) in convex_pair()) {
        let lines = bitangent_lines(&a, &b).unwrap();
        prop_assert_eq!(lines.len(), 4);
        for l in &lines {
            prop_assert!(residual(&a, l) < 1e-8 && residual(&b, l) < 1e-8);
            // and each lies on both regions' tangent curves at its own angle
            for r in [&a, &b] {
                let c = &sinogram_curves(r, &[l.phi])[0];
                prop_assert!(c.samples.iter().any(|&(s, _)| (s - l.s).abs() < 1e-8));
            }
        }
    }

    #[test]
    fn bitangents_transform_covariantly(m in motion()) {
        let (a, b) = (circle(-2.0, 0.0, 1.0), circle(2.0, 0.0, 1.0));
        let moved = bitangent_lines(&a.transformed(&m), &b.transformed(&m)).unwrap();
        prop_assert_eq!(moved.len(), 4);
        for (s, phi) in [(1.0, PI / 2.0), (-1.0, PI / 2.0), (0.0, FRAC_PI_3), (0.0, 2.0 * FRAC_PI_3)] {
            let want = Line::new(s, phi).unwrap().transformed(&m);
            prop_assert!(moved.iter().any(|l| line_distance(l, &want, 1.0) < 1e-6));
        }
    }

    #[test]
    fn predictions_transform_covariantly(m in motion()) {
        let scene = phantom(vec![
            MetalRegion::polygon(vec![[-0.6, -0.2], [-0.3, -0.25], [-0.35, 0.1]]).unwrap(),
            MetalRegion::half_disk([0.3, 0.3], 0.15, 0.4).unwrap(),
            MetalRegion::ellipse([0.25, -0.35], 0.18, 0.08, 0.7).unwrap(),
        ]);
        let base = predict_streaks(&scene, 1e-6).unwrap();
        let moved = predict_streaks(&scene.transformed(&m), 1e-6).unwrap();
        prop_assert_eq!(base.len(), moved.len());
        for e in &base.entries {
            let want = e.line.transformed(&m);
            let hit = moved.entries.iter().find(|f| line_distance(&f.line, &want, 1.0) < 1e-6);
            prop_assert!(hit.is_some(), "{:?} has no image", e.line);
            prop_assert_eq!(&hit.unwrap().sources, &e.sources);
        }
    }
}

// ---------- measurement ----------

fn image(n: usize) -> ImageSpec {
    ImageSpec::new(n, 1.0).unwrap()
}

/// Ridge of height `a` on pixels within `half` pixels of the line.
fn ridge(spec: ImageSpec, l: &Line, a: f64, half: f64) -> ImageGrid {
    let dx = spec.dx();
    ImageGrid::from_fn(spec, |x, y| if (l.signed_distance([x, y]) / dx).abs() <= half { a } else { 0.0 })
}

#[test]
fn zero_image_measures_zero() {
    let spec = image(128);
    let img = ImageGrid::zeros(spec);
    let l = Line::new(0.1, 0.7).unwrap();
    assert_eq!(measure_streak(&img, &l, &Mask::empty(spec), &TubeParams::default()).unwrap(), 0.0);
}

#[test]
fn tube_filling_ridge_is_measured_at_its_height() {
    let spec = image(256);
    let a = 0.37;
    for l in [Line::new(0.1, 0.0).unwrap(), Line::new(-0.2, 0.9).unwrap(), Line::new(0.05, 2.2).unwrap()] {
        let m = measure_streak(&ridge(spec, &l, a, 2.0), &l, &Mask::empty(spec), &TubeParams::default()).unwrap();
        assert!((0.8 * a..=1.05 * a).contains(&m), "{l:?}: {m}");
    }
}

#[test]
fn single_pixel_ridge_is_below_the_tube_median() {
    // a 1-pixel ridge covers about a fifth of the 2-pixel half-width tube, so the median
    // ignores it; the tube-filling case above is the measurable ridge
    let spec = image(256);
    let l = Line::new(0.1, 0.9).unwrap();
    let m = measure_streak(&ridge(spec, &l, 1.0, 0.5), &l, &Mask::empty(spec), &TubeParams::default()).unwrap();
    assert!(m < 0.2, "{m}");
}

#[test]
fn excluded_tube_is_not_measurable() {
    let spec = image(128);
    let chi = ImageGrid::from_fn(spec, |_, y| if y.abs() < 0.2 { 1.0 } else { 0.0 });
    let excl = exclusion_mask(&chi, 5);
    let l = Line::new(0.0, PI / 2.0).unwrap();
    assert!(measure_streak(&ImageGrid::zeros(spec), &l, &excl, &TubeParams::default()).is_err());
}

fn profile_image(spec: ImageSpec, l: &Line, f: impl Fn(f64) -> f64) -> ImageGrid {
    let dx = spec.dx();
    ImageGrid::from_fn(spec, |x, y| f(l.signed_distance([x, y]) / dx))
}

#[test]
fn order_of_synthetic_profiles() {
    let spec = image(256);
    let p = OrderParams::default();
    for l in [Line::new(0.05, 0.3).unwrap(), Line::new(-0.1, 1.9).unwrap()] {
        let anchor = l.foot();
        let step = estimate_order(&profile_image(spec, &l, |d| if d > 0.0 { 1.0 } else { 0.0 }), &l, anchor, None, &p).unwrap();
        assert!((step.slope + 1.0).abs() <= 0.15 && step.conormal, "step {}", step.slope);
        let half = estimate_order(&profile_image(spec, &l, |d| d.max(0.0).sqrt()), &l, anchor, None, &p).unwrap();
        assert!((half.slope + 1.5).abs() <= 0.15, "half power {}", half.slope);
        // σ = 6 px: narrower bumps still look flat over the lowest fitted frequencies
        let bump = estimate_order(&profile_image(spec, &l, |d| (-d * d / 72.0).exp()), &l, anchor, None, &p).unwrap();
        assert!(bump.slope < -4.0 && !bump.conormal, "gaussian {}", bump.slope);
    }
}

#[test]
fn order_needs_a_clear_profile() {
    let spec = image(128);
    let l = Line::new(0.0, 0.0).unwrap();
    let p = OrderParams::default();
    // profile leaves the window
    assert!(estimate_order(&ImageGrid::zeros(spec), &l, [0.0, 0.95], None, &p).is_err());
    let chi = ImageGrid::from_fn(spec, |x, y| if x.hypot(y) < 0.1 { 1.0 } else { 0.0 });
    let excl = exclusion_mask(&chi, 5);
    assert!(estimate_order(&ImageGrid::zeros(spec), &l, [0.0, 0.0], Some(&excl), &p).is_err());
    assert!(profile_order(&[0.0; 6], &p).is_err());
}

#[test]
fn scan_of_zero_image_is_empty() {
    let spec = image(64);
    let sino = SinoSpec::covering(&spec, 91, 90);
    assert!(brute_force_streak_scan(&ImageGrid::zeros(spec), &Mask::empty(spec), &sino, &ScanParams::default()).is_empty());
}

#[test]
fn scan_recovers_an_injected_ridge() {
    let spec = image(256);
    let sino = spec.default_sino();
    let sino = SinoSpec { n_phi: 360, ..sino };
    for (i0, j0) in [(240usize, 100usize), (200, 290), (190, 3)] {
        let l = Line::new(sino.s(i0), sino.phi(j0)).unwrap();
        // a tent has a unique best tube; a flat ridge as wide as the tube saturates the median
        let img = profile_image(spec, &l, |d| (1.0 - d.abs() / 4.0).max(0.0));
        let hits = brute_force_streak_scan(&img, &Mask::empty(spec), &sino, &ScanParams::default());
        let top = hits.first().expect("a hit");
        let near = (top.cell.0 as isize - i0 as isize).abs() <= 1 && (top.cell.1 as isize - j0 as isize).abs() <= 1;
        assert!(near, "injected cell ({i0}, {j0}), found {:?}", top.cell);
        let m = measure_streak(&img, &l, &Mask::empty(spec), &TubeParams::default()).unwrap();
        assert!((top.amplitude - m).abs() <= 1e-2, "scan {} vs direct {m}", top.amplitude);
    }
}

#[test]
fn scan_matches_direct_measurement_cellwise() {
    let spec = image(96);
    let sino = SinoSpec::covering(&spec, 137, 24);
    let img = ImageGrid::from_fn(spec, |x, y| (7.0 * x + 3.0 * y).sin() + 0.5 * (11.0 * x * y).cos());
    let chi = ImageGrid::from_fn(spec, |x, y| if (x - 0.3).hypot(y) < 0.15 { 1.0 } else { 0.0 });
    let excl = exclusion_mask(&chi, 3);
    let tube = TubeParams::default();
    let amps = scan_amplitudes(&img, &excl, &sino, &tube);
    // membership is exact, so only the 16-bit quantization of |img| separates the two:
    // each median moves by at most one step
    let vmax = img.values.iter().zip(excl.values.iter()).filter(|(_, &e)| !e).map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let step = vmax / 65535.0;
    for j in 0..24 {
        for i in 0..137 {
            let l = Line { s: sino.s(i), phi: sino.phi(j) };
            match measure_streak_signed(&img, &l, &excl, &tube) {
                Ok(m) => assert!((amps[j][i] - m).abs() <= 2.0 * step, "cell ({i}, {j}): {} vs {m}", amps[j][i]),
                Err(_) => assert!(amps[j][i].is_nan(), "cell ({i}, {j})"),
            }
        }
    }
}
