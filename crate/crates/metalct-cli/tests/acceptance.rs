//! Acceptance criteria, one PASS/FAIL line each. Tolerances are pinned below.
//!
//! Goldens for the 1000² runs live in `tests/goldens`; `UPDATE_GOLDENS=1` rewrites them.
//! Failures are reported but only fail the process under `ACCEPTANCE_STRICT=1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use metalct::beamhardening::{beer_quadrature_sample, metal_bodies, pma_exact, pma_series, DataMode, EnergyModel};
use metalct::geometry::{rasterize, Metal, MetalRegion, Phantom};
use metalct::model::io::read_pgm16;
use metalct::model::{line_distance, ImageGrid, ImageSpec, Line, Mask, SinoSpec, StreakLineClass, StreakReport};
use metalct::specfilter::FilterSpec;
use metalct::streaks::{
    brute_force_streak_scan, choose_anchor, dedup_tolerance, estimate_order, exclusion_mask, measure_streak,
    noise_floor, predict_streaks, profile_order, OrderParams, ScanHit, ScanParams, TubeParams,
};
use metalct::xray::{fbp, radon_analytic, sample_sinogram, chord_row, ProjectorSpec, Sampling};
use metalct_cli::config::FilterRoute;
use metalct_cli::pipeline::{filtered_reconstruct, fma_term, quadratic_coefficient, reconstruct_fct, Projection, Setup};

// AC1
const FBP_INTERIOR: (f64, f64) = (0.97, 1.03);
const FBP_EXTERIOR: f64 = 0.03;
const FBP_BAND_PX: f64 = 3.0;
const FBP_SECONDS: f64 = 30.0;
// AC2
const SERIES_T: [f64; 3] = [0.1, 0.5, 1.0];
const SERIES_N6_T1: f64 = 1e-4;
const QUADRATURE_NODES: usize = 32;
const QUADRATURE_TOL: f64 = 1e-6;
// AC3-AC9
const NOISE_LINES: usize = 100;
const NOISE_SEED: u64 = 1;
const LINEAR_MAX_FLOOR: f64 = 3.0;
const QUADRATIC_MIN_FLOOR: f64 = 10.0;
const EXTRA_HIT_FLOOR: f64 = 3.0;
const CORNER_MIN_FLOOR: f64 = 5.0;
const EDGE_ORDER: (f64, f64) = (-1.0, 0.2);
const SINOGRAM_ORDER: (f64, f64) = (-1.5, 0.2);
const STREAK_ORDER: (f64, f64) = (-2.0, 0.3);
const PAPER_K: [f64; 3] = [-0.001, -0.01, -0.05];
const FILTER_ALPHA: f64 = 1.3;
const SHIFT_K: f64 = -0.5;
const SHIFTED_ORDER_TOL: f64 = 0.3;
// AC10
const THUMB_BLOCK: usize = 8;
const THUMB_MEAN_TOL: f64 = 2.0;
const THUMB_MAX_TOL: u8 = 16;

// experiment grids
const N: usize = 512;
const DATA_ANGLES: usize = 2880;
const OVERSAMPLE: usize = 8;
const SCAN_ANGLES: usize = 720;

struct Verdict {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, title: &'static str, pass: bool, detail: String) -> Verdict {
    println!("{id} {} {title} | {detail}", if pass { "PASS" } else { "FAIL" });
    Verdict { id, title, pass, detail }
}

fn circle(c: [f64; 2], r: f64) -> Metal {
    Metal { region: MetalRegion::circle(c, r).unwrap(), value: 2.0 }
}

fn two_disks(energy: EnergyModel) -> Phantom {
    Phantom::new(vec![], vec![circle([-2.0, 0.0], 1.0), circle([2.0, 0.0], 1.0)], energy).unwrap()
}

fn rotated_square() -> Phantom {
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let v = [[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]].map(|[x, y]| [c * x - s * y, s * x + c * y]);
    let m = Metal { region: MetalRegion::polygon(v.to_vec()).unwrap(), value: 2.0 };
    Phantom::new(vec![], vec![m], EnergyModel::default()).unwrap()
}

fn setup(extent: f64) -> Setup {
    let image = ImageSpec::new(N, extent).unwrap();
    Setup::new(image, image.default_sino().n_s, DATA_ANGLES, Sampling::BandLimited { oversample: OVERSAMPLE })
}

fn scan_grid(s: &Setup) -> SinoSpec {
    SinoSpec::covering(&s.image, s.sino().n_s, SCAN_ANGLES)
}

/// Whether the hit sits in the scan cell nearest the line or one of its neighbours, across the φ = 0/π seam.
fn within_cell(a: &Line, b: &Line, g: &SinoSpec) -> bool {
    let (hi, hj) = (g.index_of(b.s).round(), (b.phi / g.dphi()).round());
    [(a.s, a.phi), (-a.s, a.phi + PI), (-a.s, a.phi - PI)]
        .iter()
        .any(|&(s, phi)| (g.index_of(s).round() - hi).abs() <= 1.0 && ((phi / g.dphi()).round() - hj).abs() <= 1.0)
}

struct Scene {
    phantom: Phantom,
    setup: Setup,
    excl: Mask,
    report: StreakReport,
}

impl Scene {
    fn new(phantom: Phantom, extent: f64) -> Scene {
        let setup = setup(extent);
        let (_, chi) = rasterize(&phantom, setup.image);
        let excl = exclusion_mask(&chi, 5);
        let report = predict_streaks(&phantom, dedup_tolerance(&setup.sino())).unwrap();
        Scene { phantom, setup, excl, report }
    }

    fn floor(&self, img: &ImageGrid) -> f64 {
        noise_floor(img, &self.excl, &self.report.lines(), NOISE_LINES, NOISE_SEED, &TubeParams::default()).unwrap()
    }

    fn amplitude(&self, img: &ImageGrid, l: &Line) -> f64 {
        measure_streak(img, l, &self.excl, &TubeParams::default()).unwrap_or(f64::NAN)
    }

    fn scan(&self, img: &ImageGrid) -> Vec<ScanHit> {
        let p = ScanParams { max_hits: usize::MAX, ..ScanParams::default() };
        brute_force_streak_scan(img, &self.excl, &scan_grid(&self.setup), &p)
    }

    fn bitangents(&self) -> Vec<Line> {
        self.report.entries.iter().filter(|e| e.class == StreakLineClass::Bitangent).map(|e| e.line).collect()
    }
}

fn fmt_hits(h: &[ScanHit]) -> String {
    h.iter().map(|h| format!("({:.4},{:.4})={:.2e}", h.line.s, h.line.phi, h.amplitude)).collect::<Vec<_>>().join(" ")
}

/// Whether the top four hits are the four lines, each within one cell of a distinct hit.
fn top4_matches(hits: &[ScanHit], lines: &[Line], g: &SinoSpec) -> bool {
    let top: Vec<&ScanHit> = hits.iter().take(4).collect();
    top.len() == 4
        && lines.len() == 4
        && lines.iter().all(|l| top.iter().filter(|h| within_cell(l, &h.line, g)).count() == 1)
        && top.iter().all(|h| lines.iter().any(|l| within_cell(l, &h.line, g)))
}

fn first_rank(hits: &[ScanHit], l: &Line, g: &SinoSpec) -> String {
    hits.iter().position(|h| within_cell(l, &h.line, g)).map_or("none".into(), |r| (r + 1).to_string())
}

fn ac1() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let image = ImageSpec::new(512, 1.0).unwrap();
    let t0 = Instant::now();
    let img = pool.install(|| {
        let disk = metalct::geometry::Ellipse::circle([0.0, 0.0], 0.5).unwrap();
        let sino = radon_analytic(&[(&disk, 1.0)], &ProjectorSpec::point(SinoSpec::covering(&image, 729, 720))).unwrap();
        fbp(&sino, image)
    });
    let secs = t0.elapsed().as_secs_f64();
    let band = FBP_BAND_PX * image.dx();
    let (mut si, mut ni, mut se, mut ne) = (0.0, 0, 0.0, 0);
    for r in 0..512 {
        for c in 0..512 {
            let d = image.coord(c).hypot(image.coord(r));
            if d < 0.5 - band {
                si += img.values[[r, c]];
                ni += 1;
            } else if d > 0.5 + band {
                se += img.values[[r, c]];
                ne += 1;
            }
        }
    }
    let (interior, exterior) = (si / ni as f64, (se / ne as f64).abs());
    let pass = interior >= FBP_INTERIOR.0 && interior <= FBP_INTERIOR.1 && exterior <= FBP_EXTERIOR && secs < FBP_SECONDS;
    verdict(
        "AC1",
        "FBP fidelity",
        pass,
        format!(
            "interior mean {interior:.5} in [{}, {}], |exterior mean| {exterior:.2e} <= {FBP_EXTERIOR}, {secs:.1} s < {FBP_SECONDS} s on 1 thread",
            FBP_INTERIOR.0, FBP_INTERIOR.1
        ),
    )
}

fn ac2() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for t in SERIES_T {
        let exact = pma_exact(t).unwrap();
        let errs: Vec<f64> = (1..=6).map(|n| (pma_series(t, n).unwrap().value - exact).abs()).collect();
        let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
        pass &= monotone;
        parts.push(format!("t={t}: monotone={monotone} err6={:.1e}", errs[5]));
        if t == 1.0 {
            pass &= errs[5] < SERIES_N6_T1;
        }
    }
    let e = EnergyModel::default();
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let r = 0.05 * i as f64;
        let q = beer_quadrature_sample(r, 0.0, &e, QUADRATURE_NODES).unwrap();
        worst = worst.max((q - pma_exact(e.alpha_eps() * r).unwrap()).abs());
    }
    pass &= worst <= QUADRATURE_TOL;
    parts.push(format!("N=6,t=1 < {SERIES_N6_T1:e}; exact vs {QUADRATURE_NODES}-node quadrature max {worst:.1e} <= {QUADRATURE_TOL:e}"));
    verdict("AC2", "beam-hardening model", pass, parts.join("; "))
}

fn ac3(sc: &Scene) -> Verdict {
    let img = fma_term(&sc.phantom, &sc.setup, 1, 1.0).unwrap();
    let floor = sc.floor(&img);
    let ratios: Vec<f64> = sc.bitangents().iter().map(|l| sc.amplitude(&img, l) / floor).collect();
    let pass = ratios.len() == 4 && ratios.iter().all(|r| *r <= LINEAR_MAX_FLOOR);
    verdict(
        "AC3",
        "no linear-term streaks",
        pass,
        format!("bitangent amplitude / floor = {ratios:.2?} (need <= {LINEAR_MAX_FLOOR}), floor {floor:.2e}"),
    )
}

fn ac4(sc: &Scene) -> Verdict {
    let img = fma_term(&sc.phantom, &sc.setup, 2, quadratic_coefficient(&sc.phantom)).unwrap();
    let floor = sc.floor(&img);
    let hits = sc.scan(&img);
    let g = scan_grid(&sc.setup);
    let lines = sc.bitangents();
    let amps: Vec<f64> = lines.iter().map(|l| sc.amplitude(&img, l) / floor).collect();
    let matched = top4_matches(&hits, &lines, &g);
    let strong = hits.iter().take(4).all(|h| h.amplitude >= QUADRATIC_MIN_FLOOR * floor);
    let ranks: Vec<String> = lines.iter().map(|l| first_rank(&hits, l, &g)).collect();
    verdict(
        "AC4",
        "quadratic-term streaks at predicted lines",
        matched && strong,
        format!(
            "top-4 = bitangents within one cell: {matched}; top-4 >= {QUADRATIC_MIN_FLOOR}x floor: {strong}; top-4 {}; bitangent amplitude / floor {amps:.1?}; bitangent scan ranks {ranks:?}",
            fmt_hits(&hits[..hits.len().min(4)])
        ),
    )
}

fn ac5_6(sc: &Scene) -> (Verdict, ImageGrid) {
    let mut series = sc.phantom.clone();
    series.energy = EnergyModel::new(1.0, 0.5, 0.0, 4).unwrap();
    let f_ma = reconstruct_fct(&series, &sc.setup, DataMode::Series(4), Projection::Analytic).unwrap().f_ma;
    let floor = sc.floor(&f_ma);
    let hits = sc.scan(&f_ma);
    let g = scan_grid(&sc.setup);
    let lines = sc.bitangents();
    let matched = top4_matches(&hits, &lines, &g);
    let tol = dedup_tolerance(&sc.setup.sino());
    let extras: Vec<ScanHit> = hits
        .iter()
        .filter(|h| h.amplitude >= EXTRA_HIT_FLOOR * floor)
        .filter(|h| lines.iter().all(|l| line_distance(l, &h.line, 1.0) >= tol && !within_cell(l, &h.line, &g)))
        .copied()
        .collect();
    let ranks: Vec<String> = lines.iter().map(|l| first_rank(&hits, l, &g)).collect();
    let v = verdict(
        "AC5",
        "full-series streaks",
        matched && extras.is_empty(),
        format!(
            "top-4 = bitangents: {matched}; off-prediction hits >= {EXTRA_HIT_FLOOR}x floor: {} (first {}); bitangent scan ranks {ranks:?}",
            extras.len(),
            fmt_hits(&extras[..extras.len().min(3)])
        ),
    );
    (v, f_ma)
}

fn ac6(sc: &Scene, f_ma: &ImageGrid) -> Verdict {
    let op = OrderParams::default();
    // (a) edge of χ_D across the top of the left disk
    let (_, chi) = rasterize(&sc.phantom, sc.setup.image);
    let top = Line::new(1.0, FRAC_PI_2).unwrap();
    let edge = estimate_order(&chi, &top, [-2.0, 1.0], None, &op).unwrap().slope;
    // (b) 𝓡χ_D across the upper tangent curve of the left disk, s = 1 − 2cos φ, near φ = 0
    let metal = metal_bodies(&sc.phantom);
    let sino = sample_sinogram(&sc.setup.projector, |phi, s, out| chord_row(&metal, phi, s, out));
    let spec = sino.spec;
    let mut prof = vec![0.0; op.samples];
    let rows = op.half_average + 1;
    for j in 0..rows {
        let h = 1.0 - 2.0 * spec.phi(j).cos();
        for (i, v) in prof.iter_mut().enumerate() {
            *v += sino.interp_row(j, h + (i as f64 - (op.samples / 2) as f64) * spec.ds());
        }
    }
    let curve = profile_order(&prof, &op).unwrap().slope;
    // (c) f_MA across each bitangent, anchored where the report would anchor
    let streak: Vec<f64> = sc
        .bitangents()
        .iter()
        .map(|l| {
            choose_anchor(f_ma, l, &sc.excl, &op)
                .and_then(|a| estimate_order(f_ma, l, a, Some(&sc.excl), &op).ok())
                .map_or(f64::NAN, |o| o.slope)
        })
        .collect();
    let ok = |v: f64, (c, t): (f64, f64)| (v - c).abs() <= t;
    let pass = ok(edge, EDGE_ORDER) && ok(curve, SINOGRAM_ORDER) && streak.iter().all(|&v| ok(v, STREAK_ORDER));
    verdict(
        "AC6",
        "order estimates",
        pass,
        format!(
            "edge {edge:.3} ({} ± {}); sinogram tangent {curve:.3} ({} ± {}); f_MA bitangents {streak:.3?} ({} ± {})",
            EDGE_ORDER.0, EDGE_ORDER.1, SINOGRAM_ORDER.0, SINOGRAM_ORDER.1, STREAK_ORDER.0, STREAK_ORDER.1
        ),
    )
}

fn ac7() -> Verdict {
    let sc = Scene::new(rotated_square(), 2.0);
    let g = scan_grid(&sc.setup);
    let targets: Vec<Line> = sc
        .report
        .entries
        .iter()
        .filter(|e| e.has_source(StreakLineClass::CornerCorner) || e.has_source(StreakLineClass::SegmentLine))
        .map(|e| e.line)
        .collect();
    let mut pass = targets.len() == 6;
    let mut parts = vec![format!("{} corner/segment lines", targets.len())];
    for n in [1u32, 2, 4] {
        let img = fma_term(&sc.phantom, &sc.setup, n, 1.0).unwrap();
        let floor = sc.floor(&img);
        let hits = sc.scan(&img);
        let best: Vec<f64> = targets
            .iter()
            .map(|l| {
                hits.iter().filter(|h| within_cell(l, &h.line, &g)).map(|h| h.amplitude / floor).fold(0.0, f64::max)
            })
            .collect();
        let ok = if n == 1 {
            best.iter().all(|&b| b < CORNER_MIN_FLOOR)
        } else {
            best.iter().all(|&b| b >= CORNER_MIN_FLOOR)
        };
        pass &= ok;
        parts.push(format!("n={n}: best hit / floor per line {best:.1?}"));
    }
    parts.push(format!("need >= {CORNER_MIN_FLOOR} for n=2,4 and < {CORNER_MIN_FLOOR} for n=1"));
    verdict("AC7", "corner streaks", pass, parts.join("; "))
}

fn ac8_9(sc: &Scene) -> (Verdict, Verdict) {
    let g = scan_grid(&sc.setup);
    let lines = sc.bitangents();
    let plain = reconstruct_fct(&sc.phantom, &sc.setup, DataMode::Exact, Projection::Analytic).unwrap().f_ma;
    let top = |img: &ImageGrid| sc.scan(img).into_iter().take(4).collect::<Vec<_>>();
    let reference = top(&plain);
    let mut amps = vec![lines.iter().map(|l| sc.amplitude(&plain, l)).collect::<Vec<_>>()];
    let mut same = true;
    let mut tops = Vec::new();
    for k in PAPER_K {
        let f = FilterSpec::new(FILTER_ALPHA, k).unwrap();
        let img = filtered_reconstruct(&sc.phantom, &sc.setup, DataMode::Exact, &f, FilterRoute::Slice).unwrap().f_ma;
        amps.push(lines.iter().map(|l| sc.amplitude(&img, l)).collect());
        let t = top(&img);
        same &= t.len() == reference.len()
            && reference.iter().all(|r| t.iter().filter(|h| within_cell(&r.line, &h.line, &g)).count() == 1);
        tops.push(fmt_hits(&t));
    }
    // strictly decreasing over the paper's k values
    let decreasing = (0..lines.len()).all(|i| amps[1][i] > amps[2][i] && amps[2][i] > amps[3][i]);
    let table: Vec<String> = (0..lines.len())
        .map(|i| {
            format!(
                "({:.3},{:.4}) {}",
                lines[i].s,
                lines[i].phi,
                amps.iter().map(|a| format!("{:.4e}", a[i])).collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    let v8 = verdict(
        "AC8",
        "filter reduction at the paper's constants",
        decreasing && same,
        format!(
            "alpha={FILTER_ALPHA}, k=0,{PAPER_K:?}: amplitudes {}; strictly decreasing over paper k: {decreasing}; top-4 scan set unchanged: {same} (k=0 {})",
            table.join("; "),
            fmt_hits(&reference)
        ),
    );

    let f = FilterSpec::new(FILTER_ALPHA, SHIFT_K).unwrap();
    let img = filtered_reconstruct(&sc.phantom, &sc.setup, DataMode::Exact, &f, FilterRoute::Slice).unwrap().f_ma;
    let op = OrderParams::default();
    let orders: Vec<f64> = lines
        .iter()
        .map(|l| {
            choose_anchor(&img, l, &sc.excl, &op)
                .and_then(|a| estimate_order(&img, l, a, Some(&sc.excl), &op).ok())
                .map_or(f64::NAN, |o| o.slope)
        })
        .collect();
    let target = -2.0 + SHIFT_K;
    let v9 = verdict(
        "AC9",
        "order shift under filtering",
        orders.iter().all(|o| (o - target).abs() <= SHIFTED_ORDER_TOL),
        format!("k={SHIFT_K}: bitangent orders {orders:.3?}, need {target} ± {SHIFTED_ORDER_TOL}"),
    );
    (v8, v9)
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Block-averaged 8-bit thumbnail of a 16-bit PGM, top row first.
fn thumbnail(pgm: &Path) -> (usize, usize, Vec<u8>) {
    let full = read_pgm16(pgm).unwrap();
    let (rows, cols) = full.dim();
    let (tr, tc) = (rows / THUMB_BLOCK, cols / THUMB_BLOCK);
    let mut out = Vec::with_capacity(tr * tc);
    for r in (0..tr).rev() {
        for c in 0..tc {
            let mut acc = 0.0;
            for i in 0..THUMB_BLOCK {
                for j in 0..THUMB_BLOCK {
                    acc += full[[r * THUMB_BLOCK + i, c * THUMB_BLOCK + j]] as f64;
                }
            }
            out.push((acc / (THUMB_BLOCK * THUMB_BLOCK) as f64 / 257.0).round() as u8);
        }
    }
    (tc, tr, out)
}

fn write_pgm8(path: &Path, w: usize, h: usize, px: &[u8]) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend_from_slice(px);
    fs::write(path, bytes).unwrap();
}

fn read_pgm8(path: &Path) -> Option<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path).ok()?;
    let text_end = bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').nth(2)?.0 + 1;
    let head = std::str::from_utf8(&bytes[..text_end]).ok()?;
    let f: Vec<usize> = head.split_whitespace().skip(1).filter_map(|t| t.parse().ok()).collect();
    Some((f[0], f[1], bytes[text_end..].to_vec()))
}

fn ac10() -> Verdict {
    let root = workspace_root();
    let goldens = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/goldens");
    let update = std::env::var("UPDATE_GOLDENS").is_ok_and(|v| v == "1");
    let work = tempfile::tempdir().unwrap();
    let cases = [
        ("two_disks", "f_ma1.pgm"),
        ("square", "term_2.pgm"),
        ("example1", "f_ct_filtered.pgm"),
        ("example2", "f_ct_filtered.pgm"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, file) in cases {
        let out = work.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_metalct"))
            .args(["--config", root.join(format!("configs/{name}.toml")).to_str().unwrap()])
            .args(["--grid", "1000", "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        if !status.success() {
            pass = false;
            parts.push(format!("{name}: run failed ({status})"));
            continue;
        }
        let (w, h, px) = thumbnail(&out.join(file));
        let golden = goldens.join(format!("{name}.pgm"));
        if update {
            fs::create_dir_all(&goldens).unwrap();
            write_pgm8(&golden, w, h, &px);
        }
        match read_pgm8(&golden) {
            Some((gw, gh, gp)) if gw == w && gh == h && gp.len() == px.len() => {
                let diffs: Vec<u8> = px.iter().zip(&gp).map(|(a, b)| a.abs_diff(*b)).collect();
                let mean = diffs.iter().map(|&d| d as f64).sum::<f64>() / diffs.len() as f64;
                let max = *diffs.iter().max().unwrap();
                let ok = mean <= THUMB_MEAN_TOL && max <= THUMB_MAX_TOL;
                pass &= ok;
                parts.push(format!("{name}: mean |d| {mean:.3}, max {max}"));
            }
            _ => {
                pass = false;
                parts.push(format!("{name}: golden missing or wrong size"));
            }
        }
    }
    parts.push(format!("{THUMB_BLOCK}x{THUMB_BLOCK} block thumbnails, need mean <= {THUMB_MEAN_TOL} and max <= {THUMB_MAX_TOL} gray levels"));
    verdict("AC10", "1000² figures match goldens", pass, parts.join("; "))
}

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let want = |id: &str| only.is_empty() || only.iter().any(|o| o == id);
    let mut all = Vec::new();
    if want("AC1") {
        all.push(ac1());
    }
    if want("AC2") {
        all.push(ac2());
    }
    if ["AC3", "AC4", "AC5", "AC6", "AC8", "AC9"].iter().any(|id| want(id)) {
        let sc = Scene::new(two_disks(EnergyModel::default()), 4.0);
        if want("AC3") {
            all.push(ac3(&sc));
        }
        if want("AC4") {
            all.push(ac4(&sc));
        }
        if want("AC5") || want("AC6") {
            let (v5, f_ma) = ac5_6(&sc);
            if want("AC5") {
                all.push(v5);
            }
            if want("AC6") {
                all.push(ac6(&sc, &f_ma));
            }
        }
        if want("AC8") || want("AC9") {
            let (v8, v9) = ac8_9(&sc);
            all.extend([v8, v9]);
        }
    }
    if want("AC7") {
        all.push(ac7());
    }
    if want("AC10") {
        all.push(ac10());
    }
    let failed: Vec<&Verdict> = all.iter().filter(|v| !v.pass).collect();
    println!("acceptance: {} passed, {} failed", all.len() - failed.len(), failed.len());
    for v in &failed {
        println!("  failed {} ({}): {}", v.id, v.title, v.detail);
    }
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
