//! Executes one configured experiment and writes its outputs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use metalct::geometry::{rasterize, Shape};
use metalct::model::io::{write_image, write_pgm, write_sinogram};
use metalct::model::{ImageGrid, ImageSpec, Mask, SinoSpec, StreakReport};
use metalct::streaks::{
    brute_force_streak_scan, dedup_tolerance, exclusion_mask, measure_report, noise_floor, predict_streaks,
    OrderParams, ScanHit, ScanParams, TubeParams,
};
use metalct::xray::Sampling;

use crate::config::{mode_name, ConfigError, FilterRoute, RunConfig, Select, FORMAT_LINE};
use crate::pipeline::{filtered_reconstruct, fma_term, quadratic_coefficient, reconstruct_fct, Projection, Setup};

/// Failure of a run, mapped to the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("stage {stage}: {source}")]
    Numeric { stage: &'static str, source: metalct::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric { .. } => 3,
        }
    }
}

fn at<T>(stage: &'static str, r: metalct::Result<T>) -> Result<T, RunError> {
    r.map_err(|source| RunError::Numeric { stage, source })
}

fn io_at<T>(r: std::io::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::Numeric { stage: "write", source: e.into() })
}

/// Image window and detector grid of a configuration.
pub fn setup_of(cfg: &RunConfig) -> Result<Setup, RunError> {
    let image = at("grid", ImageSpec::new(cfg.grid.n, cfg.grid.extent))?;
    let n_s = cfg.grid.offsets.unwrap_or_else(|| image.default_sino().n_s);
    Ok(Setup::new(image, n_s, cfg.grid.angles, cfg.grid.sampling))
}

pub fn tube_of(cfg: &RunConfig) -> TubeParams {
    let s = &cfg.streaks;
    TubeParams { tube: s.tube, annulus_inner: s.annulus_inner, annulus_outer: s.annulus_outer, min_pixels: s.min_pixels }
}

/// Display window from the 0.5 and 99.5 percentiles outside `mask`.
fn display_window(img: &ImageGrid, mask: &Mask) -> (f64, f64) {
    let mut v: Vec<f64> = img
        .values
        .iter()
        .zip(mask.values.iter())
        .filter(|(_, &m)| !m)
        .map(|(&x, _)| x)
        .collect();
    if v.is_empty() {
        return (0.0, 1.0);
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    let (lo, hi) = (q(0.005), q(0.995));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
    display_mask: Mask,
}

impl Writer {
    fn image(&mut self, name: &str, img: &ImageGrid) -> Result<(), RunError> {
        at("write", write_image(&self.dir.join(format!("{name}.margrid")), img))?;
        let w = display_window(img, &self.display_mask);
        at("write", write_pgm(&self.dir.join(format!("{name}.pgm")), &img.values, Some(w)))?;
        self.files.push(format!("{name}.margrid"));
        self.files.push(format!("{name}.pgm"));
        Ok(())
    }

    fn sinogram(&mut self, name: &str, s: &metalct::model::SinogramGrid) -> Result<(), RunError> {
        at("write", write_sinogram(&self.dir.join(format!("{name}.margrid")), s))?;
        self.files.push(format!("{name}.margrid"));
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        io_at(fs::write(self.dir.join(name), body))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn shape_summary(s: &Shape) -> String {
    match s {
        Shape::Circle { center, r } => format!("circle center={center:?} r={r:?}"),
        Shape::Ellipse(e) => format!("ellipse center={:?} a={:?} b={:?} rot={:?}", e.center, e.a, e.b, e.rot),
        Shape::ConvexPolygon(v) => format!("polygon vertices={v:?}"),
        Shape::PiecewiseConvex(p) => format!("piecewise pieces={}", p.len()),
    }
}

fn scan_table(hits: &[ScanHit], report: &StreakReport, tol: f64, floor: f64) -> String {
    let mut out = String::from("# rank  s            phi          amplitude      x_floor   match\n");
    for (i, h) in hits.iter().enumerate() {
        let m = report.find(&h.line, 1.0, tol).map_or("unmatched".to_string(), |k| {
            format!("{}#{k}", report.entries[k].class.name())
        });
        let ratio = if floor > 0.0 { format!("{:.2}", h.amplitude / floor) } else { "-".into() };
        let _ = writeln!(out, "{:<6} {:>12.8} {:>12.8} {:>14.6e} {:>8}   {m}", i + 1, h.line.s, h.line.phi, h.amplitude, ratio);
    }
    out
}

/// Runs the configured experiment, writing every output under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let setup = setup_of(cfg)?;
    let sino = setup.sino();
    let phantom = &cfg.phantom;
    io_at(fs::create_dir_all(&cfg.out))?;
    let mut timings = Vec::<(String, f64)>::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let tol = dedup_tolerance(&sino);
    let mut report = at("predict", predict_streaks(phantom, tol))?;
    lap("predict", &mut timings);

    let (_, chi) = rasterize(phantom, setup.image);
    let excl = exclusion_mask(&chi, cfg.streaks.exclusion);
    let mut w = Writer { dir: cfg.out.clone(), files: Vec::new(), display_mask: excl.clone() };
    let mut log = String::new();
    let mut results = String::new();
    let term_c = |n: u32| match (n, cfg.coefficient) {
        (_, Some(c)) => c,
        (2, None) => quadratic_coefficient(phantom),
        _ => 1.0,
    };

    // image whose streaks are measured, by selector
    let target_sel = if cfg.select == Select::Scan { cfg.streaks.scan_source } else { cfg.select };
    let mut measured: Option<ImageGrid> = None;
    match target_sel {
        Select::Predict => {}
        Select::Fct | Select::Fma => {
            let r = at("reconstruct_fct", reconstruct_fct(phantom, &setup, cfg.mode, Projection::Analytic))?;
            lap("reconstruct_fct", &mut timings);
            if cfg.select == Select::Fct {
                w.image("f_ct", &r.f_ct)?;
                w.image("f_e0", &r.f_e0)?;
                w.sinogram("p", &r.p)?;
                w.sinogram("p_ma", &r.p_ma)?;
            }
            w.image("f_ma", &r.f_ma)?;
            let _ = writeln!(results, "series.flagged_samples = {}", r.flagged);
            measured = Some(r.f_ma);
        }
        Select::Fma1 | Select::Term(_) => {
            let n = if let Select::Term(n) = target_sel { n } else { 2 };
            let c = if target_sel == Select::Fma1 { quadratic_coefficient(phantom) } else { term_c(n) };
            let img = at("fma_term", fma_term(phantom, &setup, n, c))?;
            lap("fma_term", &mut timings);
            let name = if target_sel == Select::Fma1 { "f_ma1".to_string() } else { format!("term_{n}") };
            w.image(&name, &img)?;
            let _ = writeln!(log, "term.power = {n}\nterm.coefficient = {c:?}");
            measured = Some(img);
        }
        Select::Filtered => {
            let fc = cfg.filter.expect("validated at load");
            let r = at("filtered_reconstruct", filtered_reconstruct(phantom, &setup, cfg.mode, &fc.spec, fc.route))?;
            lap("filtered_reconstruct", &mut timings);
            w.image("f_ct_filtered", &r.f_ct)?;
            w.image("f_ma_filtered", &r.f_ma)?;
            measured = Some(r.f_ma);
        }
        Select::Scan => unreachable!("scan_source is validated at load"),
    }

    let mut hits_out = None;
    if let Some(img) = &measured {
        let tube = tube_of(cfg);
        let floor = at(
            "measure",
            noise_floor(img, &excl, &report.lines(), cfg.streaks.noise_lines, cfg.seed, &tube),
        )?;
        measure_report(&mut report, img, &excl, &tube, &OrderParams::default());
        for e in &mut report.entries {
            if e.amplitude.is_some_and(|a| a < cfg.streaks.floor_factor * floor) {
                e.flag("below-floor");
            }
        }
        lap("measure", &mut timings);
        let _ = writeln!(results, "noise_floor = {floor:?}");
        if cfg.select == Select::Scan {
            let params = ScanParams {
                tube,
                nms_radius: cfg.streaks.nms_radius,
                threshold: cfg.streaks.floor_factor * floor,
                max_hits: cfg.streaks.max_hits,
            };
            let grid = SinoSpec::covering(&setup.image, sino.n_s, cfg.streaks.scan_angles);
            let hits = brute_force_streak_scan(img, &excl, &grid, &params);
            lap("scan", &mut timings);
            let _ = writeln!(results, "scan.hits = {}", hits.len());
            hits_out = Some(scan_table(&hits, &report, tol, floor));
        }
    }
    if let Some(t) = hits_out {
        w.text("scan.txt", &t)?;
    }
    w.text("streaks.txt", &report.to_table())?;
    w.text("streaks.json", &report.to_json())?;
    let _ = writeln!(results, "predicted_lines = {}", report.len());

    let mut head = String::new();
    let _ = writeln!(head, "# metalct run log\nformat = {FORMAT_LINE}");
    let _ = writeln!(head, "config = {}", cfg.source.display());
    let _ = writeln!(head, "select = {}\nseed = {}", cfg.select, cfg.seed);
    let _ = writeln!(head, "grid.n = {}\ngrid.extent = {:?}\ngrid.dx = {:?}", setup.image.n, setup.image.extent, setup.image.dx());
    let _ = writeln!(
        head,
        "sino.offsets = {}\nsino.angles = {}\nsino.s_min = {:?}\nsino.s_max = {:?}\nsino.ds = {:?}\nsino.dphi = {:?}",
        sino.n_s,
        sino.n_phi,
        sino.s_min,
        sino.s_max,
        sino.ds(),
        sino.dphi()
    );
    let _ = writeln!(
        head,
        "sampling = {}",
        match setup.projector.sampling {
            Sampling::Point => "point".to_string(),
            Sampling::BandLimited { oversample } => format!("band-limited oversample={oversample}"),
        }
    );
    let e = phantom.energy;
    let _ = writeln!(
        head,
        "energy.alpha = {:?}\nenergy.eps = {:?}\nenergy.e0 = {:?}\nenergy.alpha_eps = {:?}\nmode = {}",
        e.alpha,
        e.eps,
        e.e0,
        e.alpha_eps(),
        mode_name(cfg.mode)
    );
    if let Some(f) = cfg.filter {
        let xi_max = PI / setup.image.dx() * std::f64::consts::SQRT_2;
        let _ = writeln!(
            head,
            "filter.alpha = {:?}\nfilter.k = {:?}\nfilter.route = {}\nfilter.inverse_bound = {:?}",
            f.spec.alpha_k,
            f.spec.k,
            match f.route {
                FilterRoute::Slice => "slice",
                FilterRoute::Raster => "raster",
            },
            f.spec.inverse_bound(xi_max)
        );
    }
    let _ = writeln!(head, "phantom.background_ellipses = {}", phantom.background.len());
    for (i, m) in phantom.metals.iter().enumerate() {
        let _ = writeln!(head, "phantom.metal.{i} = value={:?} {}", m.value, shape_summary(m.region.shape()));
    }
    let _ = writeln!(
        head,
        "const.fbp_scale = {:?}\nconst.backprojection_weight = {:?}\nconst.riesz_padded_length = {}\nconst.quadratic_coefficient = {:?}",
        1.0 / (4.0 * PI),
        2.0 * sino.dphi(),
        2 * sino.n_s.next_power_of_two(),
        quadratic_coefficient(phantom)
    );
    let s = &cfg.streaks;
    let _ = writeln!(
        head,
        "tol.dedup = {tol:?}\ntol.tube_px = {:?}\ntol.annulus_px = {:?}..{:?}\ntol.min_pixels = {}\ntol.exclusion_px = {}\ntol.noise_lines = {}\ntol.floor_factor = {:?}\ntol.nms_radius = {}\ntol.max_hits = {}\ntol.scan_source = {}\ntol.scan_angles = {}",
        s.tube, s.annulus_inner, s.annulus_outer, s.min_pixels, s.exclusion, s.noise_lines, s.floor_factor, s.nms_radius, s.max_hits, s.scan_source, s.scan_angles
    );
    w.files.push("run.log".into());
    w.files.push("timings.log".into());
    let mut body = head + &log + &results;
    let _ = writeln!(body, "outputs = {}", w.files.join(" "));
    io_at(fs::write(cfg.out.join("run.log"), body))?;

    let mut t = String::from("# wall-clock seconds per stage (not part of the deterministic outputs)\n");
    for (k, v) in &timings {
        let _ = writeln!(t, "{k} = {v:.3}");
    }
    io_at(fs::write(cfg.out.join("timings.log"), t))?;
    Ok(w.files.iter().map(|f| cfg.out.join(f)).collect())
}

/// Files of a run directory that must be byte-identical across runs.
pub fn deterministic_outputs(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n != "timings.log"))
        .collect();
    v.sort();
    Ok(v)
}
