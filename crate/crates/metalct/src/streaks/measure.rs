use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{line_distance, Error, ImageGrid, Line, Mask, Result, StreakReport};

/// Tube and annulus geometry for [`measure_streak`], in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeParams {
    pub tube: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    /// Fewest unmasked pixels accepted in either the tube or the annulus.
    pub min_pixels: usize,
}

impl Default for TubeParams {
    fn default() -> Self {
        TubeParams { tube: 2.0, annulus_inner: 6.0, annulus_outer: 10.0, min_pixels: 16 }
    }
}

/// χ_D dilated by `pixels` (the default exclusion uses 5).
pub fn exclusion_mask(chi: &ImageGrid, pixels: usize) -> Mask {
    Mask::from_indicator(chi).dilated(pixels)
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    let mid = n / 2;
    let (_, hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let hi = *hi;
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Tube median of |img| minus annulus median, without clamping.
pub fn measure_streak_signed(img: &ImageGrid, line: &Line, exclusion: &Mask, p: &TubeParams) -> Result<f64> {
    let spec = img.spec;
    let dx = spec.dx();
    let th = line.theta();
    let mut tube = Vec::new();
    let mut ann = Vec::new();
    for r in 0..spec.n {
        let y = spec.coord(r);
        for c in 0..spec.n {
            if exclusion.values[[r, c]] {
                continue;
            }
            let d = ((spec.coord(c) * th[0] + y * th[1] - line.s) / dx).abs();
            if d <= p.tube {
                tube.push(img.values[[r, c]].abs());
            } else if d >= p.annulus_inner && d <= p.annulus_outer {
                ann.push(img.values[[r, c]].abs());
            }
        }
    }
    if tube.len() < p.min_pixels || ann.len() < p.min_pixels {
        return Err(Error::NotMeasurable(format!(
            "line (s={:.4}, phi={:.4}) has {} tube and {} annulus pixels outside the exclusion",
            line.s,
            line.phi,
            tube.len(),
            ann.len()
        )));
    }
    Ok(median(&mut tube) - median(&mut ann))
}

/// Streak amplitude: tube median of |img| minus the surrounding annulus median, clamped at 0.
pub fn measure_streak(img: &ImageGrid, line: &Line, exclusion: &Mask, p: &TubeParams) -> Result<f64> {
    Ok(measure_streak_signed(img, line, exclusion, p)?.max(0.0))
}

/// Background level: median of |signed amplitude| over `count` seeded random lines that
/// stay at least 0.1 (line distance, unit offset scale) from every predicted line.
pub fn noise_floor(
    img: &ImageGrid,
    exclusion: &Mask,
    predicted: &[Line],
    count: usize,
    seed: u64,
    p: &TubeParams,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = img.spec.extent;
    let mut amps = Vec::with_capacity(count);
    let mut attempts = 0;
    while amps.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::NotMeasurable("too few measurable random lines for a noise floor".into()));
        }
        let l = Line { s: rng.gen_range(-ext..ext), phi: rng.gen_range(0.0..PI) };
        if predicted.iter().any(|q| line_distance(q, &l, 1.0) < 0.1) {
            continue;
        }
        if let Ok(a) = measure_streak_signed(img, &l, exclusion, p) {
            amps.push(a.abs());
        }
    }
    if amps.is_empty() {
        return Ok(0.0);
    }
    Ok(median(&mut amps))
}

/// Cross-profile decay estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderEstimate {
    pub slope: f64,
    /// False when the decay is faster than any conormal order of interest.
    pub conormal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderParams {
    /// Samples across the line (anchor at index `samples / 2`).
    pub samples: usize,
    /// Sample spacing in pixels.
    pub spacing: f64,
    /// Profiles averaged along the line on each side of the anchor (pixels).
    pub half_average: usize,
    /// Inclusive DFT bin range of the fit.
    pub band: (usize, usize),
    /// Slopes below this are reported as non-conormal.
    pub smooth_below: f64,
}

impl Default for OrderParams {
    fn default() -> Self {
        OrderParams { samples: 64, spacing: 1.0, half_average: 16, band: (1, 10), smooth_below: -4.0 }
    }
}

/// Symmetric Tukey window with taper fraction `alpha`.
pub fn tukey_window(m: usize, alpha: f64) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let width = (alpha * (m - 1) as f64 / 2.0).floor() as usize;
    let denom = alpha * (m - 1) as f64;
    (0..m)
        .map(|n| {
            let nf = n as f64;
            if n <= width {
                0.5 * (1.0 + (PI * (-1.0 + 2.0 * nf / denom)).cos())
            } else if n >= m - width - 1 {
                0.5 * (1.0 + (PI * (-2.0 / alpha + 1.0 + 2.0 * nf / denom)).cos())
            } else {
                1.0
            }
        })
        .collect()
}

/// Decay order of a 1D profile sampled across a singularity.
///
/// The profile is differenced, linearly detrended and Tukey-windowed; the slope of
/// log|DFT| against log frequency over `band`, minus one for the difference, is the order.
pub fn profile_order(profile: &[f64], params: &OrderParams) -> Result<OrderEstimate> {
    let g: Vec<f64> = profile.windows(2).map(|w| w[1] - w[0]).collect();
    let m = g.len();
    let (k0, k1) = params.band;
    if m < 8 || k0 == 0 || k1 <= k0 || k1 >= m / 2 {
        return Err(Error::InvalidArgument(format!("profile of {} samples with band {k0}..={k1}", profile.len())));
    }
    let xm = (m - 1) as f64 / 2.0;
    let mean = g.iter().sum::<f64>() / m as f64;
    let sxx: f64 = (0..m).map(|i| (i as f64 - xm).powi(2)).sum();
    let sxy: f64 = g.iter().enumerate().map(|(i, v)| (i as f64 - xm) * v).sum();
    let b = sxy / sxx;
    let w = tukey_window(m, 0.5);
    let h: Vec<f64> = (0..m).map(|i| (g[i] - mean - b * (i as f64 - xm)) * w[i]).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in k0..=k1 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in h.iter().enumerate() {
            let a = -2.0 * PI * (k * i) as f64 / m as f64;
            re += v * a.cos();
            im += v * a.sin();
        }
        let mag = re.hypot(im);
        if !(mag > 0.0) {
            return Ok(OrderEstimate { slope: f64::NEG_INFINITY, conormal: false });
        }
        xs.push((2.0 * PI * k as f64 / m as f64).ln());
        ys.push(mag.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = num / den - 1.0;
    Ok(OrderEstimate { slope, conormal: slope >= params.smooth_below })
}

fn averaged_profile(img: &ImageGrid, line: &Line, anchor: [f64; 2], exclusion: Option<&Mask>, p: &OrderParams) -> Result<Vec<f64>> {
    let dx = img.spec.dx();
    let th = line.theta();
    let dir = line.direction();
    let h = p.half_average as isize;
    let mid = (p.samples / 2) as f64;
    let mut prof = vec![0.0; p.samples];
    for j in -h..=h {
        for (i, acc) in prof.iter_mut().enumerate() {
            let t = (i as f64 - mid) * p.spacing * dx;
            let u = j as f64 * dx;
            let x = anchor[0] + t * th[0] + u * dir[0];
            let y = anchor[1] + t * th[1] + u * dir[1];
            if exclusion.is_some_and(|m| m.contains_point(x, y)) {
                return Err(Error::NotMeasurable(format!("order profile at ({x:.3}, {y:.3}) is excluded")));
            }
            *acc += img
                .sample(x, y)
                .ok_or_else(|| Error::NotMeasurable(format!("order profile leaves the window at ({x:.3}, {y:.3})")))?;
        }
    }
    let norm = (2 * h + 1) as f64;
    Ok(prof.into_iter().map(|v| v / norm).collect())
}

/// Empirical order of the singularity along `line`, from profiles perpendicular to it
/// around `anchor`, averaged along the line.
pub fn estimate_order(
    img: &ImageGrid,
    line: &Line,
    anchor: [f64; 2],
    exclusion: Option<&Mask>,
    params: &OrderParams,
) -> Result<OrderEstimate> {
    let prof = averaged_profile(img, line, anchor, exclusion, params)?;
    profile_order(&prof, params)
}

/// Point of the line whose averaged profile stays clear of the exclusion mask and the
/// window border, closest to the foot of the perpendicular from the origin.
pub fn choose_anchor(img: &ImageGrid, line: &Line, exclusion: &Mask, params: &OrderParams) -> Option<[f64; 2]> {
    let dx = img.spec.dx();
    let foot = line.foot();
    let dir = line.direction();
    let reach = 2.0 * img.spec.extent;
    let steps = (reach / dx).ceil() as isize;
    let mut offsets: Vec<isize> = (-steps..=steps).collect();
    offsets.sort_by_key(|k| k.abs());
    offsets.into_iter().map(|k| [foot[0] + k as f64 * dx * dir[0], foot[1] + k as f64 * dx * dir[1]]).find(|&a| {
        averaged_profile(img, line, a, Some(exclusion), params).is_ok()
    })
}

/// Fills amplitudes, and orders where an anchor exists, for every report entry.
pub fn measure_report(
    report: &mut StreakReport,
    img: &ImageGrid,
    exclusion: &Mask,
    tube: &TubeParams,
    order: &OrderParams,
) {
    for e in &mut report.entries {
        match measure_streak(img, &e.line, exclusion, tube) {
            Ok(a) => e.amplitude = Some(a),
            Err(_) => e.flag("not-measurable"),
        }
        match choose_anchor(img, &e.line, exclusion, order) {
            Some(a) => {
                if let Ok(o) = estimate_order(img, &e.line, a, Some(exclusion), order) {
                    e.order = Some(o.slope);
                    if !o.conormal {
                        e.flag("non-conormal");
                    }
                }
            }
            None => e.flag("no-order-anchor"),
        }
    }
}
