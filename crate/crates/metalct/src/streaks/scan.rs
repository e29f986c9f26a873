use rayon::prelude::*;

use super::measure::TubeParams;
use crate::model::{canonicalize_line, ImageGrid, Line, Mask, SinoSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    pub tube: TubeParams,
    /// Suppression radius in grid cells (L1 over offset and angle indices).
    pub nms_radius: usize,
    /// Hits below this amplitude are dropped.
    pub threshold: f64,
    /// Largest number of hits returned.
    pub max_hits: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { tube: TubeParams::default(), nms_radius: 8, threshold: 0.0, max_hits: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanHit {
    pub line: Line,
    pub amplitude: f64,
    /// Offset and angle index on the scan grid.
    pub cell: (usize, usize),
}

const LEVELS: usize = 1 << 16;
const BUCKETS_PER_PIXEL: f64 = 16.0;

/// Two-level histogram of 16-bit levels with median queries.
struct Histogram {
    coarse: Vec<u32>,
    fine: Vec<u32>,
    count: u32,
}

impl Histogram {
    fn new() -> Self {
        Histogram { coarse: vec![0; 256], fine: vec![0; LEVELS], count: 0 }
    }

    fn clear(&mut self) {
        self.coarse.iter_mut().for_each(|c| *c = 0);
        self.fine.iter_mut().for_each(|c| *c = 0);
        self.count = 0;
    }

    fn add(&mut self, q: &[u16]) {
        for &v in q {
            self.fine[v as usize] += 1;
            self.coarse[(v >> 8) as usize] += 1;
        }
        self.count += q.len() as u32;
    }

    fn remove(&mut self, q: &[u16]) {
        for &v in q {
            self.fine[v as usize] -= 1;
            self.coarse[(v >> 8) as usize] -= 1;
        }
        self.count -= q.len() as u32;
    }

    /// Level of rank `k` (0-based) in sorted order.
    fn select(&self, mut k: u32) -> u16 {
        let mut hi = 0;
        while self.coarse[hi] <= k {
            k -= self.coarse[hi];
            hi += 1;
        }
        let base = hi << 8;
        let mut lo = 0;
        while self.fine[base + lo] <= k {
            k -= self.fine[base + lo];
            lo += 1;
        }
        (base + lo) as u16
    }

    /// Median level, averaging the middle pair for even counts.
    fn median(&self) -> f64 {
        let lo = self.select((self.count - 1) / 2);
        if self.count % 2 == 1 {
            return lo as f64;
        }
        0.5 * (lo as f64 + self.select(self.count / 2) as f64)
    }
}

/// Sliding window `[lo, hi)` over offset-sorted pixels, kept in sync with a histogram.
struct Window {
    lo: usize,
    hi: usize,
}

impl Window {
    fn advance(&mut self, lo: usize, hi: usize, levels: &[u16], h: &mut Histogram) {
        let hi = hi.max(lo);
        h.remove(&levels[self.lo..lo.min(self.hi).max(self.lo)]);
        self.hi = self.hi.max(lo);
        self.lo = lo;
        if hi > self.hi {
            h.add(&levels[self.hi..hi]);
            self.hi = hi;
        }
    }
}

/// Evaluates the tube amplitude on every `(s, φ)` cell of `spec` and returns the strongest
/// local maxima after greedy non-maximum suppression, ordered by amplitude, then s, then φ.
///
/// Tube and annulus membership is exactly that of [`super::measure_streak`]; medians are
/// taken over |img| quantized to 16 bits, so amplitudes agree to one quantization step.
pub fn brute_force_streak_scan(img: &ImageGrid, exclusion: &Mask, spec: &SinoSpec, params: &ScanParams) -> Vec<ScanHit> {
    let amps = scan_amplitudes(img, exclusion, spec, &params.tube);
    suppress(&amps, spec, params)
}

/// Amplitude map indexed `[φ][s]`; unmeasurable cells are `NaN`.
pub fn scan_amplitudes(img: &ImageGrid, exclusion: &Mask, spec: &SinoSpec, tube: &TubeParams) -> Vec<Vec<f64>> {
    let ispec = img.spec;
    let n = ispec.n;
    let dx = ispec.dx();
    let mut pts = Vec::new();
    let mut absv = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !exclusion.values[[r, c]] {
                pts.push((ispec.coord(c), ispec.coord(r)));
                absv.push(img.values[[r, c]].abs());
            }
        }
    }
    let vmax = absv.iter().copied().fold(0.0, f64::max);
    if pts.is_empty() || !(vmax > 0.0) {
        return vec![vec![0.0; spec.n_s]; spec.n_phi];
    }
    let step = vmax / (LEVELS - 1) as f64;
    let quant: Vec<u16> = absv.iter().map(|v| (v / step).round().min((LEVELS - 1) as f64) as u16).collect();

    // offsets are bucket-sorted at 1/16 pixel, then sorted exactly within each bucket
    let bw = dx / BUCKETS_PER_PIXEL;
    let d_max = ispec.extent * 2f64.sqrt() + dx;
    let nb = (2.0 * d_max / bw).ceil() as usize + 1;
    let bucket_of = |d: f64| (((d + d_max) / bw).floor().max(0.0) as usize).min(nb - 1);
    let m = pts.len();

    (0..spec.n_phi)
        .into_par_iter()
        .map_init(
            || (Histogram::new(), Histogram::new(), vec![0usize; nb + 1], vec![(0.0f64, 0u16); m], vec![0usize; m]),
            |(ht, ha, starts, sorted, bucket), j| {
                let (sn, cs) = spec.phi(j).sin_cos();
                starts.iter_mut().for_each(|v| *v = 0);
                for (k, &(x, y)) in pts.iter().enumerate() {
                    let b = bucket_of(x * cs + y * sn);
                    bucket[k] = b;
                    starts[b + 1] += 1;
                }
                for b in 0..nb {
                    starts[b + 1] += starts[b];
                }
                let mut fill = starts.clone();
                for (k, &b) in bucket.iter().enumerate() {
                    let (x, y) = pts[k];
                    sorted[fill[b]] = (x * cs + y * sn, quant[k]);
                    fill[b] += 1;
                }
                for b in 0..nb {
                    sorted[starts[b]..starts[b + 1]].sort_unstable_by(|p, q| p.0.total_cmp(&q.0));
                }
                let levels: Vec<u16> = sorted.iter().map(|p| p.1).collect();
                ht.clear();
                ha.clear();
                let mut wt = Window { lo: 0, hi: 0 };
                let mut wl = Window { lo: 0, hi: 0 };
                let mut wr = Window { lo: 0, hi: 0 };
                (0..spec.n_s)
                    .map(|i| {
                        let s = spec.s(i);
                        // same offset expression as the direct measurement, monotone in d
                        let u = |d: f64| (d - s) / dx;
                        let first = |pred: &dyn Fn(f64) -> bool| sorted.partition_point(|p| pred(u(p.0)));
                        wt.advance(first(&|v| v < -tube.tube), first(&|v| v <= tube.tube), &levels, ht);
                        wl.advance(
                            first(&|v| v < -tube.annulus_outer),
                            first(&|v| v <= -tube.annulus_inner),
                            &levels,
                            ha,
                        );
                        wr.advance(first(&|v| v < tube.annulus_inner), first(&|v| v <= tube.annulus_outer), &levels, ha);
                        if (ht.count as usize) < tube.min_pixels || (ha.count as usize) < tube.min_pixels {
                            return f64::NAN;
                        }
                        (ht.median() - ha.median()) * step
                    })
                    .collect()
            },
        )
        .collect()
}

fn suppress(amps: &[Vec<f64>], spec: &SinoSpec, params: &ScanParams) -> Vec<ScanHit> {
    let (n_phi, n_s) = (spec.n_phi, spec.n_s);
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (j, row) in amps.iter().enumerate() {
        for (i, &a) in row.iter().enumerate() {
            if a.is_finite() && a > 0.0 && a >= params.threshold {
                cands.push((a, i, j));
            }
        }
    }
    cands.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then(spec.s(a.1).total_cmp(&spec.s(b.1))).then(a.2.cmp(&b.2))
    });
    let mirror = |i: usize| -> Option<usize> {
        let t = spec.index_of(-spec.s(i)).round();
        (t >= 0.0 && t < n_s as f64).then_some(t as usize)
    };
    let mut blocked = vec![false; n_s * n_phi];
    let r = params.nms_radius as isize;
    let mut hits = Vec::new();
    for (a, i, j) in cands {
        if hits.len() >= params.max_hits {
            break;
        }
        if blocked[j * n_s + i] {
            continue;
        }
        let line = canonicalize_line(spec.s(i), spec.phi(j)).expect("grid lines are finite");
        hits.push(ScanHit { line, amplitude: a, cell: (i, j) });
        for dj in -r..=r {
            let rem = r - dj.abs();
            for di in -rem..=rem {
                let ii = i as isize + di;
                let jj = j as isize + dj;
                if ii < 0 || ii >= n_s as isize {
                    continue;
                }
                // crossing φ = 0 or π flips the sign of s
                let (ii, jj) = if jj < 0 {
                    match mirror(ii as usize) {
                        Some(m) => (m, (jj + n_phi as isize) as usize),
                        None => continue,
                    }
                } else if jj >= n_phi as isize {
                    match mirror(ii as usize) {
                        Some(m) => (m, (jj - n_phi as isize) as usize),
                        None => continue,
                    }
                } else {
                    (ii as usize, jj as usize)
                };
                blocked[jj * n_s + ii] = true;
            }
        }
    }
    hits
}
