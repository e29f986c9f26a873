use std::f64::consts::PI;

use ndarray::Array2;

use super::{invalid, Result};

/// Square image window `[−extent, extent]²` sampled at `n × n` pixel centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageSpec {
    pub n: usize,
    pub extent: f64,
}

impl ImageSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n == 0 || !(extent > 0.0) || !extent.is_finite() {
            return Err(invalid(format!("image grid n={n} extent={extent}")));
        }
        Ok(ImageSpec { n, extent })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Center coordinate of column or row `i`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + self.dx() * (i as f64 + 0.5)
    }

    /// Fractional index of coordinate `x` (pixel centers at integers).
    pub fn index_of(&self, x: f64) -> f64 {
        (x + self.extent) / self.dx() - 0.5
    }

    /// Default detector grid for this window: √2-covering offsets, 720 angles.
    pub fn default_sino(&self) -> SinoSpec {
        SinoSpec::covering(self, default_offsets(self.n), 720)
    }
}

/// Default offset count: odd, at least √2·n + 4 (729 for n = 512).
pub fn default_offsets(n: usize) -> usize {
    let m = (std::f64::consts::SQRT_2 * n as f64).ceil() as usize + 4;
    if m % 2 == 0 {
        m + 1
    } else {
        m
    }
}

/// Sinogram sampling: `n_s` offset cell centers over `[s_min, s_max]`, `n_phi`
/// angles φ_j = jπ/n_phi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinoSpec {
    pub n_s: usize,
    pub n_phi: usize,
    pub s_min: f64,
    pub s_max: f64,
}

impl SinoSpec {
    pub fn new(n_s: usize, n_phi: usize, s_min: f64, s_max: f64) -> Result<Self> {
        if n_s < 2 || n_phi == 0 || !(s_max > s_min) || !s_min.is_finite() || !s_max.is_finite() {
            return Err(invalid(format!(
                "sinogram grid n_s={n_s} n_phi={n_phi} s=[{s_min}, {s_max}]"
            )));
        }
        Ok(SinoSpec { n_s, n_phi, s_min, s_max })
    }

    /// Offsets over `[−√2·extent, √2·extent]`, covering the image diagonal.
    pub fn covering(image: &ImageSpec, n_s: usize, n_phi: usize) -> Self {
        let r = std::f64::consts::SQRT_2 * image.extent;
        SinoSpec { n_s, n_phi, s_min: -r, s_max: r }
    }

    pub fn ds(&self) -> f64 {
        (self.s_max - self.s_min) / self.n_s as f64
    }

    pub fn dphi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_min + self.ds() * (i as f64 + 0.5)
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.dphi()
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.n_s).map(|i| self.s(i)).collect()
    }

    /// Fractional sample index of offset `s`.
    pub fn index_of(&self, s: f64) -> f64 {
        (s - self.s_min) / self.ds() - 0.5
    }
}

/// Image samples; `values[[row, col]]` sits at `(coord(col), coord(row))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    pub spec: ImageSpec,
    pub values: Array2<f64>,
}

impl ImageGrid {
    pub fn zeros(spec: ImageSpec) -> Self {
        ImageGrid { spec, values: Array2::zeros((spec.n, spec.n)) }
    }

    pub fn from_values(spec: ImageSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (spec.n, spec.n) {
            return Err(invalid(format!("image values {:?} for n={}", values.dim(), spec.n)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite image value"));
        }
        Ok(ImageGrid { spec, values })
    }

    pub fn from_fn(spec: ImageSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((spec.n, spec.n), |(r, c)| f(spec.coord(c), spec.coord(r)));
        ImageGrid { spec, values }
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// Bilinear interpolation at `(x, y)`; `None` outside the hull of pixel centers.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let n = self.spec.n;
        let fx = self.spec.index_of(x);
        let fy = self.spec.index_of(y);
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (n - 1) as f64 && fy <= (n - 1) as f64) {
            return None;
        }
        let c0 = (fx.floor() as usize).min(n - 2);
        let r0 = (fy.floor() as usize).min(n - 2);
        let tx = fx - c0 as f64;
        let ty = fy - r0 as f64;
        let v = &self.values;
        Some(
            (1.0 - ty) * ((1.0 - tx) * v[[r0, c0]] + tx * v[[r0, c0 + 1]])
                + ty * ((1.0 - tx) * v[[r0 + 1, c0]] + tx * v[[r0 + 1, c0 + 1]]),
        )
    }

    pub fn scaled(&self, a: f64) -> ImageGrid {
        ImageGrid { spec: self.spec, values: &self.values * a }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Sinogram samples; `values[[j, i]]` is the line integral at `(s(i), phi(j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinogramGrid {
    pub spec: SinoSpec,
    pub values: Array2<f64>,
}

impl SinogramGrid {
    pub fn zeros(spec: SinoSpec) -> Self {
        SinogramGrid { spec, values: Array2::zeros((spec.n_phi, spec.n_s)) }
    }

    pub fn from_values(spec: SinoSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (spec.n_phi, spec.n_s) {
            return Err(invalid(format!("sinogram values {:?} for {:?}", values.dim(), spec)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite sinogram value"));
        }
        Ok(SinogramGrid { spec, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SinogramGrid {
        SinogramGrid { spec: self.spec, values: self.values.mapv(f) }
    }

    /// Linear interpolation along `s` in row `j`; zero outside the sampled range.
    pub fn interp_row(&self, j: usize, s: f64) -> f64 {
        interp_zero(self.values.row(j).as_slice().expect("standard layout"), self.spec.index_of(s))
    }
}

/// Linear interpolation at fractional index `t`, zero beyond the first and last samples.
pub(crate) fn interp_zero(row: &[f64], t: f64) -> f64 {
    let last = (row.len() - 1) as f64;
    if !(t >= 0.0 && t <= last) {
        return 0.0;
    }
    let i = (t.floor() as usize).min(row.len() - 2);
    let w = t - i as f64;
    (1.0 - w) * row[i] + w * row[i + 1]
}

/// Boolean pixel mask on an image grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    pub spec: ImageSpec,
    pub values: Array2<bool>,
}

impl Mask {
    pub fn empty(spec: ImageSpec) -> Self {
        Mask { spec, values: Array2::from_elem((spec.n, spec.n), false) }
    }

    /// Pixels where `img > 0.5`.
    pub fn from_indicator(img: &ImageGrid) -> Self {
        Mask { spec: img.spec, values: img.values.mapv(|v| v > 0.5) }
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    /// Dilation by `steps` iterations of the 4-neighbour cross.
    pub fn dilated(&self, steps: usize) -> Mask {
        let n = self.spec.n;
        let mut cur = self.values.clone();
        for _ in 0..steps {
            let prev = cur.clone();
            for r in 0..n {
                for c in 0..n {
                    if prev[[r, c]] {
                        continue;
                    }
                    let hit = (r > 0 && prev[[r - 1, c]])
                        || (r + 1 < n && prev[[r + 1, c]])
                        || (c > 0 && prev[[r, c - 1]])
                        || (c + 1 < n && prev[[r, c + 1]]);
                    if hit {
                        cur[[r, c]] = true;
                    }
                }
            }
        }
        Mask { spec: self.spec, values: cur }
    }

    pub fn union(&self, other: &Mask) -> Mask {
        let values = ndarray::Zip::from(&self.values).and(&other.values).map_collect(|&a, &b| a || b);
        Mask { spec: self.spec, values }
    }

    /// Membership of the pixel nearest to `(x, y)`; points outside the window count as masked.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let n = self.spec.n as f64;
        let c = self.spec.index_of(x).round();
        let r = self.spec.index_of(y).round();
        if !(c >= 0.0 && r >= 0.0 && c < n && r < n) {
            return true;
        }
        self.values[[r as usize, c as usize]]
    }
}
