//! The pre-filter K with symbol `(α + |ξ|²)^{k/2}` and its inverse, as Fourier multipliers
//! on images and, through the projection-slice identity, on sinogram rows.

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::fftutil::{angular_freq, filter_row, forward, inverse, padded_len};
use crate::model::{invalid, Error, ImageGrid, Result, SinogramGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub alpha_k: f64,
    /// Order, k ≤ 0; k = 0 is the identity.
    pub k: f64,
}

impl FilterSpec {
    pub fn new(alpha_k: f64, k: f64) -> Result<Self> {
        if !(alpha_k > 0.0) || !alpha_k.is_finite() || !(k <= 0.0) || !k.is_finite() {
            return Err(invalid(format!("filter alpha_k={alpha_k} k={k} (need alpha_k > 0, k <= 0)")));
        }
        Ok(FilterSpec { alpha_k, k })
    }

    pub fn identity() -> Self {
        FilterSpec { alpha_k: 1.0, k: 0.0 }
    }

    /// Symbol p(|ξ|) raised to `sign` (1 forward, −1 inverse).
    pub fn symbol(&self, xi: f64, sign: f64) -> f64 {
        (self.alpha_k + xi * xi).powf(sign * self.k / 2.0)
    }

    /// Largest inverse gain on a grid whose highest angular frequency is `xi_max`.
    pub fn inverse_bound(&self, xi_max: f64) -> f64 {
        self.symbol(xi_max, -1.0).max(self.symbol(0.0, -1.0))
    }
}

/// Relative size of the discarded imaginary part above which filtering fails.
pub const IMAG_TOL: f64 = 1e-8;

fn multiplier_2d(img: &ImageGrid, f: &FilterSpec, sign: f64) -> Result<ImageGrid> {
    if f.k == 0.0 {
        return Ok(img.clone());
    }
    if img.values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite image"));
    }
    let n = img.n();
    let m = 2 * n;
    let dx = img.spec.dx();
    let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
    for r in 0..n {
        for c in 0..n {
            buf[r * m + c] = Complex64::new(img.values[[r, c]], 0.0);
        }
    }
    let fwd = forward(m);
    let inv = inverse(m);
    buf.par_chunks_mut(m).for_each(|row| fwd.process(row));
    transpose(&mut buf, m);
    buf.par_chunks_mut(m).for_each(|row| fwd.process(row));
    let gains: Vec<f64> = (0..m).map(|k| angular_freq(k, m, dx)).collect();
    let scale = 1.0 / (m * m) as f64;
    buf.par_chunks_mut(m).enumerate().for_each(|(a, row)| {
        for (b, z) in row.iter_mut().enumerate() {
            let xi2 = gains[a] * gains[a] + gains[b] * gains[b];
            *z *= f.symbol(xi2.sqrt(), sign) * scale;
        }
    });
    buf.par_chunks_mut(m).for_each(|row| inv.process(row));
    transpose(&mut buf, m);
    buf.par_chunks_mut(m).for_each(|row| inv.process(row));
    let mut out = Array2::zeros((n, n));
    let (mut re2, mut im2) = (0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            let z = buf[r * m + c];
            out[[r, c]] = z.re;
            re2 += z.re * z.re;
            im2 += z.im * z.im;
        }
    }
    if im2.sqrt() > IMAG_TOL * re2.sqrt().max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "symbol filter left imaginary residue {:.3e} of output norm",
            im2.sqrt() / re2.sqrt()
        )));
    }
    Ok(ImageGrid { spec: img.spec, values: out })
}

fn transpose(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// K: zero-pad to 2n per side, multiply by `(α + |ξ|²)^{k/2}`, crop.
pub fn apply_symbol_filter(img: &ImageGrid, f: &FilterSpec) -> Result<ImageGrid> {
    multiplier_2d(img, f, 1.0)
}

/// K⁻¹: same pipeline with exponent −k/2.
pub fn inverse_symbol_filter(img: &ImageGrid, f: &FilterSpec) -> Result<ImageGrid> {
    multiplier_2d(img, f, -1.0)
}

/// The one-dimensional multiplier `p(|σ|)^sign` along `s` on a single row, with the
/// same zero-padding rule as the ramp filter.
pub fn slice_filter_row(row: &[f64], ds: f64, f: &FilterSpec, sign: f64, out: &mut [f64]) {
    if f.k == 0.0 {
        out.copy_from_slice(&row[..out.len()]);
        return;
    }
    filter_row(row, padded_len(row.len()), ds, |w| f.symbol(w, sign), out);
}

/// Applies the slice multiplier to every row: 𝓡(Kg) = K_s(𝓡g) by the projection-slice theorem.
pub fn apply_slice_filter(sino: &SinogramGrid, f: &FilterSpec, sign: f64) -> SinogramGrid {
    let spec = sino.spec;
    let rows: Vec<Vec<f64>> = (0..spec.n_phi)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; spec.n_s];
            slice_filter_row(sino.values.row(j).as_slice().expect("standard layout"), spec.ds(), f, sign, &mut out);
            out
        })
        .collect();
    let mut values = Array2::zeros((spec.n_phi, spec.n_s));
    for (j, r) in rows.into_iter().enumerate() {
        values.row_mut(j).assign(&ndarray::Array1::from(r));
    }
    SinogramGrid { spec, values }
}
