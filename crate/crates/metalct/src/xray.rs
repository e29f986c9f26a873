//! Forward projection, ramp filtering, back-projection and FBP on the parallel-beam grid.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;

use crate::fftutil::{filter_row, padded_len};
use crate::geometry::Body;
use crate::model::grid::interp_zero;
use crate::model::{invalid, ImageGrid, ImageSpec, Result, SinoSpec, SinogramGrid};

/// How detector samples relate to the continuous projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Exact values at the offset cell centers.
    Point,
    /// The projection ideally low-passed at the detector Nyquist frequency, computed
    /// from `oversample`-times finer exact samples.
    BandLimited { oversample: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectorSpec {
    pub sino: SinoSpec,
    pub sampling: Sampling,
}

impl ProjectorSpec {
    pub fn point(sino: SinoSpec) -> Self {
        ProjectorSpec { sino, sampling: Sampling::Point }
    }
}

/// Builds a sinogram from a row evaluator `row_fn(φ, offsets, out)`.
///
/// Nonlinear maps of exact line integrals belong inside `row_fn`, so under
/// band-limited sampling the low-pass acts on the mapped values.
pub fn sample_sinogram<F>(proj: &ProjectorSpec, row_fn: F) -> SinogramGrid
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    let spec = proj.sino;
    let n_s = spec.n_s;
    let ds = spec.ds();
    let rows: Vec<Vec<f64>> = (0..spec.n_phi)
        .into_par_iter()
        .map(|j| {
            let phi = spec.phi(j);
            match proj.sampling {
                Sampling::Point => {
                    let mut out = vec![0.0; n_s];
                    row_fn(phi, &spec.s_values(), &mut out);
                    out
                }
                Sampling::BandLimited { oversample } => {
                    let up = oversample.max(2);
                    let fine: Vec<f64> = (0..n_s * up)
                        .map(|k| spec.s(k / up) + ds * ((k % up) as f64 - (up / 2) as f64) / up as f64)
                        .collect();
                    let mut vals = vec![0.0; fine.len()];
                    row_fn(phi, &fine, &mut vals);
                    let cut = PI / ds;
                    let mut low = vec![0.0; fine.len()];
                    filter_row(&vals, padded_len(fine.len()), ds / up as f64, |w| if w <= cut { 1.0 } else { 0.0 }, &mut low);
                    (0..n_s).map(|i| low[i * up + up / 2]).collect()
                }
            }
        })
        .collect();
    let mut values = Array2::zeros((spec.n_phi, n_s));
    for (j, r) in rows.into_iter().enumerate() {
        values.row_mut(j).assign(&ndarray::Array1::from(r));
    }
    SinogramGrid { spec, values }
}

/// Rejects bodies that could reach beyond the sampled offset range.
pub fn check_coverage(bodies: &[(&dyn Body, f64)], spec: &SinoSpec) -> Result<()> {
    let reach = spec.s_max.min(-spec.s_min);
    for (i, (b, _)) in bodies.iter().enumerate() {
        if b.reach() > reach {
            return Err(invalid(format!(
                "shape {i} reaches {:.4} from the origin, beyond the offset range ±{reach:.4}",
                b.reach()
            )));
        }
    }
    Ok(())
}

/// Weighted sum of exact chord lengths, `Σ w·|L ∩ body|`, at offsets `s` and angle φ.
pub fn chord_row(bodies: &[(&dyn Body, f64)], phi: f64, s: &[f64], out: &mut [f64]) {
    for (o, &si) in out.iter_mut().zip(s) {
        *o = bodies.iter().map(|(b, w)| w * b.chord(si, phi)).sum();
    }
}

/// Exact (or band-limited, per `proj.sampling`) Radon transform of a weighted body list.
pub fn radon_analytic(bodies: &[(&dyn Body, f64)], proj: &ProjectorSpec) -> Result<SinogramGrid> {
    check_coverage(bodies, &proj.sino)?;
    Ok(sample_sinogram(proj, |phi, s, out| chord_row(bodies, phi, s, out)))
}

/// Linear interpolation with zeros beyond both ends (fractional index `t`).
fn interp_padded(v: &[f64], t: f64) -> f64 {
    let n = v.len() as isize;
    if !(t > -1.0 && t < n as f64) {
        return 0.0;
    }
    let i = t.floor() as isize;
    let w = t - i as f64;
    let at = |k: isize| if k >= 0 && k < n { v[k as usize] } else { 0.0 };
    (1.0 - w) * at(i) + w * at(i + 1)
}

/// Joseph projector: one linear interpolation per crossed row (or column) along each ray.
pub fn radon_raster(image: &ImageGrid, spec: &SinoSpec) -> SinogramGrid {
    let ispec = image.spec;
    let n = ispec.n;
    let dx = ispec.dx();
    let rows: Vec<Vec<f64>> = (0..n).map(|r| image.values.row(r).to_vec()).collect();
    let cols: Vec<Vec<f64>> = (0..n).map(|c| image.values.column(c).to_vec()).collect();
    let out: Vec<Vec<f64>> = (0..spec.n_phi)
        .into_par_iter()
        .map(|j| {
            let phi = spec.phi(j);
            let (sn, cs) = phi.sin_cos();
            (0..spec.n_s)
                .map(|i| {
                    let s = spec.s(i);
                    let mut acc = 0.0;
                    if cs.abs() >= sn.abs() {
                        for (r, row) in rows.iter().enumerate() {
                            let y = ispec.coord(r);
                            acc += interp_padded(row, ispec.index_of((s - y * sn) / cs));
                        }
                        acc * dx / cs.abs()
                    } else {
                        for (c, col) in cols.iter().enumerate() {
                            let x = ispec.coord(c);
                            acc += interp_padded(col, ispec.index_of((s - x * cs) / sn));
                        }
                        acc * dx / sn.abs()
                    }
                })
                .collect()
        })
        .collect();
    let mut values = Array2::zeros((spec.n_phi, spec.n_s));
    for (j, r) in out.into_iter().enumerate() {
        values.row_mut(j).assign(&ndarray::Array1::from(r));
    }
    SinogramGrid { spec: *spec, values }
}

/// The |w| multiplier on a periodic row (no padding).
pub fn ramp_circular(row: &[f64], ds: f64) -> Vec<f64> {
    let mut out = vec![0.0; row.len()];
    filter_row(row, row.len(), ds, |w| w, &mut out);
    out
}

/// Riesz potential 𝓘⁻¹ per angle: zero-pad to twice the next power of two, multiply the
/// spectrum by |w| (hard cut at Nyquist, no window), crop.
pub fn riesz(sino: &SinogramGrid) -> SinogramGrid {
    let spec = sino.spec;
    let npad = padded_len(spec.n_s);
    let ds = spec.ds();
    let rows: Vec<Vec<f64>> = (0..spec.n_phi)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; spec.n_s];
            filter_row(sino.values.row(j).as_slice().expect("standard layout"), npad, ds, |w| w, &mut out);
            out
        })
        .collect();
    let mut values = Array2::zeros((spec.n_phi, spec.n_s));
    for (j, r) in rows.into_iter().enumerate() {
        values.row_mut(j).assign(&ndarray::Array1::from(r));
    }
    SinogramGrid { spec, values }
}

/// `Σ_φ interp(sino[φ], x·θ)` per pixel, angles accumulated in ascending order.
pub fn backproject_unscaled(sino: &SinogramGrid, image: ImageSpec) -> ImageGrid {
    let spec = sino.spec;
    let n = image.n;
    let ds = spec.ds();
    let trig: Vec<(f64, f64)> = (0..spec.n_phi).map(|j| spec.phi(j).sin_cos()).collect();
    let x0 = image.coord(0);
    let dx = image.dx();
    let last = (spec.n_s - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let y = image.coord(r);
            let mut acc = vec![0.0; n];
            for (j, &(sn, cs)) in trig.iter().enumerate() {
                let row = sino.values.row(j);
                let row = row.as_slice().expect("standard layout");
                let a = (x0 * cs + y * sn - spec.s_min) / ds - 0.5;
                let b = dx * cs / ds;
                for (c, v) in acc.iter_mut().enumerate() {
                    let t = a + b * c as f64;
                    if t >= 0.0 && t <= last {
                        let i = (t as usize).min(spec.n_s - 2);
                        let w = t - i as f64;
                        *v += row[i] + w * (row[i + 1] - row[i]);
                    }
                }
            }
            acc
        })
        .collect();
    let mut values = Array2::zeros((n, n));
    for (r, row) in rows.into_iter().enumerate() {
        values.row_mut(r).assign(&ndarray::Array1::from(row));
    }
    ImageGrid { spec: image, values }
}

/// Adjoint 𝓡* over the full circle: `2·Σ_φ interp(sino[φ], x·θ)·Δφ`.
pub fn backproject(sino: &SinogramGrid, image: ImageSpec) -> ImageGrid {
    backproject_unscaled(sino, image).scaled(2.0 * sino.spec.dphi())
}

/// Filtered back-projection `(1/4π)·𝓡*𝓘⁻¹`.
pub fn fbp(sino: &SinogramGrid, image: ImageSpec) -> ImageGrid {
    backproject(&riesz(sino), image).scaled(1.0 / (4.0 * PI))
}

/// Linear interpolation of a sinogram row, zero outside; exposed for diagnostics.
pub fn sample_row(sino: &SinogramGrid, j: usize, s: f64) -> f64 {
    interp_zero(sino.values.row(j).as_slice().expect("standard layout"), sino.spec.index_of(s))
}
