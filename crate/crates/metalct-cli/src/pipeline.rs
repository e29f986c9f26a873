//! Reconstruction stages: plain FBP of polychromatic data, single power terms of the
//! artifact series, and the pre-filtered reconstruction.

use metalct::beamhardening::{attenuation_bodies, metal_bodies, pma, synthesize_data, DataMode};
use metalct::geometry::{rasterize, Phantom};
use metalct::model::{ImageGrid, ImageSpec, SinoSpec, SinogramGrid};
use metalct::specfilter::{apply_symbol_filter, inverse_symbol_filter, slice_filter_row, FilterSpec};
use metalct::xray::{check_coverage, chord_row, fbp, radon_raster, sample_sinogram, ProjectorSpec, Sampling};
use metalct::Result;

use crate::config::FilterRoute;

/// Image window and detector sampling of one experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setup {
    pub image: ImageSpec,
    pub projector: ProjectorSpec,
}

impl Setup {
    pub fn new(image: ImageSpec, n_s: usize, n_phi: usize, sampling: Sampling) -> Setup {
        Setup { image, projector: ProjectorSpec { sino: SinoSpec::covering(&image, n_s, n_phi), sampling } }
    }

    pub fn sino(&self) -> SinoSpec {
        self.projector.sino
    }
}

/// Which forward projector synthesizes the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Exact chord lengths of the phantom bodies.
    Analytic,
    /// `radon_raster` of the rasterized phantom.
    Raster,
}

#[derive(Clone, Debug)]
pub struct Fct {
    /// `fbp(P)`.
    pub f_ct: ImageGrid,
    /// `fbp(P − 𝓡f_E0)`.
    pub f_ma: ImageGrid,
    /// `fbp(𝓡f_E0)`.
    pub f_e0: ImageGrid,
    pub p: SinogramGrid,
    pub p_ma: SinogramGrid,
    /// Samples where a truncated series diverges.
    pub flagged: usize,
}

fn mismatch(t: f64, ae: f64, mode: DataMode) -> f64 {
    // filtered or rastered chords can dip a rounding error below zero
    pma(ae * t.max(0.0), mode).expect("argument is finite and non-negative").value
}

fn added(a: &SinogramGrid, b: &SinogramGrid) -> SinogramGrid {
    SinogramGrid { spec: a.spec, values: &a.values + &b.values }
}

fn added_img(a: &ImageGrid, b: &ImageGrid) -> ImageGrid {
    ImageGrid { spec: a.spec, values: &a.values + &b.values }
}

/// Reconstruction of unfiltered polychromatic data: `f_CT = fbp(P)` and `f_MA = fbp(P_MA)`.
pub fn reconstruct_fct(phantom: &Phantom, setup: &Setup, mode: DataMode, projection: Projection) -> Result<Fct> {
    let (rf_e0, p_ma, flagged) = match projection {
        Projection::Analytic => {
            let d = synthesize_data(phantom, &setup.projector, mode)?;
            (d.rf_e0, d.p_ma, d.flagged)
        }
        Projection::Raster => {
            let (f, chi) = rasterize(phantom, setup.image);
            let rf_e0 = radon_raster(&f, &setup.sino());
            let rchi = radon_raster(&chi, &setup.sino());
            let ae = phantom.energy.alpha_eps();
            (rf_e0, rchi.map(|t| mismatch(t, ae, mode)), 0)
        }
    };
    let p = added(&rf_e0, &p_ma);
    Ok(Fct {
        f_ct: fbp(&p, setup.image),
        f_ma: fbp(&p_ma, setup.image),
        f_e0: fbp(&rf_e0, setup.image),
        p,
        p_ma,
        flagged,
    })
}

/// Coefficient of the quadratic artifact term: `−(αε)²/3!`.
pub fn quadratic_coefficient(phantom: &Phantom) -> f64 {
    -phantom.energy.alpha_eps().powi(2) / 6.0
}

/// `c · fbp((𝓡χ_D)^n)` with the power taken sample by sample.
pub fn fma_term(phantom: &Phantom, setup: &Setup, n: u32, c: f64) -> Result<ImageGrid> {
    if n == 0 {
        return Err(metalct::Error::InvalidArgument("term power must be at least 1".into()));
    }
    let metal = metal_bodies(phantom);
    check_coverage(&metal, &setup.sino())?;
    let sino = sample_sinogram(&setup.projector, |phi, s, out| {
        chord_row(&metal, phi, s, out);
        for v in out.iter_mut() {
            *v = v.powi(n as i32);
        }
    });
    Ok(fbp(&sino, setup.image).scaled(c))
}

#[derive(Clone, Debug)]
pub struct Filtered {
    /// `K⁻¹ fbp(P̃)`.
    pub f_ct: ImageGrid,
    /// `K⁻¹ fbp(P̃_MA)`.
    pub f_ma: ImageGrid,
    /// `K⁻¹ fbp(𝓡Kf_E0)`.
    pub f_e0: ImageGrid,
}

/// Reconstruction of pre-filtered data `P̃ = 𝓡Kf_E0 + pma(αε·𝓡Kχ_D)`.
///
/// The slice route filters the analytic projections row by row (𝓡K = K_s𝓡); the raster
/// route filters rasterized images and projects them with `radon_raster`. Under
/// band-limited sampling the slice filter and the mismatch act on the fine rows.
pub fn filtered_reconstruct(
    phantom: &Phantom,
    setup: &Setup,
    mode: DataMode,
    f: &FilterSpec,
    route: FilterRoute,
) -> Result<Filtered> {
    let ae = phantom.energy.alpha_eps();
    let (rkf, p_ma) = match route {
        FilterRoute::Slice => {
            let atten = attenuation_bodies(phantom);
            let metal = metal_bodies(phantom);
            check_coverage(&atten, &setup.sino())?;
            let filtered_row = |bodies: &[(&dyn metalct::geometry::Body, f64)], phi: f64, s: &[f64], out: &mut [f64]| {
                let mut raw = vec![0.0; s.len()];
                chord_row(bodies, phi, s, &mut raw);
                let ds = if s.len() > 1 { s[1] - s[0] } else { setup.sino().ds() };
                slice_filter_row(&raw, ds, f, 1.0, out);
            };
            let rkf = sample_sinogram(&setup.projector, |phi, s, out| filtered_row(&atten, phi, s, out));
            let p_ma = sample_sinogram(&setup.projector, |phi, s, out| {
                filtered_row(&metal, phi, s, out);
                for v in out.iter_mut() {
                    *v = mismatch(*v, ae, mode);
                }
            });
            (rkf, p_ma)
        }
        FilterRoute::Raster => {
            let (fe0, chi) = rasterize(phantom, setup.image);
            let rkf = radon_raster(&apply_symbol_filter(&fe0, f)?, &setup.sino());
            let rkchi = radon_raster(&apply_symbol_filter(&chi, f)?, &setup.sino());
            (rkf, rkchi.map(|t| mismatch(t, ae, mode)))
        }
    };
    let f_e0 = inverse_symbol_filter(&fbp(&rkf, setup.image), f)?;
    let f_ma = inverse_symbol_filter(&fbp(&p_ma, setup.image), f)?;
    let f_ct = added_img(&f_e0, &f_ma);
    Ok(Filtered { f_ct, f_ma, f_e0 })
}
