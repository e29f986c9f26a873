//! Polychromatic data model for a flat energy window: the exact Beer's-law mismatch,
//! its truncated double series, and data synthesis.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::geometry::{Body, Phantom};
use crate::model::{invalid, Result, SinogramGrid};
use crate::xray::{check_coverage, chord_row, sample_sinogram, ProjectorSpec};

/// `f_E = f_E0 + α(E − E0)χ_D` on the window `[E0 − ε, E0 + ε]` with flat weight 1/2ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyModel {
    pub alpha: f64,
    pub eps: f64,
    pub e0: f64,
    /// Series truncation order N ≥ 1.
    pub n_terms: usize,
}

impl EnergyModel {
    pub fn new(alpha: f64, eps: f64, e0: f64, n_terms: usize) -> Result<Self> {
        if !(eps > 0.0) || !(alpha * eps > 0.0) || !alpha.is_finite() || !eps.is_finite() || !e0.is_finite() {
            return Err(invalid(format!("energy model alpha={alpha} eps={eps} e0={e0}")));
        }
        if n_terms == 0 {
            return Err(invalid("series order N must be at least 1"));
        }
        Ok(EnergyModel { alpha, eps, e0, n_terms })
    }

    pub fn alpha_eps(&self) -> f64 {
        self.alpha * self.eps
    }
}

impl Default for EnergyModel {
    /// αε = 0.5, N = 4.
    fn default() -> Self {
        EnergyModel { alpha: 1.0, eps: 0.5, e0: 0.0, n_terms: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataMode {
    Exact,
    Series(usize),
}

/// Threshold above which the overflow-safe branch is used.
pub const LARGE_T: f64 = 20.0;

fn inner_sum(t: f64, n: usize) -> f64 {
    let t2 = t * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..=n {
        term *= t2 / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

/// `−ln(sinh t / t)`, exact to rounding for all t ≥ 0.
pub fn pma_exact(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("pma_exact needs finite t >= 0, got {t}")));
    }
    Ok(if t < 0.5 {
        -inner_sum(t, 10).ln_1p()
    } else if t <= LARGE_T {
        -(t.sinh() / t).ln()
    } else {
        -t + (2.0 * t).ln() - (-(-2.0 * t).exp()).ln_1p()
    })
}

/// Truncated series value and whether the log series diverges at this sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub diverging: bool,
}

/// `Σ_{k=1}^N (−1)^k x^k / k` with `x = Σ_{n=1}^N t^{2n}/(2n+1)!`.
pub fn pma_series(t: f64, n: usize) -> Result<SeriesValue> {
    if !(t >= 0.0) || !t.is_finite() || n == 0 {
        return Err(invalid(format!("pma_series needs t >= 0 and N >= 1, got t={t} N={n}")));
    }
    let x = inner_sum(t, n);
    let mut pow = 1.0;
    let mut value = 0.0;
    for k in 1..=n {
        pow *= -x;
        value += pow / k as f64;
    }
    Ok(SeriesValue { value, diverging: x >= 1.0 })
}

/// Mismatch for either data mode.
pub fn pma(t: f64, mode: DataMode) -> Result<SeriesValue> {
    match mode {
        DataMode::Exact => Ok(SeriesValue { value: pma_exact(t)?, diverging: false }),
        DataMode::Series(n) => pma_series(t, n),
    }
}

/// Expansion of the truncated series in powers of `𝓡χ_D`: pairs `(power, coefficient)`
/// with even powers `2..=2N²`.
pub fn series_power_coefficients(alpha_eps: f64, n: usize) -> Vec<(u32, f64)> {
    let deg = n * n;
    // inner polynomial in y = t²
    let mut q = vec![0.0; deg + 1];
    let mut fact = 1.0;
    for k in 1..=n {
        fact *= (2 * k) as f64 * (2 * k + 1) as f64;
        q[k] = 1.0 / fact;
    }
    let mut total = vec![0.0; deg + 1];
    let mut pow = vec![0.0; deg + 1];
    pow[0] = 1.0;
    for k in 1..=n {
        let mut next = vec![0.0; deg + 1];
        for (i, &a) in pow.iter().enumerate().filter(|(_, a)| **a != 0.0) {
            for (j, &b) in q.iter().enumerate().skip(1) {
                if i + j <= deg {
                    next[i + j] += a * b;
                }
            }
        }
        pow = next;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        for m in 0..=deg {
            total[m] += sign * pow[m] / k as f64;
        }
    }
    (1..=deg)
        .filter(|&m| total[m] != 0.0)
        .map(|m| ((2 * m) as u32, total[m] * alpha_eps.powi(2 * m as i32)))
        .collect()
}

/// Synthesized data and its components.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    /// `P = 𝓡f_E0 + P_MA`.
    pub p: SinogramGrid,
    pub rf_e0: SinogramGrid,
    pub rchi: SinogramGrid,
    pub p_ma: SinogramGrid,
    /// Samples where the truncated log series diverges.
    pub flagged: usize,
}

/// Bodies and weights for `f_E0` (background plus metal values).
pub fn attenuation_bodies(phantom: &Phantom) -> Vec<(&dyn Body, f64)> {
    let mut v: Vec<(&dyn Body, f64)> =
        phantom.background.iter().map(|w| (&w.ellipse as &dyn Body, w.value)).collect();
    v.extend(phantom.metals.iter().map(|m| (&m.region as &dyn Body, m.value)));
    v
}

/// Indicator bodies of the metal regions.
pub fn metal_bodies(phantom: &Phantom) -> Vec<(&dyn Body, f64)> {
    phantom.metals.iter().map(|m| (&m.region as &dyn Body, 1.0)).collect()
}

/// `P = 𝓡f_E0 + pma(αε·𝓡χ_D)` sample by sample.
pub fn synthesize_data(phantom: &Phantom, proj: &ProjectorSpec, mode: DataMode) -> Result<SyntheticData> {
    let atten = attenuation_bodies(phantom);
    let metal = metal_bodies(phantom);
    check_coverage(&atten, &proj.sino)?;
    let ae = phantom.energy.alpha_eps();
    let rf_e0 = sample_sinogram(proj, |phi, s, out| chord_row(&atten, phi, s, out));
    let rchi = sample_sinogram(proj, |phi, s, out| chord_row(&metal, phi, s, out));
    let p_ma = sample_sinogram(proj, |phi, s, out| {
        chord_row(&metal, phi, s, out);
        for v in out.iter_mut() {
            *v = pma(ae * *v, mode).expect("chords are non-negative").value;
        }
    });
    let flagged = match mode {
        DataMode::Exact => 0,
        DataMode::Series(n) => rchi.values.iter().filter(|&&r| inner_sum(ae * r.max(0.0), n) >= 1.0).count(),
    };
    let p = SinogramGrid { spec: rf_e0.spec, values: &rf_e0.values + &p_ma.values };
    Ok(SyntheticData { p, rf_e0, rchi, p_ma, flagged })
}

/// Beer's law by Gauss-Legendre quadrature over the energy window:
/// `−ln ∫ η(E) exp(−𝓡f_E) dE` with `𝓡f_E = 𝓡f_E0 + α(E − E0)𝓡χ_D`.
pub fn beer_quadrature(
    rchi: &SinogramGrid,
    rf_e0: &SinogramGrid,
    energy: &EnergyModel,
    nodes: usize,
) -> Result<SinogramGrid> {
    if nodes < 2 {
        return Err(invalid("beer_quadrature needs at least 2 nodes"));
    }
    if rchi.spec != rf_e0.spec {
        return Err(invalid("sinogram grids differ"));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("nodes >= 2"));
    let values = ndarray::Zip::from(&rchi.values)
        .and(&rf_e0.values)
        .map_collect(|&r, &f| beer_sample(&rule, r, f, energy));
    Ok(SinogramGrid { spec: rchi.spec, values })
}

fn beer_sample(rule: &GaussLegendre, rchi: f64, rf_e0: f64, e: &EnergyModel) -> f64 {
    let eta = 1.0 / (2.0 * e.eps);
    // exp(−𝓡f_E0) is factored out of the integral
    let integral = rule.integrate(e.e0 - e.eps, e.e0 + e.eps, |en| eta * (-e.alpha * (en - e.e0) * rchi).exp());
    rf_e0 - integral.ln()
}

/// Single-sample form of [`beer_quadrature`].
pub fn beer_quadrature_sample(rchi: f64, rf_e0: f64, energy: &EnergyModel, nodes: usize) -> Result<f64> {
    if nodes < 2 {
        return Err(invalid("beer_quadrature needs at least 2 nodes"));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("nodes >= 2"));
    Ok(beer_sample(&rule, rchi, rf_e0, energy))
}
