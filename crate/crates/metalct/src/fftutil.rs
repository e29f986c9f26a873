use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Angular frequency of DFT bin `k` for `n` samples spaced `d` apart (2π·fftfreq).
pub(crate) fn angular_freq(k: usize, n: usize, d: f64) -> f64 {
    let m = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
    // the Nyquist bin of an even length maps to −n/2, whose modulus is what matters here
    2.0 * PI * m / (n as f64 * d)
}

/// Padding length used for row filters: twice the next power of two.
pub(crate) fn padded_len(n: usize) -> usize {
    2 * n.next_power_of_two()
}

/// Zero-pads `row` to `npad`, multiplies its spectrum by `gain(|w|)`, and writes the
/// first `out.len()` samples of the real part to `out`.
pub(crate) fn filter_row(row: &[f64], npad: usize, d: f64, gain: impl Fn(f64) -> f64, out: &mut [f64]) {
    let mut buf: Vec<Complex64> = Vec::with_capacity(npad);
    buf.extend(row.iter().map(|&v| Complex64::new(v, 0.0)));
    buf.resize(npad, Complex64::new(0.0, 0.0));
    forward(npad).process(&mut buf);
    let scale = 1.0 / npad as f64;
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= gain(angular_freq(k, npad, d).abs()) * scale;
    }
    inverse(npad).process(&mut buf);
    for (o, z) in out.iter_mut().zip(buf.iter()) {
        *o = z.re;
    }
}
