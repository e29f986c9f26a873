//! Streak lines: geometric prediction from the metal boundaries, sinogram singular curves,
//! and image diagnostics (tube amplitude, cross-profile decay order, exhaustive scan).

mod measure;
mod predict;
mod scan;

pub use measure::{
    choose_anchor, estimate_order, exclusion_mask, measure_report, measure_streak, measure_streak_signed,
    noise_floor, profile_order, tukey_window, OrderEstimate, OrderParams, TubeParams,
};
pub use predict::{
    bitangent_lines, corner_corner_lines, corner_tangent_lines, dedup_tolerance, predict_streaks,
    sinogram_curves, CornerTangentLines, CurveKind, SinogramCurve,
};
pub use scan::{brute_force_streak_scan, scan_amplitudes, ScanHit, ScanParams};
