//! Run configuration: a TOML file whose first key is the format line
//! `format = "metalct-config 1"`. Unknown keys are rejected with their position.
//!
//! Angles in the file are in degrees; everything else is in the phantom's length unit.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use metalct::beamhardening::{DataMode, EnergyModel};
use metalct::geometry::{shepp_logan, Ellipse, Metal, MetalRegion, Phantom, Piece, WeightedEllipse};
use metalct::specfilter::FilterSpec;
use metalct::xray::Sampling;
use serde::Deserialize;
use toml::Spanned;

pub const FORMAT_LINE: &str = "metalct-config 1";

/// A configuration problem, with a 1-based position when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: PathBuf,
    pub pos: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some((l, c)) => write!(f, "{}:{l}:{c}: {}", self.file.display(), self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Experiment selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Select {
    Fct,
    Fma,
    Fma1,
    Term(u32),
    Filtered,
    Predict,
    Scan,
}

impl FromStr for Select {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "fct" => Select::Fct,
            "fma" => Select::Fma,
            "fma1" => Select::Fma1,
            "filtered" => Select::Filtered,
            "predict" => Select::Predict,
            "scan" => Select::Scan,
            _ => match s.strip_prefix("term:").map(str::parse::<u32>) {
                Some(Ok(n)) if n >= 1 => Select::Term(n),
                _ => {
                    return Err(format!(
                        "unknown selector `{s}` (expected fct, fma, fma1, term:N, filtered, predict or scan)"
                    ))
                }
            },
        })
    }
}

impl fmt::Display for Select {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Select::Fct => f.write_str("fct"),
            Select::Fma => f.write_str("fma"),
            Select::Fma1 => f.write_str("fma1"),
            Select::Term(n) => write!(f, "term:{n}"),
            Select::Filtered => f.write_str("filtered"),
            Select::Predict => f.write_str("predict"),
            Select::Scan => f.write_str("scan"),
        }
    }
}

impl<'de> Deserialize<'de> for Select {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `exact` or `series:N`.
pub fn parse_mode(s: &str) -> Result<DataMode, String> {
    match s {
        "exact" => Ok(DataMode::Exact),
        _ => match s.strip_prefix("series:").map(str::parse::<usize>) {
            Some(Ok(n)) if n >= 1 => Ok(DataMode::Series(n)),
            _ => Err(format!("unknown mode `{s}` (expected exact or series:N with N >= 1)")),
        },
    }
}

pub fn mode_name(m: DataMode) -> String {
    match m {
        DataMode::Exact => "exact".into(),
        DataMode::Series(n) => format!("series:{n}"),
    }
}

fn de_mode<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<DataMode>, D::Error> {
    let s = Option::<String>::deserialize(d)?;
    s.map(|s| parse_mode(&s).map_err(serde::de::Error::custom)).transpose()
}

/// How the filtered data are projected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRoute {
    /// K applied as its one-dimensional slice multiplier to the analytic projections.
    Slice,
    /// K applied to rasterized images, then `radon_raster`.
    Raster,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingName {
    Point,
    BandLimited,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: Spanned<String>,
    phantom: Option<Spanned<String>>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    energy: RawEnergy,
    filter: Option<RawFilter>,
    #[serde(default)]
    streaks: RawStreaks,
    #[serde(default)]
    run: RawRun,
    background: Option<RawBackground>,
    #[serde(default)]
    metal: Vec<Spanned<RawMetal>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    extent: Option<f64>,
    angles: Option<usize>,
    offsets: Option<usize>,
    sampling: Option<SamplingName>,
    oversample: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnergy {
    alpha: Option<f64>,
    eps: Option<f64>,
    e0: Option<f64>,
    #[serde(default, deserialize_with = "de_mode")]
    mode: Option<DataMode>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    alpha: Option<f64>,
    k: Option<f64>,
    route: Option<FilterRoute>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStreaks {
    tube: Option<f64>,
    annulus_inner: Option<f64>,
    annulus_outer: Option<f64>,
    min_pixels: Option<usize>,
    exclusion: Option<usize>,
    noise_lines: Option<usize>,
    floor_factor: Option<f64>,
    nms_radius: Option<usize>,
    max_hits: Option<usize>,
    scan_source: Option<Select>,
    scan_angles: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    select: Option<Select>,
    seed: Option<u64>,
    out: Option<String>,
    coefficient: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackground {
    shepp_logan: Option<f64>,
    #[serde(default)]
    ellipses: Vec<[f64; 6]>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
enum RawMetal {
    Circle { value: f64, center: [f64; 2], radius: f64 },
    Ellipse { value: f64, center: [f64; 2], axes: [f64; 2], #[serde(default)] rotation: f64 },
    Polygon { value: f64, vertices: Vec<[f64; 2]> },
    HalfDisk { value: f64, center: [f64; 2], radius: f64, #[serde(default)] start: f64 },
    Piecewise { value: f64, pieces: Vec<RawPiece> },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawPiece {
    Arc { center: [f64; 2], axes: [f64; 2], #[serde(default)] rotation: f64, from: f64, to: f64 },
    Segment { from: [f64; 2], to: [f64; 2] },
}

/// Phantom-only file referenced by `phantom = "path"`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhantomFile {
    format: Spanned<String>,
    background: Option<RawBackground>,
    #[serde(default)]
    metal: Vec<Spanned<RawMetal>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub extent: f64,
    pub angles: usize,
    /// `None` picks the default offset count for `n`.
    pub offsets: Option<usize>,
    pub sampling: Sampling,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    pub spec: FilterSpec,
    pub route: FilterRoute,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreakConfig {
    pub tube: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    pub min_pixels: usize,
    pub exclusion: usize,
    pub noise_lines: usize,
    /// Multiple of the noise floor above which scan hits are kept.
    pub floor_factor: f64,
    pub nms_radius: usize,
    pub max_hits: usize,
    /// Image scanned by the `scan` selector.
    pub scan_source: Select,
    /// Angles of the scan grid (offsets follow the sinogram).
    pub scan_angles: usize,
}

impl Default for StreakConfig {
    fn default() -> Self {
        StreakConfig {
            tube: 2.0,
            annulus_inner: 6.0,
            annulus_outer: 10.0,
            min_pixels: 16,
            exclusion: 5,
            noise_lines: 100,
            floor_factor: 3.0,
            nms_radius: 8,
            max_hits: 64,
            scan_source: Select::Fma,
            scan_angles: 720,
        }
    }
}

/// Everything a run needs, after file parsing and command-line overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: PathBuf,
    pub phantom: Phantom,
    pub grid: GridConfig,
    pub mode: DataMode,
    pub filter: Option<FilterConfig>,
    pub streaks: StreakConfig,
    pub select: Select,
    pub seed: u64,
    pub out: PathBuf,
    /// Coefficient for `term:N`; `None` uses the default.
    pub coefficient: Option<f64>,
}

/// Command-line values that replace file values when present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub select: Option<Select>,
    pub filter_k: Option<f64>,
    pub filter_alpha: Option<f64>,
    pub grid: Option<usize>,
    pub angles: Option<usize>,
    pub offsets: Option<usize>,
    pub mode: Option<DataMode>,
    pub seed: Option<u64>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn located(file: &Path, text: &str, offset: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { file: file.to_path_buf(), pos: offset.map(|o| line_col(text, o)), message: message.into() }
}

fn parse_toml<T: serde::de::DeserializeOwned>(file: &Path, text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| located(file, text, e.span().map(|s| s.start), e.message().trim_end()))
}

fn check_format(file: &Path, text: &str, format: &Spanned<String>) -> Result<(), ConfigError> {
    if format.get_ref() != FORMAT_LINE {
        return Err(located(
            file,
            text,
            Some(format.span().start),
            format!("unsupported format `{}`, expected `{FORMAT_LINE}`", format.get_ref()),
        ));
    }
    Ok(())
}

fn read(file: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(file).map_err(|e| ConfigError {
        file: file.to_path_buf(),
        pos: None,
        message: format!("cannot read: {e}"),
    })
}

fn metal_of(raw: &RawMetal) -> metalct::Result<Metal> {
    let (region, value) = match raw {
        RawMetal::Circle { value, center, radius } => (MetalRegion::circle(*center, *radius)?, *value),
        RawMetal::Ellipse { value, center, axes, rotation } => {
            (MetalRegion::ellipse(*center, axes[0], axes[1], rotation.to_radians())?, *value)
        }
        RawMetal::Polygon { value, vertices } => (MetalRegion::polygon(vertices.clone())?, *value),
        RawMetal::HalfDisk { value, center, radius, start } => {
            (MetalRegion::half_disk(*center, *radius, start.to_radians())?, *value)
        }
        RawMetal::Piecewise { value, pieces } => {
            let pieces = pieces
                .iter()
                .map(|p| {
                    Ok(match *p {
                        RawPiece::Arc { center, axes, rotation, from, to } => Piece::Arc {
                            ellipse: Ellipse::new(center, axes[0], axes[1], rotation.to_radians())?,
                            t0: from.to_radians(),
                            t1: to.to_radians(),
                        },
                        RawPiece::Segment { from, to } => Piece::Segment { p0: from, p1: to },
                    })
                })
                .collect::<metalct::Result<Vec<_>>>()?;
            (MetalRegion::piecewise(pieces)?, *value)
        }
    };
    Ok(Metal { region, value })
}

fn build_phantom(
    file: &Path,
    text: &str,
    background: Option<RawBackground>,
    metals: Vec<Spanned<RawMetal>>,
    energy: EnergyModel,
) -> Result<Phantom, ConfigError> {
    let mut bg = Vec::new();
    if let Some(b) = background {
        if let Some(scale) = b.shepp_logan {
            if !(scale > 0.0) {
                return Err(located(file, text, None, format!("shepp_logan scale must be positive, got {scale}")));
            }
            bg.extend(shepp_logan(scale));
        }
        for (i, t) in b.ellipses.iter().enumerate() {
            bg.push(
                WeightedEllipse::from_tuple(*t)
                    .map_err(|e| located(file, text, None, format!("background ellipse {i}: {e}")))?,
            );
        }
    }
    let mut ms = Vec::new();
    for (i, m) in metals.iter().enumerate() {
        ms.push(
            metal_of(m.get_ref())
                .map_err(|e| located(file, text, Some(m.span().start), format!("metal {i}: {e}")))?,
        );
    }
    Phantom::new(bg, ms, energy).map_err(|e| located(file, text, None, e.to_string()))
}

fn positive(file: &Path, what: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError { file: file.to_path_buf(), pos: None, message: format!("{what} must be positive, got {v}") })
    }
}

impl RunConfig {
    /// Parses `path` and applies `ov`. Relative paths in the file resolve against its directory.
    pub fn load(path: &Path, ov: &Overrides) -> Result<RunConfig, ConfigError> {
        let text = read(path)?;
        let raw: RawFile = parse_toml(path, &text)?;
        check_format(path, &text, &raw.format)?;
        let base = path.parent().unwrap_or(Path::new("."));

        let e = &raw.energy;
        let mode = ov.mode.or(e.mode).unwrap_or(DataMode::Exact);
        let n_terms = match mode {
            DataMode::Series(n) => n,
            DataMode::Exact => 4,
        };
        let energy = EnergyModel::new(e.alpha.unwrap_or(1.0), e.eps.unwrap_or(0.5), e.e0.unwrap_or(0.0), n_terms)
            .map_err(|err| located(path, &text, None, err.to_string()))?;

        let phantom = match &raw.phantom {
            Some(p) => {
                if raw.background.is_some() || !raw.metal.is_empty() {
                    return Err(located(
                        path,
                        &text,
                        Some(p.span().start),
                        "`phantom` file given together with inline [background] or [[metal]]",
                    ));
                }
                let pf = base.join(p.get_ref());
                if !pf.is_file() {
                    return Err(located(
                        path,
                        &text,
                        Some(p.span().start),
                        format!("phantom file `{}` does not exist", pf.display()),
                    ));
                }
                let ptext = read(&pf)?;
                let rp: RawPhantomFile = parse_toml(&pf, &ptext)?;
                check_format(&pf, &ptext, &rp.format)?;
                build_phantom(&pf, &ptext, rp.background, rp.metal, energy)?
            }
            None => build_phantom(path, &text, raw.background, raw.metal, energy)?,
        };

        let g = &raw.grid;
        let n = ov.grid.or(g.n).unwrap_or(512);
        let angles = ov.angles.or(g.angles).unwrap_or(720);
        if n < 8 || angles < 2 {
            return Err(located(path, &text, None, format!("grid n={n} angles={angles} too small")));
        }
        let offsets = ov.offsets.or(g.offsets);
        if let Some(o) = offsets {
            if o < 8 {
                return Err(located(path, &text, None, format!("offsets={o} too small")));
            }
        }
        let sampling = match g.sampling.unwrap_or(SamplingName::Point) {
            SamplingName::Point => Sampling::Point,
            SamplingName::BandLimited => Sampling::BandLimited { oversample: g.oversample.unwrap_or(8).max(2) },
        };
        let grid = GridConfig { n, extent: positive(path, "grid extent", g.extent.unwrap_or(1.0))?, angles, offsets, sampling };

        let filter = match (&raw.filter, ov.filter_k, ov.filter_alpha) {
            (None, None, None) => None,
            (f, k, a) => {
                let f = f.as_ref();
                let alpha = a.or(f.and_then(|f| f.alpha)).unwrap_or(1.3);
                let k = k.or(f.and_then(|f| f.k)).unwrap_or(-0.01);
                let spec = FilterSpec::new(alpha, k).map_err(|err| located(path, &text, None, err.to_string()))?;
                Some(FilterConfig { spec, route: f.and_then(|f| f.route).unwrap_or(FilterRoute::Slice) })
            }
        };

        let s = &raw.streaks;
        let d = StreakConfig::default();
        let streaks = StreakConfig {
            tube: s.tube.unwrap_or(d.tube),
            annulus_inner: s.annulus_inner.unwrap_or(d.annulus_inner),
            annulus_outer: s.annulus_outer.unwrap_or(d.annulus_outer),
            min_pixels: s.min_pixels.unwrap_or(d.min_pixels),
            exclusion: s.exclusion.unwrap_or(d.exclusion),
            noise_lines: s.noise_lines.unwrap_or(d.noise_lines),
            floor_factor: s.floor_factor.unwrap_or(d.floor_factor),
            nms_radius: s.nms_radius.unwrap_or(d.nms_radius),
            max_hits: s.max_hits.unwrap_or(d.max_hits),
            scan_source: s.scan_source.unwrap_or(d.scan_source),
            scan_angles: s.scan_angles.unwrap_or(d.scan_angles),
        };
        if !(streaks.tube > 0.0 && streaks.annulus_inner > streaks.tube && streaks.annulus_outer > streaks.annulus_inner) {
            return Err(located(path, &text, None, "need 0 < tube < annulus_inner < annulus_outer"));
        }
        if streaks.scan_angles < 2 {
            return Err(located(path, &text, None, "scan_angles must be at least 2"));
        }
        if matches!(streaks.scan_source, Select::Predict | Select::Scan | Select::Fct) {
            return Err(located(path, &text, None, format!("scan_source `{}` is not an image", streaks.scan_source)));
        }

        let select = ov.select.or(raw.run.select).unwrap_or(Select::Predict);
        if (select == Select::Filtered || (select == Select::Scan && streaks.scan_source == Select::Filtered))
            && filter.is_none()
        {
            return Err(located(path, &text, None, "selector `filtered` needs a [filter] section or --filter-k"));
        }
        let out = match (&ov.out, &raw.run.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => base.join(o),
            (None, None) => PathBuf::from("out"),
        };
        Ok(RunConfig {
            source: path.to_path_buf(),
            phantom,
            grid,
            mode,
            filter,
            streaks,
            select,
            seed: ov.seed.or(raw.run.seed).unwrap_or(1),
            out,
            coefficient: raw.run.coefficient,
        })
    }
}
