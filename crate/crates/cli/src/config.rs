use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hofer_core::geometry::{
    parse_field_expression, AnnulusChart, Chart, PlanarChart, Point, SamplingOptions, ScalarField,
    SurfaceSpec, DEFAULT_COLLAR, DEFAULT_GRID,
};
use hofer_core::reeb::DEFAULT_SLABS;
use serde::Deserialize;

use crate::error::{config, CliError, Result};

/// Contents of a TOML config file. Every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Params,
    pub surface: Option<SurfaceConfig>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSource>,
    pub rho: Option<RhoConfig>,
    pub reeb: Option<ReebConfig>,
    pub simulate: Option<SimulateConfig>,
    pub construct: Option<ConstructConfig>,
    pub bounds: Option<BoundsConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub grid: Option<usize>,
    pub slabs: Option<usize>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default)]
    pub genus: u32,
    pub punctures: u32,
    #[serde(default = "one")]
    pub area: f64,
    #[serde(default)]
    pub positions: Vec<Point>,
}

fn one() -> f64 {
    1.0
}

/// A Hamiltonian: an expression in `θ, h, t` on the annulus, or a table
/// with an expression or a sample file and an optional planar box.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Expr(String),
    Table(FieldTable),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTable {
    pub expr: Option<String>,
    pub file: Option<PathBuf>,
    /// `[x0, x1, y0, y1]`; the field then lives on a planar chart and the
    /// expression variables `θ, h` read as `x, y`.
    pub planar: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    pub fields: Vec<String>,
    /// Values of `s2` for the sweep CSV, with `s1` fixed.
    #[serde(default)]
    pub sweep: Vec<f64>,
    pub vector: Option<RhoVectorConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoVectorConfig {
    pub field: String,
    pub center: Point,
    pub area: f64,
    pub punctures: Vec<Point>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReebConfig {
    pub field: String,
    /// Area of the disk glued below the annulus.
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub field: String,
    pub duration: f64,
    pub points: Vec<Point>,
    /// Invariant disk for the winding report, as `[x, y, radius]`.
    pub disk: Option<[f64; 3]>,
    #[serde(default)]
    pub punctures: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructKind {
    Swap,
    Loop,
    TwoPipe,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    pub kind: ConstructKind,
    /// Area of the transported disk.
    #[serde(default = "default_disk_area")]
    pub area: f64,
    /// Pipe width relative to the default (swap only).
    #[serde(default = "one")]
    pub width_factor: f64,
    /// Direction around the puncture (two-pipe only).
    #[serde(default = "plus_one")]
    pub sign: i64,
}

fn default_disk_area() -> f64 {
    0.2
}

fn plus_one() -> i64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub classes: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Criteria to run (1 to 11); all when empty.
    #[serde(default)]
    pub criteria: Vec<u8>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub a: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub grid: Option<usize>,
    pub slabs: Option<usize>,
    pub step: Option<f64>,
}

/// Validated parameters shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub out: PathBuf,
    pub seed: u64,
    pub a: f64,
    s1: Option<f64>,
    s2: Option<f64>,
    pub grid: usize,
    pub slabs: usize,
    pub step: f64,
}

pub const DEFAULT_A: f64 = 0.75;

impl Settings {
    /// `(s1, s2)` with defaults `0` and `2A - 1`, checked against
    /// `0 <= s1 < s2 <= 2A - 1`.
    pub fn levels(&self) -> Result<(f64, f64)> {
        let s1 = self.s1.unwrap_or(0.0);
        let s2 = self.s2.unwrap_or(2.0 * self.a - 1.0);
        if !(self.a > 0.5 && self.a < 1.0) {
            return Err(config(format!("A = {} must lie in (0.5, 1)", self.a)));
        }
        if !(s1 >= 0.0 && s1 < s2 && s2 <= 2.0 * self.a - 1.0 + 1e-12) {
            return Err(config(format!(
                "need 0 <= s1 < s2 <= 2A - 1, got s1 = {s1}, s2 = {s2}"
            )));
        }
        Ok((s1, s2))
    }

    /// The levels if either was given explicitly.
    pub fn explicit_levels(&self) -> Result<Option<(f64, f64)>> {
        if self.s1.is_none() && self.s2.is_none() {
            Ok(None)
        } else {
            self.levels().map(Some)
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for src in cfg.fields.values_mut() {
            if let FieldSource::Table(FieldTable {
                file: Some(file), ..
            }) = src
            {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    /// Merges `o` over the file values, fills defaults and checks ranges.
    pub fn settings(&self, o: &Overrides) -> Result<Settings> {
        let p = &self.params;
        let a = o.a.or(p.a).unwrap_or(DEFAULT_A);
        let grid = o.grid.or(p.grid).unwrap_or(DEFAULT_GRID);
        let slabs = o.slabs.or(p.slabs).unwrap_or(DEFAULT_SLABS);
        let step = o.step.or(p.step).unwrap_or(1e-3);
        let area = self.surface.as_ref().map_or(1.0, |s| s.area);
        if !(a > 0.0 && a < area) {
            return Err(config(format!("A = {a} must lie in (0, {area})")));
        }
        if !(8..=8192).contains(&grid) {
            return Err(config(format!("grid = {grid} must lie in [8, 8192]")));
        }
        if slabs < 2 {
            return Err(config(format!("slabs = {slabs} must be at least 2")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(config(format!("step = {step} must be positive")));
        }
        for (name, src) in &self.fields {
            if let FieldSource::Table(t) = src {
                if t.expr.is_some() == t.file.is_some() {
                    return Err(config(format!(
                        "field `{name}` needs exactly one of `expr` and `file`"
                    )));
                }
                if let Some(f) = &t.file {
                    if !f.is_file() {
                        return Err(config(format!("field file {} does not exist", f.display())));
                    }
                }
                if let Some(b) = t.planar {
                    if !(b[1] > b[0] && b[3] > b[2]) {
                        return Err(config(format!("field `{name}`: planar box {b:?} is empty")));
                    }
                }
            }
        }
        let settings = Settings {
            out: o
                .out
                .clone()
                .or_else(|| self.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: o.seed.or(self.seed).unwrap_or(0),
            a,
            s1: o.s1.or(p.s1),
            s2: o.s2.or(p.s2),
            grid,
            slabs,
            step,
        };
        settings.explicit_levels()?;
        Ok(settings)
    }

    pub fn surface(&self) -> Result<SurfaceSpec> {
        let s = self
            .surface
            .as_ref()
            .ok_or_else(|| config("missing [surface] section"))?;
        SurfaceSpec::new(s.genus, s.punctures, s.area, s.positions.clone())
            .map_err(|e| config(e.to_string()))
    }

    /// Samples the named field at resolution `grid`; sample files keep
    /// their own.
    pub fn field(&self, name: &str, grid: usize) -> Result<ScalarField> {
        let src = self
            .fields
            .get(name)
            .ok_or_else(|| config(format!("no field named `{name}` in [fields]")))?;
        let (expr, file, planar) = match src {
            FieldSource::Expr(e) => (Some(e.as_str()), None, None),
            FieldSource::Table(t) => (t.expr.as_deref(), t.file.as_deref(), t.planar),
        };
        let chart = match planar {
            Some([x0, x1, y0, y1]) => {
                Chart::Planar(PlanarChart::covering(x0, x1, y0, y1, grid, DEFAULT_COLLAR))
            }
            None => Chart::Annulus(AnnulusChart::with_resolution(grid)),
        };
        match (expr, file) {
            (Some(e), _) => {
                parse_field_expression(e, &chart, SamplingOptions::default()).map_err(|err| {
                    match err {
                        hofer_core::Error::Syntax { .. }
                        | hofer_core::Error::UnknownIdentifier { .. } => {
                            config(format!("field `{name}`: {err}"))
                        }
                        other => other.into(),
                    }
                })
            }
            (None, Some(f)) => read_samples(f, planar),
            (None, None) => Err(config(format!("field `{name}` has no source"))),
        }
    }
}

/// Reads whitespace-separated samples, one grid row per line, bottom row
/// first. The file sets the resolution: `n` columns and `n + 1` rows on the
/// annulus, one column per node on a planar box.
fn read_samples(path: &Path, planar: Option<[f64; 4]>) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    let mut columns = None;
    let mut rows = 0;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = samples.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                config(format!(
                    "{}:{}: `{tok}` is not a number",
                    path.display(),
                    k + 1
                ))
            })?;
            samples.push(v);
        }
        let found = samples.len() - before;
        if *columns.get_or_insert(found) != found {
            return Err(config(format!(
                "{}:{}: expected {} values, found {found}",
                path.display(),
                k + 1,
                columns.unwrap_or(0)
            )));
        }
        rows += 1;
    }
    let columns = columns.unwrap_or(0);
    let grid = match planar {
        None => {
            if columns < 2 || rows != columns + 1 {
                return Err(config(format!(
                    "{}: an annulus file needs n columns and n + 1 rows, found {columns} x {rows}",
                    path.display()
                )));
            }
            AnnulusChart::with_resolution(columns).grid()
        }
        Some([x0, x1, y0, y1]) => {
            if columns < 3 || rows < 3 {
                return Err(config(format!(
                    "{}: a planar file needs at least 3 x 3 values",
                    path.display()
                )));
            }
            PlanarChart {
                x0,
                y0,
                width: x1 - x0,
                height: y1 - y0,
                nx: columns - 1,
                ny: rows - 1,
                collar: 0.0,
            }
            .grid()
        }
    };
    Ok(ScalarField::autonomous(grid, samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let s = RunConfig::default().settings(&Overrides::default()).unwrap();
        assert_eq!((s.a, s.grid, s.slabs, s.step, s.seed), (0.75, 512, 256, 1e-3, 0));
        assert_eq!(s.levels().unwrap(), (0.0, 0.5));
        assert_eq!(s.out, PathBuf::from("out"));
    }

    #[test]
    fn flags_win_over_the_file() {
        let cfg = parse("out = \"a\"\n[params]\nA = 0.6\ns2 = 0.1\ngrid = 64\n");
        let o = Overrides {
            a: Some(0.9),
            out: Some(PathBuf::from("b")),
            ..Overrides::default()
        };
        let s = cfg.settings(&o).unwrap();
        assert_eq!((s.a, s.grid), (0.9, 64));
        assert_eq!(s.levels().unwrap(), (0.0, 0.1));
        assert_eq!(s.out, PathBuf::from("b"));
    }

    #[test]
    fn ranges_are_checked_before_running() {
        for text in [
            "[params]\nA = 0\n",
            "[params]\nslabs = 1\n",
            "[params]\nstep = -1\n",
            "[params]\ns1 = 0.3\ns2 = 0.2\n",
            "[fields]\nf = { expr = \"h\", file = \"x\" }\n",
            "[fields]\nf = { expr = \"h\", planar = [1, 0, 0, 1] }\n",
        ] {
            let r = parse(text).settings(&Overrides::default());
            assert!(matches!(r, Err(CliError::Config(_))), "{text}");
        }
        assert!(toml::from_str::<RunConfig>("[rho]\nfield = []\n").is_err());
    }

    #[test]
    fn planar_fields_read_x_and_y() {
        let cfg = parse("[fields]\nf = { expr = \"θ*h\", planar = [-1, 1, -1, 1] }\n");
        let h = cfg.field("f", 64).unwrap();
        assert!(!h.grid().periodic_x);
        assert!((h.value([0.5, 0.5], 0.0).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(cfg.field("g", 64), Err(CliError::Config(_))));
    }
}
