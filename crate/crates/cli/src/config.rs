//! Typed view of a run document.
//!
//! Every section a command understands is read up front, so a misspelled key
//! fails before any work starts, whichever command is being run.

use std::path::PathBuf;
use std::str::FromStr;

use nonbloch::config::{take_model_spec, ConfigDoc, ModelSpec};
use nonbloch::dynamics::Sublattice;
use nonbloch::{collapse_energy, Error, GbzOptions, GridSpec, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bands,
    Gbz,
    Obc,
    Ws,
    Evolve,
    Sweep,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bands" => Ok(Command::Bands),
            "gbz" => Ok(Command::Gbz),
            "obc" => Ok(Command::Obc),
            "ws" => Ok(Command::Ws),
            "evolve" => Ok(Command::Evolve),
            "sweep" => Ok(Command::Sweep),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

/// Forces given either directly or as multiples of the collapse energy.
#[derive(Debug, Clone, PartialEq)]
pub enum Forces {
    Absolute(Vec<f64>),
    OverE0(Vec<f64>),
}

impl Forces {
    /// Absolute forces, resolved against `E_0` of the model.
    pub fn resolve(&self, e0: f64) -> Result<Vec<f64>> {
        match self {
            Forces::Absolute(f) => Ok(f.clone()),
            Forces::OverE0(r) => {
                if e0.is_nan() || e0 <= 0.0 {
                    return Err(Error::BadSize(format!(
                        "forces are given as multiples of E0, but E0 = {e0} is not positive"
                    )));
                }
                Ok(r.iter().map(|x| x * e0).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandsConfig {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObcConfig {
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsConfig {
    pub forces: Option<Forces>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub forces: Option<Forces>,
    pub cells: usize,
    pub width: f64,
    pub k0: f64,
    pub sublattice: Sublattice,
    /// One horizon for every force, or one per force, in Bloch periods.
    pub periods: Vec<f64>,
    pub samples_per_period: usize,
    pub dt: Option<f64>,
    pub snapshot_stride: usize,
    pub edge_check: bool,
    pub error_estimate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Force in units of `E_0`.
    FOverE0,
    /// Non-reciprocity `δ` of the example model, at fixed `F/E_0`.
    Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Fixed `F/E_0` for a `delta` sweep.
    pub f_over_e0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub out_dir: Option<PathBuf>,
    /// Commands listed by a preset.
    pub run: Vec<Command>,
    pub bands: BandsConfig,
    pub gbz: GbzOptions,
    pub obc: ObcConfig,
    pub ws: WsConfig,
    pub evolve: EvolveConfig,
    pub sweep: Option<SweepConfig>,
}

fn line_of(doc: &ConfigDoc, key: &str) -> usize {
    let mut probe = doc.clone();
    probe.take(key).map(|e| e.line).unwrap_or(0)
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// `min`, `max`, `count` → `count` evenly spaced values, endpoints included.
fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// A value list from `<prefix>values` or from `<prefix>min/max/count`.
fn take_axis(doc: &mut ConfigDoc, section: &str, stem: &str) -> Result<Option<Vec<f64>>> {
    let list_key = format!("{section}.{stem}");
    let min_key = format!("{section}.{stem}_min");
    let max_key = format!("{section}.{stem}_max");
    let count_key = format!("{section}.{stem}_count");
    let list_line = line_of(doc, &list_key);
    let list = doc.take_f64_list(&list_key)?;
    let min = doc.take_f64(&min_key)?;
    let max = doc.take_f64(&max_key)?;
    let count = doc.take_usize(&count_key)?;
    match (list, min, max, count) {
        (Some(v), None, None, None) => Ok(Some(v)),
        (None, None, None, None) => Ok(None),
        (None, Some(a), Some(b), Some(n)) => {
            if n == 0 {
                return Err(Error::BadSize(format!("{count_key} must be positive")));
            }
            Ok(Some(linspace(a, b, n)))
        }
        (Some(_), _, _, _) => Err(bad(
            list_line,
            format!("give either {list_key} or {stem}_min/_max/_count, not both"),
        )),
        _ => Err(Error::MissingKey(format!(
            "{min_key}, {max_key} and {count_key} together"
        ))),
    }
}

fn take_forces(doc: &mut ConfigDoc, section: &str) -> Result<Option<Forces>> {
    let relative = take_axis(doc, section, "f_over_e0")?;
    let line = line_of(doc, &format!("{section}.force"));
    let absolute = take_axis(doc, section, "force")?;
    match (relative, absolute) {
        (Some(_), Some(_)) => Err(bad(
            line,
            format!("give {section}.f_over_e0 or {section}.force, not both"),
        )),
        (Some(r), None) => Ok(Some(Forces::OverE0(r))),
        (None, Some(a)) => Ok(Some(Forces::Absolute(a))),
        (None, None) => Ok(None),
    }
}

fn take_gbz(doc: &mut ConfigDoc) -> Result<GbzOptions> {
    let mut opts = GbzOptions::default();
    let center = doc.take_complex("gbz.center")?;
    let half_width = doc.take_f64("gbz.half_width")?;
    let half_height = doc.take_f64("gbz.half_height")?;
    let cols = doc.take_usize("gbz.cols")?;
    let rows = doc.take_usize("gbz.rows")?;
    if center.is_some() || half_width.is_some() || half_height.is_some() || cols.is_some() || rows.is_some() {
        let half_width = half_width.ok_or_else(|| Error::MissingKey("gbz.half_width".into()))?;
        opts.grid = Some(GridSpec {
            center: center.unwrap_or(C64::new(0.0, 0.0)),
            half_width,
            half_height: half_height.unwrap_or(half_width),
            cols: cols.unwrap_or(400),
            rows: rows.unwrap_or(400),
        });
    }
    if let Some(v) = doc.take_f64("gbz.coarse_tol")? {
        opts.coarse_tol = v;
    }
    if let Some(v) = doc.take_f64("gbz.residual_tol")? {
        opts.residual_tol = v;
    }
    if let Some(v) = doc.take_f64("gbz.collapse_tol")? {
        opts.collapse_tol = v;
    }
    if let Some(v) = doc.take_usize("gbz.zoom_depth")? {
        opts.zoom_depth = v;
    }
    Ok(opts)
}

fn take_evolve(doc: &mut ConfigDoc) -> Result<EvolveConfig> {
    let forces = take_forces(doc, "evolve")?;
    let line = line_of(doc, "evolve.sublattice");
    let sublattice = match doc.take_string("evolve.sublattice").as_deref() {
        None | Some("B") | Some("b") => Sublattice::B,
        Some("A") | Some("a") => Sublattice::A,
        Some(other) => return Err(bad(line, format!("sublattice must be A or B, got `{other}`"))),
    };
    Ok(EvolveConfig {
        forces,
        cells: doc.take_usize("evolve.cells")?.unwrap_or(120),
        width: doc.take_f64("evolve.width")?.unwrap_or(4.0),
        k0: doc.take_f64("evolve.k0")?.unwrap_or(0.0),
        sublattice,
        periods: doc.take_f64_list("evolve.periods")?.unwrap_or_else(|| vec![4.0]),
        samples_per_period: doc.take_usize("evolve.samples_per_period")?.unwrap_or(32),
        dt: doc.take_f64("evolve.dt")?,
        snapshot_stride: doc.take_usize("evolve.snapshot_stride")?.unwrap_or(0),
        edge_check: doc.take_bool("evolve.edge_check")?.unwrap_or(true),
        error_estimate: doc.take_bool("evolve.error_estimate")?.unwrap_or(false),
    })
}

fn take_sweep(doc: &mut ConfigDoc) -> Result<Option<SweepConfig>> {
    if !doc.has_section("sweep") {
        return Ok(None);
    }
    let line = line_of(doc, "sweep.axis");
    let axis = match doc.take_string("sweep.axis").as_deref() {
        Some("f_over_e0") => SweepAxis::FOverE0,
        Some("delta") => SweepAxis::Delta,
        Some(other) => {
            return Err(bad(
                line,
                format!("sweep.axis must be f_over_e0 or delta, got `{other}`"),
            ))
        }
        None => return Err(Error::MissingKey("sweep.axis".into())),
    };
    let values = take_axis(doc, "sweep", "values")?
        .ok_or_else(|| Error::MissingKey("sweep.values (or sweep.values_min/_max/_count)".into()))?;
    let f_over_e0 = doc.take_f64("sweep.f_over_e0")?;
    if axis == SweepAxis::Delta && f_over_e0.is_none() {
        return Err(Error::MissingKey("sweep.f_over_e0".into()));
    }
    Ok(Some(SweepConfig {
        axis,
        values,
        f_over_e0,
    }))
}

impl RunConfig {
    /// Read every known section and reject whatever is left.
    pub fn from_doc(mut doc: ConfigDoc) -> Result<Self> {
        let model = take_model_spec(&mut doc)?;
        let out_dir = doc.take_string("output.dir").map(PathBuf::from);
        let line = line_of(&doc, "preset.run");
        let run = match doc.take_string("preset.run") {
            Some(list) => list
                .split_whitespace()
                .map(|c| c.parse::<Command>().map_err(|m| bad(line, m)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let cfg = RunConfig {
            model,
            out_dir,
            run,
            bands: BandsConfig {
                samples: doc.take_usize("bands.samples")?.unwrap_or(512),
            },
            gbz: take_gbz(&mut doc)?,
            obc: ObcConfig {
                cells: doc.take_usize("obc.cells")?.unwrap_or(40),
            },
            ws: WsConfig {
                forces: take_forces(&mut doc, "ws")?,
                steps: doc.take_usize("ws.steps")?,
            },
            evolve: take_evolve(&mut doc)?,
            sweep: take_sweep(&mut doc)?,
        };
        doc.finish()?;
        Ok(cfg)
    }

    /// Real part of the model's collapse energy.
    pub fn e0(&self) -> f64 {
        collapse_energy(&self.model.build()).re
    }
}
