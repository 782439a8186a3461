//! Run configuration: a TOML document with `potential`, `numerics`, `task`
//! and `output` tables.

use std::path::{Path, PathBuf};

use nhband_core::ep::EpConfig;
use nhband_core::spectra::{ModelConfig, PotentialSpec, Tolerances};
use nhband_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{format_complex, parse_complex};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field_err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// A complex number written as `"20+80i"`, `[re, im]` or a bare real.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawComplex {
    Text(String),
    Pair([f64; 2]),
    Real(f64),
}

impl RawComplex {
    fn resolve(&self, field: &str) -> Result<Complex64, ConfigError> {
        let z = match self {
            RawComplex::Text(s) => {
                parse_complex(s).ok_or_else(|| field_err(field, format!("cannot parse {s:?} as a complex number")))?
            }
            RawComplex::Pair([re, im]) => Complex64::new(*re, *im),
            RawComplex::Real(re) => Complex64::new(*re, 0.0),
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(field_err(field, "must be finite"));
        }
        Ok(z)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: RawPotential,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    task: RawTask,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    c_sin: Option<RawCSin>,
    b_cos_c_sin: Option<RawBCos>,
    b_exp: Option<RawBExp>,
    fourier: Option<Vec<RawFourier>>,
    vector_a: Option<RawComplex>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCSin {
    c: RawComplex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBCos {
    b: f64,
    c: RawComplex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBExp {
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFourier {
    l: i64,
    v: RawComplex,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    l_max: Option<usize>,
    n_k: Option<usize>,
    n_x: Option<usize>,
    n_bands: Option<usize>,
    m_max: Option<usize>,
    range: Option<usize>,
    #[serde(default)]
    tolerances: RawTolerances,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    defect: Option<f64>,
    tracking_tie: Option<f64>,
    degeneracy: Option<f64>,
    ep_energy: Option<f64>,
    golden_depth: Option<usize>,
    pt: Option<f64>,
    region: Option<f64>,
    relation: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    gauge: Option<String>,
    trials: Option<PathBuf>,
    cells: Option<[i64; 2]>,
    tb_ep_samples: Option<usize>,
    threshold: Option<RawThreshold>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThreshold {
    values: Vec<f64>,
    width: Option<f64>,
    parameter: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    task: String,
    parameter: String,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    format: Option<String>,
}

/// The scalar potential as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialForm {
    CSin { c: Complex64 },
    BCosCSin { b: f64, c: Complex64 },
    BExp { b: f64 },
    Fourier(Vec<(i64, Complex64)>),
}

impl PotentialForm {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialForm::CSin { .. } => "c_sin",
            PotentialForm::BCosCSin { .. } => "b_cos_c_sin",
            PotentialForm::BExp { .. } => "b_exp",
            PotentialForm::Fourier(_) => "fourier",
        }
    }

    pub fn spec(&self) -> PotentialSpec {
        match self {
            PotentialForm::CSin { c } => PotentialSpec::c_sin(*c),
            PotentialForm::BCosCSin { b, c } => PotentialSpec::b_cos_c_sin(*b, *c),
            PotentialForm::BExp { b } => PotentialSpec::b_exp(*b),
            PotentialForm::Fourier(v) => PotentialSpec::from_fourier(v.iter().copied()),
        }
    }

    fn echo(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            PotentialForm::CSin { c } => json!({ "c": format_complex(*c) }),
            PotentialForm::BCosCSin { b, c } => json!({ "b": b, "c": format_complex(*c) }),
            PotentialForm::BExp { b } => json!({ "b": b }),
            PotentialForm::Fourier(v) => serde_json::Value::Array(
                v.iter()
                    .map(|(l, z)| json!({ "l": l, "v": format_complex(*z) }))
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeChoice {
    /// Diagonal when bands 1 and 2 are separated, projection otherwise.
    Auto,
    Diagonal,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    CRe,
    CIm,
    B,
    ARe,
    AIm,
}

impl SweepParameter {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "c_re" => Self::CRe,
            "c_im" => Self::CIm,
            "b" => Self::B,
            "a_re" => Self::ARe,
            "a_im" => Self::AIm,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Bands,
    Gaps,
    EpScan,
    Wannier,
    Tb,
    Compare,
    Sweep,
}

impl Task {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bands" => Self::Bands,
            "gaps" => Self::Gaps,
            "ep-scan" => Self::EpScan,
            "wannier" => Self::Wannier,
            "tb" => Self::Tb,
            "compare" => Self::Compare,
            "sweep" => Self::Sweep,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bands => "bands",
            Self::Gaps => "gaps",
            Self::EpScan => "ep-scan",
            Self::Wannier => "wannier",
            Self::Tb => "tb",
            Self::Compare => "compare",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub model: ModelConfig,
    pub n_x: usize,
    pub m_max: usize,
    /// Hopping distance kept by the lattice model.
    pub range: usize,
    pub ep: EpConfig,
    pub pt_tol: f64,
    pub region_tol: f64,
    pub relation_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub task: Task,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub gauge: GaugeChoice,
    /// Trial cache file, resolved against the config file's directory.
    pub trials: Option<PathBuf>,
    pub cells: (i64, i64),
    pub tb_ep_samples: usize,
    pub threshold: Option<Threshold>,
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialForm,
    pub vector_a: Complex64,
    pub numerics: Numerics,
    pub task: TaskConfig,
    pub output: OutputConfig,
}

pub const DEFAULT_N_X: usize = 64;
pub const DEFAULT_M_MAX: usize = 3;

impl RunConfig {
    pub fn spec(&self) -> PotentialSpec {
        self.potential.spec().with_vector_potential(self.vector_a)
    }

    /// Copy with one potential parameter replaced.
    pub fn with_parameter(&self, p: SweepParameter, v: f64) -> Result<RunConfig, ConfigError> {
        let mut out = self.clone();
        let bad = || field_err("task.sweep.parameter", format!("does not apply to the `{}` potential", self.potential.name()));
        match (p, &mut out.potential) {
            (SweepParameter::CRe, PotentialForm::CSin { c } | PotentialForm::BCosCSin { c, .. }) => c.re = v,
            (SweepParameter::CIm, PotentialForm::CSin { c } | PotentialForm::BCosCSin { c, .. }) => c.im = v,
            (SweepParameter::B, PotentialForm::BCosCSin { b, .. } | PotentialForm::BExp { b }) => *b = v,
            (SweepParameter::ARe, _) => out.vector_a.re = v,
            (SweepParameter::AIm, _) => out.vector_a.im = v,
            _ => return Err(bad()),
        }
        Ok(out)
    }

    /// Everything that was parsed, with defaults filled in, as JSON.
    pub fn echo(&self) -> serde_json::Value {
        use serde_json::json;
        let n = &self.numerics;
        let t = &self.task;
        json!({
            "potential": {
                "form": self.potential.name(),
                "parameters": self.potential.echo(),
                "vector_a": format_complex(self.vector_a),
            },
            "numerics": {
                "l_max": n.model.l_max,
                "n_k": n.model.n_k,
                "n_x": n.n_x,
                "n_bands": n.model.n_bands,
                "m_max": n.m_max,
                "range": n.range,
            },
            "task": {
                "gauge": t.gauge,
                "trials": t.trials.as_ref().map(|p| p.display().to_string()),
                "cells": [t.cells.0, t.cells.1],
                "tb_ep_samples": t.tb_ep_samples,
                "threshold": t.threshold.as_ref().map(|th| json!({ "parameter": th.parameter, "values": th.values, "width": th.width })),
                "sweep": t.sweep.as_ref().map(|s| json!({
                    "task": s.task.name(),
                    "parameter": s.parameter,
                    "values": s.values,
                })),
            },
            "output": {
                "dir": self.output.dir.display().to_string(),
                "format": self.output.format,
            },
        })
    }

    /// Every numeric tolerance the engine uses, by name.
    pub fn tolerances(&self) -> serde_json::Value {
        let n = &self.numerics;
        serde_json::json!({
            "defect": n.model.tol.defect,
            "tracking_tie": n.model.tol.tracking_tie,
            "degeneracy": n.model.tol.degeneracy,
            "ep_energy": n.ep.energy_tol,
            "ep_defect": n.ep.defect_tol,
            "golden_depth": n.ep.golden_depth,
            "pt": n.pt_tol,
            "region": n.region_tol,
            "relation": n.relation_tol,
            "zero_pivot": 1e-12,
            "singular_projection": 1e-10,
        })
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(trials) = &cfg.task.trials {
        if trials.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.task.trials = Some(dir.join(trials));
            }
        }
    }
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let p = raw.potential;
    let mut forms = Vec::new();
    if let Some(f) = p.c_sin {
        forms.push(PotentialForm::CSin {
            c: f.c.resolve("potential.c_sin.c")?,
        });
    }
    if let Some(f) = p.b_cos_c_sin {
        finite("potential.b_cos_c_sin.b", f.b)?;
        forms.push(PotentialForm::BCosCSin {
            b: f.b,
            c: f.c.resolve("potential.b_cos_c_sin.c")?,
        });
    }
    if let Some(f) = p.b_exp {
        finite("potential.b_exp.b", f.b)?;
        forms.push(PotentialForm::BExp { b: f.b });
    }
    if let Some(list) = p.fourier {
        let mut seen = std::collections::BTreeSet::new();
        let mut v = Vec::new();
        for (i, f) in list.iter().enumerate() {
            if !seen.insert(f.l) {
                return Err(field_err(&format!("potential.fourier[{i}].l"), format!("duplicate order {}", f.l)));
            }
            v.push((f.l, f.v.resolve(&format!("potential.fourier[{i}].v"))?));
        }
        forms.push(PotentialForm::Fourier(v));
    }
    if forms.len() != 1 {
        return Err(field_err(
            "potential",
            format!(
                "exactly one of c_sin, b_cos_c_sin, b_exp, fourier must be given, found {}",
                forms.len()
            ),
        ));
    }
    let potential = forms.remove(0);
    let vector_a = match &p.vector_a {
        Some(a) => a.resolve("potential.vector_a")?,
        None => Complex64::new(0.0, 0.0),
    };

    let rn = raw.numerics;
    let rt = rn.tolerances;
    let defaults = ModelConfig::default();
    let ep_defaults = EpConfig::default();
    let tol = Tolerances {
        defect: positive("numerics.tolerances.defect", rt.defect.unwrap_or(defaults.tol.defect))?,
        tracking_tie: positive(
            "numerics.tolerances.tracking_tie",
            rt.tracking_tie.unwrap_or(defaults.tol.tracking_tie),
        )?,
        degeneracy: positive(
            "numerics.tolerances.degeneracy",
            rt.degeneracy.unwrap_or(defaults.tol.degeneracy),
        )?,
    };
    let model = ModelConfig {
        l_max: rn.l_max.unwrap_or(defaults.l_max),
        n_k: rn.n_k.unwrap_or(defaults.n_k),
        n_bands: rn.n_bands.unwrap_or(defaults.n_bands),
        tol,
    };
    model.validate().map_err(|e| match e {
        nhband_core::Error::InvalidConfig { field, reason } => field_err(&format!("numerics.{field}"), reason),
        other => field_err("numerics", other.to_string()),
    })?;
    if model.n_k % 2 == 1 {
        return Err(field_err("numerics.n_k", "must be even so that k = 0 lies on the grid"));
    }
    let n_x = rn.n_x.unwrap_or(DEFAULT_N_X);
    if n_x < 2 || n_x % 2 == 1 {
        return Err(field_err("numerics.n_x", format!("must be even and at least 2, got {n_x}")));
    }
    let m_max = rn.m_max.unwrap_or(DEFAULT_M_MAX);
    if m_max < 1 {
        return Err(field_err("numerics.m_max", "must be at least 1"));
    }
    let range = rn.range.unwrap_or(1);
    if range < 1 || range > m_max {
        return Err(field_err("numerics.range", format!("must lie in 1..={m_max}, got {range}")));
    }
    let golden_depth = rt.golden_depth.unwrap_or(ep_defaults.golden_depth);
    if golden_depth == 0 {
        return Err(field_err("numerics.tolerances.golden_depth", "must be positive"));
    }
    let numerics = Numerics {
        model,
        n_x,
        m_max,
        range,
        ep: EpConfig {
            energy_tol: positive("numerics.tolerances.ep_energy", rt.ep_energy.unwrap_or(ep_defaults.energy_tol))?,
            defect_tol: tol.defect,
            golden_depth,
        },
        pt_tol: positive("numerics.tolerances.pt", rt.pt.unwrap_or(1e-8))?,
        region_tol: positive("numerics.tolerances.region", rt.region.unwrap_or(1e-8))?,
        relation_tol: positive("numerics.tolerances.relation", rt.relation.unwrap_or(1e-8))?,
    };

    let t = raw.task;
    let gauge = match t.gauge.as_deref() {
        None | Some("auto") => GaugeChoice::Auto,
        Some("diagonal") => GaugeChoice::Diagonal,
        Some("projection") => GaugeChoice::Projection,
        Some(other) => {
            return Err(field_err(
                "task.gauge",
                format!("expected auto, diagonal or projection, got {other:?}"),
            ))
        }
    };
    let cells = match t.cells {
        None => (-(m_max as i64), m_max as i64),
        Some([lo, hi]) if lo <= 0 && hi >= 0 => (lo, hi),
        Some(_) => return Err(field_err("task.cells", "range must contain 0")),
    };
    let tb_ep_samples = t.tb_ep_samples.unwrap_or(4000);
    if tb_ep_samples < 2 {
        return Err(field_err("task.tb_ep_samples", "must be at least 2"));
    }
    let threshold = match t.threshold {
        None => None,
        Some(th) => {
            if th.values.len() < 2 {
                return Err(field_err("task.threshold.values", "need at least two values"));
            }
            for v in &th.values {
                finite("task.threshold.values", *v)?;
            }
            let parameter = match th.parameter.as_deref() {
                None => SweepParameter::CIm,
                Some(p) => SweepParameter::parse(p).ok_or_else(|| {
                    field_err(
                        "task.threshold.parameter",
                        format!("expected c_re, c_im, b, a_re or a_im, got {p:?}"),
                    )
                })?,
            };
            Some(Threshold {
                parameter,
                values: th.values,
                width: positive("task.threshold.width", th.width.unwrap_or(0.1))?,
            })
        }
    };
    let sweep = match t.sweep {
        None => None,
        Some(s) => {
            let task = Task::parse(&s.task)
                .filter(|t| *t != Task::Sweep)
                .ok_or_else(|| field_err("task.sweep.task", format!("unknown or nested task {:?}", s.task)))?;
            let parameter = SweepParameter::parse(&s.parameter).ok_or_else(|| {
                field_err(
                    "task.sweep.parameter",
                    format!("expected c_re, c_im, b, a_re or a_im, got {:?}", s.parameter),
                )
            })?;
            let values = match (s.values, s.start, s.stop, s.steps) {
                (Some(v), None, None, None) if !v.is_empty() => v,
                (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                    if n == 1 {
                        vec![a]
                    } else {
                        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                    }
                }
                _ => {
                    return Err(field_err(
                        "task.sweep",
                        "give either a non-empty `values` list or `start`, `stop` and `steps`",
                    ))
                }
            };
            for v in &values {
                finite("task.sweep.values", *v)?;
            }
            Some(Sweep { task, parameter, values })
        }
    };
    let task = TaskConfig {
        gauge,
        trials: t.trials,
        cells,
        tb_ep_samples,
        threshold,
        sweep,
    };

    let o = raw.output;
    let format = match o.format.as_deref() {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(field_err("output.format", format!("expected csv or json, got {other:?}"))),
    };
    let output = OutputConfig {
        dir: o.dir.unwrap_or_else(|| PathBuf::from("nhband-out")),
        format,
    };

    Ok(RunConfig {
        potential,
        vector_a,
        numerics,
        task,
        output,
    })
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_err(field, "must be finite"))
    }
}
