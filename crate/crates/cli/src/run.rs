//! Subcommand execution: turn a [`RunConfig`] into output tables, auxiliary
//! text files and a manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nhband_core::ep::{detect_eps, ep_report, region_decompose, threshold_scan, Region};
use nhband_core::perturbation::measure_gaps;
use nhband_core::spectra::{dispersion, BandSet, OrderingRule};
use nhband_core::tightbinding::{
    asymmetry_ratio, compare, hoppings_from_bands, hoppings_real_space, tb_ep_positions, verify_relations,
    RelationContext, TbModel,
};
use nhband_core::wannier::{
    build_wannier, default_trials, diagonal_gauge, fix_phases, projection_unitary, region_check, GaugeMethod,
    TrialSet, TrialSource, UnitaryMixing,
};
use nhband_core::Complex64;
use serde_json::{json, Map, Value};

use crate::complex::format_complex;
use crate::config::{ConfigError, GaugeChoice, PotentialForm, RunConfig, Task};
use crate::formats::{load_trials, write_hoppings, write_trials, FormatError};
use crate::table::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trial file: {0}")]
    Trials(#[from] FormatError),
    #[error(transparent)]
    Compute(#[from] nhband_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl RunError {
    /// 2 for anything the user can fix in the inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Trials(_) => 2,
            RunError::Compute(_) | RunError::Output(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Trials(_) => "trials",
            RunError::Compute(_) => "computation",
            RunError::Output(_) => "output",
        }
    }
}

/// Everything a task produces before anything touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// `(file name, contents)`.
    pub texts: Vec<(String, String)>,
    pub checks: Map<String, Value>,
}

impl Outcome {
    fn check(&mut self, key: &str, v: impl Into<Value>) {
        self.checks.insert(key.to_string(), v.into());
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn rule_name(r: Option<OrderingRule>) -> Value {
    match r {
        Some(OrderingRule::ByImag) => "by_imag".into(),
        Some(OrderingRule::ByReal) => "by_real".into(),
        None => Value::Null,
    }
}

fn bands_of(cfg: &RunConfig, min_bands: usize) -> Result<BandSet, RunError> {
    let mut model = cfg.numerics.model;
    model.n_bands = model.n_bands.max(min_bands);
    Ok(dispersion(&cfg.spec(), &model)?)
}

fn trials(cfg: &RunConfig) -> Result<TrialSet, RunError> {
    match &cfg.task.trials {
        Some(path) => Ok(load_trials(path)?),
        None => Ok(default_trials(&cfg.numerics.model, cfg.numerics.n_x)?),
    }
}

/// Bands 1 and 2 with the mixing chosen by `task.gauge`.
struct Gauged {
    bands: BandSet,
    u: UnitaryMixing,
    separated: bool,
}

fn gauged(cfg: &RunConfig, bands: &BandSet) -> Result<Gauged, RunError> {
    let two = bands.leading(2);
    let separated = detect_eps(&two, (0, 1), &cfg.numerics.ep)?.is_empty();
    let method = match cfg.task.gauge {
        GaugeChoice::Auto if separated => GaugeMethod::Diagonal,
        GaugeChoice::Auto => GaugeMethod::Projection,
        GaugeChoice::Diagonal => GaugeMethod::Diagonal,
        GaugeChoice::Projection => GaugeMethod::Projection,
    };
    match method {
        GaugeMethod::Diagonal => {
            let (fixed, _) = fix_phases(&two)?;
            let u = diagonal_gauge(&fixed, &cfg.numerics.ep)?;
            Ok(Gauged {
                bands: fixed,
                u,
                separated,
            })
        }
        GaugeMethod::Projection => {
            let t = trials(cfg)?;
            let u = projection_unitary(&two, &t, cfg.numerics.n_x)?;
            Ok(Gauged {
                bands: two,
                u,
                separated,
            })
        }
    }
}

fn band_table(name: &str, ks: &[f64], energies: &[Vec<Complex64>]) -> Table {
    let mut t = Table::new(name, &["k", "band", "re", "im"]);
    for (j, &k) in ks.iter().enumerate() {
        for (n, band) in energies.iter().enumerate() {
            let e = band[j];
            t.push(vec![k.into(), (n + 1).into(), e.re.into(), e.im.into()]);
        }
    }
    t
}

fn run_bands(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 1)?;
    let mut out = Outcome::default();
    out.tables.push(band_table("bands", &b.k, &b.energies));
    let defective: usize = b.defective.iter().flatten().filter(|&&d| d).count();
    out.check("n_bands", b.n_bands());
    out.check("n_k", b.n_k());
    out.check("biorthonormality_residual", b.biorthonormality_residual());
    out.check("defective_states", defective);
    out.check("ordering_events", b.ordering_log.events.len());
    out.check("tracking_ambiguities", b.ordering_log.ambiguities.len());
    Ok(out)
}

fn run_gaps(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 2)?;
    let g = measure_gaps(&b)?;
    let mut t = Table::new("gaps", &["quantity", "re", "im"]);
    let mut row = |name: &str, z: Complex64| t.push(vec![name.into(), z.re.into(), z.im.into()]);
    row("delta1", g.delta1);
    if let Some(d) = g.delta2 {
        row("delta2", d);
    }
    if let Some(d) = g.analytic_delta1 {
        row("analytic_delta1", d);
    }
    if let Some(d) = &g.analytic_delta2 {
        row("analytic_delta2", d.exact);
        row("analytic_delta2_leading", d.leading);
    }
    let mut out = Outcome::default();
    out.tables.push(t);
    out.check("rule_at_pi", rule_name(g.rule_at_pi));
    out.check("rule_at_zero", rule_name(g.rule_at_zero));
    out.check(
        "parameters",
        match g.parameters {
            Some(p) => json!({
                "b": complex_json(p.b),
                "c": complex_json(p.c),
                "delta_c": complex_json(p.delta_c),
                "vector_a": complex_json(p.vector_a),
            }),
            None => Value::Null,
        },
    );
    if let Some(d) = &g.analytic_delta2 {
        out.check("delta2_single_sided", d.single_sided);
    }
    Ok(out)
}

fn run_ep_scan(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 2)?;
    let ep = &cfg.numerics.ep;
    let mut t = Table::new("eps", &["band_a", "band_b", "k", "re", "im", "gap", "self_overlap"]);
    let mut count = 0usize;
    for n in 0..b.n_bands() - 1 {
        for p in detect_eps(&b, (n, n + 1), ep)? {
            count += 1;
            t.push(vec![
                (p.bands.0 + 1).into(),
                (p.bands.1 + 1).into(),
                p.k.into(),
                p.energy.re.into(),
                p.energy.im.into(),
                p.gap.into(),
                p.self_overlap.into(),
            ]);
        }
    }
    let report = ep_report(&b, (0, 1), ep, cfg.numerics.pt_tol)?;
    let mut out = Outcome::default();
    out.tables.push(t);
    out.check("ep_count", count);
    out.check(
        "windings",
        report
            .windings
            .iter()
            .map(|&(band, w)| json!({ "band": band + 1, "winding": w }))
            .collect::<Vec<_>>(),
    );
    out.check("pt_all", report.pt.all());
    out.check("pt_max_residual", report.pt.max_residual);
    if cfg.spec().is_pt_symmetric() {
        let regions = match region_decompose(&b, cfg.numerics.region_tol) {
            Ok(labels) => {
                let alpha = labels.iter().filter(|&&r| r == Region::Alpha).count();
                json!({ "alpha": alpha, "beta": labels.len() - alpha })
            }
            Err(e) => json!({ "error": e.to_string() }),
        };
        out.check("regions", regions);
    }

    if let Some(th) = &cfg.task.threshold {
        // Surface a parameter that does not fit the potential before scanning.
        let first = th.values.first().copied().unwrap_or(0.0);
        cfg.with_parameter(th.parameter, first)?;
        let builder = |x: f64| cfg.with_parameter(th.parameter, x).expect("checked above").spec();
        let mut model = cfg.numerics.model;
        model.n_bands = model.n_bands.max(2);
        let found = threshold_scan(&th.values, builder, &model, (0, 1), ep, th.width)?;
        let name = serde_json::to_value(th.parameter).expect("enum serializes");
        let mut tt = Table::new("threshold", &["parameter", "below", "above", "estimate"]);
        if let Some(f) = found {
            tt.push(vec![
                name.as_str().unwrap_or_default().into(),
                f.below.into(),
                f.above.into(),
                f.estimate.into(),
            ]);
        }
        out.check(
            "threshold",
            found.map_or(Value::Null, |f| json!({ "below": f.below, "above": f.above, "estimate": f.estimate })),
        );
        out.tables.push(tt);
    }
    Ok(out)
}

fn unitary_table(u: &UnitaryMixing) -> Table {
    let mut t = Table::new("unitary", &["k", "row", "col", "re", "im"]);
    for (j, &k) in u.k.iter().enumerate() {
        for r in 0..u.n {
            for c in 0..u.n {
                let z = u.get(j, r, c);
                t.push(vec![k.into(), (r + 1).into(), (c + 1).into(), z.re.into(), z.im.into()]);
            }
        }
    }
    t
}

fn run_wannier(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 2)?;
    let g = gauged(cfg, &b)?;
    let set = build_wannier(&g.bands, &g.u, cfg.numerics.n_x, cfg.task.cells)?;

    let mut header = vec!["x".to_string()];
    for n in 1..=set.n_w() {
        header.push(format!("w{n}_re"));
        header.push(format!("w{n}_im"));
    }
    for n in 1..=set.n_w() {
        header.push(format!("wt{n}_re"));
        header.push(format!("wt{n}_im"));
    }
    let mut t = Table {
        name: "wannier".into(),
        header,
        rows: Vec::new(),
    };
    for i in 0..set.grid.len() {
        let mut row = vec![Cell::Float(set.grid.x(i))];
        for f in set.w.iter().chain(&set.wt) {
            row.push(f[i].re.into());
            row.push(f[i].im.into());
        }
        t.push(row);
    }

    let mut out = Outcome::default();
    out.tables.push(t);
    out.tables.push(unitary_table(&g.u));
    let sigma_min = g.u.sigma_min.iter().copied().fold(f64::INFINITY, f64::min);
    out.check("method", g.u.method.as_str());
    out.check("separated", g.separated);
    out.check("biorthogonality_residual", set.biorthogonality_residual());
    out.check("unitarity_residual", g.u.unitarity_residual());
    if sigma_min.is_finite() {
        out.check("sigma_min", sigma_min);
    }
    let centres: Vec<Value> = (0..set.n_w())
        .map(|n| {
            let (c, s) = set.center_and_spread(n);
            json!({ "band": n + 1, "center": c, "spread": s })
        })
        .collect();
    out.check("centers", centres);
    let spec = cfg.spec();
    if spec.is_reflection_symmetric() && set.n_w() == 2 {
        let half = (cfg.numerics.n_x / 2) as i64;
        out.check(
            "reflection_residual",
            set.reflection_residual(0, -half).max(set.reflection_residual(1, half)),
        );
    }
    if spec.is_pt_symmetric() && set.n_w() == 2 {
        out.check(
            "conjugate_flip_residual",
            set.conjugate_flip_residual(0, 1).max(set.conjugate_flip_residual(1, 0)),
        );
        if g.u.method == GaugeMethod::Projection {
            let rc = match region_check(&g.bands, &g.u, cfg.numerics.region_tol) {
                Ok(r) => json!({ "alpha_deviation": r.alpha_deviation, "beta_offdiag": r.beta_offdiag }),
                Err(e) => json!({ "error": e.to_string() }),
            };
            out.check("regions", rc);
        }
    }

    if g.u.method == GaugeMethod::Diagonal {
        if let PotentialForm::CSin { c } = cfg.potential {
            let n_x = cfg.numerics.n_x;
            let m = &cfg.numerics.model;
            let cache = TrialSet::from_wannier(
                &build_wannier(&g.bands, &g.u, n_x, (0, 0))?,
                TrialSource {
                    c,
                    l_max: m.l_max,
                    n_k: m.n_k,
                    n_x,
                },
            );
            out.texts.push(("trials.txt".into(), write_trials(&cache)));
        }
    }
    Ok(out)
}

/// Hopping table plus everything derived from it.
struct Lattice {
    gauged: Gauged,
    table: nhband_core::tightbinding::HoppingTable,
    model: TbModel,
}

fn lattice(cfg: &RunConfig, b: &BandSet) -> Result<Lattice, RunError> {
    let gauged = gauged(cfg, b)?;
    let table = hoppings_from_bands(&gauged.bands, &gauged.u, cfg.numerics.m_max)?;
    let model = TbModel::new(&table, cfg.numerics.range);
    Ok(Lattice { gauged, table, model })
}

fn run_tb(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 2)?;
    let l = lattice(cfg, &b)?;
    let g = &l.gauged;
    let m_max = cfg.numerics.m_max as i64;
    let set = build_wannier(&g.bands, &g.u, cfg.numerics.n_x, (-m_max, m_max))?;
    let real = hoppings_real_space(&g.bands, &g.u, &set, cfg.numerics.m_max)?;
    let ctx = RelationContext::from_potential(&cfg.spec(), g.separated);
    let report = verify_relations(&l.table, ctx, cfg.numerics.relation_tol);

    let mut rel = Table::new("relations", &["id", "description", "residual", "tol", "passed"]);
    for c in &report.checks {
        rel.push(vec![
            c.id.label().into(),
            c.id.description().into(),
            c.residual.into(),
            c.tol.into(),
            c.passed.into(),
        ]);
    }
    let tb = l.model.dispersion(&b.k)?;

    let mut out = Outcome::default();
    out.texts.push(("hoppings.txt".into(), write_hoppings(&l.table)));
    out.tables.push(rel);
    out.tables.push(band_table("tb_bands", &b.k, &tb));
    out.check("method", g.u.method.as_str());
    out.check("separated", g.separated);
    out.check("route_difference", l.table.max_difference(&real));
    out.check("relations_passed", report.all_passed());
    out.check("t12_onsite", report.t12_onsite);
    out.check("notes", report.notes.clone());
    out.check(
        "asymmetry_ratios",
        (0..l.table.n).map(|n| asymmetry_ratio(&l.table, n)).collect::<Vec<_>>(),
    );
    out.check("range", cfg.numerics.range);
    if l.model.n_bands() == 2 && !g.separated {
        out.check("tb_ep_k", tb_ep_positions(&l.model, cfg.task.tb_ep_samples)?);
        let cont: Vec<f64> = detect_eps(&g.bands, (0, 1), &cfg.numerics.ep)?.iter().map(|p| p.k).collect();
        out.check("continuum_ep_k", cont);
    }
    Ok(out)
}

fn run_compare(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let b = bands_of(cfg, 2)?;
    let l = lattice(cfg, &b)?;
    let cmp = compare(&l.gauged.bands, &l.model)?;

    let mut t = Table::new("compare", &["k", "band", "continuum_re", "continuum_im", "tb_re", "tb_im"]);
    for (j, &k) in b.k.iter().enumerate() {
        for (n, band) in cmp.tb.iter().enumerate() {
            let c = l.gauged.bands.energy(n, j);
            let e = band[j];
            t.push(vec![k.into(), (n + 1).into(), c.re.into(), c.im.into(), e.re.into(), e.im.into()]);
        }
    }
    let mut d = Table::new("deviations", &["band", "max", "rms", "normalized"]);
    for (n, dev) in cmp.per_band.iter().enumerate() {
        d.push(vec![(n + 1).into(), dev.max.into(), dev.rms.into(), dev.normalized.into()]);
    }
    let mut out = Outcome::default();
    out.tables.push(t);
    out.tables.push(d);
    out.check("method", l.gauged.u.method.as_str());
    out.check("range", cfg.numerics.range);
    out.check("bandwidth", cmp.bandwidth);
    out.check("max_normalized", cmp.max_normalized());
    Ok(out)
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let sweep = cfg.task.sweep.as_ref().ok_or_else(|| ConfigError::Field {
        field: "task.sweep".into(),
        reason: "required by the sweep subcommand".into(),
    })?;
    let column = serde_json::to_value(sweep.parameter).expect("enum serializes");
    let column = column.as_str().unwrap_or("value");
    let mut out = Outcome::default();
    let mut per_value = Vec::new();
    for (i, &v) in sweep.values.iter().enumerate() {
        let sub = cfg.with_parameter(sweep.parameter, v)?;
        let o = compute(&sub, sweep.task)?;
        for t in o.tables {
            let t = t.prefixed(column, v);
            match out.tables.iter_mut().find(|x| x.name == t.name) {
                Some(acc) => acc.rows.extend(t.rows),
                None => out.tables.push(t),
            }
        }
        for (name, text) in o.texts {
            let (stem, ext) = name.rsplit_once('.').unwrap_or((&name, "txt"));
            out.texts.push((format!("{stem}_{i:03}.{ext}"), text));
        }
        per_value.push(json!({ "value": v, "checks": Value::Object(o.checks) }));
    }
    out.check("task", sweep.task.name());
    out.check("parameter", column);
    out.check("values", per_value);
    Ok(out)
}

/// Run one task in memory.
pub fn compute(cfg: &RunConfig, task: Task) -> Result<Outcome, RunError> {
    match task {
        Task::Bands => run_bands(cfg),
        Task::Gaps => run_gaps(cfg),
        Task::EpScan => run_ep_scan(cfg),
        Task::Wannier => run_wannier(cfg),
        Task::Tb => run_tb(cfg),
        Task::Compare => run_compare(cfg),
        Task::Sweep => {
            if cfg.task.sweep.as_ref().is_some_and(|s| s.task == Task::Sweep) {
                return Err(ConfigError::Field {
                    field: "task.sweep.task".into(),
                    reason: "a sweep cannot nest another sweep".into(),
                }
                .into());
            }
            run_sweep(cfg)
        }
    }
}

/// Manifest contents. Keys come out sorted.
pub fn manifest(
    task: &str,
    cfg: Option<&RunConfig>,
    outputs: &[String],
    result: Result<&Outcome, &RunError>,
    elapsed_ms: f64,
) -> Value {
    let (status, error, checks) = match result {
        Ok(o) => ("ok", Value::Null, Value::Object(o.checks.clone())),
        Err(e) => (
            "failed",
            json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }),
            Value::Null,
        ),
    };
    json!({
        "tool": "nhband",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": nhband_core::VERSION,
        "subcommand": task,
        "status": status,
        "error": error,
        "config": cfg.map_or(Value::Null, RunConfig::echo),
        "potential": cfg.map_or(Value::Null, |c| {
            Value::Array(c.spec().components().map(|(l, v)| json!({ "l": l, "v": format_complex(v) })).collect())
        }),
        "tolerances": cfg.map_or(Value::Null, RunConfig::tolerances),
        "outputs": outputs,
        "checks": checks,
        "timings_ms": { "total": elapsed_ms },
    })
}

pub fn write_manifest(dir: &Path, value: &Value) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("manifest serializes");
    bytes.push(b'\n');
    std::fs::write(dir.join("manifest.json"), bytes)
}

/// Run `task`, write every output into `dir` and finish with `manifest.json`,
/// which is written even when the task fails.
pub fn execute(cfg: &RunConfig, task: Task, dir: &Path) -> Result<Outcome, RunError> {
    let start = Instant::now();
    std::fs::create_dir_all(dir)?;
    let result = compute(cfg, task);
    let mut outputs = Vec::new();
    let written = match &result {
        Ok(o) => write_outputs(o, cfg, dir, &mut outputs),
        Err(_) => Ok(()),
    };
    let result = match (result, written) {
        (Ok(o), Ok(())) => Ok(o),
        (Ok(_), Err(e)) => Err(RunError::Output(e)),
        (Err(e), _) => Err(e),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    write_manifest(dir, &manifest(task.name(), Some(cfg), &outputs, result.as_ref(), elapsed))?;
    result
}

fn write_outputs(o: &Outcome, cfg: &RunConfig, dir: &Path, outputs: &mut Vec<String>) -> std::io::Result<()> {
    for t in &o.tables {
        outputs.push(t.write(dir, cfg.output.format)?);
    }
    for (name, text) in &o.texts {
        std::fs::write(dir.join(name), text)?;
        outputs.push(name.clone());
    }
    Ok(())
}

/// `--out` wins over `output.dir`.
pub fn output_dir(cfg: &RunConfig, cli: Option<PathBuf>) -> PathBuf {
    cli.unwrap_or_else(|| cfg.output.dir.clone())
}
