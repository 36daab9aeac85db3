//! The five subcommands as pure functions from a config to a [`Report`].

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use piezobeam::fem::FemMode;
use piezobeam::{
    assemble, calibrate_length, convergence_report, frequency_closed_form, frequency_sixth_order,
    FemFlags, Layup, ModeClass, Section,
};
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::config::{CompareModel, ErrorBase, LengthSpec, RunConfig};
use crate::format::{sci, sci_opt, Cell, Sci, Table};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Options {
    /// Report angular frequencies in rad/s instead of Hz.
    pub rad_per_s: bool,
}

impl Options {
    fn convert(&self, hz: f64) -> f64 {
        if self.rad_per_s {
            hz * TAU
        } else {
            hz
        }
    }

    fn unit(&self) -> &'static str {
        if self.rad_per_s {
            "rad/s"
        } else {
            "Hz"
        }
    }

    /// Column name `f_<what>_hz` or `omega_<what>_rad_s`.
    fn col(&self, what: &str) -> String {
        if self.rad_per_s {
            format!("omega_{what}_rad_s")
        } else {
            format!("f_{what}_hz")
        }
    }
}

/// CSV table plus the serialized JSON report of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub json: String,
}

/// Section fields as an ordered map with scientific-notation values.
struct SectionJson<'a>(&'a Section);

impl Serialize for SectionJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let fields = self.0.fields();
        let mut map = serializer.serialize_map(Some(fields.len()))?;
        for (name, value) in fields {
            map.serialize_entry(name, &Sci(value))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    #[serde(serialize_with = "sci")]
    length_m: f64,
    section: SectionJson<'a>,
    frequency_unit: &'static str,
    #[serde(flatten)]
    body: T,
}

fn envelope_json<T: Serialize>(
    command: &'static str,
    config: &RunConfig,
    length: f64,
    section: &Section,
    opts: Options,
    body: T,
) -> Result<String> {
    let env = Envelope {
        command,
        config,
        length_m: length,
        section: SectionJson(section),
        frequency_unit: opts.unit(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    Ok(text)
}

/// Layup at the configured thicknesses with the span resolved (calibrated if
/// requested).
pub fn resolve_layup(config: &RunConfig) -> Result<(Layup, Section)> {
    let mut layup = config.layup_with(config.h1, config.h2, 1.0)?;
    let section = layup.section();
    layup.length = match config.length {
        LengthSpec::Fixed(l) => l,
        LengthSpec::Calibrate { calibrate, mode } => calibrate_length(&section, calibrate, mode)
            .with_context(|| format!("calibrating the span to {calibrate:e} Hz on mode {mode}"))?,
    };
    Ok((layup, section))
}

fn fem_flags(config: &RunConfig) -> FemFlags {
    FemFlags {
        include_rho1_coupling: config.fem.include_rho1,
        ..FemFlags::default()
    }
}

/// The first `count` flexural FEM modes, asking the eigensolver for more
/// modes until enough non-axial ones turn up.
pub fn fem_flexural(
    layup: &Layup,
    section: &Section,
    n_elems: usize,
    flags: FemFlags,
    count: usize,
) -> Result<Vec<FemMode>> {
    let model = assemble(layup, section, n_elems, flags)?;
    let available = model.free_mechanical.len();
    let mut request = (2 * count + 4).min(available);
    loop {
        let modes = model.solve_modes(request)?;
        let flexural: Vec<FemMode> = modes
            .modes
            .into_iter()
            .filter(|m| m.class.is_flexural())
            .collect();
        if flexural.len() >= count {
            return Ok(flexural.into_iter().take(count).collect());
        }
        if request == available {
            bail!(
                "mesh of {n_elems} elements resolves only {} flexural modes, {count} requested",
                flexural.len()
            );
        }
        request = (request * 2).min(available);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b) / b
}

#[derive(Serialize)]
struct FreqRow {
    m: usize,
    symmetry: &'static str,
    #[serde(serialize_with = "sci")]
    closed_form: f64,
    #[serde(serialize_with = "sci")]
    sixth_order: f64,
    #[serde(serialize_with = "sci")]
    rel_diff_sixth_closed: f64,
    #[serde(serialize_with = "sci_opt", skip_serializing_if = "Option::is_none")]
    fem: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fem_class: Option<&'static str>,
    #[serde(serialize_with = "sci_opt", skip_serializing_if = "Option::is_none")]
    rel_diff_fem_closed: Option<f64>,
    #[serde(serialize_with = "sci_opt", skip_serializing_if = "Option::is_none")]
    rel_diff_fem_sixth: Option<f64>,
}

#[derive(Serialize)]
struct ModesBody {
    modes: Vec<FreqRow>,
}

pub fn cmd_freq(config: &RunConfig, opts: Options) -> Result<Report> {
    let (layup, section) = resolve_layup(config)?;
    let length = layup.length;
    let fem = if config.fem.enabled {
        let highest = *config.modes.iter().max().expect("validated non-empty");
        Some(fem_flexural(
            &layup,
            &section,
            config.fem.n_elems,
            fem_flags(config),
            highest,
        )?)
    } else {
        None
    };

    let mut header = vec![
        "m".to_string(),
        "symmetry".to_string(),
        opts.col("closed_form"),
        opts.col("sixth_order"),
    ];
    header.push("rel_diff_sixth_closed".into());
    if fem.is_some() {
        header.extend([
            opts.col("fem"),
            "fem_class".into(),
            "rel_diff_fem_closed".into(),
            "rel_diff_fem_sixth".into(),
        ]);
    }
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for &m in &config.modes {
        let cf = frequency_closed_form(&section, length, m)?;
        let so = frequency_sixth_order(&section, length, m)?;
        let fem_mode = fem.as_ref().map(|modes| &modes[m - 1]);
        let row = FreqRow {
            m,
            symmetry: cf.symmetry.as_str(),
            closed_form: opts.convert(cf.freq_hz),
            sixth_order: opts.convert(so.freq_hz),
            rel_diff_sixth_closed: rel(so.freq_hz, cf.freq_hz),
            fem: fem_mode.map(|f| opts.convert(f.freq_hz)),
            fem_class: fem_mode.map(|f| f.class.as_str()),
            rel_diff_fem_closed: fem_mode.map(|f| rel(f.freq_hz, cf.freq_hz)),
            rel_diff_fem_sixth: fem_mode.map(|f| rel(f.freq_hz, so.freq_hz)),
        };
        let mut cells: Vec<Cell> = vec![
            m.into(),
            row.symmetry.into(),
            row.closed_form.into(),
            row.sixth_order.into(),
            row.rel_diff_sixth_closed.into(),
        ];
        if fem.is_some() {
            cells.extend([
                row.fem.into(),
                Cell::from(row.fem_class.unwrap_or("")),
                row.rel_diff_fem_closed.into(),
                row.rel_diff_fem_sixth.into(),
            ]);
        }
        table.push(cells);
        rows.push(row);
    }
    let json = envelope_json(
        "freq",
        config,
        length,
        &section,
        opts,
        ModesBody { modes: rows },
    )?;
    Ok(Report { table, json })
}

#[derive(Serialize)]
struct CompareRow {
    mode: usize,
    m: usize,
    #[serde(serialize_with = "sci")]
    model: f64,
    #[serde(serialize_with = "sci")]
    reference: f64,
    #[serde(serialize_with = "sci")]
    error_percent: f64,
}

#[derive(Serialize)]
struct CompareBody {
    model: CompareModel,
    relative_to: ErrorBase,
    modes: Vec<CompareRow>,
}

/// Error column `|f_model - f_ref| / base * 100`, `base` per [`ErrorBase`].
pub fn error_percent(model_hz: f64, reference_hz: f64, base: ErrorBase) -> f64 {
    let denominator = match base {
        ErrorBase::Model => model_hz,
        ErrorBase::Reference => reference_hz,
    };
    (model_hz - reference_hz).abs() / denominator * 100.0
}

/// Compares model frequencies for the configured modes against reference
/// values in Hz (from `reference` when given, else from the config).
pub fn cmd_compare(config: &RunConfig, reference: Option<&[f64]>, opts: Options) -> Result<Report> {
    let reference = reference.unwrap_or(&config.compare.reference_hz);
    ensure!(
        !reference.is_empty(),
        "reference list is empty: set compare.reference_hz or pass --reference"
    );
    if let Some(bad) = reference.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        bail!("reference frequencies must be positive, got {bad:e}");
    }
    ensure!(
        reference.len() == config.modes.len(),
        "length mismatch: {} modes configured but {} reference values given",
        config.modes.len(),
        reference.len()
    );
    let (layup, section) = resolve_layup(config)?;
    let length = layup.length;
    let model_hz: Vec<f64> = match config.compare.model {
        CompareModel::ClosedForm => config
            .modes
            .iter()
            .map(|&m| frequency_closed_form(&section, length, m).map(|r| r.freq_hz))
            .collect::<Result<_, _>>()?,
        CompareModel::SixthOrder => config
            .modes
            .iter()
            .map(|&m| frequency_sixth_order(&section, length, m).map(|r| r.freq_hz))
            .collect::<Result<_, _>>()?,
        CompareModel::Fem => {
            let highest = *config.modes.iter().max().expect("validated non-empty");
            let modes = fem_flexural(
                &layup,
                &section,
                config.fem.n_elems,
                fem_flags(config),
                highest,
            )?;
            config.modes.iter().map(|&m| modes[m - 1].freq_hz).collect()
        }
    };

    let mut table = Table {
        header: vec![
            "mode".into(),
            "m".into(),
            opts.col("model"),
            opts.col("reference"),
            "error_percent".into(),
        ],
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for (i, ((&m, &f), &r)) in config
        .modes
        .iter()
        .zip(&model_hz)
        .zip(reference)
        .enumerate()
    {
        let row = CompareRow {
            mode: i + 1,
            m,
            model: opts.convert(f),
            reference: opts.convert(r),
            error_percent: error_percent(f, r, config.compare.relative_to),
        };
        table.push(vec![
            row.mode.into(),
            m.into(),
            row.model.into(),
            row.reference.into(),
            row.error_percent.into(),
        ]);
        rows.push(row);
    }
    let body = CompareBody {
        model: config.compare.model,
        relative_to: config.compare.relative_to,
        modes: rows,
    };
    let json = envelope_json("compare", config, length, &section, opts, body)?;
    Ok(Report { table, json })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    #[serde(serialize_with = "sci")]
    pub ratio: f64,
    #[serde(serialize_with = "sci")]
    pub h1_m: f64,
    #[serde(serialize_with = "sci")]
    pub h2_m: f64,
    #[serde(serialize_with = "sci")]
    pub f1_analytic: f64,
    #[serde(serialize_with = "sci")]
    pub f1_fem: f64,
    #[serde(serialize_with = "sci")]
    pub rel_diff: f64,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    n_elems: usize,
    points: &'a [SweepPoint],
}

/// First-mode frequency over the thickness-ratio grid, closed form against
/// the FEM oracle. The span is resolved once at the configured thicknesses
/// and held fixed across the sweep. Points run in parallel; rows keep grid
/// order.
pub fn sweep_points(config: &RunConfig) -> Result<(f64, Section, Vec<SweepPoint>)> {
    let (base, base_section) = resolve_layup(config)?;
    let length = base.length;
    let flags = fem_flags(config);
    let n_elems = config.fem.n_elems;
    let points = config
        .sweep_ratios()
        .into_par_iter()
        .map(|ratio| {
            let point = || -> Result<SweepPoint> {
                let (h1, h2) = config.sweep_thicknesses(ratio);
                let layup = config.layup_with(h1, h2, length)?;
                let section = layup.section();
                let analytic = frequency_closed_form(&section, length, 1)?.freq_hz;
                let fem = fem_flexural(&layup, &section, n_elems, flags, 1)?[0].freq_hz;
                Ok(SweepPoint {
                    ratio,
                    h1_m: h1,
                    h2_m: h2,
                    f1_analytic: analytic,
                    f1_fem: fem,
                    rel_diff: rel(fem, analytic),
                })
            };
            point().with_context(|| format!("sweep point at ratio {ratio}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((length, base_section, points))
}

pub fn cmd_sweep(config: &RunConfig, opts: Options) -> Result<Report> {
    let (length, section, mut points) = sweep_points(config)?;
    for p in &mut points {
        p.f1_analytic = opts.convert(p.f1_analytic);
        p.f1_fem = opts.convert(p.f1_fem);
    }
    let mut table = Table {
        header: vec![
            "ratio".into(),
            "h1_m".into(),
            "h2_m".into(),
            opts.col("1_analytic"),
            opts.col("1_fem"),
            "rel_diff".into(),
        ],
        rows: Vec::new(),
    };
    for p in &points {
        table.push(vec![
            p.ratio.into(),
            p.h1_m.into(),
            p.h2_m.into(),
            p.f1_analytic.into(),
            p.f1_fem.into(),
            p.rel_diff.into(),
        ]);
    }
    let body = SweepBody {
        n_elems: config.fem.n_elems,
        points: &points,
    };
    let json = envelope_json("sweep", config, length, &section, opts, body)?;
    Ok(Report { table, json })
}

#[derive(Serialize)]
struct CalibrateBody {
    mode: usize,
    #[serde(serialize_with = "sci")]
    target: f64,
    #[serde(serialize_with = "sci")]
    achieved: f64,
}

/// Span length whose closed-form frequency of `mode` equals `target_hz`.
/// Overrides take precedence over the config's `length.calibrate` block.
pub fn cmd_calibrate(
    config: &RunConfig,
    target_hz: Option<f64>,
    mode: Option<usize>,
    opts: Options,
) -> Result<Report> {
    let (config_target, config_mode) = match config.length {
        LengthSpec::Calibrate { calibrate, mode } => (Some(calibrate), mode),
        LengthSpec::Fixed(_) => (None, 1),
    };
    let target = target_hz.or(config_target).ok_or_else(|| {
        anyhow!("no calibration target: set length.calibrate or pass --target-hz")
    })?;
    ensure!(
        target > 0.0 && target.is_finite(),
        "calibration target must be positive, got {target:e}"
    );
    let mode = mode.unwrap_or(config_mode);
    ensure!(mode >= 1, "mode numbers start at 1");

    let layup = config.layup_with(config.h1, config.h2, 1.0)?;
    let section = layup.section();
    let length = calibrate_length(&section, target, mode)?;
    let achieved = frequency_closed_form(&section, length, mode)?.freq_hz;

    let mut table = Table {
        header: vec![
            "mode".into(),
            opts.col("target"),
            "length_m".into(),
            opts.col("achieved"),
        ],
        rows: Vec::new(),
    };
    table.push(vec![
        mode.into(),
        opts.convert(target).into(),
        length.into(),
        opts.convert(achieved).into(),
    ]);
    let body = CalibrateBody {
        mode,
        target: opts.convert(target),
        achieved: opts.convert(achieved),
    };
    let json = envelope_json("calibrate", config, length, &section, opts, body)?;
    Ok(Report { table, json })
}

#[derive(Serialize)]
struct FemRow {
    n_elems: usize,
    mode: usize,
    class: ModeClass,
    #[serde(serialize_with = "sci")]
    freq: f64,
    #[serde(serialize_with = "sci_opt")]
    rel_change: Option<f64>,
    #[serde(serialize_with = "sci_opt")]
    observed_order: Option<f64>,
    #[serde(serialize_with = "sci_opt")]
    extrapolated: Option<f64>,
}

#[derive(Serialize)]
struct FemBody {
    meshes: Vec<usize>,
    monotone: bool,
    non_monotone: Vec<(usize, usize)>,
    rows: Vec<FemRow>,
}

/// Convergence table of the first `count` FEM modes (axial included) over
/// the configured mesh sequence. With `dump`, the finest mesh's `K` and `M`
/// are written as triplets.
pub fn cmd_fem_report(
    config: &RunConfig,
    meshes: Option<&[usize]>,
    count: usize,
    dump: Option<&Path>,
    opts: Options,
) -> Result<Report> {
    ensure!(count >= 1, "at least one mode must be requested");
    let meshes = meshes.unwrap_or(&config.fem.meshes);
    ensure!(!meshes.is_empty(), "mesh list is empty");
    ensure!(
        meshes.iter().all(|&n| n >= 2),
        "every mesh needs at least 2 elements"
    );
    ensure!(
        meshes.windows(2).all(|w| w[0] < w[1]),
        "meshes must be strictly ascending"
    );
    let (layup, section) = resolve_layup(config)?;
    let flags = fem_flags(config);
    let report = convergence_report(&layup, &section, meshes, count, flags)?;

    if let Some(path) = dump {
        let finest = *meshes.last().expect("non-empty");
        let model = assemble(&layup, &section, finest, flags)?;
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        model
            .write_triplets(BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let mut table = Table {
        header: vec![
            "n_elems".into(),
            "mode".into(),
            "class".into(),
            if opts.rad_per_s {
                "omega_rad_s"
            } else {
                "f_hz"
            }
            .into(),
            "rel_change".into(),
            "observed_order".into(),
            opts.col("extrapolated"),
        ],
        rows: Vec::new(),
    };
    let mut rows = Vec::new();
    for r in &report.rows {
        let row = FemRow {
            n_elems: r.n_elems,
            mode: r.mode,
            class: r.class,
            freq: opts.convert(r.freq_hz),
            rel_change: r.rel_change,
            observed_order: r.observed_order,
            extrapolated: r.extrapolated_hz.map(|f| opts.convert(f)),
        };
        table.push(vec![
            row.n_elems.into(),
            row.mode.into(),
            row.class.as_str().into(),
            row.freq.into(),
            row.rel_change.into(),
            row.observed_order.into(),
            row.extrapolated.into(),
        ]);
        rows.push(row);
    }
    let body = FemBody {
        meshes: meshes.to_vec(),
        monotone: report.is_monotone(),
        non_monotone: report.non_monotone.clone(),
        rows,
    };
    let json = envelope_json("fem-report", config, layup.length, &section, opts, body)?;
    Ok(Report { table, json })
}
