//! The five subcommands. Each validates the config, computes a [`Report`],
//! and leaves emission to the caller.

use std::io::Write;

use rayon::prelude::*;
use serde_json::json;

use sivstrain_core::devicemodel::{
    load_spectra, load_strain_trajectory, strain_at, surrogate_strain, StrainTrajectory,
};
use sivstrain_core::fitkit::synthetic::{
    add_line_noise, axial_trajectory, spectra_along, transverse_trajectory, AXIAL_MAX_EZZ, TRANSVERSE_MAX_VOLTS,
};
use sivstrain_core::fitkit::{
    derive_f, fit_d, fit_t_parallel_diff, fit_t_perp_diff, full_extraction, FitEstimate, LinearFit, SpectraSeries,
    CALIBRATION_CAVEAT,
};
use sivstrain_core::levels::{optical_spectrum, OperatingPoint};
use sivstrain_core::phononkinetics::{dephasing_rate, gamma_down, gamma_up, spin_t1_rates, SpinFlipFactors};
use sivstrain_core::spincoupling::{cooperativity, microwave_g_factor, spin_phonon_g, QubitPair};
use sivstrain_core::{
    transform_strain, Frame, LevelModel, LineLabel, MagneticField, Manifold, StrainTensor, SymmetryStrain,
};

use crate::config::{FitStage, RunConfig, SweepVariable};
use crate::output::{Cell, Report};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Line positions at one operating point.
    Spectrum,
    /// Splittings and line positions along a sweep.
    Sweep,
    /// Susceptibility extraction from axial and transverse spectra.
    Fit,
    /// Phonon-limited orbital and spin rates against the ground-state splitting.
    Rates,
    /// Spin-strain coupling and cooperativity against static strain.
    Coupling,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Fit => "fit",
            Command::Rates => "rates",
            Command::Coupling => "coupling",
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<Report> {
    cfg.validate()?;
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Sweep => sweep(cfg),
        Command::Fit => fit(cfg),
        Command::Rates => rates(cfg),
        Command::Coupling => coupling(cfg),
    }
}

const FIELD_NOTE: &str = "B is taken from the config for every row; 0.17 T along [001] is the usual setting";

fn units(report: &mut Report) {
    report.meta(
        "units",
        "frequencies and rates in GHz, susceptibilities in GHz/strain, strain dimensionless",
    );
}

/// Defect-frame strain whose pure `E_gx` part gives ground splitting `delta`:
/// `e_xx = -e_yy = e / 2` with `e = E_gx / d_gs`.
pub fn strain_for_splitting(model: &LevelModel, delta: f64, frame: Frame) -> CliResult<(f64, StrainTensor)> {
    let s = SymmetryStrain::with_splitting(delta, model.lambda_so_gs)?;
    if model.sus_gs.d == 0.0 {
        return Err(CliError::compute(
            "invalid-parameter",
            "sus_gs.d must be nonzero for a splitting sweep",
        ));
    }
    let e = s.egx / model.sus_gs.d;
    Ok((e, StrainTensor::new([e / 2.0, -e / 2.0, 0.0, 0.0, 0.0, 0.0], frame)?))
}

fn spectrum(cfg: &RunConfig) -> CliResult<Report> {
    let strain = cfg.defect_strain()?;
    let field = cfg.defect_field()?;
    let op = OperatingPoint::solve(&cfg.model, &strain, &field)?;
    let lines = optical_spectrum(&cfg.model, &strain, &field)?;

    let mut report = Report::new(&["label", "frequency_ghz", "lower", "upper"]);
    units(&mut report);
    report.meta(
        "lines",
        "optical: absolute frequency, lower/upper index ground/excited eigenstates; spin: splitting within one manifold",
    );
    report.meta("delta_gs_ghz", crate::output::fmt_num(op.ground.branch_splitting()));
    report.meta("delta_es_ghz", crate::output::fmt_num(op.excited.branch_splitting()));
    for l in lines {
        report.push(vec![
            l.label.as_str().into(),
            l.frequency.into(),
            l.lower.into(),
            l.upper.into(),
        ]);
    }
    Ok(report)
}

type SweepPoint = (StrainTensor, OperatingPoint, Vec<(LineLabel, f64)>);

enum Source {
    Splitting,
    Trajectory(StrainTrajectory),
    Surrogate,
    Scale(StrainTensor),
}

fn sweep_strain(cfg: &RunConfig, source: &Source, x: f64) -> CliResult<StrainTensor> {
    let frame = cfg.defect_frame();
    Ok(match source {
        Source::Splitting => strain_for_splitting(&cfg.model, x, frame)?.1,
        Source::Trajectory(t) => transform_strain(&strain_at(t, x)?, frame),
        Source::Surrogate => transform_strain(&surrogate_strain(x, &cfg.beam)?, frame),
        Source::Scale(base) => base.scaled(x)?,
    })
}

fn sweep(cfg: &RunConfig) -> CliResult<Report> {
    let points = cfg.sweep.points()?;
    let field = cfg.defect_field()?;
    let source = match cfg.sweep.variable {
        SweepVariable::DeltaGs => Source::Splitting,
        SweepVariable::Voltage => match &cfg.io.trajectory {
            Some(p) => Source::Trajectory(load_strain_trajectory(require_input(p)?)?),
            None => Source::Surrogate,
        },
        SweepVariable::StrainScale => Source::Scale(cfg.defect_strain()?),
    };

    let evaluated: Vec<CliResult<SweepPoint>> = points
        .par_iter()
        .map(|&x| {
            let strain = sweep_strain(cfg, &source, x)?;
            let op = OperatingPoint::solve(&cfg.model, &strain, &field)?;
            let lines = optical_spectrum(&cfg.model, &strain, &field)?
                .into_iter()
                .map(|l| (l.label, l.frequency))
                .collect();
            Ok((strain, op, lines))
        })
        .collect();

    let mut report: Option<Report> = None;
    for (x, result) in points.iter().zip(evaluated) {
        let (strain, op, lines) = result?;
        let report = report.get_or_insert_with(|| {
            let mut columns = vec![
                "control", "delta_gs", "delta_es", "mean_zpl", "exx", "eyy", "ezz", "eyz", "ezx", "exy",
            ];
            columns.extend(lines.iter().map(|(l, _)| l.as_str()));
            let mut r = Report::new(&columns);
            units(&mut r);
            r.meta("control", format!("{:?}", cfg.sweep.variable).to_lowercase());
            r.meta("strain_frame", Frame::Defect(cfg.orientation).to_string());
            r.meta("field", FIELD_NOTE);
            r
        });
        let optical: Vec<f64> = lines.iter().filter(|(l, _)| l.is_optical()).map(|(_, f)| *f).collect();
        let mut row: Vec<Cell> = vec![
            (*x).into(),
            op.ground.branch_splitting().into(),
            op.excited.branch_splitting().into(),
            (optical.iter().sum::<f64>() / optical.len() as f64).into(),
        ];
        row.extend(strain.components().into_iter().map(Cell::from));
        row.extend(lines.iter().map(|(_, f)| Cell::from(*f)));
        report.push(row);
    }
    Ok(report.expect("at least one sweep point"))
}

fn require_input(path: &std::path::Path) -> CliResult<&std::path::Path> {
    if path.as_os_str() != "-" && !path.exists() {
        return Err(CliError::usage(
            "input-not-found",
            format!("{} does not exist", path.display()),
        ));
    }
    Ok(path)
}

/// Spectra for the fit: loaded from `io`, or generated from the config model.
fn fit_inputs(cfg: &RunConfig) -> CliResult<(SpectraSeries, SpectraSeries, &'static str)> {
    let f = &cfg.fit;
    let (axial, transverse, source) = match (&cfg.io.axial_spectra, &cfg.io.transverse_spectra) {
        (Some(a), Some(t)) => (
            load_spectra(require_input(a)?, Frame::Defect(f.axial_orientation))?,
            load_spectra(require_input(t)?, Frame::Defect(f.transverse_orientation))?,
            "files",
        ),
        (None, None) => {
            let (a, t) = synthetic_pair(cfg)?;
            (a, t, "synthetic from config model")
        }
        _ => {
            return Err(CliError::usage(
                "usage",
                "io.axial_spectra and io.transverse_spectra must be given together",
            ))
        }
    };
    if f.noise_ghz > 0.0 {
        Ok((
            add_line_noise(&axial, f.noise_ghz, cfg.seed)?,
            add_line_noise(&transverse, f.noise_ghz, cfg.seed.wrapping_add(1))?,
            source,
        ))
    } else {
        Ok((axial, transverse, source))
    }
}

/// Zero-field axial and transverse sweeps of the config model.
pub fn synthetic_pair(cfg: &RunConfig) -> CliResult<(SpectraSeries, SpectraSeries)> {
    let zero = MagneticField::zero(Frame::Crystal);
    let steps = cfg.fit.steps;
    let axial = spectra_along(
        &cfg.model,
        &axial_trajectory(steps, AXIAL_MAX_EZZ)?,
        cfg.fit.axial_orientation,
        &zero,
    )?;
    let transverse = spectra_along(
        &cfg.model,
        &transverse_trajectory(&cfg.beam, steps, TRANSVERSE_MAX_VOLTS)?,
        cfg.fit.transverse_orientation,
        &zero,
    )?;
    Ok((axial, transverse))
}

fn linear_estimate(name: &str, stage: u8, fit: &LinearFit) -> FitEstimate {
    FitEstimate {
        parameter: name.into(),
        value_ghz_per_strain: fit.slope,
        std_err: fit.slope_std_err,
        stage,
        residual_norm: fit.residual_norm,
        warnings: fit.warnings.clone(),
    }
}

fn fit(cfg: &RunConfig) -> CliResult<Report> {
    let (axial, transverse, source) = fit_inputs(cfg)?;
    let m = &cfg.model;
    let mut model = None;
    let estimates = match cfg.fit.stage {
        FitStage::All => {
            let ex = full_extraction(&axial, &transverse, &cfg.hr, &cfg.moduli, m)?;
            model = Some(ex.model);
            ex.estimates
        }
        FitStage::TPar => vec![linear_estimate("t_par_diff", 1, &fit_t_parallel_diff(&axial)?)],
        FitStage::D => vec![
            fit_d(&transverse, Manifold::Ground, m.lambda_so_gs)?,
            fit_d(&transverse, Manifold::Excited, m.lambda_so_es)?,
        ],
        FitStage::TPerp => {
            let t_par = m.sus_es.t_par - m.sus_gs.t_par;
            vec![linear_estimate("t_perp_diff", 3, &fit_t_perp_diff(&transverse, t_par)?)]
        }
        FitStage::F => [
            ("f_gs", m.sus_gs.d, cfg.hr.ground.b),
            ("f_es", m.sus_es.d, cfg.hr.excited.b),
        ]
        .into_iter()
        .map(|(name, d, b)| {
            Ok(FitEstimate {
                parameter: name.into(),
                value_ghz_per_strain: derive_f(d, b, &cfg.moduli)?,
                std_err: 0.0,
                stage: 4,
                residual_norm: 0.0,
                warnings: Vec::new(),
            })
        })
        .collect::<CliResult<_>>()?,
    };

    let mut report = Report::new(&["parameter", "value_ghz_per_strain", "std_err", "stage", "residual_norm"]);
    units(&mut report);
    report.meta("spectra", source);
    report.meta(
        "rows",
        format!("axial {}, transverse {}", axial.len(), transverse.len()),
    );
    report.meta("calibration_caveat", CALIBRATION_CAVEAT);
    let warnings: Vec<String> = estimates
        .iter()
        .flat_map(|e| e.warnings.iter().map(move |w| format!("{}: {w}", e.parameter)))
        .collect();
    for w in &warnings {
        report.meta("warning", w.clone());
    }
    for e in &estimates {
        report.push(vec![
            e.parameter.as_str().into(),
            e.value_ghz_per_strain.into(),
            e.std_err.into(),
            (e.stage as usize).into(),
            e.residual_norm.into(),
        ]);
    }
    let rounded_estimates: Vec<_> = estimates
        .iter()
        .map(|e| {
            json!({
                "parameter": e.parameter,
                "value_ghz_per_strain": crate::output::rounded(e.value_ghz_per_strain),
                "std_err": crate::output::rounded(e.std_err),
                "stage": e.stage,
                "residual_norm": crate::output::rounded(e.residual_norm),
            })
        })
        .collect();
    report.extra.insert("estimates".into(), json!(rounded_estimates));
    if let Some(model) = model {
        report
            .extra
            .insert("model".into(), serde_json::to_value(model).expect("model serializes"));
    }
    report
        .extra
        .insert("calibration_caveat".into(), json!(CALIBRATION_CAVEAT));
    report.extra.insert("warnings".into(), json!(warnings));
    Ok(report)
}

fn rates(cfg: &RunConfig) -> CliResult<Report> {
    if cfg.sweep.variable != SweepVariable::DeltaGs {
        return Err(CliError::compute(
            "invalid-parameter",
            "rates sweeps require sweep.variable = delta_gs",
        ));
    }
    let r = &cfg.rates;
    let rows: Vec<CliResult<Vec<Cell>>> = cfg
        .sweep
        .points()?
        .par_iter()
        .map(|&delta| {
            let factors = SpinFlipFactors::inverse_splitting(r.flip_scale, delta, r.d_spin_over_d)?;
            let t1 = spin_t1_rates(r.omega_s, delta, &cfg.rate, &factors)?;
            Ok(vec![
                delta.into(),
                gamma_up(delta, &cfg.rate)?.into(),
                gamma_down(delta, &cfg.rate)?.into(),
                dephasing_rate(delta, &cfg.rate, r.dephasing_floor)?.into(),
                t1.single.into(),
                t1.orbach.into(),
                t1.offres.into(),
                t1.total.into(),
            ])
        })
        .collect();

    let mut report = Report::new(&[
        "delta_ghz",
        "gamma_up",
        "gamma_down",
        "dephasing",
        "t1_single",
        "t1_orbach",
        "t1_offres",
        "t1_total",
    ]);
    units(&mut report);
    report.meta("d_flip", "d_flip / d = min(flip_scale / delta, 1)");
    for row in rows {
        report.push(row?);
    }
    Ok(report)
}

fn coupling(cfg: &RunConfig) -> CliResult<Report> {
    if cfg.sweep.variable != SweepVariable::DeltaGs {
        return Err(CliError::compute(
            "invalid-parameter",
            "coupling sweeps require sweep.variable = delta_gs",
        ));
    }
    let c = &cfg.coupling;
    c.mode.validate()?;
    let field = cfg.defect_field()?;
    let frame = cfg.defect_frame();
    let d = cfg.model.sus_gs.d;
    let rows: Vec<CliResult<Vec<Cell>>> = cfg
        .sweep
        .points()?
        .par_iter()
        .map(|&delta| {
            let (e, strain) = strain_for_splitting(&cfg.model, delta, frame)?;
            let pair = QubitPair::from_strain(&cfg.model, &strain, &field)?;
            let d_spin = c.d_spin_override.unwrap_or_else(|| pair.d_spin(d, c.ac_direction));
            let g = spin_phonon_g(d_spin, &c.mode)?;
            Ok(vec![
                e.into(),
                delta.into(),
                pair.omega_s.into(),
                d_spin.into(),
                pair.t_spin(d, c.ac_direction).into(),
                microwave_g_factor(&cfg.model, &strain, field.vector.z)?.into(),
                g.into(),
                cooperativity(g, &c.mode, c.gamma_spin)?.into(),
            ])
        })
        .collect();

    let mut report = Report::new(&[
        "static_strain",
        "delta_gs",
        "omega_s",
        "d_spin",
        "t_spin",
        "g_factor",
        "g_coupling",
        "cooperativity",
    ]);
    units(&mut report);
    report.meta("static_strain", "e with defect-frame e_xx = -e_yy = e/2");
    report.meta("field", FIELD_NOTE);
    report.meta("g_factor", "microwave g-factor with the axial field component only");
    report.meta(
        "cooperativity",
        "C = 4 g^2 / (kappa gamma_spin (n_th + 1)), kappa = omega_m / Q_m",
    );
    if c.d_spin_override.is_some() {
        report.meta("d_spin", "fixed by d_spin_override");
    }
    if !c.note.is_empty() {
        report.meta("note", c.note.clone());
    }
    for row in rows {
        report.push(row?);
    }
    Ok(report)
}

/// Writes a spectra series in the loader's schema, strain columns included,
/// with shortest round-trip number formatting.
pub fn write_spectra<W: Write>(out: &mut W, series: &SpectraSeries, comment: &str) -> std::io::Result<()> {
    for line in comment.lines() {
        writeln!(out, "# {line}")?;
    }
    let labels: Vec<LineLabel> = series
        .rows()
        .first()
        .map(|r| r.lines.keys().copied().collect())
        .unwrap_or_default();
    let mut header = vec!["control_v".to_owned()];
    header.extend(labels.iter().map(|l| format!("line_{l}")));
    header.extend(
        sivstrain_core::devicemodel::STRAIN_COLUMNS
            .iter()
            .map(|s| s.to_string()),
    );
    writeln!(out, "{}", header.join(","))?;
    for row in series.rows() {
        let mut cells = vec![row.control.to_string()];
        cells.extend(labels.iter().map(|l| row.lines[l].to_string()));
        if let Some(e) = row.strain {
            cells.extend(e.components().iter().map(|&c| exact_strain(c)));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Shortest round-trip form in exponent notation; zero of either sign as `0`.
pub fn exact_strain(c: f64) -> String {
    if c == 0.0 {
        "0".into()
    } else {
        format!("{c:e}")
    }
}
