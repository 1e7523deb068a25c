//! Staged extraction of strain susceptibilities from spectra measured along
//! a strain sweep: mean-ZPL slope, branch-splitting fits, the transverse
//! A_1g slope, and closure of `f` through the Hughes-Runciman relations.

mod lm;
pub mod synthetic;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use lm::{levenberg_marquardt, LmOptions, LmSolution};

use crate::error::{Error, Result};
use crate::levels::{LevelModel, LineLabel, Manifold, Susceptibilities};
use crate::tensorframes::StrainTensor;

/// Caveat attached to every fit report; strain calibration errors are not
/// propagated.
pub const CALIBRATION_CAVEAT: &str = "strain values come from an external calibration; \
     emitter depth and implantation channeling uncertainties are not included in std_err";

/// Minimum |e_zz| / |e_xx + e_yy| for a clean axial series.
pub const AXIAL_PURITY: f64 = 10.0;
const MIN_SPAN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraRow {
    pub control: f64,
    pub lines: BTreeMap<LineLabel, f64>,
    /// Defect-frame strain at this control value, if known.
    pub strain: Option<StrainTensor>,
}

impl SpectraRow {
    fn line(&self, label: LineLabel) -> Result<f64> {
        self.lines
            .get(&label)
            .copied()
            .ok_or_else(|| Error::MissingColumn(format!("line_{label}")))
    }

    fn abcd(&self) -> Result<[f64; 4]> {
        Ok([
            self.line(LineLabel::A)?,
            self.line(LineLabel::B)?,
            self.line(LineLabel::C)?,
            self.line(LineLabel::D)?,
        ])
    }

    /// Mean of the four zero-field lines.
    pub fn mean_zpl(&self) -> Result<f64> {
        Ok(self.abcd()?.iter().sum::<f64>() / 4.0)
    }

    /// Orbital branch splitting of one manifold from the four lines.
    pub fn splitting(&self, manifold: Manifold) -> Result<f64> {
        let [a, b, c, d] = self.abcd()?;
        Ok(match manifold {
            Manifold::Ground => 0.5 * ((a - b) + (c - d)),
            Manifold::Excited => 0.5 * ((a - c) + (b - d)),
        })
    }

    fn require_strain(&self) -> Result<StrainTensor> {
        let strain = self.strain.ok_or_else(|| Error::MissingColumn("exx".into()))?;
        strain.require_defect()?;
        Ok(strain)
    }
}

/// Spectra along a sweep with strictly increasing control values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraSeries {
    rows: Vec<SpectraRow>,
}

impl SpectraSeries {
    pub fn new(rows: Vec<SpectraRow>) -> Result<Self> {
        for (i, w) in rows.windows(2).enumerate() {
            if w[1].control <= w[0].control {
                return Err(Error::NonMonotonic {
                    row: i + 2,
                    value: w[1].control,
                    previous: w[0].control,
                });
            }
        }
        Ok(SpectraSeries { rows })
    }

    pub fn rows(&self) -> &[SpectraRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn require_rows(&self, needed: usize) -> Result<()> {
        if self.rows.len() < needed {
            return Err(Error::Underdetermined {
                rows: self.rows.len(),
                needed,
            });
        }
        Ok(())
    }
}

/// Stress-response coefficients, GHz/GPa.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HughesRunciman {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HrPair {
    pub ground: HughesRunciman,
    pub excited: HughesRunciman,
}

impl Default for HrPair {
    /// Measured `B` values of 484 and 630 GHz/GPa; they do not close onto the fitted `f` with the
    /// default moduli.
    fn default() -> Self {
        HrPair::from_b(484.0, 630.0)
    }
}

impl HrPair {
    /// Only `B` enters the closure for `f`.
    pub fn from_b(b_ground: f64, b_excited: f64) -> Self {
        HrPair {
            ground: HughesRunciman {
                b: b_ground,
                ..Default::default()
            },
            excited: HughesRunciman {
                b: b_excited,
                ..Default::default()
            },
        }
    }
}

/// Cubic elastic moduli, GPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElasticModuli {
    pub c11: f64,
    pub c12: f64,
    pub c44: f64,
}

impl Default for ElasticModuli {
    fn default() -> Self {
        ElasticModuli {
            c11: 1076.0,
            c12: 125.0,
            c44: 577.0,
        }
    }
}

impl ElasticModuli {
    pub fn validate(&self) -> Result<()> {
        if !(self.c11 > self.c12 && self.c12 > 0.0 && self.c44 > 0.0 && self.c11.is_finite() && self.c44.is_finite()) {
            return Err(Error::invalid(
                "elastic moduli",
                format!("need c11 > c12 > 0 and c44 > 0, got {self:?}"),
            ));
        }
        Ok(())
    }
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_std_err: f64,
    pub intercept: f64,
    pub intercept_std_err: f64,
    pub residual_norm: f64,
    pub warnings: Vec<String>,
}

/// One extracted parameter as written to fit reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEstimate {
    pub parameter: String,
    pub value_ghz_per_strain: f64,
    pub std_err: f64,
    pub stage: u8,
    pub residual_norm: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

fn ols(x: &[f64], y: &[f64], what: &str) -> Result<LinearFit> {
    let n = x.len();
    if n < 3 {
        return Err(Error::Underdetermined { rows: n, needed: 3 });
    }
    let span = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < MIN_SPAN {
        return Err(Error::IllConditioned(format!(
            "{what} span {span:e} is below {MIN_SPAN:e}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    Ok(LinearFit {
        slope,
        slope_std_err: (s2 / sxx).sqrt(),
        intercept,
        intercept_std_err: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        residual_norm: rss.sqrt(),
        warnings: Vec::new(),
    })
}

/// Slope of the mean ZPL against `e_zz` for an axially loaded emitter:
/// `t_par,es - t_par,gs`. The intercept is the zero-strain mean ZPL.
pub fn fit_t_parallel_diff(series: &SpectraSeries) -> Result<LinearFit> {
    series.require_rows(3)?;
    let mut x = Vec::with_capacity(series.len());
    let mut y = Vec::with_capacity(series.len());
    let mut worst_purity = f64::INFINITY;
    for row in series.rows() {
        let e = row.require_strain()?;
        let perp = (e.xx() + e.yy()).abs();
        if perp > 0.0 {
            worst_purity = worst_purity.min(e.zz().abs() / perp);
        }
        x.push(e.zz());
        y.push(row.mean_zpl()?);
    }
    let mut fit = ols(&x, &y, "e_zz")?;
    if worst_purity < AXIAL_PURITY {
        fit.warnings.push(format!(
            "|e_zz| / |e_xx + e_yy| drops to {worst_purity:.3}; transverse A_1g strain biases the slope"
        ));
    }
    Ok(fit)
}

/// `sqrt((e_xx - e_yy)^2 + 4 e_xy^2)`, the shear-free E_g magnitude per unit `d`.
pub fn transverse_strain(e: &StrainTensor) -> f64 {
    (e.xx() - e.yy()).hypot(2.0 * e.xy())
}

/// Fits `Delta = sqrt(lambda^2 + 4 d^2 e_perp^2)` for `d` with `lambda`
/// held fixed. Shear strain is neglected.
pub fn fit_d(series: &SpectraSeries, manifold: Manifold, lambda_so: f64) -> Result<FitEstimate> {
    series.require_rows(3)?;
    let mut eps = Vec::with_capacity(series.len());
    let mut delta = Vec::with_capacity(series.len());
    for row in series.rows() {
        eps.push(transverse_strain(&row.require_strain()?));
        delta.push(row.splitting(manifold)?);
    }
    let (i_max, &e_max) = eps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least three rows");
    if e_max < MIN_SPAN * 1e-2 {
        return Err(Error::IllConditioned("transverse strain is zero on every row".into()));
    }
    let d0 = ((delta[i_max] - lambda_so) / (2.0 * e_max)).abs().max(1.0 / e_max);
    let l2 = lambda_so * lambda_so;
    let model = |d: f64, e: f64| (l2 + 4.0 * d * d * e * e).sqrt();

    // work in units of d0 so the step criterion is scale free
    let residual = |p: &DVector<f64>| {
        DVector::from_iterator(
            eps.len(),
            eps.iter().zip(&delta).map(|(&e, &y)| model(p[0] * d0, e) - y),
        )
    };
    let jacobian = |p: &DVector<f64>| {
        DMatrix::from_iterator(
            eps.len(),
            1,
            eps.iter().map(|&e| {
                let d = p[0] * d0;
                4.0 * d * e * e / model(d, e) * d0
            }),
        )
    };
    let sol = levenberg_marquardt(residual, jacobian, DVector::from_element(1, 1.0), LmOptions::default())?;
    let suffix = match manifold {
        Manifold::Ground => "gs",
        Manifold::Excited => "es",
    };
    Ok(FitEstimate {
        parameter: format!("d_{suffix}"),
        value_ghz_per_strain: sol.x[0].abs() * d0,
        std_err: sol.covariance[(0, 0)].max(0.0).sqrt() * d0,
        stage: 2,
        residual_norm: sol.residual_norm,
        warnings: Vec::new(),
    })
}

/// Slope of `ZPL - t_par_diff e_zz` against `e_xx + e_yy`: `t_perp,es - t_perp,gs`.
pub fn fit_t_perp_diff(series: &SpectraSeries, t_par_diff: f64) -> Result<LinearFit> {
    series.require_rows(3)?;
    let mut x = Vec::with_capacity(series.len());
    let mut y = Vec::with_capacity(series.len());
    for row in series.rows() {
        let e = row.require_strain()?;
        x.push(e.xx() + e.yy());
        y.push(row.mean_zpl()? - t_par_diff * e.zz());
    }
    ols(&x, &y, "e_xx + e_yy")
}

/// Shear susceptibility from `d` and the Hughes-Runciman `B`:
/// `C = (d - (c11 - c12) B) / c44`, `f = sqrt 2 (c44 C - 2 (c11 - c12) B)`.
pub fn derive_f(d: f64, hr_b: f64, moduli: &ElasticModuli) -> Result<f64> {
    let c = hr_c_from_d(d, hr_b, moduli)?;
    Ok(f_from_hr(hr_b, c, moduli))
}

/// Hughes-Runciman `C` consistent with `d` and `B`.
pub fn hr_c_from_d(d: f64, hr_b: f64, moduli: &ElasticModuli) -> Result<f64> {
    moduli.validate()?;
    Ok((d - (moduli.c11 - moduli.c12) * hr_b) / moduli.c44)
}

/// `d = (c11 - c12) B + c44 C`.
pub fn d_from_hr(hr_b: f64, hr_c: f64, moduli: &ElasticModuli) -> f64 {
    (moduli.c11 - moduli.c12) * hr_b + moduli.c44 * hr_c
}

/// `f = sqrt 2 (c44 C - 2 (c11 - c12) B)`.
pub fn f_from_hr(hr_b: f64, hr_c: f64, moduli: &ElasticModuli) -> f64 {
    std::f64::consts::SQRT_2 * (moduli.c44 * hr_c - 2.0 * (moduli.c11 - moduli.c12) * hr_b)
}

/// The `B` for which [`derive_f`] maps `d` onto `f`.
pub fn hr_b_for(d: f64, f: f64, moduli: &ElasticModuli) -> Result<f64> {
    moduli.validate()?;
    Ok((d - f / std::f64::consts::SQRT_2) / (3.0 * (moduli.c11 - moduli.c12)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    pub model: LevelModel,
    pub estimates: Vec<FitEstimate>,
    pub calibration_caveat: &'static str,
}

/// Runs the four stages and assembles a model. `base` supplies everything
/// that is not fitted (spin-orbit couplings, gyromagnetic ratios, pairing).
pub fn full_extraction(
    axial: &SpectraSeries,
    transverse: &SpectraSeries,
    hr: &HrPair,
    moduli: &ElasticModuli,
    base: &LevelModel,
) -> Result<Extraction> {
    let stage1 = fit_t_parallel_diff(axial).map_err(|e| e.at_stage(1, "axial mean-ZPL slope"))?;
    let fit = |m| fit_d(transverse, m, base.lambda_so(m)).map_err(|e| e.at_stage(2, "branch-splitting fit"));
    let d_gs = fit(Manifold::Ground)?;
    let d_es = fit(Manifold::Excited)?;
    let stage3 = fit_t_perp_diff(transverse, stage1.slope).map_err(|e| e.at_stage(3, "transverse mean-ZPL slope"))?;
    let closure = |d: f64, b: f64| derive_f(d, b, moduli).map_err(|e| e.at_stage(4, "Hughes-Runciman closure"));
    let f_gs = closure(d_gs.value_ghz_per_strain, hr.ground.b)?;
    let f_es = closure(d_es.value_ghz_per_strain, hr.excited.b)?;

    let f_err = |d: &FitEstimate| std::f64::consts::SQRT_2 * d.std_err;
    let estimates = vec![
        FitEstimate {
            parameter: "t_par_diff".into(),
            value_ghz_per_strain: stage1.slope,
            std_err: stage1.slope_std_err,
            stage: 1,
            residual_norm: stage1.residual_norm,
            warnings: stage1.warnings.clone(),
        },
        d_gs.clone(),
        d_es.clone(),
        FitEstimate {
            parameter: "t_perp_diff".into(),
            value_ghz_per_strain: stage3.slope,
            std_err: stage3.slope_std_err,
            stage: 3,
            residual_norm: stage3.residual_norm,
            warnings: stage3.warnings.clone(),
        },
        FitEstimate {
            parameter: "f_gs".into(),
            value_ghz_per_strain: f_gs,
            std_err: f_err(&d_gs),
            stage: 4,
            residual_norm: 0.0,
            warnings: Vec::new(),
        },
        FitEstimate {
            parameter: "f_es".into(),
            value_ghz_per_strain: f_es,
            std_err: f_err(&d_es),
            stage: 4,
            residual_norm: 0.0,
            warnings: Vec::new(),
        },
    ];
    let model = LevelModel {
        sus_gs: Susceptibilities {
            t_perp: 0.0,
            t_par: 0.0,
            d: d_gs.value_ghz_per_strain,
            f: f_gs,
        },
        sus_es: Susceptibilities {
            t_perp: stage3.slope,
            t_par: stage1.slope,
            d: d_es.value_ghz_per_strain,
            f: f_es,
        },
        zpl0: stage1.intercept,
        ..*base
    };
    Ok(Extraction {
        model,
        estimates,
        calibration_caveat: CALIBRATION_CAVEAT,
    })
}
