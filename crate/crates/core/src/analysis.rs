//! Pipeline orchestration: empirical barrier-delay extraction, model sweeps
//! over effective charge, agreement metrics, and limit diagnostics.
//!
//! Grids are strictly increasing, so a sweep curve whose atomic field
//! strength cuts the grid keeps a prefix of the shared grid; comparisons walk
//! indices valid for the respective curves.

use std::path::Path;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::fitting::{eval_curve, fit, subtract_curves, Curve, FitBasis};
use crate::model::AtomicSystem;
use crate::numfmt::{compact, g17, json_escape};
use crate::units::TimeUnit;

/// One model curve of a Z_eff sweep; the grid is the retained prefix of the
/// shared grid, and `dropped` lists the grid points above this curve's F_a.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    /// Display label, "zeff=<value>".
    pub label: String,
    /// Effective charge of this curve.
    pub z_eff: f64,
    /// Barrier delay evaluated on the retained grid prefix, atomic units.
    pub curve: Curve,
    /// Grid points dropped because they exceed this curve's F_a.
    pub dropped: Vec<f64>,
}

/// Agreement metrics of the extracted barrier curve against one model curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMetrics {
    /// Label of the model curve the metrics refer to.
    pub label: String,
    /// Root-mean-square difference over the valid points.
    pub rmse: f64,
    /// Largest absolute difference.
    pub max_abs: f64,
    /// Largest |difference| / |model value|, over points with nonzero model value.
    pub max_rel: f64,
    /// Field strength where the largest absolute difference occurs.
    pub f_at_max: f64,
}

/// Full comparison of an extracted barrier curve against a model sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// The shared field grid.
    pub f_grid: Vec<f64>,
    /// Extracted barrier curve (data-fit subtraction).
    pub barrier_exp: Curve,
    /// Model curves, prefix-aligned to the shared grid.
    pub model_curves: Vec<SweepCurve>,
    /// Optional Larmor-clock curve on the shared grid.
    pub lc_curve: Option<Curve>,
    /// Per-model-curve agreement metrics.
    pub metrics: Vec<CurveMetrics>,
    /// Smallest grid F where the closest model curve switches, if it does.
    pub crossover_f: Option<f64>,
}

/// One row of the limit diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    /// Field strength of the row.
    pub f: f64,
    /// Thick-barrier ratio lambda = tau_db / tau_dion.
    pub lambda: f64,
    /// |tau_ti - 1/(4 I_p)|, distance to the weak-measurement limit.
    pub backreaction_gap: f64,
    /// tau_db / d_b; constant 1/(8 Z_eff), taken by continuity at d_b = 0.
    pub delay_per_width: f64,
    /// True in the thick-barrier regime, lambda > 0.99.
    pub thick_barrier: bool,
}

/// Limit diagnostics over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    /// Weak-measurement back-reaction 1/(4 I_p) of the system.
    pub backreaction: f64,
    /// One row per grid point.
    pub rows: Vec<LimitRow>,
}

/// Fits both datasets, evaluates them on `f_grid`, and subtracts
/// (adiabatic minus nonadiabatic). Both datasets are reconciled to atomic
/// units before fitting, so the result is in atomic units.
pub fn barrier_extraction(
    adiabatic: &Dataset,
    nonadiabatic: &Dataset,
    basis: FitBasis,
    f_grid: &[f64],
) -> Result<Curve> {
    let ad = adiabatic.converted_to(TimeUnit::Atomic);
    let non = nonadiabatic.converted_to(TimeUnit::Atomic);
    let fit_ad = fit(&ad, basis)?;
    let fit_non = fit(&non, basis)?;
    let curve_ad = eval_curve(&fit_ad, f_grid)?;
    let curve_non = eval_curve(&fit_non, f_grid)?;
    subtract_curves(&curve_ad, &curve_non)
}

/// Evaluates the barrier delay for each effective charge in `z_list` on the
/// shared grid, holding I_p fixed. Points above a curve's own F_a are dropped
/// (they form a suffix of the strictly increasing grid) and recorded.
pub fn model_sweep(sys_base: &AtomicSystem, z_list: &[f64], f_grid: &[f64]) -> Result<Vec<SweepCurve>> {
    if z_list.is_empty() {
        return Err(Error::Domain("sweep requires at least one effective charge".into()));
    }
    let mut curves = Vec::with_capacity(z_list.len());
    for &z in z_list {
        let sys = AtomicSystem::new(sys_base.ip(), z)?;
        let f_a = sys.atomic_field_strength();
        let retained: Vec<f64> = f_grid.iter().copied().filter(|&f| f <= f_a).collect();
        let dropped: Vec<f64> = f_grid.iter().copied().filter(|&f| f > f_a).collect();
        if retained.is_empty() {
            return Err(Error::Domain(format!(
                "no grid point lies at or below the atomic field strength {f_a} for zeff={z}"
            )));
        }
        let values: Vec<f64> = retained.iter().map(|&f| sys.barrier_delay(f)).collect::<Result<_>>()?;
        let mask = vec![false; retained.len()];
        curves.push(SweepCurve {
            label: format!("zeff={}", compact(z)),
            z_eff: z,
            curve: Curve::new(retained, values, TimeUnit::Atomic, mask)?,
            dropped,
        });
    }
    Ok(curves)
}

/// Builds the comparison report. Metrics use only points valid for the
/// respective model curve and, unless `allow_extrapolation`, not flagged as
/// extrapolated on either curve. The crossover is the smallest grid F where
/// the closest model curve (by absolute difference) changes.
pub fn compare(
    barrier_exp: &Curve,
    model_curves: &[SweepCurve],
    lc_curve: Option<&Curve>,
    allow_extrapolation: bool,
) -> Result<ComparisonReport> {
    if model_curves.is_empty() {
        return Err(Error::Domain("comparison requires at least one model curve".into()));
    }
    if let Some(lc) = lc_curve {
        if lc.time_unit != barrier_exp.time_unit {
            return Err(Error::UnitMismatch);
        }
        if lc.f_grid != barrier_exp.f_grid {
            return Err(Error::GridMismatch);
        }
    }
    for m in model_curves {
        if m.curve.time_unit != barrier_exp.time_unit {
            return Err(Error::UnitMismatch);
        }
        let len = m.curve.len();
        if len > barrier_exp.len() || m.curve.f_grid[..] != barrier_exp.f_grid[..len] {
            return Err(Error::GridMismatch);
        }
    }

    let point_ok = |mask: &[bool], i: usize| allow_extrapolation || !mask[i];
    let mut metrics = Vec::with_capacity(model_curves.len());
    for m in model_curves {
        let mut count = 0usize;
        let mut sum_sq = 0.0;
        let mut max_abs = 0.0f64;
        let mut f_at_max = f64::NAN;
        let mut max_rel = 0.0f64;
        for i in 0..m.curve.len() {
            if !point_ok(&barrier_exp.extrapolated_mask, i) || !point_ok(&m.curve.extrapolated_mask, i) {
                continue;
            }
            let d = barrier_exp.values[i] - m.curve.values[i];
            count += 1;
            sum_sq += d * d;
            if d.abs() > max_abs || count == 1 {
                max_abs = d.abs();
                f_at_max = barrier_exp.f_grid[i];
            }
            let mv = m.curve.values[i];
            if mv != 0.0 {
                max_rel = max_rel.max(d.abs() / mv.abs());
            }
        }
        if count == 0 {
            return Err(Error::GridMismatch);
        }
        metrics.push(CurveMetrics {
            label: m.label.clone(),
            rmse: (sum_sq / count as f64).sqrt(),
            max_abs,
            max_rel,
            f_at_max,
        });
    }

    let mut crossover_f = None;
    if model_curves.len() > 1 {
        let shared_len = model_curves.iter().map(|m| m.curve.len()).min().unwrap_or(0);
        let mut prev_best: Option<usize> = None;
        for i in 0..shared_len {
            if !point_ok(&barrier_exp.extrapolated_mask, i)
                || model_curves.iter().any(|m| !point_ok(&m.curve.extrapolated_mask, i))
            {
                continue;
            }
            let mut best = 0usize;
            let mut best_diff = f64::INFINITY;
            for (k, m) in model_curves.iter().enumerate() {
                let d = (barrier_exp.values[i] - m.curve.values[i]).abs();
                if d < best_diff {
                    best_diff = d;
                    best = k;
                }
            }
            if let Some(p) = prev_best {
                if p != best && crossover_f.is_none() {
                    crossover_f = Some(barrier_exp.f_grid[i]);
                }
            }
            prev_best = Some(best);
        }
    }

    Ok(ComparisonReport {
        f_grid: barrier_exp.f_grid.clone(),
        barrier_exp: barrier_exp.clone(),
        model_curves: model_curves.to_vec(),
        lc_curve: lc_curve.cloned(),
        metrics,
        crossover_f,
    })
}

/// Tabulates the thick-barrier and weak-measurement diagnostics over a grid.
pub fn limit_report(sys: &AtomicSystem, f_grid: &[f64]) -> Result<LimitReport> {
    let backreaction = sys.weak_measurement_backreaction();
    let inv_8z = 1.0 / (8.0 * sys.z_eff());
    let mut rows = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        let d = sys.delay_breakdown(f)?;
        let g = sys.barrier_geometry(f)?;
        let delay_per_width = if g.d_b > 0.0 { d.tau_db / g.d_b } else { inv_8z };
        rows.push(LimitRow {
            f,
            lambda: d.lambda,
            backreaction_gap: (d.tau_ti - backreaction).abs(),
            delay_per_width,
            thick_barrier: d.lambda > 0.99,
        });
    }
    Ok(LimitReport { backreaction, rows })
}

impl ComparisonReport {
    /// JSON text of the metrics and crossover (fixed key order, 17-digit numbers).
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        match self.crossover_f {
            Some(f) => out.push_str(&format!("  \"crossover_f\": {},\n", g17(f))),
            None => out.push_str("  \"crossover_f\": null,\n"),
        }
        out.push_str("  \"metrics\": [\n");
        for (i, m) in self.metrics.iter().enumerate() {
            out.push_str(&format!(
                "    {{\"label\": \"{}\", \"rmse\": {}, \"max_abs\": {}, \"max_rel\": {}, \"f_at_max\": {}}}{}\n",
                json_escape(&m.label),
                g17(m.rmse),
                g17(m.max_abs),
                g17(m.max_rel),
                g17(m.f_at_max),
                if i + 1 < self.metrics.len() { "," } else { "" }
            ));
        }
        out.push_str("  ]\n}\n");
        out
    }

    /// Writes the bundle: report.json, one CSV per curve, and manifest.json
    /// mapping curve labels to filenames.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut entries: Vec<(String, String)> = Vec::new();

        let barrier_file = "barrier_exp.csv".to_string();
        std::fs::write(dir.join(&barrier_file), self.barrier_exp.to_csv())?;
        entries.push(("barrier_exp".into(), barrier_file));

        if let Some(lc) = &self.lc_curve {
            let lc_file = "lc.csv".to_string();
            std::fs::write(dir.join(&lc_file), lc.to_csv())?;
            entries.push(("lc".into(), lc_file));
        }

        for m in &self.model_curves {
            let file = format!("model_{}.csv", sanitize(&m.label));
            std::fs::write(dir.join(&file), m.curve.to_csv())?;
            entries.push((m.label.clone(), file));
        }

        let mut manifest = String::from("{\n");
        for (i, (label, file)) in entries.iter().enumerate() {
            manifest.push_str(&format!(
                "  \"{}\": \"{}\"{}\n",
                json_escape(label),
                json_escape(file),
                if i + 1 < entries.len() { "," } else { "" }
            ));
        }
        manifest.push_str("}\n");
        std::fs::write(dir.join("manifest.json"), manifest)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        Ok(())
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
