//! Reproduction grids: mean p-values under the true model, sizes needed to
//! reject normality, and the family's kurtosis/skewness.

use crate::distributions::SkewNormalShape;
use crate::gjb::Calibration;
use crate::io::{TableReport, TableRow, SCHEMA_VERSION};
use crate::moments::{analytic_shape_statistics, shape_statistics, sn_raw_moments};
use crate::rng::child_seed;
use crate::testing::{
    rejection_size_search, simulate_true_model, CampaignConfig, SizeSearchOptions,
};
use crate::Result;

pub const TRUE_MODEL_ALPHAS: [f64; 6] = [0.1, 0.5, 1.0, 1.5, 6.0, 10.0];
pub const TRUE_MODEL_SIZES: [usize; 2] = [2, 10];
pub const REJECTION_ALPHAS_DESK: [f64; 3] = [1.5, 6.0, 10.0];
pub const REJECTION_ALPHAS_FULL: [f64; 6] = [0.1, 0.5, 1.0, 1.5, 6.0, 10.0];
pub const SHAPE_ALPHAS: [f64; 7] = [0.1, 0.5, 1.0, 1.5, 5.0, 6.0, 10.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Desk,
    Full,
}

impl Budget {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Desk => "desk",
            Self::Full => "full",
        }
    }
}

fn report(
    which: u8,
    budget: Budget,
    calibration: Calibration,
    seed: u64,
    alphas: &[f64],
    rows: Vec<TableRow>,
) -> TableReport {
    TableReport {
        schema_version: SCHEMA_VERSION.into(),
        which,
        budget: budget.as_str().into(),
        calibration,
        seed,
        columns: alphas.iter().map(|a| a.to_string()).collect(),
        rows,
        wall_time_ms: 0,
    }
}

/// Mean p-value of the test at the true shape, one row per sample size.
pub fn true_model_table(
    reps: usize,
    seed: u64,
    calibration: Calibration,
    budget: Budget,
) -> Result<TableReport> {
    let mut rows = Vec::new();
    for (i, &size) in TRUE_MODEL_SIZES.iter().enumerate() {
        let mut values = Vec::new();
        for (j, &alpha) in TRUE_MODEL_ALPHAS.iter().enumerate() {
            let cell_seed = child_seed(seed, (i * TRUE_MODEL_ALPHAS.len() + j) as u64);
            let config =
                CampaignConfig::new(alpha, size, reps, cell_seed).with_calibration(calibration);
            values.push(Some(simulate_true_model(&config)?.mean_p_value));
        }
        rows.push(TableRow {
            label: format!("size={size}"),
            values,
        });
    }
    Ok(report(
        1,
        budget,
        calibration,
        seed,
        &TRUE_MODEL_ALPHAS,
        rows,
    ))
}

/// Smallest doubling-grid size at which normal data is rejected; `None`
/// where the cap was reached first.
pub fn rejection_size_table(
    budget: Budget,
    reps: usize,
    seed: u64,
    calibration: Calibration,
) -> Result<TableReport> {
    let (alphas, cap): (&[f64], usize) = match budget {
        Budget::Desk => (&REJECTION_ALPHAS_DESK, 100_000),
        Budget::Full => (&REJECTION_ALPHAS_FULL, 2_000_000),
    };
    let options = SizeSearchOptions {
        cap,
        replications: reps,
        calibration,
        ..Default::default()
    };
    let mut values = Vec::new();
    for (j, &alpha) in alphas.iter().enumerate() {
        let search = rejection_size_search(alpha, 0.05, child_seed(seed, j as u64), &options)?;
        values.push(search.needed_n.map(|n| n as f64));
    }
    let rows = vec![TableRow {
        label: "size".into(),
        values,
    }];
    Ok(report(2, budget, calibration, seed, alphas, rows))
}

/// Kurtosis and skewness from raw moments and from the closed forms.
pub fn shape_table() -> Result<TableReport> {
    let mut rows: Vec<TableRow> = [
        "kurtosis",
        "skewness",
        "kurtosis (closed form)",
        "skewness (closed form)",
    ]
    .iter()
    .map(|l| TableRow {
        label: (*l).into(),
        values: Vec::new(),
    })
    .collect();
    for &alpha in &SHAPE_ALPHAS {
        let shape = SkewNormalShape::new(alpha)?;
        let by_moments = shape_statistics(&sn_raw_moments(shape))?;
        let closed = analytic_shape_statistics(shape);
        rows[0].values.push(Some(by_moments.kurtosis_a));
        rows[1].values.push(Some(by_moments.skewness_b));
        rows[2].values.push(Some(closed.kurtosis_a));
        rows[3].values.push(Some(closed.skewness_b));
    }
    Ok(report(
        3,
        Budget::Desk,
        Calibration::Exact,
        0,
        &SHAPE_ALPHAS,
        rows,
    ))
}

/// Plain-text rendering of a table report.
pub fn render(table: &TableReport) -> String {
    let label_width = table
        .rows
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = format!("{:<label_width$}", "alpha");
    for c in &table.columns {
        out.push_str(&format!(" | {c:>10}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(out.len() - 1));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!("{:<label_width$}", row.label));
        for v in &row.values {
            let cell = match (table.which, v) {
                (_, None) => "> cap".to_string(),
                (1, Some(p)) => format!("{:.2}", 100.0 * p),
                (2, Some(n)) => format!("{n:.0}"),
                (_, Some(x)) => format!("{x:.5}"),
            };
            out.push_str(&format!(" | {cell:>10}"));
        }
        out.push('\n');
    }
    out
}
