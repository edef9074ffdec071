//! Figure tables, Monte Carlo coverage and bound comparisons.

mod compare;
mod coverage;
mod figures;
mod table;

pub use compare::{compare_bounds, Comparison, CrossingSummary};
pub use coverage::{check_compatible, coverage_threshold, run_coverage, wilson_interval, CoverageReport, MIN_TRIALS, WILSON_Z};
pub use figures::{lambda_grid, run_figure, threshold_or_inf, FigureId, FigureSpec, LAMBDA_GRID_SIZE, UNBOUNDED_GRID_TOP};
pub use table::{Manifest, Table};
