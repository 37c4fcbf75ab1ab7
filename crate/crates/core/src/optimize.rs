//! Grid scans and derivative-free maximization of the QFI over slices of
//! `(r_tilde, nu, tau_tilde, theta)`.
//!
//! A [`ScanGrid`] fixes the polarization and a base parameter point, then
//! frees up to a few axes, each with its own range, sample count, and
//! linear or logarithmic spacing. [`scan`] evaluates every cell (in
//! parallel when the `parallel` feature is on, with results merged by cell
//! index so the output is deterministic either way); per-cell failures are
//! recorded in the cell rather than aborting the scan.
//!
//! [`maximize`] runs a coarse scan first and only then refines locally —
//! golden-section search for one free axis, Nelder-Mead with a
//! deterministic initial simplex for two. Starting from the global best of
//! the coarse grid keeps the refinement out of sub-dominant oscillation
//! lobes of the large-`r_tilde` response tail, provided the coarse grid
//! resolves the lobe spacing. Log-spaced axes are refined in log space so
//! tolerance and step sizes behave uniformly across decades.

use thiserror::Error;

use crate::metrology::{qfi_at, MetrologyError, QfiPoint, QfiResult};
use crate::response::{Polarization, ResponseCache};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Hard ceiling on the number of grid cells in one scan.
const MAX_CELLS: u128 = 10_000_000;

/// Iteration caps for the refinement loops.
const GOLDEN_MAX_ITER: usize = 200;
const NELDER_MEAD_MAX_ITER: usize = 400;

/// Inverse golden ratio, the interval shrink factor per iteration.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Errors from grid construction and maximization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("axis {0:?} appears more than once")]
    DuplicateAxis(Var),
    #[error("axis {var:?}: {what}")]
    BadAxis { var: Var, what: String },
    #[error("grid has {0} cells, exceeding the 10^7 guard")]
    GridTooLarge(u128),
    #[error("maximize requires 1 or 2 free axes, got {0}")]
    BadDimension(usize),
    #[error("no grid cell produced a finite QFI value")]
    NoFiniteCell,
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
}

/// A scannable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    RTilde,
    Nu,
    TauTilde,
    Theta,
}

impl Var {
    fn write(self, point: &mut QfiPoint, value: f64) {
        match self {
            Var::RTilde => point.r_tilde = value,
            Var::Nu => point.nu = value,
            Var::TauTilde => point.tau_tilde = value,
            Var::Theta => point.theta = value,
        }
    }

}

/// One free axis of a scan: `count` samples spanning `[lo, hi]`, linearly
/// or logarithmically spaced, endpoints hit exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    var: Var,
    lo: f64,
    hi: f64,
    count: usize,
    log: bool,
}

impl Axis {
    /// Validates the range: finite bounds, `count ≥ 1`, `lo < hi` whenever
    /// there is more than one sample, positive `lo` for log spacing.
    /// A single-sample axis pins the variable at `lo`.
    pub fn new(var: Var, lo: f64, hi: f64, count: usize, log: bool) -> Result<Self, OptimizeError> {
        let bad = |what: &str| OptimizeError::BadAxis {
            var,
            what: what.to_string(),
        };
        if !lo.is_finite() || !hi.is_finite() {
            return Err(bad("bounds must be finite"));
        }
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if count >= 2 && !(lo < hi) {
            return Err(bad("lo must be strictly below hi"));
        }
        if log && lo <= 0.0 {
            return Err(bad("log spacing requires positive bounds"));
        }
        Ok(Axis {
            var,
            lo,
            hi,
            count,
            log,
        })
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_log(&self) -> bool {
        self.log
    }

    /// The `i`-th sample. Endpoints are returned exactly as given, interior
    /// points are interpolated in the axis's own (linear or log) scale.
    pub fn value(&self, i: usize) -> f64 {
        assert!(i < self.count);
        if i == 0 {
            return self.lo;
        }
        if i == self.count - 1 {
            return self.hi;
        }
        let t = i as f64 / (self.count - 1) as f64;
        if self.log {
            (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * t).exp()
        } else {
            self.lo + (self.hi - self.lo) * t
        }
    }

    /// Maps a parameter value into the coordinate the refiners work in.
    fn to_coord(&self, x: f64) -> f64 {
        if self.log {
            x.ln()
        } else {
            x
        }
    }

    /// Inverse of [`Axis::to_coord`], clamped back into `[lo, hi]`.
    fn from_coord(&self, t: f64) -> f64 {
        let x = if self.log { t.exp() } else { t };
        x.clamp(self.lo, self.hi)
    }
}

/// A scan specification: polarization, fixed base point, and free axes.
/// Axis values override the base point's entry for their variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    base: QfiPoint,
    axes: Vec<Axis>,
}

impl ScanGrid {
    /// Validates that no variable is freed twice and the total cell count
    /// stays under the guard.
    pub fn new(
        pol: Polarization,
        r_tilde: f64,
        nu: f64,
        tau_tilde: f64,
        theta: f64,
        axes: Vec<Axis>,
    ) -> Result<Self, OptimizeError> {
        for (i, axis) in axes.iter().enumerate() {
            if axes[..i].iter().any(|other| other.var == axis.var) {
                return Err(OptimizeError::DuplicateAxis(axis.var));
            }
        }
        let total: u128 = axes.iter().map(|a| a.count as u128).product();
        if total > MAX_CELLS {
            return Err(OptimizeError::GridTooLarge(total));
        }
        Ok(ScanGrid {
            base: QfiPoint {
                pol,
                r_tilde,
                nu,
                tau_tilde,
                theta,
            },
            axes,
        })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn base(&self) -> QfiPoint {
        self.base
    }

    /// Total number of grid cells (1 for an axis-free grid).
    pub fn total_cells(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Decodes a flat row-major index (last axis fastest) into per-axis
    /// indices.
    fn indices(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        let mut rest = flat;
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = rest % axis.count;
            rest /= axis.count;
        }
        idx
    }

    /// The parameter point of a cell given its per-axis indices.
    pub fn point_at(&self, indices: &[usize]) -> QfiPoint {
        assert_eq!(indices.len(), self.axes.len());
        let mut point = self.base;
        for (axis, &i) in self.axes.iter().zip(indices) {
            axis.var.write(&mut point, axis.value(i));
        }
        point
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone)]
pub struct ScanCell {
    /// Per-axis indices, same order as [`ScanGrid::axes`].
    pub indices: Vec<usize>,
    pub point: QfiPoint,
    /// The QFI value, or the per-cell failure that produced no value.
    pub outcome: Result<QfiResult, MetrologyError>,
}

/// Evaluates every cell of the grid, row-major with the last axis fastest.
/// A failed cell (e.g. out-of-range parameter) is recorded in its slot.
/// When no cache is supplied a scan-local one still deduplicates repeated
/// `(r_tilde, nu)` response evaluations; results are bit-identical either
/// way.
pub fn scan(grid: &ScanGrid, cache: Option<&ResponseCache>) -> Result<Vec<ScanCell>, OptimizeError> {
    let total = grid.total_cells();
    if total as u128 > MAX_CELLS {
        return Err(OptimizeError::GridTooLarge(total as u128));
    }
    let local_store;
    let store = match cache {
        Some(c) => c,
        None => {
            local_store = ResponseCache::new();
            &local_store
        }
    };

    let eval_cell = |flat: usize| -> ScanCell {
        let indices = grid.indices(flat);
        let point = grid.point_at(&indices);
        let outcome = qfi_at(
            point.pol,
            point.r_tilde,
            point.nu,
            point.tau_tilde,
            point.theta,
            Some(store),
        );
        ScanCell {
            indices,
            point,
            outcome,
        }
    };

    #[cfg(feature = "parallel")]
    let cells: Vec<ScanCell> = (0..total).into_par_iter().map(eval_cell).collect();
    #[cfg(not(feature = "parallel"))]
    let cells: Vec<ScanCell> = (0..total).map(eval_cell).collect();

    Ok(cells)
}

/// Result of a maximization run.
#[derive(Debug, Clone)]
pub struct MaxResult {
    /// Best point found across the coarse scan and every refinement
    /// evaluation.
    pub best: QfiResult,
    /// Every refinement evaluation in order: `(point, fisher)`.
    pub refinement_history: Vec<(QfiPoint, f64)>,
    /// Whether the parameter interval shrank below the requested tolerance
    /// within the iteration cap.
    pub converged: bool,
    /// Final parameter-interval width (max over axes for two of them).
    pub tolerance_achieved: f64,
}

/// Tracks the best evaluation seen so far; ties keep the earlier point so
/// the result never depends on evaluation order.
struct Best {
    result: Option<QfiResult>,
}

impl Best {
    fn offer(&mut self, candidate: &QfiResult) {
        let better = match &self.result {
            None => true,
            Some(cur) => candidate.fisher > cur.fisher,
        };
        if better {
            self.result = Some(*candidate);
        }
    }
}

/// Maximizes the QFI over a 1- or 2-axis grid: global coarse scan, then
/// golden-section (one axis) or Nelder-Mead with a deterministic initial
/// simplex (two axes) from the best cell, until the bracket (or simplex)
/// width in parameter units drops below `tol`. Identical inputs always
/// produce identical outputs.
pub fn maximize(
    grid: &ScanGrid,
    tol: f64,
    cache: Option<&ResponseCache>,
) -> Result<MaxResult, OptimizeError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(OptimizeError::BadTolerance(tol));
    }
    let dim = grid.axes.len();
    if dim == 0 || dim > 2 {
        return Err(OptimizeError::BadDimension(dim));
    }

    let local_store;
    let store = match cache {
        Some(c) => c,
        None => {
            local_store = ResponseCache::new();
            &local_store
        }
    };

    let cells = scan(grid, Some(store))?;
    let mut best = Best { result: None };
    let mut best_indices: Option<Vec<usize>> = None;
    for cell in &cells {
        if let Ok(res) = &cell.outcome {
            if res.fisher.is_finite() {
                let had = best.result.map(|b| b.fisher);
                best.offer(res);
                if best.result.map(|b| b.fisher) != had {
                    best_indices = Some(cell.indices.clone());
                }
            }
        }
    }
    let best_indices = best_indices.ok_or(OptimizeError::NoFiniteCell)?;

    let mut history = Vec::new();
    let mut evaluate = |point: QfiPoint| -> f64 {
        match qfi_at(
            point.pol,
            point.r_tilde,
            point.nu,
            point.tau_tilde,
            point.theta,
            Some(store),
        ) {
            Ok(res) if res.fisher.is_finite() => {
                best.offer(&res);
                history.push((point, res.fisher));
                res.fisher
            }
            _ => f64::NEG_INFINITY,
        }
    };

    let (converged, tolerance_achieved) = match dim {
        1 => refine_golden(grid, &grid.axes[0], best_indices[0], tol, &mut evaluate),
        _ => refine_nelder_mead(grid, &best_indices, tol, &mut evaluate),
    };

    Ok(MaxResult {
        best: best.result.expect("a finite coarse cell exists"),
        refinement_history: history,
        converged,
        tolerance_achieved,
    })
}

/// Golden-section ascent on the bracket formed by the best coarse cell and
/// its immediate neighbors. Returns `(converged, final width)`.
fn refine_golden(
    grid: &ScanGrid,
    axis: &Axis,
    best_idx: usize,
    tol: f64,
    evaluate: &mut dyn FnMut(QfiPoint) -> f64,
) -> (bool, f64) {
    if axis.count < 2 {
        return (true, 0.0);
    }
    let lo_idx = best_idx.saturating_sub(1);
    let hi_idx = (best_idx + 1).min(axis.count - 1);
    let mut a = axis.to_coord(axis.value(lo_idx));
    let mut b = axis.to_coord(axis.value(hi_idx));

    let point_at = |t: f64| -> QfiPoint {
        let mut p = grid.base;
        axis.var.write(&mut p, axis.from_coord(t));
        p
    };
    let width = |a: f64, b: f64| (axis.from_coord(b) - axis.from_coord(a)).abs();

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = evaluate(point_at(x1));
    let mut f2 = evaluate(point_at(x2));
    for _ in 0..GOLDEN_MAX_ITER {
        if width(a, b) <= tol {
            return (true, width(a, b));
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = evaluate(point_at(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = evaluate(point_at(x2));
        }
    }
    (width(a, b) <= tol, width(a, b))
}

/// Nelder-Mead ascent over two axes in their refinement coordinates, with
/// the initial simplex at the best coarse cell plus one grid step along
/// each axis (stepping inward at the grid edge). Returns
/// `(converged, final simplex extent in parameter units)`.
fn refine_nelder_mead(
    grid: &ScanGrid,
    best_indices: &[usize],
    tol: f64,
    evaluate: &mut dyn FnMut(QfiPoint) -> f64,
) -> (bool, f64) {
    let ax = [&grid.axes[0], &grid.axes[1]];
    let point_at = |t: [f64; 2]| -> QfiPoint {
        let mut p = grid.base;
        ax[0].var.write(&mut p, ax[0].from_coord(t[0]));
        ax[1].var.write(&mut p, ax[1].from_coord(t[1]));
        p
    };
    // Simplex extent measured in parameter units, max over the two axes.
    let extent = |s: &[[f64; 2]; 3]| -> f64 {
        let mut worst: f64 = 0.0;
        for (k, axis) in ax.iter().enumerate() {
            let vals = [
                axis.from_coord(s[0][k]),
                axis.from_coord(s[1][k]),
                axis.from_coord(s[2][k]),
            ];
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
        worst
    };

    let mut origin = [0.0_f64; 2];
    let mut steps = [0.0_f64; 2];
    for k in 0..2 {
        let axis = ax[k];
        let i = best_indices[k];
        origin[k] = axis.to_coord(axis.value(i));
        steps[k] = if axis.count < 2 {
            // Degenerate axis: give the simplex a token extent so the
            // method can still move if the other axis ranges.
            tol.max(1e-6)
        } else {
            let span = axis.to_coord(axis.hi) - axis.to_coord(axis.lo);
            let step = span / (axis.count - 1) as f64;
            if i + 1 < axis.count {
                step
            } else {
                -step
            }
        };
    }

    let mut simplex = [
        origin,
        [origin[0] + steps[0], origin[1]],
        [origin[0], origin[1] + steps[1]],
    ];
    let mut values = simplex.map(|t| evaluate(point_at(t)));

    for _ in 0..NELDER_MEAD_MAX_ITER {
        // Order so that index 0 is best; break ties by coordinates to stay
        // deterministic even on flat plateaus.
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| {
            values[j]
                .total_cmp(&values[i])
                .then_with(|| simplex[i][0].total_cmp(&simplex[j][0]))
                .then_with(|| simplex[i][1].total_cmp(&simplex[j][1]))
        });
        simplex = [simplex[order[0]], simplex[order[1]], simplex[order[2]]];
        values = [values[order[0]], values[order[1]], values[order[2]]];

        if extent(&simplex) <= tol {
            return (true, extent(&simplex));
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let worst = simplex[2];
        let reflected = [
            centroid[0] + (centroid[0] - worst[0]),
            centroid[1] + (centroid[1] - worst[1]),
        ];
        let f_reflected = evaluate(point_at(reflected));

        if f_reflected > values[0] {
            let expanded = [
                centroid[0] + 2.0 * (centroid[0] - worst[0]),
                centroid[1] + 2.0 * (centroid[1] - worst[1]),
            ];
            let f_expanded = evaluate(point_at(expanded));
            if f_expanded > f_reflected {
                simplex[2] = expanded;
                values[2] = f_expanded;
            } else {
                simplex[2] = reflected;
                values[2] = f_reflected;
            }
        } else if f_reflected > values[1] {
            simplex[2] = reflected;
            values[2] = f_reflected;
        } else {
            let contracted = [
                centroid[0] + 0.5 * (worst[0] - centroid[0]),
                centroid[1] + 0.5 * (worst[1] - centroid[1]),
            ];
            let f_contracted = evaluate(point_at(contracted));
            if f_contracted > values[2] {
                simplex[2] = contracted;
                values[2] = f_contracted;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        0.5 * (simplex[k][0] + simplex[0][0]),
                        0.5 * (simplex[k][1] + simplex[0][1]),
                    ];
                    values[k] = evaluate(point_at(simplex[k]));
                }
            }
        }
    }
    (extent(&simplex) <= tol, extent(&simplex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::qfi_at;
    use std::f64::consts::PI;

    fn radial_grid(axes: Vec<Axis>) -> ScanGrid {
        ScanGrid::new(Polarization::radial(), 0.5, 1.5, 2.0, 0.0, axes).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(Var::RTilde, 0.1, 1.0, 10, false).is_ok());
        assert!(Axis::new(Var::RTilde, 0.1, 1.0, 1, false).is_ok());
        assert!(Axis::new(Var::RTilde, 1.0, 1.0, 2, false).is_err());
        assert!(Axis::new(Var::RTilde, 2.0, 1.0, 5, false).is_err());
        assert!(Axis::new(Var::RTilde, 0.1, 1.0, 0, false).is_err());
        assert!(Axis::new(Var::RTilde, 0.0, 1.0, 5, true).is_err());
        assert!(Axis::new(Var::RTilde, f64::NAN, 1.0, 5, false).is_err());
    }

    #[test]
    fn grid_validation() {
        let a = Axis::new(Var::Theta, 0.0, PI, 5, false).unwrap();
        let b = Axis::new(Var::Theta, 0.0, 1.0, 3, false).unwrap();
        assert_eq!(
            ScanGrid::new(Polarization::radial(), 0.5, 1.5, 2.0, 0.0, vec![a, b]),
            Err(OptimizeError::DuplicateAxis(Var::Theta))
        );

        let big = |var, n| Axis::new(var, 0.1, 1.0, n, false).unwrap();
        let too_big = ScanGrid::new(
            Polarization::radial(),
            0.5,
            1.5,
            2.0,
            0.0,
            vec![big(Var::RTilde, 4000), big(Var::TauTilde, 3000)],
        );
        assert!(matches!(too_big, Err(OptimizeError::GridTooLarge(_))));
    }

    #[test]
    fn axis_endpoints_are_exact() {
        let lin = Axis::new(Var::Theta, 0.0, PI, 5, false).unwrap();
        assert_eq!(lin.value(0), 0.0);
        assert_eq!(lin.value(4), PI);
        let log = Axis::new(Var::RTilde, 0.01, 10.0, 3, true).unwrap();
        assert_eq!(log.value(0), 0.01);
        assert_eq!(log.value(2), 10.0);
        // Log spacing: the middle of one decade each side.
        let mid = log.value(1);
        assert!((mid - (0.01_f64.ln() + 0.5 * (10.0_f64 / 0.01).ln()).exp()).abs() < 1e-15);
        let single = Axis::new(Var::Nu, 1.3, 1.3, 1, false).unwrap();
        assert_eq!(single.value(0), 1.3);
    }

    #[test]
    fn scan_is_row_major_with_last_axis_fastest() {
        let axes = vec![
            Axis::new(Var::TauTilde, 1.0, 2.0, 2, false).unwrap(),
            Axis::new(Var::Theta, 0.0, 1.0, 3, false).unwrap(),
        ];
        let grid = radial_grid(axes);
        let cells = scan(&grid, None).unwrap();
        assert_eq!(cells.len(), 6);
        let expected: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![0, 2],
            vec![1, 0],
            vec![1, 1],
            vec![1, 2],
        ];
        for (cell, want) in cells.iter().zip(&expected) {
            assert_eq!(&cell.indices, want);
        }
        assert_eq!(cells[3].point.tau_tilde, 2.0);
        assert_eq!(cells[3].point.theta, 0.0);
        assert_eq!(cells[5].point.theta, 1.0);
    }

    #[test]
    fn scan_ground_state_slice_is_exactly_zero() {
        let axes = vec![Axis::new(Var::Theta, 0.0, PI, 5, false).unwrap()];
        let grid = radial_grid(axes);
        let cells = scan(&grid, None).unwrap();
        let last = cells.last().unwrap();
        assert_eq!(last.point.theta, PI);
        assert_eq!(last.outcome.as_ref().unwrap().fisher, 0.0);
        // Interior cells carry information.
        assert!(cells[0].outcome.as_ref().unwrap().fisher > 0.0);
    }

    #[test]
    fn degenerate_grid_is_single_evaluation() {
        let grid = radial_grid(vec![]);
        let cells = scan(&grid, None).unwrap();
        assert_eq!(cells.len(), 1);
        let direct = qfi_at(Polarization::radial(), 0.5, 1.5, 2.0, 0.0, None).unwrap();
        assert_eq!(
            cells[0].outcome.as_ref().unwrap().fisher.to_bits(),
            direct.fisher.to_bits()
        );
    }

    #[test]
    fn scan_is_deterministic_and_cache_transparent() {
        let axes = vec![
            Axis::new(Var::RTilde, 0.1, 2.0, 4, true).unwrap(),
            Axis::new(Var::Nu, 1.1, 2.0, 3, false).unwrap(),
        ];
        let grid = radial_grid(axes);
        let run1 = scan(&grid, None).unwrap();
        let run2 = scan(&grid, None).unwrap();
        let cache = ResponseCache::new();
        let run3 = scan(&grid, Some(&cache)).unwrap();
        let run4 = scan(&grid, Some(&cache)).unwrap();
        for (((c1, c2), c3), c4) in run1.iter().zip(&run2).zip(&run3).zip(&run4) {
            let f1 = c1.outcome.as_ref().unwrap().fisher;
            for c in [c2, c3, c4] {
                assert_eq!(f1.to_bits(), c.outcome.as_ref().unwrap().fisher.to_bits());
            }
        }
    }

    #[test]
    fn scan_records_per_cell_failures() {
        // r_tilde above the validated range fails those cells only.
        let axes = vec![Axis::new(Var::RTilde, 29.0, 31.0, 3, false).unwrap()];
        let grid = radial_grid(axes);
        let cells = scan(&grid, None).unwrap();
        assert!(cells[0].outcome.is_ok());
        assert!(cells[1].outcome.is_ok());
        assert!(cells[2].outcome.is_err());
    }

    #[test]
    fn maximize_requires_one_or_two_axes_and_positive_tol() {
        let grid0 = radial_grid(vec![]);
        assert!(matches!(
            maximize(&grid0, 1e-6, None),
            Err(OptimizeError::BadDimension(0))
        ));
        let axes3 = vec![
            Axis::new(Var::RTilde, 0.1, 1.0, 3, false).unwrap(),
            Axis::new(Var::Nu, 1.1, 2.0, 3, false).unwrap(),
            Axis::new(Var::Theta, 0.0, 1.0, 3, false).unwrap(),
        ];
        let grid3 = radial_grid(axes3);
        assert!(matches!(
            maximize(&grid3, 1e-6, None),
            Err(OptimizeError::BadDimension(3))
        ));
        let grid1 = radial_grid(vec![Axis::new(Var::Theta, 0.0, PI, 9, false).unwrap()]);
        assert!(matches!(
            maximize(&grid1, 0.0, None),
            Err(OptimizeError::BadTolerance(_))
        ));
    }

    #[test]
    fn maximize_theta_returns_excited_state() {
        let grid = radial_grid(vec![Axis::new(Var::Theta, 0.0, PI, 25, false).unwrap()]);
        let res = maximize(&grid, 1e-6, None).unwrap();
        assert!(res.converged);
        assert!(res.tolerance_achieved <= 1e-6);
        assert!(res.best.point.theta <= 1e-6);
        assert!(!res.refinement_history.is_empty());
    }

    #[test]
    fn maximize_refines_beyond_coarse_grid() {
        // Radial slice at tau = 4: maximum near r_tilde = 0.138.
        let axes = vec![Axis::new(Var::RTilde, 0.05, 1.0, 15, true).unwrap()];
        let grid = ScanGrid::new(Polarization::radial(), 0.5, 1.5, 4.0, 0.0, axes).unwrap();
        let coarse = scan(&grid, None).unwrap();
        let coarse_best = coarse
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(|r| r.fisher)
            .fold(f64::NEG_INFINITY, f64::max);
        let res = maximize(&grid, 1e-5, None).unwrap();
        assert!(res.converged);
        assert!(res.best.fisher >= coarse_best);
        assert!((res.best.point.r_tilde - 0.137_825_817_73).abs() <= 1e-3);
        assert!((res.best.fisher - 8.513_811_93).abs() / 8.513_811_93 <= 1e-4);
    }

    #[test]
    fn maximize_two_axes_with_nelder_mead() {
        let axes = vec![
            Axis::new(Var::RTilde, 0.05, 1.0, 12, true).unwrap(),
            Axis::new(Var::Nu, 1.2, 2.2, 11, false).unwrap(),
        ];
        let grid = ScanGrid::new(Polarization::radial(), 0.5, 1.5, 4.0, 0.0, axes).unwrap();
        let coarse = scan(&grid, None).unwrap();
        let coarse_best = coarse
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(|r| r.fisher)
            .fold(f64::NEG_INFINITY, f64::max);
        let res = maximize(&grid, 1e-4, None).unwrap();
        assert!(res.converged);
        assert!(res.best.fisher >= coarse_best);
        // The 2-D optimum dominates the best 1-D slice at nu = 1.5.
        assert!(res.best.fisher >= 8.4);
    }

    #[test]
    fn maximize_on_flat_slice_keeps_first_cell() {
        // theta = pi: the QFI is identically zero, so the first grid cell
        // (lowest flat index) must win the tie.
        let axes = vec![Axis::new(Var::TauTilde, 1.0, 3.0, 7, false).unwrap()];
        let grid = ScanGrid::new(Polarization::radial(), 0.5, 1.5, 2.0, PI, axes).unwrap();
        let res = maximize(&grid, 1e-6, None).unwrap();
        assert_eq!(res.best.fisher, 0.0);
        assert_eq!(res.best.point.tau_tilde, 1.0);
    }

    #[test]
    fn maximize_is_deterministic() {
        let axes = vec![Axis::new(Var::RTilde, 0.05, 1.0, 9, true).unwrap()];
        let grid = ScanGrid::new(Polarization::tangential(), 0.5, 1.5, 4.0, 0.0, axes).unwrap();
        let r1 = maximize(&grid, 1e-6, None).unwrap();
        let r2 = maximize(&grid, 1e-6, None).unwrap();
        assert_eq!(r1.best.fisher.to_bits(), r2.best.fisher.to_bits());
        assert_eq!(r1.best.point.r_tilde.to_bits(), r2.best.point.r_tilde.to_bits());
        assert_eq!(r1.refinement_history.len(), r2.refinement_history.len());
    }
}
