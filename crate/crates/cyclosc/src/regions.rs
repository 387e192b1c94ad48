//! Oscillation-existence maps over two-parameter grids, with boundary
//! refinement.
//!
//! Each grid cell instantiates the template network at the axis values,
//! re-solves the equilibrium, reduces, and applies the analytic criterion.
//! Cells are independent and evaluated in parallel; assembly is an
//! index-addressed reduction, so the output bytes do not depend on thread
//! count. Where the margin changes sign between neighboring cells, the
//! crossing is sharpened by bisection along the axis.

use crate::equilibrium::{self, solve_equilibrium};
use crate::linearization::reduce;
use crate::netmodel::{NetworkSpec, SpecError};
use crate::stability::{test_analytic, Outcome, SCALAR_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::io::{self, Write};
use thiserror::Error;

/// Sweepable parameters. Axis values are in the parameter's natural units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisParameter {
    /// Hill coefficient.
    #[serde(rename = "nu")]
    Nu,
    /// Target synthesis/degradation ratio: every gene's synthesis product is
    /// scaled by a common factor so the geometric-mean `R` equals the axis
    /// value. Only the products enter the criteria, so which rate moves is
    /// immaterial.
    #[serde(rename = "R-uniform-scale")]
    RUniformScale,
    /// Maximal transcription rate of every gene.
    #[serde(rename = "alpha")]
    Alpha,
    /// Common protein degradation and synthesis rate (the repressor-ring
    /// parameterization's ratio parameter).
    #[serde(rename = "gamma")]
    Gamma,
    /// Basal transcription rate of every gene.
    #[serde(rename = "alpha0")]
    Alpha0,
    /// mRNA half-life; the degradation rate becomes `ln 2 / value`.
    #[serde(rename = "t_r-halflife")]
    TRHalfLife,
    /// Protein half-life; the degradation rate becomes `ln 2 / value`.
    #[serde(rename = "t_p-halflife")]
    TPHalfLife,
    /// Common multiplier on every delay in the template.
    #[serde(rename = "tau-uniform-scale")]
    TauUniformScale,
}

impl AxisParameter {
    pub fn parse(token: &str) -> Result<AxisParameter, RegionError> {
        Ok(match token {
            "nu" => AxisParameter::Nu,
            "R-uniform-scale" => AxisParameter::RUniformScale,
            "alpha" => AxisParameter::Alpha,
            "gamma" => AxisParameter::Gamma,
            "alpha0" => AxisParameter::Alpha0,
            "t_r-halflife" => AxisParameter::TRHalfLife,
            "t_p-halflife" => AxisParameter::TPHalfLife,
            "tau-uniform-scale" => AxisParameter::TauUniformScale,
            _ => return Err(RegionError::BadAxis(format!("unknown parameter '{token}'"))),
        })
    }

    fn apply(&self, spec: &mut NetworkSpec, value: f64) {
        match self {
            AxisParameter::Nu => spec.nu = value,
            AxisParameter::RUniformScale => {
                let n = spec.len() as f64;
                let log_mean: f64 = spec
                    .genes
                    .iter()
                    .map(|g| (g.c * g.beta / (g.a * g.b * g.p0)).ln())
                    .sum::<f64>()
                    / n;
                let scale = value * value / log_mean.exp();
                for g in &mut spec.genes {
                    g.c *= scale;
                }
            }
            AxisParameter::Alpha => {
                for g in &mut spec.genes {
                    g.beta = value;
                }
            }
            AxisParameter::Gamma => {
                for g in &mut spec.genes {
                    g.b = value;
                    g.c = value;
                }
            }
            AxisParameter::Alpha0 => {
                for g in &mut spec.genes {
                    g.alpha0 = value;
                }
            }
            AxisParameter::TRHalfLife => {
                for g in &mut spec.genes {
                    g.a = LN_2 / value;
                }
            }
            AxisParameter::TPHalfLife => {
                for g in &mut spec.genes {
                    g.b = LN_2 / value;
                }
            }
            AxisParameter::TauUniformScale => {
                for g in &mut spec.genes {
                    g.tau_r *= value;
                    g.tau_p *= value;
                }
            }
        }
    }

    fn token(&self) -> &'static str {
        match self {
            AxisParameter::Nu => "nu",
            AxisParameter::RUniformScale => "R-uniform-scale",
            AxisParameter::Alpha => "alpha",
            AxisParameter::Gamma => "gamma",
            AxisParameter::Alpha0 => "alpha0",
            AxisParameter::TRHalfLife => "t_r-halflife",
            AxisParameter::TPHalfLife => "t_p-halflife",
            AxisParameter::TauUniformScale => "tau-uniform-scale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log10,
}

/// One grid axis: parameter, range, resolution and spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub parameter: AxisParameter,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub scale: AxisScale,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RegionError {
    #[error("invalid axis: {0}")]
    BadAxis(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

impl AxisSpec {
    pub fn new(
        parameter: AxisParameter,
        lo: f64,
        hi: f64,
        n: usize,
        scale: AxisScale,
    ) -> Result<AxisSpec, RegionError> {
        let axis = AxisSpec {
            parameter,
            lo,
            hi,
            n,
            scale,
        };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<(), RegionError> {
        if !(self.lo < self.hi) {
            return Err(RegionError::BadAxis(format!(
                "lo = {} must be < hi = {}",
                self.lo, self.hi
            )));
        }
        if self.n < 2 {
            return Err(RegionError::BadAxis(format!("n = {} must be >= 2", self.n)));
        }
        if self.scale == AxisScale::Log10 && !(self.lo > 0.0) {
            return Err(RegionError::BadAxis(format!(
                "log axis needs lo > 0, got {}",
                self.lo
            )));
        }
        Ok(())
    }

    /// Grid value at index `k`, evenly spaced in the axis's own scale.
    pub fn value(&self, k: usize) -> f64 {
        let frac = k as f64 / (self.n - 1) as f64;
        match self.scale {
            AxisScale::Linear => self.lo + (self.hi - self.lo) * frac,
            AxisScale::Log10 => self.lo * (self.hi / self.lo).powf(frac),
        }
    }

    /// All grid values.
    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.value(k)).collect()
    }

    fn to_coord(&self, v: f64) -> f64 {
        match self.scale {
            AxisScale::Linear => v,
            AxisScale::Log10 => v.log10(),
        }
    }

    fn from_coord(&self, c: f64) -> f64 {
        match self.scale {
            AxisScale::Linear => c,
            AxisScale::Log10 => 10f64.powf(c),
        }
    }
}

/// Per-cell verdict record. `l`, `l_bar` and `margin` are NaN for
/// undetermined cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub outcome: CellOutcome,
    pub l: f64,
    pub l_bar: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellOutcome {
    Oscillating,
    Stable,
    Undetermined,
}

impl CellOutcome {
    fn label(&self) -> &'static str {
        match self {
            CellOutcome::Oscillating => "oscillating",
            CellOutcome::Stable => "stable",
            CellOutcome::Undetermined => "undetermined",
        }
    }
}

/// A refined point on the oscillating/stable boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub segment: usize,
    pub x: f64,
    pub y: f64,
}

/// Scan output: row-major cells (y outer, x inner) plus optional boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub template: NetworkSpec,
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub cells: Vec<Cell>,
    pub boundary: Vec<BoundaryPoint>,
}

impl RegionGrid {
    pub fn cell(&self, ix: usize, iy: usize) -> &Cell {
        &self.cells[iy * self.x.n + ix]
    }
}

fn evaluate_cell(template: &NetworkSpec, x: &AxisSpec, vx: f64, y: &AxisSpec, vy: f64) -> Cell {
    let mut spec = template.clone();
    x.parameter.apply(&mut spec, vx);
    y.parameter.apply(&mut spec, vy);
    let undetermined = Cell {
        outcome: CellOutcome::Undetermined,
        l: f64::NAN,
        l_bar: f64::NAN,
        margin: f64::NAN,
    };
    if spec.validate().is_err() {
        return undetermined;
    }
    let Ok(eq) = solve_equilibrium(&spec, equilibrium::DEFAULT_TOL) else {
        return undetermined;
    };
    let Ok(rm) = reduce(&spec, &eq) else {
        return undetermined;
    };
    let Ok(verdict) = test_analytic(&rm, SCALAR_TOL) else {
        return undetermined;
    };
    Cell {
        outcome: match verdict.outcome {
            Outcome::OscillationsGuaranteed => CellOutcome::Oscillating,
            Outcome::LocallyStable => CellOutcome::Stable,
            Outcome::Inconclusive => CellOutcome::Undetermined,
        },
        l: verdict.l,
        l_bar: verdict.l_bar,
        margin: verdict.margin,
    }
}

/// Evaluate the analytic criterion over the full grid.
///
/// Per-cell failures (infeasible parameters, failed solves) are recorded as
/// undetermined cells; they never abort the scan.
pub fn scan(template: &NetworkSpec, x: &AxisSpec, y: &AxisSpec) -> Result<RegionGrid, RegionError> {
    x.validate()?;
    y.validate()?;
    template.validate()?;
    let xs = x.values();
    let ys = y.values();
    let cells: Vec<Cell> = (0..xs.len() * ys.len())
        .into_par_iter()
        .map(|idx| {
            let (iy, ix) = (idx / xs.len(), idx % xs.len());
            evaluate_cell(template, x, xs[ix], y, ys[iy])
        })
        .collect();
    Ok(RegionGrid {
        template: template.clone(),
        x: x.clone(),
        y: y.clone(),
        cells,
        boundary: Vec::new(),
    })
}

/// Bisect the margin's sign change along one axis (the other held fixed)
/// down to `|margin| <= tol`. Refinement runs in the axis's own scale, so a
/// log axis bisects in log space. Returns the crossing value, or `None` if
/// an undetermined cell interrupts the bracket.
fn bisect_margin<F>(
    axis: &AxisSpec,
    margin_at: F,
    lo_v: f64,
    lo_margin: f64,
    hi_v: f64,
    tol: f64,
) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut lo = axis.to_coord(lo_v);
    let mut hi = axis.to_coord(hi_v);
    let mut lo_sign = lo_margin;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let v = axis.from_coord(mid);
        let margin = margin_at(v);
        if !margin.is_finite() {
            return None;
        }
        if margin.abs() <= tol {
            return Some(v);
        }
        if (margin > 0.0) == (lo_sign > 0.0) {
            lo = mid;
            lo_sign = margin;
        } else {
            hi = mid;
        }
    }
    Some(axis.from_coord(0.5 * (lo + hi)))
}

/// Sharpen every sign change of the margin along grid rows and columns to
/// `|margin| <= tol`, then chain nearby crossings into polyline segments.
///
/// An all-oscillating or all-stable grid legally yields an empty boundary.
pub fn trace_boundary(grid: &RegionGrid, tol: f64) -> Vec<BoundaryPoint> {
    let xs = grid.x.values();
    let ys = grid.y.values();
    let mut raw: Vec<(f64, f64)> = Vec::new();

    let row_crossings: Vec<(f64, f64)> = (0..ys.len())
        .into_par_iter()
        .flat_map_iter(|iy| {
            let xs = &xs;
            let ys = &ys;
            (0..xs.len() - 1).filter_map(move |ix| {
                let a = grid.cell(ix, iy).margin;
                let b = grid.cell(ix + 1, iy).margin;
                if !a.is_finite() || !b.is_finite() || (a > 0.0) == (b > 0.0) {
                    return None;
                }
                let margin_at =
                    |v: f64| evaluate_cell(&grid.template, &grid.x, v, &grid.y, ys[iy]).margin;
                bisect_margin(&grid.x, margin_at, xs[ix], a, xs[ix + 1], tol).map(|x| (x, ys[iy]))
            })
        })
        .collect();
    raw.extend(row_crossings);

    let col_crossings: Vec<(f64, f64)> = (0..xs.len())
        .into_par_iter()
        .flat_map_iter(|ix| {
            let xs = &xs;
            let ys = &ys;
            (0..ys.len() - 1).filter_map(move |iy| {
                let a = grid.cell(ix, iy).margin;
                let b = grid.cell(ix, iy + 1).margin;
                if !a.is_finite() || !b.is_finite() || (a > 0.0) == (b > 0.0) {
                    return None;
                }
                let margin_at =
                    |v: f64| evaluate_cell(&grid.template, &grid.x, xs[ix], &grid.y, v).margin;
                bisect_margin(&grid.y, margin_at, ys[iy], a, ys[iy + 1], tol).map(|y| (xs[ix], y))
            })
        })
        .collect();
    raw.extend(col_crossings);

    chain_segments(grid, raw)
}

/// Greedy nearest-neighbor chaining in scale coordinates; points further
/// apart than two cell diagonals start a new segment.
fn chain_segments(grid: &RegionGrid, raw: Vec<(f64, f64)>) -> Vec<BoundaryPoint> {
    if raw.is_empty() {
        return Vec::new();
    }
    let sx = (grid.x.to_coord(grid.x.hi) - grid.x.to_coord(grid.x.lo)) / (grid.x.n - 1) as f64;
    let sy = (grid.y.to_coord(grid.y.hi) - grid.y.to_coord(grid.y.lo)) / (grid.y.n - 1) as f64;
    let coords: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(x, y)| (grid.x.to_coord(x) / sx, grid.y.to_coord(y) / sy))
        .collect();
    let dist2 = |a: (f64, f64), b: (f64, f64)| {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        dx * dx + dy * dy
    };
    let link2 = 8.0; // (2 * cell diagonal)^2 in normalized units

    let mut used = vec![false; raw.len()];
    let mut out = Vec::with_capacity(raw.len());
    let mut segment = 0;
    while let Some(start) = used.iter().position(|u| !u) {
        let mut chain = vec![start];
        used[start] = true;
        loop {
            let tail = *chain.last().unwrap();
            let next = (0..raw.len())
                .filter(|&k| !used[k])
                .map(|k| (k, dist2(coords[tail], coords[k])))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match next {
                Some((k, d2)) if d2 <= link2 => {
                    used[k] = true;
                    chain.push(k);
                }
                _ => break,
            }
        }
        for k in chain {
            out.push(BoundaryPoint {
                segment,
                x: raw[k].0,
                y: raw[k].1,
            });
        }
        segment += 1;
    }
    out
}

/// Grid CSV: header `x,y,outcome,L,L_bar,margin`, rows in y-then-x order.
pub fn write_grid_csv<W: Write>(grid: &RegionGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "x,y,outcome,L,L_bar,margin")?;
    let xs = grid.x.values();
    let ys = grid.y.values();
    for (iy, vy) in ys.iter().enumerate() {
        for (ix, vx) in xs.iter().enumerate() {
            let c = grid.cell(ix, iy);
            writeln!(
                w,
                "{vx},{vy},{},{},{},{}",
                c.outcome.label(),
                c.l,
                c.l_bar,
                c.margin
            )?;
        }
    }
    Ok(())
}

/// Boundary CSV: header `segment,x,y`.
pub fn write_boundary_csv<W: Write>(points: &[BoundaryPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "segment,x,y")?;
    for p in points {
        writeln!(w, "{},{},{}", p.segment, p.x, p.y)?;
    }
    Ok(())
}

/// Axis metadata echoed next to the grid CSV.
pub fn axes_metadata(grid: &RegionGrid) -> serde_json::Value {
    let axis = |a: &AxisSpec| {
        serde_json::json!({
            "parameter": a.parameter.token(),
            "lo": a.lo,
            "hi": a.hi,
            "n": a.n,
            "scale": match a.scale { AxisScale::Linear => "linear", AxisScale::Log10 => "log10" },
        })
    };
    serde_json::json!({ "x": axis(&grid.x), "y": axis(&grid.y) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::load_preset;

    fn axis(p: AxisParameter, lo: f64, hi: f64, n: usize, scale: AxisScale) -> AxisSpec {
        AxisSpec::new(p, lo, hi, n, scale).unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(AxisSpec::new(AxisParameter::Nu, 2.0, 1.0, 10, AxisScale::Linear).is_err());
        assert!(AxisSpec::new(AxisParameter::Nu, 1.0, 2.0, 1, AxisScale::Linear).is_err());
        assert!(AxisSpec::new(AxisParameter::Nu, -1.0, 2.0, 10, AxisScale::Log10).is_err());
        assert!(AxisParameter::parse("nu").is_ok());
        assert!(AxisParameter::parse("t_p-halflife").is_ok());
        assert!(AxisParameter::parse("bogus").is_err());
    }

    #[test]
    fn log_axis_grid_hits_endpoints() {
        let a = axis(AxisParameter::TPHalfLife, 0.1, 60.0, 13, AxisScale::Log10);
        let values = a.values();
        assert!((values[0] - 0.1).abs() < 1e-12);
        assert!((values[12] - 60.0).abs() < 1e-10);
        for w in values.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn r_scale_axis_sets_the_geometric_mean() {
        let mut spec = load_preset("example7").unwrap();
        AxisParameter::RUniformScale.apply(&mut spec, 1.5);
        let log_mean: f64 = spec
            .genes
            .iter()
            .map(|g| (g.c * g.beta / (g.a * g.b * g.p0)).ln())
            .sum::<f64>()
            / 7.0;
        assert!((log_mean.exp().sqrt() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn seven_gene_cell_flips_with_delay_scale() {
        // The (nu = 2.6, R = 1.2) point oscillates with the template delays
        // and is stable with none.
        let template = load_preset("example7").unwrap();
        let x = axis(AxisParameter::Nu, 2.2, 3.0, 3, AxisScale::Linear);
        let y = axis(
            AxisParameter::TauUniformScale,
            0.0,
            1.0,
            2,
            AxisScale::Linear,
        );
        let grid = scan(&template, &x, &y).unwrap();
        // x index 1 holds nu = 2.6 with R untouched at 1.2.
        assert_eq!(grid.cell(1, 0).outcome, CellOutcome::Stable);
        assert_eq!(grid.cell(1, 1).outcome, CellOutcome::Oscillating);
    }

    #[test]
    fn delay_boundary_is_found_between_the_flipping_cells() {
        // At nu = 2.6 the margin flips sign between no delay and the full
        // template delays, so a critical delay scale exists strictly inside
        // (0, 1) and column bisection pins it.
        let template = load_preset("example7").unwrap();
        let x = axis(AxisParameter::Nu, 2.6, 2.61, 2, AxisScale::Linear);
        let y = axis(
            AxisParameter::TauUniformScale,
            0.0,
            1.0,
            2,
            AxisScale::Linear,
        );
        let grid = scan(&template, &x, &y).unwrap();
        let boundary = trace_boundary(&grid, 1e-6);
        assert!(!boundary.is_empty());
        for p in &boundary {
            assert!(p.y > 0.0 && p.y < 1.0, "crossing at delay scale {}", p.y);
            let cell = evaluate_cell(&template, &grid.x, p.x, &grid.y, p.y);
            assert!(cell.margin.abs() <= 1e-6);
        }
    }

    #[test]
    fn all_oscillating_grid_has_empty_boundary() {
        let template = load_preset("counterexample").unwrap();
        let x = axis(AxisParameter::Nu, 2.0, 2.5, 3, AxisScale::Linear);
        let y = axis(
            AxisParameter::TauUniformScale,
            1.0,
            2.0,
            3,
            AxisScale::Linear,
        );
        let grid = scan(&template, &x, &y).unwrap();
        assert!(grid
            .cells
            .iter()
            .all(|c| c.outcome == CellOutcome::Oscillating));
        assert!(trace_boundary(&grid, 1e-6).is_empty());
    }

    #[test]
    fn hes7_row_boundary_matches_the_reported_edge() {
        // Sweep protein half-life along the wild-type row; the oscillating
        // stretch ends near 22 minutes.
        let template = load_preset("hes7_wild").unwrap();
        let x = axis(AxisParameter::TPHalfLife, 0.1, 60.0, 40, AxisScale::Log10);
        let y = axis(AxisParameter::TRHalfLife, 1.5, 6.0, 3, AxisScale::Log10);
        let grid = scan(&template, &x, &y).unwrap();
        // Middle row sits exactly at t_r = 3 (geometric midpoint of the range).
        assert!((grid.y.value(1) - 3.0).abs() < 1e-9);
        let boundary = trace_boundary(&grid, 1e-9);
        let edge = boundary
            .iter()
            .filter(|p| (p.y - 3.0).abs() < 1e-6)
            .map(|p| p.x)
            .fold(f64::NAN, f64::max);
        assert!((edge - 22.0).abs() <= 1.0, "edge at t_p = {edge}");
    }

    #[test]
    fn repressilator_operating_point_oscillates_in_the_map() {
        let template = load_preset("repressilator").unwrap();
        let x = axis(AxisParameter::Alpha, 100.0, 1000.0, 5, AxisScale::Log10);
        let y = axis(AxisParameter::Gamma, 0.05, 0.8, 5, AxisScale::Log10);
        let grid = scan(&template, &x, &y).unwrap();
        let cell = evaluate_cell(&template, &grid.x, 624.0, &grid.y, 0.2);
        assert_eq!(cell.outcome, CellOutcome::Oscillating);
        assert!(cell.margin > 0.0);
    }

    #[test]
    fn monotone_in_nu_and_r_along_grid_lines() {
        let template = load_preset("example7").unwrap();
        let x = axis(AxisParameter::Nu, 1.2, 6.0, 25, AxisScale::Linear);
        let y = axis(
            AxisParameter::RUniformScale,
            0.6,
            3.0,
            25,
            AxisScale::Linear,
        );
        let grid = scan(&template, &x, &y).unwrap();
        // Along increasing nu (rows) and increasing R (columns), once
        // oscillating never back to stable.
        for iy in 0..25 {
            let mut seen = false;
            for ix in 0..25 {
                match grid.cell(ix, iy).outcome {
                    CellOutcome::Oscillating => seen = true,
                    CellOutcome::Stable => assert!(!seen, "row {iy} regressed at {ix}"),
                    CellOutcome::Undetermined => {}
                }
            }
        }
        for ix in 0..25 {
            let mut seen = false;
            for iy in 0..25 {
                match grid.cell(ix, iy).outcome {
                    CellOutcome::Oscillating => seen = true,
                    CellOutcome::Stable => assert!(!seen, "column {ix} regressed at {iy}"),
                    CellOutcome::Undetermined => {}
                }
            }
        }
    }

    #[test]
    fn grid_csv_is_deterministic_and_well_shaped() {
        let template = load_preset("repressilator").unwrap();
        let x = axis(AxisParameter::Alpha, 10.0, 1000.0, 6, AxisScale::Log10);
        let y = axis(AxisParameter::Gamma, 0.05, 1.0, 4, AxisScale::Log10);
        let grid_a = scan(&template, &x, &y).unwrap();
        let grid_b = scan(&template, &x, &y).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_grid_csv(&grid_a, &mut csv_a).unwrap();
        write_grid_csv(&grid_b, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        let text = String::from_utf8(csv_a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,outcome,L,L_bar,margin");
        assert_eq!(lines.count(), 24);
        let meta = axes_metadata(&grid_a);
        assert_eq!(meta["x"]["parameter"], "alpha");
        assert_eq!(meta["y"]["n"], 4);
    }
}
