//! Truncated periodic macroscopic grids, unit-cell grids, and the fields that
//! live on them.
//!
//! The macroscopic box is `[-L, L)^N` with periodic wrap and nodes
//! `x_i = -L + i h`, `h = 2L / M`. The cell `[0, 1)^N` has nodes `y_j = j / M_y`.
//! All quadratures are rectangle rules with pairwise summation.

use crate::error::{invalid, Error, Result};
use crate::micro::MicroFunction;
use crate::profile::MacroProfile;
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Fixed-size point; only the first `dim` components are meaningful.
pub type Point = [f64; 2];

fn check_points(points: usize, what: &str) -> Result<()> {
    if points < 8 || !points.is_power_of_two() {
        return invalid(format!("{what} must be a power of two >= 8, got {points}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacroGrid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl MacroGrid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("macro grid dimension must be 1 or 2, got {dim}"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return invalid(format!("half width must be positive, got {half_width}"));
        }
        check_points(points, "points per axis")?;
        Ok(MacroGrid {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// `h^N`, the weight of one node in the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Node position for a row-major flat index.
    pub fn point(&self, flat: usize) -> Point {
        match self.dim {
            1 => [self.coordinate(flat), 0.0],
            _ => [self.coordinate(flat / self.points), self.coordinate(flat % self.points)],
        }
    }

    /// Row-major flat index of the node `(i_1, ..., i_N)`, each taken mod `M`.
    pub fn flat_index(&self, idx: &[i64]) -> usize {
        let m = self.points as i64;
        idx.iter()
            .fold(0usize, |acc, i| acc * self.points + i.rem_euclid(m) as usize)
    }

    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGrid {
    dim: usize,
    points: usize,
}

impl CellGrid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("cell grid dimension must be 1 or 2, got {dim}"));
        }
        check_points(points, "cell points per axis")?;
        Ok(CellGrid { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(1 / M_y)^N`.
    pub fn cell_volume(&self) -> f64 {
        (1.0 / self.points as f64).powi(self.dim as i32)
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    pub fn point(&self, flat: usize) -> Point {
        let m = self.points as f64;
        match self.dim {
            1 => [flat as f64 / m, 0.0],
            _ => [(flat / self.points) as f64 / m, (flat % self.points) as f64 / m],
        }
    }
}

/// Real field sampled on a [`MacroGrid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroField {
    grid: MacroGrid,
    values: Vec<f64>,
}

impl MacroField {
    pub fn new(grid: MacroGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        Ok(MacroField { grid, values })
    }

    pub fn zeros(grid: MacroGrid) -> Self {
        MacroField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: MacroGrid, value: f64) -> Self {
        MacroField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples a profile at every node.
    pub fn sample(grid: MacroGrid, profile: &(impl MacroProfile + ?Sized)) -> Self {
        let values = (0..grid.len())
            .map(|i| profile.value(&grid.point(i)[..grid.dim()]))
            .collect();
        MacroField { grid, values }
    }

    /// Unchecked constructor for values produced by the crate's own kernels.
    pub(crate) fn from_raw(grid: MacroGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        MacroField { grid, values }
    }

    pub fn grid(&self) -> &MacroGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Rectangle rule `h^N sum u_i`.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * pairwise_sum(&self.values)
    }

    /// Discrete `(h^N sum |u_i|^p)^(1/p)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp(&self.values, self.grid.cell_volume(), p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Element-wise product, used to form `u * psi^eps` before integration.
    pub fn mul(&self, other: &MacroField) -> Result<MacroField> {
        self.same_grid(other)?;
        Ok(MacroField::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &MacroField, b: f64) -> Result<MacroField> {
        self.same_grid(other)?;
        Ok(MacroField::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    /// Weighted inner product `h^N sum u_i v_i`.
    pub fn dot(&self, other: &MacroField) -> Result<f64> {
        self.same_grid(other)?;
        let (u, v) = (&self.values, &other.values);
        Ok(self.grid.cell_volume() * pairwise_sum_by(u.len(), &|i| u[i] * v[i]))
    }

    /// Periodic translate `x -> u(x + shift * h)` by whole grid steps per axis.
    pub fn roll(&self, shift: &[i64]) -> MacroField {
        let g = self.grid;
        let values = (0..g.len())
            .map(|flat| {
                let idx = g.axis_indices(flat);
                let src: Vec<i64> = (0..g.dim()).map(|a| idx[a] as i64 + shift[a]).collect();
                self.values[g.flat_index(&src)]
            })
            .collect();
        MacroField::from_raw(g, values)
    }

    pub(crate) fn same_grid(&self, other: &MacroField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }
}

pub(crate) fn lp(values: &[f64], weight: f64, p: f64) -> f64 {
    if p == 1.0 {
        weight * pairwise_sum_by(values.len(), &|i| values[i].abs())
    } else if p == 2.0 {
        (weight * pairwise_sum_by(values.len(), &|i| values[i] * values[i])).sqrt()
    } else {
        (weight * pairwise_sum_by(values.len(), &|i| values[i].abs().powf(p))).powf(1.0 / p)
    }
}

/// Two-scale field `u_0(x, y)` on macro grid x cell grid, stored row-major
/// with axis order `(x_1, .., x_N, y_1, .., y_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoScaleField {
    macro_grid: MacroGrid,
    cell: CellGrid,
    values: Vec<f64>,
}

impl TwoScaleField {
    pub fn new(macro_grid: MacroGrid, cell: CellGrid, values: Vec<f64>) -> Result<Self> {
        if macro_grid.dim() != cell.dim() {
            return Err(Error::GridMismatch("macro and cell dimensions differ".into()));
        }
        if values.len() != macro_grid.len() * cell.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} product grid",
                values.len(),
                macro_grid.len(),
                cell.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        Ok(TwoScaleField {
            macro_grid,
            cell,
            values,
        })
    }

    pub(crate) fn from_raw(macro_grid: MacroGrid, cell: CellGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), macro_grid.len() * cell.len());
        TwoScaleField {
            macro_grid,
            cell,
            values,
        }
    }

    pub fn zeros(macro_grid: MacroGrid, cell: CellGrid) -> Result<Self> {
        Self::new(macro_grid, cell, vec![0.0; macro_grid.len() * cell.len()])
    }

    /// `u_0(x_i, y_j) = f(x_i, y_j)`.
    pub fn from_fn(macro_grid: MacroGrid, cell: CellGrid, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let d = macro_grid.dim();
        let mut values = Vec::with_capacity(macro_grid.len() * cell.len());
        for i in 0..macro_grid.len() {
            let x = macro_grid.point(i);
            for j in 0..cell.len() {
                values.push(f(&x[..d], &cell.point(j)[..d]));
            }
        }
        Self::new(macro_grid, cell, values)
    }

    /// Separable field `a(x) p(y)`.
    pub fn tensor(a: &MacroField, cell: CellGrid, p: &[f64]) -> Result<Self> {
        if p.len() != cell.len() {
            return Err(Error::GridMismatch("cell factor length".into()));
        }
        let values = a.values.iter().flat_map(|ai| p.iter().map(move |pj| ai * pj)).collect();
        Self::new(a.grid, cell, values)
    }

    /// The y-constant lift `u_0(x, y) = u(x)`.
    pub fn lift(u: &MacroField, cell: CellGrid) -> Result<Self> {
        Self::tensor(u, cell, &vec![1.0; cell.len()])
    }

    pub fn macro_grid(&self) -> &MacroGrid {
        &self.macro_grid
    }

    pub fn cell(&self) -> &CellGrid {
        &self.cell
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The cell slice `y -> u_0(x_i, y)`.
    pub fn slice(&self, x_index: usize) -> &[f64] {
        let n = self.cell.len();
        &self.values[x_index * n..(x_index + 1) * n]
    }

    /// Multilinear interpolation in `y` (taken mod 1) at the macro node `x_index`.
    pub fn eval(&self, x_index: usize, y: &[f64]) -> Result<f64> {
        if x_index >= self.macro_grid.len() {
            return invalid(format!("macro index {x_index} out of range"));
        }
        if y.len() != self.cell.dim() || y.iter().any(|v| !v.is_finite()) {
            return invalid("cell point must be finite with the cell dimension");
        }
        Ok(interp_cell(self.slice(x_index), &self.cell, y))
    }

    /// `x_i -> u_0(x_i, x_i / eps mod 1)`.
    pub fn corrector_trace(&self, eps: f64) -> Result<MacroField> {
        if !(eps > 0.0 && eps.is_finite()) {
            return invalid(format!("scale parameter must be positive, got {eps}"));
        }
        let g = self.macro_grid;
        let d = g.dim();
        let values = (0..g.len())
            .map(|i| {
                let x = g.point(i);
                let y = [x[0] / eps, x[1] / eps];
                interp_cell(self.slice(i), &self.cell, &y[..d])
            })
            .collect();
        Ok(MacroField::from_raw(g, values))
    }

    /// `x -> int_Y u_0(x, y) dy`.
    pub fn cell_mean(&self) -> MacroField {
        let n = self.cell.len();
        let values = (0..self.macro_grid.len())
            .map(|i| pairwise_sum(self.slice(i)) / n as f64)
            .collect();
        MacroField::from_raw(self.macro_grid, values)
    }

    /// `h^N M_y^-N`, the product-grid quadrature weight.
    pub fn node_weight(&self) -> f64 {
        self.macro_grid.cell_volume() * self.cell.cell_volume()
    }

    pub fn integrate(&self) -> f64 {
        self.node_weight() * pairwise_sum(&self.values)
    }

    /// `||u_0||_{L^p(Q x Y)}` by the product rectangle rule.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp(&self.values, self.node_weight(), p)
    }

    /// Periodic translate in the macro variable by whole grid steps.
    pub fn roll_macro(&self, shift: &[i64]) -> TwoScaleField {
        let g = self.macro_grid;
        let n = self.cell.len();
        let mut values = Vec::with_capacity(self.values.len());
        for flat in 0..g.len() {
            let idx = g.axis_indices(flat);
            let src: Vec<i64> = (0..g.dim()).map(|a| idx[a] as i64 + shift[a]).collect();
            let s = g.flat_index(&src);
            values.extend_from_slice(&self.values[s * n..(s + 1) * n]);
        }
        TwoScaleField::from_raw(g, self.cell, values)
    }

    pub(crate) fn same_grids(&self, other: &TwoScaleField) -> Result<()> {
        if self.macro_grid != other.macro_grid || self.cell != other.cell {
            return Err(Error::GridMismatch("two-scale fields live on different grids".into()));
        }
        Ok(())
    }
}

fn interp_cell(slice: &[f64], cell: &CellGrid, y: &[f64]) -> f64 {
    let m = cell.points_per_axis();
    let locate = |v: f64| {
        let s = v * m as f64;
        let fl = s.floor();
        ((fl as i64).rem_euclid(m as i64) as usize, s - fl)
    };
    match cell.dim() {
        1 => {
            let (i, t) = locate(y[0]);
            let v0 = slice[i];
            if t == 0.0 {
                return v0;
            }
            v0 + t * (slice[(i + 1) % m] - v0)
        }
        _ => {
            let (i, tx) = locate(y[0]);
            let (j, ty) = locate(y[1]);
            let at = |a: usize, b: usize| slice[(a % m) * m + (b % m)];
            if tx == 0.0 && ty == 0.0 {
                return at(i, j);
            }
            (1.0 - tx) * ((1.0 - ty) * at(i, j) + ty * at(i, j + 1))
                + tx * ((1.0 - ty) * at(i + 1, j) + ty * at(i + 1, j + 1))
        }
    }
}

/// Samples the oscillating test function `psi^eps(x) = phi(x) w(x / eps)` on the grid.
pub fn sample_trace(
    phi: &(impl MacroProfile + ?Sized),
    w: &MicroFunction,
    eps: f64,
    grid: &MacroGrid,
) -> Result<MacroField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("scale parameter must be positive, got {eps}"));
    }
    if w.dim() != grid.dim() {
        return Err(Error::GridMismatch("micro function and grid dimensions differ".into()));
    }
    let d = grid.dim();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let y = [x[0] / eps, x[1] / eps];
            phi.value(&x[..d]) * w.value(&y[..d])
        })
        .collect();
    Ok(MacroField::from_raw(*grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn line(points: usize) -> MacroGrid {
        MacroGrid::new(1, 8.0, points).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(MacroGrid::new(1, 8.0, 100).is_err());
        assert!(MacroGrid::new(1, 8.0, 4).is_err());
        assert!(MacroGrid::new(3, 8.0, 64).is_err());
        assert!(MacroGrid::new(1, -1.0, 64).is_err());
        assert!(CellGrid::new(1, 12).is_err());
        assert_eq!(line(256).spacing(), 1.0 / 16.0);
    }

    #[test]
    fn integrate_constant_is_box_measure() {
        let u = MacroField::constant(line(256), 1.0);
        assert!((u.integrate() - 16.0).abs() < 1e-12);
        assert!((u.lp_norm(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_odd_harmonic_vanishes() {
        let g = line(256);
        let u = MacroField::sample(g, &|x: &[f64]| (std::f64::consts::PI * x[0] / 8.0).sin());
        assert!(u.integrate().abs() < 1e-12);
    }

    #[test]
    fn zero_field_norm() {
        assert_eq!(MacroField::zeros(line(64)).lp_norm(1.0), 0.0);
        assert_eq!(MacroField::zeros(line(64)).lp_norm(2.0), 0.0);
    }

    #[test]
    fn nodes_start_at_minus_l() {
        let g = MacroGrid::new(2, 1.0, 8).unwrap();
        assert_eq!(g.point(0), [-1.0, -1.0]);
        assert_eq!(g.point(9), [-0.75, -0.75]);
        assert_eq!(g.flat_index(&[-1, 8]), 7 * 8);
    }

    #[test]
    fn new_rejects_bad_values() {
        assert!(MacroField::new(line(8), vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(MacroField::new(line(8), v).is_err());
    }

    #[test]
    fn trace_with_unit_micro_factor_reproduces_profile() {
        let g = line(64);
        let phi = Profile::gaussian(1.0);
        let t = sample_trace(&phi, &MicroFunction::constant(1, 1.0), 0.25, &g).unwrap();
        assert_eq!(t, MacroField::sample(g, &phi));
        assert!(sample_trace(&phi, &MicroFunction::constant(1, 1.0), 0.0, &g).is_err());
    }

    #[test]
    fn trace_at_grid_commensurate_scale() {
        let g = line(64);
        let h = g.spacing();
        let w = MicroFunction::periodic_cosines(1, &[(vec![1], 1.0, 0.0)]).unwrap();
        let t = sample_trace(&Profile::constant(1.0), &w, h, &g).unwrap();
        for (i, v) in t.values().iter().enumerate() {
            let x = g.coordinate(i);
            assert!((v - (std::f64::consts::TAU * x / h).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn roll_translates_by_grid_steps() {
        let g = line(8);
        let u = MacroField::new(g, (0..8).map(f64::from).collect()).unwrap();
        assert_eq!(u.roll(&[2]).values(), &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 0.0, 1.0]);
    }

    #[test]
    fn corrector_trace_of_y_independent_field_is_macro_slice() {
        let g = line(64);
        let cell = CellGrid::new(1, 16).unwrap();
        let a = MacroField::sample(g, &Profile::gaussian(1.0));
        let u0 = TwoScaleField::lift(&a, cell).unwrap();
        assert_eq!(u0.corrector_trace(0.37).unwrap(), a);
        let z = TwoScaleField::zeros(g, cell).unwrap();
        assert_eq!(z.corrector_trace(0.25).unwrap(), MacroField::zeros(g));
        assert!(u0.corrector_trace(0.0).is_err());
    }

    #[test]
    fn corrector_trace_of_cell_cosine() {
        let g = MacroGrid::new(1, 8.0, 512).unwrap();
        let cell = CellGrid::new(1, 64).unwrap();
        let u0 = TwoScaleField::from_fn(g, cell, |_, y| (std::f64::consts::TAU * y[0]).cos()).unwrap();
        for eps in [0.25, 0.125, 0.5] {
            let tr = u0.corrector_trace(eps).unwrap();
            for (i, v) in tr.values().iter().enumerate() {
                let x = g.coordinate(i);
                assert!((v - (std::f64::consts::TAU * x / eps).cos()).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn two_scale_eval_interpolates() {
        let g = line(8);
        let cell = CellGrid::new(1, 8).unwrap();
        let u0 = TwoScaleField::from_fn(g, cell, |x, y| x[0] + y[0]).unwrap();
        assert!((u0.eval(3, &[0.0625]).unwrap() - (g.coordinate(3) + 0.0625)).abs() < 1e-14);
        assert!(u0.eval(8, &[0.0]).is_err());
    }
}
