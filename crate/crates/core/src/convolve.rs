//! Convolutions on the truncated torus.
//!
//! The macroscopic convolution is the rectangle rule for
//! `(u * v)(x) = int u(t) v(x - t) dt` on the node set `x_i = -L + i h`:
//!
//! ```text
//! (u * v)_i = h^N sum_j u_j v_{(i - j + M/2) mod M}
//! ```
//!
//! since `x_i - x_j` is the node with index `i - j + M/2`. In Fourier space the
//! half-box offset is the factor `(-1)^k` per macro axis. The cell variable
//! has nodes `y_l = l / M_y`, so the cell part of `**` is a plain circular
//! convolution with weight `M_y^-N`.
//!
//! Transforms are unnormalized forward and scaled by the inverse size on the
//! way back.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{CellGrid, MacroField, MacroGrid, TwoScaleField};
use crate::sum::pairwise_sum_by;

/// Largest node count accepted by the brute-force oracles.
pub const DIRECT_LIMIT: usize = 4096;

/// A double convolution uses the per-mode path when the kernel has at most
/// this many active cell modes.
const MAX_SPARSE_MODES: usize = 8;

/// Cell modes whose kernel coefficient is below this fraction of the largest
/// one are treated as absent.
const MODE_THRESHOLD: f64 = 1e-14;

#[derive(Clone)]
struct AxisPlan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl AxisPlan {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        AxisPlan {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn get(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inv
        } else {
            &self.fwd
        }
    }
}

/// In-place multidimensional transform over the row-major array `data` of
/// the given `shape`, one plan per axis.
fn fft_nd(data: &mut [Complex64], shape: &[usize], plans: &[&AxisPlan], inverse: bool) {
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let mut line = Vec::new();
    for (axis, plan) in plans.iter().enumerate() {
        let fft = plan.get(inverse);
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        if stride == 1 {
            fft.process(data);
            continue;
        }
        line.resize(n, Complex64::new(0.0, 0.0));
        let block = n * stride;
        for start in (0..data.len()).step_by(block) {
            for s in 0..stride {
                for (t, c) in line.iter_mut().enumerate() {
                    *c = data[start + t * stride + s];
                }
                fft.process(&mut line);
                for (t, c) in line.iter().enumerate() {
                    data[start + t * stride + s] = *c;
                }
            }
        }
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|v| Complex64::new(*v, 0.0)).collect()
}

/// `(-1)^(k_1 + .. + k_N)` for the macro multi-index of a flat position.
fn centering_sign(grid: &MacroGrid, flat: usize) -> f64 {
    let idx = grid.axis_indices(flat);
    let parity = idx[..grid.dim()].iter().sum::<usize>() % 2;
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Convolution weights of a fixed operand in Fourier space, ready to be
/// applied repeatedly.
#[derive(Clone, Debug)]
pub struct MacroSpectrum {
    grid: MacroGrid,
    coeffs: Vec<Complex64>,
}

/// A cell Fourier mode `k` of a two-scale operand.
#[derive(Clone, Debug)]
pub struct CellMode {
    index: usize,
    /// 2 when the conjugate mode `-k` is folded into this one, else 1.
    multiplicity: f64,
    /// `exp(2 pi i k.y_l)` on the cell nodes.
    phase: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl CellMode {
    /// Flat cell index of the mode.
    pub fn index(&self) -> usize {
        self.index
    }
}

/// Fourier representation of a fixed two-scale operand of `**`.
#[derive(Clone, Debug)]
pub enum TwoScaleSpectrum {
    /// Only a few cell modes are present; each carries a macro spectrum.
    /// One mode of every conjugate pair is stored.
    Modes {
        macro_grid: MacroGrid,
        cell: CellGrid,
        modes: Vec<CellMode>,
    },
    /// Spectrum over the whole product grid.
    Full {
        macro_grid: MacroGrid,
        cell: CellGrid,
        coeffs: Vec<Complex64>,
    },
}

impl TwoScaleSpectrum {
    /// Number of cell modes carried by the per-mode representation, `None` for the full one.
    pub fn active_modes(&self) -> Option<usize> {
        match self {
            TwoScaleSpectrum::Modes { modes, .. } => Some(modes.iter().map(|m| m.multiplicity as usize).sum()),
            TwoScaleSpectrum::Full { .. } => None,
        }
    }

    fn grids(&self) -> (MacroGrid, CellGrid) {
        match self {
            TwoScaleSpectrum::Modes { macro_grid, cell, .. } | TwoScaleSpectrum::Full { macro_grid, cell, .. } => {
                (*macro_grid, *cell)
            }
        }
    }
}

/// Transform plans for one macro grid and, optionally, one cell grid.
#[derive(Clone)]
pub struct ConvPlan {
    grid: MacroGrid,
    cell: Option<CellGrid>,
    x: AxisPlan,
    y: Option<AxisPlan>,
    roots: Vec<Complex64>,
}

impl std::fmt::Debug for ConvPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvPlan")
            .field("grid", &self.grid)
            .field("cell", &self.cell)
            .finish()
    }
}

impl ConvPlan {
    pub fn new(grid: MacroGrid) -> Self {
        let mut planner = FftPlanner::new();
        ConvPlan {
            grid,
            cell: None,
            x: AxisPlan::new(&mut planner, grid.points_per_axis()),
            y: None,
            roots: Vec::new(),
        }
    }

    pub fn with_cell(grid: MacroGrid, cell: CellGrid) -> Result<Self> {
        if grid.dim() != cell.dim() {
            return Err(Error::GridMismatch("macro and cell dimensions differ".into()));
        }
        let mut planner = FftPlanner::new();
        let m = cell.points_per_axis();
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
            .collect();
        Ok(ConvPlan {
            grid,
            cell: Some(cell),
            x: AxisPlan::new(&mut planner, grid.points_per_axis()),
            y: Some(AxisPlan::new(&mut planner, m)),
            roots,
        })
    }

    pub fn macro_grid(&self) -> &MacroGrid {
        &self.grid
    }

    pub fn cell(&self) -> Option<&CellGrid> {
        self.cell.as_ref()
    }

    fn check_macro(&self, g: &MacroGrid) -> Result<()> {
        if *g != self.grid {
            return Err(Error::GridMismatch(format!(
                "plan for {:?}, field on {:?}",
                self.grid, g
            )));
        }
        Ok(())
    }

    fn check_two_scale(&self, g: &MacroGrid, c: &CellGrid) -> Result<(CellGrid, &AxisPlan)> {
        self.check_macro(g)?;
        match (&self.cell, &self.y) {
            (Some(cell), Some(y)) if cell == c => Ok((*cell, y)),
            _ => Err(Error::GridMismatch("plan has no matching cell grid".into())),
        }
    }

    fn macro_shape(&self) -> Vec<usize> {
        self.grid.shape()
    }

    fn macro_fft(&self, data: &mut [Complex64], inverse: bool) {
        let plans = vec![&self.x; self.grid.dim()];
        fft_nd(data, &self.macro_shape(), &plans, inverse);
    }

    /// Spectrum of `v` including the quadrature weight and the centering
    /// sign, so that [`ConvPlan::apply`] returns `u * v`.
    pub fn spectrum(&self, v: &MacroField) -> Result<MacroSpectrum> {
        self.check_macro(v.grid())?;
        Ok(MacroSpectrum {
            grid: self.grid,
            coeffs: self.macro_weights(to_complex(v.values())),
        })
    }

    fn macro_weights(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.macro_fft(&mut data, false);
        let w = self.grid.cell_volume();
        for (k, c) in data.iter_mut().enumerate() {
            *c *= w * centering_sign(&self.grid, k);
        }
        data
    }

    /// Complex macro convolution of `data` with a prepared spectrum, in place.
    fn apply_complex(&self, coeffs: &[Complex64], data: &mut [Complex64]) {
        self.macro_fft(data, false);
        for (d, k) in data.iter_mut().zip(coeffs) {
            *d *= k;
        }
        self.macro_fft(data, true);
        let scale = 1.0 / self.grid.len() as f64;
        for d in data.iter_mut() {
            *d *= scale;
        }
    }

    pub fn apply(&self, spectrum: &MacroSpectrum, u: &MacroField) -> Result<MacroField> {
        self.check_macro(u.grid())?;
        if spectrum.grid != self.grid {
            return Err(Error::GridMismatch("spectrum prepared on another grid".into()));
        }
        let mut data = to_complex(u.values());
        self.apply_complex(&spectrum.coeffs, &mut data);
        Ok(MacroField::from_raw(
            self.grid,
            data.into_iter().map(|c| c.re).collect(),
        ))
    }

    pub fn conv(&self, u: &MacroField, v: &MacroField) -> Result<MacroField> {
        u.same_grid(v)?;
        let s = self.spectrum(v)?;
        self.apply(&s, u)
    }

    /// Prepares `v0` as the fixed operand of `**`, choosing the per-mode
    /// representation when `v0` has few cell modes.
    pub fn two_scale_spectrum(&self, v0: &TwoScaleField) -> Result<TwoScaleSpectrum> {
        let (cell, y) = self.check_two_scale(v0.macro_grid(), v0.cell())?;
        let nx = self.grid.len();
        let ny = cell.len();
        let cell_shape = cell.shape();
        let y_plans = vec![y; cell.dim()];

        // Cell Fourier coefficients per macro node, normalized by M_y^N.
        let mut proj = to_complex(v0.values());
        let inv_ny = 1.0 / ny as f64;
        for chunk in proj.chunks_exact_mut(ny) {
            fft_nd(chunk, &cell_shape, &y_plans, false);
            for c in chunk.iter_mut() {
                *c *= inv_ny;
            }
        }
        let mut peak = vec![0.0_f64; ny];
        for chunk in proj.chunks_exact(ny) {
            for (p, c) in peak.iter_mut().zip(chunk) {
                *p = p.max(c.norm());
            }
        }
        let top = peak.iter().fold(0.0_f64, |m, p| m.max(*p));
        let active: Vec<usize> = (0..ny).filter(|k| peak[*k] > MODE_THRESHOLD * top).collect();

        if active.len() <= MAX_SPARSE_MODES {
            let modes = active
                .iter()
                .filter(|k| **k <= conjugate_mode(&cell, **k))
                .map(|&k| {
                    let line: Vec<Complex64> = (0..nx).map(|i| proj[i * ny + k]).collect();
                    CellMode {
                        index: k,
                        multiplicity: if k == conjugate_mode(&cell, k) { 1.0 } else { 2.0 },
                        phase: (0..ny).map(|l| self.roots[self.phase_index(&cell, k, l)]).collect(),
                        coeffs: self.macro_weights(line),
                    }
                })
                .collect();
            return Ok(TwoScaleSpectrum::Modes {
                macro_grid: self.grid,
                cell,
                modes,
            });
        }

        let mut data = to_complex(v0.values());
        let shape: Vec<usize> = self.macro_shape().into_iter().chain(cell_shape).collect();
        let plans: Vec<&AxisPlan> = vec![&self.x; self.grid.dim()].into_iter().chain(y_plans).collect();
        fft_nd(&mut data, &shape, &plans, false);
        let w = v0.node_weight();
        for (flat, c) in data.iter_mut().enumerate() {
            *c *= w * centering_sign(&self.grid, flat / ny);
        }
        Ok(TwoScaleSpectrum::Full {
            macro_grid: self.grid,
            cell,
            coeffs: data,
        })
    }

    /// Phase index `k . l mod M_y` for flat cell mode `k` and flat cell node `l`.
    fn phase_index(&self, cell: &CellGrid, k: usize, l: usize) -> usize {
        let m = cell.points_per_axis();
        match cell.dim() {
            1 => (k * l) % m,
            _ => ((k / m) * (l / m) + (k % m) * (l % m)) % m,
        }
    }

    pub fn apply_two_scale(&self, spectrum: &TwoScaleSpectrum, u0: &TwoScaleField) -> Result<TwoScaleField> {
        let (cell, _) = self.check_two_scale(u0.macro_grid(), u0.cell())?;
        let mut out = vec![0.0; u0.values().len()];
        self.apply_two_scale_into(spectrum, &|i, buf| buf.copy_from_slice(u0.slice(i)), &mut out)?;
        Ok(TwoScaleField::from_raw(self.grid, cell, out))
    }

    /// `(operand ** v)` written into `out`, where `fill(i, buf)` writes the
    /// cell slice of `v` at macro node `i` into `buf`.
    pub(crate) fn apply_two_scale_into(
        &self,
        spectrum: &TwoScaleSpectrum,
        fill: &dyn Fn(usize, &mut [f64]),
        out: &mut [f64],
    ) -> Result<()> {
        let (grid, cell) = spectrum.grids();
        let y = match (&self.y, self.cell) {
            (Some(y), Some(c)) if c == cell && grid == self.grid => y,
            _ => return Err(Error::GridMismatch("spectrum prepared on other grids".into())),
        };
        let nx = self.grid.len();
        let ny = cell.len();
        if out.len() != nx * ny {
            return Err(Error::GridMismatch("output buffer has the wrong length".into()));
        }
        let mut buf = vec![0.0; ny];
        match spectrum {
            TwoScaleSpectrum::Modes { modes, .. } => {
                let inv_ny = 1.0 / ny as f64;
                let mut proj = vec![Complex64::new(0.0, 0.0); modes.len() * nx];
                for i in 0..nx {
                    fill(i, &mut buf);
                    for (m, mode) in modes.iter().enumerate() {
                        proj[m * nx + i] = project(&buf, &mode.phase) * inv_ny;
                    }
                }
                for (m, mode) in modes.iter().enumerate() {
                    self.apply_complex(&mode.coeffs, &mut proj[m * nx..(m + 1) * nx]);
                }
                out.fill(0.0);
                for (m, mode) in modes.iter().enumerate() {
                    let w = mode.multiplicity;
                    for (i, row) in out.chunks_exact_mut(ny).enumerate() {
                        let g = proj[m * nx + i] * w;
                        for (o, p) in row.iter_mut().zip(&mode.phase) {
                            *o += g.re * p.re - g.im * p.im;
                        }
                    }
                }
            }
            TwoScaleSpectrum::Full { coeffs, .. } => {
                let mut data = Vec::with_capacity(nx * ny);
                for i in 0..nx {
                    fill(i, &mut buf);
                    data.extend(buf.iter().map(|v| Complex64::new(*v, 0.0)));
                }
                let shape: Vec<usize> = self.macro_shape().into_iter().chain(cell.shape()).collect();
                let plans: Vec<&AxisPlan> = vec![&self.x; self.grid.dim()]
                    .into_iter()
                    .chain(vec![y; cell.dim()])
                    .collect();
                fft_nd(&mut data, &shape, &plans, false);
                for (d, k) in data.iter_mut().zip(coeffs) {
                    *d *= k;
                }
                fft_nd(&mut data, &shape, &plans, true);
                let scale = 1.0 / data.len() as f64;
                for (o, d) in out.iter_mut().zip(&data) {
                    *o = d.re * scale;
                }
            }
        }
        Ok(())
    }

    /// Macro convolution of real `input` with a prepared spectrum, written into `out`.
    pub(crate) fn apply_into(&self, spectrum: &MacroSpectrum, input: impl Iterator<Item = f64>, out: &mut [f64]) {
        let mut data: Vec<Complex64> = input.map(|v| Complex64::new(v, 0.0)).collect();
        self.apply_complex(&spectrum.coeffs, &mut data);
        for (o, d) in out.iter_mut().zip(&data) {
            *o = d.re;
        }
    }

    pub fn double_conv(&self, u0: &TwoScaleField, v0: &TwoScaleField) -> Result<TwoScaleField> {
        u0.same_grids(v0)?;
        let s = self.two_scale_spectrum(v0)?;
        self.apply_two_scale(&s, u0)
    }
}

/// Flat index of the cell mode `-k`.
fn conjugate_mode(cell: &CellGrid, k: usize) -> usize {
    let m = cell.points_per_axis();
    match cell.dim() {
        1 => (m - k) % m,
        _ => ((m - k / m) % m) * m + (m - k % m) % m,
    }
}

/// `sum_l f_l conj(phase_l)`, summed pairwise.
fn project(f: &[f64], phase: &[Complex64]) -> Complex64 {
    if f.len() <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, p) in f.iter().zip(phase) {
            acc.re += v * p.re;
            acc.im -= v * p.im;
        }
        return acc;
    }
    let mid = f.len() / 2;
    project(&f[..mid], &phase[..mid]) + project(&f[mid..], &phase[mid..])
}

/// FFT convolution of two fields on the same macro grid.
pub fn conv_macro(u: &MacroField, v: &MacroField) -> Result<MacroField> {
    ConvPlan::new(*u.grid()).conv(u, v)
}

fn check_cap(points: usize) -> Result<()> {
    if points > DIRECT_LIMIT {
        return Err(Error::SizeCap {
            points,
            limit: DIRECT_LIMIT,
        });
    }
    Ok(())
}

/// Macro index of `x_i - x_j`.
fn diff_index(grid: &MacroGrid, i: usize, j: usize) -> usize {
    let (a, b) = (grid.axis_indices(i), grid.axis_indices(j));
    let half = (grid.points_per_axis() / 2) as i64;
    let idx: Vec<i64> = (0..grid.dim()).map(|d| a[d] as i64 - b[d] as i64 + half).collect();
    grid.flat_index(&idx)
}

/// Cell index of `y_l - y_m`.
fn cell_diff_index(cell: &CellGrid, l: usize, m: usize) -> usize {
    let n = cell.points_per_axis();
    match cell.dim() {
        1 => (l + n - m) % n,
        _ => ((l / n + n - m / n) % n) * n + (l % n + n - m % n) % n,
    }
}

/// Direct `O(M^{2N})` evaluation of the macro convolution sum.
pub fn conv_direct(u: &MacroField, v: &MacroField) -> Result<MacroField> {
    u.same_grid(v)?;
    let g = *u.grid();
    check_cap(g.len())?;
    let (uv, vv) = (u.values(), v.values());
    let w = g.cell_volume();
    let values = (0..g.len())
        .map(|i| w * pairwise_sum_by(g.len(), &|j| uv[j] * vv[diff_index(&g, i, j)]))
        .collect();
    Ok(MacroField::from_raw(g, values))
}

/// FFT evaluation of `u0 ** v0`.
pub fn double_conv(u0: &TwoScaleField, v0: &TwoScaleField) -> Result<TwoScaleField> {
    ConvPlan::with_cell(*u0.macro_grid(), *u0.cell())?.double_conv(u0, v0)
}

/// Direct evaluation of `u0 ** v0` over the product grid.
pub fn double_conv_direct(u0: &TwoScaleField, v0: &TwoScaleField) -> Result<TwoScaleField> {
    u0.same_grids(v0)?;
    let (g, c) = (*u0.macro_grid(), *u0.cell());
    let (nx, ny) = (g.len(), c.len());
    check_cap(nx * ny)?;
    let (a, b) = (u0.values(), v0.values());
    let w = u0.node_weight();
    let values = (0..nx * ny)
        .map(|p| {
            let (i, l) = (p / ny, p % ny);
            w * pairwise_sum_by(nx * ny, &|q| {
                let (j, m) = (q / ny, q % ny);
                a[q] * b[diff_index(&g, i, j) * ny + cell_diff_index(&c, l, m)]
            })
        })
        .collect();
    Ok(TwoScaleField::from_raw(g, c, values))
}

/// Direct circular convolution on the cell, `M_y^-N sum_m p_m q_{l - m}`.
pub fn cell_conv_direct(p: &[f64], q: &[f64], cell: &CellGrid) -> Result<Vec<f64>> {
    let n = cell.len();
    if p.len() != n || q.len() != n {
        return Err(Error::GridMismatch("cell samples do not match the cell grid".into()));
    }
    check_cap(n)?;
    let w = cell.cell_volume();
    Ok((0..n)
        .map(|l| w * pairwise_sum_by(n, &|m| p[m] * q[cell_diff_index(cell, l, m)]))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoungReport {
    pub p: f64,
    /// `||u0 ** v0||_p`.
    pub lhs: f64,
    /// `||u0||_p ||v0||_1`.
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates both sides of `||u0 ** v0||_p <= ||u0||_p ||v0||_1`.
pub fn young_check(u0: &TwoScaleField, v0: &TwoScaleField, p: f64) -> Result<YoungReport> {
    if p != 1.0 && p != 2.0 {
        return crate::error::invalid(format!("Young check supports p in {{1, 2}}, got {p}"));
    }
    let lhs = double_conv(u0, v0)?.lp_norm(p);
    let rhs = u0.lp_norm(p) * v0.lp_norm(1.0);
    Ok(YoungReport {
        p,
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;

    fn delta(grid: MacroGrid) -> MacroField {
        let mut v = vec![0.0; grid.len()];
        let half = grid.points_per_axis() as i64 / 2;
        v[grid.flat_index(&vec![half; grid.dim()])] = 1.0 / grid.cell_volume();
        MacroField::new(grid, v).unwrap()
    }

    #[test]
    fn delta_is_identity() {
        for dim in [1, 2] {
            let g = MacroGrid::new(dim, 2.0, 16).unwrap();
            let u = MacroField::sample(g, &|x: &[f64]| x[0].sin() + x.iter().sum::<f64>().powi(2));
            let fft = conv_macro(&delta(g), &u).unwrap();
            let direct = conv_direct(&delta(g), &u).unwrap();
            for ((a, b), c) in fft.values().iter().zip(direct.values()).zip(u.values()) {
                assert!((a - c).abs() < 1e-12);
                assert!((b - c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn indicator_hat_peak() {
        let g = MacroGrid::new(1, 8.0, 512).unwrap();
        let ind = MacroField::sample(g, &Profile::indicator(0.5));
        let hat = conv_macro(&ind, &ind).unwrap();
        assert!((hat.values()[256] - 1.0).abs() <= 2.0 * g.spacing());
    }

    #[test]
    fn sparse_and_full_paths_agree() {
        let g = MacroGrid::new(1, 2.0, 16).unwrap();
        let c = CellGrid::new(1, 16).unwrap();
        let plan = ConvPlan::with_cell(g, c).unwrap();
        let k_sparse = TwoScaleField::from_fn(g, c, |x, y| {
            (-x[0] * x[0]).exp() * (1.0 + 0.5 * (std::f64::consts::TAU * y[0]).cos())
        })
        .unwrap();
        let k_full = TwoScaleField::from_fn(g, c, |x, y| (-x[0] * x[0]).exp() * (1.0 + y[0] * y[0])).unwrap();
        let u = TwoScaleField::from_fn(g, c, |x, y| (x[0] + 3.0 * y[0]).cos()).unwrap();
        let s = plan.two_scale_spectrum(&k_sparse).unwrap();
        assert_eq!(s.active_modes(), Some(3));
        assert_eq!(plan.two_scale_spectrum(&k_full).unwrap().active_modes(), None);
        for k in [&k_sparse, &k_full] {
            let fast = plan.double_conv(&u, k).unwrap();
            let slow = double_conv_direct(&u, k).unwrap();
            for (a, b) in fast.values().iter().zip(slow.values()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn direct_cap() {
        let g = MacroGrid::new(2, 1.0, 128).unwrap();
        let u = MacroField::zeros(g);
        assert!(matches!(conv_direct(&u, &u), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn young_zero_operand() {
        let g = MacroGrid::new(1, 1.0, 8).unwrap();
        let c = CellGrid::new(1, 8).unwrap();
        let u = TwoScaleField::from_fn(g, c, |x, y| x[0] - y[0]).unwrap();
        let r = young_check(&u, &TwoScaleField::zeros(g, c).unwrap(), 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, true));
        assert!(young_check(&u, &u, 3.0).is_err());
    }
}
