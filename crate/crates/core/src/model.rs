//! Connectivity kernels, firing rates and the right-hand sides of the
//! heterogeneous and homogenized equations.

use crate::convolve::{ConvPlan, MacroSpectrum, TwoScaleSpectrum};
use crate::error::{invalid, Error, Result};
use crate::grid::{sample_trace, CellGrid, MacroField, MacroGrid, TwoScaleField};
use crate::micro::{AlgebraKind, MicroFunction};
use crate::profile::Profile;

/// Slack allowed when checking sampled nonnegativity and the mass bound.
const ROUNDING: f64 = 1e-12;

/// One separable term `J_m(x) P_m(y)` of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTerm {
    pub profile: Profile,
    pub micro: MicroFunction,
}

/// `J(x, y) = sigma * sum_m J_m(x) P_m(y)` with nonnegative compactly supported `J_m`
/// and nonnegative `P_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    terms: Vec<KernelTerm>,
    scale: f64,
}

impl KernelSpec {
    pub fn new(terms: Vec<KernelTerm>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return invalid(format!("kernel scale must be positive, got {scale}"));
        }
        let dim = terms.first().map(|t| t.micro.dim());
        for (m, t) in terms.iter().enumerate() {
            t.profile.validate()?;
            if !t.profile.is_nonnegative() {
                return invalid(format!("kernel term {m}: macro profile must be nonnegative"));
            }
            if t.profile.support_radius().is_none() {
                return invalid(format!("kernel term {m}: macro profile must have bounded support"));
            }
            if Some(t.micro.dim()) != dim {
                return invalid("kernel terms have different dimensions");
            }
            if t.micro.sampled_min() < -ROUNDING {
                return invalid(format!("kernel term {m}: micro factor must be nonnegative"));
            }
        }
        Ok(KernelSpec { terms, scale })
    }

    /// Chooses the scale so that the largest mass over `schedule` equals `target`.
    pub fn normalized(terms: Vec<KernelTerm>, target: f64, grid: &MacroGrid, schedule: &[f64]) -> Result<Self> {
        if !(target > 0.0 && target <= 1.0) {
            return invalid(format!("target kernel mass must lie in (0, 1], got {target}"));
        }
        if schedule.is_empty() {
            return invalid("normalization needs a nonempty scale schedule");
        }
        let unit = KernelSpec::new(terms, 1.0)?;
        let mut peak = 0.0_f64;
        for &eps in schedule {
            peak = peak.max(unit.mass(eps, grid)?);
        }
        if peak <= 0.0 {
            return invalid("kernel has zero mass on the grid");
        }
        let scaled = KernelSpec {
            scale: target / peak,
            ..unit
        };
        scaled.check_mass(grid, schedule)?;
        Ok(scaled)
    }

    /// The zero kernel.
    pub fn zero() -> Self {
        KernelSpec {
            terms: Vec::new(),
            scale: 1.0,
        }
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.micro.dim())
    }

    /// Max-norm radius outside which every macro profile vanishes.
    pub fn support_radius(&self) -> f64 {
        self.terms
            .iter()
            .filter_map(|t| t.profile.support_radius())
            .fold(0.0, f64::max)
    }

    pub fn is_y_independent(&self) -> bool {
        self.terms.iter().all(|t| t.micro.is_constant())
    }

    fn check_grid(&self, grid: &MacroGrid) -> Result<()> {
        match self.dim() {
            Some(d) if d != grid.dim() => Err(Error::GridMismatch("kernel and grid dimensions differ".into())),
            _ => Ok(()),
        }
    }

    /// `J^eps(x_i) = J(x_i, x_i / eps)`.
    pub fn trace(&self, eps: f64, grid: &MacroGrid) -> Result<MacroField> {
        self.check_grid(grid)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return invalid(format!("scale parameter must be positive, got {eps}"));
        }
        let mut acc = MacroField::zeros(*grid);
        for t in &self.terms {
            let term = sample_trace(&t.profile, &t.micro, eps, grid)?;
            acc = acc.lin_comb(1.0, &term, self.scale)?;
        }
        Ok(acc)
    }

    pub fn mass(&self, eps: f64, grid: &MacroGrid) -> Result<f64> {
        Ok(self.trace(eps, grid)?.integrate())
    }

    /// Fails unless the mass is at most one for every scale in `schedule`.
    pub fn check_mass(&self, grid: &MacroGrid, schedule: &[f64]) -> Result<()> {
        for &eps in schedule {
            let m = self.mass(eps, grid)?;
            if m > 1.0 + ROUNDING {
                return Err(Error::Config(format!("kernel mass {m} exceeds 1 at eps = {eps}")));
            }
        }
        Ok(())
    }

    /// `J(x_i, y_j)` on the product grid.
    pub fn two_scale(&self, grid: &MacroGrid, cell: &CellGrid) -> Result<TwoScaleField> {
        self.check_grid(grid)?;
        let mut values = vec![0.0; grid.len() * cell.len()];
        for t in &self.terms {
            reject_quasi_periodic(&t.micro)?;
            let p = t.micro.cell_samples(cell)?;
            let a = MacroField::sample(*grid, &t.profile);
            for (i, ai) in a.values().iter().enumerate() {
                for (j, pj) in p.iter().enumerate() {
                    values[i * cell.len() + j] += self.scale * ai * pj;
                }
            }
        }
        TwoScaleField::new(*grid, *cell, values)
    }
}

fn reject_quasi_periodic(u: &MicroFunction) -> Result<()> {
    if let AlgebraKind::QuasiPeriodic { .. } = u.algebra().kind {
        return invalid("quasi-periodic microstructure is not supported in the two-scale problem");
    }
    Ok(())
}

/// The activity response `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    /// `1 / (1 + exp(-gain (lambda - threshold)))`.
    Sigmoid { gain: f64, threshold: f64 },
    /// `h(lambda) = lambda`, for closed-form validation only; it is neither
    /// bounded nor nonnegative.
    Linear,
}

impl Activation {
    pub fn sigmoid(gain: f64, threshold: f64) -> Self {
        Activation::Sigmoid { gain, threshold }
    }

    #[inline]
    pub fn eval(&self, lambda: f64) -> f64 {
        match *self {
            Activation::Sigmoid { gain, threshold } => 1.0 / (1.0 + (-gain * (lambda - threshold)).exp()),
            Activation::Linear => lambda,
        }
    }

    /// Exact Lipschitz constant; the sigmoid's steepest slope is `gain / 4` at the threshold.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Activation::Sigmoid { gain, .. } => gain / 4.0,
            Activation::Linear => 1.0,
        }
    }
}

/// Separable firing rate `f(y, lambda) = g(y) h(lambda)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiringRate {
    g: MicroFunction,
    activation: Activation,
    g_sup: f64,
}

impl FiringRate {
    pub fn new(g: MicroFunction, activation: Activation) -> Result<Self> {
        if let Activation::Sigmoid { gain, threshold } = activation {
            if !(gain > 0.0 && gain.is_finite() && threshold.is_finite()) {
                return invalid(format!("sigmoid needs a positive finite gain, got {gain}"));
            }
        }
        if g.sampled_min() < -ROUNDING {
            return invalid("firing-rate modulation g must be nonnegative");
        }
        let g_sup = g.sup_norm();
        Ok(FiringRate { g, activation, g_sup })
    }

    pub fn g(&self) -> &MicroFunction {
        &self.g
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// False for the linear test activation, which breaks nonnegativity and boundedness.
    pub fn is_admissible(&self) -> bool {
        matches!(self.activation, Activation::Sigmoid { .. })
    }

    /// `k1 = sup g * Lip(h)`.
    pub fn k1(&self) -> f64 {
        self.g_sup * self.activation.lipschitz()
    }

    /// Discrete `|| g(./eps) h(0) ||_2` on `grid`.
    pub fn c1(&self, eps: f64, grid: &MacroGrid) -> Result<f64> {
        let zero = MacroField::zeros(*grid);
        Ok(self.apply(eps, &zero)?.lp_norm(2.0))
    }

    /// `g(x_i / eps) h(u_i)`.
    pub fn apply(&self, eps: f64, u: &MacroField) -> Result<MacroField> {
        let g = sample_trace(&Profile::constant(1.0), &self.g, eps, u.grid())?;
        Ok(self.apply_with_trace(g.values(), u))
    }

    fn apply_with_trace(&self, g: &[f64], u: &MacroField) -> MacroField {
        let h = self.activation;
        MacroField::from_raw(
            *u.grid(),
            g.iter().zip(u.values()).map(|(gi, ui)| gi * h.eval(*ui)).collect(),
        )
    }

    /// `g(y_j) h(u0(x_i, y_j))`.
    pub fn apply_two_scale(&self, u0: &TwoScaleField) -> Result<TwoScaleField> {
        reject_quasi_periodic(&self.g)?;
        let g = self.g.cell_samples(u0.cell())?;
        Ok(apply_cellwise(&g, self.activation, u0))
    }
}

fn apply_cellwise(g: &[f64], h: Activation, u0: &TwoScaleField) -> TwoScaleField {
    let n = g.len();
    let values = u0
        .values()
        .iter()
        .enumerate()
        .map(|(p, v)| g[p % n] * h.eval(*v))
        .collect();
    TwoScaleField::from_raw(*u0.macro_grid(), *u0.cell(), values)
}

/// A right-hand side `du/dt = -u + drive(u)` over a flat state vector.
pub trait Dynamics: Sync {
    /// Length of the state vector.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of one node, used for discrete norms.
    fn weight(&self) -> f64;

    /// Lipschitz constant `k1` of the firing rate.
    fn lipschitz(&self) -> f64;

    /// Writes the nonlocal term `J * f(u)` into `out`.
    fn drive_into(&self, state: &[f64], out: &mut [f64]);

    fn drive(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        self.drive_into(state, &mut out);
        out
    }

    /// Writes `-u + J * f(u)` into `out`.
    fn rhs_into(&self, state: &[f64], out: &mut [f64]) {
        self.drive_into(state, out);
        for (o, s) in out.iter_mut().zip(state) {
            *o -= s;
        }
    }

    fn rhs(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        self.rhs_into(state, &mut out);
        out
    }
}

/// `J^eps * f(./eps, u)` with the kernel spectrum and the modulation trace prepared once.
#[derive(Clone, Debug)]
pub struct HeteroOperator {
    grid: MacroGrid,
    plan: ConvPlan,
    kernel: MacroSpectrum,
    g_trace: Vec<f64>,
    activation: Activation,
    k1: f64,
    eps: f64,
}

impl HeteroOperator {
    pub fn new(kernel: &KernelSpec, firing: &FiringRate, eps: f64, grid: &MacroGrid) -> Result<Self> {
        if firing.g.dim() != grid.dim() {
            return Err(Error::GridMismatch("firing rate and grid dimensions differ".into()));
        }
        let plan = ConvPlan::new(*grid);
        let spectrum = plan.spectrum(&kernel.trace(eps, grid)?)?;
        let g_trace = sample_trace(&Profile::constant(1.0), &firing.g, eps, grid)?.into_values();
        Ok(HeteroOperator {
            grid: *grid,
            plan,
            kernel: spectrum,
            g_trace,
            activation: firing.activation,
            k1: firing.k1(),
            eps,
        })
    }

    pub fn grid(&self) -> &MacroGrid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rhs_field(&self, u: &MacroField) -> Result<MacroField> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch("state lives on another grid".into()));
        }
        Ok(MacroField::from_raw(self.grid, self.rhs(u.values())))
    }
}

impl Dynamics for HeteroOperator {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn weight(&self) -> f64 {
        self.grid.cell_volume()
    }

    fn lipschitz(&self) -> f64 {
        self.k1
    }

    fn drive_into(&self, state: &[f64], out: &mut [f64]) {
        let h = self.activation;
        let f = self.g_trace.iter().zip(state).map(|(g, u)| g * h.eval(*u));
        self.plan.apply_into(&self.kernel, f, out);
    }
}

/// `J ** f(., u0)` on the product grid.
#[derive(Clone, Debug)]
pub struct HomogOperator {
    grid: MacroGrid,
    cell: CellGrid,
    plan: ConvPlan,
    kernel: TwoScaleSpectrum,
    g_cell: Vec<f64>,
    activation: Activation,
    k1: f64,
}

impl HomogOperator {
    pub fn new(kernel: &KernelSpec, firing: &FiringRate, grid: &MacroGrid, cell: &CellGrid) -> Result<Self> {
        reject_quasi_periodic(&firing.g)?;
        let plan = ConvPlan::with_cell(*grid, *cell)?;
        let spectrum = plan.two_scale_spectrum(&kernel.two_scale(grid, cell)?)?;
        Ok(HomogOperator {
            grid: *grid,
            cell: *cell,
            plan,
            kernel: spectrum,
            g_cell: firing.g.cell_samples(cell)?,
            activation: firing.activation,
            k1: firing.k1(),
        })
    }

    pub fn grid(&self) -> &MacroGrid {
        &self.grid
    }

    pub fn cell(&self) -> &CellGrid {
        &self.cell
    }

    /// Number of cell modes the kernel carries, `None` when the full product transform is used.
    pub fn active_modes(&self) -> Option<usize> {
        self.kernel.active_modes()
    }

    pub fn rhs_field(&self, u0: &TwoScaleField) -> Result<TwoScaleField> {
        if *u0.macro_grid() != self.grid || *u0.cell() != self.cell {
            return Err(Error::GridMismatch("state lives on other grids".into()));
        }
        Ok(TwoScaleField::from_raw(self.grid, self.cell, self.rhs(u0.values())))
    }
}

impl Dynamics for HomogOperator {
    fn len(&self) -> usize {
        self.grid.len() * self.cell.len()
    }

    fn weight(&self) -> f64 {
        self.grid.cell_volume() * self.cell.cell_volume()
    }

    fn lipschitz(&self) -> f64 {
        self.k1
    }

    fn drive_into(&self, state: &[f64], out: &mut [f64]) {
        let (g, h) = (&self.g_cell, self.activation);
        let ny = g.len();
        let fill = |i: usize, buf: &mut [f64]| {
            for ((b, gl), u) in buf.iter_mut().zip(g).zip(&state[i * ny..(i + 1) * ny]) {
                *b = gl * h.eval(*u);
            }
        };
        self.plan
            .apply_two_scale_into(&self.kernel, &fill, out)
            .expect("operator grids are consistent");
    }
}

pub fn kernel_trace(kernel: &KernelSpec, eps: f64, grid: &MacroGrid) -> Result<MacroField> {
    kernel.trace(eps, grid)
}

pub fn kernel_mass(kernel: &KernelSpec, eps: f64, grid: &MacroGrid) -> Result<f64> {
    kernel.mass(eps, grid)
}

pub fn apply_firing(firing: &FiringRate, eps: f64, u: &MacroField) -> Result<MacroField> {
    firing.apply(eps, u)
}

pub fn apply_firing_two_scale(firing: &FiringRate, u0: &TwoScaleField) -> Result<TwoScaleField> {
    firing.apply_two_scale(u0)
}

/// `-u + J^eps * f(./eps, u)`.
pub fn hetero_rhs(kernel: &KernelSpec, firing: &FiringRate, eps: f64, u: &MacroField) -> Result<MacroField> {
    HeteroOperator::new(kernel, firing, eps, u.grid())?.rhs_field(u)
}

/// `-u0 + J ** f(., u0)`.
pub fn homog_rhs(kernel: &KernelSpec, firing: &FiringRate, u0: &TwoScaleField) -> Result<TwoScaleField> {
    HomogOperator::new(kernel, firing, u0.macro_grid(), u0.cell())?.rhs_field(u0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> MacroGrid {
        MacroGrid::new(1, 8.0, 256).unwrap()
    }

    fn flat_kernel(mass: f64) -> KernelSpec {
        let term = KernelTerm {
            profile: Profile::indicator(1.0),
            micro: MicroFunction::constant(1, 1.0),
        };
        KernelSpec::new(vec![term], mass / 2.0).unwrap()
    }

    #[test]
    fn indicator_kernel_value_at_origin() {
        let term = KernelTerm {
            profile: Profile::indicator(1.0),
            micro: MicroFunction::one_plus_cos(1, 1.0, 0.5),
        };
        let k = KernelSpec::new(vec![term], 1.0 / 3.0).unwrap();
        let tr = k.trace(0.25, &line()).unwrap();
        assert!((tr.values()[128] - 0.5).abs() < 1e-15);
        for eps in [1.0, 0.5, 0.25] {
            assert!(k.mass(eps, &line()).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn zero_state_rhs_is_half_mass() {
        let k = flat_kernel(0.6);
        let a = k.mass(0.5, &line()).unwrap();
        let f = FiringRate::new(MicroFunction::constant(1, 1.0), Activation::sigmoid(1.0, 0.0)).unwrap();
        let r = hetero_rhs(&k, &f, 0.5, &MacroField::zeros(line())).unwrap();
        for v in r.values() {
            assert!((v - a / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_constant_state() {
        let k = flat_kernel(0.6);
        let a = k.mass(0.5, &line()).unwrap();
        let f = FiringRate::new(MicroFunction::constant(1, 1.0), Activation::Linear).unwrap();
        assert!(!f.is_admissible());
        let r = hetero_rhs(&k, &f, 0.5, &MacroField::constant(line(), 0.7)).unwrap();
        for v in r.values() {
            assert!((v - (a - 1.0) * 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_lipschitz_constant() {
        let f = FiringRate::new(MicroFunction::one_plus_cos(1, 1.0, 0.5), Activation::sigmoid(2.0, 0.5)).unwrap();
        assert!((f.k1() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_modulation() {
        let g = MicroFunction::one_plus_cos(1, 0.2, 0.5);
        assert!(FiringRate::new(g, Activation::sigmoid(1.0, 0.0)).is_err());
        assert!(KernelSpec::new(vec![], 0.0).is_err());
    }

    #[test]
    fn normalization_hits_target() {
        let term = KernelTerm {
            profile: Profile::Gaussian {
                center: vec![],
                width: 0.5,
                amplitude: 1.0,
                cutoff: Some(3.0),
            },
            micro: MicroFunction::one_plus_cos(1, 1.0, 0.5),
        };
        let schedule = [0.25, 0.125];
        let k = KernelSpec::normalized(vec![term], 0.9, &line(), &schedule).unwrap();
        let top = schedule
            .iter()
            .map(|e| k.mass(*e, &line()).unwrap())
            .fold(0.0, f64::max);
        assert!((top - 0.9).abs() < 1e-12);
    }
}
