//! Microstructure functions drawn from three concrete algebras with mean value:
//! trigonometric polynomials (periodic or quasi-periodic), cell-sampled
//! periodic functions, and functions with a limit at infinity.
//!
//! The spectrum of each algebra is never represented abstractly. Mean values
//! are computed by the rule that matches the algebra: zero-frequency
//! coefficient, cell average, or value at infinity.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::CellGrid;
use crate::profile::Profile;
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Which algebra a [`MicroFunction`] belongs to.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraKind {
    Periodic,
    QuasiPeriodic { generators: Vec<Vec<f64>> },
    VanishingAtInfinity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraTag {
    pub kind: AlgebraKind,
    /// Dimension of the torus standing in for the spectrum; zero when the
    /// spectrum is a single point.
    pub spectrum_surrogate_dim: usize,
}

/// One harmonic `coeff * exp(2 pi i k.y)` with `k = sum_j index[j] * generator[j]`.
#[derive(Clone, Debug, PartialEq)]
struct Harmonic {
    index: Vec<i64>,
    frequency: Vec<f64>,
    coeff: Complex64,
}

/// Finite trigonometric polynomial over a set of generator frequencies.
///
/// Frequencies are kept as integer multi-indices over the generators so that
/// "frequency zero" is decided exactly rather than by a floating-point test.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    generators: Vec<Vec<f64>>,
    harmonics: Vec<Harmonic>,
    real: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSampled {
    dim: usize,
    resolution: usize,
    values: Vec<f64>,
    offset: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitAtInfinity {
    dim: usize,
    core: Profile,
    limit: f64,
    offset: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MicroFunction {
    TrigPoly(TrigPoly),
    CellSampled(CellSampled),
    LimitAtInfinity(LimitAtInfinity),
}

fn unit_generators(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 2 {
        return invalid(format!("dimension {dim} is not supported (1 or 2)"));
    }
    Ok(())
}

fn check_point(y: &[f64], dim: usize) -> Result<()> {
    if y.len() != dim {
        return invalid(format!("point has {} components, expected {dim}", y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return invalid(format!("non-finite evaluation point {y:?}"));
    }
    Ok(())
}

impl TrigPoly {
    /// Builds a polynomial from `(multi-index, coefficient)` pairs over the
    /// given generators. Repeated indices are merged.
    pub fn new(generators: Vec<Vec<f64>>, terms: Vec<(Vec<i64>, Complex64)>, real: bool) -> Result<Self> {
        let dim = generators.first().map(Vec::len).unwrap_or(0);
        check_dim(dim)?;
        if generators
            .iter()
            .any(|g| g.len() != dim || g.iter().any(|v| !v.is_finite()))
        {
            return invalid("generator frequencies must be finite vectors of equal dimension");
        }
        let d = generators.len();
        let mut merged: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (index, coeff) in terms {
            if index.len() != d {
                return invalid(format!("multi-index {index:?} does not match {d} generators"));
            }
            if !coeff.re.is_finite() || !coeff.im.is_finite() {
                return invalid("non-finite trigonometric coefficient");
            }
            *merged.entry(index).or_insert(Complex64::new(0.0, 0.0)) += coeff;
        }
        if real {
            for (index, c) in &merged {
                let neg: Vec<i64> = index.iter().map(|n| -n).collect();
                let partner = merged.get(&neg).copied().unwrap_or_default();
                let scale = 1.0 + c.norm();
                if (partner - c.conj()).norm() > 1e-12 * scale {
                    return invalid(format!(
                        "real trigonometric polynomial needs conjugate coefficients at {index:?} and {neg:?}"
                    ));
                }
            }
        }
        let harmonics = merged
            .into_iter()
            .map(|(index, coeff)| {
                let frequency = (0..dim)
                    .map(|a| index.iter().zip(&generators).map(|(n, g)| *n as f64 * g[a]).sum())
                    .collect();
                Harmonic {
                    index,
                    frequency,
                    coeff,
                }
            })
            .collect();
        Ok(TrigPoly {
            dim,
            generators,
            harmonics,
            real,
        })
    }

    /// Real polynomial `sum amp * cos(2 pi k.y + phase)` over the generators.
    pub fn from_cosines(generators: Vec<Vec<f64>>, terms: &[(Vec<i64>, f64, f64)]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(2 * terms.len());
        for (index, amp, phase) in terms {
            if index.iter().all(|n| *n == 0) {
                coeffs.push((index.clone(), Complex64::new(amp * phase.cos(), 0.0)));
            } else {
                let c = Complex64::from_polar(0.5 * amp, *phase);
                coeffs.push((index.clone(), c));
                coeffs.push((index.iter().map(|n| -n).collect(), c.conj()));
            }
        }
        TrigPoly::new(generators, coeffs, true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Whether the generators are exactly the unit vectors, i.e. the
    /// polynomial is 1-periodic in every axis.
    pub fn is_periodic(&self) -> bool {
        self.generators == unit_generators(self.dim)
    }

    /// Largest `|n_j|` over all harmonics and generators.
    pub fn degree(&self) -> i64 {
        self.harmonics
            .iter()
            .flat_map(|h| h.index.iter().map(|n| n.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn eval_complex(&self, y: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for h in &self.harmonics {
            let dot: f64 = h.frequency.iter().zip(y).map(|(k, v)| k * v).sum();
            // reduce before scaling so large arguments keep their phase
            let phase = TAU * (dot - dot.floor());
            acc += h.coeff * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    /// Value on the phase torus `theta in [0,1)^d`, where harmonic `n` reads
    /// `exp(2 pi i n.theta)`.
    fn eval_phase(&self, theta: &[f64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for h in &self.harmonics {
            let dot: f64 = h.index.iter().zip(theta).map(|(n, t)| *n as f64 * t).sum();
            acc += h.coeff * Complex64::from_polar(1.0, TAU * (dot - dot.floor()));
        }
        acc.re
    }

    /// Rectangle-rule average of `op(u)` over the phase torus at a
    /// resolution that integrates every product of two harmonics exactly.
    fn phase_torus_mean(&self, op: impl Fn(f64) -> f64) -> f64 {
        let d = self.generators.len();
        let need = (4 * self.degree() as usize + 4).next_power_of_two();
        let per_axis = match d {
            1 => need.max(256),
            2 => need.max(64),
            _ => need.max(16),
        };
        let total = per_axis.pow(d as u32);
        let sum = pairwise_sum_by(total, &|flat| {
            let mut t = [0.0; 8];
            let mut rem = flat;
            for a in (0..d).rev() {
                t[a] = (rem % per_axis) as f64 / per_axis as f64;
                rem /= per_axis;
            }
            op(self.eval_phase(&t[..d]))
        });
        sum / total as f64
    }

    fn shifted(&self, a: &[f64]) -> TrigPoly {
        let mut out = self.clone();
        for h in &mut out.harmonics {
            let dot: f64 = h.frequency.iter().zip(a).map(|(k, v)| k * v).sum();
            h.coeff *= Complex64::from_polar(1.0, TAU * (dot - dot.floor()));
        }
        out
    }
}

impl CellSampled {
    /// Samples at the nodes `j / resolution` of the unit cell, row-major.
    pub fn new(dim: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if resolution < 2 {
            return invalid("cell resolution must be at least 2");
        }
        if values.len() != resolution.pow(dim as u32) {
            return invalid(format!(
                "cell samples: got {} values for resolution {resolution} in dimension {dim}",
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("cell samples must be finite");
        }
        Ok(CellSampled {
            dim,
            resolution,
            values,
            offset: vec![0.0; dim],
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let m = self.resolution;
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for a in 0..self.dim {
            let s = (y[a] + self.offset[a]) * m as f64;
            let fl = s.floor();
            base[a] = (fl as i64).rem_euclid(m as i64) as usize;
            frac[a] = s - fl;
        }
        match self.dim {
            1 => {
                let v0 = self.values[base[0]];
                let v1 = self.values[(base[0] + 1) % m];
                v0 + frac[0] * (v1 - v0)
            }
            _ => {
                let at = |i: usize, j: usize| self.values[(i % m) * m + (j % m)];
                let (i, j) = (base[0], base[1]);
                let (fx, fy) = (frac[0], frac[1]);
                (1.0 - fx) * ((1.0 - fy) * at(i, j) + fy * at(i, j + 1))
                    + fx * ((1.0 - fy) * at(i + 1, j) + fy * at(i + 1, j + 1))
            }
        }
    }
}

impl LimitAtInfinity {
    /// `core + limit`, where `core` must have bounded support.
    pub fn new(dim: usize, core: Profile, limit: f64) -> Result<Self> {
        check_dim(dim)?;
        core.validate()?;
        if core.support_radius().is_none() {
            return invalid("the core of a function with a limit at infinity must have bounded support");
        }
        if !limit.is_finite() {
            return invalid("limit value must be finite");
        }
        Ok(LimitAtInfinity {
            dim,
            core,
            limit,
            offset: vec![0.0; dim],
        })
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn core(&self) -> &Profile {
        &self.core
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut p = [0.0; 2];
        for a in 0..self.dim {
            p[a] = y[a] + self.offset[a];
        }
        self.core.eval(&p[..self.dim]) + self.limit
    }
}

impl MicroFunction {
    pub fn constant(dim: usize, value: f64) -> Self {
        let zero = vec![0; dim];
        MicroFunction::TrigPoly(
            TrigPoly::new(unit_generators(dim), vec![(zero, Complex64::new(value, 0.0))], true)
                .expect("constant polynomial is well formed"),
        )
    }

    /// 1-periodic real polynomial `sum amp * cos(2 pi k.y + phase)` with integer wave vectors `k`.
    pub fn periodic_cosines(dim: usize, terms: &[(Vec<i64>, f64, f64)]) -> Result<Self> {
        check_dim(dim)?;
        Ok(MicroFunction::TrigPoly(TrigPoly::from_cosines(
            unit_generators(dim),
            terms,
        )?))
    }

    /// `mean + amp * cos(2 pi y_1)`, the workhorse microstructure of the test fixtures.
    pub fn one_plus_cos(dim: usize, mean: f64, amp: f64) -> Self {
        let mut k = vec![0; dim];
        k[0] = 1;
        Self::periodic_cosines(dim, &[(vec![0; dim], mean, 0.0), (k, amp, 0.0)]).expect("well-formed cosine polynomial")
    }

    pub fn dim(&self) -> usize {
        match self {
            MicroFunction::TrigPoly(t) => t.dim,
            MicroFunction::CellSampled(c) => c.dim,
            MicroFunction::LimitAtInfinity(l) => l.dim,
        }
    }

    pub fn algebra(&self) -> AlgebraTag {
        match self {
            MicroFunction::TrigPoly(t) if t.is_periodic() => AlgebraTag {
                kind: AlgebraKind::Periodic,
                spectrum_surrogate_dim: t.dim,
            },
            MicroFunction::TrigPoly(t) => AlgebraTag {
                kind: AlgebraKind::QuasiPeriodic {
                    generators: t.generators.clone(),
                },
                spectrum_surrogate_dim: t.generators.len(),
            },
            MicroFunction::CellSampled(c) => AlgebraTag {
                kind: AlgebraKind::Periodic,
                spectrum_surrogate_dim: c.dim,
            },
            MicroFunction::LimitAtInfinity(_) => AlgebraTag {
                kind: AlgebraKind::VanishingAtInfinity,
                spectrum_surrogate_dim: 0,
            },
        }
    }

    /// True when the function does not depend on `y`.
    pub fn is_constant(&self) -> bool {
        match self {
            MicroFunction::TrigPoly(t) => t
                .harmonics
                .iter()
                .all(|h| h.index.iter().all(|n| *n == 0) || h.coeff == Complex64::new(0.0, 0.0)),
            MicroFunction::CellSampled(c) => c.values.iter().all(|v| *v == c.values[0]),
            MicroFunction::LimitAtInfinity(l) => l.core.support_radius().is_some() && l.core.eval_is_zero(),
        }
    }

    /// Pointwise value without input checks; callers on hot paths pass finite points of the right dimension.
    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            MicroFunction::TrigPoly(t) => t.eval_complex(y).re,
            MicroFunction::CellSampled(c) => c.eval(y),
            MicroFunction::LimitAtInfinity(l) => l.eval(y),
        }
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        check_point(y, self.dim())?;
        Ok(self.value(y))
    }

    /// `u(x / eps)`.
    pub fn trace(&self, eps: f64, x: &[f64]) -> Result<f64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return invalid(format!("scale parameter must be positive, got {eps}"));
        }
        check_point(x, self.dim())?;
        let mut y = [0.0; 2];
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi / eps;
        }
        Ok(self.value(&y[..x.len()]))
    }

    pub fn mean_value(&self) -> f64 {
        match self {
            MicroFunction::TrigPoly(t) => t
                .harmonics
                .iter()
                .filter(|h| h.index.iter().all(|n| *n == 0))
                .map(|h| h.coeff.re)
                .sum(),
            MicroFunction::CellSampled(c) => pairwise_sum(&c.values) / c.values.len() as f64,
            MicroFunction::LimitAtInfinity(l) => l.limit,
        }
    }

    /// Besicovitch seminorm `M(|u|^p)^(1/p)`.
    pub fn besicovitch_seminorm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return invalid(format!("seminorm exponent must be >= 1, got {p}"));
        }
        let m = match self {
            MicroFunction::TrigPoly(t) => t.phase_torus_mean(|v| v.abs().powf(p)),
            MicroFunction::CellSampled(c) => {
                let powered: Vec<f64> = c.values.iter().map(|v| v.abs().powf(p)).collect();
                pairwise_sum(&powered) / powered.len() as f64
            }
            MicroFunction::LimitAtInfinity(l) => l.limit.abs().powf(p),
        };
        Ok(m.powf(1.0 / p))
    }

    /// `y -> u(y + a)`.
    pub fn shift(&self, a: &[f64]) -> Result<MicroFunction> {
        check_point(a, self.dim())?;
        Ok(match self {
            MicroFunction::TrigPoly(t) => MicroFunction::TrigPoly(t.shifted(a)),
            MicroFunction::CellSampled(c) => {
                let mut out = c.clone();
                for (o, s) in out.offset.iter_mut().zip(a) {
                    *o += s;
                }
                MicroFunction::CellSampled(out)
            }
            MicroFunction::LimitAtInfinity(l) => {
                let mut out = l.clone();
                for (o, s) in out.offset.iter_mut().zip(a) {
                    *o += s;
                }
                MicroFunction::LimitAtInfinity(out)
            }
        })
    }

    /// Samples on a dense grid covering the natural domain: the phase torus
    /// for polynomials, the cell for cell samples, the core box plus the
    /// limit for functions with a limit at infinity.
    fn dense_samples(&self) -> Vec<f64> {
        match self {
            MicroFunction::TrigPoly(t) => {
                let d = t.generators.len();
                let per_axis: usize = match d {
                    1 => 1024,
                    2 => 128,
                    _ => 24,
                };
                let total = per_axis.pow(d as u32);
                (0..total)
                    .map(|flat| {
                        let mut th = [0.0; 8];
                        let mut rem = flat;
                        for a in (0..d).rev() {
                            th[a] = (rem % per_axis) as f64 / per_axis as f64;
                            rem /= per_axis;
                        }
                        t.eval_phase(&th[..d])
                    })
                    .collect()
            }
            MicroFunction::CellSampled(c) => c.values.clone(),
            MicroFunction::LimitAtInfinity(l) => {
                let r = l.core.support_radius().unwrap_or(1.0);
                let n = if l.dim == 1 { 2049 } else { 129 };
                let coord = |i: usize| -r + 2.0 * r * i as f64 / (n - 1) as f64;
                let mut out = vec![l.limit];
                if l.dim == 1 {
                    out.extend((0..n).map(|i| l.core.eval(&[coord(i)]) + l.limit));
                } else {
                    for i in 0..n {
                        for j in 0..n {
                            out.push(l.core.eval(&[coord(i), coord(j)]) + l.limit);
                        }
                    }
                }
                out
            }
        }
    }

    /// Supremum of `|u|` estimated on the dense sampling grid.
    pub fn sup_norm(&self) -> f64 {
        self.dense_samples().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Minimum over the dense sampling grid.
    pub fn sampled_min(&self) -> f64 {
        self.dense_samples().iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Values on a cell grid, used as the cell factor of two-scale fields.
    ///
    /// Periodic functions are sampled at the cell nodes. A function with a
    /// limit at infinity has a one-point spectrum and is represented by the
    /// constant equal to its limit. Quasi-periodic polynomials have no
    /// periodic cell and are rejected.
    pub fn cell_samples(&self, cell: &CellGrid) -> Result<Vec<f64>> {
        if cell.dim() != self.dim() {
            return invalid("cell grid dimension does not match the micro function");
        }
        match self {
            MicroFunction::TrigPoly(t) if !t.is_periodic() => {
                invalid("quasi-periodic microstructure has no periodic cell representation")
            }
            MicroFunction::LimitAtInfinity(l) => Ok(vec![l.limit; cell.len()]),
            _ => Ok((0..cell.len())
                .map(|j| self.value(&cell.point(j)[..cell.dim()]))
                .collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos1() -> MicroFunction {
        MicroFunction::periodic_cosines(1, &[(vec![1], 1.0, 0.0)]).unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        let c = MicroFunction::constant(1, 1.0);
        assert_eq!(c.eval(&[123.456]).unwrap(), 1.0);
        assert_eq!(c.mean_value(), 1.0);
    }

    #[test]
    fn cosine_zero_at_quarter() {
        assert!(cos1().eval(&[0.25]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn limit_at_infinity_far_away() {
        let zero_core = Profile::Bump {
            center: vec![],
            radius: 1.0,
            amplitude: 0.0,
        };
        let f = MicroFunction::LimitAtInfinity(LimitAtInfinity::new(1, zero_core, 0.3).unwrap());
        assert_eq!(f.eval(&[1e6]).unwrap(), 0.3);
        assert_eq!(f.mean_value(), 0.3);
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(cos1().eval(&[f64::NAN]).is_err());
        assert!(cos1().eval(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn trace_substitutes_x_over_eps() {
        assert!((cos1().trace(0.5, &[0.25]).unwrap() + 1.0).abs() < 1e-15);
        let u = MicroFunction::one_plus_cos(1, 1.0, 0.5);
        assert!((u.trace(0.125, &[0.0625]).unwrap() - 0.5).abs() < 1e-15);
        assert!(u.trace(0.0, &[1.0]).is_err());
        assert!(u.trace(-1.0, &[1.0]).is_err());
    }

    #[test]
    fn mean_values_per_algebra() {
        assert_eq!(cos1().mean_value(), 0.0);
        let cell = MicroFunction::CellSampled(CellSampled::new(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        assert_eq!(cell.mean_value(), 2.5);
    }

    #[test]
    fn seminorms_of_simple_functions() {
        assert!((MicroFunction::constant(1, -3.0).besicovitch_seminorm(2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((cos1().besicovitch_seminorm(2.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        let u = MicroFunction::one_plus_cos(1, 1.0, 0.5);
        assert!((u.besicovitch_seminorm(2.0).unwrap() - (9.0_f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!(u.besicovitch_seminorm(0.5).is_err());
    }

    #[test]
    fn half_period_shift_negates_cosine() {
        let s = cos1().shift(&[0.5]).unwrap();
        for i in 0..50 {
            let y = i as f64 * 0.0731;
            assert!((s.value(&[y]) + cos1().value(&[y])).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_preserves_constants_and_means() {
        let c = MicroFunction::constant(1, 2.5).shift(&[0.77]).unwrap();
        assert_eq!(c.value(&[0.1]), 2.5);
        let u = MicroFunction::one_plus_cos(1, 1.0, 0.5);
        assert!((u.shift(&[0.137]).unwrap().mean_value() - u.mean_value()).abs() < 1e-15);
    }

    #[test]
    fn real_polynomial_requires_conjugate_pairs() {
        let bad = TrigPoly::new(unit_generators(1), vec![(vec![1], Complex64::new(1.0, 0.0))], true);
        assert!(bad.is_err());
        let ok = TrigPoly::new(
            unit_generators(1),
            vec![
                (vec![1], Complex64::new(0.0, 0.5)),
                (vec![-1], Complex64::new(0.0, -0.5)),
            ],
            true,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn cell_sampled_interpolates_and_wraps() {
        let c = MicroFunction::CellSampled(CellSampled::new(1, 4, vec![0.0, 1.0, 0.0, -1.0]).unwrap());
        assert_eq!(c.value(&[0.25]), 1.0);
        assert_eq!(c.value(&[0.125]), 0.5);
        assert_eq!(c.value(&[1.25]), 1.0);
        assert_eq!(c.value(&[-0.125]), -0.5);
        let c2 = MicroFunction::CellSampled(CellSampled::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap());
        assert!((c2.value(&[0.25, 0.25]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn algebra_tags() {
        assert_eq!(cos1().algebra().kind, AlgebraKind::Periodic);
        let q = MicroFunction::TrigPoly(
            TrigPoly::from_cosines(vec![vec![1.0], vec![2.0_f64.sqrt()]], &[(vec![1, 1], 1.0, 0.0)]).unwrap(),
        );
        let tag = q.algebra();
        assert_eq!(tag.spectrum_surrogate_dim, 2);
        assert!(matches!(tag.kind, AlgebraKind::QuasiPeriodic { .. }));
        let b = MicroFunction::LimitAtInfinity(LimitAtInfinity::new(1, Profile::bump(0.0, 1.0), 0.0).unwrap());
        assert_eq!(b.algebra().spectrum_surrogate_dim, 0);
    }

    #[test]
    fn quasi_periodic_mean_uses_exact_zero_index() {
        let g = vec![vec![1.0], vec![2.0_f64.sqrt()]];
        let q = TrigPoly::from_cosines(g, &[(vec![0, 0], 0.7, 0.0), (vec![1, -1], 2.0, 0.3)]).unwrap();
        assert!((MicroFunction::TrigPoly(q).mean_value() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn unbounded_core_rejected() {
        assert!(LimitAtInfinity::new(1, Profile::constant(1.0), 0.0).is_err());
    }
}
