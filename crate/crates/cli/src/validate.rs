//! Configuration checks. Every violation is reported, not just the first.

use neurohom::{AlgebraKind, MicroFunction};

use crate::config::{ExperimentConfig, Mode};

/// Relative tolerance for integrality tests.
const INTEGRALITY: f64 = 1e-9;

/// Fewest grid points per micro period.
const MIN_POINTS_PER_PERIOD: f64 = 4.0;

/// Extra room beyond the propagated support, in grid steps.
const MARGIN_STEPS: f64 = 2.0;

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() <= INTEGRALITY * x.abs().max(1.0)
}

/// All violated invariants of `cfg`; empty when the configuration is usable.
pub fn validate(cfg: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    if !(1..=2).contains(&cfg.dimension) {
        out.push(format!("dimension must be 1 or 2, got {}", cfg.dimension));
        return out;
    }
    let grid = cfg.macro_grid().map_err(|e| out.push(format!("macro grid: {e}"))).ok();
    if let Err(e) = cfg.cell_grid() {
        out.push(format!("cell grid: {e}"));
    }
    if let Err(e) = cfg.time_grid() {
        out.push(format!("time grid: {e}"));
    }

    check_schedule(cfg, &mut out);

    let Some(grid) = grid else { return out };
    let h = grid.spacing();
    let two_l = 2.0 * cfg.grid.half_width;
    for &eps in cfg.schedule.iter().filter(|e| **e > 0.0 && e.is_finite()) {
        if !is_integer(two_l / eps) {
            out.push(format!(
                "eps = {eps} is not commensurate with the box: 2L / eps = {} must be an integer",
                two_l / eps
            ));
        }
        if eps / h < MIN_POINTS_PER_PERIOD {
            out.push(format!(
                "eps = {eps} is under-resolved: eps / h = {} < {MIN_POINTS_PER_PERIOD}",
                eps / h
            ));
        }
    }

    let kernel = match cfg.kernel_spec(&grid) {
        Ok(k) => Some(k),
        Err(e) => {
            out.push(format!("kernel: {e}"));
            None
        }
    };
    if let Err(e) = cfg.initial.validate() {
        out.push(format!("initial datum: {e}"));
    }
    match (cfg.initial.support_radius(), &kernel) {
        (None, _) => out.push("initial datum must have bounded support".into()),
        (Some(r0), Some(k)) => {
            let need = r0 + cfg.time.horizon * k.support_radius() + MARGIN_STEPS * h;
            if cfg.grid.half_width < need {
                out.push(format!(
                    "box too small: L >= r(u0) + T r(J) + 2h requires L >= {need}, got {}",
                    cfg.grid.half_width
                ));
            }
        }
        _ => {}
    }

    match cfg.firing_rate() {
        Ok(f) => {
            let k1 = f.k1();
            let pc = cfg.picard_config(k1);
            let bound = pc.contraction_bound(k1);
            if bound.is_nan() || bound >= 1.0 {
                out.push(format!(
                    "Picard subinterval violates 2(k1+1)ρ<1: 2({k1}+1)*{} = {bound}",
                    pc.rho
                ));
            }
            if let Err(e) = pc.validate(k1) {
                if bound < 1.0 {
                    out.push(format!("picard: {e}"));
                }
            }
            if !f.is_admissible() && matches!(cfg.mode, Mode::Sweep) {
                out.push("sweep needs a bounded nonnegative activation (sigmoid)".into());
            }
            if needs_two_scale(cfg.mode) {
                reject_quasi(f.g(), "firing modulation g", &mut out);
            }
        }
        Err(e) => out.push(format!("firing rate: {e}")),
    }

    if let (Some(k), true) = (&kernel, needs_two_scale(cfg.mode)) {
        for (m, t) in k.terms().iter().enumerate() {
            reject_quasi(&t.micro, &format!("kernel term {m}"), &mut out);
        }
    }

    if cfg.tests.macro_factors.is_empty() && matches!(cfg.mode, Mode::Sweep) {
        out.push("sweep needs at least one test macro factor".into());
    }
    for (i, p) in cfg.tests.macro_factors.iter().enumerate() {
        if let Err(e) = p.validate() {
            out.push(format!("test macro factor {i}: {e}"));
        }
    }
    if let Err(e) = cfg.test_family() {
        out.push(format!("test family: {e}"));
    }
    out
}

fn needs_two_scale(mode: Mode) -> bool {
    matches!(mode, Mode::Sweep | Mode::SolveHomog)
}

fn reject_quasi(u: &MicroFunction, what: &str, out: &mut Vec<String>) {
    if let AlgebraKind::QuasiPeriodic { .. } = u.algebra().kind {
        out.push(format!(
            "{what}: quasi-periodic microstructure is not supported by the two-scale solver"
        ));
    }
}

fn check_schedule(cfg: &ExperimentConfig, out: &mut Vec<String>) {
    if cfg.schedule.is_empty() {
        out.push("eps schedule is empty".into());
        return;
    }
    for &e in &cfg.schedule {
        if !(e > 0.0 && e <= 1.0) {
            out.push(format!("eps = {e} must lie in (0, 1]"));
        }
    }
    if cfg.schedule.windows(2).any(|w| w[1].is_nan() || w[1] >= w[0]) {
        out.push(format!(
            "eps schedule must be strictly decreasing, got {:?}",
            cfg.schedule
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_are_clean() {
        assert_eq!(validate(&ExperimentConfig::default_experiment()), Vec::<String>::new());
        assert_eq!(
            validate(&ExperimentConfig::degenerate_experiment()),
            Vec::<String>::new()
        );
    }

    #[test]
    fn rho_at_the_bound_is_rejected() {
        let mut cfg = ExperimentConfig::default_experiment();
        let k1 = cfg.firing_rate().unwrap().k1();
        cfg.picard.rho = Some(1.0 / (k1 + 1.0));
        let v = validate(&cfg);
        assert!(v.iter().any(|m| m.contains("2(k1+1)ρ<1")), "{v:?}");
    }

    #[test]
    fn incommensurate_scale_is_rejected() {
        let mut cfg = ExperimentConfig::default_experiment();
        cfg.grid.points = 256;
        cfg.schedule = vec![0.3];
        let v = validate(&cfg);
        assert!(v.iter().any(|m| m.contains("commensurate")), "{v:?}");
    }

    #[test]
    fn increasing_schedule_is_rejected() {
        let mut cfg = ExperimentConfig::default_experiment();
        cfg.schedule = vec![0.125, 0.25];
        assert!(validate(&cfg).iter().any(|m| m.contains("strictly decreasing")));
    }

    #[test]
    fn small_box_is_rejected() {
        let mut cfg = ExperimentConfig::default_experiment();
        cfg.grid.half_width = 4.0;
        cfg.schedule = vec![0.25];
        assert!(validate(&cfg).iter().any(|m| m.contains("box too small")));
    }
}
