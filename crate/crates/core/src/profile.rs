//! Closed-form macroscopic profiles used for kernels, initial data and the
//! macro factors of test functions.

use serde::{Deserialize, Serialize};

/// Anything that can be evaluated at a macroscopic point.
pub trait MacroProfile {
    fn value(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> MacroProfile for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Value below which a Gaussian without an explicit cutoff is treated as
/// vanished when a support radius is needed.
const GAUSSIAN_TAIL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// `amplitude * exp(-|x-c|^2 / (2 width^2))`, set to zero for `|x-c| >= cutoff`.
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    /// `amplitude` on the closed box `|x-c|_inf <= half_width`.
    Indicator {
        #[serde(default)]
        center: Vec<f64>,
        half_width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Smooth compactly supported bump `amplitude * exp(1 - 1/(1 - (r/R)^2))`, peak value `amplitude`.
    Bump {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Raised cosine `amplitude * (1 + cos(pi r / R)) / 2` for `r < R`.
    CosineTaper {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn offset(x: &[f64], center: &[f64], i: usize) -> f64 {
    x[i] - center.get(i).copied().unwrap_or(0.0)
}

fn radius_sq(x: &[f64], center: &[f64]) -> f64 {
    (0..x.len()).map(|i| offset(x, center, i).powi(2)).sum()
}

impl Profile {
    pub fn gaussian(width: f64) -> Self {
        Profile::Gaussian {
            center: Vec::new(),
            width,
            amplitude: 1.0,
            cutoff: None,
        }
    }

    pub fn indicator(half_width: f64) -> Self {
        Profile::Indicator {
            center: Vec::new(),
            half_width,
            amplitude: 1.0,
        }
    }

    pub fn bump(center: f64, radius: f64) -> Self {
        Profile::Bump {
            center: vec![center],
            radius,
            amplitude: 1.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Gaussian {
                center,
                width,
                amplitude,
                cutoff,
            } => {
                let r2 = radius_sq(x, center);
                if let Some(c) = cutoff {
                    if r2 >= c * c {
                        return 0.0;
                    }
                }
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Profile::Indicator {
                center,
                half_width,
                amplitude,
            } => {
                if (0..x.len()).all(|i| offset(x, center, i).abs() <= *half_width) {
                    *amplitude
                } else {
                    0.0
                }
            }
            Profile::Bump {
                center,
                radius,
                amplitude,
            } => {
                let s = radius_sq(x, center) / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                }
            }
            Profile::CosineTaper {
                center,
                radius,
                amplitude,
            } => {
                let r = radius_sq(x, center).sqrt();
                if r >= *radius {
                    0.0
                } else {
                    amplitude * 0.5 * (1.0 + (std::f64::consts::PI * r / radius).cos())
                }
            }
            Profile::Constant { value } => *value,
        }
    }

    /// Radius, in the max norm about the origin, outside which the profile
    /// vanishes. `None` for profiles without bounded support.
    ///
    /// Gaussians without a cutoff report the radius where they drop below `1e-12` of their peak.
    pub fn support_radius(&self) -> Option<f64> {
        let (center, r) = match self {
            Profile::Gaussian {
                center, width, cutoff, ..
            } => (
                center,
                cutoff.unwrap_or(width * (2.0 * (1.0 / GAUSSIAN_TAIL).ln()).sqrt()),
            ),
            Profile::Indicator { center, half_width, .. } => (center, *half_width),
            Profile::Bump { center, radius, .. } | Profile::CosineTaper { center, radius, .. } => (center, *radius),
            Profile::Constant { .. } => return None,
        };
        let shift = center.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        Some(shift + r)
    }

    /// True for profiles that vanish identically.
    pub fn eval_is_zero(&self) -> bool {
        match self {
            Profile::Gaussian { amplitude, .. }
            | Profile::Indicator { amplitude, .. }
            | Profile::Bump { amplitude, .. }
            | Profile::CosineTaper { amplitude, .. } => *amplitude == 0.0,
            Profile::Constant { value } => *value == 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Profile::Gaussian { amplitude, .. }
            | Profile::Indicator { amplitude, .. }
            | Profile::Bump { amplitude, .. }
            | Profile::CosineTaper { amplitude, .. } => *amplitude >= 0.0,
            Profile::Constant { value } => *value >= 0.0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = match self {
            Profile::Gaussian {
                width,
                cutoff,
                amplitude,
                center,
            } => {
                *width > 0.0
                    && width.is_finite()
                    && cutoff.is_none_or(|c| c > 0.0)
                    && amplitude.is_finite()
                    && center.iter().all(|c| c.is_finite())
            }
            Profile::Indicator {
                half_width: r,
                amplitude,
                center,
            }
            | Profile::Bump {
                radius: r,
                amplitude,
                center,
            }
            | Profile::CosineTaper {
                radius: r,
                amplitude,
                center,
            } => *r > 0.0 && r.is_finite() && amplitude.is_finite() && center.iter().all(|c| c.is_finite()),
            Profile::Constant { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            crate::error::invalid(format!("malformed profile {self:?}"))
        }
    }
}

impl MacroProfile for Profile {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_cutoff_zeroes_tail() {
        let g = Profile::Gaussian {
            center: vec![],
            width: 0.5,
            amplitude: 1.0,
            cutoff: Some(3.0),
        };
        assert_eq!(g.eval(&[3.0]), 0.0);
        assert!(g.eval(&[2.99]) > 0.0);
        assert_eq!(g.support_radius(), Some(3.0));
    }

    #[test]
    fn bump_peak_equals_amplitude() {
        let b = Profile::Bump {
            center: vec![0.5],
            radius: 2.0,
            amplitude: 3.0,
        };
        assert!((b.eval(&[0.5]) - 3.0).abs() < 1e-15);
        assert_eq!(b.eval(&[2.5]), 0.0);
        assert_eq!(b.support_radius(), Some(2.5));
    }

    #[test]
    fn indicator_is_closed_box() {
        let i = Profile::indicator(0.5);
        assert_eq!(i.eval(&[0.5, -0.5]), 1.0);
        assert_eq!(i.eval(&[0.5, 0.51]), 0.0);
    }
}
