use serde::{Deserialize, Serialize};

use super::basis::{BasisConfig, Coefficients};
use crate::model::Vec2;
use crate::ControlError;

/// Exponentially forgetting average of `F_k` along one agent's trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCoefficients {
    coeffs: Coefficients,
    sample_count: u64,
    forgetting: f64,
}

/// Per-control-step forgetting factor `exp(-dt_control / memory)`.
pub fn forgetting_factor(dt_control: f64, memory_s: f64) -> f64 {
    (-dt_control / memory_s).exp()
}

impl CoverageCoefficients {
    pub fn zeros(cfg: &BasisConfig, forgetting: f64) -> Self {
        Self {
            coeffs: Coefficients::zeros(cfg.order()),
            sample_count: 0,
            forgetting,
        }
    }

    /// History as if the agent had always been at `s`.
    pub fn seeded(s: Vec2, cfg: &BasisConfig, forgetting: f64) -> Self {
        Self {
            coeffs: Coefficients::at_point(s, cfg),
            sample_count: 0,
            forgetting,
        }
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }

    /// Weight a single new sample receives, `1 - gamma`.
    pub fn injection_weight(&self) -> f64 {
        1.0 - self.forgetting
    }

    /// `c_k <- gamma c_k + (1 - gamma) F_k(s)`.
    pub fn update(&mut self, s: Vec2, cfg: &BasisConfig) {
        let sample = Coefficients::at_point(s, cfg);
        let g = self.forgetting;
        let w = 1.0 - g;
        for (c, f) in self.coeffs.values_mut().iter_mut().zip(sample.values()) {
            *c = g * *c + w * f;
        }
        self.sample_count += 1;
    }
}

pub fn update_own_coverage(
    cc: &CoverageCoefficients,
    s: Vec2,
    cfg: &BasisConfig,
) -> CoverageCoefficients {
    let mut next = cc.clone();
    next.update(s, cfg);
    next
}

/// Mean of the members' coefficient arrays.
///
/// Each entry is summed in sorted order, so the result is bitwise identical
/// under any permutation of `members`.
pub fn team_coeffs(members: &[&Coefficients]) -> Result<Coefficients, ControlError> {
    let first = members.first().ok_or(ControlError::EmptyTeam)?;
    let order = first.order();
    if let Some(bad) = members.iter().find(|m| m.order() != order) {
        return Err(ControlError::ShapeMismatch {
            expected: order,
            got: bad.order(),
        });
    }
    let n = members.len() as f64;
    let mut column = Vec::with_capacity(members.len());
    let values = (0..order * order)
        .map(|i| {
            column.clear();
            column.extend(members.iter().map(|m| m.values()[i]));
            column.sort_unstable_by(f64::total_cmp);
            column.iter().sum::<f64>() / n
        })
        .collect();
    Ok(Coefficients::from_values(order, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_sample_from_zero() {
        let cfg = BasisConfig::new(4);
        let gamma = forgetting_factor(0.1, 10.0);
        let s = Vec2::new(0.3, 0.6);
        let cc = update_own_coverage(&CoverageCoefficients::zeros(&cfg, gamma), s, &cfg);
        let f = Coefficients::at_point(s, &cfg);
        for (c, fk) in cc.coeffs().values().iter().zip(f.values()) {
            assert!((c - (1.0 - gamma) * fk).abs() < 1e-15);
        }
        assert_eq!(cc.sample_count(), 1);
    }

    #[test]
    fn seeded_history_is_a_fixed_point_when_parked() {
        let cfg = BasisConfig::new(4);
        let s = Vec2::new(0.8, 0.1);
        let mut cc = CoverageCoefficients::seeded(s, &cfg, 0.99);
        cc.update(s, &cfg);
        assert!(cc.coeffs().max_abs_diff(&Coefficients::at_point(s, &cfg)) < 1e-15);
    }

    #[test]
    fn team_mean_edge_cases() {
        let cfg = BasisConfig::new(3);
        let a = Coefficients::at_point(Vec2::new(0.1, 0.2), &cfg);
        assert_eq!(team_coeffs(&[&a]).unwrap(), a);
        assert_eq!(team_coeffs(&[&a, &a]).unwrap(), a);
        assert!(matches!(team_coeffs(&[]), Err(ControlError::EmptyTeam)));
        let b = Coefficients::zeros(4);
        assert!(matches!(team_coeffs(&[&a, &b]), Err(ControlError::ShapeMismatch { .. })));
    }
}
