use rand::Rng;
use rand_distr::StandardNormal;

use super::EaError;

/// Rechenberg's 1/5 success rule.
///
/// After every `window` trials the step size is divided by `factor` when
/// more than a fifth of them improved, multiplied by `factor` when fewer did,
/// and left alone at exactly one fifth. It never drops below `sigma_floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneFifthRule {
    pub window: usize,
    pub factor: f64,
    pub sigma_floor: f64,
}

impl Default for OneFifthRule {
    fn default() -> Self {
        Self {
            window: 10,
            factor: 0.85,
            sigma_floor: 1e-300,
        }
    }
}

impl OneFifthRule {
    pub fn validate(&self) -> Result<(), EaError> {
        if self.window == 0 {
            return Err(EaError::Config("1/5-rule window must be at least 1".into()));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(EaError::Config(format!(
                "1/5-rule factor {} outside (0, 1)",
                self.factor
            )));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(EaError::Config("sigma floor must be positive".into()));
        }
        Ok(())
    }
}

/// State of a (1+1)-ES minimizing a function.
#[derive(Debug, Clone, PartialEq)]
pub struct EsState {
    pub x: Vec<f64>,
    pub fx: f64,
    pub sigma: f64,
    successes: usize,
    trials: usize,
}

impl EsState {
    pub fn new(x: Vec<f64>, sigma: f64, objective: impl Fn(&[f64]) -> f64) -> Self {
        let fx = objective(&x);
        Self {
            x,
            fx,
            sigma,
            successes: 0,
            trials: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsStepReport {
    pub improved: bool,
    /// σ hit the floor during this step.
    pub sigma_clamped: bool,
}

/// One (1+1)-ES generation under the minimization convention.
///
/// The offspring `x + σ·N(0, I)` replaces the parent only when strictly
/// better.
pub fn es_one_plus_one_step<R, F>(
    state: &mut EsState,
    objective: F,
    rng: &mut R,
    rule: &OneFifthRule,
) -> EsStepReport
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    let mut clamped = false;
    if state.sigma.is_nan() || state.sigma < rule.sigma_floor {
        state.sigma = rule.sigma_floor;
        clamped = true;
    }
    let candidate: Vec<f64> = state
        .x
        .iter()
        .map(|&xi| {
            let z: f64 = rng.sample(StandardNormal);
            xi + state.sigma * z
        })
        .collect();
    let fc = objective(&candidate);
    let improved = fc < state.fx;
    if improved {
        state.x = candidate;
        state.fx = fc;
        state.successes += 1;
    }
    state.trials += 1;

    if state.trials == rule.window {
        let rate = state.successes as f64 / rule.window as f64;
        if rate > 0.2 {
            state.sigma /= rule.factor;
        } else if rate < 0.2 {
            state.sigma *= rule.factor;
        }
        state.successes = 0;
        state.trials = 0;
    }
    if state.sigma < rule.sigma_floor {
        state.sigma = rule.sigma_floor;
        clamped = true;
    }
    EsStepReport {
        improved,
        sigma_clamped: clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ea::rng::stream_rng;
    use crate::ea::sphere;

    #[test]
    fn worse_offspring_keeps_parent() {
        // from the optimum nothing can improve
        let mut s = EsState::new(vec![0.0, 0.0], 1.0, sphere);
        let rule = OneFifthRule {
            window: 100,
            ..Default::default()
        };
        let r = es_one_plus_one_step(&mut s, sphere, &mut stream_rng(1, 0), &rule);
        assert!(!r.improved);
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.sigma, 1.0);
    }

    #[test]
    fn high_success_rate_grows_sigma() {
        // a linear objective far from any boundary: about half the trials succeed
        let linear = |x: &[f64]| 1e6 + x[0];
        let rule = OneFifthRule {
            window: 10,
            factor: 0.8,
            sigma_floor: 1e-12,
        };
        let mut s = EsState::new(vec![0.0], 1.0, linear);
        let mut rng = stream_rng(4, 0);
        let mut successes = 0;
        for _ in 0..10 {
            successes += es_one_plus_one_step(&mut s, linear, &mut rng, &rule).improved as usize;
        }
        assert!(successes > 2, "only {successes} successes");
        assert_eq!(s.sigma, 1.0 / 0.8);
    }

    #[test]
    fn low_success_rate_shrinks_sigma() {
        let rule = OneFifthRule {
            window: 5,
            factor: 0.5,
            sigma_floor: 1e-12,
        };
        let mut s = EsState::new(vec![0.0], 1.0, sphere);
        let mut rng = stream_rng(2, 0);
        for _ in 0..5 {
            es_one_plus_one_step(&mut s, sphere, &mut rng, &rule);
        }
        assert_eq!(s.sigma, 0.5);
    }

    #[test]
    fn floor_clamps_sigma() {
        let rule = OneFifthRule {
            window: 1,
            factor: 0.5,
            sigma_floor: 0.25,
        };
        let mut s = EsState::new(vec![0.0], 0.0, sphere);
        let r = es_one_plus_one_step(&mut s, sphere, &mut stream_rng(2, 0), &rule);
        assert!(r.sigma_clamped);
        assert_eq!(s.sigma, 0.25);
    }
}
