use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{seed_range, Criterion, ExperimentReport, LabError, Payload};
use crate::ea::rng::stream_rng;
use crate::ea::{es_one_plus_one_step, sphere, EsState, OneFifthRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 0 when `ys` is constant.
    pub r2: f64,
}

/// Ordinary least squares of `ys` against `xs`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        0.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsRateConfig {
    pub dimension: usize,
    pub iterations: usize,
    pub first_seed: u64,
    pub seeds: u64,
    pub sigma0: f64,
    /// Start drawn uniformly from `[-init_range, init_range]^d` unless
    /// `start` is given.
    pub init_range: f64,
    pub start: Option<Vec<f64>>,
    pub window: usize,
    pub factor: f64,
    pub sigma_floor: f64,
    /// Iterations excluded from the fit.
    pub burn_in: usize,
    /// Fitness values below this are clipped before taking logs.
    pub log_floor: f64,
    pub min_r2: f64,
    pub required_fraction: f64,
}

impl Default for EsRateConfig {
    fn default() -> Self {
        let rule = OneFifthRule::default();
        Self {
            dimension: 5,
            iterations: 2000,
            first_seed: 1,
            seeds: 50,
            sigma0: 1.0,
            init_range: 5.0,
            start: None,
            window: rule.window,
            factor: rule.factor,
            sigma_floor: rule.sigma_floor,
            burn_in: 100,
            log_floor: 1e-300,
            min_r2: 0.9,
            required_fraction: 0.9,
        }
    }
}

impl EsRateConfig {
    fn rule(&self) -> OneFifthRule {
        OneFifthRule {
            window: self.window,
            factor: self.factor,
            sigma_floor: self.sigma_floor,
        }
    }

    fn validate(&self) -> Result<(), LabError> {
        self.rule().validate()?;
        if self.dimension == 0 || self.seeds == 0 {
            return Err(LabError::Config(
                "dimension and seeds must be positive".into(),
            ));
        }
        if self.burn_in + 2 > self.iterations + 1 {
            return Err(LabError::Config(
                "burn_in leaves fewer than two points to fit".into(),
            ));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite())
            || self.init_range.is_nan()
            || self.init_range < 0.0
        {
            return Err(LabError::Config(
                "sigma0 must be positive and init_range nonnegative".into(),
            ));
        }
        if self.log_floor.is_nan()
            || self.log_floor <= 0.0
            || !(0.0..=1.0).contains(&self.required_fraction)
        {
            return Err(LabError::Config(
                "log_floor must be positive and required_fraction in [0, 1]".into(),
            ));
        }
        match &self.start {
            Some(x) if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) => {
                Err(LabError::Config(format!(
                    "start must hold {} finite coordinates",
                    self.dimension
                )))
            }
            _ => Ok(()),
        }
    }
}

struct SeedRun {
    seed: u64,
    fit: Option<LineFit>,
    final_fitness: f64,
    degenerate: bool,
    pinned: bool,
    clipped: bool,
}

fn run_seed(cfg: &EsRateConfig, seed: u64) -> SeedRun {
    let rule = cfg.rule();
    let x0 = cfg.start.clone().unwrap_or_else(|| {
        let mut init = stream_rng(seed, 0);
        (0..cfg.dimension)
            .map(|_| init.random_range(-cfg.init_range..=cfg.init_range))
            .collect()
    });
    let mut state = EsState::new(x0, cfg.sigma0, sphere);
    let degenerate = state.fx == 0.0;
    let mut rng = stream_rng(seed, 1);
    let mut pinned = state.sigma <= rule.sigma_floor;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    trace.push(state.fx);
    for _ in 0..cfg.iterations {
        es_one_plus_one_step(&mut state, sphere, &mut rng, &rule);
        pinned &= state.sigma <= rule.sigma_floor;
        trace.push(state.fx);
    }
    let clipped = trace.iter().any(|&f| f < cfg.log_floor);
    let xs: Vec<f64> = (cfg.burn_in..trace.len()).map(|t| t as f64).collect();
    let ys: Vec<f64> = trace[cfg.burn_in..]
        .iter()
        .map(|f| f.max(cfg.log_floor).ln())
        .collect();
    SeedRun {
        seed,
        fit: fit_line(&xs, &ys),
        final_fitness: state.fx,
        degenerate,
        pinned,
        clipped,
    }
}

/// Fits `ln f(x_t)` against `t` for each seed of a (1+1)-ES on the sphere.
pub fn es_rate_experiment(cfg: &EsRateConfig) -> Result<ExperimentReport, LabError> {
    cfg.validate()?;
    let seeds = seed_range(cfg.first_seed, cfg.seeds);
    let runs: Vec<SeedRun> = seeds.par_iter().map(|&s| run_seed(cfg, s)).collect();

    let mut payload = Payload::new(&[
        "seed",
        "slope",
        "r2",
        "final_fitness",
        "degenerate",
        "sigma_pinned",
    ]);
    payload.param("dimension", cfg.dimension);
    payload.param("iterations", cfg.iterations);
    payload.param("burn_in", cfg.burn_in);
    payload.param("min_r2", cfg.min_r2);
    payload.param("required_fraction", cfg.required_fraction);
    let mut notes = Vec::new();
    for r in &runs {
        let (slope, r2) = r.fit.map_or((0.0, 0.0), |f| (f.slope, f.r2));
        payload.rows.push(vec![
            r.seed.to_string(),
            slope.to_string(),
            r2.to_string(),
            r.final_fitness.to_string(),
            r.degenerate.to_string(),
            r.pinned.to_string(),
        ]);
        if r.degenerate {
            notes.push(format!(
                "seed {}: degenerate input, start is the optimum",
                r.seed
            ));
        } else if r.pinned {
            notes.push(format!(
                "seed {}: no adaptation, sigma stayed at the floor",
                r.seed
            ));
        }
        if r.clipped {
            notes.push(format!(
                "seed {}: fitness fell below {} and was clipped",
                r.seed, cfg.log_floor
            ));
        }
    }
    ExperimentReport::judged("esrate", seeds, payload, notes)
}

pub(super) fn judge(p: &Payload) -> Result<Vec<Criterion>, LabError> {
    let (cs, cr, cd) = (p.column("slope")?, p.column("r2")?, p.column("degenerate")?);
    let min_r2: f64 = p.get("min_r2")?;
    let required: f64 = p.get("required_fraction")?;
    let (mut eligible, mut passing) = (0usize, 0usize);
    for row in &p.rows {
        if p.cell::<bool>(row, cd)? {
            continue;
        }
        eligible += 1;
        let (slope, r2): (f64, f64) = (p.cell(row, cs)?, p.cell(row, cr)?);
        passing += (slope < 0.0 && r2 >= min_r2) as usize;
    }
    let criterion = if eligible == 0 {
        Criterion::new(
            "geometric-rate",
            true,
            "degenerate input: every start is the optimum",
        )
    } else {
        let needed = (required * eligible as f64).ceil() as usize;
        Criterion::new(
            "geometric-rate",
            passing >= needed,
            format!("{passing}/{eligible} seeds with slope < 0 and R² ≥ {min_r2} (need {needed})"),
        )
    };
    Ok(vec![criterion])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::verdicts_from_csv;

    #[test]
    fn exact_line_has_unit_r2() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, -3.0, -5.0];
        let f = fit_line(&xs, &ys).unwrap();
        assert_eq!((f.slope, f.intercept, f.r2), (-2.0, 1.0, 1.0));
        assert_eq!(fit_line(&xs, &[2.0; 4]).unwrap().r2, 0.0);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn small_instance_passes_and_rejudges() {
        let cfg = EsRateConfig {
            iterations: 600,
            seeds: 8,
            ..Default::default()
        };
        let r = es_rate_experiment(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.criteria);
        assert_eq!(verdicts_from_csv(&r.to_csv()).unwrap(), r.criteria);
    }

    #[test]
    fn start_at_optimum_is_degenerate_not_failure() {
        let cfg = EsRateConfig {
            dimension: 1,
            start: Some(vec![0.0]),
            seeds: 1,
            iterations: 50,
            burn_in: 0,
            ..Default::default()
        };
        let r = es_rate_experiment(&cfg).unwrap();
        assert!(r.passed());
        assert!(r.criteria[0].detail.contains("degenerate input"));
        assert!(r.notes.iter().any(|n| n.contains("degenerate input")));
    }

    #[test]
    fn pinned_sigma_is_flagged() {
        let cfg = EsRateConfig {
            dimension: 2,
            start: Some(vec![1e-3, 0.0]),
            sigma0: 1e3,
            sigma_floor: 1e3,
            seeds: 1,
            iterations: 100,
            burn_in: 0,
            ..Default::default()
        };
        let r = es_rate_experiment(&cfg).unwrap();
        assert!(
            r.notes.iter().any(|n| n.contains("no adaptation")),
            "{:?}",
            r.notes
        );
        assert!(!r.passed());
    }
}
