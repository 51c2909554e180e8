use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{seed_range, Criterion, ExperimentReport, LabError, Payload};
use crate::ea::{
    ea_run, EvolutionaryAlgorithm, FitnessFunction, Representation, SelectionKind,
    SelectionOperator, TerminationCondition, VariationOperator,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    /// `onemax` or `leading-ones`.
    pub fitness: String,
    pub length: usize,
    pub population: usize,
    /// Per-bit flip probability; `1/length` when absent.
    pub mutation_p: Option<f64>,
    pub truncation_keep: f64,
    pub first_seed: u64,
    pub elitist_runs: u64,
    pub nonelitist_runs: u64,
    pub generations: usize,
    pub required_hit_fraction: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            fitness: "onemax".into(),
            length: 16,
            population: 20,
            mutation_p: None,
            truncation_keep: 0.5,
            first_seed: 1,
            elitist_runs: 50,
            nonelitist_runs: 100,
            generations: 2000,
            required_hit_fraction: 1.0,
        }
    }
}

impl ConvergenceConfig {
    fn fitness_function(&self) -> Result<FitnessFunction, LabError> {
        match self.fitness.as_str() {
            "onemax" => Ok(FitnessFunction::onemax(self.length)),
            "leading-ones" => Ok(FitnessFunction::leading_ones(self.length)),
            other => Err(LabError::Config(format!(
                "fitness {other:?} has no known optimum"
            ))),
        }
    }

    fn mutation_p(&self) -> f64 {
        self.mutation_p.unwrap_or(1.0 / self.length as f64)
    }

    fn validate(&self) -> Result<(), LabError> {
        if self.length == 0 || self.population == 0 || self.generations == 0 {
            return Err(LabError::Config(
                "length, population and generations must be positive".into(),
            ));
        }
        let variation = VariationOperator::BitFlip {
            p: self.mutation_p(),
        };
        variation.validate()?;
        if !variation.is_complete() {
            return Err(LabError::Config(format!(
                "bit-flip p = {} is not a complete operator; choose p in (0, 1)",
                self.mutation_p()
            )));
        }
        if !(0.0..=1.0).contains(&self.required_hit_fraction) {
            return Err(LabError::Config(
                "required_hit_fraction must lie in [0, 1]".into(),
            ));
        }
        SelectionOperator::new(
            SelectionKind::Truncation {
                keep: self.truncation_keep,
            },
            true,
        )
        .validate()?;
        self.fitness_function().map(drop)
    }

    fn algorithm(&self, seed: u64, elitist: bool) -> Result<EvolutionaryAlgorithm, LabError> {
        let fitness = self.fitness_function()?;
        let optimum = fitness
            .known_optimum()
            .expect("built-in fitness has an optimum");
        let kind = if elitist {
            SelectionKind::Truncation {
                keep: self.truncation_keep,
            }
        } else {
            SelectionKind::Proportional
        };
        Ok(EvolutionaryAlgorithm {
            representation: Representation::BitString {
                length: self.length,
            },
            initial: None,
            population_size: self.population,
            fitness,
            selection: SelectionOperator::new(kind, elitist),
            variation: VariationOperator::BitFlip {
                p: self.mutation_p(),
            },
            termination: vec![
                TerminationCondition::FitnessOptimum {
                    target: optimum,
                    tolerance: 0.0,
                },
                TerminationCondition::MaxGenerations(self.generations),
            ],
            seed,
        })
    }
}

struct RunSummary {
    elitist: bool,
    seed: u64,
    generations: usize,
    hit_generation: Option<usize>,
    final_best: f64,
    best_decreases: usize,
}

fn run_one(cfg: &ConvergenceConfig, seed: u64, elitist: bool) -> Result<RunSummary, LabError> {
    let alg = cfg.algorithm(seed, elitist)?;
    let optimum = alg.fitness.known_optimum().expect("checked in validate");
    let trace = ea_run(&alg)?;
    let best: Vec<f64> = trace.records.iter().map(|r| r.best_fitness).collect();
    Ok(RunSummary {
        elitist,
        seed,
        generations: trace.records.len() - 1,
        hit_generation: best.iter().position(|&b| b >= optimum),
        final_best: trace.best_fitness(),
        best_decreases: best.windows(2).filter(|w| w[1] < w[0]).count(),
    })
}

/// Elitist runs should all reach the optimum with non-decreasing best
/// fitness; non-elitist proportional runs should show at least one loss of
/// the best individual.
pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<ExperimentReport, LabError> {
    cfg.validate()?;
    let jobs: Vec<(u64, bool)> = seed_range(cfg.first_seed, cfg.elitist_runs)
        .into_iter()
        .map(|s| (s, true))
        .chain(
            seed_range(cfg.first_seed, cfg.nonelitist_runs)
                .into_iter()
                .map(|s| (s, false)),
        )
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(seed, elitist)| run_one(cfg, seed, elitist))
        .collect::<Result<Vec<_>, _>>()?;

    let mut payload = Payload::new(&[
        "mode",
        "seed",
        "generations",
        "hit_generation",
        "final_best",
        "best_decreases",
    ]);
    let optimum = cfg
        .fitness_function()?
        .known_optimum()
        .expect("checked in validate");
    payload.param("fitness", &cfg.fitness);
    payload.param("length", cfg.length);
    payload.param("optimum", optimum);
    payload.param("generation_cap", cfg.generations);
    payload.param("required_hit_fraction", cfg.required_hit_fraction);
    for r in &runs {
        payload.rows.push(vec![
            if r.elitist { "elitist" } else { "nonelitist" }.into(),
            r.seed.to_string(),
            r.generations.to_string(),
            r.hit_generation.map(|g| g.to_string()).unwrap_or_default(),
            r.final_best.to_string(),
            r.best_decreases.to_string(),
        ]);
    }
    let notes = vec!["optimum hits are observed within a finite generation cap only".to_string()];
    let seeds = seed_range(cfg.first_seed, cfg.elitist_runs.max(cfg.nonelitist_runs));
    ExperimentReport::judged("convergence", seeds, payload, notes)
}

pub(super) fn judge(p: &Payload) -> Result<Vec<Criterion>, LabError> {
    let (mode, hit, dec) = (
        p.column("mode")?,
        p.column("hit_generation")?,
        p.column("best_decreases")?,
    );
    let required: f64 = p.get("required_hit_fraction")?;
    let (mut elitist, mut hits, mut violations, mut violating_runs) =
        (0usize, 0usize, 0usize, 0usize);
    let (mut nonelitist, mut decreasing_runs) = (0usize, 0usize);
    for row in &p.rows {
        let d: usize = p.cell(row, dec)?;
        match row[mode].as_str() {
            "elitist" => {
                elitist += 1;
                hits += !row[hit].is_empty() as usize;
                violations += d;
                violating_runs += (d > 0) as usize;
            }
            "nonelitist" => {
                nonelitist += 1;
                decreasing_runs += (d > 0) as usize;
            }
            other => return Err(LabError::Report(format!("unknown mode {other}"))),
        }
    }
    let mut out = Vec::new();
    if elitist > 0 {
        let fraction = hits as f64 / elitist as f64;
        out.push(Criterion::new(
            "optimum-hit",
            fraction >= required,
            format!("{hits}/{elitist} elitist runs hit the optimum"),
        ));
        out.push(Criterion::new(
            "elitist-monotone",
            violations == 0,
            format!("{violations} decreases in {violating_runs}/{elitist} runs"),
        ));
    }
    if nonelitist > 0 {
        out.push(Criterion::new(
            "nonelitist-decrease",
            decreasing_runs > 0,
            format!("{decreasing_runs}/{nonelitist} non-elitist runs lost their best"),
        ));
    }
    Ok(out)
}
