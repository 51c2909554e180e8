//! Generic evolutionary algorithm `(X, X[0], F, f, s, ν, C)` driven by the
//! recurrence `X[t+1] = s(ν(X[t]))`.
//!
//! Variation runs first and produces one offspring per parent; selection then
//! draws the next population from the offspring pool. Parents reach the next
//! generation only through elitism, which copies the best parent over the
//! worst selected individual when it is not already present.

mod es;
mod fitness;
mod genome;
mod operators;
pub mod rng;

use std::fmt;
use std::io;
use std::sync::Arc;

use thiserror::Error;

pub use es::{es_one_plus_one_step, EsState, EsStepReport, OneFifthRule};
pub use fitness::{sphere, FitnessFunction};
pub use genome::{Genome, GenomeKind, RealVector, Representation};
pub use operators::{
    mutate_fsm, FsmMutationConfig, SelectionKind, SelectionOperator, VariationOperator,
};
pub use rng::EaRng;

#[derive(Debug, Error)]
pub enum EaError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Automaton(#[from] crate::automata::AutomatonError),
    #[error("failed to write trace: {0}")]
    Io(#[from] io::Error),
    #[error("failed to write trace: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: f64,
}

/// A non-empty generation of same-shaped genomes with cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    individuals: Vec<Individual>,
    generation: usize,
}

impl Population {
    pub fn evaluate(
        genomes: Vec<Genome>,
        fitness: &FitnessFunction,
        generation: usize,
    ) -> Result<Self, EaError> {
        let individuals = genomes
            .into_iter()
            .map(|genome| {
                genome.validate()?;
                let fitness = fitness.evaluate(&genome)?;
                Ok(Individual { genome, fitness })
            })
            .collect::<Result<Vec<_>, EaError>>()?;
        Self::from_individuals(individuals, generation)
    }

    pub fn from_individuals(
        individuals: Vec<Individual>,
        generation: usize,
    ) -> Result<Self, EaError> {
        let first = individuals.first().ok_or(EaError::EmptyPopulation)?;
        if individuals
            .iter()
            .any(|i| !i.genome.same_shape(&first.genome))
        {
            return Err(EaError::Contract("population mixes genome shapes".into()));
        }
        Ok(Self {
            individuals,
            generation,
        })
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Best individual; the first one among equals.
    pub fn best(&self) -> &Individual {
        self.individuals
            .iter()
            .reduce(|best, i| if i.fitness > best.fitness { i } else { best })
            .expect("population is non-empty")
    }

    pub fn mean_fitness(&self) -> f64 {
        self.individuals.iter().map(|i| i.fitness).sum::<f64>() / self.len() as f64
    }
}

/// `f(Y) = max { f(x) : x ∈ Y }`
pub fn population_fitness(individuals: &[Individual]) -> Result<f64, EaError> {
    individuals
        .iter()
        .map(|i| i.fitness)
        .reduce(f64::max)
        .ok_or(EaError::EmptyPopulation)
}

type TargetPredicate = dyn Fn(&Genome) -> bool + Send + Sync;

#[derive(Clone)]
pub enum TerminationCondition {
    /// Stop once any individual lies in the final set `F`.
    TargetSet(Arc<TargetPredicate>),
    /// Stop once the best fitness is within `tolerance` of `target`.
    FitnessOptimum {
        target: f64,
        tolerance: f64,
    },
    MaxGenerations(usize),
    /// Stop when the best fitness gained at most `min_improvement` over the
    /// last `window` generations.
    Stagnation {
        window: usize,
        min_improvement: f64,
    },
}

impl fmt::Debug for TerminationCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminationCondition::TargetSet(_) => f.write_str("TargetSet(..)"),
            TerminationCondition::FitnessOptimum { target, tolerance } => {
                write!(
                    f,
                    "FitnessOptimum {{ target: {target}, tolerance: {tolerance} }}"
                )
            }
            TerminationCondition::MaxGenerations(t) => write!(f, "MaxGenerations({t})"),
            TerminationCondition::Stagnation {
                window,
                min_improvement,
            } => {
                write!(
                    f,
                    "Stagnation {{ window: {window}, min_improvement: {min_improvement} }}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TargetReached,
    FitnessOptimum,
    Stagnation,
    MaxGenerations,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetReached => "target-reached",
            StopReason::FitnessOptimum => "fitness-optimum",
            StopReason::Stagnation => "stagnation",
            StopReason::MaxGenerations => "max-generations",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionaryAlgorithm {
    pub representation: Representation,
    /// Explicit `X[0]`; drawn from `representation` when absent.
    pub initial: Option<Vec<Genome>>,
    pub population_size: usize,
    pub fitness: FitnessFunction,
    pub selection: SelectionOperator,
    pub variation: VariationOperator,
    pub termination: Vec<TerminationCondition>,
    pub seed: u64,
}

impl EvolutionaryAlgorithm {
    pub fn validate(&self) -> Result<(), EaError> {
        self.representation.validate()?;
        self.selection.validate()?;
        self.variation.validate()?;
        if self.population_size == 0 {
            return Err(EaError::Config("population size must be at least 1".into()));
        }
        if let Some(initial) = &self.initial {
            if initial.len() != self.population_size {
                return Err(EaError::Config(format!(
                    "initial population has {} genomes, expected {}",
                    initial.len(),
                    self.population_size
                )));
            }
            if let Some(bad) = initial.iter().find(|g| !self.representation.matches(g)) {
                return Err(EaError::Config(format!(
                    "initial genome {bad} does not match the representation"
                )));
            }
        }
        for c in &self.termination {
            match c {
                TerminationCondition::MaxGenerations(0) => {
                    return Err(EaError::Config("generation cap must be at least 1".into()))
                }
                TerminationCondition::Stagnation { window: 0, .. } => {
                    return Err(EaError::Config(
                        "stagnation window must be at least 1".into(),
                    ))
                }
                TerminationCondition::Stagnation {
                    min_improvement, ..
                } if min_improvement.is_nan() || *min_improvement < 0.0 => {
                    return Err(EaError::Config(
                        "stagnation min_improvement must be nonnegative".into(),
                    ))
                }
                TerminationCondition::FitnessOptimum { tolerance, .. }
                    if tolerance.is_nan() || *tolerance < 0.0 =>
                {
                    return Err(EaError::Config(
                        "optimum tolerance must be nonnegative".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn generation_cap(&self) -> Option<usize> {
        self.termination.iter().find_map(|c| match c {
            TerminationCondition::MaxGenerations(t) => Some(*t),
            _ => None,
        })
    }

    pub fn rng(&self) -> EaRng {
        EaRng::new(self.seed, self.variation.leaves())
    }

    pub fn initial_population(&self) -> Result<Population, EaError> {
        let genomes = match &self.initial {
            Some(g) => g.clone(),
            None => {
                let mut rng = rng::stream_rng(self.seed, rng::INIT_STREAM);
                (0..self.population_size)
                    .map(|_| self.representation.random(&mut rng))
                    .collect()
            }
        };
        Population::evaluate(genomes, &self.fitness, 0)
    }

    fn stop_reason(&self, current: &Population, best_history: &[f64]) -> Option<StopReason> {
        let best = current.best().fitness;
        let t = current.generation();
        let mut reasons = self.termination.iter().filter_map(|c| match c {
            TerminationCondition::TargetSet(member) => current
                .individuals()
                .iter()
                .any(|i| member(&i.genome))
                .then_some(StopReason::TargetReached),
            TerminationCondition::FitnessOptimum { target, tolerance } => {
                ((best - target).abs() <= *tolerance).then_some(StopReason::FitnessOptimum)
            }
            TerminationCondition::Stagnation {
                window,
                min_improvement,
            } => (t >= *window && best_history[t] - best_history[t - window] <= *min_improvement)
                .then_some(StopReason::Stagnation),
            TerminationCondition::MaxGenerations(cap) => {
                (t >= *cap).then_some(StopReason::MaxGenerations)
            }
        });
        reasons.next()
    }
}

/// One application of `X[t+1] = s(ν(X[t]))`.
pub fn ea_step(
    alg: &EvolutionaryAlgorithm,
    current: &Population,
    rng: &mut EaRng,
) -> Result<Population, EaError> {
    let parents: Vec<Genome> = current
        .individuals()
        .iter()
        .map(|i| i.genome.clone())
        .collect();
    let offspring = alg.variation.apply(parents, &mut rng.variation)?;
    let pool = Population::evaluate(offspring, &alg.fitness, current.generation() + 1)?;
    let mut next =
        alg.selection
            .select(pool.individuals(), alg.population_size, &mut rng.selection)?;

    if alg.selection.elitist {
        let elite = current.best();
        if !next.iter().any(|i| i.genome == elite.genome) {
            let worst = next
                .iter()
                .enumerate()
                .rev()
                .reduce(|w, c| if c.1.fitness < w.1.fitness { c } else { w })
                .map(|(idx, _)| idx)
                .expect("selection output is non-empty");
            next[worst] = elite.clone();
        }
    }
    Population::from_individuals(next, current.generation() + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_genome: String,
}

impl GenerationRecord {
    fn of(p: &Population) -> Self {
        let best = p.best();
        Self {
            generation: p.generation(),
            best_fitness: best.fitness,
            mean_fitness: p.mean_fitness(),
            best_genome: best.genome.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<GenerationRecord>,
    pub stop_reason: StopReason,
    pub final_population: Population,
}

impl RunTrace {
    pub fn best_fitness(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.best_fitness)
    }

    /// Writes `generation,best_fitness,mean_fitness,best_genome,stop_reason`.
    /// The stop reason appears on the final row only. `preamble` lines are
    /// emitted first as `# ` comments.
    pub fn write_csv<W: io::Write>(&self, mut out: W, preamble: &[String]) -> Result<(), EaError> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "generation",
            "best_fitness",
            "mean_fitness",
            "best_genome",
            "stop_reason",
        ])?;
        let last = self.records.len().saturating_sub(1);
        for (i, r) in self.records.iter().enumerate() {
            let reason = if i == last {
                self.stop_reason.to_string()
            } else {
                String::new()
            };
            w.write_record([
                r.generation.to_string(),
                r.best_fitness.to_string(),
                r.mean_fitness.to_string(),
                r.best_genome.clone(),
                reason,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterates [`ea_step`] from `X[0]` until a termination condition holds.
/// A `MaxGenerations` cap is mandatory.
pub fn ea_run(alg: &EvolutionaryAlgorithm) -> Result<RunTrace, EaError> {
    alg.validate()?;
    if alg.generation_cap().is_none() {
        return Err(EaError::Config(
            "termination must include a generation cap".into(),
        ));
    }
    let mut rng = alg.rng();
    let mut current = alg.initial_population()?;
    let mut records = vec![GenerationRecord::of(&current)];
    let mut best_history = vec![current.best().fitness];
    loop {
        if let Some(stop_reason) = alg.stop_reason(&current, &best_history) {
            return Ok(RunTrace {
                records,
                stop_reason,
                final_population: current,
            });
        }
        current = ea_step(alg, &current, &mut rng)?;
        records.push(GenerationRecord::of(&current));
        best_history.push(current.best().fitness);
    }
}
