use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{EaError, Genome, Individual};
use crate::automata::{FiniteAutomaton, StateId, Symbol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionKind {
    /// Keep the best `keep` fraction of the pool and cycle through it.
    Truncation {
        keep: f64,
    },
    /// Fitness-proportional (roulette wheel) sampling with replacement.
    Proportional,
    Tournament {
        size: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOperator {
    pub kind: SelectionKind,
    pub elitist: bool,
}

impl SelectionOperator {
    pub fn new(kind: SelectionKind, elitist: bool) -> Self {
        Self { kind, elitist }
    }

    pub fn validate(&self) -> Result<(), EaError> {
        match self.kind {
            SelectionKind::Truncation { keep } if !(keep > 0.0 && keep <= 1.0) => Err(
                EaError::Config(format!("truncation keep fraction {keep} outside (0, 1]")),
            ),
            SelectionKind::Tournament { size: 0 } => {
                Err(EaError::Config("tournament size must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Draws `size` individuals from `pool`. Ties are broken by pool order.
    pub fn select(
        &self,
        pool: &[Individual],
        size: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Individual>, EaError> {
        if pool.is_empty() {
            return Err(EaError::EmptyPopulation);
        }
        if let Some(bad) = pool
            .iter()
            .find(|i| !(i.fitness >= 0.0 && i.fitness.is_finite()))
        {
            return Err(EaError::Contract(format!(
                "selection saw fitness {}",
                bad.fitness
            )));
        }
        let picked: Vec<usize> = match self.kind {
            SelectionKind::Truncation { keep } => {
                let mut order: Vec<usize> = (0..pool.len()).collect();
                // stable sort keeps original order among equals
                order.sort_by(|&a, &b| pool[b].fitness.total_cmp(&pool[a].fitness));
                let kept = ((keep * pool.len() as f64).ceil() as usize).clamp(1, pool.len());
                (0..size).map(|i| order[i % kept]).collect()
            }
            SelectionKind::Proportional => {
                let total: f64 = pool.iter().map(|i| i.fitness).sum();
                (0..size)
                    .map(|_| {
                        if total == 0.0 {
                            return rng.random_range(0..pool.len());
                        }
                        let mut r = rng.random::<f64>() * total;
                        for (idx, ind) in pool.iter().enumerate() {
                            if r < ind.fitness {
                                return idx;
                            }
                            r -= ind.fitness;
                        }
                        // rounding fallback: last individual with positive fitness
                        pool.iter()
                            .rposition(|i| i.fitness > 0.0)
                            .unwrap_or(pool.len() - 1)
                    })
                    .collect()
            }
            SelectionKind::Tournament { size: k } => (0..size)
                .map(|_| {
                    let mut best = rng.random_range(0..pool.len());
                    for _ in 1..k {
                        let c = rng.random_range(0..pool.len());
                        if pool[c].fitness > pool[best].fitness {
                            best = c;
                        }
                    }
                    best
                })
                .collect(),
        };
        Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
    }
}

/// Probabilities of the four EP edits applied to an FSM per mutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsmMutationConfig {
    pub add_state: f64,
    pub delete_state: f64,
    pub retarget: f64,
    pub flip_accepting: f64,
    /// Additions are skipped once an automaton has this many states.
    pub max_states: usize,
}

impl Default for FsmMutationConfig {
    fn default() -> Self {
        Self {
            add_state: 0.1,
            delete_state: 0.1,
            retarget: 0.5,
            flip_accepting: 0.1,
            max_states: 32,
        }
    }
}

impl FsmMutationConfig {
    pub fn validate(&self) -> Result<(), EaError> {
        for (name, p) in [
            ("add_state", self.add_state),
            ("delete_state", self.delete_state),
            ("retarget", self.retarget),
            ("flip_accepting", self.flip_accepting),
        ] {
            check_probability(name, p)?;
        }
        if self.max_states == 0 {
            return Err(EaError::Config("max_states must be at least 1".into()));
        }
        Ok(())
    }
}

const FSM_MUTATION_RETRIES: usize = 16;

/// Applies one round of EP-style edits to a DFA.
///
/// Each edit fires independently with its probability. Added states start
/// non-accepting. A round that would delete the last state is redrawn, at
/// most `FSM_MUTATION_RETRIES` times.
pub fn mutate_fsm(
    fa: &FiniteAutomaton,
    config: &FsmMutationConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FiniteAutomaton, EaError> {
    if !fa.is_deterministic() {
        return Err(EaError::Config(
            "FSM mutation expects a deterministic automaton".into(),
        ));
    }
    'attempt: for _ in 0..FSM_MUTATION_RETRIES {
        let mut m = fa.clone();
        let k = m.alphabet().len();
        if rng.random_bool(config.add_state) && m.num_states() < config.max_states {
            let n = m.num_states();
            let targets: Vec<StateId> = (0..k).map(|_| StateId(rng.random_range(0..=n))).collect();
            m.add_state(false, &targets)?;
        }
        if rng.random_bool(config.delete_state) {
            let n = m.num_states();
            if n == 1 {
                continue 'attempt;
            }
            let victim = rng.random_range(0..n);
            let mut redirect = rng.random_range(0..n - 1);
            if redirect >= victim {
                redirect += 1;
            }
            m.remove_state(StateId(victim), StateId(redirect))?;
        }
        if rng.random_bool(config.retarget) {
            let n = m.num_states();
            let from = StateId(rng.random_range(0..n));
            let sym = Symbol(rng.random_range(0..k) as u16);
            if n > 1 {
                let current = m.next_state(from, sym).expect("DFA is total");
                let mut to = rng.random_range(0..n - 1);
                if to >= current.0 {
                    to += 1;
                }
                m.set_transition(from, sym, StateId(to))?;
            }
        }
        if rng.random_bool(config.flip_accepting) {
            let s = StateId(rng.random_range(0..m.num_states()));
            m.toggle_accepting(s)?;
        }
        return Ok(m);
    }
    Err(EaError::Config(format!(
        "FSM mutation failed to produce a non-empty automaton in {FSM_MUTATION_RETRIES} attempts"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub enum VariationOperator {
    BitFlip {
        p: f64,
    },
    OnePointCrossover {
        pc: f64,
    },
    /// Per-coordinate Gaussian noise. With `tau`, each offspring carries a
    /// log-normally self-adapted step inherited from its parent.
    Gaussian {
        sigma: f64,
        tau: Option<f64>,
    },
    FsmMutation(FsmMutationConfig),
    /// Applied in order, each stage feeding the next.
    Composite(Vec<VariationOperator>),
}

fn check_probability(name: &str, p: f64) -> Result<(), EaError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(EaError::Config(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

impl VariationOperator {
    pub fn validate(&self) -> Result<(), EaError> {
        match self {
            VariationOperator::BitFlip { p } => check_probability("bit-flip p", *p),
            VariationOperator::OnePointCrossover { pc } => check_probability("crossover pc", *pc),
            VariationOperator::Gaussian { sigma, tau } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(EaError::Config(format!("sigma = {sigma} must be positive")));
                }
                match tau {
                    Some(t) if !(t.is_finite() && *t >= 0.0) => {
                        Err(EaError::Config(format!("tau = {t} must be nonnegative")))
                    }
                    _ => Ok(()),
                }
            }
            VariationOperator::FsmMutation(c) => c.validate(),
            VariationOperator::Composite(ops) => ops.iter().try_for_each(Self::validate),
        }
    }

    /// Number of primitive operators, i.e. random streams consumed.
    pub fn leaves(&self) -> usize {
        match self {
            VariationOperator::Composite(ops) => ops.iter().map(Self::leaves).sum(),
            _ => 1,
        }
    }

    /// Whether every search point is reachable from every other in one
    /// application with nonzero probability.
    pub fn is_complete(&self) -> bool {
        match self {
            VariationOperator::BitFlip { p } => *p > 0.0 && *p < 1.0,
            VariationOperator::Gaussian { .. } => true,
            VariationOperator::OnePointCrossover { .. } | VariationOperator::FsmMutation(_) => {
                false
            }
            VariationOperator::Composite(ops) => ops.iter().any(Self::is_complete),
        }
    }

    /// Produces one offspring per parent. `rngs` must hold `self.leaves()` streams.
    pub fn apply(
        &self,
        mut genomes: Vec<Genome>,
        rngs: &mut [ChaCha8Rng],
    ) -> Result<Vec<Genome>, EaError> {
        debug_assert_eq!(rngs.len(), self.leaves());
        match self {
            VariationOperator::Composite(ops) => {
                let mut rest = rngs;
                for op in ops {
                    let (mine, tail) = rest.split_at_mut(op.leaves());
                    genomes = op.apply(genomes, mine)?;
                    rest = tail;
                }
                Ok(genomes)
            }
            VariationOperator::BitFlip { p } => {
                let rng = &mut rngs[0];
                for g in &mut genomes {
                    let Genome::BitString(bits) = g else {
                        return Err(mismatch("bit-flip", g));
                    };
                    for b in bits.iter_mut() {
                        if rng.random_bool(*p) {
                            *b = !*b;
                        }
                    }
                }
                Ok(genomes)
            }
            VariationOperator::OnePointCrossover { pc } => {
                let rng = &mut rngs[0];
                for pair in genomes.chunks_mut(2) {
                    let [a, b] = pair else { continue };
                    let (Genome::BitString(x), Genome::BitString(y)) = (a, b) else {
                        return Err(mismatch("one-point crossover", &pair[0]));
                    };
                    if x.len() != y.len() {
                        return Err(EaError::Contract(
                            "crossover parents differ in length".into(),
                        ));
                    }
                    if rng.random_bool(*pc) && x.len() >= 2 {
                        let cut = rng.random_range(1..x.len());
                        x[cut..].swap_with_slice(&mut y[cut..]);
                    }
                }
                Ok(genomes)
            }
            VariationOperator::Gaussian { sigma, tau } => {
                let rng = &mut rngs[0];
                for g in &mut genomes {
                    let Genome::RealVector(v) = g else {
                        return Err(mismatch("gaussian mutation", g));
                    };
                    let step = match tau {
                        Some(t) => {
                            let z: f64 = rng.sample(StandardNormal);
                            let s = v.step.unwrap_or(*sigma) * (t * z).exp();
                            v.step = Some(s);
                            s
                        }
                        None => *sigma,
                    };
                    for x in v.values.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *x += step * z;
                    }
                    g.validate()?;
                }
                Ok(genomes)
            }
            VariationOperator::FsmMutation(config) => {
                let rng = &mut rngs[0];
                genomes
                    .into_iter()
                    .map(|g| match g {
                        Genome::Fsm(fa) => mutate_fsm(&fa, config, rng).map(Genome::Fsm),
                        other => Err(mismatch("FSM mutation", &other)),
                    })
                    .collect()
            }
        }
    }
}

fn mismatch(op: &str, g: &Genome) -> EaError {
    EaError::Config(format!("{op} cannot act on {:?} genomes", g.kind()))
}
