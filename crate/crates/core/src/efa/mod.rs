//! Evolutionary automata: lazily generated sequences `E[0], E[1], …` of
//! level automata with terminal- and local-mode acceptance.
//!
//! A word is accepted in terminal mode when some level accepts it. Levels
//! forward every other word unchanged to the next level, so acceptance is a
//! search over levels bounded by a [`LevelBudget`]. Without a membership
//! certificate the search can only confirm membership; the negative answer
//! is [`TerminalVerdict::Unknown`].

mod builtins;

use std::fmt;
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automata::{
    Alphabet, AutomatonError, LevelAutomaton, LevelClass, Outcome, RunVerdict, StepBudget, Word,
};
use crate::ea::{rng::stream_rng, EaError};

pub use builtins::{
    make_anbn_efa, make_anbncn_efa, make_ep_mutated_efa, make_singleton_efa, named_enumerator,
    Enumerator,
};

#[derive(Debug, Error)]
pub enum EfaError {
    #[error("level {level} is a {found} but this automaton requires {expected} levels")]
    WrongClass {
        level: usize,
        expected: LevelClass,
        found: LevelClass,
    },
    #[error("level {level} reads alphabet {found}, expected {expected}")]
    AlphabetMismatch {
        level: usize,
        expected: Alphabet,
        found: Alphabet,
    },
    #[error("level {0} does not exist")]
    LevelOutOfRange(usize),
    #[error("invalid evolutionary automaton: {0}")]
    Config(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Mutation(#[from] EaError),
}

/// Number of levels a terminal-mode query may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelBudget(usize);

impl LevelBudget {
    pub fn new(max_levels: usize) -> Result<Self, EfaError> {
        if max_levels == 0 {
            return Err(EfaError::Config("level budget must be at least 1".into()));
        }
        Ok(Self(max_levels))
    }

    pub fn max_levels(self) -> usize {
        self.0
    }
}

type IndexedFn = dyn Fn(usize) -> Result<LevelAutomaton, EfaError> + Send + Sync;
type MutationFn =
    dyn Fn(&LevelAutomaton, &mut ChaCha8Rng) -> Result<LevelAutomaton, EfaError> + Send + Sync;
pub type Certificate = dyn Fn(&Word) -> bool + Send + Sync;

/// Seeded rule deriving `E[t+1]` from `E[t]`. Produced levels are memoized,
/// so concurrent queries all observe one canonical sequence.
pub struct MutationRule {
    seed: u64,
    step: Arc<MutationFn>,
    levels: Mutex<Vec<Arc<LevelAutomaton>>>,
}

impl MutationRule {
    pub fn new<F>(seed: u64, initial: LevelAutomaton, step: F) -> Self
    where
        F: Fn(&LevelAutomaton, &mut ChaCha8Rng) -> Result<LevelAutomaton, EfaError>
            + Send
            + Sync
            + 'static,
    {
        Self {
            seed,
            step: Arc::new(step),
            levels: Mutex::new(vec![Arc::new(initial)]),
        }
    }

    fn level(&self, t: usize) -> Result<Arc<LevelAutomaton>, EfaError> {
        let mut levels = self.levels.lock().unwrap_or_else(|e| e.into_inner());
        while levels.len() <= t {
            let k = levels.len();
            // the move from level k-1 to level k reads its own stream
            let mut rng = stream_rng(self.seed, k as u64);
            let next = (self.step)(&levels[k - 1], &mut rng)?;
            levels.push(Arc::new(next));
        }
        Ok(Arc::clone(&levels[t]))
    }
}

pub enum LevelGenerator {
    /// A finite, non-empty sequence.
    ExplicitList(Vec<Arc<LevelAutomaton>>),
    /// A pure map from level index to automaton.
    IndexedRule(Arc<IndexedFn>),
    MutationRule(MutationRule),
}

impl LevelGenerator {
    pub fn explicit(levels: Vec<LevelAutomaton>) -> Result<Self, EfaError> {
        if levels.is_empty() {
            return Err(EfaError::Config(
                "an explicit level list must not be empty; use reject-all levels for the empty language".into(),
            ));
        }
        Ok(LevelGenerator::ExplicitList(
            levels.into_iter().map(Arc::new).collect(),
        ))
    }

    pub fn indexed<F>(rule: F) -> Self
    where
        F: Fn(usize) -> Result<LevelAutomaton, EfaError> + Send + Sync + 'static,
    {
        LevelGenerator::IndexedRule(Arc::new(rule))
    }

    fn level(&self, t: usize) -> Result<Option<Arc<LevelAutomaton>>, EfaError> {
        match self {
            LevelGenerator::ExplicitList(levels) => Ok(levels.get(t).cloned()),
            LevelGenerator::IndexedRule(rule) => rule(t).map(|a| Some(Arc::new(a))),
            LevelGenerator::MutationRule(rule) => rule.level(t).map(Some),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalVerdict {
    Accepted {
        level: usize,
        steps: u64,
    },
    /// The membership certificate ruled the word out.
    RejectedByCertificate,
    /// No level accepted within the budget. `undecided_levels` counts levels
    /// whose own run ran out of steps and was treated as non-accepting.
    Unknown {
        levels_explored: usize,
        undecided_levels: usize,
    },
}

/// A possibly infinite sequence of same-class level automata.
pub struct EvolutionaryAutomaton {
    name: String,
    alphabet: Alphabet,
    generator: LevelGenerator,
    level_class: LevelClass,
    budget: StepBudget,
    certificate: Option<Arc<Certificate>>,
}

impl fmt::Debug for EvolutionaryAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionaryAutomaton")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet)
            .field("level_class", &self.level_class)
            .field("budget", &self.budget)
            .field("certificate", &self.certificate.is_some())
            .finish()
    }
}

impl EvolutionaryAutomaton {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        level_class: LevelClass,
        generator: LevelGenerator,
    ) -> Self {
        Self {
            name: name.into(),
            alphabet,
            generator,
            level_class,
            budget: StepBudget::default(),
            certificate: None,
        }
    }

    pub fn with_budget(mut self, budget: StepBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_certificate<P>(mut self, certificate: P) -> Self
    where
        P: Fn(&Word) -> bool + Send + Sync + 'static,
    {
        self.certificate = Some(Arc::new(certificate));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn level_class(&self) -> LevelClass {
        self.level_class
    }

    pub fn budget(&self) -> StepBudget {
        self.budget
    }

    pub fn has_certificate(&self) -> bool {
        self.certificate.is_some()
    }

    /// Level `t`, or `None` past the end of a finite sequence.
    pub fn level(&self, t: usize) -> Result<Option<Arc<LevelAutomaton>>, EfaError> {
        let Some(level) = self.generator.level(t)? else {
            return Ok(None);
        };
        if level.class() != self.level_class {
            return Err(EfaError::WrongClass {
                level: t,
                expected: self.level_class,
                found: level.class(),
            });
        }
        if level.input_alphabet() != &self.alphabet {
            return Err(EfaError::AlphabetMismatch {
                level: t,
                expected: self.alphabet.clone(),
                found: level.input_alphabet().clone(),
            });
        }
        Ok(Some(level))
    }

    /// Terminal-mode acceptance: the word passes through `E[0], E[1], …`
    /// unchanged until a level accepts it.
    pub fn terminal_accept(
        &self,
        word: &Word,
        budget: LevelBudget,
    ) -> Result<TerminalVerdict, EfaError> {
        self.alphabet.check_word(word)?;
        if let Some(cert) = &self.certificate {
            if !cert(word) {
                return Ok(TerminalVerdict::RejectedByCertificate);
            }
        }
        let mut explored = 0;
        let mut undecided = 0;
        for t in 0..budget.max_levels() {
            let Some(level) = self.level(t)? else { break };
            explored += 1;
            let verdict = level.run(word, self.budget)?;
            match verdict.outcome {
                Outcome::Accepted => {
                    return Ok(TerminalVerdict::Accepted {
                        level: t,
                        steps: verdict.steps,
                    })
                }
                Outcome::Unknown => undecided += 1,
                Outcome::Rejected => {}
            }
        }
        Ok(TerminalVerdict::Unknown {
            levels_explored: explored,
            undecided_levels: undecided,
        })
    }

    /// Local-mode run of the single level `t`.
    pub fn local_accept(&self, t: usize, word: &Word) -> Result<RunVerdict, EfaError> {
        self.alphabet.check_word(word)?;
        let level = self.level(t)?.ok_or(EfaError::LevelOutOfRange(t))?;
        Ok(level.run(word, self.budget)?)
    }
}
