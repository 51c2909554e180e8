//! Classical acceptors used as level automata: finite automata, pushdown
//! automata and single-tape Turing machines.
//!
//! Every run is a pure function of its inputs. Machines that may not halt
//! (PDAs with ε-loops, Turing machines) take a [`StepBudget`] and answer
//! [`Outcome::Unknown`] when it is exhausted.

mod alphabet;
mod finite;
mod parse;
mod pushdown;
mod turing;

use std::fmt;

use thiserror::Error;

pub use alphabet::{Alphabet, Symbol, Word};
pub use finite::{FiniteAutomaton, StateId};
pub use parse::{parse_automaton, ParseError};
pub use pushdown::{PdaTransition, PushdownAutomaton, StackSymbol};
pub use turing::{HeadMove, TapeSymbol, TmAction, TuringMachine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("automaton must have at least one state")]
    NoStates,
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("unknown stack symbol {0}")]
    UnknownStackSymbol(String),
    #[error("automaton is not deterministic: {0}")]
    NotDeterministic(String),
    #[error("invalid automaton: {0}")]
    Config(String),
}

/// Upper bound on the work a single run may perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepBudget(u64);

impl StepBudget {
    pub fn new(max_steps: u64) -> Result<Self, AutomatonError> {
        if max_steps == 0 {
            return Err(AutomatonError::Config(
                "step budget must be at least 1".into(),
            ));
        }
        Ok(Self(max_steps))
    }

    pub fn max_steps(self) -> u64 {
        self.0
    }
}

impl Default for StepBudget {
    fn default() -> Self {
        Self(10_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accepted,
    Rejected,
    /// The budget ran out before the machine reached a verdict.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunVerdict {
    pub outcome: Outcome,
    pub steps: u64,
}

impl RunVerdict {
    pub fn accepted(steps: u64) -> Self {
        Self {
            outcome: Outcome::Accepted,
            steps,
        }
    }

    pub fn rejected(steps: u64) -> Self {
        Self {
            outcome: Outcome::Rejected,
            steps,
        }
    }

    pub fn unknown(steps: u64) -> Self {
        Self {
            outcome: Outcome::Unknown,
            steps,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.outcome == Outcome::Accepted
    }
}

/// Machine class of a level automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelClass {
    Finite,
    Pushdown,
    Turing,
}

impl fmt::Display for LevelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelClass::Finite => "FA",
            LevelClass::Pushdown => "PDA",
            LevelClass::Turing => "TM",
        })
    }
}

/// Any acceptor that can serve as one component of an evolutionary automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelAutomaton {
    Finite(FiniteAutomaton),
    Pushdown(PushdownAutomaton),
    Turing(TuringMachine),
}

impl LevelAutomaton {
    pub fn class(&self) -> LevelClass {
        match self {
            LevelAutomaton::Finite(_) => LevelClass::Finite,
            LevelAutomaton::Pushdown(_) => LevelClass::Pushdown,
            LevelAutomaton::Turing(_) => LevelClass::Turing,
        }
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        match self {
            LevelAutomaton::Finite(a) => a.alphabet(),
            LevelAutomaton::Pushdown(a) => a.alphabet(),
            LevelAutomaton::Turing(m) => m.input_alphabet(),
        }
    }

    /// Runs the automaton; finite automata ignore the budget.
    pub fn run(&self, word: &Word, budget: StepBudget) -> Result<RunVerdict, AutomatonError> {
        match self {
            LevelAutomaton::Finite(a) => a.run(word),
            LevelAutomaton::Pushdown(a) => a.run(word, budget),
            LevelAutomaton::Turing(m) => m.run(word, budget),
        }
    }
}

impl From<FiniteAutomaton> for LevelAutomaton {
    fn from(a: FiniteAutomaton) -> Self {
        LevelAutomaton::Finite(a)
    }
}

impl From<PushdownAutomaton> for LevelAutomaton {
    fn from(a: PushdownAutomaton) -> Self {
        LevelAutomaton::Pushdown(a)
    }
}

impl From<TuringMachine> for LevelAutomaton {
    fn from(m: TuringMachine) -> Self {
        LevelAutomaton::Turing(m)
    }
}
