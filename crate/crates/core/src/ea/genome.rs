use std::fmt;

use rand::Rng;

use super::EaError;
use crate::automata::{Alphabet, FiniteAutomaton, StateId};

/// Real-valued genome with an optional self-adapted mutation step.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    pub values: Vec<f64>,
    pub step: Option<f64>,
}

impl RealVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, step: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Genome {
    BitString(Vec<bool>),
    RealVector(RealVector),
    Fsm(FiniteAutomaton),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenomeKind {
    BitString,
    RealVector,
    Fsm,
}

impl Genome {
    pub fn kind(&self) -> GenomeKind {
        match self {
            Genome::BitString(_) => GenomeKind::BitString,
            Genome::RealVector(_) => GenomeKind::RealVector,
            Genome::Fsm(_) => GenomeKind::Fsm,
        }
    }

    /// Parses a `0`/`1` string into a bitstring genome.
    pub fn bits(text: &str) -> Result<Self, EaError> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(EaError::Config(format!("bad bit {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Genome::BitString)
    }

    pub fn as_bits(&self) -> Option<&[bool]> {
        match self {
            Genome::BitString(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_reals(&self) -> Option<&[f64]> {
        match self {
            Genome::RealVector(v) => Some(&v.values),
            _ => None,
        }
    }

    /// Same representation kind and, for vectors, the same length.
    pub fn same_shape(&self, other: &Genome) -> bool {
        match (self, other) {
            (Genome::BitString(a), Genome::BitString(b)) => a.len() == b.len(),
            (Genome::RealVector(a), Genome::RealVector(b)) => a.values.len() == b.values.len(),
            (Genome::Fsm(a), Genome::Fsm(b)) => a.alphabet() == b.alphabet(),
            _ => false,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), EaError> {
        if let Genome::RealVector(v) = self {
            if v.values.iter().chain(v.step.iter()).any(|x| !x.is_finite()) {
                return Err(EaError::Contract(
                    "real-vector genome has a non-finite coordinate".into(),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Genome::BitString(bits) => {
                for &b in bits {
                    f.write_str(if b { "1" } else { "0" })?;
                }
                Ok(())
            }
            Genome::RealVector(v) => {
                let parts: Vec<String> = v.values.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(";"))
            }
            Genome::Fsm(fa) => f.write_str(&fa.describe()),
        }
    }
}

/// Search space from which random initial populations are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    BitString {
        length: usize,
    },
    RealVector {
        dimension: usize,
        lower: f64,
        upper: f64,
    },
    Fsm {
        alphabet: Alphabet,
        states: usize,
    },
}

impl Representation {
    pub fn validate(&self) -> Result<(), EaError> {
        match self {
            Representation::BitString { length: 0 } => {
                Err(EaError::Config("bitstring length must be positive".into()))
            }
            Representation::RealVector {
                dimension,
                lower,
                upper,
            } => {
                if *dimension == 0 {
                    Err(EaError::Config("dimension must be positive".into()))
                } else if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    Err(EaError::Config(
                        "initial bounds must be finite with lower < upper".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            Representation::Fsm { states: 0, .. } => Err(EaError::Config(
                "FSM genomes need at least one state".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        match self {
            Representation::BitString { length } => {
                Genome::BitString((0..*length).map(|_| rng.random()).collect())
            }
            Representation::RealVector {
                dimension,
                lower,
                upper,
            } => Genome::RealVector(RealVector::new(
                (0..*dimension)
                    .map(|_| rng.random_range(*lower..*upper))
                    .collect(),
            )),
            Representation::Fsm { alphabet, states } => {
                Genome::Fsm(random_dfa(alphabet, *states, rng))
            }
        }
    }

    pub fn matches(&self, genome: &Genome) -> bool {
        match (self, genome) {
            (Representation::BitString { length }, Genome::BitString(b)) => b.len() == *length,
            (Representation::RealVector { dimension, .. }, Genome::RealVector(v)) => {
                v.values.len() == *dimension
            }
            (Representation::Fsm { alphabet, .. }, Genome::Fsm(fa)) => fa.alphabet() == alphabet,
            _ => false,
        }
    }
}

fn random_dfa<R: Rng + ?Sized>(alphabet: &Alphabet, states: usize, rng: &mut R) -> FiniteAutomaton {
    let mut b = FiniteAutomaton::builder(alphabet.clone());
    let ids = b.add_states(states);
    b.start(ids[0]);
    for &s in &ids {
        if rng.random_bool(0.5) {
            b.accept(s);
        }
        for sym in alphabet.symbols() {
            b.transition(s, Some(sym), StateId(rng.random_range(0..states)));
        }
    }
    b.build_dfa().expect("random DFA is total by construction")
}
