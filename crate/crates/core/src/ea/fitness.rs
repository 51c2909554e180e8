use std::fmt;
use std::sync::Arc;

use super::{EaError, Genome};
use crate::automata::{Alphabet, Word};

type Evaluator = dyn Fn(&Genome) -> Option<f64> + Send + Sync;

/// A pure, nonnegative fitness to be maximized. The evaluator returns
/// `None` for genomes outside its representation.
#[derive(Clone)]
pub struct FitnessFunction {
    name: String,
    evaluator: Arc<Evaluator>,
    known_optimum: Option<f64>,
}

impl fmt::Debug for FitnessFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FitnessFunction")
            .field("name", &self.name)
            .field("known_optimum", &self.known_optimum)
            .finish()
    }
}

impl FitnessFunction {
    pub fn new<F>(name: impl Into<String>, known_optimum: Option<f64>, evaluator: F) -> Self
    where
        F: Fn(&Genome) -> Option<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            known_optimum,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn evaluate(&self, genome: &Genome) -> Result<f64, EaError> {
        let value = (self.evaluator)(genome).ok_or_else(|| {
            EaError::Config(format!(
                "fitness `{}` is not defined for {:?} genomes",
                self.name,
                genome.kind()
            ))
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(EaError::Contract(format!(
                "fitness `{}` returned {value}; values must be finite and nonnegative",
                self.name
            )));
        }
        Ok(value)
    }

    /// Number of one bits; optimum `n`.
    pub fn onemax(n: usize) -> Self {
        Self::new("onemax", Some(n as f64), move |g| {
            g.as_bits()
                .filter(|b| b.len() == n)
                .map(|b| b.iter().filter(|&&x| x).count() as f64)
        })
    }

    /// Length of the all-ones prefix; optimum `n`.
    pub fn leading_ones(n: usize) -> Self {
        Self::new("leading-ones", Some(n as f64), move |g| {
            g.as_bits()
                .filter(|b| b.len() == n)
                .map(|b| b.iter().take_while(|&&x| x).count() as f64)
        })
    }

    /// `1 / (1 + Σ xᵢ²)`, maximal (1) at the origin.
    pub fn inverse_sphere(dimension: usize) -> Self {
        Self::new("inverse-sphere", Some(1.0), move |g| {
            g.as_reals()
                .filter(|x| x.len() == dimension)
                .map(|x| 1.0 / (1.0 + sphere(x)))
        })
    }

    /// Fraction of words up to `max_len` on which an FSM genome agrees with
    /// `target`. The optimum 1 is reached by any automaton for the target
    /// language restricted to those words.
    pub fn language_match<P>(alphabet: Alphabet, max_len: usize, target: P) -> Self
    where
        P: Fn(&Word) -> bool + Send + Sync + 'static,
    {
        let words: Vec<(Word, bool)> = alphabet
            .words_up_to(max_len)
            .map(|w| {
                let member = target(&w);
                (w, member)
            })
            .collect();
        let total = words.len() as f64;
        Self::new("language-match", Some(1.0), move |g| match g {
            Genome::Fsm(fa) if fa.alphabet() == &alphabet => {
                let hits = words
                    .iter()
                    .filter(|(w, member)| {
                        fa.run(w)
                            .map(|v| v.is_accepted() == *member)
                            .unwrap_or(false)
                    })
                    .count();
                Some(hits as f64 / total)
            }
            _ => None,
        })
    }
}

/// Σ xᵢ²
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
