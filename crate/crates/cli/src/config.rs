use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use evoauto::automata::{Alphabet, FiniteAutomaton, Symbol, Word};
use evoauto::ea::{
    EvolutionaryAlgorithm, FitnessFunction, FsmMutationConfig, Representation, SelectionKind,
    SelectionOperator, TerminationCondition, VariationOperator,
};
use evoauto::lab::{ConvergenceConfig, EsRateConfig, NflConfig, SchemaConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ea_run: Option<EaRunConfig>,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub nfl: NflConfig,
    #[serde(default)]
    pub schema: SchemaConfig,
    #[serde(default)]
    pub esrate: EsRateConfig,
    #[serde(default)]
    pub efa: BTreeMap<String, EfaSpec>,
    /// Directory that relative paths inside the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }
}

/// First 16 hex digits of the SHA-256 of the value rendered as TOML with
/// sorted keys.
pub fn digest<T: Serialize>(value: &T) -> String {
    let canonical = toml::Value::try_from(value)
        .and_then(|v| toml::to_string(&v))
        .expect("config sections serialize to TOML");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RepresentationSpec {
    Bitstring {
        length: usize,
    },
    Real {
        dimension: usize,
        lower: f64,
        upper: f64,
    },
    Fsm {
        alphabet: String,
        states: usize,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionName {
    Truncation,
    Proportional,
    Tournament,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSpec {
    pub kind: SelectionName,
    #[serde(default = "default_keep")]
    pub keep: f64,
    #[serde(default = "default_tournament")]
    pub size: usize,
    #[serde(default)]
    pub elitist: bool,
}

fn default_keep() -> f64 {
    0.5
}

fn default_tournament() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VariationSpec {
    BitFlip {
        p: f64,
    },
    OnePointCrossover {
        pc: f64,
    },
    Gaussian {
        sigma: f64,
        tau: Option<f64>,
    },
    FsmMutation {
        add_state: f64,
        delete_state: f64,
        retarget: f64,
        flip_accepting: f64,
        max_states: usize,
    },
}

impl VariationSpec {
    fn operator(&self) -> VariationOperator {
        match *self {
            VariationSpec::BitFlip { p } => VariationOperator::BitFlip { p },
            VariationSpec::OnePointCrossover { pc } => VariationOperator::OnePointCrossover { pc },
            VariationSpec::Gaussian { sigma, tau } => VariationOperator::Gaussian { sigma, tau },
            VariationSpec::FsmMutation {
                add_state,
                delete_state,
                retarget,
                flip_accepting,
                max_states,
            } => VariationOperator::FsmMutation(FsmMutationConfig {
                add_state,
                delete_state,
                retarget,
                flip_accepting,
                max_states,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EaRunConfig {
    pub representation: RepresentationSpec,
    pub population: usize,
    /// `onemax`, `leading-ones`, `inverse-sphere` or `even-parity`.
    pub fitness: String,
    pub selection: SelectionSpec,
    pub variation: Vec<VariationSpec>,
    pub generations: Option<usize>,
    #[serde(default = "yes")]
    pub stop_at_optimum: bool,
    pub stagnation_window: Option<usize>,
    #[serde(default)]
    pub stagnation_delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trace")]
    pub output: String,
    /// Longest word scored by `even-parity`.
    #[serde(default = "default_word_length")]
    pub max_word_length: usize,
}

fn yes() -> bool {
    true
}

fn default_trace() -> String {
    "trace.csv".into()
}

fn default_word_length() -> usize {
    6
}

fn alphabet(symbols: &str) -> Result<Alphabet, CliError> {
    Alphabet::from_chars(symbols).map_err(|e| CliError::Usage(format!("alphabet {symbols:?}: {e}")))
}

impl EaRunConfig {
    pub fn algorithm(&self) -> Result<EvolutionaryAlgorithm, CliError> {
        let representation = match &self.representation {
            RepresentationSpec::Bitstring { length } => {
                Representation::BitString { length: *length }
            }
            RepresentationSpec::Real {
                dimension,
                lower,
                upper,
            } => Representation::RealVector {
                dimension: *dimension,
                lower: *lower,
                upper: *upper,
            },
            RepresentationSpec::Fsm {
                alphabet: a,
                states,
            } => Representation::Fsm {
                alphabet: alphabet(a)?,
                states: *states,
            },
        };
        let fitness = match (self.fitness.as_str(), &representation) {
            ("onemax", Representation::BitString { length }) => FitnessFunction::onemax(*length),
            ("leading-ones", Representation::BitString { length }) => {
                FitnessFunction::leading_ones(*length)
            }
            ("inverse-sphere", Representation::RealVector { dimension, .. }) => {
                FitnessFunction::inverse_sphere(*dimension)
            }
            ("even-parity", Representation::Fsm { alphabet, .. }) => {
                let first = Symbol(0);
                FitnessFunction::language_match(
                    alphabet.clone(),
                    self.max_word_length,
                    move |w: &Word| w.symbols().iter().filter(|&&s| s == first).count() % 2 == 0,
                )
            }
            (name, r) => {
                return Err(CliError::Usage(format!(
                    "fitness {name:?} does not apply to representation {r:?}"
                )))
            }
        };
        let kind = match self.selection.kind {
            SelectionName::Truncation => SelectionKind::Truncation {
                keep: self.selection.keep,
            },
            SelectionName::Proportional => SelectionKind::Proportional,
            SelectionName::Tournament => SelectionKind::Tournament {
                size: self.selection.size,
            },
        };
        let variation = match self.variation.as_slice() {
            [] => {
                return Err(CliError::Usage(
                    "at least one variation operator is required".into(),
                ))
            }
            [one] => one.operator(),
            many => {
                VariationOperator::Composite(many.iter().map(VariationSpec::operator).collect())
            }
        };
        let cap = self.generations.ok_or_else(|| {
            CliError::Usage("ea_run.generations (the generation cap) is required".into())
        })?;
        let mut termination = vec![TerminationCondition::MaxGenerations(cap)];
        if self.stop_at_optimum {
            if let Some(target) = fitness.known_optimum() {
                termination.push(TerminationCondition::FitnessOptimum {
                    target,
                    tolerance: 0.0,
                });
            }
        }
        if let Some(window) = self.stagnation_window {
            termination.push(TerminationCondition::Stagnation {
                window,
                min_improvement: self.stagnation_delta,
            });
        }
        let alg = EvolutionaryAlgorithm {
            representation,
            initial: None,
            population_size: self.population,
            fitness,
            selection: SelectionOperator::new(kind, self.selection.elitist),
            variation,
            termination,
            seed: self.seed,
        };
        alg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(alg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EfaSpec {
    /// `unary`, `binary` or `empty`.
    Singleton { enumerator: String },
    EpMutated {
        #[serde(default = "default_ep_alphabet")]
        alphabet: String,
        #[serde(default = "default_ep_states")]
        states: usize,
        seed: Option<u64>,
        #[serde(default)]
        mutation: EpMutation,
    },
    /// Automaton description files, one per level.
    Explicit { levels: Vec<String> },
}

fn default_ep_alphabet() -> String {
    "xy".into()
}

fn default_ep_states() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpMutation {
    pub add_state: f64,
    pub delete_state: f64,
    pub retarget: f64,
    pub flip_accepting: f64,
    pub max_states: usize,
}

impl Default for EpMutation {
    /// The defaults never create an accepting state.
    fn default() -> Self {
        let base = FsmMutationConfig::default();
        Self {
            add_state: base.add_state,
            delete_state: base.delete_state,
            retarget: base.retarget,
            flip_accepting: 0.0,
            max_states: base.max_states,
        }
    }
}

impl From<EpMutation> for FsmMutationConfig {
    fn from(m: EpMutation) -> Self {
        FsmMutationConfig {
            add_state: m.add_state,
            delete_state: m.delete_state,
            retarget: m.retarget,
            flip_accepting: m.flip_accepting,
            max_states: m.max_states,
        }
    }
}

/// A DFA with `states` states, none accepting, where every state moves to
/// its successor modulo `states`.
pub fn rejecting_cycle(alphabet: &Alphabet, states: usize) -> Result<FiniteAutomaton, CliError> {
    if states == 0 {
        return Err(CliError::Usage(
            "ep-mutated automata need at least one state".into(),
        ));
    }
    let mut b = FiniteAutomaton::builder(alphabet.clone());
    let ids = b.add_states(states);
    b.start(ids[0]);
    for (i, &s) in ids.iter().enumerate() {
        for sym in alphabet.symbols() {
            b.transition(s, Some(sym), ids[(i + 1) % states]);
        }
    }
    b.build_dfa().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn ep_alphabet(spec: &str) -> Result<Alphabet, CliError> {
    alphabet(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = r#"
[ea_run]
population = 20
fitness = "onemax"
generations = 500
seed = 7

[ea_run.representation]
kind = "bitstring"
length = 8

[ea_run.selection]
kind = "truncation"
elitist = true

[[ea_run.variation]]
kind = "bit-flip"
p = 0.125
"#;

    #[test]
    fn parses_run_section() {
        let cfg: ExperimentConfig = toml::from_str(RUN).unwrap();
        let alg = cfg.ea_run.unwrap().algorithm().unwrap();
        assert_eq!(alg.generation_cap(), Some(500));
        assert_eq!(alg.population_size, 20);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[nfl]\nbogus = 1\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[mystery]\n").is_err());
        let bad = RUN.replace("p = 0.125", "p = 0.125\nq = 1");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
        let bad = RUN.replace("length = 8", "length = 8\nwidth = 2");
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn bad_probability_is_a_usage_error() {
        let cfg: ExperimentConfig = toml::from_str(&RUN.replace("p = 0.125", "p = 1.5")).unwrap();
        assert!(matches!(
            cfg.ea_run.unwrap().algorithm(),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn missing_cap_is_a_usage_error() {
        let cfg: ExperimentConfig = toml::from_str(&RUN.replace("generations = 500", "")).unwrap();
        assert!(matches!(
            cfg.ea_run.unwrap().algorithm(),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn digest_ignores_key_order_and_tracks_values() {
        let a: NflConfig = toml::from_str("problems = [[4, 2]]\nmin_algorithms = 3").unwrap();
        let b: NflConfig = toml::from_str("min_algorithms = 3\nproblems = [[4, 2]]").unwrap();
        let c: NflConfig = toml::from_str("min_algorithms = 2\nproblems = [[4, 2]]").unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_ne!(digest(&a), digest(&c));
        assert_eq!(digest(&a).len(), 16);
    }

    #[test]
    fn efa_sections() {
        let cfg: ExperimentConfig = toml::from_str(
            "[efa.bin]\nkind = \"singleton\"\nenumerator = \"binary\"\n[efa.evo]\nkind = \"ep-mutated\"\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.efa.len(), 2);
        assert!(matches!(
            cfg.efa["evo"],
            EfaSpec::EpMutated { states: 2, .. }
        ));
    }
}
