use std::sync::Arc;

use super::{Certificate, EfaError, EvolutionaryAutomaton, LevelGenerator, MutationRule};
use crate::automata::{Alphabet, FiniteAutomaton, LevelAutomaton, LevelClass, Symbol, Word};
use crate::ea::{mutate_fsm, FsmMutationConfig};

/// Level index to the single word that level accepts; `None` gives a
/// reject-all level.
pub type Enumerator = Arc<dyn Fn(usize) -> Option<Word> + Send + Sync>;

/// `s₀ⁿ s₁ⁿ … s_{k-1}ⁿ` for the alphabet's symbols in order.
fn blocks(alphabet: &Alphabet, n: usize) -> Word {
    alphabet
        .symbols()
        .flat_map(|s| std::iter::repeat_n(s, n))
        .collect()
}

/// Whether `w` has the shape `s₀ⁿ s₁ⁿ … s_{k-1}ⁿ`.
fn is_blocks(k: usize, w: &Word) -> bool {
    let len = w.len();
    if !len.is_multiple_of(k) {
        return false;
    }
    let n = len / k;
    w.symbols()
        .iter()
        .enumerate()
        .all(|(i, s)| *s == Symbol((i / n) as u16))
}

fn block_efa(name: &str, symbols: &str) -> EvolutionaryAutomaton {
    let alphabet = Alphabet::from_chars(symbols).expect("built-in alphabet");
    let k = alphabet.len();
    let rule_alphabet = alphabet.clone();
    EvolutionaryAutomaton::new(
        name,
        alphabet,
        LevelClass::Finite,
        LevelGenerator::indexed(move |t| {
            let fa = FiniteAutomaton::singleton(&rule_alphabet, &blocks(&rule_alphabet, t))?;
            Ok(LevelAutomaton::Finite(fa))
        }),
    )
    .with_certificate(move |w| is_blocks(k, w))
}

/// Level `t` is the minimal DFA for exactly `aᵗbᵗ`; the terminal language
/// is `{aⁿbⁿ | n ≥ 0}`.
pub fn make_anbn_efa() -> EvolutionaryAutomaton {
    block_efa("anbn", "ab")
}

/// Level `t` is the minimal DFA for exactly `aᵗbᵗcᵗ`.
pub fn make_anbncn_efa() -> EvolutionaryAutomaton {
    block_efa("anbncn", "abc")
}

/// Level `t` accepts exactly `enumerator(t)`, so the terminal language is
/// the enumerated set.
pub fn make_singleton_efa(
    name: impl Into<String>,
    alphabet: Alphabet,
    enumerator: Enumerator,
    certificate: Option<Arc<Certificate>>,
) -> EvolutionaryAutomaton {
    let rule_alphabet = alphabet.clone();
    let efa = EvolutionaryAutomaton::new(
        name,
        alphabet,
        LevelClass::Finite,
        LevelGenerator::indexed(move |t| {
            let fa = match enumerator(t) {
                Some(word) => FiniteAutomaton::singleton(&rule_alphabet, &word).map_err(|e| {
                    EfaError::Config(format!(
                        "enumerator produced an invalid word at level {t}: {e}"
                    ))
                })?,
                None => FiniteAutomaton::reject_all(&rule_alphabet),
            };
            Ok(LevelAutomaton::Finite(fa))
        }),
    );
    match certificate {
        Some(cert) => efa.with_certificate(move |w| cert(w)),
        None => efa,
    }
}

/// Levels evolve by EP-style FSM mutation from `initial`; the sequence is a
/// pure function of `seed`.
pub fn make_ep_mutated_efa(
    seed: u64,
    initial: FiniteAutomaton,
    config: FsmMutationConfig,
) -> Result<EvolutionaryAutomaton, EfaError> {
    config.validate()?;
    if !initial.is_deterministic() {
        return Err(EfaError::Config(
            "EP mutation starts from a deterministic automaton".into(),
        ));
    }
    let alphabet = initial.alphabet().clone();
    let rule =
        MutationRule::new(
            seed,
            LevelAutomaton::Finite(initial),
            move |level, rng| match level {
                LevelAutomaton::Finite(fa) => {
                    Ok(LevelAutomaton::Finite(mutate_fsm(fa, &config, rng)?))
                }
                other => Err(EfaError::WrongClass {
                    level: 0,
                    expected: LevelClass::Finite,
                    found: other.class(),
                }),
            },
        );
    Ok(EvolutionaryAutomaton::new(
        "ep-mutated",
        alphabet,
        LevelClass::Finite,
        LevelGenerator::MutationRule(rule),
    ))
}

/// Enumerators addressable by name, with their alphabets.
///
/// * `unary`: `t ↦ aᵗ` over `{a,b}`
/// * `binary`: `t ↦` binary numeral of `t` over `{0,1}`
/// * `empty`: no word at any level, over `{a,b}`
pub fn named_enumerator(name: &str) -> Option<(Alphabet, Enumerator)> {
    match name {
        "unary" => {
            let sig = Alphabet::from_chars("ab").expect("built-in alphabet");
            let a = sig.lookup("a")?;
            Some((sig, Arc::new(move |t| Some(Word(vec![a; t])))))
        }
        "binary" => {
            let sig = Alphabet::from_chars("01").expect("built-in alphabet");
            let enc = sig.clone();
            Some((
                sig,
                Arc::new(move |t| enc.parse_word(&format!("{t:b}")).ok()),
            ))
        }
        "empty" => {
            let sig = Alphabet::from_chars("ab").expect("built-in alphabet");
            Some((sig, Arc::new(|_| None)))
        }
        _ => None,
    }
}
