use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::{Alphabet, AutomatonError, RunVerdict, StateId, StepBudget, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StackSymbol(pub u16);

/// Target of a PDA move. `push` replaces the popped top; its first element
/// becomes the new top.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PdaTransition {
    pub to: StateId,
    pub push: Vec<StackSymbol>,
}

type Key = (StateId, Option<Symbol>, StackSymbol);

/// Nondeterministic pushdown automaton accepting by final state once the
/// whole input has been consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownAutomaton {
    alphabet: Alphabet,
    state_names: Vec<String>,
    start: StateId,
    accepting: BTreeSet<StateId>,
    stack_symbols: Vec<String>,
    initial_stack: StackSymbol,
    transitions: BTreeMap<Key, BTreeSet<PdaTransition>>,
}

#[derive(Debug, Clone)]
pub struct PdaBuilder {
    alphabet: Alphabet,
    state_names: Vec<String>,
    start: Option<StateId>,
    accepting: BTreeSet<StateId>,
    stack_symbols: Vec<String>,
    initial_stack: Option<StackSymbol>,
    transitions: BTreeMap<Key, BTreeSet<PdaTransition>>,
}

impl PdaBuilder {
    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        StateId(self.state_names.len() - 1)
    }

    pub fn add_stack_symbol(&mut self, name: impl Into<String>) -> StackSymbol {
        self.stack_symbols.push(name.into());
        StackSymbol((self.stack_symbols.len() - 1) as u16)
    }

    pub fn start(&mut self, s: StateId) -> &mut Self {
        self.start = Some(s);
        self
    }

    pub fn accept(&mut self, s: StateId) -> &mut Self {
        self.accepting.insert(s);
        self
    }

    pub fn initial_stack(&mut self, z: StackSymbol) -> &mut Self {
        self.initial_stack = Some(z);
        self
    }

    pub fn transition(
        &mut self,
        from: StateId,
        input: Option<Symbol>,
        top: StackSymbol,
        to: StateId,
        push: Vec<StackSymbol>,
    ) -> &mut Self {
        self.transitions
            .entry((from, input, top))
            .or_default()
            .insert(PdaTransition { to, push });
        self
    }

    pub fn build(self) -> Result<PushdownAutomaton, AutomatonError> {
        let start = self
            .start
            .ok_or_else(|| AutomatonError::Config("no start state declared".into()))?;
        let initial_stack = self
            .initial_stack
            .ok_or_else(|| AutomatonError::Config("no initial stack symbol declared".into()))?;
        let pda = PushdownAutomaton {
            alphabet: self.alphabet,
            state_names: self.state_names,
            start,
            accepting: self.accepting,
            stack_symbols: self.stack_symbols,
            initial_stack,
            transitions: self.transitions,
        };
        pda.validate()?;
        Ok(pda)
    }
}

impl PushdownAutomaton {
    pub fn builder(alphabet: Alphabet) -> PdaBuilder {
        PdaBuilder {
            alphabet,
            state_names: Vec::new(),
            start: None,
            accepting: BTreeSet::new(),
            stack_symbols: Vec::new(),
            initial_stack: None,
            transitions: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), AutomatonError> {
        let n = self.state_names.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        let state = |s: StateId| {
            if s.0 < n {
                Ok(())
            } else {
                Err(AutomatonError::UnknownState(s.0))
            }
        };
        let stack = |z: StackSymbol| {
            if (z.0 as usize) < self.stack_symbols.len() {
                Ok(())
            } else {
                Err(AutomatonError::UnknownStackSymbol(format!("#{}", z.0)))
            }
        };
        state(self.start)?;
        stack(self.initial_stack)?;
        self.accepting.iter().copied().try_for_each(state)?;
        for ((from, input, top), moves) in &self.transitions {
            state(*from)?;
            stack(*top)?;
            if let Some(sym) = input {
                if !self.alphabet.contains(*sym) {
                    return Err(AutomatonError::UnknownSymbol(format!("#{}", sym.0)));
                }
            }
            for m in moves {
                state(m.to)?;
                m.push.iter().copied().try_for_each(stack)?;
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn stack_symbol(&self, name: &str) -> Option<StackSymbol> {
        self.stack_symbols
            .iter()
            .position(|s| s == name)
            .map(|i| StackSymbol(i as u16))
    }

    /// Breadth-first search over configurations `(state, position, stack)`.
    ///
    /// Each expanded configuration costs one step. A configuration that has
    /// consumed the whole input in an accepting state accepts; running out
    /// of budget with a non-empty frontier yields `Unknown`.
    pub fn run(&self, word: &Word, budget: StepBudget) -> Result<RunVerdict, AutomatonError> {
        self.alphabet.check_word(word)?;
        let input = word.symbols();
        let initial = (self.start, 0usize, vec![self.initial_stack]);
        let mut seen: HashSet<(StateId, usize, Vec<StackSymbol>)> = HashSet::new();
        let mut frontier = VecDeque::new();
        seen.insert(initial.clone());
        frontier.push_back(initial);
        let mut steps = 0u64;

        while let Some((state, pos, stack)) = frontier.pop_front() {
            if pos == input.len() && self.accepting.contains(&state) {
                return Ok(RunVerdict::accepted(steps));
            }
            if steps == budget.max_steps() {
                return Ok(RunVerdict::unknown(steps));
            }
            steps += 1;
            let Some(&top) = stack.last() else { continue };
            let mut keys = vec![(None, pos)];
            if let Some(&sym) = input.get(pos) {
                keys.push((Some(sym), pos + 1));
            }
            for (label, next_pos) in keys {
                let Some(moves) = self.transitions.get(&(state, label, top)) else {
                    continue;
                };
                for m in moves {
                    let mut next_stack = stack[..stack.len() - 1].to_vec();
                    next_stack.extend(m.push.iter().rev().copied());
                    let config = (m.to, next_pos, next_stack);
                    if seen.insert(config.clone()) {
                        frontier.push_back(config);
                    }
                }
            }
        }
        Ok(RunVerdict::rejected(steps))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::automata::Outcome;

    /// {aⁿbⁿ | n ≥ 0} by final state.
    pub(crate) fn anbn_pda() -> PushdownAutomaton {
        let sig = Alphabet::from_chars("ab").unwrap();
        let (a, b) = (sig.lookup("a"), sig.lookup("b"));
        let mut p = PushdownAutomaton::builder(sig);
        let q0 = p.add_state("q0");
        let q1 = p.add_state("q1");
        let q2 = p.add_state("q2");
        let q3 = p.add_state("q3");
        let z = p.add_stack_symbol("Z");
        let x = p.add_stack_symbol("A");
        p.start(q0).accept(q0).accept(q3).initial_stack(z);
        p.transition(q0, a, z, q1, vec![x, z])
            .transition(q1, a, x, q1, vec![x, x])
            .transition(q1, b, x, q2, vec![])
            .transition(q2, b, x, q2, vec![])
            .transition(q2, None, z, q3, vec![z]);
        p.build().unwrap()
    }

    fn budget() -> StepBudget {
        StepBudget::new(10_000).unwrap()
    }

    #[test]
    fn anbn_examples() {
        let pda = anbn_pda();
        let sig = pda.alphabet().clone();
        let run = |s: &str| {
            pda.run(&sig.parse_word(s).unwrap(), budget())
                .unwrap()
                .outcome
        };
        assert_eq!(run("aabb"), Outcome::Accepted);
        assert_eq!(run("aab"), Outcome::Rejected);
        assert_eq!(run(""), Outcome::Accepted);
        assert_eq!(run("abab"), Outcome::Rejected);
    }

    #[test]
    fn aabb_trace_uses_five_expansions() {
        // q0,Z -a-> q1,AZ -a-> q1,AAZ -b-> q2,AZ -b-> q2,Z -ε-> q3,Z
        let pda = anbn_pda();
        let w = pda.alphabet().parse_word("aabb").unwrap();
        let v = pda.run(&w, budget()).unwrap();
        assert_eq!(v, RunVerdict::accepted(5));
        assert_eq!(
            pda.run(&w, StepBudget::new(4).unwrap()).unwrap().outcome,
            Outcome::Unknown
        );
    }

    #[test]
    fn unbounded_epsilon_pushes_end_unknown() {
        let sig = Alphabet::from_chars("a").unwrap();
        let mut p = PushdownAutomaton::builder(sig);
        let q = p.add_state("q");
        let z = p.add_stack_symbol("Z");
        p.start(q)
            .initial_stack(z)
            .transition(q, None, z, q, vec![z, z]);
        let pda = p.build().unwrap();
        let w = Word(vec![Symbol(0)]);
        let v = pda.run(&w, StepBudget::new(50).unwrap()).unwrap();
        assert_eq!(v, RunVerdict::unknown(50));
    }

    #[test]
    fn unknown_push_symbol_is_config_error() {
        let sig = Alphabet::from_chars("a").unwrap();
        let mut p = PushdownAutomaton::builder(sig);
        let q = p.add_state("q");
        let z = p.add_stack_symbol("Z");
        p.start(q)
            .initial_stack(z)
            .transition(q, None, z, q, vec![StackSymbol(9)]);
        assert!(matches!(
            p.build(),
            Err(AutomatonError::UnknownStackSymbol(_))
        ));
    }
}
