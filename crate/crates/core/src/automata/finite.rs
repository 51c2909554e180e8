use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{Alphabet, AutomatonError, RunVerdict, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

type Transitions = BTreeMap<(StateId, Option<Symbol>), BTreeSet<StateId>>;

/// A DFA or NFA. `None` symbols on transitions are ε-moves (NFA only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAutomaton {
    alphabet: Alphabet,
    state_names: Vec<String>,
    start: StateId,
    accepting: BTreeSet<StateId>,
    transitions: Transitions,
    deterministic: bool,
}

#[derive(Debug, Clone)]
pub struct FaBuilder {
    alphabet: Alphabet,
    state_names: Vec<String>,
    start: Option<StateId>,
    accepting: BTreeSet<StateId>,
    transitions: Transitions,
}

impl FaBuilder {
    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        StateId(self.state_names.len() - 1)
    }

    pub fn add_states(&mut self, n: usize) -> Vec<StateId> {
        (0..n)
            .map(|_| {
                let name = format!("q{}", self.state_names.len());
                self.add_state(name)
            })
            .collect()
    }

    pub fn start(&mut self, s: StateId) -> &mut Self {
        self.start = Some(s);
        self
    }

    pub fn accept(&mut self, s: StateId) -> &mut Self {
        self.accepting.insert(s);
        self
    }

    pub fn transition(&mut self, from: StateId, symbol: Option<Symbol>, to: StateId) -> &mut Self {
        self.transitions
            .entry((from, symbol))
            .or_default()
            .insert(to);
        self
    }

    pub fn build_dfa(self) -> Result<FiniteAutomaton, AutomatonError> {
        self.build(true)
    }

    pub fn build_nfa(self) -> Result<FiniteAutomaton, AutomatonError> {
        self.build(false)
    }

    pub fn build(self, deterministic: bool) -> Result<FiniteAutomaton, AutomatonError> {
        let start = self
            .start
            .ok_or_else(|| AutomatonError::Config("no start state declared".into()))?;
        let fa = FiniteAutomaton {
            alphabet: self.alphabet,
            state_names: self.state_names,
            start,
            accepting: self.accepting,
            transitions: self.transitions,
            deterministic,
        };
        fa.validate()?;
        Ok(fa)
    }
}

impl FiniteAutomaton {
    pub fn builder(alphabet: Alphabet) -> FaBuilder {
        FaBuilder {
            alphabet,
            state_names: Vec::new(),
            start: None,
            accepting: BTreeSet::new(),
            transitions: BTreeMap::new(),
        }
    }

    fn validate(&self) -> Result<(), AutomatonError> {
        let n = self.state_names.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        let check = |s: StateId| {
            if s.0 < n {
                Ok(())
            } else {
                Err(AutomatonError::UnknownState(s.0))
            }
        };
        check(self.start)?;
        self.accepting.iter().copied().try_for_each(check)?;
        for ((from, sym), targets) in &self.transitions {
            check(*from)?;
            if let Some(sym) = sym {
                if !self.alphabet.contains(*sym) {
                    return Err(AutomatonError::UnknownSymbol(format!("#{}", sym.0)));
                }
            }
            targets.iter().copied().try_for_each(check)?;
        }
        if self.deterministic {
            for s in 0..n {
                if self.transitions.contains_key(&(StateId(s), None)) {
                    return Err(AutomatonError::NotDeterministic(format!(
                        "ε-move from {}",
                        self.state_names[s]
                    )));
                }
                for sym in self.alphabet.symbols() {
                    let count = self
                        .transitions
                        .get(&(StateId(s), Some(sym)))
                        .map_or(0, BTreeSet::len);
                    if count != 1 {
                        return Err(AutomatonError::NotDeterministic(format!(
                            "state {} has {count} moves on {}",
                            self.state_names[s],
                            self.alphabet.name(sym)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The minimal complete DFA accepting exactly `word`.
    pub fn singleton(alphabet: &Alphabet, word: &Word) -> Result<Self, AutomatonError> {
        alphabet.check_word(word)?;
        let mut b = Self::builder(alphabet.clone());
        let chain = b.add_states(word.len() + 1);
        let dead = b.add_state("dead");
        b.start(chain[0]).accept(chain[word.len()]);
        for (i, &expected) in word.symbols().iter().enumerate() {
            for sym in alphabet.symbols() {
                let to = if sym == expected { chain[i + 1] } else { dead };
                b.transition(chain[i], Some(sym), to);
            }
        }
        for sym in alphabet.symbols() {
            b.transition(chain[word.len()], Some(sym), dead);
            b.transition(dead, Some(sym), dead);
        }
        b.build_dfa()
    }

    /// One-state DFA with an empty language.
    pub fn reject_all(alphabet: &Alphabet) -> Self {
        let mut b = Self::builder(alphabet.clone());
        let q = b.add_state("q0");
        b.start(q);
        for sym in alphabet.symbols() {
            b.transition(q, Some(sym), q);
        }
        b.build_dfa().expect("reject-all automaton is well formed")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting.contains(&s)
    }

    pub fn accepting(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting.iter().copied()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Option<Symbol>, StateId)> + '_ {
        self.transitions
            .iter()
            .flat_map(|(&(from, sym), to)| to.iter().map(move |&t| (from, sym, t)))
    }

    /// Target of a deterministic move. `None` for NFAs without exactly one target.
    pub fn next_state(&self, s: StateId, sym: Symbol) -> Option<StateId> {
        let targets = self.transitions.get(&(s, Some(sym)))?;
        if targets.len() == 1 {
            targets.iter().next().copied()
        } else {
            None
        }
    }

    fn epsilon_closure(&self, set: &mut BTreeSet<StateId>) {
        let mut stack: Vec<StateId> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            if let Some(targets) = self.transitions.get(&(s, None)) {
                for &t in targets {
                    if set.insert(t) {
                        stack.push(t);
                    }
                }
            }
        }
    }

    fn step_set(&self, set: &BTreeSet<StateId>, sym: Symbol) -> BTreeSet<StateId> {
        let mut next = BTreeSet::new();
        for &s in set {
            if let Some(targets) = self.transitions.get(&(s, Some(sym))) {
                next.extend(targets.iter().copied());
            }
        }
        self.epsilon_closure(&mut next);
        next
    }

    /// Runs the automaton on `word`. Never returns `Unknown`; steps equal the
    /// number of symbols consumed.
    pub fn run(&self, word: &Word) -> Result<RunVerdict, AutomatonError> {
        self.alphabet.check_word(word)?;
        let steps = word.len() as u64;
        let accepted = if self.deterministic {
            let mut s = self.start;
            for &sym in word.symbols() {
                s = self.next_state(s, sym).expect("validated DFA is total");
            }
            self.is_accepting(s)
        } else {
            let mut current = BTreeSet::from([self.start]);
            self.epsilon_closure(&mut current);
            for &sym in word.symbols() {
                current = self.step_set(&current, sym);
                if current.is_empty() {
                    break;
                }
            }
            current.iter().any(|s| self.is_accepting(*s))
        };
        Ok(if accepted {
            RunVerdict::accepted(steps)
        } else {
            RunVerdict::rejected(steps)
        })
    }

    /// Subset construction. The result is a complete DFA over the same
    /// alphabet; the empty subset becomes an explicit dead state when reachable.
    pub fn determinize(&self) -> FiniteAutomaton {
        let mut start = BTreeSet::from([self.start]);
        self.epsilon_closure(&mut start);

        let mut index: HashMap<BTreeSet<StateId>, StateId> = HashMap::new();
        let mut subsets: Vec<BTreeSet<StateId>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut b = Self::builder(self.alphabet.clone());

        let name_of = |set: &BTreeSet<StateId>| {
            let parts: Vec<&str> = set.iter().map(|s| self.state_name(*s)).collect();
            format!("{{{}}}", parts.join(","))
        };

        let s0 = b.add_state(name_of(&start));
        index.insert(start.clone(), s0);
        subsets.push(start.clone());
        queue.push_back(s0);
        b.start(s0);

        while let Some(id) = queue.pop_front() {
            let set = subsets[id.0].clone();
            if set.iter().any(|s| self.is_accepting(*s)) {
                b.accept(id);
            }
            for sym in self.alphabet.symbols() {
                let next = self.step_set(&set, sym);
                let target = match index.get(&next) {
                    Some(&t) => t,
                    None => {
                        let t = b.add_state(name_of(&next));
                        index.insert(next.clone(), t);
                        subsets.push(next);
                        queue.push_back(t);
                        t
                    }
                };
                b.transition(id, Some(sym), target);
            }
        }
        b.build_dfa()
            .expect("subset construction yields a complete DFA")
    }

    // Structural edits used by EP-style mutation. All of them preserve
    // well-formedness and, for DFAs, totality.

    /// Appends a state whose outgoing moves are given per alphabet symbol.
    pub fn add_state(
        &mut self,
        accepting: bool,
        targets: &[StateId],
    ) -> Result<StateId, AutomatonError> {
        if targets.len() != self.alphabet.len() {
            return Err(AutomatonError::Config(format!(
                "new state needs {} targets, got {}",
                self.alphabet.len(),
                targets.len()
            )));
        }
        let id = StateId(self.state_names.len());
        if let Some(bad) = targets.iter().find(|t| t.0 > id.0) {
            return Err(AutomatonError::UnknownState(bad.0));
        }
        self.state_names.push(format!("q{}", id.0));
        if accepting {
            self.accepting.insert(id);
        }
        for (sym, &t) in self.alphabet.symbols().zip(targets) {
            self.transitions
                .entry((id, Some(sym)))
                .or_default()
                .insert(t);
        }
        Ok(id)
    }

    /// Removes `victim`, redirecting its incoming moves (and the start
    /// marker, if needed) to `redirect`. Fails when only one state remains.
    pub fn remove_state(
        &mut self,
        victim: StateId,
        redirect: StateId,
    ) -> Result<(), AutomatonError> {
        let n = self.num_states();
        if n <= 1 {
            return Err(AutomatonError::NoStates);
        }
        if victim.0 >= n {
            return Err(AutomatonError::UnknownState(victim.0));
        }
        if redirect.0 >= n || redirect == victim {
            return Err(AutomatonError::Config(
                "redirect target must be another existing state".into(),
            ));
        }
        let remap = |s: StateId| {
            let s = if s == victim { redirect } else { s };
            if s.0 > victim.0 {
                StateId(s.0 - 1)
            } else {
                s
            }
        };
        let mut transitions = Transitions::new();
        for ((from, sym), targets) in std::mem::take(&mut self.transitions) {
            if from == victim {
                continue;
            }
            transitions
                .entry((remap(from), sym))
                .or_default()
                .extend(targets.into_iter().map(remap));
        }
        self.transitions = transitions;
        self.accepting = self
            .accepting
            .iter()
            .filter(|&&s| s != victim)
            .map(|&s| remap(s))
            .collect();
        self.start = remap(self.start);
        self.state_names.remove(victim.0);
        Ok(())
    }

    /// Replaces every move of `from` on `sym` with a single move to `to`.
    pub fn set_transition(
        &mut self,
        from: StateId,
        sym: Symbol,
        to: StateId,
    ) -> Result<(), AutomatonError> {
        let n = self.num_states();
        for s in [from, to] {
            if s.0 >= n {
                return Err(AutomatonError::UnknownState(s.0));
            }
        }
        if !self.alphabet.contains(sym) {
            return Err(AutomatonError::UnknownSymbol(format!("#{}", sym.0)));
        }
        self.transitions
            .insert((from, Some(sym)), BTreeSet::from([to]));
        Ok(())
    }

    pub fn toggle_accepting(&mut self, s: StateId) -> Result<(), AutomatonError> {
        if s.0 >= self.num_states() {
            return Err(AutomatonError::UnknownState(s.0));
        }
        if !self.accepting.remove(&s) {
            self.accepting.insert(s);
        }
        Ok(())
    }

    /// Compact one-line rendering, e.g. `n=2;start=0;acc=1;0a1|0b0|...`.
    pub fn describe(&self) -> String {
        let acc: Vec<String> = self.accepting.iter().map(|s| s.0.to_string()).collect();
        let moves: Vec<String> = self
            .transitions()
            .map(|(from, sym, to)| {
                let sym = sym.map_or("ε", |s| self.alphabet.name(s));
                format!("{}{}{}", from.0, sym, to.0)
            })
            .collect();
        format!(
            "n={};start={};acc={};{}",
            self.num_states(),
            self.start.0,
            acc.join("/"),
            moves.join("|")
        )
    }
}
