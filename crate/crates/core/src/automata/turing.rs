use std::collections::{BTreeMap, BTreeSet};

use super::{Alphabet, AutomatonError, RunVerdict, StateId, StepBudget, Word};

/// Tape symbol index. Indices below the input alphabet size coincide with
/// the input symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TapeSymbol(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadMove {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TmAction {
    pub to: StateId,
    pub write: TapeSymbol,
    pub head: HeadMove,
}

/// Deterministic single-tape machine on a one-way infinite tape.
///
/// A left move on cell 0 leaves the head in place. Reaching a state with no
/// move for the scanned symbol halts and rejects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    input: Alphabet,
    tape_symbols: Vec<String>,
    blank: TapeSymbol,
    state_names: Vec<String>,
    start: StateId,
    accepting: BTreeSet<StateId>,
    rejecting: BTreeSet<StateId>,
    transitions: BTreeMap<(StateId, TapeSymbol), TmAction>,
    output_cell: usize,
    output_accept: Option<TapeSymbol>,
}

#[derive(Debug, Clone)]
pub struct TmBuilder {
    input: Alphabet,
    tape_symbols: Vec<String>,
    blank: Option<TapeSymbol>,
    state_names: Vec<String>,
    start: Option<StateId>,
    accepting: BTreeSet<StateId>,
    rejecting: BTreeSet<StateId>,
    transitions: BTreeMap<(StateId, TapeSymbol), TmAction>,
    output_cell: usize,
    output_accept: Option<TapeSymbol>,
}

impl TmBuilder {
    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        StateId(self.state_names.len() - 1)
    }

    /// Adds a work symbol, or returns the existing index for a known name.
    pub fn tape_symbol(&mut self, name: &str) -> TapeSymbol {
        match self.tape_symbols.iter().position(|s| s == name) {
            Some(i) => TapeSymbol(i as u16),
            None => {
                self.tape_symbols.push(name.to_string());
                TapeSymbol((self.tape_symbols.len() - 1) as u16)
            }
        }
    }

    pub fn blank(&mut self, name: &str) -> TapeSymbol {
        let b = self.tape_symbol(name);
        self.blank = Some(b);
        b
    }

    pub fn start(&mut self, s: StateId) -> &mut Self {
        self.start = Some(s);
        self
    }

    pub fn accept(&mut self, s: StateId) -> &mut Self {
        self.accepting.insert(s);
        self
    }

    pub fn reject(&mut self, s: StateId) -> &mut Self {
        self.rejecting.insert(s);
        self
    }

    /// Cell whose content is the result in inductive mode, and the symbol
    /// that reads as acceptance.
    pub fn output(&mut self, cell: usize, accept_symbol: TapeSymbol) -> &mut Self {
        self.output_cell = cell;
        self.output_accept = Some(accept_symbol);
        self
    }

    pub fn transition(
        &mut self,
        from: StateId,
        read: TapeSymbol,
        to: StateId,
        write: TapeSymbol,
        head: HeadMove,
    ) -> &mut Self {
        self.transitions
            .insert((from, read), TmAction { to, write, head });
        self
    }

    pub fn build(self) -> Result<TuringMachine, AutomatonError> {
        let start = self
            .start
            .ok_or_else(|| AutomatonError::Config("no start state declared".into()))?;
        let blank = self
            .blank
            .ok_or_else(|| AutomatonError::Config("no blank symbol declared".into()))?;
        let m = TuringMachine {
            input: self.input,
            tape_symbols: self.tape_symbols,
            blank,
            state_names: self.state_names,
            start,
            accepting: self.accepting,
            rejecting: self.rejecting,
            transitions: self.transitions,
            output_cell: self.output_cell,
            output_accept: self.output_accept,
        };
        m.validate()?;
        Ok(m)
    }
}

impl TuringMachine {
    pub fn builder(input: Alphabet) -> TmBuilder {
        let tape_symbols = input.symbols().map(|s| input.name(s).to_string()).collect();
        TmBuilder {
            input,
            tape_symbols,
            blank: None,
            state_names: Vec::new(),
            start: None,
            accepting: BTreeSet::new(),
            rejecting: BTreeSet::new(),
            transitions: BTreeMap::new(),
            output_cell: 0,
            output_accept: None,
        }
    }

    fn validate(&self) -> Result<(), AutomatonError> {
        let n = self.state_names.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        if (self.blank.0 as usize) < self.input.len() {
            return Err(AutomatonError::Config(
                "blank must not be an input symbol".into(),
            ));
        }
        if let Some(s) = self.accepting.intersection(&self.rejecting).next() {
            return Err(AutomatonError::Config(format!(
                "state {} is both accepting and rejecting",
                self.state_names[s.0]
            )));
        }
        let state = |s: StateId| {
            if s.0 < n {
                Ok(())
            } else {
                Err(AutomatonError::UnknownState(s.0))
            }
        };
        let tape = |t: TapeSymbol| {
            if (t.0 as usize) < self.tape_symbols.len() {
                Ok(())
            } else {
                Err(AutomatonError::Config(format!(
                    "unknown tape symbol #{}",
                    t.0
                )))
            }
        };
        state(self.start)?;
        self.accepting
            .iter()
            .chain(&self.rejecting)
            .copied()
            .try_for_each(state)?;
        for (&(from, read), action) in &self.transitions {
            state(from)?;
            state(action.to)?;
            tape(read)?;
            tape(action.write)?;
        }
        if let Some(t) = self.output_accept {
            tape(t)?;
        }
        Ok(())
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn tape_symbol(&self, name: &str) -> Option<TapeSymbol> {
        self.tape_symbols
            .iter()
            .position(|s| s == name)
            .map(|i| TapeSymbol(i as u16))
    }

    fn load(&self, word: &Word) -> Result<Vec<TapeSymbol>, AutomatonError> {
        self.input.check_word(word)?;
        Ok(word.symbols().iter().map(|s| TapeSymbol(s.0)).collect())
    }

    fn halted(&self, state: StateId, steps: u64) -> Option<RunVerdict> {
        if self.accepting.contains(&state) {
            Some(RunVerdict::accepted(steps))
        } else if self.rejecting.contains(&state) {
            Some(RunVerdict::rejected(steps))
        } else {
            None
        }
    }

    /// Executes one move; `None` when no move exists (halt and reject).
    fn step(
        &self,
        tape: &mut Vec<TapeSymbol>,
        head: &mut usize,
        state: &mut StateId,
    ) -> Option<()> {
        let read = tape.get(*head).copied().unwrap_or(self.blank);
        let action = self.transitions.get(&(*state, read))?;
        if *head >= tape.len() {
            tape.resize(*head + 1, self.blank);
        }
        tape[*head] = action.write;
        match action.head {
            HeadMove::Left => *head = head.saturating_sub(1),
            HeadMove::Right => *head += 1,
        }
        *state = action.to;
        Some(())
    }

    /// Recursive-mode run: the verdict is the halting state.
    pub fn run(&self, word: &Word, budget: StepBudget) -> Result<RunVerdict, AutomatonError> {
        let mut tape = self.load(word)?;
        let (mut head, mut state, mut steps) = (0usize, self.start, 0u64);
        loop {
            if let Some(v) = self.halted(state, steps) {
                return Ok(v);
            }
            if steps == budget.max_steps() {
                return Ok(RunVerdict::unknown(steps));
            }
            if self.step(&mut tape, &mut head, &mut state).is_none() {
                return Ok(RunVerdict::rejected(steps));
            }
            steps += 1;
        }
    }

    /// Finite surrogate of inductive-mode computation.
    ///
    /// A machine that halts answers as in [`TuringMachine::run`]. Otherwise
    /// the result is read from the output cell once that cell has kept its
    /// content for `stability_window` consecutive steps: the designated
    /// accept symbol means `Accepted`, anything else `Rejected`.
    pub fn run_inductive(
        &self,
        word: &Word,
        budget: StepBudget,
        stability_window: u64,
    ) -> Result<RunVerdict, AutomatonError> {
        if stability_window == 0 {
            return Err(AutomatonError::Config(
                "stability window must be at least 1".into(),
            ));
        }
        let accept_symbol = self.output_accept.ok_or_else(|| {
            AutomatonError::Config("machine has no designated output symbol".into())
        })?;
        let mut tape = self.load(word)?;
        let read_output =
            |tape: &[TapeSymbol]| tape.get(self.output_cell).copied().unwrap_or(self.blank);
        let (mut head, mut state, mut steps, mut last_change) = (0usize, self.start, 0u64, 0u64);
        let mut output = read_output(&tape);
        loop {
            if let Some(v) = self.halted(state, steps) {
                return Ok(v);
            }
            if steps - last_change >= stability_window {
                return Ok(if output == accept_symbol {
                    RunVerdict::accepted(steps)
                } else {
                    RunVerdict::rejected(steps)
                });
            }
            if steps == budget.max_steps() {
                return Ok(RunVerdict::unknown(steps));
            }
            if self.step(&mut tape, &mut head, &mut state).is_none() {
                return Ok(RunVerdict::rejected(steps));
            }
            steps += 1;
            let now = read_output(&tape);
            if now != output {
                output = now;
                last_change = steps;
            }
        }
    }
}
