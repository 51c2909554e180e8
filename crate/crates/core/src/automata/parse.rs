//! Plain-text automaton descriptions.
//!
//! One declaration per line, `#` starts a comment:
//!
//! ```text
//! kind nfa                     # dfa | nfa | pda | tm
//! alphabet a b
//! state q0 q1 q2
//! start q0
//! accept q2
//! trans q0 a q0                # finite automata; `eps` labels an ε-move
//! trans q0 a q1
//! ```
//!
//! Pushdown automata add `stack Z A`, `stack-start Z` and write moves as
//! `trans <from> <symbol|eps> <to> top <Z> [push <sym>...]`.
//! Turing machines add `tape X Y`, `blank _`, `reject q`, optionally
//! `output <cell> <symbol>`, and write moves as
//! `trans <from> <read> <to> <write> <L|R>`.

use std::collections::HashMap;

use thiserror::Error;

use super::{
    Alphabet, AutomatonError, FiniteAutomaton, HeadMove, LevelAutomaton, PushdownAutomaton,
    StateId, TuringMachine,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Dfa,
    Nfa,
    Pda,
    Tm,
}

#[derive(Debug)]
struct Move {
    line: usize,
    fields: Vec<String>,
}

#[derive(Debug, Default)]
struct Description {
    kind: Option<Kind>,
    alphabet: Option<(usize, Vec<String>)>,
    states: Vec<String>,
    start: Option<(usize, String)>,
    accept: Vec<(usize, String)>,
    reject: Vec<(usize, String)>,
    stack: Vec<String>,
    stack_start: Option<(usize, String)>,
    tape: Vec<String>,
    blank: Option<(usize, String)>,
    output: Option<(usize, usize, String)>,
    moves: Vec<Move>,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Parses a description into a level automaton.
pub fn parse_automaton(text: &str) -> Result<LevelAutomaton, ParseError> {
    let mut d = Description::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        let args: Vec<String> = words.map(String::from).collect();
        let one = |what: &str| -> Result<String, ParseError> {
            match args.as_slice() {
                [x] => Ok(x.clone()),
                _ => Err(err(line, format!("`{keyword}` takes exactly one {what}"))),
            }
        };
        let some = |what: &str| -> Result<Vec<String>, ParseError> {
            if args.is_empty() {
                Err(err(line, format!("`{keyword}` needs at least one {what}")))
            } else {
                Ok(args.clone())
            }
        };
        match keyword {
            "kind" => {
                let k = match one("kind")?.as_str() {
                    "dfa" => Kind::Dfa,
                    "nfa" => Kind::Nfa,
                    "pda" => Kind::Pda,
                    "tm" => Kind::Tm,
                    other => return Err(err(line, format!("unknown kind `{other}`"))),
                };
                if d.kind.replace(k).is_some() {
                    return Err(err(line, "duplicate `kind`"));
                }
            }
            "alphabet" => {
                if d.alphabet.replace((line, some("symbol")?)).is_some() {
                    return Err(err(line, "duplicate `alphabet`"));
                }
            }
            "state" => {
                for s in some("state name")? {
                    if d.states.contains(&s) {
                        return Err(err(line, format!("duplicate state `{s}`")));
                    }
                    d.states.push(s);
                }
            }
            "start" => {
                if d.start.replace((line, one("state")?)).is_some() {
                    return Err(err(line, "duplicate `start`"));
                }
            }
            "accept" => d
                .accept
                .extend(some("state")?.into_iter().map(|s| (line, s))),
            "reject" => d
                .reject
                .extend(some("state")?.into_iter().map(|s| (line, s))),
            "stack" => d.stack.extend(some("stack symbol")?),
            "stack-start" => d.stack_start = Some((line, one("stack symbol")?)),
            "tape" => d.tape.extend(some("tape symbol")?),
            "blank" => d.blank = Some((line, one("symbol")?)),
            "output" => match args.as_slice() {
                [cell, sym] => {
                    let cell = cell
                        .parse()
                        .map_err(|_| err(line, format!("bad output cell `{cell}`")))?;
                    d.output = Some((line, cell, sym.clone()));
                }
                _ => return Err(err(line, "`output` takes a cell index and a symbol")),
            },
            "trans" => d.moves.push(Move { line, fields: args }),
            other => return Err(err(line, format!("unknown declaration `{other}`"))),
        }
    }
    d.build()
}

impl Description {
    fn build(self) -> Result<LevelAutomaton, ParseError> {
        let kind = self
            .kind
            .ok_or_else(|| err(1, "missing `kind` declaration"))?;
        let (alpha_line, symbols) = self
            .alphabet
            .clone()
            .ok_or_else(|| err(1, "missing `alphabet` declaration"))?;
        let alphabet = Alphabet::new(symbols).map_err(|e| err(alpha_line, e.to_string()))?;
        if self.states.is_empty() {
            return Err(err(1, "no states declared"));
        }
        let state_ids: HashMap<&str, StateId> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), StateId(i)))
            .collect();
        let state = |line: usize, name: &str| {
            state_ids
                .get(name)
                .copied()
                .ok_or_else(|| err(line, format!("undeclared state `{name}`")))
        };
        let (start_line, start_name) = self
            .start
            .clone()
            .ok_or_else(|| err(1, "missing `start` declaration"))?;
        let start = state(start_line, &start_name)?;
        let symbol = |line: usize, tok: &str| {
            if tok == "eps" {
                Ok(None)
            } else {
                alphabet
                    .lookup(tok)
                    .map(Some)
                    .ok_or_else(|| err(line, format!("symbol `{tok}` is not in the alphabet")))
            }
        };
        let last_line = self.moves.last().map_or(start_line, |m| m.line);
        let wrap = |e: AutomatonError| err(last_line, e.to_string());

        match kind {
            Kind::Dfa | Kind::Nfa => {
                let mut b = FiniteAutomaton::builder(alphabet.clone());
                for s in &self.states {
                    b.add_state(s.clone());
                }
                b.start(start);
                for (line, s) in &self.accept {
                    b.accept(state(*line, s)?);
                }
                for m in &self.moves {
                    let [from, sym, to] = m.fields.as_slice() else {
                        return Err(err(m.line, "expected `trans <from> <symbol> <to>`"));
                    };
                    let sym = symbol(m.line, sym)?;
                    if sym.is_none() && kind == Kind::Dfa {
                        return Err(err(m.line, "ε-moves are not allowed in a dfa"));
                    }
                    b.transition(state(m.line, from)?, sym, state(m.line, to)?);
                }
                let fa = b.build(kind == Kind::Dfa).map_err(wrap)?;
                Ok(LevelAutomaton::Finite(fa))
            }
            Kind::Pda => {
                let mut b = PushdownAutomaton::builder(alphabet.clone());
                for s in &self.states {
                    b.add_state(s.clone());
                }
                let stack: HashMap<&str, _> = self
                    .stack
                    .iter()
                    .map(|z| (z.as_str(), b.add_stack_symbol(z.clone())))
                    .collect();
                let stack_sym = |line: usize, name: &str| {
                    stack
                        .get(name)
                        .copied()
                        .ok_or_else(|| err(line, format!("unknown stack symbol `{name}`")))
                };
                let (z_line, z) = self
                    .stack_start
                    .clone()
                    .ok_or_else(|| err(1, "missing `stack-start` declaration"))?;
                b.start(start).initial_stack(stack_sym(z_line, &z)?);
                for (line, s) in &self.accept {
                    b.accept(state(*line, s)?);
                }
                for m in &self.moves {
                    let f = &m.fields;
                    if f.len() < 5 || f[3] != "top" || (f.len() > 5 && f[5] != "push") {
                        return Err(err(
                            m.line,
                            "expected `trans <from> <symbol|eps> <to> top <Z> [push <sym>...]`",
                        ));
                    }
                    let push = f
                        .iter()
                        .skip(6)
                        .map(|z| stack_sym(m.line, z))
                        .collect::<Result<Vec<_>, _>>()?;
                    b.transition(
                        state(m.line, &f[0])?,
                        symbol(m.line, &f[1])?,
                        stack_sym(m.line, &f[4])?,
                        state(m.line, &f[2])?,
                        push,
                    );
                }
                Ok(LevelAutomaton::Pushdown(b.build().map_err(wrap)?))
            }
            Kind::Tm => {
                let mut b = TuringMachine::builder(alphabet.clone());
                for s in &self.states {
                    b.add_state(s.clone());
                }
                for t in &self.tape {
                    b.tape_symbol(t);
                }
                let (blank_line, blank) = self
                    .blank
                    .clone()
                    .ok_or_else(|| err(1, "missing `blank` declaration"))?;
                if alphabet.lookup(&blank).is_some() {
                    return Err(err(blank_line, "blank must not be an input symbol"));
                }
                b.blank(&blank);
                let known: Vec<String> = alphabet
                    .symbols()
                    .map(|s| alphabet.name(s).to_string())
                    .chain(self.tape.iter().cloned())
                    .chain(std::iter::once(blank.clone()))
                    .collect();
                let mut tape_sym = |line: usize, name: &str| {
                    if known.iter().any(|k| k == name) {
                        Ok(b.tape_symbol(name))
                    } else {
                        Err(err(line, format!("unknown tape symbol `{name}`")))
                    }
                };
                let mut moves = Vec::new();
                for m in &self.moves {
                    let [from, read, to, write, head] = m.fields.as_slice() else {
                        return Err(err(
                            m.line,
                            "expected `trans <from> <read> <to> <write> <L|R>`",
                        ));
                    };
                    let head = match head.as_str() {
                        "L" => HeadMove::Left,
                        "R" => HeadMove::Right,
                        other => {
                            return Err(err(
                                m.line,
                                format!("head move must be L or R, got `{other}`"),
                            ))
                        }
                    };
                    moves.push((
                        state(m.line, from)?,
                        tape_sym(m.line, read)?,
                        state(m.line, to)?,
                        tape_sym(m.line, write)?,
                        head,
                    ));
                }
                let output = match &self.output {
                    Some((line, cell, sym)) => Some((*cell, tape_sym(*line, sym)?)),
                    None => None,
                };
                for (from, read, to, write, head) in moves {
                    b.transition(from, read, to, write, head);
                }
                if let Some((cell, sym)) = output {
                    b.output(cell, sym);
                }
                b.start(start);
                for (line, s) in &self.accept {
                    b.accept(state(*line, s)?);
                }
                for (line, s) in &self.reject {
                    b.reject(state(*line, s)?);
                }
                Ok(LevelAutomaton::Turing(b.build().map_err(wrap)?))
            }
        }
    }
}
