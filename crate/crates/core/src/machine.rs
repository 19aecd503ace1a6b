//! Moore machines `(Q, Σ, Δ, δ, λ, i)` and the two word actions.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};

/// A finite word over the input alphabet `{0, .., q-1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// Mirror word.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, symbol: usize) {
        self.0.push(symbol);
    }

    /// Renders with digit characters when every symbol fits in base 10 and
    /// `inputs <= 10`, comma-separated indices otherwise. The empty word is `ε`.
    pub fn render(&self, inputs: usize) -> String {
        if self.0.is_empty() {
            return "ε".to_string();
        }
        if inputs <= 10 {
            self.0.iter().map(|d| char::from(b'0' + *d as u8)).collect()
        } else {
            self.0
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    /// Parses the CLI notation: digits (`"0110"`), or comma-separated
    /// indices (`"12,0,3"`). `""` and `"ε"` denote the empty word.
    pub fn parse(text: &str) -> Result<Word, ParseError> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "eps" {
            return Ok(Word::empty());
        }
        let bad = |column: usize, message: String| ParseError::Syntax {
            line: 1,
            column,
            message,
        };
        if text.contains(',') {
            let mut out = Vec::new();
            let mut column = 1;
            for part in text.split(',') {
                let p = part.trim();
                let d = p
                    .parse::<usize>()
                    .map_err(|_| bad(column, format!("bad symbol `{p}`")))?;
                out.push(d);
                column += part.len() + 1;
            }
            Ok(Word(out))
        } else {
            text.chars()
                .enumerate()
                .map(|(k, c)| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| bad(k + 1, format!("bad digit `{c}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Word)
        }
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl From<&[usize]> for Word {
    fn from(v: &[usize]) -> Self {
        Word(v.to_vec())
    }
}

impl FromStr for Word {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.0.iter().copied().max().unwrap_or(0);
        f.write_str(&self.render(if max < 10 { 10 } else { max + 1 }))
    }
}

/// Witness that two machines differ: both outputs after reading `word`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub word: Word,
    pub left_output: String,
    pub right_output: String,
}

/// Tokens are non-empty, whitespace-free and contain no `#`.
pub fn is_token(t: &str) -> bool {
    !t.is_empty() && !t.chars().any(|c| c.is_whitespace() || c == '#')
}

/// A deterministic, complete Moore machine.
///
/// States and outputs are addressed by index; `states[k]` and `outputs[k]`
/// hold their display tokens. Transitions are stored row-major, `q` per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreMachine {
    states: Vec<String>,
    input_names: Option<Vec<String>>,
    input_count: usize,
    outputs: Vec<String>,
    transition: Vec<usize>,
    output_map: Vec<usize>,
    initial: usize,
}

impl MooreMachine {
    /// Builds and validates a machine. `transition[s][j]` is `δ(s, j)`,
    /// `output_map[s]` indexes into `outputs`.
    pub fn new(
        states: Vec<String>,
        input_count: usize,
        outputs: Vec<String>,
        transition: Vec<Vec<usize>>,
        output_map: Vec<usize>,
        initial: usize,
    ) -> Result<Self> {
        let invalid = |m: String| Error::Parse(ParseError::Invalid(m));
        let n = states.len();
        if n == 0 {
            return Err(invalid("machine has no states".into()));
        }
        if input_count == 0 {
            return Err(invalid("machine has no inputs".into()));
        }
        if outputs.is_empty() {
            return Err(invalid("machine has no outputs".into()));
        }
        if let Some(bad) = states.iter().chain(&outputs).find(|t| !is_token(t)) {
            return Err(invalid(format!("`{bad}` is not a valid token")));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(invalid(format!("duplicate state `{s}`")));
            }
        }
        let mut seen = HashSet::new();
        for o in &outputs {
            if !seen.insert(o.as_str()) {
                return Err(invalid(format!("duplicate output `{o}`")));
            }
        }
        if transition.len() != n || output_map.len() != n {
            return Err(invalid("table size does not match state count".into()));
        }
        let mut flat = Vec::with_capacity(n * input_count);
        for (s, row) in transition.iter().enumerate() {
            if row.len() != input_count {
                return Err(Error::Parse(ParseError::MissingTransition {
                    state: states[s].clone(),
                    input: row.len().to_string(),
                }));
            }
            for &t in row {
                if t >= n {
                    return Err(Error::InvalidState(t));
                }
                flat.push(t);
            }
        }
        if output_map.iter().any(|&o| o >= outputs.len()) {
            return Err(invalid("output index out of range".into()));
        }
        if initial >= n {
            return Err(Error::InvalidState(initial));
        }
        Ok(MooreMachine {
            states,
            input_names: None,
            input_count,
            outputs,
            transition: flat,
            output_map,
            initial,
        })
    }

    /// Convenience constructor taking output tokens per state; the output
    /// alphabet is the given `outputs` list.
    pub fn from_tokens(
        states: &[&str],
        input_count: usize,
        outputs: &[&str],
        transition: &[&[usize]],
        state_outputs: &[&str],
        initial: usize,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> =
            outputs.iter().enumerate().map(|(k, o)| (*o, k)).collect();
        let output_map = state_outputs
            .iter()
            .map(|o| {
                index.get(o).copied().ok_or_else(|| {
                    Error::Parse(ParseError::Invalid(format!("unknown output `{o}`")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MooreMachine::new(
            states.iter().map(|s| s.to_string()).collect(),
            input_count,
            outputs.iter().map(|s| s.to_string()).collect(),
            transition.iter().map(|r| r.to_vec()).collect(),
            output_map,
            initial,
        )
    }

    /// Attaches display names for the inputs (must be `q` distinct tokens).
    pub fn with_input_names(mut self, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(names) = &names {
            if names.iter().any(|n| !is_token(n)) {
                return Err(Error::Parse(ParseError::Invalid("bad input name".into())));
            }
            if names.len() != self.input_count {
                return Err(Error::Parse(ParseError::Invalid(format!(
                    "{} input names for {} inputs",
                    names.len(),
                    self.input_count
                ))));
            }
            let distinct: HashSet<_> = names.iter().collect();
            if distinct.len() != names.len() {
                return Err(Error::Parse(ParseError::Invalid(
                    "duplicate input name".into(),
                )));
            }
        }
        self.input_names = names;
        Ok(self)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn input_names(&self) -> Option<&[String]> {
        self.input_names.as_deref()
    }

    pub fn input_name(&self, j: usize) -> String {
        match &self.input_names {
            Some(names) => names[j].clone(),
            None => j.to_string(),
        }
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// `δ(s, j)`; panics on out-of-range arguments.
    #[inline]
    pub fn delta(&self, s: usize, j: usize) -> usize {
        self.transition[s * self.input_count + j]
    }

    pub fn row(&self, s: usize) -> &[usize] {
        &self.transition[s * self.input_count..(s + 1) * self.input_count]
    }

    /// Index of `λ(s)` in [`outputs`](Self::outputs).
    #[inline]
    pub fn output_index(&self, s: usize) -> usize {
        self.output_map[s]
    }

    /// `λ(s)`.
    pub fn output(&self, s: usize) -> &str {
        &self.outputs[self.output_map[s]]
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s < self.states.len() {
            Ok(())
        } else {
            Err(Error::InvalidState(s))
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&j| j >= self.input_count) {
            Some(&symbol) => Err(Error::SymbolOutOfRange {
                symbol,
                inputs: self.input_count,
            }),
            None => Ok(()),
        }
    }

    /// `s·w`: reads `w` left to right.
    pub fn right_action(&self, s: usize, w: &Word) -> Result<usize> {
        self.check_state(s)?;
        self.check_word(w)?;
        Ok(w.0.iter().fold(s, |a, &j| self.delta(a, j)))
    }

    /// `w·s`: reads `w` right to left, the last letter applied first.
    pub fn left_action(&self, w: &Word, s: usize) -> Result<usize> {
        self.check_state(s)?;
        self.check_word(w)?;
        Ok(w.0.iter().rev().fold(s, |a, &j| self.delta(a, j)))
    }

    /// `M·w = λ(i·w)`.
    pub fn run_right(&self, w: &Word) -> Result<&str> {
        Ok(self.output(self.right_action(self.initial, w)?))
    }

    /// `w·M = λ(w·i)`.
    pub fn run_left(&self, w: &Word) -> Result<&str> {
        Ok(self.output(self.left_action(w, self.initial)?))
    }

    /// States reachable from the initial state, in breadth-first discovery
    /// order with letters taken in ascending order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for &t in self.row(s) {
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        order
    }

    /// Rebuilds the machine on the given states (which must be closed under
    /// `δ` and contain the initial state), in that order, renaming with `name`.
    pub(crate) fn restrict(&self, order: &[usize], name: impl Fn(usize, usize) -> String) -> Self {
        let mut new_index = vec![usize::MAX; self.states.len()];
        for (k, &s) in order.iter().enumerate() {
            new_index[s] = k;
        }
        let mut transition = Vec::with_capacity(order.len() * self.input_count);
        for &s in order {
            transition.extend(self.row(s).iter().map(|&t| new_index[t]));
        }
        MooreMachine {
            states: order
                .iter()
                .enumerate()
                .map(|(k, &s)| name(k, s))
                .collect(),
            input_names: self.input_names.clone(),
            input_count: self.input_count,
            outputs: self.outputs.clone(),
            transition,
            output_map: order.iter().map(|&s| self.output_map[s]).collect(),
            initial: new_index[self.initial],
        }
    }

    /// Restriction to the states reachable from the initial state.
    pub fn trim(&self) -> MooreMachine {
        let order = self.bfs_order();
        self.restrict(&order, |_, s| self.states[s].clone())
    }

    pub fn is_trim(&self) -> bool {
        self.bfs_order().len() == self.states.len()
    }

    /// Renames the states; `names` must be distinct and one per state.
    pub fn with_state_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.states.len() {
            return Err(Error::Parse(ParseError::Invalid(
                "state name count mismatch".into(),
            )));
        }
        let distinct: HashSet<_> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::Parse(ParseError::Invalid(
                "duplicate state name".into(),
            )));
        }
        self.states = names;
        Ok(self)
    }

    /// Same machine with its states listed in a different order.
    /// `order` must be a permutation of the state indices.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.states.len()];
        if order.len() != self.states.len() {
            return Err(Error::Parse(ParseError::Invalid("not a permutation".into())));
        }
        for &s in order {
            if s >= seen.len() || seen[s] {
                return Err(Error::Parse(ParseError::Invalid("not a permutation".into())));
            }
            seen[s] = true;
        }
        Ok(self.restrict(order, |_, s| self.states[s].clone()))
    }
}
