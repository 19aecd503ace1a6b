//! Dual machines over output vectors `Δ^Q`, and the bidual minimizer.
//!
//! The dual of a trimmed machine `M` has as states the vectors `w·λ` (the
//! map `a ↦ λ(a·w)`), starting from `λ` itself, with `δ⋆(f, j) = f ∘ δ(·, j)`
//! and `λ⋆(f) = f(i)`. Reading a word on one side of the dual gives the
//! behaviour of `M` read on the other side. Dualizing twice merges exactly
//! the states of `M` that no word can tell apart.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::format::emit_annotated;
use crate::machine::{MooreMachine, Word};

/// An element of `Δ^Q`: one output index per state of the base machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutputVector(pub Vec<usize>);

impl OutputVector {
    /// The output map `λ` of `m`.
    pub fn of_machine(m: &MooreMachine) -> Self {
        OutputVector((0..m.state_count()).map(|s| m.output_index(s)).collect())
    }

    /// Builds a vector from output tokens of `m`, one per state.
    pub fn from_symbols(m: &MooreMachine, symbols: &[&str]) -> Result<Self> {
        if symbols.len() != m.state_count() {
            return Err(Error::DomainMismatch {
                expected: m.state_count(),
                got: symbols.len(),
            });
        }
        symbols
            .iter()
            .map(|s| {
                m.outputs()
                    .iter()
                    .position(|o| o == s)
                    .ok_or_else(|| Error::UnknownLetter(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(OutputVector)
    }

    /// `τ_a(f) = f(a)`.
    pub fn at(&self, state: usize) -> usize {
        self.0[state]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols<'m>(&self, m: &'m MooreMachine) -> Vec<&'m str> {
        self.0.iter().map(|&o| m.outputs()[o].as_str()).collect()
    }

    fn check(&self, m: &MooreMachine) -> Result<()> {
        if self.0.len() != m.state_count() {
            return Err(Error::DomainMismatch {
                expected: m.state_count(),
                got: self.0.len(),
            });
        }
        if self.0.iter().any(|&o| o >= m.outputs().len()) {
            return Err(Error::DomainMismatch {
                expected: m.outputs().len(),
                got: self.0.iter().copied().max().unwrap_or(0) + 1,
            });
        }
        Ok(())
    }

    /// `f ∘ δ(·, j)`, the single-letter case shared by both actions.
    fn compose_letter(&self, m: &MooreMachine, j: usize) -> OutputVector {
        OutputVector((0..m.state_count()).map(|a| self.0[m.delta(a, j)]).collect())
    }
}

/// `(w·f)(a) = f(a·w)`.
pub fn act_left_on_function(m: &MooreMachine, w: &Word, f: &OutputVector) -> Result<OutputVector> {
    f.check(m)?;
    (0..m.state_count())
        .map(|a| Ok(f.0[m.right_action(a, w)?]))
        .collect::<Result<Vec<_>>>()
        .map(OutputVector)
}

/// `(f·w)(a) = f(w·a)`.
pub fn act_right_on_function(m: &MooreMachine, f: &OutputVector, w: &Word) -> Result<OutputVector> {
    f.check(m)?;
    (0..m.state_count())
        .map(|a| Ok(f.0[m.left_action(w, a)?]))
        .collect::<Result<Vec<_>>>()
        .map(OutputVector)
}

/// A dual machine together with the vector each of its states stands for.
///
/// `base` is the trimmed machine the vectors are indexed by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualMachine {
    pub machine: MooreMachine,
    pub vectors: Vec<OutputVector>,
    pub base: MooreMachine,
}

impl DualMachine {
    fn assemble(base: MooreMachine, vectors: Vec<OutputVector>, transition: Vec<Vec<usize>>) -> Self {
        let i = base.initial();
        let output_map = vectors.iter().map(|f| f.at(i)).collect();
        let machine = MooreMachine::new(
            (0..vectors.len()).map(|k| format!("d{k}")).collect(),
            base.input_count(),
            base.outputs().to_vec(),
            transition,
            output_map,
            0,
        )
        .expect("dual tables are total by construction")
        .with_input_names(base.input_names().map(<[String]>::to_vec))
        .expect("input names come from a valid machine");
        DualMachine {
            machine,
            vectors,
            base,
        }
    }

    /// `.moore` text with each state's vector as a `# vector:` comment.
    pub fn emit(&self) -> String {
        emit_annotated(&self.machine, |s| {
            Some(format!("vector: {}", self.vectors[s].symbols(&self.base).join(" ")))
        })
    }
}

/// The dual of `trim(m)`, built with the stack worklist: start from `[λ]`,
/// take the bottom-most element whose successors are not all on the stack,
/// push its missing successors for letters `0..q` in order, repeat.
pub fn dual(m: &MooreMachine) -> DualMachine {
    let base = m.trim();
    let q = base.input_count();
    let mut stack = vec![OutputVector::of_machine(&base)];
    let mut index: HashMap<OutputVector, usize> = HashMap::from([(stack[0].clone(), 0)]);
    let mut transition: Vec<Vec<usize>> = Vec::new();

    // Elements below `happy` have all successors recorded.
    let mut happy = 0;
    while happy < stack.len() {
        let alpha = stack[happy].clone();
        let mut row = Vec::with_capacity(q);
        for j in 0..q {
            let next = alpha.compose_letter(&base, j);
            let target = match index.get(&next) {
                Some(&k) => k,
                None => {
                    stack.push(next.clone());
                    index.insert(next, stack.len() - 1);
                    stack.len() - 1
                }
            };
            row.push(target);
        }
        transition.push(row);
        happy += 1;
    }
    DualMachine::assemble(base, stack, transition)
}

/// Right dual built straight from its definition: states `w·λ` computed
/// from scratch for representative words, `δ⋆(f, j) = j·f`.
pub fn right_dual_by_definition(m: &MooreMachine) -> DualMachine {
    let base = m.trim();
    let lambda = OutputVector::of_machine(&base);
    dual_by_words(base, |base, w| {
        act_left_on_function(base, w, &lambda).expect("word over base inputs")
    }, |w, j| {
        let mut v = vec![j];
        v.extend_from_slice(w.symbols());
        Word(v)
    })
}

/// Left dual built straight from its definition: states `λ·w`,
/// `δ(f, j) = f·j`.
pub fn left_dual_by_definition(m: &MooreMachine) -> DualMachine {
    let base = m.trim();
    let lambda = OutputVector::of_machine(&base);
    dual_by_words(base, |base, w| {
        act_right_on_function(base, &lambda, w).expect("word over base inputs")
    }, |w, j| {
        let mut v = w.clone();
        v.push(j);
        v
    })
}

fn dual_by_words(
    base: MooreMachine,
    state_of: impl Fn(&MooreMachine, &Word) -> OutputVector,
    extend: impl Fn(&Word, usize) -> Word,
) -> DualMachine {
    let q = base.input_count();
    let mut words = vec![Word::empty()];
    let mut vectors = vec![state_of(&base, &words[0])];
    let mut index: HashMap<OutputVector, usize> = HashMap::from([(vectors[0].clone(), 0)]);
    let mut transition = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let mut row = Vec::with_capacity(q);
        for j in 0..q {
            let w = extend(&words[k], j);
            let f = state_of(&base, &w);
            let target = *index.entry(f.clone()).or_insert_with(|| {
                vectors.push(f);
                words.push(w);
                queue.push_back(vectors.len() - 1);
                vectors.len() - 1
            });
            row.push(target);
        }
        transition.push(row);
    }
    DualMachine::assemble(base, vectors, transition)
}

/// The bidual of `m` together with the class map `τ` from the states of
/// `trim(m)` onto the bidual's states.
#[derive(Debug, Clone)]
pub struct Bidual {
    pub machine: MooreMachine,
    pub trimmed: MooreMachine,
    pub class_of: Vec<usize>,
}

pub fn bidual_with_classes(m: &MooreMachine) -> Bidual {
    let first = dual(m);
    let second = dual(&first.machine);
    let lookup: HashMap<&OutputVector, usize> =
        second.vectors.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let class_of = (0..first.base.state_count())
        .map(|a| {
            let tau = OutputVector(first.vectors.iter().map(|f| f.at(a)).collect());
            lookup[&tau]
        })
        .collect();
    Bidual {
        machine: second.machine,
        trimmed: first.base,
        class_of,
    }
}

/// `dual(dual(trim(m)))` with the vector metadata dropped.
pub fn bidual(m: &MooreMachine) -> MooreMachine {
    dual(&dual(m).machine).machine
}
