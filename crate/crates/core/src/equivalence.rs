//! Products, equivalence, isomorphism and canonical forms.

use std::collections::{HashMap, VecDeque};

use crate::duality::bidual;
use crate::error::{Error, Result};
use crate::machine::{Counterexample, MooreMachine, Word};

/// How the outputs of a product machine are formed from its components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputCombiner {
    /// `(d1,d2)` tokens over `Δ1 × Δ2`.
    Pair,
    /// `p1`.
    First,
    /// `p2`.
    Second,
    /// An explicit table `γ: Δ1 × Δ2 → Δ`.
    Table {
        outputs: Vec<String>,
        map: HashMap<(String, String), String>,
    },
}

impl OutputCombiner {
    fn alphabet(&self, m1: &MooreMachine, m2: &MooreMachine) -> Vec<String> {
        match self {
            OutputCombiner::Pair => m1
                .outputs()
                .iter()
                .flat_map(|a| m2.outputs().iter().map(move |b| pair_token(a, b)))
                .collect(),
            OutputCombiner::First => m1.outputs().to_vec(),
            OutputCombiner::Second => m2.outputs().to_vec(),
            OutputCombiner::Table { outputs, .. } => outputs.clone(),
        }
    }

    pub fn combine(&self, a: &str, b: &str) -> Result<String> {
        match self {
            OutputCombiner::Pair => Ok(pair_token(a, b)),
            OutputCombiner::First => Ok(a.to_string()),
            OutputCombiner::Second => Ok(b.to_string()),
            OutputCombiner::Table { map, .. } => map
                .get(&(a.to_string(), b.to_string()))
                .cloned()
                .ok_or_else(|| Error::CombinerNotTotal(a.to_string(), b.to_string())),
        }
    }
}

fn pair_token(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

fn check_inputs(m1: &MooreMachine, m2: &MooreMachine) -> Result<()> {
    if m1.input_count() != m2.input_count() {
        return Err(Error::InputCountMismatch {
            left: m1.input_count(),
            right: m2.input_count(),
        });
    }
    Ok(())
}

/// Pairs reachable from `start` under componentwise `δ`, in BFS order, with
/// the `(parent, letter)` each was first reached by.
struct PairSearch {
    pairs: Vec<(usize, usize)>,
    parent: Vec<Option<(usize, usize)>>,
    rows: Vec<Vec<usize>>,
}

impl PairSearch {
    fn run(m1: &MooreMachine, m2: &MooreMachine, start: (usize, usize)) -> Self {
        let q = m1.input_count();
        let mut index = HashMap::from([(start, 0usize)]);
        let mut search = PairSearch {
            pairs: vec![start],
            parent: vec![None],
            rows: Vec::new(),
        };
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            let (a, b) = search.pairs[k];
            let mut row = Vec::with_capacity(q);
            for j in 0..q {
                let next = (m1.delta(a, j), m2.delta(b, j));
                let target = *index.entry(next).or_insert_with(|| {
                    search.pairs.push(next);
                    search.parent.push(Some((k, j)));
                    queue.push_back(search.pairs.len() - 1);
                    search.pairs.len() - 1
                });
                row.push(target);
            }
            search.rows.push(row);
        }
        search
    }

    fn word_to(&self, mut k: usize) -> Word {
        let mut letters = Vec::new();
        while let Some((p, j)) = self.parent[k] {
            letters.push(j);
            k = p;
        }
        letters.reverse();
        Word(letters)
    }

    fn first_mismatch(&self, m1: &MooreMachine, m2: &MooreMachine) -> Option<Counterexample> {
        self.pairs
            .iter()
            .position(|&(a, b)| m1.output(a) != m2.output(b))
            .map(|k| {
                let (a, b) = self.pairs[k];
                Counterexample {
                    word: self.word_to(k),
                    left_output: m1.output(a).to_string(),
                    right_output: m2.output(b).to_string(),
                }
            })
    }
}

/// `M1 ⊗γ M2` restricted to the pairs reachable from `(i1, i2)`.
pub fn product(m1: &MooreMachine, m2: &MooreMachine, gamma: &OutputCombiner) -> Result<MooreMachine> {
    check_inputs(m1, m2)?;
    let search = PairSearch::run(m1, m2, (m1.initial(), m2.initial()));
    let outputs = gamma.alphabet(m1, m2);
    let out_index: HashMap<&str, usize> =
        outputs.iter().enumerate().map(|(k, o)| (o.as_str(), k)).collect();
    let output_map = search
        .pairs
        .iter()
        .map(|&(a, b)| {
            let o = gamma.combine(m1.output(a), m2.output(b))?;
            out_index
                .get(o.as_str())
                .copied()
                .ok_or_else(|| Error::CombinerNotTotal(m1.output(a).into(), m2.output(b).into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let names = search
        .pairs
        .iter()
        .map(|&(a, b)| pair_token(m1.state_name(a), m2.state_name(b)))
        .collect();
    MooreMachine::new(names, m1.input_count(), outputs, search.rows, output_map, 0)?
        .with_input_names(m1.input_names().map(<[String]>::to_vec))
}

/// Outcome of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Distinguished(Counterexample),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Decides `∀w, M1·w = M2·w`. A counterexample is the shortest
/// distinguishing word, lexicographically least among the shortest.
pub fn equivalent(m1: &MooreMachine, m2: &MooreMachine) -> Result<Equivalence> {
    check_inputs(m1, m2)?;
    let search = PairSearch::run(m1, m2, (m1.initial(), m2.initial()));
    Ok(match search.first_mismatch(m1, m2) {
        None => Equivalence::Equivalent,
        Some(c) => Equivalence::Distinguished(c),
    })
}

/// Whether `λ(a·w) = λ(b·w)` for every word `w`.
pub fn states_equivalent(m: &MooreMachine, a: usize, b: usize) -> Result<bool> {
    for s in [a, b] {
        if s >= m.state_count() {
            return Err(Error::InvalidState(s));
        }
    }
    Ok(PairSearch::run(m, m, (a, b)).first_mismatch(m, m).is_none())
}

/// Quotient of `trim(m)` by the coarsest output-respecting congruence,
/// computed by partition refinement from the `λ`-partition. Blocks are
/// numbered by first occurrence in the trimmed state order and named after
/// their first member.
pub fn oracle_minimize(m: &MooreMachine) -> MooreMachine {
    let t = m.trim();
    let n = t.state_count();
    let q = t.input_count();
    let mut block: Vec<usize> = (0..n).map(|s| t.output_index(s)).collect();
    let mut count = renumber(&mut block);
    loop {
        let signatures: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut sig = Vec::with_capacity(q + 1);
                sig.push(block[s]);
                sig.extend(t.row(s).iter().map(|&x| block[x]));
                sig
            })
            .collect();
        let mut ids: HashMap<&Vec<usize>, usize> = HashMap::new();
        let mut next = Vec::with_capacity(n);
        for sig in &signatures {
            let len = ids.len();
            next.push(*ids.entry(sig).or_insert(len));
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    let mut representative = vec![usize::MAX; count];
    for s in (0..n).rev() {
        representative[block[s]] = s;
    }
    MooreMachine::new(
        representative.iter().map(|&s| t.state_name(s).to_string()).collect(),
        q,
        t.outputs().to_vec(),
        representative
            .iter()
            .map(|&s| t.row(s).iter().map(|&x| block[x]).collect())
            .collect(),
        representative.iter().map(|&s| t.output_index(s)).collect(),
        block[t.initial()],
    )
    .expect("quotient of a valid machine")
    .with_input_names(t.input_names().map(<[String]>::to_vec))
    .expect("input names come from a valid machine")
}

fn renumber(labels: &mut [usize]) -> usize {
    let mut ids = HashMap::new();
    for l in labels.iter_mut() {
        let len = ids.len();
        *l = *ids.entry(*l).or_insert(len);
    }
    ids.len()
}

/// A structure-preserving bijection between two machines' states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub map: Vec<usize>,
}

impl Isomorphism {
    /// Pairs of state names `(m1 state, m2 state)`.
    pub fn named<'a>(&self, m1: &'a MooreMachine, m2: &'a MooreMachine) -> Vec<(&'a str, &'a str)> {
        self.map
            .iter()
            .enumerate()
            .map(|(a, &b)| (m1.state_name(a), m2.state_name(b)))
            .collect()
    }
}

/// The isomorphism mapping initial to initial, if there is one. Both
/// machines are expected to be trimmed; unreachable states make the
/// candidate fail to be a bijection.
pub fn isomorphic(m1: &MooreMachine, m2: &MooreMachine) -> Option<Isomorphism> {
    if m1.input_count() != m2.input_count() || m1.state_count() != m2.state_count() {
        return None;
    }
    let n = m1.state_count();
    let mut forward = vec![usize::MAX; n];
    let mut backward = vec![usize::MAX; n];
    forward[m1.initial()] = m2.initial();
    backward[m2.initial()] = m1.initial();
    let mut queue = VecDeque::from([m1.initial()]);
    while let Some(a) = queue.pop_front() {
        let b = forward[a];
        if m1.output(a) != m2.output(b) {
            return None;
        }
        for j in 0..m1.input_count() {
            let (x, y) = (m1.delta(a, j), m2.delta(b, j));
            match (forward[x], backward[y]) {
                (usize::MAX, usize::MAX) => {
                    forward[x] = y;
                    backward[y] = x;
                    queue.push_back(x);
                }
                (fx, by) if fx == y && by == x => {}
                _ => return None,
            }
        }
    }
    if forward.contains(&usize::MAX) {
        return None;
    }
    Some(Isomorphism { map: forward })
}

/// `trim(m)` with states renamed `0, 1, ...` in breadth-first order from
/// the initial state.
pub fn normal_form(m: &MooreMachine) -> MooreMachine {
    let order = m.bfs_order();
    m.restrict(&order, |k, _| k.to_string())
}

/// The canonical minimal machine equivalent to `m`.
pub fn minimize(m: &MooreMachine) -> MooreMachine {
    normal_form(&bidual(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::emit_machine;
    use crate::machine::tests::example;

    fn xy() -> MooreMachine {
        MooreMachine::from_tokens(&["x", "y"], 2, &["0", "1"], &[&[0, 1], &[0, 0]], &["0", "1"], 0)
            .unwrap()
    }

    #[test]
    fn product_of_example_with_itself_is_diagonal() {
        let m = example();
        let p = product(&m, &m, &OutputCombiner::Pair).unwrap();
        assert_eq!(p.states(), ["(i,i)", "(a,a)", "(b,b)"]);
        assert_eq!(p.outputs(), ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        assert_eq!(p.output(1), "(1,1)");
    }

    #[test]
    fn product_with_bidual_has_matching_components() {
        let m = example();
        let p = product(&m, &xy(), &OutputCombiner::Pair).unwrap();
        for s in 0..p.state_count() {
            let o = p.output(s);
            let (l, r) = o[1..o.len() - 1].split_once(',').unwrap();
            assert_eq!(l, r);
        }
        let first = product(&m, &xy(), &OutputCombiner::First).unwrap();
        assert_eq!(equivalent(&first, &m).unwrap(), Equivalence::Equivalent);
    }

    #[test]
    fn product_errors() {
        let one = MooreMachine::from_tokens(&["s"], 1, &["0"], &[&[0]], &["0"], 0).unwrap();
        assert!(matches!(
            product(&example(), &one, &OutputCombiner::Pair),
            Err(Error::InputCountMismatch { left: 2, right: 1 })
        ));
        let partial = OutputCombiner::Table {
            outputs: vec!["z".into()],
            map: HashMap::from([(("0".into(), "0".into()), "z".into())]),
        };
        assert!(matches!(
            product(&example(), &xy(), &partial),
            Err(Error::CombinerNotTotal(..))
        ));
        let xor = OutputCombiner::Table {
            outputs: vec!["same".into(), "diff".into()],
            map: HashMap::from([
                (("0".into(), "0".into()), "same".into()),
                (("1".into(), "1".into()), "same".into()),
                (("0".into(), "1".into()), "diff".into()),
                (("1".into(), "0".into()), "diff".into()),
            ]),
        };
        let p = product(&example(), &xy(), &xor).unwrap();
        assert!((0..p.state_count()).all(|s| p.output(s) == "same"));
    }

    #[test]
    fn equivalence_and_counterexamples() {
        let m = example();
        assert!(equivalent(&m, &xy()).unwrap().is_equivalent());

        let flipped = MooreMachine::from_tokens(
            &["i", "a", "b"],
            2,
            &["0", "1"],
            &[&[0, 1], &[2, 0], &[2, 1]],
            &["1", "1", "0"],
            0,
        )
        .unwrap();
        assert_eq!(
            equivalent(&m, &flipped).unwrap(),
            Equivalence::Distinguished(Counterexample {
                word: Word::empty(),
                left_output: "0".into(),
                right_output: "1".into(),
            })
        );

        // The dual reads the other way round: single letters agree, `01` does not.
        let d = crate::duality::dual(&m).machine;
        assert_eq!(
            equivalent(&m, &d).unwrap(),
            Equivalence::Distinguished(Counterexample {
                word: Word(vec![0, 1]),
                left_output: "1".into(),
                right_output: "0".into(),
            })
        );
    }

    #[test]
    fn state_equivalence() {
        let m = example();
        assert!(states_equivalent(&m, 0, 2).unwrap());
        assert!(!states_equivalent(&m, 0, 1).unwrap());
        assert!(states_equivalent(&m, 1, 1).unwrap());
        assert_eq!(states_equivalent(&m, 0, 9), Err(Error::InvalidState(9)));
    }

    #[test]
    fn oracle_on_example() {
        let o = oracle_minimize(&example());
        assert_eq!(o.state_count(), 2);
        assert_eq!(o.states(), ["i", "a"]);
        assert!(equivalent(&o, &example()).unwrap().is_equivalent());
        let constant = MooreMachine::from_tokens(&["a", "b"], 1, &["k"], &[&[1], &[0]], &["k", "k"], 0)
            .unwrap();
        assert_eq!(oracle_minimize(&constant).state_count(), 1);
    }

    #[test]
    fn isomorphism() {
        let renamed = xy()
            .with_state_names(vec!["p".into(), "q".into()])
            .unwrap();
        let iso = isomorphic(&xy(), &renamed).unwrap();
        assert_eq!(iso.named(&xy(), &renamed), [("x", "p"), ("y", "q")]);
        assert!(isomorphic(&example(), &xy()).is_none());

        let swapped = MooreMachine::from_tokens(
            &["i", "a", "b"],
            2,
            &["0", "1"],
            &[&[0, 1], &[2, 0], &[2, 1]],
            &["1", "0", "1"],
            0,
        )
        .unwrap();
        assert!(isomorphic(&example(), &swapped).is_none());
    }

    #[test]
    fn isomorphism_requires_initial_to_initial() {
        // Two-state cycle with both states outputting the same symbol is
        // isomorphic under either bijection; moving the initial state of a
        // machine with distinct outputs breaks it.
        let a = MooreMachine::from_tokens(&["s", "t"], 1, &["0", "1"], &[&[1], &[0]], &["0", "1"], 0).unwrap();
        let b = MooreMachine::from_tokens(&["s", "t"], 1, &["0", "1"], &[&[1], &[0]], &["0", "1"], 1).unwrap();
        assert!(isomorphic(&a, &b).is_none());
    }

    #[test]
    fn normal_form_of_reordered_bidual() {
        let yx = xy().permuted(&[1, 0]).unwrap();
        assert_eq!(yx.states(), ["y", "x"]);
        let nf = normal_form(&yx);
        assert_eq!(nf.states(), ["0", "1"]);
        assert_eq!(nf.row(0), &[0, 1]);
        assert_eq!(nf.row(1), &[0, 0]);
        assert_eq!(normal_form(&nf), nf);
        assert_eq!(emit_machine(&nf), emit_machine(&normal_form(&xy())));
    }

    #[test]
    fn minimize_example() {
        let min = minimize(&example());
        assert_eq!(min, normal_form(&xy()));
        assert!(isomorphic(&minimize(&xy()), &xy()).is_some());
    }
}
