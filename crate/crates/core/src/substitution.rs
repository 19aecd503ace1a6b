//! Substitutions on a finite alphabet, their fixed points, and the digit
//! machines that index those fixed points.
//!
//! A constant-length substitution of length `q` is a Moore machine over the
//! digits `0..q`: `δ(a, j) = σ(a)_j`. Letter `n` of `σ^k(a)` is then obtained
//! by feeding the base-`q` digits of `n` (least significant first) to the
//! left action on `a`. Substitutions of varying length are padded to length
//! `q` with a sink letter `ω`, and positions of the fixed point correspond
//! to the digit words that keep the initial letter away from `ω`, ranked by
//! their numeric value.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::duality::bidual_with_classes;
use crate::error::{Error, ParseError, Result};
use crate::format::{expect_header, lines};
use crate::machine::{is_token, MooreMachine, Word};

/// State name of the padding sink.
pub const SINK_STATE: &str = "ω";
/// Output of the padding sink; never a declared output.
pub const SINK_OUTPUT: &str = "⊥";

/// `(Q, Δ, σ, λ, i)` with letters and outputs addressed by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    letters: Vec<String>,
    rules: Vec<Vec<usize>>,
    outputs: Vec<String>,
    projection: Vec<usize>,
    initial: usize,
}

impl Substitution {
    pub fn new(
        letters: Vec<String>,
        rules: Vec<Vec<usize>>,
        outputs: Vec<String>,
        projection: Vec<usize>,
        initial: usize,
    ) -> Result<Self> {
        let invalid = |m: String| Error::Parse(ParseError::Invalid(m));
        if letters.is_empty() {
            return Err(invalid("no letters".into()));
        }
        if outputs.is_empty() {
            return Err(invalid("no outputs".into()));
        }
        for (k, l) in letters.iter().enumerate() {
            if !is_token(l) || l == SINK_STATE {
                return Err(invalid(format!("`{l}` is not a usable letter name")));
            }
            if letters[..k].contains(l) {
                return Err(invalid(format!("duplicate letter `{l}`")));
            }
        }
        for (k, o) in outputs.iter().enumerate() {
            if !is_token(o) || o == SINK_OUTPUT {
                return Err(invalid(format!("`{o}` is not a usable output symbol")));
            }
            if outputs[..k].contains(o) {
                return Err(invalid(format!("duplicate output `{o}`")));
            }
        }
        if rules.len() != letters.len() || projection.len() != letters.len() {
            return Err(invalid("one rule and one output per letter required".into()));
        }
        for (a, image) in rules.iter().enumerate() {
            if image.is_empty() {
                return Err(ParseError::EmptyImage {
                    line: 0,
                    letter: letters[a].clone(),
                }
                .into());
            }
            if let Some(&bad) = image.iter().find(|&&b| b >= letters.len()) {
                return Err(Error::UnknownLetter(bad.to_string()));
            }
        }
        if projection.iter().any(|&o| o >= outputs.len()) {
            return Err(invalid("projection value out of range".into()));
        }
        if initial >= letters.len() {
            return Err(Error::UnknownLetter(initial.to_string()));
        }
        Ok(Substitution {
            letters,
            rules,
            outputs,
            projection,
            initial,
        })
    }

    /// Builds from textual rules such as `("a", "ab")`; letters and outputs
    /// are single characters.
    pub fn from_rules(rules: &[(&str, &str)], projection: &[(&str, &str)], initial: &str) -> Result<Self> {
        let letters: Vec<String> = rules.iter().map(|r| r.0.to_string()).collect();
        let index = |c: &str| {
            letters
                .iter()
                .position(|l| l == c)
                .ok_or_else(|| Error::UnknownLetter(c.to_string()))
        };
        let images = rules
            .iter()
            .map(|(_, img)| img.chars().map(|c| index(&c.to_string())).collect())
            .collect::<Result<Vec<_>>>()?;
        let mut outputs: Vec<String> = Vec::new();
        for (_, o) in projection {
            if !outputs.iter().any(|x| x == o) {
                outputs.push(o.to_string());
            }
        }
        let mut proj = vec![usize::MAX; letters.len()];
        for (l, o) in projection {
            proj[index(l)?] = outputs.iter().position(|x| x == o).unwrap();
        }
        let initial = index(initial)?;
        Substitution::new(letters.clone(), images, outputs, proj, initial)
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter_name(&self, a: usize) -> &str {
        &self.letters[a]
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == name)
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn image(&self, a: usize) -> &[usize] {
        &self.rules[a]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// `λ(a)` as an output token.
    pub fn project(&self, a: usize) -> &str {
        &self.outputs[self.projection[a]]
    }

    /// `q = max |σ(a)|`.
    pub fn q(&self) -> usize {
        self.rules.iter().map(Vec::len).max().unwrap_or(1)
    }

    pub fn is_constant_length(&self) -> bool {
        let q = self.q();
        self.rules.iter().all(|r| r.len() == q)
    }

    /// `σ(w)`, the concatenation of the images of the letters of `w`.
    pub fn apply(&self, w: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &a in w {
            out.extend_from_slice(
                self.rules
                    .get(a)
                    .ok_or_else(|| Error::UnknownLetter(a.to_string()))?,
            );
        }
        Ok(out)
    }

    fn single_char_letters(&self) -> bool {
        self.letters.iter().all(|l| l.chars().count() == 1)
    }

    /// Reads a word of letters: a run of characters when every letter name
    /// is one character long, whitespace-separated names otherwise.
    pub fn parse_letters(&self, text: &str) -> Result<Vec<usize>> {
        let lookup = |t: &str| {
            self.letter_index(t)
                .ok_or_else(|| Error::UnknownLetter(t.to_string()))
        };
        if self.single_char_letters() {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| lookup(&c.to_string()))
                .collect()
        } else {
            text.split_whitespace().map(lookup).collect()
        }
    }

    pub fn render_letters(&self, w: &[usize]) -> String {
        let names = w.iter().map(|&a| self.letters[a].as_str());
        if self.single_char_letters() {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(" ")
        }
    }

    pub fn render_projection(&self, w: &[usize]) -> String {
        let syms = w.iter().map(|&a| self.project(a));
        if self.outputs.iter().all(|o| o.chars().count() == 1) {
            syms.collect()
        } else {
            syms.collect::<Vec<_>>().join(" ")
        }
    }

    /// Checks that `σ(i)` starts with `i` and has length at least 2.
    pub fn check_fixed_point(&self) -> Result<()> {
        let image = &self.rules[self.initial];
        if image[0] != self.initial || image.len() < 2 {
            return Err(Error::NoFixedPoint);
        }
        Ok(())
    }

    /// The first `n` letters of `σ^∞(i)`.
    pub fn expand_fixed_point(&self, n: usize) -> Result<Vec<usize>> {
        Ok(self.fixed_point()?.take(n).collect())
    }

    /// The first `n` letters of `λ(σ^∞(i))`, as output indices.
    pub fn expand_projected(&self, n: usize) -> Result<Vec<&str>> {
        Ok(self
            .fixed_point()?
            .take(n)
            .map(|a| self.project(a))
            .collect())
    }

    /// Letters of `σ^∞(i)`, produced incrementally.
    pub fn fixed_point(&self) -> Result<FixedPoint<'_>> {
        self.check_fixed_point()?;
        Ok(FixedPoint {
            subst: self,
            prefix: vec![self.initial],
            pos: 0,
        })
    }

    /// `σ^k(a)` by direct iteration.
    pub fn iterate(&self, k: usize, a: usize) -> Vec<usize> {
        let mut w = vec![a];
        for _ in 0..k {
            w = self.apply(&w).expect("letters of the alphabet");
        }
        w
    }

    /// `|σ^k(a)|` from letter counts, without expanding. Saturates at
    /// `u128::MAX`.
    pub fn image_length(&self, k: usize, a: usize) -> u128 {
        let n = self.letters.len();
        let mut counts = vec![0u128; n];
        counts[a] = 1;
        for _ in 0..k {
            let mut next = vec![0u128; n];
            for (b, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &x in &self.rules[b] {
                    next[x] = next[x].saturating_add(c);
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }

    /// The Moore machine `δ(a, j) = σ(a)_j` of a constant-length
    /// substitution.
    pub fn constant_machine(&self) -> Result<MooreMachine> {
        if !self.is_constant_length() {
            return Err(Error::NotConstantLength);
        }
        MooreMachine::new(
            self.letters.clone(),
            self.q(),
            self.outputs.clone(),
            self.rules.clone(),
            self.projection.clone(),
            self.initial,
        )
    }
}

/// Streaming prefix of a fixed point. Each refill replaces the buffered
/// prefix `p` by `σ(p)`, which extends it.
#[derive(Debug, Clone)]
pub struct FixedPoint<'s> {
    subst: &'s Substitution,
    prefix: Vec<usize>,
    pos: usize,
}

impl Iterator for FixedPoint<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.pos == self.prefix.len() {
            self.prefix = self.subst.apply(&self.prefix).expect("letters of the alphabet");
        }
        self.pos += 1;
        Some(self.prefix[self.pos - 1])
    }
}

/// One cell of a padding template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Slot,
    Omega,
}

/// Where the `ω` fillers go in each padded image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddingSpec {
    templates: Vec<Vec<Cell>>,
}

impl PaddingSpec {
    /// Images first, `ω`s at the end.
    pub fn trailing(s: &Substitution) -> Self {
        let q = s.q();
        PaddingSpec {
            templates: s
                .rules
                .iter()
                .map(|r| {
                    let mut t = vec![Cell::Slot; r.len()];
                    t.resize(q, Cell::Omega);
                    t
                })
                .collect(),
        }
    }

    /// Per-letter templates; they are checked against a substitution by
    /// [`PaddingSpec::validate`].
    pub fn from_templates(templates: Vec<Vec<Cell>>) -> Self {
        PaddingSpec { templates }
    }

    pub fn template(&self, a: usize) -> &[Cell] {
        &self.templates[a]
    }

    /// Replaces the template of letter `a`.
    pub fn with_template(mut self, a: usize, template: Vec<Cell>) -> Self {
        self.templates[a] = template;
        self
    }

    pub fn validate(&self, s: &Substitution) -> Result<()> {
        let q = s.q();
        if self.templates.len() != s.letters.len() {
            return Err(Error::TemplateMismatch {
                letter: String::new(),
                reason: format!("{} templates for {} letters", self.templates.len(), s.letters.len()),
            });
        }
        for (a, t) in self.templates.iter().enumerate() {
            let slots = t.iter().filter(|c| **c == Cell::Slot).count();
            if t.len() != q || slots != s.rules[a].len() {
                return Err(Error::TemplateMismatch {
                    letter: s.letters[a].clone(),
                    reason: format!(
                        "need length {q} with {} slots, got length {} with {slots}",
                        s.rules[a].len(),
                        t.len()
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn render_template(t: &[Cell]) -> String {
        t.iter()
            .map(|c| match c {
                Cell::Slot => '_',
                Cell::Omega => 'w',
            })
            .collect()
    }

    pub fn parse_template(text: &str) -> Option<Vec<Cell>> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '_' => Some(Cell::Slot),
                'w' | 'ω' => Some(Cell::Omega),
                _ => None,
            })
            .collect()
    }
}

/// The digit machine of a padded substitution: states are the letters
/// followed by the sink `ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedMachine {
    pub machine: MooreMachine,
    pub sink: usize,
    pub sink_output: String,
}

impl PaddedMachine {
    /// Whether a digit word (least significant first) keeps `i` off the sink.
    pub fn accepts(&self, w: &Word) -> Result<bool> {
        Ok(self.machine.left_action(w, self.machine.initial())? != self.sink)
    }
}

pub fn to_padded_machine(s: &Substitution, pad: &PaddingSpec) -> Result<PaddedMachine> {
    pad.validate(s)?;
    let q = s.q();
    let n = s.letters.len();
    let sink = n;
    let mut transition = Vec::with_capacity(n + 1);
    for (a, image) in s.rules.iter().enumerate() {
        let mut letters = image.iter();
        transition.push(
            pad.templates[a]
                .iter()
                .map(|c| match c {
                    Cell::Slot => *letters.next().expect("slot count validated"),
                    Cell::Omega => sink,
                })
                .collect(),
        );
    }
    transition.push(vec![sink; q]);
    let mut states = s.letters.clone();
    states.push(SINK_STATE.to_string());
    let mut outputs = s.outputs.clone();
    outputs.push(SINK_OUTPUT.to_string());
    let mut output_map = s.projection.clone();
    output_map.push(outputs.len() - 1);
    Ok(PaddedMachine {
        machine: MooreMachine::new(states, q, outputs, transition, output_map, s.initial)?,
        sink,
        sink_output: SINK_OUTPUT.to_string(),
    })
}

/// Base-`q` digits of `n`, least significant first, zero-padded to `width`.
pub fn digits(mut n: u128, q: usize, width: usize) -> Word {
    let q = q as u128;
    let mut out = Vec::with_capacity(width);
    while n > 0 || out.len() < width {
        out.push((n % q) as usize);
        n /= q;
    }
    Word(out)
}

/// Letter `n` of `σ^k(a)` for a constant-length substitution, read off the
/// digit machine without expanding.
pub fn letter_at_constant(s: &Substitution, k: usize, a: usize, n: u128) -> Result<usize> {
    if !s.is_constant_length() {
        return Err(Error::NotConstantLength);
    }
    if a >= s.letters.len() {
        return Err(Error::UnknownLetter(a.to_string()));
    }
    let len = (s.q() as u128).checked_pow(k as u32).ok_or(Error::Overflow)?;
    if n >= len {
        return Err(Error::IndexOutOfRange { index: n, len });
    }
    let m = s.constant_machine()?;
    m.left_action(&digits(n, s.q(), k), a)
}

/// `φ(w) = Σ w_j q^j`.
pub fn phi(w: &Word, q: usize) -> Result<u128> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut value = 0u128;
    for &d in w.symbols().iter().rev() {
        if d >= q {
            return Err(Error::DigitOutOfRange { digit: d, base: q });
        }
        value = value
            .checked_mul(q as u128)
            .and_then(|v| v.checked_add(d as u128))
            .ok_or(Error::Overflow)?;
    }
    Ok(value)
}

fn check_zero_loop(pm: &PaddedMachine) -> Result<()> {
    let i = pm.machine.initial();
    if pm.machine.delta(i, 0) != i {
        return Err(Error::NoFixedPoint);
    }
    Ok(())
}

/// Shortest representative of `m`: its digits without trailing zeros, or
/// `"0"` for zero.
fn shortest(m: u128, q: usize) -> Word {
    let mut w = digits(m, q, 1);
    while w.len() > 1 && *w.0.last().unwrap() == 0 {
        w.0.pop();
    }
    w
}

/// Default candidate bound for [`psi_by_enumeration`].
pub const DEFAULT_SEARCH_BOUND: u128 = 10_000_000;

/// `ψ(n)` by scanning `m = 0, 1, 2, ...` and keeping the values whose digit
/// word stays off the sink.
pub fn psi_by_enumeration(pm: &PaddedMachine, n: u128, bound: u128) -> Result<Word> {
    check_zero_loop(pm)?;
    let q = pm.machine.input_count();
    let mut rank = 0u128;
    for m in 0..bound {
        let w = shortest(m, q);
        if pm.accepts(&w)? {
            if rank == n {
                return Ok(w);
            }
            rank += 1;
        }
    }
    Err(Error::SearchExhausted { rank: n, bound })
}

/// Counts of sink-avoiding digit strings by length, read most significant
/// digit first from each state.
struct LanguageCounts {
    /// `by_length[len][state]`
    by_length: Vec<Vec<u128>>,
}

impl LanguageCounts {
    fn new(pm: &PaddedMachine) -> Self {
        let n = pm.machine.state_count();
        let row: Vec<u128> = (0..n).map(|s| u128::from(s != pm.sink)).collect();
        LanguageCounts {
            by_length: vec![row],
        }
    }

    fn extend(&mut self, pm: &PaddedMachine) {
        let m = &pm.machine;
        let last = self.by_length.last().unwrap();
        let row = (0..m.state_count())
            .map(|s| {
                if s == pm.sink {
                    return 0;
                }
                (0..m.input_count()).fold(0u128, |acc, j| acc.saturating_add(last[m.delta(s, j)]))
            })
            .collect();
        self.by_length.push(row);
    }
}

/// `ψ(n)`: the digit word (least significant first, no trailing zeros) of
/// the `n`-th smallest number whose digits keep the initial state off the
/// sink.
///
/// Ranks by counting sink-avoiding digit strings per length instead of
/// scanning; agrees with [`psi_by_enumeration`]. Fails when the accepted
/// numbers are fewer than `n + 1`.
pub fn psi(pm: &PaddedMachine, n: u128) -> Result<Word> {
    check_zero_loop(pm)?;
    let m = &pm.machine;
    let i = m.initial();
    let mut counts = LanguageCounts::new(pm);
    // counts[L][i] = number of accepted values below q^L (leading zeros loop on i).
    while counts.by_length.last().unwrap()[i] <= n {
        let before = counts.by_length.last().unwrap()[i];
        counts.extend(pm);
        let after = counts.by_length.last().unwrap()[i];
        if after == before {
            // No accepted value of this length, so none of any greater length.
            return Err(Error::SearchExhausted {
                rank: n,
                bound: after,
            });
        }
    }
    let width = counts.by_length.len() - 1;
    let mut remaining = n;
    let mut state = i;
    let mut msb_first = Vec::with_capacity(width);
    for len in (0..width).rev() {
        let mut chosen = None;
        for j in 0..m.input_count() {
            let c = counts.by_length[len][m.delta(state, j)];
            if remaining < c {
                chosen = Some(j);
                break;
            }
            remaining -= c;
        }
        let j = chosen.expect("rank lies below the count of this subtree");
        msb_first.push(j);
        state = m.delta(state, j);
    }
    msb_first.reverse();
    let mut w = Word(msb_first);
    while w.len() > 1 && *w.0.last().unwrap() == 0 {
        w.0.pop();
    }
    if w.is_empty() {
        w.push(0);
    }
    Ok(w)
}

/// Letter `j` of `σ^k(i)` as `ψ(j)·i` in the padded machine.
pub fn letter_at(s: &Substitution, pad: &PaddingSpec, k: usize, j: u128) -> Result<usize> {
    s.check_fixed_point()?;
    let len = s.image_length(k, s.initial);
    if j >= len {
        return Err(Error::IndexOutOfRange { index: j, len });
    }
    let pm = to_padded_machine(s, pad)?;
    let w = psi(&pm, j)?;
    let letter = pm.machine.left_action(&w, pm.machine.initial())?;
    debug_assert_ne!(letter, pm.sink);
    Ok(letter)
}

/// A substitution produced by [`minimize_substitution`], with the padding
/// that reproduces its digit machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizedSubstitution {
    pub substitution: Substitution,
    pub padding: PaddingSpec,
    /// For each letter of the input reachable from `i`, its new letter.
    pub class_of: Vec<Option<usize>>,
    pub note: String,
}

/// Merges letters whose digit machine states cannot be told apart by any
/// digit word, via the bidual of the (padded) digit machine.
pub fn minimize_substitution(s: &Substitution, pad: &PaddingSpec) -> Result<MinimizedSubstitution> {
    s.check_fixed_point()?;
    pad.validate(s)?;
    let constant = s.is_constant_length();
    let (machine, sink) = if constant {
        (s.constant_machine()?, None)
    } else {
        let pm = to_padded_machine(s, pad)?;
        (pm.machine, Some(pm.sink))
    };
    let bd = bidual_with_classes(&machine);
    let b = &bd.machine;

    let sink_class = sink.and_then(|z| {
        let trimmed = bd.trimmed.state_index(machine.state_name(z))?;
        Some(bd.class_of[trimmed])
    });
    let mut new_index = vec![None; b.state_count()];
    let mut count = 0;
    for (c, slot) in new_index.iter_mut().enumerate() {
        if Some(c) != sink_class {
            *slot = Some(count);
            count += 1;
        }
    }

    // Name each new letter after the first original letter in its class.
    let mut names = vec![None; b.state_count()];
    for (t, &c) in bd.class_of.iter().enumerate() {
        if names[c].is_none() {
            names[c] = Some(bd.trimmed.state_name(t).to_string());
        }
    }

    let mut letters = Vec::with_capacity(count);
    let mut rules = Vec::with_capacity(count);
    let mut templates = Vec::with_capacity(count);
    let mut projection = Vec::with_capacity(count);
    for c in 0..b.state_count() {
        if Some(c) == sink_class {
            continue;
        }
        letters.push(names[c].clone().expect("every class has a member"));
        let mut image = Vec::new();
        let mut template = Vec::new();
        for &t in b.row(c) {
            match new_index[t] {
                Some(x) => {
                    image.push(x);
                    template.push(Cell::Slot);
                }
                None => template.push(Cell::Omega),
            }
        }
        rules.push(image);
        templates.push(template);
        let out = b.output(c);
        projection.push(
            s.outputs
                .iter()
                .position(|o| o == out)
                .expect("live classes carry declared outputs"),
        );
    }
    let initial = new_index[b.initial()].expect("initial class is live");
    let substitution = Substitution::new(letters, rules, s.outputs.clone(), projection, initial)?;

    let mut class_of = vec![None; s.letters.len()];
    for (t, &c) in bd.class_of.iter().enumerate() {
        if let Some(a) = s.letter_index(bd.trimmed.state_name(t)) {
            class_of[a] = new_index[c];
        }
    }
    let reachable = class_of.iter().filter(|c| c.is_some()).count();
    let note = format!(
        "{}; {} reachable letters -> {}",
        if constant { "constant-length path" } else { "padded path" },
        reachable,
        count
    );
    Ok(MinimizedSubstitution {
        substitution,
        padding: PaddingSpec::from_templates(templates),
        class_of,
        note,
    })
}

/// A parsed `.subst` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstFile {
    pub substitution: Substitution,
    pub padding: PaddingSpec,
}

/// Parses a `.subst` file:
///
/// ```text
/// subst v1
/// letters <id> <id> ...
/// outputs <sym> ...
/// initial <id>
/// rule <id> -> <id> <id> ...
/// out <id> <sym>
/// pad <id> <template>
/// ```
pub fn parse_subst(text: &str) -> Result<SubstFile> {
    let lines = lines(text);
    expect_header(&lines, "subst")?;
    let mut letters: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut rules: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut outs: Vec<(usize, String, String)> = Vec::new();
    let mut pads: Vec<(usize, String, String)> = Vec::new();

    let dup = |line: usize, what: String| -> Error { ParseError::Duplicate { line, what }.into() };

    for line in &lines[1..] {
        match line.keyword() {
            "letters" | "outputs" => {
                let list: Vec<String> = line.args().map(str::to_string).collect();
                if list.is_empty() {
                    return Err(line.syntax(0, format!("`{}` needs at least one entry", line.keyword())).into());
                }
                for (k, x) in list.iter().enumerate() {
                    if list[..k].contains(x) {
                        return Err(dup(line.number, format!("`{x}`")));
                    }
                }
                let target = if line.keyword() == "letters" { &mut letters } else { &mut outputs };
                if target.is_some() {
                    return Err(dup(line.number, format!("`{}` declaration", line.keyword())));
                }
                *target = Some(list);
            }
            "initial" => {
                line.arity(1)?;
                if initial.is_some() {
                    return Err(dup(line.number, "`initial` declaration".into()));
                }
                initial = Some((line.number, line.tokens[1].1.to_string()));
            }
            "rule" => {
                if line.tokens.len() < 3 || line.tokens[2].1 != "->" {
                    return Err(line.syntax(2, "expected `rule <id> -> <id> ...`").into());
                }
                let image: Vec<String> = line.tokens[3..].iter().map(|t| t.1.to_string()).collect();
                if image.is_empty() {
                    return Err(ParseError::EmptyImage {
                        line: line.number,
                        letter: line.tokens[1].1.to_string(),
                    }
                    .into());
                }
                rules.push((line.number, line.tokens[1].1.to_string(), image));
            }
            "out" => {
                line.arity(2)?;
                outs.push((line.number, line.tokens[1].1.to_string(), line.tokens[2].1.to_string()));
            }
            "pad" => {
                if line.tokens.len() < 3 {
                    return Err(line.syntax(1, "expected `pad <id> <template>`").into());
                }
                let template: String = line.tokens[2..].iter().map(|t| t.1).collect();
                pads.push((line.number, line.tokens[1].1.to_string(), template));
            }
            other => return Err(line.syntax(0, format!("unknown keyword `{other}`")).into()),
        }
    }

    let letters = letters.ok_or(ParseError::Missing("`letters`"))?;
    let outputs = outputs.ok_or(ParseError::Missing("`outputs`"))?;
    let (initial_line, initial_id) = initial.ok_or(ParseError::Missing("`initial`"))?;
    let letter_index: HashMap<&str, usize> =
        letters.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
    let unknown_letter = |line: usize, token: &str| -> Error {
        ParseError::Unknown {
            line,
            kind: "letter",
            token: token.to_string(),
        }
        .into()
    };
    let letter = |line: usize, token: &str| letter_index.get(token).copied().ok_or_else(|| unknown_letter(line, token));

    let mut images: Vec<Option<Vec<usize>>> = vec![None; letters.len()];
    for (line, id, image) in &rules {
        let a = letter(*line, id)?;
        if images[a].is_some() {
            return Err(dup(*line, format!("rule for `{id}`")));
        }
        images[a] = Some(image.iter().map(|t| letter(*line, t)).collect::<Result<_>>()?);
    }
    let mut projection: Vec<Option<usize>> = vec![None; letters.len()];
    for (line, id, sym) in &outs {
        let a = letter(*line, id)?;
        if projection[a].is_some() {
            return Err(dup(*line, format!("output for `{id}`")));
        }
        let o = outputs.iter().position(|x| x == sym).ok_or_else(|| -> Error {
            ParseError::Unknown {
                line: *line,
                kind: "output",
                token: sym.clone(),
            }
            .into()
        })?;
        projection[a] = Some(o);
    }
    let initial = letter(initial_line, &initial_id)?;
    let images = images
        .into_iter()
        .zip(&letters)
        .map(|(img, l)| img.ok_or_else(|| ParseError::Invalid(format!("no rule for letter `{l}`")).into()))
        .collect::<Result<Vec<_>>>()?;
    let projection = projection
        .into_iter()
        .zip(&letters)
        .map(|(o, l)| o.ok_or_else(|| ParseError::Invalid(format!("no output for letter `{l}`")).into()))
        .collect::<Result<Vec<_>>>()?;

    let substitution = Substitution::new(letters.clone(), images, outputs, projection, initial)?;
    let mut padding = PaddingSpec::trailing(&substitution);
    let mut padded = vec![false; substitution.letters.len()];
    for (line, id, template) in &pads {
        let a = letter(*line, id)?;
        if padded[a] {
            return Err(dup(*line, format!("pad for `{id}`")));
        }
        padded[a] = true;
        let t = PaddingSpec::parse_template(template).ok_or_else(|| -> Error {
            ParseError::Syntax {
                line: *line,
                column: 1,
                message: format!("bad template `{template}` (use `_` and `w`)"),
            }
            .into()
        })?;
        padding.templates[a] = t;
    }
    padding.validate(&substitution)?;
    Ok(SubstFile {
        substitution,
        padding,
    })
}

pub fn parse_substitution(text: &str) -> Result<Substitution> {
    parse_subst(text).map(|f| f.substitution)
}

/// Canonical `.subst` text; `pad` lines only for non-trailing templates.
pub fn emit_subst(s: &Substitution, pad: &PaddingSpec) -> String {
    let mut out = String::from("subst v1\n");
    let _ = writeln!(out, "letters {}", s.letters.join(" "));
    let _ = writeln!(out, "outputs {}", s.outputs.join(" "));
    let _ = writeln!(out, "initial {}", s.letters[s.initial]);
    for (a, image) in s.rules.iter().enumerate() {
        let names: Vec<&str> = image.iter().map(|&b| s.letters[b].as_str()).collect();
        let _ = writeln!(out, "rule {} -> {}", s.letters[a], names.join(" "));
    }
    for a in 0..s.letters.len() {
        let _ = writeln!(out, "out {} {}", s.letters[a], s.project(a));
    }
    let trailing = PaddingSpec::trailing(s);
    for a in 0..s.letters.len() {
        if pad.templates[a] != trailing.templates[a] {
            let _ = writeln!(out, "pad {} {}", s.letters[a], PaddingSpec::render_template(&pad.templates[a]));
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn fibonacci() -> Substitution {
        Substitution::from_rules(&[("a", "ab"), ("b", "a")], &[("a", "0"), ("b", "1")], "a").unwrap()
    }

    /// The constant-length substitution read off the worked example's table.
    pub(crate) fn example_subst() -> Substitution {
        Substitution::from_rules(
            &[("i", "ia"), ("a", "bi"), ("b", "ba")],
            &[("i", "0"), ("a", "1"), ("b", "0")],
            "i",
        )
        .unwrap()
    }

    pub(crate) fn thue_morse_3() -> Substitution {
        Substitution::from_rules(
            &[("i", "ia"), ("a", "bi"), ("b", "ai")],
            &[("i", "0"), ("a", "1"), ("b", "1")],
            "i",
        )
        .unwrap()
    }

    const FIB: &str = "subst v1\nletters a b\noutputs 0 1\ninitial a\nrule a -> a b\nrule b -> a\nout a 0\nout b 1\n";

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn parse_fibonacci() {
        let f = parse_subst(FIB).unwrap();
        assert_eq!(f.substitution, fibonacci());
        assert_eq!(f.substitution.q(), 2);
        assert_eq!(f.padding, PaddingSpec::trailing(&fibonacci()));
        assert_eq!(emit_subst(&f.substitution, &f.padding), FIB);
    }

    #[test]
    fn parse_errors() {
        let e = parse_subst(&FIB.replace("rule b -> a", "rule b -> c")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Unknown { kind: "letter", line: 6, .. })));
        let e = parse_subst(&FIB.replace("rule b -> a", "rule b ->")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::EmptyImage { .. })));
        let e = parse_subst(&FIB.replace("rule b -> a\n", "")).unwrap_err();
        assert!(e.to_string().contains("no rule"));
        let e = parse_subst(&FIB.replace("out b 1", "out b 2")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Unknown { kind: "output", .. })));
        let e = parse_subst(&format!("{FIB}pad b w\n")).unwrap_err();
        assert!(matches!(e, Error::TemplateMismatch { .. }));
        assert!(parse_subst(&FIB.replace("rule b -> a", "rule b = a")).is_err());
        assert!(parse_subst(&FIB.replace("letters a b", "letters a ω")).is_err());
    }

    #[test]
    fn pad_lines_round_trip() {
        let f = parse_subst(&format!("{FIB}pad b w_\n")).unwrap();
        assert_eq!(f.padding.template(1), [Cell::Omega, Cell::Slot]);
        let text = emit_subst(&f.substitution, &f.padding);
        assert!(text.ends_with("pad b w_\n"));
        assert_eq!(parse_subst(&text).unwrap(), f);
    }

    #[test]
    fn apply_concatenates_images() {
        let s = example_subst();
        let ia = s.parse_letters("ia").unwrap();
        assert_eq!(s.render_letters(&s.apply(&ia).unwrap()), "iabi");
        assert!(s.apply(&[]).unwrap().is_empty());
        let f = fibonacci();
        assert_eq!(f.render_letters(&f.apply(&f.parse_letters("ab").unwrap()).unwrap()), "aba");
        assert_eq!(f.apply(&[5]), Err(Error::UnknownLetter("5".into())));
        assert!(f.parse_letters("abz").is_err());
    }

    #[test]
    fn fixed_point_prefixes() {
        let f = fibonacci();
        assert_eq!(f.render_letters(&f.expand_fixed_point(5).unwrap()), "abaab");
        let s = example_subst();
        assert_eq!(s.render_letters(&s.expand_fixed_point(8).unwrap()), "iabibaia");
        assert_eq!(s.expand_projected(8).unwrap().concat(), "01000101");
        let bad = Substitution::from_rules(&[("i", "ai"), ("a", "a")], &[("i", "0"), ("a", "0")], "i").unwrap();
        assert_eq!(bad.expand_fixed_point(3), Err(Error::NoFixedPoint));
        let stuck = Substitution::from_rules(&[("i", "i")], &[("i", "0")], "i").unwrap();
        assert_eq!(stuck.expand_fixed_point(3), Err(Error::NoFixedPoint));
    }

    #[test]
    fn image_lengths_by_counting() {
        let f = fibonacci();
        let lengths: Vec<u128> = (0..8).map(|k| f.image_length(k, 0)).collect();
        assert_eq!(lengths, [1, 2, 3, 5, 8, 13, 21, 34]);
        for k in 0..10 {
            assert_eq!(f.image_length(k, 1) as usize, f.iterate(k, 1).len());
        }
    }

    #[test]
    fn padded_fibonacci() {
        let f = fibonacci();
        let pm = to_padded_machine(&f, &PaddingSpec::trailing(&f)).unwrap();
        let m = &pm.machine;
        assert_eq!(pm.sink, 2);
        assert_eq!(m.row(0), &[0, 1]);
        assert_eq!(m.row(1), &[0, 2]);
        assert_eq!(m.row(2), &[2, 2]);
        assert_eq!(m.output(2), SINK_OUTPUT);

        let front = PaddingSpec::trailing(&f).with_template(1, vec![Cell::Omega, Cell::Slot]);
        let pm = to_padded_machine(&f, &front).unwrap();
        assert_eq!(pm.machine.row(1), &[2, 0]);

        let bad = PaddingSpec::trailing(&f).with_template(1, vec![Cell::Slot, Cell::Slot]);
        assert!(matches!(to_padded_machine(&f, &bad), Err(Error::TemplateMismatch { .. })));
    }

    #[test]
    fn constant_length_sink_unreachable() {
        let s = example_subst();
        let pm = to_padded_machine(&s, &PaddingSpec::trailing(&s)).unwrap();
        assert!(pm.machine.trim().state_index(SINK_STATE).is_none());
        for a in 0..3 {
            assert!(pm.machine.row(a).iter().all(|&t| t != pm.sink));
        }
    }

    #[test]
    fn letters_from_digits() {
        let s = example_subst();
        assert_eq!(letter_at_constant(&s, 2, 0, 2).unwrap(), 2);
        assert_eq!(letter_at_constant(&s, 3, 0, 5).unwrap(), 1);
        assert_eq!(letter_at_constant(&s, 4, 0, 0).unwrap(), 0);
        assert_eq!(letter_at_constant(&s, 0, 1, 0).unwrap(), 1);
        assert_eq!(
            letter_at_constant(&s, 2, 0, 4),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        );
        assert_eq!(letter_at_constant(&fibonacci(), 2, 0, 0), Err(Error::NotConstantLength));
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(&w("0"), 2).unwrap(), 0);
        assert_eq!(phi(&w("01"), 2).unwrap(), 2);
        assert_eq!(phi(&w("101"), 2).unwrap(), 5);
        assert_eq!(phi(&w("0100"), 2).unwrap(), 2);
        assert_eq!(phi(&Word::empty(), 2), Err(Error::EmptyWord));
        assert_eq!(phi(&w("012"), 2), Err(Error::DigitOutOfRange { digit: 2, base: 2 }));
    }

    #[test]
    fn psi_on_fibonacci() {
        let f = fibonacci();
        let pm = to_padded_machine(&f, &PaddingSpec::trailing(&f)).unwrap();
        let expect = ["0", "1", "01", "001", "101", "0001", "1001", "0101"];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(psi(&pm, n as u128).unwrap(), w(e), "rank {n}");
            assert_eq!(psi_by_enumeration(&pm, n as u128, 1000).unwrap(), w(e));
        }
        assert!(matches!(
            psi_by_enumeration(&pm, 100, 10),
            Err(Error::SearchExhausted { .. })
        ));
    }

    #[test]
    fn psi_requires_zero_loop_on_initial() {
        let f = fibonacci();
        let pad = PaddingSpec::trailing(&f).with_template(1, vec![Cell::Omega, Cell::Slot]);
        let pm = to_padded_machine(&f, &pad).unwrap();
        assert!(psi(&pm, 0).is_ok());
        let s = Substitution::from_rules(&[("i", "ai"), ("a", "ia")], &[("i", "0"), ("a", "1")], "i").unwrap();
        let pm = to_padded_machine(&s, &PaddingSpec::trailing(&s)).unwrap();
        assert_eq!(psi(&pm, 0), Err(Error::NoFixedPoint));
        assert_eq!(psi_by_enumeration(&pm, 0, 10), Err(Error::NoFixedPoint));
    }

    #[test]
    fn psi_with_sparse_languages() {
        // q = 3, a: (ω, ω, a); accepted values read most significant digit first.
        let s = Substitution::from_rules(&[("i", "iaa"), ("a", "a")], &[("i", "0"), ("a", "1")], "i").unwrap();
        let pad = PaddingSpec::trailing(&s).with_template(1, vec![Cell::Omega, Cell::Omega, Cell::Slot]);
        let pm = to_padded_machine(&s, &pad).unwrap();
        for n in 0..16 {
            assert_eq!(psi(&pm, n).unwrap(), psi_by_enumeration(&pm, n, 100_000).unwrap());
        }
        assert_eq!(psi(&pm, 3).unwrap(), w("21"));

        // b: (b, ω); accepted values are 0 and the powers of two.
        let s = Substitution::from_rules(&[("i", "ib"), ("b", "b")], &[("i", "0"), ("b", "1")], "i").unwrap();
        let pad = PaddingSpec::trailing(&s).with_template(1, vec![Cell::Slot, Cell::Omega]);
        let pm = to_padded_machine(&s, &pad).unwrap();
        assert_eq!(psi(&pm, 1).unwrap(), w("1"));
        assert_eq!(psi(&pm, 2).unwrap(), w("01"));
        assert_eq!(psi(&pm, 5).unwrap(), w("00001"));
        assert!(matches!(psi_by_enumeration(&pm, 30, 1000), Err(Error::SearchExhausted { .. })));
    }

    #[test]
    fn letter_at_fibonacci() {
        let f = fibonacci();
        let pad = PaddingSpec::trailing(&f);
        assert_eq!(letter_at(&f, &pad, 3, 4).unwrap(), 1);
        assert_eq!(letter_at(&f, &pad, 0, 0).unwrap(), 0);
        assert_eq!(letter_at(&f, &pad, 9, 0).unwrap(), 0);
        assert_eq!(letter_at(&f, &pad, 3, 5), Err(Error::IndexOutOfRange { index: 5, len: 5 }));
    }

    #[test]
    fn minimize_thue_morse() {
        let s = thue_morse_3();
        let min = minimize_substitution(&s, &PaddingSpec::trailing(&s)).unwrap();
        let t = &min.substitution;
        assert_eq!(t.letters(), ["i", "a"]);
        assert_eq!(t.render_letters(t.image(0)), "ia");
        assert_eq!(t.render_letters(t.image(1)), "ai");
        assert_eq!(t.project(0), "0");
        assert_eq!(t.project(1), "1");
        assert_eq!(min.class_of, [Some(0), Some(1), Some(1)]);
        assert!(min.note.starts_with("constant-length path"));
        assert_eq!(t.expand_projected(8).unwrap().concat(), "01101001");
    }

    #[test]
    fn minimize_fibonacci_is_identity() {
        let f = fibonacci();
        let min = minimize_substitution(&f, &PaddingSpec::trailing(&f)).unwrap();
        assert_eq!(min.substitution, f);
        assert_eq!(min.padding, PaddingSpec::trailing(&f));
        assert!(min.note.starts_with("padded path"));
    }

    #[test]
    fn duplicate_letters_merge() {
        let s = Substitution::from_rules(
            &[("a", "abc"), ("b", "a"), ("c", "a")],
            &[("a", "0"), ("b", "1"), ("c", "1")],
            "a",
        )
        .unwrap();
        let min = minimize_substitution(&s, &PaddingSpec::trailing(&s)).unwrap();
        assert_eq!(min.substitution.letters(), ["a", "b"]);
        assert_eq!(min.class_of, [Some(0), Some(1), Some(1)]);
        assert_eq!(min.substitution.render_letters(min.substitution.image(0)), "abb");
        let a = s.expand_projected(200).unwrap();
        let b = min.substitution.expand_projected(200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn digit_words() {
        assert_eq!(digits(5, 2, 3), w("101"));
        assert_eq!(digits(2, 2, 4), w("0100"));
        assert_eq!(digits(0, 3, 0), Word::empty());
        assert_eq!(digits(7, 2, 1), w("111"));
    }
}
