//! The line-oriented `.moore` text format.
//!
//! ```text
//! moore v1
//! inputs <q>                 # or: inputs <name0> <name1> ...
//! outputs <sym> <sym> ...
//! state <id> <output-sym>
//! initial <id>
//! trans <id> <input> <id>
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{ParseError, Result};
use crate::machine::MooreMachine;

/// A line with its comment stripped, split into `(column, token)` pairs.
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    pub fn syntax(&self, k: usize, message: impl Into<String>) -> ParseError {
        let column = self
            .tokens
            .get(k)
            .or(self.tokens.last())
            .map(|t| t.0)
            .unwrap_or(1);
        ParseError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    pub fn keyword(&self) -> &'a str {
        self.tokens[0].1
    }

    pub fn args(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.tokens[1..].iter().map(|t| t.1)
    }

    pub fn arity(&self, n: usize) -> Result<(), ParseError> {
        if self.tokens.len() == n + 1 {
            Ok(())
        } else {
            Err(self.syntax(
                self.tokens.len().min(n + 1),
                format!("`{}` takes {} argument(s)", self.keyword(), n),
            ))
        }
    }
}

/// Non-empty lines of `text` with `#` comments removed. Columns are 1-based
/// character positions.
pub(crate) fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (byte, c) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(byte),
                (true, Some(s)) => {
                    let column = body[..s].chars().count() + 1;
                    tokens.push((column, &body[s..byte]));
                    start = None;
                }
                _ => {}
            }
        }
        if !tokens.is_empty() {
            out.push(Line {
                number: k + 1,
                tokens,
            });
        }
    }
    out
}

pub(crate) fn expect_header(lines: &[Line<'_>], magic: &str) -> Result<(), ParseError> {
    match lines.first() {
        None => Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected `{magic} v1` header"),
        }),
        Some(l) if l.keyword() != magic => Err(l.syntax(0, format!("expected `{magic} v1` header"))),
        Some(l) => {
            l.arity(1)?;
            if l.tokens[1].1 != "v1" {
                return Err(l.syntax(1, format!("unsupported version `{}`", l.tokens[1].1)));
            }
            Ok(())
        }
    }
}

/// Parses a `.moore` file.
pub fn parse_machine(text: &str) -> Result<MooreMachine> {
    let lines = lines(text);
    expect_header(&lines, "moore")?;

    let mut input_count: Option<(usize, Option<Vec<String>>)> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut states: Vec<(String, String, usize)> = Vec::new();
    let mut trans: Vec<&Line<'_>> = Vec::new();

    for line in &lines[1..] {
        match line.keyword() {
            "inputs" => {
                if input_count.is_some() {
                    return Err(ParseError::Duplicate {
                        line: line.number,
                        what: "`inputs` declaration".into(),
                    }
                    .into());
                }
                let args: Vec<&str> = line.args().collect();
                if args.is_empty() {
                    return Err(line.syntax(0, "`inputs` needs a count or names").into());
                }
                let decl = match (args.len(), args[0].parse::<usize>()) {
                    (1, Ok(q)) => {
                        if q == 0 {
                            return Err(line.syntax(1, "input count must be positive").into());
                        }
                        (q, None)
                    }
                    _ => {
                        let names: Vec<String> = args.iter().map(|s| s.to_string()).collect();
                        for (k, n) in names.iter().enumerate() {
                            if names[..k].contains(n) {
                                return Err(ParseError::Duplicate {
                                    line: line.number,
                                    what: format!("input `{n}`"),
                                }
                                .into());
                            }
                        }
                        let plain = names.iter().enumerate().all(|(k, n)| *n == k.to_string());
                        (names.len(), (!plain).then_some(names))
                    }
                };
                input_count = Some(decl);
            }
            "outputs" => {
                if outputs.is_some() {
                    return Err(ParseError::Duplicate {
                        line: line.number,
                        what: "`outputs` declaration".into(),
                    }
                    .into());
                }
                let syms: Vec<String> = line.args().map(str::to_string).collect();
                if syms.is_empty() {
                    return Err(line.syntax(0, "`outputs` needs at least one symbol").into());
                }
                for (k, s) in syms.iter().enumerate() {
                    if syms[..k].contains(s) {
                        return Err(ParseError::Duplicate {
                            line: line.number,
                            what: format!("output `{s}`"),
                        }
                        .into());
                    }
                }
                outputs = Some(syms);
            }
            "state" => {
                line.arity(2)?;
                let id = line.tokens[1].1;
                if states.iter().any(|s| s.0 == id) {
                    return Err(ParseError::Duplicate {
                        line: line.number,
                        what: format!("state `{id}`"),
                    }
                    .into());
                }
                states.push((id.to_string(), line.tokens[2].1.to_string(), line.number));
            }
            "initial" => {
                line.arity(1)?;
                if initial.is_some() {
                    return Err(ParseError::Duplicate {
                        line: line.number,
                        what: "`initial` declaration".into(),
                    }
                    .into());
                }
                initial = Some((line.number, line.tokens[1].1.to_string()));
            }
            "trans" => {
                line.arity(3)?;
                trans.push(line);
            }
            other => {
                return Err(line.syntax(0, format!("unknown keyword `{other}`")).into());
            }
        }
    }

    let (q, input_names) = input_count.ok_or(ParseError::Missing("`inputs`"))?;
    let outputs = outputs.ok_or(ParseError::Missing("`outputs`"))?;
    if states.is_empty() {
        return Err(ParseError::Missing("`state`").into());
    }
    let (initial_line, initial_id) = initial.ok_or(ParseError::Missing("`initial`"))?;

    let state_index: HashMap<&str, usize> = states
        .iter()
        .enumerate()
        .map(|(k, s)| (s.0.as_str(), k))
        .collect();
    let output_index: HashMap<&str, usize> = outputs
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_str(), k))
        .collect();
    let input_index: HashMap<String, usize> = match &input_names {
        Some(names) => names.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect(),
        None => (0..q).map(|k| (k.to_string(), k)).collect(),
    };

    let output_map = states
        .iter()
        .map(|(_, sym, line)| {
            output_index.get(sym.as_str()).copied().ok_or(ParseError::Unknown {
                line: *line,
                kind: "output",
                token: sym.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let initial = *state_index
        .get(initial_id.as_str())
        .ok_or(ParseError::Unknown {
            line: initial_line,
            kind: "state",
            token: initial_id.clone(),
        })?;

    let n = states.len();
    let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; q]; n];
    for line in trans {
        let lookup_state = |tok: &str| {
            state_index.get(tok).copied().ok_or(ParseError::Unknown {
                line: line.number,
                kind: "state",
                token: tok.to_string(),
            })
        };
        let from = lookup_state(line.tokens[1].1)?;
        let input = *input_index
            .get(line.tokens[2].1)
            .ok_or(ParseError::Unknown {
                line: line.number,
                kind: "input",
                token: line.tokens[2].1.to_string(),
            })?;
        let to = lookup_state(line.tokens[3].1)?;
        let slot = &mut table[from][input];
        if slot.is_some() {
            return Err(ParseError::Duplicate {
                line: line.number,
                what: format!("transition ({}, {})", line.tokens[1].1, line.tokens[2].1),
            }
            .into());
        }
        *slot = Some(to);
    }

    let mut transition = Vec::with_capacity(n);
    for (s, row) in table.into_iter().enumerate() {
        let mut full = Vec::with_capacity(q);
        for (j, t) in row.into_iter().enumerate() {
            full.push(t.ok_or_else(|| ParseError::MissingTransition {
                state: states[s].0.clone(),
                input: match &input_names {
                    Some(names) => names[j].clone(),
                    None => j.to_string(),
                },
            })?);
        }
        transition.push(full);
    }

    MooreMachine::new(
        states.into_iter().map(|s| s.0).collect(),
        q,
        outputs,
        transition,
        output_map,
        initial,
    )?
    .with_input_names(input_names)
}

/// Canonical `.moore` text.
pub fn emit_machine(m: &MooreMachine) -> String {
    emit_annotated(m, |_| None)
}

/// Canonical `.moore` text with an optional trailing comment per `state` line.
pub fn emit_annotated(m: &MooreMachine, note: impl Fn(usize) -> Option<String>) -> String {
    let mut out = String::from("moore v1\n");
    match m.input_names() {
        Some(names) => {
            let _ = writeln!(out, "inputs {}", names.join(" "));
        }
        None => {
            let _ = writeln!(out, "inputs {}", m.input_count());
        }
    }
    let _ = writeln!(out, "outputs {}", m.outputs().join(" "));
    for s in 0..m.state_count() {
        let _ = write!(out, "state {} {}", m.state_name(s), m.output(s));
        if let Some(n) = note(s) {
            let _ = write!(out, "  # {n}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "initial {}", m.state_name(m.initial()));
    for s in 0..m.state_count() {
        for j in 0..m.input_count() {
            let _ = writeln!(
                out,
                "trans {} {} {}",
                m.state_name(s),
                m.input_name(j),
                m.state_name(m.delta(s, j))
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::machine::tests::example;

    const EXAMPLE: &str = "\
moore v1
inputs 2
outputs 0 1
state i 0
state a 1
state b 0
initial i
trans i 0 i
trans i 1 a
trans a 0 b
trans a 1 i
trans b 0 b
trans b 1 a
";

    #[test]
    fn parses_example() {
        let m = parse_machine(EXAMPLE).unwrap();
        assert_eq!(m.state_count(), 3);
        assert_eq!(m.input_count(), 2);
        assert_eq!(m, example());
    }

    #[test]
    fn emits_canonical_text() {
        assert_eq!(emit_machine(&example()), EXAMPLE);
    }

    #[test]
    fn accepts_any_line_order_and_comments() {
        let text = "# header follows\nmoore v1\ntrans s 1 s # loop\noutputs x\ninitial s\n\nstate s x\ninputs 2\ntrans s 0 s\n";
        let m = parse_machine(text).unwrap();
        let once = emit_machine(&m);
        assert_eq!(emit_machine(&parse_machine(&once).unwrap()), once);
        assert_eq!(
            once,
            "moore v1\ninputs 2\noutputs x\nstate s x\ninitial s\ntrans s 0 s\ntrans s 1 s\n"
        );
    }

    #[test]
    fn one_state_file() {
        let m = MooreMachine::from_tokens(&["s"], 1, &["0"], &[&[0]], &["0"], 0).unwrap();
        let text = emit_machine(&m);
        assert_eq!(text, "moore v1\ninputs 1\noutputs 0\nstate s 0\ninitial s\ntrans s 0 s\n");
        assert_eq!(parse_machine(&text).unwrap(), m);
    }

    #[test]
    fn named_inputs() {
        let text = "moore v1\ninputs lo hi\noutputs 0 1\nstate s 0\nstate t 1\ninitial s\ntrans s lo t\ntrans s hi s\ntrans t lo t\ntrans t hi s\n";
        let m = parse_machine(text).unwrap();
        assert_eq!(m.delta(0, 0), 1);
        assert_eq!(m.input_names().unwrap(), ["lo", "hi"]);
        assert_eq!(emit_machine(&m), text);
        // names equal to indices are the unnamed form
        let plain = parse_machine(&text.replace("lo", "0").replace("hi", "1")).unwrap();
        assert!(plain.input_names().is_none());
    }

    #[test]
    fn missing_transition() {
        let text: String = EXAMPLE
            .lines()
            .filter(|l| !l.starts_with("trans b"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = parse_machine(&text).unwrap_err();
        assert!(matches!(err, Error::Parse(ParseError::MissingTransition { ref state, .. }) if state == "b"));
        assert!(err.to_string().contains("missing transition"));
    }

    #[test]
    fn errors() {
        let e = parse_machine("moore v2\n").unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Syntax { line: 1, column: 7, .. })));
        let e = parse_machine(&EXAMPLE.replace("trans b 1 a", "trans b 1 z")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Unknown { kind: "state", line: 13, .. })));
        let e = parse_machine(&EXAMPLE.replace("state a 1", "state a 7")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Unknown { kind: "output", .. })));
        let e = parse_machine(&EXAMPLE.replace("state b 0", "state b 0\nstate a 0")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Duplicate { .. })));
        let e = parse_machine(&format!("{EXAMPLE}trans i 0 b\n")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Duplicate { .. })));
        let e = parse_machine(&EXAMPLE.replace("trans i 0 i", "trans i 0")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Syntax { line: 8, .. })));
        let e = parse_machine(&EXAMPLE.replace("initial i", "start i")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Syntax { line: 7, column: 1, .. })));
        let e = parse_machine(&EXAMPLE.replace("trans a 1 i", "trans a 2 i")).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError::Unknown { kind: "input", .. })));
        assert!(parse_machine("").is_err());
    }
}
