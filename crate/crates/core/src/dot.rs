//! Graphviz export.

use std::fmt::Write as _;

use crate::machine::MooreMachine;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A `digraph` with one `name/output` node per state, a point-shaped start
/// marker pointing at the initial state, and one labelled edge per
/// transition, in state then letter order.
pub fn to_dot(m: &MooreMachine) -> String {
    let mut out = String::from("digraph moore {\n    rankdir=LR;\n    __start [shape=point];\n");
    for s in 0..m.state_count() {
        let _ = writeln!(
            out,
            "    s{s} [shape=circle, label={}];",
            quote(&format!("{}/{}", m.state_name(s), m.output(s)))
        );
    }
    let _ = writeln!(out, "    __start -> s{};", m.initial());
    for s in 0..m.state_count() {
        for j in 0..m.input_count() {
            let _ = writeln!(
                out,
                "    s{s} -> s{} [label={}];",
                m.delta(s, j),
                quote(&m.input_name(j))
            );
        }
    }
    out.push_str("}\n");
    out
}
