use std::fmt::Write as _;

use super::pda::DiscretePda;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Accept states are double circles, trap states are
/// grey, and an invisible point node marks the start. Edges are labelled
/// `(input, reading, action)` with the empty stack shown as φ.
pub fn export_dot(pda: &DiscretePda) -> String {
    let mut out = String::from(
        "digraph pda {\n  rankdir=LR;\n  node [shape=circle];\n  start [shape=point];\n",
    );
    for q in 0..pda.n_states() {
        let mut attrs = vec![format!("label=\"{}\"", escape(pda.label(q)))];
        if pda.is_accept(q) {
            attrs.push("shape=doublecircle".into());
        }
        if pda.is_trap(q) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=lightgrey".into());
        }
        let _ = writeln!(out, "  s{q} [{}];", attrs.join(", "));
    }
    let _ = writeln!(out, "  start -> s{};", pda.start());
    for (&(q, l, r), t) in pda.rules() {
        let reading = match r {
            Some(k) => pda.alphabet().symbol(k).to_string(),
            None => "φ".to_string(),
        };
        let _ = writeln!(
            out,
            "  s{q} -> s{} [label=\"({}, {}, {})\"];",
            t.target,
            escape(pda.alphabet().symbol(l)),
            escape(&reading),
            t.action.value()
        );
    }
    out.push_str("}\n");
    out
}
