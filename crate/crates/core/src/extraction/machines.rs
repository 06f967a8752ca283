//! Hand-built reference machines for the three example languages.

use crate::alphabet::Alphabet;

use super::pda::{DiscretePda, StackAction};

fn readings(n: usize) -> impl Iterator<Item = Option<usize>> {
    std::iter::once(None).chain((0..n).map(Some))
}

/// Balanced parentheses over `1` (open), `0` (close) and end marker `e`.
/// State 2 is inside a nest, state 3 is the rejecting sink after a stray
/// close, state 4 accepts.
pub fn paren_pda() -> DiscretePda {
    use StackAction::*;
    let a = Alphabet::new(&["1", "0", "e"], Some("e")).expect("valid alphabet");
    let mut p = DiscretePda::with_numbered_states(a, 4, 0).expect("valid machine");
    let (one, zero, e) = (0, 1, 2);
    let rules = [
        (0, one, None, 1, Push),
        (0, zero, None, 2, Pop),
        (0, e, None, 3, NoOp),
        (1, one, None, 1, Push),
        (1, one, Some(one), 1, Push),
        (1, zero, Some(one), 1, Pop),
        (1, zero, None, 2, Pop),
        (1, e, None, 3, NoOp),
        (1, e, Some(one), 2, NoOp),
    ];
    for (q, l, r, t, act) in rules {
        p.add_rule(q, l, r, t, act).expect("deterministic");
    }
    p.set_accept(3, true);
    p
}

/// `w c reverse(w)` over `{a, b}` with centre `c`. State 1 reads the first
/// half, state 2 matches the second half, state 3 absorbs everything else.
pub fn palindrome_pda() -> DiscretePda {
    use StackAction::*;
    let a = Alphabet::new(&["a", "b", "c"], None).expect("valid alphabet");
    let mut p = DiscretePda::with_numbered_states(a, 3, 0).expect("valid machine");
    let (sa, sb, sc) = (0, 1, 2);
    for r in readings(3) {
        p.add_rule(0, sa, r, 0, Push).unwrap();
        p.add_rule(0, sb, r, 0, Push).unwrap();
        p.add_rule(0, sc, r, 1, NoOp).unwrap();
        for l in [sa, sb, sc] {
            p.add_rule(2, l, r, 2, Push).unwrap();
            let matched = r == Some(l) && l != sc;
            if matched {
                p.add_rule(1, l, r, 1, Pop).unwrap();
            } else {
                p.add_rule(1, l, r, 2, Push).unwrap();
            }
        }
    }
    p.set_accept(1, true);
    p
}

/// `1^n 0^n` machine with binary-vector state names in which two pairs of
/// states are behaviourally identical; reduction merges it to four states.
pub fn anbn_pda_unreduced() -> DiscretePda {
    use StackAction::*;
    let a = Alphabet::new(&["1", "0", "e"], Some("e")).expect("valid alphabet");
    let labels = ["10000", "11111", "10111", "00001", "00011", "10001"];
    let mut p = DiscretePda::new(a, labels.iter().map(|s| s.to_string()).collect(), 0)
        .expect("valid machine");
    let (one, zero, e) = (0, 1, 2);
    let rules = [
        (0, one, None, 1, Push),
        (0, zero, None, 3, Pop),
        (1, one, Some(one), 2, Push),
        (1, zero, Some(one), 3, Pop),
        (2, one, Some(one), 1, Push),
        (2, zero, Some(one), 4, Pop),
        (3, zero, Some(one), 4, Pop),
        (3, e, None, 5, NoOp),
        (4, zero, Some(one), 3, Pop),
        (4, e, None, 5, NoOp),
    ];
    for (q, l, r, t, act) in rules {
        p.add_rule(q, l, r, t, act).expect("deterministic");
    }
    p.set_accept(5, true);
    p
}
