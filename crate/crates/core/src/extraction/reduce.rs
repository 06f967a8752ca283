use std::collections::BTreeMap;

use super::pda::{DiscretePda, Reading, StackAction};

/// `(input, reading, action, target)`
type Edge = (usize, Reading, StackAction, usize);

/// Drops states that are neither accepting nor trap-flagged and cannot reach
/// such a state, together with every rule touching them. A missing rule
/// rejects, so the language is unchanged. The start state is always kept.
fn prune_dead(pda: &DiscretePda) -> DiscretePda {
    let n = pda.n_states();
    let mut live: Vec<bool> = (0..n).map(|q| pda.is_accept(q) || pda.is_trap(q)).collect();
    loop {
        let mut changed = false;
        for (&(q, _, _), t) in pda.rules() {
            if live[t.target] && !live[q] {
                live[q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    live[pda.start()] = true;
    if live.iter().all(|&x| x) {
        return pda.clone();
    }
    let keep: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
    let mut id = vec![usize::MAX; n];
    for (i, &q) in keep.iter().enumerate() {
        id[q] = i;
    }
    let labels = keep.iter().map(|&q| pda.label(q).to_string()).collect();
    let mut out = DiscretePda::new(pda.alphabet().clone(), labels, id[pda.start()])
        .expect("subset of distinct labels");
    for &q in &keep {
        out.set_accept(id[q], pda.is_accept(q));
        out.set_trap(id[q], pda.is_trap(q));
    }
    for (&(q, l, r), t) in pda.rules() {
        if live[q] && live[t.target] {
            out.add_rule(id[q], l, r, id[t.target], t.action)
                .expect("rules of a deterministic machine");
        }
    }
    out
}

/// Removes dead states, then merges equivalent states by partition
/// refinement, treating each `(input, reading, action)` triple as a letter
/// of a finite automaton. Two states stay together iff they agree on
/// acceptance and trap flags and, for every triple, move to the same block
/// (or both lack the rule).
pub fn reduce_pda(pda: &DiscretePda) -> DiscretePda {
    let pruned = prune_dead(pda);
    let pda = &pruned;
    let n = pda.n_states();
    let mut block: Vec<usize> = {
        let mut ids = BTreeMap::new();
        (0..n)
            .map(|q| {
                let k = (pda.is_accept(q), pda.is_trap(q));
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect()
    };
    let mut per_state: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for (&(q, l, r), t) in pda.rules() {
        per_state[q].push((l, r, t.action, t.target));
    }

    loop {
        let mut ids: BTreeMap<(usize, Vec<Edge>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|q| {
                let sig: Vec<_> = per_state[q]
                    .iter()
                    .map(|&(l, r, a, t)| (l, r, a, block[t]))
                    .collect();
                let fresh = ids.len();
                *ids.entry((block[q], sig)).or_insert(fresh)
            })
            .collect();
        let stable = ids.len() == block.iter().max().map_or(0, |m| m + 1);
        block = next;
        if stable {
            break;
        }
    }

    // number blocks by first member so the output order follows the input
    let mut renumber = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (q, &b) in block.iter().enumerate() {
        let id = *renumber.entry(b).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[id].push(q);
    }
    let labels: Vec<String> = members
        .iter()
        .map(|m| {
            m.iter()
                .map(|&q| pda.label(q))
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    let bid = |q: usize| renumber[&block[q]];
    let mut out = DiscretePda::new(pda.alphabet().clone(), labels, bid(pda.start()))
        .expect("labels are distinct");
    for (id, m) in members.iter().enumerate() {
        out.set_accept(id, pda.is_accept(m[0]));
        out.set_trap(id, pda.is_trap(m[0]));
    }
    for (&(q, l, r), t) in pda.rules() {
        out.add_rule(bid(q), l, r, bid(t.target), t.action)
            .expect("equivalent states share their rules");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::machines::{anbn_pda_unreduced, palindrome_pda, paren_pda};
    use crate::extraction::pda::run_pda;
    use crate::grammars::enumerate_strings;

    #[test]
    fn anbn_reduces_to_four_states() {
        let p = anbn_pda_unreduced();
        let r = reduce_pda(&p);
        assert_eq!(r.n_states(), 4);
        let mut labels: Vec<&str> = r.labels().iter().map(String::as_str).collect();
        labels.sort();
        assert_eq!(labels, vec!["00001+00011", "10000", "10001", "11111+10111"]);
        for s in enumerate_strings(p.alphabet(), 10) {
            assert_eq!(run_pda(&p, &s).is_legal(), run_pda(&r, &s).is_legal());
        }
        assert!(reduce_pda(&r).is_isomorphic(&r));
    }

    #[test]
    fn dead_sinks_are_dropped() {
        for p in [paren_pda(), palindrome_pda()] {
            let r = reduce_pda(&p);
            assert_eq!(r.n_states(), p.n_states() - 1);
            assert!(reduce_pda(&r).is_isomorphic(&r));
            for s in enumerate_strings(p.alphabet(), 9) {
                assert_eq!(run_pda(&p, &s).is_legal(), run_pda(&r, &s).is_legal());
            }
        }
    }
}
