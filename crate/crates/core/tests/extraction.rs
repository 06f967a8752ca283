use nnpda::extraction::machines::{anbn_pda_unreduced, palindrome_pda, paren_pda};
use nnpda::*;

fn equivalent(p: &DiscretePda, q: &DiscretePda, max_len: usize) -> bool {
    enumerate_strings(p.alphabet(), max_len)
        .all(|s| run_pda(p, &s).is_legal() == run_pda(q, &s).is_legal())
}

fn constructed(pda: &DiscretePda, order: Order) -> WeightSet {
    let shape = NetworkShape::new(pda.n_states() + 1, pda.alphabet().len(), true).unwrap();
    let opts = ConstructOptions {
        order,
        ..Default::default()
    };
    construct_from_pda(pda, &shape, &opts).unwrap()
}

#[test]
fn reference_machines_accept_their_languages() {
    for (g, p) in [
        (Grammar::Paren, paren_pda()),
        (Grammar::Anbn, anbn_pda_unreduced()),
        (Grammar::Palindrome, palindrome_pda()),
    ] {
        for s in enumerate_strings(p.alphabet(), 12) {
            assert_eq!(
                run_pda(&p, &s).is_legal(),
                g.accepts(&s),
                "{g} {}",
                p.alphabet().render(&s)
            );
        }
    }
}

#[test]
fn reduction_merges_duplicate_states() {
    let p = anbn_pda_unreduced();
    let r = reduce_pda(&p);
    assert_eq!(r.n_states(), 4);
    assert!(equivalent(&p, &r, 12));
    assert!(reduce_pda(&r).is_isomorphic(&r));
}

#[test]
fn text_round_trip() {
    for p in [paren_pda(), palindrome_pda(), anbn_pda_unreduced()] {
        let back = DiscretePda::parse(&p.to_text()).unwrap();
        assert!(back.is_isomorphic(&p));
        assert_eq!(back.to_text(), p.to_text());
    }
}

#[test]
fn dot_lists_every_state() {
    let p = paren_pda();
    let dot = export_dot(&p);
    assert!(dot.starts_with("digraph"));
    for l in p.labels() {
        assert!(dot.contains(l.as_str()));
    }
}

#[test]
fn both_constructions_extract_back() {
    for p in [paren_pda(), palindrome_pda(), anbn_pda_unreduced()] {
        for order in [Order::Third, Order::FullOrderAction] {
            let w = constructed(&p, order);
            let x = extract_pda(&w, p.alphabet(), &ExtractOptions::default()).unwrap();
            assert!(equivalent(&reduce_pda(&x), &p, 9));
        }
    }
}

#[test]
fn five_level_and_kmeans_agree_on_saturated_nets() {
    let p = paren_pda();
    let w = constructed(&p, Order::Third);
    let five = ExtractOptions {
        quantizer: StateQuantizer::five_levels(),
        ..Default::default()
    };
    let x = reduce_pda(&extract_pda(&w, p.alphabet(), &five).unwrap());
    assert!(equivalent(&x, &p, 10));

    // four machine states plus the all-off sink
    let mut states = vec![w.initial_state().to_vec()];
    states.extend(
        enumerate_strings(p.alphabet(), 6)
            .flat_map(|s| run_sequence(&w, p.alphabet(), &s, 0.1).unwrap().steps)
            .map(|st| st.state),
    );
    let (km, _) = StateQuantizer::fit_kmeans(&states, p.n_states() + 1, 0).unwrap();
    let opts = ExtractOptions {
        quantizer: km,
        ..Default::default()
    };
    let y = reduce_pda(&extract_pda(&w, p.alphabet(), &opts).unwrap());
    assert!(equivalent(&y, &p, 10));
}

#[test]
fn absorbing_traps_follow_the_alive_neuron() {
    // last neuron on while a legal continuation exists
    let mut p = palindrome_pda();
    p.set_accept(0, true);
    let w = constructed(&p, Order::Third);
    let opts = ExtractOptions {
        trap_mode: TrapMode::Absorbing,
        ..Default::default()
    };
    let x = extract_pda(&w, p.alphabet(), &opts).unwrap();
    assert_eq!((0..x.n_states()).filter(|&q| x.is_trap(q)).count(), 1);
    assert!(equivalent(&reduce_pda(&x), &p, 9));
}

#[test]
fn state_cap_is_enforced() {
    let p = paren_pda();
    let w = constructed(&p, Order::Third);
    let opts = ExtractOptions {
        max_states: 1,
        ..Default::default()
    };
    assert!(extract_pda(&w, p.alphabet(), &opts).is_err());
}
