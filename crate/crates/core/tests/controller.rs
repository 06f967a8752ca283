use nnpda::training::{frozen_reading_run, Sensitivities};
use nnpda::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Third-order weights that reproduce a second-order net when the reading
/// and the input each sum to one.
fn lift_to_third(w2: &WeightSet) -> WeightSet {
    let sh = *w2.shape();
    let (ns, nr, ni) = (sh.n_state, sh.n_read, sh.n_input);
    let mut w3 = WeightSet::zeros(Order::Third, ActionActivation::Sigmoid2, sh).unwrap();
    for i in 0..ns {
        for j in 0..ns {
            for k in 0..nr {
                for l in 0..ni {
                    let v = w2.w_state()[w2.ws2_index(i, j, k)]
                        + w2.w_state()[w2.ws2_index(i, j, nr + l)];
                    let at = w3.ws_index(i, j, k, l);
                    w3.params_mut()[at] = v;
                }
            }
        }
    }
    w3.theta_s_mut().copy_from_slice(w2.theta_s());
    for j in 0..ns {
        for k in 0..nr {
            for l in 0..ni {
                let v =
                    w2.w_action()[w2.wa_index(j, k, 0)] + w2.w_action()[w2.wa_index(j, nr + l, 0)];
                let at = w3.wa_index(j, k, l);
                w3.w_action_mut()[at] = v;
            }
        }
    }
    w3.set_theta_a(w2.theta_a().unwrap()).unwrap();
    w3
}

#[test]
fn second_and_third_order_agree_with_empty_stack_neuron() {
    let a = Grammar::Paren.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let shape = NetworkShape::new(3, a.len(), true).unwrap();
        let w2 = WeightSet::random(
            Order::Second,
            ActionActivation::Sigmoid2,
            shape,
            2.0,
            &mut rng,
        )
        .unwrap();
        let w3 = lift_to_third(&w2);
        let len = rng.gen_range(0..12);
        let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
        let r2 = run_sequence(&w2, &a, &s, 0.1).unwrap();
        let r3 = run_sequence(&w3, &a, &s, 0.1).unwrap();
        for (x, y) in r2.steps.iter().zip(&r3.steps) {
            assert!((x.action - y.action).abs() < 1e-12);
            for (p, q) in x.state.iter().zip(&y.state) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn single_weight_closed_form() {
    // one state neuron, one nonzero weight on the input axis, constant action
    let a = Alphabet::new(&["x", "y"], None).unwrap();
    let shape = NetworkShape::new(1, 2, false).unwrap();
    let mut w = WeightSet::zeros(Order::Second, ActionActivation::Sigmoid2, shape).unwrap();
    let at = w.ws2_index(0, 0, 2);
    w.params_mut()[at] = 1.5;
    w.set_theta_a(3f64.ln()).unwrap();
    let run = run_sequence(&w, &a, &[0; 6], 0.1).unwrap();
    let mut s = 1.0;
    for (t, st) in run.steps.iter().enumerate() {
        s = sigmoid(1.5 * s);
        assert!((st.state[0] - s).abs() < 1e-15);
        assert!((st.action - 0.5).abs() < 1e-15);
        assert!((st.stack.total_length() - 0.5 * (t + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn full_order_corner_reads_the_table() {
    let shape = NetworkShape::new(2, 2, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = WeightSet::random(
        Order::FullOrderAction,
        ActionActivation::Linear,
        shape,
        1.0,
        &mut rng,
    )
    .unwrap();
    for jj in 0..4usize {
        let s = [(jj & 1) as f64, ((jj >> 1) & 1) as f64];
        for k in 0..3 {
            for l in 0..2 {
                let mut r = vec![0.0; 3];
                r[k] = 1.0;
                let mut i = vec![0.0; 2];
                i[l] = 1.0;
                let out = w.step_parts(&s, &r, &i).unwrap();
                assert_eq!(out.action, w.w_action()[w.wa_index(jj, k, l)]);
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let a = Grammar::Palindrome.alphabet();
    let make = || {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let shape = NetworkShape::new(4, 3, true).unwrap();
        WeightSet::random(
            Order::FullOrderAction,
            ActionActivation::Linear,
            shape,
            1.0,
            &mut rng,
        )
        .unwrap()
    };
    let (w1, w2) = (make(), make());
    assert_eq!(w1, w2);
    let s = [0, 1, 1, 2, 1, 1, 0];
    let (r1, r2) = (
        run_sequence(&w1, &a, &s, 0.1).unwrap(),
        run_sequence(&w2, &a, &s, 0.1).unwrap(),
    );
    assert_eq!(r1.to_tsv(&a), r2.to_tsv(&a));
    assert_eq!(r1.final_stack, r2.final_stack);
}

#[test]
fn model_text_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shape = NetworkShape::new(3, 3, true).unwrap();
    let mut w = WeightSet::random(
        Order::Third,
        ActionActivation::Sigmoid2,
        shape,
        1.0,
        &mut rng,
    )
    .unwrap();
    w.set_alphabet(Grammar::Paren.alphabet()).unwrap();
    let back = WeightSet::from_text(&w.to_text()).unwrap();
    assert_eq!(back, w);
}

#[test]
fn length_sensitivity_sums_action_sensitivities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shape = NetworkShape::new(3, 2, true).unwrap();
    let w = WeightSet::random(
        Order::Third,
        ActionActivation::Sigmoid2,
        shape,
        1.0,
        &mut rng,
    )
    .unwrap();
    let mut sens = Sensitivities::new(&w);
    let mut acc = vec![0.0; w.n_params()];
    let mut s = w.initial_state().to_vec();
    for t in 0..7 {
        let r: Vec<f64> = (0..shape.n_read).map(|_| rng.gen::<f64>()).collect();
        let mut i = vec![0.0; 2];
        i[t % 2] = 1.0;
        let out = sens.propagate(&w, &s, &r, &i);
        for (x, d) in acc.iter_mut().zip(&sens.da) {
            *x += d;
        }
        s = out.state;
    }
    for (x, y) in acc.iter().zip(&sens.dl) {
        assert!((x - y).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frozen_gradients_match_differences(seed in 0u64..10_000, order in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (o, act, empty) = [
            (Order::Second, ActionActivation::Sigmoid2, false),
            (Order::Third, ActionActivation::Sigmoid2, true),
            (Order::FullOrderAction, ActionActivation::Linear, true),
        ][order];
        let shape = NetworkShape::new(2, 2, empty).unwrap();
        let w = WeightSet::random(o, act, shape, 1.0, &mut rng).unwrap();
        let inputs: Vec<usize> = (0..3).map(|_| rng.gen_range(0..2)).collect();
        let reads: Vec<Vec<f64>> = (0..3).map(|_| (0..shape.n_read).map(|_| rng.gen::<f64>()).collect()).collect();
        let run = frozen_reading_run(&w, &inputs, &reads).unwrap();
        let p = rng.gen_range(0..w.n_params());
        let h = 1e-6;
        let mut wp = w.clone();
        wp.params_mut()[p] += h;
        let mut wm = w.clone();
        wm.params_mut()[p] -= h;
        let (rp, rm) = (frozen_reading_run(&wp, &inputs, &reads).unwrap(), frozen_reading_run(&wm, &inputs, &reads).unwrap());
        let fd = (rp.action_sum - rm.action_sum) / (2.0 * h);
        prop_assert!((fd - run.sens.dl[p]).abs() <= 1e-6 * fd.abs().max(1.0));
        let fd = (rp.final_state[1] - rm.final_state[1]) / (2.0 * h);
        prop_assert!((fd - run.sens.ds_row(1)[p]).abs() <= 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn states_stay_in_unit_interval(seed in 0u64..10_000, len in 0usize..20) {
        let a = Grammar::Anbn.alphabet();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = NetworkShape::new(3, 3, false).unwrap();
        let w = WeightSet::random(Order::Third, ActionActivation::Sigmoid2, shape, 5.0, &mut rng).unwrap();
        let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
        let run = run_sequence(&w, &a, &s, 0.1).unwrap();
        for st in &run.steps {
            prop_assert!(st.state.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(st.action.abs() <= 1.0);
            prop_assert!(st.stack.total_length() >= 0.0);
        }
    }
}
