//! Minimal reverse-mode differentiation: a vector tape, dense and recurrent
//! layers, categorical sampling, RMSProp and a finite-difference checker.

mod check;
mod layers;
mod optim;
mod params;
mod tape;

pub use check::{finite_diff_check, relative_error, CoordinateMismatch, FiniteDiffReport};
pub use layers::{categorical_sample, init_tensor, Dense, GruCell, SampleError};
pub use optim::{RmsProp, DEFAULT_LEARNING_RATE};
pub use params::{Gradients, ParamId, ParamSet, Tensor};
pub use tape::{log_sum_exp, softmax, NodeId, Tape};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn dense_identity_and_zero() {
        let mut params = ParamSet::new();
        let layer = Dense::new(&mut params, "d", 3, 3, &mut rng(0));
        params.get_mut(layer.w).data = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let mut tape = Tape::new(&params);
        let x = tape.input(vec![0.5, -2.0, 3.0]);
        let y = layer.forward(&mut tape, x);
        assert_eq!(tape.value(y), &[0.5, -2.0, 3.0]);
        let z = tape.input(vec![0.0; 3]);
        let y0 = layer.forward(&mut tape, z);
        assert_eq!(tape.value(y0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn dense_gradients_match_finite_differences() {
        let mut params = ParamSet::new();
        let mut r = rng(1);
        let layer = Dense::new(&mut params, "d", 3, 5, &mut r);
        params.get_mut(layer.b).data = (0..5).map(|i| 0.1 * i as f64).collect();
        let x = params.add("x", init_tensor(3, 1, 1.0, &mut r));
        let weights: Vec<f64> = (0..5).map(|i| 0.3 - 0.2 * i as f64).collect();
        let loss = |p: &ParamSet| {
            let mut tape = Tape::new(p);
            let xn = tape.param(x);
            let y = layer.forward(&mut tape, xn);
            let t = tape.tanh(y);
            let w = tape.input(weights.clone());
            let out = tape.dot(t, w);
            (tape.scalar(out), tape.backward(&[(out, 1.0)]))
        };
        let (_, grads) = loss(&params);
        let report = finite_diff_check(|p| loss(p).0, &params, &grads, 1e-5, 1e-4, None);
        assert!(report.passed(), "{:?}", report.failing);
        assert_eq!(report.checked, 5 * 3 + 5 + 3);
    }

    #[test]
    fn zero_recurrent_cell_stays_at_zero() {
        let mut params = ParamSet::new();
        let cell = GruCell::new(&mut params, "g", 2, 3, &mut rng(2));
        for id in params.ids().collect::<Vec<_>>() {
            params.get_mut(id).data.iter_mut().for_each(|x| *x = 0.0);
        }
        let mut tape = Tape::new(&params);
        let h0 = tape.input(vec![0.0; 3]);
        let x = tape.input(vec![1.0, -1.0]);
        let h = cell.run(&mut tape, &[x, x, x], h0);
        assert_eq!(tape.value(h), &[0.0, 0.0, 0.0]);
        // With zero weights the update gate is 1/2, so a nonzero state halves.
        let hs = tape.input(vec![1.0, 2.0, -4.0]);
        let h1 = cell.step(&mut tape, x, hs);
        assert_eq!(tape.value(h1), &[0.5, 1.0, -2.0]);
    }

    #[test]
    fn unit_sequence_equals_single_step() {
        let mut params = ParamSet::new();
        let cell = GruCell::new(&mut params, "g", 2, 3, &mut rng(3));
        let mut tape = Tape::new(&params);
        let h0 = tape.input(vec![0.1, 0.2, 0.3]);
        let x = tape.input(vec![0.7, -0.4]);
        let a = cell.run(&mut tape, &[x], h0);
        let b = cell.step(&mut tape, x, h0);
        assert_eq!(tape.value(a), tape.value(b));
    }

    #[test]
    fn recurrent_unroll_gradients() {
        let mut params = ParamSet::new();
        let mut r = rng(4);
        let cell = GruCell::new(&mut params, "g", 2, 3, &mut r);
        for id in params.ids().collect::<Vec<_>>() {
            let t = params.get(id).clone();
            *params.get_mut(id) = init_tensor(t.rows, t.cols, 0.8, &mut r);
        }
        let xs = params.add("xs", init_tensor(4, 2, 1.0, &mut r));
        let loss = |p: &ParamSet| {
            let mut tape = Tape::new(p);
            let inputs: Vec<NodeId> = (0..4).map(|i| tape.row(xs, i)).collect();
            let h0 = tape.input(vec![0.2, -0.1, 0.05]);
            let h = cell.run(&mut tape, &inputs, h0);
            let w = tape.input(vec![1.0, -2.0, 0.5]);
            let out = tape.dot(h, w);
            (tape.scalar(out), tape.backward(&[(out, 1.0)]))
        };
        let (_, grads) = loss(&params);
        let report = finite_diff_check(|p| loss(p).0, &params, &grads, 1e-5, 1e-4, None);
        assert!(report.passed(), "{:?}", report.failing);
    }

    #[test]
    fn symmetric_logits_sample_with_half_probability() {
        let params = ParamSet::new();
        let mut tape = Tape::new(&params);
        let logits = tape.input(vec![0.0, 0.0]);
        let mut r = rng(5);
        for _ in 0..20 {
            let (_, lp) = categorical_sample(&mut tape, logits, None, &mut r).unwrap();
            assert!((tape.scalar(lp) - 0.5f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn dominant_logit_always_drawn() {
        let params = ParamSet::new();
        let mut tape = Tape::new(&params);
        let logits = tape.input(vec![1000.0, 0.0]);
        let mut r = rng(6);
        let zeros = (0..10_000)
            .filter(|_| categorical_sample(&mut tape, logits, None, &mut r).unwrap().0 == 0)
            .count();
        assert_eq!(zeros, 10_000);
    }

    #[test]
    fn log_prob_gradient_is_onehot_minus_softmax() {
        let mut params = ParamSet::new();
        let mut r = rng(7);
        let logits_id = params.add("logits", init_tensor(4, 1, 2.0, &mut r));
        let mut tape = Tape::new(&params);
        let logits = tape.param(logits_id);
        let (index, lp) = categorical_sample(&mut tape, logits, None, &mut r).unwrap();
        let grads = tape.backward(&[(lp, 1.0)]);
        let probs = softmax(&params.get(logits_id).data, None);
        for (k, g) in grads.get(logits_id).data.iter().enumerate() {
            let expected = if k == index { 1.0 } else { 0.0 } - probs[k];
            assert!((g - expected).abs() < 1e-12);
        }
        let f = |p: &ParamSet| {
            let mut tape = Tape::new(p);
            let l = tape.param(logits_id);
            let lp = tape.log_softmax_pick(l, index, None);
            tape.scalar(lp)
        };
        assert!(finite_diff_check(f, &params, &grads, 1e-5, 1e-4, None).passed());
    }

    #[test]
    fn masked_sampling_never_picks_masked_entries() {
        let params = ParamSet::new();
        let mut tape = Tape::new(&params);
        let logits = tape.input(vec![5.0, 0.0, 1.0]);
        let mut r = rng(8);
        for _ in 0..200 {
            let (i, lp) = categorical_sample(&mut tape, logits, Some(vec![false, true, true]), &mut r).unwrap();
            assert_ne!(i, 0);
            assert!(tape.scalar(lp) < 0.0);
        }
        assert_eq!(
            categorical_sample(&mut tape, logits, Some(vec![false; 3]), &mut r).unwrap_err(),
            SampleError::EmptySupport
        );
        let bad = tape.input(vec![f64::NAN, 0.0]);
        assert_eq!(
            categorical_sample(&mut tape, bad, None, &mut r).unwrap_err(),
            SampleError::NonFiniteLogits
        );
    }

    #[test]
    fn softmax_is_normalized_and_positive() {
        let mut r = rng(9);
        for _ in 0..100 {
            let v = init_tensor(7, 1, 30.0, &mut r).data;
            let p = softmax(&v, None);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn backward_twice_doubles_exactly() {
        let mut params = ParamSet::new();
        let mut r = rng(10);
        let layer = Dense::new(&mut params, "d", 2, 2, &mut r);
        let mut tape = Tape::new(&params);
        let x = tape.input(vec![1.0, 2.0]);
        let y = layer.forward(&mut tape, x);
        let s = tape.sigmoid(y);
        let w = tape.input(vec![1.0, 1.0]);
        let out = tape.dot(s, w);
        let once = tape.backward(&[(out, 1.0)]);
        let mut twice = params.zeros_like();
        tape.backward_into(&[(out, 1.0)], &mut twice);
        tape.backward_into(&[(out, 1.0)], &mut twice);
        let mut doubled = once.clone();
        doubled.scale(2.0);
        assert_eq!(twice, doubled);
    }

    #[test]
    fn rmsprop_update_rule() {
        let mut params = ParamSet::new();
        let p = params.add("p", Tensor { rows: 1, cols: 1, data: vec![1.0] });
        let mut opt = RmsProp::new(&params, DEFAULT_LEARNING_RATE);
        let mut g = params.zeros_like();
        g.get_mut(p).data[0] = 1.0;
        let mut again = params.clone();
        let mut opt2 = opt.clone();
        opt.step(&mut params, &g);
        assert!((opt.mean_square()[0].data[0] - 0.01).abs() < 1e-15);
        let expected = 1.0 - DEFAULT_LEARNING_RATE / (0.01f64 + 1e-8).sqrt();
        assert!((params.get(p).data[0] - expected).abs() < 1e-15);
        assert!((params.get(p).data[0] - (1.0 - 10.0 * DEFAULT_LEARNING_RATE)).abs() < 1e-9);
        opt2.step(&mut again, &g);
        assert_eq!(again.get(p).data[0].to_bits(), params.get(p).data[0].to_bits());

        let zero = params.zeros_like();
        let before = params.get(p).data[0];
        opt.step(&mut params, &zero);
        assert_eq!(params.get(p).data[0], before);
        assert!((opt.mean_square()[0].data[0] - 0.0099).abs() < 1e-15);
    }

    #[test]
    fn finite_diff_on_analytic_cases() {
        let mut params = ParamSet::new();
        let x = params.add("x", Tensor { rows: 3, cols: 1, data: vec![1.0, -2.0, 0.5] });
        let quad = |p: &ParamSet| p.get(x).data.iter().map(|v| v * v).sum::<f64>();
        let mut grads = params.zeros_like();
        grads.get_mut(x).data = params.get(x).data.iter().map(|v| 2.0 * v).collect();
        let report = finite_diff_check(quad, &params, &grads, 1e-3, 1e-9, None);
        assert!(report.passed(), "{}", report.max_relative_error);

        let constant = |_: &ParamSet| 4.2;
        let zeros = params.zeros_like();
        let report = finite_diff_check(constant, &params, &zeros, 1e-5, 1e-12, None);
        assert!(report.passed());
        assert_eq!(report.max_relative_error, 0.0);

        // A wrong gradient is reported per coordinate.
        let report = finite_diff_check(quad, &params, &zeros, 1e-3, 1e-4, None);
        assert_eq!(report.failing.len(), 3);
    }
}
