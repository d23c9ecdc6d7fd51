mod common;

use common::setup;
use fringe_core::autodiff::{finite_diff_check, ParamSet};
use fringe_core::env::{reset, DifficultyTracker, EpisodeConfig, RewardTable};
use fringe_core::learner::{
    discounted_returns, episode_rng, main_goal, reinforce_seeds, replay_episode, run_episode, train, Checkpoint,
    LearnerConfig, Trainer, Trajectory,
};
use fringe_core::policy::{Policy, ProofContext, Session};
use fringe_core::tactics::Library;
use proptest::prelude::*;

fn rollout<'p>(policy: &'p Policy, params: &'p ParamSet, s: &setup::Setup, k: usize, cfg: &EpisodeConfig) -> (Session<'p>, Trajectory) {
    let mut session = Session::new(policy, params);
    let mut rng = episode_rng(3, 0, k);
    let traj = run_episode(&mut session, &s.theorems[k], &s.library, cfg, &DifficultyTracker::default(), &mut rng).unwrap();
    (session, traj)
}

/// REINFORCE surrogate of `traj` re-evaluated under `params` along its actions.
fn surrogate(policy: &Policy, params: &ParamSet, lib: &Library, traj: &Trajectory, thm: &fringe_core::kernel::Theorem, gamma: f64) -> f64 {
    let ctx = ProofContext { library: lib, target_index: thm.library_index };
    let returns = discounted_returns(&traj.rewards(), gamma);
    let mut session = Session::new(policy, params);
    let mut state = reset(main_goal(thm));
    let cfg = EpisodeConfig::default();
    let tracker = DifficultyTracker::default();
    let mut total = 0.0;
    for (step, g) in traj.steps.iter().zip(returns) {
        let lp = session.action_log_prob(&state, &ctx, &step.action).unwrap();
        total -= g * session.tape.scalar(lp.log_prob);
        state.step(&step.action, &cfg, &tracker, &thm.name).unwrap();
    }
    total
}

#[test]
fn zero_rewards_give_zero_gradient() {
    let s = setup::corpus(8, 1);
    let (policy, params) = setup::policy(&s, 4, 0);
    let zero = RewardTable { easy: 0.0, hard: 0.0, fail: 0.0, progress: 0.0, subgoal: 0.0, other: 0.0 };
    let cfg = EpisodeConfig { rewards: zero, budget: 10, ..EpisodeConfig::default() };
    for k in 0..s.theorems.len() {
        let (session, traj) = rollout(&policy, &params, &s, k, &cfg);
        let (seeds, loss) = reinforce_seeds(&session, &traj, 0.99, 0.0);
        assert_eq!(loss, 0.0);
        let g = session.tape.backward(&seeds);
        assert!(params.ids().all(|id| g.get(id).data.iter().all(|x| *x == 0.0)));
    }
}

#[test]
fn gradient_is_linear_in_the_rewards() {
    let s = setup::corpus(6, 2);
    let (policy, params) = setup::policy(&s, 4, 1);
    let base = EpisodeConfig { budget: 8, ..EpisodeConfig::default() };
    let r = base.rewards;
    let doubled = EpisodeConfig {
        rewards: RewardTable {
            easy: 2.0 * r.easy,
            hard: 2.0 * r.hard,
            fail: 2.0 * r.fail,
            progress: 2.0 * r.progress,
            subgoal: 2.0 * r.subgoal,
            other: 2.0 * r.other,
        },
        ..base
    };
    for k in 0..s.theorems.len() {
        let (s1, t1) = rollout(&policy, &params, &s, k, &base);
        let (s2, t2) = rollout(&policy, &params, &s, k, &doubled);
        assert_eq!(t1.actions(), t2.actions());
        let g1 = s1.tape.backward(&reinforce_seeds(&s1, &t1, 0.99, 0.0).0);
        let g2 = s2.tape.backward(&reinforce_seeds(&s2, &t2, 0.99, 0.0).0);
        for id in params.ids() {
            for (a, b) in g1.get(id).data.iter().zip(&g2.get(id).data) {
                assert!((2.0 * a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }
    }
}

#[test]
fn episode_gradient_matches_finite_differences() {
    let s = setup::corpus(6, 3);
    let (policy, params) = setup::policy(&s, 3, 2);
    let cfg = EpisodeConfig { budget: 4, ..EpisodeConfig::default() };
    for k in 0..3 {
        let (session, traj) = rollout(&policy, &params, &s, k, &cfg);
        let (seeds, loss) = reinforce_seeds(&session, &traj, 0.99, 0.0);
        let thm = &s.theorems[k];
        assert!((surrogate(&policy, &params, &s.library, &traj, thm, 0.99) - loss).abs() < 1e-9);
        let grads = session.tape.backward(&seeds);
        let f = |p: &ParamSet| surrogate(&policy, p, &s.library, &traj, thm, 0.99);
        let report = finite_diff_check(f, &params, &grads, 1e-5, 1e-4, None);
        assert!(report.passed(), "{:?}", &report.failing[..report.failing.len().min(3)]);
    }
}

#[test]
fn stored_proofs_replay_under_changed_parameters() {
    let s = setup::corpus(30, 4);
    let (policy, params) = setup::policy(&s, 8, 3);
    let cfg = LearnerConfig { learning_rate: 1e-2, iterations: 2, ..LearnerConfig::default() };
    let mut trainer = Trainer::new(policy, params, cfg, s.theorems.iter().map(|t| t.name.clone()));
    let m = trainer.run_iteration(&s.theorems, &s.library).unwrap();
    assert!(!m.proved_ids.is_empty());
    for name in &m.proved_ids {
        let stored = trainer.buffer.get(name);
        assert_eq!(stored.len(), 1);
        let thm = s.library.get(name).unwrap();
        let mut session = Session::new(&trainer.policy, &trainer.params);
        let rt = replay_episode(&mut session, thm, &s.library, &cfg.episode, &trainer.tracker, &stored[0]).unwrap();
        assert!(rt.proved());
        assert_eq!(rt.actions(), stored[0]);
    }
}

fn metrics_bytes(workers: usize, seed: u64) -> (Vec<u8>, Checkpoint) {
    let s = setup::corpus(24, 5);
    let (policy, params) = setup::policy(&s, 6, seed);
    let cfg = LearnerConfig { learning_rate: 1e-2, iterations: 3, workers, seed, ..LearnerConfig::default() };
    let mut trainer = Trainer::new(policy, params, cfg, s.theorems.iter().map(|t| t.name.clone()));
    let mut out = Vec::new();
    let mut last = None;
    train(&mut trainer, &s.theorems, &s.library, &mut out, &mut |ck| {
        last = Some(ck.clone());
        Ok(())
    })
    .unwrap();
    (out, last.unwrap())
}

#[test]
fn training_is_deterministic_for_any_worker_count() {
    let (a, ca) = metrics_bytes(1, 7);
    let (b, cb) = metrics_bytes(1, 7);
    let (c, cc) = metrics_bytes(3, 7);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(ca, cb);
    assert_eq!(ca.params, cc.params);
    assert_ne!(a, metrics_bytes(1, 8).0);
}

#[test]
fn checkpoints_round_trip_and_resume() {
    let s = setup::corpus(16, 6);
    let (policy, params) = setup::policy(&s, 6, 1);
    let cfg = LearnerConfig { learning_rate: 1e-2, iterations: 2, replay: false, ..LearnerConfig::default() };
    let names = || s.theorems.iter().map(|t| t.name.clone());
    let mut straight = Trainer::new(policy.clone(), params.clone(), cfg, names());
    straight.run_iteration(&s.theorems, &s.library).unwrap();
    straight.run_iteration(&s.theorems, &s.library).unwrap();

    let mut first = Trainer::new(policy, params, cfg, names());
    first.run_iteration(&s.theorems, &s.library).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    first.checkpoint().save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, first.checkpoint());
    let mut resumed = Trainer::from_checkpoint(loaded);
    resumed.run_iteration(&s.theorems, &s.library).unwrap();
    assert_eq!(resumed.params, straight.params);
    assert_eq!(resumed.iteration, 2);

    std::fs::write(&path, "{\"version\": 99}").unwrap();
    assert!(Checkpoint::load(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn returns_satisfy_the_bellman_recursion(r in prop::collection::vec(-10.0f64..10.0, 1..60), gamma in 0.0f64..1.0) {
        let g = discounted_returns(&r, gamma);
        prop_assert_eq!(g.len(), r.len());
        prop_assert_eq!(*g.last().unwrap(), *r.last().unwrap());
        for m in 0..r.len() - 1 {
            prop_assert!((g[m] - (r[m] + gamma * g[m + 1])).abs() < 1e-9);
        }
    }
}
