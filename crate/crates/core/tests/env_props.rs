mod common;

use common::{arb_goal, argument_sets, small_library};
use fringe_core::env::{
    compute_reward, reconstruct_proof, replay_script, reset, Action, DifficultyTracker, EpisodeConfig, OutcomeKind,
};
use fringe_core::kernel::is_tautology;
use fringe_core::tactics::TacticId;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_walks_keep_the_fringe_invariants(
        g in arb_goal(4),
        picks in prop::collection::vec((any::<usize>(), any::<usize>(), 0..TacticId::COUNT, any::<usize>()), 1..60),
    ) {
        let lib = small_library();
        let cfg = EpisodeConfig { budget: 40, ..EpisodeConfig::default() };
        let tracker = DifficultyTracker::default();
        let main_valid = is_tautology(&g).unwrap();
        let mut s = reset(g);
        for (fi, gi, ti, ai) in picks {
            if s.is_done(&cfg) {
                break;
            }
            let fringe = fi % s.fringes.len();
            let tactic = TacticId::ALL[ti];
            let sets = argument_sets(tactic, &lib);
            let action = Action {
                fringe,
                goal: gi % s.fringes[fringe].len(),
                tactic,
                args: sets[ai % sets.len()].clone(),
            };
            let before = s.fringes.clone();
            let t = s.step(&action, &cfg, &tracker, "t").unwrap();
            prop_assert!(s.fringes.len() <= s.timestep + 1);
            prop_assert!(s.fringes.len() <= before.len() + 1);
            prop_assert_eq!(&s.fringes[..before.len()], &before[..]);
            prop_assert_eq!(t.reward, compute_reward(t.kind, &tracker, "t", &cfg.rewards));
            if t.kind == OutcomeKind::NoOp {
                prop_assert_eq!(&s.fringes, &before);
            }
            prop_assert_eq!(t.done, s.is_done(&cfg));
            if !main_valid {
                for f in &s.fringes {
                    prop_assert!(f.goals.iter().any(|x| !is_tautology(x).unwrap()));
                }
            }
        }
        if s.is_proved() {
            prop_assert!(main_valid);
            let script = reconstruct_proof(&s, "t").unwrap();
            prop_assert!(replay_script(&script, cfg.fuel).is_ok());
        }
    }
}

#[test]
fn a_stalled_goal_only_burns_budget() {
    let cfg = EpisodeConfig { budget: 5, ..EpisodeConfig::default() };
    let tracker = DifficultyTracker::default();
    let mut s = reset(fringe_core::kernel::Goal::parse("p ==> q").unwrap());
    let a = Action { fringe: 0, goal: 0, tactic: TacticId::EqTac, args: vec![] };
    let mut kinds = Vec::new();
    while !s.is_done(&cfg) {
        kinds.push(s.step(&a, &cfg, &tracker, "t").unwrap().kind);
    }
    assert_eq!(s.fringes.len(), 1);
    assert_eq!(kinds, [vec![OutcomeKind::NoOp; 4], vec![OutcomeKind::BudgetExhausted]].concat());
    assert!(s.step(&a, &cfg, &tracker, "t").is_err());
}
