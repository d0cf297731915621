use mulimit::analyzer::segment_stats;
use mulimit::construction::{
    fragment_layout, main_alphabet, ConstructionParams, Phase, SimulatedAutomaton, SEP1, SHARP, STAR,
};
use mulimit::generators::{FamilySpec, SubshiftSpec};
use num_rational::Ratio;
use proptest::prelude::*;

fn params() -> ConstructionParams {
    ConstructionParams::new(FamilySpec::new(vec![SubshiftSpec::fibonacci()]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stars_never_return_and_shares_sum_to_one(seed in any::<u64>(), s in 0.0f64..0.5, width in 16usize..200) {
        let mut sim = SimulatedAutomaton::random(params(), width, s, seed, 0).unwrap();
        for _ in 0..300 {
            sim.step();
            prop_assert!(sim.main().iter().all(|&c| c != STAR));
            let st = segment_stats(sim.time(), &sim.state());
            prop_assert_eq!(st.total(), Ratio::from_integer(1));
        }
    }

    #[test]
    fn marks_sit_on_sharps_and_workspace_is_bounded(seed in any::<u64>(), width in 64usize..400) {
        let mut sim = SimulatedAutomaton::random(params(), width, 0.1, seed, 0).unwrap();
        for _ in 0..1500 {
            sim.step();
            for (i, c) in sim.state().iter().enumerate() {
                prop_assert!(c.marks == 0 || c.main == SHARP, "mark off # at {}", i);
            }
            for c in sim.controllers() {
                prop_assert!(c.compute_cells().len() <= c.workspace_limit() + 1);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let mut a = SimulatedAutomaton::random(params(), 128, 0.1, seed, 3).unwrap();
        let mut b = SimulatedAutomaton::random(params(), 128, 0.1, seed, 3).unwrap();
        for _ in 0..200 {
            a.step();
            b.step();
            prop_assert_eq!(a.state(), b.state());
        }
    }
}

#[test]
fn merged_size_is_sum_plus_one() {
    let p = params();
    let a = main_alphabet(&p.family).unwrap();
    for (n, m) in [(3, 5), (2, 7), (6, 4)] {
        let mut text = String::from("#");
        text.push_str(&".".repeat(n));
        text.push('#');
        text.push_str(&".".repeat(m));
        text.push('#');
        text.push_str(&".".repeat(10));
        let main = a.word(&text).unwrap().into_symbols();
        let mut sim = SimulatedAutomaton::scripted(p.clone(), main, &[(0, n), (n + 1, m)]).unwrap();
        sim.run(5000);
        let e = sim.events().merges[0];
        assert_eq!((e.left_n, e.right_n, e.merged_n), (n, m, n + m + 1));
        assert_ne!(sim.main()[n + 1], SHARP);
    }
}

#[test]
fn projection_after_fill_has_separators_at_fragment_ends() {
    let p = params();
    let mut main = vec![0; 120];
    main[0] = SHARP;
    main[101] = SHARP;
    let mut sim = SimulatedAutomaton::scripted(p, main, &[(0, 100)]).unwrap();
    while sim.controllers().next().unwrap().phase != Phase::CycleLeft {
        sim.step();
    }
    let proj = sim.project();
    assert_eq!(proj.len(), 120);
    let seps: Vec<usize> = (0..120).filter(|&i| proj.cells()[i] == SEP1).collect();
    assert_eq!(seps, (1..=10).map(|j| j * 10).collect::<Vec<_>>());
    let words = &sim.controllers().next().unwrap().words;
    assert_eq!(&proj.cells()[1..101], &fragment_layout(100, words).unwrap()[..]);
}

#[test]
fn cycle_onsets_are_periodic_in_a_run() {
    let p = params();
    let mut main = vec![0; 40];
    main[0] = SHARP;
    main[13] = SHARP;
    let mut sim = SimulatedAutomaton::scripted(p, main, &[(0, 12)]).unwrap();
    sim.run(2000);
    let onsets = &sim.controllers().next().unwrap().left_onsets;
    assert!(onsets.len() >= 3);
    assert!(onsets.windows(2).all(|w| w[1] - w[0] == 2 * (144 + 12)));
}
