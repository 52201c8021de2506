use proptest::prelude::*;

use fen_core::exact::{certified_far_distance, disjoint_violations, exact_verify, exhaustive_edit_distance};
use fen_core::generate::{generate, random_game, random_partition, Family, InstanceSpec};
use fen_core::{
    all_witnesses, perfect_existence_tester, phi, repair_all_witnesses, verification_tester, CoalitionStructure,
    Epsilon, FenGame, GraphOracle, PartitionOracle, Player, SizeBound, StabilityConcept, TesterConfig,
    UtilityParams,
};

fn bound_strategy() -> impl Strategy<Value = SizeBound> {
    prop_oneof![Just(SizeBound::Unbounded), (1usize..=4).prop_map(SizeBound::Bounded)]
}

fn instance(max_n: usize, max_d: usize) -> impl Strategy<Value = (FenGame, CoalitionStructure, SizeBound)> {
    (1..=max_n, 1..=max_d, 1i64..=3, 1i64..=3, bound_strategy(), any::<u64>()).prop_map(|(n, d, f, e, c, seed)| {
        let game = random_game(n, d, UtilityParams::new(f, e).unwrap(), seed);
        let gamma = random_partition(n, c, seed ^ 0x5eed);
        (game, gamma, c)
    })
}

fn witness_set(game: &FenGame, gamma: &CoalitionStructure, concept: StabilityConcept, c: SizeBound) -> Vec<Player> {
    all_witnesses(game, gamma, concept, c).unwrap().into_iter().map(|w| w.player).collect()
}

/// Whether some set of at most `c` players (connected ones only, if asked) blocks `gamma`.
fn has_blocking_set(game: &FenGame, gamma: &CoalitionStructure, c: usize, connected_only: bool) -> bool {
    let n = game.n();
    (1u32..1 << n).any(|mask| {
        let set: Vec<Player> = (1..=n).filter(|p| mask & (1 << (p - 1)) != 0).collect();
        if set.len() > c {
            return false;
        }
        if connected_only && !connected(game, &set) {
            return false;
        }
        set.iter().all(|&j| game.utility(j, &set).unwrap() > game.utility(j, gamma.coalition_of(j)).unwrap())
    })
}

fn connected(game: &FenGame, set: &[Player]) -> bool {
    let mut seen = vec![set[0]];
    let mut stack = vec![set[0]];
    while let Some(v) = stack.pop() {
        for &j in game.friends(v).iter().chain(game.enemies(v)) {
            if set.contains(&j) && !seen.contains(&j) {
                seen.push(j);
                stack.push(j);
            }
        }
    }
    seen.len() == set.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn witness_implication_chain((game, gamma, c) in instance(9, 4)) {
        let nash = witness_set(&game, &gamma, StabilityConcept::Nash, c);
        let is = witness_set(&game, &gamma, StabilityConcept::IndividuallyStable, c);
        let cis = witness_set(&game, &gamma, StabilityConcept::ContractuallyIndividuallyStable, c);
        prop_assert!(cis.iter().all(|p| is.contains(p)));
        prop_assert!(is.iter().all(|p| nash.contains(p)));
    }

    #[test]
    fn predicates_match_exact_checker((game, gamma, c) in instance(9, 4)) {
        for concept in StabilityConcept::ALL {
            let exact: Vec<Player> = exact_verify(&game, &gamma, concept, c).unwrap().witnesses.iter().map(|w| w.player).collect();
            prop_assert_eq!(witness_set(&game, &gamma, concept, c), exact);
        }
    }

    #[test]
    fn connected_blocking_sets_suffice((game, gamma, _) in instance(9, 4), c in 1usize..=4) {
        let gamma = gamma.with_bound(SizeBound::Unbounded).unwrap();
        prop_assert_eq!(has_blocking_set(&game, &gamma, c, false), has_blocking_set(&game, &gamma, c, true));
    }

    #[test]
    fn testers_are_deterministic((game, gamma, c) in instance(30, 4), seed in any::<u64>()) {
        for concept in StabilityConcept::ALL {
            let cfg = TesterConfig { epsilon: Epsilon::new(0.2).unwrap(), concept, bound: c, seed };
            let run = || verification_tester(&mut GraphOracle::new(&game), &mut PartitionOracle::new(&gamma), &cfg).unwrap();
            prop_assert_eq!(run(), run());
        }
        if c.is_bounded() {
            let run = || perfect_existence_tester(&mut GraphOracle::new(&game), Epsilon::new(0.2).unwrap(), c, seed).unwrap();
            prop_assert_eq!(run(), run());
        }
    }

    #[test]
    fn accepted_structures_have_no_sampled_witness((game, gamma, c) in instance(30, 4), seed in any::<u64>()) {
        let cfg = TesterConfig { epsilon: Epsilon::new(0.3).unwrap(), concept: StabilityConcept::Nash, bound: c, seed };
        let v = verification_tester(&mut GraphOracle::new(&game), &mut PartitionOracle::new(&gamma), &cfg).unwrap();
        let witnesses = witness_set(&game, &gamma, StabilityConcept::Nash, c);
        prop_assert_eq!(v.rejected(), v.sample.iter().any(|p| witnesses.contains(p)));
    }

    #[test]
    fn repair_makes_every_concept_stable((game, gamma, c) in instance(10, 4)) {
        for concept in StabilityConcept::ALL {
            let plan = repair_all_witnesses(&game, &gamma, concept, c).unwrap();
            prop_assert!(plan.script.cost() <= plan.length_bound(game.degree_bound()));
            let fixed = game.apply_edits(&plan.script).unwrap();
            prop_assert!(exact_verify(&fixed, &gamma, concept, c).unwrap().stable);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn distance_bounds_sandwich((game, gamma, c) in instance(5, 2)) {
        for concept in StabilityConcept::ALL {
            let bounds = certified_far_distance(&game, &gamma, concept, c).unwrap();
            prop_assert!(bounds.lower <= bounds.upper);
            prop_assert!(bounds.upper <= bounds.witnesses * game.degree_bound());
            let cert = exact_verify(&game, &gamma, concept, c).unwrap();
            let packing = disjoint_violations(&cert, concept).len().div_ceil(2);
            prop_assert!(packing <= bounds.lower, "packing {} above exact {}", packing, bounds.lower);
            let exact = exhaustive_edit_distance(&game, &gamma, concept, c, bounds.upper).unwrap();
            prop_assert_eq!(exact, bounds.lower);
        }
    }
}

#[test]
fn phi_queries_are_bounded_independently_of_n() {
    for n in [1_000, 10_000] {
        for c in [SizeBound::Bounded(2), SizeBound::Bounded(4), SizeBound::Unbounded] {
            let game = random_game(n, 5, UtilityParams::default(), 3);
            let gamma = random_partition(n, c, 4);
            let d = game.degree_bound() as u64;
            let cap = c.limit().map_or(d * 5, |c| (c as u64).min(d * c as u64));
            let mut graph = GraphOracle::new(&game);
            let mut oracle = PartitionOracle::new(&gamma);
            for concept in StabilityConcept::ALL.into_iter().filter(|k| k.is_individual()) {
                for i in (1..=n).step_by(7) {
                    let r = phi(concept, &mut graph, &mut oracle, i, c).unwrap();
                    assert!(r.queries.total <= 3 * (d + cap), "{concept} at {i}: {}", r.queries.total);
                }
            }
        }
    }
}

#[test]
fn family_certificates_replay() {
    for seed in 0..40 {
        for n in [2, 5, 9] {
            for (family, c) in [
                (Family::FriendClustersPerfect, SizeBound::Bounded(3)),
                (Family::FriendClustersPerfect, SizeBound::Unbounded),
                (Family::EnemyPairsFar, SizeBound::Bounded(2)),
                (Family::PlantedCoreBlocker, SizeBound::Bounded(3)),
                (Family::FriendPathOversized, SizeBound::Bounded(1)),
            ] {
                let inst = generate(&InstanceSpec::new(family, n, 3, c, seed)).unwrap();
                inst.game.validate().unwrap();
                assert!(inst.certificate.replay(&inst.game, inst.partition.as_ref()).unwrap(), "{family} n={n} seed={seed}");
            }
        }
    }
}

#[test]
fn large_far_families_spot_check() {
    let pairs = generate(&InstanceSpec::new(Family::EnemyPairsFar, 20_000, 4, SizeBound::Bounded(2), 1)).unwrap();
    let gamma = pairs.partition.unwrap();
    let claimed = pairs.certificate.witnesses.unwrap();
    assert_eq!(claimed.len(), 20_000);
    let mut graph = GraphOracle::new(&pairs.game);
    let mut oracle = PartitionOracle::new(&gamma);
    for i in (1..=20_000).step_by(200) {
        let r = phi(StabilityConcept::IndividuallyRational, &mut graph, &mut oracle, i, SizeBound::Bounded(2)).unwrap();
        assert!(r.verdict);
    }
}
