//! One-sided randomized testers.
//!
//! Both testers draw `⌈ln 3 / ε⌉` players uniformly with replacement and
//! stop at the first witness. They never reject an input that has the
//! property; on ε-far inputs at least an ε fraction of players are witnesses,
//! so all samples miss with probability at most `(1 − ε)^s ≤ 1/3`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FenError, Result};
use crate::game::{Player, Relation, SizeBound};
use crate::oracle::{snapshot_ledger, GraphOracle, PartitionOracle, QueryLedger};
use crate::witness::{phi, Evidence, StabilityConcept, WitnessReport};

/// Proximity parameter in `(0, 1]`. Parses decimals (`0.1`) and fractions (`1/3`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Epsilon(value))
        } else {
            Err(FenError::EpsilonOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = FenError;

    fn try_from(value: f64) -> Result<Self> {
        Epsilon::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

impl FromStr for Epsilon {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || FenError::InvalidSpec(format!("bad epsilon `{s}`"));
        let value = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                num / den
            }
            None => s.trim().parse().map_err(|_| bad())?,
        };
        Epsilon::new(value)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `⌈ln 3 / ε⌉`.
pub fn sample_size(epsilon: Epsilon) -> usize {
    (3f64.ln() / epsilon.value()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub epsilon: Epsilon,
    pub concept: StabilityConcept,
    pub bound: SizeBound,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TesterVerdict {
    pub decision: Decision,
    pub sample: Vec<Player>,
    pub witnesses: Vec<WitnessReport>,
    #[serde(rename = "queries")]
    pub ledger: QueryLedger,
    pub seed: u64,
    pub epsilon: Epsilon,
    /// `None` for the perfect-existence tester.
    pub concept: Option<StabilityConcept>,
}

impl TesterVerdict {
    pub fn rejected(&self) -> bool {
        self.decision == Decision::Reject
    }
}

/// Samples players and rejects on the first one whose witness predicate fires.
pub fn verification_tester(
    graph: &mut GraphOracle<'_>,
    partition: &mut PartitionOracle<'_>,
    config: &TesterConfig,
) -> Result<TesterVerdict> {
    if graph.n() != partition.n() {
        return Err(FenError::SizeMismatch { game: graph.n(), partition: partition.n() });
    }
    let start = snapshot_ledger(graph, Some(partition));
    let n = graph.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sample = Vec::new();
    let mut witnesses = Vec::new();
    if n > 0 {
        for _ in 0..sample_size(config.epsilon) {
            let i = rng.gen_range(1..=n);
            sample.push(i);
            let report = phi(config.concept, graph, partition, i, config.bound)?;
            if report.verdict {
                witnesses.push(report);
                break;
            }
        }
    }
    let decision = if witnesses.is_empty() { Decision::Accept } else { Decision::Reject };
    Ok(TesterVerdict {
        decision,
        sample,
        witnesses,
        ledger: snapshot_ledger(graph, Some(partition)).since(&start),
        seed: config.seed,
        epsilon: config.epsilon,
        concept: Some(config.concept),
    })
}

/// Tests whether the game admits a coalition structure with parts of size at
/// most `bound` in which everyone's coalition holds all of its friends and
/// none of its enemies. From each sampled player a breadth-first search
/// follows friend edges; seeing more than `c` players or an enemy edge inside
/// the explored set rejects.
pub fn perfect_existence_tester(
    graph: &mut GraphOracle<'_>,
    epsilon: Epsilon,
    bound: SizeBound,
    seed: u64,
) -> Result<TesterVerdict> {
    let c = bound.limit().ok_or(FenError::UnboundedSize("the perfect-existence tester"))?;
    let start = snapshot_ledger(graph, None);
    let n = graph.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = Vec::new();
    let mut witnesses = Vec::new();
    if n > 0 {
        for _ in 0..sample_size(epsilon) {
            let v = rng.gen_range(1..=n);
            sample.push(v);
            let before = snapshot_ledger(graph, None);
            if let Some(evidence) = friend_component_violation(graph, v, c)? {
                witnesses.push(WitnessReport {
                    player: v,
                    concept: StabilityConcept::Perfect,
                    verdict: true,
                    evidence: Some(evidence),
                    queries: snapshot_ledger(graph, None).since(&before),
                });
                break;
            }
        }
    }
    let decision = if witnesses.is_empty() { Decision::Accept } else { Decision::Reject };
    Ok(TesterVerdict {
        decision,
        sample,
        witnesses,
        ledger: snapshot_ledger(graph, None).since(&start),
        seed,
        epsilon,
        concept: None,
    })
}

/// Explores the friend component of `v`, reading at most `c` adjacency lists.
fn friend_component_violation(graph: &mut GraphOracle<'_>, v: Player, c: usize) -> Result<Option<Evidence>> {
    let mut seen: Vec<Player> = vec![v];
    let mut queue = VecDeque::from([v]);
    let mut enemy_edges: Vec<(Player, Player)> = Vec::new();
    while let Some(u) = queue.pop_front() {
        for (w, rel) in graph.neighbors(u)? {
            match rel {
                Relation::Enemy => enemy_edges.push((u, w)),
                Relation::Friend if !seen.contains(&w) => {
                    seen.push(w);
                    if seen.len() > c {
                        seen.sort_unstable();
                        return Ok(Some(Evidence::OversizedComponent { component: seen }));
                    }
                    queue.push_back(w);
                }
                Relation::Friend => {}
            }
        }
    }
    if let Some(&(a, b)) = enemy_edges.iter().find(|(_, b)| seen.contains(b)) {
        seen.sort_unstable();
        return Ok(Some(Evidence::EnemyInComponent { component: seen, u: a.min(b), v: a.max(b) }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{FenGame, UtilityParams};
    use crate::partition::CoalitionStructure;

    fn game_a() -> FenGame {
        FenGame::with_edges(
            3,
            2,
            UtilityParams::default(),
            [(Relation::Friend, 1, 2), (Relation::Friend, 2, 3), (Relation::Enemy, 1, 3)],
        )
        .unwrap()
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(sample_size(Epsilon::new(1.0).unwrap()), 2);
        assert_eq!(sample_size("1/3".parse().unwrap()), 4);
        assert_eq!(sample_size("0.1".parse().unwrap()), 11);
        assert_eq!(sample_size("0.5".parse().unwrap()), 3);
        assert_eq!(sample_size("0.25".parse().unwrap()), 5);
        assert_eq!(sample_size("0.125".parse().unwrap()), 9);
    }

    #[test]
    fn epsilon_range() {
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(1.5).is_err());
        assert!(Epsilon::new(f64::NAN).is_err());
        assert!("x".parse::<Epsilon>().is_err());
        assert!("1/0".parse::<Epsilon>().is_err());
        assert_eq!("1".parse::<Epsilon>().unwrap().value(), 1.0);
    }

    #[test]
    fn core_tester_rejects_exactly_when_player_1_or_2_sampled() {
        let a = game_a();
        let p = CoalitionStructure::singletons(3);
        for seed in 0..200 {
            let config = TesterConfig {
                epsilon: "1/3".parse().unwrap(),
                concept: StabilityConcept::CoreStable,
                bound: SizeBound::Unbounded,
                seed,
            };
            let verdict = verification_tester(&mut GraphOracle::new(&a), &mut PartitionOracle::new(&p), &config).unwrap();
            // player 3 is also a witness via {2,3}, so any sample rejects
            assert!(verdict.rejected());
            assert_eq!(verdict.sample.len(), 1);
            assert_eq!(verdict.witnesses.len(), 1);
        }
    }

    #[test]
    fn single_player_is_accepted() {
        let g = FenGame::new(1, 1, UtilityParams::default()).unwrap();
        let p = CoalitionStructure::singletons(1);
        for concept in StabilityConcept::ALL {
            let config = TesterConfig { epsilon: Epsilon::new(0.5).unwrap(), concept, bound: SizeBound::Unbounded, seed: 1 };
            let v = verification_tester(&mut GraphOracle::new(&g), &mut PartitionOracle::new(&p), &config).unwrap();
            assert_eq!(v.decision, Decision::Accept);
            assert_eq!(v.sample, vec![1, 1, 1]);
        }
    }

    #[test]
    fn determinism_per_seed() {
        let g = crate::generate::random_game(50, 4, UtilityParams::default(), 3);
        let p = crate::generate::random_partition(50, SizeBound::Bounded(3), 4);
        let config = TesterConfig {
            epsilon: Epsilon::new(0.2).unwrap(),
            concept: StabilityConcept::Nash,
            bound: SizeBound::Bounded(3),
            seed: 99,
        };
        let run = || verification_tester(&mut GraphOracle::new(&g), &mut PartitionOracle::new(&p), &config).unwrap();
        assert_eq!(run(), run());
    }

    #[test]
    fn existence_tester_examples() {
        let a = game_a();
        for seed in 0..50 {
            let v = perfect_existence_tester(&mut GraphOracle::new(&a), Epsilon::new(0.9).unwrap(), SizeBound::Bounded(3), seed).unwrap();
            assert!(v.rejected());
            let w = &v.witnesses[0];
            assert_eq!(
                w.evidence,
                Some(Evidence::EnemyInComponent { component: vec![1, 2, 3], u: 1, v: 3 })
            );
            assert!(w.evidence.as_ref().unwrap().replays(
                &a,
                &CoalitionStructure::singletons(3),
                StabilityConcept::Perfect,
                w.player,
                SizeBound::Bounded(3)
            ));
        }
        let enemies_only = FenGame::with_edges(4, 3, UtilityParams::default(), [(Relation::Enemy, 1, 2), (Relation::Enemy, 3, 4)]).unwrap();
        let v = perfect_existence_tester(&mut GraphOracle::new(&enemies_only), Epsilon::new(0.1).unwrap(), SizeBound::Bounded(1), 5).unwrap();
        assert_eq!(v.decision, Decision::Accept);
        assert_eq!(v.sample.len(), 11);
        assert!(matches!(
            perfect_existence_tester(&mut GraphOracle::new(&a), Epsilon::new(0.5).unwrap(), SizeBound::Unbounded, 0),
            Err(FenError::UnboundedSize(_))
        ));
    }

    #[test]
    fn oversized_path_is_rejected_with_at_most_c_times_d_queries() {
        // friend path 1-2-3-4 (c + 1 = 4 vertices) plus isolated players
        let g = FenGame::with_edges(
            10,
            3,
            UtilityParams::default(),
            [(Relation::Friend, 1, 2), (Relation::Friend, 2, 3), (Relation::Friend, 3, 4)],
        )
        .unwrap();
        for seed in 0..100 {
            let v = perfect_existence_tester(&mut GraphOracle::new(&g), Epsilon::new(1.0).unwrap(), SizeBound::Bounded(3), seed).unwrap();
            let hit = v.sample.iter().any(|&p| p <= 4);
            assert_eq!(v.rejected(), hit);
            for w in &v.witnesses {
                assert!(matches!(w.evidence, Some(Evidence::OversizedComponent { .. })));
                assert!(w.queries.neighbor <= 3 * 3);
            }
        }
    }

    #[test]
    fn verdict_json_shape() {
        let a = game_a();
        let p = CoalitionStructure::singletons(3);
        let config = TesterConfig { epsilon: Epsilon::new(0.5).unwrap(), concept: StabilityConcept::CoreStable, bound: SizeBound::Bounded(3), seed: 7 };
        let v = verification_tester(&mut GraphOracle::new(&a), &mut PartitionOracle::new(&p), &config).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        for key in ["decision", "sample", "witnesses", "queries", "seed", "epsilon", "concept"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        for key in ["neighbor", "find", "member", "total"] {
            assert!(json["queries"].get(key).is_some());
        }
        assert_eq!(json["decision"], "reject");
        let back: TesterVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }
}
