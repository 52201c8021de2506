//! Ground truth by direct evaluation of the stability definitions.
//!
//! Nothing here goes through the oracles or the witness predicates: every
//! check scans the definitions literally (all coalitions of `Γ ∪ {∅}` for
//! individual deviations, all player sets of admissible size for the core),
//! so agreement with the testers is a meaningful cross-check.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::enumerate::for_each_partition;
use crate::error::{FenError, Result};
use crate::game::{FenGame, Player, Relation, SizeBound};
use crate::partition::{CoalitionKey, CoalitionStructure};
use crate::witness::{repair_all_witnesses, Evidence, StabilityConcept};

/// Largest `n` for which set partitions are enumerated (Bell(10) = 115975).
pub const PARTITION_ENUMERATION_LIMIT: usize = 10;
/// Largest `n` for the exhaustive Nash search.
pub const NASH_EXHAUSTIVE_LIMIT: usize = 12;
/// Largest `n` for exhaustive edit-distance search.
pub const EDIT_SEARCH_LIMIT: usize = 6;
/// Core checks enumerate all player sets when there are at most this many.
const SUBSET_SCAN_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub player: Player,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityCertificate {
    pub stable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concept: Option<StabilityConcept>,
    pub witnesses: Vec<Witness>,
    /// A stable (or perfect) structure for existence questions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<CoalitionStructure>,
    /// Why no perfect structure exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Evidence>,
}

fn check_inputs(game: &FenGame, partition: &CoalitionStructure, bound: SizeBound) -> Result<()> {
    if game.n() != partition.n() {
        return Err(FenError::SizeMismatch { game: game.n(), partition: partition.n() });
    }
    if let Some(c) = bound.limit() {
        if let Some(big) = partition.coalitions().iter().find(|coal| coal.len() > c) {
            return Err(FenError::CoalitionTooLarge { size: big.len(), bound: c });
        }
    }
    Ok(())
}

/// Decides stability of `partition` for `concept` without sampling and lists
/// every witness with evidence.
pub fn exact_verify(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
) -> Result<StabilityCertificate> {
    check_inputs(game, partition, bound)?;
    let witnesses = match concept {
        StabilityConcept::CoreStable => core_witnesses(game, partition, bound)?,
        _ => {
            let mut out = Vec::new();
            for i in 1..=game.n() {
                if let Some(evidence) = individual_violation(game, partition, concept, i, bound)? {
                    out.push(Witness { player: i, evidence });
                }
            }
            out
        }
    };
    Ok(StabilityCertificate {
        stable: witnesses.is_empty(),
        concept: Some(concept),
        witnesses,
        structure: None,
        violation: None,
    })
}

fn individual_violation(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    i: Player,
    bound: SizeBound,
) -> Result<Option<Evidence>> {
    let own = partition.coalition_of(i);
    let current = game.utility(i, own)?;
    match concept {
        StabilityConcept::Perfect => {
            if current >= game.max_utility(i, bound) {
                return Ok(None);
            }
            let take = bound.limit().map_or(usize::MAX, |c| c - 1);
            let mut better: Vec<Player> = game.friends(i).iter().copied().take(take).collect();
            better.push(i);
            better.sort_unstable();
            return Ok(Some(Evidence::Better { coalition: better }));
        }
        StabilityConcept::IndividuallyRational => {
            return Ok((current < 0).then_some(Evidence::Singleton));
        }
        _ => {}
    }

    // CIS: leaving must not hurt anyone left behind.
    if concept == StabilityConcept::ContractuallyIndividuallyStable {
        let rest: Vec<Player> = own.iter().copied().filter(|&j| j != i).collect();
        for &j in &rest {
            if game.prefers(j, own, &rest)? {
                return Ok(None);
            }
        }
    }
    // ∅ first, then every other coalition of Γ with room for i.
    if current < 0 {
        return Ok(Some(Evidence::Singleton));
    }
    for (idx, target) in partition.coalitions().iter().enumerate() {
        let key = CoalitionKey(idx);
        if key == partition.key_of(i) || !bound.admits(target.len() + 1) {
            continue;
        }
        let mut joined = target.clone();
        joined.push(i);
        if game.utility(i, &joined)? <= current {
            continue;
        }
        if concept != StabilityConcept::Nash {
            let mut vetoed = false;
            for &j in target {
                if game.prefers(j, target, &joined)? {
                    vetoed = true;
                    break;
                }
            }
            if vetoed {
                continue;
            }
        }
        let via = target
            .iter()
            .copied()
            .find(|&j| game.relation(i, j) == Some(Relation::Friend))
            .expect("an improving target holds a friend");
        return Ok(Some(Evidence::Join { key, via }));
    }
    Ok(None)
}

fn blocks(game: &FenGame, partition: &CoalitionStructure, set: &[Player]) -> Result<bool> {
    for &j in set {
        if !game.prefers(j, set, partition.coalition_of(j))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn subset_count(n: usize, c: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 1..=c.min(n) {
        binom = binom * (n - k + 1) as u128 / k as u128;
        total += binom;
        if total > SUBSET_SCAN_LIMIT {
            break;
        }
    }
    total
}

/// Every player lying in some blocking coalition of size at most `c`.
fn core_witnesses(game: &FenGame, partition: &CoalitionStructure, bound: SizeBound) -> Result<Vec<Witness>> {
    let n = game.n();
    let c = bound.limit().unwrap_or(n).min(n);
    let mut evidence: Vec<Option<Vec<Player>>> = vec![None; n];
    let record = |set: &[Player], evidence: &mut Vec<Option<Vec<Player>>>| {
        for &j in set {
            if evidence[j - 1].is_none() {
                evidence[j - 1] = Some(set.to_vec());
            }
        }
    };
    if subset_count(n, c) <= SUBSET_SCAN_LIMIT {
        for k in 1..=c {
            let mut combo: Vec<Player> = (1..=k).collect();
            loop {
                if blocks(game, partition, &combo)? {
                    record(&combo, &mut evidence);
                }
                // next k-combination of 1..=n in lexicographic order
                let Some(pos) = (0..k).rev().find(|&t| combo[t] < n - (k - 1 - t)) else { break };
                combo[pos] += 1;
                for t in pos + 1..k {
                    combo[t] = combo[t - 1] + 1;
                }
            }
        }
    } else {
        // Components of a blocking set block too, so connected sets suffice.
        for root in 1..=n {
            let mut level: BTreeSet<Vec<Player>> = BTreeSet::from([vec![root]]);
            for size in 1..=c {
                for set in &level {
                    if blocks(game, partition, set)? {
                        record(set, &mut evidence);
                    }
                }
                if size == c {
                    break;
                }
                let mut next = BTreeSet::new();
                for set in &level {
                    for &m in set {
                        for &j in game.friends(m).iter().chain(game.enemies(m)) {
                            if j > root && set.binary_search(&j).is_err() {
                                let mut grown = set.clone();
                                grown.insert(grown.binary_search(&j).unwrap_err(), j);
                                next.insert(grown);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                level = next;
            }
        }
    }
    Ok(evidence
        .into_iter()
        .enumerate()
        .filter_map(|(idx, set)| set.map(|coalition| Witness { player: idx + 1, evidence: Evidence::Blocking { coalition } }))
        .collect())
}

/// Friend-graph components, each sorted, ordered by smallest member.
pub fn friend_components(game: &FenGame) -> Vec<Vec<Player>> {
    let n = game.n();
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 1..=n {
        if label[start - 1] != usize::MAX {
            continue;
        }
        let id = components.len();
        label[start - 1] = id;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in game.friends(v) {
                if label[w - 1] == usize::MAX {
                    label[w - 1] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Decides whether some structure with parts of size at most `bound` gives
/// every player all of its friends and none of its enemies. Such a structure
/// exists exactly when each friend component is small enough and holds no
/// enemy edge; the components themselves are then that structure.
pub fn exact_perfect_exists(game: &FenGame, bound: SizeBound) -> StabilityCertificate {
    let components = friend_components(game);
    let mut violation = None;
    for component in &components {
        let enemy_inside = component.iter().find_map(|&u| {
            game.enemies(u)
                .iter()
                .find(|&&v| v > u && component.binary_search(&v).is_ok())
                .map(|&v| (u, v))
        });
        if let Some((u, v)) = enemy_inside {
            violation = Some(Evidence::EnemyInComponent { component: component.clone(), u, v });
            break;
        }
        if !bound.admits(component.len()) {
            violation = Some(Evidence::OversizedComponent { component: component.clone() });
            break;
        }
    }
    let stable = violation.is_none();
    StabilityCertificate {
        stable,
        concept: Some(StabilityConcept::Perfect),
        witnesses: Vec::new(),
        structure: stable.then(|| {
            CoalitionStructure::new(game.n(), components, bound).expect("components respect the bound")
        }),
        violation,
    }
}

/// Same question as [`exact_perfect_exists`], answered by scanning every
/// partition with parts of size at most `bound` and checking that each
/// player's coalition maximises its utility over all coalitions.
pub fn exact_perfect_exists_bruteforce(game: &FenGame, bound: SizeBound) -> Result<bool> {
    let n = game.n();
    if n > PARTITION_ENUMERATION_LIMIT {
        return Err(FenError::TooLarge { n, max: PARTITION_ENUMERATION_LIMIT });
    }
    let flow = for_each_partition(
        n,
        bound,
        // an enemy in the block can never be part of a favourite coalition
        |block, p| block.iter().all(|&q| game.relation(p, q) != Some(Relation::Enemy)),
        |blocks| {
            let all_favourite = blocks.iter().all(|block| {
                block
                    .iter()
                    .all(|&i| game.is_favourite(i, block, SizeBound::Unbounded).unwrap_or(false))
            });
            if all_favourite { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
        },
    );
    Ok(flow.is_break())
}

/// One improving move of the local search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashMove {
    pub player: Player,
    /// Coalition joined, or `None` for leaving to be alone.
    pub target: Option<usize>,
    pub gain: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NashSearch {
    pub structure: CoalitionStructure,
    pub moves: Vec<NashMove>,
    /// Social welfare `Σ_i u_i(Γ(i))` before the first and after every move.
    pub potentials: Vec<i64>,
}

/// Sum of all players' utilities for the labelling `labels` (`labels[p-1]` is
/// the coalition id of `p`).
pub fn social_welfare(game: &FenGame, labels: &[usize]) -> i64 {
    let params = game.params();
    (1..=game.n())
        .map(|i| {
            let friends = game.friends(i).iter().filter(|&&j| labels[j - 1] == labels[i - 1]).count() as i64;
            let enemies = game.enemies(i).iter().filter(|&&j| labels[j - 1] == labels[i - 1]).count() as i64;
            params.friend * friends - params.enemy * enemies
        })
        .sum()
}

/// Improving-move dynamics from the all-singletons structure. Each move
/// raises social welfare by twice the mover's gain, so the search ends in a
/// Nash-stable structure. Ties: smallest deviating player, then the best
/// target, preferring being alone and then the smallest coalition id.
pub fn nash_local_search(game: &FenGame, bound: SizeBound) -> NashSearch {
    let n = game.n();
    let params = game.params();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut moves = Vec::new();
    let mut potentials = vec![social_welfare(game, &labels)];

    'search: loop {
        for i in 1..=n {
            let home = labels[i - 1];
            let mut gains: Vec<(usize, i64)> = Vec::new();
            for &(list, value) in &[(game.friends(i), params.friend), (game.enemies(i), -params.enemy)] {
                for &j in list {
                    let l = labels[j - 1];
                    match gains.iter_mut().find(|(k, _)| *k == l) {
                        Some(entry) => entry.1 += value,
                        None => gains.push((l, value)),
                    }
                }
            }
            let current = gains.iter().find(|(k, _)| *k == home).map_or(0, |&(_, v)| v);
            let mut best: Option<(Option<usize>, i64)> = None;
            if sizes[home] > 1 && current < 0 {
                best = Some((None, 0));
            }
            gains.sort_unstable();
            for &(l, value) in &gains {
                if l == home || !bound.admits(sizes[l] + 1) || value <= current {
                    continue;
                }
                if best.map_or(true, |(_, b)| value > b) {
                    best = Some((Some(l), value));
                }
            }
            let Some((target, value)) = best else { continue };
            let new_label = match target {
                Some(l) => l,
                None => (0..n).find(|&l| sizes[l] == 0).expect("a free coalition id exists"),
            };
            sizes[home] -= 1;
            sizes[new_label] += 1;
            labels[i - 1] = new_label;
            let potential = social_welfare(game, &labels);
            let last = *potentials.last().expect("initial potential");
            debug_assert!(potential > last, "improving move must raise social welfare");
            potentials.push(potential);
            moves.push(NashMove { player: i, target, gain: value - current });
            continue 'search;
        }
        break;
    }
    let structure = CoalitionStructure::from_labels(&labels, bound).expect("local search respects the bound");
    NashSearch { structure, moves, potentials }
}

/// A Nash-stable structure with parts of size at most `bound`.
pub fn find_nash_stable(game: &FenGame, bound: SizeBound) -> CoalitionStructure {
    nash_local_search(game, bound).structure
}

/// First Nash-stable structure in enumeration order, for `n` up to
/// [`NASH_EXHAUSTIVE_LIMIT`].
pub fn find_nash_stable_exhaustive(game: &FenGame, bound: SizeBound) -> Result<Option<CoalitionStructure>> {
    let n = game.n();
    if n > NASH_EXHAUSTIVE_LIMIT {
        return Err(FenError::TooLarge { n, max: NASH_EXHAUSTIVE_LIMIT });
    }
    let mut found = None;
    let mut failure = None;
    let _ = for_each_partition(
        n,
        bound,
        |_, _| true,
        |blocks| {
            let gamma = CoalitionStructure::new(n, blocks.to_vec(), bound).expect("valid partition");
            match exact_verify(game, &gamma, StabilityConcept::Nash, bound) {
                Ok(cert) if cert.stable => {
                    found = Some(gamma);
                    ControlFlow::Break(())
                }
                Ok(_) => ControlFlow::Continue(()),
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            }
        },
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(found),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum DistanceCertificate {
    /// The partition is already stable.
    Stable,
    /// Exhaustive search over all games within the upper bound.
    Exhaustive,
    /// Pairwise disjoint player sets, each of which must be touched by some
    /// modification; one modification touches at most two of them.
    DisjointViolations { sets: Vec<Vec<Player>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceBounds {
    pub lower: usize,
    pub upper: usize,
    pub witnesses: usize,
    pub certificate: DistanceCertificate,
}

/// Provable bounds on the number of edge modifications needed to make
/// `partition` stable. The upper bound is the length of the witness repair.
/// The lower bound is exact for `n ≤ 6` and otherwise comes from disjoint
/// violations: every witness of an individual concept needs an edit at
/// itself, and every blocking coalition needs an edit at one of its members.
pub fn certified_far_distance(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
) -> Result<DistanceBounds> {
    let cert = exact_verify(game, partition, concept, bound)?;
    if cert.stable {
        return Ok(DistanceBounds { lower: 0, upper: 0, witnesses: 0, certificate: DistanceCertificate::Stable });
    }
    let upper = repair_all_witnesses(game, partition, concept, bound)?.script.cost();
    let witnesses = cert.witnesses.len();
    if game.n() <= EDIT_SEARCH_LIMIT {
        let exact = exhaustive_edit_distance(game, partition, concept, bound, upper)?;
        return Ok(DistanceBounds { lower: exact, upper, witnesses, certificate: DistanceCertificate::Exhaustive });
    }
    let sets = disjoint_violations(&cert, concept);
    Ok(DistanceBounds {
        lower: sets.len().div_ceil(2),
        upper,
        witnesses,
        certificate: DistanceCertificate::DisjointViolations { sets },
    })
}

/// Greedy packing of pairwise disjoint violation sets from a certificate.
pub fn disjoint_violations(cert: &StabilityCertificate, concept: StabilityConcept) -> Vec<Vec<Player>> {
    let mut used: BTreeSet<Player> = BTreeSet::new();
    let mut sets = Vec::new();
    for w in &cert.witnesses {
        let set = match (&w.evidence, concept) {
            (Evidence::Blocking { coalition }, StabilityConcept::CoreStable) => coalition.clone(),
            _ => vec![w.player],
        };
        if set.iter().all(|p| !used.contains(p)) {
            used.extend(set.iter().copied());
            sets.push(set);
        }
    }
    sets
}

/// Smallest number of modifications turning `game` into a game (same `n`,
/// `d`, parameters) in which `partition` is stable, searching all pair
/// relabellings of total cost below `upper`.
pub fn exhaustive_edit_distance(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
    upper: usize,
) -> Result<usize> {
    let n = game.n();
    if n > EDIT_SEARCH_LIMIT {
        return Err(FenError::TooLarge { n, max: EDIT_SEARCH_LIMIT });
    }
    let pairs: Vec<(Player, Player)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
    let mut labels: Vec<Option<Relation>> = pairs.iter().map(|&(u, v)| game.relation(u, v)).collect();
    let mut best = upper;
    search_edits(game, partition, concept, bound, &pairs, &mut labels, 0, 0, &mut best)?;
    Ok(best)
}

fn relabel_cost(from: Option<Relation>, to: Option<Relation>) -> usize {
    match (from, to) {
        (a, b) if a == b => 0,
        (None, _) | (_, None) => 1,
        _ => 2,
    }
}

#[allow(clippy::too_many_arguments)]
fn search_edits(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
    pairs: &[(Player, Player)],
    labels: &mut [Option<Relation>],
    from: usize,
    cost: usize,
    best: &mut usize,
) -> Result<()> {
    if cost > 0 && cost < *best {
        let edges = pairs.iter().zip(labels.iter()).filter_map(|(&(u, v), l)| l.map(|rel| (rel, u, v)));
        if let Ok(candidate) = FenGame::with_edges(game.n(), game.degree_bound(), game.params(), edges) {
            if exact_verify(&candidate, partition, concept, bound)?.stable {
                *best = cost;
                return Ok(());
            }
        }
    }
    for idx in from..pairs.len() {
        let original = labels[idx];
        for alt in [None, Some(Relation::Friend), Some(Relation::Enemy)] {
            let step = relabel_cost(original, alt);
            if step == 0 || cost + step >= *best {
                continue;
            }
            labels[idx] = alt;
            search_edits(game, partition, concept, bound, pairs, labels, idx + 1, cost + step, best)?;
            labels[idx] = original;
        }
    }
    Ok(())
}
