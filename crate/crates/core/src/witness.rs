//! Per-player witness predicates for the six stability concepts.
//!
//! A partition is stable for a concept exactly when no player is a witness.
//! Each predicate reads only through the oracles and touches a constant
//! neighbourhood of the player: its adjacency and the coalition keys of its
//! neighbours. Core stability additionally walks connected sets of bounded
//! size around the player.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edit::{EditOp, EditScript};
use crate::error::{FenError, Result};
use crate::game::{FenGame, Player, Relation, SizeBound, UtilityParams};
use crate::oracle::{snapshot_ledger, GraphOracle, PartitionOracle, QueryLedger};
use crate::partition::{CoalitionKey, CoalitionStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StabilityConcept {
    #[serde(rename = "perfect")]
    Perfect,
    #[serde(rename = "ir")]
    IndividuallyRational,
    #[serde(rename = "nash")]
    Nash,
    #[serde(rename = "is")]
    IndividuallyStable,
    #[serde(rename = "cis")]
    ContractuallyIndividuallyStable,
    #[serde(rename = "core")]
    CoreStable,
}

impl StabilityConcept {
    pub const ALL: [StabilityConcept; 6] = [
        StabilityConcept::Perfect,
        StabilityConcept::IndividuallyRational,
        StabilityConcept::Nash,
        StabilityConcept::IndividuallyStable,
        StabilityConcept::ContractuallyIndividuallyStable,
        StabilityConcept::CoreStable,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            StabilityConcept::Perfect => "perfect",
            StabilityConcept::IndividuallyRational => "ir",
            StabilityConcept::Nash => "nash",
            StabilityConcept::IndividuallyStable => "is",
            StabilityConcept::ContractuallyIndividuallyStable => "cis",
            StabilityConcept::CoreStable => "core",
        }
    }

    /// Concepts whose witness condition depends only on the player's own edges.
    pub fn is_individual(self) -> bool {
        self != StabilityConcept::CoreStable
    }
}

impl fmt::Display for StabilityConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StabilityConcept {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "perfect" | "perfection" => StabilityConcept::Perfect,
            "ir" | "individually-rational" => StabilityConcept::IndividuallyRational,
            "nash" | "nash-stable" => StabilityConcept::Nash,
            "is" | "individually-stable" => StabilityConcept::IndividuallyStable,
            "cis" | "contractually-individually-stable" => StabilityConcept::ContractuallyIndividuallyStable,
            "core" | "core-stable" => StabilityConcept::CoreStable,
            other => return Err(FenError::InvalidSpec(format!("unknown stability concept `{other}`"))),
        })
    }
}

/// Why a player is a witness. Every variant can be replayed against the
/// exact game with [`Evidence::replays`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// The player strictly prefers being alone.
    Singleton,
    /// The player gains by joining the coalition `key`, which contains friend `via`.
    Join { key: CoalitionKey, via: Player },
    /// A strictly better coalition of admissible size.
    Better { coalition: Vec<Player> },
    /// Every member strictly prefers this coalition to its current one.
    Blocking { coalition: Vec<Player> },
    /// A friend-connected set larger than the size bound.
    OversizedComponent { component: Vec<Player> },
    /// A friend-connected set containing both endpoints of an enemy edge.
    EnemyInComponent { component: Vec<Player>, u: Player, v: Player },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub player: Player,
    pub concept: StabilityConcept,
    pub verdict: bool,
    pub evidence: Option<Evidence>,
    pub queries: QueryLedger,
}

/// What one player sees: its labelled adjacency with each neighbour's coalition key.
#[derive(Debug, Clone)]
struct LocalView {
    key: CoalitionKey,
    adjacency: Vec<(Player, Relation, CoalitionKey)>,
}

impl LocalView {
    fn fetch(graph: &mut GraphOracle<'_>, partition: &mut PartitionOracle<'_>, v: Player) -> Result<Self> {
        let neighbors = graph.neighbors(v)?;
        let key = partition.find(v)?;
        let mut adjacency = Vec::with_capacity(neighbors.len());
        for (j, rel) in neighbors {
            adjacency.push((j, rel, partition.find(j)?));
        }
        Ok(Self { key, adjacency })
    }

    /// Utility of joining coalition `key` (own coalition when `key == self.key`).
    fn utility_in(&self, key: CoalitionKey, params: UtilityParams) -> i64 {
        self.adjacency
            .iter()
            .filter(|&&(_, _, k)| k == key)
            .map(|&(_, rel, _)| relation_value(rel, params))
            .sum()
    }

    fn current(&self, params: UtilityParams) -> i64 {
        self.utility_in(self.key, params)
    }

    fn friend_count(&self) -> usize {
        self.adjacency.iter().filter(|&&(_, rel, _)| rel == Relation::Friend).count()
    }

    fn has_in(&self, key: CoalitionKey, rel: Relation) -> bool {
        self.adjacency.iter().any(|&(_, r, k)| r == rel && k == key)
    }

    fn best_possible(&self, params: UtilityParams, bound: SizeBound) -> i64 {
        let friends = self.friend_count();
        let usable = bound.limit().map_or(friends, |c| friends.min(c.saturating_sub(1)));
        params.friend * usable as i64
    }

    /// Utility of `v` inside the sorted player set `set`.
    fn utility_of_set(&self, set: &[Player], params: UtilityParams) -> i64 {
        self.adjacency
            .iter()
            .filter(|(j, _, _)| set.binary_search(j).is_ok())
            .map(|&(_, rel, _)| relation_value(rel, params))
            .sum()
    }
}

fn relation_value(rel: Relation, params: UtilityParams) -> i64 {
    match rel {
        Relation::Friend => params.friend,
        Relation::Enemy => -params.enemy,
    }
}

/// Evaluates the witness predicate of `concept` for player `i`.
pub fn phi(
    concept: StabilityConcept,
    graph: &mut GraphOracle<'_>,
    partition: &mut PartitionOracle<'_>,
    i: Player,
    bound: SizeBound,
) -> Result<WitnessReport> {
    if graph.n() != partition.n() {
        return Err(FenError::SizeMismatch { game: graph.n(), partition: partition.n() });
    }
    let start = snapshot_ledger(graph, Some(partition));
    let params = graph.params();
    let view = LocalView::fetch(graph, partition, i)?;
    let evidence = match concept {
        StabilityConcept::Perfect => perfect_witness(&view, i, params, bound),
        StabilityConcept::IndividuallyRational => (view.current(params) < 0).then_some(Evidence::Singleton),
        StabilityConcept::Nash
        | StabilityConcept::IndividuallyStable
        | StabilityConcept::ContractuallyIndividuallyStable => {
            deviation_witness(concept, &view, partition, params, bound)?
        }
        StabilityConcept::CoreStable => core_witness(graph, partition, view, i, params, bound)?,
    };
    let queries = snapshot_ledger(graph, Some(partition)).since(&start);
    Ok(WitnessReport { player: i, concept, verdict: evidence.is_some(), evidence, queries })
}

fn perfect_witness(view: &LocalView, i: Player, params: UtilityParams, bound: SizeBound) -> Option<Evidence> {
    if view.current(params) >= view.best_possible(params, bound) {
        return None;
    }
    let take = bound.limit().map_or(usize::MAX, |c| c - 1);
    let mut coalition: Vec<Player> = view
        .adjacency
        .iter()
        .filter(|&&(_, rel, _)| rel == Relation::Friend)
        .map(|&(j, _, _)| j)
        .take(take)
        .collect();
    coalition.push(i);
    coalition.sort_unstable();
    Some(Evidence::Better { coalition })
}

/// Nash, IS and CIS: only `{i}` or a coalition holding a friend can be an
/// improving target, so at most `d + 1` candidates are examined.
fn deviation_witness(
    concept: StabilityConcept,
    view: &LocalView,
    partition: &mut PartitionOracle<'_>,
    params: UtilityParams,
    bound: SizeBound,
) -> Result<Option<Evidence>> {
    if concept == StabilityConcept::ContractuallyIndividuallyStable && view.has_in(view.key, Relation::Friend) {
        // a friend in the current coalition vetoes leaving
        return Ok(None);
    }
    let current = view.current(params);
    if current < 0 {
        return Ok(Some(Evidence::Singleton));
    }
    let mut examined: Vec<CoalitionKey> = Vec::new();
    for &(j, rel, key) in &view.adjacency {
        if rel != Relation::Friend || key == view.key || examined.contains(&key) {
            continue;
        }
        examined.push(key);
        if view.utility_in(key, params) <= current {
            continue;
        }
        if concept != StabilityConcept::Nash && view.has_in(key, Relation::Enemy) {
            continue;
        }
        if let Some(c) = bound.limit() {
            // joining needs |C| < c, i.e. no c-th member
            if partition.member(key, c)?.is_some() {
                continue;
            }
        }
        return Ok(Some(Evidence::Join { key, via: j }));
    }
    Ok(None)
}

fn core_witness(
    graph: &mut GraphOracle<'_>,
    partition: &mut PartitionOracle<'_>,
    view: LocalView,
    i: Player,
    params: UtilityParams,
    bound: SizeBound,
) -> Result<Option<Evidence>> {
    if view.current(params) < 0 {
        return Ok(Some(Evidence::Blocking { coalition: vec![i] }));
    }
    // Players already at their best utility can never strictly gain, so no
    // blocking set contains them and connected sets are grown around them.
    let satisfied = |v: &LocalView| v.current(params) >= v.best_possible(params, bound);
    if satisfied(&view) {
        return Ok(None);
    }
    let limit = bound.limit().unwrap_or(graph.n()).min(graph.n());
    let mut views: HashMap<Player, LocalView> = HashMap::new();
    views.insert(i, view);

    let mut frontier: Vec<Vec<Player>> = vec![vec![i]];
    for _size in 2..=limit {
        let mut next: BTreeSet<Vec<Player>> = BTreeSet::new();
        for set in &frontier {
            for &m in set {
                let neighbours: Vec<Player> = views[&m].adjacency.iter().map(|&(j, _, _)| j).collect();
                for j in neighbours {
                    if set.binary_search(&j).is_ok() {
                        continue;
                    }
                    if let std::collections::hash_map::Entry::Vacant(slot) = views.entry(j) {
                        slot.insert(LocalView::fetch(graph, partition, j)?);
                    }
                    if satisfied(&views[&j]) {
                        continue;
                    }
                    let mut grown = set.clone();
                    let pos = grown.binary_search(&j).unwrap_err();
                    grown.insert(pos, j);
                    next.insert(grown);
                }
            }
        }
        for set in &next {
            let blocks = set.iter().all(|p| {
                let v = &views[p];
                v.utility_of_set(set, params) > v.current(params)
            });
            if blocks {
                return Ok(Some(Evidence::Blocking { coalition: set.clone() }));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next.into_iter().collect();
    }
    Ok(None)
}

/// Runs `phi` for every player on fresh oracles and keeps the witnesses.
pub fn all_witnesses(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
) -> Result<Vec<WitnessReport>> {
    let mut graph = GraphOracle::new(game);
    let mut oracle = PartitionOracle::new(partition);
    let mut out = Vec::new();
    for i in 1..=game.n() {
        let report = phi(concept, &mut graph, &mut oracle, i, bound)?;
        if report.verdict {
            out.push(report);
        }
    }
    Ok(out)
}

impl Evidence {
    /// Checks the evidence directly against the game, without oracles.
    pub fn replays(
        &self,
        game: &FenGame,
        partition: &CoalitionStructure,
        concept: StabilityConcept,
        i: Player,
        bound: SizeBound,
    ) -> bool {
        let own = partition.coalition_of(i);
        let Ok(current) = game.utility(i, own) else { return false };
        let friend_at_home = own.iter().any(|&j| game.relation(i, j) == Some(Relation::Friend));
        match self {
            Evidence::Singleton => {
                let veto = concept == StabilityConcept::ContractuallyIndividuallyStable && friend_at_home;
                current < 0 && !veto
            }
            Evidence::Join { key, via } => {
                let Some(target) = partition.members(*key) else { return false };
                if *key == partition.key_of(i) || !target.contains(via) || !bound.admits(target.len() + 1) {
                    return false;
                }
                let mut joined = target.to_vec();
                joined.push(i);
                let gains = game.utility(i, &joined).is_ok_and(|u| u > current);
                let enemy_inside = target.iter().any(|&j| game.relation(i, j) == Some(Relation::Enemy));
                match concept {
                    StabilityConcept::Nash => gains,
                    StabilityConcept::IndividuallyStable => gains && !enemy_inside,
                    StabilityConcept::ContractuallyIndividuallyStable => gains && !enemy_inside && !friend_at_home,
                    _ => false,
                }
            }
            Evidence::Better { coalition } => {
                bound.admits(coalition.len()) && game.utility(i, coalition).is_ok_and(|u| u > current)
            }
            Evidence::Blocking { coalition } => {
                bound.admits(coalition.len())
                    && coalition.contains(&i)
                    && coalition.iter().all(|&j| {
                        let now = game.utility(j, partition.coalition_of(j)).unwrap_or(i64::MAX);
                        game.utility(j, coalition).is_ok_and(|u| u > now)
                    })
            }
            Evidence::OversizedComponent { component } => {
                friend_connected(game, component) && !bound.admits(component.len())
            }
            Evidence::EnemyInComponent { component, u, v } => {
                friend_connected(game, component)
                    && component.contains(u)
                    && component.contains(v)
                    && game.relation(*u, *v) == Some(Relation::Enemy)
            }
        }
    }
}

/// True when `set` is connected using friend edges only.
pub(crate) fn friend_connected(game: &FenGame, set: &[Player]) -> bool {
    let Some(&start) = set.first() else { return false };
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &j in game.friends(v) {
            if set.contains(&j) && !seen.contains(&j) {
                seen.push(j);
                stack.push(j);
            }
        }
    }
    seen.len() == set.len()
}

/// Deletes `i`'s enemy edges inside `Γ(i)` and friend edges leaving it, which
/// makes `Γ(i)` a favourite coalition of `i` with at most `d` modifications.
/// Empty exactly when `Γ(i)` already holds all friends and no enemies.
pub fn repair_to_favourite(game: &FenGame, partition: &CoalitionStructure, i: Player) -> EditScript {
    let mut script = EditScript::default();
    for &j in game.enemies(i) {
        if partition.together(i, j) {
            script.push(EditOp::DeleteEnemy(i, j));
        }
    }
    for &j in game.friends(i) {
        if !partition.together(i, j) {
            script.push(EditOp::DeleteFriend(i, j));
        }
    }
    script
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairPlan {
    pub concept: StabilityConcept,
    pub witnesses: Vec<Player>,
    pub script: EditScript,
}

impl RepairPlan {
    /// `k·d`, the length the script may not exceed.
    pub fn length_bound(&self, degree_bound: usize) -> usize {
        self.witnesses.len() * degree_bound
    }
}

/// Repairs every witness of the original game in turn. Each player's repair
/// is computed on the game as already edited, so an edge shared by two
/// witnesses is deleted only once.
pub fn repair_all_witnesses(
    game: &FenGame,
    partition: &CoalitionStructure,
    concept: StabilityConcept,
    bound: SizeBound,
) -> Result<RepairPlan> {
    let witnesses: Vec<Player> = all_witnesses(game, partition, concept, bound)?
        .into_iter()
        .map(|r| r.player)
        .collect();
    let mut current = game.clone();
    let mut script = EditScript::default();
    for &i in &witnesses {
        for op in repair_to_favourite(&current, partition, i) {
            current.apply_op(op).map_err(|reason| FenError::InvalidEdit { index: script.cost(), reason })?;
            script.push(op);
        }
    }
    Ok(RepairPlan { concept, witnesses, script })
}
