//! Seeded instance generators.
//!
//! Random games come from edge proposals with rejection, which keeps the
//! degree bound exact. The planted families carry a [`FamilyCertificate`]
//! whose claims follow from the construction and can be replayed against
//! the exact checkers.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edit::{EditOp, EditScript};
use crate::error::{FenError, Result};
use crate::exact::{exact_perfect_exists, exact_verify};
use crate::game::{FenGame, Player, Relation, SizeBound, UtilityParams};
use crate::partition::CoalitionStructure;
use crate::witness::StabilityConcept;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomBoundedDegree,
    FriendClustersPerfect,
    EnemyPairsFar,
    FriendPathOversized,
    PlantedCoreBlocker,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::RandomBoundedDegree,
        Family::FriendClustersPerfect,
        Family::EnemyPairsFar,
        Family::FriendPathOversized,
        Family::PlantedCoreBlocker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::RandomBoundedDegree => "random-bounded-degree",
            Family::FriendClustersPerfect => "friend-clusters-perfect",
            Family::EnemyPairsFar => "enemy-pairs-far",
            Family::FriendPathOversized => "friend-path-oversized",
            Family::PlantedCoreBlocker => "planted-core-blocker",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| FenError::InvalidSpec(format!("unknown family `{s}`")))
    }
}

/// How `f` and `e` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityPreset {
    /// `f = d`, `e = 1`.
    FriendsAppreciation,
    /// `f = 1`, `e = d`.
    EnemiesAversion,
    Custom { friend: i64, enemy: i64 },
}

impl Default for UtilityPreset {
    fn default() -> Self {
        UtilityPreset::Custom { friend: 1, enemy: 1 }
    }
}

impl UtilityPreset {
    pub fn params(self, degree_bound: usize) -> Result<UtilityParams> {
        match self {
            UtilityPreset::FriendsAppreciation => Ok(UtilityParams::friends_appreciation(degree_bound)),
            UtilityPreset::EnemiesAversion => Ok(UtilityParams::enemies_aversion(degree_bound)),
            UtilityPreset::Custom { friend, enemy } => UtilityParams::new(friend, enemy),
        }
    }
}

impl FromStr for UtilityPreset {
    type Err = FenError;

    /// `friends-appreciation`, `enemies-aversion`, or `f,e`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "friends-appreciation" => Ok(UtilityPreset::FriendsAppreciation),
            "enemies-aversion" => Ok(UtilityPreset::EnemiesAversion),
            _ => {
                let bad = || FenError::InvalidSpec(format!("bad utility preset `{s}`"));
                let (f, e) = s.trim_start_matches("custom:").split_once(',').ok_or_else(bad)?;
                let friend = f.trim().parse().map_err(|_| bad())?;
                let enemy = e.trim().parse().map_err(|_| bad())?;
                UtilityParams::new(friend, enemy)?;
                Ok(UtilityPreset::Custom { friend, enemy })
            }
        }
    }
}

/// Number of planted gadgets (pairs, paths, cliques).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Planted {
    /// As many as fit into `n` players.
    Max,
    Count(usize),
}

impl FromStr for Planted {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "max" {
            return Ok(Planted::Max);
        }
        s.parse()
            .map(Planted::Count)
            .map_err(|_| FenError::InvalidSpec(format!("bad planted count `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub c: SizeBound,
    pub utility: UtilityPreset,
    pub seed: u64,
    /// Gadget count; `None` uses the family default (one path, otherwise as many as fit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Planted>,
    /// Cluster size for friend-clusters-perfect; defaults to `min(c, d+1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_size: Option<usize>,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, d: usize, c: SizeBound, seed: u64) -> Self {
        Self { family, n, d, c, utility: UtilityPreset::default(), seed, planted: None, cluster_size: None }
    }

    pub fn with_utility(mut self, utility: UtilityPreset) -> Self {
        self.utility = utility;
        self
    }

    pub fn with_planted(mut self, planted: Planted) -> Self {
        self.planted = Some(planted);
        self
    }

    pub fn with_cluster_size(mut self, size: usize) -> Self {
        self.cluster_size = Some(size);
        self
    }
}

/// What a planted family guarantees by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCertificate {
    pub spec: InstanceSpec,
    /// Concepts for which the emitted partition is stable.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stable_for: Vec<StabilityConcept>,
    /// Whether a perfect structure with parts of size at most `c` exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perfect_exists: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_concept: Option<StabilityConcept>,
    /// Exactly the witnesses of `witness_concept`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Player>>,
    /// Exact edit distance to the certified property, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_lower: Option<usize>,
    /// The instance is ε-far for every ε strictly below this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_below: Option<f64>,
    /// How the claims follow from the construction.
    pub argument: String,
}

impl FamilyCertificate {
    fn empty(spec: InstanceSpec, argument: &str) -> Self {
        Self {
            spec,
            stable_for: Vec::new(),
            perfect_exists: None,
            witness_concept: None,
            witnesses: None,
            distance: None,
            distance_lower: None,
            far_below: None,
            argument: argument.to_string(),
        }
    }

    /// True when the instance is certified ε-far.
    pub fn is_far_for(&self, epsilon: f64) -> bool {
        self.far_below.is_some_and(|t| epsilon < t)
    }

    /// Rechecks the stability, existence and witness claims with the exact checkers.
    pub fn replay(&self, game: &FenGame, partition: Option<&CoalitionStructure>) -> Result<bool> {
        let c = self.spec.c;
        if let Some(gamma) = partition {
            for &concept in &self.stable_for {
                if !exact_verify(game, gamma, concept, c)?.stable {
                    return Ok(false);
                }
            }
            if let (Some(concept), Some(claimed)) = (self.witness_concept, &self.witnesses) {
                let cert = exact_verify(game, gamma, concept, c)?;
                let found: Vec<Player> = cert.witnesses.iter().map(|w| w.player).collect();
                if &found != claimed {
                    return Ok(false);
                }
            }
        }
        if let Some(exists) = self.perfect_exists {
            if exact_perfect_exists(game, c).stable != exists {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub game: FenGame,
    pub partition: Option<CoalitionStructure>,
    pub certificate: FamilyCertificate,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn invalid(msg: impl Into<String>) -> FenError {
    FenError::InvalidSpec(msg.into())
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let params = spec.utility.params(spec.d)?;
    match spec.family {
        Family::RandomBoundedDegree => {
            let game = random_game(spec.n, spec.d, params, spec.seed);
            let partition = random_partition(spec.n, spec.c, spec.seed.wrapping_add(1));
            Ok(Instance {
                game,
                partition: Some(partition),
                certificate: FamilyCertificate::empty(*spec, "no guarantee"),
            })
        }
        Family::FriendClustersPerfect => friend_clusters(spec, params),
        Family::EnemyPairsFar => enemy_pairs(spec, params),
        Family::FriendPathOversized => friend_paths(spec, params),
        Family::PlantedCoreBlocker => core_blockers(spec, params),
    }
}

fn gadget_count(spec: &InstanceSpec, size: usize, default: Planted) -> Result<usize> {
    let max = spec.n / size;
    match spec.planted.unwrap_or(default) {
        Planted::Max => Ok(max),
        Planted::Count(k) if k <= max => Ok(k),
        Planted::Count(k) => Err(invalid(format!("{k} gadgets of size {size} do not fit into {} players", spec.n))),
    }
}

fn friend_clusters(spec: &InstanceSpec, params: UtilityParams) -> Result<Instance> {
    let cap = spec.c.limit().unwrap_or(usize::MAX).min(spec.d + 1);
    let size = spec.cluster_size.unwrap_or(cap);
    if size == 0 || size > cap {
        return Err(invalid(format!("cluster size must lie in 1..={cap}")));
    }
    let mut rng = rng(spec.seed);
    let mut order: Vec<Player> = (1..=spec.n).collect();
    order.shuffle(&mut rng);
    let mut game = FenGame::new(spec.n, spec.d, params)?;
    let mut cluster = vec![0usize; spec.n];
    let mut coalitions = Vec::new();
    for (id, chunk) in order.chunks(size).enumerate() {
        for (a, &u) in chunk.iter().enumerate() {
            cluster[u - 1] = id;
            for &v in &chunk[a + 1..] {
                game.insert_edge(Relation::Friend, u, v).map_err(FenError::InvalidGame)?;
            }
        }
        coalitions.push(chunk.to_vec());
    }

    // Pair up players with spare degree across clusters until no progress.
    let mut open: Vec<Player> = (1..=spec.n).filter(|&p| game.degree(p) < spec.d).collect();
    let mut failures = 0;
    while open.len() >= 2 && failures < 64 {
        let a = rng.gen_range(0..open.len());
        let b = rng.gen_range(0..open.len());
        let (u, v) = (open[a], open[b]);
        if cluster[u - 1] == cluster[v - 1] || game.relation(u, v).is_some() {
            failures += 1;
            continue;
        }
        failures = 0;
        game.insert_edge(Relation::Enemy, u, v).map_err(FenError::InvalidGame)?;
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        for idx in [hi, lo] {
            if game.degree(open[idx]) >= spec.d {
                open.swap_remove(idx);
            }
        }
    }

    let partition = CoalitionStructure::new(spec.n, coalitions, spec.c)?;
    let mut certificate = FamilyCertificate::empty(
        *spec,
        "every cluster is a friend clique of admissible size and all enemy edges join different clusters, \
         so each player sits with all its friends and no enemy",
    );
    certificate.stable_for = StabilityConcept::ALL.to_vec();
    certificate.perfect_exists = Some(true);
    certificate.distance = Some(0);
    Ok(Instance { game, partition: Some(partition), certificate })
}

fn enemy_pairs(spec: &InstanceSpec, params: UtilityParams) -> Result<Instance> {
    if !spec.c.admits(2) {
        return Err(invalid("enemy-pairs-far needs c >= 2"));
    }
    if spec.d == 0 {
        return Err(invalid("enemy-pairs-far needs d >= 1"));
    }
    let m = gadget_count(spec, 2, Planted::Max)?;
    let mut order: Vec<Player> = (1..=spec.n).collect();
    order.shuffle(&mut rng(spec.seed));
    let mut game = FenGame::new(spec.n, spec.d, params)?;
    let mut coalitions = Vec::new();
    for pair in order[..2 * m].chunks(2) {
        game.insert_edge(Relation::Enemy, pair[0], pair[1]).map_err(FenError::InvalidGame)?;
        coalitions.push(pair.to_vec());
    }
    coalitions.extend(order[2 * m..].iter().map(|&p| vec![p]));
    let partition = CoalitionStructure::new(spec.n, coalitions, spec.c)?;

    let mut witnesses: Vec<Player> = order[..2 * m].to_vec();
    witnesses.sort_unstable();
    let mut certificate = FamilyCertificate::empty(
        *spec,
        "both ends of each planted enemy pair have utility -e; a pair stops being a violation only \
         if its own edge is modified, and one modification touches one pair",
    );
    certificate.witness_concept = Some(StabilityConcept::IndividuallyRational);
    certificate.witnesses = Some(witnesses);
    certificate.distance = Some(m);
    certificate.distance_lower = Some(m);
    certificate.far_below = Some(m as f64 / (spec.d * spec.n) as f64);
    Ok(Instance { game, partition: Some(partition), certificate })
}

fn friend_paths(spec: &InstanceSpec, params: UtilityParams) -> Result<Instance> {
    let Some(c) = spec.c.limit() else {
        return Err(invalid("friend-path-oversized needs a bounded c"));
    };
    let len = c + 1;
    let needed = if len > 2 { 2 } else { 1 };
    if spec.d < needed {
        return Err(invalid(format!("friend-path-oversized needs d >= {needed}")));
    }
    let tiles = gadget_count(spec, len, Planted::Count(1))?;
    if tiles == 0 {
        return Err(invalid(format!("a path of {len} players does not fit into {} players", spec.n)));
    }
    let mut order: Vec<Player> = (1..=spec.n).collect();
    order.shuffle(&mut rng(spec.seed));
    let mut game = FenGame::new(spec.n, spec.d, params)?;
    for path in order[..tiles * len].chunks(len) {
        for w in path.windows(2) {
            game.insert_edge(Relation::Friend, w[0], w[1]).map_err(FenError::InvalidGame)?;
        }
    }
    let mut certificate = FamilyCertificate::empty(
        *spec,
        "each planted path is a friend component of c+1 players; only deleting or relabelling one of its \
         own edges can split it, and distinct paths share no edge",
    );
    certificate.perfect_exists = Some(false);
    certificate.distance_lower = Some(tiles);
    certificate.far_below = Some(tiles as f64 / (spec.d * spec.n) as f64);
    Ok(Instance { game, partition: None, certificate })
}

fn core_blockers(spec: &InstanceSpec, params: UtilityParams) -> Result<Instance> {
    let k = spec.c.limit().unwrap_or(usize::MAX).min(spec.d + 1);
    if k < 2 {
        return Err(invalid("planted-core-blocker needs c >= 2 and d >= 1"));
    }
    let t = gadget_count(spec, k, Planted::Max)?;
    let mut order: Vec<Player> = (1..=spec.n).collect();
    order.shuffle(&mut rng(spec.seed));
    let mut game = FenGame::new(spec.n, spec.d, params)?;
    for clique in order[..t * k].chunks(k) {
        for (a, &u) in clique.iter().enumerate() {
            for &v in &clique[a + 1..] {
                game.insert_edge(Relation::Friend, u, v).map_err(FenError::InvalidGame)?;
            }
        }
    }
    let partition = CoalitionStructure::singletons(spec.n).with_bound(spec.c)?;
    let mut witnesses: Vec<Player> = order[..t * k].to_vec();
    witnesses.sort_unstable();
    let edges = t * k * (k - 1) / 2;
    let mut certificate = FamilyCertificate::empty(
        *spec,
        "each clique blocks the singleton structure; any remaining friend pair blocks it, so every \
         friend edge has to be modified and deleting them all suffices",
    );
    certificate.witness_concept = Some(StabilityConcept::CoreStable);
    certificate.witnesses = Some(witnesses);
    certificate.distance = Some(edges);
    certificate.distance_lower = Some(edges);
    certificate.far_below = Some(edges as f64 / (spec.d * spec.n) as f64);
    Ok(Instance { game, partition: Some(partition), certificate })
}

/// Random game with degree at most `d`: `n·d` uniform pair proposals, each
/// rejected if it would break the degree bound or duplicate a pair, labelled
/// friend or enemy with probability 1/2.
pub fn random_game(n: usize, d: usize, params: UtilityParams, seed: u64) -> FenGame {
    let mut game = FenGame::new(n, d, params).expect("valid parameters");
    if n < 2 {
        return game;
    }
    let mut rng = rng(seed);
    for _ in 0..n * d {
        let u = rng.gen_range(1..=n);
        let v = rng.gen_range(1..=n);
        let rel = if rng.gen_bool(0.5) { Relation::Friend } else { Relation::Enemy };
        let _ = game.insert_edge(rel, u, v);
    }
    game
}

/// Sequential assignment: each player joins a uniformly chosen coalition
/// among the ones with spare capacity plus a fresh one.
pub fn random_partition(n: usize, bound: SizeBound, seed: u64) -> CoalitionStructure {
    let mut rng = rng(seed);
    let mut coalitions: Vec<Vec<Player>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for p in 1..=n {
        let pick = rng.gen_range(0..=open.len());
        let idx = if pick == open.len() {
            coalitions.push(Vec::new());
            open.push(coalitions.len() - 1);
            coalitions.len() - 1
        } else {
            open[pick]
        };
        coalitions[idx].push(p);
        if !bound.admits(coalitions[idx].len() + 1) {
            open.retain(|&o| o != idx);
        }
    }
    CoalitionStructure::new(n, coalitions, bound).expect("sizes respect the bound")
}

/// A script of up to `len` operations, each valid on the game as edited so far.
pub fn random_valid_script(game: &FenGame, len: usize, seed: u64) -> EditScript {
    let mut rng = rng(seed);
    let mut current = game.clone();
    let mut script = EditScript::default();
    let n = game.n();
    if n < 2 {
        return script;
    }
    for _ in 0..len {
        for _attempt in 0..32 {
            let op = if rng.gen_bool(0.5) {
                let edges = current.edges();
                let Some(&(rel, u, v)) = edges.choose(&mut rng) else { continue };
                let (u, v) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
                match rel {
                    Relation::Friend => EditOp::DeleteFriend(u, v),
                    Relation::Enemy => EditOp::DeleteEnemy(u, v),
                }
            } else {
                let u = rng.gen_range(1..=n);
                let v = rng.gen_range(1..=n);
                if rng.gen_bool(0.5) { EditOp::InsertFriend(u, v) } else { EditOp::InsertEnemy(u, v) }
            };
            if current.apply_op(op).is_ok() {
                script.push(op);
                break;
            }
        }
    }
    script
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_partition_examples() {
        assert_eq!(random_partition(7, SizeBound::Bounded(1), 3).len(), 7);
        assert_eq!(random_partition(30, SizeBound::Bounded(3), 9), random_partition(30, SizeBound::Bounded(3), 9));
        for seed in 0..50 {
            let p = random_partition(6, SizeBound::Bounded(3), seed);
            assert!(p.coalitions().iter().all(|c| c.len() <= 3));
        }
    }

    #[test]
    fn random_games_respect_degree() {
        for seed in 0..20 {
            let g = random_game(40, 3, UtilityParams::default(), seed);
            g.validate().unwrap();
            assert!((1..=40).all(|i| g.degree(i) <= 3));
            assert!(g.edge_count() > 0);
        }
        assert_eq!(random_game(1, 3, UtilityParams::default(), 0).edge_count(), 0);
    }

    #[test]
    fn scripts_are_valid() {
        let g = random_game(10, 3, UtilityParams::default(), 1);
        let script = random_valid_script(&g, 20, 2);
        assert!(script.cost() > 0);
        let edited = g.apply_edits(&script).unwrap();
        assert_eq!(edited.apply_edits(&script.inverse()).unwrap(), g);
    }

    #[test]
    fn friend_clusters_are_perfect() {
        let spec = InstanceSpec::new(Family::FriendClustersPerfect, 12, 4, SizeBound::Bounded(3), 5);
        let inst = generate(&spec).unwrap();
        let p = inst.partition.as_ref().unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.coalitions().iter().all(|c| c.len() == 3));
        assert!(inst.certificate.replay(&inst.game, Some(p)).unwrap());
        // saturation leaves almost nobody below the degree bound
        let big = generate(&InstanceSpec::new(Family::FriendClustersPerfect, 2000, 6, SizeBound::Bounded(3), 1)).unwrap();
        let short = (1..=2000).filter(|&i| big.game.degree(i) < 6).count();
        assert!(short <= 10, "{short} players below degree 6");
    }

    #[test]
    fn enemy_pairs_certificate() {
        let spec = InstanceSpec::new(Family::EnemyPairsFar, 1000, 4, SizeBound::Bounded(2), 7);
        let inst = generate(&spec).unwrap();
        let cert = &inst.certificate;
        assert_eq!(cert.witnesses.as_ref().unwrap().len(), 1000);
        assert_eq!(cert.distance, Some(500));
        assert!(cert.is_far_for(0.1));
        assert!(!cert.is_far_for(0.125));
        assert!(cert.replay(&inst.game, inst.partition.as_ref()).unwrap());
        let bad = InstanceSpec::new(Family::EnemyPairsFar, 10, 4, SizeBound::Bounded(1), 7);
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn friend_path_certificate() {
        let spec = InstanceSpec::new(Family::FriendPathOversized, 4, 2, SizeBound::Bounded(3), 0);
        let inst = generate(&spec).unwrap();
        assert!(!exact_perfect_exists(&inst.game, SizeBound::Bounded(3)).stable);
        assert!(inst.certificate.replay(&inst.game, None).unwrap());
        let tiled = spec.with_planted(Planted::Max);
        let tiled = InstanceSpec { n: 1000, ..tiled };
        let inst = generate(&tiled).unwrap();
        assert_eq!(inst.certificate.distance_lower, Some(250));
        assert!(inst.certificate.is_far_for(0.1));
        assert!(generate(&InstanceSpec::new(Family::FriendPathOversized, 4, 2, SizeBound::Unbounded, 0)).is_err());
    }

    #[test]
    fn core_blocker_certificate() {
        let spec = InstanceSpec::new(Family::PlantedCoreBlocker, 20, 2, SizeBound::Bounded(3), 4);
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.certificate.witnesses.as_ref().unwrap().len(), 18);
        assert_eq!(inst.certificate.distance, Some(18));
        assert!(inst.certificate.replay(&inst.game, inst.partition.as_ref()).unwrap());
    }

    #[test]
    fn presets_and_names() {
        assert_eq!(UtilityPreset::FriendsAppreciation.params(4).unwrap(), UtilityParams { friend: 4, enemy: 1 });
        assert_eq!(UtilityPreset::EnemiesAversion.params(4).unwrap(), UtilityParams { friend: 1, enemy: 4 });
        assert_eq!("2,3".parse::<UtilityPreset>().unwrap(), UtilityPreset::Custom { friend: 2, enemy: 3 });
        assert!("0,3".parse::<UtilityPreset>().is_err());
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        let json = serde_json::to_string(&InstanceSpec::new(Family::EnemyPairsFar, 10, 2, SizeBound::Unbounded, 1)).unwrap();
        assert!(json.contains("\"family\":\"enemy-pairs-far\""));
    }
}
