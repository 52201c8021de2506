//! Query-counted access to a game and a coalition structure.
//!
//! Testers and witness predicates only ever see these wrappers: the game
//! through labelled neighbour queries, the partition through `find` and
//! `member`. Every query bumps a counter; an optional budget caps each
//! counter and turns the excess query into [`FenError::BudgetExhausted`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FenError, Result};
use crate::game::{FenGame, Player, Relation, UtilityParams};
use crate::partition::{CoalitionKey, CoalitionStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Neighbor,
    Find,
    Member,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Neighbor => "neighbor",
            QueryKind::Find => "find",
            QueryKind::Member => "member",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryLedger {
    pub neighbor: u64,
    pub find: u64,
    pub member: u64,
    pub total: u64,
}

impl QueryLedger {
    pub fn new(neighbor: u64, find: u64, member: u64) -> Self {
        Self { neighbor, find, member, total: neighbor + find + member }
    }

    /// Queries issued between `earlier` and `self`.
    pub fn since(&self, earlier: &QueryLedger) -> QueryLedger {
        QueryLedger::new(
            self.neighbor - earlier.neighbor,
            self.find - earlier.find,
            self.member - earlier.member,
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counter {
    used: u64,
    budget: Option<u64>,
}

impl Counter {
    fn charge(&mut self, kind: QueryKind) -> Result<()> {
        if let Some(budget) = self.budget {
            if self.used >= budget {
                return Err(FenError::BudgetExhausted { kind, budget });
            }
        }
        self.used += 1;
        Ok(())
    }
}

/// Neighbour-query access `f_G(v, i)` to a game.
#[derive(Debug)]
pub struct GraphOracle<'a> {
    game: &'a FenGame,
    neighbor: Counter,
}

impl<'a> GraphOracle<'a> {
    pub fn new(game: &'a FenGame) -> Self {
        Self { game, neighbor: Counter::default() }
    }

    pub fn with_budget(game: &'a FenGame, budget: u64) -> Self {
        Self { game, neighbor: Counter { used: 0, budget: Some(budget) } }
    }

    pub fn n(&self) -> usize {
        self.game.n()
    }

    pub fn degree_bound(&self) -> usize {
        self.game.degree_bound()
    }

    pub fn params(&self) -> UtilityParams {
        self.game.params()
    }

    /// The `index`-th (1-based) neighbour of `v` with its label, friends first.
    /// `None` is the `⋆` answer for `index > deg(v)`.
    pub fn neighbor(&mut self, v: Player, index: usize) -> Result<Option<(Player, Relation)>> {
        if v == 0 || v > self.game.n() {
            return Err(FenError::PlayerOutOfRange { player: v, n: self.game.n() });
        }
        if index == 0 {
            return Err(FenError::InvalidSpec("neighbour index is 1-based".into()));
        }
        self.neighbor.charge(QueryKind::Neighbor)?;
        Ok(self.game.neighbor_at(v, index))
    }

    /// Reads the whole adjacency sequence of `v`, stopping at `⋆` or after `d`
    /// entries, so it costs at most `d` queries.
    pub fn neighbors(&mut self, v: Player) -> Result<Vec<(Player, Relation)>> {
        let mut out = Vec::new();
        for index in 1..=self.degree_bound() {
            match self.neighbor(v, index)? {
                Some(entry) => out.push(entry),
                None => break,
            }
        }
        Ok(out)
    }

    pub fn queries(&self) -> u64 {
        self.neighbor.used
    }
}

/// `find`/`member` access to a coalition structure.
#[derive(Debug)]
pub struct PartitionOracle<'a> {
    partition: &'a CoalitionStructure,
    find: Counter,
    member: Counter,
}

impl<'a> PartitionOracle<'a> {
    pub fn new(partition: &'a CoalitionStructure) -> Self {
        Self { partition, find: Counter::default(), member: Counter::default() }
    }

    pub fn with_budgets(partition: &'a CoalitionStructure, find: Option<u64>, member: Option<u64>) -> Self {
        Self {
            partition,
            find: Counter { used: 0, budget: find },
            member: Counter { used: 0, budget: member },
        }
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Key of the coalition containing `v`.
    pub fn find(&mut self, v: Player) -> Result<CoalitionKey> {
        if v == 0 || v > self.partition.n() {
            return Err(FenError::PlayerOutOfRange { player: v, n: self.partition.n() });
        }
        self.find.charge(QueryKind::Find)?;
        Ok(self.partition.key_of(v))
    }

    /// `index`-th (1-based) smallest member of coalition `key`, or `None`.
    pub fn member(&mut self, key: CoalitionKey, index: usize) -> Result<Option<Player>> {
        let members = self.partition.members(key).ok_or(FenError::UnknownKey(key.0))?;
        if index == 0 {
            return Err(FenError::InvalidSpec("member index is 1-based".into()));
        }
        self.member.charge(QueryKind::Member)?;
        Ok(members.get(index - 1).copied())
    }

    pub fn find_queries(&self) -> u64 {
        self.find.used
    }

    pub fn member_queries(&self) -> u64 {
        self.member.used
    }
}

/// Point-in-time copy of all counters.
pub fn snapshot_ledger(graph: &GraphOracle<'_>, partition: Option<&PartitionOracle<'_>>) -> QueryLedger {
    let (find, member) = partition.map_or((0, 0), |p| (p.find_queries(), p.member_queries()));
    QueryLedger::new(graph.queries(), find, member)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::SizeBound;

    fn game_a() -> FenGame {
        FenGame::with_edges(
            4,
            2,
            UtilityParams::default(),
            [(Relation::Friend, 1, 2), (Relation::Friend, 2, 3), (Relation::Enemy, 1, 3)],
        )
        .unwrap()
    }

    #[test]
    fn neighbor_queries() {
        let game = game_a();
        let mut oracle = GraphOracle::new(&game);
        assert_eq!(oracle.neighbor(1, 1).unwrap(), Some((2, Relation::Friend)));
        assert_eq!(oracle.neighbor(1, 2).unwrap(), Some((3, Relation::Enemy)));
        assert_eq!(oracle.neighbor(4, 1).unwrap(), None);
        assert_eq!(oracle.queries(), 3);
        assert!(oracle.neighbor(5, 1).is_err());
        assert_eq!(oracle.queries(), 3);
    }

    #[test]
    fn neighbors_costs_at_most_d() {
        let game = game_a();
        let mut oracle = GraphOracle::new(&game);
        assert_eq!(oracle.neighbors(2).unwrap().len(), 2);
        assert_eq!(oracle.queries(), 2);
        assert!(oracle.neighbors(4).unwrap().is_empty());
        assert_eq!(oracle.queries(), 3);
    }

    #[test]
    fn budget_is_never_exceeded() {
        let game = game_a();
        let mut oracle = GraphOracle::with_budget(&game, 2);
        oracle.neighbor(1, 1).unwrap();
        oracle.neighbor(1, 2).unwrap();
        assert_eq!(
            oracle.neighbor(1, 3),
            Err(FenError::BudgetExhausted { kind: QueryKind::Neighbor, budget: 2 })
        );
        assert_eq!(oracle.queries(), 2);
    }

    #[test]
    fn find_and_member() {
        let gamma = CoalitionStructure::new(3, vec![vec![1, 2], vec![3]], SizeBound::Unbounded).unwrap();
        let mut oracle = PartitionOracle::new(&gamma);
        assert_eq!(oracle.find(1).unwrap(), oracle.find(2).unwrap());
        assert_ne!(oracle.find(1).unwrap(), oracle.find(3).unwrap());
        let k = oracle.find(2).unwrap();
        assert_eq!(oracle.member(k, 1).unwrap(), Some(1));
        assert_eq!(oracle.member(k, 2).unwrap(), Some(2));
        assert_eq!(oracle.member(k, 3).unwrap(), None);
        let k3 = oracle.find(3).unwrap();
        assert_eq!(oracle.member(k3, 1).unwrap(), Some(3));
        assert_eq!(oracle.member(CoalitionKey(9), 1), Err(FenError::UnknownKey(9)));
        assert_eq!(oracle.find_queries(), 6);
        assert_eq!(oracle.member_queries(), 4);
    }

    #[test]
    fn singleton_keys_are_distinct() {
        let gamma = CoalitionStructure::singletons(6);
        let mut oracle = PartitionOracle::new(&gamma);
        let keys: std::collections::HashSet<_> = (1..=6).map(|v| oracle.find(v).unwrap()).collect();
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn partition_budgets_are_per_kind() {
        let gamma = CoalitionStructure::singletons(3);
        let mut oracle = PartitionOracle::with_budgets(&gamma, Some(1), None);
        let k = oracle.find(1).unwrap();
        assert!(matches!(oracle.find(2), Err(FenError::BudgetExhausted { kind: QueryKind::Find, .. })));
        assert_eq!(oracle.member(k, 1).unwrap(), Some(1));
    }

    #[test]
    fn ledger_snapshots() {
        let game = game_a();
        let gamma = CoalitionStructure::singletons(4);
        let mut g = GraphOracle::new(&game);
        let mut p = PartitionOracle::new(&gamma);
        assert_eq!(snapshot_ledger(&g, Some(&p)), QueryLedger::default());
        g.neighbor(1, 1).unwrap();
        let first = snapshot_ledger(&g, Some(&p));
        assert_eq!(first.neighbor, 1);
        let k = p.find(2).unwrap();
        p.member(k, 1).unwrap();
        g.neighbor(2, 1).unwrap();
        let after = snapshot_ledger(&g, Some(&p));
        assert_eq!(after.total, 4);
        assert_eq!(after.total, after.neighbor + after.find + after.member);
        assert_eq!(after.since(&first), QueryLedger::new(1, 1, 1));
    }

    #[test]
    fn member_enumerates_each_coalition_exactly() {
        let gamma = CoalitionStructure::new(7, vec![vec![5, 1, 7], vec![2, 3], vec![4, 6]], SizeBound::Unbounded).unwrap();
        let mut oracle = PartitionOracle::new(&gamma);
        for v in 1..=7 {
            let k = oracle.find(v).unwrap();
            let mut listed = Vec::new();
            let mut idx = 1;
            while let Some(p) = oracle.member(k, idx).unwrap() {
                listed.push(p);
                idx += 1;
            }
            assert_eq!(listed, gamma.coalition_of(v));
        }
    }
}
