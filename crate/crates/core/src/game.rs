//! Friends/enemies/neutral games on bounded-degree graphs.
//!
//! Players are `1..=n`. Each player keeps a sorted friend list and a sorted
//! enemy list; every undirected edge is stored at both endpoints. Everyone not
//! in either list is neutral and contributes nothing to utility.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::edit::{EditOp, EditScript};
use crate::error::{FenError, Result};

pub type Player = usize;

/// Label carried by an edge of the game graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Friend,
    Enemy,
}

/// Maximum coalition size `c`. `Unbounded` is accepted everywhere a bound is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SizeBound {
    Bounded(usize),
    #[default]
    Unbounded,
}

impl SizeBound {
    pub fn bounded(c: usize) -> Result<Self> {
        if c == 0 {
            return Err(FenError::InvalidSpec("coalition size bound must be at least 1".into()));
        }
        Ok(SizeBound::Bounded(c))
    }

    pub fn limit(self) -> Option<usize> {
        match self {
            SizeBound::Bounded(c) => Some(c),
            SizeBound::Unbounded => None,
        }
    }

    /// True when a coalition of `size` players respects the bound.
    pub fn admits(self, size: usize) -> bool {
        self.limit().map_or(true, |c| size <= c)
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, SizeBound::Bounded(_))
    }
}

impl fmt::Display for SizeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeBound::Bounded(c) => write!(f, "{c}"),
            SizeBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl FromStr for SizeBound {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unbounded") || s == "inf" {
            return Ok(SizeBound::Unbounded);
        }
        let c: usize = s
            .parse()
            .map_err(|_| FenError::InvalidSpec(format!("bad coalition size bound `{s}`")))?;
        SizeBound::bounded(c)
    }
}

impl Serialize for SizeBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SizeBound::Bounded(c) => serializer.serialize_u64(*c as u64),
            SizeBound::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for SizeBound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(c) => SizeBound::bounded(c).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Value `f` of a friend and magnitude `e` of an enemy. Both are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UtilityParams {
    pub friend: i64,
    pub enemy: i64,
}

impl UtilityParams {
    pub fn new(friend: i64, enemy: i64) -> Result<Self> {
        if friend < 1 || enemy < 1 {
            return Err(FenError::InvalidGame(format!(
                "utility parameters must be positive, got f={friend} e={enemy}"
            )));
        }
        Ok(Self { friend, enemy })
    }

    /// `f = d`, `e = 1`.
    pub fn friends_appreciation(degree_bound: usize) -> Self {
        Self { friend: degree_bound.max(1) as i64, enemy: 1 }
    }

    /// `f = 1`, `e = d`.
    pub fn enemies_aversion(degree_bound: usize) -> Self {
        Self { friend: 1, enemy: degree_bound.max(1) as i64 }
    }
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self { friend: 1, enemy: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenGame {
    n: usize,
    degree_bound: usize,
    friends: Vec<Vec<Player>>,
    enemies: Vec<Vec<Player>>,
    params: UtilityParams,
}

impl FenGame {
    /// Edgeless game on `n` players.
    pub fn new(n: usize, degree_bound: usize, params: UtilityParams) -> Result<Self> {
        if degree_bound == 0 {
            return Err(FenError::InvalidGame("degree bound must be positive".into()));
        }
        UtilityParams::new(params.friend, params.enemy)?;
        Ok(Self {
            n,
            degree_bound,
            friends: vec![Vec::new(); n],
            enemies: vec![Vec::new(); n],
            params,
        })
    }

    /// Builds a game from undirected labelled edges, validating every insertion.
    pub fn with_edges<I>(n: usize, degree_bound: usize, params: UtilityParams, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Relation, Player, Player)>,
    {
        let mut game = Self::new(n, degree_bound, params)?;
        for (rel, u, v) in edges {
            game.insert_edge(rel, u, v).map_err(FenError::InvalidGame)?;
        }
        Ok(game)
    }

    /// Builds a game from per-player adjacency lists (index 0 is player 1) and
    /// checks symmetry, disjointness, ordering, and the degree bound.
    pub fn from_adjacency(
        degree_bound: usize,
        params: UtilityParams,
        friends: Vec<Vec<Player>>,
        enemies: Vec<Vec<Player>>,
    ) -> Result<Self> {
        if friends.len() != enemies.len() {
            return Err(FenError::InvalidGame("friend and enemy lists differ in length".into()));
        }
        let mut game = Self::new(friends.len(), degree_bound, params)?;
        game.friends = friends;
        game.enemies = enemies;
        game.validate()?;
        Ok(game)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FenError::InvalidGame(msg));
        for i in 1..=self.n {
            let (fr, en) = (self.friends(i), self.enemies(i));
            if fr.len() + en.len() > self.degree_bound {
                return bad(format!("player {i} has degree {} > {}", fr.len() + en.len(), self.degree_bound));
            }
            for list in [fr, en] {
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("adjacency of player {i} is not strictly ascending"));
                }
                if let Some(&j) = list.iter().find(|&&j| j == i || j == 0 || j > self.n) {
                    return bad(format!("player {i} has invalid neighbour {j}"));
                }
            }
            for &j in fr {
                if en.binary_search(&j).is_ok() {
                    return bad(format!("pair ({i},{j}) is both friend and enemy"));
                }
                if self.friends(j).binary_search(&i).is_err() {
                    return bad(format!("friend edge ({i},{j}) is not symmetric"));
                }
            }
            for &j in en {
                if self.enemies(j).binary_search(&i).is_err() {
                    return bad(format!("enemy edge ({i},{j}) is not symmetric"));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn params(&self) -> UtilityParams {
        self.params
    }

    pub fn friends(&self, i: Player) -> &[Player] {
        &self.friends[i - 1]
    }

    pub fn enemies(&self, i: Player) -> &[Player] {
        &self.enemies[i - 1]
    }

    pub fn degree(&self, i: Player) -> usize {
        self.friends(i).len() + self.enemies(i).len()
    }

    pub fn relation(&self, i: Player, j: Player) -> Option<Relation> {
        if self.friends(i).binary_search(&j).is_ok() {
            Some(Relation::Friend)
        } else if self.enemies(i).binary_search(&j).is_ok() {
            Some(Relation::Enemy)
        } else {
            None
        }
    }

    /// `index`-th (1-based) entry of the friends-then-enemies adjacency sequence.
    pub fn neighbor_at(&self, v: Player, index: usize) -> Option<(Player, Relation)> {
        let fr = self.friends(v);
        if index == 0 {
            return None;
        }
        if index <= fr.len() {
            return Some((fr[index - 1], Relation::Friend));
        }
        self.enemies(v).get(index - 1 - fr.len()).map(|&j| (j, Relation::Enemy))
    }

    /// All undirected edges as `(label, u, v)` with `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> Vec<(Relation, Player, Player)> {
        let mut out = Vec::new();
        for u in 1..=self.n {
            let mut row: Vec<(Player, Relation)> = self
                .friends(u)
                .iter()
                .map(|&v| (v, Relation::Friend))
                .chain(self.enemies(u).iter().map(|&v| (v, Relation::Enemy)))
                .filter(|&(v, _)| v > u)
                .collect();
            row.sort_unstable();
            out.extend(row.into_iter().map(|(v, rel)| (rel, u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (1..=self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    fn check_player(&self, i: Player) -> Result<()> {
        if i == 0 || i > self.n {
            Err(FenError::PlayerOutOfRange { player: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `f·|C ∩ friends(i)| − e·|C ∩ enemies(i)|`; `i` must belong to `coalition`.
    pub fn utility(&self, i: Player, coalition: &[Player]) -> Result<i64> {
        self.check_player(i)?;
        let mut member = false;
        let mut value = 0;
        for &j in coalition {
            self.check_player(j)?;
            if j == i {
                member = true;
                continue;
            }
            value += match self.relation(i, j) {
                Some(Relation::Friend) => self.params.friend,
                Some(Relation::Enemy) => -self.params.enemy,
                None => 0,
            };
        }
        if !member {
            return Err(FenError::NotMember { player: i });
        }
        Ok(value)
    }

    pub fn weakly_prefers(&self, i: Player, c: &[Player], d: &[Player]) -> Result<bool> {
        Ok(self.utility(i, c)? >= self.utility(i, d)?)
    }

    pub fn prefers(&self, i: Player, c: &[Player], d: &[Player]) -> Result<bool> {
        Ok(self.utility(i, c)? > self.utility(i, d)?)
    }

    pub fn indifferent(&self, i: Player, c: &[Player], d: &[Player]) -> Result<bool> {
        Ok(self.utility(i, c)? == self.utility(i, d)?)
    }

    /// Best utility `i` can reach in a coalition of at most `bound` players.
    pub fn max_utility(&self, i: Player, bound: SizeBound) -> i64 {
        let friends = self.friends(i).len();
        let usable = bound.limit().map_or(friends, |c| friends.min(c.saturating_sub(1)));
        self.params.friend * usable as i64
    }

    pub fn is_favourite(&self, i: Player, coalition: &[Player], bound: SizeBound) -> Result<bool> {
        if let Some(c) = bound.limit() {
            if coalition.len() > c {
                return Err(FenError::CoalitionTooLarge { size: coalition.len(), bound: c });
            }
        }
        Ok(self.utility(i, coalition)? == self.max_utility(i, bound))
    }

    /// Applies `script` step by step to a copy of this game.
    pub fn apply_edits(&self, script: &EditScript) -> Result<FenGame> {
        let mut game = self.clone();
        for (index, op) in script.ops().iter().enumerate() {
            game.apply_op(*op).map_err(|reason| FenError::InvalidEdit { index, reason })?;
        }
        Ok(game)
    }

    pub(crate) fn apply_op(&mut self, op: EditOp) -> std::result::Result<(), String> {
        match op {
            EditOp::InsertFriend(u, v) => self.insert_edge(Relation::Friend, u, v),
            EditOp::InsertEnemy(u, v) => self.insert_edge(Relation::Enemy, u, v),
            EditOp::DeleteFriend(u, v) => self.delete_edge(Relation::Friend, u, v),
            EditOp::DeleteEnemy(u, v) => self.delete_edge(Relation::Enemy, u, v),
        }
    }

    fn list_mut(&mut self, rel: Relation, i: Player) -> &mut Vec<Player> {
        match rel {
            Relation::Friend => &mut self.friends[i - 1],
            Relation::Enemy => &mut self.enemies[i - 1],
        }
    }

    pub(crate) fn insert_edge(&mut self, rel: Relation, u: Player, v: Player) -> std::result::Result<(), String> {
        if u == v {
            return Err(format!("self edge on player {u}"));
        }
        for p in [u, v] {
            if p == 0 || p > self.n {
                return Err(format!("player {p} out of range 1..={}", self.n));
            }
        }
        if let Some(existing) = self.relation(u, v) {
            return Err(format!("pair ({u},{v}) already carries a {existing:?} edge"));
        }
        for p in [u, v] {
            if self.degree(p) >= self.degree_bound {
                return Err(format!("player {p} already has degree {}", self.degree_bound));
            }
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = self.list_mut(rel, a);
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        Ok(())
    }

    pub(crate) fn delete_edge(&mut self, rel: Relation, u: Player, v: Player) -> std::result::Result<(), String> {
        for p in [u, v] {
            if p == 0 || p > self.n {
                return Err(format!("player {p} out of range 1..={}", self.n));
            }
        }
        if self.relation(u, v) != Some(rel) {
            return Err(format!("pair ({u},{v}) has no {rel:?} edge"));
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = self.list_mut(rel, a);
            let pos = list.binary_search(&b).expect("symmetric adjacency");
            list.remove(pos);
        }
        Ok(())
    }

    /// Line-based text form: `fen 1 <n> <d> <f> <e>` then `F u v` / `E u v` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "fen 1 {} {} {} {}\n",
            self.n, self.degree_bound, self.params.friend, self.params.enemy
        );
        for (rel, u, v) in self.edges() {
            let tag = match rel {
                Relation::Friend => 'F',
                Relation::Enemy => 'E',
            };
            out.push_str(&format!("{tag} {u} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut game: Option<FenGame> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| FenError::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match game.as_mut() {
                None => {
                    if fields.len() != 6 || fields[0] != "fen" {
                        return Err(err("expected header `fen 1 <n> <d> <f> <e>`".into()));
                    }
                    if fields[1] != "1" {
                        return Err(err(format!("unsupported format version {}", fields[1])));
                    }
                    let num = |s: &str| s.parse::<i64>().map_err(|_| err(format!("bad number `{s}`")));
                    let (n, d, f, e) = (num(fields[2])?, num(fields[3])?, num(fields[4])?, num(fields[5])?);
                    if n < 0 || d < 1 {
                        return Err(err("n must be non-negative and d positive".into()));
                    }
                    let params = UtilityParams::new(f, e).map_err(|e| err(e.to_string()))?;
                    game = Some(FenGame::new(n as usize, d as usize, params).map_err(|e| err(e.to_string()))?);
                }
                Some(g) => {
                    if fields.len() != 3 {
                        return Err(err("expected `F <u> <v>` or `E <u> <v>`".into()));
                    }
                    let rel = match fields[0] {
                        "F" => Relation::Friend,
                        "E" => Relation::Enemy,
                        other => return Err(err(format!("unknown edge label `{other}`"))),
                    };
                    let u: Player = fields[1].parse().map_err(|_| err(format!("bad player `{}`", fields[1])))?;
                    let v: Player = fields[2].parse().map_err(|_| err(format!("bad player `{}`", fields[2])))?;
                    if u >= v {
                        return Err(err(format!("edge endpoints must satisfy u < v, got {u} {v}")));
                    }
                    g.insert_edge(rel, u, v).map_err(err)?;
                }
            }
        }
        game.ok_or(FenError::Parse { line: 0, message: "missing `fen` header".into() })
    }
}

impl FromStr for FenGame {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        FenGame::parse(s)
    }
}
