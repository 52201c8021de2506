//! Coalition structures: partitions of `1..=n` with an optional size bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FenError, Result};
use crate::game::{Player, SizeBound};

/// Stable handle of a coalition inside one [`CoalitionStructure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoalitionKey(pub usize);

impl fmt::Display for CoalitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A partition `Γ` of the players. Coalitions are kept sorted ascending and
/// ordered by their smallest member, so keys are canonical for a given
/// partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionStructure {
    coalitions: Vec<Vec<Player>>,
    membership: Vec<usize>,
    bound: SizeBound,
}

impl CoalitionStructure {
    pub fn new(n: usize, coalitions: Vec<Vec<Player>>, bound: SizeBound) -> Result<Self> {
        let bad = |msg: String| Err(FenError::InvalidPartition(msg));
        let mut coalitions: Vec<Vec<Player>> = coalitions;
        let mut membership = vec![usize::MAX; n];
        for coalition in &mut coalitions {
            if coalition.is_empty() {
                return bad("empty coalition".into());
            }
            coalition.sort_unstable();
            if let Some(c) = bound.limit() {
                if coalition.len() > c {
                    return Err(FenError::CoalitionTooLarge { size: coalition.len(), bound: c });
                }
            }
        }
        coalitions.sort_unstable_by_key(|c| c[0]);
        for (key, coalition) in coalitions.iter().enumerate() {
            for &p in coalition {
                if p == 0 || p > n {
                    return Err(FenError::PlayerOutOfRange { player: p, n });
                }
                if membership[p - 1] != usize::MAX {
                    return bad(format!("player {p} appears in two coalitions"));
                }
                membership[p - 1] = key;
            }
        }
        if let Some(p) = membership.iter().position(|&k| k == usize::MAX) {
            return bad(format!("player {} is not covered", p + 1));
        }
        Ok(Self { coalitions, membership, bound })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            coalitions: (1..=n).map(|p| vec![p]).collect(),
            membership: (0..n).collect(),
            bound: SizeBound::Unbounded,
        }
    }

    /// Builds a structure from per-player labels (`labels[p-1]` groups player `p`).
    pub fn from_labels(labels: &[usize], bound: SizeBound) -> Result<Self> {
        let mut groups: std::collections::BTreeMap<usize, Vec<Player>> = Default::default();
        for (idx, &label) in labels.iter().enumerate() {
            groups.entry(label).or_default().push(idx + 1);
        }
        Self::new(labels.len(), groups.into_values().collect(), bound)
    }

    /// Same partition with a different size bound, revalidated.
    pub fn with_bound(&self, bound: SizeBound) -> Result<Self> {
        Self::new(self.n(), self.coalitions.clone(), bound)
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn bound(&self) -> SizeBound {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn coalitions(&self) -> &[Vec<Player>] {
        &self.coalitions
    }

    pub fn key_of(&self, p: Player) -> CoalitionKey {
        CoalitionKey(self.membership[p - 1])
    }

    pub fn coalition_of(&self, p: Player) -> &[Player] {
        &self.coalitions[self.membership[p - 1]]
    }

    pub fn members(&self, key: CoalitionKey) -> Option<&[Player]> {
        self.coalitions.get(key.0).map(Vec::as_slice)
    }

    pub fn together(&self, a: Player, b: Player) -> bool {
        self.membership[a - 1] == self.membership[b - 1]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("partition {} {}\n", self.n(), self.bound);
        for coalition in &self.coalitions {
            let line: Vec<String> = coalition.iter().map(|p| p.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, SizeBound)> = None;
        let mut coalitions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let err = |message: String| FenError::Parse { line: idx + 1, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                if fields.len() != 3 || fields[0] != "partition" {
                    return Err(err("expected header `partition <n> <c|unbounded>`".into()));
                }
                let n = fields[1].parse().map_err(|_| err(format!("bad player count `{}`", fields[1])))?;
                let bound = fields[2].parse().map_err(|e: FenError| err(e.to_string()))?;
                header = Some((n, bound));
                continue;
            }
            let coalition = fields
                .iter()
                .map(|f| f.parse::<Player>().map_err(|_| err(format!("bad player `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            if coalition.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err("coalition members must be strictly ascending".into()));
            }
            coalitions.push(coalition);
        }
        let (n, bound) = header.ok_or(FenError::Parse { line: 0, message: "missing `partition` header".into() })?;
        Self::new(n, coalitions, bound)
    }
}

impl Serialize for CoalitionStructure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coalitions.serialize(serializer)
    }
}
