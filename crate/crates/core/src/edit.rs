use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FenError, Result};
use crate::game::Player;

/// One atomic modification of `F ∪ E`. Relabelling friend to enemy takes two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditOp {
    InsertFriend(Player, Player),
    DeleteFriend(Player, Player),
    InsertEnemy(Player, Player),
    DeleteEnemy(Player, Player),
}

impl EditOp {
    pub fn inverse(self) -> EditOp {
        match self {
            EditOp::InsertFriend(u, v) => EditOp::DeleteFriend(u, v),
            EditOp::DeleteFriend(u, v) => EditOp::InsertFriend(u, v),
            EditOp::InsertEnemy(u, v) => EditOp::DeleteEnemy(u, v),
            EditOp::DeleteEnemy(u, v) => EditOp::InsertEnemy(u, v),
        }
    }

    pub fn endpoints(self) -> (Player, Player) {
        match self {
            EditOp::InsertFriend(u, v)
            | EditOp::DeleteFriend(u, v)
            | EditOp::InsertEnemy(u, v)
            | EditOp::DeleteEnemy(u, v) => (u, v),
        }
    }

    /// Same operation on the same undirected pair, ignoring endpoint order.
    pub fn same_edit(self, other: EditOp) -> bool {
        let norm = |op: EditOp| {
            let (u, v) = op.endpoints();
            (std::mem::discriminant(&op), u.min(v), u.max(v))
        };
        norm(self) == norm(other)
    }
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, (u, v)) = match self {
            EditOp::InsertFriend(..) => ("insert-friend", self.endpoints()),
            EditOp::DeleteFriend(..) => ("delete-friend", self.endpoints()),
            EditOp::InsertEnemy(..) => ("insert-enemy", self.endpoints()),
            EditOp::DeleteEnemy(..) => ("delete-enemy", self.endpoints()),
        };
        write!(f, "{name} {u} {v}")
    }
}

impl FromStr for EditOp {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || FenError::Parse { line: 0, message: format!("bad edit `{s}`") };
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad());
        }
        let u: Player = fields[1].parse().map_err(|_| bad())?;
        let v: Player = fields[2].parse().map_err(|_| bad())?;
        Ok(match fields[0] {
            "insert-friend" => EditOp::InsertFriend(u, v),
            "delete-friend" => EditOp::DeleteFriend(u, v),
            "insert-enemy" => EditOp::InsertEnemy(u, v),
            "delete-enemy" => EditOp::DeleteEnemy(u, v),
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditScript(Vec<EditOp>);

impl EditScript {
    pub fn ops(&self) -> &[EditOp] {
        &self.0
    }

    pub fn push(&mut self, op: EditOp) {
        self.0.push(op);
    }

    /// Number of atomic modifications.
    pub fn cost(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Script undoing this one: inverted steps in reverse order.
    pub fn inverse(&self) -> EditScript {
        EditScript(self.0.iter().rev().map(|op| op.inverse()).collect())
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|op| format!("{op}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let op = line.parse().map_err(|e: FenError| FenError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            ops.push(op);
        }
        Ok(EditScript(ops))
    }
}

impl From<Vec<EditOp>> for EditScript {
    fn from(ops: Vec<EditOp>) -> Self {
        EditScript(ops)
    }
}

impl IntoIterator for EditScript {
    type Item = EditOp;
    type IntoIter = std::vec::IntoIter<EditOp>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}
