//! Sublinear property testers for stability in FEN-hedonic games.
//!
//! Players mark each other as friend, enemy or neutral on a graph of degree
//! at most `d`, and a player's utility for a coalition is `f` per friend
//! minus `e` per enemy inside it. The testers in [`tester`] decide, with
//! one-sided error and a number of oracle queries independent of `n`,
//! whether a coalition structure is stable (or whether a perfect one
//! exists). [`exact`] holds the brute-force ground truth used to check them.

pub mod edit;
pub mod enumerate;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod game;
pub mod generate;
pub mod oracle;
pub mod partition;
pub mod tester;
pub mod witness;

pub use edit::{EditOp, EditScript};
pub use error::{FenError, Result};
pub use exact::{
    certified_far_distance, exact_perfect_exists, exact_perfect_exists_bruteforce, exact_verify, find_nash_stable,
    find_nash_stable_exhaustive, nash_local_search, DistanceBounds, StabilityCertificate,
};
pub use game::{FenGame, Player, Relation, SizeBound, UtilityParams};
pub use generate::{generate, random_partition, Family, FamilyCertificate, Instance, InstanceSpec, UtilityPreset};
pub use oracle::{GraphOracle, PartitionOracle, QueryKind, QueryLedger};
pub use partition::{CoalitionKey, CoalitionStructure};
pub use tester::{
    perfect_existence_tester, sample_size, verification_tester, Decision, Epsilon, TesterConfig, TesterVerdict,
};
pub use witness::{
    all_witnesses, phi, repair_all_witnesses, repair_to_favourite, Evidence, RepairPlan, StabilityConcept,
    WitnessReport,
};
