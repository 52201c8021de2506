//! Monte-Carlo campaigns over the testers.
//!
//! Trial `t` runs with seed `seed + t` on fresh oracles, so parallel and
//! serial execution produce the same rows. Wall-clock times are only
//! recorded on request to keep default output byte-stable.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FenError, Result};
use crate::game::{FenGame, Player, SizeBound};
use crate::generate::{generate, Family, InstanceSpec, UtilityPreset};
use crate::oracle::{GraphOracle, PartitionOracle, QueryLedger};
use crate::partition::CoalitionStructure;
use crate::tester::{perfect_existence_tester, sample_size, verification_tester, Decision, Epsilon, TesterConfig};
use crate::witness::StabilityConcept;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMode {
    /// Is the given partition stable?
    Verify,
    /// Does a perfect partition exist?
    Exist,
}

impl FromStr for TestMode {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verify" => Ok(TestMode::Verify),
            "exist" => Ok(TestMode::Exist),
            _ => Err(FenError::InvalidSpec(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: TestMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concept: Option<StabilityConcept>,
    pub epsilon: Epsilon,
    pub c: SizeBound,
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub d: usize,
    pub sample_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub decision: Decision,
    /// Players drawn before stopping.
    pub drawn: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Player>,
    pub queries: QueryLedger,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micros: Option<u64>,
}

/// Summary of per-trial query totals. `median` is the lower median.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub min: u64,
    pub median: u64,
    pub max: u64,
}

impl QueryStats {
    pub fn of(values: &[u64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        Self { min: sorted[0], median: sorted[(sorted.len() - 1) / 2], max: sorted[sorted.len() - 1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rejections: usize,
    pub rejection_frequency: f64,
    pub queries: QueryStats,
    pub trials: Vec<TrialRow>,
}

impl ExperimentResult {
    fn from_rows(config: ExperimentConfig, trials: Vec<TrialRow>) -> Self {
        let rejections = trials.iter().filter(|r| r.decision == Decision::Reject).count();
        let totals: Vec<u64> = trials.iter().map(|r| r.queries.total).collect();
        let rejection_frequency = if trials.is_empty() { 0.0 } else { rejections as f64 / trials.len() as f64 };
        Self { config, rejections, rejection_frequency, queries: QueryStats::of(&totals), trials }
    }

    /// Recomputes the aggregates from the rows.
    pub fn is_consistent(&self) -> bool {
        *self == Self::from_rows(self.config, self.trials.clone())
    }

    /// More rejections than acceptances.
    pub fn reject_dominant(&self) -> bool {
        2 * self.rejections > self.trials.len()
    }

    /// One row per trial, with the configuration repeated on every row.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = String::from(
            "mode,concept,epsilon,c,n,d,sample_size,trial,seed,decision,drawn,witness,neighbor,find,member,total,micros\n",
        );
        for r in &self.trials {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                serde_plain(&c.mode),
                c.concept.map_or(String::new(), |k| k.to_string()),
                c.epsilon.value(),
                c.c,
                c.n,
                c.d,
                c.sample_size,
                r.trial,
                r.seed,
                serde_plain(&r.decision),
                r.drawn,
                r.witness.map_or(String::new(), |w| w.to_string()),
                r.queries.neighbor,
                r.queries.find,
                r.queries.member,
                r.queries.total,
                r.micros.map_or(String::new(), |m| m.to_string()),
            );
        }
        out
    }
}

fn serde_plain<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Runs `trials` independent tester runs. `partition` is required in verify mode.
#[allow(clippy::too_many_arguments)]
pub fn run_trials(
    game: &FenGame,
    partition: Option<&CoalitionStructure>,
    mode: TestMode,
    concept: StabilityConcept,
    epsilon: Epsilon,
    c: SizeBound,
    seed: u64,
    trials: usize,
    timing: bool,
) -> Result<ExperimentResult> {
    if mode == TestMode::Verify && partition.is_none() {
        return Err(FenError::InvalidSpec("verify mode needs a partition".into()));
    }
    if mode == TestMode::Exist && !c.is_bounded() {
        return Err(FenError::UnboundedSize("the perfect-existence tester"));
    }
    let config = ExperimentConfig {
        mode,
        concept: (mode == TestMode::Verify).then_some(concept),
        epsilon,
        c,
        seed,
        trials,
        n: game.n(),
        d: game.degree_bound(),
        sample_size: sample_size(epsilon),
    };
    let rows: Result<Vec<TrialRow>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed.wrapping_add(t as u64);
            let started = Instant::now();
            let mut graph = GraphOracle::new(game);
            let verdict = match mode {
                TestMode::Verify => {
                    let gamma = partition.expect("checked above");
                    let mut oracle = PartitionOracle::new(gamma);
                    let cfg = TesterConfig { epsilon, concept, bound: c, seed: trial_seed };
                    verification_tester(&mut graph, &mut oracle, &cfg)?
                }
                TestMode::Exist => perfect_existence_tester(&mut graph, epsilon, c, trial_seed)?,
            };
            Ok(TrialRow {
                trial: t,
                seed: trial_seed,
                decision: verdict.decision,
                drawn: verdict.sample.len(),
                witness: verdict.witnesses.first().map(|w| w.player),
                queries: verdict.ledger,
                micros: timing.then(|| started.elapsed().as_micros() as u64),
            })
        })
        .collect();
    Ok(ExperimentResult::from_rows(config, rows?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    N,
    Epsilon,
    C,
}

impl FromStr for SweepParam {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepParam::N),
            "epsilon" | "eps" => Ok(SweepParam::Epsilon),
            "c" => Ok(SweepParam::C),
            _ => Err(FenError::InvalidSpec(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

/// A sweep over one parameter with every other one fixed. Each point
/// generates a fresh instance of `family` and runs `trials` tester runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sweep: SweepParam,
    pub values: Vec<String>,
    pub family: Family,
    pub mode: TestMode,
    pub concept: StabilityConcept,
    pub n: usize,
    pub d: usize,
    pub c: SizeBound,
    pub epsilon: Epsilon,
    pub utility: UtilityPreset,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub sweep: SweepParam,
    pub value: String,
    pub family: Family,
    pub mode: TestMode,
    pub concept: StabilityConcept,
    pub n: usize,
    pub d: usize,
    pub c: SizeBound,
    pub epsilon: f64,
    pub sample_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub rejection_frequency: f64,
    pub queries: QueryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micros_median: Option<u64>,
}

pub fn run_bench(config: &BenchConfig, timing: bool) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for value in &config.values {
        let (mut n, mut c, mut epsilon) = (config.n, config.c, config.epsilon);
        let bad = || FenError::InvalidSpec(format!("bad sweep value `{value}`"));
        match config.sweep {
            SweepParam::N => n = value.parse().map_err(|_| bad())?,
            SweepParam::C => c = value.parse()?,
            SweepParam::Epsilon => epsilon = value.parse()?,
        }
        let spec = InstanceSpec { utility: config.utility, ..InstanceSpec::new(config.family, n, config.d, c, config.seed) };
        let instance = generate(&spec)?;
        let result = run_trials(
            &instance.game,
            instance.partition.as_ref(),
            config.mode,
            config.concept,
            epsilon,
            c,
            config.seed,
            config.trials,
            timing,
        )?;
        let micros: Vec<u64> = result.trials.iter().filter_map(|r| r.micros).collect();
        rows.push(BenchRow {
            sweep: config.sweep,
            value: value.clone(),
            family: config.family,
            mode: config.mode,
            concept: config.concept,
            n,
            d: config.d,
            c,
            epsilon: epsilon.value(),
            sample_size: sample_size(epsilon),
            trials: config.trials,
            seed: config.seed,
            rejection_frequency: result.rejection_frequency,
            queries: result.queries,
            micros_median: timing.then(|| QueryStats::of(&micros).median),
        });
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "sweep,value,family,mode,concept,n,d,c,epsilon,sample_size,trials,seed,rejection_frequency,queries_min,queries_median,queries_max,micros_median\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            serde_plain(&r.sweep),
            r.value,
            r.family,
            serde_plain(&r.mode),
            r.concept,
            r.n,
            r.d,
            r.c,
            r.epsilon,
            r.sample_size,
            r.trials,
            r.seed,
            r.rejection_frequency,
            r.queries.min,
            r.queries.median,
            r.queries.max,
            r.micros_median.map_or(String::new(), |m| m.to_string()),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Relation, UtilityParams};

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
    fn stats() {
        assert_eq!(QueryStats::of(&[5, 1, 3, 2]), QueryStats { min: 1, median: 2, max: 5 });
        assert_eq!(QueryStats::of(&[]), QueryStats::default());
    }

    #[test]
    fn existence_trials_on_game_a() {
        let a = game_a();
        let eps = Epsilon::new(0.9).unwrap();
        let r = run_trials(&a, None, TestMode::Exist, StabilityConcept::Perfect, eps, SizeBound::Bounded(3), 0, 100, false)
            .unwrap();
        assert_eq!(r.rejection_frequency, 1.0);
        assert!(r.is_consistent());
        assert!(r.reject_dominant());
    }

    #[test]
    fn trials_are_reproducible() {
        let g = crate::generate::random_game(40, 3, UtilityParams::default(), 1);
        let p = crate::generate::random_partition(40, SizeBound::Bounded(3), 2);
        let eps = Epsilon::new(0.25).unwrap();
        let run = || {
            run_trials(&g, Some(&p), TestMode::Verify, StabilityConcept::Nash, eps, SizeBound::Bounded(3), 9, 20, false)
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.trials[3].seed, 12);
        assert!(a.trials.iter().all(|t| t.micros.is_none()));
    }

    #[test]
    fn epsilon_sweep_sample_sizes() {
        let config = BenchConfig {
            sweep: SweepParam::Epsilon,
            values: vec!["0.5".into(), "0.25".into(), "0.125".into()],
            family: Family::FriendClustersPerfect,
            mode: TestMode::Verify,
            concept: StabilityConcept::Nash,
            n: 100,
            d: 3,
            c: SizeBound::Bounded(3),
            epsilon: Epsilon::new(0.1).unwrap(),
            utility: UtilityPreset::default(),
            trials: 5,
            seed: 1,
        };
        let rows = run_bench(&config, false).unwrap();
        let sizes: Vec<usize> = rows.iter().map(|r| r.sample_size).collect();
        assert_eq!(sizes, vec![3, 5, 9]);
        assert!(rows.iter().all(|r| r.rejection_frequency == 0.0));
        assert_eq!(bench_csv(&rows).lines().count(), 4);
    }
}
