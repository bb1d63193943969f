//! Epoch/perturbation local search over placements, and the exhaustive
//! Pareto oracle it is validated against.
//!
//! Each epoch runs a batch of perturbation trajectories from a shared
//! start. A trajectory greedily walks neighbor moves, accepting a move
//! when it joins the trajectory's archive view or improves a normalized
//! augmented Tchebycheff scalarization with per-trajectory random weights.
//! Trajectories within an epoch see the epoch-start archive snapshot and
//! merge in trajectory index order, so a parallel run is bit-identical to
//! the sequential one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::guidance::{placement_features, stage_guidance};
use super::hypervolume::hypervolume;
use super::{ArchiveEntry, ObjectiveSet, ParetoArchive};
use crate::error::Result;
use crate::pipeline::{evaluate_design, EvalSummary};
use crate::platform::{apply_move, neighbor_moves, random_placement, Placement, Platform};
use crate::util::fnv1a64;
use crate::workload::{build_kernel_graph, KernelGraph, ModelConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GuidanceMode {
    #[default]
    Off,
    Learned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub epochs: u32,
    pub perturbations: u32,
    pub objective_set: ObjectiveSet,
    pub seed: u64,
    pub guidance: GuidanceMode,
    /// One start per epoch shared by all its perturbations (the protocol
    /// default); false gives every trajectory its own random start.
    pub shared_start: bool,
    pub max_steps: u32,
    /// Neighbor sample per step; neighborhoods at or below
    /// `exhaustive_below` candidates are evaluated exhaustively.
    pub sample_size: u32,
    pub exhaustive_below: u32,
    /// Worker threads for candidate evaluation; affects wall time only.
    pub jobs: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epochs: 50,
            perturbations: 10,
            objective_set: ObjectiveSet::Ptn,
            seed: 0,
            guidance: GuidanceMode::Off,
            shared_start: true,
            max_steps: 10,
            sample_size: 12,
            exhaustive_below: 64,
            jobs: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.perturbations == 0 {
            return Err(crate::error::Error::InvalidInput(
                "epochs and perturbations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct SearchOutcome {
    pub archive: ParetoArchive,
    pub log: Vec<String>,
    /// Archive hypervolume after each epoch.
    pub hv_trace: Vec<f64>,
    pub evaluations: u64,
}

fn subseed(seed: u64, a: u64, b: u64, salt: u64) -> u64 {
    let mut bytes = Vec::with_capacity(32);
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(&a.to_le_bytes());
    bytes.extend_from_slice(&b.to_le_bytes());
    bytes.extend_from_slice(&salt.to_le_bytes());
    fnv1a64(&bytes)
}

type Cache = BTreeMap<u64, Option<EvalSummary>>;

struct Evaluator<'a> {
    platform: &'a Platform,
    graph: &'a KernelGraph,
    cache: Cache,
    evaluations: u64,
    jobs: usize,
}

impl<'a> Evaluator<'a> {
    /// Evaluates candidates in order, via the cache; uncached candidates
    /// may be computed in parallel, but cache fill order is the candidate
    /// order, so results never depend on thread timing.
    fn eval_batch(&mut self, candidates: &[(u64, &Placement)], log: &mut Vec<String>) -> Vec<Option<EvalSummary>> {
        let todo: Vec<(u64, &Placement)> = {
            let mut seen = std::collections::BTreeSet::new();
            candidates
                .iter()
                .filter(|(d, _)| !self.cache.contains_key(d) && seen.insert(*d))
                .copied()
                .collect()
        };
        let fresh: Vec<(u64, std::result::Result<EvalSummary, String>)> = if self.jobs > 1 && todo.len() > 1 {
            let jobs = self.jobs.min(todo.len());
            let platform = self.platform;
            let graph = self.graph;
            let mut slots: Vec<Option<(u64, std::result::Result<EvalSummary, String>)>> = vec![None; todo.len()];
            std::thread::scope(|scope| {
                for (w, chunk) in slots.chunks_mut(todo.len().div_ceil(jobs)).enumerate() {
                    let base = w * todo.len().div_ceil(jobs);
                    let todo = &todo;
                    scope.spawn(move || {
                        for (i, slot) in chunk.iter_mut().enumerate() {
                            let (digest, pl) = todo[base + i];
                            let r = evaluate_design(platform, graph, pl)
                                .map(|e| e.summary)
                                .map_err(|e| e.to_string());
                            *slot = Some((digest, r));
                        }
                    });
                }
            });
            slots.into_iter().map(|s| s.expect("filled")).collect()
        } else {
            todo.iter()
                .map(|(d, pl)| {
                    (
                        *d,
                        evaluate_design(self.platform, self.graph, pl)
                            .map(|e| e.summary)
                            .map_err(|e| e.to_string()),
                    )
                })
                .collect()
        };
        for (digest, result) in fresh {
            self.evaluations += 1;
            match result {
                Ok(s) => {
                    self.cache.insert(digest, Some(s));
                }
                Err(e) => {
                    log.push(format!("evaluation failed for {digest:016x}: {e}"));
                    self.cache.insert(digest, None);
                }
            }
        }
        candidates.iter().map(|(d, _)| self.cache[d].clone()).collect()
    }

    fn eval_one(&mut self, digest: u64, placement: &Placement, log: &mut Vec<String>) -> Option<EvalSummary> {
        self.eval_batch(&[(digest, placement)], log).pop().unwrap()
    }
}

/// Normalized augmented Tchebycheff scalarization.
fn scalarize(values: &[f64], weights: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for i in 0..values.len() {
        let range = (hi[i] - lo[i]).max(1e-30);
        let z = (values[i] - lo[i]) / range;
        worst = worst.max(weights[i] * z);
        sum += z;
    }
    worst + 0.05 * sum
}

struct TrajectoryResult {
    /// Evaluated entries in evaluation order, for ordered merging.
    evaluated: Vec<ArchiveEntry>,
    hv_gain: f64,
    start_features: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    platform: &Platform,
    config: &SearchConfig,
    snapshot: &ParetoArchive,
    start: Placement,
    rng: &mut ChaCha8Rng,
    evaluator: &mut Evaluator,
    log: &mut Vec<String>,
) -> TrajectoryResult {
    let set = config.objective_set;
    let start_features = placement_features(platform, &start);
    let mut local = snapshot.clone();
    let hv_before = hypervolume(&local.objective_rows(), 1.1);
    let mut evaluated = Vec::new();

    let start_digest = start.digest(platform);
    let Some(start_summary) = evaluator.eval_one(start_digest, &start, log) else {
        return TrajectoryResult {
            evaluated,
            hv_gain: 0.0,
            start_features,
        };
    };
    let entry = ArchiveEntry {
        digest: start_digest,
        objectives: set.project(&start_summary),
        summary: start_summary.clone(),
        placement: start.clone(),
    };
    evaluated.push(entry.clone());
    local.insert(entry);

    // Frozen normalization bounds from the snapshot plus the start.
    let dims = set.dims();
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    for row in local.objective_rows() {
        for d in 0..dims {
            lo[d] = lo[d].min(row[d]);
            hi[d] = hi[d].max(row[d]);
        }
    }
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>() + 0.05).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / sum).collect()
    };

    let mut cur = start;
    let mut cur_vals = set.project(&start_summary).values;
    let mut cur_g = scalarize(&cur_vals, &weights, &lo, &hi);

    'steps: for _ in 0..config.max_steps {
        let moves = neighbor_moves(platform, &cur);
        if moves.is_empty() {
            break;
        }
        let picked: Vec<usize> = if moves.len() as u32 <= config.exhaustive_below {
            (0..moves.len()).collect()
        } else {
            // Deterministic partial Fisher-Yates sample.
            let mut idx: Vec<usize> = (0..moves.len()).collect();
            for i in 0..(config.sample_size as usize).min(idx.len()) {
                let j = rng.gen_range(i..idx.len());
                idx.swap(i, j);
            }
            idx.truncate(config.sample_size as usize);
            idx
        };
        let candidates: Vec<Placement> = picked.iter().map(|i| apply_move(&cur, &moves[*i])).collect();
        let keyed: Vec<(u64, &Placement)> = candidates.iter().map(|c| (c.digest(platform), c)).collect();
        let summaries = evaluator.eval_batch(&keyed, log);

        let mut accepted: Option<(usize, Vec<f64>, f64)> = None;
        for (i, summary) in summaries.iter().enumerate() {
            let Some(summary) = summary else {
                log.push(format!(
                    "trajectory aborted: candidate {:016x} failed evaluation",
                    keyed[i].0
                ));
                break 'steps;
            };
            let objectives = set.project(summary);
            let vals = objectives.values.clone();
            let entry = ArchiveEntry {
                digest: keyed[i].0,
                objectives,
                summary: summary.clone(),
                placement: candidates[i].clone(),
            };
            let inserted = local.insert(entry.clone());
            evaluated.push(entry);
            if accepted.is_none() {
                let g = scalarize(&vals, &weights, &lo, &hi);
                if inserted || g < cur_g - 1e-15 {
                    accepted = Some((i, vals, g));
                }
            }
        }
        match accepted {
            Some((i, vals, g)) => {
                cur = candidates[i].clone();
                cur_vals = vals;
                cur_g = g;
            }
            None => break,
        }
    }
    let _ = cur_vals;

    let hv_after = hypervolume(&local.objective_rows(), 1.1);
    TrajectoryResult {
        evaluated,
        hv_gain: hv_after - hv_before,
        start_features,
    }
}

/// Runs the full search: `epochs` batches of `perturbations` trajectories,
/// with the archive merged in trajectory order after each batch.
/// Deterministic for a fixed (platform, model, config).
pub fn moo_search(platform: &Platform, model: &ModelConfig, config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    platform.validate()?;
    let graph = build_kernel_graph(model)?;
    let mut archive = ParetoArchive::new(config.objective_set, config.seed);
    let mut log = Vec::new();
    let mut hv_trace = Vec::new();
    let mut evaluator = Evaluator {
        platform,
        graph: &graph,
        cache: Cache::new(),
        evaluations: 0,
        jobs: config.jobs.max(1),
    };
    let mut history: Vec<(Vec<f64>, f64)> = Vec::new();

    const START_SALT: u64 = 0x5eed_0001;
    const TRAJ_SALT: u64 = 0x5eed_0002;
    const GUIDE_SALT: u64 = 0x5eed_0003;

    for epoch in 0..config.epochs {
        let epoch_start: Placement = {
            let guided = if config.guidance == GuidanceMode::Learned {
                let mut grng = ChaCha8Rng::seed_from_u64(subseed(config.seed, epoch as u64, 0, GUIDE_SALT));
                let g = stage_guidance(platform, &history, &mut grng);
                if g.is_none() && history.len() >= 5 {
                    log.push(format!("epoch {epoch}: guidance fit degenerate, random start"));
                }
                g
            } else {
                None
            };
            match guided {
                Some(p) => p,
                None => random_placement(platform, subseed(config.seed, epoch as u64, 0, START_SALT))?,
            }
        };

        let snapshot = archive.clone();
        let mut results = Vec::with_capacity(config.perturbations as usize);
        for t in 0..config.perturbations {
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(config.seed, epoch as u64, t as u64, TRAJ_SALT));
            let start = if config.shared_start {
                epoch_start.clone()
            } else {
                random_placement(platform, subseed(config.seed, epoch as u64, t as u64, START_SALT))?
            };
            let r = run_trajectory(platform, config, &snapshot, start, &mut rng, &mut evaluator, &mut log);
            results.push(r);
        }
        // Serialized merge in trajectory index order.
        for r in &results {
            for entry in &r.evaluated {
                archive.insert(entry.clone());
            }
        }
        for r in results {
            history.push((r.start_features, r.hv_gain));
        }
        hv_trace.push(hypervolume(&archive.objective_rows(), 1.1));
    }

    Ok(SearchOutcome {
        archive,
        log,
        hv_trace,
        evaluations: evaluator.evaluations,
    })
}

/// Exhaustive oracle: evaluates every placement in the declared design
/// space and returns the exact non-dominated set.
pub fn brute_force_pareto(
    platform: &Platform,
    model: &ModelConfig,
    objective_set: ObjectiveSet,
) -> Result<ParetoArchive> {
    platform.validate()?;
    let graph = build_kernel_graph(model)?;
    let placements = super::enumerate_placements(platform)?;
    let mut archive = ParetoArchive::new(objective_set, 0);
    for pl in placements {
        let eval = evaluate_design(platform, &graph, &pl)?;
        let digest = pl.digest(platform);
        archive.insert(ArchiveEntry {
            digest,
            objectives: objective_set.project(&eval.summary),
            summary: eval.summary,
            placement: pl,
        });
    }
    Ok(archive)
}
