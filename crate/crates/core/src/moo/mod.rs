//! Multi-objective search over placements: dominance, the Pareto archive,
//! hypervolume, an exhaustive oracle, and the epoch/perturbation local
//! search with optional learned start guidance.

mod enumerate;
mod guidance;
mod hypervolume;
mod search;

pub use enumerate::{enumerate_placements, ENUMERATION_LIMIT};
pub use guidance::{placement_features, stage_guidance};
pub use hypervolume::hypervolume;
pub use search::{brute_force_pareto, moo_search, GuidanceMode, SearchConfig, SearchOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::EvalSummary;
use crate::platform::Placement;
use crate::util::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveSet {
    /// Performance + thermal: (mu, sigma, thermal).
    Pt,
    /// Performance + thermal + noise: (mu, sigma, thermal, noise).
    #[default]
    Ptn,
}

impl ObjectiveSet {
    pub fn dims(self) -> usize {
        match self {
            ObjectiveSet::Pt => 3,
            ObjectiveSet::Ptn => 4,
        }
    }

    /// Projects the full (mu, sigma, thermal, noise) tuple onto this set.
    pub fn project(self, summary: &EvalSummary) -> ObjectiveVector {
        let mut values = vec![summary.mu, summary.sigma, summary.thermal_objective];
        if self == ObjectiveSet::Ptn {
            values.push(summary.noise_objective);
        }
        ObjectiveVector { set: self, values }
    }
}

impl std::fmt::Display for ObjectiveSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectiveSet::Pt => write!(f, "pt"),
            ObjectiveSet::Ptn => write!(f, "ptn"),
        }
    }
}

/// All-minimized objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub set: ObjectiveSet,
    pub values: Vec<f64>,
}

impl ObjectiveVector {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.set.dims() {
            return Err(Error::DimensionMismatch {
                left: self.values.len(),
                right: self.set.dims(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "objective values must be finite and nonnegative: {:?}",
                self.values
            )));
        }
        Ok(())
    }
}

/// Pareto dominance: `a` is no worse everywhere and strictly better
/// somewhere. Irreflexive by construction.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.values.len() != b.values.len() {
        return Err(Error::DimensionMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    let mut strictly_better = false;
    for (x, y) in a.values.iter().zip(&b.values) {
        if x > y {
            return Ok(false);
        }
        if x < y {
            strictly_better = true;
        }
    }
    Ok(strictly_better)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub digest: u64,
    pub objectives: ObjectiveVector,
    pub summary: EvalSummary,
    pub placement: Placement,
}

/// Non-dominated set of evaluated placements. Insertion keeps the set
/// minimal: dominated members are evicted, dominated candidates and
/// duplicate digests are refused.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub entries: Vec<ArchiveEntry>,
    pub seed: u64,
    pub objective_set: ObjectiveSet,
}

impl ParetoArchive {
    pub fn new(objective_set: ObjectiveSet, seed: u64) -> Self {
        ParetoArchive {
            entries: Vec::new(),
            seed,
            objective_set,
        }
    }

    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        if self.entries.iter().any(|e| e.digest == entry.digest) {
            return false;
        }
        for e in &self.entries {
            if dominates(&e.objectives, &entry.objectives).unwrap_or(false) {
                return false;
            }
        }
        self.entries
            .retain(|e| !dominates(&entry.objectives, &e.objectives).unwrap_or(false));
        self.entries.push(entry);
        self.entries.sort_by_key(|e| e.digest);
        debug_assert!(self.no_dominated_pair());
        true
    }

    pub fn no_dominated_pair(&self) -> bool {
        for a in &self.entries {
            for b in &self.entries {
                if a.digest != b.digest && dominates(&a.objectives, &b.objectives).unwrap_or(false) {
                    return false;
                }
            }
        }
        true
    }

    pub fn objective_rows(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.objectives.values.clone()).collect()
    }

    /// Stable digest over the sorted entry set.
    pub fn digest(&self) -> u64 {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&format!("{:016x};", e.digest));
        }
        fnv1a64(s.as_bytes())
    }

    /// CSV ranked by EDP (ties by digest), ready for downstream selection.
    pub fn to_csv(&self, version: &str) -> String {
        let mut s = format!("# hetrax-dse v{version}\n{}\n", EvalSummary::csv_header());
        let mut ranked: Vec<&ArchiveEntry> = self.entries.iter().collect();
        ranked.sort_by(|a, b| {
            a.summary
                .edp_js
                .partial_cmp(&b.summary.edp_js)
                .unwrap()
                .then(a.digest.cmp(&b.digest))
        });
        for e in ranked {
            s.push_str(&e.summary.csv_row(e.digest));
            s.push('\n');
        }
        s
    }

    /// Feasible entry with the lowest EDP, if any.
    pub fn best_edp_feasible(&self) -> Option<&ArchiveEntry> {
        self.entries
            .iter()
            .filter(|e| e.summary.feasible)
            .min_by(|a, b| {
                a.summary
                    .edp_js
                    .partial_cmp(&b.summary.edp_js)
                    .unwrap()
                    .then(a.digest.cmp(&b.digest))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec4(v: [f64; 4]) -> ObjectiveVector {
        ObjectiveVector {
            set: ObjectiveSet::Ptn,
            values: v.to_vec(),
        }
    }

    fn entry(digest: u64, v: [f64; 4]) -> ArchiveEntry {
        ArchiveEntry {
            digest,
            objectives: vec4(v),
            summary: EvalSummary {
                mu: v[0],
                sigma: v[1],
                thermal_objective: v[2],
                noise_objective: v[3],
                peak_celsius: 50.0,
                reram_celsius: 50.0,
                latency_s: 1.0,
                energy_j: 1.0,
                edp_js: 1.0,
                feasible: true,
                link_count: 0,
                mean_radix: 0.0,
                zero_utilization_removable_links: 0,
                reram_level: None,
            },
            placement: Placement {
                tier_order: vec![0],
                slot_map: Default::default(),
                links: Default::default(),
            },
        }
    }

    #[test]
    fn dominance_basics() {
        let a = vec4([1.0, 1.0, 1.0, 1.0]);
        let b = vec4([2.0, 2.0, 2.0, 2.0]);
        assert!(dominates(&a, &b).unwrap());
        assert!(!dominates(&b, &a).unwrap());
        assert!(!dominates(&a, &a).unwrap(), "irreflexive");
        let c = ObjectiveVector {
            set: ObjectiveSet::Pt,
            values: vec![1.0, 2.0, 0.0],
        };
        let d = ObjectiveVector {
            set: ObjectiveSet::Pt,
            values: vec![2.0, 1.0, 0.0],
        };
        assert!(!dominates(&c, &d).unwrap());
        assert!(!dominates(&d, &c).unwrap());
        assert!(dominates(&a, &c).is_err(), "dimension mismatch");
    }

    #[test]
    fn archive_insert_semantics() {
        let mut arch = ParetoArchive::new(ObjectiveSet::Ptn, 0);
        assert!(arch.insert(entry(1, [2.0, 2.0, 2.0, 2.0])));
        // Dominated point refused.
        assert!(!arch.insert(entry(2, [3.0, 3.0, 3.0, 3.0])));
        assert_eq!(arch.entries.len(), 1);
        // Dominating point evicts.
        assert!(arch.insert(entry(3, [1.0, 1.0, 1.0, 1.0])));
        assert_eq!(arch.entries.len(), 1);
        assert_eq!(arch.entries[0].digest, 3);
        // Incomparable point coexists.
        assert!(arch.insert(entry(4, [0.5, 2.0, 1.0, 1.0])));
        assert_eq!(arch.entries.len(), 2);
        // Duplicate digest refused.
        assert!(!arch.insert(entry(4, [0.1, 0.1, 0.1, 0.1])));
        assert!(arch.no_dominated_pair());
    }

    #[test]
    fn archive_matches_pairwise_filter_on_random_stream() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut arch = ParetoArchive::new(ObjectiveSet::Ptn, 0);
        let mut stream = Vec::new();
        for i in 0..300u64 {
            let v = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            stream.push((i, v));
            arch.insert(entry(i, v));
        }
        // O(n^2) oracle over the whole stream.
        let mut expect: Vec<u64> = Vec::new();
        'outer: for (i, v) in &stream {
            let vi = vec4(*v);
            for (j, w) in &stream {
                if i != j {
                    let vj = vec4(*w);
                    let dom = dominates(&vj, &vi).unwrap();
                    if dom {
                        continue 'outer;
                    }
                }
            }
            expect.push(*i);
        }
        let got: Vec<u64> = arch.entries.iter().map(|e| e.digest).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn pt_nondominated_stays_nondominated_under_ptn() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let points: Vec<[f64; 4]> = (0..200)
            .map(|_| [rng.gen(), rng.gen(), rng.gen(), rng.gen()])
            .collect();
        let pt = |v: &[f64; 4]| ObjectiveVector {
            set: ObjectiveSet::Pt,
            values: v[..3].to_vec(),
        };
        for (i, v) in points.iter().enumerate() {
            let nondom_pt = points
                .iter()
                .enumerate()
                .all(|(j, w)| i == j || !dominates(&pt(w), &pt(v)).unwrap());
            if nondom_pt {
                let nondom_ptn = points
                    .iter()
                    .enumerate()
                    .all(|(j, w)| i == j || !dominates(&vec4(*w), &vec4(*v)).unwrap());
                assert!(nondom_ptn, "adding objectives cannot create domination");
            }
        }
    }
}
