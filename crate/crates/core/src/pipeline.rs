//! End-to-end evaluation of one candidate placement: traffic, utilization
//! statistics, schedule, thermal map, noise, and energy/EDP, bundled for
//! the search and the reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mapping::derive_mapping;
use crate::noc::{
    link_utilizations, mean_radix, router_radix_histogram, synthesize_traffic, utilization_stats,
    LinkUtilization, RouterNet, TrafficMatrix,
};
use crate::noise::{noise_objective, NoiseReport};
use crate::perf::{dram_thermal_check, energy_and_edp, build_schedule, DramFeasibility, PerfResult, Schedule};
use crate::platform::{
    bridges, fixed_links, validate_placement, Link, Placement, PlanarPolicy, Platform,
    VerticalPolicy,
};
use crate::thermal::{evaluate_thermal, ThermalObjectiveForm, ThermalResult};
use crate::util::fmt_f64;
use crate::workload::KernelGraph;

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub summary: EvalSummary,
    pub perf: PerfResult,
    pub thermal: ThermalResult,
    pub noise: NoiseReport,
    pub utilization: LinkUtilization,
    pub traffic: TrafficMatrix,
    pub schedule: Schedule,
    pub radix_histogram: BTreeMap<u32, u32>,
}

/// The scalar row every archive entry and CSV line carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mu: f64,
    pub sigma: f64,
    pub thermal_objective: f64,
    pub noise_objective: f64,
    pub peak_celsius: f64,
    pub reram_celsius: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
    pub feasible: bool,
    pub link_count: usize,
    pub mean_radix: f64,
    /// Structurally removable links carrying zero traffic — prune headroom.
    pub zero_utilization_removable_links: usize,
    /// Vertical level of the ReRAM tier (0 = nearest sink).
    pub reram_level: Option<usize>,
}

impl EvalSummary {
    pub fn csv_header() -> &'static str {
        "id,mu,sigma,thermal_obj,noise_obj,peak_temp_c,reram_temp_c,latency_s,energy_j,edp,feasible"
    }

    pub fn csv_row(&self, digest: u64) -> String {
        format!(
            "{:016x},{},{},{},{},{},{},{},{},{},{}",
            digest,
            fmt_f64(self.mu),
            fmt_f64(self.sigma),
            fmt_f64(self.thermal_objective),
            fmt_f64(self.noise_objective),
            fmt_f64(self.peak_celsius),
            fmt_f64(self.reram_celsius),
            fmt_f64(self.latency_s),
            fmt_f64(self.energy_j),
            fmt_f64(self.edp_js),
            self.feasible
        )
    }
}

/// Evaluates a placement end to end. The utilization window is the
/// schedule makespan (1 s for degenerate zero-work models).
pub fn evaluate_design(platform: &Platform, graph: &KernelGraph, placement: &Placement) -> Result<Evaluation> {
    let violations = validate_placement(platform, placement);
    if !violations.is_empty() {
        return Err(Error::InvalidPlacement(
            violations.iter().map(|v| v.to_string()).collect(),
        ));
    }
    let net = RouterNet::build(platform, placement)?;
    let mapping = derive_mapping(platform, placement, &graph.model, &net)?;
    let schedule = build_schedule(graph, platform, &mapping)?;
    let window = if schedule.makespan_s > 0.0 { schedule.makespan_s } else { 1.0 };

    let traffic = synthesize_traffic(graph, platform, placement, &mapping)?;
    let utilization = link_utilizations(&traffic, platform, placement, &net, window)?;
    let u_values = utilization.values();
    let (mu, sigma) = utilization_stats(&u_values)?;

    let duties = schedule.core_duties();
    let thermal = evaluate_thermal(platform, placement, &duties, ThermalObjectiveForm::Product);
    let noise = noise_objective(platform, placement, &thermal)?;
    let perf = energy_and_edp(&schedule, platform, placement, &traffic, &net)?;
    let radix_histogram = router_radix_histogram(platform, placement);

    // Prune headroom: searchable non-bridge links carrying zero traffic.
    let fixed = fixed_links(platform);
    let bridge_set = bridges(&net.adjacency);
    let zero_u_removable = placement
        .links
        .iter()
        .filter(|l| !fixed.contains(l))
        .filter(|l| match l {
            Link::Planar { .. } => platform.search.planar_links == PlanarPolicy::Free,
            Link::Vertical { .. } => platform.search.vertical_links == VerticalPolicy::Free,
        })
        .filter_map(|l| placement.endpoints(platform, l))
        .map(|(a, b)| crate::noc::canonical_pair(a, b))
        .filter(|k| !bridge_set.contains(k) && utilization.u.get(k).copied().unwrap_or(0.0) == 0.0)
        .count();

    let summary = EvalSummary {
        mu,
        sigma,
        thermal_objective: thermal.objective,
        noise_objective: noise.objective,
        peak_celsius: thermal.peak_celsius,
        reram_celsius: thermal.reram_celsius,
        latency_s: perf.latency_s,
        energy_j: perf.energy_j,
        edp_js: perf.edp_js,
        feasible: dram_thermal_check(thermal.peak_celsius) == DramFeasibility::Feasible,
        link_count: placement.links.len(),
        mean_radix: mean_radix(&radix_histogram),
        zero_utilization_removable_links: zero_u_removable,
        reram_level: placement.reram_level(platform),
    };
    Ok(Evaluation {
        summary,
        perf,
        thermal,
        noise,
        utilization,
        traffic,
        schedule,
        radix_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::{default_platform, random_placement};
    use crate::workload::{build_kernel_graph, zoo_model};

    #[test]
    fn end_to_end_evaluation_is_sane_and_deterministic() {
        let p = default_platform();
        let pl = random_placement(&p, 17).unwrap();
        let graph = build_kernel_graph(&zoo_model("bert-large", 512).unwrap()).unwrap();
        let a = evaluate_design(&p, &graph, &pl).unwrap();
        let b = evaluate_design(&p, &graph, &pl).unwrap();
        assert_eq!(a.summary, b.summary);
        assert!(a.summary.mu > 0.0);
        assert!(a.summary.sigma > 0.0);
        assert!(a.summary.noise_objective > 0.0);
        assert!(a.summary.latency_s > 0.0);
        assert!(a.summary.edp_js > 0.0);
        assert!(a.summary.peak_celsius > p.thermal.ambient_celsius);
        assert!(a.summary.reram_celsius > p.thermal.ambient_celsius);
    }

    #[test]
    fn evaluation_invariant_under_core_relabeling() {
        use crate::platform::CoreKind;
        let p = default_platform();
        let pl = random_placement(&p, 21).unwrap();
        let graph = build_kernel_graph(&zoo_model("bert-base", 128).unwrap()).unwrap();
        let base = evaluate_design(&p, &graph, &pl).unwrap();

        // Swap the ordinals of two SM cores: physically identical design.
        let cores = p.cores();
        let sm_slots: Vec<_> = pl
            .slot_map
            .iter()
            .filter(|(_, c)| cores[c.0].kind == CoreKind::Sm)
            .map(|(s, _)| *s)
            .take(2)
            .collect();
        let mut relabeled = pl.clone();
        let (c0, c1) = (relabeled.slot_map[&sm_slots[0]], relabeled.slot_map[&sm_slots[1]]);
        relabeled.slot_map.insert(sm_slots[0], c1);
        relabeled.slot_map.insert(sm_slots[1], c0);
        assert_eq!(pl.digest(&p), relabeled.digest(&p), "canonical digest ignores ordinals");

        let other = evaluate_design(&p, &graph, &relabeled).unwrap();
        assert_eq!(base.summary, other.summary);
    }

    #[test]
    fn invalid_placement_is_rejected_with_violations() {
        let p = default_platform();
        let mut pl = random_placement(&p, 3).unwrap();
        pl.links.retain(|l| matches!(l, crate::platform::Link::Planar { .. }));
        let graph = build_kernel_graph(&zoo_model("bert-tiny", 64).unwrap()).unwrap();
        match evaluate_design(&p, &graph, &pl) {
            Err(Error::InvalidPlacement(v)) => assert!(!v.is_empty()),
            other => panic!("expected placement rejection, got {other:?}"),
        }
    }
}
