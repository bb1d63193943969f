//! Analytical latency, energy, and EDP model.
//!
//! Per block, the SM tier computes the attention group(s) while the ReRAM
//! tier is reprogrammed with the block's FF weights (write hiding); the FF
//! pipeline then runs while the MC prefetches the next block's attention
//! weights. Parallel-attention topology fuses the two compute phases. Any
//! hidden operation longer than its cover is booked as stall time.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mapping::Mapping;
use crate::noc::{canonical_pair, RouterNet, TrafficMatrix};
use crate::platform::{CoreId, CoreKind, Placement, Platform, ReramParams};
use crate::workload::{KernelClass, KernelGraph, KernelOp, LayerTopology, ModelConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActivityEntry {
    pub core: CoreId,
    /// Time-averaged fraction of (active - idle) power over the phase.
    pub duty: f64,
    /// Peak instantaneous fraction, for concurrent-power accounting.
    pub presence: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Phase {
    pub label: String,
    pub start_s: f64,
    pub duration_s: f64,
    pub activity: Vec<ActivityEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    pub phases: Vec<Phase>,
    pub makespan_s: f64,
    /// Raw component durations before overlap; their sum is the
    /// no-overlap serial reference.
    pub components: Vec<(String, f64)>,
    pub stall_s: f64,
    pub class_latency_s: BTreeMap<String, f64>,
    /// Total modeled DRAM time for attention weight loads.
    pub weight_load_time_s: f64,
}

impl Schedule {
    pub fn serial_reference_s(&self) -> f64 {
        self.components.iter().map(|(_, d)| d).sum()
    }

    /// Per-core fraction of the makespan spent drawing active power.
    pub fn core_duties(&self) -> BTreeMap<CoreId, f64> {
        let mut acc: BTreeMap<CoreId, f64> = BTreeMap::new();
        for ph in &self.phases {
            for a in &ph.activity {
                *acc.entry(a.core).or_insert(0.0) += a.duty * ph.duration_s;
            }
        }
        if self.makespan_s > 0.0 {
            for v in acc.values_mut() {
                *v = (*v / self.makespan_s).clamp(0.0, 1.0);
            }
        }
        acc
    }

    pub fn peak_concurrent_power_w(&self, platform: &Platform) -> f64 {
        let cores = platform.cores();
        let idle_total: f64 = cores.iter().map(|c| platform.core_specs[c.spec_idx].idle_power_w).sum();
        self.phases
            .iter()
            .map(|ph| {
                let mut p = idle_total;
                for a in &ph.activity {
                    let spec = &platform.core_specs[cores[a.core.0].spec_idx];
                    p += a.presence.min(1.0) * (spec.active_power_w - spec.idle_power_w);
                }
                p
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerfResult {
    pub latency_s: f64,
    pub energy_j: f64,
    pub edp_js: f64,
    pub stall_s: f64,
    pub class_latency_s: BTreeMap<String, f64>,
    pub peak_concurrent_power_w: f64,
    pub weight_load_time_s: f64,
    pub link_energy_j: f64,
}

/// How a kernel is placed for `kernel_latency`.
pub enum CoreAssignment<'a> {
    /// GEMM or elementwise work spread over these SMs.
    Sms(&'a [CoreId]),
    /// Bit-serial crossbar GEMM with this many weight replicas.
    Reram { replication: u64 },
    /// Pure DRAM transfer (embedding lookups).
    DramTransfer,
}

/// Latency of one kernel on one assignment. Enforces the mapping policy:
/// FF kernels never run on SMs and the dynamic-score kernels never run on
/// ReRAM (the endurance rationale for the split).
pub fn kernel_latency(
    op: &KernelOp,
    assignment: &CoreAssignment,
    platform: &Platform,
    model: &ModelConfig,
) -> Result<f64> {
    match assignment {
        CoreAssignment::Sms(cores) => {
            if op.class.is_ff() {
                return Err(Error::InvalidInput(format!(
                    "{}: FF kernels are pinned to the ReRAM tier",
                    op.id
                )));
            }
            if cores.is_empty() {
                return Err(Error::UnmappedKernel(op.id.clone()));
            }
            let mut peak = 0.0;
            for c in cores.iter() {
                let spec = platform.spec_of(*c);
                let sm = spec
                    .sm
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput(format!("{}: assigned core is not an SM", op.id)))?;
                peak += sm.peak_flops;
            }
            let cal = &platform.calibration;
            let gemm_t = op.flops as f64 / (peak * cal.sm_utilization);
            let scalar_rate = peak / cal.scalar_rate_divisor;
            let elem_t = op.elementwise_count.unwrap_or(0) as f64 / scalar_rate;
            Ok(gemm_t + elem_t)
        }
        CoreAssignment::Reram { replication } => {
            if matches!(op.class, KernelClass::Mha2 | KernelClass::Mha3) {
                return Err(Error::InvalidInput(format!(
                    "{}: dynamic-operand kernels are pinned to the SM tier (endurance)",
                    op.id
                )));
            }
            let (m, _, _) = op
                .gemm_dims
                .ok_or_else(|| Error::InvalidInput(format!("{}: ReRAM latency needs GEMM dims", op.id)))?;
            let spec = reram_spec(platform)?;
            let freq = platform
                .core_specs
                .iter()
                .find(|s| s.kind == CoreKind::Reram)
                .map(|s| s.frequency_hz)
                .unwrap_or(1e7);
            let rows = m.div_ceil((*replication).max(1));
            let _ = spec;
            Ok(rows as f64 * model.precision_bits as f64 / freq)
        }
        CoreAssignment::DramTransfer => {
            let bytes = op.input_bytes.max(op.output_bytes);
            Ok(bytes as f64 / platform.dram_bandwidth_bytes_per_s)
        }
    }
}

fn reram_spec(platform: &Platform) -> Result<&ReramParams> {
    platform
        .core_specs
        .iter()
        .find_map(|s| s.reram.as_ref())
        .ok_or_else(|| Error::InvalidPlatform("no ReRAM core spec".into()))
}

/// Per-block FF shard geometry on the ReRAM tier.
struct FfShard {
    crossbars_needed: u64,
    replication: u64,
    program_time_s: f64,
    compute_fraction: f64,
    write_fraction: f64,
    freq_hz: f64,
}

fn ff_shard(platform: &Platform, mapping: &Mapping, model: &ModelConfig) -> Result<FfShard> {
    let spec = reram_spec(platform)?;
    let cal = &platform.calibration;
    let cpv = (model.precision_bits / spec.bits_per_cell) as u64;
    let cells_ff1 = model.d_model * model.ff_dim() * cpv;
    let cells_ff2 = model.ff_dim() * model.d_model * cpv;
    let xbar_cells = spec.crossbar_rows * spec.crossbar_cols;
    let xb1 = cells_ff1.div_ceil(xbar_cells);
    let xb2 = cells_ff2.div_ceil(xbar_cells);
    let total_xbars: u64 = mapping.reram_pipeline.len() as u64 * spec.crossbar_count();
    let avail = if cal.double_buffer { total_xbars / 2 } else { total_xbars };
    let needed = xb1 + xb2;
    if needed > avail {
        return Err(Error::CapacityExceeded {
            what: "ReRAM cells for one block's FF shard (double-buffered)".into(),
            required: cells_ff1 + cells_ff2,
            available: avail * xbar_cells,
        });
    }
    let replication = (avail / needed).max(1);
    // Every target crossbar has its own row driver; rows program in
    // lockstep across crossbars.
    let rows1 = cells_ff1.div_ceil(xb1 * spec.crossbar_cols);
    let rows2 = cells_ff2.div_ceil(xb2 * spec.crossbar_cols);
    let program_time_s = rows1.max(rows2) as f64 * spec.row_write_time_s;
    let freq_hz = platform
        .core_specs
        .iter()
        .find(|s| s.kind == CoreKind::Reram)
        .map(|s| s.frequency_hz)
        .unwrap_or(1e7);
    Ok(FfShard {
        crossbars_needed: needed,
        replication,
        program_time_s,
        compute_fraction: ((needed * replication) as f64 / total_xbars as f64).min(1.0),
        write_fraction: cal.reram_write_power_fraction * (needed as f64 / total_xbars as f64).min(1.0),
        freq_hz,
    })
}

/// Work each SM owes for one attention group of one block.
fn group_sm_work(
    graph: &KernelGraph,
    mapping: &Mapping,
    platform: &Platform,
    block: u32,
    cross: bool,
) -> Result<BTreeMap<CoreId, f64>> {
    let cal = &platform.calibration;
    let mut work: BTreeMap<CoreId, f64> = BTreeMap::new();
    for op in graph
        .ops
        .iter()
        .filter(|o| o.layer == block && o.cross_attention == cross)
    {
        let sm = match op.class {
            KernelClass::Mha1 => match op.head {
                Some(i) => mapping.head_sm[i as usize],
                None => {
                    if op.id.contains("mha1k") {
                        mapping.mqa_k_sm
                    } else {
                        mapping.mqa_v_sm
                    }
                }
            },
            KernelClass::Mha2 | KernelClass::Mha3 => mapping.head_sm[op.head.unwrap() as usize],
            KernelClass::Mha4 | KernelClass::Lnorm1 => mapping.owner_sm,
            _ => continue,
        };
        let spec = platform.spec_of(sm);
        let peak = spec
            .sm
            .as_ref()
            .ok_or_else(|| Error::UnmappedKernel(op.id.clone()))?
            .peak_flops;
        let t = op.flops as f64 / (peak * cal.sm_utilization)
            + op.elementwise_count.unwrap_or(0) as f64 / (peak / cal.scalar_rate_divisor);
        *work.entry(sm).or_insert(0.0) += t;
    }
    Ok(work)
}

fn mha_weight_bytes(graph: &KernelGraph, block: u32) -> u64 {
    graph
        .ops
        .iter()
        .filter(|o| o.layer == block && !o.class.is_ff())
        .map(|o| o.weight_bytes)
        .sum()
}

/// Total modeled DRAM time for attention weight loads over the whole model.
pub fn mha_weight_load_time(graph: &KernelGraph, platform: &Platform) -> f64 {
    let blocks = block_ids(graph);
    blocks
        .iter()
        .map(|b| mha_weight_bytes(graph, *b) as f64 / platform.dram_bandwidth_bytes_per_s + platform.calibration.dfi_latency_s)
        .sum()
}

fn block_ids(graph: &KernelGraph) -> Vec<u32> {
    let mut b: Vec<u32> = graph
        .ops
        .iter()
        .filter(|o| o.class != KernelClass::Embed)
        .map(|o| o.layer)
        .collect();
    b.sort_unstable();
    b.dedup();
    b
}

/// Builds the phase schedule for a mapped model.
pub fn build_schedule(
    graph: &KernelGraph,
    platform: &Platform,
    mapping: &Mapping,
) -> Result<Schedule> {
    let model = &graph.model;
    let cal = &platform.calibration;
    let blocks = block_ids(graph);
    let mut phases = Vec::new();
    let mut components = Vec::new();
    let mut class_latency: BTreeMap<String, f64> = BTreeMap::new();
    let mut stall = 0.0;
    let mut weight_load_total = 0.0;
    let mut t = 0.0;

    if blocks.is_empty() {
        return Ok(Schedule {
            phases,
            makespan_s: 0.0,
            components,
            stall_s: 0.0,
            class_latency_s: class_latency,
            weight_load_time_s: 0.0,
        });
    }
    if mapping.reram_pipeline.is_empty() {
        return Err(Error::UnmappedKernel("ff1 (no ReRAM cores for the FF policy)".into()));
    }

    let shard = ff_shard(platform, mapping, model)?;
    let n = model.seq_len;
    let pipe_len = mapping.reram_pipeline.len() as u64;
    let t_ff = (n.div_ceil(shard.replication) + pipe_len) as f64 * model.precision_bits as f64 / shard.freq_hz;
    let ff_fetch = 2.0 * (model.d_model * model.ff_dim() * model.bytes_per_value()) as f64
        / platform.dram_bandwidth_bytes_per_s
        + cal.dfi_latency_s;
    let t_write = shard.program_time_s.max(ff_fetch);

    let owner_spec = platform.spec_of(mapping.owner_sm);
    let owner_peak = owner_spec.sm.as_ref().expect("owner is an SM").peak_flops;
    let t_lnorm2 = (cal.lnorm_cost(model) / (owner_peak / cal.scalar_rate_divisor)) as f64;

    let wload = |b: u32| -> f64 {
        mha_weight_bytes(graph, b) as f64 / platform.dram_bandwidth_bytes_per_s + cal.dfi_latency_s
    };

    // Initial phase: embedding fetch plus the first block's attention
    // weights (and, under parallel attention, the first FF programming,
    // which has nothing to hide under).
    let embed = graph.op("embed").expect("embed op");
    let stacks = if graph.ops.iter().any(|o| o.cross_attention) { 2.0 } else { 1.0 };
    let t_embed = stacks * embed.output_bytes as f64 / platform.dram_bandwidth_bytes_per_s + cal.dfi_latency_s;
    let mut init = t_embed + wload(blocks[0]);
    weight_load_total += wload(blocks[0]);
    if matches!(model.layer_topology, LayerTopology::ParallelAttention) {
        init += t_write;
        components.push(("init.program".into(), t_write));
    }
    components.push(("init.embed".into(), t_embed));
    components.push(("init.weight-load".into(), wload(blocks[0])));
    *class_latency.entry("embed".into()).or_insert(0.0) += t_embed;
    phases.push(Phase {
        label: "init".into(),
        start_s: t,
        duration_s: init,
        activity: vec![ActivityEntry {
            core: mapping.owner_mc,
            duty: 1.0,
            presence: 1.0,
        }],
    });
    t += init;

    let reram_compute_activity = |dur: f64| -> Vec<ActivityEntry> {
        mapping
            .reram_pipeline
            .iter()
            .map(|c| ActivityEntry {
                core: *c,
                duty: (t_ff / dur).min(1.0) * shard.compute_fraction,
                presence: shard.compute_fraction,
            })
            .collect()
    };
    let reram_write_activity = |dur: f64| -> Vec<ActivityEntry> {
        mapping
            .reram_pipeline
            .iter()
            .map(|c| ActivityEntry {
                core: *c,
                duty: (shard.program_time_s / dur).min(1.0) * shard.write_fraction,
                presence: shard.write_fraction,
            })
            .collect()
    };
    let mc_activity = |bytes: f64, dur: f64| -> Vec<ActivityEntry> {
        let mut mcs: Vec<CoreId> = mapping.serving_mc.values().copied().collect();
        mcs.sort();
        mcs.dedup();
        let per = bytes / mcs.len() as f64;
        mcs.iter()
            .map(|c| ActivityEntry {
                core: *c,
                duty: (per / (platform.link_capacity_bytes_per_s * dur)).min(1.0),
                presence: 1.0,
            })
            .collect()
    };

    for (bi, &block) in blocks.iter().enumerate() {
        let has_cross = graph.ops.iter().any(|o| o.layer == block && o.cross_attention);
        let mut sm_work = group_sm_work(graph, mapping, platform, block, false)?;
        if has_cross {
            for (c, w) in group_sm_work(graph, mapping, platform, block, true)? {
                *sm_work.entry(c).or_insert(0.0) += w;
            }
        }
        let t_mha = sm_work.values().copied().fold(0.0, f64::max);
        let next_wload = blocks.get(bi + 1).map(|b| wload(*b));
        if let Some(w) = next_wload {
            weight_load_total += w;
        }

        *class_latency.entry("mha".into()).or_insert(0.0) += t_mha;
        *class_latency.entry("ff".into()).or_insert(0.0) += t_ff;
        *class_latency.entry("lnorm".into()).or_insert(0.0) += t_lnorm2;
        *class_latency.entry("reram-write".into()).or_insert(0.0) += t_write;
        if let Some(w) = next_wload {
            *class_latency.entry("weight-load".into()).or_insert(0.0) += w;
        }
        components.push((format!("l{block:02}.mha"), t_mha));
        components.push((format!("l{block:02}.ff"), t_ff));
        components.push((format!("l{block:02}.lnorm2"), t_lnorm2));
        if !(matches!(model.layer_topology, LayerTopology::ParallelAttention) && bi + 1 == blocks.len()) {
            // The last parallel block has no next block to program for.
            let w = if matches!(model.layer_topology, LayerTopology::ParallelAttention) {
                if bi + 1 < blocks.len() { t_write } else { 0.0 }
            } else {
                t_write
            };
            if w > 0.0 {
                components.push((format!("l{block:02}.program"), w));
            }
        }
        if let Some(w) = next_wload {
            components.push((format!("l{block:02}.prefetch"), w));
        }

        let sm_activity = |dur: f64| -> Vec<ActivityEntry> {
            sm_work
                .iter()
                .map(|(c, w)| ActivityEntry {
                    core: *c,
                    duty: (w / dur).min(1.0),
                    presence: 1.0,
                })
                .collect()
        };

        match model.layer_topology {
            LayerTopology::Sequential => {
                // Phase A: attention on SMs, FF programming hidden under it.
                let dur_a = t_mha.max(t_write).max(1e-30);
                stall += (t_write - t_mha).max(0.0);
                let mut act = sm_activity(dur_a);
                act.extend(reram_write_activity(dur_a));
                act.extend(mc_activity(mha_weight_bytes(graph, block) as f64, dur_a));
                phases.push(Phase {
                    label: format!("l{block:02}.mha"),
                    start_s: t,
                    duration_s: dur_a,
                    activity: act,
                });
                t += dur_a;

                // Phase B: FF pipeline, next attention weights prefetched.
                let dur_b = t_ff.max(next_wload.unwrap_or(0.0)).max(1e-30);
                if let Some(w) = next_wload {
                    stall += (w - t_ff).max(0.0);
                }
                let mut act = reram_compute_activity(dur_b);
                if let Some(w) = next_wload {
                    act.extend(mc_activity(
                        w * platform.dram_bandwidth_bytes_per_s,
                        dur_b,
                    ));
                }
                phases.push(Phase {
                    label: format!("l{block:02}.ff"),
                    start_s: t,
                    duration_s: dur_b,
                    activity: act,
                });
                t += dur_b;
            }
            LayerTopology::ParallelAttention => {
                // One fused phase: MHA and FF concurrent; the next block's
                // programming and prefetch hide under it.
                let next_write = if bi + 1 < blocks.len() { t_write } else { 0.0 };
                let cover = t_mha.max(t_ff);
                let dur = cover.max(next_write).max(next_wload.unwrap_or(0.0)).max(1e-30);
                stall += (next_write - cover).max(0.0);
                if let Some(w) = next_wload {
                    stall += (w - cover).max(0.0);
                }
                let mut act = sm_activity(dur);
                let mut reram: BTreeMap<CoreId, ActivityEntry> = reram_compute_activity(dur)
                    .into_iter()
                    .map(|a| (a.core, a))
                    .collect();
                if next_write > 0.0 {
                    for w in reram_write_activity(dur) {
                        let e = reram.get_mut(&w.core).expect("same pipeline");
                        e.duty = (e.duty + w.duty).min(1.0);
                        e.presence = (e.presence + w.presence).min(1.0);
                    }
                }
                act.extend(reram.into_values());
                act.extend(mc_activity(mha_weight_bytes(graph, block) as f64, dur));
                phases.push(Phase {
                    label: format!("l{block:02}.mha-ff"),
                    start_s: t,
                    duration_s: dur,
                    activity: act,
                });
                t += dur;
            }
        }

        // Closing layer norm on the owner.
        let dur_c = t_lnorm2.max(1e-30);
        phases.push(Phase {
            label: format!("l{block:02}.lnorm2"),
            start_s: t,
            duration_s: dur_c,
            activity: vec![ActivityEntry {
                core: mapping.owner_sm,
                duty: 1.0,
                presence: 1.0,
            }],
        });
        t += dur_c;
    }

    let _ = shard.crossbars_needed;
    Ok(Schedule {
        phases,
        makespan_s: t,
        components,
        stall_s: stall,
        class_latency_s: class_latency,
        weight_load_time_s: weight_load_total,
    })
}

impl crate::platform::Calibration {
    fn lnorm_cost(&self, model: &ModelConfig) -> f64 {
        (model.lnorm_ops_per_element * model.seq_len * model.d_model) as f64
    }
}

/// Energy over the schedule plus NoC link energy from routed traffic, and
/// the energy-delay product.
pub fn energy_and_edp(
    schedule: &Schedule,
    platform: &Platform,
    placement: &Placement,
    traffic: &TrafficMatrix,
    net: &RouterNet,
) -> Result<PerfResult> {
    let cores = platform.cores();
    let idle_total: f64 = cores.iter().map(|c| platform.core_specs[c.spec_idx].idle_power_w).sum();
    let mut energy = idle_total * schedule.makespan_s;
    for ph in &schedule.phases {
        for a in &ph.activity {
            let spec = &platform.core_specs[cores[a.core.0].spec_idx];
            energy += a.duty.min(1.0) * ph.duration_s * (spec.active_power_w - spec.idle_power_w);
        }
    }

    // Link energy: per-hop planar cost, 1/2 C V^2 per bit through TSVs.
    let cal = &platform.calibration;
    let tsv_j_per_byte = 0.5 * platform.tsv.capacitance_f * cal.tsv_voltage_v * cal.tsv_voltage_v * 8.0;
    let vertical: std::collections::BTreeSet<(crate::platform::SlotId, crate::platform::SlotId)> = placement
        .links
        .iter()
        .filter(|l| matches!(l, crate::platform::Link::Vertical { .. }))
        .filter_map(|l| placement.endpoints(platform, l))
        .map(|(a, b)| canonical_pair(a, b))
        .collect();
    let mut link_energy = 0.0;
    for flow in &traffic.flows {
        let (src, dst) = match (flow_slot(net, &flow.src, &flow.dst)?, flow_slot(net, &flow.dst, &flow.src)?) {
            (Some(s), Some(d)) => (s, d),
            _ => continue,
        };
        for hop in net.route(src, dst)? {
            let per_byte = if vertical.contains(&hop) {
                tsv_j_per_byte
            } else {
                cal.link_energy_j_per_byte
            };
            link_energy += flow.bytes as f64 * per_byte;
        }
    }
    energy += link_energy;

    Ok(PerfResult {
        latency_s: schedule.makespan_s,
        energy_j: energy,
        edp_js: energy * schedule.makespan_s,
        stall_s: schedule.stall_s,
        class_latency_s: schedule.class_latency_s.clone(),
        peak_concurrent_power_w: schedule.peak_concurrent_power_w(platform),
        weight_load_time_s: schedule.weight_load_time_s,
        link_energy_j: link_energy,
    })
}

fn flow_slot(
    net: &RouterNet,
    e: &crate::noc::Endpoint,
    other: &crate::noc::Endpoint,
) -> Result<Option<crate::platform::SlotId>> {
    use crate::noc::Endpoint;
    match e {
        Endpoint::Core(c) => net
            .slot(*c)
            .map(Some)
            .ok_or_else(|| Error::UnmappedKernel(format!("core {} not placed", c.0))),
        Endpoint::Dram => match other {
            Endpoint::Core(c) => {
                let toward = net
                    .slot(*c)
                    .ok_or_else(|| Error::UnmappedKernel(format!("core {} not placed", c.0)))?;
                let entry = net.dram_entry(toward)?;
                Ok(if entry == toward { None } else { Some(entry) })
            }
            Endpoint::Dram => Ok(None),
        },
    }
}

/// Areal power density in W/mm^2.
pub fn power_density(units: u32, unit_power_w: f64, area_mm2: f64) -> Result<f64> {
    if area_mm2 <= 0.0 {
        return Err(Error::InvalidInput("area must be positive".into()));
    }
    if unit_power_w < 0.0 {
        return Err(Error::InvalidInput("unit power must be nonnegative".into()));
    }
    Ok(units as f64 * unit_power_w / area_mm2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DramFeasibility {
    Feasible,
    Infeasible,
}

/// DRAM integrity bound: beyond 95 C, retention fails.
pub const DRAM_TEMP_LIMIT_C: f64 = 95.0;

pub fn dram_thermal_check(temp_celsius: f64) -> DramFeasibility {
    if temp_celsius > DRAM_TEMP_LIMIT_C {
        DramFeasibility::Infeasible
    } else {
        DramFeasibility::Feasible
    }
}
