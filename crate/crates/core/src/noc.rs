//! NoC traffic synthesis and link-utilization statistics.
//!
//! Traffic is derived from the kernel graph and the core mapping: weight
//! loads fan out DRAM -> MC -> consumer, operands fan out from the owner's
//! MC to the head SMs, per-head outputs converge on the concat owner, and
//! FF activations stream through the vertical links into the ReRAM
//! pipeline and back. Utilization uses static shortest-path routing over
//! total per-inference byte volumes; queueing is out of scope.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::mapping::Mapping;
use crate::platform::{CoreId, CoreKind, Placement, Platform, SlotId};
use crate::util::fmt_f64;
use crate::workload::{AttentionKind, KernelClass, KernelGraph, LayerTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Endpoint {
    Core(CoreId),
    Dram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    MhaCompute,
    FfCompute,
    WeightLoad,
    Concat,
    Embed,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::MhaCompute => "mha-compute",
            Phase::FfCompute => "ff-compute",
            Phase::WeightLoad => "weight-load",
            Phase::Concat => "concat",
            Phase::Embed => "embed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub src: Endpoint,
    pub dst: Endpoint,
    pub bytes: u64,
    pub phase: Phase,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrafficMatrix {
    pub flows: Vec<Flow>,
}

impl TrafficMatrix {
    pub fn total_bytes(&self) -> u64 {
        self.flows.iter().map(|f| f.bytes).sum()
    }

    pub fn phase_bytes(&self, phase: Phase) -> u64 {
        self.flows.iter().filter(|f| f.phase == phase).map(|f| f.bytes).sum()
    }

    pub fn to_csv(&self, placement: &Placement, version: &str) -> String {
        let mut s = format!("# hetrax-dse v{version}\nsrc,dst,bytes,phase\n");
        let name = |e: &Endpoint| match e {
            Endpoint::Dram => "dram".to_string(),
            Endpoint::Core(c) => placement
                .slot_of(*c)
                .map(|sl| format!("{sl}"))
                .unwrap_or_else(|| format!("core{}", c.0)),
        };
        for f in &self.flows {
            s.push_str(&format!("{},{},{},{}\n", name(&f.src), name(&f.dst), f.bytes, f.phase));
        }
        s
    }
}

/// Router network over a placement's occupied slots, with all-pairs hop
/// distances precomputed for deterministic routing and nearest-MC queries.
#[derive(Debug, Clone)]
pub struct RouterNet {
    pub adjacency: BTreeMap<SlotId, Vec<SlotId>>,
    dist: BTreeMap<SlotId, BTreeMap<SlotId, u32>>,
    slot_of_core: BTreeMap<CoreId, SlotId>,
    mc_slots: Vec<SlotId>,
}

impl RouterNet {
    pub fn build(platform: &Platform, placement: &Placement) -> Result<RouterNet> {
        let adjacency = placement.adjacency(platform);
        let mut dist = BTreeMap::new();
        for src in adjacency.keys() {
            dist.insert(*src, bfs(&adjacency, *src));
        }
        let cores = platform.cores();
        let mut slot_of_core = BTreeMap::new();
        let mut mc_slots = Vec::new();
        for (slot, core) in &placement.slot_map {
            slot_of_core.insert(*core, *slot);
            if cores[core.0].kind == CoreKind::Mc {
                mc_slots.push(*slot);
            }
        }
        Ok(RouterNet {
            adjacency,
            dist,
            slot_of_core,
            mc_slots,
        })
    }

    pub fn distance(&self, a: SlotId, b: SlotId) -> Option<u32> {
        self.dist.get(&a)?.get(&b).copied()
    }

    pub fn slot(&self, core: CoreId) -> Option<SlotId> {
        self.slot_of_core.get(&core).copied()
    }

    /// MC router where DRAM traffic headed for `toward` enters the NoC.
    pub fn dram_entry(&self, toward: SlotId) -> Result<SlotId> {
        self.mc_slots
            .iter()
            .map(|mc| (self.distance(*mc, toward).unwrap_or(u32::MAX), *mc))
            .min()
            .map(|(_, mc)| mc)
            .ok_or_else(|| Error::InvalidPlatform("no MC router for DRAM attachment".into()))
    }

    /// Deterministic shortest path: hop-count shortest, ties broken by the
    /// smallest (tier, x, y) next hop. Returns the traversed links.
    pub fn route(&self, src: SlotId, dst: SlotId) -> Result<Vec<(SlotId, SlotId)>> {
        if src == dst {
            return Ok(Vec::new());
        }
        let to_dst = self.dist.get(&dst).ok_or(Error::Unroutable {
            src: src.to_string(),
            dst: dst.to_string(),
        })?;
        let mut here = src;
        let mut remaining = *to_dst.get(&src).ok_or(Error::Unroutable {
            src: src.to_string(),
            dst: dst.to_string(),
        })?;
        let mut path = Vec::with_capacity(remaining as usize);
        while here != dst {
            let next = self.adjacency[&here]
                .iter()
                .filter(|n| to_dst.get(n).copied() == Some(remaining - 1))
                .min()
                .copied()
                .ok_or(Error::Unroutable {
                    src: src.to_string(),
                    dst: dst.to_string(),
                })?;
            path.push(canonical_pair(here, next));
            here = next;
            remaining -= 1;
        }
        Ok(path)
    }
}

fn bfs(adj: &BTreeMap<SlotId, Vec<SlotId>>, src: SlotId) -> BTreeMap<SlotId, u32> {
    let mut dist = BTreeMap::new();
    dist.insert(src, 0);
    let mut queue = VecDeque::from([src]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for n in &adj[&s] {
            if !dist.contains_key(n) {
                dist.insert(*n, d + 1);
                queue.push_back(*n);
            }
        }
    }
    dist
}

pub fn canonical_pair(a: SlotId, b: SlotId) -> (SlotId, SlotId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

struct FlowAcc {
    acc: BTreeMap<(Endpoint, Endpoint, Phase), u64>,
}

impl FlowAcc {
    fn add(&mut self, src: Endpoint, dst: Endpoint, bytes: u64, phase: Phase) {
        if bytes == 0 || src == dst {
            return;
        }
        *self.acc.entry((src, dst, phase)).or_insert(0) += bytes;
    }

    fn core(c: CoreId) -> Endpoint {
        Endpoint::Core(c)
    }
}

/// Synthesizes the per-inference traffic matrix. Equal (src, dst, phase)
/// flows across blocks are aggregated.
pub fn synthesize_traffic(
    graph: &KernelGraph,
    _platform: &Platform,
    _placement: &Placement,
    mapping: &Mapping,
) -> Result<TrafficMatrix> {
    let model = &graph.model;
    let mut fa = FlowAcc { acc: BTreeMap::new() };
    let c = FlowAcc::core;
    let bv = model.bytes_per_value();
    let (n, d, dk) = (model.seq_len, model.d_model, model.head_dim);
    let ff = model.ff_dim();

    if graph.ops.is_empty() {
        return Ok(TrafficMatrix::default());
    }
    if graph.ops.iter().any(|o| o.class != KernelClass::Embed) && mapping.reram_pipeline.is_empty() {
        return Err(Error::UnmappedKernel("ff1 (no ReRAM cores for the FF policy)".into()));
    }

    // Embedding fetch: once per stack entry (the decoder stack re-reads it).
    let embed = graph
        .op("embed")
        .ok_or_else(|| Error::UnmappedKernel("embed".into()))?;
    let stack_entries = if graph.ops.iter().any(|o| o.cross_attention) { 2 } else { 1 };
    fa.add(Endpoint::Dram, c(mapping.owner_mc), stack_entries * embed.output_bytes, Phase::Embed);

    let blocks: Vec<u32> = {
        let mut b: Vec<u32> = graph.ops.iter().map(|o| o.layer).collect();
        b.sort_unstable();
        b.dedup();
        b
    };

    for &block in &blocks {
        let has_cross = graph
            .ops
            .iter()
            .any(|o| o.layer == block && o.cross_attention);
        let groups: &[bool] = if has_cross { &[false, true] } else { &[false] };

        for &cross in groups {
            // Weight loads: DRAM -> serving MC -> consumer SM, one pass per
            // weight matrix of the group.
            for op in graph.ops.iter().filter(|o| {
                o.layer == block && o.cross_attention == cross && o.weight_bytes > 0 && !o.class.is_ff()
            }) {
                let sm = match op.class {
                    KernelClass::Mha1 => match op.head {
                        Some(i) => mapping.head_sm[i as usize],
                        // Shared K/V projections under MQA.
                        None => {
                            if op.id.contains("mha1k") {
                                mapping.mqa_k_sm
                            } else {
                                mapping.mqa_v_sm
                            }
                        }
                    },
                    KernelClass::Mha4 => mapping.owner_sm,
                    _ => return Err(Error::UnmappedKernel(op.id.clone())),
                };
                let mc = mapping.serving_mc[&sm];
                fa.add(Endpoint::Dram, c(mc), op.weight_bytes, Phase::WeightLoad);
                fa.add(c(mc), c(sm), op.weight_bytes, Phase::WeightLoad);
            }

            // Operand distribution to every projecting SM. Self-attention
            // reads the block input from the owner's MC; cross-attention Q
            // reads the local attention output from the owner SM, while its
            // K/V side reads the stored encoder output from the MC.
            let proj_sms = mapping.projection_sms(model.attention_kind);
            let x_bytes = n * d * bv;
            if !cross {
                for sm in &proj_sms {
                    fa.add(c(mapping.owner_mc), c(*sm), x_bytes, Phase::MhaCompute);
                }
            } else {
                let kv_sms: Vec<CoreId> = match model.attention_kind {
                    AttentionKind::Mha => mapping.head_sm.clone(),
                    AttentionKind::Mqa => vec![mapping.mqa_k_sm, mapping.mqa_v_sm],
                };
                let mut kv_dedup = kv_sms;
                kv_dedup.sort();
                kv_dedup.dedup();
                for sm in &kv_dedup {
                    fa.add(c(mapping.owner_mc), c(*sm), x_bytes, Phase::MhaCompute);
                }
                let mut q_sms = mapping.head_sm.clone();
                q_sms.sort();
                q_sms.dedup();
                for sm in &q_sms {
                    fa.add(c(mapping.owner_sm), c(*sm), x_bytes, Phase::MhaCompute);
                }
            }

            // Shared K/V results fan out to every consuming head under MQA.
            if model.attention_kind == AttentionKind::Mqa {
                let kv_bytes = n * dk * bv;
                for (i, sm) in mapping.head_sm.iter().enumerate() {
                    let _ = i;
                    fa.add(c(mapping.mqa_k_sm), c(*sm), kv_bytes, Phase::MhaCompute);
                    fa.add(c(mapping.mqa_v_sm), c(*sm), kv_bytes, Phase::MhaCompute);
                }
            }

            // Fused-softmax row-block rescaling: one row of scale factors
            // per head exchanged with the owner; the score matrices
            // themselves never leave the SMs.
            for sm in &mapping.head_sm {
                fa.add(c(*sm), c(mapping.owner_sm), n * bv, Phase::MhaCompute);
            }

            // Concatenation: one per-head output converging on the owner.
            for sm in &mapping.head_sm {
                fa.add(c(*sm), c(mapping.owner_sm), n * dk * bv, Phase::Concat);
            }
        }

        // FF weight shards: DRAM -> serving MC -> ReRAM core.
        for (section, cores_in) in [(KernelClass::Ff1, &mapping.ff1_cores), (KernelClass::Ff2, &mapping.ff2_cores)] {
            let op = graph
                .ops
                .iter()
                .find(|o| o.layer == block && o.class == section)
                .ok_or_else(|| Error::UnmappedKernel(format!("l{block:02}.{}", if section == KernelClass::Ff1 { "ff1" } else { "ff2" })))?;
            let share = op.weight_bytes / cores_in.len() as u64;
            let mut rem = op.weight_bytes - share * cores_in.len() as u64;
            for core in cores_in.iter() {
                let extra = if rem > 0 { rem = rem.saturating_sub(1); 1 } else { 0 };
                let bytes = share + extra;
                let mc = mapping.serving_mc[core];
                fa.add(Endpoint::Dram, c(mc), bytes, Phase::WeightLoad);
                fa.add(c(mc), c(*core), bytes, Phase::WeightLoad);
            }
        }

        // FF activation stream: owner (or its MC under parallel attention,
        // which reads the previous block output) into the pipeline head,
        // the forwarded input within the first section, the hidden
        // activations across the section boundary, the partial-sum stream
        // within the second section, and the result back to the owner's MC.
        let pipe = &mapping.reram_pipeline;
        let entry = match model.layer_topology {
            LayerTopology::Sequential => c(mapping.owner_sm),
            LayerTopology::ParallelAttention => c(mapping.owner_mc),
        };
        fa.add(entry, c(pipe[0]), n * d * bv, Phase::FfCompute);
        for w in pipe.windows(2) {
            let upstream_is_ff1 = mapping.ff1_cores.contains(&w[0]);
            let downstream_is_ff2 = mapping.ff2_cores.contains(&w[1]);
            let bytes = if upstream_is_ff1 && downstream_is_ff2 {
                n * ff * bv // hidden activations cross the section boundary
            } else {
                n * d * bv // input forwarding / partial-sum accumulation
            };
            fa.add(c(w[0]), c(w[1]), bytes, Phase::FfCompute);
        }
        fa.add(c(*pipe.last().unwrap()), c(mapping.owner_mc), n * d * bv, Phase::FfCompute);
    }

    let flows = fa
        .acc
        .into_iter()
        .map(|((src, dst, phase), bytes)| Flow { src, dst, bytes, phase })
        .collect();
    Ok(TrafficMatrix { flows })
}

/// Per-link utilization: routed bytes over capacity times the evaluation
/// window. Every placement link appears, including zero-traffic ones; DRAM
/// port hops contribute no NoC load.
#[derive(Debug, Clone)]
pub struct LinkUtilization {
    pub u: BTreeMap<(SlotId, SlotId), f64>,
}

impl LinkUtilization {
    pub fn values(&self) -> Vec<f64> {
        self.u.values().copied().collect()
    }

    pub fn to_csv(&self, version: &str) -> String {
        let mut s = format!("# hetrax-dse v{version}\nlink,endpoint_a,endpoint_b,u\n");
        for (i, ((a, b), u)) in self.u.iter().enumerate() {
            s.push_str(&format!("{i},{a},{b},{}\n", fmt_f64(*u)));
        }
        s
    }
}

/// Routes every flow and tallies per-link bytes.
pub fn link_utilizations(
    traffic: &TrafficMatrix,
    platform: &Platform,
    placement: &Placement,
    net: &RouterNet,
    window_s: f64,
) -> Result<LinkUtilization> {
    if window_s <= 0.0 {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    let mut bytes: BTreeMap<(SlotId, SlotId), u64> = BTreeMap::new();
    for link in &placement.links {
        if let Some((a, b)) = placement.endpoints(platform, link) {
            bytes.insert(canonical_pair(a, b), 0);
        }
    }
    for flow in &traffic.flows {
        let (src, dst) = resolve_flow_slots(net, flow)?;
        let (Some(src), Some(dst)) = (src, dst) else {
            continue; // pure DRAM-port transfer, no NoC links
        };
        for hop in net.route(src, dst)? {
            *bytes.entry(hop).or_insert(0) += flow.bytes;
        }
    }
    let denom = platform.link_capacity_bytes_per_s * window_s;
    let u = bytes
        .into_iter()
        .map(|(k, b)| (k, b as f64 / denom))
        .collect();
    Ok(LinkUtilization { u })
}

/// Router slots a flow traverses; None on a side means the flow enters or
/// leaves through a DRAM port without using NoC links on that side.
fn resolve_flow_slots(net: &RouterNet, flow: &Flow) -> Result<(Option<SlotId>, Option<SlotId>)> {
    let resolve = |e: &Endpoint, other: &Endpoint| -> Result<Option<SlotId>> {
        match e {
            Endpoint::Core(c) => net
                .slot(*c)
                .map(Some)
                .ok_or_else(|| Error::UnmappedKernel(format!("core {} not placed", c.0))),
            Endpoint::Dram => match other {
                Endpoint::Core(c) => {
                    let toward = net.slot(*c).ok_or_else(|| Error::UnmappedKernel(format!("core {} not placed", c.0)))?;
                    let entry = net.dram_entry(toward)?;
                    // DRAM traffic terminating at its own entry MC never
                    // touches the NoC.
                    Ok(if entry == toward { None } else { Some(entry) })
                }
                Endpoint::Dram => Ok(None),
            },
        }
    };
    Ok((resolve(&flow.src, &flow.dst)?, resolve(&flow.dst, &flow.src)?))
}

/// Population mean and standard deviation of link utilization. Values are
/// summed in sorted order so the result is exactly permutation-invariant.
pub fn utilization_stats(u: &[f64]) -> Result<(f64, f64)> {
    if u.is_empty() {
        return Err(Error::ZeroLinks);
    }
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite utilizations"));
    let l = sorted.len() as f64;
    let mu = sorted.iter().sum::<f64>() / l;
    let mut devs: Vec<f64> = sorted.iter().map(|x| (x - mu) * (x - mu)).collect();
    devs.sort_by(|a, b| a.partial_cmp(b).expect("finite deviations"));
    let var = devs.iter().sum::<f64>() / l;
    Ok((mu, var.sqrt()))
}

/// ports -> router count. Ports are incident links plus the local port;
/// MC routers carry one extra DRAM port.
pub fn router_radix_histogram(platform: &Platform, placement: &Placement) -> BTreeMap<u32, u32> {
    let cores = platform.cores();
    let adj = placement.adjacency(platform);
    let mut hist: BTreeMap<u32, u32> = BTreeMap::new();
    for (slot, neighbors) in &adj {
        let mut ports = neighbors.len() as u32 + 1;
        if let Some(core) = placement.slot_map.get(slot) {
            if cores[core.0].kind == CoreKind::Mc {
                ports += 1;
            }
        }
        *hist.entry(ports).or_insert(0) += 1;
    }
    hist
}

pub fn radix_histogram_csv(hist: &BTreeMap<u32, u32>, version: &str) -> String {
    let mut s = format!("# hetrax-dse v{version}\nports,routers\n");
    for (p, c) in hist {
        s.push_str(&format!("{p},{c}\n"));
    }
    s
}

pub fn mean_radix(hist: &BTreeMap<u32, u32>) -> f64 {
    let routers: u32 = hist.values().sum();
    let ports: u64 = hist.iter().map(|(p, c)| *p as u64 * *c as u64).sum();
    ports as f64 / routers as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::derive_mapping;
    use crate::platform::{default_platform, random_placement, Link};
    use crate::workload::{build_kernel_graph, zoo_model, ModelConfig};
    use rand::{Rng, SeedableRng};

    fn setup(seed: u64, model: &ModelConfig) -> (crate::platform::Platform, Placement, RouterNet, Mapping, KernelGraph) {
        let p = default_platform();
        let pl = random_placement(&p, seed).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let graph = build_kernel_graph(model).unwrap();
        let m = derive_mapping(&p, &pl, model, &net).unwrap();
        (p, pl, net, m, graph)
    }

    #[test]
    fn route_is_shortest_and_deterministic() {
        let p = default_platform();
        let pl = random_placement(&p, 5).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let slots: Vec<SlotId> = pl.slot_map.keys().copied().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = slots[rng.gen_range(0..slots.len())];
            let b = slots[rng.gen_range(0..slots.len())];
            if a == b {
                continue;
            }
            let path = net.route(a, b).unwrap();
            assert_eq!(path.len() as u32, net.distance(a, b).unwrap());
            assert_eq!(path, net.route(a, b).unwrap());
        }
    }

    #[test]
    fn corner_to_corner_on_3x3_mesh_is_4_hops() {
        // BFS oracle on the planar mesh of tier 0: opposite corners of a
        // 3x3 grid are 4 links apart.
        let p = default_platform();
        let pl = random_placement(&p, 2).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let a = SlotId { tier: 0, x: 0, y: 0 };
        let b = SlotId { tier: 0, x: 2, y: 2 };
        // The random placement keeps the full planar mesh, so the in-tier
        // distance is the Manhattan distance.
        assert_eq!(net.distance(a, b).unwrap(), 4);
        assert_eq!(net.route(a, b).unwrap().len(), 4);
    }

    #[test]
    fn neighbor_route_is_single_link() {
        let p = default_platform();
        let pl = random_placement(&p, 3).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let a = SlotId { tier: 1, x: 0, y: 0 };
        let b = SlotId { tier: 1, x: 0, y: 1 };
        assert_eq!(net.route(a, b).unwrap().len(), 1);
    }

    #[test]
    fn utilization_stats_hand_values() {
        assert_eq!(utilization_stats(&[0.5, 0.5, 0.5]).unwrap(), (0.5, 0.0));
        let (mu, sigma) = utilization_stats(&[0.0, 1.0]).unwrap();
        assert_eq!((mu, sigma), (0.5, 0.5));
        assert!(utilization_stats(&[]).is_err());
        // Permutation invariance.
        let a = utilization_stats(&[0.1, 0.7, 0.3]).unwrap();
        let b = utilization_stats(&[0.7, 0.3, 0.1]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stats_match_two_pass_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let v: Vec<f64> = (0..rng.gen_range(1..40)).map(|_| rng.gen::<f64>()).collect();
            let (mu, sigma) = utilization_stats(&v).unwrap();
            let m2 = v.iter().sum::<f64>() / v.len() as f64;
            let s2 = (v.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            assert!((mu - m2).abs() <= 1e-12 * m2.abs().max(1.0));
            assert!((sigma - s2).abs() <= 1e-12 * s2.abs().max(1.0));
        }
    }

    #[test]
    fn sigma_zero_iff_uniform() {
        let (_, sigma) = utilization_stats(&[0.25; 7]).unwrap();
        assert_eq!(sigma, 0.0);
        let (_, sigma) = utilization_stats(&[0.25, 0.250001]).unwrap();
        assert!(sigma > 0.0);
    }

    #[test]
    fn traffic_conservation_against_graph_budgets() {
        let model = zoo_model("bert-base", 64).unwrap();
        let (_p, _pl, _net, m, graph) = setup(4, &model);
        let traffic = synthesize_traffic(&graph, &_p, &_pl, &m).unwrap();

        // Every weight byte crosses DRAM->MC once and MC->consumer once.
        let weight_bytes: u64 = graph.total_weight_bytes();
        assert_eq!(traffic.phase_bytes(Phase::WeightLoad), 2 * weight_bytes);

        // Embedding fetch equals the embed op output.
        let embed = graph.op("embed").unwrap();
        assert_eq!(traffic.phase_bytes(Phase::Embed), embed.output_bytes);

        // Concat converges one MHA3 output per head per block on the owner.
        let concat_expect: u64 = graph
            .ops
            .iter()
            .filter(|o| o.class == KernelClass::Mha3)
            .map(|o| o.output_bytes)
            .sum();
        assert_eq!(traffic.phase_bytes(Phase::Concat), concat_expect);

        // FF stream: pipeline entry + exit per block equal FF1 input and
        // FF2 output; interior hops are checked structurally elsewhere.
        let pipe_len = m.reram_pipeline.len() as u64;
        let ff_in: u64 = graph.ops_of_class(KernelClass::Ff1).map(|o| o.input_bytes).sum();
        let ff_hidden: u64 = graph.ops_of_class(KernelClass::Ff1).map(|o| o.output_bytes).sum();
        let ff_out: u64 = graph.ops_of_class(KernelClass::Ff2).map(|o| o.output_bytes).sum();
        let interior_fwd = (pipe_len - 2).max(0) * ff_in / graph.model.block_count() as u64;
        let expect = ff_in + ff_out + ff_hidden + graph.model.block_count() as u64 * interior_fwd;
        assert_eq!(traffic.phase_bytes(Phase::FfCompute), expect);
    }

    #[test]
    fn concat_phase_has_exactly_h_many_to_one_flows() {
        // 16 heads over 21 SMs leaves the owner head-free.
        let model = zoo_model("bert-large", 64).unwrap();
        let (_p, _pl, _net, m, graph) = setup(6, &model);
        let traffic = synthesize_traffic(&graph, &_p, &_pl, &m).unwrap();
        let concat_flows: Vec<&Flow> = traffic.flows.iter().filter(|f| f.phase == Phase::Concat).collect();
        assert_eq!(concat_flows.len(), 16);
        assert!(concat_flows
            .iter()
            .all(|f| f.dst == Endpoint::Core(m.owner_sm)));
    }

    #[test]
    fn zero_layer_model_produces_empty_traffic() {
        let mut model = zoo_model("bert-base", 64).unwrap();
        model.num_layers = 0;
        let p = default_platform();
        let pl = random_placement(&p, 4).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let graph = build_kernel_graph(&model).unwrap();
        let m = derive_mapping(&p, &pl, &model, &net).unwrap();
        let traffic = synthesize_traffic(&graph, &p, &pl, &m).unwrap();
        assert!(traffic.flows.is_empty());
    }

    #[test]
    fn utilization_matches_brute_force_tally() {
        let model = zoo_model("bert-tiny", 32).unwrap();
        let (p, pl, net, m, graph) = setup(8, &model);
        let traffic = synthesize_traffic(&graph, &p, &pl, &m).unwrap();
        let window = 1.0;
        let u = link_utilizations(&traffic, &p, &pl, &net, window).unwrap();

        // Independent tally: walk every flow's route again by hand.
        let mut tally: BTreeMap<(SlotId, SlotId), u64> = BTreeMap::new();
        for f in &traffic.flows {
            let (s, d) = super::resolve_flow_slots(&net, f).unwrap();
            if let (Some(s), Some(d)) = (s, d) {
                for hop in net.route(s, d).unwrap() {
                    *tally.entry(hop).or_insert(0) += f.bytes;
                }
            }
        }
        for (k, v) in &u.u {
            let expect = *tally.get(k).unwrap_or(&0) as f64 / (p.link_capacity_bytes_per_s * window);
            assert!((v - expect).abs() < 1e-15, "{k:?}");
        }
        // Flow-path conservation: each flow contributes path_len * bytes.
        let total_link_bytes: u64 = tally.values().sum();
        let recomputed: u64 = traffic
            .flows
            .iter()
            .map(|f| {
                let (s, d) = super::resolve_flow_slots(&net, f).unwrap();
                match (s, d) {
                    (Some(s), Some(d)) => net.route(s, d).unwrap().len() as u64 * f.bytes,
                    _ => 0,
                }
            })
            .sum();
        assert_eq!(total_link_bytes, recomputed);
    }

    #[test]
    fn mqa_reduces_weight_load_traffic() {
        let mha = zoo_model("bert-large", 512).unwrap();
        let mut mqa = mha.clone();
        mqa.attention_kind = AttentionKind::Mqa;
        let (p, pl, net, mm, g_mha) = setup(10, &mha);
        let g_mqa = build_kernel_graph(&mqa).unwrap();
        let m_mqa = derive_mapping(&p, &pl, &mqa, &net).unwrap();
        let t_mha = synthesize_traffic(&g_mha, &p, &pl, &mm).unwrap();
        let t_mqa = synthesize_traffic(&g_mqa, &p, &pl, &m_mqa).unwrap();
        assert!(t_mqa.phase_bytes(Phase::WeightLoad) < t_mha.phase_bytes(Phase::WeightLoad));
        // With n <= 2*d_model the weight-load savings dominate the shared
        // K/V fan-out and total traffic shrinks too.
        assert!(t_mqa.total_bytes() <= t_mha.total_bytes());
    }

    #[test]
    fn removing_unused_link_recomputation() {
        let model = zoo_model("bert-tiny", 32).unwrap();
        let (p, pl, net, m, graph) = setup(12, &model);
        let traffic = synthesize_traffic(&graph, &p, &pl, &m).unwrap();
        let u = link_utilizations(&traffic, &p, &pl, &net, 1.0).unwrap();
        let values = u.values();
        let (mu, _sigma) = utilization_stats(&values).unwrap();
        let zero_links = values.iter().filter(|v| **v == 0.0).count();
        if zero_links > 0 {
            // Dropping a zero-utilization link keeps the byte sum intact;
            // the mean over the remaining links is sum/(L-1).
            let sum: f64 = values.iter().sum();
            let l = values.len() as f64;
            let mu_after = sum / (l - 1.0);
            assert!((mu * l - sum).abs() < 1e-12);
            assert!(mu_after >= mu);
        }
    }

    #[test]
    fn radix_histogram_partitions_routers() {
        let p = default_platform();
        let pl = random_placement(&p, 13).unwrap();
        let hist = router_radix_histogram(&p, &pl);
        let total: u32 = hist.values().sum();
        assert_eq!(total as usize, pl.slot_map.len());
    }

    #[test]
    fn full_mesh_histogram_matches_reference_plus_dram_ports() {
        use crate::platform::{mesh_reference, vertical_universe};
        let mut p = default_platform();
        p.search.vertical_links = crate::platform::VerticalPolicy::FixedAll;
        let mut pl = random_placement(&p, 1).unwrap();
        for v in vertical_universe(&p, &pl.tier_order) {
            pl.links.insert(v);
        }
        // Planar mesh everywhere except the ReRAM chain tier, which keeps
        // its fixed wiring; compare against the reference on the SM tiers.
        let hist = router_radix_histogram(&p, &pl);
        let mesh = mesh_reference(&p);
        // Sanity: no placement router exceeds the mesh port budget + DRAM.
        assert!(hist.keys().max().unwrap() <= &(mesh.max_ports + 1));
    }

    #[test]
    fn isolated_pair_radix() {
        // Two routers joined by one link have radix 2 each (link + local).
        let mut adj: BTreeMap<SlotId, Vec<SlotId>> = BTreeMap::new();
        let a = SlotId { tier: 0, x: 0, y: 0 };
        let b = SlotId { tier: 0, x: 0, y: 1 };
        adj.insert(a, vec![b]);
        adj.insert(b, vec![a]);
        for (_, n) in adj {
            assert_eq!(n.len() + 1, 2);
        }
    }

    #[test]
    fn toy_single_core_flow_classes() {
        use crate::platform::{CoreKind, InventoryEntry, TierSpec, ThermalParams};
        // 1 SM + 1 MC on one tier, 1 ReRAM below: the flow set collapses to
        // DRAM->MC, MC->SM, SM->ReRAM, ReRAM->MC.
        let mut p = default_platform();
        p.tiers = vec![
            TierSpec { grid_x: 1, grid_y: 2, allowed_kinds: vec![CoreKind::Sm, CoreKind::Mc] },
            TierSpec { grid_x: 1, grid_y: 1, allowed_kinds: vec![CoreKind::Reram] },
        ];
        let reram_spec = p.core_specs[2].clone();
        p.core_specs = vec![p.core_specs[0].clone(), p.core_specs[1].clone(), reram_spec];
        p.inventory = vec![
            InventoryEntry { spec: 0, count: 1 },
            InventoryEntry { spec: 1, count: 1 },
            InventoryEntry { spec: 2, count: 1 },
        ];
        p.thermal = ThermalParams {
            r_layer_k_per_w: vec![0.5, 0.5],
            r_base_k_per_w: 0.1,
            ambient_celsius: 45.0,
        };
        p.validate().unwrap();
        let model = ModelConfig::new("toy", 1, 4, 1, 4, Some(8), 2);
        let pl = random_placement(&p, 0).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let graph = build_kernel_graph(&model).unwrap();
        let m = derive_mapping(&p, &pl, &model, &net).unwrap();
        let traffic = synthesize_traffic(&graph, &p, &pl, &m).unwrap();

        let cores = p.cores();
        let kind = |e: &Endpoint| match e {
            Endpoint::Dram => "dram",
            Endpoint::Core(c) => match cores[c.0].kind {
                CoreKind::Sm => "sm",
                CoreKind::Mc => "mc",
                CoreKind::Reram => "reram",
            },
        };
        let mut classes: Vec<(String, String)> = traffic
            .flows
            .iter()
            .map(|f| (kind(&f.src).to_string(), kind(&f.dst).to_string()))
            .collect();
        classes.sort();
        classes.dedup();
        // The mc->reram leg carries the FF weight programming across the
        // vertical links.
        assert_eq!(
            classes,
            vec![
                ("dram".to_string(), "mc".to_string()),
                ("mc".to_string(), "reram".to_string()),
                ("mc".to_string(), "sm".to_string()),
                ("reram".to_string(), "mc".to_string()),
                ("sm".to_string(), "reram".to_string()),
            ]
        );
        // Byte budgets: FF entry and exit match the graph.
        let bv = model.bytes_per_value();
        let nd = model.seq_len * model.d_model * bv;
        let sm_to_reram: u64 = traffic
            .flows
            .iter()
            .filter(|f| kind(&f.src) == "sm" && kind(&f.dst) == "reram")
            .map(|f| f.bytes)
            .sum();
        assert_eq!(sm_to_reram, nd);
    }
}
