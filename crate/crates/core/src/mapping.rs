//! Kernel-to-core mapping policy: attention heads round-robin over SMs,
//! each SM and ReRAM core served by its nearest MC, concatenation owned by
//! the first head-free SM, and FF weights sharded over the fixed ReRAM
//! pipeline.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::noc::RouterNet;
use crate::platform::{CoreId, CoreKind, Placement, Platform, SlotId};
use crate::workload::{AttentionKind, ModelConfig};

#[derive(Debug, Clone)]
pub struct Mapping {
    /// head i -> SM core, round-robin over slot-sorted SMs.
    pub head_sm: Vec<CoreId>,
    /// Runs concat, the output projection, and the layer norms.
    pub owner_sm: CoreId,
    /// Shared K/V producers under MQA (also set, but unused, for MHA).
    pub mqa_k_sm: CoreId,
    pub mqa_v_sm: CoreId,
    /// SM or ReRAM core -> nearest MC by hop count (ties by slot order).
    pub serving_mc: BTreeMap<CoreId, CoreId>,
    pub owner_mc: CoreId,
    /// ReRAM cores in the fixed serpentine pipeline order.
    pub reram_pipeline: Vec<CoreId>,
    /// Pipeline prefix holding the first FF weight matrix; the remainder
    /// holds the second. A single-core pipeline hosts both.
    pub ff1_cores: Vec<CoreId>,
    pub ff2_cores: Vec<CoreId>,
}

impl Mapping {
    pub fn sm_cores(&self) -> Vec<CoreId> {
        let mut v = self.head_sm.clone();
        v.push(self.owner_sm);
        v.sort();
        v.dedup();
        v
    }

    /// Distinct SMs that produce Q/K/V for a block's attention group.
    pub fn projection_sms(&self, attention: AttentionKind) -> Vec<CoreId> {
        let mut v = self.head_sm.clone();
        if attention == AttentionKind::Mqa {
            v.push(self.mqa_k_sm);
            v.push(self.mqa_v_sm);
        }
        v.sort();
        v.dedup();
        v
    }
}

/// Derives the mapping for a placement. Deterministic, and stable under
/// relabeling of same-spec cores because every choice is made in slot order.
pub fn derive_mapping(
    platform: &Platform,
    placement: &Placement,
    model: &ModelConfig,
    net: &RouterNet,
) -> Result<Mapping> {
    let cores = platform.cores();
    let slot_sorted = |kind: CoreKind| -> Vec<(SlotId, CoreId)> {
        placement
            .slot_map
            .iter()
            .filter(|(_, c)| cores[c.0].kind == kind)
            .map(|(s, c)| (*s, *c))
            .collect()
    };
    let sms = slot_sorted(CoreKind::Sm);
    let mcs = slot_sorted(CoreKind::Mc);
    if sms.is_empty() {
        return Err(Error::InvalidPlatform("mapping requires at least one SM".into()));
    }
    if mcs.is_empty() {
        return Err(Error::InvalidPlatform("mapping requires at least one MC".into()));
    }

    let h = model.num_heads as usize;
    let head_sm: Vec<CoreId> = (0..h).map(|i| sms[i % sms.len()].1).collect();
    // Concat/projection owner: first SM with no head, else the first SM.
    let owner_sm = sms
        .iter()
        .map(|(_, c)| *c)
        .find(|c| !head_sm.contains(c))
        .unwrap_or(sms[0].1);
    let mqa_k_sm = head_sm[0];
    let mqa_v_sm = head_sm[1 % head_sm.len()];

    let nearest_mc = |core: CoreId| -> CoreId {
        let slot = placement.slot_of(core).expect("placed core");
        mcs.iter()
            .map(|(s, c)| (net.distance(slot, *s).unwrap_or(u32::MAX), *s, *c))
            .min()
            .map(|(_, _, c)| c)
            .expect("at least one MC")
    };

    let mut serving_mc = BTreeMap::new();
    for (_, c) in &sms {
        serving_mc.insert(*c, nearest_mc(*c));
    }

    let mut reram_pipeline = Vec::new();
    for t in 0..platform.tiers.len() {
        let on_tier: BTreeMap<SlotId, CoreId> = placement
            .slot_map
            .iter()
            .filter(|(s, c)| s.tier == t && cores[c.0].kind == CoreKind::Reram)
            .map(|(s, c)| (*s, *c))
            .collect();
        if on_tier.is_empty() {
            continue;
        }
        for slot in platform.serpentine_slots(t) {
            if let Some(c) = on_tier.get(&slot) {
                reram_pipeline.push(*c);
            }
        }
    }
    for c in &reram_pipeline {
        serving_mc.insert(*c, nearest_mc(*c));
    }

    let split = reram_pipeline.len().div_ceil(2).max(1);
    let (ff1_cores, ff2_cores) = if reram_pipeline.len() <= 1 {
        (reram_pipeline.clone(), reram_pipeline.clone())
    } else {
        (
            reram_pipeline[..split].to_vec(),
            reram_pipeline[split..].to_vec(),
        )
    };

    let owner_mc = serving_mc[&owner_sm];
    Ok(Mapping {
        head_sm,
        owner_sm,
        mqa_k_sm,
        mqa_v_sm,
        serving_mc,
        owner_mc,
        reram_pipeline,
        ff1_cores,
        ff2_cores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noc::RouterNet;
    use crate::platform::{default_platform, random_placement};
    use crate::workload::zoo_model;

    #[test]
    fn owner_is_head_free_when_sms_outnumber_heads() {
        let p = default_platform();
        let pl = random_placement(&p, 1).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let model = zoo_model("bert-large", 128).unwrap(); // 16 heads, 21 SMs
        let m = derive_mapping(&p, &pl, &model, &net).unwrap();
        assert_eq!(m.head_sm.len(), 16);
        assert!(!m.head_sm.contains(&m.owner_sm));
        assert_eq!(m.reram_pipeline.len(), 16);
        assert_eq!(m.ff1_cores.len(), 8);
        assert_eq!(m.ff2_cores.len(), 8);
    }

    #[test]
    fn mapping_is_slot_stable_under_core_relabeling() {
        let p = default_platform();
        let pl = random_placement(&p, 9).unwrap();
        let net = RouterNet::build(&p, &pl).unwrap();
        let model = zoo_model("bert-base", 64).unwrap();
        let m1 = derive_mapping(&p, &pl, &model, &net).unwrap();

        // Swap the ordinals of two SM cores in the slot map; the mapping by
        // slot must target the same slots.
        let mut relabeled = pl.clone();
        let cores = p.cores();
        let sm_slots: Vec<_> = relabeled
            .slot_map
            .iter()
            .filter(|(_, c)| cores[c.0].kind == CoreKind::Sm)
            .map(|(s, _)| *s)
            .take(2)
            .collect();
        let (s0, s1) = (sm_slots[0], sm_slots[1]);
        let (c0, c1) = (relabeled.slot_map[&s0], relabeled.slot_map[&s1]);
        relabeled.slot_map.insert(s0, c1);
        relabeled.slot_map.insert(s1, c0);
        let m2 = derive_mapping(&p, &relabeled, &model, &net).unwrap();

        let slot_of = |pl: &crate::platform::Placement, c: CoreId| pl.slot_of(c).unwrap();
        let heads1: Vec<_> = m1.head_sm.iter().map(|c| slot_of(&pl, *c)).collect();
        let heads2: Vec<_> = m2.head_sm.iter().map(|c| slot_of(&relabeled, *c)).collect();
        assert_eq!(heads1, heads2);
        assert_eq!(slot_of(&pl, m1.owner_sm), slot_of(&relabeled, m2.owner_sm));
    }
}
