//! Exhaustive placement enumeration for oracle comparisons on tiny
//! platforms. Same-spec cores are interchangeable, so one representative
//! per distinct (tier order, slot->spec assignment, link subset) is
//! produced; a size guard refuses spaces past `ENUMERATION_LIMIT`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::platform::{
    fixed_links, validate_placement, vertical_universe, CoreId, Link, Placement, Platform,
    PlanarPolicy, SlotId, TierOrderPolicy, VerticalPolicy,
};

pub const ENUMERATION_LIMIT: u128 = 100_000;

/// Distinct permutations of a multiset of spec indices.
fn multiset_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in items {
        *counts.entry(x).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(items.len());
    fn rec(
        counts: &mut BTreeMap<usize, usize>,
        prefix: &mut Vec<usize>,
        len: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        let keys: Vec<usize> = counts.keys().copied().collect();
        for k in keys {
            if counts[&k] == 0 {
                continue;
            }
            *counts.get_mut(&k).unwrap() -= 1;
            prefix.push(k);
            rec(counts, prefix, len, out);
            prefix.pop();
            *counts.get_mut(&k).unwrap() += 1;
        }
    }
    rec(&mut counts, &mut prefix, items.len(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    heap(n, &mut items, &mut out);
    out.sort();
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product::<u128>().max(1)
}

/// Per-tier assignments: which spec sits on each slot, honoring allowed
/// kinds, with the global inventory split across tiers. Returns the list of
/// slot->spec maps for the whole chip.
fn tier_assignments(platform: &Platform) -> Result<Vec<BTreeMap<SlotId, usize>>> {
    // Partition the inventory by tier by kind feasibility. This enumerator
    // supports the common case where each spec is admissible on exactly one
    // set of identical tiers; it splits each spec's count evenly when the
    // hosting tiers are interchangeable, which covers homogeneous SM/MC
    // tier stacks. Uneven splits are not enumerated.
    let mut per_tier_specs: Vec<Vec<usize>> = vec![Vec::new(); platform.tiers.len()];
    for (spec_idx, spec) in platform.core_specs.iter().enumerate() {
        let count: usize = platform
            .inventory
            .iter()
            .filter(|e| e.spec == spec_idx)
            .map(|e| e.count as usize)
            .sum();
        if count == 0 {
            continue;
        }
        let hosts: Vec<usize> = (0..platform.tiers.len())
            .filter(|t| platform.tiers[*t].allowed_kinds.contains(&spec.kind))
            .collect();
        if hosts.is_empty() {
            return Err(Error::InvalidPlatform(format!("no tier admits spec {spec_idx}")));
        }
        if count % hosts.len() != 0 {
            return Err(Error::InvalidPlatform(format!(
                "enumeration needs spec {spec_idx} to split evenly over {} tiers",
                hosts.len()
            )));
        }
        let share = count / hosts.len();
        for t in hosts {
            for _ in 0..share {
                per_tier_specs[t].push(spec_idx);
            }
        }
    }

    let mut per_tier_choices: Vec<Vec<Vec<usize>>> = Vec::new();
    for (t, specs) in per_tier_specs.iter().enumerate() {
        if specs.len() != platform.tiers[t].slot_count() as usize {
            return Err(Error::InvalidPlatform(format!(
                "tier {t}: {} cores for {} slots under the even-split rule",
                specs.len(),
                platform.tiers[t].slot_count()
            )));
        }
        per_tier_choices.push(multiset_permutations(specs));
    }

    // Cartesian product across tiers.
    let mut out: Vec<BTreeMap<SlotId, usize>> = vec![BTreeMap::new()];
    for (t, choices) in per_tier_choices.iter().enumerate() {
        let slots = platform.tier_slots(t);
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for base in &out {
            for choice in choices {
                let mut m = base.clone();
                for (slot, spec) in slots.iter().zip(choice) {
                    m.insert(*slot, *spec);
                }
                next.push(m);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Converts a slot->spec assignment into a placement slot map by handing
/// out ordinals in slot order.
fn materialize(platform: &Platform, assignment: &BTreeMap<SlotId, usize>) -> BTreeMap<SlotId, CoreId> {
    let cores = platform.cores();
    let mut pools: BTreeMap<usize, Vec<CoreId>> = BTreeMap::new();
    for c in cores.iter().rev() {
        pools.entry(c.spec_idx).or_default().push(c.id);
    }
    assignment
        .iter()
        .map(|(slot, spec)| (*slot, pools.get_mut(spec).unwrap().pop().unwrap()))
        .collect()
}

/// Size estimate used by the guard, ignoring validity filtering.
pub fn space_estimate(platform: &Platform) -> u128 {
    let orders: u128 = match platform.search.tier_order {
        TierOrderPolicy::Fixed => 1,
        TierOrderPolicy::Free => factorial(platform.tiers.len()),
    };
    let mut assignments: u128 = 1;
    for t in 0..platform.tiers.len() {
        let n = platform.tiers[t].slot_count() as usize;
        // Upper bound: full permutations (multiset dedup only shrinks it).
        assignments = assignments.saturating_mul(factorial(n));
    }
    let planar_bits: u32 = match platform.search.planar_links {
        PlanarPolicy::FixedMesh => 0,
        PlanarPolicy::Free => (0..platform.tiers.len())
            .filter(|t| !platform.is_reram_only_tier(*t))
            .map(|t| {
                let n = platform.tiers[t].slot_count();
                n * (n - 1) / 2
            })
            .sum(),
    };
    let vertical_bits: u32 = match platform.search.vertical_links {
        VerticalPolicy::FixedAll => 0,
        VerticalPolicy::Free => {
            let order: Vec<usize> = (0..platform.tiers.len()).collect();
            vertical_universe(platform, &order).len() as u32
        }
    };
    let link_combos = 1u128
        .checked_shl(planar_bits + vertical_bits)
        .unwrap_or(u128::MAX);
    orders.saturating_mul(assignments).saturating_mul(link_combos)
}

/// Enumerates every valid placement in the platform's declared search
/// space. Fails with a count estimate when the space exceeds the guard.
pub fn enumerate_placements(platform: &Platform) -> Result<Vec<Placement>> {
    let estimate = space_estimate(platform);
    if estimate > ENUMERATION_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            estimate,
            limit: ENUMERATION_LIMIT,
        });
    }

    let orders = match platform.search.tier_order {
        TierOrderPolicy::Fixed => vec![(0..platform.tiers.len()).collect::<Vec<usize>>()],
        TierOrderPolicy::Free => permutations(platform.tiers.len()),
    };
    let assignments = tier_assignments(platform)?;

    let mut out = Vec::new();
    for order in &orders {
        // Optional links under this order.
        let fixed = fixed_links(platform);
        let mut optional: Vec<Link> = Vec::new();
        if platform.search.planar_links == PlanarPolicy::Free {
            for t in 0..platform.tiers.len() {
                if platform.is_reram_only_tier(t) {
                    continue;
                }
                let slots = platform.tier_slots(t);
                for i in 0..slots.len() {
                    for j in (i + 1)..slots.len() {
                        optional.push(Link::planar(slots[i], slots[j]));
                    }
                }
            }
        }
        let verticals = vertical_universe(platform, order);
        match platform.search.vertical_links {
            VerticalPolicy::FixedAll => {}
            VerticalPolicy::Free => optional.extend(verticals.iter().copied()),
        }
        let mut base_links = fixed.clone();
        if platform.search.planar_links == PlanarPolicy::FixedMesh {
            // fixed_links already covers the mesh in this mode.
        }
        if platform.search.vertical_links == VerticalPolicy::FixedAll {
            base_links.extend(verticals.iter().copied());
        }

        for assignment in &assignments {
            let slot_map = materialize(platform, assignment);
            for mask in 0u64..(1u64 << optional.len()) {
                let mut links = base_links.clone();
                for (bit, link) in optional.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        links.insert(*link);
                    }
                }
                let candidate = Placement {
                    tier_order: order.clone(),
                    slot_map: slot_map.clone(),
                    links,
                };
                if validate_placement(platform, &candidate).is_empty() {
                    out.push(candidate);
                }
            }
        }
    }
    // One representative per canonical digest.
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|p| seen.insert(p.digest(platform)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_permutations_counts() {
        assert_eq!(multiset_permutations(&[0, 0, 1]).len(), 3);
        assert_eq!(multiset_permutations(&[0, 1, 2]).len(), 6);
        assert_eq!(multiset_permutations(&[0, 0, 1, 1]).len(), 6);
    }

    #[test]
    fn permutation_generator_is_complete() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let p4 = permutations(4);
        assert_eq!(p4.len(), 24);
    }

    #[test]
    fn guard_refuses_the_default_platform() {
        let p = crate::platform::default_platform();
        match enumerate_placements(&p) {
            Err(Error::SearchSpaceTooLarge { estimate, .. }) => assert!(estimate > ENUMERATION_LIMIT),
            other => panic!("expected guard refusal, got {:?}", other.map(|v| v.len())),
        }
    }
}
