//! Neighborhood moves over placements. Every emitted move, applied to a
//! valid placement, yields a valid placement. Structural moves (swaps,
//! link add/remove) are checked with O(1) degree/budget rules plus one
//! bridge computation; only tier-order swaps need a full revalidation.

use std::collections::{BTreeMap, BTreeSet};

use super::placement::{fixed_links, validate_placement, vertical_universe, Link, Placement, SlotId};
use super::{mesh_reference, Platform, PlanarPolicy, TierOrderPolicy, VerticalPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Move {
    /// Swap the cores of two same-tier slots (different specs only).
    SwapCores { a: SlotId, b: SlotId },
    /// Swap two vertical levels in the tier order.
    SwapTiers { level_a: usize, level_b: usize },
    AddLink(Link),
    RemoveLink(Link),
}

/// Applies a move, returning the new placement. The move is assumed to come
/// from `neighbor_moves` on this placement.
pub fn apply_move(placement: &Placement, mv: &Move) -> Placement {
    let mut next = placement.clone();
    match mv {
        Move::SwapCores { a, b } => {
            let ca = next.slot_map[a];
            let cb = next.slot_map[b];
            next.slot_map.insert(*a, cb);
            next.slot_map.insert(*b, ca);
        }
        Move::SwapTiers { level_a, level_b } => {
            next.tier_order.swap(*level_a, *level_b);
        }
        Move::AddLink(l) => {
            next.links.insert(*l);
        }
        Move::RemoveLink(l) => {
            next.links.remove(l);
        }
    }
    next
}

/// Bridge edges of the router graph (removal disconnects it), as canonical
/// slot pairs. Iterative lowlink computation.
pub fn bridges(adj: &BTreeMap<SlotId, Vec<SlotId>>) -> BTreeSet<(SlotId, SlotId)> {
    let nodes: Vec<SlotId> = adj.keys().copied().collect();
    let index_of: BTreeMap<SlotId, usize> = nodes.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let n = nodes.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut out = BTreeSet::new();
    let mut timer = 0usize;

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Stack entries: (node, parent, neighbor cursor).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some((v, parent, cursor)) = stack.pop() {
            let neighbors = &adj[&nodes[v]];
            if cursor < neighbors.len() {
                stack.push((v, parent, cursor + 1));
                let w = index_of[&neighbors[cursor]];
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else if w != parent {
                    low[v] = low[v].min(disc[w]);
                }
            } else if parent != usize::MAX {
                low[parent] = low[parent].min(low[v]);
                if low[v] > disc[parent] {
                    let (a, b) = (nodes[parent], nodes[v]);
                    out.insert(if a <= b { (a, b) } else { (b, a) });
                }
            }
        }
    }
    out
}

/// Enumerates all valid single-step moves, in deterministic order:
/// same-tier core swaps, tier-order swaps, planar link additions within the
/// mesh budget, removals of redundant links, and vertical bundle toggles.
pub fn neighbor_moves(platform: &Platform, placement: &Placement) -> Vec<Move> {
    let mut out = Vec::new();
    let mesh = mesh_reference(platform);
    let fixed = fixed_links(platform);
    let adj = placement.adjacency(platform);
    let degree: BTreeMap<SlotId, usize> = adj.iter().map(|(s, n)| (*s, n.len())).collect();
    let bridge_set = bridges(&adj);
    let budget_headroom = placement.links.len() < mesh.link_count;

    // Core swaps within a tier. Same tier means both kinds stay admissible,
    // and links are untouched, so these are always valid.
    for t in 0..platform.tiers.len() {
        let slots = platform.tier_slots(t);
        for i in 0..slots.len() {
            for j in (i + 1)..slots.len() {
                let (a, b) = (slots[i], slots[j]);
                let (ca, cb) = (placement.slot_map[&a], placement.slot_map[&b]);
                if platform.spec_idx_of(ca) != platform.spec_idx_of(cb) {
                    out.push(Move::SwapCores { a, b });
                }
            }
        }
    }

    // Tier-order swaps change vertical link endpoints; keep only those that
    // fully revalidate.
    if platform.search.tier_order == TierOrderPolicy::Free {
        for i in 0..placement.tier_order.len() {
            for j in (i + 1)..placement.tier_order.len() {
                let mv = Move::SwapTiers { level_a: i, level_b: j };
                if validate_placement(platform, &apply_move(placement, &mv)).is_empty() {
                    out.push(mv);
                }
            }
        }
    }

    // Planar additions: any unlinked same-tier pair on free tiers, port
    // budget respected on both endpoints. Adding cannot disconnect.
    if platform.search.planar_links == PlanarPolicy::Free && budget_headroom {
        for t in 0..platform.tiers.len() {
            if platform.is_reram_only_tier(t) {
                continue;
            }
            let slots = platform.tier_slots(t);
            for i in 0..slots.len() {
                for j in (i + 1)..slots.len() {
                    let (a, b) = (slots[i], slots[j]);
                    let l = Link::planar(a, b);
                    if !placement.links.contains(&l) && degree[&a] < 6 && degree[&b] < 6 {
                        out.push(Move::AddLink(l));
                    }
                }
            }
        }
    }

    // Removals of non-fixed, searchable, non-bridge links.
    for link in &placement.links {
        if fixed.contains(link) {
            continue;
        }
        let searchable = match link {
            Link::Planar { .. } => platform.search.planar_links == PlanarPolicy::Free,
            Link::Vertical { .. } => platform.search.vertical_links == VerticalPolicy::Free,
        };
        if !searchable {
            continue;
        }
        if let Some((a, b)) = placement.endpoints(platform, link) {
            let key = if a <= b { (a, b) } else { (b, a) };
            if !bridge_set.contains(&key) {
                out.push(Move::RemoveLink(*link));
            }
        }
    }

    // Vertical bundle additions.
    if platform.search.vertical_links == VerticalPolicy::Free && budget_headroom {
        for v in vertical_universe(platform, &placement.tier_order) {
            if placement.links.contains(&v) {
                continue;
            }
            if let Some((a, b)) = placement.endpoints(platform, &v) {
                if degree[&a] < 6 && degree[&b] < 6 {
                    out.push(Move::AddLink(v));
                }
            }
        }
    }

    out.sort();
    out.dedup();
    out
}

/// Links whose removal is a legal move: non-fixed, searchable, and not a
/// connectivity bridge.
pub fn removable_links(platform: &Platform, placement: &Placement) -> BTreeSet<Link> {
    neighbor_moves(platform, placement)
        .into_iter()
        .filter_map(|m| match m {
            Move::RemoveLink(l) => Some(l),
            _ => None,
        })
        .collect()
}
