//! Placement genome: tier order, core-to-slot map, and link set, with the
//! validity rules (mesh budget, port budget, connectivity) every candidate
//! design must satisfy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{mesh_reference, CoreId, CoreKind, Platform, PlanarPolicy, TierOrderPolicy, VerticalPolicy};
use crate::error::{Error, Result};
use crate::util::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotId {
    pub tier: usize,
    pub x: u32,
    pub y: u32,
}

impl std::fmt::Display for SlotId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t{}x{}y{}", self.tier, self.x, self.y)
    }
}

/// A link in the genome. Planar links name two slots of one tier; vertical
/// links are identified by (interface level, alignment column) so that tier
/// reordering keeps the bundle structure intact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Link {
    Planar { tier: usize, ax: u32, ay: u32, bx: u32, by: u32 },
    /// Bundle between vertical levels `interface` and `interface + 1` at
    /// alignment column (cx, cy).
    Vertical { interface: usize, cx: u32, cy: u32 },
}

impl Link {
    pub fn planar(a: SlotId, b: SlotId) -> Link {
        assert_eq!(a.tier, b.tier);
        let (p, q) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
        Link::Planar {
            tier: p.tier,
            ax: p.x,
            ay: p.y,
            bx: q.x,
            by: q.y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlacementRepr", into = "PlacementRepr")]
pub struct Placement {
    /// tier_order[level] = tier index; level 0 is nearest the heat sink.
    pub tier_order: Vec<usize>,
    pub slot_map: BTreeMap<SlotId, CoreId>,
    pub links: BTreeSet<Link>,
}

/// JSON shape: the slot map flattens to a sorted entry list because JSON
/// object keys must be strings.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRepr {
    tier_order: Vec<usize>,
    slots: Vec<SlotEntry>,
    links: Vec<Link>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotEntry {
    tier: usize,
    x: u32,
    y: u32,
    core: usize,
}

impl From<Placement> for PlacementRepr {
    fn from(p: Placement) -> Self {
        PlacementRepr {
            tier_order: p.tier_order,
            slots: p
                .slot_map
                .into_iter()
                .map(|(s, c)| SlotEntry {
                    tier: s.tier,
                    x: s.x,
                    y: s.y,
                    core: c.0,
                })
                .collect(),
            links: p.links.into_iter().collect(),
        }
    }
}

impl TryFrom<PlacementRepr> for Placement {
    type Error = String;

    fn try_from(r: PlacementRepr) -> std::result::Result<Self, String> {
        let mut slot_map = BTreeMap::new();
        for e in r.slots {
            let slot = SlotId {
                tier: e.tier,
                x: e.x,
                y: e.y,
            };
            if slot_map.insert(slot, CoreId(e.core)).is_some() {
                return Err(format!("duplicate slot entry {slot}"));
            }
        }
        Ok(Placement {
            tier_order: r.tier_order,
            slot_map,
            links: r.links.into_iter().collect(),
        })
    }
}

impl Placement {
    pub fn level_of(&self, tier: usize) -> usize {
        self.tier_order.iter().position(|t| *t == tier).expect("tier in order")
    }

    pub fn slot_of(&self, core: CoreId) -> Option<SlotId> {
        self.slot_map.iter().find(|(_, c)| **c == core).map(|(s, _)| *s)
    }

    /// Vertical level (0 = nearest sink) of the first tier hosting a ReRAM
    /// core, if any.
    pub fn reram_level(&self, platform: &Platform) -> Option<usize> {
        let cores = platform.cores();
        self.slot_map
            .iter()
            .filter(|(_, c)| cores[c.0].kind == CoreKind::Reram)
            .map(|(s, _)| self.level_of(s.tier))
            .min()
    }

    /// Both endpoints of a link as slots; vertical bundles resolve against
    /// the current tier order. Returns None for a vertical bundle whose
    /// column is missing from either adjacent tier.
    pub fn endpoints(&self, platform: &Platform, link: &Link) -> Option<(SlotId, SlotId)> {
        match *link {
            Link::Planar { tier, ax, ay, bx, by } => Some((
                SlotId { tier, x: ax, y: ay },
                SlotId { tier, x: bx, y: by },
            )),
            Link::Vertical { interface, cx, cy } => {
                if interface + 1 >= self.tier_order.len() {
                    return None;
                }
                let ta = self.tier_order[interface];
                let tb = self.tier_order[interface + 1];
                let a = slot_at_column(platform, ta, (cx, cy))?;
                let b = slot_at_column(platform, tb, (cx, cy))?;
                Some((a, b))
            }
        }
    }

    /// Adjacency over occupied slots under the current tier order.
    pub fn adjacency(&self, platform: &Platform) -> BTreeMap<SlotId, Vec<SlotId>> {
        let mut adj: BTreeMap<SlotId, Vec<SlotId>> = BTreeMap::new();
        for slot in self.slot_map.keys() {
            adj.insert(*slot, Vec::new());
        }
        for link in &self.links {
            if let Some((a, b)) = self.endpoints(platform, link) {
                adj.get_mut(&a).map(|v| v.push(b));
                adj.get_mut(&b).map(|v| v.push(a));
            }
        }
        for v in adj.values_mut() {
            v.sort();
            v.dedup();
        }
        adj
    }

    /// Stable digest treating same-spec cores as interchangeable.
    pub fn digest(&self, platform: &Platform) -> u64 {
        let cores = platform.cores();
        let mut canon = String::new();
        canon.push_str(&format!("order={:?};", self.tier_order));
        for (slot, core) in &self.slot_map {
            canon.push_str(&format!("{}={};", slot, cores[core.0].spec_idx));
        }
        for link in &self.links {
            canon.push_str(&format!("{link:?};"));
        }
        fnv1a64(canon.as_bytes())
    }
}

fn slot_at_column(platform: &Platform, tier: usize, cell: (u32, u32)) -> Option<SlotId> {
    platform
        .tier_slots(tier)
        .into_iter()
        .find(|s| platform.column_of(tier, s.x, s.y) == cell)
}

/// Links that are pinned for a platform: the serpentine pipeline chain on
/// ReRAM-only tiers, plus the full planar mesh when planar links are not
/// search variables.
pub fn fixed_links(platform: &Platform) -> BTreeSet<Link> {
    let mut fixed = BTreeSet::new();
    for t in 0..platform.tiers.len() {
        if platform.is_reram_only_tier(t) {
            let chain = platform.serpentine_slots(t);
            for w in chain.windows(2) {
                fixed.insert(Link::planar(w[0], w[1]));
            }
        } else if platform.search.planar_links == PlanarPolicy::FixedMesh {
            for (a, b) in platform.mesh_edges(t) {
                fixed.insert(Link::planar(a, b));
            }
        }
    }
    fixed
}

/// All vertical bundles that can exist: one per common alignment column per
/// interface.
pub fn vertical_universe(platform: &Platform, tier_order: &[usize]) -> Vec<Link> {
    let mut out = Vec::new();
    for k in 0..tier_order.len().saturating_sub(1) {
        let ta = tier_order[k];
        let tb = tier_order[k + 1];
        for (a, _) in platform.aligned_pairs(ta, tb) {
            let cell = platform.column_of(a.tier, a.x, a.y);
            out.push(Link::Vertical {
                interface: k,
                cx: cell.0,
                cy: cell.1,
            });
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    TierOrder,
    SlotMap,
    KindNotAllowed,
    BadLink,
    FixedLinkMissing,
    MeshBudget,
    PortBudget,
    Connectivity,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Checks every placement invariant and returns the full violation list
/// (empty means valid).
pub fn validate_placement(platform: &Platform, placement: &Placement) -> Vec<Violation> {
    let mut out = Vec::new();
    let t_count = platform.tiers.len();

    let mut sorted = placement.tier_order.clone();
    sorted.sort_unstable();
    if sorted != (0..t_count).collect::<Vec<_>>() {
        out.push(Violation {
            kind: ViolationKind::TierOrder,
            detail: format!("tier_order {:?} is not a permutation of 0..{t_count}", placement.tier_order),
        });
        return out; // everything downstream needs a sane order
    }

    // Slot coverage: bijection onto all slots, kinds allowed per tier.
    let cores = platform.cores();
    let mut seen_cores = BTreeSet::new();
    for (slot, core) in &placement.slot_map {
        if slot.tier >= t_count
            || slot.x >= platform.tiers[slot.tier].grid_x
            || slot.y >= platform.tiers[slot.tier].grid_y
        {
            out.push(Violation {
                kind: ViolationKind::SlotMap,
                detail: format!("slot {slot} outside grid"),
            });
            continue;
        }
        let Some(c) = cores.get(core.0) else {
            out.push(Violation {
                kind: ViolationKind::SlotMap,
                detail: format!("slot {slot} references unknown core {}", core.0),
            });
            continue;
        };
        if !seen_cores.insert(*core) {
            out.push(Violation {
                kind: ViolationKind::SlotMap,
                detail: format!("core {} placed twice", core.0),
            });
        }
        if !platform.tiers[slot.tier].allowed_kinds.contains(&c.kind) {
            out.push(Violation {
                kind: ViolationKind::KindNotAllowed,
                detail: format!("{} core not allowed on tier {} (slot {slot})", c.kind, slot.tier),
            });
        }
    }
    let total_slots: u32 = platform.tiers.iter().map(|t| t.slot_count()).sum();
    if placement.slot_map.len() != total_slots as usize || seen_cores.len() != cores.len() {
        out.push(Violation {
            kind: ViolationKind::SlotMap,
            detail: format!(
                "slot map must place all {} cores on all {total_slots} slots (got {} slots, {} cores)",
                cores.len(),
                placement.slot_map.len(),
                seen_cores.len()
            ),
        });
    }

    // Links: resolvable endpoints, correct geometry.
    let vertical_ok: BTreeSet<Link> = vertical_universe(platform, &placement.tier_order).into_iter().collect();
    for link in &placement.links {
        match link {
            Link::Planar { tier, ax, ay, bx, by } => {
                let a = SlotId { tier: *tier, x: *ax, y: *ay };
                let b = SlotId { tier: *tier, x: *bx, y: *by };
                if a == b || !placement.slot_map.contains_key(&a) || !placement.slot_map.contains_key(&b) {
                    out.push(Violation {
                        kind: ViolationKind::BadLink,
                        detail: format!("planar link {a}-{b} has bad endpoints"),
                    });
                }
            }
            Link::Vertical { .. } => {
                if !vertical_ok.contains(link) {
                    out.push(Violation {
                        kind: ViolationKind::BadLink,
                        detail: format!("{link:?} is not an aligned vertical bundle under this tier order"),
                    });
                }
            }
        }
    }

    // Fixed structure: ReRAM pipeline chain (and mesh, when pinned).
    let fixed = fixed_links(platform);
    for link in &fixed {
        if !placement.links.contains(link) {
            out.push(Violation {
                kind: ViolationKind::FixedLinkMissing,
                detail: format!("fixed link {link:?} absent"),
            });
        }
    }
    for t in 0..t_count {
        let pinned_planar = platform.is_reram_only_tier(t) || platform.search.planar_links == PlanarPolicy::FixedMesh;
        if pinned_planar {
            for link in &placement.links {
                if let Link::Planar { tier, .. } = link {
                    if *tier == t && !fixed.contains(link) {
                        out.push(Violation {
                            kind: ViolationKind::BadLink,
                            detail: format!("extra planar link {link:?} on fixed-wiring tier {t}"),
                        });
                    }
                }
            }
        }
    }

    // Mesh budget on total link count; port budget per router.
    let mesh = mesh_reference(platform);
    if placement.links.len() > mesh.link_count {
        out.push(Violation {
            kind: ViolationKind::MeshBudget,
            detail: format!("{} links exceed the 3D-mesh budget of {}", placement.links.len(), mesh.link_count),
        });
    }
    let adj = placement.adjacency(platform);
    for (slot, neighbors) in &adj {
        // 6 mesh-neighbor ports + 1 local port.
        if neighbors.len() + 1 > 7 {
            out.push(Violation {
                kind: ViolationKind::PortBudget,
                detail: format!("router {slot} has {} ports (budget 7)", neighbors.len() + 1),
            });
        }
    }

    // Connectivity over all occupied routers.
    if !out.iter().any(|v| v.kind == ViolationKind::SlotMap) && !is_connected(&adj) {
        out.push(Violation {
            kind: ViolationKind::Connectivity,
            detail: "link graph does not connect all routers".into(),
        });
    }

    out
}

pub(crate) fn is_connected(adj: &BTreeMap<SlotId, Vec<SlotId>>) -> bool {
    let Some(start) = adj.keys().next() else {
        return true;
    };
    let mut seen = BTreeSet::new();
    seen.insert(*start);
    let mut queue = VecDeque::from([*start]);
    while let Some(s) = queue.pop_front() {
        for n in &adj[&s] {
            if seen.insert(*n) {
                queue.push_back(*n);
            }
        }
    }
    seen.len() == adj.len()
}

/// Seeded random valid placement: shuffled tier order and core-to-slot
/// assignment, full planar mesh on free tiers, and a random (connectivity-
/// preserving) subset of vertical bundles.
pub fn random_placement(platform: &Platform, seed: u64) -> Result<Placement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tier_order: Vec<usize> = (0..platform.tiers.len()).collect();
    if platform.search.tier_order == TierOrderPolicy::Free {
        tier_order.shuffle(&mut rng);
    }

    // Deal cores onto tiers respecting allowed kinds. Single-kind tiers are
    // filled first so mixed tiers only see what remains.
    let cores = platform.cores();
    let mut pool_by_kind: BTreeMap<CoreKind, Vec<CoreId>> = BTreeMap::new();
    for c in &cores {
        pool_by_kind.entry(c.kind).or_default().push(c.id);
    }
    for pool in pool_by_kind.values_mut() {
        pool.shuffle(&mut rng);
    }
    let mut tiers_by_constraint: Vec<usize> = (0..platform.tiers.len()).collect();
    tiers_by_constraint.sort_by_key(|t| platform.tiers[*t].allowed_kinds.len());
    let mut slot_map = BTreeMap::new();
    for t in tiers_by_constraint {
        let mut slots = platform.tier_slots(t);
        slots.shuffle(&mut rng);
        for slot in slots {
            let allowed = &platform.tiers[t].allowed_kinds;
            let pick = allowed
                .iter()
                .filter(|k| pool_by_kind.get(k).map_or(false, |p| !p.is_empty()))
                .max_by_key(|k| pool_by_kind[k].len())
                .copied();
            let Some(kind) = pick else {
                return Err(Error::InvalidPlatform(format!(
                    "inventory cannot fill tier {t}: no remaining core of kinds {allowed:?}"
                )));
            };
            let core = pool_by_kind.get_mut(&kind).unwrap().pop().unwrap();
            slot_map.insert(slot, core);
        }
    }

    // Start from the full link structure, then thin the searchable parts.
    let mut links = fixed_links(platform);
    if platform.search.planar_links == PlanarPolicy::Free {
        for t in 0..platform.tiers.len() {
            if !platform.is_reram_only_tier(t) {
                for (a, b) in platform.mesh_edges(t) {
                    links.insert(Link::planar(a, b));
                }
            }
        }
    }
    for v in vertical_universe(platform, &tier_order) {
        links.insert(v);
    }
    let mut placement = Placement {
        tier_order,
        slot_map,
        links,
    };

    let removable: Vec<Link> = placement
        .links
        .iter()
        .filter(|l| match l {
            Link::Vertical { .. } => platform.search.vertical_links == VerticalPolicy::Free,
            Link::Planar { .. } => false,
        })
        .copied()
        .collect();
    for link in removable {
        if rng.gen_bool(0.3) {
            placement.links.remove(&link);
            let adj = placement.adjacency(platform);
            if !is_connected(&adj) {
                placement.links.insert(link);
            }
        }
    }
    debug_assert!(validate_placement(platform, &placement).is_empty());
    Ok(placement)
}
