//! 3D chip description: core specifications, tier grids, thermal constants,
//! TSV parameters, and the full-mesh reference budget that bounds every
//! candidate NoC.

mod moves;
mod placement;

pub use moves::{apply_move, bridges, neighbor_moves, removable_links, Move};
pub use placement::{
    fixed_links, random_placement, validate_placement, vertical_universe, Link, Placement, SlotId,
    Violation, ViolationKind,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreKind {
    Sm,
    Mc,
    Reram,
}

impl std::fmt::Display for CoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreKind::Sm => write!(f, "sm"),
            CoreKind::Mc => write!(f, "mc"),
            CoreKind::Reram => write!(f, "reram"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmParams {
    pub peak_flops: f64,
    pub tensor_cores: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub cache_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReramParams {
    pub tiles: u64,
    pub crossbars_per_tile: u64,
    pub crossbar_rows: u64,
    pub crossbar_cols: u64,
    pub bits_per_cell: u32,
    pub adc_bits: u32,
    pub row_write_time_s: f64,
    pub endurance: u64,
}

impl ReramParams {
    /// Programmable cells in one core: tiles * crossbars * rows * cols.
    pub fn cell_capacity(&self) -> u64 {
        self.tiles * self.crossbars_per_tile * self.crossbar_rows * self.crossbar_cols
    }

    pub fn crossbar_count(&self) -> u64 {
        self.tiles * self.crossbars_per_tile
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_capacity() == 0 {
            return Err(Error::InvalidPlatform("ReRAM cell capacity is zero".into()));
        }
        if self.bits_per_cell == 0 {
            return Err(Error::InvalidPlatform("bits_per_cell must be nonzero".into()));
        }
        if self.row_write_time_s <= 0.0 {
            return Err(Error::InvalidPlatform("row_write_time_s must be positive".into()));
        }
        Ok(())
    }
}

/// One core type. Kind-specific parameters live in the matching optional
/// section; exactly one section must be present and match `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreSpec {
    pub kind: CoreKind,
    pub area_mm2: f64,
    pub active_power_w: f64,
    pub idle_power_w: f64,
    pub frequency_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sm: Option<SmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reram: Option<ReramParams>,
}

impl CoreSpec {
    pub fn validate(&self) -> Result<()> {
        if self.area_mm2 <= 0.0 {
            return Err(Error::InvalidPlatform(format!("{} core: area must be positive", self.kind)));
        }
        if !(self.active_power_w >= self.idle_power_w && self.idle_power_w >= 0.0) {
            return Err(Error::InvalidPlatform(format!(
                "{} core: need active_power >= idle_power >= 0",
                self.kind
            )));
        }
        let section_ok = match self.kind {
            CoreKind::Sm => self.sm.is_some() && self.mc.is_none() && self.reram.is_none(),
            CoreKind::Mc => self.mc.is_some() && self.sm.is_none() && self.reram.is_none(),
            CoreKind::Reram => self.reram.is_some() && self.sm.is_none() && self.mc.is_none(),
        };
        if !section_ok {
            return Err(Error::InvalidPlatform(format!(
                "{} core: kind-specific parameter section missing or mismatched",
                self.kind
            )));
        }
        if let Some(r) = &self.reram {
            r.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSpec {
    pub grid_x: u32,
    pub grid_y: u32,
    pub allowed_kinds: Vec<CoreKind>,
}

impl TierSpec {
    pub fn slot_count(&self) -> u32 {
        self.grid_x * self.grid_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams {
    /// Vertical thermal resistance per tier interface, K/W, one entry per
    /// tier counted from the heat sink.
    pub r_layer_k_per_w: Vec<f64>,
    pub r_base_k_per_w: f64,
    pub ambient_celsius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsvSpec {
    pub diameter_um: f64,
    pub height_um: f64,
    pub capacitance_f: f64,
    pub resistance_ohm: f64,
}

impl TsvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.diameter_um <= 0.0 || self.height_um <= 0.0 || self.capacitance_f <= 0.0 || self.resistance_ohm <= 0.0 {
            return Err(Error::InvalidPlatform("TSV parameters must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlanarPolicy {
    /// Planar links pinned to the grid mesh of each tier; not searched.
    FixedMesh,
    /// Planar links are search variables (any same-tier pair, mesh budget).
    #[default]
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VerticalPolicy {
    /// Every aligned vertical bundle present; not searched.
    FixedAll,
    #[default]
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TierOrderPolicy {
    Fixed,
    #[default]
    Free,
}

/// Which placement degrees of freedom the search (and the exhaustive
/// enumerator) may vary. ReRAM-only tiers keep their fixed pipeline chain
/// regardless of the planar policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpace {
    pub planar_links: PlanarPolicy,
    pub vertical_links: VerticalPolicy,
    pub tier_order: TierOrderPolicy,
}

/// Calibration knobs for the analytical performance/energy model. These
/// stand in for trace-driven values and are exposed rather than claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    /// Fraction of SM peak FLOPs sustained on GEMM work.
    pub sm_utilization: f64,
    /// Scalar elementwise rate = peak_flops / this divisor.
    pub scalar_rate_divisor: f64,
    /// Planar NoC link energy per byte moved per hop.
    pub link_energy_j_per_byte: f64,
    /// Swing voltage used for the 1/2 C V^2 TSV energy term.
    pub tsv_voltage_v: f64,
    /// Fixed DRAM interface handshake latency per transfer phase.
    pub dfi_latency_s: f64,
    /// ReRAM write-power draw as a fraction of core active power.
    pub reram_write_power_fraction: f64,
    /// Reserve half the ReRAM tier so next-layer programming can overlap
    /// current-layer compute.
    pub double_buffer: bool,
    /// ReRAM conductance window for programmed levels.
    pub g_min_s: f64,
    pub g_max_s: f64,
    /// Read voltage across a cell.
    pub read_voltage_v: f64,
    /// Flip-probability threshold separating no-loss from at-risk.
    pub flip_threshold: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            sm_utilization: 0.6,
            scalar_rate_divisor: 8.0,
            link_energy_j_per_byte: 1e-12,
            tsv_voltage_v: 1.0,
            dfi_latency_s: 1e-7,
            reram_write_power_fraction: 0.5,
            double_buffer: true,
            g_min_s: 1e-6,
            g_max_s: 1e-4,
            read_voltage_v: 0.2,
            flip_threshold: 1e-6,
        }
    }
}

impl Calibration {
    /// Conductance distance between adjacent programmed levels.
    pub fn level_spacing_s(&self, bits_per_cell: u32) -> f64 {
        (self.g_max_s - self.g_min_s) / ((1u64 << bits_per_cell) - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventoryEntry {
    /// Index into `core_specs`.
    pub spec: usize,
    pub count: u32,
}

/// A core instance: spec index plus ordinal within that spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoreId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Core {
    pub id: CoreId,
    pub spec_idx: usize,
    pub ordinal: u32,
    pub kind: CoreKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Platform {
    pub tiers: Vec<TierSpec>,
    pub tier_size_mm: (f64, f64),
    pub core_specs: Vec<CoreSpec>,
    pub inventory: Vec<InventoryEntry>,
    pub thermal: ThermalParams,
    pub tsv: TsvSpec,
    pub link_capacity_bytes_per_s: f64,
    pub dram_bandwidth_bytes_per_s: f64,
    #[serde(default)]
    pub search: SearchSpace,
    #[serde(default)]
    pub calibration: Calibration,
}

impl Platform {
    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::InvalidPlatform("no tiers".into()));
        }
        for spec in &self.core_specs {
            spec.validate()?;
        }
        self.tsv.validate()?;
        let slots: u32 = self.tiers.iter().map(|t| t.slot_count()).sum();
        let cores: u32 = self.inventory.iter().map(|e| e.count).sum();
        if slots != cores {
            return Err(Error::InvalidPlatform(format!(
                "inventory ({cores} cores) must exactly fill the grid ({slots} slots)"
            )));
        }
        for e in &self.inventory {
            if e.spec >= self.core_specs.len() {
                return Err(Error::InvalidPlatform(format!("inventory references unknown spec {}", e.spec)));
            }
        }
        if self.thermal.r_layer_k_per_w.len() != self.tiers.len() {
            return Err(Error::InvalidPlatform(format!(
                "need one r_layer entry per tier ({} tiers, {} entries)",
                self.tiers.len(),
                self.thermal.r_layer_k_per_w.len()
            )));
        }
        if self.thermal.r_layer_k_per_w.iter().any(|r| *r <= 0.0) || self.thermal.r_base_k_per_w <= 0.0 {
            return Err(Error::InvalidPlatform("thermal resistances must be positive".into()));
        }
        if self.link_capacity_bytes_per_s <= 0.0 || self.dram_bandwidth_bytes_per_s <= 0.0 {
            return Err(Error::InvalidPlatform("link and DRAM bandwidth must be positive".into()));
        }
        Ok(())
    }

    /// Expanded core list, ordered by inventory entry then ordinal.
    pub fn cores(&self) -> Vec<Core> {
        let mut out = Vec::new();
        for e in &self.inventory {
            for ordinal in 0..e.count {
                out.push(Core {
                    id: CoreId(out.len()),
                    spec_idx: e.spec,
                    ordinal,
                    kind: self.core_specs[e.spec].kind,
                });
            }
        }
        out
    }

    /// Spec index of a core id without materializing the core list.
    pub fn spec_idx_of(&self, core: CoreId) -> usize {
        let mut remaining = core.0;
        for e in &self.inventory {
            if remaining < e.count as usize {
                return e.spec;
            }
            remaining -= e.count as usize;
        }
        panic!("core id {} beyond inventory", core.0)
    }

    pub fn kind_of(&self, core: CoreId) -> CoreKind {
        self.core_specs[self.spec_idx_of(core)].kind
    }

    pub fn spec_of(&self, core: CoreId) -> &CoreSpec {
        &self.core_specs[self.spec_idx_of(core)]
    }

    pub fn core_count(&self) -> usize {
        self.inventory.iter().map(|e| e.count as usize).sum()
    }

    /// Tiers whose slot population is entirely ReRAM keep a fixed
    /// offline-placed pipeline chain.
    pub fn is_reram_only_tier(&self, tier: usize) -> bool {
        let t = &self.tiers[tier];
        !t.allowed_kinds.is_empty() && t.allowed_kinds.iter().all(|k| *k == CoreKind::Reram)
    }

    /// Reference grid dimensions for vertical alignment: the finest grid.
    pub fn reference_grid(&self) -> (u32, u32) {
        (
            self.tiers.iter().map(|t| t.grid_x).max().unwrap_or(1),
            self.tiers.iter().map(|t| t.grid_y).max().unwrap_or(1),
        )
    }

    /// Maps a slot coordinate to its vertical-alignment column on the
    /// reference grid: nearest normalized center, ties toward lower index.
    pub fn column_of(&self, tier: usize, x: u32, y: u32) -> (u32, u32) {
        let (gx, gy) = (self.tiers[tier].grid_x, self.tiers[tier].grid_y);
        let (rx, ry) = self.reference_grid();
        (align_index(x, gx, rx), align_index(y, gy, ry))
    }

    /// Serpentine slot order over a tier, used for the fixed ReRAM pipeline.
    pub fn serpentine_slots(&self, tier: usize) -> Vec<SlotId> {
        let t = &self.tiers[tier];
        let mut out = Vec::with_capacity(t.slot_count() as usize);
        for x in 0..t.grid_x {
            if x % 2 == 0 {
                for y in 0..t.grid_y {
                    out.push(SlotId { tier, x, y });
                }
            } else {
                for y in (0..t.grid_y).rev() {
                    out.push(SlotId { tier, x, y });
                }
            }
        }
        out
    }

    /// All slots of a tier in row-major order.
    pub fn tier_slots(&self, tier: usize) -> Vec<SlotId> {
        let t = &self.tiers[tier];
        let mut out = Vec::new();
        for x in 0..t.grid_x {
            for y in 0..t.grid_y {
                out.push(SlotId { tier, x, y });
            }
        }
        out
    }

    /// Grid-adjacent planar pairs of a tier (the tier's planar mesh edges).
    pub fn mesh_edges(&self, tier: usize) -> Vec<(SlotId, SlotId)> {
        let t = &self.tiers[tier];
        let mut out = Vec::new();
        for x in 0..t.grid_x {
            for y in 0..t.grid_y {
                if x + 1 < t.grid_x {
                    out.push((SlotId { tier, x, y }, SlotId { tier, x: x + 1, y }));
                }
                if y + 1 < t.grid_y {
                    out.push((SlotId { tier, x, y }, SlotId { tier, x, y: y + 1 }));
                }
            }
        }
        out
    }

    /// Aligned slot pairs between two tiers: one pair per reference column
    /// present in both tiers' images.
    pub fn aligned_pairs(&self, tier_a: usize, tier_b: usize) -> Vec<(SlotId, SlotId)> {
        let mut by_cell: BTreeMap<(u32, u32), SlotId> = BTreeMap::new();
        for s in self.tier_slots(tier_a) {
            by_cell.insert(self.column_of(tier_a, s.x, s.y), s);
        }
        let mut out = Vec::new();
        for s in self.tier_slots(tier_b) {
            if let Some(a) = by_cell.get(&self.column_of(tier_b, s.x, s.y)) {
                out.push((*a, s));
            }
        }
        out
    }
}

fn align_index(i: u32, grid: u32, reference: u32) -> u32 {
    if grid == reference {
        return i;
    }
    let center = (i as f64 + 0.5) / grid as f64;
    let mut best = 0u32;
    let mut best_d = f64::INFINITY;
    for j in 0..reference {
        let d = (center - (j as f64 + 0.5) / reference as f64).abs();
        if d < best_d - 1e-12 {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Full 3D mesh over the same occupied slots: the link and port budget no
/// candidate design may exceed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReference {
    pub link_count: usize,
    pub planar_links: usize,
    pub vertical_links: usize,
    /// Maximum ports on any mesh router (incident links + local port).
    pub max_ports: u32,
    /// ports -> router count, counting incident links + 1 local port.
    pub radix_histogram: BTreeMap<u32, u32>,
}

impl MeshReference {
    pub fn mean_radix(&self) -> f64 {
        let routers: u32 = self.radix_histogram.values().sum();
        let ports: u64 = self.radix_histogram.iter().map(|(p, c)| *p as u64 * *c as u64).sum();
        ports as f64 / routers as f64
    }
}

/// Computes the full-mesh budget using the platform's declared tier order
/// (index order). For grids whose alignment images nest, the totals are
/// independent of tier order.
pub fn mesh_reference(platform: &Platform) -> MeshReference {
    let mut degree: BTreeMap<SlotId, u32> = BTreeMap::new();
    for t in 0..platform.tiers.len() {
        for s in platform.tier_slots(t) {
            degree.insert(s, 0);
        }
    }
    let mut planar = 0usize;
    for t in 0..platform.tiers.len() {
        for (a, b) in platform.mesh_edges(t) {
            planar += 1;
            *degree.get_mut(&a).unwrap() += 1;
            *degree.get_mut(&b).unwrap() += 1;
        }
    }
    let mut vertical = 0usize;
    for t in 0..platform.tiers.len().saturating_sub(1) {
        for (a, b) in platform.aligned_pairs(t, t + 1) {
            vertical += 1;
            *degree.get_mut(&a).unwrap() += 1;
            *degree.get_mut(&b).unwrap() += 1;
        }
    }
    let mut hist: BTreeMap<u32, u32> = BTreeMap::new();
    for d in degree.values() {
        *hist.entry(d + 1).or_insert(0) += 1;
    }
    MeshReference {
        link_count: planar + vertical,
        planar_links: planar,
        vertical_links: vertical,
        max_ports: hist.keys().max().copied().unwrap_or(1),
        radix_histogram: hist,
    }
}

/// The default four-tier platform: three 3x3 SM/MC tiers (7 SM + 2 MC each)
/// above or below one 4x4 ReRAM tier, 10 mm x 10 mm per tier.
///
/// SM and MC power numbers are exposed assumptions (SM: 250 W board budget
/// over 80 SMs ~ 3.1 W). Thermal resistances are calibration knobs chosen
/// so default workloads settle in a plausible stacked-die temperature band.
pub fn default_platform() -> Platform {
    let sm = CoreSpec {
        kind: CoreKind::Sm,
        area_mm2: 9.1,
        active_power_w: 3.1,
        idle_power_w: 0.31,
        frequency_hz: 1.53e9,
        sm: Some(SmParams {
            peak_flops: 1.5625e12,
            tensor_cores: 8,
        }),
        mc: None,
        reram: None,
    };
    let mc = CoreSpec {
        kind: CoreKind::Mc,
        area_mm2: 3.2,
        active_power_w: 1.5,
        idle_power_w: 0.15,
        frequency_hz: 1.53e9,
        sm: None,
        mc: Some(McParams { cache_bytes: 512 * 1024 }),
        reram: None,
    };
    // One ReRAM core aggregates 16 tiles of 0.34 W / 0.37 mm2 each.
    let reram = CoreSpec {
        kind: CoreKind::Reram,
        area_mm2: 16.0 * 0.37,
        active_power_w: 16.0 * 0.34,
        idle_power_w: 0.10,
        frequency_hz: 1.0e7,
        sm: None,
        mc: None,
        reram: Some(ReramParams {
            tiles: 16,
            crossbars_per_tile: 96,
            crossbar_rows: 128,
            crossbar_cols: 128,
            bits_per_cell: 2,
            adc_bits: 8,
            row_write_time_s: 1e-6,
            endurance: 1_000_000,
        }),
    };
    let smmc_tier = TierSpec {
        grid_x: 3,
        grid_y: 3,
        allowed_kinds: vec![CoreKind::Sm, CoreKind::Mc],
    };
    let reram_tier = TierSpec {
        grid_x: 4,
        grid_y: 4,
        allowed_kinds: vec![CoreKind::Reram],
    };
    Platform {
        tiers: vec![smmc_tier.clone(), smmc_tier.clone(), smmc_tier, reram_tier],
        tier_size_mm: (10.0, 10.0),
        core_specs: vec![sm, mc, reram],
        inventory: vec![
            InventoryEntry { spec: 0, count: 21 },
            InventoryEntry { spec: 1, count: 6 },
            InventoryEntry { spec: 2, count: 16 },
        ],
        thermal: ThermalParams {
            r_layer_k_per_w: vec![0.75; 4],
            r_base_k_per_w: 0.4,
            ambient_celsius: 45.0,
        },
        tsv: TsvSpec {
            diameter_um: 5.0,
            height_um: 25.0,
            capacitance_f: 37e-15,
            resistance_ohm: 0.020,
        },
        link_capacity_bytes_per_s: 32e9,
        dram_bandwidth_bytes_per_s: 256e9,
        search: SearchSpace::default(),
        calibration: Calibration::default(),
    }
}
