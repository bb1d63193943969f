//! Vertical-column thermal model with a lateral-spread term, plus an
//! independent series-resistor ladder oracle for validation.
//!
//! The chip is divided into vertical columns on the alignment grid; the
//! temperature rise of the core at layer k (counting from the heat sink)
//! accumulates the power above each interface resistance. Lateral heat
//! flow enters only through the per-layer max-min spread, and the scalar
//! objective is the product of the worst rise and the worst spread (a
//! peak-only form is available because the product degenerates to zero on
//! laterally uniform designs).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::platform::{CoreId, CoreKind, Placement, Platform, SlotId};
use crate::util::fmt_f64;

/// Per-column power stacks. `power_w[level]` is the dissipation of the core
/// at that vertical level (0 = nearest sink); levels without a core in the
/// column contribute zero.
#[derive(Debug, Clone)]
pub struct PowerMap {
    pub columns: Vec<PowerColumn>,
    pub levels: usize,
}

#[derive(Debug, Clone)]
pub struct PowerColumn {
    pub cell: (u32, u32),
    pub power_w: Vec<f64>,
    pub slots: Vec<Option<SlotId>>,
}

/// Builds the power map from per-core duty factors (fraction of the
/// makespan each core draws its active-minus-idle delta). Duties clamp to
/// [0, 1], so no entry exceeds the core's active power.
pub fn power_map(platform: &Platform, placement: &Placement, duties: &BTreeMap<CoreId, f64>) -> PowerMap {
    let levels = platform.tiers.len();
    let mut columns: BTreeMap<(u32, u32), PowerColumn> = BTreeMap::new();
    for (slot, core) in &placement.slot_map {
        let cell = platform.column_of(slot.tier, slot.x, slot.y);
        let level = placement.level_of(slot.tier);
        let spec = platform.spec_of(*core);
        let duty = duties.get(core).copied().unwrap_or(0.0).clamp(0.0, 1.0);
        let p = spec.idle_power_w + duty * (spec.active_power_w - spec.idle_power_w);
        let col = columns.entry(cell).or_insert_with(|| PowerColumn {
            cell,
            power_w: vec![0.0; levels],
            slots: vec![None; levels],
        });
        col.power_w[level] += p;
        col.slots[level] = Some(*slot);
    }
    PowerMap {
        columns: columns.into_values().collect(),
        levels,
    }
}

/// Temperature rise per column and layer:
/// T(n,k) = sum_{i<=k} P_i * (sum_{j<=i} R_j) + R_b * sum_{i<=k} P_i.
/// Layer indices count from the sink; the R_b term deliberately sums only
/// the power up to layer k, exactly as the model is defined (the ladder
/// oracle documents the physical difference at intermediate layers).
pub fn vertical_temps(pmap: &PowerMap, r_layer: &[f64], r_base: f64) -> Vec<Vec<f64>> {
    pmap.columns
        .iter()
        .map(|col| {
            let mut out = Vec::with_capacity(pmap.levels);
            let mut cum_r = 0.0;
            let mut acc = 0.0; // sum_{i<=k} P_i * cumR_i
            let mut p_sum = 0.0;
            for k in 0..pmap.levels {
                cum_r += r_layer[k];
                acc += col.power_w[k] * cum_r;
                p_sum += col.power_w[k];
                out.push(acc + r_base * p_sum);
            }
            out
        })
        .collect()
}

/// Independent validation oracle: solve the physical series-resistor ladder
/// per column. Node k's rise is R_b * (total column power) plus, for every
/// interface at or below k, that interface's resistance times all power
/// flowing through it (everything at or above the interface).
pub fn rc_ladder_oracle(pmap: &PowerMap, r_layer: &[f64], r_base: f64) -> Vec<Vec<f64>> {
    pmap.columns
        .iter()
        .map(|col| {
            let total: f64 = col.power_w.iter().sum();
            let mut out = Vec::with_capacity(pmap.levels);
            for k in 0..pmap.levels {
                let mut t = r_base * total;
                for j in 0..=k {
                    let through: f64 = col.power_w[j..].iter().sum();
                    t += r_layer[j] * through;
                }
                out.push(t);
            }
            out
        })
        .collect()
}

/// Per-layer lateral spread: max over columns minus min over columns.
pub fn lateral_spread(temps: &[Vec<f64>]) -> Vec<f64> {
    if temps.is_empty() {
        return Vec::new();
    }
    let levels = temps[0].len();
    (0..levels)
        .map(|k| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for col in temps {
                lo = lo.min(col[k]);
                hi = hi.max(col[k]);
            }
            hi - lo
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalObjectiveForm {
    /// (max rise) * (max spread) — degenerates to zero when every column
    /// heats identically.
    #[default]
    Product,
    Peak,
}

pub fn thermal_objective(temps: &[Vec<f64>], delta: &[f64], form: ThermalObjectiveForm) -> f64 {
    let max_t = temps
        .iter()
        .flat_map(|c| c.iter().copied())
        .fold(0.0_f64, f64::max);
    match form {
        ThermalObjectiveForm::Product => {
            let max_d = delta.iter().copied().fold(0.0_f64, f64::max);
            max_t * max_d
        }
        ThermalObjectiveForm::Peak => max_t,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermalResult {
    /// Rise in kelvin, [column][level].
    pub temps: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub objective: f64,
    pub peak_celsius: f64,
    /// Hottest slot hosting a ReRAM core, absolute degrees C (NaN-free:
    /// equals ambient when no ReRAM core exists).
    pub reram_celsius: f64,
    pub per_slot_celsius: Vec<(SlotId, f64)>,
    /// The product objective is zero whenever the spread vanishes; flagged
    /// so reports can warn about the degeneracy.
    pub degenerate_spread: bool,
}

/// Full thermal evaluation of a placement under a duty profile.
pub fn evaluate_thermal(
    platform: &Platform,
    placement: &Placement,
    duties: &BTreeMap<CoreId, f64>,
    form: ThermalObjectiveForm,
) -> ThermalResult {
    let pmap = power_map(platform, placement, duties);
    let temps = vertical_temps(&pmap, &platform.thermal.r_layer_k_per_w, platform.thermal.r_base_k_per_w);
    let delta = lateral_spread(&temps);
    let objective = thermal_objective(&temps, &delta, form);
    let ambient = platform.thermal.ambient_celsius;
    let cores = platform.cores();

    let mut per_slot = Vec::new();
    let mut peak = 0.0_f64;
    let mut reram_rise = 0.0_f64;
    let mut has_reram = false;
    for (ci, col) in pmap.columns.iter().enumerate() {
        for (level, slot) in col.slots.iter().enumerate() {
            if let Some(slot) = slot {
                let rise = temps[ci][level];
                peak = peak.max(rise);
                per_slot.push((*slot, ambient + rise));
                let core = placement.slot_map[slot];
                if cores[core.0].kind == CoreKind::Reram {
                    has_reram = true;
                    reram_rise = reram_rise.max(rise);
                }
            }
        }
    }
    per_slot.sort_by_key(|(s, _)| *s);
    let max_d = delta.iter().copied().fold(0.0_f64, f64::max);
    ThermalResult {
        temps,
        delta,
        objective,
        peak_celsius: ambient + peak,
        reram_celsius: ambient + if has_reram { reram_rise } else { 0.0 },
        per_slot_celsius: per_slot,
        degenerate_spread: max_d < 0.01,
    }
}

pub fn thermal_map_csv(result: &ThermalResult, version: &str) -> String {
    let mut s = format!("# hetrax-dse v{version}\ntier,x,y,temp_celsius\n");
    for (slot, t) in &result.per_slot_celsius {
        s.push_str(&format!("{},{},{},{}\n", slot.tier, slot.x, slot.y, fmt_f64(*t)));
    }
    s
}
