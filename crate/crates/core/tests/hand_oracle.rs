//! Hand-computed oracle for the composed pipeline on a three-core chip:
//! a hand-written placement whose per-link byte tallies, utilization
//! statistics, and temperatures are all derived by hand first.

use std::collections::{BTreeMap, BTreeSet};

use hetrax_core::mapping::derive_mapping;
use hetrax_core::noc::{link_utilizations, synthesize_traffic, utilization_stats, RouterNet};
use hetrax_core::platform::{
    validate_placement, CoreId, CoreKind, CoreSpec, InventoryEntry, Link, McParams, Placement,
    Platform, ReramParams, SlotId, SmParams, ThermalParams, TierSpec, TsvSpec,
};
use hetrax_core::thermal::{evaluate_thermal, ThermalObjectiveForm};
use hetrax_core::workload::{build_kernel_graph, ModelConfig};

fn three_core_platform() -> Platform {
    Platform {
        tiers: vec![
            TierSpec {
                grid_x: 1,
                grid_y: 2,
                allowed_kinds: vec![CoreKind::Sm, CoreKind::Mc],
            },
            TierSpec {
                grid_x: 1,
                grid_y: 1,
                allowed_kinds: vec![CoreKind::Reram],
            },
        ],
        tier_size_mm: (10.0, 10.0),
        core_specs: vec![
            CoreSpec {
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
            },
            CoreSpec {
                kind: CoreKind::Mc,
                area_mm2: 3.2,
                active_power_w: 1.5,
                idle_power_w: 0.15,
                frequency_hz: 1.53e9,
                sm: None,
                mc: Some(McParams { cache_bytes: 512 * 1024 }),
                reram: None,
            },
            CoreSpec {
                kind: CoreKind::Reram,
                area_mm2: 5.92,
                active_power_w: 5.44,
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
            },
        ],
        inventory: vec![
            InventoryEntry { spec: 0, count: 1 },
            InventoryEntry { spec: 1, count: 1 },
            InventoryEntry { spec: 2, count: 1 },
        ],
        thermal: ThermalParams {
            r_layer_k_per_w: vec![0.75, 0.75],
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
        search: Default::default(),
        calibration: Default::default(),
    }
}

/// SM at (0,0), MC at (0,1), ReRAM below the SM; one planar link and one
/// vertical bundle.
fn hand_placement() -> Placement {
    let sm = SlotId { tier: 0, x: 0, y: 0 };
    let mc = SlotId { tier: 0, x: 0, y: 1 };
    let rr = SlotId { tier: 1, x: 0, y: 0 };
    let mut slot_map = BTreeMap::new();
    slot_map.insert(sm, CoreId(0));
    slot_map.insert(mc, CoreId(1));
    slot_map.insert(rr, CoreId(2));
    let mut links = BTreeSet::new();
    links.insert(Link::planar(sm, mc));
    links.insert(Link::Vertical {
        interface: 0,
        cx: 0,
        cy: 0,
    });
    Placement {
        tier_order: vec![0, 1],
        slot_map,
        links,
    }
}

#[test]
fn hand_derived_utilization_and_temperature() {
    let platform = three_core_platform();
    platform.validate().unwrap();
    let placement = hand_placement();
    assert!(validate_placement(&platform, &placement).is_empty());

    // Toy model: one layer, one head, d = d_k = 4, ff = 8, n = 2,
    // 16-bit values (2 bytes). Hand tallies:
    //   MHA weights:  Q,K,V = 3 * (4*4*2) = 96 B, W_O = 32 B
    //   FF weights:   2 * (4*8*2) = 128 B
    //   activations:  X = n*d*2 = 16 B per hop
    // Link loads:
    //   planar MC-SM:  (96+32) weights + 16 X-dist + 128 FF-weight pass-
    //                  through + 16 FF-output pass-through = 288 B
    //   vertical:      128 FF weights + 16 FF input + 16 FF output = 160 B
    // With a 1 s window at 32 GB/s: mu = 224/32e9, sigma = 64/32e9.
    let model = ModelConfig::new("toy", 1, 4, 1, 4, Some(8), 2);
    let graph = build_kernel_graph(&model).unwrap();
    let net = RouterNet::build(&platform, &placement).unwrap();
    let mapping = derive_mapping(&platform, &placement, &model, &net).unwrap();
    let traffic = synthesize_traffic(&graph, &platform, &placement, &mapping).unwrap();
    let u = link_utilizations(&traffic, &platform, &placement, &net, 1.0).unwrap();

    let vals = u.values();
    assert_eq!(vals.len(), 2);
    let expect_planar = 288.0 / 32e9;
    let expect_vertical = 160.0 / 32e9;
    let mut got = vals.clone();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((got[1] - expect_planar).abs() < 1e-18, "planar {} vs {}", got[1], expect_planar);
    assert!((got[0] - expect_vertical).abs() < 1e-18, "vertical {} vs {}", got[0], expect_vertical);

    let (mu, sigma) = utilization_stats(&vals).unwrap();
    assert!((mu - 224.0 / 32e9).abs() < 1e-18);
    assert!((sigma - 64.0 / 32e9).abs() < 1e-18);

    // Thermal at full duty everywhere, by hand:
    //   column (0,0): SM 3.1 W at level 0, ReRAM 5.44 W at level 1
    //     T(level1) = 3.1*0.75 + 5.44*1.5 + 0.4*8.54 = 13.901 K
    //   column (0,1): MC 1.5 W at level 0
    //     T(level0) = 1.5*0.75 + 0.4*1.5 = 1.725 K
    let mut duties = BTreeMap::new();
    for id in 0..3 {
        duties.insert(CoreId(id), 1.0);
    }
    let thermal = evaluate_thermal(&platform, &placement, &duties, ThermalObjectiveForm::Product);
    let temp_of = |slot: SlotId| {
        thermal
            .per_slot_celsius
            .iter()
            .find(|(s, _)| *s == slot)
            .map(|(_, t)| *t)
            .unwrap()
    };
    let ambient = 45.0;
    assert!((temp_of(SlotId { tier: 1, x: 0, y: 0 }) - (ambient + 13.901)).abs() < 1e-9);
    assert!((temp_of(SlotId { tier: 0, x: 0, y: 1 }) - (ambient + 1.725)).abs() < 1e-9);
    assert!((thermal.peak_celsius - (ambient + 13.901)).abs() < 1e-9);
    // Spread at level 1: 13.901 - 1.725 = 12.176; product objective.
    assert!((thermal.objective - 13.901 * 12.176).abs() < 1e-9);
}
