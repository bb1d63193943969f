//! The four subcommands. Each writes its artifacts under the run
//! directory, records them in a manifest, and prints a short summary.

use anyhow::{bail, Context, Result};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

use hetrax_core::moo::{brute_force_pareto, moo_search, GuidanceMode, ObjectiveSet, SearchConfig};
use hetrax_core::noc::radix_histogram_csv;
use hetrax_core::perf::{dram_thermal_check, power_density, DramFeasibility};
use hetrax_core::pipeline::{evaluate_design, EvalSummary};
use hetrax_core::platform::{default_platform, validate_placement, Placement, Platform};
use hetrax_core::thermal::thermal_map_csv;
use hetrax_core::util::fmt_f64;
use hetrax_core::workload::{
    build_kernel_graph, ff_gemm_fraction, reram_rewrite_report, zoo_model, AttentionKind,
    BlockKind, LayerTopology, ModelConfig, ReramPolicy,
};
use hetrax_core::VERSION;

use crate::manifest::RunManifest;
use crate::{
    AttentionArg, BaselineArgs, BlocksArg, EvaluateArgs, GuidanceArg, ModelArgs, ObjectivesArg,
    OptimizeArgs, TopologyArg, WorkloadArgs,
};

pub use hetrax_core::moo::SearchOutcome;

fn load_model(args: &ModelArgs) -> Result<ModelConfig> {
    let mut cfg = if args.model.ends_with(".json") || Path::new(&args.model).is_file() {
        let text = fs::read_to_string(&args.model)
            .with_context(|| format!("reading model config {}", args.model))?;
        let mut cfg: ModelConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing model config {}", args.model))?;
        cfg.seq_len = args.seq;
        cfg
    } else {
        zoo_model(&args.model, args.seq)?
    };
    if let Some(a) = args.attention {
        cfg.attention_kind = match a {
            AttentionArg::Mha => AttentionKind::Mha,
            AttentionArg::Mqa => AttentionKind::Mqa,
        };
    }
    if let Some(t) = args.topology {
        cfg.layer_topology = match t {
            TopologyArg::Sequential => LayerTopology::Sequential,
            TopologyArg::ParallelAttention => LayerTopology::ParallelAttention,
        };
    }
    if let Some(b) = args.blocks {
        cfg.block_kind = match b {
            BlocksArg::EncoderOnly => BlockKind::EncoderOnly,
            BlocksArg::DecoderOnly => BlockKind::DecoderOnly,
            BlocksArg::EncoderDecoder => BlockKind::EncoderDecoder,
        };
    }
    if let Some(p) = args.precision {
        cfg.precision_bits = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_platform(path: &Option<PathBuf>) -> Result<Platform> {
    let platform = match path {
        None => default_platform(),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading platform config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing platform config {}", p.display()))?
        }
    };
    platform.validate()?;
    Ok(platform)
}

fn write_output(manifest: &mut RunManifest, dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    manifest.outputs.push(name.to_string());
    Ok(path)
}

fn finalize(mut manifest: RunManifest, dir: &Path) -> Result<()> {
    manifest.finish();
    manifest.outputs.push("manifest.json".into());
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn cmd_workload(args: &WorkloadArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let config_bytes = serde_json::to_vec(&model)?;
    let mut manifest = RunManifest::start("workload", &config_bytes, 0);
    fs::create_dir_all(&args.out)?;

    let graph = build_kernel_graph(&model)?;
    let platform = default_platform();
    let reram = platform.core_specs[2].reram.as_ref().expect("default reram spec");
    let tier_cores = 16;
    let attention_rewrites = reram_rewrite_report(&model, reram, tier_cores, ReramPolicy::AttentionOnReram)?;
    let ff_rewrites = reram_rewrite_report(&model, reram, tier_cores, ReramPolicy::FfOnReram)?;

    let summary = json!({
        "model": model,
        "kernel_count": graph.ops.len(),
        "total_gemm_flops": graph.total_gemm_flops(),
        "total_elementwise_ops": graph.total_elementwise_ops(),
        "total_weight_bytes": graph.total_weight_bytes(),
        "ff_gemm_fraction": ff_gemm_fraction(&graph),
        "rewrites_attention_on_reram": attention_rewrites,
        "rewrites_ff_on_reram": ff_rewrites,
    });

    write_output(&mut manifest, &args.out, "kernel_graph.json", &serde_json::to_string_pretty(&graph)?)?;
    write_output(&mut manifest, &args.out, "workload_summary.json", &serde_json::to_string_pretty(&summary)?)?;
    finalize(manifest, &args.out)?;

    println!(
        "{}: {} kernels, {} GEMM FLOPs, FF fraction {:.4}",
        model.name,
        graph.ops.len(),
        graph.total_gemm_flops(),
        ff_gemm_fraction(&graph)
    );
    if let Some(w) = attention_rewrites.crossbar_writes_per_inference {
        println!(
            "attention-on-ReRAM: {w} crossbar writes/inference, {} writes/cell, lifetime {} inferences",
            fmt_f64(attention_rewrites.writes_per_cell_per_inference),
            attention_rewrites
                .lifetime_inferences
                .map(|v| fmt_f64(v))
                .unwrap_or_else(|| "unbounded".into())
        );
    }
    println!(
        "ff-on-ReRAM: {} writes/cell/inference (sequence-length independent: {})",
        fmt_f64(ff_rewrites.writes_per_cell_per_inference),
        ff_rewrites.sequence_length_independent
    );
    Ok(())
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let platform = load_platform(&args.platform)?;
    let seed = crate::resolve_seed(args.seed);
    let config = SearchConfig {
        epochs: args.epochs,
        perturbations: args.perturbations,
        objective_set: match args.objectives {
            ObjectivesArg::Pt => ObjectiveSet::Pt,
            ObjectivesArg::Ptn => ObjectiveSet::Ptn,
        },
        seed,
        guidance: match args.guidance {
            GuidanceArg::Off => GuidanceMode::Off,
            GuidanceArg::Learned => GuidanceMode::Learned,
        },
        shared_start: !args.independent_starts,
        jobs: args.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }),
        ..Default::default()
    };

    let config_bytes = serde_json::to_vec(&json!({
        "model": model,
        "platform": platform,
        "search": config,
    }))?;
    let mut manifest = RunManifest::start("optimize", &config_bytes, seed);
    fs::create_dir_all(&args.out)?;

    let outcome = moo_search(&platform, &model, &config)?;
    let archive = &outcome.archive;

    write_output(&mut manifest, &args.out, "pareto.csv", &archive.to_csv(VERSION))?;
    for entry in &archive.entries {
        let name = format!("placements/{:016x}.json", entry.digest);
        write_output(&mut manifest, &args.out, &name, &serde_json::to_string_pretty(&entry.placement)?)?;
    }
    if !outcome.log.is_empty() {
        write_output(&mut manifest, &args.out, "search_log.txt", &outcome.log.join("\n"))?;
    }
    let hv: Vec<String> = outcome.hv_trace.iter().map(|v| fmt_f64(*v)).collect();
    write_output(
        &mut manifest,
        &args.out,
        "hypervolume_trace.csv",
        &format!("# hetrax-dse v{VERSION}\nepoch,hypervolume\n{}", {
            hv.iter()
                .enumerate()
                .map(|(i, v)| format!("{i},{v}"))
                .collect::<Vec<_>>()
                .join("\n")
        }),
    )?;
    finalize(manifest, &args.out)?;

    println!(
        "archive: {} entries after {} evaluations ({} objectives, seed {seed})",
        archive.entries.len(),
        outcome.evaluations,
        archive.objective_set
    );
    match archive.best_edp_feasible() {
        Some(best) => println!(
            "best feasible EDP: {:016x} edp={} J*s latency={} s energy={} J peak={} C",
            best.digest,
            fmt_f64(best.summary.edp_js),
            fmt_f64(best.summary.latency_s),
            fmt_f64(best.summary.energy_j),
            fmt_f64(best.summary.peak_celsius)
        ),
        None => println!("no thermally feasible entry in the archive"),
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let platform = load_platform(&args.platform)?;
    let text = fs::read_to_string(&args.placement)
        .with_context(|| format!("reading placement {}", args.placement.display()))?;
    let placement: Placement = serde_json::from_str(&text)
        .with_context(|| format!("parsing placement {}", args.placement.display()))?;

    let violations = validate_placement(&platform, &placement);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        bail!("placement failed validation with {} violations", violations.len());
    }

    let config_bytes = serde_json::to_vec(&json!({ "model": model, "platform": platform, "placement": placement }))?;
    let mut manifest = RunManifest::start("evaluate", &config_bytes, 0);
    fs::create_dir_all(&args.out)?;

    let graph = build_kernel_graph(&model)?;
    let eval = evaluate_design(&platform, &graph, &placement)?;
    let digest = placement.digest(&platform);

    let report = json!({
        "placement_digest": format!("{digest:016x}"),
        "objectives": {
            "mu": eval.summary.mu,
            "sigma": eval.summary.sigma,
            "thermal": eval.summary.thermal_objective,
            "noise": eval.summary.noise_objective,
        },
        "summary": eval.summary,
        "perf": eval.perf,
        "noise": eval.noise,
        "thermal_degenerate_spread": eval.thermal.degenerate_spread,
    });
    write_output(&mut manifest, &args.out, "report.json", &serde_json::to_string_pretty(&report)?)?;
    write_output(
        &mut manifest,
        &args.out,
        "summary_row.csv",
        &format!(
            "# hetrax-dse v{VERSION}\n{}\n{}\n",
            EvalSummary::csv_header(),
            eval.summary.csv_row(digest)
        ),
    )?;
    write_output(&mut manifest, &args.out, "thermal_map.csv", &thermal_map_csv(&eval.thermal, VERSION))?;
    write_output(&mut manifest, &args.out, "utilization.csv", &eval.utilization.to_csv(VERSION))?;
    write_output(&mut manifest, &args.out, "traffic.csv", &eval.traffic.to_csv(&placement, VERSION))?;
    write_output(
        &mut manifest,
        &args.out,
        "radix_histogram.csv",
        &radix_histogram_csv(&eval.radix_histogram, VERSION),
    )?;
    write_output(&mut manifest, &args.out, "noise_report.json", &serde_json::to_string_pretty(&eval.noise)?)?;
    finalize(manifest, &args.out)?;

    println!(
        "{digest:016x}: mu={} sigma={} thermal={} noise={} edp={} feasible={}",
        fmt_f64(eval.summary.mu),
        fmt_f64(eval.summary.sigma),
        fmt_f64(eval.summary.thermal_objective),
        fmt_f64(eval.summary.noise_objective),
        fmt_f64(eval.summary.edp_js),
        eval.summary.feasible
    );
    Ok(())
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<()> {
    if args.units == 0 || args.unit_power <= 0.0 || args.die_area <= 0.0 || args.banks == 0 || args.gpu_density <= 0.0 {
        bail!("baseline inputs must be positive");
    }
    let bank_area = args.die_area / args.banks as f64;
    let density = power_density(args.units, args.unit_power, bank_area)?;
    let ratio = density / args.gpu_density;
    let feasibility = args.temp.map(dram_thermal_check);

    let config_bytes = format!(
        "{} {} {} {} {:?} {}",
        args.units, args.unit_power, args.die_area, args.banks, args.temp, args.gpu_density
    );
    let mut manifest = RunManifest::start("baseline", config_bytes.as_bytes(), 0);
    fs::create_dir_all(&args.out)?;

    let report = json!({
        "units_per_bank": args.units,
        "unit_power_w": args.unit_power,
        "bank_area_mm2": bank_area,
        "power_density_w_per_mm2": density,
        "gpu_reference_density_w_per_mm2": args.gpu_density,
        "density_ratio_vs_gpu": ratio,
        "temp_celsius": args.temp,
        "dram_feasibility": feasibility,
        "dram_temp_limit_c": hetrax_core::perf::DRAM_TEMP_LIMIT_C,
    });
    write_output(&mut manifest, &args.out, "baseline.json", &serde_json::to_string_pretty(&report)?)?;
    finalize(manifest, &args.out)?;

    println!(
        "power density {} W/mm^2 ({}x the {} W/mm^2 GPU reference)",
        fmt_f64(density),
        fmt_f64(ratio),
        fmt_f64(args.gpu_density)
    );
    if let Some(f) = feasibility {
        println!(
            "DRAM at {} C: {}",
            fmt_f64(args.temp.unwrap()),
            match f {
                DramFeasibility::Feasible => "feasible",
                DramFeasibility::Infeasible => "infeasible (exceeds 95 C)",
            }
        );
    }
    Ok(())
}

/// Exposed for tests: the exhaustive oracle through the same config path.
pub fn brute_force(platform: &Platform, model: &ModelConfig, set: ObjectiveSet) -> Result<hetrax_core::moo::ParetoArchive> {
    Ok(brute_force_pareto(platform, model, set)?)
}
