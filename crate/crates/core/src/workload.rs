//! Transformer workload model.
//!
//! Turns model hyperparameters into a kernel graph: one node per compute
//! kernel (per-head QKV projections, score/softmax, weighted sum, output
//! projection, layer norms, two feed-forward GEMMs) with exact FLOP, byte,
//! and weight budgets, plus ReRAM-rewrite estimates for endurance studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platform::ReramParams;

/// Default softmax cost: max-subtract, exp, row-sum, divide, scale.
pub const DEFAULT_SOFTMAX_OPS_PER_ELEMENT: u64 = 5;
/// Default layer-norm cost per element (mean, variance, normalize, affine).
pub const DEFAULT_LNORM_OPS_PER_ELEMENT: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    EncoderDecoder,
    EncoderOnly,
    DecoderOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionKind {
    Mha,
    Mqa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerTopology {
    Sequential,
    ParallelAttention,
}

/// Transformer hyperparameters.
///
/// `num_layers` counts stacks: an encoder-decoder model with `num_layers = L`
/// has `L` encoder blocks plus `L` decoder blocks (each decoder block carries
/// a second, cross-attention MHA group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub num_layers: u32,
    pub d_model: u64,
    pub num_heads: u64,
    pub head_dim: u64,
    /// Defaults to 4 * d_model when absent.
    #[serde(default)]
    pub ff_dim: Option<u64>,
    pub seq_len: u64,
    pub block_kind: BlockKind,
    pub attention_kind: AttentionKind,
    pub layer_topology: LayerTopology,
    #[serde(default = "default_precision_bits")]
    pub precision_bits: u32,
    /// Elementwise cost-model knobs; the kernels themselves carry no
    /// published per-element cost, so these are exposed configuration.
    #[serde(default = "default_softmax_ops")]
    pub softmax_ops_per_element: u64,
    #[serde(default = "default_lnorm_ops")]
    pub lnorm_ops_per_element: u64,
}

fn default_precision_bits() -> u32 {
    16
}
fn default_softmax_ops() -> u64 {
    DEFAULT_SOFTMAX_OPS_PER_ELEMENT
}
fn default_lnorm_ops() -> u64 {
    DEFAULT_LNORM_OPS_PER_ELEMENT
}

impl ModelConfig {
    pub fn new(
        name: &str,
        num_layers: u32,
        d_model: u64,
        num_heads: u64,
        head_dim: u64,
        ff_dim: Option<u64>,
        seq_len: u64,
    ) -> Self {
        ModelConfig {
            name: name.to_string(),
            num_layers,
            d_model,
            num_heads,
            head_dim,
            ff_dim,
            seq_len,
            block_kind: BlockKind::EncoderOnly,
            attention_kind: AttentionKind::Mha,
            layer_topology: LayerTopology::Sequential,
            precision_bits: 16,
            softmax_ops_per_element: DEFAULT_SOFTMAX_OPS_PER_ELEMENT,
            lnorm_ops_per_element: DEFAULT_LNORM_OPS_PER_ELEMENT,
        }
    }

    pub fn ff_dim(&self) -> u64 {
        self.ff_dim.unwrap_or(4 * self.d_model)
    }

    pub fn bytes_per_value(&self) -> u64 {
        self.precision_bits as u64 / 8
    }

    /// Total block count: encoder-decoder stacks both halves.
    pub fn block_count(&self) -> u32 {
        match self.block_kind {
            BlockKind::EncoderDecoder => 2 * self.num_layers,
            _ => self.num_layers,
        }
    }

    /// `num_layers = 0` is allowed as a degenerate graph for plumbing tests;
    /// every other count must be positive.
    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 || self.d_model == 0 || self.num_heads == 0 || self.ff_dim() == 0 {
            return Err(Error::InvalidModel(format!(
                "{}: seq_len, d_model, num_heads, ff_dim must all be nonzero",
                self.name
            )));
        }
        if self.head_dim == 0 {
            return Err(Error::InvalidModel(format!("{}: head_dim must be nonzero", self.name)));
        }
        if self.d_model % self.num_heads != 0 {
            return Err(Error::InvalidModel(format!(
                "{}: d_model {} not divisible by num_heads {}",
                self.name, self.d_model, self.num_heads
            )));
        }
        if self.d_model != self.num_heads * self.head_dim {
            return Err(Error::InvalidModel(format!(
                "{}: d_model {} != num_heads {} * head_dim {}",
                self.name, self.d_model, self.num_heads, self.head_dim
            )));
        }
        if !matches!(self.precision_bits, 8 | 16 | 32) {
            return Err(Error::InvalidModel(format!(
                "{}: precision_bits must be 8, 16, or 32",
                self.name
            )));
        }
        Ok(())
    }
}

/// Built-in named configurations, loaded by `zoo_model`.
pub fn zoo_names() -> &'static [&'static str] {
    &["bert-tiny", "bert-base", "bert-large", "bart-base", "bart-large"]
}

/// Standard hyperparameters for the built-in models. BERT variants are
/// encoder-only; BART variants are encoder-decoder.
pub fn zoo_model(name: &str, seq_len: u64) -> Result<ModelConfig> {
    let mut cfg = match name {
        "bert-tiny" => ModelConfig::new("bert-tiny", 2, 128, 2, 64, Some(512), seq_len),
        "bert-base" => ModelConfig::new("bert-base", 12, 768, 12, 64, Some(3072), seq_len),
        "bert-large" => ModelConfig::new("bert-large", 24, 1024, 16, 64, Some(4096), seq_len),
        "bart-base" => ModelConfig::new("bart-base", 6, 768, 12, 64, Some(3072), seq_len),
        "bart-large" => ModelConfig::new("bart-large", 12, 1024, 16, 64, Some(4096), seq_len),
        other => {
            return Err(Error::InvalidModel(format!(
                "unknown model `{other}` (known: {})",
                zoo_names().join(", ")
            )))
        }
    };
    if name.starts_with("bart") {
        cfg.block_kind = BlockKind::EncoderDecoder;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KernelClass {
    Embed,
    Mha1,
    Mha2,
    Mha3,
    Mha4,
    Lnorm1,
    Ff1,
    Ff2,
    Lnorm2,
}

impl KernelClass {
    pub fn is_gemm(self) -> bool {
        matches!(
            self,
            KernelClass::Mha1 | KernelClass::Mha2 | KernelClass::Mha3 | KernelClass::Mha4 | KernelClass::Ff1 | KernelClass::Ff2
        )
    }

    pub fn is_ff(self) -> bool {
        matches!(self, KernelClass::Ff1 | KernelClass::Ff2)
    }
}

/// One compute kernel. `flops` counts GEMM FLOPs only (2*m*k*p);
/// elementwise work (softmax, layer norm) is carried in
/// `elementwise_count` and is zero-FLOP by this accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOp {
    pub id: String,
    pub class: KernelClass,
    /// Global block index (encoder blocks first, then decoder blocks).
    pub layer: u32,
    pub head: Option<u64>,
    pub gemm_dims: Option<(u64, u64, u64)>,
    pub elementwise_count: Option<u64>,
    pub flops: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub weight_bytes: u64,
    pub deps: Vec<String>,
    /// True for the second (cross-attention) MHA group of decoder blocks.
    pub cross_attention: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelGraph {
    pub ops: Vec<KernelOp>,
    pub model: ModelConfig,
}

impl KernelGraph {
    pub fn op(&self, id: &str) -> Option<&KernelOp> {
        self.ops.iter().find(|o| o.id == id)
    }

    /// GEMM FLOPs over the whole graph.
    pub fn total_gemm_flops(&self) -> u64 {
        self.ops.iter().map(|o| o.flops).sum()
    }

    pub fn total_elementwise_ops(&self) -> u64 {
        self.ops.iter().filter_map(|o| o.elementwise_count).sum()
    }

    pub fn total_weight_bytes(&self) -> u64 {
        self.ops.iter().map(|o| o.weight_bytes).sum()
    }

    pub fn ops_of_class(&self, class: KernelClass) -> impl Iterator<Item = &KernelOp> {
        self.ops.iter().filter(move |o| o.class == class)
    }
}

struct GraphBuilder {
    ops: Vec<KernelOp>,
    bytes_per_value: u64,
}

impl GraphBuilder {
    fn push_gemm(
        &mut self,
        id: String,
        class: KernelClass,
        layer: u32,
        head: Option<u64>,
        (m, k, p): (u64, u64, u64),
        input_bytes: u64,
        weight_bytes: u64,
        deps: Vec<String>,
        cross: bool,
    ) -> String {
        self.ops.push(KernelOp {
            id: id.clone(),
            class,
            layer,
            head,
            gemm_dims: Some((m, k, p)),
            elementwise_count: None,
            flops: 2 * m * k * p,
            input_bytes,
            output_bytes: m * p * self.bytes_per_value,
            weight_bytes,
            deps,
            cross_attention: cross,
        });
        id
    }

    fn push_elementwise(
        &mut self,
        id: String,
        class: KernelClass,
        layer: u32,
        count: u64,
        io_bytes: u64,
        deps: Vec<String>,
        cross: bool,
    ) -> String {
        self.ops.push(KernelOp {
            id: id.clone(),
            class,
            layer,
            head: None,
            gemm_dims: None,
            elementwise_count: Some(count),
            flops: 0,
            input_bytes: io_bytes,
            output_bytes: io_bytes,
            weight_bytes: 0,
            deps,
            cross_attention: cross,
        });
        id
    }
}

/// Builds one MHA group (MHA1-4 plus the following layer norm) and returns
/// the id of the closing norm op. `q_src` feeds the Q projections, `kv_src`
/// the K/V projections (these differ only for cross-attention).
#[allow(clippy::too_many_arguments)]
fn build_mha_group(
    b: &mut GraphBuilder,
    cfg: &ModelConfig,
    layer: u32,
    tag: &str,
    q_src: &str,
    kv_src: &str,
    cross: bool,
) -> String {
    let (n, d, dk, h) = (cfg.seq_len, cfg.d_model, cfg.head_dim, cfg.num_heads);
    let bv = cfg.bytes_per_value();
    let x_bytes = n * d * bv;
    let w_proj = d * dk * bv;

    // K/V projections: per head for MHA, a single shared pair for MQA.
    let (k_ids, v_ids): (Vec<String>, Vec<String>) = match cfg.attention_kind {
        AttentionKind::Mha => (0..h)
            .map(|i| {
                let k = b.push_gemm(
                    format!("l{layer:02}.{tag}.mha1k.h{i:02}"),
                    KernelClass::Mha1,
                    layer,
                    Some(i),
                    (n, d, dk),
                    x_bytes,
                    w_proj,
                    vec![kv_src.to_string()],
                    cross,
                );
                let v = b.push_gemm(
                    format!("l{layer:02}.{tag}.mha1v.h{i:02}"),
                    KernelClass::Mha1,
                    layer,
                    Some(i),
                    (n, d, dk),
                    x_bytes,
                    w_proj,
                    vec![kv_src.to_string()],
                    cross,
                );
                (k, v)
            })
            .unzip(),
        AttentionKind::Mqa => {
            let k = b.push_gemm(
                format!("l{layer:02}.{tag}.mha1k.shared"),
                KernelClass::Mha1,
                layer,
                None,
                (n, d, dk),
                x_bytes,
                w_proj,
                vec![kv_src.to_string()],
                cross,
            );
            let v = b.push_gemm(
                format!("l{layer:02}.{tag}.mha1v.shared"),
                KernelClass::Mha1,
                layer,
                None,
                (n, d, dk),
                x_bytes,
                w_proj,
                vec![kv_src.to_string()],
                cross,
            );
            (vec![k], vec![v])
        }
    };
    let shared_kv = matches!(cfg.attention_kind, AttentionKind::Mqa);

    let mut mha3_ids = Vec::with_capacity(h as usize);
    for i in 0..h {
        let q = b.push_gemm(
            format!("l{layer:02}.{tag}.mha1q.h{i:02}"),
            KernelClass::Mha1,
            layer,
            Some(i),
            (n, d, dk),
            x_bytes,
            w_proj,
            vec![q_src.to_string()],
            cross,
        );
        let k_id = if shared_kv { k_ids[0].clone() } else { k_ids[i as usize].clone() };
        let v_id = if shared_kv { v_ids[0].clone() } else { v_ids[i as usize].clone() };

        // Score GEMM plus fused softmax over the n*n score matrix.
        let mut mha2 = KernelOp {
            id: format!("l{layer:02}.{tag}.mha2.h{i:02}"),
            class: KernelClass::Mha2,
            layer,
            head: Some(i),
            gemm_dims: Some((n, dk, n)),
            elementwise_count: Some(cfg.softmax_ops_per_element * n * n),
            flops: 2 * n * dk * n,
            input_bytes: 2 * n * dk * bv,
            output_bytes: n * n * bv,
            weight_bytes: 0,
            deps: vec![q, k_id],
            cross_attention: cross,
        };
        mha2.deps.sort();
        let mha2_id = mha2.id.clone();
        b.ops.push(mha2);

        let mha3 = b.push_gemm(
            format!("l{layer:02}.{tag}.mha3.h{i:02}"),
            KernelClass::Mha3,
            layer,
            Some(i),
            (n, n, dk),
            n * n * bv + n * dk * bv,
            0,
            vec![mha2_id, v_id],
            cross,
        );
        mha3_ids.push(mha3);
    }

    let mha4 = b.push_gemm(
        format!("l{layer:02}.{tag}.mha4"),
        KernelClass::Mha4,
        layer,
        None,
        (n, d, d),
        x_bytes,
        d * d * bv,
        mha3_ids,
        cross,
    );
    b.push_elementwise(
        format!("l{layer:02}.{tag}.lnorm1"),
        KernelClass::Lnorm1,
        layer,
        cfg.lnorm_ops_per_element * n * d,
        x_bytes,
        vec![mha4],
        cross,
    )
}

/// Builds the full kernel graph for one inference pass.
///
/// Encoder-decoder models stack `num_layers` encoder blocks followed by
/// `num_layers` decoder blocks; each decoder block carries a second MHA
/// group whose K/V source is the final encoder output. Decoder-only models
/// reuse the encoder block shape (single-pass scoring, no generation loop).
/// Under parallel-attention topology the FF pair of a block consumes the
/// previous block output directly instead of the same block's MHA output.
pub fn build_kernel_graph(model: &ModelConfig) -> Result<KernelGraph> {
    model.validate()?;
    let cfg = model.clone();
    let (n, d) = (cfg.seq_len, cfg.d_model);
    let ff = cfg.ff_dim();
    let bv = cfg.bytes_per_value();
    let x_bytes = n * d * bv;

    let mut b = GraphBuilder {
        ops: Vec::new(),
        bytes_per_value: bv,
    };

    if cfg.block_count() == 0 {
        return Ok(KernelGraph { ops: b.ops, model: cfg });
    }

    // Embedding lookup: DRAM traffic only, no GEMM work.
    b.ops.push(KernelOp {
        id: "embed".to_string(),
        class: KernelClass::Embed,
        layer: 0,
        head: None,
        gemm_dims: None,
        elementwise_count: None,
        flops: 0,
        input_bytes: 0,
        output_bytes: x_bytes,
        weight_bytes: 0,
        deps: vec![],
        cross_attention: false,
    });

    let encoder_blocks = match cfg.block_kind {
        BlockKind::EncoderDecoder => cfg.num_layers,
        _ => 0,
    };
    let mut prev_out = "embed".to_string();
    let mut encoder_final: Option<String> = None;

    for layer in 0..cfg.block_count() {
        let decoder_side = matches!(cfg.block_kind, BlockKind::EncoderDecoder) && layer >= encoder_blocks;
        // The decoder stack restarts from the embedded input sequence.
        if decoder_side && layer == encoder_blocks {
            encoder_final = Some(prev_out.clone());
            prev_out = "embed".to_string();
        }
        let x_src = prev_out.clone();

        let mut attn_out = build_mha_group(&mut b, &cfg, layer, "self", &x_src, &x_src, false);
        if decoder_side {
            let enc = encoder_final.clone().expect("encoder output exists");
            attn_out = build_mha_group(&mut b, &cfg, layer, "cross", &attn_out, &enc, true);
        }

        let ff_src = match cfg.layer_topology {
            LayerTopology::Sequential => attn_out.clone(),
            LayerTopology::ParallelAttention => x_src.clone(),
        };
        let ff1 = b.push_gemm(
            format!("l{layer:02}.ff1"),
            KernelClass::Ff1,
            layer,
            None,
            (n, d, ff),
            x_bytes,
            d * ff * bv,
            vec![ff_src],
            false,
        );
        let ff2 = b.push_gemm(
            format!("l{layer:02}.ff2"),
            KernelClass::Ff2,
            layer,
            None,
            (n, ff, d),
            n * ff * bv,
            ff * d * bv,
            vec![ff1],
            false,
        );
        let mut lnorm2_deps = vec![ff2];
        if matches!(cfg.layer_topology, LayerTopology::ParallelAttention) {
            // Merge point of the concurrent attention and FF streams.
            lnorm2_deps.push(attn_out);
            lnorm2_deps.sort();
        }
        prev_out = b.push_elementwise(
            format!("l{layer:02}.lnorm2"),
            KernelClass::Lnorm2,
            layer,
            cfg.lnorm_ops_per_element * n * d,
            x_bytes,
            lnorm2_deps,
            false,
        );
    }

    Ok(KernelGraph { ops: b.ops, model: cfg })
}

/// Fraction of GEMM FLOPs spent in the feed-forward pair. Elementwise work
/// is excluded on both sides.
pub fn ff_gemm_fraction(graph: &KernelGraph) -> f64 {
    let total = graph.total_gemm_flops();
    if total == 0 {
        return 0.0;
    }
    let ff: u64 = graph.ops.iter().filter(|o| o.class.is_ff()).map(|o| o.flops).sum();
    ff as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReramPolicy {
    AttentionOnReram,
    FfOnReram,
}

/// Rewrite-pressure estimate for running part of the model inside ReRAM.
///
/// Two counting models are reported: `crossbar_writes_per_inference` counts
/// crossbar-granularity reprogramming events (total dynamic cells divided by
/// one crossbar's cell count), and `cell_writes_per_inference` counts raw
/// cell write events. `writes_per_cell_per_inference` is the uniform-wear
/// value used against the endurance budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewriteReport {
    pub policy: ReramPolicy,
    pub crossbar_writes_per_inference: Option<u64>,
    pub cell_writes_per_inference: u64,
    pub writes_per_cell_per_inference: f64,
    /// `endurance / writes_per_cell_per_inference`; None when no cell is
    /// ever rewritten during inference.
    pub lifetime_inferences: Option<f64>,
    /// FF weights are static per inference, so their rewrite pressure does
    /// not depend on sequence length; attention operands do.
    pub sequence_length_independent: bool,
    pub counting_model: String,
}

/// Counts ReRAM rewrite pressure for a policy choice.
///
/// Attention-on-ReRAM assumes one attention head per core (heads time-share
/// when there are more heads than `tier_cores`): every K and V matrix is
/// written once per block. FF-on-ReRAM assumes per-layer reprogramming with
/// the block weights spread uniformly over the tier.
pub fn reram_rewrite_report(
    model: &ModelConfig,
    core: &ReramParams,
    tier_cores: u64,
    policy: ReramPolicy,
) -> Result<RewriteReport> {
    model.validate()?;
    core.validate()?;
    if core.bits_per_cell > model.precision_bits {
        return Err(Error::InvalidInput(format!(
            "bits_per_cell {} exceeds precision_bits {}",
            core.bits_per_cell, model.precision_bits
        )));
    }
    if tier_cores == 0 {
        return Err(Error::InvalidInput("tier_cores must be nonzero".into()));
    }
    let cells_per_value = (model.precision_bits / core.bits_per_cell) as u64;
    let crossbar_cells = core.crossbar_rows * core.crossbar_cols;
    let core_cells = core.cell_capacity();
    let blocks = model.block_count() as u64;
    // Attention groups per block: decoder blocks of encoder-decoder models
    // carry a second (cross-attention) K/V pair.
    let groups = match model.block_kind {
        BlockKind::EncoderDecoder => blocks + model.num_layers as u64,
        _ => blocks,
    };

    match policy {
        ReramPolicy::AttentionOnReram => {
            let kv_sets_per_group = match model.attention_kind {
                AttentionKind::Mha => model.num_heads,
                AttentionKind::Mqa => 1,
            };
            // K and V matrices are n x d_k each.
            let cells_per_set = 2 * model.seq_len * model.head_dim * cells_per_value;
            let total_cells = groups * kv_sets_per_group * cells_per_set;
            let crossbar_writes = groups * kv_sets_per_group * cells_per_set.div_ceil(crossbar_cells);
            let assigned_cores = kv_sets_per_group.min(tier_cores).max(1);
            let writes_per_cell = total_cells as f64 / (assigned_cores * core_cells) as f64;
            Ok(RewriteReport {
                policy,
                crossbar_writes_per_inference: Some(crossbar_writes),
                cell_writes_per_inference: total_cells,
                writes_per_cell_per_inference: writes_per_cell,
                lifetime_inferences: lifetime(core.endurance, writes_per_cell),
                sequence_length_independent: false,
                counting_model: "crossbar-granularity (per-cell count reported alongside)".into(),
            })
        }
        ReramPolicy::FfOnReram => {
            let ff_cells_per_block = 2 * model.d_model * model.ff_dim() * cells_per_value;
            let total_cells = blocks * ff_cells_per_block;
            let tier_cells = tier_cores * core_cells;
            // Uniform-wear lower bound under per-layer reprogramming.
            let writes_per_cell = total_cells as f64 / tier_cells as f64;
            Ok(RewriteReport {
                policy,
                crossbar_writes_per_inference: None,
                cell_writes_per_inference: total_cells,
                writes_per_cell_per_inference: writes_per_cell,
                lifetime_inferences: lifetime(core.endurance, writes_per_cell),
                sequence_length_independent: true,
                counting_model: "per-layer reprogramming, uniform wear over the tier".into(),
            })
        }
    }
}

fn lifetime(endurance: u64, writes_per_cell: f64) -> Option<f64> {
    if writes_per_cell > 0.0 {
        Some(endurance as f64 / writes_per_cell)
    } else {
        None
    }
}
