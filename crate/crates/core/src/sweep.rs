//! Workload generators for verification sweeps: randomized layer
//! configurations spanning the supported parameter ranges, and helpers for
//! deduplicating the layers of the shipped network tables so a sweep runs
//! each distinct shape once.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::conv_ref::ConvParams;
use crate::tensor::PaddingSpec;
use crate::workloads::{LayerSpec, NetworkSpec};

/// One randomly drawn convolution workload.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCase {
    pub label: String,
    pub params: ConvParams,
    pub n: usize,
    pub in_h: usize,
    pub in_w: usize,
}

/// Draws `count` valid configurations covering group counts 1/2/4/8 and
/// depthwise, kernel sizes 1 and 3, strides 1 and 2, padding 0 and 1, and
/// channel counts up to 32, deterministically from `seed`.
pub fn random_cases(seed: u64, count: usize) -> Vec<SweepCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        // Channel structure: either a grouped layout with per-group channel
        // counts, or a depthwise one (groups = channels).
        let (groups, c_in, c_out) = if rng.gen_bool(0.2) {
            let c = [4usize, 8, 16, 32][rng.gen_range(0..4)];
            (c, c, c)
        } else {
            let g = [1usize, 2, 4, 8][rng.gen_range(0..4)];
            let cpg = [1usize, 2, 3, 4][rng.gen_range(0..4)];
            let kpg = [1usize, 2, 3, 4][rng.gen_range(0..4)];
            (g, g * cpg, g * kpg)
        };
        let k = if rng.gen_bool(0.5) { 1 } else { 3 };
        let s = if rng.gen_bool(0.5) { 1 } else { 2 };
        let pad = if k == 3 && rng.gen_bool(0.5) { 1 } else { 0 };
        let n = rng.gen_range(1..=2);
        let in_hw = rng.gen_range(k.max(4)..=10);
        let params = ConvParams::new(
            c_in,
            c_out,
            k,
            k,
            s,
            s,
            PaddingSpec { h: pad, w: pad },
            groups,
        )
        .expect("generated configuration must be valid");
        out.push(SweepCase {
            label: format!("case{i}-g{groups}-c{c_in}x{c_out}-k{k}-s{s}-p{pad}-n{n}-in{in_hw}"),
            params,
            n,
            in_h: in_hw,
            in_w: in_hw,
        });
    }
    out
}

/// Collapses repeated layers to one representative each, preserving first
/// appearance order and counting multiplicity. Two layers are the same
/// workload when their convolution parameters, batch and input resolution
/// all match.
pub fn dedup_layers(layers: &[LayerSpec]) -> Vec<(LayerSpec, usize)> {
    let mut out: Vec<(LayerSpec, usize)> = Vec::new();
    for layer in layers {
        match out.iter_mut().find(|(seen, _)| {
            seen.params == layer.params
                && seen.n == layer.n
                && (seen.in_h, seen.in_w) == (layer.in_h, layer.in_w)
        }) {
            Some((_, count)) => *count += 1,
            None => out.push((layer.clone(), 1)),
        }
    }
    out
}

/// Distinct layer workloads across several networks, first appearance order.
pub fn unique_network_layers(nets: &[NetworkSpec]) -> Vec<LayerSpec> {
    let all: Vec<LayerSpec> = nets.iter().flat_map(|n| n.layers.iter().cloned()).collect();
    dedup_layers(&all).into_iter().map(|(l, _)| l).collect()
}
