//! `gspc verify`: run every kernel over randomized or table-derived
//! workloads and compare outputs against the reference convolution.

use std::path::PathBuf;

use clap::Args;

use gspc_core::gspc::native_simd_lanes;
use gspc_core::kernels::with_thread_pool;
use gspc_core::sweep::{dedup_layers, random_cases};
use gspc_core::tuner::enumerate_space;
use gspc_core::workloads::{LayerKind, LayerSpec};
use gspc_core::{
    allclose, default_tiles, direct_grouped_conv, run_kernel, ConvParams, KernelId, Tensor4,
    TileConfig, ATOL, RTOL,
};

use crate::common::{
    layer_workload, load_network_spec, parse_kernels, CliError, CliResult, VERIFY_CORRUPT_ENV,
};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Number of randomized workloads (ignored with --network or --table)
    #[arg(long, default_value_t = 100)]
    pub cases: usize,

    /// Seed for workload generation
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Verify the distinct layers of a builtin network instead
    #[arg(long)]
    pub network: Option<String>,

    /// Network variant (s, g2, g4, g8, g16, gn)
    #[arg(long)]
    pub variant: Option<String>,

    /// Verify the layers of a network table file instead
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Comma-separated kernels to verify
    #[arg(long, default_value = "gspc,direct,im2col")]
    pub kernels: String,

    /// Check every legal tile configuration, not just the default and the
    /// largest
    #[arg(long)]
    pub all_tiles: bool,

    /// Worker threads for the spatial-pack kernel (0 = sequential)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

struct Case {
    label: String,
    params: ConvParams,
    x: Tensor4,
    w: Tensor4,
}

fn build_cases(args: &VerifyArgs) -> CliResult<Vec<Case>> {
    if args.network.is_some() || args.table.is_some() {
        let spec = load_network_spec(
            args.table.as_deref(),
            args.network.as_deref(),
            args.variant.as_deref(),
        )?;
        let cases = dedup_layers(&spec.layers)
            .into_iter()
            .map(|(layer, _)| {
                let (key, x, w) = layer_workload(&layer, args.seed);
                Case {
                    label: key,
                    params: layer.params,
                    x,
                    w,
                }
            })
            .collect();
        return Ok(cases);
    }
    let cases = random_cases(args.seed, args.cases)
        .into_iter()
        .map(|c| {
            let layer = LayerSpec {
                kind: LayerKind::Standard,
                params: c.params,
                n: c.n,
                in_h: c.in_h,
                in_w: c.in_w,
            };
            let (key, x, w) = layer_workload(&layer, args.seed);
            Case {
                label: format!("{} ({key})", c.label),
                params: c.params,
                x,
                w,
            }
        })
        .collect();
    Ok(cases)
}

fn tilings(params: &ConvParams, all: bool) -> Vec<TileConfig> {
    if all {
        return enumerate_space(params);
    }
    let mut out = vec![default_tiles(params, native_simd_lanes())];
    let largest = TileConfig {
        t_o: params.kpg(),
        t_i: params.cpg(),
        unroll_kw: true,
    };
    if !out.contains(&largest) {
        out.push(largest);
    }
    out
}

pub fn run(args: VerifyArgs) -> CliResult<()> {
    let kernels = parse_kernels(&args.kernels)?;
    let cases = build_cases(&args)?;
    let mut corrupt_next = std::env::var_os(VERIFY_CORRUPT_ENV).is_some();
    if corrupt_next {
        eprintln!("warning: {VERIFY_CORRUPT_ENV} is set, corrupting one output on purpose");
    }
    let parallel = args.threads > 0;

    with_thread_pool(args.threads, || -> CliResult<()> {
        let mut comparisons = 0usize;
        let mut failures: Vec<String> = Vec::new();
        for case in &cases {
            let want = direct_grouped_conv(&case.x, &case.w, &case.params)?;
            for &kernel in &kernels {
                let configs = if kernel == KernelId::Gspc {
                    tilings(&case.params, args.all_tiles)
                } else {
                    vec![default_tiles(&case.params, native_simd_lanes())]
                };
                for tiles in configs {
                    let mut got = run_kernel(
                        kernel,
                        &case.x,
                        &case.w,
                        &case.params,
                        &tiles,
                        None,
                        parallel,
                    )?;
                    if corrupt_next {
                        got.data_mut()[0] += 1.0;
                        corrupt_next = false;
                    }
                    comparisons += 1;
                    if !allclose(&got, &want, RTOL, ATOL)? {
                        failures.push(match kernel {
                            KernelId::Gspc => format!(
                                "{} kernel={kernel} t_o={} t_i={} unroll={}",
                                case.label, tiles.t_o, tiles.t_i, tiles.unroll_kw
                            ),
                            _ => format!("{} kernel={kernel}", case.label),
                        });
                    }
                }
            }
        }
        if failures.is_empty() {
            println!(
                "verified {} workloads, {comparisons} kernel runs: all outputs match the reference",
                cases.len()
            );
            return Ok(());
        }
        for f in &failures {
            eprintln!("MISMATCH {f}");
        }
        Err(CliError::Verification(format!(
            "{} of {comparisons} kernel runs disagree with the reference",
            failures.len()
        )))
    })?
}
