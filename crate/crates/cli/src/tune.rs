//! `gspc tune`: search tile configurations for each distinct layer of a
//! network table and persist one record per layer for later benchmark runs.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use gspc_core::gspc::native_simd_lanes;
use gspc_core::kernels::with_thread_pool;
use gspc_core::sweep::dedup_layers;
use gspc_core::tuner::{check_record_key, load_record, tune, MeasureOpts, Strategy};
use gspc_core::{default_tiles, Error};

use crate::common::{
    layer_workload, load_network_spec, ns_to_ms, record_path, resolve_record_dir, CliResult,
};

#[derive(Args, Debug)]
pub struct TuneArgs {
    /// Builtin network whose layers to tune
    #[arg(long)]
    pub network: Option<String>,

    /// Network variant (s, g2, g4, g8, g16, gn)
    #[arg(long)]
    pub variant: Option<String>,

    /// Tune the layers of a network table file instead
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Record directory (falls back to $GSPC_RECORD_DIR, then ./tune-records)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Configurations to try per layer; 0 measures the whole space
    #[arg(long, default_value_t = 0)]
    pub budget: usize,

    /// Seed for input data and random search
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Timed repetitions per configuration
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    /// Untimed warmup runs per configuration
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,

    /// Worker threads for the spatial-pack kernel (0 = sequential)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    /// Re-tune layers that already have a matching record
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: TuneArgs) -> CliResult<()> {
    let spec = load_network_spec(
        args.table.as_deref(),
        args.network.as_deref(),
        args.variant.as_deref(),
    )?;
    let dir = resolve_record_dir(args.out.clone()).unwrap_or_else(|| PathBuf::from("tune-records"));
    fs::create_dir_all(&dir).map_err(Error::from)?;

    let strategy = if args.budget == 0 {
        Strategy::Exhaustive
    } else {
        Strategy::Random {
            budget: args.budget,
            seed: args.seed,
        }
    };
    let opts = MeasureOpts {
        warmup: args.warmup,
        reps: args.reps,
        parallel: args.threads > 0,
    };

    let layers = dedup_layers(&spec.layers);
    let mut written = 0usize;
    with_thread_pool(args.threads, || -> CliResult<()> {
        for (layer, count) in &layers {
            let (key, x, w) = layer_workload(layer, args.seed);
            let path = record_path(&dir, &key);
            if !args.force && path.exists() {
                let cached = load_record(&path)?;
                if check_record_key(&cached, &layer.params, layer.n, layer.in_h, layer.in_w).is_ok()
                {
                    println!(
                        "{key} x{count}: cached best t_o={} t_i={} unroll={}",
                        cached.best.t_o, cached.best.t_i, cached.best.unroll_kw
                    );
                    continue;
                }
                eprintln!("warning: stale record at {}, re-tuning", path.display());
            }
            let record = tune(&x, &w, &layer.params, strategy, &opts)?;
            let best_ns = record
                .trials
                .iter()
                .filter(|t| t.valid)
                .map(|t| t.median_ns)
                .min()
                .expect("tune returned, so a valid trial exists");
            let fallback = default_tiles(&layer.params, native_simd_lanes());
            let default_ns = record
                .trials
                .iter()
                .find(|t| t.tiles == fallback)
                .map(|t| t.median_ns)
                .expect("tune always measures the default configuration");
            println!(
                "{key} x{count}: {} trials, best t_o={} t_i={} unroll={} {:.4} ms (default {:.4} ms, {:.2}x)",
                record.trials.len(),
                record.best.t_o,
                record.best.t_i,
                record.best.unroll_kw,
                ns_to_ms(best_ns),
                ns_to_ms(default_ns),
                default_ns as f64 / best_ns as f64
            );
            gspc_core::tuner::save_record(&path, &record)?;
            written += 1;
        }
        Ok(())
    })??;
    println!(
        "tuned {written} of {} distinct layers into {}",
        layers.len(),
        dir.display()
    );
    Ok(())
}
