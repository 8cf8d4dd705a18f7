//! `gspc bench`: time kernels over the convolution layers of a network
//! table and report per-layer and total results.
//!
//! Repeated layer shapes are measured once and their medians weighted by
//! multiplicity in the totals, so a TOTAL row reflects the whole table.
//! When the S variant is benchmarked in the same run, grouped variants also
//! get a predicted total (S time scaled by the MAC ratio) and the ratio of
//! measured to predicted time.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use gspc_core::gspc::native_simd_lanes;
use gspc_core::kernels::with_thread_pool;
use gspc_core::sweep::dedup_layers;
use gspc_core::tuner::{check_record_key, load_record, platform_id, MeasureOpts};
use gspc_core::workloads::{expected_time, normalize_variant};
use gspc_core::{
    builtin_network, default_tiles, measure_kernel, KernelId, NetworkSpec, TileConfig,
};

use crate::common::{
    layer_workload, load_network_spec, ns_to_ms, parse_kernels, parse_variants, record_path,
    resolve_record_dir, CliResult,
};

/// Column order of the CSV output. Fixed: downstream tooling parses it.
pub const CSV_HEADER: &str =
    "network,variant,layer,kernel,t_o,t_i,unroll,median_ms,weight_pack_ms,macs,params,expected_ms,ratio";

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Builtin network to benchmark (wrn40_2, resnet34, mobilenet_v2)
    #[arg(long)]
    pub network: Option<String>,

    /// Comma-separated variants, default all six (s,g2,g4,g8,g16,gn)
    #[arg(long)]
    pub variants: Option<String>,

    /// Benchmark the layers of a network table file instead
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Comma-separated kernels to time
    #[arg(long, default_value = "gspc,direct,im2col")]
    pub kernels: String,

    /// Timed repetitions per measurement (median is reported)
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    /// Untimed warmup runs per measurement
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,

    /// Worker threads for the spatial-pack kernel (0 = sequential)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    /// Seed for the synthetic layer inputs and weights
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Directory of tuning records to apply to the spatial-pack kernel
    /// (falls back to $GSPC_RECORD_DIR, then to untuned defaults)
    #[arg(long)]
    pub tuned: Option<PathBuf>,

    /// Write results as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Write results as JSON (adds checksums and multiplicities)
    #[arg(long)]
    pub json: Option<PathBuf>,
}

struct Row {
    network: String,
    variant: String,
    layer: String,
    kernel: KernelId,
    tiles: Option<TileConfig>,
    median_ms: f64,
    weight_pack_ms: Option<f64>,
    macs: u64,
    params: u64,
    expected_ms: Option<f64>,
    ratio: Option<f64>,
    checksum: Option<u64>,
    reps: usize,
    count: usize,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_ms(v: f64) -> String {
    format!("{v:.4}")
}

impl Row {
    fn csv_line(&self) -> String {
        let (t_o, t_i, unroll) = match self.tiles {
            Some(t) => (Some(t.t_o), Some(t.t_i), Some(t.unroll_kw)),
            None => (None, None, None),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.network,
            self.variant,
            self.layer,
            self.kernel,
            opt(&t_o),
            opt(&t_i),
            opt(&unroll),
            fmt_ms(self.median_ms),
            opt(&self.weight_pack_ms.map(fmt_ms)),
            self.macs,
            self.params,
            opt(&self.expected_ms.map(fmt_ms)),
            opt(&self.ratio.map(|r| format!("{r:.3}"))),
        )
    }

    fn json_value(&self) -> serde_json::Value {
        json!({
            "network": self.network,
            "variant": self.variant,
            "layer": self.layer,
            "kernel": self.kernel.name(),
            "tiles": self.tiles.map(|t| json!({"t_o": t.t_o, "t_i": t.t_i, "unroll_kw": t.unroll_kw})),
            "median_ms": self.median_ms,
            "weight_pack_ms": self.weight_pack_ms,
            "macs": self.macs,
            "params": self.params,
            "expected_ms": self.expected_ms,
            "ratio": self.ratio,
            "checksum": self.checksum.map(|c| format!("{c:#018x}")),
            "reps": self.reps,
            "count": self.count,
        })
    }

    fn print_human(&self) {
        let tiles = match self.tiles {
            Some(t) => format!(
                "({},{},{})",
                t.t_o,
                t.t_i,
                if t.unroll_kw { "u" } else { "r" }
            ),
            None => "-".to_string(),
        };
        let expected = match (self.expected_ms, self.ratio) {
            (Some(e), Some(r)) => format!("  expected={} ratio={r:.3}", fmt_ms(e)),
            _ => String::new(),
        };
        println!(
            "{:<12} {:<5} {:<44} {:<7} {:>10} {:>12} ms{}",
            self.network,
            self.variant,
            self.layer,
            self.kernel.name(),
            tiles,
            fmt_ms(self.median_ms),
            expected
        );
    }
}

/// Tile choice for one layer: a tuning record when present and matching,
/// otherwise the untuned default.
fn tiles_for_layer(
    dir: Option<&std::path::Path>,
    key: &str,
    layer: &gspc_core::workloads::LayerSpec,
) -> CliResult<TileConfig> {
    let fallback = default_tiles(&layer.params, native_simd_lanes());
    let Some(dir) = dir else {
        return Ok(fallback);
    };
    let path = record_path(dir, key);
    if !path.exists() {
        return Ok(fallback);
    }
    let record = load_record(&path)?;
    check_record_key(&record, &layer.params, layer.n, layer.in_h, layer.in_w)?;
    if record.platform != platform_id() {
        eprintln!(
            "warning: record {} was tuned on {}, this is {}",
            path.display(),
            record.platform,
            platform_id()
        );
    }
    Ok(record.best)
}

fn bench_network(
    spec: &NetworkSpec,
    kernels: &[KernelId],
    args: &BenchArgs,
    record_dir: Option<&std::path::Path>,
    s_totals: &mut HashMap<(String, KernelId), (f64, u64)>,
    rows: &mut Vec<Row>,
) -> CliResult<()> {
    let opts = MeasureOpts {
        warmup: args.warmup,
        reps: args.reps,
        parallel: args.threads > 0,
    };
    let layers = dedup_layers(&spec.layers);
    let variant_key = normalize_variant(&spec.variant)?;
    // kernel -> (sum ms, sum pack ms, sum macs, sum params)
    let mut totals: HashMap<KernelId, (f64, f64, u64, u64)> = HashMap::new();

    for (layer, count) in &layers {
        let (key, x, w) = layer_workload(layer, args.seed);
        let layer_macs = layer.macs()?;
        let layer_params = layer.weight_count();
        let tiles = tiles_for_layer(record_dir, &key, layer)?;
        for &kernel in kernels {
            let m = measure_kernel(kernel, &x, &w, &layer.params, &tiles, &opts, None)?;
            let median_ms = ns_to_ms(m.median_ns);
            let weight_pack_ms = (kernel == KernelId::Gspc).then(|| ns_to_ms(m.weight_pack_ns));
            let entry = totals.entry(kernel).or_default();
            entry.0 += median_ms * *count as f64;
            entry.1 += weight_pack_ms.unwrap_or(0.0) * *count as f64;
            entry.2 += layer_macs * *count as u64;
            entry.3 += layer_params * *count as u64;
            rows.push(Row {
                network: spec.name.clone(),
                variant: spec.variant.clone(),
                layer: key.clone(),
                kernel,
                tiles: (kernel == KernelId::Gspc).then_some(tiles),
                median_ms,
                weight_pack_ms,
                macs: layer_macs,
                params: layer_params,
                expected_ms: None,
                ratio: None,
                checksum: Some(m.checksum),
                reps: m.reps,
                count: *count,
            });
        }
    }

    let mut warned = false;
    for &kernel in kernels {
        let (ms, pack_ms, macs, params) = totals[&kernel];
        let mut expected_ms = None;
        let mut ratio = None;
        if variant_key == "s" {
            s_totals.insert((spec.name.clone(), kernel), (ms, macs));
        } else {
            match s_totals.get(&(spec.name.clone(), kernel)) {
                Some(&(s_ms, s_macs)) => {
                    let e = expected_time(s_ms, s_macs, macs)?;
                    ratio = Some(ms / e);
                    expected_ms = Some(e);
                }
                None if !warned => {
                    eprintln!(
                        "warning: no S-variant measurements for {} this run, expected_ms left blank",
                        spec.name
                    );
                    warned = true;
                }
                None => {}
            }
        }
        rows.push(Row {
            network: spec.name.clone(),
            variant: spec.variant.clone(),
            layer: "TOTAL".to_string(),
            kernel,
            tiles: None,
            median_ms: ms,
            weight_pack_ms: (kernel == KernelId::Gspc).then_some(pack_ms),
            macs,
            params,
            expected_ms,
            ratio,
            checksum: None,
            reps: args.reps,
            count: spec.layers.len(),
        });
    }
    Ok(())
}

pub fn run(args: BenchArgs) -> CliResult<()> {
    let kernels = parse_kernels(&args.kernels)?;
    let record_dir = resolve_record_dir(args.tuned.clone());

    // S sorts first, so grouped variants can be predicted from its totals.
    let specs: Vec<NetworkSpec> = if args.table.is_some() {
        vec![load_network_spec(
            args.table.as_deref(),
            args.network.as_deref(),
            args.variant_conflict()?,
        )?]
    } else {
        let name = args
            .network
            .as_deref()
            .ok_or_else(|| gspc_core::Error::config("pass --network or --table"))?;
        parse_variants(args.variants.as_deref())?
            .iter()
            .map(|v| builtin_network(name, v).map_err(Into::into))
            .collect::<CliResult<Vec<_>>>()?
    };

    let mut rows: Vec<Row> = Vec::new();
    let mut s_totals: HashMap<(String, KernelId), (f64, u64)> = HashMap::new();
    with_thread_pool(args.threads, || -> CliResult<()> {
        for spec in &specs {
            bench_network(
                spec,
                &kernels,
                &args,
                record_dir.as_deref(),
                &mut s_totals,
                &mut rows,
            )?;
        }
        Ok(())
    })??;

    for row in &rows {
        row.print_human();
    }

    if let Some(path) = &args.csv {
        let mut out = String::with_capacity(rows.len() * 96);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        fs::write(path, out).map_err(gspc_core::Error::from)?;
    }
    if let Some(path) = &args.json {
        let values: Vec<serde_json::Value> = rows.iter().map(Row::json_value).collect();
        let mut f = fs::File::create(path).map_err(gspc_core::Error::from)?;
        serde_json::to_writer_pretty(&mut f, &values)
            .map_err(|e| gspc_core::Error::config(format!("json write failed: {e}")))?;
        f.write_all(b"\n").map_err(gspc_core::Error::from)?;
    }
    Ok(())
}

impl BenchArgs {
    /// `--variants` has no meaning for a single table file.
    fn variant_conflict(&self) -> CliResult<Option<&str>> {
        if self.variants.is_some() {
            return Err(gspc_core::Error::config(
                "--variants only applies to builtin networks; a table file fixes the variant",
            )
            .into());
        }
        Ok(None)
    }
}
