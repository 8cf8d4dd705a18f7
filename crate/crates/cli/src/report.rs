//! `gspc report`: print the cost model's parameter and MAC totals for
//! network variants, optionally with predicted runtimes scaled from a
//! measured S-variant time.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use gspc_core::workloads::{expected_time, NETWORK_NAMES};
use gspc_core::{builtin_network, network_totals, Error, NetworkSpec};

use crate::common::{load_network_spec, parse_variants, CliResult};

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Comma-separated builtin networks (default: all three)
    #[arg(long)]
    pub networks: Option<String>,

    /// Comma-separated variants (default: all six)
    #[arg(long)]
    pub variants: Option<String>,

    /// Report on a network table file instead of builtins
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Measured S-variant runtime in ms; adds a predicted-runtime column
    /// scaled by each variant's MAC ratio (builtin networks only)
    #[arg(long)]
    pub s_time: Option<f64>,

    /// Also print one line per convolution layer (single network only)
    #[arg(long)]
    pub per_layer: bool,

    /// Write the totals as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

const REPORT_CSV_HEADER: &str = "network,variant,top1,params,macs,expected_ms";

fn print_spec(
    spec: &NetworkSpec,
    s_macs: Option<u64>,
    s_time: Option<f64>,
    per_layer: bool,
    csv: &mut Option<String>,
) -> CliResult<()> {
    let totals = network_totals(spec)?;
    let expected = match (s_time, s_macs) {
        (Some(t), Some(s)) => Some(expected_time(t, s, totals.total_macs)?),
        _ => None,
    };
    let expected_str = expected.map(|e| format!("{e:.2}")).unwrap_or_default();
    let top1 = format!("{:.2}", spec.top1);
    println!(
        "{:<12} {:<5} top1={:<6} params={:<10} macs={:<12} {}",
        spec.name,
        spec.variant,
        top1,
        totals.total_params,
        totals.total_macs,
        if expected_str.is_empty() {
            String::new()
        } else {
            format!("expected={expected_str} ms")
        }
    );
    if let Some(buf) = csv {
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            spec.name,
            spec.variant,
            spec.top1,
            totals.total_params,
            totals.total_macs,
            expected_str
        ));
    }
    if per_layer {
        for cost in &totals.per_layer {
            let layer = &spec.layers[cost.index];
            println!(
                "  layer {:>3} {:<9} {:>4}x{:<4} ch {:>4}->{:<4} g={:<3} params={:<9} macs={}",
                cost.index,
                cost.kind,
                layer.in_h,
                layer.in_w,
                layer.params.c_in,
                layer.params.c_out,
                layer.params.groups,
                cost.params,
                cost.macs
            );
        }
        for extra in &spec.extras {
            println!(
                "  extra {:<22} params={:<9} macs={}",
                extra.label, extra.params, extra.macs
            );
        }
    }
    Ok(())
}

pub fn run(args: ReportArgs) -> CliResult<()> {
    let mut csv_buf = args.csv.as_ref().map(|_| {
        let mut s = String::from(REPORT_CSV_HEADER);
        s.push('\n');
        s
    });

    if let Some(table) = &args.table {
        if args.s_time.is_some() {
            return Err(Error::config(
                "--s-time needs a builtin S variant as reference; not available with --table",
            )
            .into());
        }
        if args.networks.is_some() || args.variants.is_some() {
            return Err(Error::config("--networks/--variants do not apply to a table file").into());
        }
        let spec = load_network_spec(Some(table), None, None)?;
        print_spec(&spec, None, None, args.per_layer, &mut csv_buf)?;
    } else {
        let networks: Vec<String> = match &args.networks {
            None => NETWORK_NAMES.iter().map(|s| s.to_string()).collect(),
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        };
        let variants = parse_variants(args.variants.as_deref())?;
        if args.per_layer && (networks.len() > 1 || variants.len() > 1) {
            return Err(Error::config(
                "--per-layer needs a single network and variant (or --table)",
            )
            .into());
        }
        for name in &networks {
            let s_macs = match args.s_time {
                Some(_) => Some(network_totals(&builtin_network(name, "s")?)?.total_macs),
                None => None,
            };
            for variant in &variants {
                let spec = builtin_network(name, variant)?;
                print_spec(&spec, s_macs, args.s_time, args.per_layer, &mut csv_buf)?;
            }
        }
    }

    if let (Some(path), Some(buf)) = (&args.csv, &csv_buf) {
        fs::write(path, buf).map_err(Error::from)?;
    }
    Ok(())
}
