//! Shared plumbing for the subcommands: error-to-exit-code mapping, list
//! argument parsing, workload materialization and tuning-record locations.

use std::env;
use std::fmt;
use std::path::{Path, PathBuf};

use gspc_core::tensor::fnv1a;
use gspc_core::tuner::layer_key;
use gspc_core::workloads::{
    builtin_network, load_network_table, normalize_variant, variant_rank, LayerSpec, NetworkSpec,
    VARIANT_KEYS,
};
use gspc_core::{Error, KernelId, Shape4, Tensor4};

/// Names the default directory for tuning records.
pub const RECORD_DIR_ENV: &str = "GSPC_RECORD_DIR";

/// Negative-control hook: when this variable is set, `verify` corrupts the
/// first kernel output before comparing it, which must make the run fail.
/// Exists so tests can prove mismatches are detected, not silently passed.
pub const VERIFY_CORRUPT_ENV: &str = "GSPC_VERIFY_CORRUPT";

pub enum CliError {
    Core(Error),
    /// A kernel output disagreed with the reference convolution.
    Verification(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// 2 verification failure, 3 configuration or usage, 4 I/O.
pub fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Verification(_) => 2,
        CliError::Core(Error::Tuning(_)) => 2,
        CliError::Core(Error::Io(_)) => 4,
        CliError::Core(_) => 3,
    }
}

/// Parses a comma-separated kernel list, preserving order, dropping repeats.
pub fn parse_kernels(list: &str) -> CliResult<Vec<KernelId>> {
    let mut out = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let id: KernelId = tok.parse()?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(Error::config("kernel list is empty").into());
    }
    Ok(out)
}

/// Parses a comma-separated variant list into canonical keys ordered S
/// first, ascending group counts after. `None` means all six.
pub fn parse_variants(list: Option<&str>) -> CliResult<Vec<String>> {
    let mut keys: Vec<String> = match list {
        None => VARIANT_KEYS.iter().map(|s| s.to_string()).collect(),
        Some(list) => {
            let mut keys = Vec::new();
            for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let key = normalize_variant(tok)?;
                if !keys.contains(&key) {
                    keys.push(key);
                }
            }
            if keys.is_empty() {
                return Err(Error::config("variant list is empty").into());
            }
            keys
        }
    };
    keys.sort_by_key(|k| variant_rank(k));
    Ok(keys)
}

/// Resolves the workload source shared by several commands: an explicit
/// table file wins over a builtin network name.
pub fn load_network_spec(
    table: Option<&Path>,
    network: Option<&str>,
    variant: Option<&str>,
) -> CliResult<NetworkSpec> {
    match (table, network) {
        (Some(_), Some(_)) => {
            Err(Error::config("pass either --table or --network, not both").into())
        }
        (Some(path), None) => Ok(load_network_table(path)?),
        (None, Some(name)) => {
            let variant = variant.ok_or_else(|| Error::config("--network needs --variant"))?;
            Ok(builtin_network(name, variant)?)
        }
        (None, None) => Err(Error::config("pass --network or --table").into()),
    }
}

/// Deterministic input and weight tensors for a layer. The seeds mix the
/// layer key with the user seed, so reruns see identical data and different
/// layers see different data. Values are drawn from [0, 1]: with same-sign
/// data the summation-order noise of a kernel stays proportional to the
/// output it lands in, so the fixed verification tolerances hold at any
/// channel depth; signed data would cancel to near-zero outputs whose
/// relative error is unbounded.
pub fn layer_workload(layer: &LayerSpec, seed: u64) -> (String, Tensor4, Tensor4) {
    let key = layer_key(&layer.params, layer.n, layer.in_h, layer.in_w);
    let base = fnv1a(key.bytes()) ^ seed;
    let shape = Shape4::new(layer.n, layer.params.c_in, layer.in_h, layer.in_w)
        .expect("parsed layers have positive extents");
    let x = Tensor4::random_in(shape, base, 0.0, 1.0);
    let w = Tensor4::random_in(
        layer.params.weight_shape(),
        base.wrapping_add(0x9E37_79B9_7F4A_7C15),
        0.0,
        1.0,
    );
    (key, x, w)
}

/// Tuning-record directory: explicit flag, then the environment variable.
pub fn resolve_record_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| env::var_os(RECORD_DIR_ENV).map(PathBuf::from))
}

pub fn record_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.tune.json"))
}

pub fn ns_to_ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}
