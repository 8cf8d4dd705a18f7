//! Measurement and tile-configuration search for the spatial-pack kernel.
//!
//! A trial times one kernel on one workload: untimed warmup runs, then a
//! fixed number of timed repetitions whose median wall time is kept. For the
//! spatial-pack kernel the weights are packed once outside the timed region
//! (models reusing weights pack them ahead of time) while input packing and
//! output unpacking stay inside it.
//!
//! Every trial is verified against the reference convolution. Different tile
//! configurations reorder the floating-point accumulation, so outputs are
//! compared with tolerances rather than bit patterns; a trial that passes
//! records the reference output's checksum (making checksums comparable
//! across configurations), a failing one records its own raw checksum and is
//! excluded from the search.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv_ref::{direct_grouped_conv, ConvParams};
use crate::error::{Error, Result};
use crate::gspc::{default_tiles, divisors, native_simd_lanes, pack_kernels, TileConfig};
use crate::kernels::{run_kernel, KernelId};
use crate::tensor::{allclose, Tensor4, ATOL, RTOL};

/// How [`tune`] walks the tile-configuration space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Measure every legal configuration.
    Exhaustive,
    /// Measure a seeded sample of at most `budget` configurations, plus the
    /// default configuration if the sample missed it.
    Random { budget: usize, seed: u64 },
}

/// Measurement controls. `reps` must be at least 1; the median is taken
/// over the timed repetitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureOpts {
    pub warmup: usize,
    pub reps: usize,
    pub parallel: bool,
}

impl Default for MeasureOpts {
    fn default() -> Self {
        MeasureOpts {
            warmup: 1,
            reps: 3,
            parallel: false,
        }
    }
}

/// One timed, verified kernel run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub median_ns: u64,
    pub reps: usize,
    /// Time spent packing weights ahead of the timed region (spatial-pack
    /// kernel only, 0 for the baselines).
    pub weight_pack_ns: u64,
    /// Reference checksum when `valid`, raw output checksum otherwise.
    pub checksum: u64,
    pub valid: bool,
}

/// One tuning trial: a tile configuration and its measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub tiles: TileConfig,
    pub median_ns: u64,
    pub reps: usize,
    pub checksum: u64,
    pub valid: bool,
}

pub const RECORD_VERSION: u32 = 1;

/// Persisted outcome of tuning one workload on one platform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub version: u32,
    pub layer_key: String,
    pub platform: String,
    pub simd_lanes: usize,
    pub trials: Vec<TrialResult>,
    pub best: TileConfig,
}

/// Stable identifier of a workload, used to match records to layers:
/// `n1-cin16-cout32-k3x3-s1x1-p1x1-g4-in14x14`.
pub fn layer_key(params: &ConvParams, n: usize, in_h: usize, in_w: usize) -> String {
    format!(
        "n{n}-cin{}-cout{}-k{}x{}-s{}x{}-p{}x{}-g{}-in{in_h}x{in_w}",
        params.c_in,
        params.c_out,
        params.k_h,
        params.k_w,
        params.s_h,
        params.s_w,
        params.pad.h,
        params.pad.w,
        params.groups
    )
}

/// Identifies the machine a record was tuned on.
pub fn platform_id() -> String {
    format!("{}-{}lane", std::env::consts::ARCH, native_simd_lanes())
}

/// All legal tile configurations for `params`: ascending divisors of the
/// per-group kernel count crossed with ascending divisors of the per-group
/// channel count, each with and without kernel-width unrolling.
pub fn enumerate_space(params: &ConvParams) -> Vec<TileConfig> {
    let mut out = Vec::new();
    for &t_o in &divisors(params.kpg()) {
        for &t_i in &divisors(params.cpg()) {
            for unroll_kw in [false, true] {
                out.push(TileConfig {
                    t_o,
                    t_i,
                    unroll_kw,
                });
            }
        }
    }
    out
}

/// Upper median of the samples. With an odd count this is the true median.
pub(crate) fn median(mut samples: Vec<u64>) -> u64 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

/// Times `id` on one workload and verifies the output. When `oracle` is
/// `None` the reference result is computed internally.
pub fn measure_kernel(
    id: KernelId,
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
    opts: &MeasureOpts,
    oracle: Option<&Tensor4>,
) -> Result<Measurement> {
    if opts.reps == 0 {
        return Err(Error::config("measurement needs at least one repetition"));
    }
    let computed;
    let want = match oracle {
        Some(t) => t,
        None => {
            computed = direct_grouped_conv(x, w, params)?;
            &computed
        }
    };

    let mut weight_pack_ns = 0u64;
    let prepacked = if id == KernelId::Gspc {
        let t0 = Instant::now();
        let pk = pack_kernels(w, params, tiles)?;
        weight_pack_ns = t0.elapsed().as_nanos() as u64;
        Some(pk)
    } else {
        None
    };

    for _ in 0..opts.warmup {
        let y = run_kernel(id, x, w, params, tiles, prepacked.as_ref(), opts.parallel)?;
        std::hint::black_box(&y);
    }
    let mut samples = Vec::with_capacity(opts.reps);
    let mut last = None;
    for _ in 0..opts.reps {
        let t0 = Instant::now();
        let y = run_kernel(id, x, w, params, tiles, prepacked.as_ref(), opts.parallel)?;
        samples.push(t0.elapsed().as_nanos() as u64);
        std::hint::black_box(&y);
        last = Some(y);
    }
    let y = last.expect("reps >= 1");
    let valid = allclose(&y, want, RTOL, ATOL)?;
    let checksum = if valid { want.checksum() } else { y.checksum() };
    Ok(Measurement {
        median_ns: median(samples),
        reps: opts.reps,
        weight_pack_ns,
        checksum,
        valid,
    })
}

/// Searches tile configurations for the fastest valid one on this workload.
/// The default configuration is always among the trials. Fails if no trial
/// validates.
pub fn tune(
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    strategy: Strategy,
    opts: &MeasureOpts,
) -> Result<TuningRecord> {
    let space = enumerate_space(params);
    let lanes = native_simd_lanes();
    let fallback = default_tiles(params, lanes);
    let mut picks: Vec<TileConfig> = match strategy {
        Strategy::Exhaustive => space,
        Strategy::Random { budget, seed } => {
            if budget == 0 {
                return Err(Error::Tuning(
                    "random strategy needs a nonzero budget".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..space.len()).collect();
            idx.shuffle(&mut rng);
            idx.truncate(budget);
            idx.sort_unstable();
            idx.into_iter().map(|i| space[i]).collect()
        }
    };
    if !picks.contains(&fallback) {
        picks.push(fallback);
    }

    let oracle = direct_grouped_conv(x, w, params)?;
    let mut trials = Vec::with_capacity(picks.len());
    for tiles in &picks {
        let m = measure_kernel(KernelId::Gspc, x, w, params, tiles, opts, Some(&oracle))?;
        trials.push(TrialResult {
            tiles: *tiles,
            median_ns: m.median_ns,
            reps: m.reps,
            checksum: m.checksum,
            valid: m.valid,
        });
    }
    let best = trials
        .iter()
        .filter(|t| t.valid)
        .min_by_key(|t| t.median_ns)
        .ok_or_else(|| {
            Error::Tuning(format!(
                "no tile configuration validated for {}",
                layer_key(params, x.shape().n, x.shape().h, x.shape().w)
            ))
        })?
        .tiles;
    Ok(TuningRecord {
        version: RECORD_VERSION,
        layer_key: layer_key(params, x.shape().n, x.shape().h, x.shape().w),
        platform: platform_id(),
        simd_lanes: lanes,
        trials,
        best,
    })
}

pub fn save_record(path: &Path, record: &TuningRecord) -> Result<()> {
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| Error::config(format!("record serialization failed: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn load_record(path: &Path) -> Result<TuningRecord> {
    let text = fs::read_to_string(path)?;
    let record: TuningRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
        origin: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    if record.version != RECORD_VERSION {
        return Err(Error::config(format!(
            "record version {} unsupported, expected {RECORD_VERSION}",
            record.version
        )));
    }
    Ok(record)
}

/// Rejects records tuned for a different workload.
pub fn check_record_key(
    record: &TuningRecord,
    params: &ConvParams,
    n: usize,
    in_h: usize,
    in_w: usize,
) -> Result<()> {
    let expected = layer_key(params, n, in_h, in_w);
    if record.layer_key != expected {
        return Err(Error::KeyMismatch {
            expected,
            found: record.layer_key.clone(),
        });
    }
    Ok(())
}
