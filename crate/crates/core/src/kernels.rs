//! Registry of the convolution kernels the benchmark and tuner can run.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{grouped_direct_conv, im2col_grouped_conv};
use crate::conv_ref::ConvParams;
use crate::error::{Error, Result};
use crate::gspc::{gspc_conv, gspc_conv_parallel, PackedKernels, TileConfig};
use crate::tensor::Tensor4;

/// Benchmarkable kernel implementations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelId {
    /// Grouped spatial-pack convolution (the tunable kernel).
    Gspc,
    /// Direct grouped convolution with hoisted bounds.
    GroupedDirect,
    /// im2col lowering plus blocked GEMM.
    Im2colGemm,
}

impl KernelId {
    pub const ALL: [KernelId; 3] = [
        KernelId::Gspc,
        KernelId::GroupedDirect,
        KernelId::Im2colGemm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelId::Gspc => "gspc",
            KernelId::GroupedDirect => "direct",
            KernelId::Im2colGemm => "im2col",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gspc" => Ok(KernelId::Gspc),
            "direct" => Ok(KernelId::GroupedDirect),
            "im2col" => Ok(KernelId::Im2colGemm),
            other => Err(Error::Lookup(format!(
                "unknown kernel {other:?}; expected gspc, direct or im2col"
            ))),
        }
    }
}

/// Runs `f` inside a rayon pool with `threads` workers, so parallel kernel
/// runs use a caller-chosen thread count. 0 runs `f` directly (parallel
/// kernels then use the process-default pool).
pub fn with_thread_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool construction failed: {e}")))?;
    Ok(pool.install(f))
}

/// Runs one kernel on one workload. `tiles`, `prepacked` and `parallel`
/// only influence the spatial-pack kernel; the baselines ignore them.
pub fn run_kernel(
    id: KernelId,
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
    prepacked: Option<&PackedKernels>,
    parallel: bool,
) -> Result<Tensor4> {
    match id {
        KernelId::Gspc => {
            if parallel {
                gspc_conv_parallel(x, w, params, tiles, prepacked)
            } else {
                gspc_conv(x, w, params, tiles, prepacked)
            }
        }
        KernelId::GroupedDirect => grouped_direct_conv(x, w, params),
        KernelId::Im2colGemm => im2col_grouped_conv(x, w, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv_ref::direct_grouped_conv;
    use crate::gspc::default_tiles;
    use crate::tensor::{allclose, PaddingSpec, Shape4, ATOL, RTOL};

    #[test]
    fn names_roundtrip() {
        for id in KernelId::ALL {
            assert_eq!(id.name().parse::<KernelId>().unwrap(), id);
        }
        assert_eq!("GSPC".parse::<KernelId>().unwrap(), KernelId::Gspc);
        assert!("winograd".parse::<KernelId>().is_err());
    }

    #[test]
    fn thread_pool_wrapper_runs_the_closure() {
        assert_eq!(with_thread_pool(2, || 41 + 1).unwrap(), 42);
        assert_eq!(with_thread_pool(0, || 7).unwrap(), 7);
    }

    #[test]
    fn every_kernel_matches_the_reference() {
        let params = ConvParams::new(8, 16, 3, 3, 1, 1, PaddingSpec { h: 1, w: 1 }, 4).unwrap();
        let x = Tensor4::random(Shape4::new(2, 8, 6, 6).unwrap(), 11);
        let w = Tensor4::random(params.weight_shape(), 12);
        let tiles = default_tiles(&params, 4);
        let want = direct_grouped_conv(&x, &w, &params).unwrap();
        for id in KernelId::ALL {
            let got = run_kernel(id, &x, &w, &params, &tiles, None, false).unwrap();
            assert!(allclose(&got, &want, RTOL, ATOL).unwrap(), "{id}");
        }
    }
}
