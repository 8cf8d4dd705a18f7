//! CPU kernels for grouped convolutions built around a spatial packing
//! scheme, with reference and baseline implementations, an autotuner for the
//! packing tile sizes, and an analytic parameter/MAC cost model with shipped
//! layer tables for three reference networks.
//!
//! Start with [`gspc::gspc_conv`] for the tunable kernel,
//! [`conv_ref::direct_grouped_conv`] for the reference it is verified
//! against, [`tuner::tune`] for picking tile sizes on the current machine,
//! and [`workloads::builtin_network`] for the shipped cost tables.

pub mod baselines;
pub mod conv_ref;
pub mod error;
pub mod gspc;
pub mod kernels;
pub mod sweep;
pub mod tensor;
pub mod tuner;
pub mod workloads;

pub use conv_ref::{direct_grouped_conv, grouped_block, pointwise_conv, ConvParams};
pub use error::{Error, Result};
pub use gspc::{default_tiles, gspc_conv, gspc_conv_parallel, TileConfig};
pub use kernels::{run_kernel, KernelId};
pub use tensor::{allclose, pad_input, PaddingSpec, Shape4, Tensor4, ATOL, RTOL};
pub use tuner::{measure_kernel, tune, MeasureOpts, Strategy, TuningRecord};
pub use workloads::{builtin_network, network_totals, NetworkSpec};
