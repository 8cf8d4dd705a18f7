//! `gspc pack`: rearrange a weight tensor into the spatial-pack kernel
//! layout ahead of time and write it to a packed-kernel file.

use std::path::PathBuf;

use clap::Args;

use gspc_core::gspc::{native_simd_lanes, pack_kernels, write_packed_kernels};
use gspc_core::tensor::read_fixture;
use gspc_core::{default_tiles, ConvParams, PaddingSpec, TileConfig};

use crate::common::CliResult;

#[derive(Args, Debug)]
pub struct PackArgs {
    /// Weight tensor file: u32 dims (c_out, c_in/g, k_h, k_w) then f32 data
    #[arg(long)]
    pub weights: PathBuf,

    /// Group count of the convolution the weights belong to
    #[arg(long, default_value_t = 1)]
    pub groups: usize,

    /// Output-channel tile (default: largest divisor fitting the SIMD width)
    #[arg(long)]
    pub t_o: Option<usize>,

    /// Input-channel tile (default: largest divisor fitting the SIMD width)
    #[arg(long)]
    pub t_i: Option<usize>,

    /// Mark the packed file for the unrolled kernel-width loop
    #[arg(long)]
    pub unroll: bool,

    /// Packed-kernel output file
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: PackArgs) -> CliResult<()> {
    let w = read_fixture(&args.weights)?;
    let ws = w.shape();
    // Stride and padding do not influence packing; any valid values do.
    let params = ConvParams::new(
        ws.c * args.groups,
        ws.n,
        ws.h,
        ws.w,
        1,
        1,
        PaddingSpec { h: 0, w: 0 },
        args.groups,
    )?;
    let defaults = default_tiles(&params, native_simd_lanes());
    let tiles = TileConfig {
        t_o: args.t_o.unwrap_or(defaults.t_o),
        t_i: args.t_i.unwrap_or(defaults.t_i),
        unroll_kw: args.unroll,
    };
    let packed = pack_kernels(&w, &params, &tiles)?;
    write_packed_kernels(&args.out, &packed)?;
    println!(
        "packed {} weights {} into dims {:?} at {}",
        params.c_out,
        ws,
        packed.dims,
        args.out.display()
    );
    Ok(())
}
