//! Grouped spatial-pack convolution.
//!
//! A grouped convolution is run in four stages:
//!
//! 1. `pack_kernels`: the 4D weight tensor (c_out, c_in/g, k_h, k_w) is
//!    rearranged once into a 7D layout (g, kpg/t_o, cpg/t_i, k_h, k_w, t_i,
//!    t_o) whose innermost axis is the output-channel tile, so the compute
//!    loop reads weights as contiguous t_o-wide rows. Weights can be packed
//!    ahead of time and reused across calls.
//! 2. `pack_inputs`: the padded input (n, c_in, h, w) is rearranged into a
//!    6D layout (g, n, cpg/t_i, h, t_i, w) grouping the channels each group
//!    reads next to each other.
//! 3. `compute`: a tiled loop nest produces the 6D packed output
//!    (g, n, kpg/t_o, h_out, w_out, t_o), accumulating every output element
//!    in a private f32 accumulator with the t_o axis innermost (one
//!    SIMD-friendly row per output position).
//! 4. `unpack_outputs`: the packed output is rearranged back to NCHW. When
//!    the packed and unpacked layouts coincide element-for-element (notably
//!    depthwise convolutions with t_o = 1 at batch 1) the copy is skipped
//!    and the storage is reused as-is.
//!
//! Tile sizes must satisfy `0 < t_o <= kpg`, `0 < t_i <= cpg`, with each
//! tile dividing its per-group channel count exactly.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv_ref::ConvParams;
use crate::error::{Error, Result};
use crate::tensor::{pad_input, Shape4, Tensor4};

/// Tuning knobs for the spatial-pack kernel: output-channel tile width,
/// input-channel tile width, and whether the kernel-width loop is unrolled
/// (specialized code paths exist for k_w = 1 and k_w = 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileConfig {
    pub t_o: usize,
    pub t_i: usize,
    pub unroll_kw: bool,
}

/// Weights rearranged to (g, kpg/t_o, cpg/t_i, k_h, k_w, t_i, t_o).
#[derive(Clone, Debug, PartialEq)]
pub struct PackedKernels {
    pub dims: [usize; 7],
    data: Vec<f32>,
}

/// Padded inputs rearranged to (g, n, cpg/t_i, h_pad, t_i, w_pad).
#[derive(Clone, Debug, PartialEq)]
pub struct PackedInputs {
    pub dims: [usize; 6],
    data: Vec<f32>,
}

/// Convolution results in packed layout (g, n, kpg/t_o, h_out, w_out, t_o).
#[derive(Clone, Debug, PartialEq)]
pub struct PackedOutputs {
    pub dims: [usize; 6],
    data: Vec<f32>,
}

macro_rules! packed_accessors {
    ($ty:ty, $rank:literal) => {
        impl $ty {
            pub fn data(&self) -> &[f32] {
                &self.data
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            /// Row-major element lookup, for tests and spot checks.
            pub fn at(&self, idx: [usize; $rank]) -> f32 {
                let mut off = 0;
                for (i, d) in idx.iter().zip(self.dims.iter()) {
                    assert!(
                        i < d,
                        "index {:?} out of range for dims {:?}",
                        idx,
                        self.dims
                    );
                    off = off * d + i;
                }
                self.data[off]
            }

            /// Assembles a packed tensor from raw parts. Every dim must be
            /// nonzero and the data length must equal the dims product.
            pub fn from_parts(dims: [usize; $rank], data: Vec<f32>) -> Result<Self> {
                if dims.iter().any(|&d| d == 0) {
                    return Err(Error::config(format!(
                        "packed dims {:?} contain a zero extent",
                        dims
                    )));
                }
                let want: usize = dims.iter().product();
                if data.len() != want {
                    return Err(Error::config(format!(
                        "packed data length {} does not match dims {:?} (want {})",
                        data.len(),
                        dims,
                        want
                    )));
                }
                Ok(Self { dims, data })
            }
        }
    };
}

packed_accessors!(PackedKernels, 7);
packed_accessors!(PackedInputs, 6);
packed_accessors!(PackedOutputs, 6);

impl PackedKernels {
    /// Dims the packed form of `params`' weights must have under `tiles`.
    pub fn expected_dims(params: &ConvParams, tiles: &TileConfig) -> [usize; 7] {
        [
            params.groups,
            params.kpg() / tiles.t_o,
            params.cpg() / tiles.t_i,
            params.k_h,
            params.k_w,
            tiles.t_i,
            tiles.t_o,
        ]
    }
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|&d| n.is_multiple_of(d)).collect()
}

/// Rejects tile configurations outside `0 < t_o <= kpg`, `0 < t_i <= cpg`
/// or not dividing the per-group channel counts evenly.
pub fn validate_tiles(params: &ConvParams, tiles: &TileConfig) -> Result<()> {
    let kpg = params.kpg();
    let cpg = params.cpg();
    if tiles.t_o == 0 || tiles.t_o > kpg {
        return Err(Error::Tiles(format!(
            "t_o={} violates 0 < t_o <= kernels-per-group ({kpg})",
            tiles.t_o
        )));
    }
    if tiles.t_i == 0 || tiles.t_i > cpg {
        return Err(Error::Tiles(format!(
            "t_i={} violates 0 < t_i <= channels-per-group ({cpg})",
            tiles.t_i
        )));
    }
    if !kpg.is_multiple_of(tiles.t_o) {
        return Err(Error::Tiles(format!(
            "t_o={} does not divide kernels-per-group ({kpg})",
            tiles.t_o
        )));
    }
    if !cpg.is_multiple_of(tiles.t_i) {
        return Err(Error::Tiles(format!(
            "t_i={} does not divide channels-per-group ({cpg})",
            tiles.t_i
        )));
    }
    Ok(())
}

/// Untuned starting point: the largest divisor of each per-group channel
/// count that fits in `simd_lanes` (clamped to at least 1), no unrolling.
pub fn default_tiles(params: &ConvParams, simd_lanes: usize) -> TileConfig {
    let lanes = simd_lanes.max(1);
    let fit = |n: usize| {
        divisors(n)
            .into_iter()
            .filter(|&d| d <= lanes)
            .max()
            .unwrap_or(1)
    };
    TileConfig {
        t_o: fit(params.kpg()),
        t_i: fit(params.cpg()),
        unroll_kw: false,
    }
}

/// f32 SIMD lane count of the widest vector unit detected at runtime.
pub fn native_simd_lanes() -> usize {
    #[cfg(target_arch = "x86_64")]
    {
        if is_x86_feature_detected!("avx512f") {
            16
        } else if is_x86_feature_detected!("avx2") {
            8
        } else {
            4
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        4
    }
}

/// Stage 1: `out[j][k][c][kh][kw][ci][co] = w[j*kpg + k*t_o + co][c*t_i + ci][kh][kw]`.
pub fn pack_kernels(w: &Tensor4, params: &ConvParams, tiles: &TileConfig) -> Result<PackedKernels> {
    validate_tiles(params, tiles)?;
    if w.shape() != params.weight_shape() {
        return Err(Error::shape(format!(
            "weights have shape {}, params expect {}",
            w.shape(),
            params.weight_shape()
        )));
    }
    let dims = PackedKernels::expected_dims(params, tiles);
    let [g, kb, cb, k_h, k_w, t_i, t_o] = dims;
    let ws = w.shape();
    let wd = w.data();
    let mut data = Vec::with_capacity(w.data().len());
    for j in 0..g {
        for k in 0..kb {
            for c in 0..cb {
                for kh in 0..k_h {
                    for kw in 0..k_w {
                        for ci in 0..t_i {
                            for co in 0..t_o {
                                let src =
                                    ws.offset(j * (kb * t_o) + k * t_o + co, c * t_i + ci, kh, kw);
                                data.push(wd[src]);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(PackedKernels { dims, data })
}

/// Stage 2: `out[j][n][cb][h][ci][w] = x_pad[n][j*cpg + cb*t_i + ci][h][w]`.
/// `x_pad` must already carry the convolution's zero padding.
pub fn pack_inputs(
    x_pad: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
) -> Result<PackedInputs> {
    validate_tiles(params, tiles)?;
    let xs = x_pad.shape();
    if xs.c != params.c_in {
        return Err(Error::shape(format!(
            "input has {} channels, params expect c_in={}",
            xs.c, params.c_in
        )));
    }
    let cb_count = params.cpg() / tiles.t_i;
    let dims = [params.groups, xs.n, cb_count, xs.h, tiles.t_i, xs.w];
    let xd = x_pad.data();
    let mut data = Vec::with_capacity(xd.len());
    for j in 0..params.groups {
        for n in 0..xs.n {
            for cb in 0..cb_count {
                for h in 0..xs.h {
                    for ci in 0..tiles.t_i {
                        let src = xs.offset(n, j * params.cpg() + cb * tiles.t_i + ci, h, 0);
                        data.extend_from_slice(&xd[src..src + xs.w]);
                    }
                }
            }
        }
    }
    Ok(PackedInputs { dims, data })
}

/// Per-group loop extents, hoisted out of the dispatch so the unrolled
/// variants share one body.
#[derive(Clone, Copy)]
struct GroupDims {
    n: usize,
    kb: usize,
    cb: usize,
    h_pad: usize,
    w_pad: usize,
    t_i: usize,
    t_o: usize,
    k_h: usize,
    k_w: usize,
    s_h: usize,
    s_w: usize,
    h_out: usize,
    w_out: usize,
}

/// Outputs per register block along the output width. Each weight row read
/// in the reduction is applied to the whole strip, which amortizes address
/// arithmetic that would otherwise dominate small-tile configurations.
const OW_BLOCK: usize = 8;

/// One group's convolution: reads that group's slices of the packed inputs
/// and kernels and fills its slice of the packed output. `KW` is the
/// compile-time kernel width for the unrolled paths; 0 selects the rolled
/// loop with the runtime width.
///
/// Both variants accumulate each output's terms in (channel block, kh, kw,
/// ci) order, so they produce bit-identical results; they differ only in
/// which axis the innermost loop walks.
fn compute_group<const KW: usize>(px: &[f32], pw: &[f32], py: &mut [f32], d: GroupDims) {
    if d.t_o < OW_BLOCK {
        compute_group_narrow::<KW>(px, pw, py, d)
    } else {
        compute_group_wide::<KW>(px, pw, py, d)
    }
}

/// Wide-tile variant: the accumulator strip is laid out (ow, ocb) and the
/// innermost loop walks the t_o-wide weight row, which is a full vector or
/// more here.
fn compute_group_wide<const KW: usize>(px: &[f32], pw: &[f32], py: &mut [f32], d: GroupDims) {
    let k_w = if KW == 0 { d.k_w } else { KW };
    let mut acc = vec![0.0f32; OW_BLOCK * d.t_o];
    let x_row = d.w_pad; // elements per (cb, h, ci) row
    let w_row = d.t_o; // elements per (.., ci) row
    for n in 0..d.n {
        let x_n = n * d.cb * d.h_pad * d.t_i * x_row;
        for occ in 0..d.kb {
            let w_occ = occ * d.cb * d.k_h * d.k_w * d.t_i * w_row;
            for oh in 0..d.h_out {
                let mut ow0 = 0;
                while ow0 < d.w_out {
                    let strip = OW_BLOCK.min(d.w_out - ow0);
                    let tail = strip * d.t_o;
                    acc[..tail].fill(0.0);
                    for cb in 0..d.cb {
                        let x_cb = x_n + cb * d.h_pad * d.t_i * x_row;
                        let w_cb = w_occ + cb * d.k_h * d.k_w * d.t_i * w_row;
                        for kh in 0..d.k_h {
                            let ih = oh * d.s_h + kh;
                            let x_h = x_cb + ih * d.t_i * x_row;
                            let w_h = w_cb + kh * d.k_w * d.t_i * w_row;
                            for kw in 0..k_w {
                                let w_kw = w_h + kw * d.t_i * w_row;
                                for ci in 0..d.t_i {
                                    let x_base = x_h + ci * x_row + ow0 * d.s_w + kw;
                                    let wr = &pw[w_kw + ci * w_row..w_kw + ci * w_row + d.t_o];
                                    for (s, a) in acc[..tail].chunks_exact_mut(d.t_o).enumerate() {
                                        let xv = px[x_base + s * d.s_w];
                                        for (av, &wv) in a.iter_mut().zip(wr) {
                                            *av += xv * wv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    let dst = (((n * d.kb + occ) * d.h_out + oh) * d.w_out + ow0) * d.t_o;
                    py[dst..dst + tail].copy_from_slice(&acc[..tail]);
                    ow0 += strip;
                }
            }
        }
    }
}

/// Narrow-tile variant: the accumulator strip is laid out (ocb, ow) with a
/// fixed OW_BLOCK row stride, the weight is a broadcast scalar and the
/// innermost loop walks the output strip, so narrow t_o still vectorizes.
/// A transpose on writeback restores the packed (ow, ocb) layout.
fn compute_group_narrow<const KW: usize>(px: &[f32], pw: &[f32], py: &mut [f32], d: GroupDims) {
    let k_w = if KW == 0 { d.k_w } else { KW };
    let mut acc = vec![0.0f32; d.t_o * OW_BLOCK];
    let x_row = d.w_pad;
    let w_row = d.t_o;
    for n in 0..d.n {
        let x_n = n * d.cb * d.h_pad * d.t_i * x_row;
        for occ in 0..d.kb {
            let w_occ = occ * d.cb * d.k_h * d.k_w * d.t_i * w_row;
            for oh in 0..d.h_out {
                let mut ow0 = 0;
                while ow0 < d.w_out {
                    let strip = OW_BLOCK.min(d.w_out - ow0);
                    acc.fill(0.0);
                    for cb in 0..d.cb {
                        let x_cb = x_n + cb * d.h_pad * d.t_i * x_row;
                        let w_cb = w_occ + cb * d.k_h * d.k_w * d.t_i * w_row;
                        for kh in 0..d.k_h {
                            let ih = oh * d.s_h + kh;
                            let x_h = x_cb + ih * d.t_i * x_row;
                            let w_h = w_cb + kh * d.k_w * d.t_i * w_row;
                            for kw in 0..k_w {
                                let w_kw = w_h + kw * d.t_i * w_row;
                                for ci in 0..d.t_i {
                                    let x_base = x_h + ci * x_row + ow0 * d.s_w + kw;
                                    let wr = &pw[w_kw + ci * w_row..w_kw + ci * w_row + d.t_o];
                                    for (ocb, &wv) in wr.iter().enumerate() {
                                        let row = &mut acc[ocb * OW_BLOCK..][..strip];
                                        if d.s_w == 1 {
                                            let xs = &px[x_base..x_base + strip];
                                            for (av, &xv) in row.iter_mut().zip(xs) {
                                                *av += xv * wv;
                                            }
                                        } else {
                                            for (s, av) in row.iter_mut().enumerate() {
                                                *av += px[x_base + s * d.s_w] * wv;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    let dst = (((n * d.kb + occ) * d.h_out + oh) * d.w_out + ow0) * d.t_o;
                    for s in 0..strip {
                        for ocb in 0..d.t_o {
                            py[dst + s * d.t_o + ocb] = acc[ocb * OW_BLOCK + s];
                        }
                    }
                    ow0 += strip;
                }
            }
        }
    }
}

fn group_dims(
    px: &PackedInputs,
    pw: &PackedKernels,
    params: &ConvParams,
    tiles: &TileConfig,
) -> Result<GroupDims> {
    validate_tiles(params, tiles)?;
    let expected_w = PackedKernels::expected_dims(params, tiles);
    if pw.dims != expected_w {
        return Err(Error::shape(format!(
            "packed kernels have dims {:?}, params/tiles expect {:?}",
            pw.dims, expected_w
        )));
    }
    let [g, n, cb, h_pad, t_i, w_pad] = px.dims;
    if g != params.groups || cb != params.cpg() / tiles.t_i || t_i != tiles.t_i {
        return Err(Error::shape(format!(
            "packed inputs have dims {:?}, incompatible with params/tiles",
            px.dims
        )));
    }
    if h_pad < params.k_h || w_pad < params.k_w {
        return Err(Error::config(format!(
            "kernel {}x{} does not fit packed input {}x{}",
            params.k_h, params.k_w, h_pad, w_pad
        )));
    }
    Ok(GroupDims {
        n,
        kb: params.kpg() / tiles.t_o,
        cb,
        h_pad,
        w_pad,
        t_i: tiles.t_i,
        t_o: tiles.t_o,
        k_h: params.k_h,
        k_w: params.k_w,
        s_h: params.s_h,
        s_w: params.s_w,
        h_out: (h_pad - params.k_h) / params.s_h + 1,
        w_out: (w_pad - params.k_w) / params.s_w + 1,
    })
}

fn dispatch_group(px: &[f32], pw: &[f32], py: &mut [f32], d: GroupDims, tiles: &TileConfig) {
    match (tiles.unroll_kw, d.k_w) {
        (true, 1) => compute_group::<1>(px, pw, py, d),
        (true, 3) => compute_group::<3>(px, pw, py, d),
        _ => compute_group::<0>(px, pw, py, d),
    }
}

/// Stage 3: packed convolution. For output channel `j*kpg + occ*t_o + ocb`:
///
/// ```text
/// y'[j][n][occ][oh][ow][ocb] = sum over c in 0..cpg, kh, kw of
///     x'[j][n][c/t_i][oh*s_h + kh][c%t_i][ow*s_w + kw]
///   * w'[j][occ][c/t_i][kh][kw][c%t_i][ocb]
/// ```
///
/// Groups are independent; [`compute_parallel`] runs them on the current
/// rayon pool and is bit-identical to the sequential path.
pub fn compute(
    px: &PackedInputs,
    pw: &PackedKernels,
    params: &ConvParams,
    tiles: &TileConfig,
) -> Result<PackedOutputs> {
    compute_impl(px, pw, params, tiles, false)
}

/// [`compute`] with groups distributed across the current rayon pool.
pub fn compute_parallel(
    px: &PackedInputs,
    pw: &PackedKernels,
    params: &ConvParams,
    tiles: &TileConfig,
) -> Result<PackedOutputs> {
    compute_impl(px, pw, params, tiles, true)
}

fn compute_impl(
    px: &PackedInputs,
    pw: &PackedKernels,
    params: &ConvParams,
    tiles: &TileConfig,
    parallel: bool,
) -> Result<PackedOutputs> {
    let d = group_dims(px, pw, params, tiles)?;
    let g = params.groups;
    let dims = [g, d.n, d.kb, d.h_out, d.w_out, d.t_o];
    let mut data = vec![0.0f32; dims.iter().product()];

    let px_stride = px.data.len() / g;
    let pw_stride = pw.data.len() / g;
    let py_stride = data.len() / g;
    if parallel {
        data.par_chunks_mut(py_stride)
            .enumerate()
            .for_each(|(j, py_g)| {
                let px_g = &px.data[j * px_stride..(j + 1) * px_stride];
                let pw_g = &pw.data[j * pw_stride..(j + 1) * pw_stride];
                dispatch_group(px_g, pw_g, py_g, d, tiles);
            });
    } else {
        for (j, py_g) in data.chunks_mut(py_stride).enumerate() {
            let px_g = &px.data[j * px_stride..(j + 1) * px_stride];
            let pw_g = &pw.data[j * pw_stride..(j + 1) * pw_stride];
            dispatch_group(px_g, pw_g, py_g, d, tiles);
        }
    }
    Ok(PackedOutputs { dims, data })
}

/// True when the packed output layout already equals NCHW element-for-element,
/// so unpacking can reuse the storage without moving anything. Holds exactly
/// when `(groups == 1 or n == 1) and (t_o == 1 or h_out*w_out == 1)`; the
/// everyday case is a depthwise convolution (kpg = 1 forces t_o = 1) at
/// batch size 1.
pub fn unpack_is_identity(
    params: &ConvParams,
    tiles: &TileConfig,
    n: usize,
    h_out: usize,
    w_out: usize,
) -> bool {
    (params.groups == 1 || n == 1) && (tiles.t_o == 1 || h_out * w_out == 1)
}

/// Stage 4: rearrange the packed output back to NCHW. With `cg = c % kpg`:
///
/// ```text
/// y[n][c][h][w] = y'[c / kpg][n][cg / t_o][h][w][cg % t_o]
/// ```
///
/// Takes the packed output by value: on the identity layout the storage is
/// reused (zero element moves).
pub fn unpack_outputs(py: PackedOutputs, params: &ConvParams) -> Result<Tensor4> {
    let [g, n, kb, h_out, w_out, t_o] = py.dims;
    if g != params.groups || kb * t_o != params.kpg() {
        return Err(Error::shape(format!(
            "packed output dims {:?} incompatible with c_out={} in {} groups",
            py.dims, params.c_out, params.groups
        )));
    }
    let shape = Shape4::new(n, params.c_out, h_out, w_out)?;
    let tiles_t_o = TileConfig {
        t_o,
        t_i: 1,
        unroll_kw: false,
    };
    if unpack_is_identity(params, &tiles_t_o, n, h_out, w_out) {
        return Tensor4::from_vec(shape, py.data);
    }
    let kpg = params.kpg();
    let mut y = Tensor4::zeros(shape);
    let yd = y.data_mut();
    for nn in 0..n {
        for c in 0..params.c_out {
            let (j, cg) = (c / kpg, c % kpg);
            let (occ, ocb) = (cg / t_o, cg % t_o);
            for h in 0..h_out {
                let src = ((((j * n + nn) * kb + occ) * h_out + h) * w_out) * t_o + ocb;
                let dst = shape.offset(nn, c, h, 0);
                for w in 0..w_out {
                    yd[dst + w] = py.data[src + w * t_o];
                }
            }
        }
    }
    Ok(y)
}

/// Full pipeline: pad, pack inputs, compute, unpack. Weights are packed on
/// the fly unless a matching `prepacked` layout is supplied (ahead-of-time
/// packing); its dims must match `params`/`tiles` exactly.
pub fn gspc_conv(
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
    prepacked: Option<&PackedKernels>,
) -> Result<Tensor4> {
    gspc_conv_impl(x, w, params, tiles, prepacked, false)
}

/// [`gspc_conv`] with the compute stage parallelized across groups on the
/// current rayon pool.
pub fn gspc_conv_parallel(
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
    prepacked: Option<&PackedKernels>,
) -> Result<Tensor4> {
    gspc_conv_impl(x, w, params, tiles, prepacked, true)
}

fn gspc_conv_impl(
    x: &Tensor4,
    w: &Tensor4,
    params: &ConvParams,
    tiles: &TileConfig,
    prepacked: Option<&PackedKernels>,
    parallel: bool,
) -> Result<Tensor4> {
    params.check_io(x, w)?;
    validate_tiles(params, tiles)?;
    let packed;
    let pw = match prepacked {
        Some(pk) => {
            let expected = PackedKernels::expected_dims(params, tiles);
            if pk.dims != expected {
                return Err(Error::shape(format!(
                    "prepacked kernels have dims {:?}, params/tiles expect {:?}",
                    pk.dims, expected
                )));
            }
            pk
        }
        None => {
            packed = pack_kernels(w, params, tiles)?;
            &packed
        }
    };
    let x_pad = pad_input(x, params.pad);
    let px = pack_inputs(&x_pad, params, tiles)?;
    let py = compute_impl(&px, pw, params, tiles, parallel)?;
    unpack_outputs(py, params)
}

// Packed kernel files: seven little-endian u32 dims in layout order
// (g, kpg/t_o, cpg/t_i, k_h, k_w, t_i, t_o) followed by the row-major
// little-endian f32 elements.

pub fn write_packed_kernels(path: &Path, pk: &PackedKernels) -> Result<()> {
    let mut bytes = Vec::with_capacity(28 + 4 * pk.data.len());
    for d in pk.dims {
        let d = u32::try_from(d)
            .map_err(|_| Error::config(format!("dim {d} exceeds packed-file u32 range")))?;
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    for v in &pk.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_packed_kernels(path: &Path) -> Result<PackedKernels> {
    let bytes = fs::read(path)?;
    let origin = path.display().to_string();
    if bytes.len() < 28 {
        return Err(Error::Parse {
            origin,
            line: 0,
            msg: format!(
                "packed-kernel header needs 28 bytes, file has {}",
                bytes.len()
            ),
        });
    }
    let mut dims = [0usize; 7];
    for (i, d) in dims.iter_mut().enumerate() {
        *d = u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    }
    let count: usize = dims.iter().product();
    if count == 0 {
        return Err(Error::Parse {
            origin,
            line: 0,
            msg: format!("packed-kernel dims {dims:?} contain a zero extent"),
        });
    }
    let want = 28 + 4 * count;
    if bytes.len() != want {
        return Err(Error::Parse {
            origin,
            line: 0,
            msg: format!(
                "dims {:?} imply {} bytes, file has {}",
                dims,
                want,
                bytes.len()
            ),
        });
    }
    let data = bytes[28..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(PackedKernels { dims, data })
}
