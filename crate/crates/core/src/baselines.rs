//! Baseline grouped-convolution kernels the spatial-pack implementation is
//! benchmarked against: a direct kernel with hoisted bounds and no auxiliary
//! allocations, and an im2col+GEMM kernel with a cache-blocked matrix
//! multiply.
//!
//! Both baselines accumulate each output element over (channel, kh, kw) in
//! ascending order, the same order as [`crate::conv_ref::direct_grouped_conv`],
//! so on finite inputs their results are bit-identical to the reference.

use crate::conv_ref::ConvParams;
use crate::error::{Error, Result};
use crate::tensor::{pad_input, Shape4, Tensor4};

/// Dense row-major f32 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2D {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f32>,
}

impl Matrix2D {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix2D {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix2D { rows, cols, data })
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

// Block extents sized for typical L1/L2 reuse. Blocking only changes which
// (i, j) cells are touched when; every c[i][j] still accumulates over p in
// ascending order, so the result is bit-identical to the naive triple loop.
const GEMM_MC: usize = 64;
const GEMM_KC: usize = 256;
const GEMM_NC: usize = 512;

/// C = A * B with cache blocking and an axpy inner loop.
pub fn gemm(a: &Matrix2D, b: &Matrix2D) -> Result<Matrix2D> {
    if a.cols != b.rows {
        return Err(Error::shape(format!(
            "gemm dims mismatch: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c = Matrix2D::zeros(m, n);
    for jc in (0..n).step_by(GEMM_NC) {
        let nc = GEMM_NC.min(n - jc);
        for pc in (0..k).step_by(GEMM_KC) {
            let kc = GEMM_KC.min(k - pc);
            for ic in (0..m).step_by(GEMM_MC) {
                let mc = GEMM_MC.min(m - ic);
                for i in ic..ic + mc {
                    let a_row = &a.data[i * k..(i + 1) * k];
                    let c_row = &mut c.data[i * n + jc..i * n + jc + nc];
                    let b_panel = &b.data[pc * n..(pc + kc) * n];
                    for (&av, b_row) in a_row[pc..pc + kc].iter().zip(b_panel.chunks_exact(n)) {
                        for (cv, &bv) in c_row.iter_mut().zip(&b_row[jc..jc + nc]) {
                            *cv += av * bv;
                        }
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Lowers one group's receptive fields to a (cpg*k_h*k_w) x (n*h_out*w_out)
/// matrix: `m[(c*k_h + kh)*k_w + kw][(n*h_out + oh)*w_out + ow] =
/// x_pad[n][group*cpg + c][oh*s_h + kh][ow*s_w + kw]`. `x_pad` must already
/// carry the convolution's zero padding.
pub fn im2col_group(x_pad: &Tensor4, params: &ConvParams, group: usize) -> Result<Matrix2D> {
    let xs = x_pad.shape();
    if xs.c != params.c_in || group >= params.groups {
        return Err(Error::shape(format!(
            "im2col: input channels {} / group {} incompatible with params",
            xs.c, group
        )));
    }
    if xs.h < params.k_h || xs.w < params.k_w {
        return Err(Error::config(format!(
            "kernel {}x{} does not fit padded input {}x{}",
            params.k_h, params.k_w, xs.h, xs.w
        )));
    }
    let h_out = (xs.h - params.k_h) / params.s_h + 1;
    let w_out = (xs.w - params.k_w) / params.s_w + 1;
    let cpg = params.cpg();
    let mut m = Matrix2D::zeros(cpg * params.k_h * params.k_w, xs.n * h_out * w_out);
    let xd = x_pad.data();
    let mut row = 0;
    for c in 0..cpg {
        for kh in 0..params.k_h {
            for kw in 0..params.k_w {
                let mut col = 0;
                for n in 0..xs.n {
                    for oh in 0..h_out {
                        let src = xs.offset(n, group * cpg + c, oh * params.s_h + kh, kw);
                        for ow in 0..w_out {
                            m.data[row * m.cols + col] = xd[src + ow * params.s_w];
                            col += 1;
                        }
                    }
                }
                row += 1;
            }
        }
    }
    Ok(m)
}

/// Grouped convolution by lowering: per group, multiply the (kpg) x
/// (cpg*k_h*k_w) weight matrix with the im2col matrix and scatter rows back
/// into NCHW. Weight rows are reshapes of the 4D weights, so no weight copy
/// beyond the per-group slice.
pub fn im2col_grouped_conv(x: &Tensor4, w: &Tensor4, params: &ConvParams) -> Result<Tensor4> {
    let (h_out, w_out) = params.check_io(x, w)?;
    let xs = x.shape();
    let x_pad = pad_input(x, params.pad);
    let (kpg, cpg) = (params.kpg(), params.cpg());
    let kcols = cpg * params.k_h * params.k_w;
    let mut y = Tensor4::zeros(Shape4::new(xs.n, params.c_out, h_out, w_out)?);
    for j in 0..params.groups {
        let cols = im2col_group(&x_pad, params, j)?;
        let wslice = &w.data()[j * kpg * kcols..(j + 1) * kpg * kcols];
        let wmat = Matrix2D::from_vec(kpg, kcols, wslice.to_vec())?;
        let prod = gemm(&wmat, &cols)?;
        for k in 0..kpg {
            for n in 0..xs.n {
                let src = &prod.row(k)[n * h_out * w_out..(n + 1) * h_out * w_out];
                let dst = y.shape().offset(n, j * kpg + k, 0, 0);
                y.data_mut()[dst..dst + h_out * w_out].copy_from_slice(src);
            }
        }
    }
    Ok(y)
}

/// Direct grouped convolution without materializing a padded copy: the valid
/// (kh, kw) ranges are hoisted out of the inner loops, so out-of-bounds taps
/// are skipped instead of multiplied by stored zeros. Skipped taps contribute
/// exactly +0.0 in the reference, which never changes a finite accumulator
/// that starts at +0.0, so results stay bit-identical to it.
pub fn grouped_direct_conv(x: &Tensor4, w: &Tensor4, params: &ConvParams) -> Result<Tensor4> {
    let (h_out, w_out) = params.check_io(x, w)?;
    let xs = x.shape();
    let ws = w.shape();
    let (kpg, cpg) = (params.kpg(), params.cpg());
    let mut y = Tensor4::zeros(Shape4::new(xs.n, params.c_out, h_out, w_out)?);
    let xd = x.data();
    let wd = w.data();
    let ys = y.shape();
    let yd = y.data_mut();
    for n in 0..xs.n {
        for k in 0..params.c_out {
            let j = k / kpg;
            for oh in 0..h_out {
                let kh_lo = params.pad.h.saturating_sub(oh * params.s_h);
                let kh_hi = (xs.h + params.pad.h)
                    .saturating_sub(oh * params.s_h)
                    .min(params.k_h);
                for ow in 0..w_out {
                    let kw_lo = params.pad.w.saturating_sub(ow * params.s_w);
                    let kw_hi = (xs.w + params.pad.w)
                        .saturating_sub(ow * params.s_w)
                        .min(params.k_w);
                    let mut acc = 0.0f32;
                    for c in 0..cpg {
                        for kh in kh_lo..kh_hi {
                            let ih = oh * params.s_h + kh - params.pad.h;
                            let xrow = xs.offset(n, j * cpg + c, ih, 0);
                            let wrow = ws.offset(k, c, kh, 0);
                            for kw in kw_lo..kw_hi {
                                let iw = ow * params.s_w + kw - params.pad.w;
                                acc += xd[xrow + iw] * wd[wrow + kw];
                            }
                        }
                    }
                    yd[ys.offset(n, k, oh, ow)] = acc;
                }
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv_ref::direct_grouped_conv;
    use crate::tensor::PaddingSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_gemm(a: &Matrix2D, b: &Matrix2D) -> Matrix2D {
        let mut c = Matrix2D::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for p in 0..a.cols {
                for j in 0..b.cols {
                    let v = c.at(i, j) + a.at(i, p) * b.at(p, j);
                    c.set(i, j, v);
                }
            }
        }
        c
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-1.0f32..=1.0))
            .collect();
        Matrix2D::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn gemm_matches_naive_triple_loop_bitwise() {
        // Second case crosses the MC and KC block boundaries.
        for (m, k, n, seed) in [(17, 23, 9, 1u64), (130, 300, 10, 2)] {
            let a = random_matrix(m, k, seed);
            let b = random_matrix(k, n, seed + 10);
            let got = gemm(&a, &b).unwrap();
            let want = naive_gemm(&a, &b);
            assert_eq!(got.data(), want.data(), "{m}x{k}*{k}x{n}");
        }
    }

    #[test]
    fn gemm_rejects_dimension_mismatch() {
        let a = Matrix2D::zeros(3, 4);
        let b = Matrix2D::zeros(5, 2);
        assert!(gemm(&a, &b).is_err());
    }

    #[test]
    fn im2col_lowers_single_output_receptive_field() {
        // 2x2 kernel covering a whole 2x2 input: one column holding the
        // group's channels in (c, kh, kw) order.
        let params = ConvParams::new(4, 4, 2, 2, 1, 1, PaddingSpec { h: 0, w: 0 }, 2).unwrap();
        let x = Tensor4::from_vec(
            Shape4::new(1, 4, 2, 2).unwrap(),
            (0..16).map(|v| v as f32).collect(),
        )
        .unwrap();
        let m = im2col_group(&x, &params, 0).unwrap();
        assert_eq!((m.rows, m.cols), (8, 1));
        let flat: Vec<f32> = (0..8).map(|r| m.at(r, 0)).collect();
        assert_eq!(flat, (0..8).map(|v| v as f32).collect::<Vec<_>>());
        let m1 = im2col_group(&x, &params, 1).unwrap();
        assert_eq!(m1.at(0, 0), 8.0);
    }

    #[test]
    fn im2col_carries_padding_zeros() {
        let params = ConvParams::new(1, 1, 3, 3, 1, 1, PaddingSpec { h: 1, w: 1 }, 1).unwrap();
        let x = Tensor4::from_vec(Shape4::new(1, 1, 3, 3).unwrap(), vec![1.0; 9]).unwrap();
        let m = im2col_group(&pad_input(&x, params.pad), &params, 0).unwrap();
        assert_eq!((m.rows, m.cols), (9, 9));
        // Corner output (0,0): a 3x3 window with only a 2x2 valid region.
        let corner: Vec<f32> = (0..9).map(|r| m.at(r, 0)).collect();
        assert_eq!(corner.iter().filter(|&&v| v == 0.0).count(), 5);
        // Center output (1,1) sees no padding at all.
        let center: Vec<f32> = (0..9).map(|r| m.at(r, 4)).collect();
        assert!(center.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn padded_stride_im2col_column_count() {
        let params = ConvParams::new(2, 2, 3, 3, 2, 2, PaddingSpec { h: 1, w: 1 }, 1).unwrap();
        let x = Tensor4::random(Shape4::new(3, 2, 7, 7).unwrap(), 9);
        let m = im2col_group(&pad_input(&x, params.pad), &params, 0).unwrap();
        // 7 + 2*1 padded to 9, (9 - 3)/2 + 1 = 4 outputs per side, 3 images.
        assert_eq!((m.rows, m.cols), (18, 48));
    }

    fn random_cases(seed: u64, count: usize) -> Vec<(ConvParams, Tensor4, Tensor4)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < count {
            let g = [1usize, 2, 4, 8][rng.gen_range(0..4)];
            let cpg = [1usize, 2, 3, 4][rng.gen_range(0..4)];
            let kpg = [1usize, 2, 3, 4][rng.gen_range(0..4)];
            let k = [1usize, 2, 3][rng.gen_range(0..3)];
            let s = [1usize, 2][rng.gen_range(0..2)];
            let pad = [0usize, 1][rng.gen_range(0..2)];
            let hw = rng.gen_range(k.max(3)..8);
            let params = ConvParams::new(
                g * cpg,
                g * kpg,
                k,
                k,
                s,
                s,
                PaddingSpec { h: pad, w: pad },
                g,
            )
            .unwrap();
            let n = rng.gen_range(1..3);
            let x = Tensor4::random(Shape4::new(n, g * cpg, hw, hw).unwrap(), rng.gen());
            let w = Tensor4::random(params.weight_shape(), rng.gen());
            out.push((params, x, w));
        }
        out
    }

    #[test]
    fn direct_baseline_is_bit_identical_to_reference() {
        for (i, (params, x, w)) in random_cases(42, 50).iter().enumerate() {
            let want = direct_grouped_conv(x, w, params).unwrap();
            let got = grouped_direct_conv(x, w, params).unwrap();
            assert_eq!(got.data(), want.data(), "case {i}: {params:?}");
        }
    }

    #[test]
    fn im2col_kernel_is_bit_identical_to_reference() {
        for (i, (params, x, w)) in random_cases(43, 30).iter().enumerate() {
            let want = direct_grouped_conv(x, w, params).unwrap();
            let got = im2col_grouped_conv(x, w, params).unwrap();
            assert_eq!(got.data(), want.data(), "case {i}: {params:?}");
        }
    }

    #[test]
    fn figure_weight_matrix_times_columns() {
        let params = ConvParams::new(4, 4, 2, 2, 1, 1, PaddingSpec { h: 0, w: 0 }, 2).unwrap();
        let x = Tensor4::from_vec(Shape4::new(1, 4, 2, 2).unwrap(), vec![1.0; 16]).unwrap();
        let w = Tensor4::from_vec(Shape4::new(4, 2, 2, 2).unwrap(), vec![1.0; 32]).unwrap();
        let y = im2col_grouped_conv(&x, &w, &params).unwrap();
        assert_eq!(y.shape(), Shape4::new(1, 4, 1, 1).unwrap());
        assert!(y.data().iter().all(|&v| v == 8.0));
    }
}
