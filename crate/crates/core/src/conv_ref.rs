//! Reference grouped convolution. Every optimized kernel in this crate is
//! validated against [`direct_grouped_conv`]; it is written for clarity and
//! a fixed, obvious accumulation order, and is never timed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{output_spatial_dims, pad_input, PaddingSpec, Shape4, Tensor4};

/// Static description of one grouped convolution.
///
/// Filters are mapped to groups contiguously: output channel `k` belongs to
/// group `k / (c_out / groups)` and reads input channels
/// `[group * c_in/groups, (group+1) * c_in/groups)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvParams {
    pub c_in: usize,
    pub c_out: usize,
    pub k_h: usize,
    pub k_w: usize,
    pub s_h: usize,
    pub s_w: usize,
    pub pad: PaddingSpec,
    pub groups: usize,
}

impl ConvParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c_in: usize,
        c_out: usize,
        k_h: usize,
        k_w: usize,
        s_h: usize,
        s_w: usize,
        pad: PaddingSpec,
        groups: usize,
    ) -> Result<Self> {
        let p = ConvParams {
            c_in,
            c_out,
            k_h,
            k_w,
            s_h,
            s_w,
            pad,
            groups,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_in == 0 || self.c_out == 0 {
            return Err(Error::config(format!(
                "channel counts must be positive, got c_in={} c_out={}",
                self.c_in, self.c_out
            )));
        }
        if self.k_h == 0 || self.k_w == 0 {
            return Err(Error::config(format!(
                "kernel extents must be positive, got {}x{}",
                self.k_h, self.k_w
            )));
        }
        if self.s_h == 0 || self.s_w == 0 {
            return Err(Error::config(format!(
                "strides must be positive, got {}x{}",
                self.s_h, self.s_w
            )));
        }
        if self.groups == 0 {
            return Err(Error::config("groups must be positive".to_string()));
        }
        if !self.c_in.is_multiple_of(self.groups) {
            return Err(Error::config(format!(
                "groups={} does not divide c_in={}",
                self.groups, self.c_in
            )));
        }
        if !self.c_out.is_multiple_of(self.groups) {
            return Err(Error::config(format!(
                "groups={} does not divide c_out={}",
                self.groups, self.c_out
            )));
        }
        Ok(())
    }

    /// Kernels (output channels) per group.
    pub fn kpg(&self) -> usize {
        self.c_out / self.groups
    }

    /// Input channels per group.
    pub fn cpg(&self) -> usize {
        self.c_in / self.groups
    }

    /// Expected weight tensor shape `(c_out, c_in/groups, k_h, k_w)`.
    pub fn weight_shape(&self) -> Shape4 {
        Shape4 {
            n: self.c_out,
            c: self.cpg(),
            h: self.k_h,
            w: self.k_w,
        }
    }

    pub(crate) fn check_io(&self, x: &Tensor4, w: &Tensor4) -> Result<(usize, usize)> {
        if x.shape().c != self.c_in {
            return Err(Error::shape(format!(
                "input has {} channels, params expect c_in={}",
                x.shape().c,
                self.c_in
            )));
        }
        if w.shape() != self.weight_shape() {
            return Err(Error::shape(format!(
                "weights have shape {}, params expect {}",
                w.shape(),
                self.weight_shape()
            )));
        }
        output_spatial_dims(self, x.shape().h, x.shape().w)
    }
}

/// Plain grouped convolution over a padded copy of `x`.
///
/// For output channel `k` in group `j = k / kpg`:
///
/// ```text
/// y[n][k][oh][ow] = sum over c in 0..cpg, kh, kw of
///     x_pad[n][j*cpg + c][oh*s_h + kh][ow*s_w + kw] * w[k][c][kh][kw]
/// ```
///
/// accumulated in f32 in exactly that (c, kh, kw) order.
pub fn direct_grouped_conv(x: &Tensor4, w: &Tensor4, params: &ConvParams) -> Result<Tensor4> {
    let (h_out, w_out) = params.check_io(x, w)?;
    let xp = pad_input(x, params.pad);
    let xs = xp.shape();
    let ws = w.shape();
    let n_batch = xs.n;
    let cpg = params.cpg();
    let kpg = params.kpg();

    let mut y = Tensor4::zeros(Shape4 {
        n: n_batch,
        c: params.c_out,
        h: h_out,
        w: w_out,
    });
    let ys = y.shape();

    let xd = xp.data();
    let wd = w.data();
    let yd = y.data_mut();
    for n in 0..n_batch {
        for k in 0..params.c_out {
            let group = k / kpg;
            for oh in 0..h_out {
                for ow in 0..w_out {
                    let mut acc = 0.0f32;
                    for c in 0..cpg {
                        let ic = group * cpg + c;
                        for kh in 0..params.k_h {
                            let xrow = xs.offset(n, ic, oh * params.s_h + kh, ow * params.s_w);
                            let wrow = ws.offset(k, c, kh, 0);
                            for kw in 0..params.k_w {
                                acc += xd[xrow + kw] * wd[wrow + kw];
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

/// 1x1 stride-1 unpadded convolution mixing channels at each position.
pub fn pointwise_conv(x: &Tensor4, w: &Tensor4) -> Result<Tensor4> {
    let ws = w.shape();
    if ws.h != 1 || ws.w != 1 {
        return Err(Error::shape(format!(
            "pointwise weights must be 1x1, got {}x{}",
            ws.h, ws.w
        )));
    }
    let params = ConvParams::new(ws.c, ws.n, 1, 1, 1, 1, PaddingSpec { h: 0, w: 0 }, 1)?;
    direct_grouped_conv(x, w, &params)
}

/// Grouped convolution followed by its pointwise companion, the replacement
/// unit used by the compressed network variants.
pub fn grouped_block(
    x: &Tensor4,
    w_grouped: &Tensor4,
    w_pointwise: &Tensor4,
    params: &ConvParams,
) -> Result<Tensor4> {
    let mid = direct_grouped_conv(x, w_grouped, params)?;
    pointwise_conv(&mid, w_pointwise)
}
