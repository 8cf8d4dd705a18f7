//! Dense NCHW tensors and the small shared helpers every kernel builds on:
//! zero padding, output-size arithmetic, tolerance comparison, reproducible
//! random fills and the on-disk fixture format.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv_ref::ConvParams;
use crate::error::{Error, Result};

/// Default relative tolerance for float comparisons against the oracle.
pub const RTOL: f32 = 1e-5;
/// Default absolute tolerance for float comparisons against the oracle.
pub const ATOL: f32 = 1e-6;

/// Extents of a rank-4 tensor in (batch, channel, height, width) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape4 {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape4 {
    pub fn new(n: usize, c: usize, h: usize, w: usize) -> Result<Self> {
        if n == 0 || c == 0 || h == 0 || w == 0 {
            return Err(Error::shape(format!(
                "every extent must be positive, got ({n}, {c}, {h}, {w})"
            )));
        }
        Ok(Shape4 { n, c, h, w })
    }

    pub fn len(&self) -> usize {
        self.n * self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        false // extents are validated positive on construction
    }

    /// Row-major flat offset of `(n, c, h, w)`, bounds-checked.
    pub fn flat_index(&self, n: usize, c: usize, h: usize, w: usize) -> Result<usize> {
        if n >= self.n || c >= self.c || h >= self.h || w >= self.w {
            return Err(Error::OutOfRange(n, c, h, w, *self));
        }
        Ok(self.offset(n, c, h, w))
    }

    /// Unchecked-in-release flat offset; callers guarantee bounds.
    #[inline]
    pub(crate) fn offset(&self, n: usize, c: usize, h: usize, w: usize) -> usize {
        debug_assert!(n < self.n && c < self.c && h < self.h && w < self.w);
        ((n * self.c + c) * self.h + h) * self.w + w
    }
}

impl fmt::Display for Shape4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.n, self.c, self.h, self.w)
    }
}

/// Symmetric zero padding applied to the spatial dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingSpec {
    pub h: usize,
    pub w: usize,
}

/// Owned rank-4 tensor, row-major NCHW, f32 elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    shape: Shape4,
    data: Vec<f32>,
}

impl Tensor4 {
    pub fn zeros(shape: Shape4) -> Self {
        Tensor4 {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape4, data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::shape(format!(
                "data length {} does not match shape {} ({} elements)",
                data.len(),
                shape,
                shape.len()
            )));
        }
        Ok(Tensor4 { shape, data })
    }

    /// Tensor filled by [`random_fill`] with the given seed.
    pub fn random(shape: Shape4, seed: u64) -> Self {
        let mut t = Tensor4::zeros(shape);
        random_fill(&mut t, seed);
        t
    }

    /// Tensor filled by [`random_fill_in`] with the given seed and range.
    pub fn random_in(shape: Shape4, seed: u64, lo: f32, hi: f32) -> Self {
        let mut t = Tensor4::zeros(shape);
        random_fill_in(&mut t, seed, lo, hi);
        t
    }

    pub fn shape(&self) -> Shape4 {
        self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, h: usize, w: usize) -> f32 {
        self.data[self.shape.offset(n, c, h, w)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, h: usize, w: usize, v: f32) {
        let i = self.shape.offset(n, c, h, w);
        self.data[i] = v;
    }

    /// FNV-1a over the little-endian element bytes. Stable fingerprint for
    /// tuning records and benchmark determinism checks; not a float
    /// comparison (bit-different encodings of close values hash apart).
    pub fn checksum(&self) -> u64 {
        fnv1a(self.data.iter().flat_map(|v| v.to_le_bytes()))
    }
}

/// FNV-1a 64-bit hash. Used for tensor checksums and for deriving stable
/// per-workload seeds from string keys.
pub fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Copies `x` into a zero-initialized tensor grown by `pad` on each spatial
/// border. The padded copy is what the packing and oracle stages index, so
/// no kernel needs implicit boundary checks.
pub fn pad_input(x: &Tensor4, pad: PaddingSpec) -> Tensor4 {
    if pad.h == 0 && pad.w == 0 {
        return x.clone();
    }
    let s = x.shape();
    let padded = Shape4 {
        n: s.n,
        c: s.c,
        h: s.h + 2 * pad.h,
        w: s.w + 2 * pad.w,
    };
    let mut out = Tensor4::zeros(padded);
    for n in 0..s.n {
        for c in 0..s.c {
            for h in 0..s.h {
                let src = s.offset(n, c, h, 0);
                let dst = padded.offset(n, c, h + pad.h, pad.w);
                out.data[dst..dst + s.w].copy_from_slice(&x.data[src..src + s.w]);
            }
        }
    }
    out
}

/// Output height/width of a convolution over an `in_h` x `in_w` input:
/// `(in + 2*pad - k) / stride + 1` per spatial axis.
pub fn output_spatial_dims(
    params: &ConvParams,
    in_h: usize,
    in_w: usize,
) -> Result<(usize, usize)> {
    let h_span = in_h + 2 * params.pad.h;
    let w_span = in_w + 2 * params.pad.w;
    if h_span < params.k_h || w_span < params.k_w {
        return Err(Error::config(format!(
            "kernel {}x{} does not fit padded input {}x{}",
            params.k_h, params.k_w, h_span, w_span
        )));
    }
    Ok((
        (h_span - params.k_h) / params.s_h + 1,
        (w_span - params.k_w) / params.s_w + 1,
    ))
}

/// Element-wise `|a - b| <= atol + rtol * |b|` with `b` as the reference.
/// Shapes must match; NaN anywhere fails.
pub fn allclose(a: &Tensor4, b: &Tensor4, rtol: f32, atol: f32) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "cannot compare tensors of shapes {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .all(|(&x, &y)| (x - y).abs() <= atol + rtol * y.abs()))
}

/// Largest `|a - b| / (atol + rtol * |b|)` over all elements: <= 1.0 means
/// the pair would pass [`allclose`] at those tolerances.
pub fn tolerance_utilization(a: &Tensor4, b: &Tensor4, rtol: f32, atol: f32) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "cannot compare tensors of shapes {} and {}",
            a.shape(),
            b.shape()
        )));
    }
    let mut worst = 0.0f64;
    for (&x, &y) in a.data.iter().zip(&b.data) {
        let margin = (atol + rtol * y.abs()) as f64;
        let u = ((x - y).abs() as f64) / margin;
        if u > worst || u.is_nan() {
            worst = u;
        }
    }
    Ok(worst)
}

/// Fills `t` with uniform values in [-1, 1] drawn from ChaCha8 seeded with
/// `seed`. Same seed, same shape, same values, on every platform.
pub fn random_fill(t: &mut Tensor4, seed: u64) {
    random_fill_in(t, seed, -1.0, 1.0)
}

/// Fills `t` with uniform values in [lo, hi] drawn from ChaCha8 seeded with
/// `seed`. Same seed, same shape, same range, same values, on every
/// platform.
pub fn random_fill_in(t: &mut Tensor4, seed: u64, lo: f32, hi: f32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(lo, hi);
    for v in t.data_mut() {
        *v = dist.sample(&mut rng);
    }
}

// Fixture files: 16-byte header of four little-endian u32 extents
// (N, C, H, W) followed by the row-major f32 elements, little-endian.

pub fn write_fixture(path: &Path, t: &Tensor4) -> Result<()> {
    let s = t.shape();
    let mut bytes = Vec::with_capacity(16 + 4 * t.data.len());
    for dim in [s.n, s.c, s.h, s.w] {
        let d = u32::try_from(dim)
            .map_err(|_| Error::config(format!("extent {dim} exceeds fixture u32 range")))?;
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    for v in &t.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_fixture(path: &Path) -> Result<Tensor4> {
    let bytes = fs::read(path)?;
    let origin = path.display().to_string();
    if bytes.len() < 16 {
        return Err(Error::Parse {
            origin,
            line: 0,
            msg: format!("fixture header needs 16 bytes, file has {}", bytes.len()),
        });
    }
    let mut dims = [0usize; 4];
    for (i, d) in dims.iter_mut().enumerate() {
        *d = u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    }
    let shape = Shape4::new(dims[0], dims[1], dims[2], dims[3]).map_err(|e| Error::Parse {
        origin: origin.clone(),
        line: 0,
        msg: e.to_string(),
    })?;
    let want = 16 + 4 * shape.len();
    if bytes.len() != want {
        return Err(Error::Parse {
            origin,
            line: 0,
            msg: format!(
                "shape {} implies {} bytes, file has {}",
                shape,
                want,
                bytes.len()
            ),
        });
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Tensor4::from_vec(shape, data)
}
