//! Convolution workload descriptions and the analytic cost model.
//!
//! A network table lists the convolution layers of one network variant plus
//! any non-convolution costs (batch norm, classifier head) needed to account
//! for its full parameter and multiply-accumulate budget. Tables for three
//! reference networks ship with the crate in six variants each: the standard
//! network `S` and grouped rewrites `G(g)` where every block convolution is
//! replaced by a grouped convolution followed by a pointwise one (`G(N)`
//! pushes the group count to the channel count, making the grouped part
//! depthwise).
//!
//! The MAC count of one grouped convolution layer is exact:
//!
//! ```text
//! macs = n * (c_in / g) * c_out * k_h * k_w * h_out * w_out
//! ```
//!
//! and the weight count is `c_out * (c_in / g) * k_h * k_w`; both are
//! computed in u64 with no rounding.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conv_ref::ConvParams;
use crate::error::{Error, Result};
use crate::tensor::{output_spatial_dims, PaddingSpec};

/// Role of a convolution layer inside a network table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    /// Ungrouped convolution (stems, shortcuts, original blocks).
    Standard,
    /// Grouped convolution with two or more groups.
    Grouped,
    /// 1x1 stride-1 ungrouped convolution mixing channels after a grouped
    /// layer.
    Pointwise,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::Standard => "standard",
            LayerKind::Grouped => "grouped",
            LayerKind::Pointwise => "pointwise",
        };
        f.write_str(s)
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(LayerKind::Standard),
            "grouped" => Ok(LayerKind::Grouped),
            "pointwise" => Ok(LayerKind::Pointwise),
            other => Err(Error::config(format!("unknown layer kind {other:?}"))),
        }
    }
}

/// One convolution layer at a known input resolution and batch size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub params: ConvParams,
    pub n: usize,
    pub in_h: usize,
    pub in_w: usize,
}

impl LayerSpec {
    pub fn out_dims(&self) -> Result<(usize, usize)> {
        output_spatial_dims(&self.params, self.in_h, self.in_w)
    }

    /// Exact multiply-accumulate count of this layer.
    pub fn macs(&self) -> Result<u64> {
        conv_macs(&self.params, self.n, self.in_h, self.in_w)
    }

    /// Exact weight count of this layer.
    pub fn weight_count(&self) -> u64 {
        conv_weight_count(&self.params)
    }
}

/// `n * (c_in / g) * c_out * k_h * k_w * h_out * w_out`, exact in u64.
pub fn conv_macs(params: &ConvParams, n: usize, in_h: usize, in_w: usize) -> Result<u64> {
    let (h_out, w_out) = output_spatial_dims(params, in_h, in_w)?;
    Ok(n as u64
        * (params.c_in / params.groups) as u64
        * params.c_out as u64
        * params.k_h as u64
        * params.k_w as u64
        * h_out as u64
        * w_out as u64)
}

/// `c_out * (c_in / g) * k_h * k_w`; grouping divides the weight count by g.
pub fn conv_weight_count(params: &ConvParams) -> u64 {
    params.c_out as u64
        * (params.c_in / params.groups) as u64
        * params.k_h as u64
        * params.k_w as u64
}

/// Non-convolution cost carried by a network table (batch norm pairs,
/// classifier head) so variant totals cover the whole network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraCost {
    pub label: String,
    pub params: u64,
    pub macs: u64,
}

/// A network variant: its convolution layers plus extra costs and the
/// published top-1 error of the trained model (metadata only, nothing here
/// trains anything).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub variant: String,
    pub top1: f64,
    pub layers: Vec<LayerSpec>,
    pub extras: Vec<ExtraCost>,
}

/// Per-layer slice of a totals report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub index: usize,
    pub kind: LayerKind,
    pub params: u64,
    pub macs: u64,
}

/// Parameter and MAC totals of one network variant. The totals are the u64
/// sums of the per-layer and extra entries, nothing is estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkTotals {
    pub per_layer: Vec<LayerCost>,
    pub conv_params: u64,
    pub conv_macs: u64,
    pub extra_params: u64,
    pub extra_macs: u64,
    pub total_params: u64,
    pub total_macs: u64,
}

pub fn network_totals(net: &NetworkSpec) -> Result<NetworkTotals> {
    let mut per_layer = Vec::with_capacity(net.layers.len());
    let (mut conv_params, mut conv_macs) = (0u64, 0u64);
    for (index, layer) in net.layers.iter().enumerate() {
        let cost = LayerCost {
            index,
            kind: layer.kind,
            params: layer.weight_count(),
            macs: layer.macs()?,
        };
        conv_params += cost.params;
        conv_macs += cost.macs;
        per_layer.push(cost);
    }
    let extra_params = net.extras.iter().map(|e| e.params).sum();
    let extra_macs = net.extras.iter().map(|e| e.macs).sum();
    Ok(NetworkTotals {
        per_layer,
        conv_params,
        conv_macs,
        extra_params,
        extra_macs,
        total_params: conv_params + extra_params,
        total_macs: conv_macs + extra_macs,
    })
}

/// Predicted runtime of a workload from a measured reference: scales the
/// reference time by the MAC ratio. `s_time_ms` must be positive and finite,
/// `s_macs` nonzero.
pub fn expected_time(s_time_ms: f64, s_macs: u64, target_macs: u64) -> Result<f64> {
    if !(s_time_ms.is_finite() && s_time_ms > 0.0) {
        return Err(Error::config(format!(
            "reference time must be positive and finite, got {s_time_ms}"
        )));
    }
    if s_macs == 0 {
        return Err(Error::config("reference MAC count must be nonzero"));
    }
    Ok(s_time_ms * target_macs as f64 / s_macs as f64)
}

/// Structural lint for grouped rewrites: every grouped layer must be
/// directly followed by a pointwise layer consuming its output. Not part of
/// parsing because standalone grouped-layer tables are legitimate inputs.
pub fn check_grouped_pointwise_pairs(net: &NetworkSpec) -> Result<()> {
    for (i, layer) in net.layers.iter().enumerate() {
        if layer.kind != LayerKind::Grouped {
            continue;
        }
        let next = net.layers.get(i + 1).ok_or_else(|| {
            Error::config(format!(
                "grouped layer {i} is not followed by a pointwise layer"
            ))
        })?;
        let (h_out, w_out) = layer.out_dims()?;
        if next.kind != LayerKind::Pointwise
            || next.params.c_in != layer.params.c_out
            || (next.in_h, next.in_w) != (h_out, w_out)
        {
            return Err(Error::config(format!(
                "grouped layer {i} ({}x{} -> {} ch) is not followed by a matching pointwise layer",
                layer.in_h, layer.in_w, layer.params.c_out
            )));
        }
    }
    Ok(())
}

const TABLE_HEADER: &str = "gspc-net-table v1";

/// Parses the versioned network table format:
///
/// ```text
/// gspc-net-table v1
/// network <name>
/// variant <label>
/// top1 <percent>
/// layer <kind> <c_in> <c_out> <k_h> <k_w> <s_h> <s_w> <pad_h> <pad_w> <g> <in_h> <in_w>
/// extra <label> <params> <macs>
/// ```
///
/// Lines starting with `#` and blank lines are ignored. Layers use batch
/// size 1. `origin` names the source in error messages.
pub fn parse_network_table(text: &str, origin: &str) -> Result<NetworkSpec> {
    let perr = |line: usize, msg: String| Error::Parse {
        origin: origin.to_string(),
        line,
        msg,
    };
    let mut name: Option<String> = None;
    let mut variant: Option<String> = None;
    let mut top1: Option<f64> = None;
    let mut layers = Vec::new();
    let mut extras = Vec::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != TABLE_HEADER {
                return Err(perr(
                    lineno,
                    format!("expected header {TABLE_HEADER:?}, got {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split_whitespace();
        let keyword = fields.next().unwrap();
        let rest: Vec<&str> = fields.collect();
        match keyword {
            "network" | "variant" => {
                if rest.len() != 1 {
                    return Err(perr(lineno, format!("{keyword} takes one value")));
                }
                let slot = if keyword == "network" {
                    &mut name
                } else {
                    &mut variant
                };
                if slot.is_some() {
                    return Err(perr(lineno, format!("duplicate {keyword} line")));
                }
                *slot = Some(rest[0].to_string());
            }
            "top1" => {
                if top1.is_some() {
                    return Err(perr(lineno, "duplicate top1 line".into()));
                }
                let v: f64 = rest
                    .first()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| perr(lineno, format!("top1 needs a number, got {rest:?}")))?;
                top1 = Some(v);
            }
            "layer" => {
                if rest.len() != 12 {
                    return Err(perr(
                        lineno,
                        format!(
                            "layer takes kind plus 11 integers, got {} fields",
                            rest.len()
                        ),
                    ));
                }
                let kind: LayerKind = rest[0]
                    .parse()
                    .map_err(|e: Error| perr(lineno, e.to_string()))?;
                let mut nums = [0usize; 11];
                for (slot, tok) in nums.iter_mut().zip(&rest[1..]) {
                    *slot = tok
                        .parse()
                        .map_err(|_| perr(lineno, format!("invalid integer {tok:?}")))?;
                }
                let [c_in, c_out, k_h, k_w, s_h, s_w, pad_h, pad_w, g, in_h, in_w] = nums;
                let params = ConvParams::new(
                    c_in,
                    c_out,
                    k_h,
                    k_w,
                    s_h,
                    s_w,
                    PaddingSpec { h: pad_h, w: pad_w },
                    g,
                )
                .map_err(|e| perr(lineno, e.to_string()))?;
                match kind {
                    LayerKind::Standard if g != 1 => {
                        return Err(perr(
                            lineno,
                            format!("standard layer must have g=1, got {g}"),
                        ));
                    }
                    LayerKind::Grouped if g < 2 => {
                        return Err(perr(
                            lineno,
                            format!("grouped layer must have g>=2, got {g}"),
                        ));
                    }
                    LayerKind::Pointwise
                        if (k_h, k_w, s_h, s_w, pad_h, pad_w, g) != (1, 1, 1, 1, 0, 0, 1) =>
                    {
                        return Err(perr(
                            lineno,
                            "pointwise layer must be 1x1, stride 1, unpadded, ungrouped".into(),
                        ));
                    }
                    _ => {}
                }
                let layer = LayerSpec {
                    kind,
                    params,
                    n: 1,
                    in_h,
                    in_w,
                };
                layer.out_dims().map_err(|e| perr(lineno, e.to_string()))?;
                layers.push(layer);
            }
            "extra" => {
                if rest.len() != 3 {
                    return Err(perr(
                        lineno,
                        format!("extra takes label, params, macs; got {} fields", rest.len()),
                    ));
                }
                let parse_u64 = |tok: &str| {
                    tok.parse::<u64>()
                        .map_err(|_| perr(lineno, format!("invalid count {tok:?}")))
                };
                extras.push(ExtraCost {
                    label: rest[0].to_string(),
                    params: parse_u64(rest[1])?,
                    macs: parse_u64(rest[2])?,
                });
            }
            other => {
                return Err(perr(lineno, format!("unknown record type {other:?}")));
            }
        }
    }

    if !saw_header {
        return Err(perr(0, format!("missing header {TABLE_HEADER:?}")));
    }
    let name = name.ok_or_else(|| perr(0, "missing network line".into()))?;
    let variant = variant.ok_or_else(|| perr(0, "missing variant line".into()))?;
    let top1 = top1.ok_or_else(|| perr(0, "missing top1 line".into()))?;
    if layers.is_empty() {
        return Err(perr(0, "table has no layer records".into()));
    }
    Ok(NetworkSpec {
        name,
        variant,
        top1,
        layers,
        extras,
    })
}

pub fn load_network_table(path: &Path) -> Result<NetworkSpec> {
    let text = fs::read_to_string(path)?;
    parse_network_table(&text, &path.display().to_string())
}

/// Builtin network names, in the order reports print them.
pub const NETWORK_NAMES: [&str; 3] = ["wrn40_2", "resnet34", "mobilenet_v2"];

/// Canonical variant keys, cheapest-accuracy first, fewest MACs last.
pub const VARIANT_KEYS: [&str; 6] = ["s", "g2", "g4", "g8", "g16", "gn"];

/// Lowercases and maps `-` to `_` so `wrn40-2` and `WRN40_2` both resolve.
pub fn normalize_network_name(s: &str) -> String {
    s.to_ascii_lowercase().replace('-', "_")
}

/// Maps a variant spelling (`S`, `g4`, `G(16)`, `G(N)`) to its canonical
/// key (`s`, `g4`, `g16`, `gn`).
pub fn normalize_variant(s: &str) -> Result<String> {
    let lower = s.to_ascii_lowercase();
    if lower == "s" {
        return Ok(lower);
    }
    let body = lower
        .strip_prefix("g")
        .map(|b| b.trim_start_matches('(').trim_end_matches(')'))
        .unwrap_or("");
    if body == "n" {
        return Ok("gn".to_string());
    }
    if !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()) {
        return Ok(format!("g{body}"));
    }
    Err(Error::config(format!(
        "unknown variant {s:?}; expected s, g<count> or gn"
    )))
}

/// Display label for a canonical variant key: `g4` prints as `G(4)`.
pub fn variant_label(key: &str) -> String {
    match key {
        "s" => "S".to_string(),
        "gn" => "G(N)".to_string(),
        other => match other.strip_prefix('g') {
            Some(d) if !d.is_empty() => format!("G({d})"),
            _ => other.to_uppercase(),
        },
    }
}

/// Sort rank of a canonical variant key: `s` first, then ascending group
/// counts, `gn` last.
pub fn variant_rank(key: &str) -> u64 {
    match key {
        "s" => 0,
        "gn" => u64::MAX,
        other => other
            .strip_prefix('g')
            .and_then(|d| d.parse().ok())
            .unwrap_or(u64::MAX - 1),
    }
}

const BUILTIN_TABLES: [(&str, &str, &str); 18] = [
    ("wrn40_2", "s", include_str!("../data/wrn40_2_s.net")),
    ("wrn40_2", "g2", include_str!("../data/wrn40_2_g2.net")),
    ("wrn40_2", "g4", include_str!("../data/wrn40_2_g4.net")),
    ("wrn40_2", "g8", include_str!("../data/wrn40_2_g8.net")),
    ("wrn40_2", "g16", include_str!("../data/wrn40_2_g16.net")),
    ("wrn40_2", "gn", include_str!("../data/wrn40_2_gn.net")),
    ("resnet34", "s", include_str!("../data/resnet34_s.net")),
    ("resnet34", "g2", include_str!("../data/resnet34_g2.net")),
    ("resnet34", "g4", include_str!("../data/resnet34_g4.net")),
    ("resnet34", "g8", include_str!("../data/resnet34_g8.net")),
    ("resnet34", "g16", include_str!("../data/resnet34_g16.net")),
    ("resnet34", "gn", include_str!("../data/resnet34_gn.net")),
    (
        "mobilenet_v2",
        "s",
        include_str!("../data/mobilenet_v2_s.net"),
    ),
    (
        "mobilenet_v2",
        "g2",
        include_str!("../data/mobilenet_v2_g2.net"),
    ),
    (
        "mobilenet_v2",
        "g4",
        include_str!("../data/mobilenet_v2_g4.net"),
    ),
    (
        "mobilenet_v2",
        "g8",
        include_str!("../data/mobilenet_v2_g8.net"),
    ),
    (
        "mobilenet_v2",
        "g16",
        include_str!("../data/mobilenet_v2_g16.net"),
    ),
    (
        "mobilenet_v2",
        "gn",
        include_str!("../data/mobilenet_v2_gn.net"),
    ),
];

/// Loads one of the tables compiled into the crate. `name` and `variant`
/// accept any spelling [`normalize_network_name`] and [`normalize_variant`]
/// recognize.
pub fn builtin_network(name: &str, variant: &str) -> Result<NetworkSpec> {
    let name_key = normalize_network_name(name);
    let variant_key = normalize_variant(variant)?;
    let (_, _, text) = BUILTIN_TABLES
        .iter()
        .find(|(n, v, _)| *n == name_key && *v == variant_key)
        .ok_or_else(|| {
            Error::Lookup(format!(
                "no builtin table for network {name:?} variant {variant:?}; networks: {}, variants: {}",
                NETWORK_NAMES.join(", "),
                VARIANT_KEYS.join(", ")
            ))
        })?;
    parse_network_table(text, &format!("builtin:{name_key}/{variant_key}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::too_many_arguments)]
    fn layer(
        kind: LayerKind,
        c_in: usize,
        c_out: usize,
        k: usize,
        s: usize,
        pad: usize,
        g: usize,
        hw: usize,
    ) -> LayerSpec {
        LayerSpec {
            kind,
            params: ConvParams::new(c_in, c_out, k, k, s, s, PaddingSpec { h: pad, w: pad }, g)
                .unwrap(),
            n: 1,
            in_h: hw,
            in_w: hw,
        }
    }

    #[test]
    fn mac_formula_is_exact() {
        let l = layer(LayerKind::Grouped, 64, 128, 3, 1, 1, 4, 56);
        assert_eq!(l.macs().unwrap(), 16 * 128 * 9 * 56 * 56);
        assert_eq!(l.weight_count(), 128 * 16 * 9);
        let pw = layer(LayerKind::Pointwise, 64, 256, 1, 1, 0, 1, 14);
        assert_eq!(pw.macs().unwrap(), 64 * 256 * 14 * 14);
        assert_eq!(pw.weight_count(), 64 * 256);
    }

    #[test]
    fn doubling_groups_halves_macs_exactly() {
        let base = layer(LayerKind::Standard, 64, 64, 3, 1, 1, 1, 28)
            .macs()
            .unwrap();
        for g in [2usize, 4, 8, 16] {
            let grouped = layer(LayerKind::Grouped, 64, 64, 3, 1, 1, g, 28);
            assert_eq!(grouped.macs().unwrap() * g as u64, base);
        }
    }

    #[test]
    fn strided_layer_uses_output_resolution() {
        let l = layer(LayerKind::Standard, 16, 32, 3, 2, 1, 1, 32);
        // (32 + 2 - 3)/2 + 1 = 16 outputs per side.
        assert_eq!(l.macs().unwrap(), 16 * 32 * 9 * 16 * 16);
    }

    #[test]
    fn parses_a_small_table() {
        let text = "\
gspc-net-table v1
network tiny
variant G(2)
top1 7.25
# a comment
layer grouped 8 8 3 3 1 1 1 1 2 16 16
layer pointwise 8 12 1 1 1 1 0 0 1 16 16
extra batchnorm 40 5120
";
        let net = parse_network_table(text, "test").unwrap();
        assert_eq!(net.name, "tiny");
        assert_eq!(net.variant, "G(2)");
        assert_eq!(net.top1, 7.25);
        assert_eq!(net.layers.len(), 2);
        assert_eq!(net.extras.len(), 1);
        assert_eq!(net.layers[0].params.groups, 2);
        let totals = network_totals(&net).unwrap();
        assert_eq!(totals.conv_params, 8 * 4 * 9 + 8 * 12);
        assert_eq!(totals.conv_macs, 4 * 8 * 9 * 16 * 16 + 8 * 12 * 16 * 16);
        assert_eq!(totals.total_params, totals.conv_params + 40);
        assert_eq!(totals.total_macs, totals.conv_macs + 5120);
        check_grouped_pointwise_pairs(&net).unwrap();
    }

    #[test]
    fn parser_rejects_malformed_tables() {
        let bad = [
            ("nonsense v9\n", "expected header"),
            ("gspc-net-table v1\nnetwork a\n", "missing variant"),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\nwidget 3\n",
                "unknown record type",
            ),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\nlayer standard 8 8 3 3 1 1 1 1 1\n",
                "11 integers",
            ),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\nlayer standard 8 8 3 3 1 1 1 1 2 8 8\n",
                "g=1",
            ),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\nlayer pointwise 8 8 3 3 1 1 1 1 1 8 8\n",
                "pointwise layer must be 1x1",
            ),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\nlayer grouped 8 8 3 3 1 1 1 1 3 8 8\n",
                "does not divide",
            ),
            (
                "gspc-net-table v1\nnetwork a\nvariant S\ntop1 1\n",
                "no layer records",
            ),
        ];
        for (text, needle) in bad {
            let err = parse_network_table(text, "test").unwrap_err().to_string();
            assert!(err.contains(needle), "expected {needle:?} in {err:?}");
        }
    }

    #[test]
    fn pairing_lint_flags_unpaired_grouped_layers() {
        let text = "\
gspc-net-table v1
network tiny
variant G(2)
top1 9.0
layer grouped 8 8 3 3 1 1 1 1 2 16 16
layer standard 8 8 3 3 1 1 1 1 1 16 16
";
        let net = parse_network_table(text, "test").unwrap();
        assert!(check_grouped_pointwise_pairs(&net).is_err());
    }

    #[test]
    fn builtin_tables_load_with_frozen_totals() {
        let wrn = builtin_network("wrn40-2", "S").unwrap();
        assert_eq!(wrn.layers.len(), 40);
        assert_eq!(wrn.variant, "S");
        let t = network_totals(&wrn).unwrap();
        assert_eq!(t.total_params, 2_242_256);
        assert_eq!(t.total_macs, 328_302_592);

        let rn = builtin_network("resnet34", "G(N)").unwrap();
        let t = network_totals(&rn).unwrap();
        assert_eq!(t.total_params, 3_132_520);
        assert_eq!(t.total_macs, 557_352_704);

        let mb = builtin_network("MOBILENET_V2", "g4").unwrap();
        let t = network_totals(&mb).unwrap();
        assert_eq!(t.total_params, 13_593_224);
        assert_eq!(t.total_macs, 1_604_006_496);

        assert!(builtin_network("lenet", "s").is_err());
        assert!(builtin_network("wrn40_2", "g3").is_err());
    }

    #[test]
    fn grouped_builtins_pass_the_pairing_lint() {
        for net in NETWORK_NAMES {
            for v in VARIANT_KEYS {
                let spec = builtin_network(net, v).unwrap();
                check_grouped_pointwise_pairs(&spec).unwrap();
            }
        }
    }

    #[test]
    fn expected_time_scales_by_mac_ratio() {
        let t = expected_time(65.0, 328_300_000, 44_830_000).unwrap();
        assert!((t - 8.8759).abs() < 1e-3, "{t}");
        assert_eq!(expected_time(65.0, 100, 100).unwrap(), 65.0);
        assert!(expected_time(0.0, 100, 100).is_err());
        assert!(expected_time(f64::NAN, 100, 100).is_err());
        assert!(expected_time(1.0, 0, 100).is_err());
    }

    #[test]
    fn variant_spellings_normalize() {
        assert_eq!(normalize_variant("S").unwrap(), "s");
        assert_eq!(normalize_variant("G(16)").unwrap(), "g16");
        assert_eq!(normalize_variant("g8").unwrap(), "g8");
        assert_eq!(normalize_variant("G(N)").unwrap(), "gn");
        assert!(normalize_variant("base").is_err());
        assert_eq!(variant_label("g4"), "G(4)");
        assert_eq!(variant_label("s"), "S");
        assert_eq!(variant_label("gn"), "G(N)");
        let mut keys = VARIANT_KEYS.to_vec();
        keys.sort_by_key(|k| variant_rank(k));
        assert_eq!(keys, VARIANT_KEYS.to_vec());
    }
}
