//! Property tests for the reference convolution and the kernels verified
//! against it: algebraic identities of convolution itself plus agreement
//! across all implementations on randomized workloads.

use gspc_core::{
    allclose, default_tiles, direct_grouped_conv, gspc_conv, run_kernel, ConvParams, KernelId,
    PaddingSpec, Shape4, Tensor4, TileConfig, ATOL, RTOL,
};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Case {
    params: ConvParams,
    n: usize,
    in_h: usize,
    in_w: usize,
    x_seed: u64,
    w_seed: u64,
}

fn case_strategy() -> impl Strategy<Value = Case> {
    (
        1usize..=4, // groups
        1usize..=4, // channels per group
        1usize..=4, // kernels per group
        prop::sample::select(vec![1usize, 3]),
        1usize..=2, // stride
        0usize..=1, // padding
        1usize..=2, // batch
        any::<u64>(),
        any::<u64>(),
    )
        .prop_flat_map(|(g, cpg, kpg, k, s, pad, n, x_seed, w_seed)| {
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
            .expect("strategy yields valid parameters");
            (
                Just(params),
                Just(n),
                k..=8usize,
                k..=8usize,
                Just(x_seed),
                Just(w_seed),
            )
        })
        .prop_map(|(params, n, in_h, in_w, x_seed, w_seed)| Case {
            params,
            n,
            in_h,
            in_w,
            x_seed,
            w_seed,
        })
}

fn tensors(case: &Case) -> (Tensor4, Tensor4) {
    let x = Tensor4::random(
        Shape4::new(case.n, case.params.c_in, case.in_h, case.in_w).unwrap(),
        case.x_seed,
    );
    let w = Tensor4::random(case.params.weight_shape(), case.w_seed);
    (x, w)
}

fn scaled(t: &Tensor4, alpha: f32) -> Tensor4 {
    let data = t.data().iter().map(|v| v * alpha).collect();
    Tensor4::from_vec(t.shape(), data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_kernels_agree_with_the_reference(case in case_strategy()) {
        let (x, w) = tensors(&case);
        let want = direct_grouped_conv(&x, &w, &case.params).unwrap();
        // Smallest, default and largest tilings of the spatial-pack kernel.
        let tilings = [
            TileConfig { t_o: 1, t_i: 1, unroll_kw: false },
            default_tiles(&case.params, 4),
            TileConfig {
                t_o: case.params.kpg(),
                t_i: case.params.cpg(),
                unroll_kw: true,
            },
        ];
        for tiles in tilings {
            let got = gspc_conv(&x, &w, &case.params, &tiles, None).unwrap();
            prop_assert!(
                allclose(&got, &want, RTOL, ATOL).unwrap(),
                "tiles {:?}", tiles
            );
        }
        for id in [KernelId::GroupedDirect, KernelId::Im2colGemm] {
            let tiles = default_tiles(&case.params, 4);
            let got = run_kernel(id, &x, &w, &case.params, &tiles, None, false).unwrap();
            // Baselines accumulate in the reference order: bit-identical.
            prop_assert_eq!(got.data(), want.data(), "{}", id);
        }
    }

    #[test]
    fn convolution_is_linear_under_binary_scaling(case in case_strategy()) {
        // Powers of two scale f32 values exactly, so linearity holds
        // bitwise, not just within tolerance.
        let (x, w) = tensors(&case);
        let base = direct_grouped_conv(&x, &w, &case.params).unwrap();
        for alpha in [0.5f32, 2.0, 4.0] {
            let scaled_in = direct_grouped_conv(&scaled(&x, alpha), &w, &case.params).unwrap();
            let scaled_out = scaled(&base, alpha);
            prop_assert_eq!(scaled_in.data(), scaled_out.data());
        }
    }

    #[test]
    fn convolution_is_additive_within_tolerance(case in case_strategy()) {
        let (x1, w) = tensors(&case);
        let x2 = Tensor4::random(x1.shape(), case.x_seed.wrapping_add(1));
        let sum_data = x1
            .data()
            .iter()
            .zip(x2.data())
            .map(|(a, b)| a + b)
            .collect();
        let x_sum = Tensor4::from_vec(x1.shape(), sum_data).unwrap();
        let y_sum = direct_grouped_conv(&x_sum, &w, &case.params).unwrap();
        let y1 = direct_grouped_conv(&x1, &w, &case.params).unwrap();
        let y2 = direct_grouped_conv(&x2, &w, &case.params).unwrap();
        let y12 = Tensor4::from_vec(
            y1.shape(),
            y1.data().iter().zip(y2.data()).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        // Two rounding chains on each side: compare with a loosened bound.
        prop_assert!(allclose(&y_sum, &y12, 1e-4, 1e-5).unwrap());
    }

    #[test]
    fn groups_are_isolated(case in case_strategy()) {
        prop_assume!(case.params.groups > 1);
        let (x, w) = tensors(&case);
        let base = direct_grouped_conv(&x, &w, &case.params).unwrap();
        let cpg = case.params.cpg();
        let kpg = case.params.kpg();
        let zeroed_group = 0usize;
        let mut x0 = x.clone();
        let xs = x0.shape();
        for n in 0..xs.n {
            for c in zeroed_group * cpg..(zeroed_group + 1) * cpg {
                for h in 0..xs.h {
                    for w_ in 0..xs.w {
                        x0.set(n, c, h, w_, 0.0);
                    }
                }
            }
        }
        let y0 = direct_grouped_conv(&x0, &w, &case.params).unwrap();
        let ys = y0.shape();
        for n in 0..ys.n {
            for c in 0..ys.c {
                for h in 0..ys.h {
                    for w_ in 0..ys.w {
                        if c / kpg == zeroed_group {
                            // Stayed all-zero input: exactly zero output.
                            prop_assert_eq!(y0.at(n, c, h, w_), 0.0);
                        } else {
                            // Other groups never read the zeroed channels.
                            prop_assert_eq!(y0.at(n, c, h, w_), base.at(n, c, h, w_));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn output_shape_follows_the_stride_formula(case in case_strategy()) {
        let (x, w) = tensors(&case);
        let y = direct_grouped_conv(&x, &w, &case.params).unwrap();
        let p = &case.params;
        let h_out = (case.in_h + 2 * p.pad.h - p.k_h) / p.s_h + 1;
        let w_out = (case.in_w + 2 * p.pad.w - p.k_w) / p.s_w + 1;
        prop_assert_eq!(y.shape(), Shape4::new(case.n, p.c_out, h_out, w_out).unwrap());
    }
}
