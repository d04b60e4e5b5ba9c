mod common;

use kanbound::bounds::{cover_radius_composition, covering_bound_kan, maurey_sparsify};
use kanbound::complexity::{alpha_tilde, complexity_measure, layer_stats, normalize_series, ComplexityMode, LayerStats};
use kanbound::experiments::{loss_and_grad, Task};
use kanbound::net::{init_network, Checkpoint, KanLayer};
use kanbound::numeric::{frobenius_norm, spectral_norm_default, Matrix, RngState};
use kanbound::spline::{EdgeBasis, LipschitzMode, SplineSpec};
use proptest::prelude::*;

fn matrix(max_r: usize, max_c: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |d| Matrix::new(r, c, d).unwrap())
    })
}

fn spline_spec() -> impl Strategy<Value = SplineSpec> {
    spec_from(0)
}

fn spec_from(min_degree: usize) -> impl Strategy<Value = SplineSpec> {
    (min_degree..=3, 1usize..=10, -3.0f64..0.0, 0.1f64..3.0)
        .prop_map(|(p, g, a, w)| SplineSpec::new(p, g, a, a + w).unwrap())
}

fn stats_list() -> impl Strategy<Value = Vec<LayerStats>> {
    prop::collection::vec((0.0f64..5.0, 0.0f64..3.0, 0.0f64..3.0), 1..6).prop_map(|v| {
        v.into_iter()
            .map(|(b, c, r)| LayerStats {
                b_l: b,
                c_l: c,
                rho_l: r,
                rho_coarse: r,
                sigma_a: r,
                sum_ak_sq: c * c,
                offset_norm: 0.0,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_below_frobenius(m in matrix(8, 12)) {
        let s = spectral_norm_default(&m).unwrap();
        prop_assert!(s <= frobenius_norm(&m) * (1.0 + 1e-12));
        prop_assert!((s - common::spectral_norm_oracle(&m)).abs() <= 1e-8 * s.max(1.0));
    }

    #[test]
    fn spectral_is_absolutely_homogeneous(m in matrix(6, 9), c in -5.0f64..5.0) {
        let s = spectral_norm_default(&m).unwrap();
        let sc = spectral_norm_default(&m.scaled(c).unwrap()).unwrap();
        prop_assert!((sc - c.abs() * s).abs() <= 1e-9 * (c.abs() * s).max(1.0));
    }

    #[test]
    fn same_seed_same_stream(seed in any::<u64>()) {
        let mut a = RngState::new(seed);
        let mut b = RngState::new(seed);
        for _ in 0..32 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
            prop_assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn spline_partition_and_range(s in spline_spec(), t in -0.5f64..1.5) {
        let x = s.grid_min() + t * (s.grid_max() - s.grid_min());
        let v = s.eval(x);
        prop_assert_eq!(v.len(), s.grid_count() + s.degree());
        prop_assert!(v.iter().all(|&b| (0.0..=1.0 + 1e-15).contains(&b)));
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn basis_is_lipschitz(s in spec_from(1), silu in any::<bool>(), x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let basis = EdgeBasis::new(s, silu);
        let a = basis.lipschitz(LipschitzMode::Grid).unwrap();
        let (gx, gy) = (basis.eval(x), basis.eval(y));
        for k in 0..a.len() {
            prop_assert!((gx[k] - gy[k]).abs() <= a[k] * (x - y).abs() * (1.0 + 1e-9) + 1e-12);
        }
        let an = basis.lipschitz(LipschitzMode::Analytic).unwrap();
        prop_assert!(a.iter().zip(&an).all(|(g, h)| *g <= *h * (1.0 + 1e-12)));
    }

    #[test]
    fn layers_map_zero_to_zero(seed in any::<u64>(), d_in in 1usize..6, d_out in 1usize..6) {
        let net = init_network(&[d_in, d_out], &EdgeBasis::default_kan(), seed).unwrap();
        let mut layer = net.layer(0).clone();
        let mut rng = RngState::new(seed);
        let k = layer.total_count();
        for i in 0..d_out { for j in 0..d_in { for b in 0..k {
            layer.set_weight(i, j, b, rng.normal(0.0, 3.0));
        }}}
        prop_assert!(layer.forward(&vec![0.0; d_in], 0.0, None).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layer_stats_scale(seed in any::<u64>(), t in 0.01f64..10.0) {
        let basis = EdgeBasis::new(SplineSpec::new(2, 4, -1.0, 1.0).unwrap(), true);
        let net = init_network(&[3, 4, 2], &basis, seed).unwrap();
        let layer = net.layer(0);
        let scaled = KanLayer::new(layer.d_in(), layer.d_out(), basis.clone(),
            layer.weights().iter().map(|w| w * t).collect()).unwrap();
        let (s0, s1) = (layer_stats(layer, LipschitzMode::Grid).unwrap(), layer_stats(&scaled, LipschitzMode::Grid).unwrap());
        prop_assert!((s1.b_l - t * s0.b_l).abs() <= 1e-12 * s1.b_l.max(1.0));
        prop_assert!((s1.sigma_a - t * s0.sigma_a).abs() <= 1e-9 * s1.sigma_a.max(1.0));
        prop_assert!((s1.rho_l - t * s0.rho_l).abs() <= 1e-9 * s1.rho_l.max(1.0));
        prop_assert_eq!(s1.c_l, s0.c_l);
        prop_assert!(s0.rho_l <= s0.sigma_a * s0.c_l * (layer.total_count() as f64).sqrt() + 1e-9);
        prop_assert!(s0.rho_l <= s0.rho_coarse + 1e-9);

        // The measure recomputed from scaled stats matches a fresh computation.
        let other = layer_stats(net.layer(1), LipschitzMode::Grid).unwrap();
        let fresh = complexity_measure(&[s1.clone(), other.clone()], ComplexityMode::Section3).unwrap();
        let mut by_hand = s0.clone();
        by_hand.b_l *= t;
        by_hand.rho_l *= t;
        let rescaled = complexity_measure(&[by_hand, other], ComplexityMode::Section3).unwrap();
        prop_assert!((fresh - rescaled).abs() <= 1e-10 * fresh.max(1.0));
    }

    #[test]
    fn alpha_closed_form(stats in stats_list(), d in 0.0f64..10.0) {
        let (alpha, total) = alpha_tilde(&stats, d).unwrap();
        prop_assert_eq!(alpha.len(), stats.len());
        let prod: f64 = stats.iter().map(|s| s.rho_l).product();
        let sum: f64 = stats.iter().map(|s| (s.b_l * s.c_l).powf(2.0 / 3.0)).sum();
        prop_assert!((total - (d * prod).powf(2.0 / 3.0) * sum).abs() <= 1e-10 * total.max(1.0));
        let measure = complexity_measure(&stats, ComplexityMode::Section3).unwrap();
        let (_, unit) = alpha_tilde(&stats, 1.0).unwrap();
        prop_assert!((measure - unit).abs() <= 1e-10 * measure.max(1.0));
        prop_assert!(complexity_measure(&stats, ComplexityMode::RKan).unwrap() >= 0.0);
    }

    #[test]
    fn normalization(v in prop::collection::vec(-100.0f64..100.0, 2..40), u_last in -5.0f64..5.0,
                     a in 0.01f64..10.0, b in -10.0f64..10.0) {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-6);
        let mut u = vec![0.0; v.len()];
        *u.last_mut().unwrap() = u_last;
        let out = normalize_series(&v, &u).unwrap();
        let peak = out[v.iter().position(|&x| x == hi).unwrap()];
        prop_assert_eq!(peak, u_last);
        if u_last >= 0.0 {
            prop_assert_eq!(out.iter().copied().fold(f64::NEG_INFINITY, f64::max), u_last);
        }
        let affine: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        let again = normalize_series(&affine, &u).unwrap();
        for (p, q) in out.iter().zip(&again) {
            prop_assert!((p - q).abs() <= 1e-9 * u_last.abs().max(1e-3));
        }
    }

    #[test]
    fn covering_scales_with_eps(alpha in 0.0f64..5.0, d in 1u64..200, p in 1u64..50, eps in 0.01f64..10.0) {
        let at1 = covering_bound_kan(alpha, d, p, 1.0);
        prop_assert_eq!(covering_bound_kan(alpha, d, p, eps), at1 / (eps * eps));
    }

    #[test]
    fn radius_recursion_matches_sum(pairs in prop::collection::vec((0.0f64..2.0, 0.0f64..3.0), 1..8)) {
        let eps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let rho: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let s = cover_radius_composition(&eps, &rho).unwrap();
        for k in 0..eps.len() {
            let closed: f64 = (0..=k).map(|i| rho[i + 1..=k].iter().product::<f64>() * eps[i]).sum();
            prop_assert!((s[k] - closed).abs() <= 1e-12 * closed.max(1.0));
        }
    }

    #[test]
    fn maurey_counts_and_bound(seed in any::<u64>(), n in 1usize..8, k in 1usize..80) {
        let mut rng = RngState::new(seed);
        let v: Vec<Matrix> = (0..n).map(|_| Matrix::from_fn(2, 3, |_, _| rng.normal(0.0, 1.0)).unwrap()).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
        let s = maurey_sparsify(&v, &a, k, &mut rng, 200).unwrap();
        prop_assert_eq!(s.counts.iter().sum::<usize>(), k);
        prop_assert!(s.error <= s.bound);
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), epoch in 0usize..1000) {
        let net = init_network(&[3, 2, 2], &EdgeBasis::default_kan(), seed).unwrap();
        let ck = Checkpoint::from_network(&net, seed, epoch).unwrap();
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &ck);
        prop_assert_eq!(back.to_network().unwrap(), net);
    }

    #[test]
    fn loss_gradients_match_differences(seed in any::<u64>(), n in 1usize..6, which in 0usize..3) {
        let mut rng = RngState::new(seed);
        let (task, q) = match which {
            0 => (Task::Regression, 1),
            1 => (Task::Binary, 1),
            _ => (Task::Multiclass { classes: 3 }, 3),
        };
        let pred = Matrix::from_fn(n, q, |_, _| rng.normal(0.0, 2.0)).unwrap();
        let y: Vec<f64> = (0..n).map(|_| match task {
            Task::Regression => rng.normal(0.0, 1.0),
            Task::Binary => (rng.next_u64() % 2) as f64,
            Task::Multiclass { classes } => (rng.next_u64() % classes as u64) as f64,
        }).collect();
        let (_, grad) = loss_and_grad(task, &pred, &y).unwrap();
        let h = 1e-3;
        for e in 0..n * q {
            let bump = |delta: f64| {
                let mut d = pred.data().to_vec();
                d[e] += delta;
                loss_and_grad(task, &Matrix::new(n, q, d).unwrap(), &y).unwrap().0
            };
            let fd = (8.0 * (bump(h) - bump(-h)) - (bump(2.0 * h) - bump(-2.0 * h))) / (12.0 * h);
            prop_assert!(common::rel_err(grad.data()[e], fd) < 1e-6, "{} vs {}", grad.data()[e], fd);
        }
    }
}
