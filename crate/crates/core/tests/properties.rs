use std::f64::consts::PI;

use mmlab_core::experiments::{self, ExperimentConfig, ExperimentId};
use mmlab_core::invariants::{
    ky_fan, observable_diameter_lb, partial_diameter, partial_diameter_1d, partial_diameter_exhaustive, prokhorov,
    prokhorov_bipartite, verify_eps_mm_isom,
};
use mmlab_core::mm::{pushforward, pushforward_weights};
use mmlab_core::{cone_distance, cone_space, ConeSpec, EpsMmIsomCert, FiniteMmSpace, LipschitzFamily, PointMap};
use proptest::prelude::*;

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

/// Points in the plane with positive weights.
fn planar_space(max: usize) -> impl Strategy<Value = FiniteMmSpace> {
    (1..=max).prop_flat_map(|n| {
        (prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), n), weights(n)).prop_map(|(pts, w)| {
            let dist: Vec<Vec<f64>> = pts
                .iter()
                .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
                .collect();
            FiniteMmSpace::validate(&dist, &w).unwrap()
        })
    })
}

fn line_space(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, n), weights(n)))
}

fn kappa() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -2.0f64..2.0]
}

fn radius_for(kappa: f64, u: f64) -> f64 {
    if kappa > 0.0 {
        u * PI / kappa.sqrt()
    } else {
        3.0 * u
    }
}

proptest! {
    #[test]
    fn cone_distance_is_symmetric_and_separates(k in kappa(), u in 0.0f64..1.0, v in 0.0f64..1.0, theta in 0.0f64..6.0) {
        let (r, rp) = (radius_for(k, u), radius_for(k, v));
        let d = cone_distance(k, r, rp, theta).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - cone_distance(k, rp, r, theta).unwrap()).abs() <= 1e-12);
        prop_assert!(cone_distance(k, r, r, 0.0).unwrap().abs() <= 1e-12);
        prop_assert!(d + 1e-12 >= (r - rp).abs());
    }

    #[test]
    fn cone_distance_ignores_base_distance_beyond_pi(k in kappa(), u in 0.0f64..1.0, v in 0.0f64..1.0, extra in 0.0f64..5.0) {
        let (r, rp) = (radius_for(k, u), radius_for(k, v));
        let at_pi = cone_distance(k, r, rp, PI).unwrap();
        prop_assert_eq!(at_pi, cone_distance(k, r, rp, PI + extra).unwrap());
    }

    #[test]
    fn cone_space_is_a_metric(
        base in planar_space(5),
        k in kappa(),
        radial in prop::collection::vec((0.0f64..1.0, 0.05f64..1.0), 1..4),
    ) {
        let total: f64 = radial.iter().map(|p| p.1).sum();
        let radial: Vec<(f64, f64)> = radial.into_iter().map(|(u, w)| (radius_for(k, u), w / total)).collect();
        let spec = ConeSpec::new(k, radial).unwrap();
        let cone = cone_space(&spec, &base).unwrap();
        prop_assert!(cone.check_triangle().is_ok());
        prop_assert!((cone.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prokhorov_is_symmetric_and_bounded(space in planar_space(8), seed in any::<u64>()) {
        let n = space.len();
        let nu: Vec<f64> = (0..n).map(|i| ((seed >> (i % 60)) & 7) as f64 + 0.5).collect();
        let s: f64 = nu.iter().sum();
        let nu: Vec<f64> = nu.iter().map(|v| v / s).collect();
        let a = prokhorov(&space, space.weights(), &nu).unwrap();
        let b = prokhorov(&space, &nu, space.weights()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(prokhorov(&space, &nu, &nu).unwrap(), 0.0);
    }

    #[test]
    fn prokhorov_satisfies_its_defining_inequality(space in planar_space(7), nu in (1usize..=7).prop_flat_map(weights)) {
        let n = space.len();
        let mut nu = nu;
        nu.resize(n, 0.05);
        let s: f64 = nu.iter().sum();
        nu.iter_mut().for_each(|v| *v /= s);
        let mu = space.weights();
        let eps = prokhorov(&space, mu, &nu).unwrap();
        // every subset meets the bound at eps + tiny, and some subset violates it just below eps
        let slack = 1e-9;
        let violated = |e: f64| {
            (1u32..1 << n).any(|mask| {
                let a: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let nu_a: f64 = a.iter().map(|&i| nu[i]).sum();
                let mu_u: f64 = (0..n).filter(|&j| a.iter().any(|&i| space.d(i, j) < e)).map(|j| mu[j]).sum();
                mu_u < nu_a - e - 1e-12
            })
        };
        prop_assert!(!violated(eps + slack));
        if eps > slack {
            prop_assert!(violated(eps - slack));
        }
    }

    #[test]
    fn ky_fan_triangle_inequality(
        (w, f, g, h) in (1usize..12).prop_flat_map(|n| (
            weights(n),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        ))
    ) {
        let fg = ky_fan(&w, &f, &g).unwrap();
        let gh = ky_fan(&w, &g, &h).unwrap();
        let fh = ky_fan(&w, &f, &h).unwrap();
        prop_assert!(fh <= fg + gh + 1e-12);
        prop_assert_eq!(ky_fan(&w, &f, &f).unwrap(), 0.0);
        prop_assert!((fg - ky_fan(&w, &g, &f).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn prokhorov_of_pushforwards_below_ky_fan(
        (w, f, g) in (1usize..10).prop_flat_map(|n| (
            weights(n),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        ))
    ) {
        let dp = prokhorov_bipartite(&w, &w, |i, j| (f[i] - g[j]).abs()).unwrap();
        prop_assert!(dp <= ky_fan(&w, &f, &g).unwrap() + 1e-12);
    }

    #[test]
    fn partial_diameter_is_monotone(space in planar_space(9), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let p = partial_diameter(&space, lo).unwrap().value;
        let q = partial_diameter(&space, hi).unwrap().value;
        prop_assert!(p <= q + 1e-12);
        prop_assert!((partial_diameter(&space, 1.0).unwrap().value - space.diameter()).abs() <= 1e-12);
    }

    #[test]
    fn line_partial_diameter_matches_subsets((pts, w) in line_space(10), alpha in 0.01f64..1.0) {
        let space = FiniteMmSpace::on_line(&pts, &w).unwrap();
        let exhaustive = partial_diameter_exhaustive(&space, alpha).unwrap();
        let window = partial_diameter_1d(&pts, &w, alpha).unwrap();
        prop_assert!((exhaustive - window).abs() <= 1e-12, "{} vs {}", exhaustive, window);
    }

    #[test]
    fn observable_diameter_bound_below_partial_diameter(space in planar_space(9), kappa in 0.01f64..0.99) {
        let anchors: Vec<usize> = (0..space.len()).collect();
        let family = LipschitzFamily::distance_functions(&space, &anchors);
        let od = observable_diameter_lb(&space, kappa, &family).unwrap();
        let pd = partial_diameter(&space, 1.0 - kappa).unwrap().value;
        prop_assert!(od <= pd + 1e-12);
    }

    #[test]
    fn shrinking_the_domain_trades_distortion_for_mass(
        space in planar_space(7),
        seed in any::<u64>(),
    ) {
        let n = space.len();
        let targets: Vec<usize> = (0..n).map(|i| ((seed >> (3 * i)) as usize) % n).collect();
        let map = PointMap::new(targets, n).unwrap();
        let full: Vec<usize> = (0..n).collect();
        let part: Vec<usize> = (0..n).filter(|i| (seed >> (40 + i)) & 1 == 1).collect();
        let cert = |domain: Vec<usize>| EpsMmIsomCert { map: map.clone(), domain, epsilon: 0.0 };
        let big = verify_eps_mm_isom(&space, &space, &cert(full)).unwrap();
        let small = verify_eps_mm_isom(&space, &space, &cert(part)).unwrap();
        prop_assert!(small.distortion <= big.distortion);
        prop_assert!(small.mass_term >= big.mass_term - 1e-15);
        prop_assert_eq!(small.prokhorov_term, big.prokhorov_term);
        prop_assert_eq!(big.epsilon, big.mass_term.max(big.distortion).max(big.prokhorov_term));
        let identity = verify_eps_mm_isom(&space, &space, &EpsMmIsomCert::identity(n)).unwrap();
        prop_assert_eq!(identity.epsilon, 0.0);
    }

    #[test]
    fn pushforward_preserves_mass(space in planar_space(8), seed in any::<u64>(), m in 1usize..6) {
        let n = space.len();
        let targets: Vec<usize> = (0..n).map(|i| ((seed >> (4 * i)) as usize) % m).collect();
        let map = PointMap::new(targets, m).unwrap();
        let w = pushforward_weights(space.weights(), &map).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let line: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| i.abs_diff(j) as f64).collect()).collect();
        let image = pushforward(&space, &line, &map).unwrap();
        prop_assert_eq!(image.len(), w.iter().filter(|&&v| v > 0.0).count());
        prop_assert!((image.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_broken_triangles(a in 0.1f64..1.0, b in 0.1f64..1.0, excess in 0.01f64..1.0) {
        let c = a + b + excess;
        let dist = vec![vec![0.0, a, c], vec![a, 0.0, b], vec![c, b, 0.0]];
        prop_assert!(FiniteMmSpace::uniform(&dist).is_err());
        let fine = vec![vec![0.0, a, a + b], vec![a, 0.0, b], vec![a + b, b, 0.0]];
        prop_assert!(FiniteMmSpace::uniform(&fine).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reports_regenerate_bit_identically(seed in any::<u64>(), which in 0usize..4) {
        let (id, beta, dims) = [
            (ExperimentId::RadialLaw, 2.0, vec![2, 8]),
            (ExperimentId::NearRadiality, 1.0, vec![4, 16]),
            (ExperimentId::NonboxObstruction, 1.0, vec![4, 8]),
            (ExperimentId::Ergodicity, 4.0, vec![50, 100]),
        ][which].clone();
        let config = ExperimentConfig::new(id, beta, dims, 3000, seed);
        let first = experiments::run(&config).unwrap();
        let second = experiments::run(&config).unwrap();
        prop_assert_eq!(&first.table, &second.table);
        prop_assert_eq!(&first.verdicts, &second.verdicts);
        prop_assert_eq!(experiments::verdicts(&config, &first.table), first.verdicts);
    }
}
