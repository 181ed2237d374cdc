use std::sync::Arc;

use proptest::prelude::*;

use parabolic_escape::escape::{escape_markov, EscapeOptions};
use parabolic_escape::induced::InducedOpenSystem;
use parabolic_escape::map::{MapSpec, ParabolicMap};
use parabolic_escape::montecarlo::survival_curve;
use parabolic_escape::spectral::leading_eigen;
use parabolic_escape::transfer::pwl_exact;

fn family(i: usize, s: f64) -> ParabolicMap {
    match i {
        0 => MapSpec::pomeau_manneville(s),
        1 => MapSpec::lsv(s),
        2 => MapSpec::farey(),
        _ => MapSpec::pwl_zipf(s),
    }
    .build()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn preimages_decrease_and_match_return_times(i in 0usize..4, s in 0.3f64..2.5, n in 1usize..40) {
        let map = family(i, s);
        let hi = map.preimage(n).unwrap();
        let lo = map.preimage(n + 1).unwrap();
        prop_assert!(0.0 < lo && lo < hi);
        let mid = 0.5 * (lo + hi);
        prop_assert_eq!(map.return_time(mid).unwrap(), n + 1);
        // return time n + 1 on (a_{n+1}, a_n], right end included
        prop_assert_eq!(map.return_time(hi).unwrap(), n + 1);
    }

    #[test]
    fn mass_weighted_rate_is_below_cylinder_rate(i in 0usize..4, s in 0.3f64..2.0, n in 2usize..12) {
        let map = family(i, s);
        let opts = EscapeOptions { grid: 256, ..EscapeOptions::default() };
        let r = escape_markov(&map, n, &opts).unwrap();
        let (g_rho, sum_k) = (r.gamma_rho.unwrap(), r.sum_k_rho.unwrap());
        prop_assert!(sum_k >= 1.0);
        prop_assert!(r.gamma_mu <= g_rho * (1.0 + 1e-12));
        prop_assert!(r.gamma_mu > 0.0);
    }

    #[test]
    fn survivors_never_increase(i in 0usize..4, n in 2usize..8, seed in any::<u64>()) {
        let map = family(i, 0.7);
        let edge = map.preimage(n).unwrap();
        let c = survival_curve(&map, edge, 20, 5_000, seed).unwrap();
        prop_assert!(c.survivors.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(c.survivors[0] <= c.samples);
    }

    #[test]
    fn explicit_weights_give_kept_mass(raw in prop::collection::vec(0.05f64..1.0, 6..16), frac in 0.2f64..0.8) {
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let n = ((p.len() as f64 * frac) as usize).max(2);
        let map = Arc::new(MapSpec::pwl_explicit(1.0, p.clone()).build().unwrap());
        let sys = InducedOpenSystem::build(map, n).unwrap();
        let a = pwl_exact(&sys).unwrap();
        let t = leading_eigen(&a, 1e-14, 100_000).unwrap();
        let kept: f64 = p[..n].iter().sum();
        prop_assert!((t.lambda - kept).abs() < 1e-12, "{} vs {}", t.lambda, kept);
    }
}
