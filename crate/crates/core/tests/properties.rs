use loewy::oracle::{duality_report, radical_filtration, socle_filtration};
use loewy::profiles::{default_window, df_and_norm, fit_series, length_slope, swap_convention};
use loewy::ratpoly::interpolate;
use loewy::rees::TruncationTable;
use loewy::sections::weak_compositions;
use loewy::{int, FamilySpec, OperatorSet, Polynomial, RatDfReport, Rational};
use num_integer::binomial;
use proptest::prelude::*;

fn report(spec: &FamilySpec) -> RatDfReport {
    let profile = spec.profile().unwrap();
    let window = default_window(spec.dimension());
    let fit = fit_series(&profile, window.clone()).unwrap();
    df_and_norm(&fit, length_slope(&profile, window).unwrap()).unwrap()
}

fn ample_spec() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (1u32..=6, 1u32..=4).prop_map(|(d, b)| FamilySpec::del_pezzo8(b + d, b)),
        (2u32..=5, 1u32..=3, 1u32..=4).prop_map(|(n, b, d)| FamilySpec::blowup(n, n * b + d, b)),
        (1u32..=4, 1u32..=4, 1u32..=4).prop_map(|(n, a, b)| FamilySpec::hirzebruch(n, a, b)),
        (1u32..=3, 1u32..=3, 1u32..=3).prop_map(|(n, a, b)| FamilySpec::p1_rank3(n, a, b)),
        (1u32..=2, 1u32..=2, 1u32..=2, 1u32..=2, 1u32..=2)
            .prop_map(|(r, s, n, a, b)| FamilySpec::proj_bundle(r, s, n, a, b)),
    ]
}

/// Strictly upper-triangular operators after a permutation of coordinates.
fn nilpotent_set() -> impl Strategy<Value = OperatorSet<Rational>> {
    (1usize..=8, 1usize..=3)
        .prop_flat_map(|(dim, count)| {
            let entries =
                proptest::collection::vec(proptest::collection::vec(-2i64..=2, dim * dim), count);
            (
                Just(dim),
                entries,
                Just((0..dim).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(dim, entries, perm)| {
            let matrices: Vec<Vec<Vec<Rational>>> = entries
                .iter()
                .map(|flat| {
                    let mut m = vec![vec![int(0); dim]; dim];
                    for r in 0..dim {
                        for c in r + 1..dim {
                            m[perm[r]][perm[c]] = int(flat[r * dim + c]);
                        }
                    }
                    m
                })
                .collect();
            OperatorSet::from_dense(&matrices)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hirzebruch_one_is_del_pezzo(a in 1u32..=6, b in 1u32..=6, k in 1u64..=8) {
        let hirz = FamilySpec::hirzebruch(1, a, b);
        let dp = FamilySpec::del_pezzo8(a + b, b);
        prop_assert_eq!(hirz.layers(k), dp.layers(k));
    }

    #[test]
    fn general_bundle_specializes(n in 1u32..=4, a in 1u32..=4, b in 1u32..=4, k in 1u64..=6) {
        prop_assert_eq!(FamilySpec::proj_bundle(2, 1, n, a, b).layers(k), FamilySpec::p1_rank3(n, a, b).layers(k));
        prop_assert_eq!(FamilySpec::proj_bundle(1, 2, 1, 1, 1).layers(k), FamilySpec::over_p2().layers(k));
    }

    #[test]
    fn layers_sum_to_hilbert(spec in ample_spec(), k in 1u64..=8) {
        let total: u128 = spec.layers(k).iter().sum();
        prop_assert_eq!(total, spec.hilbert(k));
        if let Some(closed) = spec.hilbert_closed_form(k) {
            prop_assert_eq!(closed, int(total as i64));
        }
    }

    #[test]
    fn weak_composition_count(m in 0u32..=7, r in 1usize..=4) {
        let all = weak_compositions(m, r);
        prop_assert_eq!(all.len() as u64, binomial((m as u64) + r as u64 - 1, r as u64 - 1));
        prop_assert!(all.iter().all(|c| c.len() == r && c.iter().sum::<u32>() == m));
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn ample_signs(spec in ample_spec()) {
        let r = report(&spec);
        prop_assert!(r.df_num < int(0), "{} df_num {}", spec, r.df_num);
        prop_assert!(r.norm > int(0), "{} norm {}", spec, r.norm);
    }

    #[test]
    fn swap_preserves_and_inverts(spec in ample_spec(), extra in 0u64..=2) {
        let profile = spec.profile().unwrap();
        let window = default_window(spec.dimension());
        let c = spec.loewy_length_slope() + extra;
        let once = swap_convention(&profile, c, window.clone()).unwrap();
        let twice = swap_convention(&once, c, window.clone()).unwrap();
        for k in window.clone() {
            prop_assert_eq!(twice.layers(k), profile.layers(k));
            prop_assert_eq!(twice.orientation(), profile.orientation());
        }
        let fit = fit_series::<Rational>(&once, window.clone()).unwrap();
        let swapped = df_and_norm(&fit, length_slope(&once, window).unwrap()).unwrap();
        let original = report(&spec);
        prop_assert_eq!(swapped.df, original.df);
        prop_assert_eq!(swapped.norm, original.norm);
    }

    #[test]
    fn random_duality(ops in nilpotent_set()) {
        let radical = radical_filtration(&ops).unwrap();
        let socle = socle_filtration(&ops).unwrap();
        prop_assert_eq!(radical.layers().iter().sum::<usize>(), ops.dimension());
        prop_assert_eq!(radical.length(), socle.length());
        prop_assert!(duality_report(&ops).unwrap().holds());
    }

    #[test]
    fn interpolation_reproduces(coeffs in proptest::collection::vec(-20i64..=20, 1..=6), extra in 0usize..=3, start in -5i64..=5) {
        let poly = Polynomial::from_coeffs(coeffs.iter().map(|&c| int(c)).collect());
        let bound = coeffs.len() - 1;
        let samples: Vec<(i64, Rational)> =
            (start..start + (bound + 1 + extra) as i64).map(|k| (k, poly.evaluate_int(k))).collect();
        prop_assert_eq!(interpolate(&samples, bound).unwrap(), poly);
    }

    #[test]
    fn truncation_is_a_filtration(
        spec in prop_oneof![
            (1u32..=4, 1u32..=3).prop_map(|(d, b)| FamilySpec::del_pezzo8(b + d, b)),
            (1u32..=3, 1u32..=2, 1u32..=2).prop_map(|(n, a, b)| FamilySpec::hirzebruch(n, a, b)),
            Just(FamilySpec::blowup(2, 3, 1)),
        ],
        r in 1u64..=3,
        k in 1u64..=4,
    ) {
        let low = TruncationTable::new(&spec, r, 200_000).unwrap().dims(k).unwrap();
        let high = TruncationTable::new(&spec, r + 1, 200_000).unwrap().dims(k).unwrap();
        prop_assert_eq!(low[0], spec.hilbert(k));
        prop_assert!(low.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(low.iter().zip(&high).all(|(l, h)| l <= h));
        let loewy = spec.layers(k);
        let cumulative: Vec<u128> = (0..loewy.len()).map(|i| loewy[i..].iter().sum()).collect();
        prop_assert!(high.iter().zip(&cumulative).all(|(t, l)| t <= l));
        if k <= r {
            prop_assert_eq!(&low[..cumulative.len().min(low.len())], &cumulative[..cumulative.len().min(low.len())]);
        }
    }
}
