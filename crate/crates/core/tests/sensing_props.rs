mod common;

use std::f64::consts::PI;

use ndarray::Array2;
use proptest::prelude::*;
use snfcs::sampling::random_uniform;
use snfcs::sensing::{build_matrix, coherence, column_pair_corr, welch_bound};
use snfcs::specfun::{wigner_big_d, WignerOrder};
use snfcs::{mode_count, mode_table, Mode, ModeKind, SamplingSet};

const KINDS: [ModeKind; 3] = [ModeKind::WignerGeneral, ModeKind::SphericalHarmonics, ModeKind::SnfMuPm1];

#[test]
fn counts_match_enumeration() {
    for n in 1..=10u32 {
        let sq: usize = (1..=n as usize).map(|k| (2 * k + 1) * (2 * k + 1)).sum();
        assert_eq!(mode_count(ModeKind::WignerGeneral, n).unwrap(), sq);
        assert_eq!(mode_count(ModeKind::SnfMuPm1, n).unwrap(), 2 * (n * (n + 2)) as usize);
    }
    for n in 1..=16u32 {
        let lin: usize = (1..=n as usize).map(|k| 2 * k + 1).sum();
        assert_eq!(mode_count(ModeKind::SphericalHarmonics, n).unwrap(), lin);
    }
}

#[test]
fn tables_round_trip() {
    for kind in KINDS {
        for n in 1..=10 {
            let t = mode_table(kind, n).unwrap();
            assert_eq!(t.len(), mode_count(kind, n).unwrap());
            for q in 0..t.len() {
                assert_eq!(t.index_of(t.get(q).unwrap()), Some(q));
            }
        }
    }
}

#[test]
fn probe_entries_are_sums_and_differences() {
    let s = random_uniform::<f64>(5, 21).unwrap();
    let a = build_matrix(ModeKind::SnfMuPm1, 2, &s).unwrap();
    assert_eq!((a.rows(), a.cols()), (5, 16));
    let table = mode_table(ModeKind::SnfMuPm1, 2).unwrap();
    for (q, mode) in table.modes().iter().enumerate() {
        let Mode::Probe { block, n, m } = *mode else { panic!("{mode:?}") };
        for i in 0..5 {
            let (t, p, c) = s.sample(i);
            let plus = wigner_big_d(WignerOrder::new(n, 1, m).unwrap(), t, p, c);
            let minus = wigner_big_d(WignerOrder::new(n, -1, m).unwrap(), t, p, c);
            let want = if block == 1 { plus + minus } else { plus - minus };
            assert!((a.data()[[i, q]] - want).norm() < 1e-14);
        }
    }
}

#[test]
fn harmonic_matrix_is_scaled_wigner_subset() {
    let s = random_uniform::<f64>(30, 2).unwrap();
    let sh = build_matrix(ModeKind::SphericalHarmonics, 5, &s).unwrap();
    let wg = build_matrix(ModeKind::WignerGeneral, 5, &s).unwrap();
    let wt = mode_table(ModeKind::WignerGeneral, 5).unwrap();
    let st = mode_table(ModeKind::SphericalHarmonics, 5).unwrap();
    for (q, mode) in st.modes().iter().enumerate() {
        let Mode::Harmonic { n, m } = *mode else { panic!() };
        let qw = wt.index_of(Mode::Wigner { n, m, mu: 0 }).unwrap();
        let f = if m % 2 == 0 { 1.0 } else { -1.0 } * (4.0 * PI / (2 * n + 1) as f64).sqrt();
        for i in 0..30 {
            assert!((wg.data()[[i, qw]] - sh.data()[[i, q]] * f).norm() < 1e-12);
        }
    }
}

#[test]
fn coherence_matches_brute_force() {
    let mut r = common::rng(5);
    for trial in 0..20 {
        let (k, l) = (3 + trial % 5, 4 + trial % 7);
        let a = Array2::from_shape_fn((k, l), |_| common::gaussian_complex(&mut r));
        let rep = coherence(a.view()).unwrap();
        assert!((rep.mu - common::brute_coherence(&a)).abs() < 1e-13);
        let (q, rr) = rep.argmax_pair;
        assert!(rr < q);
        assert!((column_pair_corr(a.view(), q, rr).unwrap().norm() - rep.mu).abs() < 1e-13);
    }
    for kind in [ModeKind::SphericalHarmonics, ModeKind::SnfMuPm1] {
        let s = random_uniform::<f64>(14, 8).unwrap();
        let a = build_matrix(kind, 3, &s).unwrap();
        assert!((a.coherence().unwrap().mu - common::brute_coherence(a.data())).abs() < 1e-13);
    }
}

#[test]
fn pair_correlation_against_dot_products() {
    let mut r = common::rng(9);
    let a = Array2::from_shape_fn((3, 5), |_| common::gaussian_complex(&mut r));
    for q in 1..5 {
        for rr in 0..q {
            let (x, y) = (a.column(q).to_vec(), a.column(rr).to_vec());
            let dot: common::C = x.iter().zip(&y).map(|(u, v)| u * v.conj()).sum();
            let want = dot / (common::norm2(&x) * common::norm2(&y));
            assert!((column_pair_corr(a.view(), q, rr).unwrap() - want).norm() < 1e-14);
        }
    }
}

#[test]
fn welch_values() {
    assert!((welch_bound::<f64>(97, 99).unwrap() - 0.014505).abs() < 1e-6);
    assert_eq!(welch_bound::<f64>(99, 99).unwrap(), 0.0);
    assert_eq!(welch_bound::<f64>(1, 40).unwrap(), 1.0);
    assert!(welch_bound::<f64>(3, 1).is_err());
}

fn sample_set() -> impl Strategy<Value = SamplingSet> {
    (1usize..40, any::<u64>()).prop_map(|(k, seed)| random_uniform::<f64>(k, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coherence_is_bounded(s in sample_set(), kind_ix in 0usize..3, n in 1u32..4) {
        let a = build_matrix(KINDS[kind_ix], n, &s).unwrap();
        let rep = a.coherence().unwrap();
        let l = a.cols();
        prop_assert!(rep.mu <= 1.0 + 1e-12);
        if s.len() < l {
            prop_assert!(rep.mu >= welch_bound::<f64>(s.len(), l).unwrap() - 1e-12);
        }
        prop_assert_eq!(rep.pair_count, l * (l - 1) / 2);
    }

    #[test]
    fn column_scaling_leaves_coherence(s in sample_set(), col in 0usize..15) {
        let a = build_matrix(ModeKind::SphericalHarmonics, 3, &s).unwrap();
        let mut b = a.data().clone();
        b.column_mut(col).mapv_inplace(|z| z * 7.3);
        let (ra, rb) = (a.coherence().unwrap(), coherence(b.view()).unwrap());
        prop_assert!((ra.mu - rb.mu).abs() < 1e-12);
    }
}
