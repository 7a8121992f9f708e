mod common;

use ghvfdt::harness::dataset::Dataset;
use ghvfdt::harness::{build_stream, StreamSpec};
use ghvfdt::metrics::Confusion;
use ghvfdt::significance::tukey_hsd;
use ghvfdt::split::{best_two_features, hellinger_counts, hellinger_gaussian, hellinger_normal};
use ghvfdt::tree::LeafStats;
use ghvfdt::{ClassHistogram, ClassLabel, Criterion, GaussianStat};
use proptest::prelude::*;

use common::{brute_hellinger, quadrature_gaussian_hellinger};

fn stat_of(xs: &[f64]) -> GaussianStat {
    let mut s = GaussianStat::new();
    for &x in xs {
        s.update(x).unwrap();
    }
    s
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn counts_pair() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (2usize..16)
        .prop_flat_map(|bins| {
            (
                prop::collection::vec(0u64..500, bins),
                prop::collection::vec(0u64..500, bins),
            )
        })
        .prop_filter("both classes present", |(p, n)| {
            p.iter().sum::<u64>() > 0 && n.iter().sum::<u64>() > 0
        })
}

proptest! {
    #[test]
    fn welford_permutation_invariant(xs in prop::collection::vec(-1e3f64..1e3, 2..200), seed in any::<u64>()) {
        let mut shuffled = xs.clone();
        // deterministic permutation: rotate then reverse
        let k = (seed as usize) % xs.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let (a, b) = (stat_of(&xs), stat_of(&shuffled));
        prop_assert_eq!(a.count(), b.count());
        prop_assert!(close(a.mean(), b.mean(), 1e-12));
        prop_assert!(close(a.variance(), b.variance(), 1e-9));
    }

    #[test]
    fn welford_merge_matches_sequential(xs in prop::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
        let cut = cut % xs.len();
        let merged = stat_of(&xs[..cut]).merge(&stat_of(&xs[cut..]));
        let whole = stat_of(&xs);
        prop_assert_eq!(merged.count(), whole.count());
        prop_assert!(close(merged.mean(), whole.mean(), 1e-12));
        prop_assert!(close(merged.variance(), whole.variance(), 1e-9));
    }

    #[test]
    fn histogram_conserves_mass(xs in prop::collection::vec((-2.0f64..3.0, any::<bool>()), 0..300), bins in 2usize..20) {
        let mut h = ClassHistogram::equal_width(0.0, 1.0, bins).unwrap();
        for &(x, positive) in &xs {
            h.update(x, if positive { ClassLabel::Positive } else { ClassLabel::Negative }).unwrap();
        }
        let pos = xs.iter().filter(|(_, p)| *p).count() as u64;
        prop_assert_eq!(h.total(ClassLabel::Positive), pos);
        prop_assert_eq!(h.total(ClassLabel::Negative), xs.len() as u64 - pos);
    }

    #[test]
    fn binned_matches_brute_force((pos, neg) in counts_pair()) {
        let h = hellinger_counts(&pos, &neg).unwrap();
        prop_assert!((h - brute_hellinger(&pos, &neg)).abs() <= 1e-12);
        prop_assert!((0.0..=std::f64::consts::SQRT_2).contains(&h));
    }

    #[test]
    fn binned_skew_invariant((pos, neg) in counts_pair(), k in 1u64..100_000) {
        let scaled: Vec<u64> = neg.iter().map(|c| c * k).collect();
        prop_assert_eq!(hellinger_counts(&pos, &neg).unwrap().to_bits(), hellinger_counts(&pos, &scaled).unwrap().to_bits());
    }

    #[test]
    fn gaussian_symmetric_and_affine_invariant(
        m1 in -10.0f64..10.0, m2 in -10.0f64..10.0,
        s1 in 0.1f64..10.0, s2 in 0.1f64..10.0,
        a in 0.1f64..10.0, b in -5.0f64..5.0,
    ) {
        let h = hellinger_normal(m1, s1, m2, s2);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - hellinger_normal(m2, s2, m1, s1)).abs() <= 1e-15);
        let t = hellinger_normal(a * m1 + b, a * s1, a * m2 + b, a * s2);
        prop_assert!((h - t).abs() <= 1e-9);
    }

    #[test]
    fn gaussian_matches_quadrature(m1 in -10.0f64..10.0, m2 in -10.0f64..10.0, s1 in 0.1f64..10.0, s2 in 0.1f64..10.0) {
        let h = hellinger_normal(m1, s1, m2, s2);
        prop_assert!((h - quadrature_gaussian_hellinger(m1, s1, m2, s2)).abs() <= 1e-6);
    }

    #[test]
    fn gmean_identity_and_scale_invariance(tp in 0u64..1000, fp in 0u64..1000, tn in 0u64..1000, fn_ in 0u64..1000, k in 1u64..1000) {
        let m = Confusion::new(tp, fp, tn, fn_).metrics();
        if tp + fn_ > 0 && tn + fp > 0 {
            prop_assert!((m.gmean * m.gmean - m.recall * (1.0 - m.fpr)).abs() <= 1e-12);
        }
        let s = Confusion::new(tp * k, fp * k, tn * k, fn_ * k).metrics();
        prop_assert!((m.gmean - s.gmean).abs() <= 1e-12);
        for v in [m.recall, m.fpr, m.gmean, m.fscore, m.precision] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tukey_monotone_in_alpha(groups in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3..8), 3..5), shift in 0.0f64..5.0) {
        let named: Vec<(String, Vec<f64>)> = groups.iter().enumerate()
            .map(|(i, g)| (format!("g{i}"), g.iter().map(|x| x + shift * i as f64).collect()))
            .collect();
        let refs: Vec<(&str, &[f64])> = named.iter().map(|(n, g)| (n.as_str(), g.as_slice())).collect();
        if let (Ok(strict), Ok(loose)) = (tukey_hsd(&refs, 0.01), tukey_hsd(&refs, 0.05)) {
            prop_assert!((0.0..=1.0).contains(&strict.p_value));
            prop_assert!(strict.f_statistic >= 0.0);
            for (s, l) in strict.pairwise.iter().zip(&loose.pairwise) {
                prop_assert!(!s.significant || l.significant);
            }
            prop_assert_eq!(strict.pairwise.len(), named.len() * (named.len() - 1) / 2);
        }
    }

    #[test]
    fn skew_keeps_feature_choice(
        (pos_a, neg_a) in counts_pair(),
        (pos_b, neg_b) in counts_pair(),
        k in prop::sample::select(vec![2u64, 10, 100, 10_000]),
    ) {
        let bins = pos_a.len().min(pos_b.len());
        let (pos_a, neg_a, pos_b, neg_b) = (&pos_a[..bins], &neg_a[..bins], &pos_b[..bins], &neg_b[..bins]);
        prop_assume!(pos_a.iter().sum::<u64>() > 0 && neg_a.iter().sum::<u64>() > 0);
        prop_assume!(pos_b.iter().sum::<u64>() > 0 && neg_b.iter().sum::<u64>() > 0);
        let leaf = |scale: u64| {
            let edges: Vec<f64> = (0..=bins).map(|i| i as f64).collect();
            let hs = vec![
                ClassHistogram::from_counts(edges.clone(), pos_a.to_vec(), neg_a.iter().map(|c| c * scale).collect()).unwrap(),
                ClassHistogram::from_counts(edges, pos_b.to_vec(), neg_b.iter().map(|c| c * scale).collect()).unwrap(),
            ];
            let p = pos_a.iter().sum::<u64>();
            let n = neg_a.iter().sum::<u64>() * scale;
            LeafStats::from_parts(vec![[GaussianStat::new(); 2]; 2], Some(hs), [n, p])
        };
        let base = best_two_features(&leaf(1), Criterion::HellingerBinned).unwrap().unwrap();
        let skewed = best_two_features(&leaf(k), Criterion::HellingerBinned).unwrap().unwrap();
        prop_assert_eq!(base.best.feature_index, skewed.best.feature_index);
        prop_assert_eq!(base.best.score.to_bits(), skewed.best.score.to_bits());
        prop_assert_eq!(base.best.threshold.to_bits(), skewed.best.threshold.to_bits());
    }

    #[test]
    fn streams_conserve_and_stay_disjoint(seed in any::<u64>(), ratio in 1u64..20, frac in 0.0f64..=1.0) {
        let n = 400;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels: Vec<ClassLabel> = (0..n).map(|i| if i % 5 == 0 { ClassLabel::Positive } else { ClassLabel::Negative }).collect();
        let ds = Dataset::new("ids", vec!["id".into()], rows, labels).unwrap();
        let spec = StreamSpec { pretrain_pos: 10, pretrain_neg: 30, ..StreamSpec::new(ratio, frac, seed) };
        let s = build_stream(&ds, &spec).unwrap();
        prop_assert_eq!(s.eval_negatives(), s.eval_positives() * ratio as usize);
        let mut ids: Vec<u64> = s.pretrain.iter().chain(&s.eval).map(|r| r.features[0] as u64).collect();
        let total = ids.len();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), total);
        // truths do not depend on the labeling fraction
        let full = build_stream(&ds, &StreamSpec { labeling_fraction: 1.0, ..spec }).unwrap();
        let truths = |st: &ghvfdt::harness::Stream| st.eval.iter().map(|r| r.truth).collect::<Vec<_>>();
        prop_assert_eq!(truths(&s), truths(&full));
    }
}

#[test]
fn gaussian_needs_two_per_class() {
    let one = stat_of(&[1.0]);
    let two = stat_of(&[1.0, 2.0]);
    assert!(hellinger_gaussian(&one, &two).is_err());
    assert!(hellinger_gaussian(&two, &two).is_ok());
}
