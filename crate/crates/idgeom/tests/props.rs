//! Property tests for the metric axioms, estimator scale laws, lexical
//! metrics, perturbation guarantees, and entropy bounds.

use idgeom::analysis::{correlate, CorrMethod};
use idgeom::geom::{knn, mst_total_length, pairwise_distances};
use idgeom::perturb::{transform, HomoglyphMap, PerturbKind};
use idgeom::reprops::{prediction_entropy, Unembedding};
use idgeom::textstats::{compression_ratio, ttr_family, Document};
use idgeom::{PointCloud, RngSpec};
use ndarray::Array2;
use proptest::prelude::*;

fn small_cloud() -> impl Strategy<Value = PointCloud> {
    (2usize..24, 1usize..5).prop_flat_map(|(n, d)| {
        proptest::collection::vec(-50.0_f64..50.0, n * d).prop_map(move |vals| {
            PointCloud::new(Array2::from_shape_vec((n, d), vals).unwrap()).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn distances_form_a_metric(cloud in small_cloud()) {
        let dm = pairwise_distances(&cloud).unwrap();
        let n = cloud.n();
        for i in 0..n {
            prop_assert_eq!(dm.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(dm.get(i, j).to_bits(), dm.get(j, i).to_bits());
                prop_assert!(dm.get(i, j) >= 0.0);
            }
        }
        // Triangle inequality over all triples at floating tolerance.
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    prop_assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn scaling_covariance(cloud in small_cloud(), pow in -3i32..6) {
        // Powers of two scale distances and MST length exactly.
        let alpha = (2.0_f64).powi(pow);
        let scaled = cloud.scaled(alpha).unwrap();
        let dm = pairwise_distances(&cloud).unwrap();
        let dm_s = pairwise_distances(&scaled).unwrap();
        for i in 0..cloud.n() {
            for j in 0..cloud.n() {
                prop_assert_eq!((alpha * dm.get(i, j)).to_bits(), dm_s.get(i, j).to_bits());
            }
        }
        let l = mst_total_length(&cloud).unwrap();
        let ls = mst_total_length(&scaled).unwrap();
        prop_assert!((ls - alpha * l).abs() <= 1e-12 * (alpha * l).abs());
    }

    #[test]
    fn mst_permutation_invariant(cloud in small_cloud(), seed in 0u64..64) {
        let mut order: Vec<usize> = (0..cloud.n()).collect();
        let mut rng = RngSpec::new(seed).rng();
        use rand::Rng;
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| cloud.row(i).to_vec()).collect();
        let shuffled = PointCloud::from_rows(&rows).unwrap();
        let a = mst_total_length(&cloud).unwrap();
        let b = mst_total_length(&shuffled).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn knn_lists_sorted_and_sized(cloud in small_cloud(), k in 1usize..6) {
        prop_assume!(k < cloud.n());
        let result = knn(&cloud, k).unwrap();
        for ns in &result.neighbors {
            prop_assert_eq!(ns.len(), k);
            for w in ns.windows(2) {
                prop_assert!(w[0].dist < w[1].dist
                    || (w[0].dist == w[1].dist && w[0].index < w[1].index));
            }
        }
    }

    #[test]
    fn knn_multiset_survives_permutation(cloud in small_cloud()) {
        prop_assume!(cloud.n() > 2);
        let k = 2;
        let collect_sorted = |c: &PointCloud| {
            let mut all: Vec<u64> = knn(c, k)
                .unwrap()
                .neighbors
                .iter()
                .flat_map(|ns| ns.iter().map(|n| n.dist.to_bits()))
                .collect();
            all.sort_unstable();
            all
        };
        let rows: Vec<Vec<f64>> = (0..cloud.n()).rev().map(|i| cloud.row(i).to_vec()).collect();
        let reversed = PointCloud::from_rows(&rows).unwrap();
        prop_assert_eq!(collect_sorted(&cloud), collect_sorted(&reversed));
    }

    #[test]
    fn compression_ratio_positive(payload in proptest::collection::vec(any::<u8>(), 1..512)) {
        let cr = compression_ratio(&payload).unwrap();
        prop_assert!(cr > 0.0);
    }

    #[test]
    fn compression_ratio_bounded_past_container_overhead(
        payload in proptest::collection::vec(any::<u8>(), 256..4096)
    ) {
        // The ~20-byte gzip container dominates tiny payloads; above a few
        // hundred bytes even incompressible input stays within 1.2x.
        let cr = compression_ratio(&payload).unwrap();
        prop_assert!(cr <= 1.2, "cr = {cr} on {} bytes", payload.len());
    }

    #[test]
    fn ttr_invariant_under_lemma_bijection(ids in proptest::collection::vec(0usize..8, 1..40),
                                           window in 1usize..10) {
        let names = ["ant", "bee", "cat", "dog", "elk", "fox", "gnu", "hen"];
        let renames = ["r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7"];
        let mut doc_a = Document::new("a", "");
        doc_a.lemmas = Some(ids.iter().map(|&i| names[i].to_string()).collect());
        let mut doc_b = Document::new("b", "");
        doc_b.lemmas = Some(ids.iter().map(|&i| renames[i].to_string()).collect());
        let ta = ttr_family(&doc_a, window).unwrap();
        let tb = ttr_family(&doc_b, window).unwrap();
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn entropy_within_bounds(vals in proptest::collection::vec(-30.0_f64..30.0, 6..60),
                             h in proptest::collection::vec(-5.0_f64..5.0, 3)) {
        let v = vals.len() / 3;
        let matrix = Array2::from_shape_vec((v, 3), vals[..v * 3].to_vec()).unwrap();
        let un = Unembedding::new(matrix, None).unwrap();
        let e = prediction_entropy(&h, &un).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!(e <= (v as f64).ln() + 1e-12, "H = {e}, ln V = {}", (v as f64).ln());
    }

    #[test]
    fn perturb_type1_full_replacement(words in proptest::collection::vec("[a-z]{1,8}", 1..8),
                                      seed in 0u64..32) {
        let text = words.join(" ");
        let map = HomoglyphMap::default_table();
        let out = transform(&text, PerturbKind::Type1, 1.0, RngSpec::new(seed), Some(&map)).unwrap();
        for (orig, got) in text.chars().zip(out.chars()) {
            match map.get(orig) {
                Some(to) => prop_assert_eq!(got, to),
                None => prop_assert_eq!(got, orig),
            }
        }
    }

    #[test]
    fn perturb_word_classes_preserved(words in proptest::collection::vec("[a-z]{1,8}", 2..12),
                                      seed in 0u64..32,
                                      kind in prop_oneof![Just(PerturbKind::Type2), Just(PerturbKind::Type3)]) {
        let text = words.join(" ");
        let map = HomoglyphMap::default_table();
        let out = transform(&text, kind, 0.5, RngSpec::new(seed), Some(&map)).unwrap();
        let out_words: Vec<&str> = out.split(' ').collect();
        prop_assert_eq!(out_words.len(), words.len());
        for i in 0..words.len() {
            for j in 0..words.len() {
                if words[i] == words[j] {
                    prop_assert_eq!(out_words[i], out_words[j],
                        "equal inputs {} diverged", &words[i]);
                }
            }
        }
    }

    #[test]
    fn perturb_type3_preserves_length_and_multisets(words in proptest::collection::vec("[a-z]{1,10}", 1..10),
                                                    seed in 0u64..32) {
        let text = words.join(" ");
        let out = transform(&text, PerturbKind::Type3, 0.0, RngSpec::new(seed), None).unwrap();
        prop_assert_eq!(out.chars().count(), text.chars().count());
        let out_words: Vec<&str> = out.split(' ').collect();
        for (w, o) in words.iter().zip(&out_words) {
            let mut a: Vec<char> = w.chars().collect();
            let mut b: Vec<char> = o.chars().collect();
            if !a.is_empty() {
                prop_assert_eq!(a[0], b[0]);
                prop_assert_eq!(a[a.len() - 1], b[b.len() - 1]);
            }
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn pearson_affine_invariance(pairs in proptest::collection::vec((-10.0_f64..10.0, -10.0_f64..10.0), 4..40),
                                 a in 0.1_f64..5.0, b in -5.0_f64..5.0) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mapped: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        if let (Ok(r1), Ok(r2)) = (
            correlate(&xs, &ys, CorrMethod::Pearson),
            correlate(&mapped, &ys, CorrMethod::Pearson),
        ) {
            prop_assert!((r1 - r2).abs() < 1e-9);
            // Symmetry.
            let r3 = correlate(&ys, &xs, CorrMethod::Pearson).unwrap();
            prop_assert!((r1 - r3).abs() < 1e-12);
        }
    }

    #[test]
    fn spearman_monotone_invariance(pairs in proptest::collection::vec((-10.0_f64..10.0, -10.0_f64..10.0), 4..40)) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mapped: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        if let (Ok(r1), Ok(r2)) = (
            correlate(&xs, &ys, CorrMethod::Spearman),
            correlate(&mapped, &ys, CorrMethod::Spearman),
        ) {
            prop_assert!((r1 - r2).abs() < 1e-9);
        }
    }
}

#[test]
fn twonn_bit_exact_under_power_of_two_scaling() {
    use idgeom::estimators::{twonn_estimate, PlausibilityWindow, TwoNnConfig};
    use idgeom::synth::{sample_manifold, ManifoldKind, ManifoldSpec};
    let cloud = sample_manifold(&ManifoldSpec {
        kind: ManifoldKind::Cube,
        d: 2,
        ambient: 6,
        n: 300,
        noise: 0.0,
        rng: RngSpec::new(3),
    })
    .unwrap();
    let cfg = TwoNnConfig {
        discard_fraction: 0.1,
        window: PlausibilityWindow::unbounded(),
    };
    let base = twonn_estimate(&cloud, &cfg).unwrap();
    for alpha in [0.5, 2.0, 8.0] {
        let scaled = twonn_estimate(&cloud.scaled(alpha).unwrap(), &cfg).unwrap();
        assert_eq!(base.value.to_bits(), scaled.value.to_bits());
    }
}
