//! Property tests over randomly generated inputs.

use da2_core::dataset::{parse_dataset, to_dense_csv, to_sparse_text};
use da2_core::kernel::rbf_kernel;
use da2_core::ndarray::Array2;
use da2_core::splitting::split_balls;
use da2_core::{Dataset, Format, SplitConfig};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..8, 1usize..5).prop_flat_map(|(n, dim)| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3], n * dim),
            prop::collection::vec(0usize..3, n),
        )
            .prop_map(move |(vals, labels)| {
                let x = Array2::from_shape_vec((n, dim), vals).unwrap();
                Dataset::with_classes(x, labels, 3, "p").unwrap()
            })
    })
}

fn same_points(a: &Dataset, b: &Dataset) {
    assert_eq!(a.features(), b.features());
    for i in 0..a.n() {
        assert_eq!(
            a.label_values()[a.labels()[i]],
            b.label_values()[b.labels()[i]]
        );
    }
}

proptest! {
    #[test]
    fn dense_csv_round_trip(d in dataset()) {
        let back = parse_dataset(&to_dense_csv(&d), Format::DenseCsv, "p").unwrap();
        same_points(&d, &back);
        prop_assert_eq!(to_dense_csv(&back), to_dense_csv(&d));
    }

    #[test]
    fn sparse_round_trip(d in dataset()) {
        let back = parse_dataset(&to_sparse_text(&d), Format::SparseText, "p").unwrap();
        same_points(&d, &back);
        prop_assert_eq!(to_sparse_text(&back), to_sparse_text(&d));
    }

    #[test]
    fn deflation_keeps_symmetry_and_shrinks_diagonal(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..10),
        order in prop::collection::vec(any::<prop::sample::Index>(), 1..6),
        u in 0.0f64..1.0,
    ) {
        let n = pts.len();
        let x = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        let mut k = rbf_kernel(&Dataset::new(x, vec![0; n], "p").unwrap(), 1.8).unwrap();
        for idx in order {
            let i = idx.index(n);
            if k.is_deflated(i) {
                continue;
            }
            let before: Vec<f64> = (0..n).map(|j| k.entries()[[j, j]]).collect();
            k.deflate(i, u).unwrap();
            let e = k.entries();
            for a in 0..n {
                prop_assert!(e[[a, a]] <= before[a] + 1e-15);
                prop_assert!(e[[a, a]] >= 0.0);
                for b in 0..n {
                    prop_assert!((e[[a, b]] - e[[b, a]]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn split_covers_every_point_once(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..25),
        k in 2usize..4,
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let x = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        let p = split_balls(x.view(), &SplitConfig::new(k, seed)).unwrap();
        prop_assert_eq!(p.balls.len(), k);
        let mut seen: Vec<usize> = p.balls.iter().flat_map(|b| b.members.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let total: f64 = p.balls.iter().map(|b| b.density).sum();
        prop_assert!((total - p.objective).abs() <= 1e-9 * total.max(1.0));
        for b in &p.balls {
            prop_assert!(!b.members.is_empty());
            for &i in &b.members {
                let d = ((x[[i, 0]] - b.center[0]).powi(2) + (x[[i, 1]] - b.center[1]).powi(2)).sqrt();
                prop_assert!(d <= b.radius * (1.0 + 1e-9) + 1e-9);
            }
        }
    }
}
