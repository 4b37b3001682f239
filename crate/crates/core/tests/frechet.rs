use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use treespace::frechet::{
    frechet_mean, frechet_mean_traced, frechet_objective, pearson, permutation_test, variance, MeanConfig,
    StatisticKind,
};
use treespace::rng::{seeded, substream};
use treespace::synthetic::random_tree;
use treespace::{geodesic_distance, geodesic_point, parse_tree, AttributedTree, EdgeAttribute, LeafSet, Split};

fn spider_tree(leg: Option<(&str, f64)>) -> AttributedTree {
    let inner = leg.map_or(String::new(), |(split, len)| {
        let names: Vec<String> = split.chars().map(|c| format!("\"{c}\"")).collect();
        format!(r#", {{"split": [{}], "attr": [{len}]}}"#, names.join(","))
    });
    parse_tree(&format!(
        r#"{{"leaves": ["a","b","c"], "edges": [
            {{"split": ["a"], "attr": [1.0]}}, {{"split": ["b"], "attr": [1.0]}},
            {{"split": ["c"], "attr": [1.0]}}{inner}]}}"#
    ))
    .unwrap()
}

#[test]
fn three_orthant_configuration_has_a_sticky_mean() {
    let legs = ["ab", "ac", "bc"];
    let sample: Vec<AttributedTree> = legs.iter().map(|l| spider_tree(Some((l, 1.0)))).collect();
    let mean = frechet_mean(&sample, &MeanConfig::for_sample(3, 0)).unwrap();

    // Grid search along each orthant axis. Points on different legs are at
    // distance s + t, on the same leg at |s - t|.
    let mut best = (f64::INFINITY, 0usize, 0.0);
    for (j, _) in legs.iter().enumerate() {
        for step in 0..=20_000 {
            let t = step as f64 * 1e-4;
            let obj: f64 = (0..3).map(|i| if i == j { (1.0 - t).powi(2) } else { (1.0 + t).powi(2) }).sum();
            if obj < best.0 {
                best = (obj, j, t);
            }
        }
    }
    let oracle = spider_tree(Some((legs[best.1], best.2)));
    let gap = geodesic_distance(&mean, &oracle).unwrap();
    assert!(gap <= 1e-3, "mean is {gap} from the grid optimum");
    assert!(geodesic_distance(&mean, &spider_tree(None)).unwrap() <= 1e-3);
}

#[test]
fn two_tree_mean_is_the_midpoint() {
    let ls = Arc::new(LeafSet::new((0..7).map(|i| format!("l{i}"))).unwrap());
    let mut rng = seeded(5);
    for _ in 0..10 {
        let a = random_tree(&ls, 2, 0.3, &mut rng).unwrap();
        let b = random_tree(&ls, 2, 0.3, &mut rng).unwrap();
        let mean = frechet_mean(&[a.clone(), b.clone()], &MeanConfig::for_sample(2, 1)).unwrap();
        let mid = geodesic_point(&a, &b, 0.5).unwrap();
        assert!(geodesic_distance(&mean, &mid).unwrap() <= 1e-6);
    }
}

#[test]
fn variance_matches_the_distance_list() {
    let ls = Arc::new(LeafSet::new((0..6).map(|i| format!("l{i}"))).unwrap());
    let mut rng = seeded(8);
    let sample: Vec<AttributedTree> = (0..30).map(|_| random_tree(&ls, 1, 0.2, &mut rng).unwrap()).collect();
    let mean = frechet_mean(&sample, &MeanConfig::new(300, 1e-6, 2).unwrap()).unwrap();
    let dists: Vec<f64> = sample.iter().map(|t| geodesic_distance(t, &mean).unwrap()).collect();
    let direct = dists.iter().map(|d| d * d).sum::<f64>() / 29.0;
    assert!((variance(&sample, &mean).unwrap() - direct).abs() <= 1e-12);
}

/// Trees on one fixed topology with Gaussian 2-vectors on every edge.
fn orthant_sample(n: usize, shift: f64, seed: u64) -> Vec<AttributedTree> {
    let ls = Arc::new(LeafSet::new(["a", "b", "c"]).unwrap());
    let splits = [
        Split::from_indices(3, [0]),
        Split::from_indices(3, [1]),
        Split::from_indices(3, [2]),
        Split::from_indices(3, [0, 1]),
    ];
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let edges = splits.iter().enumerate().map(|(e, s)| {
                let mut v: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
                v[0] += 5.0;
                if e == 3 {
                    v[1] += shift;
                }
                (s.clone(), EdgeAttribute::new(v))
            });
            AttributedTree::new(ls.clone(), 2, edges.collect::<Vec<_>>(), []).unwrap()
        })
        .collect()
}

fn coords(t: &AttributedTree) -> Vec<f64> {
    t.edges().values().flat_map(|a| a.values().to_vec()).collect()
}

fn euclidean_mean_gap(a: &[&AttributedTree], b: &[&AttributedTree]) -> f64 {
    let avg = |g: &[&AttributedTree]| {
        let mut s = vec![0.0; 8];
        for t in g {
            for (x, v) in s.iter_mut().zip(coords(t)) {
                *x += v / g.len() as f64;
            }
        }
        s
    };
    let (ma, mb) = (avg(a), avg(b));
    ma.iter().zip(&mb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn permutation_test_in_one_orthant_is_the_euclidean_test() {
    let g1 = orthant_sample(30, 0.0, 1);
    let g2 = orthant_sample(30, 3.0, 2);
    // One pass of the inductive mean is the running average.
    let cfg = MeanConfig::new(30, 1e-6, 0).unwrap();
    let m = 199;
    let report = permutation_test(&g1, &g2, StatisticKind::Mean, m, 17, &cfg).unwrap();

    let pooled: Vec<&AttributedTree> = g1.iter().chain(&g2).collect();
    let observed = euclidean_mean_gap(&pooled[..30], &pooled[30..]);
    assert!((report.observed - observed).abs() <= 1e-9);
    let mut exceed = 0;
    for i in 0..m {
        let mut idx: Vec<usize> = (0..60).collect();
        idx.shuffle(&mut substream(17, i as u64));
        let a: Vec<&AttributedTree> = idx[..30].iter().map(|&j| pooled[j]).collect();
        let b: Vec<&AttributedTree> = idx[30..].iter().map(|&j| pooled[j]).collect();
        let stat = euclidean_mean_gap(&a, &b);
        assert!((report.permuted[i] - stat).abs() <= 1e-9);
        exceed += (stat >= observed) as usize;
    }
    assert_eq!(report.p_value, (1 + exceed) as f64 / (m + 1) as f64);
    assert!(report.p_value <= 0.01);
}

#[test]
fn pearson_hand_example() {
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
    assert!((r - 0.6).abs() <= 1e-12);
}

fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_trace_never_increases(seed in any::<u64>(), n in 2usize..8) {
        let ls = Arc::new(LeafSet::new((0..5).map(|i| format!("l{i}"))).unwrap());
        let mut rng = seeded(seed);
        let sample: Vec<AttributedTree> = (0..n).map(|_| random_tree(&ls, 1, 0.3, &mut rng).unwrap()).collect();
        let r = frechet_mean_traced(&sample, &MeanConfig::new(20 * n, 1e-6, seed).unwrap()).unwrap();
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        let obj = frechet_objective(&sample, &r.mean).unwrap();
        prop_assert!((obj - r.objective).abs() <= 1e-9 * (1.0 + obj));
        for t in &sample {
            prop_assert!(r.objective <= frechet_objective(&sample, t).unwrap() + 1e-12);
        }
    }

    #[test]
    fn pearson_matches_formula_and_is_affine_invariant(
        xy in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        a in 0.1f64..5.0, b in -5.0f64..5.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let r = pearson(&x, &y);
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assert!((r - pearson_direct(&x, &y)).abs() <= 1e-9);
        prop_assert!((pearson(&x, &x).unwrap() - 1.0).abs() <= 1e-12);
        let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&x2, &y).unwrap() - r).abs() <= 1e-12);
    }
}
