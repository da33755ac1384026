mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scidyn_core::data::{
    group_aggregate, marginalize, normalize, Axis, ContingencyTensor, GroupNode, GroupingTree, ProbabilityDistribution,
};
use scidyn_core::entropy::{
    interaction_information3, kl_decompose, kl_divergence, mutual_information2, nested_decompose, shannon_entropy,
    theil_decompose,
};
use support::oracles;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

fn vector(p: &[f64]) -> ProbabilityDistribution {
    ProbabilityDistribution::from_dense(vec![Axis::new("x", labels(p.len())).unwrap()], p.to_vec()).unwrap()
}

fn grouping(parts: &[Vec<usize>]) -> GroupingTree {
    GroupingTree::flat(
        "x",
        parts.iter().enumerate().map(|(g, cats)| (format!("g{g}"), cats.iter().map(|&c| format!("c{c}")).collect())),
    )
    .unwrap()
}

fn counts() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..100.0, 1..40).prop_filter("positive mass", |v| v.iter().sum::<f64>() > 1e-6)
}

fn joint(shape: &[usize], probs: Vec<f64>) -> ProbabilityDistribution {
    let names = ["x", "y", "z"];
    let axes = shape.iter().zip(names).map(|(&n, name)| Axis::indexed(name, n).unwrap()).collect();
    ProbabilityDistribution::from_dense(axes, probs).unwrap()
}

proptest! {
    #[test]
    fn normalize_sums_to_one(c in counts()) {
        let t = ContingencyTensor::vector(Axis::indexed("x", c.len()).unwrap(), &c).unwrap();
        let p = normalize(&t).unwrap();
        prop_assert!((p.dense_values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_bounds(c in counts()) {
        let t = ContingencyTensor::vector(Axis::indexed("x", c.len()).unwrap(), &c).unwrap();
        let h = shannon_entropy(&normalize(&t).unwrap());
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (c.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn marginalize_commutes(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = joint(&[a, b, c], oracles::random_distribution(&mut rng, a * b * c));
        let via = marginalize(&marginalize(&p, &["x", "z"]).unwrap(), &["z"]).unwrap();
        let direct = marginalize(&p, &["z"]).unwrap();
        for (u, v) in via.dense_values().iter().zip(direct.dense_values()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn group_aggregate_preserves_mass(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = oracles::random_sparse_distribution(&mut rng, n, 0.3);
        let parts = oracles::random_partition(&mut rng, n, 6);
        let g = group_aggregate(&vector(&p), &grouping(&parts), 1).unwrap();
        prop_assert!((g.dense_values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measures_invariant_under_category_permutation(seed in any::<u64>(), n in 2usize..20) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = oracles::random_distribution(&mut rng, n);
        let q = oracles::random_distribution(&mut rng, n);
        let parts = oracles::random_partition(&mut rng, n, 4);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // category c{i} moves to position perm[i]; labels travel with their mass
        let permute = |v: &[f64]| {
            let mut out = vec![0.0; n];
            let mut names = vec![String::new(); n];
            for i in 0..n {
                out[perm[i]] = v[i];
                names[perm[i]] = format!("c{i}");
            }
            ProbabilityDistribution::from_dense(vec![Axis::new("x", names).unwrap()], out).unwrap()
        };
        let g = grouping(&parts);
        let (pp, qq) = (permute(&p), permute(&q));
        prop_assert!((shannon_entropy(&pp) - shannon_entropy(&vector(&p))).abs() < 1e-12);
        prop_assert!((kl_divergence(&qq, &pp).unwrap() - kl_divergence(&vector(&q), &vector(&p)).unwrap()).abs() < 1e-12);
        let a = theil_decompose(&pp, &g, 1).unwrap();
        let b = theil_decompose(&vector(&p), &g, 1).unwrap();
        prop_assert!((a.between_bits - b.between_bits).abs() < 1e-12);
        for (x, y) in a.groups.iter().zip(&b.groups) {
            prop_assert!((x.within_bits - y.within_bits).abs() < 1e-12);
        }
        let ga = group_aggregate(&pp, &g, 1).unwrap().dense_values();
        let gb = group_aggregate(&vector(&p), &g, 1).unwrap().dense_values();
        for (x, y) in ga.iter().zip(&gb) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn additivity_for_product_joints(seed in any::<u64>(), a in 1usize..6, b in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let px = oracles::random_distribution(&mut rng, a);
        let py = oracles::random_distribution(&mut rng, b);
        let prod: Vec<f64> = px.iter().flat_map(|x| py.iter().map(move |y| x * y)).collect();
        let h = shannon_entropy(&joint(&[a, b], prod));
        prop_assert!((h - oracles::entropy(&px) - oracles::entropy(&py)).abs() < 1e-9);
    }

    #[test]
    fn gibbs_inequality(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = oracles::random_distribution(&mut rng, n);
        let q = oracles::random_distribution(&mut rng, n);
        let d = kl_divergence(&vector(&q), &vector(&p)).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - oracles::kl(&q, &p)).abs() < 1e-12);
        prop_assert_eq!(kl_divergence(&vector(&p), &vector(&p)).unwrap(), 0.0);
    }
}

#[test]
fn theil_identity_on_random_groupings() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rand::Rng::gen_range(&mut rng, 1..=64);
        let p = oracles::random_sparse_distribution(&mut rng, n, 0.2);
        let parts = oracles::random_partition(&mut rng, n, 8);
        let r = theil_decompose(&vector(&p), &grouping(&parts), 1).unwrap();
        assert!((r.total_bits - oracles::entropy(&p)).abs() < 1e-9);
        assert!((r.total_bits - r.recomposed_bits()).abs() < 1e-9);
        assert!((r.groups.iter().map(|g| g.share).sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(r.groups.iter().all(|g| g.within_bits >= 0.0) && r.between_bits >= 0.0);
    }
}

/// Random tree over `cats`: split into groups, recursively, until `levels`
/// runs out or a group has one category.
fn random_tree(rng: &mut ChaCha8Rng, cats: &[usize], levels: usize, prefix: &str) -> Vec<GroupNode> {
    let parts = oracles::random_partition(rng, cats.len(), 3);
    parts
        .into_iter()
        .enumerate()
        .map(|(g, idx)| {
            let members: Vec<usize> = idx.iter().map(|&i| cats[i]).collect();
            let label = format!("{prefix}{g}");
            if levels > 1 && members.len() > 1 {
                GroupNode::branch(label.clone(), random_tree(rng, &members, levels - 1, &format!("{label}.")))
            } else {
                GroupNode::leaf(label, members.iter().map(|c| format!("c{c}")))
            }
        })
        .collect()
}

#[test]
fn nested_decomposition_flattens_to_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let n = rand::Rng::gen_range(&mut rng, 2..=64);
        let p = oracles::random_sparse_distribution(&mut rng, n, 0.2);
        let cats: Vec<usize> = (0..n).collect();
        let tree = GroupingTree::new("x", random_tree(&mut rng, &cats, 4, "g")).unwrap();
        let r = nested_decompose(&vector(&p), &tree).unwrap();
        assert!((r.flattened_bits() - oracles::entropy(&p)).abs() < 1e-9);
        fn check(r: &scidyn_core::entropy::DecompositionReport) {
            assert!((r.total_bits - r.recomposed_bits()).abs() < 1e-9);
            for g in &r.groups {
                if let Some(n) = &g.nested {
                    assert!((n.total_bits - g.within_bits).abs() < 1e-9);
                    check(n);
                }
            }
        }
        check(&r);
    }
}

#[test]
fn kl_decomposition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let n = rand::Rng::gen_range(&mut rng, 1..=64);
        let p = oracles::random_distribution(&mut rng, n);
        let q = oracles::random_sparse_distribution(&mut rng, n, 0.2);
        let parts = oracles::random_partition(&mut rng, n, 8);
        let r = kl_decompose(&vector(&q), &vector(&p), &grouping(&parts)).unwrap();
        let direct = kl_divergence(&vector(&q), &vector(&p)).unwrap();
        assert!((r.recomposed_bits() - direct).abs() < 1e-9);
        assert!((r.total_bits - direct).abs() < 1e-12);
    }
}

#[test]
fn mutual_information_is_divergence_from_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let (a, b) = (rand::Rng::gen_range(&mut rng, 1..6), rand::Rng::gen_range(&mut rng, 1..6));
        let p = oracles::random_sparse_distribution(&mut rng, a * b, 0.2);
        let t = mutual_information2(&joint(&[a, b], p.clone())).unwrap();
        let prod = oracles::product_of_marginals(&p, a, b);
        let d = kl_divergence(&joint(&[a, b], p), &joint(&[a, b], prod)).unwrap();
        assert!(t >= 0.0);
        assert!((t - d).abs() < 1e-9, "{t} vs {d}");
    }
}

#[test]
fn interaction_information_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let p = oracles::random_distribution(&mut rng, n * n * n);
        let t = interaction_information3(&joint(&[n, n, n], p.clone())).unwrap();
        let oracle = oracles::interaction_information_by_enumeration(&p, [n, n, n]);
        assert!((t - oracle).abs() < 1e-9, "{t} vs {oracle}");
    }
}

#[test]
fn nested_uniform_binary_tree_hand_values() {
    let tree = GroupingTree::new(
        "x",
        vec![
            GroupNode::branch("L", vec![GroupNode::leaf("LL", ["c0", "c1"]), GroupNode::leaf("LR", ["c2", "c3"])]),
            GroupNode::branch("R", vec![GroupNode::leaf("RL", ["c4", "c5"]), GroupNode::leaf("RR", ["c6", "c7"])]),
        ],
    )
    .unwrap();
    let r = nested_decompose(&vector(&[0.125; 8]), &tree).unwrap();
    assert_eq!(r.total_bits, 3.0);
    assert_eq!(r.between_bits, 1.0);
}
