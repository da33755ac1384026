//! Entropy statistics in bits.
//!
//! | Function | Measures |
//! |----------|----------|
//! | [`shannon_entropy`] | H = −Σ p log2 p over all cells of a tensor of any rank |
//! | [`theil_decompose`] | H = H₀ + Σ_G P_G H_G for one level of a grouping |
//! | [`nested_decompose`] | the same identity applied recursively down a grouping tree |
//! | [`kl_divergence`] | I(q‖p) = Σ q log2(q/p), the information of updating prior p to posterior q |
//! | [`kl_decompose`] | I = Σ_G Q_G log2(Q_G/P_G) + Σ_G Q_G I_G |
//! | [`mutual_information2`] | T = H_X + H_Y − H_XY |
//! | [`interaction_information3`] | T = H_X + H_Y + H_Z − H_XY − H_XZ − H_YZ + H_XYZ (signed) |
//! | [`transition_information`] | I(dist_{t+1}‖dist_t) along a series |
//!
//! `0 · log2 0` is taken as 0 by an explicit branch.
//!
//! ## Sign of the three-way measure
//!
//! [`interaction_information3`] is positive when the three variables share
//! redundant information (e.g. X = Y = Z gives +1 bit) and negative for
//! synergy (Z = X XOR Y gives −1 bit). Parts of the literature use the
//! opposite sign; this crate always uses the one above.

use serde::Serialize;

use crate::data::{grouped_mass, marginalize, one_axis, GroupNode, GroupingTree, ProbabilityDistribution};
use crate::error::{Error, Result};

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Additive smoothing used when [`SupportPolicy::Smoothed`] is selected
/// without an explicit epsilon.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

/// What to do when the posterior has mass where the prior has none.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SupportPolicy {
    /// Fail with [`Error::SupportViolation`].
    #[default]
    Strict,
    /// Add epsilon to every cell of both distributions and renormalize.
    Smoothed(f64),
}

fn plog2p(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn entropy_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs.into_iter().map(plog2p).sum::<f64>().max(0.0)
}

fn conditional_entropy(members: &[f64], share: f64) -> f64 {
    if share == 0.0 {
        return 0.0;
    }
    entropy_of(members.iter().map(|p| p / share))
}

/// Shannon entropy of a distribution over any number of axes.
pub fn shannon_entropy(dist: &ProbabilityDistribution) -> f64 {
    entropy_of(dist.nonzero().into_iter().map(|(_, p)| p))
}

/// Gibbs conversion of an entropy in bits to J/K: `S = k_B · H · ln 2`.
pub fn thermodynamic_entropy(h_bits: f64) -> Result<f64> {
    if h_bits.is_nan() || h_bits < 0.0 {
        return Err(Error::NegativeEntropy(h_bits));
    }
    Ok(BOLTZMANN * h_bits * std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTerm {
    pub label: String,
    pub share: f64,
    pub within_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nested: Option<Box<DecompositionReport>>,
}

/// Split of total entropy into between-group and weighted within-group parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub total_bits: f64,
    pub between_bits: f64,
    pub groups: Vec<GroupTerm>,
}

impl DecompositionReport {
    /// `between + Σ share · within`, using the within values as reported.
    pub fn recomposed_bits(&self) -> f64 {
        self.between_bits + self.groups.iter().map(|g| g.share * g.within_bits).sum::<f64>()
    }

    /// Rebuilds the total from the leaves up: each nested group contributes
    /// its own recomposition in place of its within value.
    pub fn flattened_bits(&self) -> f64 {
        self.between_bits
            + self
                .groups
                .iter()
                .map(|g| g.share * g.nested.as_ref().map_or(g.within_bits, |n| n.flattened_bits()))
                .sum::<f64>()
    }
}

/// Theil decomposition of a one-axis distribution at one grouping level.
pub fn theil_decompose(
    dist: &ProbabilityDistribution,
    grouping: &GroupingTree,
    level: usize,
) -> Result<DecompositionReport> {
    let (labels, shares, members) = grouped_mass(dist, grouping, level)?;
    let groups = labels
        .into_iter()
        .zip(&shares)
        .zip(&members)
        .map(|((label, &share), m)| GroupTerm {
            label,
            share,
            within_bits: conditional_entropy(m, share),
            nested: None,
        })
        .collect();
    Ok(DecompositionReport {
        total_bits: shannon_entropy(dist),
        between_bits: entropy_of(shares.iter().copied()),
        groups,
    })
}

/// Applies the Theil decomposition at every level of the tree. Each group
/// with sub-groups and positive share carries the decomposition of its
/// conditional distribution.
pub fn nested_decompose(dist: &ProbabilityDistribution, grouping: &GroupingTree) -> Result<DecompositionReport> {
    let axis = one_axis(dist)?;
    grouping.check_partition(axis)?;
    let probs = dist.as_vector()?;
    let lookup = |c: &str| probs[axis.position(c).expect("partition checked")];
    Ok(decompose_children(grouping.groups(), 1.0, &lookup))
}

fn decompose_children(children: &[GroupNode], mass: f64, lookup: &dyn Fn(&str) -> f64) -> DecompositionReport {
    let member_probs: Vec<Vec<f64>> =
        children.iter().map(|g| g.categories().into_iter().map(|c| lookup(c) / mass).collect()).collect();
    let shares: Vec<f64> = member_probs.iter().map(|m| m.iter().sum()).collect();
    let groups = children
        .iter()
        .zip(&member_probs)
        .zip(&shares)
        .map(|((node, m), &share)| {
            let nested = match node.children() {
                Some(sub) if share > 0.0 => Some(Box::new(decompose_children(sub, mass * share, lookup))),
                _ => None,
            };
            GroupTerm { label: node.label.clone(), share, within_bits: conditional_entropy(m, share), nested }
        })
        .collect();
    DecompositionReport {
        total_bits: entropy_of(member_probs.iter().flatten().copied()),
        between_bits: entropy_of(shares.iter().copied()),
        groups,
    }
}

fn check_same_shape(q: &ProbabilityDistribution, p: &ProbabilityDistribution) -> Result<()> {
    if !q.same_shape(p) {
        return Err(Error::ShapeMismatch("posterior and prior have different axes or categories".into()));
    }
    Ok(())
}

fn apply_policy(
    q: &ProbabilityDistribution,
    p: &ProbabilityDistribution,
    policy: SupportPolicy,
) -> (ProbabilityDistribution, ProbabilityDistribution) {
    match policy {
        SupportPolicy::Strict => (q.clone(), p.clone()),
        SupportPolicy::Smoothed(eps) => (q.smoothed(eps), p.smoothed(eps)),
    }
}

fn kl_terms(q: &[f64], p: &[f64], describe: &dyn Fn(usize) -> String) -> Result<f64> {
    let mut sum = 0.0;
    for (i, (&qi, &pi)) in q.iter().zip(p).enumerate() {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Err(Error::SupportViolation { cell: describe(i), q: qi });
        }
        sum += qi * (qi / pi).log2();
    }
    Ok(sum.max(0.0))
}

/// Kullback-Leibler divergence of posterior `q` from prior `p`, strict
/// support.
pub fn kl_divergence(q: &ProbabilityDistribution, p: &ProbabilityDistribution) -> Result<f64> {
    kl_divergence_with(q, p, SupportPolicy::Strict)
}

pub fn kl_divergence_with(
    q: &ProbabilityDistribution,
    p: &ProbabilityDistribution,
    policy: SupportPolicy,
) -> Result<f64> {
    check_same_shape(q, p)?;
    let (q, p) = apply_policy(q, p, policy);
    let mut sum = 0.0;
    for (index, qi) in q.nonzero() {
        let pi = p.probability_at(&index);
        if pi == 0.0 {
            return Err(Error::SupportViolation { cell: q.describe_cell(&index), q: qi });
        }
        sum += qi * (qi / pi).log2();
    }
    Ok(sum.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTerm {
    pub label: String,
    /// Group share under the posterior.
    pub posterior_share: f64,
    /// Group share under the prior.
    pub prior_share: f64,
    pub within_bits: f64,
}

/// Split of a divergence into a between-group term and posterior-weighted
/// within-group divergences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub total_bits: f64,
    pub between_bits: f64,
    pub groups: Vec<DivergenceTerm>,
}

impl DivergenceReport {
    pub fn recomposed_bits(&self) -> f64 {
        self.between_bits + self.groups.iter().map(|g| g.posterior_share * g.within_bits).sum::<f64>()
    }
}

pub fn kl_decompose(
    q: &ProbabilityDistribution,
    p: &ProbabilityDistribution,
    grouping: &GroupingTree,
) -> Result<DivergenceReport> {
    kl_decompose_with(q, p, grouping, SupportPolicy::Strict)
}

/// Decomposes the divergence over the top level of `grouping`.
pub fn kl_decompose_with(
    q: &ProbabilityDistribution,
    p: &ProbabilityDistribution,
    grouping: &GroupingTree,
    policy: SupportPolicy,
) -> Result<DivergenceReport> {
    check_same_shape(q, p)?;
    let (q, p) = apply_policy(q, p, policy);
    let (labels, q_shares, q_members) = grouped_mass(&q, grouping, 1)?;
    let (_, p_shares, p_members) = grouped_mass(&p, grouping, 1)?;
    let group_cats = grouping.groups_at(1)?;

    let between = kl_terms(&q_shares, &p_shares, &|g| format!("group {}", labels[g]))?;
    let mut groups = Vec::with_capacity(labels.len());
    for (g, label) in labels.iter().enumerate() {
        let (qs, ps) = (q_shares[g], p_shares[g]);
        let within = if qs == 0.0 {
            0.0
        } else {
            let qc: Vec<f64> = q_members[g].iter().map(|x| x / qs).collect();
            let pc: Vec<f64> = p_members[g].iter().map(|x| x / ps).collect();
            kl_terms(&qc, &pc, &|i| format!("{}={}", grouping.axis(), group_cats[g].1[i]))?
        };
        groups.push(DivergenceTerm { label: label.clone(), posterior_share: qs, prior_share: ps, within_bits: within });
    }
    Ok(DivergenceReport {
        total_bits: kl_divergence_with(&q, &p, SupportPolicy::Strict)?,
        between_bits: between,
        groups,
    })
}

fn axis_names(dist: &ProbabilityDistribution, expected: usize) -> Result<Vec<String>> {
    let axes = dist.axes();
    if axes.len() != expected {
        return Err(Error::WrongArity { expected, actual: axes.len() });
    }
    Ok(axes.iter().map(|a| a.name().to_string()).collect())
}

fn marginal_entropy(dist: &ProbabilityDistribution, keep: &[&str]) -> Result<f64> {
    Ok(shannon_entropy(&marginalize(dist, keep)?))
}

/// Mutual information between the two axes of `joint`.
pub fn mutual_information2(joint: &ProbabilityDistribution) -> Result<f64> {
    let n = axis_names(joint, 2)?;
    let (x, y) = (n[0].as_str(), n[1].as_str());
    let t = marginal_entropy(joint, &[x])? + marginal_entropy(joint, &[y])? - shannon_entropy(joint);
    Ok(t.max(0.0))
}

/// Signed three-way interaction information among the axes of `joint`.
/// Positive values indicate redundancy, negative values synergy.
pub fn interaction_information3(joint: &ProbabilityDistribution) -> Result<f64> {
    let n = axis_names(joint, 3)?;
    let (x, y, z) = (n[0].as_str(), n[1].as_str(), n[2].as_str());
    Ok(marginal_entropy(joint, &[x])? + marginal_entropy(joint, &[y])? + marginal_entropy(joint, &[z])?
        - marginal_entropy(joint, &[x, y])?
        - marginal_entropy(joint, &[x, z])?
        - marginal_entropy(joint, &[y, z])?
        + shannon_entropy(joint))
}

/// Divergence between consecutive distributions of a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionStep {
    pub from: String,
    pub to: String,
    pub bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DivergenceReport>,
}

/// `I(dist_{t+1} ‖ dist_t)` for each consecutive pair: under a Markov
/// baseline the current state is the expected next state, so each entry
/// measures the surprise of the observed change.
pub fn transition_information(
    series: &[(String, ProbabilityDistribution)],
    grouping: Option<&GroupingTree>,
    policy: SupportPolicy,
) -> Result<Vec<TransitionStep>> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort { needed: 2, actual: series.len() });
    }
    series
        .windows(2)
        .enumerate()
        .map(|(step, w)| {
            let (prior, posterior) = (&w[0], &w[1]);
            let wrap = |e: Error| Error::Step { step, source: Box::new(e) };
            let bits = kl_divergence_with(&posterior.1, &prior.1, policy).map_err(wrap)?;
            let decomposition =
                grouping.map(|g| kl_decompose_with(&posterior.1, &prior.1, g, policy)).transpose().map_err(wrap)?;
            Ok(TransitionStep { from: prior.0.clone(), to: posterior.0.clone(), bits, decomposition })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Axis;

    const TOL: f64 = 1e-12;

    fn vector(p: &[f64]) -> ProbabilityDistribution {
        ProbabilityDistribution::vector("x", p).unwrap()
    }

    fn abcd(p: &[f64]) -> ProbabilityDistribution {
        ProbabilityDistribution::from_dense(vec![Axis::new("x", ["a", "b", "c", "d"]).unwrap()], p.to_vec()).unwrap()
    }

    fn halves() -> GroupingTree {
        GroupingTree::flat("x", [("ab", vec!["a", "b"]), ("cd", vec!["c", "d"])]).unwrap()
    }

    fn joint(axes: usize, probs: Vec<f64>) -> ProbabilityDistribution {
        let names = ["x", "y", "z"];
        let n = (probs.len() as f64).powf(1.0 / axes as f64).round() as usize;
        ProbabilityDistribution::from_dense((0..axes).map(|k| Axis::indexed(names[k], n).unwrap()).collect(), probs)
            .unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&vector(&[0.25; 4])), 2.0);
        assert_eq!(shannon_entropy(&vector(&[0.0, 1.0, 0.0])), 0.0);
        assert!((shannon_entropy(&vector(&[0.5, 0.25, 0.25])) - 1.5).abs() < TOL);
        assert_eq!(shannon_entropy(&joint(2, vec![0.25; 4])), 2.0);
    }

    #[test]
    fn theil_examples() {
        let r = theil_decompose(&abcd(&[0.25; 4]), &halves(), 1).unwrap();
        assert_eq!((r.total_bits, r.between_bits), (2.0, 1.0));
        assert!(r.groups.iter().all(|g| g.within_bits == 1.0 && g.share == 0.5));

        let all = GroupingTree::flat("x", [("all", vec!["a", "b", "c", "d"])]).unwrap();
        let p = abcd(&[0.1, 0.2, 0.3, 0.4]);
        let r = theil_decompose(&p, &all, 1).unwrap();
        assert_eq!(r.between_bits, 0.0);
        assert!((r.groups[0].within_bits - r.total_bits).abs() < TOL);

        let r = theil_decompose(&abcd(&[0.5, 0.5, 0.0, 0.0]), &halves(), 1).unwrap();
        assert_eq!(r.between_bits, 0.0);
        assert_eq!(r.groups[0].within_bits, 1.0);
        assert_eq!(r.groups[1].within_bits, 0.0);
        assert_eq!(r.groups[1].share, 0.0);
        assert_eq!(r.total_bits, 1.0);
    }

    #[test]
    fn nested_on_binary_tree_of_eight() {
        // ((0 1)(2 3))((4 5)(6 7))
        let leaf = |l: &str, a: usize| GroupNode::leaf(l, [a.to_string(), (a + 1).to_string()]);
        let tree = GroupingTree::new(
            "x",
            vec![
                GroupNode::branch("L", vec![leaf("LL", 0), leaf("LR", 2)]),
                GroupNode::branch("R", vec![leaf("RL", 4), leaf("RR", 6)]),
            ],
        )
        .unwrap();
        let r = nested_decompose(&vector(&[0.125; 8]), &tree).unwrap();
        assert_eq!(r.total_bits, 3.0);
        assert_eq!(r.between_bits, 1.0);
        for g in &r.groups {
            let n = g.nested.as_ref().unwrap();
            assert_eq!(n.between_bits, 1.0);
            for leaf in &n.groups {
                assert_eq!(leaf.within_bits, 1.0);
                assert!(leaf.nested.is_none());
            }
        }
        assert!((r.flattened_bits() - 3.0).abs() < TOL);
    }

    #[test]
    fn nested_depth_one_matches_theil() {
        let p = abcd(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(nested_decompose(&p, &halves()).unwrap(), theil_decompose(&p, &halves(), 1).unwrap());
    }

    #[test]
    fn kl_examples() {
        let p = vector(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let q = vector(&[0.75, 0.25]);
        // 0.75 log2 1.5 + 0.25 log2 0.5
        let want = 0.75 * 1.5f64.log2() - 0.25;
        assert!((kl_divergence(&q, &p).unwrap() - want).abs() < TOL);
        assert!((kl_divergence(&q, &p).unwrap() - 0.18872).abs() < 5e-6);

        let err = kl_divergence(&vector(&[0.5, 0.5]), &vector(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::SupportViolation { .. }));
        assert!(matches!(kl_divergence(&vector(&[0.5, 0.5]), &vector(&[0.2, 0.3, 0.5])), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn smoothing_makes_support_violation_finite() {
        let q = vector(&[0.5, 0.5]);
        let p = vector(&[1.0, 0.0]);
        let d = kl_divergence_with(&q, &p, SupportPolicy::Smoothed(DEFAULT_SMOOTHING)).unwrap();
        assert!(d.is_finite() && d > 1.0);
        assert_eq!(kl_divergence_with(&q, &q, SupportPolicy::Smoothed(DEFAULT_SMOOTHING)).unwrap(), 0.0);
    }

    #[test]
    fn kl_decompose_examples() {
        let p = abcd(&[0.25; 4]);
        let r = kl_decompose(&p, &p, &halves()).unwrap();
        assert_eq!((r.total_bits, r.between_bits), (0.0, 0.0));
        assert!(r.groups.iter().all(|g| g.within_bits == 0.0));

        let q = abcd(&[0.4, 0.4, 0.1, 0.1]);
        let r = kl_decompose(&q, &p, &halves()).unwrap();
        // 0.8 log2 1.6 + 0.2 log2 0.4
        let want = 0.8 * 1.6f64.log2() + 0.2 * 0.4f64.log2();
        assert!(r.groups.iter().all(|g| g.within_bits.abs() < TOL));
        assert!((r.between_bits - want).abs() < TOL);
        assert!((r.total_bits - want).abs() < TOL);
        assert!((want - 0.27807).abs() < 5e-6);
        assert_eq!(r.groups[0].posterior_share, 0.8);
        assert_eq!(r.groups[0].prior_share, 0.5);
    }

    #[test]
    fn kl_decompose_support_violation_in_group() {
        let q = abcd(&[0.25; 4]);
        let p = abcd(&[0.5, 0.0, 0.25, 0.25]);
        assert!(matches!(kl_decompose(&q, &p, &halves()), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn mutual_information_examples() {
        let indep = joint(2, vec![0.3 * 0.6, 0.3 * 0.4, 0.7 * 0.6, 0.7 * 0.4]);
        assert!(mutual_information2(&indep).unwrap().abs() < TOL);
        assert_eq!(mutual_information2(&joint(2, vec![0.5, 0.0, 0.0, 0.5])).unwrap(), 1.0);
        let t = mutual_information2(&joint(2, vec![0.4, 0.1, 0.1, 0.4])).unwrap();
        // 2 - H(0.4, 0.1, 0.1, 0.4)
        let want = 2.0 + 0.8 * 0.4f64.log2() + 0.2 * 0.1f64.log2();
        assert!((t - want).abs() < TOL);
        assert!((t - 0.27807).abs() < 5e-6);
        assert_eq!(mutual_information2(&vector(&[1.0])), Err(Error::WrongArity { expected: 2, actual: 1 }));
    }

    #[test]
    fn interaction_information_examples() {
        assert!(interaction_information3(&joint(3, vec![0.125; 8])).unwrap().abs() < TOL);
        // index = 4x + 2y + z; z = x xor y
        let mut xor = vec![0.0; 8];
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            xor[4 * x + 2 * y + (x ^ y)] = 0.25;
        }
        assert!((interaction_information3(&joint(3, xor)).unwrap() + 1.0).abs() < TOL);
        let mut same = vec![0.0; 8];
        same[0] = 0.5;
        same[7] = 0.5;
        assert!((interaction_information3(&joint(3, same)).unwrap() - 1.0).abs() < TOL);
        assert!(matches!(interaction_information3(&joint(2, vec![0.25; 4])), Err(Error::WrongArity { .. })));
    }

    #[test]
    fn transition_examples() {
        let s = |v: &[&[f64]]| -> Vec<(String, ProbabilityDistribution)> {
            v.iter().enumerate().map(|(i, p)| (i.to_string(), vector(p))).collect()
        };
        let steps =
            transition_information(&s(&[&[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]), None, SupportPolicy::Strict).unwrap();
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|t| t.bits == 0.0));

        let steps = transition_information(&s(&[&[0.5, 0.5], &[0.75, 0.25]]), None, SupportPolicy::Strict).unwrap();
        assert_eq!(steps.len(), 1);
        assert!((steps[0].bits - kl_divergence(&vector(&[0.75, 0.25]), &vector(&[0.5, 0.5])).unwrap()).abs() < TOL);
        assert_eq!((steps[0].from.as_str(), steps[0].to.as_str()), ("0", "1"));

        let err = transition_information(&s(&[&[0.5, 0.5], &[1.0, 0.0], &[0.5, 0.5]]), None, SupportPolicy::Strict)
            .unwrap_err();
        assert!(matches!(err, Error::Step { step: 1, .. }));
        assert!(matches!(
            transition_information(&s(&[&[1.0]]), None, SupportPolicy::Strict),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn transition_with_grouping_carries_reports() {
        let series = vec![("t0".to_string(), abcd(&[0.25; 4])), ("t1".to_string(), abcd(&[0.4, 0.4, 0.1, 0.1]))];
        let steps = transition_information(&series, Some(&halves()), SupportPolicy::Strict).unwrap();
        let r = steps[0].decomposition.as_ref().unwrap();
        assert!((r.recomposed_bits() - steps[0].bits).abs() < TOL);
    }

    #[test]
    fn thermodynamic_examples() {
        assert_eq!(thermodynamic_entropy(0.0).unwrap(), 0.0);
        let one = thermodynamic_entropy(1.0).unwrap();
        assert!((one - 9.56994e-24).abs() < 1e-28);
        assert_eq!(thermodynamic_entropy(2.0).unwrap(), 2.0 * one);
        assert!(matches!(thermodynamic_entropy(-1.0), Err(Error::NegativeEntropy(_))));
    }
}
