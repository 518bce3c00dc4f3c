use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::raycaster::FEATURE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features drawn per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&TreeNode)) {
        f(self);
        if let TreeNode::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

/// Binary CART regression tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegressionTree {
    pub root: TreeNode,
}

struct Builder<'a, R> {
    x: &'a [FeatureVector],
    y: &'a [f64],
    params: TreeParams,
    rng: &'a mut R,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> TreeNode {
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        let min_leaf = self.params.min_samples_leaf.max(1);
        if pure || !depth_ok || idx.len() < 2 * min_leaf {
            return TreeNode::Leaf {
                value: mean(self.y, idx),
            };
        }
        let Some(best) = self.best_split(idx, min_leaf) else {
            return TreeNode::Leaf {
                value: mean(self.y, idx),
            };
        };
        let x = self.x;
        idx.sort_by(|&a, &b| {
            let (la, lb) = (
                x[a][best.feature] <= best.threshold,
                x[b][best.feature] <= best.threshold,
            );
            lb.cmp(&la).then(a.cmp(&b))
        });
        let n_left = idx
            .iter()
            .take_while(|&&i| x[i][best.feature] <= best.threshold)
            .count();
        let (l, r) = idx.split_at_mut(n_left);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(l, depth + 1)),
            right: Box::new(self.grow(r, depth + 1)),
        }
    }

    /// Draws `max_features` candidates; if none of them admits a split, keeps
    /// drawing from the remaining features until one does.
    fn best_split(&mut self, idx: &[usize], min_leaf: usize) -> Option<BestSplit> {
        let m = self
            .params
            .max_features
            .unwrap_or(FEATURE_COUNT)
            .clamp(1, FEATURE_COUNT);
        let mut order: Vec<usize> = (0..FEATURE_COUNT).collect();
        if m < FEATURE_COUNT {
            order.shuffle(self.rng);
            order[..m].sort_unstable();
        }
        let mut best: Option<BestSplit> = None;
        let mut scratch: Vec<(f64, f64)> = Vec::with_capacity(idx.len());
        for (k, &f) in order.iter().enumerate() {
            if k >= m && best.is_some() {
                break;
            }
            scratch.clear();
            scratch.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i])));
            scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((threshold, gain)) = best_threshold(&scratch, min_leaf) {
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Variance-reduction sweep over `(x, y)` pairs sorted by x.
fn best_threshold(pairs: &[(f64, f64)], min_leaf: usize) -> Option<(f64, f64)> {
    let n = pairs.len();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut left = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        left += pairs[i].1;
        let n_left = i + 1;
        if pairs[i].0 == pairs[i + 1].0 || n_left < min_leaf || n - n_left < min_leaf {
            continue;
        }
        let n_right = n - n_left;
        let diff = left / n_left as f64 - (total - left) / n_right as f64;
        // SSE reduction, written so it is positive whenever the means differ.
        let gain = (n_left * n_right) as f64 / n as f64 * diff * diff;
        if gain > 0.0 && best.is_none_or(|b| gain > b.1) {
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            let mid = a + (b - a) / 2.0;
            let thr = if mid < b { mid } else { a };
            best = Some((thr, gain));
        }
    }
    best
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            root: TreeNode::Leaf { value },
        }
    }

    /// Fits on the rows listed in `idx` (repeats allowed, as in a bootstrap).
    pub fn fit<R: Rng>(x: &[FeatureVector], y: &[f64], idx: &[usize], params: TreeParams, rng: &mut R) -> Self {
        assert!(!idx.is_empty(), "cannot fit a tree on zero rows");
        let mut idx = idx.to_vec();
        let mut b = Builder { x, y, params, rng };
        RegressionTree {
            root: b.grow(&mut idx, 0),
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.root
            .visit(&mut |node| n += matches!(node, TreeNode::Leaf { .. }) as usize);
        n
    }

    /// Marks every feature index that some split tests.
    pub fn mark_used(&self, used: &mut [bool; FEATURE_COUNT]) {
        self.root.visit(&mut |node| {
            if let TreeNode::Split { feature, .. } = node {
                used[*feature] = true;
            }
        });
    }

    /// Structural check for deserialized trees.
    pub fn check(&self) -> Result<(), String> {
        let mut err = None;
        self.root.visit(&mut |node| match node {
            TreeNode::Split { feature, threshold, .. } => {
                if *feature >= FEATURE_COUNT {
                    err.get_or_insert(format!("split feature {feature} out of range"));
                }
                if threshold.is_nan() {
                    err.get_or_insert("NaN split threshold".to_string());
                }
            }
            TreeNode::Leaf { value } => {
                if !value.is_finite() {
                    err.get_or_insert(format!("non-finite leaf value {value}"));
                }
            }
        });
        err.map_or(Ok(()), Err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(vals: &[(usize, f64)]) -> FeatureVector {
        let mut v = [0.0; FEATURE_COUNT];
        for &(i, x) in vals {
            v[i] = x;
        }
        v
    }

    #[test]
    fn single_split_on_step() {
        let x: Vec<_> = (0..10).map(|i| row(&[(3, i as f64)])).collect();
        let y: Vec<_> = (0..10).map(|i| if i < 4 { -1.0 } else { 2.0 }).collect();
        let idx: Vec<_> = (0..10).collect();
        let t = RegressionTree::fit(&x, &y, &idx, TreeParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
        match &t.root {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 3);
                assert_eq!(*threshold, 3.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&row(&[(3, 3.5)])), -1.0);
        assert_eq!(t.predict(&row(&[(3, 3.6)])), 2.0);
    }

    #[test]
    fn depth_zero_is_the_mean() {
        let x: Vec<_> = (0..4).map(|i| row(&[(0, i as f64)])).collect();
        let y = [1.0, 2.0, 3.0, 6.0];
        let p = TreeParams {
            max_depth: Some(0),
            ..TreeParams::default()
        };
        let t = RegressionTree::fit(&x, &y, &[0, 1, 2, 3], p, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(t.predict(&x[0]), 3.0);
    }

    #[test]
    fn min_leaf_respected() {
        let x: Vec<_> = (0..6).map(|i| row(&[(0, i as f64)])).collect();
        let y = [0.0, 0.0, 0.0, 0.0, 0.0, 9.0];
        let p = TreeParams {
            min_samples_leaf: 2,
            ..TreeParams::default()
        };
        let t = RegressionTree::fit(&x, &y, &[0, 1, 2, 3, 4, 5], p, &mut ChaCha8Rng::seed_from_u64(0));
        let mut leaves = Vec::new();
        fn sizes(n: &TreeNode, x: &[FeatureVector], out: &mut Vec<usize>, rows: Vec<usize>) {
            match n {
                TreeNode::Leaf { .. } => out.push(rows.len()),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (l, r): (Vec<_>, Vec<_>) = rows.into_iter().partition(|&i| x[i][*feature] <= *threshold);
                    sizes(left, x, out, l);
                    sizes(right, x, out, r);
                }
            }
        }
        sizes(&t.root, &x, &mut leaves, (0..6).collect());
        assert!(leaves.iter().all(|&n| n >= 2), "{leaves:?}");
    }

    #[test]
    fn adjacent_floats_threshold_stays_below_upper() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let (thr, _) = best_threshold(&[(a, 0.0), (b, 1.0)], 1).unwrap();
        assert!(thr >= a && thr < b);
    }

    #[test]
    fn serialized_nodes_are_tagged() {
        let t = RegressionTree {
            root: TreeNode::Split {
                feature: 2,
                threshold: 0.5,
                left: Box::new(TreeNode::Leaf { value: 1.0 }),
                right: Box::new(TreeNode::Leaf { value: -1.0 }),
            },
        };
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with(r#"{"type":"split","feature":2"#), "{s}");
        assert!(s.contains(r#"{"type":"leaf","value":1.0}"#));
        let back: RegressionTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(back.check().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unlimited_tree_memorizes_distinct_rows(
                pts in prop::collection::btree_map(-1000i32..1000, -5.0f64..=5.0, 2..60),
                f in 0usize..FEATURE_COUNT,
            ) {
                let x: Vec<_> = pts.keys().map(|&k| row(&[(f, k as f64 / 10.0)])).collect();
                let y: Vec<f64> = pts.values().copied().collect();
                let idx: Vec<_> = (0..x.len()).collect();
                let t = RegressionTree::fit(&x, &y, &idx, TreeParams::default(), &mut ChaCha8Rng::seed_from_u64(1));
                for (xi, yi) in x.iter().zip(&y) {
                    prop_assert_eq!(t.predict(xi), *yi);
                }
            }
        }
    }
}
