use alloc::vec;
use alloc::vec::Vec;

use super::MeasuredReebTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MedianLocation {
    Node(usize),
    Arc { arc: usize, level: f64 },
}

/// The point of the tree splitting the measure into halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianPoint {
    pub location: MedianLocation,
    /// Value of the function at the median.
    pub value: f64,
    /// Largest measure of a component of the tree minus the median.
    pub max_component: f64,
}

/// Measure of each subtree hanging below a node (node atom included) when
/// the tree is rooted at its root.
fn subtree_measures(tree: &MeasuredReebTree) -> Vec<f64> {
    let nodes = tree.nodes();
    let mut sub: Vec<f64> = nodes.iter().map(|n| n.atom).collect();
    for &v in tree.preorder().iter().rev() {
        if let Some(e) = tree.parent_arc(v) {
            let p = tree.other_end(e, v);
            sub[p] += sub[v] + tree.arcs()[e].measure();
        }
    }
    sub
}

/// Measure on the child side of the point at `level` on `arc`.
fn child_side(tree: &MeasuredReebTree, sub: &[f64], arc: usize, level: f64) -> f64 {
    let a = &tree.arcs()[arc];
    let w = tree.child(arc);
    let part = if w == a.hi {
        a.measure() - a.cumulative(level)
    } else {
        a.cumulative(level)
    };
    sub[w] + part
}

fn node_components(tree: &MeasuredReebTree, sub: &[f64], v: usize) -> f64 {
    let total = tree.total_measure();
    let mut worst: f64 = 0.0;
    for &e in tree.incident(v) {
        let m = if tree.parent_arc(v) == Some(e) {
            total - sub[v]
        } else {
            let w = tree.other_end(e, v);
            sub[w] + tree.arcs()[e].measure()
        };
        worst = worst.max(m);
    }
    worst
}

/// Unique point whose complementary components all carry at most half of
/// the total measure. The defining inequality is checked against every node
/// and every slab level of every arc before returning.
pub fn find_median(tree: &MeasuredReebTree) -> Result<MedianPoint> {
    let total = tree.total_measure();
    if !(total > 0.0) {
        return Err(Error::Degenerate("tree carries no measure".into()));
    }
    let half = 0.5 * total;
    let sub = subtree_measures(tree);
    let mut v = tree.root();
    let location = loop {
        let heavy = tree.incident(v).iter().copied().find(|&e| {
            tree.parent_arc(v) != Some(e)
                && sub[tree.other_end(e, v)] + tree.arcs()[e].measure() > half
        });
        let Some(e) = heavy else {
            break MedianLocation::Node(v);
        };
        let w = tree.other_end(e, v);
        if sub[w] >= half {
            v = w;
            continue;
        }
        let arc = &tree.arcs()[e];
        let target = if w == arc.hi {
            sub[w] + arc.measure() - half
        } else {
            half - sub[w]
        };
        break MedianLocation::Arc {
            arc: e,
            level: arc.level_for(target),
        };
    };

    let (value, max_component) = match location {
        MedianLocation::Node(v) => (tree.nodes()[v].value, node_components(tree, &sub, v)),
        MedianLocation::Arc { arc, level } => {
            let c = child_side(tree, &sub, arc, level);
            (level, c.max(total - c))
        }
    };
    verify(tree, &sub, max_component, location)?;
    Ok(MedianPoint {
        location,
        value,
        max_component,
    })
}

fn verify(
    tree: &MeasuredReebTree,
    sub: &[f64],
    achieved: f64,
    location: MedianLocation,
) -> Result<()> {
    let total = tree.total_measure();
    let half = 0.5 * total;
    let tol = 1e-9 * total;
    // the arc solve is exact up to the bisection floor of the interpolant
    let arc_tol = 1e-6 * total;
    let own_tol = if matches!(location, MedianLocation::Arc { .. }) {
        arc_tol
    } else {
        tol
    };
    if achieved > half + own_tol {
        return Err(Error::MedianVerification {
            component: achieved,
            bound: half,
        });
    }
    for v in 0..tree.nodes().len() {
        if location == MedianLocation::Node(v) {
            continue;
        }
        let worst = node_components(tree, sub, v);
        if worst < achieved - own_tol - tol {
            return Err(Error::MedianVerification {
                component: worst,
                bound: achieved,
            });
        }
    }
    // a point inside an arc always leaves a component of at least half the
    // measure, so slab points can only tie with an arc median
    let mut levels = vec![];
    for (e, arc) in tree.arcs().iter().enumerate() {
        let n = arc.table().len();
        let (lo, hi) = arc.levels();
        levels.clear();
        levels.extend((1..n.saturating_sub(1)).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64));
        for &l in &levels {
            let c = child_side(tree, sub, e, l);
            let worst = c.max(total - c);
            if worst < achieved - own_tol - tol {
                return Err(Error::MedianVerification {
                    component: worst,
                    bound: achieved,
                });
            }
        }
    }
    Ok(())
}
