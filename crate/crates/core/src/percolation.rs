//! Fractal percolation on a 2^L x 2^L square: quadtree sampling with
//! level-k retention probability k/(k+1), exact decision-tree entropy, and
//! intersection tests against the walk range.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_stream, RngStream};
use crate::stats::binomial_estimate;
use crate::walk::draw_direction;

/// One examined retention flag of the quadtree.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub level: u32,
    /// Cell coordinates of the dyadic square at this level (row-major
    /// child order: (2x, 2y), (2x+1, 2y), (2x, 2y+1), (2x+1, 2y+1)).
    pub x: u64,
    pub y: u64,
    pub kept: bool,
}

#[derive(Debug, Clone)]
pub struct PercolationTree {
    depth: u32,
    decisions: Vec<Decision>,
    leaves: Vec<(u64, u64)>,
}

impl PercolationTree {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Side length of the ambient square.
    pub fn side(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// Retained unit cells at the deepest level; their union is the
    /// sampled set.
    pub fn leaves(&self) -> &[(u64, u64)] {
        &self.leaves
    }

    /// Retained squares at level `k` (side 2^(L-k)), as cell coordinates.
    pub fn retained_at_level(&self, k: u32) -> Vec<(u64, u64)> {
        if k == 0 {
            return vec![(0, 0)];
        }
        self.decisions
            .iter()
            .filter(|d| d.level == k && d.kept)
            .map(|d| (d.x, d.y))
            .collect()
    }
}

/// Exact Bernoulli(k/(k+1)) draw from one `next_below` call.
#[inline]
fn keep_flag(level: u32, rng: &mut RngStream) -> bool {
    let k = level as u64;
    rng.next_below(k + 1) < k
}

/// Sample the quadtree level by level. Children of retained level-(k-1)
/// squares are examined in row-major order with keep probability k/(k+1);
/// unexamined flags (under dropped parents) consume no randomness.
pub fn sample_fractal(depth: u32, rng: &mut RngStream) -> Result<PercolationTree> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let mut decisions = Vec::new();
    let mut frontier: Vec<(u64, u64)> = vec![(0, 0)];
    for level in 1..=depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &(px, py) in &frontier {
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (x, y) = (2 * px + dx, 2 * py + dy);
                let kept = keep_flag(level, rng);
                decisions.push(Decision { level, x, y, kept });
                if kept {
                    next.push((x, y));
                }
            }
        }
        frontier = next;
    }
    Ok(PercolationTree { depth, decisions, leaves: frontier })
}

/// -log2 of the probability of exactly this tree, summed over examined
/// flags.
pub fn tree_log_prob(t: &PercolationTree) -> f64 {
    let mut bits = 0.0f64;
    for d in &t.decisions {
        let k = d.level as f64;
        let p = k / (k + 1.0);
        bits -= if d.kept { p.log2() } else { (1.0 - p).log2() };
    }
    bits
}

/// Binary entropy in bits.
fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Exact entropy of the decision tree:
/// `H(L) = sum_{k=1}^{L} (4^k / k) * h(k/(k+1))`,
/// since the expected number of examined flags at level k is
/// `4 * E[N_{k-1}] = 4 * 4^(k-1)/k`.
pub fn exact_tree_entropy(depth: u32) -> f64 {
    assert!(depth >= 1);
    (1..=depth)
        .map(|k| {
            let kf = k as f64;
            4.0f64.powi(k as i32) / kf * h2(kf / (kf + 1.0))
        })
        .sum()
}

/// Axis-aligned target set inside the n x n square, in cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSet {
    Point { x: u64, y: u64 },
    /// Cells within squared Euclidean distance r^2 of (x, y).
    Ball { x: u64, y: u64, r: u64 },
    /// Inclusive cell rectangle.
    Rect { x0: u64, y0: u64, x1: u64, y1: u64 },
}

impl TargetSet {
    /// Parse `point(x,y) | ball(x,y,r) | rect(x0,y0,x1,y1)`.
    pub fn parse(s: &str) -> Result<TargetSet> {
        let s = s.trim();
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::InvalidArgument(format!("bad target set '{s}'")))?;
        let rest = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::InvalidArgument(format!("bad target set '{s}'")))?;
        let nums: Vec<u64> = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad target set '{s}'")))
            })
            .collect::<Result<_>>()?;
        match (name.trim(), nums.as_slice()) {
            ("point", [x, y]) => Ok(TargetSet::Point { x: *x, y: *y }),
            ("ball", [x, y, r]) => Ok(TargetSet::Ball { x: *x, y: *y, r: *r }),
            ("rect", [x0, y0, x1, y1]) if x0 <= x1 && y0 <= y1 => {
                Ok(TargetSet::Rect { x0: *x0, y0: *y0, x1: *x1, y1: *y1 })
            }
            _ => Err(Error::InvalidArgument(format!("bad target set '{s}'"))),
        }
    }

    pub fn contains(&self, cx: u64, cy: u64) -> bool {
        match *self {
            TargetSet::Point { x, y } => cx == x && cy == y,
            TargetSet::Ball { x, y, r } => {
                let dx = cx.abs_diff(x);
                let dy = cy.abs_diff(y);
                dx * dx + dy * dy <= r * r
            }
            TargetSet::Rect { x0, y0, x1, y1 } => {
                (x0..=x1).contains(&cx) && (y0..=y1).contains(&cy)
            }
        }
    }

    /// Bounding cell rectangle, clipped to the n x n square.
    fn clipped_bbox(&self, side: u64) -> Option<(u64, u64, u64, u64)> {
        let (x0, y0, x1, y1) = match *self {
            TargetSet::Point { x, y } => (x, y, x, y),
            TargetSet::Ball { x, y, r } => {
                (x.saturating_sub(r), y.saturating_sub(r), x + r, y + r)
            }
            TargetSet::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        };
        if x0 >= side || y0 >= side {
            return None;
        }
        Some((x0, y0, x1.min(side - 1), y1.min(side - 1)))
    }

    /// True when at least one cell of the n x n square lies in the set.
    pub fn is_nonempty_within(&self, side: u64) -> bool {
        let Some((x0, y0, x1, y1)) = self.clipped_bbox(side) else {
            return false;
        };
        for x in x0..=x1 {
            for y in y0..=y1 {
                if self.contains(x, y) {
                    return true;
                }
            }
        }
        false
    }

    fn meets_tree(&self, t: &PercolationTree) -> bool {
        t.leaves().iter().any(|&(x, y)| self.contains(x, y))
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IntersectionReport {
    pub depth: u32,
    pub reps: u64,
    pub p_fractal: f64,
    pub p_fractal_stderr: f64,
    pub p_walk: f64,
    pub p_walk_stderr: f64,
    /// p_fractal / p_walk; None when either estimate is zero.
    pub ratio: Option<f64>,
    /// Delta-method standard error of the ratio.
    pub ratio_stderr: Option<f64>,
}

/// Monte Carlo comparison of Pr[Q meets A] against Pr[R(n^2) meets A],
/// where the walk takes n^2 steps from the center cell of the n x n
/// square (n = 2^depth). Fractal replicas use even stream ids, walk
/// replicas odd ones.
pub fn intersection_ratio(
    target: TargetSet,
    depth: u32,
    reps: u64,
    master_seed: u64,
) -> Result<IntersectionReport> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    if reps < 1000 {
        return Err(Error::InvalidArgument("reps must be >= 1000".into()));
    }
    let side = 1u64 << depth;
    if !target.is_nonempty_within(side) {
        return Err(Error::InvalidArgument(
            "target set is empty within the square".into(),
        ));
    }

    let fractal_hits: u64 = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, 2 * i);
            let t = sample_fractal(depth, &mut rng).expect("depth >= 1");
            target.meets_tree(&t) as u64
        })
        .sum();

    let steps = side * side;
    let center = (side / 2) as i64;
    let walk_hits: u64 = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, 2 * i + 1);
            let (mut x, mut y) = (center, center);
            let in_target = |x: i64, y: i64| {
                x >= 0 && y >= 0 && target.contains(x as u64, y as u64)
            };
            if in_target(x, y) {
                return 1;
            }
            for _ in 0..steps {
                match draw_direction(2, &mut rng) {
                    0 => x += 1,
                    1 => x -= 1,
                    2 => y += 1,
                    _ => y -= 1,
                }
                if in_target(x, y) {
                    return 1;
                }
            }
            0
        })
        .sum();

    let pf = binomial_estimate(fractal_hits, reps);
    let pw = binomial_estimate(walk_hits, reps);
    let (ratio, ratio_stderr) = if pf.value > 0.0 && pw.value > 0.0 {
        let r = pf.value / pw.value;
        // Delta method for a ratio of independent estimates.
        let rel2 = (pf.stderr / pf.value).powi(2) + (pw.stderr / pw.value).powi(2);
        (Some(r), Some(r * rel2.sqrt()))
    } else {
        (None, None)
    };
    Ok(IntersectionReport {
        depth,
        reps,
        p_fractal: pf.value,
        p_fractal_stderr: pf.stderr,
        p_walk: pw.value,
        p_walk_stderr: pw.stderr,
        ratio,
        ratio_stderr,
    })
}
