//! Entropy of the walk range: exact values by exhaustive enumeration at
//! small n, a boundary-count lower bound, a codec-length upper bound, and
//! the scaling experiments tying them together.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::codec::encode_range;
use crate::error::{Error, Result};
use crate::geometry::{inner_boundary, range_of, RangeSet};
use crate::rng::derive_stream;
use crate::stats::{mean_stderr, Estimate};
use crate::walk::{simulate_walk, LatticePoint};

/// Which side of the entropy an estimate sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BoundKind {
    Exact,
    LowerBound,
    UpperBound,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropyEstimate {
    /// Bits.
    pub value: f64,
    pub kind: BoundKind,
    pub d: usize,
    pub n: u64,
    /// Replica count, or the enumeration size for exact values.
    pub samples: u64,
    /// Zero for exact values.
    pub stderr: f64,
}

/// Default enumeration budget: `(2d)^n` must not exceed this.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 26;

/// Canonical serialization of a range: points sorted lexicographically,
/// coordinates flattened. Hashable identity for aggregation.
fn canonical_key(points: &mut Vec<LatticePoint>) -> Vec<i64> {
    points.sort();
    points.dedup();
    let mut key = Vec::with_capacity(points.len() * points[0].dim());
    for p in points.iter() {
        key.extend_from_slice(p.coords());
    }
    key
}

/// Enumerate all `(2d)^n` equiprobable trajectories and aggregate counts
/// per distinct range. Keys are canonical serializations.
pub fn enumerate_range_counts(d: usize, n: u64) -> HashMap<Vec<i64>, u64> {
    fn recurse(
        d: usize,
        remaining: u64,
        current: &mut LatticePoint,
        path: &mut Vec<LatticePoint>,
        counts: &mut HashMap<Vec<i64>, u64>,
    ) {
        if remaining == 0 {
            let mut pts = path.clone();
            *counts.entry(canonical_key(&mut pts)).or_insert(0) += 1;
            return;
        }
        for code in 0..2 * d as u8 {
            current.step(code);
            path.push(current.clone());
            recurse(d, remaining - 1, current, path, counts);
            path.pop();
            // Undo: flip the sign bit of the code.
            current.step(code ^ 1);
        }
    }
    let mut counts = HashMap::new();
    let mut current = LatticePoint::origin(d);
    let mut path = vec![current.clone()];
    recurse(d, n, &mut current, &mut path, &mut counts);
    counts
}

fn enumeration_size(d: usize, n: u64) -> u128 {
    (2 * d as u128).pow(n as u32)
}

/// Exact `H(R(n))` in bits by full enumeration.
pub fn exact_range_entropy(d: usize, n: u64, budget: u64) -> Result<EntropyEstimate> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let total = enumeration_size(d, n);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    let counts = enumerate_range_counts(d, n);
    let mass: u128 = counts.values().map(|&c| c as u128).sum();
    assert_eq!(mass, total, "enumeration must account for every trajectory");
    // H = log2(T) - (1/T) * sum c*log2(c), exact counts, doubles at the end.
    let t = total as f64;
    let mut acc = 0.0;
    for &c in counts.values() {
        acc += c as f64 * (c as f64).log2();
    }
    let value = t.log2() - acc / t;
    Ok(EntropyEstimate {
        value,
        kind: BoundKind::Exact,
        d,
        n,
        samples: total as u64,
        stderr: 0.0,
    })
}

/// Rebuild a `RangeSet` from a canonical key.
pub fn range_from_key(d: usize, key: &[i64]) -> RangeSet {
    RangeSet::from_points(d, key.chunks(d).map(|c| LatticePoint::new(c)))
}

/// Exact check of `p_n(A) <= (1 - 1/2d)^(|boundary(A)| - 1)` over every
/// range reachable by full enumeration. Returns (distinct ranges, violations).
/// The comparison is exact integer arithmetic: `c * (2d)^(b-1) <= (2d-1)^(b-1) * T`.
pub fn check_probability_bound(d: usize, n: u64, budget: u64) -> Result<(usize, usize)> {
    let total = enumeration_size(d, n);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    let counts = enumerate_range_counts(d, n);
    let base = 2 * d as u128;
    let mut violations = 0usize;
    for (key, &c) in &counts {
        let a = range_from_key(d, key);
        let b = inner_boundary(&a).len() as u32;
        debug_assert!(b >= 1);
        let lhs = c as u128 * base.pow(b - 1);
        let rhs = (base - 1).pow(b - 1) * total;
        if lhs > rhs {
            violations += 1;
        }
    }
    Ok((counts.len(), violations))
}

/// Lower bound from boundary sizes:
/// `-log2(1 - 1/2d) * (mean |boundary| - 1)` with propagated standard error.
pub fn boundary_lower_bound(d: usize, n: u64, samples: &[u64]) -> Result<EntropyEstimate> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("boundary_lower_bound needs >= 2 samples".into()));
    }
    let coeff = -(1.0 - 1.0 / (2.0 * d as f64)).log2();
    let values: Vec<f64> = samples.iter().map(|&s| s as f64).collect();
    let mean = mean_stderr(&values);
    Ok(EntropyEstimate {
        value: coeff * (mean.value - 1.0),
        kind: BoundKind::LowerBound,
        d,
        n,
        samples: samples.len() as u64,
        stderr: coeff * mean.stderr,
    })
}

/// Upper bound: mean payload length of the lossless codec over i.i.d.
/// replicas at a fixed (d=2, n). Samples are (payload bits, n) pairs.
pub fn codec_upper_bound(samples: &[(u64, u64)]) -> Result<EntropyEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples[0].1;
    if let Some(&(_, other)) = samples.iter().find(|&&(_, sn)| sn != n) {
        return Err(Error::MixedSampleLengths(n, other));
    }
    let values: Vec<f64> = samples.iter().map(|&(bits, _)| bits as f64).collect();
    let mean = mean_stderr(&values);
    Ok(EntropyEstimate {
        value: mean.value,
        kind: BoundKind::UpperBound,
        d: 2,
        n,
        samples: samples.len() as u64,
        stderr: mean.stderr,
    })
}

/// One grid point of the scaling experiment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingRow {
    pub n: u64,
    pub lower: EntropyEstimate,
    /// Mean code length; present only for d=2 where the codec applies.
    pub upper: Option<EntropyEstimate>,
    pub mean_boundary: Estimate,
    pub mean_range: Estimate,
    /// `lower * log2^2(n) / n` for d=2, `lower / n` for d>=3.
    pub normalized_lower: f64,
}

/// Monte Carlo scaling table over an n-grid.
pub fn scaling_experiment(
    d: usize,
    n_grid: &[u64],
    reps: u64,
    master_seed: u64,
) -> Result<Vec<ScalingRow>> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if reps < 30 {
        return Err(Error::InvalidArgument("scaling_experiment needs reps >= 30".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (row_idx, &n) in n_grid.iter().enumerate() {
        // Disjoint streams per (grid point, replica).
        let per_replica: Vec<(u64, u64, u64)> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = derive_stream(master_seed, ((row_idx as u64) << 32) | i);
                let traj = simulate_walk(d, n, &mut rng).expect("d >= 1");
                let r = range_of(&traj);
                let b = inner_boundary(&r).len() as u64;
                let bits = if d == 2 {
                    encode_range(&r, n).expect("walk range is valid").total_bits
                } else {
                    0
                };
                (b, r.len() as u64, bits)
            })
            .collect();
        let boundary_samples: Vec<u64> = per_replica.iter().map(|&(b, _, _)| b).collect();
        let range_values: Vec<f64> = per_replica.iter().map(|&(_, r, _)| r as f64).collect();
        let lower = boundary_lower_bound(d, n, &boundary_samples)?;
        let upper = if d == 2 {
            let bits: Vec<(u64, u64)> = per_replica.iter().map(|&(_, _, b)| (b, n)).collect();
            Some(codec_upper_bound(&bits)?)
        } else {
            None
        };
        let boundary_values: Vec<f64> = boundary_samples.iter().map(|&b| b as f64).collect();
        let log2n = (n as f64).log2();
        let normalized_lower = if d == 2 {
            lower.value * log2n * log2n / n as f64
        } else {
            lower.value / n as f64
        };
        rows.push(ScalingRow {
            n,
            lower,
            upper,
            mean_boundary: mean_stderr(&boundary_values),
            mean_range: mean_stderr(&range_values),
            normalized_lower,
        });
    }
    Ok(rows)
}
