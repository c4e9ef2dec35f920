//! Simple symmetric nearest-neighbor random walk on the d-dimensional
//! integer lattice, plus stopped runs (hitting / exit times).
//!
//! Direction codes are fixed as `2i = +e_i`, `2i+1 = -e_i` so that step
//! sequences serialize canonically.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{binomial_estimate, Estimate};

/// A point of `Z^d`. Up to four coordinates are stored inline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    coords: SmallVec<[i64; 4]>,
}

impl LatticePoint {
    pub fn new(coords: impl Into<SmallVec<[i64; 4]>>) -> Self {
        LatticePoint { coords: coords.into() }
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint { coords: SmallVec::from_elem(0, dim) }
    }

    pub fn xy(x: i64, y: i64) -> Self {
        LatticePoint::new([x, y].as_slice())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist2(&self, other: &LatticePoint) -> u128 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| {
                let d = (a - b) as i128;
                (d * d) as u128
            })
            .sum()
    }

    /// Squared Euclidean norm.
    pub fn norm2(&self) -> u128 {
        self.coords
            .iter()
            .map(|&a| {
                let a = a as i128;
                (a * a) as u128
            })
            .sum()
    }

    /// Apply one direction code in place.
    #[inline]
    pub fn step(&mut self, code: u8) {
        let axis = (code / 2) as usize;
        self.coords[axis] += if code % 2 == 0 { 1 } else { -1 };
    }

    /// The 2d lattice neighbors.
    pub fn neighbors(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..2 * self.dim() as u8).map(move |code| {
            let mut p = self.clone();
            p.step(code);
            p
        })
    }
}

/// A squared radius kept as an exact rational `num/den`, so hitting and
/// exit conditions compare integers and never hit floating-point ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadiusSq {
    num: u128,
    den: u128,
}

impl RadiusSq {
    pub fn from_radius(r: u64) -> Self {
        RadiusSq { num: (r as u128) * (r as u128), den: 1 }
    }

    /// The squared radius `num/den` directly.
    pub fn from_squared_ratio(num: u128, den: u128) -> Self {
        assert!(den > 0);
        RadiusSq { num, den }
    }

    /// `dist2 <= r^2` exactly.
    #[inline]
    pub fn contains(&self, dist2: u128) -> bool {
        dist2 * self.den <= self.num
    }

    /// `dist2 >= r^2` exactly.
    #[inline]
    pub fn reached_or_passed(&self, dist2: u128) -> bool {
        dist2 * self.den >= self.num
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// An origin-anchored nearest-neighbor path, stored as direction codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    dim: usize,
    steps: Vec<u8>,
}

impl Trajectory {
    pub fn from_steps(dim: usize, steps: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(&bad) = steps.iter().find(|&&c| c as usize >= 2 * dim) {
            return Err(Error::InvalidArgument(format!(
                "direction code {bad} out of range for d={dim}"
            )));
        }
        Ok(Trajectory { dim, steps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[u8] {
        &self.steps
    }

    /// All points `S(0), ..., S(n)` in order.
    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let mut current = LatticePoint::origin(self.dim);
        std::iter::once(current.clone()).chain(self.steps.iter().map(move |&code| {
            current.step(code);
            current.clone()
        }))
    }
}

/// Draw one uniform direction code for dimension `d`.
#[inline]
pub fn draw_direction(d: usize, rng: &mut RngStream) -> u8 {
    rng.next_below(2 * d as u64) as u8
}

/// Simulate an `n`-step walk; each step uniform over the 2d directions.
pub fn simulate_walk(d: usize, n: u64, rng: &mut RngStream) -> Result<Trajectory> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut steps = Vec::with_capacity(n as usize);
    for _ in 0..n {
        steps.push(draw_direction(d, rng));
    }
    Ok(Trajectory { dim: d, steps })
}

/// Stop condition for [`run_until`].
#[derive(Debug, Clone)]
pub enum StopSpec {
    /// First time `||S(t) - z|| <= r`.
    HitBall { center: LatticePoint, r2: RadiusSq },
    /// First time `||S(t) - z|| >= r`.
    ExitBall { center: LatticePoint, r2: RadiusSq },
    /// First time `S(t) = z`.
    HitPoint { point: LatticePoint },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopKind {
    Hit,
    Exit,
    Timecap,
}

/// Where and when a stopped run terminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingOutcome {
    pub kind: StopKind,
    pub time: u64,
    pub terminal_point: LatticePoint,
}

/// Walk from the origin until `stop` first holds or `cap` steps elapse.
///
/// The condition is checked at `t = 0` before any step, matching the
/// convention `T = inf { t >= 0 : ... }`.
pub fn run_until(d: usize, rng: &mut RngStream, stop: &StopSpec, cap: u64) -> Result<StoppingOutcome> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let kind = match stop {
        StopSpec::HitBall { .. } | StopSpec::HitPoint { .. } => StopKind::Hit,
        StopSpec::ExitBall { .. } => StopKind::Exit,
    };
    let mut p = LatticePoint::origin(d);
    let mut t = 0u64;
    loop {
        let fired = match stop {
            StopSpec::HitBall { center, r2 } => r2.contains(p.dist2(center)),
            StopSpec::ExitBall { center, r2 } => r2.reached_or_passed(p.dist2(center)),
            StopSpec::HitPoint { point } => p == *point,
        };
        if fired {
            return Ok(StoppingOutcome { kind, time: t, terminal_point: p });
        }
        if t == cap {
            return Ok(StoppingOutcome { kind: StopKind::Timecap, time: t, terminal_point: p });
        }
        p.step(draw_direction(d, rng));
        t += 1;
    }
}

/// Monte Carlo estimate of `Pr[max_{1<=j<=n} ||S(j)|| >= lambda]` for d = 2.
pub fn tail_displacement_probability(
    n: u64,
    lambda: f64,
    reps: u64,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let lambda2 = lambda * lambda;
    let mut hits = 0u64;
    for _ in 0..reps {
        if lambda <= 0.0 {
            hits += 1;
            continue;
        }
        let (mut x, mut y) = (0i64, 0i64);
        for _ in 0..n {
            match draw_direction(2, rng) {
                0 => x += 1,
                1 => x -= 1,
                2 => y += 1,
                _ => y -= 1,
            }
            if (x * x + y * y) as f64 >= lambda2 {
                hits += 1;
                break;
            }
        }
    }
    Ok(binomial_estimate(hits, reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn rejects_dimension_zero() {
        let mut rng = derive_stream(1, 0);
        assert!(matches!(simulate_walk(0, 5, &mut rng), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn zero_steps_is_just_the_origin() {
        let mut rng = derive_stream(1, 0);
        let traj = simulate_walk(2, 0, &mut rng).unwrap();
        let pts: Vec<_> = traj.points().collect();
        assert_eq!(pts, vec![LatticePoint::origin(2)]);
    }

    #[test]
    fn consecutive_points_are_lattice_neighbors() {
        let mut rng = derive_stream(3, 1);
        let traj = simulate_walk(3, 500, &mut rng).unwrap();
        let pts: Vec<_> = traj.points().collect();
        for w in pts.windows(2) {
            let diff: Vec<i64> = w[0]
                .coords()
                .iter()
                .zip(w[1].coords())
                .map(|(a, b)| (a - b).abs())
                .collect();
            assert_eq!(diff.iter().sum::<i64>(), 1);
        }
    }

    #[test]
    fn walk_is_reproducible() {
        let a = simulate_walk(2, 1000, &mut derive_stream(9, 4)).unwrap();
        let b = simulate_walk(2, 1000, &mut derive_stream(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn d1_step_frequency_within_3_sigma() {
        let mut rng = derive_stream(11, 0);
        let n = 1_000_000u64;
        let traj = simulate_walk(1, n, &mut rng).unwrap();
        let plus = traj.steps().iter().filter(|&&c| c == 0).count() as f64;
        let p = plus / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn hit_ball_at_origin_stops_immediately() {
        let mut rng = derive_stream(1, 0);
        let stop = StopSpec::HitBall {
            center: LatticePoint::origin(2),
            r2: RadiusSq::from_radius(5),
        };
        let out = run_until(2, &mut rng, &stop, 100).unwrap();
        assert_eq!(out.kind, StopKind::Hit);
        assert_eq!(out.time, 0);
    }

    #[test]
    fn exit_ball_radius_zero_stops_immediately() {
        let mut rng = derive_stream(1, 0);
        let stop = StopSpec::ExitBall {
            center: LatticePoint::origin(2),
            r2: RadiusSq::from_radius(0),
        };
        let out = run_until(2, &mut rng, &stop, 100).unwrap();
        assert_eq!(out.kind, StopKind::Exit);
        assert_eq!(out.time, 0);
    }

    #[test]
    fn mean_exit_time_bounded_by_r_plus_one_squared() {
        // E_0[tau_R] <= (R+1)^2; check the sample mean at 3 sigma.
        let r = 10u64;
        let reps = 1000;
        let mut times = Vec::with_capacity(reps);
        for i in 0..reps {
            let mut rng = derive_stream(77, i as u64);
            let stop = StopSpec::ExitBall {
                center: LatticePoint::origin(2),
                r2: RadiusSq::from_radius(r),
            };
            let out = run_until(2, &mut rng, &stop, u64::MAX).unwrap();
            assert_eq!(out.kind, StopKind::Exit);
            times.push(out.time as f64);
        }
        let est = crate::stats::mean_stderr(&times);
        let bound = ((r + 1) * (r + 1)) as f64;
        assert!(est.value <= bound + 3.0 * est.stderr, "mean {} vs bound {}", est.value, bound);
    }

    #[test]
    fn run_until_hit_point_matches_scan_of_simulate_walk() {
        // Same rng consumption order: both draw one direction per step.
        let target = LatticePoint::xy(2, 1);
        for seed in 0..100u64 {
            let cap = 300u64;
            let mut rng_a = derive_stream(1234, seed);
            let stop = StopSpec::HitPoint { point: target.clone() };
            let out = run_until(2, &mut rng_a, &stop, cap).unwrap();

            let mut rng_b = derive_stream(1234, seed);
            let traj = simulate_walk(2, cap, &mut rng_b).unwrap();
            let scan = traj.points().position(|p| p == target);
            match scan {
                Some(t) => {
                    assert_eq!(out.kind, StopKind::Hit);
                    assert_eq!(out.time, t as u64);
                }
                None => assert_eq!(out.kind, StopKind::Timecap),
            }
        }
    }

    #[test]
    fn tail_displacement_edge_cases() {
        let mut rng = derive_stream(5, 0);
        let est = tail_displacement_probability(16, 0.0, 100, &mut rng).unwrap();
        assert_eq!(est.value, 1.0);
        let est = tail_displacement_probability(16, 17.0, 100, &mut rng).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(tail_displacement_probability(16, 1.0, 0, &mut rng).is_err());
    }
}
