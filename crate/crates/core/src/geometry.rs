//! Range sets, inner boundaries, the triadic box tilings, indicator
//! vectors over the `[-2n, 2n]^2` window, and complement-component
//! labeling used to rebuild a range from its boundary.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::walk::{LatticePoint, Trajectory};

/// Finite set of visited lattice points with O(1) membership.
#[derive(Debug, Clone)]
pub struct RangeSet {
    dim: usize,
    points: HashSet<LatticePoint>,
    bbox: Option<(Vec<i64>, Vec<i64>)>,
}

impl RangeSet {
    pub fn new(dim: usize) -> Self {
        RangeSet { dim, points: HashSet::new(), bbox: None }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = LatticePoint>) -> Self {
        let mut set = RangeSet::new(dim);
        for p in points {
            set.insert(p);
        }
        set
    }

    pub fn insert(&mut self, p: LatticePoint) {
        debug_assert_eq!(p.dim(), self.dim);
        match &mut self.bbox {
            None => {
                self.bbox = Some((p.coords().to_vec(), p.coords().to_vec()));
            }
            Some((lo, hi)) => {
                for (i, &c) in p.coords().iter().enumerate() {
                    lo[i] = lo[i].min(c);
                    hi[i] = hi[i].max(c);
                }
            }
        }
        self.points.insert(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatticePoint> {
        self.points.iter()
    }

    /// Componentwise (min, max) over all points.
    pub fn bbox(&self) -> Option<(&[i64], &[i64])> {
        self.bbox.as_ref().map(|(lo, hi)| (lo.as_slice(), hi.as_slice()))
    }

    /// The points as `(x, y)` pairs; panics unless `dim == 2`.
    pub fn xy_set(&self) -> HashSet<(i64, i64)> {
        assert_eq!(self.dim, 2, "xy_set requires a two-dimensional range");
        self.points.iter().map(|p| (p.coords()[0], p.coords()[1])).collect()
    }
}

/// The set of distinct points visited by a trajectory.
pub fn range_of(traj: &Trajectory) -> RangeSet {
    let mut set = RangeSet::new(traj.dim());
    for p in traj.points() {
        set.insert(p);
    }
    set
}

/// Points of `a` with at least one lattice neighbor outside `a`.
pub fn inner_boundary(a: &RangeSet) -> RangeSet {
    let mut boundary = RangeSet::new(a.dim());
    for p in a.iter() {
        if p.neighbors().any(|q| !a.contains(&q)) {
            boundary.insert(p.clone());
        }
    }
    boundary
}

/// Triadic scale schedule: `k_0 = 0`, `k_{j+1} = 3 k_j + 1`, stopping at
/// the first scale exceeding `n`. Box side lengths are `2 k_j + 1 = 3^j`.
pub fn scale_schedule(n: u64) -> Vec<u64> {
    let mut ks = vec![0u64];
    while *ks.last().unwrap() <= n {
        let k = ks.last().unwrap();
        ks.push(3 * k + 1);
    }
    ks
}

/// Map a coordinate to the index of its scale-k tile. Tile `a` covers
/// `[(2k+1)a - k, (2k+1)a + k]`.
#[inline]
pub fn tile_index(coord: i64, k: i64) -> i64 {
    (coord + k).div_euclid(2 * k + 1)
}

/// The active boxes of the scale-k tiling inside `[-2n, 2n]^2`: the
/// indicator vector of which boxes meet a given boundary set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileIndicator {
    pub k: u64,
    pub n: u64,
    /// Active box centers `(2k+1) * z`, ordered by (x, y).
    pub active: BTreeSet<(i64, i64)>,
}

impl TileIndicator {
    /// `M(k, n)` restricted to the window.
    pub fn count(&self) -> usize {
        self.active.len()
    }
}

pub fn tile_indicator(boundary: &RangeSet, k: u64, n: u64) -> Result<TileIndicator> {
    if boundary.dim() != 2 {
        return Err(Error::InvalidDimension(boundary.dim()));
    }
    let ki = k as i64;
    let side = 2 * ki + 1;
    let window = 2 * n as i64;
    let mut active = BTreeSet::new();
    for p in boundary.iter() {
        let (x, y) = (p.coords()[0], p.coords()[1]);
        if x.abs() > n as i64 || y.abs() > n as i64 {
            return Err(Error::PointOutsideWindow { point: p.coords().to_vec(), n });
        }
        let cx = tile_index(x, ki) * side;
        let cy = tile_index(y, ki) * side;
        if cx.abs() <= window && cy.abs() <= window {
            active.insert((cx, cy));
        }
    }
    Ok(TileIndicator { k, n, active })
}

/// Inclusive axis-aligned window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn on_frame(&self, x: i64, y: i64) -> bool {
        x == self.x0 || x == self.x1 || y == self.y0 || y == self.y1
    }
}

/// One 4-connected component of `window \ boundary`.
#[derive(Debug, Clone)]
pub struct Component {
    /// Cells in discovery order; `cells[0]` is the lexicographic minimum.
    pub cells: Vec<(i64, i64)>,
    /// True when the component touches the window frame.
    pub infinite: bool,
}

/// Partition of a window minus a boundary set into 4-connected components.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    pub components: Vec<Component>,
}

/// Label the 4-connected components of `window \ boundary`. Components
/// touching the window frame are flagged infinite. The window must
/// contain the boundary's bounding box with margin >= 1.
pub fn complement_components(boundary: &RangeSet, window: Rect) -> Result<ComponentLabeling> {
    if boundary.dim() != 2 {
        return Err(Error::InvalidDimension(boundary.dim()));
    }
    if let Some((lo, hi)) = boundary.bbox() {
        if lo[0] <= window.x0 || lo[1] <= window.y0 || hi[0] >= window.x1 || hi[1] >= window.y1 {
            return Err(Error::InvalidArgument(
                "window must contain the boundary bbox with margin >= 1".into(),
            ));
        }
    }
    let bset = boundary.xy_set();
    Ok(label_components(&bset, window))
}

fn label_components(boundary: &HashSet<(i64, i64)>, window: Rect) -> ComponentLabeling {
    let width = (window.x1 - window.x0 + 1) as usize;
    let height = (window.y1 - window.y0 + 1) as usize;
    let idx = |x: i64, y: i64| (x - window.x0) as usize * height + (y - window.y0) as usize;
    let mut visited = vec![false; width * height];
    for &(x, y) in boundary {
        if window.contains(x, y) {
            visited[idx(x, y)] = true;
        }
    }
    let mut components = Vec::new();
    let mut queue = Vec::new();
    // Lexicographic (x, y) scan, so each BFS starts at its component's
    // lexicographic minimum.
    for x in window.x0..=window.x1 {
        for y in window.y0..=window.y1 {
            if visited[idx(x, y)] {
                continue;
            }
            visited[idx(x, y)] = true;
            queue.clear();
            queue.push((x, y));
            let mut cells = Vec::new();
            let mut infinite = false;
            let mut head = 0;
            while head < queue.len() {
                let (cx, cy) = queue[head];
                head += 1;
                cells.push((cx, cy));
                if window.on_frame(cx, cy) {
                    infinite = true;
                }
                for (nx, ny) in [(cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)] {
                    if window.contains(nx, ny) && !visited[idx(nx, ny)] {
                        visited[idx(nx, ny)] = true;
                        queue.push((nx, ny));
                    }
                }
            }
            components.push(Component { cells, infinite });
        }
    }
    ComponentLabeling { components }
}

/// Finite complement components of a d=2 boundary set, ordered by their
/// lexicographically minimal cell.
///
/// Labeling runs over the boundary bbox plus a one-cell margin: every
/// finite component of `[-n-1, n+1]^2 \ boundary` is enclosed by boundary
/// cells, hence lies inside the bbox, and everything outside the bbox
/// belongs to the single infinite component.
pub fn finite_components(boundary: &HashSet<(i64, i64)>) -> Vec<Vec<(i64, i64)>> {
    if boundary.is_empty() {
        return Vec::new();
    }
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &(x, y) in boundary {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let window = Rect::new(x0 - 1, y0 - 1, x1 + 1, y1 + 1);
    let labeling = label_components(boundary, window);
    let mut finite: Vec<Vec<(i64, i64)>> = labeling
        .components
        .into_iter()
        .filter(|c| !c.infinite)
        .map(|c| c.cells)
        .collect();
    finite.sort_by_key(|cells| cells[0]);
    finite
}

/// Count of points grouped by boundary-size, used by enumeration checks.
pub fn boundary_size(a: &RangeSet) -> usize {
    inner_boundary(a).len()
}

/// Map each point of a d=2 set to its scale-k tile center.
pub fn active_centers(points: &HashSet<(i64, i64)>, k: i64) -> BTreeSet<(i64, i64)> {
    let side = 2 * k + 1;
    points
        .iter()
        .map(|&(x, y)| (tile_index(x, k) * side, tile_index(y, k) * side))
        .collect()
}

/// Aggregate map from tile center to how many points fall in the tile.
pub fn center_histogram(points: &HashSet<(i64, i64)>, k: i64) -> HashMap<(i64, i64), u64> {
    let side = 2 * k + 1;
    let mut map = HashMap::new();
    for &(x, y) in points {
        *map.entry((tile_index(x, k) * side, tile_index(y, k) * side)).or_insert(0) += 1;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::walk::simulate_walk;

    fn traj_1d(steps: &[u8]) -> Trajectory {
        Trajectory::from_steps(1, steps.to_vec()).unwrap()
    }

    #[test]
    fn range_of_zero_steps() {
        let traj = Trajectory::from_steps(2, vec![]).unwrap();
        let r = range_of(&traj);
        assert_eq!(r.len(), 1);
        assert!(r.contains(&LatticePoint::origin(2)));
    }

    #[test]
    fn range_of_d1_paths() {
        // +1, +1 visits {0, 1, 2}
        let r = range_of(&traj_1d(&[0, 0]));
        assert_eq!(r.len(), 3);
        // +1, -1 revisits: {0, 1}
        let r = range_of(&traj_1d(&[0, 1]));
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn inner_boundary_singleton_is_itself() {
        let a = RangeSet::from_points(2, [LatticePoint::origin(2)]);
        let b = inner_boundary(&a);
        assert_eq!(b.len(), 1);
        assert!(b.contains(&LatticePoint::origin(2)));
    }

    #[test]
    fn inner_boundary_of_3x3_square_is_the_ring() {
        let mut a = RangeSet::new(2);
        for x in -1..=1 {
            for y in -1..=1 {
                a.insert(LatticePoint::xy(x, y));
            }
        }
        let b = inner_boundary(&a);
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&LatticePoint::origin(2)));
    }

    #[test]
    fn inner_boundary_of_segment_is_whole_segment() {
        let a = RangeSet::from_points(2, (0..=5).map(|i| LatticePoint::xy(i, 0)));
        let b = inner_boundary(&a);
        assert_eq!(b.len(), 6);
    }

    #[test]
    fn boundary_is_subset_of_set() {
        let traj = simulate_walk(2, 2000, &mut derive_stream(4, 0)).unwrap();
        let r = range_of(&traj);
        let b = inner_boundary(&r);
        assert!(b.iter().all(|p| r.contains(p)));
        assert!(!b.is_empty());
    }

    #[test]
    fn schedule_values() {
        assert_eq!(scale_schedule(0), vec![0, 1]);
        assert_eq!(scale_schedule(10), vec![0, 1, 4, 13]);
        assert_eq!(scale_schedule(100), vec![0, 1, 4, 13, 40, 121]);
    }

    #[test]
    fn schedule_side_lengths_are_powers_of_three() {
        for (j, k) in scale_schedule(1 << 16).iter().enumerate() {
            assert_eq!(2 * k + 1, 3u64.pow(j as u32));
        }
    }

    #[test]
    fn tile_indicator_singleton() {
        let b = RangeSet::from_points(2, [LatticePoint::origin(2)]);
        for k in [0u64, 4] {
            let ti = tile_indicator(&b, k, 8).unwrap();
            assert_eq!(ti.count(), 1);
            assert!(ti.active.contains(&(0, 0)));
        }
    }

    #[test]
    fn tile_indicator_at_scale_zero_is_the_boundary() {
        let traj = simulate_walk(2, 500, &mut derive_stream(6, 1)).unwrap();
        let b = inner_boundary(&range_of(&traj));
        let ti = tile_indicator(&b, 0, 500).unwrap();
        assert_eq!(ti.count(), b.len());
    }

    #[test]
    fn tile_indicator_rejects_out_of_window_boundary() {
        let b = RangeSet::from_points(2, [LatticePoint::xy(5, 0)]);
        assert!(tile_indicator(&b, 1, 4).is_err());
    }

    #[test]
    fn indicator_monotone_under_box_nesting() {
        // If Q(z,k) is contained in Q(z',k') then activity propagates up.
        let traj = simulate_walk(2, 4096, &mut derive_stream(8, 2)).unwrap();
        let b = inner_boundary(&range_of(&traj));
        let schedule = scale_schedule(4096);
        let bset = b.xy_set();
        for w in schedule.windows(2) {
            let (k, kp) = (w[0] as i64, w[1] as i64);
            let fine = active_centers(&bset, k);
            let coarse = active_centers(&bset, kp);
            for &(cx, cy) in &fine {
                let parent =
                    (tile_index(cx, kp) * (2 * kp + 1), tile_index(cy, kp) * (2 * kp + 1));
                assert!(coarse.contains(&parent));
            }
        }
    }

    #[test]
    fn components_of_ring() {
        let mut b = RangeSet::new(2);
        for x in -1i64..=1 {
            for y in -1i64..=1 {
                if x != 0 || y != 0 {
                    b.insert(LatticePoint::xy(x, y));
                }
            }
        }
        let labeling = complement_components(&b, Rect::new(-4, -4, 4, 4)).unwrap();
        assert_eq!(labeling.components.len(), 2);
        let finite: Vec<_> = labeling.components.iter().filter(|c| !c.infinite).collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(finite[0].cells, vec![(0, 0)]);
    }

    #[test]
    fn components_of_singleton_boundary() {
        let b = RangeSet::from_points(2, [LatticePoint::origin(2)]);
        let labeling = complement_components(&b, Rect::new(-3, -3, 3, 3)).unwrap();
        assert_eq!(labeling.components.len(), 1);
        assert!(labeling.components[0].infinite);
    }

    #[test]
    fn components_partition_the_window() {
        let traj = simulate_walk(2, 10_000, &mut derive_stream(10, 5)).unwrap();
        let b = inner_boundary(&range_of(&traj));
        let (lo, hi) = b.bbox().unwrap();
        let window = Rect::new(lo[0] - 2, lo[1] - 2, hi[0] + 2, hi[1] + 2);
        let labeling = complement_components(&b, window).unwrap();
        let total: usize = labeling.components.iter().map(|c| c.cells.len()).sum();
        let area = ((window.x1 - window.x0 + 1) * (window.y1 - window.y0 + 1)) as usize;
        assert_eq!(total, area - b.len());
    }

    #[test]
    fn window_margin_is_enforced() {
        let b = RangeSet::from_points(2, [LatticePoint::xy(3, 0)]);
        assert!(complement_components(&b, Rect::new(-3, -3, 3, 3)).is_err());
    }
}
