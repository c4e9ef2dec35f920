//! Bit-exact lossless codec for d=2 walk ranges.
//!
//! The encoder transmits, coarse to fine along the triadic scale schedule,
//! which boxes meet the range's inner boundary: nine child bits per active
//! parent box. The top-level box is never transmitted (it is always the
//! single box `Q(0, k_m)`). The level-0 active cells are exactly the inner
//! boundary; one fill bit per finite complement component then settles
//! which enclosed pockets belong to the range.
//!
//! File format "RWRC": magic `R W R C`, version byte 1, dimension byte 2,
//! n as 8-byte big-endian, level count byte, payload bits packed MSB-first
//! and zero-padded to a byte boundary.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    active_centers, finite_components, inner_boundary, range_of, scale_schedule, RangeSet,
};
use crate::rng::derive_stream;
use crate::stats::{mean_stderr, Estimate};
use crate::walk::{simulate_walk, LatticePoint};

pub const MAGIC: [u8; 4] = *b"RWRC";
pub const VERSION: u8 = 1;

/// Versioned binary encoding of a range set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeBitStream {
    pub n: u64,
    pub level_count: u8,
    payload: Vec<u8>,
    /// Payload bits only; the header is excluded from entropy accounting.
    pub total_bits: u64,
}

impl RangeBitStream {
    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Serialize header plus payload to the RWRC file format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(14 + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(2);
        out.extend_from_slice(&self.n.to_be_bytes());
        out.push(self.level_count);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 15 {
            return Err(Error::BadHeader(format!("file too short: {} bytes", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(Error::BadVersion(bytes[4]));
        }
        if bytes[5] != 2 {
            return Err(Error::BadHeader(format!("unsupported dimension {}", bytes[5])));
        }
        let n = u64::from_be_bytes(bytes[6..14].try_into().unwrap());
        let level_count = bytes[14];
        let payload = bytes[15..].to_vec();
        Ok(RangeBitStream { n, level_count, total_bits: payload.len() as u64 * 8, payload })
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter { bytes: Vec::new(), bits: 0 }
    }

    #[inline]
    fn push(&mut self, bit: bool) {
        let offset = (self.bits % 8) as u8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            // MSB-first within each byte.
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.bits += 1;
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    #[inline]
    fn next(&mut self) -> Result<bool> {
        let byte = self.pos / 8;
        if byte as usize >= self.bytes.len() {
            return Err(Error::TruncatedPayload { needed: 1 });
        }
        let bit = (self.bytes[byte as usize] >> (7 - (self.pos % 8) as u8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    /// All remaining bits up to the byte-boundary padding must be zero.
    fn finish(&mut self) -> Result<u64> {
        let consumed = self.pos;
        let total = self.bytes.len() as u64 * 8;
        if total - consumed >= 8 {
            return Err(Error::FillBitMismatch(format!(
                "{} unread payload bits after fill section",
                total - consumed
            )));
        }
        while self.pos < total {
            if self.next()? {
                return Err(Error::FillBitMismatch("nonzero padding bit".into()));
            }
        }
        Ok(consumed)
    }
}

fn validate_range(r: &RangeSet, n: u64) -> Result<()> {
    if r.dim() != 2 {
        return Err(Error::InvalidRange(format!("dimension {} (codec is d=2)", r.dim())));
    }
    let origin = LatticePoint::origin(2);
    if !r.contains(&origin) {
        return Err(Error::InvalidRange("origin not in range".into()));
    }
    let bound = n as i64;
    for p in r.iter() {
        if p.coords()[0].abs() > bound || p.coords()[1].abs() > bound {
            return Err(Error::InvalidRange(format!(
                "point {:?} outside [-{n},{n}]^2",
                p.coords()
            )));
        }
    }
    // Connectivity: BFS from the origin must reach every point.
    let set = r.xy_set();
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = vec![(0i64, 0i64)];
    seen.insert((0i64, 0i64));
    while let Some((x, y)) = queue.pop() {
        for q in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if set.contains(&q) && seen.insert(q) {
                queue.push(q);
            }
        }
    }
    if seen.len() != set.len() {
        return Err(Error::InvalidRange("range is not 4-connected".into()));
    }
    Ok(())
}

/// Encode the range of an n-step walk.
pub fn encode_range(r: &RangeSet, n: u64) -> Result<RangeBitStream> {
    validate_range(r, n)?;
    let boundary = inner_boundary(r).xy_set();
    let schedule = scale_schedule(n);
    let m = schedule.len() - 1;

    // Active box centers per level, derived from the boundary.
    let levels: Vec<BTreeSet<(i64, i64)>> =
        schedule.iter().map(|&k| active_centers(&boundary, k as i64)).collect();
    debug_assert_eq!(levels[m].len(), 1, "top-level box is always Q(0, k_m)");

    let mut w = BitWriter::new();
    for j in (0..m).rev() {
        let child_side = 2 * schedule[j] as i64 + 1;
        for &(px, py) in &levels[j + 1] {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let child = (px + child_side * dx, py + child_side * dy);
                    w.push(levels[j].contains(&child));
                }
            }
        }
    }
    for comp in finite_components(&boundary) {
        let (x, y) = comp[0];
        w.push(r.contains(&LatticePoint::xy(x, y)));
    }
    let total_bits = w.bits;
    Ok(RangeBitStream { n, level_count: m as u8, payload: w.bytes, total_bits })
}

/// Exact inverse of [`encode_range`].
pub fn decode_range(stream: &RangeBitStream) -> Result<(RangeSet, u64)> {
    let n = stream.n;
    let schedule = scale_schedule(n);
    let m = schedule.len() - 1;
    if stream.level_count as usize != m {
        return Err(Error::BadHeader(format!(
            "level count {} does not match schedule for n={n} (expected {m})",
            stream.level_count
        )));
    }
    let mut reader = BitReader::new(&stream.payload);

    // Level m is deterministic: the single box centered at the origin.
    let mut active: BTreeSet<(i64, i64)> = BTreeSet::from([(0, 0)]);
    for j in (0..m).rev() {
        let child_side = 2 * schedule[j] as i64 + 1;
        let mut next = BTreeSet::new();
        for &(px, py) in &active {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if reader.next()? {
                        next.insert((px + child_side * dx, py + child_side * dy));
                    }
                }
            }
        }
        active = next;
    }
    if active.is_empty() {
        return Err(Error::InvalidRange("decoded boundary is empty".into()));
    }

    let boundary: HashSet<(i64, i64)> = active.iter().copied().collect();
    let mut points: Vec<(i64, i64)> = boundary.iter().copied().collect();
    for comp in finite_components(&boundary) {
        if reader.next()? {
            points.extend_from_slice(&comp);
        }
    }
    reader.finish()?;

    let range = RangeSet::from_points(2, points.into_iter().map(|(x, y)| LatticePoint::xy(x, y)));
    Ok((range, n))
}

/// Payload bit lengths of encoded ranges over independent replicas.
pub fn code_length_samples(n: u64, reps: u64, master_seed: u64) -> Result<Vec<u64>> {
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, i);
            let traj = simulate_walk(2, n, &mut rng)?;
            let stream = encode_range(&range_of(&traj), n)?;
            Ok(stream.total_bits)
        })
        .collect()
}

/// Mean payload bits per sample with standard error (d=2).
pub fn mean_code_length(n: u64, reps: u64, master_seed: u64) -> Result<Estimate> {
    if reps < 2 {
        return Err(Error::InvalidArgument("mean_code_length needs reps >= 2".into()));
    }
    let samples = code_length_samples(n, reps, master_seed)?;
    let values: Vec<f64> = samples.iter().map(|&b| b as f64).collect();
    Ok(mean_stderr(&values))
}

/// Independent recount of the code-length identity:
/// payload bits = 9 * (active boxes at levels 1..m) + finite components.
pub fn expected_payload_bits(r: &RangeSet, n: u64) -> Result<u64> {
    let boundary = inner_boundary(r).xy_set();
    let schedule = scale_schedule(n);
    let mut bits = 0u64;
    for &k in schedule.iter().skip(1) {
        bits += 9 * active_centers(&boundary, k as i64).len() as u64;
    }
    bits += finite_components(&boundary).len() as u64;
    Ok(bits)
}

/// Convenience check used by tests and the CLI: is the parent-child
/// activity in a decoded hierarchy consistent by construction.
pub fn roundtrip(r: &RangeSet, n: u64) -> Result<bool> {
    let stream = encode_range(r, n)?;
    let (decoded, dn) = decode_range(&stream)?;
    Ok(dn == n && decoded.len() == r.len() && r.iter().all(|p| decoded.contains(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::range_of;
    use crate::rng::derive_stream;
    use crate::walk::simulate_walk;

    #[test]
    fn singleton_roundtrip() {
        let r = RangeSet::from_points(2, [LatticePoint::origin(2)]);
        let stream = encode_range(&r, 0).unwrap();
        // Schedule [0, 1]: one 9-bit child group, no finite components.
        assert_eq!(stream.total_bits, 9);
        let (decoded, n) = decode_range(&stream).unwrap();
        assert_eq!(n, 0);
        assert_eq!(decoded.len(), 1);
        assert!(decoded.contains(&LatticePoint::origin(2)));
    }

    #[test]
    fn random_walk_roundtrips() {
        for seed in 0..50u64 {
            let n = 256;
            let traj = simulate_walk(2, n, &mut derive_stream(seed, 0)).unwrap();
            let r = range_of(&traj);
            assert!(roundtrip(&r, n).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn payload_matches_independent_recount() {
        for seed in 0..20u64 {
            let n = 512;
            let traj = simulate_walk(2, n, &mut derive_stream(seed, 1)).unwrap();
            let r = range_of(&traj);
            let stream = encode_range(&r, n).unwrap();
            assert_eq!(stream.total_bits, expected_payload_bits(&r, n).unwrap());
        }
    }

    #[test]
    fn rejects_invalid_ranges() {
        // Origin missing.
        let r = RangeSet::from_points(2, [LatticePoint::xy(1, 0)]);
        assert!(matches!(encode_range(&r, 4), Err(Error::InvalidRange(_))));
        // Disconnected.
        let r = RangeSet::from_points(2, [LatticePoint::origin(2), LatticePoint::xy(3, 3)]);
        assert!(matches!(encode_range(&r, 4), Err(Error::InvalidRange(_))));
        // Outside window.
        let r = RangeSet::from_points(2, [LatticePoint::origin(2), LatticePoint::xy(1, 0)]);
        assert!(matches!(encode_range(&r, 0), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn header_errors_are_distinct() {
        let r = RangeSet::from_points(2, [LatticePoint::origin(2)]);
        let bytes = encode_range(&r, 0).unwrap().to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(RangeBitStream::from_bytes(&bad), Err(Error::BadMagic)));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(RangeBitStream::from_bytes(&bad), Err(Error::BadVersion(9))));

        let mut bad = bytes.clone();
        bad[14] = 7;
        let stream = RangeBitStream::from_bytes(&bad).unwrap();
        assert!(matches!(decode_range(&stream), Err(Error::BadHeader(_))));
    }

    #[test]
    fn truncated_payload_is_reported() {
        let n = 128;
        let traj = simulate_walk(2, n, &mut derive_stream(3, 0)).unwrap();
        let stream = encode_range(&range_of(&traj), n).unwrap();
        let mut bytes = stream.to_bytes();
        bytes.truncate(bytes.len() - 4);
        let stream = RangeBitStream::from_bytes(&bytes).unwrap();
        assert!(matches!(decode_range(&stream), Err(Error::TruncatedPayload { .. })));
    }

    #[test]
    fn file_bytes_roundtrip() {
        let n = 200;
        let traj = simulate_walk(2, n, &mut derive_stream(12, 0)).unwrap();
        let stream = encode_range(&range_of(&traj), n).unwrap();
        let parsed = RangeBitStream::from_bytes(&stream.to_bytes()).unwrap();
        let (decoded, dn) = decode_range(&parsed).unwrap();
        assert_eq!(dn, n);
        assert_eq!(decoded.len(), range_of(&traj).len());
    }
}
