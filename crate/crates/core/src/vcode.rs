//! Vertical code: the gap sequence stored as per-block bit planes.
//!
//! With `P_1 < ... < P_m` the one positions, gap `g[i] = P_{i+1} - P_i - 1`
//! (and `g[0] = P_1`). Gaps are grouped `p` per block; block `b` stores
//! `T[b]` planes of `p` bits, plane `j` holding bit `j` of every gap. The sum
//! of the first `q + 1` gaps of a block is then `sum_j popcount(plane_j &
//! mask) << j`, so select costs `T[b]` masked popcounts.

use crate::api::{check_rank, check_select, RankSelect, Space};
use crate::bits::{bits_for, low_mask, BitBuilder, RawBitVector};
use crate::error::{Error, Result};
use crate::packed::PackedInts;
use crate::serial::{ensure, PayloadReader, PayloadWriter};

/// Blocks per anchor in [`PlaneOffsets::Sampled`] mode.
pub const ANCHOR_STRIDE: usize = 32;

/// How the start of each block's planes is located.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PlaneOffsets {
    /// A 32-bit offset per block.
    #[default]
    Full,
    /// An offset every [`ANCHOR_STRIDE`] blocks; the rest are summed from `T`.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VcodeParams {
    /// Gaps per block; a multiple of 8 up to 64.
    pub p: usize,
    pub offsets: PlaneOffsets,
}

impl Default for VcodeParams {
    fn default() -> Self {
        Self {
            p: 8,
            offsets: PlaneOffsets::Full,
        }
    }
}

impl VcodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || !self.p.is_multiple_of(8) || self.p > 64 {
            return Err(Error::Config(format!(
                "vcode block size p={} must be a positive multiple of 8 up to 64",
                self.p
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcodeDict {
    params: VcodeParams,
    len: usize,
    ones: usize,
    /// `P_{b p} + 1` per block, with `P_0 = -1`.
    base: PackedInts,
    planes_per_block: Vec<u8>,
    /// Bit offset into `planes` per block, or per anchor when sampled.
    offsets: PackedInts,
    planes: RawBitVector,
}

impl VcodeDict {
    /// Builds from strictly increasing positions below `len`.
    pub fn from_positions(len: usize, positions: &[usize], params: VcodeParams) -> Result<Self> {
        params.validate()?;
        let p = params.p;
        let ones = positions.len();
        let nblocks = ones.div_ceil(p);
        let mut base = Vec::with_capacity(nblocks);
        let mut planes_per_block = Vec::with_capacity(nblocks);
        let mut offsets = Vec::with_capacity(nblocks);
        let mut planes = BitBuilder::new();
        let mut gaps = vec![0u64; p];
        let mut prev: isize = -1;
        for (b, chunk) in positions.chunks(p).enumerate() {
            base.push((prev + 1) as u64);
            gaps.fill(0);
            for (g, &pos) in gaps.iter_mut().zip(chunk) {
                *g = (pos as isize - prev - 1) as u64;
                prev = pos as isize;
            }
            let t = gaps.iter().copied().max().map_or(0, bits_for);
            if params.offsets == PlaneOffsets::Full || b % ANCHOR_STRIDE == 0 {
                offsets.push(planes.len() as u64);
            }
            planes_per_block.push(t as u8);
            for j in 0..t {
                let plane = gaps
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (q, g)| acc | ((g >> j) & 1) << q);
                planes.push_bits(plane, p as u32);
            }
        }
        let width = offsets.last().map_or(0, |&o| bits_for(o)).max(32);
        Ok(Self {
            params,
            len,
            ones,
            base: PackedInts::from_slice(&base),
            planes_per_block,
            offsets: PackedInts::with_width(&offsets, width),
            planes: planes.finish(),
        })
    }

    pub fn params(&self) -> VcodeParams {
        self.params
    }

    /// Number of planes of block `b`.
    pub fn planes_in_block(&self, b: usize) -> usize {
        self.planes_per_block[b] as usize
    }

    pub fn num_blocks(&self) -> usize {
        self.planes_per_block.len()
    }

    /// Bits spent on gap planes.
    pub fn plane_bits(&self) -> usize {
        self.planes.len()
    }

    #[inline]
    fn plane_offset(&self, b: usize) -> usize {
        match self.params.offsets {
            PlaneOffsets::Full => self.offsets.get(b) as usize,
            PlaneOffsets::Sampled => {
                let a = b / ANCHOR_STRIDE;
                let planes: usize = self.planes_per_block[a * ANCHOR_STRIDE..b]
                    .iter()
                    .map(|&t| t as usize)
                    .sum();
                self.offsets.get(a) as usize + planes * self.params.p
            }
        }
    }

    /// `P_{b p + q + 1}` given the plane offset of block `b`.
    #[inline(always)]
    fn position(&self, b: usize, off: usize, q: usize) -> usize {
        let p = self.params.p;
        let mask = low_mask(q as u32 + 1);
        let mut sum = 0usize;
        for j in 0..self.planes_per_block[b] as usize {
            let plane = self.planes.get_bits(off + j * p, p as u32);
            sum += ((plane & mask).count_ones() as usize) << j;
        }
        self.base.get(b) as usize + q + sum
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.len);
        w.put_usize(self.ones);
        self.base.write_to(w);
        w.put_bytes(&self.planes_per_block);
        self.offsets.write_to(w);
        self.planes.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: VcodeParams) -> Result<Self> {
        params.validate()?;
        let len = r.get_usize()?;
        let ones = r.get_usize()?;
        let base = PackedInts::read_from(r)?;
        let planes_per_block = r.get_bytes()?;
        let offsets = PackedInts::read_from(r)?;
        let planes = RawBitVector::read_from(r)?;
        let nblocks = ones.div_ceil(params.p);
        ensure(
            ones <= len && base.len() == nblocks && planes_per_block.len() == nblocks,
            || "vcode block count mismatch".into(),
        )?;
        let anchors = match params.offsets {
            PlaneOffsets::Full => nblocks,
            PlaneOffsets::Sampled => nblocks.div_ceil(ANCHOR_STRIDE),
        };
        ensure(offsets.len() == anchors, || {
            "vcode offset count mismatch".into()
        })?;
        let total: usize = planes_per_block.iter().map(|&t| t as usize).sum();
        ensure(
            planes_per_block.iter().all(|&t| t <= 64) && total * params.p == planes.len(),
            || "vcode plane payload mismatch".into(),
        )?;
        Ok(Self {
            params,
            len,
            ones,
            base,
            planes_per_block,
            offsets,
            planes,
        })
    }
}

impl RankSelect for VcodeDict {
    fn len(&self) -> usize {
        self.len
    }

    fn count_ones(&self) -> usize {
        self.ones
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        check_rank(x, self.len)?;
        if self.ones == 0 {
            return Ok(0);
        }
        // last block whose preceding one lies at or before x
        let b = self
            .base
            .last_below(0, self.base.len(), x as u64 + 2, |_, v| v);
        let p = self.params.p;
        let off = self.plane_offset(b);
        // ones of block b at or before x, by binary search over positions
        let (mut lo, mut hi) = (0, p.min(self.ones - b * p));
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.position(b, off, mid) <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(b * p + lo)
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.ones)?;
        let idx = i - 1;
        let b = idx / self.params.p;
        Ok(self.position(b, self.plane_offset(b), idx % self.params.p))
    }

    fn space(&self) -> Space {
        Space {
            payload_bits: self.planes.len(),
            directory_bits: self.base.size_in_bits()
                + self.planes_per_block.len() * 8
                + self.offsets.size_in_bits(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_examples() {
        let params = VcodeParams {
            p: 8,
            offsets: PlaneOffsets::Full,
        };
        let d = VcodeDict::from_positions(8, &[1, 4, 5], params).unwrap();
        assert_eq!(d.planes_in_block(0), 2);
        assert_eq!(d.select1(2), Ok(4));
        assert_eq!(d.select1(1), Ok(1));
        assert_eq!(d.select1(3), Ok(5));
        assert_eq!(d.rank1(4), Ok(2));
        assert_eq!(d.rank1(0), Ok(0));
        assert!(d.select1(4).is_err());
    }

    #[test]
    fn zero_gaps_need_no_planes() {
        let pos: Vec<usize> = (0..40).collect();
        let d = VcodeDict::from_positions(100, &pos, VcodeParams::default()).unwrap();
        assert_eq!(d.plane_bits(), 0);
        for i in 1..=40 {
            assert_eq!(d.select1(i), Ok(i - 1));
        }
        assert_eq!(d.rank1(99), Ok(40));
    }

    #[test]
    fn rejects_unaligned_block() {
        for p in [0, 7, 12, 72] {
            let params = VcodeParams {
                p,
                offsets: PlaneOffsets::Full,
            };
            assert!(matches!(
                VcodeDict::from_positions(8, &[1], params),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn both_offset_modes_agree_with_scan() {
        let mut state = 7u64;
        let pos: Vec<usize> = (0..50_000)
            .filter(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state.is_multiple_of(37)
            })
            .collect();
        for offsets in [PlaneOffsets::Full, PlaneOffsets::Sampled] {
            for p in [8, 16, 64] {
                let d =
                    VcodeDict::from_positions(50_000, &pos, VcodeParams { p, offsets }).unwrap();
                for (i, &x) in pos.iter().enumerate() {
                    assert_eq!(d.select1(i + 1), Ok(x));
                }
                let mut k = 0;
                for x in 0..50_000 {
                    if k < pos.len() && pos[k] == x {
                        k += 1;
                    }
                    assert_eq!(d.rank1(x), Ok(k));
                }
                assert!(d
                    .planes_per_block
                    .iter()
                    .all(|&t| t as u32 <= bits_for(50_000)));
            }
        }
    }
}
