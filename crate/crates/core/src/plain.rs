//! The verbatim `n + o(n)` dictionary: a two-level rank directory over the
//! raw bits, with select answered by binary search over the directory.

use crate::api::{check_rank, check_select, RankSelect, Space};
use crate::bits::{bits_for, RawBitVector};
use crate::error::{Error, Result};
use crate::packed::PackedInts;
use crate::serial::{ensure, PayloadReader, PayloadWriter};

/// Block sizes of a two-level rank directory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlainParams {
    /// Large-block size `l` in bits.
    pub large: usize,
    /// Small-block size `s` in bits; must divide `large`.
    pub small: usize,
}

impl Default for PlainParams {
    fn default() -> Self {
        Self {
            large: 1 << 8,
            small: 1 << 5,
        }
    }
}

impl PlainParams {
    pub fn validate(&self) -> Result<()> {
        if self.small == 0 || self.large == 0 {
            return Err(Error::Config("block sizes must be positive".into()));
        }
        if !self.large.is_multiple_of(self.small) {
            return Err(Error::Config(format!(
                "small block size {} must divide large block size {}",
                self.small, self.large
            )));
        }
        if self.large > 1 << 32 {
            return Err(Error::Config("large block size above 2^32".into()));
        }
        Ok(())
    }
}

/// Absolute ranks at large-block boundaries plus ranks relative to the
/// enclosing large block at every small-block boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDirectory {
    params: PlainParams,
    len: usize,
    /// `large_ranks[j]` = ones in `B[0 .. j*l)`; one extra trailing entry holds `m`.
    large_ranks: PackedInts,
    /// `small_ranks[j]` = ones in `B[floor(j*s/l)*l .. j*s)`.
    small_ranks: PackedInts,
}

impl RankDirectory {
    pub fn build(bits: &RawBitVector, params: PlainParams) -> Result<Self> {
        params.validate()?;
        let PlainParams { large, small } = params;
        let n = bits.len();
        let nlb = n.div_ceil(large);
        let nsb = n.div_ceil(small);
        let mut lranks = Vec::with_capacity(nlb + 1);
        let mut sranks = Vec::with_capacity(nsb);
        let mut total = 0u64;
        let mut in_large = 0u64;
        for sb in 0..nsb {
            let start = sb * small;
            if start % large == 0 {
                total += in_large;
                in_large = 0;
                lranks.push(total);
            }
            sranks.push(in_large);
            in_large += bits.count_range(start, small.min(n - start)) as u64;
        }
        total += in_large;
        lranks.push(total);
        Ok(Self {
            params,
            len: n,
            large_ranks: PackedInts::from_slice(&lranks),
            small_ranks: PackedInts::with_width(&sranks, bits_for(large as u64 - 1)),
        })
    }

    pub fn params(&self) -> PlainParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.large_ranks.get(self.large_ranks.len() - 1) as usize
    }

    pub fn num_small_blocks(&self) -> usize {
        self.small_ranks.len()
    }

    /// Ones in `B[0 .. sb*s)`.
    #[inline(always)]
    pub fn rank_before_small(&self, sb: usize) -> usize {
        if sb == self.small_ranks.len() {
            return self.count_ones();
        }
        let lb = sb * self.params.small / self.params.large;
        (self.large_ranks.get(lb) + self.small_ranks.get(sb)) as usize
    }

    /// Ones inside small block `sb`.
    #[inline]
    pub fn small_count(&self, sb: usize) -> usize {
        self.rank_before_small(sb + 1) - self.rank_before_small(sb)
    }

    /// Bit length of small block `sb` (the last one may be short).
    #[inline]
    pub fn small_len(&self, sb: usize) -> usize {
        self.params.small.min(self.len - sb * self.params.small)
    }

    /// Small block containing the `i`-th one (`1 <= i <= m`) and the number
    /// of ones before that block.
    pub fn find_one(&self, i: usize) -> (usize, usize) {
        let nlb = self.large_ranks.len() - 1;
        let target = i as u64;
        let lb = self.large_ranks.last_below(0, nlb, target, |_, v| v);
        self.scan_small(lb, |sb| self.rank_before_small(sb) < i)
    }

    /// Small block containing the `i`-th zero (`1 <= i <= n - m`) and the
    /// number of zeros before that block.
    pub fn find_zero(&self, i: usize) -> (usize, usize) {
        let PlainParams { large, small } = self.params;
        let nlb = self.large_ranks.len() - 1;
        let lb = self
            .large_ranks
            .last_below(0, nlb, i as u64, |j, v| (j * large) as u64 - v);
        let (sb, _) = self.scan_small(lb, |sb| sb * small - self.rank_before_small(sb) < i);
        (sb, sb * small - self.rank_before_small(sb))
    }

    /// Last small block of large block `lb` satisfying `below`.
    #[inline]
    fn scan_small(&self, lb: usize, below: impl Fn(usize) -> bool) -> (usize, usize) {
        let per = self.params.large / self.params.small;
        let first = lb * per;
        let end = (first + per).min(self.small_ranks.len());
        let mut sb = first;
        while sb + 1 < end && below(sb + 1) {
            sb += 1;
        }
        (sb, self.rank_before_small(sb))
    }

    pub fn size_in_bits(&self) -> usize {
        self.large_ranks.size_in_bits() + self.small_ranks.size_in_bits()
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.len);
        self.large_ranks.write_to(w);
        self.small_ranks.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: PlainParams) -> Result<Self> {
        params.validate()?;
        let len = r.get_usize()?;
        let large_ranks = PackedInts::read_from(r)?;
        let small_ranks = PackedInts::read_from(r)?;
        ensure(large_ranks.len() == len.div_ceil(params.large) + 1, || {
            "large rank directory length mismatch".into()
        })?;
        ensure(small_ranks.len() == len.div_ceil(params.small), || {
            "small rank directory length mismatch".into()
        })?;
        ensure(large_ranks.get(large_ranks.len() - 1) <= len as u64, || {
            "rank directory total exceeds length".into()
        })?;
        Ok(Self {
            params,
            len,
            large_ranks,
            small_ranks,
        })
    }
}

/// Raw bits plus a [`RankDirectory`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainDict {
    bits: RawBitVector,
    dir: RankDirectory,
}

impl PlainDict {
    pub fn build(bits: RawBitVector, params: PlainParams) -> Result<Self> {
        let dir = RankDirectory::build(&bits, params)?;
        Ok(Self { bits, dir })
    }

    pub fn bits(&self) -> &RawBitVector {
        &self.bits
    }

    pub fn params(&self) -> PlainParams {
        self.dir.params
    }

    pub fn directory(&self) -> &RankDirectory {
        &self.dir
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, x: usize) -> usize {
        let s = self.dir.params.small;
        let sb = x / s;
        self.dir.rank_before_small(sb) + self.bits.count_range(sb * s, x % s + 1)
    }

    #[inline]
    pub(crate) fn select1_unchecked(&self, i: usize) -> usize {
        let (sb, before) = self.dir.find_one(i);
        self.bits
            .select_from(sb * self.dir.params.small, i - before - 1, true)
            .expect("directory and bits disagree")
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        self.dir.write_to(w);
        self.bits.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: PlainParams) -> Result<Self> {
        let dir = RankDirectory::read_from(r, params)?;
        let bits = RawBitVector::read_from(r)?;
        ensure(bits.len() == dir.len, || "bit length mismatch".into())?;
        ensure(bits.count_ones() == dir.count_ones(), || {
            "rank directory disagrees with bits".into()
        })?;
        Ok(Self { bits, dir })
    }
}

impl RankSelect for PlainDict {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn count_ones(&self) -> usize {
        self.dir.count_ones()
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        check_rank(x, self.len())?;
        Ok(self.rank1_unchecked(x))
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.count_ones())?;
        Ok(self.select1_unchecked(i))
    }

    fn select0(&self, i: usize) -> Result<usize> {
        check_select("select0", i, self.count_zeros())?;
        let (sb, before) = self.dir.find_zero(i);
        Ok(self
            .bits
            .select_from(sb * self.dir.params.small, i - before - 1, false)
            .expect("directory and bits disagree"))
    }

    fn get(&self, x: usize) -> Result<bool> {
        self.bits.get(x)
    }

    fn has_native_select0(&self) -> bool {
        true
    }

    fn space(&self) -> Space {
        Space {
            payload_bits: self.bits.len(),
            directory_bits: self.dir.size_in_bits(),
        }
    }
}
