//! darray, a select index over a verbatim dense bit vector, and sarray, which
//! stores each element of a sparse set as `w` verbatim low bits plus its high
//! part unary-coded into a dense vector `H` indexed by darray.

use crate::api::{check_rank, check_select, RankSelect, Space};
use crate::bits::{bits_for, RawBitVector, WORD_BITS};
use crate::error::{Error, Result};
use crate::packed::PackedInts;
use crate::plain::{PlainDict, PlainParams};
use crate::serial::{ensure, PayloadReader, PayloadWriter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DArrayParams {
    /// Matching bits per select block (`L`).
    pub block: usize,
    /// Blocks spanning more than this many bits store every position (`L2`).
    pub span: usize,
    /// Sampling stride inside the remaining blocks (`L3`).
    pub stride: usize,
}

impl Default for DArrayParams {
    fn default() -> Self {
        Self {
            block: 1 << 10,
            span: 1 << 16,
            stride: 1 << 5,
        }
    }
}

impl DArrayParams {
    pub fn validate(&self) -> Result<()> {
        let Self {
            block,
            span,
            stride,
        } = *self;
        if block == 0 || stride == 0 || span < 2 || block % stride != 0 {
            return Err(Error::Config(format!(
                "darray needs L3={stride} dividing L={block} and L2={span} >= 2"
            )));
        }
        if span > 1 << 32 {
            return Err(Error::Config(format!("darray L2={span} above 2^32")));
        }
        Ok(())
    }
}

/// Positions of the bits equal to `ones`, in order.
fn matching(bits: &RawBitVector, ones: bool) -> impl Iterator<Item = usize> + '_ {
    let len = bits.len();
    bits.words().iter().enumerate().flat_map(move |(w, &word)| {
        let mut word = if ones { word } else { !word };
        if (w + 1) * WORD_BITS > len {
            word &= crate::bits::low_mask((len % WORD_BITS) as u32);
        }
        std::iter::from_fn(move || {
            (word != 0).then(|| {
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                w * WORD_BITS + tz
            })
        })
    })
}

/// Select structure for one polarity of a bit vector.
///
/// `first[i]` is the position of the `(iL + 1)`-th matching bit. A block
/// whose span (distance to the next block's first position, or to one past
/// its last position) exceeds `L2` keeps all its positions in `explicit`;
/// otherwise every `L3`-th position relative to `first[i]` goes to `samples`
/// and select scans forward at most `L2` bits from the nearest sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectIndex {
    ones: bool,
    count: usize,
    first: PackedInts,
    /// Explicit blocks before each block; one trailing entry.
    explicit_before: PackedInts,
    explicit: PackedInts,
    samples: PackedInts,
}

impl SelectIndex {
    pub fn build(bits: &RawBitVector, ones: bool, params: DArrayParams) -> Result<Self> {
        params.validate()?;
        let DArrayParams {
            block,
            span,
            stride,
        } = params;
        let positions: Vec<u64> = matching(bits, ones).map(|p| p as u64).collect();
        let nblocks = positions.len().div_ceil(block);
        let mut first = Vec::with_capacity(nblocks);
        let mut explicit_before = Vec::with_capacity(nblocks + 1);
        let mut explicit = Vec::new();
        let mut samples = Vec::new();
        let chunks: Vec<&[u64]> = positions.chunks(block).collect();
        for (i, chunk) in chunks.iter().enumerate() {
            let start = chunk[0];
            let end = chunks
                .get(i + 1)
                .map_or(chunk[chunk.len() - 1] + 1, |c| c[0]);
            first.push(start);
            explicit_before.push((explicit.len() / block) as u64);
            if (end - start) as usize > span {
                explicit.extend_from_slice(chunk);
            } else {
                samples.extend(chunk.iter().step_by(stride).map(|&p| p - start));
            }
        }
        explicit_before.push(explicit.len().div_ceil(block) as u64);
        Ok(Self {
            ones,
            count: positions.len(),
            first: PackedInts::with_width(&first, bits_for(bits.len() as u64)),
            explicit_before: PackedInts::from_slice(&explicit_before),
            explicit: PackedInts::with_width(&explicit, bits_for(bits.len() as u64)),
            samples: PackedInts::with_width(&samples, bits_for(span as u64 - 1)),
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn num_blocks(&self) -> usize {
        self.first.len()
    }

    pub fn explicit_blocks(&self) -> usize {
        self.explicit_before.get(self.explicit_before.len() - 1) as usize
    }

    /// Position of the `i`-th matching bit, `1 <= i <= count`, plus the
    /// position the forward scan started from.
    #[inline]
    pub fn select_traced(
        &self,
        bits: &RawBitVector,
        i: usize,
        params: DArrayParams,
    ) -> (usize, usize) {
        let DArrayParams { block, stride, .. } = params;
        let idx = i - 1;
        let b = idx / block;
        let off = idx % block;
        let mut ex = 0;
        if !self.explicit.is_empty() {
            ex = self.explicit_before.get(b) as usize;
            if ex < self.explicit_before.get(b + 1) as usize {
                let pos = self.explicit.get(ex * block + off) as usize;
                return (pos, pos);
            }
        }
        let compact = b - ex;
        let seed = self.first.get(b) as usize
            + self.samples.get(compact * (block / stride) + off / stride) as usize;
        let pos = bits
            .select_from(seed, off % stride, self.ones)
            .expect("select index disagrees with bits");
        (pos, seed)
    }

    #[inline]
    pub fn select(&self, bits: &RawBitVector, i: usize, params: DArrayParams) -> usize {
        self.select_traced(bits, i, params).0
    }

    pub fn size_in_bits(&self) -> usize {
        self.first.size_in_bits()
            + self.explicit_before.size_in_bits()
            + self.explicit.size_in_bits()
            + self.samples.size_in_bits()
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.count);
        self.first.write_to(w);
        self.explicit_before.write_to(w);
        self.explicit.write_to(w);
        self.samples.write_to(w);
    }

    pub fn read_from(
        r: &mut PayloadReader<'_>,
        bits: &RawBitVector,
        ones: bool,
        params: DArrayParams,
    ) -> Result<Self> {
        let count = r.get_usize()?;
        let first = PackedInts::read_from(r)?;
        let explicit_before = PackedInts::read_from(r)?;
        let explicit = PackedInts::read_from(r)?;
        let samples = PackedInts::read_from(r)?;
        let expected = if ones {
            bits.count_ones()
        } else {
            bits.len() - bits.count_ones()
        };
        let nblocks = count.div_ceil(params.block);
        ensure(count == expected && first.len() == nblocks, || {
            "darray select index does not match its bits".into()
        })?;
        ensure(explicit_before.len() == nblocks + 1, || {
            "darray class table length".into()
        })?;
        let nexplicit = explicit_before.get(nblocks) as usize;
        ensure(
            explicit.len() <= nexplicit * params.block
                && samples.len()
                    <= (nblocks - nexplicit.min(nblocks)) * (params.block / params.stride),
            || "darray sample table length".into(),
        )?;
        Ok(Self {
            ones,
            count,
            first,
            explicit_before,
            explicit,
            samples,
        })
    }
}

/// Verbatim bits with a rank directory and select indexes for both
/// polarities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DArray {
    params: DArrayParams,
    plain: PlainDict,
    select1: SelectIndex,
    select0: SelectIndex,
}

impl DArray {
    pub fn build(bits: RawBitVector, params: DArrayParams, rank: PlainParams) -> Result<Self> {
        params.validate()?;
        let select1 = SelectIndex::build(&bits, true, params)?;
        let select0 = SelectIndex::build(&bits, false, params)?;
        Ok(Self {
            params,
            plain: PlainDict::build(bits, rank)?,
            select1,
            select0,
        })
    }

    pub fn params(&self) -> DArrayParams {
        self.params
    }

    pub fn plain_params(&self) -> PlainParams {
        self.plain.params()
    }

    pub fn ones_index(&self) -> &SelectIndex {
        &self.select1
    }

    pub fn bits(&self) -> &RawBitVector {
        self.plain.bits()
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        self.plain.write_to(w);
        self.select1.write_to(w);
        self.select0.write_to(w);
    }

    pub fn read_from(
        r: &mut PayloadReader<'_>,
        params: DArrayParams,
        rank: PlainParams,
    ) -> Result<Self> {
        params.validate()?;
        let plain = PlainDict::read_from(r, rank)?;
        let select1 = SelectIndex::read_from(r, plain.bits(), true, params)?;
        let select0 = SelectIndex::read_from(r, plain.bits(), false, params)?;
        Ok(Self {
            params,
            plain,
            select1,
            select0,
        })
    }
}

impl RankSelect for DArray {
    fn len(&self) -> usize {
        self.plain.len()
    }

    fn count_ones(&self) -> usize {
        self.select1.count
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        self.plain.rank1(x)
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.select1.count)?;
        Ok(self.select1.select(self.plain.bits(), i, self.params))
    }

    fn select0(&self, i: usize) -> Result<usize> {
        check_select("select0", i, self.select0.count)?;
        Ok(self.select0.select(self.plain.bits(), i, self.params))
    }

    fn get(&self, x: usize) -> Result<bool> {
        self.plain.bits().get(x)
    }

    fn has_native_select0(&self) -> bool {
        true
    }

    fn space(&self) -> Space {
        let plain = self.plain.space();
        Space {
            payload_bits: plain.payload_bits,
            directory_bits: plain.directory_bits
                + self.select1.size_in_bits()
                + self.select0.size_in_bits(),
        }
    }
}

/// Low-bit count `w = ceil(lg(n/m))`: the smallest `w` with `m 2^w >= n`.
pub fn low_width(n: usize, m: usize) -> u32 {
    if m == 0 {
        return 0;
    }
    let mut w = 0;
    while (m as u128) << w < n as u128 {
        w += 1;
    }
    w
}

/// Sparse array: low bits verbatim, high bits unary in `H`.
///
/// Element `x_i` (0-based `i`) sets `H[(x_i >> w) + i]`; `H` has length
/// `m + ceil(n / 2^w) + 1`, its `h`-th zero closing bucket `h - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SArray {
    params: DArrayParams,
    len: usize,
    w: u32,
    low: PackedInts,
    high: RawBitVector,
    select1: SelectIndex,
    select0: SelectIndex,
}

impl SArray {
    /// Builds from strictly increasing positions below `len`.
    pub fn from_positions(len: usize, positions: &[usize], params: DArrayParams) -> Result<Self> {
        params.validate()?;
        let m = positions.len();
        let w = low_width(len, m);
        let lows: Vec<u64> = positions
            .iter()
            .map(|&x| x as u64 & crate::bits::low_mask(w))
            .collect();
        let hlen = if m == 0 {
            0
        } else {
            m + len.div_ceil(1 << w) + 1
        };
        let set: Vec<usize> = positions
            .iter()
            .enumerate()
            .map(|(i, &x)| (x >> w) + i)
            .collect();
        let high = RawBitVector::from_positions(hlen, &set)?;
        let select1 = SelectIndex::build(&high, true, params)?;
        let select0 = SelectIndex::build(&high, false, params)?;
        Ok(Self {
            params,
            len,
            w,
            low: PackedInts::with_width(&lows, w),
            high,
            select1,
            select0,
        })
    }

    pub fn params(&self) -> DArrayParams {
        self.params
    }

    pub fn low_bits(&self) -> u32 {
        self.w
    }

    pub fn high_len(&self) -> usize {
        self.high.len()
    }

    pub fn ones_index(&self) -> &SelectIndex {
        &self.select1
    }

    pub fn high(&self) -> &RawBitVector {
        &self.high
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.len);
        self.low.write_to(w);
        self.high.write_to(w);
        self.select1.write_to(w);
        self.select0.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: DArrayParams) -> Result<Self> {
        params.validate()?;
        let len = r.get_usize()?;
        let low = PackedInts::read_from(r)?;
        let high = RawBitVector::read_from(r)?;
        let m = low.len();
        let w = low_width(len, m);
        let hlen = if m == 0 {
            0
        } else {
            m + len.div_ceil(1 << w) + 1
        };
        ensure(
            low.width() == w && high.len() == hlen && high.count_ones() == m,
            || "sarray high/low parts inconsistent".into(),
        )?;
        let select1 = SelectIndex::read_from(r, &high, true, params)?;
        let select0 = SelectIndex::read_from(r, &high, false, params)?;
        Ok(Self {
            params,
            len,
            w,
            low,
            high,
            select1,
            select0,
        })
    }
}

impl RankSelect for SArray {
    fn len(&self) -> usize {
        self.len
    }

    fn count_ones(&self) -> usize {
        self.low.len()
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        check_rank(x, self.len)?;
        if self.low.is_empty() {
            return Ok(0);
        }
        let h = x >> self.w;
        let mut y = if h == 0 {
            0
        } else {
            self.select0.select(&self.high, h, self.params) + 1
        };
        let mut k = y - h;
        let target = x as u64 & crate::bits::low_mask(self.w);
        while self.high.bit(y) && self.low.get(k) <= target {
            k += 1;
            y += 1;
        }
        Ok(k)
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.count_ones())?;
        let high = self.select1.select(&self.high, i, self.params) - (i - 1);
        Ok(high << self.w | self.low.get(i - 1) as usize)
    }

    fn space(&self) -> Space {
        Space {
            payload_bits: self.low.size_in_bits() + self.high.len(),
            directory_bits: self.select1.size_in_bits() + self.select0.size_in_bits(),
        }
    }
}
