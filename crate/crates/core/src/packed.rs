//! Fixed-width packed integer arrays used for directories and samples.

use crate::bits::{bits_for, BitBuilder, RawBitVector};
use crate::error::Result;
use crate::serial::{ensure, PayloadReader, PayloadWriter};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PackedInts {
    bits: RawBitVector,
    width: u32,
    len: usize,
}

impl PackedInts {
    /// Packs `values` using the smallest width that holds the maximum.
    pub fn from_slice(values: &[u64]) -> Self {
        let width = values.iter().copied().max().map_or(0, bits_for);
        Self::with_width(values, width)
    }

    /// Packs `values` at exactly `width` bits each.
    ///
    /// Panics if a value does not fit; callers size `width` from the data.
    pub fn with_width(values: &[u64], width: u32) -> Self {
        assert!(width <= 64);
        let mut b = BitBuilder::with_capacity(values.len() * width as usize);
        for &v in values {
            assert!(
                bits_for(v) <= width,
                "value {v} does not fit in {width} bits"
            );
            b.push_bits(v, width);
        }
        Self {
            bits: b.finish(),
            width,
            len: values.len(),
        }
    }

    #[inline(always)]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        self.bits.get_bits(i * self.width as usize, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn size_in_bits(&self) -> usize {
        self.len * self.width as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Largest index `i` in `lo..hi` with `key(get(i)) < target`, assuming
    /// `key(get(·))` is non-decreasing and `key(get(lo)) < target`.
    pub fn last_below(
        &self,
        lo: usize,
        hi: usize,
        target: u64,
        key: impl Fn(usize, u64) -> u64,
    ) -> usize {
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if key(mid, self.get(mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put(self.width as u64);
        w.put_usize(self.len);
        w.put_words(self.bits.words());
    }

    pub fn read_from(r: &mut PayloadReader<'_>) -> Result<Self> {
        let width = r.get()?;
        ensure(width <= 64, || format!("packed width {width} exceeds 64"))?;
        let width = width as u32;
        let len = r.get_usize()?;
        let total = len
            .checked_mul(width as usize)
            .ok_or_else(|| crate::Error::Format("packed array size overflows".into()))?;
        let bits = RawBitVector::from_words(r.get_words()?, total)?;
        Ok(Self { bits, width, len })
    }
}
