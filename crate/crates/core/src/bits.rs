//! Word-packed bit storage with bit access and range popcount.
//!
//! Bit `i` lives in word `i / 64` at in-word offset `i % 64` (LSB first).
//! Bits at indices `>= len` inside the last word are always zero.

use crate::error::{Error, Result};
use crate::serial::{ensure, PayloadReader, PayloadWriter};

pub const WORD_BITS: usize = 64;

/// Mask with the low `width` bits set; `width` may be 64.
#[inline(always)]
pub fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Number of bits needed to write `v` in binary (`bits_for(0) == 0`).
#[inline]
pub fn bits_for(v: u64) -> u32 {
    64 - v.leading_zeros()
}

const fn build_select_in_byte() -> [[u8; 8]; 256] {
    let mut table = [[8u8; 8]; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        let mut bit = 0;
        while bit < 8 {
            if (b >> bit) & 1 == 1 {
                table[b][k] = bit as u8;
                k += 1;
            }
            bit += 1;
        }
        b += 1;
    }
    table
}

static SELECT_IN_BYTE: [[u8; 8]; 256] = build_select_in_byte();

/// Offset of the `k`-th (0-based) set bit of `word`.
///
/// Byte-wise prefix popcounts are computed in parallel, the byte holding the
/// target is found by comparing all eight sums against `k` at once, and a
/// table finishes inside that byte. The caller guarantees
/// `k < word.count_ones()`.
#[inline]
pub fn select_in_word(word: u64, k: u32) -> u32 {
    debug_assert!(k < word.count_ones());
    const L8: u64 = 0x0101_0101_0101_0101;
    const H8: u64 = 0x8080_8080_8080_8080;
    let mut s = word - ((word >> 1) & 0x5555_5555_5555_5555);
    s = (s & 0x3333_3333_3333_3333) + ((s >> 2) & 0x3333_3333_3333_3333);
    s = (s + (s >> 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    let sums = s.wrapping_mul(L8);
    let below = (((k as u64 * L8) | H8) - sums) & H8;
    let place = below.count_ones() * 8;
    let before = ((sums << 8) >> place) as u32 & 0xff;
    place + SELECT_IN_BYTE[((word >> place) & 0xff) as usize][(k - before) as usize] as u32
}

/// The uncompressed bit array `B[0..n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawBitVector {
    words: Vec<u64>,
    len: usize,
}

impl RawBitVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; len.div_ceil(WORD_BITS)];
        if !len.is_multiple_of(WORD_BITS) {
            *words.last_mut().unwrap() = low_mask((len % WORD_BITS) as u32);
        }
        Self { words, len }
    }

    /// Builds a vector of length `len` with ones exactly at `positions`.
    ///
    /// Positions must be strictly increasing and smaller than `len`.
    pub fn from_positions(len: usize, positions: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        let mut prev: Option<usize> = None;
        for &p in positions {
            if p >= len {
                return Err(Error::Input(format!(
                    "position {p} not below universe size {len}"
                )));
            }
            if let Some(q) = prev {
                if p <= q {
                    return Err(Error::Input(format!(
                        "positions must be strictly increasing ({q} then {p})"
                    )));
                }
            }
            v.words[p / WORD_BITS] |= 1u64 << (p % WORD_BITS);
            prev = Some(p);
        }
        Ok(v)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = BitBuilder::new();
        for bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Wraps raw words, validating the word count and the zero tail.
    pub fn from_words(words: Vec<u64>, len: usize) -> Result<Self> {
        ensure(words.len() == len.div_ceil(WORD_BITS), || {
            format!("{} words cannot hold exactly {len} bits", words.len())
        })?;
        if !len.is_multiple_of(WORD_BITS) {
            let tail = words[words.len() - 1] & !low_mask((len % WORD_BITS) as u32);
            ensure(tail == 0, || "nonzero bits beyond vector length".into())?;
        }
        Ok(Self { words, len })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::Range {
                index: i,
                len: self.len,
            });
        }
        Ok(self.bit(i))
    }

    /// Unchecked variant of [`RawBitVector::get`]; panics past the last word.
    #[inline(always)]
    pub fn bit(&self, i: usize) -> bool {
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Reads `width <= 64` bits starting at `pos`, LSB first.
    ///
    /// Bits past the end of the storage read as zero.
    #[inline]
    pub fn get_bits(&self, pos: usize, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        let w = pos / WORD_BITS;
        let off = (pos % WORD_BITS) as u32;
        if w + 1 < self.words.len() {
            // `<< 1 << (63 - off)` keeps the shift below 64 when off == 0
            let v = self.words[w] >> off | self.words[w + 1] << 1 << (63 - off);
            return v & low_mask(width);
        }
        let lo = self.words.get(w).copied().unwrap_or(0) >> off;
        let v = if off + width > 64 {
            let hi = self.words.get(w + 1).copied().unwrap_or(0);
            lo | (hi << (64 - off))
        } else {
            lo
        };
        v & low_mask(width)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones in `B[start .. start+len)`.
    pub fn popcount_range(&self, start: usize, len: usize) -> Result<usize> {
        match start.checked_add(len) {
            Some(end) if end <= self.len => Ok(self.count_range(start, len)),
            _ => Err(Error::Range {
                index: start.saturating_add(len),
                len: self.len,
            }),
        }
    }

    /// Unchecked range popcount.
    #[inline]
    pub fn count_range(&self, start: usize, len: usize) -> usize {
        if len == 0 {
            return 0;
        }
        let end = start + len;
        let (ws, we) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        let head = !low_mask((start % WORD_BITS) as u32);
        let tail = low_mask(((end - 1) % WORD_BITS) as u32 + 1);
        if ws == we {
            return (self.words[ws] & head & tail).count_ones() as usize;
        }
        let mut c = (self.words[ws] & head).count_ones() as usize;
        for w in &self.words[ws + 1..we] {
            c += w.count_ones() as usize;
        }
        c + (self.words[we] & tail).count_ones() as usize
    }

    /// Word `w` with its bits flipped when counting zeros; bits past `len`
    /// never count as either polarity.
    #[inline(always)]
    fn polar_word(&self, w: usize, ones: bool) -> u64 {
        let word = self.words[w];
        if ones {
            word
        } else {
            let inv = !word;
            if (w + 1) * WORD_BITS > self.len {
                inv & low_mask((self.len % WORD_BITS) as u32)
            } else {
                inv
            }
        }
    }

    /// Position of the `k`-th (0-based) bit equal to `ones` at or after
    /// `start`, or `None` if there are not that many.
    #[inline]
    pub fn select_from(&self, start: usize, k: usize, ones: bool) -> Option<usize> {
        if start >= self.len {
            return None;
        }
        let mut w = start / WORD_BITS;
        let mut word = self.polar_word(w, ones) & !low_mask((start % WORD_BITS) as u32);
        let mut k = k;
        loop {
            let c = word.count_ones() as usize;
            if k < c {
                return Some(w * WORD_BITS + select_in_word(word, k as u32) as usize);
            }
            k -= c;
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.polar_word(w, ones);
        }
    }

    /// Iterator over the positions of set bits.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let t = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * WORD_BITS + t)
                }
            })
        })
    }

    pub fn to_positions(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn size_in_bits(&self) -> usize {
        self.len
    }

    /// Serialized as `n` followed by the `ceil(n/64)` words.
    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.len);
        w.put_words(&self.words);
    }

    pub fn read_from(r: &mut PayloadReader<'_>) -> Result<Self> {
        let len = r.get_usize()?;
        let words = r.get_words()?;
        Self::from_words(words, len)
    }
}

/// Append-only builder for [`RawBitVector`].
#[derive(Debug, Default)]
pub struct BitBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        self.push_bits(bit as u64, 1);
    }

    /// Appends the low `width` bits of `value`, LSB first.
    #[inline]
    pub fn push_bits(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        let value = value & low_mask(width);
        let off = (self.len % WORD_BITS) as u32;
        if off == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << off;
            if off + width > 64 {
                self.words.push(value >> (64 - off));
            }
        }
        self.len += width as usize;
    }

    pub fn push_zeros(&mut self, count: usize) {
        self.pad_to(self.len + count);
    }

    pub fn push_ones(&mut self, count: usize) {
        let mut left = count;
        while left > 0 {
            let take = left.min(64);
            self.push_bits(u64::MAX, take as u32);
            left -= take;
        }
    }

    /// Appends zeros until the length reaches `len` (no-op if already there).
    pub fn pad_to(&mut self, len: usize) {
        if len > self.len {
            self.words.resize(len.div_ceil(WORD_BITS), 0);
            self.len = len;
        }
    }

    /// Appends `len` bits of `src` starting at `start`.
    pub fn extend_from(&mut self, src: &RawBitVector, start: usize, len: usize) {
        let mut done = 0;
        while done < len {
            let take = (len - done).min(64) as u32;
            self.push_bits(src.get_bits(start + done, take), take);
            done += take as usize;
        }
    }

    pub fn finish(self) -> RawBitVector {
        RawBitVector {
            words: self.words,
            len: self.len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> RawBitVector {
        RawBitVector::from_positions(8, &[1, 4, 5]).unwrap()
    }

    #[test]
    fn get_examples() {
        let v = sample();
        assert_eq!(v.get(1), Ok(true));
        assert_eq!(v.get(0), Ok(false));
        assert_eq!(v.get(8), Err(Error::Range { index: 8, len: 8 }));
    }

    #[test]
    fn popcount_range_examples() {
        let v = sample();
        assert_eq!(v.popcount_range(0, 8), Ok(3));
        assert_eq!(v.popcount_range(4, 2), Ok(2));
        assert_eq!(v.popcount_range(3, 0), Ok(0));
        assert!(matches!(v.popcount_range(4, 5), Err(Error::Range { .. })));
        assert!(matches!(
            v.popcount_range(usize::MAX, 2),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn from_positions_rejects_bad_input() {
        assert!(matches!(
            RawBitVector::from_positions(8, &[3, 3]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            RawBitVector::from_positions(8, &[5, 2]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            RawBitVector::from_positions(8, &[8]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn from_words_checks_tail() {
        assert!(RawBitVector::from_words(vec![0b1000], 3).is_err());
        assert!(RawBitVector::from_words(vec![0b100], 3).is_ok());
        assert!(RawBitVector::from_words(vec![0, 0], 64).is_err());
    }

    #[test]
    fn ones_vector_masks_tail() {
        let v = RawBitVector::ones(70);
        assert_eq!(v.count_ones(), 70);
        assert_eq!(v.words()[1], 0b111111);
    }

    #[test]
    fn select_in_word_matches_scan() {
        let w = 0x8000_0400_0010_0001u64;
        assert_eq!(select_in_word(w, 0), 0);
        assert_eq!(select_in_word(w, 1), 20);
        assert_eq!(select_in_word(w, 2), 42);
        assert_eq!(select_in_word(w, 3), 63);
        assert_eq!(select_in_word(u64::MAX, 63), 63);
    }

    proptest::proptest! {
        #[test]
        fn select_in_word_matches_naive(word in proptest::prelude::any::<u64>(), k in 0u32..64) {
            let ones: Vec<u32> = (0..64).filter(|b| word >> b & 1 == 1).collect();
            if (k as usize) < ones.len() {
                proptest::prop_assert_eq!(select_in_word(word, k), ones[k as usize]);
            }
        }
    }

    #[test]
    fn select_from_zeros_ignores_tail() {
        let v = RawBitVector::ones(10);
        assert_eq!(v.select_from(0, 0, false), None);
        let v = RawBitVector::from_positions(10, &[0, 1]).unwrap();
        assert_eq!(v.select_from(0, 0, false), Some(2));
        assert_eq!(v.select_from(0, 7, false), Some(9));
        assert_eq!(v.select_from(0, 8, false), None);
    }

    fn arb_bits() -> impl Strategy<Value = Vec<bool>> {
        prop::collection::vec(any::<bool>(), 0..400)
    }

    proptest! {
        #[test]
        fn popcount_total_is_sum_of_gets(bits in arb_bits()) {
            let v = RawBitVector::from_bits(bits.iter().copied());
            let sum = (0..v.len()).filter(|&i| v.get(i).unwrap()).count();
            prop_assert_eq!(v.popcount_range(0, v.len()).unwrap(), sum);
            prop_assert_eq!(v.count_ones(), sum);
        }

        #[test]
        fn popcount_is_additive(bits in arb_bits(), a in 0usize..400, b in 0usize..400, s in 0usize..400) {
            let v = RawBitVector::from_bits(bits.iter().copied());
            let n = v.len();
            let s = s.min(n);
            let a = a.min(n - s);
            let b = b.min(n - s - a);
            prop_assert_eq!(
                v.popcount_range(s, a).unwrap() + v.popcount_range(s + a, b).unwrap(),
                v.popcount_range(s, a + b).unwrap()
            );
        }

        #[test]
        fn get_bits_agrees_with_bit(bits in arb_bits(), pos in 0usize..400, width in 0u32..=64) {
            let v = RawBitVector::from_bits(bits.iter().copied());
            let got = v.get_bits(pos, width);
            for j in 0..width as usize {
                let expect = bits.get(pos + j).copied().unwrap_or(false);
                prop_assert_eq!((got >> j) & 1 == 1, expect);
            }
        }

        #[test]
        fn builder_push_bits_round_trips(chunks in prop::collection::vec((any::<u64>(), 0u32..=64), 0..30)) {
            let mut b = BitBuilder::new();
            for &(v, w) in &chunks {
                b.push_bits(v, w);
            }
            let bv = b.finish();
            let mut pos = 0;
            for &(v, w) in &chunks {
                prop_assert_eq!(bv.get_bits(pos, w), v & low_mask(w));
                pos += w as usize;
            }
            prop_assert_eq!(bv.len(), pos);
        }
    }
}
