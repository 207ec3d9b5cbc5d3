//! Enumerative coding of short blocks and the `ent` dictionary.
//!
//! A block of `t <= 64` bits holding `u` ones is mapped to its index in the
//! lexicographic order of the sorted one-position tuples (the combinatorial
//! number system). The index lies in `[0, C(t,u))` and is stored in
//! `ceil(lg C(t,u))` bits.

use std::sync::OnceLock;

use crate::api::{check_rank, check_select, RankSelect, Space};
use crate::bits::{bits_for, low_mask, select_in_word, BitBuilder, RawBitVector};
use crate::error::{Error, Result};
use crate::packed::PackedInts;
use crate::plain::{PlainParams, RankDirectory};
use crate::serial::{ensure, PayloadReader, PayloadWriter};

pub const MAX_BLOCK: usize = 64;

/// Binomial coefficients `C(t, u)` for `0 <= u <= t <= 64`.
pub struct BinomialTable {
    c: Vec<[u64; MAX_BLOCK + 1]>,
}

impl BinomialTable {
    fn new() -> Self {
        let mut c = vec![[0u64; MAX_BLOCK + 1]; MAX_BLOCK + 1];
        for t in 0..=MAX_BLOCK {
            c[t][0] = 1;
            for u in 1..=t {
                c[t][u] = c[t - 1][u - 1] + if u < t { c[t - 1][u] } else { 0 };
            }
        }
        Self { c }
    }

    pub fn global() -> &'static BinomialTable {
        static TABLE: OnceLock<BinomialTable> = OnceLock::new();
        TABLE.get_or_init(BinomialTable::new)
    }

    /// `C(t, u)`, zero when `u > t`.
    #[inline(always)]
    pub fn get(&self, t: usize, u: usize) -> u64 {
        if u > t {
            0
        } else {
            self.c[t][u]
        }
    }
}

#[inline(always)]
pub fn binomial(t: usize, u: usize) -> u64 {
    BinomialTable::global().get(t, u)
}

/// Code length `ceil(lg C(t,u))` in bits.
#[inline]
pub fn code_len(t: usize, u: usize) -> u32 {
    let c = binomial(t, u);
    if c <= 1 {
        0
    } else {
        bits_for(c - 1)
    }
}

/// Offset of `block` (length `t`, exactly `u` ones) among all such blocks.
pub fn enum_encode(block: u64, t: usize, u: usize) -> Result<u64> {
    if t > MAX_BLOCK {
        return Err(Error::Config(format!("block length {t} exceeds 64")));
    }
    let block_ones = (block & low_mask(t as u32)).count_ones() as usize;
    if block & !low_mask(t as u32) != 0 || block_ones != u {
        return Err(Error::Input(format!(
            "block {block:#x} has {block_ones} ones within {t} bits, expected {u}"
        )));
    }
    Ok(encode_unchecked(block, t, u))
}

/// Sums, over every zero preceding each one, the number of tuples that put
/// that one at the zero's position instead (hockey-stick identity per gap).
#[inline]
pub(crate) fn encode_unchecked(block: u64, t: usize, u: usize) -> u64 {
    let tab = BinomialTable::global();
    let mut offset = 0u64;
    let mut remaining = u;
    let mut next = 0usize;
    let mut w = block;
    while w != 0 {
        let p = w.trailing_zeros() as usize;
        w &= w - 1;
        // zeros at next..p each skip C(t-1-q, remaining-1) tuples
        offset += tab.get(t - next, remaining) - tab.get(t - p, remaining);
        remaining -= 1;
        next = p + 1;
    }
    offset
}

/// Inverse of [`enum_encode`].
pub fn enum_decode(offset: u64, t: usize, u: usize) -> Result<u64> {
    if t > MAX_BLOCK || u > t {
        return Err(Error::Config(format!("invalid block class ({t}, {u})")));
    }
    let c = binomial(t, u);
    if offset >= c {
        return Err(Error::domain("enum_decode offset", offset, 0, c - 1));
    }
    Ok(decode_walk(offset, t, u))
}

/// Per-bit walk: at position `q` with `r` ones left, `C(t-1-q, r-1)` tuples
/// place a one at `q`.
#[inline]
pub(crate) fn decode_walk(mut offset: u64, t: usize, u: usize) -> u64 {
    let tab = BinomialTable::global();
    let mut block = 0u64;
    let mut r = u;
    let mut q = 0usize;
    while r > 0 {
        if t - q == r {
            return block | (low_mask(r as u32) << q);
        }
        let c = tab.get(t - 1 - q, r - 1);
        if offset < c {
            block |= 1u64 << q;
            r -= 1;
        } else {
            offset -= c;
        }
        q += 1;
    }
    block
}

/// Classes with at most this many members get a direct lookup table.
pub const DECODE_TABLE_LIMIT: u64 = 1 << 16;

/// Block decoder for a fixed block length: table lookup for small classes,
/// binomial walk for the rest.
#[derive(Clone, Debug)]
pub struct BlockDecoder {
    t: usize,
    tables: Vec<Vec<u64>>,
}

impl BlockDecoder {
    pub fn new(t: usize) -> Self {
        assert!(t <= MAX_BLOCK);
        let tables = (0..=t)
            .map(|u| {
                let c = binomial(t, u);
                if c <= DECODE_TABLE_LIMIT {
                    (0..c).map(|o| decode_walk(o, t, u)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { t, tables }
    }

    pub fn block_len(&self) -> usize {
        self.t
    }

    /// Decodes a code word of a block of length `t` (equal to the decoder's
    /// length for full blocks, shorter for a trailing block).
    #[inline(always)]
    pub fn decode(&self, offset: u64, t: usize, u: usize) -> u64 {
        if t == self.t {
            if let Some(&b) = self.tables[u].get(offset as usize) {
                return b;
            }
        }
        decode_walk(offset, t, u)
    }
}

/// `n * H0` in bits for a vector of length `n` with `m` ones.
pub fn entropy_bits(n: u64, m: u64) -> Result<f64> {
    if m > n {
        return Err(Error::domain("entropy_bits m", m, 0, n));
    }
    if m == 0 || m == n {
        return Ok(0.0);
    }
    let (n, m) = (n as f64, m as f64);
    Ok(m * (n / m).log2() + (n - m) * (n / (n - m)).log2())
}

/// `B(n, m) = ceil(lg C(n, m))`.
pub fn bbound_bits(n: u64, m: u64) -> Result<u64> {
    if m > n {
        return Err(Error::domain("bbound_bits m", m, 0, n));
    }
    if n as usize <= MAX_BLOCK {
        return Ok(code_len(n as usize, m as usize) as u64);
    }
    let k = m.min(n - m);
    match k {
        0 => Ok(0),
        // C(n,1) = n may be an exact power of two
        1 => Ok(bits_for(n - 1) as u64),
        // C(n,k) for 2 <= k <= n-2 has an odd prime factor, so lg C is not
        // an integer and the float ceiling is safe
        _ => {
            use statrs::function::gamma::ln_gamma;
            let ln_c = ln_gamma(n as f64 + 1.0)
                - ln_gamma(k as f64 + 1.0)
                - ln_gamma((n - k) as f64 + 1.0);
            Ok((ln_c / std::f64::consts::LN_2).ceil() as u64)
        }
    }
}

/// Parameters of the `ent` dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntParams {
    pub large: usize,
    pub small: usize,
}

impl Default for EntParams {
    fn default() -> Self {
        let p = PlainParams::default();
        Self {
            large: p.large,
            small: p.small,
        }
    }
}

impl EntParams {
    fn plain(&self) -> PlainParams {
        PlainParams {
            large: self.large,
            small: self.small,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plain().validate()?;
        if self.small > MAX_BLOCK {
            return Err(Error::Config(format!(
                "small block size {} exceeds 64",
                self.small
            )));
        }
        Ok(())
    }
}

/// Rank directory plus every small block stored as an enumerative code
/// word, located through explicit large-block pointers and small-block
/// pointers relative to them.
#[derive(Clone, Debug)]
pub struct EntDict {
    len: usize,
    dir: RankDirectory,
    stream: RawBitVector,
    large_ptr: PackedInts,
    small_ptr: PackedInts,
    decoder: BlockDecoder,
}

impl PartialEq for EntDict {
    fn eq(&self, o: &Self) -> bool {
        self.len == o.len
            && self.dir == o.dir
            && self.stream == o.stream
            && self.large_ptr == o.large_ptr
            && self.small_ptr == o.small_ptr
    }
}

impl EntDict {
    pub fn build(bits: &RawBitVector, params: EntParams) -> Result<Self> {
        params.validate()?;
        let dir = RankDirectory::build(bits, params.plain())?;
        let (l, s) = (params.large, params.small);
        let n = bits.len();
        let nsb = dir.num_small_blocks();
        let mut stream = BitBuilder::new();
        let mut lptr = Vec::with_capacity(n.div_ceil(l));
        let mut sptr = Vec::with_capacity(nsb);
        for sb in 0..nsb {
            let start = sb * s;
            if start % l == 0 {
                lptr.push(stream.len() as u64);
            }
            sptr.push((stream.len() - *lptr.last().unwrap() as usize) as u64);
            let t = dir.small_len(sb);
            let block = bits.get_bits(start, t as u32);
            let u = block.count_ones() as usize;
            stream.push_bits(encode_unchecked(block, t, u), code_len(t, u));
        }
        Ok(Self {
            len: n,
            stream: stream.finish(),
            large_ptr: PackedInts::from_slice(&lptr),
            small_ptr: PackedInts::from_slice(&sptr),
            decoder: BlockDecoder::new(s),
            dir,
        })
    }

    pub fn params(&self) -> EntParams {
        let p = self.dir.params();
        EntParams {
            large: p.large,
            small: p.small,
        }
    }

    /// Total length of the code stream in bits.
    pub fn code_bits(&self) -> usize {
        self.stream.len()
    }

    #[inline]
    fn block(&self, sb: usize) -> u64 {
        let p = self.dir.params();
        let lb = sb * p.small / p.large;
        let pos = (self.large_ptr.get(lb) + self.small_ptr.get(sb)) as usize;
        let t = self.dir.small_len(sb);
        let u = self.dir.small_count(sb);
        let code = self.stream.get_bits(pos, code_len(t, u));
        self.decoder.decode(code, t, u)
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        self.dir.write_to(w);
        self.large_ptr.write_to(w);
        self.small_ptr.write_to(w);
        self.stream.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: EntParams) -> Result<Self> {
        params.validate()?;
        let dir = RankDirectory::read_from(r, params.plain())?;
        let large_ptr = PackedInts::read_from(r)?;
        let small_ptr = PackedInts::read_from(r)?;
        let stream = RawBitVector::read_from(r)?;
        let len = dir.len();
        ensure(small_ptr.len() == dir.num_small_blocks(), || {
            "small pointer count mismatch".into()
        })?;
        ensure(large_ptr.len() == len.div_ceil(params.large), || {
            "large pointer count mismatch".into()
        })?;
        Ok(Self {
            len,
            dir,
            stream,
            large_ptr,
            small_ptr,
            decoder: BlockDecoder::new(params.small),
        })
    }
}

impl RankSelect for EntDict {
    fn len(&self) -> usize {
        self.len
    }

    fn count_ones(&self) -> usize {
        self.dir.count_ones()
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        check_rank(x, self.len)?;
        let s = self.dir.params().small;
        let sb = x / s;
        let block = self.block(sb);
        Ok(self.dir.rank_before_small(sb)
            + (block & low_mask((x % s + 1) as u32)).count_ones() as usize)
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.count_ones())?;
        let (sb, before) = self.dir.find_one(i);
        let block = self.block(sb);
        Ok(sb * self.dir.params().small + select_in_word(block, (i - before - 1) as u32) as usize)
    }

    fn select0(&self, i: usize) -> Result<usize> {
        check_select("select0", i, self.count_zeros())?;
        let (sb, before) = self.dir.find_zero(i);
        let t = self.dir.small_len(sb);
        let zeros = !self.block(sb) & low_mask(t as u32);
        Ok(sb * self.dir.params().small + select_in_word(zeros, (i - before - 1) as u32) as usize)
    }

    fn has_native_select0(&self) -> bool {
        true
    }

    fn space(&self) -> Space {
        Space {
            payload_bits: self.stream.len(),
            directory_bits: self.dir.size_in_bits()
                + self.large_ptr.size_in_bits()
                + self.small_ptr.size_in_bits(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_at(ps: &[u32]) -> u64 {
        ps.iter().fold(0, |b, &p| b | 1 << p)
    }

    /// Independent reference: lexicographic enumeration of position tuples.
    fn lex_tuples(t: usize, u: usize) -> Vec<u64> {
        fn rec(t: usize, u: usize, from: usize, acc: u64, out: &mut Vec<u64>) {
            if u == 0 {
                out.push(acc);
                return;
            }
            for p in from..t {
                if t - p >= u {
                    rec(t, u - 1, p + 1, acc | 1 << p, out);
                }
            }
        }
        let mut out = Vec::new();
        rec(t, u, 0, 0, &mut out);
        out
    }

    #[test]
    fn pascal_table() {
        let tab = BinomialTable::global();
        for t in 0..=64 {
            assert_eq!(tab.get(t, 0), 1);
            assert_eq!(tab.get(t, t), 1);
            for u in 1..t {
                assert_eq!(tab.get(t, u), tab.get(t - 1, u - 1) + tab.get(t - 1, u));
            }
        }
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(enum_encode(0, 4, 0), Ok(0));
        assert_eq!(code_len(4, 0), 0);
        assert_eq!(enum_encode(ones_at(&[0, 1]), 4, 2), Ok(0));
        assert_eq!(enum_encode(ones_at(&[2, 3]), 4, 2), Ok(5));
        assert!(matches!(
            enum_encode(ones_at(&[2]), 4, 2),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            enum_encode(ones_at(&[5]), 4, 1),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(enum_decode(0, 4, 0), Ok(0));
        assert_eq!(enum_decode(0, 4, 2), Ok(ones_at(&[0, 1])));
        assert!(matches!(enum_decode(6, 4, 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn order_matches_lex_enumeration() {
        for t in 0..=10 {
            for u in 0..=t {
                for (o, &b) in lex_tuples(t, u).iter().enumerate() {
                    assert_eq!(enum_encode(b, t, u), Ok(o as u64), "t={t} u={u}");
                }
            }
        }
    }

    #[test]
    fn wide_blocks_round_trip() {
        for &(t, b) in &[
            (64usize, u64::MAX),
            (64, 0x8000_0000_0000_0001),
            (63, 0x5555_5555_5555_5555 >> 1),
        ] {
            let u = b.count_ones() as usize;
            let o = enum_encode(b, t, u).unwrap();
            assert!(o < binomial(t, u));
            assert_eq!(enum_decode(o, t, u), Ok(b));
        }
    }

    #[test]
    fn decoder_tables_agree_with_walk() {
        let d = BlockDecoder::new(32);
        for u in [0usize, 1, 2, 3, 4, 28, 29, 31, 32] {
            for o in (0..binomial(32, u)).step_by(97) {
                assert_eq!(d.decode(o, 32, u), decode_walk(o, 32, u));
            }
        }
    }

    #[test]
    fn entropy_and_bound_examples() {
        let n = 10u64 << 20;
        let h = |rho: f64| entropy_bits(n, (rho * n as f64).round() as u64).unwrap() / n as f64;
        assert!((h(0.01) - 0.0808).abs() < 1e-4);
        assert!((h(0.05) - 0.2864).abs() < 1e-4);
        assert_eq!(bbound_bits(4, 2), Ok(3));
        assert_eq!(entropy_bits(10, 0), Ok(0.0));
        assert_eq!(entropy_bits(10, 10), Ok(0.0));
        assert!(entropy_bits(3, 4).is_err());
        assert!(bbound_bits(3, 4).is_err());
        assert_eq!(bbound_bits(1 << 20, 1), Ok(20));
        assert_eq!(bbound_bits(1000, 0), Ok(0));
    }

    #[test]
    fn bbound_below_entropy() {
        for &(n, m) in &[
            (100u64, 3u64),
            (1000, 10),
            (1 << 20, 1 << 10),
            (12345, 6000),
            (70, 35),
            (65, 2),
        ] {
            let b = bbound_bits(n, m).unwrap();
            assert!(
                b as f64 <= entropy_bits(n, m).unwrap().ceil(),
                "n={n} m={m}"
            );
        }
        // big-number cross-check on a value beyond the exact table
        // C(100,50) = 100891344545564193334812497256, lg = 96.35
        assert_eq!(bbound_bits(100, 50), Ok(97));
    }

    #[test]
    fn ent_examples() {
        let bits = RawBitVector::from_positions(8, &[1, 4, 5]).unwrap();
        let d = EntDict::build(&bits, EntParams::default()).unwrap();
        assert_eq!(d.select1(2), Ok(4));
        assert_eq!(d.rank1(4), Ok(2));
        let z = EntDict::build(&RawBitVector::zeros(100), EntParams::default()).unwrap();
        assert_eq!(z.rank1(99), Ok(0));
        assert_eq!(z.code_bits(), 0);
    }

    #[test]
    fn ent_code_length_within_entropy() {
        let bits = RawBitVector::from_bits(
            (0..20_000u64).map(|i| (i.wrapping_mul(2654435761) >> 7) % 17 == 0),
        );
        let d = EntDict::build(&bits, EntParams::default()).unwrap();
        let m = bits.count_ones() as u64;
        let nsb = bits.len().div_ceil(32);
        let bound = entropy_bits(bits.len() as u64, m).unwrap().ceil() as usize + nsb;
        let per_block: usize = (0..nsb)
            .map(|sb| {
                let t = 32.min(bits.len() - sb * 32);
                code_len(t, bits.count_range(sb * 32, t)) as usize
            })
            .sum();
        assert_eq!(d.code_bits(), per_block);
        assert!(d.code_bits() <= bound);
    }
}
