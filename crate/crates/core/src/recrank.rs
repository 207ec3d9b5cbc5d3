//! Sparse dictionary by recursive contraction.
//!
//! A sparse array `B` of density `p` is cut into blocks of `t` bits chosen so
//! that at most half the array survives extraction. The contracted array `B_c` holds
//! one bit per block (set iff the block has a one) and the extracted array
//! `B_e` concatenates the non-zero blocks. `B_e` is denser than `B`, so the
//! reduction repeats on it until the density exceeds 1/4. Every contracted
//! array and the final extracted array are [`PlainDict`]s.

use crate::api::{check_rank, check_select, RankSelect, Space};
use crate::bits::{BitBuilder, RawBitVector};
use crate::error::{Error, Result};
use crate::plain::{PlainDict, PlainParams};
use crate::serial::{ensure, PayloadReader, PayloadWriter};

/// Largest block size used by a reduction step.
pub const MAX_BLOCK_SIZE: usize = 1 << 16;

/// Block size for a level of density `p`: `round(1 / -lg(1 - p))`, at least
/// 2 and at most [`MAX_BLOCK_SIZE`]. A block of that size is empty with
/// probability about 1/2.
pub fn choose_block_size(p: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain {
            what: "block size density",
            value: p.to_bits(),
            min: 0,
            max: 1,
        });
    }
    if p == 1.0 {
        return Ok(2);
    }
    let t = (1.0 / -(-p).ln_1p() * std::f64::consts::LN_2).round();
    Ok((t as usize).clamp(2, MAX_BLOCK_SIZE))
}

/// Length of the extracted array of `bits` under block size `t`.
fn extracted_len(bits: &RawBitVector, t: usize) -> usize {
    (0..bits.len().div_ceil(t))
        .map(|b| {
            let start = b * t;
            let width = t.min(bits.len() - start);
            if bits.count_range(start, width) > 0 {
                width
            } else {
                0
            }
        })
        .sum()
}

/// Block size for one reduction step over `bits`.
///
/// [`choose_block_size`] assumes independent bits, which holds only for the
/// first level: an extracted array is made of non-zero blocks, so its ones are
/// spread more evenly and the formula leaves more than half of the next
/// level's blocks non-zero. Shrink `t` until the extracted array is at most
/// half as long, so the density at least doubles per level.
fn fit_block_size(bits: &RawBitVector, ones: usize) -> Result<usize> {
    let t0 = choose_block_size(ones as f64 / bits.len() as f64)?;
    let halves = |t| extracted_len(bits, t) * 2 <= bits.len();
    if halves(t0) || !halves(2) {
        return Ok(t0);
    }
    // largest t in [2, t0) that halves, assuming monotonicity
    let (mut lo, mut hi) = (2, t0);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if halves(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The closed-form payload bound `1.44 m lg(n/m) + m`.
pub fn size_bound(n: usize, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    1.44 * m as f64 * (n as f64 / m as f64).log2() + m as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecRankParams {
    /// Directory parameters of every contracted and the final array.
    pub plain: PlainParams,
}

impl RecRankParams {
    pub fn validate(&self) -> Result<()> {
        self.plain.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    t: usize,
    contracted: PlainDict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecRankDict {
    len: usize,
    ones: usize,
    levels: Vec<Level>,
    last: PlainDict,
}

impl RecRankDict {
    pub fn build(bits: &RawBitVector, params: RecRankParams) -> Result<Self> {
        Self::build_with(bits, params, fit_block_size)
    }

    fn build_with(
        bits: &RawBitVector,
        params: RecRankParams,
        block_size: impl Fn(&RawBitVector, usize) -> Result<usize>,
    ) -> Result<Self> {
        params.validate()?;
        let len = bits.len();
        let ones = bits.count_ones();
        if ones == 0 {
            return Ok(Self {
                len,
                ones,
                levels: Vec::new(),
                last: PlainDict::build(RawBitVector::new(), params.plain)?,
            });
        }
        let mut levels = Vec::new();
        let mut cur = bits.clone();
        while ones * 4 <= cur.len() {
            let t = block_size(&cur, ones)?;
            let nblocks = cur.len().div_ceil(t);
            let mut contracted = BitBuilder::with_capacity(nblocks);
            let mut extracted = BitBuilder::with_capacity(cur.len() / 2);
            for b in 0..nblocks {
                let start = b * t;
                let width = t.min(cur.len() - start);
                let nonzero = cur.count_range(start, width) > 0;
                contracted.push(nonzero);
                if nonzero {
                    extracted.extend_from(&cur, start, width);
                }
            }
            if extracted.len() == cur.len() {
                // every block is non-zero, so contracting cannot help
                break;
            }
            levels.push(Level {
                t,
                contracted: PlainDict::build(contracted.finish(), params.plain)?,
            });
            cur = extracted.finish();
        }
        Ok(Self {
            len,
            ones,
            levels,
            last: PlainDict::build(cur, params.plain)?,
        })
    }

    pub fn plain_params(&self) -> PlainParams {
        self.last.params()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Block size of each level, outermost first.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.t).collect()
    }

    /// Length of the final extracted array.
    pub fn final_len(&self) -> usize {
        self.last.len()
    }

    pub fn write_to(&self, w: &mut PayloadWriter) {
        w.put_usize(self.len);
        w.put_usize(self.levels.len());
        for level in &self.levels {
            w.put_usize(level.t);
            level.contracted.write_to(w);
        }
        self.last.write_to(w);
    }

    pub fn read_from(r: &mut PayloadReader<'_>, params: RecRankParams) -> Result<Self> {
        params.validate()?;
        let len = r.get_usize()?;
        let nlevels = r.get_usize()?;
        ensure(nlevels <= 64, || format!("{nlevels} reduction levels"))?;
        let mut levels = Vec::with_capacity(nlevels);
        let mut expect = len;
        for _ in 0..nlevels {
            let t = r.get_usize()?;
            ensure((2..=MAX_BLOCK_SIZE).contains(&t), || {
                format!("block size {t}")
            })?;
            let contracted = PlainDict::read_from(r, params.plain)?;
            ensure(contracted.len() == expect.div_ceil(t), || {
                "contracted array length mismatch".into()
            })?;
            // a non-zero last block keeps its short length
            let nblocks = contracted.len();
            let short = nblocks * t - expect;
            expect = contracted.count_ones() * t;
            if nblocks > 0 && contracted.bits().bit(nblocks - 1) {
                expect -= short;
            }
            levels.push(Level { t, contracted });
        }
        let last = PlainDict::read_from(r, params.plain)?;
        let ones = last.count_ones();
        ensure(ones == 0 || last.len() == expect, || {
            "extracted array length mismatch".into()
        })?;
        Ok(Self {
            len,
            ones,
            levels,
            last,
        })
    }
}

impl RankSelect for RecRankDict {
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
        let mut x = x;
        for level in &self.levels {
            let b = x / level.t;
            let r = level.contracted.rank1_unchecked(b);
            if level.contracted.bits().bit(b) {
                x = (r - 1) * level.t + x % level.t;
            } else if r == 0 {
                return Ok(0);
            } else {
                // all ones of the first r non-zero blocks
                x = r * level.t - 1;
            }
        }
        Ok(self.last.rank1_unchecked(x))
    }

    fn select1(&self, i: usize) -> Result<usize> {
        check_select("select1", i, self.ones)?;
        let mut e = self.last.select1_unchecked(i);
        for level in self.levels.iter().rev() {
            let block = level.contracted.select1_unchecked(e / level.t + 1);
            e = block * level.t + e % level.t;
        }
        Ok(e)
    }

    fn space(&self) -> Space {
        self.levels
            .iter()
            .map(|l| l.contracted.space())
            .fold(self.last.space(), |a, b| a + b)
    }
}
