//! The dictionary interface shared by every structure.
//!
//! Conventions: `rank1(x)` counts ones in `B[0..=x]` (inclusive) and
//! `select1(i)` returns the position of the `i`-th one with `i` starting at 1.
//! The zero-side operations follow the same shape.

use twox_hash::XxHash64;

use crate::bits::RawBitVector;
use crate::enumcode::{entropy_bits, EntDict, EntParams};
use crate::error::{Error, Result};
use crate::esp::{EspDict, EspParams};
use crate::plain::{PlainDict, PlainParams};
use crate::recrank::{RecRankDict, RecRankParams};
use crate::sdarray::{DArray, DArrayParams, SArray};
use crate::serial::{PayloadReader, PayloadWriter};
use crate::vcode::{PlaneOffsets, VcodeDict, VcodeParams};

/// Exact space occupied by a dictionary, split into the encoded bit data
/// (`payload`) and the auxiliary indexes (`directory`).
///
/// Fixed-size scalar header fields (lengths, parameters) are not counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Space {
    pub payload_bits: usize,
    pub directory_bits: usize,
}

impl Space {
    pub fn total_bits(&self) -> usize {
        self.payload_bits + self.directory_bits
    }
}

impl std::ops::Add for Space {
    type Output = Space;

    fn add(self, o: Space) -> Space {
        Space {
            payload_bits: self.payload_bits + o.payload_bits,
            directory_bits: self.directory_bits + o.directory_bits,
        }
    }
}

pub trait RankSelect {
    /// Universe size `n`.
    fn len(&self) -> usize;

    /// Number of ones `m`.
    fn count_ones(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    /// Number of ones in `B[0..=x]`.
    fn rank1(&self, x: usize) -> Result<usize>;

    /// Position of the `i`-th one, `1 <= i <= m`.
    fn select1(&self, i: usize) -> Result<usize>;

    /// Number of zeros in `B[0..=x]`.
    fn rank0(&self, x: usize) -> Result<usize> {
        Ok(x + 1 - self.rank1(x)?)
    }

    /// Position of the `i`-th zero, `1 <= i <= n - m`.
    fn select0(&self, i: usize) -> Result<usize> {
        select0_by_search(self, i)
    }

    fn get(&self, x: usize) -> Result<bool> {
        let r = self.rank1(x)?;
        Ok(if x == 0 {
            r == 1
        } else {
            r > self.rank1(x - 1)?
        })
    }

    /// Whether `select0` uses a dedicated index rather than a search over
    /// `select1`.
    fn has_native_select0(&self) -> bool {
        false
    }

    fn space(&self) -> Space;
}

#[inline]
pub(crate) fn check_rank(x: usize, n: usize) -> Result<()> {
    if x < n {
        Ok(())
    } else {
        Err(Error::Range { index: x, len: n })
    }
}

#[inline]
pub(crate) fn check_select(what: &'static str, i: usize, count: usize) -> Result<()> {
    if i >= 1 && i <= count {
        Ok(())
    } else {
        Err(Error::domain(what, i as u64, 1, count as u64))
    }
}

/// `select0` for structures without a zero-side index.
///
/// The `i`-th zero sits at `i - 1 + j` where `j` is the number of ones before
/// it, i.e. the smallest `j` with `select1(j + 1) - j > i - 1`. Since
/// `select1(j + 1) - j` is non-decreasing, `j` is found by binary search over
/// `[0, m]`.
pub fn select0_by_search<D: RankSelect + ?Sized>(d: &D, i: usize) -> Result<usize> {
    check_select("select0", i, d.count_zeros())?;
    let target = i - 1;
    let (mut lo, mut hi) = (0usize, d.count_ones());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if d.select1(mid + 1)? - mid > target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(target + lo)
}

/// The structures a [`Dict`] can hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DictKind {
    Plain,
    Ent,
    Esp,
    RecRank,
    Vcode,
    SArray,
    DArray,
}

impl DictKind {
    pub const ALL: [DictKind; 7] = [
        DictKind::Plain,
        DictKind::Ent,
        DictKind::Esp,
        DictKind::RecRank,
        DictKind::Vcode,
        DictKind::SArray,
        DictKind::DArray,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DictKind::Plain => "plain",
            DictKind::Ent => "ent",
            DictKind::Esp => "esp",
            DictKind::RecRank => "recrank",
            DictKind::Vcode => "vcode",
            DictKind::SArray => "sarray",
            DictKind::DArray => "darray",
        }
    }

    /// Container tag byte.
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL
            .get(tag as usize)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown structure tag {tag}")))
    }
}

impl std::fmt::Display for DictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DictKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown structure {s:?}")))
    }
}

/// Build parameters for every structure; only the entry for the requested
/// kind is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub plain: PlainParams,
    pub ent: EntParams,
    pub esp: EspParams,
    pub recrank: RecRankParams,
    pub vcode: VcodeParams,
    pub sarray: DArrayParams,
    pub darray: DArrayParams,
}

/// Parses `4096` or `2^12`.
fn parse_size(value: &str) -> Result<usize> {
    let bad = || Error::Config(format!("invalid size {value:?}"));
    match value.split_once('^') {
        Some((base, exp)) => {
            let base: usize = base.trim().parse().map_err(|_| bad())?;
            let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
            base.checked_pow(exp).ok_or_else(bad)
        }
        None => value.trim().parse().map_err(|_| bad()),
    }
}

impl Params {
    /// Names accepted by [`Params::set`].
    pub const KEYS: [&'static str; 18] = [
        "plain.l",
        "plain.s",
        "ent.l",
        "ent.s",
        "esp.k",
        "esp.l",
        "esp.s",
        "esp.slack",
        "recrank.l",
        "recrank.s",
        "vcode.p",
        "vcode.offsets",
        "sarray.L",
        "sarray.L2",
        "sarray.L3",
        "darray.L",
        "darray.L2",
        "darray.L3",
    ];

    /// Sets one parameter from a `key`/`value` pair such as `esp.k=2^12` or
    /// `vcode.offsets=sampled`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "vcode.offsets" {
            self.vcode.offsets = match value {
                "full" => PlaneOffsets::Full,
                "sampled" => PlaneOffsets::Sampled,
                _ => {
                    return Err(Error::Config(format!(
                        "vcode.offsets must be full or sampled, not {value:?}"
                    )))
                }
            };
            return Ok(());
        }
        let v = parse_size(value)?;
        let slot = match key {
            "plain.l" => &mut self.plain.large,
            "plain.s" => &mut self.plain.small,
            "ent.l" => &mut self.ent.large,
            "ent.s" => &mut self.ent.small,
            "esp.k" => &mut self.esp.superblock,
            "esp.l" => &mut self.esp.large,
            "esp.s" => &mut self.esp.small,
            "esp.slack" => &mut self.esp.slack,
            "recrank.l" => &mut self.recrank.plain.large,
            "recrank.s" => &mut self.recrank.plain.small,
            "vcode.p" => &mut self.vcode.p,
            "sarray.L" => &mut self.sarray.block,
            "sarray.L2" => &mut self.sarray.span,
            "sarray.L3" => &mut self.sarray.stride,
            "darray.L" => &mut self.darray.block,
            "darray.L2" => &mut self.darray.span,
            "darray.L3" => &mut self.darray.stride,
            _ => {
                return Err(Error::Config(format!(
                    "unknown parameter {key:?}; expected one of {}",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = v;
        Ok(())
    }

    pub fn validate(&self, kind: DictKind) -> Result<()> {
        match kind {
            DictKind::Plain => self.plain.validate(),
            DictKind::Ent => self.ent.validate(),
            DictKind::Esp => self.esp.validate(),
            DictKind::RecRank => self.recrank.validate(),
            DictKind::Vcode => self.vcode.validate(),
            DictKind::SArray => self.sarray.validate(),
            DictKind::DArray => self.darray.validate().and(self.plain.validate()),
        }
    }

    fn block(&self, kind: DictKind) -> Vec<u64> {
        let u = |v: usize| v as u64;
        match kind {
            DictKind::Plain => vec![u(self.plain.large), u(self.plain.small)],
            DictKind::Ent => vec![u(self.ent.large), u(self.ent.small)],
            DictKind::Esp => vec![
                u(self.esp.superblock),
                u(self.esp.large),
                u(self.esp.small),
                u(self.esp.slack),
            ],
            DictKind::RecRank => vec![u(self.recrank.plain.large), u(self.recrank.plain.small)],
            DictKind::Vcode => vec![
                u(self.vcode.p),
                (self.vcode.offsets == PlaneOffsets::Sampled) as u64,
            ],
            DictKind::SArray => vec![
                u(self.sarray.block),
                u(self.sarray.span),
                u(self.sarray.stride),
            ],
            DictKind::DArray => vec![
                u(self.darray.block),
                u(self.darray.span),
                u(self.darray.stride),
                u(self.plain.large),
                u(self.plain.small),
            ],
        }
    }

    fn from_block(kind: DictKind, block: &[u64]) -> Result<Self> {
        let want = Self::default().block(kind).len();
        if block.len() != want {
            return Err(Error::Format(format!(
                "{kind} parameter block has {} values, expected {want}",
                block.len()
            )));
        }
        let v: Vec<usize> = block
            .iter()
            .map(|&x| {
                usize::try_from(x).map_err(|_| Error::Format(format!("parameter {x} overflows")))
            })
            .collect::<Result<_>>()?;
        let mut p = Self::default();
        match kind {
            DictKind::Plain => {
                p.plain = PlainParams {
                    large: v[0],
                    small: v[1],
                }
            }
            DictKind::Ent => {
                p.ent = EntParams {
                    large: v[0],
                    small: v[1],
                }
            }
            DictKind::Esp => {
                p.esp = EspParams {
                    superblock: v[0],
                    large: v[1],
                    small: v[2],
                    slack: v[3],
                }
            }
            DictKind::RecRank => {
                p.recrank.plain = PlainParams {
                    large: v[0],
                    small: v[1],
                }
            }
            DictKind::Vcode => {
                p.vcode = VcodeParams {
                    p: v[0],
                    offsets: match v[1] {
                        0 => PlaneOffsets::Full,
                        1 => PlaneOffsets::Sampled,
                        _ => return Err(Error::Format(format!("vcode offset mode {}", v[1]))),
                    },
                }
            }
            DictKind::SArray => {
                p.sarray = DArrayParams {
                    block: v[0],
                    span: v[1],
                    stride: v[2],
                }
            }
            DictKind::DArray => {
                p.darray = DArrayParams {
                    block: v[0],
                    span: v[1],
                    stride: v[2],
                };
                p.plain = PlainParams {
                    large: v[3],
                    small: v[4],
                };
            }
        }
        p.validate(kind)
            .map_err(|e| Error::Format(format!("bad parameter block: {e}")))?;
        Ok(p)
    }
}

/// Builder input: a bit vector, or a strictly increasing position list over
/// a universe of `len` bits.
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Bits(&'a RawBitVector),
    Positions { len: usize, positions: &'a [usize] },
}

impl Source<'_> {
    fn bits(&self) -> Result<std::borrow::Cow<'_, RawBitVector>> {
        match *self {
            Source::Bits(b) => Ok(std::borrow::Cow::Borrowed(b)),
            Source::Positions { len, positions } => {
                RawBitVector::from_positions(len, positions).map(std::borrow::Cow::Owned)
            }
        }
    }

    fn positions(&self) -> Result<(usize, std::borrow::Cow<'_, [usize]>)> {
        match *self {
            Source::Bits(b) => Ok((b.len(), std::borrow::Cow::Owned(b.to_positions()))),
            Source::Positions { len, positions } => {
                if let Some(&last) = positions.last() {
                    if last >= len {
                        return Err(Error::Input(format!(
                            "position {last} not below universe size {len}"
                        )));
                    }
                }
                if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
                    return Err(Error::Input(format!(
                        "positions must be strictly increasing ({} then {})",
                        w[0], w[1]
                    )));
                }
                Ok((len, std::borrow::Cow::Borrowed(positions)))
            }
        }
    }
}

/// Any of the dictionaries behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum Dict {
    Plain(PlainDict),
    Ent(EntDict),
    Esp(EspDict),
    RecRank(RecRankDict),
    Vcode(VcodeDict),
    SArray(SArray),
    DArray(DArray),
}

macro_rules! dispatch {
    ($self:expr, $d:ident => $e:expr) => {
        match $self {
            Dict::Plain($d) => $e,
            Dict::Ent($d) => $e,
            Dict::Esp($d) => $e,
            Dict::RecRank($d) => $e,
            Dict::Vcode($d) => $e,
            Dict::SArray($d) => $e,
            Dict::DArray($d) => $e,
        }
    };
}

/// Builds a dictionary of `kind` over `source`.
pub fn build(kind: DictKind, source: Source<'_>, params: &Params) -> Result<Dict> {
    params.validate(kind)?;
    Ok(match kind {
        DictKind::Plain => {
            Dict::Plain(PlainDict::build(source.bits()?.into_owned(), params.plain)?)
        }
        DictKind::Ent => Dict::Ent(EntDict::build(&*source.bits()?, params.ent)?),
        DictKind::Esp => Dict::Esp(EspDict::build(&*source.bits()?, params.esp)?),
        DictKind::RecRank => Dict::RecRank(RecRankDict::build(&*source.bits()?, params.recrank)?),
        DictKind::Vcode => {
            let (len, pos) = source.positions()?;
            Dict::Vcode(VcodeDict::from_positions(len, &pos, params.vcode)?)
        }
        DictKind::SArray => {
            let (len, pos) = source.positions()?;
            Dict::SArray(SArray::from_positions(len, &pos, params.sarray)?)
        }
        DictKind::DArray => Dict::DArray(DArray::build(
            source.bits()?.into_owned(),
            params.darray,
            params.plain,
        )?),
    })
}

const MAGIC: &[u8; 8] = b"RSDICT01";
const FORMAT_VERSION: u16 = 1;

impl Dict {
    pub fn kind(&self) -> DictKind {
        match self {
            Dict::Plain(_) => DictKind::Plain,
            Dict::Ent(_) => DictKind::Ent,
            Dict::Esp(_) => DictKind::Esp,
            Dict::RecRank(_) => DictKind::RecRank,
            Dict::Vcode(_) => DictKind::Vcode,
            Dict::SArray(_) => DictKind::SArray,
            Dict::DArray(_) => DictKind::DArray,
        }
    }

    /// The parameters the dictionary was built with, as stored in its
    /// container.
    pub fn params(&self) -> Params {
        let mut p = Params::default();
        match self {
            Dict::Plain(d) => p.plain = d.params(),
            Dict::Ent(d) => p.ent = d.params(),
            Dict::Esp(d) => p.esp = d.params(),
            Dict::RecRank(d) => p.recrank.plain = d.plain_params(),
            Dict::Vcode(d) => p.vcode = d.params(),
            Dict::SArray(d) => p.sarray = d.params(),
            Dict::DArray(d) => {
                p.darray = d.params();
                p.plain = d.plain_params();
            }
        }
        p
    }

    pub fn size_report(&self) -> SizeReport {
        SizeReport::new(self.len(), self.count_ones(), self.space())
    }

    /// Serializes into the self-describing container:
    /// magic, `u16` version, `u8` tag, `u32` parameter-block length, the
    /// parameter block (`u64` words), `u64` payload bit length, payload words
    /// and an xxh64 checksum of everything before it. Integers are
    /// little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let kind = self.kind();
        let block = self.params().block(kind);
        let mut w = PayloadWriter::new();
        dispatch!(self, d => d.write_to(&mut w));
        let payload = w.into_words();
        let mut out =
            Vec::with_capacity(8 + 2 + 1 + 4 + block.len() * 8 + 8 + payload.len() * 8 + 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(kind.tag());
        out.extend_from_slice(&((block.len() * 8) as u32).to_le_bytes());
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&((payload.len() * 64) as u64).to_le_bytes());
        for v in payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let sum = XxHash64::oneshot(0, &out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fmt = |m: &str| Error::Format(m.to_string());
        if bytes.len() < 8 + 2 + 1 + 4 + 8 + 8 {
            return Err(fmt("container truncated"));
        }
        let (body, sum) = bytes.split_at(bytes.len() - 8);
        if XxHash64::oneshot(0, body) != u64::from_le_bytes(sum.try_into().unwrap()) {
            return Err(fmt("checksum mismatch"));
        }
        if &body[..8] != MAGIC {
            return Err(fmt("bad magic"));
        }
        let version = u16::from_le_bytes([body[8], body[9]]);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let kind = DictKind::from_tag(body[10])?;
        let plen = u32::from_le_bytes(body[11..15].try_into().unwrap()) as usize;
        let rest = &body[15..];
        if !plen.is_multiple_of(8) || rest.len() < plen + 8 {
            return Err(fmt("parameter block truncated"));
        }
        let block = le_words(&rest[..plen]);
        let params = Params::from_block(kind, &block)?;
        let rest = &rest[plen..];
        let bits = u64::from_le_bytes(rest[..8].try_into().unwrap());
        let rest = &rest[8..];
        if bits % 64 != 0 || bits / 8 != rest.len() as u64 {
            return Err(fmt("payload length mismatch"));
        }
        let words = le_words(rest);
        let mut r = PayloadReader::new(&words);
        let dict = match kind {
            DictKind::Plain => Dict::Plain(PlainDict::read_from(&mut r, params.plain)?),
            DictKind::Ent => Dict::Ent(EntDict::read_from(&mut r, params.ent)?),
            DictKind::Esp => Dict::Esp(EspDict::read_from(&mut r, params.esp)?),
            DictKind::RecRank => Dict::RecRank(RecRankDict::read_from(&mut r, params.recrank)?),
            DictKind::Vcode => Dict::Vcode(VcodeDict::read_from(&mut r, params.vcode)?),
            DictKind::SArray => Dict::SArray(SArray::read_from(&mut r, params.sarray)?),
            DictKind::DArray => {
                Dict::DArray(DArray::read_from(&mut r, params.darray, params.plain)?)
            }
        };
        r.finish()?;
        Ok(dict)
    }
}

fn le_words(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

impl RankSelect for Dict {
    fn len(&self) -> usize {
        dispatch!(self, d => d.len())
    }

    fn count_ones(&self) -> usize {
        dispatch!(self, d => d.count_ones())
    }

    fn rank1(&self, x: usize) -> Result<usize> {
        dispatch!(self, d => d.rank1(x))
    }

    fn select1(&self, i: usize) -> Result<usize> {
        dispatch!(self, d => d.select1(i))
    }

    fn rank0(&self, x: usize) -> Result<usize> {
        dispatch!(self, d => d.rank0(x))
    }

    fn select0(&self, i: usize) -> Result<usize> {
        dispatch!(self, d => d.select0(i))
    }

    fn get(&self, x: usize) -> Result<bool> {
        dispatch!(self, d => d.get(x))
    }

    fn has_native_select0(&self) -> bool {
        dispatch!(self, d => d.has_native_select0())
    }

    fn space(&self) -> Space {
        dispatch!(self, d => d.space())
    }
}

/// Space of a dictionary against the raw length and the zero-order entropy
/// bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeReport {
    pub n: usize,
    pub m: usize,
    pub payload_bits: usize,
    pub directory_bits: usize,
    /// `n H0(B)` in bits.
    pub nh0_bits: f64,
}

impl SizeReport {
    pub fn new(n: usize, m: usize, space: Space) -> Self {
        Self {
            n,
            m,
            payload_bits: space.payload_bits,
            directory_bits: space.directory_bits,
            nh0_bits: entropy_bits(n as u64, m as u64).unwrap_or(0.0),
        }
    }

    pub fn total_bits(&self) -> usize {
        self.payload_bits + self.directory_bits
    }

    /// Total size as a percentage of `n`.
    pub fn pct_of_n(&self) -> f64 {
        pct(self.total_bits() as f64, self.n as f64)
    }

    /// Total size as a percentage of `n H0`; infinite when the entropy is 0.
    pub fn pct_of_nh0(&self) -> f64 {
        pct(self.total_bits() as f64, self.nh0_bits)
    }

    /// `n H0` as a percentage of `n`.
    pub fn entropy_pct(&self) -> f64 {
        pct(self.nh0_bits, self.n as f64)
    }
}

fn pct(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * a / b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_bits(n: usize, one_in: u64, seed: u64) -> RawBitVector {
        let mut s = seed;
        RawBitVector::from_bits((0..n).map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 33).is_multiple_of(one_in)
        }))
    }

    #[test]
    fn build_from_positions() {
        let src = Source::Positions {
            len: 8,
            positions: &[1, 4, 5],
        };
        for kind in DictKind::ALL {
            let d = build(kind, src, &Params::default()).unwrap();
            assert_eq!(d.count_ones(), 3, "{kind}");
            assert_eq!(d.select1(2), Ok(4), "{kind}");
            assert_eq!(d.rank0(4), Ok(3), "{kind}");
            assert_eq!(d.select0(3), Ok(3), "{kind}");
        }
    }

    #[test]
    fn build_rejects_bad_input() {
        for kind in DictKind::ALL {
            for positions in [&[3usize, 3][..], &[5, 2], &[8]] {
                let src = Source::Positions { len: 8, positions };
                assert!(
                    matches!(build(kind, src, &Params::default()), Err(Error::Input(_))),
                    "{kind}"
                );
            }
        }
        let mut p = Params::default();
        p.set("vcode.p", "7").unwrap();
        let src = Source::Positions {
            len: 8,
            positions: &[1],
        };
        assert!(matches!(
            build(DictKind::Vcode, src, &p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn params_from_strings() {
        let mut p = Params::default();
        p.set("esp.k", "2^12").unwrap();
        p.set("sarray.L3", "256").unwrap();
        p.set("vcode.offsets", "sampled").unwrap();
        assert_eq!(p.esp.superblock, 4096);
        assert_eq!(p.sarray.stride, 256);
        assert_eq!(p.darray.stride, 32);
        assert_eq!(p.vcode.offsets, PlaneOffsets::Sampled);
        assert!(p.set("esp.q", "1").is_err());
        assert!(p.set("esp.k", "lots").is_err());
        assert!(p.set("vcode.offsets", "some").is_err());
    }

    #[test]
    fn kind_names_and_tags() {
        for kind in DictKind::ALL {
            assert_eq!(kind.name().parse::<DictKind>(), Ok(kind));
            assert_eq!(DictKind::from_tag(kind.tag()), Ok(kind));
        }
        assert!("rrr".parse::<DictKind>().is_err());
        assert!(DictKind::from_tag(7).is_err());
    }

    #[test]
    fn size_accounting() {
        let bits = lcg_bits(50_000, 20, 3);
        for kind in DictKind::ALL {
            let d = build(kind, Source::Bits(&bits), &Params::default()).unwrap();
            let r = d.size_report();
            assert_eq!(r.total_bits(), d.space().total_bits());
            assert_eq!(r.payload_bits + r.directory_bits, r.total_bits());
            if kind == DictKind::Plain {
                assert_eq!(r.payload_bits, 50_000);
            }
        }
    }

    #[test]
    fn esp_size_near_entropy() {
        let bits = lcg_bits(1 << 20, 20, 11);
        let d = build(DictKind::Esp, Source::Bits(&bits), &Params::default()).unwrap();
        let r = d.size_report();
        let h0 = r.entropy_pct() / 100.0;
        let ratio = r.total_bits() as f64 / r.n as f64;
        // code words stay within a rounding bit per small block of H0; the
        // directory is the unary counts (m + n/s) plus LB ranks (lg k per l)
        let payload = r.payload_bits as f64 / r.n as f64;
        assert!(
            payload >= h0 && payload <= h0 + 1.0 / 32.0,
            "payload {payload} vs H0 {h0}"
        );
        let budget = h0 + 0.05 + 1.0 / 32.0 + 12.0 / 256.0 + 0.01;
        assert!(ratio <= budget, "ratio {ratio} vs H0 {h0}");
    }

    #[test]
    fn container_round_trip() {
        let bits = lcg_bits(10_000, 9, 5);
        let mut p = Params::default();
        p.set("vcode.offsets", "sampled").unwrap();
        for kind in DictKind::ALL {
            let d = build(kind, Source::Bits(&bits), &p).unwrap();
            let bytes = d.to_bytes();
            assert_eq!(&bytes[..8], b"RSDICT01");
            let back = Dict::from_bytes(&bytes).unwrap();
            assert_eq!(back, d, "{kind}");
            assert_eq!(back.to_bytes(), bytes, "{kind}");
        }
    }

    #[test]
    fn container_detects_corruption() {
        let bits = lcg_bits(4000, 5, 8);
        for kind in DictKind::ALL {
            let bytes = build(kind, Source::Bits(&bits), &Params::default())
                .unwrap()
                .to_bytes();
            for at in [0, 10, 20, bytes.len() / 2, bytes.len() - 9, bytes.len() - 1] {
                let mut bad = bytes.clone();
                bad[at] ^= 0x10;
                assert!(
                    matches!(Dict::from_bytes(&bad), Err(Error::Format(_))),
                    "{kind} @ {at}"
                );
            }
            assert!(Dict::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        }
    }
}
