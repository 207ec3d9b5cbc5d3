//! Dataset generation, oracle verification and timing for the `rsdict`
//! harness.
//!
//! Bit vectors come from [`Xoshiro256PlusPlus`] seeded with
//! `seed_from_u64(seed)`; each bit is an independent Bernoulli draw, or with
//! `exact_m` a uniform `m`-subset of positions.

use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rsdict::{build, Dict, DictKind, Params, RankSelect, RawBitVector, Source};

pub const CSV_HEADER: [&str; 9] = [
    "structure",
    "n",
    "density",
    "seed",
    "op",
    "ns_per_op",
    "size_bits",
    "pct_of_n",
    "pct_of_nH0",
];

/// Exhaustive verification is used up to this length.
pub const EXHAUSTIVE_LIMIT: usize = 1 << 14;

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// `n` bits, each one with probability `density`.
pub fn generate(n: usize, density: f64, seed: u64) -> Result<RawBitVector> {
    ensure!(
        (0.0..=1.0).contains(&density),
        "density {density} outside [0, 1]"
    );
    let mut r = rng(seed);
    Ok(RawBitVector::from_bits(
        (0..n).map(|_| r.random_bool(density)),
    ))
}

/// `n` bits with exactly `round(density * n)` ones at uniform positions.
pub fn generate_exact(n: usize, density: f64, seed: u64) -> Result<RawBitVector> {
    ensure!(
        (0.0..=1.0).contains(&density),
        "density {density} outside [0, 1]"
    );
    let m = (density * n as f64).round() as usize;
    let mut pos = rand::seq::index::sample(&mut rng(seed), n, m).into_vec();
    pos.sort_unstable();
    Ok(RawBitVector::from_positions(n, &pos)?)
}

/// Hand-made vectors that stress block boundaries and degenerate shapes.
pub fn adversarial(n: usize) -> Vec<(&'static str, RawBitVector)> {
    assert!(n >= 16);
    let from = |f: &dyn Fn(usize) -> bool| RawBitVector::from_bits((0..n).map(f));
    vec![
        ("empty", RawBitVector::zeros(n)),
        ("full", RawBitVector::ones(n)),
        ("first", from(&|i| i == 0)),
        ("last", from(&|i| i == n - 1)),
        ("ends", from(&|i| i == 0 || i == n - 1)),
        ("alternating", from(&|i| i % 2 == 0)),
        ("runs", from(&|i| i % 1000 < 100)),
        ("periodic", from(&|i| i % 7 == 3)),
        ("dense-head", from(&|i| i < n / 3)),
        (
            "sparse-clusters",
            from(&|i| i % 5003 < 3 || i % 65_537 == 11),
        ),
        ("almost-full", from(&|i| i % 997 != 0)),
    ]
}

/// Brute-force answers from one linear scan of the bits.
pub struct Oracle {
    len: usize,
    ranks: Vec<u32>,
    ones: Vec<u32>,
    zeros: Vec<u32>,
}

impl Oracle {
    pub fn new(bits: &RawBitVector) -> Self {
        assert!(bits.len() < u32::MAX as usize);
        let mut ranks = Vec::with_capacity(bits.len());
        let (mut ones, mut zeros) = (Vec::new(), Vec::new());
        for x in 0..bits.len() {
            if bits.bit(x) {
                ones.push(x as u32);
            } else {
                zeros.push(x as u32);
            }
            ranks.push(ones.len() as u32);
        }
        Self {
            len: bits.len(),
            ranks,
            ones,
            zeros,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones.len()
    }

    pub fn rank1(&self, x: usize) -> usize {
        self.ranks[x] as usize
    }

    pub fn select1(&self, i: usize) -> usize {
        self.ones[i - 1] as usize
    }

    pub fn select0(&self, i: usize) -> usize {
        self.zeros[i - 1] as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Rank,
    Select,
    Select0,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Rank => "rank",
            Op::Select => "select",
            Op::Select0 => "select0",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rank" => Op::Rank,
            "select" => Op::Select,
            "select0" => Op::Select0,
            _ => bail!("unknown query kind {s:?}; expected rank, select or select0"),
        })
    }
}

/// How many queries of each kind [`verify_dict`] issues.
#[derive(Clone, Copy, Debug)]
pub enum Coverage {
    /// Every position and every select rank.
    Exhaustive,
    /// This many uniformly drawn arguments per query kind.
    Random(usize, u64),
}

impl Coverage {
    pub fn for_len(n: usize, ops: usize, seed: u64) -> Self {
        if n <= EXHAUSTIVE_LIMIT {
            Coverage::Exhaustive
        } else {
            Coverage::Random(ops, seed)
        }
    }
}

fn arguments(coverage: Coverage, lo: usize, hi: usize, salt: u64) -> Vec<usize> {
    if hi < lo {
        return Vec::new();
    }
    match coverage {
        Coverage::Exhaustive => (lo..=hi).collect(),
        Coverage::Random(count, seed) => {
            let mut r = rng(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (0..count).map(|_| r.random_range(lo..=hi)).collect()
        }
    }
}

/// Checks every query kind of `dict` against `oracle`, including the error
/// cases at the domain edges. Returns a description of the first mismatch.
pub fn verify_dict(dict: &Dict, oracle: &Oracle, coverage: Coverage) -> Result<(), String> {
    let n = oracle.len();
    let m = oracle.count_ones();
    let ctx = |op: &str, arg: usize, want: &dyn std::fmt::Debug, got: &dyn std::fmt::Debug| {
        format!(
            "{} diverges: {op}({arg}) expected {want:?}, got {got:?} (n={n}, m={m})",
            dict.kind()
        )
    };
    if dict.len() != n || dict.count_ones() != m {
        return Err(format!(
            "{} reports n={} m={}, oracle n={n} m={m}",
            dict.kind(),
            dict.len(),
            dict.count_ones()
        ));
    }
    let positions = if n == 0 {
        Vec::new()
    } else {
        arguments(coverage, 0, n - 1, 1)
    };
    for x in positions {
        let want = oracle.rank1(x);
        let got = dict.rank1(x);
        if got != Ok(want) {
            return Err(ctx("rank1", x, &want, &got));
        }
        let got = dict.rank0(x);
        if got != Ok(x + 1 - want) {
            return Err(ctx("rank0", x, &(x + 1 - want), &got));
        }
    }
    for i in arguments(coverage, 1, m, 2) {
        let got = dict.select1(i);
        if got != Ok(oracle.select1(i)) {
            return Err(ctx("select1", i, &oracle.select1(i), &got));
        }
    }
    for i in arguments(coverage, 1, n - m, 3) {
        let got = dict.select0(i);
        if got != Ok(oracle.select0(i)) {
            return Err(ctx("select0", i, &oracle.select0(i), &got));
        }
    }
    let edges: [(&str, rsdict::Result<usize>); 5] = [
        ("rank1", dict.rank1(n)),
        ("select1", dict.select1(0)),
        ("select1", dict.select1(m + 1)),
        ("select0", dict.select0(0)),
        ("select0", dict.select0(n - m + 1)),
    ];
    for (op, got) in edges {
        if got.is_ok() {
            return Err(format!(
                "{} accepted an out-of-domain {op}: {got:?}",
                dict.kind()
            ));
        }
    }
    Ok(())
}

/// Builds `kind`, checks it against the oracle, then checks that a
/// serialized copy reloads, re-serializes identically and answers the same.
/// With `corrupt`, one payload byte of the serialized copy is flipped first,
/// which must make the reload fail.
pub fn verify_structure(
    kind: DictKind,
    bits: &RawBitVector,
    oracle: &Oracle,
    params: &Params,
    coverage: Coverage,
    corrupt: bool,
) -> Result<(), String> {
    let dict =
        build(kind, Source::Bits(bits), params).map_err(|e| format!("{kind} build failed: {e}"))?;
    verify_dict(&dict, oracle, coverage)?;
    let mut bytes = dict.to_bytes();
    if corrupt {
        let at = bytes.len() - 9;
        bytes[at] ^= 0x01;
    }
    let back = Dict::from_bytes(&bytes).map_err(|e| format!("{kind} reload failed: {e}"))?;
    if back.to_bytes() != bytes {
        return Err(format!("{kind} re-serialization differs"));
    }
    verify_dict(&back, oracle, coverage).map_err(|e| format!("after reload: {e}"))
}

/// Worker pool sized by `RSDICT_THREADS`, or by rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("RSDICT_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("RSDICT_THREADS={v:?} is not a thread count"))?;
        if n == 0 {
            bail!("RSDICT_THREADS must be at least 1");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Pre-drawn query arguments for one operation.
pub fn queries(op: Op, n: usize, m: usize, count: usize, seed: u64) -> Vec<usize> {
    let (lo, hi) = match op {
        Op::Rank => (0, n.saturating_sub(1)),
        Op::Select => (1, m),
        Op::Select0 => (1, n - m),
    };
    if hi < lo || n == 0 {
        return Vec::new();
    }
    let mut r = rng(seed ^ 0xD1B5_4A32_D192_ED03);
    (0..count).map(|_| r.random_range(lo..=hi)).collect()
}

/// Runs `op` over all `args` once to warm up, then `reps` timed passes.
/// Returns the median nanoseconds per query.
pub fn time_op(dict: &Dict, op: Op, args: &[usize], reps: usize) -> f64 {
    if args.is_empty() {
        return f64::NAN;
    }
    let pass = || -> usize {
        let mut acc = 0usize;
        for &a in args {
            let r = match op {
                Op::Rank => dict.rank1(black_box(a)),
                Op::Select => dict.select1(black_box(a)),
                Op::Select0 => dict.select0(black_box(a)),
            };
            acc = acc.wrapping_add(r.unwrap_or(usize::MAX));
        }
        acc
    };
    black_box(pass());
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            black_box(pass());
            t.elapsed().as_nanos() as f64 / args.len() as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// One CSV row.
#[derive(Clone, Debug)]
pub struct Row {
    pub structure: String,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub op: String,
    pub ns_per_op: Option<f64>,
    pub size_bits: f64,
    pub pct_of_n: f64,
    pub pct_of_nh0: f64,
}

impl Row {
    pub fn fields(&self) -> [String; 9] {
        let num = |v: f64| {
            if v.is_finite() {
                format!("{v:.4}")
            } else {
                String::new()
            }
        };
        [
            self.structure.clone(),
            self.n.to_string(),
            self.density.to_string(),
            self.seed.to_string(),
            self.op.clone(),
            self.ns_per_op.map(num).unwrap_or_default(),
            if self.size_bits.fract() == 0.0 {
                format!("{}", self.size_bits as u64)
            } else {
                format!("{:.2}", self.size_bits)
            },
            num(self.pct_of_n),
            num(self.pct_of_nh0),
        ]
    }
}

/// Size row for a built dictionary (`op = "size"`).
pub fn size_row(dict: &Dict, density: f64, seed: u64) -> Row {
    let r = dict.size_report();
    Row {
        structure: dict.kind().to_string(),
        n: r.n,
        density,
        seed,
        op: "size".into(),
        ns_per_op: None,
        size_bits: r.total_bits() as f64,
        pct_of_n: r.pct_of_n(),
        pct_of_nh0: r.pct_of_nh0(),
    }
}

/// The analytic `n H0` line as a pseudo-structure.
pub fn entropy_row(bits: &RawBitVector, density: f64, seed: u64) -> Row {
    let r = rsdict::SizeReport::new(bits.len(), bits.count_ones(), rsdict::Space::default());
    Row {
        structure: "nH0".into(),
        n: r.n,
        density,
        seed,
        op: "size".into(),
        ns_per_op: None,
        size_bits: r.nh0_bits,
        pct_of_n: r.entropy_pct(),
        pct_of_nh0: 100.0,
    }
}

/// Parses `1048576`, `2^20` or `10*2^20`.
pub fn parse_count(s: &str) -> Result<usize> {
    let s = s.trim();
    let term = |t: &str| -> Result<usize> {
        match t.split_once('^') {
            Some((b, e)) => {
                let b: usize = b
                    .trim()
                    .parse()
                    .with_context(|| format!("bad base in {s:?}"))?;
                let e: u32 = e
                    .trim()
                    .parse()
                    .with_context(|| format!("bad exponent in {s:?}"))?;
                b.checked_pow(e).with_context(|| format!("{s:?} overflows"))
            }
            None => t
                .trim()
                .parse()
                .with_context(|| format!("bad number {s:?}")),
        }
    };
    s.split('*').map(term).try_fold(1usize, |acc, v| {
        acc.checked_mul(v?)
            .with_context(|| format!("{s:?} overflows"))
    })
}

/// Builds `kind` over freshly generated bits.
pub fn build_for(kind: DictKind, bits: &RawBitVector, params: &Params) -> Result<Dict> {
    build(kind, Source::Bits(bits), params).with_context(|| format!("building {kind}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            generate(1000, 0.3, 9).unwrap(),
            generate(1000, 0.3, 9).unwrap()
        );
        assert_ne!(
            generate(1000, 0.3, 9).unwrap(),
            generate(1000, 0.3, 10).unwrap()
        );
        assert_eq!(generate(500, 0.0, 1).unwrap().count_ones(), 0);
        assert_eq!(generate(500, 1.0, 1).unwrap().count_ones(), 500);
        assert!(generate(10, 1.5, 1).is_err());
        assert!(generate(10, f64::NAN, 1).is_err());
        assert_eq!(generate_exact(1000, 0.25, 4).unwrap().count_ones(), 250);
    }

    #[test]
    fn density_concentrates() {
        let n = 1 << 20;
        let m = generate(n, 0.01, 42).unwrap().count_ones() as f64;
        let sd = (n as f64 * 0.01 * 0.99).sqrt();
        assert!((m - 0.01 * n as f64).abs() <= 4.0 * sd, "m={m}");
    }

    #[test]
    fn counts_parse() {
        assert_eq!(parse_count("4096").unwrap(), 4096);
        assert_eq!(parse_count("2^20").unwrap(), 1 << 20);
        assert_eq!(parse_count("10*2^20").unwrap(), 10 << 20);
        assert!(parse_count("2^x").is_err());
        assert!(parse_count("2^64").is_err());
    }

    #[test]
    fn oracle_answers() {
        let o = Oracle::new(&RawBitVector::from_positions(8, &[1, 4, 5]).unwrap());
        assert_eq!(o.rank1(4), 2);
        assert_eq!(o.select1(3), 5);
        assert_eq!(o.select0(3), 3);
    }

    #[test]
    fn verify_catches_a_wrong_dictionary() {
        let a = RawBitVector::from_positions(64, &[1, 4, 5]).unwrap();
        let b = RawBitVector::from_positions(64, &[1, 4, 6]).unwrap();
        let dict = build_for(DictKind::Plain, &b, &Params::default()).unwrap();
        let err = verify_dict(&dict, &Oracle::new(&a), Coverage::Exhaustive).unwrap_err();
        assert!(err.contains("rank1(5)"), "{err}");
    }

    #[test]
    fn corrupted_container_fails_verification() {
        let bits = generate(5000, 0.1, 1).unwrap();
        let o = Oracle::new(&bits);
        for kind in DictKind::ALL {
            let p = Params::default();
            assert!(verify_structure(kind, &bits, &o, &p, Coverage::Exhaustive, false).is_ok());
            let err =
                verify_structure(kind, &bits, &o, &p, Coverage::Exhaustive, true).unwrap_err();
            assert!(err.contains("reload failed"), "{err}");
        }
    }
}
