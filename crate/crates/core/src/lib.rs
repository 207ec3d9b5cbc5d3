//! Rank/select dictionaries over static bit vectors, from the verbatim
//! `n + o(n)` layout down to entropy-compressed and sparse encodings.
//!
//! Every structure implements [`RankSelect`] with inclusive `rank1` and
//! 1-based `select1`. [`build`] constructs any of them from a bit vector or a
//! sorted position list and [`Dict::to_bytes`] writes the shared container.

pub mod api;
pub mod bits;
pub mod enumcode;
pub mod error;
pub mod esp;
pub mod packed;
pub mod plain;
pub mod recrank;
pub mod sdarray;
mod serial;
pub mod vcode;

pub use api::{build, Dict, DictKind, Params, RankSelect, SizeReport, Source, Space};
pub use bits::{BitBuilder, RawBitVector};
pub use enumcode::{EntDict, EntParams};
pub use error::{Error, Result};
pub use esp::{EspDict, EspParams};
pub use plain::{PlainDict, PlainParams};
pub use recrank::{RecRankDict, RecRankParams};
pub use sdarray::{DArray, DArrayParams, SArray};
pub use vcode::{PlaneOffsets, VcodeDict, VcodeParams};
