//! Word-oriented payload streams used by the container format.
//!
//! Every structure serializes itself as a flat sequence of 64-bit words.
//! Variable-length arrays are always prefixed by their element count so a
//! reader can validate lengths before slicing.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct PayloadWriter {
    words: Vec<u64>,
}

impl PayloadWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, value: u64) {
        self.words.push(value);
    }

    pub fn put_usize(&mut self, value: usize) {
        self.words.push(value as u64);
    }

    /// Writes `words.len()` followed by the words themselves.
    pub fn put_words(&mut self, words: &[u64]) {
        self.put_usize(words.len());
        self.words.extend_from_slice(words);
    }

    /// Writes a byte array as its length followed by zero-padded LE words.
    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.put_usize(bytes.len());
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.words.push(u64::from_le_bytes(buf));
        }
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }
}

#[derive(Debug)]
pub struct PayloadReader<'a> {
    words: &'a [u64],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    pub fn new(words: &'a [u64]) -> Self {
        Self { words, pos: 0 }
    }

    pub fn get(&mut self) -> Result<u64> {
        let v = *self
            .words
            .get(self.pos)
            .ok_or_else(|| Error::Format("payload truncated".into()))?;
        self.pos += 1;
        Ok(v)
    }

    pub fn get_usize(&mut self) -> Result<usize> {
        let v = self.get()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("value {v} overflows usize")))
    }

    pub fn get_words(&mut self) -> Result<Vec<u64>> {
        let len = self.get_usize()?;
        if len > self.words.len() - self.pos {
            return Err(Error::Format(format!(
                "array of {len} words exceeds remaining payload"
            )));
        }
        let out = self.words[self.pos..self.pos + len].to_vec();
        self.pos += len;
        Ok(out)
    }

    pub fn get_bytes(&mut self) -> Result<Vec<u8>> {
        let len = self.get_usize()?;
        let nwords = len.div_ceil(8);
        if nwords > self.words.len() - self.pos {
            return Err(Error::Format(format!(
                "byte array of {len} bytes exceeds remaining payload"
            )));
        }
        let mut out = Vec::with_capacity(nwords * 8);
        for w in &self.words[self.pos..self.pos + nwords] {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(len);
        self.pos += nwords;
        Ok(out)
    }

    pub fn is_exhausted(&self) -> bool {
        self.pos == self.words.len()
    }

    /// Fails unless every word has been consumed.
    pub fn finish(&self) -> Result<()> {
        if self.is_exhausted() {
            Ok(())
        } else {
            Err(Error::Format(format!(
                "{} trailing payload words",
                self.words.len() - self.pos
            )))
        }
    }
}

/// Returns `Err(Format)` carrying `msg` unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Format(msg()))
    }
}
