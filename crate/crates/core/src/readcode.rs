//! Five-character hierarchical clinical codes.
//!
//! A code is a prefix hierarchy: `H33ab` (level 5) has parent `H33a.`,
//! grandparent `H33..` and so on up to the chapter `H....` (level 1).
//! Significant characters are ASCII alphanumerics; the remainder of the
//! five slots is `.` padding.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const WIDTH: usize = 5;
const PAD: u8 = b'.';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReadCode {
    bytes: [u8; WIDTH],
    level: u8,
}

impl ReadCode {
    pub fn parse(s: &str) -> Result<Self> {
        let raw = s.as_bytes();
        if raw.len() != WIDTH {
            return Err(Error::InvalidReadCode(s.to_string()));
        }
        let level = raw.iter().take_while(|b| b.is_ascii_alphanumeric()).count();
        if level == 0 || raw[level..].iter().any(|&b| b != PAD) {
            return Err(Error::InvalidReadCode(s.to_string()));
        }
        let mut bytes = [PAD; WIDTH];
        bytes.copy_from_slice(raw);
        Ok(ReadCode {
            bytes,
            level: level as u8,
        })
    }

    /// Number of significant characters, 1 (most general) to 5.
    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn as_str(&self) -> &str {
        // bytes are validated ASCII
        std::str::from_utf8(&self.bytes).expect("read code is ascii")
    }

    pub fn parent(&self) -> Option<ReadCode> {
        (self.level > 1).then(|| self.truncate(self.level - 1))
    }

    /// Generalise the code to `target_level`; codes already at or above that
    /// generality are returned unchanged.
    pub fn rollup(&self, target_level: u8) -> Result<ReadCode> {
        if !(1..=WIDTH as u8).contains(&target_level) {
            return Err(Error::InvalidLevel(target_level));
        }
        Ok(self.rollup_unchecked(target_level))
    }

    pub(crate) fn rollup_unchecked(&self, target_level: u8) -> ReadCode {
        if self.level > target_level {
            self.truncate(target_level)
        } else {
            *self
        }
    }

    fn truncate(&self, level: u8) -> ReadCode {
        let mut bytes = [PAD; WIDTH];
        bytes[..level as usize].copy_from_slice(&self.bytes[..level as usize]);
        ReadCode { bytes, level }
    }
}

impl FromStr for ReadCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReadCode::parse(s)
    }
}

impl fmt::Display for ReadCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
