use std::fmt;

use crate::error::{Error, Result};
use crate::params::SysParams;

/// Seconds since an arbitrary epoch; real or virtual.
pub type Timestamp = u64;

/// A fixed-width identity string (user, sensor or gateway).
///
/// Shorter identifiers are right-padded with `0x00`; longer ones are
/// rejected. An identifier may not itself end in `0x00`, so padding is
/// reversible.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(params: &SysParams, raw: &[u8]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::IdError("empty identity"));
        }
        if raw.len() > params.id_len {
            return Err(Error::IdError("identity longer than id_len"));
        }
        if raw.last() == Some(&0) {
            return Err(Error::IdError("identity ends in a padding byte"));
        }
        let mut padded = raw.to_vec();
        padded.resize(params.id_len, 0);
        Ok(Identity(padded))
    }

    /// Wraps an already padded field taken off the wire.
    pub fn from_padded(params: &SysParams, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != params.id_len {
            return Err(Error::LengthMismatch {
                expected: params.id_len,
                actual: bytes.len(),
            });
        }
        Ok(Identity(bytes.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// The identifier without padding.
    pub fn trimmed(&self) -> &[u8] {
        let end = self.0.iter().rposition(|&b| b != 0).map_or(0, |i| i + 1);
        &self.0[..end]
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(self.trimmed()))
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_rule() {
        let p = SysParams::default();
        let id = Identity::new(&p, b"u1").unwrap();
        assert_eq!(id.as_bytes().len(), 16);
        assert_eq!(&id.as_bytes()[..2], b"u1");
        assert!(id.as_bytes()[2..].iter().all(|&b| b == 0));
        assert_eq!(id.trimmed(), b"u1");
        assert_eq!(id.to_string(), "u1");
        assert_eq!(Identity::new(&p, &[b'a'; 16]).unwrap().trimmed(), &[b'a'; 16]);
    }

    #[test]
    fn rejects_malformed() {
        let p = SysParams::default();
        assert!(Identity::new(&p, b"").is_err());
        assert!(Identity::new(&p, &[b'a'; 17]).is_err());
        assert!(Identity::new(&p, b"a\0").is_err());
        assert!(Identity::from_padded(&p, &[0; 15]).is_err());
    }
}
