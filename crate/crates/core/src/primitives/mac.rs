use std::fmt;

use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::error::{Error, Result};
use crate::opcount::{self, Op};

type HmacSha256 = Hmac<Sha256>;

/// ℓ / 8 with ℓ = 256.
pub const KEY_LEN: usize = 32;
pub const TAG_LEN: usize = 32;

/// An ℓ-bit key for the MAC and the symmetric scheme.
#[derive(Clone)]
pub struct SymKey([u8; KEY_LEN]);

impl SymKey {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        SymKey(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; KEY_LEN] = bytes.try_into().map_err(|_| Error::LengthMismatch {
            expected: KEY_LEN,
            actual: bytes.len(),
        })?;
        Ok(SymKey(arr))
    }

    pub fn random<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; KEY_LEN];
        rng.fill_bytes(&mut k);
        SymKey(k)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }
}

impl PartialEq for SymKey {
    fn eq(&self, other: &Self) -> bool {
        super::ct_eq(&self.0, &other.0)
    }
}

impl Eq for SymKey {}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacTag(pub [u8; TAG_LEN]);

impl MacTag {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        bytes
            .try_into()
            .map(MacTag)
            .map_err(|_| Error::Decode("MAC tag length"))
    }

    pub fn as_bytes(&self) -> &[u8; TAG_LEN] {
        &self.0
    }
}

pub fn mac_generate(key: &SymKey, msg: &[u8]) -> MacTag {
    opcount::record(Op::Mac);
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("HMAC accepts any key length");
    mac.update(msg);
    MacTag(mac.finalize().into_bytes().into())
}

/// Constant-time verification. A tag of the wrong length is a decode error,
/// not a verification failure.
pub fn mac_verify(key: &SymKey, msg: &[u8], tag: &[u8]) -> Result<bool> {
    if tag.len() != TAG_LEN {
        return Err(Error::Decode("MAC tag length"));
    }
    opcount::record(Op::Mac);
    let mut mac = HmacSha256::new_from_slice(&key.0).expect("HMAC accepts any key length");
    mac.update(msg);
    Ok(mac.verify_slice(tag).is_ok())
}
