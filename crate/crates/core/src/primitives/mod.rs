//! Building blocks consumed by the scheme: the P-256 group, three
//! domain-separated hash functions, HMAC-SHA256 and AES-256-CTR.
//!
//! Every call that Table-style efficiency accounting cares about reports
//! itself to [`crate::opcount`]; point validation and XOR are not counted.

mod cipher;
mod group;
mod hash;
mod mac;

pub use cipher::{sym_decrypt, sym_encrypt, Ciphertext};
pub use group::{scalar_mult, GroupElement, Scalar, POINT_LEN, SCALAR_LEN};
pub use hash::{hash, hash_parts, HashDomain};
pub use mac::{mac_generate, mac_verify, MacTag, SymKey, KEY_LEN, TAG_LEN};

pub(crate) use hash::tagged_digest;

/// `a ^= b` over the common length. Callers guarantee equal lengths.
pub fn xor_in_place(a: &mut [u8], b: &[u8]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

/// Constant-time byte-string equality.
pub fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    use subtle::ConstantTimeEq;
    a.len() == b.len() && bool::from(a.ct_eq(b))
}
