use ctr::cipher::{KeyIvInit, StreamCipher};
use rand_core::RngCore;

use super::mac::SymKey;
use crate::error::{Error, Result};
use crate::opcount::{self, Op};
use crate::params::NONCE_LEN;

type Aes256Ctr = ctr::Ctr128BE<aes::Aes256>;

/// Length-preserving stream ciphertext with its random nonce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub nonce: [u8; NONCE_LEN],
    pub body: Vec<u8>,
}

impl Ciphertext {
    pub fn len(&self) -> usize {
        NONCE_LEN + self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    /// `nonce || body`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < NONCE_LEN {
            return Err(Error::Decode("ciphertext shorter than nonce"));
        }
        let (nonce, body) = bytes.split_at(NONCE_LEN);
        Ok(Ciphertext {
            nonce: nonce.try_into().expect("split at NONCE_LEN"),
            body: body.to_vec(),
        })
    }
}

pub fn sym_encrypt<R: RngCore + ?Sized>(key: &SymKey, msg: &[u8], rng: &mut R) -> Result<Ciphertext> {
    if msg.is_empty() {
        return Err(Error::EmptyPlaintext);
    }
    opcount::record(Op::Sym);
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut body = msg.to_vec();
    Aes256Ctr::new(key.as_bytes().into(), &nonce.into()).apply_keystream(&mut body);
    Ok(Ciphertext { nonce, body })
}

pub fn sym_decrypt(key: &SymKey, ct: &Ciphertext) -> Vec<u8> {
    opcount::record(Op::Sym);
    let mut body = ct.body.clone();
    Aes256Ctr::new(key.as_bytes().into(), &ct.nonce.into()).apply_keystream(&mut body);
    body
}
