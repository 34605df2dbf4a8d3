use sha2::{Digest, Sha256};

use crate::opcount::{self, Op};
use crate::params::SysParams;

/// The three hash functions of the scheme: `H` (session keys and
/// authenticators, κ bits), `J` (symmetric keys, ℓ bits) and `I`
/// (EID masks, ω bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashDomain {
    H,
    J,
    I,
}

impl HashDomain {
    fn tag(self) -> u8 {
        match self {
            HashDomain::H => 0x48,
            HashDomain::J => 0x4a,
            HashDomain::I => 0x49,
        }
    }

    pub fn output_len(self, params: &SysParams) -> usize {
        match self {
            HashDomain::H => params.kappa_bytes(),
            HashDomain::J => params.ell_bytes(),
            HashDomain::I => params.omega_bytes(),
        }
    }
}

pub fn hash(params: &SysParams, domain: HashDomain, msg: &[u8]) -> Vec<u8> {
    hash_parts(params, domain, &[msg])
}

/// Hashes the concatenation of `parts`. Counts as one hash evaluation
/// regardless of how many SHA-256 blocks the output needs.
pub fn hash_parts(params: &SysParams, domain: HashDomain, parts: &[&[u8]]) -> Vec<u8> {
    opcount::record(Op::Hash);
    let out_len = domain.output_len(params);
    match domain {
        HashDomain::H | HashDomain::J => {
            let mut out = tagged_digest(domain.tag(), parts).to_vec();
            out.truncate(out_len);
            out
        }
        HashDomain::I => expand(domain.tag(), parts, out_len),
    }
}

/// `SHA-256(tag || parts...)`, uncounted.
pub(crate) fn tagged_digest(tag: u8, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update([tag]);
    for part in parts {
        h.update(part);
    }
    h.finalize().into()
}

// Counter mode: block i = SHA-256(tag || be32(i) || msg).
fn expand(tag: u8, parts: &[&[u8]], out_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(out_len + 32);
    let mut counter = 0u32;
    while out.len() < out_len {
        let mut h = Sha256::new();
        h.update([tag]);
        h.update(counter.to_be_bytes());
        for part in parts {
            h.update(part);
        }
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    out.truncate(out_len);
    out
}
