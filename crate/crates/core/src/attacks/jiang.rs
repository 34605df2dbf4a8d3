//! Registration and login request of Jiang et al., and the offline
//! dictionary attack that recovers `(ID_U, PW_U)` from the card plus one
//! eavesdropped login.

use rand_core::CryptoRngCore;
use rayon::prelude::*;

use super::CandidateSpace;
use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::primitives::{ct_eq, tagged_digest, xor_in_place};

/// Domain tag keeping this hash apart from `H`, `J` and `I`.
const JIANG_TAG: u8 = 0x6a;

pub const TID_LEN: usize = 16;

fn h(parts: &[&[u8]]) -> [u8; 32] {
    tagged_digest(JIANG_TAG, parts)
}

fn xor(a: &[u8; 32], b: &[u8; 32]) -> [u8; 32] {
    let mut out = *a;
    xor_in_place(&mut out, b);
    out
}

/// `{TID_U, TE_U, PTC_U, r}` as stored on the card.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JiangCard {
    pub tid_u: [u8; TID_LEN],
    pub te_u: Timestamp,
    /// `TC_U xor H(r || PW_U)` with `TC_U = H(MK || ID_U || TE_U)`.
    pub ptc_u: [u8; 32],
    pub r: [u8; 32],
}

/// `M_U = <TID_U, C_U, PKS_U, T_U>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JiangLoginMsg {
    pub tid_u: [u8; TID_LEN],
    pub c_u: [u8; 32],
    pub pks_u: [u8; 32],
    pub t_u: Timestamp,
}

pub fn jiang_register(
    mk: &[u8; 32],
    id_u: &Identity,
    pw: &[u8],
    r: [u8; 32],
    tid_u: [u8; TID_LEN],
    te_u: Timestamp,
) -> JiangCard {
    let rpw = h(&[&r, pw]);
    let tc = h(&[mk, id_u.as_bytes(), &te_u.to_be_bytes()]);
    JiangCard {
        tid_u,
        te_u,
        ptc_u: xor(&tc, &rpw),
        r,
    }
}

/// The gateway of Jiang et al.: master key plus its `(TID_U, ID_U, TE_U)`
/// verification table. The attack never touches the table.
#[derive(Debug, Clone)]
pub struct JiangGateway {
    mk: [u8; 32],
    table: Vec<([u8; TID_LEN], Identity, Timestamp)>,
}

impl JiangGateway {
    pub fn new<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut mk = [0u8; 32];
        rng.fill_bytes(&mut mk);
        JiangGateway { mk, table: Vec::new() }
    }

    pub fn register<R: CryptoRngCore + ?Sized>(
        &mut self,
        id_u: &Identity,
        pw: &[u8],
        te_u: Timestamp,
        rng: &mut R,
    ) -> JiangCard {
        let mut r = [0u8; 32];
        let mut tid = [0u8; TID_LEN];
        rng.fill_bytes(&mut r);
        rng.fill_bytes(&mut tid);
        self.table.push((tid, id_u.clone(), te_u));
        jiang_register(&self.mk, id_u, pw, r, tid, te_u)
    }

    pub fn table(&self) -> &[([u8; TID_LEN], Identity, Timestamp)] {
        &self.table
    }
}

/// `TC_U = PTC_U xor H(r || PW_U)`, `PKS_U = K_U xor H(TC_U || T_U)`,
/// `C_U = H(ID_U || K_U || TC_U || T_U)`.
pub fn jiang_login(card: &JiangCard, id_u: &Identity, pw: &[u8], k_u: [u8; 32], t_u: Timestamp) -> JiangLoginMsg {
    let tc = xor(&card.ptc_u, &h(&[&card.r, pw]));
    let ts = t_u.to_be_bytes();
    JiangLoginMsg {
        tid_u: card.tid_u,
        c_u: h(&[id_u.as_bytes(), &k_u, &tc, &ts]),
        pks_u: xor(&k_u, &h(&[&tc, &ts])),
        t_u,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub id: Identity,
    pub password: Vec<u8>,
    pub hash_count: u64,
}

/// Passwords per work unit. Fixed, so the hash count does not depend on
/// the thread count.
const CHUNK: usize = 64;

struct ChunkResult {
    found: Option<(usize, usize)>,
    hashes: u64,
}

/// For each password guess: `TC' = PTC_U xor H(r || PW')`,
/// `K' = PKS_U xor H(TC' || T_U)`; then for each identity guess compare
/// `H(ID' || K' || TC' || T_U)` with `C_U`.
///
/// Work is split into fixed chunks of the dictionary that run in parallel;
/// each chunk stops at its first match and the lowest-index match wins. The
/// count covers every hash actually computed and never exceeds
/// `|D| * (2 + |ID|)`.
pub fn jiang_dictionary_attack(card: &JiangCard, msg: &JiangLoginMsg, space: &CandidateSpace) -> Result<Recovery> {
    let ts = msg.t_u.to_be_bytes();
    let results: Vec<ChunkResult> = space
        .passwords
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk_no, chunk)| {
            let mut hashes = 0u64;
            for (offset, pw) in chunk.iter().enumerate() {
                let tc = xor(&card.ptc_u, &h(&[&card.r, pw]));
                let k = xor(&msg.pks_u, &h(&[&tc, &ts]));
                hashes += 2;
                for (id_idx, id) in space.identities.iter().enumerate() {
                    hashes += 1;
                    if ct_eq(&h(&[id.as_bytes(), &k, &tc, &ts]), &msg.c_u) {
                        return ChunkResult {
                            found: Some((chunk_no * CHUNK + offset, id_idx)),
                            hashes,
                        };
                    }
                }
            }
            ChunkResult { found: None, hashes }
        })
        .collect();

    let hash_count = results.iter().map(|r| r.hashes).sum();
    let (pw_idx, id_idx) = results.iter().find_map(|r| r.found).ok_or(Error::NotFound)?;
    Ok(Recovery {
        id: space.identities[id_idx].clone(),
        password: space.passwords[pw_idx].clone(),
        hash_count,
    })
}
