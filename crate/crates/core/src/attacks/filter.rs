//! The stolen-card filter applied to this scheme.
//!
//! With the card image and a transcript, an attacker can unmask a candidate
//! `EID' = XEID_U xor I(ID' || PW')` for every guess. Every value that could
//! confirm a guess (`C_U`, `sigma_U`, `C_GW`, `rho_SN`) is keyed by `k_UG`,
//! `k_GS` or `k_US`, and `k_UG` needs `yX`, an ECCDH instance. `EID_U`
//! itself is a ciphertext under `z`. So no predicate is available and every
//! candidate survives. The weakened card stores `H(ID_U || PW_U)` as a local
//! password check, which is exactly the kind of verifier that re-enables
//! the attack; it is a control, not part of the scheme.

use rayon::prelude::*;

use super::CandidateSpace;
use crate::error::Result;
use crate::harness::Transcript;
use crate::identity::Identity;
use crate::params::SysParams;
use crate::primitives::{ct_eq, hash_parts, xor_in_place, HashDomain};
use crate::roles::SmartCard;

/// What the attacker extracted from the card.
#[derive(Debug, Clone, Copy)]
pub enum StolenCard<'a> {
    Ours(&'a SmartCard),
    /// Control: the same card plus an on-card password verifier.
    Weakened { card: &'a SmartCard, verifier: [u8; 32] },
}

impl StolenCard<'_> {
    fn card(&self) -> &SmartCard {
        match self {
            StolenCard::Ours(card) | StolenCard::Weakened { card, .. } => card,
        }
    }
}

/// `H(ID_U || PW_U)`, the verifier a weakened card would store.
pub fn weakened_verifier(params: &SysParams, id: &Identity, password: &[u8]) -> [u8; 32] {
    hash_parts(params, HashDomain::H, &[id.as_bytes(), password])
        .try_into()
        .expect("kappa is 256 bits")
}

/// Counts the candidates no offline check can rule out.
///
/// The transcript is decoded first; a malformed transcript is an error.
pub fn our_scheme_offline_filter(card: StolenCard<'_>, transcript: &Transcript, space: &CandidateSpace) -> Result<u64> {
    let params = card.card().params;
    transcript.messages(&params)?;
    let xeid = &card.card().xeid;

    let survivors = space
        .passwords
        .par_iter()
        .map(|pw| {
            space
                .identities
                .iter()
                .filter(|id| {
                    let mut eid = xeid.clone();
                    let mask = hash_parts(&params, HashDomain::I, &[id.as_bytes(), pw]);
                    xor_in_place(&mut eid, &mask);
                    match card {
                        // EID' is a uniformly distributed ciphertext under z; nothing to test.
                        StolenCard::Ours(_) => true,
                        StolenCard::Weakened { verifier, .. } => {
                            ct_eq(&weakened_verifier(&params, id, pw), &verifier)
                        }
                    }
                })
                .count() as u64
        })
        .sum();
    Ok(survivors)
}
