//! Offline attacks with a stolen smart card and an eavesdropped login.
//!
//! [`jiang`] reproduces the dictionary attack on the scheme of Jiang et al.,
//! where card contents plus one login message pin down both the password
//! and the identity. [`filter`] runs the same kind of candidate filter
//! against this scheme and shows that nothing is eliminated, with a
//! deliberately weakened card as a control. [`linkability`] compares which
//! message fields stay constant across one user's sessions.

pub mod filter;
pub mod jiang;
pub mod linkability;

use std::fmt;
use std::time::{Duration, Instant};

use rand_core::CryptoRngCore;

use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::SysParams;

pub use filter::{our_scheme_offline_filter, weakened_verifier, StolenCard};
pub use jiang::{
    jiang_dictionary_attack, jiang_login, jiang_register, JiangCard, JiangGateway, JiangLoginMsg,
    Recovery,
};

/// Candidate passwords and identities an offline attacker enumerates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpace {
    pub passwords: Vec<Vec<u8>>,
    pub identities: Vec<Identity>,
}

impl CandidateSpace {
    pub fn new(passwords: Vec<Vec<u8>>, identities: Vec<Identity>) -> Result<Self> {
        if passwords.is_empty() || identities.is_empty() {
            return Err(Error::Params("candidate space must be non-empty".into()));
        }
        Ok(CandidateSpace {
            passwords,
            identities,
        })
    }

    /// Builds a space from dictionary text and identity text, one candidate per line.
    pub fn from_lists(params: &SysParams, passwords: &str, identities: &str) -> Result<Self> {
        let ids = parse_dictionary(identities)
            .into_iter()
            .map(|raw| Identity::new(params, &raw))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parse_dictionary(passwords), ids)
    }

    pub fn size(&self) -> u64 {
        (self.passwords.len() * self.identities.len()) as u64
    }

    /// Upper bound on hash evaluations for the Jiang attack: `|D| * (2 + |ID|)`.
    pub fn jiang_hash_bound(&self) -> u64 {
        (self.passwords.len() * (2 + self.identities.len())) as u64
    }
}

/// One candidate per line; trailing `\r` and blank lines are dropped.
pub fn parse_dictionary(text: &str) -> Vec<Vec<u8>> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .map(|l| l.as_bytes().to_vec())
        .collect()
}

/// `n` distinct synthetic passwords.
pub fn synthetic_passwords(n: usize) -> Vec<Vec<u8>> {
    const STEMS: [&str; 10] = [
        "password", "dragon", "monkey", "letmein", "sunshine", "shadow", "qwerty", "football",
        "master", "welcome",
    ];
    (0..n)
        .map(|i| format!("{}{}", STEMS[i % STEMS.len()], i / STEMS.len()).into_bytes())
        .collect()
}

/// `n` distinct synthetic user identities.
pub fn synthetic_identities(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("user{i:04}")).collect()
}

/// Outcome of one dictionary-attack run, rendered as `key: value` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub password_space: usize,
    pub identity_space: usize,
    pub hash_count: u64,
    pub hash_bound: u64,
    /// Omitted under a virtual clock so reports stay byte-stable.
    pub elapsed: Option<Duration>,
    pub recovered: Option<(String, String)>,
    pub planted: (String, String),
}

impl AttackReport {
    pub fn success(&self) -> bool {
        self.recovered.as_ref() == Some(&self.planted) && self.hash_count <= self.hash_bound
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "password_space: {}", self.password_space)?;
        writeln!(f, "identity_space: {}", self.identity_space)?;
        writeln!(f, "planted: {} / {}", self.planted.0, self.planted.1)?;
        match &self.recovered {
            Some((id, pw)) => writeln!(f, "recovered: {id} / {pw}")?,
            None => writeln!(f, "recovered: none")?,
        }
        writeln!(f, "hash_count: {}", self.hash_count)?;
        writeln!(f, "hash_bound: {}", self.hash_bound)?;
        if let Some(elapsed) = self.elapsed {
            writeln!(f, "elapsed_ms: {}", elapsed.as_millis())?;
        }
        writeln!(f, "verdict: {}", if self.success() { "RECOVERED" } else { "FAIL" })
    }
}

/// Registers the planted user with a fresh Jiang gateway, records one login
/// at `t_u` and runs the dictionary attack against card plus message.
pub fn jiang_trial<R: CryptoRngCore + ?Sized>(
    space: &CandidateSpace,
    planted: (usize, usize),
    t_u: Timestamp,
    rng: &mut R,
) -> Result<AttackReport> {
    let (pw_idx, id_idx) = planted;
    let (pw, id) = match (space.passwords.get(pw_idx), space.identities.get(id_idx)) {
        (Some(pw), Some(id)) => (pw, id),
        _ => return Err(Error::Params("planted credentials outside candidate space".into())),
    };
    let mut gw = JiangGateway::new(rng);
    let card = gw.register(id, pw, t_u.saturating_sub(86_400), rng);
    let mut k_u = [0u8; 32];
    rng.fill_bytes(&mut k_u);
    let msg = jiang_login(&card, id, pw, k_u, t_u);

    let start = Instant::now();
    let found = match jiang_dictionary_attack(&card, &msg, space) {
        Ok(r) => Some(r),
        Err(Error::NotFound) => None,
        Err(e) => return Err(e),
    };
    let elapsed = start.elapsed();
    let show = |b: &[u8]| String::from_utf8_lossy(b).into_owned();
    Ok(AttackReport {
        password_space: space.passwords.len(),
        identity_space: space.identities.len(),
        hash_count: found.as_ref().map_or(space.jiang_hash_bound(), |r| r.hash_count),
        hash_bound: space.jiang_hash_bound(),
        elapsed: Some(elapsed),
        recovered: found.map(|r| (show(r.id.trimmed()), show(&r.password))),
        planted: (show(id.trimmed()), show(pw)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_parsing() {
        assert_eq!(parse_dictionary("a\r\n\nb\n"), vec![b"a".to_vec(), b"b".to_vec()]);
        assert!(parse_dictionary("\n\n").is_empty());
    }

    #[test]
    fn synthetic_corpora_are_distinct() {
        let pws = synthetic_passwords(1000);
        let mut sorted = pws.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 1000);
        let ids = synthetic_identities(100);
        assert_eq!(ids[7], "user0007");
    }

    #[test]
    fn empty_space_rejected() {
        let p = SysParams::default();
        assert!(CandidateSpace::from_lists(&p, "", "u1").is_err());
        assert!(CandidateSpace::from_lists(&p, "pw", "").is_err());
        let s = CandidateSpace::from_lists(&p, "a\nb\n", "u1\nu2\nu3").unwrap();
        assert_eq!(s.size(), 6);
        assert_eq!(s.jiang_hash_bound(), 10);
    }
}
