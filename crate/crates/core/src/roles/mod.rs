//! The user (smart card), gateway and sensor across registration,
//! authentication and key exchange, and password update.
//!
//! Role operations never emit a message after a failed check: errors are
//! returned to the caller and the failing session moves to
//! [`Status::Aborted`]. The gateway reports login failures only locally.

mod card;
mod gateway;
mod replay;
mod sensor;
mod user;

use std::fmt;

pub use card::{card_personalize, pwd_update_noninteractive, CardPayload, SmartCard, UserCredentials};
pub use gateway::GatewaySecrets;
pub use replay::{is_fresh, ReplayCache};
pub use sensor::SensorIdentity;
pub use user::{user_login_start, PendingPwdUpdate, UserSessionState};

use crate::params::SysParams;
use crate::primitives::{hash_parts, HashDomain};
use crate::wire::{GatewayToSensorM2, LoginRequestM1, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    Accepted,
    Aborted,
}

/// A κ-bit session key.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey(pub [u8; 32]);

impl SessionKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub(crate) fn from_hash(bytes: Vec<u8>) -> Self {
        SessionKey(bytes.try_into().expect("kappa is 256 bits"))
    }
}

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SessionKey(..)")
    }
}

/// `H(encode(M1) || encode(M2))`. Both partners of a session derive the same value.
pub fn session_id(params: &SysParams, m1: &LoginRequestM1, m2: &GatewayToSensorM2) -> Vec<u8> {
    session_id_from_bytes(
        params,
        &Message::M1(m1.clone()).encode(),
        &Message::M2(m2.clone()).encode(),
    )
}

pub(crate) fn session_id_from_bytes(params: &SysParams, m1: &[u8], m2: &[u8]) -> Vec<u8> {
    hash_parts(params, HashDomain::H, &[m1, m2])
}
