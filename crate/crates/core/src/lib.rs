//! Anonymous two-factor smart-card authentication and key exchange for
//! wireless sensor networks.
//!
//! Three parties take part: a user holding a smart card and a password, a
//! gateway holding the master secrets, and a resource-constrained sensor
//! that shares one symmetric key with the gateway. The user and the sensor
//! end up with a shared session key, and only the gateway learns who the
//! user is.
//!
//! - [`primitives`]: P-256, the hashes `H`/`J`/`I`, HMAC-SHA256, AES-256-CTR
//! - [`wire`]: bit-exact message codec
//! - [`roles`]: user, gateway and sensor state machines
//! - [`harness`]: in-memory network with the security-model oracles
//! - [`attacks`]: the offline dictionary attack on Jiang et al. and the
//!   matching check against this scheme
//! - [`opcount`]: per-role operation audit

pub mod attacks;
pub mod error;
pub mod harness;
pub mod identity;
pub mod opcount;
pub mod params;
pub mod primitives;
pub mod roles;
pub mod wire;

pub use error::{Error, Result};
pub use identity::{Identity, Timestamp};
pub use params::SysParams;
