use rand_core::CryptoRngCore;

use super::card::{card_personalize, CardPayload, SmartCard, UserCredentials};
use super::gateway::{derive_k_ug, pwd_update_authenticator};
use super::{SessionKey, Status};
use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::SysParams;
use crate::primitives::{
    ct_eq, hash_parts, mac_generate, scalar_mult, sym_encrypt, GroupElement, HashDomain, Scalar,
    SymKey,
};
use crate::wire::{mac_input_m1, LoginRequestM1, PwdUpdateRequest, PwdUpdateResponse, SensorResponseM3};

/// The card's side of one login, between sending `M1` and receiving `M3`.
#[derive(Debug, Clone)]
pub struct UserSessionState {
    params: SysParams,
    k_us: [u8; 32],
    k_ug: SymKey,
    t_u: Timestamp,
    id_sn: Identity,
    status: Status,
    sk: Option<SessionKey>,
}

struct Ephemeral {
    x_pub: GroupElement,
    k_ug: SymKey,
    eid: Vec<u8>,
}

// X = xP, K_UG = xY, k_UG = J(T_U || X || Y || K_UG), EID_U = XEID_U xor I(ID_U || PW_U).
fn ephemeral<R: CryptoRngCore + ?Sized>(
    card: &SmartCard,
    creds: &UserCredentials,
    now: Timestamp,
    rng: &mut R,
) -> Ephemeral {
    let x = Scalar::random(rng);
    let x_pub = scalar_mult(&x, &GroupElement::generator());
    let shared = scalar_mult(&x, &card.y);
    let k_ug = derive_k_ug(&card.params, now, &x_pub, &card.y, &shared);
    let eid = card.unmask(creds);
    Ephemeral { x_pub, k_ug, eid }
}

/// Step 1 of the login. A wrong password goes unnoticed here; the gateway
/// rejects the resulting `M1` with `IdMismatch`.
pub fn user_login_start<R: CryptoRngCore + ?Sized>(
    card: &SmartCard,
    creds: &UserCredentials,
    id_sn: &Identity,
    now: Timestamp,
    rng: &mut R,
) -> Result<(LoginRequestM1, UserSessionState)> {
    let params = &card.params;
    let mut k_us = [0u8; 32];
    rng.fill_bytes(&mut k_us);
    let eph = ephemeral(card, creds, now, rng);

    let mut plain = Vec::with_capacity(params.id_len + params.omega_bytes() + k_us.len());
    plain.extend_from_slice(creds.id.as_bytes());
    plain.extend_from_slice(&eph.eid);
    plain.extend_from_slice(&k_us);
    let c_u = sym_encrypt(&eph.k_ug, &plain, rng)?;
    let sigma_u = mac_generate(&eph.k_ug, &mac_input_m1(params, &card.id_gw, id_sn, now, &c_u)?);

    let m1 = LoginRequestM1 {
        t_u: now,
        id_sn: id_sn.clone(),
        x: eph.x_pub,
        c_u,
        sigma_u,
    };
    let state = UserSessionState {
        params: *params,
        k_us,
        k_ug: eph.k_ug,
        t_u: now,
        id_sn: id_sn.clone(),
        status: Status::Running,
        sk: None,
    };
    Ok((m1, state))
}

impl UserSessionState {
    pub fn status(&self) -> Status {
        self.status
    }

    pub fn session_key(&self) -> Option<&SessionKey> {
        self.sk.as_ref()
    }

    pub fn sensor(&self) -> &Identity {
        &self.id_sn
    }

    pub fn timestamp(&self) -> Timestamp {
        self.t_u
    }

    /// The key shared with the gateway for this session.
    pub fn gateway_key(&self) -> &SymKey {
        &self.k_ug
    }

    /// Step 4: check `rho_SN` and derive the session key.
    pub fn process_m3(&mut self, m3: &SensorResponseM3) -> Result<SessionKey> {
        if self.status != Status::Running {
            return Err(Error::InvalidState);
        }
        let t_u = self.t_u.to_be_bytes();
        let id_sn = self.id_sn.as_bytes();
        let expected = hash_parts(&self.params, HashDomain::H, &[&self.k_us, id_sn, &t_u]);
        if !ct_eq(&expected, &m3.rho_sn) {
            self.status = Status::Aborted;
            return Err(Error::BadAuthenticator);
        }
        let sk = SessionKey::from_hash(hash_parts(&self.params, HashDomain::H, &[&self.k_us, &t_u, id_sn]));
        self.status = Status::Accepted;
        self.sk = Some(sk.clone());
        Ok(sk)
    }

    /// Marks the session aborted, e.g. when the network reports a failure.
    pub fn abort(&mut self) {
        if self.status == Status::Running {
            self.status = Status::Aborted;
        }
    }
}

/// The card between sending a password-update request and the gateway's answer.
#[derive(Debug, Clone)]
pub struct PendingPwdUpdate {
    card: SmartCard,
    id: Identity,
    eid: Vec<u8>,
    x_pub: GroupElement,
    k_ug: SymKey,
}

impl SmartCard {
    /// Interactive update, step 2: build `<T_U, X, C_U>` with
    /// `C_U = Enc_{k_UG}(ID_U || EID_U)`.
    pub fn pwd_update_start<R: CryptoRngCore + ?Sized>(
        &self,
        creds: &UserCredentials,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<(PwdUpdateRequest, PendingPwdUpdate)> {
        let eph = ephemeral(self, creds, now, rng);
        let mut plain = creds.id.as_bytes().to_vec();
        plain.extend_from_slice(&eph.eid);
        let c_u = sym_encrypt(&eph.k_ug, &plain, rng)?;
        let req = PwdUpdateRequest {
            t_u: now,
            x: eph.x_pub,
            c_u,
        };
        let pending = PendingPwdUpdate {
            card: self.clone(),
            id: creds.id.clone(),
            eid: eph.eid,
            x_pub: eph.x_pub,
            k_ug: eph.k_ug,
        };
        Ok((req, pending))
    }
}

impl PendingPwdUpdate {
    /// Step 4: on a valid `rho_GW`, re-mask `EID_U` under the new password.
    /// On any failure the original card is left as it was.
    pub fn finish(self, resp: &PwdUpdateResponse, new_password: &[u8]) -> Result<SmartCard> {
        let PwdUpdateResponse::Ok { rho_gw } = resp else {
            return Err(Error::UpdateRefused);
        };
        let params = &self.card.params;
        let expected =
            pwd_update_authenticator(params, &self.card.id_gw, self.id.as_bytes(), &self.x_pub, &self.k_ug);
        if !ct_eq(&expected, rho_gw) {
            return Err(Error::BadAuthenticator);
        }
        let payload = CardPayload {
            params: *params,
            eid: self.eid,
            y: self.card.y,
            id_gw: self.card.id_gw.clone(),
        };
        Ok(card_personalize(payload, &self.id, new_password))
    }
}
