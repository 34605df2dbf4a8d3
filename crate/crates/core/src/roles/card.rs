use crate::error::{Error, Result};
use crate::identity::Identity;
use crate::params::SysParams;
use crate::primitives::{hash_parts, xor_in_place, GroupElement, HashDomain, POINT_LEN};

/// What the gateway hands over at registration, before the user masks it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardPayload {
    pub params: SysParams,
    /// `Enc_z(ID_U || ID_GW)`, ω bits.
    pub eid: Vec<u8>,
    pub y: GroupElement,
    pub id_gw: Identity,
}

/// The issued smart card. It holds no identity, no password and no
/// password verifier; only the masked `XEID_U` and public values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmartCard {
    pub params: SysParams,
    /// `EID_U xor I(ID_U || PW_U)`
    pub xeid: Vec<u8>,
    pub y: GroupElement,
    pub id_gw: Identity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCredentials {
    pub id: Identity,
    pub password: Vec<u8>,
}

impl UserCredentials {
    pub fn new(params: &SysParams, id: &[u8], password: &[u8]) -> Result<Self> {
        Ok(UserCredentials {
            id: Identity::new(params, id)?,
            password: password.to_vec(),
        })
    }
}

pub(crate) fn eid_mask(params: &SysParams, id: &Identity, password: &[u8]) -> Vec<u8> {
    hash_parts(params, HashDomain::I, &[id.as_bytes(), password])
}

pub fn card_personalize(payload: CardPayload, id: &Identity, password: &[u8]) -> SmartCard {
    let mut xeid = payload.eid;
    xor_in_place(&mut xeid, &eid_mask(&payload.params, id, password));
    SmartCard {
        params: payload.params,
        xeid,
        y: payload.y,
        id_gw: payload.id_gw,
    }
}

/// Swaps the password mask without contacting the gateway. Nothing checks
/// `old`: a wrong value silently produces a card the gateway will reject.
pub fn pwd_update_noninteractive(card: &SmartCard, id: &Identity, old: &[u8], new: &[u8]) -> SmartCard {
    let mut next = card.clone();
    xor_in_place(&mut next.xeid, &eid_mask(&card.params, id, old));
    xor_in_place(&mut next.xeid, &eid_mask(&card.params, id, new));
    next
}

impl SmartCard {
    /// Recovers `EID_U` for the given credentials. Wrong credentials give garbage.
    pub fn unmask(&self, creds: &UserCredentials) -> Vec<u8> {
        let mut eid = self.xeid.clone();
        xor_in_place(&mut eid, &eid_mask(&self.params, &creds.id, &creds.password));
        eid
    }

    pub fn image_len(params: &SysParams) -> usize {
        params.omega_bytes() + POINT_LEN + params.id_len + 32
    }

    /// Card image: `XEID_U || Y || ID_GW || params-digest`.
    pub fn to_image(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::image_len(&self.params));
        out.extend_from_slice(&self.xeid);
        out.extend_from_slice(&self.y.encode());
        out.extend_from_slice(self.id_gw.as_bytes());
        out.extend_from_slice(&self.params.digest());
        out
    }

    pub fn from_image(params: &SysParams, image: &[u8]) -> Result<Self> {
        let expected = Self::image_len(params);
        if image.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: image.len(),
            });
        }
        let (xeid, rest) = image.split_at(params.omega_bytes());
        let (y, rest) = rest.split_at(POINT_LEN);
        let (id_gw, digest) = rest.split_at(params.id_len);
        if digest != params.digest() {
            return Err(Error::Params("card was issued under different parameters".into()));
        }
        Ok(SmartCard {
            params: *params,
            xeid: xeid.to_vec(),
            y: GroupElement::decode(y)?,
            id_gw: Identity::from_padded(params, id_gw)?,
        })
    }
}
