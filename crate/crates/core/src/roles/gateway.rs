use std::collections::BTreeMap;

use rand_core::CryptoRngCore;

use super::card::CardPayload;
use super::replay::{is_fresh, ReplayCache};
use super::sensor::SensorIdentity;
use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::{parse_kv, SysParams};
use crate::primitives::{
    ct_eq, hash_parts, mac_generate, mac_verify, scalar_mult, sym_decrypt, sym_encrypt,
    Ciphertext, GroupElement, HashDomain, Scalar, SymKey,
};
use crate::wire::{
    mac_input_m1, mac_input_m2, GatewayToSensorM2, Layout, LoginRequestM1, PwdUpdateRequest,
    PwdUpdateResponse,
};

/// Long-lived gateway state: master secrets `y` and `z`, public key
/// `Y = yP`, the sensor registry and the replay cache.
///
/// Nothing here depends on any user's password; registering a user touches
/// no field at all. Mutating operations take `&mut self`, which gives the
/// one-mutator-at-a-time contract for the registry and the replay cache.
#[derive(Debug, Clone)]
pub struct GatewaySecrets {
    params: SysParams,
    y: Scalar,
    z: SymKey,
    public: GroupElement,
    id_gw: Identity,
    sensors: BTreeMap<Identity, SymKey>,
    replay: ReplayCache,
}

/// `k_UG = J(T_U || X || Y || K_UG)`.
pub(crate) fn derive_k_ug(
    params: &SysParams,
    t_u: Timestamp,
    x: &GroupElement,
    y: &GroupElement,
    shared: &GroupElement,
) -> SymKey {
    let k = hash_parts(
        params,
        HashDomain::J,
        &[&t_u.to_be_bytes(), &x.encode(), &y.encode(), &shared.encode()],
    );
    SymKey::from_slice(&k).expect("ell is 256 bits")
}

/// `rho_GW = H(ID_GW || ID_U || X || k_UG)`.
pub(crate) fn pwd_update_authenticator(
    params: &SysParams,
    id_gw: &Identity,
    id_u: &[u8],
    x: &GroupElement,
    k_ug: &SymKey,
) -> [u8; 32] {
    hash_parts(
        params,
        HashDomain::H,
        &[id_gw.as_bytes(), id_u, &x.encode(), k_ug.as_bytes()],
    )
    .try_into()
    .expect("kappa is 256 bits")
}

impl GatewaySecrets {
    pub fn init<R: CryptoRngCore + ?Sized>(params: SysParams, id_gw: Identity, rng: &mut R) -> Self {
        let y = Scalar::random(rng);
        let z = SymKey::random(rng);
        Self::from_secrets(params, id_gw, y, z)
    }

    pub fn from_secrets(params: SysParams, id_gw: Identity, y: Scalar, z: SymKey) -> Self {
        let public = scalar_mult(&y, &GroupElement::generator());
        GatewaySecrets {
            params,
            y,
            z,
            public,
            id_gw,
            sensors: BTreeMap::new(),
            replay: ReplayCache::default(),
        }
    }

    pub fn params(&self) -> &SysParams {
        &self.params
    }

    pub fn id(&self) -> &Identity {
        &self.id_gw
    }

    pub fn public_key(&self) -> &GroupElement {
        &self.public
    }

    /// `(y, z)`; what a privileged insider walks away with.
    pub fn master_secrets(&self) -> (&Scalar, &SymKey) {
        (&self.y, &self.z)
    }

    pub fn replay_cache(&self) -> &ReplayCache {
        &self.replay
    }

    pub fn sensor_ids(&self) -> impl Iterator<Item = &Identity> {
        self.sensors.keys()
    }

    /// The gateway keeps no password verifiers of any kind.
    pub fn password_verifiers(&self) -> Vec<(Identity, Vec<u8>)> {
        Vec::new()
    }

    /// `EID_U = Enc_z(ID_U || ID_GW)`, shipped with `Y` and `ID_GW` for the card.
    pub fn register_user<R: CryptoRngCore + ?Sized>(
        &self,
        id_u: &Identity,
        rng: &mut R,
    ) -> Result<CardPayload> {
        if id_u.as_bytes().len() != self.params.id_len {
            return Err(Error::IdError("identity width does not match id_len"));
        }
        let mut plain = id_u.as_bytes().to_vec();
        plain.extend_from_slice(self.id_gw.as_bytes());
        let eid = sym_encrypt(&self.z, &plain, rng)?.to_bytes();
        Ok(CardPayload {
            params: self.params,
            eid,
            y: self.public,
            id_gw: self.id_gw.clone(),
        })
    }

    /// `k_GS = J(ID_SN || z)`.
    pub fn sensor_key(&self, id_sn: &Identity) -> SymKey {
        let k = hash_parts(&self.params, HashDomain::J, &[id_sn.as_bytes(), self.z.as_bytes()]);
        SymKey::from_slice(&k).expect("ell is 256 bits")
    }

    pub fn register_sensor(&mut self, id_sn: &Identity) -> Result<SensorIdentity> {
        if id_sn.as_bytes().len() != self.params.id_len {
            return Err(Error::IdError("identity width does not match id_len"));
        }
        if self.sensors.contains_key(id_sn) {
            return Err(Error::AlreadyRegistered);
        }
        let k_gs = self.sensor_key(id_sn);
        self.sensors.insert(id_sn.clone(), k_gs.clone());
        Ok(SensorIdentity::new(self.params, id_sn.clone(), k_gs))
    }

    /// Step 2 of the login. See [`Self::process_m1_with_user`].
    pub fn process_m1<R: CryptoRngCore + ?Sized>(
        &mut self,
        m1: &LoginRequestM1,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<GatewayToSensorM2> {
        self.process_m1_with_user(m1, now, rng).map(|(m2, _)| m2)
    }

    /// Verifies `M1` and builds `M2`, also returning the authenticated user.
    pub fn process_m1_with_user<R: CryptoRngCore + ?Sized>(
        &mut self,
        m1: &LoginRequestM1,
        now: Timestamp,
        rng: &mut R,
    ) -> Result<(GatewayToSensorM2, Identity)> {
        let layout = Layout::new(&self.params);
        self.check_fresh(m1.t_u, &m1.x, now)?;

        let k_ug = self.k_ug(m1.t_u, &m1.x);
        let mac_input = mac_input_m1(&self.params, &self.id_gw, &m1.id_sn, m1.t_u, &m1.c_u)?;
        if !mac_verify(&k_ug, &mac_input, m1.sigma_u.as_bytes())? {
            return Err(Error::BadMac);
        }

        let plain = decrypt_exact(&k_ug, &m1.c_u, layout.login_cu_len())?;
        let (id_u, rest) = plain.split_at(layout.id_len);
        let (eid, k_us) = rest.split_at(layout.omega);
        self.check_eid(id_u, eid)?;

        let k_gs = self.sensors.get(&m1.id_sn).ok_or(Error::UnknownSensor)?;
        let t_gw = now;
        let c_gw = sym_encrypt(k_gs, k_us, rng)?;
        let mac_input = mac_input_m2(&self.params, &self.id_gw, &m1.id_sn, t_gw, m1.t_u, &c_gw)?;
        let sigma_gw = mac_generate(k_gs, &mac_input);

        self.replay.insert(m1.t_u, m1.x.encode());
        let id_u = Identity::from_padded(&self.params, id_u)?;
        Ok((
            GatewayToSensorM2 {
                id_gw: self.id_gw.clone(),
                t_gw,
                t_u: m1.t_u,
                c_gw,
                sigma_gw,
            },
            id_u,
        ))
    }

    /// Step 3 of the interactive password update; every failure becomes
    /// a `Fail` response.
    pub fn process_pwd_update(&mut self, req: &PwdUpdateRequest, now: Timestamp) -> PwdUpdateResponse {
        match self.verify_pwd_update(req, now) {
            Ok(rho_gw) => PwdUpdateResponse::Ok { rho_gw },
            Err(_) => PwdUpdateResponse::Fail,
        }
    }

    /// The checks behind [`Self::process_pwd_update`], with the reason on failure.
    pub fn verify_pwd_update(&mut self, req: &PwdUpdateRequest, now: Timestamp) -> Result<[u8; 32]> {
        let layout = Layout::new(&self.params);
        self.check_fresh(req.t_u, &req.x, now)?;
        let k_ug = self.k_ug(req.t_u, &req.x);
        let plain = decrypt_exact(&k_ug, &req.c_u, layout.pwd_cu_len())?;
        let (id_u, eid) = plain.split_at(layout.id_len);
        self.check_eid(id_u, eid)?;
        self.replay.insert(req.t_u, req.x.encode());
        Ok(pwd_update_authenticator(&self.params, &self.id_gw, id_u, &req.x, &k_ug))
    }

    fn check_fresh(&mut self, t_u: Timestamp, x: &GroupElement, now: Timestamp) -> Result<()> {
        if !is_fresh(t_u, now, self.params.ts_window) {
            return Err(Error::StaleTimestamp);
        }
        self.replay.prune(now, self.params.ts_window);
        if self.replay.contains(t_u, &x.encode()) {
            return Err(Error::ReplayDetected);
        }
        Ok(())
    }

    fn k_ug(&self, t_u: Timestamp, x: &GroupElement) -> SymKey {
        let shared = scalar_mult(&self.y, x);
        derive_k_ug(&self.params, t_u, x, &self.public, &shared)
    }

    /// `Dec_z(EID_U)` must be `ID_U || ID_GW` for the `ID_U` the user sent.
    fn check_eid(&self, id_u: &[u8], eid: &[u8]) -> Result<()> {
        let eid = Ciphertext::from_bytes(eid)?;
        let inner = sym_decrypt(&self.z, &eid);
        let (inner_id, inner_gw) = inner.split_at(self.params.id_len.min(inner.len()));
        let id_ok = ct_eq(inner_id, id_u);
        let gw_ok = ct_eq(inner_gw, self.id_gw.as_bytes());
        if id_ok & gw_ok {
            Ok(())
        } else {
            Err(Error::IdMismatch)
        }
    }

    /// Persisted form in the `key = value` format: `id_gw`, `y`, `z` and one
    /// `sensor` line per registered sensor, all hex. Sensor keys are
    /// re-derived on load.
    pub fn to_state_text(&self) -> String {
        let mut out = format!(
            "id_gw = {}\ny = {}\nz = {}\n",
            hex::encode(self.id_gw.trimmed()),
            hex::encode(self.y.to_bytes()),
            hex::encode(self.z.as_bytes())
        );
        for id in self.sensors.keys() {
            out.push_str(&format!("sensor = {}\n", hex::encode(id.trimmed())));
        }
        out
    }

    pub fn from_state_text(params: SysParams, text: &str) -> Result<Self> {
        let mut id_gw = None;
        let mut y = None;
        let mut z = None;
        let mut sensors = Vec::new();
        for (key, value) in parse_kv(text)? {
            let bytes = hex::decode(&value)
                .map_err(|_| Error::Params(format!("{key}: expected hex, got {value:?}")))?;
            match key.as_str() {
                "id_gw" => id_gw = Some(Identity::new(&params, &bytes)?),
                "y" => y = Some(Scalar::from_bytes(&bytes)?),
                "z" => z = Some(SymKey::from_slice(&bytes)?),
                "sensor" => sensors.push(Identity::new(&params, &bytes)?),
                other => return Err(Error::Params(format!("unknown gateway state key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Params(format!("gateway state is missing {k}"));
        let mut gw = Self::from_secrets(
            params,
            id_gw.ok_or_else(|| missing("id_gw"))?,
            y.ok_or_else(|| missing("y"))?,
            z.ok_or_else(|| missing("z"))?,
        );
        for id in sensors {
            gw.register_sensor(&id)?;
        }
        Ok(gw)
    }
}

fn decrypt_exact(key: &SymKey, ct: &Ciphertext, expected: usize) -> Result<Vec<u8>> {
    if ct.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: ct.len(),
        });
    }
    Ok(sym_decrypt(key, ct))
}
