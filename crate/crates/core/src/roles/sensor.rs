use super::replay::is_fresh;
use super::SessionKey;
use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::{parse_kv, SysParams};
use crate::primitives::{hash_parts, mac_verify, sym_decrypt, HashDomain, SymKey};
use crate::wire::{mac_input_m2, GatewayToSensorM2, Layout, SensorResponseM3};

/// A sensor's identity and the key it shares with the gateway,
/// `k_GS = J(ID_SN || z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorIdentity {
    params: SysParams,
    id_sn: Identity,
    k_gs: SymKey,
}

impl SensorIdentity {
    pub fn new(params: SysParams, id_sn: Identity, k_gs: SymKey) -> Self {
        SensorIdentity { params, id_sn, k_gs }
    }

    pub fn id(&self) -> &Identity {
        &self.id_sn
    }

    pub fn key(&self) -> &SymKey {
        &self.k_gs
    }

    /// Step 3: check `M2`, recover `k_US`, answer with `rho_SN`.
    pub fn process_m2(
        &self,
        m2: &GatewayToSensorM2,
        now: Timestamp,
    ) -> Result<(SensorResponseM3, SessionKey)> {
        if !is_fresh(m2.t_gw, now, self.params.ts_window) {
            return Err(Error::StaleTimestamp);
        }
        let mac_input = mac_input_m2(&self.params, &m2.id_gw, &self.id_sn, m2.t_gw, m2.t_u, &m2.c_gw)?;
        if !mac_verify(&self.k_gs, &mac_input, m2.sigma_gw.as_bytes())? {
            return Err(Error::BadMac);
        }
        let expected = Layout::new(&self.params).cgw_len();
        if m2.c_gw.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: m2.c_gw.len(),
            });
        }
        let k_us = sym_decrypt(&self.k_gs, &m2.c_gw);
        let t_u = m2.t_u.to_be_bytes();
        let sk = hash_parts(&self.params, HashDomain::H, &[&k_us, &t_u, self.id_sn.as_bytes()]);
        let rho = hash_parts(&self.params, HashDomain::H, &[&k_us, self.id_sn.as_bytes(), &t_u]);
        Ok((
            SensorResponseM3 {
                rho_sn: rho.try_into().expect("kappa is 256 bits"),
            },
            SessionKey::from_hash(sk),
        ))
    }

    /// `id_sn = <hex>` and `k_gs = <hex>`.
    pub fn to_key_text(&self) -> String {
        format!(
            "id_sn = {}\nk_gs = {}\n",
            hex::encode(self.id_sn.trimmed()),
            hex::encode(self.k_gs.as_bytes())
        )
    }

    pub fn from_key_text(params: SysParams, text: &str) -> Result<Self> {
        let mut id_sn = None;
        let mut k_gs = None;
        for (key, value) in parse_kv(text)? {
            let bytes = hex::decode(&value)
                .map_err(|_| Error::Params(format!("{key}: expected hex, got {value:?}")))?;
            match key.as_str() {
                "id_sn" => id_sn = Some(Identity::new(&params, &bytes)?),
                "k_gs" => k_gs = Some(SymKey::from_slice(&bytes)?),
                other => return Err(Error::Params(format!("unknown sensor key {other:?}"))),
            }
        }
        match (id_sn, k_gs) {
            (Some(id_sn), Some(k_gs)) => Ok(SensorIdentity::new(params, id_sn, k_gs)),
            _ => Err(Error::Params("sensor key file needs id_sn and k_gs".into())),
        }
    }
}
