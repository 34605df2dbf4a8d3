//! Which message fields stay constant across one user's sessions.

use super::jiang::JiangLoginMsg;
use crate::error::{Error, Result};
use crate::harness::Transcript;
use crate::params::SysParams;
use crate::wire::Message;

/// A named field value from one session.
pub type Field = (&'static str, Vec<u8>);

/// Fields of this scheme that may repeat without identifying the user:
/// sensor and gateway identities and timestamps.
pub const USER_INDEPENDENT_FIELDS: [&str; 5] = ["M1.T_U", "M1.ID_SN", "M2.ID_GW", "M2.T_GW", "M2.T_U"];

pub fn session_fields(params: &SysParams, transcript: &Transcript) -> Result<Vec<Field>> {
    let mut out = Vec::new();
    for msg in transcript.messages(params)? {
        match msg {
            Message::M1(m) => {
                out.push(("M1.T_U", m.t_u.to_be_bytes().to_vec()));
                out.push(("M1.ID_SN", m.id_sn.as_bytes().to_vec()));
                out.push(("M1.X", m.x.encode().to_vec()));
                out.push(("M1.C_U", m.c_u.to_bytes()));
                out.push(("M1.sigma_U", m.sigma_u.as_bytes().to_vec()));
            }
            Message::M2(m) => {
                out.push(("M2.ID_GW", m.id_gw.as_bytes().to_vec()));
                out.push(("M2.T_GW", m.t_gw.to_be_bytes().to_vec()));
                out.push(("M2.T_U", m.t_u.to_be_bytes().to_vec()));
                out.push(("M2.C_GW", m.c_gw.to_bytes()));
                out.push(("M2.sigma_GW", m.sigma_gw.as_bytes().to_vec()));
            }
            Message::M3(m) => out.push(("M3.rho_SN", m.rho_sn.to_vec())),
            _ => return Err(Error::Decode("unexpected message in login transcript")),
        }
    }
    Ok(out)
}

pub fn jiang_fields(msg: &JiangLoginMsg) -> Vec<Field> {
    vec![
        ("TID_U", msg.tid_u.to_vec()),
        ("C_U", msg.c_u.to_vec()),
        ("PKS_U", msg.pks_u.to_vec()),
        ("T_U", msg.t_u.to_be_bytes().to_vec()),
    ]
}

/// Names of fields whose value is identical in every session. Sessions must
/// have the same field layout.
pub fn constant_fields(sessions: &[Vec<Field>]) -> Vec<&'static str> {
    let Some((first, rest)) = sessions.split_first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .filter(|(i, (name, value))| {
            rest.iter()
                .all(|s| s.get(*i).is_some_and(|(n, v)| n == name && v == value))
        })
        .map(|(_, (name, _))| *name)
        .collect()
}
