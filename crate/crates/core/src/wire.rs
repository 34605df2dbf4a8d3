//! Bit-exact message encoding.
//!
//! Every message starts with a one-byte type tag followed by fixed-width
//! fields in declared order; widths come from [`SysParams`], so each type has
//! exactly one valid total length. Timestamps are 8-byte big-endian seconds,
//! points are 33-byte compressed SEC1, ciphertexts are `nonce || body`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::{SysParams, NONCE_LEN};
use crate::primitives::{Ciphertext, GroupElement, MacTag, POINT_LEN, TAG_LEN};

pub const TS_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MsgType {
    LoginRequest = 0x01,
    GatewayToSensor = 0x02,
    SensorResponse = 0x03,
    PwdUpdateRequest = 0x04,
    PwdUpdateResponse = 0x05,
}

impl MsgType {
    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            0x01 => MsgType::LoginRequest,
            0x02 => MsgType::GatewayToSensor,
            0x03 => MsgType::SensorResponse,
            0x04 => MsgType::PwdUpdateRequest,
            0x05 => MsgType::PwdUpdateResponse,
            other => return Err(Error::UnknownType(other)),
        })
    }

    /// Short name used in transcript logs.
    pub fn label(self) -> &'static str {
        match self {
            MsgType::LoginRequest => "M1",
            MsgType::GatewayToSensor => "M2",
            MsgType::SensorResponse => "M3",
            MsgType::PwdUpdateRequest => "PWREQ",
            MsgType::PwdUpdateResponse => "PWRSP",
        }
    }
}

impl FromStr for MsgType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            MsgType::LoginRequest,
            MsgType::GatewayToSensor,
            MsgType::SensorResponse,
            MsgType::PwdUpdateRequest,
            MsgType::PwdUpdateResponse,
        ]
        .into_iter()
        .find(|t| t.label() == s)
        .ok_or(Error::Decode("unknown message label"))
    }
}

/// `M1 = <T_U, ID_SN, X, C_U, sigma_U>`, user to gateway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoginRequestM1 {
    pub t_u: Timestamp,
    pub id_sn: Identity,
    pub x: GroupElement,
    /// `Enc_{k_UG}(ID_U || EID_U || k_US)`
    pub c_u: Ciphertext,
    pub sigma_u: MacTag,
}

/// `M2 = <ID_GW, T_GW, T_U, C_GW, sigma_GW>`, gateway to sensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayToSensorM2 {
    pub id_gw: Identity,
    pub t_gw: Timestamp,
    pub t_u: Timestamp,
    /// `Enc_{k_GS}(k_US)`
    pub c_gw: Ciphertext,
    pub sigma_gw: MacTag,
}

/// `M3 = <rho_SN>`, sensor to user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorResponseM3 {
    pub rho_sn: [u8; 32],
}

/// `<T_U, X, C_U>` with `C_U = Enc_{k_UG}(ID_U || EID_U)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwdUpdateRequest {
    pub t_u: Timestamp,
    pub x: GroupElement,
    pub c_u: Ciphertext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PwdUpdateResponse {
    Ok { rho_gw: [u8; 32] },
    Fail,
}

const STATUS_FAIL: u8 = 0x00;
const STATUS_OK: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    M1(LoginRequestM1),
    M2(GatewayToSensorM2),
    M3(SensorResponseM3),
    PwdUpdateRequest(PwdUpdateRequest),
    PwdUpdateResponse(PwdUpdateResponse),
}

/// Fixed field widths derived from the parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub id_len: usize,
    pub kappa: usize,
    pub omega: usize,
}

impl Layout {
    pub fn new(params: &SysParams) -> Self {
        Layout {
            id_len: params.id_len,
            kappa: params.kappa_bytes(),
            omega: params.omega_bytes(),
        }
    }

    /// Ciphertext length of the login `C_U`.
    pub fn login_cu_len(&self) -> usize {
        NONCE_LEN + self.id_len + self.omega + self.kappa
    }

    pub fn pwd_cu_len(&self) -> usize {
        NONCE_LEN + self.id_len + self.omega
    }

    pub fn cgw_len(&self) -> usize {
        NONCE_LEN + self.kappa
    }

    pub fn m1_len(&self) -> usize {
        1 + TS_LEN + self.id_len + POINT_LEN + self.login_cu_len() + TAG_LEN
    }

    pub fn m2_len(&self) -> usize {
        1 + self.id_len + 2 * TS_LEN + self.cgw_len() + TAG_LEN
    }

    pub fn m3_len(&self) -> usize {
        1 + self.kappa
    }

    pub fn pwd_request_len(&self) -> usize {
        1 + TS_LEN + POINT_LEN + self.pwd_cu_len()
    }
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::M1(_) => MsgType::LoginRequest,
            Message::M2(_) => MsgType::GatewayToSensor,
            Message::M3(_) => MsgType::SensorResponse,
            Message::PwdUpdateRequest(_) => MsgType::PwdUpdateRequest,
            Message::PwdUpdateResponse(_) => MsgType::PwdUpdateResponse,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.msg_type() as u8];
        match self {
            Message::M1(m) => {
                out.extend_from_slice(&m.t_u.to_be_bytes());
                out.extend_from_slice(m.id_sn.as_bytes());
                out.extend_from_slice(&m.x.encode());
                out.extend_from_slice(&m.c_u.to_bytes());
                out.extend_from_slice(m.sigma_u.as_bytes());
            }
            Message::M2(m) => {
                out.extend_from_slice(m.id_gw.as_bytes());
                out.extend_from_slice(&m.t_gw.to_be_bytes());
                out.extend_from_slice(&m.t_u.to_be_bytes());
                out.extend_from_slice(&m.c_gw.to_bytes());
                out.extend_from_slice(m.sigma_gw.as_bytes());
            }
            Message::M3(m) => out.extend_from_slice(&m.rho_sn),
            Message::PwdUpdateRequest(m) => {
                out.extend_from_slice(&m.t_u.to_be_bytes());
                out.extend_from_slice(&m.x.encode());
                out.extend_from_slice(&m.c_u.to_bytes());
            }
            Message::PwdUpdateResponse(PwdUpdateResponse::Ok { rho_gw }) => {
                out.push(STATUS_OK);
                out.extend_from_slice(rho_gw);
            }
            Message::PwdUpdateResponse(PwdUpdateResponse::Fail) => out.push(STATUS_FAIL),
        }
        out
    }

    pub fn decode(params: &SysParams, bytes: &[u8]) -> Result<Message> {
        let layout = Layout::new(params);
        let (&tag, _) = bytes.split_first().ok_or(Error::LengthMismatch {
            expected: 1,
            actual: 0,
        })?;
        let ty = MsgType::from_byte(tag)?;
        let expected = match ty {
            MsgType::LoginRequest => layout.m1_len(),
            MsgType::GatewayToSensor => layout.m2_len(),
            MsgType::SensorResponse => layout.m3_len(),
            MsgType::PwdUpdateRequest => layout.pwd_request_len(),
            MsgType::PwdUpdateResponse => match bytes.get(1) {
                Some(&STATUS_OK) => 2 + layout.kappa,
                Some(&STATUS_FAIL) => 2,
                Some(_) => return Err(Error::Decode("unknown status byte")),
                None => 2,
            },
        };
        if bytes.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: bytes.len(),
            });
        }
        let mut r = Reader { buf: &bytes[1..] };
        let msg = match ty {
            MsgType::LoginRequest => Message::M1(LoginRequestM1 {
                t_u: r.timestamp(),
                id_sn: Identity::from_padded(params, r.take(layout.id_len))?,
                x: GroupElement::decode(r.take(POINT_LEN))?,
                c_u: Ciphertext::from_bytes(r.take(layout.login_cu_len()))?,
                sigma_u: MacTag::from_slice(r.take(TAG_LEN))?,
            }),
            MsgType::GatewayToSensor => Message::M2(GatewayToSensorM2 {
                id_gw: Identity::from_padded(params, r.take(layout.id_len))?,
                t_gw: r.timestamp(),
                t_u: r.timestamp(),
                c_gw: Ciphertext::from_bytes(r.take(layout.cgw_len()))?,
                sigma_gw: MacTag::from_slice(r.take(TAG_LEN))?,
            }),
            MsgType::SensorResponse => Message::M3(SensorResponseM3 {
                rho_sn: r.array(),
            }),
            MsgType::PwdUpdateRequest => Message::PwdUpdateRequest(PwdUpdateRequest {
                t_u: r.timestamp(),
                x: GroupElement::decode(r.take(POINT_LEN))?,
                c_u: Ciphertext::from_bytes(r.take(layout.pwd_cu_len()))?,
            }),
            MsgType::PwdUpdateResponse => {
                let status = r.take(1)[0];
                Message::PwdUpdateResponse(if status == STATUS_OK {
                    PwdUpdateResponse::Ok { rho_gw: r.array() }
                } else {
                    PwdUpdateResponse::Fail
                })
            }
        };
        debug_assert!(r.buf.is_empty());
        Ok(msg)
    }
}

// Total length is checked up front, so `take` cannot run past the end.
struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        head
    }

    fn timestamp(&mut self) -> Timestamp {
        u64::from_be_bytes(self.array())
    }

    fn array<const N: usize>(&mut self) -> [u8; N] {
        self.take(N).try_into().expect("fixed width")
    }
}

macro_rules! message_from {
    ($($variant:ident => $ty:ty),*) => {$(
        impl From<$ty> for Message {
            fn from(m: $ty) -> Message {
                Message::$variant(m)
            }
        }
    )*};
}

message_from!(
    M1 => LoginRequestM1,
    M2 => GatewayToSensorM2,
    M3 => SensorResponseM3,
    PwdUpdateRequest => PwdUpdateRequest,
    PwdUpdateResponse => PwdUpdateResponse
);

fn check_width(field: &[u8], expected: usize) -> Result<()> {
    if field.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: field.len(),
        });
    }
    Ok(())
}

/// `ID_GW || ID_SN || T_U || C_U`, the input of `sigma_U`.
pub fn mac_input_m1(
    params: &SysParams,
    id_gw: &Identity,
    id_sn: &Identity,
    t_u: Timestamp,
    c_u: &Ciphertext,
) -> Result<Vec<u8>> {
    let layout = Layout::new(params);
    check_width(id_gw.as_bytes(), layout.id_len)?;
    check_width(id_sn.as_bytes(), layout.id_len)?;
    let mut out = Vec::with_capacity(2 * layout.id_len + TS_LEN + c_u.len());
    out.extend_from_slice(id_gw.as_bytes());
    out.extend_from_slice(id_sn.as_bytes());
    out.extend_from_slice(&t_u.to_be_bytes());
    out.extend_from_slice(&c_u.to_bytes());
    Ok(out)
}

/// `ID_GW || ID_SN || T_GW || T_U || C_GW`, the input of `sigma_GW`.
pub fn mac_input_m2(
    params: &SysParams,
    id_gw: &Identity,
    id_sn: &Identity,
    t_gw: Timestamp,
    t_u: Timestamp,
    c_gw: &Ciphertext,
) -> Result<Vec<u8>> {
    let layout = Layout::new(params);
    check_width(id_gw.as_bytes(), layout.id_len)?;
    check_width(id_sn.as_bytes(), layout.id_len)?;
    let mut out = Vec::with_capacity(2 * layout.id_len + 2 * TS_LEN + c_gw.len());
    out.extend_from_slice(id_gw.as_bytes());
    out.extend_from_slice(id_sn.as_bytes());
    out.extend_from_slice(&t_gw.to_be_bytes());
    out.extend_from_slice(&t_u.to_be_bytes());
    out.extend_from_slice(&c_gw.to_bytes());
    Ok(out)
}

/// One line of a hex-dump transcript: `direction  msg_type  hex-bytes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogLine {
    pub direction: String,
    pub msg_type: MsgType,
    pub bytes: Vec<u8>,
}

impl fmt::Display for LogLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}  {}  {}",
            self.direction,
            self.msg_type.label(),
            hex::encode(&self.bytes)
        )
    }
}

impl FromStr for LogLine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = s.split_whitespace();
        let (Some(direction), Some(label), Some(hex_bytes), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Decode("log line needs three fields"));
        };
        let bytes = hex::decode(hex_bytes).map_err(|_| Error::Decode("log line hex"))?;
        let msg_type: MsgType = label.parse()?;
        if bytes.first() != Some(&(msg_type as u8)) {
            return Err(Error::Decode("log label disagrees with type byte"));
        }
        Ok(LogLine {
            direction: direction.to_string(),
            msg_type,
            bytes,
        })
    }
}
