//! System parameters and the `key = value` text format shared by the
//! parameter file, the gateway state file and sensor key files.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Nonce length of the symmetric scheme, in bytes.
pub const NONCE_LEN: usize = 16;

/// Largest identity width accepted in a parameter file.
pub const MAX_ID_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveId {
    P256,
}

impl CurveId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveId::P256 => "P-256",
        }
    }
}

impl FromStr for CurveId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P-256" | "p256" | "secp256r1" | "prime256v1" => Ok(CurveId::P256),
            other => Err(Error::Params(format!("unsupported curve {other:?}"))),
        }
    }
}

/// Public parameters fixed by the gateway at system initialization.
///
/// The generator and group order are implied by `curve`. The EID width
/// `omega` is not configurable: it is the ciphertext length of a
/// `2 * id_len` byte plaintext.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SysParams {
    pub curve: CurveId,
    /// Session key length in bits.
    pub kappa: usize,
    /// MAC / symmetric key length in bits.
    pub ell: usize,
    /// Identity width in bytes.
    pub id_len: usize,
    /// Freshness window in seconds.
    pub ts_window: u64,
}

impl Default for SysParams {
    fn default() -> Self {
        SysParams {
            curve: CurveId::P256,
            kappa: 256,
            ell: 256,
            id_len: 16,
            ts_window: 60,
        }
    }
}

impl SysParams {
    pub fn validate(&self) -> Result<()> {
        // The suite is SHA-256 / HMAC-SHA256 / AES-256-CTR, so both widths are pinned.
        if self.kappa != 256 {
            return Err(Error::Params(format!("kappa must be 256, got {}", self.kappa)));
        }
        if self.ell != 256 {
            return Err(Error::Params(format!("ell must be 256, got {}", self.ell)));
        }
        if self.id_len == 0 || self.id_len > MAX_ID_LEN {
            return Err(Error::Params(format!(
                "id_len must be in 1..={MAX_ID_LEN}, got {}",
                self.id_len
            )));
        }
        Ok(())
    }

    pub fn kappa_bytes(&self) -> usize {
        self.kappa / 8
    }

    pub fn ell_bytes(&self) -> usize {
        self.ell / 8
    }

    /// EID width in bits.
    pub fn omega(&self) -> usize {
        8 * self.omega_bytes()
    }

    pub fn omega_bytes(&self) -> usize {
        NONCE_LEN + 2 * self.id_len
    }

    /// Canonical text form; stable across runs and used for the card digest.
    pub fn to_text(&self) -> String {
        format!(
            "curve_id = {}\nkappa = {}\nell = {}\nid_len = {}\nts_window = {}\n",
            self.curve.as_str(),
            self.kappa,
            self.ell,
            self.id_len,
            self.ts_window
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut params = SysParams::default();
        for (key, value) in parse_kv(text)? {
            match key.as_str() {
                "curve_id" => params.curve = value.parse()?,
                "kappa" => params.kappa = parse_num(&key, &value)?,
                "ell" => params.ell = parse_num(&key, &value)?,
                "id_len" => params.id_len = parse_num(&key, &value)?,
                "ts_window" => params.ts_window = parse_num(&key, &value)?,
                other => return Err(Error::Params(format!("unknown key {other:?}"))),
            }
        }
        params.validate()?;
        Ok(params)
    }

    /// SHA-256 of the canonical text form.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_text().as_bytes()).into()
    }
}

impl fmt::Display for SysParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Params(format!("{key}: not a number: {value:?}")))
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys keep their file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Params(format!("line {}: expected `key = value`", lineno + 1)))?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_widths() {
        let p = SysParams::default();
        assert_eq!(p.omega(), 384);
        assert_eq!(p.omega_bytes(), 48);
        assert_eq!(p.kappa_bytes(), 32);
    }

    #[test]
    fn text_round_trip() {
        let p = SysParams {
            id_len: 20,
            ts_window: 5,
            ..SysParams::default()
        };
        assert_eq!(SysParams::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn parse_with_comments_and_partial_keys() {
        let p = SysParams::parse("# test\n\nts_window = 30\n").unwrap();
        assert_eq!(p.ts_window, 30);
        assert_eq!(p.id_len, 16);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SysParams::parse("kappa = 128").is_err());
        assert!(SysParams::parse("curve_id = P-384").is_err());
        assert!(SysParams::parse("id_len = 0").is_err());
        assert!(SysParams::parse("bogus = 1").is_err());
        assert!(SysParams::parse("no equals sign").is_err());
        assert!(SysParams::parse("ts_window = soon").is_err());
    }
}
