//! State directory layout:
//!
//! ```text
//! <dir>/params.conf         parameter set fixed at setup
//! <dir>/gateway.state       gateway secrets and sensor registry
//! <dir>/users/<id>.card     smart card images
//! <dir>/sensors/<id>.key    sensor key files
//! <dir>/.lock               held for the lifetime of one invocation
//! ```

use std::fs::{self, OpenOptions};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use wsn_ake::roles::{GatewaySecrets, SensorIdentity, SmartCard};
use wsn_ake::SysParams;

use crate::CliError;

pub struct Store {
    dir: PathBuf,
    lock: PathBuf,
}

impl Store {
    /// Takes the exclusive lock, creating the directory if needed.
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let lock = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(Store {
                dir: dir.to_path_buf(),
                lock,
            }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Locked(lock)),
            Err(e) => Err(CliError::io(&lock, e)),
        }
    }

    pub fn gateway_path(&self) -> PathBuf {
        self.dir.join("gateway.state")
    }

    pub fn params_path(&self) -> PathBuf {
        self.dir.join("params.conf")
    }

    pub fn card_path(&self, id: &str) -> PathBuf {
        self.dir.join("users").join(format!("{}.card", file_name(id)))
    }

    pub fn sensor_path(&self, id: &str) -> PathBuf {
        self.dir.join("sensors").join(format!("{}.key", file_name(id)))
    }

    pub fn params(&self) -> Result<SysParams, CliError> {
        let path = self.params_path();
        if !path.exists() {
            return Err(CliError::NoState(self.dir.clone()));
        }
        Ok(SysParams::parse(&read_text(&path)?)?)
    }

    pub fn gateway(&self, params: SysParams) -> Result<GatewaySecrets, CliError> {
        let path = self.gateway_path();
        if !path.exists() {
            return Err(CliError::NoState(self.dir.clone()));
        }
        Ok(GatewaySecrets::from_state_text(params, &read_text(&path)?)?)
    }

    pub fn card(&self, params: &SysParams, id: &str) -> Result<SmartCard, CliError> {
        let path = self.card_path(id);
        let image = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(SmartCard::from_image(params, &image)?)
    }

    pub fn sensor(&self, params: SysParams, id: &str) -> Result<SensorIdentity, CliError> {
        Ok(SensorIdentity::from_key_text(params, &read_text(&self.sensor_path(id))?)?)
    }

    pub fn write(&self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        // Write then rename, so a crash never leaves a half-written card.
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
    }
}

impl Drop for Store {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

// Identities are arbitrary bytes; keep file names portable.
fn file_name(id: &str) -> String {
    if id.bytes().all(|b| b.is_ascii_alphanumeric() || b"-_.".contains(&b)) && !id.starts_with('.') {
        id.to_string()
    } else {
        format!("x{}", hex::encode(id))
    }
}
