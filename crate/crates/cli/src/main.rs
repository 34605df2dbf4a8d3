//! `wsn-ake`: drive the gateway, users and sensors from a state directory.
//!
//! Exit codes: 0 success, 1 protocol abort or failed check, 2 usage or
//! configuration error.

mod store;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde_json::json;
use sha2::{Digest, Sha256};
use wsn_ake::attacks::{jiang_trial, synthetic_identities, synthetic_passwords, CandidateSpace};
use wsn_ake::harness::{Transcript, CLOCK_EPOCH};
use wsn_ake::opcount::{self, Role};
use wsn_ake::roles::{
    card_personalize, pwd_update_noninteractive, user_login_start, GatewaySecrets, SessionKey, UserCredentials,
};
use wsn_ake::wire::Message;
use wsn_ake::{Error, Identity, SysParams, Timestamp};

use store::Store;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("ExistingState: {0} already holds gateway state (use --force to replace it)")]
    ExistingState(PathBuf),
    #[error("DuplicateId: {0} is already registered")]
    DuplicateId(String),
    #[error("no gateway state in {0}; run `setup` first")]
    NoState(PathBuf),
    #[error("state directory is locked by another invocation ({0})")]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {0}", .0.name())]
    Core(#[from] Error),
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wsn-ake", version, about = "Smart-card user authentication and key exchange for sensor networks")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, clap::Args)]
struct Options {
    /// Parameter file (`key = value` lines); defaults to the built-in set.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[arg(long, global = true, default_value = "wsn-state")]
    state_dir: PathBuf,
    /// Seed for all randomness; output is then reproducible.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use a fixed clock instead of the system time.
    #[arg(long, global = true)]
    virtual_clock: bool,
    /// Replace existing gateway state on `setup`.
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create gateway secrets and print the public parameters.
    Setup {
        #[arg(long, default_value = "gw-1")]
        gateway_id: String,
    },
    /// Issue a smart card or a sensor key.
    Register {
        #[command(subcommand)]
        kind: RegisterKind,
    },
    /// Run one login between a user and a sensor.
    Session { user: String, password: String, sensor: String },
    /// Change the password stored on a card.
    Pwd {
        user: String,
        old: String,
        new: String,
        /// Confirm the old password with the gateway first.
        #[arg(long)]
        interactive: bool,
    },
    /// Offline dictionary attack on the scheme of Jiang et al.
    AttackJiang {
        /// Password dictionary, one per line (default: 1000 synthetic).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Identity candidates, one per line (default: 100 synthetic).
        #[arg(long)]
        ids: Option<PathBuf>,
    },
    /// Count cryptographic operations in one login.
    Audit {
        /// Print `role.op = n` lines.
        #[arg(long)]
        machine: bool,
    },
    /// Time in-memory logins. Informational only.
    Bench {
        #[arg(long, default_value_t = 100)]
        sessions: u32,
    },
}

#[derive(Debug, Subcommand)]
enum RegisterKind {
    User { id: String, password: String },
    Sensor { id: String },
}

struct Ctx {
    opts: Options,
    rng: ChaCha20Rng,
}

impl Ctx {
    fn now(&self) -> Timestamp {
        if self.opts.virtual_clock {
            return CLOCK_EPOCH;
        }
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(CLOCK_EPOCH)
    }

    fn params_arg(&self) -> Result<Option<SysParams>, CliError> {
        let Some(path) = &self.opts.params else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(Some(SysParams::parse(&text)?))
    }

    /// Stored parameters; a `--params` file must agree with them.
    fn params(&self, store: &Store) -> Result<SysParams, CliError> {
        let stored = store.params()?;
        match self.params_arg()? {
            Some(p) if p != stored => Err(CliError::Usage(
                "--params does not match the parameters of the state directory".into(),
            )),
            _ => Ok(stored),
        }
    }

    fn id(params: &SysParams, raw: &str) -> Result<Identity, CliError> {
        Identity::new(params, raw.as_bytes()).map_err(|e| CliError::Usage(format!("identity {raw:?}: {e}")))
    }

    fn print(&self, text: impl AsRef<str>, value: serde_json::Value) {
        if self.opts.json {
            println!("{value}");
        } else {
            print!("{}", text.as_ref());
        }
    }
}

/// Seeded runs derive a per-command stream, so two commands never share
/// nonces; unseeded runs draw from the OS.
fn rng_for(cli: &Cli) -> ChaCha20Rng {
    match cli.opts.seed {
        Some(seed) => {
            let mut h = Sha256::new();
            h.update(b"wsn-ake cli");
            h.update(seed.to_be_bytes());
            h.update(format!("{:?}", cli.cmd));
            ChaCha20Rng::from_seed(h.finalize().into())
        }
        None => ChaCha20Rng::from_entropy(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rng = rng_for(&cli);
    let mut ctx = Ctx { opts: cli.opts, rng };
    match run(&mut ctx, cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(ctx: &mut Ctx, cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Setup { gateway_id } => setup(ctx, &gateway_id),
        Command::Register {
            kind: RegisterKind::User { id, password },
        } => register_user(ctx, &id, &password),
        Command::Register {
            kind: RegisterKind::Sensor { id },
        } => register_sensor(ctx, &id),
        Command::Session { user, password, sensor } => session(ctx, &user, &password, &sensor),
        Command::Pwd {
            user,
            old,
            new,
            interactive,
        } => pwd(ctx, &user, &old, &new, interactive),
        Command::AttackJiang { dict, ids } => attack_jiang(ctx, dict.as_deref(), ids.as_deref()),
        Command::Audit { machine } => audit(ctx, machine),
        Command::Bench { sessions } => bench(ctx, sessions),
    }
}

fn setup(ctx: &mut Ctx, gateway_id: &str) -> Result<ExitCode, CliError> {
    let params = ctx.params_arg()?.unwrap_or_default();
    let store = Store::open(&ctx.opts.state_dir)?;
    if store.gateway_path().exists() {
        if !ctx.opts.force {
            return Err(CliError::ExistingState(ctx.opts.state_dir.clone()));
        }
        // Cards and keys issued under the old secrets are useless now.
        for sub in ["users", "sensors"] {
            let dir = ctx.opts.state_dir.join(sub);
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            }
        }
    }
    let id_gw = Ctx::id(&params, gateway_id)?;
    let gw = GatewaySecrets::init(params, id_gw, &mut ctx.rng);
    store.write(&store.params_path(), params.to_text().as_bytes())?;
    store.write(&store.gateway_path(), gw.to_state_text().as_bytes())?;

    let y = hex::encode(gw.public_key().encode());
    let digest = hex::encode(params.digest());
    ctx.print(
        format!("id_gw = {gateway_id}\nY = {y}\nparams_digest = {digest}\n{}", params.to_text()),
        json!({ "id_gw": gateway_id, "Y": y, "params_digest": digest, "params": params.to_text() }),
    );
    Ok(ExitCode::SUCCESS)
}

fn register_user(ctx: &mut Ctx, id: &str, password: &str) -> Result<ExitCode, CliError> {
    let store = Store::open(&ctx.opts.state_dir)?;
    let params = ctx.params(&store)?;
    let gw = store.gateway(params)?;
    let path = store.card_path(id);
    if path.exists() {
        return Err(CliError::DuplicateId(id.into()));
    }
    let creds = UserCredentials::new(&params, id.as_bytes(), password.as_bytes())
        .map_err(|e| CliError::Usage(format!("identity {id:?}: {e}")))?;
    let payload = gw.register_user(&creds.id, &mut ctx.rng)?;
    let image = card_personalize(payload, &creds.id, &creds.password).to_image();
    store.write(&path, &image)?;
    ctx.print(
        format!("card {} ({} bytes)\n", path.display(), image.len()),
        json!({ "user": id, "card": path, "bytes": image.len() }),
    );
    Ok(ExitCode::SUCCESS)
}

fn register_sensor(ctx: &mut Ctx, id: &str) -> Result<ExitCode, CliError> {
    let store = Store::open(&ctx.opts.state_dir)?;
    let params = ctx.params(&store)?;
    let mut gw = store.gateway(params)?;
    let sensor = match gw.register_sensor(&Ctx::id(&params, id)?) {
        Err(Error::AlreadyRegistered) => return Err(CliError::DuplicateId(id.into())),
        other => other?,
    };
    let path = store.sensor_path(id);
    store.write(&path, sensor.to_key_text().as_bytes())?;
    store.write(&store.gateway_path(), gw.to_state_text().as_bytes())?;
    ctx.print(
        format!("sensor key {}\n", path.display()),
        json!({ "sensor": id, "key": path }),
    );
    Ok(ExitCode::SUCCESS)
}

struct SessionRun {
    transcript: Transcript,
    keys: Option<(SessionKey, SessionKey)>,
}

fn session(ctx: &mut Ctx, user: &str, password: &str, sensor: &str) -> Result<ExitCode, CliError> {
    let store = Store::open(&ctx.opts.state_dir)?;
    let params = ctx.params(&store)?;
    let mut gw = store.gateway(params)?;
    let card = store.card(&params, user)?;
    let creds = UserCredentials::new(&params, user.as_bytes(), password.as_bytes())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let id_sn = Ctx::id(&params, sensor)?;
    let now = ctx.now();

    let mut run = SessionRun {
        transcript: Transcript::default(),
        keys: None,
    };
    let outcome = (|| -> Result<(), CliError> {
        let (m1, mut state) = user_login_start(&card, &creds, &id_sn, now, &mut ctx.rng)?;
        run.transcript.push("U", "GW", Message::M1(m1.clone()).encode());
        let m2 = gw.process_m1(&m1, now, &mut ctx.rng)?;
        run.transcript.push("GW", "SN", Message::M2(m2.clone()).encode());
        let sn = store.sensor(params, sensor)?;
        let (m3, sensor_key) = sn.process_m2(&m2, now)?;
        run.transcript.push("SN", "U", Message::M3(m3.clone()).encode());
        let user_key = state.process_m3(&m3)?;
        run.keys = Some((user_key, sensor_key));
        Ok(())
    })();
    let abort = match outcome {
        Ok(()) => None,
        Err(CliError::Core(e)) => Some(e),
        Err(other) => return Err(other),
    };

    let log: Vec<String> = run.transcript.to_log().iter().map(ToString::to_string).collect();
    let (user_key, sensor_key) = match &run.keys {
        Some((u, s)) => (Some(hex::encode(u.as_bytes())), Some(hex::encode(s.as_bytes()))),
        None => (None, None),
    };
    let verdict = match (&abort, &run.keys) {
        (Some(e), _) => format!("ABORT {}", e.name()),
        (None, Some((u, s))) if u == s => "MATCH".to_string(),
        _ => "MISMATCH".to_string(),
    };
    let mut text = String::new();
    for line in &log {
        text.push_str(line);
        text.push('\n');
    }
    if let (Some(u), Some(s)) = (&user_key, &sensor_key) {
        text.push_str(&format!("user_key   = {u}\nsensor_key = {s}\n"));
    }
    text.push_str(&verdict);
    text.push('\n');
    ctx.print(
        text,
        json!({ "transcript": log, "user_key": user_key, "sensor_key": sensor_key, "verdict": verdict }),
    );
    Ok(if verdict == "MATCH" {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn pwd(ctx: &mut Ctx, user: &str, old: &str, new: &str, interactive: bool) -> Result<ExitCode, CliError> {
    let store = Store::open(&ctx.opts.state_dir)?;
    let params = ctx.params(&store)?;
    let card = store.card(&params, user)?;
    let creds = UserCredentials::new(&params, user.as_bytes(), old.as_bytes())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let path = store.card_path(user);

    if !interactive {
        // Nothing checks the old password here; a wrong one ruins the card.
        let updated = pwd_update_noninteractive(&card, &creds.id, old.as_bytes(), new.as_bytes());
        store.write(&path, &updated.to_image())?;
        ctx.print("card updated (unverified)\n", json!({ "user": user, "status": "updated" }));
        return Ok(ExitCode::SUCCESS);
    }

    let mut gw = store.gateway(params)?;
    let now = ctx.now();
    let (req, pending) = card.pwd_update_start(&creds, now, &mut ctx.rng)?;
    let resp = gw.process_pwd_update(&req, now);
    match pending.finish(&resp, new.as_bytes()) {
        Ok(updated) => {
            store.write(&path, &updated.to_image())?;
            ctx.print("OK\n", json!({ "user": user, "status": "ok" }));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            ctx.print(
                format!("FAIL {}\n", e.name()),
                json!({ "user": user, "status": "fail", "error": e.name() }),
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn read_list(path: &Path, what: &str) -> Result<Vec<Vec<u8>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let list = wsn_ake::attacks::parse_dictionary(&text);
    if list.is_empty() {
        return Err(CliError::Usage(format!("{what} file {} is empty", path.display())));
    }
    Ok(list)
}

fn attack_jiang(ctx: &mut Ctx, dict: Option<&Path>, ids: Option<&Path>) -> Result<ExitCode, CliError> {
    let params = ctx.params_arg()?.unwrap_or_default();
    let passwords = match dict {
        Some(p) => read_list(p, "dictionary")?,
        None => synthetic_passwords(1000),
    };
    let raw_ids = match ids {
        Some(p) => read_list(p, "identity")?,
        None => synthetic_identities(100).into_iter().map(String::into_bytes).collect(),
    };
    let identities = raw_ids
        .iter()
        .map(|raw| Identity::new(&params, raw))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("identity file: {e}")))?;
    let space = CandidateSpace::new(passwords, identities)?;
    let planted = (
        ctx.rng.next_u64() as usize % space.passwords.len(),
        ctx.rng.next_u64() as usize % space.identities.len(),
    );
    let now = ctx.now();
    let mut report = jiang_trial(&space, planted, now, &mut ctx.rng)?;
    if ctx.opts.virtual_clock {
        report.elapsed = None;
    }
    let recovered = report.recovered.clone().map(|(id, pw)| json!({ "id": id, "password": pw }));
    ctx.print(
        report.to_string(),
        json!({
            "password_space": report.password_space,
            "identity_space": report.identity_space,
            "planted": { "id": report.planted.0, "password": report.planted.1 },
            "recovered": recovered,
            "hash_count": report.hash_count,
            "hash_bound": report.hash_bound,
            "elapsed_ms": report.elapsed.map(|d| d.as_millis() as u64),
            "verdict": if report.success() { "RECOVERED" } else { "FAIL" },
        }),
    );
    Ok(if report.success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn audit(ctx: &mut Ctx, machine: bool) -> Result<ExitCode, CliError> {
    let params = ctx.params_arg()?.unwrap_or_default();
    let audit = opcount::audited_session(&params, ctx.opts.seed.unwrap_or(0))?;
    let pass = opcount::all_pass(&audit);
    let counts = |role: Role| {
        let c = audit.get(role);
        json!({ "M": c.m, "P": c.p, "E": c.e, "A": c.a, "H": c.h })
    };
    let text = if machine {
        opcount::machine_readable(&audit)
    } else {
        opcount::report(&audit)
    };
    ctx.print(
        text,
        json!({
            "user": counts(Role::User),
            "gw": counts(Role::Gateway),
            "sn": counts(Role::Sensor),
            "total": audit.total().to_string(),
            "pass": pass,
        }),
    );
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn bench(ctx: &mut Ctx, sessions: u32) -> Result<ExitCode, CliError> {
    let params = ctx.params_arg()?.unwrap_or_default();
    let rng = &mut ctx.rng;
    let mut gw = GatewaySecrets::init(params, Ctx::id(&params, "bench-gw")?, rng);
    let id_sn = Ctx::id(&params, "bench-sn")?;
    let sensor = gw.register_sensor(&id_sn)?;
    let creds = UserCredentials::new(&params, b"bench-user", b"bench-pw")?;
    let card = card_personalize(gw.register_user(&creds.id, rng)?, &creds.id, &creds.password);

    let start = Instant::now();
    for i in 0..u64::from(sessions) {
        // Distinct timestamps keep the replay cache out of the way.
        let now = CLOCK_EPOCH + i;
        let (m1, mut state) = user_login_start(&card, &creds, &id_sn, now, rng)?;
        let m2 = gw.process_m1(&m1, now, rng)?;
        let (m3, _) = sensor.process_m2(&m2, now)?;
        state.process_m3(&m3)?;
    }
    let elapsed = start.elapsed();
    let per = elapsed.as_secs_f64() * 1000.0 / f64::from(sessions.max(1));
    ctx.print(
        format!("sessions: {sessions}\ntotal_ms: {}\nper_session_ms: {per:.3}\n", elapsed.as_millis()),
        json!({ "sessions": sessions, "total_ms": elapsed.as_millis() as u64, "per_session_ms": per }),
    );
    Ok(ExitCode::SUCCESS)
}
