//! Deterministic in-memory network with the oracle interface of the
//! security model: `Execute`, `Send`, `Reveal`, the corruption queries, and
//! the freshness / cleanness predicates that decide which test queries are
//! admissible.
//!
//! One [`AdversaryContext`] owns the gateway, every registered party and
//! every instance. Randomness comes from a seeded ChaCha20 stream and time
//! from an advance-only virtual clock, so a scenario replays byte for byte.

mod oracle;
mod script;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub use oracle::{CorruptionLog, OracleEvent};
pub use script::{run_script, ScriptError};

use crate::error::{Error, Result};
use crate::identity::{Identity, Timestamp};
use crate::params::SysParams;
use crate::primitives::SymKey;
use crate::roles::{
    card_personalize, session_id_from_bytes, user_login_start, GatewaySecrets, SensorIdentity,
    SessionKey, SmartCard, UserCredentials, UserSessionState,
};
use crate::wire::{LogLine, Message};

/// Start of the virtual clock.
pub const CLOCK_EPOCH: Timestamp = 1_700_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityId {
    User(Identity),
    Sensor(Identity),
    Gateway,
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityId::User(id) | EntityId::Sensor(id) => write!(f, "{id}"),
            EntityId::Gateway => f.write_str("gw"),
        }
    }
}

/// `Pi_E^i`: instance `index` of entity `entity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId {
    pub entity: EntityId,
    pub index: usize,
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.entity, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceStatus {
    Idle,
    Running,
    /// Computed a session key (users and sensors only).
    Accepted,
    /// Gateway instance that forwarded its message.
    Completed,
    Aborted,
}

impl InstanceStatus {
    fn is_terminal(self) -> bool {
        matches!(self, Self::Accepted | Self::Completed | Self::Aborted)
    }
}

#[derive(Debug, Clone)]
enum RoleState {
    None,
    User { state: UserSessionState, m1: Vec<u8> },
}

/// Harness bookkeeping for one instance.
#[derive(Debug, Clone)]
pub struct EntityInstance {
    pub id: InstanceId,
    pub status: InstanceStatus,
    pub sk: Option<SessionKey>,
    pub sid: Option<Vec<u8>>,
    /// The entity on the other end of the key, when known.
    pub peer: Option<EntityId>,
    /// Why the instance aborted.
    pub error: Option<Error>,
    role: RoleState,
}

impl EntityInstance {
    pub fn accepted(&self) -> bool {
        self.status == InstanceStatus::Accepted
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub sender: String,
    pub receiver: String,
    pub bytes: Vec<u8>,
}

/// Append-only record of protocol traffic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn push(&mut self, sender: impl Into<String>, receiver: impl Into<String>, bytes: Vec<u8>) {
        self.entries.push(TranscriptEntry {
            sender: sender.into(),
            receiver: receiver.into(),
            bytes,
        });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Decodes every entry under `params`; fails on the first malformed one.
    pub fn messages(&self, params: &SysParams) -> Result<Vec<Message>> {
        self.entries
            .iter()
            .map(|e| Message::decode(params, &e.bytes))
            .collect()
    }

    /// Hex-dump log, one line per message.
    pub fn to_log(&self) -> Vec<LogLine> {
        self.entries
            .iter()
            .filter_map(|e| {
                let ty = crate::wire::MsgType::from_byte(*e.bytes.first()?).ok()?;
                Some(LogLine {
                    direction: format!("{}->{}", e.sender, e.receiver),
                    msg_type: ty,
                    bytes: e.bytes.clone(),
                })
            })
            .collect()
    }
}

/// What can be sent to an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SendInput {
    /// `start:(SN, GW)`: ask a user instance to open a session with `SN`.
    Start(Identity),
    Bytes(Vec<u8>),
}

struct RegisteredUser {
    creds: UserCredentials,
    card: SmartCard,
}

// What the gateway forwarded for a given M1, used for session identifiers.
struct Forwarded {
    m1: Vec<u8>,
    m2: Vec<u8>,
    user: Identity,
}

/// The simulated world plus the adversary's query log.
pub struct AdversaryContext {
    params: SysParams,
    rng: ChaCha20Rng,
    clock: Timestamp,
    gateway: GatewaySecrets,
    users: BTreeMap<Identity, RegisteredUser>,
    sensors: BTreeMap<Identity, SensorIdentity>,
    instances: BTreeMap<InstanceId, EntityInstance>,
    next_index: BTreeMap<EntityId, usize>,
    forwarded: Vec<Forwarded>,
    log: CorruptionLog,
    traffic: Transcript,
}

impl AdversaryContext {
    pub fn new(params: SysParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let gateway = GatewaySecrets::init(params, Identity::new(&params, b"gw")?, &mut rng);
        Ok(AdversaryContext {
            params,
            rng,
            clock: CLOCK_EPOCH,
            gateway,
            users: BTreeMap::new(),
            sensors: BTreeMap::new(),
            instances: BTreeMap::new(),
            next_index: BTreeMap::new(),
            forwarded: Vec::new(),
            log: CorruptionLog::default(),
            traffic: Transcript::default(),
        })
    }

    pub fn params(&self) -> &SysParams {
        &self.params
    }

    pub fn now(&self) -> Timestamp {
        self.clock
    }

    /// Moves the virtual clock forward; it never runs backwards.
    pub fn advance(&mut self, secs: u64) {
        self.clock += secs;
    }

    pub fn gateway(&self) -> &GatewaySecrets {
        &self.gateway
    }

    pub fn log(&self) -> &CorruptionLog {
        &self.log
    }

    /// Everything routed through `execute` and `send`, in order.
    pub fn traffic(&self) -> &Transcript {
        &self.traffic
    }

    pub fn id(&self, raw: &str) -> Result<Identity> {
        Identity::new(&self.params, raw.as_bytes())
    }

    /// Resolves a name to a registered entity; `gw` is the gateway.
    pub fn entity(&self, name: &str) -> Result<EntityId> {
        if name == "gw" {
            return Ok(EntityId::Gateway);
        }
        let id = self.id(name).map_err(|_| Error::UnknownEntity)?;
        if self.users.contains_key(&id) {
            Ok(EntityId::User(id))
        } else if self.sensors.contains_key(&id) {
            Ok(EntityId::Sensor(id))
        } else {
            Err(Error::UnknownEntity)
        }
    }

    pub fn register_user(&mut self, id: &str, password: &str) -> Result<EntityId> {
        let creds = UserCredentials::new(&self.params, id.as_bytes(), password.as_bytes())?;
        if self.users.contains_key(&creds.id) || self.sensors.contains_key(&creds.id) || id == "gw" {
            return Err(Error::AlreadyRegistered);
        }
        let payload = self.gateway.register_user(&creds.id, &mut self.rng)?;
        let card = card_personalize(payload, &creds.id, &creds.password);
        let entity = EntityId::User(creds.id.clone());
        self.users.insert(creds.id.clone(), RegisteredUser { creds, card });
        Ok(entity)
    }

    pub fn register_sensor(&mut self, id: &str) -> Result<EntityId> {
        let id = self.id(id)?;
        if self.users.contains_key(&id) || id.trimmed() == b"gw" {
            return Err(Error::AlreadyRegistered);
        }
        let sensor = self.gateway.register_sensor(&id)?;
        self.sensors.insert(id.clone(), sensor);
        Ok(EntityId::Sensor(id))
    }

    /// A user's current smart card.
    pub fn card(&self, user: &Identity) -> Result<&SmartCard> {
        self.users.get(user).map(|u| &u.card).ok_or(Error::UnknownEntity)
    }

    pub fn sensor(&self, id: &Identity) -> Result<&SensorIdentity> {
        self.sensors.get(id).ok_or(Error::UnknownEntity)
    }

    pub fn instance(&self, id: &InstanceId) -> Option<&EntityInstance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &EntityInstance> {
        self.instances.values()
    }

    fn check_entity(&self, entity: &EntityId) -> Result<()> {
        let known = match entity {
            EntityId::User(id) => self.users.contains_key(id),
            EntityId::Sensor(id) => self.sensors.contains_key(id),
            EntityId::Gateway => true,
        };
        known.then_some(()).ok_or(Error::UnknownEntity)
    }

    /// Creates a fresh idle instance of `entity`.
    pub fn new_instance(&mut self, entity: &EntityId) -> Result<InstanceId> {
        self.check_entity(entity)?;
        let counter = self.next_index.entry(entity.clone()).or_insert(0);
        let id = InstanceId {
            entity: entity.clone(),
            index: *counter,
        };
        *counter += 1;
        self.instances.insert(
            id.clone(),
            EntityInstance {
                id: id.clone(),
                status: InstanceStatus::Idle,
                sk: None,
                sid: None,
                peer: None,
                error: None,
                role: RoleState::None,
            },
        );
        Ok(id)
    }

    /// `Execute(U, SN, GW)`: one honest session between fresh instances.
    pub fn execute(&mut self, user: &EntityId, sensor: &EntityId) -> Result<(Transcript, [InstanceId; 3])> {
        let EntityId::Sensor(sn_id) = sensor else {
            return Err(Error::UnknownEntity);
        };
        let u = self.new_instance(user)?;
        let g = self.new_instance(&EntityId::Gateway)?;
        let s = self.new_instance(sensor)?;
        let mut transcript = Transcript::default();
        let flow = (|| {
            let m1 = self.send(&u, SendInput::Start(sn_id.clone()))?.ok_or(Error::InvalidState)?;
            transcript.push("U", "GW", m1.clone());
            let m2 = self.send(&g, SendInput::Bytes(m1))?.ok_or(Error::InvalidState)?;
            transcript.push("GW", "SN", m2.clone());
            let m3 = self.send(&s, SendInput::Bytes(m2))?.ok_or(Error::InvalidState)?;
            transcript.push("SN", "U", m3.clone());
            self.send(&u, SendInput::Bytes(m3))?;
            Ok(())
        })();
        if let Err(e) = flow {
            // An honest run only fails when a party is misconfigured; report the first abort.
            let reason = [&u, &g, &s]
                .iter()
                .find_map(|i| self.instances[*i].error.clone())
                .unwrap_or(e);
            return Err(reason);
        }
        Ok((transcript, [u, g, s]))
    }

    /// `Send(Pi, m)`: the instance consumes `input` and returns its reply,
    /// if any. Failed checks abort the instance silently; the reason is kept
    /// in [`EntityInstance::error`]. Instances that already finished ignore
    /// further input.
    pub fn send(&mut self, target: &InstanceId, input: SendInput) -> Result<Option<Vec<u8>>> {
        let inst = self.instances.get(target).ok_or(Error::UnknownEntity)?;
        if inst.status.is_terminal() {
            return Ok(None);
        }
        if let SendInput::Bytes(bytes) = &input {
            self.traffic.push("A", target.to_string(), bytes.clone());
        }
        let outcome = self.step(target, input);
        let inst = self.instances.get_mut(target).expect("checked above");
        match outcome {
            Ok(reply) => {
                if let Some(bytes) = &reply {
                    self.traffic.push(target.to_string(), "A", bytes.clone());
                }
                Ok(reply)
            }
            Err(e) => {
                inst.status = InstanceStatus::Aborted;
                inst.sk = None;
                inst.error = Some(e);
                if let RoleState::User { state, .. } = &mut inst.role {
                    state.abort();
                }
                Ok(None)
            }
        }
    }

    fn step(&mut self, target: &InstanceId, input: SendInput) -> Result<Option<Vec<u8>>> {
        let now = self.clock;
        let status = self.instances[target].status;
        let msg = match &input {
            SendInput::Start(_) => None,
            SendInput::Bytes(b) => Some(Message::decode(&self.params, b)?),
        };
        match (&target.entity, status, input, msg) {
            (EntityId::User(uid), InstanceStatus::Idle, SendInput::Start(sn), _) => {
                let user = &self.users[uid];
                let (m1, state) = user_login_start(&user.card, &user.creds, &sn, now, &mut self.rng)?;
                let bytes = Message::M1(m1).encode();
                let inst = self.instances.get_mut(target).expect("exists");
                inst.status = InstanceStatus::Running;
                inst.peer = Some(EntityId::Sensor(sn));
                inst.role = RoleState::User {
                    state,
                    m1: bytes.clone(),
                };
                Ok(Some(bytes))
            }
            (EntityId::User(_), InstanceStatus::Running, _, Some(Message::M3(m3))) => {
                let inst = self.instances.get_mut(target).expect("exists");
                let RoleState::User { state, m1 } = &mut inst.role else {
                    return Err(Error::InvalidState);
                };
                let sk = state.process_m3(&m3)?;
                let m2 = self
                    .forwarded
                    .iter()
                    .find(|f| &f.m1 == m1)
                    .map(|f| f.m2.as_slice())
                    .unwrap_or_default();
                inst.sid = Some(session_id_from_bytes(&self.params, m1, m2));
                inst.sk = Some(sk);
                inst.status = InstanceStatus::Accepted;
                Ok(None)
            }
            (EntityId::Gateway, InstanceStatus::Idle, SendInput::Bytes(bytes), Some(Message::M1(m1))) => {
                let (m2, user) = self.gateway.process_m1_with_user(&m1, now, &mut self.rng)?;
                let m2_bytes = Message::M2(m2).encode();
                self.forwarded.push(Forwarded {
                    m1: bytes,
                    m2: m2_bytes.clone(),
                    user: user.clone(),
                });
                let inst = self.instances.get_mut(target).expect("exists");
                inst.status = InstanceStatus::Completed;
                inst.peer = Some(EntityId::User(user));
                Ok(Some(m2_bytes))
            }
            (EntityId::Gateway, InstanceStatus::Idle, _, Some(Message::PwdUpdateRequest(req))) => {
                let resp = self.gateway.verify_pwd_update(&req, now);
                let inst = self.instances.get_mut(target).expect("exists");
                match resp {
                    Ok(rho_gw) => {
                        inst.status = InstanceStatus::Completed;
                        Ok(Some(
                            Message::PwdUpdateResponse(crate::wire::PwdUpdateResponse::Ok { rho_gw }).encode(),
                        ))
                    }
                    Err(e) => {
                        // The failure message is part of the protocol; the instance still aborts.
                        inst.status = InstanceStatus::Aborted;
                        inst.error = Some(e);
                        Ok(Some(
                            Message::PwdUpdateResponse(crate::wire::PwdUpdateResponse::Fail).encode(),
                        ))
                    }
                }
            }
            (EntityId::Sensor(sid), InstanceStatus::Idle, SendInput::Bytes(bytes), Some(Message::M2(m2))) => {
                let (m3, sk) = self.sensors[sid].process_m2(&m2, now)?;
                let origin = self.forwarded.iter().find(|f| f.m2 == bytes);
                let m1 = origin.map(|f| f.m1.as_slice()).unwrap_or_default();
                let sid_bytes = session_id_from_bytes(&self.params, m1, &bytes);
                let peer = origin.map(|f| EntityId::User(f.user.clone()));
                let inst = self.instances.get_mut(target).expect("exists");
                inst.sid = Some(sid_bytes);
                inst.sk = Some(sk);
                inst.peer = peer;
                inst.status = InstanceStatus::Accepted;
                Ok(Some(Message::M3(m3).encode()))
            }
            _ => Err(Error::InvalidState),
        }
    }

    /// `Reveal(Pi)`.
    pub fn reveal(&mut self, target: &InstanceId) -> Result<SessionKey> {
        let inst = self.instances.get(target).ok_or(Error::UnknownEntity)?;
        let sk = inst.sk.clone().filter(|_| inst.accepted()).ok_or(Error::NotAccepted)?;
        self.log.record(OracleEvent::Reveal(target.clone()));
        Ok(sk)
    }

    /// `CorruptLL(U)`: the user's password.
    pub fn corrupt_ll_user(&mut self, user: &EntityId) -> Result<Vec<u8>> {
        let EntityId::User(id) = user else {
            return Err(Error::UnknownEntity);
        };
        let pw = self.users.get(id).ok_or(Error::UnknownEntity)?.creds.password.clone();
        self.log.record(OracleEvent::CorruptLlUser(id.clone()));
        Ok(pw)
    }

    /// `CorruptSC(U)`: the card image, byte for byte.
    pub fn corrupt_sc(&mut self, user: &EntityId) -> Result<Vec<u8>> {
        let EntityId::User(id) = user else {
            return Err(Error::UnknownEntity);
        };
        let image = self.users.get(id).ok_or(Error::UnknownEntity)?.card.to_image();
        self.log.record(OracleEvent::CorruptSc(id.clone()));
        Ok(image)
    }

    /// `CorruptLL(SN)`: the sensor's `k_GS`.
    pub fn corrupt_ll_sensor(&mut self, sensor: &EntityId) -> Result<SymKey> {
        let EntityId::Sensor(id) = sensor else {
            return Err(Error::UnknownEntity);
        };
        let key = self.sensors.get(id).ok_or(Error::UnknownEntity)?.key().clone();
        self.log.record(OracleEvent::CorruptLlSensor(id.clone()));
        Ok(key)
    }

    /// `CorruptLL(GW)`: the master secrets `(y, z)`.
    pub fn corrupt_ll_gateway(&mut self) -> ([u8; 32], SymKey) {
        let (y, z) = self.gateway.master_secrets();
        let out = (y.to_bytes(), z.clone());
        self.log.record(OracleEvent::CorruptLlGateway);
        out
    }

    /// `CorruptVFR(GW)`: the gateway's password-verifier table.
    pub fn corrupt_vfr(&mut self) -> Vec<(Identity, Vec<u8>)> {
        self.log.record(OracleEvent::CorruptVfr);
        self.gateway.password_verifiers()
    }

    /// Both accepted and holding the same session identifier.
    pub fn are_partners(&self, a: &InstanceId, b: &InstanceId) -> bool {
        if a == b {
            return false;
        }
        match (self.instances.get(a), self.instances.get(b)) {
            (Some(x), Some(y)) => x.accepted() && y.accepted() && x.sid.is_some() && x.sid == y.sid,
            _ => false,
        }
    }

    pub fn partners_of(&self, target: &InstanceId) -> Vec<InstanceId> {
        self.instances
            .keys()
            .filter(|other| self.are_partners(target, other))
            .cloned()
            .collect()
    }

    /// Freshness of an instance under the current query log.
    pub fn is_fresh(&self, target: &InstanceId) -> bool {
        let peer = self.instances.get(target).and_then(|i| i.peer.clone());
        oracle::is_fresh(&self.log, target, peer.as_ref(), &self.partners_of(target))
    }

    /// Cleanness of a user under the current query log.
    pub fn is_clean(&self, user: &EntityId) -> bool {
        match user {
            EntityId::User(id) => oracle::is_clean(&self.log, id),
            _ => false,
        }
    }

    /// Instances that have been revealed so far.
    pub fn revealed(&self) -> BTreeSet<InstanceId> {
        self.log.revealed().clone()
    }
}
