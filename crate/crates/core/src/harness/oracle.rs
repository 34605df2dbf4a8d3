use std::collections::BTreeSet;

use super::{EntityId, InstanceId};
use crate::identity::Identity;

/// One adversary query that affects freshness or cleanness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleEvent {
    Reveal(InstanceId),
    CorruptLlUser(Identity),
    CorruptSc(Identity),
    CorruptLlSensor(Identity),
    CorruptLlGateway,
    CorruptVfr,
}

/// The query log and the sets derived from it. Sets only grow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorruptionLog {
    events: Vec<OracleEvent>,
    ll_users: BTreeSet<Identity>,
    sc_users: BTreeSet<Identity>,
    sensors: BTreeSet<Identity>,
    gateway: bool,
    revealed: BTreeSet<InstanceId>,
}

impl CorruptionLog {
    /// Rebuilds the derived sets by replaying `events` in order.
    pub fn from_events(events: impl IntoIterator<Item = OracleEvent>) -> Self {
        let mut log = CorruptionLog::default();
        for e in events {
            log.record(e);
        }
        log
    }

    pub fn record(&mut self, event: OracleEvent) {
        match &event {
            OracleEvent::Reveal(i) => {
                self.revealed.insert(i.clone());
            }
            OracleEvent::CorruptLlUser(u) => {
                self.ll_users.insert(u.clone());
            }
            OracleEvent::CorruptSc(u) => {
                self.sc_users.insert(u.clone());
            }
            OracleEvent::CorruptLlSensor(s) => {
                self.sensors.insert(s.clone());
            }
            OracleEvent::CorruptLlGateway => self.gateway = true,
            OracleEvent::CorruptVfr => {}
        }
        self.events.push(event);
    }

    pub fn events(&self) -> &[OracleEvent] {
        &self.events
    }

    pub fn revealed(&self) -> &BTreeSet<InstanceId> {
        &self.revealed
    }

    pub fn ll_users(&self) -> &BTreeSet<Identity> {
        &self.ll_users
    }

    pub fn sc_users(&self) -> &BTreeSet<Identity> {
        &self.sc_users
    }

    pub fn sensors(&self) -> &BTreeSet<Identity> {
        &self.sensors
    }

    pub fn gateway_corrupted(&self) -> bool {
        self.gateway
    }

    /// A user counts as corrupted only once both its password and its card leaked.
    pub fn user_corrupted(&self, user: &Identity) -> bool {
        self.ll_users.contains(user) && self.sc_users.contains(user)
    }

    fn entity_corrupted(&self, entity: &EntityId) -> bool {
        match entity {
            EntityId::User(u) => self.user_corrupted(u),
            EntityId::Sensor(s) => self.sensors.contains(s),
            EntityId::Gateway => self.gateway,
        }
    }
}

/// An instance is fresh unless (1) it or a partner was revealed, (2) the
/// user it or its peer is was fully corrupted, (3) the sensor it or its peer
/// is was corrupted, or (4) the gateway was corrupted.
pub fn is_fresh(
    log: &CorruptionLog,
    instance: &InstanceId,
    peer: Option<&EntityId>,
    partners: &[InstanceId],
) -> bool {
    let revealed = log.revealed.contains(instance) || partners.iter().any(|p| log.revealed.contains(p));
    // Gateway corruption is condition 4 alone.
    let party_corrupted = |e: &EntityId| !matches!(e, EntityId::Gateway) && log.entity_corrupted(e);
    let self_corrupted = party_corrupted(&instance.entity);
    let peer_corrupted = peer.is_some_and(party_corrupted);
    !(revealed || self_corrupted || peer_corrupted || log.gateway)
}

/// A user is clean unless it was fully corrupted or the gateway was.
/// Sensor corruption is irrelevant here.
pub fn is_clean(log: &CorruptionLog, user: &Identity) -> bool {
    !(log.user_corrupted(user) || log.gateway)
}
