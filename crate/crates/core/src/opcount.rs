//! Operation counting for the efficiency audit.
//!
//! Primitives report each counted operation to a thread-local tally; an
//! audit snapshots the tally around each role's step. Counts are per
//! thread, so concurrent sessions on different threads do not mix.

use std::cell::Cell;
use std::fmt::{self, Write as _};
use std::ops::{Add, Sub};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::identity::{Identity, Timestamp};
use crate::params::SysParams;
use crate::roles::{card_personalize, user_login_start, GatewaySecrets, UserCredentials};

/// The five operation classes of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Scalar-point multiplication (M).
    ScalarMult,
    /// Map-to-point (P). The scheme never hashes to the curve.
    MapToPoint,
    /// Symmetric encryption or decryption (E).
    Sym,
    /// MAC generation or verification (A).
    Mac,
    /// Hash evaluation of H, J or I (H).
    Hash,
}

thread_local! {
    static TALLY: Cell<OpCounter> = const { Cell::new(OpCounter::ZERO) };
}

pub(crate) fn record(op: Op) {
    TALLY.with(|t| {
        let mut c = t.get();
        match op {
            Op::ScalarMult => c.m += 1,
            Op::MapToPoint => c.p += 1,
            Op::Sym => c.e += 1,
            Op::Mac => c.a += 1,
            Op::Hash => c.h += 1,
        }
        t.set(c);
    });
}

/// Running total for the current thread since it started.
pub fn snapshot() -> OpCounter {
    TALLY.with(Cell::get)
}

/// Runs `f` and returns its result together with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounter) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub m: u64,
    pub p: u64,
    pub e: u64,
    pub a: u64,
    pub h: u64,
}

impl OpCounter {
    pub const ZERO: OpCounter = OpCounter { m: 0, p: 0, e: 0, a: 0, h: 0 };

    pub const fn new(m: u64, p: u64, e: u64, a: u64, h: u64) -> Self {
        OpCounter { m, p, e, a, h }
    }

    fn fields(&self) -> [(&'static str, u64); 5] {
        [("M", self.m), ("P", self.p), ("E", self.e), ("A", self.a), ("H", self.h)]
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, o: OpCounter) -> OpCounter {
        OpCounter::new(self.m + o.m, self.p + o.p, self.e + o.e, self.a + o.a, self.h + o.h)
    }
}

impl Sub for OpCounter {
    type Output = OpCounter;

    fn sub(self, o: OpCounter) -> OpCounter {
        OpCounter::new(self.m - o.m, self.p - o.p, self.e - o.e, self.a - o.a, self.h - o.h)
    }
}

/// Compact `3M+5E+4A+7H` notation, omitting zero classes.
impl fmt::Display for OpCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .fields()
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(name, n)| if *n == 1 { format!("1{name}") } else { format!("{n}{name}") })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join("+"))
        }
    }
}

/// Sensor cost of one login: `1E+1A+2H`.
pub const EXPECTED_SENSOR: OpCounter = OpCounter::new(0, 0, 1, 1, 2);
/// Total cost of one login over all three parties: `3M+5E+4A+7H`.
pub const EXPECTED_TOTAL: OpCounter = OpCounter::new(3, 0, 5, 4, 7);
/// Gateway share, counted step by step from the protocol: `1M+3E+2A+1H`.
pub const EXPECTED_GATEWAY: OpCounter = OpCounter::new(1, 0, 3, 2, 1);
/// User share, counted step by step from the protocol: `2M+1E+1A+4H`.
pub const EXPECTED_USER: OpCounter = OpCounter::new(2, 0, 1, 1, 4);

/// Fixed login time used by [`audited_session`].
pub const AUDIT_EPOCH: Timestamp = 1_700_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    User,
    Gateway,
    Sensor,
}

impl Role {
    pub fn key(self) -> &'static str {
        match self {
            Role::User => "user",
            Role::Gateway => "gw",
            Role::Sensor => "sn",
        }
    }
}

/// Per-role operation counts of one authentication and key exchange run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionAudit {
    pub user: OpCounter,
    pub gateway: OpCounter,
    pub sensor: OpCounter,
}

impl SessionAudit {
    pub fn total(&self) -> OpCounter {
        self.user + self.gateway + self.sensor
    }

    pub fn get(&self, role: Role) -> OpCounter {
        match role {
            Role::User => self.user,
            Role::Gateway => self.gateway,
            Role::Sensor => self.sensor,
        }
    }
}

/// Runs one honest login with seeded randomness and counts each role's
/// operations. Setup (gateway keys, registration) is not counted.
pub fn audited_session(params: &SysParams, seed: u64) -> Result<SessionAudit> {
    audited_session_at(params, seed, AUDIT_EPOCH)
}

pub fn audited_session_at(params: &SysParams, seed: u64, now: Timestamp) -> Result<SessionAudit> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut gw = GatewaySecrets::init(*params, Identity::new(params, b"gateway")?, &mut rng);
    let id_sn = Identity::new(params, b"sensor")?;
    let sensor = gw.register_sensor(&id_sn)?;
    let creds = UserCredentials::new(params, b"user", b"password")?;
    let card = card_personalize(gw.register_user(&creds.id, &mut rng)?, &creds.id, &creds.password);

    let (started, user_a) = measure(|| user_login_start(&card, &creds, &id_sn, now, &mut rng));
    let (m1, mut state) = started?;
    let (m2, gateway) = measure(|| gw.process_m1(&m1, now, &mut rng));
    let (answered, sensor_ops) = measure(|| sensor.process_m2(&m2?, now));
    let (m3, _) = answered?;
    let (accepted, user_b) = measure(|| state.process_m3(&m3));
    accepted?;

    Ok(SessionAudit {
        user: user_a + user_b,
        gateway,
        sensor: sensor_ops,
    })
}

fn delta(counted: OpCounter, expected: OpCounter) -> String {
    let diffs: Vec<String> = counted
        .fields()
        .iter()
        .zip(expected.fields())
        .filter(|((_, c), (_, e))| c != e)
        .map(|((name, c), (_, e))| format!("{name} {:+}", *c as i64 - e as i64))
        .collect();
    diffs.join(", ")
}

/// Renders the audit as a comparison table with one PASS/FAIL verdict per row.
pub fn report(audit: &SessionAudit) -> String {
    let rows = [
        ("user", audit.user, EXPECTED_USER),
        ("gw", audit.gateway, EXPECTED_GATEWAY),
        ("sn", audit.sensor, EXPECTED_SENSOR),
        ("total", audit.total(), EXPECTED_TOTAL),
    ];
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:>2} {:>2} {:>2} {:>2} {:>2}  {:<14} {:<14} verdict",
        "role", "M", "P", "E", "A", "H", "counted", "expected"
    );
    for (name, counted, expected) in rows {
        let verdict = if counted == expected {
            "PASS".to_string()
        } else {
            format!("FAIL ({})", delta(counted, expected))
        };
        let _ = writeln!(
            out,
            "{:<6} {:>2} {:>2} {:>2} {:>2} {:>2}  {:<14} {:<14} {}",
            name,
            counted.m,
            counted.p,
            counted.e,
            counted.a,
            counted.h,
            counted.to_string(),
            expected.to_string(),
            verdict
        );
    }
    let _ = writeln!(
        out,
        "sensor row: E={} A={} H={}",
        audit.sensor.e, audit.sensor.a, audit.sensor.h
    );
    out
}

/// `role.op = n` lines for scripts.
pub fn machine_readable(audit: &SessionAudit) -> String {
    let mut out = String::new();
    for (name, counter) in [
        ("user", audit.user),
        ("gw", audit.gateway),
        ("sn", audit.sensor),
        ("total", audit.total()),
    ] {
        for (op, n) in counter.fields() {
            let _ = writeln!(out, "{name}.{op} = {n}");
        }
    }
    out
}

/// True when every row matches its expected count.
pub fn all_pass(audit: &SessionAudit) -> bool {
    audit.user == EXPECTED_USER
        && audit.gateway == EXPECTED_GATEWAY
        && audit.sensor == EXPECTED_SENSOR
        && audit.total() == EXPECTED_TOTAL
}
