//! Line-based scenario scripts driving an [`AdversaryContext`].
//!
//! ```text
//! # comments and blank lines are ignored
//! user u1 hunter2         register a user with a password
//! sensor s1               register a sensor
//! execute u1 s1           honest session; prints the transcript
//! start u1 s1             new user instance, Send(start); prints M1
//! send gw <hex>           deliver to a new instance of an entity
//! send s1#0 <hex>         deliver to an existing instance
//! reveal u1#0
//! corrupt ll u1 | corrupt sc u1 | corrupt ll s1 | corrupt ll gw | corrupt vfr
//! fresh u1#0 | clean u1 | partners u1#0 s1#0
//! advance 61              move the virtual clock forward
//! ```

use thiserror::Error;

use super::{AdversaryContext, EntityId, InstanceId, SendInput};
use crate::error::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Runs `script` and returns the output lines.
pub fn run_script(ctx: &mut AdversaryContext, script: &str) -> Result<Vec<String>, ScriptError> {
    let mut out = Vec::new();
    for (n, raw) in script.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        run_line(ctx, &words, &mut out).map_err(|message| ScriptError { line: n + 1, message })?;
    }
    Ok(out)
}

fn lib(e: Error) -> String {
    e.to_string()
}

fn instance(ctx: &AdversaryContext, word: &str) -> Result<InstanceId, String> {
    let (name, index) = word
        .split_once('#')
        .ok_or_else(|| format!("expected <entity>#<n>, got {word:?}"))?;
    let index = index.parse().map_err(|_| format!("bad instance number in {word:?}"))?;
    Ok(InstanceId {
        entity: ctx.entity(name).map_err(lib)?,
        index,
    })
}

fn run_line(ctx: &mut AdversaryContext, words: &[&str], out: &mut Vec<String>) -> Result<(), String> {
    match words {
        ["user", id, pw] => {
            ctx.register_user(id, pw).map_err(lib)?;
        }
        ["sensor", id] => {
            ctx.register_sensor(id).map_err(lib)?;
        }
        ["execute", u, s] => {
            let user = ctx.entity(u).map_err(lib)?;
            let sensor = ctx.entity(s).map_err(lib)?;
            let (transcript, ids) = ctx.execute(&user, &sensor).map_err(|e| e.name().to_string())?;
            out.extend(transcript.to_log().iter().map(ToString::to_string));
            out.push(format!("instances {} {} {}", ids[0], ids[1], ids[2]));
        }
        ["start", u, s] => {
            let user = ctx.entity(u).map_err(lib)?;
            let EntityId::Sensor(sn) = ctx.entity(s).map_err(lib)? else {
                return Err(format!("{s} is not a sensor"));
            };
            let inst = ctx.new_instance(&user).map_err(lib)?;
            let reply = ctx.send(&inst, SendInput::Start(sn)).map_err(lib)?;
            out.push(reply_line(ctx, &inst, reply));
        }
        ["send", target, hex_bytes] => {
            let bytes = hex::decode(hex_bytes).map_err(|e| format!("bad hex: {e}"))?;
            let inst = if target.contains('#') {
                instance(ctx, target)?
            } else {
                let entity = ctx.entity(target).map_err(lib)?;
                ctx.new_instance(&entity).map_err(lib)?
            };
            let reply = ctx.send(&inst, SendInput::Bytes(bytes)).map_err(lib)?;
            out.push(reply_line(ctx, &inst, reply));
        }
        ["reveal", target] => {
            let inst = instance(ctx, target)?;
            match ctx.reveal(&inst) {
                Ok(sk) => out.push(format!("{inst} sk {}", hex::encode(sk.as_bytes()))),
                Err(e) => out.push(format!("{inst} {}", e.name())),
            }
        }
        ["corrupt", "ll", "gw"] => {
            let (y, z) = ctx.corrupt_ll_gateway();
            out.push(format!("gw y {} z {}", hex::encode(y), hex::encode(z.as_bytes())));
        }
        ["corrupt", "vfr"] | ["corrupt", "vfr", "gw"] => {
            let table = ctx.corrupt_vfr();
            out.push(format!("gw verifiers {}", table.len()));
        }
        ["corrupt", "ll", name] => match ctx.entity(name).map_err(lib)? {
            e @ EntityId::User(_) => {
                let pw = ctx.corrupt_ll_user(&e).map_err(lib)?;
                out.push(format!("{name} password {}", String::from_utf8_lossy(&pw)));
            }
            e @ EntityId::Sensor(_) => {
                let k = ctx.corrupt_ll_sensor(&e).map_err(lib)?;
                out.push(format!("{name} k_gs {}", hex::encode(k.as_bytes())));
            }
            EntityId::Gateway => unreachable!("matched above"),
        },
        ["corrupt", "sc", name] => {
            let user = ctx.entity(name).map_err(lib)?;
            let image = ctx.corrupt_sc(&user).map_err(lib)?;
            out.push(format!("{name} card {}", hex::encode(image)));
        }
        ["fresh", target] => {
            let inst = instance(ctx, target)?;
            out.push(format!("{inst} fresh {}", ctx.is_fresh(&inst)));
        }
        ["clean", name] => {
            let user = ctx.entity(name).map_err(lib)?;
            out.push(format!("{name} clean {}", ctx.is_clean(&user)));
        }
        ["partners", a, b] => {
            let a = instance(ctx, a)?;
            let b = instance(ctx, b)?;
            out.push(format!("{a} {b} partners {}", ctx.are_partners(&a, &b)));
        }
        ["advance", secs] => {
            let secs: u64 = secs.parse().map_err(|_| format!("bad seconds {secs:?}"))?;
            ctx.advance(secs);
            out.push(format!("clock {}", ctx.now()));
        }
        _ => return Err(format!("unrecognized command {:?}", words.join(" "))),
    }
    Ok(())
}

fn reply_line(ctx: &AdversaryContext, inst: &InstanceId, reply: Option<Vec<u8>>) -> String {
    match reply {
        Some(bytes) => format!("{inst} reply {}", hex::encode(bytes)),
        None => {
            let i = ctx.instance(inst).expect("instance exists");
            match &i.error {
                Some(e) if i.status == super::InstanceStatus::Aborted => {
                    format!("{inst} no reply ({})", e.name())
                }
                _ => format!("{inst} no reply ({:?})", i.status),
            }
        }
    }
}
