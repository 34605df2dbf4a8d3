use wsn_ake::harness::*;
use wsn_ake::primitives::{mac_generate, sym_encrypt};
use wsn_ake::roles::SmartCard;
use wsn_ake::wire::{mac_input_m2, GatewayToSensorM2, Message, MsgType};
use wsn_ake::{Error, SysParams};

fn world(seed: u64) -> (AdversaryContext, EntityId, EntityId) {
    let mut ctx = AdversaryContext::new(SysParams::default(), seed).unwrap();
    let u = ctx.register_user("u1", "pw-u1").unwrap();
    let s = ctx.register_sensor("s1").unwrap();
    (ctx, u, s)
}

#[test]
fn execute_produces_three_messages() {
    let (mut ctx, u, s) = world(1);
    let (t, [ui, gi, si]) = ctx.execute(&u, &s).unwrap();
    let types: Vec<MsgType> = t.messages(ctx.params()).unwrap().iter().map(Message::msg_type).collect();
    assert_eq!(
        types,
        [MsgType::LoginRequest, MsgType::GatewayToSensor, MsgType::SensorResponse]
    );
    let user = ctx.instance(&ui).unwrap();
    let sensor = ctx.instance(&si).unwrap();
    assert!(user.accepted() && sensor.accepted());
    assert_eq!(user.sk, sensor.sk);
    assert_eq!(user.sid, sensor.sid);
    assert_eq!(ctx.instance(&gi).unwrap().status, InstanceStatus::Completed);
    assert!(ctx.are_partners(&ui, &si));
    assert_eq!(sensor.peer, Some(u.clone()));
    assert_eq!(user.peer, Some(s.clone()));
}

#[test]
fn repeated_execute_is_fresh() {
    let (mut ctx, u, s) = world(2);
    let (a, [ua, _, sa]) = ctx.execute(&u, &s).unwrap();
    let (b, [ub, _, sb]) = ctx.execute(&u, &s).unwrap();
    assert_ne!(a.entries()[0].bytes, b.entries()[0].bytes);
    assert!(!ctx.are_partners(&ua, &sb));
    assert!(!ctx.are_partners(&ub, &sa));
    assert!(!ctx.are_partners(&ua, &ua));
}

#[test]
fn determinism_under_seed() {
    let run = || {
        let (mut ctx, u, s) = world(42);
        let mut lines = Vec::new();
        for _ in 0..3 {
            let (t, _) = ctx.execute(&u, &s).unwrap();
            lines.extend(t.to_log().iter().map(ToString::to_string));
            ctx.advance(7);
        }
        lines
    };
    assert_eq!(run(), run());
}

#[test]
fn send_start_and_tamper() {
    let (mut ctx, u, _) = world(3);
    let ui = ctx.new_instance(&u).unwrap();
    let sn = ctx.id("s1").unwrap();
    let m1 = ctx.send(&ui, SendInput::Start(sn)).unwrap().unwrap();
    assert!(matches!(Message::decode(ctx.params(), &m1), Ok(Message::M1(_))));

    let mut bad = m1.clone();
    bad[100] ^= 0x01;
    let g = ctx.new_instance(&EntityId::Gateway).unwrap();
    assert_eq!(ctx.send(&g, SendInput::Bytes(bad)).unwrap(), None);
    assert_eq!(ctx.instance(&g).unwrap().status, InstanceStatus::Aborted);
    assert_eq!(ctx.instance(&g).unwrap().error, Some(Error::BadMac));

    let g1 = ctx.new_instance(&EntityId::Gateway).unwrap();
    assert!(ctx.send(&g1, SendInput::Bytes(m1.clone())).unwrap().is_some());
    let g2 = ctx.new_instance(&EntityId::Gateway).unwrap();
    assert_eq!(ctx.send(&g2, SendInput::Bytes(m1)).unwrap(), None);
    assert_eq!(ctx.instance(&g2).unwrap().error, Some(Error::ReplayDetected));
}

#[test]
fn aborted_instances_stay_silent() {
    let (mut ctx, u, s) = world(4);
    let (t, _) = ctx.execute(&u, &s).unwrap();
    let m2 = t.entries()[1].bytes.clone();
    let si = ctx.new_instance(&s).unwrap();
    assert_eq!(ctx.send(&si, SendInput::Bytes(vec![0x03; 33])).unwrap(), None);
    assert_eq!(ctx.instance(&si).unwrap().status, InstanceStatus::Aborted);
    // A valid M2 after the abort gets no answer.
    assert_eq!(ctx.send(&si, SendInput::Bytes(m2)).unwrap(), None);
    assert_eq!(ctx.instance(&si).unwrap().status, InstanceStatus::Aborted);
    assert!(ctx.instance(&si).unwrap().sk.is_none());
}

#[test]
fn unknown_entities() {
    let (mut ctx, _, _) = world(5);
    assert_eq!(ctx.entity("nobody"), Err(Error::UnknownEntity));
    let ghost = EntityId::User(ctx.id("ghost").unwrap());
    assert_eq!(ctx.corrupt_ll_user(&ghost), Err(Error::UnknownEntity));
    assert_eq!(ctx.corrupt_sc(&ghost), Err(Error::UnknownEntity));
    assert!(ctx.new_instance(&ghost).is_err());
}

#[test]
fn reveal_oracle() {
    let (mut ctx, u, s) = world(6);
    let ui = ctx.new_instance(&u).unwrap();
    assert_eq!(ctx.reveal(&ui), Err(Error::NotAccepted));
    let (_, [ua, ga, sa]) = ctx.execute(&u, &s).unwrap();
    assert_eq!(ctx.reveal(&ua).unwrap(), ctx.reveal(&sa).unwrap());
    assert_eq!(ctx.reveal(&ga), Err(Error::NotAccepted));
    assert!(ctx.revealed().contains(&ua));
}

#[test]
fn corrupt_queries() {
    let (mut ctx, u, s) = world(7);
    assert!(ctx.corrupt_vfr().is_empty());
    let image = ctx.corrupt_sc(&u).unwrap();
    let uid = ctx.id("u1").unwrap();
    assert_eq!(image, ctx.card(&uid).unwrap().to_image());
    assert!(SmartCard::from_image(ctx.params(), &image).is_ok());
    assert_eq!(ctx.corrupt_ll_user(&u).unwrap(), b"pw-u1");
    let k = ctx.corrupt_ll_sensor(&s).unwrap();
    assert_eq!(&k, ctx.sensor(&ctx.id("s1").unwrap()).unwrap().key());
}

#[test]
fn captured_sensor_cannot_impersonate_another() {
    let (mut ctx, u, a) = world(8);
    let b = ctx.register_sensor("s2").unwrap();
    let k_a = ctx.corrupt_ll_sensor(&a).unwrap();
    let params = *ctx.params();

    // Forge an M2 for sensor B using A's key.
    let mut rng = rng(1);
    let now = ctx.now();
    let c_gw = sym_encrypt(&k_a, &[9u8; 32], &mut rng).unwrap();
    let id_gw = ctx.gateway().id().clone();
    let id_b = ctx.id("s2").unwrap();
    let sigma_gw = mac_generate(&k_a, &mac_input_m2(&params, &id_gw, &id_b, now, now, &c_gw).unwrap());
    let forged = Message::M2(GatewayToSensorM2 { id_gw, t_gw: now, t_u: now, c_gw, sigma_gw }).encode();
    let bi = ctx.new_instance(&b).unwrap();
    assert_eq!(ctx.send(&bi, SendInput::Bytes(forged)).unwrap(), None);
    assert_eq!(ctx.instance(&bi).unwrap().error, Some(Error::BadMac));

    // And an honest M2 for A replayed to B.
    let (t, _) = ctx.execute(&u, &a).unwrap();
    let bi = ctx.new_instance(&b).unwrap();
    assert_eq!(ctx.send(&bi, SendInput::Bytes(t.entries()[1].bytes.clone())).unwrap(), None);
    assert_eq!(ctx.instance(&bi).unwrap().error, Some(Error::BadMac));
}

fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    use rand_chacha::rand_core::SeedableRng;
    rand_chacha::ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn freshness_definition() {
    let (mut ctx, u, s) = world(9);
    let (_, [ui, _, si]) = ctx.execute(&u, &s).unwrap();
    assert!(ctx.is_fresh(&ui));
    assert!(ctx.is_fresh(&si));

    ctx.corrupt_ll_user(&u).unwrap();
    assert!(ctx.is_fresh(&ui));
    assert!(ctx.is_fresh(&si));
    ctx.corrupt_sc(&u).unwrap();
    assert!(!ctx.is_fresh(&ui));
    assert!(!ctx.is_fresh(&si), "sensor's peer user is corrupted");

    let (mut ctx, u, s) = world(10);
    let (_, [ui, _, si]) = ctx.execute(&u, &s).unwrap();
    let (_, [uj, _, _]) = ctx.execute(&u, &s).unwrap();
    ctx.reveal(&si).unwrap();
    assert!(!ctx.is_fresh(&ui), "partner revealed");
    assert!(!ctx.is_fresh(&si));
    assert!(ctx.is_fresh(&uj));

    let (mut ctx, u, s) = world(11);
    let other = ctx.register_sensor("s2").unwrap();
    let (_, [ui, _, _]) = ctx.execute(&u, &s).unwrap();
    ctx.corrupt_ll_sensor(&other).unwrap();
    assert!(ctx.is_fresh(&ui));
    ctx.corrupt_ll_sensor(&s).unwrap();
    assert!(!ctx.is_fresh(&ui));

    let (mut ctx, u, s) = world(12);
    let (_, [ui, _, _]) = ctx.execute(&u, &s).unwrap();
    ctx.corrupt_ll_gateway();
    assert!(!ctx.is_fresh(&ui));
}

#[test]
fn cleanness_definition() {
    let (mut ctx, u, s) = world(13);
    let v = ctx.register_user("u2", "pw-u2").unwrap();
    assert!(ctx.is_clean(&u));
    ctx.corrupt_ll_sensor(&s).unwrap();
    assert!(ctx.is_clean(&u));
    ctx.corrupt_sc(&u).unwrap();
    assert!(ctx.is_clean(&u));
    ctx.corrupt_ll_user(&u).unwrap();
    assert!(!ctx.is_clean(&u));
    assert!(ctx.is_clean(&v));
    ctx.corrupt_ll_gateway();
    assert!(!ctx.is_clean(&v));
    assert!(!ctx.is_clean(&s));
}

#[test]
fn verdicts_follow_from_the_log() {
    let (mut ctx, u, s) = world(14);
    let v = ctx.register_user("u2", "pw").unwrap();
    let mut ids = Vec::new();
    for _ in 0..3 {
        ids.extend(ctx.execute(&u, &s).unwrap().1);
        ids.extend(ctx.execute(&v, &s).unwrap().1);
    }
    ctx.reveal(&ids[2]).unwrap();
    ctx.corrupt_ll_user(&v).unwrap();
    ctx.corrupt_sc(&v).unwrap();

    let replayed = CorruptionLog::from_events(ctx.log().events().to_vec());
    assert_eq!(&replayed, ctx.log());
    for id in &ids {
        let peer = ctx.instance(id).unwrap().peer.clone();
        let partners = ctx.partners_of(id);
        assert_eq!(
            fresh_from_log(&replayed, id, peer.as_ref(), &partners),
            ctx.is_fresh(id),
            "{id}"
        );
    }
}

fn fresh_from_log(log: &CorruptionLog, id: &InstanceId, peer: Option<&EntityId>, partners: &[InstanceId]) -> bool {
    // Re-derive from the log alone.
    let revealed = log.revealed().contains(id) || partners.iter().any(|p| log.revealed().contains(p));
    let corrupted = |e: &EntityId| match e {
        EntityId::User(u) => log.ll_users().contains(u) && log.sc_users().contains(u),
        EntityId::Sensor(s) => log.sensors().contains(s),
        EntityId::Gateway => false,
    };
    !(revealed || corrupted(&id.entity) || peer.is_some_and(corrupted) || log.gateway_corrupted())
}

#[test]
fn script_runner() {
    let mut ctx = AdversaryContext::new(SysParams::default(), 77).unwrap();
    let out = run_script(
        &mut ctx,
        "# setup\nuser u1 pw1\nsensor s1\nexecute u1 s1\ncorrupt sc u1\nfresh u1#0\ncorrupt ll u1\nfresh u1#0\nclean u1\ncorrupt vfr\npartners u1#0 s1#0\nadvance 61\n",
    )
    .unwrap();
    assert!(out[0].starts_with("U->GW  M1  01"));
    assert!(out[1].starts_with("GW->SN  M2  02"));
    assert!(out[2].starts_with("SN->U  M3  03"));
    assert_eq!(out[3], "instances u1#0 gw#0 s1#0");
    assert!(out[4].starts_with("u1 card "));
    assert_eq!(out[5], "u1#0 fresh true");
    assert_eq!(out[6], "u1 password pw1");
    assert_eq!(out[7], "u1#0 fresh false");
    assert_eq!(out[8], "u1 clean false");
    assert_eq!(out[9], "gw verifiers 0");
    assert_eq!(out[10], "u1#0 s1#0 partners true");
    assert_eq!(out[11], format!("clock {}", CLOCK_EPOCH + 61));

    // Replaying the recorded M1 after the window: stale.
    let m1_hex = out[0].split_whitespace().nth(2).unwrap().to_string();
    let out = run_script(&mut ctx, &format!("send gw {m1_hex}")).unwrap();
    assert_eq!(out, vec!["gw#1 no reply (StaleTimestamp)"]);

    let err = run_script(&mut ctx, "user u9 pw\nbogus\n").unwrap_err();
    assert_eq!(err.line, 2);
}

#[test]
fn script_start_and_send() {
    let mut ctx = AdversaryContext::new(SysParams::default(), 78).unwrap();
    let out = run_script(&mut ctx, "user u1 pw1\nsensor s1\nstart u1 s1\n").unwrap();
    let m1 = out[0].split_whitespace().nth(2).unwrap().to_string();
    assert!(out[0].starts_with("u1#0 reply 01"));
    let out = run_script(&mut ctx, &format!("send gw {m1}\nsend gw {m1}\n")).unwrap();
    assert!(out[0].starts_with("gw#0 reply 02"));
    assert_eq!(out[1], "gw#1 no reply (ReplayDetected)");
    let m2 = out[0].split_whitespace().nth(2).unwrap().to_string();
    let out = run_script(&mut ctx, &format!("send s1 {m2}\nreveal s1#0\nreveal u1#0\n")).unwrap();
    let m3 = out[0].split_whitespace().nth(2).unwrap().to_string();
    assert_eq!(out[2], "u1#0 NotAccepted");
    let out = run_script(&mut ctx, &format!("send u1#0 {m3}\nreveal u1#0\npartners u1#0 s1#0\n")).unwrap();
    assert_eq!(out[0], "u1#0 no reply (Accepted)");
    assert_eq!(out[1].split_whitespace().nth(2), Some(&*sensor_key_hex(&ctx)));
    assert_eq!(out[2], "u1#0 s1#0 partners true");
}

fn sensor_key_hex(ctx: &AdversaryContext) -> String {
    let s = InstanceId { entity: ctx.entity("s1").unwrap(), index: 0 };
    hex::encode(ctx.instance(&s).unwrap().sk.as_ref().unwrap().as_bytes())
}

#[test]
fn password_update_through_gateway_instance() {
    let (mut ctx, _, _) = world(15);
    let uid = ctx.id("u1").unwrap();
    let card = ctx.card(&uid).unwrap().clone();
    let creds = wsn_ake::roles::UserCredentials::new(ctx.params(), b"u1", b"pw-u1").unwrap();
    let (req, pending) = card.pwd_update_start(&creds, ctx.now(), &mut rng(3)).unwrap();
    let g = ctx.new_instance(&EntityId::Gateway).unwrap();
    let reply = ctx.send(&g, SendInput::Bytes(Message::PwdUpdateRequest(req).encode())).unwrap().unwrap();
    let Ok(Message::PwdUpdateResponse(resp)) = Message::decode(ctx.params(), &reply) else {
        panic!("expected a password update response");
    };
    assert!(pending.finish(&resp, b"new").is_ok());
}
