mod common;

use common::{World, NOW};
use wsn_ake::primitives::{hash_parts, sym_decrypt, Ciphertext, GroupElement, HashDomain, MacTag};
use wsn_ake::roles::*;
use wsn_ake::wire::{Message, SensorResponseM3};
use wsn_ake::{Error, Identity, SysParams};

#[test]
fn gateway_init_is_random_and_reproducible() {
    let p = SysParams::default();
    let id = Identity::new(&p, b"gw").unwrap();
    let a = GatewaySecrets::init(p, id.clone(), &mut common::rng(1));
    let b = GatewaySecrets::init(p, id.clone(), &mut common::rng(2));
    assert_ne!(a.master_secrets().0, b.master_secrets().0);
    assert_ne!(a.master_secrets().1, b.master_secrets().1);
    let again = GatewaySecrets::init(p, id, &mut common::rng(1));
    assert_eq!(a.to_state_text(), again.to_state_text());
    assert!(GroupElement::decode(&a.public_key().encode()).is_ok());
}

#[test]
fn registration_payload() {
    let mut w = World::new(3);
    let payload = w.gw.register_user(&w.creds.id, &mut w.rng).unwrap();
    assert_eq!(payload.eid.len(), w.params.omega_bytes());
    let (_, z) = w.gw.master_secrets();
    let plain = sym_decrypt(z, &Ciphertext::from_bytes(&payload.eid).unwrap());
    let mut expected = w.creds.id.as_bytes().to_vec();
    expected.extend_from_slice(w.gw.id().as_bytes());
    assert_eq!(plain, expected);

    let again = w.gw.register_user(&w.creds.id, &mut w.rng).unwrap();
    assert_ne!(payload.eid, again.eid);

    let short = Identity::new(&SysParams { id_len: 8, ..w.params }, b"x").unwrap();
    assert!(matches!(w.gw.register_user(&short, &mut w.rng), Err(Error::IdError(_))));
}

#[test]
fn personalization_masks_eid() {
    let mut w = World::new(4);
    let payload = w.gw.register_user(&w.creds.id, &mut w.rng).unwrap();
    let eid = payload.eid.clone();
    let card = card_personalize(payload.clone(), &w.creds.id, &w.creds.password);
    assert_eq!(card.unmask(&w.creds), eid);
    assert_ne!(card.unmask(&w.creds_with(b"wrong")), eid);
    // Masking twice with the same credentials is the identity.
    let twice = card_personalize(
        CardPayload {
            eid: card.xeid.clone(),
            ..payload
        },
        &w.creds.id,
        &w.creds.password,
    );
    assert_eq!(twice.xeid, eid);
}

#[test]
fn sensor_registration() {
    let mut w = World::new(5);
    let s2 = w.gw.register_sensor(&w.id("sn-2")).unwrap();
    assert_eq!(s2.key(), &w.gw.sensor_key(&w.id("sn-2")));
    assert_ne!(s2.key(), w.sensor.key());
    let (_, z) = w.gw.master_secrets();
    let direct = hash_parts(&w.params, HashDomain::J, &[w.id("sn-2").as_bytes(), z.as_bytes()]);
    assert_eq!(s2.key().as_bytes()[..], direct[..]);
    assert_eq!(w.gw.register_sensor(&w.id("sn-2")), Err(Error::AlreadyRegistered));
}

#[test]
fn full_session_agrees() {
    let mut w = World::new(6);
    let sn = w.sensor.id().clone();
    let (m1, mut user) = user_login_start(&w.card, &w.creds, &sn, NOW, &mut w.rng).unwrap();
    let (m2, who) = w.gw.process_m1_with_user(&m1, NOW, &mut w.rng).unwrap();
    assert_eq!(who, w.creds.id);
    let (m3, sensor_sk) = w.sensor.process_m2(&m2, NOW + 1).unwrap();
    assert_ne!(sensor_sk.as_bytes(), &m3.rho_sn);
    let user_sk = user.process_m3(&m3).unwrap();
    assert_eq!(user_sk, sensor_sk);
    assert_eq!(user.status(), Status::Accepted);
    assert_eq!(user.session_key(), Some(&user_sk));
    assert_eq!(session_id(&w.params, &m1, &m2).len(), 32);
}

#[test]
fn gateway_recomputes_user_key() {
    let mut w = World::new(7);
    let (m1, user) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    // Independent route: K_UG = y X on the gateway side, then J over the same fields.
    let (y, _) = w.gw.master_secrets();
    let shared = wsn_ake::primitives::scalar_mult(y, &m1.x);
    let k = hash_parts(
        &w.params,
        HashDomain::J,
        &[&NOW.to_be_bytes(), &m1.x.encode(), &w.card.y.encode(), &shared.encode()],
    );
    assert_eq!(user.gateway_key().as_bytes()[..], k[..]);
}

#[test]
fn logins_use_fresh_randomness() {
    let mut w = World::new(8);
    let (a, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    let (b, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    assert_ne!(a.x, b.x);
    assert_ne!(a.c_u, b.c_u);
    assert_ne!(a.sigma_u, b.sigma_u);
}

#[test]
fn gateway_rejections() {
    let mut w = World::new(9);
    let window = w.params.ts_window;
    let stale = NOW - (window + 1);
    let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), stale, &mut w.rng).unwrap();
    assert_eq!(w.gw.process_m1(&m1, NOW, &mut w.rng), Err(Error::StaleTimestamp));
    let edge = NOW - window;
    let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), edge, &mut w.rng).unwrap();
    assert!(w.gw.process_m1(&m1, NOW, &mut w.rng).is_ok());

    let wrong = w.creds_with(b"guess");
    let (m1, _) = user_login_start(&w.card, &wrong, w.sensor.id(), NOW, &mut w.rng).unwrap();
    assert_eq!(w.gw.process_m1(&m1, NOW, &mut w.rng), Err(Error::IdMismatch));

    let unknown = w.id("sn-404");
    let (m1, _) = user_login_start(&w.card, &w.creds, &unknown, NOW, &mut w.rng).unwrap();
    assert_eq!(w.gw.process_m1(&m1, NOW, &mut w.rng), Err(Error::UnknownSensor));

    let (mut m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    m1.sigma_u.0[0] ^= 1;
    assert_eq!(w.gw.process_m1(&m1, NOW, &mut w.rng), Err(Error::BadMac));
}

#[test]
fn replay_then_expiry() {
    let mut w = World::new(10);
    let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    w.gw.process_m1(&m1, NOW, &mut w.rng).unwrap();
    assert_eq!(w.gw.process_m1(&m1, NOW + 5, &mut w.rng), Err(Error::ReplayDetected));
    let later = NOW + w.params.ts_window + 1;
    assert_eq!(w.gw.process_m1(&m1, later, &mut w.rng), Err(Error::StaleTimestamp));
    assert!(w.gw.replay_cache().len() <= 1);
}

#[test]
fn sensor_rejections() {
    let mut w = World::new(11);
    let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    let m2 = w.gw.process_m1(&m1, NOW, &mut w.rng).unwrap();
    let mut flipped = m2.clone();
    flipped.sigma_gw = MacTag({
        let mut t = m2.sigma_gw.0;
        t[31] ^= 0x80;
        t
    });
    assert_eq!(w.sensor.process_m2(&flipped, NOW).unwrap_err(), Error::BadMac);
    let late = NOW + w.params.ts_window + 1;
    assert_eq!(w.sensor.process_m2(&m2, late).unwrap_err(), Error::StaleTimestamp);

    // Node capture: a different sensor cannot use M2 built for this one.
    let other = w.gw.register_sensor(&w.id("sn-2")).unwrap();
    assert_eq!(other.process_m2(&m2, NOW).unwrap_err(), Error::BadMac);
}

#[test]
fn user_rejects_bad_authenticator() {
    let mut w = World::new(12);
    let (m1, mut user) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    w.gw.process_m1(&m1, NOW, &mut w.rng).unwrap();
    assert_eq!(
        user.process_m3(&SensorResponseM3 { rho_sn: [0x42; 32] }),
        Err(Error::BadAuthenticator)
    );
    assert_eq!(user.status(), Status::Aborted);
    assert!(user.session_key().is_none());
    assert_eq!(user.process_m3(&SensorResponseM3 { rho_sn: [0; 32] }), Err(Error::InvalidState));
}

#[test]
fn old_m3_does_not_fit_new_session() {
    let mut w = World::new(13);
    let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW, &mut w.rng).unwrap();
    let m2 = w.gw.process_m1(&m1, NOW, &mut w.rng).unwrap();
    let (old_m3, _) = w.sensor.process_m2(&m2, NOW).unwrap();

    let (_, mut next) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW + 1, &mut w.rng).unwrap();
    assert_eq!(next.process_m3(&old_m3), Err(Error::BadAuthenticator));
}

#[test]
fn card_holds_no_credentials() {
    for seed in 0..10 {
        let w = World::new(100 + seed);
        let image = w.card.to_image();
        let mask = hash_parts(&w.params, HashDomain::I, &[w.creds.id.as_bytes(), &w.creds.password]);
        for needle in [w.creds.id.trimmed(), &w.creds.password[..], &mask[..]] {
            assert!(!image.windows(needle.len()).any(|win| win == needle));
        }
    }
}

#[test]
fn gateway_state_has_no_password_material() {
    let w = World::new(14);
    assert!(w.gw.password_verifiers().is_empty());
    let text = w.gw.to_state_text();
    assert!(!text.contains(&hex::encode(&w.creds.password)));
    assert!(!text.contains(&hex::encode(w.creds.id.trimmed())));
    let mut other = World::new(14);
    other.creds = w.creds_with(b"something else");
    assert_eq!(text, other.gw.to_state_text());
}

#[test]
fn card_and_state_files_round_trip() {
    let w = World::new(15);
    let image = w.card.to_image();
    assert_eq!(image.len(), SmartCard::image_len(&w.params));
    assert_eq!(SmartCard::from_image(&w.params, &image).unwrap(), w.card);
    let other = SysParams { ts_window: 30, ..w.params };
    assert!(SmartCard::from_image(&other, &image).is_err());

    let restored = GatewaySecrets::from_state_text(w.params, &w.gw.to_state_text()).unwrap();
    assert_eq!(restored.to_state_text(), w.gw.to_state_text());
    assert_eq!(restored.public_key(), w.gw.public_key());

    let s = SensorIdentity::from_key_text(w.params, &w.sensor.to_key_text()).unwrap();
    assert_eq!(s, w.sensor);
}

fn login_ok(w: &mut World, card: &SmartCard, password: &[u8]) -> Result<(), Error> {
    let creds = w.creds_with(password);
    let (m1, mut user) = user_login_start(card, &creds, w.sensor.id(), NOW, &mut w.rng)?;
    let m2 = w.gw.process_m1(&m1, NOW, &mut w.rng)?;
    let (m3, sk) = w.sensor.process_m2(&m2, NOW)?;
    assert_eq!(user.process_m3(&m3)?, sk);
    Ok(())
}

#[test]
fn noninteractive_update() {
    let mut w = World::new(16);
    let card = w.card.clone();
    let updated = pwd_update_noninteractive(&card, &w.creds.id, b"correct horse", b"battery staple");
    assert!(login_ok(&mut w, &updated, b"battery staple").is_ok());

    let same = pwd_update_noninteractive(&card, &w.creds.id, b"correct horse", b"correct horse");
    assert_eq!(same, card);

    let bricked = pwd_update_noninteractive(&card, &w.creds.id, b"typo", b"battery staple");
    assert_eq!(login_ok(&mut w, &bricked, b"battery staple"), Err(Error::IdMismatch));
    assert_eq!(login_ok(&mut w, &bricked, b"correct horse"), Err(Error::IdMismatch));
}

#[test]
fn interactive_update() {
    let mut w = World::new(17);
    let card = w.card.clone();

    let (req, pending) = card.pwd_update_start(&w.creds, NOW, &mut w.rng).unwrap();
    let resp = w.gw.process_pwd_update(&req, NOW);
    let updated = pending.finish(&resp, b"battery staple").unwrap();
    assert!(login_ok(&mut w, &updated, b"battery staple").is_ok());

    let (req, pending) = card.pwd_update_start(&w.creds_with(b"typo"), NOW, &mut w.rng).unwrap();
    let resp = w.gw.process_pwd_update(&req, NOW);
    assert_eq!(resp, wsn_ake::wire::PwdUpdateResponse::Fail);
    assert_eq!(pending.finish(&resp, b"battery staple"), Err(Error::UpdateRefused));
    assert!(login_ok(&mut w, &card, b"correct horse").is_ok());

    let (req, pending) = card.pwd_update_start(&w.creds, NOW, &mut w.rng).unwrap();
    let _ = w.gw.process_pwd_update(&req, NOW);
    let forged = wsn_ake::wire::PwdUpdateResponse::Ok { rho_gw: [7; 32] };
    assert_eq!(pending.finish(&forged, b"battery staple"), Err(Error::BadAuthenticator));

    let (req, _) = card.pwd_update_start(&w.creds, NOW - 61, &mut w.rng).unwrap();
    assert_eq!(w.gw.verify_pwd_update(&req, NOW), Err(Error::StaleTimestamp));
}

#[test]
fn session_ids() {
    let mut w = World::new(18);
    let mut sids = Vec::new();
    for i in 0..2 {
        let (m1, _) = user_login_start(&w.card, &w.creds, w.sensor.id(), NOW + i, &mut w.rng).unwrap();
        let m2 = w.gw.process_m1(&m1, NOW + i, &mut w.rng).unwrap();
        let sid = session_id(&w.params, &m1, &m2);
        assert_eq!(sid.len(), 32);
        let direct = hash_parts(
            &w.params,
            HashDomain::H,
            &[&Message::M1(m1).encode(), &Message::M2(m2).encode()],
        );
        assert_eq!(sid, direct);
        sids.push(sid);
    }
    assert_ne!(sids[0], sids[1]);
}

#[test]
fn key_agreement_over_many_sessions() {
    let mut w = World::new(19);
    let card = w.card.clone();
    for i in 0..100 {
        assert!(login_ok(&mut w, &card, b"correct horse").is_ok(), "session {i}");
    }
}
