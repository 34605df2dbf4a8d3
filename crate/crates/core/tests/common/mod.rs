#![allow(dead_code)]

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use wsn_ake::roles::{card_personalize, GatewaySecrets, SensorIdentity, SmartCard, UserCredentials};
use wsn_ake::{Identity, SysParams};

pub const NOW: u64 = 1_700_000_000;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub struct World {
    pub params: SysParams,
    pub rng: ChaCha20Rng,
    pub gw: GatewaySecrets,
    pub sensor: SensorIdentity,
    pub creds: UserCredentials,
    pub card: SmartCard,
}

impl World {
    pub fn new(seed: u64) -> Self {
        let params = SysParams::default();
        let mut rng = rng(seed);
        let mut gw = GatewaySecrets::init(params, Identity::new(&params, b"gw-1").unwrap(), &mut rng);
        let sensor = gw.register_sensor(&Identity::new(&params, b"sn-1").unwrap()).unwrap();
        let creds = UserCredentials::new(&params, b"alice", b"correct horse").unwrap();
        let payload = gw.register_user(&creds.id, &mut rng).unwrap();
        let card = card_personalize(payload, &creds.id, &creds.password);
        World {
            params,
            rng,
            gw,
            sensor,
            creds,
            card,
        }
    }

    pub fn id(&self, s: &str) -> Identity {
        Identity::new(&self.params, s.as_bytes()).unwrap()
    }

    pub fn creds_with(&self, password: &[u8]) -> UserCredentials {
        UserCredentials {
            id: self.creds.id.clone(),
            password: password.to_vec(),
        }
    }
}
