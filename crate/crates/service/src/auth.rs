use rand::rngs::OsRng;
use rand::RngCore;
use sha2::Sha256;

pub const DEFAULT_PASSWORD_ROUNDS: u32 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PasswordHash {
    pub salt: String,
    pub rounds: u32,
    pub hash: String,
}

impl PasswordHash {
    pub fn new(password: &str, rounds: u32) -> Self {
        let mut salt = [0u8; 16];
        OsRng.fill_bytes(&mut salt);
        let salt = hex::encode(salt);
        let hash = derive(password, &salt, rounds);
        PasswordHash { salt, rounds, hash }
    }

    pub fn verify(&self, password: &str) -> bool {
        let candidate = derive(password, &self.salt, self.rounds);
        candidate.len() == self.hash.len()
            && candidate
                .bytes()
                .zip(self.hash.bytes())
                .fold(0u8, |acc, (a, b)| acc | (a ^ b))
                == 0
    }
}

fn derive(password: &str, salt: &str, rounds: u32) -> String {
    let mut out = [0u8; 32];
    pbkdf2::pbkdf2_hmac::<Sha256>(password.as_bytes(), salt.as_bytes(), rounds.max(1), &mut out);
    hex::encode(out)
}

/// Opaque bearer token.
pub fn new_token() -> String {
    let mut bytes = [0u8; 32];
    OsRng.fill_bytes(&mut bytes);
    hex::encode(bytes)
}
