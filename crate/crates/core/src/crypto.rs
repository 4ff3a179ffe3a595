//! Hashing, signing and record sealing.
//!
//! Digests are SHA-256. Signatures are Ed25519 over the SHA-256 digest of the
//! message, so the signing cost is independent of message length. Every key
//! pair is derived from a 32-byte secret seed: the same seed yields both the
//! Ed25519 signing key and an X25519 key used to wrap per-record symmetric
//! keys for grantees.

use std::fmt;
use std::str::FromStr;

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use hkdf::Hkdf;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use thiserror::Error;
use x25519_dalek::{PublicKey as XPublicKey, StaticSecret};

pub const DIGEST_LEN: usize = 32;
pub const PUBLIC_KEY_LEN: usize = 64;
pub const PRIVATE_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;
/// Length of the short fingerprint used in human-readable listings.
pub const SHORT_FINGERPRINT_LEN: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("malformed key: {0}")]
    KeyError(String),
    #[error("malformed hex: {0}")]
    Hex(String),
    #[error("sealed payload could not be opened")]
    Unseal,
}

/// Decodes lowercase hex only; uppercase digits are rejected so that every
/// value has exactly one textual encoding.
pub(crate) fn decode_lower_hex(s: &str) -> Result<Vec<u8>, CryptoError> {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(CryptoError::Hex("uppercase hex digit".into()));
    }
    hex::decode(s).map_err(|e| CryptoError::Hex(e.to_string()))
}

pub(crate) mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        super::decode_lower_hex(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! fixed_bytes {
    ($name:ident, $len:expr) => {
        impl $name {
            pub fn from_bytes(bytes: [u8; $len]) -> Self {
                Self(bytes)
            }

            pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
                let arr: [u8; $len] = bytes.try_into().map_err(|_| {
                    CryptoError::KeyError(format!(
                        "{} expects {} bytes, got {}",
                        stringify!($name),
                        $len,
                        bytes.len()
                    ))
                })?;
                Ok(Self(arr))
            }

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }
        }

        impl FromStr for $name {
            type Err = CryptoError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::from_slice(&decode_lower_hex(s)?)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// A SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Digest([u8; DIGEST_LEN]);
fixed_bytes!(Digest, DIGEST_LEN);

impl Digest {
    pub const ZERO: Digest = Digest([0u8; DIGEST_LEN]);

    /// Number of leading zero bits, the proof-of-work measure.
    pub fn leading_zero_bits(&self) -> u32 {
        let mut bits = 0;
        for byte in self.0 {
            if byte == 0 {
                bits += 8;
            } else {
                bits += byte.leading_zeros();
                break;
            }
        }
        bits
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

pub fn hash(data: &[u8]) -> Digest {
    Digest(Sha256::digest(data).into())
}

/// Hashes the concatenation of several byte strings without copying them.
pub fn hash_parts<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> Digest {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p);
    }
    Digest(hasher.finalize().into())
}

/// Ed25519 verifying key followed by the X25519 key-wrap public key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PublicKey([u8; PUBLIC_KEY_LEN]);
fixed_bytes!(PublicKey, PUBLIC_KEY_LEN);

impl PublicKey {
    /// Full address of the key: hex of its SHA-256 digest.
    pub fn fingerprint(&self) -> String {
        hash(&self.0).to_hex()
    }

    /// First five hex digits of [`PublicKey::fingerprint`].
    pub fn short_fingerprint(&self) -> String {
        self.fingerprint()[..SHORT_FINGERPRINT_LEN].to_string()
    }

    fn verifying_key(&self) -> Result<VerifyingKey, CryptoError> {
        let bytes: [u8; 32] = self.0[..32].try_into().expect("split of fixed array");
        VerifyingKey::from_bytes(&bytes).map_err(|e| CryptoError::KeyError(e.to_string()))
    }

    fn wrap_key(&self) -> XPublicKey {
        let bytes: [u8; 32] = self.0[32..].try_into().expect("split of fixed array");
        XPublicKey::from(bytes)
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.short_fingerprint())
    }
}

/// The 32-byte secret seed from which both private halves are derived.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey([u8; PRIVATE_KEY_LEN]);
fixed_bytes!(PrivateKey, PRIVATE_KEY_LEN);

impl fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PrivateKey(..)")
    }
}

impl PrivateKey {
    fn signing_key(&self) -> SigningKey {
        SigningKey::from_bytes(&self.0)
    }

    fn wrap_secret(&self) -> StaticSecret {
        let hk = Hkdf::<Sha256>::new(Some(b"hdms/x25519"), &self.0);
        let mut okm = [0u8; 32];
        hk.expand(b"wrap-secret", &mut okm).expect("32 bytes is a valid HKDF length");
        StaticSecret::from(okm)
    }

    pub fn public_key(&self) -> PublicKey {
        let mut out = [0u8; PUBLIC_KEY_LEN];
        out[..32].copy_from_slice(self.signing_key().verifying_key().as_bytes());
        out[32..].copy_from_slice(XPublicKey::from(&self.wrap_secret()).as_bytes());
        PublicKey(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    pub public_key: PublicKey,
    pub private_key: PrivateKey,
}

impl KeyPair {
    pub fn from_private(private_key: PrivateKey) -> Self {
        Self { public_key: private_key.public_key(), private_key }
    }

    /// Checks that the public half matches the private half.
    pub fn is_consistent(&self) -> bool {
        self.private_key.public_key() == self.public_key
    }
}

/// Derives a key pair from a 64-bit seed. The same seed always yields the
/// same pair.
pub fn generate_keypair(seed: u64) -> KeyPair {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut secret = [0u8; PRIVATE_KEY_LEN];
    rng.fill_bytes(&mut secret);
    KeyPair::from_private(PrivateKey(secret))
}

/// Generates a key pair from operating-system entropy.
pub fn generate_keypair_from_entropy() -> KeyPair {
    let mut secret = [0u8; PRIVATE_KEY_LEN];
    rand::rng().fill_bytes(&mut secret);
    KeyPair::from_private(PrivateKey(secret))
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
    /// Fingerprint of the signing public key.
    pub signer: String,
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix: String = self.signer.chars().take(SHORT_FINGERPRINT_LEN).collect();
        write!(f, "Signature(by {prefix}, {} bytes)", self.bytes.len())
    }
}

pub fn sign(message: &[u8], private_key: &PrivateKey) -> Signature {
    let digest = hash(message);
    let sig = private_key.signing_key().sign(digest.as_bytes());
    Signature {
        bytes: sig.to_bytes().to_vec(),
        signer: private_key.public_key().fingerprint(),
    }
}

/// Returns true only for a signature made by the private half of
/// `public_key` over exactly `message`. Malformed input yields false.
pub fn verify(message: &[u8], sig: &Signature, public_key: &PublicKey) -> bool {
    if sig.signer != public_key.fingerprint() {
        return false;
    }
    let Ok(bytes) = <[u8; SIGNATURE_LEN]>::try_from(sig.bytes.as_slice()) else {
        return false;
    };
    let Ok(vk) = public_key.verifying_key() else {
        return false;
    };
    let sig = ed25519_dalek::Signature::from_bytes(&bytes);
    let digest = hash(message);
    vk.verify_strict(digest.as_bytes(), &sig).is_ok()
}

/// Symmetric key protecting one record version.
#[derive(Clone, PartialEq, Eq)]
pub struct RecordKey([u8; 32]);

impl fmt::Debug for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RecordKey(..)")
    }
}

impl RecordKey {
    /// Derives the key for one record version from the owner's secret and a
    /// public context string. Only the owner can recompute it.
    pub fn derive(owner: &PrivateKey, context: &[u8]) -> Self {
        let hk = Hkdf::<Sha256>::new(Some(b"hdms/record-key"), owner.as_bytes());
        let mut okm = [0u8; 32];
        hk.expand(context, &mut okm).expect("32 bytes is a valid HKDF length");
        RecordKey(okm)
    }

    fn cipher(&self) -> ChaCha20Poly1305 {
        ChaCha20Poly1305::new(Key::from_slice(&self.0))
    }
}

// Each record key encrypts exactly one plaintext, so a fixed nonce is sound.
const SEAL_NONCE: [u8; 12] = [0u8; 12];

pub fn seal(key: &RecordKey, plaintext: &[u8]) -> Vec<u8> {
    key.cipher()
        .encrypt(Nonce::from_slice(&SEAL_NONCE), plaintext)
        .expect("in-memory encryption cannot fail")
}

pub fn unseal(key: &RecordKey, ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
    key.cipher()
        .decrypt(Nonce::from_slice(&SEAL_NONCE), ciphertext)
        .map_err(|_| CryptoError::Unseal)
}

fn wrapping_cipher(shared: &[u8; 32], ephemeral: &[u8; 32], recipient: &PublicKey) -> ChaCha20Poly1305 {
    let hk = Hkdf::<Sha256>::new(Some(ephemeral), shared);
    let mut okm = [0u8; 32];
    hk.expand(recipient.as_bytes(), &mut okm).expect("32 bytes is a valid HKDF length");
    ChaCha20Poly1305::new(Key::from_slice(&okm))
}

/// Wraps `key` for `recipient`: ephemeral X25519 public key followed by the
/// AEAD-encrypted record key. The ephemeral secret is derived from the record
/// key and recipient so wraps are reproducible.
pub fn wrap_key(key: &RecordKey, recipient: &PublicKey) -> Vec<u8> {
    let eph_seed = hash_parts([b"hdms/wrap".as_slice(), &key.0, recipient.as_bytes()]);
    let eph = StaticSecret::from(*eph_seed.as_bytes());
    let eph_pub = XPublicKey::from(&eph);
    let shared = eph.diffie_hellman(&recipient.wrap_key());
    let ct = wrapping_cipher(shared.as_bytes(), eph_pub.as_bytes(), recipient)
        .encrypt(Nonce::from_slice(&SEAL_NONCE), key.0.as_slice())
        .expect("in-memory encryption cannot fail");
    let mut out = eph_pub.as_bytes().to_vec();
    out.extend_from_slice(&ct);
    out
}

pub fn unwrap_key(wrapped: &[u8], recipient: &KeyPair) -> Result<RecordKey, CryptoError> {
    if wrapped.len() < 32 {
        return Err(CryptoError::Unseal);
    }
    let (eph, ct) = wrapped.split_at(32);
    let eph: [u8; 32] = eph.try_into().expect("split at 32");
    let shared = recipient.private_key.wrap_secret().diffie_hellman(&XPublicKey::from(eph));
    let pt = wrapping_cipher(shared.as_bytes(), &eph, &recipient.public_key)
        .decrypt(Nonce::from_slice(&SEAL_NONCE), ct)
        .map_err(|_| CryptoError::Unseal)?;
    let arr: [u8; 32] = pt.as_slice().try_into().map_err(|_| CryptoError::Unseal)?;
    Ok(RecordKey(arr))
}
