use serde::{Deserialize, Serialize};

use crate::crypto::{self, hex_bytes, Digest, KeyPair, PublicKey, Signature};

/// A signed transfer from a sender key to a recipient address (a contract
/// id such as `T1SC`, or the registry address).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transaction {
    pub tx_hash: Digest,
    pub from: PublicKey,
    pub to: String,
    #[serde(with = "hex_bytes")]
    pub value: Vec<u8>,
    /// Per-sender counter; strictly increasing along the chain.
    pub nonce: u64,
    /// Unix seconds, supplied by the caller.
    pub timestamp: u64,
    pub signature: Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxFault {
    HashMismatch,
    BadSignature,
}

fn put_len_prefixed(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

fn signing_bytes(from: &PublicKey, to: &str, value: &[u8], nonce: u64, timestamp: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + to.len() + value.len() + 32);
    out.extend_from_slice(from.as_bytes());
    put_len_prefixed(&mut out, to.as_bytes());
    put_len_prefixed(&mut out, value);
    out.extend_from_slice(&nonce.to_be_bytes());
    out.extend_from_slice(&timestamp.to_be_bytes());
    out
}

impl Transaction {
    pub fn new_signed(
        sender: &KeyPair,
        to: impl Into<String>,
        value: Vec<u8>,
        nonce: u64,
        timestamp: u64,
    ) -> Self {
        let to = to.into();
        let msg = signing_bytes(&sender.public_key, &to, &value, nonce, timestamp);
        let signature = crypto::sign(&msg, &sender.private_key);
        let mut tx = Transaction {
            tx_hash: Digest::ZERO,
            from: sender.public_key,
            to,
            value,
            nonce,
            timestamp,
            signature,
        };
        tx.tx_hash = tx.compute_hash();
        tx
    }

    /// The bytes covered by the sender's signature.
    pub fn signing_bytes(&self) -> Vec<u8> {
        signing_bytes(&self.from, &self.to, &self.value, self.nonce, self.timestamp)
    }

    /// Hash over every field except `tx_hash` itself.
    pub fn compute_hash(&self) -> Digest {
        let mut bytes = self.signing_bytes();
        put_len_prefixed(&mut bytes, &self.signature.bytes);
        put_len_prefixed(&mut bytes, self.signature.signer.as_bytes());
        crypto::hash(&bytes)
    }

    pub fn check(&self) -> Result<(), TxFault> {
        if self.compute_hash() != self.tx_hash {
            return Err(TxFault::HashMismatch);
        }
        if !crypto::verify(&self.signing_bytes(), &self.signature, &self.from) {
            return Err(TxFault::BadSignature);
        }
        Ok(())
    }

    pub fn sender_fingerprint(&self) -> String {
        self.from.fingerprint()
    }
}
