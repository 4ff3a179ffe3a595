use serde::{Deserialize, Serialize};

use crate::crypto::{self, Digest};

use super::Transaction;

/// Byte length of the serialized header:
/// index(8) ‖ prev_hash(32) ‖ payload_hash(32) ‖ timestamp(8) ‖ nonce(8).
pub const HEADER_LEN: usize = 88;
const NONCE_OFFSET: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub index: u64,
    pub prev_hash: Digest,
    /// Commits to the difficulty and the ordered transaction hashes.
    pub payload_hash: Digest,
    pub timestamp: u64,
    pub nonce: u64,
    pub block_hash: Digest,
    /// Leading zero bits the block was mined to.
    pub difficulty: u8,
    pub transactions: Vec<Transaction>,
}

/// Header fields without the nonce, ready for a nonce search.
#[derive(Debug, Clone, Copy)]
pub struct Header {
    pub index: u64,
    pub prev_hash: Digest,
    pub payload_hash: Digest,
    pub timestamp: u64,
}

impl Header {
    pub fn to_bytes(&self, nonce: u64) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(&self.index.to_be_bytes());
        out[8..40].copy_from_slice(self.prev_hash.as_bytes());
        out[40..72].copy_from_slice(self.payload_hash.as_bytes());
        out[72..80].copy_from_slice(&self.timestamp.to_be_bytes());
        out[NONCE_OFFSET..].copy_from_slice(&nonce.to_be_bytes());
        out
    }

    /// Lowest nonce whose header hash has at least `difficulty` leading zero
    /// bits, found by counting up from zero.
    pub fn solve(&self, difficulty: u8) -> (u64, Digest) {
        let mut bytes = self.to_bytes(0);
        let mut nonce = 0u64;
        loop {
            bytes[NONCE_OFFSET..].copy_from_slice(&nonce.to_be_bytes());
            let h = crypto::hash(&bytes);
            if h.leading_zero_bits() >= u32::from(difficulty) {
                return (nonce, h);
            }
            nonce = nonce.checked_add(1).expect("nonce space exhausted");
        }
    }
}

pub fn payload_hash(difficulty: u8, txs: &[Transaction]) -> Digest {
    let tag = [difficulty];
    crypto::hash_parts(
        std::iter::once(tag.as_slice()).chain(txs.iter().map(|t| t.tx_hash.as_bytes().as_slice())),
    )
}

impl Block {
    pub fn header(&self) -> Header {
        Header {
            index: self.index,
            prev_hash: self.prev_hash,
            payload_hash: self.payload_hash,
            timestamp: self.timestamp,
        }
    }

    pub fn header_bytes(&self) -> [u8; HEADER_LEN] {
        self.header().to_bytes(self.nonce)
    }

    pub fn compute_hash(&self) -> Digest {
        crypto::hash(&self.header_bytes())
    }

    pub fn compute_payload_hash(&self) -> Digest {
        payload_hash(self.difficulty, &self.transactions)
    }

    pub fn meets_difficulty(&self) -> bool {
        self.block_hash.leading_zero_bits() >= u32::from(self.difficulty)
    }

    /// Hash evaluations the sequential miner spent on this block.
    pub fn attempts(&self) -> u64 {
        self.nonce + 1
    }

    /// Work contributed to the chain: 2^difficulty.
    pub fn work(&self) -> u128 {
        1u128 << self.difficulty
    }
}
