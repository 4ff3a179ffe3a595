use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crypto::{Digest, PublicKey};

use super::block::{payload_hash, Header};
use super::{Block, LedgerError, Transaction, TxFault, MAX_DIFFICULTY};

/// Hash-linked blocks starting at genesis, all mined to one difficulty.
///
/// Serializes as a JSON array of blocks; the difficulty is read back from
/// the genesis block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    blocks: Vec<Block>,
    difficulty: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Empty,
    BadGenesis,
    IndexMismatch,
    DifficultyMismatch,
    BrokenLink,
    BlockHashMismatch,
    InsufficientWork,
    PayloadHashMismatch,
    TxHashMismatch,
    BadSignature,
    NonceReplay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub block_index: u64,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Machine-readable outcome of [`Chain::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("chain valid");
        }
        for v in &self.violations {
            writeln!(f, "block {}: {:?} ({})", v.block_index, v.kind, v.detail)?;
        }
        Ok(())
    }
}

/// Tracks the last nonce seen per sender key.
#[derive(Debug, Default)]
pub(crate) struct NonceBook(HashMap<PublicKey, u64>);

impl NonceBook {
    pub(crate) fn admit(&mut self, tx: &Transaction) -> bool {
        match self.0.get(&tx.from) {
            Some(&last) if tx.nonce <= last => false,
            _ => {
                self.0.insert(tx.from, tx.nonce);
                true
            }
        }
    }

    pub(crate) fn next_nonce(&self, key: &PublicKey) -> u64 {
        self.0.get(key).map_or(0, |n| n + 1)
    }
}

impl Chain {
    /// Mines a one-block chain with an empty payload and a zero parent hash.
    pub fn genesis(difficulty: u8) -> Result<Self, LedgerError> {
        if difficulty > MAX_DIFFICULTY {
            return Err(LedgerError::Config(format!(
                "difficulty {difficulty} outside 0..={MAX_DIFFICULTY}"
            )));
        }
        let header = Header {
            index: 0,
            prev_hash: Digest::ZERO,
            payload_hash: payload_hash(difficulty, &[]),
            timestamp: 0,
        };
        let (nonce, block_hash) = header.solve(difficulty);
        let block = Block {
            index: 0,
            prev_hash: Digest::ZERO,
            payload_hash: header.payload_hash,
            timestamp: 0,
            nonce,
            block_hash,
            difficulty,
            transactions: Vec::new(),
        };
        Ok(Chain { blocks: vec![block], difficulty })
    }

    /// Wraps blocks without validating them; see [`Chain::validate`].
    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self, LedgerError> {
        let difficulty = blocks
            .first()
            .ok_or_else(|| LedgerError::State("chain has no blocks".into()))?
            .difficulty;
        Ok(Chain { blocks, difficulty })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn difficulty(&self) -> u8 {
        self.difficulty
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always holds genesis")
    }

    pub fn genesis_hash(&self) -> Digest {
        self.blocks[0].block_hash
    }

    pub fn cumulative_work(&self) -> u128 {
        self.blocks.iter().map(Block::work).sum()
    }

    pub fn transactions(&self) -> impl Iterator<Item = (&Block, &Transaction)> {
        self.blocks.iter().flat_map(|b| b.transactions.iter().map(move |t| (b, t)))
    }

    pub(crate) fn nonce_book(&self) -> NonceBook {
        let mut book = NonceBook::default();
        for (_, tx) in self.transactions() {
            book.admit(tx);
        }
        book
    }

    /// Next unused nonce for `key` on this chain.
    pub fn next_nonce(&self, key: &PublicKey) -> u64 {
        self.nonce_book().next_nonce(key)
    }

    /// Mines a block on top of the tip. The nonce search counts up from zero,
    /// so the result is a pure function of chain, transactions and timestamp.
    pub fn mine_block(&self, txs: Vec<Transaction>, timestamp: u64) -> Result<Block, LedgerError> {
        if self.blocks.is_empty() {
            return Err(LedgerError::State("cannot mine on an empty chain".into()));
        }
        let mut book = self.nonce_book();
        for tx in &txs {
            if let Err(fault) = tx.check() {
                return Err(LedgerError::TxRejected {
                    tx_hash: tx.tx_hash,
                    reason: format!("{fault:?}"),
                });
            }
            if !book.admit(tx) {
                return Err(LedgerError::TxRejected {
                    tx_hash: tx.tx_hash,
                    reason: format!("nonce {} already used by sender", tx.nonce),
                });
            }
        }
        let tip = self.tip();
        let header = Header {
            index: tip.index + 1,
            prev_hash: tip.block_hash,
            payload_hash: payload_hash(self.difficulty, &txs),
            timestamp,
        };
        let (nonce, block_hash) = header.solve(self.difficulty);
        Ok(Block {
            index: header.index,
            prev_hash: header.prev_hash,
            payload_hash: header.payload_hash,
            timestamp,
            nonce,
            block_hash,
            difficulty: self.difficulty,
            transactions: txs,
        })
    }

    /// Appends a block that extends the tip.
    pub fn append_block(&mut self, block: Block) -> Result<(), LedgerError> {
        let tip = self.tip();
        if block.prev_hash != tip.block_hash || block.index != tip.index + 1 {
            return Err(LedgerError::Link {
                expected_index: tip.index + 1,
                found_index: block.index,
            });
        }
        if block.difficulty != self.difficulty || block.compute_payload_hash() != block.payload_hash {
            return Err(LedgerError::HashMismatch(block.index));
        }
        if block.compute_hash() != block.block_hash {
            return Err(LedgerError::HashMismatch(block.index));
        }
        if !block.meets_difficulty() {
            return Err(LedgerError::Pow {
                index: block.index,
                required: self.difficulty,
                found: block.block_hash.leading_zero_bits(),
            });
        }
        let mut book = self.nonce_book();
        for tx in &block.transactions {
            if tx.check().is_err() || !book.admit(tx) {
                return Err(LedgerError::TxRejected {
                    tx_hash: tx.tx_hash,
                    reason: "invalid transaction in block".into(),
                });
            }
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Mines `txs` into a new block and appends it.
    pub fn mine_and_append(
        &mut self,
        txs: Vec<Transaction>,
        timestamp: u64,
    ) -> Result<&Block, LedgerError> {
        let block = self.mine_block(txs, timestamp)?;
        self.append_block(block)?;
        Ok(self.tip())
    }

    /// Checks every link, hash, difficulty, signature and nonce invariant.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut push = |block_index: u64, kind: ViolationKind, detail: String| {
            violations.push(Violation { block_index, kind, detail });
        };
        let Some(genesis) = self.blocks.first() else {
            push(0, ViolationKind::Empty, "no blocks".into());
            return ValidationReport { valid: false, violations };
        };
        if genesis.prev_hash != Digest::ZERO || !genesis.transactions.is_empty() {
            push(0, ViolationKind::BadGenesis, "genesis must be empty with a zero parent".into());
        }
        let mut book = NonceBook::default();
        for (pos, block) in self.blocks.iter().enumerate() {
            let idx = block.index;
            if idx != pos as u64 {
                push(idx, ViolationKind::IndexMismatch, format!("position {pos}"));
            }
            if block.difficulty != self.difficulty {
                push(idx, ViolationKind::DifficultyMismatch, format!("{}", block.difficulty));
            }
            if pos > 0 && block.prev_hash != self.blocks[pos - 1].block_hash {
                push(idx, ViolationKind::BrokenLink, "prev_hash does not match parent".into());
            }
            if block.compute_hash() != block.block_hash {
                push(idx, ViolationKind::BlockHashMismatch, "header hash differs".into());
            }
            if !block.meets_difficulty() {
                push(
                    idx,
                    ViolationKind::InsufficientWork,
                    format!("{} leading zero bits", block.block_hash.leading_zero_bits()),
                );
            }
            if block.compute_payload_hash() != block.payload_hash {
                push(idx, ViolationKind::PayloadHashMismatch, "payload hash differs".into());
            }
            for tx in &block.transactions {
                match tx.check() {
                    Ok(()) => {}
                    Err(TxFault::HashMismatch) => {
                        push(idx, ViolationKind::TxHashMismatch, tx.tx_hash.to_hex())
                    }
                    Err(TxFault::BadSignature) => {
                        push(idx, ViolationKind::BadSignature, tx.tx_hash.to_hex())
                    }
                }
                if !book.admit(tx) {
                    push(idx, ViolationKind::NonceReplay, tx.tx_hash.to_hex());
                }
            }
        }
        ValidationReport { valid: violations.is_empty(), violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("chain serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self, LedgerError> {
        serde_json::from_str(s).map_err(|e| LedgerError::Format(e.to_string()))
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self, LedgerError> {
        serde_json::from_slice(bytes).map_err(|e| LedgerError::Format(e.to_string()))
    }
}

impl Serialize for Chain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Chain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let blocks = Vec::<Block>::deserialize(d)?;
        Chain::from_blocks(blocks).map_err(serde::de::Error::custom)
    }
}
