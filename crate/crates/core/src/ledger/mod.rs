//! Proof-of-work ledger: signed transactions, hash-linked blocks, chain
//! validation and cumulative-work fork choice.

mod block;
mod chain;
mod demo;
mod fork;
mod listing;
mod transaction;

use thiserror::Error;

use crate::crypto::Digest;

pub use block::{payload_hash, Block, Header, HEADER_LEN};
pub use chain::{Chain, ValidationReport, Violation, ViolationKind};
pub use demo::{demo_chain, demo_keypairs, demo_transactions, demo_value, DEMO_SENDERS};
pub use fork::{common_prefix, fork_choice, Attack51Report};
pub use listing::{listing_row, transaction_listing, ListingRow, LISTING_HEADER};
pub use transaction::{Transaction, TxFault};

/// Highest accepted difficulty, in leading zero bits.
pub const MAX_DIFFICULTY: u8 = 32;
pub const DEFAULT_DIFFICULTY: u8 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("state error: {0}")]
    State(String),
    #[error("transaction {tx_hash} rejected: {reason}")]
    TxRejected { tx_hash: Digest, reason: String },
    #[error("block {found_index} does not extend the tip (expected index {expected_index})")]
    Link { expected_index: u64, found_index: u64 },
    #[error("block {index} has {found} leading zero bits, {required} required")]
    Pow { index: u64, required: u8, found: u32 },
    #[error("block {0} hash does not match its contents")]
    HashMismatch(u64),
    #[error("chains do not share a genesis block")]
    IncompatibleChains,
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("malformed chain file: {0}")]
    Format(String),
}
