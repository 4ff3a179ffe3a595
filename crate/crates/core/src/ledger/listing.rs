use crate::crypto::SHORT_FINGERPRINT_LEN;

use super::{Chain, Transaction};

pub const LISTING_HEADER: [&str; 5] = ["TxHASH", "Block", "From", "To", "Value"];

/// One human-readable transaction line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListingRow {
    pub tx_hash: String,
    pub block: u64,
    pub from: String,
    pub to: String,
    pub value: String,
}

impl ListingRow {
    pub fn to_tsv(&self) -> String {
        format!("{}\t{}\t{}\t{}\t{}", self.tx_hash, self.block, self.from, self.to, self.value)
    }
}

pub fn listing_row(block_index: u64, tx: &Transaction) -> ListingRow {
    let value = match std::str::from_utf8(&tx.value) {
        Ok(text) => text.to_string(),
        Err(_) => format!("<{} bytes>", tx.value.len()),
    };
    ListingRow {
        tx_hash: format!("{}...", &tx.tx_hash.to_hex()[..SHORT_FINGERPRINT_LEN]),
        block: block_index,
        from: format!("{}.", tx.from.short_fingerprint()),
        to: tx.to.clone(),
        value,
    }
}

/// Tab-separated listing of every transaction on the chain, header first.
pub fn transaction_listing(chain: &Chain) -> String {
    let mut out = LISTING_HEADER.join("\t");
    out.push('\n');
    for (block, tx) in chain.transactions() {
        out.push_str(&listing_row(block.index, tx).to_tsv());
        out.push('\n');
    }
    out
}
