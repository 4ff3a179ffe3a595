//! Three-transaction sample ledger: patients 01 to 03 each send a record
//! envelope to their own contract (T1SC, T2SC, T3SC), one block apiece.
//!
//! Key seeds and timestamps were chosen by search so that the sender
//! fingerprints start with 8b536, e7888 and f451a and the transaction hashes
//! with a6697, 686b7 and 9ef7f.

use crate::crypto::{generate_keypair, KeyPair};

use super::{Chain, LedgerError, Transaction};

/// (key seed, transaction timestamp, contract id, patient number).
pub const DEMO_SENDERS: [(u64, u64, &str, &str); 3] = [
    (917_776, 1_601_787_767, "T1SC", "01"),
    (1_985_899, 1_600_789_890, "T2SC", "02"),
    (384_912, 1_600_140_776, "T3SC", "03"),
];

pub fn demo_value(patient: &str) -> String {
    format!("Patient Information (Nonce, Timestamp) Patient {patient} Cardiac Professional {patient}")
}

pub fn demo_keypairs() -> Vec<KeyPair> {
    DEMO_SENDERS.iter().map(|&(seed, ..)| generate_keypair(seed)).collect()
}

pub fn demo_transactions() -> Vec<Transaction> {
    DEMO_SENDERS
        .iter()
        .zip(demo_keypairs())
        .map(|(&(_, ts, to, n), kp)| Transaction::new_signed(&kp, to, demo_value(n).into_bytes(), 0, ts))
        .collect()
}

/// Genesis plus one block per sample transaction.
pub fn demo_chain(difficulty: u8) -> Result<Chain, LedgerError> {
    let mut chain = Chain::genesis(difficulty)?;
    for tx in demo_transactions() {
        let ts = tx.timestamp;
        chain.mine_and_append(vec![tx], ts)?;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::transaction_listing;

    #[test]
    fn listing_rows() {
        let chain = demo_chain(4).unwrap();
        assert!(chain.is_valid());
        let listing = transaction_listing(&chain);
        let lines: Vec<&str> = listing.lines().collect();
        assert_eq!(lines[0], "TxHASH\tBlock\tFrom\tTo\tValue");
        assert_eq!(
            lines[1],
            "a6697...\t1\t8b536.\tT1SC\tPatient Information (Nonce, Timestamp) Patient 01 Cardiac Professional 01"
        );
        assert!(lines[2].starts_with("686b7...\t2\te7888.\tT2SC\t"));
        assert!(lines[3].starts_with("9ef7f...\t3\tf451a.\tT3SC\t"));
    }
}
