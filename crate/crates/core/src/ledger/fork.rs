use serde::Serialize;

use crate::crypto::Digest;

use super::{Chain, LedgerError};

/// Raised when adopting a competing chain discards blocks this node had
/// already accepted. Records housed only in those blocks are quarantined by
/// the registry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Attack51Report {
    /// True when the remote chain replaced the local one.
    pub adopted_remote: bool,
    pub attack51: bool,
    pub orphaned_indices: Vec<u64>,
    pub orphaned_hashes: Vec<Digest>,
    pub orphaned_txs: Vec<Digest>,
}

/// Length of the shared prefix of two chains.
pub fn common_prefix(a: &Chain, b: &Chain) -> usize {
    a.blocks()
        .iter()
        .zip(b.blocks())
        .take_while(|(x, y)| x.block_hash == y.block_hash)
        .count()
}

/// Picks the chain with more cumulative work (sum of 2^difficulty). Equal
/// work goes to the chain whose tip hash is smaller, so the choice does not
/// depend on argument order.
pub fn fork_choice(local: &Chain, remote: &Chain) -> Result<(Chain, Attack51Report), LedgerError> {
    if local.genesis_hash() != remote.genesis_hash() {
        return Err(LedgerError::IncompatibleChains);
    }
    for (side, chain) in [("local", local), ("remote", remote)] {
        let report = chain.validate();
        if !report.valid {
            return Err(LedgerError::InvalidChain(format!("{side}: {report}")));
        }
    }
    let lw = local.cumulative_work();
    let rw = remote.cumulative_work();
    let remote_wins = rw > lw || (rw == lw && remote.tip().block_hash < local.tip().block_hash);
    if !remote_wins {
        return Ok((local.clone(), Attack51Report::default()));
    }
    let shared = common_prefix(local, remote);
    let orphaned = &local.blocks()[shared..];
    let report = Attack51Report {
        adopted_remote: true,
        attack51: !orphaned.is_empty(),
        orphaned_indices: orphaned.iter().map(|b| b.index).collect(),
        orphaned_hashes: orphaned.iter().map(|b| b.block_hash).collect(),
        orphaned_txs: orphaned
            .iter()
            .flat_map(|b| b.transactions.iter().map(|t| t.tx_hash))
            .collect(),
    };
    Ok((remote.clone(), report))
}
