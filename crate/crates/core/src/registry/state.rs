use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::crypto::{self, hex_bytes, Digest, PublicKey};
use crate::ledger::{Chain, Transaction};

use super::{hex_map, Op, RegistryError, REGISTRY_ADDRESS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    Admin,
    Patient,
    Cp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub kind: ActorKind,
    pub public_key: PublicKey,
}

/// One sealed version of a patient's record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedRecord {
    pub patient: String,
    pub version: u64,
    #[serde(with = "hex_bytes")]
    pub ciphertext: Vec<u8>,
    /// Record key wrapped to each actor allowed to read this version.
    #[serde(with = "hex_map")]
    pub wrapped_keys: BTreeMap<String, Vec<u8>>,
    pub block_index: u64,
    pub tx_hash: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRequest {
    pub requester: String,
    pub target: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp: u64,
    pub actor: String,
    pub action: String,
    pub target: String,
    pub block_index: u64,
}

/// Registry state, rebuilt by folding the registry transactions of a chain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryState {
    pub actors: BTreeMap<String, Actor>,
    pub attackers: BTreeSet<String>,
    pub records: BTreeMap<String, Vec<SealedRecord>>,
    /// Pending requests keyed by (patient, requester).
    pub requests: BTreeMap<String, BTreeMap<String, AccessRequest>>,
    /// patient → actors granted read access.
    pub grants: BTreeMap<String, BTreeSet<String>>,
    pub quarantined_blocks: BTreeSet<Digest>,
    pub quarantined_patients: BTreeSet<String>,
    pub audit: Vec<AuditEntry>,
}

impl RegistryState {
    pub fn state_hash(&self) -> Digest {
        crypto::hash(serde_json::to_string(self).expect("state serialization is infallible").as_bytes())
    }

    pub fn admin(&self) -> Option<(&String, &Actor)> {
        self.actors.iter().find(|(_, a)| a.kind == ActorKind::Admin)
    }

    pub fn is_active(&self, id: &str) -> bool {
        self.actors.contains_key(id) && !self.attackers.contains(id)
    }

    pub fn actor_of(&self, id: &str, kind: ActorKind) -> Option<&Actor> {
        self.actors.get(id).filter(|a| a.kind == kind)
    }

    pub fn latest_record(&self, patient: &str) -> Option<&SealedRecord> {
        self.records.get(patient).and_then(|v| v.last())
    }

    pub fn pending_requests(&self, patient: &str) -> Vec<&AccessRequest> {
        self.requests.get(patient).map(|m| m.values().collect()).unwrap_or_default()
    }

    /// Applies one registry transaction mined (or about to be mined) at
    /// `block_index`. The state is left untouched on error.
    pub fn apply(&mut self, tx: &Transaction, block_index: u64) -> Result<(), RegistryError> {
        let op = Op::decode(&tx.value)?;
        let mut next = self.clone();
        let (actor, action, target) = next.apply_op(&op, tx, block_index)?;
        next.audit.push(AuditEntry { timestamp: tx.timestamp, actor, action, target, block_index });
        *self = next;
        Ok(())
    }

    fn refuse_attacker(&self, id: &str) -> Result<(), RegistryError> {
        if self.attackers.contains(id) {
            return Err(RegistryError::Forbidden(format!("{id} is listed as an attacker")));
        }
        Ok(())
    }

    fn signer_must_be(&self, id: &str, tx: &Transaction) -> Result<(), RegistryError> {
        match self.actors.get(id) {
            Some(a) if a.public_key == tx.from => Ok(()),
            _ => Err(RegistryError::Forbidden(format!("transaction not signed by {id}"))),
        }
    }

    fn require_admin(&self, tx: &Transaction) -> Result<String, RegistryError> {
        match self.admin() {
            Some((id, a)) if a.public_key == tx.from => Ok(id.clone()),
            _ => Err(RegistryError::Forbidden("admin signature required".into())),
        }
    }

    fn apply_op(&mut self, op: &Op, tx: &Transaction, block_index: u64) -> Result<(String, String, String), RegistryError> {
        match op {
            Op::Register { id, kind, public_key } => {
                validate_id(id)?;
                self.refuse_attacker(id)?;
                if self.actors.contains_key(id) {
                    return Err(RegistryError::AlreadyRegistered(id.clone()));
                }
                if self.actors.values().any(|a| a.public_key == *public_key) {
                    return Err(RegistryError::AlreadyRegistered(format!("key of {id}")));
                }
                if *public_key != tx.from {
                    return Err(RegistryError::Forbidden("registration must be signed by the registered key".into()));
                }
                let admin_exists = self.admin().is_some();
                match (kind, admin_exists) {
                    (ActorKind::Admin, true) => {
                        return Err(RegistryError::Forbidden("an administrator already exists".into()))
                    }
                    (ActorKind::Patient | ActorKind::Cp, false) => {
                        return Err(RegistryError::Forbidden("no administrator registered yet".into()))
                    }
                    _ => {}
                }
                self.actors.insert(id.clone(), Actor { kind: *kind, public_key: *public_key });
                Ok((id.clone(), "register".into(), id.clone()))
            }
            Op::Evict { id } => {
                let admin = self.require_admin(tx)?;
                if !self.is_active(id) {
                    return Err(RegistryError::NotFound(id.clone()));
                }
                if self.actors[id].kind == ActorKind::Admin {
                    return Err(RegistryError::Forbidden("the administrator cannot be evicted".into()));
                }
                self.actors.remove(id);
                self.attackers.insert(id.clone());
                self.grants.remove(id);
                for granted in self.grants.values_mut() {
                    granted.remove(id);
                }
                self.requests.remove(id);
                for pending in self.requests.values_mut() {
                    pending.remove(id);
                }
                self.requests.retain(|_, m| !m.is_empty());
                for versions in self.records.values_mut() {
                    for v in versions.iter_mut() {
                        v.wrapped_keys.remove(id);
                    }
                }
                Ok((admin, "evict".into(), id.clone()))
            }
            Op::Upsert { patient, ciphertext, wrapped_keys } => {
                self.refuse_attacker(patient)?;
                if self.actor_of(patient, ActorKind::Patient).is_none() {
                    return Err(RegistryError::InvalidPatientId);
                }
                self.signer_must_be(patient, tx)?;
                if !wrapped_keys.contains_key(patient) {
                    return Err(RegistryError::RecordFormat("record key not wrapped to its owner".into()));
                }
                let granted = self.grants.get(patient).cloned().unwrap_or_default();
                let extra: Vec<_> =
                    wrapped_keys.keys().filter(|k| *k != patient && !granted.contains(*k)).cloned().collect();
                if !extra.is_empty() {
                    return Err(RegistryError::Forbidden(format!("record key wrapped to ungranted actors {extra:?}")));
                }
                let versions = self.records.entry(patient.clone()).or_default();
                let version = versions.len() as u64 + 1;
                versions.push(SealedRecord {
                    patient: patient.clone(),
                    version,
                    ciphertext: ciphertext.clone(),
                    wrapped_keys: wrapped_keys.clone(),
                    block_index,
                    tx_hash: tx.tx_hash,
                });
                self.quarantined_patients.remove(patient);
                let action = if version == 1 { "create_record" } else { "update_record" };
                Ok((patient.clone(), action.into(), patient.clone()))
            }
            Op::Request { requester, patient } => {
                self.refuse_attacker(requester)?;
                if self.actor_of(requester, ActorKind::Cp).is_none() {
                    return Err(RegistryError::Forbidden(format!("{requester} is not a registered cardiac professional")));
                }
                self.signer_must_be(requester, tx)?;
                if self.attackers.contains(patient) || self.actor_of(patient, ActorKind::Patient).is_none() {
                    return Err(RegistryError::NotFound(patient.clone()));
                }
                self.requests.entry(patient.clone()).or_default().insert(
                    requester.clone(),
                    AccessRequest { requester: requester.clone(), target: patient.clone(), timestamp: tx.timestamp },
                );
                Ok((requester.clone(), "request_access".into(), patient.clone()))
            }
            Op::Grant { patient, requester, wrapped_key } => {
                self.refuse_attacker(patient)?;
                if self.actor_of(patient, ActorKind::Patient).is_none() {
                    return Err(RegistryError::InvalidPatientId);
                }
                self.signer_must_be(patient, tx)?;
                let pending = self.requests.get_mut(patient).and_then(|m| m.remove(requester));
                if pending.is_none() {
                    return Err(RegistryError::NoRequest { patient: patient.clone(), requester: requester.clone() });
                }
                self.requests.retain(|_, m| !m.is_empty());
                if !self.is_active(requester) {
                    return Err(RegistryError::Forbidden(format!("{requester} is not active")));
                }
                let latest = self
                    .records
                    .get_mut(patient)
                    .and_then(|v| v.last_mut())
                    .ok_or_else(|| RegistryError::NotFound(format!("record of {patient}")))?;
                latest.wrapped_keys.insert(requester.clone(), wrapped_key.clone());
                self.grants.entry(patient.clone()).or_default().insert(requester.clone());
                Ok((patient.clone(), "grant_access".into(), requester.clone()))
            }
            Op::Quarantine { blocks, patients } => {
                let admin = self.require_admin(tx)?;
                self.quarantined_blocks.extend(blocks.iter().copied());
                self.quarantined_patients.extend(patients.iter().cloned());
                Ok((admin, "quarantine".into(), patients.join(";")))
            }
        }
    }

    /// Folds every registry transaction on `chain` from genesis.
    pub fn replay(chain: &Chain) -> Result<Self, RegistryError> {
        let mut state = Self::default();
        for (block, tx) in chain.transactions() {
            if tx.to == REGISTRY_ADDRESS {
                state.apply(tx, block.index)?;
            }
        }
        Ok(state)
    }

    /// Audit log as CSV: timestamp, actor, action, target, block_index.
    pub fn audit_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["timestamp", "actor", "action", "target", "block_index"]).expect("in-memory write");
        for e in &self.audit {
            w.write_record([
                e.timestamp.to_string(),
                e.actor.clone(),
                e.action.clone(),
                e.target.clone(),
                e.block_index.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

/// Actor ids are non-empty printable text without commas or semicolons, so
/// they embed cleanly in record rows and audit fields.
pub fn validate_id(id: &str) -> Result<(), RegistryError> {
    if id.is_empty() || id.len() > 64 || id.chars().any(|c| c.is_control() || c == ',' || c == ';') {
        return Err(RegistryError::Forbidden(format!("malformed actor id {id:?}")));
    }
    Ok(())
}
