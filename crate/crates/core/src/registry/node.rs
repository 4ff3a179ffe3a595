use std::collections::{BTreeMap, BTreeSet};

use crate::contract::{self, CallResult, ContractCall};
use crate::crypto::{self, Digest, KeyPair, RecordKey};
use crate::ledger::{fork_choice, Attack51Report, Block, Chain, Transaction};
use crate::prediction::{Classifier, ScaWknnModel};

use super::{decode_record, record_context, ActorKind, Op, RegistryError, RegistryState, REGISTRY_ADDRESS};

/// One ledger owner: the chain, the registry state it implies, and the
/// transactions waiting for the next block.
///
/// Submissions are checked against the state as it will be once every
/// pending transaction is mined; reads only see mined state.
#[derive(Debug, Clone)]
pub struct Node {
    chain: Chain,
    state: RegistryState,
    projected: RegistryState,
    pending: Vec<Transaction>,
}

impl Node {
    pub fn new(difficulty: u8) -> Result<Self, RegistryError> {
        Self::from_chain(Chain::genesis(difficulty)?)
    }

    /// Validates `chain` and rebuilds the registry state from it.
    pub fn from_chain(chain: Chain) -> Result<Self, RegistryError> {
        let report = chain.validate();
        if !report.valid {
            return Err(crate::ledger::LedgerError::InvalidChain(report.to_string()).into());
        }
        let state = RegistryState::replay(&chain)?;
        Ok(Self { chain, projected: state.clone(), state, pending: Vec::new() })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn state(&self) -> &RegistryState {
        &self.state
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    fn next_nonce(&self, kp: &KeyPair) -> u64 {
        let on_chain = self.chain.next_nonce(&kp.public_key);
        self.pending
            .iter()
            .filter(|t| t.from == kp.public_key)
            .map(|t| t.nonce + 1)
            .fold(on_chain, u64::max)
    }

    fn submit_op(&mut self, kp: &KeyPair, op: &Op, timestamp: u64) -> Result<Digest, RegistryError> {
        let tx = Transaction::new_signed(kp, REGISTRY_ADDRESS, op.encode(), self.next_nonce(kp), timestamp);
        self.projected.apply(&tx, self.chain.len() as u64)?;
        let hash = tx.tx_hash;
        self.pending.push(tx);
        Ok(hash)
    }

    /// Mines every pending transaction into one block.
    pub fn mine(&mut self, timestamp: u64) -> Result<&Block, RegistryError> {
        let txs = std::mem::take(&mut self.pending);
        match self.chain.mine_and_append(txs.clone(), timestamp) {
            Ok(_) => {
                self.state = self.projected.clone();
                Ok(self.chain.tip())
            }
            Err(e) => {
                self.pending = txs;
                Err(e.into())
            }
        }
    }

    pub fn register_actor(&mut self, kp: &KeyPair, id: &str, kind: ActorKind, timestamp: u64) -> Result<Digest, RegistryError> {
        let op = Op::Register { id: id.to_string(), kind, public_key: kp.public_key };
        self.submit_op(kp, &op, timestamp)
    }

    pub fn evict_attacker(&mut self, admin: &KeyPair, id: &str, timestamp: u64) -> Result<Digest, RegistryError> {
        self.submit_op(admin, &Op::Evict { id: id.to_string() }, timestamp)
    }

    /// Seals `record` under a fresh version key and wraps that key to the
    /// patient and every current grantee. Returns the new version number.
    pub fn upsert_patient_data(
        &mut self,
        patient_kp: &KeyPair,
        patient: &str,
        record: &[u8],
        timestamp: u64,
    ) -> Result<u64, RegistryError> {
        if self.projected.attackers.contains(patient) {
            return Err(RegistryError::Forbidden(format!("{patient} is listed as an attacker")));
        }
        if self.projected.actor_of(patient, ActorKind::Patient).is_none() {
            return Err(RegistryError::InvalidPatientId);
        }
        let version = self.projected.records.get(patient).map_or(0, Vec::len) as u64 + 1;
        let key = RecordKey::derive(&patient_kp.private_key, &record_context(patient, version));
        let mut wrapped_keys = BTreeMap::new();
        wrapped_keys.insert(patient.to_string(), crypto::wrap_key(&key, &patient_kp.public_key));
        for grantee in self.projected.grants.get(patient).into_iter().flatten() {
            if let Some(actor) = self.projected.actors.get(grantee) {
                wrapped_keys.insert(grantee.clone(), crypto::wrap_key(&key, &actor.public_key));
            }
        }
        let op = Op::Upsert { patient: patient.to_string(), ciphertext: crypto::seal(&key, record), wrapped_keys };
        self.submit_op(patient_kp, &op, timestamp)?;
        Ok(version)
    }

    pub fn request_access(&mut self, cp_kp: &KeyPair, cp: &str, patient: &str, timestamp: u64) -> Result<Digest, RegistryError> {
        let op = Op::Request { requester: cp.to_string(), patient: patient.to_string() };
        self.submit_op(cp_kp, &op, timestamp)
    }

    /// Wraps the key of the patient's latest record version to `cp`.
    pub fn grant_access(&mut self, patient_kp: &KeyPair, patient: &str, cp: &str, timestamp: u64) -> Result<Digest, RegistryError> {
        let pending = self.projected.requests.get(patient).is_some_and(|m| m.contains_key(cp));
        if !pending {
            if self.projected.attackers.contains(patient) {
                return Err(RegistryError::Forbidden(format!("{patient} is listed as an attacker")));
            }
            return Err(RegistryError::NoRequest { patient: patient.to_string(), requester: cp.to_string() });
        }
        let grantee = self
            .projected
            .actors
            .get(cp)
            .ok_or_else(|| RegistryError::NotFound(cp.to_string()))?
            .public_key;
        let latest = self
            .projected
            .latest_record(patient)
            .ok_or_else(|| RegistryError::NotFound(format!("record of {patient}")))?;
        let key = RecordKey::derive(&patient_kp.private_key, &record_context(patient, latest.version));
        let op = Op::Grant {
            patient: patient.to_string(),
            requester: cp.to_string(),
            wrapped_key: crypto::wrap_key(&key, &grantee),
        };
        self.submit_op(patient_kp, &op, timestamp)
    }

    /// Decrypts the latest mined version of `patient`'s record for `reader`.
    pub fn view_record(&self, reader_kp: &KeyPair, reader: &str, patient: &str) -> Result<Vec<u8>, RegistryError> {
        let s = &self.state;
        let deny = |why: String| Err(RegistryError::AccessDenied(why));
        if s.attackers.contains(reader) || s.attackers.contains(patient) {
            return deny("an attacker-listed party is involved".into());
        }
        match s.actors.get(reader) {
            Some(a) if a.public_key == reader_kp.public_key => {}
            _ => return deny(format!("{reader} is not a registered holder of this key")),
        }
        let record = s.latest_record(patient).ok_or_else(|| RegistryError::NotFound(format!("record of {patient}")))?;
        let block_hash = self.chain.blocks().get(record.block_index as usize).map(|b| b.block_hash);
        if s.quarantined_patients.contains(patient) || block_hash.is_some_and(|h| s.quarantined_blocks.contains(&h)) {
            return deny(format!("record of {patient} is quarantined after a chain reorganization"));
        }
        let Some(wrapped) = record.wrapped_keys.get(reader) else {
            return deny(format!("{reader} holds no key for the record of {patient}"));
        };
        let key = crypto::unwrap_key(wrapped, reader_kp).map_err(|_| RegistryError::AccessDenied("key unwrap failed".into()))?;
        crypto::unseal(&key, &record.ciphertext).map_err(|_| RegistryError::AccessDenied("record unseal failed".into()))
    }

    /// Opens the patient's record as `cp` and classifies it.
    pub fn cp_view_and_predict(
        &self,
        cp_kp: &KeyPair,
        cp: &str,
        patient: &str,
        model: &ScaWknnModel<f64>,
    ) -> Result<u8, RegistryError> {
        if self.state.actor_of(cp, ActorKind::Cp).is_none() {
            return Err(RegistryError::AccessDenied(format!("{cp} is not an active cardiac professional")));
        }
        let plain = self.view_record(cp_kp, cp, patient)?;
        let (id, features) = decode_record(&plain)?;
        if id != patient {
            return Err(RegistryError::RecordFormat(format!("record names {id}, expected {patient}")));
        }
        Ok(model.predict(&features)?)
    }

    /// Executes a contract call against the contract's current state and
    /// queues it as a transaction to `contract_id`.
    pub fn submit_contract_call(
        &mut self,
        kp: &KeyPair,
        contract_id: &str,
        call: &ContractCall,
        timestamp: u64,
    ) -> Result<CallResult, RegistryError> {
        if contract_id == REGISTRY_ADDRESS {
            return Err(RegistryError::Forbidden(format!("{REGISTRY_ADDRESS} is not a contract")));
        }
        match self.projected.actors.get(&call.caller) {
            Some(a) if a.public_key == kp.public_key && !self.projected.attackers.contains(&call.caller) => {}
            _ => return Err(RegistryError::Forbidden(format!("{} cannot call contracts with this key", call.caller))),
        }
        let mut calls = contract::calls_on_chain(&self.chain, contract_id)?;
        for tx in self.pending.iter().filter(|t| t.to == contract_id) {
            calls.push(ContractCall::from_json(&tx.value)?);
        }
        let state = contract::replay_state(&calls)?;
        let (_, result) = contract::call(&state, call)?;
        let tx = Transaction::new_signed(kp, contract_id, call.to_json().into_bytes(), self.next_nonce(kp), timestamp);
        self.pending.push(tx);
        Ok(result)
    }

    /// Runs fork choice against `remote`. When the remote chain wins and
    /// local blocks are orphaned, the admin records a quarantine of the
    /// orphaned blocks and of every patient whose record was written in
    /// them; reads of those records are refused until the patient writes a
    /// new version. Pending transactions are dropped on reorganization.
    pub fn adopt_chain(&mut self, remote: &Chain, admin: &KeyPair, timestamp: u64) -> Result<Attack51Report, RegistryError> {
        let (winner, report) = fork_choice(&self.chain, remote)?;
        if !report.adopted_remote {
            return Ok(report);
        }
        let orphaned: BTreeSet<u64> = report.orphaned_indices.iter().copied().collect();
        let patients: BTreeSet<String> = self
            .chain
            .blocks()
            .iter()
            .filter(|b| orphaned.contains(&b.index))
            .flat_map(|b| &b.transactions)
            .filter(|t| t.to == REGISTRY_ADDRESS)
            .filter_map(|t| match Op::decode(&t.value) {
                Ok(Op::Upsert { patient, .. }) => Some(patient),
                _ => None,
            })
            .collect();
        let mut node = Node::from_chain(winner)?;
        if report.attack51 {
            let op = Op::Quarantine { blocks: report.orphaned_hashes.clone(), patients: patients.into_iter().collect() };
            node.submit_op(admin, &op, timestamp)?;
            node.mine(timestamp)?;
        }
        *self = node;
        Ok(report)
    }
}
