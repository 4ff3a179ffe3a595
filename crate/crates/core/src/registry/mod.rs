//! Actor registry and record access control on top of the ledger.
//!
//! Every registry operation is a JSON-encoded [`Op`] carried by a signed
//! transaction addressed to [`REGISTRY_ADDRESS`]. State changes only when
//! the transaction is mined, and [`RegistryState::replay`] rebuilds the full
//! state from the chain alone.

mod node;
mod record;
mod state;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::ContractError;
use crate::crypto::{hex_bytes, CryptoError, Digest, PublicKey};
use crate::ledger::LedgerError;
use crate::prediction::PredictionError;

pub use node::Node;
pub use record::{decode_record, encode_record, record_context, RECORD_FEATURES};
pub use state::{validate_id, AccessRequest, Actor, ActorKind, AuditEntry, RegistryState, SealedRecord};

/// Recipient address of registry transactions.
pub const REGISTRY_ADDRESS: &str = "BCN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Register {
        id: String,
        kind: ActorKind,
        public_key: PublicKey,
    },
    Evict {
        id: String,
    },
    Upsert {
        patient: String,
        #[serde(with = "hex_bytes")]
        ciphertext: Vec<u8>,
        #[serde(with = "hex_map")]
        wrapped_keys: BTreeMap<String, Vec<u8>>,
    },
    Request {
        requester: String,
        patient: String,
    },
    Grant {
        patient: String,
        requester: String,
        #[serde(with = "hex_bytes")]
        wrapped_key: Vec<u8>,
    },
    Quarantine {
        blocks: Vec<Digest>,
        patients: Vec<String>,
    },
}

pub(crate) mod hex_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, hex::encode(v))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Vec<u8>>, D::Error> {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((k, crate::crypto::decode_lower_hex(&v).map_err(serde::de::Error::custom)?)))
            .collect()
    }
}

impl Op {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("op serialization is infallible")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, RegistryError> {
        serde_json::from_slice(bytes).map_err(|e| RegistryError::Decode(e.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("already registered: {0}")]
    AlreadyRegistered(String),
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("Invalid Pid")]
    InvalidPatientId,
    #[error("no pending request from {requester} for {patient}")]
    NoRequest { patient: String, requester: String },
    #[error("access denied: {0}")]
    AccessDenied(String),
    #[error("malformed record: {0}")]
    RecordFormat(String),
    #[error("undecodable registry operation: {0}")]
    Decode(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
}
