//! Deterministic patient/cardiologist contract executed from ledger
//! transactions.
//!
//! The contract stores a single patient intake form. Every call is a JSON
//! object `{"method", "args", "caller"}` carried as the value of a
//! transaction addressed to the contract id. State is hashed from its JSON
//! encoding, whose field order is fixed by the struct definition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{self, Digest};
use crate::ledger::Chain;

pub const CONSULTANT_SELECTED_MSG: &str = "Cosultant is Selected";
pub const REQUIRED_TEST_MSG: &str = "Required Test";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractState {
    pub name: String,
    pub age: u64,
    pub gender: String,
    pub symptoms: String,
    pub id: u64,
    pub doctor_ids: Vec<u64>,
    pub choice: u64,
    pub testrequired: String,
    pub predictresult: String,
    pub result: String,
    pub sugerreportresult: String,
    pub cholesterolreportresult: String,
}

/// Argument or return value: the contract only knows unsigned integers and
/// strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Uint(u64),
    Str(String),
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Uint(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractCall {
    pub method: String,
    pub args: Vec<Value>,
    pub caller: String,
}

impl ContractCall {
    pub fn new(method: &str, args: Vec<Value>, caller: &str) -> Self {
        Self { method: method.to_string(), args, caller: caller.to_string() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("call serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ContractError> {
        serde_json::from_slice(bytes).map_err(|e| ContractError::Decode(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallResult {
    pub values: Vec<Value>,
    pub new_state_hash: Digest,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContractError {
    #[error("method not found: {0}")]
    MethodNotFound(String),
    #[error("bad call to {method}: {reason}")]
    CallError { method: String, reason: String },
    #[error("undecodable call: {0}")]
    Decode(String),
    #[error("call {index} failed: {source}")]
    Replay { index: usize, source: Box<ContractError> },
}

/// Every method the contract exposes. `arr`, `result`, `sugerreportresult`
/// and `cholesterolreportresult` are the accessors of public fields.
pub const METHODS: [&str; 21] = [
    "setname",
    "getname",
    "setage",
    "getage",
    "setgender",
    "getgender",
    "setsymptyoms",
    "getsymptyoms",
    "setid",
    "getid",
    "setdoctorid",
    "setchoice",
    "getchoice",
    "settestrequired",
    "gettestrequired",
    "setpredictresult",
    "getpredictresult",
    "arr",
    "result",
    "sugerreportresult",
    "cholesterolreportresult",
];

pub fn deploy() -> ContractState {
    ContractState::default()
}

impl ContractState {
    pub fn state_hash(&self) -> Digest {
        crypto::hash(serde_json::to_string(self).expect("state serialization is infallible").as_bytes())
    }
}

fn bad(method: &str, reason: impl Into<String>) -> ContractError {
    ContractError::CallError { method: method.to_string(), reason: reason.into() }
}

fn arity(c: &ContractCall, n: usize) -> Result<(), ContractError> {
    if c.args.len() == n {
        Ok(())
    } else {
        Err(bad(&c.method, format!("expected {n} arguments, got {}", c.args.len())))
    }
}

fn one_str(c: &ContractCall) -> Result<String, ContractError> {
    arity(c, 1)?;
    match &c.args[0] {
        Value::Str(s) => Ok(s.clone()),
        Value::Uint(_) => Err(bad(&c.method, "expected a string argument")),
    }
}

fn one_uint(c: &ContractCall) -> Result<u64, ContractError> {
    arity(c, 1)?;
    match &c.args[0] {
        Value::Uint(v) => Ok(*v),
        Value::Str(_) => Err(bad(&c.method, "expected an unsigned integer argument")),
    }
}

/// Applies one call. Getters return the state unchanged.
pub fn call(state: &ContractState, c: &ContractCall) -> Result<(ContractState, CallResult), ContractError> {
    if !METHODS.contains(&c.method.as_str()) {
        return Err(ContractError::MethodNotFound(c.method.clone()));
    }
    let mut next = state.clone();
    let values: Vec<Value> = match c.method.as_str() {
        "setname" => {
            next.name = one_str(c)?;
            vec![]
        }
        "setage" => {
            next.age = one_uint(c)?;
            vec![]
        }
        "setgender" => {
            next.gender = one_str(c)?;
            vec![]
        }
        "setsymptyoms" => {
            next.symptoms = one_str(c)?;
            vec![]
        }
        "setid" => {
            next.id = one_uint(c)?;
            vec![]
        }
        "setdoctorid" => {
            next.doctor_ids.push(one_uint(c)?);
            vec![]
        }
        "setchoice" => {
            next.choice = one_uint(c)?;
            vec![]
        }
        "settestrequired" => {
            next.testrequired = one_str(c)?;
            vec![]
        }
        "setpredictresult" => {
            next.predictresult = one_str(c)?;
            vec![]
        }
        "arr" => {
            let i = one_uint(c)?;
            let v = usize::try_from(i)
                .ok()
                .and_then(|i| state.doctor_ids.get(i))
                .ok_or_else(|| bad(&c.method, format!("index {i} out of range")))?;
            vec![Value::Uint(*v)]
        }
        getter => {
            arity(c, 0)?;
            match getter {
                "getname" => vec![Value::Str(state.name.clone())],
                "getage" => vec![Value::Uint(state.age)],
                "getgender" => vec![Value::Str(state.gender.clone())],
                "getsymptyoms" => vec![Value::Str(state.symptoms.clone())],
                "getid" => vec![Value::Uint(state.id)],
                "getchoice" => vec![Value::Uint(state.choice), CONSULTANT_SELECTED_MSG.into()],
                "gettestrequired" => vec![Value::Str(state.testrequired.clone()), REQUIRED_TEST_MSG.into()],
                "getpredictresult" => vec![Value::Str(state.predictresult.clone())],
                "result" => vec![Value::Str(state.result.clone())],
                "sugerreportresult" => vec![Value::Str(state.sugerreportresult.clone())],
                "cholesterolreportresult" => vec![Value::Str(state.cholesterolreportresult.clone())],
                other => unreachable!("{other} is listed in METHODS"),
            }
        }
    };
    let new_state_hash = next.state_hash();
    Ok((next, CallResult { values, new_state_hash }))
}

/// Folds `calls` over a fresh deployment.
pub fn replay_state<'a>(calls: impl IntoIterator<Item = &'a ContractCall>) -> Result<ContractState, ContractError> {
    let mut state = deploy();
    for (index, c) in calls.into_iter().enumerate() {
        state = call(&state, c)
            .map_err(|e| ContractError::Replay { index, source: Box::new(e) })?
            .0;
    }
    Ok(state)
}

pub fn replay<'a>(calls: impl IntoIterator<Item = &'a ContractCall>) -> Result<Digest, ContractError> {
    replay_state(calls).map(|s| s.state_hash())
}

/// Decodes the calls addressed to `contract_id`, in chain order.
pub fn calls_on_chain(chain: &Chain, contract_id: &str) -> Result<Vec<ContractCall>, ContractError> {
    chain
        .transactions()
        .filter(|(_, tx)| tx.to == contract_id)
        .enumerate()
        .map(|(index, (_, tx))| {
            ContractCall::from_json(&tx.value).map_err(|e| ContractError::Replay { index, source: Box::new(e) })
        })
        .collect()
}

/// Rebuilds the contract state from its transactions on `chain`.
pub fn state_from_chain(chain: &Chain, contract_id: &str) -> Result<ContractState, ContractError> {
    replay_state(&calls_on_chain(chain, contract_id)?)
}
