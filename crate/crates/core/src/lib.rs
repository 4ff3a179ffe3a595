//! Patient-record ledger with signed access control, a small contract
//! engine, an SCA-weighted KNN heart-disease classifier and a network
//! simulation harness.

pub mod contract;
pub mod crypto;
pub mod ledger;
pub mod net;
pub mod prediction;
pub mod registry;

pub type Dataset64 = prediction::Dataset<f64>;
pub type Dataset32 = prediction::Dataset<f32>;
pub type Agent64 = prediction::Agent<f64>;
pub type Agent32 = prediction::Agent<f32>;
pub type ScaConfig64 = prediction::ScaConfig<f64>;
pub type ScaConfig32 = prediction::ScaConfig<f32>;
pub type ScaWknnModel64 = prediction::ScaWknnModel<f64>;
