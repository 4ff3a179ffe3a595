use serde::Serialize;

/// Static property sheet of one consensus family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsensusProfile {
    pub name: &'static str,
    pub abbreviation: &'static str,
    pub developers: &'static str,
    pub year: Option<u16>,
    pub node_identification: &'static str,
    pub computational_power: &'static str,
    pub energy_efficiency: &'static str,
    pub data_model: &'static str,
    pub application: &'static str,
    pub language: &'static str,
}

const PROFILES: [ConsensusProfile; 3] = [
    ConsensusProfile {
        name: "Proof of Work",
        abbreviation: "POW",
        developers: "Markus Jakobson and Ari Jules",
        year: Some(1999),
        node_identification: "Public",
        computational_power: "High",
        energy_efficiency: "No",
        data_model: "Transaction-based",
        application: "Cryptocurrency. General application",
        language: "C++, Golang Solidity",
    },
    ConsensusProfile {
        name: "Proof Of Stake",
        abbreviation: "POS",
        developers: "Peercoin",
        year: None,
        node_identification: "Public",
        computational_power: "Partial",
        energy_efficiency: "Low",
        data_model: "Account-based",
        application: "Michaelson Application",
        language: "Michaelson",
    },
    ConsensusProfile {
        name: "Delegated Proof of stake",
        abbreviation: "DPOS",
        developers: "Daniel Larimer",
        year: Some(2014),
        node_identification: "Public",
        computational_power: "low",
        energy_efficiency: "Partial",
        data_model: "Transaction based. Account-Based",
        application: "Decentralized Exchange",
        language: "No scripting",
    },
];

pub fn consensus_matrix() -> Vec<ConsensusProfile> {
    PROFILES.to_vec()
}

/// Looks a profile up by abbreviation, ignoring case.
pub fn profile(abbreviation: &str) -> Option<ConsensusProfile> {
    PROFILES.iter().find(|p| p.abbreviation.eq_ignore_ascii_case(abbreviation)).cloned()
}
