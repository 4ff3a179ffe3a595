use proptest::prelude::*;

use hdms_core::contract::{self, ContractCall, ContractError, Value, METHODS};
use hdms_core::crypto::generate_keypair;
use hdms_core::registry::{ActorKind, Node};

fn setter() -> impl Strategy<Value = ContractCall> {
    prop_oneof![
        "[a-z]{0,8}".prop_map(|s| ContractCall::new("setname", vec![Value::Str(s)], "CP1")),
        (0u64..120).prop_map(|v| ContractCall::new("setage", vec![Value::Uint(v)], "CP1")),
        (0u64..50).prop_map(|v| ContractCall::new("setdoctorid", vec![Value::Uint(v)], "CP1")),
        (0u64..50).prop_map(|v| ContractCall::new("setchoice", vec![Value::Uint(v)], "CP1")),
        "[A-Z]{1,4}".prop_map(|s| ContractCall::new("settestrequired", vec![Value::Str(s)], "CP1")),
    ]
}

proptest! {
    #[test]
    fn replay_matches_incremental_execution(calls in proptest::collection::vec(setter(), 0..30)) {
        let mut state = contract::deploy();
        for c in &calls {
            state = contract::call(&state, c).unwrap().0;
        }
        prop_assert_eq!(contract::replay(&calls).unwrap(), state.state_hash());
        for getter in METHODS.iter().filter(|m| !m.starts_with("set") && **m != "arr") {
            let (after, _) = contract::call(&state, &ContractCall::new(getter, vec![], "CP1")).unwrap();
            prop_assert_eq!(&after, &state);
        }
    }

    #[test]
    fn call_json_round_trips(c in setter()) {
        prop_assert_eq!(ContractCall::from_json(c.to_json().as_bytes()).unwrap(), c);
    }
}

#[test]
fn doctor_list_is_indexed_in_insertion_order() {
    let calls = [
        ContractCall::new("setdoctorid", vec![11.into()], "CP1"),
        ContractCall::new("setdoctorid", vec![22.into()], "CP1"),
    ];
    let state = contract::replay_state(&calls).unwrap();
    let (_, r) = contract::call(&state, &ContractCall::new("arr", vec![1.into()], "CP1")).unwrap();
    assert_eq!(r.values, [Value::Uint(22)]);
    assert!(contract::call(&state, &ContractCall::new("arr", vec![2.into()], "CP1")).is_err());
}

#[test]
fn bad_calls_are_typed_errors() {
    let s = contract::deploy();
    assert!(matches!(contract::call(&s, &ContractCall::new("selfdestruct", vec![], "X")), Err(ContractError::MethodNotFound(_))));
    assert!(matches!(contract::call(&s, &ContractCall::new("setage", vec!["old".into()], "X")), Err(ContractError::CallError { .. })));
    assert!(matches!(contract::call(&s, &ContractCall::new("getage", vec![1.into()], "X")), Err(ContractError::CallError { .. })));
    let broken = [ContractCall::new("setage", vec![], "X")];
    assert!(matches!(contract::replay(&broken), Err(ContractError::Replay { index: 0, .. })));
}

#[test]
fn calls_recorded_on_chain_rebuild_the_contract() {
    let admin = generate_keypair(1);
    let cp = generate_keypair(2);
    let mut node = Node::new(4).unwrap();
    node.register_actor(&admin, "ADM", ActorKind::Admin, 1).unwrap();
    node.register_actor(&cp, "CP1", ActorKind::Cp, 1).unwrap();
    node.mine(1).unwrap();
    node.submit_contract_call(&cp, "HC", &ContractCall::new("setname", vec!["Ann".into()], "CP1"), 2).unwrap();
    let last = node.submit_contract_call(&cp, "HC", &ContractCall::new("setchoice", vec![3.into()], "CP1"), 2).unwrap();
    node.mine(2).unwrap();
    let state = contract::state_from_chain(node.chain(), "HC").unwrap();
    assert_eq!(state.name, "Ann");
    assert_eq!(state.choice, 3);
    assert_eq!(state.state_hash(), last.new_state_hash);
    // Another caller's identity cannot be borrowed.
    let call = ContractCall::new("setname", vec!["Eve".into()], "ADM");
    assert!(node.submit_contract_call(&cp, "HC", &call, 3).is_err());
}
