mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semiring_ci::chase::{chase_emvd, replay_trace, ChaseOutcome, ChaseState, DEFAULT_MAX_STEPS};
use semiring_ci::dependency::{emvd_of_ci, Dependency};
use semiring_ci::implication::implies_scifd;
use semiring_ci::Schema;

use common::{fixture, letters, saturated_cis};

#[test]
fn replay_reproduces_the_cycle_chase() {
    let sigma = Dependency::parse_jsonl(&fixture("cycle_sigma.jsonl")).unwrap();
    let tau = Dependency::from_json(&fixture("cycle_tau.json")).unwrap();
    let out = chase_emvd(&sigma, &tau, DEFAULT_MAX_STEPS).unwrap();
    let state = out.state();
    let start = ChaseState::initial(&state.schema, &Schema::parse("A"));
    let replayed = replay_trace(&sigma, &start, &state.trace).unwrap();
    assert_eq!(replayed.tuples, state.tuples);
}

#[test]
fn step_bound_yields_unknown() {
    let sigma = Dependency::parse_jsonl(&fixture("cycle_sigma.jsonl")).unwrap();
    let tau = Dependency::from_json(&fixture("cycle_tau.json")).unwrap();
    let out = chase_emvd(&sigma, &tau, 1).unwrap();
    assert_eq!(out.verdict(), "unknown");
}

/// For saturated statements and FDs the chase and the agreement-set decision
/// procedure answer the same question.
#[test]
fn chase_agrees_with_sci_implication() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut seen = [0, 0];
    for _ in 0..300 {
        let v = Schema::new(letters(rng.gen_range(2..=4)));
        let scis = saturated_cis(&v);
        let mut sigma = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            if rng.gen_bool(0.7) {
                sigma.push(scis[rng.gen_range(0..scis.len())].clone());
            } else {
                let a = &v.vars()[rng.gen_range(0..v.len())];
                let b = &v.vars()[rng.gen_range(0..v.len())];
                sigma.push(Dependency::fd(a, b));
            }
        }
        let tau = scis[rng.gen_range(0..scis.len())].clone();
        let implied = implies_scifd(&v, &sigma, &tau).unwrap().is_implied();
        let chase_sigma: Vec<Dependency> = sigma
            .iter()
            .map(|d| emvd_of_ci(d).unwrap_or_else(|| d.clone()))
            .collect();
        let out = chase_emvd(&chase_sigma, &emvd_of_ci(&tau).unwrap(), DEFAULT_MAX_STEPS).unwrap();
        match out {
            ChaseOutcome::Implied(_) => assert!(implied, "{sigma:?} ⊭ {tau}"),
            ChaseOutcome::NotImplied(_) => assert!(!implied, "{sigma:?} ⊨ {tau}"),
            ChaseOutcome::Unknown(_) => panic!("full dependencies always terminate"),
        }
        seen[implied as usize] += 1;
    }
    assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
}
