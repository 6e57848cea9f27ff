mod common;

use num::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semiring_ci::dependency::{satisfies, Dependency};
use semiring_ci::implication::implies_scifd;
use semiring_ci::info::entropic_vector;
use semiring_ci::proofs::{check_dependency_proof, check_entropic_proof, check_proof, ProofScript, Statement};
use semiring_ci::{KRelation, Schema, Semiring, Value};

use common::{fixture, letters, subsets, two_tuple};

fn mvd3() -> ProofScript {
    ProofScript::from_json(&fixture("mvd3_simulation.proof.json")).unwrap()
}

fn premises(script: &ProofScript) -> Vec<Dependency> {
    script
        .premises
        .iter()
        .map(|p| match p {
            Statement::Dep(d) => d.clone(),
            Statement::Ineq(_) => panic!("inequality premise"),
        })
        .collect()
}

#[test]
fn mvd3_simulation_checks() {
    let script = mvd3();
    let v = Schema::parse("ABCDEFGH");
    let sigma = premises(&script);
    let verified = check_dependency_proof(&v, &sigma, &script).unwrap();
    let claim = Dependency::ci("ADEG", "C", "BFH");
    assert_eq!(verified.conclusion, Statement::Dep(claim.clone()));
    assert!(verified.existential.is_empty());
    // The claim is saturated, so SCI implication decides it independently.
    assert!(implies_scifd(&v, &sigma, &claim).unwrap().is_implied());
}

#[test]
fn mvd3_conclusion_holds_on_every_two_tuple_model() {
    let script = mvd3();
    let v = Schema::parse("ABCDEFGH");
    let sigma = premises(&script);
    let claim = Dependency::ci("ADEG", "C", "BFH");
    let mut models = 0;
    for agree in subsets(&v) {
        for k in [Semiring::BOOLEAN, Semiring::NATURALS, Semiring::TROPICAL] {
            let r = two_tuple(k, &v, &agree);
            if sigma.iter().all(|d| satisfies(&r, d).unwrap().holds()) {
                models += 1;
                assert!(satisfies(&r, &claim).unwrap().holds(), "{agree}");
            }
        }
    }
    assert!(models > 0);
}

#[test]
fn dependency_proof_must_use_sigma() {
    let script = mvd3();
    let v = Schema::parse("ABCDEFGH");
    let sigma = premises(&script);
    assert_eq!(check_dependency_proof(&v, &sigma[..1], &script).unwrap_err().step, 0);
    let mut bad = script.clone();
    bad.steps[11].prem = vec![11, 7];
    assert_eq!(check_dependency_proof(&v, &sigma, &bad).unwrap_err().step, 12);
    let mut bad = script.clone();
    bad.steps[3].rule = "s3".into();
    assert_eq!(check_proof(&bad).unwrap_err().step, 4);
}

fn zy_script() -> ProofScript {
    ProofScript::from_json(&fixture("zhang_yeung.proof.json")).unwrap()
}

#[test]
fn copy_pair_may_come_in_either_order() {
    let mut script = zy_script();
    script.steps.swap(0, 1);
    script.steps[0].cert = script.steps[1].cert.take();
    for step in &mut script.steps {
        for p in &mut step.prem {
            *p = match *p {
                1 => 2,
                2 => 1,
                other => other,
            };
        }
    }
    check_entropic_proof(&Schema::parse("ABCD"), &script).unwrap();
}

#[test]
fn script_round_trips_through_json() {
    let script = zy_script();
    let again = ProofScript::from_json(&script.to_json()).unwrap();
    assert_eq!(again, script);
}

#[test]
fn scale_and_polymatroid_need_positive_coefficients() {
    let mut script = zy_script();
    script.steps[7].cert = Some(serde_json::json!({"factor": "-3"}));
    assert_eq!(check_proof(&script).unwrap_err().step, 8);
    let mut script = zy_script();
    script.steps[5].cert.as_mut().unwrap()["instances"][0]["coef"] = "0".into();
    assert_eq!(check_proof(&script).unwrap_err().step, 6);
}

#[test]
fn unknown_rule_is_rejected() {
    let mut script = zy_script();
    script.steps[2].rule = "magic".into();
    let e = check_proof(&script).unwrap_err();
    assert_eq!(e.step, 3);
    assert!(e.reason.contains("magic"));
}

#[test]
fn claim_must_match() {
    let mut script = zy_script();
    script.claim = Some(Statement::Dep(Dependency::ci("A", "B", "C")));
    assert_eq!(check_proof(&script).unwrap_err().step, script.steps.len());
}

/// The proven inequality holds on random distributions of four small variables.
#[test]
fn zhang_yeung_holds_numerically() {
    let script = zy_script();
    let Statement::Ineq(expr) = check_proof(&script).unwrap().conclusion else {
        panic!("not an inequality")
    };
    let vars = letters(4);
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..200 {
        let mut rows = std::collections::BTreeMap::new();
        for _ in 0..rng.gen_range(1..=10) {
            let t: Vec<String> = (0..4).map(|_| rng.gen_range(0..2).to_string()).collect();
            rows.insert(t, Value::rational(rng.gen_range(1..=9), 1));
        }
        let r = KRelation::from_rows(&vars, Semiring::RATIONALS, rows).unwrap();
        let h = entropic_vector(&r).unwrap();
        let total: f64 = expr
            .coeffs()
            .iter()
            .map(|(s, c)| c.to_f64().unwrap() * h.get(s).unwrap())
            .sum();
        assert!(total >= -1e-9, "{total} on\n{r}");
    }
}
