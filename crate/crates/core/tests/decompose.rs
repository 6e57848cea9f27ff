mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semiring_ci::decompose::{c_excl, c_star, join, multiplicative_join, normalize_4nf};
use semiring_ci::dependency::{satisfies, Dependency};
use semiring_ci::{KRelation, Schema, Semiring, Tuple, Value};

use common::{fixture, letters};

/// A product of factors over AB, AC, BCD, DE whose conditional factors have
/// constant sums, so the network's independences hold.
fn network(rng: &mut StdRng) -> KRelation {
    let split = |rng: &mut StdRng| {
        let a = rng.gen_range(1..10u64);
        (a, 10 - a)
    };
    let ab: Vec<(u64, u64)> = (0..2).map(|_| split(rng)).collect();
    let ac: Vec<(u64, u64)> = (0..2).map(|_| split(rng)).collect();
    let bcd: Vec<(u64, u64)> = (0..4).map(|_| split(rng)).collect();
    let de: Vec<(u64, u64)> = (0..2).map(|_| split(rng)).collect();
    let pick = |p: (u64, u64), bit: usize| if bit == 0 { p.0 } else { p.1 };
    let mut rows = Vec::new();
    for m in 0..32usize {
        let [a, b, c, d, e] = [0, 1, 2, 3, 4].map(|i| m >> i & 1);
        let w = pick(ab[a], b) * pick(ac[a], c) * pick(bcd[2 * b + c], d) * pick(de[d], e) * (a as u64 + 1);
        rows.push(([a, b, c, d, e].iter().map(|x| x.to_string()).collect(), Value::nat(w)));
    }
    KRelation::from_rows(&letters(5), Semiring::NATURALS, rows).unwrap()
}

#[test]
fn network_decomposition_is_lossless() {
    let sigma = Dependency::parse_jsonl(&fixture("bn.jsonl")).unwrap();
    let plan = normalize_4nf(&Schema::parse("ABCDE"), &sigma).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let r = network(&mut rng);
        for d in &sigma {
            assert!(satisfies(&r, d).unwrap().holds(), "{d}");
        }
        let rebuilt = plan.reconstruct(&r).unwrap();
        assert!(r.equivalent(&rebuilt).unwrap().is_equivalent());
    }
}

#[test]
fn plan_steps_split_on_implied_mvds() {
    let sigma = Dependency::parse_jsonl(&fixture("bn.jsonl")).unwrap();
    let plan = normalize_4nf(&Schema::parse("ABCDE"), &sigma).unwrap();
    assert_eq!(plan.steps.len(), 3);
    for step in &plan.steps {
        let (left, right) = step.parts();
        assert_eq!(left.union(&right), step.split);
        assert!(left != step.split && right != step.split);
    }
}

#[test]
fn join_unrolls_definition_on_hotel_data() {
    let price = KRelation::from_tsv(&fixture("hotel.tsv")).unwrap();
    let k = price.semiring();
    let rd = price.marginal(&Schema::new(["Room", "Date"])).unwrap();
    let rp = price.marginal(&Schema::new(["Room", "Persons"])).unwrap();
    let room = Schema::new(["Room"]);
    let joined = join(&rd, &rp).unwrap();
    let product = multiplicative_join(&rd, &rp).unwrap();
    for (t, v) in joined.entries() {
        // Columns: Date, Persons, Room.
        let u = Tuple::new([t.values()[2].as_str()]);
        let c = c_excl(&rp, &room, &u).unwrap();
        assert_eq!(*v, k.mul(&product.get(t), &c).unwrap());
    }
    assert_eq!(c_star(&price, &room).unwrap(), Value::tropical(210, 1));
}
