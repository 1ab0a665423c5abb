#![allow(dead_code)]

use std::path::PathBuf;

use lawshield::law::{AtomRef, Formula, LawFile, NumExpr, Signatures, Valuation};
use lawshield::rl::{train, Hyperparams, QTable};
use lawshield::sim::Scenario;
use lawshield::world::builtin_registry;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 3] = ["p0", "p1", "p2"];

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(repo().join("scenarios").join(format!("{name}.toml"))).unwrap()
}

pub fn law(name: &str) -> LawFile {
    LawFile::load(repo().join("laws").join(format!("{name}.law")), builtin_registry()).unwrap()
}

/// Trains with the scenario's own settings.
pub fn trained(s: &Scenario) -> QTable {
    train(s, s.training.episodes, s.seed, &Hyperparams::from_scenario(s)).unwrap().0
}

/// Boolean atoms `p0..p2` given per step.
pub struct Table(pub Vec<[bool; 3]>);

impl Valuation for Table {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn atom(&self, atom: &AtomRef, step: usize) -> lawshield::Result<bool> {
        let i = ATOMS.iter().position(|a| *a == atom.name).expect("test atoms only");
        Ok(self.0[step][i])
    }
}

/// Signatures for the three nullary test atoms plus a unary `q` with
/// context variable `dv`.
pub struct TestSigs;

impl Signatures for TestSigs {
    fn arity(&self, name: &str) -> Option<usize> {
        match name {
            "p0" | "p1" | "p2" => Some(0),
            "q" => Some(1),
            _ => None,
        }
    }

    fn is_context_var(&self, name: &str) -> bool {
        name == "dv"
    }
}

/// Truth of `f` at `i`, written straight from the quantifier definitions.
pub fn oracle(f: &Formula, t: &[[bool; 3]], i: usize) -> bool {
    let n = t.len();
    match f {
        Formula::Atom(a) => t[i][ATOMS.iter().position(|x| *x == a.name).unwrap()],
        Formula::Not(a) => !oracle(a, t, i),
        Formula::And(a, b) => oracle(a, t, i) && oracle(b, t, i),
        Formula::Or(a, b) => oracle(a, t, i) || oracle(b, t, i),
        Formula::Implies(a, b) => !oracle(a, t, i) || oracle(b, t, i),
        Formula::Next(a) => i + 1 < n && oracle(a, t, i + 1),
        Formula::Until(a, b) => (i..n).any(|j| oracle(b, t, j) && (i..j).all(|k| oracle(a, t, k))),
        Formula::Always(a) => (i..n).all(|k| oracle(a, t, k)),
        Formula::Eventually(a) => (i..n).any(|k| oracle(a, t, k)),
    }
}

/// Random formula of depth at most `depth` over `p0..p2`.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth <= 1 || rng.random_bool(0.2) {
        return Formula::atom(ATOMS[rng.random_range(0..3)]);
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1);
    match rng.random_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::until(sub(rng), sub(rng)),
        6 => Formula::always(sub(rng)),
        _ => Formula::eventually(sub(rng)),
    }
}

pub fn random_trace(rng: &mut ChaCha8Rng, len: usize) -> Vec<[bool; 3]> {
    (0..len).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

/// Every trace of the given length over three atoms.
pub fn all_traces(len: usize) -> impl Iterator<Item = Vec<[bool; 3]>> {
    (0u32..1 << (3 * len)).map(move |bits| {
        (0..len).map(|k| std::array::from_fn(|a| bits >> (3 * k + a) & 1 == 1)).collect()
    })
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = (0..3usize).prop_map(|i| Formula::atom(ATOMS[i]));
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::always),
            inner.clone().prop_map(Formula::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}

/// Formulas without temporal operators.
pub fn arb_state_formula() -> impl Strategy<Value = Formula> {
    let leaf = (0..3usize).prop_map(|i| Formula::atom(ATOMS[i]));
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

pub fn arb_trace(max_len: usize) -> impl Strategy<Value = Vec<[bool; 3]>> {
    proptest::collection::vec(any::<[bool; 3]>(), 1..=max_len)
}

pub fn arb_num_expr() -> impl Strategy<Value = NumExpr> {
    let leaf = prop_oneof![
        (-1e3f64..1e3).prop_map(NumExpr::Const),
        Just(NumExpr::Var("dv".into())),
        Just(NumExpr::Var("k".into())),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| NumExpr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| NumExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| NumExpr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| NumExpr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| NumExpr::Max(Box::new(a), Box::new(b))),
        ]
    })
}

/// Formulas that may also contain the unary atom `q(expr)`.
pub fn arb_formula_with_args() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (0..3usize).prop_map(|i| Formula::atom(ATOMS[i])),
        arb_num_expr().prop_map(|e| Formula::Atom(AtomRef::with_args("q", vec![e]))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::always),
            inner.clone().prop_map(Formula::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}
