//! Random inputs drawn from proptest strategies with a fixed seed.

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use squant_core::quantization::monos_of_order;
use squant_core::rational::q;
use squant_core::{Parity, Poly, Rational, Sector, SuperDiffOp, SuperFunction, Symbol};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Draws one value without shrinking.
pub fn draw<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner)
        .expect("strategy produces values")
        .current()
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

pub fn poly(max_degree: u32) -> impl Strategy<Value = Poly> {
    prop::collection::vec((0..=max_degree, rational()), 0..=3).prop_map(Poly::from_terms)
}

pub fn function(max_degree: u32) -> impl Strategy<Value = SuperFunction> {
    [
        poly(max_degree),
        poly(max_degree),
        poly(max_degree),
        poly(max_degree),
    ]
    .prop_map(|[a, b, c, d]| SuperFunction::new(a, b, c, d))
}

pub fn parity() -> impl Strategy<Value = Parity> {
    any::<bool>().prop_map(Parity::from_bit)
}

fn of_parity(f: SuperFunction, p: Parity) -> SuperFunction {
    let (even, odd) = f.parity_split();
    if p.is_odd() {
        odd
    } else {
        even
    }
}

pub fn homogeneous(max_degree: u32) -> impl Strategy<Value = (Parity, SuperFunction)> {
    (parity(), function(max_degree)).prop_map(|(p, f)| (p, of_parity(f, p)))
}

/// Nonzero and of parity `p`.
fn nonzero_of(p: Parity, max_degree: u32) -> impl Strategy<Value = SuperFunction> {
    (function(max_degree), 0..=max_degree, 1i64..=5).prop_map(move |(f, d, c)| {
        let f = of_parity(f, p);
        if f.is_zero() {
            let sector = if p.is_odd() { Sector::Xi1 } else { Sector::One };
            SuperFunction::monomial(sector, d, q(c, 1))
        } else {
            f
        }
    })
}

/// A parity-homogeneous operator of contact order exactly `k2` whose principal symbol has
/// parity `p`.
pub fn operator(
    k2: u32,
    p: Parity,
    lambda: Rational,
    mu: Rational,
    coeff_degree: u32,
) -> impl Strategy<Value = SuperDiffOp> {
    // Operator parity is p + k2 (mod 2); term coefficients carry it minus the monomial parity.
    let op_parity = p.plus(Parity::from_bit(k2 % 2 == 1));
    let top = monos_of_order(k2)[0];
    let monos: Vec<_> = (0..=k2)
        .flat_map(monos_of_order)
        .filter(|&m| m != top)
        .collect();
    let coeffs: Vec<_> = monos
        .iter()
        .map(|m| {
            let cp = op_parity.plus(m.parity());
            (any::<bool>(), function(coeff_degree)).prop_map(move |(keep, f)| {
                if keep {
                    of_parity(f, cp)
                } else {
                    SuperFunction::zero()
                }
            })
        })
        .collect();
    let head = nonzero_of(op_parity.plus(top.parity()), coeff_degree);
    (coeffs, head).prop_map(move |(cs, head)| {
        let mut op = SuperDiffOp::zero(lambda.clone(), mu.clone());
        for (m, c) in monos.iter().zip(&cs) {
            op.add_term(*m, c);
        }
        op.add_term(top, &head);
        op
    })
}

/// A nonzero symbol of grade `k2` and parity `p`.
pub fn symbol(
    k2: u32,
    p: Parity,
    lambda: Rational,
    mu: Rational,
    max_degree: u32,
) -> impl Strategy<Value = Symbol> {
    (
        nonzero_of(p, max_degree),
        function(max_degree),
        any::<bool>(),
    )
        .prop_map(move |(a, b, swap)| {
            let b = if k2 == 0 {
                SuperFunction::zero()
            } else {
                of_parity(b, p)
            };
            let (f1, f2) = if swap && k2 > 0 { (b, a) } else { (a, b) };
            Symbol::with_parity(f1, f2, k2, lambda.clone(), mu.clone(), p).expect("homogeneous")
        })
}
