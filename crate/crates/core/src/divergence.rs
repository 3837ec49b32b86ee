//! Affine-equivariant divergence operators `DIV^n` and their tail rows `div^{k2-n}`.
//!
//! The quantization sum runs over one outer index `n = 0..=k2`. Odd `n = 2j+1` selects the
//! odd-index formula with inner index `j`, even `n = 2j` the even-index formula. Each
//! formula is stored as a list of [`DivTerm`]s, so it can be evaluated on a symbol or read
//! off as coefficients.

use num_traits::{One, Zero};

use crate::diffop::{Mono, SuperDiffOp};
use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};
use crate::rational::{format_rational, qi, sign, Rational};
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivTermSpec {
    pub n: u32,
    pub k2: u32,
}

impl DivTermSpec {
    pub fn new(n: u32, k2: u32) -> Result<Self> {
        if n > k2 {
            return Err(Error::IndexOutOfRange { n, k2 });
        }
        Ok(Self { n, k2 })
    }

    fn inner(self) -> u32 {
        self.n / 2
    }

    fn k(self) -> u32 {
        self.k2 / 2
    }
}

/// One summand `coeff · source(F_component)` of an output slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivTerm {
    pub slot: u8,
    pub component: u8,
    pub source: Mono,
    pub coeff: Rational,
}

/// The tail pair `(e1, e2)`; `e2` is `None` when its ∂x exponent would be negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorTailRow {
    pub e1: Mono,
    pub e2: Option<Mono>,
}

impl OperatorTailRow {
    pub fn e1_op(&self) -> SuperDiffOp {
        SuperDiffOp::mono(self.e1.l, self.e1.m, self.e1.n)
    }

    pub fn e2_op(&self) -> Option<SuperDiffOp> {
        self.e2.map(|m| SuperDiffOp::mono(m.l, m.m, m.n))
    }

    pub fn slot(&self, slot: u8) -> Option<Mono> {
        if slot == 1 {
            Some(self.e1)
        } else {
            self.e2
        }
    }
}

fn ratio(num: Rational, den: Rational, what: impl FnOnce() -> String) -> Result<Rational> {
    if den.is_zero() {
        return Err(Error::IntermediateSingularity(what()));
    }
    Ok(num / den)
}

/// Row `div^{k2-n}`.
pub fn div_row(spec: DivTermSpec) -> Result<OperatorTailRow> {
    let k = spec.k() as i64;
    let j = spec.inner() as i64;
    let odd_n = spec.n % 2 == 1;
    let neg = || Error::NegativeExponent {
        n: spec.n,
        k2: spec.k2,
    };
    let mono = |l: i64, m: u8, n: u8| (l >= 0).then(|| Mono::new(l as u32, m, n));
    let (e1, e2) = match (spec.k2.is_multiple_of(2), odd_n) {
        (true, true) => (mono(k - j - 1, 1, 0), mono(k - j - 1, 0, 1)),
        (true, false) => (mono(k - j, 0, 0), mono(k - j - 1, 1, 1)),
        (false, true) => (mono(k - j, 0, 0), mono(k - j - 1, 1, 1)),
        (false, false) => (mono(k - j, 1, 0), mono(k - j, 0, 1)),
    };
    Ok(OperatorTailRow {
        e1: e1.ok_or_else(neg)?,
        e2,
    })
}

/// The summands of `DIV^n(F1, F2)` for symbols of the given parity and weights.
///
/// Slots whose tail entry does not exist are omitted entirely, as are terms
/// carrying `∂x^{-1}`.
pub fn div_terms(
    spec: DivTermSpec,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> Result<Vec<DivTerm>> {
    let row = div_row(spec)?;
    let has_e2 = row.e2.is_some();
    let delta = mu - lambda;
    let kq = qi(spec.k() as i64);
    let j = spec.inner();
    let jq = qi(j as i64);
    let two_lambda = lambda * qi(2);
    let two_delta = &delta * qi(2);
    let mut out = Vec::new();
    let mut push = |slot: u8, component: u8, source: Option<Mono>, coeff: Rational| {
        if let Some(source) = source {
            if !coeff.is_zero() && (slot == 1 || has_e2) {
                out.push(DivTerm {
                    slot,
                    component,
                    source,
                    coeff,
                });
            }
        }
    };
    let d1 = Some(Mono::new(j, 1, 0));
    let d2 = Some(Mono::new(j, 0, 1));
    let plain = Some(Mono::new(j, 0, 0));
    let d12 = (j >= 1).then(|| Mono::new(j - 1, 1, 1));

    if spec.k2.is_multiple_of(2) {
        if spec.n % 2 == 1 {
            // (-1)^{p(F)+1} ( (k+2λ)/k ∂^j D̄2 F2 + ∂^j D̄1 F1 ,  ∂^j D̄2 F1 - (k+2λ)/k ∂^j D̄1 F2 )
            let s = sign(!parity.is_odd());
            let r = ratio(&kq + &two_lambda, kq.clone(), || "k".into())?;
            push(1, 2, d2, &s * &r);
            push(1, 1, d1, s.clone());
            push(2, 1, d2, s.clone());
            push(2, 2, d1, -(&s * &r));
        } else {
            push(1, 1, plain, Rational::one());
            if j >= 1 {
                let denom = &two_delta + &jq - qi(2) * &kq;
                let c = ratio((&kq + &two_lambda) * &jq, &kq * &denom, || {
                    format!(
                        "k (2(mu-lambda) + {j} - 2k) = {}",
                        format_rational(&(&kq * &denom))
                    )
                })?;
                push(1, 2, d12, -c);
            }
            if has_e2 {
                let kj = &kq - &jq;
                let kj2l = &kj + &two_lambda;
                let c2 = ratio((&kq + &two_lambda) * &kj, &kq * &kj2l, || {
                    format!(
                        "k (k - {j} + 2 lambda) = {}",
                        format_rational(&(&kq * &kj2l))
                    )
                })?;
                push(2, 2, plain, c2);
                if j >= 1 {
                    let denom = &two_delta + &jq - qi(2) * &kq;
                    let c3 = ratio(&jq * &kj, &denom * &kj2l, || {
                        format!(
                            "(2(mu-lambda) + {j} - 2k)(k - {j} + 2 lambda) = {}",
                            format_rational(&(&denom * &kj2l))
                        )
                    })?;
                    push(2, 1, d12, c3);
                }
            }
        }
    } else {
        let pre = ratio(
            &two_delta - qi(2) * &kq - qi(1),
            &two_delta - qi(2) * &kq,
            || {
                format!(
                    "2(mu-lambda) - 2k = {}",
                    format_rational(&(&two_delta - qi(2) * &kq))
                )
            },
        )?;
        if spec.n % 2 == 1 {
            // (-1)^{p(F)} P ( ∂^j D̄2 F2 + ∂^j D̄1 F1 ,  (k-j)/(k-j+2λ) (∂^j D̄2 F1 - ∂^j D̄1 F2) )
            let s = sign(parity.is_odd()) * &pre;
            push(1, 2, d2, s.clone());
            push(1, 1, d1, s.clone());
            if has_e2 {
                let kj = &kq - &jq;
                let den = &kj + &two_lambda;
                let r = ratio(kj, den.clone(), || {
                    format!("k - {j} + 2 lambda = {}", format_rational(&den))
                })?;
                push(2, 1, d2, &s * &r);
                push(2, 2, d1, -(&s * &r));
            }
        } else {
            let den = &two_delta + &jq - qi(2) * &kq - qi(1);
            let what = || format!("2(mu-lambda) + {j} - (2k+1) = {}", format_rational(&den));
            let a = ratio(&two_delta + &jq - qi(2) * &kq, den.clone(), what)?;
            let a = &pre * &a;
            push(1, 1, plain, a.clone());
            push(2, 2, plain, a);
            if j >= 1 {
                let b = &pre * &(&jq / &den);
                push(1, 2, d12, -b.clone());
                push(2, 1, d12, b);
            }
        }
    }
    Ok(out)
}

/// `DIV^n(F1, F2) = (G1, G2)`; a structurally absent `G2` is returned as zero.
pub fn div_big(spec: DivTermSpec, s: &Symbol) -> Result<(SuperFunction, SuperFunction)> {
    if spec.k2 != s.k2 {
        return Err(Error::Invalid(format!(
            "divergence for k2 = {} applied to a grade-{} symbol",
            spec.k2, s.k2
        )));
    }
    let terms = div_terms(spec, &s.lambda, &s.mu, s.parity)?;
    let mut g = [SuperFunction::zero(), SuperFunction::zero()];
    for t in terms {
        let f = if t.component == 1 { &s.f1 } else { &s.f2 };
        g[t.slot as usize - 1] += &t.source.apply(f).scale(&t.coeff);
    }
    let [g1, g2] = g;
    Ok((g1, g2))
}

/// `G1 · e1 + G2 · e2`.
pub fn contract(
    g: &(SuperFunction, SuperFunction),
    row: &OperatorTailRow,
    lambda: &Rational,
    mu: &Rational,
) -> Result<SuperDiffOp> {
    let mut op = SuperDiffOp::zero(lambda.clone(), mu.clone());
    op.add_term(row.e1, &g.0);
    match row.e2 {
        Some(e2) => op.add_term(e2, &g.1),
        None if !g.1.is_zero() => {
            return Err(Error::Invalid("second slot has no tail entry".into()));
        }
        None => {}
    }
    Ok(op)
}

/// `contract(DIV^n(S), div^{k2-n})`.
pub fn divergence_term(spec: DivTermSpec, s: &Symbol) -> Result<SuperDiffOp> {
    let g = div_big(spec, s)?;
    contract(&g, &div_row(spec)?, &s.lambda, &s.mu)
}
