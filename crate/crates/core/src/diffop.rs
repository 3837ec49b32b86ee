//! Differential operators in normal form `Σ a_{l,m,n} ∂x^l D̄1^m D̄2^n`, `m, n ∈ {0, 1}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};
use crate::rational::{format_rational, gbinom, qi, Rational};

/// The monomial `∂x^l D̄1^m D̄2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono {
    pub l: u32,
    pub m: u8,
    pub n: u8,
}

impl Mono {
    pub const ID: Mono = Mono { l: 0, m: 0, n: 0 };

    pub fn new(l: u32, m: u8, n: u8) -> Self {
        assert!(m <= 1 && n <= 1, "D̄ exponents must be 0 or 1");
        Mono { l, m, n }
    }

    /// Doubled contact order `2l + m + n`.
    pub fn k2(self) -> u32 {
        2 * self.l + self.m as u32 + self.n as u32
    }

    pub fn parity(self) -> Parity {
        Parity::from_bit((self.m + self.n) % 2 == 1)
    }

    /// The unique monomial of doubled order `k2` with the given D̄ pattern.
    pub fn of_order(k2: u32, m: u8, n: u8) -> Option<Mono> {
        let rest = k2.checked_sub(m as u32 + n as u32)?;
        (rest % 2 == 0).then(|| Mono::new(rest / 2, m, n))
    }

    /// Normal-ordered product `self ∘ other = sign · mono`.
    pub fn product(self, other: Mono) -> (bool, Mono) {
        // D̄2^{n1} D̄1^{m2} = (-1)^{n1 m2} D̄1^{m2} D̄2^{n1}, then D̄i² = -∂x.
        let mut negative = self.n == 1 && other.m == 1;
        let mut l = self.l + other.l;
        let mut m = self.m + other.m;
        let mut n = self.n + other.n;
        if m == 2 {
            m = 0;
            l += 1;
            negative = !negative;
        }
        if n == 2 {
            n = 0;
            l += 1;
            negative = !negative;
        }
        (negative, Mono { l, m, n })
    }

    /// Applies the monomial to a function: `D̄2` first, then `D̄1`, then `∂x^l`.
    pub fn apply(self, f: &SuperFunction) -> SuperFunction {
        let mut g = f.clone();
        if self.n == 1 {
            g = g.dbar(2);
        }
        if self.m == 1 {
            g = g.dbar(1);
        }
        g.ddx_n(self.l)
    }

    /// Normal form of `self ∘ b` where `b` acts by left multiplication.
    pub fn commute_past(self, b: &SuperFunction) -> Vec<(SuperFunction, Mono)> {
        let mut acc = vec![(b.clone(), Mono::ID)];
        // D̄i ∘ c = D̄i(c) + σ(c) D̄i, with σ the grade involution.
        for (present, i) in [(self.n, 2u8), (self.m, 1u8)] {
            if present == 0 {
                continue;
            }
            let gen = if i == 1 {
                Mono::new(0, 1, 0)
            } else {
                Mono::new(0, 0, 1)
            };
            let mut next = Vec::with_capacity(acc.len() * 2);
            for (c, mono) in acc {
                next.push((c.dbar(i), mono));
                let (neg, prod) = gen.product(mono);
                let sc = c.grade_involution();
                next.push((if neg { -&sc } else { sc }, prod));
            }
            acc = next;
        }
        if self.l == 0 {
            return acc;
        }
        let mut out = Vec::new();
        for (c, mono) in acc {
            let mut deriv = c;
            for j in 0..=self.l {
                if deriv.is_zero() {
                    break;
                }
                let binom = gbinom(&qi(self.l as i64), j);
                out.push((
                    deriv.scale(&binom),
                    Mono {
                        l: mono.l + self.l - j,
                        ..mono
                    },
                ));
                deriv = deriv.ddx();
            }
        }
        out
    }
}

impl Ord for Mono {
    /// Descending `2l+m+n`, then descending `l`, then `(m, n)` ascending.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .k2()
            .cmp(&self.k2())
            .then(other.l.cmp(&self.l))
            .then((self.m, self.n).cmp(&(other.m, other.n)))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Doubled contact order; the contact order itself is `k2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContactOrder {
    pub k2: u32,
}

impl ContactOrder {
    pub fn value(self) -> Rational {
        Rational::new(self.k2.into(), 2.into())
    }
}

/// Operator from `λ`-densities to `μ`-densities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperDiffOp {
    terms: BTreeMap<Mono, SuperFunction>,
    pub lambda: Rational,
    pub mu: Rational,
}

impl SuperDiffOp {
    pub fn zero(lambda: Rational, mu: Rational) -> Self {
        Self {
            terms: BTreeMap::new(),
            lambda,
            mu,
        }
    }

    /// Zero operator with both weights 0.
    pub fn zero_unweighted() -> Self {
        Self::zero(Rational::zero(), Rational::zero())
    }

    /// `coeff · mono` with both weights 0.
    pub fn term(coeff: SuperFunction, mono: Mono) -> Self {
        let mut op = Self::zero_unweighted();
        op.add_term(mono, &coeff);
        op
    }

    /// Constant-coefficient monomial with both weights 0.
    pub fn mono(l: u32, m: u8, n: u8) -> Self {
        Self::term(SuperFunction::one(), Mono::new(l, m, n))
    }

    /// Multiplication by `f`, weights 0.
    pub fn multiplication(f: SuperFunction) -> Self {
        Self::term(f, Mono::ID)
    }

    pub fn with_weights(mut self, lambda: Rational, mu: Rational) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }

    pub fn from_terms(
        terms: impl IntoIterator<Item = (Mono, SuperFunction)>,
        lambda: Rational,
        mu: Rational,
    ) -> Self {
        let mut op = Self::zero(lambda, mu);
        for (mono, c) in terms {
            op.add_term(mono, &c);
        }
        op
    }

    pub fn add_term(&mut self, mono: Mono, c: &SuperFunction) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: Mono) -> SuperFunction {
        self.terms.get(&mono).cloned().unwrap_or_default()
    }

    /// Terms in serialization order (descending contact order).
    pub fn terms(&self) -> impl Iterator<Item = (Mono, &SuperFunction)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(
            self.terms().map(|(m, f)| (m, f.scale(c))),
            self.lambda.clone(),
            self.mu.clone(),
        )
    }

    /// Left multiplication `f · self`.
    pub fn left_mul(&self, f: &SuperFunction) -> Self {
        Self::from_terms(
            self.terms().map(|(m, c)| (m, f * c)),
            self.lambda.clone(),
            self.mu.clone(),
        )
    }

    /// Sum, keeping `self`'s weights.
    pub fn add(&self, other: &SuperDiffOp) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &SuperDiffOp) {
        for (m, c) in other.terms() {
            self.add_term(m, c);
        }
    }

    pub fn sub(&self, other: &SuperDiffOp) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, &-c);
        }
        out
    }

    pub fn contact_order(&self) -> ContactOrder {
        ContactOrder {
            k2: self.terms.keys().next().map_or(0, |m| m.k2()),
        }
    }

    /// Keeps the terms of doubled contact order `≤ k2`.
    pub fn truncate(&self, k2: u32) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(m, _)| m.k2() <= k2)
                .map(|(m, c)| (m, c.clone())),
            self.lambda.clone(),
            self.mu.clone(),
        )
    }

    /// The terms of doubled contact order exactly `k2`.
    pub fn grade_part(&self, k2: u32) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|(m, _)| m.k2() == k2)
                .map(|(m, c)| (m, c.clone())),
            self.lambda.clone(),
            self.mu.clone(),
        )
    }

    /// Operator parity `p(a) + m + n`, if every term agrees.
    pub fn parity(&self) -> Option<Parity> {
        let mut found: Option<Parity> = None;
        for (m, c) in self.terms() {
            let p = c.parity()?.plus(m.parity());
            match found {
                None => found = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(Parity::Even))
    }

    /// `self ∘ other`; requires `self.lambda == other.mu`.
    pub fn compose(&self, other: &SuperDiffOp) -> Result<SuperDiffOp> {
        if self.lambda != other.mu {
            return Err(Error::WeightMismatch {
                left_lambda: format_rational(&self.lambda),
                right_mu: format_rational(&other.mu),
            });
        }
        let mut out = SuperDiffOp::zero(other.lambda.clone(), self.mu.clone());
        for (ma, a) in self.terms() {
            for (mb, b) in other.terms() {
                for (c, mono) in ma.commute_past(b) {
                    let (neg, prod) = mono.product(mb);
                    let coeff = a * &c;
                    out.add_term(prod, &if neg { -&coeff } else { coeff });
                }
            }
        }
        Ok(out)
    }

    /// Composition ignoring the weight chain; the result carries `other.lambda`, `self.mu`.
    pub fn compose_unchecked(&self, other: &SuperDiffOp) -> SuperDiffOp {
        let rhs = other
            .clone()
            .with_weights(other.lambda.clone(), self.lambda.clone());
        self.compose(&rhs).expect("weights aligned")
    }

    pub fn apply(&self, phi: &SuperFunction) -> SuperFunction {
        let mut out = SuperFunction::zero();
        for (m, a) in self.terms() {
            out += &(a * &m.apply(phi));
        }
        out
    }

    /// Largest x-degree among the coefficients.
    pub fn coefficient_degree(&self) -> u32 {
        self.terms()
            .filter_map(|(_, c)| c.degree())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for SuperDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::op_to_text(self))
    }
}
