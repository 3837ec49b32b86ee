//! Graded symbol spaces: pairs `(F1, F2)` at doubled contact order `k2`.

use crate::contact::ContactHamiltonian;
use crate::diffop::{Mono, SuperDiffOp};
use crate::error::{Error, Result};
use crate::grassmann::{Parity, SuperFunction};
use crate::rational::{q, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub f1: SuperFunction,
    pub f2: SuperFunction,
    pub k2: u32,
    pub lambda: Rational,
    pub mu: Rational,
    pub parity: Parity,
}

impl Symbol {
    /// Infers the parity; the zero symbol is even.
    pub fn new(
        f1: SuperFunction,
        f2: SuperFunction,
        k2: u32,
        lambda: Rational,
        mu: Rational,
    ) -> Result<Self> {
        let parity = match (f1.parity(), f2.parity()) {
            (Some(a), _) if !f1.is_zero() => a,
            (_, Some(b)) => b,
            _ => return Err(Error::NotHomogeneous("symbol component")),
        };
        Self::with_parity(f1, f2, k2, lambda, mu, parity)
    }

    pub fn with_parity(
        f1: SuperFunction,
        f2: SuperFunction,
        k2: u32,
        lambda: Rational,
        mu: Rational,
        parity: Parity,
    ) -> Result<Self> {
        if !f1.is_homogeneous_of(parity) || !f2.is_homogeneous_of(parity) {
            return Err(Error::NotHomogeneous("symbol"));
        }
        if k2 == 0 && !f2.is_zero() {
            return Err(Error::Invalid(
                "a grade-0 symbol has no second component".into(),
            ));
        }
        Ok(Self {
            f1,
            f2,
            k2,
            lambda,
            mu,
            parity,
        })
    }

    pub fn zero(k2: u32, lambda: Rational, mu: Rational) -> Self {
        Self {
            f1: SuperFunction::zero(),
            f2: SuperFunction::zero(),
            k2,
            lambda,
            mu,
            parity: Parity::Even,
        }
    }

    /// Parity of the operators with this principal symbol.
    pub fn operator_parity(&self) -> Parity {
        self.parity.plus(Parity::from_bit(self.k2 % 2 == 1))
    }

    pub fn is_zero(&self) -> bool {
        self.f1.is_zero() && self.f2.is_zero()
    }

    /// Contact order `k2 / 2`.
    pub fn grade(&self) -> Rational {
        q(self.k2 as i64, 2)
    }

    /// `δ = μ - λ`.
    pub fn delta(&self) -> Rational {
        &self.mu - &self.lambda
    }

    /// Density weight `δ - k` carried by both components.
    pub fn density_weight(&self) -> Rational {
        self.delta() - self.grade()
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        if self.k2 != other.k2 {
            return Err(Error::Invalid("adding symbols of different grades".into()));
        }
        Symbol::new(
            &self.f1 + &other.f1,
            &self.f2 + &other.f2,
            self.k2,
            self.lambda.clone(),
            self.mu.clone(),
        )
    }

    /// Head monomials `(e1, e2)` encoding a symbol at grade `k2`.
    ///
    /// Integer grades use `(∂x^k, ∂x^{k-1} D̄1 D̄2)`, half-integer grades
    /// `(∂x^k D̄1, ∂x^k D̄2)`. Grade 0 has no second slot.
    pub fn head_monos(k2: u32) -> (Mono, Option<Mono>) {
        if k2.is_multiple_of(2) {
            let k = k2 / 2;
            (Mono::new(k, 0, 0), (k >= 1).then(|| Mono::new(k - 1, 1, 1)))
        } else {
            let k = (k2 - 1) / 2;
            (Mono::new(k, 1, 0), Some(Mono::new(k, 0, 1)))
        }
    }

    /// `F1 e1 + F2 e2` with the head monomials of the grade.
    pub fn head_operator(&self) -> SuperDiffOp {
        let (e1, e2) = Self::head_monos(self.k2);
        let mut op = SuperDiffOp::zero(self.lambda.clone(), self.mu.clone());
        op.add_term(e1, &self.f1);
        if let Some(e2) = e2 {
            op.add_term(e2, &self.f2);
        }
        op
    }

    /// Action of `X_f`: componentwise `L^{δ-k}` in integer grades, with the
    /// `½ D̄1D̄2(f)` mixing term in half-integer grades.
    pub fn act(&self, h: &ContactHamiltonian) -> Symbol {
        let w = self.density_weight();
        let mut g1 = h.density_action(&w, &self.f1);
        let mut g2 = h.density_action(&w, &self.f2);
        if self.k2 % 2 == 1 {
            let mix = h.function().dbar(2).dbar(1).scale(&q(1, 2));
            g1 -= &(&mix * &self.f2);
            g2 += &(&mix * &self.f1);
        }
        Symbol {
            f1: g1,
            f2: g2,
            k2: self.k2,
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            parity: self.parity.plus(h.parity()),
        }
    }

    /// Largest x-degree over both components.
    pub fn degree(&self) -> u32 {
        self.f1.degree().max(self.f2.degree()).unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Symbol {
        Symbol {
            f1: self.f1.scale(c),
            f2: self.f2.scale(c),
            ..self.clone()
        }
    }
}

pub fn symbol_action(h: &ContactHamiltonian, s: &Symbol) -> Symbol {
    s.act(h)
}

pub fn grade(s: &Symbol) -> Rational {
    s.grade()
}

/// The symbol of `a` at doubled order `k2` (not necessarily its top order).
pub fn symbol_at(a: &SuperDiffOp, k2: u32) -> Result<Symbol> {
    let (e1, e2) = Symbol::head_monos(k2);
    let f1 = a.coeff(e1);
    let f2 = e2.map(|m| a.coeff(m)).unwrap_or_default();
    Symbol::new(f1, f2, k2, a.lambda.clone(), a.mu.clone())
}

/// Principal symbol at the operator's contact order. Fails only when the
/// head coefficients are not of a single parity.
pub fn principal_symbol(a: &SuperDiffOp) -> Result<Symbol> {
    symbol_at(a, a.contact_order().k2)
}

/// The grade decomposition `[S_{k2}, S_{k2-1}, ..., S_0]` of `a`.
pub fn symbol_tuple_of(a: &SuperDiffOp) -> Result<Vec<Symbol>> {
    let top = a.contact_order().k2;
    let mut rest = a.clone();
    let mut out = Vec::with_capacity(top as usize + 1);
    for k2 in (0..=top).rev() {
        let s = symbol_at(&rest, k2)?;
        rest = rest.sub(&s.head_operator());
        out.push(s);
    }
    debug_assert!(rest.is_zero());
    Ok(out)
}

/// Inverse of [`symbol_tuple_of`]: sums the head operators.
pub fn assemble_heads(symbols: &[Symbol], lambda: &Rational, mu: &Rational) -> SuperDiffOp {
    let mut op = SuperDiffOp::zero(lambda.clone(), mu.clone());
    for s in symbols {
        op.add_assign(&s.head_operator());
    }
    op
}

/// `ξ`-sign convention helper: `D̄1 D̄2 (f)`.
pub fn dbar12(f: &SuperFunction) -> SuperFunction {
    f.dbar(2).dbar(1)
}
