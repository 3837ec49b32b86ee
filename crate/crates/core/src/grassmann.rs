//! Polynomial superfunctions on S^{1|2}.
//!
//! An element is `f0 + ξ1 f1 + ξ2 f2 + ξ1ξ2 f12` with polynomial components in `x`.
//! The odd derivatives `∂ξi` act from the left, so `∂ξ1(ξ1ξ2) = ξ2` and
//! `∂ξ2(ξ1ξ2) = -ξ1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::rational::{qi, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Self {
        Parity::from_bit(!self.is_odd())
    }

    /// Parity of a product / composite.
    pub fn plus(self, other: Parity) -> Self {
        Parity::from_bit(self.is_odd() ^ other.is_odd())
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Univariate polynomial in `x`, stored sparsely with no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<u32, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(degree: u32, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(degree, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        let mut p = Self::zero();
        for (d, c) in terms {
            p.add_term(d, c);
        }
        p
    }

    pub fn add_term(&mut self, degree: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(degree) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, degree: u32) -> Rational {
        self.terms
            .get(&degree)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `(degree, coeff)` pairs with ascending degree.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(d, c)| (*d, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(d, v)| (*d, v * c)).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(d, _)| **d > 0)
                .map(|(d, c)| (d - 1, c * qi(*d as i64))),
        )
    }

    pub fn nth_derivative(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (d, c) in rhs.terms() {
            self.add_term(d, c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (d, c) in rhs.terms() {
            self.add_term(d, -c.clone());
        }
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (da, ca) in self.terms() {
            for (db, cb) in rhs.terms() {
                out.add_term(da + db, ca * cb);
            }
        }
        out
    }
}

/// Index of a Grassmann sector in the fixed layout `(1, ξ1, ξ2, ξ1ξ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    One = 0,
    Xi1 = 1,
    Xi2 = 2,
    Xi12 = 3,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::One, Sector::Xi1, Sector::Xi2, Sector::Xi12];

    pub fn parity(self) -> Parity {
        match self {
            Sector::One | Sector::Xi12 => Parity::Even,
            Sector::Xi1 | Sector::Xi2 => Parity::Odd,
        }
    }

    pub fn of_parity(p: Parity) -> [Sector; 2] {
        match p {
            Parity::Even => [Sector::One, Sector::Xi12],
            Parity::Odd => [Sector::Xi1, Sector::Xi2],
        }
    }
}

/// `f0 + ξ1 f1 + ξ2 f2 + ξ1ξ2 f12`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SuperFunction {
    comps: [Poly; 4],
}

impl SuperFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(Sector::One, 0, c)
    }

    pub fn new(f0: Poly, f1: Poly, f2: Poly, f12: Poly) -> Self {
        Self {
            comps: [f0, f1, f2, f12],
        }
    }

    /// `c · x^degree · sector`.
    pub fn monomial(sector: Sector, degree: u32, c: Rational) -> Self {
        let mut f = Self::zero();
        f.comps[sector as usize] = Poly::monomial(degree, c);
        f
    }

    pub fn x() -> Self {
        Self::monomial(Sector::One, 1, Rational::one())
    }

    pub fn xi1() -> Self {
        Self::monomial(Sector::Xi1, 0, Rational::one())
    }

    pub fn xi2() -> Self {
        Self::monomial(Sector::Xi2, 0, Rational::one())
    }

    pub fn xi12() -> Self {
        Self::monomial(Sector::Xi12, 0, Rational::one())
    }

    pub fn component(&self, s: Sector) -> &Poly {
        &self.comps[s as usize]
    }

    pub fn component_mut(&mut self, s: Sector) -> &mut Poly {
        &mut self.comps[s as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// `Some(p)` when the function is homogeneous of parity `p`; zero reports `Even`.
    pub fn parity(&self) -> Option<Parity> {
        let even = !self.comps[0].is_zero() || !self.comps[3].is_zero();
        let odd = !self.comps[1].is_zero() || !self.comps[2].is_zero();
        match (even, odd) {
            (true, true) => None,
            (false, true) => Some(Parity::Odd),
            _ => Some(Parity::Even),
        }
    }

    pub fn is_homogeneous_of(&self, p: Parity) -> bool {
        self.is_zero() || self.parity() == Some(p)
    }

    /// Largest x-degree over all components.
    pub fn degree(&self) -> Option<u32> {
        self.comps.iter().filter_map(Poly::degree).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            comps: self.comps.clone().map(|p| p.scale(c)),
        }
    }

    /// Splits into `(even, odd)` sectors.
    pub fn parity_split(&self) -> (SuperFunction, SuperFunction) {
        let [f0, f1, f2, f12] = self.comps.clone();
        (
            SuperFunction::new(f0, Poly::zero(), Poly::zero(), f12),
            SuperFunction::new(Poly::zero(), f1, f2, Poly::zero()),
        )
    }

    /// Grade involution: negates the odd sectors.
    pub fn grade_involution(&self) -> Self {
        let [f0, f1, f2, f12] = &self.comps;
        SuperFunction::new(f0.clone(), -f1, -f2, f12.clone())
    }

    /// `∂x`, componentwise.
    pub fn ddx(&self) -> Self {
        Self {
            comps: self.comps.clone().map(|p| p.derivative()),
        }
    }

    pub fn ddx_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |f, _| f.ddx())
    }

    /// `D̄i = ∂ξi - ξi ∂x`.
    pub fn dbar(&self, i: u8) -> Self {
        self.odd_derivation(i, false)
    }

    /// `Di = ∂ξi + ξi ∂x`.
    pub fn dplus(&self, i: u8) -> Self {
        self.odd_derivation(i, true)
    }

    fn odd_derivation(&self, i: u8, plus: bool) -> Self {
        let [f0, f1, f2, f12] = &self.comps;
        let d0 = f0.derivative();
        let s = |p: Poly| if plus { p } else { -&p };
        match i {
            // ∂ξ1 f = f1 + ξ2 f12,  ξ1 ∂x f = ξ1 f0' + ξ1ξ2 f2'
            1 => SuperFunction::new(f1.clone(), s(d0), f12.clone(), s(f2.derivative())),
            // ∂ξ2 f = f2 - ξ1 f12,  ξ2 ∂x f = ξ2 f0' - ξ1ξ2 f1'
            2 => SuperFunction::new(f2.clone(), -f12, s(d0), s(-&f1.derivative())),
            _ => panic!("odd derivation index must be 1 or 2, got {i}"),
        }
    }

    /// Iterates `(sector, degree, coeff)` over nonzero terms, sectors in layout order.
    pub fn terms(&self) -> impl Iterator<Item = (Sector, u32, &Rational)> {
        Sector::ALL
            .into_iter()
            .flat_map(move |s| self.comps[s as usize].terms().map(move |(d, c)| (s, d, c)))
    }
}

impl Add<&SuperFunction> for &SuperFunction {
    type Output = SuperFunction;
    fn add(self, rhs: &SuperFunction) -> SuperFunction {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&SuperFunction> for SuperFunction {
    fn add_assign(&mut self, rhs: &SuperFunction) {
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a += b;
        }
    }
}

impl SubAssign<&SuperFunction> for SuperFunction {
    fn sub_assign(&mut self, rhs: &SuperFunction) {
        for (a, b) in self.comps.iter_mut().zip(&rhs.comps) {
            *a -= b;
        }
    }
}

impl Sub<&SuperFunction> for &SuperFunction {
    type Output = SuperFunction;
    fn sub(self, rhs: &SuperFunction) -> SuperFunction {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &SuperFunction {
    type Output = SuperFunction;
    fn neg(self) -> SuperFunction {
        self.scale(&-Rational::one())
    }
}

impl Mul<&SuperFunction> for &SuperFunction {
    type Output = SuperFunction;
    fn mul(self, rhs: &SuperFunction) -> SuperFunction {
        let [a0, a1, a2, a12] = &self.comps;
        let [b0, b1, b2, b12] = &rhs.comps;
        let mut c12 = a0 * b12;
        c12 += &(a12 * b0);
        c12 += &(a1 * b2);
        c12 -= &(a2 * b1);
        SuperFunction::new(
            a0 * b0,
            &(a0 * b1) + &(a1 * b0),
            &(a0 * b2) + &(a2 * b0),
            c12,
        )
    }
}

/// Free-function form of the supercommutative product.
pub fn mul(f: &SuperFunction, g: &SuperFunction) -> SuperFunction {
    f * g
}
