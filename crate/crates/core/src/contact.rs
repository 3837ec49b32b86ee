//! Contact vector fields `X_f`, the density modules `F_λ` and the action on operators.

use num_traits::One;

use crate::diffop::{Mono, SuperDiffOp};
use crate::error::{Error, Result};
use crate::grassmann::{Parity, Sector, SuperFunction};
use crate::rational::{q, sign, Rational};

/// A parity-homogeneous contact Hamiltonian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactHamiltonian {
    f: SuperFunction,
    parity: Parity,
}

impl ContactHamiltonian {
    pub fn new(f: SuperFunction) -> Result<Self> {
        let parity = f
            .parity()
            .ok_or(Error::NotHomogeneous("contact Hamiltonian"))?;
        Ok(Self { f, parity })
    }

    pub fn function(&self) -> &SuperFunction {
        &self.f
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `X_f = f ∂x - (-1)^{p(f)} ½ (D̄1(f) D̄1 + D̄2(f) D̄2)`.
    pub fn contact_field(&self) -> SuperDiffOp {
        let half = sign(!self.parity.is_odd()) * q(1, 2);
        SuperDiffOp::from_terms(
            [
                (Mono::new(1, 0, 0), self.f.clone()),
                (Mono::new(0, 1, 0), self.f.dbar(1).scale(&half)),
                (Mono::new(0, 0, 1), self.f.dbar(2).scale(&half)),
            ],
            Rational::default(),
            Rational::default(),
        )
    }

    /// `L^ν_{X_f} = X_f + ν f'` as an operator `F_ν → F_ν`.
    pub fn lie_derivative(&self, nu: &Rational) -> SuperDiffOp {
        let mut op = self.contact_field().with_weights(nu.clone(), nu.clone());
        op.add_term(Mono::ID, &self.f.ddx().scale(nu));
        op
    }

    /// `L^λ_{X_f}(φ)` on a `λ`-density.
    pub fn density_action(&self, lambda: &Rational, phi: &SuperFunction) -> SuperFunction {
        &self.contact_field().apply(phi) + &(&self.f.ddx().scale(lambda) * phi)
    }

    /// `ℒ(A) = L^μ ∘ A - (-1)^{p(f)p(A)} A ∘ L^λ`.
    pub fn operator_action(&self, a: &SuperDiffOp) -> Result<SuperDiffOp> {
        let pa = a.parity().ok_or(Error::NotHomogeneous("operator"))?;
        Ok(self.operator_action_with_parity(a, pa))
    }

    /// As [`Self::operator_action`], with the operator parity supplied by the caller.
    pub fn operator_action_with_parity(&self, a: &SuperDiffOp, pa: Parity) -> SuperDiffOp {
        let left = self
            .lie_derivative(&a.mu)
            .compose(a)
            .expect("weights chain");
        let right = a
            .compose(&self.lie_derivative(&a.lambda))
            .expect("weights chain");
        let s = sign(self.parity.is_odd() && pa.is_odd());
        left.sub(&right.scale(&s))
    }
}

/// Super-commutator `A∘B - (-1)^{p(A)p(B)} B∘A` of homogeneous operators.
pub fn supercommutator(a: &SuperDiffOp, b: &SuperDiffOp) -> Result<SuperDiffOp> {
    let pa = a.parity().ok_or(Error::NotHomogeneous("operator"))?;
    let pb = b.parity().ok_or(Error::NotHomogeneous("operator"))?;
    let ab = a.compose(b)?;
    let ba = b.compose(a)?;
    Ok(ab.sub(&ba.scale(&sign(pa.is_odd() && pb.is_odd()))))
}

/// Recovers `h` with `X_h = v`.
pub fn contact_hamiltonian_of(v: &SuperDiffOp) -> Result<ContactHamiltonian> {
    let allowed = [Mono::new(1, 0, 0), Mono::new(0, 1, 0), Mono::new(0, 0, 1)];
    if let Some((m, _)) = v.terms().find(|(m, _)| !allowed.contains(m)) {
        return Err(Error::NotContactField(format!(
            "term ∂x^{} D̄1^{} D̄2^{} is not first order without constant part",
            m.l, m.m, m.n
        )));
    }
    // The ∂x coefficient determines f; the D̄ coefficients must then match.
    let f = v.coeff(Mono::new(1, 0, 0));
    let (even, odd) = f.parity_split();
    let mut rebuilt = SuperDiffOp::zero_unweighted();
    for part in [even, odd] {
        rebuilt.add_assign(&ContactHamiltonian::new(part)?.contact_field());
    }
    let unweighted = v
        .clone()
        .with_weights(Rational::default(), Rational::default());
    if rebuilt != unweighted {
        return Err(Error::NotContactField(format!(
            "D̄ coefficients do not match X_f for f = {}",
            crate::format::function_to_text(&f)
        )));
    }
    ContactHamiltonian::new(f)
        .map_err(|_| Error::NotContactField("Hamiltonian is not parity-homogeneous".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisName {
    Osp,
    Aff,
    X2,
}

impl BasisName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "osp" => Ok(BasisName::Osp),
            "aff" => Ok(BasisName::Aff),
            "x2" => Ok(BasisName::X2),
            other => Err(Error::Invalid(format!("unknown generator set `{other}`"))),
        }
    }

    pub fn basis(self) -> GeneratorBasis {
        match self {
            BasisName::Osp => osp_basis(),
            BasisName::Aff => aff_basis(),
            BasisName::X2 => GeneratorBasis {
                hamiltonians: vec![hamiltonian(SuperFunction::monomial(
                    Sector::One,
                    2,
                    Rational::one(),
                ))],
            },
        }
    }
}

/// Ordered list of contact Hamiltonians.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorBasis {
    pub hamiltonians: Vec<ContactHamiltonian>,
}

impl GeneratorBasis {
    pub fn len(&self) -> usize {
        self.hamiltonians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hamiltonians.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ContactHamiltonian> {
        self.hamiltonians.iter()
    }
}

fn hamiltonian(f: SuperFunction) -> ContactHamiltonian {
    ContactHamiltonian::new(f).expect("basis element is homogeneous")
}

/// `{1, ξ1, ξ2, x, ξ1ξ2, xξ1, xξ2, x²}`.
pub fn osp_basis() -> GeneratorBasis {
    let one = Rational::one();
    let fs = [
        SuperFunction::one(),
        SuperFunction::xi1(),
        SuperFunction::xi2(),
        SuperFunction::x(),
        SuperFunction::xi12(),
        SuperFunction::monomial(Sector::Xi1, 1, one.clone()),
        SuperFunction::monomial(Sector::Xi2, 1, one.clone()),
        SuperFunction::monomial(Sector::One, 2, one),
    ];
    GeneratorBasis {
        hamiltonians: fs.into_iter().map(hamiltonian).collect(),
    }
}

/// `{1, ξ1, ξ2, x, ξ1ξ2}`.
pub fn aff_basis() -> GeneratorBasis {
    let mut b = osp_basis();
    b.hamiltonians.truncate(5);
    b
}

/// Structure constants `c[i][j][k]` with `[X_{f_i}, X_{f_j}] = Σ_k c[i][j][k] X_{f_k}`, computed
/// from the contact fields. Fails if a bracket leaves the span of the basis.
pub fn structure_constants(basis: &GeneratorBasis) -> Result<Vec<Vec<Vec<Rational>>>> {
    let fields: Vec<_> = basis.iter().map(|h| h.contact_field()).collect();
    let leading: Vec<(Sector, u32, Rational)> = basis
        .iter()
        .map(|h| {
            let (s, d, c) = h.function().terms().next().expect("nonzero Hamiltonian");
            (s, d, c.clone())
        })
        .collect();
    let mut table = vec![vec![vec![Rational::default(); basis.len()]; basis.len()]; basis.len()];
    for (i, a) in fields.iter().enumerate() {
        for (j, b) in fields.iter().enumerate() {
            let bracket = supercommutator(a, b)?;
            if bracket.is_zero() {
                continue;
            }
            let mut rest = contact_hamiltonian_of(&bracket)?.function().clone();
            for (k, (s, d, c)) in leading.iter().enumerate() {
                let ck = rest.component(*s).coeff(*d) / c;
                if ck != Rational::default() {
                    rest = &rest - &basis.hamiltonians[k].function().scale(&ck);
                    table[i][j][k] = ck;
                }
            }
            if !rest.is_zero() {
                return Err(Error::NotContactField(format!(
                    "bracket of generators {i} and {j} leaves the basis span"
                )));
            }
        }
    }
    Ok(table)
}
