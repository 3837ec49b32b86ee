//! The osp(2|2)-equivariant quantization map.
//!
//! Two independent constructions live here. [`quantize_closed`] contracts the divergence
//! operators with binomial coefficients. [`quantize_oracle`] solves the equivariance
//! constraints on a constant-coefficient ansatz; its certified-unique solution is the
//! reference against which the closed formula is compared term by term.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::{BasisName, ContactHamiltonian, GeneratorBasis};
use crate::diffop::{Mono, SuperDiffOp};
use crate::divergence::{div_row, div_terms, divergence_term, DivTermSpec};
use crate::error::{Error, Result};
use crate::format::parse_parity;
use crate::grassmann::{Parity, Sector, SuperFunction};
use crate::linsolve::{same_solution_set, solve, SolveOutcome, SparseRow};
use crate::rational::{format_rational, gbinom, parse_rational, q, qi, sign, Rational};
use crate::symbol::{symbol_at, Symbol};

/// Extra probe degree on top of `2·k2`.
///
/// Both sides of `ℒ_h(Q(S)) = Q(h·S)` are linear differential expressions in `F` of
/// x-order at most `k2 + 2` with polynomial coefficients. Such an expression vanishes on
/// all polynomials once it vanishes on `1, x, ..., x^N` with `N` its order, so probing up
/// to `2·k2 + 4` leaves a comfortable margin.
pub const PROBE_DEGREE_SLACK: u32 = 4;

pub fn default_probe_degree(k2: u32) -> u32 {
    2 * k2 + PROBE_DEGREE_SLACK
}

/// `C_{m,i}`: `m` is the doubled contact order of the derivative falling on `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffIndex {
    pub m: u32,
    pub i: u8,
}

impl std::fmt::Display for CoeffIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "C_{{{},{}}}", self.m, self.i)
    }
}

/// One ansatz summand `C · source(F_component) · tail`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermShape {
    pub index: CoeffIndex,
    pub component: u8,
    pub source: Mono,
    pub tail: Mono,
}

impl TermShape {
    pub fn key(&self) -> TermKey {
        TermKey {
            component: self.component,
            source: self.source,
            tail: self.tail,
        }
    }

    /// `source(F_component) · tail` with the weights of `s`.
    pub fn instantiate(&self, s: &Symbol) -> SuperDiffOp {
        let f = if self.component == 1 { &s.f1 } else { &s.f2 };
        let mut op = SuperDiffOp::zero(s.lambda.clone(), s.mu.clone());
        op.add_term(self.tail, &self.source.apply(f));
        op
    }
}

/// Structural identity of a summand, independent of how the ansatz names it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub component: u8,
    pub source: Mono,
    pub tail: Mono,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzShape {
    /// The four-line constant-coefficient forms with indices `C_{m,i}`, `i = 1..4`.
    Reduced,
    /// Every grading-compatible summand `P(F_c) · T` with `P` of positive order.
    General,
}

impl AnsatzShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(Self::Reduced),
            "general" => Ok(Self::General),
            other => Err(Error::Invalid(format!(
                "unknown ansatz shape `{other}` (expected reduced|general)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Reduced => "reduced",
            Self::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ansatz {
    pub k2: u32,
    pub lambda: Rational,
    pub mu: Rational,
    pub parity: Parity,
    pub shape: AnsatzShape,
    pub terms: Vec<TermShape>,
}

impl Ansatz {
    pub fn unknowns(&self) -> Vec<CoeffIndex> {
        self.terms.iter().map(|t| t.index).collect()
    }

    /// Head plus `Σ C_j · term_j(S)` with the given coefficients.
    pub fn instantiate(&self, s: &Symbol, coeffs: &BTreeMap<CoeffIndex, Rational>) -> SuperDiffOp {
        let mut op = s.head_operator();
        for t in &self.terms {
            if let Some(c) = coeffs.get(&t.index) {
                if !c.is_zero() {
                    op.add_assign(&t.instantiate(s).scale(c));
                }
            }
        }
        op
    }
}

fn mono_opt(l: i64, m: u8, n: u8) -> Option<Mono> {
    (l >= 0).then(|| Mono::new(l as u32, m, n))
}

/// The (at most two) monomials of doubled contact order `k2`.
pub fn monos_of_order(k2: u32) -> Vec<Mono> {
    let k = k2 / 2;
    if k2.is_multiple_of(2) {
        let mut v = vec![Mono::new(k, 0, 0)];
        if k >= 1 {
            v.push(Mono::new(k - 1, 1, 1));
        }
        v
    } else {
        vec![Mono::new(k, 1, 0), Mono::new(k, 0, 1)]
    }
}

fn reduced_terms(k2: u32) -> Vec<TermShape> {
    let k = (k2 / 2) as i64;
    let mut out = Vec::new();
    let mut push = |m: i64, i: u8, component: u8, source: Option<Mono>, tail: Option<Mono>| {
        if let (Some(source), Some(tail)) = (source, tail) {
            out.push(TermShape {
                index: CoeffIndex { m: m as u32, i },
                component,
                source,
                tail,
            });
        }
    };
    if k2.is_multiple_of(2) {
        for l in 0..=k {
            if l < k {
                let m = 2 * l + 1;
                push(m, 1, 1, mono_opt(l, 1, 0), mono_opt(k - l - 1, 1, 0));
                push(m, 2, 2, mono_opt(l, 0, 1), mono_opt(k - l - 1, 1, 0));
                push(m, 3, 1, mono_opt(l, 0, 1), mono_opt(k - l - 1, 0, 1));
                push(m, 4, 2, mono_opt(l, 1, 0), mono_opt(k - l - 1, 0, 1));
            }
            if l < k {
                let l = l + 1;
                let m = 2 * l;
                push(m, 1, 1, mono_opt(l, 0, 0), mono_opt(k - l, 0, 0));
                push(m, 2, 2, mono_opt(l - 1, 1, 1), mono_opt(k - l, 0, 0));
                push(m, 3, 1, mono_opt(l - 1, 1, 1), mono_opt(k - l - 1, 1, 1));
                push(m, 4, 2, mono_opt(l, 0, 0), mono_opt(k - l - 1, 1, 1));
            }
        }
    } else {
        for l in 0..=k {
            let m = 2 * l + 1;
            push(m, 1, 1, mono_opt(l, 1, 0), mono_opt(k - l, 0, 0));
            push(m, 2, 2, mono_opt(l, 0, 1), mono_opt(k - l, 0, 0));
            push(m, 3, 1, mono_opt(l, 0, 1), mono_opt(k - l - 1, 1, 1));
            push(m, 4, 2, mono_opt(l, 1, 0), mono_opt(k - l - 1, 1, 1));
            if l < k {
                let l = l + 1;
                let m = 2 * l;
                push(m, 1, 1, mono_opt(l, 0, 0), mono_opt(k - l, 1, 0));
                push(m, 2, 2, mono_opt(l - 1, 1, 1), mono_opt(k - l, 1, 0));
                push(m, 3, 1, mono_opt(l - 1, 1, 1), mono_opt(k - l, 0, 1));
                push(m, 4, 2, mono_opt(l, 0, 0), mono_opt(k - l, 0, 1));
            }
        }
    }
    out
}

fn general_terms(k2: u32) -> Vec<TermShape> {
    let mut out = Vec::new();
    for s in 1..=k2 {
        let mut i = 0u8;
        for component in [1u8, 2] {
            for &source in &monos_of_order(s) {
                for &tail in &monos_of_order(k2 - s) {
                    i += 1;
                    out.push(TermShape {
                        index: CoeffIndex { m: s, i },
                        component,
                        source,
                        tail,
                    });
                }
            }
        }
    }
    out
}

/// The constant-coefficient, grading-compatible ansatz with unit head coefficients.
pub fn build_ansatz(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
    shape: AnsatzShape,
) -> Ansatz {
    let terms = match shape {
        AnsatzShape::Reduced => reduced_terms(k2),
        AnsatzShape::General => general_terms(k2),
    };
    Ansatz {
        k2,
        lambda: lambda.clone(),
        mu: mu.clone(),
        parity,
        shape,
        terms,
    }
}

/// Unknown `C_{m,i}` of the table for symbols of the given parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unknown {
    pub parity: Parity,
    pub index: CoeffIndex,
}

impl std::fmt::Display for Unknown {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.index, self.parity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub k2: u32,
    pub lambda: Rational,
    pub mu: Rational,
    pub shape: AnsatzShape,
    /// Parities whose tables the system determines.
    pub parities: Vec<Parity>,
    pub unknowns: Vec<Unknown>,
    pub rows: Vec<SparseRow>,
}

impl LinearSystem {
    pub fn nontrivial_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_trivial()).count()
    }

    pub fn solve(&self) -> SolveOutcome {
        solve(self.unknowns.len(), &self.rows)
    }
}

/// Monomial probe symbols `x^a · s` in one component, `a ≤ degree`.
pub fn probe_symbols(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
    degree: u32,
) -> Vec<Symbol> {
    let components: &[u8] = if k2 == 0 { &[1] } else { &[1, 2] };
    let mut out = Vec::new();
    for &c in components {
        for sector in Sector::of_parity(parity) {
            for a in 0..=degree {
                let f = SuperFunction::monomial(sector, a, Rational::one());
                let (f1, f2) = if c == 1 {
                    (f, SuperFunction::zero())
                } else {
                    (SuperFunction::zero(), f)
                };
                out.push(
                    Symbol::with_parity(f1, f2, k2, lambda.clone(), mu.clone(), parity)
                        .expect("homogeneous probe"),
                );
            }
        }
    }
    out
}

fn describe_probe(s: &Symbol) -> String {
    let (c, f) = if s.f1.is_zero() {
        (2, &s.f2)
    } else {
        (1, &s.f1)
    };
    format!("F{c} = {}", crate::format::function_to_text(f))
}

/// `ℒ_h(Q(S)) - Q(h·S)` as coefficient-match rows in the unknowns.
fn probe_rows(
    ansatz: &Ansatz,
    index_of: &HashMap<Unknown, usize>,
    h: &ContactHamiltonian,
    s: &Symbol,
) -> Vec<SparseRow> {
    let pa = s.operator_parity();
    let hs = s.act(h);
    let mut parts: Vec<(Option<usize>, SuperDiffOp)> = Vec::new();
    parts.push((
        None,
        h.operator_action_with_parity(&s.head_operator(), pa)
            .sub(&hs.head_operator()),
    ));
    for t in &ansatz.terms {
        let here = Unknown {
            parity: s.parity,
            index: t.index,
        };
        let there = Unknown {
            parity: hs.parity,
            index: t.index,
        };
        let a = t.instantiate(s);
        if !a.is_zero() {
            if let Some(&u) = index_of.get(&here) {
                parts.push((Some(u), h.operator_action_with_parity(&a, pa)));
            }
        }
        let b = t.instantiate(&hs);
        if !b.is_zero() {
            if let Some(&u) = index_of.get(&there) {
                parts.push((Some(u), b.scale(&-Rational::one())));
            }
        }
    }
    let mut rows: BTreeMap<(Mono, Sector, u32), (BTreeMap<usize, Rational>, Rational)> =
        BTreeMap::new();
    for (u, op) in parts {
        for (mono, coeff) in op.terms() {
            for (sector, deg, c) in coeff.terms() {
                let entry = rows.entry((mono, sector, deg)).or_default();
                match u {
                    None => entry.1 -= c,
                    Some(u) => {
                        let slot = entry.0.entry(u).or_insert_with(Rational::zero);
                        *slot += c;
                    }
                }
            }
        }
    }
    let h_text = crate::format::function_to_text(h.function());
    rows.into_iter()
        .filter_map(|((mono, sector, deg), (mut coeffs, rhs))| {
            coeffs.retain(|_, c| !c.is_zero());
            let row = SparseRow {
                coeffs,
                rhs,
                origin: format!(
                    "h = {h_text}, {}: x^{deg} {:?} coefficient of dx^{} Db1^{} Db2^{}",
                    describe_probe(s),
                    sector,
                    mono.l,
                    mono.m,
                    mono.n
                ),
            };
            (!row.is_trivial()).then_some(row)
        })
        .collect()
}

/// Equivariance constraints of `ansatz` under every generator, on monomial probes.
///
/// With only even generators the unknowns are the ansatz parity's table; an odd
/// generator maps symbols of one parity to the other, so both tables become unknowns.
pub fn equivariance_system(
    ansatz: &Ansatz,
    generators: &GeneratorBasis,
    probe_degree: u32,
) -> LinearSystem {
    let joint = generators.iter().any(|h| h.parity().is_odd());
    let parities = if joint {
        vec![Parity::Even, Parity::Odd]
    } else {
        vec![ansatz.parity]
    };
    let unknowns: Vec<Unknown> = parities
        .iter()
        .flat_map(|&parity| {
            ansatz.terms.iter().map(move |t| Unknown {
                parity,
                index: t.index,
            })
        })
        .collect();
    let index_of: HashMap<Unknown, usize> =
        unknowns.iter().enumerate().map(|(j, u)| (*u, j)).collect();
    let mut jobs = Vec::new();
    for h in generators.iter() {
        for &p in &parities {
            for s in probe_symbols(ansatz.k2, &ansatz.lambda, &ansatz.mu, p, probe_degree) {
                jobs.push((h, s));
            }
        }
    }
    let rows: Vec<SparseRow> = jobs
        .par_iter()
        .map(|(h, s)| probe_rows(ansatz, &index_of, h, s))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    LinearSystem {
        k2: ansatz.k2,
        lambda: ansatz.lambda.clone(),
        mu: ansatz.mu.clone(),
        shape: ansatz.shape,
        parities,
        unknowns,
        rows,
    }
}

/// Solved `C_{m,i}` for symbols of one parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    pub k2: u32,
    pub lambda: Rational,
    pub mu: Rational,
    pub parity: Parity,
    pub shape: AnsatzShape,
    pub entries: BTreeMap<CoeffIndex, Rational>,
}

impl CoefficientTable {
    pub fn get(&self, m: u32, i: u8) -> Option<&Rational> {
        self.entries.get(&CoeffIndex { m, i })
    }

    pub fn ansatz(&self) -> Ansatz {
        build_ansatz(self.k2, &self.lambda, &self.mu, self.parity, self.shape)
    }

    /// Instantiates the ansatz on `s`, which must match the table's grade, weights and parity.
    pub fn apply(&self, s: &Symbol) -> Result<SuperDiffOp> {
        if s.k2 != self.k2 || s.lambda != self.lambda || s.mu != self.mu {
            return Err(Error::Invalid(format!(
                "table for k2 = {}, weights ({}, {}) applied to a symbol with k2 = {}, weights ({}, {})",
                self.k2,
                format_rational(&self.lambda),
                format_rational(&self.mu),
                s.k2,
                format_rational(&s.lambda),
                format_rational(&s.mu)
            )));
        }
        if s.parity != self.parity && !s.is_zero() {
            return Err(Error::Invalid(format!(
                "{} table applied to an {} symbol",
                self.parity, s.parity
            )));
        }
        Ok(self.ansatz().instantiate(s, &self.entries))
    }

    /// Coefficient of every summand, heads included.
    pub fn term_map(&self) -> BTreeMap<TermKey, Rational> {
        let mut out = head_term_map(self.k2);
        for t in self.ansatz().terms {
            if let Some(c) = self.entries.get(&t.index) {
                if !c.is_zero() {
                    *out.entry(t.key()).or_insert_with(Rational::zero) += c;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// One `C_{m,i} = value` line per entry, joined by `\\`.
    pub fn to_latex(&self) -> String {
        self.entries
            .iter()
            .map(|(ix, v)| {
                format!(
                    "C_{{{},{}}} = {}",
                    ix.m,
                    ix.i,
                    crate::format::latex_rational(v)
                )
            })
            .collect::<Vec<_>>()
            .join(" \\\\\n")
    }

    pub fn to_json(&self) -> CoefficientTableJson {
        CoefficientTableJson {
            k2: self.k2,
            lambda: format_rational(&self.lambda),
            mu: format_rational(&self.mu),
            parity: self.parity.name().to_string(),
            shape: self.shape.name().to_string(),
            entries: self
                .entries
                .iter()
                .map(|(ix, v)| CoeffEntryJson {
                    m: ix.m,
                    i: ix.i,
                    value: format_rational(v),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CoefficientTableJson) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for e in &j.entries {
            entries.insert(CoeffIndex { m: e.m, i: e.i }, parse_rational(&e.value)?);
        }
        Ok(Self {
            k2: j.k2,
            lambda: parse_rational(&j.lambda)?,
            mu: parse_rational(&j.mu)?,
            parity: parse_parity(&j.parity)?,
            shape: AnsatzShape::parse(&j.shape)?,
            entries,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffEntryJson {
    pub m: u32,
    pub i: u8,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientTableJson {
    pub k2: u32,
    pub lambda: String,
    pub mu: String,
    pub parity: String,
    pub shape: String,
    pub entries: Vec<CoeffEntryJson>,
}

fn head_term_map(k2: u32) -> BTreeMap<TermKey, Rational> {
    let (e1, e2) = Symbol::head_monos(k2);
    let mut out = BTreeMap::new();
    out.insert(
        TermKey {
            component: 1,
            source: Mono::ID,
            tail: e1,
        },
        Rational::one(),
    );
    if let Some(e2) = e2 {
        out.insert(
            TermKey {
                component: 2,
                source: Mono::ID,
                tail: e2,
            },
            Rational::one(),
        );
    }
    out
}

/// `μ - λ` as text, with the exclusion list spelled out.
fn resonance_message(k2: u32, lambda: &Rational, mu: &Rational, detail: &str) -> String {
    format!(
        "k2 = {k2}, mu - lambda = {}: {detail}; the equivariant quantization is unique only for \
         mu - lambda outside {{0, 1/2, 1, 3/2, 2, ...}}",
        format_rational(&(mu - lambda))
    )
}

/// Exact solve with uniqueness certification; one table per parity in the system.
pub fn solve_coefficients(sys: &LinearSystem) -> Result<Vec<CoefficientTable>> {
    match sys.solve() {
        SolveOutcome::Unique(x) => Ok(sys
            .parities
            .iter()
            .copied()
            .map(|parity| CoefficientTable {
                k2: sys.k2,
                lambda: sys.lambda.clone(),
                mu: sys.mu.clone(),
                parity,
                shape: sys.shape,
                entries: sys
                    .unknowns
                    .iter()
                    .zip(&x)
                    .filter(|(u, _)| u.parity == parity)
                    .map(|(u, v)| (u.index, v.clone()))
                    .collect(),
            })
            .collect()),
        SolveOutcome::NonUnique { rank, free, .. } => {
            let names: Vec<String> = free.iter().map(|&j| sys.unknowns[j].to_string()).collect();
            Err(Error::Resonant(resonance_message(
                sys.k2,
                &sys.lambda,
                &sys.mu,
                &format!(
                    "non-unique, rank {rank} of {} unknowns, nullity {} (free: {})",
                    sys.unknowns.len(),
                    free.len(),
                    names.join(", ")
                ),
            )))
        }
        SolveOutcome::Inconsistent { origin } => Err(Error::Resonant(resonance_message(
            sys.k2,
            &sys.lambda,
            &sys.mu,
            &format!("inconsistent at row [{origin}]"),
        ))),
    }
}

/// A weight pair for which the theorem's exclusion list applies: `2(μ-λ)` a
/// non-negative integer.
pub fn excluded_by_theorem(lambda: &Rational, mu: &Rational) -> bool {
    let two_delta = (mu - lambda) * qi(2);
    two_delta.is_integer() && !two_delta.is_negative()
}

/// Conservative flag: `2(μ-λ) ∈ ℤ ∩ [0, 2·k2]`. Flagged weights are not rejected; the
/// solver decides, see [`Quantizer::table`].
pub fn resonance_suspect(k2: u32, lambda: &Rational, mu: &Rational) -> bool {
    excluded_by_theorem(lambda, mu) && (mu - lambda) * qi(2) <= qi(2 * k2 as i64)
}

/// How the oracle tables are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizerConfig {
    pub shape: AnsatzShape,
    pub generators: BasisName,
    /// `None` uses [`default_probe_degree`].
    pub probe_degree: Option<u32>,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            shape: AnsatzShape::Reduced,
            generators: BasisName::X2,
            probe_degree: None,
        }
    }
}

type TableKey = (u32, Rational, Rational, Parity);

/// Solves and caches coefficient tables.
#[derive(Debug, Default)]
pub struct Quantizer {
    pub config: QuantizerConfig,
    cache: Mutex<HashMap<TableKey, Arc<CoefficientTable>>>,
}

impl Quantizer {
    pub fn new(config: QuantizerConfig) -> Self {
        Self {
            config,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn probe_degree(&self, k2: u32) -> u32 {
        self.config
            .probe_degree
            .unwrap_or_else(|| default_probe_degree(k2))
    }

    pub fn system(
        &self,
        k2: u32,
        lambda: &Rational,
        mu: &Rational,
        parity: Parity,
    ) -> LinearSystem {
        let ansatz = build_ansatz(k2, lambda, mu, parity, self.config.shape);
        equivariance_system(
            &ansatz,
            &self.config.generators.basis(),
            self.probe_degree(k2),
        )
    }

    pub fn table(
        &self,
        k2: u32,
        lambda: &Rational,
        mu: &Rational,
        parity: Parity,
    ) -> Result<Arc<CoefficientTable>> {
        let key = (k2, lambda.clone(), mu.clone(), parity);
        if let Some(t) = self
            .cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&key)
        {
            return Ok(t.clone());
        }
        let tables = match solve_coefficients(&self.system(k2, lambda, mu, parity)) {
            Err(Error::Resonant(_)) if self.config.generators != BasisName::Osp => {
                // A smaller generator set can leave freedom that the full algebra removes.
                let ansatz = build_ansatz(k2, lambda, mu, parity, self.config.shape);
                solve_coefficients(&equivariance_system(
                    &ansatz,
                    &BasisName::Osp.basis(),
                    self.probe_degree(k2),
                ))?
            }
            r => r?,
        };
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        for t in tables {
            cache
                .entry((t.k2, t.lambda.clone(), t.mu.clone(), t.parity))
                .or_insert_with(|| Arc::new(t));
        }
        Ok(cache.get(&key).expect("solved parity").clone())
    }

    /// Uses `table` for its grade, weights and parity instead of solving.
    pub fn insert_table(&self, table: CoefficientTable) {
        let key = (
            table.k2,
            table.lambda.clone(),
            table.mu.clone(),
            table.parity,
        );
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, Arc::new(table));
    }

    pub fn quantize(&self, s: &Symbol) -> Result<SuperDiffOp> {
        if s.is_zero() {
            return Ok(SuperDiffOp::zero(s.lambda.clone(), s.mu.clone()));
        }
        self.table(s.k2, &s.lambda, &s.mu, s.parity)?.apply(s)
    }

    /// `Σ_j Q(S_j)` over a graded tuple.
    pub fn quantize_tuple(
        &self,
        symbols: &[Symbol],
        lambda: &Rational,
        mu: &Rational,
    ) -> Result<SuperDiffOp> {
        let mut op = SuperDiffOp::zero(lambda.clone(), mu.clone());
        for s in symbols {
            op.add_assign(&self.quantize(s)?);
        }
        Ok(op)
    }

    /// Graded tuple `[S_top, ..., S_0]` with `Σ Q(S_j) = a`.
    pub fn full_symbol(&self, a: &SuperDiffOp) -> Result<Vec<Symbol>> {
        let top = a.contact_order().k2;
        let mut rest = a.clone();
        let mut out = Vec::with_capacity(top as usize + 1);
        for k2 in (0..=top).rev() {
            let s = symbol_at(&rest, k2)?;
            rest = rest.sub(&self.quantize(&s)?);
            out.push(s);
        }
        debug_assert!(rest.is_zero());
        Ok(out)
    }

    /// Direct check `ℒ_h(Q(S)) = Q(h·S)` on probes of both parities.
    pub fn check_equivariance(
        &self,
        k2: u32,
        lambda: &Rational,
        mu: &Rational,
        generators: &GeneratorBasis,
        probe_degree: u32,
    ) -> Result<EquivarianceReport> {
        let mut checked = 0usize;
        for parity in [Parity::Even, Parity::Odd] {
            for s in probe_symbols(k2, lambda, mu, parity, probe_degree) {
                let qs = self.quantize(&s)?;
                for h in generators.iter() {
                    let left = h.operator_action_with_parity(&qs, s.operator_parity());
                    let right = self.quantize(&s.act(h))?;
                    checked += 1;
                    if left != right {
                        return Ok(EquivarianceReport {
                            checked,
                            counterexample: Some(Counterexample {
                                hamiltonian: crate::format::function_to_text(h.function()),
                                probe: describe_probe(&s),
                                parity: parity.name().to_string(),
                                difference: crate::format::op_to_text(&left.sub(&right)),
                            }),
                        });
                    }
                }
            }
        }
        Ok(EquivarianceReport {
            checked,
            counterexample: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub hamiltonian: String,
    pub probe: String,
    pub parity: String,
    pub difference: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl EquivarianceReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn default_quantizer() -> &'static Quantizer {
    static Q: OnceLock<Quantizer> = OnceLock::new();
    Q.get_or_init(Quantizer::default)
}

/// Oracle quantization with the default configuration (cached process-wide).
pub fn quantize_oracle(s: &Symbol) -> Result<SuperDiffOp> {
    default_quantizer().quantize(s)
}

pub fn full_symbol(a: &SuperDiffOp) -> Result<Vec<Symbol>> {
    default_quantizer().full_symbol(a)
}

/// Solver verdict at one value of `μ - λ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceProbe {
    pub delta: String,
    pub even_unique: bool,
    pub odd_unique: bool,
}

impl ResonanceProbe {
    pub fn resonant(&self) -> bool {
        !(self.even_unique && self.odd_unique)
    }
}

/// Solver verdicts for `2(μ-λ) = 0, 1, ..., 2·k2` at fixed `λ`.
pub fn resonance_scan(quantizer: &Quantizer, k2: u32, lambda: &Rational) -> Vec<ResonanceProbe> {
    (0..=2 * k2 as i64)
        .map(|two_delta| {
            let mu = lambda + q(two_delta, 2);
            let ok = |p| solve_coefficients(&quantizer.system(k2, lambda, &mu, p)).is_ok();
            ResonanceProbe {
                delta: format_rational(&q(two_delta, 2)),
                even_unique: ok(Parity::Even),
                odd_unique: ok(Parity::Odd),
            }
        })
        .collect()
}

fn floor_div(a: i64, b: i64) -> i64 {
    Integer::div_floor(&a, &b)
}

/// The binomial indices `(a_n, b_n, r_n)` of the closed formula's coefficient at `n`.
pub fn closed_indices(k2: u32, n: u32) -> (u32, u32, u32) {
    let s = if k2.is_multiple_of(2) { 1 } else { -1 };
    let n = n as i64;
    let a = floor_div(2 * n + 1 + s, 4);
    let b = floor_div(2 * n + 1 - s, 4);
    let r = floor_div(n + 1, 2);
    (a as u32, b as u32, r as u32)
}

/// `binom([k2/2], a_n) · binom([(k2-1)/2] + 2λ, b_n) / binom(k2 - 2(μ-λ), r_n)`.
pub fn closed_coefficient(k2: u32, n: u32, lambda: &Rational, mu: &Rational) -> Result<Rational> {
    let (a, b, r) = closed_indices(k2, n);
    let kk = k2 as i64;
    let top1 = qi(floor_div(kk, 2));
    let top2 = qi(floor_div(kk - 1, 2)) + lambda * qi(2);
    let den = gbinom(&(qi(kk) - (mu - lambda) * qi(2)), r);
    if den.is_zero() {
        return Err(Error::Resonant(resonance_message(
            k2,
            lambda,
            mu,
            &format!("binomial denominator of the n = {n} coefficient vanishes"),
        )));
    }
    Ok(gbinom(&top1, a) * gbinom(&top2, b) / den)
}

/// Closed-formula coefficient of every summand `source(F_c) · tail`, with the index `n`
/// it comes from.
pub fn closed_term_map(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> Result<BTreeMap<TermKey, (u32, Rational)>> {
    let mut out: BTreeMap<TermKey, (u32, Rational)> = BTreeMap::new();
    for n in 0..=k2 {
        let spec = DivTermSpec::new(n, k2)?;
        let c = closed_coefficient(k2, n, lambda, mu)?;
        let row = div_row(spec)?;
        for t in div_terms(spec, lambda, mu, parity)? {
            let tail = row.slot(t.slot).expect("div_terms omits absent slots");
            let key = TermKey {
                component: t.component,
                source: t.source,
                tail,
            };
            let e = out.entry(key).or_insert_with(|| (n, Rational::zero()));
            e.1 += &c * &t.coeff;
        }
    }
    out.retain(|_, (_, v)| !v.is_zero());
    Ok(out)
}

/// `Σ_n coeff(n) · contract(DIV^n(S), div^{k2-n})`.
pub fn quantize_closed(s: &Symbol) -> Result<SuperDiffOp> {
    if resonance_suspect(s.k2, &s.lambda, &s.mu) {
        default_quantizer().table(s.k2, &s.lambda, &s.mu, s.parity)?;
    }
    let mut op = SuperDiffOp::zero(s.lambda.clone(), s.mu.clone());
    for n in 0..=s.k2 {
        let c = closed_coefficient(s.k2, n, &s.lambda, &s.mu)?;
        let term = divergence_term(DivTermSpec::new(n, s.k2)?, s)?;
        op.add_assign(&term.scale(&c));
    }
    Ok(op)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoJson {
    pub l: u32,
    pub m: u8,
    pub n: u8,
}

impl From<Mono> for MonoJson {
    fn from(m: Mono) -> Self {
        Self {
            l: m.l,
            m: m.m,
            n: m.n,
        }
    }
}

/// One disagreeing summand `source(F_component) · term`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    /// Divergence index of the summand (the doubled order of `source`).
    pub n: u32,
    pub component: u8,
    pub source: MonoJson,
    pub term: MonoJson,
    /// The ansatz coefficient the summand corresponds to, if any.
    pub index: Option<String>,
    pub closed: String,
    pub oracle: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub k2: u32,
    pub lambda: String,
    pub mu: String,
    pub parity: String,
    pub entries: Vec<DiffEntry>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Term-by-term difference between the closed formula and the oracle table.
pub fn compare_closed_vs_oracle_with(
    quantizer: &Quantizer,
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> Result<DiffReport> {
    let table = quantizer.table(k2, lambda, mu, parity)?;
    let oracle = table.term_map();
    let closed = closed_term_map(k2, lambda, mu, parity)?;
    let names: HashMap<TermKey, CoeffIndex> = table
        .ansatz()
        .terms
        .iter()
        .map(|t| (t.key(), t.index))
        .collect();
    let mut keys: Vec<TermKey> = oracle.keys().chain(closed.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let zero = Rational::zero();
    let entries = keys
        .into_iter()
        .filter_map(|key| {
            let c = closed.get(&key).map_or(&zero, |(_, v)| v);
            let o = oracle.get(&key).unwrap_or(&zero);
            (c != o).then(|| DiffEntry {
                n: key.source.k2(),
                component: key.component,
                source: key.source.into(),
                term: key.tail.into(),
                index: names.get(&key).map(|ix| ix.to_string()),
                closed: format_rational(c),
                oracle: format_rational(o),
            })
        })
        .collect();
    Ok(DiffReport {
        k2,
        lambda: format_rational(lambda),
        mu: format_rational(mu),
        parity: parity.name().to_string(),
        entries,
    })
}

pub fn compare_closed_vs_oracle(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> Result<DiffReport> {
    compare_closed_vs_oracle_with(default_quantizer(), k2, lambda, mu, parity)
}

/// Affine expression `Σ a_j C_j + constant` over reduced-shape unknowns.
#[derive(Debug, Clone, Default)]
struct Lin {
    coeffs: BTreeMap<usize, Rational>,
    constant: Rational,
}

impl Lin {
    fn constant(c: Rational) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    fn var(j: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(j, Rational::one());
        Self {
            coeffs,
            constant: Rational::zero(),
        }
    }

    fn scaled(&self, c: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(j, a)| (*j, a * c)).collect(),
            constant: &self.constant * c,
        }
    }

    fn plus(&self, other: &Lin) -> Self {
        let mut out = self.clone();
        for (j, a) in &other.coeffs {
            *out.coeffs.entry(*j).or_insert_with(Rational::zero) += a;
        }
        out.constant += &other.constant;
        out
    }

    fn minus(&self, other: &Lin) -> Self {
        self.plus(&other.scaled(&-Rational::one()))
    }

    /// The row `self = 0`.
    fn into_row(self, origin: String) -> SparseRow {
        let mut coeffs = self.coeffs;
        coeffs.retain(|_, a| !a.is_zero());
        SparseRow {
            coeffs,
            rhs: -self.constant,
            origin,
        }
    }
}

/// The printed `X_{x²}` recurrences, transcribed line by line.
///
/// Unknowns are the reduced-shape coefficients of the given parity, in ansatz order. The
/// head coefficients `C_{0,1}`, `C_{0,4}` are 1 and every index outside the ansatz is 0.
/// Origins read `line L, l = ℓ`.
pub fn recurrences_printed(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> LinearSystem {
    let ansatz = build_ansatz(k2, lambda, mu, parity, AnsatzShape::Reduced);
    let position: HashMap<CoeffIndex, usize> = ansatz
        .terms
        .iter()
        .enumerate()
        .map(|(j, t)| (t.index, j))
        .collect();
    let c = |m: i64, i: u8| -> Lin {
        if m == 0 && (i == 1 || i == 4) {
            return Lin::constant(Rational::one());
        }
        if m < 0 {
            return Lin::default();
        }
        match position.get(&CoeffIndex { m: m as u32, i }) {
            Some(&j) => Lin::var(j),
            None => Lin::default(),
        }
    };
    let s = sign(parity.is_odd());
    let k = (k2 / 2) as i64;
    let kq = qi(k);
    let two_lambda = lambda * qi(2);
    let mut rows = Vec::new();
    let mut emit =
        |line: u32, l: i64, e: Lin| rows.push(e.into_row(format!("line {line}, l = {l}")));
    if k2.is_multiple_of(2) {
        let d2 = (mu - lambda - &kq) * qi(2);
        for l in 1..=k {
            let lq = qi(l);
            let a = &lq * (&lq - qi(1) + &d2);
            let b = (&lq + qi(1)) * (&lq + &d2);
            let kl = &kq - &lq;
            let kl1 = &kl + qi(1);
            let kl2 = &kl + &two_lambda;
            let kl21 = &kl2 + qi(1);
            let (m, mp, mpp) = (2 * l, 2 * l - 1, 2 * l - 2);
            emit(
                1,
                l,
                c(m, 1).scaled(&a).plus(&c(mpp, 1).scaled(&(&kl1 * &kl2))),
            );
            let inner = c(mp, 2)
                .minus(&c(mp, 4))
                .scaled(&s)
                .minus(&c(mpp, 2).scaled(&kl1));
            emit(2, l, c(m, 2).scaled(&b).minus(&inner.scaled(&kl2)));
            let inner = c(mp, 1)
                .plus(&c(mp, 3))
                .scaled(&s)
                .plus(&c(mpp, 3).scaled(&kl21));
            emit(3, l, c(m, 3).scaled(&b).plus(&inner.scaled(&kl)));
            emit(
                4,
                l,
                c(m, 4).scaled(&a).plus(&c(mpp, 4).scaled(&(&kl * &kl21))),
            );
        }
        for l in 0..k {
            let lq = qi(l);
            let b = (&lq + qi(1)) * (&lq + &d2);
            let kl = &kq - &lq;
            let kl2 = &kl + &two_lambda;
            let (m, mp, mpp) = (2 * l + 1, 2 * l, 2 * l - 1);
            let inner = c(mp, 1).scaled(&s).minus(&c(mpp, 1).scaled(&kl2));
            emit(5, l, c(m, 1).scaled(&b).minus(&inner.scaled(&kl)));
            let inner = c(mp, 4).scaled(&s).minus(&c(mpp, 2).scaled(&kl));
            emit(6, l, c(m, 2).scaled(&b).minus(&inner.scaled(&kl2)));
            let inner = c(mp, 1).scaled(&s).minus(&c(mpp, 3).scaled(&kl2));
            emit(7, l, c(m, 3).scaled(&b).minus(&inner.scaled(&kl)));
            let inner = c(mp, 4).scaled(&s).plus(&c(mpp, 4).scaled(&kl));
            emit(8, l, c(m, 4).scaled(&b).plus(&inner.scaled(&kl2)));
        }
    } else {
        let d2 = (mu - lambda - &kq - q(1, 2)) * qi(2);
        for l in 1..=k {
            let lq = qi(l);
            let a = &lq * (&lq - qi(1) + &d2);
            let b = (&lq + qi(1)) * (&lq + &d2);
            let kl1 = &kq - &lq + qi(1);
            let kl21 = &kq - &lq + &two_lambda + qi(1);
            let (m, mp, mpp) = (2 * l, 2 * l - 1, 2 * l - 2);
            let rhs = c(mpp, 2)
                .scaled(&(&kl1 * &kl21))
                .plus(&c(mp, 2).scaled(&(&s * &kl1)))
                .plus(&c(m, 4))
                .minus(&c(mp, 4).scaled(&(&s * &kl21)));
            emit(1, l, c(m, 1).minus(&c(m, 2).scaled(&b)).minus(&rhs));
            let rhs = c(m, 1)
                .plus(&c(mp, 1).scaled(&(&s * &kl1)))
                .minus(&c(mpp, 3).scaled(&(&kl1 * &kl21)))
                .plus(&c(mp, 3).scaled(&(&s * &kl21)));
            emit(2, l, c(m, 3).scaled(&b).plus(&c(m, 4)).minus(&rhs));
            emit(
                3,
                l,
                c(m, 1)
                    .scaled(&a)
                    .minus(&c(m, 2))
                    .plus(&c(mpp, 1).scaled(&(&kl1 * &kl21))),
            );
            emit(
                4,
                l,
                c(m, 3)
                    .plus(&c(m, 4).scaled(&a))
                    .plus(&c(mpp, 4).scaled(&(&kl1 * &kl21))),
            );
        }
        for l in 0..=k {
            let lq = qi(l);
            let b = (&lq + qi(1)) * (&lq + &d2);
            let kl = &kq - &lq;
            let kl1 = &kl + qi(1);
            let kl2 = &kl + &two_lambda;
            let kl21 = &kl2 + qi(1);
            let (m, mp, mpp) = (2 * l + 1, 2 * l, 2 * l - 1);
            let inner = c(mp, 4).scaled(&s).plus(&c(mpp, 2).scaled(&kl1));
            emit(
                5,
                l,
                c(m, 1).plus(&c(m, 2).scaled(&b)).plus(&inner.scaled(&kl2)),
            );
            let inner = c(mp, 1).scaled(&s).plus(&c(mpp, 1).scaled(&kl1));
            emit(
                6,
                l,
                c(m, 2).plus(&c(m, 1).scaled(&b)).plus(&inner.scaled(&kl2)),
            );
            let inner = c(mpp, 4).scaled(&kl21).minus(&c(mp, 4).scaled(&s));
            emit(
                7,
                l,
                c(m, 3).minus(&c(m, 4).scaled(&b)).minus(&inner.scaled(&kl)),
            );
            let inner = c(mp, 1).scaled(&s).plus(&c(mpp, 3).scaled(&kl21));
            emit(
                8,
                l,
                c(m, 4).minus(&c(m, 3).scaled(&b)).minus(&inner.scaled(&kl)),
            );
        }
    }
    LinearSystem {
        k2,
        lambda: lambda.clone(),
        mu: mu.clone(),
        shape: AnsatzShape::Reduced,
        parities: vec![parity],
        unknowns: ansatz
            .terms
            .iter()
            .map(|t| Unknown {
                parity,
                index: t.index,
            })
            .collect(),
        rows,
    }
}

/// The printed closed-form values of `C_{m,i}` for integer `k2`. An entry is `None`
/// where the printed expression divides by zero. Half-integer grades have no printed
/// closed forms and give an empty map.
pub fn printed_closed_forms(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> BTreeMap<CoeffIndex, Option<Rational>> {
    let mut out = BTreeMap::new();
    if k2 % 2 == 1 || k2 == 0 {
        return out;
    }
    let k = (k2 / 2) as i64;
    let kq = qi(k);
    let two_lambda = lambda * qi(2);
    let d2 = (mu - lambda - &kq) * qi(2);
    let s = sign(parity.is_odd());
    let div = |a: Rational, b: Rational| (!b.is_zero()).then(|| a / b);
    let gb = |top: Rational, bottom: i64| (bottom >= 0).then(|| gbinom(&top, bottom as u32));
    for l in 1..=k {
        let lq = qi(l);
        let den = gbinom(&-d2.clone(), (l + 1) as u32);
        let c2 = gb(kq.clone() - qi(1), l - 1)
            .zip(gb(&kq + &two_lambda, l + 1))
            .and_then(|(a, b)| div(a * b, den.clone()));
        let c3 = gb(kq.clone(), l + 1)
            .zip(gb(&kq + &two_lambda - qi(1), l - 1))
            .and_then(|(a, b)| div(-(a * b), den.clone()));
        let kl = &kq - &lq;
        let c1 = c3
            .clone()
            .and_then(|c3| div((&kq + &two_lambda - &lq) * (&d2 + &lq) * c3, &lq * &kl));
        let c4 = c2
            .clone()
            .and_then(|c2| div(-(&kl * (&d2 + &lq)) * c2, &lq * (&kl + &two_lambda)));
        let m = 2 * l as u32;
        out.insert(CoeffIndex { m, i: 1 }, c1);
        out.insert(CoeffIndex { m, i: 2 }, c2.clone());
        out.insert(CoeffIndex { m, i: 3 }, c3.clone());
        out.insert(CoeffIndex { m, i: 4 }, c4);
        let o1 = c3
            .clone()
            .and_then(|c3| div(&s * (&kq + &two_lambda - &lq) * c3, lq.clone()));
        let o2 = c2.clone().and_then(|c2| div(-(&s * &kl) * c2, lq.clone()));
        let o3 = c3.and_then(|c3| div(&s * (&kq + &two_lambda - &lq) * c3, lq.clone()));
        let o4 = c2.and_then(|c2| div(&s * &kl * c2, lq.clone()));
        let m = m + 1;
        out.insert(CoeffIndex { m, i: 1 }, o1);
        out.insert(CoeffIndex { m, i: 2 }, o2);
        out.insert(CoeffIndex { m, i: 3 }, o3);
        out.insert(CoeffIndex { m, i: 4 }, o4);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowResidual {
    pub row: String,
    /// `lhs - rhs` at the oracle solution.
    pub oracle: String,
    /// `lhs - rhs` at the printed closed forms; `None` if an involved value is undefined
    /// or the grade has no printed closed forms.
    pub closed_form: Option<String>,
    /// As `closed_form`, with oracle values standing in for undefined entries.
    pub completed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueComparison {
    pub index: String,
    pub oracle: Option<String>,
    pub closed_form: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub k2: u32,
    pub lambda: String,
    pub mu: String,
    pub parity: String,
    /// Whether the printed rows and the `X_{x²}` system on the reduced shape have the same
    /// solution set.
    pub same_solution_set: bool,
    pub rows: Vec<RowResidual>,
    pub values: Vec<ValueComparison>,
}

/// Printed recurrences against the derived system, plus the printed closed forms
/// substituted into both.
pub fn recurrence_report(
    k2: u32,
    lambda: &Rational,
    mu: &Rational,
    parity: Parity,
) -> Result<RecurrenceReport> {
    let printed = recurrences_printed(k2, lambda, mu, parity);
    let ansatz = build_ansatz(k2, lambda, mu, parity, AnsatzShape::Reduced);
    let derived = equivariance_system(&ansatz, &BasisName::X2.basis(), default_probe_degree(k2));
    let n = printed.unknowns.len();
    let same = same_solution_set(n, &printed.rows, &derived.rows);
    let table = solve_coefficients(&derived)?
        .into_iter()
        .next()
        .expect("one parity");
    let oracle_x: Vec<Rational> = ansatz
        .terms
        .iter()
        .map(|t| table.entries[&t.index].clone())
        .collect();
    let closed = printed_closed_forms(k2, lambda, mu, parity);
    let closed_x: Option<Vec<Option<Rational>>> = (!closed.is_empty()).then(|| {
        ansatz
            .terms
            .iter()
            .map(|t| closed.get(&t.index).cloned().flatten())
            .collect()
    });
    let rows = printed
        .rows
        .iter()
        .map(|r| {
            let closed_form = closed_x.as_ref().and_then(|cx| {
                let mut acc = -r.rhs.clone();
                for (j, a) in &r.coeffs {
                    acc += a * cx[*j].as_ref()?;
                }
                Some(format_rational(&acc))
            });
            let completed: Vec<Rational> = match &closed_x {
                Some(cx) => cx
                    .iter()
                    .zip(&oracle_x)
                    .map(|(c, o)| c.clone().unwrap_or_else(|| o.clone()))
                    .collect(),
                None => oracle_x.clone(),
            };
            RowResidual {
                row: r.origin.clone(),
                oracle: format_rational(&r.residual(&oracle_x)),
                closed_form,
                completed: format_rational(&r.residual(&completed)),
            }
        })
        .collect();
    let values = ansatz
        .terms
        .iter()
        .map(|t| ValueComparison {
            index: t.index.to_string(),
            oracle: table.entries.get(&t.index).map(format_rational),
            closed_form: closed
                .get(&t.index)
                .cloned()
                .flatten()
                .as_ref()
                .map(format_rational),
        })
        .collect();
    Ok(RecurrenceReport {
        k2,
        lambda: format_rational(lambda),
        mu: format_rational(mu),
        parity: parity.name().to_string(),
        same_solution_set: same,
        rows,
        values,
    })
}
