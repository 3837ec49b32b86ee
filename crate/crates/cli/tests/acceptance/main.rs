//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any
//! criterion fails. All comparisons are exact equalities over ℚ.

mod cli;
mod generate;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prop_assert_eq;
use squant_core::contact::{contact_hamiltonian_of, supercommutator};
use squant_core::divergence::{divergence_term, DivTermSpec};
use squant_core::quantization::{
    compare_closed_vs_oracle, probe_symbols, quantize_closed, quantize_oracle, recurrence_report,
    solve_coefficients, AnsatzShape, DiffReport, Quantizer, QuantizerConfig,
};
use squant_core::rational::{format_rational, q, sign};
use squant_core::symbol::{principal_symbol, symbol_action, symbol_at};
use squant_core::{
    aff_basis, osp_basis, BasisName, ContactHamiltonian, Error, Parity, Rational, SuperDiffOp,
    SuperFunction, Symbol,
};

use generate::draw;

type Check = Result<String, String>;

fn fail(msg: impl Into<String>) -> String {
    msg.into()
}

/// Weight samples away from every resonance and singularity for k2 ≤ 6.
pub fn generic_weights() -> Vec<(Rational, Rational)> {
    vec![
        (q(1, 7), q(23, 11)),
        (q(-2, 3), q(5, 8)),
        (q(3, 5), q(-1, 9)),
    ]
}

/// The three suggested samples; `μ - λ` is 2, 5/2 and 3.
fn listed_weights() -> Vec<(Rational, Rational)> {
    vec![(q(1, 3), q(7, 3)), (q(-1, 4), q(9, 4)), (q(2, 5), q(17, 5))]
}

fn both() -> [Parity; 2] {
    [Parity::Even, Parity::Odd]
}

fn weights_text(l: &Rational, m: &Rational) -> String {
    format!("({}, {})", format_rational(l), format_rational(m))
}

fn algebra_kernel() -> Check {
    let mut runner = generate::runner(200);
    let strategy = (
        generate::homogeneous(6),
        generate::homogeneous(6),
        generate::function(6),
    );
    runner
        .run(&strategy, |((pf, f), (pg, g), any)| {
            for h in [&f, &g, &any] {
                for i in [1, 2] {
                    prop_assert_eq!(h.dbar(i).dbar(i), -&h.ddx());
                    prop_assert_eq!(h.dplus(i).dplus(i), h.ddx());
                }
                prop_assert_eq!(h.dbar(2).dbar(1), -&h.dbar(1).dbar(2));
                prop_assert_eq!(h.dplus(2).dplus(1), -&h.dplus(1).dplus(2));
            }
            let s = sign(pf.is_odd());
            let fg = &f * &g;
            for i in [1, 2] {
                prop_assert_eq!(
                    fg.dbar(i),
                    &(&f.dbar(i) * &g) + &(&f * &g.dbar(i)).scale(&s)
                );
                prop_assert_eq!(
                    fg.dplus(i),
                    &(&f.dplus(i) * &g) + &(&f * &g.dplus(i)).scale(&s)
                );
            }
            prop_assert_eq!(&fg, &(&g * &f).scale(&sign(pf.is_odd() && pg.is_odd())));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("200 cases".into())
}

fn bracket(a: &ContactHamiltonian, b: &ContactHamiltonian) -> Result<ContactHamiltonian, Error> {
    contact_hamiltonian_of(&supercommutator(&a.contact_field(), &b.contact_field())?)
}

fn representation_laws() -> Check {
    let basis = osp_basis();
    let hs: Vec<&ContactHamiltonian> = basis.iter().collect();
    let mut runner = generate::runner(1);
    let mut checked = 0;
    for (lambda, mu) in listed_weights() {
        let ops: Vec<SuperDiffOp> = (0..3u32)
            .map(|k2| {
                let p = draw(&mut runner, &generate::parity());
                draw(
                    &mut runner,
                    &generate::operator(k2, p, lambda.clone(), mu.clone(), 2),
                )
            })
            .collect();
        for i in 0..hs.len() {
            for j in i..hs.len() {
                let (a, b) = (hs[i], hs[j]);
                let c = bracket(a, b).map_err(|e| e.to_string())?;
                let s = sign(a.parity().is_odd() && b.parity().is_odd());
                for nu in [&lambda, &mu] {
                    let (la, lb) = (a.lie_derivative(nu), b.lie_derivative(nu));
                    let lhs = supercommutator(&la, &lb).map_err(|e| e.to_string())?;
                    if lhs != c.lie_derivative(nu) {
                        return Err(fail(format!(
                            "density law fails for pair ({i}, {j}) at weight {}",
                            format_rational(nu)
                        )));
                    }
                }
                for op in &ops {
                    let pa = op.parity().expect("homogeneous operator");
                    let act = |h: &ContactHamiltonian, x: &SuperDiffOp, p: Parity| {
                        h.operator_action_with_parity(x, p)
                    };
                    let ab = act(a, &act(b, op, pa), pa.plus(b.parity()));
                    let ba = act(b, &act(a, op, pa), pa.plus(a.parity()));
                    if ab.sub(&ba.scale(&s)) != act(&c, op, pa) {
                        return Err(fail(format!(
                            "operator law fails for pair ({i}, {j}) at weights {}",
                            weights_text(&lambda, &mu)
                        )));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("36 pairs x 3 weights, {checked} operator checks"))
}

/// Equality with the parity label of the zero symbol ignored.
fn same_symbol(a: &Symbol, b: &Symbol) -> bool {
    a == b || (a.is_zero() && b.is_zero() && a.k2 == b.k2 && a.lambda == b.lambda && a.mu == b.mu)
}

fn symbol_intertwining() -> Check {
    let basis = osp_basis();
    let mut runner = generate::runner(1);
    let (lambda, mu) = (q(1, 3), q(7, 3));
    let mut checked = 0;
    for k2 in 0..=6u32 {
        for p in both() {
            for _ in 0..3 {
                let a = draw(
                    &mut runner,
                    &generate::operator(k2, p, lambda.clone(), mu.clone(), 3),
                );
                let sa = principal_symbol(&a).map_err(|e| e.to_string())?;
                for h in basis.iter() {
                    let acted = h.operator_action(&a).map_err(|e| e.to_string())?;
                    if acted.contact_order().k2 > k2 {
                        return Err(fail(format!("k2 = {k2}: the action raised the order")));
                    }
                    let left = symbol_at(&acted, k2).map_err(|e| e.to_string())?;
                    if !same_symbol(&left, &symbol_action(h, &sa)) {
                        return Err(fail(format!(
                            "k2 = {k2}, h = {}: principal symbol does not intertwine for {}",
                            squant_core::format::function_to_text(h.function()),
                            squant_core::format::op_to_text(&a)
                        )));
                    }
                    if k2 % 2 == 0 {
                        let only1 = Symbol {
                            f2: SuperFunction::zero(),
                            ..sa.clone()
                        };
                        let only2 = Symbol {
                            f1: SuperFunction::zero(),
                            ..sa.clone()
                        };
                        if !symbol_action(h, &only1).f2.is_zero()
                            || !symbol_action(h, &only2).f1.is_zero()
                        {
                            return Err(fail(format!(
                                "k2 = {k2}: integer-grade action mixes components"
                            )));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} operator/generator pairs"))
}

fn divergence_equivariance() -> Check {
    let basis = aff_basis();
    let mut checked = 0;
    for (lambda, mu) in generic_weights().into_iter().take(2) {
        for k2 in 2..=6u32 {
            for p in both() {
                for s in probe_symbols(k2, &lambda, &mu, p, 4) {
                    for n in 0..=k2 {
                        let spec = DivTermSpec::new(n, k2).map_err(|e| e.to_string())?;
                        let t = divergence_term(spec, &s).map_err(|e| e.to_string())?;
                        for h in basis.iter() {
                            let left = h.operator_action_with_parity(&t, s.operator_parity());
                            let right =
                                divergence_term(spec, &s.act(h)).map_err(|e| e.to_string())?;
                            if left != right {
                                return Err(fail(format!(
                                    "k2 = {k2}, n = {n}, {p} probe, h = {}, weights {}",
                                    squant_core::format::function_to_text(h.function()),
                                    weights_text(&lambda, &mu)
                                )));
                            }
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{checked} term/generator checks"))
}

fn existence_uniqueness() -> Check {
    let quantizer = Quantizer::default();
    let osp = osp_basis();
    let mut cases = 0;
    for k2 in 1..=6u32 {
        for (lambda, mu) in generic_weights() {
            let w = weights_text(&lambda, &mu);
            for p in both() {
                solve_coefficients(&quantizer.system(k2, &lambda, &mu, p))
                    .map_err(|e| format!("k2 = {k2}, {p}, {w}: {e}"))?;
                cases += 1;
                for s in probe_symbols(k2, &lambda, &mu, p, 4) {
                    let op = quantizer.quantize(&s).map_err(|e| e.to_string())?;
                    if op.contact_order().k2 != k2
                        || symbol_at(&op, k2).map_err(|e| e.to_string())? != s
                    {
                        return Err(fail(format!(
                            "k2 = {k2}, {p}, {w}: principal symbol not preserved"
                        )));
                    }
                }
            }
            let report = quantizer
                .check_equivariance(k2, &lambda, &mu, &osp, 4)
                .map_err(|e| e.to_string())?;
            if let Some(c) = report.counterexample {
                return Err(fail(format!(
                    "k2 = {k2}, {w}: not equivariant under {}: {}",
                    c.hamiltonian, c.difference
                )));
            }
        }
    }
    Ok(format!("{cases} unique tables, equivariant under osp(2|2)"))
}

fn resonance() -> Check {
    let truth = Quantizer::new(QuantizerConfig {
        shape: AnsatzShape::General,
        generators: BasisName::Osp,
        probe_degree: None,
    });
    let lambda = q(1, 3);
    let listed = [q(0, 1), q(1, 2), q(1, 1), q(3, 2), q(2, 1)];
    let mut missing = Vec::new();
    let mut wrong_error = Vec::new();
    let mut found = 0;
    for k2 in 0..=4u32 {
        for delta in listed
            .iter()
            .filter(|d| *d * q(2, 1) <= q(2 * k2 as i64, 1))
        {
            let mu = &lambda + delta;
            let failing: Vec<Parity> = both()
                .into_iter()
                .filter(|&p| solve_coefficients(&truth.system(k2, &lambda, &mu, p)).is_err())
                .collect();
            let Some(&p) = failing.first() else {
                missing.push(format!(
                    "(k2 = {k2}, mu - lambda = {})",
                    format_rational(delta)
                ));
                continue;
            };
            found += 1;
            let s = probe_symbols(k2, &lambda, &mu, p, 0).remove(0);
            for (name, r) in [
                ("oracle", quantize_oracle(&s)),
                ("closed", quantize_closed(&s)),
            ] {
                if !matches!(r, Err(Error::Resonant(_))) {
                    wrong_error.push(format!(
                        "{name} at (k2 = {k2}, mu - lambda = {})",
                        format_rational(delta)
                    ));
                }
            }
        }
    }
    if missing.is_empty() && wrong_error.is_empty() {
        return Ok(format!(
            "{found} listed values resonant, all report the resonant error"
        ));
    }
    let mut msg = format!("{found} listed values resonant");
    if !missing.is_empty() {
        msg += &format!("; unique quantization at {}", missing.join(", "));
    }
    if !wrong_error.is_empty() {
        msg += &format!("; no resonant error from {}", wrong_error.join(", "));
    }
    Err(msg)
}

/// Machine-readable lines of the deviations document: everything inside the
/// `deviations` code block.
fn known_deviations() -> Result<Vec<String>, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../KNOWN-DEVIATIONS.md");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let block = text
        .split("```deviations")
        .nth(1)
        .and_then(|rest| rest.split("```").next())
        .ok_or("no `deviations` block")?;
    Ok(block
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn diff_lines(r: &DiffReport) -> Vec<String> {
    r.entries
        .iter()
        .map(|e| {
            format!(
                "diff k2={} lambda={} mu={} parity={} n={} component={} source={},{},{} term={},{},{}",
                r.k2, r.lambda, r.mu, r.parity, e.n, e.component, e.source.l, e.source.m, e.source.n, e.term.l, e.term.m, e.term.n
            )
        })
        .collect()
}

fn closed_form_cross_check() -> Check {
    let listed = known_deviations()?;
    let quantizer = Quantizer::default();
    let mut reports = 0;
    let mut skipped = 0;
    let mut unlisted = Vec::new();
    for k2 in 0..=6u32 {
        for (lambda, mu) in generic_weights().into_iter().chain(listed_weights()) {
            for p in both() {
                if quantizer.table(k2, &lambda, &mu, p).is_err() {
                    // No oracle to compare against: the weights are resonant at this grade.
                    skipped += 1;
                    continue;
                }
                let tag = format!(
                    "k2={k2} lambda={} mu={} parity={}",
                    format_rational(&lambda),
                    format_rational(&mu),
                    p.name()
                );
                match compare_closed_vs_oracle(k2, &lambda, &mu, p) {
                    Ok(r) => {
                        reports += 1;
                        if k2 <= 2 && !r.is_empty() {
                            return Err(fail(format!("nonempty diff at {tag}")));
                        }
                        unlisted.extend(diff_lines(&r).into_iter().filter(|l| !listed.contains(l)));
                    }
                    Err(e) => {
                        let line = format!("closed-undefined {tag}");
                        if k2 <= 2 || !listed.contains(&line) {
                            unlisted.push(format!("{line} ({e})"));
                        }
                    }
                }
            }
        }
    }
    if !unlisted.is_empty() {
        return Err(fail(format!(
            "not in KNOWN-DEVIATIONS.md: {}",
            unlisted.join("; ")
        )));
    }
    Ok(format!(
        "{reports} diff reports, {skipped} resonant samples without an oracle"
    ))
}

fn bijectivity() -> Check {
    let mut runner = generate::runner(1);
    let mut checked = 0;
    for (lambda, mu) in generic_weights().into_iter().take(2) {
        for top in 0..=6u32 {
            for _ in 0..2 {
                let tuple: Vec<Symbol> = (0..=top)
                    .rev()
                    .map(|k2| {
                        let p = draw(&mut runner, &generate::parity());
                        draw(
                            &mut runner,
                            &generate::symbol(k2, p, lambda.clone(), mu.clone(), 3),
                        )
                    })
                    .collect();
                let mut op = SuperDiffOp::zero(lambda.clone(), mu.clone());
                for s in &tuple {
                    op.add_assign(&quantize_oracle(s).map_err(|e| e.to_string())?);
                }
                let back =
                    squant_core::quantization::full_symbol(&op).map_err(|e| e.to_string())?;
                if back != tuple {
                    return Err(fail(format!(
                        "full_symbol ∘ Q is not the identity at top grade {top}"
                    )));
                }
                let p = draw(&mut runner, &generate::parity());
                let a = draw(
                    &mut runner,
                    &generate::operator(top, p, lambda.clone(), mu.clone(), 3),
                );
                let symbols =
                    squant_core::quantization::full_symbol(&a).map_err(|e| e.to_string())?;
                let mut rebuilt = SuperDiffOp::zero(lambda.clone(), mu.clone());
                for s in &symbols {
                    rebuilt.add_assign(&quantize_oracle(s).map_err(|e| e.to_string())?);
                }
                if rebuilt != a {
                    return Err(fail(format!(
                        "Q ∘ full_symbol is not the identity at order {top}"
                    )));
                }
                checked += 2;
            }
        }
    }
    Ok(format!("{checked} round trips"))
}

fn printed_recurrences() -> Check {
    let listed = known_deviations()?;
    let mut rows = 0;
    let mut undefined = 0;
    for k2 in [2u32, 3] {
        for (lambda, mu) in generic_weights() {
            for p in both() {
                let r = recurrence_report(k2, &lambda, &mu, p).map_err(|e| e.to_string())?;
                let tag = format!("k2 = {k2}, {p}, {}", weights_text(&lambda, &mu));
                if !r.same_solution_set {
                    return Err(fail(format!(
                        "{tag}: printed rows have a different solution set"
                    )));
                }
                for row in &r.rows {
                    rows += 1;
                    if row.oracle != "0" || row.completed != "0" {
                        return Err(fail(format!(
                            "{tag}, {}: residual {} / {}",
                            row.row, row.oracle, row.completed
                        )));
                    }
                    match &row.closed_form {
                        Some(v) if v == "0" => {}
                        Some(v) => {
                            return Err(fail(format!(
                                "{tag}, {}: closed-form residual {v}",
                                row.row
                            )))
                        }
                        None => undefined += 1,
                    }
                }
                for v in &r.values {
                    match (&v.oracle, &v.closed_form) {
                        (Some(o), Some(c)) if o != c => {
                            return Err(fail(format!(
                                "{tag}: {} closed form {c} vs oracle {o}",
                                v.index
                            )));
                        }
                        (_, None) if k2 % 2 == 0 => {
                            let line = format!("closed-form-undefined k2={k2} {}", v.index);
                            if !listed.contains(&line) {
                                return Err(fail(format!("{line} is not documented")));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    if !listed
        .iter()
        .any(|l| l == "closed-forms-absent half-integer")
    {
        return Err(fail(
            "half-integer grades without printed closed forms are not documented",
        ));
    }
    Ok(format!(
        "{rows} rows, zero residuals; {undefined} rows involve a documented undefined closed form"
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "algebra kernel",
            limit: Some(Duration::from_secs(5)),
            run: algebra_kernel,
        },
        Criterion {
            id: 2,
            name: "representation laws",
            limit: Some(Duration::from_secs(30)),
            run: representation_laws,
        },
        Criterion {
            id: 3,
            name: "symbol intertwining",
            limit: Some(Duration::from_secs(30)),
            run: symbol_intertwining,
        },
        Criterion {
            id: 4,
            name: "divergence equivariance",
            limit: Some(Duration::from_secs(60)),
            run: divergence_equivariance,
        },
        Criterion {
            id: 5,
            name: "existence and uniqueness",
            limit: Some(Duration::from_secs(120)),
            run: existence_uniqueness,
        },
        Criterion {
            id: 6,
            name: "resonance",
            limit: None,
            run: resonance,
        },
        Criterion {
            id: 7,
            name: "closed-form cross-check",
            limit: None,
            run: closed_form_cross_check,
        },
        Criterion {
            id: 8,
            name: "bijectivity",
            limit: Some(Duration::from_secs(60)),
            run: bijectivity,
        },
        Criterion {
            id: 9,
            name: "printed recurrences",
            limit: None,
            run: printed_recurrences,
        },
        Criterion {
            id: 10,
            name: "command line",
            limit: None,
            run: cli::command_line,
        },
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in criteria
        .iter()
        .filter(|c| filter.is_empty() || filter.contains(&c.id))
    {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(msg), Some(limit)) if elapsed >= limit => Err(format!(
                "{msg}; took {:.2} s, limit {} s",
                elapsed.as_secs_f64(),
                limit.as_secs()
            )),
            (r, _) => r,
        };
        let (status, msg) = match result {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "{status} criterion {:>2} {:<26} {:>8.2} s  {msg}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
