use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use squant_core::divergence::{div_row, div_terms, divergence_term, DivTermSpec};
use squant_core::format::{
    from_json_str, function_to_latex, function_to_text, mono_to_text, op_to_latex, op_to_text,
    operator_from_json, operator_to_json, parse_function, symbol_from_json, symbol_to_json,
    symbol_to_latex, to_json_string, OperatorJson, SymbolJson,
};
use squant_core::quantization::{
    compare_closed_vs_oracle_with, quantize_closed, recurrence_report, resonance_scan,
    solve_coefficients, CoefficientTable, CoefficientTableJson, MonoJson, Quantizer,
    QuantizerConfig,
};
use squant_core::rational::format_rational;
use squant_core::symbol::{principal_symbol, symbol_action};
use squant_core::{BasisName, ContactHamiltonian, Mono, Symbol};

use crate::{
    ActArgs, CheckArgs, Cli, Command, DivArgs, Format, Method, Outcome, QuantizeArgs,
    RecurrenceArgs, ResonanceArgs, SolveArgs, SolverArgs, SymbolArgs, EXIT_VERIFICATION,
};

pub fn run(cli: &Cli) -> Result<Outcome> {
    let f = cli.format;
    match &cli.command {
        Command::Quantize(a) => quantize(a, f),
        Command::Symbol(a) => symbol(a, f),
        Command::Act(a) => act(a, f),
        Command::CheckEquivariance(a) => check(a, f),
        Command::SolveCoeffs(a) => solve(a, f),
        Command::Div(a) => div(a, f),
        Command::Recurrences(a) => recurrences(a, f),
        Command::Resonance(a) => resonance(a, f),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_symbol(path: &Path) -> Result<Symbol> {
    let j: SymbolJson = from_json_str(&read_input(path)?)?;
    Ok(symbol_from_json(&j)?)
}

fn read_operator(path: &Path) -> Result<squant_core::SuperDiffOp> {
    let j: OperatorJson = from_json_str(&read_input(path)?)?;
    Ok(operator_from_json(&j)?)
}

fn quantizer(s: &SolverArgs) -> Quantizer {
    Quantizer::new(QuantizerConfig {
        shape: s.shape,
        generators: s.generators,
        probe_degree: s.degree,
    })
}

fn lines<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|l| l + "\n").collect()
}

fn value_string(v: &Value) -> String {
    to_json_string(v)
}

fn operator_output(op: &squant_core::SuperDiffOp, f: Format) -> String {
    match f {
        Format::Json => to_json_string(&operator_to_json(op)),
        Format::Latex => op_to_latex(op) + "\n",
        Format::Text => op_to_text(op) + "\n",
    }
}

fn symbol_text(s: &Symbol) -> String {
    format!(
        "k2 = {}, {}: F1 = {}, F2 = {}",
        s.k2,
        s.parity,
        function_to_text(&s.f1),
        function_to_text(&s.f2)
    )
}

fn symbol_output(s: &Symbol, f: Format) -> String {
    match f {
        Format::Json => to_json_string(&symbol_to_json(s)),
        Format::Latex => symbol_to_latex(s) + "\n",
        Format::Text => symbol_text(s) + "\n",
    }
}

fn quantize(a: &QuantizeArgs, f: Format) -> Result<Outcome> {
    let s = match &a.input {
        Some(path) => read_symbol(path)?,
        None => {
            let (Some(k2), Some(lambda), Some(mu)) = (a.k2, a.lambda.clone(), a.mu.clone()) else {
                bail!(squant_core::Error::Invalid(
                    "give a symbol file, or --k2, --lambda and --mu with --f1/--f2".into()
                ));
            };
            let f1 = parse_function(a.f1.as_deref().unwrap_or("0"))?;
            let f2 = parse_function(a.f2.as_deref().unwrap_or("0"))?;
            match a.parity {
                Some(p) => Symbol::with_parity(f1, f2, k2, lambda, mu, p)?,
                None if f1.is_zero() && f2.is_zero() => Symbol::zero(k2, lambda, mu),
                None => Symbol::new(f1, f2, k2, lambda, mu)?,
            }
        }
    };
    let op = match a.method {
        Method::Oracle => quantizer(&a.solver).quantize(&s)?,
        Method::Closed => quantize_closed(&s)?,
    };
    Ok(Outcome::ok(operator_output(&op, f)))
}

fn symbol(a: &SymbolArgs, f: Format) -> Result<Outcome> {
    let op = read_operator(&a.input)?;
    if a.principal {
        return Ok(Outcome::ok(symbol_output(&principal_symbol(&op)?, f)));
    }
    let tuple = quantizer(&a.solver).full_symbol(&op)?;
    let payload = match f {
        Format::Json => to_json_string(&tuple.iter().map(symbol_to_json).collect::<Vec<_>>()),
        Format::Latex => lines(tuple.iter().map(symbol_to_latex)),
        Format::Text => lines(tuple.iter().map(symbol_text)),
    };
    Ok(Outcome::ok(payload))
}

fn act(a: &ActArgs, f: Format) -> Result<Outcome> {
    let h = ContactHamiltonian::new(parse_function(&a.hamiltonian)?)?;
    if let Some(density) = &a.density {
        let Some(lambda) = &a.lambda else {
            bail!(squant_core::Error::Invalid(
                "acting on a density needs --lambda".into()
            ));
        };
        let out = h.density_action(lambda, &parse_function(density)?);
        let payload = match f {
            Format::Json => value_string(&json!({
                "lambda": format_rational(lambda),
                "density": function_to_text(&out),
            })),
            Format::Latex => function_to_latex(&out) + "\n",
            Format::Text => function_to_text(&out) + "\n",
        };
        return Ok(Outcome::ok(payload));
    }
    if let Some(path) = &a.operator {
        let op = h.operator_action(&read_operator(path)?)?;
        return Ok(Outcome::ok(operator_output(&op, f)));
    }
    if let Some(path) = &a.symbol {
        let s = symbol_action(&h, &read_symbol(path)?);
        return Ok(Outcome::ok(symbol_output(&s, f)));
    }
    bail!(squant_core::Error::Invalid(
        "act needs one of --density, --operator, --symbol".into()
    ))
}

fn check(a: &CheckArgs, f: Format) -> Result<Outcome> {
    let q = Quantizer::new(QuantizerConfig {
        shape: a.shape,
        generators: BasisName::X2,
        probe_degree: None,
    });
    let (lambda, mu) = (&a.weights.lambda, &a.weights.mu);
    if let Some(path) = &a.table {
        let j: CoefficientTableJson = from_json_str(&read_input(path)?)?;
        let table = CoefficientTable::from_json(&j)?;
        if table.k2 != a.k2 || &table.lambda != lambda || &table.mu != mu || table.shape != a.shape
        {
            bail!(squant_core::Error::Invalid(
                "table grade, weights or shape differ from the flags".into()
            ));
        }
        q.insert_table(table);
    }
    let report = q.check_equivariance(a.k2, lambda, mu, &a.generators.basis(), a.degree)?;
    let payload = match f {
        Format::Json => to_json_string(&report),
        Format::Latex | Format::Text => match &report.counterexample {
            None => format!("PASS: {} checks\n", report.checked),
            Some(c) => format!(
                "FAIL after {} checks: h = {}, probe {} ({}), difference {}\n",
                report.checked, c.hamiltonian, c.probe, c.parity, c.difference
            ),
        },
    };
    let code = if report.passed() {
        0
    } else {
        EXIT_VERIFICATION
    };
    Ok(Outcome { payload, code })
}

fn solve(a: &SolveArgs, f: Format) -> Result<Outcome> {
    let g = &a.grade;
    let (lambda, mu) = (&g.weights.lambda, &g.weights.mu);
    let q = quantizer(&a.solver);
    let table = solve_coefficients(&q.system(g.k2, lambda, mu, g.parity))?
        .into_iter()
        .find(|t| t.parity == g.parity)
        .expect("requested parity is solved");
    let diff = compare_closed_vs_oracle_with(&q, g.k2, lambda, mu, g.parity);
    let payload = match f {
        Format::Json => {
            let (diff, closed_error) = match &diff {
                Ok(d) => (serde_json::to_value(d)?, Value::Null),
                Err(e) => (Value::Null, Value::String(e.to_string())),
            };
            value_string(&json!({
                "table": serde_json::to_value(table.to_json())?,
                "diff": diff,
                "closed_error": closed_error,
            }))
        }
        Format::Latex => table.to_latex() + "\n",
        Format::Text => {
            let mut out = lines(
                table
                    .entries
                    .iter()
                    .map(|(ix, v)| format!("{ix} = {}", format_rational(v))),
            );
            match &diff {
                Ok(d) if d.is_empty() => out.push_str("closed formula: agrees\n"),
                Ok(d) => {
                    out.push_str(&format!(
                        "closed formula: {} differing terms\n",
                        d.entries.len()
                    ));
                    out += &lines(d.entries.iter().map(|e| {
                        format!(
                            "  n = {}, {}(F{}) * {}: closed {} oracle {}",
                            e.n,
                            mono_to_text(Mono::new(e.source.l, e.source.m, e.source.n)),
                            e.component,
                            mono_to_text(Mono::new(e.term.l, e.term.m, e.term.n)),
                            e.closed,
                            e.oracle
                        )
                    }));
                }
                Err(e) => out.push_str(&format!("closed formula: {e}\n")),
            }
            out
        }
    };
    Ok(Outcome::ok(payload))
}

fn mono_value(m: Mono) -> Value {
    serde_json::to_value(MonoJson::from(m)).expect("serializable")
}

fn div(a: &DivArgs, f: Format) -> Result<Outcome> {
    let g = &a.grade;
    let (lambda, mu) = (&g.weights.lambda, &g.weights.mu);
    let symbol = a.symbol.as_deref().map(read_symbol).transpose()?;
    if let Some(s) = &symbol {
        if s.k2 != g.k2 || s.parity != g.parity || &s.lambda != lambda || &s.mu != mu {
            bail!(squant_core::Error::Invalid(
                "symbol grade, parity or weights differ from the flags".into()
            ));
        }
    }
    let ns: Vec<u32> = match a.n {
        Some(n) => vec![n],
        None => (0..=g.k2).collect(),
    };
    let mut entries = Vec::new();
    let mut text = String::new();
    for n in ns {
        let spec = DivTermSpec::new(n, g.k2)?;
        let row = div_row(spec)?;
        let terms = div_terms(spec, lambda, mu, g.parity)?;
        let applied = symbol
            .as_ref()
            .map(|s| divergence_term(spec, s))
            .transpose()?;
        text += &format!(
            "n = {n}: e1 = {}, e2 = {}\n",
            mono_to_text(row.e1),
            row.e2.map_or("none".to_string(), mono_to_text)
        );
        for t in &terms {
            text += &format!(
                "  slot {} += {} * {}(F{})\n",
                t.slot,
                format_rational(&t.coeff),
                mono_to_text(t.source),
                t.component
            );
        }
        if let Some(op) = &applied {
            text += &format!("  = {}\n", op_to_text(op));
        }
        entries.push(json!({
            "n": n,
            "e1": mono_value(row.e1),
            "e2": row.e2.map(mono_value),
            "terms": terms.iter().map(|t| json!({
                "slot": t.slot,
                "component": t.component,
                "source": mono_value(t.source),
                "coeff": format_rational(&t.coeff),
            })).collect::<Vec<_>>(),
            "operator": applied.as_ref().map(|op| serde_json::to_value(operator_to_json(op))).transpose()?,
        }));
    }
    let payload = match f {
        Format::Json => value_string(&json!({
            "k2": g.k2,
            "lambda": format_rational(lambda),
            "mu": format_rational(mu),
            "parity": g.parity.name(),
            "divergences": entries,
        })),
        Format::Latex | Format::Text => text,
    };
    Ok(Outcome::ok(payload))
}

fn recurrences(a: &RecurrenceArgs, f: Format) -> Result<Outcome> {
    let g = &a.grade;
    let report = recurrence_report(g.k2, &g.weights.lambda, &g.weights.mu, g.parity)?;
    let payload = match f {
        Format::Json => to_json_string(&report),
        Format::Latex | Format::Text => {
            let mut out = format!("same solution set: {}\n", report.same_solution_set);
            out += &lines(report.rows.iter().map(|r| {
                format!(
                    "{}: oracle residual {}, closed-form residual {}, completed {}",
                    r.row,
                    r.oracle,
                    r.closed_form.as_deref().unwrap_or("undefined"),
                    r.completed
                )
            }));
            out += &lines(report.values.iter().map(|v| {
                format!(
                    "{}: oracle {}, closed form {}",
                    v.index,
                    v.oracle.as_deref().unwrap_or("-"),
                    v.closed_form.as_deref().unwrap_or("undefined")
                )
            }));
            out
        }
    };
    Ok(Outcome::ok(payload))
}

fn resonance(a: &ResonanceArgs, f: Format) -> Result<Outcome> {
    let scan = resonance_scan(&quantizer(&a.solver), a.k2, &a.lambda);
    let payload = match f {
        Format::Json => to_json_string(&scan),
        Format::Latex | Format::Text => lines(scan.iter().map(|p| {
            format!(
                "mu - lambda = {}: even {}, odd {}",
                p.delta,
                if p.even_unique { "unique" } else { "resonant" },
                if p.odd_unique { "unique" } else { "resonant" }
            )
        })),
    };
    Ok(Outcome::ok(payload))
}
