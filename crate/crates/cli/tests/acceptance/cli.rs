//! Criterion 10: the command line, driven as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use squant_core::format::{
    from_json_str, operator_to_json, symbol_to_json, to_json_string, OperatorJson, SymbolJson,
};
use squant_core::quantization::{
    CoefficientTable, CoefficientTableJson, DiffReport, EquivarianceReport, Quantizer,
    RecurrenceReport, ResonanceProbe,
};
use squant_core::rational::{parse_rational, q};
use squant_core::{osp_basis, Error, Symbol};

use super::Check;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn squant(args: &[&str]) -> Run {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_squant"))
        .args(args)
        .env_remove("SQUANT_PROBE_DEGREE")
        .env_remove("SQUANT_FORMAT")
        .env_remove("SQUANT_GENERATORS")
        .env_remove("SQUANT_SHAPE")
        .output()
        .expect("squant binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 output"),
    }
}

/// Runs twice; both runs must agree byte for byte and exit with `code`.
fn stable(args: &[&str], code: i32) -> Result<String, String> {
    let a = squant(args);
    let b = squant(args);
    if a.code != code {
        return Err(format!(
            "`squant {}` exited {} (expected {code}): {}",
            args.join(" "),
            a.code,
            a.stderr.trim()
        ));
    }
    if a.stdout != b.stdout || a.code != b.code {
        return Err(format!("`squant {}` is not deterministic", args.join(" ")));
    }
    Ok(a.stdout)
}

/// Parses with the schema type and re-serializes; the bytes must come back unchanged.
fn round_trip<T>(what: &str, text: &str) -> Result<T, String>
where
    T: serde::Serialize + for<'de> serde::Deserialize<'de>,
{
    let value: T = from_json_str(text).map_err(|e| format!("{what}: {e}"))?;
    if to_json_string(&value) != text {
        return Err(format!("{what}: JSON round trip is lossy"));
    }
    Ok(value)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("temp file is writable");
    path.to_str().expect("utf-8 path").to_string()
}

fn symbol_of(f1: &str, f2: &str, k2: u32, lambda: &str, mu: &str) -> Symbol {
    let f = |s| squant_core::format::parse_function(s).expect("valid function");
    Symbol::new(
        f(f1),
        f(f2),
        k2,
        parse_rational(lambda).unwrap(),
        parse_rational(mu).unwrap(),
    )
    .expect("valid symbol")
}

pub fn command_line() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = dir.path();
    let mut commands = 0;

    // quantize: symbol JSON in, operator JSON out, equal to the library result.
    let s = symbol_of("x^2 + 1/2*xi1*xi2", "x*xi1*xi2 - 3", 2, "1/3", "7/3");
    let sym_path = write(dir, "symbol.json", &to_json_string(&symbol_to_json(&s)));
    let op_text = stable(&["quantize", &sym_path], 0)?;
    commands += 1;
    let op_json: OperatorJson = round_trip("quantize", &op_text)?;
    let lib_op = squant_core::quantization::quantize_oracle(&s).map_err(|e| e.to_string())?;
    if op_json != operator_to_json(&lib_op) {
        return Err("quantize output differs from the library".into());
    }
    let closed_text = stable(&["quantize", "--method", "closed", &sym_path], 0)?;
    commands += 1;
    if closed_text != op_text {
        return Err("closed and oracle quantizations differ on the command line".into());
    }
    let op_path = write(dir, "operator.json", &op_text);

    // symbol: operator JSON back to the graded tuple, whose top entry is the input.
    let tuple: Vec<SymbolJson> = round_trip("symbol", &stable(&["symbol", &op_path], 0)?)?;
    let principal: SymbolJson = round_trip(
        "symbol --principal",
        &stable(&["symbol", "--principal", &op_path], 0)?,
    )?;
    commands += 2;
    if tuple.first() != Some(&symbol_to_json(&s)) || principal != symbol_to_json(&s) {
        return Err("symbol did not recover the quantized symbol".into());
    }
    if tuple.iter().skip(1).any(|t| t.f1 != "0" || t.f2 != "0") {
        return Err("quantization of a single symbol has lower symbols".into());
    }

    // act on an operator, a symbol and a density.
    let acted: OperatorJson = round_trip(
        "act --operator",
        &stable(
            &["act", "--hamiltonian", "x*xi1", "--operator", &op_path],
            0,
        )?,
    )?;
    let h =
        squant_core::ContactHamiltonian::new(squant_core::format::parse_function("x*xi1").unwrap())
            .map_err(|e| e.to_string())?;
    if acted != operator_to_json(&h.operator_action(&lib_op).map_err(|e| e.to_string())?) {
        return Err("act --operator differs from the library".into());
    }
    let acted: SymbolJson = round_trip(
        "act --symbol",
        &stable(&["act", "--hamiltonian", "x*xi1", "--symbol", &sym_path], 0)?,
    )?;
    if acted != symbol_to_json(&s.act(&h)) {
        return Err("act --symbol differs from the library".into());
    }
    let density = stable(
        &[
            "act",
            "--hamiltonian",
            "x^2",
            "--density",
            "x*xi2 + 1",
            "--lambda",
            "-1/2",
        ],
        0,
    )?;
    round_trip::<Value>("act --density", &density)?;
    commands += 3;

    // solve-coeffs, div, recurrences, resonance.
    let solved: Value = round_trip(
        "solve-coeffs",
        &stable(
            &[
                "solve-coeffs",
                "--k2",
                "3",
                "--lambda",
                "1/7",
                "--mu",
                "23/11",
                "--parity",
                "odd",
            ],
            0,
        )?,
    )?;
    let table_json: CoefficientTableJson = serde_json::from_value(solved["table"].clone())
        .map_err(|e| format!("solve-coeffs table: {e}"))?;
    round_trip::<CoefficientTableJson>("table", &to_json_string(&table_json))?;
    let diff: DiffReport = serde_json::from_value(solved["diff"].clone())
        .map_err(|e| format!("solve-coeffs diff: {e}"))?;
    round_trip::<DiffReport>("diff", &to_json_string(&diff))?;
    let table = CoefficientTable::from_json(&table_json).map_err(|e| e.to_string())?;
    stable(
        &[
            "div", "--k2", "4", "--lambda", "1/7", "--mu", "23/11", "--symbol", &sym_path,
        ],
        3,
    )?;
    round_trip::<Value>(
        "div",
        &stable(
            &[
                "div", "--k2", "2", "--lambda", "1/3", "--mu", "7/3", "--symbol", &sym_path,
            ],
            0,
        )?,
    )?;
    round_trip::<RecurrenceReport>(
        "recurrences",
        &stable(
            &[
                "recurrences",
                "--k2",
                "2",
                "--lambda",
                "1/7",
                "--mu",
                "23/11",
            ],
            0,
        )?,
    )?;
    round_trip::<Vec<ResonanceProbe>>(
        "resonance",
        &stable(&["resonance", "--k2", "2", "--lambda", "1/3"], 0)?,
    )?;
    commands += 6;

    // check-equivariance: exit codes follow the library verdicts.
    let library = |k2: u32, lambda: &str, mu: &str, table: Option<CoefficientTable>| {
        let qz = Quantizer::default();
        if let Some(t) = table {
            qz.insert_table(t);
        }
        qz.check_equivariance(
            k2,
            &parse_rational(lambda).unwrap(),
            &parse_rational(mu).unwrap(),
            &osp_basis(),
            4,
        )
    };
    let expected_code = |r: &Result<EquivarianceReport, Error>| match r {
        Ok(rep) if rep.passed() => 0,
        Ok(_) => 4,
        Err(Error::Resonant(_)) => 2,
        Err(Error::IntermediateSingularity(_)) => 5,
        Err(_) => 3,
    };
    let mut perturbed = table.clone();
    if let Some(v) = perturbed.entries.values_mut().next() {
        *v += q(1, 1);
    }
    let bad_path = write(dir, "perturbed.json", &to_json_string(&perturbed.to_json()));
    let cases: Vec<(Vec<&str>, Result<EquivarianceReport, Error>)> = vec![
        (
            vec![
                "check-equivariance",
                "--k2",
                "2",
                "--lambda",
                "1/3",
                "--mu",
                "7/3",
                "--generators",
                "osp",
            ],
            library(2, "1/3", "7/3", None),
        ),
        (
            vec![
                "check-equivariance",
                "--k2",
                "3",
                "--lambda",
                "1/7",
                "--mu",
                "23/11",
                "--table",
                &bad_path,
            ],
            library(3, "1/7", "23/11", Some(perturbed.clone())),
        ),
        (
            vec![
                "check-equivariance",
                "--k2",
                "2",
                "--lambda",
                "1/3",
                "--mu",
                "4/3",
            ],
            library(2, "1/3", "4/3", None),
        ),
    ];
    let mut codes = Vec::new();
    for (args, lib) in &cases {
        let want = expected_code(lib);
        let out = stable(args, want)?;
        if let Ok(rep) = lib {
            let got: EquivarianceReport = round_trip("check-equivariance", &out)?;
            if &got != rep {
                return Err("check-equivariance report differs from the library".into());
            }
        }
        codes.push(want.to_string());
        commands += 1;
    }
    if codes != ["0", "4", "2"] {
        return Err(format!(
            "check-equivariance cases gave exit codes {codes:?}, expected 0, 4, 2"
        ));
    }

    // Error exits.
    let resonant = squant(&[
        "quantize", "--k2", "2", "--f1", "x", "--lambda", "1/3", "--mu", "4/3",
    ]);
    if resonant.code != 2 || !resonant.stderr.contains("0, 1/2, 1, 3/2, 2") {
        return Err(format!(
            "resonant quantize: exit {}, {}",
            resonant.code,
            resonant.stderr.trim()
        ));
    }
    let parse = squant(&[
        "quantize", "--k2", "1", "--f1", "x^", "--lambda", "1/3", "--mu", "7/3",
    ]);
    let flag = squant(&["quantize", "--no-such-flag"]);
    if parse.code != 3 || !parse.stderr.contains("offset 2") || flag.code != 3 {
        return Err(format!(
            "parse/config errors exit {} and {}",
            parse.code, flag.code
        ));
    }
    let zero: OperatorJson = round_trip(
        "quantize k2 = 0",
        &stable(
            &[
                "quantize",
                "--k2",
                "0",
                "--f1",
                "x^2*xi1*xi2",
                "--lambda",
                "1/3",
                "--mu",
                "7/3",
            ],
            0,
        )?,
    )?;
    if zero.terms.len() != 1 {
        return Err("grade-0 quantization should be a single multiplication term".into());
    }
    Ok(format!(
        "{commands} commands deterministic and lossless; exit codes 0/2/3/4 as expected"
    ))
}
