//! Command implementations. Each returns the full stdout text, any
//! diagnostics for stderr and the exit code, so the output is assembled
//! deterministically before anything is printed.

use std::fmt::Write as _;
use std::path::Path;

use moonshine_core::classes::{self, load_family, ClassTable};
use moonshine_core::lie::{b_blocks, build_b, check_b_conditions, simple_roots, witt_check};
use moonshine_core::modular::J_series;
use moonshine_core::product::verify_product;
use moonshine_core::recursion::{determinacy_audit, propagate_solve, solve_with_seeds, Mode, RecursionError};
use moonshine_core::table::parse_table;
use moonshine_core::{Rational, CATALOG};

use crate::Command;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INPUT: u8 = 2;

/// How many mismatches are listed before the rest are only counted.
const MISMATCH_LIMIT: usize = 20;

#[derive(Debug, Default)]
pub struct Report {
    pub out: String,
    pub err: String,
    pub code: u8,
}

impl Report {
    fn input_error(message: impl std::fmt::Display) -> Self {
        Report {
            out: String::new(),
            err: format!("error: {message}\n"),
            code: INPUT,
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.out.push_str(text.as_ref());
        self.out.push('\n');
    }

    fn verdict(&mut self, pass: bool) {
        self.line(if pass { "VERDICT: PASS" } else { "VERDICT: FAIL" });
        self.code = if pass { PASS } else { FAIL };
    }
}

pub fn run(command: &Command) -> Report {
    match command {
        Command::Jexpand { order } => jexpand(*order),
        Command::VerifyProduct { pmax, qmax } => product(*pmax, *qmax),
        Command::VerifyEp {
            table,
            class,
            imax,
            jmax,
        } => verify_ep(table.as_deref(), class, *imax, *jmax),
        Command::Derive {
            table,
            max,
            audit,
            class,
        } => {
            if *audit {
                audit_cmd(table.as_deref(), *max)
            } else {
                derive(table.as_deref(), *max, class.as_deref())
            }
        }
        Command::Compare { table, max } => compare(table.as_deref(), *max),
        Command::Witt { mmax, nmax } => witt(*mmax, *nmax),
        Command::Bmatrix { size, blocks } => bmatrix(*size, *blocks),
        Command::SimpleRoots { nmax } => roots(*nmax),
    }
}

fn table_flag(table: Option<&Path>) -> String {
    table.map(|p| format!(" --table {}", p.display())).unwrap_or_default()
}

/// Loads a table file, or the shipped catalog when none is given. Power map
/// inconsistencies are reported on stderr but do not stop the command.
fn load_table(path: Option<&Path>, report: &mut Report) -> Result<ClassTable, Report> {
    let (text, label) = match path {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => (t, p.display().to_string()),
            Err(e) => return Err(Report::input_error(format!("{}: {e}", p.display()))),
        },
        None => (CATALOG.to_string(), "catalog".to_string()),
    };
    let table = parse_table(&text).map_err(|e| Report::input_error(format!("{label}: {e}")))?;
    for w in table.power_map_warnings() {
        writeln!(report.err, "warning: power map: {w}").unwrap();
    }
    Ok(table)
}

fn jexpand(order: i64) -> Report {
    if order < -1 {
        return Report::input_error(format!("--order must be at least -1 (got {order})"));
    }
    let j = J_series(order).expect("J expansion");
    let mut report = Report::default();
    for n in -1..=order {
        report.line(format!("{n}\t{}", j.int_coeff(n).expect("integral")));
    }
    report
}

fn list_mismatches(report: &mut Report, mismatches: &[((i64, i64), Rational, Rational)], lhs: &str, rhs: &str) {
    writeln!(report.out, "mismatches: {}", mismatches.len()).unwrap();
    for ((i, j), a, b) in mismatches.iter().take(MISMATCH_LIMIT) {
        writeln!(report.out, "  p^{i} q^{j}: {lhs} {a}, {rhs} {b}").unwrap();
    }
    if mismatches.len() > MISMATCH_LIMIT {
        writeln!(report.out, "  ... {} more", mismatches.len() - MISMATCH_LIMIT).unwrap();
    }
}

fn product(pmax: i64, qmax: i64) -> Report {
    if pmax < 1 || qmax < 1 {
        return Report::input_error(format!("--pmax and --qmax must be at least 1 (got {pmax}, {qmax})"));
    }
    let result = match verify_product(pmax, qmax) {
        Ok(r) => r,
        Err(e) => return Report::input_error(e),
    };
    let mut report = Report::default();
    report.line(format!("# moonshine verify-product --pmax {pmax} --qmax {qmax}"));
    report.line("identity: p(J(p) - J(q)) = (1 - p/q) prod_{i,j>=1} (1 - p^i q^j)^c(ij)");
    report.line(format!("window: p^0..p^{pmax} x q^-{pmax}..q^{qmax}"));
    report.line(format!("coefficients compared: {}", (pmax + 1) * (pmax + qmax + 1)));
    list_mismatches(&mut report, &result.mismatches, "lhs", "rhs");
    report.verdict(result.passes());
    report
}

fn verify_ep(table: Option<&Path>, class: &str, imax: i64, jmax: i64) -> Report {
    if imax < 1 || jmax < 1 {
        return Report::input_error(format!("--imax and --jmax must be at least 1 (got {imax}, {jmax})"));
    }
    let mut report = Report::default();
    let t = match load_table(table, &mut report) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let Some(g) = t.id(class) else {
        return Report::input_error(format!("unknown class {class}"));
    };
    let result = load_family(&t, imax * jmax).and_then(|f| classes::verify_ep(&f, g, imax, jmax));
    let ep = match result {
        Ok(ep) => ep,
        Err(e) => return Report::input_error(e),
    };
    report.line(format!(
        "# moonshine verify-ep{} --class {class} --imax {imax} --jmax {jmax}",
        table_flag(table)
    ));
    report.line("identity: sum_k (1/k) Psi^k(u-) = sum_k (1/k) U^k, traced");
    report.line(format!("class: {class}"));
    report.line(format!("window: p^1..p^{imax} x q^1..q^{jmax}"));
    list_mismatches(&mut report, &ep.mismatches, "lhs", "rhs");
    report.verdict(ep.passes());
    report
}

fn derive(table: Option<&Path>, max: i64, class: Option<&str>) -> Report {
    if max < 0 {
        return Report::input_error(format!("--max must be non-negative (got {max})"));
    }
    let mut report = Report::default();
    let t = match load_table(table, &mut report) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let columns: Vec<usize> = match class {
        Some(name) => match t.id(name) {
            Some(g) => vec![g],
            None => return Report::input_error(format!("unknown class {name}")),
        },
        None => t.ids().collect(),
    };
    let outcome = match propagate_solve(&t, max) {
        Ok(o) => o,
        Err(e @ (RecursionError::MissingSeeds(_) | RecursionError::Class(_))) => return Report::input_error(e),
        Err(e) => {
            writeln!(report.err, "contradiction: {e}").unwrap();
            report.code = FAIL;
            return report;
        }
    };
    if columns.len() > 1 {
        let names: Vec<&str> = columns.iter().map(|&g| t.name(g)).collect();
        report.line(format!("n\t{}", names.join("\t")));
    }
    for n in -1..=max {
        let cells: Vec<String> = columns
            .iter()
            .map(|&g| outcome.family.get(g, n).map_or("?".to_string(), |v| v.to_string()))
            .collect();
        report.line(format!("{n}\t{}", cells.join("\t")));
    }
    let unresolved: Vec<String> = outcome
        .unresolved
        .iter()
        .filter(|u| columns.contains(&u.0))
        .map(|&(g, n)| format!("{}({n})", t.name(g)))
        .collect();
    if !unresolved.is_empty() {
        writeln!(report.err, "unresolved: {}", unresolved.join(" ")).unwrap();
        report.code = FAIL;
    }
    report
}

fn audit_cmd(table: Option<&Path>, max: i64) -> Report {
    if max < 0 {
        return Report::input_error(format!("--max must be non-negative (got {max})"));
    }
    let mut report = Report::default();
    let t = match load_table(table, &mut report) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let given = t.seeds().keys().copied().collect();
    let audit = match determinacy_audit(&t, max, &given) {
        Ok(a) => a,
        Err(e) => return Report::input_error(e),
    };
    let join = |ns: Vec<i64>| ns.iter().map(i64::to_string).collect::<Vec<_>>();
    if t.len() == 1 {
        let mut words = vec!["unresolved:".to_string()];
        words.extend(join(audit.for_class(0)));
        report.line(words.join(" "));
    } else {
        for g in t.ids() {
            let mut words = vec![format!("unresolved {}:", t.name(g))];
            words.extend(join(audit.for_class(g)));
            report.line(words.join(" "));
        }
    }
    report
}

fn compare(table: Option<&Path>, max: i64) -> Report {
    if max < 1 {
        return Report::input_error(format!("--max must be at least 1 (got {max})"));
    }
    let mut report = Report::default();
    let t = match load_table(table, &mut report) {
        Ok(t) => t,
        Err(r) => return r,
    };
    let derived = t
        .solver_seeds()
        .map_err(RecursionError::from)
        .and_then(|seeds| solve_with_seeds(&t, &seeds, max, Mode::Lenient));
    let derived = match derived {
        Ok(d) => d,
        Err(e) => return Report::input_error(e),
    };
    report.line(format!("# moonshine compare{} --max {max}", table_flag(table)));
    report.line(format!("window: n = -1..{max}"));
    let mut pass = true;
    for g in t.ids() {
        let name = t.name(g);
        let expected = match t.expand_source(g, max) {
            Ok(Some(s)) => s,
            Ok(None) => {
                report.line(format!("{name}: no series to compare"));
                continue;
            }
            Err(e) => return Report::input_error(e),
        };
        let first = (-1..=max).find_map(|n| {
            let want = expected.int_coeff(n).expect("integral expansion");
            match derived.family.get(g, n) {
                Some(v) if v == want => None,
                got => Some((n, got, want)),
            }
        });
        match first {
            None => report.line(format!("{name}: identical")),
            Some((n, got, want)) => {
                pass = false;
                let got = got.map_or("unresolved".to_string(), |v| v.to_string());
                report.line(format!(
                    "{name}: first difference at n = {n}: derived {got}, expanded {want}"
                ));
            }
        }
    }
    report.line(format!("solver conflicts: {}", derived.conflicts.len()));
    report.verdict(pass);
    report
}

fn grid(report: &mut Report, title: &str, mmax: i64, nmax: i64, cell: impl Fn(i64, i64) -> String) {
    report.line(title);
    let head: Vec<String> = (1..=nmax).map(|n| n.to_string()).collect();
    report.line(format!("m\\n\t{}", head.join("\t")));
    for m in 1..=mmax {
        let row: Vec<String> = (1..=nmax).map(|n| cell(m, n)).collect();
        report.line(format!("{m}\t{}", row.join("\t")));
    }
}

fn show<T: ToString>(value: Option<&T>) -> String {
    value.map_or("?".to_string(), ToString::to_string)
}

fn witt(mmax: i64, nmax: i64) -> Report {
    if mmax < 1 || nmax < 1 {
        return Report::input_error(format!("--mmax and --nmax must be at least 1 (got {mmax}, {nmax})"));
    }
    let c = J_series(mmax * nmax).expect("J expansion");
    let check = match witt_check(mmax, nmax, &c) {
        Ok(w) => w,
        Err(e) => return Report::input_error(e),
    };
    let mut report = Report::default();
    report.line(format!("# moonshine witt --mmax {mmax} --nmax {nmax}"));
    report.line(format!("window: m = 1..{mmax}, n = 1..{nmax}"));
    grid(&mut report, "dim L(U)_(m,n):", mmax, nmax, |m, n| {
        show(check.free_dims.get(m, n))
    });
    grid(&mut report, "c(mn):", mmax, nmax, |m, n| {
        show(check.root_dims.get(m, n))
    });
    let cells = |label: &str, list: &[(i64, i64)]| {
        let mut words = vec![label.to_string(), list.len().to_string()];
        words.extend(list.iter().map(|(m, n)| format!("({m},{n})")));
        words.join(" ")
    };
    report.line(cells("mismatches:", &check.mismatches));
    report.line(cells("product oracle mismatches:", &check.oracle_mismatches));
    report.verdict(check.passes());
    report
}

fn bmatrix(size: usize, blocks: Option<i64>) -> Report {
    if size == 0 {
        return Report::input_error("--size must be at least 1");
    }
    if blocks.is_some_and(|n| n < 1) {
        return Report::input_error("--blocks must be at least 1");
    }
    let b = match build_b(size) {
        Ok(b) => b,
        Err(e) => return Report::input_error(e),
    };
    let mut report = Report::default();
    let blocks_flag = blocks.map(|n| format!(" --blocks {n}")).unwrap_or_default();
    report.line(format!("# moonshine bmatrix --size {size}{blocks_flag}"));
    let roots: Vec<String> = b.roots.iter().map(ToString::to_string).collect();
    report.line(format!("roots: {}", roots.join(" ")));
    for row in &b.entries {
        let row: Vec<String> = row.iter().map(i64::to_string).collect();
        report.line(row.join("\t"));
    }
    if let Some(n) = blocks {
        report.line("blocks:");
        for (label, row) in b_blocks(n) {
            let row: Vec<String> = row.iter().map(i64::to_string).collect();
            report.line(format!("(1,{label})\t{}", row.join("\t")));
        }
    }
    let cond = check_b_conditions(&b.to_rational());
    let ok = |x: bool| if x { "holds" } else { "fails" };
    report.line(format!("B1 (symmetric): {}", ok(cond.b1())));
    report.line(format!("B2 (off-diagonal <= 0): {}", ok(cond.b2())));
    report.line(format!("B3 (2a_ij/a_ii integral when a_ii > 0): {}", ok(cond.b3())));
    report.verdict(cond.holds());
    report
}

fn roots(nmax: i64) -> Report {
    if nmax < -1 {
        return Report::input_error(format!("--nmax must be at least -1 (got {nmax})"));
    }
    let c = J_series(nmax.max(1)).expect("J expansion");
    match simple_roots(nmax, &c) {
        Ok(list) => Report {
            out: format!("{list}\n"),
            ..Report::default()
        },
        Err(e) => Report::input_error(e),
    }
}
