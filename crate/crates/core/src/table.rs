//! The line-oriented class table format.
//!
//! ```text
//! # comment
//! class 2B order 2
//! identity 1A
//! power 2B 2 1A
//! seed 2B 1 276
//! eta 2B 1 1:24 2:-24
//! ```
//!
//! Classes may be referenced before their `class` line. A class's recipe is
//! the sum of its `eta` lines with the constant term removed.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::classes::{ClassError, ClassTable};
use crate::modular::EtaMonomial;
use crate::series::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Class { line: usize, source: ClassError },
    #[error(transparent)]
    Invalid(#[from] ClassError),
}

fn syntax(line: usize, message: impl Into<String>) -> TableError {
    TableError::Syntax {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, TableError> {
    s.parse().map_err(|_| syntax(line, format!("invalid {what} '{s}'")))
}

/// Parses and validates a table.
pub fn parse_table(text: &str) -> Result<ClassTable, TableError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            (
                i + 1,
                l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>(),
            )
        })
        .filter(|(_, w)| !w.is_empty())
        .collect();

    let mut table = ClassTable::new();
    for (line, words) in &lines {
        if words[0] == "class" {
            let [_, name, "order", order] = words[..] else {
                return Err(syntax(*line, "expected 'class <name> order <int>'"));
            };
            let order: u32 = number(*line, "order", order)?;
            table
                .add_class(name, order)
                .map_err(|source| TableError::Class { line: *line, source })?;
        }
    }

    let mut identities = 0;
    for (line, words) in &lines {
        let line = *line;
        let class = |name: &str| {
            table.id(name).ok_or_else(|| TableError::Class {
                line,
                source: ClassError::UnknownClass(name.to_string()),
            })
        };
        match words[0] {
            "class" => {}
            "identity" => {
                let [_, name] = words[..] else {
                    return Err(syntax(line, "expected 'identity <name>'"));
                };
                let g = class(name)?;
                identities += 1;
                table.set_identity(g);
            }
            "power" => {
                let [_, from, k, to] = words[..] else {
                    return Err(syntax(line, "expected 'power <name> <k> <name>'"));
                };
                let k: u32 = number(line, "power", k)?;
                if k == 0 {
                    return Err(syntax(line, "power must be at least 1"));
                }
                let (g, h) = (class(from)?, class(to)?);
                table.set_power(g, k, h);
            }
            "seed" => {
                let [_, name, n, value] = words[..] else {
                    return Err(syntax(line, "expected 'seed <name> <n> <int>'"));
                };
                let n: i64 = number(line, "index", n)?;
                let value: BigInt = number(line, "integer", value)?;
                let g = class(name)?;
                table
                    .set_seed(g, n, value)
                    .map_err(|source| TableError::Class { line, source })?;
            }
            "eta" => {
                if words.len() < 4 {
                    return Err(syntax(line, "expected 'eta <name> <coeff> <k>:<e> ...'"));
                }
                let g = class(words[1])?;
                let coeff: Rational = number(line, "coefficient", words[2])?;
                let mut factors = Vec::new();
                for f in &words[3..] {
                    let (k, e) = f
                        .split_once(':')
                        .ok_or_else(|| syntax(line, format!("invalid factor '{f}'")))?;
                    let k: u32 = number(line, "eta scale", k)?;
                    if k == 0 {
                        return Err(syntax(line, "eta scale must be positive"));
                    }
                    factors.push((k, number::<i64>(line, "eta exponent", e)?));
                }
                let monomial = EtaMonomial::new(coeff, factors);
                monomial
                    .leading_exponent()
                    .map_err(|e| TableError::Class { line, source: e.into() })?;
                table.add_eta_monomial(g, monomial);
            }
            other => return Err(syntax(line, format!("unknown directive '{other}'"))),
        }
    }
    if identities != 1 {
        return Err(ClassError::IdentityCount(identities).into());
    }
    table.validate()?;
    Ok(table)
}

/// Writes a table that [`parse_table`] reads back to an equal value.
pub fn serialize_table(table: &ClassTable) -> String {
    let mut out = String::new();
    for c in table.classes() {
        writeln!(out, "class {} order {}", c.name, c.order).unwrap();
    }
    if let Some(e) = table.identity() {
        writeln!(out, "identity {}", table.name(e)).unwrap();
    }
    for (&(g, k), &h) in table.explicit_powers() {
        writeln!(out, "power {} {k} {}", table.name(g), table.name(h)).unwrap();
    }
    for (&(g, n), v) in table.seeds() {
        writeln!(out, "seed {} {n} {v}", table.name(g)).unwrap();
    }
    for (&g, recipe) in table.recipes() {
        for m in &recipe.monomials {
            write!(out, "eta {} {}", table.name(g), m.coeff).unwrap();
            for (k, e) in &m.factors {
                write!(out, " {k}:{e}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_parses() {
        let t = parse_table(crate::CATALOG).unwrap();
        let names: Vec<&str> = t.classes().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["1A", "2B", "3B", "4C"]);
        assert_eq!(t.identity(), t.id("1A"));
        assert_eq!(t.recipes().len(), 3);
    }

    #[test]
    fn forward_references_and_comments() {
        let text = "identity 1A # the trivial class\npower 2A 2 1A\nclass 2A order 2\nclass 1A order 1\n";
        let t = parse_table(text).unwrap();
        assert_eq!(t.power(t.id("2A").unwrap(), 2).unwrap(), t.id("1A").unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "class 1A order 1\nidentity 1A\nseed 3C 1 5\n";
        assert!(matches!(
            parse_table(bad),
            Err(TableError::Class {
                line: 3,
                source: ClassError::UnknownClass(_)
            })
        ));
        let bad = "class 1A order 1\nidentity 1A\nclass 2A order 2\neta 2A 1 1:1\n";
        assert!(matches!(parse_table(bad), Err(TableError::Class { line: 4, .. })));
        let bad = "class 1A order 1\nidentity 1A\nfrobnicate\n";
        assert!(matches!(parse_table(bad), Err(TableError::Syntax { line: 3, .. })));
        let bad = "class 1A order 1\nclass 2A order 2\nidentity 1A\nidentity 2A\n";
        assert_eq!(parse_table(bad), Err(TableError::Invalid(ClassError::IdentityCount(2))));
        let bad = "class 1A order 1\nidentity 1A\nclass 3A order 3\n";
        assert!(matches!(
            parse_table(bad),
            Err(TableError::Invalid(ClassError::NotPowerClosed { .. }))
        ));
        let bad = "class 1A order 1\nidentity 1A\nseed 1A 0 1\n";
        assert!(matches!(parse_table(bad), Err(TableError::Class { line: 3, .. })));
    }

    #[test]
    fn catalog_round_trip() {
        let t = parse_table(crate::CATALOG).unwrap();
        assert_eq!(parse_table(&serialize_table(&t)).unwrap(), t);
    }

    fn arb_table() -> impl Strategy<Value = String> {
        let seeds = proptest::collection::vec((0usize..3, 1i64..40, -10_000i64..10_000), 0..6);
        let coeffs = proptest::collection::vec((1i64..5, 1i64..4), 1..3);
        (seeds, coeffs).prop_map(|(seeds, coeffs)| {
            let names = ["1A", "2A", "3A"];
            let mut s = String::from("class 1A order 1\nclass 2A order 2\nclass 3A order 3\nidentity 1A\n");
            s.push_str("power 2A 2 1A\npower 3A 2 3A\n");
            for (g, n, v) in seeds {
                s.push_str(&format!("seed {} {n} {v}\n", names[g]));
            }
            for (num, den) in coeffs {
                s.push_str(&format!("eta 2A {num}/{den} 1:24 2:-24\n"));
            }
            s
        })
    }

    proptest! {
        #[test]
        fn round_trip(text in arb_table()) {
            let t = parse_table(&text).unwrap();
            let again = parse_table(&serialize_table(&t)).unwrap();
            prop_assert_eq!(again, t);
        }
    }
}
