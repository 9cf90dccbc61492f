//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. All comparisons are exact.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use moonshine_core::classes::{load_family, verify_ep, ClassTable};
use moonshine_core::lie::{b_blocks, build_b, check_b_conditions, witt_check};
use moonshine_core::modular::{delta, eisenstein, J_series};
use moonshine_core::product::verify_product;
use moonshine_core::recursion::{
    closed_form_c, cross_check_closed_form, determinacy_audit, propagate_solve, solve_with_seeds, Mode,
};
use moonshine_core::table::parse_table;
use moonshine_core::{Rational, UniSeries, CATALOG};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn catalog() -> ClassTable {
    parse_table(CATALOG).expect("catalog parses")
}

fn monster_only() -> ClassTable {
    parse_table("class 1A order 1\nidentity 1A\n").unwrap()
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn j_oracles() -> Outcome {
    let order = 30;
    let inv_delta = delta(order + 2).unwrap().invert(order).unwrap();
    let via_e4 = eisenstein(4, order + 1).unwrap().pow(3).mul(&inv_delta);
    let via_e6 = eisenstein(6, order + 1)
        .unwrap()
        .pow(2)
        .mul(&inv_delta)
        .add(&UniSeries::monomial(0, int(1728), order))
        .unwrap();
    ensure(via_e4.hi() >= order && via_e6.hi() >= order, || {
        "window shorter than q^30".into()
    })?;
    if let Some(n) = via_e4.first_mismatch(&via_e6) {
        return Err(format!("E4^3/Delta and E6^2/Delta + 1728 differ at q^{n}"));
    }
    let big_j = J_series(order).unwrap();
    ensure(big_j.coeff(0) == Some(int(0)), || "constant term of J is not 0".into())?;
    ensure(big_j.coeff(1) == Some(int(196884)), || "c(1) != 196884".into())?;
    ensure(big_j.coeff(2) == Some(int(21493760)), || "c(2) != 21493760".into())?;
    Ok("two routes agree to q^30; c(0)=0, c(1)=196884, c(2)=21493760".into())
}

fn product_formula() -> Outcome {
    for w in [8, 12] {
        let r = verify_product(w, w).map_err(|e| e.to_string())?;
        if let Some(((i, j), a, b)) = r.mismatches.first() {
            return Err(format!("{w}x{w}: first mismatch at p^{i} q^{j}: {a} vs {b}"));
        }
    }
    Ok("P=Q=8 and P=Q=12 exact".into())
}

fn euler_poincare() -> Outcome {
    let t = catalog();
    let f = load_family(&t, 100).map_err(|e| e.to_string())?;
    for (class, w) in [("1A", 10), ("2B", 6), ("3B", 6), ("4C", 6)] {
        let g = t.id(class).unwrap();
        let r = verify_ep(&f, g, w, w).map_err(|e| e.to_string())?;
        if let Some(((i, j), a, b)) = r.mismatches.first() {
            return Err(format!("{class} {w}x{w}: first mismatch at ({i},{j}): {a} vs {b}"));
        }
    }
    Ok("1A on 10x10; 2B, 3B, 4C on 6x6".into())
}

fn closed_form() -> Outcome {
    let t = monster_only();
    let f = load_family(&t, 60).map_err(|e| e.to_string())?;
    let report = cross_check_closed_form(&f, 60);
    if let Some(bad) = report.failures().next() {
        return Err(format!(
            "n = {} via {:?}: {:?} vs {}",
            bad.n, bad.factors, bad.computed, bad.expected
        ));
    }
    let composites: BTreeSet<i64> = report.checks.iter().map(|c| c.n).collect();
    let expected: BTreeSet<i64> = (4..=60).filter(|n| (2..*n).any(|d| n % d == 0)).collect();
    ensure(composites == expected, || {
        "not every composite n <= 60 was checked".into()
    })?;
    let twelve: Vec<_> = report.checks.iter().filter(|c| c.n == 12).map(|c| c.factors).collect();
    ensure(twelve == [(2, 6), (3, 4)], || format!("12 checked via {twelve:?}"))?;
    let c = |n| Rational::from_integer(f.get(0, n).unwrap());
    let half = Rational::new(1.into(), 2.into());
    let four = c(3) + &half * c(1) * c(1) - &half * c(1);
    let computed = Rational::from_integer(closed_form_c(&f, 0, 2, 2).map_err(|e| e.to_string())?);
    ensure(computed == four && c(4) == four, || {
        "c(4) != c(3) + c(1)^2/2 - c(1)/2".into()
    })?;
    Ok(format!(
        "{} factorizations of composite n <= 60 agree",
        report.checks.len()
    ))
}

fn determinacy() -> Outcome {
    let t = monster_only();
    let audit = determinacy_audit(&t, 30, &BTreeSet::new()).map_err(|e| e.to_string())?;
    let found = audit.for_class(0);
    ensure(found == [1, 2, 3, 5], || format!("audit reports {found:?}"))?;
    let out = propagate_solve(&t, 100).map_err(|e| e.to_string())?;
    ensure(out.is_complete(), || format!("unresolved {:?}", out.unresolved))?;
    let j = J_series(100).unwrap();
    for n in -1..=100 {
        ensure(out.family.get(0, n) == j.int_coeff(n), || {
            format!("derived c({n}) differs from J")
        })?;
    }
    Ok("audit {1,2,3,5} at nmax 30; seeds reproduce J to n = 100".into())
}

fn cross_class() -> Outcome {
    let t = catalog();
    let seeds = t.solver_seeds().map_err(|e| e.to_string())?;
    let out = solve_with_seeds(&t, &seeds, 30, Mode::Strict).map_err(|e| e.to_string())?;
    for g in t.ids() {
        let s = t.expand_source(g, 30).map_err(|e| e.to_string())?.unwrap();
        for n in -1..=30 {
            ensure(out.family.get(g, n) == s.int_coeff(n), || {
                format!("{} differs at n = {n}", t.name(g))
            })?;
        }
    }
    Ok("1A, 2B, 3B, 4C derived from seeds match expansions to n = 30".into())
}

fn free_decomposition() -> Outcome {
    let c = J_series(25).unwrap();
    let w = witt_check(5, 5, &c).map_err(|e| e.to_string())?;
    ensure(w.mismatches.is_empty(), || {
        format!("dim L(U) != c(mn) at {:?}", w.mismatches)
    })?;
    ensure(w.oracle_mismatches.is_empty(), || {
        format!("product oracle differs at {:?}", w.oracle_mismatches)
    })?;
    Ok("dim L(U)_(m,n) = c(mn) for 1 <= m,n <= 5; product oracle agrees".into())
}

fn b_matrix() -> Outcome {
    let blocks = b_blocks(2);
    let diag: Vec<i64> = blocks.iter().enumerate().map(|(k, (_, row))| row[k]).collect();
    let off = vec![blocks[0].1[1], blocks[0].1[2], blocks[1].1[2]];
    ensure(diag == [2, -2, -4], || format!("diagonal blocks {diag:?}"))?;
    ensure(off == [0, -1, -3], || format!("off-diagonal blocks {off:?}"))?;
    let b = build_b(12).map_err(|e| e.to_string())?;
    let rep = check_b_conditions(&b.to_rational());
    ensure(rep.holds(), || format!("{rep:?}"))?;
    Ok("blocks 2, -2, -4 / 0, -1, -3; B1-B3 hold".into())
}

fn negative_controls() -> Outcome {
    // wrong seed
    let mut t = catalog();
    let e = t.id("1A").unwrap();
    let c4 = J_series(4).unwrap().int_coeff(4).unwrap();
    t.set_seed(e, 4, c4 + 1).unwrap();
    let f = load_family(&t, 36).unwrap();
    let r = verify_ep(&f, e, 6, 6).unwrap();
    let first = r.mismatches.first().map(|m| m.0);
    ensure(first == Some((2, 2)), || {
        format!("wrong seed: first mismatch {first:?}")
    })?;

    // wrong power map
    let t = parse_table(&CATALOG.replace("power 2B 2 1A", "power 2B 2 2B")).unwrap();
    let seeds = t.solver_seeds().unwrap();
    let out = solve_with_seeds(&t, &seeds, 30, Mode::Lenient).unwrap();
    let b = t.id("2B").unwrap();
    let s = t.expand_source(b, 30).unwrap().unwrap();
    let diff = (-1..=30).find(|&n| out.family.get(b, n) != s.int_coeff(n));
    ensure(diff == Some(4), || {
        format!("wrong power map: first difference {diff:?}")
    })?;
    let id_ok = (-1..=30).all(|n| out.family.get(e, n) == J_series(30).unwrap().int_coeff(n));
    ensure(id_ok, || "wrong power map disturbed 1A".into())?;

    // wrong multiplicity of the simple root (1,3)
    let c = J_series(25).unwrap().add(&UniSeries::monomial(3, int(1), 25)).unwrap();
    let w = witt_check(5, 5, &c).unwrap();
    let first = w.mismatches.first().copied();
    ensure(first == Some((2, 2)), || {
        format!("wrong multiplicity: first mismatch {first:?}")
    })?;
    ensure(w.oracle_mismatches.is_empty(), || {
        "free Lie oracle should still agree".into()
    })?;

    // wrong coefficient in the product formula
    let bad = moonshine_core::product::product_rhs(&c, 3, 3).unwrap();
    let good = moonshine_core::product::product_lhs(&c, 3, 3);
    let first = bad.mismatches(&good).first().map(|m| m.0);
    ensure(first == Some((2, 2)), || {
        format!("product formula: first mismatch {first:?}")
    })?;
    Ok("seed -> (2,2); power map -> 2B n=4; multiplicity -> (2,2); product -> p^2 q^2".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("1 j-oracle consistency", j_oracles, Duration::from_secs(1)),
        ("2 product identity", product_formula, Duration::from_secs(60)),
        ("3 Euler-Poincare identity", euler_poincare, Duration::from_secs(60)),
        ("4 recursion closed form", closed_form, Duration::from_secs(60)),
        ("5 determinacy", determinacy, Duration::from_secs(60)),
        ("6 cross-class derivation", cross_class, Duration::from_secs(60)),
        ("7 free decomposition", free_decomposition, Duration::from_secs(60)),
        ("8 B-matrix", b_matrix, Duration::from_secs(60)),
        ("9 negative controls", negative_controls, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let ms = elapsed.as_millis();
        match outcome {
            Ok(detail) if elapsed <= budget => println!("PASS criterion {name} ({ms} ms): {detail}"),
            Ok(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {name} ({ms} ms, budget {} ms): {detail}",
                    budget.as_millis()
                );
            }
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({ms} ms): {why}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
