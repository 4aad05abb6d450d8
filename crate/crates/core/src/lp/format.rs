//! CPLEX LP text output, readable by most external solvers.

use std::fmt::Write;

use super::LinearProgram;

fn write_expr(out: &mut String, names: &[String], coefficients: &[f64]) {
    let mut first = true;
    for (name, &c) in names.iter().zip(coefficients) {
        if c == 0.0 {
            continue;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if first {
            if c < 0.0 {
                out.push_str(" -");
            }
        } else {
            write!(out, " {sign}").unwrap();
        }
        let magnitude = c.abs();
        if magnitude == 1.0 {
            write!(out, " {name}").unwrap();
        } else {
            write!(out, " {magnitude} {name}").unwrap();
        }
        first = false;
    }
    if first {
        write!(out, " 0 {}", names.first().map_or("x", String::as_str)).unwrap();
    }
}

pub fn to_lp_format(lp: &LinearProgram, title: &str) -> String {
    let mut out = String::new();
    writeln!(out, "\\ {title}").unwrap();
    out.push_str("Minimize\n obj:");
    write_expr(&mut out, &lp.names, &lp.objective);
    out.push_str("\nSubject To\n");
    for c in &lp.equalities {
        write!(out, " {}:", c.name).unwrap();
        write_expr(&mut out, &lp.names, &c.coefficients);
        writeln!(out, " = {}", c.rhs).unwrap();
    }
    for c in &lp.inequalities {
        write!(out, " {}:", c.name).unwrap();
        write_expr(&mut out, &lp.names, &c.coefficients);
        writeln!(out, " <= {}", c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for (name, lb) in lp.names.iter().zip(&lp.lower_bounds) {
        writeln!(out, " {name} >= {lb}").unwrap();
    }
    out.push_str("End\n");
    out
}
