use std::fmt::Write as _;

use super::instance::{fmt_num, MilpInstance, Sense};

const TERMS_PER_LINE: usize = 6;

/// Column or row name made acceptable to CPLEX LP readers: `p_c[3]`
/// becomes `p_c_3`, and names that could parse as numbers get a leading
/// underscore.
pub fn lp_name(name: &str) -> String {
    let mut out: String = name
        .chars()
        .filter_map(|c| match c {
            '[' | ',' | ' ' => Some('_'),
            ']' => None,
            c => Some(c),
        })
        .collect();
    if out.is_empty()
        || out.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E'))
    {
        out.insert(0, '_');
    }
    out
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut any = false;
    for (i, (a, name)) in terms.enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let _ = write!(out, " {} {}", fmt_num(a), name);
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// Writes `instance` in CPLEX LP format with a fixed column order and 12
/// significant digits.
pub fn write_lp(instance: &MilpInstance) -> String {
    let names: Vec<String> = instance.vars().iter().map(|v| lp_name(&v.name)).collect();
    let mut out = String::from("\\ rass instance\nMinimize\n obj:");
    write_terms(
        &mut out,
        instance
            .vars()
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.cost != 0.0)
            .map(|(v, n)| (v.cost, n.clone())),
    );
    out.push_str("\nSubject To\n");
    for (i, row) in instance.rows().iter().enumerate() {
        let _ = write!(out, " {}:", lp_name(&format!("r{i}_{}", row.name)));
        let mut terms = row
            .coeffs
            .iter()
            .map(|&(j, a)| (a, names[j].clone()))
            .peekable();
        if terms.peek().is_none() && !names.is_empty() {
            write_terms(&mut out, std::iter::once((0.0, names[0].clone())));
        } else {
            write_terms(&mut out, terms);
        }
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, n) in instance.vars().iter().zip(&names) {
        if v.lower == v.upper {
            let _ = writeln!(out, " {n} = {}", fmt_num(v.lower));
        } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {n} free");
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", fmt_num(v.lower), fmt_num(v.upper));
        }
    }
    let binaries: Vec<&String> = instance
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer && v.lower == 0.0 && v.upper == 1.0)
        .map(|(_, n)| n)
        .collect();
    let general: Vec<&String> = instance
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer && !(v.lower == 0.0 && v.upper == 1.0))
        .map(|(_, n)| n)
        .collect();
    for (title, list) in [("Binaries", binaries), ("General", general)] {
        if !list.is_empty() {
            let _ = writeln!(out, "{title}");
            for chunk in list.chunks(TERMS_PER_LINE) {
                let line: Vec<&str> = chunk.iter().map(|s| s.as_str()).collect();
                let _ = writeln!(out, " {}", line.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_sanitized() {
        assert_eq!(lp_name("p_c[3]"), "p_c_3");
        assert_eq!(lp_name("e[1]"), "_e_1");
        assert_eq!(lp_name("zeta"), "zeta");
    }

    #[test]
    fn lp_text_has_every_section() {
        let mut inst = MilpInstance::new();
        let x = inst.add_var("x", 0.0, 2.5, 1.0, false);
        let u = inst.add_binary("u", 0.0);
        let z = inst.add_var("z", f64::NEG_INFINITY, f64::INFINITY, 0.5, false);
        inst.add_row("lim", vec![(x, 1.0), (u, -2.5)], Sense::Le, 0.0);
        inst.add_row("fix", vec![(z, 1.0)], Sense::Eq, 1.0);
        let text = write_lp(&inst);
        assert_eq!(
            text,
            "\\ rass instance\nMinimize\n obj: +1.00000000000e0 x +5.00000000000e-1 z\n\
             Subject To\n r0_lim: +1.00000000000e0 x -2.50000000000e0 u <= +0.00000000000e0\n\
             \x20r1_fix: +1.00000000000e0 z = +1.00000000000e0\n\
             Bounds\n +0.00000000000e0 <= x <= +2.50000000000e0\n\
             \x20+0.00000000000e0 <= u <= +1.00000000000e0\n z free\n\
             Binaries\n u\nEnd\n"
        );
    }
}
