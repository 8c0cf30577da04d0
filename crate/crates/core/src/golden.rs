//! Bundled canonical tables and the renderers that must reproduce them
//! byte-exactly.

use std::fmt::Write as _;

use crate::racah::{decompose, layout_lines, RacahError};
use crate::zernike::{build_q, phi, relation_correction_terms, ModelSpec};

/// Bundled homogeneous-polynomial table for one order, when available.
pub fn table1_golden(order: usize) -> Option<&'static str> {
    Some(match order {
        1 => include_str!("../goldens/table1_N1.txt"),
        2 => include_str!("../goldens/table1_N2.txt"),
        3 => include_str!("../goldens/table1_N3.txt"),
        4 => include_str!("../goldens/table1_N4.txt"),
        5 => include_str!("../goldens/table1_N5.txt"),
        6 => include_str!("../goldens/table1_N6.txt"),
        7 => include_str!("../goldens/table1_N7.txt"),
        8 => include_str!("../goldens/table1_N8.txt"),
        _ => return None,
    })
}

/// Bundled relation and bracket-coefficient table for one order.
pub fn table2_golden(order: usize) -> Option<&'static str> {
    Some(match order {
        1 => include_str!("../goldens/table2_N1.txt"),
        2 => include_str!("../goldens/table2_N2.txt"),
        3 => include_str!("../goldens/table2_N3.txt"),
        4 => include_str!("../goldens/table2_N4.txt"),
        5 => include_str!("../goldens/table2_N5.txt"),
        6 => include_str!("../goldens/table2_N6.txt"),
        _ => return None,
    })
}

/// Render the homogeneous polynomials of one order in the canonical
/// serialization, one `Q(n-j,j) = ...` line per index.
pub fn render_table1(order: usize) -> String {
    let mut out = String::new();
    for j in 0..=phi(order) {
        let q = build_q(order, j).expect("j ranges over 0..=phi(order)");
        writeln!(out, "Q({},{}) = {}", order - j, j, q).expect("string write");
    }
    out
}

/// Render the relation line and the solved bracket coefficients of one order
/// in the table layout.
pub fn render_table2(order: usize) -> Result<String, RacahError> {
    let spec = ModelSpec::symbolic(order).expect("order within cap");
    let dec = decompose(&spec)?;
    let mut out = String::new();
    let corr = relation_correction_terms(order);
    if corr.is_empty() {
        writeln!(out, "relation: H = I + I'").expect("string write");
    } else {
        writeln!(out, "relation: H = I + I' + corr").expect("string write");
        for (power, coeff) in corr {
            writeln!(out, "corr[C^{power}] = {coeff}").expect("string write");
        }
    }
    for line in layout_lines(&dec) {
        writeln!(out, "{line}").expect("string write");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_renders_match_bundled_files() {
        for n in 1..=8 {
            let rendered = render_table1(n);
            let golden = table1_golden(n).unwrap();
            assert_eq!(rendered, golden, "table1 mismatch at order {n}");
        }
    }

    #[test]
    fn table2_renders_match_bundled_files() {
        for n in 1..=4 {
            let rendered = render_table2(n).unwrap();
            let golden = table2_golden(n).unwrap();
            assert_eq!(rendered, golden, "table2 mismatch at order {n}");
        }
    }
}
