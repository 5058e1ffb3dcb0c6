//! Fixed-format CSV tables: comma delimiter, LF line ends, numbers with nine
//! significant digits in C `%.9g` style, empty cells for missing values.

use crate::analysis::{ConvergenceRow, ExtrapolatedRow};

pub const SOLVE_HEADER: &str = "S,p_at_t0,q_at_t0,p_at_T,q_at_T";
pub const TRAJECTORY_HEADER: &str = "t,S,p,q";
pub const CONVERGE_HEADER: &str = "I,value_R0,diff_R0,ratio_R0,order_R0,value_R1,diff_R1,ratio_R1,order_R1";
pub const EXTRAPOLATE_HEADER: &str = "I,Z,W,Y,diff_Y,ratio,order";

const DIGITS: usize = 9;

/// `%.9g`: shortest of fixed/scientific by the C rule, trailing zeros dropped.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_g).unwrap_or_default()
}

fn table(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `(S, p(t=0), q(t=0), p(t=T), q(t=T))` per node.
pub fn solve_table(s: &[f64], p0: &[f64], q0: &[f64], p_t: &[f64], q_t: &[f64]) -> String {
    table(
        SOLVE_HEADER,
        (0..s.len()).map(|i| {
            [s[i], p0[i], q0[i], p_t[i], q_t[i]]
                .iter()
                .map(|&x| format_g(x))
                .collect()
        }),
    )
}

/// Rows of `(t, S, p, q)`.
pub fn trajectory_table(rows: &[(f64, f64, f64, f64)]) -> String {
    table(
        TRAJECTORY_HEADER,
        rows.iter()
            .map(|&(t, s, p, q)| [t, s, p, q].iter().map(|&x| format_g(x)).collect()),
    )
}

pub fn converge_table(r0: &[ConvergenceRow], r1: &[ConvergenceRow]) -> String {
    table(
        CONVERGE_HEADER,
        r0.iter().zip(r1).map(|(a, b)| {
            let mut row = vec![a.intervals.to_string()];
            for r in [a, b] {
                row.push(format_g(r.value));
                row.push(cell(r.difference));
                row.push(cell(r.ratio));
                row.push(cell(r.order));
            }
            row
        }),
    )
}

pub fn extrapolate_table(rows: &[ExtrapolatedRow]) -> String {
    table(
        EXTRAPOLATE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.intervals.to_string(),
                format_g(r.richardson.coarse_value),
                format_g(r.richardson.fine_value),
                format_g(r.richardson.extrapolated),
                cell(r.difference),
                cell(r.ratio),
                cell(r.order),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::convergence_rows;
    use proptest::prelude::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (3.0, "3"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (0.247983, "0.247983"),
            (0.24310211555697078, "0.243102116"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (7.70e-4, "0.00077"),
            (2.0e-300, "2e-300"),
            (999999999.5, "1e+09"),
            (0.000099999999999, "0.0001"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x:e}");
        }
    }

    proptest! {
        #[test]
        fn g_format_keeps_nine_digits(x in -1e6..1e6f64) {
            let s = format_g(x);
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-9 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn converge_table_leaves_missing_cells_empty() {
        let rows = convergence_rows(&[30, 60], &[0.25, 0.5]);
        let csv = converge_table(&rows, &rows);
        assert_eq!(
            csv,
            format!("{CONVERGE_HEADER}\n30,0.25,,,,0.25,,,\n60,0.5,0.25,,,0.5,0.25,,\n")
        );
    }
}
