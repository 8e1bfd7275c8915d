//! Plain-text output helpers: number formatting and the time-series table.

use std::io::Write;

use crate::error::Result;
use crate::experiments::{ExperimentRun, TimeRecord};

/// Significant digits used for every number written to CSV.
pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style formatting, locale independent; `nan` for non-finite values
/// that represent "not applicable".
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Header of `timeseries.csv`.
pub const TIMESERIES_COLUMNS: [&str; 11] = [
    "t",
    "xi_tei",
    "xi_tei_reduced",
    "xi_ipr",
    "xi_pcc",
    "xi_bd",
    "xi_qmi",
    "discord",
    "negativity",
    "extent1",
    "extent2",
];

fn row(r: &TimeRecord) -> [f64; 11] {
    [
        r.t,
        r.xi_tei(),
        r.xi_tei_reduced(),
        r.xi_ipr(),
        r.xi_pcc(),
        r.xi_bd(),
        r.qmi,
        r.discord_value(),
        r.negativity,
        r.squeezing.extent_1,
        r.extent_2(),
    ]
}

pub fn write_timeseries<W: Write>(run: &ExperimentRun, mut out: W) -> Result<()> {
    writeln!(out, "{}", TIMESERIES_COLUMNS.join(","))?;
    for r in &run.records {
        let cells: Vec<String> = row(r).iter().map(|&x| fmt_num(x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn timeseries_csv(run: &ExperimentRun) -> String {
    let mut buf = Vec::new();
    write_timeseries(run, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1.0 / 9.0), "0.111111111111");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1e-7), "1e-07");
        assert_eq!(fmt_num(1.234e-9), "1.234e-09");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_num(0.000123), "0.000123");
        assert_eq!(fmt_num(0.0000467), "4.67e-05");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265359");
    }

    #[test]
    fn timeseries_layout() {
        use crate::experiments::{run_experiment_n, preset, Grid};
        let mut cfg = preset("A").unwrap();
        cfg.t_grid = Grid::Explicit(vec![0.0, 0.001]);
        cfg.analysis.compute_discord = false;
        let run = run_experiment_n(&cfg).unwrap();
        let text = timeseries_csv(&run);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TIMESERIES_COLUMNS.join(","));
        assert_eq!(lines.len(), 3);
        let cells: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cells.len(), 11);
        assert_eq!(cells[0], "0.001");
        // no discord, no second-order extent for three qubits
        assert_eq!(cells[7], "nan");
        assert_eq!(cells[10], "nan");
    }
}
