//! CSV rendering with a fixed number of significant digits, and JSON helpers.

use impulse_band_core::{QSweep, QSweepRow};

pub const DEFAULT_PRECISION: usize = 6;

/// Column order of threshold tables.
pub const TABLE_HEADER: [&str; 10] = ["Q", "s1", "S1", "A1*", "s2", "S2", "A2*", "Sbar", "s_low", "Xi"];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("table header does not match {TABLE_HEADER:?}")]
    Header,
    #[error("row {row}: {detail}")]
    Row { row: usize, detail: String },
    #[error("output is not valid UTF-8")]
    Utf8,
}

/// Formats `value` with `digits` significant digits, plain decimal for
/// moderate magnitudes and scientific otherwise; trailing zeros are dropped.
pub fn format_sig(value: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if value == 0.0 || !value.is_finite() {
        return format!("{}", if value == 0.0 { 0.0 } else { value });
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-5..16).contains(&exponent) {
        return format!("{}e{exponent}", trim_zeros(mantissa));
    }
    let rounded: f64 = sci.parse().expect("round trip of formatted float");
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{rounded:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(value: Option<f64>, digits: usize) -> String {
    value.map(|v| format_sig(v, digits)).unwrap_or_default()
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String, OutputError> {
    let bytes = writer.into_inner().map_err(|e| OutputError::Csv(e.into_error().into()))?;
    String::from_utf8(bytes).map_err(|_| OutputError::Utf8)
}

fn row_cells(r: &QSweepRow, digits: usize) -> Vec<String> {
    let fixed = [r.q, r.s1, r.big_s1, r.a1_star, r.s2, r.big_s2, r.a2_star].map(|v| format_sig(v, digits));
    let mut cells = fixed.to_vec();
    cells.extend([r.s_bar, r.s_low, r.xi].map(|v| cell(v, digits)));
    cells
}

/// Threshold table; generalized-policy columns are empty where undefined.
pub fn table_csv(sweep: &QSweep, digits: usize) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER)?;
    for row in &sweep.rows {
        w.write_record(row_cells(row, digits))?;
    }
    finish(w)
}

/// Inverse of [`table_csv`].
pub fn parse_table_csv(text: &str) -> Result<Vec<QSweepRow>, OutputError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    if reader.headers()?.iter().ne(TABLE_HEADER) {
        return Err(OutputError::Header);
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let parse = |j: usize| -> Result<Option<f64>, OutputError> {
            let text = record.get(j).ok_or_else(|| OutputError::Row { row, detail: format!("missing column {j}") })?;
            if text.is_empty() {
                return Ok(None);
            }
            text.parse().map(Some).map_err(|_| OutputError::Row { row, detail: format!("`{text}` is not a number") })
        };
        let required = |j: usize| {
            parse(j)?.ok_or_else(|| OutputError::Row { row, detail: format!("column {} is empty", TABLE_HEADER[j]) })
        };
        rows.push(QSweepRow {
            q: required(0)?,
            s1: required(1)?,
            big_s1: required(2)?,
            a1_star: required(3)?,
            s2: required(4)?,
            big_s2: required(5)?,
            a2_star: required(6)?,
            s_bar: parse(7)?,
            s_low: parse(8)?,
            xi: parse(9)?,
        });
    }
    Ok(rows)
}

/// Long-format cost curves: one `x, cost, policy_tag` record per point.
pub fn curves_csv<'a, I>(curves: I, digits: usize) -> Result<String, OutputError>
where
    I: IntoIterator<Item = (&'a str, &'a [(f64, f64)])>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "cost", "policy_tag"])?;
    for (tag, points) in curves {
        for &(x, cost) in points {
            w.write_record([format_sig(x, digits), format_sig(cost, digits), tag.to_string()])?;
        }
    }
    finish(w)
}

/// Header plus a single record.
pub fn record_csv(fields: &[(&str, Option<f64>)], digits: usize) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields.iter().map(|(name, _)| *name))?;
    w.write_record(fields.iter().map(|(_, value)| cell(*value, digits)))?;
    finish(w)
}

pub fn json<T: serde::Serialize>(value: &T) -> Result<String, OutputError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(-2.650826128, 6), "-2.65083");
        assert_eq!(format_sig(0.1540364, 6), "0.154036");
        assert_eq!(format_sig(-0.0170, 6), "-0.017");
        assert_eq!(format_sig(3.0, 6), "3");
        assert_eq!(format_sig(9.9999996, 6), "10");
        assert_eq!(format_sig(1234567.0, 3), "1230000");
        assert_eq!(format_sig(1.5e-9, 6), "1.5e-9");
        assert_eq!(format_sig(-2.5e20, 4), "-2.5e20");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-0.0, 6), "0");
        assert_eq!(format_sig(f64::NAN, 6), "NaN");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, -0.0201070222869790, 1e-300, 123456.789e10, -4.418319154118762] {
            assert_eq!(format_sig(v, 17).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_round_trip_with_empty_cells() {
        let rows = vec![
            QSweepRow {
                q: 1.0,
                s1: -1.0,
                big_s1: 0.0,
                a1_star: -0.04,
                s2: -4.0,
                big_s2: 3.0,
                a2_star: -0.02,
                s_bar: None,
                s_low: None,
                xi: None,
            },
            QSweepRow {
                q: 4.0,
                s1: -2.6508261281351224,
                big_s1: 1.3491738718648776,
                a1_star: -0.01696282996654082,
                s2: -4.4183191541187625,
                big_s2: 3.470352552310942,
                a2_star: -0.020107022286979047,
                s_bar: Some(2.8045768363904244),
                s_low: Some(-4.321747965857412),
                xi: Some(0.1540364222848224),
            },
        ];
        let sweep = QSweep { rows: rows.clone(), q_dagger: 6.0, first_nonneg_q: Some(4.0) };
        let text = table_csv(&sweep, 17).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",,,"));
        assert_eq!(parse_table_csv(&text).unwrap(), rows);
    }

    #[test]
    fn parse_rejects_bad_tables() {
        assert!(matches!(parse_table_csv("a,b\n1,2\n"), Err(OutputError::Header)));
        let header = TABLE_HEADER.join(",");
        assert!(matches!(parse_table_csv(&format!("{header}\n1,x,3,4,5,6,7,,,\n")), Err(OutputError::Row { .. })));
        assert!(matches!(parse_table_csv(&format!("{header}\n1,,3,4,5,6,7,,,\n")), Err(OutputError::Row { .. })));
    }

    #[test]
    fn long_format_curves() {
        let band = [(0.0, 1.0), (1.0, 2.5)];
        let text = curves_csv([("band1", &band[..])], 6).unwrap();
        assert_eq!(text, "x,cost,policy_tag\n0,1,band1\n1,2.5,band1\n");
    }
}
