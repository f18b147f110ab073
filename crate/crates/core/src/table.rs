//! Study tables on the wire: one row per (stratum, group) with the five
//! cell counts, as CSV/TSV or JSON.
//!
//! ```text
//! stratum,group,n0,n1,n2,m0,m1
//! age<2,1,8,2,8,9,3
//! age<2,2,11,2,2,10,2
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupCounts, StratumCounts, StudyData};

pub const HEADER: [&str; 7] = ["stratum", "group", "n0", "n1", "n2", "m0", "m1"];

/// Largest accepted cell count. Keeps sums exact in `f64`.
const MAX_COUNT: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub stratum: String,
    pub group: u8,
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub m0: u64,
    pub m1: u64,
}

impl TableRow {
    fn counts(&self) -> GroupCounts {
        GroupCounts::new(
            self.n0 as f64,
            self.n1 as f64,
            self.n2 as f64,
            self.m0 as f64,
            self.m1 as f64,
        )
    }
}

/// A validated table: every stratum has exactly one row for group 1 and one
/// for group 2. Strata keep their order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyTable {
    rows: Vec<TableRow>,
}

impl StudyTable {
    /// Validates rows; `lines[i]` is the source line of `rows[i]` for errors.
    fn from_rows(rows: Vec<TableRow>, lines: &[usize]) -> Result<StudyTable> {
        if rows.is_empty() {
            return Err(Error::Parse {
                line: lines.first().copied().unwrap_or(1),
                message: "table has no data rows".into(),
            });
        }
        let mut seen: Vec<(&str, u8, usize)> = Vec::new();
        for (row, &line) in rows.iter().zip(lines) {
            let fail = |message: String| Error::Parse { line, message };
            if row.stratum.trim().is_empty() {
                return Err(fail("empty stratum label".into()));
            }
            if row.group != 1 && row.group != 2 {
                return Err(fail(format!("group must be 1 or 2, got {}", row.group)));
            }
            for (name, v) in [
                ("n0", row.n0),
                ("n1", row.n1),
                ("n2", row.n2),
                ("m0", row.m0),
                ("m1", row.m1),
            ] {
                if v > MAX_COUNT {
                    return Err(fail(format!("{name} = {v} is too large")));
                }
            }
            if let Some(&(_, _, first)) = seen
                .iter()
                .find(|(s, g, _)| *s == row.stratum && *g == row.group)
            {
                return Err(fail(format!(
                    "duplicate row for stratum `{}` group {} (first on line {first})",
                    row.stratum, row.group
                )));
            }
            seen.push((&row.stratum, row.group, line));
        }
        for (stratum, group, line) in &seen {
            let other = 3 - group;
            if !seen.iter().any(|(s, g, _)| s == stratum && *g == other) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("stratum `{stratum}` has no row for group {other}"),
                });
            }
        }
        Ok(StudyTable { rows })
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// Stratum labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.stratum) {
                out.push(r.stratum.clone());
            }
        }
        out
    }

    pub fn to_study(&self) -> Result<StudyData> {
        let strata = self
            .labels()
            .iter()
            .map(|label| {
                let find = |g: u8| {
                    self.rows
                        .iter()
                        .find(|r| &r.stratum == label && r.group == g)
                        .expect("validated")
                        .counts()
                };
                StratumCounts::new(find(1), find(2))
            })
            .collect();
        StudyData::new(strata)
    }

    /// Builds a table from integer-valued study data.
    pub fn from_study(labels: &[String], data: &StudyData) -> Result<StudyTable> {
        if labels.len() != data.num_strata() {
            return Err(Error::domain("one label per stratum required"));
        }
        let mut rows = Vec::new();
        for (label, s) in labels.iter().zip(data.strata()) {
            for (g, counts) in [(1u8, &s.group1), (2u8, &s.group2)] {
                let c = counts.cells();
                if c.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                    return Err(Error::domain("table export needs integer counts"));
                }
                rows.push(TableRow {
                    stratum: label.clone(),
                    group: g,
                    n0: c[0] as u64,
                    n1: c[1] as u64,
                    n2: c[2] as u64,
                    m0: c[3] as u64,
                    m1: c[4] as u64,
                });
            }
        }
        let lines: Vec<usize> = (0..rows.len()).map(|i| i + 2).collect();
        StudyTable::from_rows(rows, &lines)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("rows serialize")
    }
}

/// Parses a comma- or tab-separated table. The delimiter is taken from the
/// header line, which must name exactly the columns in [`HEADER`].
pub fn parse_csv(text: &str) -> Result<StudyTable> {
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(csv_error(&e)),
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty input".into(),
            })
        }
    };
    let header_line_no = header.position().map_or(1, |p| p.line() as usize);
    let names: Vec<&str> = header.iter().collect();
    if names != HEADER {
        return Err(Error::Parse {
            line: header_line_no,
            message: format!(
                "header must be `{}`, got `{}`",
                HEADER.join(","),
                names.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(&e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fail = |message: String| Error::Parse { line, message };
        if rec.len() != HEADER.len() {
            return Err(fail(format!(
                "expected {} fields, got {}",
                HEADER.len(),
                rec.len()
            )));
        }
        let group = rec[1]
            .parse::<u8>()
            .map_err(|_| fail(format!("group must be 1 or 2, got `{}`", &rec[1])))?;
        let mut counts = [0u64; 5];
        for (k, c) in counts.iter_mut().enumerate() {
            let field = &rec[k + 2];
            *c = field.parse::<u64>().map_err(|_| {
                fail(format!(
                    "{} must be a nonnegative integer, got `{field}`",
                    HEADER[k + 2]
                ))
            })?;
        }
        rows.push(TableRow {
            stratum: rec[0].to_string(),
            group,
            n0: counts[0],
            n1: counts[1],
            n2: counts[2],
            m0: counts[3],
            m1: counts[4],
        });
        lines.push(line);
    }
    if rows.is_empty() {
        lines.push(header_line_no);
    }
    StudyTable::from_rows(rows, &lines)
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Parses the JSON form: an array of row objects with the CSV column names.
pub fn parse_json(text: &str) -> Result<StudyTable> {
    let rows: Vec<TableRow> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    // Row objects carry no line positions after parsing; report by row number.
    let lines: Vec<usize> = (1..=rows.len()).collect();
    StudyTable::from_rows(rows, &lines).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("row {line}: {message}"),
        },
        other => other,
    })
}

/// Picks JSON when the first non-blank character is `[`, CSV otherwise.
pub fn parse_table(text: &str) -> Result<StudyTable> {
    if text.trim_start().starts_with('[') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = "stratum,group,n0,n1,n2,m0,m1\na,1,8,2,8,9,3\na,2,11,2,2,10,2\nb,1,6,6,10,7,24\nb,2,3,1,5,22,14\n";

    fn parse_err(text: &str) -> (usize, String) {
        match parse_table(text) {
            Err(Error::Parse { line, message }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_builds_study() {
        let t = parse_csv(EX).unwrap();
        assert_eq!(t.labels(), vec!["a", "b"]);
        let d = t.to_study().unwrap();
        assert_eq!(d.num_strata(), 2);
        assert_eq!(d.strata()[1].group2.cells(), [3.0, 1.0, 5.0, 22.0, 14.0]);
    }

    #[test]
    fn tabs_and_group_order() {
        let text = "stratum\tgroup\tn0\tn1\tn2\tm0\tm1\nx\t2\t1\t1\t1\t1\t1\nx\t1\t2\t2\t2\t2\t2\n";
        let d = parse_table(text).unwrap().to_study().unwrap();
        assert_eq!(d.strata()[0].group1.n0, 2.0);
    }

    #[test]
    fn round_trips() {
        let t = parse_csv(EX).unwrap();
        assert_eq!(t.to_csv(), EX);
        assert_eq!(parse_json(&t.to_json()).unwrap(), t);
        let back = StudyTable::from_study(&t.labels(), &t.to_study().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(parse_err("stratum,group,n0\n").0, 1);
        let (line, msg) = parse_err("stratum,group,n0,n1,n2,m0,m1\na,1,1,1,1,1,1\na,2,1,x,1,1,1\n");
        assert_eq!(line, 3);
        assert!(msg.contains("n1"), "{msg}");
        assert_eq!(
            parse_err("stratum,group,n0,n1,n2,m0,m1\na,1,1,1,1,1,-1\na,2,1,1,1,1,1\n").0,
            2
        );
        assert_eq!(
            parse_err("stratum,group,n0,n1,n2,m0,m1\na,1,1,1,1,1,1\na,1,1,1,1,1,1\n").0,
            3
        );
        assert_eq!(
            parse_err("stratum,group,n0,n1,n2,m0,m1\na,1,1,1,1,1,1\nb,2,1,1,1,1,1\n").0,
            2
        );
        assert_eq!(
            parse_err("stratum,group,n0,n1,n2,m0,m1\na,3,1,1,1,1,1\n").0,
            2
        );
        assert_eq!(
            parse_err("stratum,group,n0,n1,n2,m0,m1\na,1,1,1,1,1\n").0,
            2
        );
        assert_eq!(parse_err("stratum,group,n0,n1,n2,m0,m1\n").0, 1);
        assert_eq!(parse_err("").0, 1);
        assert!(matches!(
            parse_table("[{\"stratum\": 1}]"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn export_rejects_fractional_counts() {
        let t = parse_csv(EX).unwrap();
        let smoothed = crate::model::smooth_zero_cells(&t.to_study().unwrap(), 0.5);
        assert!(StudyTable::from_study(&t.labels(), &smoothed).is_err());
    }
}
