//! Matrix dump: a header row `participant,<labels…>` followed by one row per
//! participant, entries in cents.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ledger::BalanceMatrix;
use crate::money::Money;
use crate::participant::ParticipantSet;
use crate::reconstruction::Reconstruction;

use super::location;

pub fn write_matrix_csv(participants: &ParticipantSet, matrix: &BalanceMatrix) -> String {
    let mut out = String::from("participant");
    for label in participants.labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in participants.labels().iter().enumerate() {
        out.push_str(label);
        for j in 0..matrix.n() {
            let _ = write!(out, ",{}", matrix.get(i, j));
        }
        out.push('\n');
    }
    out
}

/// Parses a matrix dump. The matrix is returned as written; callers decide
/// whether to validate it.
pub fn parse_matrix_csv(text: &str, source: &str) -> Result<(ParticipantSet, BalanceMatrix)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(location(source, 1), e.to_string()))?
        .clone();
    if header.get(0) != Some("participant") {
        return Err(Error::parse(
            location(source, 1),
            "first header cell must be `participant`",
        ));
    }
    let participants = ParticipantSet::new(header.iter().skip(1))
        .map_err(|e| Error::parse(location(source, 1), e.to_string()))?;
    let n = participants.len();
    let mut entries = Vec::with_capacity(n * n);
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(location(source, line), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |message: String| Error::parse(location(source, line), message);
        if rows >= n {
            return Err(at(format!("more than {n} rows")));
        }
        let expected = &participants.labels()[rows];
        if &record[0] != expected {
            return Err(at(format!(
                "row label `{}`, expected `{expected}`",
                &record[0]
            )));
        }
        for cell in record.iter().skip(1) {
            let value: Money = cell
                .parse()
                .map_err(|_| at(format!("entry `{cell}` is not an integer")))?;
            entries.push(value);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            location(source, rows as u64 + 1),
            format!("expected {n} rows, found {rows}"),
        ));
    }
    Ok((participants, BalanceMatrix::from_entries(n, entries)?))
}

/// Sidecar record for an exported reconstruction.
pub fn write_solution_metadata(rec: &Reconstruction) -> String {
    format!(
        "objective={}\nvalue={}\nl1_cents={}\nnull_dimension={}\nconverged={}\n",
        rec.objective,
        rec.objective_value(),
        rec.l1(),
        rec.null_dimension,
        rec.converged
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let set = ParticipantSet::new(["AT", "IT", "DE"]).unwrap();
        let m = BalanceMatrix::from_upper(
            3,
            &[
                Money::from_billions(100),
                Money::from_billions(-165),
                Money::ZERO,
            ],
        )
        .unwrap();
        let text = write_matrix_csv(&set, &m);
        assert_eq!(text.lines().next().unwrap(), "participant,AT,IT,DE");
        let (set2, m2) = parse_matrix_csv(&text, "m").unwrap();
        assert_eq!(set2, set);
        assert_eq!(m2, m);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix_csv("x,AT\nAT,0\n", "m").is_err());
        assert!(parse_matrix_csv("participant,AT,DE\nAT,0,1\n", "m").is_err());
        assert!(parse_matrix_csv("participant,AT,DE\nDE,0,1\nAT,-1,0\n", "m").is_err());
        assert!(parse_matrix_csv("participant,AT,DE\nAT,0,x\nDE,0,0\n", "m").is_err());
    }
}
