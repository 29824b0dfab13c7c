//! Reconstruction side conditions: `i,j,kind,value_cents`. Indices are
//! 1-based positions in the participant order, or participant labels.

use crate::error::{Error, Result};
use crate::money::Money;
use crate::participant::ParticipantSet;
use crate::reconstruction::{Constraint, ConstraintKind};

use super::location;

pub const CONSTRAINT_HEADER: [&str; 4] = ["i", "j", "kind", "value_cents"];

/// Resolves a 1-based index or a label to a 0-based position.
pub fn resolve_participant(text: &str, participants: &ParticipantSet) -> Result<usize> {
    let text = text.trim();
    match text.parse::<usize>() {
        Ok(0) => Err(Error::param("index", "indices are 1-based")),
        Ok(k) if k <= participants.len() => Ok(k - 1),
        Ok(k) => Err(Error::ParticipantOutOfRange {
            index: k,
            n: participants.len(),
        }),
        Err(_) => Ok(participants.id(text)?.index()),
    }
}

/// Parses `i,j,value_cents` as given on the command line.
pub fn parse_entry_spec(
    text: &str,
    participants: &ParticipantSet,
) -> Result<(usize, usize, Money)> {
    let parts: Vec<&str> = text.split(',').collect();
    let [i, j, value] = parts.as_slice() else {
        return Err(Error::param(
            "entry",
            format!("`{text}` is not `i,j,value_cents`"),
        ));
    };
    let value: Money = value.trim().parse().map_err(|_| {
        Error::param(
            "entry",
            format!("`{value}` is not an integer number of cents"),
        )
    })?;
    Ok((
        resolve_participant(i, participants)?,
        resolve_participant(j, participants)?,
        value,
    ))
}

pub fn parse_constraints(
    text: &str,
    source: &str,
    participants: &ParticipantSet,
) -> Result<Vec<Constraint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(location(source, 1), e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != CONSTRAINT_HEADER {
        return Err(Error::parse(
            location(source, 1),
            format!("expected header `{}`", CONSTRAINT_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(location(source, line), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |e: Error| Error::parse(location(source, line), e.to_string());
        let i = resolve_participant(&record[0], participants).map_err(at)?;
        let j = resolve_participant(&record[1], participants).map_err(at)?;
        let kind: ConstraintKind = record[2].parse().map_err(at)?;
        let value: Money = record[3].parse().map_err(|_| {
            Error::parse(
                location(source, line),
                format!("value `{}` is not an integer number of cents", &record[3]),
            )
        })?;
        out.push(Constraint { i, j, kind, value });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> ParticipantSet {
        ParticipantSet::new(["AT", "IT", "DE"]).unwrap()
    }

    #[test]
    fn indices_and_labels() {
        let text = "i,j,kind,value_cents\n2,3,fix,0\nAT,DE,lower,-5\n";
        let cs = parse_constraints(text, "c", &set()).unwrap();
        assert_eq!(
            cs,
            vec![
                Constraint {
                    i: 1,
                    j: 2,
                    kind: ConstraintKind::Fix,
                    value: Money::ZERO
                },
                Constraint {
                    i: 0,
                    j: 2,
                    kind: ConstraintKind::Lower,
                    value: Money::from_cents(-5)
                },
            ]
        );
    }

    #[test]
    fn bad_rows() {
        for text in [
            "i,j,kind,value_cents\n0,1,fix,0\n",
            "i,j,kind,value_cents\n1,4,fix,0\n",
            "i,j,kind,value_cents\n1,2,equal,0\n",
            "i,j,kind,value_cents\n1,2,fix,zero\n",
        ] {
            let err = parse_constraints(text, "c", &set())
                .unwrap_err()
                .to_string();
            assert!(err.starts_with("c:2:"), "{err}");
        }
    }

    #[test]
    fn entry_spec() {
        assert_eq!(
            parse_entry_spec("2,3,0", &set()).unwrap(),
            (1, 2, Money::ZERO)
        );
        assert_eq!(
            parse_entry_spec("IT, DE, 7", &set()).unwrap(),
            (1, 2, Money::from_cents(7))
        );
        assert!(parse_entry_spec("2,3", &set()).is_err());
        assert!(parse_entry_spec("2,3,x", &set()).is_err());
    }
}
