//! Published aggregate balance series: `date,participant,balance_cents`,
//! optionally preceded by a `# key: value` header block declaring how the
//! source signs its numbers and whether every participant is present.
//!
//! ```text
//! # sign: claims_positive
//! # complete: true
//! # slack_cents: 0
//! date,participant,balance_cents
//! 2012-08-31,AT,-6500000000000
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ledger::AggregateReport;
use crate::money::Money;
use crate::participant::ParticipantSet;

use super::{location, read_to_string};

pub const AGGREGATE_HEADER: [&str; 3] = ["date", "participant", "balance_cents"];
const DATE_FORMAT: &str = "%Y-%m-%d";

/// How the source signs a balance. Rows are stored claims-positive
/// regardless.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    #[default]
    ClaimsPositive,
    LiabilitiesPositive,
}

impl SignConvention {
    pub fn name(self) -> &'static str {
        match self {
            SignConvention::ClaimsPositive => "claims_positive",
            SignConvention::LiabilitiesPositive => "liabilities_positive",
        }
    }

    fn apply(self, value: Money) -> Money {
        match self {
            SignConvention::ClaimsPositive => value,
            SignConvention::LiabilitiesPositive => -value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateRow {
    pub date: NaiveDate,
    pub participant: String,
    /// Claims positive.
    pub balance: Money,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateSeries {
    pub sign: SignConvention,
    /// Every participant is present on every date.
    pub complete: bool,
    /// Tolerated absolute sum per date. Only `complete` series are checked
    /// unless a slack was declared explicitly.
    pub slack: Option<Money>,
    pub rows: Vec<AggregateRow>,
}

impl Default for AggregateSeries {
    fn default() -> Self {
        AggregateSeries {
            sign: SignConvention::ClaimsPositive,
            complete: true,
            slack: None,
            rows: Vec::new(),
        }
    }
}

impl AggregateSeries {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Distinct dates in ascending order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self.rows.iter().map(|r| r.date).collect();
        dates.sort();
        dates.dedup();
        dates
    }

    /// Participants and balances on `date`, in file order.
    pub fn report(&self, date: NaiveDate, day: u32) -> Result<(ParticipantSet, AggregateReport)> {
        let rows: Vec<&AggregateRow> = self.rows.iter().filter(|r| r.date == date).collect();
        if rows.is_empty() {
            return Err(Error::param(
                "date",
                format!("no rows for {}", date.format(DATE_FORMAT)),
            ));
        }
        let set = ParticipantSet::new(rows.iter().map(|r| r.participant.as_str()))?;
        let balances = rows.iter().map(|r| r.balance).collect();
        Ok((set, AggregateReport::new(day, balances)))
    }

    /// Runs the per-date zero-sum check.
    pub fn check_zero_sum(&self) -> Result<()> {
        let slack = match (self.complete, self.slack) {
            (_, Some(s)) => s,
            (true, None) => Money::ZERO,
            (false, None) => return Ok(()),
        };
        let mut sums: BTreeMap<NaiveDate, Money> = BTreeMap::new();
        for r in &self.rows {
            *sums.entry(r.date).or_default() += r.balance;
        }
        for (date, sum) in sums {
            if sum.abs() > slack {
                return Err(Error::ZeroSumViolation {
                    date: date.format(DATE_FORMAT).to_string(),
                    sum,
                    slack,
                });
            }
        }
        Ok(())
    }
}

pub fn load_aggregate_csv(path: &Path) -> Result<AggregateSeries> {
    let text = read_to_string(path)?;
    parse_aggregate_csv(&text, &path.display().to_string())
}

pub fn parse_aggregate_csv(text: &str, source: &str) -> Result<AggregateSeries> {
    let mut series = AggregateSeries::default();
    let mut offset = 0u64;
    let mut body = text;
    while body.starts_with('#') {
        let (line, rest) = body.split_once('\n').unwrap_or((body, ""));
        offset += 1;
        parse_header_line(line.trim_end_matches('\r'), &mut series)
            .map_err(|m| Error::parse(location(source, offset), m))?;
        body = rest;
    }
    if body.trim().is_empty() {
        return Err(Error::parse(
            location(source, offset + 1),
            format!("missing header `{}`", AGGREGATE_HEADER.join(",")),
        ));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(location(source, offset + 1), e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != AGGREGATE_HEADER {
        return Err(Error::parse(
            location(source, offset + 1),
            format!("expected header `{}`", AGGREGATE_HEADER.join(",")),
        ));
    }

    let mut seen: BTreeMap<(NaiveDate, String), u64> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(location(source, offset + line), e.to_string())
        })?;
        let line = offset + record.position().map_or(0, |p| p.line());
        let at = |message: String| Error::parse(location(source, line), message);
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|_| at(format!("date `{}` is not an ISO-8601 day", &record[0])))?;
        let participant = record[1].to_string();
        if participant.is_empty() {
            return Err(at("empty participant label".into()));
        }
        let raw: Money = record[2].parse().map_err(|_| {
            at(format!(
                "balance `{}` is not an integer number of cents",
                &record[2]
            ))
        })?;
        if let Some(first) = seen.insert((date, participant.clone()), line) {
            return Err(at(format!(
                "duplicate row for ({}, {participant}), first seen on line {first}",
                &record[0]
            )));
        }
        series.rows.push(AggregateRow {
            date,
            participant,
            balance: series.sign.apply(raw),
        });
    }
    series.check_zero_sum()?;
    Ok(series)
}

fn parse_header_line(line: &str, series: &mut AggregateSeries) -> Result<(), String> {
    let content = line.trim_start_matches('#').trim();
    if content.is_empty() {
        return Ok(());
    }
    let (key, value) = content
        .split_once(':')
        .ok_or_else(|| format!("header line `{line}` is not `# key: value`"))?;
    let value = value.trim();
    match key.trim() {
        "sign" => {
            series.sign = match value {
                "claims_positive" => SignConvention::ClaimsPositive,
                "liabilities_positive" => SignConvention::LiabilitiesPositive,
                other => return Err(format!("unknown sign convention `{other}`")),
            }
        }
        "complete" => {
            series.complete = value
                .parse()
                .map_err(|_| format!("complete must be true or false, got `{value}`"))?
        }
        "slack_cents" => {
            let slack: Money = value
                .parse()
                .map_err(|_| format!("slack_cents must be an integer, got `{value}`"))?;
            if slack.is_negative() {
                return Err("slack_cents must be non-negative".into());
            }
            series.slack = Some(slack);
        }
        other => return Err(format!("unknown header key `{other}`")),
    }
    Ok(())
}

/// Writes the series back in its declared convention.
pub fn write_aggregate_csv(series: &AggregateSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sign: {}", series.sign.name());
    let _ = writeln!(out, "# complete: {}", series.complete);
    if let Some(slack) = series.slack {
        let _ = writeln!(out, "# slack_cents: {slack}");
    }
    out.push_str(&AGGREGATE_HEADER.join(","));
    out.push('\n');
    for r in &series.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.date.format(DATE_FORMAT),
            r.participant,
            series.sign.apply(r.balance)
        );
    }
    out
}

/// Builds a complete series from per-day reports, `day 0` landing on `base`.
pub fn series_from_reports(
    participants: &ParticipantSet,
    reports: &[AggregateReport],
    base: NaiveDate,
) -> Result<AggregateSeries> {
    let mut series = AggregateSeries::default();
    for report in reports {
        if report.n() != participants.len() {
            return Err(Error::DimensionMismatch {
                expected: participants.len(),
                found: report.n(),
            });
        }
        let date = base
            .checked_add_days(chrono::Days::new(report.day.into()))
            .ok_or_else(|| Error::param("base_date", "day offset overflows the calendar"))?;
        for (label, balance) in participants.labels().iter().zip(&report.balances) {
            series.rows.push(AggregateRow {
                date,
                participant: label.clone(),
                balance: *balance,
            });
        }
    }
    Ok(series)
}

pub fn parse_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, DATE_FORMAT)
        .map_err(|_| Error::param("date", format!("`{text}` is not an ISO-8601 day")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const AUSTRIA: &str = "date,participant,balance_cents\n\
        2012-08-31,AT,-6500000000000\n\
        2012-08-31,IT,-10000000000000\n\
        2012-08-31,DE,16500000000000\n";

    #[test]
    fn austria_rows_pass_zero_sum() {
        let s = parse_aggregate_csv(AUSTRIA, "a.csv").unwrap();
        assert_eq!(s.len(), 3);
        let date = s.dates()[0];
        let (set, report) = s.report(date, 0).unwrap();
        assert_eq!(set.labels(), ["AT", "IT", "DE"]);
        assert_eq!(report.balances[2], Money::from_billions(165));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_aggregate_csv("date,participant,balance_cents\n", "a")
            .unwrap()
            .is_empty());
        assert!(parse_aggregate_csv("", "a").is_err());
    }

    #[test]
    fn one_cent_off_names_the_date() {
        let text = "date,participant,balance_cents\n2020-01-02,A,1\n2020-01-02,B,0\n";
        let err = parse_aggregate_csv(text, "a").unwrap_err();
        assert!(matches!(err, Error::ZeroSumViolation { .. }));
        assert!(err.to_string().contains("2020-01-02"), "{err}");
        let slack = format!("# slack_cents: 1\n{text}");
        assert!(parse_aggregate_csv(&slack, "a").is_ok());
        let partial = format!("# complete: false\n{text}");
        assert!(parse_aggregate_csv(&partial, "a").is_ok());
    }

    #[test]
    fn malformed_rows_have_locations() {
        let cases = [
            ("date,participant,balance_cents\n2020-01-02,A,1.5\n", "a:2"),
            ("date,participant,balance_cents\n2020-13-02,A,0\n", "a:2"),
            (
                "date,participant,balance_cents\n2020-01-02,A,0\n2020-01-02,A,0\n",
                "a:3",
            ),
            ("# sign: claims_positive\ndate,participant\n", "a:2"),
            ("# colour: red\ndate,participant,balance_cents\n", "a:1"),
            ("date,participant,balance_cents\n2020-01-02,A\n", "a:2"),
        ];
        for (text, loc) in cases {
            let err = parse_aggregate_csv(text, "a").unwrap_err().to_string();
            assert!(err.starts_with(loc), "{err} should start with {loc}");
        }
    }

    #[test]
    fn liabilities_positive_is_flipped() {
        let text = "# sign: liabilities_positive\ndate,participant,balance_cents\n2020-01-02,A,5\n2020-01-02,B,-5\n";
        let s = parse_aggregate_csv(text, "a").unwrap();
        assert_eq!(s.rows[0].balance, Money::from_cents(-5));
        assert_eq!(
            write_aggregate_csv(&s),
            "# sign: liabilities_positive\n# complete: true\n\
             date,participant,balance_cents\n2020-01-02,A,5\n2020-01-02,B,-5\n"
        );
        assert_eq!(
            parse_aggregate_csv(&write_aggregate_csv(&s), "a").unwrap(),
            s
        );
    }

    #[test]
    fn reports_become_dated_rows() {
        let set = ParticipantSet::new(["A", "B"]).unwrap();
        let reports = [
            AggregateReport::new(0, vec![Money::from_cents(3), Money::from_cents(-3)]),
            AggregateReport::new(2, vec![Money::ZERO, Money::ZERO]),
        ];
        let base = parse_date("2008-02-28").unwrap();
        let s = series_from_reports(&set, &reports, base).unwrap();
        let text = write_aggregate_csv(&s);
        assert!(text.contains("2008-03-01,A,0"));
        assert_eq!(parse_aggregate_csv(&text, "a").unwrap(), s);
    }
}
