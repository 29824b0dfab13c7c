//! Payment journal: `day,payer,payee,amount_cents`, payer and payee given by
//! participant label.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ledger::Payment;
use crate::money::Money;
use crate::participant::ParticipantSet;

use super::location;

pub const JOURNAL_HEADER: [&str; 4] = ["day", "payer", "payee", "amount_cents"];

pub fn parse_journal(
    text: &str,
    source: &str,
    participants: &ParticipantSet,
) -> Result<Vec<Payment>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(location(source, 1), e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != JOURNAL_HEADER {
        return Err(Error::parse(
            location(source, 1),
            format!("expected header `{}`", JOURNAL_HEADER.join(",")),
        ));
    }
    let mut payments = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(location(source, line), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = |message: String| Error::parse(location(source, line), message);
        let day: u32 = record[0].parse().map_err(|_| {
            at(format!(
                "day `{}` is not a non-negative integer",
                &record[0]
            ))
        })?;
        let payer = participants.id(&record[1]).map_err(|e| at(e.to_string()))?;
        let payee = participants.id(&record[2]).map_err(|e| at(e.to_string()))?;
        let amount: Money = record[3]
            .parse()
            .map_err(|_| at(format!("amount `{}` is not an integer", &record[3])))?;
        payments.push(Payment::new(payer, payee, amount, day));
    }
    Ok(payments)
}

pub fn write_journal(payments: &[Payment], participants: &ParticipantSet) -> String {
    let mut out = JOURNAL_HEADER.join(",");
    out.push('\n');
    for p in payments {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.day,
            participants.label(p.payer),
            participants.label(p.payee),
            p.amount
        );
    }
    out
}
