//! Collateral eligibility and haircuts, and the loosening of both.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::One;

use crate::error::{Error, Result};
use crate::money::{check_unit_fraction, Money};

use super::love_letters::{love_letter_capacity, LoveLetterNetwork};

/// Eligible asset classes and the haircut applied to each. A class is
/// eligible exactly when it has a haircut entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HaircutSchedule {
    haircuts: BTreeMap<String, BigRational>,
}

impl HaircutSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_class(mut self, class: &str, haircut: BigRational) -> Result<Self> {
        check_unit_fraction(&format!("haircut[{class}]"), &haircut)?;
        self.haircuts.insert(class.to_string(), haircut);
        Ok(self)
    }

    pub fn is_eligible(&self, class: &str) -> bool {
        self.haircuts.contains_key(class)
    }

    pub fn haircut(&self, class: &str) -> Option<&BigRational> {
        self.haircuts.get(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &BigRational)> {
        self.haircuts.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DilutionEvent {
    /// Make a new class eligible.
    AddClass { class: String, haircut: BigRational },
    /// Change the haircut of an eligible class.
    SetHaircut { class: String, haircut: BigRational },
    /// Withdraw eligibility.
    RemoveClass { class: String },
}

impl DilutionEvent {
    fn describe(&self) -> String {
        match self {
            DilutionEvent::AddClass { class, haircut } => format!("add class {class} at {haircut}"),
            DilutionEvent::SetHaircut { class, haircut } => {
                format!("set haircut of {class} to {haircut}")
            }
            DilutionEvent::RemoveClass { class } => format!("remove class {class}"),
        }
    }
}

/// Applies an event that may only widen eligibility or lower a haircut.
pub fn apply_dilution(
    schedule: &HaircutSchedule,
    event: &DilutionEvent,
) -> Result<HaircutSchedule> {
    let reject = |reason: &str| Error::EventRejected {
        event: event.describe(),
        reason: reason.to_string(),
    };
    match event {
        DilutionEvent::AddClass { class, .. } if schedule.is_eligible(class) => {
            Err(reject("class is already eligible"))
        }
        DilutionEvent::SetHaircut { class, haircut } => match schedule.haircut(class) {
            None => Err(reject("class is not eligible")),
            Some(current) if haircut > current => Err(reject("raising a haircut tightens")),
            Some(_) => amend_schedule(schedule, event),
        },
        DilutionEvent::RemoveClass { .. } => Err(reject("removing eligibility tightens")),
        DilutionEvent::AddClass { .. } => amend_schedule(schedule, event),
    }
}

/// Applies any event, loosening or tightening.
pub fn amend_schedule(
    schedule: &HaircutSchedule,
    event: &DilutionEvent,
) -> Result<HaircutSchedule> {
    let mut next = schedule.clone();
    match event {
        DilutionEvent::AddClass { class, haircut }
        | DilutionEvent::SetHaircut { class, haircut } => {
            next = next.with_class(class, haircut.clone())?;
        }
        DilutionEvent::RemoveClass { class } => {
            next.haircuts.remove(class);
        }
    }
    Ok(next)
}

/// Per-bank borrowing capacity before and after a schedule change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacityReport {
    pub before: BTreeMap<String, Money>,
    pub after: BTreeMap<String, Money>,
}

impl CapacityReport {
    pub fn never_decreased(&self) -> bool {
        self.before
            .iter()
            .all(|(bank, b)| self.after.get(bank).is_some_and(|a| a >= b))
    }

    pub fn total_change(&self) -> Money {
        let total = |m: &BTreeMap<String, Money>| m.values().sum::<Money>();
        total(&self.after) - total(&self.before)
    }
}

pub fn capacity_report(
    network: &LoveLetterNetwork,
    before: &HaircutSchedule,
    after: &HaircutSchedule,
    day: u32,
) -> CapacityReport {
    CapacityReport {
        before: love_letter_capacity(network, before, day),
        after: love_letter_capacity(network, after, day),
    }
}

pub(crate) fn one_minus(fraction: &BigRational) -> BigRational {
    BigRational::one() - fraction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::parse_decimal;
    use crate::strategem::love_letters::Holding;

    fn frac(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    fn network() -> LoveLetterNetwork {
        LoveLetterNetwork::new(["A", "B"])
            .unwrap()
            .with_holding(Holding::new("SOV", "A", Money::from_euros(100), "covered"))
            .unwrap()
    }

    #[test]
    fn lowering_a_haircut_raises_capacity() {
        let before = HaircutSchedule::new()
            .with_class("covered", frac("0.2"))
            .unwrap();
        let event = DilutionEvent::SetHaircut {
            class: "covered".into(),
            haircut: frac("0.1"),
        };
        let after = apply_dilution(&before, &event).unwrap();
        let report = capacity_report(&network(), &before, &after, 0);
        assert_eq!(report.before["A"], Money::from_euros(80));
        assert_eq!(report.after["A"], Money::from_euros(90));
        assert!(report.never_decreased());
        assert_eq!(report.total_change(), Money::from_euros(10));
    }

    #[test]
    fn fallen_angels_become_eligible() {
        let net = network()
            .with_holding(Holding::new(
                "XCORP",
                "B",
                Money::from_euros(50),
                "fallen_angel",
            ))
            .unwrap();
        let before = HaircutSchedule::new()
            .with_class("covered", frac("0.2"))
            .unwrap();
        let event = DilutionEvent::AddClass {
            class: "fallen_angel".into(),
            haircut: frac("0.3"),
        };
        let after = apply_dilution(&before, &event).unwrap();
        assert!(after.is_eligible("fallen_angel"));
        let report = capacity_report(&net, &before, &after, 0);
        assert!(report.never_decreased());
        assert_eq!(report.after["B"], Money::from_euros(35));
    }

    #[test]
    fn dilution_on_unheld_class_changes_nothing() {
        let before = HaircutSchedule::new()
            .with_class("covered", frac("0.2"))
            .unwrap();
        let event = DilutionEvent::AddClass {
            class: "smb_loans".into(),
            haircut: frac("0.5"),
        };
        let after = apply_dilution(&before, &event).unwrap();
        let report = capacity_report(&network(), &before, &after, 0);
        assert_eq!(report.before, report.after);
    }

    #[test]
    fn tightening_rejected_in_dilution_mode() {
        let s = HaircutSchedule::new()
            .with_class("covered", frac("0.2"))
            .unwrap();
        let raise = DilutionEvent::SetHaircut {
            class: "covered".into(),
            haircut: frac("0.3"),
        };
        let remove = DilutionEvent::RemoveClass {
            class: "covered".into(),
        };
        let readd = DilutionEvent::AddClass {
            class: "covered".into(),
            haircut: frac("0.1"),
        };
        for event in [&raise, &remove, &readd] {
            assert!(matches!(
                apply_dilution(&s, event),
                Err(Error::EventRejected { .. })
            ));
        }
        assert_eq!(
            amend_schedule(&s, &raise).unwrap().haircut("covered"),
            Some(&frac("0.3"))
        );
        assert!(!amend_schedule(&s, &remove).unwrap().is_eligible("covered"));
    }

    #[test]
    fn haircuts_must_be_unit_fractions() {
        assert!(HaircutSchedule::new().with_class("x", frac("1.5")).is_err());
        assert!(HaircutSchedule::new()
            .with_class("x", frac("-0.1"))
            .is_err());
    }
}
