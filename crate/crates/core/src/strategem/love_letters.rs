//! Reciprocal IOU collateral ("love letters"): banks hold each other's bonds,
//! pledge them for central bank credit, and the central bank is left with
//! the loss once the issuers default.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::One;

use crate::error::{Error, Result};
use crate::money::{check_unit_fraction, Money, Rounding};

use super::haircut::{one_minus, HaircutSchedule};

pub const LOVE_LETTER_CLASS: &str = "love_letter";

/// `holder` owns `face` of bonds issued by `issuer`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Holding {
    pub issuer: String,
    pub holder: String,
    pub face: Money,
    pub class: String,
}

impl Holding {
    pub fn new(issuer: &str, holder: &str, face: Money, class: &str) -> Self {
        Holding {
            issuer: issuer.to_string(),
            holder: holder.to_string(),
            face,
            class: class.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoveLetterNetwork {
    banks: BTreeSet<String>,
    holdings: Vec<Holding>,
    pledged: BTreeMap<String, Money>,
    prohibited_after: Option<u32>,
}

impl LoveLetterNetwork {
    pub fn new<I, S>(banks: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for bank in banks {
            let bank = bank.into();
            if !set.insert(bank.clone()) {
                return Err(Error::DuplicateParticipant(bank));
            }
        }
        Ok(LoveLetterNetwork {
            banks: set,
            ..Default::default()
        })
    }

    /// Every bank holds `face` of the next bank's IOUs, in a ring.
    pub fn reciprocal<I, S>(banks: I, face: Money) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = banks.into_iter().map(Into::into).collect();
        let mut net = LoveLetterNetwork::new(names.clone())?;
        for (k, holder) in names.iter().enumerate() {
            let issuer = &names[(k + 1) % names.len()];
            if issuer != holder {
                net = net.with_holding(Holding::new(issuer, holder, face, LOVE_LETTER_CLASS))?;
            }
        }
        Ok(net)
    }

    fn require_bank(&self, bank: &str) -> Result<()> {
        if self.banks.contains(bank) {
            Ok(())
        } else {
            Err(Error::UnknownParticipant(bank.to_string()))
        }
    }

    pub fn with_holding(mut self, holding: Holding) -> Result<Self> {
        self.require_bank(&holding.holder)?;
        if holding.face.is_negative() {
            return Err(Error::param("face", "must be non-negative"));
        }
        self.holdings.push(holding);
        Ok(self)
    }

    pub fn with_pledge(mut self, bank: &str, borrowed: Money) -> Result<Self> {
        self.require_bank(bank)?;
        if borrowed.is_negative() {
            return Err(Error::param("pledged", "must be non-negative"));
        }
        self.pledged.insert(bank.to_string(), borrowed);
        Ok(self)
    }

    pub fn with_prohibition(mut self, after_day: u32) -> Self {
        self.prohibited_after = Some(after_day);
        self
    }

    pub fn banks(&self) -> impl Iterator<Item = &str> {
        self.banks.iter().map(String::as_str)
    }

    pub fn holdings(&self) -> &[Holding] {
        &self.holdings
    }

    pub fn pledged(&self, bank: &str) -> Money {
        self.pledged.get(bank).copied().unwrap_or_default()
    }

    pub fn total_pledged(&self) -> Money {
        self.pledged.values().sum()
    }

    fn is_cross_issued(&self, h: &Holding) -> bool {
        h.issuer != h.holder && self.banks.contains(&h.issuer)
    }

    /// Checks that no bank has borrowed more than its collateral supports.
    pub fn check_pledges(&self, schedule: &HaircutSchedule, day: u32) -> Result<()> {
        let capacity = love_letter_capacity(self, schedule, day);
        for (bank, &borrowed) in &self.pledged {
            let cap = capacity[bank];
            if borrowed > cap {
                return Err(Error::EventRejected {
                    event: format!("pledge of {borrowed} by {bank}"),
                    reason: format!("exceeds collateral capacity {cap}"),
                });
            }
        }
        Ok(())
    }
}

/// Borrowing capacity per bank: eligible face value net of haircut, rounded
/// down to the cent. After the prohibition day, bonds issued by other banks
/// of the network count for nothing.
pub fn love_letter_capacity(
    network: &LoveLetterNetwork,
    schedule: &HaircutSchedule,
    day: u32,
) -> BTreeMap<String, Money> {
    let prohibited = network.prohibited_after.is_some_and(|d| day > d);
    let mut capacity: BTreeMap<String, Money> = network
        .banks
        .iter()
        .map(|b| (b.clone(), Money::ZERO))
        .collect();
    for h in &network.holdings {
        if prohibited && network.is_cross_issued(h) {
            continue;
        }
        let Some(haircut) = schedule.haircut(&h.class) else {
            continue;
        };
        let value = h.face.scale(&one_minus(haircut), Rounding::Floor);
        *capacity.get_mut(&h.holder).expect("holders are banks") += value;
    }
    capacity
}

/// Central bank loss when every pledging bank defaults and the pledged
/// collateral recovers `recovery` of its value.
pub fn love_letter_default(network: &LoveLetterNetwork, recovery: &BigRational) -> Result<Money> {
    check_unit_fraction("recovery", recovery)?;
    Ok(network
        .total_pledged()
        .scale(&one_minus(recovery), Rounding::HalfEven))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimelineEvent {
    Borrow {
        bank: String,
        amount: Money,
    },
    Repay {
        bank: String,
        amount: Money,
    },
    /// Reciprocal IOUs stop being eligible; no new borrowing against them.
    Prohibit,
    /// `bank` (or every bank, when `None`) defaults on its borrowing.
    Default {
        bank: Option<String>,
        recovery: BigRational,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExposurePoint {
    pub day: u32,
    pub exposure: Money,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimelineOutcome {
    /// Total secured lending at the end of every day that saw borrowing or
    /// repayment.
    pub series: Vec<ExposurePoint>,
    pub loss: Money,
    pub terminal_exposure: Money,
}

pub fn replay_love_letter_timeline(schedule: &[(u32, TimelineEvent)]) -> Result<TimelineOutcome> {
    let mut outstanding: BTreeMap<String, Money> = BTreeMap::new();
    let mut defaulted: BTreeSet<String> = BTreeSet::new();
    let mut prohibited = false;
    let mut loss = Money::ZERO;
    let mut series: Vec<ExposurePoint> = Vec::new();
    let mut previous: Option<u32> = None;
    let mut day_moved = false;

    let total = |o: &BTreeMap<String, Money>| o.values().sum::<Money>();

    for (day, event) in schedule {
        let day = *day;
        if let Some(p) = previous {
            if day < p {
                return Err(Error::EventsOutOfOrder { day, previous: p });
            }
            if day != p && day_moved {
                series.push(ExposurePoint {
                    day: p,
                    exposure: total(&outstanding),
                });
                day_moved = false;
            }
        }
        previous = Some(day);
        let reject = |reason: &str| Error::EventRejected {
            event: format!("day {day}: {event:?}"),
            reason: reason.to_string(),
        };
        match event {
            TimelineEvent::Borrow { bank, amount } => {
                if !amount.is_positive() {
                    return Err(Error::NonPositiveAmount(*amount));
                }
                if prohibited {
                    return Err(reject("borrowing against love letters is prohibited"));
                }
                if defaulted.contains(bank) {
                    return Err(reject("bank has defaulted"));
                }
                *outstanding.entry(bank.clone()).or_default() += *amount;
                day_moved = true;
            }
            TimelineEvent::Repay { bank, amount } => {
                if !amount.is_positive() {
                    return Err(Error::NonPositiveAmount(*amount));
                }
                let current = outstanding.entry(bank.clone()).or_default();
                if *amount > *current {
                    return Err(reject("repayment exceeds outstanding borrowing"));
                }
                *current -= *amount;
                day_moved = true;
            }
            TimelineEvent::Prohibit => prohibited = true,
            TimelineEvent::Default { bank, recovery } => {
                check_unit_fraction("recovery", recovery)?;
                let banks: Vec<String> = match bank {
                    Some(b) => vec![b.clone()],
                    None => outstanding.keys().cloned().collect(),
                };
                for b in banks {
                    let owed = outstanding.remove(&b).unwrap_or_default();
                    loss += owed.scale(&(BigRational::one() - recovery), Rounding::HalfEven);
                    defaulted.insert(b);
                }
            }
        }
    }
    if let (Some(p), true) = (previous, day_moved) {
        series.push(ExposurePoint {
            day: p,
            exposure: total(&outstanding),
        });
    }
    Ok(TimelineOutcome {
        series,
        loss,
        terminal_exposure: total(&outstanding),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::parse_decimal;

    fn frac(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    fn mn(x: i128) -> Money {
        Money::from_millions(x)
    }

    fn love_letters_at(haircut: &str) -> HaircutSchedule {
        HaircutSchedule::new()
            .with_class(LOVE_LETTER_CLASS, frac(haircut))
            .unwrap()
    }

    #[test]
    fn reciprocal_capacity() {
        let net = LoveLetterNetwork::reciprocal(["A", "B"], mn(2_500)).unwrap();
        let cap = love_letter_capacity(&net, &love_letters_at("0"), 0);
        assert_eq!(cap["A"], mn(2_500));
        assert_eq!(cap["B"], mn(2_500));

        let cap = love_letter_capacity(&net, &love_letters_at("1.0"), 0);
        assert!(cap.values().all(|c| c.is_zero()));

        let net = LoveLetterNetwork::reciprocal(["A", "B"], mn(4_500)).unwrap();
        let cap = love_letter_capacity(&net, &love_letters_at("0.2"), 0);
        assert_eq!(cap["A"], mn(3_600));
    }

    #[test]
    fn prohibition_zeroes_cross_issued_collateral() {
        let net = LoveLetterNetwork::reciprocal(["A", "B"], mn(2_500))
            .unwrap()
            .with_holding(Holding::new("SOV", "A", mn(100), LOVE_LETTER_CLASS))
            .unwrap()
            .with_prohibition(10);
        let hs = love_letters_at("0");
        assert_eq!(love_letter_capacity(&net, &hs, 10)["A"], mn(2_600));
        assert_eq!(love_letter_capacity(&net, &hs, 11)["A"], mn(100));
        assert_eq!(love_letter_capacity(&net, &hs, 11)["B"], Money::ZERO);
    }

    #[test]
    fn pledges_checked_against_capacity() {
        let hs = love_letters_at("0");
        let net = LoveLetterNetwork::reciprocal(["A", "B"], mn(2_500)).unwrap();
        assert!(net
            .clone()
            .with_pledge("A", mn(2_500))
            .unwrap()
            .check_pledges(&hs, 0)
            .is_ok());
        assert!(net
            .with_pledge("A", mn(2_501))
            .unwrap()
            .check_pledges(&hs, 0)
            .is_err());
    }

    #[test]
    fn default_losses() {
        let net = LoveLetterNetwork::new(["A"]).unwrap();
        let pledged = |m| net.clone().with_pledge("A", m).unwrap();
        assert_eq!(
            love_letter_default(&pledged(mn(3_500)), &frac("0")).unwrap(),
            mn(3_500)
        );
        assert_eq!(
            love_letter_default(&pledged(mn(3_500)), &frac("1")).unwrap(),
            Money::ZERO
        );
        assert_eq!(
            love_letter_default(&pledged(mn(4_500)), &frac("0.2")).unwrap(),
            mn(3_600)
        );
        assert!(love_letter_default(&pledged(mn(1)), &frac("1.2")).is_err());
    }

    fn borrow(amount: Money) -> TimelineEvent {
        TimelineEvent::Borrow {
            bank: "IS".into(),
            amount,
        }
    }

    fn repay(amount: Money) -> TimelineEvent {
        TimelineEvent::Repay {
            bank: "IS".into(),
            amount,
        }
    }

    #[test]
    fn empty_and_unwound_timelines() {
        let out = replay_love_letter_timeline(&[]).unwrap();
        assert!(out.series.is_empty());
        assert_eq!(out.loss, Money::ZERO);

        let out = replay_love_letter_timeline(&[
            (1, borrow(Money::from_billions(1))),
            (2, repay(Money::from_billions(1))),
        ])
        .unwrap();
        assert_eq!(out.terminal_exposure, Money::ZERO);
        assert_eq!(out.loss, Money::ZERO);
        assert_eq!(out.series.len(), 2);
    }

    #[test]
    fn same_day_events_collapse_into_one_point() {
        let out = replay_love_letter_timeline(&[
            (5, borrow(mn(4_500))),
            (9, TimelineEvent::Prohibit),
            (9, repay(mn(1_000))),
        ])
        .unwrap();
        let exposures: Vec<Money> = out.series.iter().map(|p| p.exposure).collect();
        assert_eq!(exposures, vec![mn(4_500), mn(3_500)]);
    }

    #[test]
    fn timeline_rejections() {
        assert!(matches!(
            replay_love_letter_timeline(&[(5, borrow(mn(1))), (4, borrow(mn(1)))]),
            Err(Error::EventsOutOfOrder {
                day: 4,
                previous: 5
            })
        ));
        assert!(
            replay_love_letter_timeline(&[(1, TimelineEvent::Prohibit), (2, borrow(mn(1)))])
                .is_err()
        );
        assert!(replay_love_letter_timeline(&[(1, repay(mn(1)))]).is_err());
        assert!(replay_love_letter_timeline(&[(1, borrow(Money::ZERO))]).is_err());
    }
}
