//! Emergency liquidity assistance: issuance by a national central bank that
//! only a two-thirds vote of the governing council can stop.

use num::rational::BigRational;
use num::BigInt;

use crate::error::{Error, Result};
use crate::money::Money;
use crate::participant::ParticipantId;

/// Unweighted governing-council vote on an assistance request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Council {
    members: u32,
    against: u32,
}

impl Council {
    pub fn new(members: u32, against: u32) -> Result<Self> {
        if members == 0 {
            return Err(Error::param("members", "council needs at least one member"));
        }
        if against > members {
            return Err(Error::param(
                "against",
                format!("{against} blockers exceed {members} members"),
            ));
        }
        Ok(Council { members, against })
    }

    pub fn members(&self) -> u32 {
        self.members
    }

    pub fn against(&self) -> u32 {
        self.against
    }

    pub fn supporters(&self) -> u32 {
        self.members - self.against
    }

    /// Votes needed to block: `ceil(2/3 · members)`.
    pub fn blocking_threshold(&self) -> u32 {
        (2 * self.members).div_ceil(3)
    }

    /// Smallest number of supporters that makes blocking impossible,
    /// `members - blocking_threshold + 1`, i.e. strictly more than a third.
    pub fn unblockable_support(&self) -> u32 {
        self.members - self.blocking_threshold() + 1
    }
}

pub fn ela_blocked(council: &Council) -> bool {
    council.against >= council.blocking_threshold()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElaPosition {
    ncb: ParticipantId,
    outstanding: Money,
    nominal_gdp: Money,
}

impl ElaPosition {
    pub fn new(ncb: ParticipantId, outstanding: Money, nominal_gdp: Money) -> Result<Self> {
        if outstanding.is_negative() {
            return Err(Error::param("outstanding", "must be non-negative"));
        }
        if !nominal_gdp.is_positive() {
            return Err(Error::param("nominal_gdp", "must be strictly positive"));
        }
        Ok(ElaPosition {
            ncb,
            outstanding,
            nominal_gdp,
        })
    }

    pub fn ncb(&self) -> ParticipantId {
        self.ncb
    }

    pub fn outstanding(&self) -> Money {
        self.outstanding
    }

    pub fn nominal_gdp(&self) -> Money {
        self.nominal_gdp
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IssueOutcome {
    Issued(ElaPosition),
    /// The council blocked the request; the position is unchanged.
    Blocked(ElaPosition),
}

impl IssueOutcome {
    pub fn position(&self) -> &ElaPosition {
        match self {
            IssueOutcome::Issued(p) | IssueOutcome::Blocked(p) => p,
        }
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self, IssueOutcome::Blocked(_))
    }
}

/// Issues `amount` of new assistance unless the council blocks it. There is
/// no ceiling on the outstanding stock.
pub fn ela_issue(position: &ElaPosition, amount: Money, council: &Council) -> Result<IssueOutcome> {
    if !amount.is_positive() {
        return Err(Error::NonPositiveAmount(amount));
    }
    if ela_blocked(council) {
        return Ok(IssueOutcome::Blocked(position.clone()));
    }
    Ok(IssueOutcome::Issued(ElaPosition {
        outstanding: position.outstanding + amount,
        ..position.clone()
    }))
}

/// Outstanding assistance as an exact fraction of nominal GDP.
pub fn ela_gdp_ratio(position: &ElaPosition) -> BigRational {
    BigRational::new(
        BigInt::from(position.outstanding.cents()),
        BigInt::from(position.nominal_gdp.cents()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::render_decimal;

    fn council(m: u32, a: u32) -> Council {
        Council::new(m, a).unwrap()
    }

    fn position(outstanding: i128, gdp: i128) -> ElaPosition {
        ElaPosition::new(
            ParticipantId(0),
            Money::from_cents(outstanding),
            Money::from_cents(gdp),
        )
        .unwrap()
    }

    #[test]
    fn blocking_rule_at_council_of_23() {
        assert_eq!(council(23, 15).blocking_threshold(), 16);
        assert!(!ela_blocked(&council(23, 15)));
        assert!(ela_blocked(&council(23, 16)));
        assert!(ela_blocked(&council(3, 2)));
        assert!(!ela_blocked(&council(3, 1)));
    }

    #[test]
    fn council_validation() {
        assert!(Council::new(0, 0).is_err());
        assert!(Council::new(5, 6).is_err());
    }

    #[test]
    fn issuance() {
        let permissive = council(23, 0);
        let out = ela_issue(&position(0, 100), Money::from_cents(71), &permissive).unwrap();
        assert!(!out.is_blocked());
        assert_eq!(render_decimal(&ela_gdp_ratio(out.position()), 4), "0.7100");

        let blocking = council(23, 23);
        let start = position(5, 100);
        let out = ela_issue(&start, Money::from_cents(71), &blocking).unwrap();
        assert_eq!(out, IssueOutcome::Blocked(start.clone()));

        let mut p = position(0, 1);
        for _ in 0..10 {
            p = ela_issue(&p, Money::from_cents(1000), &permissive)
                .unwrap()
                .position()
                .clone();
        }
        assert_eq!(p.outstanding(), Money::from_cents(10_000));

        assert!(ela_issue(&p, Money::ZERO, &permissive).is_err());
    }

    #[test]
    fn ratio_rendering() {
        assert_eq!(render_decimal(&ela_gdp_ratio(&position(0, 7)), 4), "0.0000");
        assert_eq!(render_decimal(&ela_gdp_ratio(&position(1, 3)), 4), "0.3333");
        assert!(ElaPosition::new(ParticipantId(0), Money::ZERO, Money::ZERO).is_err());
        assert!(ElaPosition::new(
            ParticipantId(0),
            Money::from_cents(-1),
            Money::from_cents(1)
        )
        .is_err());
    }
}
