//! Own-account asset purchases financed by newly created central bank money,
//! tracked against an agreed ceiling. Exceeding the ceiling raises a flag;
//! the purchase still goes through.

use crate::error::{Error, Result};
use crate::money::Money;
use crate::participant::ParticipantId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfaAccount {
    ncb: ParticipantId,
    own_assets: Money,
    ceiling: Money,
    breached: bool,
}

impl AnfaAccount {
    pub fn new(ncb: ParticipantId, own_assets: Money, ceiling: Money) -> Result<Self> {
        if own_assets.is_negative() {
            return Err(Error::param("own_assets", "must be non-negative"));
        }
        if ceiling.is_negative() {
            return Err(Error::param("ceiling", "must be non-negative"));
        }
        Ok(AnfaAccount {
            ncb,
            own_assets,
            ceiling,
            breached: own_assets > ceiling,
        })
    }

    pub fn ncb(&self) -> ParticipantId {
        self.ncb
    }

    pub fn own_assets(&self) -> Money {
        self.own_assets
    }

    pub fn ceiling(&self) -> Money {
        self.ceiling
    }

    /// Sticky: once set it stays set.
    pub fn breached(&self) -> bool {
        self.breached
    }

    /// Room left before the ceiling, negative once breached.
    pub fn headroom(&self) -> Money {
        self.ceiling - self.own_assets
    }
}

pub fn anfa_purchase(account: &AnfaAccount, amount: Money) -> Result<AnfaAccount> {
    if !amount.is_positive() {
        return Err(Error::NonPositiveAmount(amount));
    }
    let own_assets = account.own_assets + amount;
    Ok(AnfaAccount {
        own_assets,
        breached: account.breached || own_assets > account.ceiling,
        ..account.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_boundary() {
        let ceiling = Money::from_billions(650);
        let mut acct = AnfaAccount::new(ParticipantId(0), Money::ZERO, ceiling).unwrap();
        for _ in 0..13 {
            acct = anfa_purchase(&acct, Money::from_billions(50)).unwrap();
        }
        assert_eq!(acct.own_assets(), ceiling);
        assert!(!acct.breached());
        assert_eq!(acct.headroom(), Money::ZERO);

        let acct = anfa_purchase(&acct, Money::from_cents(1)).unwrap();
        assert!(acct.breached());
        assert_eq!(acct.own_assets(), ceiling + Money::from_cents(1));
    }

    #[test]
    fn zero_ceiling() {
        let acct = AnfaAccount::new(ParticipantId(0), Money::ZERO, Money::ZERO).unwrap();
        assert!(anfa_purchase(&acct, Money::from_cents(1))
            .unwrap()
            .breached());
    }

    #[test]
    fn rejects_bad_amounts() {
        let acct = AnfaAccount::new(ParticipantId(0), Money::ZERO, Money::ZERO).unwrap();
        assert!(anfa_purchase(&acct, Money::ZERO).is_err());
        assert!(anfa_purchase(&acct, Money::from_cents(-5)).is_err());
        assert!(AnfaAccount::new(ParticipantId(0), Money::from_cents(-1), Money::ZERO).is_err());
    }
}
