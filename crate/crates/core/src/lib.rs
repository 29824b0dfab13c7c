//! Bilateral TARGET balance ledger with end-of-day netting, reconstruction
//! of the bilateral matrix from netted balances, and scenario models of
//! central-bank collateral and liquidity mechanisms.

pub mod error;
pub mod io;
pub mod ledger;
pub mod money;
pub mod participant;
pub mod reconstruction;
pub mod scenario;
pub mod strategem;

pub use error::{Error, ErrorKind, Result};
pub use ledger::{
    degrees_of_freedom, end_of_day_netting, AggregateReport, BalanceMatrix, DegreesOfFreedom,
    Ledger, NettingMode, Payment, Violation,
};
pub use money::{Money, RationalMoney};
pub use participant::{ParticipantId, ParticipantSet};
