//! Desk-scale models of the collateral, liquidity-assistance, own-account
//! purchase and debt-rollover mechanisms. Each model is a set of pure state
//! transitions over small value types.

pub mod anfa;
pub mod ela;
pub mod haircut;
pub mod love_letters;
pub mod rollover;

pub use anfa::{anfa_purchase, AnfaAccount};
pub use ela::{ela_blocked, ela_gdp_ratio, ela_issue, Council, ElaPosition, IssueOutcome};
pub use haircut::{
    amend_schedule, apply_dilution, capacity_report, CapacityReport, DilutionEvent, HaircutSchedule,
};
pub use love_letters::{
    love_letter_capacity, love_letter_default, replay_love_letter_timeline, ExposurePoint, Holding,
    LoveLetterNetwork, TimelineEvent, TimelineOutcome, LOVE_LETTER_CLASS,
};
pub use rollover::{simulate_rollover, RolloverInputs, RolloverPath, RolloverPoint};
