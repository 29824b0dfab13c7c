//! Perpetual refinancing of sovereign debt: the nominal stock compounds at
//! the interest rate while inflation erodes the real value of the original
//! principal. Everything is computed in exact rationals.

use num::rational::BigRational;
use num::{BigInt, One, Signed};

use crate::error::{Error, Result};
use crate::money::{render_decimal, Money, Rounding};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolloverInputs {
    pub initial_principal: Money,
    /// Per-period nominal interest rate.
    pub rate: BigRational,
    /// Per-period inflation.
    pub inflation: BigRational,
    pub horizon: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolloverPoint {
    pub t: u32,
    /// Debt stock in cents, exact.
    pub nominal: BigRational,
    /// Real value of the initial principal in cents of period-0 money, exact.
    pub real: BigRational,
}

impl RolloverPoint {
    pub fn nominal_cents(&self) -> Money {
        Money::from_rational(&self.nominal, Rounding::HalfEven)
    }

    pub fn real_cents(&self) -> Money {
        Money::from_rational(&self.real, Rounding::HalfEven)
    }

    /// Nominal stock in euros with two decimals.
    pub fn nominal_display(&self) -> String {
        render_decimal(&(&self.nominal / cents_per_euro()), 2)
    }

    pub fn real_display(&self) -> String {
        render_decimal(&(&self.real / cents_per_euro()), 2)
    }
}

fn cents_per_euro() -> BigRational {
    BigRational::from_integer(BigInt::from(100))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolloverPath {
    pub inputs: RolloverInputs,
    /// `horizon + 1` points, `t = 0..=horizon`.
    pub series: Vec<RolloverPoint>,
}

/// `nominal_t = D0 (1 + r)^t`, `real_t = D0 / (1 + π)^t`.
pub fn simulate_rollover(inputs: &RolloverInputs) -> Result<RolloverPath> {
    if inputs.rate.is_negative() {
        return Err(Error::param("rate", "negative rates are not modelled"));
    }
    if inputs.inflation.is_negative() {
        return Err(Error::param(
            "inflation",
            "negative inflation is not modelled",
        ));
    }
    if inputs.initial_principal.is_negative() {
        return Err(Error::param("principal", "must be non-negative"));
    }
    let d0 = inputs.initial_principal.to_rational();
    let growth = BigRational::one() + &inputs.rate;
    let erosion = BigRational::one() + &inputs.inflation;
    let series = (0..=inputs.horizon)
        .map(|t| {
            let nominal = &d0 * num::pow(growth.clone(), t as usize);
            let real = &d0 / num::pow(erosion.clone(), t as usize);
            RolloverPoint { t, nominal, real }
        })
        .collect();
    Ok(RolloverPath {
        inputs: inputs.clone(),
        series,
    })
}
