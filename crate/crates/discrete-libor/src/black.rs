//! Black-76 caplet benchmark formula and its bracketed inversion.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Bisection bracket for implied volatility.
pub const IMPLIED_VOL_BRACKET: (f64, f64) = (1e-6, 5.0);

/// Bracket width at which the bisection stops.
pub const IMPLIED_VOL_TOL: f64 = 1e-10;

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn validate_market_inputs(
    forward: f64,
    strike: f64,
    expiry: f64,
    discount: f64,
    delta: f64,
) -> Result<()> {
    if forward <= 0.0 || !forward.is_finite() {
        return Err(Error::Domain(format!("forward must be > 0, got {forward}")));
    }
    if strike < 0.0 || !strike.is_finite() {
        return Err(Error::Domain(format!("strike must be >= 0, got {strike}")));
    }
    if expiry <= 0.0 || !expiry.is_finite() {
        return Err(Error::Domain(format!("expiry must be > 0, got {expiry}")));
    }
    if discount <= 0.0 || !discount.is_finite() {
        return Err(Error::Domain(format!(
            "discount must be > 0, got {discount}"
        )));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!("accrual must be > 0, got {delta}")));
    }
    Ok(())
}

/// Black-76 caplet price
/// `discount * delta * (F Phi(d1) - K Phi(d2))` with
/// `d_{1,2} = (ln(F/K) +- sigma^2 T / 2) / (sigma sqrt(T))`.
///
/// `K = 0` prices the raw forward leg; `sigma = 0` is accepted only at the
/// money (the degenerate price is 0 there), any other zero-vol request is a
/// domain error rather than a silent intrinsic fallback.
pub fn black_caplet(
    forward: f64,
    strike: f64,
    sigma: f64,
    expiry: f64,
    discount: f64,
    delta: f64,
) -> Result<f64> {
    validate_market_inputs(forward, strike, expiry, discount, delta)?;
    if strike == 0.0 {
        return Ok(discount * delta * forward);
    }
    if sigma <= 0.0 {
        if forward == strike {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!(
            "sigma must be > 0 away from the money (forward {forward}, strike {strike})"
        )));
    }
    let normal = standard_normal();
    let total = sigma * expiry.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * total * total) / total;
    let d2 = d1 - total;
    Ok(discount * delta * (forward * normal.cdf(d1) - strike * normal.cdf(d2)))
}

/// Invert [`black_caplet`] in `sigma` by bisection on the fixed bracket.
///
/// The price must lie strictly inside the no-arbitrage band
/// `[intrinsic, discount * delta * forward)`; prices at or outside the band
/// are reported as errors, never clamped.
pub fn implied_vol(
    price: f64,
    forward: f64,
    strike: f64,
    expiry: f64,
    discount: f64,
    delta: f64,
) -> Result<f64> {
    validate_market_inputs(forward, strike, expiry, discount, delta)?;
    if !price.is_finite() {
        return Err(Error::NoImpliedVol(format!(
            "price must be finite, got {price}"
        )));
    }
    let intrinsic = discount * delta * (forward - strike).max(0.0);
    let upper = discount * delta * forward;
    if price < intrinsic {
        return Err(Error::NoImpliedVol(format!(
            "price {price} is below intrinsic value {intrinsic}"
        )));
    }
    if price >= upper {
        return Err(Error::NoImpliedVol(format!(
            "price {price} is at or above the forward-leg bound {upper}"
        )));
    }

    let (mut lo, mut hi) = IMPLIED_VOL_BRACKET;
    let value = |sigma: f64| black_caplet(forward, strike, sigma, expiry, discount, delta);
    if value(lo)? >= price {
        return Err(Error::NoImpliedVol(format!(
            "price {price} does not exceed the sigma -> 0 boundary price {}; \
             the quote is indistinguishable from intrinsic",
            value(lo)?
        )));
    }
    if value(hi)? <= price {
        return Err(Error::NoImpliedVol(format!(
            "price {price} exceeds the sigma = {hi} bracket price {}",
            value(hi)?
        )));
    }
    while hi - lo > IMPLIED_VOL_TOL {
        let mid = 0.5 * (lo + hi);
        if value(mid)? < price {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vanishing_vol_approaches_intrinsic() {
        let p = black_caplet(0.04, 0.02, 1e-8, 5.0, 0.9, 1.0).unwrap();
        assert_relative_eq!(p, 0.9 * (0.04 - 0.02), max_relative = 1e-12);
        let otm = black_caplet(0.02, 0.04, 1e-8, 5.0, 0.9, 1.0).unwrap();
        assert!(otm >= 0.0 && otm < 1e-15);
    }

    #[test]
    fn atm_expansion_for_small_vol() {
        // price ~ discount * delta * F * sigma sqrt(T) * phi(0)
        let (f, t, disc) = (0.03, 4.0, 0.85);
        let sigma = 0.01;
        let p = black_caplet(f, f, sigma, t, disc, 1.0).unwrap();
        let approx_price = disc * f * sigma * t.sqrt() * 0.39894228;
        assert_relative_eq!(p, approx_price, max_relative = 1e-3);
    }

    #[test]
    fn price_increases_in_vol_and_decreases_in_strike() {
        let mut last = 0.0;
        for i in 1..=40 {
            let sigma = 0.05 * i as f64;
            let p = black_caplet(0.0292, 0.0292 * 1.4, sigma, 5.0, 0.88, 1.0).unwrap();
            assert!(p > last, "vega positivity failed at sigma={sigma}");
            last = p;
        }
        let mut last = f64::MAX;
        for i in 1..=30 {
            let k = 0.002 * i as f64;
            let p = black_caplet(0.0292, k, 0.3, 5.0, 0.88, 1.0).unwrap();
            assert!(p < last, "monotonicity in strike failed at k={k}");
            last = p;
        }
    }

    #[test]
    fn zero_strike_prices_the_forward_leg() {
        let p = black_caplet(0.0292, 0.0, 0.3, 5.0, 0.9, 1.0).unwrap();
        assert_eq!(p, 0.9 * 0.0292);
    }

    #[test]
    fn zero_vol_away_from_money_is_a_domain_error() {
        assert!(black_caplet(0.04, 0.02, 0.0, 5.0, 0.9, 1.0).is_err());
        assert_eq!(black_caplet(0.04, 0.04, 0.0, 5.0, 0.9, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn round_trip_across_the_vol_range() {
        for sigma in [0.05, 0.1, 0.26, 0.542, 1.0, 2.0] {
            for k_mult in [0.6, 1.0, 1.8, 3.4] {
                let f = 0.0292;
                let price = black_caplet(f, k_mult * f, sigma, 5.0, 0.8821, 1.0).unwrap();
                let iv = implied_vol(price, f, k_mult * f, 5.0, 0.8821, 1.0).unwrap();
                assert!(
                    (iv - sigma).abs() <= 1e-8,
                    "sigma={sigma} k={k_mult}: recovered {iv}"
                );
            }
        }
    }

    #[test]
    fn out_of_band_prices_are_reported() {
        let f = 0.0292;
        // below intrinsic
        assert!(matches!(
            implied_vol(0.001, f, 0.6 * f, 5.0, 0.88, 1.0),
            Err(Error::NoImpliedVol(_))
        ));
        // exactly intrinsic: sigma -> 0 boundary
        let intrinsic = 0.88 * (f - 0.6 * f);
        assert!(matches!(
            implied_vol(intrinsic, f, 0.6 * f, 5.0, 0.88, 1.0),
            Err(Error::NoImpliedVol(_))
        ));
        // at the forward-leg bound
        assert!(matches!(
            implied_vol(0.88 * f, f, 0.6 * f, 5.0, 0.88, 1.0),
            Err(Error::NoImpliedVol(_))
        ));
    }

    #[test]
    fn residual_price_error_is_within_spec() {
        let f = 0.0292;
        let price = black_caplet(f, 1.4 * f, 0.3321, 5.0, 0.8821, 1.0).unwrap();
        let iv = implied_vol(price, f, 1.4 * f, 5.0, 0.8821, 1.0).unwrap();
        let reprice = black_caplet(f, 1.4 * f, iv, 5.0, 0.8821, 1.0).unwrap();
        assert!((reprice - price).abs() <= 1e-10 * 0.8821 * f);
    }
}
