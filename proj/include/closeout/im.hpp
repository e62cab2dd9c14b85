#pragma once

#include <cmath>

#include "closeout/errors.hpp"
#include "closeout/money.hpp"
#include "closeout/normal.hpp"
#include "closeout/rational.hpp"

namespace closeout {

// Toy initial-margin calculator: a parametric VaR of the portfolio value over
// the margin period of risk,
//     z(confidence) * daily_volatility * sqrt(horizon_days) * notional,
// rounded to cents.  daily_volatility is a per-unit-notional fraction.
inline Money simple_im(const Rational& daily_volatility, const Money& notional,
                       double confidence, int horizon_days) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw validation_error("simple_im: confidence must lie in (0,1)");
    if (horizon_days < 1) throw validation_error("simple_im: horizon must be >= 1 day");
    if (daily_volatility.signum() < 0)
        throw validation_error("simple_im: volatility must be >= 0");
    double z = inverse_normal_cdf(confidence);
    double cents = z * daily_volatility.to_double() * std::sqrt(double(horizon_days)) *
                   notional.amount().to_double() * 100.0;
    return Money::from_cents(std::llround(cents), notional.currency());
}

}  // namespace closeout
