#ifndef GCRAN_ENERGY_HPP
#define GCRAN_ENERGY_HPP

#include <algorithm>
#include <cmath>

#include "gcran/types.hpp"

namespace gcran {

/// Half-difference and half-sum of the buy and sell prices.
template <typename Scalar>
struct TradePrices {
  Scalar psi;
  Scalar phi;

  static TradePrices from(Scalar price_buy, Scalar price_sell) {
    require(price_sell > 0 && price_buy > price_sell, "prices must satisfy 0 < sell < buy");
    return {(price_buy - price_sell) / 2, (price_buy + price_sell) / 2};
  }
  Scalar buy() const { return phi + psi; }
  Scalar sell() const { return phi - psi; }
};

/// Grid trading cost: pay `price_buy` per watt of deficit, earn `price_sell`
/// per watt of surplus.
template <typename Scalar>
Scalar trade_cost(Scalar power, Scalar harvested, Scalar price_buy, Scalar price_sell) {
  using std::max;
  return price_buy * max(power - harvested, Scalar(0)) - price_sell * max(harvested - power, Scalar(0));
}

/// The same cost written as psi |P - P_h| + phi (P - P_h). Identical to
/// trade_cost for every input; only the form differs.
template <typename Scalar>
Scalar trade_cost_convex(Scalar power, Scalar harvested, const TradePrices<Scalar>& prices) {
  using std::abs;
  const Scalar d = power - harvested;
  return prices.psi * abs(d) + prices.phi * d;
}

/// Cloud power: compute cost k_c sum mu'_k plus one backhaul charge per
/// active RRH.
template <typename DerivedMu, typename DerivedB>
typename DerivedMu::Scalar cloud_power(const Eigen::MatrixBase<DerivedMu>& compute_cubed,
                                       const Eigen::MatrixBase<DerivedB>& active,
                                       typename DerivedMu::Scalar compute_coeff,
                                       typename DerivedMu::Scalar backhaul_power) {
  using Scalar = typename DerivedMu::Scalar;
  return compute_coeff * compute_cubed.sum() + backhaul_power * active.template cast<Scalar>().sum();
}

}  // namespace gcran

#endif  // GCRAN_ENERGY_HPP
