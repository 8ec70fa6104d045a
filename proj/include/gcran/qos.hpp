#ifndef GCRAN_QOS_HPP
#define GCRAN_QOS_HPP

#include <cmath>
#include <limits>

#include "gcran/types.hpp"

namespace gcran {

/// Per-user rate and compute allocation in bit/s. `compute_cubed` is the
/// solver-side parameterization mu' = mu^3.
struct RateDelayVars {
  VectorXd rates;
  VectorXd compute;
  VectorXd compute_cubed;
};

namespace detail {
template <typename DerivedW, typename DerivedH>
void check_beam_dims(Index k, const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedH>& h) {
  require(w.rows() == h.cols(), "beamformer length does not match channel dimension");
  require(w.cols() == h.rows(), "need one beamformer per user");
  require(k >= 0 && k < h.rows(), "user index out of range");
}
}  // namespace detail

/// Received power |h_k^H w_j|^2 for every j, as a real row vector.
template <typename DerivedW, typename DerivedH>
auto link_gains(Index k, const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedH>& h) {
  return (h.row(k).conjugate() * w).cwiseAbs2().eval();
}

/// SINR of user k with every other user's stream treated as noise.
/// `w` holds one beamformer per column, `h` one channel per row.
template <typename DerivedW, typename DerivedH>
typename DerivedW::RealScalar sinr(Index k, const Eigen::MatrixBase<DerivedW>& w,
                                   const Eigen::MatrixBase<DerivedH>& h,
                                   typename DerivedW::RealScalar sigma2) {
  detail::check_beam_dims(k, w, h);
  const auto g = link_gains(k, w, h);
  const auto signal = g(k);
  return signal / (sigma2 + (g.sum() - signal));
}

/// B log2(1 + SINR_k) in bit/s.
template <typename DerivedW, typename DerivedH>
typename DerivedW::RealScalar achievable_rate(Index k, const Eigen::MatrixBase<DerivedW>& w,
                                              const Eigen::MatrixBase<DerivedH>& h,
                                              typename DerivedW::RealScalar sigma2,
                                              typename DerivedW::RealScalar bandwidth) {
  using std::log2;
  return bandwidth * log2(typename DerivedW::RealScalar(1) + sinr(k, w, h, sigma2));
}

/// Sojourn time of two M/M/1 queues in series: cloud processing at rate
/// `compute`, then radio transmission at rate `rate`.
template <typename Scalar>
Scalar total_delay(Scalar compute, Scalar rate, Scalar arrival) {
  if (!(compute > arrival) || !(rate > arrival)) {
    throw QueueUnstable("service rate must exceed the arrival rate");
  }
  return Scalar(1) / (compute - arrival) + Scalar(1) / (rate - arrival);
}

/// Delay constraint in the cubed-compute parameterization.
template <typename Scalar>
bool delay_feasible(Scalar compute_cubed, Scalar rate, Scalar arrival, Scalar qos) {
  using std::cbrt;
  const Scalar mu = cbrt(compute_cubed);
  if (!(mu > arrival) || !(rate > arrival)) return false;
  return total_delay(mu, rate, arrival) <= qos;
}

/// Smallest compute rate that meets `qos` given a radio rate, or +inf when
/// the radio stage alone already uses the whole budget.
template <typename Scalar>
Scalar min_compute_for_delay(Scalar rate, Scalar arrival, Scalar qos) {
  if (!(rate > arrival)) return std::numeric_limits<Scalar>::infinity();
  const Scalar left = qos - Scalar(1) / (rate - arrival);
  if (!(left > 0)) return std::numeric_limits<Scalar>::infinity();
  return arrival + Scalar(1) / left;
}

}  // namespace gcran

#endif  // GCRAN_QOS_HPP
