#ifndef GCRAN_WMMSE_HPP
#define GCRAN_WMMSE_HPP

#include <cmath>
#include <numbers>

#include "gcran/qos.hpp"
#include "gcran/types.hpp"

// Weighted-MMSE machinery. Everything here works in natural-log units
// (nats); rates in bit/s are obtained by multiplying by B / ln 2.

namespace gcran {

/// Expansion coefficients of the concave rate minorant built at a point w0.
///
/// The surrogate rate of user k (in nats per channel use) is
///   c1_k + Re(c2_k w_k) - c4_k sum_j |h_k^H w_j|^2,
/// with c2_k = 2 v_k conj(u_k) h_k^H. Re(c2 w) equals half of c2 w + w^H c3
/// for c3 = c2^H, which is what makes the bound tight at w0.
template <typename Scalar>
struct BasicSurrogateCoeffs {
  CVector<Scalar> u;   // MMSE receivers
  Vector<Scalar> v;    // MSE weights, > 0
  Vector<Scalar> c1;
  CMatrix<Scalar> c2;  // K x NL, row k multiplies w_k
  Vector<Scalar> c4;   // >= 0
  CMatrix<Scalar> h;   // channel the coefficients were built for

  Index users() const { return u.size(); }
};

using SurrogateCoeffs = BasicSurrogateCoeffs<double>;

/// MSE of user k for receiver u_k:
/// 1 - 2 Re(conj(u_k) h_k^H w_k) + |u_k|^2 (sigma^2 + sum_j |h_k^H w_j|^2).
template <typename DerivedW, typename DerivedH>
typename DerivedW::RealScalar mse(Index k, const Eigen::MatrixBase<DerivedW>& w,
                                  std::complex<typename DerivedW::RealScalar> u_k,
                                  const Eigen::MatrixBase<DerivedH>& h,
                                  typename DerivedW::RealScalar sigma2) {
  using Scalar = typename DerivedW::RealScalar;
  detail::check_beam_dims(k, w, h);
  const std::complex<Scalar> s = h.row(k).conjugate() * w.col(k);
  const Scalar total = sigma2 + link_gains(k, w, h).sum();
  return Scalar(1) - Scalar(2) * std::real(std::conj(u_k) * s) + std::norm(u_k) * total;
}

/// MMSE receivers u_k = h_k^H w_k / (sigma_k^2 + sum_j |h_k^H w_j|^2).
template <typename DerivedW, typename DerivedH, typename DerivedS>
CVector<typename DerivedW::RealScalar> update_receivers(const Eigen::MatrixBase<DerivedW>& w,
                                                        const Eigen::MatrixBase<DerivedH>& h,
                                                        const Eigen::MatrixBase<DerivedS>& sigma2) {
  using Scalar = typename DerivedW::RealScalar;
  require(sigma2.size() == h.rows(), "need one noise power per user");
  const Index K = h.rows();
  CVector<Scalar> u(K);
  for (Index k = 0; k < K; ++k) {
    detail::check_beam_dims(k, w, h);
    const std::complex<Scalar> s = h.row(k).conjugate() * w.col(k);
    u(k) = s / (sigma2(k) + link_gains(k, w, h).sum());
  }
  return u;
}

/// MSE weights v_k = 1 / e_k(w, u_k). A user with no useful signal has
/// e_k = 1 and gets v_k = 1.
template <typename DerivedW, typename DerivedU, typename DerivedH, typename DerivedS>
Vector<typename DerivedW::RealScalar> update_weights(const Eigen::MatrixBase<DerivedW>& w,
                                                     const Eigen::MatrixBase<DerivedU>& u,
                                                     const Eigen::MatrixBase<DerivedH>& h,
                                                     const Eigen::MatrixBase<DerivedS>& sigma2) {
  using Scalar = typename DerivedW::RealScalar;
  const Index K = h.rows();
  require(u.size() == K && sigma2.size() == K, "need one receiver and noise power per user");
  Vector<Scalar> v(K);
  for (Index k = 0; k < K; ++k) {
    const Scalar e = mse(k, w, std::complex<Scalar>(u(k)), h, sigma2(k));
    v(k) = (e >= Scalar(1) - std::numeric_limits<Scalar>::epsilon()) ? Scalar(1) : Scalar(1) / e;
  }
  return v;
}

/// The inner WMMSE objective 1 + ln v - v e, maximized over (u, v) by the
/// closed-form updates where it equals ln(1 + SINR).
template <typename Scalar>
Scalar mse_rate_objective(Scalar v, Scalar e) {
  using std::log;
  return Scalar(1) + log(v) - v * e;
}

/// Builds u, v and c1..c4 at the expansion point w.
template <typename DerivedW, typename DerivedH, typename DerivedS>
BasicSurrogateCoeffs<typename DerivedW::RealScalar> build_coeffs(const Eigen::MatrixBase<DerivedW>& w,
                                                                  const Eigen::MatrixBase<DerivedH>& h,
                                                                  const Eigen::MatrixBase<DerivedS>& sigma2) {
  using Scalar = typename DerivedW::RealScalar;
  using std::log;
  BasicSurrogateCoeffs<Scalar> c;
  c.u = update_receivers(w, h, sigma2);
  c.v = update_weights(w, c.u, h, sigma2);
  const Index K = h.rows();
  c.c1.resize(K);
  c.c4.resize(K);
  c.c2.resize(K, h.cols());
  for (Index k = 0; k < K; ++k) {
    const Scalar au2 = std::norm(c.u(k));
    c.c1(k) = Scalar(1) + log(c.v(k)) - c.v(k) * (Scalar(1) + sigma2(k) * au2);
    c.c2.row(k) = (Scalar(2) * c.v(k) * std::conj(c.u(k))) * h.row(k).conjugate();
    c.c4(k) = c.v(k) * au2;
  }
  c.h = h;
  return c;
}

/// Surrogate of user k in nats per channel use.
template <typename Scalar, typename DerivedW>
Scalar surrogate_nats(Index k, const Eigen::MatrixBase<DerivedW>& w, const BasicSurrogateCoeffs<Scalar>& c) {
  detail::check_beam_dims(k, w, c.h);
  const std::complex<Scalar> lin = c.c2.row(k) * w.col(k);
  return c.c1(k) + std::real(lin) - c.c4(k) * link_gains(k, w, c.h).sum();
}

/// Concave lower bound on B log2(1 + SINR_k(w)) in bit/s, tight at the
/// expansion point of `c`.
template <typename Scalar, typename DerivedW>
Scalar surrogate_rate(Index k, const Eigen::MatrixBase<DerivedW>& w, const BasicSurrogateCoeffs<Scalar>& c,
                      Scalar bandwidth) {
  return bandwidth / std::numbers::ln2_v<Scalar> * surrogate_nats(k, w, c);
}

}  // namespace gcran

#endif  // GCRAN_WMMSE_HPP
