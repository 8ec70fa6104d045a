#ifndef GCRAN_TYPES_HPP
#define GCRAN_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gcran {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using VectorXcd = CVector<double>;
using MatrixXcd = CMatrix<double>;
using VectorXi = Eigen::VectorXi;

/// Thrown for malformed inputs: dimension mismatches, non-physical parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A queue whose service rate does not exceed its arrival rate has unbounded delay.
class QueueUnstable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The QoS requirements cannot be met. `users` lists the binding users.
class Infeasible : public std::runtime_error {
 public:
  Infeasible(const std::string& what, std::vector<int> users)
      : std::runtime_error(what), users_(std::move(users)) {}
  const std::vector<int>& users() const { return users_; }

 private:
  std::vector<int> users_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace gcran

#endif  // GCRAN_TYPES_HPP
