#ifndef GCRAN_MODEL_HPP
#define GCRAN_MODEL_HPP

#include <cstdint>
#include <string>

#include "gcran/types.hpp"

namespace gcran {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// All static data of one problem instance. Powers in watts, rates in bit/s,
/// delays in seconds, distances in km.
struct ScenarioConfig {
  int n_rrh = 1;
  int n_users = 1;
  int n_antennas = 1;

  double bandwidth_hz = 10e6;
  VectorXd noise_power;       // per user
  VectorXd arrival_rates;     // per user
  VectorXd delay_qos;         // per user
  VectorXd max_tx_power;      // per RRH, consumed-power cap
  VectorXd amp_inefficiency;  // per RRH, >= 1
  double backhaul_power = 5.0;
  double compute_coeff = 4e-20;  // W per (bit/s)^3
  double price_buy = 1.0;
  double price_sell = 0.1;
  VectorXd harvested_rrh;  // per RRH
  double harvested_cloud = 0.0;

  Positions rrh_positions;
  Positions user_positions;

  double shadowing_mean_db = 1.0;
  double shadowing_var_db = 6.31;
  double antenna_gain_db = 9.0;

  std::uint64_t rng_seed = 7;

  /// Throws DomainError when a field is missing, mis-sized or non-physical.
  void validate() const;
};

/// Aggregate channel vectors. Row k is h_k, stacked RRH-major:
/// column n * L + l is antenna l of RRH n.
struct ChannelState {
  MatrixXcd h;

  Index users() const { return h.rows(); }
  Index dim() const { return h.cols(); }
};

/// 3GPP macro pathloss in dB for a distance in km.
template <typename Scalar>
Scalar pathloss_db(Scalar distance_km) {
  using std::log10;
  return Scalar(128.1) + Scalar(37.6) * log10(distance_km);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Thermal noise power in watts for a bandwidth and receiver noise figure.
double thermal_noise_watts(double bandwidth_hz, double noise_figure_db = 9.0);

/// Draws shadowing (real Gaussian in dB) and Rayleigh fading for every
/// antenna. Deterministic for a fixed (cfg, seed).
ChannelState generate_channels(const ScenarioConfig& cfg, std::uint64_t seed);

/// One macro RRH at the origin plus n_rrh - 1 micro RRHs evenly spaced on a
/// 0.6 km circle; users uniform in the 0.6 km disc (at least 35 m from any
/// RRH), placed with `seed`.
ScenarioConfig make_scenario(int n_rrh, int n_users, int n_antennas, std::uint64_t seed);

/// 7 RRHs, 4 antennas each, 4 users, 1 ms delay target, sell price 0.1 of
/// the buy price. Harvested powers are zero; see default_harvest_profile().
ScenarioConfig default_scenario();

/// Three RRHs, two users, two antennas: the instance used for convergence
/// traces and fast tests.
ScenarioConfig default_small_scenario();

/// Harvested-power profile used for arrival-rate sweeps: the macro site
/// harvests more than the micros and the cloud harvests the most.
void default_harvest_profile(ScenarioConfig& cfg);

/// Places users uniformly in a disc of `radius_km` around the origin.
void place_users_uniform(ScenarioConfig& cfg, double radius_km, std::uint64_t seed);

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& cfg, const std::string& path);
std::string config_to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const std::string& text);

/// FNV-1a hash of the canonical JSON form of the configuration.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace gcran

#endif  // GCRAN_MODEL_HPP
