#include "gcran/model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace gcran {

namespace {

using nlohmann::json;

constexpr double kCircleRadiusKm = 0.6;
constexpr double kMinDistanceKm = 0.035;

void check_len(const VectorXd& v, int n, const char* name) {
  require(v.size() == n, std::string(name) + ": expected length " + std::to_string(n) +
                             ", got " + std::to_string(v.size()));
}

json to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Positions& p) {
  json out = json::array();
  for (Index i = 0; i < p.rows(); ++i) out.push_back({p(i, 0), p(i, 1)});
  return out;
}

VectorXd vector_from(const json& j, const char* name) {
  require(j.contains(name) && j[name].is_array(), std::string("config: missing array '") + name + "'");
  const auto v = j[name].get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

Positions positions_from(const json& j, const char* name) {
  require(j.contains(name) && j[name].is_array(), std::string("config: missing array '") + name + "'");
  const auto& arr = j[name];
  Positions p(static_cast<Index>(arr.size()), 2);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    require(arr[i].is_array() && arr[i].size() == 2, std::string(name) + ": each entry must be [x, y]");
    p(static_cast<Index>(i), 0) = arr[i][0].get<double>();
    p(static_cast<Index>(i), 1) = arr[i][1].get<double>();
  }
  return p;
}

template <typename T>
T scalar_from(const json& j, const char* name) {
  require(j.contains(name), std::string("config: missing field '") + name + "'");
  return j[name].get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
  require(n_rrh >= 1 && n_users >= 1 && n_antennas >= 1, "N, K and L must be at least 1");
  require(bandwidth_hz > 0, "bandwidth must be positive");
  check_len(noise_power, n_users, "noise_power");
  check_len(arrival_rates, n_users, "arrival_rates");
  check_len(delay_qos, n_users, "delay_qos");
  check_len(max_tx_power, n_rrh, "max_tx_power");
  check_len(amp_inefficiency, n_rrh, "amp_inefficiency");
  check_len(harvested_rrh, n_rrh, "harvested_rrh");
  require(rrh_positions.rows() == n_rrh, "rrh_positions: expected one row per RRH");
  require(user_positions.rows() == n_users, "user_positions: expected one row per user");
  require((noise_power.array() > 0).all(), "noise_power must be positive");
  require((arrival_rates.array() > 0).all(), "arrival_rates must be positive");
  require((delay_qos.array() > 0).all(), "delay_qos must be positive");
  require((max_tx_power.array() > 0).all(), "max_tx_power must be positive");
  require((amp_inefficiency.array() >= 1).all(), "amp_inefficiency must be >= 1");
  require((harvested_rrh.array() >= 0).all() && harvested_cloud >= 0, "harvested power must be >= 0");
  require(backhaul_power >= 0, "backhaul_power must be >= 0");
  require(compute_coeff > 0, "compute_coeff must be positive");
  require(price_sell > 0 && price_buy > price_sell, "prices must satisfy 0 < price_sell < price_buy");
  require(shadowing_var_db > 0, "shadowing variance must be positive");
}

double thermal_noise_watts(double bandwidth_hz, double noise_figure_db) {
  const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
  return db_to_linear(dbm - 30.0);
}

ChannelState generate_channels(const ScenarioConfig& cfg, std::uint64_t seed) {
  require(cfg.shadowing_var_db > 0, "shadowing variance must be positive");
  require(cfg.rrh_positions.rows() == cfg.n_rrh && cfg.user_positions.rows() == cfg.n_users,
          "positions do not match N and K");
  const int N = cfg.n_rrh, K = cfg.n_users, L = cfg.n_antennas;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> shadow(cfg.shadowing_mean_db, std::sqrt(cfg.shadowing_var_db));
  std::normal_distribution<double> fading(0.0, std::sqrt(0.5));

  ChannelState ch;
  ch.h.resize(K, static_cast<Index>(N) * L);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      const double d = (cfg.rrh_positions.row(n) - cfg.user_positions.row(k)).norm();
      if (!(d > 0.0)) {
        throw DomainError("user " + std::to_string(k) + " is co-located with RRH " + std::to_string(n));
      }
      const double gain_db = cfg.antenna_gain_db - pathloss_db(d) + shadow(rng);
      const double amplitude = std::sqrt(db_to_linear(gain_db));
      for (int l = 0; l < L; ++l) {
        const double re = fading(rng);
        const double im = fading(rng);
        ch.h(k, static_cast<Index>(n) * L + l) = amplitude * std::complex<double>(re, im);
      }
    }
  }
  return ch;
}

void place_users_uniform(ScenarioConfig& cfg, double radius_km, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  cfg.user_positions.resize(cfg.n_users, 2);
  for (int k = 0; k < cfg.n_users; ++k) {
    for (;;) {
      const double r = radius_km * std::sqrt(unit(rng));
      const double th = 2.0 * std::numbers::pi * unit(rng);
      Eigen::RowVector2d p(r * std::cos(th), r * std::sin(th));
      bool clear = true;
      for (Index n = 0; n < cfg.rrh_positions.rows(); ++n) {
        if ((cfg.rrh_positions.row(n) - p).norm() < kMinDistanceKm) clear = false;
      }
      if (clear) {
        cfg.user_positions.row(k) = p;
        break;
      }
    }
  }
}

ScenarioConfig make_scenario(int n_rrh, int n_users, int n_antennas, std::uint64_t seed) {
  require(n_rrh >= 1 && n_users >= 1 && n_antennas >= 1, "N, K and L must be at least 1");
  ScenarioConfig cfg;
  cfg.n_rrh = n_rrh;
  cfg.n_users = n_users;
  cfg.n_antennas = n_antennas;
  cfg.rng_seed = seed;

  cfg.noise_power = VectorXd::Constant(n_users, thermal_noise_watts(cfg.bandwidth_hz));
  cfg.arrival_rates = VectorXd::Constant(n_users, 5e6);
  cfg.delay_qos = VectorXd::Constant(n_users, 1e-3);

  // RRH 0 is the macro site.
  cfg.max_tx_power = VectorXd::Constant(n_rrh, 1.0);
  cfg.amp_inefficiency = VectorXd::Constant(n_rrh, 2.5);
  cfg.max_tx_power(0) = 40.0;
  cfg.amp_inefficiency(0) = 4.0;
  cfg.harvested_rrh = VectorXd::Zero(n_rrh);
  cfg.harvested_cloud = 0.0;

  cfg.rrh_positions = Positions::Zero(n_rrh, 2);
  for (int n = 1; n < n_rrh; ++n) {
    const double th = 2.0 * std::numbers::pi * (n - 1) / (n_rrh - 1);
    cfg.rrh_positions(n, 0) = kCircleRadiusKm * std::cos(th);
    cfg.rrh_positions(n, 1) = kCircleRadiusKm * std::sin(th);
  }
  place_users_uniform(cfg, kCircleRadiusKm, seed);
  return cfg;
}

ScenarioConfig default_scenario() { return make_scenario(7, 4, 4, 7); }

ScenarioConfig default_small_scenario() {
  ScenarioConfig cfg = make_scenario(3, 2, 2, 11);
  default_harvest_profile(cfg);
  return cfg;
}

void default_harvest_profile(ScenarioConfig& cfg) {
  cfg.harvested_rrh = VectorXd::Constant(cfg.n_rrh, 1.0);
  cfg.harvested_rrh(0) = 4.0;
  cfg.harvested_cloud = 50.0;
}

std::string config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["n_rrh"] = cfg.n_rrh;
  j["n_users"] = cfg.n_users;
  j["n_antennas"] = cfg.n_antennas;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["noise_power"] = to_json(cfg.noise_power);
  j["arrival_rates"] = to_json(cfg.arrival_rates);
  j["delay_qos"] = to_json(cfg.delay_qos);
  j["max_tx_power"] = to_json(cfg.max_tx_power);
  j["amp_inefficiency"] = to_json(cfg.amp_inefficiency);
  j["backhaul_power"] = cfg.backhaul_power;
  j["compute_coeff"] = cfg.compute_coeff;
  j["price_buy"] = cfg.price_buy;
  j["price_sell"] = cfg.price_sell;
  j["harvested_rrh"] = to_json(cfg.harvested_rrh);
  j["harvested_cloud"] = cfg.harvested_cloud;
  j["rrh_positions"] = to_json(cfg.rrh_positions);
  j["user_positions"] = to_json(cfg.user_positions);
  j["shadowing_mean_db"] = cfg.shadowing_mean_db;
  j["shadowing_var_db"] = cfg.shadowing_var_db;
  j["antenna_gain_db"] = cfg.antenna_gain_db;
  j["rng_seed"] = cfg.rng_seed;
  return j.dump(2);
}

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    cfg.n_rrh = scalar_from<int>(j, "n_rrh");
    cfg.n_users = scalar_from<int>(j, "n_users");
    cfg.n_antennas = scalar_from<int>(j, "n_antennas");
    cfg.bandwidth_hz = scalar_from<double>(j, "bandwidth_hz");
    cfg.noise_power = vector_from(j, "noise_power");
    cfg.arrival_rates = vector_from(j, "arrival_rates");
    cfg.delay_qos = vector_from(j, "delay_qos");
    cfg.max_tx_power = vector_from(j, "max_tx_power");
    cfg.amp_inefficiency = vector_from(j, "amp_inefficiency");
    cfg.backhaul_power = scalar_from<double>(j, "backhaul_power");
    cfg.compute_coeff = scalar_from<double>(j, "compute_coeff");
    cfg.price_buy = scalar_from<double>(j, "price_buy");
    cfg.price_sell = scalar_from<double>(j, "price_sell");
    cfg.harvested_rrh = vector_from(j, "harvested_rrh");
    cfg.harvested_cloud = scalar_from<double>(j, "harvested_cloud");
    cfg.rrh_positions = positions_from(j, "rrh_positions");
    cfg.user_positions = positions_from(j, "user_positions");
    cfg.shadowing_mean_db = j.value("shadowing_mean_db", cfg.shadowing_mean_db);
    cfg.shadowing_var_db = j.value("shadowing_var_db", cfg.shadowing_var_db);
    cfg.antenna_gain_db = j.value("antenna_gain_db", cfg.antenna_gain_db);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  } catch (const json::type_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write config file: " + path);
  out << config_to_json(cfg) << '\n';
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gcran
