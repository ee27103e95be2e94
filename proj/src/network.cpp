// SPDX-License-Identifier: Apache-2.0
#include "prescient/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prescient::network {

namespace {

void broadcast(std::vector<double>& v, int n, double fill, const char* name) {
  if (v.empty()) v.assign(n, fill);
  if (static_cast<int>(v.size()) != n) {
    // A homogeneous vector follows population-size changes; per-node values
    // with the wrong length are a configuration error.
    bool homogeneous = true;
    for (double x : v) homogeneous = homogeneous && x == v.front();
    if (!homogeneous)
      throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(n) +
                                  " entries, got " + std::to_string(v.size()));
    v.assign(n, v.front());
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("NetworkConfig: " + msg);
}

std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace

void NetworkConfig::finalize() {
  require(t_u >= 1 && K_u >= 1 && r_u >= 1, "antenna/user counts must be positive");
  require(K >= 0 && r_I >= 1 && t_p >= 1 && r_p >= 0, "node counts must be nonnegative");
  require(K_u * r_u <= t_u, "receive antenna total exceeds transmit antennas");
  require(P > 0 && P_t >= 0 && xi_p > 0, "powers must be positive");
  require(P_f > 0 && P_f < 1, "false-alarm target must lie in (0,1)");
  require(M_tilde >= 1, "sensing sample count must be positive");
  require(psk_order >= 2, "constellation must have at least two points");
  require(sigma_h2 > 0 && sigma_n2 > 0, "link variances must be positive");
  broadcast(P_i, K, 100.0, "P_i");
  broadcast(sigma_k2, K_u, 1.0, "sigma_k2");
  broadcast(eps2, K, 1.0, "eps2");
  broadcast(sigma_f2, K, 1.0, "sigma_f2");
  broadcast(sigma_d2, K, 1.0, "sigma_d2");
  broadcast(sigma_v2, K, 1.0, "sigma_v2");
  for (double x : P_i) require(x > 0, "P_i entries must be positive");
  for (double x : sigma_k2) require(x > 0, "sigma_k2 entries must be positive");
  for (double x : eps2) require(x > 0, "eps2 entries must be positive");
  for (double x : sigma_f2) require(x >= 0, "sigma_f2 entries must be nonnegative");
  for (double x : sigma_d2) require(x >= 0, "sigma_d2 entries must be nonnegative");
  for (double x : sigma_v2) require(x >= 0, "sigma_v2 entries must be nonnegative");
}

void apply_override(NetworkConfig& cfg, const std::string& key, const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_double = [&] { return std::stod(value); };
  if (key == "t_u") cfg.t_u = as_int();
  else if (key == "K_u") cfg.K_u = as_int();
  else if (key == "r_u") cfg.r_u = as_int();
  else if (key == "K") cfg.K = as_int();
  else if (key == "r_I") cfg.r_I = as_int();
  else if (key == "t_p") cfg.t_p = as_int();
  else if (key == "r_p") cfg.r_p = as_int();
  else if (key == "P") cfg.P = as_double();
  else if (key == "P_dB") cfg.P = NetworkConfig::db_to_linear(as_double());
  else if (key == "P_t") cfg.P_t = as_double();
  else if (key == "xi_p") cfg.xi_p = as_double();
  else if (key == "P_f") cfg.P_f = as_double();
  else if (key == "M_tilde") cfg.M_tilde = as_int();
  else if (key == "psk_order") cfg.psk_order = as_int();
  else if (key == "P_i") cfg.P_i = parse_list(value);
  else if (key == "P_i_dB") {
    cfg.P_i.clear();
    for (double db : parse_list(value)) cfg.P_i.push_back(NetworkConfig::db_to_linear(db));
  }
  else if (key == "sigma_k2") cfg.sigma_k2 = parse_list(value);
  else if (key == "eps2") cfg.eps2 = parse_list(value);
  else if (key == "sigma_f2") cfg.sigma_f2 = parse_list(value);
  else if (key == "sigma_d2") cfg.sigma_d2 = parse_list(value);
  else if (key == "sigma_v2") cfg.sigma_v2 = parse_list(value);
  else if (key == "sigma_h2") cfg.sigma_h2 = as_double();
  else if (key == "sigma_n2") cfg.sigma_n2 = as_double();
  else throw std::invalid_argument("unknown config key: " + key);
}

NetworkConfig parse_config(const std::string& text) {
  NetworkConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line missing '=': " + line);
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.finalize();
  return cfg;
}

NetworkConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::map<std::string, std::string> config_to_map(const NetworkConfig& cfg) {
  std::map<std::string, std::string> m;
  auto put_i = [&](const char* k, int v) { m[k] = std::to_string(v); };
  auto put_d = [&](const char* k, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    m[k] = buf;
  };
  put_i("t_u", cfg.t_u); put_i("K_u", cfg.K_u); put_i("r_u", cfg.r_u);
  put_i("K", cfg.K); put_i("r_I", cfg.r_I); put_i("t_p", cfg.t_p); put_i("r_p", cfg.r_p);
  put_d("P", cfg.P); put_d("P_t", cfg.P_t); put_d("xi_p", cfg.xi_p); put_d("P_f", cfg.P_f);
  put_i("M_tilde", cfg.M_tilde); put_i("psk_order", cfg.psk_order);
  m["P_i"] = join(cfg.P_i);
  m["sigma_k2"] = join(cfg.sigma_k2);
  m["eps2"] = join(cfg.eps2);
  m["sigma_f2"] = join(cfg.sigma_f2);
  m["sigma_d2"] = join(cfg.sigma_d2);
  m["sigma_v2"] = join(cfg.sigma_v2);
  put_d("sigma_h2", cfg.sigma_h2);
  put_d("sigma_n2", cfg.sigma_n2);
  return m;
}

namespace {

ComplexMatrix draw_matrix(int rows, int cols, double var, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.cnormal(var);
  return m;
}

enum StreamId : std::uint64_t {
  kStreamDownlink = 1,
  kStreamPrimaryRx,
  kStreamIcrForward,
  kStreamIcrFromPt,
  kStreamIcrToUcr,
  kStreamSymbols,
};

}  // namespace

ChannelSet draw_channels(const NetworkConfig& cfg, std::uint64_t seed) {
  ChannelSet cs;
  // One stream per link class keeps realizations of one class invariant
  // under changes to the others.
  Rng rh = Rng::stream(seed, kStreamDownlink);
  cs.H.reserve(cfg.K_u);
  cs.H_u.resize(cfg.K_u * cfg.r_u, cfg.t_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    cs.H.push_back(draw_matrix(cfg.r_u, cfg.t_u, cfg.sigma_h2, rh));
    cs.H_u.middleRows(k * cfg.r_u, cfg.r_u) = cs.H.back();
  }
  Rng rn = Rng::stream(seed, kStreamPrimaryRx);
  cs.N = draw_matrix(cfg.r_p, cfg.t_u, cfg.sigma_n2, rn);
  Rng rf = Rng::stream(seed, kStreamIcrForward);
  Rng rd = Rng::stream(seed, kStreamIcrFromPt);
  Rng rv = Rng::stream(seed, kStreamIcrToUcr);
  for (int i = 0; i < cfg.K; ++i) {
    cs.F.push_back(draw_matrix(cfg.r_I, cfg.t_u, cfg.sigma_f2[i], rf));
    cs.D.push_back(draw_matrix(cfg.r_I, cfg.t_p, cfg.sigma_d2[i], rd));
  }
  cs.V.resize(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k)
    for (int i = 0; i < cfg.K; ++i)
      cs.V[k].push_back(draw_matrix(cfg.r_u, cfg.r_I, cfg.sigma_v2[i], rv));
  return cs;
}

ComplexMatrix draw_psk_block(int streams, int n, int order, double entry_power, Rng& rng) {
  ComplexMatrix s(streams, n);
  const double amp = std::sqrt(entry_power);
  const double step = 2.0 * M_PI / order;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < streams; ++r) {
      double phase = step * rng.uniform_int(order);
      s(r, c) = amp * std::complex<double>(std::cos(phase), std::sin(phase));
    }
  return s;
}

ComplexMatrix draw_symbols(const NetworkConfig& cfg, int n, std::uint64_t seed) {
  return draw_symbol_streams(cfg, cfg.K_u, n, seed);
}

ComplexMatrix draw_symbol_streams(const NetworkConfig& cfg, int streams, int n,
                                  std::uint64_t seed) {
  Rng rng = Rng::stream(seed, kStreamSymbols);
  return draw_psk_block(streams, n, cfg.psk_order, 1.0, rng);
}

const ComplexMatrix& CsiView::F(int i) const {
  if (!has_instantaneous_F())
    throw std::logic_error("CsiView: instantaneous ICR channels not exposed in statistical mode");
  return channels_->F.at(i);
}

ComplexMatrix CsiView::leakage_form(int i) const {
  const int t_u = cfg_->t_u;
  if (has_instantaneous_F()) {
    const ComplexMatrix& f = channels_->F.at(i);
    return (2.0 / cfg_->r_I) * (f.adjoint() * f);
  }
  return 2.0 * cfg_->sigma_f2.at(i) * ComplexMatrix::Identity(t_u, t_u);
}

}  // namespace prescient::network
