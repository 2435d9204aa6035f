#include "lobforge/params_io.hpp"

#include <fstream>

#include "lobforge/error.hpp"

namespace lobforge {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("key '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, key);
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidConfig, "matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto c = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
      throw Error(ErrorCode::InvalidConfig, "matrix rows differ in length");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

OrderSizeModel order_sizes_from_json(const Json& j) {
  const auto type = get<std::string>(j, "type");
  if (type == "constant") return ConstantSize{get_or<Shares>(j, "c", 1)};
  if (type == "gamma_mixture")
    return GammaMixtureSize{get<double>(j, "w"), get_or<double>(j, "kappa1", 1.0), get<double>(j, "theta1"),
                            get_or<double>(j, "kappa2", 2.0), get<double>(j, "theta2")};
  throw Error(ErrorCode::InvalidConfig, "unknown order size model '" + type + "'");
}

Json order_sizes_to_json(const OrderSizeModel& m) {
  if (const auto* c = std::get_if<ConstantSize>(&m)) return Json{{"type", "constant"}, {"c", c->c}};
  const auto& g = std::get<GammaMixtureSize>(m);
  return Json{{"type", "gamma_mixture"}, {"w", g.w},         {"kappa1", g.kappa1},
              {"theta1", g.theta1},      {"kappa2", g.kappa2}, {"theta2", g.theta2}};
}

AgentParams params_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "parameters must be a JSON object");
  AgentParams p;
  p.l_p = get_or<int>(j, "l_p", 5);
  p.l_d = get_or<int>(j, "l_d", 3);
  if (p.l_p < 1 || p.l_d < 1) throw Error(ErrorCode::InvalidConfig, "l_p and l_d must be positive");
  const auto n = static_cast<Eigen::Index>(p.levels());
  p.mu0_lo_passive = get<double>(j, "mu0_lo_passive");
  p.mu0_lo_direct = get<double>(j, "mu0_lo_direct");
  p.mu0_mo = get<double>(j, "mu0_mo");
  p.cancel_factor = get_or<double>(j, "cancel_factor", 1.0);
  p.nu = get<double>(j, "nu");
  p.sigma_mo = get<double>(j, "sigma_mo");
  if (j.contains("skew_lo")) {
    p.skew_lo = vector_from_json(j.at("skew_lo"));
  } else {
    p.skew_lo = Eigen::VectorXd::Constant(n, get<double>(j, "gamma0"));
  }
  if (j.contains("skew_mo")) {
    p.skew_mo = get<double>(j, "skew_mo");
  } else {
    p.skew_mo = get<double>(j, "gamma0");
  }
  p.m_lo = j.contains("m_lo") ? vector_from_json(j.at("m_lo")) : Eigen::VectorXd::Zero(n);
  p.m_mo = get_or<double>(j, "m_mo", 0.0);
  if (j.contains("sigma")) {
    p.sigma = matrix_from_json(j.at("sigma"));
  } else {
    p.sigma = Eigen::MatrixXd::Identity(n, n) * (get<double>(j, "sigma_trace") / static_cast<double>(n));
  }
  p.order_sizes = j.contains("order_sizes") ? order_sizes_from_json(j.at("order_sizes")) : OrderSizeModel{ConstantSize{1}};
  p.validate();
  return p;
}

Json params_to_json(const AgentParams& p) {
  return Json{{"l_p", p.l_p},
              {"l_d", p.l_d},
              {"mu0_lo_passive", p.mu0_lo_passive},
              {"mu0_lo_direct", p.mu0_lo_direct},
              {"mu0_mo", p.mu0_mo},
              {"cancel_factor", p.cancel_factor},
              {"skew_lo", vector_to_json(p.skew_lo)},
              {"m_lo", vector_to_json(p.m_lo)},
              {"skew_mo", p.skew_mo},
              {"m_mo", p.m_mo},
              {"nu", p.nu},
              {"sigma_mo", p.sigma_mo},
              {"sigma", matrix_to_json(p.sigma)},
              {"order_sizes", order_sizes_to_json(p.order_sizes)}};
}

InitialBookSpec initial_book_from_json(const Json& j) {
  InitialBookSpec s;
  s.best_bid = get<Tick>(j, "best_bid");
  s.best_ask = get<Tick>(j, "best_ask");
  s.bid_levels = get_or<std::vector<std::vector<Shares>>>(j, "bid_levels", {});
  s.ask_levels = get_or<std::vector<std::vector<Shares>>>(j, "ask_levels", {});
  return s;
}

Json initial_book_to_json(const InitialBookSpec& s) {
  return Json{{"best_bid", s.best_bid}, {"best_ask", s.best_ask}, {"bid_levels", s.bid_levels}, {"ask_levels", s.ask_levels}};
}

SimConfig sim_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "simulation config must be a JSON object");
  SimConfig c;
  c.T = get_or<std::int64_t>(j, "T", 3060);
  c.interval_seconds = get_or<double>(j, "interval_seconds", 10.0);
  c.tick_size = get_or<double>(j, "tick_size", 0.01);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (j.contains("qtt_ratio") && !j.at("qtt_ratio").is_null()) c.qtt_ratio = get<double>(j, "qtt_ratio");
  if (j.contains("initial_book") && !j.at("initial_book").is_null())
    c.initial_book = initial_book_from_json(j.at("initial_book"));
  c.validate();
  return c;
}

Json sim_config_to_json(const SimConfig& c) {
  Json j{{"T", c.T}, {"interval_seconds", c.interval_seconds}, {"tick_size", c.tick_size}, {"seed", c.seed}};
  j["qtt_ratio"] = c.qtt_ratio ? Json(*c.qtt_ratio) : Json(nullptr);
  j["initial_book"] = c.initial_book ? initial_book_to_json(*c.initial_book) : Json(nullptr);
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

Json sim_metadata(const AgentParams& theta, const SimConfig& config, const SimResult& result) {
  const auto& t = result.totals;
  return Json{{"theta", params_to_json(theta)},
              {"config", sim_config_to_json(config)},
              {"seed", config.seed},
              {"totals",
               {{"lo_orders_passive", t.lo_orders_passive},
                {"lo_orders_direct", t.lo_orders_direct},
                {"cancel_orders_passive", t.cancel_orders_passive},
                {"cancel_orders_direct", t.cancel_orders_direct},
                {"mo_orders", t.mo_orders},
                {"mo_shares_filled", t.mo_shares_filled},
                {"discarded_shares", t.discarded_shares}}}};
}

}  // namespace lobforge
