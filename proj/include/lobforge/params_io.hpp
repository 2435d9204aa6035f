#pragma once

#include <string>

#include <json.hpp>

#include "lobforge/agents.hpp"

namespace lobforge {

using Json = nlohmann::json;

/// Accepts either a full skew_lo vector or a scalar gamma0, and either a full
/// sigma matrix or sigma_trace (spread evenly over a diagonal). Throws InvalidConfig.
AgentParams params_from_json(const Json& j);
/// Always writes the explicit form.
Json params_to_json(const AgentParams& p);

OrderSizeModel order_sizes_from_json(const Json& j);
Json order_sizes_to_json(const OrderSizeModel& m);

InitialBookSpec initial_book_from_json(const Json& j);
Json initial_book_to_json(const InitialBookSpec& s);

SimConfig sim_config_from_json(const Json& j);
Json sim_config_to_json(const SimConfig& c);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Metadata written next to a simulated snapshot CSV.
Json sim_metadata(const AgentParams& theta, const SimConfig& config, const SimResult& result);

}  // namespace lobforge
