#include "gpintent/run_params.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "gpintent/error.hpp"

namespace gpintent {

using nlohmann::json;

namespace {

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidArgument(fmt::format("'{}' must be a number", key));
    return v.get<double>();
}

bool flag(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw InvalidArgument(fmt::format("'{}' must be true or false", key));
    return v.get<bool>();
}

} // namespace

SimConfig parse_sim_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(fmt::format("params are not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw InvalidArgument("params must be a JSON object");
    SimConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "r") c.strategy.r = number(v, k);
        else if (k == "alpha") c.strategy.alpha = number(v, k);
        else if (k == "window_s") c.strategy.window_s = number(v, k);
        else if (k == "horizon_pct") c.strategy.horizon_pct = number(v, k);
        else if (k == "safe_from_nn_point") c.strategy.safe_from_nn_point = flag(v, k);
        else if (k == "r2_to_predicted_point") c.strategy.r2_to_predicted_point = flag(v, k);
        else if (k == "v_free") c.v_free = number(v, k);
        else if (k == "v_interior") c.v_interior = number(v, k);
        else if (k == "timeout") c.timeout = number(v, k);
        else if (k == "first_detection") c.first_detection = flag(v, k);
        else throw InvalidArgument(fmt::format("unknown params key '{}'", k));
    }
    c.validate();
    return c;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open params file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sim_config(ss.str());
}

std::string sim_config_to_json(const SimConfig& c) {
    json j = {{"r", c.strategy.r},
              {"alpha", c.strategy.alpha},
              {"window_s", c.strategy.window_s},
              {"horizon_pct", c.strategy.horizon_pct},
              {"safe_from_nn_point", c.strategy.safe_from_nn_point},
              {"r2_to_predicted_point", c.strategy.r2_to_predicted_point},
              {"v_free", c.v_free},
              {"v_interior", c.v_interior},
              {"timeout", c.timeout},
              {"first_detection", c.first_detection}};
    return j.dump();
}

} // namespace gpintent
