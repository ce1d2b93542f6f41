// SPDX-License-Identifier: Apache-2.0
#include "keysig/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = to_lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double d = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size())
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    for (const auto& part : split(value, ',')) {
        std::string t = trim(part);
        if (!t.empty())
            out.push_back(t);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& it : items)
        out += (out.empty() ? "" : ", ") + it;
    return out;
}

} // namespace

void RunConfig::validate() const {
    if (rank.selection.k < 1)
        throw ConfigError("k must be >= 1");
    if (rank.selection.theta < 0.0 || rank.selection.theta > 1.0)
        throw ConfigError("theta must lie in [0, 1]");
    if (rank.selection.lambda < 0.0 || rank.selection.lambda > 1.0)
        throw ConfigError("lambda must lie in [0, 1]");
    if (rank.pagerank.damping <= 0.0 || rank.pagerank.damping >= 1.0)
        throw ConfigError("damping must lie in (0, 1)");
    if (rank.pagerank.epsilon <= 0.0)
        throw ConfigError("epsilon must be positive");
    if (rank.pagerank.max_iter < 1)
        throw ConfigError("max_iter must be >= 1");
    if (rank.weights.pagerank < 0 || rank.weights.observability < 0 ||
        rank.weights.output_boost < 0 || rank.weights.mux_branch < 0)
        throw ConfigError("feature weights must be non-negative");
    if (slice.node_cap < 1)
        throw ConfigError("node_cap must be >= 1");
    if (slice.depth_limit && *slice.depth_limit < 0)
        throw ConfigError("depth_limit must be >= 0");
    if (generation.max_attempts < 1)
        throw ConfigError("max_attempts must be >= 1");
    if (generation.transport_retries < 0)
        throw ConfigError("transport_retries must be >= 0");
    if (parallelism < 1)
        throw ConfigError("parallelism must be >= 1");
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
    RunConfig cfg = std::move(base);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "sources")
            cfg.sources = parse_list(value);
        else if (key == "top")
            cfg.top = value == "auto" ? "" : value;
        else if (key == "k")
            cfg.rank.selection.k = static_cast<int>(parse_int(key, value));
        else if (key == "theta")
            cfg.rank.selection.theta = parse_double(key, value);
        else if (key == "lambda")
            cfg.rank.selection.lambda = parse_double(key, value);
        else if (key == "weight_pagerank")
            cfg.rank.weights.pagerank = parse_double(key, value);
        else if (key == "weight_observability")
            cfg.rank.weights.observability = parse_double(key, value);
        else if (key == "weight_outputboost")
            cfg.rank.weights.output_boost = parse_double(key, value);
        else if (key == "weight_muxbranch")
            cfg.rank.weights.mux_branch = parse_double(key, value);
        else if (key == "damping")
            cfg.rank.pagerank.damping = parse_double(key, value);
        else if (key == "epsilon")
            cfg.rank.pagerank.epsilon = parse_double(key, value);
        else if (key == "max_iter")
            cfg.rank.pagerank.max_iter = static_cast<int>(parse_int(key, value));
        else if (key == "obs_mode") {
            if (value == "predecessor_out_edges")
                cfg.rank.obs.mode = ObsMode::PredecessorOutEdges;
            else if (value == "edges_into_root")
                cfg.rank.obs.mode = ObsMode::EdgesIntoRoot;
            else
                throw ConfigError("obs_mode must be predecessor_out_edges or edges_into_root");
        } else if (key == "count_temporal_as_data")
            cfg.rank.obs.count_temporal_as_data = parse_bool(key, value);
        else if (key == "clock_patterns")
            cfg.rank.filter.clock_patterns = parse_list(value);
        else if (key == "reset_patterns")
            cfg.rank.filter.reset_patterns = parse_list(value);
        else if (key == "drop_parameters")
            cfg.rank.filter.drop_parameters = parse_bool(key, value);
        else if (key == "drop_self_loops")
            cfg.rank.filter.drop_self_loops = parse_bool(key, value);
        else if (key == "drop_sensitivity_only")
            cfg.rank.filter.drop_sensitivity_only = parse_bool(key, value);
        else if (key == "depth_limit") {
            long v = parse_int(key, value);
            if (v == 0)
                cfg.slice.depth_limit.reset();
            else
                cfg.slice.depth_limit = static_cast<int>(v);
        } else if (key == "node_cap")
            cfg.slice.node_cap = static_cast<int>(parse_int(key, value));
        else if (key == "endpoint_url")
            cfg.endpoint.base_url = value;
        else if (key == "endpoint_path")
            cfg.endpoint.path = value;
        else if (key == "model")
            cfg.endpoint.model = value;
        else if (key == "api_key_env")
            cfg.endpoint.api_key_env = value;
        else if (key == "mock_dir")
            cfg.endpoint.mock_dir = value;
        else if (key == "token_budget")
            cfg.endpoint.token_budget = parse_int(key, value);
        else if (key == "transport_retries") {
            cfg.endpoint.transport_retries = static_cast<int>(parse_int(key, value));
            cfg.generation.transport_retries = cfg.endpoint.transport_retries;
        } else if (key == "max_attempts")
            cfg.generation.max_attempts = static_cast<int>(parse_int(key, value));
        else if (key == "attempt_feedback")
            cfg.generation.attempt_feedback = parse_bool(key, value);
        else if (key == "prompt_token_budget")
            cfg.generation.prompt_token_budget = static_cast<int>(parse_int(key, value));
        else if (key == "external_verifier")
            cfg.generation.external_verifier = value;
        else if (key == "template")
            cfg.template_path = value;
        else if (key == "overview")
            cfg.overview_path = value;
        else if (key == "parallelism")
            cfg.parallelism = static_cast<int>(parse_int(key, value));
        else if (key == "generate")
            cfg.generate = parse_bool(key, value);
        else if (key == "out_dir")
            cfg.out_dir = value;
        else
            throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "# keysig run configuration\n";
    os << "sources = " << join(cfg.sources) << "\n";
    os << "top = " << (cfg.top.empty() ? "auto" : cfg.top) << "\n";
    os << "k = " << cfg.rank.selection.k << "\n";
    os << "theta = " << cfg.rank.selection.theta << "\n";
    os << "lambda = " << cfg.rank.selection.lambda << "\n";
    os << "weight_pagerank = " << cfg.rank.weights.pagerank << "\n";
    os << "weight_observability = " << cfg.rank.weights.observability << "\n";
    os << "weight_outputboost = " << cfg.rank.weights.output_boost << "\n";
    os << "weight_muxbranch = " << cfg.rank.weights.mux_branch << "\n";
    os << "damping = " << cfg.rank.pagerank.damping << "\n";
    os << "epsilon = " << cfg.rank.pagerank.epsilon << "\n";
    os << "max_iter = " << cfg.rank.pagerank.max_iter << "\n";
    os << "obs_mode = "
       << (cfg.rank.obs.mode == ObsMode::PredecessorOutEdges ? "predecessor_out_edges"
                                                             : "edges_into_root")
       << "\n";
    os << "count_temporal_as_data = " << (cfg.rank.obs.count_temporal_as_data ? "true" : "false")
       << "\n";
    os << "clock_patterns = " << join(cfg.rank.filter.clock_patterns) << "\n";
    os << "reset_patterns = " << join(cfg.rank.filter.reset_patterns) << "\n";
    os << "drop_parameters = " << (cfg.rank.filter.drop_parameters ? "true" : "false") << "\n";
    os << "drop_self_loops = " << (cfg.rank.filter.drop_self_loops ? "true" : "false") << "\n";
    os << "drop_sensitivity_only = " << (cfg.rank.filter.drop_sensitivity_only ? "true" : "false")
       << "\n";
    os << "depth_limit = " << (cfg.slice.depth_limit ? *cfg.slice.depth_limit : 0) << "\n";
    os << "node_cap = " << cfg.slice.node_cap << "\n";
    os << "endpoint_url = " << cfg.endpoint.base_url << "\n";
    os << "endpoint_path = " << cfg.endpoint.path << "\n";
    os << "model = " << cfg.endpoint.model << "\n";
    os << "api_key_env = " << cfg.endpoint.api_key_env << "\n";
    os << "mock_dir = " << cfg.endpoint.mock_dir << "\n";
    os << "token_budget = " << cfg.endpoint.token_budget << "\n";
    os << "transport_retries = " << cfg.generation.transport_retries << "\n";
    os << "max_attempts = " << cfg.generation.max_attempts << "\n";
    os << "attempt_feedback = " << (cfg.generation.attempt_feedback ? "true" : "false") << "\n";
    os << "prompt_token_budget = " << cfg.generation.prompt_token_budget << "\n";
    os << "external_verifier = " << cfg.generation.external_verifier << "\n";
    os << "template = " << cfg.template_path << "\n";
    os << "overview = " << cfg.overview_path << "\n";
    os << "parallelism = " << cfg.parallelism << "\n";
    os << "generate = " << (cfg.generate ? "true" : "false") << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    return os.str();
}

} // namespace keysig
