// SPDX-License-Identifier: Apache-2.0
#include "keysig/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

namespace {

const std::set<std::string> kMetrics = {"BFC", "SFC", "TFC", "COI"};

void validate_entry(const CoverageEntry& e) {
    std::string metric = e.metric;
    std::transform(metric.begin(), metric.end(), metric.begin(), ::toupper);
    if (!kMetrics.count(metric))
        throw ConfigError("unknown coverage metric '" + e.metric + "' (expected BFC, SFC, TFC or COI)");
    if (e.covered < 0 || e.total < 0)
        throw ConfigError("coverage counts must be non-negative (run '" + e.run + "', metric '" +
                          e.metric + "')");
    if (e.covered > e.total)
        throw ConfigError("covered items exceed the run's own total (run '" + e.run + "', metric '" +
                          e.metric + "')");
}

} // namespace

CoverageBatch parse_coverage_csv(const std::string& text) {
    CoverageBatch batch;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto cells = split(t, ',');
        if (header) {
            header = false;
            if (cells.size() >= 4 && to_lower(trim(cells[0])) == "run")
                continue; // skip the header row
        }
        if (cells.size() != 4)
            throw ConfigError("coverage CSV line " + std::to_string(lineno) +
                              ": expected run,metric,cov,total");
        CoverageEntry e;
        e.run = trim(cells[0]);
        e.metric = trim(cells[1]);
        std::transform(e.metric.begin(), e.metric.end(), e.metric.begin(), ::toupper);
        try {
            e.covered = std::stol(trim(cells[2]));
            e.total = std::stol(trim(cells[3]));
        } catch (const std::exception&) {
            throw ConfigError("coverage CSV line " + std::to_string(lineno) + ": malformed count");
        }
        validate_entry(e);
        batch.entries.push_back(std::move(e));
    }
    return batch;
}

CoverageBatch parse_coverage_json(const std::string& text) {
    CoverageBatch batch;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid coverage JSON: ") + e.what());
    }
    if (!j.is_array())
        throw ConfigError("coverage JSON must be an array of {run, metric, cov, total} objects");
    for (const auto& o : j) {
        CoverageEntry e;
        e.run = o.at("run").get<std::string>();
        e.metric = o.at("metric").get<std::string>();
        std::transform(e.metric.begin(), e.metric.end(), e.metric.begin(), ::toupper);
        e.covered = o.at("cov").get<long>();
        e.total = o.at("total").get<long>();
        validate_entry(e);
        batch.entries.push_back(std::move(e));
    }
    return batch;
}

CoverageBatch load_coverage_batch(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open coverage batch '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            continue;
        return c == '[' ? parse_coverage_json(text) : parse_coverage_csv(text);
    }
    throw EmptyBatch("coverage batch '" + path + "' is empty");
}

NormalizedMetrics normalized_metrics(const CoverageBatch& batch) {
    if (batch.entries.empty())
        throw EmptyBatch("coverage batch contains no runs");

    NormalizedMetrics out;
    for (const auto& e : batch.entries) {
        auto it = out.num_max.find(e.metric);
        if (it == out.num_max.end())
            out.num_max[e.metric] = e.total;
        else
            it->second = std::max(it->second, e.total);
    }
    for (const auto& e : batch.entries) {
        long denom = out.num_max.at(e.metric);
        std::optional<double> value;
        if (denom > 0)
            value = static_cast<double>(e.covered) / static_cast<double>(denom);
        out.values[e.run][e.metric] = value;
    }
    return out;
}

std::string metrics_to_json(const NormalizedMetrics& m, const CoverageBatch& batch) {
    nlohmann::ordered_json j;
    j["schema"] = "keysig-metrics/1";
    j["note"] = "values are batch-relative (largest total in the batch as denominator), "
                "not absolute design coverage";
    j["num_max"] = nlohmann::ordered_json::object();
    for (const auto& [metric, v] : m.num_max)
        j["num_max"][metric] = v;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& [run, metrics] : m.values) {
        nlohmann::ordered_json r;
        r["run"] = run;
        r["metrics"] = nlohmann::ordered_json::object();
        for (const auto& [metric, value] : metrics) {
            long cov = 0, total = 0;
            for (const auto& e : batch.entries)
                if (e.run == run && e.metric == metric) {
                    cov = e.covered;
                    total = e.total;
                }
            nlohmann::ordered_json cell;
            cell["cov"] = cov;
            cell["total"] = total;
            if (value)
                cell["normalized"] = *value;
            else
                cell["normalized"] = nullptr;
            r["metrics"][metric] = std::move(cell);
        }
        j["runs"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

std::string metrics_to_table(const NormalizedMetrics& m) {
    std::ostringstream os;
    std::vector<std::string> metrics;
    for (const auto& [metric, v] : m.num_max)
        metrics.push_back(metric);

    os << "run";
    for (const auto& metric : metrics)
        os << '\t' << metric << '*';
    os << '\n';
    for (const auto& [run, values] : m.values) {
        os << run;
        for (const auto& metric : metrics) {
            os << '\t';
            auto it = values.find(metric);
            if (it == values.end() || !it->second) {
                os << "undefined";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", *it->second);
                os << buf;
            }
        }
        os << '\n';
    }
    return os.str();
}

} // namespace keysig
