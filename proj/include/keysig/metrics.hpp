// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace keysig {

/// Raw coverage counts for one run: covered items and the run's own
/// relevant-item total, per metric (BFC, SFC, TFC, COI).
struct CoverageEntry {
    std::string run;
    std::string metric;
    long covered = 0;
    long total = 0;
};

struct CoverageBatch {
    std::vector<CoverageEntry> entries;
};

/// Parses `run,metric,cov,total` CSV (header required) or a JSON array of
/// {run, metric, cov, total} objects, depending on the file content.
CoverageBatch load_coverage_batch(const std::string& path);
CoverageBatch parse_coverage_csv(const std::string& text);
CoverageBatch parse_coverage_json(const std::string& text);

/// Batch-relative normalized metric: covered / (largest total of that
/// metric anywhere in the batch). A metric whose totals are all zero is
/// undefined (nullopt), not zero.
struct NormalizedMetrics {
    std::map<std::string, long> num_max; // per metric
    // run -> metric -> M*
    std::map<std::string, std::map<std::string, std::optional<double>>> values;
};

NormalizedMetrics normalized_metrics(const CoverageBatch& batch);

std::string metrics_to_json(const NormalizedMetrics& m, const CoverageBatch& batch);
std::string metrics_to_table(const NormalizedMetrics& m);

} // namespace keysig
