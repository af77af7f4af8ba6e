#ifndef WEYLWALK_EXPERIMENTS_HPP
#define WEYLWALK_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "weylwalk/walks.hpp"

namespace weylwalk::experiments {

using Value = std::variant<bool, int64_t, double, std::string, std::vector<double>>;
using Params = std::map<std::string, Value>;

/// Named building blocks a config file can define and scenarios reference.
struct Registry {
    std::map<std::string, seq::ParamSeq> sequences;
    std::map<std::string, blocks::Block> block_defs;
    std::map<std::string, operators::DiagOp> diag_ops;
};

struct Scenario {
    std::string name;
    Params params;
    uint64_t seed = 1;
};

struct Row {
    std::string label;
    double value = 0.0;
    double uncertainty = 0.0;
    std::string verdict; // empty, "pass" or "fail"
};

struct RunRecord {
    std::string scenario;
    Params params;
    uint64_t seed = 0;
    std::vector<Row> rows;
    std::vector<std::pair<std::string, bool>> verdicts;
    double wall_ms = 0.0;
    bool refused = false;
    std::string refusal_reason;

    bool pass() const;
    /// The row a report should surface for this scenario.
    const Row* key_row() const;
};

/// Names of all built-in scenarios, in canonical order.
const std::vector<std::string>& scenario_names();

/// Runs one scenario; unknown names or bad params throw, failed theorem
/// hypotheses produce a refusal record instead.
RunRecord run_scenario(const Scenario& s, const Registry& reg);

struct PersistPaths {
    std::string csv_path;
    std::string json_path;
};

/// Writes rows as CSV and the summary as JSON under out_dir; filenames are
/// deterministic in (scenario, seed).
PersistPaths persist(const RunRecord& r, const std::string& out_dir);

} // namespace weylwalk::experiments

#endif
