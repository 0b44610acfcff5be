#pragma once

#include "catdist/delta.hpp"
#include "catdist/distance.hpp"
#include "catdist/types.hpp"
#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace catdist::cli {

/// Everything a run depends on. Loaded from a config file (JSON object or flat
/// key=value lines) and then overridden by flags; echoed as config.json so a
/// run can be repeated with `--config <out>/config.json`.
struct RunConfig {
    std::string command;
    std::string input;
    std::string against;
    std::string out = "catdist_out";

    std::string measure = "matching";
    std::vector<std::string> measures;  // cv and check; falls back to `measure`
    std::string weights;                // CSV path
    std::string weight_preset = "ones"; // ones | mean
    std::string response;
    std::string supervised_mode = "none";  // none | supervised | full (association measures)
    std::string lin_guard = "off";         // off | auto | epsilon
    double kl_floor = 1e-10;
    bool kl_directed = false;
    std::string ordered_scores;  // JSON file {"variable": [scores...]}

    std::string task = "knn";
    std::string unseen = "error";  // error | max
    Index k = 1;
    std::vector<Index> k_grid{1, 3, 5, 9, 15, 21};
    Index folds = 5;
    Index repeats = 10;
    std::uint64_t seed = 0;
    Index max_iter = 100;
    bool symmetrize = false;
    unsigned threads = 0;
    std::string format = "csv";  // dist output: csv | bin

    bool has_header = true;
    std::string delimiter = ",";
    std::string na = "error";  // error | drop

    // bench only
    Index bench_pairs = 200;

    nlohmann::json to_json() const;
    /// Sets one field from its textual form; keys use '_' or '-' interchangeably.
    void set(const std::string& key, const std::string& value);
    /// JSON object or key=value lines (blank lines and '#' comments ignored).
    static RunConfig from_text(std::string_view text);
};

MeasureSpec measure_spec(const RunConfig& config, const std::string& id);
UnseenPolicy unseen_policy(const RunConfig& config);

/// Runs one invocation (argv without the program name). Returns the exit code:
/// 0 success, 1 usage, 2 data, 3 numeric domain. Errors are reported on `err`
/// as a single JSON object line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace catdist::cli
