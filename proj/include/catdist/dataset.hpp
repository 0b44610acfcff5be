#pragma once

#include "catdist/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catdist {

struct VariableSchema {
    std::string name;
    std::vector<std::string> levels;
    // One score per level for ordered measures; level index is used when absent.
    std::optional<std::vector<double>> ordered_scores;

    Index level_count() const { return levels.size(); }
    std::optional<Code> find(std::string_view label) const;
};

/// Class labels of a response variable; codes index into `classes`.
struct Labeling {
    std::vector<Code> codes;
    std::vector<std::string> classes;

    Index size() const { return codes.size(); }
    Index n_classes() const { return classes.size(); }
};

/// Encodes labels in first-appearance order.
Labeling encode_labels(std::span<const std::string> labels);

/// Encodes labels with an existing class dictionary; unknown labels are appended.
Labeling encode_labels(std::span<const std::string> labels, std::vector<std::string> classes);

/// n rows of Q categorical variables stored column-wise as level codes; the
/// indicator matrix Z is implicit (row i has a single 1 at code_j(i) per block j).
///
/// Datasets produced by parsing observe every level. Subsets keep the parent's
/// schema, so some levels may be unobserved; `observed()` reports which.
class CategoricalDataset {
public:
    CategoricalDataset() = default;
    CategoricalDataset(std::vector<VariableSchema> variables, std::vector<std::vector<Code>> codes,
                       std::optional<Index> response_index = std::nullopt);

    Index n_rows() const { return n_rows_; }
    Index n_variables() const { return variables_.size(); }
    Index total_levels() const;

    const std::vector<VariableSchema>& variables() const { return variables_; }
    const VariableSchema& variable(Index j) const { return variables_.at(j); }
    Index level_count(Index j) const { return variables_.at(j).level_count(); }

    std::span<const Code> codes(Index j) const { return codes_.at(j); }
    Code code(Index row, Index j) const { return codes_[j][row]; }
    const std::string& label(Index row, Index j) const { return variables_[j].levels[codes_[j][row]]; }

    bool observed(Index j, Code level) const { return observed_[j][level] != 0; }
    bool fully_observed() const;

    /// Variable marked as the appended response, if any.
    std::optional<Index> response_index() const { return response_index_; }
    /// The dataset without its response variable (identity when there is none).
    CategoricalDataset predictors() const;

    /// FNV-1a hash of schema and codes; identifies the data a model was built on.
    std::uint64_t fingerprint() const { return fingerprint_; }

    friend bool operator==(const CategoricalDataset& a, const CategoricalDataset& b);

private:
    Index n_rows_ = 0;
    std::vector<VariableSchema> variables_;
    std::vector<std::vector<Code>> codes_;
    std::vector<std::vector<std::uint8_t>> observed_;
    std::optional<Index> response_index_;
    std::uint64_t fingerprint_ = 0;
};

enum class NaPolicy { Error, DropRow };

struct CsvOptions {
    bool has_header = true;
    char delimiter = ',';
    NaPolicy na_policy = NaPolicy::Error;
};

/// Parsed CSV cells. A missing cell is an unquoted empty field.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<std::string>>> rows;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
RawTable read_csv(std::string_view text, const CsvOptions& options);

/// Encodes every column as a categorical variable, levels in first-appearance order.
CategoricalDataset parse_csv(std::string_view text, const CsvOptions& options = {});
CategoricalDataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Encodes `table` against an existing schema (matched by column name when the
/// table has a header, else by position). Labels not in the schema are appended
/// as new levels; the returned dataset carries the extended schema.
CategoricalDataset encode_against(const std::vector<VariableSchema>& schema, const RawTable& table,
                                  const CsvOptions& options);

/// Re-expresses `ds` under `schema`, which must extend ds's schema level-wise.
CategoricalDataset with_schema(const CategoricalDataset& ds, const std::vector<VariableSchema>& schema);

struct SubsetOptions {
    bool empty_ok = false;
};

/// Rows of ds in the given order (duplicates allowed) under the parent's schema.
CategoricalDataset subset(const CategoricalDataset& ds, std::span<const Index> rows, const SubsetOptions& options = {});

/// Appends the response as variable Q and marks it.
CategoricalDataset append_response(const CategoricalDataset& ds, const Labeling& labels,
                                   const std::string& name = "response");

/// Removes the named column, returning the remaining dataset and the column as labels.
std::pair<CategoricalDataset, Labeling> split_response(const CategoricalDataset& ds, const std::string& column);

/// Cell-for-cell labels, row-major.
std::vector<std::vector<std::string>> decode(const CategoricalDataset& ds);

nlohmann::json dataset_manifest(const CategoricalDataset& ds);

struct FoldPlan {
    // assignments[r][row] = fold of row in repeat r.
    std::vector<std::vector<std::uint32_t>> assignments;
    Index n_folds = 0;
    Index n_repeats = 0;
    std::uint64_t seed = 0;

    std::vector<Index> test_rows(Index repeat, Index fold) const;
    std::vector<Index> train_rows(Index repeat, Index fold) const;
};

/// Repeated F-fold split, stratified by `labels` when given. Within each
/// stratum rows are shuffled and dealt round-robin; the dealing position carries
/// over between strata so overall fold sizes also differ by at most one.
FoldPlan split_folds(const CategoricalDataset& ds, const Labeling* labels, Index n_folds = 5, Index n_repeats = 10,
                     std::uint64_t seed = 0);

}  // namespace catdist
