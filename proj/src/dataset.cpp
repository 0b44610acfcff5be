#include "catdist/dataset.hpp"

#include "catdist/error.hpp"
#include "catdist/random.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace catdist {

namespace {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void str(const std::string& s) {
        const std::uint64_t n = s.size();
        bytes(&n, sizeof n);
        bytes(s.data(), s.size());
    }
    template <typename T>
    void value(T v) {
        bytes(&v, sizeof v);
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string cell_name(Index row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

std::optional<Code> VariableSchema::find(std::string_view label) const {
    auto it = std::find(levels.begin(), levels.end(), label);
    if (it == levels.end()) return std::nullopt;
    return static_cast<Code>(it - levels.begin());
}

Labeling encode_labels(std::span<const std::string> labels) { return encode_labels(labels, {}); }

Labeling encode_labels(std::span<const std::string> labels, std::vector<std::string> classes) {
    Labeling out;
    out.classes = std::move(classes);
    std::unordered_map<std::string, Code> index;
    for (Code c = 0; c < out.classes.size(); ++c) index.emplace(out.classes[c], c);
    out.codes.reserve(labels.size());
    for (const auto& l : labels) {
        auto [it, inserted] = index.emplace(l, static_cast<Code>(out.classes.size()));
        if (inserted) out.classes.push_back(l);
        out.codes.push_back(it->second);
    }
    return out;
}

CategoricalDataset::CategoricalDataset(std::vector<VariableSchema> variables, std::vector<std::vector<Code>> codes,
                                       std::optional<Index> response_index)
    : variables_(std::move(variables)), codes_(std::move(codes)), response_index_(response_index) {
    if (variables_.size() != codes_.size())
        throw DataError("dataset: " + std::to_string(variables_.size()) + " variables but " +
                        std::to_string(codes_.size()) + " code columns");
    if (response_index_ && *response_index_ >= variables_.size())
        throw UsageError("dataset: response index out of range");
    n_rows_ = codes_.empty() ? 0 : codes_.front().size();
    observed_.resize(variables_.size());
    Fnv1a hash;
    hash.value<std::uint64_t>(n_rows_);
    for (Index j = 0; j < variables_.size(); ++j) {
        const auto& var = variables_[j];
        if (codes_[j].size() != n_rows_)
            throw DataError("dataset: column '" + var.name + "' has " + std::to_string(codes_[j].size()) +
                            " rows, expected " + std::to_string(n_rows_));
        if (var.ordered_scores && var.ordered_scores->size() != var.level_count())
            throw DataError("dataset: variable '" + var.name + "' has " + std::to_string(var.level_count()) +
                            " levels but " + std::to_string(var.ordered_scores->size()) + " ordered scores");
        std::vector<std::string> sorted = var.levels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DataError("dataset: variable '" + var.name + "' has duplicate level labels");
        observed_[j].assign(var.level_count(), 0);
        for (Index i = 0; i < n_rows_; ++i) {
            const Code c = codes_[j][i];
            if (c >= var.level_count())
                throw DataError("dataset: code " + std::to_string(c) + " out of range at " + cell_name(i, var.name));
            observed_[j][c] = 1;
        }
        hash.str(var.name);
        for (const auto& l : var.levels) hash.str(l);
        hash.bytes(codes_[j].data(), codes_[j].size() * sizeof(Code));
    }
    fingerprint_ = hash.digest();
}

Index CategoricalDataset::total_levels() const {
    Index total = 0;
    for (const auto& v : variables_) total += v.level_count();
    return total;
}

bool CategoricalDataset::fully_observed() const {
    for (const auto& col : observed_)
        if (std::find(col.begin(), col.end(), 0) != col.end()) return false;
    return true;
}

CategoricalDataset CategoricalDataset::predictors() const {
    if (!response_index_) return *this;
    auto vars = variables_;
    auto codes = codes_;
    vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(*response_index_));
    codes.erase(codes.begin() + static_cast<std::ptrdiff_t>(*response_index_));
    return CategoricalDataset(std::move(vars), std::move(codes));
}

bool operator==(const CategoricalDataset& a, const CategoricalDataset& b) {
    if (a.n_rows_ != b.n_rows_ || a.codes_ != b.codes_ || a.response_index_ != b.response_index_) return false;
    if (a.variables_.size() != b.variables_.size()) return false;
    for (Index j = 0; j < a.variables_.size(); ++j) {
        const auto& x = a.variables_[j];
        const auto& y = b.variables_[j];
        if (x.name != y.name || x.levels != y.levels || x.ordered_scores != y.ordered_scores) return false;
    }
    return true;
}

RawTable read_csv(std::string_view text, const CsvOptions& options) {
    std::vector<std::vector<std::optional<std::string>>> records;
    std::vector<std::optional<std::string>> record;
    std::string field;
    bool quoted = false;     // current field was quoted, so it is present even if empty
    bool in_quotes = false;
    bool after_quote = false;
    Index line = 1;

    auto end_field = [&] {
        if (quoted || !field.empty())
            record.emplace_back(std::move(field));
        else
            record.emplace_back(std::nullopt);
        field.clear();
        quoted = after_quote = false;
    };
    auto end_record = [&] {
        // Blank lines are skipped.
        if (record.empty() && field.empty() && !quoted) return;
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (ch == '"') {
                in_quotes = false;
                after_quote = true;
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
        } else if (ch == options.delimiter) {
            end_field();
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
            ++line;
        } else if (after_quote) {
            throw DataError("csv: unexpected character after closing quote on line " + std::to_string(line));
        } else if (ch == '"' && field.empty()) {
            quoted = in_quotes = true;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field on line " + std::to_string(line));
    end_record();

    RawTable table;
    if (records.empty()) throw DataError("csv: empty table");
    std::size_t first = 0;
    if (options.has_header) {
        for (const auto& cell : records.front()) table.header.push_back(cell.value_or(""));
        first = 1;
    } else {
        for (std::size_t c = 0; c < records.front().size(); ++c) table.header.push_back("V" + std::to_string(c + 1));
    }
    const std::size_t width = table.header.size();
    for (std::size_t r = first; r < records.size(); ++r) {
        if (records[r].size() != width)
            throw DataError("csv: ragged row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(width));
        table.rows.push_back(std::move(records[r]));
    }
    if (table.rows.empty()) throw DataError("csv: empty table (no data rows)");
    return table;
}

namespace {

// Applies the NA policy and returns the kept row indices of the table.
std::vector<Index> kept_rows(const RawTable& table, const CsvOptions& options) {
    std::vector<Index> kept;
    for (Index r = 0; r < table.rows.size(); ++r) {
        bool missing = false;
        for (Index c = 0; c < table.rows[r].size(); ++c) {
            if (!table.rows[r][c]) {
                if (options.na_policy == NaPolicy::Error)
                    throw DataError("csv: missing value at data row " + std::to_string(r + 1) + ", column '" +
                                    table.header[c] + "'");
                missing = true;
            }
        }
        if (!missing) kept.push_back(r);
    }
    if (kept.empty()) throw DataError("csv: empty table after dropping rows with missing values");
    return kept;
}

}  // namespace

CategoricalDataset parse_csv(std::string_view text, const CsvOptions& options) {
    const RawTable table = read_csv(text, options);
    const auto kept = kept_rows(table, options);
    std::vector<VariableSchema> vars(table.header.size());
    std::vector<std::vector<Code>> codes(table.header.size());
    for (Index c = 0; c < table.header.size(); ++c) {
        vars[c].name = table.header[c];
        std::unordered_map<std::string, Code> index;
        codes[c].reserve(kept.size());
        for (Index r : kept) {
            const std::string& label = *table.rows[r][c];
            auto [it, inserted] = index.emplace(label, static_cast<Code>(vars[c].levels.size()));
            if (inserted) vars[c].levels.push_back(label);
            codes[c].push_back(it->second);
        }
    }
    return CategoricalDataset(std::move(vars), std::move(codes));
}

CategoricalDataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), options);
}

CategoricalDataset encode_against(const std::vector<VariableSchema>& schema, const RawTable& table,
                                  const CsvOptions& options) {
    const auto kept = kept_rows(table, options);
    std::vector<Index> column_of(schema.size());
    for (Index j = 0; j < schema.size(); ++j) {
        if (options.has_header) {
            auto it = std::find(table.header.begin(), table.header.end(), schema[j].name);
            if (it == table.header.end()) throw DataError("csv: column '" + schema[j].name + "' not found");
            column_of[j] = static_cast<Index>(it - table.header.begin());
        } else {
            if (j >= table.header.size())
                throw DataError("csv: expected at least " + std::to_string(schema.size()) + " columns");
            column_of[j] = j;
        }
    }
    auto vars = schema;
    std::vector<std::vector<Code>> codes(schema.size());
    for (Index j = 0; j < schema.size(); ++j) {
        std::unordered_map<std::string, Code> index;
        for (Code l = 0; l < vars[j].levels.size(); ++l) index.emplace(vars[j].levels[l], l);
        const Index before = vars[j].level_count();
        for (Index r : kept) {
            const std::string& label = *table.rows[r][column_of[j]];
            auto [it, inserted] = index.emplace(label, static_cast<Code>(vars[j].levels.size()));
            if (inserted) vars[j].levels.push_back(label);
            codes[j].push_back(it->second);
        }
        if (vars[j].ordered_scores && vars[j].level_count() != before)
            throw DataError("csv: variable '" + vars[j].name + "' has labels without ordered scores");
    }
    return CategoricalDataset(std::move(vars), std::move(codes));
}

CategoricalDataset with_schema(const CategoricalDataset& ds, const std::vector<VariableSchema>& schema) {
    if (schema.size() != ds.n_variables()) throw DataError("with_schema: variable count mismatch");
    std::vector<std::vector<Code>> codes;
    for (Index j = 0; j < schema.size(); ++j) {
        const auto& old_levels = ds.variable(j).levels;
        if (schema[j].name != ds.variable(j).name || schema[j].levels.size() < old_levels.size() ||
            !std::equal(old_levels.begin(), old_levels.end(), schema[j].levels.begin()))
            throw DataError("with_schema: schema for '" + schema[j].name + "' does not extend the dataset's levels");
        auto col = ds.codes(j);
        codes.emplace_back(col.begin(), col.end());
    }
    return CategoricalDataset(schema, std::move(codes), ds.response_index());
}

CategoricalDataset subset(const CategoricalDataset& ds, std::span<const Index> rows, const SubsetOptions& options) {
    if (rows.empty() && !options.empty_ok) throw UsageError("subset: empty row list");
    std::vector<std::vector<Code>> codes(ds.n_variables());
    for (Index r : rows)
        if (r >= ds.n_rows())
            throw UsageError("subset: row index " + std::to_string(r) + " out of range (n=" +
                             std::to_string(ds.n_rows()) + ")");
    for (Index j = 0; j < ds.n_variables(); ++j) {
        auto col = ds.codes(j);
        codes[j].reserve(rows.size());
        for (Index r : rows) codes[j].push_back(col[r]);
    }
    return CategoricalDataset(ds.variables(), std::move(codes), ds.response_index());
}

CategoricalDataset append_response(const CategoricalDataset& ds, const Labeling& labels, const std::string& name) {
    if (labels.size() != ds.n_rows())
        throw UsageError("append_response: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(ds.n_rows()) + " rows");
    if (ds.response_index()) throw UsageError("append_response: dataset already has a response");
    std::vector<std::uint8_t> seen(labels.n_classes(), 0);
    Index distinct = 0;
    for (Code c : labels.codes) {
        if (c >= labels.n_classes()) throw DataError("append_response: label code out of range");
        if (!seen[c]) {
            seen[c] = 1;
            ++distinct;
        }
    }
    if (distinct < 2) throw DataError("append_response: response has a single class");
    auto vars = ds.variables();
    std::vector<std::vector<Code>> codes;
    for (Index j = 0; j < ds.n_variables(); ++j) {
        auto col = ds.codes(j);
        codes.emplace_back(col.begin(), col.end());
    }
    vars.push_back(VariableSchema{name, labels.classes, std::nullopt});
    codes.push_back(labels.codes);
    const Index response = vars.size() - 1;
    return CategoricalDataset(std::move(vars), std::move(codes), response);
}

std::pair<CategoricalDataset, Labeling> split_response(const CategoricalDataset& ds, const std::string& column) {
    Index found = ds.n_variables();
    for (Index j = 0; j < ds.n_variables(); ++j)
        if (ds.variable(j).name == column) found = j;
    if (found == ds.n_variables()) throw UsageError("response column '" + column + "' not found");
    Labeling labels;
    labels.classes = ds.variable(found).levels;
    auto col = ds.codes(found);
    labels.codes.assign(col.begin(), col.end());
    std::vector<VariableSchema> vars;
    std::vector<std::vector<Code>> codes;
    for (Index j = 0; j < ds.n_variables(); ++j) {
        if (j == found) continue;
        vars.push_back(ds.variable(j));
        auto c = ds.codes(j);
        codes.emplace_back(c.begin(), c.end());
    }
    if (vars.empty()) throw DataError("no predictor columns besides the response '" + column + "'");
    return {CategoricalDataset(std::move(vars), std::move(codes)), std::move(labels)};
}

std::vector<std::vector<std::string>> decode(const CategoricalDataset& ds) {
    std::vector<std::vector<std::string>> out(ds.n_rows(), std::vector<std::string>(ds.n_variables()));
    for (Index i = 0; i < ds.n_rows(); ++i)
        for (Index j = 0; j < ds.n_variables(); ++j) out[i][j] = ds.label(i, j);
    return out;
}

nlohmann::json dataset_manifest(const CategoricalDataset& ds) {
    nlohmann::json vars = nlohmann::json::array();
    for (Index j = 0; j < ds.n_variables(); ++j) {
        const auto& v = ds.variable(j);
        nlohmann::json entry{{"name", v.name}, {"levels", v.levels}};
        if (v.ordered_scores) entry["ordered_scores"] = *v.ordered_scores;
        std::vector<std::string> unobserved;
        for (Code l = 0; l < v.level_count(); ++l)
            if (!ds.observed(j, l)) unobserved.push_back(v.levels[l]);
        if (!unobserved.empty()) entry["unobserved_levels"] = unobserved;
        vars.push_back(std::move(entry));
    }
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(ds.fingerprint()));
    nlohmann::json out{{"n_rows", ds.n_rows()}, {"variables", vars}, {"fingerprint", fp}};
    if (ds.response_index()) out["response_index"] = *ds.response_index();
    return out;
}

std::vector<Index> FoldPlan::test_rows(Index repeat, Index fold) const {
    std::vector<Index> rows;
    const auto& a = assignments.at(repeat);
    for (Index i = 0; i < a.size(); ++i)
        if (a[i] == fold) rows.push_back(i);
    return rows;
}

std::vector<Index> FoldPlan::train_rows(Index repeat, Index fold) const {
    std::vector<Index> rows;
    const auto& a = assignments.at(repeat);
    for (Index i = 0; i < a.size(); ++i)
        if (a[i] != fold) rows.push_back(i);
    return rows;
}

FoldPlan split_folds(const CategoricalDataset& ds, const Labeling* labels, Index n_folds, Index n_repeats,
                     std::uint64_t seed) {
    const Index n = ds.n_rows();
    if (n_folds < 2) throw UsageError("split_folds: need at least 2 folds");
    if (n_repeats < 1) throw UsageError("split_folds: need at least 1 repeat");
    if (n_folds > n)
        throw UsageError("split_folds: " + std::to_string(n_folds) + " folds for " + std::to_string(n) + " rows");
    if (labels && labels->size() != n) throw UsageError("split_folds: label count does not match rows");

    std::vector<std::vector<Index>> strata;
    if (labels) {
        strata.resize(labels->n_classes());
        for (Index i = 0; i < n; ++i) strata.at(labels->codes[i]).push_back(i);
        std::erase_if(strata, [](const auto& s) { return s.empty(); });
    } else {
        strata.emplace_back(n);
        std::iota(strata[0].begin(), strata[0].end(), Index{0});
    }

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.n_repeats = n_repeats;
    plan.seed = seed;
    plan.assignments.assign(n_repeats, std::vector<std::uint32_t>(n, 0));
    for (Index r = 0; r < n_repeats; ++r) {
        Rng rng(derive_seed(seed, {r}));
        // Random start so that small strata do not always land in fold 0.
        Index next = rng.below(n_folds);
        for (auto stratum : strata) {
            rng.shuffle(std::span<Index>(stratum));
            for (Index row : stratum) {
                plan.assignments[r][row] = static_cast<std::uint32_t>(next);
                next = (next + 1) % n_folds;
            }
        }
    }
    return plan;
}

}  // namespace catdist
