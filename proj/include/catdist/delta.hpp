#pragma once

#include "catdist/types.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catdist {

enum class Measure {
    Matching,
    Eskin,
    Lin,
    Iof,
    Of,
    Goodall1,
    Goodall2,
    Goodall3,
    Goodall4,
    Ve,
    Vm,
    Ordered,
    Association,
};

enum class Divergence { Tvd, Kl, ChiSq, Custom };

enum class SupervisedMode { None, Supervised, Full };

enum class WeightPreset { Ones, Mean };

// (r_a, r_b, p_target) -> dissimilarity. The marginals of the target variable
// are passed so chi-square-like forms fit the same signature.
using CustomPhi =
    std::function<double(std::span<const double>, std::span<const double>, std::span<const double>)>;

/// Dissimilarity between two profiles r_a, r_b of one (source, target) pair.
struct ProfileDivergence {
    Divergence kind = Divergence::Tvd;
    double kl_floor = 1e-10;
    // Directed KL, sum r_a log2(r_a / r_b), instead of the symmetrised sum.
    bool kl_directed = false;
    CustomPhi custom;
    std::string custom_name = "custom";
    // Declared by whoever supplies `custom`.
    bool custom_symmetric = true;

    double operator()(std::span<const double> ra, std::span<const double> rb, std::span<const double> p_target) const;
    bool symmetric() const;
    std::string name() const;
};

/// Clamp for Lin's denominator; off means p_a + p_b = 1 is a domain error.
struct LinGuard {
    bool enabled = false;
    // 0 selects 1 / (2n).
    double epsilon = 0.0;
};

struct MeasureSpec {
    Measure measure = Measure::Matching;
    ProfileDivergence phi;
    SupervisedMode supervised = SupervisedMode::None;
    WeightPreset weight_preset = WeightPreset::Ones;
    // User-supplied w_ij (Q x Q, zero diagonal); overrides the preset.
    std::optional<Matrix> weights;
    LinGuard lin_guard;

    /// Canonical identifier, e.g. "goodall3", "kl", "supervised_full_tvd".
    std::string name() const;
    bool data_dependent() const { return measure != Measure::Matching && measure != Measure::Eskin && measure != Measure::Ordered; }
    bool association() const { return measure == Measure::Association; }
    nlohmann::json to_json() const;
    std::string fingerprint() const { return to_json().dump(); }

    /// Parses identifiers: matching, eskin, lin, iof, of, goodall1..4, ve, vm,
    /// ordered, tvd, kl, chisq, supervised_<phi>, supervised_full_<phi>.
    static MeasureSpec parse(std::string_view id);
};

/// All identifiers accepted by MeasureSpec::parse that need no user code.
std::vector<std::string> builtin_measure_names();

/// Square dissimilarity matrix between the levels of one variable. Levels
/// without data (unobserved in the training rows of a data-dependent measure)
/// are marked undefined and hold NaN in their row and column.
struct DeltaBlock {
    Index variable = 0;
    std::string name;
    std::vector<std::string> levels;
    Matrix values;
    std::vector<std::uint8_t> defined;
    bool symmetric = true;
    bool zero_diagonal = true;

    Index order() const { return static_cast<Index>(values.rows()); }
    bool level_defined(Code a) const { return defined[a] != 0; }
    bool fully_defined() const;
};

/// The diagonal blocks of Delta, one per variable, with provenance.
struct BlockDiagonalDelta {
    std::vector<DeltaBlock> blocks;
    MeasureSpec spec;
    // Fingerprint of the dataset the statistics came from; 0 for data-free measures.
    std::uint64_t source_fingerprint = 0;
    std::vector<std::string> notes;

    Index n_blocks() const { return blocks.size(); }
    Index total_levels() const;
    bool symmetric() const;
    bool zero_diagonal() const;
    /// Every block multiplied by c.
    BlockDiagonalDelta scaled(double c) const;
    /// The full Q* x Q* matrix; undefined entries stay NaN.
    Matrix dense() const;
    nlohmann::json manifest() const;
};

DeltaBlock make_block(Index variable, std::string name, std::vector<std::string> levels, Matrix values);

}  // namespace catdist
