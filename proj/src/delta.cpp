#include "catdist/delta.hpp"

#include "catdist/assoc_measures.hpp"
#include "catdist/error.hpp"

#include <cmath>
#include <limits>

namespace catdist {

double ProfileDivergence::operator()(std::span<const double> ra, std::span<const double> rb,
                                     std::span<const double> p_target) const {
    switch (kind) {
        case Divergence::Tvd:
            return phi_tvd(ra, rb);
        case Divergence::Kl:
            return kl_directed ? phi_kl_directed(ra, rb, kl_floor) : phi_kl(ra, rb, kl_floor);
        case Divergence::ChiSq:
            return phi_chisq(ra, rb, p_target);
        case Divergence::Custom:
            if (!custom) throw UsageError("custom divergence has no function");
            return custom(ra, rb, p_target);
    }
    return 0.0;
}

bool ProfileDivergence::symmetric() const {
    switch (kind) {
        case Divergence::Kl:
            return !kl_directed;
        case Divergence::Custom:
            return custom_symmetric;
        default:
            return true;
    }
}

std::string ProfileDivergence::name() const {
    switch (kind) {
        case Divergence::Tvd:
            return "tvd";
        case Divergence::Kl:
            return kl_directed ? "kl_directed" : "kl";
        case Divergence::ChiSq:
            return "chisq";
        case Divergence::Custom:
            return custom_name;
    }
    return "";
}

namespace {

struct NamedMeasure {
    const char* name;
    Measure measure;
};

constexpr NamedMeasure kIndependent[] = {
    {"matching", Measure::Matching}, {"eskin", Measure::Eskin},       {"lin", Measure::Lin},
    {"iof", Measure::Iof},           {"of", Measure::Of},             {"goodall1", Measure::Goodall1},
    {"goodall2", Measure::Goodall2}, {"goodall3", Measure::Goodall3}, {"goodall4", Measure::Goodall4},
    {"ve", Measure::Ve},             {"vm", Measure::Vm},             {"ordered", Measure::Ordered},
};

std::optional<ProfileDivergence> parse_divergence(std::string_view id) {
    ProfileDivergence phi;
    if (id == "tvd") {
        phi.kind = Divergence::Tvd;
    } else if (id == "kl") {
        phi.kind = Divergence::Kl;
    } else if (id == "kl_directed") {
        phi.kind = Divergence::Kl;
        phi.kl_directed = true;
    } else if (id == "chisq") {
        phi.kind = Divergence::ChiSq;
    } else {
        return std::nullopt;
    }
    return phi;
}

}  // namespace

std::string MeasureSpec::name() const {
    if (measure != Measure::Association) {
        for (const auto& m : kIndependent)
            if (m.measure == measure) return m.name;
    }
    switch (supervised) {
        case SupervisedMode::Supervised:
            return "supervised_" + phi.name();
        case SupervisedMode::Full:
            return "supervised_full_" + phi.name();
        case SupervisedMode::None:
            break;
    }
    return phi.name();
}

MeasureSpec MeasureSpec::parse(std::string_view id) {
    MeasureSpec spec;
    for (const auto& m : kIndependent) {
        if (id == m.name) {
            spec.measure = m.measure;
            return spec;
        }
    }
    std::string_view rest = id;
    if (rest.starts_with("supervised_full_")) {
        spec.supervised = SupervisedMode::Full;
        rest.remove_prefix(16);
    } else if (rest.starts_with("supervised_")) {
        spec.supervised = SupervisedMode::Supervised;
        rest.remove_prefix(11);
    }
    auto phi = parse_divergence(rest);
    if (!phi) throw UsageError("unknown measure '" + std::string(id) + "'");
    spec.measure = Measure::Association;
    spec.phi = *phi;
    return spec;
}

std::vector<std::string> builtin_measure_names() {
    std::vector<std::string> names;
    for (const auto& m : kIndependent) names.emplace_back(m.name);
    for (const char* phi : {"tvd", "kl", "chisq"}) names.emplace_back(phi);
    names.emplace_back("supervised_tvd");
    names.emplace_back("supervised_full_tvd");
    return names;
}

nlohmann::json MeasureSpec::to_json() const {
    nlohmann::json j{{"measure", name()}};
    if (measure == Measure::Lin) {
        j["lin_guard"] = lin_guard.enabled ? nlohmann::json(lin_guard.epsilon) : nlohmann::json(nullptr);
    }
    if (measure == Measure::Association) {
        j["phi"] = phi.name();
        if (phi.kind == Divergence::Kl) j["kl_floor"] = phi.kl_floor;
        if (supervised == SupervisedMode::None) {
            if (weights) {
                std::vector<std::vector<double>> rows(static_cast<std::size_t>(weights->rows()));
                for (Eigen::Index r = 0; r < weights->rows(); ++r)
                    for (Eigen::Index c = 0; c < weights->cols(); ++c) rows[r].push_back((*weights)(r, c));
                j["weights"] = rows;
            } else {
                j["weights"] = weight_preset == WeightPreset::Mean ? "mean" : "ones";
            }
        }
    }
    return j;
}

bool DeltaBlock::fully_defined() const {
    for (auto d : defined)
        if (!d) return false;
    return true;
}

DeltaBlock make_block(Index variable, std::string name, std::vector<std::string> levels, Matrix values) {
    DeltaBlock b;
    b.variable = variable;
    b.name = std::move(name);
    b.levels = std::move(levels);
    b.defined.assign(static_cast<std::size_t>(values.rows()), 1);
    b.values = std::move(values);
    return b;
}

Index BlockDiagonalDelta::total_levels() const {
    Index t = 0;
    for (const auto& b : blocks) t += b.order();
    return t;
}

bool BlockDiagonalDelta::symmetric() const {
    for (const auto& b : blocks)
        if (!b.symmetric) return false;
    return true;
}

bool BlockDiagonalDelta::zero_diagonal() const {
    for (const auto& b : blocks)
        if (!b.zero_diagonal) return false;
    return true;
}

BlockDiagonalDelta BlockDiagonalDelta::scaled(double c) const {
    BlockDiagonalDelta out = *this;
    for (auto& b : out.blocks) b.values *= c;
    return out;
}

Matrix BlockDiagonalDelta::dense() const {
    const auto total = static_cast<Eigen::Index>(total_levels());
    Matrix d = Matrix::Zero(total, total);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        d.block(offset, offset, b.values.rows(), b.values.cols()) = b.values;
        offset += b.values.rows();
    }
    return d;
}

nlohmann::json BlockDiagonalDelta::manifest() const {
    nlohmann::json blocks_json = nlohmann::json::array();
    for (const auto& b : blocks) {
        nlohmann::json entry{{"variable", b.name},
                             {"index", b.variable},
                             {"levels", b.levels},
                             {"symmetric", b.symmetric},
                             {"zero_diagonal", b.zero_diagonal}};
        std::vector<std::string> undefined;
        for (Index l = 0; l < b.levels.size(); ++l)
            if (!b.level_defined(static_cast<Code>(l))) undefined.push_back(b.levels[l]);
        if (!undefined.empty()) entry["undefined_levels"] = undefined;
        blocks_json.push_back(std::move(entry));
    }
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(source_fingerprint));
    return {{"measure", spec.to_json()}, {"blocks", blocks_json}, {"source_fingerprint", fp}, {"notes", notes}};
}

}  // namespace catdist
