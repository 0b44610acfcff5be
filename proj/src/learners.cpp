#include "catdist/learners.hpp"

#include "catdist/error.hpp"
#include "catdist/io.hpp"
#include "catdist/measures.hpp"
#include "catdist/parallel.hpp"
#include "catdist/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace catdist {

namespace {

struct Neighbour {
    double distance;
    Index row;
};

// Neighbours of test column t, closest first, ties by training row.
std::vector<Neighbour> sorted_neighbours(const DistanceMatrix& d, Index t, Index keep) {
    std::vector<Neighbour> nb(d.rows());
    for (Index r = 0; r < d.rows(); ++r) nb[r] = {d(r, t), r};
    auto less = [](const Neighbour& a, const Neighbour& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
    };
    keep = std::min(keep, nb.size());
    std::partial_sort(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(keep), nb.end(), less);
    nb.resize(keep);
    return nb;
}

Code vote(const std::vector<Neighbour>& nb, Index k, const Labeling& labels) {
    std::vector<Index> count(labels.n_classes(), 0);
    std::vector<double> dist(labels.n_classes(), 0.0);
    for (Index m = 0; m < k; ++m) {
        const Code c = labels.codes[nb[m].row];
        ++count[c];
        dist[c] += nb[m].distance;
    }
    Code best = 0;
    for (Code c = 1; c < count.size(); ++c) {
        if (count[c] > count[best] || (count[c] == count[best] && count[c] > 0 && dist[c] < dist[best])) best = c;
    }
    return best;
}

void check_train_labels(const DistanceMatrix& d, const Labeling& labels) {
    if (labels.size() != d.rows())
        throw UsageError("knn: " + std::to_string(labels.size()) + " labels for " + std::to_string(d.rows()) +
                         " training rows");
    for (Code c : labels.codes)
        if (c >= labels.n_classes()) throw DataError("knn: label code out of range");
}

}  // namespace

std::vector<Labeling> knn_predict_grid(const DistanceMatrix& train_test, const Labeling& train_labels,
                                       const std::vector<Index>& ks) {
    check_train_labels(train_test, train_labels);
    Index kmax = 0;
    for (Index k : ks) {
        if (k < 1) throw UsageError("knn: k must be at least 1");
        if (k > train_test.rows())
            throw UsageError("knn: k = " + std::to_string(k) + " exceeds the " + std::to_string(train_test.rows()) +
                             " training rows");
        kmax = std::max(kmax, k);
    }
    std::vector<Labeling> out(ks.size());
    for (auto& l : out) {
        l.classes = train_labels.classes;
        l.codes.resize(train_test.cols());
    }
    for (Index t = 0; t < train_test.cols(); ++t) {
        const auto nb = sorted_neighbours(train_test, t, kmax);
        for (Index g = 0; g < ks.size(); ++g) out[g].codes[t] = vote(nb, ks[g], train_labels);
    }
    return out;
}

Labeling knn_predict_from_distances(const DistanceMatrix& train_test, const Labeling& train_labels, Index k) {
    return knn_predict_grid(train_test, train_labels, {k}).front();
}

Labeling knn_predict(const CategoricalDataset& train, const Labeling& labels, const CategoricalDataset& test,
                     const BlockDiagonalDelta& delta, Index k, const DistanceOptions& options) {
    if (delta.source_fingerprint != 0 && delta.source_fingerprint != train.predictors().fingerprint())
        throw UsageError("knn: Delta was not built from these training rows");
    if (k > train.n_rows())
        throw UsageError("knn: k = " + std::to_string(k) + " exceeds the " + std::to_string(train.n_rows()) +
                         " training rows");
    const DistanceMatrix d = cross_distances(train, test, delta, options);
    return knn_predict_from_distances(d, labels, k);
}

namespace {

// Assigns rows to medoids; a medoid row always joins its own cluster.
double assign_rows(const DistanceMatrix& d, const std::vector<Index>& medoids, std::vector<Code>& assignment) {
    const Index n = d.rows();
    std::vector<int> medoid_pos(n, -1);
    for (Index p = 0; p < medoids.size(); ++p) medoid_pos[medoids[p]] = static_cast<int>(p);
    double cost = 0.0;
    for (Index x = 0; x < n; ++x) {
        Code best = 0;
        if (medoid_pos[x] >= 0) {
            best = static_cast<Code>(medoid_pos[x]);
        } else {
            for (Code p = 1; p < medoids.size(); ++p)
                if (d(x, medoids[p]) < d(x, medoids[best])) best = p;
        }
        assignment[x] = best;
        cost += d(x, medoids[best]);
    }
    return cost;
}

}  // namespace

PamResult pam_fit(const DistanceMatrix& d, Index k, const PamOptions& options) {
    const Index n = d.rows();
    if (d.rows() != d.cols()) throw UsageError("pam: distance matrix must be square");
    if (!d.symmetric) throw UsageError("pam: distance matrix is not symmetric (symmetrize it explicitly)");
    if (k < 1 || k > n) throw UsageError("pam: k = " + std::to_string(k) + " for " + std::to_string(n) + " rows");
    if (options.max_iter < 1) throw UsageError("pam: max_iter must be at least 1");

    PamResult res;
    std::vector<Index> rows(n);
    std::iota(rows.begin(), rows.end(), Index{0});
    Rng rng(options.seed);
    for (Index p = 0; p < k; ++p) std::swap(rows[p], rows[p + rng.below(n - p)]);
    res.medoids.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
    res.assignment.assign(n, 0);

    std::vector<std::vector<Index>> members(k);
    while (true) {
        res.cost = assign_rows(d, res.medoids, res.assignment);
        res.cost_history.push_back(res.cost);
        if (res.iterations == options.max_iter) break;
        ++res.iterations;

        for (auto& m : members) m.clear();
        for (Index x = 0; x < n; ++x) members[res.assignment[x]].push_back(x);
        std::vector<Index> updated(k);
        for (Index c = 0; c < k; ++c) {
            double best_sum = 0.0;
            Index best = members[c].front();
            bool first = true;
            for (Index cand : members[c]) {
                double s = 0.0;
                for (Index x : members[c]) s += d(x, cand);
                if (first || s < best_sum) {
                    best_sum = s;
                    best = cand;
                    first = false;
                }
            }
            updated[c] = best;
        }
        std::vector<Index> before = res.medoids;
        std::vector<Index> after = updated;
        std::sort(before.begin(), before.end());
        std::sort(after.begin(), after.end());
        if (before == after) {
            res.converged = true;
            break;
        }
        res.medoids = std::move(updated);
    }
    return res;
}

std::vector<Code> assign_to_medoids(const DistanceMatrix& medoid_rows) {
    if (medoid_rows.rows() == 0) throw UsageError("pam_assign: no medoids");
    std::vector<Code> out(medoid_rows.cols(), 0);
    for (Index t = 0; t < medoid_rows.cols(); ++t) {
        Code best = 0;
        for (Code p = 1; p < medoid_rows.rows(); ++p)
            if (medoid_rows(p, t) < medoid_rows(best, t)) best = p;
        out[t] = best;
    }
    return out;
}

std::vector<Code> pam_assign(const CategoricalDataset& train, const std::vector<Index>& medoid_rows,
                             const CategoricalDataset& test, const BlockDiagonalDelta& delta,
                             const DistanceOptions& options) {
    const CategoricalDataset medoids = subset(train, medoid_rows);
    return assign_to_medoids(cross_distances(medoids, test, delta, options));
}

double accuracy(std::span<const Code> predicted, std::span<const Code> truth) {
    if (predicted.size() != truth.size())
        throw UsageError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    if (truth.empty()) throw UsageError("accuracy: no labels");
    Index hits = 0;
    for (Index i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const Labeling& predicted, const Labeling& truth) {
    if (predicted.classes == truth.classes) return accuracy(predicted.codes, truth.codes);
    // Compare by label text when the dictionaries differ.
    if (predicted.size() != truth.size()) return accuracy(predicted.codes, truth.codes);
    Index hits = 0;
    for (Index i = 0; i < truth.size(); ++i)
        hits += predicted.classes.at(predicted.codes[i]) == truth.classes.at(truth.codes[i]);
    if (truth.size() == 0) throw UsageError("accuracy: no labels");
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double adjusted_rand_index(std::span<const Code> a, std::span<const Code> b) {
    if (a.size() != b.size())
        throw UsageError("ari: labelings have different lengths (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    if (a.size() < 2) throw UsageError("ari: need at least two observations");
    const Index ka = *std::max_element(a.begin(), a.end()) + Index{1};
    const Index kb = *std::max_element(b.begin(), b.end()) + Index{1};
    std::vector<std::int64_t> table(ka * kb, 0), ra(ka, 0), rb(kb, 0);
    for (Index i = 0; i < a.size(); ++i) {
        ++table[a[i] * kb + b[i]];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    using Wide = __int128;
    auto pairs = [](std::int64_t m) { return static_cast<Wide>(m) * (m - 1) / 2; };
    Wide index = 0, sum_a = 0, sum_b = 0;
    for (auto c : table) index += pairs(c);
    for (auto c : ra) sum_a += pairs(c);
    for (auto c : rb) sum_b += pairs(c);
    const Wide total = pairs(static_cast<std::int64_t>(a.size()));
    // (Index - E) / (Max - E) with E = sum_a sum_b / total and Max = (sum_a + sum_b) / 2,
    // scaled by 2 * total so numerator and denominator are integers.
    const Wide num = 2 * (index * total - sum_a * sum_b);
    const Wide den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if (den == 0) {
        // Identical partitions have exactly as many shared pairs as pairs within each side.
        const bool identical = index == sum_a && index == sum_b;
        return identical ? 1.0 : 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

// ---------------------------------------------------------------------------

std::optional<Index> CvReport::best_k(const std::string& measure) const {
    for (const auto& s : summary)
        if (s.measure == measure && s.best) return s.k;
    return std::nullopt;
}

const CvSummary* CvReport::find(const std::string& measure, Index k) const {
    for (const auto& s : summary)
        if (s.measure == measure && s.k == k) return &s;
    return nullptr;
}

namespace {

Labeling subset_labels(const Labeling& labels, const std::vector<Index>& rows) {
    Labeling out;
    out.classes = labels.classes;
    out.codes.reserve(rows.size());
    for (Index r : rows) out.codes.push_back(labels.codes[r]);
    return out;
}

Index observed_classes(const Labeling& labels) {
    std::vector<std::uint8_t> seen(labels.n_classes(), 0);
    for (Code c : labels.codes) seen.at(c) = 1;
    return static_cast<Index>(std::count(seen.begin(), seen.end(), 1));
}

std::vector<CvCell> run_cell(const CategoricalDataset& ds, const Labeling& labels, const MeasureSpec& spec,
                             const FoldPlan& plan, Index repeat, Index fold, const CvOptions& options) {
    const std::string name = spec.name();
    std::vector<CvCell> cells;
    const std::vector<Index> ks =
        options.task == Task::Knn ? options.k_grid : std::vector<Index>{observed_classes(labels)};
    for (Index k : ks) cells.push_back(CvCell{name, k, repeat, fold, std::nullopt, ""});

    try {
        const auto train_rows = plan.train_rows(repeat, fold);
        const auto test_rows = plan.test_rows(repeat, fold);
        const CategoricalDataset train = subset(ds, train_rows);
        const CategoricalDataset test = subset(ds, test_rows);
        const Labeling train_labels = subset_labels(labels, train_rows);
        const Labeling test_labels = subset_labels(labels, test_rows);
        const BlockDiagonalDelta delta = build_delta(spec, train, &train_labels);
        const DistanceOptions dopt{options.unseen, 1};

        if (options.task == Task::Knn) {
            const DistanceMatrix d = cross_distances(train, test, delta, dopt);
            std::vector<Index> valid;
            for (auto& cell : cells) {
                if (cell.k >= 1 && cell.k <= train.n_rows())
                    valid.push_back(cell.k);
                else
                    cell.error = "k = " + std::to_string(cell.k) + " exceeds the " + std::to_string(train.n_rows()) +
                                 " training rows";
            }
            const auto preds = knn_predict_grid(d, train_labels, valid);
            Index g = 0;
            for (auto& cell : cells) {
                if (!cell.error.empty()) continue;
                cell.value = accuracy(preds[g++].codes, test_labels.codes);
            }
        } else {
            DistanceMatrix d = pairwise_distances(train, delta, dopt);
            if (!d.symmetric) {
                if (!options.symmetrize) throw UsageError("pam: non-symmetric distances (enable symmetrize)");
                d = symmetrize(d);
            }
            PamOptions popt;
            popt.seed = derive_seed(plan.seed, {repeat, fold});
            popt.max_iter = options.pam_max_iter;
            const PamResult fit = pam_fit(d, cells.front().k, popt);
            const auto clusters = pam_assign(train, fit.medoids, test, delta, dopt);
            cells.front().value = adjusted_rand_index(clusters, test_labels.codes);
        }
    } catch (const std::exception& e) {
        for (auto& cell : cells)
            if (cell.error.empty()) cell.error = e.what();
    }
    return cells;
}

}  // namespace

CvReport cross_validate(const CategoricalDataset& ds_in, const Labeling& labels, const std::vector<MeasureSpec>& measures,
                        const FoldPlan& plan, const CvOptions& options) {
    const CategoricalDataset ds = ds_in.predictors();
    if (labels.size() != ds.n_rows()) throw UsageError("cv: label count does not match rows");
    if (plan.assignments.empty() || plan.assignments.front().size() != ds.n_rows())
        throw UsageError("cv: fold plan does not cover the dataset");
    if (measures.empty()) throw UsageError("cv: no measures");
    if (options.task == Task::Knn && options.k_grid.empty()) throw UsageError("cv: empty k grid");
    if (observed_classes(labels) < 2) throw DataError("cv: need at least two classes");

    const Index folds = plan.n_folds;
    const Index repeats = plan.n_repeats;
    const Index items = measures.size() * repeats * folds;
    std::vector<std::vector<CvCell>> results(items);
    parallel_for(items, options.threads, [&](Index begin, Index end) {
        for (Index w = begin; w < end; ++w) {
            const Index m = w / (repeats * folds);
            const Index r = (w / folds) % repeats;
            const Index f = w % folds;
            results[w] = run_cell(ds, labels, measures[m], plan, r, f, options);
        }
    });

    CvReport report;
    report.task = options.task;
    for (auto& cells : results)
        for (auto& c : cells) report.cells.push_back(std::move(c));

    for (Index m = 0; m < measures.size(); ++m) {
        const std::string name = measures[m].name();
        const std::vector<Index> ks =
            options.task == Task::Knn ? options.k_grid : std::vector<Index>{observed_classes(labels)};
        std::vector<CvSummary> rows;
        for (Index k : ks) {
            CvSummary s;
            s.measure = name;
            s.k = k;
            std::vector<double> per_repeat;
            for (Index r = 0; r < repeats; ++r) {
                double sum = 0.0;
                Index ok = 0;
                for (Index f = 0; f < folds; ++f) {
                    const auto& cells = results[(m * repeats + r) * folds + f];
                    for (const auto& c : cells) {
                        if (c.k != k) continue;
                        if (c.value) {
                            sum += *c.value;
                            ++ok;
                        } else {
                            ++s.failed_cells;
                        }
                    }
                }
                if (ok) per_repeat.push_back(sum / static_cast<double>(ok));
            }
            s.repeats_used = per_repeat.size();
            if (!per_repeat.empty()) {
                s.mean = std::accumulate(per_repeat.begin(), per_repeat.end(), 0.0) / static_cast<double>(per_repeat.size());
                if (per_repeat.size() > 1) {
                    double ss = 0.0;
                    for (double v : per_repeat) ss += (v - s.mean) * (v - s.mean);
                    s.sd = std::sqrt(ss / static_cast<double>(per_repeat.size() - 1));
                }
            }
            rows.push_back(s);
        }
        CvSummary* best = nullptr;
        for (auto& s : rows) {
            if (s.repeats_used == 0) continue;
            if (!best || s.mean > best->mean || (s.mean == best->mean && s.k < best->k)) best = &s;
        }
        if (best) best->best = true;
        for (auto& s : rows) report.summary.push_back(s);
    }
    return report;
}

void write_cv_cells_csv(std::ostream& out, const CvReport& report) {
    const char* task = report.task == Task::Knn ? "knn" : "pam";
    const char* metric = report.task == Task::Knn ? "accuracy" : "ari";
    write_csv_row(out, {"measure", "task", "k", "repeat", "fold", "metric", "value", "error"});
    for (const auto& c : report.cells)
        write_csv_row(out, {c.measure, task, std::to_string(c.k), std::to_string(c.repeat), std::to_string(c.fold),
                            metric, c.value ? format_number(*c.value) : "", c.error});
}

void write_cv_summary_csv(std::ostream& out, const CvReport& report) {
    const char* task = report.task == Task::Knn ? "knn" : "pam";
    const char* metric = report.task == Task::Knn ? "accuracy" : "ari";
    write_csv_row(out, {"measure", "task", "k", "metric", "mean", "sd", "repeats", "failed_cells", "best"});
    for (const auto& s : report.summary)
        write_csv_row(out, {s.measure, task, std::to_string(s.k), metric, format_number(s.mean), format_number(s.sd),
                            std::to_string(s.repeats_used), std::to_string(s.failed_cells), s.best ? "1" : "0"});
}

}  // namespace catdist
