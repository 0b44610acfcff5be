#include "cli.hpp"

#include "catdist/assoc_measures.hpp"
#include "catdist/dataset.hpp"
#include "catdist/error.hpp"
#include "catdist/io.hpp"
#include "catdist/learners.hpp"
#include "catdist/measures.hpp"
#include "catdist/parallel.hpp"
#include "catdist/random.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace catdist::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T v{};
    const auto t = trim(value);
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size())
        throw UsageError("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(trim(value), &used);
        if (used != trim(value).size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config: '" + key + "' expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto t = trim(value);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw UsageError("config: '" + key + "' expects true or false, got '" + value + "'");
}

std::string one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (value == a) return value;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw UsageError("'" + key + "' must be one of " + list + " (got '" + value + "')");
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

json RunConfig::to_json() const {
    return json{{"command", command},
                {"input", input},
                {"against", against},
                {"out", out},
                {"measure", measure},
                {"measures", measures},
                {"weights", weights},
                {"weight_preset", weight_preset},
                {"response", response},
                {"supervised_mode", supervised_mode},
                {"lin_guard", lin_guard},
                {"kl_floor", kl_floor},
                {"kl_directed", kl_directed},
                {"ordered_scores", ordered_scores},
                {"task", task},
                {"unseen", unseen},
                {"k", k},
                {"k_grid", k_grid},
                {"folds", folds},
                {"repeats", repeats},
                {"seed", seed},
                {"max_iter", max_iter},
                {"symmetrize", symmetrize},
                {"threads", threads},
                {"format", format},
                {"has_header", has_header},
                {"delimiter", delimiter},
                {"na", na},
                {"bench_pairs", bench_pairs}};
}

void RunConfig::set(const std::string& raw_key, const std::string& value) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "command") command = value;
    else if (key == "input") input = value;
    else if (key == "against") against = value;
    else if (key == "out") out = value;
    else if (key == "measure") measure = trim(value);
    else if (key == "measures") measures = split_list(value);
    else if (key == "weights") weights = value;
    else if (key == "weight_preset") weight_preset = one_of(key, trim(value), {"ones", "mean"});
    else if (key == "response") response = value;
    else if (key == "supervised_mode") supervised_mode = one_of(key, trim(value), {"none", "supervised", "full"});
    else if (key == "lin_guard") lin_guard = trim(value);
    else if (key == "kl_floor") kl_floor = parse_double(key, value);
    else if (key == "kl_directed") kl_directed = parse_bool(key, value);
    else if (key == "ordered_scores") ordered_scores = value;
    else if (key == "task") task = one_of(key, trim(value), {"knn", "pam"});
    else if (key == "unseen") unseen = one_of(key, trim(value), {"error", "max"});
    else if (key == "k") k = parse_integer<Index>(key, value);
    else if (key == "k_grid") {
        k_grid.clear();
        for (const auto& item : split_list(value)) k_grid.push_back(parse_integer<Index>(key, item));
    } else if (key == "folds") folds = parse_integer<Index>(key, value);
    else if (key == "repeats") repeats = parse_integer<Index>(key, value);
    else if (key == "seed") seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "max_iter") max_iter = parse_integer<Index>(key, value);
    else if (key == "symmetrize") symmetrize = parse_bool(key, value);
    else if (key == "threads") threads = parse_integer<unsigned>(key, value);
    else if (key == "format") format = one_of(key, trim(value), {"csv", "bin"});
    else if (key == "has_header") has_header = parse_bool(key, value);
    else if (key == "delimiter") {
        if (value.size() != 1) throw UsageError("'delimiter' must be a single character");
        delimiter = value;
    } else if (key == "na") na = one_of(key, trim(value), {"error", "drop"});
    else if (key == "bench_pairs") bench_pairs = parse_integer<Index>(key, value);
    else throw UsageError("config: unknown key '" + raw_key + "'");
}

RunConfig RunConfig::from_text(std::string_view text) {
    RunConfig cfg;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::parse_error& e) {
            throw UsageError(std::string("config: invalid JSON: ") + e.what());
        }
        for (const auto& [key, v] : j.items()) {
            if (v.is_null()) continue;
            if (v.is_string()) {
                cfg.set(key, v.get<std::string>());
            } else if (v.is_array()) {
                std::string joined;
                for (const auto& item : v) joined += (joined.empty() ? "" : ",") + (item.is_string() ? item.get<std::string>() : item.dump());
                cfg.set(key, joined);
            } else {
                cfg.set(key, v.dump());
            }
        }
        return cfg;
    }
    std::stringstream in{std::string(text)};
    std::string line;
    Index lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        cfg.set(t.substr(0, eq), trim(t.substr(eq + 1)));
    }
    return cfg;
}

MeasureSpec measure_spec(const RunConfig& config, const std::string& id) {
    MeasureSpec spec = MeasureSpec::parse(id);
    if (spec.association()) {
        if (spec.supervised == SupervisedMode::None) {
            if (config.supervised_mode == "supervised") spec.supervised = SupervisedMode::Supervised;
            if (config.supervised_mode == "full") spec.supervised = SupervisedMode::Full;
        }
        if (spec.phi.kind == Divergence::Kl) {
            spec.phi.kl_floor = config.kl_floor;
            spec.phi.kl_directed = spec.phi.kl_directed || config.kl_directed;
        }
        spec.weight_preset = config.weight_preset == "mean" ? WeightPreset::Mean : WeightPreset::Ones;
    }
    if (spec.measure == Measure::Lin && config.lin_guard != "off") {
        spec.lin_guard.enabled = true;
        if (config.lin_guard != "auto") {
            const double eps = parse_double("lin_guard", config.lin_guard);
            if (!(eps > 0.0 && eps < 0.5)) throw UsageError("lin_guard epsilon must lie in (0, 0.5)");
            spec.lin_guard.epsilon = eps;
        }
    }
    return spec;
}

UnseenPolicy unseen_policy(const RunConfig& config) {
    return config.unseen == "max" ? UnseenPolicy::Max : UnseenPolicy::Error;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

struct Inputs {
    CategoricalDataset full;   // as read, response column included
    CategoricalDataset train;  // predictors (schema widened by the test file, if any)
    std::optional<Labeling> labels;
    std::optional<CategoricalDataset> test_full;
    std::optional<CategoricalDataset> test;
    std::optional<Labeling> test_labels;
};

CsvOptions csv_options(const RunConfig& cfg) {
    CsvOptions o;
    o.has_header = cfg.has_header;
    o.delimiter = cfg.delimiter.front();
    o.na_policy = cfg.na == "drop" ? NaPolicy::DropRow : NaPolicy::Error;
    return o;
}

CategoricalDataset apply_scores(const CategoricalDataset& ds, const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw UsageError("ordered scores: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("ordered scores: expected an object of variable -> score list");
    auto vars = ds.variables();
    for (const auto& [name, scores] : j.items()) {
        auto it = std::find_if(vars.begin(), vars.end(), [&](const VariableSchema& v) { return v.name == name; });
        if (it == vars.end()) throw UsageError("ordered scores: unknown variable '" + name + "'");
        if (scores.is_object()) {
            // {"level": score} form, for files whose level order is not known in advance.
            std::vector<double> s(it->levels.size());
            for (Index l = 0; l < it->levels.size(); ++l) {
                if (!scores.contains(it->levels[l]))
                    throw DataError("ordered scores: no score for level '" + it->levels[l] + "' of '" + name + "'");
                s[l] = scores[it->levels[l]].get<double>();
            }
            it->ordered_scores = s;
        } else {
            it->ordered_scores = scores.get<std::vector<double>>();
        }
    }
    return with_schema(ds, vars);
}

Inputs load_inputs(const RunConfig& cfg, bool labels_required) {
    if (cfg.input.empty()) throw UsageError(cfg.command + ": no input CSV given");
    const CsvOptions opts = csv_options(cfg);
    CategoricalDataset full = parse_csv(read_file(cfg.input), opts);
    if (!cfg.ordered_scores.empty()) full = apply_scores(full, cfg.ordered_scores);
    Inputs in{full, full, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    if (!cfg.response.empty()) {
        auto [pred, labels] = split_response(full, cfg.response);
        in.train = std::move(pred);
        in.labels = std::move(labels);
    } else if (labels_required) {
        throw UsageError(cfg.command + ": --response is required");
    }
    if (!cfg.against.empty()) {
        const RawTable table = read_csv(read_file(cfg.against), opts);
        const bool has_response =
            !cfg.response.empty() &&
            std::find(table.header.begin(), table.header.end(), cfg.response) != table.header.end();
        CategoricalDataset test_full = encode_against(has_response ? full.variables() : in.train.variables(), table, opts);
        if (has_response) {
            auto [pred, labels] = split_response(test_full, cfg.response);
            // Labels of the test file are compared by text; keep the training class order first.
            std::vector<std::string> raw;
            for (Code c : labels.codes) raw.push_back(labels.classes[c]);
            in.test_labels = encode_labels(raw, in.labels->classes);
            in.test = std::move(pred);
        } else {
            in.test = test_full;
        }
        in.test_full = std::move(test_full);
        in.train = with_schema(in.train, in.test->variables());
    }
    return in;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + cfg.out + "': " + ec.message());
    write_json(dir / "config.json", cfg.to_json());
    return dir;
}

void write_manifests(const fs::path& dir, const Inputs& in) {
    write_json(dir / "dataset.json", dataset_manifest(in.full));
    if (in.test_full) write_json(dir / "against_dataset.json", dataset_manifest(*in.test_full));
}

std::string block_file(Index j) {
    char name[32];
    std::snprintf(name, sizeof name, "delta_block_%03zu.csv", j);
    return name;
}

DistanceOptions distance_options(const RunConfig& cfg) { return {unseen_policy(cfg), resolve_threads(cfg.threads)}; }

const Labeling* labels_ptr(const Inputs& in) { return in.labels ? &*in.labels : nullptr; }

BlockDiagonalDelta delta_for(const RunConfig& cfg, const Inputs& in, const MeasureSpec& spec) {
    MeasureSpec s = spec;
    if (!cfg.weights.empty()) {
        if (!s.association() || s.supervised != SupervisedMode::None)
            throw UsageError("--weights applies to unsupervised association measures only");
        std::vector<std::string> names;
        for (const auto& v : in.train.variables()) names.push_back(v.name);
        s.weights = read_weights_csv(read_file(cfg.weights), names).values();
    }
    return build_delta(s, in.train, labels_ptr(in));
}

std::vector<std::string> row_ids(Index n) {
    std::vector<std::string> ids(n);
    for (Index i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
}

int cmd_delta(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg, false);
    const auto delta = delta_for(cfg, in, measure_spec(cfg, cfg.measure));
    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    json manifest = delta.manifest();
    for (Index j = 0; j < delta.n_blocks(); ++j) {
        const auto& b = delta.blocks[j];
        DistanceMatrix m;
        m.values = b.values;
        std::ofstream f(dir / block_file(j), std::ios::binary);
        write_distance_csv(f, m, b.levels, b.levels);
        manifest["blocks"][j]["file"] = block_file(j);
    }
    write_json(dir / "delta.json", manifest);
    out << "delta " << delta.spec.name() << ": " << delta.n_blocks() << " blocks, " << delta.total_levels()
        << " levels -> " << dir.string() << "\n";
    for (const auto& note : delta.notes) out << "note: " << note << "\n";
    return 0;
}

json distance_json(const DistanceMatrix& d) {
    return {{"rows", d.rows()}, {"cols", d.cols()}, {"symmetric", d.symmetric}, {"zero_diagonal", d.zero_diagonal},
            {"measure", d.measure}};
}

int cmd_dist(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg, false);
    const auto delta = delta_for(cfg, in, measure_spec(cfg, cfg.measure));
    DistanceMatrix d = in.test ? cross_distances(in.train, *in.test, delta, distance_options(cfg))
                               : pairwise_distances(in.train, delta, distance_options(cfg));
    if (cfg.symmetrize) {
        if (in.test) throw UsageError("--symmetrize needs a square (pairwise) distance matrix");
        d = symmetrize(d);
    }
    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    json manifest = distance_json(d);
    manifest["delta"] = delta.manifest();
    if (cfg.format == "bin") {
        std::ofstream f(dir / "distances.bin", std::ios::binary);
        write_distance_binary(f, d);
        manifest["file"] = "distances.bin";
    } else {
        std::ofstream f(dir / "distances.csv", std::ios::binary);
        write_distance_csv(f, d, row_ids(d.rows()), row_ids(d.cols()));
        manifest["file"] = "distances.csv";
    }
    write_json(dir / "distances.json", manifest);
    out << "dist " << delta.spec.name() << ": " << d.rows() << " x " << d.cols() << " -> " << dir.string() << "\n";
    return 0;
}

int cmd_knn(const RunConfig& cfg, std::ostream& out) {
    if (cfg.against.empty()) throw UsageError("knn: --against <test.csv> is required");
    const Inputs in = load_inputs(cfg, true);
    const auto delta = delta_for(cfg, in, measure_spec(cfg, cfg.measure));
    const Labeling pred = knn_predict(in.train, *in.labels, *in.test, delta, cfg.k, distance_options(cfg));
    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    std::ostringstream csv;
    std::vector<std::string> header{"row", "predicted"};
    if (in.test_labels) header.push_back("actual");
    write_csv_row(csv, header);
    for (Index t = 0; t < pred.size(); ++t) {
        std::vector<std::string> row{std::to_string(t), pred.classes[pred.codes[t]]};
        if (in.test_labels) row.push_back(in.test_labels->classes[in.test_labels->codes[t]]);
        write_csv_row(csv, row);
    }
    write_text(dir / "predictions.csv", csv.str());
    json result{{"measure", delta.spec.name()}, {"k", cfg.k}, {"n_train", in.train.n_rows()},
                {"n_test", in.test->n_rows()}};
    out << "knn " << delta.spec.name() << " k=" << cfg.k << ": " << pred.size() << " predictions";
    if (in.test_labels) {
        const double acc = accuracy(pred, *in.test_labels);
        result["accuracy"] = acc;
        out << ", accuracy " << format_number(acc);
    }
    out << " -> " << dir.string() << "\n";
    write_json(dir / "knn.json", result);
    return 0;
}

void write_assignments(const fs::path& path, const std::vector<Code>& clusters, const Labeling* labels) {
    std::ostringstream csv;
    std::vector<std::string> header{"row", "cluster"};
    if (labels) header.push_back("label");
    write_csv_row(csv, header);
    for (Index i = 0; i < clusters.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), std::to_string(clusters[i])};
        if (labels) row.push_back(labels->classes[labels->codes[i]]);
        write_csv_row(csv, row);
    }
    write_text(path, csv.str());
}

int cmd_pam(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg, false);
    const auto delta = delta_for(cfg, in, measure_spec(cfg, cfg.measure));
    DistanceMatrix d = pairwise_distances(in.train, delta, distance_options(cfg));
    if (cfg.symmetrize) d = symmetrize(d);
    const PamResult fit = pam_fit(d, cfg.k, {cfg.seed, cfg.max_iter});

    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    std::ostringstream medoids;
    write_csv_row(medoids, {"cluster", "row"});
    for (Index c = 0; c < fit.medoids.size(); ++c) write_csv_row(medoids, {std::to_string(c), std::to_string(fit.medoids[c])});
    write_text(dir / "medoids.csv", medoids.str());
    write_assignments(dir / "assignments.csv", fit.assignment, labels_ptr(in));

    json result{{"measure", delta.spec.name()}, {"k", cfg.k}, {"seed", cfg.seed}, {"medoids", fit.medoids},
                {"cost", fit.cost}, {"cost_history", fit.cost_history}, {"iterations", fit.iterations},
                {"converged", fit.converged}};
    out << "pam " << delta.spec.name() << " k=" << cfg.k << ": cost " << format_number(fit.cost) << " after "
        << fit.iterations << " iterations" << (fit.converged ? "" : " (not converged)");
    if (in.labels) {
        const double ari = adjusted_rand_index(fit.assignment, in.labels->codes);
        result["ari"] = ari;
        out << ", ARI " << format_number(ari);
    }
    if (in.test) {
        const auto clusters = pam_assign(in.train, fit.medoids, *in.test, delta, distance_options(cfg));
        write_assignments(dir / "against_assignments.csv", clusters, in.test_labels ? &*in.test_labels : nullptr);
        if (in.test_labels) {
            const double ari = adjusted_rand_index(clusters, in.test_labels->codes);
            result["against_ari"] = ari;
            out << ", test ARI " << format_number(ari);
        }
    }
    out << " -> " << dir.string() << "\n";
    write_json(dir / "pam.json", result);
    return 0;
}

std::vector<std::string> measure_list(const RunConfig& cfg) {
    return cfg.measures.empty() ? std::vector<std::string>{cfg.measure} : cfg.measures;
}

int cmd_cv(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg, true);
    if (!cfg.weights.empty()) throw UsageError("cv: --weights is not supported; use --weight-preset");
    std::vector<MeasureSpec> specs;
    for (const auto& id : measure_list(cfg)) specs.push_back(measure_spec(cfg, id));
    const FoldPlan plan = split_folds(in.train, &*in.labels, cfg.folds, cfg.repeats, cfg.seed);
    CvOptions opts;
    opts.task = cfg.task == "pam" ? Task::Pam : Task::Knn;
    opts.k_grid = cfg.k_grid;
    opts.unseen = unseen_policy(cfg);
    opts.symmetrize = cfg.symmetrize;
    opts.pam_max_iter = cfg.max_iter;
    opts.threads = resolve_threads(cfg.threads);
    const CvReport report = cross_validate(in.train, *in.labels, specs, plan, opts);

    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    std::ostringstream cells, summary;
    write_cv_cells_csv(cells, report);
    write_cv_summary_csv(summary, report);
    write_text(dir / "cv_cells.csv", cells.str());
    write_text(dir / "cv_summary.csv", summary.str());

    const char* metric = opts.task == Task::Knn ? "accuracy" : "ARI";
    for (const auto& spec : specs) {
        const auto best = report.best_k(spec.name());
        if (!best) {
            out << spec.name() << ": every cell failed\n";
            continue;
        }
        const auto* s = report.find(spec.name(), *best);
        out << spec.name() << ": " << metric << " " << format_number(s->mean) << " +- " << format_number(s->sd)
            << " at k=" << *best;
        if (s->failed_cells) out << " (" << s->failed_cells << " failed cells)";
        out << "\n";
    }
    return 0;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const Inputs in = load_inputs(cfg, false);
    std::vector<std::string> ids = cfg.measures;
    if (ids.empty()) {
        for (const auto& id : builtin_measure_names())
            if (in.labels || !id.starts_with("supervised")) ids.push_back(id);
    }
    std::ostringstream csv;
    write_csv_row(csv, {"measure", "variable", "zero_diagonal", "symmetric", "triangle_violations", "worst_violation",
                        "metric", "error"});
    auto yes = [](bool b) { return std::string(b ? "yes" : "no"); };
    for (const auto& id : ids) {
        try {
            const auto delta = delta_for(cfg, in, measure_spec(cfg, id));
            const MetricReport report = check_metric_properties(delta);
            for (const auto& b : report.blocks)
                write_csv_row(csv, {id, b.name, yes(b.zero_diagonal), yes(b.symmetric),
                                    std::to_string(b.triangle_violations), format_number(b.worst_violation),
                                    yes(b.metric()), ""});
            out << id << ": metric " << yes(report.metric()) << " (zero-diagonal " << yes(report.zero_diagonal())
                << ", symmetric " << yes(report.symmetric()) << ", triangle " << yes(report.triangle()) << ")\n";
        } catch (const Error& e) {
            write_csv_row(csv, {id, "", "", "", "", "", "", e.what()});
            out << id << ": error: " << e.what() << "\n";
        }
    }
    const fs::path dir = prepare_out(cfg);
    write_manifests(dir, in);
    write_text(dir / "check.csv", csv.str());
    return 0;
}

template <typename Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> bench_distribution(Rng& rng, Index q) {
    std::vector<double> p(q);
    double s = 0.0;
    for (auto& x : p) s += (x = rng.uniform01() + 1e-3);
    for (auto& x : p) x /= s;
    return p;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
    if (cfg.bench_pairs == 0) throw UsageError("bench: --bench-pairs must be positive");
    Rng rng(cfg.seed);
    std::ostringstream csv;
    write_csv_row(csv, {"benchmark", "size", "fast_seconds", "reference_seconds", "speedup", "max_abs_diff"});
    out << "phi_tvd vs partition-maximum oracle, " << cfg.bench_pairs << " pairs per q\n";
    for (Index q : {4, 8, 12, 16}) {
        std::vector<std::vector<double>> a, b;
        for (Index p = 0; p < cfg.bench_pairs; ++p) {
            a.push_back(bench_distribution(rng, q));
            b.push_back(bench_distribution(rng, q));
        }
        // The L1 form is far too fast to time once; repeat it and divide.
        const Index reps = 2000;
        volatile double sink = 0.0;
        double diff = 0.0;
        const double t_fast = seconds([&] {
            for (Index r = 0; r < reps; ++r)
                for (Index p = 0; p < a.size(); ++p) sink = sink + phi_tvd(a[p], b[p]);
        }) / static_cast<double>(reps);
        const double t_oracle = seconds([&] {
            for (Index p = 0; p < a.size(); ++p) diff = std::max(diff, std::abs(ahmad_dey_oracle(a[p], b[p]) - phi_tvd(a[p], b[p])));
        });
        const double speedup = t_oracle / std::max(t_fast, 1e-12);
        write_csv_row(csv, {"tvd_vs_oracle", std::to_string(q), format_number(t_fast), format_number(t_oracle),
                            format_number(speedup), format_number(diff)});
        out << "  q=" << q << ": partitions " << ((Index{1} << q) - 2) << ", tvd " << format_number(t_fast)
            << " s, oracle " << format_number(t_oracle) << " s, speedup " << format_number(speedup) << "x\n";
    }

    const Index n = 1000;
    std::vector<VariableSchema> vars;
    std::vector<std::vector<Code>> codes;
    for (Index j = 0; j < 10; ++j) {
        vars.push_back({"v" + std::to_string(j), {"a", "b", "c", "d"}, std::nullopt});
        std::vector<Code> col(n);
        for (Index i = 0; i < n; ++i) col[i] = static_cast<Code>(i < 4 ? i : rng.below(4));
        codes.push_back(std::move(col));
    }
    const CategoricalDataset ds(std::move(vars), std::move(codes));
    const auto delta = build_delta(MeasureSpec::parse("tvd"), ds);
    DistanceMatrix gather, dense;
    const double t_gather = seconds([&] { gather = pairwise_distances(ds, delta); });
    const double t_dense = seconds([&] { dense = naive_pairwise_dense(ds, delta); });
    const double diff = (gather.values - dense.values).cwiseAbs().maxCoeff();
    write_csv_row(csv, {"gather_vs_dense", "n=1000;Q=10", format_number(t_gather), format_number(t_dense),
                        format_number(t_dense / std::max(t_gather, 1e-12)), format_number(diff)});
    out << "gather vs dense Z Delta Z', n=1000, Q=10: gather " << format_number(t_gather) << " s, dense "
        << format_number(t_dense) << " s, max difference " << format_number(diff) << "\n";

    const fs::path dir = prepare_out(cfg);
    write_text(dir / "bench.csv", csv.str());
    return 0;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Data: return "data";
        case ErrorKind::Domain: return "domain";
    }
    return "usage";
}

int report_error(std::ostream& err, const std::string& kind, int code, const std::string& message) {
    err << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << "\n";
    return code;
}

// Value of --config in args, read before the flags so flags can override it.
std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (Index i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].starts_with("--config=")) return args[i].substr(9);
    }
    return std::nullopt;
}

void add_shared(CLI::App* sub, RunConfig& c, std::string& config_file) {
    sub->add_option("input", c.input, "Input CSV (one categorical variable per column)");
    sub->add_option("--config", config_file, "Config file (JSON or key=value); flags override it");
    sub->add_option("--against", c.against, "Second CSV: test rows for dist/knn/pam");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--measure", c.measure, "Measure identifier");
    sub->add_option_function<std::string>(
        "--measures", [&c](const std::string& v) { c.set("measures", v); }, "Comma-separated measures (cv, check)");
    sub->add_option("--weights", c.weights, "Weight matrix CSV for association measures");
    sub->add_option("--weight-preset", c.weight_preset, "ones or mean");
    sub->add_option("--response", c.response, "Response column name");
    sub->add_option("--supervised-mode", c.supervised_mode, "none, supervised or full");
    sub->add_option("--lin-guard", c.lin_guard, "off, auto or an epsilon");
    sub->add_option("--kl-floor", c.kl_floor, "Floor applied to profile entries in KL");
    sub->add_flag("--kl-directed", c.kl_directed, "Use one-directional KL");
    sub->add_option("--ordered-scores", c.ordered_scores, "JSON file of ordered scores per variable");
    sub->add_option("--task", c.task, "knn or pam (cv)");
    sub->add_option("--unseen", c.unseen, "error or max");
    sub->add_option("--k", c.k, "Neighbours (knn) or clusters (pam)");
    sub->add_option_function<std::string>(
        "--k-grid", [&c](const std::string& v) { c.set("k_grid", v); }, "Comma-separated k values (cv)");
    sub->add_option("--folds", c.folds, "Folds per repeat");
    sub->add_option("--repeats", c.repeats, "Cross-validation repeats");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--max-iter", c.max_iter, "PAM iteration cap");
    sub->add_flag("--symmetrize", c.symmetrize, "Symmetrise non-symmetric distances");
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    sub->add_option("--format", c.format, "Distance output: csv or bin");
    sub->add_option("--delimiter", c.delimiter, "CSV delimiter");
    sub->add_option("--na", c.na, "Missing cells: error or drop");
    sub->add_option("--bench-pairs", c.bench_pairs, "Profile pairs per q (bench)");
    sub->add_flag("!--no-header", c.has_header, "Input has no header row");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        RunConfig cfg;
        if (auto path = config_path(args)) cfg = RunConfig::from_text(read_file(*path));

        CLI::App app{"Distances between rows of categorical data", "catdist"};
        app.require_subcommand(0, 1);
        std::string config_file;
        app.add_option("--config", config_file, "Config file (JSON or key=value); flags override it");
        const std::vector<std::pair<const char*, const char*>> commands{
            {"delta", "Build the per-variable dissimilarity blocks"},
            {"dist", "Distance matrix of a CSV, or between two CSVs with --against"},
            {"knn", "Classify --against rows by nearest neighbours"},
            {"pam", "Cluster rows with partitioning around medoids"},
            {"cv", "Repeated stratified cross-validation of measures"},
            {"check", "Metric properties of each measure on the data"},
            {"bench", "Time the L1 form of TVD against the partition oracle"},
        };
        for (const auto& [name, help] : commands) add_shared(app.add_subcommand(name, help), cfg, config_file);

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            return report_error(err, "usage", 1, e.what());
        }
        for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
        if (cfg.command.empty()) throw UsageError("no command given (delta, dist, knn, pam, cv, check, bench)");
        // Re-validate enumerated fields that flags may have set.
        for (const char* key : {"weight_preset", "supervised_mode", "task", "unseen", "format", "na", "delimiter"}) {
            const json v = cfg.to_json()[key];
            cfg.set(key, v.get<std::string>());
        }
        for (const auto& m : measure_list(cfg)) measure_spec(cfg, m);

        if (cfg.command == "delta") return cmd_delta(cfg, out);
        if (cfg.command == "dist") return cmd_dist(cfg, out);
        if (cfg.command == "knn") return cmd_knn(cfg, out);
        if (cfg.command == "pam") return cmd_pam(cfg, out);
        if (cfg.command == "cv") return cmd_cv(cfg, out);
        if (cfg.command == "check") return cmd_check(cfg, out);
        if (cfg.command == "bench") return cmd_bench(cfg, out);
        throw UsageError("unknown command '" + cfg.command + "'");
    } catch (const Error& e) {
        return report_error(err, kind_name(e.kind()), static_cast<int>(e.kind()), e.what());
    } catch (const std::exception& e) {
        return report_error(err, "internal", 1, e.what());
    }
}

}  // namespace catdist::cli
