#include "concept_dist/cli.hpp"

#include "concept_dist/analysis.hpp"
#include "concept_dist/csv.hpp"
#include "concept_dist/embedding.hpp"
#include "concept_dist/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace concept_dist::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // inputs
    std::string games, concepts, values, wide, matrix, embedding;
    bool pre_normalized = false;
    // pipeline
    std::string measure; // empty: the matrix file's measure, else euclidean
    std::string measure_a = "cosine";
    std::string measure_b = "euclidean";
    std::string weights = "none";
    std::vector<std::string> excluded;
    // queries
    std::string game;
    std::size_t knn_k = 10;
    std::size_t compare_k = 20;
    std::size_t top_k = 20;
    std::size_t points = 101;
    // t-SNE
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double exaggeration = 12.0;
    std::string input_metric = "euclidean";
    std::size_t embed_clusters = 0;
    std::size_t cluster_count = 4;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    // outputs
    std::string out, params_out, csv_out, trend_out, scatter_out, svg_out, appearances_out;
};

Measure measure_arg(const std::string& s) {
    const auto m = parse_measure(s);
    if (!m) throw UsageError("unknown measure `" + s + "`");
    return *m;
}

std::set<Category> excluded_categories(const RunConfig& cfg) {
    std::set<Category> out;
    for (const auto& name : cfg.excluded) {
        const auto c = parse_category(name);
        if (!c) throw UsageError("unknown category `" + name + "`");
        out.insert(*c);
    }
    return out;
}

RawDataset load_raw(const RunConfig& cfg) {
    if (!cfg.wide.empty()) {
        if (cfg.concepts.empty()) throw UsageError("--wide needs --concepts for concept metadata");
        return load_wide_matrix(cfg.wide, cfg.concepts);
    }
    std::filesystem::path games = cfg.games, concepts = cfg.concepts, values = cfg.values;
    if (games.empty() && concepts.empty() && values.empty()) {
        if (const char* dir = std::getenv("CONCEPT_DIST_DATA"); dir && *dir) {
            games = std::filesystem::path(dir) / "games.csv";
            concepts = std::filesystem::path(dir) / "concepts.csv";
            values = std::filesystem::path(dir) / "values.csv";
        }
    }
    if (games.empty() || concepts.empty() || values.empty())
        throw UsageError("dataset input needs --games, --concepts and --values, --wide with --concepts, "
                         "or CONCEPT_DIST_DATA");
    return load_dataset(games, concepts, values);
}

ConceptMatrix prepare(const RawDataset& raw, const RunConfig& cfg, bool allow_weights = true) {
    ConceptMatrix m = cfg.pre_normalized ? as_normalized(raw) : normalize(raw).matrix;
    m = exclude_categories(m, excluded_categories(cfg));
    if (cfg.weights == "none") return m;
    if (!allow_weights) throw UsageError("--weights is not available for this subcommand");
    if (cfg.weights == "idf") return apply_weights(m, idf_weights(m));
    if (cfg.weights == "category") return apply_weights(m, category_equal_weights(m));
    throw UsageError("unknown weighting `" + cfg.weights + "` (none, idf, category)");
}

std::vector<GameRecord> names_for_matrix(const RunConfig& cfg) {
    if (!cfg.games.empty()) return load_games(cfg.games);
    if (const char* dir = std::getenv("CONCEPT_DIST_DATA"); dir && *dir) {
        const auto p = std::filesystem::path(dir) / "games.csv";
        if (std::filesystem::exists(p)) return load_games(p);
    }
    return {};
}

Measure measure_or_default(const RunConfig& cfg) {
    return cfg.measure.empty() ? Measure::Euclidean : measure_arg(cfg.measure);
}

DistanceMatrix matrix_for(const RunConfig& cfg, const ConceptMatrix* prepared) {
    if (!cfg.matrix.empty()) {
        auto dm = read_binary(cfg.matrix);
        const auto measure = cfg.measure.empty() ? dm.measure() : measure_arg(cfg.measure);
        if (dm.measure() != measure)
            throw DataError(cfg.matrix + " holds " + std::string(to_string(dm.measure())) + " distances, not " +
                            std::string(to_string(measure)));
        if (const auto games = names_for_matrix(cfg); !games.empty()) dm.attach_names(games);
        return dm;
    }
    return pairwise_matrix(*prepared, measure_or_default(cfg), cfg.threads);
}

std::ofstream open_file(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write file: " + path);
    return f;
}

// Writes to --out when given, otherwise to the normal output stream.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(out);
    } else {
        auto f = open_file(path);
        fn(f);
    }
}

std::size_t resolve_game(const DistanceMatrix& dm, const std::string& key) {
    for (std::size_t i = 0; i < dm.size(); ++i)
        if (dm.games()[i].name == key) return i;
    long long id = 0;
    if (csv::parse_int(key, id))
        if (const auto row = dm.row_of(id)) return *row;
    throw DataError("unknown game `" + key + "`");
}

void add_inputs(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--games", cfg.games, "games.csv (game_id,name)");
    sub->add_option("--concepts", cfg.concepts, "concepts.csv (concept metadata)");
    sub->add_option("--values", cfg.values, "values.csv (game_id,concept_id,value)");
    sub->add_option("--wide", cfg.wide, "wide matrix CSV (name,<concept>,...); needs --concepts");
    sub->add_flag("--normalized", cfg.pre_normalized, "input values are already normalized (output of `normalize`)");
}

void add_pipeline(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--weights", cfg.weights, "concept weighting: none, idf, category")
        ->check(CLI::IsMember({"none", "idf", "category"}));
    sub->add_option("--exclude-category", cfg.excluded, "drop a concept category (repeatable)");
    sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
}

void add_measure(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--measure", cfg.measure, "cosine, euclidean, manhattan, jaccard, jensen-shannon");
}

void print_report_summary(const ValidationReport& r, std::ostream& out) {
    for (auto c : kAllCategories) {
        const auto it = r.per_category.find(c);
        out << "category " << to_string(c) << '=' << (it == r.per_category.end() ? 0 : it->second) << '\n';
    }
    for (auto k : {ValueKind::Binary, ValueKind::Discrete, ValueKind::Continuous}) {
        const auto it = r.per_value_kind.find(k);
        out << "value_kind " << to_string(k) << '=' << (it == r.per_value_kind.end() ? 0 : it->second) << '\n';
    }
    for (const auto& w : r.warnings) out << "warning " << w.location << ": " << w.message << '\n';
    for (const auto& e : r.errors) out << "error " << e.location << ": " << e.message << '\n';
    out << "errors=" << r.errors.size() << " warnings=" << r.warnings.size() << '\n';
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concept-vector distances between board games", "concept-dist"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* validate = app.add_subcommand("validate", "check a dataset and print category counts");
    add_inputs(validate, cfg);

    auto* normalize_cmd = app.add_subcommand("normalize", "emit the normalized matrix and its parameters");
    add_inputs(normalize_cmd, cfg);
    normalize_cmd->add_option("--exclude-category", cfg.excluded, "drop a concept category (repeatable)");
    normalize_cmd->add_option("--out", cfg.out, "normalized wide CSV (default: stdout)");
    normalize_cmd->add_option("--params", cfg.params_out, "write per-concept min/max CSV here");

    auto* distances = app.add_subcommand("distances", "compute a condensed pairwise distance matrix");
    add_inputs(distances, cfg);
    add_pipeline(distances, cfg);
    add_measure(distances, cfg);
    distances->add_option("--out", cfg.out, "binary CDM1 matrix file")->required();
    distances->add_option("--csv", cfg.csv_out, "also write game_a,game_b,distance CSV");

    auto* knn_cmd = app.add_subcommand("knn", "nearest games to a query game");
    add_inputs(knn_cmd, cfg);
    add_pipeline(knn_cmd, cfg);
    add_measure(knn_cmd, cfg);
    knn_cmd->add_option("--matrix", cfg.matrix, "precomputed CDM1 matrix instead of a dataset");
    knn_cmd->add_option("--game", cfg.game, "query game name or id")->required();
    knn_cmd->add_option("--k", cfg.knn_k, "neighbour count")->capture_default_str();
    knn_cmd->add_option("--out", cfg.out, "CSV output (default: stdout)");

    auto* stats = app.add_subcommand("stats", "box-plot statistics and ordered trend");
    add_inputs(stats, cfg);
    add_pipeline(stats, cfg);
    add_measure(stats, cfg);
    stats->add_option("--matrix", cfg.matrix, "precomputed CDM1 matrix instead of a dataset");
    stats->add_option("--points", cfg.points, "trend curve points")->default_val(101)->check(CLI::Range(2, 1000000));
    stats->add_option("--out", cfg.out, "box stats CSV (default: stdout)");
    stats->add_option("--trend", cfg.trend_out, "trend CSV output");

    auto* compare = app.add_subcommand("compare", "correlate and contrast two measures");
    add_inputs(compare, cfg);
    add_pipeline(compare, cfg);
    compare->add_option("--a", cfg.measure_a, "first measure")->capture_default_str();
    compare->add_option("--b", cfg.measure_b, "second measure")->capture_default_str();
    compare->add_option("--k", cfg.compare_k, "extreme pairs per direction")->capture_default_str();
    compare->add_option("--scatter", cfg.scatter_out, "per-pair scatter CSV output");
    compare->add_option("--out", cfg.out, "extreme-pair JSON lines output");

    auto* top = app.add_subcommand("top-pairs", "largest pair distances");
    add_inputs(top, cfg);
    add_pipeline(top, cfg);
    add_measure(top, cfg);
    top->add_option("--matrix", cfg.matrix, "precomputed CDM1 matrix instead of a dataset");
    top->add_option("--k", cfg.top_k, "pair count")->capture_default_str()->check(CLI::PositiveNumber);
    top->add_option("--out", cfg.out, "JSON lines output (default: stdout)");
    top->add_option("--appearances", cfg.appearances_out, "game,count CSV of report appearances");

    auto add_tsne = [&](CLI::App* sub) {
        sub->add_option("--perplexity", cfg.perplexity)->default_val(30.0);
        sub->add_option("--iterations", cfg.iterations)->default_val(1000)->check(CLI::PositiveNumber);
        sub->add_option("--learning-rate", cfg.learning_rate)->default_val(200.0);
        sub->add_option("--exaggeration", cfg.exaggeration)->default_val(12.0);
        sub->add_option("--input-metric", cfg.input_metric, "dissimilarity feeding the affinities")
            ->default_val("euclidean");
        sub->add_option("--seed", cfg.seed)->default_val(42);
    };

    auto* embed = app.add_subcommand("embed", "t-SNE embedding to 2D");
    add_inputs(embed, cfg);
    add_pipeline(embed, cfg);
    add_tsne(embed);
    embed->add_option("--k", cfg.embed_clusters, "also run k-means with this many clusters");
    embed->add_option("--out", cfg.out, "embedding CSV (default: stdout)");
    embed->add_option("--svg", cfg.svg_out, "SVG scatter output");

    auto* clusters = app.add_subcommand("clusters", "k-means on the embedding plus concept signatures");
    add_inputs(clusters, cfg);
    add_pipeline(clusters, cfg);
    add_tsne(clusters);
    clusters->add_option("--embedding", cfg.embedding, "reuse an embedding CSV from `embed`");
    clusters->add_option("--k", cfg.cluster_count, "cluster count")->capture_default_str()->check(CLI::PositiveNumber);
    clusters->add_option("--out", cfg.out, "JSON report (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "concept-dist: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (validate->parsed()) {
            const auto raw = load_raw(cfg);
            const auto report = validate_dataset(raw);
            out << "games=" << raw.num_games() << " concepts=" << raw.num_concepts() << '\n';
            print_report_summary(report, out);
            return report.ok() ? kExitOk : kExitDataError;
        }

        if (normalize_cmd->parsed()) {
            const auto raw = load_raw(cfg);
            if (cfg.pre_normalized) throw UsageError("normalize does not accept --normalized input");
            auto fitted = normalize(raw);
            const auto m = exclude_categories(fitted.matrix, excluded_categories(cfg));
            if (!cfg.params_out.empty()) write_params(fitted.params, cfg.params_out);
            emit(cfg.out, out, [&](std::ostream& o) { write_wide_matrix(m.games, m.concepts, m.values, o); });
            return kExitOk;
        }

        if (distances->parsed()) {
            const auto m = prepare(load_raw(cfg), cfg);
            const auto dm = pairwise_matrix(m, measure_or_default(cfg), cfg.threads);
            write_binary(dm, std::filesystem::path(cfg.out));
            if (!cfg.csv_out.empty()) {
                auto f = open_file(cfg.csv_out);
                write_csv(dm, f);
            }
            out << "measure=" << to_string(dm.measure()) << " games=" << dm.size() << " pairs=" << dm.data().size()
                << '\n';
            return kExitOk;
        }

        // The remaining matrix-consuming commands share this path.
        const auto measure_matrix = [&] {
            if (!cfg.matrix.empty()) return matrix_for(cfg, nullptr);
            const auto m = prepare(load_raw(cfg), cfg);
            return matrix_for(cfg, &m);
        };

        if (knn_cmd->parsed()) {
            const auto dm = measure_matrix();
            const auto q = resolve_game(dm, cfg.game);
            const auto nl = knn(dm, dm.games()[q].id, cfg.knn_k);
            emit(cfg.out, out, [&](std::ostream& o) {
                o << "game_id,name,distance\n";
                for (const auto& e : nl.entries)
                    o << e.game_id << ',' << csv::quote(e.name) << ',' << csv::format_fixed(e.distance, 6) << '\n';
            });
            return kExitOk;
        }

        if (stats->parsed()) {
            const auto dm = measure_matrix();
            emit(cfg.out, out, [&](std::ostream& o) { write_box_csv({box_stats(dm)}, o); });
            if (!cfg.trend_out.empty()) {
                auto f = open_file(cfg.trend_out);
                write_trend_csv({trend_curve(dm, cfg.points)}, f);
            }
            return kExitOk;
        }

        if (compare->parsed()) {
            const auto a = measure_arg(cfg.measure_a);
            const auto b = measure_arg(cfg.measure_b);
            if (cfg.compare_k == 0) throw UsageError("--k must be at least 1");
            const auto m = prepare(load_raw(cfg), cfg);
            const auto dm_a = pairwise_matrix(m, a, cfg.threads);
            const auto dm_b = pairwise_matrix(m, b, cfg.threads);
            const auto box_a = box_stats(dm_a);
            const auto box_b = box_stats(dm_b);
            const auto a_over_b = extreme_difference_pairs(dm_a, dm_b, cfg.compare_k);
            const auto b_over_a = extreme_difference_pairs(dm_b, dm_a, cfg.compare_k);

            out << "pearson=" << csv::format_fixed(pearson(dm_a, dm_b), 4) << '\n';
            out << "median_gap=" << csv::format_fixed(box_b.median - box_a.median, 4) << '\n';
            out << "max_gap=" << csv::format_fixed(box_b.max - box_a.max, 4) << '\n';
            const auto show = [&](const char* label, const PairReport& r) {
                const auto& e = r.entries.front();
                out << label << '=' << e.game_a << " | " << e.game_b << " (" << csv::format_fixed(e.values[0], 4)
                    << " vs " << csv::format_fixed(e.values[1], 4) << ")\n";
            };
            show((std::string("top_") + std::string(to_string(a)) + "_over_" + std::string(to_string(b))).c_str(),
                 a_over_b);
            show((std::string("top_") + std::string(to_string(b)) + "_over_" + std::string(to_string(a))).c_str(),
                 b_over_a);

            if (!cfg.scatter_out.empty()) {
                auto f = open_file(cfg.scatter_out);
                write_scatter_csv(dm_a, dm_b, f);
            }
            if (!cfg.out.empty()) {
                auto f = open_file(cfg.out);
                write_report_jsonl(a_over_b, true, f);
                write_report_jsonl(b_over_a, true, f);
            }
            return kExitOk;
        }

        if (top->parsed()) {
            const auto dm = measure_matrix();
            const auto report = top_pairs(dm, cfg.top_k);
            emit(cfg.out, out, [&](std::ostream& o) { write_report_jsonl(report, false, o); });
            if (!cfg.appearances_out.empty()) {
                auto f = open_file(cfg.appearances_out);
                f << "game,count\n";
                for (const auto& [name, count] : report.appearances) f << csv::quote(name) << ',' << count << '\n';
            }
            return kExitOk;
        }

        const auto tsne_params = [&] {
            TsneParams p;
            p.perplexity = cfg.perplexity;
            p.iterations = cfg.iterations;
            p.learning_rate = cfg.learning_rate;
            p.early_exaggeration = cfg.exaggeration;
            p.seed = cfg.seed;
            p.input_metric = measure_arg(cfg.input_metric);
            p.threads = cfg.threads;
            return p;
        };

        if (embed->parsed()) {
            const auto m = prepare(load_raw(cfg), cfg);
            const auto e = tsne_embed(m, tsne_params());
            std::optional<ClusterLabels> labels;
            if (cfg.embed_clusters > 0) labels = kmeans(e, cfg.embed_clusters, cfg.seed);
            const ClusterLabels* lp = labels ? &*labels : nullptr;
            emit(cfg.out, out, [&](std::ostream& o) { write_embedding_csv(e, lp, o); });
            if (!cfg.svg_out.empty()) {
                auto f = open_file(cfg.svg_out);
                write_embedding_svg(e, lp, f);
            }
            for (const auto& s : e.kl_trace)
                err << "kl iteration=" << s.iteration << " value=" << csv::format_fixed(s.kl, 6) << '\n';
            return kExitOk;
        }

        if (clusters->parsed()) {
            const auto raw = load_raw(cfg);
            const auto m = prepare(raw, cfg);
            Embedding2D e;
            if (!cfg.embedding.empty()) {
                const auto rows = csv::read_file(cfg.embedding);
                if (rows.empty() || rows.front().fields.size() < 4 || rows.front().fields[0] != "game_id")
                    throw DataError(cfg.embedding + ": expected header `game_id,name,x,y`");
                if (rows.size() - 1 != m.num_games())
                    throw DataError(cfg.embedding + ": game count differs from the dataset");
                e.games = m.games;
                e.coords = Matrix(m.num_games(), 2);
                for (std::size_t r = 1; r < rows.size(); ++r) {
                    const auto& f = rows[r].fields;
                    long long id = 0;
                    double x = 0.0, y = 0.0;
                    if (f.size() < 4 || !csv::parse_int(f[0], id) || !csv::parse_double(f[2], x) ||
                        !csv::parse_double(f[3], y))
                        throw DataError(cfg.embedding + ":" + std::to_string(rows[r].line) + ": malformed row");
                    const auto i = raw.game_index(static_cast<GameId>(id));
                    if (!i) throw DataError(cfg.embedding + ": unknown game id " + std::to_string(id));
                    e.coords(*i, 0) = x;
                    e.coords(*i, 1) = y;
                }
            } else {
                e = tsne_embed(m, tsne_params());
            }
            const auto labels = kmeans(e, cfg.cluster_count, cfg.seed);
            const auto report = cluster_report(labels, raw, m);

            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            for (const auto& s : report) {
                nlohmann::ordered_json c;
                c["cluster"] = s.label;
                c["size"] = s.size;
                c["perfect_separators"] = s.perfect_separators;
                auto top_concepts = nlohmann::ordered_json::array();
                for (std::size_t t = 0; t < std::min<std::size_t>(10, s.concepts.size()); ++t) {
                    const auto& cp = s.concepts[t];
                    top_concepts.push_back(
                        {{"concept", cp.name}, {"within", cp.within}, {"outside", cp.outside}, {"lift", cp.lift}});
                }
                c["top_concepts"] = std::move(top_concepts);
                c["members"] = s.members;
                j.push_back(std::move(c));
            }
            emit(cfg.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "concept-dist: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "concept-dist: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}

} // namespace concept_dist::cli
