#include "concept_dist/dataset.hpp"

#include "concept_dist/csv.hpp"
#include "concept_dist/error.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace concept_dist {

namespace {

constexpr std::array<std::string_view, 6> kCategoryNames = {
    "Properties", "Equipment", "Rules", "Math", "Visual", "Implementation"};
constexpr std::array<std::string_view, 3> kValueKindNames = {"Binary", "Discrete", "Continuous"};
constexpr std::array<std::string_view, 2> kComputationNames = {"Compilation", "Playout"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<Enum>(i);
    return std::nullopt;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

void expect_header(const std::vector<csv::Row>& rows, const std::filesystem::path& path,
                   const std::vector<std::string>& header) {
    if (rows.empty()) throw DataError(path.string() + ": empty file");
    if (rows.front().fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        fail(path, rows.front().line, "expected header `" + expected + "`");
    }
}

void expect_width(const csv::Row& row, std::size_t width, const std::filesystem::path& path) {
    if (row.fields.size() != width)
        fail(path, row.line,
             "malformed row: expected " + std::to_string(width) + " fields, got " +
                 std::to_string(row.fields.size()));
}

long long parse_id(const csv::Row& row, std::size_t col, const std::filesystem::path& path) {
    long long id = 0;
    if (!csv::parse_int(row.fields[col], id)) fail(path, row.line, "malformed id `" + row.fields[col] + "`");
    return id;
}

double parse_value(const csv::Row& row, std::size_t col, const std::filesystem::path& path) {
    double v = 0.0;
    if (!csv::parse_double(row.fields[col], v)) fail(path, row.line, "non-numeric value `" + row.fields[col] + "`");
    if (!std::isfinite(v)) fail(path, row.line, "non-finite value `" + row.fields[col] + "`");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    return out;
}

} // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(ValueKind k) { return kValueKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(ComputationKind k) { return kComputationNames[static_cast<std::size_t>(k)]; }

std::optional<Category> parse_category(std::string_view s) { return lookup<Category>(kCategoryNames, s); }
std::optional<ValueKind> parse_value_kind(std::string_view s) { return lookup<ValueKind>(kValueKindNames, s); }
std::optional<ComputationKind> parse_computation_kind(std::string_view s) {
    return lookup<ComputationKind>(kComputationNames, s);
}

std::optional<std::size_t> RawDataset::game_index(GameId id) const {
    for (std::size_t i = 0; i < games.size(); ++i)
        if (games[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> RawDataset::game_index(std::string_view name) const {
    for (std::size_t i = 0; i < games.size(); ++i)
        if (games[i].name == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> RawDataset::concept_index(std::string_view name) const {
    for (std::size_t i = 0; i < concepts.size(); ++i)
        if (concepts[i].name == name) return i;
    return std::nullopt;
}

std::vector<GameRecord> load_games(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    expect_header(rows, path, {"game_id", "name"});

    std::vector<GameRecord> games;
    std::unordered_set<GameId> ids;
    std::unordered_set<std::string> names;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        expect_width(row, 2, path);
        GameRecord g{parse_id(row, 0, path), row.fields[1]};
        if (g.name.empty()) fail(path, row.line, "empty game name");
        if (!ids.insert(g.id).second) fail(path, row.line, "duplicate game id " + std::to_string(g.id));
        if (!names.insert(g.name).second) fail(path, row.line, "duplicate game name `" + g.name + "`");
        games.push_back(std::move(g));
    }
    if (games.empty()) throw DataError(path.string() + ": no games");
    return games;
}

std::vector<ConceptMeta> load_concepts(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    expect_header(rows, path, {"concept_id", "name", "category", "value_kind", "computation_kind"});

    std::vector<ConceptMeta> concepts;
    std::unordered_set<ConceptId> ids;
    std::unordered_set<std::string> names;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        expect_width(row, 5, path);
        ConceptMeta c;
        c.id = parse_id(row, 0, path);
        c.name = row.fields[1];
        if (c.name.empty()) fail(path, row.line, "empty concept name");

        const auto category = parse_category(row.fields[2]);
        if (!category) fail(path, row.line, "unknown category `" + row.fields[2] + "`");
        const auto kind = parse_value_kind(row.fields[3]);
        if (!kind) fail(path, row.line, "unknown value_kind `" + row.fields[3] + "`");
        const auto computation = parse_computation_kind(row.fields[4]);
        if (!computation) fail(path, row.line, "unknown computation_kind `" + row.fields[4] + "`");
        c.category = *category;
        c.value_kind = *kind;
        c.computation_kind = *computation;

        if (!ids.insert(c.id).second) fail(path, row.line, "duplicate concept id " + std::to_string(c.id));
        if (!names.insert(c.name).second) fail(path, row.line, "duplicate concept name `" + c.name + "`");
        concepts.push_back(std::move(c));
    }
    if (concepts.empty()) throw DataError(path.string() + ": no concepts");
    return concepts;
}

RawDataset load_dataset(const std::filesystem::path& games_path,
                        const std::filesystem::path& concepts_path,
                        const std::filesystem::path& values_path) {
    RawDataset d;
    d.games = load_games(games_path);
    d.concepts = load_concepts(concepts_path);

    std::unordered_map<GameId, std::size_t> game_row;
    for (std::size_t i = 0; i < d.games.size(); ++i) game_row.emplace(d.games[i].id, i);
    std::unordered_map<ConceptId, std::size_t> concept_col;
    for (std::size_t j = 0; j < d.concepts.size(); ++j) concept_col.emplace(d.concepts[j].id, j);

    const auto rows = csv::read_file(values_path);
    expect_header(rows, values_path, {"game_id", "concept_id", "value"});

    const std::size_t n = d.num_games();
    const std::size_t m = d.num_concepts();
    d.values = Matrix(n, m);
    std::vector<bool> seen(n * m, false);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        expect_width(row, 3, values_path);
        const auto gid = parse_id(row, 0, values_path);
        const auto cid = parse_id(row, 1, values_path);
        const auto g = game_row.find(gid);
        if (g == game_row.end()) fail(values_path, row.line, "unknown game id " + std::to_string(gid));
        const auto c = concept_col.find(cid);
        if (c == concept_col.end()) fail(values_path, row.line, "unknown concept id " + std::to_string(cid));
        const std::size_t cell = g->second * m + c->second;
        if (seen[cell])
            fail(values_path, row.line,
                 "duplicate value for game " + std::to_string(gid) + ", concept " + std::to_string(cid));
        seen[cell] = true;
        d.values(g->second, c->second) = parse_value(row, 2, values_path);
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (!seen[i * m + j])
                throw DataError(values_path.string() + ": missing value for game " + std::to_string(d.games[i].id) +
                                " (" + d.games[i].name + "), concept " + std::to_string(d.concepts[j].id) + " (" +
                                d.concepts[j].name + ")");
    return d;
}

RawDataset load_wide_matrix(const std::filesystem::path& path, const std::filesystem::path& meta_path) {
    RawDataset d;
    d.concepts = load_concepts(meta_path);

    const auto rows = csv::read_file(path);
    if (rows.empty()) throw DataError(path.string() + ": empty file");
    const auto& header = rows.front().fields;
    const bool has_ids = !header.empty() && header[0] == "game_id";
    const std::size_t first = has_ids ? 2 : 1;
    if (header.size() < first || header[first - 1] != "name")
        fail(path, rows.front().line, "expected header starting with `name` or `game_id,name`");

    std::unordered_map<std::string, std::size_t> concept_col;
    for (std::size_t j = 0; j < d.concepts.size(); ++j) concept_col.emplace(d.concepts[j].name, j);

    // column in file -> column in matrix
    std::vector<std::size_t> target(header.size(), 0);
    std::vector<bool> covered(d.concepts.size(), false);
    for (std::size_t c = first; c < header.size(); ++c) {
        const auto it = concept_col.find(header[c]);
        if (it == concept_col.end()) fail(path, rows.front().line, "concept `" + header[c] + "` not in metadata");
        if (covered[it->second]) fail(path, rows.front().line, "duplicate column `" + header[c] + "`");
        covered[it->second] = true;
        target[c] = it->second;
    }
    for (std::size_t j = 0; j < d.concepts.size(); ++j)
        if (!covered[j])
            throw DataError(path.string() + ": metadata concept `" + d.concepts[j].name + "` has no column");

    if (rows.size() < 2) throw DataError(path.string() + ": no games");

    d.values = Matrix(rows.size() - 1, d.concepts.size());
    std::unordered_set<GameId> ids;
    std::unordered_set<std::string> names;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        expect_width(row, header.size(), path);
        GameRecord g;
        g.id = has_ids ? parse_id(row, 0, path) : static_cast<GameId>(r);
        g.name = row.fields[first - 1];
        if (g.name.empty()) fail(path, row.line, "empty game name");
        if (!ids.insert(g.id).second) fail(path, row.line, "duplicate game id " + std::to_string(g.id));
        if (!names.insert(g.name).second) fail(path, row.line, "duplicate game name `" + g.name + "`");
        for (std::size_t c = first; c < header.size(); ++c) d.values(r - 1, target[c]) = parse_value(row, c, path);
        d.games.push_back(std::move(g));
    }
    return d;
}

ValidationReport validate_dataset(const RawDataset& d) {
    ValidationReport report;
    const std::size_t n = d.num_games();
    const std::size_t m = d.num_concepts();

    for (const auto& c : d.concepts) {
        ++report.per_category[c.category];
        ++report.per_value_kind[c.value_kind];
    }

    if (n == 0) report.errors.push_back({"games", "no games"});
    if (m == 0) report.errors.push_back({"concepts", "no concepts"});

    std::set<GameId> game_ids;
    std::set<std::string> game_names;
    for (const auto& g : d.games) {
        const std::string loc = "game " + std::to_string(g.id);
        if (g.name.empty()) report.errors.push_back({loc, "empty name"});
        if (!game_ids.insert(g.id).second) report.errors.push_back({loc, "duplicate game id"});
        if (!g.name.empty() && !game_names.insert(g.name).second)
            report.errors.push_back({loc, "duplicate game name `" + g.name + "`"});
    }

    std::set<ConceptId> concept_ids;
    std::set<std::string> concept_names;
    for (const auto& c : d.concepts) {
        const std::string loc = "concept " + std::to_string(c.id);
        if (c.name.empty()) report.errors.push_back({loc, "empty name"});
        if (!concept_ids.insert(c.id).second) report.errors.push_back({loc, "duplicate concept id"});
        if (!c.name.empty() && !concept_names.insert(c.name).second)
            report.errors.push_back({loc, "duplicate concept name `" + c.name + "`"});
        if (static_cast<std::size_t>(c.category) >= kCategoryNames.size())
            report.errors.push_back({loc, "category outside the six known categories"});
    }

    if (d.values.rows() != n || d.values.cols() != m) {
        report.errors.push_back({"values", "matrix shape " + std::to_string(d.values.rows()) + "x" +
                                               std::to_string(d.values.cols()) + " does not match " +
                                               std::to_string(n) + " games x " + std::to_string(m) + " concepts"});
        return report;
    }

    for (std::size_t j = 0; j < m; ++j) {
        const auto& c = d.concepts[j];
        bool constant = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = d.values(i, j);
            const auto loc = [&] { return "game " + std::to_string(d.games[i].id) + ", concept " + c.name; };
            if (!std::isfinite(v)) {
                report.errors.push_back({loc(), "non-finite value"});
                continue;
            }
            if (c.value_kind == ValueKind::Binary && v != 0.0 && v != 1.0)
                report.errors.push_back({loc(), "binary concept holds " + csv::format_exact(v)});
            if (v != d.values(0, j)) constant = false;
        }
        if (n > 1 && constant) report.warnings.push_back({"concept " + c.name, "constant column"});
    }

    for (std::size_t i = 0; i < n; ++i) {
        bool all_zero = true;
        for (double v : d.values.row(i)) all_zero = all_zero && v == 0.0;
        if (all_zero && m > 0)
            report.warnings.push_back({"game " + d.games[i].name, "all concept values are zero"});
    }
    return report;
}

void write_games(const std::vector<GameRecord>& games, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "game_id,name\n";
    for (const auto& g : games) out << g.id << ',' << csv::escape(g.name) << '\n';
}

void write_concepts(const std::vector<ConceptMeta>& concepts, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "concept_id,name,category,value_kind,computation_kind\n";
    for (const auto& c : concepts)
        out << c.id << ',' << csv::escape(c.name) << ',' << to_string(c.category) << ',' << to_string(c.value_kind)
            << ',' << to_string(c.computation_kind) << '\n';
}

void write_dataset(const RawDataset& d,
                   const std::filesystem::path& games_path,
                   const std::filesystem::path& concepts_path,
                   const std::filesystem::path& values_path) {
    write_games(d.games, games_path);
    write_concepts(d.concepts, concepts_path);
    auto out = open_out(values_path);
    out << "game_id,concept_id,value\n";
    for (std::size_t i = 0; i < d.num_games(); ++i)
        for (std::size_t j = 0; j < d.num_concepts(); ++j)
            out << d.games[i].id << ',' << d.concepts[j].id << ',' << csv::format_exact(d.values(i, j)) << '\n';
}

void write_wide_matrix(const std::vector<GameRecord>& games,
                       const std::vector<ConceptMeta>& concepts,
                       const Matrix& values,
                       const std::filesystem::path& path) {
    auto out = open_out(path);
    write_wide_matrix(games, concepts, values, out);
}

void write_wide_matrix(const std::vector<GameRecord>& games,
                       const std::vector<ConceptMeta>& concepts,
                       const Matrix& values,
                       std::ostream& out) {
    out << "game_id,name";
    for (const auto& c : concepts) out << ',' << csv::escape(c.name);
    out << '\n';
    for (std::size_t i = 0; i < games.size(); ++i) {
        out << games[i].id << ',' << csv::escape(games[i].name);
        for (double v : values.row(i)) out << ',' << csv::format_exact(v);
        out << '\n';
    }
}

} // namespace concept_dist
