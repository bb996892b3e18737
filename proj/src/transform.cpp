#include "concept_dist/transform.hpp"

#include "concept_dist/csv.hpp"
#include "concept_dist/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace concept_dist {

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::Raw: return "Raw";
    case Stage::LogTransformed: return "LogTransformed";
    case Stage::Normalized: return "Normalized";
    case Stage::Weighted: return "Weighted";
    }
    return "?";
}

double bisym_log(double x) {
    if (!std::isfinite(x)) throw DataError("bisym_log: non-finite input");
    return x >= 0.0 ? std::log2(x + 1.0) : -std::log2(1.0 - x);
}

ConceptMatrix log_transform(const RawDataset& d) {
    ConceptMatrix m{d.games, d.concepts, d.values, Stage::LogTransformed};
    for (double& v : m.values.data()) v = bisym_log(v);
    return m;
}

namespace {

double scale(double v, double lo, double hi) {
    if (hi == lo) return 0.0;
    return (v - lo) / (hi - lo);
}

void require_normalized(const ConceptMatrix& m, const char* op) {
    if (m.stage != Stage::Normalized)
        throw std::invalid_argument(std::string(op) + ": expected a Normalized matrix, got " +
                                    std::string(to_string(m.stage)));
}

} // namespace

NormalizedData normalize(const RawDataset& d) {
    NormalizedData out{log_transform(d), {}};
    auto& values = out.matrix.values;
    const std::size_t n = values.rows();
    out.params.columns.reserve(values.cols());

    for (std::size_t j = 0; j < values.cols(); ++j) {
        double lo = n ? values(0, j) : 0.0;
        double hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, values(i, j));
            hi = std::max(hi, values(i, j));
        }
        for (std::size_t i = 0; i < n; ++i) values(i, j) = scale(values(i, j), lo, hi);
        out.params.columns.push_back({d.concepts[j].id, lo, hi});
    }
    out.matrix.stage = Stage::Normalized;
    return out;
}

std::vector<double> project(const NormalizationParams& params, std::span<const double> raw) {
    if (raw.size() != params.columns.size())
        throw std::invalid_argument("project: expected " + std::to_string(params.columns.size()) + " values, got " +
                                    std::to_string(raw.size()));
    std::vector<double> out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        const auto& c = params.columns[j];
        out[j] = std::clamp(scale(bisym_log(raw[j]), c.min, c.max), 0.0, 1.0);
    }
    return out;
}

ConceptMatrix as_normalized(RawDataset d) {
    for (std::size_t i = 0; i < d.values.rows(); ++i)
        for (std::size_t j = 0; j < d.values.cols(); ++j) {
            const double v = d.values(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("normalized input: game `" + d.games[i].name + "`, concept `" + d.concepts[j].name +
                                "` holds " + csv::format_exact(v) + " outside [0, 1]");
        }
    return {std::move(d.games), std::move(d.concepts), std::move(d.values), Stage::Normalized};
}

WeightVector idf_weights(const ConceptMatrix& m) {
    require_normalized(m, "idf_weights");
    const std::size_t n = m.num_games();
    WeightVector w{std::vector<double>(m.num_concepts(), 1.0), WeightScheme::IDF};
    for (std::size_t j = 0; j < m.num_concepts(); ++j) {
        if (m.concepts[j].value_kind != ValueKind::Binary) continue;
        std::size_t df = 0;
        for (std::size_t i = 0; i < n; ++i) df += m.values(i, j) == 1.0;
        w.weights[j] = df == 0 ? 0.0 : std::log2(static_cast<double>(n) / static_cast<double>(df));
    }
    return w;
}

WeightVector category_equal_weights(const ConceptMatrix& m) {
    require_normalized(m, "category_equal_weights");
    std::map<Category, std::size_t> sizes;
    for (const auto& c : m.concepts) ++sizes[c.category];
    WeightVector w{{}, WeightScheme::CategoryEqual};
    w.weights.reserve(m.num_concepts());
    for (const auto& c : m.concepts) w.weights.push_back(1.0 / static_cast<double>(sizes[c.category]));
    return w;
}

WeightVector custom_weights(std::vector<double> weights) {
    for (double v : weights)
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
    return {std::move(weights), WeightScheme::Custom};
}

ConceptMatrix exclude_categories(const ConceptMatrix& m, const std::set<Category>& excluded) {
    if (m.stage != Stage::Normalized && m.stage != Stage::Weighted)
        throw std::invalid_argument("exclude_categories: matrix must be Normalized or Weighted");
    if (excluded.empty()) return m;

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < m.num_concepts(); ++j)
        if (!excluded.contains(m.concepts[j].category)) keep.push_back(j);
    if (keep.empty()) throw std::invalid_argument("exclude_categories: no concepts remain");

    ConceptMatrix out{m.games, {}, Matrix(m.num_games(), keep.size()), m.stage};
    for (std::size_t j : keep) out.concepts.push_back(m.concepts[j]);
    for (std::size_t i = 0; i < m.num_games(); ++i)
        for (std::size_t k = 0; k < keep.size(); ++k) out.values(i, k) = m.values(i, keep[k]);
    return out;
}

WeightVector exclude_categories(const WeightVector& w, const ConceptMatrix& m, const std::set<Category>& excluded) {
    if (w.weights.size() != m.num_concepts())
        throw std::invalid_argument("exclude_categories: weight vector does not match the matrix");
    WeightVector out{{}, w.scheme};
    for (std::size_t j = 0; j < m.num_concepts(); ++j)
        if (!excluded.contains(m.concepts[j].category)) out.weights.push_back(w.weights[j]);
    return out;
}

ConceptMatrix apply_weights(const ConceptMatrix& m, const WeightVector& w) {
    if (w.weights.size() != m.num_concepts())
        throw std::invalid_argument("apply_weights: " + std::to_string(w.weights.size()) + " weights for " +
                                    std::to_string(m.num_concepts()) + " concepts");
    for (double v : w.weights)
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("apply_weights: weights must be finite and >= 0");

    ConceptMatrix out = m;
    for (std::size_t i = 0; i < out.num_games(); ++i) {
        auto row = out.values.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] *= w.weights[j];
    }
    out.stage = Stage::Weighted;
    return out;
}

void write_params(const NormalizationParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << "concept_id,min,max\n";
    for (const auto& c : params.columns)
        out << c.concept_id << ',' << csv::format_exact(c.min) << ',' << csv::format_exact(c.max) << '\n';
}

NormalizationParams read_params(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"concept_id", "min", "max"})
        throw DataError(path.string() + ": expected header `concept_id,min,max`");
    NormalizationParams params;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        ColumnRange c;
        long long id = 0;
        if (f.size() != 3 || !csv::parse_int(f[0], id) || !csv::parse_double(f[1], c.min) ||
            !csv::parse_double(f[2], c.max) || !std::isfinite(c.min) || !std::isfinite(c.max) || c.min > c.max)
            throw DataError(path.string() + ":" + std::to_string(rows[r].line) + ": malformed row");
        c.concept_id = id;
        params.columns.push_back(c);
    }
    return params;
}

} // namespace concept_dist
