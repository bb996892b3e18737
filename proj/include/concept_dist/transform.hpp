#pragma once

#include "concept_dist/dataset.hpp"

#include <set>
#include <span>

namespace concept_dist {

enum class Stage { Raw, LogTransformed, Normalized, Weighted };

std::string_view to_string(Stage s);

/// Games x concepts matrix tagged with how far through the pipeline it is.
/// At stage Normalized every cell lies in [0, 1].
struct ConceptMatrix {
    std::vector<GameRecord> games;
    std::vector<ConceptMeta> concepts;
    Matrix values;
    Stage stage = Stage::Raw;

    std::size_t num_games() const noexcept { return games.size(); }
    std::size_t num_concepts() const noexcept { return concepts.size(); }
    std::span<const double> row(std::size_t i) const noexcept { return values.row(i); }
};

enum class WeightScheme { None, IDF, CategoryEqual, Custom };

struct WeightVector {
    std::vector<double> weights;
    WeightScheme scheme = WeightScheme::None;
};

struct ColumnRange {
    ConceptId concept_id = 0;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

/// Per-concept range of the log-transformed column, kept so that new games
/// can be projected into an already fitted space.
struct NormalizationParams {
    std::vector<ColumnRange> columns;

    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

struct NormalizedData {
    ConceptMatrix matrix;
    NormalizationParams params;
};

/// Bi-symmetric log: log2(x + 1) for x >= 0, -log2(1 - x) otherwise.
/// Throws DataError for non-finite input.
double bisym_log(double x);

/// Applies bisym_log cell-wise.
ConceptMatrix log_transform(const RawDataset& d);

/// Log transform followed by per-column min-max scaling over all games.
/// Constant columns become all zeros.
NormalizedData normalize(const RawDataset& d);

/// Maps one game's raw concept values into a fitted space; results outside
/// the fitted range are clamped to [0, 1].
std::vector<double> project(const NormalizationParams& params, std::span<const double> raw);

/// Wraps an already-normalized value matrix (e.g. read back from the
/// `normalize` output). Throws DataError if any cell lies outside [0, 1].
ConceptMatrix as_normalized(RawDataset d);

/// Binary concepts: log2(N / df) where df counts games holding 1 (df = 0
/// gives 0). All other concepts get weight 1.
WeightVector idf_weights(const ConceptMatrix& m);

/// Each concept gets 1 / |category|, so every non-empty category sums to 1.
WeightVector category_equal_weights(const ConceptMatrix& m);

WeightVector custom_weights(std::vector<double> weights);

/// Drops the concepts of the excluded categories, keeping the order of the rest.
/// Throws std::invalid_argument when nothing would remain.
ConceptMatrix exclude_categories(const ConceptMatrix& m, const std::set<Category>& excluded);

/// Restricts a weight vector built for `m` to the concepts that survive the exclusion.
WeightVector exclude_categories(const WeightVector& w, const ConceptMatrix& m, const std::set<Category>& excluded);

/// cell(i, j) * w[j]. Throws std::invalid_argument on length mismatch or
/// negative/non-finite weights.
ConceptMatrix apply_weights(const ConceptMatrix& m, const WeightVector& w);

void write_params(const NormalizationParams& params, const std::filesystem::path& path);
NormalizationParams read_params(const std::filesystem::path& path);

} // namespace concept_dist
