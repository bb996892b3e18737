#pragma once

#include "concept_dist/distance.hpp"

#include <iosfwd>
#include <map>

namespace concept_dist {

struct BoxStats {
    Measure measure = Measure::Euclidean;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Inclusive linear-interpolation quantile of already sorted data,
/// p in [0, 1]: position (size - 1) * p between closest ranks.
double quantile_sorted(std::span<const double> sorted, double p);

BoxStats box_stats(std::span<const double> values, Measure measure);
BoxStats box_stats(const DistanceMatrix& dm);

struct TrendPoint {
    double percentile = 0.0; // 0..100
    double value = 0.0;
};

struct TrendCurve {
    Measure measure = Measure::Euclidean;
    std::vector<TrendPoint> points;
};

/// `num_points` evenly spaced percentiles from 0 to 100 inclusive.
TrendCurve trend_curve(std::span<const double> values, Measure measure, std::size_t num_points);
TrendCurve trend_curve(const DistanceMatrix& dm, std::size_t num_points);

/// Sample Pearson correlation. Two-pass with Neumaier-compensated sums in
/// index order. Throws DataError if either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlation over the paired condensed entries of two aligned matrices.
double pearson(const DistanceMatrix& dm1, const DistanceMatrix& dm2);

struct PairEntry {
    std::size_t row_a = 0;
    std::size_t row_b = 0;
    std::string game_a;
    std::string game_b;
    std::vector<double> values;
    double difference = 0.0; // values[0] - values[1] for two-matrix reports
};

struct PairReport {
    std::vector<PairEntry> entries;
    /// Number of report entries each game takes part in.
    std::map<std::string, std::size_t> appearances;
};

/// The k pairs with the largest dm1 - dm2, descending. Ties by
/// (game_a, game_b) name ascending. Throws std::invalid_argument if the
/// matrices are not aligned or k == 0.
PairReport extreme_difference_pairs(const DistanceMatrix& dm1, const DistanceMatrix& dm2, std::size_t k);

/// The k largest distances, descending, with the same tie-break.
PairReport top_pairs(const DistanceMatrix& dm, std::size_t k);

void write_box_csv(const std::vector<BoxStats>& stats, std::ostream& out);
void write_trend_csv(const std::vector<TrendCurve>& curves, std::ostream& out);

/// Streams `game_a,game_b,cosine,euclidean` one pair at a time; `first` and
/// `second` fill the two value columns in that order.
void write_scatter_csv(const DistanceMatrix& first, const DistanceMatrix& second, std::ostream& out);

/// One JSON object per line: {"game_a","game_b","values","difference"}.
/// top_pairs reports carry a null difference.
void write_report_jsonl(const PairReport& report, bool with_difference, std::ostream& out);

} // namespace concept_dist
