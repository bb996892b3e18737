#pragma once

#include "concept_dist/transform.hpp"

#include <array>
#include <iosfwd>
#include <optional>

namespace concept_dist {

/// Numeric values double as the tag byte of the binary matrix file.
enum class Measure : std::uint8_t { Cosine = 0, Euclidean = 1, Manhattan = 2, Jaccard = 3, JensenShannon = 4 };

inline constexpr std::array<Measure, 5> kAllMeasures = {
    Measure::Cosine, Measure::Euclidean, Measure::Manhattan, Measure::Jaccard, Measure::JensenShannon};

/// Lower-case CLI name, e.g. "cosine", "jensen-shannon".
std::string_view to_string(Measure m);
std::optional<Measure> parse_measure(std::string_view s);

// Distance kernels. All return values in [0, 1] on valid input and throw
// std::invalid_argument when the vectors differ in length.

/// 0.5 * (1 - cos(c1, c2)). Throws DataError if either vector is all zeros.
double cosine_distance(std::span<const double> c1, std::span<const double> c2);

/// ||c1 - c2|| / sqrt(n).
double euclidean_distance(std::span<const double> c1, std::span<const double> c2);

/// sum |c1 - c2| / n.
double manhattan_distance(std::span<const double> c1, std::span<const double> c2);

/// Weighted (Ruzicka) form: 1 - sum min / sum max. Two zero vectors are at distance 0.
double jaccard_distance(std::span<const double> c1, std::span<const double> c2);

/// Square root of the base-2 Jensen-Shannon divergence after rescaling each
/// vector to sum 1. Throws DataError for a zero-sum vector.
double jensen_shannon_distance(std::span<const double> c1, std::span<const double> c2);

double distance(Measure m, std::span<const double> c1, std::span<const double> c2);

/// Strict upper triangle of a symmetric distance matrix, stored row-major.
/// Pair (i, j), i < j, lives at i*n - i*(i+1)/2 + (j - i - 1).
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(Measure measure, std::vector<GameRecord> games, std::vector<double> data);

    std::size_t size() const noexcept { return games_.size(); }
    Measure measure() const noexcept { return measure_; }
    const std::vector<GameRecord>& games() const noexcept { return games_; }
    std::span<const double> data() const noexcept { return data_; }

    static std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

    std::size_t index(std::size_t i, std::size_t j) const noexcept {
        if (i > j) std::swap(i, j);
        return i * size() - i * (i + 1) / 2 + (j - i - 1);
    }

    /// Distance between rows i and j; 0 on the diagonal.
    double at(std::size_t i, std::size_t j) const noexcept { return i == j ? 0.0 : data_[index(i, j)]; }

    std::optional<std::size_t> row_of(GameId id) const;

    /// Replaces placeholder names (as read from a binary file) using a game list.
    /// Every game in the matrix must appear in `games`.
    void attach_names(const std::vector<GameRecord>& games);

    /// True when both matrices cover the same games in the same order.
    bool aligned_with(const DistanceMatrix& other) const;

private:
    Measure measure_ = Measure::Euclidean;
    std::vector<GameRecord> games_;
    std::vector<double> data_;
};

/// All pairwise distances over the rows of `m`. Rows are split across
/// `threads` workers writing disjoint ranges, so the output is identical for
/// any thread count. Under Cosine and JensenShannon an all-zero game is a
/// DataError naming that game.
DistanceMatrix pairwise_matrix(const ConceptMatrix& m, Measure measure, unsigned threads = 1);

/// Symmetric lookup by game id; (a, a) gives 0. Throws std::out_of_range for
/// unknown ids.
double pair_lookup(const DistanceMatrix& dm, GameId a, GameId b);

struct Neighbor {
    GameId game_id = 0;
    std::string name;
    double distance = 0.0;
};

struct NeighborList {
    GameId query = 0;
    std::vector<Neighbor> entries;
};

/// The k closest games to `query`, ascending by distance with ties broken by
/// name. Throws std::out_of_range for an unknown id and std::invalid_argument
/// when k > n - 1.
NeighborList knn(const DistanceMatrix& dm, GameId query, std::size_t k);

/// Binary layout: "CDM1", u32 n, u8 measure, n x u32 game ids, then the
/// condensed entries as f64, all little-endian.
void write_binary(const DistanceMatrix& dm, std::ostream& out);
void write_binary(const DistanceMatrix& dm, const std::filesystem::path& path);
DistanceMatrix read_binary(std::istream& in);
DistanceMatrix read_binary(const std::filesystem::path& path);

/// `game_a,game_b,distance` with quoted names and 6 decimals.
void write_csv(const DistanceMatrix& dm, std::ostream& out);

} // namespace concept_dist
