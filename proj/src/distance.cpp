#include "concept_dist/distance.hpp"

#include "concept_dist/csv.hpp"
#include "concept_dist/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_map>

namespace concept_dist {

namespace {

constexpr std::array<std::string_view, 5> kMeasureNames = {"cosine", "euclidean", "manhattan", "jaccard",
                                                           "jensen-shannon"};

void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: vector lengths differ (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double plogp_ratio(double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; }

} // namespace

std::string_view to_string(Measure m) { return kMeasureNames[static_cast<std::size_t>(m)]; }

std::optional<Measure> parse_measure(std::string_view s) {
    for (std::size_t i = 0; i < kMeasureNames.size(); ++i)
        if (kMeasureNames[i] == s) return static_cast<Measure>(i);
    if (s == "jsd" || s == "jensenshannon") return Measure::JensenShannon;
    return std::nullopt;
}

double cosine_distance(std::span<const double> c1, std::span<const double> c2) {
    check_lengths(c1, c2);
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        dot += c1[i] * c2[i];
        n1 += c1[i] * c1[i];
        n2 += c2[i] * c2[i];
    }
    if (n1 == 0.0 || n2 == 0.0) throw DataError("cosine distance undefined for a zero vector");
    // sqrt(n1 * n2) rather than sqrt(n1) * sqrt(n2): for identical vectors
    // this is exactly dot, so self-distance is exactly 0.
    const double similarity = std::clamp(dot / std::sqrt(n1 * n2), -1.0, 1.0);
    return 0.5 * (1.0 - similarity);
}

double euclidean_distance(std::span<const double> c1, std::span<const double> c2) {
    check_lengths(c1, c2);
    if (c1.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        const double d = c1[i] - c2[i];
        sum += d * d;
    }
    return std::sqrt(sum) / std::sqrt(static_cast<double>(c1.size()));
}

double manhattan_distance(std::span<const double> c1, std::span<const double> c2) {
    check_lengths(c1, c2);
    if (c1.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) sum += std::abs(c1[i] - c2[i]);
    return sum / static_cast<double>(c1.size());
}

double jaccard_distance(std::span<const double> c1, std::span<const double> c2) {
    check_lengths(c1, c2);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        lo += std::min(c1[i], c2[i]);
        hi += std::max(c1[i], c2[i]);
    }
    if (hi == 0.0) return 0.0;
    return std::clamp(1.0 - lo / hi, 0.0, 1.0);
}

double jensen_shannon_distance(std::span<const double> c1, std::span<const double> c2) {
    check_lengths(c1, c2);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        s1 += c1[i];
        s2 += c2[i];
    }
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw DataError("Jensen-Shannon distance undefined for a zero-sum vector");

    double divergence = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        const double p = c1[i] / s1;
        const double q = c2[i] / s2;
        const double m = 0.5 * (p + q);
        divergence += plogp_ratio(p, m) + plogp_ratio(q, m);
    }
    return std::sqrt(std::clamp(0.5 * divergence, 0.0, 1.0));
}

double distance(Measure m, std::span<const double> c1, std::span<const double> c2) {
    switch (m) {
    case Measure::Cosine: return cosine_distance(c1, c2);
    case Measure::Euclidean: return euclidean_distance(c1, c2);
    case Measure::Manhattan: return manhattan_distance(c1, c2);
    case Measure::Jaccard: return jaccard_distance(c1, c2);
    case Measure::JensenShannon: return jensen_shannon_distance(c1, c2);
    }
    throw std::invalid_argument("unknown measure");
}

DistanceMatrix::DistanceMatrix(Measure measure, std::vector<GameRecord> games, std::vector<double> data)
    : measure_(measure), games_(std::move(games)), data_(std::move(data)) {
    if (games_.size() < 2) throw std::invalid_argument("DistanceMatrix: need at least 2 games");
    if (data_.size() != pair_count(games_.size()))
        throw std::invalid_argument("DistanceMatrix: expected " + std::to_string(pair_count(games_.size())) +
                                    " entries, got " + std::to_string(data_.size()));
}

std::optional<std::size_t> DistanceMatrix::row_of(GameId id) const {
    for (std::size_t i = 0; i < games_.size(); ++i)
        if (games_[i].id == id) return i;
    return std::nullopt;
}

void DistanceMatrix::attach_names(const std::vector<GameRecord>& games) {
    std::unordered_map<GameId, const std::string*> by_id;
    for (const auto& g : games) by_id.emplace(g.id, &g.name);
    for (auto& g : games_) {
        const auto it = by_id.find(g.id);
        if (it == by_id.end()) throw DataError("distance matrix game id " + std::to_string(g.id) + " not in game list");
        g.name = *it->second;
    }
}

bool DistanceMatrix::aligned_with(const DistanceMatrix& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (games_[i].id != other.games_[i].id) return false;
    return true;
}

DistanceMatrix pairwise_matrix(const ConceptMatrix& m, Measure measure, unsigned threads) {
    const std::size_t n = m.num_games();
    if (n < 2) throw std::invalid_argument("pairwise_matrix: need at least 2 games");
    if (m.stage != Stage::Normalized && m.stage != Stage::Weighted)
        throw std::invalid_argument("pairwise_matrix: matrix must be Normalized or Weighted");

    if (measure == Measure::Cosine || measure == Measure::JensenShannon) {
        for (std::size_t i = 0; i < n; ++i)
            if (all_zero(m.row(i)))
                throw DataError("game `" + m.games[i].name + "` has an all-zero concept vector; " +
                                std::string(to_string(measure)) + " distance is undefined");
    }

    std::vector<double> data(DistanceMatrix::pair_count(n));
    auto fill_rows = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            std::size_t k = i * n - i * (i + 1) / 2;
            for (std::size_t j = i + 1; j < n; ++j) data[k++] = distance(measure, m.row(i), m.row(j));
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        fill_rows(0, n);
    } else {
        // Row i costs n - i - 1 kernels; cut the row range into chunks of
        // roughly equal pair counts.
        const std::size_t total = data.size();
        std::vector<std::size_t> bounds{0};
        std::size_t acc = 0;
        for (std::size_t i = 0; i < n && bounds.size() < threads; ++i) {
            acc += n - i - 1;
            if (acc * threads >= total * bounds.size()) bounds.push_back(i + 1);
        }
        if (bounds.back() != n) bounds.push_back(n);

        std::vector<std::jthread> workers;
        for (std::size_t t = 0; t + 1 < bounds.size(); ++t)
            workers.emplace_back(fill_rows, bounds[t], bounds[t + 1]);
    }
    return DistanceMatrix(measure, m.games, std::move(data));
}

double pair_lookup(const DistanceMatrix& dm, GameId a, GameId b) {
    const auto i = dm.row_of(a);
    if (!i) throw std::out_of_range("unknown game id " + std::to_string(a));
    const auto j = dm.row_of(b);
    if (!j) throw std::out_of_range("unknown game id " + std::to_string(b));
    return dm.at(*i, *j);
}

NeighborList knn(const DistanceMatrix& dm, GameId query, std::size_t k) {
    const auto q = dm.row_of(query);
    if (!q) throw std::out_of_range("unknown game id " + std::to_string(query));
    const std::size_t n = dm.size();
    if (k > n - 1)
        throw std::invalid_argument("knn: k = " + std::to_string(k) + " exceeds " + std::to_string(n - 1) +
                                    " other games");

    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
        if (j != *q) others.push_back(j);
    const auto& games = dm.games();
    const auto closer = [&](std::size_t a, std::size_t b) {
        const double da = dm.at(*q, a), db = dm.at(*q, b);
        if (da != db) return da < db;
        return games[a].name < games[b].name;
    };
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end(), closer);

    NeighborList out{query, {}};
    for (std::size_t r = 0; r < k; ++r)
        out.entries.push_back({games[others[r]].id, games[others[r]].name, dm.at(*q, others[r])});
    return out;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    char bytes[sizeof(T)];
    for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFF);
    out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw DataError("distance matrix file truncated");
    T value = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(bytes[b]) << (8 * b);
    return value;
}

constexpr char kMagic[4] = {'C', 'D', 'M', '1'};

} // namespace

void write_binary(const DistanceMatrix& dm, std::ostream& out) {
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dm.size()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dm.measure()));
    for (const auto& g : dm.games()) {
        if (g.id < 0 || g.id > 0xFFFFFFFFll)
            throw DataError("game id " + std::to_string(g.id) + " does not fit the u32 matrix file field");
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.id));
    }
    for (double v : dm.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw DataError("failed writing distance matrix");
}

void write_binary(const DistanceMatrix& dm, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    write_binary(dm, out);
}

DistanceMatrix read_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw DataError("not a CDM1 distance matrix file");
    const auto n = get_le<std::uint32_t>(in);
    const auto tag = get_le<std::uint8_t>(in);
    if (tag >= kAllMeasures.size()) throw DataError("unknown measure tag " + std::to_string(tag));
    if (n < 2) throw DataError("distance matrix file with fewer than 2 games");

    std::vector<GameRecord> games(n);
    for (auto& g : games) {
        g.id = get_le<std::uint32_t>(in);
        g.name = std::to_string(g.id);
    }
    std::vector<double> data(DistanceMatrix::pair_count(n));
    for (double& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after distance matrix");
    return DistanceMatrix(static_cast<Measure>(tag), std::move(games), std::move(data));
}

DistanceMatrix read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    try {
        return read_binary(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_csv(const DistanceMatrix& dm, std::ostream& out) {
    out << "game_a,game_b,distance\n";
    const auto& games = dm.games();
    std::size_t k = 0;
    for (std::size_t i = 0; i < dm.size(); ++i)
        for (std::size_t j = i + 1; j < dm.size(); ++j)
            out << csv::quote(games[i].name) << ',' << csv::quote(games[j].name) << ','
                << csv::format_fixed(dm.data()[k++], 6) << '\n';
}

} // namespace concept_dist
