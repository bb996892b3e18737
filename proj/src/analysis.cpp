#include "concept_dist/analysis.hpp"

#include "concept_dist/csv.hpp"
#include "concept_dist/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace concept_dist {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct Candidate {
    double key;
    std::uint32_t i;
    std::uint32_t j;
};

template <typename KeyFn>
std::vector<Candidate> top_candidates(const DistanceMatrix& dm, std::size_t k, KeyFn key) {
    const std::size_t n = dm.size();
    std::vector<Candidate> all;
    all.reserve(DistanceMatrix::pair_count(n));
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            all.push_back({key(idx++), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});

    const auto& games = dm.games();
    const auto before = [&](const Candidate& a, const Candidate& b) {
        if (a.key != b.key) return a.key > b.key;
        if (games[a.i].name != games[b.i].name) return games[a.i].name < games[b.i].name;
        return games[a.j].name < games[b.j].name;
    };
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
    all.resize(k);
    return all;
}

PairEntry make_entry(const DistanceMatrix& dm, const Candidate& c) {
    PairEntry e;
    e.row_a = c.i;
    e.row_b = c.j;
    e.game_a = dm.games()[c.i].name;
    e.game_b = dm.games()[c.j].name;
    return e;
}

void count_appearances(PairReport& report) {
    for (const auto& e : report.entries) {
        ++report.appearances[e.game_a];
        ++report.appearances[e.game_b];
    }
}

} // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values, Measure measure) {
    if (values.empty()) throw std::invalid_argument("box_stats: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return {measure,
            sorted.front(),
            quantile_sorted(sorted, 0.25),
            quantile_sorted(sorted, 0.5),
            quantile_sorted(sorted, 0.75),
            sorted.back()};
}

BoxStats box_stats(const DistanceMatrix& dm) { return box_stats(dm.data(), dm.measure()); }

TrendCurve trend_curve(std::span<const double> values, Measure measure, std::size_t num_points) {
    if (num_points < 2) throw std::invalid_argument("trend_curve: need at least 2 points");
    if (values.empty()) throw std::invalid_argument("trend_curve: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    TrendCurve curve{measure, {}};
    curve.points.reserve(num_points);
    for (std::size_t k = 0; k < num_points; ++k) {
        const double p = static_cast<double>(k) / static_cast<double>(num_points - 1);
        curve.points.push_back({100.0 * p, quantile_sorted(sorted, p)});
    }
    // Interpolation rounding can dip by an ulp between adjacent equal ranks.
    for (std::size_t k = 1; k < num_points; ++k)
        curve.points[k].value = std::max(curve.points[k].value, curve.points[k - 1].value);
    return curve;
}

TrendCurve trend_curve(const DistanceMatrix& dm, std::size_t num_points) {
    return trend_curve(dm.data(), dm.measure(), num_points);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: inputs differ in length");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 samples");
    const auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double t) { return t == v.front(); });
    };
    if (constant(x) || constant(y)) throw DataError("pearson: zero variance input");

    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    const double n = static_cast<double>(x.size());
    const double mx = sx.value() / n;
    const double my = sy.value() / n;

    CompensatedSum sxx, syy, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    if (sxx.value() == 0.0 || syy.value() == 0.0) throw DataError("pearson: zero variance input");
    return std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
}

double pearson(const DistanceMatrix& dm1, const DistanceMatrix& dm2) {
    if (!dm1.aligned_with(dm2)) throw std::invalid_argument("pearson: matrices cover different games or order");
    return pearson(dm1.data(), dm2.data());
}

PairReport extreme_difference_pairs(const DistanceMatrix& dm1, const DistanceMatrix& dm2, std::size_t k) {
    if (!dm1.aligned_with(dm2))
        throw std::invalid_argument("extreme_difference_pairs: matrices cover different games or order");
    if (k == 0) throw std::invalid_argument("extreme_difference_pairs: k must be at least 1");

    const auto a = dm1.data();
    const auto b = dm2.data();
    PairReport report;
    for (const auto& c : top_candidates(dm1, k, [&](std::size_t idx) { return a[idx] - b[idx]; })) {
        auto e = make_entry(dm1, c);
        const std::size_t idx = dm1.index(c.i, c.j);
        e.values = {a[idx], b[idx]};
        e.difference = c.key;
        report.entries.push_back(std::move(e));
    }
    count_appearances(report);
    return report;
}

PairReport top_pairs(const DistanceMatrix& dm, std::size_t k) {
    if (k == 0) throw std::invalid_argument("top_pairs: k must be at least 1");
    const auto d = dm.data();
    PairReport report;
    for (const auto& c : top_candidates(dm, k, [&](std::size_t idx) { return d[idx]; })) {
        auto e = make_entry(dm, c);
        e.values = {c.key};
        e.difference = c.key;
        report.entries.push_back(std::move(e));
    }
    count_appearances(report);
    return report;
}

void write_box_csv(const std::vector<BoxStats>& stats, std::ostream& out) {
    out << "measure,min,q1,median,q3,max\n";
    for (const auto& s : stats)
        out << to_string(s.measure) << ',' << csv::format_exact(s.min) << ',' << csv::format_exact(s.q1) << ','
            << csv::format_exact(s.median) << ',' << csv::format_exact(s.q3) << ',' << csv::format_exact(s.max)
            << '\n';
}

void write_trend_csv(const std::vector<TrendCurve>& curves, std::ostream& out) {
    out << "measure,percentile,value\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            out << to_string(c.measure) << ',' << csv::format_exact(p.percentile) << ','
                << csv::format_exact(p.value) << '\n';
}

void write_scatter_csv(const DistanceMatrix& first, const DistanceMatrix& second, std::ostream& out) {
    if (!first.aligned_with(second)) throw std::invalid_argument("scatter: matrices cover different games or order");
    out << "game_a,game_b," << to_string(first.measure()) << ',' << to_string(second.measure()) << '\n';
    const auto& games = first.games();
    const auto a = first.data();
    const auto b = second.data();
    std::size_t k = 0;
    for (std::size_t i = 0; i < first.size(); ++i)
        for (std::size_t j = i + 1; j < first.size(); ++j, ++k)
            out << csv::quote(games[i].name) << ',' << csv::quote(games[j].name) << ','
                << csv::format_fixed(a[k], 6) << ',' << csv::format_fixed(b[k], 6) << '\n';
}

void write_report_jsonl(const PairReport& report, bool with_difference, std::ostream& out) {
    for (const auto& e : report.entries) {
        nlohmann::ordered_json j;
        j["game_a"] = e.game_a;
        j["game_b"] = e.game_b;
        j["values"] = e.values;
        j["difference"] = with_difference ? nlohmann::ordered_json(e.difference) : nlohmann::ordered_json(nullptr);
        out << j.dump() << '\n';
    }
}

} // namespace concept_dist
