#include "concept_dist/analysis.hpp"
#include "concept_dist/error.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <sstream>

using namespace concept_dist;

namespace {

DistanceMatrix matrix_from(const std::vector<double>& data, Measure measure = Measure::Euclidean) {
    std::size_t n = 2;
    while (DistanceMatrix::pair_count(n) < data.size()) ++n;
    std::vector<GameRecord> games;
    for (std::size_t i = 0; i < n; ++i) games.push_back({static_cast<GameId>(i + 1), "game " + std::to_string(i)});
    return DistanceMatrix(measure, games, data);
}

DistanceMatrix random_dm(std::mt19937_64& gen, std::size_t n, Measure measure, bool coarse = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> data(DistanceMatrix::pair_count(n));
    for (double& v : data) v = coarse ? std::round(u(gen) * 4) / 4 : u(gen);
    std::vector<GameRecord> games;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
    std::shuffle(names.begin(), names.end(), gen);
    for (std::size_t i = 0; i < n; ++i) games.push_back({static_cast<GameId>(i + 1), names[i]});
    return DistanceMatrix(measure, games, data);
}

// Piecewise-linear curve through (i / (N-1), sorted[i]), evaluated by
// locating the segment that contains p.
double quantile_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double step = 1.0 / static_cast<double>(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double left = static_cast<double>(i) * step;
        const double right = static_cast<double>(i + 1) * step;
        if (p <= right || i + 2 == v.size()) {
            const double t = (p - left) / step;
            return v[i] * (1 - t) + v[i + 1] * t;
        }
    }
    return v.back();
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += (long double)x[i] * x[i];
        syy += (long double)y[i] * y[i];
        sxy += (long double)x[i] * y[i];
    }
    return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

struct OraclePair {
    double key;
    std::string a, b;
    double v1, v2;
};

// Full n x n scan, full sort.
std::vector<OraclePair> ranking_oracle(const DistanceMatrix& d1, const DistanceMatrix* d2) {
    std::vector<OraclePair> all;
    const std::size_t n = d1.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (j <= i) continue;
            const double v1 = d1.at(j, i);
            const double v2 = d2 ? d2->at(j, i) : 0.0;
            all.push_back({d2 ? v1 - v2 : v1, d1.games()[i].name, d1.games()[j].name, v1, v2});
        }
    std::sort(all.begin(), all.end(), [](const OraclePair& x, const OraclePair& y) {
        if (x.key != y.key) return x.key > y.key;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return all;
}

} // namespace

TEST_CASE("box_stats hand examples") {
    auto s = box_stats(matrix_from({0.0}));
    CHECK(s.min == 0.0);
    CHECK(s.max == 0.0);
    s = box_stats(std::vector<double>{0.0, 1.0}, Measure::Cosine);
    CHECK(s.min == 0.0);
    CHECK(s.median == 0.5);
    CHECK(s.max == 1.0);
    CHECK(s.measure == Measure::Cosine);
    s = box_stats(std::vector<double>{5, 3, 1, 4, 2}, Measure::Euclidean);
    CHECK(s.q1 == 2.0);
    CHECK(s.median == 3.0);
    CHECK(s.q3 == 4.0);
}

TEST_CASE("box_stats is order-invariant and ordered") {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 50; ++t) {
        auto dm = random_dm(gen, 2 + t % 14, Measure::Cosine, t % 2);
        std::vector<double> shuffled(dm.data().begin(), dm.data().end());
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        const auto a = box_stats(dm);
        const auto b = box_stats(shuffled, Measure::Cosine);
        CHECK(a.min == b.min);
        CHECK(a.q1 == b.q1);
        CHECK(a.median == b.median);
        CHECK(a.q3 == b.q3);
        CHECK(a.max == b.max);
        CHECK(a.min <= a.q1);
        CHECK(a.q1 <= a.median);
        CHECK(a.median <= a.q3);
        CHECK(a.q3 <= a.max);
    }
}

TEST_CASE("trend_curve hand examples") {
    std::vector<double> ten(10);
    std::iota(ten.begin(), ten.end(), 0.0);
    const auto c = trend_curve(ten, Measure::Euclidean, 3);
    REQUIRE(c.points.size() == 3);
    CHECK(c.points[0].percentile == 0.0);
    CHECK(c.points[1].percentile == 50.0);
    CHECK(c.points[2].percentile == 100.0);
    CHECK(c.points[0].value == 0.0);
    CHECK(c.points[1].value == 4.5);
    CHECK(c.points[2].value == 9.0);

    const auto flat = trend_curve(std::vector<double>(7, 0.3), Measure::Cosine, 11);
    for (const auto& p : flat.points) CHECK(p.value == 0.3);
    CHECK_THROWS_AS(trend_curve(ten, Measure::Cosine, 1), std::invalid_argument);
}

TEST_CASE("trend_curve is non-decreasing with strictly increasing percentiles") {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 50; ++t) {
        const auto dm = random_dm(gen, 2 + t % 14, Measure::Euclidean, t % 3 == 0);
        const auto c = trend_curve(dm, 2 + t % 30);
        CHECK(c.points.front().value == *std::min_element(dm.data().begin(), dm.data().end()));
        CHECK(c.points.back().value == *std::max_element(dm.data().begin(), dm.data().end()));
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            CHECK(c.points[k].percentile > c.points[k - 1].percentile);
            CHECK(c.points[k].value >= c.points[k - 1].value);
        }
    }
}

TEST_CASE("pearson basics") {
    const auto dm = matrix_from({0.1, 0.4, 0.2, 0.9, 0.5, 0.3});
    CHECK(pearson(dm, dm) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> affine(dm.data().begin(), dm.data().end());
    for (double& v : affine) v = 3.0 * v + 0.25;
    CHECK(pearson(dm.data(), affine) == doctest::Approx(1.0).epsilon(1e-14));
    for (double& v : affine) v = -v;
    CHECK(pearson(dm.data(), affine) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(pearson(dm, matrix_from(std::vector<double>(6, 0.2))), DataError);
    CHECK_THROWS_AS(pearson(dm, matrix_from({0.1, 0.2, 0.3})), std::invalid_argument);
}

TEST_CASE("pearson is symmetric and affine invariant") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> pos(0.1, 10.0), shift(-5.0, 5.0);
    for (int t = 0; t < 100; ++t) {
        const auto a = random_dm(gen, 3 + t % 13, Measure::Cosine);
        const auto b = random_dm(gen, a.size(), Measure::Euclidean);
        const double r = pearson(a.data(), b.data());
        CHECK(r == pearson(b.data(), a.data()));
        std::vector<double> scaled(b.data().begin(), b.data().end());
        const double s = pos(gen), o = shift(gen);
        for (double& v : scaled) v = s * v + o;
        CHECK(pearson(a.data(), scaled) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("report operations agree with brute-force oracles") {
    std::mt19937_64 gen(17);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + t % 14;
        const bool coarse = t % 4 == 0; // exercises tie-breaking
        const auto a = random_dm(gen, n, Measure::Cosine, coarse);
        auto b = random_dm(gen, n, Measure::Euclidean, coarse);
        b = DistanceMatrix(Measure::Euclidean, a.games(), {b.data().begin(), b.data().end()});

        const std::vector<double> av(a.data().begin(), a.data().end());
        const auto box = box_stats(a);
        CHECK(box.q1 == doctest::Approx(quantile_oracle(av, 0.25)).epsilon(1e-12));
        CHECK(box.median == doctest::Approx(quantile_oracle(av, 0.5)).epsilon(1e-12));
        CHECK(box.q3 == doctest::Approx(quantile_oracle(av, 0.75)).epsilon(1e-12));

        const auto curve = trend_curve(a, 11);
        for (const auto& p : curve.points)
            CHECK(p.value == doctest::Approx(quantile_oracle(av, p.percentile / 100.0)).epsilon(1e-12));

        const std::vector<double> bv(b.data().begin(), b.data().end());
        if (!coarse && av.size() > 2) CHECK(std::abs(pearson(a, b) - pearson_oracle(av, bv)) < 1e-12);

        const std::size_t k = 1 + t % 7;
        const auto top = top_pairs(a, k);
        const auto top_oracle = ranking_oracle(a, nullptr);
        REQUIRE(top.entries.size() == std::min(k, top_oracle.size()));
        for (std::size_t r = 0; r < top.entries.size(); ++r) {
            CHECK(top.entries[r].game_a == top_oracle[r].a);
            CHECK(top.entries[r].game_b == top_oracle[r].b);
            CHECK(top.entries[r].values[0] == top_oracle[r].v1);
        }

        const auto diff = extreme_difference_pairs(a, b, k);
        const auto diff_oracle = ranking_oracle(a, &b);
        REQUIRE(diff.entries.size() == top.entries.size());
        for (std::size_t r = 0; r < diff.entries.size(); ++r) {
            CHECK(diff.entries[r].game_a == diff_oracle[r].a);
            CHECK(diff.entries[r].game_b == diff_oracle[r].b);
            CHECK(diff.entries[r].values[0] == diff_oracle[r].v1);
            CHECK(diff.entries[r].values[1] == diff_oracle[r].v2);
            CHECK(std::abs(diff.entries[r].difference - diff_oracle[r].key) < 1e-12);
        }
    }
}

TEST_CASE("swapping the arguments of extreme_difference_pairs negates and reverses") {
    std::mt19937_64 gen(23);
    for (int t = 0; t < 30; ++t) {
        const auto a = random_dm(gen, 3 + t % 10, Measure::Cosine);
        const auto b0 = random_dm(gen, a.size(), Measure::Euclidean);
        const DistanceMatrix b(Measure::Euclidean, a.games(), {b0.data().begin(), b0.data().end()});
        const std::size_t all = a.data().size();
        const auto ab = extreme_difference_pairs(a, b, all);
        const auto ba = extreme_difference_pairs(b, a, all);
        REQUIRE(ab.entries.size() == all);
        for (std::size_t r = 0; r < all; ++r) {
            const auto& x = ab.entries[r];
            const auto& y = ba.entries[all - 1 - r];
            CHECK(x.game_a == y.game_a);
            CHECK(x.game_b == y.game_b);
            CHECK(x.difference == -y.difference);
        }
    }
}

TEST_CASE("extreme_difference_pairs of identical matrices is all zeros") {
    std::mt19937_64 gen(1);
    const auto a = random_dm(gen, 6, Measure::Cosine);
    for (const auto& e : extreme_difference_pairs(a, a, 15).entries) CHECK(e.difference == 0.0);
    const auto other = random_dm(gen, 7, Measure::Cosine);
    CHECK_THROWS_AS(extreme_difference_pairs(a, other, 3), std::invalid_argument);
    CHECK_THROWS_AS(extreme_difference_pairs(a, a, 0), std::invalid_argument);
}

TEST_CASE("top_pairs on a toy 3-game matrix and appearance counts") {
    const std::vector<GameRecord> games = {{1, "Chess"}, {2, "Go"}, {3, "Morra"}};
    const DistanceMatrix dm(Measure::Cosine, games, {0.1, 0.45, 0.4});
    const auto r = top_pairs(dm, 2);
    REQUIRE(r.entries.size() == 2);
    CHECK(r.entries[0].game_a == "Chess");
    CHECK(r.entries[0].game_b == "Morra");
    CHECK(r.entries[1].game_a == "Go");
    CHECK(r.entries[1].game_b == "Morra");
    CHECK(r.appearances.at("Morra") == 2);
    CHECK(r.appearances.at("Chess") == 1);
    CHECK(r.appearances.at("Go") == 1);
    CHECK(top_pairs(dm, 10).entries.size() == 3);
}

TEST_CASE("report writers") {
    const std::vector<GameRecord> games = {{1, "A"}, {2, "B \"2\""}, {3, "C"}};
    const DistanceMatrix cos(Measure::Cosine, games, {0.1, 0.2, 0.3});
    const DistanceMatrix euc(Measure::Euclidean, games, {0.4, 0.1, 0.35});

    std::ostringstream scatter;
    write_scatter_csv(cos, euc, scatter);
    CHECK(scatter.str() == "game_a,game_b,cosine,euclidean\n\"A\",\"B \"\"2\"\"\",0.100000,0.400000\n"
                           "\"A\",\"C\",0.200000,0.100000\n\"B \"\"2\"\"\",\"C\",0.300000,0.350000\n");

    std::ostringstream jl;
    write_report_jsonl(extreme_difference_pairs(euc, cos, 1), true, jl);
    const auto j = nlohmann::json::parse(jl.str());
    CHECK(j["game_a"] == "A");
    CHECK(j["game_b"] == "B \"2\"");
    CHECK(j["values"].size() == 2);
    CHECK(j["difference"].get<double>() == doctest::Approx(0.3));

    std::ostringstream top;
    write_report_jsonl(top_pairs(cos, 1), false, top);
    CHECK(nlohmann::json::parse(top.str())["difference"].is_null());

    std::ostringstream box;
    write_box_csv({box_stats(std::vector<double>{0.0, 1.0}, Measure::Cosine)}, box);
    CHECK(box.str() == "measure,min,q1,median,q3,max\ncosine,0,0.25,0.5,0.75,1\n");

    std::ostringstream trend;
    write_trend_csv({trend_curve(std::vector<double>{0.0, 1.0}, Measure::Euclidean, 2)}, trend);
    CHECK(trend.str() == "measure,percentile,value\neuclidean,0,0\neuclidean,100,1\n");
}
