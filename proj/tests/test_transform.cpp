#include "concept_dist/error.hpp"
#include "concept_dist/transform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace concept_dist;

namespace {

RawDataset column_dataset(const std::vector<std::vector<double>>& columns,
                          const std::vector<ValueKind>& kinds = {}) {
    RawDataset d;
    const std::size_t n = columns.front().size();
    for (std::size_t i = 0; i < n; ++i) d.games.push_back({static_cast<GameId>(i + 1), "g" + std::to_string(i)});
    for (std::size_t j = 0; j < columns.size(); ++j)
        d.concepts.push_back({static_cast<ConceptId>(j + 1), "c" + std::to_string(j), kAllCategories[j % 6],
                              kinds.empty() ? ValueKind::Continuous : kinds[j], ComputationKind::Compilation});
    d.values = Matrix(n, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) d.values(i, j) = columns[j][i];
    return d;
}

// Concept table with the category sizes of the full Ludii export.
ConceptMatrix table1_matrix() {
    const std::vector<std::pair<Category, int>> sizes = {{Category::Properties, 21}, {Category::Equipment, 74},
                                                         {Category::Rules, 302},     {Category::Math, 33},
                                                         {Category::Visual, 42},     {Category::Implementation, 27}};
    ConceptMatrix m;
    m.games = {{1, "a"}, {2, "b"}};
    ConceptId id = 1;
    for (const auto& [cat, count] : sizes)
        for (int k = 0; k < count; ++k, ++id)
            m.concepts.push_back({id, "concept " + std::to_string(id), cat, ValueKind::Binary,
                                  ComputationKind::Compilation});
    m.values = Matrix(2, m.concepts.size(), 1.0);
    m.stage = Stage::Normalized;
    return m;
}

} // namespace

TEST_CASE("bisym_log exact values") {
    CHECK(bisym_log(0.0) == 0.0);
    CHECK(bisym_log(1.0) == 1.0);
    CHECK(bisym_log(-1.0) == -1.0);
    CHECK(bisym_log(3.0) == 2.0);
    CHECK(bisym_log(7.0) == 3.0);
    CHECK(bisym_log(-3.0) == -2.0);
    CHECK_THROWS_AS(bisym_log(std::numeric_limits<double>::infinity()), DataError);
    CHECK_THROWS_AS(bisym_log(std::nan("")), DataError);
}

TEST_CASE("bisym_log is odd and strictly increasing") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-20, 60);
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) xs.push_back(std::ldexp(mant(gen), expo(gen)));
    for (double x : xs) CHECK(bisym_log(-x) == -bisym_log(x));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::size_t violations = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) violations += !(bisym_log(xs[i - 1]) < bisym_log(xs[i]));
    CHECK(violations == 0);
}

TEST_CASE("normalize: log transform then per-column min-max") {
    const auto d = column_dataset({{0, 2, 6}, {0, 1, 1}, {5, 5, 5}, {-7, 0, 1}},
                                  {ValueKind::Continuous, ValueKind::Binary, ValueKind::Continuous,
                                   ValueKind::Continuous});
    const auto [m, params] = normalize(d);
    CHECK(m.stage == Stage::Normalized);
    // [0, 2, 6] -> [0, log2 3, log2 7] -> [0, log2 3 / log2 7, 1]
    CHECK(m.values(0, 0) == 0.0);
    CHECK(m.values(1, 0) == doctest::Approx(0.5645750340535796).epsilon(1e-15));
    CHECK(m.values(2, 0) == 1.0);
    // binary column untouched
    CHECK(m.values(0, 1) == 0.0);
    CHECK(m.values(1, 1) == 1.0);
    // constant column -> zeros
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.values(i, 2) == 0.0);
    // [-7, 0, 1] -> [-3, 0, 1] -> [0, 0.75, 1]
    CHECK(m.values(0, 3) == 0.0);
    CHECK(m.values(1, 3) == 0.75);
    CHECK(m.values(2, 3) == 1.0);

    REQUIRE(params.columns.size() == 4);
    CHECK(params.columns[0].min == 0.0);
    CHECK(params.columns[0].max == std::log2(7.0));
    CHECK(params.columns[3].min == -3.0);
}

TEST_CASE("normalize properties on random datasets") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-5, 30);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 9;
        std::vector<std::vector<double>> cols;
        std::vector<ValueKind> kinds;
        for (int j = 0; j < 6; ++j) {
            std::vector<double> col(n);
            const bool binary = j % 3 == 0;
            for (double& v : col) v = binary ? double(coin(gen)) : std::ldexp(mant(gen), expo(gen));
            cols.push_back(col);
            kinds.push_back(binary ? ValueKind::Binary : ValueKind::Continuous);
        }
        const auto d = column_dataset(cols, kinds);
        const auto m = normalize(d).matrix;
        for (std::size_t j = 0; j < 6; ++j) {
            const auto [lo, hi] = std::minmax_element(cols[j].begin(), cols[j].end());
            double seen_min = 2.0, seen_max = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = m.values(i, j);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                seen_min = std::min(seen_min, v);
                seen_max = std::max(seen_max, v);
                if (kinds[j] == ValueKind::Binary && *lo != *hi) CHECK(v == cols[j][i]);
                // rank preservation
                for (std::size_t k = 0; k < n; ++k)
                    if (cols[j][i] < cols[j][k]) CHECK(m.values(i, j) <= m.values(k, j));
            }
            if (*lo != *hi) {
                CHECK(seen_min == 0.0);
                CHECK(seen_max == 1.0);
            }
        }
    }
}

TEST_CASE("project maps fitted games onto their normalized rows and clamps the rest") {
    const auto d = column_dataset({{0, 2, 6}, {-7, 0, 1}});
    const auto [m, params] = normalize(d);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto p = project(params, d.values.row(i));
        CHECK(p[0] == m.values(i, 0));
        CHECK(p[1] == m.values(i, 1));
    }
    const std::vector<double> outside = {1000.0, -1000.0};
    const auto p = project(params, outside);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
    CHECK_THROWS_AS(project(params, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("normalization params persist exactly") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    NormalizationParams params;
    for (int j = 0; j < 50; ++j) {
        double a = u(gen), b = u(gen);
        params.columns.push_back({j, std::min(a, b), std::max(a, b)});
    }
    test_util::TempDir dir;
    write_params(params, dir / "params.csv");
    CHECK(read_params(dir / "params.csv") == params);
    CHECK(test_util::read_file(dir / "params.csv").starts_with("concept_id,min,max\n"));

    test_util::write_file(dir / "bad.csv", "concept_id,min,max\n1,3,2\n");
    CHECK_THROWS_AS(read_params(dir / "bad.csv"), DataError);
}

TEST_CASE("idf_weights") {
    // 4 games; concept 0 in all, concept 1 in half, concept 2 in none, concept 3 continuous
    RawDataset d = column_dataset({{1, 1, 1, 1}, {1, 0, 1, 0}, {0, 0, 0, 0}, {0.1, 5, 3, 2}, {1, 0, 0, 0}},
                                  {ValueKind::Binary, ValueKind::Binary, ValueKind::Binary, ValueKind::Continuous,
                                   ValueKind::Binary});
    const auto m = normalize(d).matrix;
    const auto w = idf_weights(m);
    CHECK(w.scheme == WeightScheme::IDF);
    REQUIRE(w.weights.size() == 5);
    CHECK(w.weights[0] == 0.0);
    CHECK(w.weights[1] == 1.0);
    CHECK(w.weights[2] == 0.0);
    CHECK(w.weights[3] == 1.0);
    CHECK(w.weights[4] == 2.0);

    auto raw_stage = m;
    raw_stage.stage = Stage::Raw;
    CHECK_THROWS_AS(idf_weights(raw_stage), std::invalid_argument);
}

TEST_CASE("category_equal_weights") {
    const auto m = table1_matrix();
    const auto w = category_equal_weights(m);
    std::map<Category, double> sums;
    for (std::size_t j = 0; j < m.num_concepts(); ++j) {
        sums[m.concepts[j].category] += w.weights[j];
        if (m.concepts[j].category == Category::Rules) CHECK(w.weights[j] == 1.0 / 302.0);
    }
    CHECK(sums.size() == 6);
    for (const auto& [cat, s] : sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

    ConceptMatrix single = m;
    single = exclude_categories(m, {Category::Equipment, Category::Rules, Category::Math, Category::Visual,
                                    Category::Implementation});
    single.concepts.resize(1);
    single.values = Matrix(2, 1, 1.0);
    CHECK(category_equal_weights(single).weights == std::vector<double>{1.0});
}

TEST_CASE("exclude_categories") {
    const auto m = table1_matrix();
    CHECK(m.num_concepts() == 499);
    const auto no_visual = exclude_categories(m, {Category::Visual});
    CHECK(no_visual.num_concepts() == 457);
    for (const auto& c : no_visual.concepts) CHECK(c.category != Category::Visual);
    CHECK(std::is_sorted(no_visual.concepts.begin(), no_visual.concepts.end(),
                         [](const ConceptMeta& a, const ConceptMeta& b) { return a.id < b.id; }));

    const auto same = exclude_categories(m, {});
    CHECK(same.values == m.values);
    CHECK(same.concepts == m.concepts);

    const std::set<Category> all(kAllCategories.begin(), kAllCategories.end());
    CHECK_THROWS_AS(exclude_categories(m, all), std::invalid_argument);
}

TEST_CASE("apply_weights") {
    ConceptMatrix m;
    m.games = {{1, "a"}, {2, "b"}};
    m.concepts = {{1, "p1", Category::Properties, ValueKind::Continuous, ComputationKind::Compilation},
                  {2, "r1", Category::Rules, ValueKind::Continuous, ComputationKind::Compilation},
                  {3, "r2", Category::Rules, ValueKind::Continuous, ComputationKind::Compilation}};
    m.values = Matrix(2, 3);
    m.values(0, 0) = 0.5, m.values(0, 1) = 1.0, m.values(0, 2) = 0.25;
    m.values(1, 0) = 1.0, m.values(1, 1) = 0.0, m.values(1, 2) = 0.75;
    m.stage = Stage::Normalized;

    const auto ones = apply_weights(m, custom_weights({1, 1, 1}));
    CHECK(ones.values == m.values);
    CHECK(ones.stage == Stage::Weighted);

    const auto zeroed = apply_weights(m, custom_weights({1, 0, 1}));
    CHECK(zeroed.values(0, 1) == 0.0);
    CHECK(zeroed.values(1, 1) == 0.0);

    // |Properties| = 1, |Rules| = 2: weights [1, 1/2, 1/2]
    const auto cat = apply_weights(m, category_equal_weights(m));
    CHECK(cat.values(0, 0) == 0.5);
    CHECK(cat.values(0, 1) == 0.5);
    CHECK(cat.values(0, 2) == 0.125);
    CHECK(cat.values(1, 0) == 1.0);
    CHECK(cat.values(1, 1) == 0.0);
    CHECK(cat.values(1, 2) == 0.375);

    CHECK_THROWS_AS(apply_weights(m, custom_weights({1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(custom_weights({1, -1, 1}), std::invalid_argument);
}

TEST_CASE("weighting commutes with category exclusion") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = test_util::random_matrix(gen, 6, 13);
        std::set<Category> excluded;
        for (auto c : kAllCategories)
            if (gen() % 3 == 0) excluded.insert(c);
        if (excluded.size() == 6) excluded.erase(Category::Rules);

        for (const auto& w : {idf_weights(m), category_equal_weights(m)}) {
            const auto a = exclude_categories(apply_weights(m, w), excluded);
            const auto b = apply_weights(exclude_categories(m, excluded), exclude_categories(w, m, excluded));
            CHECK(a.values == b.values);
            CHECK(a.concepts == b.concepts);
        }
    }
}

TEST_CASE("as_normalized rejects out-of-range cells") {
    auto d = column_dataset({{0, 0.5, 1}});
    CHECK(as_normalized(d).stage == Stage::Normalized);
    d.values(1, 0) = 1.5;
    CHECK_THROWS_AS(as_normalized(d), DataError);
}
