#include "concept_dist/embedding.hpp"

#include "concept_dist/csv.hpp"
#include "concept_dist/error.hpp"
#include "concept_dist/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace concept_dist {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisections = 50;
constexpr double kInitialStddev = 1e-4;
constexpr double kMinGain = 0.01;
constexpr std::size_t kMaxLloydIterations = 300;

double squared_norm2(const Matrix& y, std::size_t i, std::size_t j) {
    const double dx = y(i, 0) - y(j, 0);
    const double dy = y(i, 1) - y(j, 1);
    return dx * dx + dy * dy;
}

// Student-t kernel 1 / (1 + |yi - yj|^2) for all pairs, plus row sums.
double student_kernel(const Matrix& y, Matrix& num, std::vector<double>& row_sums, unsigned threads) {
    const std::size_t n = y.rows();
    detail::parallel_chunks(n, threads, [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    num(i, j) = 0.0;
                    continue;
                }
                num(i, j) = 1.0 / (1.0 + squared_norm2(y, i, j));
                s += num(i, j);
            }
            row_sums[i] = s;
        }
    });
    double z = 0.0;
    for (double s : row_sums) z += s;
    return z;
}

double kl_divergence(const Matrix& p, const Matrix& num, double z) {
    const double tiny = std::numeric_limits<double>::min();
    double kl = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double pij = p(i, j);
            if (i == j || pij <= 0.0) continue;
            kl += pij * std::log(pij / std::max(num(i, j) / z, tiny));
        }
    return kl;
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

} // namespace

Matrix conditional_affinities(const Matrix& sq, double perplexity) {
    const std::size_t n = sq.rows();
    if (sq.cols() != n) throw std::invalid_argument("conditional_affinities: dissimilarity matrix must be square");
    if (!(perplexity > 0.0)) throw std::invalid_argument("conditional_affinities: perplexity must be positive");
    const double target = std::log(perplexity);

    Matrix p(n, n);
    std::vector<double> shifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Entropy is unchanged by subtracting the row minimum, which keeps
        // exp() away from underflow on widely spread dissimilarities.
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) lo = std::min(lo, sq(i, j));
        for (std::size_t j = 0; j < n; ++j) shifted[j] = j == i ? 0.0 : sq(i, j) - lo;

        double beta = 1.0;
        double beta_lo = -std::numeric_limits<double>::infinity();
        double beta_hi = std::numeric_limits<double>::infinity();
        auto row = p.row(i);
        double sum = 0.0;
        for (int step = 0; step < kMaxBisections; ++step) {
            sum = 0.0;
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0.0;
                    continue;
                }
                row[j] = std::exp(-shifted[j] * beta);
                sum += row[j];
                weighted += shifted[j] * row[j];
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            const double diff = entropy - target;
            if (std::abs(diff) < kEntropyTolerance) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = std::isinf(beta_lo) ? beta / 2.0 : 0.5 * (beta + beta_lo);
            }
        }
        for (double& v : row) v /= sum;
    }
    return p;
}

Matrix joint_affinities(const Matrix& c) {
    const std::size_t n = c.rows();
    Matrix p(n, n);
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = (c(i, j) + c(j, i)) / denom;
    return p;
}

Embedding2D tsne_embed(const ConceptMatrix& m, const TsneParams& params) {
    const std::size_t n = m.num_games();
    if (n < 4) throw std::invalid_argument("tsne_embed: need at least 4 games");
    if (!(params.perplexity > 0.0) || !(params.perplexity < static_cast<double>(n - 1) / 3.0))
        throw std::invalid_argument("tsne_embed: perplexity must be in (0, (n - 1) / 3) = (0, " +
                                    csv::format_fixed(static_cast<double>(n - 1) / 3.0, 3) + ")");
    if (params.iterations == 0) throw std::invalid_argument("tsne_embed: iterations must be positive");
    if (!(params.learning_rate > 0.0)) throw std::invalid_argument("tsne_embed: learning rate must be positive");
    if (!(params.early_exaggeration >= 1.0)) throw std::invalid_argument("tsne_embed: early exaggeration must be >= 1");

    if (params.input_metric == Measure::Cosine || params.input_metric == Measure::JensenShannon)
        for (std::size_t i = 0; i < n; ++i)
            if (all_zero(m.row(i)))
                throw DataError("game `" + m.games[i].name + "` has an all-zero concept vector; " +
                                std::string(to_string(params.input_metric)) + " dissimilarity is undefined");

    // Work in ascending game-id order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.games[a].id < m.games[b].id; });

    Matrix sq(n, n);
    detail::parallel_chunks(n, params.threads, [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double d = distance(params.input_metric, m.row(order[i]), m.row(order[j]));
                sq(i, j) = d * d;
            }
    });
    const Matrix p = joint_affinities(conditional_affinities(sq, params.perplexity));

    Matrix y(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0, b = 0.0;
        rng::normal_pair(params.seed, static_cast<std::uint64_t>(m.games[order[i]].id), a, b);
        y(i, 0) = kInitialStddev * a;
        y(i, 1) = kInitialStddev * b;
    }

    Matrix velocity(n, 2);
    Matrix gains(n, 2, 1.0);
    Matrix grad(n, 2);
    Matrix num(n, n);
    std::vector<double> row_sums(n);

    Embedding2D out;
    out.params = params;

    for (std::size_t it = 0; it < params.iterations; ++it) {
        const bool early = it < kExaggerationIterations;
        const double exaggeration = early ? params.early_exaggeration : 1.0;
        const double momentum = early ? 0.5 : 0.8;

        const double z = student_kernel(y, num, row_sums, params.threads);
        detail::parallel_chunks(n, params.threads, [&](std::size_t first, std::size_t last) {
            for (std::size_t i = first; i < last; ++i) {
                double gx = 0.0, gy = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
                    gx += w * (y(i, 0) - y(j, 0));
                    gy += w * (y(i, 1) - y(j, 1));
                }
                grad(i, 0) = 4.0 * gx;
                grad(i, 1) = 4.0 * gy;
            }
        });

        for (double g : grad.data())
            if (!std::isfinite(g))
                throw DataError("t-SNE gradient became non-finite at iteration " + std::to_string(it + 1));

        for (std::size_t k = 0; k < n * 2; ++k) {
            const double g = grad.data()[k];
            double& v = velocity.data()[k];
            double& gain = gains.data()[k];
            gain = (g > 0.0) != (v > 0.0) ? gain + 0.2 : gain * 0.8;
            gain = std::max(gain, kMinGain);
            v = momentum * v - params.learning_rate * gain * g;
            y.data()[k] += v;
        }
        double cx = 0.0, cy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cx += y(i, 0);
            cy += y(i, 1);
        }
        cx /= static_cast<double>(n);
        cy /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y(i, 0) -= cx;
            y(i, 1) -= cy;
        }

        const std::size_t done = it + 1;
        if (done % kKlInterval == 0 || done == kExaggerationIterations || done == params.iterations) {
            const double zk = student_kernel(y, num, row_sums, params.threads);
            if (done == kExaggerationIterations) out.post_exaggeration_sample = out.kl_trace.size();
            out.kl_trace.push_back({done, kl_divergence(p, num, zk)});
        }
    }

    out.games.resize(n);
    out.coords = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        out.games[order[i]] = m.games[order[i]];
        out.coords(order[i], 0) = y(i, 0);
        out.coords(order[i], 1) = y(i, 1);
    }
    return out;
}

ClusterLabels kmeans(const Matrix& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();
    if (k == 0) throw std::invalid_argument("kmeans: k must be at least 1");
    if (k > n) throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " points");

    const auto sqdist = [&](std::size_t i, std::span<const double> c) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double t = points(i, d) - c[d];
            s += t * t;
        }
        return s;
    };

    // k-means++ seeding; draw number t uses counter t.
    Matrix centers(k, dim);
    std::vector<bool> chosen(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::uint64_t draw = 0;
    const auto pick_uniform_unchosen = [&] {
        std::size_t remaining = 0;
        for (std::size_t i = 0; i < n; ++i) remaining += !chosen[i];
        auto target = std::min(
            static_cast<std::size_t>(rng::uniform(seed, 0, draw++) * static_cast<double>(remaining)), remaining - 1);
        for (std::size_t i = 0; i < n; ++i)
            if (!chosen[i] && target-- == 0) return i;
        return n - 1;
    };
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pick = n;
        if (c > 0) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : nearest[i];
            if (total > 0.0) {
                const double u = rng::uniform(seed, 0, draw++) * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (chosen[i] || nearest[i] == 0.0) continue;
                    acc += nearest[i];
                    pick = i;
                    if (acc >= u) break;
                }
            }
        }
        if (pick == n) pick = pick_uniform_unchosen();
        chosen[pick] = true;
        for (std::size_t d = 0; d < dim; ++d) centers(c, d) = points(pick, d);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], sqdist(i, centers.row(c)));
    }

    ClusterLabels out;
    out.k = k;
    out.seed = seed;
    std::vector<std::size_t> assign(n, k);
    std::vector<std::size_t> sizes(k);

    for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sqdist(i, centers.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sqdist(i, centers.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            changed = changed || assign[i] != best;
            assign[i] = best;
        }

        // An empty cluster takes the point farthest from its own centre among
        // clusters that can spare one.
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t a : assign) ++sizes[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[assign[i]] < 2) continue;
                const double d = sqdist(i, centers.row(assign[i]));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --sizes[assign[far]];
            assign[far] = c;
            sizes[c] = 1;
            changed = true;
        }

        std::fill(centers.data().begin(), centers.data().end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) centers(assign[i], d) += points(i, d);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t d = 0; d < dim; ++d) centers(c, d) /= static_cast<double>(sizes[c]);

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) wcss += sqdist(i, centers.row(assign[i]));
        out.objective_trace.push_back(wcss);
        if (!changed) break;
    }

    // Relabel: larger clusters first, ties by first member.
    std::vector<std::size_t> first_member(k, n);
    for (std::size_t i = n; i-- > 0;) first_member[assign[i]] = i;
    std::vector<std::size_t> rank(k);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return first_member[a] < first_member[b];
    });
    std::vector<std::size_t> relabel(k);
    for (std::size_t r = 0; r < k; ++r) relabel[rank[r]] = r;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = relabel[assign[i]];
    return out;
}

ClusterLabels kmeans(const Embedding2D& e, std::size_t k, std::uint64_t seed) { return kmeans(e.coords, k, seed); }

std::vector<ClusterSummary> cluster_report(const ClusterLabels& labels, const RawDataset& d, const ConceptMatrix& m) {
    const std::size_t n = d.num_games();
    if (labels.labels.size() != n || m.num_games() != n)
        throw std::invalid_argument("cluster_report: labels, dataset and matrix cover different game counts");
    for (std::size_t i = 0; i < n; ++i)
        if (d.games[i].id != m.games[i].id)
            throw std::invalid_argument("cluster_report: dataset and matrix list games in different order");
    for (std::size_t l : labels.labels)
        if (l >= labels.k) throw std::invalid_argument("cluster_report: label outside [0, k)");

    std::vector<std::size_t> binary;
    for (std::size_t j = 0; j < d.num_concepts(); ++j)
        if (d.concepts[j].value_kind == ValueKind::Binary) binary.push_back(j);

    std::vector<std::size_t> global_count(d.num_concepts(), 0);
    for (std::size_t j : binary)
        for (std::size_t i = 0; i < n; ++i) global_count[j] += d.values(i, j) == 1.0;

    std::vector<ClusterSummary> out(labels.k);
    for (std::size_t c = 0; c < labels.k; ++c) out[c].label = c;
    for (std::size_t i = 0; i < n; ++i) {
        ++out[labels.labels[i]].size;
        out[labels.labels[i]].members.push_back(d.games[i].name);
    }

    for (auto& s : out) {
        std::vector<std::size_t> within_count(d.num_concepts(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (labels.labels[i] != s.label) continue;
            for (std::size_t j : binary) within_count[j] += d.values(i, j) == 1.0;
        }
        const std::size_t outside_n = n - s.size;
        for (std::size_t j : binary) {
            ConceptPrevalence cp;
            cp.concept_index = j;
            cp.name = d.concepts[j].name;
            cp.within = s.size ? static_cast<double>(within_count[j]) / static_cast<double>(s.size) : 0.0;
            cp.outside = outside_n ? static_cast<double>(global_count[j] - within_count[j]) /
                                         static_cast<double>(outside_n)
                                   : 0.0;
            cp.global = static_cast<double>(global_count[j]) / static_cast<double>(n);
            cp.lift = cp.global > 0.0 ? cp.within / cp.global : 0.0;
            if (s.size > 0 && outside_n > 0 && within_count[j] == s.size && global_count[j] == within_count[j])
                s.perfect_separators.push_back(cp.name);
            s.concepts.push_back(std::move(cp));
        }
        std::sort(s.concepts.begin(), s.concepts.end(), [](const ConceptPrevalence& a, const ConceptPrevalence& b) {
            if (a.lift != b.lift) return a.lift > b.lift;
            return a.name < b.name;
        });
        std::sort(s.perfect_separators.begin(), s.perfect_separators.end());
    }
    return out;
}

void write_embedding_csv(const Embedding2D& e, const ClusterLabels* labels, std::ostream& out) {
    out << "game_id,name,x,y" << (labels ? ",cluster" : "") << '\n';
    for (std::size_t i = 0; i < e.games.size(); ++i) {
        out << e.games[i].id << ',' << csv::escape(e.games[i].name) << ',' << csv::format_exact(e.coords(i, 0)) << ','
            << csv::format_exact(e.coords(i, 1));
        if (labels) out << ',' << labels->labels[i];
        out << '\n';
    }
}

void write_embedding_svg(const Embedding2D& e, const ClusterLabels* labels, std::ostream& out) {
    static constexpr std::array<std::string_view, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    constexpr double kSize = 800.0;
    constexpr double kMargin = 20.0;

    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < e.coords.rows(); ++i) {
        const double x = e.coords(i, 0), y = e.coords(i, 1);
        if (i == 0 || x < xmin) xmin = x;
        if (i == 0 || x > xmax) xmax = x;
        if (i == 0 || y < ymin) ymin = y;
        if (i == 0 || y > ymax) ymax = y;
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double scale = (kSize - 2.0 * kMargin) / span;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n"
        << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < e.coords.rows(); ++i) {
        const double px = kMargin + (e.coords(i, 0) - xmin) * scale;
        const double py = kSize - kMargin - (e.coords(i, 1) - ymin) * scale;
        const auto colour = kPalette[labels ? labels->labels[i] % kPalette.size() : 0];
        std::string title;
        for (char c : e.games[i].name) {
            switch (c) {
            case '<': title += "&lt;"; break;
            case '>': title += "&gt;"; break;
            case '&': title += "&amp;"; break;
            default: title += c;
            }
        }
        out << "<circle cx=\"" << csv::format_fixed(px, 2) << "\" cy=\"" << csv::format_fixed(py, 2)
            << "\" r=\"3\" fill=\"" << colour << "\"><title>" << title << "</title></circle>\n";
    }
    out << "</svg>\n";
}

} // namespace concept_dist
