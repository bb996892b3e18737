#pragma once

#include "concept_dist/distance.hpp"

#include <iosfwd>

namespace concept_dist {

struct TsneParams {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    std::uint64_t seed = 42;
    Measure input_metric = Measure::Euclidean;
    unsigned threads = 1;
};

/// Exaggeration and the low-momentum phase both last this many iterations.
inline constexpr std::size_t kExaggerationIterations = 250;
inline constexpr std::size_t kKlInterval = 50;

struct KlSample {
    std::size_t iteration = 0; // number of completed gradient steps
    double kl = 0.0;
};

struct Embedding2D {
    std::vector<GameRecord> games;
    Matrix coords; // n x 2
    std::vector<KlSample> kl_trace;
    /// Index into kl_trace of the sample taken when exaggeration ends, if
    /// the run lasted that long.
    std::optional<std::size_t> post_exaggeration_sample;
    TsneParams params;
};

/// Row-conditional Gaussian affinities from a square matrix of squared
/// dissimilarities. Each row's bandwidth is bisected (at most 50 steps) until
/// its entropy matches log(perplexity) within 1e-5. Rows sum to 1; the
/// diagonal is 0.
Matrix conditional_affinities(const Matrix& squared_dissimilarity, double perplexity);

/// (P + P^T) / (2n); the result sums to 1.
Matrix joint_affinities(const Matrix& conditional);

/// Exact t-SNE to two dimensions. Initial positions are N(0, 1e-4^2) draws
/// keyed by (seed, game id) and all reductions run in ascending game-id
/// order, so the result does not depend on row order or thread count.
Embedding2D tsne_embed(const ConceptMatrix& m, const TsneParams& p);

struct ClusterLabels {
    std::vector<std::size_t> labels;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    /// Within-cluster sum of squares after each Lloyd iteration.
    std::vector<double> objective_trace;
};

/// Lloyd's algorithm from a k-means++ start; stops when assignments are
/// stable or after 300 iterations. Labels are renumbered by descending
/// cluster size and every label in [0, k) is used.
ClusterLabels kmeans(const Matrix& points, std::size_t k, std::uint64_t seed);
ClusterLabels kmeans(const Embedding2D& e, std::size_t k, std::uint64_t seed);

struct ConceptPrevalence {
    std::size_t concept_index = 0;
    std::string name;
    double within = 0.0;  // share of cluster members holding 1
    double outside = 0.0; // share of non-members holding 1
    double global = 0.0;
    double lift = 0.0; // within / global, 0 when global is 0
};

struct ClusterSummary {
    std::size_t label = 0;
    std::size_t size = 0;
    std::vector<std::string> members;
    /// Binary concepts, by lift descending then name.
    std::vector<ConceptPrevalence> concepts;
    /// Concepts held by every member and by no other game.
    std::vector<std::string> perfect_separators;
};

/// Per-cluster binary-concept prevalence. `d` supplies raw binary values and
/// must list the same games in the same order as `m` and the labels.
std::vector<ClusterSummary> cluster_report(const ClusterLabels& labels, const RawDataset& d, const ConceptMatrix& m);

/// `game_id,name,x,y[,cluster]`.
void write_embedding_csv(const Embedding2D& e, const ClusterLabels* labels, std::ostream& out);

/// 800x800 scatter, points coloured by cluster from a fixed 8-colour palette.
void write_embedding_svg(const Embedding2D& e, const ClusterLabels* labels, std::ostream& out);

} // namespace concept_dist
