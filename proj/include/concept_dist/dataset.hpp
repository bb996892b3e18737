#pragma once

#include "concept_dist/matrix.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace concept_dist {

using GameId = std::int64_t;
using ConceptId = std::int64_t;

enum class Category { Properties, Equipment, Rules, Math, Visual, Implementation };
enum class ValueKind { Binary, Discrete, Continuous };
enum class ComputationKind { Compilation, Playout };

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Properties, Category::Equipment, Category::Rules,
    Category::Math,       Category::Visual,    Category::Implementation,
};

std::string_view to_string(Category c);
std::string_view to_string(ValueKind k);
std::string_view to_string(ComputationKind k);

// Exact, case-sensitive names as they appear in concepts.csv.
std::optional<Category> parse_category(std::string_view s);
std::optional<ValueKind> parse_value_kind(std::string_view s);
std::optional<ComputationKind> parse_computation_kind(std::string_view s);

struct GameRecord {
    GameId id = 0;
    std::string name;

    friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

struct ConceptMeta {
    ConceptId id = 0;
    std::string name;
    Category category = Category::Properties;
    ValueKind value_kind = ValueKind::Continuous;
    ComputationKind computation_kind = ComputationKind::Compilation;

    friend bool operator==(const ConceptMeta&, const ConceptMeta&) = default;
};

/// Games, concept metadata and the raw games x concepts value matrix.
/// Cell (i, j) is the value of concepts[j] for games[i].
struct RawDataset {
    std::vector<GameRecord> games;
    std::vector<ConceptMeta> concepts;
    Matrix values;

    std::size_t num_games() const noexcept { return games.size(); }
    std::size_t num_concepts() const noexcept { return concepts.size(); }

    std::optional<std::size_t> game_index(GameId id) const;
    std::optional<std::size_t> game_index(std::string_view name) const;
    std::optional<std::size_t> concept_index(std::string_view name) const;
};

struct Issue {
    std::string location;
    std::string message;
};

struct ValidationReport {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;
    std::map<Category, std::size_t> per_category;
    std::map<ValueKind, std::size_t> per_value_kind;

    bool ok() const noexcept { return errors.empty(); }
};

std::vector<GameRecord> load_games(const std::filesystem::path& path);
std::vector<ConceptMeta> load_concepts(const std::filesystem::path& path);

/// Long-format ingestion: games.csv, concepts.csv and values.csv with one row
/// per (game, concept) pair. Throws DataError naming file and line on any
/// structural problem; the result always has a fully populated matrix.
RawDataset load_dataset(const std::filesystem::path& games_path,
                        const std::filesystem::path& concepts_path,
                        const std::filesystem::path& values_path);

/// Wide-format ingestion: header `name,<concept>,...`, one row per game.
/// An optional leading `game_id` column supplies ids; without it games are
/// numbered 1..n in row order. Concept columns may appear in any order; the
/// matrix follows the order of the metadata file.
RawDataset load_wide_matrix(const std::filesystem::path& path,
                            const std::filesystem::path& meta_path);

/// Checks every dataset invariant and collects the violations. Never throws.
ValidationReport validate_dataset(const RawDataset& d);

void write_games(const std::vector<GameRecord>& games, const std::filesystem::path& path);
void write_concepts(const std::vector<ConceptMeta>& concepts, const std::filesystem::path& path);

/// Writes the long-format trio. Values use 17 significant digits.
void write_dataset(const RawDataset& d,
                   const std::filesystem::path& games_path,
                   const std::filesystem::path& concepts_path,
                   const std::filesystem::path& values_path);

/// Writes `game_id,name,<concept>,...` so that load_wide_matrix reproduces ids.
void write_wide_matrix(const std::vector<GameRecord>& games,
                       const std::vector<ConceptMeta>& concepts,
                       const Matrix& values,
                       const std::filesystem::path& path);
void write_wide_matrix(const std::vector<GameRecord>& games,
                       const std::vector<ConceptMeta>& concepts,
                       const Matrix& values,
                       std::ostream& out);

} // namespace concept_dist
