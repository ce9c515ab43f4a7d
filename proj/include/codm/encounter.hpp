#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codm/knowledge_base.hpp"
#include "codm/util.hpp"

namespace codm {

/// A single-term quantity expression: either a constant (`12`) or dice
/// (`NdM`, `NdM+K`, `NdM-K`). The minimum value is never negative.
class DiceExpr {
public:
    static DiceExpr constant(int value);
    static DiceExpr dice(int count, int sides, int modifier = 0);

    bool is_constant() const noexcept { return count_ == 0; }
    int count() const noexcept { return count_; }
    int sides() const noexcept { return sides_; }
    int modifier() const noexcept { return modifier_; }  // the value, for constants

    int min_value() const noexcept;
    int max_value() const noexcept;

    bool operator==(const DiceExpr&) const = default;

private:
    DiceExpr(int count, int sides, int modifier) : count_(count), sides_(sides), modifier_(modifier) {}

    int count_ = 0;
    int sides_ = 0;
    int modifier_ = 0;
};

inline constexpr int kMaxDiceCount = 1000;
inline constexpr int kMaxDiceSides = 1000;
inline constexpr int kMaxDiceConstant = 100000;

/// Throws ParseError (with byte offset into `text`) on malformed input or on a
/// negative minimum value.
DiceExpr parse_dice(std::string_view text);

/// Canonical form: "12", "2d6", "2d6+3", "3d4-1".
std::string render_dice(const DiceExpr& e);

/// Result is always in [min_value(), max_value()].
int roll_dice(const DiceExpr& e, Rng& rng);

struct MonsterQuantity {
    std::string monster_id;
    DiceExpr quantity;

    bool operator==(const MonsterQuantity&) const = default;
};

struct EncounterTableEntry {
    int weight = 1;
    std::vector<MonsterQuantity> monsters;
    std::optional<std::string> flavor;

    bool operator==(const EncounterTableEntry&) const = default;
};

using EncounterTable = std::vector<EncounterTableEntry>;

/// Parses the table file format and checks every monster id against `kb`.
/// Quantities must be able to produce at least one creature (min >= 1).
EncounterTable parse_encounter_table(const nlohmann::json& doc, const KnowledgeBase& kb,
                                     const std::string& origin);
EncounterTable load_encounter_table(const std::filesystem::path& path, const KnowledgeBase& kb);

/// Throws EmptyTableError, ValidationError (weight < 1, empty entry) or
/// UnresolvedMonsterError.
void validate_encounter_table(const EncounterTable& table, const KnowledgeBase& kb);

/// Index of the chosen entry; entry i is chosen with probability w_i / sum(w).
std::size_t select_entry(std::span<const EncounterTableEntry> table, Rng& rng);

struct RolledGroup {
    std::string monster_id;
    int quantity = 1;

    bool operator==(const RolledGroup&) const = default;
};

struct Encounter {
    std::string id;
    std::string setting_id;
    std::vector<RolledGroup> rolled;
    std::string created_at;
    std::string rendered;  // "12 x Blink Dog, 2 x Wolf"
    std::optional<std::string> flavor;

    bool operator==(const Encounter&) const = default;
};

std::string render_encounter(std::span<const RolledGroup> rolled, const KnowledgeBase& kb);

/// Picks a weighted entry and rolls each quantity independently. The result
/// has no id or timestamp; the session layer stamps and persists it.
Encounter roll_encounter(const EncounterTable& table, const Setting& setting, const KnowledgeBase& kb,
                         Rng& rng);

nlohmann::json to_json(const Encounter& e);
Encounter encounter_from_json(const nlohmann::json& doc);

}  // namespace codm
