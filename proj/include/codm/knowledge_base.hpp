#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace codm {

struct Language {
    std::string name;
    bool understands_only = false;

    bool operator==(const Language&) const = default;
};

struct Ability {
    std::string name;
    std::string text;

    bool operator==(const Ability&) const = default;
};

struct AbilityScores {
    int strength = 10;
    int dexterity = 10;
    int constitution = 10;
    int intelligence = 10;
    int wisdom = 10;
    int charisma = 10;

    bool operator==(const AbilityScores&) const = default;
};

struct MonsterStatBlock {
    std::string id;
    std::string name;
    int armor_class = 0;
    int hit_points = 1;
    std::map<std::string, int> speeds;  // movement mode -> feet per round
    AbilityScores ability_scores;
    std::vector<std::string> skills;
    std::vector<Language> languages;
    std::vector<Ability> abilities;
    std::string lore;  // may be empty
    std::string source;

    bool operator==(const MonsterStatBlock&) const = default;
};

struct Setting {
    std::string id;
    std::string name;
    std::string description;
    std::vector<std::string> tags;

    bool operator==(const Setting&) const = default;
};

/// Id-indexed monsters and settings. Immutable once constructed; share it by
/// const reference or shared_ptr<const KnowledgeBase> across request handlers.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Throws DuplicateIdError if two monsters (or two settings) share an id.
    KnowledgeBase(std::vector<MonsterStatBlock> monsters, std::vector<Setting> settings);

    const std::map<std::string, MonsterStatBlock>& monsters() const noexcept { return monsters_; }
    const std::map<std::string, Setting>& settings() const noexcept { return settings_; }

    const MonsterStatBlock* find_monster(const std::string& id) const;
    const Setting* find_setting(const std::string& id) const;

    /// Throws UnresolvedMonsterError.
    const MonsterStatBlock& monster(const std::string& id) const;
    /// Throws UnknownSettingError.
    const Setting& setting(const std::string& id) const;

    bool operator==(const KnowledgeBase&) const = default;

private:
    std::map<std::string, MonsterStatBlock> monsters_;
    std::map<std::string, Setting> settings_;
};

/// Validates one monster document. `origin` names the file in error messages.
MonsterStatBlock parse_monster(const nlohmann::json& doc, const std::string& origin);
Setting parse_setting(const nlohmann::json& doc, const std::string& origin);

/// Reads every *.json file (sorted by name) in both directories.
/// Throws SchemaError on the first malformed file and DuplicateIdError on id clashes.
KnowledgeBase load_knowledge_base(const std::filesystem::path& monster_dir,
                                  const std::filesystem::path& setting_dir);

/// Whitespace-delimited token count of the lore plus every ability's prose.
std::size_t description_word_count(const MonsterStatBlock& monster);

struct CorpusStats {
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Throws EmptyCorpusError when the knowledge base has no monsters.
CorpusStats corpus_stats(const KnowledgeBase& kb);

}  // namespace codm
