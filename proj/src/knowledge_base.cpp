#include "codm/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "codm/errors.hpp"
#include "codm/util.hpp"

namespace codm {

namespace fs = std::filesystem;
using nlohmann::json;

KnowledgeBase::KnowledgeBase(std::vector<MonsterStatBlock> monsters, std::vector<Setting> settings) {
    for (auto& m : monsters) {
        const std::string id = m.id;
        if (!monsters_.emplace(id, std::move(m)).second) {
            throw DuplicateIdError(id);
        }
    }
    for (auto& s : settings) {
        const std::string id = s.id;
        if (!settings_.emplace(id, std::move(s)).second) {
            throw DuplicateIdError(id);
        }
    }
}

const MonsterStatBlock* KnowledgeBase::find_monster(const std::string& id) const {
    const auto it = monsters_.find(id);
    return it == monsters_.end() ? nullptr : &it->second;
}

const Setting* KnowledgeBase::find_setting(const std::string& id) const {
    const auto it = settings_.find(id);
    return it == settings_.end() ? nullptr : &it->second;
}

const MonsterStatBlock& KnowledgeBase::monster(const std::string& id) const {
    if (const auto* m = find_monster(id)) {
        return *m;
    }
    throw UnresolvedMonsterError(id);
}

const Setting& KnowledgeBase::setting(const std::string& id) const {
    if (const auto* s = find_setting(id)) {
        return *s;
    }
    throw UnknownSettingError(id);
}

namespace {

const json& require(const json& doc, const char* field, const std::string& origin) {
    if (!doc.is_object()) {
        throw SchemaError(origin, "<root>", "expected a JSON object");
    }
    const auto it = doc.find(field);
    if (it == doc.end()) {
        throw SchemaError(origin, field, "missing");
    }
    return *it;
}

std::string require_string(const json& doc, const char* field, const std::string& origin,
                           bool allow_empty = false) {
    const json& v = require(doc, field, origin);
    if (!v.is_string()) {
        throw SchemaError(origin, field, "expected a string");
    }
    auto s = v.get<std::string>();
    if (!allow_empty && s.empty()) {
        throw SchemaError(origin, field, "must not be empty");
    }
    return s;
}

int require_int(const json& v, const std::string& field, const std::string& origin) {
    if (!v.is_number_integer()) {
        throw SchemaError(origin, field, "expected an integer");
    }
    const auto n = v.get<long long>();
    if (n < -1000000 || n > 1000000) {
        throw SchemaError(origin, field, "out of range");
    }
    return static_cast<int>(n);
}

std::vector<std::string> require_string_list(const json& doc, const char* field,
                                             const std::string& origin) {
    const json& v = require(doc, field, origin);
    if (!v.is_array()) {
        throw SchemaError(origin, field, "expected a list of strings");
    }
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string() || item.get<std::string>().empty()) {
            throw SchemaError(origin, field, "expected a list of non-empty strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

int ability_score(const json& scores, const char* name, const std::string& origin) {
    const std::string field = std::string("ability_scores.") + name;
    const auto it = scores.find(name);
    if (it == scores.end()) {
        throw SchemaError(origin, field, "missing");
    }
    const int v = require_int(*it, field, origin);
    if (v < 1 || v > 30) {
        throw SchemaError(origin, field, "must be between 1 and 30");
    }
    return v;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError(path.string(), "<file>", "cannot be opened");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), "<file>", std::string("invalid JSON: ") + e.what());
    }
}

std::vector<fs::path> json_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw SchemaError(dir.string(), "<directory>", "is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

MonsterStatBlock parse_monster(const json& doc, const std::string& origin) {
    MonsterStatBlock m;
    m.id = require_string(doc, "id", origin);
    m.name = require_string(doc, "name", origin);

    m.armor_class = require_int(require(doc, "armor_class", origin), "armor_class", origin);
    if (m.armor_class < 0) {
        throw SchemaError(origin, "armor_class", "must be >= 0");
    }
    m.hit_points = require_int(require(doc, "hit_points", origin), "hit_points", origin);
    if (m.hit_points < 1) {
        throw SchemaError(origin, "hit_points", "must be >= 1");
    }

    const json& speeds = require(doc, "speeds", origin);
    if (!speeds.is_object()) {
        throw SchemaError(origin, "speeds", "expected an object of mode -> feet");
    }
    for (const auto& [mode, feet] : speeds.items()) {
        const int v = require_int(feet, "speeds." + mode, origin);
        if (v < 0) {
            throw SchemaError(origin, "speeds." + mode, "must be >= 0");
        }
        m.speeds.emplace(mode, v);
    }

    const json& scores = require(doc, "ability_scores", origin);
    if (!scores.is_object()) {
        throw SchemaError(origin, "ability_scores", "expected an object");
    }
    m.ability_scores = AbilityScores{
        ability_score(scores, "strength", origin),     ability_score(scores, "dexterity", origin),
        ability_score(scores, "constitution", origin), ability_score(scores, "intelligence", origin),
        ability_score(scores, "wisdom", origin),       ability_score(scores, "charisma", origin),
    };
    if (scores.size() != 6) {
        throw SchemaError(origin, "ability_scores", "expected exactly the six ability names");
    }

    m.skills = require_string_list(doc, "skills", origin);

    const json& languages = require(doc, "languages", origin);
    if (!languages.is_array()) {
        throw SchemaError(origin, "languages", "expected a list");
    }
    for (const auto& lang : languages) {
        Language l;
        l.name = require_string(lang, "name", origin);
        const json& flag = require(lang, "understands_only", origin);
        if (!flag.is_boolean()) {
            throw SchemaError(origin, "languages.understands_only", "expected a boolean");
        }
        l.understands_only = flag.get<bool>();
        m.languages.push_back(std::move(l));
    }

    const json& abilities = require(doc, "abilities", origin);
    if (!abilities.is_array()) {
        throw SchemaError(origin, "abilities", "expected a list");
    }
    for (const auto& ability : abilities) {
        Ability a;
        a.name = require_string(ability, "name", origin);
        a.text = require_string(ability, "text", origin, true);
        m.abilities.push_back(std::move(a));
    }

    m.lore = require_string(doc, "lore", origin, true);
    m.source = require_string(doc, "source", origin, true);
    return m;
}

Setting parse_setting(const json& doc, const std::string& origin) {
    Setting s;
    s.id = require_string(doc, "id", origin);
    s.name = require_string(doc, "name", origin);
    s.description = require_string(doc, "description", origin);
    s.tags = require_string_list(doc, "tags", origin);
    return s;
}

KnowledgeBase load_knowledge_base(const fs::path& monster_dir, const fs::path& setting_dir) {
    std::vector<MonsterStatBlock> monsters;
    for (const auto& file : json_files(monster_dir)) {
        monsters.push_back(parse_monster(read_json_file(file), file.string()));
    }
    std::vector<Setting> settings;
    for (const auto& file : json_files(setting_dir)) {
        settings.push_back(parse_setting(read_json_file(file), file.string()));
    }
    return KnowledgeBase(std::move(monsters), std::move(settings));
}

std::size_t description_word_count(const MonsterStatBlock& monster) {
    std::size_t n = count_words(monster.lore);
    for (const auto& a : monster.abilities) {
        n += count_words(a.text);
    }
    return n;
}

CorpusStats corpus_stats(const KnowledgeBase& kb) {
    if (kb.monsters().empty()) {
        throw EmptyCorpusError();
    }
    CorpusStats stats;
    stats.min = std::numeric_limits<std::size_t>::max();
    std::size_t total = 0;
    for (const auto& [id, m] : kb.monsters()) {
        const std::size_t n = description_word_count(m);
        total += n;
        stats.min = std::min(stats.min, n);
        stats.max = std::max(stats.max, n);
    }
    stats.mean = static_cast<double>(total) / static_cast<double>(kb.monsters().size());
    return stats;
}

}  // namespace codm
