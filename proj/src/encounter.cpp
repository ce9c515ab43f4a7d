#include "codm/encounter.hpp"

#include <fstream>
#include <numeric>

#include "codm/errors.hpp"

namespace codm {

using nlohmann::json;

void validate_encounter_table(const EncounterTable& table, const KnowledgeBase& kb) {
    if (table.empty()) {
        throw EmptyTableError();
    }
    for (const auto& entry : table) {
        if (entry.weight < 1) {
            throw ValidationError("encounter table weights must be >= 1");
        }
        if (entry.monsters.empty()) {
            throw ValidationError("encounter table entry lists no monsters");
        }
        for (const auto& mq : entry.monsters) {
            kb.monster(mq.monster_id);
            if (mq.quantity.min_value() < 1) {
                throw ValidationError("quantity '" + render_dice(mq.quantity) + "' for '" + mq.monster_id +
                                      "' can roll zero creatures");
            }
        }
    }
}

EncounterTable parse_encounter_table(const json& doc, const KnowledgeBase& kb, const std::string& origin) {
    if (!doc.is_array()) {
        throw SchemaError(origin, "<root>", "expected a list of entries");
    }
    EncounterTable table;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& item = doc[i];
        const std::string where = "[" + std::to_string(i) + "]";
        if (!item.is_object()) {
            throw SchemaError(origin, where, "expected an object");
        }
        EncounterTableEntry entry;
        const auto weight = item.find("weight");
        if (weight == item.end() || !weight->is_number_integer()) {
            throw SchemaError(origin, where + ".weight", "expected a positive integer");
        }
        const auto w = weight->get<long long>();
        if (w < 1 || w > 1000000) {
            throw SchemaError(origin, where + ".weight", "expected a positive integer");
        }
        entry.weight = static_cast<int>(w);

        const auto monsters = item.find("monsters");
        if (monsters == item.end() || !monsters->is_array() || monsters->empty()) {
            throw SchemaError(origin, where + ".monsters", "expected a non-empty list");
        }
        for (const auto& m : *monsters) {
            if (!m.is_object() || !m.contains("id") || !m["id"].is_string()) {
                throw SchemaError(origin, where + ".monsters.id", "expected a string");
            }
            if (!m.contains("quantity") || !m["quantity"].is_string()) {
                throw SchemaError(origin, where + ".monsters.quantity", "expected a dice string");
            }
            DiceExpr q = DiceExpr::constant(1);
            try {
                q = parse_dice(m["quantity"].get<std::string>());
            } catch (const ParseError& e) {
                throw SchemaError(origin, where + ".monsters.quantity", e.what());
            }
            entry.monsters.push_back({m["id"].get<std::string>(), q});
        }
        if (const auto flavor = item.find("flavor"); flavor != item.end() && !flavor->is_null()) {
            if (!flavor->is_string()) {
                throw SchemaError(origin, where + ".flavor", "expected a string");
            }
            entry.flavor = flavor->get<std::string>();
        }
        table.push_back(std::move(entry));
    }
    validate_encounter_table(table, kb);
    return table;
}

EncounterTable load_encounter_table(const std::filesystem::path& path, const KnowledgeBase& kb) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError(path.string(), "<file>", "cannot be opened");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), "<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_encounter_table(doc, kb, path.string());
}

std::size_t select_entry(std::span<const EncounterTableEntry> table, Rng& rng) {
    if (table.empty()) {
        throw EmptyTableError();
    }
    std::int64_t total = 0;
    for (const auto& e : table) {
        if (e.weight < 1) {
            throw ValidationError("encounter table weights must be >= 1");
        }
        total += e.weight;
    }
    std::int64_t ticket = rng.uniform(1, total);
    for (std::size_t i = 0; i < table.size(); ++i) {
        ticket -= table[i].weight;
        if (ticket <= 0) {
            return i;
        }
    }
    return table.size() - 1;  // unreachable
}

std::string render_encounter(std::span<const RolledGroup> rolled, const KnowledgeBase& kb) {
    std::string out;
    for (const auto& group : rolled) {
        if (!out.empty()) {
            out += ", ";
        }
        out += std::to_string(group.quantity) + " x " + kb.monster(group.monster_id).name;
    }
    return out;
}

Encounter roll_encounter(const EncounterTable& table, const Setting& setting, const KnowledgeBase& kb,
                         Rng& rng) {
    const EncounterTableEntry& entry = table[select_entry(table, rng)];
    Encounter enc;
    enc.setting_id = setting.id;
    for (const auto& mq : entry.monsters) {
        kb.monster(mq.monster_id);
        const int n = roll_dice(mq.quantity, rng);
        if (n < 1) {
            throw ValidationError("quantity for '" + mq.monster_id + "' rolled zero creatures");
        }
        enc.rolled.push_back({mq.monster_id, n});
    }
    enc.rendered = render_encounter(enc.rolled, kb);
    enc.flavor = entry.flavor;
    return enc;
}

json to_json(const Encounter& e) {
    json rolled = json::array();
    for (const auto& g : e.rolled) {
        rolled.push_back({{"monster_id", g.monster_id}, {"quantity", g.quantity}});
    }
    json out = {{"id", e.id},
                {"setting_id", e.setting_id},
                {"rolled", rolled},
                {"created_at", e.created_at},
                {"rendered", e.rendered}};
    out["flavor"] = e.flavor ? json(*e.flavor) : json(nullptr);
    return out;
}

Encounter encounter_from_json(const json& doc) {
    Encounter e;
    e.id = doc.at("id").get<std::string>();
    e.setting_id = doc.at("setting_id").get<std::string>();
    for (const auto& g : doc.at("rolled")) {
        e.rolled.push_back({g.at("monster_id").get<std::string>(), g.at("quantity").get<int>()});
    }
    e.created_at = doc.at("created_at").get<std::string>();
    e.rendered = doc.at("rendered").get<std::string>();
    if (doc.contains("flavor") && doc["flavor"].is_string()) {
        e.flavor = doc["flavor"].get<std::string>();
    }
    return e;
}

}  // namespace codm
