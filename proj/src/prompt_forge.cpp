#include "codm/prompt_forge.hpp"

#include <algorithm>
#include <array>

#include "codm/errors.hpp"

namespace codm {

using nlohmann::json;

const std::string_view kDefaultPersona =
    "You are Calypso, an ancient and good-humored sphinx who has watched countless adventurers "
    "pass through the realms. You know a great deal about Dungeons & Dragons: its rules, its "
    "monsters, its worlds, and the craft of running a game. Stay in character, answer the players "
    "and Dungeon Masters who talk to you, and help them with ideas, names, stories, and rules "
    "questions.";

namespace {

constexpr std::string_view kSummarizationInstruction =
    "Summarize the following D&D setting and monsters for a Dungeon Master's notes without "
    "mentioning game stats.";

constexpr std::string_view kUnderstandingInstructions =
    "Your name is Calypso, and your job is to help the Dungeon Master with an encounter.\n"
    "Your task is to help the DM understand the setting and creatures as a group, focusing mainly "
    "on appearance and how they act.\n"
    "Especially focus on what makes each creature stand out.\n"
    "Avoid mentioning game stats.\n"
    "You may use information from common sense, mythology, and culture.\n"
    "If there are multiple creatures, conclude by mentioning how they interact.";

constexpr std::string_view kBrainstormSystem =
    "You are a creative D&D player and DM named Calypso.\n"
    "Avoid mentioning game stats. You may use information from common sense, mythology, and "
    "culture.";

constexpr std::string_view kBrainstormTask = "Your job is to help brainstorm some ideas for the encounter.";

constexpr std::string_view kSummaryCarryOver = "Here's what I have so far:\n";

std::size_t codepoints(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

// Markdown-style header: the title underlined with `rule` to the same width.
std::string header(std::string_view title, char rule) {
    return std::string(title) + "\n" + std::string(codepoints(title), rule) + "\n";
}

std::string signed_modifier(int score) {
    const int diff = score - 10;
    const int mod = diff >= 0 ? diff / 2 : -((-diff + 1) / 2);
    return mod >= 0 ? "+" + std::to_string(mod) : std::to_string(mod);
}

int speed_rank(const std::string& mode) {
    static constexpr std::array<std::string_view, 5> kOrder = {"walk", "burrow", "climb", "fly", "swim"};
    const auto it = std::find(kOrder.begin(), kOrder.end(), mode);
    return it == kOrder.end() ? static_cast<int>(kOrder.size()) : static_cast<int>(it - kOrder.begin());
}

std::string render_speeds(const std::map<std::string, int>& speeds) {
    if (speeds.empty()) {
        return "0 ft.";
    }
    std::vector<std::pair<std::string, int>> ordered(speeds.begin(), speeds.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return speed_rank(a.first) < speed_rank(b.first); });
    std::string out;
    for (const auto& [mode, feet] : ordered) {
        if (!out.empty()) {
            out += ", ";
        }
        if (mode != "walk") {
            out += mode + " ";
        }
        out += std::to_string(feet) + " ft.";
    }
    return out;
}

std::string render_languages(const std::vector<Language>& languages) {
    std::vector<std::string> spoken;
    std::vector<std::string> understood;
    for (const auto& l : languages) {
        (l.understands_only ? understood : spoken).push_back(l.name);
    }
    std::string out;
    for (const auto& s : spoken) {
        if (!out.empty()) {
            out += ", ";
        }
        out += s;
    }
    if (!understood.empty()) {
        if (!out.empty()) {
            out += ", ";
        }
        out += "understands " + render_english_list(understood) + " but can't speak " +
               (understood.size() == 1 ? "it" : "them");
    }
    return out.empty() ? "—" : out;
}

std::string join_lines(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += items[i];
    }
    return out;
}

enum class LoreMode { omit_missing, fallback };

std::string creature_section(const MonsterStatBlock& m, LoreMode mode, Rng* rng) {
    std::string out = header(m.name, '-');
    out += render_statistics(m);
    if (!m.lore.empty()) {
        out += "\n\n" + m.lore;
    } else if (mode == LoreMode::fallback) {
        out += "\n\n" + lore_fallback_line(m.name, sample_phrases(*rng));
    }
    return out;
}

// The Setting and Creatures sections shared by every encounter-grounded prompt.
// One creature subsection per rolled group, in rolled order.
std::string setting_and_creatures(const Encounter& enc, const KnowledgeBase& kb, LoreMode mode, Rng* rng) {
    const Setting& setting = kb.setting(enc.setting_id);
    std::vector<const MonsterStatBlock*> monsters;
    for (const auto& group : enc.rolled) {
        monsters.push_back(&kb.monster(group.monster_id));
    }
    std::vector<std::string> sections;
    for (const auto* m : monsters) {
        sections.push_back(creature_section(*m, mode, rng));
    }
    return header("Setting", '=') + setting.description + "\n\n" + header("Creatures", '=') +
           join_lines(sections, "\n\n");
}

}  // namespace

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view text) {
    if (text == "system") return Role::system;
    if (text == "user") return Role::user;
    if (text == "assistant") return Role::assistant;
    throw ValidationError("unknown role '" + std::string(text) + "'");
}

PromptBundle::PromptBundle(InterfaceKind kind, std::vector<ChatMessage> messages, DecodingProfile profile,
                           const ProfileRegistry& registry, bool override_profile)
    : kind_(kind), messages_(std::move(messages)), profile_(std::move(profile)), overridden_(override_profile) {
    if (messages_.empty()) {
        throw ValidationError("a prompt bundle needs at least one message");
    }
    for (const auto& m : messages_) {
        if (m.content.empty()) {
            throw ValidationError("prompt messages must not be empty");
        }
    }
    validate_profile(profile_);
    if (!override_profile && !(profile_ == registry.get_profile(kind_))) {
        throw ProfileMismatchError(std::string(to_string(kind_)));
    }
}

PromptBundle PromptBundle::restore(InterfaceKind kind, std::vector<ChatMessage> messages,
                                   DecodingProfile profile, bool profile_overridden) {
    PromptBundle b;
    b.kind_ = kind;
    b.messages_ = std::move(messages);
    b.profile_ = std::move(profile);
    b.overridden_ = profile_overridden;
    return b;
}

PromptBundle PromptBundle::with_messages(std::vector<ChatMessage> messages) const {
    if (messages.empty()) {
        throw ValidationError("a prompt bundle needs at least one message");
    }
    PromptBundle b = *this;
    b.messages_ = std::move(messages);
    return b;
}

json to_json(const ChatMessage& m) { return {{"role", to_string(m.role)}, {"content", m.content}}; }

json to_json(const PromptBundle& b) {
    json messages = json::array();
    for (const auto& m : b.messages()) {
        messages.push_back(to_json(m));
    }
    return {{"interface_kind", to_string(b.kind())},
            {"messages", messages},
            {"profile", to_json(b.profile())},
            {"profile_overridden", b.profile_overridden()}};
}

PromptBundle bundle_from_json(const json& doc) {
    std::vector<ChatMessage> messages;
    for (const auto& m : doc.at("messages")) {
        messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    }
    return PromptBundle::restore(parse_interface_kind(doc.at("interface_kind").get<std::string>()),
                                 std::move(messages), profile_from_json(doc.at("profile")),
                                 doc.value("profile_overridden", false));
}

std::string bundle_hash(const PromptBundle& b) {
    json doc = to_json(b);
    doc.erase("profile_overridden");
    return sha256_hex(doc.dump());
}

std::string render_english_list(std::span<const std::string> items) {
    switch (items.size()) {
        case 0: return "";
        case 1: return items[0];
        case 2: return items[0] + " and " + items[1];
        default: break;
    }
    std::string out;
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
        out += items[i] + ", ";
    }
    return out + "and " + items.back();
}

std::string PhraseSample::render() const { return render_english_list(chosen); }

PhraseSample sample_phrases(Rng& rng) {
    const auto size = static_cast<std::size_t>(rng.uniform(2, 4));
    std::array<std::string_view, 4> pool = kLorePhrases;
    // Partial Fisher-Yates: the first `size` slots form a uniformly random ordered draw.
    for (std::size_t i = 0; i < size; ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform(static_cast<std::int64_t>(i), 3));
        std::swap(pool[i], pool[j]);
    }
    PhraseSample sample;
    for (std::size_t i = 0; i < size; ++i) {
        sample.chosen.emplace_back(pool[i]);
    }
    return sample;
}

std::string lore_fallback_line(std::string_view monster_name, const PhraseSample& phrases) {
    return "Calypso, please provide the DM with information about the " + std::string(monster_name) +
           " using information from " + phrases.render();
}

std::string render_statistics(const MonsterStatBlock& m) {
    const AbilityScores& s = m.ability_scores;
    const auto score = [](const char* label, int v) {
        return std::string(label) + " " + std::to_string(v) + " (" + signed_modifier(v) + ")";
    };
    std::vector<std::string> lines;
    lines.push_back("Armor Class " + std::to_string(m.armor_class));
    lines.push_back("Hit Points " + std::to_string(m.hit_points));
    lines.push_back("Speed " + render_speeds(m.speeds));
    lines.push_back(score("STR", s.strength) + ", " + score("DEX", s.dexterity) + ", " +
                    score("CON", s.constitution) + ", " + score("INT", s.intelligence) + ", " +
                    score("WIS", s.wisdom) + ", " + score("CHA", s.charisma));
    if (!m.skills.empty()) {
        lines.push_back("Skills " + join_lines(m.skills, ", "));
    }
    lines.push_back("Languages " + render_languages(m.languages));
    for (const auto& a : m.abilities) {
        lines.push_back(a.text.empty() ? a.name + "." : a.name + ". " + a.text);
    }
    return join_lines(lines, "\n");
}

PromptBundle build_summarization_prompt(const Encounter& enc, const KnowledgeBase& kb,
                                        const ProfileRegistry& registry) {
    std::string prompt = std::string(kSummarizationInstruction) + "\n\n" +
                         setting_and_creatures(enc, kb, LoreMode::omit_missing, nullptr) + "\n\n" +
                         header("Summary", '=');
    return PromptBundle(InterfaceKind::summarization, {{Role::user, std::move(prompt)}},
                        registry.get_profile(InterfaceKind::summarization), registry);
}

PromptBundle build_understanding_prompt(const Encounter& enc, const KnowledgeBase& kb, Rng& rng,
                                        const ProfileRegistry& registry) {
    std::string prompt = std::string(kUnderstandingInstructions) + "\n\nEncounter: " + enc.rendered + "\n\n" +
                         setting_and_creatures(enc, kb, LoreMode::fallback, &rng) + "\n\n" +
                         header("Summary", '=');
    return PromptBundle(InterfaceKind::understanding, {{Role::user, std::move(prompt)}},
                        registry.get_profile(InterfaceKind::understanding), registry);
}

PromptBundle build_brainstorm_seed(const Encounter& enc, const KnowledgeBase& kb,
                                   const std::optional<std::string>& prior_summary, Rng& rng,
                                   const ProfileRegistry& registry) {
    std::vector<ChatMessage> messages;
    messages.push_back({Role::system, std::string(kBrainstormSystem)});
    messages.push_back({Role::user, "I'm running this D&D encounter: " + enc.rendered + "\n\n" +
                                        setting_and_creatures(enc, kb, LoreMode::fallback, &rng) + "\n\n" +
                                        std::string(kBrainstormTask)});
    if (prior_summary) {
        messages.push_back({Role::user, std::string(kSummaryCarryOver) + *prior_summary});
    }
    return PromptBundle(InterfaceKind::brainstorm, std::move(messages),
                        registry.get_profile(InterfaceKind::brainstorm), registry);
}

PromptBundle build_open_chat_seed(std::string_view persona, const ProfileRegistry& registry) {
    if (persona.empty()) {
        throw ValidationError("open-chat persona must not be empty");
    }
    return PromptBundle(InterfaceKind::open_chat, {{Role::system, std::string(persona)}},
                        registry.get_profile(InterfaceKind::open_chat), registry);
}

}  // namespace codm
