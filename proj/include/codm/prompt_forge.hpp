#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codm/encounter.hpp"
#include "codm/knowledge_base.hpp"
#include "codm/profiles.hpp"
#include "codm/util.hpp"

namespace codm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// The exact payload sent to a provider: role-tagged messages plus sampling
/// parameters. Construction fails with ProfileMismatchError when the profile
/// differs from the one registered for the interface, unless the caller asks
/// for an override explicitly.
class PromptBundle {
public:
    PromptBundle(InterfaceKind kind, std::vector<ChatMessage> messages, DecodingProfile profile,
                 const ProfileRegistry& registry = ProfileRegistry::published(),
                 bool override_profile = false);

    /// Rebuilds a bundle that was validated when it was first sent.
    static PromptBundle restore(InterfaceKind kind, std::vector<ChatMessage> messages,
                                DecodingProfile profile, bool profile_overridden);

    InterfaceKind kind() const noexcept { return kind_; }
    const std::vector<ChatMessage>& messages() const noexcept { return messages_; }
    const DecodingProfile& profile() const noexcept { return profile_; }
    bool profile_overridden() const noexcept { return overridden_; }

    /// Same kind and profile, different message list (used for thread turns).
    PromptBundle with_messages(std::vector<ChatMessage> messages) const;

    bool operator==(const PromptBundle&) const = default;

private:
    PromptBundle() = default;

    InterfaceKind kind_ = InterfaceKind::open_chat;
    std::vector<ChatMessage> messages_;
    DecodingProfile profile_;
    bool overridden_ = false;
};

nlohmann::json to_json(const ChatMessage& m);
nlohmann::json to_json(const PromptBundle& b);
PromptBundle bundle_from_json(const nlohmann::json& doc);

/// Stable content hash of a bundle (kind, messages, profile).
std::string bundle_hash(const PromptBundle& b);

// ---- anti-repetition phrase sampling ----------------------------------------

inline constexpr std::array<std::string_view, 4> kLorePhrases = {"folklore", "common sense",
                                                                 "mythology", "culture"};

struct PhraseSample {
    std::vector<std::string> chosen;  // 2..4 distinct members of kLorePhrases, in sampled order

    /// English list with a serial comma: "a and b", "a, b, and c".
    std::string render() const;

    bool operator==(const PhraseSample&) const = default;
};

/// Size uniform over {2, 3, 4}; members drawn without replacement in random order.
PhraseSample sample_phrases(Rng& rng);

std::string render_english_list(std::span<const std::string> items);

/// The instruction inserted in place of lore for a creature that has none.
std::string lore_fallback_line(std::string_view monster_name, const PhraseSample& phrases);

// ---- prompt builders ---------------------------------------------------------

/// Stat block body in fixed field order: AC, HP, speeds, ability scores,
/// skills, languages, ability prose. No header, no lore.
std::string render_statistics(const MonsterStatBlock& monster);

/// Throws UnresolvedMonsterError / UnknownSettingError when the encounter does
/// not resolve against `kb`.
PromptBundle build_summarization_prompt(const Encounter& enc, const KnowledgeBase& kb,
                                        const ProfileRegistry& registry = ProfileRegistry::published());

PromptBundle build_understanding_prompt(const Encounter& enc, const KnowledgeBase& kb, Rng& rng,
                                        const ProfileRegistry& registry = ProfileRegistry::published());

PromptBundle build_brainstorm_seed(const Encounter& enc, const KnowledgeBase& kb,
                                   const std::optional<std::string>& prior_summary, Rng& rng,
                                   const ProfileRegistry& registry = ProfileRegistry::published());

/// Throws ValidationError for an empty persona.
PromptBundle build_open_chat_seed(std::string_view persona,
                                  const ProfileRegistry& registry = ProfileRegistry::published());

/// Shipped open-chat persona, a stand-in operators are expected to replace
/// through the `persona` config key.
extern const std::string_view kDefaultPersona;

}  // namespace codm
