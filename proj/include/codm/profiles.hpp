#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace codm {

enum class InterfaceKind { summarization, understanding, brainstorm, open_chat };

inline constexpr std::array<InterfaceKind, 4> kAllInterfaceKinds = {
    InterfaceKind::summarization, InterfaceKind::understanding, InterfaceKind::brainstorm,
    InterfaceKind::open_chat};

std::string_view to_string(InterfaceKind kind);
/// Accepts the canonical names plus the CLI aliases "summarize", "understand", "chat".
/// Throws UnknownKindError.
InterfaceKind parse_interface_kind(std::string_view text);

inline constexpr int kDefaultMaxTokens = 1024;

struct DecodingProfile {
    double temperature = 1.0;
    double top_p = 1.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    int max_tokens = kDefaultMaxTokens;
    std::string model_id;

    bool operator==(const DecodingProfile&) const = default;
};

/// Throws ValidationError unless temperature >= 0, top_p in (0, 1] and max_tokens > 0.
void validate_profile(const DecodingProfile& profile);

/// The sampling parameters each interface was deployed with. Presence penalty
/// is zero wherever only a frequency penalty was published.
DecodingProfile published_profile(InterfaceKind kind);

/// Per-interface decoding profiles. A default-constructed registry holds the
/// four published profiles; operators may re-register (e.g. to set model ids)
/// before the service starts handling requests.
class ProfileRegistry {
public:
    ProfileRegistry();

    static ProfileRegistry empty_registry();
    /// Process-wide registry holding exactly the published profiles.
    static const ProfileRegistry& published();

    void register_profile(InterfaceKind kind, DecodingProfile profile);
    /// Returns a copy. Throws UnknownKindError if nothing is registered for `kind`.
    DecodingProfile get_profile(InterfaceKind kind) const;
    bool contains(InterfaceKind kind) const { return profiles_.count(kind) != 0; }

private:
    struct Empty {};
    explicit ProfileRegistry(Empty) {}

    std::map<InterfaceKind, DecodingProfile> profiles_;
};

nlohmann::json to_json(const DecodingProfile& p);
DecodingProfile profile_from_json(const nlohmann::json& doc);

}  // namespace codm
