#include "codm/profiles.hpp"

#include "codm/errors.hpp"

namespace codm {

std::string_view to_string(InterfaceKind kind) {
    switch (kind) {
        case InterfaceKind::summarization: return "summarization";
        case InterfaceKind::understanding: return "understanding";
        case InterfaceKind::brainstorm: return "brainstorm";
        case InterfaceKind::open_chat: return "open_chat";
    }
    return "unknown";
}

InterfaceKind parse_interface_kind(std::string_view text) {
    if (text == "summarization" || text == "summarize") return InterfaceKind::summarization;
    if (text == "understanding" || text == "understand") return InterfaceKind::understanding;
    if (text == "brainstorm") return InterfaceKind::brainstorm;
    if (text == "open_chat" || text == "chat") return InterfaceKind::open_chat;
    throw UnknownKindError(std::string(text));
}

void validate_profile(const DecodingProfile& p) {
    if (!(p.temperature >= 0.0)) {
        throw ValidationError("temperature must be >= 0");
    }
    if (!(p.top_p > 0.0 && p.top_p <= 1.0)) {
        throw ValidationError("top_p must be in (0, 1]");
    }
    if (p.max_tokens <= 0) {
        throw ValidationError("max_tokens must be positive");
    }
}

DecodingProfile published_profile(InterfaceKind kind) {
    DecodingProfile p;
    switch (kind) {
        case InterfaceKind::summarization:
            p.temperature = 0.9;
            p.top_p = 0.95;
            p.frequency_penalty = 1.0;
            p.presence_penalty = 1.0;
            break;
        case InterfaceKind::understanding:
            p.temperature = 0.8;
            p.top_p = 0.95;
            p.frequency_penalty = 0.5;
            p.presence_penalty = 0.0;
            break;
        case InterfaceKind::brainstorm:
        case InterfaceKind::open_chat:
            p.temperature = 1.0;
            p.top_p = 0.95;
            p.frequency_penalty = 0.3;
            p.presence_penalty = 0.0;
            break;
    }
    return p;
}

ProfileRegistry::ProfileRegistry() {
    for (const auto kind : kAllInterfaceKinds) {
        profiles_.emplace(kind, published_profile(kind));
    }
}

ProfileRegistry ProfileRegistry::empty_registry() { return ProfileRegistry(Empty{}); }

const ProfileRegistry& ProfileRegistry::published() {
    static const ProfileRegistry registry;
    return registry;
}

void ProfileRegistry::register_profile(InterfaceKind kind, DecodingProfile profile) {
    validate_profile(profile);
    profiles_[kind] = std::move(profile);
}

DecodingProfile ProfileRegistry::get_profile(InterfaceKind kind) const {
    const auto it = profiles_.find(kind);
    if (it == profiles_.end()) {
        throw UnknownKindError(std::string(to_string(kind)));
    }
    return it->second;
}

nlohmann::json to_json(const DecodingProfile& p) {
    return {{"temperature", p.temperature},
            {"top_p", p.top_p},
            {"frequency_penalty", p.frequency_penalty},
            {"presence_penalty", p.presence_penalty},
            {"max_tokens", p.max_tokens},
            {"model_id", p.model_id}};
}

DecodingProfile profile_from_json(const nlohmann::json& doc) {
    DecodingProfile p;
    p.temperature = doc.at("temperature").get<double>();
    p.top_p = doc.at("top_p").get<double>();
    p.frequency_penalty = doc.at("frequency_penalty").get<double>();
    p.presence_penalty = doc.at("presence_penalty").get<double>();
    p.max_tokens = doc.at("max_tokens").get<int>();
    p.model_id = doc.value("model_id", "");
    return p;
}

}  // namespace codm
