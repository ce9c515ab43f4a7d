#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "codm/encounter.hpp"
#include "codm/gateway.hpp"
#include "codm/knowledge_base.hpp"
#include "codm/prompt_forge.hpp"
#include "codm/store.hpp"
#include "codm/util.hpp"

namespace codm {

struct SessionConfig {
    std::string persona = std::string(kDefaultPersona);
    // Rough token budget for a thread request (bytes / 4). Oldest post-seed
    // exchanges are dropped first; the seed is always kept. 0 disables.
    std::size_t token_budget = 12000;
    // Threads idle longer than this are soft-closed. Zero disables closure.
    std::chrono::seconds idle_timeout{std::chrono::hours(24)};
    // Messages allowed to wait behind the in-flight one on a single thread.
    int queue_capacity = 4;
    ProfileRegistry profiles;
};

/// A thread as seen by clients: the seed plus committed turns, and the failed
/// user message awaiting retry, if any.
struct ThreadView {
    ThreadRecord record;
    std::vector<StoredMessage> history;  // seed + committed turns, in order
    std::optional<StoredMessage> pending;
    int round_count = 0;
    std::set<std::string> participants;
    bool closed = false;
};

nlohmann::json to_json(const ThreadView& t);

/// Portable transcript for analysis: role, content and timestamps per message.
nlohmann::json export_transcript(const ThreadView& t);

/// Rough token estimate used for the context budget (ceil(bytes / 4)).
std::size_t estimate_tokens(const std::vector<ChatMessage>& messages);

/// Builds the message list for the next request: all seed messages, then the
/// newest post-seed turns that fit in `budget`. Turns are dropped oldest
/// first in user/assistant pairs; the final user message is always kept.
std::vector<ChatMessage> budgeted_messages(const std::vector<ChatMessage>& seed,
                                           const std::vector<ChatMessage>& turns, std::size_t budget);

class SessionManager {
public:
    SessionManager(const KnowledgeBase& kb, Store& store, Gateway& gateway, Clock& clock, IdGenerator& ids,
                   SessionConfig config = {});

    /// Rolls, stamps and persists an encounter. Throws UnknownSettingError,
    /// EmptyTableError, UnresolvedMonsterError.
    Encounter roll_encounter(const EncounterTable& table, const std::string& setting_id, std::uint64_t seed);
    Encounter encounter(const std::string& id);

    /// Prompt for the Encounter Understanding interface (`summarization` or
    /// `understanding`) without sending it.
    PromptBundle understanding_prompt(const std::string& encounter_id, InterfaceKind variant, std::uint64_t seed);
    GenerationRecord understand(const std::string& encounter_id, InterfaceKind variant, std::uint64_t seed);

    /// Throws UnknownEncounterError; NoSummaryError when `include_summary` is
    /// set and the encounter has no understanding generation.
    ThreadView open_brainstorm(const std::string& encounter_id, bool include_summary, std::uint64_t seed,
                               const std::string& user_id = "dm");
    ThreadView open_chat(const std::string& user_id, const std::optional<std::string>& persona = std::nullopt);

    /// FIFO per thread, one generation in flight. On gateway failure the user
    /// message stays pending and the error propagates; use retry_pending().
    GenerationRecord post_user_message(const std::string& thread_id, const std::string& text,
                                       const std::string& user_id = "dm");
    GenerationRecord retry_pending(const std::string& thread_id);
    ThreadView reopen(const std::string& thread_id);

    ThreadView thread(const std::string& thread_id);
    /// The exact request that produced the reply at `assistant_seq`, rebuilt
    /// from persisted history.
    PromptBundle replay_request(const std::string& thread_id, int assistant_seq);

    FeedbackRecord record_feedback(const std::string& generation_id, Polarity polarity,
                                   const std::optional<std::string>& comment, const std::string& user_id = "dm");
    FeedbackTally tally_feedback(InterfaceKind kind);
    GenerationRecord generation(const std::string& id);

    const KnowledgeBase& knowledge_base() const { return kb_; }
    Store& store() { return store_; }
    const SessionConfig& config() const { return config_; }

private:
    struct Lane {
        std::mutex mutex;
        std::condition_variable cv;
        std::uint64_t next_ticket = 0;
        std::uint64_t serving = 0;
    };
    class Turn;

    std::shared_ptr<Lane> lane(const std::string& thread_id);
    ThreadView load_view(const std::string& thread_id);
    PromptBundle request_for(const std::string& thread_id, const std::vector<StoredMessage>& messages,
                             int upto_seq);
    GenerationRecord generate_reply(const ThreadView& view, const StoredMessage& user_message);
    std::string request_id_for(const std::string& thread_id, int user_seq) const;

    const KnowledgeBase& kb_;
    Store& store_;
    Gateway& gateway_;
    Clock& clock_;
    IdGenerator& ids_;
    SessionConfig config_;

    std::mutex lanes_mutex_;
    std::map<std::string, std::shared_ptr<Lane>> lanes_;
};

}  // namespace codm
