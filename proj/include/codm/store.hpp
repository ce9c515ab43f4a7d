#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codm/encounter.hpp"
#include "codm/gateway.hpp"
#include "codm/prompt_forge.hpp"

struct sqlite3;

namespace codm {

enum class ThreadKind { brainstorm, open_chat };
enum class Polarity { positive, negative };

std::string_view to_string(ThreadKind kind);
ThreadKind parse_thread_kind(std::string_view text);
std::string_view to_string(Polarity p);
/// Accepts "positive"/"negative" (and "up"/"down"). Throws ValidationError.
Polarity parse_polarity(std::string_view text);

struct StoredMessage {
    int seq = 0;
    Role role = Role::user;
    std::string content;
    std::optional<std::string> user_id;
    std::string created_at;
    bool pending = false;  // user message whose reply has not been committed yet

    bool operator==(const StoredMessage&) const = default;
};

struct ThreadRecord {
    std::string id;
    ThreadKind kind = ThreadKind::brainstorm;
    std::optional<std::string> encounter_id;
    std::string visibility;  // "private" | "public"
    std::string created_by;
    int seed_count = 0;
    bool summary_included = false;
    std::string created_at;
    std::string last_activity;
};

struct FeedbackRecord {
    std::string id;
    std::string generation_id;
    std::string user_id;
    Polarity polarity = Polarity::positive;
    std::optional<std::string> comment;
    std::string created_at;

    bool operator==(const FeedbackRecord&) const = default;
};

struct FeedbackTally {
    std::int64_t positive = 0;
    std::int64_t negative = 0;
    std::int64_t total_encounters = 0;  // distinct encounters with a generation of this kind

    bool operator==(const FeedbackTally&) const = default;
};

nlohmann::json to_json(const FeedbackRecord& f);
nlohmann::json to_json(const FeedbackTally& t);

struct StoreCounts {
    std::int64_t encounters = 0;
    std::int64_t threads = 0;
    std::int64_t messages = 0;
    std::int64_t generations = 0;
    std::int64_t feedback = 0;
};

/// Single-file SQLite store for encounters, threads, messages, generations and
/// feedback. Every public method is one transaction; commits are durable
/// (WAL, synchronous=FULL) before the method returns. Thread-safe.
class Store final : public GenerationSink {
public:
    /// ":memory:" gives a private in-memory database.
    explicit Store(const std::string& path);
    ~Store() override;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    void insert_encounter(const Encounter& e);
    std::optional<Encounter> find_encounter(const std::string& id);

    /// Inserts the thread and its seed messages atomically.
    void create_thread(const ThreadRecord& t, const PromptBundle& seed);
    std::optional<ThreadRecord> find_thread(const std::string& id);
    /// The bundle the thread was seeded with (messages and profile).
    PromptBundle thread_seed(const std::string& thread_id);
    std::vector<StoredMessage> thread_messages(const std::string& thread_id);
    std::vector<std::string> list_thread_ids();

    /// Appends a user message in pending state; returns its sequence number.
    int append_pending_user_message(const std::string& thread_id, const std::string& content,
                                    const std::string& user_id, const std::string& created_at);
    /// Marks the pending user message committed and appends the assistant reply.
    void commit_reply(const std::string& thread_id, int user_seq, const std::string& reply,
                      const std::string& created_at);
    void touch_thread(const std::string& thread_id, const std::string& at);

    std::optional<GenerationRecord> find_generation_by_request(const std::string& request_id) override;
    GenerationRecord persist_generation(const GenerationRecord& record) override;
    std::optional<GenerationRecord> find_generation(const std::string& id);
    /// Most recent generation of any of `kinds` bound to the encounter.
    std::optional<GenerationRecord> latest_generation_for_encounter(const std::string& encounter_id,
                                                                     const std::vector<InterfaceKind>& kinds);
    std::vector<GenerationRecord> all_generations();

    /// Throws DuplicateFeedbackError on a second (generation, user) pair and
    /// UnknownGenerationError when the generation does not exist.
    void insert_feedback(const FeedbackRecord& f);
    std::vector<FeedbackRecord> all_feedback();
    FeedbackTally tally_feedback(InterfaceKind kind);

    StoreCounts counts();

private:
    class Statement;

    void exec(const char* sql);
    void migrate();
    GenerationRecord read_generation(Statement& st);

    std::mutex mutex_;
    sqlite3* db_ = nullptr;
};

}  // namespace codm
