#include "codm/session.hpp"

#include <algorithm>
#include <cctype>

#include "codm/errors.hpp"

namespace codm {

using nlohmann::json;

namespace {

json message_json(const StoredMessage& m) {
    return {{"seq", m.seq},
            {"role", to_string(m.role)},
            {"content", m.content},
            {"user_id", m.user_id ? json(*m.user_id) : json(nullptr)},
            {"created_at", m.created_at}};
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool looks_like_bot_command(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    return first != std::string::npos && s[first] == '!';
}

}  // namespace

json to_json(const ThreadView& t) {
    json history = json::array();
    for (const auto& m : t.history) {
        history.push_back(message_json(m));
    }
    return {{"id", t.record.id},
            {"kind", to_string(t.record.kind)},
            {"encounter_id", t.record.encounter_id ? json(*t.record.encounter_id) : json(nullptr)},
            {"visibility", t.record.visibility},
            {"created_by", t.record.created_by},
            {"created_at", t.record.created_at},
            {"last_activity", t.record.last_activity},
            {"seed_count", t.record.seed_count},
            {"summary_included", t.record.summary_included},
            {"round_count", t.round_count},
            {"participants", t.participants},
            {"closed", t.closed},
            {"history", history},
            {"pending", t.pending ? message_json(*t.pending) : json(nullptr)}};
}

json export_transcript(const ThreadView& t) {
    json messages = json::array();
    for (const auto& m : t.history) {
        messages.push_back({{"role", to_string(m.role)},
                            {"content", m.content},
                            {"user_id", m.user_id ? json(*m.user_id) : json(nullptr)},
                            {"created_at", m.created_at},
                            {"seed", m.seq < t.record.seed_count}});
    }
    return {{"thread_id", t.record.id},
            {"kind", to_string(t.record.kind)},
            {"encounter_id", t.record.encounter_id ? json(*t.record.encounter_id) : json(nullptr)},
            {"created_at", t.record.created_at},
            {"round_count", t.round_count},
            {"messages", messages}};
}

std::size_t estimate_tokens(const std::vector<ChatMessage>& messages) {
    std::size_t total = 0;
    for (const auto& m : messages) {
        total += (m.content.size() + 3) / 4;
    }
    return total;
}

std::vector<ChatMessage> budgeted_messages(const std::vector<ChatMessage>& seed,
                                           const std::vector<ChatMessage>& turns, std::size_t budget) {
    std::size_t first = 0;
    if (budget > 0) {
        const std::size_t seed_cost = estimate_tokens(seed);
        std::size_t turn_cost = estimate_tokens(turns);
        while (seed_cost + turn_cost > budget && turns.size() - first > 2) {
            turn_cost -= estimate_tokens({turns[first], turns[first + 1]});
            first += 2;
        }
    }
    std::vector<ChatMessage> out = seed;
    out.insert(out.end(), turns.begin() + static_cast<std::ptrdiff_t>(first), turns.end());
    return out;
}

// Holds a thread's FIFO ticket for the lifetime of one turn.
class SessionManager::Turn {
public:
    Turn(Lane& lane, int capacity, const std::string& thread_id) : lane_(lane) {
        std::unique_lock lock(lane_.mutex);
        if (lane_.next_ticket - lane_.serving > static_cast<std::uint64_t>(capacity)) {
            throw ThreadBusyError(thread_id);
        }
        const std::uint64_t ticket = lane_.next_ticket++;
        lane_.cv.wait(lock, [&] { return lane_.serving == ticket; });
    }
    ~Turn() {
        {
            std::lock_guard lock(lane_.mutex);
            ++lane_.serving;
        }
        lane_.cv.notify_all();
    }
    Turn(const Turn&) = delete;
    Turn& operator=(const Turn&) = delete;

private:
    Lane& lane_;
};

SessionManager::SessionManager(const KnowledgeBase& kb, Store& store, Gateway& gateway, Clock& clock,
                               IdGenerator& ids, SessionConfig config)
    : kb_(kb), store_(store), gateway_(gateway), clock_(clock), ids_(ids), config_(std::move(config)) {
    if (config_.persona.empty()) {
        throw ConfigError("persona must not be empty");
    }
    if (config_.queue_capacity < 0) {
        throw ConfigError("queue_capacity must be >= 0");
    }
}

std::shared_ptr<SessionManager::Lane> SessionManager::lane(const std::string& thread_id) {
    std::lock_guard lock(lanes_mutex_);
    auto& slot = lanes_[thread_id];
    if (!slot) {
        slot = std::make_shared<Lane>();
    }
    return slot;
}

Encounter SessionManager::roll_encounter(const EncounterTable& table, const std::string& setting_id,
                                         std::uint64_t seed) {
    const Setting& setting = kb_.setting(setting_id);
    Rng rng(seed);
    Encounter enc = codm::roll_encounter(table, setting, kb_, rng);
    enc.id = ids_.next("enc");
    enc.created_at = format_timestamp(clock_.now());
    store_.insert_encounter(enc);
    return enc;
}

Encounter SessionManager::encounter(const std::string& id) {
    auto enc = store_.find_encounter(id);
    if (!enc) {
        throw UnknownEncounterError(id);
    }
    return *enc;
}

PromptBundle SessionManager::understanding_prompt(const std::string& encounter_id, InterfaceKind variant,
                                                  std::uint64_t seed) {
    const Encounter enc = encounter(encounter_id);
    Rng rng(seed);
    switch (variant) {
        case InterfaceKind::summarization: return build_summarization_prompt(enc, kb_, config_.profiles);
        case InterfaceKind::understanding: return build_understanding_prompt(enc, kb_, rng, config_.profiles);
        default: break;
    }
    throw ValidationError("variant must be 'summarize' or 'understand'");
}

GenerationRecord SessionManager::understand(const std::string& encounter_id, InterfaceKind variant,
                                            std::uint64_t seed) {
    const PromptBundle bundle = understanding_prompt(encounter_id, variant, seed);
    GenerateOptions options;
    options.encounter_id = encounter_id;
    return gateway_.generate(bundle, options);
}

ThreadView SessionManager::open_brainstorm(const std::string& encounter_id, bool include_summary,
                                           std::uint64_t seed, const std::string& user_id) {
    const Encounter enc = encounter(encounter_id);
    std::optional<std::string> summary;
    if (include_summary) {
        const auto latest = store_.latest_generation_for_encounter(
            encounter_id, {InterfaceKind::summarization, InterfaceKind::understanding});
        if (!latest) {
            throw NoSummaryError(encounter_id);
        }
        summary = latest->output_text;
    }
    Rng rng(seed);
    const PromptBundle seed_bundle = build_brainstorm_seed(enc, kb_, summary, rng, config_.profiles);

    const std::string now = format_timestamp(clock_.now());
    ThreadRecord record;
    record.id = ids_.next("thr");
    record.kind = ThreadKind::brainstorm;
    record.encounter_id = encounter_id;
    record.visibility = "private";
    record.created_by = user_id;
    record.seed_count = static_cast<int>(seed_bundle.messages().size());
    record.summary_included = include_summary;
    record.created_at = now;
    record.last_activity = now;
    store_.create_thread(record, seed_bundle);
    return load_view(record.id);
}

ThreadView SessionManager::open_chat(const std::string& user_id, const std::optional<std::string>& persona) {
    const PromptBundle seed_bundle = build_open_chat_seed(persona.value_or(config_.persona), config_.profiles);
    const std::string now = format_timestamp(clock_.now());
    ThreadRecord record;
    record.id = ids_.next("thr");
    record.kind = ThreadKind::open_chat;
    record.visibility = "public";
    record.created_by = user_id;
    record.seed_count = 1;
    record.created_at = now;
    record.last_activity = now;
    store_.create_thread(record, seed_bundle);
    return load_view(record.id);
}

ThreadView SessionManager::load_view(const std::string& thread_id) {
    auto record = store_.find_thread(thread_id);
    if (!record) {
        throw UnknownThreadError(thread_id);
    }
    ThreadView view;
    view.record = *record;
    view.participants.insert(record->created_by);
    for (auto& m : store_.thread_messages(thread_id)) {
        if (m.user_id) {
            view.participants.insert(*m.user_id);
        }
        if (m.pending) {
            view.pending = std::move(m);
            continue;
        }
        if (m.role == Role::assistant && m.seq >= record->seed_count) {
            ++view.round_count;
        }
        view.history.push_back(std::move(m));
    }
    if (config_.idle_timeout.count() > 0) {
        view.closed = clock_.now() - parse_timestamp(record->last_activity) > config_.idle_timeout;
    }
    return view;
}

ThreadView SessionManager::thread(const std::string& thread_id) { return load_view(thread_id); }

std::string SessionManager::request_id_for(const std::string& thread_id, int user_seq) const {
    return thread_id + "#" + std::to_string(user_seq);
}

PromptBundle SessionManager::request_for(const std::string& thread_id, const std::vector<StoredMessage>& messages,
                                         int upto_seq) {
    const PromptBundle seed = store_.thread_seed(thread_id);
    const auto seed_count = static_cast<int>(seed.messages().size());
    std::vector<ChatMessage> turns;
    for (const auto& m : messages) {
        if (m.seq >= seed_count && m.seq <= upto_seq) {
            turns.push_back({m.role, m.content});
        }
    }
    return seed.with_messages(budgeted_messages(seed.messages(), turns, config_.token_budget));
}

GenerationRecord SessionManager::generate_reply(const ThreadView& view, const StoredMessage& user_message) {
    std::vector<StoredMessage> messages = view.history;
    messages.push_back(user_message);
    const PromptBundle bundle = request_for(view.record.id, messages, user_message.seq);

    GenerateOptions options;
    options.request_id = request_id_for(view.record.id, user_message.seq);
    options.thread_id = view.record.id;
    options.encounter_id = view.record.encounter_id;
    GenerationRecord record = gateway_.generate(bundle, options);
    store_.commit_reply(view.record.id, user_message.seq, record.output_text, format_timestamp(clock_.now()));
    return record;
}

GenerationRecord SessionManager::post_user_message(const std::string& thread_id, const std::string& text,
                                                   const std::string& user_id) {
    if (text.empty() || is_blank(text)) {
        throw ValidationError("message text must not be empty");
    }
    if (looks_like_bot_command(text)) {
        throw ToolInvocationError();
    }
    if (!store_.find_thread(thread_id)) {
        throw UnknownThreadError(thread_id);
    }
    const auto thread_lane = lane(thread_id);
    Turn turn(*thread_lane, config_.queue_capacity, thread_id);

    ThreadView view = load_view(thread_id);
    if (view.closed) {
        throw ThreadClosedError(thread_id);
    }
    if (view.pending) {
        throw PendingMessageError(thread_id);
    }
    const std::string now = format_timestamp(clock_.now());
    StoredMessage user;
    user.seq = store_.append_pending_user_message(thread_id, text, user_id, now);
    user.role = Role::user;
    user.content = text;
    user.user_id = user_id;
    user.created_at = now;
    user.pending = true;
    return generate_reply(view, user);
}

GenerationRecord SessionManager::retry_pending(const std::string& thread_id) {
    if (!store_.find_thread(thread_id)) {
        throw UnknownThreadError(thread_id);
    }
    const auto thread_lane = lane(thread_id);
    Turn turn(*thread_lane, config_.queue_capacity, thread_id);

    ThreadView view = load_view(thread_id);
    if (!view.pending) {
        throw NoPendingMessageError(thread_id);
    }
    if (view.closed) {
        throw ThreadClosedError(thread_id);
    }
    return generate_reply(view, *view.pending);
}

ThreadView SessionManager::reopen(const std::string& thread_id) {
    if (!store_.find_thread(thread_id)) {
        throw UnknownThreadError(thread_id);
    }
    store_.touch_thread(thread_id, format_timestamp(clock_.now()));
    return load_view(thread_id);
}

PromptBundle SessionManager::replay_request(const std::string& thread_id, int assistant_seq) {
    if (!store_.find_thread(thread_id)) {
        throw UnknownThreadError(thread_id);
    }
    const auto messages = store_.thread_messages(thread_id);
    const auto it = std::find_if(messages.begin(), messages.end(),
                                 [&](const StoredMessage& m) { return m.seq == assistant_seq; });
    if (it == messages.end() || it->role != Role::assistant) {
        throw ValidationError("message " + std::to_string(assistant_seq) + " is not an assistant reply");
    }
    return request_for(thread_id, messages, assistant_seq - 1);
}

FeedbackRecord SessionManager::record_feedback(const std::string& generation_id, Polarity polarity,
                                               const std::optional<std::string>& comment,
                                               const std::string& user_id) {
    FeedbackRecord f;
    f.id = ids_.next("fb");
    f.generation_id = generation_id;
    f.user_id = user_id;
    f.polarity = polarity;
    if (comment && !comment->empty()) {
        f.comment = comment;
    }
    f.created_at = format_timestamp(clock_.now());
    store_.insert_feedback(f);
    return f;
}

FeedbackTally SessionManager::tally_feedback(InterfaceKind kind) { return store_.tally_feedback(kind); }

GenerationRecord SessionManager::generation(const std::string& id) {
    auto g = store_.find_generation(id);
    if (!g) {
        throw UnknownGenerationError(id);
    }
    return *g;
}

}  // namespace codm
