#include <CLI11.hpp>

#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "codm/api_service.hpp"
#include "codm/config.hpp"
#include "codm/errors.hpp"
#include "codm/util.hpp"

namespace {

codm::ApiService* g_service = nullptr;

void on_signal(int) {
    if (g_service != nullptr) {
        g_service->stop();
    }
}

int serve(const std::string& config_path) {
    codm::Application app(codm::load_config(config_path));
    codm::ApiService service(app);
    const auto& cfg = app.config();
    const int port = service.bind(cfg.bind_address, cfg.port);
    if (port < 0) {
        std::cerr << "cannot bind " << cfg.bind_address << ":" << cfg.port << "\n";
        return 1;
    }
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << cfg.bind_address << ":" << port << " (provider: "
              << app.provider().name() << ")\n";
    service.listen_after_bind();
    g_service = nullptr;
    return 0;
}

int roll(const std::string& config_path, const std::string& table, const std::string& setting,
         std::optional<std::uint64_t> seed) {
    codm::Application app(codm::load_config(config_path));
    const auto& name = table.empty() ? app.config().default_table : table;
    const auto enc = app.sessions().roll_encounter(app.table(name), setting, seed.value_or(codm::entropy_seed()));
    std::cout << enc.rendered << "\n" << enc.id << "\n";
    if (enc.flavor) {
        std::cout << *enc.flavor << "\n";
    }
    return 0;
}

int prompt(const std::string& config_path, const std::string& encounter_id, const std::string& kind_text,
           std::optional<std::uint64_t> seed) {
    codm::Application app(codm::load_config(config_path));
    auto& sessions = app.sessions();
    const auto kind = codm::parse_interface_kind(kind_text);
    codm::Rng rng(seed.value_or(codm::entropy_seed()));
    std::optional<codm::PromptBundle> bundle;
    switch (kind) {
        case codm::InterfaceKind::summarization:
        case codm::InterfaceKind::understanding:
            bundle = sessions.understanding_prompt(encounter_id, kind, rng.next());
            break;
        case codm::InterfaceKind::brainstorm:
            bundle = codm::build_brainstorm_seed(sessions.encounter(encounter_id), app.knowledge_base(),
                                                 std::nullopt, rng, sessions.config().profiles);
            break;
        case codm::InterfaceKind::open_chat:
            bundle = codm::build_open_chat_seed(sessions.config().persona, sessions.config().profiles);
            break;
    }
    std::cout << codm::to_json(*bundle).dump(2) << "\n";
    return 0;
}

int validate_kb(const std::string& monsters, const std::string& settings, const std::vector<std::string>& tables) {
    const auto kb = codm::load_knowledge_base(monsters, settings);
    for (const auto& t : tables) {
        codm::load_encounter_table(t, kb);
    }
    const auto stats = codm::corpus_stats(kb);
    std::cout << kb.monsters().size() << " monsters, " << kb.settings().size() << " settings, " << tables.size()
              << " tables OK\n"
              << "description words: mean " << stats.mean << ", min " << stats.min << ", max " << stats.max << "\n";
    return 0;
}

int export_thread(const std::string& config_path, const std::string& thread_id) {
    codm::Application app(codm::load_config(config_path));
    std::cout << codm::export_transcript(app.sessions().thread(thread_id)).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Co-DM assistant: encounter rolling, prompts and the HTTP service"};
    cli.require_subcommand(1);
    std::string config_path = "config/codm.json";

    auto* serve_cmd = cli.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);

    std::string table, setting, encounter, kind, thread;
    std::optional<std::uint64_t> seed;

    auto* roll_cmd = cli.add_subcommand("roll", "Roll and persist an encounter");
    roll_cmd->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    roll_cmd->add_option("--table", table, "Table name from the config (default: default_table)");
    roll_cmd->add_option("--setting", setting, "Setting id")->required();
    roll_cmd->add_option("--seed", seed, "RNG seed");

    auto* prompt_cmd = cli.add_subcommand("prompt", "Print the prompt bundle for a stored encounter");
    prompt_cmd->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    prompt_cmd->add_option("--encounter", encounter, "Encounter id");
    prompt_cmd->add_option("--kind", kind, "summarize | understand | brainstorm | chat")
        ->required()
        ->check(CLI::IsMember({"summarize", "understand", "brainstorm", "chat", "summarization", "understanding",
                               "open_chat"}));
    prompt_cmd->add_option("--seed", seed, "RNG seed for phrase sampling");

    std::string monsters, settings;
    std::vector<std::string> tables;
    auto* validate_cmd = cli.add_subcommand("validate-kb", "Validate the knowledge base and encounter tables");
    validate_cmd->add_option("--monsters", monsters, "Monster directory")->required()->check(CLI::ExistingDirectory);
    validate_cmd->add_option("--settings", settings, "Setting directory")->required()->check(CLI::ExistingDirectory);
    validate_cmd->add_option("--table", tables, "Encounter table file(s)")->check(CLI::ExistingFile);

    auto* export_cmd = cli.add_subcommand("export", "Print a thread transcript as JSON");
    export_cmd->add_option("--config", config_path, "Service config file")->check(CLI::ExistingFile);
    export_cmd->add_option("--thread", thread, "Thread id")->required();

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*serve_cmd) {
            return serve(config_path);
        }
        if (*roll_cmd) {
            return roll(config_path, table, setting, seed);
        }
        if (*prompt_cmd) {
            if (encounter.empty() && kind != "chat" && kind != "open_chat") {
                std::cerr << "--encounter is required for kind " << kind << "\n";
                return 2;
            }
            return prompt(config_path, encounter, kind, seed);
        }
        if (*validate_cmd) {
            return validate_kb(monsters, settings, tables);
        }
        if (*export_cmd) {
            return export_thread(config_path, thread);
        }
    } catch (const codm::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
