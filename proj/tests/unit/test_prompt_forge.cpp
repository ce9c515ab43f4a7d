#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "codm/errors.hpp"
#include "support.hpp"

using namespace codm;
using codm::test::blink_dog_encounter;
using codm::test::fixture_kb;
using codm::test::golden;

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

std::size_t occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

}  // namespace

// ---- decoding profiles --------------------------------------------------------

TEST_CASE("published decoding profiles are exact") {
    const auto& reg = ProfileRegistry::published();
    const auto s = reg.get_profile(InterfaceKind::summarization);
    CHECK(s.temperature == 0.9);
    CHECK(s.top_p == 0.95);
    CHECK(s.frequency_penalty == 1.0);
    CHECK(s.presence_penalty == 1.0);
    const auto u = reg.get_profile(InterfaceKind::understanding);
    CHECK(u.temperature == 0.8);
    CHECK(u.top_p == 0.95);
    CHECK(u.frequency_penalty == 0.5);
    CHECK(u.presence_penalty == 0.0);
    for (const auto kind : {InterfaceKind::brainstorm, InterfaceKind::open_chat}) {
        const auto p = reg.get_profile(kind);
        CHECK(p.temperature == 1.0);
        CHECK(p.top_p == 0.95);
        CHECK(p.frequency_penalty == 0.3);
        CHECK(p.presence_penalty == 0.0);
    }
    for (const auto kind : kAllInterfaceKinds) {
        CHECK(reg.get_profile(kind).max_tokens == kDefaultMaxTokens);
        CHECK(reg.get_profile(kind) == published_profile(kind));
    }
}

TEST_CASE("profile registry errors") {
    auto reg = ProfileRegistry::empty_registry();
    CHECK_THROWS_AS(reg.get_profile(InterfaceKind::brainstorm), UnknownKindError);
    CHECK_THROWS_AS(parse_interface_kind("haiku"), UnknownKindError);
    auto bad = published_profile(InterfaceKind::brainstorm);
    bad.top_p = 0;
    CHECK_THROWS_AS(reg.register_profile(InterfaceKind::brainstorm, bad), ValidationError);
    bad = published_profile(InterfaceKind::brainstorm);
    bad.temperature = -0.1;
    CHECK_THROWS_AS(reg.register_profile(InterfaceKind::brainstorm, bad), ValidationError);
    CHECK(parse_interface_kind("summarize") == InterfaceKind::summarization);
    CHECK(parse_interface_kind("understand") == InterfaceKind::understanding);
    CHECK(parse_interface_kind("chat") == InterfaceKind::open_chat);
}

TEST_CASE("bundle with a foreign profile is rejected unless overridden") {
    auto p = published_profile(InterfaceKind::summarization);
    p.temperature = 0.2;
    const std::vector<ChatMessage> msgs = {{Role::user, "hi"}};
    CHECK_THROWS_AS(PromptBundle(InterfaceKind::summarization, msgs, p), ProfileMismatchError);
    const PromptBundle b(InterfaceKind::summarization, msgs, p, ProfileRegistry::published(), true);
    CHECK(b.profile_overridden());
    CHECK_THROWS_AS(PromptBundle(InterfaceKind::summarization, {}, published_profile(InterfaceKind::summarization)),
                    ValidationError);
}

TEST_CASE("profile json round trip") {
    for (const auto kind : kAllInterfaceKinds) {
        CHECK(profile_from_json(to_json(published_profile(kind))) == published_profile(kind));
    }
}

// ---- golden prompts -----------------------------------------------------------

TEST_CASE("summarization prompt matches golden") {
    const auto b = build_summarization_prompt(blink_dog_encounter(), fixture_kb());
    CHECK(b.kind() == InterfaceKind::summarization);
    REQUIRE(b.messages().size() == 1);
    CHECK(b.messages()[0].role == Role::user);
    CHECK(b.messages()[0].content == golden("summarization.txt"));
    CHECK(b.profile() == published_profile(InterfaceKind::summarization));
}

TEST_CASE("understanding prompt matches golden") {
    Rng rng(5);
    const auto b = build_understanding_prompt(blink_dog_encounter(), fixture_kb(), rng);
    REQUIRE(b.messages().size() == 1);
    CHECK(b.messages()[0].content == golden("understanding.txt"));
    CHECK(b.profile() == published_profile(InterfaceKind::understanding));
}

TEST_CASE("brainstorm seed matches golden, with and without a carried summary") {
    Rng rng(5);
    const auto plain = build_brainstorm_seed(blink_dog_encounter(), fixture_kb(), std::nullopt, rng);
    REQUIRE(plain.messages().size() == 2);
    CHECK(plain.messages()[0] == ChatMessage{Role::system, golden("brainstorm_system.txt")});
    CHECK(plain.messages()[1] == ChatMessage{Role::user, golden("brainstorm_user.txt")});

    const std::string summary = "The pack circles the ford, blinking in and out of the reeds.";
    const auto carried = build_brainstorm_seed(blink_dog_encounter(), fixture_kb(), summary, rng);
    REQUIRE(carried.messages().size() == 3);
    CHECK(carried.messages()[0] == plain.messages()[0]);
    CHECK(carried.messages()[1] == plain.messages()[1]);
    CHECK(carried.messages()[2] == ChatMessage{Role::user, golden("brainstorm_summary.txt")});
    CHECK(carried.profile() == published_profile(InterfaceKind::brainstorm));
}

TEST_CASE("open chat seed is the persona as a single system message") {
    const auto b = build_open_chat_seed(kDefaultPersona);
    REQUIRE(b.messages().size() == 1);
    CHECK(b.messages()[0].role == Role::system);
    CHECK(b.messages()[0].content == kDefaultPersona);
    CHECK(b.profile() == published_profile(InterfaceKind::open_chat));
    CHECK_THROWS_AS(build_open_chat_seed(""), ValidationError);
}

TEST_CASE("lore-less creature gets the fallback line only where it is allowed") {
    const auto enc = codm::test::make_encounter({{"blink-dog", 12}, {"snow-golem", 1}});
    CHECK(enc.rendered == "12 x Blink Dog, 1 x Snow Golem");
    Rng rng(77);
    Rng mirror(77);
    const auto expected_phrases = sample_phrases(mirror).render();
    const auto u = build_understanding_prompt(enc, fixture_kb(), rng);
    CHECK(u.messages()[0].content ==
          replace_all(golden("understanding_loreless.txt"), "{{PHRASES}}", expected_phrases));
    const auto s = build_summarization_prompt(enc, fixture_kb());
    CHECK(s.messages()[0].content == golden("summarization_loreless.txt"));
}

TEST_CASE("header underline matches the title width") {
    const auto b = build_summarization_prompt(codm::test::make_encounter({{"giant-spider", 2}}), fixture_kb());
    CHECK(b.messages()[0].content.find("Giant Spider\n------------\n") != std::string::npos);
}

TEST_CASE("statistics block field order") {
    CHECK(render_statistics(fixture_kb().monster("brown-bear")).find("Speed 40 ft., climb 30 ft.") !=
          std::string::npos);
    const auto block = render_statistics(fixture_kb().monster("blink-dog"));
    const auto ac = block.find("Armor Class");
    const auto hp = block.find("Hit Points");
    const auto speed = block.find("Speed");
    const auto str = block.find("STR");
    const auto skills = block.find("Skills");
    const auto lang = block.find("Languages");
    CHECK(ac < hp);
    CHECK(hp < speed);
    CHECK(speed < str);
    CHECK(str < skills);
    CHECK(skills < lang);
}

TEST_CASE("bundle json round trip and hash stability") {
    Rng rng(3);
    const auto b = build_brainstorm_seed(blink_dog_encounter(), fixture_kb(), std::string("notes"), rng);
    const auto back = bundle_from_json(to_json(b));
    CHECK(back == b);
    CHECK(bundle_hash(back) == bundle_hash(b));
    CHECK(bundle_hash(b).size() == 64);
    const auto other = b.with_messages({{Role::user, "different"}});
    CHECK(bundle_hash(other) != bundle_hash(b));
}

// ---- phrase sampler -----------------------------------------------------------

TEST_CASE("english list rendering uses the serial comma") {
    const std::vector<std::string> two = {"folklore", "culture"};
    const std::vector<std::string> three = {"common sense", "mythology", "culture"};
    const std::vector<std::string> four = {"folklore", "common sense", "mythology", "culture"};
    CHECK(render_english_list(two) == "folklore and culture");
    CHECK(render_english_list(three) == "common sense, mythology, and culture");
    CHECK(render_english_list(four) == "folklore, common sense, mythology, and culture");
    CHECK(lore_fallback_line("Owlbear", {four}) ==
          "Calypso, please provide the DM with information about the Owlbear using information from folklore, "
          "common sense, mythology, and culture");
}

TEST_CASE("seed sweep reaches exactly the 60 ordered samples of the enumeration oracle") {
    std::set<std::string> oracle;
    std::istringstream lines(codm::test::read_file(codm::test::test_dir() / "oracles" / "phrase_tuples.txt"));
    for (std::string line; std::getline(lines, line);) {
        oracle.insert(line);
    }
    REQUIRE(oracle.size() == 60);
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 20000 && seen.size() < 61; ++seed) {
        Rng rng(seed);
        const auto s = sample_phrases(rng);
        REQUIRE(s.chosen.size() >= 2);
        REQUIRE(s.chosen.size() <= 4);
        REQUIRE(std::set<std::string>(s.chosen.begin(), s.chosen.end()).size() == s.chosen.size());
        seen.insert(s.render());
    }
    CHECK(seen == oracle);
}

TEST_CASE("size classes are uniform within two percent") {
    Rng rng(60000);
    std::map<std::size_t, int> sizes;
    constexpr int kDraws = 60000;
    for (int i = 0; i < kDraws; ++i) {
        ++sizes[sample_phrases(rng).chosen.size()];
    }
    for (std::size_t k = 2; k <= 4; ++k) {
        CAPTURE(k);
        CHECK(std::abs(sizes[k] / static_cast<double>(kDraws) - 1.0 / 3.0) <= 0.02);
    }
}

// ---- fallback property --------------------------------------------------------

TEST_CASE("fallback lines appear once per lore-less group with independent samples") {
    std::vector<std::string> ids;
    for (const auto& [id, m] : fixture_kb().monsters()) {
        ids.push_back(id);
    }
    Rng gen(1234);
    int multi_loreless = 0;
    int differing = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<RolledGroup> rolled;
        const int groups = static_cast<int>(gen.uniform(1, 4));
        for (int g = 0; g < groups; ++g) {
            rolled.push_back({ids[static_cast<std::size_t>(gen.uniform(0, static_cast<std::int64_t>(ids.size()) - 1))],
                              static_cast<int>(gen.uniform(1, 6))});
        }
        const auto enc = codm::test::make_encounter(rolled);
        Rng rng(gen.next());
        const auto prompt = build_understanding_prompt(enc, fixture_kb(), rng).messages()[0].content;
        const auto summary = build_summarization_prompt(enc, fixture_kb()).messages()[0].content;
        CHECK(occurrences(summary, "Calypso, please provide") == 0);

        std::vector<std::string> fallback_lines;
        for (const auto& group : rolled) {
            const auto& m = fixture_kb().monster(group.monster_id);
            const std::string marker = "Calypso, please provide the DM with information about the " + m.name + " ";
            const auto per_monster_groups = static_cast<std::size_t>(
                std::count_if(rolled.begin(), rolled.end(), [&](const RolledGroup& r) { return r.monster_id == m.id; }));
            if (m.lore.empty()) {
                CHECK(occurrences(prompt, marker) == per_monster_groups);
            } else {
                CHECK(occurrences(prompt, marker) == 0);
            }
        }
        std::istringstream lines(prompt);
        for (std::string line; std::getline(lines, line);) {
            if (line.rfind("Calypso, please provide", 0) == 0) {
                fallback_lines.push_back(line.substr(line.find(" using information from ")));
            }
        }
        if (fallback_lines.size() >= 2) {
            ++multi_loreless;
            differing += std::set<std::string>(fallback_lines.begin(), fallback_lines.end()).size() > 1 ? 1 : 0;
        }
    }
    // Independent draws: with several lore-less groups, the phrase lists
    // differ in most prompts (equal with probability 1/60 per pair).
    REQUIRE(multi_loreless > 20);
    CHECK(differing > multi_loreless * 8 / 10);
}
