#include <doctest.h>

#include <set>

#include "dm/error.hpp"
#include "dm/features.hpp"
#include "dm/synthetic.hpp"

using namespace dm;

namespace {

// Re-runs the config's policy over the stored observations; the labels must
// be exactly what the policy says at every turn.
std::size_t fidelity_mismatches(const DialogCorpus& corpus, const SyntheticConfig& cfg) {
    std::size_t bad = 0;
    for (const Dialog& d : corpus.dialogs) {
        DialogRegister reg = DialogRegister::initial(corpus.schema);
        for (const Turn& t : d.turns) {
            reg = update_register(reg, t.user, cfg.threshold, corpus.schema);
            if (cfg.policy(reg.codes) != t.system_act) ++bad;
        }
    }
    return bad;
}

SyntheticConfig never_closing_config() {
    SyntheticConfig cfg;
    cfg.schema.name = "stuck";
    cfg.schema.slots = {"a"};
    cfg.schema.system_acts = {"loop", "bye"};
    cfg.info_slots = {0};
    cfg.closing_act = "bye";
    cfg.n_dialogs = 1;
    cfg.turn_cap = 5;
    cfg.policy = [](const std::vector<int>&) { return std::string("loop"); };
    return cfg;
}

} // namespace

TEST_SUITE("synthetic") {

TEST_CASE("zero dialogs give an empty corpus") {
    DialogCorpus c = generate_synthetic(demo_config(0, 0.0, 1));
    CHECK(c.dialogs.empty());
    CHECK(c.schema.slots.size() == 5);
}

TEST_CASE("same config and seed produce byte-identical corpora") {
    SyntheticConfig cfg = demo_config(25, 0.3, 77);
    std::string a = corpus_to_jsonl(generate_synthetic(cfg));
    std::string b = corpus_to_jsonl(generate_synthetic(cfg));
    CHECK(a == b);
    std::string c = corpus_to_jsonl(generate_synthetic(demo_config(25, 0.3, 78)));
    CHECK(a != c);
}

TEST_CASE("noiseless generation only emits full confidence") {
    DialogCorpus c = generate_synthetic(demo_config(40, 0.0, 3));
    for (const Dialog& d : c.dialogs)
        for (const Turn& t : d.turns)
            for (const auto& [slot, conf] : t.user.slot_values) CHECK(conf == 1.0);
}

TEST_CASE("labels replay exactly from the policy") {
    for (auto cfg : {demo_config(60, 0.0, 5), demo_config(60, 0.4, 6)}) {
        DialogCorpus c = generate_synthetic(cfg);
        CHECK(fidelity_mismatches(c, cfg) == 0);
    }
    SyntheticConfig dihana = dihana_like_config(30, 9);
    CHECK(fidelity_mismatches(generate_synthetic(dihana), dihana) == 0);
    SyntheticConfig dstc = dstc_like_config(30, 9);
    CHECK(fidelity_mismatches(generate_synthetic(dstc), dstc) == 0);
}

TEST_CASE("generated corpora validate against their schema") {
    for (auto cfg : {demo_config(20, 0.2, 1), letsgo_like_config(20, 2),
                     dstc_like_config(20, 3)}) {
        DialogCorpus c = generate_synthetic(cfg);
        CHECK(validate_corpus(c).empty());
        CHECK(c.dialogs.size() == 20);
    }
}

TEST_CASE("a policy that never closes trips the turn cap") {
    try {
        generate_synthetic(never_closing_config());
        FAIL("expected RuntimeFailure");
    } catch (const RuntimeFailure& e) {
        std::string msg = e.what();
        CHECK(msg.find("5") != std::string::npos);
        CHECK(msg.find("d1") != std::string::npos);
    }
}

TEST_CASE("a policy emitting an unknown act is a runtime failure") {
    SyntheticConfig cfg = never_closing_config();
    cfg.policy = [](const std::vector<int>&) { return std::string("nonsense"); };
    CHECK_THROWS_AS(generate_synthetic(cfg), RuntimeFailure);
}

TEST_CASE("config validation rejects broken setups") {
    SyntheticConfig cfg = never_closing_config();
    cfg.closing_act = "not_there";
    CHECK_THROWS(generate_synthetic(cfg));

    cfg = never_closing_config();
    cfg.info_slots.clear();
    CHECK_THROWS(generate_synthetic(cfg));

    cfg = never_closing_config();
    cfg.confidence_noise = 1.5;
    CHECK_THROWS(generate_synthetic(cfg));

    cfg = never_closing_config();
    cfg.info_slots = {7};
    CHECK_THROWS(generate_synthetic(cfg));
}

TEST_CASE("profile shapes match the intended inventories") {
    CHECK(demo_config(1, 0, 0).schema.slots.size() == 5);
    CHECK(demo_config(1, 0, 0).schema.system_acts.size() == 8);
    CHECK(uniform_config(1, 0).schema.slots.size() == 4);
    CHECK(uniform_config(1, 0).schema.system_acts.size() == 5);
    CHECK(dihana_like_config(1, 0).schema.slots.size() == 18);
    CHECK(dihana_like_config(1, 0).schema.system_acts.size() == 29);
    CHECK(letsgo_like_config(1, 0).schema.slots.size() == 10);
    CHECK(letsgo_like_config(1, 0).schema.system_acts.size() == 26);
    CHECK(dstc_like_config(1, 0).schema.slots.size() == 12);
    CHECK(dstc_like_config(1, 0).schema.system_acts.size() == 17);
}

TEST_CASE("uniform profile: every act exactly once per dialog") {
    DialogCorpus c = generate_synthetic(uniform_config(12, 4));
    REQUIRE(c.dialogs.size() == 12);
    for (const Dialog& d : c.dialogs) {
        REQUIRE(d.turns.size() == c.schema.system_acts.size());
        std::set<std::string> acts;
        for (const Turn& t : d.turns) acts.insert(t.system_act);
        CHECK(acts.size() == c.schema.system_acts.size());
    }
}

TEST_CASE("dialog ids are zero-padded to the corpus size") {
    DialogCorpus c = generate_synthetic(uniform_config(12, 1));
    CHECK(c.dialogs.front().id == "d01");
    CHECK(c.dialogs.back().id == "d12");
    DialogCorpus big = generate_synthetic(uniform_config(101, 1));
    CHECK(big.dialogs.front().id == "d001");
    CHECK(big.dialogs.back().id == "d101");
}

TEST_CASE("every dialog terminates with the closing act") {
    for (auto cfg : {demo_config(30, 0.3, 2), dihana_like_config(30, 2),
                     letsgo_like_config(30, 2), dstc_like_config(30, 2)}) {
        DialogCorpus c = generate_synthetic(cfg);
        for (const Dialog& d : c.dialogs) {
            CHECK(d.turns.back().system_act == cfg.closing_act);
            CHECK(d.turns.size() <= static_cast<std::size_t>(cfg.turn_cap));
            for (std::size_t t = 0; t + 1 < d.turns.size(); ++t)
                CHECK(d.turns[t].system_act != cfg.closing_act);
        }
    }
}

} // TEST_SUITE
