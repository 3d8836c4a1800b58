#include <doctest.h>

#include "dm/error.hpp"
#include "dm/features.hpp"
#include "dm/rng.hpp"
#include "test_util.hpp"

using namespace dm;

namespace {

// [Origin, Destination, Time, Yes, No] travel schema used by the goldens.
SlotSchema travel_schema() {
    SlotSchema s;
    s.name = "travel";
    s.slots = {"origin", "destination", "time", "yes", "no"};
    s.system_acts = {"request_origin", "confirm_origin", "provide_info"};
    return s;
}

UserObservation obs(std::initializer_list<std::pair<const std::string, double>> kv) {
    UserObservation o;
    o.slot_values = kv;
    return o;
}

EncoderConfig dr_config(int context = 0, bool prev = false) {
    EncoderConfig c;
    c.mode = FeatureMode::DialogRegister;
    c.context = context;
    c.include_prev_act = prev;
    c.schema = travel_schema();
    return c;
}

// The three-turn golden sequence: destination high, origin low, then
// origin/time/yes high together.
std::vector<UserObservation> golden_turns() {
    return {obs({{"destination", 0.95}}),
            obs({{"origin", 0.15}}),
            obs({{"origin", 0.85}, {"time", 0.85}, {"yes", 0.85}})};
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("register golden: three turns") {
    SlotSchema schema = travel_schema();
    DialogRegister reg = DialogRegister::initial(schema);
    auto turns = golden_turns();

    reg = update_register(reg, turns[0], 0.5, schema);
    CHECK(reg.codes == std::vector<int>{0, 1, 0, 0, 0});
    reg = update_register(reg, turns[1], 0.5, schema);
    CHECK(reg.codes == std::vector<int>{2, 1, 0, 0, 0});
    reg = update_register(reg, turns[2], 0.5, schema);
    CHECK(reg.codes == std::vector<int>{1, 1, 1, 1, 0});
}

TEST_CASE("changes golden: three turns") {
    SlotSchema schema = travel_schema();
    DialogRegister reg = DialogRegister::initial(schema);
    auto turns = golden_turns();
    std::vector<std::vector<int>> expect = {
        {0, 1, 0, 0, 0}, {2, 0, 0, 0, 0}, {4, 0, 1, 1, 0}};

    for (std::size_t t = 0; t < turns.size(); ++t) {
        DialogRegister next = update_register(reg, turns[t], 0.5, schema);
        CHECK(derive_changes(reg, next).codes == expect[t]);
        reg = next;
    }
}

TEST_CASE("update_register: boundary confidence counts as low") {
    SlotSchema schema = travel_schema();
    DialogRegister reg = DialogRegister::initial(schema);
    reg = update_register(reg, obs({{"origin", 0.5}}), 0.5, schema);
    CHECK(reg.codes[0] == 2); // code 1 needs strictly greater than the threshold
    reg = update_register(reg, obs({{"origin", 0.500001}}), 0.5, schema);
    CHECK(reg.codes[0] == 1);
}

TEST_CASE("update_register rejects unknown slots") {
    SlotSchema schema = travel_schema();
    DialogRegister reg = DialogRegister::initial(schema);
    CHECK_THROWS_AS(update_register(reg, obs({{"zz", 0.9}}), 0.5, schema), DataError);
}

TEST_CASE("derive_changes: high to low maps to code 2, zero baseline") {
    DialogRegister a{{1, 0}, {}};
    DialogRegister b{{2, 0}, {}};
    CHECK(derive_changes(a, b).codes == std::vector<int>{2, 0});
    CHECK(derive_changes(a, a).codes == std::vector<int>{0, 0});
    CHECK(derive_changes(b, b).codes == std::vector<int>{0, 0});
}

TEST_CASE("derive_changes rejects dimension mismatch") {
    DialogRegister a{{0, 0}, {}};
    DialogRegister b{{0, 0, 0}, {}};
    CHECK_THROWS(derive_changes(a, b));
}

TEST_CASE("encode_turn: plain codes, appended prev act, -1 before any act") {
    EncoderConfig plain = dr_config();
    DialogRegister reg{{0, 1, 0, 0, 0}, {}};
    CHECK(encode_turn(reg, plain) == std::vector<double>{0, 1, 0, 0, 0});

    EncoderConfig with_prev = dr_config(0, true);
    reg.prev_act = 3;
    CHECK(encode_turn(reg, with_prev) == std::vector<double>{0, 1, 0, 0, 0, 3});
    reg.prev_act = {};
    CHECK(encode_turn(reg, with_prev) == std::vector<double>{0, 1, 0, 0, 0, -1});

    DialogChanges dch{{4, 0, 1, 1, 0}, {}};
    EncoderConfig ch = dr_config();
    ch.mode = FeatureMode::DialogChanges;
    CHECK(encode_turn(dch, ch) == std::vector<double>{4, 0, 1, 1, 0});
}

TEST_CASE("window golden: all nine context vectors") {
    std::vector<std::vector<double>> turns = {
        {0, 1, 0, 0, 0}, {2, 1, 0, 0, 0}, {1, 1, 1, 1, 0}};
    std::vector<std::vector<double>> history;
    std::vector<std::vector<std::vector<double>>> expect = {
        // turn 1
        {{0, 1, 0, 0, 0},
         {0, 0, 0, 0, 0, 0, 1, 0, 0, 0},
         {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0}},
        // turn 2
        {{2, 1, 0, 0, 0},
         {0, 1, 0, 0, 0, 2, 1, 0, 0, 0},
         {0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2, 1, 0, 0, 0}},
        // turn 3
        {{1, 1, 1, 1, 0},
         {2, 1, 0, 0, 0, 1, 1, 1, 1, 0},
         {0, 1, 0, 0, 0, 2, 1, 0, 0, 0, 1, 1, 1, 1, 0}}};

    for (std::size_t t = 0; t < turns.size(); ++t) {
        history.push_back(turns[t]);
        for (int n = 0; n < 3; ++n) CHECK(build_window(history, n) == expect[t][n]);
    }
}

TEST_CASE("window width law and trailing block") {
    Rng rng(5);
    std::vector<std::vector<double>> history;
    for (int t = 0; t < 6; ++t) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.next_double(-2, 2);
        history.push_back(v);
        for (int n = 0; n < 4; ++n) {
            auto w = build_window(history, n);
            REQUIRE(w.size() == 4u * (n + 1));
            CHECK(std::vector<double>(w.end() - 4, w.end()) == history.back());
        }
    }
}

TEST_CASE("window rejects inconsistent widths") {
    std::vector<std::vector<double>> history = {{1, 2}, {1, 2, 3}};
    CHECK_THROWS(build_window(history, 1));
}

TEST_CASE("padded turns are entirely zero even with the prev-act feature") {
    DialogCorpus corpus = load_corpus(dmtest::data_file("fig3.jsonl"));
    EncoderConfig cfg = dr_config(1, true);
    cfg.schema = corpus.schema;
    FeatureDataset ds = build_dataset(corpus, cfg);
    REQUIRE(ds.inputs.size() == 3);
    // first turn: pad block all zero (no -1 in the pad), then codes and -1
    CHECK(ds.inputs[0] ==
          std::vector<double>{0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, -1});
    // second turn: previous block carries the gold prev act of turn 1 (-1)
    CHECK(ds.inputs[1] ==
          std::vector<double>{0, 1, 0, 0, 0, -1, 2, 1, 0, 0, 0, 0});
}

TEST_CASE("normalizer: population stddev, zero-variance guard, symmetry") {
    Normalizer n = fit_normalizer({{0}, {2}});
    CHECK(n.mean == std::vector<double>{1});
    CHECK(n.scale == std::vector<double>{1});

    n = fit_normalizer({{5}, {5}, {5}});
    CHECK(n.mean == std::vector<double>{5});
    CHECK(n.scale == std::vector<double>{1});

    n = fit_normalizer({{-1}, {1}});
    CHECK(normalize({-1}, n) == std::vector<double>{-1});
    CHECK(normalize({1}, n) == std::vector<double>{1});
}

TEST_CASE("normalize: direct substitution and identities") {
    Normalizer n{{1}, {2}};
    CHECK(normalize({3}, n) == std::vector<double>{1});
    CHECK(normalize({1}, n) == std::vector<double>{0});
    Normalizer id{{0, 0}, {1, 1}};
    CHECK(normalize({4, -7}, id) == std::vector<double>{4, -7});
    CHECK_THROWS(normalize({1, 2, 3}, n));
}

TEST_CASE("fit_normalizer rejects empty input") {
    CHECK_THROWS(fit_normalizer({}));
}

TEST_CASE("build_dataset: register and changes goldens, context 0") {
    DialogCorpus corpus = load_corpus(dmtest::data_file("fig3.jsonl"));
    EncoderConfig cfg = dr_config();
    cfg.schema = corpus.schema;

    FeatureDataset dr = build_dataset(corpus, cfg);
    REQUIRE(dr.size() == 3);
    CHECK(dr.inputs[0] == std::vector<double>{0, 1, 0, 0, 0});
    CHECK(dr.inputs[1] == std::vector<double>{2, 1, 0, 0, 0});
    CHECK(dr.inputs[2] == std::vector<double>{1, 1, 1, 1, 0});

    cfg.mode = FeatureMode::DialogChanges;
    FeatureDataset dch = build_dataset(corpus, cfg);
    CHECK(dch.inputs[0] == std::vector<double>{0, 1, 0, 0, 0});
    CHECK(dch.inputs[1] == std::vector<double>{2, 0, 0, 0, 0});
    CHECK(dch.inputs[2] == std::vector<double>{4, 0, 1, 1, 0});
}

TEST_CASE("build_dataset: empty corpus, cardinality, label indices") {
    DialogCorpus empty;
    empty.schema = travel_schema();
    CHECK(build_dataset(empty, dr_config()).size() == 0);

    DialogCorpus corpus = load_corpus(dmtest::data_file("fig3.jsonl"));
    EncoderConfig cfg = dr_config(2);
    cfg.schema = corpus.schema;
    FeatureDataset ds = build_dataset(corpus, cfg);
    CHECK(ds.size() == corpus.total_turns());
    CHECK(ds.labels == std::vector<int>{0, 1, 2});
}

TEST_CASE("code domains and register monotonicity under random traffic") {
    SlotSchema schema = travel_schema();
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        DialogRegister reg = DialogRegister::initial(schema);
        std::vector<int> seen_nonzero(schema.slots.size(), 0);
        for (int t = 0; t < 20; ++t) {
            UserObservation o;
            for (std::size_t s = 0; s < schema.slots.size(); ++s)
                if (rng.bernoulli(0.3))
                    o.slot_values[schema.slots[s]] = rng.next_double();
            DialogRegister next = update_register(reg, o, 0.5, schema);
            DialogChanges ch = derive_changes(reg, next);
            for (std::size_t s = 0; s < schema.slots.size(); ++s) {
                int dr = next.codes[s];
                int dc = ch.codes[s];
                CHECK((dr == 0 || dr == 1 || dr == 2));
                CHECK((dc == 0 || dc == 1 || dc == 2 || dc == 4));
                if (seen_nonzero[s]) CHECK(dr != 0); // presence never reverts
                if (dr != 0) seen_nonzero[s] = 1;
            }
            reg = next;
        }
    }
}

TEST_CASE("all-high confidences reconstruct the mention indicator") {
    SlotSchema schema = travel_schema();
    Rng rng(123);
    DialogRegister reg = DialogRegister::initial(schema);
    std::vector<int> mentioned(schema.slots.size(), 0);
    for (int t = 0; t < 10; ++t) {
        UserObservation o;
        for (std::size_t s = 0; s < schema.slots.size(); ++s)
            if (rng.bernoulli(0.4)) {
                o.slot_values[schema.slots[s]] = 0.9;
                mentioned[s] = 1;
            }
        reg = update_register(reg, o, 0.5, schema);
        CHECK(reg.codes == mentioned);
    }
}

TEST_CASE("csv dump: header plus one row per sample") {
    DialogCorpus corpus = load_corpus(dmtest::data_file("fig3.jsonl"));
    EncoderConfig cfg = dr_config();
    cfg.schema = corpus.schema;
    std::string csv = dataset_to_csv(build_dataset(corpus, cfg));
    CHECK(csv.rfind("f0,f1,f2,f3,f4,label\n", 0) == 0);
    CHECK(csv.find("2,1,0,0,0,1\n") != std::string::npos);
}

TEST_CASE("mode names round-trip") {
    CHECK(feature_mode_from_string("dr") == FeatureMode::DialogRegister);
    CHECK(feature_mode_from_string("dch") == FeatureMode::DialogChanges);
    CHECK(to_string(FeatureMode::DialogRegister) == "dr");
    CHECK(to_string(FeatureMode::DialogChanges) == "dch");
    CHECK_THROWS(feature_mode_from_string("nope"));
}

} // TEST_SUITE
