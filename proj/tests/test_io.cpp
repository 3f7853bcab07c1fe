#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pgg/csv.hpp"
#include "pgg/errors.hpp"
#include "pgg/io.hpp"
#include "pgg/pipeline.hpp"

using namespace pgg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pgg_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("csv round trip with quoting") {
    TempDir tmp;
    write_csv(tmp.file("t.csv"), {"a", "b"}, {{"1", "x,y"}, {"2", "he said \"hi\""}});
    const auto t = read_csv(tmp.file("t.csv"));
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "he said \"hi\"");
    CHECK(t.col("b") == 1);
    CHECK_THROWS_AS((void)t.col("missing"), Error);
}

TEST_CASE("designs csv round trip preserves every parameter") {
    TempDir tmp;
    const auto designs = sobol_designs(32, true, 5);
    write_designs_csv(tmp.file("designs.csv"), designs);
    const auto back = read_designs_csv(tmp.file("designs.csv"));
    REQUIRE(back.size() == designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) {
        CHECK(back[i].config_id == designs[i].config_id);
        CHECK(back[i].group_size == designs[i].group_size);
        CHECK(std::fabs(back[i].mpcr - designs[i].mpcr) < 1e-12);
        CHECK(std::fabs(back[i].reward_impact - designs[i].reward_impact) < 1e-12);
        CHECK(back[i].contribution_type == designs[i].contribution_type);
        CHECK(back[i].actor_anonymity == designs[i].actor_anonymity);
    }
}

TEST_CASE("simulate -> write -> ingest round trip reproduces metrics") {
    TempDir tmp;
    const auto designs = sobol_designs(16, true, 9);
    write_designs_csv(tmp.file("designs.csv"), designs);

    SimulateOptions opt;
    opt.designs_csv = tmp.file("designs.csv");
    opt.master_seed = 31337;
    opt.outdir = tmp.str();
    opt.trials = 1;
    opt.dropout_prob = 0.1;
    const auto summary = run_simulate(opt);
    CHECK(summary.games >= 30);  // 16 configs x 2 arms, minus games lost to full dropout

    const auto outcomes_direct = read_outcomes_csv(tmp.file("outcomes.csv"));

    // ingest the written tables via the identity schema and recompute
    SchemaMap schema = default_schema_map();
    schema.drop_multiplier_one = false;
    schema.outlier_normalized_efficiency = 1e18;
    const auto ingested = ingest_dataset(tmp.str(), schema);
    REQUIRE(static_cast<int>(ingested.outcomes.size()) == summary.games);

    std::map<std::string, OutcomeRow> by_id;
    for (const auto& o : ingested.outcomes) by_id[o.game_id] = o;
    for (const auto& direct : outcomes_direct) {
        const auto& re = by_id.at(direct.game_id);
        CHECK(std::fabs(re.efficiency - direct.efficiency) < 1e-12);
        CHECK(re.normalized_efficiency.has_value() == direct.normalized_efficiency.has_value());
        if (re.normalized_efficiency) {
            CHECK(std::fabs(*re.normalized_efficiency - *direct.normalized_efficiency) < 1e-12);
        }
        CHECK(std::fabs(re.mean_contribution_fraction - direct.mean_contribution_fraction) <
              1e-12);
        CHECK(re.included == direct.included);
    }

    // table read-back via the explicit-configs path gives the same metrics
    const auto games_back = read_game_tables(tmp.str(), designs);
    REQUIRE(static_cast<int>(games_back.size()) == summary.games);
    for (const auto& g : games_back) {
        const auto outcome = compute_outcome(g.log);
        const auto& direct = by_id.at(g.game_id);
        CHECK(std::fabs(outcome.efficiency - direct.efficiency) < 1e-12);
    }
}

TEST_CASE("ingest filter report counts sum to the input") {
    TempDir tmp;
    // hand-built dataset: one clean game, one multiplier-1 game, one
    // technically excluded game, one under-recruited game
    std::vector<PggConfig> configs(2);
    configs[0].config_id = "ok";
    configs[0].group_size = 2;
    configs[0].game_length = 1;
    configs[0].mpcr = 1.0;  // multiplier 2
    configs[1].config_id = "deg";
    configs[1].group_size = 2;
    configs[1].game_length = 1;
    configs[1].mpcr = 0.5;  // multiplier exactly 1
    write_designs_csv(tmp.file("designs.csv"), configs);

    write_csv(tmp.file("games.csv"),
              {"game_id", "config_id", "arm", "intended_size", "started_size", "seed"},
              {{"g1", "ok", "control", "2", "2", "0"},
               {"g2", "deg", "control", "2", "2", "0"},
               {"g3", "ok", "treatment", "2", "2", "0"},
               {"g4", "ok", "control", "20", "16", "0"}});
    write_csv(tmp.file("decisions.csv"), {"game_id", "round", "player_id", "contribution"},
              {{"g1", "1", "0", "20"},
               {"g1", "1", "1", "0"},
               {"g2", "1", "0", "20"},
               {"g2", "1", "1", "20"},
               {"g3", "1", "0", "10"},
               {"g3", "1", "1", "10"},
               {"g4", "1", "0", "20"},  // 16 of 20 intended start: 20% missing
               {"g4", "1", "1", "20"},
               {"g4", "1", "2", "20"},
               {"g4", "1", "3", "20"},
               {"g4", "1", "4", "20"},
               {"g4", "1", "5", "20"},
               {"g4", "1", "6", "20"},
               {"g4", "1", "7", "20"},
               {"g4", "1", "8", "20"},
               {"g4", "1", "9", "20"},
               {"g4", "1", "10", "20"},
               {"g4", "1", "11", "20"},
               {"g4", "1", "12", "20"},
               {"g4", "1", "13", "20"},
               {"g4", "1", "14", "20"},
               {"g4", "1", "15", "20"}});
    write_csv(tmp.file("sanctions.csv"), {"game_id", "round", "actor", "target", "units", "kind"},
              {});

    SchemaMap schema = default_schema_map();
    schema.exclude_game_ids = {"g3"};
    const auto result = ingest_dataset(tmp.str(), schema);
    const auto& rep = result.report;
    CHECK(rep.input_games == 4);
    CHECK(rep.technical_excluded == 1);
    CHECK(rep.multiplier_one_excluded == 1);
    CHECK(rep.recruitment_excluded == 1);
    CHECK(rep.retained == 1);
    CHECK(rep.input_games == rep.technical_excluded + rep.multiplier_one_excluded +
                                 rep.outlier_excluded + rep.recruitment_excluded + rep.retained);

    REQUIRE(result.outcomes.size() == 2);  // g1 retained, g4 flagged excluded
    CHECK(result.outcomes[0].game_id == "g1");
    // one full contributor, one defector, multiplier 2: (60-40)/(80-40)
    CHECK(*result.outcomes[0].normalized_efficiency == doctest::Approx(0.5));
}

TEST_CASE("schema map translates column names and values") {
    TempDir tmp;
    write_csv(tmp.file("conds.csv"),
              {"cond", "phase", "n_players", "rounds", "ctype", "frame", "m", "chat", "vis",
               "anon", "horizon", "cost", "impact", "rew", "rew_mag"},
              {{"c1", "learning", "2", "1", "V", "IN", "1.0", "0", "0", "H", "0", "1", "1", "0",
                "0.5"}});
    write_csv(tmp.file("sessions.csv"), {"sid", "cond", "treat", "n", "n0", "rng"},
              {{"s1", "c1", "yes", "2", "2", "0"}});
    write_csv(tmp.file("moves.csv"), {"sid", "r", "p", "c"}, {{"s1", "1", "0", "20"},
                                                              {"s1", "1", "1", "0"}});

    std::ofstream schema_file(tmp.file("schema.json"));
    schema_file << R"({
      "tables": {
        "configs": {"file": "conds.csv",
          "columns": {"config_id": "cond", "wave": "phase", "group_size": "n_players",
                      "game_length": "rounds", "contribution_type": "ctype",
                      "contribution_framing": "frame", "mpcr": "m", "communication": "chat",
                      "peer_outcome_visibility": "vis", "actor_anonymity": "anon",
                      "horizon_knowledge": "horizon", "peer_incentive_cost": "cost",
                      "punishment_impact": "impact", "reward_enabled": "rew",
                      "reward_impact": "rew_mag"},
          "values": {"contribution_type": {"V": "variable"},
                     "contribution_framing": {"IN": "opt_in"},
                     "actor_anonymity": {"H": "hidden"}}},
        "games": {"file": "sessions.csv",
          "columns": {"game_id": "sid", "config_id": "cond", "arm": "treat",
                      "intended_size": "n", "started_size": "n0", "seed": "rng"},
          "values": {"arm": {"yes": "treatment", "no": "control"}}},
        "decisions": {"file": "moves.csv",
          "columns": {"game_id": "sid", "round": "r", "player_id": "p", "contribution": "c"}},
        "sanctions": {"file": ""}
      }
    })";
    schema_file.close();

    const SchemaMap schema = load_schema_map(tmp.file("schema.json"));
    const auto result = ingest_dataset(tmp.str(), schema);
    REQUIRE(result.configs.size() == 1);
    CHECK(result.configs[0].group_size == 2);
    CHECK(result.configs[0].contribution_type == ContributionType::variable);
    REQUIRE(result.outcomes.size() == 1);
    CHECK(result.outcomes[0].treatment_arm);
    CHECK(result.outcomes[0].efficiency == doctest::Approx(60.0 / 80.0));
}

TEST_CASE("a missing mapped column names the column") {
    TempDir tmp;
    write_csv(tmp.file("designs.csv"), {"config_id", "wave"}, {});
    write_csv(tmp.file("games.csv"),
              {"game_id", "config_id", "arm", "intended_size", "started_size", "seed"}, {});
    write_csv(tmp.file("decisions.csv"), {"game_id", "round", "player_id"}, {});
    write_csv(tmp.file("sanctions.csv"), {"game_id", "round", "actor", "target", "units", "kind"},
              {});
    try {
        (void)ingest_dataset(tmp.str(), default_schema_map());
        FAIL("expected ingestion error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ingestion);
    }
    // the decisions table is fine but lacks "contribution"
    SchemaMap only_decisions = default_schema_map();
    write_csv(tmp.file("designs.csv"),
              {"config_id", "wave", "group_size", "game_length", "contribution_type",
               "contribution_framing", "mpcr", "communication", "peer_outcome_visibility",
               "actor_anonymity", "horizon_knowledge", "peer_incentive_cost", "punishment_impact",
               "reward_enabled", "reward_impact"},
              {});
    try {
        (void)ingest_dataset(tmp.str(), only_decisions);
        FAIL("expected ingestion error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("contribution") != std::string::npos);
    }
}

TEST_CASE("outcomes csv keeps undefined normalized efficiency as an empty field") {
    TempDir tmp;
    std::vector<OutcomeRow> rows(2);
    rows[0].game_id = "a";
    rows[0].config_id = "c";
    rows[0].efficiency = 1.0;
    rows[0].normalized_efficiency = std::nullopt;
    rows[1].game_id = "b";
    rows[1].config_id = "c";
    rows[1].efficiency = 0.5;
    rows[1].normalized_efficiency = 0.25;
    write_outcomes_csv(tmp.file("o.csv"), rows);
    const auto back = read_outcomes_csv(tmp.file("o.csv"));
    CHECK_FALSE(back[0].normalized_efficiency.has_value());
    REQUIRE(back[1].normalized_efficiency.has_value());
    CHECK(*back[1].normalized_efficiency == doctest::Approx(0.25));
}

TEST_CASE("records csv round trip") {
    TempDir tmp;
    ExperimentRecord r;
    r.config_id = "L007";
    r.wave = Wave::learning;
    r.config = sobol_designs(8, true, 2)[7];
    r.config.config_id = "L007";
    r.control_efficiency = 71.25;
    r.treatment_efficiency = 63.5;
    r.n_control = 1;
    r.n_treatment = 1;
    write_records_csv(tmp.file("r.csv"), {r});
    const auto back = read_records_csv(tmp.file("r.csv"));
    REQUIRE(back.size() == 1);
    CHECK(back[0].config_id == "L007");
    CHECK(back[0].control_efficiency == doctest::Approx(71.25));
    CHECK(back[0].treatment_efficiency == doctest::Approx(63.5));
    CHECK(back[0].config.group_size == r.config.group_size);
}

TEST_CASE("model json round trip preserves predictions") {
    TempDir tmp;
    // reuse the synthetic generator shape: records from designs
    std::vector<ExperimentRecord> learning;
    const auto designs = sobol_designs(64, true, 21);
    Rng rng(1);
    for (std::size_t i = 0; i < designs.size(); ++i) {
        ExperimentRecord r;
        r.config = designs[i];
        r.config_id = designs[i].config_id;
        r.control_efficiency = 40.0 + 40.0 * rng.uniform();
        r.treatment_efficiency = 0.9 * r.control_efficiency + rng.normal();
        learning.push_back(r);
    }
    const auto model = train_model(learning, "enet", 0.05, 0.2, true);
    save_model_json(tmp.file("model.json"), model);
    const auto loaded = load_model_json(tmp.file("model.json"));
    for (int i = 0; i < 5; ++i) {
        const auto& r = learning[static_cast<std::size_t>(i) * 7];
        CHECK(predict_one(loaded, r) == doctest::Approx(predict_one(model, r)).epsilon(1e-12));
    }
}

TEST_CASE("manifest digests are stable") {
    TempDir tmp;
    {
        std::ofstream f(tmp.file("x.txt"), std::ios::binary);
        f << "hello";
    }
    const auto d1 = file_digest_hex(tmp.file("x.txt"));
    const auto d2 = file_digest_hex(tmp.file("x.txt"));
    CHECK(d1 == d2);
    CHECK(d1.size() == 16);
    {
        std::ofstream f(tmp.file("x.txt"), std::ios::binary);
        f << "hellp";
    }
    CHECK(file_digest_hex(tmp.file("x.txt")) != d1);
}
