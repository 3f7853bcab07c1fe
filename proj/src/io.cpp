#include "pgg/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "pgg/csv.hpp"
#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> design_header() {
    std::vector<std::string> h = {"config_id", "wave"};
    for (const char* name : kDesignParameterNames) h.push_back(name);
    return h;
}

std::vector<std::string> config_row(const PggConfig& c) {
    return {c.config_id,
            to_string(c.wave),
            std::to_string(c.group_size),
            std::to_string(c.game_length),
            to_string(c.contribution_type),
            to_string(c.contribution_framing),
            fmt_real(c.mpcr),
            c.communication ? "1" : "0",
            c.peer_outcome_visibility ? "1" : "0",
            to_string(c.actor_anonymity),
            c.horizon_knowledge ? "1" : "0",
            std::to_string(c.peer_incentive_cost),
            std::to_string(c.punishment_impact),
            c.reward_enabled ? "1" : "0",
            fmt_real(c.reward_impact)};
}

PggConfig config_from_fields(const std::map<std::string, std::string>& f) {
    PggConfig c;
    c.config_id = f.at("config_id");
    if (auto it = f.find("wave"); it != f.end() && !it->second.empty())
        c.wave = wave_from_string(it->second);
    c.group_size = parse_int(f.at("group_size"));
    c.game_length = parse_int(f.at("game_length"));
    c.contribution_type = contribution_type_from_string(f.at("contribution_type"));
    c.contribution_framing = contribution_framing_from_string(f.at("contribution_framing"));
    c.mpcr = parse_real(f.at("mpcr"));
    c.communication = parse_bool01(f.at("communication"));
    c.peer_outcome_visibility = parse_bool01(f.at("peer_outcome_visibility"));
    c.actor_anonymity = actor_anonymity_from_string(f.at("actor_anonymity"));
    c.horizon_knowledge = parse_bool01(f.at("horizon_knowledge"));
    c.peer_incentive_cost = parse_int(f.at("peer_incentive_cost"));
    c.punishment_impact = parse_int(f.at("punishment_impact"));
    c.reward_enabled = parse_bool01(f.at("reward_enabled"));
    c.reward_impact = parse_real(f.at("reward_impact"));
    return c;
}

int round_half_away(double x) { return static_cast<int>(std::llround(x)); }

}  // namespace

void write_designs_csv(const std::string& path, const std::vector<PggConfig>& configs) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(configs.size());
    for (const auto& c : configs) rows.push_back(config_row(c));
    write_csv(path, design_header(), rows);
}

std::vector<PggConfig> read_designs_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto header = design_header();
    std::vector<int> idx;
    idx.reserve(header.size());
    for (const auto& name : header) idx.push_back(t.col(name));
    std::vector<PggConfig> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        std::map<std::string, std::string> f;
        for (std::size_t i = 0; i < header.size(); ++i)
            f[header[i]] = row.at(static_cast<std::size_t>(idx[i]));
        out.push_back(config_from_fields(f));
    }
    return out;
}

void write_game_tables(const std::string& dir, const std::vector<BatchGame>& games) {
    fs::create_directories(dir);
    std::vector<std::vector<std::string>> game_rows;
    std::vector<std::vector<std::string>> decision_rows;
    std::vector<std::vector<std::string>> sanction_rows;
    std::vector<std::vector<std::string>> balance_rows;

    for (const auto& g : games) {
        const GameLog& log = g.log;
        game_rows.push_back({g.game_id, log.config.config_id,
                             log.config.punishment_enabled ? "treatment" : "control",
                             std::to_string(log.intended_size), std::to_string(log.started_size),
                             std::to_string(log.seed)});
        std::vector<double> balance(static_cast<std::size_t>(log.intended_size), kInitialBalance);
        for (const auto& r : log.rounds) {
            for (std::size_t pid = 0; pid < r.contributions.size(); ++pid) {
                if (!r.contributions[pid].has_value()) continue;
                decision_rows.push_back({g.game_id, std::to_string(r.round), std::to_string(pid),
                                         std::to_string(*r.contributions[pid])});
            }
            for (const auto& s : r.sanctions) {
                sanction_rows.push_back({g.game_id, std::to_string(r.round),
                                         std::to_string(s.actor), std::to_string(s.target),
                                         std::to_string(s.units), to_string(s.kind)});
            }
            for (std::size_t pid = 0; pid < r.net.size(); ++pid) {
                if (!r.net[pid].has_value()) continue;
                balance[pid] += *r.net[pid];
                balance_rows.push_back({g.game_id, std::to_string(r.round), std::to_string(pid),
                                        fmt_real(*r.net[pid]), fmt_real(balance[pid])});
            }
        }
    }
    write_csv(dir + "/games.csv",
              {"game_id", "config_id", "arm", "intended_size", "started_size", "seed"}, game_rows);
    write_csv(dir + "/decisions.csv", {"game_id", "round", "player_id", "contribution"},
              decision_rows);
    write_csv(dir + "/sanctions.csv", {"game_id", "round", "actor", "target", "units", "kind"},
              sanction_rows);
    write_csv(dir + "/balances.csv", {"game_id", "round", "player_id", "net", "balance"},
              balance_rows);
}

namespace {

// Rebuilds one game's rounds from contribution/sanction rows, recomputing
// shares and nets from the game mechanics.
GameLog reconstruct_log(const PggConfig& config, int intended_size, std::uint64_t seed,
                        const std::map<int, std::map<int, int>>& contributions_by_round,
                        const std::map<int, std::vector<SanctionAction>>& sanctions_by_round) {
    GameLog log;
    log.config = config;
    log.intended_size = intended_size;
    log.seed = seed;

    const double multiplier = config.multiplier();
    int last_round = 0;
    for (const auto& [round, _] : contributions_by_round) last_round = std::max(last_round, round);

    for (int r = 1; r <= last_round; ++r) {
        auto it = contributions_by_round.find(r);
        if (it == contributions_by_round.end() || it->second.empty()) continue;
        const auto& contribs = it->second;
        RoundRecord rec;
        rec.round = r;
        rec.contributions.assign(static_cast<std::size_t>(intended_size), std::nullopt);
        rec.net.assign(static_cast<std::size_t>(intended_size), std::nullopt);
        int fund = 0;
        for (const auto& [pid, c] : contribs) {
            rec.contributions[static_cast<std::size_t>(pid)] = c;
            fund += c;
        }
        rec.fund_total = fund;
        rec.active_count = static_cast<int>(contribs.size());
        rec.share = round_half_away(multiplier * fund / rec.active_count);

        std::vector<double> spend(static_cast<std::size_t>(intended_size), 0.0);
        std::vector<double> pun(static_cast<std::size_t>(intended_size), 0.0);
        std::vector<double> rew(static_cast<std::size_t>(intended_size), 0.0);
        if (auto sit = sanctions_by_round.find(r); sit != sanctions_by_round.end()) {
            rec.sanctions = sit->second;
            for (const auto& s : rec.sanctions) {
                const double coins = static_cast<double>(s.units) * config.peer_incentive_cost;
                spend[static_cast<std::size_t>(s.actor)] += coins;
                if (s.kind == SanctionKind::punish)
                    pun[static_cast<std::size_t>(s.target)] += coins * config.punishment_impact;
                else
                    rew[static_cast<std::size_t>(s.target)] += coins * config.reward_impact;
            }
        }
        for (const auto& [pid, c] : contribs) {
            const auto i = static_cast<std::size_t>(pid);
            rec.net[i] = (kEndowment - c) + rec.share - spend[i] - pun[i] + rew[i];
        }
        log.rounds.push_back(std::move(rec));
    }
    log.started_size =
        (!log.rounds.empty() && log.rounds.front().round == 1) ? log.rounds.front().active_count : 0;
    log.truncated = last_round < config.game_length;
    log.final_balances.assign(static_cast<std::size_t>(intended_size), kInitialBalance);
    for (const auto& r : log.rounds) {
        for (std::size_t pid = 0; pid < r.net.size(); ++pid) {
            if (r.net[pid].has_value()) log.final_balances[pid] += *r.net[pid];
        }
    }
    return log;
}

}  // namespace

namespace {

IngestResult ingest_tables(const std::string& dir, const SchemaMap& schema,
                           std::vector<PggConfig> configs, FilterReport report);

}  // namespace

std::vector<BatchGame> read_game_tables(const std::string& dir,
                                        const std::vector<PggConfig>& configs) {
    // schema-driven read-back with every filter disabled
    SchemaMap identity = default_schema_map();
    identity.exclude_game_ids.clear();
    identity.drop_multiplier_one = false;
    identity.outlier_normalized_efficiency = std::numeric_limits<double>::infinity();
    IngestResult res = ingest_tables(dir, identity, configs, {});
    return std::move(res.games);
}

void write_outcomes_csv(const std::string& path, const std::vector<OutcomeRow>& rows) {
    std::vector<std::vector<std::string>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back({r.game_id, r.config_id, r.treatment_arm ? "treatment" : "control",
                       fmt_real(r.efficiency),
                       r.normalized_efficiency ? fmt_real(*r.normalized_efficiency) : "",
                       fmt_real(r.mean_contribution_fraction), r.included ? "1" : "0"});
    }
    write_csv(path,
              {"game_id", "config_id", "arm", "efficiency", "normalized_efficiency",
               "mean_contribution_fraction", "included"},
              out);
}

std::vector<OutcomeRow> read_outcomes_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_game = t.col("game_id");
    const int c_cfg = t.col("config_id");
    const int c_arm = t.col("arm");
    const int c_eff = t.col("efficiency");
    const int c_norm = t.col("normalized_efficiency");
    const int c_mcf = t.col("mean_contribution_fraction");
    const int c_inc = t.col("included");
    std::vector<OutcomeRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        OutcomeRow o;
        o.game_id = r.at(static_cast<std::size_t>(c_game));
        o.config_id = r.at(static_cast<std::size_t>(c_cfg));
        o.treatment_arm = r.at(static_cast<std::size_t>(c_arm)) == "treatment";
        o.efficiency = parse_real(r.at(static_cast<std::size_t>(c_eff)));
        const std::string& norm = r.at(static_cast<std::size_t>(c_norm));
        if (!norm.empty()) o.normalized_efficiency = parse_real(norm);
        o.mean_contribution_fraction = parse_real(r.at(static_cast<std::size_t>(c_mcf)));
        o.included = parse_bool01(r.at(static_cast<std::size_t>(c_inc)));
        rows.push_back(std::move(o));
    }
    return rows;
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records) {
    auto header = design_header();
    header.insert(header.end(),
                  {"control_efficiency", "treatment_efficiency", "n_control", "n_treatment"});
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        auto row = config_row(r.config);
        row[0] = r.config_id;
        row[1] = to_string(r.wave);
        row.push_back(fmt_real(r.control_efficiency));
        row.push_back(fmt_real(r.treatment_efficiency));
        row.push_back(std::to_string(r.n_control));
        row.push_back(std::to_string(r.n_treatment));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto dh = design_header();
    std::vector<int> idx;
    for (const auto& name : dh) idx.push_back(t.col(name));
    const int c_ce = t.col("control_efficiency");
    const int c_te = t.col("treatment_efficiency");
    const int c_nc = t.col("n_control");
    const int c_nt = t.col("n_treatment");
    std::vector<ExperimentRecord> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        std::map<std::string, std::string> f;
        for (std::size_t i = 0; i < dh.size(); ++i)
            f[dh[i]] = row.at(static_cast<std::size_t>(idx[i]));
        ExperimentRecord r;
        r.config = config_from_fields(f);
        r.config_id = r.config.config_id;
        r.wave = r.config.wave;
        r.control_efficiency = parse_real(row.at(static_cast<std::size_t>(c_ce)));
        r.treatment_efficiency = parse_real(row.at(static_cast<std::size_t>(c_te)));
        r.n_control = parse_int(row.at(static_cast<std::size_t>(c_nc)));
        r.n_treatment = parse_int(row.at(static_cast<std::size_t>(c_nt)));
        out.push_back(std::move(r));
    }
    return out;
}

SchemaMap default_schema_map() {
    SchemaMap s;
    s.configs.file = "designs.csv";
    for (const char* name : {"config_id", "wave"}) s.configs.columns[name] = name;
    for (const char* name : kDesignParameterNames) s.configs.columns[name] = name;
    s.games.file = "games.csv";
    for (const char* name : {"game_id", "config_id", "arm", "intended_size", "started_size", "seed"})
        s.games.columns[name] = name;
    s.decisions.file = "decisions.csv";
    for (const char* name : {"game_id", "round", "player_id", "contribution"})
        s.decisions.columns[name] = name;
    s.sanctions.file = "sanctions.csv";
    for (const char* name : {"game_id", "round", "actor", "target", "units", "kind"})
        s.sanctions.columns[name] = name;
    return s;
}

namespace {

TableMap table_map_from_json(const json& j, const TableMap& defaults) {
    TableMap t = defaults;
    if (j.contains("file")) t.file = j.at("file").get<std::string>();
    if (j.contains("columns")) {
        for (const auto& [canonical, source] : j.at("columns").items())
            t.columns[canonical] = source.get<std::string>();
    }
    if (j.contains("values")) {
        for (const auto& [col, mapping] : j.at("values").items()) {
            for (const auto& [src, canonical] : mapping.items())
                t.values[col][src] = canonical.get<std::string>();
        }
    }
    return t;
}

}  // namespace

SchemaMap load_schema_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open schema map " + path);
    json j;
    in >> j;
    SchemaMap s = default_schema_map();
    if (j.contains("tables")) {
        const auto& tables = j.at("tables");
        if (tables.contains("configs")) s.configs = table_map_from_json(tables.at("configs"), s.configs);
        if (tables.contains("games")) s.games = table_map_from_json(tables.at("games"), s.games);
        if (tables.contains("decisions"))
            s.decisions = table_map_from_json(tables.at("decisions"), s.decisions);
        if (tables.contains("sanctions"))
            s.sanctions = table_map_from_json(tables.at("sanctions"), s.sanctions);
    }
    if (j.contains("filters")) {
        const auto& f = j.at("filters");
        if (f.contains("exclude_game_ids"))
            s.exclude_game_ids = f.at("exclude_game_ids").get<std::vector<std::string>>();
        if (f.contains("outlier_normalized_efficiency"))
            s.outlier_normalized_efficiency = f.at("outlier_normalized_efficiency").get<double>();
        if (f.contains("drop_multiplier_one"))
            s.drop_multiplier_one = f.at("drop_multiplier_one").get<bool>();
        if (f.contains("any_time_dropout"))
            s.any_time_dropout = f.at("any_time_dropout").get<bool>();
    }
    return s;
}

namespace {

// Pulls a canonical field out of a source row through the table map.
class MappedTable {
public:
    MappedTable(const std::string& dir, const TableMap& map) : map_(map) {
        table_ = read_csv(dir + "/" + map.file);
        for (const auto& [canonical, source] : map.columns) {
            const int c = table_.col(source, false);
            if (c < 0) {
                throw Error(ErrorCode::ingestion, "dataset table " + map.file +
                                                      " is missing mapped column \"" + source +
                                                      "\" (canonical \"" + canonical + "\")");
            }
            index_[canonical] = c;
        }
    }

    const CsvTable& table() const { return table_; }

    std::string get(const std::vector<std::string>& row, const std::string& canonical) const {
        auto it = index_.find(canonical);
        if (it == index_.end()) {
            throw Error(ErrorCode::ingestion, "column \"" + canonical + "\" is not mapped");
        }
        std::string value = row.at(static_cast<std::size_t>(it->second));
        if (auto vt = map_.values.find(canonical); vt != map_.values.end()) {
            if (auto vv = vt->second.find(value); vv != vt->second.end()) value = vv->second;
        }
        return value;
    }

private:
    TableMap map_;
    CsvTable table_;
    std::map<std::string, int> index_;
};

}  // namespace

IngestResult ingest_dataset(const std::string& dir, const SchemaMap& schema) {
    std::vector<PggConfig> configs;
    FilterReport report;
    MappedTable configs_t(dir, schema.configs);
    for (const auto& row : configs_t.table().rows) {
        try {
            std::map<std::string, std::string> f;
            f["config_id"] = configs_t.get(row, "config_id");
            f["wave"] = configs_t.get(row, "wave");
            for (const char* name : kDesignParameterNames) f[name] = configs_t.get(row, name);
            configs.push_back(config_from_fields(f));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ingestion) ++report.parse_failures;
            else throw;
        }
    }
    return ingest_tables(dir, schema, std::move(configs), report);
}

namespace {

IngestResult ingest_tables(const std::string& dir, const SchemaMap& schema,
                           std::vector<PggConfig> configs, FilterReport report) {
    IngestResult result;
    result.configs = std::move(configs);
    result.report = report;
    std::map<std::string, const PggConfig*> config_by_id;
    for (const auto& c : result.configs) config_by_id[c.config_id] = &c;

    struct GameHeader {
        std::string config_id;
        bool treatment = false;
        int intended_size = 0;
        std::uint64_t seed = 0;
    };
    std::map<std::string, GameHeader> headers;
    std::vector<std::string> game_order;
    MappedTable games_t(dir, schema.games);
    for (const auto& row : games_t.table().rows) {
        try {
            GameHeader h;
            const std::string game_id = games_t.get(row, "game_id");
            h.config_id = games_t.get(row, "config_id");
            const std::string arm = games_t.get(row, "arm");
            if (arm != "treatment" && arm != "control") {
                throw Error(ErrorCode::ingestion, "unknown arm value \"" + arm + "\"");
            }
            h.treatment = arm == "treatment";
            h.intended_size = parse_int(games_t.get(row, "intended_size"));
            h.seed = static_cast<std::uint64_t>(std::stoull(games_t.get(row, "seed")));
            headers[game_id] = h;
            game_order.push_back(game_id);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ingestion) ++result.report.parse_failures;
            else throw;
        } catch (const std::exception&) {
            ++result.report.parse_failures;
        }
    }
    result.report.input_games = static_cast<int>(game_order.size());

    std::map<std::string, std::map<int, std::map<int, int>>> contributions;  // game -> round -> pid -> c
    MappedTable decisions_t(dir, schema.decisions);
    for (const auto& row : decisions_t.table().rows) {
        try {
            const std::string game_id = decisions_t.get(row, "game_id");
            const int round = parse_int(decisions_t.get(row, "round"));
            const int pid = parse_int(decisions_t.get(row, "player_id"));
            const int c = parse_int(decisions_t.get(row, "contribution"));
            auto hit = headers.find(game_id);
            if (hit == headers.end() || round < 1 || pid < 0 || pid >= hit->second.intended_size ||
                c < 0 || c > kEndowment) {
                ++result.report.parse_failures;
                continue;
            }
            contributions[game_id][round][pid] = c;
        } catch (const Error&) {
            ++result.report.parse_failures;
        }
    }

    std::map<std::string, std::map<int, std::vector<SanctionAction>>> sanctions;
    if (!schema.sanctions.file.empty() && fs::exists(dir + "/" + schema.sanctions.file)) {
        MappedTable sanctions_t(dir, schema.sanctions);
        for (const auto& row : sanctions_t.table().rows) {
            try {
                const std::string game_id = sanctions_t.get(row, "game_id");
                const int round = parse_int(sanctions_t.get(row, "round"));
                SanctionAction a;
                a.actor = parse_int(sanctions_t.get(row, "actor"));
                a.target = parse_int(sanctions_t.get(row, "target"));
                a.units = parse_int(sanctions_t.get(row, "units"));
                a.kind = sanction_kind_from_string(sanctions_t.get(row, "kind"));
                auto hit = headers.find(game_id);
                if (hit == headers.end() || round < 1 || a.units <= 0 || a.actor < 0 ||
                    a.target < 0 || a.actor >= hit->second.intended_size ||
                    a.target >= hit->second.intended_size) {
                    ++result.report.parse_failures;
                    continue;
                }
                sanctions[game_id][round].push_back(a);
            } catch (const Error&) {
                ++result.report.parse_failures;
            }
        }
    }

    const std::set<std::string> excluded(schema.exclude_game_ids.begin(),
                                         schema.exclude_game_ids.end());
    for (const auto& game_id : game_order) {
        const GameHeader& h = headers.at(game_id);
        if (excluded.count(game_id)) {
            ++result.report.technical_excluded;
            continue;
        }
        auto cit = config_by_id.find(h.config_id);
        if (cit == config_by_id.end()) {
            ++result.report.parse_failures;
            continue;
        }
        PggConfig config = *cit->second;
        config.punishment_enabled = h.treatment;
        if (schema.drop_multiplier_one && std::fabs(config.multiplier() - 1.0) < 1e-9) {
            ++result.report.multiplier_one_excluded;
            continue;
        }
        auto conit = contributions.find(game_id);
        if (conit == contributions.end() || conit->second.empty()) {
            ++result.report.parse_failures;
            continue;
        }
        GameLog log = reconstruct_log(config, h.intended_size, h.seed, conit->second,
                                      sanctions.count(game_id) ? sanctions.at(game_id)
                                                               : std::map<int, std::vector<SanctionAction>>{});
        GameOutcome outcome = compute_outcome(log, schema.any_time_dropout);
        if (outcome.normalized_efficiency &&
            *outcome.normalized_efficiency > schema.outlier_normalized_efficiency) {
            ++result.report.outlier_excluded;
            continue;
        }
        OutcomeRow row;
        row.game_id = game_id;
        row.config_id = h.config_id;
        row.treatment_arm = h.treatment;
        row.efficiency = outcome.efficiency;
        row.normalized_efficiency = outcome.normalized_efficiency;
        row.mean_contribution_fraction = outcome.mean_contribution_fraction;
        row.included = outcome.included;
        if (!row.included) ++result.report.recruitment_excluded;
        else ++result.report.retained;
        result.outcomes.push_back(std::move(row));
        result.games.push_back({game_id, std::move(log)});
    }
    return result;
}

}  // namespace

std::string file_digest_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path + " for digest");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(content)));
    return buf;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["tool_version"] = manifest.tool_version;
    j["command"] = manifest.command;
    j["master_seed"] = manifest.master_seed;
    j["inputs"] = json::array();
    for (const auto& [p, d] : manifest.inputs) j["inputs"].push_back({{"path", p}, {"digest", d}});
    j["outputs"] = json::array();
    for (const auto& [p, d] : manifest.outputs) j["outputs"].push_back({{"path", p}, {"digest", d}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << j.dump(2) << "\n";
}

namespace {

json effect_to_json(const EffectEstimate& e) {
    return {{"label", e.label},
            {"t", e.t},
            {"se", e.se},
            {"n_treatment", e.n_treatment},
            {"n_control", e.n_control}};
}

}  // namespace

void write_hetero_json(const std::string& path, const HeterogeneityReport& report) {
    json j;
    j["wave"] = report.wave;
    j["group_by"] = report.group_by;
    j["seed"] = report.seed;
    j["estimates"] = json::array();
    for (const auto& e : report.estimates) j["estimates"].push_back(effect_to_json(e));
    j["cochran_q"] = {{"q", report.cochran.q},
                      {"df", report.cochran.df},
                      {"p", report.cochran.p},
                      {"meta_mean", report.cochran.meta_mean},
                      {"weights", report.cochran.weights}};
    j["i_squared"] = report.i2;
    if (report.frt) {
        j["frt"] = {{"max_p", report.frt->max_p},
                    {"argmax_tau", report.frt->argmax_tau},
                    {"tau_hat", report.frt->tau_hat},
                    {"se_tau", report.frt->se_tau},
                    {"grid_size", report.frt->taus.size()},
                    {"p_values", report.frt->p_values}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_prediction_report_json(const std::string& path, const PredictionReport& report) {
    json j;
    j["model_kind"] = report.model_kind;
    j["experiments"] = json::array();
    for (std::size_t i = 0; i < report.config_ids.size(); ++i) {
        j["experiments"].push_back({{"config_id", report.config_ids[i]},
                                    {"truth", report.truths[i]},
                                    {"prediction", report.predictions[i]}});
    }
    j["rmse"] = report.metrics.rmse;
    j["r2"] = report.metrics.r2;
    j["baseline_rmse"] = {{"no_effect", report.baseline_rmse.no_effect},
                          {"control_plus_ate", report.baseline_rmse.control_plus_ate},
                          {"constant_mean", report.baseline_rmse.constant_mean}};
    j["bootstrap"] = json::array();
    for (std::size_t m = 0; m < report.bootstrap_names.size(); ++m) {
        json entry = {{"model", report.bootstrap_names[m]},
                      {"rmse", report.bootstrap.rmse[m]},
                      {"ci", {report.bootstrap.rmse_ci[m].lo, report.bootstrap.rmse_ci[m].hi}}};
        json diffs = json::object();
        for (std::size_t o = 0; o < report.bootstrap_names.size(); ++o) {
            if (o == m) continue;
            diffs[report.bootstrap_names[o]] = {report.bootstrap.diff_ci[m][o].lo,
                                                report.bootstrap.diff_ci[m][o].hi};
        }
        entry["rmse_diff_ci"] = diffs;
        j["bootstrap"].push_back(entry);
    }
    j["permutation_importance"] = json::array();
    for (const auto& fi : report.importance) {
        j["permutation_importance"].push_back({{"feature", fi.feature},
                                               {"ratio", fi.ratio_mean},
                                               {"ci", {fi.ci_lo, fi.ci_hi}}});
    }
    j["shap"] = {{"base_value", report.shap_base_value},
                 {"base_features", base_feature_names()},
                 {"per_record", report.shap_per_base}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << j.dump(2) << "\n";
}

void save_model_json(const std::string& path, const LinearModel& model) {
    json j;
    j["kind"] = model.kind;
    j["with_interactions"] = model.with_interactions;
    j["alpha"] = model.alpha;
    j["l1_ratio"] = model.l1_ratio;
    j["intercept"] = model.intercept;
    j["coef"] = model.coef;
    j["feature_names"] = model_feature_names(model.with_interactions);
    j["standardizer"] = {{"mean", model.standardizer.mean},
                         {"sd", model.standardizer.sd},
                         {"zero_variance", model.standardizer.zero_variance}};
    j["learning_treatment_mean"] = model.learning_treatment_mean;
    j["ate_learning"] = model.ate_learning;
    j["background_mean"] = model.background_mean;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << j.dump(2) << "\n";
}

LinearModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open model " + path);
    json j;
    in >> j;
    LinearModel m;
    m.kind = j.at("kind").get<std::string>();
    m.with_interactions = j.at("with_interactions").get<bool>();
    m.alpha = j.at("alpha").get<double>();
    m.l1_ratio = j.at("l1_ratio").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.coef = j.at("coef").get<std::vector<double>>();
    m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.sd = j.at("standardizer").at("sd").get<std::vector<double>>();
    m.standardizer.zero_variance =
        j.at("standardizer").at("zero_variance").get<std::vector<bool>>();
    m.learning_treatment_mean = j.at("learning_treatment_mean").get<double>();
    m.ate_learning = j.at("ate_learning").get<double>();
    m.background_mean = j.at("background_mean").get<std::vector<double>>();
    return m;
}

}  // namespace pgg
