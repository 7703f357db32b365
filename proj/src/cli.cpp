#include "relan/cli.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relan/chess.hpp"
#include "relan/error.hpp"
#include "relan/leanstates.hpp"
#include "relan/matcher.hpp"
#include "relan/stats.hpp"

namespace relan::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

struct PipelineConfig {
    std::optional<fs::path> corpus;
    fs::path out_dir = ".";
    std::vector<std::string> universe;  // empty: areas observed in the corpus
    stats::TransferFilters filters;
    std::optional<fs::path> known_heads;
    MatchConfig match;
    std::string format = "tsv";
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        auto item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size() || value.front() == '-') {
        throw UsageError("config key " + key + ": expected a non-negative integer, got '" + value + "'");
    }
    return static_cast<T>(v);
}

Weights parse_weights(const std::string& value) {
    Weights w;
    for (const auto& item : split_list(value)) {
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw UsageError("config key weights: bad number '" + item + "'");
        w.push_back(d);
    }
    return w;
}

std::set<std::string> to_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value, const fs::path& base) {
    auto path = [&](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base / v; };
    if (key == "corpus") {
        cfg.corpus = path(value);
    } else if (key == "out_dir") {
        cfg.out_dir = path(value);
    } else if (key == "universe") {
        cfg.universe = split_list(value);
    } else if (key == "exclude_source") {
        cfg.filters.excluded_sources = to_set(split_list(value));
    } else if (key == "exclude_target") {
        cfg.filters.excluded_targets = to_set(split_list(value));
    } else if (key == "shortcut_heads") {
        cfg.filters.shortcut_heads = to_set(split_list(value));
    } else if (key == "min_areas_present") {
        cfg.filters.min_areas_present = parse_unsigned<std::size_t>(key, value);
    } else if (key == "known_heads") {
        cfg.known_heads = path(value);
    } else if (key == "seed") {
        cfg.match.seed = parse_unsigned<std::uint64_t>(key, value);
    } else if (key == "restarts") {
        cfg.match.restarts = parse_unsigned<std::uint32_t>(key, value);
    } else if (key == "max_iters") {
        cfg.match.max_iters_per_restart = parse_unsigned<std::uint32_t>(key, value);
    } else if (key == "top_k") {
        cfg.match.top_k = parse_unsigned<std::uint32_t>(key, value);
    } else if (key == "threads") {
        cfg.match.threads = parse_unsigned<unsigned>(key, value);
    } else if (key == "brute_force_cap") {
        cfg.match.brute_force_cap = parse_unsigned<std::size_t>(key, value);
    } else if (key == "weights") {
        cfg.match.weights = parse_weights(value);
    } else if (key == "format") {
        cfg.format = value;
    } else {
        throw UsageError("unknown config key '" + key + "'");
    }
}

// Flat "key = value" lines; '#' starts a comment line. Relative paths are
// taken relative to the config file.
void load_config(PipelineConfig& cfg, const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot read config file " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(file.string() + " line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_key(cfg, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)),
                      file.parent_path());
        } catch (const UsageError& e) {
            throw UsageError(file.string() + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
    if (!out.flush()) throw IoError("write failed: " + p.string());
}

json cell(const std::string& s) {
    if (s.empty()) return s;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return s;
    if (s.find_first_of(".eE") == std::string::npos && s[0] != '-') return std::stoull(s);
    return d;
}

// Tab-separated text re-rendered as one JSON object per row, keyed by the header.
// Trailing "# key\tvalue" lines become {"key": ..., "value": ...} records.
std::string tsv_to_jsonl(const std::string& tsv) {
    std::istringstream in(tsv);
    std::string line;
    std::vector<std::string> header;
    std::ostringstream out;
    auto fields = [](const std::string& l) {
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            auto tab = l.find('\t', start);
            f.push_back(l.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        return f;
    };
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            auto f = fields(line.substr(2));
            json rec{{"key", f[0]}};
            if (f.size() > 1) rec["value"] = cell(f[1]);
            out << rec.dump() << '\n';
            continue;
        }
        if (header.empty()) {
            header = fields(line);
            continue;
        }
        auto f = fields(line);
        json rec = json::object();
        for (std::size_t k = 0; k < header.size() && k < f.size(); ++k) {
            rec[header[k]] = header[k] == "schema" ? json(f[k]) : cell(f[k]);
        }
        out << rec.dump() << '\n';
    }
    return out.str();
}

class Driver {
public:
    Driver(PipelineConfig cfg, std::ostream& out, std::ostream& err)
        : cfg_(std::move(cfg)), out_(out), err_(err) {}

    int schemas() {
        const auto st = load_stats();
        std::ostringstream body;
        stats::write_census_tsv(body, st);
        emit_table("schemas", body.str());
        out_ << "schemas: " << st.schemas().size() << " distinct schemas, " << st.tallies.included
             << " included of " << st.corpus_size << " entries\n";
        return kOk;
    }

    int zscores() {
        const auto table = load_table();
        std::ostringstream body;
        stats::write_zscores_tsv(body, table);
        emit_table("zscores", body.str());
        out_ << "zscores: " << table.columns.size() << " schemas over " << table.areas.size() << " areas\n";
        return kOk;
    }

    int candidates(const std::string& source, const std::string& target) {
        if (source == target) throw UsageError("source and target area must differ (" + source + ")");
        const auto table = load_table();
        const auto cands = stats::transfer_candidates(table, source, target, cfg_.filters);
        std::ostringstream body;
        stats::write_candidates_tsv(body, cands);
        emit_table("candidates", body.str());
        out_ << "candidates: " << cands.size() << " for " << source << " -> " << target << '\n';
        return kOk;
    }

    int pairs() {
        const auto table = load_table();
        const auto scored = stats::pair_potential(table, cfg_.filters);
        std::ostringstream body;
        stats::write_pairs_tsv(body, scored);
        emit_table("pairs", body.str());
        out_ << "pairs: " << scored.size() << " ordered area pairs\n";
        return kOk;
    }

    int match(const fs::path& queries_file, const fs::path& targets_file, std::optional<std::size_t> prefilter) {
        cfg_.match.validate();
        if (prefilter && *prefilter == 0) throw UsageError("--prefilter must be positive");
        const auto t0 = std::chrono::steady_clock::now();
        const auto queries = load_networks(queries_file);
        const auto targets = load_networks(targets_file);

        std::vector<RankedAnalogues> results;
        if (!prefilter) {
            results = batch_match(queries, targets, cfg_.match);
        } else {
            for (const auto& q : queries) {
                const auto picked = prefilter_candidates(q.network, targets, *prefilter);
                std::vector<NamedNetwork> subset;
                for (auto idx : picked) subset.push_back(targets[idx]);
                auto r = batch_match(std::span(&q, 1), subset, cfg_.match);
                for (auto& entry : r.front().ranking) entry.candidate_index = picked[entry.candidate_index];
                results.push_back(std::move(r.front()));
            }
        }

        std::ostringstream body;
        std::size_t errors = 0;
        for (const auto& r : results) {
            body << ranking_json(r, queries, targets).dump() << '\n';
            for (const auto& e : r.errors) {
                err_ << "match error: query " << e.query_id << " vs " << e.candidate_id << ": " << e.message << '\n';
                ++errors;
            }
        }
        write_report("matches.jsonl", body.str());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out_ << "match: " << queries.size() << " queries x " << targets.size() << " candidates, top-k "
             << cfg_.match.top_k << ", " << errors << " pair errors, wall " << std::fixed << std::setprecision(2)
             << secs << " s\n";
        out_.unsetf(std::ios::floatfield);
        return kOk;
    }

    int battery(const std::optional<fs::path>& file) {
        std::vector<chess::BatteryCase> cases;
        if (file) {
            if (!fs::exists(*file)) throw IoError("battery file not found: " + file->string());
            std::istringstream in(read_file(*file));
            cases = chess::read_battery(in);
        } else {
            cases = chess::default_battery();
        }
        const auto report = chess::run_battery(cases, cfg_.match);
        std::ostringstream body;
        chess::print_battery_report(body, report);
        write_report("battery.txt", body.str());
        out_ << body.str();
        for (const auto& c : report.cases) {
            if (c.error) err_ << "battery case " << c.name << ": " << *c.error << '\n';
        }
        return report.all_satisfied() ? kOk : kBatteryMiss;
    }

    int whyreport(const std::string& schema_key, const std::string& source_id, const std::string& target_id,
                  bool force, const std::optional<std::string>& verify_cmd) {
        lean::TacticSchema schema;
        try {
            schema = lean::TacticSchema::from_key(schema_key);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        const auto path = cfg_.out_dir / ("why_" + sanitize(source_id) + "__" + sanitize(target_id) + ".md");
        if (fs::exists(path) && !force) {
            throw IoError(path.string() + " already exists (use --force to overwrite)");
        }

        std::ostringstream md;
        md << "# Why-report: `" << schema.key() << "`\n\n"
           << "- Schema head: `" << schema.head << "`\n"
           << "- Arity: " << schema.arity << "\n"
           << "- With-clause: " << (schema.has_with ? "yes" : "no") << "\n"
           << "- Lemma list: " << (schema.uses_lemma ? "yes" : "no") << "\n"
           << "- Source theorem: " << source_id << "\n"
           << "- Target theorem: " << target_id << "\n\n"
           << "## What the source tactic does\n\n(describe the mathematical step the tactic performs in the source "
              "proof)\n\n"
           << "## Does an analog exist in the target\n\n(name the corresponding structure in the target area, or "
              "explain why none exists)\n\n"
           << "## Attempts\n\n(list each adaptation tried and its outcome)\n\n"
           << "## Failure diagnosis\n\n(state what blocked the transfer, or why it succeeded)\n";
        if (verify_cmd) {
            out_.flush();
            err_.flush();
            const int status = std::system(verify_cmd->c_str());
            const int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status));
            md << "\n## Verification\n\n- Command: `" << *verify_cmd << "`\n- Exit status: " << code << "\n";
        }
        write_report(path.filename().string(), md.str(), "<!-- relan whyreport generated " + timestamp() + " -->\n");
        out_ << "whyreport: wrote " << path.string() << '\n';
        return kOk;
    }

private:
    static std::string sanitize(const std::string& id) {
        std::string s;
        for (unsigned char c : id) {
            s.push_back(std::isalnum(c) || c == '.' || c == '-' || c == '_' ? static_cast<char>(c) : '_');
        }
        return s.empty() ? "_" : s;
    }

    lean::HeadList known_heads() const {
        if (!cfg_.known_heads) return lean::HeadList::known_tactics();
        return lean::HeadList::parse(read_file(*cfg_.known_heads));
    }

    std::vector<lean::CorpusEntry> load_corpus() {
        if (!cfg_.corpus) throw UsageError("no corpus given (use --corpus or the corpus config key)");
        std::istringstream in(read_file(*cfg_.corpus));
        std::vector<lean::CorpusWarning> warnings;
        auto entries = lean::read_corpus(in, &warnings);
        for (const auto& w : warnings) err_ << "corpus line " << w.line << ": " << w.message << '\n';
        if (entries.empty()) throw Error("no valid entries in " + cfg_.corpus->string());
        return entries;
    }

    stats::AreaStats load_stats() {
        const auto entries = load_corpus();
        return stats::aggregate(entries, known_heads());
    }

    stats::ZTable load_table() {
        const auto st = load_stats();
        const auto universe = cfg_.universe.empty() ? st.area_names() : cfg_.universe;
        return stats::zscore_table(st, universe);
    }

    // Network interchange or corpus entries, decided by the first record.
    std::vector<NamedNetwork> load_networks(const fs::path& file) {
        const auto text = read_file(file);
        std::istringstream probe(text);
        std::string line;
        std::size_t lineno = 0;
        bool is_corpus = false;
        while (std::getline(probe, line)) {
            ++lineno;
            const auto t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            json rec;
            try {
                rec = json::parse(t);
            } catch (const json::exception&) {
                throw Error(file.string() + " line " + std::to_string(lineno) + ": not a JSON record");
            }
            if (rec.is_object() && rec.contains("entities")) break;
            if (rec.is_object() && (rec.contains("state") || rec.contains("tactic"))) {
                is_corpus = true;
                break;
            }
            throw Error(file.string() + " line " + std::to_string(lineno) +
                        ": record is neither a network nor a corpus entry");
        }

        std::istringstream in(text);
        if (!is_corpus) {
            try {
                return read_networks(in);
            } catch (const Error& e) {
                throw Error(file.string() + ": " + e.what());
            }
        }
        std::vector<lean::CorpusWarning> warnings;
        const auto entries = lean::read_corpus(in, &warnings);
        if (!warnings.empty()) {
            throw Error(file.string() + " line " + std::to_string(warnings.front().line) + ": " +
                        warnings.front().message);
        }
        std::vector<NamedNetwork> out;
        for (const auto& e : entries) {
            if (!e.state) throw Error(file.string() + ": corpus entry " + e.id + " has no proof state");
            out.push_back({e.id, lean::extract_proof_relations(*e.state)});
        }
        return out;
    }

    static json ranking_json(const RankedAnalogues& r, std::span<const NamedNetwork> queries,
                             std::span<const NamedNetwork> targets) {
        const NamedNetwork* query = nullptr;
        for (const auto& q : queries) {
            if (q.id == r.query_id) {
                query = &q;
                break;
            }
        }
        json ranking = json::array();
        for (const auto& e : r.ranking) {
            const auto& cand = targets[e.candidate_index].network;
            json pairs = json::array();
            json labels = json::array();
            for (const auto& [s, t] : e.result.assignment.pairs()) {
                pairs.push_back({s, t});
                labels.push_back({query ? query->network.entities()[s].label : "", cand.entities()[t].label});
            }
            ranking.push_back({{"candidate", e.candidate_id},
                               {"raw", e.result.score.raw},
                               {"normalized", e.result.score.normalized},
                               {"n_source", e.result.score.n_source},
                               {"n_target", e.result.score.n_target},
                               {"best_restart", e.result.best_restart_index},
                               {"iteration_cap_hit", e.result.iteration_cap_hit},
                               {"assignment", std::move(pairs)},
                               {"labels", std::move(labels)}});
        }
        json rec{{"query", r.query_id}, {"ranking", std::move(ranking)}};
        if (!r.errors.empty()) {
            json errs = json::array();
            for (const auto& e : r.errors) errs.push_back({{"candidate", e.candidate_id}, {"message", e.message}});
            rec["errors"] = std::move(errs);
        }
        return rec;
    }

    void emit_table(const std::string& name, const std::string& tsv) {
        if (cfg_.format == "tsv") {
            write_report(name + ".tsv", tsv);
        } else {
            write_report(name + ".jsonl", tsv_to_jsonl(tsv));
        }
    }

    void write_report(const std::string& filename, const std::string& body, std::string header = {}) {
        if (header.empty()) header = "# relan " + filename + " generated " + timestamp() + "\n";
        write_file(cfg_.out_dir / filename, header + body);
    }

    PipelineConfig cfg_;
    std::ostream& out_;
    std::ostream& err_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relational analogy matching and tactic-transfer statistics"};
    app.name("relan");
    app.require_subcommand(1);
    app.fallthrough();

    std::string corpus, out_dir, config_file, format, universe, known;
    std::uint64_t seed = 0;
    auto* o_corpus = app.add_option("--corpus", corpus, "Corpus file (line-delimited JSON)");
    auto* o_out = app.add_option("--out-dir", out_dir, "Directory for reports");
    auto* o_config = app.add_option("--config", config_file, "Flat key = value config file");
    auto* o_seed = app.add_option("--seed", seed, "Matcher seed");
    auto* o_format = app.add_option("--format", format, "Table report format")->check(CLI::IsMember({"tsv", "jsonl"}));
    auto* o_universe = app.add_option("--universe", universe, "Comma-separated area universe");
    auto* o_known = app.add_option("--known-heads", known, "Known tactic head list file");

    auto* c_schemas = app.add_subcommand("schemas", "Schema census with exclusion tallies");
    auto* c_zscores = app.add_subcommand("zscores", "Per-area schema z-scores");

    auto* c_cands = app.add_subcommand("candidates", "Transfer candidates for one area pair");
    std::string source, target;
    c_cands->add_option("--source", source, "Source area")->required();
    c_cands->add_option("--target", target, "Target area")->required();

    auto* c_pairs = app.add_subcommand("pairs", "Area pairs ranked by transfer potential");

    auto* c_match = app.add_subcommand("match", "Rank candidate analogues for each query network");
    std::string queries_file, targets_file;
    std::uint32_t top_k = 0, restarts = 0, max_iters = 0;
    unsigned threads = 0;
    std::size_t prefilter = 0;
    c_match->add_option("--queries", queries_file, "Query networks or corpus entries")->required();
    c_match->add_option("--targets", targets_file, "Candidate networks or corpus entries")->required();
    auto* o_topk = c_match->add_option("--top-k", top_k, "Ranking length");
    auto* o_restarts = c_match->add_option("--restarts", restarts, "Restarts per pair");
    auto* o_iters = c_match->add_option("--max-iters", max_iters, "Move cap per restart");
    auto* o_threads = c_match->add_option("--threads", threads, "Worker threads (0: hardware)");
    auto* o_prefilter = c_match->add_option("--prefilter", prefilter, "Keep only this many candidates per query");

    auto* c_battery = app.add_subcommand("battery", "Run the chess analogy battery");
    std::string battery_file;
    auto* o_battery = c_battery->add_option("--file", battery_file, "Battery file (default: built-in cases)");

    auto* c_why = app.add_subcommand("whyreport", "Write a why-report template");
    std::string schema_key, source_id, target_id, verify_cmd;
    bool force = false;
    c_why->add_option("--schema", schema_key, "Schema key head|arity|with|lemma")->required();
    c_why->add_option("--source-id", source_id, "Source theorem id")->required();
    c_why->add_option("--target-id", target_id, "Target theorem id")->required();
    c_why->add_flag("--force", force, "Overwrite an existing report");
    auto* o_verify = c_why->add_option("--verify-cmd", verify_cmd, "External command whose exit status is recorded");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        PipelineConfig cfg;
        if (*o_config) load_config(cfg, config_file);
        if (*o_corpus) cfg.corpus = corpus;
        if (*o_out) cfg.out_dir = out_dir;
        if (*o_seed) cfg.match.seed = seed;
        if (*o_format) cfg.format = format;
        if (*o_universe) cfg.universe = split_list(universe);
        if (*o_known) cfg.known_heads = known;
        if (*o_topk) cfg.match.top_k = top_k;
        if (*o_restarts) cfg.match.restarts = restarts;
        if (*o_iters) cfg.match.max_iters_per_restart = max_iters;
        if (*o_threads) cfg.match.threads = threads;
        if (cfg.format != "tsv" && cfg.format != "jsonl") throw UsageError("unknown report format " + cfg.format);
        if (cfg.match.top_k == 0) throw UsageError("top-k must be positive");
        if (cfg.match.restarts == 0) throw UsageError("restarts must be positive");
        if (cfg.match.max_iters_per_restart == 0) throw UsageError("max-iters must be positive");

        Driver d(std::move(cfg), out, err);
        if (*c_schemas) return d.schemas();
        if (*c_zscores) return d.zscores();
        if (*c_cands) return d.candidates(source, target);
        if (*c_pairs) return d.pairs();
        if (*c_match) {
            return d.match(queries_file, targets_file,
                           *o_prefilter ? std::optional<std::size_t>(prefilter) : std::nullopt);
        }
        if (*c_battery) return d.battery(*o_battery ? std::optional<fs::path>(battery_file) : std::nullopt);
        if (*c_why) {
            return d.whyreport(schema_key, source_id, target_id, force,
                               *o_verify ? std::optional<std::string>(verify_cmd) : std::nullopt);
        }
        return kUsage;
    } catch (const UsageError& e) {
        err << "relan: usage: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "relan: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "relan: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "relan: internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace relan::cli
