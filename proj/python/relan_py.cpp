#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "relan/chess.hpp"
#include "relan/cli.hpp"
#include "relan/leanstates.hpp"
#include "relan/matcher.hpp"
#include "relan/stats.hpp"

namespace py = pybind11;
using namespace relan;

namespace {

using PairList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

RelationalNetwork make_network(const std::vector<std::string>& types,
                               const std::vector<std::pair<std::string, std::string>>& entities,
                               const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::string>>& relations) {
    auto registry = make_registry(types);
    std::vector<Entity> ents;
    for (const auto& [label, kind] : entities) ents.push_back({label, kind});
    std::vector<Relation> rels;
    for (const auto& [s, d, t] : relations) rels.push_back({s, d, registry->id(t)});
    return build_network(std::move(ents), rels, registry);
}

MatchConfig make_config(std::uint32_t restarts, std::uint32_t max_iters, std::uint64_t seed, const Weights& weights,
                        std::uint32_t top_k, unsigned threads) {
    MatchConfig c;
    c.restarts = restarts;
    c.max_iters_per_restart = max_iters;
    c.seed = seed;
    c.weights = weights;
    c.top_k = top_k;
    c.threads = threads;
    c.validate();
    return c;
}

py::dict result_dict(const MatchResult& r) {
    py::dict d;
    PairList pairs(r.assignment.pairs().begin(), r.assignment.pairs().end());
    d["assignment"] = pairs;
    d["raw"] = r.score.raw;
    d["normalized"] = r.score.normalized;
    d["best_restart"] = r.best_restart_index;
    d["iteration_cap_hit"] = r.iteration_cap_hit;
    return d;
}

std::vector<NamedNetwork> parse_networks(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return read_networks(in);
}

std::vector<lean::CorpusEntry> parse_corpus(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return lean::read_corpus(in);
}

stats::ZTable table_of(const std::string& corpus_jsonl) {
    const auto st = stats::aggregate(parse_corpus(corpus_jsonl));
    return stats::zscore_table(st, st.area_names());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Relational analogy matching, chess and proof-state extraction, tactic statistics";

    py::register_exception<Error>(m, "RelanError", PyExc_ValueError);

    py::class_<RelationalNetwork>(m, "Network")
        .def(py::init(&make_network), py::arg("types"), py::arg("entities"), py::arg("relations"),
             "types: relation labels; entities: (label, kind); relations: (src, dst, type label)")
        .def_property_readonly("types", [](const RelationalNetwork& n) { return n.registry().labels(); })
        .def_property_readonly("labels",
                               [](const RelationalNetwork& n) {
                                   std::vector<std::string> out;
                                   for (const auto& e : n.entities()) out.push_back(e.label);
                                   return out;
                               })
        .def_property_readonly("relations",
                               [](const RelationalNetwork& n) {
                                   std::vector<std::tuple<std::uint32_t, std::uint32_t, std::string>> out;
                                   for (const auto& r : n.relations()) {
                                       out.emplace_back(r.src, r.dst, n.registry().label(r.type));
                                   }
                                   return out;
                               })
        .def("__len__", &RelationalNetwork::entity_count)
        .def("find", &RelationalNetwork::find_entity)
        .def("has", [](const RelationalNetwork& n, std::size_t s, std::size_t d, const std::string& type) {
            return n.has_relation(s, d, n.registry().id(type));
        });

    m.def(
        "score",
        [](const RelationalNetwork& a, const RelationalNetwork& b, const PairList& pairs, const Weights& weights) {
            return relational_score(a, b, Assignment(pairs), weights);
        },
        py::arg("source"), py::arg("target"), py::arg("assignment"), py::arg("weights") = Weights{});
    m.def("normalize", &normalize_score, py::arg("raw"), py::arg("n_source"), py::arg("n_target"));

    m.def(
        "match",
        [](const RelationalNetwork& a, const RelationalNetwork& b, std::uint32_t restarts, std::uint32_t max_iters,
           std::uint64_t seed, const Weights& weights) {
            const auto cfg = make_config(restarts, max_iters, seed, weights, 5, 1);
            py::gil_scoped_release release;
            auto r = match(a, b, cfg);
            py::gil_scoped_acquire acquire;
            return result_dict(r);
        },
        py::arg("source"), py::arg("target"), py::arg("restarts") = 32, py::arg("max_iters") = 1000,
        py::arg("seed") = 42, py::arg("weights") = Weights{});
    m.def(
        "brute_force_match",
        [](const RelationalNetwork& a, const RelationalNetwork& b, std::size_t cap, const Weights& weights) {
            return result_dict(brute_force_match(a, b, cap, weights));
        },
        py::arg("source"), py::arg("target"), py::arg("cap") = 8, py::arg("weights") = Weights{});
    m.def(
        "batch_match",
        [](const std::string& queries_jsonl, const std::string& candidates_jsonl, std::uint32_t top_k,
           std::uint32_t restarts, std::uint64_t seed, unsigned threads) {
            const auto cfg = make_config(restarts, 1000, seed, {}, top_k, threads);
            const auto qs = parse_networks(queries_jsonl);
            const auto cs = parse_networks(candidates_jsonl);
            std::vector<RankedAnalogues> results;
            {
                py::gil_scoped_release release;
                results = batch_match(qs, cs, cfg);
            }
            py::list out;
            for (const auto& r : results) {
                py::list ranking;
                for (const auto& e : r.ranking) {
                    auto d = result_dict(e.result);
                    d["candidate"] = e.candidate_id;
                    ranking.append(d);
                }
                py::list errors;
                for (const auto& e : r.errors) errors.append(py::make_tuple(e.candidate_id, e.message));
                py::dict rec;
                rec["query"] = r.query_id;
                rec["ranking"] = ranking;
                rec["errors"] = errors;
                out.append(rec);
            }
            return out;
        },
        py::arg("queries"), py::arg("candidates"), py::arg("top_k") = 5, py::arg("restarts") = 32,
        py::arg("seed") = 42, py::arg("threads") = 0,
        "Both arguments are network JSONL text; returns one ranking per query.");

    m.def(
        "chess_network", [](const std::string& fen) { return chess::extract_chess_relations(chess::parse_fen(fen)); },
        py::arg("fen"));
    m.def(
        "legal_move_count",
        [](const std::string& fen, const std::string& square) {
            if (square.size() != 2 || square[0] < 'a' || square[0] > 'h' || square[1] < '1' || square[1] > '8') {
                throw Error("bad square: " + square);
            }
            const auto sq = static_cast<chess::Square>((square[1] - '1') * 8 + (square[0] - 'a'));
            return chess::legal_move_count(chess::parse_fen(fen), sq);
        },
        py::arg("fen"), py::arg("square"));
    m.def("run_battery", []() {
        const auto report = chess::run_battery(chess::default_battery());
        py::dict cases;
        for (const auto& c : report.cases) cases[py::str(c.name)] = py::make_tuple(c.satisfied, c.total);
        py::dict d;
        d["satisfied"] = report.satisfied;
        d["total"] = report.total;
        d["cases"] = cases;
        return d;
    });

    m.def(
        "parse_schema",
        [](const std::string& tactic) -> py::object {
            const auto p = lean::parse_schema(tactic);
            switch (p.kind) {
                case lean::SchemaClass::Shortcut: return py::str("Shortcut");
                case lean::SchemaClass::Unparseable: return py::str("Unparseable");
                case lean::SchemaClass::Schema: break;
            }
            return py::str(p.schema.key());
        },
        py::arg("tactic"), "Schema key 'head|arity|with|lemma', or 'Shortcut' / 'Unparseable'.");
    m.def("derive_area", &lean::derive_area, py::arg("source_file"));
    m.def(
        "proof_network", [](const std::string& state) { return lean::extract_proof_relations(lean::parse_proof_state(state)); },
        py::arg("state"));

    m.def(
        "zscores",
        [](const std::string& corpus_jsonl) {
            const auto table = table_of(corpus_jsonl);
            std::vector<std::tuple<std::string, std::string, std::uint64_t, double, double>> rows;
            for (std::size_t a = 0; a < table.areas.size(); ++a) {
                for (const auto& col : table.columns) {
                    rows.emplace_back(table.areas[a], col.schema.key(), col.count[a], col.freq[a], col.z[a]);
                }
            }
            return rows;
        },
        py::arg("corpus"), "Rows (area, schema, count, freq, z) for corpus JSONL text.");
    m.def(
        "transfer_candidates",
        [](const std::string& corpus_jsonl, const std::string& source, const std::string& target) {
            std::vector<std::tuple<std::string, double, double, double, std::uint64_t>> rows;
            for (const auto& c : stats::transfer_candidates(table_of(corpus_jsonl), source, target)) {
                rows.emplace_back(c.schema.key(), c.z_source, c.z_target, c.gap, c.source_count);
            }
            return rows;
        },
        py::arg("corpus"), py::arg("source"), py::arg("target"),
        "Rows (schema, z_source, z_target, gap, source_count), largest gap first.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line pipeline; returns (exit code, stdout, stderr).");
}
