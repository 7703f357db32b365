#pragma once

// Independent oracles and fixture generators shared by the unit tests and the
// acceptance runner. Nothing here calls the library's scoring or search code.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relan/relnet.hpp"

namespace relan::testing {

inline std::string type_label(std::size_t t) { return "r" + std::to_string(t); }

inline RegistryPtr numbered_registry(std::size_t n_types) {
    std::vector<std::string> labels;
    for (std::size_t t = 0; t < n_types; ++t) labels.push_back(type_label(t));
    return make_registry(std::move(labels));
}

inline std::vector<Entity> numbered_entities(std::size_t n, const std::string& prefix = "e") {
    std::vector<Entity> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({prefix + std::to_string(i), "node"});
    return out;
}

// Every ordered pair (i, j), i != j, carries type t independently with probability `density`.
inline RelationalNetwork random_network(std::mt19937_64& rng, std::size_t n, const RegistryPtr& registry,
                                        double density, const std::string& prefix = "e") {
    std::bernoulli_distribution coin(density);
    std::vector<Relation> rels;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (i == j) continue;
            for (std::uint32_t t = 0; t < registry->size(); ++t) {
                if (coin(rng)) rels.push_back({i, j, RelationTypeId{t}});
            }
        }
    }
    return build_network(numbered_entities(n, prefix), rels, registry);
}

// Network with exactly `n_relations` distinct random triples (no self-loops).
inline RelationalNetwork random_network_exact(std::mt19937_64& rng, std::size_t n, std::size_t n_relations,
                                              const RegistryPtr& registry, const std::string& prefix = "e") {
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
    std::uniform_int_distribution<std::uint32_t> type(0, static_cast<std::uint32_t>(registry->size() - 1));
    std::vector<Relation> rels;
    while (rels.size() < n_relations) {
        Relation r{node(rng), node(rng), RelationTypeId{type(rng)}};
        if (r.src == r.dst || std::find(rels.begin(), rels.end(), r) != rels.end()) continue;
        rels.push_back(r);
    }
    return build_network(numbered_entities(n, prefix), rels, registry);
}

// Literal recount: walk the source's triples one by one and look each image up
// in the target's triple list.
inline double literal_score(const RelationalNetwork& a, const RelationalNetwork& b,
                            const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                            const std::vector<double>& weights = {}) {
    auto image = [&](std::uint32_t s) -> long {
        for (const auto& [x, y] : pairs) {
            if (x == s) return y;
        }
        return -1;
    };
    double total = 0.0;
    for (const auto& r : a.relations()) {
        const long fi = image(r.src), fj = image(r.dst);
        if (fi < 0 || fj < 0) continue;
        for (const auto& q : b.relations()) {
            if (q.src == static_cast<std::uint32_t>(fi) && q.dst == static_cast<std::uint32_t>(fj) &&
                q.type == r.type) {
                total += weights.empty() ? 1.0 : weights[r.type.value];
                break;
            }
        }
    }
    return total;
}

// Optimum over every partial injective assignment (including non-maximal ones),
// scored with literal_score.
inline double exhaustive_optimum(const RelationalNetwork& a, const RelationalNetwork& b,
                                 const std::vector<double>& weights = {}) {
    const std::size_t na = a.entity_count(), nb = b.entity_count();
    std::vector<bool> used(nb, false);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    double best = 0.0;
    std::function<void(std::uint32_t)> rec = [&](std::uint32_t i) {
        if (i == na) {
            best = std::max(best, literal_score(a, b, pairs, weights));
            return;
        }
        rec(i + 1);
        for (std::uint32_t j = 0; j < nb; ++j) {
            if (used[j]) continue;
            used[j] = true;
            pairs.push_back({i, j});
            rec(i + 1);
            pairs.pop_back();
            used[j] = false;
        }
    };
    rec(0);
    return best;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("relan_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string drop_first_line(const std::string& s) {
    const auto nl = s.find('\n');
    return nl == std::string::npos ? std::string() : s.substr(nl + 1);
}

// Corpus line in the interchange format; empty source omits the field.
inline std::string corpus_line(const std::string& id, const std::string& tactic, const std::string& source) {
    std::string esc;
    for (char c : tactic) {
        if (c == '"' || c == '\\') esc.push_back('\\');
        esc.push_back(c);
    }
    std::string line = "{\"id\": \"" + id + "\", \"tactic\": \"" + esc + "\"";
    if (!source.empty()) line += ", \"source_file\": \"" + source + "\"";
    return line + "}\n";
}

}  // namespace relan::testing
