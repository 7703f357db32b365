#include "relan/relnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

namespace relan {

namespace {

std::string describe(const Relation& r, const RelationRegistry& registry) {
    const std::string type =
        r.type.value < registry.size() ? registry.labels()[r.type.value] : std::to_string(r.type.value);
    return "(" + std::to_string(r.src) + "," + std::to_string(r.dst) + "," + type + ")";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RelationRegistry::RelationRegistry(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() > kMaxTypes) {
        throw Error("relation registry holds at most " + std::to_string(kMaxTypes) + " types, got " +
                    std::to_string(labels_.size()));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].empty()) throw Error("relation type label must be non-empty");
        for (std::size_t j = 0; j < i; ++j) {
            if (labels_[i] == labels_[j]) throw Error("duplicate relation type label: " + labels_[i]);
        }
    }
}

const std::string& RelationRegistry::label(RelationTypeId id) const {
    if (id.value >= labels_.size()) {
        throw Error("unknown relation type id " + std::to_string(id.value));
    }
    return labels_[id.value];
}

std::optional<RelationTypeId> RelationRegistry::find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return RelationTypeId{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

RelationTypeId RelationRegistry::id(std::string_view label) const {
    auto found = find(label);
    if (!found) throw Error("unknown relation type: " + std::string(label));
    return *found;
}

RegistryPtr make_registry(std::vector<std::string> labels) {
    return std::make_shared<const RelationRegistry>(std::move(labels));
}

RelationalNetwork::RelationalNetwork(std::vector<Entity> entities, std::span<const Relation> relations,
                                     RegistryPtr registry)
    : entities_(std::move(entities)), relations_(relations.begin(), relations.end()),
      registry_(std::move(registry)) {
    if (!registry_) throw Error("network requires a relation registry");
    const std::size_t n = entities_.size();
    for (const auto& r : relations_) {
        if (r.src >= n || r.dst >= n) {
            throw Error("relation " + describe(r, *registry_) + ": index out of range (network has " +
                        std::to_string(n) + " entities)");
        }
        if (r.type.value >= registry_->size()) {
            throw Error("relation " + describe(r, *registry_) + ": unknown relation type id");
        }
    }
    std::sort(relations_.begin(), relations_.end());
    relations_.erase(std::unique(relations_.begin(), relations_.end()), relations_.end());

    masks_.assign(n * n, 0);
    for (const auto& r : relations_) masks_[r.src * n + r.dst] |= std::uint64_t{1} << r.type.value;

    neighbor_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i && (masks_[i * n + k] | masks_[k * n + i]) != 0) {
                neighbor_data_.push_back(static_cast<std::uint32_t>(k));
            }
        }
        neighbor_offsets_[i + 1] = static_cast<std::uint32_t>(neighbor_data_.size());
    }
}

std::optional<std::size_t> RelationalNetwork::find_entity(std::string_view label) const {
    for (std::size_t i = 0; i < entities_.size(); ++i) {
        if (entities_[i].label == label) return i;
    }
    return std::nullopt;
}

RelationalNetwork build_network(std::vector<Entity> entities, std::span<const Relation> relations,
                                RegistryPtr registry) {
    return RelationalNetwork(std::move(entities), relations, std::move(registry));
}

bool same_registry(const RelationalNetwork& a, const RelationalNetwork& b) {
    return a.registry_ptr() == b.registry_ptr() || a.registry() == b.registry();
}

Assignment::Assignment(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    for (std::size_t i = 1; i < pairs_.size(); ++i) {
        if (pairs_[i].first == pairs_[i - 1].first) {
            throw Error("assignment is not injective: source " + std::to_string(pairs_[i].first) +
                        " appears twice");
        }
    }
    std::vector<std::uint32_t> targets;
    targets.reserve(pairs_.size());
    for (const auto& p : pairs_) targets.push_back(p.second);
    std::sort(targets.begin(), targets.end());
    auto dup = std::adjacent_find(targets.begin(), targets.end());
    if (dup != targets.end()) {
        throw Error("assignment is not injective: target " + std::to_string(*dup) + " appears twice");
    }
}

std::optional<std::uint32_t> Assignment::target_of(std::uint32_t source) const {
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), Pair{source, 0});
    if (it != pairs_.end() && it->first == source) return it->second;
    return std::nullopt;
}

Assignment Assignment::inverse() const {
    std::vector<Pair> inv;
    inv.reserve(pairs_.size());
    for (const auto& [s, t] : pairs_) inv.emplace_back(t, s);
    return Assignment(std::move(inv));
}

void Assignment::add(std::uint32_t source, std::uint32_t target) {
    for (const auto& [s, t] : pairs_) {
        if (s == source) throw Error("source " + std::to_string(source) + " already assigned");
        if (t == target) throw Error("target " + std::to_string(target) + " already assigned");
    }
    pairs_.insert(std::lower_bound(pairs_.begin(), pairs_.end(), Pair{source, target}), {source, target});
}

void Assignment::validate(std::size_t n_source, std::size_t n_target) const {
    for (const auto& [s, t] : pairs_) {
        if (s >= n_source || t >= n_target) {
            throw Error("invalid assignment: pair (" + std::to_string(s) + "," + std::to_string(t) +
                        ") out of range");
        }
    }
}

void validate_weights(const Weights& weights, const RelationRegistry& registry) {
    if (weights.empty()) return;
    if (weights.size() != registry.size()) {
        throw Error("weights cover " + std::to_string(weights.size()) + " types, registry has " +
                    std::to_string(registry.size()));
    }
    for (std::size_t t = 0; t < weights.size(); ++t) {
        if (!(weights[t] > 0.0) || !std::isfinite(weights[t])) {
            throw Error("weight for relation type " + registry.labels()[t] + " must be positive");
        }
    }
}

double relational_score(const RelationalNetwork& source, const RelationalNetwork& target,
                        const Assignment& asg, const Weights& weights) {
    if (!same_registry(source, target)) throw Error("registry mismatch between networks");
    validate_weights(weights, source.registry());
    asg.validate(source.entity_count(), target.entity_count());

    std::vector<std::int64_t> image(source.entity_count(), -1);
    for (const auto& [s, t] : asg.pairs()) image[s] = t;

    double score = 0.0;
    for (const auto& r : source.relations()) {
        if (image[r.src] < 0 || image[r.dst] < 0) continue;
        if (target.has_relation(static_cast<std::size_t>(image[r.src]),
                                static_cast<std::size_t>(image[r.dst]), r.type)) {
            score += weights.empty() ? 1.0 : weights[r.type.value];
        }
    }
    return score;
}

double normalize_score(double raw, std::size_t n_source, std::size_t n_target) {
    if (n_source == 0 || n_target == 0) throw Error("empty network");
    return raw / std::sqrt(static_cast<double>(n_source) * static_cast<double>(n_target));
}

MatchScore make_score(double raw, std::size_t n_source, std::size_t n_target) {
    return {raw, normalize_score(raw, n_source, n_target), n_source, n_target};
}

RelationProfile relation_profile(const RelationalNetwork& network, std::size_t entity) {
    if (entity >= network.entity_count()) {
        throw Error("entity index " + std::to_string(entity) + " out of range");
    }
    RelationProfile profile;
    profile.per_type.resize(network.registry().size());
    for (const auto& r : network.relations()) {
        if (r.src == entity) ++profile.per_type[r.type.value].out;
        if (r.dst == entity) ++profile.per_type[r.type.value].in;
    }
    return profile;
}

std::vector<RelationProfile> relation_profiles(const RelationalNetwork& network) {
    std::vector<RelationProfile> profiles(network.entity_count());
    for (auto& p : profiles) p.per_type.resize(network.registry().size());
    for (const auto& r : network.relations()) {
        ++profiles[r.src].per_type[r.type.value].out;
        ++profiles[r.dst].per_type[r.type.value].in;
    }
    return profiles;
}

std::uint64_t signature_hash(const RelationProfile& profile) {
    // Commutative sum of per-entry mixes, so entry order is irrelevant.
    std::uint64_t h = kEmptyProfileHash;
    for (std::size_t t = 0; t < profile.per_type.size(); ++t) {
        const auto& d = profile.per_type[t];
        if (d.out == 0 && d.in == 0) continue;
        std::uint64_t key = (static_cast<std::uint64_t>(t) << 48) ^
                            (static_cast<std::uint64_t>(d.out) << 24) ^ d.in;
        h += splitmix64(splitmix64(key) ^ 0x243f6a8885a308d3ULL);
    }
    return h;
}

std::vector<NamedNetwork> read_networks(std::istream& in) {
    using nlohmann::json;
    std::vector<NamedNetwork> out;
    std::map<std::vector<std::string>, RegistryPtr> registries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::string where = "network record on line " + std::to_string(line_no);
        try {
            json rec = json::parse(line);
            if (!rec.is_object() || !rec.contains("entities") || !rec.contains("types")) {
                throw Error("expected an object with \"entities\" and \"types\"");
            }
            std::string id = rec.value("id", std::to_string(line_no));
            auto labels = rec.at("types").get<std::vector<std::string>>();
            auto& reg = registries[labels];
            if (!reg) reg = make_registry(labels);

            std::vector<Entity> entities;
            for (const auto& e : rec.at("entities")) {
                if (e.is_string()) {
                    entities.push_back({e.get<std::string>(), ""});
                } else {
                    entities.push_back({e.at("label").get<std::string>(), e.value("kind", "")});
                }
            }
            std::vector<Relation> relations;
            for (const auto& r : rec.value("relations", json::array())) {
                if (!r.is_array() || r.size() != 3) throw Error("relation must be [src, dst, type]");
                relations.push_back({r[0].get<std::uint32_t>(), r[1].get<std::uint32_t>(),
                                     reg->id(r[2].get<std::string>())});
            }
            out.push_back({std::move(id), build_network(std::move(entities), relations, reg)});
        } catch (const json::exception& e) {
            throw Error(where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(where + ": " + e.what());
        }
    }
    return out;
}

void write_network(std::ostream& out, const NamedNetwork& named) {
    using nlohmann::json;
    const auto& net = named.network;
    json rec;
    rec["id"] = named.id;
    json ents = json::array();
    for (const auto& e : net.entities()) ents.push_back({{"label", e.label}, {"kind", e.kind}});
    rec["entities"] = std::move(ents);
    json rels = json::array();
    for (const auto& r : net.relations()) rels.push_back({r.src, r.dst, net.registry().label(r.type)});
    rec["relations"] = std::move(rels);
    rec["types"] = net.registry().labels();
    out << rec.dump() << '\n';
}

}  // namespace relan
