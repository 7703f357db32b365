#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relan/error.hpp"

namespace relan {

// Dense id of a relation type inside a RelationRegistry.
struct RelationTypeId {
    std::uint32_t value = 0;
    auto operator<=>(const RelationTypeId&) const = default;
};

// Ordered, duplicate-free list of relation type labels. Ids are positions.
class RelationRegistry {
public:
    // Relation masks are 64-bit, so a registry holds at most this many types.
    static constexpr std::size_t kMaxTypes = 64;

    RelationRegistry() = default;
    explicit RelationRegistry(std::vector<std::string> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& label(RelationTypeId id) const;
    std::optional<RelationTypeId> find(std::string_view label) const;
    RelationTypeId id(std::string_view label) const;  // throws on unknown label
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool operator==(const RelationRegistry& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
};

using RegistryPtr = std::shared_ptr<const RelationRegistry>;

RegistryPtr make_registry(std::vector<std::string> labels);

struct Entity {
    std::string label;
    std::string kind;
};

struct Relation {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    RelationTypeId type;
    auto operator<=>(const Relation&) const = default;
};

// Entities plus a set of typed directed relations. Immutable once built.
class RelationalNetwork {
public:
    RelationalNetwork(std::vector<Entity> entities, std::span<const Relation> relations,
                      RegistryPtr registry);

    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::span<const Entity> entities() const noexcept { return entities_; }
    // Sorted by (src, dst, type), no duplicates.
    std::span<const Relation> relations() const noexcept { return relations_; }
    const RelationRegistry& registry() const noexcept { return *registry_; }
    const RegistryPtr& registry_ptr() const noexcept { return registry_; }

    // Bit t set iff (src, dst, t) is a relation.
    std::uint64_t mask(std::size_t src, std::size_t dst) const noexcept {
        return masks_[src * entities_.size() + dst];
    }
    // Entities sharing at least one relation with `i` in either direction, excluding `i`.
    std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
        return {neighbor_data_.data() + neighbor_offsets_[i],
                neighbor_offsets_[i + 1] - neighbor_offsets_[i]};
    }
    bool has_relation(std::size_t src, std::size_t dst, RelationTypeId type) const noexcept {
        return (mask(src, dst) >> type.value) & 1u;
    }
    std::optional<std::size_t> find_entity(std::string_view label) const;

private:
    std::vector<Entity> entities_;
    std::vector<Relation> relations_;
    RegistryPtr registry_;
    std::vector<std::uint64_t> masks_;
    std::vector<std::uint32_t> neighbor_offsets_;
    std::vector<std::uint32_t> neighbor_data_;
};

// Validating constructor: range-checks every triple and deduplicates.
RelationalNetwork build_network(std::vector<Entity> entities, std::span<const Relation> relations,
                                RegistryPtr registry);

bool same_registry(const RelationalNetwork& a, const RelationalNetwork& b);

// Partial injective correspondence between source and target entity indices.
class Assignment {
public:
    using Pair = std::pair<std::uint32_t, std::uint32_t>;

    Assignment() = default;
    explicit Assignment(std::vector<Pair> pairs);  // throws if not injective

    std::span<const Pair> pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::optional<std::uint32_t> target_of(std::uint32_t source) const;
    Assignment inverse() const;
    // Adds (source, target); throws if either index is already used.
    void add(std::uint32_t source, std::uint32_t target);
    void validate(std::size_t n_source, std::size_t n_target) const;

    bool operator==(const Assignment&) const = default;

private:
    std::vector<Pair> pairs_;  // sorted by source
};

// Per-type weights; an empty vector means unit weights.
using Weights = std::vector<double>;

void validate_weights(const Weights& weights, const RelationRegistry& registry);

// Weighted count of source relations preserved under `asg`.
double relational_score(const RelationalNetwork& source, const RelationalNetwork& target,
                        const Assignment& asg, const Weights& weights = {});

struct MatchScore {
    double raw = 0.0;
    double normalized = 0.0;
    std::size_t n_source = 0;
    std::size_t n_target = 0;
};

double normalize_score(double raw, std::size_t n_source, std::size_t n_target);
MatchScore make_score(double raw, std::size_t n_source, std::size_t n_target);

struct RelationProfile {
    struct Degrees {
        std::uint32_t out = 0;
        std::uint32_t in = 0;
        bool operator==(const Degrees&) const = default;
    };
    std::vector<Degrees> per_type;  // indexed by RelationTypeId

    bool operator==(const RelationProfile&) const = default;
};

RelationProfile relation_profile(const RelationalNetwork& network, std::size_t entity);
std::vector<RelationProfile> relation_profiles(const RelationalNetwork& network);

// Hash of an all-zero profile. Entries with zero degrees never contribute,
// so the hash ignores registry length as well as type order.
inline constexpr std::uint64_t kEmptyProfileHash = 0x6a09e667f3bcc908ULL;

std::uint64_t signature_hash(const RelationProfile& profile);

// One network of the line-delimited interchange format.
struct NamedNetwork {
    std::string id;
    RelationalNetwork network;
};

// One JSON object per line; blank lines and lines starting with '#' are skipped.
// Networks whose type lists are equal share one registry instance.
std::vector<NamedNetwork> read_networks(std::istream& in);
void write_network(std::ostream& out, const NamedNetwork& named);

}  // namespace relan
