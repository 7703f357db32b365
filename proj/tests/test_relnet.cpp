#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "relan/relnet.hpp"
#include "support.hpp"

using namespace relan;
using relan::testing::literal_score;
using relan::testing::numbered_entities;
using relan::testing::numbered_registry;
using relan::testing::random_network;

namespace {

RegistryPtr attack_registry() { return make_registry({"attack"}); }

std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_of(const Assignment& a) {
    return {a.pairs().begin(), a.pairs().end()};
}

// Random injective assignment of a random subset of source entities.
Assignment random_assignment(std::mt19937_64& rng, std::size_t na, std::size_t nb) {
    std::vector<std::uint32_t> targets(nb);
    std::iota(targets.begin(), targets.end(), 0u);
    std::shuffle(targets.begin(), targets.end(), rng);
    std::bernoulli_distribution keep(0.7);
    std::vector<Assignment::Pair> pairs;
    for (std::uint32_t i = 0; i < std::min(na, nb); ++i) {
        if (keep(rng)) pairs.push_back({i, targets[i]});
    }
    return Assignment(pairs);
}

}  // namespace

TEST_CASE("construction deduplicates and range-checks triples") {
    const auto reg = attack_registry();
    const Relation r{0, 1, RelationTypeId{0}};
    CHECK(build_network(numbered_entities(2), std::vector{r}, reg).relations().size() == 1);
    CHECK(build_network(numbered_entities(2), std::vector{r, r}, reg).relations().size() == 1);
    try {
        build_network(numbered_entities(1), std::vector{r}, reg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("index out of range") != std::string::npos);
        CHECK(std::string(e.what()).find("(0,1,attack)") != std::string::npos);
    }
    CHECK_THROWS_AS(build_network(numbered_entities(2), std::vector{Relation{0, 1, RelationTypeId{3}}}, reg), Error);
}

TEST_CASE("entity order is preserved and masks mirror the triples") {
    std::mt19937_64 rng(7);
    const auto reg = numbered_registry(3);
    const auto net = random_network(rng, 6, reg, 0.3);
    CHECK(net.entities()[4].label == "e4");
    std::size_t bits = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) bits += static_cast<std::size_t>(std::popcount(net.mask(i, j)));
    }
    CHECK(bits == net.relations().size());
    for (const auto& r : net.relations()) CHECK(net.has_relation(r.src, r.dst, r.type));
}

TEST_CASE("registry limits and lookups") {
    std::vector<std::string> many;
    for (int i = 0; i < 65; ++i) many.push_back("t" + std::to_string(i));
    CHECK_THROWS_AS(make_registry(many), Error);
    many.pop_back();
    CHECK(make_registry(many)->size() == 64);
    CHECK_THROWS_AS(make_registry({"a", "a"}), Error);
    const auto reg = make_registry({"x", "y"});
    CHECK(reg->id("y").value == 1);
    CHECK_FALSE(reg->find("z"));
    CHECK_THROWS_AS(reg->id("z"), Error);
}

TEST_CASE("relational_score on the single-relation examples") {
    const auto reg = attack_registry();
    const Relation r{0, 1, RelationTypeId{0}};
    const auto a = build_network(numbered_entities(2), std::vector{r}, reg);
    CHECK(relational_score(a, a, Assignment({{0, 0}, {1, 1}})) == 1.0);
    CHECK(relational_score(a, a, Assignment({{0, 1}, {1, 0}})) == 0.0);
    CHECK(relational_score(a, a, Assignment{}) == 0.0);
}

TEST_CASE("relational_score rejects mismatched registries and invalid assignments") {
    const auto a = build_network(numbered_entities(2), {}, make_registry({"attack"}));
    const auto b = build_network(numbered_entities(2), {}, make_registry({"defense"}));
    CHECK_THROWS_AS(relational_score(a, b, Assignment{}), Error);
    CHECK_THROWS_AS(relational_score(a, a, Assignment({{0, 5}})), Error);
    CHECK_THROWS_AS(Assignment({{0, 1}, {1, 1}}), Error);
    CHECK_THROWS_AS(Assignment({{0, 1}, {0, 0}}), Error);
}

TEST_CASE("relational_score equals a literal triple recount on random networks") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto reg = numbered_registry(1 + trial % 4);
        const auto a = random_network(rng, 4, reg, 0.35);
        const auto b = random_network(rng, 4, reg, 0.35);
        const auto asg = random_assignment(rng, 4, 4);
        std::vector<double> w;
        for (std::size_t t = 0; t < reg->size(); ++t) w.push_back(0.5 + static_cast<double>(t));
        CHECK(relational_score(a, b, asg) == literal_score(a, b, pairs_of(asg)));
        CHECK(relational_score(a, b, asg, w) == doctest::Approx(literal_score(a, b, pairs_of(asg), w)));
    }
}

TEST_CASE("score symmetry, relabeling invariance, monotonicity") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto reg = numbered_registry(3);
        const std::size_t na = 3 + trial % 4, nb = 3 + (trial / 4) % 4;
        const auto a = random_network(rng, na, reg, 0.3);
        const auto b = random_network(rng, nb, reg, 0.3);
        const auto asg = random_assignment(rng, na, nb);
        const double s = relational_score(a, b, asg);

        CHECK(relational_score(b, a, asg.inverse()) == s);

        std::vector<std::uint32_t> perm(nb);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Relation> moved;
        for (const auto& r : b.relations()) moved.push_back({perm[r.src], perm[r.dst], r.type});
        std::vector<Entity> ents(nb);
        for (std::size_t j = 0; j < nb; ++j) ents[perm[j]] = b.entities()[j];
        const auto b2 = build_network(ents, moved, reg);
        std::vector<Assignment::Pair> composed;
        for (const auto& [i, j] : asg.pairs()) composed.push_back({i, perm[j]});
        CHECK(relational_score(a, b2, Assignment(composed)) == s);

        std::set<std::uint32_t> used_t;
        std::set<std::uint32_t> used_s;
        for (const auto& [i, j] : asg.pairs()) {
            used_s.insert(i);
            used_t.insert(j);
        }
        for (std::uint32_t i = 0; i < na; ++i) {
            if (used_s.count(i)) continue;
            for (std::uint32_t j = 0; j < nb; ++j) {
                if (used_t.count(j)) continue;
                auto bigger = asg;
                bigger.add(i, j);
                CHECK(relational_score(a, b, bigger) >= s);
            }
        }
    }
}

TEST_CASE("normalize_score") {
    CHECK(normalize_score(12.0, 4, 9) == 2.0);
    CHECK(normalize_score(0.0, 7, 3) == 0.0);
    for (std::size_t ns : {1u, 3u, 17u}) {
        for (std::size_t nt : {1u, 5u, 30u}) {
            const double raw = 5.30 * std::sqrt(static_cast<double>(ns * nt));
            CHECK(std::abs(normalize_score(raw, ns, nt) - 5.30) < 1e-12);
        }
    }
    CHECK_THROWS_WITH_AS(normalize_score(1.0, 0, 3), "empty network", Error);
    const auto s = make_score(6.0, 2, 8);
    CHECK(s.normalized == 1.5);
    CHECK(s.n_source == 2);
}

TEST_CASE("relation profiles") {
    const auto reg = make_registry({"attack", "defense"});
    const auto net = build_network(numbered_entities(3), std::vector{Relation{0, 1, RelationTypeId{0}}}, reg);
    const auto p0 = relation_profile(net, 0);
    const auto p1 = relation_profile(net, 1);
    CHECK(p0.per_type[0].out == 1);
    CHECK(p0.per_type[0].in == 0);
    CHECK(p1.per_type[0].out == 0);
    CHECK(p1.per_type[0].in == 1);
    const auto p2 = relation_profile(net, 2);
    for (const auto& d : p2.per_type) CHECK(d == RelationProfile::Degrees{});
    CHECK(signature_hash(p2) == kEmptyProfileHash);
    CHECK_THROWS_AS(relation_profile(net, 3), Error);
}

TEST_CASE("profile conservation per relation type") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto reg = numbered_registry(4);
        const auto net = random_network(rng, 5, reg, 0.3);
        const auto profiles = relation_profiles(net);
        for (std::uint32_t t = 0; t < reg->size(); ++t) {
            std::size_t out = 0, in = 0, count = 0;
            for (const auto& p : profiles) {
                out += p.per_type[t].out;
                in += p.per_type[t].in;
            }
            for (const auto& r : net.relations()) count += r.type.value == t;
            CHECK(out == count);
            CHECK(in == count);
        }
    }
}

TEST_CASE("signature hashes: equal profiles agree, the golden set has no collisions") {
    const auto reg = make_registry({"a", "b"});
    const auto net = build_network(numbered_entities(4),
                                   std::vector{Relation{0, 1, RelationTypeId{0}}, Relation{2, 3, RelationTypeId{0}}},
                                   reg);
    CHECK(signature_hash(relation_profile(net, 0)) == signature_hash(relation_profile(net, 2)));
    CHECK(signature_hash(relation_profile(net, 1)) == signature_hash(relation_profile(net, 3)));
    CHECK(signature_hash(relation_profile(net, 0)) != signature_hash(relation_profile(net, 1)));

    // Every profile over three types with degrees 0..2.
    std::set<std::uint64_t> seen;
    std::size_t total = 0;
    for (int code = 0; code < 729; ++code) {
        RelationProfile p;
        p.per_type.resize(3);
        int c = code;
        for (auto& d : p.per_type) {
            d.out = static_cast<std::uint32_t>(c % 3);
            c /= 3;
            d.in = static_cast<std::uint32_t>(c % 3);
            c /= 3;
        }
        seen.insert(signature_hash(p));
        ++total;
    }
    CHECK(seen.size() == total);

    // Trailing zero entries do not change the hash.
    RelationProfile short_p{{{1, 2}}};
    RelationProfile long_p{{{1, 2}, {0, 0}, {0, 0}}};
    CHECK(signature_hash(short_p) == signature_hash(long_p));
}

TEST_CASE("network interchange round trip and registry sharing") {
    std::mt19937_64 rng(3);
    const auto reg = numbered_registry(3);
    std::ostringstream out;
    const NamedNetwork n1{"first", random_network(rng, 5, reg, 0.3)};
    const NamedNetwork n2{"second", random_network(rng, 4, reg, 0.3)};
    write_network(out, n1);
    write_network(out, n2);
    std::istringstream in("# comment\n\n" + out.str());
    const auto back = read_networks(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "first");
    CHECK(back[0].network.relations().size() == n1.network.relations().size());
    CHECK(std::equal(back[0].network.relations().begin(), back[0].network.relations().end(),
                     n1.network.relations().begin()));
    CHECK(back[0].network.registry_ptr() == back[1].network.registry_ptr());
    CHECK(back[1].network.entities()[3].label == "e3");

    std::istringstream bad(R"({"id": "x", "types": ["a"], "entities": ["p"], "relations": [[0, 2, "a"]]})");
    CHECK_THROWS_AS(read_networks(bad), Error);
    std::istringstream unknown(R"({"id": "x", "types": ["a"], "entities": ["p", "q"], "relations": [[0, 1, "b"]]})");
    CHECK_THROWS_AS(read_networks(unknown), Error);
}

TEST_CASE("weights are validated against the registry") {
    const auto reg = make_registry({"a", "b"});
    CHECK_NOTHROW(validate_weights({}, *reg));
    CHECK_NOTHROW(validate_weights({1.0, 2.0}, *reg));
    CHECK_THROWS_AS(validate_weights({1.0}, *reg), Error);
    CHECK_THROWS_AS(validate_weights({1.0, 0.0}, *reg), Error);
}
