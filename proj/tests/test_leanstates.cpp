#include <doctest.h>

#include <fstream>
#include <sstream>

#include "relan/leanstates.hpp"

using namespace relan;
using namespace relan::lean;

namespace {

std::string classify(const std::string& tactic) {
    const auto p = parse_schema(tactic);
    switch (p.kind) {
        case SchemaClass::Shortcut:
            return "Shortcut";
        case SchemaClass::Unparseable:
            return "Unparseable";
        case SchemaClass::Schema:
            break;
    }
    return p.schema.key();
}

bool rel(const RelationalNetwork& net, std::size_t s, std::size_t d, const char* type) {
    return net.has_relation(s, d, net.registry().id(type));
}

std::size_t count_type(const RelationalNetwork& net, const char* type) {
    const auto id = net.registry().id(type);
    std::size_t n = 0;
    for (const auto& r : net.relations()) n += r.type == id;
    return n;
}

}  // namespace

TEST_CASE("parser golden file") {
    std::ifstream in(RELAN_TEST_DATA "/parser_golden.tsv");
    REQUIRE(in);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        const auto tactic = line.substr(0, tab);
        const auto expected = line.substr(tab + 1);
        CAPTURE(tactic);
        CHECK(classify(tactic) == expected);
        ++rows;
    }
    CHECK(rows == 20);
}

TEST_CASE("schema examples") {
    const auto fu = parse_schema("filter_upwards [h_eq s f hf, h_inter_eq s f hf, h'] with omega h_eq h_inter_eq h'");
    REQUIRE(fu.kind == SchemaClass::Schema);
    CHECK(fu.schema.head == "filter_upwards");
    CHECK(fu.schema.arity == 1);
    CHECK(fu.schema.has_with);
    CHECK(fu.schema.uses_lemma);
    CHECK(classify("hx") == "Shortcut");
    CHECK(classify("rfl") == "rfl|0|0|0");
    CHECK(classify("any_goals rfl") == "any_goals|1|0|0");
    CHECK(classify("by_cases h : x ≤ y") == "by_cases|4|0|0");
    CHECK(classify("   ") == "Unparseable");
    CHECK(classify("") == "Unparseable");
    CHECK(classify("exact \"a b\" c") == "exact|2|0|0");
    CHECK(classify("apply foo; simp") == "apply|1|0|0");
    CHECK(classify("ring_nf!") == "ring_nf!|0|0|0");
    CHECK(classify("have h : x < y") == "have|4|0|0");
    CHECK(classify("simp<;>ring") == "simp|0|0|0");
    CHECK(classify("hα₂'") == "Shortcut");
}

TEST_CASE("classification is a partition") {
    const char* tactics[] = {"rfl", "hx", "· simp", "simp [a]", "h₁", "42", "exact?", "norm_num at h"};
    std::size_t schema = 0, shortcut = 0, unparseable = 0;
    for (const char* t : tactics) {
        switch (parse_schema(t).kind) {
            case SchemaClass::Schema: ++schema; break;
            case SchemaClass::Shortcut: ++shortcut; break;
            case SchemaClass::Unparseable: ++unparseable; break;
        }
    }
    CHECK(schema + shortcut + unparseable == std::size(tactics));
    CHECK(schema == 4);
    CHECK(shortcut == 2);
    CHECK(unparseable == 2);
}

TEST_CASE("head lists") {
    CHECK(HeadList::known_tactics().contains("filter_upwards"));
    CHECK(HeadList::known_tactics().contains("rfl"));
    CHECK_FALSE(HeadList::known_tactics().contains("hx"));
    const auto custom = HeadList::parse("# comment\n  foo  \n\nbar\n");
    CHECK(custom.size() == 2);
    CHECK(custom.contains("foo"));
    CHECK(parse_schema("foo", custom).kind == SchemaClass::Schema);
    CHECK(parse_schema("rfl", custom).kind == SchemaClass::Shortcut);
}

TEST_CASE("schema keys round trip") {
    TacticSchema s{"filter_upwards", 1, true, true};
    CHECK(s.key() == "filter_upwards|1|1|1");
    CHECK(TacticSchema::from_key(s.key()) == s);
    const TacticSchema greek{"μ_simp₂", 3, false, true};
    CHECK(TacticSchema::from_key(greek.key()) == greek);
    CHECK_THROWS_AS(TacticSchema::from_key("rfl|0|0"), Error);
    CHECK_THROWS_AS(TacticSchema::from_key("rfl|x|0|0"), Error);
    CHECK_THROWS_AS(TacticSchema::from_key("rfl|0|2|0"), Error);
    CHECK_THROWS_AS(TacticSchema::from_key("|0|0|0"), Error);
}

TEST_CASE("derive_area") {
    CHECK(derive_area("Mathlib/Probability/Kernel/Basic.lean") == "Mathlib.Probability");
    CHECK(derive_area("Mathlib/Tactic/Linarith/Frontend.lean") == "Mathlib.Tactic");
    CHECK(derive_area("Mathlib/Order.lean") == "Mathlib.Order");
    CHECK_THROWS_WITH_AS(derive_area("Mathlib"), doctest::Contains("non-area path"), Error);
    CHECK_THROWS_AS(derive_area(""), Error);
    CHECK_THROWS_AS(derive_area("Mathlib.lean"), Error);
    for (const char* p : {"A/B", "A/B/C/D.lean", "./X/Y/z.lean"}) {
        const auto a = derive_area(p);
        CHECK(std::count(a.begin(), a.end(), '.') == 1);
    }
}

TEST_CASE("proof state grammar") {
    const auto s1 = parse_proof_state("h : x = y\n⊢ y = x");
    CHECK(s1.hypotheses.size() == 1);
    CHECK(s1.hypotheses[0] == Hypothesis{"h", "x = y"});
    CHECK(s1.goals == std::vector<std::string>{"y = x"});

    const auto s2 = parse_proof_state("⊢ True");
    CHECK(s2.hypotheses.empty());
    CHECK(s2.goals.size() == 1);

    CHECK_THROWS_WITH_AS(parse_proof_state("h : A\nh : B\n⊢ A"), doctest::Contains("duplicate"), Error);
    CHECK_THROWS_AS(parse_proof_state("h : A"), Error);
    CHECK_THROWS_AS(parse_proof_state(""), Error);

    const auto s3 = parse_proof_state("x y : ℕ\nhxy : x < y\n⊢ x ≤ y\n⊢ 0 < y");
    CHECK(s3.hypotheses.size() == 3);
    CHECK(s3.hypotheses[1] == Hypothesis{"y", "ℕ"});
    CHECK(s3.goals.size() == 2);
}

TEST_CASE("proof states round trip through serialization") {
    const char* texts[] = {
        "h : x = y\n⊢ y = x",
        "⊢ True",
        "f : ℕ → ℕ\nhf : ∀ n, f n = n\nh₁ : f 0 = 0\n⊢ ∃ m, f m = 0",
        "μ : Measure α\nhμ : IsFiniteMeasure μ\n⊢ μ univ < ⊤\n⊢ True",
    };
    for (const char* t : texts) {
        const auto s = parse_proof_state(t);
        CHECK(parse_proof_state(s.serialize()) == s);
    }
}

TEST_CASE("proof relations: fit/apply and equality") {
    const auto net = extract_proof_relations(parse_proof_state("h : a = b\n⊢ a = b"));
    REQUIRE(net.entity_count() == 2);
    CHECK(net.entities()[0].label == "h");
    CHECK(net.entities()[1].kind == "goal");
    CHECK(rel(net, 0, 0, "equality"));
    CHECK(rel(net, 1, 1, "equality"));
    CHECK(rel(net, 0, 1, "fit/apply"));
    CHECK_FALSE(rel(net, 1, 1, "lemma-needed"));
}

TEST_CASE("proof relations: reflexive goal") {
    const auto net = extract_proof_relations(parse_proof_state("⊢ x = x"));
    CHECK(rel(net, 0, 0, "reflexive"));
    CHECK(rel(net, 0, 0, "equality"));
    CHECK(rel(net, 0, 0, "lemma-needed"));
}

TEST_CASE("proof relations: iff hypothesis and head mismatch") {
    const auto net = extract_proof_relations(parse_proof_state("h : P ↔ Q\n⊢ Q"));
    CHECK(rel(net, 0, 0, "bidirectional"));
    CHECK_FALSE(rel(net, 0, 1, "head-match"));
    CHECK_FALSE(rel(net, 0, 1, "fit/apply"));
}

TEST_CASE("proof relations: rewrite, witness, structure, simp and decidable heads") {
    const auto net = extract_proof_relations(
        parse_proof_state("h : f x = g x\nhp : 0 < x\nk : ∀ a, a → b\n⊢ ∃ y, 0 < x ∧ f x = y\n⊢ ∀ c, c → d\n"
                          "⊢ Even 4\n⊢ True"));
    // entities: h, hp, k, ⊢0, ⊢1, ⊢2, ⊢3
    CHECK(rel(net, 0, 3, "rewrite"));
    CHECK(rel(net, 1, 3, "witness"));
    CHECK(rel(net, 2, 4, "structure"));
    CHECK(rel(net, 4, 2, "structure"));
    CHECK(rel(net, 5, 5, "decidable"));
    CHECK(rel(net, 6, 6, "kernel/simp"));
    CHECK(rel(net, 5, 5, "lemma-needed"));
    for (const char* reserved : {"reserved-12", "reserved-13", "reserved-14"}) CHECK(count_type(net, reserved) == 0);
}

TEST_CASE("proof registry has fourteen slots and every equality hypothesis is tagged") {
    CHECK(proof_registry()->size() == 14);
    const auto state = parse_proof_state("a : x = y\nb : P\nc : (u = v)\nd : f = g ∘ h\n⊢ P");
    const auto net = extract_proof_relations(state);
    CHECK(rel(net, 0, 0, "equality"));
    CHECK_FALSE(rel(net, 1, 1, "equality"));
    CHECK(rel(net, 3, 3, "equality"));
    for (const auto& r : net.relations()) CHECK(r.type.value < proof_registry()->size());
}

TEST_CASE("corpus reader keeps good lines and warns on bad ones") {
    std::istringstream in(
        "{\"id\": \"a\", \"tactic\": \"rfl\", \"source_file\": \"Mathlib/Order/Basic.lean\"}\n"
        "not json\n"
        "\n"
        "{\"id\": \"b\", \"tactic\": \"simp\", \"state\": {\"hyps\": [[\"h\", \"x = y\"]], \"goals\": [\"y = x\"]}}\n"
        "{\"id\": \"c\"}\n"
        "{\"id\": \"d\", \"tactic\": \"rfl\", \"state\": {\"hyps\": [], \"goals\": []}}\n");
    std::vector<CorpusWarning> warnings;
    const auto entries = read_corpus(in, &warnings);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].source_file == "Mathlib/Order/Basic.lean");
    CHECK_FALSE(entries[1].source_file);
    REQUIRE(entries[1].state);
    CHECK(entries[1].state->hypotheses[0].name == "h");
    REQUIRE(warnings.size() == 3);
    CHECK(warnings[0].line == 2);
    CHECK(warnings[1].line == 5);
    CHECK(warnings[2].line == 6);

    std::ostringstream out;
    for (const auto& e : entries) write_corpus_entry(out, e);
    std::istringstream again(out.str());
    const auto back = read_corpus(again);
    REQUIRE(back.size() == 2);
    CHECK(back[1].state == entries[1].state);
    CHECK(back[0].tactic == "rfl");
}
