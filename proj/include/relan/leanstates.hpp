#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "relan/relnet.hpp"

namespace relan::lean {

// Abstraction of a tactic invocation: (head, arity, has_with, uses_lemma).
struct TacticSchema {
    std::string head;
    std::uint32_t arity = 0;
    bool has_with = false;
    bool uses_lemma = false;

    // "head|arity|with|lemma" with flags rendered 1/0.
    std::string key() const;
    static TacticSchema from_key(std::string_view key);

    auto operator<=>(const TacticSchema&) const = default;
};

enum class SchemaClass { Schema, Shortcut, Unparseable };

struct SchemaParse {
    SchemaClass kind = SchemaClass::Unparseable;
    TacticSchema schema;  // meaningful only for SchemaClass::Schema
};

// Set of heads that count as tactics when they stand alone.
class HeadList {
public:
    HeadList() = default;
    explicit HeadList(std::set<std::string, std::less<>> heads) : heads_(std::move(heads)) {}

    // One entry per line, '#' comments, surrounding whitespace ignored.
    static HeadList parse(std::string_view text);
    static const HeadList& known_tactics();
    static const HeadList& simp_normal();
    static const HeadList& decidable();

    bool contains(std::string_view head) const { return heads_.find(head) != heads_.end(); }
    std::size_t size() const { return heads_.size(); }

private:
    std::set<std::string, std::less<>> heads_;
};

SchemaParse parse_schema(std::string_view tactic, const HeadList& known = HeadList::known_tactics());

// "Mathlib/Probability/Kernel/Basic.lean" -> "Mathlib.Probability".
std::string derive_area(std::string_view source_file);

struct Hypothesis {
    std::string name;
    std::string type;
    bool operator==(const Hypothesis&) const = default;
};

struct ProofState {
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> goals;

    // "name : type" lines followed by "⊢ goal" lines.
    std::string serialize() const;
    void validate() const;  // at least one goal, unique hypothesis names
    bool operator==(const ProofState&) const = default;
};

ProofState parse_proof_state(std::string_view text);

// Relation type labels, in registry order. The last three are reserved slots.
const RegistryPtr& proof_registry();

// Entities are hypotheses (kind "hyp") then goals (kind "goal").
RelationalNetwork extract_proof_relations(const ProofState& state);

struct CorpusEntry {
    std::string id;
    std::string tactic;
    std::optional<std::string> source_file;
    std::optional<ProofState> state;
};

struct CorpusWarning {
    std::size_t line = 0;
    std::string message;
};

// Line-delimited JSON records. Malformed lines become warnings and are skipped.
std::vector<CorpusEntry> read_corpus(std::istream& in, std::vector<CorpusWarning>* warnings = nullptr);
void write_corpus_entry(std::ostream& out, const CorpusEntry& entry);

}  // namespace relan::lean
