#include "relan/leanstates.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded_data.hpp"
#include "utf8.hpp"

namespace relan::lean {

namespace {

using utf8::CodePoint;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string slice(std::string_view text, const std::vector<CodePoint>& cps, std::size_t from, std::size_t to) {
    if (from >= to) return {};
    const std::size_t begin = cps[from].offset;
    const std::size_t end = to < cps.size() ? cps[to].offset : text.size();
    return std::string(text.substr(begin, end - begin));
}

// Index one past the bracket group opened at `open`; unbalanced groups run to the end.
std::size_t skip_group(const std::vector<CodePoint>& cps, std::size_t open) {
    int depth = 0;
    for (std::size_t k = open; k < cps.size(); ++k) {
        if (utf8::is_open_bracket(cps[k].value)) ++depth;
        if (utf8::is_close_bracket(cps[k].value) && --depth == 0) return k + 1;
    }
    return cps.size();
}

// Type-text token with its bracket depth.
struct Token {
    std::string text;
    int depth = 0;
    bool ident = false;
};

std::vector<Token> tokenize(std::string_view text) {
    static const std::vector<std::pair<std::string_view, std::string_view>> kAscii{
        {"<->", "↔"}, {"->", "→"}, {":=", ":="}, {"=>", "=>"}, {"!=", "≠"}, {"<=", "≤"}, {">=", "≥"}};
    const auto cps = utf8::decode(text);
    std::vector<Token> out;
    int depth = 0;
    std::size_t i = 0;
    while (i < cps.size()) {
        const char32_t c = cps[i].value;
        if (utf8::is_space(c)) {
            ++i;
            continue;
        }
        if (utf8::is_ident_start(c) || (c >= '0' && c <= '9')) {
            std::size_t j = i + 1;
            while (j < cps.size() && utf8::is_ident_char(cps[j].value)) ++j;
            std::string word = slice(text, cps, i, j);
            const bool ident = !(c >= '0' && c <= '9');
            if (word == "forall") word = "∀";
            if (word == "exists") word = "∃";
            out.push_back({std::move(word), depth, ident && word != "∀" && word != "∃"});
            i = j;
            continue;
        }
        if (utf8::is_open_bracket(c)) {
            out.push_back({utf8::encode(c), depth, false});
            ++depth;
            ++i;
            continue;
        }
        if (utf8::is_close_bracket(c)) {
            depth = std::max(0, depth - 1);
            out.push_back({utf8::encode(c), depth, false});
            ++i;
            continue;
        }
        bool matched = false;
        for (const auto& [ascii, canon] : kAscii) {
            if (text.substr(cps[i].offset, ascii.size()) == ascii) {
                out.push_back({std::string(canon), depth, false});
                i += ascii.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.push_back({utf8::encode(c), depth, false});
            ++i;
        }
    }
    return out;
}

bool same_texts(std::span<const Token> a, std::span<const Token> b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](const Token& x, const Token& y) { return x.text == y.text; });
}

bool contains_run(std::span<const Token> hay, std::span<const Token> needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    for (std::size_t k = 0; k + needle.size() <= hay.size(); ++k) {
        if (same_texts(hay.subspan(k, needle.size()), needle)) return true;
    }
    return false;
}

// Syntactic facts about one type text used by the relation rules.
struct TypeShape {
    std::vector<Token> tokens;
    std::optional<std::size_t> eq_at;  // top-level '='
    bool iff = false;
    std::string head;  // first identifier token
    std::vector<std::string> skeleton;

    std::span<const Token> lhs() const { return std::span(tokens).first(*eq_at); }
    std::span<const Token> rhs() const { return std::span(tokens).subspan(*eq_at + 1); }
    bool is_equality() const { return eq_at && *eq_at > 0 && *eq_at + 1 < tokens.size(); }
};

TypeShape shape_of(std::string_view type) {
    TypeShape s;
    s.tokens = tokenize(type);
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
        const auto& t = s.tokens[k];
        if (s.head.empty() && t.ident) s.head = t.text;
        if (t.depth != 0) continue;
        if (t.text == "=" && !s.eq_at) s.eq_at = k;
        if (t.text == "↔") s.iff = true;
        if (t.text == "∀" || t.text == "→" || t.text == "∃" || t.text == "∃!") s.skeleton.push_back(t.text);
    }
    return s;
}

enum ProofRel : std::uint32_t {
    kRewrite,
    kFitApply,
    kHeadMatch,
    kStructure,
    kEquality,
    kReflexive,
    kWitness,
    kBidirectional,
    kKernelSimp,
    kDecidable,
    kLemmaNeeded,
};

}  // namespace

std::string TacticSchema::key() const {
    return head + "|" + std::to_string(arity) + "|" + (has_with ? "1" : "0") + "|" + (uses_lemma ? "1" : "0");
}

TacticSchema TacticSchema::from_key(std::string_view key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto bar = key.find('|', start);
        parts.emplace_back(key.substr(start, bar == std::string_view::npos ? bar : bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    auto flag = [&](const std::string& f) {
        if (f == "1") return true;
        if (f == "0") return false;
        throw Error("schema key " + std::string(key) + ": flags must be 0 or 1");
    };
    if (parts.size() != 4 || parts[0].empty()) {
        throw Error("schema key " + std::string(key) + ": expected head|arity|with|lemma");
    }
    TacticSchema s;
    s.head = parts[0];
    try {
        std::size_t used = 0;
        s.arity = static_cast<std::uint32_t>(std::stoul(parts[1], &used));
        if (used != parts[1].size()) throw std::invalid_argument("arity");
    } catch (const std::logic_error&) {
        throw Error("schema key " + std::string(key) + ": bad arity");
    }
    s.has_with = flag(parts[2]);
    s.uses_lemma = flag(parts[3]);
    return s;
}

HeadList HeadList::parse(std::string_view text) {
    std::set<std::string, std::less<>> heads;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) heads.emplace(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return HeadList(std::move(heads));
}

const HeadList& HeadList::known_tactics() {
    static const HeadList list = parse(data::kKnownTacticHeads);
    return list;
}

const HeadList& HeadList::simp_normal() {
    static const HeadList list = parse(data::kSimpHeads);
    return list;
}

const HeadList& HeadList::decidable() {
    static const HeadList list = parse(data::kDecidableHeads);
    return list;
}

SchemaParse parse_schema(std::string_view tactic, const HeadList& known) {
    const auto cps = utf8::decode(tactic);
    std::size_t i = 0;
    while (i < cps.size() && utf8::is_space(cps[i].value)) ++i;
    if (i == cps.size() || !utf8::is_ident_start(cps[i].value)) return {SchemaClass::Unparseable, {}};

    std::size_t j = i;
    while (j < cps.size() && utf8::is_ident_char(cps[j].value)) ++j;
    const std::size_t ident_end = j;
    while (j < cps.size() && (cps[j].value == '!' || cps[j].value == '?')) ++j;

    SchemaParse result{SchemaClass::Schema, {}};
    TacticSchema& s = result.schema;
    s.head = slice(tactic, cps, i, j);

    std::size_t k = j;
    bool rest_empty = true;
    while (k < cps.size()) {
        const char32_t c = cps[k].value;
        if (utf8::is_space(c)) {
            ++k;
            continue;
        }
        rest_empty = false;
        if (utf8::is_open_bracket(c)) {
            if (c == '[') s.uses_lemma = true;
            k = skip_group(cps, k);
            ++s.arity;
            continue;
        }
        if (c == '"') {
            ++k;
            while (k < cps.size() && cps[k].value != '"') k += cps[k].value == '\\' ? 2 : 1;
            k = std::min(k + 1, cps.size());
            ++s.arity;
            continue;
        }
        // Only the first tactic of a sequence ("t1; t2", "t1 <;> t2").
        if (c == ';') break;
        if (c == '<' && k + 2 < cps.size() && cps[k + 1].value == ';' && cps[k + 2].value == '>') break;
        std::size_t e = k;
        while (e < cps.size() && !utf8::is_space(cps[e].value) && !utf8::is_open_bracket(cps[e].value) &&
               cps[e].value != '"' && cps[e].value != ';') {
            ++e;
        }
        const std::string word = slice(tactic, cps, k, e);
        k = e;
        if (word == "with") {
            s.has_with = true;  // with-clause binders are not arguments
            break;
        }
        if (word == ":") continue;                 // separator in "h : t" arguments
        ++s.arity;
    }

    // A lone hypothesis name; "!" or "?" marks a tactic variant.
    if (rest_empty && ident_end == j && !known.contains(s.head)) return {SchemaClass::Shortcut, {}};
    return result;
}

std::string derive_area(std::string_view source_file) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto slash = source_file.find('/', start);
        auto part = source_file.substr(start, slash == std::string_view::npos ? slash : slash - start);
        if (!part.empty() && part != ".") parts.push_back(part);
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    if (parts.size() < 2) throw Error("non-area path: " + std::string(source_file));
    std::string area;
    for (std::size_t k = 0; k < 2; ++k) {
        std::string_view c = parts[k];
        if (c.size() > 5 && c.substr(c.size() - 5) == ".lean") c.remove_suffix(5);
        if (c.empty() || c.find('.') != std::string_view::npos) {
            throw Error("non-area path: " + std::string(source_file));
        }
        if (k == 1) area += '.';
        area += c;
    }
    return area;
}

std::string ProofState::serialize() const {
    std::string out;
    for (const auto& h : hypotheses) out += h.name + " : " + h.type + "\n";
    for (const auto& g : goals) out += "⊢ " + g + "\n";
    return out;
}

void ProofState::validate() const {
    if (goals.empty()) throw Error("proof state has no goal");
    for (std::size_t a = 0; a < hypotheses.size(); ++a) {
        const auto& name = hypotheses[a].name;
        if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
            throw Error("bad hypothesis name '" + name + "'");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (hypotheses[b].name == name) throw Error("duplicate hypothesis name " + name);
        }
    }
}

ProofState parse_proof_state(std::string_view text) {
    static constexpr std::string_view kTurnstile = "⊢";
    ProofState state;
    enum class Last { None, Hyp, Goal } last = Last::None;
    std::size_t hyp_run = 0;  // hypotheses introduced by the latest line
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const std::string_view raw =
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        const std::string where = "proof state line " + std::to_string(line_no);

        if (line.substr(0, kTurnstile.size()) == kTurnstile) {
            const auto goal = trim(line.substr(kTurnstile.size()));
            if (goal.empty()) throw Error(where + ": empty goal");
            state.goals.emplace_back(goal);
            last = Last::Goal;
            continue;
        }
        if ((raw.front() == ' ' || raw.front() == '\t') && last != Last::None) {
            if (last == Last::Goal) {
                state.goals.back() += " " + std::string(line);
            } else {
                for (std::size_t k = state.hypotheses.size() - hyp_run; k < state.hypotheses.size(); ++k) {
                    state.hypotheses[k].type += " " + std::string(line);
                }
            }
            continue;
        }
        const auto colon = line.find(" : ");
        if (colon == std::string_view::npos) throw Error(where + ": expected 'name : type' or '⊢ goal'");
        if (!state.goals.empty()) throw Error(where + ": hypothesis after goal");
        const auto type = trim(line.substr(colon + 3));
        std::istringstream names{std::string(line.substr(0, colon))};
        hyp_run = 0;
        for (std::string name; names >> name;) {
            state.hypotheses.push_back({name, std::string(type)});
            ++hyp_run;
        }
        if (hyp_run == 0) throw Error(where + ": missing hypothesis name");
        last = Last::Hyp;
    }
    state.validate();
    return state;
}

const RegistryPtr& proof_registry() {
    static const RegistryPtr registry = make_registry(
        {"rewrite", "fit/apply", "head-match", "structure", "equality", "reflexive", "witness", "bidirectional",
         "kernel/simp", "decidable", "lemma-needed", "reserved-12", "reserved-13", "reserved-14"});
    return registry;
}

RelationalNetwork extract_proof_relations(const ProofState& state) {
    state.validate();
    const std::size_t nh = state.hypotheses.size();
    std::vector<Entity> entities;
    std::vector<TypeShape> shapes;
    for (const auto& h : state.hypotheses) {
        entities.push_back({h.name, "hyp"});
        shapes.push_back(shape_of(h.type));
    }
    for (std::size_t g = 0; g < state.goals.size(); ++g) {
        entities.push_back({"⊢" + std::to_string(g), "goal"});
        shapes.push_back(shape_of(state.goals[g]));
    }

    std::vector<Relation> rels;
    auto emit = [&](std::size_t a, std::size_t b, ProofRel r) {
        rels.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), RelationTypeId{r}});
    };

    for (std::size_t e = 0; e < shapes.size(); ++e) {
        const auto& s = shapes[e];
        if (s.is_equality()) {
            emit(e, e, kEquality);
            if (same_texts(s.lhs(), s.rhs())) emit(e, e, kReflexive);
        }
        if (s.iff) emit(e, e, kBidirectional);
        for (std::size_t o = 0; o < shapes.size(); ++o) {
            if (o != e && !s.skeleton.empty() && s.skeleton == shapes[o].skeleton) emit(e, o, kStructure);
        }
    }

    for (std::size_t g = nh; g < shapes.size(); ++g) {
        const auto& goal = shapes[g];
        bool supported = false;
        for (std::size_t h = 0; h < nh; ++h) {
            const auto& hyp = shapes[h];
            // An exact type match subsumes the weaker head-match and rewrite evidence.
            if (same_texts(hyp.tokens, goal.tokens)) {
                emit(h, g, kFitApply);
                supported = true;
            } else {
                if (!hyp.head.empty() && hyp.head == goal.head) {
                    emit(h, g, kHeadMatch);
                    supported = true;
                }
                if (hyp.is_equality() && (contains_run(goal.tokens, hyp.lhs()) || contains_run(goal.tokens, hyp.rhs()))) {
                    emit(h, g, kRewrite);
                    supported = true;
                }
            }
            if (!goal.tokens.empty() && (goal.tokens[0].text == "∃" || goal.tokens[0].text == "∃!")) {
                std::size_t body = 1;
                for (std::size_t k = 1; k < goal.tokens.size(); ++k) {
                    if (goal.tokens[k].depth == 0 && goal.tokens[k].text == ",") {
                        body = k + 1;
                        break;
                    }
                }
                if (contains_run(std::span(goal.tokens).subspan(body), hyp.tokens)) emit(h, g, kWitness);
            }
        }
        if (HeadList::simp_normal().contains(goal.head)) emit(g, g, kKernelSimp);
        if (HeadList::decidable().contains(goal.head)) emit(g, g, kDecidable);
        if (!supported) emit(g, g, kLemmaNeeded);
    }
    return build_network(std::move(entities), rels, proof_registry());
}

std::vector<CorpusEntry> read_corpus(std::istream& in, std::vector<CorpusWarning>* warnings) {
    using nlohmann::json;
    std::vector<CorpusEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        try {
            const json rec = json::parse(body);
            if (!rec.is_object()) throw Error("expected a JSON object");
            CorpusEntry e;
            const auto& id = rec.at("id");
            e.id = id.is_string() ? id.get<std::string>() : id.dump();
            e.tactic = rec.at("tactic").get<std::string>();
            if (auto it = rec.find("source_file"); it != rec.end() && !it->is_null()) {
                e.source_file = it->get<std::string>();
            }
            if (auto it = rec.find("state"); it != rec.end() && !it->is_null()) {
                ProofState st;
                for (const auto& h : it->value("hyps", json::array())) {
                    if (!h.is_array() || h.size() != 2) throw Error("hypothesis must be [name, type]");
                    st.hypotheses.push_back({h[0].get<std::string>(), h[1].get<std::string>()});
                }
                st.goals = it->value("goals", json::array()).get<std::vector<std::string>>();
                st.validate();
                e.state = std::move(st);
            }
            out.push_back(std::move(e));
        } catch (const std::exception& ex) {
            if (warnings) warnings->push_back({line_no, ex.what()});
        }
    }
    return out;
}

void write_corpus_entry(std::ostream& out, const CorpusEntry& entry) {
    using nlohmann::json;
    json rec{{"id", entry.id}, {"tactic", entry.tactic}};
    if (entry.source_file) rec["source_file"] = *entry.source_file;
    if (entry.state) {
        json hyps = json::array();
        for (const auto& h : entry.state->hypotheses) hyps.push_back({h.name, h.type});
        rec["state"] = {{"hyps", hyps}, {"goals", entry.state->goals}};
    }
    out << rec.dump() << '\n';
}

}  // namespace relan::lean
