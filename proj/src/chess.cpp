#include "relan/chess.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded_data.hpp"

namespace relan::chess {

namespace {

enum Rel : std::uint32_t { kAttack, kDefense, kBlocking, kConfinement, kPinning };

constexpr std::array<std::pair<int, int>, 8> kKnightSteps{
    {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}}};
constexpr std::array<std::pair<int, int>, 8> kKingSteps{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
constexpr std::array<std::pair<int, int>, 4> kRookDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
constexpr std::array<std::pair<int, int>, 4> kBishopDirs{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

bool on_board(int f, int r) { return f >= 0 && f < 8 && r >= 0 && r < 8; }
Square sq_at(int f, int r) { return static_cast<Square>(r * 8 + f); }
Color enemy(Color c) { return c == Color::White ? Color::Black : Color::White; }
int forward(Color c) { return c == Color::White ? 1 : -1; }

bool is_slider(PieceKind k) {
    return k == PieceKind::Bishop || k == PieceKind::Rook || k == PieceKind::Queen;
}

std::vector<std::pair<int, int>> slider_dirs(PieceKind k) {
    std::vector<std::pair<int, int>> dirs;
    if (k == PieceKind::Rook || k == PieceKind::Queen) dirs.insert(dirs.end(), kRookDirs.begin(), kRookDirs.end());
    if (k == PieceKind::Bishop || k == PieceKind::Queen) {
        dirs.insert(dirs.end(), kBishopDirs.begin(), kBishopDirs.end());
    }
    return dirs;
}

char piece_letter(PieceKind k) {
    switch (k) {
        case PieceKind::Pawn: return 'p';
        case PieceKind::Knight: return 'n';
        case PieceKind::Bishop: return 'b';
        case PieceKind::Rook: return 'r';
        case PieceKind::Queen: return 'q';
        case PieceKind::King: return 'k';
    }
    return '?';
}

const char* kind_name(PieceKind k) {
    switch (k) {
        case PieceKind::Pawn: return "pawn";
        case PieceKind::Knight: return "knight";
        case PieceKind::Bishop: return "bishop";
        case PieceKind::Rook: return "rook";
        case PieceKind::Queen: return "queen";
        case PieceKind::King: return "king";
    }
    return "?";
}

std::optional<PieceKind> kind_from_letter(char c) {
    switch (c) {
        case 'p': return PieceKind::Pawn;
        case 'n': return PieceKind::Knight;
        case 'b': return PieceKind::Bishop;
        case 'r': return PieceKind::Rook;
        case 'q': return PieceKind::Queen;
        case 'k': return PieceKind::King;
        default: return std::nullopt;
    }
}

std::vector<Square> hops(Square from, std::span<const std::pair<int, int>> steps) {
    std::vector<Square> out;
    for (auto [df, dr] : steps) {
        int f = file_of(from) + df, r = rank_of(from) + dr;
        if (on_board(f, r)) out.push_back(sq_at(f, r));
    }
    return out;
}

// Squares the piece could move to geometrically; for sliders the ray stops
// at (and includes) the first occupant.
std::vector<Square> destination_squares(const ChessPosition& pos, Square from) {
    const Piece p = *pos.at(from);
    if (p.kind == PieceKind::Pawn) {
        std::vector<Square> out;
        const int f = file_of(from), r = rank_of(from), dir = forward(p.color);
        if (on_board(f, r + dir)) {
            out.push_back(sq_at(f, r + dir));
            const int home = p.color == Color::White ? 1 : 6;
            if (r == home && !pos.at(sq_at(f, r + dir)) && on_board(f, r + 2 * dir)) {
                out.push_back(sq_at(f, r + 2 * dir));
            }
        }
        for (int df : {-1, 1}) {
            if (on_board(f + df, r + dir)) out.push_back(sq_at(f + df, r + dir));
        }
        return out;
    }
    return attacked_squares(pos, from);
}

std::vector<Square> pseudo_legal_targets(const ChessPosition& pos, Square from) {
    const Piece p = *pos.at(from);
    std::vector<Square> out;
    if (p.kind == PieceKind::Pawn) {
        const int f = file_of(from), r = rank_of(from), dir = forward(p.color);
        if (on_board(f, r + dir) && !pos.at(sq_at(f, r + dir))) {
            out.push_back(sq_at(f, r + dir));
            const int home = p.color == Color::White ? 1 : 6;
            if (r == home && on_board(f, r + 2 * dir) && !pos.at(sq_at(f, r + 2 * dir))) {
                out.push_back(sq_at(f, r + 2 * dir));
            }
        }
        for (int df : {-1, 1}) {
            if (!on_board(f + df, r + dir)) continue;
            const auto& victim = pos.at(sq_at(f + df, r + dir));
            if (victim && victim->color != p.color) out.push_back(sq_at(f + df, r + dir));
        }
        return out;
    }
    for (Square to : attacked_squares(pos, from)) {
        const auto& occ = pos.at(to);
        if (!occ || occ->color != p.color) out.push_back(to);
    }
    return out;
}

}  // namespace

std::string square_name(Square sq) {
    return {static_cast<char>('a' + file_of(sq)), static_cast<char>('1' + rank_of(sq))};
}

std::string piece_label(Piece piece, Square sq) {
    char letter = piece_letter(piece.kind);
    if (piece.color == Color::White) letter = static_cast<char>(letter - 'a' + 'A');
    return letter + square_name(sq);
}

std::vector<Square> ChessPosition::occupied() const {
    std::vector<Square> out;
    for (int r = 7; r >= 0; --r) {
        for (int f = 0; f < 8; ++f) {
            if (board_[sq_at(f, r)]) out.push_back(sq_at(f, r));
        }
    }
    return out;
}

std::size_t ChessPosition::piece_count() const {
    return static_cast<std::size_t>(std::count_if(board_.begin(), board_.end(), [](const auto& p) { return p.has_value(); }));
}

std::optional<Square> ChessPosition::king(Color color) const {
    std::optional<Square> found;
    for (int s = 0; s < 64; ++s) {
        const auto& p = board_[s];
        if (p && p->kind == PieceKind::King && p->color == color) {
            if (found) return std::nullopt;
            found = static_cast<Square>(s);
        }
    }
    return found;
}

ChessPosition parse_fen(std::string_view fen) {
    const auto begin = fen.find_first_not_of(" \t");
    if (begin == std::string_view::npos) throw Error("FEN: empty input");
    fen.remove_prefix(begin);
    const auto space = fen.find(' ');
    const std::string_view placement = fen.substr(0, space);

    ChessPosition pos;
    int rank_index = 0;  // 0 = eighth rank, as written; errors use chess numbering
    int file = 0;
    auto fail = [&](const std::string& what) -> Error {
        return Error("FEN rank " + std::to_string(8 - rank_index) + ": " + what);
    };
    for (char c : placement) {
        if (c == '/') {
            if (file != 8) throw fail("rank describes " + std::to_string(file) + " squares, expected 8");
            if (++rank_index > 7) throw Error("FEN: more than 8 ranks");
            file = 0;
        } else if (c >= '1' && c <= '8') {
            file += c - '0';
            if (file > 8) throw fail("rank describes more than 8 squares");
        } else {
            const char lower = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
            auto kind = kind_from_letter(lower);
            if (!kind) throw fail(std::string("bad piece letter '") + c + "'");
            if (file >= 8) throw fail("rank describes more than 8 squares");
            pos.set(sq_at(file, 7 - rank_index), Piece{lower == c ? Color::Black : Color::White, *kind});
            ++file;
        }
    }
    if (file != 8) throw fail("rank describes " + std::to_string(file) + " squares, expected 8");
    if (rank_index != 7) throw fail("expected 8 ranks");

    if (space != std::string_view::npos) {
        auto rest = fen.substr(space);
        const auto s = rest.find_first_not_of(' ');
        if (s != std::string_view::npos) {
            if (rest[s] == 'b') {
                pos.set_side_to_move(Color::Black);
            } else if (rest[s] != 'w') {
                throw Error(std::string("FEN: bad side to move '") + rest[s] + "'");
            }
        }
    }
    return pos;
}

std::vector<Square> attacked_squares(const ChessPosition& pos, Square from) {
    const auto& piece = pos.at(from);
    if (!piece) return {};
    switch (piece->kind) {
        case PieceKind::Pawn: {
            std::vector<Square> out;
            const int f = file_of(from), r = rank_of(from) + forward(piece->color);
            for (int df : {-1, 1}) {
                if (on_board(f + df, r)) out.push_back(sq_at(f + df, r));
            }
            return out;
        }
        case PieceKind::Knight: return hops(from, kKnightSteps);
        case PieceKind::King: return hops(from, kKingSteps);
        default: break;
    }
    std::vector<Square> out;
    for (auto [df, dr] : slider_dirs(piece->kind)) {
        int f = file_of(from) + df, r = rank_of(from) + dr;
        while (on_board(f, r)) {
            out.push_back(sq_at(f, r));
            if (pos.at(sq_at(f, r))) break;
            f += df;
            r += dr;
        }
    }
    return out;
}

bool is_attacked_by(const ChessPosition& pos, Square sq, Color attacker) {
    for (int s = 0; s < 64; ++s) {
        const auto& p = pos.at(static_cast<Square>(s));
        if (!p || p->color != attacker) continue;
        const auto att = attacked_squares(pos, static_cast<Square>(s));
        if (std::find(att.begin(), att.end(), sq) != att.end()) return true;
    }
    return false;
}

int legal_move_count(const ChessPosition& pos, Square from) {
    const auto& piece = pos.at(from);
    if (!piece) throw Error("no piece on " + square_name(from));
    int count = 0;
    for (Square to : pseudo_legal_targets(pos, from)) {
        ChessPosition next = pos;
        next.set(to, piece);
        next.set(from, std::nullopt);
        const auto king = next.king(piece->color);
        if (!king || !is_attacked_by(next, *king, enemy(piece->color))) ++count;
    }
    return count;
}

const RegistryPtr& chess_registry() {
    static const RegistryPtr registry =
        make_registry({"attack", "defense", "blocking", "confinement", "pinning"});
    return registry;
}

RelationalNetwork extract_chess_relations(const ChessPosition& pos) {
    const auto squares = pos.occupied();
    std::array<int, 64> index{};
    index.fill(-1);
    std::vector<Entity> entities;
    for (std::size_t e = 0; e < squares.size(); ++e) {
        const Piece p = *pos.at(squares[e]);
        index[squares[e]] = static_cast<int>(e);
        entities.push_back({piece_label(p, squares[e]),
                            std::string(p.color == Color::White ? "white-" : "black-") + kind_name(p.kind)});
    }

    std::vector<Relation> rels;
    auto emit = [&](Square a, Square b, Rel type) {
        rels.push_back({static_cast<std::uint32_t>(index[a]), static_cast<std::uint32_t>(index[b]),
                        RelationTypeId{type}});
    };

    for (Square from : squares) {
        const Piece p = *pos.at(from);
        for (Square to : attacked_squares(pos, from)) {
            const auto& q = pos.at(to);
            if (!q) continue;
            emit(from, to, q->color == p.color ? kDefense : kAttack);
        }
        if (!is_slider(p.kind)) continue;
        for (auto [df, dr] : slider_dirs(p.kind)) {
            int f = file_of(from) + df, r = rank_of(from) + dr;
            std::optional<Square> first;
            while (on_board(f, r)) {
                const Square s = sq_at(f, r);
                if (const auto& occ = pos.at(s)) {
                    if (!first) {
                        first = s;
                        if (occ->color == p.color) {
                            emit(s, from, kBlocking);  // friendly obstruction: blocker -> slider
                            break;
                        }
                        if (occ->kind == PieceKind::King) break;
                    } else {
                        if (occ->color != p.color && occ->kind == PieceKind::King) emit(from, *first, kPinning);
                        break;
                    }
                }
                f += df;
                r += dr;
            }
        }
    }

    for (Square target : squares) {
        if (legal_move_count(pos, target) != 0) continue;
        const Piece q = *pos.at(target);
        ChessPosition without = pos;
        without.set(target, std::nullopt);
        const auto dests = destination_squares(pos, target);
        for (Square from : squares) {
            if (from == target) continue;
            const Piece p = *pos.at(from);
            bool confines = std::find(dests.begin(), dests.end(), from) != dests.end();
            if (!confines && p.color != q.color) {
                for (Square s : attacked_squares(without, from)) {
                    if (std::find(dests.begin(), dests.end(), s) != dests.end()) {
                        confines = true;
                        break;
                    }
                }
            }
            if (confines) emit(from, target, kConfinement);
        }
    }
    return build_network(std::move(entities), rels, chess_registry());
}

std::vector<BatteryCase> read_battery(std::istream& in) {
    using nlohmann::json;
    std::vector<BatteryCase> cases;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            json rec = json::parse(line);
            BatteryCase c;
            c.name = rec.at("name").get<std::string>();
            c.fen_a = rec.at("fen_a").get<std::string>();
            c.fen_b = rec.at("fen_b").get<std::string>();
            for (const auto& k : rec.value("key", json::array())) {
                if (!k.is_array() || k.size() != 2) throw Error("key entry must be [label, [labels...]]");
                c.key.push_back({k[0].get<std::string>(), k[1].get<std::vector<std::string>>()});
            }
            cases.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw Error("battery record on line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error("battery record on line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cases;
}

std::string_view default_battery_text() { return data::kBattery; }

std::vector<BatteryCase> default_battery() {
    std::istringstream in{std::string(default_battery_text())};
    return read_battery(in);
}

BatteryReport run_battery(std::span<const BatteryCase> cases, const MatchConfig& config) {
    BatteryReport report;
    for (const auto& c : cases) {
        CaseReport cr;
        cr.name = c.name;
        cr.total = c.key.size();
        try {
            const auto net_a = extract_chess_relations(parse_fen(c.fen_a));
            const auto net_b = extract_chess_relations(parse_fen(c.fen_b));
            for (const auto& k : c.key) {
                if (!net_a.find_entity(k.from)) throw Error("key label " + k.from + " not found in position A");
                for (const auto& t : k.to) {
                    if (!net_b.find_entity(t)) throw Error("key label " + t + " not found in position B");
                }
            }
            cr.match = match(net_a, net_b, config);
            for (const auto& k : c.key) {
                KeyOutcome ko{k.from, "-", false};
                const auto i = *net_a.find_entity(k.from);
                if (auto t = cr.match.assignment.target_of(static_cast<std::uint32_t>(i))) {
                    ko.mapped_to = net_b.entities()[*t].label;
                    ko.satisfied = std::find(k.to.begin(), k.to.end(), ko.mapped_to) != k.to.end();
                }
                cr.satisfied += ko.satisfied ? 1 : 0;
                cr.keys.push_back(std::move(ko));
            }
        } catch (const Error& e) {
            cr.error = e.what();
            cr.satisfied = 0;
            cr.keys.clear();
        }
        report.satisfied += cr.satisfied;
        report.total += cr.total;
        report.cases.push_back(std::move(cr));
    }
    return report;
}

void print_battery_report(std::ostream& out, const BatteryReport& report) {
    for (const auto& c : report.cases) {
        out << c.name << "\t" << c.satisfied << "/" << c.total;
        if (c.error) {
            out << "\terror: " << *c.error << "\n";
            continue;
        }
        out << "\traw=" << c.match.score.raw << "\tnormalized=" << c.match.score.normalized << "\n";
        for (const auto& k : c.keys) {
            out << "  " << (k.satisfied ? "ok  " : "MISS") << " " << k.from << " -> " << k.mapped_to << "\n";
        }
    }
    out << "total\t" << report.satisfied << "/" << report.total << "\n";
}

}  // namespace relan::chess
