#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relan/matcher.hpp"
#include "relan/relnet.hpp"

namespace relan::chess {

enum class Color : std::uint8_t { White, Black };
enum class PieceKind : std::uint8_t { Pawn, Knight, Bishop, Rook, Queen, King };

struct Piece {
    Color color = Color::White;
    PieceKind kind = PieceKind::Pawn;
    bool operator==(const Piece&) const = default;
};

// 0 = a1, 7 = h1, 63 = h8.
using Square = std::uint8_t;

constexpr int file_of(Square sq) { return sq % 8; }
constexpr int rank_of(Square sq) { return sq / 8; }
std::string square_name(Square sq);
// "Qh4" for a white queen on h4, "qh4" for a black one.
std::string piece_label(Piece piece, Square sq);

class ChessPosition {
public:
    const std::optional<Piece>& at(Square sq) const { return board_[sq]; }
    void set(Square sq, std::optional<Piece> piece) { board_[sq] = piece; }
    Color side_to_move() const noexcept { return side_to_move_; }
    void set_side_to_move(Color c) noexcept { side_to_move_ = c; }

    // Occupied squares in FEN reading order (a8..h8, a7..h7, ..., a1..h1).
    std::vector<Square> occupied() const;
    std::size_t piece_count() const;
    std::optional<Square> king(Color color) const;  // empty unless exactly one king of that color

private:
    std::array<std::optional<Piece>, 64> board_{};
    Color side_to_move_ = Color::White;
};

// Piece placement plus optional side-to-move; remaining fields are ignored.
ChessPosition parse_fen(std::string_view fen);

// Squares `from` attacks: pawn diagonals, knight and king hops, slider rays
// up to and including the first occupied square.
std::vector<Square> attacked_squares(const ChessPosition& pos, Square from);
bool is_attacked_by(const ChessPosition& pos, Square sq, Color attacker);

// Moves of the piece on `from` that do not leave its own king attacked.
// Castling and en passant are not generated; side to move is ignored.
int legal_move_count(const ChessPosition& pos, Square from);

// Registry: attack, defense, blocking, confinement, pinning.
const RegistryPtr& chess_registry();

// Entities are pieces in FEN reading order; kind tags are "white-queen" etc.
RelationalNetwork extract_chess_relations(const ChessPosition& pos);

struct KeyMapping {
    std::string from;             // entity label in position A
    std::vector<std::string> to;  // acceptable entity labels in position B
};

struct BatteryCase {
    std::string name;
    std::string fen_a;
    std::string fen_b;
    std::vector<KeyMapping> key;
};

struct KeyOutcome {
    std::string from;
    std::string mapped_to;  // "-" when unassigned
    bool satisfied = false;
};

struct CaseReport {
    std::string name;
    std::size_t satisfied = 0;
    std::size_t total = 0;
    std::optional<std::string> error;
    std::vector<KeyOutcome> keys;
    MatchResult match;
};

struct BatteryReport {
    std::vector<CaseReport> cases;
    std::size_t satisfied = 0;
    std::size_t total = 0;

    bool all_satisfied() const { return satisfied == total; }
};

BatteryReport run_battery(std::span<const BatteryCase> cases, const MatchConfig& config = {});

std::vector<BatteryCase> read_battery(std::istream& in);
// The three built-in cases (Fool's Mate, Wilkins, Linhares-Chada reconstruction).
std::vector<BatteryCase> default_battery();
std::string_view default_battery_text();

void print_battery_report(std::ostream& out, const BatteryReport& report);

}  // namespace relan::chess
