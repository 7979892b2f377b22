#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocmcts/mdp.hpp"

namespace vocmcts {

/// 4x4 peg solitaire board; bit (4 * row + col) set means a peg.
class PegBoard {
public:
    static constexpr int kSide = 4;
    static constexpr int kCells = kSide * kSide;

    PegBoard() = default;
    explicit PegBoard(std::uint16_t bits) : bits_(bits) {}

    static PegBoard from_string(const std::string& cells);  // 16 chars of 'x'/'.'
    std::string to_string() const;

    std::uint16_t bits() const { return bits_; }
    bool occupied(int row, int col) const { return (bits_ >> (row * kSide + col)) & 1u; }
    int peg_count() const;

private:
    std::uint16_t bits_ = 0;
};

/// Orthogonal jump: the peg at `from` jumps over `over` into the empty `to`.
struct PegMove {
    int from;
    int over;
    int to;

    friend bool operator==(const PegMove&, const PegMove&) = default;
};

/// Legal moves in a fixed order: by source cell, then right, down, left, up.
std::vector<PegMove> peg_legal_moves(const PegBoard& board);
/// Throws std::invalid_argument for an illegal move.
PegBoard peg_apply(const PegBoard& board, const PegMove& move);
/// Pegs remaining on the board (the reported metric).
double peg_outcome(const PegBoard& board);

/// Uniformly random placement of `pegs` pegs.
PegBoard random_peg_board(int pegs, Rng& rng);

/// The game as a deterministic MDP over boards. Moves carry zero reward;
/// a terminal board (no legal move) pays -(pegs remaining).
class PegSolitaire final : public Mdp {
public:
    std::size_t num_actions(StateId s) const override;
    std::vector<Transition> transitions(StateId s, std::size_t a) const override;
    bool is_terminal(StateId s) const override;
    double terminal_value(StateId s) const override;
};

}  // namespace vocmcts
