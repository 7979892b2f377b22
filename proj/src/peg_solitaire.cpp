#include "vocmcts/peg_solitaire.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace vocmcts {

PegBoard PegBoard::from_string(const std::string& cells) {
    if (cells.size() != kCells) throw std::invalid_argument("peg board needs 16 cells");
    std::uint16_t bits = 0;
    for (int i = 0; i < kCells; ++i) {
        if (cells[i] == 'x')
            bits |= static_cast<std::uint16_t>(1u << i);
        else if (cells[i] != '.')
            throw std::invalid_argument("peg board cells must be 'x' or '.'");
    }
    return PegBoard(bits);
}

std::string PegBoard::to_string() const {
    std::string out(kCells, '.');
    for (int i = 0; i < kCells; ++i)
        if ((bits_ >> i) & 1u) out[i] = 'x';
    return out;
}

int PegBoard::peg_count() const { return std::popcount(bits_); }

std::vector<PegMove> peg_legal_moves(const PegBoard& board) {
    static constexpr int kDr[] = {0, 1, 0, -1};
    static constexpr int kDc[] = {1, 0, -1, 0};
    std::vector<PegMove> moves;
    for (int r = 0; r < PegBoard::kSide; ++r)
        for (int c = 0; c < PegBoard::kSide; ++c) {
            if (!board.occupied(r, c)) continue;
            for (int d = 0; d < 4; ++d) {
                const int r1 = r + kDr[d], c1 = c + kDc[d];
                const int r2 = r + 2 * kDr[d], c2 = c + 2 * kDc[d];
                if (r2 < 0 || r2 >= PegBoard::kSide || c2 < 0 || c2 >= PegBoard::kSide) continue;
                if (board.occupied(r1, c1) && !board.occupied(r2, c2))
                    moves.push_back({r * PegBoard::kSide + c, r1 * PegBoard::kSide + c1, r2 * PegBoard::kSide + c2});
            }
        }
    return moves;
}

PegBoard peg_apply(const PegBoard& board, const PegMove& move) {
    const auto legal = peg_legal_moves(board);
    if (std::find(legal.begin(), legal.end(), move) == legal.end()) throw std::invalid_argument("illegal peg move");
    std::uint16_t bits = board.bits();
    bits &= static_cast<std::uint16_t>(~((1u << move.from) | (1u << move.over)));
    bits |= static_cast<std::uint16_t>(1u << move.to);
    return PegBoard(bits);
}

double peg_outcome(const PegBoard& board) { return board.peg_count(); }

PegBoard random_peg_board(int pegs, Rng& rng) {
    if (pegs < 0 || pegs > PegBoard::kCells) throw std::invalid_argument("peg count out of range");
    std::array<int, PegBoard::kCells> cells;
    std::iota(cells.begin(), cells.end(), 0);
    // Partial Fisher-Yates with an explicit draw so the placement does not
    // depend on the standard library's shuffle.
    std::uint16_t bits = 0;
    for (int i = 0; i < pegs; ++i) {
        const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(PegBoard::kCells - i));
        std::swap(cells[i], cells[j]);
        bits |= static_cast<std::uint16_t>(1u << cells[i]);
    }
    return PegBoard(bits);
}

namespace {
PegBoard board_of(StateId s) {
    if (s > 0xffff) throw std::out_of_range("not a peg board state");
    return PegBoard(static_cast<std::uint16_t>(s));
}
}  // namespace

std::size_t PegSolitaire::num_actions(StateId s) const { return peg_legal_moves(board_of(s)).size(); }

std::vector<Transition> PegSolitaire::transitions(StateId s, std::size_t a) const {
    const PegBoard board = board_of(s);
    const auto moves = peg_legal_moves(board);
    const PegBoard next = peg_apply(board, moves.at(a));
    return {{next.bits(), 1.0, 0.0}};
}

bool PegSolitaire::is_terminal(StateId s) const { return peg_legal_moves(board_of(s)).empty(); }

double PegSolitaire::terminal_value(StateId s) const { return -peg_outcome(board_of(s)); }

}  // namespace vocmcts
