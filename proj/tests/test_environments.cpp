#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>

#include "doctest.h"
#include "oracles.hpp"
#include "vocmcts/bandit_tree.hpp"
#include "vocmcts/peg_solitaire.hpp"

using namespace vocmcts;

namespace {

/// Orthogonal jumps on a 4x4 bit board, written out cell by cell.
std::vector<std::uint16_t> successors(std::uint16_t bits) {
    std::vector<std::uint16_t> out;
    auto peg = [&](int r, int c) { return r >= 0 && r < 4 && c >= 0 && c < 4 && ((bits >> (4 * r + c)) & 1); };
    auto empty = [&](int r, int c) { return r >= 0 && r < 4 && c >= 0 && c < 4 && !((bits >> (4 * r + c)) & 1); };
    const int dr[] = {0, 1, 0, -1}, dc[] = {1, 0, -1, 0};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d)
                if (peg(r, c) && peg(r + dr[d], c + dc[d]) && empty(r + 2 * dr[d], c + 2 * dc[d])) {
                    std::uint16_t next = bits;
                    next &= static_cast<std::uint16_t>(~(1u << (4 * r + c)));
                    next &= static_cast<std::uint16_t>(~(1u << (4 * (r + dr[d]) + c + dc[d])));
                    next |= static_cast<std::uint16_t>(1u << (4 * (r + 2 * dr[d]) + c + 2 * dc[d]));
                    out.push_back(next);
                }
    return out;
}

int fewest_pegs(std::uint16_t bits) {
    const auto next = successors(bits);
    if (next.empty()) return std::popcount(bits);
    int best = 16;
    for (auto n : next) best = std::min(best, fewest_pegs(n));
    return best;
}

}  // namespace

TEST_CASE("depth-7 bandit trees have 128 arms") {
    for (ArmKind kind : {ArmKind::correlated, ArmKind::uncorrelated}) {
        const BanditTree tree = gen_bandit_tree(kind, 1);
        CHECK(tree.num_arms() == 128);
        CHECK(tree.desired_probability() == 0.75);
        for (StateId s = 128; s < 256; ++s) CHECK(tree.is_terminal(s));
        CHECK_FALSE(tree.is_terminal(127));
    }
    CHECK(gen_bandit_tree(ArmKind::correlated, 1).noise_variance() == 0.1);
    CHECK(gen_bandit_tree(ArmKind::uncorrelated, 1).noise_variance() == 0.01);
}

TEST_CASE("uncorrelated arm means lie in [0.45, 0.55]") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const BanditTree tree = gen_bandit_tree(ArmKind::uncorrelated, seed);
        for (double m : tree.arm_means()) {
            CHECK(m >= 0.45);
            CHECK(m <= 0.55);
        }
    }
}

TEST_CASE("adjacent correlated arm means have correlation exp(-1/2)") {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    double n = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const std::vector<double> m = gen_bandit_tree(ArmKind::correlated, seed).arm_means();
        const double x = m[63], y = m[64];
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        n += 1;
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double corr = cov / std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    CHECK(std::abs(corr - std::exp(-0.5)) < 0.02);
    CHECK(std::abs(sx / n - 0.5) < 0.05);
}

TEST_CASE("generation is reproducible from kind and seed") {
    for (ArmKind kind : {ArmKind::correlated, ArmKind::uncorrelated}) {
        CHECK(gen_bandit_tree(kind, 17).arm_means() == gen_bandit_tree(kind, 17).arm_means());
        CHECK(gen_bandit_tree(kind, 17).arm_means() != gen_bandit_tree(kind, 18).arm_means());
    }
    CHECK(gen_bandit_tree(ArmKind::correlated, 5).arm_means() != gen_bandit_tree(ArmKind::uncorrelated, 5).arm_means());
}

TEST_CASE("serialization round-trips exactly") {
    const BanditTree tree = gen_bandit_tree(ArmKind::correlated, 3, {4, 0.8, 0.05, 1.0, 1.0});
    const std::string text = tree.serialize();
    CHECK(text.rfind("bandit-tree depth=4 p=0.8", 0) == 0);
    const BanditTree back = BanditTree::deserialize(text);
    CHECK(back.depth() == 4);
    CHECK(back.desired_probability() == 0.8);
    CHECK(back.noise_variance() == 0.05);
    CHECK(back.arm_means() == tree.arm_means());
    CHECK(back.serialize() == text);
    CHECK_THROWS_AS(BanditTree::deserialize("bandit-tree depth=2"), std::invalid_argument);
}

TEST_CASE("invalid bandit trees are rejected") {
    CHECK_THROWS_AS(BanditTree(2, 0.75, {0, 1, 2}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BanditTree(1, 0.5, {0, 1}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BanditTree(1, 1.1, {0, 1}, 0.1), std::invalid_argument);
    CHECK_NOTHROW(BanditTree(1, 1.0, {0, 1}, 0.1));
}

TEST_CASE("objective regret") {
    const BanditTree tree(1, 0.75, {1.0, 0.0}, 0.1);
    CHECK(objective_regret(tree, 0) == 0.0);
    CHECK(objective_regret(tree, 1) == doctest::Approx(0.5).epsilon(1e-15));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const BanditTree t = gen_bandit_tree(ArmKind::correlated, seed);
        const double q0 = oracle::q_value(t, BanditTree::kRoot, 0), q1 = oracle::q_value(t, BanditTree::kRoot, 1);
        CHECK(objective_regret(t, t.optimal_root_action()) == 0.0);
        const double random_mean = 0.5 * (objective_regret(t, 0) + objective_regret(t, 1));
        CHECK(random_mean == doctest::Approx(0.5 * std::abs(q0 - q1)).epsilon(1e-12));
    }
}

TEST_CASE("bandit-tree Q* mixes the desired and the other subtree") {
    const BanditTree tree = gen_bandit_tree(ArmKind::uncorrelated, 4);
    const QTable q = exact_qstar(tree, BanditTree::kRoot, 7);
    for (StateId s = 1; s < 128; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            const StateId desired = 2 * s + a, other = 2 * s + 1 - a;
            CHECK(std::abs(q.q(s, a) - (0.75 * q.v(desired) + 0.25 * q.v(other))) < 1e-12);
        }
    for (std::size_t a = 0; a < 2; ++a) CHECK(tree.root_q(a) == doctest::Approx(q.q(BanditTree::kRoot, a)).epsilon(1e-14));
}

TEST_CASE("arm draws have the configured mean and variance") {
    const BanditTree tree(1, 0.75, {0.3, 0.7}, 0.04);
    Rng rng(2);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = tree.sample_terminal_value(3, rng);
    const auto s = oracle::mean_se(xs);
    CHECK(std::abs(s.mean - 0.7) < 3 * s.se);
    const double var = s.se * s.se * xs.size();
    CHECK(std::abs(var - 0.04) < 0.002);
}

TEST_CASE("peg jumps") {
    const PegBoard two = PegBoard::from_string("xx..............");
    const auto moves = peg_legal_moves(two);
    REQUIRE(moves.size() == 1);
    CHECK(moves[0] == PegMove{0, 1, 2});
    CHECK(peg_apply(two, moves[0]).to_string() == "..x.............");

    CHECK(peg_legal_moves(PegBoard::from_string(".....x..........")).empty());
    CHECK(peg_legal_moves(PegBoard(0xFFFF)).empty());

    const PegBoard three = PegBoard::from_string("xx.x............");
    CHECK(three.peg_count() == 3);
    CHECK(peg_apply(three, {0, 1, 2}).peg_count() == 2);
    CHECK_THROWS_AS(peg_apply(three, {3, 2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(peg_apply(three, {0, 4, 8}), std::invalid_argument);
    CHECK_THROWS_AS(PegBoard::from_string("xx"), std::invalid_argument);
}

TEST_CASE("legal moves match an independent generator") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const PegBoard board = random_peg_board(1 + trial % 15, rng);
        std::vector<std::uint16_t> got;
        for (const auto& m : peg_legal_moves(board)) {
            const PegBoard next = peg_apply(board, m);
            CHECK(next.peg_count() == board.peg_count() - 1);
            CHECK(std::popcount(static_cast<unsigned>(next.bits() ^ board.bits())) == 3);
            got.push_back(next.bits());
        }
        auto want = successors(board.bits());
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        CHECK(got == want);
    }
}

TEST_CASE("peg outcome counts remaining pegs") {
    CHECK(peg_outcome(PegBoard::from_string("......x.........")) == 1.0);
    std::uint16_t stuck = 0;
    for (unsigned bits = 0; bits < 65536 && !stuck; ++bits)
        if (std::popcount(bits) == 9 && successors(static_cast<std::uint16_t>(bits)).empty()) stuck = static_cast<std::uint16_t>(bits);
    REQUIRE(stuck != 0);
    CHECK(peg_legal_moves(PegBoard(stuck)).empty());
    CHECK(peg_outcome(PegBoard(stuck)) == 9.0);
}

TEST_CASE("random games lose one peg per move and end within eight moves") {
    Rng rng(4);
    for (int game = 0; game < 200; ++game) {
        PegBoard board = random_peg_board(9, rng);
        CHECK(board.peg_count() == 9);
        int moves = 0;
        for (auto legal = peg_legal_moves(board); !legal.empty(); legal = peg_legal_moves(board)) {
            const int before = board.peg_count();
            board = peg_apply(board, legal[rng() % legal.size()]);
            CHECK(board.peg_count() == before - 1);
            ++moves;
        }
        CHECK(moves <= 8);
        CHECK(peg_outcome(board) == 9.0 - moves);
    }
}

TEST_CASE("random boards are reproducible from the generator state") {
    Rng a(9), b(9);
    for (int i = 0; i < 20; ++i) CHECK(random_peg_board(9, a).bits() == random_peg_board(9, b).bits());
    CHECK_THROWS_AS(random_peg_board(17, a), std::invalid_argument);
}

TEST_CASE("peg MDP values match an exhaustive solver") {
    const PegSolitaire game;
    const PegBoard four = PegBoard::from_string("xx...x....x.x...");
    if (!game.is_terminal(four.bits())) {
        const QTable q = exact_qstar(game, four.bits(), 16);
        CHECK(q.v(four.bits()) == -fewest_pegs(four.bits()));
    }
    Rng rng(5);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const PegBoard board = random_peg_board(9, rng);
        if (game.is_terminal(board.bits())) {
            CHECK(game.terminal_value(board.bits()) == -9.0);
            continue;
        }
        const QTable q = exact_qstar(game, board.bits(), 16);
        CHECK(q.v(board.bits()) == -fewest_pegs(board.bits()));
        CHECK(game.num_actions(board.bits()) == peg_legal_moves(board).size());
        ++checked;
    }
    CHECK(checked > 20);
}
