#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vocmcts/belief.hpp"
#include "vocmcts/search_tree.hpp"

using namespace vocmcts;

namespace {

PartialSearchTree four_leaf_tree(TabularMdp& mdp) {
    mdp.add_state(0);
    mdp.add_state(1);
    mdp.add_state(2);
    for (StateId t = 3; t <= 6; ++t) mdp.add_terminal(t, 0.0);
    mdp.add_action(0, {{1, 1.0, 0.0}});
    mdp.add_action(0, {{2, 1.0, 0.0}});
    mdp.add_action(1, {{3, 1.0, 0.0}});
    mdp.add_action(1, {{4, 1.0, 0.0}});
    mdp.add_action(2, {{5, 1.0, 0.0}});
    mdp.add_action(2, {{6, 1.0, 0.0}});
    return build_pst(mdp, 0, 1);
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int m) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
    Eigen::MatrixXd s = a * a.transpose() / m;
    s.diagonal().array() += 0.1;
    return s;
}

}  // namespace

TEST_CASE("initial belief equals the prior") {
    TabularMdp mdp;
    const PartialSearchTree pst = four_leaf_tree(mdp);
    const Belief iso = init_belief(Prior::isotropic(4, 0.5, 1.0, 1.0), pst);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(iso.mean(i) == 0.5);
        CHECK(iso.variance(i) == 1.0);
        CHECK(iso.count(i) == 0);
    }
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd cov = random_spd(rng, 4);
    const Belief full = init_belief(Prior::correlated(Eigen::VectorXd::Zero(4), cov, 1.0), pst);
    CHECK((full.covariance() - cov).norm() == 0.0);
    CHECK_THROWS_AS(init_belief(Prior::isotropic(3, 0.0, 1.0, 1.0), pst), std::invalid_argument);
}

TEST_CASE("conjugate update in the equal-precision case") {
    Belief b(Prior::isotropic(1, 0.0, 1.0, 1.0));
    b.update(0, 2.0);
    CHECK(b.mean(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.variance(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b.count(0) == 1);
    CHECK(b.outcome_mean(0) == 2.0);
    const NormalDist pred = b.predictive(0);
    CHECK(pred.mean == doctest::Approx(1.0));
    CHECK(pred.variance == doctest::Approx(1.5));
}

TEST_CASE("invalid updates are rejected") {
    Belief b(Prior::isotropic(2, 0.0, 1.0, 1.0));
    CHECK_THROWS(b.update(0, std::nan("")));
    CHECK_THROWS(b.update(0, INFINITY));
    CHECK_THROWS(b.update(2, 0.0));
    KnowledgeState k;
    k.append({0, 1.0, 3});
    CHECK_THROWS_AS(k.append({0, 1.0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Prior::isotropic(2, 0.0, 1.0, 0.0), std::invalid_argument);
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(Prior::correlated(Eigen::VectorXd::Zero(2), bad, 1.0), std::invalid_argument);
}

TEST_CASE("a known leaf predicts pure noise") {
    Belief b(Prior::isotropic(1, 0.3, 0.0, 0.2));
    CHECK(b.predictive(0).variance == doctest::Approx(0.2));
    b.update(0, 5.0);
    CHECK(b.mean(0) == 0.3);
}

TEST_CASE("correlated update matches a numerical grid posterior") {
    const double s0 = 1.2, s1 = 0.8, rho = 0.9, noise = 0.5, mu0 = 0.1, mu1 = -0.3, o = 1.7;
    Eigen::MatrixXd cov(2, 2);
    cov << s0 * s0, rho * s0 * s1, rho * s0 * s1, s1 * s1;
    Eigen::VectorXd mean(2);
    mean << mu0, mu1;
    Belief b(Prior::correlated(mean, cov, noise));
    b.update(0, o);

    const double closed = mu1 + rho * s0 * s1 / (s0 * s0 + noise) * (o - mu0);
    CHECK(b.mean(1) == doctest::Approx(closed).epsilon(1e-12));

    // Grid oracle: prior density times likelihood on a 2-D lattice.
    const Eigen::MatrixXd prec = cov.inverse();
    const double h = 0.01;
    double w_sum = 0.0, m0 = 0.0, m1 = 0.0, v1 = 0.0;
    for (double x = -8.0; x <= 8.0; x += h)
        for (double y = -8.0; y <= 8.0; y += h) {
            const double dx = x - mu0, dy = y - mu1;
            const double quad = prec(0, 0) * dx * dx + 2 * prec(0, 1) * dx * dy + prec(1, 1) * dy * dy;
            const double w = std::exp(-0.5 * quad - 0.5 * (o - x) * (o - x) / noise);
            w_sum += w;
            m0 += w * x;
            m1 += w * y;
            v1 += w * y * y;
        }
    m0 /= w_sum;
    m1 /= w_sum;
    v1 = v1 / w_sum - m1 * m1;
    CHECK(b.mean(0) == doctest::Approx(m0).epsilon(1e-4));
    CHECK(b.mean(1) == doctest::Approx(m1).epsilon(1e-4));
    CHECK(b.variance(1) == doctest::Approx(v1).epsilon(1e-3));
}

TEST_CASE("predictive distribution matches simulated outcomes (KS)") {
    Belief b(Prior::isotropic(1, 0.4, 0.7, 0.3));
    b.update(0, 1.0);
    const NormalDist pred = b.predictive(0);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = b.mean(0) + std::sqrt(b.variance(0)) * normal(rng) + std::sqrt(0.3) * normal(rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = std_normal_cdf((xs[i] - pred.mean) / pred.sd());
        ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("rbf covariance") {
    const Eigen::MatrixXd k = rbf_covariance(2, 1.0, 1.0);
    CHECK(k(0, 0) == 1.0);
    CHECK(k(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK((rbf_covariance(5, 1e-3, 1.0) - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
    CHECK_THROWS_AS(rbf_covariance(3, 0.0, 1.0), std::invalid_argument);

    Eigen::MatrixXd big = rbf_covariance(128, 1.0, 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(big);
    CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    big.diagonal().array() += 1e-9;
    CHECK(Eigen::LLT<Eigen::MatrixXd>(big).info() == Eigen::Success);
}

TEST_CASE("isotropic posterior variance shrinks with every observation") {
    Belief b(Prior::isotropic(1, 0.0, 2.0, 0.5));
    double last = b.variance(0);
    for (int i = 0; i < 50; ++i) {
        b.update(0, 0.1 * i);
        CHECK(b.variance(0) < last);
        last = b.variance(0);
    }
}

TEST_CASE("batch posterior equals sequential updates") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + trial % 6;
        const bool full = trial % 2 == 1;
        Eigen::VectorXd mean(m), var(m);
        for (int i = 0; i < m; ++i) {
            mean[i] = normal(rng);
            var[i] = 0.2 + std::abs(normal(rng));
        }
        const Prior prior = full ? Prior::correlated(mean, random_spd(rng, m), 0.3) : Prior::isotropic(mean, var, 0.3);
        Belief seq(prior);
        KnowledgeState k;
        const int len = 1 + static_cast<int>(rng() % 100);
        for (int t = 0; t < len; ++t) {
            const std::size_t leaf = rng() % m;
            const double o = 2.0 * normal(rng);
            seq.update(leaf, o);
            k.append(leaf, o);
        }
        const Belief batch = posterior(prior, k);
        CHECK((batch.means() - seq.means()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((batch.covariance() - seq.covariance()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("diagonal correlated prior reproduces the isotropic update") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd mean(5), var(5);
    for (int i = 0; i < 5; ++i) {
        mean[i] = normal(rng);
        var[i] = 0.5 + i;
    }
    Belief iso(Prior::isotropic(mean, var, 0.7));
    Belief diag(Prior::correlated(mean, var.asDiagonal(), 0.7));
    for (int t = 0; t < 40; ++t) {
        const std::size_t leaf = rng() % 5;
        const double o = normal(rng);
        iso.update(leaf, o);
        diag.update(leaf, o);
    }
    CHECK((iso.means() - diag.means()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((iso.variances() - diag.variances()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("expected posterior mean after one more outcome equals the current mean") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd mean(3);
    mean << 0.2, -0.1, 0.5;
    Belief b(Prior::correlated(mean, random_spd(rng, 3), 0.4));
    b.update(1, 0.9);
    const NormalDist pred = b.predictive(0);
    const int n = 40000;
    std::vector<double> m2(n);
    for (int i = 0; i < n; ++i) m2[i] = b.updated(0, pred.mean + pred.sd() * normal(rng)).mean(2);
    const auto est = oracle::mean_se(m2);
    CHECK(std::abs(est.mean - b.mean(2)) < 3 * est.se + 1e-12);
}

TEST_CASE("mean shift and covariance after an observation") {
    std::mt19937_64 rng(6);
    Belief b(Prior::correlated(Eigen::VectorXd::Zero(4), random_spd(rng, 4), 0.3));
    const double z = 0.8;
    const NormalDist pred = b.predictive(2);
    const Belief after = b.updated(2, pred.mean + z * pred.sd());
    CHECK((after.means() - (b.means() + z * b.mean_shift(2))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((after.covariance() - b.covariance_after(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lineage covariance is PSD with the prior variance on the diagonal") {
    std::mt19937_64 rng(2);
    oracle::RandomTreeOptions o;
    o.branching = 3;
    const TabularMdp mdp = oracle::random_tree(rng, o);
    const PartialSearchTree pst = build_pst(mdp, 0, 2);
    const Eigen::MatrixXd cov = lineage_covariance(pst, 2.0, 0.6);
    CHECK(cov.diagonal().isConstant(2.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() > -1e-12);
    // Siblings (same state) correlate more than cousins.
    CHECK(cov(0, 1) > cov(0, 3));
    CHECK(cov(0, 3) > cov(0, cov.rows() - 1));
}

TEST_CASE("joint sampler reproduces the covariance") {
    std::mt19937_64 gen(10);
    const Eigen::MatrixXd cov = random_spd(gen, 3);
    Eigen::VectorXd mean(3);
    mean << 1.0, 2.0, 3.0;
    const JointSampler sampler(mean, psd_factor(cov));
    Rng rng(3);
    Eigen::VectorXd z(3), x(3), sum = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(3, 3);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        fill_standard_normal(z, rng);
        sampler.transform(z, x);
        sum += x;
        outer += (x - mean) * (x - mean).transpose();
    }
    CHECK(((sum / n) - mean).cwiseAbs().maxCoeff() < 0.02);
    CHECK(((outer / n) - cov).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("psd factor handles singular matrices") {
    Eigen::MatrixXd rank_one(3, 3);
    rank_one.setOnes();
    const Eigen::MatrixXd l = psd_factor(rank_one);
    CHECK((l * l.transpose() - rank_one).cwiseAbs().maxCoeff() < 1e-6);
}
