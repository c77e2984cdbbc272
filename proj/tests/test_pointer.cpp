#include <gtest/gtest.h>

#include "cheshire/errors.hpp"
#include "cheshire/scenarios.hpp"
#include "cheshire/weakval.hpp"
#include "oracle.hpp"

using namespace cheshire;

namespace {

PointerConfig at(double g) {
    PointerConfig cfg;
    cfg.coupling = g;
    return cfg;
}

}  // namespace

TEST(Pointer, TwoCatLeftPathAtSmallCoupling) {
    const PrePostPair pair = build_pair(ScenarioId::two_cat());
    const auto shift = pointer_shift(path_projector(pair.convention(), 1, Arm::L), pair, at(1e-3));
    EXPECT_NEAR(shift.position / 1e-3, 1.0, 1e-4);
    EXPECT_GT(shift.postselection_probability, 0.1);
}

TEST(Pointer, SingleCatLeftPath) {
    const PrePostPair pair = build_pair(ScenarioId::single());
    const auto shift = pointer_shift(path_projector(pair.convention(), 1, Arm::L), pair, at(1e-3));
    EXPECT_NEAR(shift.position / 1e-3, 1.0, 1e-4);
}

TEST(Pointer, IdentityShiftsByExactlyG) {
    const PrePostPair pair = build_pair(ScenarioId::two_cat());
    for (double g : {1e-2, 5e-3, 2.5e-3}) {
        const auto shift = pointer_shift(Operator::identity(pair.convention()), pair, at(g));
        EXPECT_NEAR(shift.position / g, 1.0, 1e-9);
        EXPECT_NEAR(shift.momentum, 0.0, 1e-12);
    }
}

TEST(Pointer, EigenstatePreGivesEigenvalue) {
    // pre = |0100> is an eigenstate of Pi_{L1} (1) and Pi_{R2} (1), of Pi_{R1} (0).
    const BasisConvention c(2);
    const Ket pre = basis_ket(c, "0100");
    const Ket post = superpose({{1.0, basis_ket(c, "0100")}, {0.5, basis_ket(c, "1001")}, {0.3, basis_ket(c, "0001")}});
    const PrePostPair pair(pre, post);
    for (auto [photon, arm, eigenvalue] : {std::tuple{1, Arm::L, 1.0}, {2, Arm::R, 1.0}, {1, Arm::R, 0.0}}) {
        const double g = 2e-3;
        const auto shift = pointer_shift(path_projector(c, photon, arm), pair, at(g));
        EXPECT_NEAR(shift.position / g, eigenvalue, 10 * g * g);
    }
}

TEST(Pointer, DeviationShrinksQuadratically) {
    const PrePostPair pair = build_pair(ScenarioId::two_cat());
    const auto rows = pointer_sweep(grin_observable(pair.convention(), 1, Arm::R), pair, {1e-2, 5e-3, 2.5e-3});
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        EXPECT_GT(rows[k].deviation, 0.0);
        EXPECT_GE(rows[k].deviation / rows[k + 1].deviation, 3.5);
    }
    EXPECT_TRUE(converges_quadratically(rows, 0.875, 1e-9));
}

TEST(Pointer, ConvergenceCheckRejectsLinearDecay) {
    std::vector<PointerSweepRow> rows{{1e-2, 0, 0, 1e-3}, {5e-3, 0, 0, 5e-4}};
    EXPECT_FALSE(converges_quadratically(rows, 0.875, 1e-9));
    rows[1].deviation = 1e-10;  // below the floor counts as converged
    EXPECT_TRUE(converges_quadratically(rows, 0.875, 1e-9));
}

TEST(Pointer, RandomSinglePhotonSystemsConvergeToWeakValue) {
    std::mt19937_64 rng(21);
    const BasisConvention c(1);
    int checked = 0;
    while (checked < 25) {
        const Ket pre = oracle::random_ket(rng, c);
        const Ket post = oracle::random_ket(rng, c);
        if (fidelity(pre, post) < 0.2) continue;
        oracle::Mat h = oracle::random_hermitian(rng, 4);
        h /= Eigen::SelfAdjointEigenSolver<oracle::Mat>(h).eigenvalues().cwiseAbs().maxCoeff();
        const Operator op = operator_from_dense(c, h);
        const PrePostPair pair(pre, post);
        const Complex w = weak_value(op, pair);
        const auto rows = pointer_sweep(op, pair, {4e-3, 2e-3, 1e-3});
        const double scale = 1.0 + std::pow(std::abs(w), 3);
        for (const auto& r : rows) {
            const double g2 = r.coupling * r.coupling;
            EXPECT_LT(r.deviation, 50 * g2 * scale);
            EXPECT_LT(std::abs(r.im_estimate - w.imag()), 50 * g2 * scale);
        }
        ++checked;
    }
}

TEST(Pointer, VanishingPostselectionIsAnomalous) {
    const BasisConvention c(1);
    const PrePostPair pair(basis_ket(c, "00"), basis_ket(c, "11"));
    EXPECT_THROW(pointer_shift(Operator::identity(c), pair, at(1e-3)), AnomalousSelectionError);
}

TEST(Pointer, ConfigValidation) {
    const PrePostPair pair = build_pair(ScenarioId::single());
    const Operator op = path_projector(pair.convention(), 1, Arm::L);
    EXPECT_THROW(pointer_shift(op, pair, at(0.0)), InputError);
    PointerConfig cfg;
    cfg.sigma_p = -1.0;
    EXPECT_THROW(pointer_shift(op, pair, cfg), InputError);
    cfg = {};
    cfg.grid_points = 10;
    EXPECT_THROW(pointer_shift(op, pair, cfg), InputError);
    cfg = {};
    cfg.extent_sigmas = 2.0;  // chops the Gaussian's tails
    EXPECT_THROW(pointer_shift(op, pair, cfg), InputError);
    const Operator non_hermitian(pair.convention(), {{0, 1, 1.0}});
    EXPECT_THROW(pointer_shift(non_hermitian, pair, at(1e-3)), InputError);
}
