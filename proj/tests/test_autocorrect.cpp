#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ead/autocorrect.hpp"
#include "ead/rng.hpp"

namespace {

using namespace ead;

constexpr double kRestoreTol = 1e-9;

TEST(CheckConstraints, ConsistentVector) {
    // s = 230*2 = 460 exactly, p/s = 0.5 exactly
    EXPECT_EQ(check_constraints({230, 2, 460, 230, 0.5}, Tolerances(1, 0.02)),
              ConstraintCase::BothSatisfied);
}

TEST(CheckConstraints, OnlyFirstWhenPowerFactorDisagrees) {
    // |0.5 - 23/460| = 0.45 >= 0.02
    EXPECT_EQ(check_constraints({230, 2, 460, 23, 0.5}, Tolerances(1, 0.02)),
              ConstraintCase::OnlyFirst);
}

TEST(CheckConstraints, OnlySecondWhenApparentPowerDisagrees) {
    // |500 - 460| = 40 >= 1, |0.5 - 250/500| = 0
    EXPECT_EQ(check_constraints({230, 2, 500, 250, 0.5}, Tolerances(1, 0.02)),
              ConstraintCase::OnlySecond);
}

TEST(CheckConstraints, ZeroApparentPowerCorner) {
    const Tolerances t(0.5, 0.02);
    // p = 0 and cos_phi below tolerance: second constraint is read as satisfied
    EXPECT_EQ(check_constraints({0, 0, 0, 0, 0.0}, t), ConstraintCase::BothSatisfied);
    EXPECT_EQ(check_constraints({0, 0, 0, 0, 0.01}, t), ConstraintCase::BothSatisfied);
    // active power without apparent power is unfixable by the second rule
    EXPECT_EQ(check_constraints({0, 0, 0, 5, 0.5}, t), ConstraintCase::NeitherSatisfied);
    EXPECT_EQ(check_constraints({0, 0, 0, 0, 0.5}, t), ConstraintCase::NeitherSatisfied);
}

TEST(GenerateCandidates, OnlyFirstProducesBothRederivations) {
    const EnergyVector e{230, 2, 460, 23, 0.5};
    const auto cands = generate_candidates(e, ConstraintCase::OnlyFirst);
    ASSERT_EQ(cands.size(), 2u);
    EXPECT_EQ(cands[0].id, 1);
    EXPECT_EQ(cands[0].vec, (EnergyVector{230, 2, 460, 23, 0.05}));
    EXPECT_EQ(cands[1].id, 2);
    EXPECT_EQ(cands[1].vec, (EnergyVector{230, 2, 460, 230, 0.5}));
}

TEST(GenerateCandidates, OnlySecondProducesBothRederivations) {
    const EnergyVector e{230, 2, 500, 250, 0.5};
    const auto cands = generate_candidates(e, ConstraintCase::OnlySecond);
    ASSERT_EQ(cands.size(), 2u);
    EXPECT_EQ(cands[0].id, 3);
    EXPECT_EQ(cands[0].vec, (EnergyVector{230, 500.0 / 230.0, 500, 250, 0.5}));
    EXPECT_EQ(cands[1].id, 4);
    EXPECT_EQ(cands[1].vec, (EnergyVector{250, 2, 500, 250, 0.5}));
}

TEST(GenerateCandidates, NeitherProducesSixBeforeFiltering) {
    const EnergyVector e{100, 2, 300, 150, 0.4};
    std::vector<std::string> notes;
    const auto cands = generate_candidates(e, ConstraintCase::NeitherSatisfied, &notes);
    EXPECT_EQ(cands.size() + notes.size(), 6u);
    // ids stay in enumeration order
    for (std::size_t k = 1; k < cands.size(); ++k) EXPECT_LT(cands[k - 1].id, cands[k].id);
}

TEST(GenerateCandidates, ConsistentVectorIsAPreconditionViolation) {
    EXPECT_THROW(generate_candidates({230, 2, 460, 230, 0.5}, ConstraintCase::BothSatisfied),
                 std::invalid_argument);
}

TEST(GenerateCandidates, InfeasibleDerivationsAreDiscardedAndNoted) {
    // p > s makes the derived power factor exceed 1
    const EnergyVector e{230, 2, 460, 4600, 0.5};
    std::vector<std::string> notes;
    const auto cands = generate_candidates(e, ConstraintCase::OnlyFirst, &notes);
    ASSERT_EQ(cands.size(), 1u);
    EXPECT_EQ(cands[0].id, 2);
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_NE(notes[0].find("e1"), std::string::npos);
}

TEST(Correct, ConsistentVectorIsFixedPoint) {
    const EnergyVector e{230, 2, 460, 230, 0.5};
    const CorrectionReport r = correct(e, Tolerances(1, 0.02));
    EXPECT_EQ(r.constraint_case, ConstraintCase::BothSatisfied);
    EXPECT_EQ(r.corrected, e);
    EXPECT_TRUE(r.candidates.empty());
    EXPECT_EQ(r.chosen_index, 0);
    EXPECT_DOUBLE_EQ(r.distance, 0.0);
}

TEST(Correct, OnlyFirstPicksNearestCandidate) {
    // candidate distances: e1 differs only in cos_phi (0.45), e2 only in p (207);
    // the raw-component norm picks e1
    const CorrectionReport r = correct({230, 2, 460, 23, 0.5}, Tolerances(1, 0.02));
    EXPECT_EQ(r.constraint_case, ConstraintCase::OnlyFirst);
    EXPECT_EQ(r.chosen_index, 1);
    EXPECT_EQ(r.corrected, (EnergyVector{230, 2, 460, 23, 0.05}));
    EXPECT_NEAR(r.distance, 0.45, 1e-12);
}

TEST(Correct, OnlySecondRepairsCurrent) {
    // |500/230 - 2| ~ 0.174 beats |250 - 230| = 20
    const CorrectionReport r = correct({230, 2, 500, 250, 0.5}, Tolerances(1, 0.02));
    EXPECT_EQ(r.constraint_case, ConstraintCase::OnlySecond);
    EXPECT_EQ(r.chosen_index, 3);
    EXPECT_NEAR(r.corrected.i, 500.0 / 230.0, 1e-15);
    EXPECT_NEAR(r.distance, 500.0 / 230.0 - 2.0, 1e-12);
}

TEST(Correct, UnitScaleChangesTheWinner) {
    // weighting cos_phi heavily makes the p-rederivation the nearest
    const std::array<double, 5> scale = {1, 1, 1, 1, 1000.0};
    const CorrectionReport r = correct({230, 2, 460, 23, 0.5}, Tolerances(1, 0.02), scale);
    EXPECT_EQ(r.chosen_index, 2);
    EXPECT_EQ(r.corrected, (EnergyVector{230, 2, 460, 230, 0.5}));
}

TEST(Correct, NoSurvivingCandidateIsAnError) {
    // u = i = 0 with nonzero s: both OnlySecond rederivations divide by zero
    const EnergyVector e{0, 0, 5, 1, 0.2};
    ASSERT_EQ(check_constraints(e, Tolerances(0.5, 0.02)), ConstraintCase::OnlySecond);
    EXPECT_THROW(correct(e, Tolerances(0.5, 0.02)), std::runtime_error);
}

// --- randomized properties --------------------------------------------------

EnergyVector random_consistent(Rng& rng) {
    const double u = rng.uniform(100.0, 250.0);
    const double i = rng.uniform(0.5, 8.0);
    const double cos_phi = rng.uniform(0.2, 1.0);
    const double s = u * i;
    return {u, i, s, s * cos_phi, cos_phi};
}

TEST(CorrectProperty, RepairedVectorSatisfiesBothConstraintsAndIsIdempotent) {
    Rng rng(606);
    for (int trial = 0; trial < 300; ++trial) {
        EnergyVector e = random_consistent(rng);
        // decimal-point misreads: shift one field by a factor of ten
        switch (trial % 5) {
            case 0: e.u /= 1000.0; break;
            case 1: e.i *= 10.0; break;
            case 2: e.s *= 10.0; break;
            case 3: e.p *= 10.0; break;
            case 4: e.cos_phi /= 10.0; break;
        }
        const Tolerances t = default_tolerances(e);
        if (check_constraints(e, t) == ConstraintCase::BothSatisfied) continue;

        const CorrectionReport r = correct(e, t);
        EXPECT_EQ(check_constraints(r.corrected, default_tolerances(r.corrected)),
                  ConstraintCase::BothSatisfied);

        // the recomputed quantities satisfy their defining identity up to
        // floating-point residuals
        const EnergyVector& c = r.corrected;
        const double residual1 = std::abs(c.s - c.u * c.i);
        const double residual2 = c.s > 0.0 ? std::abs(c.cos_phi - c.p / c.s) : 0.0;
        EXPECT_LE(std::min(residual1, residual2), 1e-9);

        const CorrectionReport again = correct(r.corrected, default_tolerances(r.corrected));
        EXPECT_EQ(again.corrected, r.corrected);
    }
}

TEST(CorrectProperty, SingleFieldCorruptionRestoresOriginal) {
    Rng rng(707);
    for (int trial = 0; trial < 400; ++trial) {
        const EnergyVector original = random_consistent(rng);
        EnergyVector e = original;
        switch (trial % 4) {
            case 0: e.u /= 1000.0; break;   // drops below i, so the u-rederivation wins
            case 1: e.i *= 10.0; break;     // stays below u, so the i-rederivation wins
            case 2: e.p *= 10.0; break;     // exceeds s, so only the p-rederivation survives
            case 3: e.cos_phi /= 10.0; break;
        }
        const Tolerances t = default_tolerances(e);
        const ConstraintCase c = check_constraints(e, t);
        ASSERT_TRUE(c == ConstraintCase::OnlyFirst || c == ConstraintCase::OnlySecond);

        const CorrectionReport r = correct(e, t);
        EXPECT_NEAR(r.corrected.u, original.u, kRestoreTol);
        EXPECT_NEAR(r.corrected.i, original.i, kRestoreTol);
        EXPECT_NEAR(r.corrected.s, original.s, kRestoreTol);
        EXPECT_NEAR(r.corrected.p, original.p, kRestoreTol);
        EXPECT_NEAR(r.corrected.cos_phi, original.cos_phi, kRestoreTol);
    }
}

TEST(CorrectProperty, ReportedDistanceIsMinimalOverSurvivors) {
    Rng rng(808);
    for (int trial = 0; trial < 200; ++trial) {
        EnergyVector e{rng.uniform(0.0, 300.0), rng.uniform(0.0, 10.0),
                       rng.uniform(0.0, 2000.0), rng.uniform(0.0, 2000.0), rng.uniform(0.0, 1.0)};
        const Tolerances t = default_tolerances(e);
        if (check_constraints(e, t) == ConstraintCase::BothSatisfied) continue;
        CorrectionReport r;
        try {
            r = correct(e, t);
        } catch (const std::runtime_error&) {
            continue;  // all candidates degenerate for this draw
        }
        for (const EnergyVector& cand : r.candidates) {
            EXPECT_LE(r.distance, vector_distance(cand, e) + 1e-15);
        }
    }
}

TEST(CorrectCsv, BatchRoundTrip) {
    std::istringstream in(
        "u,i,s,p,cos_phi\n"
        "230,2,460,230,0.5\n"
        "230,2,460,23,0.5\n");
    std::ostringstream out;
    const std::size_t rows = correct_csv(in, out, Tolerances(1, 0.02));
    EXPECT_EQ(rows, 2u);
    const std::string text = out.str();
    EXPECT_NE(text.find("u,i,s,p,cos_phi,case,chosen_index,distance"), std::string::npos);
    EXPECT_NE(text.find("both,0,0"), std::string::npos);
    EXPECT_NE(text.find("only_first,1,0.45"), std::string::npos);
}

TEST(CorrectCsv, RejectsBadHeader) {
    std::istringstream in("a,b,c\n1,2,3\n");
    std::ostringstream out;
    EXPECT_THROW(correct_csv(in, out), std::runtime_error);
}

}  // namespace
