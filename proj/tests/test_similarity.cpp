#include <gtest/gtest.h>

#include <cstdlib>

#include <sstream>

#include "ead/rng.hpp"
#include "ead/similarity.hpp"

namespace {

using namespace ead;

DatasetGroup group(std::vector<std::vector<double>> members, std::string name = "g") {
    DatasetGroup g;
    for (auto& m : members) g.members.emplace_back(std::move(m));
    g.name = std::move(name);
    return g;
}

TEST(SelfSimilarityMatrix, SingleMemberIsUnit) {
    const SimilarityMatrix m = self_similarity_matrix(group({{1, 2, 3}}));
    ASSERT_EQ(m.rows, 1u);
    ASSERT_EQ(m.cols, 1u);
    EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
}

TEST(SelfSimilarityMatrix, IdenticalMembersAllOnes) {
    const SimilarityMatrix m = self_similarity_matrix(group({{1, 5, 2}, {1, 5, 2}}));
    for (double v : m.entries) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SelfSimilarityMatrix, EmbeddedPairAllOnes) {
    const SimilarityMatrix m = self_similarity_matrix(group({{1, 2}, {1, 2, 3, 4}}));
    ASSERT_EQ(m.rows, 2u);
    for (double v : m.entries) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SelfSimilarityMatrix, SymmetricWithUnitDiagonal) {
    Rng rng(11);
    DatasetGroup g;
    for (int n = 0; n < 6; ++n) {
        TimeSeries ts;
        const auto len = static_cast<std::size_t>(rng.uniform_int(2, 20));
        for (std::size_t k = 0; k < len; ++k) ts.samples.push_back(rng.uniform(0.0, 5.0));
        g.members.push_back(std::move(ts));
    }
    const SimilarityMatrix m = self_similarity_matrix(g);
    for (std::size_t i = 0; i < m.rows; ++i) {
        EXPECT_DOUBLE_EQ(m.at(i, i), 1.0);
        for (std::size_t j = 0; j < m.cols; ++j) {
            EXPECT_DOUBLE_EQ(m.at(i, j), m.at(j, i));
            EXPECT_GE(m.at(i, j), 0.0);
            EXPECT_LE(m.at(i, j), 1.0);
        }
    }
}

TEST(DatasetSelfSimilarity, AllIdenticalGroupScoresOne) {
    EXPECT_DOUBLE_EQ(dataset_self_similarity(group({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}})), 1.0);
}

TEST(DatasetSelfSimilarity, EmbeddedPairScoresOne) {
    EXPECT_DOUBLE_EQ(dataset_self_similarity(group({{1, 2}, {1, 2, 3, 4}})), 1.0);
}

TEST(DatasetSelfSimilarity, OrthogonalPairScoresHalf) {
    // no cross matches: (1+0+0+1)/4
    EXPECT_DOUBLE_EQ(dataset_self_similarity(group({{0, 1}, {100, 200}})), 0.5);
}

TEST(DatasetSelfSimilarity, EqualsEntrywiseMeanOfMatrix) {
    Rng rng(99);
    DatasetGroup g;
    for (int n = 0; n < 7; ++n) {
        TimeSeries ts;
        const auto len = static_cast<std::size_t>(rng.uniform_int(2, 15));
        for (std::size_t k = 0; k < len; ++k) {
            ts.samples.push_back(static_cast<double>(rng.uniform_int(0, 4)));
        }
        g.members.push_back(std::move(ts));
    }
    const SimilarityMatrix m = self_similarity_matrix(g);
    double mean = 0.0;
    for (double v : m.entries) mean += v;
    mean /= static_cast<double>(m.entries.size());
    EXPECT_NEAR(dataset_self_similarity(g), mean, 1e-12);
}

TEST(CrossSimilarityMatrix, SameGroupEqualsSelfMatrix) {
    const DatasetGroup g = group({{1, 2, 3}, {4, 4, 5}});
    const SimilarityMatrix self = self_similarity_matrix(g);
    const SimilarityMatrix cross = cross_similarity_matrix(g, g);
    ASSERT_EQ(self.entries.size(), cross.entries.size());
    for (std::size_t k = 0; k < self.entries.size(); ++k) {
        EXPECT_DOUBLE_EQ(self.entries[k], cross.entries[k]);
    }
}

TEST(CrossSimilarityMatrix, EmbeddedSingletons) {
    const SimilarityMatrix m = cross_similarity_matrix(group({{1, 2}}), group({{1, 2, 3, 4}}));
    ASSERT_EQ(m.rows, 1u);
    ASSERT_EQ(m.cols, 1u);
    EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
}

TEST(CrossSimilarityMatrix, DisjointValuesGiveZeroMatrix) {
    const SimilarityMatrix m =
        cross_similarity_matrix(group({{0, 1}, {1, 0}}), group({{100, 200}, {300, 100}}));
    for (double v : m.entries) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(DatasetCrossSimilarity, Examples) {
    const DatasetGroup a = group({{0, 5, 10, 5}});
    const DatasetGroup b = group({{0, 5, 5, 10}});
    EXPECT_DOUBLE_EQ(dataset_cross_similarity(a, b), 0.75);
    EXPECT_DOUBLE_EQ(dataset_cross_similarity(a, a), 1.0);
    EXPECT_DOUBLE_EQ(
        dataset_cross_similarity(group({{0, 1}}), group({{100, 200}})), 0.0);
    // symmetric in the group arguments
    EXPECT_DOUBLE_EQ(dataset_cross_similarity(b, a), 0.75);
}

TEST(DatasetSimilarityVector, PairCountAndOrder) {
    PartitionedDataset d;
    d.groups.push_back(group({{1, 2}}, "a"));
    d.groups.push_back(group({{3, 4}}, "b"));
    const auto v2 = dataset_similarity_vector(d);
    ASSERT_EQ(v2.size(), 1u);

    d.groups.push_back(group({{5, 6}}, "c"));
    const auto v3 = dataset_similarity_vector(d);
    ASSERT_EQ(v3.size(), 3u);
    EXPECT_EQ(v3[0].group_a, "a");
    EXPECT_EQ(v3[0].group_b, "b");
    EXPECT_EQ(v3[1].group_a, "a");
    EXPECT_EQ(v3[1].group_b, "c");
    EXPECT_EQ(v3[2].group_a, "b");
    EXPECT_EQ(v3[2].group_b, "c");
}

TEST(DatasetSimilarityVector, DisjointGroupsAllZero) {
    PartitionedDataset d;
    d.groups.push_back(group({{0, 1}}, "a"));
    d.groups.push_back(group({{100, 101}}, "b"));
    d.groups.push_back(group({{1000, 2000}}, "c"));
    for (const auto& row : dataset_similarity_vector(d)) EXPECT_DOUBLE_EQ(row.value, 0.0);
}

TEST(DatasetSimilarityVector, SingleGroupThrows) {
    PartitionedDataset d;
    d.groups.push_back(group({{1, 2}}));
    EXPECT_THROW(dataset_similarity_vector(d), std::invalid_argument);
}

TEST(SimilarityMatrix, WorkerCountDoesNotChangeResults) {
    Rng rng(2025);
    DatasetGroup g;
    for (int n = 0; n < 10; ++n) {
        TimeSeries ts;
        const auto len = static_cast<std::size_t>(rng.uniform_int(2, 25));
        for (std::size_t k = 0; k < len; ++k) ts.samples.push_back(rng.uniform(0.0, 3.0));
        g.members.push_back(std::move(ts));
    }

    ::setenv("EAD_TOOLKIT_THREADS", "1", 1);
    const SimilarityMatrix sequential = self_similarity_matrix(g);
    ::setenv("EAD_TOOLKIT_THREADS", "8", 1);
    const SimilarityMatrix parallel = self_similarity_matrix(g);
    ::unsetenv("EAD_TOOLKIT_THREADS");

    EXPECT_EQ(sequential.entries, parallel.entries);  // bit-identical
}

TEST(MatrixCsv, HeaderIdsAndValues) {
    DatasetGroup g = group({{1, 2}, {1, 2, 3, 4}});
    g.member_ids = {"ts-a", "ts-b"};
    const SimilarityMatrix m = self_similarity_matrix(g);

    std::ostringstream os;
    write_matrix_csv(os, m, Quantity::Current);
    const std::string text = os.str();
    EXPECT_NE(text.find("# quantity: i"), std::string::npos);
    EXPECT_NE(text.find("id,ts-a,ts-b"), std::string::npos);
    EXPECT_NE(text.find("ts-a,1,1"), std::string::npos);
}

TEST(VectorCsv, RowsPerPair) {
    PartitionedDataset d;
    d.groups.push_back(group({{1, 2}}, "fan"));
    d.groups.push_back(group({{1, 2}}, "heater"));
    std::ostringstream os;
    write_similarity_vector_csv(os, dataset_similarity_vector(d), Quantity::ActivePower);
    EXPECT_NE(os.str().find("group_a,group_b,usm"), std::string::npos);
    EXPECT_NE(os.str().find("fan,heater,1"), std::string::npos);
}

}  // namespace
