#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ead/core.hpp"
#include "ead/lcs.hpp"
#include "ead/parallel.hpp"
#include "ead/version.hpp"

namespace ead {

/// Pairwise usm values. Self matrices are square, symmetric, with unit
/// diagonal; cross matrices are M x N.
struct SimilarityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;  // row-major
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;

    double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

/// Series drawn from one label set on one quantity.
struct DatasetGroup {
    std::vector<TimeSeries> members;
    std::vector<std::string> member_ids;  // parallel to members; optional, used for CSV headers
    LabelSet label;
    Quantity quantity = Quantity::Current;
    std::string name;  // free-text group key, used for ordering and reporting

    void validate() const {
        if (members.empty()) throw std::invalid_argument("DatasetGroup: no members");
        for (const TimeSeries& ts : members) {
            if (ts.length() < 2) {
                throw std::invalid_argument(
                    "DatasetGroup: member series shorter than 2 samples");
            }
        }
        if (!member_ids.empty() && member_ids.size() != members.size()) {
            throw std::invalid_argument("DatasetGroup: member_ids/member size mismatch");
        }
    }

    std::string member_id(std::size_t i) const {
        return member_ids.empty() ? std::to_string(i) : member_ids[i];
    }
};

struct PartitionedDataset {
    std::vector<DatasetGroup> groups;
};

inline SimilarityMatrix self_similarity_matrix(const DatasetGroup& g) {
    g.validate();
    const std::size_t n = g.members.size();
    SimilarityMatrix m;
    m.rows = m.cols = n;
    m.entries.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ids.push_back(g.member_id(i));
    }
    m.col_ids = m.row_ids;

    // upper triangle (incl. diagonal), mirrored; cells are independent
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) cells.emplace_back(i, j);
    }
    parallel_for(cells.size(), [&](std::size_t k) {
        const auto [i, j] = cells[k];
        const double v = (i == j) ? usm(g.members[i], g.members[i])
                                  : usm(g.members[i], g.members[j]);
        m.at(i, j) = v;
        m.at(j, i) = v;
    });
    return m;
}

inline SimilarityMatrix cross_similarity_matrix(const DatasetGroup& a, const DatasetGroup& b) {
    a.validate();
    b.validate();
    const std::size_t rows = a.members.size();
    const std::size_t cols = b.members.size();
    SimilarityMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.entries.assign(rows * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) m.row_ids.push_back(a.member_id(i));
    for (std::size_t j = 0; j < cols; ++j) m.col_ids.push_back(b.member_id(j));

    parallel_for(rows * cols, [&](std::size_t k) {
        const std::size_t i = k / cols;
        const std::size_t j = k % cols;
        m.at(i, j) = usm(a.members[i], b.members[j]);
    });
    return m;
}

/// Entrywise mean of the matrix (the entrywise 1-norm over the cell count;
/// all entries are non-negative).
inline double matrix_mean(const SimilarityMatrix& m) {
    double sum = 0.0;
    for (double v : m.entries) sum += std::abs(v);
    return sum / static_cast<double>(m.rows * m.cols);
}

inline double dataset_self_similarity(const DatasetGroup& g) {
    return matrix_mean(self_similarity_matrix(g));
}

inline double dataset_cross_similarity(const DatasetGroup& a, const DatasetGroup& b) {
    return matrix_mean(cross_similarity_matrix(a, b));
}

/// Row in the pairwise similarity vector.
struct GroupPairSimilarity {
    std::string group_a;
    std::string group_b;
    double value = 0.0;
};

/// All C(omega, 2) pairwise cross similarities in lexicographic pair
/// order (1,2), (1,3), ..., (omega-1, omega).
inline std::vector<GroupPairSimilarity> dataset_similarity_vector(const PartitionedDataset& d) {
    const std::size_t omega = d.groups.size();
    if (omega < 2) {
        throw std::invalid_argument("dataset_similarity_vector: need at least 2 groups");
    }
    std::vector<GroupPairSimilarity> out;
    out.reserve(omega * (omega - 1) / 2);
    for (std::size_t i = 0; i < omega; ++i) {
        for (std::size_t j = i + 1; j < omega; ++j) {
            out.push_back({d.groups[i].name, d.groups[j].name,
                           dataset_cross_similarity(d.groups[i], d.groups[j])});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV serialization

namespace detail {
inline void write_csv_metadata(std::ostream& os, Quantity q) {
    os << "# quantity: " << quantity_name(q) << "\n";
    os << "# epsilon: adaptive (min population std of each pair)\n";
    os << "# toolkit: ead-toolkit " << kToolkitVersion << "\n";
}
}  // namespace detail

/// Matrix CSV: `#` metadata rows, then a header row/column of member ids.
inline void write_matrix_csv(std::ostream& os, const SimilarityMatrix& m, Quantity q) {
    detail::write_csv_metadata(os, q);
    os << "id";
    for (const std::string& id : m.col_ids) os << "," << id;
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < m.rows; ++i) {
        os << m.row_ids[i];
        for (std::size_t j = 0; j < m.cols; ++j) os << "," << m.at(i, j);
        os << "\n";
    }
}

/// Similarity vector CSV: rows (group_a, group_b, usm).
inline void write_similarity_vector_csv(std::ostream& os,
                                        const std::vector<GroupPairSimilarity>& v, Quantity q) {
    detail::write_csv_metadata(os, q);
    os << "group_a,group_b,usm\n";
    os.precision(17);
    for (const GroupPairSimilarity& row : v) {
        os << row.group_a << "," << row.group_b << "," << row.value << "\n";
    }
}

}  // namespace ead
