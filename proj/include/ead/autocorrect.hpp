#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ead {

/// Instantaneous meter reading (u, i, s, p, cos_phi). Frequency is not
/// part of the constrained vector.
struct EnergyVector {
    double u = 0.0;        // volts
    double i = 0.0;        // amperes
    double s = 0.0;        // volt-amperes
    double p = 0.0;        // watts
    double cos_phi = 0.0;  // dimensionless, [0, 1]

    friend bool operator==(const EnergyVector&, const EnergyVector&) = default;
};

inline bool is_feasible(const EnergyVector& e) {
    const std::array<double, 5> f = {e.u, e.i, e.s, e.p, e.cos_phi};
    for (double v : f) {
        if (!std::isfinite(v) || v < 0.0) return false;
    }
    return e.cos_phi <= 1.0;
}

/// Maximum residuals allowed by the two consistency constraints
/// |s - u*i| < eps1 and |cos_phi - p/s| < eps2.
struct Tolerances {
    double eps1 = 0.5;   // volt-amperes
    double eps2 = 0.02;  // dimensionless

    Tolerances() = default;
    Tolerances(double e1, double e2) : eps1(e1), eps2(e2) {
        if (!(e1 > 0.0) || !(e2 > 0.0)) {
            throw std::invalid_argument("Tolerances: both must be > 0");
        }
    }
};

/// Default tolerance policy: roughly one least-significant display digit
/// of a household power meter.
inline Tolerances default_tolerances(const EnergyVector& e) {
    return Tolerances(std::max(0.5, 0.01 * std::abs(e.s)), 0.02);
}

enum class ConstraintCase { BothSatisfied, OnlyFirst, OnlySecond, NeitherSatisfied };

inline constexpr const char* constraint_case_name(ConstraintCase c) {
    switch (c) {
        case ConstraintCase::BothSatisfied: return "both";
        case ConstraintCase::OnlyFirst: return "only_first";
        case ConstraintCase::OnlySecond: return "only_second";
        case ConstraintCase::NeitherSatisfied: return "neither";
    }
    return "?";
}

namespace detail {
inline bool first_constraint_ok(const EnergyVector& e, const Tolerances& t) {
    return std::abs(e.s - e.u * e.i) < t.eps1;
}

// s = 0 leaves p/s undefined; the constraint is then read as "no active
// power and a power factor below tolerance".
inline bool second_constraint_ok(const EnergyVector& e, const Tolerances& t) {
    if (e.s == 0.0) return e.p == 0.0 && e.cos_phi < t.eps2;
    return std::abs(e.cos_phi - e.p / e.s) < t.eps2;
}
}  // namespace detail

inline ConstraintCase check_constraints(const EnergyVector& e, const Tolerances& t) {
    const bool first = detail::first_constraint_ok(e, t);
    const bool second = detail::second_constraint_ok(e, t);
    // a zero apparent power with leftover p or cos_phi means none of the
    // readings can be trusted, even though |s - u*i| is vacuously small
    if (e.s == 0.0 && !second) return ConstraintCase::NeitherSatisfied;
    if (first && second) return ConstraintCase::BothSatisfied;
    if (first) return ConstraintCase::OnlyFirst;
    if (second) return ConstraintCase::OnlySecond;
    return ConstraintCase::NeitherSatisfied;
}

/// A repair candidate tagged with its enumeration index (1..10). The
/// index doubles as the tie-break order.
struct Candidate {
    int id = 0;
    EnergyVector vec;
};

/// Candidate enumeration. Ids 1-2 rederive p/cos_phi from a trusted
/// (u, i, s); ids 3-4 rederive i/u from a trusted s; ids 5-10 trust two
/// of {u, i, s} and one of {p, cos_phi} and rederive the rest.
/// Candidates with non-finite fields, negative fields, or a derived
/// power factor outside [0, 1] are discarded (reasons reported).
inline std::vector<Candidate> generate_candidates(const EnergyVector& e, ConstraintCase c,
                                                  std::vector<std::string>* notes = nullptr) {
    if (c == ConstraintCase::BothSatisfied) {
        throw std::invalid_argument("generate_candidates: vector already consistent");
    }

    std::vector<Candidate> raw;
    switch (c) {
        case ConstraintCase::OnlyFirst:
            raw.push_back({1, {e.u, e.i, e.s, e.p, e.p / e.s}});
            raw.push_back({2, {e.u, e.i, e.s, e.s * e.cos_phi, e.cos_phi}});
            break;
        case ConstraintCase::OnlySecond:
            raw.push_back({3, {e.u, e.s / e.u, e.s, e.p, e.cos_phi}});
            raw.push_back({4, {e.s / e.i, e.i, e.s, e.p, e.cos_phi}});
            break;
        case ConstraintCase::NeitherSatisfied: {
            const double s_ui = e.u * e.i;
            raw.push_back({5, {e.u, e.i, s_ui, e.p, e.p / s_ui}});
            raw.push_back({6, {e.u, e.i, s_ui, s_ui * e.cos_phi, e.cos_phi}});
            raw.push_back({7, {e.u, e.s / e.u, e.s, e.p, e.p / e.s}});
            raw.push_back({8, {e.u, e.s / e.u, e.s, e.s * e.cos_phi, e.cos_phi}});
            raw.push_back({9, {e.s / e.i, e.i, e.s, e.p, e.p / e.s}});
            raw.push_back({10, {e.s / e.i, e.i, e.s, e.s * e.cos_phi, e.cos_phi}});
            break;
        }
        case ConstraintCase::BothSatisfied:
            break;
    }

    std::vector<Candidate> out;
    for (const Candidate& cand : raw) {
        if (is_feasible(cand.vec)) {
            out.push_back(cand);
        } else if (notes) {
            notes->push_back("candidate e" + std::to_string(cand.id) +
                             " discarded (infeasible after derivation)");
        }
    }
    if (out.empty()) {
        throw std::runtime_error("generate_candidates: no feasible candidate survives");
    }
    return out;
}

/// Component-wise Euclidean distance on raw values. An optional scale
/// vector weights the components for unit-aware distances.
inline double vector_distance(const EnergyVector& a, const EnergyVector& b,
                              const std::optional<std::array<double, 5>>& scale = std::nullopt) {
    std::array<double, 5> d = {a.u - b.u, a.i - b.i, a.s - b.s, a.p - b.p,
                               a.cos_phi - b.cos_phi};
    if (scale) {
        for (std::size_t k = 0; k < 5; ++k) d[k] *= (*scale)[k];
    }
    double ss = 0.0;
    for (double v : d) ss += v * v;
    return std::sqrt(ss);
}

struct CorrectionReport {
    EnergyVector original;
    EnergyVector corrected;
    ConstraintCase constraint_case = ConstraintCase::BothSatisfied;
    std::vector<EnergyVector> candidates;  // surviving, enumeration order
    std::vector<int> candidate_ids;        // parallel enumeration ids
    int chosen_index = 0;                  // enumeration id of the winner; 0 = no repair needed
    double distance = 0.0;
    std::vector<std::string> notes;
};

/// Repair a reading: keep it when both constraints hold, otherwise pick
/// the feasible candidate nearest to the original (ties go to the lowest
/// enumeration id).
inline CorrectionReport correct(const EnergyVector& e, const Tolerances& t,
                                const std::optional<std::array<double, 5>>& scale = std::nullopt) {
    CorrectionReport report;
    report.original = e;
    report.constraint_case = check_constraints(e, t);
    if (report.constraint_case == ConstraintCase::BothSatisfied) {
        report.corrected = e;
        return report;
    }
    if (e.s == 0.0 && !detail::second_constraint_ok(e, t)) {
        report.notes.push_back("p/s undefined at s = 0; all readings treated as suspect");
    }

    const std::vector<Candidate> candidates =
        generate_candidates(e, report.constraint_case, &report.notes);
    std::size_t best = 0;
    double best_dist = vector_distance(candidates[0].vec, e, scale);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double d = vector_distance(candidates[k].vec, e, scale);
        if (d < best_dist) {
            best = k;
            best_dist = d;
        }
    }

    for (const Candidate& cand : candidates) {
        report.candidates.push_back(cand.vec);
        report.candidate_ids.push_back(cand.id);
    }
    report.corrected = candidates[best].vec;
    report.chosen_index = candidates[best].id;
    report.distance = best_dist;
    return report;
}

/// Batch mode: read CSV rows (u, i, s, p, cos_phi), write the corrected
/// values plus (case, chosen_index, distance) columns. Without explicit
/// tolerances every row uses the default policy.
inline std::size_t correct_csv(std::istream& in, std::ostream& out,
                               const std::optional<Tolerances>& tolerances = std::nullopt,
                               const std::optional<std::array<double, 5>>& scale = std::nullopt) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("correct_csv: empty input");
    // tolerate a trailing \r from foreign exports
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "u,i,s,p,cos_phi") {
        throw std::runtime_error("correct_csv: expected header u,i,s,p,cos_phi, got '" + line +
                                 "'");
    }

    out << "u,i,s,p,cos_phi,case,chosen_index,distance\n";
    out.precision(17);
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::array<double, 5> v{};
        const char* p = line.c_str();
        for (std::size_t k = 0; k < 5; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(p, &end);
            if (end == p) {
                throw std::runtime_error("correct_csv: bad number at line " +
                                         std::to_string(line_no));
            }
            p = end;
            if (k < 4) {
                if (*p != ',') {
                    throw std::runtime_error("correct_csv: expected 5 columns at line " +
                                             std::to_string(line_no));
                }
                ++p;
            }
        }
        const EnergyVector e{v[0], v[1], v[2], v[3], v[4]};
        const CorrectionReport r = correct(e, tolerances ? *tolerances : default_tolerances(e),
                                           scale);
        out << r.corrected.u << "," << r.corrected.i << "," << r.corrected.s << ","
            << r.corrected.p << "," << r.corrected.cos_phi << ","
            << constraint_case_name(r.constraint_case) << "," << r.chosen_index << ","
            << r.distance << "\n";
        ++rows;
    }
    return rows;
}

}  // namespace ead
