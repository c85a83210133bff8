#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ead/core.hpp"
#include "ead/similarity.hpp"

namespace ead {

inline constexpr double kSamplePeriodSeconds = 0.2;  // 5 Hz

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

inline double parse_double(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    if (t.empty()) throw std::runtime_error(context + ": empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw std::runtime_error(context + ": not a number: '" + t + "'");
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

}  // namespace detail

/// Labels compared case-insensitively after trimming; meter exports are
/// inconsistent in practice.
inline std::string normalize_label(std::string_view text) {
    return detail::to_lower(detail::trim(text));
}

// ---------------------------------------------------------------------------
// Canonical data-point files: samples CSV + JSON sidecar

inline void write_datapoint(const EnergyDataPoint& dp, const std::filesystem::path& csv_path) {
    {
        std::ofstream os(csv_path);
        if (!os) throw std::runtime_error("write_datapoint: cannot open " + csv_path.string());
        os << "t,u,i,s,p,cos_phi,f\n";
        const std::size_t len = dp.length();
        for (std::size_t k = 0; k < len; ++k) {
            os << detail::format_double(static_cast<double>(k) * kSamplePeriodSeconds);
            for (Quantity q : kAllQuantities) {
                os << "," << detail::format_double(dp.channel(q).samples.at(k));
            }
            os << "\n";
        }
    }

    nlohmann::json j;
    j["source_id"] = dp.source_id;
    j["labels"]["appliance"] = dp.labels.appliance;
    j["labels"]["brand"] = dp.labels.brand;
    if (dp.labels.application) j["labels"]["application"] = *dp.labels.application;
    j["labels"]["event"] = dp.labels.event;
    j["events"] = nlohmann::json::array();
    for (const EventMarker& ev : dp.events) {
        j["events"].push_back({{"sample_index", ev.sample_index},
                               {"label", ev.label},
                               {"kind", event_kind_name(ev.kind)}});
    }
    std::ofstream os(detail::sidecar_path(csv_path));
    if (!os) {
        throw std::runtime_error("write_datapoint: cannot open sidecar for " + csv_path.string());
    }
    os << j.dump(2) << "\n";
}

inline EnergyDataPoint read_datapoint(const std::filesystem::path& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw std::runtime_error("read_datapoint: cannot open " + csv_path.string());
    const std::string context = csv_path.string();

    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(context + ": empty file");
    {
        const std::vector<std::string> header = detail::split_csv_line(line);
        const std::vector<std::string> expected = {"t", "u", "i", "s", "p", "cos_phi", "f"};
        if (header.size() != expected.size()) {
            std::string missing;
            for (std::size_t k = header.size(); k < expected.size(); ++k) {
                missing += missing.empty() ? expected[k] : ", " + expected[k];
            }
            throw std::runtime_error(context + ": expected 7 columns t,u,i,s,p,cos_phi,f" +
                                     (missing.empty() ? "" : " (missing " + missing + ")"));
        }
        for (std::size_t k = 0; k < expected.size(); ++k) {
            if (detail::trim(header[k]) != expected[k]) {
                throw std::runtime_error(context + ": unexpected column '" + header[k] +
                                         "', want '" + expected[k] + "'");
            }
        }
    }

    EnergyDataPoint dp;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != 7) {
            throw std::runtime_error(context + ": row " + std::to_string(row + 1) +
                                     " has " + std::to_string(fields.size()) + " columns");
        }
        const double t = detail::parse_double(fields[0], context);
        const double expected_t = static_cast<double>(row) * kSamplePeriodSeconds;
        if (std::abs(t - expected_t) > 1e-9) {
            throw std::runtime_error(context + ": t is not a strict 0.2 s grid at row " +
                                     std::to_string(row + 1));
        }
        for (std::size_t q = 0; q < 6; ++q) {
            dp.channels[q].samples.push_back(detail::parse_double(fields[q + 1], context));
        }
        ++row;
    }
    if (row == 0) throw std::runtime_error(context + ": no sample rows");

    for (double v : dp.channel(Quantity::PowerFactor).samples) {
        if (v < 0.0 || v > 1.0) {
            throw std::runtime_error(context + ": power factor outside [0, 1]");
        }
    }

    const std::filesystem::path side = detail::sidecar_path(csv_path);
    std::ifstream js(side);
    if (!js) throw std::runtime_error(context + ": missing sidecar " + side.string());
    nlohmann::json j;
    try {
        js >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(side.string() + ": bad JSON: " + e.what());
    }
    dp.source_id = j.value("source_id", csv_path.stem().string());
    const nlohmann::json& labels = j.at("labels");
    dp.labels.appliance = labels.at("appliance").get<std::string>();
    dp.labels.brand = labels.at("brand").get<std::string>();
    dp.labels.event = labels.at("event").get<std::string>();
    if (labels.contains("application")) {
        dp.labels.application = labels.at("application").get<std::string>();
    }
    if (j.contains("events")) {
        for (const auto& ev : j.at("events")) {
            EventMarker marker;
            marker.sample_index = ev.at("sample_index").get<std::size_t>();
            marker.label = ev.at("label").get<std::string>();
            const auto kind = event_kind_from_name(ev.at("kind").get<std::string>());
            if (!kind) {
                throw std::runtime_error(side.string() + ": unknown event kind");
            }
            marker.kind = *kind;
            dp.events.push_back(std::move(marker));
        }
    }

    const std::vector<std::string> violations = validate_datapoint(dp);
    if (!violations.empty()) {
        throw std::runtime_error(context + ": invalid data point: " + violations.front());
    }
    return dp;
}

/// All canonical data points under a directory, ordered by path.
inline std::vector<EnergyDataPoint> load_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("load_directory: not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<EnergyDataPoint> points;
    points.reserve(files.size());
    for (const auto& f : files) points.push_back(read_datapoint(f));
    return points;
}

// ---------------------------------------------------------------------------
// Label-permutation grouping

/// Non-empty subset of the four label fields.
struct LabelSubset {
    bool appliance = false;
    bool brand = false;
    bool application = false;
    bool event = false;

    void validate() const {
        if (!appliance && !brand && !application && !event) {
            throw std::invalid_argument("LabelSubset: must select at least one field");
        }
    }

    /// Parse "appliance,brand,event" style lists.
    static LabelSubset parse(std::string_view text) {
        LabelSubset s;
        std::string current;
        auto apply = [&s](const std::string& name) {
            const std::string n = normalize_label(name);
            if (n.empty()) return;
            if (n == "appliance") s.appliance = true;
            else if (n == "brand") s.brand = true;
            else if (n == "application") s.application = true;
            else if (n == "event") s.event = true;
            else throw std::invalid_argument("LabelSubset: unknown field '" + n + "'");
        };
        for (char c : text) {
            if (c == ',') {
                apply(current);
                current.clear();
            } else {
                current += c;
            }
        }
        apply(current);
        s.validate();
        return s;
    }
};

/// Partition points by their values on the subset fields, extracting one
/// quantity per point. Groups come out in lexicographic key order, so
/// similarity vectors are deterministic.
inline PartitionedDataset group_by_labels(const std::vector<EnergyDataPoint>& points,
                                          const LabelSubset& subset, Quantity q) {
    subset.validate();
    if (points.empty()) throw std::invalid_argument("group_by_labels: empty input");

    std::map<std::string, DatasetGroup> groups;  // key -> group, ordered
    for (const EnergyDataPoint& dp : points) {
        if (subset.application && !dp.labels.application) {
            throw std::invalid_argument("group_by_labels: point '" + dp.source_id +
                                        "' lacks the application label");
        }
        std::string key;
        std::string name;
        auto add = [&key, &name](const std::string& value) {
            key += normalize_label(value) + "\x1f";
            name += (name.empty() ? "" : "/") + detail::trim(value);
        };
        if (subset.appliance) add(dp.labels.appliance);
        if (subset.brand) add(dp.labels.brand);
        if (subset.application) add(*dp.labels.application);
        if (subset.event) add(dp.labels.event);

        DatasetGroup& g = groups[key];
        if (g.members.empty()) {
            g.label = dp.labels;
            g.quantity = q;
            g.name = name;
        }
        g.members.push_back(extract_channel(dp, q));
        g.member_ids.push_back(dp.source_id);
    }

    PartitionedDataset out;
    out.groups.reserve(groups.size());
    for (auto& [key, group] : groups) out.groups.push_back(std::move(group));
    return out;
}

// ---------------------------------------------------------------------------
// Best-effort EAD import

struct ImportReport {
    struct Skipped {
        std::string path;
        std::string reason;
    };
    std::vector<std::string> imported;
    std::vector<Skipped> skipped;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["imported"] = imported;
        j["skipped"] = nlohmann::json::array();
        for (const Skipped& s : skipped) {
            j["skipped"].push_back({{"path", s.path}, {"reason", s.reason}});
        }
        return j;
    }
};

namespace detail {

inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              const std::vector<std::string>& aliases) {
    for (std::size_t k = 0; k < header.size(); ++k) {
        const std::string name = normalize_label(header[k]);
        for (const std::string& alias : aliases) {
            if (name == alias || name.rfind(alias + " ", 0) == 0 ||
                name.rfind(alias + "(", 0) == 0 || name.rfind(alias + "_", 0) == 0) {
                return k;
            }
        }
    }
    return std::nullopt;
}

/// Tolerant parse of a foreign CSV: columns located by name aliases,
/// labels taken from a `__`-separated filename stem
/// (appliance__brand[__application]__event).
inline EnergyDataPoint read_foreign_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open file");
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty file");
    const std::vector<std::string> header = split_csv_line(line);

    const std::map<std::string, std::vector<std::string>> aliases = {
        {"u", {"u", "voltage", "volt", "volts"}},
        {"i", {"i", "current", "amp", "amps", "ampere"}},
        {"s", {"s", "apparent_power", "apparent power", "va"}},
        {"p", {"p", "active_power", "active power", "power", "w", "watt", "watts"}},
        {"cos_phi", {"cos_phi", "cosphi", "cos", "pf", "power_factor", "power factor"}},
        {"f", {"f", "frequency", "freq", "hz"}},
    };
    std::map<std::string, std::size_t> columns;
    for (const auto& [field, names] : aliases) {
        const auto col = find_column(header, names);
        if (!col) throw std::runtime_error("missing column for quantity " + field);
        columns[field] = *col;
    }

    EnergyDataPoint dp;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        std::size_t q = 0;
        for (const char* name : {"u", "i", "s", "p", "cos_phi", "f"}) {
            const std::size_t col = columns.at(name);
            if (col >= fields.size()) {
                throw std::runtime_error("row " + std::to_string(row + 1) + " too short");
            }
            dp.channels[q].samples.push_back(
                parse_double(fields[col], "row " + std::to_string(row + 1)));
            ++q;
        }
        ++row;
    }
    if (row == 0) throw std::runtime_error("no sample rows");

    // labels from the filename stem
    const std::string stem = path.stem().string();
    std::vector<std::string> parts;
    std::string current;
    for (std::size_t k = 0; k < stem.size(); ++k) {
        if (k + 1 < stem.size() && stem[k] == '_' && stem[k + 1] == '_') {
            parts.push_back(current);
            current.clear();
            ++k;
        } else {
            current += stem[k];
        }
    }
    parts.push_back(current);
    if (parts.size() == 3) {
        dp.labels = {parts[0], parts[1], std::nullopt, parts[2]};
    } else if (parts.size() == 4) {
        dp.labels = {parts[0], parts[1], parts[2], parts[3]};
    } else {
        throw std::runtime_error(
            "cannot infer labels from filename (want appliance__brand[__application]__event)");
    }
    dp.source_id = stem;

    const std::vector<std::string> violations = validate_datapoint(dp);
    if (!violations.empty()) throw std::runtime_error("invalid data point: " + violations.front());
    return dp;
}

}  // namespace detail

/// Import a directory tree that may hold canonical files, foreign CSVs,
/// or both. Nothing is coerced silently: every skipped file appears in
/// the report with its reason.
inline std::pair<std::vector<EnergyDataPoint>, ImportReport> ead_import(
    const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("ead_import: not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<EnergyDataPoint> points;
    ImportReport report;
    for (const auto& path : files) {
        try {
            points.push_back(read_datapoint(path));
            report.imported.push_back(path.string());
            continue;
        } catch (const std::exception&) {
            // not canonical; fall through to the tolerant reader
        }
        try {
            points.push_back(detail::read_foreign_csv(path));
            report.imported.push_back(path.string());
        } catch (const std::exception& e) {
            report.skipped.push_back({path.string(), e.what()});
        }
    }
    return {std::move(points), std::move(report)};
}

}  // namespace ead
