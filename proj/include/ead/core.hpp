#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ead/time_series.hpp"

namespace ead {

/// The six channels of an energy activity.
enum class Quantity { Voltage, Current, ApparentPower, ActivePower, PowerFactor, Frequency };

inline constexpr std::array<Quantity, 6> kAllQuantities = {
    Quantity::Voltage,        Quantity::Current,     Quantity::ApparentPower,
    Quantity::ActivePower,    Quantity::PowerFactor, Quantity::Frequency,
};

inline constexpr const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::Voltage: return "u";
        case Quantity::Current: return "i";
        case Quantity::ApparentPower: return "s";
        case Quantity::ActivePower: return "p";
        case Quantity::PowerFactor: return "cos_phi";
        case Quantity::Frequency: return "f";
    }
    return "?";
}

inline std::optional<Quantity> quantity_from_name(std::string_view name) {
    for (Quantity q : kAllQuantities) {
        if (name == quantity_name(q)) return q;
    }
    // long-form aliases, useful on the command line
    if (name == "voltage") return Quantity::Voltage;
    if (name == "current") return Quantity::Current;
    if (name == "apparent_power") return Quantity::ApparentPower;
    if (name == "active_power") return Quantity::ActivePower;
    if (name == "power_factor") return Quantity::PowerFactor;
    if (name == "frequency") return Quantity::Frequency;
    return std::nullopt;
}

/// Labels of one energy activity. `application` is present only for
/// complex appliances (the four-label system); simple appliances use
/// appliance-brand-event.
struct LabelSet {
    std::string appliance;
    std::string brand;
    std::optional<std::string> application;
    std::string event;

    bool is_complex() const { return application.has_value(); }

    friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

enum class EventKind { Start, End, Increment, Decrement };

inline constexpr const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Start: return "start";
        case EventKind::End: return "end";
        case EventKind::Increment: return "increment";
        case EventKind::Decrement: return "decrement";
    }
    return "?";
}

inline std::optional<EventKind> event_kind_from_name(std::string_view name) {
    if (name == "start") return EventKind::Start;
    if (name == "end") return EventKind::End;
    if (name == "increment") return EventKind::Increment;
    if (name == "decrement") return EventKind::Decrement;
    return std::nullopt;
}

/// A named position on the sample axis (the rate is fixed, so sample
/// indices are the natural event coordinate).
struct EventMarker {
    std::size_t sample_index = 0;
    std::string label;
    EventKind kind = EventKind::Start;

    friend bool operator==(const EventMarker&, const EventMarker&) = default;
};

/// One energy activity: six synchronized channels plus labels and events.
struct EnergyDataPoint {
    std::array<TimeSeries, 6> channels;  // indexed by Quantity
    LabelSet labels;
    std::vector<EventMarker> events;
    std::string source_id;

    TimeSeries& channel(Quantity q) { return channels[static_cast<std::size_t>(q)]; }
    const TimeSeries& channel(Quantity q) const { return channels[static_cast<std::size_t>(q)]; }

    std::size_t length() const { return channels[0].length(); }
};

/// Returns the list of violated invariants; empty means valid.
inline std::vector<std::string> validate_datapoint(const EnergyDataPoint& dp) {
    std::vector<std::string> report;
    const std::size_t len = dp.channels[0].length();

    for (Quantity q : kAllQuantities) {
        const TimeSeries& ts = dp.channel(q);
        if (ts.empty()) {
            report.push_back(std::string("channel ") + quantity_name(q) + " is empty");
            continue;
        }
        if (ts.length() != len) {
            std::ostringstream os;
            os << "channel " << quantity_name(q) << " length " << ts.length()
               << " does not match channel u length " << len;
            report.push_back(os.str());
        }
        if (!all_finite(ts)) {
            report.push_back(std::string("channel ") + quantity_name(q) +
                             " contains non-finite samples");
        }
        if (ts.sample_rate_hz != 5.0) {
            report.push_back(std::string("channel ") + quantity_name(q) +
                             " sample rate is not 5 Hz");
        }
    }

    for (double v : dp.channel(Quantity::PowerFactor).samples) {
        if (v < 0.0 || v > 1.0) {
            report.push_back("power factor sample outside [0, 1]");
            break;
        }
    }

    if (dp.labels.appliance.empty()) report.push_back("appliance label is empty");
    if (dp.labels.brand.empty()) report.push_back("brand label is empty");
    if (dp.labels.event.empty()) report.push_back("event label is empty");
    if (dp.labels.application && dp.labels.application->empty()) {
        report.push_back("application label is present but empty");
    }

    for (const EventMarker& ev : dp.events) {
        if (ev.sample_index >= len) {
            std::ostringstream os;
            os << "event '" << ev.label << "' index " << ev.sample_index
               << " is out of range (length " << len << ")";
            report.push_back(os.str());
        }
    }
    return report;
}

inline const TimeSeries& extract_channel(const EnergyDataPoint& dp, Quantity q) {
    const TimeSeries& ts = dp.channel(q);
    if (ts.empty()) {
        throw std::invalid_argument(std::string("extract_channel: channel ") +
                                    quantity_name(q) + " is missing");
    }
    return ts;
}

inline const EventMarker& find_event(const EnergyDataPoint& dp, std::string_view label) {
    for (const EventMarker& ev : dp.events) {
        if (ev.label == label) return ev;
    }
    throw std::invalid_argument("event marker not found: " + std::string(label));
}

/// Slice all six channels to [start, end] inclusive, where start/end are
/// the positions of the named markers. Events inside the window are kept
/// and re-indexed; labels and source id are copied.
inline EnergyDataPoint slice_between_events(const EnergyDataPoint& dp,
                                            std::string_view start_label,
                                            std::string_view end_label) {
    const EventMarker& start = find_event(dp, start_label);
    const EventMarker& end = find_event(dp, end_label);
    if (start.sample_index > end.sample_index) {
        throw std::invalid_argument("slice_between_events: start marker after end marker");
    }

    EnergyDataPoint out;
    out.labels = dp.labels;
    out.source_id = dp.source_id;
    for (Quantity q : kAllQuantities) {
        const TimeSeries& src = dp.channel(q);
        TimeSeries& dst = out.channel(q);
        dst.sample_rate_hz = src.sample_rate_hz;
        dst.samples.assign(src.samples.begin() + static_cast<std::ptrdiff_t>(start.sample_index),
                           src.samples.begin() + static_cast<std::ptrdiff_t>(end.sample_index) + 1);
    }
    for (const EventMarker& ev : dp.events) {
        if (ev.sample_index >= start.sample_index && ev.sample_index <= end.sample_index) {
            out.events.push_back({ev.sample_index - start.sample_index, ev.label, ev.kind});
        }
    }
    return out;
}

}  // namespace ead
