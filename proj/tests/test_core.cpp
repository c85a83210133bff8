#include <gtest/gtest.h>

#include "ead/core.hpp"

namespace {

using namespace ead;

EnergyDataPoint make_datapoint(std::size_t len) {
    EnergyDataPoint dp;
    dp.source_id = "meter-0/session-1";
    dp.labels = {"fan", "Midea-kyt2-25", std::nullopt, "on~off"};
    for (Quantity q : kAllQuantities) {
        TimeSeries& ts = dp.channel(q);
        for (std::size_t k = 0; k < len; ++k) {
            double v = static_cast<double>(k) + 10.0 * static_cast<double>(q);
            if (q == Quantity::PowerFactor) v = 0.5;  // stay inside [0, 1]
            ts.samples.push_back(v);
        }
    }
    return dp;
}

TEST(ValidateDatapoint, AcceptsWellFormedPoint) {
    EXPECT_TRUE(validate_datapoint(make_datapoint(10)).empty());
}

TEST(ValidateDatapoint, ReportsLengthMismatch) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.channel(Quantity::Current).samples.pop_back();
    const auto report = validate_datapoint(dp);
    ASSERT_FALSE(report.empty());
    bool found = false;
    for (const auto& entry : report) found = found || entry.find("length") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(ValidateDatapoint, ReportsEventIndexAtLength) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.events.push_back({10, "oob", EventKind::Start});  // one past the end
    const auto report = validate_datapoint(dp);
    ASSERT_EQ(report.size(), 1u);
    EXPECT_NE(report[0].find("out of range"), std::string::npos);
}

TEST(ValidateDatapoint, ReportsNonFiniteSamples) {
    EnergyDataPoint dp = make_datapoint(4);
    dp.channel(Quantity::Voltage).samples[2] = std::nan("");
    EXPECT_FALSE(validate_datapoint(dp).empty());
}

TEST(ValidateDatapoint, ValidPointSupportsAllDownstreamAccess) {
    const EnergyDataPoint dp = make_datapoint(6);
    ASSERT_TRUE(validate_datapoint(dp).empty());
    for (Quantity q : kAllQuantities) {
        EXPECT_NO_THROW(extract_channel(dp, q));
    }
}

TEST(ExtractChannel, ReturnsRequestedSeries) {
    EnergyDataPoint dp = make_datapoint(2);
    dp.channel(Quantity::Current).samples = {0.1, 0.2};
    const TimeSeries& ts = extract_channel(dp, Quantity::Current);
    EXPECT_EQ(ts.samples, (std::vector<double>{0.1, 0.2}));
}

TEST(ExtractChannel, FrequencyIsTheSixthChannel) {
    const EnergyDataPoint dp = make_datapoint(3);
    EXPECT_EQ(&extract_channel(dp, Quantity::Frequency), &dp.channels[5]);
}

TEST(ExtractChannel, MissingChannelThrows) {
    EnergyDataPoint dp = make_datapoint(3);
    dp.channel(Quantity::Voltage).samples.clear();
    EXPECT_THROW(extract_channel(dp, Quantity::Voltage), std::invalid_argument);
}

TEST(SliceBetweenEvents, InclusiveWindow) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.events.push_back({2, "begin", EventKind::Start});
    dp.events.push_back({5, "finish", EventKind::End});
    dp.events.push_back({7, "outside", EventKind::Increment});

    const EnergyDataPoint sliced = slice_between_events(dp, "begin", "finish");
    EXPECT_EQ(sliced.length(), 4u);
    EXPECT_TRUE(validate_datapoint(sliced).empty());
    EXPECT_EQ(sliced.labels, dp.labels);
    // events re-indexed, the one outside the window dropped
    ASSERT_EQ(sliced.events.size(), 2u);
    EXPECT_EQ(sliced.events[0].sample_index, 0u);
    EXPECT_EQ(sliced.events[1].sample_index, 3u);
    // channel content preserved
    EXPECT_EQ(sliced.channel(Quantity::Voltage).samples,
              (std::vector<double>{2.0, 3.0, 4.0, 5.0}));
}

TEST(SliceBetweenEvents, DegenerateSingleSample) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.events.push_back({4, "here", EventKind::Start});
    const EnergyDataPoint sliced = slice_between_events(dp, "here", "here");
    EXPECT_EQ(sliced.length(), 1u);
    EXPECT_TRUE(validate_datapoint(sliced).empty());
}

TEST(SliceBetweenEvents, MissingMarkerThrows) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.events.push_back({2, "begin", EventKind::Start});
    EXPECT_THROW(slice_between_events(dp, "begin", "absent"), std::invalid_argument);
}

TEST(SliceBetweenEvents, StartAfterEndThrows) {
    EnergyDataPoint dp = make_datapoint(10);
    dp.events.push_back({5, "late", EventKind::Start});
    dp.events.push_back({2, "early", EventKind::End});
    EXPECT_THROW(slice_between_events(dp, "late", "early"), std::invalid_argument);
}

}  // namespace
