#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ead/autocorrect.hpp"
#include "ead/rng.hpp"
#include "ead/scnn.hpp"
#include "ead/tensor.hpp"

namespace ead {

// digit cell geometry: 57 x 42 glyph plus 4 px padding on every side
inline constexpr std::size_t kGlyphHeight = 57;
inline constexpr std::size_t kGlyphWidth = 42;
inline constexpr std::size_t kGlyphPad = 4;
inline constexpr std::size_t kDigitImageHeight = kGlyphHeight + 2 * kGlyphPad;  // 65
inline constexpr std::size_t kDigitImageWidth = kGlyphWidth + 2 * kGlyphPad;    // 50

inline constexpr double kGlyphBackground = 0.1;
inline constexpr double kGlyphInk = 0.95;
inline constexpr double kRenderNoiseAmplitude = 0.12;
inline constexpr int kRenderJitterPx = 2;

struct DigitImage {
    Tensor pixels;  // 3 x 65 x 50, values in [0, 1]
    DigitLabel label{21};
};

namespace detail {

struct SegRect {
    std::size_t y0, y1, x0, x1;  // half-open, glyph-local
};

// classic A..G segment layout inside the 57-row glyph; the digit body
// uses columns 0..33, the decimal dot sits to its right
inline constexpr std::array<SegRect, 7> kSegments = {{
    {0, 6, 6, 28},    // A  top bar
    {6, 25, 28, 34},  // B  upper right
    {31, 51, 28, 34}, // C  lower right
    {51, 57, 6, 28},  // D  bottom bar
    {31, 51, 0, 6},   // E  lower left
    {6, 25, 0, 6},    // F  upper left
    {25, 31, 6, 28},  // G  middle bar
}};

// segment mask per digit 0..9, bit k = segment k lit (A=0 .. G=6)
inline constexpr std::array<std::uint8_t, 10> kDigitSegments = {
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABDEG
    0b1001111,  // 3: ABCDG
    0b1100110,  // 4: BCFG
    0b1101101,  // 5: ACDFG
    0b1111101,  // 6: ACDEFG
    0b0000111,  // 7: ABC
    0b1111111,  // 8
    0b1101111,  // 9: ABCDFG
};

inline constexpr SegRect kDecimalDot = {49, 57, 35, 42};

inline void fill_rect(Tensor& img, const SegRect& r, std::size_t oy, std::size_t ox, double v) {
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = r.y0; y < r.y1; ++y) {
            for (std::size_t x = r.x0; x < r.x1; ++x) {
                img.at3(c, oy + y, ox + x) = v;
            }
        }
    }
}

}  // namespace detail

/// Deterministic seven-segment glyph. noise_seed 0 renders the clean,
/// centered glyph; any other seed adds +-2 px jitter and additive pixel
/// noise derived from the seed alone (so two labels rendered with the
/// same seed share jitter and noise field).
inline DigitImage render_digit(DigitLabel label, std::uint64_t noise_seed) {
    Tensor img({3, kDigitImageHeight, kDigitImageWidth}, kGlyphBackground);

    std::size_t oy = kGlyphPad;
    std::size_t ox = kGlyphPad;
    Rng rng(noise_seed);
    if (noise_seed != 0) {
        oy = static_cast<std::size_t>(static_cast<std::int64_t>(kGlyphPad) +
                                      rng.uniform_int(-kRenderJitterPx, kRenderJitterPx));
        ox = static_cast<std::size_t>(static_cast<std::int64_t>(kGlyphPad) +
                                      rng.uniform_int(-kRenderJitterPx, kRenderJitterPx));
    }

    if (!label.is_blank()) {
        const std::uint8_t mask = detail::kDigitSegments[static_cast<std::size_t>(label.digit())];
        for (std::size_t seg = 0; seg < 7; ++seg) {
            if (mask & (1u << seg)) {
                detail::fill_rect(img, detail::kSegments[seg], oy, ox, kGlyphInk);
            }
        }
        if (label.has_decimal_point()) {
            detail::fill_rect(img, detail::kDecimalDot, oy, ox, kGlyphInk);
        }
    }

    if (noise_seed != 0) {
        for (double& v : img.data) {
            v += rng.uniform(-kRenderNoiseAmplitude, kRenderNoiseAmplitude);
            v = std::min(1.0, std::max(0.0, v));
        }
    }
    return {std::move(img), label};
}

struct Corpus {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
};

/// Balanced corpus over all 21 categories with a deterministic 90/10
/// split per class (the last tenth of each class is the test split).
inline Corpus build_corpus(std::size_t n_per_class, std::uint64_t seed) {
    if (n_per_class < 10) throw std::invalid_argument("build_corpus: n_per_class < 10");
    Corpus corpus;
    const std::size_t n_test = n_per_class / 10;
    for (int cat = 1; cat <= 21; ++cat) {
        const DigitLabel label(cat);
        for (std::size_t k = 0; k < n_per_class; ++k) {
            // k == 0 keeps one clean exemplar per class in the train split
            std::uint64_t noise_seed = 0;
            if (k != 0) {
                noise_seed = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(cat)), k);
                noise_seed |= 1;  // 0 is reserved for the clean render
            }
            DigitImage img = render_digit(label, noise_seed);
            LabeledImage sample{std::move(img.pixels), label};
            if (k < n_per_class - n_test) {
                corpus.train.push_back(std::move(sample));
            } else {
                corpus.test.push_back(std::move(sample));
            }
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Meter layout and frame handling

struct RoiRect {
    std::size_t x = 0;  // column of the left edge
    std::size_t y = 0;  // row of the top edge
    std::size_t w = 0;
    std::size_t h = 0;

    friend bool operator==(const RoiRect&, const RoiRect&) = default;
};

inline constexpr std::array<const char*, 6> kFieldNames = {"u", "i", "s", "p", "cos_phi", "f"};

/// Fixed digit-cell geometry of a meter display: one rectangle per digit
/// position plus the assignment of position runs to displayed fields.
struct MeterLayout {
    std::vector<RoiRect> rois;
    std::map<std::string, std::vector<std::size_t>> field_map;  // field -> roi indices

    void validate() const {
        for (std::size_t a = 0; a < rois.size(); ++a) {
            for (std::size_t b = a + 1; b < rois.size(); ++b) {
                const RoiRect& r1 = rois[a];
                const RoiRect& r2 = rois[b];
                const bool overlap = r1.x < r2.x + r2.w && r2.x < r1.x + r1.w &&
                                     r1.y < r2.y + r2.h && r2.y < r1.y + r1.h;
                if (overlap) {
                    throw std::invalid_argument("MeterLayout: ROIs " + std::to_string(a) +
                                                " and " + std::to_string(b) + " overlap");
                }
            }
        }
        for (const auto& [field, indices] : field_map) {
            bool known = false;
            for (const char* name : kFieldNames) known = known || field == name;
            if (!known) throw std::invalid_argument("MeterLayout: unknown field " + field);
            for (std::size_t idx : indices) {
                if (idx >= rois.size()) {
                    throw std::invalid_argument("MeterLayout: field " + field +
                                                " references missing ROI");
                }
            }
        }
    }
};

inline nlohmann::json layout_to_json(const MeterLayout& layout) {
    nlohmann::json j;
    j["rois"] = nlohmann::json::array();
    for (const RoiRect& r : layout.rois) {
        j["rois"].push_back({r.x, r.y, r.w, r.h});
    }
    j["field_map"] = layout.field_map;
    return j;
}

inline MeterLayout layout_from_json(const nlohmann::json& j) {
    MeterLayout layout;
    for (const auto& r : j.at("rois")) {
        if (!r.is_array() || r.size() != 4) {
            throw std::invalid_argument("MeterLayout: each roi must be [x, y, w, h]");
        }
        layout.rois.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>(),
                               r[2].get<std::size_t>(), r[3].get<std::size_t>()});
    }
    if (j.contains("field_map")) {
        layout.field_map =
            j.at("field_map").get<std::map<std::string, std::vector<std::size_t>>>();
    }
    layout.validate();
    return layout;
}

/// Grid layout: one row per field in the order u, i, s, p, cos_phi, f;
/// `cells` digit positions per row. ROIs are exactly glyph-sized, so
/// composed frames crop back losslessly.
inline MeterLayout grid_layout(std::size_t cells) {
    MeterLayout layout;
    for (std::size_t row = 0; row < kFieldNames.size(); ++row) {
        std::vector<std::size_t> indices;
        for (std::size_t col = 0; col < cells; ++col) {
            indices.push_back(layout.rois.size());
            layout.rois.push_back({col * kDigitImageWidth + kGlyphPad,
                                   row * kDigitImageHeight + kGlyphPad, kGlyphWidth,
                                   kGlyphHeight});
        }
        layout.field_map[kFieldNames[row]] = indices;
    }
    return layout;
}

inline std::pair<std::size_t, std::size_t> grid_frame_size(std::size_t cells) {
    return {kFieldNames.size() * kDigitImageHeight, cells * kDigitImageWidth};
}

/// Stamp digit images onto a background frame. Each image's glyph region
/// (padding stripped) must match its ROI size exactly.
inline Tensor compose_frame(const MeterLayout& layout, const std::vector<DigitImage>& digits,
                            std::size_t frame_h, std::size_t frame_w) {
    if (digits.size() != layout.rois.size()) {
        throw std::invalid_argument("compose_frame: digit count does not match layout");
    }
    Tensor frame({3, frame_h, frame_w}, kGlyphBackground);
    for (std::size_t k = 0; k < digits.size(); ++k) {
        const RoiRect& r = layout.rois[k];
        if (r.w != kGlyphWidth || r.h != kGlyphHeight) {
            throw std::invalid_argument("compose_frame: ROI " + std::to_string(k) +
                                        " is not glyph-sized");
        }
        if (r.x + r.w > frame_w || r.y + r.h > frame_h) {
            throw std::invalid_argument("compose_frame: ROI " + std::to_string(k) +
                                        " outside frame");
        }
        const Tensor& px = digits[k].pixels;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t y = 0; y < r.h; ++y) {
                for (std::size_t x = 0; x < r.w; ++x) {
                    frame.at3(c, r.y + y, r.x + x) = px.at3(c, kGlyphPad + y, kGlyphPad + x);
                }
            }
        }
    }
    return frame;
}

/// Cut every ROI out of the frame, nearest-neighbor resample to the
/// glyph size, and re-pad to the 3 x 65 x 50 digit-image shape.
inline std::vector<Tensor> crop_rois(const Tensor& frame, const MeterLayout& layout) {
    if (frame.rank() != 3 || frame.channels() != 3) {
        throw std::invalid_argument("crop_rois: expected a 3-channel frame");
    }
    layout.validate();
    std::vector<Tensor> out;
    out.reserve(layout.rois.size());
    for (const RoiRect& r : layout.rois) {
        if (r.w == 0 || r.h == 0 || r.x + r.w > frame.width() || r.y + r.h > frame.height()) {
            throw std::invalid_argument("crop_rois: ROI outside frame bounds");
        }
        Tensor img({3, kDigitImageHeight, kDigitImageWidth}, kGlyphBackground);
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t y = 0; y < kGlyphHeight; ++y) {
                const std::size_t sy =
                    r.y + static_cast<std::size_t>((static_cast<double>(y) + 0.5) *
                                                   static_cast<double>(r.h) /
                                                   static_cast<double>(kGlyphHeight));
                for (std::size_t x = 0; x < kGlyphWidth; ++x) {
                    const std::size_t sx =
                        r.x + static_cast<std::size_t>((static_cast<double>(x) + 0.5) *
                                                       static_cast<double>(r.w) /
                                                       static_cast<double>(kGlyphWidth));
                    img.at3(c, kGlyphPad + y, kGlyphPad + x) = frame.at3(c, sy, sx);
                }
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Digit-run assembly

struct FieldParseError : std::runtime_error {
    std::vector<std::size_t> positions;
    FieldParseError(const std::string& what, std::vector<std::size_t> pos)
        : std::runtime_error(what), positions(std::move(pos)) {}
};

/// Turn a run of predicted categories into a decimal value. Blanks are
/// skipped; a decimal-point category places the point right after its
/// digit. The returned text is what the display showed.
struct AssembledNumber {
    double value = 0.0;
    std::string text;
};

inline AssembledNumber assemble_number(const std::vector<DigitLabel>& run) {
    std::string text;
    std::vector<std::size_t> dot_positions;
    for (std::size_t k = 0; k < run.size(); ++k) {
        const DigitLabel& d = run[k];
        if (d.is_blank()) continue;
        text += static_cast<char>('0' + d.digit());
        if (d.has_decimal_point()) {
            dot_positions.push_back(k);
            text += '.';
        }
    }
    if (text.empty()) {
        throw FieldParseError("digit run contains only blanks", {});
    }
    if (dot_positions.size() > 1) {
        throw FieldParseError("digit run contains more than one decimal point", dot_positions);
    }
    AssembledNumber out;
    out.text = text;
    out.value = std::strtod(text.c_str(), nullptr);
    return out;
}

/// Inverse of assemble_number for display text like "230.0": the decimal
/// point merges into the preceding digit's category, and the run is
/// left-padded with blanks to `cells`.
inline std::vector<DigitLabel> text_to_cells(const std::string& text, std::size_t cells) {
    std::vector<DigitLabel> run;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char ch = text[k];
        if (ch == '.') {
            if (run.empty() || run.back().has_decimal_point()) {
                throw std::invalid_argument("text_to_cells: misplaced decimal point in " + text);
            }
            run.back() = DigitLabel(run.back().category + 10);
        } else if (ch >= '0' && ch <= '9') {
            run.push_back(DigitLabel(ch - '0' + 1));
        } else {
            throw std::invalid_argument("text_to_cells: unsupported character in " + text);
        }
    }
    if (run.size() > cells) {
        throw std::invalid_argument("text_to_cells: " + text + " does not fit " +
                                    std::to_string(cells) + " cells");
    }
    std::vector<DigitLabel> padded(cells - run.size(), DigitLabel(21));
    padded.insert(padded.end(), run.begin(), run.end());
    return padded;
}

inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

// ---------------------------------------------------------------------------
// Frame -> energy vector pipeline

struct FrameReading {
    EnergyVector recognized;            // as read off the display
    CorrectionReport report;            // report.corrected is the final vector
    std::optional<double> frequency;    // displayed f, not part of the vector
    std::map<std::string, std::string> field_text;  // per-field display text
};

/// Full recognition pipeline: crop ROIs, classify each digit cell,
/// assemble the field runs, then repair the vector against the physics
/// constraints.
inline FrameReading frame_to_energy_vector(const Tensor& frame, const MeterLayout& layout,
                                           const ScnnParams& params, const ScnnConfig& cfg,
                                           const Tolerances& tolerances) {
    layout.validate();
    for (const char* required : {"u", "i", "s", "p", "cos_phi"}) {
        if (!layout.field_map.count(required)) {
            throw std::invalid_argument(std::string("frame_to_energy_vector: layout lacks field ") +
                                        required);
        }
    }

    const std::vector<Tensor> crops = crop_rois(frame, layout);
    std::vector<DigitLabel> predictions;
    predictions.reserve(crops.size());
    for (const Tensor& crop : crops) {
        predictions.push_back(predict_digit(crop, params, cfg));
    }

    FrameReading reading;
    std::map<std::string, double> values;
    for (const auto& [field, indices] : layout.field_map) {
        std::vector<DigitLabel> run;
        run.reserve(indices.size());
        for (std::size_t idx : indices) run.push_back(predictions[idx]);
        try {
            const AssembledNumber num = assemble_number(run);
            values[field] = num.value;
            reading.field_text[field] = num.text;
        } catch (const FieldParseError& err) {
            throw FieldParseError("field " + field + ": " + err.what(), err.positions);
        }
    }

    reading.recognized = {values.at("u"), values.at("i"), values.at("s"), values.at("p"),
                          values.at("cos_phi")};
    if (values.count("f")) reading.frequency = values.at("f");
    reading.report = correct(reading.recognized, tolerances);
    return reading;
}

}  // namespace ead
