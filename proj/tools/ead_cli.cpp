// ead — command-line front end for the energy-activity toolkit:
// similarity scoring, reading repair, digit-recognition training, corpus
// generation, and dataset inspection. Every command is a thin adapter
// over the library; all runs are deterministic under --seed.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ead/autocorrect.hpp"
#include "ead/dataset_io.hpp"
#include "ead/image_io.hpp"
#include "ead/lcs.hpp"
#include "ead/rng.hpp"
#include "ead/scnn.hpp"
#include "ead/sevenseg.hpp"
#include "ead/similarity.hpp"
#include "ead/version.hpp"

namespace fs = std::filesystem;

namespace {

ead::Quantity parse_quantity(const std::string& name) {
    const auto q = ead::quantity_from_name(name);
    if (!q) throw std::runtime_error("unknown quantity '" + name + "' (use u,i,s,p,cos_phi,f)");
    return *q;
}

ead::DatasetGroup load_group(const fs::path& dir, ead::Quantity q, bool normalize) {
    const std::vector<ead::EnergyDataPoint> points = ead::load_directory(dir);
    if (points.empty()) throw std::runtime_error("no data points under " + dir.string());
    ead::DatasetGroup g;
    g.quantity = q;
    g.label = points.front().labels;
    g.name = dir.filename().string();
    for (const ead::EnergyDataPoint& dp : points) {
        ead::TimeSeries ts = ead::extract_channel(dp, q);
        g.members.push_back(normalize ? ead::z_normalize(ts) : ts);
        g.member_ids.push_back(dp.source_id);
    }
    return g;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << content;
}

// finite-difference check used by the gradcheck command
struct GradCheckReport {
    double max_relative_error = 0.0;
    bool additivity_ok = true;
    bool outside_region_zero = true;
};

// differences below the finite-difference resolution count as agreement
double relative_error(double a, double b) {
    const double diff = std::abs(a - b);
    if (diff < 1e-8) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t samples_per_layer, bool verbose) {
    ead::ScnnConfig cfg;
    cfg.seed = seed;
    ead::ScnnParams params = ead::init_params(cfg);

    ead::Rng rng(ead::mix_seed(seed, 0x67726164));
    ead::Tensor image({3, 65, 50});
    for (double& v : image.data) v = rng.uniform(0.0, 1.0);
    const ead::DigitLabel label(static_cast<int>(rng.uniform_int(1, 21)));

    ead::ForwardCache cache;
    ead::scnn_forward(image, params, cfg, &cache);
    const ead::ScnnGradients grads = ead::scnn_backward(params, cfg, cache, label);

    auto loss = [&] {
        return ead::cross_entropy_loss(ead::scnn_forward(image, params, cfg), label);
    };
    auto central = [&](double* param) {
        const double saved = *param;
        const double h = 1e-5;
        *param = saved + h;
        const double plus = loss();
        *param = saved - h;
        const double minus = loss();
        *param = saved;
        return (plus - minus) / (2.0 * h);
    };

    GradCheckReport report;
    auto check_layer = [&](const std::string& name, std::vector<double>& theta,
                           const std::vector<double>& analytic) {
        double layer_max = 0.0;
        const std::size_t n = std::min(samples_per_layer, theta.size());
        std::vector<std::size_t> picks;
        if (n == theta.size()) {
            for (std::size_t k = 0; k < n; ++k) picks.push_back(k);
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                picks.push_back(static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(theta.size()) - 1)));
            }
        }
        for (std::size_t idx : picks) {
            layer_max = std::max(layer_max, relative_error(central(&theta[idx]), analytic[idx]));
        }
        if (verbose) {
            std::cout << "  " << name << ": " << picks.size() << " params, max rel err "
                      << layer_max << "\n";
        }
        report.max_relative_error = std::max(report.max_relative_error, layer_max);
    };

    check_layer("conv1.weights", params.conv1.weights.data, grads.conv1.d_weights.data);
    check_layer("conv1.biases", params.conv1.biases, grads.conv1.d_biases);
    check_layer("conv2.weights", params.conv2.weights.data, grads.conv2.d_weights.data);
    check_layer("conv2.biases", params.conv2.biases, grads.conv2.d_biases);
    check_layer("sconv.weights", params.sconv.weights.data, grads.sconv.d_weights.data);
    check_layer("sconv.biases", params.sconv.biases, grads.sconv.d_biases);
    check_layer("ln1.gain", params.ln1.gain, grads.ln1.d_gain);
    check_layer("ln1.shift", params.ln1.shift, grads.ln1.d_shift);
    check_layer("ln2.gain", params.ln2.gain, grads.ln2.d_gain);
    check_layer("ln2.shift", params.ln2.shift, grads.ln2.d_shift);
    check_layer("ln3.gain", params.ln3.gain, grads.ln3.d_gain);
    check_layer("ln3.shift", params.ln3.shift, grads.ln3.d_shift);
    check_layer("fc.weights", params.fc.weights, grads.fc.d_weights);
    check_layer("fc.biases", params.fc.biases, grads.fc.d_biases);
    check_layer("sfc.weights", params.sfc.weights, grads.sfc.d_weights);
    check_layer("sfc.biases", params.sfc.biases, grads.sfc.d_biases);
    check_layer("head.weights", params.head.weights, grads.head.d_weights);
    check_layer("head.biases", params.head.biases, grads.head.d_biases);

    // dual-path sum: full gradient = FC-only + SConv-only, elementwise
    const ead::ScnnGradients fc_only =
        ead::scnn_backward(params, cfg, cache, label, ead::PathMask::FcOnly);
    const ead::ScnnGradients sconv_only =
        ead::scnn_backward(params, cfg, cache, label, ead::PathMask::SconvOnly);
    const ead::ScnnShapes shapes = ead::derive_shapes(cfg);
    const std::size_t y0 = shapes.conv2_out[1] - shapes.sub[1];
    const std::size_t x0 = shapes.conv2_out[2] - shapes.sub[2];
    for (std::size_t c = 0; c < shapes.conv2_out[0]; ++c) {
        for (std::size_t y = 0; y < shapes.conv2_out[1]; ++y) {
            for (std::size_t x = 0; x < shapes.conv2_out[2]; ++x) {
                const double f = grads.d_a2.at3(c, y, x);
                const double a = fc_only.d_a2.at3(c, y, x);
                const double b = sconv_only.d_a2.at3(c, y, x);
                if (std::abs(f - (a + b)) > 1e-12) report.additivity_ok = false;
                if ((y < y0 || x < x0) && b != 0.0) report.outside_region_zero = false;
            }
        }
    }
    return report;
}

int cmd_sim_self(const fs::path& in, const std::string& quantity, const fs::path& out,
                 bool normalize) {
    const ead::Quantity q = parse_quantity(quantity);
    const ead::DatasetGroup g = load_group(in, q, normalize);
    const ead::SimilarityMatrix m = ead::self_similarity_matrix(g);

    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out.string());
    ead::write_matrix_csv(os, m, q);
    std::cout << "self-similarity matrix " << m.rows << "x" << m.cols << " written to " << out.string()
              << "\n";
    std::cout << "usm(D) = " << ead::matrix_mean(m) << "\n";
    return 0;
}

int cmd_sim_cross(const fs::path& in_a, const fs::path& in_b, const std::string& quantity,
                  const fs::path& out, bool normalize) {
    const ead::Quantity q = parse_quantity(quantity);
    const ead::DatasetGroup a = load_group(in_a, q, normalize);
    const ead::DatasetGroup b = load_group(in_b, q, normalize);
    const ead::SimilarityMatrix m = ead::cross_similarity_matrix(a, b);

    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out.string());
    ead::write_matrix_csv(os, m, q);
    std::cout << "cross-similarity matrix " << m.rows << "x" << m.cols << " written to " << out.string()
              << "\n";
    std::cout << "usm(Da, Db) = " << ead::matrix_mean(m) << "\n";
    return 0;
}

int cmd_sim_vector(const fs::path& in, const std::string& group_by, const std::string& quantity,
                   const fs::path& out, bool normalize) {
    const ead::Quantity q = parse_quantity(quantity);
    const ead::LabelSubset subset = ead::LabelSubset::parse(group_by);
    const std::vector<ead::EnergyDataPoint> points = ead::load_directory(in);
    if (points.empty()) throw std::runtime_error("no data points under " + in.string());

    ead::PartitionedDataset d = ead::group_by_labels(points, subset, q);
    if (normalize) {
        for (ead::DatasetGroup& g : d.groups) {
            for (ead::TimeSeries& ts : g.members) ts = ead::z_normalize(ts);
        }
    }
    const std::vector<ead::GroupPairSimilarity> rows = ead::dataset_similarity_vector(d);

    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out.string());
    ead::write_similarity_vector_csv(os, rows, q);
    std::cout << d.groups.size() << " groups, " << rows.size() << " pairs written to " << out.string()
              << "\n";
    for (const auto& row : rows) {
        std::cout << row.group_a << " ~ " << row.group_b << ": " << row.value << "\n";
    }
    return 0;
}

int cmd_correct(const fs::path& in, const fs::path& out, std::optional<double> eps1,
                std::optional<double> eps2, const std::vector<double>& scale) {
    std::optional<ead::Tolerances> tol;
    if (eps1 && eps2) {
        tol = ead::Tolerances(*eps1, *eps2);
    } else if (eps1.has_value() != eps2.has_value()) {
        throw std::runtime_error("--eps1 and --eps2 must be given together");
    }
    std::optional<std::array<double, 5>> scale_vec;
    if (!scale.empty()) {
        if (scale.size() != 5) throw std::runtime_error("--scale needs 5 values (u,i,s,p,cos_phi)");
        scale_vec = {scale[0], scale[1], scale[2], scale[3], scale[4]};
    }

    std::ifstream is(in);
    if (!is) throw std::runtime_error("cannot open " + in.string());
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out.string());
    const std::size_t rows = ead::correct_csv(is, os, tol, scale_vec);
    std::cout << rows << " vectors corrected, written to " << out.string() << "\n";
    return 0;
}

int cmd_scnn_train(std::size_t n_per_class, std::uint64_t seed, std::size_t epochs,
                   std::size_t batch, double lr, std::optional<double> stop_at,
                   bool no_subsample, const fs::path& out, const std::optional<fs::path>& metrics) {
    ead::ScnnConfig cfg;
    cfg.seed = seed;
    cfg.learning_rate = lr;
    cfg.use_subsample_path = !no_subsample;

    std::cout << "building corpus: " << n_per_class << " images per class, seed " << seed << "\n";
    const ead::Corpus corpus = ead::build_corpus(n_per_class, seed);
    std::cout << "train " << corpus.train.size() << " / test " << corpus.test.size() << "\n";

    ead::TrainOptions opts;
    opts.max_epochs = epochs;
    opts.batch_size = batch;
    opts.stop_at_test_accuracy = stop_at;
    opts.on_epoch = [](const ead::EpochMetrics& m) {
        std::cout << "epoch " << m.epoch << ": loss " << m.mean_loss << ", train acc "
                  << m.train_accuracy << ", test acc " << m.test_accuracy << std::endl;
    };
    const ead::TrainResult result = ead::train(corpus.train, corpus.test, cfg, opts);

    ead::save_checkpoint(out.string(), cfg, result.params);
    std::cout << "checkpoint written to " << out.string() << "\n";

    if (metrics) {
        std::ofstream os(*metrics);
        if (!os) throw std::runtime_error("cannot open " + metrics->string());
        os << "epoch,mean_loss,train_accuracy,test_accuracy\n";
        os.precision(17);
        for (const ead::EpochMetrics& m : result.epochs) {
            os << m.epoch << "," << m.mean_loss << "," << m.train_accuracy << ","
               << m.test_accuracy << "\n";
        }
    }
    return 0;
}

int cmd_scnn_eval(const fs::path& model, std::size_t n_per_class, std::uint64_t seed,
                  const std::optional<fs::path>& confusion_out) {
    const auto [cfg, params] = ead::load_checkpoint(model.string());
    const ead::Corpus corpus = ead::build_corpus(n_per_class, seed);
    const double acc = ead::evaluate_accuracy(corpus.test, params, cfg);
    const std::vector<std::size_t> conf = ead::confusion_matrix(corpus.test, params, cfg);
    const std::size_t decimal_confusions = ead::decimal_pair_confusions(conf, cfg.num_classes);

    std::cout << "test accuracy: " << acc << " over " << corpus.test.size() << " images\n";
    std::cout << "digit vs digit-with-point confusions: " << decimal_confusions << "\n";

    if (confusion_out) {
        std::ofstream os(*confusion_out);
        if (!os) throw std::runtime_error("cannot open " + confusion_out->string());
        const auto c = static_cast<std::size_t>(cfg.num_classes);
        os << "true\\pred";
        for (std::size_t k = 1; k <= c; ++k) os << "," << k;
        os << "\n";
        for (std::size_t t = 0; t < c; ++t) {
            os << (t + 1);
            for (std::size_t p = 0; p < c; ++p) os << "," << conf[t * c + p];
            os << "\n";
        }
    }
    return 0;
}

int cmd_corpus_gen(std::size_t n_per_class, std::uint64_t seed, const fs::path& out,
                   const std::string& format) {
    if (format != "png" && format != "t64") {
        throw std::runtime_error("--format must be png or t64");
    }
    const ead::Corpus corpus = ead::build_corpus(n_per_class, seed);
    fs::create_directories(out);

    std::ofstream manifest(out / "manifest.csv");
    if (!manifest) throw std::runtime_error("cannot open manifest under " + out.string());
    manifest << "file,category,split\n";

    auto dump = [&](const std::vector<ead::LabeledImage>& set, const std::string& split) {
        std::size_t index = 0;
        for (const ead::LabeledImage& s : set) {
            char name[64];
            std::snprintf(name, sizeof name, "%s_%02d_%05zu.%s", split.c_str(),
                          s.label.category, index, format.c_str());
            const fs::path file = out / name;
            if (format == "png") {
                ead::write_png(file.string(), s.image);
            } else {
                ead::write_tensor_dump(file.string(), s.image);
            }
            manifest << name << "," << s.label.category << "," << split << "\n";
            ++index;
        }
    };
    dump(corpus.train, "train");
    dump(corpus.test, "test");
    std::cout << corpus.train.size() + corpus.test.size() << " images written to " << out.string() << "\n";
    return 0;
}

int cmd_ingest(const fs::path& in, const fs::path& out, const std::optional<fs::path>& report_path) {
    const auto [points, report] = ead::ead_import(in);
    fs::create_directories(out);
    std::size_t index = 0;
    for (const ead::EnergyDataPoint& dp : points) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%05zu.csv", index++);
        ead::write_datapoint(dp, out / name);
    }
    const fs::path rp = report_path ? *report_path : out / "import_report.json";
    write_text_file(rp, report.to_json().dump(2) + "\n");
    std::cout << "imported " << report.imported.size() << ", skipped " << report.skipped.size()
              << "; canonical files under " << out.string() << "\n";
    for (const auto& skip : report.skipped) {
        std::cerr << "skipped " << skip.path << ": " << skip.reason << "\n";
    }
    return 0;
}

int cmd_stats(const fs::path& in, bool as_json) {
    const std::vector<ead::EnergyDataPoint> points = ead::load_directory(in);
    std::map<std::string, std::size_t> appliances;
    std::size_t complex_count = 0;
    std::size_t min_len = points.empty() ? 0 : points.front().length();
    std::size_t max_len = 0;
    double mean_len = 0.0;
    for (const ead::EnergyDataPoint& dp : points) {
        appliances[ead::normalize_label(dp.labels.appliance)]++;
        if (dp.labels.is_complex()) ++complex_count;
        min_len = std::min(min_len, dp.length());
        max_len = std::max(max_len, dp.length());
        mean_len += static_cast<double>(dp.length());
    }
    if (!points.empty()) mean_len /= static_cast<double>(points.size());

    if (as_json) {
        nlohmann::json j;
        j["points"] = points.size();
        j["complex_points"] = complex_count;
        j["appliances"] = appliances;
        j["length"] = {{"min", min_len}, {"max", max_len}, {"mean", mean_len}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << points.size() << " data points (" << complex_count
                  << " with application labels)\n";
        std::cout << "series length: min " << min_len << ", max " << max_len << ", mean "
                  << mean_len << "\n";
        for (const auto& [name, count] : appliances) {
            std::cout << "  " << name << ": " << count << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-activity dataset toolkit"};
    app.set_version_flag("--version", std::string("ead-toolkit ") + ead::kToolkitVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "seed for every randomized step")->capture_default_str();

    // sim-self
    auto* sim_self = app.add_subcommand("sim-self", "self-similarity matrix of one group");
    fs::path ss_in, ss_out;
    std::string ss_quantity = "i";
    bool ss_normalize = false;
    sim_self->add_option("--in", ss_in, "directory of data-point CSVs")->required();
    sim_self->add_option("--quantity", ss_quantity, "channel to compare")->capture_default_str();
    sim_self->add_option("--out", ss_out, "output matrix CSV")->required();
    sim_self->add_flag("--normalize", ss_normalize, "z-normalize series before comparing");

    // sim-cross
    auto* sim_cross = app.add_subcommand("sim-cross", "cross-similarity matrix of two groups");
    fs::path sc_a, sc_b, sc_out;
    std::string sc_quantity = "i";
    bool sc_normalize = false;
    sim_cross->add_option("--a", sc_a, "first group directory")->required();
    sim_cross->add_option("--b", sc_b, "second group directory")->required();
    sim_cross->add_option("--quantity", sc_quantity, "channel to compare")->capture_default_str();
    sim_cross->add_option("--out", sc_out, "output matrix CSV")->required();
    sim_cross->add_flag("--normalize", sc_normalize, "z-normalize series before comparing");

    // sim-vector
    auto* sim_vector =
        app.add_subcommand("sim-vector", "pairwise similarity vector over label groups");
    fs::path sv_in, sv_out;
    std::string sv_group_by = "appliance,brand,event";
    std::string sv_quantity = "i";
    bool sv_normalize = false;
    sim_vector->add_option("--in", sv_in, "root directory of data-point CSVs")->required();
    sim_vector->add_option("--group-by", sv_group_by, "label fields forming the groups")
        ->capture_default_str();
    sim_vector->add_option("--quantity", sv_quantity, "channel to compare")->capture_default_str();
    sim_vector->add_option("--out", sv_out, "output CSV (group_a,group_b,usm)")->required();
    sim_vector->add_flag("--normalize", sv_normalize, "z-normalize series before comparing");

    // correct
    auto* correct_cmd = app.add_subcommand("correct", "repair energy vectors in a CSV");
    fs::path co_in, co_out;
    std::optional<double> co_eps1, co_eps2;
    std::vector<double> co_scale;
    correct_cmd->add_option("--in", co_in, "input CSV (u,i,s,p,cos_phi)")->required();
    correct_cmd->add_option("--out", co_out, "output CSV")->required();
    correct_cmd->add_option("--eps1", co_eps1, "apparent-power tolerance (VA)");
    correct_cmd->add_option("--eps2", co_eps2, "power-factor tolerance");
    correct_cmd->add_option("--scale", co_scale,
                            "5 per-component weights for a unit-aware distance");

    // scnn-train
    auto* scnn_train = app.add_subcommand("scnn-train", "train the digit recognizer");
    std::size_t st_n = 100, st_epochs = 20, st_batch = 32;
    double st_lr = 0.01;
    std::optional<double> st_stop;
    bool st_no_subsample = false;
    fs::path st_out = "model.bin";
    std::optional<fs::path> st_metrics;
    scnn_train->add_option("--n-per-class", st_n, "corpus size per category")
        ->capture_default_str();
    scnn_train->add_option("--epochs", st_epochs, "maximum epochs")->capture_default_str();
    scnn_train->add_option("--batch", st_batch, "minibatch size")->capture_default_str();
    scnn_train->add_option("--lr", st_lr, "learning rate")->capture_default_str();
    scnn_train->add_option("--stop-at", st_stop, "stop once test accuracy reaches this value");
    scnn_train->add_flag("--no-subsample", st_no_subsample,
                         "ablate the subsample path (conventional CNN)");
    scnn_train->add_option("--out", st_out, "checkpoint path")->capture_default_str();
    scnn_train->add_option("--metrics", st_metrics, "per-epoch metrics CSV");

    // scnn-eval
    auto* scnn_eval = app.add_subcommand("scnn-eval", "evaluate a checkpoint");
    fs::path se_model;
    std::size_t se_n = 100;
    std::optional<fs::path> se_confusion;
    scnn_eval->add_option("--model", se_model, "checkpoint path")->required();
    scnn_eval->add_option("--n-per-class", se_n, "corpus size per category")
        ->capture_default_str();
    scnn_eval->add_option("--confusion", se_confusion, "write the full confusion matrix CSV");

    // scnn-gradcheck
    auto* gradcheck = app.add_subcommand("scnn-gradcheck",
                                         "verify analytic gradients against finite differences");
    std::size_t gc_samples = 100;
    bool gc_quiet = false;
    gradcheck->add_option("--samples", gc_samples, "sampled parameters per layer")
        ->capture_default_str();
    gradcheck->add_flag("--quiet", gc_quiet, "only print the summary line");

    // corpus-gen
    auto* corpus_gen = app.add_subcommand("corpus-gen", "write the synthetic digit corpus");
    std::size_t cg_n = 100;
    fs::path cg_out;
    std::string cg_format = "png";
    corpus_gen->add_option("--n-per-class", cg_n, "images per category")->capture_default_str();
    corpus_gen->add_option("--out", cg_out, "output directory")->required();
    corpus_gen->add_option("--format", cg_format, "png or t64")->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "import a foreign dataset directory");
    fs::path in_in, in_out;
    std::optional<fs::path> in_report;
    ingest->add_option("--in", in_in, "directory to import")->required();
    ingest->add_option("--out", in_out, "directory for canonical files")->required();
    ingest->add_option("--report", in_report, "import report JSON path");

    // stats
    auto* stats = app.add_subcommand("stats", "summarize a canonical dataset directory");
    fs::path stats_in;
    bool stats_json = false;
    stats->add_option("--in", stats_in, "directory of data-point CSVs")->required();
    stats->add_flag("--json", stats_json, "emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help/--version exit 0
    }

    try {
        if (*sim_self) return cmd_sim_self(ss_in, ss_quantity, ss_out, ss_normalize);
        if (*sim_cross) return cmd_sim_cross(sc_a, sc_b, sc_quantity, sc_out, sc_normalize);
        if (*sim_vector) return cmd_sim_vector(sv_in, sv_group_by, sv_quantity, sv_out, sv_normalize);
        if (*correct_cmd) return cmd_correct(co_in, co_out, co_eps1, co_eps2, co_scale);
        if (*scnn_train) {
            return cmd_scnn_train(st_n, seed, st_epochs, st_batch, st_lr, st_stop,
                                  st_no_subsample, st_out, st_metrics);
        }
        if (*scnn_eval) return cmd_scnn_eval(se_model, se_n, seed, se_confusion);
        if (*gradcheck) {
            const GradCheckReport report = run_gradcheck(seed, gc_samples, !gc_quiet);
            std::cout << "max relative error: " << report.max_relative_error << "\n";
            std::cout << "dual-path additivity: " << (report.additivity_ok ? "ok" : "VIOLATED")
                      << "\n";
            std::cout << "zero outside subsampled region: "
                      << (report.outside_region_zero ? "ok" : "VIOLATED") << "\n";
            const bool pass =
                report.max_relative_error < 1e-4 && report.additivity_ok && report.outside_region_zero;
            std::cout << (pass ? "PASS" : "FAIL") << "\n";
            return pass ? 0 : 1;
        }
        if (*corpus_gen) return cmd_corpus_gen(cg_n, seed, cg_out, cg_format);
        if (*ingest) return cmd_ingest(in_in, in_out, in_report);
        if (*stats) return cmd_stats(stats_in, stats_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
