#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ead/autocorrect.hpp"
#include "ead/dataset_io.hpp"
#include "ead/similarity.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ead;

#ifndef EAD_CLI_PATH
#error "EAD_CLI_PATH must point at the built CLI binary"
#endif

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EAD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ead_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
};

EnergyDataPoint make_point(const std::string& id, std::vector<double> current) {
    EnergyDataPoint dp;
    dp.source_id = id;
    dp.labels = {"fan", "brand", std::nullopt, "on~off"};
    const std::size_t n = current.size();
    dp.channel(Quantity::Current).samples = std::move(current);
    for (Quantity q : {Quantity::Voltage, Quantity::ApparentPower, Quantity::ActivePower,
                       Quantity::Frequency}) {
        dp.channel(q).samples.assign(n, 1.0);
    }
    dp.channel(Quantity::PowerFactor).samples.assign(n, 0.5);
    return dp;
}

TEST_F(CliTest, MissingSubcommandIsUsageError) {
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("sim-self"), 2);          // missing required flags
    EXPECT_EQ(run_cli("no-such-command"), 2);
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("sim-self --help"), 0);
}

TEST_F(CliTest, DataErrorExitsOne) {
    EXPECT_EQ(run_cli("sim-self --in " + (dir_ / "nowhere").string() + " --out " +
                      (dir_ / "m.csv").string()),
              1);
}

TEST_F(CliTest, SimSelfMatchesDirectComputation) {
    const fs::path group_dir = dir_ / "group";
    fs::create_directories(group_dir);
    write_datapoint(make_point("a", {1, 2}), group_dir / "a.csv");
    write_datapoint(make_point("b", {1, 2, 3, 4}), group_dir / "b.csv");

    const fs::path out = dir_ / "m.csv";
    ASSERT_EQ(run_cli("sim-self --in " + group_dir.string() + " --quantity i --out " +
                      out.string()),
              0);

    // identical inputs through the library must give identical bytes
    DatasetGroup g;
    g.quantity = Quantity::Current;
    for (const auto& dp : load_directory(group_dir)) {
        g.members.push_back(extract_channel(dp, Quantity::Current));
        g.member_ids.push_back(dp.source_id);
    }
    std::ostringstream expected;
    write_matrix_csv(expected, self_similarity_matrix(g), Quantity::Current);
    EXPECT_EQ(slurp(out), expected.str());
}

TEST_F(CliTest, SimVectorWritesPairRows) {
    const fs::path root = dir_ / "root";
    fs::create_directories(root);
    write_datapoint(make_point("a", {1, 2}), root / "a.csv");
    EnergyDataPoint other = make_point("b", {100, 200});
    other.labels.appliance = "heater";
    write_datapoint(other, root / "b.csv");

    const fs::path out = dir_ / "v.csv";
    ASSERT_EQ(run_cli("sim-vector --in " + root.string() +
                      " --group-by appliance --quantity i --out " + out.string()),
              0);
    const std::string text = slurp(out);
    EXPECT_NE(text.find("group_a,group_b,usm"), std::string::npos);
    EXPECT_NE(text.find("fan,heater,"), std::string::npos);
}

TEST_F(CliTest, CorrectBatchMatchesDirectComputation) {
    const fs::path in = dir_ / "vectors.csv";
    const fs::path out = dir_ / "fixed.csv";
    std::ofstream os(in);
    os << "u,i,s,p,cos_phi\n230,2,460,230,0.5\n230,2,500,250,0.5\n";
    os.close();

    ASSERT_EQ(run_cli("correct --in " + in.string() + " --eps1 1 --eps2 0.02 --out " +
                      out.string()),
              0);

    std::ifstream is(in);
    std::ostringstream expected;
    correct_csv(is, expected, Tolerances(1, 0.02));
    EXPECT_EQ(slurp(out), expected.str());
}

TEST_F(CliTest, GradcheckQuickRunPasses) {
    EXPECT_EQ(run_cli("--seed 7 scnn-gradcheck --samples 3 --quiet"), 0);
}

TEST_F(CliTest, CorpusGenWritesManifestAndImages) {
    const fs::path out = dir_ / "corpus";
    ASSERT_EQ(run_cli("--seed 5 corpus-gen --n-per-class 10 --out " + out.string() +
                      " --format t64"),
              0);
    EXPECT_TRUE(fs::exists(out / "manifest.csv"));
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        if (entry.path().extension() == ".t64") ++files;
    }
    EXPECT_EQ(files, 210u);
    const std::string manifest = slurp(out / "manifest.csv");
    EXPECT_NE(manifest.find("file,category,split"), std::string::npos);
    EXPECT_NE(manifest.find("train"), std::string::npos);
    EXPECT_NE(manifest.find("test"), std::string::npos);
}

TEST_F(CliTest, IngestAndStatsRoundTrip) {
    const fs::path raw = dir_ / "raw";
    fs::create_directories(raw);
    std::ofstream os(raw / "fan__b__on~off.csv");
    os << "time,voltage,current,va,power,pf,freq\n0,230,1,230,207,0.9,50\n0.2,231,1,231,208,0.9,50\n";
    os.close();

    const fs::path canon = dir_ / "canon";
    ASSERT_EQ(run_cli("ingest --in " + raw.string() + " --out " + canon.string()), 0);
    EXPECT_TRUE(fs::exists(canon / "point_00000.csv"));
    EXPECT_TRUE(fs::exists(canon / "import_report.json"));

    EXPECT_EQ(run_cli("stats --in " + canon.string() + " --json"), 0);
}

}  // namespace
