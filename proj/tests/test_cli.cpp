#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "cli.hpp"
#include "ovo/eval.hpp"
#include "ovo/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ovo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return ovo::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ovo_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_dataset_csv(const std::string& path, const ovo::LabeledDataset& ds) {
    std::ofstream out(path);
    out << "f0,f1,label\n";
    out.precision(17);
    for (std::size_t n = 0; n < ds.size(); ++n) {
        out << ds.features[n][0] << "," << ds.features[n][1] << ","
            << ds.class_set.label(ds.single_label(n)) << "\n";
    }
}

} // namespace

TEST_CASE("full train/calibrate/predict/evaluate pipeline") {
    TempDir dir;
    auto ds = ovo::gen_synthetic(3, 60, 2, 5.0, 17);
    write_dataset_csv(dir.file("data.csv"), ds);

    CHECK(run_cli({"train", "--mode", "pairwise", "--input", dir.file("data.csv"), "--out",
                   dir.file("suite.json"), "--epochs", "150"}) == 0);
    CHECK(run_cli({"calibrate", "--suite", dir.file("suite.json"), "--input",
                   dir.file("data.csv"), "--out", dir.file("calib.json")}) == 0);
    CHECK(run_cli({"predict", "--suite", dir.file("suite.json"), "--calib",
                   dir.file("calib.json"), "--input", dir.file("data.csv"), "--out",
                   dir.file("pred.json")}) == 0);
    CHECK(run_cli({"evaluate", "--pred", dir.file("pred.json"), "--truth", dir.file("data.csv"),
                   "--out", dir.file("report.json")}) == 0);

    auto preds = ovo::io::load_predictions(dir.file("pred.json"));
    REQUIRE(preds.size() == ds.size());
    CHECK(preds.front().p.size() == 3);
    CHECK(preds.front().votes.size() == 3);

    // Training-set accuracy on separable data should be near perfect.
    std::size_t correct = 0;
    for (std::size_t n = 0; n < preds.size(); ++n) {
        correct += preds[n].label == ds.single_label(n);
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(preds.size()) >= 0.95);
}

TEST_CASE("saved suite round-trips to bitwise-identical predictions") {
    TempDir dir;
    auto ds = ovo::gen_synthetic(3, 40, 2, 4.0, 31);
    write_dataset_csv(dir.file("data.csv"), ds);
    REQUIRE(run_cli({"train", "--input", dir.file("data.csv"), "--out", dir.file("suite.json"),
                     "--epochs", "100"}) == 0);
    REQUIRE(run_cli({"calibrate", "--suite", dir.file("suite.json"), "--input",
                     dir.file("data.csv"), "--out", dir.file("calib.json")}) == 0);
    REQUIRE(run_cli({"predict", "--suite", dir.file("suite.json"), "--calib",
                     dir.file("calib.json"), "--input", dir.file("data.csv"), "--out",
                     dir.file("p1.json")}) == 0);
    // Re-save the loaded suite and predict again.
    auto suite = ovo::io::load_suite(dir.file("suite.json"));
    ovo::io::save_suite(dir.file("suite2.json"), suite);
    REQUIRE(run_cli({"predict", "--suite", dir.file("suite2.json"), "--calib",
                     dir.file("calib.json"), "--input", dir.file("data.csv"), "--out",
                     dir.file("p2.json")}) == 0);
    CHECK(read_file(dir.file("p1.json")) == read_file(dir.file("p2.json")));
}

TEST_CASE("ova training and refinement modes") {
    TempDir dir;
    auto ds = ovo::gen_synthetic(3, 50, 2, 5.0, 19);
    write_dataset_csv(dir.file("data.csv"), ds);
    CHECK(run_cli({"train", "--mode", "ova", "--input", dir.file("data.csv"), "--out",
                   dir.file("model.json"), "--epochs", "120"}) == 0);
    CHECK(run_cli({"train", "--mode", "refine", "--input", dir.file("data.csv"), "--base",
                   dir.file("model.json"), "--out", dir.file("refined.json"), "--epochs",
                   "30"}) == 0);
    auto suite = ovo::io::load_suite(dir.file("refined.json"));
    CHECK(suite.provenance == ovo::SuiteProvenance::ova_refined);
    CHECK(suite.pair_scorers.size() == 3);
    // Refine without --base is a validation error.
    CHECK(run_cli({"train", "--mode", "refine", "--input", dir.file("data.csv"), "--out",
                   dir.file("x.json")}) == 1);
}

TEST_CASE("couple consumes an external score file") {
    TempDir dir;
    {
        std::ofstream out(dir.file("scores.json"));
        out << R"({
            "classes": ["a", "b", "c"],
            "samples": [
                {"id": "s0", "scores": {"0,1": 0.625, "0,2": 0.7142857142857143, "1,2": 0.6}}
            ]
        })";
    }
    CHECK(run_cli({"couple", "--scores", dir.file("scores.json"), "--out",
                   dir.file("probs.json")}) == 0);
    auto preds = ovo::io::load_predictions(dir.file("probs.json"));
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].p[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(preds[0].p[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(preds[0].label == 0);
}

TEST_CASE("benchmark subcommand writes a report") {
    TempDir dir;
    CHECK(run_cli({"benchmark", "--classes", "3", "--per-class", "40", "--dim", "2",
                   "--separation", "5", "--num-seeds", "2", "--epochs", "80", "--out",
                   dir.file("bench.json")}) == 0);
    const auto body = read_file(dir.file("bench.json"));
    CHECK(body.find("proposed") != std::string::npos);
    CHECK(body.find("voting") != std::string::npos);
    CHECK(body.find("ova") != std::string::npos);
}

TEST_CASE("CLI error paths map to the documented exit codes") {
    TempDir dir;
    // Missing required --input.
    CHECK(run_cli({"predict", "--suite", "s.json", "--calib", "c.json", "--out", "o.json"}) == 1);
    // Nonexistent input file.
    CHECK(run_cli({"train", "--input", dir.file("missing.csv"), "--out", dir.file("s.json")}) ==
          1);
    // Score file violating the complement convention.
    {
        std::ofstream out(dir.file("bad_scores.json"));
        out << R"({"classes": ["a","b"], "samples": [{"id":"s0","scores":{"0,1":0.9,"1,0":0.6}}]})";
    }
    CHECK(run_cli({"couple", "--scores", dir.file("bad_scores.json"), "--out",
                   dir.file("o.json")}) == 1);
    CHECK_FALSE(fs::exists(dir.file("o.json")));
}

TEST_CASE("multi-label evaluation with thresholding") {
    TempDir dir;
    auto ds = ovo::gen_synthetic(3, 40, 2, 5.0, 23);
    write_dataset_csv(dir.file("data.csv"), ds);
    REQUIRE(run_cli({"train", "--input", dir.file("data.csv"), "--out", dir.file("suite.json"),
                     "--epochs", "100"}) == 0);
    REQUIRE(run_cli({"calibrate", "--suite", dir.file("suite.json"), "--input",
                     dir.file("data.csv"), "--out", dir.file("calib.json")}) == 0);
    REQUIRE(run_cli({"predict", "--suite", dir.file("suite.json"), "--calib",
                     dir.file("calib.json"), "--input", dir.file("data.csv"), "--out",
                     dir.file("pred.json")}) == 0);
    CHECK(run_cli({"evaluate", "--pred", dir.file("pred.json"), "--truth", dir.file("data.csv"),
                   "--out", dir.file("ml_report.json"), "--multi-label", "--threshold",
                   "0.4"}) == 0);
    const auto body = read_file(dir.file("ml_report.json"));
    CHECK(body.find("per_class") != std::string::npos);
}

TEST_CASE("atomic_write leaves no partial output") {
    TempDir dir;
    const auto target = dir.file("out.txt");
    ovo::io::atomic_write(target, "hello");
    CHECK(read_file(target) == "hello");
    ovo::io::atomic_write(target, "world");
    CHECK(read_file(target) == "world");
    // No stray temp files remain.
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
}
