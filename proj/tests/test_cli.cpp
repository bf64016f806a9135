#include "eitnet/config.hpp"
#include "eitnet/error.hpp"
#include "eitnet/phantom.hpp"
#include "eitnet/report.hpp"
#include "eitnet/study.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace eitnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("eitnet_test_" + name);
    fs::remove_all(d);
    return d;
}

bool has_message(const std::vector<std::string>& errs, const std::string& needle) {
    for (const auto& e : errs)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.topology.n = 5;
    c.grid.n_radial = 12;
    return c;
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(EITNET_TOOL) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Phantom, Examples) {
    const DiskGrid g(20, 40);
    PhantomSpec empty = PhantomSpec::custom({});
    EXPECT_EQ(define_phantom(empty, g), NodalField::Ones(g.node_count()));
    const NodalField b = define_phantom(PhantomSpec::custom({{0.0, 0.0, 1.0, 0.3}}), g);
    EXPECT_DOUBLE_EQ(b[0], 2.0);
    EXPECT_DOUBLE_EQ(b.maxCoeff(), 2.0);

    const PhantomSpec chest = PhantomSpec::default_chest();
    std::vector<double> values = {chest.background};
    for (const Ellipse& e : chest.ellipses) values.push_back(e.value);
    const NodalField c = define_phantom(chest, DiskGrid(40, 96));
    EXPECT_EQ(c.minCoeff(), *std::min_element(values.begin(), values.end()));
    EXPECT_EQ(c.maxCoeff(), *std::max_element(values.begin(), values.end()));
    for (Eigen::Index k = 0; k < c.size(); ++k)
        EXPECT_NE(std::find(values.begin(), values.end(), c[k]), values.end());

    EXPECT_THROW(define_phantom(PhantomSpec::custom({{0.0, 0.0, -1.5, 0.3}}), g), ConfigError);
}

TEST(Config, RoundTrip) {
    ExperimentConfig c;
    c.phantom = PhantomSpec::default_chest();
    c.topology = {TopologyKind::pyramidal, 16};
    c.geometry.access = BoundaryAccess::one_sided;
    c.geometry.arcs = {{-1.25, 1.5}};
    c.geometry.coverage = 0.6;
    c.grid = {48, 128};
    c.noise = {NoiseModel::multiplicative, 1e-3, 123456789012345ULL};
    c.estimator.parametrization = ParamKind::pw_linear_optimal;
    c.estimator.kind = EstimatorKind::linearized_map;
    c.estimator.alpha = 0.1 / 3.0;
    c.study.kind = StudyKind::lcurve;
    c.study.alphas = {0.3, 1e-5};
    c.study.ns = {5, 9};
    c.study.parametrizations = {ParamKind::network};
    nlohmann::json j = c;
    const ExperimentConfig back = parse_config(j.dump());
    nlohmann::json j2 = back;
    EXPECT_EQ(j, j2);
    EXPECT_EQ(back.noise.seed, 123456789012345ULL);
    EXPECT_EQ(back.estimator.alpha, 0.1 / 3.0);
    EXPECT_EQ(back.geometry.arcs[0].begin, -1.25);
    EXPECT_EQ(back.phantom.ellipses.size(), c.phantom.ellipses.size());
}

TEST(Config, DefaultsAndOverrides) {
    const ExperimentConfig c = parse_config(R"({"phantom": {"kind": "chest", "background": 1.5}})");
    EXPECT_EQ(c.phantom.kind, PhantomKind::chest);
    EXPECT_EQ(c.phantom.background, 1.5);
    EXPECT_EQ(c.phantom.ellipses.size(), PhantomSpec::default_chest().ellipses.size());
    EXPECT_EQ(c.topology.n, 7);
    EXPECT_TRUE(c.validate().empty());
    EXPECT_EQ(c.prior().kind, PriorKind::gaussian_parameters);
    const ExperimentConfig pw = parse_config(R"({"estimator": {"parametrization": "pw-linear-uniform"}})");
    EXPECT_EQ(pw.prior().kind, PriorKind::gaussian_conductivity);
}

TEST(Config, FieldLevelErrors) {
    try {
        (void)parse_config(R"({"noise": {"levl": 0.1}})");
        FAIL() << "unknown key accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("noise.levl"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config(R"({"topology": {"kind": "hexagonal"}})"), ConfigError);
    EXPECT_THROW(parse_config("{ not json"), ConfigError);

    ExperimentConfig c;
    c.topology.n = 8;
    EXPECT_TRUE(has_message(c.validate(), "topology.n")) << c.validate().front();
    c = ExperimentConfig{};
    c.noise.level = -1.0;
    c.geometry.access = BoundaryAccess::one_sided;
    const auto errs = c.validate();
    EXPECT_TRUE(has_message(errs, "noise.level"));
    EXPECT_TRUE(has_message(errs, "geometry.arcs"));
}

TEST(Config, StudyNames) {
    for (const std::string& s : study_names()) EXPECT_EQ(to_string(study_from_string(s)), s);
    EXPECT_EQ(study_names().size(), study_catalog().size());
    EXPECT_THROW(study_from_string("bogus"), ConfigError);
}

TEST(Report, Sha256KnownValues) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const fs::path d = scratch_dir("sha");
    fs::create_directories(d);
    std::ofstream(d / "x.txt", std::ios::binary) << "abc";
    EXPECT_EQ(sha256_file(d / "x.txt"), sha256_hex("abc"));
}

TEST(Report, FormatDoubleRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int t = 0; t < 2000; ++t) {
        const double v = std::pow(10.0, u(rng)) * (t % 2 ? -1 : 1);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(-2.5e-9), "-2.5e-09");
}

TEST(Report, CsvAndRaster) {
    CsvTable t({"a", "b"});
    t.add(std::vector<double>{1.0, 0.25});
    t.add(std::vector<std::string>{"x", "y"});
    EXPECT_EQ(t.text(), "a,b\n1,0.25\nx,y\n");
    EXPECT_THROW(t.add(std::vector<double>{1.0}), std::logic_error);

    const DiskGrid g(10, 24);
    NodalField f(g.node_count());
    for (int k = 0; k < g.node_count(); ++k) f[k] = g.x(k);
    const std::string img = pgm_raster(f, g, -1.0, 1.0, 33);
    const std::string head = "P5\n33 33\n255\n";
    ASSERT_EQ(img.size(), head.size() + 33 * 33);
    EXPECT_EQ(img.substr(0, head.size()), head);
    const auto px = [&](int row, int col) { return static_cast<unsigned char>(img[head.size() + 33 * row + col]); };
    EXPECT_EQ(px(0, 0), 0);
    EXPECT_GT(px(16, 31), px(16, 1));
    EXPECT_GE(px(16, 16), 1);

    const CsvTable n = nodal_table(g, {"f"}, {&f});
    EXPECT_EQ(n.rows(), g.node_count());
}

TEST(Run, SingleStudyDeterministic) {
    const ExperimentConfig c = small_config();
    const fs::path a = scratch_dir("run_a"), b = scratch_dir("run_b");
    const RunOutcome ra = run_study(c, {a, std::nullopt, 1});
    const RunOutcome rb = run_study(c, {b, std::nullopt, 1});
    EXPECT_EQ(ra.failures, 0);
    ASSERT_TRUE(fs::exists(a / "manifest.json"));
    for (const auto& art : ra.manifest["artifacts"]) {
        const std::string f = art["file"];
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
        EXPECT_EQ(sha256_file(a / f), art["sha256"].get<std::string>()) << f;
    }
    for (const char* f : {"sigma.csv", "conductances.csv", "residuals.csv", "reconstruction.pgm"})
        EXPECT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / "conductances.csv").substr(0, 19), "k,a,b,x,y,gamma1,q\n");
}

TEST(Run, ManifestRerunReproduces) {
    ExperimentConfig c = small_config();
    c.study.kind = StudyKind::monte_carlo;
    c.study.m = 4;
    c.noise.level = 1e-3;
    c.noise.model = NoiseModel::multiplicative;
    c.estimator.kind = EstimatorKind::layer_peeling;
    const fs::path a = scratch_dir("mc_a"), b = scratch_dir("mc_b"), s = scratch_dir("mc_seed");
    const RunOutcome ra = run_study(c, {a, 42, 2});
    const ExperimentConfig again = load_config((a / "manifest.json").string());
    EXPECT_EQ(again.noise.seed, 42u);
    const RunOutcome rb = run_study(again, {b, std::nullopt, 1});
    ASSERT_EQ(ra.manifest["artifacts"].size(), rb.manifest["artifacts"].size());
    for (size_t i = 0; i < ra.manifest["artifacts"].size(); ++i)
        EXPECT_EQ(ra.manifest["artifacts"][i]["sha256"], rb.manifest["artifacts"][i]["sha256"]);
    (void)run_study(c, {s, 43, 1});
    EXPECT_NE(slurp(a / "parameters.csv"), slurp(s / "parameters.csv"));
}

TEST(Run, InvalidConfigRejected) {
    ExperimentConfig c = small_config();
    c.topology.n = 6;
    EXPECT_THROW(run_study(c, {scratch_dir("bad"), std::nullopt, 1}), ConfigError);
}

TEST(Tool, ExitCodes) {
    const fs::path d = scratch_dir("tool");
    fs::create_directories(d);
    std::ofstream(d / "even.json") << R"({"topology": {"n": 8}})";
    std::ofstream(d / "ok.json") << R"({"topology": {"n": 5}, "grid": {"n_radial": 10}})";
    std::ofstream(d / "typo.json") << R"({"topology": {"size": 5}})";
    EXPECT_EQ(run_tool("validate -c " + (d / "even.json").string()), 2);
    EXPECT_EQ(run_tool("validate -c " + (d / "typo.json").string()), 2);
    EXPECT_EQ(run_tool("validate -c " + (d / "ok.json").string()), 0);
    EXPECT_EQ(run_tool("run -c " + (d / "even.json").string() + " -o " + (d / "out").string()), 2);
    EXPECT_EQ(run_tool("run -c " + (d / "ok.json").string() + " -o " + (d / "out").string()), 0);
    EXPECT_TRUE(fs::exists(d / "out" / "manifest.json"));
    EXPECT_EQ(run_tool("list-studies"), 0);
    EXPECT_NE(run_tool("frobnicate"), 0);
}
