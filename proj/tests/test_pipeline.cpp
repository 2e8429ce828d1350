#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "moodpulse/pipeline.hpp"
#include "moodpulse/synthetic.hpp"

using namespace moodpulse;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

std::vector<std::string> listing(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::recursive_directory_iterator(dir)) names.push_back(fs::relative(e.path(), dir).string());
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace

TEST_CASE("config loading") {
    fixtures::TempDir tmp("cfg");
    write(tmp.path() / "a.ini", "[paths]\ncorpus = data/c.jsonl\nlexicon = lex.tsv\noutput = /abs/out\n"
                                "[detector]\nhazard = 0.02\nmu0 = auto\n"
                                "[topics]\nn_topics = 20\n[run]\nseed = 9\nthreads = 3\n");
    auto c = load_config(tmp.path() / "a.ini");
    CHECK(c.paths.corpus == (tmp.path() / "data/c.jsonl").lexically_normal());
    CHECK(c.paths.output == fs::path("/abs/out"));
    CHECK(c.detector.hazard == 0.02);
    CHECK_FALSE(c.detector.bocpd_prior.mu0.has_value());
    CHECK(c.topics.n_topics == 20);
    CHECK(c.seed == 9);
    CHECK(c.threads == 3);

    write(tmp.path() / "b.ini", "[detector]\nhazzard = 0.02\n");
    CHECK_THROWS_AS(load_config(tmp.path() / "b.ini"), ConfigError);
    write(tmp.path() / "c.ini", "[detector]\nhazard = lots\n");
    CHECK_THROWS_AS(load_config(tmp.path() / "c.ini"), ConfigError);
    write(tmp.path() / "d.ini", "[detector]\nhazard = 2\n");
    CHECK_THROWS_AS(load_config(tmp.path() / "d.ini"), ConfigError);
    CHECK_THROWS_AS(load_config(tmp.path() / "missing.ini"), ConfigError);
}

TEST_CASE("config hash tracks result-affecting fields only") {
    PipelineConfig base;
    const auto h = base.hash();
    CHECK(base.hash() == h);

    auto threads = base;
    threads.threads = 8;
    CHECK(threads.hash() == h);

    auto seed = base;
    seed.seed = 1;
    CHECK(seed.hash() != h);
    auto hazard = base;
    hazard.detector.hazard = 0.02;
    CHECK(hazard.hash() != h);
    auto ttest = base;
    ttest.ttest = TTestKind::pooled;
    CHECK(ttest.hash() != h);
    auto topics = base;
    topics.topics.n_topics = 11;
    CHECK(topics.hash() != h);
    auto dedupe = base;
    dedupe.dedupe_exact = true;
    CHECK(dedupe.hash() != h);
    auto output = base;
    output.paths.output = "elsewhere";
    CHECK(output.hash() == h);
    CHECK(base.canonical().find("threads") == std::string::npos);
}

TEST_CASE("stage exit codes") {
    CHECK(exit_code(Stage::ingest) == 3);
    CHECK(exit_code(Stage::label) == 4);
    CHECK(exit_code(Stage::explain) == 8);
    CHECK(exit_code(Stage::evaluate) == 9);
    CHECK(exit_code(Stage::report) == 9);
}

TEST_CASE("missing corpus fails at ingest without outputs") {
    fixtures::TempDir tmp("nocorpus");
    PipelineConfig c;
    c.paths.corpus = tmp.path() / "absent.jsonl";
    c.paths.output = tmp.path() / "out";
    try {
        run_pipeline(c);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == Stage::ingest);
        CHECK(exit_code(e.stage()) == 3);
    }
    CHECK(listing(tmp.path() / "out").empty());
}

TEST_CASE("a failing later stage quarantines partial outputs") {
    fixtures::TempDir tmp("quarantine");
    write_synthetic_fixture(tmp.path(), SyntheticOptions{300, 20, 10, 3, 0.25});
    auto c = load_config(tmp.path() / "config.ini");
    c.paths.lexicon = tmp.path() / "no_such_lexicon.tsv";
    try {
        run_pipeline(c);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == Stage::label);
    }
    CHECK(fs::exists(c.paths.output / "quarantine" / "posts.jsonl"));
    CHECK_FALSE(fs::exists(c.paths.output / "changepoints.json"));
    CHECK_FALSE(fs::exists(c.paths.output / ".staging"));
}

TEST_CASE("end-to-end fixture run and rerun") {
    fixtures::TempDir tmp("e2e");
    write_synthetic_fixture(tmp.path(), SyntheticOptions{});
    auto c = load_config(tmp.path() / "config.ini");
    run_pipeline(c);
    const auto out = c.paths.output;
    for (const char* f : {"posts.jsonl", "labels.csv", "timeseries.csv", "changepoints.json", "reactions.json",
                          "topics.json", "eval.json", "report.md", "manifest.json", "plots/changepoints.csv"})
        CHECK_MESSAGE(fs::exists(out / f), f);

    auto manifest = nlohmann::json::parse(fixtures::read_file(out / "manifest.json"));
    CHECK(manifest.at("seed").get<std::uint64_t>() == c.seed);
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);

    const auto first = fixtures::read_file(out / "changepoints.json");
    run_pipeline(c);
    CHECK(fixtures::read_file(out / "changepoints.json") == first);
    CHECK_FALSE(fs::exists(out / ".staging"));
}

TEST_CASE("stages can run one at a time") {
    fixtures::TempDir tmp("stages");
    write_synthetic_fixture(tmp.path(), SyntheticOptions{600, 30, 15, 5, 0.25});
    auto c = load_config(tmp.path() / "config.ini");
    const auto dir = tmp.path() / "work";
    fs::create_directories(dir);
    stage_ingest(c, dir);
    stage_label(c, dir);
    stage_series(c, dir);
    stage_detect(c, dir);
    CHECK(fs::exists(dir / "changepoints.json"));
    fs::remove(dir / "timeseries.csv");
    try {
        stage_measure(c, dir);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == Stage::measure);
    }
}

TEST_CASE("plot data export") {
    fixtures::TempDir tmp("plots");
    SeriesSet set;
    for (auto cat : all_categories()) set.push_back(fixtures::make_series({0.1, 0.2, 0.3}, cat));
    set[0].missing[1] = true;
    export_plot_data(set, {}, tmp.path());
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path() / "plots")) ++files;
    CHECK(files == 22);
    CHECK(fixtures::read_file(tmp.path() / "plots" / "changepoints.csv") ==
          "date,category,method,confidence,direction\n");
    CHECK(fixtures::read_file(tmp.path() / "plots" / "anticipation.csv") ==
          "date,fraction\n2024-01-01,0.1\n2024-01-02,\n2024-01-03,0.3\n");

    std::vector<ChangePoint> cps{
        {AffectCategory::anger, fixtures::day0(), DetectionMethod::bocpd, 0.8123456789, Direction::decrease}};
    export_plot_data(set, cps, tmp.path());
    CHECK(fixtures::read_file(tmp.path() / "plots" / "changepoints.csv") ==
          "date,category,method,confidence,direction\n2024-01-01,anger,BOCPD,0.812346,decrease\n");
}
