#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "moodpulse/pipeline.hpp"
#include "moodpulse/synthetic.hpp"

namespace fs = std::filesystem;
using namespace moodpulse;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool dedupe_exact = false;
    std::optional<std::string> ttest;
    std::optional<std::size_t> n_topics;
    std::optional<std::size_t> threads;
    bool sweep = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "Pipeline config (INI)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override run.seed");
    cmd->add_option("--out", o.out, "Override paths.output");
    cmd->add_flag("--dedupe-exact", o.dedupe_exact, "Drop exact duplicate posts per day");
    cmd->add_option("--ttest", o.ttest, "Long-term test")->check(CLI::IsMember({"welch", "pooled"}));
    cmd->add_option("--n-topics", o.n_topics, "Topics per window")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

PipelineConfig resolve(const Overrides& o) {
    auto c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.paths.output = *o.out;
    if (o.dedupe_exact) c.dedupe_exact = true;
    if (o.ttest) c.ttest = *o.ttest == "pooled" ? TTestKind::pooled : TTestKind::welch;
    if (o.n_topics) c.topics.n_topics = *o.n_topics;
    if (o.threads) c.threads = *o.threads;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moodpulse: detect, measure and explain collective affect reactions"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);

    Overrides o;
    struct Sub {
        const char* name;
        const char* help;
        void (*fn)(const PipelineConfig&, const fs::path&);
    };
    const Sub subs[] = {
        {"ingest", "Parse and preprocess the corpus into posts.jsonl", stage_ingest},
        {"label", "Label posts into labels.csv", stage_label},
        {"series", "Build daily fractions into timeseries.csv", stage_series},
        {"detect", "Detect change points into changepoints.json", stage_detect},
        {"measure", "Short- and long-term changes into reactions.json", stage_measure},
        {"explain", "Emerging topics into topics.json", stage_explain},
        {"evaluate", "Precision, DERate and confidence into eval.json", stage_evaluate},
        {"report", "Plot data and report.md", stage_report},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> stage_cmds;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, o);
        stage_cmds.emplace_back(cmd, &s);
    }
    auto* explain_cmd = stage_cmds[5].first;
    explain_cmd->add_flag("--sweep", o.sweep, "Also sweep K = 10..50 on a 10% sample into topic_sweep.json");

    auto* run = app.add_subcommand("run", "Run every stage with staging and quarantine");
    add_common(run, o);
    run->add_flag("--sweep", o.sweep, "Also sweep K = 10..50 on a 10% sample into topic_sweep.json");

    SyntheticOptions synth;
    std::string synth_dir;
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic quake fixture");
    synth_cmd->add_option("dir", synth_dir, "Target directory")->required();
    synth_cmd->add_option("--posts", synth.n_posts, "Number of posts");
    synth_cmd->add_option("--days", synth.n_days, "Number of days");
    synth_cmd->add_option("--event-day", synth.event_day, "Day of the injected event (0-based)");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (synth_cmd->parsed()) {
            write_synthetic_fixture(synth_dir, synth);
            std::cout << "wrote fixture to " << synth_dir << '\n';
            return 0;
        }
        PipelineConfig config;
        try {
            config = resolve(o);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfigError;
        }
        if (run->parsed()) {
            run_pipeline(config);
            if (o.sweep) sweep_topics(config, config.paths.output);
            std::cout << "outputs in " << config.paths.output.string() << '\n';
            return 0;
        }
        for (const auto& [cmd, sub] : stage_cmds) {
            if (!cmd->parsed()) continue;
            fs::create_directories(config.paths.output);
            sub->fn(config, config.paths.output);
            if (o.sweep && cmd == explain_cmd) sweep_topics(config, config.paths.output);
            return 0;
        }
    } catch (const StageError& e) {
        std::cerr << "stage error: " << e.what() << '\n';
        return exit_code(e.stage());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
