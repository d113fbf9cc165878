#include "lipfd/cli.hpp"
#include "lipfd/config.hpp"
#include "lipfd/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;  // key=value overrides
    bool seed_given = false;
    uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Config file (key=value per line)");
    cmd->add_option("--set", args.sets, "Override a config key, e.g. --set epochs=5")
        ->take_all();
    cmd->add_option_function<uint64_t>(
        "--seed",
        [&args](const uint64_t& v) {
            args.seed = v;
            args.seed_given = true;
        },
        "Random seed (overrides config)");
}

lipfd::RunConfig resolve_config(const CommonArgs& args) {
    lipfd::RunConfig cfg;
    if (!args.config_path.empty()) cfg = lipfd::parse_config_file(args.config_path);
    for (const auto& kv : args.sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw lipfd::ConfigError("--set needs key=value, got " + kv);
        lipfd::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed_given) cfg.seed = args.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lipfd: lip-sync forgery detection pipeline"};
    app.require_subcommand(1);

    // synth
    CommonArgs synth_args;
    int synth_n = 400;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark dataset");
    add_common(synth, synth_args);
    synth->add_option("--n", synth_n, "Number of clips (even, balanced real/fake)");
    synth->add_option("--out", synth_out, "Output dataset directory")->required();

    // preprocess
    CommonArgs pre_args;
    std::string pre_manifest, pre_out;
    auto* pre = app.add_subcommand("preprocess", "Build the composite window cache");
    add_common(pre, pre_args);
    pre->add_option("--manifest", pre_manifest, "Input manifest")->required();
    pre->add_option("--out", pre_out, "Cache output directory (default: cache root)");

    // train
    CommonArgs train_args;
    std::string train_cache, train_out, train_resume;
    auto* train = app.add_subcommand("train", "Train the detector on a cache");
    add_common(train, train_args);
    train->add_option("--cache", train_cache, "Cache root or split directory");
    train->add_option("--out", train_out, "Run output directory")->required();
    train->add_option("--resume", train_resume, "Checkpoint to resume from");

    // eval
    CommonArgs eval_args;
    std::string eval_ckpt, eval_cache, eval_out;
    double eval_threshold = -1.0;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a cache split");
    add_common(eval, eval_args);
    eval->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required();
    eval->add_option("--cache", eval_cache, "Cache split directory");
    eval->add_option("--out", eval_out, "Report output directory")->required();
    eval->add_option("--threshold", eval_threshold, "Decision threshold (overrides config)");

    // sweep
    CommonArgs sweep_args;
    std::string sweep_ckpt, sweep_cache, sweep_out, sweep_kinds = "all", sweep_sev = "1,2,3,4,5";
    auto* sweep = app.add_subcommand("sweep", "Robustness sweep over perturbations");
    add_common(sweep, sweep_args);
    sweep->add_option("--checkpoint", sweep_ckpt, "Model checkpoint")->required();
    sweep->add_option("--cache", sweep_cache, "Cache split directory");
    sweep->add_option("--out", sweep_out, "Report output directory")->required();
    sweep->add_option("--kinds", sweep_kinds, "Comma list of kinds or 'all'");
    sweep->add_option("--severities", sweep_sev, "Comma list of severities");

    // perturb
    CommonArgs pert_args;
    std::string pert_in, pert_out, pert_kind;
    int pert_sev = 3;
    auto* pert = app.add_subcommand("perturb", "Write a corrupted mirror of a cache dir");
    add_common(pert, pert_args);
    pert->add_option("--in", pert_in, "Input cache split directory")->required();
    pert->add_option("--out", pert_out, "Output directory")->required();
    pert->add_option("--kind", pert_kind, "Perturbation kind")->required();
    pert->add_option("--severity", pert_sev, "Severity 1..5");

    // viz
    CommonArgs viz_args;
    std::string viz_ckpt, viz_cache, viz_sample, viz_out;
    auto* viz = app.add_subcommand("viz", "Dump crops, attention maps and region weights");
    add_common(viz, viz_args);
    viz->add_option("--checkpoint", viz_ckpt, "Model checkpoint")->required();
    viz->add_option("--cache", viz_cache, "Cache split directory");
    viz->add_option("--sample", viz_sample, "Cache entry name, e.g. real_0001_12.png")->required();
    viz->add_option("--out", viz_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    return lipfd::cli::run_guarded([&]() -> int {
        if (synth->parsed()) {
            auto cfg = resolve_config(synth_args);
            return lipfd::cli::cmd_synth(cfg, synth_n, synth_out);
        }
        if (pre->parsed()) {
            auto cfg = resolve_config(pre_args);
            std::filesystem::path out =
                pre_out.empty() ? lipfd::resolve_cache_root(cfg) : std::filesystem::path(pre_out);
            return lipfd::cli::cmd_preprocess(cfg, pre_manifest, out);
        }
        if (train->parsed()) {
            auto cfg = resolve_config(train_args);
            std::filesystem::path cache = train_cache.empty() ? lipfd::resolve_cache_root(cfg)
                                                              : std::filesystem::path(train_cache);
            return lipfd::cli::cmd_train(cfg, cache, train_out, train_resume);
        }
        if (eval->parsed()) {
            auto cfg = resolve_config(eval_args);
            if (eval_threshold >= 0.0) cfg.threshold = eval_threshold;
            std::filesystem::path cache = eval_cache.empty()
                                              ? lipfd::resolve_cache_root(cfg) / "test"
                                              : std::filesystem::path(eval_cache);
            return lipfd::cli::cmd_eval(cfg, eval_ckpt, cache, eval_out);
        }
        if (sweep->parsed()) {
            auto cfg = resolve_config(sweep_args);
            std::filesystem::path cache = sweep_cache.empty()
                                              ? lipfd::resolve_cache_root(cfg) / "test"
                                              : std::filesystem::path(sweep_cache);
            return lipfd::cli::cmd_sweep(cfg, sweep_ckpt, cache, sweep_out, sweep_kinds, sweep_sev);
        }
        if (pert->parsed()) {
            auto cfg = resolve_config(pert_args);
            return lipfd::cli::cmd_perturb(cfg, pert_in, pert_out, pert_kind, pert_sev);
        }
        if (viz->parsed()) {
            auto cfg = resolve_config(viz_args);
            std::filesystem::path cache = viz_cache.empty()
                                              ? lipfd::resolve_cache_root(cfg) / "test"
                                              : std::filesystem::path(viz_cache);
            return lipfd::cli::cmd_viz(cfg, viz_ckpt, cache, viz_sample, viz_out);
        }
        std::cerr << "no subcommand\n";
        return 2;
    });
}
