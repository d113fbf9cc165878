#include <doctest.h>

#include "helpers.hpp"
#include "lipfd/cli.hpp"
#include "lipfd/config.hpp"
#include "lipfd/dataset.hpp"
#include "lipfd/errors.hpp"
#include "lipfd/evalkit.hpp"
#include "lipfd/model.hpp"

#include <fstream>

using namespace lipfd;

namespace {

/// Small config for fast end-to-end runs: tiny backbone, 112px composites,
/// 8 clips at 10 fps.
RunConfig micro_config() {
    RunConfig cfg;
    cfg.window_size = 5;
    cfg.frame_side = 112;
    cfg.band_height = 112;
    cfg.backbone = "tiny";
    cfg.d_r = 16;
    cfg.region_c1 = 8;
    cfg.region_c2 = 16;
    cfg.region_input_side = 32;
    cfg.classifier_hidden = 32;
    cfg.batch_size = 8;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-3;
    cfg.workers = 1;
    cfg.expand_factor = 2;
    cfg.synth_fps = 10.0;
    cfg.synth_clip_seconds = 1.2;
    cfg.seed = 7;
    return cfg;
}

std::string file_text(const std::filesystem::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config: defaults materialize, unknown keys rejected, overrides win") {
    RunConfig cfg;
    std::string all = serialize_config(cfg);
    // Every key documented in the serialized copy.
    for (const char* key :
         {"window_size", "crop_ratios", "backbone", "d_r", "k", "lambda_ra", "learning_rate",
          "batch_size", "seed", "mel_bins", "expand_factor", "cache_root", "threshold"}) {
        CHECK(all.find(std::string(key) + "=") != std::string::npos);
    }

    auto dir = testutil::tmp_dir("config");
    {
        std::ofstream f(dir / "good.cfg");
        f << "# comment\n\nbackbone=tiny\nepochs = 3\ncrop_ratios=1.0,0.6,0.4\n";
    }
    RunConfig parsed = parse_config_file(dir / "good.cfg");
    CHECK(parsed.backbone == "tiny");
    CHECK(parsed.epochs == 3);
    CHECK(parsed.crop_ratios[1] == 0.6);
    // Untouched keys keep their defaults.
    CHECK(parsed.batch_size == 32);

    {
        std::ofstream f(dir / "bad.cfg");
        f << "nonexistent_key=5\n";
    }
    CHECK_THROWS_AS(parse_config_file(dir / "bad.cfg"), ConfigError);

    // Flag-style override wins over the file value.
    apply_config_line(parsed, "epochs", "9");
    CHECK(parsed.epochs == 9);
    CHECK_THROWS_AS(apply_config_line(parsed, "bogus", "1"), ConfigError);

    {
        std::ofstream f(dir / "invalid.cfg");
        f << "crop_ratios=0.4,0.6,1.0\n";  // ascending: rejected
    }
    CHECK_THROWS_AS(parse_config_file(dir / "invalid.cfg"), ConfigError);
}

TEST_CASE("exit code mapping") {
    CHECK(cli::run_guarded([] { return 0; }) == 0);
    CHECK(cli::run_guarded([]() -> int { throw ValidationError("bad input"); }) == 2);
    CHECK(cli::run_guarded([]() -> int { throw ArgumentError("bad arg"); }) == 2);
    CHECK(cli::run_guarded([]() -> int { throw NumericError("nan"); }) == 3);
    CHECK(cli::run_guarded([]() -> int { throw std::runtime_error("io"); }) == 3);
}

TEST_CASE("preprocess: empty manifest produces an empty cache and succeeds") {
    auto dir = testutil::tmp_dir("cli_empty");
    std::ofstream(dir / "m.tsv").close();
    RunConfig cfg = micro_config();
    CHECK(cli::cmd_preprocess(cfg, dir / "m.tsv", dir / "cache") == 0);
    CHECK(std::filesystem::exists(dir / "cache" / "resolved_config.txt"));
    CHECK_FALSE(std::filesystem::exists(dir / "cache" / "train"));
}

TEST_CASE("synth + preprocess: counts, determinism, index contents") {
    auto dir = testutil::tmp_dir("cli_pipe");
    RunConfig cfg = micro_config();
    REQUIRE(cli::cmd_synth(cfg, 8, dir / "data") == 0);

    REQUIRE(cli::cmd_preprocess(cfg, dir / "data" / "manifest.tsv", dir / "cache_a") == 0);
    REQUIRE(cli::cmd_preprocess(cfg, dir / "data" / "manifest.tsv", dir / "cache_b") == 0);

    // 8 clips (6 train / 2 test at this size), factor 2 windows each.
    auto train = avdata::CacheDataset::open(dir / "cache_a" / "train");
    CHECK(train.size() == 12);
    auto test = avdata::CacheDataset::open(dir / "cache_a" / "test");
    CHECK(test.size() == 4);
    CHECK(train.count_label(0) + train.count_label(1) == 12);

    // Same seed, same bytes: index and every composite.
    CHECK(file_text(dir / "cache_a" / "train" / "index.tsv") ==
          file_text(dir / "cache_b" / "train" / "index.tsv"));
    for (size_t i = 0; i < train.size(); ++i) {
        auto name = train.entry(i).name;
        CHECK(testutil::read_file_bytes(dir / "cache_a" / "train" / name) ==
              testutil::read_file_bytes(dir / "cache_b" / "train" / name));
    }

    // Loadable samples with the right shape.
    auto ws = train.load(0, avdata::WindowLayout::from(cfg));
    CHECK(ws.t == 5);
    CHECK(ws.composite.height == 224);
    CHECK(ws.composite.width == 560);
}

TEST_CASE("train, resume, eval, sweep, perturb, viz round trip") {
    auto dir = testutil::tmp_dir("cli_train");
    RunConfig cfg = micro_config();
    REQUIRE(cli::cmd_synth(cfg, 8, dir / "data") == 0);
    REQUIRE(cli::cmd_preprocess(cfg, dir / "data" / "manifest.tsv", dir / "cache") == 0);

    REQUIRE(cli::cmd_train(cfg, dir / "cache", dir / "run") == 0);
    std::filesystem::path ckpt = dir / "run" / "model.ckpt";
    REQUIRE(std::filesystem::exists(ckpt));
    CHECK(std::filesystem::exists(dir / "run" / "train_log.txt"));
    CHECK(std::filesystem::exists(dir / "run" / "resolved_config.txt"));

    // Resume continues the step counter.
    Adam probe_opt;
    model::LoadedCheckpoint info;
    model::load_checkpoint(ckpt, &probe_opt, &info);
    CHECK(info.epoch == 1);
    int64_t steps_after_first = probe_opt.step_count();
    CHECK(steps_after_first > 0);

    RunConfig cfg2 = cfg;
    cfg2.epochs = 2;
    REQUIRE(cli::cmd_train(cfg2, dir / "cache", dir / "run2", ckpt.string()) == 0);
    Adam opt2;
    model::LoadedCheckpoint info2;
    model::load_checkpoint(dir / "run2" / "model.ckpt", &opt2, &info2);
    CHECK(info2.epoch == 2);
    CHECK(opt2.step_count() > steps_after_first);

    // Zero learning rate: parameters end identical to the fresh model.
    RunConfig cfg_zero = cfg;
    cfg_zero.learning_rate = 0.0;
    REQUIRE(cli::cmd_train(cfg_zero, dir / "cache", dir / "run_zero") == 0);
    model::LipFdModel trained = model::load_checkpoint(dir / "run_zero" / "model.ckpt");
    model::LipFdModel fresh(model::ModelConfig::from(cfg_zero));
    for (const auto& name : fresh.params().names()) {
        CHECK(trained.params().get(name).data == fresh.params().get(name).data);
    }

    // Eval writes reports; threshold moves ACC but not AP/AUC.
    REQUIRE(cli::cmd_eval(cfg, ckpt, dir / "cache" / "test", dir / "eval_a") == 0);
    RunConfig cfg_thresh = cfg;
    cfg_thresh.threshold = 0.9;
    REQUIRE(cli::cmd_eval(cfg_thresh, ckpt, dir / "cache" / "test", dir / "eval_b") == 0);
    auto rec_a = evalkit::read_records(dir / "eval_a" / "metrics_records.tsv");
    auto rec_b = evalkit::read_records(dir / "eval_b" / "metrics_records.tsv");
    auto find = [](const std::vector<evalkit::Record>& rs, const std::string& m) {
        for (const auto& r : rs) {
            if (r.metric == m) return r.value;
        }
        return -1.0;
    };
    CHECK(find(rec_a, "auc") == find(rec_b, "auc"));
    CHECK(find(rec_a, "ap") == find(rec_b, "ap"));
    CHECK(find(rec_a, "threshold") != find(rec_b, "threshold"));

    // Single-class directory: flagged, not fabricated.
    {
        std::filesystem::create_directories(dir / "single");
        auto test_ds = avdata::CacheDataset::open(dir / "cache" / "test");
        std::vector<avdata::CacheEntry> singles;
        for (size_t i = 0; i < test_ds.size(); ++i) {
            if (test_ds.entry(i).label == 1) {
                std::filesystem::copy_file(dir / "cache" / "test" / test_ds.entry(i).name,
                                           dir / "single" / test_ds.entry(i).name);
                singles.push_back(test_ds.entry(i));
            }
        }
        REQUIRE(!singles.empty());
        avdata::write_cache_index(dir / "single", singles);
    }
    REQUIRE(cli::cmd_eval(cfg, ckpt, dir / "single", dir / "eval_single") == 0);
    std::string single_report = file_text(dir / "eval_single" / "metrics.txt");
    CHECK(single_report.find("undefined") != std::string::npos);

    // Sweep: records round-trip through the documented format.
    REQUIRE(cli::cmd_sweep(cfg, ckpt, dir / "cache" / "test", dir / "sweep",
                           "gaussian_noise,contrast", "1,3") == 0);
    auto sweep_recs = evalkit::read_records(dir / "sweep" / "sweep_records.tsv");
    // 1 clean + 2 kinds x (2 severities + 1 mean).
    CHECK(sweep_recs.size() == 7);

    // Perturb batch mode mirrors the directory.
    REQUIRE(cli::cmd_perturb(cfg, dir / "cache" / "test", dir / "corrupted", "gaussian_noise", 3) == 0);
    auto corrupted = avdata::CacheDataset::open(dir / "corrupted");
    CHECK(corrupted.size() == 4);
    auto test_ds = avdata::CacheDataset::open(dir / "cache" / "test");
    CHECK(testutil::read_file_bytes(dir / "corrupted" / corrupted.entry(0).name) !=
          testutil::read_file_bytes(dir / "cache" / "test" / test_ds.entry(0).name));

    // Viz: crops and attention maps land on disk.
    std::string sample = test_ds.entry(0).name;
    REQUIRE(cli::cmd_viz(cfg, ckpt, dir / "cache" / "test", sample, dir / "viz") == 0);
    auto stem = sample.substr(0, sample.size() - 4);
    CHECK(std::filesystem::exists(dir / "viz" / (stem.substr(0, stem.rfind('_')) + "_" +
                                                 stem.substr(stem.rfind('_') + 1) + "_lip_0.png")));
    int cam_files = 0;
    for (auto& e : std::filesystem::directory_iterator(dir / "viz")) {
        if (e.path().filename().string().find("_cam") != std::string::npos) ++cam_files;
    }
    CHECK(cam_files == 15);  // 3 scales x T=5
    CHECK(std::filesystem::exists(dir / "viz" / "weights.txt"));

    // Unknown sample is a validation error (exit 2 through the guard).
    int code = cli::run_guarded(
        [&] { return cli::cmd_viz(cfg, ckpt, dir / "cache" / "test", "nope.png", dir / "viz2"); });
    CHECK(code == 2);
}

TEST_CASE("train validation: missing cache and single-class cache are rejected") {
    auto dir = testutil::tmp_dir("cli_badtrain");
    RunConfig cfg = micro_config();
    CHECK(cli::run_guarded([&] { return cli::cmd_train(cfg, dir / "nope", dir / "out"); }) == 2);

    // Single-class training cache.
    std::filesystem::create_directories(dir / "cache");
    {
        avdata::WindowSample ws;
        std::vector<Image> frames(5, Image(112, 112));
        Image band(112, 560);
        Image comp = avdata::compose_window_image(frames, band);
        save_png(comp, dir / "cache" / "only_0.png");
        avdata::write_cache_index(dir / "cache", {avdata::CacheEntry{"only_0.png", 1}});
    }
    CHECK(cli::run_guarded([&] { return cli::cmd_train(cfg, dir / "cache", dir / "out"); }) == 2);
}

}  // TEST_SUITE
