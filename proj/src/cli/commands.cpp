#include "lipfd/cli.hpp"

#include "lipfd/avdata.hpp"
#include "lipfd/dataset.hpp"
#include "lipfd/errors.hpp"
#include "lipfd/evalkit.hpp"
#include "lipfd/model.hpp"
#include "lipfd/perturb.hpp"
#include "lipfd/rng.hpp"
#include "lipfd/wav.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace lipfd::cli {

namespace {

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "resolved_config.txt", std::ios::binary);
    if (!out) throw ValidationError("cannot write resolved config in " + dir.string());
    out << serialize_config(cfg);
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<evalkit::PredItem> predict_dataset(model::LipFdModel& model,
                                               const avdata::CacheDataset& ds) {
    avdata::WindowLayout layout{model.config().frame_side, model.config().band_height};
    std::vector<evalkit::PredItem> preds;
    preds.reserve(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        avdata::WindowSample ws = ds.load(i, layout);
        auto p = model.predict(ws);
        preds.push_back(evalkit::PredItem{ds.entry(i).name, p.prob, ws.label});
    }
    return preds;
}

std::vector<evalkit::Record> metrics_to_records(const evalkit::MetricsReport& r) {
    std::vector<evalkit::Record> recs;
    recs.push_back({"clean", 0, "acc", r.acc});
    recs.push_back({"clean", 0, "fpr", r.fpr});
    recs.push_back({"clean", 0, "fnr", r.fnr});
    if (r.ap.has_value()) recs.push_back({"clean", 0, "ap", *r.ap});
    if (r.auc.has_value()) recs.push_back({"clean", 0, "auc", *r.auc});
    recs.push_back({"clean", 0, "threshold", r.threshold});
    recs.push_back({"clean", 0, "n_pos", static_cast<double>(r.n_pos)});
    recs.push_back({"clean", 0, "n_neg", static_cast<double>(r.n_neg)});
    return recs;
}

}  // namespace

int cmd_synth(const RunConfig& cfg, int n_clips, const std::filesystem::path& out_dir) {
    evalkit::SynthConfig sc = evalkit::SynthConfig::from(cfg, n_clips);
    std::filesystem::path manifest = evalkit::synth_benchmark(sc, out_dir, cfg.seed);
    write_resolved_config(cfg, out_dir);
    std::cout << "synth: wrote " << n_clips << " clips, manifest " << manifest.string() << "\n";
    return 0;
}

int cmd_preprocess(const RunConfig& cfg, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& out_dir) {
    std::vector<avdata::ClipRecord> records = avdata::load_manifest(manifest_path);
    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    if (records.empty()) {
        std::cout << "preprocess: empty manifest, nothing to do\n";
        return 0;
    }

    std::vector<avdata::WindowRef> refs =
        avdata::expand_dataset(records, cfg.window_size, cfg.expand_factor, cfg.seed);

    // Group refs per clip, preserving manifest order.
    std::vector<std::vector<int>> per_clip(records.size());
    for (size_t r = 0; r < refs.size(); ++r) {
        per_clip[static_cast<size_t>(refs[r].clip_index)].push_back(static_cast<int>(r));
    }

    avdata::WindowLayout layout = avdata::WindowLayout::from(cfg);
    avdata::MelConfig mel = avdata::MelConfig::from(cfg);
    std::map<std::string, std::vector<avdata::CacheEntry>> split_entries;
    size_t written = 0;

    for (size_t ci = 0; ci < records.size(); ++ci) {
        const avdata::ClipRecord& clip = records[ci];
        Waveform wav = read_wav(clip.audio_path);
        if (wav.sample_rate != cfg.sample_rate) wav = resample_linear(wav, cfg.sample_rate);
        std::vector<double> samples =
            cfg.denoise ? avdata::denoise_audio(wav.samples, cfg.sample_rate) : wav.samples;
        avdata::Spectrogram spec = avdata::compute_spectrogram(samples, cfg.sample_rate, mel);

        std::filesystem::path split_dir = out_dir / clip.split;
        std::filesystem::create_directories(split_dir);
        for (int ri : per_clip[ci]) {
            const avdata::WindowRef& ref = refs[static_cast<size_t>(ri)];
            avdata::WindowSample ws =
                avdata::assemble_window(clip, ref.start_frame, cfg.window_size, spec, layout);
            if (cfg.augment_prob > 0.0) {
                Rng arng(Rng::mix(cfg.seed, Rng::hash_string(clip.clip_id + "#" +
                                                             std::to_string(ref.start_frame))));
                if (arng.uniform() < cfg.augment_prob) {
                    auto kind = static_cast<perturb::Kind>(arng.uniform_int(0, perturb::kKindCount - 1));
                    int severity = static_cast<int>(arng.uniform_int(1, perturb::kSeverityCount));
                    ws = perturb::apply_to_window(ws, perturb::resolve(kind, severity),
                                                  arng.next_u64());
                }
            }
            std::string name = clip.clip_id + "_" + std::to_string(ref.start_frame) + ".png";
            save_png(ws.composite, split_dir / name);
            split_entries[clip.split].push_back(avdata::CacheEntry{name, clip.label});
            ++written;
        }
    }
    for (const auto& [split, entries] : split_entries) {
        avdata::write_cache_index(out_dir / split, entries);
    }
    std::cout << "preprocess: wrote " << written << " composites across " << split_entries.size()
              << " split(s) under " << out_dir.string() << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::filesystem::path& cache_dir,
              const std::filesystem::path& out_dir, const std::string& resume) {
    std::filesystem::path train_dir = cache_dir;
    std::filesystem::path val_dir;
    if (!std::filesystem::exists(cache_dir / "index.tsv")) {
        train_dir = cache_dir / "train";
        if (!std::filesystem::exists(train_dir / "index.tsv")) {
            throw ValidationError("no cache index found at " + cache_dir.string() + " or " +
                                  train_dir.string());
        }
        if (std::filesystem::exists(cache_dir / "val" / "index.tsv")) val_dir = cache_dir / "val";
    }

    avdata::CacheDataset train_ds = avdata::CacheDataset::open(train_dir);
    if (train_ds.size() == 0) throw ValidationError("training cache is empty");
    if (train_ds.count_label(0) == 0 || train_ds.count_label(1) == 0) {
        throw ValidationError("training cache must contain both classes");
    }
    std::optional<avdata::CacheDataset> val_ds;
    if (!val_dir.empty()) val_ds = avdata::CacheDataset::open(val_dir);

    Adam opt(Adam::Config{cfg.learning_rate, 0.9, 0.999, 1e-8});
    int start_epoch = 0;
    std::optional<model::LipFdModel> model;
    if (!resume.empty()) {
        model::LoadedCheckpoint info;
        model.emplace(model::load_checkpoint(resume, &opt, &info));
        opt.config().lr = cfg.learning_rate;
        start_epoch = info.epoch;
    } else {
        model.emplace(model::ModelConfig::from(cfg));
    }

    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    std::ofstream log(out_dir / "train_log.txt", resume.empty() ? std::ios::trunc : std::ios::app);
    if (!log) throw ValidationError("cannot open train log in " + out_dir.string());
    log.precision(10);

    train_ds.preload();
    avdata::WindowLayout layout{model->config().frame_side, model->config().band_height};
    std::filesystem::path ckpt_path = out_dir / "model.ckpt";

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<size_t> order(train_ds.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(Rng::mix(cfg.seed, 0x45504f43ULL + static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double epoch_total = 0.0, epoch_cls = 0.0;
        int steps = 0;
        for (size_t off = 0; off < order.size(); off += static_cast<size_t>(cfg.batch_size)) {
            size_t hi = std::min(order.size(), off + static_cast<size_t>(cfg.batch_size));
            std::vector<avdata::WindowSample> batch;
            batch.reserve(hi - off);
            for (size_t q = off; q < hi; ++q) batch.push_back(train_ds.load(order[q], layout));
            model::LossBundle bundle = model->train_step(batch, opt);
            epoch_total += bundle.total;
            epoch_cls += bundle.l_cls;
            ++steps;
            log << "epoch=" << epoch << " step=" << opt.step_count() << " l_ra=" << bundle.l_ra
                << " l_cls=" << bundle.l_cls << " total=" << bundle.total << "\n";
        }

        std::ostringstream summary;
        summary.precision(6);
        summary << "epoch " << epoch << ": mean_total=" << (epoch_total / std::max(1, steps))
                << " mean_l_cls=" << (epoch_cls / std::max(1, steps));
        if (val_ds.has_value()) {
            auto preds = predict_dataset(*model, *val_ds);
            evalkit::MetricsReport rep = evalkit::compute_metrics(preds, cfg.threshold);
            summary << " val_acc=" << rep.acc;
            if (rep.auc.has_value()) summary << " val_auc=" << *rep.auc;
        }
        std::cout << summary.str() << "\n";
        log << summary.str() << "\n";

        model::CheckpointExtra extra;
        extra.meta["epoch"] = std::to_string(epoch + 1);
        model::save_checkpoint(ckpt_path, *model, &opt, extra);
    }

    if (cfg.epochs == start_epoch) {
        // Nothing to run (e.g. resume at the configured horizon); still emit
        // a checkpoint so downstream commands have one.
        model::CheckpointExtra extra;
        extra.meta["epoch"] = std::to_string(start_epoch);
        model::save_checkpoint(ckpt_path, *model, &opt, extra);
    }
    std::cout << "train: checkpoint at " << ckpt_path.string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             const std::filesystem::path& cache_dir, const std::filesystem::path& out_dir) {
    model::LipFdModel model = model::load_checkpoint(checkpoint);
    avdata::CacheDataset ds = avdata::CacheDataset::open(cache_dir);
    if (ds.size() == 0) throw ValidationError("evaluation cache is empty");

    std::vector<evalkit::PredItem> preds = predict_dataset(model, ds);
    evalkit::MetricsReport rep = evalkit::compute_metrics(preds, cfg.threshold);

    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    {
        std::ofstream mf(out_dir / "metrics.txt", std::ios::binary);
        mf << evalkit::format_metrics(rep);
    }
    evalkit::write_records(out_dir / "metrics_records.tsv", metrics_to_records(rep));
    {
        std::ofstream pf(out_dir / "predictions.tsv", std::ios::binary);
        pf.precision(17);
        for (const auto& p : preds) pf << p.id << '\t' << p.prob << '\t' << p.label << '\n';
    }
    std::cout << evalkit::format_metrics(rep);
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& checkpoint,
              const std::filesystem::path& cache_dir, const std::filesystem::path& out_dir,
              const std::string& kinds_csv, const std::string& severities_csv) {
    model::LipFdModel model = model::load_checkpoint(checkpoint);
    avdata::CacheDataset ds = avdata::CacheDataset::open(cache_dir);
    ds.preload();

    std::vector<perturb::Kind> kinds;
    if (kinds_csv == "all") {
        for (int k = 0; k < perturb::kKindCount; ++k) kinds.push_back(static_cast<perturb::Kind>(k));
    } else {
        for (const auto& name : split_csv(kinds_csv)) kinds.push_back(perturb::kind_from(name));
    }
    std::vector<int> severities;
    for (const auto& s : split_csv(severities_csv)) {
        int sev = std::stoi(s);
        if (sev < 1 || sev > 5) throw ArgumentError("severity must be 1..5");
        severities.push_back(sev);
    }

    avdata::WindowLayout layout{model.config().frame_side, model.config().band_height};
    evalkit::SweepResult sweep =
        evalkit::robustness_sweep(model, ds, layout, kinds, severities, cfg.seed);

    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    evalkit::write_records(out_dir / "sweep_records.tsv", evalkit::sweep_records(sweep));

    std::ostringstream table;
    table.precision(4);
    table << std::fixed;
    table << "clean auc: " << sweep.clean_auc << "\n";
    table << "kind            ";
    for (int s : severities) table << "  sev" << s;
    table << "   mean\n";
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
        std::string name = perturb::kind_name(kinds[ki]);
        table << name << std::string(name.size() < 16 ? 16 - name.size() : 1, ' ');
        for (size_t si = 0; si < severities.size(); ++si) table << " " << sweep.auc[ki][si];
        table << " " << sweep.mean_auc[ki] << "\n";
    }
    {
        std::ofstream tf(out_dir / "sweep.txt", std::ios::binary);
        tf << table.str();
    }
    std::cout << table.str();
    return 0;
}

int cmd_perturb(const RunConfig& cfg, const std::filesystem::path& in_dir,
                const std::filesystem::path& out_dir, const std::string& kind, int severity) {
    perturb::PerturbationSpec spec = perturb::resolve(perturb::kind_from(kind), severity);
    avdata::CacheDataset ds = avdata::CacheDataset::open(in_dir);
    avdata::WindowLayout layout = avdata::WindowLayout::from(cfg);

    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    std::vector<avdata::CacheEntry> entries;
    entries.reserve(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        avdata::WindowSample ws = ds.load(i, layout);
        uint64_t seed = Rng::mix(cfg.seed, Rng::hash_string(ds.entry(i).name));
        avdata::WindowSample corrupted = perturb::apply_to_window(ws, spec, seed);
        save_png(corrupted.composite, out_dir / ds.entry(i).name);
        entries.push_back(ds.entry(i));
    }
    avdata::write_cache_index(out_dir, entries);
    std::cout << "perturb: wrote " << entries.size() << " corrupted composites to "
              << out_dir.string() << "\n";
    return 0;
}

int cmd_viz(const RunConfig& cfg, const std::filesystem::path& checkpoint,
            const std::filesystem::path& cache_dir, const std::string& sample_name,
            const std::filesystem::path& out_dir) {
    model::LipFdModel model = model::load_checkpoint(checkpoint);
    avdata::CacheDataset ds = avdata::CacheDataset::open(cache_dir);
    avdata::WindowLayout layout{model.config().frame_side, model.config().band_height};

    std::optional<size_t> index;
    for (size_t i = 0; i < ds.size(); ++i) {
        if (ds.entry(i).name == sample_name) {
            index = i;
            break;
        }
    }
    if (!index.has_value()) {
        throw ValidationError("sample '" + sample_name + "' not found in " + cache_dir.string());
    }
    avdata::WindowSample ws = ds.load(*index, layout);

    auto pred = model.predict(ws);
    evalkit::WeightReport wr = evalkit::normalize_weights(pred.stack);

    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir);
    regions::CropPyramid pyr =
        regions::crop_pyramid(ws, model.config().anchor_mode, model.config().ratios);
    const char* scale_names[3] = {"head", "face", "lip"};
    for (int scale = 0; scale < 3; ++scale) {
        std::vector<Image> maps = model.attention_maps(ws, scale);
        const std::vector<Image>& crops = pyr.scale(scale);
        for (int i = 0; i < pyr.t; ++i) {
            std::string stem = ws.clip_id + "_" + std::to_string(ws.start_frame) + "_" +
                               scale_names[scale] + "_" + std::to_string(i);
            save_png(crops[static_cast<size_t>(i)], out_dir / (stem + ".png"));
            save_png(maps[static_cast<size_t>(i)], out_dir / (stem + "_cam.png"));
        }
    }
    std::ostringstream summary;
    summary.precision(6);
    summary << "sample=" << sample_name << " label=" << ws.label << " prob=" << pred.prob
            << " weights(head,face,lip)=" << wr.head << "," << wr.face << "," << wr.lip << "\n";
    {
        std::ofstream wf(out_dir / "weights.txt", std::ios::binary);
        wf << summary.str();
    }
    std::cout << summary.str();
    return 0;
}

int run_guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace lipfd::cli
