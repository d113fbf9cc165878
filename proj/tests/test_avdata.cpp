#include <doctest.h>

#include "helpers.hpp"
#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"

#include <cmath>
#include <fstream>
#include <set>

using namespace lipfd;
using namespace lipfd::avdata;

TEST_SUITE("avdata") {

TEST_CASE("load_manifest: empty file yields empty list") {
    auto dir = testutil::tmp_dir("manifest_empty");
    std::ofstream(dir / "m.tsv").close();
    CHECK(load_manifest(dir / "m.tsv").empty());
}

TEST_CASE("load_manifest: one fake record maps to label 1") {
    auto dir = testutil::tmp_dir("manifest_one");
    auto clip = testutil::write_clip(dir, "c1", 6, 32, 25.0, 16000);
    std::ofstream m(dir / "m.tsv");
    m << testutil::manifest_line("c1", "c1/frames", "c1/audio.wav", "fake") << "\n";
    m.close();
    auto records = load_manifest(dir / "m.tsv");
    REQUIRE(records.size() == 1);
    CHECK(records[0].label == 1);
    CHECK(records[0].clip_id == "c1");
    CHECK(records[0].frame_count == 6);
    CHECK(records[0].fps == 25.0);
}

TEST_CASE("load_manifest: missing frame_dir names the clip") {
    auto dir = testutil::tmp_dir("manifest_missing");
    auto clip = testutil::write_clip(dir, "ok", 4, 32, 25.0, 16000);
    std::ofstream m(dir / "m.tsv");
    m << testutil::manifest_line("ok", "ok/frames", "ok/audio.wav", "real") << "\n";
    m << testutil::manifest_line("ghost", "nowhere/frames", "ok/audio.wav", "real") << "\n";
    m.close();
    try {
        load_manifest(dir / "m.tsv");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("load_manifest: malformed line carries its line number") {
    auto dir = testutil::tmp_dir("manifest_bad");
    auto clip = testutil::write_clip(dir, "c", 4, 32, 25.0, 16000);
    std::ofstream m(dir / "m.tsv");
    m << testutil::manifest_line("c", "c/frames", "c/audio.wav", "real") << "\n";
    m << "this is not a record\n";
    m.close();
    try {
        load_manifest(dir / "m.tsv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::ofstream m2(dir / "m2.tsv");
    m2 << testutil::manifest_line("c", "c/frames", "c/audio.wav", "maybe") << "\n";
    m2.close();
    CHECK_THROWS_AS(load_manifest(dir / "m2.tsv"), ParseError);
}

TEST_CASE("compute_spectrogram: digital silence hits the floor everywhere") {
    std::vector<double> silence(16000, 0.0);
    Spectrogram spec = compute_spectrogram(silence, 16000);
    CHECK(spec.freq_bins == 64);
    for (double v : spec.m) CHECK(v == 0.0);  // floor maps to exactly 0 after the shift
}

TEST_CASE("compute_spectrogram: 440 Hz sine peaks in the right mel bin") {
    MelConfig cfg;
    std::vector<double> sine(32000);
    for (size_t i = 0; i < sine.size(); ++i) {
        sine[i] = 0.5 * std::sin(2.0 * M_PI * 440.0 * i / cfg.sample_rate);
    }
    Spectrogram spec = compute_spectrogram(sine, cfg.sample_rate, cfg);

    // Independent oracle: a pure tone lands in FFT bin round(f*nfft/sr); the
    // expected mel bin is the filter weighting that FFT bin the most.
    int nfft = cfg.fft_size();
    int bins = nfft / 2 + 1;
    int k_star = static_cast<int>(std::lround(440.0 * nfft / cfg.sample_rate));
    std::vector<double> fb = mel_filterbank(cfg);
    int expected = 0;
    double best = -1.0;
    for (int m = 0; m < cfg.mel_bins; ++m) {
        double w = fb[static_cast<size_t>(m) * bins + k_star];
        if (w > best) {
            best = w;
            expected = m;
        }
    }
    REQUIRE(best > 0.0);

    int hits = 0, total = 0;
    for (int t = 2; t < spec.time_bins - 2; ++t) {
        int arg = 0;
        double mx = spec.at(t, 0);
        for (int f = 1; f < spec.freq_bins; ++f) {
            if (spec.at(t, f) > mx) {
                mx = spec.at(t, f);
                arg = f;
            }
        }
        ++total;
        if (arg == expected) ++hits;
    }
    CHECK(static_cast<double>(hits) / total >= 0.95);
}

TEST_CASE("compute_spectrogram: white noise carries positive energy in every column") {
    Rng rng(3);
    std::vector<double> noise(16000);
    for (double& v : noise) v = 0.3 * rng.normal();
    Spectrogram spec = compute_spectrogram(noise, 16000);
    for (int t = 0; t < spec.time_bins; ++t) {
        double sum = 0.0;
        for (int f = 0; f < spec.freq_bins; ++f) sum += spec.at(t, f);
        CHECK(sum > 0.0);
    }
}

TEST_CASE("compute_spectrogram: rejects short and non-finite input") {
    std::vector<double> tiny(100, 0.1);
    CHECK_THROWS_AS(compute_spectrogram(tiny, 16000), ValidationError);
    std::vector<double> bad(16000, 0.0);
    bad[500] = std::nan("");
    CHECK_THROWS_AS(compute_spectrogram(bad, 16000), ValidationError);
}

TEST_CASE("assemble_window: layout arithmetic and boundaries") {
    auto dir = testutil::tmp_dir("assemble");
    auto clip_files = testutil::write_clip(dir, "c", 8, 64, 25.0, 16000);
    std::ofstream m(dir / "m.tsv");
    m << testutil::manifest_line("c", "c/frames", "c/audio.wav", "real") << "\n";
    m.close();
    auto records = load_manifest(dir / "m.tsv");
    REQUIRE(records.size() == 1);
    Waveform wav = read_wav(records[0].audio_path);
    Spectrogram spec = compute_spectrogram(wav.samples, wav.sample_rate);

    WindowLayout layout{224, 224};
    WindowSample ws = assemble_window(records[0], 1, 5, spec, layout);
    CHECK(ws.composite.height == 448);
    CHECK(ws.composite.width == 1120);
    CHECK(ws.frames.size() == 5);
    CHECK(ws.frames[0].width == 224);

    WindowSample w1 = assemble_window(records[0], 0, 1, spec, layout);
    CHECK(w1.composite.width == 224);
    CHECK(w1.composite.height == 448);

    // Valid starts are [0, frame_count - T]; one past is a range error.
    CHECK_NOTHROW(assemble_window(records[0], 3, 5, spec, layout));
    CHECK_THROWS_AS(assemble_window(records[0], 4, 5, spec, layout), RangeError);

    // Byte-identical determinism.
    WindowSample again = assemble_window(records[0], 1, 5, spec, layout);
    CHECK(again.composite.px == ws.composite.px);

    // Spectrogram slice span within one hop of the frame span.
    double span = ws.spectrogram.time_bins * ws.spectrogram.hop_seconds;
    double frame_span = 5.0 / records[0].fps;
    CHECK(std::abs(span - frame_span) <= ws.spectrogram.hop_seconds + 1e-9);
}

TEST_CASE("composite layout formula holds across T and frame sizes") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        int t = static_cast<int>(rng.uniform_int(1, 7));
        int side = static_cast<int>(rng.uniform_int(16, 96));
        int band_h = static_cast<int>(rng.uniform_int(8, 96));
        std::vector<Image> frames(static_cast<size_t>(t), Image(side, side));
        SpectrogramSlice slice;
        slice.time_bins = 4;
        slice.freq_bins = 8;
        slice.hop_seconds = 0.01;
        slice.m.assign(32, 0.5);
        slice.m[5] = 2.0;
        Image band = render_band(slice, band_h, side * t);
        Image comp = compose_window_image(frames, band);
        CHECK(comp.height == band_h + side);
        CHECK(comp.width == side * t);
    }
}

TEST_CASE("render_band normalizes to [0,1]") {
    SpectrogramSlice slice;
    slice.time_bins = 3;
    slice.freq_bins = 4;
    slice.hop_seconds = 0.01;
    slice.m = {5, 1, 2, 3, 4, 9, 0, 2, 7, 8, 1, 6};
    Image band = render_band(slice, 16, 24);
    double lo = 2.0, hi = -1.0;
    for (double v : band.px) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("window_from_composite inverts the layout") {
    std::vector<Image> frames;
    for (int i = 0; i < 3; ++i) {
        Image f(20, 20);
        for (double& v : f.px) v = 0.1 * (i + 1);
        frames.push_back(f);
    }
    SpectrogramSlice slice;
    slice.time_bins = 2;
    slice.freq_bins = 2;
    slice.hop_seconds = 0.01;
    slice.m = {0.0, 1.0, 2.0, 3.0};
    Image band = render_band(slice, 12, 60);
    Image comp = compose_window_image(frames, band);
    WindowSample ws = window_from_composite("x", 4, 1, comp, WindowLayout{20, 12});
    CHECK(ws.t == 3);
    CHECK(ws.frames.size() == 3);
    CHECK(ws.frames[1].px == frames[1].px);
    CHECK(ws.label == 1);
}

TEST_CASE("expand_dataset: forced single window and determinism") {
    std::vector<ClipRecord> records{testutil::fake_record("a", 5)};
    auto refs = expand_dataset(records, 5, 1, 42);
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].start_frame == 0);
    CHECK(refs[0].clip_id == "a");

    std::vector<ClipRecord> many{testutil::fake_record("a", 40), testutil::fake_record("b", 33)};
    auto r1 = expand_dataset(many, 5, 10, 7);
    auto r2 = expand_dataset(many, 5, 10, 7);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].clip_id == r2[i].clip_id);
        CHECK(r1[i].start_frame == r2[i].start_frame);
    }
}

TEST_CASE("expand_dataset: 100 frames, T=5, factor=50 gives 50 distinct starts in [0,95]") {
    std::vector<ClipRecord> records{testutil::fake_record("c", 100)};
    auto refs = expand_dataset(records, 5, 50, 123);
    REQUIRE(refs.size() == 50);
    std::set<int> starts;
    for (const auto& r : refs) {
        CHECK(r.start_frame >= 0);
        CHECK(r.start_frame <= 95);
        starts.insert(r.start_frame);
    }
    CHECK(starts.size() == 50);
}

TEST_CASE("expand_dataset: argument validation") {
    std::vector<ClipRecord> records{testutil::fake_record("a", 10)};
    CHECK_THROWS_AS(expand_dataset(records, 5, 0, 1), ArgumentError);
    std::vector<ClipRecord> shorty{testutil::fake_record("s", 3)};
    CHECK_THROWS_AS(expand_dataset(shorty, 5, 1, 1), ValidationError);
}

TEST_CASE("expand_dataset: property over random clip lengths and factors") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        int t = static_cast<int>(rng.uniform_int(1, 8));
        int n_clips = static_cast<int>(rng.uniform_int(1, 5));
        int factor = static_cast<int>(rng.uniform_int(1, 60));
        std::vector<ClipRecord> records;
        for (int c = 0; c < n_clips; ++c) {
            records.push_back(testutil::fake_record("clip" + std::to_string(c),
                                                    t + static_cast<int>(rng.uniform_int(0, 80))));
        }
        uint64_t seed = rng.next_u64();
        auto refs = expand_dataset(records, t, factor, seed);
        auto refs2 = expand_dataset(records, t, factor, seed);
        REQUIRE(refs.size() == refs2.size());
        std::set<std::pair<std::string, int>> seen;
        size_t expected = 0;
        for (const auto& rec : records) {
            expected += static_cast<size_t>(std::min(factor, rec.frame_count - t + 1));
        }
        CHECK(refs.size() == expected);
        for (size_t i = 0; i < refs.size(); ++i) {
            CHECK(refs[i].start_frame == refs2[i].start_frame);
            bool inserted = seen.insert({refs[i].clip_id, refs[i].start_frame}).second;
            CHECK(inserted);  // no duplicate (clip, start) pairs
        }
    }
}

TEST_CASE("denoise_audio: silence in, silence out, length preserved") {
    std::vector<double> silence(8000, 0.0);
    auto out = denoise_audio(silence, 16000);
    REQUIRE(out.size() == silence.size());
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("denoise_audio: improves SNR on a noisy tone") {
    Rng rng(55);
    const int sr = 16000;
    std::vector<double> clean(2 * sr), noisy(2 * sr);
    // Tone bursts with smooth 100 ms ramps and silent gaps; the gate
    // profiles its noise estimate from the gaps.
    auto envelope = [](double t) {
        auto ramp = [](double x) { return 0.5 - 0.5 * std::cos(M_PI * std::clamp(x, 0.0, 1.0)); };
        double e = 0.0;
        e = std::max(e, ramp((t - 0.3) / 0.1) * ramp((1.0 - t) / 0.1));
        e = std::max(e, ramp((t - 1.3) / 0.1) * ramp((1.7 - t) / 0.1));
        return e;
    };
    for (size_t i = 0; i < clean.size(); ++i) {
        double t = static_cast<double>(i) / sr;
        clean[i] = 0.4 * envelope(t) * std::sin(2.0 * M_PI * 440.0 * t);
        noisy[i] = clean[i] + 0.01 * rng.normal();
    }
    auto out = denoise_audio(noisy, sr);
    REQUIRE(out.size() == noisy.size());
    auto snr_vs_clean = [&](const std::vector<double>& x) {
        double sig = 0.0, err = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            sig += clean[i] * clean[i];
            err += (x[i] - clean[i]) * (x[i] - clean[i]);
        }
        return 10.0 * std::log10(sig / err);
    };
    double snr_in = snr_vs_clean(noisy);
    double snr_out = snr_vs_clean(out);
    CHECK(snr_out >= snr_in);
    CHECK(snr_out > snr_in + 2.0);  // the gate should buy a clear margin
}

TEST_CASE("wav round trip preserves content") {
    auto dir = testutil::tmp_dir("wav");
    Waveform w;
    w.sample_rate = 16000;
    w.samples.resize(1000);
    for (size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = 0.7 * std::sin(0.02 * static_cast<double>(i));
    }
    write_wav(w, dir / "t.wav");
    Waveform r = read_wav(dir / "t.wav");
    CHECK(r.sample_rate == 16000);
    REQUIRE(r.samples.size() == w.samples.size());
    double max_err = 0.0;
    for (size_t i = 0; i < r.samples.size(); ++i) {
        max_err = std::max(max_err, std::abs(r.samples[i] - w.samples[i]));
    }
    CHECK(max_err < 1e-4);  // 16-bit quantization
}

}  // TEST_SUITE
