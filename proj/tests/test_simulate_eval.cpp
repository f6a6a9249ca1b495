// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/bench.hpp"
#include "ctcseg/energy_vad.hpp"
#include "ctcseg/evaluate.hpp"
#include "ctcseg/greedy.hpp"
#include "ctcseg/segmenter.hpp"
#include "ctcseg/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>

using namespace ctcseg;

namespace {

SegmenterConfig synth_config(std::int64_t v = 16, std::int64_t ms = 0, std::int64_t me = 0) {
    SegmenterConfig cfg;
    cfg.v_threshold = v;
    cfg.onset_margin = ms;
    cfg.offset_margin = me;
    cfg.subsample_factor = 4;
    cfg.blank_id = 0;
    cfg.min_len_ratio = 0.0;
    return cfg;
}

// Frame count by direct enumeration of both masks.
std::pair<double, double> count_precision_recall(const std::vector<Segment>& hyp, const std::vector<Segment>& ref,
                                                 std::int64_t total) {
    auto inside = [](const std::vector<Segment>& segs, std::int64_t t) {
        for (const Segment& s : segs) {
            if (s.t_start <= t && t <= s.t_end) return true;
        }
        return false;
    };
    std::int64_t h = 0, r = 0, both = 0;
    for (std::int64_t t = 1; t <= total; ++t) {
        const bool a = inside(hyp, t);
        const bool b = inside(ref, t);
        h += a;
        r += b;
        both += a && b;
    }
    const double p = h == 0 ? (r == 0 ? 1.0 : 0.0) : static_cast<double>(both) / static_cast<double>(h);
    const double rc = r == 0 ? (h == 0 ? 1.0 : 0.0) : static_cast<double>(both) / static_cast<double>(r);
    return {p, rc};
}

Segment frame_segment(std::int64_t a, std::int64_t b) { return {0, a, b, a, b, 0}; }

}  // namespace

TEST_CASE("annotation validation") {
    ReferenceAnnotation ref;
    ref.total_duration_sec = 10.0;
    ref.speech_regions = {{1.0, 2.0}, {3.0, 4.0}};
    CHECK_NOTHROW(ref.validate());
    ref.speech_regions = {{3.0, 4.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(ref.validate(), Error);
    ref.speech_regions = {{1.0, 3.5}, {3.0, 4.0}};
    CHECK_THROWS_AS(ref.validate(), Error);
    ref.speech_regions = {{9.0, 11.0}};
    CHECK_THROWS_AS(ref.validate(), Error);
    ref.speech_regions = {{2.0, 1.0}};
    CHECK_THROWS_AS(ref.validate(), Error);
}

TEST_CASE("region frames: one second at 10 ms, r=4, is steps 25..50") {
    const auto [first, last] = region_to_feature_frames(1.0, 2.0, 10.0);
    CHECK(first == 100);
    CHECK(last == 200);

    ReferenceAnnotation ref;
    ref.total_duration_sec = 3.0;
    ref.speech_regions = {{1.0, 2.0}};
    const SegmenterConfig cfg = synth_config();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SynthesisOptions opts;
        opts.seed = seed;
        const PosteriorStream s = synthesize_posteriors(ref, cfg, opts);
        REQUIRE(s.num_frames() == 75);
        const auto segs = segment_offline(greedy_decode(s), cfg, s.feature_frames());
        REQUIRE(segs.size() == 1);
        CHECK(segs[0].k_first_nonblank == 25);
        CHECK(segs[0].k_last_nonblank == 50);
    }
}

TEST_CASE("synthesis without speech is blank everywhere") {
    ReferenceAnnotation ref;
    ref.total_duration_sec = 5.0;
    SynthesisOptions opts;
    const PosteriorStream s = synthesize_posteriors(ref, synth_config(), opts);
    CHECK_NOTHROW(validate(s));
    for (Eigen::Index k = 0; k < s.num_frames(); ++k) CHECK(s.scores(k, 0) >= 0.9f);
    const LabelStream labels = greedy_decode(s);
    CHECK(ctc_collapse(labels).empty());
}

TEST_CASE("a region spanning the whole stream has no blank gap >= V") {
    ReferenceAnnotation ref;
    ref.total_duration_sec = 20.0;
    ref.speech_regions = {{0.0, 20.0}};
    const SegmenterConfig cfg = synth_config(6);
    SynthesisOptions opts;
    opts.spike_gap_max = 5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        opts.seed = seed;
        const LabelStream labels = greedy_decode(synthesize_posteriors(ref, cfg, opts));
        std::int64_t run = 0;
        std::int64_t longest = 0;
        for (LabelId y : labels.labels) {
            run = y == 0 ? run + 1 : 0;
            longest = std::max(longest, run);
        }
        CHECK(longest < cfg.v_threshold);
        CHECK(segment_offline(labels, cfg, labels.num_steps() * 4).size() == 1);
    }
}

TEST_CASE("synthesis rejects spike gaps that could split speech") {
    ReferenceAnnotation ref;
    ref.total_duration_sec = 2.0;
    SynthesisOptions opts;
    opts.spike_gap_max = 16;
    try {
        synthesize_posteriors(ref, synth_config(16), opts);
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidConfig);
    }
}

TEST_CASE("synthesis is reproducible and seed dependent") {
    const ReferenceAnnotation ref = make_random_annotation(60.0, 50, 3);
    SynthesisOptions opts;
    opts.seed = 9;
    opts.jitter_steps = 2;
    const PosteriorStream a = synthesize_posteriors(ref, synth_config(), opts);
    const PosteriorStream b = synthesize_posteriors(ref, synth_config(), opts);
    CHECK(a.scores == b.scores);
    opts.seed = 10;
    const PosteriorStream c = synthesize_posteriors(ref, synth_config(), opts);
    CHECK_FALSE(a.scores == c.scores);

    opts.kind = ScoreKind::PreSoftmax;
    const PosteriorStream d = synthesize_posteriors(ref, synth_config(), opts);
    CHECK(greedy_decode(d).labels == greedy_decode(c).labels);
}

TEST_CASE("closed loop: jitter 0 and no margins recover the regions within r frames") {
    const SegmenterConfig cfg = synth_config();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const ReferenceAnnotation ref = make_random_annotation(120.0, 40, seed);
        SynthesisOptions opts;
        opts.seed = seed;
        const PosteriorStream s = synthesize_posteriors(ref, cfg, opts);
        const auto hyp = segment_offline(greedy_decode(s), cfg, s.feature_frames());
        const auto truth = reference_segments(ref, opts.frame_shift_ms, s.feature_frames());
        INFO("seed " << seed);
        REQUIRE(hyp.size() == truth.size());
        for (std::size_t i = 0; i < hyp.size(); ++i) {
            CHECK(std::llabs(hyp[i].t_start - truth[i].t_start) <= cfg.subsample_factor);
            CHECK(std::llabs(hyp[i].t_end - truth[i].t_end) <= cfg.subsample_factor);
        }
    }
}

TEST_CASE("evaluate on simple fixtures") {
    const std::vector<Segment> ref{frame_segment(11, 20), frame_segment(41, 60)};
    const EvalReport same = evaluate(ref, ref, 100);
    CHECK(same.frame_precision == 1.0);
    CHECK(same.frame_recall == 1.0);
    CHECK(same.frame_f1 == 1.0);
    CHECK(same.boundary_mae_frames == 0.0);
    CHECK(same.n_matched == 2);

    const EvalReport none = evaluate(std::vector<Segment>{}, ref, 100);
    CHECK(none.frame_recall == 0.0);
    CHECK(none.frame_precision == 0.0);
    CHECK(none.frame_f1 == 0.0);

    const EvalReport both_empty = evaluate(std::vector<Segment>{}, std::vector<Segment>{}, 100);
    CHECK(both_empty.frame_precision == 1.0);
    CHECK(both_empty.frame_recall == 1.0);

    const std::vector<Segment> half{frame_segment(11, 15), frame_segment(41, 50)};
    const auto [p, r] = count_precision_recall(half, ref, 100);
    const EvalReport h = evaluate(half, ref, 100);
    CHECK(p == 1.0);
    CHECK(r == 0.5);
    CHECK(h.frame_precision == p);
    CHECK(h.frame_recall == r);
    CHECK(h.boundary_mae_frames == doctest::Approx((5.0 + 10.0) / 4.0));
}

TEST_CASE("evaluate matches frame counting and scores itself perfectly") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::int64_t> total_d(1, 300);
    for (int i = 0; i < 10000; ++i) {
        const std::int64_t total = total_d(rng);
        auto random_segments = [&] {
            std::vector<Segment> segs;
            std::int64_t t = std::uniform_int_distribution<std::int64_t>(1, 20)(rng);
            while (t <= total) {
                const std::int64_t end = std::min(total, t + std::uniform_int_distribution<std::int64_t>(0, 30)(rng));
                segs.push_back(frame_segment(t, end));
                t = end + std::uniform_int_distribution<std::int64_t>(2, 40)(rng);
            }
            return segs;
        };
        const auto hyp = random_segments();
        const auto ref = random_segments();
        const EvalReport rep = evaluate(hyp, ref, total);
        const auto [p, r] = count_precision_recall(hyp, ref, total);
        REQUIRE(rep.frame_precision == doctest::Approx(p));
        REQUIRE(rep.frame_recall == doctest::Approx(r));
        if (p + r > 0) REQUIRE(rep.frame_f1 == doctest::Approx(2 * p * r / (p + r)));
        REQUIRE(rep.n_matched <= static_cast<std::int64_t>(std::min(hyp.size(), ref.size())));

        const EvalReport self = evaluate(hyp, hyp, total);
        REQUIRE(self.frame_f1 == 1.0);
        REQUIRE(self.boundary_mae_frames == 0.0);
    }
}

TEST_CASE("energy vad fixtures") {
    const EnergyVadConfig cfg{10.0, 1e-3, 2};
    std::vector<std::int16_t> silence(16000, 0);
    CHECK(energy_vad(silence, 16000, cfg).empty());

    std::vector<std::int16_t> loud(16000, 32767);
    const auto all = energy_vad(loud, 16000, cfg);
    REQUIRE(all.size() == 1);
    CHECK(all[0].t_start == 1);
    CHECK(all[0].t_end == 100);

    // 100 ms burst starting at 0.5 s: 10 loud frames plus 2 hangover frames.
    std::vector<std::int16_t> burst(16000, 0);
    for (std::size_t i = 8000; i < 9600; ++i) burst[i] = (i % 2) ? 16000 : -16000;
    const auto segs = energy_vad(burst, 16000, cfg);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].t_start == 51);
    CHECK(segs[0].num_feature_frames() == 12);

    try {
        energy_vad(std::vector<std::int16_t>{}, 16000, cfg);
        FAIL("expected EmptyAudio");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyAudio);
    }
}

TEST_CASE("energy vad: raising the threshold shrinks the speech frame set") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> amp(0, 20000);
    std::uniform_int_distribution<int> frames(1, 60);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::int16_t> pcm;
        const int n = frames(rng);
        for (int f = 0; f < n; ++f) {
            const int a = amp(rng) * (f % 3 == 0 ? 0 : 1);
            for (int s = 0; s < 160; ++s) pcm.push_back(static_cast<std::int16_t>(s % 2 ? a : -a));
        }
        std::set<std::int64_t> prev;
        bool first = true;
        for (double th : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
            std::set<std::int64_t> speech;
            for (const Segment& s : energy_vad(pcm, 16000, {10.0, th, 3})) {
                for (std::int64_t t = s.t_start; t <= s.t_end; ++t) speech.insert(t);
            }
            if (!first) REQUIRE(std::includes(prev.begin(), prev.end(), speech.begin(), speech.end()));
            prev = std::move(speech);
            first = false;
        }
    }
}

TEST_CASE("energy vad: raising the threshold can split one segment into two") {
    // loud, medium, loud; a threshold between medium and loud cuts the middle.
    std::vector<std::int16_t> pcm;
    for (int a : {20000, 3000, 20000}) {
        for (int s = 0; s < 160; ++s) pcm.push_back(static_cast<std::int16_t>(s % 2 ? a : -a));
    }
    CHECK(energy_vad(pcm, 16000, {10.0, 1e-3, 0}).size() == 1);
    CHECK(energy_vad(pcm, 16000, {10.0, 0.1, 0}).size() == 2);
}

TEST_CASE("real time factor") {
    CHECK(real_time_factor(2.0, 10.0) == doctest::Approx(0.2));
    CHECK(real_time_factor(0.0, 10.0) == 0.0);
    CHECK(measure_rtf([] {}, 10.0) < 1e-3);
    CHECK_THROWS_AS(real_time_factor(1.0, 0.0), Error);
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("bench core reports one sample per repeat") {
    const ReferenceAnnotation ref = make_random_annotation(30.0, 100, 5);
    SynthesisOptions opts;
    const PosteriorStream s = synthesize_posteriors(ref, synth_config(), opts);
    const BenchResult res = bench_core(s, synth_config(16, 2, 3), 5);
    CHECK(res.rtf_samples.size() == 5);
    CHECK(res.median_rtf == median(res.rtf_samples));
    CHECK(res.num_frames == s.num_frames());
    CHECK(res.audio_sec == doctest::Approx(30.0));

    PosteriorStream empty;
    empty.scores.resize(0, 4);
    empty.subsample_factor = 4;
    CHECK_THROWS_AS(bench_core(empty, synth_config(), 1), Error);
}
