// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.hpp"

#include "ctcseg/ctcseg.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <thread>

namespace ctcseg::cli {

namespace {

struct Profile {
    const char* name;
    std::int64_t v_threshold;
    std::int64_t onset_margin;
    std::int64_t offset_margin;
};

// csj: offline CSJ setup; ted-bi / ted-uni: TED-LIUM bi- and uni-directional encoders.
constexpr Profile kProfiles[] = {
    {"csj", 16, 2, 3},
    {"ted-bi", 16, 4, 10},
    {"ted-uni", 16, 10, 2},
};

const Profile& find_profile(const std::string& name) {
    for (const Profile& p : kProfiles) {
        if (name == p.name) return p;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown profile '" + name + "'");
}

/// Segmenter flags shared by segment, eval and bench. Explicit flags win over
/// the profile; blank id and subsampling default to the input header.
struct SegmenterFlags {
    std::string profile = "csj";
    std::int64_t v_threshold = 16;
    std::int64_t onset_margin = 2;
    std::int64_t offset_margin = 3;
    LabelId blank_id = 0;
    double min_len_ratio = 0.1;

    CLI::Option* v_opt = nullptr;
    CLI::Option* onset_opt = nullptr;
    CLI::Option* offset_opt = nullptr;
    CLI::Option* blank_opt = nullptr;

    void add_to(CLI::App& app) {
        app.add_option("--profile", profile, "Tuned preset for V and margins")
            ->check(CLI::IsMember({"csj", "ted-bi", "ted-uni"}))
            ->capture_default_str();
        v_opt = app.add_option("-V,--threshold", v_threshold, "Minimum blank run (subsampled steps)")
                    ->check(CLI::PositiveNumber);
        onset_opt = app.add_option("--onset-margin", onset_margin, "Onset margin m_s (subsampled steps)")
                        ->check(CLI::NonNegativeNumber);
        offset_opt = app.add_option("--offset-margin", offset_margin, "Offset margin m_e (subsampled steps)")
                         ->check(CLI::NonNegativeNumber);
        blank_opt = app.add_option("--blank-id", blank_id, "Blank label id (default: from input header)")
                        ->check(CLI::NonNegativeNumber);
        app.add_option("--min-len-ratio", min_len_ratio, "Reject segments with tokens/steps <= ratio")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    }

    SegmenterConfig resolve(std::int64_t subsample_factor, LabelId header_blank) const {
        const Profile& p = find_profile(profile);
        SegmenterConfig cfg;
        cfg.v_threshold = v_opt->count() ? v_threshold : p.v_threshold;
        cfg.onset_margin = onset_opt->count() ? onset_margin : p.onset_margin;
        cfg.offset_margin = offset_opt->count() ? offset_margin : p.offset_margin;
        cfg.blank_id = blank_opt->count() ? blank_id : header_blank;
        cfg.subsample_factor = subsample_factor;
        cfg.min_len_ratio = min_len_ratio;
        cfg.validate();
        return cfg;
    }
};

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    return in;
}

/// Writes to --output when given, else to the command's stdout.
class OutputSink {
public:
    OutputSink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw Error(ErrorKind::IoError, "cannot create " + path);
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

struct SegmentArgs {
    std::string input;
    bool stream = false;
    std::string output;
    std::string mode = "offline";
    std::string format = "jsonl";
    bool events = false;
    std::int64_t total_frames = 0;
    std::string name = "stream";
    SegmenterFlags flags;
};

int run_segment_offline(const SegmentArgs& args, std::istream& in, std::ostream& out) {
    const PosteriorStream stream = read_posteriors(in);
    const SegmenterConfig cfg = args.flags.resolve(stream.subsample_factor, stream.blank_id);
    const SegmentFormat format = parse_segment_format(args.format);
    spdlog::debug("read {} frames x {} labels", stream.num_frames(), stream.num_labels());
    if (stream.num_frames() == 0) return kExitOk;

    const std::int64_t total = args.total_frames > 0 ? args.total_frames : stream.feature_frames();
    const LabelStream labels = greedy_decode(stream);
    const auto segments = apply_min_length_filter(segment_offline(labels, cfg, total), cfg);
    write_segments(out, segments, format, stream.frame_shift_ms, args.name);
    return kExitOk;
}

int run_segment_online(const SegmentArgs& args, std::istream& in, std::ostream& out) {
    PosteriorFrameReader reader(in);
    const CtcpHeader& header = reader.header();
    const SegmenterConfig cfg = args.flags.resolve(header.subsample_factor, static_cast<LabelId>(header.blank_id));
    cfg.validate_for(header.num_labels);
    const SegmentFormat format = parse_segment_format(args.format);
    const double shift = header.frame_shift_ms;
    const std::int64_t r = cfg.subsample_factor;

    std::optional<std::int64_t> total;
    if (args.total_frames > 0) {
        total = args.total_frames;
    } else if (header.length_known() && header.num_frames > 0) {
        total = static_cast<std::int64_t>(header.num_frames) * r;
    }

    OnlineSegmenter segmenter(cfg);
    SegmentAssembler assembler(cfg, total, true);
    std::vector<Segment> ready;
    auto emit = [&](const std::optional<SegmentEvent>& event) {
        if (!event) return;
        if (args.events) {
            write_event(out, *event, shift);
            out.flush();
        } else {
            assembler.on_event(*event, ready);
        }
    };
    auto drain = [&] {
        if (ready.empty()) return;
        write_segments(out, ready, format, shift, args.name);
        out.flush();
        ready.clear();
    };

    while (const auto frame = reader.next()) {
        emit(segmenter.push(argmax_label(*frame)));
        if (!args.events) {
            assembler.advance(reader.frames_read(), ready);
            drain();
        }
    }
    if (reader.frames_read() == 0) return kExitOk;
    const std::int64_t final_total = total.value_or(reader.frames_read() * r);
    emit(segmenter.finish(final_total));
    if (!args.events) {
        assembler.finish(ready, final_total);
        drain();
    }
    return kExitOk;
}

int run_segment(const SegmentArgs& args, std::istream& in, std::ostream& out) {
    std::ifstream file;
    std::istream* source = &in;
    if (!args.stream && !args.input.empty()) {
        file = open_file(args.input);
        source = &file;
    }
    OutputSink sink(args.output, out);
    if (args.mode == "online") return run_segment_online(args, *source, sink.stream());
    return run_segment_offline(args, *source, sink.stream());
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string annotation;
    std::string output;
    std::uint64_t seed = 0;
    std::int64_t jitter = 0;
    std::int64_t spike_gap_max = 4;
    std::int64_t v_threshold = 16;
    std::int64_t subsample = 4;
    double frame_shift_ms = 10.0;
    std::int64_t num_labels = 0;
    LabelId blank_id = 0;
    bool scores = false;
    std::string wav;
    int sample_rate = 16000;
};

int run_simulate(const SimulateArgs& args) {
    ReferenceAnnotation ref = read_annotation_file(args.annotation);
    if (args.num_labels > 0) ref.label_alphabet_size = args.num_labels;

    SegmenterConfig cfg;
    cfg.v_threshold = args.v_threshold;
    cfg.subsample_factor = args.subsample;
    cfg.blank_id = args.blank_id;

    SynthesisOptions opts;
    opts.jitter_steps = args.jitter;
    opts.spike_gap_max = args.spike_gap_max;
    opts.seed = args.seed;
    opts.frame_shift_ms = args.frame_shift_ms;
    opts.kind = args.scores ? ScoreKind::PreSoftmax : ScoreKind::Probabilities;

    const PosteriorStream stream = synthesize_posteriors(ref, cfg, opts);
    write_posterior_file(args.output, stream);
    spdlog::info("wrote {} frames x {} labels to {}", stream.num_frames(), stream.num_labels(), args.output);
    if (!args.wav.empty()) {
        WavAudio audio{args.sample_rate, synthesize_audio(ref, args.sample_rate, args.seed)};
        write_wav_file(args.wav, audio);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string ref;
    std::string hyp;
    std::string input;
    std::string wav;
    bool compare = false;
    double frame_shift_ms = 10.0;
    std::int64_t total_frames = 0;
    double energy_threshold = 1e-3;
    std::int64_t hangover = 5;
    SegmenterFlags flags;
};

void print_row(std::ostream& out, const std::string& method, const EvalReport& report) {
    auto row = nlohmann::ordered_json::parse(report_to_json(report));
    nlohmann::ordered_json line;
    line["method"] = method;
    for (auto it = row.begin(); it != row.end(); ++it) line[it.key()] = it.value();
    out << line.dump() << '\n';
}

void check_duration(std::int64_t steps, std::int64_t other_feature_frames, std::int64_t r, const std::string& what) {
    const std::int64_t other_steps = other_feature_frames / r;
    if (std::llabs(steps - other_steps) > 1) {
        throw Error(ErrorKind::InvalidArgument,
                    "mismatched durations: posteriors have " + std::to_string(steps) + " frames, " + what +
                        " has " + std::to_string(other_steps));
    }
}

int run_eval(const EvalArgs& args, std::ostream& out) {
    const ReferenceAnnotation ref = read_annotation_file(args.ref);
    if (args.compare && (args.input.empty() || args.wav.empty())) {
        throw Error(ErrorKind::InvalidArgument, "--compare needs both --input and --wav");
    }
    if (args.input.empty() && args.hyp.empty()) {
        throw Error(ErrorKind::InvalidArgument, "nothing to evaluate: pass --hyp or --input");
    }

    double shift = args.frame_shift_ms;
    std::int64_t total = args.total_frames > 0 ? args.total_frames
                                               : duration_to_feature_frames(ref.total_duration_sec, shift);

    if (!args.input.empty()) {
        const PosteriorStream stream = read_posterior_file(args.input);
        shift = stream.frame_shift_ms;
        const std::int64_t r = stream.subsample_factor;
        check_duration(stream.num_frames(), duration_to_feature_frames(ref.total_duration_sec, shift), r,
                       "reference");
        if (args.total_frames <= 0) total = stream.feature_frames();
        const SegmenterConfig cfg = args.flags.resolve(r, stream.blank_id);

        std::vector<Segment> segments;
        double rtf = 0.0;
        if (stream.num_frames() > 0) {
            rtf = measure_rtf(
                [&] {
                    segments = apply_min_length_filter(segment_offline(greedy_decode(stream), cfg, total), cfg);
                },
                stream.duration_sec());
        }
        EvalReport report = evaluate(segments, ref, shift, total);
        report.rtf = rtf;
        print_row(out, "ctc", report);

        if (args.compare) {
            const WavAudio audio = read_wav_file(args.wav);
            check_duration(stream.num_frames(), duration_to_feature_frames(audio.duration_sec(), shift), r, "audio");
            EnergyVadConfig vad{shift, args.energy_threshold, args.hangover};
            std::vector<Segment> energy_segments;
            const double energy_rtf = measure_rtf(
                [&] { energy_segments = energy_vad(audio.samples, audio.sample_rate_hz, vad); }, audio.duration_sec());
            EvalReport energy_report = evaluate(energy_segments, ref, shift, total);
            energy_report.rtf = energy_rtf;
            print_row(out, "energy", energy_report);
        }
    }

    if (!args.hyp.empty()) {
        std::ifstream in = open_file(args.hyp);
        const std::vector<Segment> hyp = read_segments_jsonl(in);
        print_row(out, "hyp", evaluate(hyp, ref, shift, total));
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::string> inputs;
    std::string rtf = "core";
    int repeat = 5;
    double duration_sec = 60.0;
    std::int64_t num_labels = 3000;
    std::int64_t subsample = 4;
    std::uint64_t seed = 0;
    int jobs = 1;
    SegmenterFlags flags;
};

std::string bench_json(const std::string& input, const BenchArgs& args, const BenchResult& result) {
    nlohmann::ordered_json doc;
    doc["input"] = input;
    doc["mode"] = args.rtf;
    doc["repeat"] = args.repeat;
    doc["audio_sec"] = result.audio_sec;
    doc["frames"] = result.num_frames;
    doc["segments"] = result.num_segments;
    doc["median_rtf"] = result.median_rtf;
    doc["frames_per_sec"] = result.frames_per_sec;
    doc["samples"] = result.rtf_samples;
    return doc.dump();
}

BenchResult bench_one(const std::string& path, const BenchArgs& args) {
    if (args.rtf == "e2e") {
        const CtcpHeader header = [&] {
            std::ifstream in = open_file(path);
            return read_ctcp_header(in);
        }();
        const SegmenterConfig cfg =
            args.flags.resolve(header.subsample_factor, static_cast<LabelId>(header.blank_id));
        return bench_end_to_end(path, cfg, args.repeat);
    }
    const PosteriorStream stream = read_posterior_file(path);
    return bench_core(stream, args.flags.resolve(stream.subsample_factor, stream.blank_id), args.repeat);
}

int run_bench(const BenchArgs& args, std::ostream& out) {
    if (args.inputs.empty()) {
        SegmenterConfig cfg = args.flags.resolve(args.subsample, 0);
        const ReferenceAnnotation ref = make_random_annotation(args.duration_sec, args.num_labels, args.seed);
        SynthesisOptions opts;
        opts.seed = args.seed;
        opts.spike_gap_max = std::min<std::int64_t>(4, cfg.v_threshold - 1);
        if (opts.spike_gap_max < 1) throw Error(ErrorKind::InvalidConfig, "bench synthesis needs V >= 2");
        spdlog::info("synthesizing {:.0f} s x {} labels", args.duration_sec, args.num_labels);
        const PosteriorStream stream = synthesize_posteriors(ref, cfg, opts);

        BenchResult result;
        if (args.rtf == "e2e") {
            std::random_device rd;
            const auto path = std::filesystem::temp_directory_path() /
                              ("ctcseg-bench-" + std::to_string(rd()) + ".ctcp");
            write_posterior_file(path, stream);
            try {
                result = bench_end_to_end(path, cfg, args.repeat);
            } catch (...) {
                std::filesystem::remove(path);
                throw;
            }
            std::filesystem::remove(path);
        } else {
            result = bench_core(stream, cfg, args.repeat);
        }
        out << bench_json("synthetic", args, result) << '\n';
        return kExitOk;
    }

    std::vector<BenchResult> results(args.inputs.size());
    std::vector<std::exception_ptr> errors(args.inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < args.inputs.size(); i = next++) {
            try {
                results[i] = bench_one(args.inputs[i], args);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(args.jobs, static_cast<int>(args.inputs.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < args.inputs.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out << bench_json(args.inputs[i], args, results[i]) << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"CTC blank-run speech segmentation"};
    app.name("ctcseg");
    app.require_subcommand(1);

    SegmentArgs seg;
    auto* segment_cmd = app.add_subcommand("segment", "Detect speech segments from CTC posteriors");
    segment_cmd->add_option("-i,--input", seg.input, "CTCP file (default: stdin)");
    segment_cmd->add_flag("--stream", seg.stream, "Read the CTCP stream from stdin");
    segment_cmd->add_option("-o,--output", seg.output, "Output path (default: stdout)");
    segment_cmd->add_option("--mode", seg.mode)->check(CLI::IsMember({"offline", "online"}))->capture_default_str();
    segment_cmd->add_option("--format", seg.format)->check(CLI::IsMember({"jsonl", "ctm", "tsv"}))->capture_default_str();
    segment_cmd->add_flag("--events", seg.events, "Online mode: print open/close/flush events instead of segments");
    segment_cmd->add_option("--total-frames", seg.total_frames, "Feature frames in the stream (default r * K)")
        ->check(CLI::PositiveNumber);
    segment_cmd->add_option("--name", seg.name, "Stream id for ctm output")->capture_default_str();
    seg.flags.add_to(*segment_cmd);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize CTC posteriors from an annotation");
    simulate_cmd->add_option("-a,--annotation", sim.annotation, "Reference annotation JSON")->required();
    simulate_cmd->add_option("-o,--output", sim.output, "Output CTCP path")->required();
    simulate_cmd->add_option("--seed", sim.seed)->capture_default_str();
    simulate_cmd->add_option("--jitter", sim.jitter, "Spike displacement in steps")->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--spike-gap-max", sim.spike_gap_max)->check(CLI::PositiveNumber)->capture_default_str();
    simulate_cmd->add_option("-V,--threshold", sim.v_threshold)->check(CLI::PositiveNumber)->capture_default_str();
    simulate_cmd->add_option("-r,--subsample", sim.subsample)->check(CLI::PositiveNumber)->capture_default_str();
    simulate_cmd->add_option("--frame-shift-ms", sim.frame_shift_ms)->check(CLI::PositiveNumber)->capture_default_str();
    simulate_cmd->add_option("--num-labels", sim.num_labels, "Override the annotation's alphabet size");
    simulate_cmd->add_option("--blank-id", sim.blank_id)->check(CLI::NonNegativeNumber);
    simulate_cmd->add_flag("--scores", sim.scores, "Write pre-softmax scores instead of probabilities");
    simulate_cmd->add_option("--wav", sim.wav, "Also write matching PCM16 audio");
    simulate_cmd->add_option("--sample-rate", sim.sample_rate)->check(CLI::PositiveNumber)->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score segments against a reference annotation");
    eval_cmd->alias("evaluate");
    eval_cmd->add_option("--ref", ev.ref, "Reference annotation JSON")->required();
    eval_cmd->add_option("--hyp", ev.hyp, "Hypothesis segments (jsonl)");
    eval_cmd->add_option("-i,--input", ev.input, "CTCP posteriors to segment and score");
    eval_cmd->add_option("--wav", ev.wav, "PCM16 mono audio for the energy baseline");
    eval_cmd->add_flag("--compare", ev.compare, "Score the energy baseline next to the CTC segmenter");
    eval_cmd->add_option("--frame-shift-ms", ev.frame_shift_ms)->check(CLI::PositiveNumber)->capture_default_str();
    eval_cmd->add_option("--total-frames", ev.total_frames)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--energy-threshold", ev.energy_threshold)->check(CLI::NonNegativeNumber)->capture_default_str();
    eval_cmd->add_option("--hangover", ev.hangover)->check(CLI::NonNegativeNumber)->capture_default_str();
    ev.flags.add_to(*eval_cmd);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure real-time factor of the segmentation layer");
    bench_cmd->add_option("-i,--input", bench.inputs, "CTCP files (default: synthetic stream)");
    bench_cmd->add_option("--rtf", bench.rtf)->check(CLI::IsMember({"core", "e2e"}))->capture_default_str();
    bench_cmd->add_option("--repeat", bench.repeat)->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--duration", bench.duration_sec, "Synthetic stream length (s)")
        ->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--num-labels", bench.num_labels)->check(CLI::Range(2, 1 << 20))->capture_default_str();
    bench_cmd->add_option("-r,--subsample", bench.subsample)->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
    bench_cmd->add_option("--jobs", bench.jobs)->check(CLI::PositiveNumber)->capture_default_str();
    bench.flags.add_to(*bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*segment_cmd) return run_segment(seg, in, out);
        if (*simulate_cmd) return run_simulate(sim);
        if (*eval_cmd) return run_eval(ev, out);
        if (*bench_cmd) return run_bench(bench, out);
    } catch (const std::exception& e) {
        err << "ctcseg: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitUsage;
}

}  // namespace ctcseg::cli
