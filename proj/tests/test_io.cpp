// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/greedy.hpp"
#include "ctcseg/io.hpp"
#include "ctcseg/segmenter.hpp"
#include "support/oracle.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

using namespace ctcseg;

namespace {

PosteriorStream random_stream(std::mt19937_64& rng, Eigen::Index frames, Eigen::Index labels, ScoreKind kind) {
    PosteriorStream s;
    s.kind = kind;
    s.scores.resize(frames, labels);
    s.blank_id = static_cast<LabelId>(std::uniform_int_distribution<Eigen::Index>(0, labels - 1)(rng));
    s.subsample_factor = std::uniform_int_distribution<std::int64_t>(1, 8)(rng);
    s.frame_shift_ms = kind == ScoreKind::PreSoftmax ? 12.5 : 10.0;
    std::uniform_int_distribution<std::uint32_t> bits;
    std::uniform_real_distribution<float> unit(0.01f, 1.0f);
    for (Eigen::Index k = 0; k < frames; ++k) {
        if (kind == ScoreKind::PreSoftmax) {
            // Arbitrary finite bit patterns, including subnormals and -0.
            for (Eigen::Index j = 0; j < labels; ++j) {
                float v;
                do v = std::bit_cast<float>(bits(rng));
                while (!std::isfinite(v));
                s.scores(k, j) = v;
            }
        } else {
            for (Eigen::Index j = 0; j < labels; ++j) s.scores(k, j) = unit(rng);
            s.scores.row(k) /= s.scores.row(k).sum();
        }
    }
    return s;
}

std::string serialize(const PosteriorStream& s) {
    std::ostringstream os(std::ios::binary);
    write_posteriors(os, s);
    return os.str();
}

ErrorKind read_error(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    try {
        read_posteriors(is);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::IoError;  // sentinel: parsed fine
}

std::string error_message(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    try {
        read_posteriors(is);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

PosteriorStream small_stream(Eigen::Index frames) {
    PosteriorStream s;
    s.scores.resize(frames, 2);
    for (Eigen::Index k = 0; k < frames; ++k) s.scores.row(k) << 0.25f, 0.75f;
    s.subsample_factor = 4;
    return s;
}

}  // namespace

TEST_CASE("CTCP header layout") {
    PosteriorStream s = small_stream(1);
    s.blank_id = 1;
    const std::string bytes = serialize(s);
    REQUIRE(bytes.size() == kCtcpHeaderSize + 8);
    CHECK(bytes.substr(0, 4) == "CTCP");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 1);  // probabilities
    CHECK(bytes[7] == 0);
    CHECK(static_cast<unsigned char>(bytes[8]) == 1);   // num_frames
    CHECK(static_cast<unsigned char>(bytes[12]) == 2);  // num_labels
    CHECK(static_cast<unsigned char>(bytes[16]) == 1);  // blank_id
    float shift;
    std::memcpy(&shift, bytes.data() + 20, 4);
    CHECK(shift == 10.0f);
    CHECK(static_cast<unsigned char>(bytes[24]) == 4);
}

TEST_CASE("minimal file reads back one frame") {
    const PosteriorStream s = small_stream(1);
    std::istringstream is(serialize(s), std::ios::binary);
    const PosteriorStream back = read_posteriors(is);
    CHECK(back.num_frames() == 1);
    CHECK(back.num_labels() == 2);
    CHECK(back.subsample_factor == 4);
}

TEST_CASE("CTCP round trip is bit exact") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<Eigen::Index> frames(0, 40);
    std::uniform_int_distribution<Eigen::Index> labels(1, 30);
    for (int i = 0; i < 2000; ++i) {
        const ScoreKind kind = i % 2 ? ScoreKind::PreSoftmax : ScoreKind::Probabilities;
        const PosteriorStream s = random_stream(rng, frames(rng), labels(rng), kind);
        const std::string bytes = serialize(s);
        std::istringstream is(bytes, std::ios::binary);
        const PosteriorStream back = read_posteriors(is);
        REQUIRE(back.num_frames() == s.num_frames());
        REQUIRE(back.num_labels() == s.num_labels());
        REQUIRE(back.blank_id == s.blank_id);
        REQUIRE(back.subsample_factor == s.subsample_factor);
        REQUIRE(back.kind == s.kind);
        REQUIRE(back.frame_shift_ms == s.frame_shift_ms);
        REQUIRE(std::memcmp(back.scores.data(), s.scores.data(),
                            static_cast<std::size_t>(s.scores.size()) * sizeof(float)) == 0);
        REQUIRE(serialize(back) == bytes);
    }
}

TEST_CASE("bad magic") {
    std::string bytes = serialize(small_stream(2));
    bytes.replace(0, 4, "XXXX");
    CHECK(read_error(bytes) == ErrorKind::BadMagic);
}

TEST_CASE("version mismatch") {
    std::string bytes = serialize(small_stream(2));
    bytes[4] = 2;
    CHECK(read_error(bytes) == ErrorKind::VersionMismatch);
    CHECK(error_message(bytes).find("byte offset 4") != std::string::npos);
}

TEST_CASE("truncated header and rows") {
    const std::string full = serialize(small_stream(10));
    CHECK(read_error(full.substr(0, 20)) == ErrorKind::TruncatedFile);

    // Declares 10 frames, holds 9.
    const std::string nine = full.substr(0, full.size() - 8);
    CHECK(read_error(nine) == ErrorKind::TruncatedFile);
    CHECK(error_message(nine).find("row 10") != std::string::npos);

    // Half a row missing.
    CHECK(read_error(full.substr(0, full.size() - 3)) == ErrorKind::TruncatedFile);
}

TEST_CASE("row sum violation names the row") {
    std::string bytes = serialize(small_stream(5));
    const float bad = 0.9f;
    std::memcpy(bytes.data() + kCtcpHeaderSize + 3 * 8, &bad, 4);  // row 4, label 0
    CHECK(read_error(bytes) == ErrorKind::RowSumViolation);
    CHECK(error_message(bytes).find("row 4") != std::string::npos);
}

TEST_CASE("non-finite score is InvalidValue") {
    PosteriorStream s = small_stream(3);
    s.kind = ScoreKind::PreSoftmax;
    std::string bytes = serialize(s);
    const float inf = INFINITY;
    std::memcpy(bytes.data() + kCtcpHeaderSize + 8 + 4, &inf, 4);
    CHECK(read_error(bytes) == ErrorKind::InvalidValue);
}

TEST_CASE("frame reader yields frames and stops cleanly") {
    const std::string bytes = serialize(small_stream(3));
    std::istringstream is(bytes, std::ios::binary);
    PosteriorFrameReader reader(is);
    int n = 0;
    while (reader.next()) ++n;
    CHECK(n == 3);
    CHECK(reader.frames_read() == 3);

    // Header only, then EOF.
    std::istringstream header_only(serialize(small_stream(0)), std::ios::binary);
    PosteriorFrameReader empty(header_only);
    CHECK_FALSE(empty.next());
}

TEST_CASE("unknown-length stream reads until EOF") {
    std::string bytes = serialize(small_stream(4));
    const std::uint32_t unknown = kCtcpUnknownFrames;
    std::memcpy(bytes.data() + 8, &unknown, 4);
    std::istringstream is(bytes, std::ios::binary);
    const PosteriorStream s = read_posteriors(is);
    CHECK(s.num_frames() == 4);

    // A torn last frame is still an error.
    std::istringstream torn(bytes.substr(0, bytes.size() - 2), std::ios::binary);
    PosteriorFrameReader reader(torn);
    CHECK(reader.next());
    CHECK(reader.next());
    CHECK(reader.next());
    CHECK_THROWS_AS(reader.next(), Error);
}

TEST_CASE("corruption mid-stream surfaces after the good frames") {
    PosteriorStream s = small_stream(6);
    s.kind = ScoreKind::PreSoftmax;
    std::string bytes = serialize(s);
    const float nan = NAN;
    std::memcpy(bytes.data() + kCtcpHeaderSize + 4 * 8, &nan, 4);  // row 5
    std::istringstream is(bytes, std::ios::binary);
    PosteriorFrameReader reader(is);
    for (int i = 0; i < 4; ++i) REQUIRE(reader.next());
    try {
        reader.next();
        FAIL("expected InvalidValue");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidValue);
        CHECK(std::string(e.what()).find("row 5") != std::string::npos);
    }
    CHECK(reader.frames_read() == 4);
}

TEST_CASE("streamed consumption matches whole-file segmentation") {
    std::mt19937_64 rng(52);
    for (int i = 0; i < 500; ++i) {
        const testing::RandomCase c = testing::random_case(rng);
        if (c.labels.empty()) continue;
        PosteriorStream s;
        s.kind = ScoreKind::PreSoftmax;
        s.blank_id = c.cfg.blank_id;
        s.subsample_factor = c.cfg.subsample_factor;
        s.scores = PosteriorStream::Matrix::Zero(static_cast<Eigen::Index>(c.labels.size()), c.num_labels);
        for (std::size_t k = 0; k < c.labels.size(); ++k) s.scores(static_cast<Eigen::Index>(k), c.labels[k]) = 1.0f;
        const std::string bytes = serialize(s);

        std::istringstream whole(bytes, std::ios::binary);
        const PosteriorStream file = read_posteriors(whole);
        const std::int64_t total = file.feature_frames();
        const auto offline = segment_offline(greedy_decode(file), c.cfg, total);

        std::istringstream piecewise(bytes, std::ios::binary);
        PosteriorFrameReader reader(piecewise);
        OnlineSegmenter seg(c.cfg);
        std::vector<SegmentEvent> events;
        while (auto frame = reader.next()) {
            if (auto ev = seg.push(argmax_label(*frame))) events.push_back(*ev);
        }
        if (auto ev = seg.finish(total)) events.push_back(*ev);
        REQUIRE(merge_overlapping(segments_from_events(events, total)) == offline);
    }
}

TEST_CASE("seconds are printed with six decimals") {
    CHECK(format_seconds(4, 10.0) == "0.040000");
    CHECK(format_seconds(16, 10.0) == "0.160000");
    CHECK(format_seconds(0, 10.0) == "0.000000");
    CHECK(format_seconds(123456, 10.0) == "1234.560000");
    // 0.0625 ms frames land on exact half microseconds: ties go to even.
    CHECK(format_seconds(1, 0.0625) == "0.000062");
    CHECK(format_seconds(3, 0.0625) == "0.000188");
    CHECK(format_seconds(5, 0.0625) == "0.000312");
}

TEST_CASE("segment writers") {
    std::ostringstream none;
    write_segments(none, std::vector<Segment>{}, SegmentFormat::Jsonl, 10.0);
    CHECK(none.str().empty());

    const std::vector<Segment> two{{1, 3, 6, 4, 16, 2}, {2, 12, 13, 22, 28, 1}};
    std::ostringstream jsonl;
    write_segments(jsonl, two, SegmentFormat::Jsonl, 10.0);
    CHECK(jsonl.str() ==
          "{\"index\":1,\"t_start\":4,\"t_end\":16,\"start_sec\":0.040000,\"end_sec\":0.160000}\n"
          "{\"index\":2,\"t_start\":22,\"t_end\":28,\"start_sec\":0.220000,\"end_sec\":0.280000}\n");

    std::ostringstream tsv;
    write_segments(tsv, two, SegmentFormat::Tsv, 10.0);
    CHECK(tsv.str() == "1\t4\t16\t0.040000\t0.160000\n2\t22\t28\t0.220000\t0.280000\n");

    std::ostringstream ctm;
    write_segments(ctm, two, SegmentFormat::Ctm, 10.0, "utt");
    CHECK(ctm.str() == "utt 1 0.040000 0.120000 speech\nutt 1 0.220000 0.060000 speech\n");

    std::istringstream back(jsonl.str());
    const auto parsed = read_segments_jsonl(back);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].t_start == 22);
    CHECK(parsed[1].t_end == 28);

    CHECK_THROWS_AS(parse_segment_format("xml"), Error);
}

TEST_CASE("annotation json") {
    const ReferenceAnnotation ref =
        parse_annotation(R"({"duration_sec": 12.5, "regions": [[1.0, 2.5], [4, 6]], "num_labels": 8})");
    CHECK(ref.total_duration_sec == 12.5);
    REQUIRE(ref.speech_regions.size() == 2);
    CHECK(ref.speech_regions[1].first == 4.0);
    CHECK(ref.label_alphabet_size == 8);
    const ReferenceAnnotation again = parse_annotation(annotation_to_json(ref));
    CHECK(again.speech_regions == ref.speech_regions);

    CHECK_THROWS_AS(parse_annotation(R"({"duration_sec": 2, "regions": [[1.5, 1.0]]})"), Error);
    CHECK_THROWS_AS(parse_annotation(R"({"duration_sec": 2, "regions": [[1.0]]})"), Error);
    CHECK_THROWS_AS(parse_annotation("not json"), Error);
}

TEST_CASE("wav round trip") {
    WavAudio audio;
    audio.sample_rate_hz = 8000;
    for (int i = 0; i < 801; ++i) audio.samples.push_back(static_cast<std::int16_t>(i * 37 - 15000));
    std::ostringstream os(std::ios::binary);
    write_wav(os, audio);
    std::istringstream is(os.str(), std::ios::binary);
    const WavAudio back = read_wav(is);
    CHECK(back.sample_rate_hz == 8000);
    CHECK(back.samples == audio.samples);

    std::istringstream junk(std::string("RIFX0000WAVE"), std::ios::binary);
    CHECK_THROWS_AS(read_wav(junk), Error);
}
