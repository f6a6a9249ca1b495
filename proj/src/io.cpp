// Copyright (C) 2026 The ctcseg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "ctcseg/io.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ctcseg {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'T', 'C', 'P'};

template <typename T>
void put_le(char* dst, T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        dst[i] = static_cast<char>(u & 0xFF);
        u = static_cast<U>(u >> 8);
    }
}

template <typename T>
T get_le(const char* src) {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        u = static_cast<U>(u | (static_cast<U>(static_cast<unsigned char>(src[i])) << (8 * i)));
    }
    return static_cast<T>(u);
}

void put_f32(char* dst, float value) { put_le<std::uint32_t>(dst, std::bit_cast<std::uint32_t>(value)); }
float get_f32(const char* src) { return std::bit_cast<float>(get_le<std::uint32_t>(src)); }

std::string row_location(std::int64_t row, std::int64_t num_labels) {
    const std::int64_t offset = static_cast<std::int64_t>(kCtcpHeaderSize) + (row - 1) * num_labels * 4;
    return "row " + std::to_string(row) + " (byte offset " + std::to_string(offset) + ")";
}

void check_sink(const std::ostream& os, const char* what) {
    if (!os) throw Error(ErrorKind::SinkError, std::string("write failed: ") + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
    return out;
}

}  // namespace

CtcpHeader header_for(const PosteriorStream& stream) {
    validate(stream);
    if (stream.num_frames() >= static_cast<std::int64_t>(kCtcpUnknownFrames)) {
        throw Error(ErrorKind::InvalidArgument, "too many frames for CTCP");
    }
    CtcpHeader header;
    header.kind = stream.kind;
    header.num_frames = static_cast<std::uint32_t>(stream.num_frames());
    header.num_labels = static_cast<std::uint32_t>(stream.num_labels());
    header.blank_id = static_cast<std::uint32_t>(stream.blank_id);
    header.frame_shift_ms = static_cast<float>(stream.frame_shift_ms);
    header.subsample_factor = static_cast<std::uint32_t>(stream.subsample_factor);
    return header;
}

void write_ctcp_header(std::ostream& os, const CtcpHeader& header) {
    std::array<char, kCtcpHeaderSize> buf{};
    std::memcpy(buf.data(), kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(buf.data() + 4, header.version);
    buf[6] = header.kind == ScoreKind::Probabilities ? 1 : 0;
    buf[7] = 0;
    put_le<std::uint32_t>(buf.data() + 8, header.num_frames);
    put_le<std::uint32_t>(buf.data() + 12, header.num_labels);
    put_le<std::uint32_t>(buf.data() + 16, header.blank_id);
    put_f32(buf.data() + 20, header.frame_shift_ms);
    put_le<std::uint32_t>(buf.data() + 24, header.subsample_factor);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    check_sink(os, "CTCP header");
}

CtcpHeader read_ctcp_header(std::istream& is) {
    std::array<char, kCtcpHeaderSize> buf{};
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(is.gcount());
    if (got >= 4 && std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
        throw Error(ErrorKind::BadMagic, "expected \"CTCP\" at byte offset 0");
    }
    if (got < buf.size()) {
        throw Error(ErrorKind::TruncatedFile, "header ends at byte offset " + std::to_string(got));
    }
    CtcpHeader header;
    header.version = get_le<std::uint16_t>(buf.data() + 4);
    if (header.version != kCtcpVersion) {
        throw Error(ErrorKind::VersionMismatch, "version " + std::to_string(header.version) +
                                                    " at byte offset 4, expected " +
                                                    std::to_string(kCtcpVersion));
    }
    header.kind = (buf[6] & 1) ? ScoreKind::Probabilities : ScoreKind::PreSoftmax;
    header.num_frames = get_le<std::uint32_t>(buf.data() + 8);
    header.num_labels = get_le<std::uint32_t>(buf.data() + 12);
    header.blank_id = get_le<std::uint32_t>(buf.data() + 16);
    header.frame_shift_ms = get_f32(buf.data() + 20);
    header.subsample_factor = get_le<std::uint32_t>(buf.data() + 24);
    if (header.num_labels == 0) throw Error(ErrorKind::InvalidValue, "num_labels is 0 (byte offset 12)");
    if (header.blank_id >= header.num_labels) {
        throw Error(ErrorKind::InvalidValue, "blank_id >= num_labels (byte offset 16)");
    }
    if (!(std::isfinite(header.frame_shift_ms) && header.frame_shift_ms > 0.0f)) {
        throw Error(ErrorKind::InvalidValue, "frame_shift_ms must be positive (byte offset 20)");
    }
    if (header.subsample_factor == 0) {
        throw Error(ErrorKind::InvalidValue, "subsample_factor is 0 (byte offset 24)");
    }
    return header;
}

void write_posteriors(std::ostream& os, const PosteriorStream& stream) {
    write_ctcp_header(os, header_for(stream));
    const auto row_bytes = static_cast<std::size_t>(stream.num_labels()) * 4;
    std::vector<char> buf(row_bytes);
    for (Eigen::Index k = 0; k < stream.scores.rows(); ++k) {
        const float* row = stream.scores.row(k).data();
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(buf.data(), row, row_bytes);
        } else {
            for (Eigen::Index j = 0; j < stream.scores.cols(); ++j) put_f32(buf.data() + 4 * j, row[j]);
        }
        os.write(buf.data(), static_cast<std::streamsize>(row_bytes));
    }
    check_sink(os, "CTCP rows");
}

void write_posterior_file(const std::filesystem::path& path, const PosteriorStream& stream) {
    std::ofstream out = open_output(path);
    write_posteriors(out, stream);
    out.flush();
    check_sink(out, path.string().c_str());
}

PosteriorFrameReader::PosteriorFrameReader(std::istream& is)
    : is_(is), header_(read_ctcp_header(is)) {
    raw_.resize(static_cast<std::size_t>(header_.num_labels) * 4);
    frame_.resize(header_.num_labels);
}

std::optional<std::span<const float>> PosteriorFrameReader::next() {
    if (header_.length_known() && frames_read_ == static_cast<std::int64_t>(header_.num_frames)) {
        return std::nullopt;
    }
    const std::int64_t row = frames_read_ + 1;
    const std::int64_t num_labels = header_.num_labels;
    is_.read(raw_.data(), static_cast<std::streamsize>(raw_.size()));
    const auto got = static_cast<std::size_t>(is_.gcount());
    if (got == 0 && !header_.length_known()) return std::nullopt;
    if (got < raw_.size()) {
        throw Error(ErrorKind::TruncatedFile,
                    "stream ends inside " + row_location(row, num_labels) + " after " +
                        std::to_string(frames_read_) + " complete frames");
    }

    double sum = 0.0;
    bool in_range = true;
    for (std::size_t j = 0; j < frame_.size(); ++j) {
        const float v = get_f32(raw_.data() + 4 * j);
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::InvalidValue,
                        "non-finite score in " + row_location(row, num_labels) + ", label " + std::to_string(j));
        }
        frame_[j] = v;
        sum += v;
        in_range = in_range && v >= -1e-4f && v <= 1.0f + 1e-4f;
    }
    if (header_.kind == ScoreKind::Probabilities && (!in_range || std::abs(sum - 1.0) > 1e-4)) {
        std::ostringstream msg;
        msg << row_location(row, num_labels) << " sums to " << sum;
        throw Error(ErrorKind::RowSumViolation, msg.str());
    }
    ++frames_read_;
    return std::span<const float>(frame_);
}

PosteriorStream read_posteriors(std::istream& is) {
    PosteriorFrameReader reader(is);
    const CtcpHeader& header = reader.header();
    PosteriorStream stream;
    stream.blank_id = static_cast<LabelId>(header.blank_id);
    stream.frame_shift_ms = header.frame_shift_ms;
    stream.subsample_factor = header.subsample_factor;
    stream.kind = header.kind;

    const auto num_labels = static_cast<Eigen::Index>(header.num_labels);
    if (header.length_known()) {
        stream.scores.resize(header.num_frames, num_labels);
        Eigen::Index k = 0;
        while (auto frame = reader.next()) {
            std::memcpy(stream.scores.row(k++).data(), frame->data(), frame->size_bytes());
        }
        return stream;
    }
    std::vector<float> flat;
    while (auto frame = reader.next()) flat.insert(flat.end(), frame->begin(), frame->end());
    stream.scores = Eigen::Map<const PosteriorStream::Matrix>(
        flat.data(), static_cast<Eigen::Index>(flat.size()) / num_labels, num_labels);
    return stream;
}

PosteriorStream read_posterior_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_posteriors(in);
}

SegmentFormat parse_segment_format(std::string_view name) {
    if (name == "jsonl") return SegmentFormat::Jsonl;
    if (name == "ctm") return SegmentFormat::Ctm;
    if (name == "tsv") return SegmentFormat::Tsv;
    throw Error(ErrorKind::InvalidArgument, "unknown segment format '" + std::string(name) + "'");
}

std::string format_seconds(std::int64_t t, double frame_shift_ms) {
    // microseconds = t * shift_ms * 1000; nearbyint rounds ties to even in the default mode
    const long double micros_exact =
        static_cast<long double>(t) * static_cast<long double>(frame_shift_ms) * 1000.0L;
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const auto micros = static_cast<long long>(std::nearbyintl(micros_exact));
    std::fesetround(saved);

    const bool negative = micros < 0;
    const unsigned long long mag = negative ? static_cast<unsigned long long>(-micros)
                                            : static_cast<unsigned long long>(micros);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%06llu", negative ? "-" : "", mag / 1000000ULL, mag % 1000000ULL);
    return buf;
}

void write_segment(std::ostream& os, const Segment& seg, SegmentFormat format, double frame_shift_ms,
                   std::string_view stream_name) {
    const std::string start = format_seconds(seg.t_start, frame_shift_ms);
    const std::string end = format_seconds(seg.t_end, frame_shift_ms);
    switch (format) {
    case SegmentFormat::Jsonl:
        os << "{\"index\":" << seg.index << ",\"t_start\":" << seg.t_start << ",\"t_end\":" << seg.t_end
           << ",\"start_sec\":" << start << ",\"end_sec\":" << end << "}\n";
        break;
    case SegmentFormat::Ctm:
        os << stream_name << " 1 " << start << ' '
           << format_seconds(seg.t_end - seg.t_start, frame_shift_ms) << " speech\n";
        break;
    case SegmentFormat::Tsv:
        os << seg.index << '\t' << seg.t_start << '\t' << seg.t_end << '\t' << start << '\t' << end << '\n';
        break;
    }
    check_sink(os, "segment");
}

void write_segments(std::ostream& os, std::span<const Segment> segments, SegmentFormat format,
                    double frame_shift_ms, std::string_view stream_name) {
    for (const Segment& seg : segments) write_segment(os, seg, format, frame_shift_ms, stream_name);
}

void write_event(std::ostream& os, const SegmentEvent& event, double frame_shift_ms) {
    const Segment& seg = event.segment;
    os << "{\"event\":\"" << to_string(event.kind) << "\",\"step\":" << event.emitted_at_step
       << ",\"index\":" << seg.index << ",\"k_first\":" << seg.k_first_nonblank
       << ",\"t_start\":" << seg.t_start << ",\"start_sec\":" << format_seconds(seg.t_start, frame_shift_ms);
    if (event.kind != EventKind::Open) {
        os << ",\"k_last\":" << seg.k_last_nonblank << ",\"t_end\":" << seg.t_end
           << ",\"end_sec\":" << format_seconds(seg.t_end, frame_shift_ms);
    }
    os << "}\n";
    check_sink(os, "event");
}

std::vector<Segment> read_segments_jsonl(std::istream& is) {
    std::vector<Segment> out;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            Segment seg;
            seg.index = obj.at("index").get<std::int64_t>();
            seg.t_start = obj.at("t_start").get<std::int64_t>();
            seg.t_end = obj.at("t_end").get<std::int64_t>();
            if (seg.t_start > seg.t_end) throw Error(ErrorKind::InvalidValue, "t_start > t_end");
            out.push_back(seg);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::InvalidValue, "segment line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

ReferenceAnnotation parse_annotation(std::string_view json_text) {
    ReferenceAnnotation ref;
    try {
        const auto doc = nlohmann::json::parse(json_text);
        ref.total_duration_sec = doc.at("duration_sec").get<double>();
        for (const auto& region : doc.at("regions")) {
            if (!region.is_array() || region.size() != 2) {
                throw Error(ErrorKind::InvalidAnnotation, "each region must be [start, end]");
            }
            ref.speech_regions.emplace_back(region[0].get<double>(), region[1].get<double>());
        }
        if (doc.contains("num_labels")) ref.label_alphabet_size = doc["num_labels"].get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidAnnotation, e.what());
    }
    ref.validate();
    return ref;
}

ReferenceAnnotation read_annotation_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_annotation(text.str());
}

std::string annotation_to_json(const ReferenceAnnotation& ref) {
    nlohmann::ordered_json doc;
    doc["duration_sec"] = ref.total_duration_sec;
    doc["regions"] = nlohmann::json::array();
    for (const auto& [s, e] : ref.speech_regions) doc["regions"].push_back({s, e});
    doc["num_labels"] = ref.label_alphabet_size;
    return doc.dump();
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["frame_precision"] = report.frame_precision;
    doc["frame_recall"] = report.frame_recall;
    doc["frame_f1"] = report.frame_f1;
    doc["boundary_mae_frames"] = report.boundary_mae_frames;
    doc["n_hyp_segments"] = report.n_hyp_segments;
    doc["n_ref_segments"] = report.n_ref_segments;
    doc["n_matched"] = report.n_matched;
    doc["rtf"] = report.rtf;
    return doc.dump();
}

WavAudio read_wav(std::istream& is) {
    std::array<char, 12> riff{};
    is.read(riff.data(), 12);
    if (is.gcount() != 12 || std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
        throw Error(ErrorKind::BadWav, "not a RIFF/WAVE file");
    }
    WavAudio audio;
    bool have_fmt = false;
    std::array<char, 8> chunk{};
    while (is.read(chunk.data(), 8) && is.gcount() == 8) {
        const auto size = get_le<std::uint32_t>(chunk.data() + 4);
        const std::string id(chunk.data(), 4);
        if (id == "fmt ") {
            std::vector<char> fmt(size);
            is.read(fmt.data(), size);
            if (size < 16 || static_cast<std::uint32_t>(is.gcount()) != size) {
                throw Error(ErrorKind::BadWav, "short fmt chunk");
            }
            const auto format = get_le<std::uint16_t>(fmt.data());
            const auto channels = get_le<std::uint16_t>(fmt.data() + 2);
            const auto bits = get_le<std::uint16_t>(fmt.data() + 14);
            if (format != 1 || channels != 1 || bits != 16) {
                throw Error(ErrorKind::BadWav, "only 16-bit mono PCM is supported");
            }
            audio.sample_rate_hz = static_cast<int>(get_le<std::uint32_t>(fmt.data() + 4));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw Error(ErrorKind::BadWav, "data chunk before fmt chunk");
            std::vector<char> data(size);
            is.read(data.data(), size);
            const auto got = static_cast<std::size_t>(is.gcount());
            audio.samples.resize(got / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                audio.samples[i] = get_le<std::int16_t>(data.data() + 2 * i);
            }
            return audio;
        } else {
            is.ignore(size);
        }
        if (size & 1) is.ignore(1);
    }
    throw Error(ErrorKind::BadWav, "no data chunk");
}

WavAudio read_wav_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    return read_wav(in);
}

void write_wav(std::ostream& os, const WavAudio& audio) {
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    std::vector<char> buf(44 + data_bytes);
    std::memcpy(buf.data(), "RIFF", 4);
    put_le<std::uint32_t>(buf.data() + 4, 36 + data_bytes);
    std::memcpy(buf.data() + 8, "WAVEfmt ", 8);
    put_le<std::uint32_t>(buf.data() + 16, 16);
    put_le<std::uint16_t>(buf.data() + 20, 1);
    put_le<std::uint16_t>(buf.data() + 22, 1);
    put_le<std::uint32_t>(buf.data() + 24, static_cast<std::uint32_t>(audio.sample_rate_hz));
    put_le<std::uint32_t>(buf.data() + 28, static_cast<std::uint32_t>(audio.sample_rate_hz) * 2);
    put_le<std::uint16_t>(buf.data() + 32, 2);
    put_le<std::uint16_t>(buf.data() + 34, 16);
    std::memcpy(buf.data() + 36, "data", 4);
    put_le<std::uint32_t>(buf.data() + 40, data_bytes);
    for (std::size_t i = 0; i < audio.samples.size(); ++i) put_le<std::int16_t>(buf.data() + 44 + 2 * i, audio.samples[i]);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    check_sink(os, "wav");
}

void write_wav_file(const std::filesystem::path& path, const WavAudio& audio) {
    std::ofstream out = open_output(path);
    write_wav(out, audio);
}

}  // namespace ctcseg
