#include "vfo/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vfo {

Vowel vowel_from_string(const std::string& s) {
    if (s == "a") return Vowel::a;
    if (s == "i") return Vowel::i;
    if (s == "u") return Vowel::u;
    return Vowel::other;
}

std::string to_string(Vowel v) {
    switch (v) {
        case Vowel::a: return "a";
        case Vowel::i: return "i";
        case Vowel::u: return "u";
        default: return "other";
    }
}

double rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

double zero_crossing_rate(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
        if ((x[i - 1] >= 0.0) != (x[i] >= 0.0)) ++crossings;
    return static_cast<double>(crossings) / static_cast<double>(x.size() - 1);
}

double AudioClip::rms() const { return vfo::rms(samples); }

namespace {

struct Reader {
    std::ifstream f;
    const std::string& path;

    explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
        if (!f) throw UnreadableFileError(p);
    }
    void read(void* dst, std::size_t n) {
        f.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (!f) throw UnreadableFileError(path);
    }
    std::uint32_t u32() {
        unsigned char b[4];
        read(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint16_t u16() {
        unsigned char b[2];
        read(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    void skip(std::uint32_t n) {
        f.seekg(n, std::ios::cur);
        if (!f) throw UnreadableFileError(path);
    }
};

}  // namespace

std::vector<double> resample_linear(const std::vector<double>& x, double from_rate,
                                    double to_rate) {
    if (x.empty() || from_rate == to_rate) return x;
    const double ratio = from_rate / to_rate;
    const std::size_t n_out =
        static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - 1) / ratio)) + 1;
    std::vector<double> out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const std::size_t j = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(j);
        out[i] = (j + 1 < x.size()) ? (1.0 - frac) * x[j] + frac * x[j + 1] : x[j];
    }
    return out;
}

AudioClip load_clip(const std::string& path, double expected_rate) {
    Reader r(path);
    char tag[4];
    r.read(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw UnreadableFileError(path);
    r.u32();  // riff size
    r.read(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw UnreadableFileError(path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::vector<unsigned char> data;

    while (r.f.peek() != EOF) {
        r.read(tag, 4);
        const std::uint32_t size = r.u32();
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format = r.u16();
            channels = r.u16();
            rate = r.u32();
            r.u32();  // byte rate
            r.u16();  // block align
            bits = r.u16();
            if (size > 16) r.skip(size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            if (size > 0) r.read(data.data(), size);
            break;
        } else {
            r.skip(size + (size & 1));
        }
    }
    if (!have_fmt || format != 1 || (bits != 8 && bits != 16))
        throw UnreadableFileError(path);
    if (channels != 1) throw MultiChannelError(path);
    if (data.empty()) throw EmptyAudioError(path);

    AudioClip clip;
    if (bits == 16) {
        clip.samples.reserve(data.size() / 2);
        for (std::size_t i = 0; i + 1 < data.size(); i += 2) {
            const std::int16_t v =
                static_cast<std::int16_t>(data[i] | (data[i + 1] << 8));
            clip.samples.push_back(static_cast<double>(v) / 32768.0);
        }
    } else {
        clip.samples.reserve(data.size());
        for (unsigned char b : data)
            clip.samples.push_back((static_cast<double>(b) - 128.0) / 128.0);
    }
    if (clip.samples.empty()) throw EmptyAudioError(path);

    clip.sample_rate = static_cast<double>(rate);
    if (clip.sample_rate != expected_rate) {
        clip.samples = resample_linear(clip.samples, clip.sample_rate, expected_rate);
        clip.sample_rate = expected_rate;
        clip.resampled = true;
    }
    for (double v : clip.samples)
        if (!std::isfinite(v)) throw UnreadableFileError(path);
    return clip;
}

std::vector<Segment> segment_clip(const AudioClip& clip, double win_s, double hop_s) {
    if (!(win_s > hop_s && hop_s > 0.0))
        throw SegmentationError("require win_s > hop_s > 0");
    const std::size_t w =
        static_cast<std::size_t>(std::lround(win_s * clip.sample_rate));
    const std::size_t hop =
        static_cast<std::size_t>(std::lround(hop_s * clip.sample_rate));
    if (w == 0 || hop == 0) throw SegmentationError("window or hop rounds to zero samples");
    if (clip.samples.size() < w) throw SegmentationError("clip shorter than one window");

    SourceInfo src{clip.speaker_id, clip.label, clip.vowel, clip.sample_rate, clip.rms()};
    std::vector<Segment> segs;
    for (std::size_t start = 0; start + w <= clip.samples.size(); start += hop) {
        Segment s;
        s.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                         clip.samples.begin() + static_cast<std::ptrdiff_t>(start + w));
        s.start_index = start;
        s.duration_s = static_cast<double>(w) / clip.sample_rate;
        s.source = src;
        segs.push_back(std::move(s));
    }
    return segs;
}

bool is_voiced(const Segment& seg, double energy_floor, double zcr_ceiling) {
    const double seg_rms = rms(seg.samples);
    if (seg_rms < energy_floor * seg.source.clip_rms) return false;
    if (seg_rms == 0.0) return false;
    return zero_crossing_rate(seg.samples) <= zcr_ceiling;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = (b == std::string::npos) ? "" : f.substr(b, e - b + 1);
    }
    return fields;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ManifestError("cannot open manifest: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ManifestError("empty manifest: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "path" || header[1] != "speaker_id" ||
        header[2] != "label" || header[3] != "vowel")
        throw ManifestError("manifest header must be: path, speaker_id, label, vowel");

    std::vector<ManifestEntry> entries;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 4)
            throw ManifestError("manifest line " + std::to_string(lineno) +
                                ": expected 4 fields");
        ManifestEntry e;
        e.path = fields[0];
        e.speaker_id = fields[1];
        if (fields[2].empty())
            e.label = -1;
        else if (fields[2] == "0" || fields[2] == "1")
            e.label = fields[2][0] - '0';
        else
            throw ManifestError("manifest line " + std::to_string(lineno) +
                                ": label must be 0, 1 or empty");
        e.vowel = vowel_from_string(fields[3]);
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace vfo
