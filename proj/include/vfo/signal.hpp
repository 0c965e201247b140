#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfo {

enum class Vowel { a, i, u, other };

Vowel vowel_from_string(const std::string& s);
std::string to_string(Vowel v);

// 0 = negative, 1 = positive, -1 = unlabeled.
using Label = int;

struct AudioClip {
    std::vector<double> samples;  // normalized to [-1, 1]
    double sample_rate = 0.0;
    std::string speaker_id;
    Label label = -1;
    Vowel vowel = Vowel::other;
    bool resampled = false;

    double rms() const;
};

// Metadata a segment carries about its source clip.
struct SourceInfo {
    std::string speaker_id;
    Label label = -1;
    Vowel vowel = Vowel::other;
    double sample_rate = 0.0;
    double clip_rms = 0.0;
};

struct Segment {
    std::vector<double> samples;
    std::size_t start_index = 0;
    double duration_s = 0.0;
    SourceInfo source;
};

class AudioError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class UnreadableFileError : public AudioError {
  public:
    explicit UnreadableFileError(const std::string& path)
        : AudioError("cannot read WAV file: " + path) {}
};
class MultiChannelError : public AudioError {
  public:
    explicit MultiChannelError(const std::string& path)
        : AudioError("multi-channel WAV not supported: " + path) {}
};
class EmptyAudioError : public AudioError {
  public:
    explicit EmptyAudioError(const std::string& path)
        : AudioError("zero-length audio: " + path) {}
};
class SegmentationError : public AudioError {
    using AudioError::AudioError;
};

// Load a mono PCM WAV (8- or 16-bit), scale to [-1, 1], resample to
// expected_rate by linear interpolation if the file rate differs.
AudioClip load_clip(const std::string& path, double expected_rate);

// Linear-interpolation resampler.
std::vector<double> resample_linear(const std::vector<double>& x, double from_rate,
                                    double to_rate);

// Contiguous windows of win_s seconds at hop_s stride; trailing partials dropped.
std::vector<Segment> segment_clip(const AudioClip& clip, double win_s, double hop_s);

// Energy + zero-crossing gate. True iff segment RMS >= energy_floor * clip RMS
// and zero-crossing rate <= zcr_ceiling.
bool is_voiced(const Segment& seg, double energy_floor, double zcr_ceiling);

double rms(const std::vector<double>& x);
double zero_crossing_rate(const std::vector<double>& x);

// Manifest: CSV with header `path, speaker_id, label, vowel`.
struct ManifestEntry {
    std::string path;
    std::string speaker_id;
    Label label = -1;
    Vowel vowel = Vowel::other;
};

class ManifestError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace vfo
