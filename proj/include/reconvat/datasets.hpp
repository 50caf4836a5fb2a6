#pragma once

#include "audio.hpp"
#include "labels.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace reconvat {

enum class SplitTag { train, validation, test };
enum class CorpusLayout { maps_like, musicnet_like };

struct CorpusManifest {
    std::vector<std::pair<std::string, std::string>> labelled;  // (audio, label)
    std::vector<std::string> unlabelled;
    SplitTag split_tag = SplitTag::train;
};

struct SyntheticSpec {
    int n_clips = 10;
    int min_notes = 4;
    int max_notes = 12;
    int min_pitch = 48;   // C3
    int max_pitch = 72;   // C5
    double duration = 6.0;  // seconds per clip
    int polyphony = 2;
    uint64_t seed = 0;
    bool harmonics = true;  // sine+harmonics vs pure sine
};

namespace datasets {

namespace fs = std::filesystem;

inline std::string label_path_for(const std::string& audio_path) {
    fs::path p(audio_path);
    p.replace_extension(".tsv");
    return p.string();
}

/// Plain-text exclusion list, one filename (stem or full name) per line.
inline std::set<std::string> read_exclusion_list(const std::string& path) {
    std::set<std::string> out;
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open exclusion list: " + path);
    std::string line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) out.insert(line);
    }
    return out;
}

/// Pairs each .wav with a sibling .tsv label when present; unlabelled
/// otherwise. Deterministic lexicographic order. MAPS-like and
/// MusicNet-like trees differ only in directory nesting, which the
/// recursive walk flattens.
inline CorpusManifest scan_corpus(const std::string& root, CorpusLayout /*layout*/,
                                  const std::set<std::string>& exclude = {}) {
    if (!fs::exists(root)) throw std::runtime_error("corpus root does not exist: " + root);
    std::vector<std::string> wavs;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        if (e.path().extension() == ".wav") {
            if (exclude.count(e.path().filename().string()) ||
                exclude.count(e.path().stem().string()))
                continue;
            wavs.push_back(e.path().string());
        }
    }
    std::sort(wavs.begin(), wavs.end());
    CorpusManifest m;
    for (const auto& w : wavs) {
        std::string lab = label_path_for(w);
        if (fs::exists(lab))
            m.labelled.emplace_back(w, lab);
        else
            m.unlabelled.push_back(w);
    }
    if (m.labelled.empty() && m.unlabelled.empty())
        throw std::runtime_error("empty corpus: " + root);
    return m;
}

// ---- manifest tsv: role \t audio_path \t label_path ----

inline void write_manifest(const std::string& path, const CorpusManifest& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write manifest: " + path);
    for (const auto& [a, l] : m.labelled) os << "labelled\t" << a << "\t" << l << "\n";
    for (const auto& a : m.unlabelled) os << "unlabelled\t" << a << "\t\n";
    if (!os) throw std::runtime_error("manifest write failed: " + path);
}

inline CorpusManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path);
    CorpusManifest m;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string role, audio, label;
        std::getline(ls, role, '\t');
        std::getline(ls, audio, '\t');
        std::getline(ls, label, '\t');
        if (role == "labelled")
            m.labelled.emplace_back(audio, label);
        else if (role == "unlabelled")
            m.unlabelled.push_back(audio);
        else
            throw std::runtime_error("bad manifest role '" + role + "' in " + path);
    }
    return m;
}

// ---- synthetic corpus ----

inline double midi_to_hz(int pitch) {
    return 440.0 * std::pow(2.0, (pitch - 69) / 12.0);
}

namespace detail {

/// Adds one windowed additive-synthesis note into the sample buffer.
inline void render_note(std::vector<double>& samples, int sample_rate, const NoteEvent& note,
                        double amplitude, bool harmonics) {
    const double f0 = midi_to_hz(note.pitch);
    const int n_harm = harmonics ? 3 : 1;
    const double ramp = 0.010;  // 10 ms attack/release
    const auto start = static_cast<long>(note.onset * sample_rate);
    const auto end = static_cast<long>(note.offset * sample_rate);
    for (long i = start; i < end && i < static_cast<long>(samples.size()); ++i) {
        if (i < 0) continue;
        double t = static_cast<double>(i) / sample_rate - note.onset;
        double t_left = note.offset - note.onset - t;
        double env = std::min({1.0, t / ramp, t_left / ramp});
        env = std::max(env, 0.0);
        double s = 0.0;
        for (int k = 1; k <= n_harm; ++k)
            s += std::sin(2.0 * std::numbers::pi * f0 * k * (t + note.onset)) / k;
        samples[static_cast<size_t>(i)] += amplitude * env * s;
    }
}

}  // namespace detail

/// Deterministic additive-synthesis clip: `polyphony` independent voices,
/// each a sequence of non-overlapping notes. Labels are exact by
/// construction.
inline std::pair<AudioClip, std::vector<NoteEvent>> synthesize_clip(const SyntheticSpec& spec,
                                                                    uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int rate = audio::kTargetRate;
    std::vector<double> samples(static_cast<size_t>(spec.duration * rate), 0.0);
    std::uniform_int_distribution<int> n_notes_dist(spec.min_notes, spec.max_notes);
    std::uniform_int_distribution<int> pitch_dist(spec.min_pitch, spec.max_pitch);
    std::uniform_real_distribution<double> dur_dist(0.25, 0.9);
    std::uniform_real_distribution<double> gap_dist(0.05, 0.4);

    const int total_notes = n_notes_dist(rng);
    const double amp = 0.5 / std::max(1, spec.polyphony);
    std::vector<NoteEvent> notes;
    for (int voice = 0; voice < spec.polyphony; ++voice) {
        int quota = total_notes / spec.polyphony + (voice < total_notes % spec.polyphony);
        double cursor = gap_dist(rng);
        for (int i = 0; i < quota; ++i) {
            NoteEvent n;
            n.pitch = pitch_dist(rng);
            n.onset = cursor;
            n.offset = cursor + dur_dist(rng);
            if (n.offset >= spec.duration - 0.05) break;
            notes.push_back(n);
            detail::render_note(samples, rate, n, amp, spec.harmonics);
            cursor = n.offset + gap_dist(rng);
        }
    }
    std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        if (a.onset != b.onset) return a.onset < b.onset;
        return a.pitch < b.pitch;
    });
    return {AudioClip{std::move(samples), rate}, std::move(notes)};
}

/// Writes n_clips WAV+tsv pairs under out_dir and returns the manifest.
/// All clips are labelled; callers strip labels to form unlabelled pools.
inline CorpusManifest generate_synthetic_corpus(const SyntheticSpec& spec,
                                                const std::string& out_dir) {
    fs::create_directories(out_dir);
    CorpusManifest m;
    for (int c = 0; c < spec.n_clips; ++c) {
        auto [clip, notes] = synthesize_clip(spec, spec.seed * 1000003ULL + c);
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%04d", c);
        std::string wav = (fs::path(out_dir) / (std::string(name) + ".wav")).string();
        std::string tsv = (fs::path(out_dir) / (std::string(name) + ".tsv")).string();
        audio::write_wav(wav, clip);
        labels::write_notes_tsv(tsv, notes);
        m.labelled.emplace_back(wav, tsv);
    }
    return m;
}

// ---- batch sampling ----

struct FrontendConfig {
    int segment_samples = audio::kSegmentSamples;
    int window = audio::kWindowSize;
    int hop = audio::kHopSize;
    int n_mels = audio::kNumMels;
    int onset_width = 2;

    Eigen::Index segment_frames() const { return (segment_samples + hop - 1) / hop; }
};

struct BatchSpec {
    int labelled_batch_size = 8;    // N_l >= 1
    int unlabelled_batch_size = 8;  // N_ul >= 0
};

struct LabelledExample {
    MelSpectrogram spec;
    PianoRoll roll;
    OnsetRoll onsets;
};

/// Draws (labelled, unlabelled) segment batches with independent seeded
/// generators, sampling clips with replacement (the one-shot regime needs
/// that). All audio is loaded and resampled once up front.
class BatchSampler {
public:
    BatchSampler(const CorpusManifest& manifest, const BatchSpec& batch,
                 const FrontendConfig& fe, uint64_t seed)
        : batch_(batch), fe_(fe), rng_labelled_(seed), rng_unlabelled_(seed ^ 0x9e3779b97f4a7c15ULL) {
        if (batch.labelled_batch_size < 1)
            throw std::invalid_argument("batch_sampler: N_l must be >= 1");
        if (manifest.labelled.empty())
            throw std::invalid_argument("batch_sampler: empty labelled pool");
        if (batch.unlabelled_batch_size > 0 && manifest.unlabelled.empty())
            throw std::invalid_argument("batch_sampler: N_ul > 0 with empty unlabelled pool");
        for (const auto& [a, l] : manifest.labelled) {
            labelled_clips_.push_back(load(a));
            labelled_notes_.push_back(labels::read_notes_tsv(l));
        }
        for (const auto& a : manifest.unlabelled) unlabelled_clips_.push_back(load(a));
    }

    std::pair<std::vector<LabelledExample>, std::vector<MelSpectrogram>> next() {
        std::vector<LabelledExample> lab;
        for (int i = 0; i < batch_.labelled_batch_size; ++i) {
            size_t c = pick(labelled_clips_.size(), rng_labelled_);
            size_t off = pick_offset(labelled_clips_[c], rng_labelled_);
            lab.push_back(make_labelled(c, off));
        }
        std::vector<MelSpectrogram> ulab;
        for (int i = 0; i < batch_.unlabelled_batch_size; ++i) {
            size_t c = pick(unlabelled_clips_.size(), rng_unlabelled_);
            size_t off = pick_offset(unlabelled_clips_[c], rng_unlabelled_);
            ulab.push_back(segment_spec(unlabelled_clips_[c], off));
        }
        return {std::move(lab), std::move(ulab)};
    }

    const FrontendConfig& frontend() const { return fe_; }

private:
    static AudioClip load(const std::string& path) {
        AudioClip c = audio::read_wav(path);
        if (c.sample_rate != audio::kTargetRate) c = audio::resample(c, audio::kTargetRate);
        return c;
    }

    static size_t pick(size_t n, std::mt19937_64& rng) {
        return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
    }

    size_t pick_offset(const AudioClip& clip, std::mt19937_64& rng) const {
        size_t len = static_cast<size_t>(fe_.segment_samples);
        if (clip.samples.size() <= len) return 0;
        return std::uniform_int_distribution<size_t>(0, clip.samples.size() - len)(rng);
    }

    MelSpectrogram segment_spec(const AudioClip& clip, size_t offset) const {
        std::vector<double> seg(static_cast<size_t>(fe_.segment_samples), 0.0);
        size_t avail = clip.samples.size() > offset ? clip.samples.size() - offset : 0;
        std::copy_n(clip.samples.begin() + static_cast<long>(offset),
                    std::min(avail, seg.size()), seg.begin());
        AudioClip s{std::move(seg), clip.sample_rate};
        return audio::log_normalize(audio::mel_spectrogram(s, fe_.window, fe_.hop, fe_.n_mels));
    }

    LabelledExample make_labelled(size_t clip_idx, size_t offset) const {
        LabelledExample ex;
        ex.spec = segment_spec(labelled_clips_[clip_idx], offset);
        double off_sec = static_cast<double>(offset) / audio::kTargetRate;
        double seg_sec = static_cast<double>(fe_.segment_samples) / audio::kTargetRate;
        double frame_rate = static_cast<double>(audio::kTargetRate) / fe_.hop;
        std::vector<NoteEvent> shifted;
        for (NoteEvent n : labelled_notes_[clip_idx]) {
            n.onset -= off_sec;
            n.offset -= off_sec;
            if (n.offset <= 0.0 || n.onset >= seg_sec) continue;
            shifted.push_back(n);
        }
        auto [roll, onsets] =
            labels::notes_to_rolls(shifted, fe_.segment_frames(), frame_rate, fe_.onset_width);
        ex.roll = std::move(roll);
        ex.onsets = std::move(onsets);
        return ex;
    }

    BatchSpec batch_;
    FrontendConfig fe_;
    std::vector<AudioClip> labelled_clips_;
    std::vector<std::vector<NoteEvent>> labelled_notes_;
    std::vector<AudioClip> unlabelled_clips_;
    std::mt19937_64 rng_labelled_;
    std::mt19937_64 rng_unlabelled_;
};

}  // namespace datasets
}  // namespace reconvat
