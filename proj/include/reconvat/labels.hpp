#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace reconvat {

inline constexpr int kPitchLow = 21;    // A0
inline constexpr int kPitchHigh = 108;  // C8
inline constexpr int kNumPitches = 88;
inline constexpr double kFrameRate = 16000.0 / 512.0;  // 31.25 frames/s

struct NoteEvent {
    double onset = 0.0;    // seconds
    double offset = 0.0;   // seconds, > onset
    int pitch = 0;         // MIDI note number in [21, 108]

    bool operator==(const NoteEvent&) const = default;
};

/// Binary T x 88 matrix stored as doubles (0.0 / 1.0) so it can feed
/// straight into loss terms.
struct PianoRoll {
    Eigen::MatrixXd values;
    double frame_rate = kFrameRate;

    Eigen::Index frames() const { return values.rows(); }
};

struct OnsetRoll {
    Eigen::MatrixXd values;
    int onset_width_frames = 2;
    double frame_rate = kFrameRate;
};

namespace labels {

inline int pitch_to_column(int pitch) { return pitch - kPitchLow; }

/// Rasterizes note events: frame roll is 1 at (t, p) iff a note of pitch p
/// spans the frame's start time t/frame_rate; onset roll is 1 for
/// onset_width frames starting at each note's onset frame.
inline std::pair<PianoRoll, OnsetRoll> notes_to_rolls(const std::vector<NoteEvent>& notes,
                                                      Eigen::Index t_frames,
                                                      double frame_rate = kFrameRate,
                                                      int onset_width = 2) {
    PianoRoll roll{Eigen::MatrixXd::Zero(t_frames, kNumPitches), frame_rate};
    OnsetRoll onsets{Eigen::MatrixXd::Zero(t_frames, kNumPitches), onset_width, frame_rate};
    for (const auto& note : notes) {
        if (note.pitch < kPitchLow || note.pitch > kPitchHigh) {
            std::ostringstream msg;
            msg << "note pitch " << note.pitch << " outside [" << kPitchLow << ", "
                << kPitchHigh << "] (onset " << note.onset << "s)";
            throw std::invalid_argument(msg.str());
        }
        if (!(note.offset > note.onset))
            throw std::invalid_argument("note offset must exceed onset");
        const int col = pitch_to_column(note.pitch);
        const auto first = static_cast<Eigen::Index>(std::ceil(note.onset * frame_rate - 1e-9));
        for (Eigen::Index t = std::max<Eigen::Index>(0, first); t < t_frames; ++t) {
            double frame_start = t / frame_rate;
            if (frame_start >= note.offset) break;
            roll.values(t, col) = 1.0;
        }
        const auto onset_frame = static_cast<Eigen::Index>(std::floor(note.onset * frame_rate + 1e-9));
        for (int w = 0; w < onset_width; ++w) {
            Eigen::Index t = onset_frame + w;
            if (t >= 0 && t < t_frames) onsets.values(t, col) = 1.0;
        }
    }
    return {std::move(roll), std::move(onsets)};
}

/// Strict threshold: 1 iff entry > threshold.
inline PianoRoll binarize(const Eigen::MatrixXd& post, double threshold = 0.5,
                          double frame_rate = kFrameRate) {
    PianoRoll out;
    out.frame_rate = frame_rate;
    out.values = (post.array() > threshold).cast<double>().matrix();
    return out;
}

/// Extracts note events from a binary frame roll. When an onset roll is
/// given, a frame run only becomes a note if the onset roll is active at
/// its first frame, and a fresh onset mark mid-run ends the current note
/// and starts a new one (Onsets-and-Frames style inference).
inline std::vector<NoteEvent> rolls_to_notes(const PianoRoll& frame_roll,
                                             const OnsetRoll* onset_roll,
                                             double frame_rate = kFrameRate) {
    const auto& fr = frame_roll.values;
    if (onset_roll) {
        if (onset_roll->values.rows() != fr.rows() || onset_roll->values.cols() != fr.cols())
            throw std::invalid_argument("rolls_to_notes: frame/onset roll shape mismatch");
    }
    std::vector<NoteEvent> notes;
    const Eigen::Index t_frames = fr.rows();
    for (int col = 0; col < fr.cols(); ++col) {
        Eigen::Index run_start = -1;
        bool run_valid = false;  // had an onset at its start
        auto flush = [&](Eigen::Index end_exclusive) {
            if (run_start >= 0 && (run_valid || !onset_roll)) {
                notes.push_back(NoteEvent{run_start / frame_rate, end_exclusive / frame_rate,
                                          col + kPitchLow});
            }
            run_start = -1;
            run_valid = false;
        };
        bool prev_onset = false;
        for (Eigen::Index t = 0; t < t_frames; ++t) {
            bool active = fr(t, col) != 0.0;
            bool onset_here = onset_roll && onset_roll->values(t, col) != 0.0;
            bool fresh_onset = onset_here && !prev_onset;
            if (!active) {
                flush(t);
            } else if (run_start < 0) {
                run_start = t;
                run_valid = onset_here;
            } else if (fresh_onset) {
                // new onset inside an ongoing run: split
                flush(t);
                run_start = t;
                run_valid = true;
            }
            prev_onset = onset_here;
        }
        flush(t_frames);
    }
    // stable order: by onset, then pitch
    std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        if (a.onset != b.onset) return a.onset < b.onset;
        if (a.pitch != b.pitch) return a.pitch < b.pitch;
        return a.offset < b.offset;
    });
    return notes;
}

// ---- tsv format: header "onset\toffset\tpitch", seconds + MIDI int ----

inline std::vector<NoteEvent> read_notes_tsv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open label file: " + path);
    std::vector<NoteEvent> notes;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("onset", 0) == 0) continue;  // header
        }
        std::istringstream ls(line);
        NoteEvent n;
        if (!(ls >> n.onset >> n.offset >> n.pitch))
            throw std::runtime_error("malformed label line in " + path + ": " + line);
        notes.push_back(n);
    }
    return notes;
}

inline void write_notes_tsv(const std::string& path, const std::vector<NoteEvent>& notes) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write label file: " + path);
    os << "onset\toffset\tpitch\n";
    os.precision(9);
    for (const auto& n : notes) os << n.onset << "\t" << n.offset << "\t" << n.pitch << "\n";
    if (!os) throw std::runtime_error("label write failed: " + path);
}

}  // namespace labels
}  // namespace reconvat
