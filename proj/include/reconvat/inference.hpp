#pragma once

#include "audio.hpp"
#include "datasets.hpp"
#include "labels.hpp"
#include "model.hpp"

#include <vector>

namespace reconvat {
namespace inference {

struct Posteriors {
    Eigen::MatrixXd post;   // T x 88
    Eigen::MatrixXd onset;  // T x 88, empty when single-channel
};

/// Runs the transcriber over a full-length normalized spectrogram in
/// abutting chunk_frames windows; the tail window is zero-padded and its
/// output cropped back.
inline Posteriors transcribe_windows(const Eigen::MatrixXd& spec, ParamStore& params,
                                     const TranscriberConfig& cfg, Eigen::Index chunk_frames) {
    const Eigen::Index t_total = spec.rows();
    Posteriors out;
    out.post = Eigen::MatrixXd::Zero(t_total, cfg.n_pitches);
    if (cfg.two_channel) out.onset = Eigen::MatrixXd::Zero(t_total, cfg.n_pitches);
    for (Eigen::Index start = 0; start < t_total; start += chunk_frames) {
        Eigen::Index n = std::min(chunk_frames, t_total - start);
        Eigen::MatrixXd chunk = Eigen::MatrixXd::Zero(chunk_frames, spec.cols());
        chunk.topRows(n) = spec.middleRows(start, n);
        Graph g;
        ModelOutput mo = model::transcribe_forward(g, g.constant(chunk), params, cfg, false);
        out.post.middleRows(start, n) = g.value(mo.posteriorgram).topRows(n);
        if (cfg.two_channel)
            out.onset.middleRows(start, n) = g.value(mo.onset).topRows(n);
    }
    return out;
}

/// Full pipeline: audio -> posteriorgrams -> thresholded rolls -> notes,
/// with onset filtering when the model has an onset channel.
inline std::vector<NoteEvent> transcribe_clip(const AudioClip& clip, ParamStore& params,
                                              const TranscriberConfig& cfg,
                                              const datasets::FrontendConfig& fe,
                                              double threshold = 0.5) {
    AudioClip at16 =
        clip.sample_rate == audio::kTargetRate ? clip : audio::resample(clip, audio::kTargetRate);
    MelSpectrogram spec =
        audio::log_normalize(audio::mel_spectrogram(at16, fe.window, fe.hop, fe.n_mels));
    double frame_rate = static_cast<double>(audio::kTargetRate) / fe.hop;
    Posteriors p = transcribe_windows(spec.values, params, cfg, fe.segment_frames());
    PianoRoll roll = labels::binarize(p.post, threshold, frame_rate);
    if (cfg.two_channel) {
        PianoRoll onset_bin = labels::binarize(p.onset, threshold, frame_rate);
        OnsetRoll onsets{onset_bin.values, 1, frame_rate};
        return labels::rolls_to_notes(roll, &onsets, frame_rate);
    }
    return labels::rolls_to_notes(roll, nullptr, frame_rate);
}

}  // namespace inference
}  // namespace reconvat
