#pragma once

#include "autodiff.hpp"
#include "datasets.hpp"
#include "inference.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "vat.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace reconvat {

enum class ReconLossKind { bce, mse };

struct ObjectiveConfig {
    double alpha = 1.0;
    bool use_reconstruction = true;
    bool use_vat = true;
    bool use_onset = true;  // onset terms in supervised loss and divergence
    ReconLossKind recon_loss_kind = ReconLossKind::bce;

    void validate() const {
        if (alpha < 0.0) throw std::invalid_argument("objective: alpha must be >= 0");
    }
};

namespace training {

inline constexpr double kBaseLearningRate = 1e-3;
inline constexpr double kDecayFactor = 0.98;
inline constexpr long kDecayInterval = 1000;
inline constexpr int kIterationsPerEpoch = 10;

/// lr(it) = 0.001 * 0.98^floor(it/1000)
inline double learning_rate(long iteration) {
    return kBaseLearningRate *
           std::pow(kDecayFactor, static_cast<double>(iteration / kDecayInterval));
}

// ---- optimizer ----

struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;

    void step(ParamStore& store, double lr) {
        ++step_count;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (Param* p : store.all()) {
            p->m = beta1 * p->m + (1.0 - beta1) * p->grad;
            p->v = (beta2 * p->v.array() + (1.0 - beta2) * p->grad.array().square()).matrix();
            p->value.array() -=
                lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + eps);
        }
    }
};

// ---- loss terms ----

/// Supervised loss: BCE of both transcription passes against the labels.
/// `second` may be null when the reconstruction branch is disabled.
inline Var supervised_loss(Graph& g, const ModelOutput& first, const ModelOutput* second,
                           Var label_roll, Var label_onsets, bool use_onset) {
    if (use_onset && (first.onset < 0 || (second && second->onset < 0)))
        throw std::invalid_argument("supervised_loss: onset term requested without onset channel");
    if (use_onset && label_onsets < 0)
        throw std::invalid_argument("supervised_loss: missing onset labels");
    auto pass_loss = [&](const ModelOutput& mo) {
        Var l = g.bce_mean(label_roll, mo.posteriorgram, vat::kProbClamp);
        if (use_onset) l = g.add(l, g.bce_mean(label_onsets, mo.onset, vat::kProbClamp));
        return l;
    };
    Var l = pass_loss(first);
    if (second) l = g.add(l, pass_loss(*second));
    return l;
}

/// Unsupervised loss: arithmetic mean of the two LDS terms.
inline double unsupervised_loss(double lds_l, double lds_ul) {
    return 0.5 * (lds_l + lds_ul);
}

inline Var reconstruction_loss(Graph& g, Var recon, Var spec, ReconLossKind kind) {
    return kind == ReconLossKind::bce ? g.bce_mean(spec, recon, vat::kProbClamp)
                                      : g.mse_mean(recon, spec);
}

// ---- trainer ----

struct LossBreakdown {
    double total = 0.0;
    double l_l = 0.0;
    double l_ul = 0.0;
    double l_recon = 0.0;
    double lds_l = 0.0;
    double lds_ul = 0.0;
    int forward_passes = 0;  // framework branches: L_l, LDS_l, LDS_ul
};

struct TrainerState {
    TranscriberConfig model_cfg;
    ObjectiveConfig objective;
    VatConfig vat_cfg;
    ParamStore theta;
    ParamStore phi;
    Adam opt_theta;
    Adam opt_phi;
    long iteration = 0;
    std::mt19937_64 rng;

    long epoch() const { return iteration / kIterationsPerEpoch; }

    static TrainerState fresh(const TranscriberConfig& mcfg, const ObjectiveConfig& obj,
                              const VatConfig& vcfg, uint64_t seed) {
        TrainerState st;
        st.model_cfg = mcfg;
        st.objective = obj;
        st.vat_cfg = vcfg;
        st.rng.seed(seed);
        model::init_transcriber(st.theta, mcfg, seed);
        model::init_reconstructor(st.phi, mcfg, seed ^ 0xc2b2ae3d27d4eb4fULL);
        return st;
    }
};

/// One iteration of the three-branch objective: supervised pass (with
/// reconstruction second pass), LDS on the labelled batch, LDS on the
/// unlabelled batch. Applies a single Adam update to theta and phi.
inline LossBreakdown train_step(TrainerState& st,
                                const std::vector<datasets::LabelledExample>& labelled,
                                const std::vector<MelSpectrogram>& unlabelled) {
    if (labelled.empty()) throw std::invalid_argument("train_step: empty labelled batch");
    st.objective.validate();
    const bool onset_terms = st.objective.use_onset && st.model_cfg.two_channel;

    Graph g;
    LossBreakdown out;

    // branch 1: supervised + reconstruction
    Var l_l = -1, l_recon = -1;
    for (const auto& ex : labelled) {
        Var x = g.constant(ex.spec.values);
        Var roll = g.constant(ex.roll.values);
        Var onsets = onset_terms ? g.constant(ex.onsets.values) : -1;
        ModelOutput first = model::transcribe_forward(g, x, st.theta, st.model_cfg, true);
        Var sample_ll;
        if (st.objective.use_reconstruction) {
            Var recon =
                model::reconstruct_forward(g, first.posteriorgram, st.phi, st.model_cfg, true);
            ModelOutput second = model::second_pass(g, recon, st.theta, st.model_cfg, true);
            sample_ll = supervised_loss(g, first, &second, roll, onsets, onset_terms);
            Var rl = reconstruction_loss(g, recon, x, st.objective.recon_loss_kind);
            l_recon = l_recon < 0 ? rl : g.add(l_recon, rl);
        } else {
            sample_ll = supervised_loss(g, first, nullptr, roll, onsets, onset_terms);
        }
        l_l = l_l < 0 ? sample_ll : g.add(l_l, sample_ll);
    }
    double inv_nl = 1.0 / static_cast<double>(labelled.size());
    l_l = g.scale(l_l, inv_nl);
    if (l_recon >= 0) l_recon = g.scale(l_recon, inv_nl);
    out.forward_passes = 1;

    // branches 2+3: LDS on labelled and unlabelled batches
    Var l_total = l_l;
    if (l_recon >= 0) l_total = g.add(l_total, l_recon);
    Var lds_l_var = -1, lds_ul_var = -1;
    if (st.objective.use_vat) {
        std::vector<MelSpectrogram> lab_specs;
        for (const auto& ex : labelled) lab_specs.push_back(ex.spec);
        lds_l_var = vat::lds(g, lab_specs, st.theta, st.model_cfg, st.vat_cfg, st.rng);
        out.forward_passes += 1;
        if (!unlabelled.empty()) {
            lds_ul_var = vat::lds(g, unlabelled, st.theta, st.model_cfg, st.vat_cfg, st.rng);
            out.forward_passes += 1;
        }
        out.lds_l = g.scalar(lds_l_var);
        out.lds_ul = lds_ul_var >= 0 ? g.scalar(lds_ul_var) : 0.0;
        Var l_ul = lds_ul_var >= 0 ? g.scale(g.add(lds_l_var, lds_ul_var), 0.5) : lds_l_var;
        out.l_ul = g.scalar(l_ul);
        l_total = g.add(l_total, g.scale(l_ul, st.objective.alpha));
    }

    out.l_l = g.scalar(l_l);
    out.l_recon = l_recon >= 0 ? g.scalar(l_recon) : 0.0;
    out.total = g.scalar(l_total);
    if (!std::isfinite(out.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at iteration " << st.iteration << ": L=" << out.total
            << " L_l=" << out.l_l << " L_ul=" << out.l_ul << " L_recon=" << out.l_recon
            << " LDS_l=" << out.lds_l << " LDS_ul=" << out.lds_ul;
        throw std::runtime_error(msg.str());
    }

    st.theta.zero_grads();
    st.phi.zero_grads();
    g.backward(l_total);
    double lr = learning_rate(st.iteration);
    st.opt_theta.step(st.theta, lr);
    st.opt_phi.step(st.phi, lr);
    ++st.iteration;
    return out;
}

// ---- validation split ----

/// Deterministic clip-level split: shuffles indices with the seed, first
/// floor(fraction*n) clips train, rest validate. Warns when validation
/// comes out empty.
template <typename T>
inline std::pair<std::vector<T>, std::vector<T>> split_train_validation(
    const std::vector<T>& corpus, double fraction, uint64_t seed) {
    if (corpus.empty()) throw std::invalid_argument("split: empty corpus");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split: fraction must be in (0,1)");
    std::vector<size_t> idx(corpus.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    size_t n_val = corpus.size() - static_cast<size_t>(fraction * corpus.size() + 1e-9);
    n_val = std::min(n_val, corpus.size() - 1);
    std::pair<std::vector<T>, std::vector<T>> out;
    for (size_t i = 0; i < idx.size(); ++i) {
        if (i < corpus.size() - n_val)
            out.first.push_back(corpus[idx[i]]);
        else
            out.second.push_back(corpus[idx[i]]);
    }
    if (out.second.empty())
        std::cerr << "warning: validation split is empty (corpus of " << corpus.size()
                  << " clips)\n";
    return out;
}

// ---- checkpoints ----

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) {
    auto n = static_cast<uint64_t>(s.size());
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& is) {
    uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof(n));
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}
inline void write_mat(std::ostream& os, const Mat& m) {
    uint64_t r = static_cast<uint64_t>(m.rows()), c = static_cast<uint64_t>(m.cols());
    os.write(reinterpret_cast<const char*>(&r), sizeof(r));
    os.write(reinterpret_cast<const char*>(&c), sizeof(c));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * m.size()));
}
inline Mat read_mat(std::istream& is) {
    uint64_t r = 0, c = 0;
    is.read(reinterpret_cast<char*>(&r), sizeof(r));
    is.read(reinterpret_cast<char*>(&c), sizeof(c));
    Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    return m;
}
inline void write_params(std::ostream& os, ParamStore& store) {
    uint64_t n = store.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (Param* p : store.all()) {
        write_string(os, p->name);
        write_mat(os, p->value);
        write_mat(os, p->m);
        write_mat(os, p->v);
    }
}
inline void read_params(std::istream& is, ParamStore& store) {
    uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof(n));
    for (uint64_t i = 0; i < n; ++i) {
        std::string name = read_string(is);
        Mat value = read_mat(is);
        Mat m = read_mat(is);
        Mat v = read_mat(is);
        Param& p = store.has(name) ? store.at(name)
                                   : store.create(name, value.rows(), value.cols());
        if (p.value.rows() != value.rows() || p.value.cols() != value.cols())
            throw std::runtime_error("checkpoint parameter shape mismatch: " + name);
        p.value = std::move(value);
        p.m = std::move(m);
        p.v = std::move(v);
    }
}

template <typename T>
inline void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
inline T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "RVATCKP1";

/// Atomic (write-temp-then-rename) checkpoint of the full trainer state.
inline void save_checkpoint(const std::string& path, TrainerState& st) {
    namespace fs = std::filesystem;
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write checkpoint: " + tmp);
        os.write(kCheckpointMagic, 8);
        detail::write_pod(os, st.model_cfg.depth);
        detail::write_pod(os, st.model_cfg.base_channels);
        detail::write_pod(os, st.model_cfg.attention_window);
        detail::write_pod(os, static_cast<int>(st.model_cfg.two_channel));
        detail::write_pod(os, st.model_cfg.n_mels);
        detail::write_pod(os, st.model_cfg.n_pitches);
        detail::write_pod(os, st.objective.alpha);
        detail::write_pod(os, static_cast<int>(st.objective.use_reconstruction));
        detail::write_pod(os, static_cast<int>(st.objective.use_vat));
        detail::write_pod(os, static_cast<int>(st.objective.use_onset));
        detail::write_pod(os, static_cast<int>(st.objective.recon_loss_kind));
        detail::write_pod(os, st.vat_cfg.epsilon);
        detail::write_pod(os, st.vat_cfg.xi);
        detail::write_pod(os, st.vat_cfg.power_iterations);
        detail::write_pod(os, static_cast<int>(st.vat_cfg.include_onset));
        detail::write_pod(os, st.iteration);
        detail::write_pod(os, st.opt_theta.step_count);
        detail::write_pod(os, st.opt_phi.step_count);
        std::ostringstream rng_text;
        rng_text << st.rng;
        detail::write_string(os, rng_text.str());
        detail::write_params(os, st.theta);
        detail::write_params(os, st.phi);
        if (!os) throw std::runtime_error("checkpoint write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

inline TrainerState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::string(magic, 8) != std::string(kCheckpointMagic, 8))
        throw std::runtime_error("not a checkpoint file (bad format tag): " + path);
    TrainerState st;
    st.model_cfg.depth = detail::read_pod<int>(is);
    st.model_cfg.base_channels = detail::read_pod<int>(is);
    st.model_cfg.attention_window = detail::read_pod<int>(is);
    st.model_cfg.two_channel = detail::read_pod<int>(is) != 0;
    st.model_cfg.n_mels = detail::read_pod<int>(is);
    st.model_cfg.n_pitches = detail::read_pod<int>(is);
    st.objective.alpha = detail::read_pod<double>(is);
    st.objective.use_reconstruction = detail::read_pod<int>(is) != 0;
    st.objective.use_vat = detail::read_pod<int>(is) != 0;
    st.objective.use_onset = detail::read_pod<int>(is) != 0;
    st.objective.recon_loss_kind = static_cast<ReconLossKind>(detail::read_pod<int>(is));
    st.vat_cfg.epsilon = detail::read_pod<double>(is);
    st.vat_cfg.xi = detail::read_pod<double>(is);
    st.vat_cfg.power_iterations = detail::read_pod<int>(is);
    st.vat_cfg.include_onset = detail::read_pod<int>(is) != 0;
    st.iteration = detail::read_pod<long>(is);
    st.opt_theta.step_count = detail::read_pod<long>(is);
    st.opt_phi.step_count = detail::read_pod<long>(is);
    std::istringstream rng_text(detail::read_string(is));
    rng_text >> st.rng;
    detail::read_params(is, st.theta);
    detail::read_params(is, st.phi);
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    return st;
}

/// Field-by-field config diff, empty when configurations agree.
inline std::string config_diff(const TrainerState& a, const TrainerState& b) {
    std::ostringstream d;
    auto cmp = [&](const std::string& k, auto va, auto vb) {
        if (va != vb) d << "  " << k << ": checkpoint=" << va << " requested=" << vb << "\n";
    };
    cmp("depth", a.model_cfg.depth, b.model_cfg.depth);
    cmp("base_channels", a.model_cfg.base_channels, b.model_cfg.base_channels);
    cmp("attention_window", a.model_cfg.attention_window, b.model_cfg.attention_window);
    cmp("two_channel", a.model_cfg.two_channel, b.model_cfg.two_channel);
    cmp("n_mels", a.model_cfg.n_mels, b.model_cfg.n_mels);
    cmp("n_pitches", a.model_cfg.n_pitches, b.model_cfg.n_pitches);
    return d.str();
}

// ---- training loop ----

struct EpochLog {
    long iteration = 0;
    double total = 0, l_l = 0, l_ul = 0, l_recon = 0;
    double frame_f1 = 0, note_f1 = 0, note_offset_f1 = 0;
};

struct RunResult {
    std::vector<EpochLog> epochs;
};

/// Note-level validation scores for one clip against its reference tsv.
inline ScoreTriple validate_clip_notes(const std::string& audio_path,
                                       const std::string& label_path, TrainerState& st,
                                       const datasets::FrontendConfig& fe) {
    AudioClip clip = audio::read_wav(audio_path);
    auto pred = inference::transcribe_clip(clip, st.theta, st.model_cfg, fe);
    auto ref = labels::read_notes_tsv(label_path);
    return metrics::note_metrics(pred, ref);
}

/// Full validation triple (frame / note / note-with-offset F1).
struct ValidationScores {
    ScoreTriple frame, note, note_offset;
};

inline ValidationScores validate_clip(const std::string& audio_path,
                                      const std::string& label_path, TrainerState& st,
                                      const datasets::FrontendConfig& fe) {
    AudioClip clip = audio::read_wav(audio_path);
    AudioClip at16 = clip.sample_rate == audio::kTargetRate
                         ? clip
                         : audio::resample(clip, audio::kTargetRate);
    MelSpectrogram spec =
        audio::log_normalize(audio::mel_spectrogram(at16, fe.window, fe.hop, fe.n_mels));
    double frame_rate = static_cast<double>(audio::kTargetRate) / fe.hop;
    auto post = inference::transcribe_windows(spec.values, st.theta, st.model_cfg,
                                              fe.segment_frames());
    PianoRoll pred_roll = labels::binarize(post.post, 0.5, frame_rate);
    auto ref_notes = labels::read_notes_tsv(label_path);
    auto [ref_roll, ref_onsets] =
        labels::notes_to_rolls(ref_notes, pred_roll.frames(), frame_rate, 1);

    std::vector<NoteEvent> pred_notes;
    if (st.model_cfg.two_channel) {
        PianoRoll onset_bin = labels::binarize(post.onset, 0.5, frame_rate);
        OnsetRoll onsets{onset_bin.values, 1, frame_rate};
        pred_notes = labels::rolls_to_notes(pred_roll, &onsets, frame_rate);
    } else {
        pred_notes = labels::rolls_to_notes(pred_roll, nullptr, frame_rate);
    }
    ValidationScores v;
    v.frame = metrics::frame_metrics(pred_roll, ref_roll);
    v.note = metrics::note_metrics(pred_notes, ref_notes);
    v.note_offset = metrics::note_offset_metrics(pred_notes, ref_notes);
    return v;
}

struct LoopOptions {
    long iterations = 100;
    int checkpoint_every_epochs = 0;  // 0: only final
    int validate_every_epochs = 1;
    std::string checkpoint_path;  // empty: no checkpoints
    std::string log_path;         // empty: no log file
};

/// Runs the training loop, logging one tab-separated line per epoch:
/// iteration L L_l L_ul L_recon frame_f1 note_f1 note_offset_f1.
inline RunResult run_training(TrainerState& st, datasets::BatchSampler& sampler,
                              const std::vector<std::pair<std::string, std::string>>& validation,
                              const LoopOptions& opts) {
    RunResult result;
    std::ofstream log;
    if (!opts.log_path.empty()) {
        log.open(opts.log_path);
        if (!log) throw std::runtime_error("cannot write metrics log: " + opts.log_path);
        log << "iteration\tL\tL_l\tL_ul\tL_recon\tframe_f1\tnote_f1\tnote_offset_f1\n";
    }
    EpochLog acc;
    int in_epoch = 0;
    ValidationScores last_val{};
    const long target = st.iteration + opts.iterations;
    while (st.iteration < target) {
        auto [lab, ulab] = sampler.next();
        LossBreakdown lb = train_step(st, lab, ulab);
        acc.total += lb.total;
        acc.l_l += lb.l_l;
        acc.l_ul += lb.l_ul;
        acc.l_recon += lb.l_recon;
        ++in_epoch;
        bool epoch_done = st.iteration % kIterationsPerEpoch == 0 || st.iteration == target;
        if (!epoch_done) continue;

        long epoch = (st.iteration - 1) / kIterationsPerEpoch;
        if (!validation.empty() && opts.validate_every_epochs > 0 &&
            epoch % opts.validate_every_epochs == 0) {
            std::vector<ScoreTriple> f, n, no;
            for (const auto& [a, l] : validation) {
                ValidationScores v = validate_clip(a, l, st, sampler.frontend());
                f.push_back(v.frame);
                n.push_back(v.note);
                no.push_back(v.note_offset);
            }
            last_val.frame.f1 = metrics::corpus_report(f).f1.mean;
            last_val.note.f1 = metrics::corpus_report(n).f1.mean;
            last_val.note_offset.f1 = metrics::corpus_report(no).f1.mean;
        }
        EpochLog e;
        e.iteration = st.iteration;
        e.total = acc.total / in_epoch;
        e.l_l = acc.l_l / in_epoch;
        e.l_ul = acc.l_ul / in_epoch;
        e.l_recon = acc.l_recon / in_epoch;
        e.frame_f1 = last_val.frame.f1;
        e.note_f1 = last_val.note.f1;
        e.note_offset_f1 = last_val.note_offset.f1;
        result.epochs.push_back(e);
        if (log) {
            log << e.iteration << "\t" << e.total << "\t" << e.l_l << "\t" << e.l_ul << "\t"
                << e.l_recon << "\t" << e.frame_f1 << "\t" << e.note_f1 << "\t"
                << e.note_offset_f1 << "\n";
            log.flush();
        }
        acc = EpochLog{};
        in_epoch = 0;
        if (!opts.checkpoint_path.empty() && opts.checkpoint_every_epochs > 0 &&
            epoch % opts.checkpoint_every_epochs == 0) {
            save_checkpoint(opts.checkpoint_path, st);
        }
    }
    if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, st);
    return result;
}

/// Continual-learning resumption: restores the checkpointed state, extends
/// the unlabelled pool with the new corpus, and trains for extra_epochs
/// further epochs. Refuses on config mismatch with a field diff.
inline TrainerState continual_train(const std::string& checkpoint_path,
                                    const CorpusManifest& base,
                                    const std::vector<std::string>& new_unlabelled,
                                    long extra_epochs, const datasets::BatchSpec& batch,
                                    const datasets::FrontendConfig& fe, uint64_t sampler_seed,
                                    const TranscriberConfig& expected_cfg,
                                    const LoopOptions& opts = {}) {
    TrainerState st = load_checkpoint(checkpoint_path);
    TrainerState expected;
    expected.model_cfg = expected_cfg;
    std::string diff = config_diff(st, expected);
    if (!diff.empty())
        throw std::runtime_error("checkpoint/config mismatch:\n" + diff);
    if (extra_epochs == 0) return st;
    if (new_unlabelled.empty())
        throw std::invalid_argument("continual_train: new unlabelled corpus is empty");

    CorpusManifest merged = base;
    for (const auto& p : new_unlabelled) merged.unlabelled.push_back(p);
    datasets::BatchSampler sampler(merged, batch, fe, sampler_seed);
    LoopOptions lo = opts;
    lo.iterations = extra_epochs * kIterationsPerEpoch;
    run_training(st, sampler, {}, lo);
    return st;
}

}  // namespace training
}  // namespace reconvat
