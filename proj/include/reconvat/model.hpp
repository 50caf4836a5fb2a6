#pragma once

#include "audio.hpp"
#include "autodiff.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace reconvat {

struct TranscriberConfig {
    int depth = 4;             // encoder/decoder levels
    int base_channels = 16;
    int attention_window = 31; // frames, odd
    bool two_channel = true;   // onset module present
    int n_mels = 229;
    int n_pitches = 88;

    void validate() const {
        if (depth < 1) throw std::invalid_argument("config: depth must be >= 1");
        if (attention_window < 1 || attention_window % 2 == 0)
            throw std::invalid_argument("config: attention_window must be odd and >= 1");
        if (base_channels < 1) throw std::invalid_argument("config: base_channels must be >= 1");
        if (n_mels < 1 || n_pitches < 1)
            throw std::invalid_argument("config: n_mels/n_pitches must be >= 1");
    }

    bool operator==(const TranscriberConfig&) const = default;
};

/// Graph handles for one transcriber forward pass.
struct ModelOutput {
    Var onset = -1;          // T x 88 in (0,1); -1 when two_channel is false
    Var frame_features = -1; // T x 88, unbounded
    Var posteriorgram = -1;  // T x 88 in (0,1)
};

namespace model {

inline constexpr int kConvKernel = 3;

namespace detail {

inline int level_channels(const TranscriberConfig& cfg, int level) {
    return cfg.base_channels << level;  // base * 2^level
}

inline void init_mat(Mat& m, std::mt19937_64& rng, double fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
}

inline Param& conv_param(ParamStore& store, const std::string& name, int cin, int cout,
                         std::mt19937_64& rng) {
    Param& w = store.create(name + ".w", kConvKernel * cin, cout);
    init_mat(w.value, rng, static_cast<double>(kConvKernel * cin));
    store.create(name + ".b", 1, cout);
    return w;
}

inline Param& linear_param(ParamStore& store, const std::string& name, int cin, int cout,
                           std::mt19937_64& rng) {
    Param& w = store.create(name + ".w", cin, cout);
    init_mat(w.value, rng, static_cast<double>(cin));
    store.create(name + ".b", 1, cout);
    return w;
}

inline void attention_params(ParamStore& store, const std::string& name, int cin, int d,
                             int window, std::mt19937_64& rng) {
    for (const char* proj : {".wq", ".wk", ".wv"}) {
        Param& w = store.create(name + proj, cin, d);
        init_mat(w.value, rng, static_cast<double>(cin));
    }
    store.create(name + ".rel", window, 1);
    store.create(name + ".b", 1, d);
}

/// Shared U-net trunk parameter set under a name prefix.
inline void unet_params(ParamStore& store, const std::string& prefix, int in_channels,
                        const TranscriberConfig& cfg, std::mt19937_64& rng) {
    conv_param(store, prefix + ".stem", in_channels, cfg.base_channels, rng);
    for (int i = 0; i < cfg.depth; ++i) {
        conv_param(store, prefix + ".enc" + std::to_string(i), level_channels(cfg, i),
                   level_channels(cfg, i + 1), rng);
    }
    for (int i = cfg.depth - 1; i >= 0; --i) {
        int deep = level_channels(cfg, i + 1);
        int skip = level_channels(cfg, i);
        conv_param(store, prefix + ".dec" + std::to_string(i), deep + skip, skip, rng);
    }
}

/// Looks up a parameter as a live or frozen graph leaf.
inline Var leaf(Graph& g, ParamStore& store, const std::string& name, bool trainable) {
    Param& p = store.at(name);
    return trainable ? g.param(p) : g.constant(p.value);
}

inline Var conv_block(Graph& g, ParamStore& store, const std::string& name, Var x,
                      bool trainable) {
    Var w = leaf(g, store, name + ".w", trainable);
    Var b = leaf(g, store, name + ".b", trainable);
    return g.relu(g.conv1d_time(x, w, b, kConvKernel));
}

/// U-net trunk: conv stem, encoder (conv+pool), decoder (upsample+skip+conv).
/// Returns a T x base_channels feature map.
inline Var unet_trunk(Graph& g, ParamStore& store, const std::string& prefix, Var x,
                      const TranscriberConfig& cfg, bool trainable) {
    Var h = conv_block(g, store, prefix + ".stem", x, trainable);
    std::vector<Var> skips;
    std::vector<Eigen::Index> lengths;
    for (int i = 0; i < cfg.depth; ++i) {
        skips.push_back(h);
        lengths.push_back(g.value(h).rows());
        h = g.avgpool2_time(h);
        h = conv_block(g, store, prefix + ".enc" + std::to_string(i), h, trainable);
    }
    for (int i = cfg.depth - 1; i >= 0; --i) {
        h = g.upsample2_time(h, lengths[static_cast<size_t>(i)]);
        h = g.concat_cols(h, skips[static_cast<size_t>(i)]);
        h = conv_block(g, store, prefix + ".dec" + std::to_string(i), h, trainable);
    }
    return h;
}

inline Var linear_head(Graph& g, ParamStore& store, const std::string& name, Var x,
                       bool trainable) {
    Var w = leaf(g, store, name + ".w", trainable);
    Var b = leaf(g, store, name + ".b", trainable);
    return g.add_row(g.matmul(x, w), b);
}

}  // namespace detail

/// Creates transcriber parameters (theta) deterministically from a seed.
inline void init_transcriber(ParamStore& store, const TranscriberConfig& cfg, uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    detail::unet_params(store, "t", cfg.n_mels, cfg, rng);
    if (cfg.two_channel)
        detail::linear_param(store, "t.onset", cfg.base_channels, cfg.n_pitches, rng);
    detail::linear_param(store, "t.frame", cfg.base_channels, cfg.n_pitches, rng);
    int attn_in = cfg.two_channel ? 2 * cfg.n_pitches : cfg.n_pitches;
    detail::attention_params(store, "t.attn", attn_in, cfg.n_pitches, cfg.attention_window,
                             rng);
}

/// Creates reconstructor parameters (phi): a mirrored U-net mapping the
/// 88-wide posteriorgram back to n_mels with a sigmoid head.
inline void init_reconstructor(ParamStore& store, const TranscriberConfig& cfg, uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    detail::unet_params(store, "r", cfg.n_pitches, cfg, rng);
    detail::linear_param(store, "r.out", cfg.base_channels, cfg.n_mels, rng);
}

/// Transcriber forward pass p(Y|X, theta). `trainable` selects live
/// parameter leaves (gradients accumulate) vs frozen constants (theta-hat).
inline ModelOutput transcribe_forward(Graph& g, Var spec, ParamStore& store,
                                      const TranscriberConfig& cfg, bool trainable = true) {
    cfg.validate();
    const Mat& x = g.value(spec);
    if (!x.allFinite()) throw std::invalid_argument("transcribe_forward: non-finite input");
    if (x.cols() != cfg.n_mels)
        throw std::invalid_argument("transcribe_forward: input width != n_mels");
    if (x.rows() < cfg.attention_window)
        throw std::invalid_argument("transcribe_forward: T < attention_window");

    Var feat = detail::unet_trunk(g, store, "t", spec, cfg, trainable);
    ModelOutput out;
    Var attn_in;
    if (cfg.two_channel) {
        out.onset = g.sigmoid(detail::linear_head(g, store, "t.onset", feat, trainable));
        out.frame_features = detail::linear_head(g, store, "t.frame", feat, trainable);
        attn_in = g.concat_cols(out.onset, out.frame_features);
    } else {
        out.frame_features = detail::linear_head(g, store, "t.frame", feat, trainable);
        attn_in = out.frame_features;
    }
    Var wq = detail::leaf(g, store, "t.attn.wq", trainable);
    Var wk = detail::leaf(g, store, "t.attn.wk", trainable);
    Var wv = detail::leaf(g, store, "t.attn.wv", trainable);
    Var rel = detail::leaf(g, store, "t.attn.rel", trainable);
    Var bias = detail::leaf(g, store, "t.attn.b", trainable);
    Var attn = g.local_attention(attn_in, wq, wk, wv, rel, cfg.attention_window);
    out.posteriorgram = g.sigmoid(g.add_row(attn, bias));
    return out;
}

/// Reconstructor forward pass q(X_recon|Y_post, phi): T x 88 -> T x n_mels
/// in [0,1].
inline Var reconstruct_forward(Graph& g, Var post, ParamStore& store,
                               const TranscriberConfig& cfg, bool trainable = true) {
    const Mat& x = g.value(post);
    if (x.cols() != cfg.n_pitches)
        throw std::invalid_argument("reconstruct_forward: input width != n_pitches");
    Var feat = detail::unet_trunk(g, store, "r", post, cfg, trainable);
    return g.sigmoid(detail::linear_head(g, store, "r.out", feat, trainable));
}

/// Second transcription pass over a reconstructed spectrogram. Identical
/// contract to transcribe_forward; kept as a named entry point because the
/// training objective treats its output (Y'_post) as a separate loss term.
inline ModelOutput second_pass(Graph& g, Var recon, ParamStore& store,
                               const TranscriberConfig& cfg, bool trainable = true) {
    return transcribe_forward(g, recon, store, cfg, trainable);
}

}  // namespace model
}  // namespace reconvat
