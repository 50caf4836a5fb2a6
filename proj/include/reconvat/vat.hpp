#pragma once

#include "autodiff.hpp"
#include "model.hpp"

#include <random>
#include <vector>

namespace reconvat {

struct VatConfig {
    double epsilon = 1.0;     // perturbation magnitude per timestep
    double xi = 1e-2;         // initial random-perturbation scale
    int power_iterations = 1;
    bool include_onset = true;

    void validate() const {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw std::invalid_argument("vat: epsilon must be finite and >= 0");
        if (!(xi > 0.0)) throw std::invalid_argument("vat: xi must be > 0");
        if (power_iterations < 1)
            throw std::invalid_argument("vat: power_iterations must be >= 1");
    }
};

struct Perturbation {
    Mat values;             // T x F, every nonzero timestep row has L2 norm epsilon
    bool degenerate = false; // true when the gradient vanished at every timestep
};

namespace vat {

inline constexpr double kProbClamp = 1e-7;

/// Sum of mean BCE terms between two model outputs; i ranges over
/// {onset, post} when include_onset (and both outputs carry onsets),
/// else {post}. The first argument is the reference distribution.
inline Var bce_divergence(Graph& g, const ModelOutput& p, const ModelOutput& q,
                          bool include_onset) {
    Var d = g.bce_mean(p.posteriorgram, q.posteriorgram, kProbClamp);
    if (include_onset) {
        if (p.onset < 0 || q.onset < 0)
            throw std::invalid_argument("bce_divergence: onset channel missing");
        d = g.add(d, g.bce_mean(p.onset, q.onset, kProbClamp));
    }
    return d;
}

namespace detail {

/// Scales each row to the given L2 norm; zero rows stay zero.
/// Returns true if at least one row was nonzero.
inline bool normalize_rows(Mat& m, double target_norm) {
    bool any = false;
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        double n = m.row(t).norm();
        if (n > 0.0) {
            m.row(t) *= target_norm / n;
            any = true;
        }
    }
    return any;
}

/// Model output evaluated without gradients, frozen as constants in g.
inline ModelOutput frozen_forward(Graph& g, const Mat& spec, ParamStore& params,
                                  const TranscriberConfig& cfg) {
    Graph ref;
    ModelOutput out = model::transcribe_forward(ref, ref.constant(spec), params, cfg, false);
    ModelOutput frozen;
    frozen.posteriorgram = g.constant(ref.value(out.posteriorgram));
    if (out.onset >= 0) frozen.onset = g.constant(ref.value(out.onset));
    return frozen;
}

}  // namespace detail

/// Adversarial perturbation search: random xi-scaled start, power
/// iterations on the divergence gradient with frozen parameters, final
/// timestep-wise normalization to epsilon. No gradient reaches theta.
inline Perturbation compute_adversarial_perturbation(const MelSpectrogram& spec,
                                                     ParamStore& params,
                                                     const TranscriberConfig& cfg,
                                                     const VatConfig& vcfg,
                                                     std::mt19937_64& rng) {
    vcfg.validate();
    const Mat& x = spec.values;
    Perturbation result;
    result.values = Mat::Zero(x.rows(), x.cols());
    if (vcfg.epsilon == 0.0) return result;

    // isotropic unit-variance draw, rows scaled to norm xi
    Mat r(x.rows(), x.cols());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = gauss(rng);
    detail::normalize_rows(r, vcfg.xi);

    Mat g_mat;
    for (int it = 0; it < vcfg.power_iterations; ++it) {
        Graph g;
        ModelOutput ref = detail::frozen_forward(g, x, params, cfg);
        Var r_var = g.input(r, true);
        Var perturbed_in = g.add(r_var, g.constant(x));
        ModelOutput adv = model::transcribe_forward(g, perturbed_in, params, cfg, false);
        bool onset_term = vcfg.include_onset && cfg.two_channel;
        Var div = bce_divergence(g, ref, adv, onset_term);
        g.backward(div);
        g_mat = g.grad(r_var);
        if (it + 1 < vcfg.power_iterations) {
            r = g_mat;
            if (!detail::normalize_rows(r, vcfg.xi)) break;
        }
    }

    result.values = g_mat;
    bool any = detail::normalize_rows(result.values, vcfg.epsilon);
    if (!any) {
        result.values.setZero();
        result.degenerate = true;
    }
    return result;
}

/// Local distributional smoothness over a batch: the BCE divergence between
/// the frozen-parameter prediction on X and the live-parameter prediction
/// on X + r_adv, averaged over this batch only. The returned Var carries
/// gradient into theta through the perturbed branch alone.
inline Var lds(Graph& g, const std::vector<MelSpectrogram>& batch, ParamStore& params,
               const TranscriberConfig& cfg, const VatConfig& vcfg, std::mt19937_64& rng) {
    vcfg.validate();
    if (batch.empty()) throw std::invalid_argument("lds: empty batch");
    Var total = -1;
    for (const auto& spec : batch) {
        Perturbation r_adv = compute_adversarial_perturbation(spec, params, cfg, vcfg, rng);
        ModelOutput ref = detail::frozen_forward(g, spec.values, params, cfg);
        Var adv_in = g.constant(spec.values + r_adv.values);
        ModelOutput adv = model::transcribe_forward(g, adv_in, params, cfg, true);
        bool onset_term = vcfg.include_onset && cfg.two_channel;
        Var term = bce_divergence(g, ref, adv, onset_term);
        total = total < 0 ? term : g.add(total, term);
    }
    return g.scale(total, 1.0 / static_cast<double>(batch.size()));
}

}  // namespace vat
}  // namespace reconvat
