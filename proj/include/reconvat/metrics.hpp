#pragma once

#include "labels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace reconvat {

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MatchingResult {
    std::vector<std::pair<int, int>> pairs;  // (reference index, prediction index)
    int unmatched_ref = 0;
    int unmatched_pred = 0;
};

namespace metrics {

inline ScoreTriple from_counts(double tp, double fp, double fn) {
    ScoreTriple s;
    s.precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    s.recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

/// Cellwise frame metrics over binary rolls.
inline ScoreTriple frame_metrics(const PianoRoll& pred, const PianoRoll& ref) {
    if (pred.values.rows() != ref.values.rows() || pred.values.cols() != ref.values.cols())
        throw std::invalid_argument("frame_metrics: shape mismatch");
    double tp = 0, fp = 0, fn = 0;
    for (Eigen::Index t = 0; t < pred.values.rows(); ++t) {
        for (Eigen::Index c = 0; c < pred.values.cols(); ++c) {
            bool p = pred.values(t, c) != 0.0;
            bool r = ref.values(t, c) != 0.0;
            if (p && r) ++tp;
            else if (p) ++fp;
            else if (r) ++fn;
        }
    }
    return from_counts(tp, fp, fn);
}

namespace detail {

/// Maximum-cardinality bipartite matching (Kuhn's augmenting paths).
/// admissible(ref_idx, pred_idx) defines the edge set.
inline MatchingResult max_matching(int n_ref, int n_pred,
                                   const std::function<bool(int, int)>& admissible) {
    std::vector<int> match_pred(n_pred, -1);  // pred -> ref
    std::vector<char> visited;
    std::function<bool(int)> try_augment = [&](int r) -> bool {
        for (int p = 0; p < n_pred; ++p) {
            if (visited[p] || !admissible(r, p)) continue;
            visited[p] = 1;
            if (match_pred[p] == -1 || try_augment(match_pred[p])) {
                match_pred[p] = r;
                return true;
            }
        }
        return false;
    };
    for (int r = 0; r < n_ref; ++r) {
        visited.assign(n_pred, 0);
        try_augment(r);
    }
    MatchingResult out;
    std::vector<char> ref_matched(n_ref, 0);
    for (int p = 0; p < n_pred; ++p) {
        if (match_pred[p] >= 0) {
            out.pairs.emplace_back(match_pred[p], p);
            ref_matched[match_pred[p]] = 1;
        }
    }
    out.unmatched_pred = n_pred - static_cast<int>(out.pairs.size());
    out.unmatched_ref = n_ref - static_cast<int>(out.pairs.size());
    return out;
}

}  // namespace detail

/// Note-wise matching: pitch equal and |onset difference| <= onset_tol
/// (inclusive). Maximum-cardinality one-to-one matching.
inline MatchingResult match_notes(const std::vector<NoteEvent>& ref,
                                  const std::vector<NoteEvent>& pred, double onset_tol) {
    return detail::max_matching(
        static_cast<int>(ref.size()), static_cast<int>(pred.size()), [&](int r, int p) {
            return ref[r].pitch == pred[p].pitch &&
                   std::abs(ref[r].onset - pred[p].onset) <= onset_tol;
        });
}

/// As match_notes, additionally requiring
/// |offset difference| <= max(onset_tol, offset_ratio * reference duration).
inline MatchingResult match_notes_with_offset(const std::vector<NoteEvent>& ref,
                                              const std::vector<NoteEvent>& pred,
                                              double onset_tol, double offset_ratio) {
    return detail::max_matching(
        static_cast<int>(ref.size()), static_cast<int>(pred.size()), [&](int r, int p) {
            if (ref[r].pitch != pred[p].pitch) return false;
            if (std::abs(ref[r].onset - pred[p].onset) > onset_tol) return false;
            double tol = std::max(onset_tol, offset_ratio * (ref[r].offset - ref[r].onset));
            return std::abs(ref[r].offset - pred[p].offset) <= tol;
        });
}

inline ScoreTriple scores_from_matching(const MatchingResult& m, size_t n_pred, size_t n_ref) {
    double tp = static_cast<double>(m.pairs.size());
    return from_counts(tp, static_cast<double>(n_pred) - tp, static_cast<double>(n_ref) - tp);
}

inline ScoreTriple note_metrics(const std::vector<NoteEvent>& pred,
                                const std::vector<NoteEvent>& ref, double onset_tol = 0.05) {
    return scores_from_matching(match_notes(ref, pred, onset_tol), pred.size(), ref.size());
}

inline ScoreTriple note_offset_metrics(const std::vector<NoteEvent>& pred,
                                       const std::vector<NoteEvent>& ref,
                                       double onset_tol = 0.05, double offset_ratio = 0.2) {
    return scores_from_matching(match_notes_with_offset(ref, pred, onset_tol, offset_ratio),
                                pred.size(), ref.size());
}

// ---- corpus aggregation ----

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population std
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_std: empty input");
    double mu = 0.0;
    for (double x : xs) mu += x;
    mu /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mu) * (x - mu);
    var /= static_cast<double>(xs.size());
    return {mu, std::sqrt(var)};
}

struct CorpusReport {
    MeanStd precision, recall, f1;
};

inline CorpusReport corpus_report(const std::vector<ScoreTriple>& clips) {
    if (clips.empty()) throw std::invalid_argument("corpus_report: no clips");
    std::vector<double> p, r, f;
    for (const auto& s : clips) {
        p.push_back(s.precision);
        r.push_back(s.recall);
        f.push_back(s.f1);
    }
    return {mean_std(p), mean_std(r), mean_std(f)};
}

/// "68.4 ± 7.7" style rendering of a score fraction as a percentage.
inline std::string format_percent(const MeanStd& ms) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", ms.mean * 100.0, ms.std * 100.0);
    return buf;
}

}  // namespace metrics
}  // namespace reconvat
