#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace reconvat {

using Mat = Eigen::MatrixXd;

/// Trainable tensor with Adam moment buffers. Owned by a ParamStore;
/// graphs reference it either as a leaf (gradients accumulate into
/// `grad`) or as a constant (frozen copy, no gradient).
struct Param {
    std::string name;
    Mat value;
    Mat grad;
    Mat m;   // Adam first moment
    Mat v;   // Adam second moment

    explicit Param(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)),
          value(Mat::Zero(rows, cols)),
          grad(Mat::Zero(rows, cols)),
          m(Mat::Zero(rows, cols)),
          v(Mat::Zero(rows, cols)) {}

    void zero_grad() { grad.setZero(); }
};

class ParamStore {
public:
    Param& create(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        if (index_.count(name))
            throw std::invalid_argument("duplicate parameter: " + name);
        params_.push_back(std::make_unique<Param>(name, rows, cols));
        index_[name] = params_.size() - 1;
        return *params_.back();
    }

    Param& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end())
            throw std::invalid_argument("unknown parameter: " + name);
        return *params_[it->second];
    }
    const Param& at(const std::string& name) const {
        return const_cast<ParamStore*>(this)->at(name);
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<Param*> all() {
        std::vector<Param*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }
    std::size_t size() const { return params_.size(); }

    void zero_grads() {
        for (auto& p : params_) p->zero_grad();
    }

    bool all_finite() const {
        for (const auto& p : params_)
            if (!p->value.allFinite()) return false;
        return true;
    }

private:
    std::vector<std::unique_ptr<Param>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Node handle into a Graph's tape.
using Var = int;

/// Dynamically built computation tape. Forward values are computed
/// eagerly as ops are appended; backward() replays the tape in reverse.
/// One Graph per loss evaluation; not reusable after backward().
class Graph {
public:
    struct Node {
        Mat value;
        Mat grad;
        bool requires_grad = false;
        std::function<void()> back;   // empty for leaves/constants
    };

    Var constant(Mat v) { return push(std::move(v), false, {}); }

    /// Leaf whose gradient is retrievable afterwards (used for VAT input grads).
    Var input(Mat v, bool requires_grad = true) {
        return push(std::move(v), requires_grad, {});
    }

    /// Leaf backed by a live parameter: backward accumulates into p.grad.
    Var param(Param& p) {
        Var id = push(p.value, true, {});
        Param* pp = &p;
        nodes_[id].back = [this, id, pp]() { pp->grad += nodes_[id].grad; };
        return id;
    }

    const Mat& value(Var v) const { return nodes_.at(v).value; }
    const Mat& grad(Var v) const { return nodes_.at(v).grad; }

    // ---- elementwise / arithmetic ----

    Var add(Var a, Var b) {
        check_same_shape(a, b, "add");
        Mat out = nodes_[a].value + nodes_[b].value;
        Var id = push(std::move(out), rg(a) || rg(b), {});
        nodes_[id].back = [this, id, a, b]() {
            if (rg(a)) nodes_[a].grad += nodes_[id].grad;
            if (rg(b)) nodes_[b].grad += nodes_[id].grad;
        };
        return id;
    }

    Var sub(Var a, Var b) {
        check_same_shape(a, b, "sub");
        Var id = push(nodes_[a].value - nodes_[b].value, rg(a) || rg(b), {});
        nodes_[id].back = [this, id, a, b]() {
            if (rg(a)) nodes_[a].grad += nodes_[id].grad;
            if (rg(b)) nodes_[b].grad -= nodes_[id].grad;
        };
        return id;
    }

    Var scale(Var a, double s) {
        Var id = push(nodes_[a].value * s, rg(a), {});
        nodes_[id].back = [this, id, a, s]() {
            if (rg(a)) nodes_[a].grad += nodes_[id].grad * s;
        };
        return id;
    }

    /// Broadcast a 1xC row (bias) over all rows of a TxC matrix.
    Var add_row(Var x, Var bias) {
        const Mat& b = nodes_[bias].value;
        if (b.rows() != 1 || b.cols() != nodes_[x].value.cols())
            throw std::invalid_argument("add_row: bias shape mismatch");
        Mat out = nodes_[x].value.rowwise() + b.row(0);
        Var id = push(std::move(out), rg(x) || rg(bias), {});
        nodes_[id].back = [this, id, x, bias]() {
            if (rg(x)) nodes_[x].grad += nodes_[id].grad;
            if (rg(bias)) nodes_[bias].grad.row(0) += nodes_[id].grad.colwise().sum();
        };
        return id;
    }

    Var matmul(Var a, Var b) {
        if (nodes_[a].value.cols() != nodes_[b].value.rows())
            throw std::invalid_argument("matmul: inner dimension mismatch");
        Var id = push(nodes_[a].value * nodes_[b].value, rg(a) || rg(b), {});
        nodes_[id].back = [this, id, a, b]() {
            if (rg(a)) nodes_[a].grad += nodes_[id].grad * nodes_[b].value.transpose();
            if (rg(b)) nodes_[b].grad += nodes_[a].value.transpose() * nodes_[id].grad;
        };
        return id;
    }

    Var relu(Var a) {
        Mat out = nodes_[a].value.cwiseMax(0.0);
        Var id = push(std::move(out), rg(a), {});
        nodes_[id].back = [this, id, a]() {
            if (!rg(a)) return;
            nodes_[a].grad.array() +=
                nodes_[id].grad.array() * (nodes_[a].value.array() > 0.0).cast<double>();
        };
        return id;
    }

    Var sigmoid(Var a) {
        Mat out = (1.0 / (1.0 + (-nodes_[a].value.array()).exp())).matrix();
        Var id = push(std::move(out), rg(a), {});
        nodes_[id].back = [this, id, a]() {
            if (!rg(a)) return;
            const auto& y = nodes_[id].value.array();
            nodes_[a].grad.array() += nodes_[id].grad.array() * y * (1.0 - y);
        };
        return id;
    }

    // ---- structural ----

    Var concat_cols(Var a, Var b) {
        const Mat& av = nodes_[a].value;
        const Mat& bv = nodes_[b].value;
        if (av.rows() != bv.rows())
            throw std::invalid_argument("concat_cols: row count mismatch");
        Mat out(av.rows(), av.cols() + bv.cols());
        out << av, bv;
        Var id = push(std::move(out), rg(a) || rg(b), {});
        nodes_[id].back = [this, id, a, b]() {
            Eigen::Index ca = nodes_[a].value.cols();
            Eigen::Index cb = nodes_[b].value.cols();
            if (rg(a)) nodes_[a].grad += nodes_[id].grad.leftCols(ca);
            if (rg(b)) nodes_[b].grad += nodes_[id].grad.rightCols(cb);
        };
        return id;
    }

    /// 1D convolution along the time (row) axis with zero padding.
    /// x: TxCin; weight: (K*Cin)xCout laid out as K stacked CinxCout taps,
    /// tap k applied at time offset k - K/2.
    Var conv1d_time(Var x, Var weight, Var bias, int kernel) {
        const Mat& xv = nodes_[x].value;
        const Mat& wv = nodes_[weight].value;
        const Eigen::Index cin = xv.cols();
        const Eigen::Index t = xv.rows();
        if (wv.rows() != kernel * cin)
            throw std::invalid_argument("conv1d_time: weight rows != kernel*cin");
        const Eigen::Index cout = wv.cols();
        Mat out = Mat::Zero(t, cout);
        for (int k = 0; k < kernel; ++k) {
            int off = k - kernel / 2;
            Eigen::Index lo = std::max<Eigen::Index>(0, -off);
            Eigen::Index hi = std::min<Eigen::Index>(t, t - off);
            if (hi <= lo) continue;
            out.middleRows(lo, hi - lo) +=
                xv.middleRows(lo + off, hi - lo) * wv.middleRows(k * cin, cin);
        }
        out.rowwise() += nodes_[bias].value.row(0);
        Var id = push(std::move(out), rg(x) || rg(weight) || rg(bias), {});
        nodes_[id].back = [this, id, x, weight, bias, kernel]() {
            const Mat& xv2 = nodes_[x].value;
            const Mat& wv2 = nodes_[weight].value;
            const Mat& g = nodes_[id].grad;
            const Eigen::Index cin = xv2.cols();
            const Eigen::Index t = xv2.rows();
            for (int k = 0; k < kernel; ++k) {
                int off = k - kernel / 2;
                Eigen::Index lo = std::max<Eigen::Index>(0, -off);
                Eigen::Index hi = std::min<Eigen::Index>(t, t - off);
                if (hi <= lo) continue;
                if (rg(x))
                    nodes_[x].grad.middleRows(lo + off, hi - lo) +=
                        g.middleRows(lo, hi - lo) * wv2.middleRows(k * cin, cin).transpose();
                if (rg(weight))
                    nodes_[weight].grad.middleRows(k * cin, cin) +=
                        xv2.middleRows(lo + off, hi - lo).transpose() * g.middleRows(lo, hi - lo);
            }
            if (rg(bias)) nodes_[bias].grad.row(0) += g.colwise().sum();
        };
        return id;
    }

    /// Average-pool pairs of rows; odd tail row passes through alone.
    Var avgpool2_time(Var x) {
        const Mat& xv = nodes_[x].value;
        const Eigen::Index t = xv.rows();
        const Eigen::Index to = (t + 1) / 2;
        Mat out(to, xv.cols());
        for (Eigen::Index i = 0; i < to; ++i) {
            if (2 * i + 1 < t)
                out.row(i) = 0.5 * (xv.row(2 * i) + xv.row(2 * i + 1));
            else
                out.row(i) = xv.row(2 * i);
        }
        Var id = push(std::move(out), rg(x), {});
        nodes_[id].back = [this, id, x]() {
            if (!rg(x)) return;
            const Mat& g = nodes_[id].grad;
            Eigen::Index t = nodes_[x].value.rows();
            for (Eigen::Index i = 0; i < g.rows(); ++i) {
                if (2 * i + 1 < t) {
                    nodes_[x].grad.row(2 * i) += 0.5 * g.row(i);
                    nodes_[x].grad.row(2 * i + 1) += 0.5 * g.row(i);
                } else {
                    nodes_[x].grad.row(2 * i) += g.row(i);
                }
            }
        };
        return id;
    }

    /// Nearest-neighbour 2x upsample along time, cropped to t_out rows.
    Var upsample2_time(Var x, Eigen::Index t_out) {
        const Mat& xv = nodes_[x].value;
        if (t_out > 2 * xv.rows())
            throw std::invalid_argument("upsample2_time: target length too large");
        Mat out(t_out, xv.cols());
        for (Eigen::Index i = 0; i < t_out; ++i) out.row(i) = xv.row(i / 2);
        Var id = push(std::move(out), rg(x), {});
        nodes_[id].back = [this, id, x]() {
            if (!rg(x)) return;
            const Mat& g = nodes_[id].grad;
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                nodes_[x].grad.row(i / 2) += g.row(i);
        };
        return id;
    }

    /// Single-head local self-attention with learned relative position bias.
    /// x: TxCin, projections Wq/Wk/Wv: Cin x d, rel_bias: window x 1.
    /// Timestep t attends to j in [t-h, t+h] clipped to [0, T), h=(window-1)/2.
    Var local_attention(Var x, Var wq, Var wk, Var wv, Var rel_bias, int window) {
        if (window < 1 || window % 2 == 0)
            throw std::invalid_argument("local_attention: window must be odd and >= 1");
        const Mat& xv = nodes_[x].value;
        const Eigen::Index t = xv.rows();
        if (t < window)
            throw std::invalid_argument("local_attention: sequence shorter than window");
        Mat q = xv * nodes_[wq].value;
        Mat k = xv * nodes_[wk].value;
        Mat v = xv * nodes_[wv].value;
        const Eigen::Index d = q.cols();
        const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
        const int h = (window - 1) / 2;
        const Mat& rb = nodes_[rel_bias].value;

        auto attn = std::make_shared<Mat>(Mat::Zero(t, window));  // softmax weights
        Mat out = Mat::Zero(t, d);
        Eigen::VectorXd scores(window);
        for (Eigen::Index i = 0; i < t; ++i) {
            Eigen::Index jlo = std::max<Eigen::Index>(0, i - h);
            Eigen::Index jhi = std::min<Eigen::Index>(t - 1, i + h);
            Eigen::Index n = jhi - jlo + 1;
            for (Eigen::Index j = jlo; j <= jhi; ++j)
                scores[j - jlo] = q.row(i).dot(k.row(j)) * inv_sqrt_d + rb(j - i + h, 0);
            double mx = scores.head(n).maxCoeff();
            double z = 0.0;
            for (Eigen::Index c = 0; c < n; ++c) {
                scores[c] = std::exp(scores[c] - mx);
                z += scores[c];
            }
            for (Eigen::Index j = jlo; j <= jhi; ++j) {
                double a = scores[j - jlo] / z;
                (*attn)(i, j - i + h) = a;
                out.row(i) += a * v.row(j);
            }
        }

        bool needs = rg(x) || rg(wq) || rg(wk) || rg(wv) || rg(rel_bias);
        Var id = push(std::move(out), needs, {});
        // q/k/v copies are needed by backward; move into the closure
        auto qp = std::make_shared<Mat>(std::move(q));
        auto kp = std::make_shared<Mat>(std::move(k));
        auto vp = std::make_shared<Mat>(std::move(v));
        nodes_[id].back = [this, id, x, wq, wk, wv, rel_bias, window, h, inv_sqrt_d,
                           attn, qp, kp, vp]() {
            const Mat& g = nodes_[id].grad;
            const Mat& xv2 = nodes_[x].value;
            const Eigen::Index t = xv2.rows();
            const Eigen::Index d = qp->cols();
            Mat gq = Mat::Zero(t, d), gk = Mat::Zero(t, d), gv = Mat::Zero(t, d);
            Mat grb = Mat::Zero(window, 1);
            Eigen::VectorXd ga(window), gs(window);
            for (Eigen::Index i = 0; i < t; ++i) {
                Eigen::Index jlo = std::max<Eigen::Index>(0, i - h);
                Eigen::Index jhi = std::min<Eigen::Index>(t - 1, i + h);
                Eigen::Index n = jhi - jlo + 1;
                double dot_sum = 0.0;
                for (Eigen::Index j = jlo; j <= jhi; ++j) {
                    double a = (*attn)(i, j - i + h);
                    ga[j - jlo] = g.row(i).dot(vp->row(j));
                    gv.row(j) += a * g.row(i);
                    dot_sum += a * ga[j - jlo];
                }
                for (Eigen::Index c = 0; c < n; ++c) {
                    Eigen::Index j = jlo + c;
                    double a = (*attn)(i, j - i + h);
                    gs[c] = a * (ga[c] - dot_sum);
                }
                for (Eigen::Index c = 0; c < n; ++c) {
                    Eigen::Index j = jlo + c;
                    gq.row(i) += gs[c] * inv_sqrt_d * kp->row(j);
                    gk.row(j) += gs[c] * inv_sqrt_d * qp->row(i);
                    grb(j - i + h, 0) += gs[c];
                }
            }
            if (rg(x))
                nodes_[x].grad += gq * nodes_[wq].value.transpose() +
                                  gk * nodes_[wk].value.transpose() +
                                  gv * nodes_[wv].value.transpose();
            if (rg(wq)) nodes_[wq].grad += xv2.transpose() * gq;
            if (rg(wk)) nodes_[wk].grad += xv2.transpose() * gk;
            if (rg(wv)) nodes_[wv].grad += xv2.transpose() * gv;
            if (rg(rel_bias)) nodes_[rel_bias].grad += grb;
        };
        return id;
    }

    // ---- scalar reductions (1x1 outputs) ----

    Var mean_all(Var x) {
        const Mat& xv = nodes_[x].value;
        double n = static_cast<double>(xv.size());
        Mat out(1, 1);
        out(0, 0) = xv.sum() / n;
        Var id = push(std::move(out), rg(x), {});
        nodes_[id].back = [this, id, x, n]() {
            if (rg(x)) nodes_[x].grad.array() += nodes_[id].grad(0, 0) / n;
        };
        return id;
    }

    /// Mean binary cross entropy -mean[p log q + (1-p) log(1-q)].
    /// p is the reference; both sides are clamped to [clamp, 1-clamp]
    /// before the logs. Returns a 1x1 scalar node.
    Var bce_mean(Var p, Var q, double clamp = 1e-7) {
        check_same_shape(p, q, "bce_mean");
        const Mat& pv = nodes_[p].value;
        const Mat& qv = nodes_[q].value;
        const double n = static_cast<double>(pv.size());
        auto pc = std::make_shared<Mat>(pv.array().min(1.0 - clamp).max(clamp).matrix());
        auto qc = std::make_shared<Mat>(qv.array().min(1.0 - clamp).max(clamp).matrix());
        Mat out(1, 1);
        out(0, 0) = -(pc->array() * qc->array().log() +
                      (1.0 - pc->array()) * (1.0 - qc->array()).log())
                         .sum() /
                    n;
        Var id = push(std::move(out), rg(p) || rg(q), {});
        nodes_[id].back = [this, id, p, q, pc, qc, n, clamp]() {
            double g = nodes_[id].grad(0, 0);
            if (rg(q)) {
                // zero gradient where q was clamped
                auto active = ((nodes_[q].value.array() > clamp) &&
                               (nodes_[q].value.array() < 1.0 - clamp))
                                  .cast<double>();
                nodes_[q].grad.array() +=
                    g / n * active *
                    (-(pc->array() / qc->array()) + (1.0 - pc->array()) / (1.0 - qc->array()));
            }
            if (rg(p)) {
                auto active = ((nodes_[p].value.array() > clamp) &&
                               (nodes_[p].value.array() < 1.0 - clamp))
                                  .cast<double>();
                nodes_[p].grad.array() +=
                    g / n * active * (-(qc->array().log()) + (1.0 - qc->array()).log());
            }
        };
        return id;
    }

    Var mse_mean(Var a, Var b) {
        check_same_shape(a, b, "mse_mean");
        const Mat diff = nodes_[a].value - nodes_[b].value;
        const double n = static_cast<double>(diff.size());
        Mat out(1, 1);
        out(0, 0) = diff.array().square().sum() / n;
        Var id = push(std::move(out), rg(a) || rg(b), {});
        auto dp = std::make_shared<Mat>(diff);
        nodes_[id].back = [this, id, a, b, dp, n]() {
            double g = nodes_[id].grad(0, 0);
            if (rg(a)) nodes_[a].grad += (2.0 * g / n) * (*dp);
            if (rg(b)) nodes_[b].grad -= (2.0 * g / n) * (*dp);
        };
        return id;
    }

    double scalar(Var v) const {
        const Mat& m = nodes_.at(v).value;
        if (m.size() != 1) throw std::invalid_argument("scalar: node is not 1x1");
        return m(0, 0);
    }

    /// Reverse pass from a 1x1 loss node. Parameter leaves accumulate into
    /// their Param::grad; input leaves keep grads readable via grad().
    void backward(Var loss) {
        if (nodes_.at(loss).value.size() != 1)
            throw std::invalid_argument("backward: loss must be scalar");
        for (auto& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        nodes_[loss].grad(0, 0) = 1.0;
        for (Var i = static_cast<Var>(nodes_.size()) - 1; i >= 0; --i) {
            if (nodes_[i].requires_grad && nodes_[i].back) nodes_[i].back();
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    bool rg(Var v) const { return nodes_[v].requires_grad; }

    void check_same_shape(Var a, Var b, const char* op) const {
        if (nodes_[a].value.rows() != nodes_[b].value.rows() ||
            nodes_[a].value.cols() != nodes_[b].value.cols())
            throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }

    Var push(Mat v, bool requires_grad, std::function<void()> back) {
        nodes_.push_back(Node{std::move(v), Mat(), requires_grad, std::move(back)});
        return static_cast<Var>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
};

}  // namespace reconvat
