#include "comet/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "comet/masks.hpp"

namespace comet {

Tensor& ParamStore::create(const std::string& name, int rows, int cols,
                           std::mt19937_64& rng, double lo, double hi) {
    Param p{Tensor(rows, cols), Tensor(rows, cols)};
    p.value.uniform_init(rng, lo, hi);
    auto [it, inserted] = params_.emplace(name, std::move(p));
    assert(inserted);
    (void)inserted;
    return it->second.value;
}

Tensor& ParamStore::create_zeros(const std::string& name, int rows, int cols) {
    auto [it, inserted] =
        params_.emplace(name, Param{Tensor(rows, cols), Tensor(rows, cols)});
    assert(inserted);
    (void)inserted;
    return it->second.value;
}

void ParamStore::zero_grads() {
    for (auto& [name, p] : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.data.size();
    return n;
}

// ---------------------------------------------------------------------------

Tape::V Tape::push(Tensor value, std::function<void()> back) {
    nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
    Node& n = nodes_.back();
    n.grad = Tensor(n.value.rows, n.value.cols);
    return static_cast<V>(nodes_.size() - 1);
}

Tape::V Tape::input(Tensor t) { return push(std::move(t)); }

Tape::V Tape::param(const std::string& name) {
    Tensor value = store_->value(name);
    V id = push(std::move(value));
    std::string key = name;
    nodes_[id].back = [this, id, key] {
        Tensor& g = store_->grad(key);
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k) g.data[k] += dout.data[k];
    };
    return id;
}

Tape::V Tape::param_row(const std::string& name, int row) {
    const Tensor& w = store_->value(name);
    Tensor value(w.cols, 1);
    for (int j = 0; j < w.cols; ++j) value[j] = w(row, j);
    V id = push(std::move(value));
    std::string key = name;
    nodes_[id].back = [this, id, key, row] {
        Tensor& g = store_->grad(key);
        const Tensor& dout = nodes_[id].grad;
        for (int j = 0; j < dout.rows; ++j) g(row, j) += dout[j];
    };
    return id;
}

Tape::V Tape::matvec(V w, V x) {
    const Tensor& wm = nodes_[w].value;
    const Tensor& xv = nodes_[x].value;
    assert(wm.cols == xv.rows && xv.cols == 1);
    Tensor out(wm.rows, 1);
    for (int i = 0; i < wm.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < wm.cols; ++j) acc += wm(i, j) * xv[j];
        out[i] = acc;
    }
    V id = push(std::move(out));
    nodes_[id].back = [this, id, w, x] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& wm = nodes_[w].value;
        const Tensor& xv = nodes_[x].value;
        Tensor& dw = nodes_[w].grad;
        Tensor& dx = nodes_[x].grad;
        for (int i = 0; i < wm.rows; ++i)
            for (int j = 0; j < wm.cols; ++j) {
                dw(i, j) += dout[i] * xv[j];
                dx[j] += dout[i] * wm(i, j);
            }
    };
    return id;
}

Tape::V Tape::add(V a, V b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    assert(av.size() == bv.size());
    Tensor out = av;
    for (int k = 0; k < out.size(); ++k) out.data[k] += bv.data[k];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, b] {
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k) {
            nodes_[a].grad.data[k] += dout.data[k];
            nodes_[b].grad.data[k] += dout.data[k];
        }
    };
    return id;
}

Tape::V Tape::sub(V a, V b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    assert(av.size() == bv.size());
    Tensor out = av;
    for (int k = 0; k < out.size(); ++k) out.data[k] -= bv.data[k];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, b] {
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k) {
            nodes_[a].grad.data[k] += dout.data[k];
            nodes_[b].grad.data[k] -= dout.data[k];
        }
    };
    return id;
}

Tape::V Tape::mul(V a, V b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    assert(av.size() == bv.size());
    Tensor out = av;
    for (int k = 0; k < out.size(); ++k) out.data[k] *= bv.data[k];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, b] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        for (int k = 0; k < dout.size(); ++k) {
            nodes_[a].grad.data[k] += dout.data[k] * bv.data[k];
            nodes_[b].grad.data[k] += dout.data[k] * av.data[k];
        }
    };
    return id;
}

Tape::V Tape::scale(V a, double s) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v *= s;
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, s] {
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] += dout.data[k] * s;
    };
    return id;
}

Tape::V Tape::add_scalar(V a, double s) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v += s;
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a] {
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] += dout.data[k];
    };
    return id;
}

Tape::V Tape::sigmoid(V a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& y = nodes_[id].value;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] +=
                dout.data[k] * y.data[k] * (1.0 - y.data[k]);
    };
    return id;
}

Tape::V Tape::tanh_(V a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = std::tanh(v);
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& y = nodes_[id].value;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] +=
                dout.data[k] * (1.0 - y.data[k] * y.data[k]);
    };
    return id;
}

Tape::V Tape::relu(V a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& x = nodes_[a].value;
        for (int k = 0; k < dout.size(); ++k)
            if (x.data[k] > 0.0) nodes_[a].grad.data[k] += dout.data[k];
    };
    return id;
}

Tape::V Tape::concat(const std::vector<V>& parts) {
    int total = 0;
    for (V p : parts) total += nodes_[p].value.rows;
    Tensor out(total, 1);
    int off = 0;
    for (V p : parts) {
        const Tensor& v = nodes_[p].value;
        for (int i = 0; i < v.rows; ++i) out[off + i] = v[i];
        off += v.rows;
    }
    V id = push(std::move(out));
    std::vector<V> ps = parts;
    nodes_[id].back = [this, id, ps] {
        const Tensor& dout = nodes_[id].grad;
        int off = 0;
        for (V p : ps) {
            Tensor& dp = nodes_[p].grad;
            for (int i = 0; i < dp.rows; ++i) dp[i] += dout[off + i];
            off += dp.rows;
        }
    };
    return id;
}

Tape::V Tape::slice(V a, int begin, int len) {
    const Tensor& av = nodes_[a].value;
    Tensor out(len, 1);
    for (int i = 0; i < len; ++i) out[i] = av[begin + i];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, begin, len] {
        const Tensor& dout = nodes_[id].grad;
        for (int i = 0; i < len; ++i)
            nodes_[a].grad[begin + i] += dout[i];
    };
    return id;
}

Tape::V Tape::dot(V a, V b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    assert(av.size() == bv.size());
    Tensor out(1, 1);
    double acc = 0.0;
    for (int k = 0; k < av.size(); ++k) acc += av.data[k] * bv.data[k];
    out[0] = acc;
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, b] {
        double d = nodes_[id].grad[0];
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        for (int k = 0; k < av.size(); ++k) {
            nodes_[a].grad.data[k] += d * bv.data[k];
            nodes_[b].grad.data[k] += d * av.data[k];
        }
    };
    return id;
}

Tape::V Tape::sum(const std::vector<V>& terms) {
    assert(!terms.empty());
    Tensor out = nodes_[terms[0]].value;
    for (std::size_t t = 1; t < terms.size(); ++t)
        for (int k = 0; k < out.size(); ++k)
            out.data[k] += nodes_[terms[t]].value.data[k];
    V id = push(std::move(out));
    std::vector<V> ts = terms;
    nodes_[id].back = [this, id, ts] {
        const Tensor& dout = nodes_[id].grad;
        for (V t : ts)
            for (int k = 0; k < dout.size(); ++k)
                nodes_[t].grad.data[k] += dout.data[k];
    };
    return id;
}

namespace {

void softmax_backward(const Tensor& y, const Tensor& dout, Tensor& dx) {
    // dx = (diag(y) - y y^T) dout
    double dot = 0.0;
    for (int k = 0; k < y.size(); ++k) dot += y.data[k] * dout.data[k];
    for (int k = 0; k < y.size(); ++k)
        dx.data[k] += y.data[k] * (dout.data[k] - dot);
}

}  // namespace

Tape::V Tape::softmax(V scores) {
    const Tensor& s = nodes_[scores].value;
    Tensor out(s.rows, 1);
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < s.size(); ++k) mx = std::max(mx, s.data[k]);
    double sum = 0.0;
    for (int k = 0; k < s.size(); ++k) {
        out.data[k] = std::exp(s.data[k] - mx);
        sum += out.data[k];
    }
    for (double& v : out.data) v /= sum;
    V id = push(std::move(out));
    nodes_[id].back = [this, id, scores] {
        softmax_backward(nodes_[id].value, nodes_[id].grad,
                         nodes_[scores].grad);
    };
    return id;
}

Tape::V Tape::softmax_bias(V scores, const std::vector<double>& bias) {
    const Tensor& s = nodes_[scores].value;
    assert(static_cast<std::size_t>(s.rows) == bias.size());
    Tensor out(s.rows, 1);
    bool any_open = false;
    for (double b : bias)
        if (!is_blocked(b)) any_open = true;
    if (!any_open) {
        // uniform fallback; constant w.r.t. scores
        for (double& v : out.data) v = 1.0 / s.rows;
        return push(std::move(out));
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < s.rows; ++k)
        if (!is_blocked(bias[k])) mx = std::max(mx, s.data[k] + bias[k]);
    double sum = 0.0;
    for (int k = 0; k < s.rows; ++k) {
        if (is_blocked(bias[k])) {
            out.data[k] = 0.0;
            continue;
        }
        out.data[k] = std::exp(s.data[k] + bias[k] - mx);
        sum += out.data[k];
    }
    for (double& v : out.data) v /= sum;
    V id = push(std::move(out));
    std::vector<double> b = bias;
    nodes_[id].back = [this, id, scores, b] {
        const Tensor& y = nodes_[id].value;
        const Tensor& dout = nodes_[id].grad;
        Tensor& dx = nodes_[scores].grad;
        double dotv = 0.0;
        for (int k = 0; k < y.size(); ++k) dotv += y.data[k] * dout.data[k];
        for (int k = 0; k < y.size(); ++k) {
            if (is_blocked(b[k])) continue;
            dx.data[k] += y.data[k] * (dout.data[k] - dotv);
        }
    };
    return id;
}

Tape::V Tape::weighted_sum(V weights, const std::vector<V>& vectors) {
    const Tensor& w = nodes_[weights].value;
    assert(static_cast<std::size_t>(w.rows) == vectors.size());
    assert(!vectors.empty());
    int d = nodes_[vectors[0]].value.rows;
    Tensor out(d, 1);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const Tensor& h = nodes_[vectors[i]].value;
        for (int k = 0; k < d; ++k) out[k] += w[static_cast<int>(i)] * h[k];
    }
    V id = push(std::move(out));
    std::vector<V> vs = vectors;
    nodes_[id].back = [this, id, weights, vs] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& w = nodes_[weights].value;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const Tensor& h = nodes_[vs[i]].value;
            Tensor& dh = nodes_[vs[i]].grad;
            double dwi = 0.0;
            for (int k = 0; k < dout.rows; ++k) {
                dwi += dout[k] * h[k];
                dh[k] += dout[k] * w[static_cast<int>(i)];
            }
            nodes_[weights].grad[static_cast<int>(i)] += dwi;
        }
    };
    return id;
}

Tape::V Tape::pick(V vec, int index) {
    Tensor out(1, 1);
    out[0] = nodes_[vec].value[index];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, vec, index] {
        nodes_[vec].grad[index] += nodes_[id].grad[0];
    };
    return id;
}

Tape::V Tape::log_(V a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = std::log(v);
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& x = nodes_[a].value;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] += dout.data[k] / x.data[k];
    };
    return id;
}

Tape::V Tape::neg(V a) { return scale(a, -1.0); }

Tape::V Tape::mix(V gate, V a, V b) {
    double g = nodes_[gate].value[0];
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    assert(av.size() == bv.size());
    Tensor out = av;
    for (int k = 0; k < out.size(); ++k)
        out.data[k] = g * av.data[k] + (1.0 - g) * bv.data[k];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, gate, a, b] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        double g = nodes_[gate].value[0];
        double dg = 0.0;
        for (int k = 0; k < dout.size(); ++k) {
            nodes_[a].grad.data[k] += dout.data[k] * g;
            nodes_[b].grad.data[k] += dout.data[k] * (1.0 - g);
            dg += dout.data[k] * (av.data[k] - bv.data[k]);
        }
        nodes_[gate].grad[0] += dg;
    };
    return id;
}

Tape::V Tape::pointer_mix(V gate, V gen, V copy, const std::vector<int>& copy_map,
                          int ext_size) {
    double g = nodes_[gate].value[0];
    const Tensor& genv = nodes_[gen].value;
    const Tensor& copyv = nodes_[copy].value;
    assert(static_cast<std::size_t>(copyv.rows) == copy_map.size());
    Tensor out(ext_size, 1);
    for (int i = 0; i < genv.rows; ++i) out[i] = g * genv[i];
    for (int p = 0; p < copyv.rows; ++p)
        out[copy_map[p]] += (1.0 - g) * copyv[p];
    V id = push(std::move(out));
    std::vector<int> map = copy_map;
    nodes_[id].back = [this, id, gate, gen, copy, map] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& genv = nodes_[gen].value;
        const Tensor& copyv = nodes_[copy].value;
        double g = nodes_[gate].value[0];
        double dg = 0.0;
        for (int i = 0; i < genv.rows; ++i) {
            nodes_[gen].grad[i] += dout[i] * g;
            dg += dout[i] * genv[i];
        }
        for (int p = 0; p < copyv.rows; ++p) {
            nodes_[copy].grad[p] += dout[map[p]] * (1.0 - g);
            dg -= dout[map[p]] * copyv[p];
        }
        nodes_[gate].grad[0] += dg;
    };
    return id;
}

Tape::V Tape::mask_renorm(V probs, const std::vector<double>& mask01) {
    const Tensor& p = nodes_[probs].value;
    assert(static_cast<std::size_t>(p.rows) == mask01.size());
    double z = 0.0;
    for (int k = 0; k < p.rows; ++k) z += p[k] * mask01[k];
    Tensor out(p.rows, 1);
    for (int k = 0; k < p.rows; ++k) out[k] = p[k] * mask01[k] / z;
    V id = push(std::move(out));
    std::vector<double> m = mask01;
    nodes_[id].back = [this, id, probs, m] {
        const Tensor& dout = nodes_[id].grad;
        const Tensor& p = nodes_[probs].value;
        double z = 0.0;
        for (int k = 0; k < p.rows; ++k) z += p[k] * m[k];
        double acc = 0.0;  // sum_j dout_j * m_j * p_j
        for (int k = 0; k < p.rows; ++k) acc += dout[k] * m[k] * p[k];
        for (int k = 0; k < p.rows; ++k)
            nodes_[probs].grad[k] += m[k] * (dout[k] * z - acc) / (z * z);
    };
    return id;
}

Tape::V Tape::dropout(V a, double rate, std::mt19937_64& rng, bool enabled) {
    if (!enabled || rate <= 0.0) return a;
    const Tensor& av = nodes_[a].value;
    std::bernoulli_distribution keep(1.0 - rate);
    std::vector<double> mask(av.size());
    double inv = 1.0 / (1.0 - rate);
    for (double& m : mask) m = keep(rng) ? inv : 0.0;
    Tensor out = av;
    for (int k = 0; k < out.size(); ++k) out.data[k] *= mask[k];
    V id = push(std::move(out));
    nodes_[id].back = [this, id, a, mask] {
        const Tensor& dout = nodes_[id].grad;
        for (int k = 0; k < dout.size(); ++k)
            nodes_[a].grad.data[k] += dout.data[k] * mask[k];
    };
    return id;
}

void Tape::backward(V root) {
    assert(nodes_[root].value.size() == 1);
    nodes_[root].grad[0] = 1.0;
    for (int id = root; id >= 0; --id)
        if (nodes_[id].back) nodes_[id].back();
}

}  // namespace comet
