#include "harbench/neuralnet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace harbench::nn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t shape_size(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)), v(shape_size(shape), 0.0) {}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("rho must be in [0,1)");
    if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
}

// ---- layers ----------------------------------------------------------------

class Layer {
public:
    virtual ~Layer() = default;
    virtual void init(Rng&) {}
    virtual std::size_t n_params() const { return 0; }
    virtual double* params() { return nullptr; }
    virtual double* grads() { return nullptr; }
    virtual Tensor forward(const Tensor& in) const = 0;
    /// Gradient w.r.t. the input; parameter gradients accumulate internally.
    virtual Tensor backward(const Tensor& in, const Tensor& out, const Tensor& gout) = 0;
    virtual double kink_margin(const Tensor&) const { return kInf; }
    virtual std::unique_ptr<Layer> clone() const = 0;
};

namespace {

class Conv2dLayer : public Layer {
public:
    Conv2dLayer(const Conv2dSpec& s, const std::vector<std::size_t>& in_shape)
        : f_(s.filters), kh_(s.kh), kw_(s.kw), h_(in_shape[0]), w_(in_shape[1]), d_(in_shape[2]) {
        p_.assign(f_ * kh_ * kw_ * d_ + f_, 0.0);
        g_.assign(p_.size(), 0.0);
    }

    void init(Rng& rng) override {
        const double s = 1.0 / std::sqrt(static_cast<double>(kh_ * kw_ * d_));
        for (std::size_t i = 0; i < f_ * kh_ * kw_ * d_; ++i) p_[i] = rng.uniform(-s, s);
        // biases stay zero
    }

    std::size_t n_params() const override { return p_.size(); }
    double* params() override { return p_.data(); }
    double* grads() override { return g_.data(); }

    Tensor forward(const Tensor& in) const override {
        const std::size_t oh = h_ - kh_ + 1, ow = w_ - kw_ + 1;
        Tensor out({oh, ow, f_});
        const double* bias = p_.data() + f_ * kh_ * kw_ * d_;
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t f = 0; f < f_; ++f) {
                    double acc = bias[f];
                    const double* k = p_.data() + f * kh_ * kw_ * d_;
                    for (std::size_t i = 0; i < kh_; ++i) {
                        const double* row = in.v.data() + ((y + i) * w_ + x) * d_;
                        for (std::size_t j = 0; j < kw_ * d_; ++j) acc += row[j] * k[i * kw_ * d_ + j];
                    }
                    out.v[(y * ow + x) * f_ + f] = acc;
                }
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor&, const Tensor& gout) override {
        const std::size_t oh = h_ - kh_ + 1, ow = w_ - kw_ + 1;
        Tensor gin({h_, w_, d_});
        double* gbias = g_.data() + f_ * kh_ * kw_ * d_;
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t f = 0; f < f_; ++f) {
                    const double go = gout.v[(y * ow + x) * f_ + f];
                    if (go == 0.0) continue;
                    gbias[f] += go;
                    const double* k = p_.data() + f * kh_ * kw_ * d_;
                    double* gk = g_.data() + f * kh_ * kw_ * d_;
                    for (std::size_t i = 0; i < kh_; ++i) {
                        const double* row = in.v.data() + ((y + i) * w_ + x) * d_;
                        double* grow = gin.v.data() + ((y + i) * w_ + x) * d_;
                        for (std::size_t j = 0; j < kw_ * d_; ++j) {
                            gk[i * kw_ * d_ + j] += go * row[j];
                            grow[j] += go * k[i * kw_ * d_ + j];
                        }
                    }
                }
        return gin;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2dLayer>(*this); }

private:
    std::size_t f_, kh_, kw_, h_, w_, d_;
    std::vector<double> p_, g_;
};

class PoolLayer : public Layer {
public:
    PoolLayer(std::size_t ph, std::size_t pw, bool is_max, const std::vector<std::size_t>& in_shape)
        : ph_(ph), pw_(pw), max_(is_max), h_(in_shape[0]), w_(in_shape[1]), d_(in_shape[2]) {}

    Tensor forward(const Tensor& in) const override {
        const std::size_t oh = h_ / ph_, ow = w_ / pw_;
        Tensor out({oh, ow, d_});
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t d = 0; d < d_; ++d) {
                    double acc = max_ ? -kInf : 0.0;
                    for (std::size_t i = 0; i < ph_; ++i)
                        for (std::size_t j = 0; j < pw_; ++j) {
                            const double v = in.v[((y * ph_ + i) * w_ + x * pw_ + j) * d_ + d];
                            if (max_) {
                                if (v > acc) acc = v;
                            } else {
                                acc += v;
                            }
                        }
                    out.v[(y * ow + x) * d_ + d] =
                        max_ ? acc : acc / static_cast<double>(ph_ * pw_);
                }
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor&, const Tensor& gout) override {
        const std::size_t oh = h_ / ph_, ow = w_ / pw_;
        Tensor gin({h_, w_, d_});
        const double inv_area = 1.0 / static_cast<double>(ph_ * pw_);
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t d = 0; d < d_; ++d) {
                    const double go = gout.v[(y * ow + x) * d_ + d];
                    if (max_) {
                        // first occurrence of the maximum, row-major scan
                        double best = -kInf;
                        std::size_t bi = 0;
                        for (std::size_t i = 0; i < ph_; ++i)
                            for (std::size_t j = 0; j < pw_; ++j) {
                                const std::size_t idx =
                                    ((y * ph_ + i) * w_ + x * pw_ + j) * d_ + d;
                                if (in.v[idx] > best) {
                                    best = in.v[idx];
                                    bi = idx;
                                }
                            }
                        gin.v[bi] += go;
                    } else {
                        for (std::size_t i = 0; i < ph_; ++i)
                            for (std::size_t j = 0; j < pw_; ++j)
                                gin.v[((y * ph_ + i) * w_ + x * pw_ + j) * d_ + d] +=
                                    go * inv_area;
                    }
                }
        return gin;
    }

    double kink_margin(const Tensor& in) const override {
        if (!max_ || ph_ * pw_ == 1) return kInf;
        const std::size_t oh = h_ / ph_, ow = w_ / pw_;
        double margin = kInf;
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t d = 0; d < d_; ++d) {
                    double top1 = -kInf, top2 = -kInf;
                    for (std::size_t i = 0; i < ph_; ++i)
                        for (std::size_t j = 0; j < pw_; ++j) {
                            const double v = in.v[((y * ph_ + i) * w_ + x * pw_ + j) * d_ + d];
                            if (v > top1) {
                                top2 = top1;
                                top1 = v;
                            } else if (v > top2) {
                                top2 = v;
                            }
                        }
                    margin = std::min(margin, top1 - top2);
                }
        return margin;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<PoolLayer>(*this); }

private:
    std::size_t ph_, pw_;
    bool max_;
    std::size_t h_, w_, d_;
};

class FlattenLayer : public Layer {
public:
    explicit FlattenLayer(std::size_t n) : n_(n) {}
    Tensor forward(const Tensor& in) const override {
        Tensor out({n_});
        out.v = in.v;
        return out;
    }
    Tensor backward(const Tensor& in, const Tensor&, const Tensor& gout) override {
        Tensor gin(in.shape);
        gin.v = gout.v;
        return gin;
    }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<FlattenLayer>(*this); }

private:
    std::size_t n_;
};

class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t units, std::size_t in_size) : units_(units), in_(in_size) {
        p_.assign(units_ * in_ + units_, 0.0);
        g_.assign(p_.size(), 0.0);
    }

    void init(Rng& rng) override {
        const double s = 1.0 / std::sqrt(static_cast<double>(in_));
        for (std::size_t i = 0; i < units_ * in_; ++i) p_[i] = rng.uniform(-s, s);
    }

    std::size_t n_params() const override { return p_.size(); }
    double* params() override { return p_.data(); }
    double* grads() override { return g_.data(); }

    Tensor forward(const Tensor& in) const override {
        Tensor out({units_});
        const double* bias = p_.data() + units_ * in_;
        for (std::size_t u = 0; u < units_; ++u) {
            double acc = bias[u];
            const double* w = p_.data() + u * in_;
            for (std::size_t i = 0; i < in_; ++i) acc += w[i] * in.v[i];
            out.v[u] = acc;
        }
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor&, const Tensor& gout) override {
        Tensor gin(in.shape);
        double* gbias = g_.data() + units_ * in_;
        for (std::size_t u = 0; u < units_; ++u) {
            const double go = gout.v[u];
            gbias[u] += go;
            const double* w = p_.data() + u * in_;
            double* gw = g_.data() + u * in_;
            for (std::size_t i = 0; i < in_; ++i) {
                gw[i] += go * in.v[i];
                gin.v[i] += go * w[i];
            }
        }
        return gin;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

private:
    std::size_t units_, in_;
    std::vector<double> p_, g_;
};

class ActivationLayer : public Layer {
public:
    explicit ActivationLayer(Act kind) : kind_(kind) {}

    Tensor forward(const Tensor& in) const override {
        Tensor out(in.shape);
        if (kind_ == Act::relu)
            for (std::size_t i = 0; i < in.size(); ++i) out.v[i] = in.v[i] > 0.0 ? in.v[i] : 0.0;
        else
            for (std::size_t i = 0; i < in.size(); ++i) out.v[i] = std::tanh(in.v[i]);
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& out, const Tensor& gout) override {
        Tensor gin(in.shape);
        if (kind_ == Act::relu)
            for (std::size_t i = 0; i < in.size(); ++i)
                gin.v[i] = in.v[i] > 0.0 ? gout.v[i] : 0.0;
        else
            for (std::size_t i = 0; i < in.size(); ++i)
                gin.v[i] = gout.v[i] * (1.0 - out.v[i] * out.v[i]);
        return gin;
    }

    double kink_margin(const Tensor& in) const override {
        if (kind_ != Act::relu) return kInf;
        double m = kInf;
        for (double v : in.v) m = std::min(m, std::fabs(v));
        return m;
    }

    std::unique_ptr<Layer> clone() const override {
        return std::make_unique<ActivationLayer>(*this);
    }

private:
    Act kind_;
};

class SoftmaxLayer : public Layer {
public:
    Tensor forward(const Tensor& in) const override {
        Tensor out(in.shape);
        double mx = -kInf;
        for (double v : in.v) mx = std::max(mx, v);
        double sum = 0.0;
        for (std::size_t i = 0; i < in.size(); ++i) {
            out.v[i] = std::exp(in.v[i] - mx);
            sum += out.v[i];
        }
        for (double& v : out.v) v /= sum;
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& out, const Tensor& gout) override {
        Tensor gin(in.shape);
        double dot = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) dot += gout.v[i] * out.v[i];
        for (std::size_t i = 0; i < out.size(); ++i) gin.v[i] = out.v[i] * (gout.v[i] - dot);
        return gin;
    }

    std::unique_ptr<Layer> clone() const override { return std::make_unique<SoftmaxLayer>(*this); }
};

class ZeroPadColumnsLayer : public Layer {
public:
    ZeroPadColumnsLayer(std::vector<std::size_t> positions, const std::vector<std::size_t>& in_shape)
        : positions_(std::move(positions)), h_(in_shape[0]), w_(in_shape[1]), d_(in_shape[2]) {
        new_col_.resize(w_);
        for (std::size_t c = 0; c < w_; ++c) {
            std::size_t shift = 0;
            for (std::size_t p : positions_)
                if (p <= c) ++shift;
            new_col_[c] = c + shift;
        }
    }

    Tensor forward(const Tensor& in) const override {
        Tensor out({h_, w_ + positions_.size(), d_});
        const std::size_t ow = w_ + positions_.size();
        for (std::size_t r = 0; r < h_; ++r)
            for (std::size_t c = 0; c < w_; ++c)
                for (std::size_t d = 0; d < d_; ++d)
                    out.v[(r * ow + new_col_[c]) * d_ + d] = in.v[(r * w_ + c) * d_ + d];
        return out;
    }

    Tensor backward(const Tensor&, const Tensor&, const Tensor& gout) override {
        Tensor gin({h_, w_, d_});
        const std::size_t ow = w_ + positions_.size();
        for (std::size_t r = 0; r < h_; ++r)
            for (std::size_t c = 0; c < w_; ++c)
                for (std::size_t d = 0; d < d_; ++d)
                    gin.v[(r * w_ + c) * d_ + d] = gout.v[(r * ow + new_col_[c]) * d_ + d];
        return gin;
    }

    std::unique_ptr<Layer> clone() const override {
        return std::make_unique<ZeroPadColumnsLayer>(*this);
    }

private:
    std::vector<std::size_t> positions_;
    std::size_t h_, w_, d_;
    std::vector<std::size_t> new_col_;
};

void require_rank3(const std::vector<std::size_t>& s, const char* what) {
    if (s.size() != 3)
        throw std::invalid_argument(std::string(what) + " needs a {height, width, depth} input");
}

}  // namespace

std::vector<std::vector<std::size_t>> infer_shapes(const NetSpec& spec) {
    if (spec.input_shape.empty()) throw std::invalid_argument("empty input shape");
    for (std::size_t d : spec.input_shape)
        if (d == 0) throw std::invalid_argument("input shape has a zero dimension");

    std::vector<std::vector<std::size_t>> shapes{spec.input_shape};
    for (const auto& layer : spec.layers) {
        const auto& in = shapes.back();
        std::vector<std::size_t> out;
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Conv2dSpec>) {
                    require_rank3(in, "conv2d");
                    if (l.filters < 1) throw std::invalid_argument("conv2d needs >= 1 filter");
                    if (l.kh > in[0] || l.kw > in[1])
                        throw std::invalid_argument(
                            "conv2d kernel " + std::to_string(l.kh) + "x" + std::to_string(l.kw) +
                            " larger than input " + std::to_string(in[0]) + "x" +
                            std::to_string(in[1]));
                    out = {in[0] - l.kh + 1, in[1] - l.kw + 1, l.filters};
                } else if constexpr (std::is_same_v<T, MaxPoolSpec> ||
                                     std::is_same_v<T, AvgPoolSpec>) {
                    require_rank3(in, "pool");
                    if (l.h < 1 || l.w < 1) throw std::invalid_argument("pool dims must be >= 1");
                    if (l.h > in[0] || l.w > in[1])
                        throw std::invalid_argument("pool " + std::to_string(l.h) + "x" +
                                                    std::to_string(l.w) + " larger than input " +
                                                    std::to_string(in[0]) + "x" +
                                                    std::to_string(in[1]));
                    out = {in[0] / l.h, in[1] / l.w, in[2]};
                } else if constexpr (std::is_same_v<T, FlattenSpec>) {
                    out = {shape_size(in)};
                } else if constexpr (std::is_same_v<T, DenseSpec>) {
                    if (l.units < 1) throw std::invalid_argument("dense needs >= 1 unit");
                    out = {l.units};
                } else if constexpr (std::is_same_v<T, ActivationSpec>) {
                    out = in;
                } else if constexpr (std::is_same_v<T, SoftmaxSpec>) {
                    if (in.size() != 1)
                        throw std::invalid_argument("softmax expects a flat input");
                    out = in;
                } else if constexpr (std::is_same_v<T, ZeroPadColumnsSpec>) {
                    require_rank3(in, "zero-pad");
                    for (std::size_t p : l.positions)
                        if (p > in[1])
                            throw std::invalid_argument("zero-pad position beyond input width");
                    out = {in[0], in[1] + l.positions.size(), in[2]};
                }
            },
            layer);
        for (std::size_t d : out)
            if (d == 0) throw std::invalid_argument("layer output shape collapsed to zero");
        shapes.push_back(std::move(out));
    }
    return shapes;
}

// ---- network ---------------------------------------------------------------

Network::Network(const NetSpec& spec, std::uint64_t init_seed) : spec_(spec) {
    shapes_ = infer_shapes(spec_);
    Rng rng(mix_seed(init_seed, "net-init"));
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const auto& in = shapes_[i];
        std::unique_ptr<Layer> layer;
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Conv2dSpec>)
                    layer = std::make_unique<Conv2dLayer>(l, in);
                else if constexpr (std::is_same_v<T, MaxPoolSpec>)
                    layer = std::make_unique<PoolLayer>(l.h, l.w, true, in);
                else if constexpr (std::is_same_v<T, AvgPoolSpec>)
                    layer = std::make_unique<PoolLayer>(l.h, l.w, false, in);
                else if constexpr (std::is_same_v<T, FlattenSpec>)
                    layer = std::make_unique<FlattenLayer>(shape_size(in));
                else if constexpr (std::is_same_v<T, DenseSpec>)
                    layer = std::make_unique<DenseLayer>(l.units, shape_size(in));
                else if constexpr (std::is_same_v<T, ActivationSpec>)
                    layer = std::make_unique<ActivationLayer>(l.kind);
                else if constexpr (std::is_same_v<T, SoftmaxSpec>)
                    layer = std::make_unique<SoftmaxLayer>();
                else if constexpr (std::is_same_v<T, ZeroPadColumnsSpec>)
                    layer = std::make_unique<ZeroPadColumnsLayer>(l.positions, in);
            },
            spec_.layers[i]);
        layer->init(rng);
        layers_.push_back(std::move(layer));
    }
}

Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;
Network::~Network() = default;

Network Network::clone() const {
    Network copy(spec_, 0);
    copy.shapes_ = shapes_;
    copy.layers_.clear();
    for (const auto& l : layers_) copy.layers_.push_back(l->clone());
    return copy;
}

const std::vector<std::size_t>& Network::output_shape() const { return shapes_.back(); }

Tensor Network::forward(const Tensor& x) const {
    Tensor cur = x;
    for (const auto& l : layers_) cur = l->forward(cur);
    return cur;
}

namespace {
bool ends_in_softmax(const NetSpec& spec) {
    return !spec.layers.empty() && std::holds_alternative<SoftmaxSpec>(spec.layers.back());
}

double cross_entropy_from_logits(const Tensor& logits, std::size_t label, Tensor* probs) {
    double mx = -kInf;
    for (double v : logits.v) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits.v) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    if (probs) {
        *probs = Tensor(logits.shape);
        for (std::size_t i = 0; i < logits.size(); ++i)
            probs->v[i] = std::exp(logits.v[i] - lse);
    }
    return lse - logits.v[label];
}
}  // namespace

double Network::forward_loss(const Tensor& x, std::size_t label) const {
    if (!ends_in_softmax(spec_))
        throw std::invalid_argument("loss requires a softmax output layer");
    Tensor cur = x;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) cur = layers_[i]->forward(cur);
    return cross_entropy_from_logits(cur, label, nullptr);
}

double Network::forward_backward(const Tensor& x, std::size_t label) {
    if (!ends_in_softmax(spec_))
        throw std::invalid_argument("loss requires a softmax output layer");
    // activations[i] is the input of layer i; the softmax layer itself is
    // folded into the stable cross-entropy at the logits.
    std::vector<Tensor> acts;
    acts.reserve(layers_.size());
    acts.push_back(x);
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
        acts.push_back(layers_[i]->forward(acts.back()));

    Tensor probs;
    const double loss = cross_entropy_from_logits(acts.back(), label, &probs);
    Tensor grad = probs;
    grad.v[label] -= 1.0;
    for (std::size_t i = layers_.size() - 1; i-- > 0;)
        grad = layers_[i]->backward(acts[i], acts[i + 1], grad);
    return loss;
}

std::size_t Network::n_params() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l->n_params();
    return n;
}

double Network::get_param(std::size_t i) const {
    for (const auto& l : layers_) {
        const std::size_t n = l->n_params();
        if (i < n) return const_cast<Layer&>(*l).params()[i];
        i -= n;
    }
    throw std::out_of_range("param index");
}

void Network::set_param(std::size_t i, double v) {
    for (auto& l : layers_) {
        const std::size_t n = l->n_params();
        if (i < n) {
            l->params()[i] = v;
            return;
        }
        i -= n;
    }
    throw std::out_of_range("param index");
}

double Network::get_grad(std::size_t i) const {
    for (const auto& l : layers_) {
        const std::size_t n = l->n_params();
        if (i < n) return const_cast<Layer&>(*l).grads()[i];
        i -= n;
    }
    throw std::out_of_range("grad index");
}

void Network::zero_grads() {
    for (auto& l : layers_) {
        double* g = l->grads();
        if (g) std::fill(g, g + l->n_params(), 0.0);
    }
}

void Network::scale_grads(double s) {
    for (auto& l : layers_) {
        double* g = l->grads();
        for (std::size_t i = 0; i < l->n_params(); ++i) g[i] *= s;
    }
}

std::vector<Network::ParamBlock> Network::param_blocks() {
    std::vector<ParamBlock> blocks;
    for (auto& l : layers_)
        if (l->n_params() > 0) blocks.push_back({l->params(), l->grads(), l->n_params()});
    return blocks;
}

double Network::kink_margin(const Tensor& x) const {
    double margin = kInf;
    Tensor cur = x;
    for (const auto& l : layers_) {
        margin = std::min(margin, l->kink_margin(cur));
        cur = l->forward(cur);
    }
    return margin;
}

// ---- optimizer and fit ------------------------------------------------------

void adadelta_step(double* params, const double* grads, std::size_t n, AdadeltaState& state,
                   std::size_t offset, double rho, double eps) {
    if (offset + n > state.grad_sq.size()) throw std::invalid_argument("adadelta state too small");
    for (std::size_t i = 0; i < n; ++i) {
        double& eg2 = state.grad_sq[offset + i];
        double& edx2 = state.delta_sq[offset + i];
        const double g = grads[i];
        eg2 = rho * eg2 + (1.0 - rho) * g * g;
        const double dx = -std::sqrt(edx2 + eps) / std::sqrt(eg2 + eps) * g;
        edx2 = rho * edx2 + (1.0 - rho) * dx * dx;
        params[i] += dx;
    }
}

std::string training_log_jsonl(const std::vector<EpochLog>& log) {
    std::ostringstream os;
    for (const auto& e : log) {
        char line[128];
        std::snprintf(line, sizeof line, "{\"epoch\":%zu,\"loss\":%.17g,\"wall_s\":%.6f}\n",
                      e.epoch, e.loss, e.wall_s);
        os << line;
    }
    return os.str();
}

std::vector<double> TrainedNet::predict_proba(const Tensor& x) const {
    return net.forward(x).v;
}

TrainedNet fit(const NetSpec& spec, const std::vector<Tensor>& inputs,
               const std::vector<std::size_t>& labels, std::size_t n_classes,
               const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.empty()) throw std::invalid_argument("fit: empty training set");
    if (inputs.size() != labels.size()) throw std::invalid_argument("fit: inputs/labels mismatch");
    if (!ends_in_softmax(spec)) throw std::invalid_argument("fit: net must end in softmax");
    for (std::size_t y : labels)
        if (y >= n_classes) throw std::invalid_argument("fit: label out of range");

    Network net(spec, mix_seed(cfg.seed, "fit-init"));
    if (net.output_shape() != std::vector<std::size_t>{n_classes})
        throw std::invalid_argument("fit: output width does not match n_classes");

    AdadeltaState state(net.n_params());
    Rng shuffler(mix_seed(cfg.seed, "fit-shuffle"));
    std::vector<EpochLog> log;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffler.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            net.zero_grads();
            for (std::size_t i = begin; i < end; ++i)
                loss_sum += net.forward_backward(inputs[order[i]], labels[order[i]]);
            net.scale_grads(1.0 / static_cast<double>(end - begin));
            std::size_t offset = 0;
            for (auto& b : net.param_blocks()) {
                adadelta_step(b.params, b.grads, b.n, state, offset, cfg.rho, cfg.eps);
                offset += b.n;
            }
        }
        const double mean_loss = loss_sum / static_cast<double>(order.size());
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log.push_back({epoch, mean_loss, wall});
        if (!std::isfinite(mean_loss))
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch));
        if (mean_loss <= cfg.stop_loss) break;
    }
    return TrainedNet{std::move(net), std::move(log)};
}

GradCheckResult grad_check(Network& net, const Tensor& x, std::size_t label, double eps,
                           std::size_t max_params, std::uint64_t subsample_seed) {
    net.zero_grads();
    net.forward_backward(x, label);

    const std::size_t total = net.n_params();
    std::vector<std::size_t> which;
    if (max_params == 0 || max_params >= total) {
        which.resize(total);
        std::iota(which.begin(), which.end(), 0);
    } else {
        std::vector<std::size_t> all(total);
        std::iota(all.begin(), all.end(), 0);
        Rng rng(mix_seed(subsample_seed, "grad-subsample"));
        rng.shuffle(all);
        which.assign(all.begin(), all.begin() + max_params);
    }

    GradCheckResult res;
    for (std::size_t i : which) {
        const double saved = net.get_param(i);
        net.set_param(i, saved + eps);
        const double lp = net.forward_loss(x, label);
        net.set_param(i, saved - eps);
        const double lm = net.forward_loss(x, label);
        net.set_param(i, saved);
        const double numeric = (lp - lm) / (2.0 * eps);
        const double analytic = net.get_grad(i);
        const double diff = std::fabs(analytic - numeric);
        // absolute floor: central differences bottom out near roundoff
        const double rel = diff <= 1e-7 ? 0.0 : diff / std::max(std::fabs(analytic), std::fabs(numeric));
        res.max_rel_err = std::max(res.max_rel_err, rel);
        ++res.params_checked;
    }
    return res;
}

// ---- builders ---------------------------------------------------------------

NetSpec build_chen_xue(std::size_t height, std::size_t width, std::size_t n_classes) {
    NetSpec spec;
    spec.input_shape = {height, width, 1};
    spec.layers = {Conv2dSpec{18, 12, 2}, ActivationSpec{Act::relu}, MaxPoolSpec{2, 1},
                   Conv2dSpec{36, 12, 1}, ActivationSpec{Act::relu}, MaxPoolSpec{2, 1},
                   Conv2dSpec{24, 12, 1}, ActivationSpec{Act::relu}, MaxPoolSpec{2, 1},
                   FlattenSpec{},         DenseSpec{n_classes},      SoftmaxSpec{}};
    infer_shapes(spec);
    return spec;
}

NetSpec build_jiang_yin(std::size_t image_h, std::size_t image_w, std::size_t n_classes,
                        std::size_t filters1, std::size_t filters2) {
    NetSpec spec;
    spec.input_shape = {image_h, image_w, 1};
    spec.layers = {Conv2dSpec{filters1, 5, 5}, ActivationSpec{Act::relu}, AvgPoolSpec{4, 4},
                   Conv2dSpec{filters2, 5, 5}, ActivationSpec{Act::relu}, AvgPoolSpec{2, 2},
                   FlattenSpec{},              DenseSpec{n_classes},      SoftmaxSpec{}};
    infer_shapes(spec);
    return spec;
}

std::vector<std::size_t> signal_image_sequence(std::size_t n_channels) {
    if (n_channels < 2) throw std::invalid_argument("signal image needs >= 2 channels");
    const std::size_t C = n_channels;
    std::set<std::pair<std::size_t, std::size_t>> uncovered;
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = i + 1; j < C; ++j) uncovered.insert({i, j});

    auto cover = [&](std::size_t a, std::size_t b) {
        uncovered.erase({std::min(a, b), std::max(a, b)});
    };

    std::vector<std::size_t> seq{0};
    while (!uncovered.empty()) {
        const std::size_t last = seq.back();
        std::size_t next = C;
        for (std::size_t c = 0; c < C; ++c) {
            if (c == last) continue;
            if (uncovered.count({std::min(last, c), std::max(last, c)})) {
                next = c;
                break;
            }
        }
        if (next == C) next = uncovered.begin()->first;  // jump to an uncovered pair
        cover(last, next);
        seq.push_back(next);
    }
    return seq;
}

Matrix dft2d_magnitude(const Matrix& m) {
    using cd = std::complex<double>;
    const std::size_t R = m.rows, T = m.cols;
    const double two_pi = 6.283185307179586476925286766559;

    // separable DFT: rows first, then columns
    std::vector<cd> rowf(R * T);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t v = 0; v < T; ++v) {
            cd acc(0.0, 0.0);
            for (std::size_t t = 0; t < T; ++t) {
                const double ang = -two_pi * static_cast<double>(v * t % T) / static_cast<double>(T);
                acc += m.at(r, t) * cd(std::cos(ang), std::sin(ang));
            }
            rowf[r * T + v] = acc;
        }
    Matrix out(R, T);
    for (std::size_t u = 0; u < R; ++u)
        for (std::size_t v = 0; v < T; ++v) {
            cd acc(0.0, 0.0);
            for (std::size_t r = 0; r < R; ++r) {
                const double ang = -two_pi * static_cast<double>(u * r % R) / static_cast<double>(R);
                acc += rowf[r * T + v] * cd(std::cos(ang), std::sin(ang));
            }
            out.at(u, v) = std::abs(acc);
        }
    return out;
}

Matrix fftshift(const Matrix& m) {
    Matrix out(m.rows, m.cols);
    const std::size_t sr = (m.rows + 1) / 2, sc = (m.cols + 1) / 2;
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c)
            out.at(r, c) = m.at((r + sr) % m.rows, (c + sc) % m.cols);
    return out;
}

Tensor signal_image(const Window& w) {
    const auto seq = signal_image_sequence(w.data.cols);
    Matrix img(seq.size(), w.data.rows);
    for (std::size_t r = 0; r < seq.size(); ++r)
        for (std::size_t t = 0; t < w.data.rows; ++t) img.at(r, t) = w.data.at(t, seq[r]);
    Matrix mag = fftshift(dft2d_magnitude(img));
    Tensor out({mag.rows, mag.cols, 1});
    out.v = std::move(mag.data);
    return out;
}

namespace {
NetSpec build_ha(std::size_t height, const std::vector<std::size_t>& groups,
                 std::size_t n_classes, bool reinsert_padding) {
    if (groups.size() < 2)
        throw std::invalid_argument("Ha architectures need >= 2 modality groups");
    std::size_t width = groups.size() - 1;
    for (std::size_t g : groups) {
        if (g == 0) throw std::invalid_argument("empty modality group");
        width += g;
    }

    NetSpec spec;
    spec.input_shape = {height, width, 1};
    spec.layers = {Conv2dSpec{32, 3, 3}, ActivationSpec{Act::relu}, MaxPoolSpec{2, 1}};
    if (reinsert_padding) {
        // feature-map column whose 3-wide receptive field is centered on the
        // zero column between group i and i+1
        std::vector<std::size_t> positions;
        std::size_t start = 0;
        for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
            const std::size_t zero_col = start + groups[i];
            positions.push_back(zero_col >= 1 ? zero_col - 1 : 0);
            start = zero_col + 1;
        }
        spec.layers.push_back(ZeroPadColumnsSpec{positions});
    }
    spec.layers.push_back(Conv2dSpec{64, 3, 3});
    spec.layers.push_back(ActivationSpec{Act::relu});
    spec.layers.push_back(MaxPoolSpec{2, 1});
    spec.layers.push_back(FlattenSpec{});
    spec.layers.push_back(DenseSpec{n_classes});
    spec.layers.push_back(SoftmaxSpec{});
    infer_shapes(spec);
    return spec;
}
}  // namespace

NetSpec build_ha2015(std::size_t height, const std::vector<std::size_t>& modality_groups,
                     std::size_t n_classes) {
    return build_ha(height, modality_groups, n_classes, false);
}

NetSpec build_ha2016(std::size_t height, const std::vector<std::size_t>& modality_groups,
                     std::size_t n_classes) {
    return build_ha(height, modality_groups, n_classes, true);
}

Tensor zero_padded_input(const Window& w, const std::vector<std::size_t>& modality_groups) {
    std::size_t total = 0;
    for (std::size_t g : modality_groups) total += g;
    if (total != w.data.cols)
        throw std::invalid_argument("modality group widths do not sum to channel count");
    const std::size_t width = total + modality_groups.size() - 1;

    Tensor out({w.data.rows, width, 1});
    for (std::size_t r = 0; r < w.data.rows; ++r) {
        std::size_t src = 0, dst = 0;
        for (std::size_t gi = 0; gi < modality_groups.size(); ++gi) {
            for (std::size_t c = 0; c < modality_groups[gi]; ++c, ++src, ++dst)
                out.v[r * width + dst] = w.data.at(r, src);
            if (gi + 1 < modality_groups.size()) ++dst;  // zero column
        }
    }
    return out;
}

Tensor window_tensor(const Window& w) {
    Tensor t({w.data.rows, w.data.cols, 1});
    t.v = w.data.data;
    return t;
}

}  // namespace harbench::nn
