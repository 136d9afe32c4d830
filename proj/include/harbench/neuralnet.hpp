#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "harbench/matrix.hpp"
#include "harbench/rng.hpp"
#include "harbench/windowing.hpp"

namespace harbench::nn {

/// Dense n-dimensional array, row-major. 3-D tensors are {height, width,
/// depth} with height = time and width = channels for raw signal input.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);
    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

// ---- layer specs ----------------------------------------------------------

struct Conv2dSpec { std::size_t filters = 1, kh = 1, kw = 1; };  // valid padding, stride 1
struct MaxPoolSpec { std::size_t h = 2, w = 1; };                // truncating
struct AvgPoolSpec { std::size_t h = 2, w = 2; };
struct FlattenSpec {};
struct DenseSpec { std::size_t units = 1; };
enum class Act { relu, tanh };
struct ActivationSpec { Act kind = Act::relu; };
struct SoftmaxSpec {};
/// Inserts one zero column before each listed (pre-insert) column index.
struct ZeroPadColumnsSpec { std::vector<std::size_t> positions; };

using LayerSpec = std::variant<Conv2dSpec, MaxPoolSpec, AvgPoolSpec, FlattenSpec, DenseSpec,
                               ActivationSpec, SoftmaxSpec, ZeroPadColumnsSpec>;

struct NetSpec {
    std::vector<std::size_t> input_shape;  // {H,W,D} for conv stacks, {N} for dense-only
    std::vector<LayerSpec> layers;
};

/// Output shape of every layer (input shape first). Throws
/// std::invalid_argument if any dimension collapses to zero or a kernel/pool
/// exceeds its input, so a successfully built net cannot fail on shapes.
std::vector<std::vector<std::size_t>> infer_shapes(const NetSpec& spec);

// ---- training -------------------------------------------------------------

struct TrainConfig {
    std::size_t max_epochs = 200;
    double stop_loss = 0.2;
    std::size_t batch_size = 1000;  // 250 is the documented large-dataset override
    double rho = 0.95;
    double eps = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdadeltaState {
    std::vector<double> grad_sq;   // E[g^2]
    std::vector<double> delta_sq;  // E[dx^2]
    explicit AdadeltaState(std::size_t n) : grad_sq(n, 0.0), delta_sq(n, 0.0) {}
};

/// One Adadelta update: E[g^2] <- rho E[g^2] + (1-rho) g^2;
/// dx = -(RMS[dx]/RMS[g]) g; E[dx^2] <- rho E[dx^2] + (1-rho) dx^2;
/// params += dx, with RMS[v] = sqrt(E[v^2] + eps).
void adadelta_step(double* params, const double* grads, std::size_t n, AdadeltaState& state,
                   std::size_t offset, double rho, double eps);

class Layer;

class Network {
public:
    Network(const NetSpec& spec, std::uint64_t init_seed);
    Network(Network&&) noexcept;
    Network& operator=(Network&&) noexcept;
    ~Network();
    Network clone() const;

    const NetSpec& spec() const { return spec_; }
    const std::vector<std::size_t>& output_shape() const;

    /// Class probabilities; requires the net to end in softmax. Thread-safe.
    Tensor forward(const Tensor& x) const;
    /// Cross-entropy loss of one sample without touching gradients.
    double forward_loss(const Tensor& x, std::size_t label) const;
    /// Loss plus gradient accumulation into the layer gradient buffers.
    double forward_backward(const Tensor& x, std::size_t label);

    std::size_t n_params() const;
    double get_param(std::size_t i) const;
    void set_param(std::size_t i, double v);
    double get_grad(std::size_t i) const;
    void zero_grads();
    void scale_grads(double s);
    /// Contiguous (params, grads, length) blocks, one per parameterized layer.
    struct ParamBlock { double* params; double* grads; std::size_t n; };
    std::vector<ParamBlock> param_blocks();

    /// Smallest distance to a relu kink or max-pool argmax tie seen while
    /// forwarding x; finite differences are only trustworthy when this is
    /// comfortably larger than the probe step.
    double kink_margin(const Tensor& x) const;

private:
    NetSpec spec_;
    std::vector<std::vector<std::size_t>> shapes_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;
    double wall_s = 0.0;
};

std::string training_log_jsonl(const std::vector<EpochLog>& log);

struct TrainedNet {
    Network net;
    std::vector<EpochLog> log;

    std::vector<double> predict_proba(const Tensor& x) const;
};

/// Mini-batch Adadelta training with per-epoch seeded shuffling. Stops when
/// the mean epoch loss drops to stop_loss or max_epochs is reached. Throws
/// std::runtime_error if the loss becomes non-finite.
TrainedNet fit(const NetSpec& spec, const std::vector<Tensor>& inputs,
               const std::vector<std::size_t>& labels, std::size_t n_classes,
               const TrainConfig& cfg);

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t params_checked = 0;
};

/// Central-finite-difference check of every parameter gradient (or a seeded
/// subsample of max_params > 0) against the analytic backward pass.
GradCheckResult grad_check(Network& net, const Tensor& x, std::size_t label, double eps = 1e-4,
                           std::size_t max_params = 0, std::uint64_t subsample_seed = 0);

// ---- architecture builders -------------------------------------------------

/// Three conv layers (18, 36, 24 filters; 12x2 then 12x1 kernels), each
/// followed by 2x1 max pooling, with a dense softmax head.
NetSpec build_chen_xue(std::size_t height, std::size_t width, std::size_t n_classes);

/// Two 5x5 conv layers with 4x4 and 2x2 average pooling over a signal image,
/// plus a dense softmax head.
NetSpec build_jiang_yin(std::size_t image_h, std::size_t image_w, std::size_t n_classes,
                        std::size_t filters1 = 8, std::size_t filters2 = 16);

/// Channel row order for the signal image: a greedy walk over channels in
/// which every unordered channel pair is adjacent at least once.
std::vector<std::size_t> signal_image_sequence(std::size_t n_channels);

/// Magnitude of the 2-D discrete Fourier transform (no shift).
Matrix dft2d_magnitude(const Matrix& m);
/// Moves the zero-frequency bin to the center.
Matrix fftshift(const Matrix& m);

/// Builds the permuted-channel image of a window, applies the 2-D DFT and
/// centers the zero frequency. Requires >= 2 channels.
Tensor signal_image(const Window& w);

/// Two conv layers (32 and 64 filters of 3x3) with 2x1 max pooling, over an
/// input whose modality groups are separated by one zero column.
NetSpec build_ha2015(std::size_t height, const std::vector<std::size_t>& modality_groups,
                     std::size_t n_classes);

/// Same as build_ha2015 but with zero columns re-inserted at the group
/// boundaries of the first feature map before the second convolution.
NetSpec build_ha2016(std::size_t height, const std::vector<std::size_t>& modality_groups,
                     std::size_t n_classes);

/// Assembles a window into the zero-padded {H, W, 1} tensor the Ha nets
/// expect; group widths must sum to the window's channel count.
Tensor zero_padded_input(const Window& w, const std::vector<std::size_t>& modality_groups);

/// Raw window as an {H, W, 1} tensor.
Tensor window_tensor(const Window& w);

}  // namespace harbench::nn
