#ifndef OCN_LEARN_HPP
#define OCN_LEARN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ocn/chanmodel.hpp"
#include "ocn/detect.hpp"
#include "ocn/txrx.hpp"

namespace ocn {

enum class LossKind {
    NormalizedMulti,  // layer errors normalized by the ZF error
    EuclideanMulti,   // plain squared distances
    OaMulti,          // squared distances restricted to the output area
};

struct TrainConfig {
    int num_layers = 20;
    double learning_rate = 0.005;
    int batch_size = 500;
    long num_iterations = 20000;
    double snr_low_db = 15.0;
    double snr_high_db = 35.0;
    // Training SNR; the midpoint of the evaluation range.
    double train_snr_db() const { return 0.5 * (snr_low_db + snr_high_db); }
    double condition_threshold = 10000.0;
    LossKind loss_kind = LossKind::EuclideanMulti;
    InitMode init_mode = InitMode::Zf;
    std::uint64_t master_seed = 0;
    // Sliding training only: window geometry and the fixed submatrix location.
    std::optional<SlidingConfig> sliding;
    int sub_location = 0;
    long checkpoint_every = 100;  // loss-trace stride
    int workers = 1;
};

// Per-layer gradients, shapes mirroring DetectorParams.
struct GradientSet {
    std::vector<Eigen::MatrixXd> d_w;
    std::vector<Eigen::VectorXd> d_b;
    std::vector<double> d_t;

    static GradientSet zero(const DetectorParams& params);
    void add(const GradientSet& other);
    void scale(double s);
};

// w_k entries from normal(0,1) truncated to [-2,2], b_k = 0.01, t_k = 1.
DetectorParams init_params(int n, int num_layers, InitMode mode, std::uint64_t seed);

// sum_k log(k) * |truth - X^_k|^2 / |truth - zf_ref|^2; the denominator is
// guarded with 1e-12 when the ZF output is exact.
double loss_normalized_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace,
                             const Eigen::VectorXcd& zf_ref);

// sum_k log(k) * |truth - X^_k|^2
double loss_euclidean_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace);

// Euclidean multi-loss restricted to the output-area coordinates of a
// total_len window.
double loss_oa_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace,
                     const SlidingConfig& cfg);

struct BackpropResult {
    double loss = 0.0;
    GradientSet grads;
};

// Analytic reverse-mode gradients of the selected loss through every layer.
// The soft-sign is differentiated piecewise (kinks take the linear side,
// saturation contributes zero) and the ZF preprocessor output is treated as
// a constant input.
BackpropResult backprop(const DetectorParams& params, const FreqChannelMatrix& h,
                        const Eigen::VectorXcd& y, const Eigen::VectorXcd& truth,
                        LossKind kind, const SlidingConfig* cfg = nullptr);

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    std::vector<double> m_t, v_t;
    long step = 0;

    static AdamState zero(const DetectorParams& params);
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction;
// t_k is projected to stay >= 1e-3.
void adam_step(DetectorParams& params, const GradientSet& grads, AdamState& state,
               double lr);

struct BatchSample {
    FreqChannelMatrix h;  // window-sized for sliding training
    OfdmSymbol sym;       // truth over the same support
    RxObservation rx;
};

// Deterministic training batch for one iteration: channels drawn through the
// condition filter, random QPSK symbols, noise at the training SNR. Sliding
// training slices the fixed-location window out of full-length symbols.
std::vector<BatchSample> make_batch(const ChannelConfig& chan_cfg,
                                    const TrainConfig& train_cfg, long iteration);

struct TrainReport {
    std::vector<std::pair<long, double>> loss_trace;
    DetectorParams final_params;
    TrainConfig config;
    double wall_time_sec = 0.0;
    long skipped_samples = 0;
};

TrainReport train(const ChannelConfig& chan_cfg, const TrainConfig& train_cfg);

}  // namespace ocn

#endif  // OCN_LEARN_HPP
