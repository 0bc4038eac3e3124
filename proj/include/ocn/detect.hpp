#ifndef OCN_DETECT_HPP
#define OCN_DETECT_HPP

#include <Eigen/Dense>
#include <vector>

#include "ocn/chanmodel.hpp"

namespace ocn {

// Real embedding of the complex model: multiplication commutes with the
// embedding and the real transpose corresponds to the conjugate transpose.
Eigen::MatrixXd embed_matrix(const Eigen::MatrixXcd& h);
Eigen::VectorXd embed_vector(const Eigen::VectorXcd& v);
Eigen::VectorXcd unembed_vector(const Eigen::VectorXd& v);

struct RealEmbedding {
    Eigen::MatrixXd h_r;  // 2N x 2N
    Eigen::VectorXd y_r;  // 2N

    static RealEmbedding from(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y);
};

enum class InitMode : std::uint8_t {
    Zero = 0,  // DNT: first estimate is the zero vector
    Zf = 1,    // CN: first estimate is the zero-forcing output
};

// Per-layer trainable parameters of the unfolded detector.
struct DetectorParams {
    int n = 0;           // subcarriers the network is dimensioned for
    int num_layers = 0;  // L_net
    std::vector<Eigen::MatrixXd> layer_w;  // 2N x 6N
    std::vector<Eigen::VectorXd> layer_b;  // 2N
    std::vector<double> layer_t;           // > 0
    InitMode init_mode = InitMode::Zero;
};

struct LayerTrace {
    Eigen::VectorXd x0;  // initial estimate (zero or ZF output)
    std::vector<Eigen::VectorXd> estimates;        // X^_1 .. X^_L, entries in [-1, 1]
    std::vector<Eigen::VectorXd> pre_activations;  // z_1 .. z_L
};

// Least-squares solve of H x = y (normal equations of the pseudo-inverse);
// throws SingularChannelError when the channel is numerically rank-deficient.
Eigen::VectorXcd zf_detect(const FreqChannelMatrix& h, const Eigen::VectorXcd& y);

// -1 + relu(x+t)/|t| - relu(x-t)/|t|: slope 1/t on [-t, t], saturating at +-1.
double soft_sign(double x, double t);

// Unfolded forward pass. Layer k builds the feature vector
// [H_r^T y_r ; X^_k ; H_r^T H_r X^_k] and applies w_k, b_k and the soft-sign
// with width t_k. The full trace feeds the multi-layer losses.
LayerTrace forward(const DetectorParams& params, const FreqChannelMatrix& h,
                   const Eigen::VectorXcd& y);

// ZF-mode parameter point whose hard decisions reproduce zero-forcing: each
// w_k selects the running-estimate block, b_k = 0, t_k = 1.
DetectorParams zf_equivalent_params(int n, int num_layers);

// Exhaustive maximum-likelihood search over all QPSK vectors; N <= 8.
// Ties broken by lexicographic bit order.
Eigen::VectorXcd ml_bruteforce(const FreqChannelMatrix& h, const Eigen::VectorXcd& y);

// Sliding-window geometry: each window emits output_len decisions flanked
// by guard_len subcarriers on both sides.
struct SlidingConfig {
    int output_len = 16;  // l_O
    int guard_len = 8;    // l_G

    int total_len() const { return output_len + 2 * guard_len; }
    // Throws ConfigError unless output_len divides n and total_len <= n.
    void validate(int n) const;
};

// Window index set for window w of a length-n symbol: total_len consecutive
// subcarriers (mod n) whose output area starts at w * output_len.
std::vector<int> window_indices(const SlidingConfig& cfg, int n, int window);

// Sliding detector with the unfolded network inside each window. params must
// be dimensioned for total_len. Output areas partition [0, n).
Eigen::VectorXcd scn_detect(const DetectorParams& params, const FreqChannelMatrix& h,
                            const Eigen::VectorXcd& y, const SlidingConfig& cfg);

// Same windowing with zero-forcing inside each window.
Eigen::VectorXcd sliding_zf(const FreqChannelMatrix& h, const Eigen::VectorXcd& y,
                            const SlidingConfig& cfg);

}  // namespace ocn

#endif  // OCN_DETECT_HPP
