#include "ocn/detect.hpp"

#include <cmath>

#include "ocn/errors.hpp"
#include "ocn/txrx.hpp"

namespace ocn {

Eigen::MatrixXd embed_matrix(const Eigen::MatrixXcd& h) {
    const Eigen::Index n = h.rows();
    const Eigen::Index m = h.cols();
    Eigen::MatrixXd r(2 * n, 2 * m);
    r.topLeftCorner(n, m) = h.real();
    r.topRightCorner(n, m) = -h.imag();
    r.bottomLeftCorner(n, m) = h.imag();
    r.bottomRightCorner(n, m) = h.real();
    return r;
}

Eigen::VectorXd embed_vector(const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * v.size());
    r.head(v.size()) = v.real();
    r.tail(v.size()) = v.imag();
    return r;
}

Eigen::VectorXcd unembed_vector(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size() / 2;
    Eigen::VectorXcd c(n);
    c.real() = v.head(n);
    c.imag() = v.tail(n);
    return c;
}

RealEmbedding RealEmbedding::from(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& y) {
    if (h.rows() != y.size())
        throw ShapeError("RealEmbedding: matrix and vector sizes disagree");
    return {embed_matrix(h), embed_vector(y)};
}

Eigen::VectorXcd zf_detect(const FreqChannelMatrix& h, const Eigen::VectorXcd& y) {
    if (h.h.rows() != y.size())
        throw ShapeError("zf_detect: channel and observation sizes disagree");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(h.h);
    qr.setThreshold(1e-12);
    if (qr.rank() < h.h.cols())
        throw SingularChannelError("zf_detect: channel matrix is numerically singular");
    return qr.solve(y);
}

double soft_sign(double x, double t) {
    if (!(t > 0.0)) throw DomainError("soft_sign: t must be positive");
    // Piecewise form of -1 + relu(x+t)/t - relu(x-t)/t; saturates exactly.
    if (x >= t) return 1.0;
    if (x <= -t) return -1.0;
    return x / t;
}

namespace {

void check_params(const DetectorParams& params, Eigen::Index n) {
    if (params.n != n)
        throw ShapeError("forward: params dimensioned for different N");
    if (params.num_layers < 1 ||
        static_cast<int>(params.layer_w.size()) != params.num_layers ||
        static_cast<int>(params.layer_b.size()) != params.num_layers ||
        static_cast<int>(params.layer_t.size()) != params.num_layers)
        throw ShapeError("forward: inconsistent layer counts");
    for (int k = 0; k < params.num_layers; ++k) {
        if (params.layer_w[k].rows() != 2 * n || params.layer_w[k].cols() != 6 * n ||
            params.layer_b[k].size() != 2 * n)
            throw ShapeError("forward: layer dimensions inconsistent with N");
        if (!(params.layer_t[k] > 0.0))
            throw DomainError("forward: t_k must be positive");
    }
}

}  // namespace

LayerTrace forward(const DetectorParams& params, const FreqChannelMatrix& h,
                   const Eigen::VectorXcd& y) {
    const Eigen::Index n = h.h.rows();
    if (y.size() != n) throw ShapeError("forward: observation size disagrees");
    check_params(params, n);

    const Eigen::MatrixXd h_r = embed_matrix(h.h);
    const Eigen::VectorXd y_r = embed_vector(y);
    const Eigen::VectorXd hty = h_r.transpose() * y_r;
    const Eigen::MatrixXd gram = h_r.transpose() * h_r;

    LayerTrace trace;
    if (params.init_mode == InitMode::Zf)
        trace.x0 = embed_vector(zf_detect(h, y));
    else
        trace.x0 = Eigen::VectorXd::Zero(2 * n);

    trace.estimates.reserve(static_cast<std::size_t>(params.num_layers));
    trace.pre_activations.reserve(static_cast<std::size_t>(params.num_layers));

    Eigen::VectorXd est = trace.x0;
    Eigen::VectorXd feature(6 * n);
    for (int k = 0; k < params.num_layers; ++k) {
        feature.head(2 * n) = hty;
        feature.segment(2 * n, 2 * n) = est;
        feature.tail(2 * n) = gram * est;
        Eigen::VectorXd z = params.layer_w[k] * feature + params.layer_b[k];
        est = z.unaryExpr(
            [t = params.layer_t[k]](double v) { return soft_sign(v, t); });
        trace.pre_activations.push_back(std::move(z));
        trace.estimates.push_back(est);
    }
    return trace;
}

DetectorParams zf_equivalent_params(int n, int num_layers) {
    DetectorParams params;
    params.n = n;
    params.num_layers = num_layers;
    params.init_mode = InitMode::Zf;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 6 * n);
    w.block(0, 2 * n, 2 * n, 2 * n).setIdentity();
    for (int k = 0; k < num_layers; ++k) {
        params.layer_w.push_back(w);
        params.layer_b.push_back(Eigen::VectorXd::Zero(2 * n));
        params.layer_t.push_back(1.0);
    }
    return params;
}

Eigen::VectorXcd ml_bruteforce(const FreqChannelMatrix& h, const Eigen::VectorXcd& y) {
    const Eigen::Index n = h.h.rows();
    if (y.size() != n) throw ShapeError("ml_bruteforce: observation size disagrees");
    if (n > 8) throw CapacityError("ml_bruteforce: N must be <= 8");

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * n), 0);
    Eigen::VectorXcd best;
    double best_cost = std::numeric_limits<double>::infinity();
    const std::uint64_t total = 1ULL << (2 * n);
    for (std::uint64_t code = 0; code < total; ++code) {
        // Lexicographic bit order: bits[0] is the most significant.
        for (Eigen::Index i = 0; i < 2 * n; ++i)
            bits[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>((code >> (2 * n - 1 - i)) & 1u);
        const Eigen::VectorXcd x = qpsk_modulate(bits);
        const double cost = (y - h.h * x).squaredNorm();
        if (cost < best_cost) {
            best_cost = cost;
            best = x;
        }
    }
    return best;
}

void SlidingConfig::validate(int n) const {
    if (output_len < 1) throw ConfigError("output_len: must be positive");
    if (guard_len < 0) throw ConfigError("guard_len: must be nonnegative");
    if (n % output_len != 0)
        throw ConfigError("output_len: must divide the symbol length");
    if (total_len() > n)
        throw ConfigError("total_len: window exceeds the symbol length");
}

std::vector<int> window_indices(const SlidingConfig& cfg, int n, int window) {
    const int start = window * cfg.output_len - cfg.guard_len;
    std::vector<int> idx(static_cast<std::size_t>(cfg.total_len()));
    for (int i = 0; i < cfg.total_len(); ++i)
        idx[static_cast<std::size_t>(i)] = ((start + i) % n + n) % n;
    return idx;
}

namespace {

// Runs one window of the sliding pipeline and scatters the output area.
template <typename WindowDetector>
Eigen::VectorXcd run_sliding(const FreqChannelMatrix& h, const Eigen::VectorXcd& y,
                             const SlidingConfig& cfg, WindowDetector&& detect_window) {
    const int n = static_cast<int>(h.h.rows());
    if (y.size() != n) throw ShapeError("sliding detector: observation size disagrees");
    cfg.validate(n);
    const int lt = cfg.total_len();

    Eigen::VectorXcd out(n);
    Eigen::MatrixXcd sub(lt, lt);
    Eigen::VectorXcd ysub(lt);
    for (int w = 0; w < n / cfg.output_len; ++w) {
        const std::vector<int> idx = window_indices(cfg, n, w);
        for (int r = 0; r < lt; ++r) {
            ysub(r) = y(idx[static_cast<std::size_t>(r)]);
            for (int c = 0; c < lt; ++c)
                sub(r, c) = h.h(idx[static_cast<std::size_t>(r)],
                                idx[static_cast<std::size_t>(c)]);
        }
        const Eigen::VectorXcd est = detect_window(sub, ysub);
        for (int i = 0; i < cfg.output_len; ++i)
            out(idx[static_cast<std::size_t>(cfg.guard_len + i)]) =
                est(cfg.guard_len + i);
    }
    return out;
}

}  // namespace

Eigen::VectorXcd scn_detect(const DetectorParams& params, const FreqChannelMatrix& h,
                            const Eigen::VectorXcd& y, const SlidingConfig& cfg) {
    if (params.n != cfg.total_len())
        throw ConfigError("scn_detect: params must be dimensioned for total_len");
    return run_sliding(h, y, cfg,
                       [&](const Eigen::MatrixXcd& sub, const Eigen::VectorXcd& ysub) {
                           FreqChannelMatrix hw;
                           hw.h = sub;  // condition number not needed per window
                           const LayerTrace trace = forward(params, hw, ysub);
                           return unembed_vector(trace.estimates.back());
                       });
}

Eigen::VectorXcd sliding_zf(const FreqChannelMatrix& h, const Eigen::VectorXcd& y,
                            const SlidingConfig& cfg) {
    return run_sliding(h, y, cfg,
                       [&](const Eigen::MatrixXcd& sub, const Eigen::VectorXcd& ysub) {
                           FreqChannelMatrix hw;
                           hw.h = sub;
                           return zf_detect(hw, ysub);
                       });
}

}  // namespace ocn
