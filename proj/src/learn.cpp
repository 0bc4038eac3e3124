#include "ocn/learn.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "ocn/errors.hpp"
#include "ocn/rng.hpp"

namespace ocn {

GradientSet GradientSet::zero(const DetectorParams& params) {
    GradientSet g;
    for (int k = 0; k < params.num_layers; ++k) {
        g.d_w.push_back(Eigen::MatrixXd::Zero(params.layer_w[k].rows(),
                                              params.layer_w[k].cols()));
        g.d_b.push_back(Eigen::VectorXd::Zero(params.layer_b[k].size()));
        g.d_t.push_back(0.0);
    }
    return g;
}

void GradientSet::add(const GradientSet& other) {
    for (std::size_t k = 0; k < d_w.size(); ++k) {
        d_w[k] += other.d_w[k];
        d_b[k] += other.d_b[k];
        d_t[k] += other.d_t[k];
    }
}

void GradientSet::scale(double s) {
    for (std::size_t k = 0; k < d_w.size(); ++k) {
        d_w[k] *= s;
        d_b[k] *= s;
        d_t[k] *= s;
    }
}

DetectorParams init_params(int n, int num_layers, InitMode mode, std::uint64_t seed) {
    DetectorParams params;
    params.n = n;
    params.num_layers = num_layers;
    params.init_mode = mode;
    Rng rng(split_seed(seed, 0x1417u));
    for (int k = 0; k < num_layers; ++k) {
        Eigen::MatrixXd w(2 * n, 6 * n);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                w(r, c) = rng.truncated_gaussian2();
        params.layer_w.push_back(std::move(w));
        params.layer_b.push_back(Eigen::VectorXd::Constant(2 * n, 0.01));
        params.layer_t.push_back(1.0);
    }
    return params;
}

namespace {

double layer_weight(int k_one_based) { return std::log(static_cast<double>(k_one_based)); }

// Indices of the output-area coordinates in the real embedding of a window.
std::vector<Eigen::Index> oa_coords(const SlidingConfig& cfg) {
    const int lt = cfg.total_len();
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(2 * cfg.output_len));
    for (int i = 0; i < cfg.output_len; ++i) {
        idx.push_back(cfg.guard_len + i);       // real part
        idx.push_back(lt + cfg.guard_len + i);  // imaginary part
    }
    return idx;
}

}  // namespace

double loss_normalized_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace,
                             const Eigen::VectorXcd& zf_ref) {
    if (truth.size() != zf_ref.size())
        throw ShapeError("loss_normalized_multi: truth and zf_ref sizes disagree");
    const Eigen::VectorXd t_r = embed_vector(truth);
    double denom = (t_r - embed_vector(zf_ref)).squaredNorm();
    if (denom <= 0.0) denom = 1e-12;
    double loss = 0.0;
    for (std::size_t k = 0; k < trace.estimates.size(); ++k) {
        if (trace.estimates[k].size() != t_r.size())
            throw ShapeError("loss_normalized_multi: estimate size disagrees");
        loss += layer_weight(static_cast<int>(k) + 1) *
                (t_r - trace.estimates[k]).squaredNorm() / denom;
    }
    return loss;
}

double loss_euclidean_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace) {
    const Eigen::VectorXd t_r = embed_vector(truth);
    double loss = 0.0;
    for (std::size_t k = 0; k < trace.estimates.size(); ++k) {
        if (trace.estimates[k].size() != t_r.size())
            throw ShapeError("loss_euclidean_multi: estimate size disagrees");
        loss += layer_weight(static_cast<int>(k) + 1) *
                (t_r - trace.estimates[k]).squaredNorm();
    }
    return loss;
}

double loss_oa_multi(const Eigen::VectorXcd& truth, const LayerTrace& trace,
                     const SlidingConfig& cfg) {
    if (truth.size() != cfg.total_len())
        throw ShapeError("loss_oa_multi: truth must cover one total_len window");
    const Eigen::VectorXd t_r = embed_vector(truth);
    const std::vector<Eigen::Index> oa = oa_coords(cfg);
    double loss = 0.0;
    for (std::size_t k = 0; k < trace.estimates.size(); ++k) {
        if (trace.estimates[k].size() != t_r.size())
            throw ShapeError("loss_oa_multi: estimate size disagrees");
        double sq = 0.0;
        for (Eigen::Index i : oa) {
            const double d = t_r(i) - trace.estimates[k](i);
            sq += d * d;
        }
        loss += layer_weight(static_cast<int>(k) + 1) * sq;
    }
    return loss;
}

BackpropResult backprop(const DetectorParams& params, const FreqChannelMatrix& h,
                        const Eigen::VectorXcd& y, const Eigen::VectorXcd& truth,
                        LossKind kind, const SlidingConfig* cfg) {
    if (kind == LossKind::OaMulti && cfg == nullptr)
        throw ConfigError("backprop: OA loss needs a SlidingConfig");

    const LayerTrace trace = forward(params, h, y);
    const Eigen::Index n = h.h.rows();
    const Eigen::Index n2 = 2 * n;
    const Eigen::VectorXd t_r = embed_vector(truth);

    // Per-coordinate loss scale: 1/denom for the normalized loss, an OA mask
    // for the sliding loss, 1 otherwise.
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n2);
    double scale = 1.0;
    double loss = 0.0;
    if (kind == LossKind::NormalizedMulti) {
        const Eigen::VectorXcd zf_ref = zf_detect(h, y);
        double denom = (t_r - embed_vector(zf_ref)).squaredNorm();
        if (denom <= 0.0) denom = 1e-12;
        scale = 1.0 / denom;
        loss = loss_normalized_multi(truth, trace, zf_ref);
    } else if (kind == LossKind::OaMulti) {
        mask.setZero();
        for (Eigen::Index i : oa_coords(*cfg)) mask(i) = 1.0;
        loss = loss_oa_multi(truth, trace, *cfg);
    } else {
        loss = loss_euclidean_multi(truth, trace);
    }

    const Eigen::MatrixXd h_r = embed_matrix(h.h);
    const Eigen::VectorXd y_r = embed_vector(y);
    const Eigen::VectorXd hty = h_r.transpose() * y_r;
    const Eigen::MatrixXd gram = h_r.transpose() * h_r;

    BackpropResult res;
    res.loss = loss;
    res.grads = GradientSet::zero(params);

    const int layers = params.num_layers;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n2);  // dL/dX^_k for current k
    Eigen::VectorXd feature(6 * n);
    for (int k = layers; k >= 1; --k) {
        const Eigen::VectorXd& est = trace.estimates[static_cast<std::size_t>(k - 1)];
        const Eigen::VectorXd& z = trace.pre_activations[static_cast<std::size_t>(k - 1)];
        const double t = params.layer_t[static_cast<std::size_t>(k - 1)];

        // Direct loss tap at layer k.
        g += 2.0 * layer_weight(k) * scale *
             (mask.array() * (est - t_r).array()).matrix();

        // Through the activation: slope 1/t inside [-t, t] (kinks take the
        // linear side), 0 in saturation; d/dt is -z/t^2 inside.
        Eigen::VectorXd delta(n2);
        double dt = 0.0;
        for (Eigen::Index i = 0; i < n2; ++i) {
            if (z(i) >= -t && z(i) <= t) {
                delta(i) = g(i) / t;
                dt += g(i) * (-z(i) / (t * t));
            } else {
                delta(i) = 0.0;
            }
        }

        const Eigen::VectorXd& input =
            (k == 1) ? trace.x0 : trace.estimates[static_cast<std::size_t>(k - 2)];
        feature.head(n2) = hty;
        feature.segment(n2, n2) = input;
        feature.tail(n2) = gram * input;

        res.grads.d_w[static_cast<std::size_t>(k - 1)] = delta * feature.transpose();
        res.grads.d_b[static_cast<std::size_t>(k - 1)] = delta;
        res.grads.d_t[static_cast<std::size_t>(k - 1)] = dt;

        if (k > 1) {
            const auto& w = params.layer_w[static_cast<std::size_t>(k - 1)];
            const Eigen::MatrixXd w_mid = w.middleCols(n2, n2);
            const Eigen::MatrixXd w_right = w.rightCols(n2);
            g = w_mid.transpose() * delta + gram * (w_right.transpose() * delta);
        }
    }
    return res;
}

AdamState AdamState::zero(const DetectorParams& params) {
    AdamState s;
    for (int k = 0; k < params.num_layers; ++k) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(params.layer_w[k].rows(),
                                              params.layer_w[k].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(params.layer_w[k].rows(),
                                              params.layer_w[k].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(params.layer_b[k].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(params.layer_b[k].size()));
        s.m_t.push_back(0.0);
        s.v_t.push_back(0.0);
    }
    return s;
}

void adam_step(DetectorParams& params, const GradientSet& grads, AdamState& state,
               double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (std::size_t k = 0; k < grads.d_w.size(); ++k) {
        if (!grads.d_w[k].allFinite() || !grads.d_b[k].allFinite() ||
            !std::isfinite(grads.d_t[k]))
            throw TrainingDivergenceError("adam_step: non-finite gradient",
                                          state.step);
    }
    state.step += 1;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < grads.d_w.size(); ++k) {
        state.m_w[k] = b1 * state.m_w[k] + (1.0 - b1) * grads.d_w[k];
        state.v_w[k] = b2 * state.v_w[k] +
                       (1.0 - b2) * grads.d_w[k].array().square().matrix();
        params.layer_w[k].array() -=
            lr * (state.m_w[k].array() / c1) /
            ((state.v_w[k].array() / c2).sqrt() + eps);

        state.m_b[k] = b1 * state.m_b[k] + (1.0 - b1) * grads.d_b[k];
        state.v_b[k] = b2 * state.v_b[k] +
                       (1.0 - b2) * grads.d_b[k].array().square().matrix();
        params.layer_b[k].array() -=
            lr * (state.m_b[k].array() / c1) /
            ((state.v_b[k].array() / c2).sqrt() + eps);

        state.m_t[k] = b1 * state.m_t[k] + (1.0 - b1) * grads.d_t[k];
        state.v_t[k] = b2 * state.v_t[k] + (1.0 - b2) * grads.d_t[k] * grads.d_t[k];
        params.layer_t[k] -=
            lr * (state.m_t[k] / c1) / (std::sqrt(state.v_t[k] / c2) + eps);
        if (params.layer_t[k] < 1e-3) params.layer_t[k] = 1e-3;
    }
}

std::vector<BatchSample> make_batch(const ChannelConfig& chan_cfg,
                                    const TrainConfig& train_cfg, long iteration) {
    chan_cfg.validate();
    if (train_cfg.batch_size < 1)
        throw ConfigError("batch_size: must be positive");
    if (train_cfg.sliding)
        train_cfg.sliding->validate(chan_cfg.num_subcarriers);

    const std::uint64_t stream =
        split_seed(train_cfg.master_seed, static_cast<std::uint64_t>(iteration));
    Rng rng(stream);
    std::uint64_t counter = 0;

    std::vector<BatchSample> batch;
    batch.reserve(static_cast<std::size_t>(train_cfg.batch_size));
    long rejected = 0, accepted = 0;
    while (accepted < train_cfg.batch_size) {
        const std::uint64_t chan_seed = split_seed(stream, ++counter);
        const FreqChannelMatrix h =
            freq_channel_matrix(jakes_taps(chan_cfg, chan_seed));
        if (!condition_filter(h, train_cfg.condition_threshold)) {
            ++rejected;
            if (rejected >= 1000 && accepted * 100 < rejected)
                throw ConfigError(
                    "make_batch: condition filter rejects over 99% of channels");
            continue;
        }
        ++accepted;

        OfdmSymbol sym = random_symbol(chan_cfg.num_subcarriers, rng);
        RxObservation rx =
            transmit(sym.x, h, train_cfg.train_snr_db(), split_seed(stream, ++counter));

        BatchSample sample;
        if (train_cfg.sliding) {
            // Slice the fixed-location window out of the full symbol so the
            // observation keeps the interference leaking in from outside.
            const SlidingConfig& sc = *train_cfg.sliding;
            const int n = chan_cfg.num_subcarriers;
            const int lt = sc.total_len();
            const int p = train_cfg.sub_location;
            Eigen::MatrixXcd sub(lt, lt);
            Eigen::VectorXcd ysub(lt), xsub(lt);
            std::vector<std::uint8_t> bsub(static_cast<std::size_t>(2 * lt));
            for (int r = 0; r < lt; ++r) {
                const int ir = ((p + r) % n + n) % n;
                ysub(r) = rx.y(ir);
                xsub(r) = sym.x(ir);
                bsub[static_cast<std::size_t>(2 * r)] =
                    sym.bits[static_cast<std::size_t>(2 * ir)];
                bsub[static_cast<std::size_t>(2 * r + 1)] =
                    sym.bits[static_cast<std::size_t>(2 * ir + 1)];
                for (int c = 0; c < lt; ++c) {
                    const int ic = ((p + c) % n + n) % n;
                    sub(r, c) = h.h(ir, ic);
                }
            }
            sample.h = make_freq_matrix(std::move(sub), chan_seed);
            sample.sym.bits = std::move(bsub);
            sample.sym.x = std::move(xsub);
            sample.rx.y = std::move(ysub);
            sample.rx.h = sample.h;
            sample.rx.snr_db = rx.snr_db;
            sample.rx.noise_var = rx.noise_var;
        } else {
            sample.h = h;
            sample.sym = std::move(sym);
            sample.rx = std::move(rx);
        }
        batch.push_back(std::move(sample));
    }
    return batch;
}

namespace {

// Mean gradient over the batch; samples where the ZF solve fails are skipped.
// The reduction order is fixed (sample index), so results do not depend on
// the worker count.
BackpropResult batch_gradient(const DetectorParams& params,
                              const std::vector<BatchSample>& batch, LossKind kind,
                              const SlidingConfig* cfg, int workers,
                              long* skipped) {
    const std::size_t count = batch.size();
    std::vector<BackpropResult> per_sample(count);
    std::vector<std::uint8_t> ok(count, 0);

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                per_sample[i] =
                    backprop(params, batch[i].h, batch[i].rx.y, batch[i].sym.x,
                             kind, cfg);
                ok[i] = 1;
            } catch (const SingularChannelError&) {
                ok[i] = 0;
            }
        }
    };
    if (workers <= 1) {
        work(0, count);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t lo = std::min(count, w * chunk);
            const std::size_t hi = std::min(count, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    BackpropResult total;
    total.grads = GradientSet::zero(params);
    long used = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!ok[i]) {
            if (skipped) ++(*skipped);
            continue;
        }
        total.loss += per_sample[i].loss;
        total.grads.add(per_sample[i].grads);
        ++used;
    }
    if (used > 0) {
        total.loss /= static_cast<double>(used);
        total.grads.scale(1.0 / static_cast<double>(used));
    }
    return total;
}

}  // namespace

TrainReport train(const ChannelConfig& chan_cfg, const TrainConfig& train_cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n =
        train_cfg.sliding ? train_cfg.sliding->total_len() : chan_cfg.num_subcarriers;

    TrainReport report;
    report.config = train_cfg;
    report.final_params = init_params(n, train_cfg.num_layers, train_cfg.init_mode,
                                      train_cfg.master_seed);
    AdamState state = AdamState::zero(report.final_params);
    const SlidingConfig* sc = train_cfg.sliding ? &*train_cfg.sliding : nullptr;

    for (long it = 0; it < train_cfg.num_iterations; ++it) {
        const std::vector<BatchSample> batch = make_batch(chan_cfg, train_cfg, it);
        const BackpropResult res =
            batch_gradient(report.final_params, batch, train_cfg.loss_kind, sc,
                           train_cfg.workers, &report.skipped_samples);
        if (!std::isfinite(res.loss))
            throw TrainingDivergenceError("train: non-finite loss", it);
        if (it % train_cfg.checkpoint_every == 0)
            report.loss_trace.emplace_back(it, res.loss);
        adam_step(report.final_params, res.grads, state, train_cfg.learning_rate);
    }
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace ocn
