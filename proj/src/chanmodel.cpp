#include "ocn/chanmodel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ocn/errors.hpp"
#include "ocn/rng.hpp"

namespace ocn {

ChannelConfig ChannelConfig::uniform(int n, int l, double f_nd, int oscillators) {
    ChannelConfig cfg;
    cfg.num_subcarriers = n;
    cfg.num_paths = l;
    cfg.normalized_doppler = f_nd;
    cfg.path_powers.assign(static_cast<std::size_t>(l), 1.0 / l);
    cfg.oscillators_per_path = oscillators;
    return cfg;
}

void ChannelConfig::validate() const {
    if (num_subcarriers < 2)
        throw ConfigError("num_subcarriers: must be >= 2");
    if (num_paths < 1)
        throw ConfigError("num_paths: must be >= 1");
    if (!(normalized_doppler > 0.0) || !(normalized_doppler < 0.5))
        throw ConfigError("normalized_doppler: must lie in (0, 0.5)");
    if (static_cast<int>(path_powers.size()) != num_paths)
        throw ConfigError("path_powers: needs one entry per path");
    double sum = 0.0;
    for (double p : path_powers) {
        if (p < 0.0) throw ConfigError("path_powers: entries must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("path_powers: must sum to 1");
    if (oscillators_per_path < 1)
        throw ConfigError("oscillators_per_path: must be >= 1");
}

ChannelRealization jakes_taps(const ChannelConfig& config, std::uint64_t seed) {
    config.validate();
    const int n = config.num_subcarriers;
    const int num_paths = config.num_paths;
    const int m = config.oscillators_per_path;

    ChannelRealization real;
    real.taps.resize(n, num_paths);
    real.config = config;
    real.seed = seed;

    for (int l = 0; l < num_paths; ++l) {
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(l)));
        std::vector<double> doppler(m);  // per-oscillator Doppler fraction
        std::vector<double> phase(m);
        for (int i = 0; i < m; ++i) {
            const double arrival = 2.0 * M_PI * rng.uniform();
            doppler[i] = config.normalized_doppler * std::cos(arrival);
            phase[i] = 2.0 * M_PI * rng.uniform();
        }
        const double amp = std::sqrt(config.path_powers[static_cast<std::size_t>(l)] / m);
        for (int t = 0; t < n; ++t) {
            std::complex<double> acc(0.0, 0.0);
            for (int i = 0; i < m; ++i) {
                const double theta = 2.0 * M_PI * doppler[i] * (static_cast<double>(t) / n)
                                     + phase[i];
                acc += std::complex<double>(std::cos(theta), std::sin(theta));
            }
            real.taps(t, l) = amp * acc;
        }
    }
    return real;
}

FreqChannelMatrix freq_channel_matrix(const ChannelRealization& real) {
    const int n = static_cast<int>(real.taps.rows());
    const int num_paths = static_cast<int>(real.taps.cols());

    // H_l^d = (1/N) sum_n h(n,l) exp(-j 2 pi n d / N), per path.
    Eigen::MatrixXcd dft(n, num_paths);
    for (int l = 0; l < num_paths; ++l) {
        for (int d = 0; d < n; ++d) {
            std::complex<double> acc(0.0, 0.0);
            for (int t = 0; t < n; ++t) {
                const double ang = -2.0 * M_PI * t * d / n;
                acc += real.taps(t, l) * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            dft(d, l) = acc / static_cast<double>(n);
        }
    }

    Eigen::MatrixXcd h(n, n);
    for (int k = 0; k < n; ++k) {
        std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(num_paths));
        for (int l = 0; l < num_paths; ++l) {
            const double ang = -2.0 * M_PI * l * k / n;
            twiddle[static_cast<std::size_t>(l)] = {std::cos(ang), std::sin(ang)};
        }
        for (int row = 0; row < n; ++row) {
            const int d = ((row - k) % n + n) % n;
            std::complex<double> acc(0.0, 0.0);
            for (int l = 0; l < num_paths; ++l)
                acc += dft(d, l) * twiddle[static_cast<std::size_t>(l)];
            h(row, k) = acc;
        }
    }
    return make_freq_matrix(std::move(h), real.seed);
}

FreqChannelMatrix make_freq_matrix(Eigen::MatrixXcd h, std::uint64_t source_seed) {
    FreqChannelMatrix out;
    // Extreme singular values from the eigenvalues of H^H H.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.adjoint() * h,
                                                        Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double smax = std::sqrt(std::max(0.0, ev(ev.size() - 1)));
    const double smin = std::sqrt(std::max(0.0, ev(0)));
    out.condition_number =
        smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    out.h = std::move(h);
    out.source_seed = source_seed;
    return out;
}

double ici_power(double x, int n) {
    if (n < 1) throw DomainError("ici_power: n must be positive");
    if (x < 0.0 || x > n / 2.0)
        throw DomainError("ici_power: x must lie in [0, n/2]");
    if (x == 0.0) return 1.0;  // removable singularity
    const double num = std::sin(M_PI * x);
    const double den = std::sin(M_PI * x / n);
    const double r = num / (n * den);
    return r * r;
}

GuardSolution guard_length(double f_nd, int n, double alpha, double beta) {
    if (!(f_nd > 0.0) || !(f_nd < 0.5))
        throw DomainError("guard_length: f_nd must lie in (0, 0.5)");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw DomainError("guard_length: alpha and beta must be positive");
    const double level = alpha * beta;

    // Envelope through the offsets x = k + f_nd: the numerator of ici_power
    // is fixed at sin(pi f_nd) there, leaving a strictly decreasing function
    // of x on (0, n/2].
    const double num = std::sin(M_PI * f_nd);
    auto envelope = [&](double x) {
        const double r = num / (n * std::sin(M_PI * x / n));
        return r * r;
    };

    if (level >= envelope(f_nd))
        throw NoSolutionError("guard_length: alpha*beta at or above the power at x = f_nd");
    const double half = n / 2.0;
    if (level < envelope(half))
        throw NoSolutionError("guard_length: required guard would exceed n/2");

    double lo = f_nd, hi = half;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (envelope(mid) > level)
            lo = mid;
        else
            hi = mid;
    }
    const double x_l = 0.5 * (lo + hi);
    // Slack 1e-2 absorbs threshold values quoted to few significant digits.
    GuardSolution sol;
    sol.crossing = x_l;
    sol.guard_len = static_cast<int>(std::ceil(x_l - f_nd - 1e-2));
    if (sol.guard_len < 1) sol.guard_len = 1;
    return sol;
}

bool condition_filter(const FreqChannelMatrix& h, double threshold) {
    return h.condition_number <= threshold;
}

namespace {

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw IoError("truncated channel batch file: " + path);
    return v;
}

}  // namespace

void save_channel_batch(const std::string& path, const ChannelConfig& config,
                        const std::vector<ChannelRealization>& batch) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("OCDC", 4);
    write_pod<std::uint32_t>(os, 1u);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(config.num_subcarriers));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(config.num_paths));
    write_pod<double>(os, config.normalized_doppler);
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(batch.size()));
    for (const auto& real : batch) {
        write_pod<std::uint64_t>(os, real.seed);
        for (int l = 0; l < config.num_paths; ++l)
            for (int t = 0; t < config.num_subcarriers; ++t) {
                write_pod<double>(os, real.taps(t, l).real());
                write_pod<double>(os, real.taps(t, l).imag());
            }
    }
    if (!os) throw IoError("write failure: " + path);
}

std::vector<ChannelRealization> load_channel_batch(const std::string& path,
                                                   ChannelConfig* config_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "OCDC", 4) != 0)
        throw IoError("bad magic in channel batch file: " + path);
    const auto version = read_pod<std::uint32_t>(is, path);
    if (version != 1u) throw IoError("unsupported channel batch version: " + path);
    ChannelConfig cfg;
    cfg.num_subcarriers = static_cast<int>(read_pod<std::uint32_t>(is, path));
    cfg.num_paths = static_cast<int>(read_pod<std::uint32_t>(is, path));
    cfg.normalized_doppler = read_pod<double>(is, path);
    cfg.path_powers.assign(static_cast<std::size_t>(cfg.num_paths), 1.0 / cfg.num_paths);
    const auto count = read_pod<std::uint64_t>(is, path);
    std::vector<ChannelRealization> batch;
    batch.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        ChannelRealization real;
        real.config = cfg;
        real.seed = read_pod<std::uint64_t>(is, path);
        real.taps.resize(cfg.num_subcarriers, cfg.num_paths);
        for (int l = 0; l < cfg.num_paths; ++l)
            for (int t = 0; t < cfg.num_subcarriers; ++t) {
                const double re = read_pod<double>(is, path);
                const double im = read_pod<double>(is, path);
                real.taps(t, l) = {re, im};
            }
        batch.push_back(std::move(real));
    }
    if (config_out) *config_out = cfg;
    return batch;
}

}  // namespace ocn
