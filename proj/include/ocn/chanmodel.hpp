#ifndef OCN_CHANMODEL_HPP
#define OCN_CHANMODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ocn {

// Doubly-selective multipath channel description. Path l has integer delay
// l samples; path_powers defaults to a uniform profile summing to one.
struct ChannelConfig {
    int num_subcarriers = 32;          // N
    int num_paths = 4;                 // L
    double normalized_doppler = 0.16;  // f_Nd, Doppler in units of subcarrier spacing
    std::vector<double> path_powers;   // L entries, sum 1
    int oscillators_per_path = 32;     // sum-of-sinusoids order

    static ChannelConfig uniform(int n, int l, double f_nd, int oscillators = 32);

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Time-domain tap gains h(n,l) for one OFDM symbol, N samples x L paths.
struct ChannelRealization {
    Eigen::MatrixXcd taps;  // (n, l)
    ChannelConfig config;
    std::uint64_t seed = 0;
};

// Frequency-domain channel matrix H with its condition number cached.
struct FreqChannelMatrix {
    Eigen::MatrixXcd h;
    double condition_number = 0.0;
    std::uint64_t source_seed = 0;

    Eigen::Index n() const { return h.rows(); }
};

// Jakes sum-of-sinusoids realization; deterministic in (config, seed).
// Per path, oscillator arrival angles and phases are drawn independently
// from a stream split off the seed; the tap phase advances by
// 2*pi*f_Nd*(n/N)*cos(angle) per sample.
ChannelRealization jakes_taps(const ChannelConfig& config, std::uint64_t seed);

// H[m,k] = sum_l H_l^{(m-k) mod N} exp(-j*2*pi*l*k/N) where H_l^d is the
// N-point DFT of column l of the taps, scaled by 1/N.
FreqChannelMatrix freq_channel_matrix(const ChannelRealization& real);

// Wraps an explicit matrix, computing the condition number (ratio of
// extreme singular values).
FreqChannelMatrix make_freq_matrix(Eigen::MatrixXcd h, std::uint64_t source_seed = 0);

// Interference power at subcarrier offset x: (1/n^2)*(sin(pi x)/sin(pi x/n))^2,
// continuously extended to 1 at x = 0. Requires 0 <= x <= n/2.
double ici_power(double x, int n);

struct GuardSolution {
    int guard_len = 0;
    double crossing = 0.0;  // solved offset x_l
};

// Smallest guard length whose boundary interference power drops to
// alpha*beta. The level equation is solved on the monotone envelope
// (1/n^2)*(sin(pi f_nd)/sin(pi x/n))^2, which coincides with ici_power at
// offsets x = k + f_nd; the guard is ceil(x_l - f_nd) with a small slack
// absorbing root rounding.
GuardSolution guard_length(double f_nd, int n, double alpha, double beta);

// Keep-for-training predicate: condition number at most threshold.
bool condition_filter(const FreqChannelMatrix& h, double threshold);

// Binary channel batch file ("OCDC"), little-endian:
//   magic "OCDC", u32 version, u32 N, u32 L, f64 f_Nd, u64 count,
//   then count records of u64 seed + N*L taps (2 f64 each, column-major
//   over (n, l) with n fastest).
void save_channel_batch(const std::string& path, const ChannelConfig& config,
                        const std::vector<ChannelRealization>& batch);
std::vector<ChannelRealization> load_channel_batch(const std::string& path,
                                                   ChannelConfig* config_out = nullptr);

}  // namespace ocn

#endif  // OCN_CHANMODEL_HPP
