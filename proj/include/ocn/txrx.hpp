#ifndef OCN_TXRX_HPP
#define OCN_TXRX_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "ocn/chanmodel.hpp"
#include "ocn/rng.hpp"

namespace ocn {

// Disables noise entirely in transmit().
constexpr double kNoiselessDb = std::numeric_limits<double>::infinity();

// One frequency-domain QPSK symbol: 2N bits and the mapped unit-energy points.
struct OfdmSymbol {
    std::vector<std::uint8_t> bits;
    Eigen::VectorXcd x;
};

struct RxObservation {
    Eigen::VectorXcd y;
    FreqChannelMatrix h;
    double snr_db = 0.0;
    double noise_var = 0.0;  // total complex noise variance per subcarrier
};

// Gray mapping, one point per bit pair:
//   00 -> (+1+j)/sqrt(2)   01 -> (-1+j)/sqrt(2)
//   11 -> (-1-j)/sqrt(2)   10 -> (+1-j)/sqrt(2)
Eigen::VectorXcd qpsk_modulate(const std::vector<std::uint8_t>& bits);

OfdmSymbol random_symbol(int n, Rng& rng);

// y = H x + w, w circularly-symmetric gaussian with per-entry variance
// 10^(-snr_db/10). snr_db = kNoiselessDb disables the noise.
RxObservation transmit(const Eigen::VectorXcd& x, const FreqChannelMatrix& h,
                       double snr_db, std::uint64_t rng_seed);

struct Decision {
    Eigen::VectorXcd points;
    std::vector<std::uint8_t> bits;
};

// Nearest QPSK point by independent signs; exact zeros decide positive.
Decision hard_decision(const Eigen::VectorXcd& x_hat);

// Hamming distance.
long bit_errors(const std::vector<std::uint8_t>& truth,
                const std::vector<std::uint8_t>& decided);

}  // namespace ocn

#endif  // OCN_TXRX_HPP
