#ifndef OCN_EVALHARNESS_HPP
#define OCN_EVALHARNESS_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ocn/chanmodel.hpp"

namespace ocn {

struct SweepConfig {
    std::vector<double> snr_points_db;  // strictly increasing
    long min_symbols = 1000;
    long min_bit_errors = 200;  // early-stop target per detector
    ChannelConfig chan_cfg;
    std::uint64_t master_seed = 0;
    bool identity_channel = false;  // debug override: H = I (AWGN only)
    bool noiseless = false;         // debug override: noise disabled
    double condition_threshold = 0.0;  // 0 disables the skip filter

    void validate() const;
};

struct BerRecord {
    std::string detector_id;
    double snr_db = 0.0;
    long symbols = 0;
    long bits = 0;
    long errors = 0;
    double ber = 0.0;
    double std_err = 0.0;  // binomial standard error
    long skipped = 0;      // realizations skipped (singular channels)
};

// Soft estimate in, hard decision taken by the harness.
using DetectorFn =
    std::function<Eigen::VectorXcd(const FreqChannelMatrix&, const Eigen::VectorXcd&)>;

struct DetectorBundle {
    std::vector<std::pair<std::string, DetectorFn>> detectors;
};

// Monte Carlo BER sweep. Every detector at a given SNR point sees the
// identical channel/symbol/noise stream (paired comparison); simulation
// continues until min_symbols and min_bit_errors are both met, capped at
// 100 * min_symbols. Deterministic in master_seed.
std::vector<BerRecord> ber_sweep(const SweepConfig& cfg, const DetectorBundle& bundle);

// CSV with header detector,snr_db,symbols,bits,errors,ber,stderr; rows
// sorted by detector then SNR; floats at 17 significant digits.
void emit_csv(const std::vector<BerRecord>& records, const std::string& path);

std::vector<BerRecord> parse_csv(const std::string& path);

}  // namespace ocn

#endif  // OCN_EVALHARNESS_HPP
