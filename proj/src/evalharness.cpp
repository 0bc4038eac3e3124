#include "ocn/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocn/errors.hpp"
#include "ocn/rng.hpp"
#include "ocn/txrx.hpp"

namespace ocn {

void SweepConfig::validate() const {
    if (snr_points_db.empty())
        throw ConfigError("snr_points_db: must be nonempty");
    for (std::size_t i = 1; i < snr_points_db.size(); ++i)
        if (!(snr_points_db[i] > snr_points_db[i - 1]))
            throw ConfigError("snr_points_db: must be strictly increasing");
    if (min_symbols < 1) throw ConfigError("min_symbols: must be positive");
    if (min_bit_errors < 0) throw ConfigError("min_bit_errors: must be nonnegative");
    chan_cfg.validate();
}

std::vector<BerRecord> ber_sweep(const SweepConfig& cfg, const DetectorBundle& bundle) {
    cfg.validate();
    if (bundle.detectors.empty())
        throw ConfigError("detectors: need at least one detector");
    const int n = cfg.chan_cfg.num_subcarriers;

    std::vector<BerRecord> records;
    for (std::size_t si = 0; si < cfg.snr_points_db.size(); ++si) {
        const double snr = cfg.snr_points_db[si];
        const std::uint64_t point_seed =
            split_seed(cfg.master_seed, static_cast<std::uint64_t>(si));
        Rng rng(point_seed);
        std::uint64_t counter = 0;

        std::vector<long> errors(bundle.detectors.size(), 0);
        long symbols = 0, skipped = 0;

        auto done = [&] {
            if (symbols < cfg.min_symbols) return false;
            if (symbols >= 100 * cfg.min_symbols) return true;
            return std::all_of(errors.begin(), errors.end(),
                               [&](long e) { return e >= cfg.min_bit_errors; });
        };

        while (!done()) {
            FreqChannelMatrix h;
            if (cfg.identity_channel) {
                h.h = Eigen::MatrixXcd::Identity(n, n);
                h.condition_number = 1.0;
            } else {
                h = freq_channel_matrix(
                    jakes_taps(cfg.chan_cfg, split_seed(point_seed, ++counter)));
                if (cfg.condition_threshold > 0.0 &&
                    !condition_filter(h, cfg.condition_threshold)) {
                    ++skipped;
                    continue;
                }
            }
            const OfdmSymbol sym = random_symbol(n, rng);
            const RxObservation rx =
                transmit(sym.x, h, cfg.noiseless ? kNoiselessDb : snr,
                         split_seed(point_seed, ++counter));

            // Run every detector on the identical realization; a failure on
            // any of them discards the realization for all.
            std::vector<long> trial(bundle.detectors.size());
            bool usable = true;
            for (std::size_t d = 0; d < bundle.detectors.size(); ++d) {
                try {
                    const Eigen::VectorXcd est = bundle.detectors[d].second(h, rx.y);
                    trial[d] = bit_errors(sym.bits, hard_decision(est).bits);
                } catch (const SingularChannelError&) {
                    usable = false;
                    break;
                }
            }
            if (!usable) {
                ++skipped;
                continue;
            }
            ++symbols;
            for (std::size_t d = 0; d < bundle.detectors.size(); ++d)
                errors[d] += trial[d];
        }

        for (std::size_t d = 0; d < bundle.detectors.size(); ++d) {
            BerRecord rec;
            rec.detector_id = bundle.detectors[d].first;
            rec.snr_db = snr;
            rec.symbols = symbols;
            rec.bits = 2L * n * symbols;
            rec.errors = errors[d];
            rec.ber = rec.bits > 0 ? static_cast<double>(rec.errors) / rec.bits : 0.0;
            rec.std_err = rec.bits > 0
                              ? std::sqrt(rec.ber * (1.0 - rec.ber) / rec.bits)
                              : 0.0;
            rec.skipped = skipped;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

void emit_csv(const std::vector<BerRecord>& records, const std::string& path) {
    std::vector<BerRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const BerRecord& a, const BerRecord& b) {
        if (a.detector_id != b.detector_id) return a.detector_id < b.detector_id;
        return a.snr_db < b.snr_db;
    });
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "detector,snr_db,symbols,bits,errors,ber,stderr\n";
    char buf[256];
    for (const auto& r : sorted) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%ld,%ld,%ld,%.17g,%.17g\n",
                      r.detector_id.c_str(), r.snr_db, r.symbols, r.bits, r.errors,
                      r.ber, r.std_err);
        os << buf;
    }
    if (!os) throw IoError("write failure: " + path);
}

std::vector<BerRecord> parse_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line) || line != "detector,snr_db,symbols,bits,errors,ber,stderr")
        throw IoError("bad CSV header: " + path);
    std::vector<BerRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        BerRecord r;
        std::getline(ss, r.detector_id, ',');
        std::getline(ss, field, ',');
        r.snr_db = std::stod(field);
        std::getline(ss, field, ',');
        r.symbols = std::stol(field);
        std::getline(ss, field, ',');
        r.bits = std::stol(field);
        std::getline(ss, field, ',');
        r.errors = std::stol(field);
        std::getline(ss, field, ',');
        r.ber = std::stod(field);
        std::getline(ss, field, ',');
        r.std_err = std::stod(field);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ocn
