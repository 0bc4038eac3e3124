#include "ocn/txrx.hpp"

#include <cmath>

#include "ocn/errors.hpp"

namespace ocn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
}

Eigen::VectorXcd qpsk_modulate(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 2 != 0)
        throw ShapeError("qpsk_modulate: bit count must be even");
    Eigen::VectorXcd x(static_cast<Eigen::Index>(bits.size() / 2));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const int b0 = bits[static_cast<std::size_t>(2 * k)] ? 1 : 0;
        const int b1 = bits[static_cast<std::size_t>(2 * k + 1)] ? 1 : 0;
        // First bit selects the imaginary sign, second the real sign.
        const double re = b1 ? -kInvSqrt2 : kInvSqrt2;
        const double im = b0 ? -kInvSqrt2 : kInvSqrt2;
        x(k) = {re, im};
    }
    return x;
}

OfdmSymbol random_symbol(int n, Rng& rng) {
    OfdmSymbol sym;
    sym.bits.resize(static_cast<std::size_t>(2 * n));
    for (auto& b : sym.bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    sym.x = qpsk_modulate(sym.bits);
    return sym;
}

RxObservation transmit(const Eigen::VectorXcd& x, const FreqChannelMatrix& h,
                       double snr_db, std::uint64_t rng_seed) {
    if (x.size() != h.h.cols())
        throw ShapeError("transmit: symbol length does not match channel size");
    RxObservation rx;
    rx.h = h;
    rx.snr_db = snr_db;
    rx.y = h.h * x;
    if (std::isinf(snr_db)) {
        rx.noise_var = 0.0;
        return rx;
    }
    rx.noise_var = std::pow(10.0, -snr_db / 10.0);
    Rng rng(rng_seed);
    for (Eigen::Index k = 0; k < rx.y.size(); ++k)
        rx.y(k) += rng.cgaussian(rx.noise_var);
    return rx;
}

Decision hard_decision(const Eigen::VectorXcd& x_hat) {
    Decision d;
    d.points.resize(x_hat.size());
    d.bits.resize(static_cast<std::size_t>(2 * x_hat.size()));
    for (Eigen::Index k = 0; k < x_hat.size(); ++k) {
        const bool re_neg = x_hat(k).real() < 0.0;
        const bool im_neg = x_hat(k).imag() < 0.0;
        d.bits[static_cast<std::size_t>(2 * k)] = im_neg ? 1 : 0;
        d.bits[static_cast<std::size_t>(2 * k + 1)] = re_neg ? 1 : 0;
        d.points(k) = {re_neg ? -kInvSqrt2 : kInvSqrt2, im_neg ? -kInvSqrt2 : kInvSqrt2};
    }
    return d;
}

long bit_errors(const std::vector<std::uint8_t>& truth,
                const std::vector<std::uint8_t>& decided) {
    if (truth.size() != decided.size())
        throw ShapeError("bit_errors: sequences differ in length");
    long n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if ((truth[i] != 0) != (decided[i] != 0)) ++n;
    return n;
}

}  // namespace ocn
