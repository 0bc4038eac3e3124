// ocn: command-line front end for the OFDM cascade detection laboratory.
//
// Subcommands:
//   guard-len  solve the guard-area length formula
//   gen        generate a binary channel batch file
//   train      train a detector and write a checkpoint + loss CSV
//   eval       run a BER sweep over one or more detectors

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "ocn/chanmodel.hpp"
#include "ocn/checkpoint.hpp"
#include "ocn/detect.hpp"
#include "ocn/errors.hpp"
#include "ocn/evalharness.hpp"
#include "ocn/learn.hpp"
#include "ocn/runconfig.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

ocn::ChannelConfig channel_from(const ocn::RunConfig& cfg) {
    ocn::ChannelConfig chan;
    chan.num_subcarriers = static_cast<int>(cfg.get_int("n", 32));
    chan.num_paths = static_cast<int>(cfg.get_int("paths", 4));
    chan.normalized_doppler = cfg.get_real("fnd", 0.16);
    chan.oscillators_per_path = static_cast<int>(cfg.get_int("oscillators", 32));
    chan.path_powers = cfg.get_reals(
        "path_powers", std::vector<double>(static_cast<std::size_t>(chan.num_paths),
                                           1.0 / chan.num_paths));
    chan.validate();
    return chan;
}

std::uint64_t seed_from(const ocn::RunConfig& cfg) {
    if (const char* env = std::getenv("OCN_SEED"))
        return std::strtoull(env, nullptr, 10);
    return cfg.get_seed("seed", 0);
}

ocn::TrainConfig train_from(const ocn::RunConfig& cfg, int n) {
    ocn::TrainConfig tc;
    tc.num_layers = static_cast<int>(cfg.get_int("layers", 20));
    tc.learning_rate = cfg.get_real("lr", 0.005);
    tc.batch_size = static_cast<int>(cfg.get_int("batch", 500));
    tc.num_iterations = cfg.get_int("iterations", 20000);
    tc.snr_low_db = cfg.get_real("snr_low", 15.0);
    tc.snr_high_db = cfg.get_real("snr_high", 35.0);
    tc.condition_threshold = cfg.get_real("condition_threshold", 10000.0);
    tc.master_seed = seed_from(cfg);
    tc.checkpoint_every = cfg.get_int("loss_every", 100);
    tc.workers = static_cast<int>(cfg.get_int("workers", 1));
    tc.sub_location = static_cast<int>(cfg.get_int("sub_location", 0));

    const std::string loss = cfg.get_string("loss", "euclidean");
    if (loss == "normalized")
        tc.loss_kind = ocn::LossKind::NormalizedMulti;
    else if (loss == "euclidean")
        tc.loss_kind = ocn::LossKind::EuclideanMulti;
    else if (loss == "oa")
        tc.loss_kind = ocn::LossKind::OaMulti;
    else
        throw ocn::ConfigError("loss: expected normalized, euclidean or oa");

    const std::string init = cfg.get_string(
        "init", tc.loss_kind == ocn::LossKind::NormalizedMulti ? "zero" : "zf");
    if (init == "zero")
        tc.init_mode = ocn::InitMode::Zero;
    else if (init == "zf")
        tc.init_mode = ocn::InitMode::Zf;
    else
        throw ocn::ConfigError("init: expected zero or zf");

    if (tc.loss_kind == ocn::LossKind::OaMulti || cfg.has("output_len")) {
        ocn::SlidingConfig sc;
        sc.output_len = static_cast<int>(cfg.get_int("output_len", 16));
        sc.guard_len = static_cast<int>(cfg.get_int("guard_len", 8));
        sc.validate(n);
        tc.sliding = sc;
    }
    return tc;
}

int cmd_guard_len(int n, double fnd, double alpha, double beta) {
    const ocn::GuardSolution sol = ocn::guard_length(fnd, n, alpha, beta);
    std::printf("x_l = %.9f\nl_G = %d\n", sol.crossing, sol.guard_len);
    return 0;
}

int cmd_gen(const std::string& config_path, long count, const std::string& out) {
    const ocn::RunConfig cfg = ocn::RunConfig::parse_file(config_path);
    const ocn::ChannelConfig chan = channel_from(cfg);
    const std::uint64_t master = seed_from(cfg);
    std::vector<ocn::ChannelRealization> batch;
    batch.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        batch.push_back(
            ocn::jakes_taps(chan, ocn::split_seed(master, static_cast<std::uint64_t>(i))));
    ocn::save_channel_batch(out, chan, batch);
    std::printf("wrote %ld realizations to %s\n", count, out.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& ckpt_out,
              const std::string& loss_csv) {
    const ocn::RunConfig cfg = ocn::RunConfig::parse_file(config_path);
    const ocn::ChannelConfig chan = channel_from(cfg);
    const ocn::TrainConfig tc = train_from(cfg, chan.num_subcarriers);

    try {
        const ocn::TrainReport report = ocn::train(chan, tc);
        ocn::save_checkpoint(ckpt_out, report.final_params);
        if (!loss_csv.empty()) {
            std::ofstream os(loss_csv);
            if (!os) throw ocn::IoError("cannot open for writing: " + loss_csv);
            os << "iteration,loss\n";
            char buf[64];
            for (const auto& [it, loss] : report.loss_trace) {
                std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", it, loss);
                os << buf;
            }
        }
        std::printf("trained %d layers in %.1fs (skipped %ld samples)\n",
                    tc.num_layers, report.wall_time_sec, report.skipped_samples);
        return 0;
    } catch (...) {
        // No partial outputs on failure.
        std::error_code ec;
        std::filesystem::remove(ckpt_out, ec);
        if (!loss_csv.empty()) std::filesystem::remove(loss_csv, ec);
        throw;
    }
}

int cmd_eval(const std::string& config_path, const std::vector<std::string>& ckpt_args,
             const std::string& out) {
    const ocn::RunConfig cfg = ocn::RunConfig::parse_file(config_path);
    const ocn::ChannelConfig chan = channel_from(cfg);
    const int n = chan.num_subcarriers;

    std::map<std::string, std::string> ckpt_paths;
    for (const auto& arg : ckpt_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw ocn::ConfigError("--ckpt: expected detector=path, got '" + arg + "'");
        ckpt_paths[arg.substr(0, eq)] = arg.substr(eq + 1);
    }

    ocn::SweepConfig sweep;
    sweep.snr_points_db = cfg.get_reals("snr_points", {15, 20, 25, 30, 35});
    sweep.min_symbols = cfg.get_int("min_symbols", 1000);
    sweep.min_bit_errors = cfg.get_int("min_errors", 200);
    sweep.chan_cfg = chan;
    sweep.master_seed = seed_from(cfg);
    sweep.identity_channel = cfg.get_bool("identity_channel", false);
    sweep.noiseless = cfg.get_bool("noiseless", false);

    ocn::SlidingConfig sc;
    sc.output_len = static_cast<int>(cfg.get_int("output_len", 16));
    sc.guard_len = static_cast<int>(cfg.get_int("guard_len", 8));

    auto load_net = [&](const std::string& id, int expected_n) {
        const auto it = ckpt_paths.find(id);
        if (it == ckpt_paths.end())
            throw ocn::ConfigError("detector '" + id + "' needs --ckpt " + id + "=path");
        ocn::DetectorParams params = ocn::load_checkpoint(it->second);
        if (params.n != expected_n)
            throw ocn::ConfigError("checkpoint for '" + id + "' dimensioned for N=" +
                                   std::to_string(params.n) + ", expected N=" +
                                   std::to_string(expected_n));
        return params;
    };

    ocn::DetectorBundle bundle;
    for (const std::string& id : cfg.get_strings("detectors", {"zf"})) {
        if (id == "zf") {
            bundle.detectors.emplace_back(id, [](const ocn::FreqChannelMatrix& h,
                                                 const Eigen::VectorXcd& y) {
                return ocn::zf_detect(h, y);
            });
        } else if (id == "ml") {
            bundle.detectors.emplace_back(id, [](const ocn::FreqChannelMatrix& h,
                                                 const Eigen::VectorXcd& y) {
                return ocn::ml_bruteforce(h, y);
            });
        } else if (id == "dnt" || id == "cn") {
            auto params = std::make_shared<ocn::DetectorParams>(load_net(id, n));
            bundle.detectors.emplace_back(
                id, [params](const ocn::FreqChannelMatrix& h, const Eigen::VectorXcd& y) {
                    return ocn::unembed_vector(
                        ocn::forward(*params, h, y).estimates.back());
                });
        } else if (id == "sliding-zf") {
            sc.validate(n);
            bundle.detectors.emplace_back(
                id, [sc](const ocn::FreqChannelMatrix& h, const Eigen::VectorXcd& y) {
                    return ocn::sliding_zf(h, y, sc);
                });
        } else if (id == "scn") {
            sc.validate(n);
            auto params = std::make_shared<ocn::DetectorParams>(load_net(id, sc.total_len()));
            bundle.detectors.emplace_back(
                id, [params, sc](const ocn::FreqChannelMatrix& h,
                                 const Eigen::VectorXcd& y) {
                    return ocn::scn_detect(*params, h, y, sc);
                });
        } else {
            throw ocn::ConfigError("detectors: unknown detector '" + id + "'");
        }
    }

    const std::vector<ocn::BerRecord> records = ocn::ber_sweep(sweep, bundle);
    ocn::emit_csv(records, out);
    std::printf("wrote %zu BER records to %s\n", records.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM cascade detection laboratory"};
    app.require_subcommand(1);

    auto* guard = app.add_subcommand("guard-len", "solve the guard-length formula");
    int g_n = 256;
    double g_fnd = 0.16, g_alpha = 1.0, g_beta = 3.54e-4;
    guard->add_option("--n", g_n, "subcarrier count")->required();
    guard->add_option("--fnd", g_fnd, "normalized Doppler")->required();
    guard->add_option("--alpha", g_alpha, "amplitude compensation");
    guard->add_option("--beta", g_beta, "lowest interference power considered");

    auto* gen = app.add_subcommand("gen", "generate a channel batch file");
    std::string gen_config, gen_out;
    long gen_count = 0;
    gen->add_option("--config", gen_config, "run config path")->required();
    gen->add_option("--count", gen_count, "number of realizations")->required();
    gen->add_option("--out", gen_out, "output file")->required();

    auto* tr = app.add_subcommand("train", "train a detector");
    std::string tr_config, tr_out, tr_loss;
    tr->add_option("--config", tr_config, "run config path")->required();
    tr->add_option("--out", tr_out, "checkpoint output path")->required();
    tr->add_option("--loss-csv", tr_loss, "loss trace CSV path");

    auto* ev = app.add_subcommand("eval", "run a BER sweep");
    std::string ev_config, ev_out;
    std::vector<std::string> ev_ckpts;
    ev->add_option("--config", ev_config, "run config path")->required();
    ev->add_option("--ckpt", ev_ckpts, "checkpoint as detector=path (repeatable)");
    ev->add_option("--out", ev_out, "BER CSV output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (guard->parsed()) return cmd_guard_len(g_n, g_fnd, g_alpha, g_beta);
        if (gen->parsed()) return cmd_gen(gen_config, gen_count, gen_out);
        if (tr->parsed()) return cmd_train(tr_config, tr_out, tr_loss);
        if (ev->parsed()) return cmd_eval(ev_config, ev_ckpts, ev_out);
    } catch (const ocn::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const ocn::TrainingDivergenceError& e) {
        std::fprintf(stderr, "error: %s (iteration %ld)\n", e.what(), e.iteration);
        return kExitNumeric;
    } catch (const ocn::SingularChannelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const ocn::CapacityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
