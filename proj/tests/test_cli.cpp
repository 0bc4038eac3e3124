#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ocn/checkpoint.hpp"
#include "ocn/errors.hpp"
#include "ocn/learn.hpp"
#include "ocn/evalharness.hpp"
#include "ocn/runconfig.hpp"

using namespace ocn;

namespace {

std::string cli_path() {
    const char* p = std::getenv("OCN_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args, std::string* output = nullptr) {
    const std::string cmd = cli_path() + " " + args + " > cli_out.txt 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream is("cli_out.txt");
        std::stringstream ss;
        ss << is.rdbuf();
        *output = ss.str();
    }
    return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("runconfig parsing and schema") {
    const RunConfig cfg = RunConfig::parse_text(
        "n = 32\nfnd = 0.16  # comment\nsnr_points = 10, 20, 30\nloss=euclidean\n",
        "test");
    CHECK(cfg.get_int("n", 0) == 32);
    CHECK(cfg.get_real("fnd", 0) == 0.16);
    CHECK(cfg.get_reals("snr_points", {}) == std::vector<double>{10, 20, 30});
    CHECK(cfg.get_string("loss", "") == "euclidean");
    CHECK(cfg.get_int("layers", 20) == 20);  // default

    CHECK_THROWS_WITH_AS(RunConfig::parse_text("bogus_key = 1\n", "t"),
                         doctest::Contains("bogus_key"), ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse_text("n = 1\nn = 2\n", "t"),
                         doctest::Contains(":2"), ConfigError);
    const RunConfig bad = RunConfig::parse_text("n = 3x\n", "t");
    CHECK_THROWS_WITH_AS(bad.get_int("n", 0), doctest::Contains("'n'"), ConfigError);
}

TEST_CASE("checkpoint round trip is bit-exact and CRC-protected") {
    const DetectorParams params = init_params(4, 3, InitMode::Zf, 123);
    save_checkpoint("ckpt_test.ocnp", params);
    const DetectorParams loaded = load_checkpoint("ckpt_test.ocnp");
    CHECK(loaded.n == params.n);
    CHECK(loaded.num_layers == params.num_layers);
    CHECK(loaded.init_mode == params.init_mode);
    for (int k = 0; k < 3; ++k) {
        CHECK(loaded.layer_w[static_cast<std::size_t>(k)] ==
              params.layer_w[static_cast<std::size_t>(k)]);
        CHECK(loaded.layer_b[static_cast<std::size_t>(k)] ==
              params.layer_b[static_cast<std::size_t>(k)]);
        CHECK(loaded.layer_t[static_cast<std::size_t>(k)] ==
              params.layer_t[static_cast<std::size_t>(k)]);
    }
    save_checkpoint("ckpt_roundtrip.ocnp", loaded);
    CHECK(slurp("ckpt_test.ocnp") == slurp("ckpt_roundtrip.ocnp"));

    // Flip one payload byte: the CRC must catch it.
    std::string bytes = slurp("ckpt_test.ocnp");
    bytes[20] = static_cast<char>(bytes[20] ^ 0x40);
    write_file("ckpt_corrupt.ocnp", bytes);
    CHECK_THROWS_AS(load_checkpoint("ckpt_corrupt.ocnp"), IoError);
}

TEST_CASE("guard-len subcommand") {
    std::string out;
    CHECK(run("guard-len --n 256 --fnd 0.16 --alpha 1 --beta 3.54e-4", &out) == 0);
    CHECK(out.find("l_G = 8") != std::string::npos);

    CHECK(run("guard-len --n 32 --fnd 0.16 --alpha 1 --beta 3.54e-4", &out) == 0);
    const GuardSolution lib = guard_length(0.16, 32, 1.0, 3.54e-4);
    CHECK(out.find("l_G = " + std::to_string(lib.guard_len)) != std::string::npos);

    CHECK(run("guard-len --n 256 --fnd 0.16 --alpha 1 --beta 1.5", &out) != 0);
}

TEST_CASE("gen subcommand writes the documented layout") {
    write_file("gen.cfg", "n = 8\npaths = 2\nfnd = 0.16\nseed = 5\n");
    CHECK(run("gen --config gen.cfg --count 0 --out empty.ocdc") == 0);
    CHECK(std::filesystem::file_size("empty.ocdc") == 32);

    CHECK(run("gen --config gen.cfg --count 3 --out batch.ocdc") == 0);
    CHECK(std::filesystem::file_size("batch.ocdc") == 32 + 3 * (8 + 16 * 8 * 2));

    ChannelConfig cfg;
    const auto batch = load_channel_batch("batch.ocdc", &cfg);
    REQUIRE(batch.size() == 3);
    for (const auto& real : batch) {
        const ChannelRealization regen = jakes_taps(cfg, real.seed);
        CHECK(real.taps == regen.taps);
    }
}

TEST_CASE("train subcommand is deterministic and honors lr=0") {
    write_file("train.cfg",
               "n = 4\npaths = 2\nfnd = 0.16\nlayers = 2\nlr = 0\nbatch = 4\n"
               "iterations = 2\nseed = 21\nloss = euclidean\n");
    CHECK(run("train --config train.cfg --out t1.ocnp --loss-csv t1.csv") == 0);
    const DetectorParams trained = load_checkpoint("t1.ocnp");
    const DetectorParams init = init_params(4, 2, InitMode::Zf, 21);
    CHECK(trained.layer_w[0] == init.layer_w[0]);

    CHECK(run("train --config train.cfg --out t2.ocnp --loss-csv t2.csv") == 0);
    CHECK(slurp("t1.ocnp") == slurp("t2.ocnp"));
    CHECK(slurp("t1.csv") == slurp("t2.csv"));
}

TEST_CASE("OCN_SEED overrides the configured seed") {
    write_file("seedenv.cfg",
               "n = 4\npaths = 2\nfnd = 0.16\nlayers = 1\nlr = 0\nbatch = 2\n"
               "iterations = 1\nseed = 21\n");
    const std::string cmd = "OCN_SEED=77 " + cli_path() +
                            " train --config seedenv.cfg --out tenv.ocnp > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const DetectorParams trained = load_checkpoint("tenv.ocnp");
    CHECK(trained.layer_w[0] == init_params(4, 1, InitMode::Zf, 77).layer_w[0]);
}

TEST_CASE("eval subcommand") {
    write_file("eval.cfg",
               "n = 8\npaths = 4\nfnd = 0.16\nsnr_points = 10\nmin_symbols = 20\n"
               "min_errors = 0\ndetectors = zf\nidentity_channel = 1\nnoiseless = 1\n"
               "seed = 1\n");
    CHECK(run("eval --config eval.cfg --out eval.csv") == 0);
    std::string csv = slurp("eval.csv");
    CHECK(csv.find("zf,10,") != std::string::npos);
    CHECK(csv.find(",0,0,") != std::string::npos);  // zero errors, ber 0

    // cn without a checkpoint is a config error (exit 2).
    write_file("eval2.cfg",
               "n = 4\npaths = 2\nfnd = 0.16\nsnr_points = 10\nmin_symbols = 5\n"
               "min_errors = 0\ndetectors = cn\nseed = 1\n");
    CHECK(run("eval --config eval2.cfg --out eval2.csv") == 2);

    // Dimension mismatch between checkpoint and config.
    save_checkpoint("wrongn.ocnp", init_params(6, 1, InitMode::Zf, 1));
    std::string out;
    CHECK(run("eval --config eval2.cfg --ckpt cn=wrongn.ocnp --out eval2.csv", &out) == 2);
    CHECK(out.find("N=6") != std::string::npos);

    // cn with a zf-equivalent checkpoint matches zf row for row.
    save_checkpoint("zfeq.ocnp", zf_equivalent_params(4, 2));
    write_file("eval3.cfg",
               "n = 4\npaths = 2\nfnd = 0.16\nsnr_points = 15\nmin_symbols = 200\n"
               "min_errors = 0\ndetectors = zf,cn\nseed = 3\n");
    CHECK(run("eval --config eval3.cfg --ckpt cn=zfeq.ocnp --out eval3.csv") == 0);
    const auto recs = parse_csv("eval3.csv");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].errors == recs[1].errors);

    // Reproducibility: identical config and seed give identical bytes.
    CHECK(run("eval --config eval3.cfg --ckpt cn=zfeq.ocnp --out eval4.csv") == 0);
    CHECK(slurp("eval3.csv") == slurp("eval4.csv"));
}

TEST_CASE("config errors exit with code 2 and name the key") {
    write_file("bad.cfg", "n = 4\nwhatever = 1\n");
    std::string out;
    CHECK(run("train --config bad.cfg --out x.ocnp", &out) == 2);
    CHECK(out.find("whatever") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists("x.ocnp"));

    CHECK(run("train --config missing_file.cfg --out x.ocnp", &out) == 4);
}
