#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "speclab/montecarlo.hpp"
#include "speclab/statistics.hpp"

using namespace speclab;
namespace fs = std::filesystem;

namespace {

TrialConfig small_config() {
    TrialConfig cfg;
    cfg.h = 0.2;
    cfg.eps0_coeff = 2.0;
    cfg.window = {-0.5, 0.5, -0.3, 0.3, 0.1};
    cfg.pad_re = 0.1;
    cfg.pad_im = 0.1;
    cfg.trial_count = 20;
    cfg.master_seed = 424242;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

struct TmpDir {
    fs::path p;
    explicit TmpDir(const std::string& name) {
        p = fs::temp_directory_path() / name;
        fs::remove_all(p);
        fs::create_directories(p);
    }
    ~TmpDir() { fs::remove_all(p); }
    std::string str() const { return p.string(); }
};

} // namespace

TEST_CASE("config validation and hashing") {
    TrialConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("window touching the band edge violates (H.2)") {
        TrialConfig bad = cfg;
        bad.window = {-0.5, 0.5, -0.95, 0.95, 0.1};
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
    }
    SUBCASE("padding pushing past the band is rejected") {
        TrialConfig bad = cfg;
        bad.pad_im = 0.8;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
    }
    SUBCASE("hash is stable and ignores the thread budget") {
        TrialConfig c2 = cfg;
        c2.workers = 8;
        CHECK(cfg.hash() == c2.hash());
        TrialConfig c3 = cfg;
        c3.master_seed += 1;
        CHECK(cfg.hash() != c3.hash());
    }
    SUBCASE("bad h") {
        TrialConfig bad = cfg;
        bad.h = 1.2;
        CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
    }
}

TEST_CASE("record line round trip") {
    EigenRecord r;
    r.trial_index = 7;
    r.seed = 123456789012345ULL;
    r.eigs = {{0.1234567890123456, -0.5}, {1e-17, 2.0}};
    EigenRecord back = parse_record(format_record(r));
    CHECK(back.trial_index == r.trial_index);
    CHECK(back.seed == r.seed);
    REQUIRE(back.eigs.size() == 2);
    CHECK(back.eigs[0] == r.eigs[0]);
    CHECK(back.eigs[1] == r.eigs[1]);
}

TEST_CASE("run_trial: determinism and delta = 0 comb") {
    TrialConfig cfg = small_config();
    auto r1 = run_trial(cfg, 3);
    auto r2 = run_trial(cfg, 3);
    CHECK_FALSE(r1.failed);
    CHECK(format_record(r1) == format_record(r2));
    CHECK(r1.eigs.size() > 0);
    CHECK(r1.eigs.size() <= size_t(2 * cfg.effective_M(cfg.symbol()) + 1));

    TrialConfig unp = cfg;
    unp.delta_mode = DeltaMode::zero;
    unp.pad_re = 0.11; // keep 0.2*3 inside despite rounding at the edge
    auto r0 = run_trial(unp, 0);
    // {h k} intersected with the padded window: |0.2 k| <= 0.61, Im = 0
    REQUIRE(r0.eigs.size() == 7);
    int k = -3;
    for (const auto& z : r0.eigs) {
        CHECK(z.real() == doctest::Approx(0.2 * k).epsilon(1e-14));
        CHECK(z.imag() == 0.0);
        ++k;
    }
}

TEST_CASE("run_batch: manifest, resume, thread-budget independence") {
    TrialConfig cfg = small_config();
    TmpDir d1("speclab_mc_a"), d2("speclab_mc_b"), d3("speclab_mc_c");

    auto b1 = run_batch(cfg, d1.str());
    CHECK(b1.newly_run == 20);
    CHECK(b1.failed_count == 0);
    CHECK(b1.manifest.completed.size() == 20);
    std::string bytes1 = slurp(b1.records_path);

    SUBCASE("idempotent rerun does nothing") {
        auto again = run_batch(cfg, d1.str());
        CHECK(again.newly_run == 0);
        CHECK(slurp(again.records_path) == bytes1);
    }
    SUBCASE("interrupted run resumes to an identical file") {
        // simulate an interruption after 8 trials: truncate the records
        // file and roll the manifest back
        auto part = run_batch(cfg, d2.str());
        RunManifest m = part.manifest;
        std::int64_t cut = m.offsets.at(8);
        std::string partial = slurp(part.records_path).substr(0, size_t(cut));
        {
            std::ofstream out(part.records_path, std::ios::binary);
            out << partial;
        }
        m.completed.erase(m.completed.begin() + 8, m.completed.end());
        for (int i = 8; i < 20; ++i) {
            m.offsets.erase(i);
            m.rejections.erase(i);
            m.wall_times.erase(i);
        }
        write_manifest(m, part.manifest_path);

        auto resumed = run_batch(cfg, d2.str());
        CHECK(resumed.newly_run == 12);
        CHECK(slurp(resumed.records_path) == bytes1);
    }
    SUBCASE("4 workers produce byte-identical records") {
        TrialConfig c4 = cfg;
        c4.workers = 4;
        auto b4 = run_batch(c4, d3.str());
        CHECK(slurp(b4.records_path) == bytes1);
    }
    SUBCASE("foreign manifest is refused") {
        TrialConfig other = cfg;
        other.master_seed = 999;
        CHECK_THROWS_AS(run_batch(other, d1.str()), IncompatibleManifest);
    }
}

TEST_CASE("perturbed counts follow the Weyl law") {
    // eps0 = 2 h ln(1/h) keeps the whole window inside the delocalized
    // region at h = 0.1, so the phase-volume count applies
    TrialConfig cfg;
    cfg.h = 0.1;
    cfg.eps0_coeff = 2.0;
    cfg.window = {-0.5, 0.5, -0.5, 0.5, 0.1};
    cfg.pad_re = 0.0;
    cfg.pad_im = 0.0;
    cfg.trial_count = 60;
    cfg.master_seed = 777;
    TmpDir d("speclab_mc_weyl");
    auto b = run_batch(cfg, d.str());
    REQUIRE(b.failed_count == 0);
    auto recs = read_records(b.records_path);
    auto wc = weyl_count(recs, cfg.window);
    auto g = cfg.symbol();
    double expect =
        symplectic_volume(g, cfg.window) / (2 * std::numbers::pi * cfg.h);
    CHECK(std::abs(wc.mean - expect) / expect < 0.2);
}
