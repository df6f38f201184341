#include "speclab/montecarlo.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "speclab/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace speclab {

// ---- records ---------------------------------------------------------------

static std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_record(const EigenRecord& r) {
    std::string line = std::to_string(r.trial_index) + "," +
                       std::to_string(r.seed) + "," +
                       std::to_string(r.eigs.size());
    for (const auto& z : r.eigs)
        line += "," + fmt17(z.real()) + "," + fmt17(z.imag());
    line += "\n";
    return line;
}

EigenRecord parse_record(const std::string& line) {
    EigenRecord r;
    std::stringstream ss(line);
    std::string tok;
    auto next = [&]() {
        if (!std::getline(ss, tok, ','))
            throw Error("truncated record line");
        return tok;
    };
    r.trial_index = std::stoi(next());
    r.seed = std::stoull(next());
    size_t n = std::stoul(next());
    r.eigs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        double re = std::stod(next());
        double im = std::stod(next());
        r.eigs.emplace_back(re, im);
    }
    return r;
}

std::vector<EigenRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open records: " + path);
    std::vector<EigenRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(parse_record(line));
    return out;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    json j;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["completed"] = m.completed;
    json fails = json::object(), offs = json::object(),
         rej = json::object(), wt = json::object();
    for (auto& [k, v] : m.failures)
        fails[std::to_string(k)] = v;
    for (auto& [k, v] : m.offsets)
        offs[std::to_string(k)] = v;
    for (auto& [k, v] : m.rejections)
        rej[std::to_string(k)] = v;
    for (auto& [k, v] : m.wall_times)
        wt[std::to_string(k)] = v;
    j["failures"] = fails;
    j["offsets"] = offs;
    j["rejections"] = rej;
    j["wall_times"] = wt;
    // atomic: temp + rename, never a half-written manifest
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(2) << "\n";
        if (!out)
            throw Error("cannot write manifest: " + tmp);
    }
    fs::rename(tmp, path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open manifest: " + path);
    json j = json::parse(in);
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.value("version", "");
    m.completed = j.at("completed").get<std::vector<int>>();
    const json fails = j.value("failures", json::object());
    const json offs = j.value("offsets", json::object());
    const json rej = j.value("rejections", json::object());
    const json wt = j.value("wall_times", json::object());
    for (auto& [k, v] : fails.items())
        m.failures[std::stoi(k)] = v.get<std::string>();
    for (auto& [k, v] : offs.items())
        m.offsets[std::stoi(k)] = v.get<std::int64_t>();
    for (auto& [k, v] : rej.items())
        m.rejections[std::stoi(k)] = v.get<int>();
    for (auto& [k, v] : wt.items())
        m.wall_times[std::stoi(k)] = v.get<double>();
    return m;
}

// ---- config ---------------------------------------------------------------

double TrialConfig::delta(const SymbolFunction& g) const {
    switch (delta_mode) {
    case DeltaMode::zero:
        return 0.0;
    case DeltaMode::fixed:
        return delta_fixed;
    case DeltaMode::hypothesis:
        return delta_from_hypothesis(h, eps0_coeff, g, window).delta;
    }
    return 0.0;
}

void TrialConfig::validate() const {
    if (h <= 0 || h >= 1)
        throw ConfigInvalid("need 0 < h < 1");
    if (trial_count < 1)
        throw ConfigInvalid("trial_count must be positive");
    if (pad_re < 0 || pad_im < 0)
        throw ConfigInvalid("window padding must be nonnegative");
    SymbolFunction g = symbol(); // (H.1) checked on construction
    window.validate(g);          // (H.2)
    if (delta_mode == DeltaMode::hypothesis)
        delta_from_hypothesis(h, eps0_coeff, g, window); // (H.3) flags only
    FourierTruncation t{effective_M(g)};
    t.validate(g, h, C1);
    if (t.dim() > dim_cap)
        throw DimensionCap("truncation dim " + std::to_string(t.dim()) +
                           " exceeds cap " + std::to_string(dim_cap));
    SpectralWindow p = padded();
    if (p.im_lo <= g.band_min() || p.im_hi >= g.band_max())
        throw ConfigInvalid(
            "padded window leaves the open band; shrink the padding (H.2)");
}

std::string TrialConfig::canonical_string() const {
    // stable key order; workers deliberately excluded (no effect on records)
    std::string s;
    s += "C1=" + fmt17(C1) + ";C_ball=" + fmt17(C_ball) + ";";
    s += "delta_fixed=" + fmt17(delta_fixed) + ";";
    s += "delta_mode=" + std::to_string(int(delta_mode)) + ";";
    s += "dim_cap=" + std::to_string(dim_cap) + ";";
    s += "eps0_coeff=" + fmt17(eps0_coeff) + ";h=" + fmt17(h) + ";";
    s += "master_seed=" + std::to_string(master_seed) + ";";
    s += "pad_im=" + fmt17(pad_im) + ";pad_re=" + fmt17(pad_re) + ";";
    s += "symbol=";
    for (const auto& mo : symbol_modes)
        s += std::to_string(mo.m) + ":" + fmt17(mo.c.real()) + ":" +
             fmt17(mo.c.imag()) + ",";
    s += ";trial_count=" + std::to_string(trial_count) + ";";
    s += "truncation_M=" + std::to_string(truncation_M) + ";";
    s += "window=" + fmt17(window.re_lo) + "," + fmt17(window.re_hi) + "," +
         fmt17(window.im_lo) + "," + fmt17(window.im_hi) + "," +
         fmt17(window.margin);
    return s;
}

std::string TrialConfig::hash() const {
    std::string s = canonical_string();
    std::uint64_t acc = 0xcbf29ce484222325ULL; // FNV-1a, then splitmix stir
    for (unsigned char c : s) {
        acc ^= c;
        acc *= 0x100000001b3ULL;
    }
    acc = splitmix64(acc);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)acc);
    return buf;
}

// ---- trials ---------------------------------------------------------------

EigenRecord run_trial(const TrialConfig& cfg, int trial_index) {
    auto start = std::chrono::steady_clock::now();
    EigenRecord rec;
    rec.trial_index = trial_index;
    rec.seed = trial_seed(cfg.master_seed, std::uint64_t(trial_index));
    try {
        SymbolFunction g = cfg.symbol();
        FourierTruncation trunc{cfg.effective_M(g)};
        PerturbedOperator P0 = build_unperturbed(g, cfg.h, trunc);
        double delta = cfg.delta(g);
        Matrix M;
        if (delta == 0.0) {
            rec.rejection_count = 0;
            M = P0.matrix;
        } else {
            PerturbationDraw d =
                draw_accepted(rec.seed, cfg.h, cfg.C1, cfg.C_ball);
            rec.rejection_count = d.rejections;
            M = assemble_perturbed(P0, d, delta).matrix;
        }
        EigenSet es = eigenvalues(M, cfg.dim_cap);
        SpectralWindow pw = cfg.padded();
        for (size_t i = 0; i < es.values.size(); ++i) {
            if (!pw.contains(es.values[i]))
                continue;
            if (es.residuals[i] > 1e-8 * es.matrix_norm)
                throw ConvergenceFailure("residual certificate failed at " +
                                         fmt17(es.values[i].real()));
            rec.eigs.push_back(es.values[i]);
        }
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.eigs.clear();
    }
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
}

BatchResult run_batch(const TrialConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    BatchResult res;
    res.records_path = (fs::path(out_dir) / "records.csv").string();
    res.manifest_path = (fs::path(out_dir) / "manifest.json").string();

    RunManifest m;
    m.config_hash = cfg.hash();
    if (fs::exists(res.manifest_path)) {
        RunManifest prev = read_manifest(res.manifest_path);
        if (prev.config_hash != m.config_hash)
            throw IncompatibleManifest(
                "existing manifest was produced by a different config (hash " +
                prev.config_hash + " vs " + m.config_hash + ")");
        m = prev;
    }

    std::vector<int> todo;
    for (int i = 0; i < cfg.trial_count; ++i) {
        bool done = std::find(m.completed.begin(), m.completed.end(), i) !=
                        m.completed.end() ||
                    m.failures.count(i);
        if (!done)
            todo.push_back(i);
    }

    std::ofstream out(res.records_path, std::ios::app);
    if (!out)
        throw Error("cannot open " + res.records_path);

    // workers pull indices; the writer consumes results in strict index
    // order, so the record file is identical for any thread budget
    std::mutex mu;
    std::condition_variable cv;
    std::map<int, EigenRecord> ready;
    size_t next_pull = 0;

    int nworkers = std::max(1, cfg.workers);
    std::vector<std::thread> pool;
    for (int wkr = 0; wkr < nworkers; ++wkr)
        pool.emplace_back([&] {
            for (;;) {
                int idx;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    if (next_pull >= todo.size())
                        return;
                    idx = todo[next_pull++];
                }
                EigenRecord r = run_trial(cfg, idx);
                {
                    std::lock_guard<std::mutex> lk(mu);
                    ready.emplace(idx, std::move(r));
                }
                cv.notify_all();
            }
        });

    for (size_t written = 0; written < todo.size(); ++written) {
        int want = todo[written];
        EigenRecord r;
        {
            std::unique_lock<std::mutex> lk(mu);
            cv.wait(lk, [&] { return ready.count(want) > 0; });
            r = std::move(ready.at(want));
            ready.erase(want);
        }
        if (r.failed) {
            m.failures[want] = r.error;
            ++res.failed_count;
        } else {
            m.offsets[want] = std::int64_t(out.tellp());
            out << format_record(r);
            out.flush();
            m.completed.push_back(want);
        }
        m.rejections[want] = r.rejection_count;
        m.wall_times[want] = r.wall_time;
        write_manifest(m, res.manifest_path);
        ++res.newly_run;
    }
    for (auto& t : pool)
        t.join();

    res.failed_count = int(m.failures.size());
    res.manifest = std::move(m);
    return res;
}

} // namespace speclab
