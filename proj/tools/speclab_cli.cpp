#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "speclab/acceptance.hpp"
#include "speclab/config.hpp"
#include "speclab/gramian.hpp"
#include "speclab/spectral.hpp"
#include "speclab/statistics.hpp"
#include "speclab/svg.hpp"

namespace fs = std::filesystem;
using namespace speclab;
using nlohmann::json;

namespace {

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// every artifact starts with the config hash so downstream tools can refuse
// mixed-provenance inputs
std::string csv_header(const std::string& hash, const std::string& columns) {
    return "# config_hash=" + hash + "\n" + columns + "\n";
}

int cmd_simulate(const RunConfig& cfg, bool resume) {
    fs::path manifest = fs::path(cfg.out_dir) / "manifest.json";
    if (fs::exists(manifest) && !resume) {
        RunManifest prev = read_manifest(manifest.string());
        if (!prev.completed.empty()) {
            std::cerr << "output dir already holds a run (hash "
                      << prev.config_hash << "); pass --resume to continue\n";
            return 2;
        }
    }
    BatchResult b = run_batch(cfg.trial, cfg.out_dir);
    std::cout << "records: " << b.records_path << "\n"
              << "manifest: " << b.manifest_path << "\n"
              << "newly run " << b.newly_run << ", completed "
              << b.manifest.completed.size() << "/" << cfg.trial.trial_count
              << ", failed " << b.failed_count << "\n";
    if (double(b.failed_count) > 0.01 * cfg.trial.trial_count) {
        std::cerr << "failed-trial fraction exceeds the 1% budget\n";
        return 3;
    }
    return 0;
}

int cmd_stats(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    RunManifest m = read_manifest((dir / "manifest.json").string());
    std::string hash = cfg.trial.hash();
    if (m.config_hash != hash)
        throw MismatchedConfig("records were produced by config hash " +
                               m.config_hash + ", current config hashes to " +
                               hash);
    auto records = read_records((dir / "records.csv").string());
    SymbolFunction g = cfg.trial.symbol();
    DensityModel model{cfg.trial.h, cfg.trial.delta(g), 1.0};

    WeylCount wc = weyl_count(records, cfg.trial.window);
    IntensityGrid grid = intensity_grid(records, cfg.trial.window,
                                        cfg.stats.grid_nx, cfg.stats.grid_ny);
    {
        std::string csv = csv_header(hash, "ix,iy,re,im,density,stderr");
        for (int iy = 0; iy < grid.ny; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix) {
                double re = grid.window.re_lo +
                            (ix + 0.5) * (grid.window.re_hi -
                                          grid.window.re_lo) /
                                grid.nx;
                double im = grid.window.im_lo +
                            (iy + 0.5) * (grid.window.im_hi -
                                          grid.window.im_lo) /
                                grid.ny;
                size_t k = size_t(iy) * grid.nx + ix;
                csv += std::to_string(ix) + "," + std::to_string(iy) + "," +
                       csv_num(re) + "," + csv_num(im) + "," +
                       csv_num(grid.density[k]) + "," +
                       csv_num(grid.stderr_[k]) + "\n";
            }
        write_text_atomic((dir / "intensity.csv").string(), csv);
    }

    auto edges = default_r_bins(cfg.trial.h, cfg.stats.r_bins);
    PairCorrelation pc = pair_correlation(records, cfg.trial.padded(), edges,
                                          cfg.stats.correction);
    CompareReport rep =
        compare_report(pc, wc, g, model, cfg.trial.window, hash);
    {
        std::string csv = csv_header(hash, "r,g2,stderr,theory_D_ratio");
        for (size_t i = 0; i < pc.r_mid.size(); ++i)
            csv += csv_num(pc.r_mid[i]) + "," + csv_num(pc.g2[i]) + "," +
                   csv_num(pc.stderr_[i]) + "," + csv_num(rep.g2_th[i]) +
                   "\n";
        write_text_atomic((dir / "g2.csv").string(), csv);
    }
    write_text_atomic((dir / "report.json").string(), rep.to_json() + "\n");

    SvgAxes axes{"pair correlation g2(r)", "r", "g2", true, false,
                 "config " + hash};
    SvgSeries emp{"empirical", pc.r_mid, pc.g2, "#1f77b4", true};
    SvgSeries th{"theory", pc.r_mid, rep.g2_th, "#d62728", false};
    write_text_atomic((dir / "g2.svg").string(),
                      render_line_plot(axes, {emp, th}));

    std::cout << "weyl mean " << wc.mean << " (expected " << rep.weyl_expected
              << "), repulsion slope " << rep.repulsion_slope
              << ", plateau ratio " << rep.plateau_ratio << "\n"
              << "wrote intensity.csv, g2.csv, g2.svg, report.json\n";
    return 0;
}

int cmd_theory(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    fs::path dir(cfg.out_dir);
    SymbolFunction g = cfg.trial.symbol();
    DensityModel model{cfg.trial.h, cfg.trial.delta(g), 1.0};
    std::string hash = cfg.trial.hash();

    Complex w0(0.0, cfg.theory.w0_im);
    if (!g.in_band(w0.imag()))
        throw OutOfBand("theory.w0_im outside the open band");
    double rmin = cfg.theory.r_min > 0 ? cfg.theory.r_min
                                       : 0.05 * std::sqrt(model.h);
    double rmax = cfg.theory.r_max > 0
                      ? cfg.theory.r_max
                      : std::min(6.0 * std::sqrt(model.h *
                                                 std::log(1.0 / model.h)),
                                 0.45 * g.band_width());
    if (rmax <= rmin)
        throw ConfigInvalid("theory r grid is empty");

    std::vector<double> rs, D, Dshort, Dlong, cond, cond_short;
    for (int i = 0; i < cfg.theory.points; ++i) {
        double r = rmin * std::pow(rmax / rmin,
                                   double(i) / (cfg.theory.points - 1));
        Complex z = w0 + r; // separation along Re, where sigma is constant
        rs.push_back(r);
        D.push_back(two_point_density(g, z, w0, model));
        Dshort.push_back(short_range_density(g, z, w0, model));
        Dlong.push_back(long_range_density(g, z, w0, model));
        cond.push_back(conditional_density(g, z, w0, model));
        cond_short.push_back(conditional_short_range(g, z, w0, model));
    }

    std::string csv = csv_header(hash, "r,D,D_short,D_long,conditional");
    for (size_t i = 0; i < rs.size(); ++i)
        csv += csv_num(rs[i]) + "," + csv_num(D[i]) + "," +
               csv_num(Dshort[i]) + "," + csv_num(Dlong[i]) + "," +
               csv_num(cond[i]) + "\n";
    write_text_atomic((dir / "theory.csv").string(), csv);

    // conditional density near w0: quadratic rise, then the one-point plateau
    std::vector<double> plateau(rs.size(),
                                one_point_density(g, w0, model));
    SvgAxes axes{"conditional eigenvalue density near w0", "|z - w0|",
                 "D(z, w0) / d(w0)", false, false,
                 "h = " + csv_num(model.h) + ", config " + hash};
    write_text_atomic(
        (dir / "theory.svg").string(),
        render_line_plot(axes,
                         {{"conditional", rs, cond, "#1f77b4", false},
                          {"short-range law", rs, cond_short, "#2ca02c",
                           false},
                          {"plateau d(w0)", rs, plateau, "#d62728", false}}));
    std::cout << "wrote theory.csv, theory.svg (" << rs.size()
              << " points, r in [" << rmin << ", " << rmax << "])\n";
    return 0;
}

int cmd_gramian(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    fs::path dir(cfg.out_dir);
    SymbolFunction g = cfg.trial.symbol();
    const GramianOptions& go = cfg.gramian;
    const double h = go.h;
    std::string hash = cfg.trial.hash();

    FourierTruncation tr = FourierTruncation::for_params(g, h, cfg.trial.C1);
    Matrix P = build_unperturbed(g, h, tr).matrix;
    QuasimodePair ref = reference_quasimode(P, Complex(0.0, 0.05));

    json rows = json::array();
    std::vector<double> ks, nlnxx;
    for (double mid : go.heights) {
        if (!g.in_band(mid))
            throw OutOfBand("gramian height " + csv_num(mid) +
                            " outside the open band");
        for (int i = 0; i < go.n_ratios; ++i) {
            double rho = go.ratio_lo + (go.ratio_hi - go.ratio_lo) * i /
                                           (go.n_ratios - 1);
            double r = rho * std::sqrt(h);
            Complex z(-0.5 * r, mid), w(0.5 * r, mid);
            GramianBundle b = gramian(P, z, w, h, go.step, ref.e0, ref.f0);
            double kpred = sigma_density(g, Complex(0, mid)) * r * r /
                           (4.0 * h);
            rows.push_back({{"z", {z.real(), z.imag()}},
                            {"w", {w.real(), w.imag()}},
                            {"h", h},
                            {"detA", b.detA},
                            {"detG", b.detG},
                            {"permGamma", b.permGamma},
                            {"trGamma", b.trGamma},
                            {"absXX", std::abs(b.xx)},
                            {"K_pred", kpred}});
            ks.push_back(kpred);
            nlnxx.push_back(-std::log(std::abs(b.xx)));
        }
    }
    LinearFit f = linear_fit(ks, nlnxx);

    json out;
    out["config_hash"] = hash;
    out["h"] = h;
    out["c_norm_fit"] = f.slope;
    out["c_norm_r2"] = f.r2;
    out["rows"] = rows;
    write_text_atomic((dir / "gramian.json").string(), out.dump(2) + "\n");

    std::vector<double> fitline;
    for (double k : ks)
        fitline.push_back(f.intercept + f.slope * k);
    SvgAxes axes{"quasimode overlap decay", "sigma(mid) |z-w|^2 / (4h)",
                 "-ln |(X(z)|X(w))|", false, false,
                 "c_norm fit " + csv_num(f.slope) + ", R^2 " + csv_num(f.r2)};
    write_text_atomic((dir / "gramian.svg").string(),
                      render_line_plot(axes,
                                       {{"pairs", ks, nlnxx, "#1f77b4", true},
                                        {"fit", ks, fitline, "#d62728",
                                         false}}));
    std::cout << "c_norm fit " << f.slope << " (R^2 " << f.r2 << ") over "
              << ks.size() << " pairs; wrote gramian.json, gramian.svg\n";
    return 0;
}

int cmd_pseudospectrum(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    fs::path dir(cfg.out_dir);
    SymbolFunction g = cfg.trial.symbol();
    const PseudospectrumOptions& po = cfg.pseudo;
    std::string hash = cfg.trial.hash();

    FourierTruncation tr =
        FourierTruncation::for_params(g, po.h, cfg.trial.C1);
    Matrix P = build_unperturbed(g, po.h, tr).matrix;

    std::vector<Complex> grid;
    for (int iy = 0; iy < po.ny; ++iy)
        for (int ix = 0; ix < po.nx; ++ix)
            grid.emplace_back(
                po.re_lo + (po.re_hi - po.re_lo) * ix / (po.nx - 1),
                po.im_lo + (po.im_hi - po.im_lo) * iy / (po.ny - 1));
    std::vector<double> rn = resolvent_norm_grid(P, grid);

    std::string csv = csv_header(hash, "re,im,s_min");
    std::vector<double> logres(rn.size());
    for (size_t k = 0; k < rn.size(); ++k) {
        csv += csv_num(grid[k].real()) + "," + csv_num(grid[k].imag()) + "," +
               csv_num(1.0 / rn[k]) + "\n";
        logres[k] = std::log10(rn[k]);
    }
    write_text_atomic((dir / "pseudospectrum.csv").string(), csv);

    SvgAxes axes{"log10 resolvent norm, h = " + csv_num(po.h), "Re z", "Im z",
                 false, false, "config " + hash};
    write_text_atomic((dir / "pseudospectrum.svg").string(),
                      render_heatmap(axes, po.nx, po.ny, logres, po.re_lo,
                                     po.re_hi, po.im_lo, po.im_hi));
    std::cout << "wrote pseudospectrum.csv, pseudospectrum.svg (" << po.nx
              << "x" << po.ny << " grid, dim " << tr.dim() << ")\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    AcceptanceOptions opt = default_acceptance_options();
    opt.work_dir = (fs::path(cfg.out_dir) / "acceptance_work").string();
    opt.mc.trial_count = std::max(200, cfg.trial.trial_count);
    opt.mc.workers = cfg.trial.workers;
    opt.log = &std::cout;
    auto results = run_acceptance(opt);
    write_text_atomic((fs::path(cfg.out_dir) / "acceptance.json").string(),
                      acceptance_json(results, opt.mc.hash()) + "\n");
    std::cout << (all_pass(results) ? "all criteria passed"
                                    : "ACCEPTANCE FAILURES PRESENT")
              << "; wrote acceptance.json\n";
    return all_pass(results) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory for the randomly perturbed model "
                 "operator hD + g(x) on the circle"};
    app.require_subcommand(1);
    app.fallthrough(); // shared flags may follow the subcommand

    std::string config_path, out_dir, seed_str;
    int workers = 0;
    bool resume = false;
    app.add_option("--config", config_path, "config file (sectioned key=value)");
    app.add_option("--out", out_dir, "output directory (overrides run.out_dir)");
    app.add_option("--workers", workers, "worker threads (overrides config/env)");
    app.add_option("--seed", seed_str, "master seed override (u64)");
    app.add_flag("--resume", resume, "continue an interrupted run");

    auto* sim = app.add_subcommand("simulate", "run the Monte-Carlo ensemble");
    auto* sta = app.add_subcommand("stats", "estimators over existing records");
    auto* the = app.add_subcommand("theory", "density theory curves");
    auto* gra = app.add_subcommand("gramian", "quasimode overlap sweep");
    auto* pse = app.add_subcommand("pseudospectrum", "s_min grid + heatmap");
    auto* ver = app.add_subcommand("verify", "full acceptance suite");

    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    try {
        if (!config_path.empty())
            cfg = RunConfig::from_file(config_path);
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
        if (!seed_str.empty())
            cfg.trial.master_seed = std::stoull(seed_str);
        if (const char* env = std::getenv("SPECLAB_WORKERS"))
            cfg.trial.workers = std::atoi(env);
        if (workers > 0)
            cfg.trial.workers = workers; // flag beats env beats config
        cfg.trial.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(cfg, resume);
        if (sta->parsed())
            return cmd_stats(cfg);
        if (the->parsed())
            return cmd_theory(cfg);
        if (gra->parsed())
            return cmd_gramian(cfg);
        if (pse->parsed())
            return cmd_pseudospectrum(cfg);
        if (ver->parsed())
            return cmd_verify(cfg);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MismatchedConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
